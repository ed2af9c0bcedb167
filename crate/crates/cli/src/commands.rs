//! Subcommand implementations. Each batch command first builds a
//! [`RunManifest`] describing the run, then [`execute`] carries it out, so
//! a replay goes through exactly the same code path.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use edbsw_core::baselines::{run_baseline, wtmm_with_bank, BaselineOperator, BaselineParams};
use edbsw_core::filterbank::{verify_pr, PR_GRID};
use edbsw_core::grid::normalize_offset;
use edbsw_core::metrics::{entropy, histogram_entropy, mse, psnr_from_mse, ssim};
use edbsw_core::pipeline::detect_with_bank;
use edbsw_core::synthetic::{add_gaussian_noise, inner_contour, shape_image, Shape};
use edbsw_core::{derive_bcssw, standard_bank, Ablation, FilterBank, ImageGrid, PipelineConfig, WaveletSpec};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::filters::filters_json;
use crate::io::{atomic_write, find_by_id, image_id, list_images, read_gray, write_gray};
use crate::manifest::{Command, EntropyMode, ItemStatus, RunManifest, Status};
use crate::report::{sort_rows, write_csv, ReportRow};

/// Operators accepted by `compare`.
pub const COMPARE_OPERATORS: [&str; 5] = ["sobel", "prewitt", "canny", "wtmm", "edbsw"];

/// Ablation variants accepted by `ablate`, with their operator labels.
pub const ABLATION_VARIANTS: [(&str, &str); 4] =
    [("full", "edbsw"), ("woI", "edbsw-woI"), ("woIII", "edbsw-woIII"), ("woI-II", "edbsw-woI-II")];

/// Ablation set behind an operator label, or `None` for non-detector labels.
fn ablation_of(operator: &str) -> Option<Vec<Ablation>> {
    match operator {
        "edbsw" => Some(vec![]),
        "edbsw-woI" => Some(vec![Ablation::DisableBranch1]),
        "edbsw-woIII" => Some(vec![Ablation::DisableSelector]),
        "edbsw-woI-II" => Some(vec![Ablation::DisableBranch1, Ablation::DisableBranch2]),
        _ => None,
    }
}

fn baseline_of(operator: &str) -> Option<BaselineOperator> {
    match operator {
        "sobel" => Some(BaselineOperator::Sobel),
        "prewitt" => Some(BaselineOperator::Prewitt),
        "canny" => Some(BaselineOperator::Canny),
        _ => None,
    }
}

/// Parses a comma-separated operator list against the allowed names.
pub fn parse_operators(list: &str) -> CliResult<Vec<String>> {
    let ops: Vec<String> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    if ops.is_empty() {
        return Err(CliError::input("operator list is empty"));
    }
    for op in &ops {
        if !COMPARE_OPERATORS.contains(&op.as_str()) {
            return Err(CliError::input(format!(
                "unknown operator `{op}` (expected one of {})",
                COMPARE_OPERATORS.join(", ")
            )));
        }
    }
    Ok(dedup(ops))
}

/// Parses a comma-separated ablation list (`full,woI,woIII,woI-II`) into
/// operator labels. An empty list is an input error.
pub fn parse_ablations(list: &str) -> CliResult<Vec<String>> {
    let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(CliError::input("ablation list is empty"));
    }
    let mut ops = Vec::new();
    for n in names {
        let (_, label) = ABLATION_VARIANTS
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(n))
            .ok_or_else(|| CliError::input(format!("unknown ablation `{n}` (expected full, woI, woIII or woI-II)")))?;
        ops.push(label.to_string());
    }
    Ok(dedup(ops))
}

fn dedup(items: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for i in items {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// Resolves a wavelet selection, mapping failures onto exit statuses.
pub fn resolve_bank(spec: &WaveletSpec) -> CliResult<FilterBank> {
    spec.resolve().map_err(CliError::from_bank)
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Describes a single-image detection.
pub fn plan_detect(input: &Path, output: &Path, cfg: PipelineConfig, trace_dir: Option<&Path>) -> RunManifest {
    RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: Command::Detect,
        inputs: vec![absolute(input)],
        ground_truth_dir: None,
        operators: vec!["edbsw".into()],
        wavelets: vec![cfg.wavelet.clone()],
        reference: "none".into(),
        entropy: EntropyMode::default(),
        pipeline: cfg,
        baseline: BaselineParams::default(),
        output: absolute(output),
        trace_dir: trace_dir.map(absolute),
        items: Vec::new(),
    }
}

/// Options shared by `compare` and `ablate`.
#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub input_dir: PathBuf,
    pub ground_truth: Option<PathBuf>,
    pub operators: Vec<String>,
    pub wavelets: Vec<WaveletSpec>,
    /// Reference operator used when no ground truth is given.
    pub reference: String,
    pub entropy: EntropyMode,
    pub pipeline: PipelineConfig,
    pub baseline: BaselineParams,
    pub output: PathBuf,
}

pub fn plan_batch(command: Command, opts: BatchOptions) -> CliResult<RunManifest> {
    let inputs = list_images(&opts.input_dir)?;
    if let Some(gt) = &opts.ground_truth {
        if !gt.is_dir() {
            return Err(CliError::input(format!("ground-truth directory {} does not exist", gt.display())));
        }
    }
    if opts.wavelets.is_empty() {
        return Err(CliError::input("wavelet list is empty"));
    }
    let reference = match &opts.ground_truth {
        Some(_) => "ground_truth".to_string(),
        None => {
            if baseline_of(&opts.reference).is_none() {
                return Err(CliError::input(format!(
                    "reference operator must be sobel, prewitt or canny, got `{}`",
                    opts.reference
                )));
            }
            format!("operator:{}", opts.reference)
        }
    };
    Ok(RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        inputs: inputs.iter().map(|p| absolute(p)).collect(),
        ground_truth_dir: opts.ground_truth.as_deref().map(absolute),
        operators: opts.operators,
        wavelets: opts.wavelets,
        reference,
        entropy: opts.entropy,
        pipeline: opts.pipeline,
        baseline: opts.baseline,
        output: absolute(&opts.output),
        trace_dir: None,
        items: Vec::new(),
    })
}

/// Carries out a planned run, writes its outputs and manifest, and returns
/// the completed manifest.
pub fn execute(mut plan: RunManifest) -> CliResult<RunManifest> {
    plan.items.clear();
    match plan.command {
        Command::Detect => run_detect(&mut plan)?,
        Command::Compare | Command::Ablate => run_batch(&mut plan)?,
    }
    plan.write()?;
    Ok(plan)
}

fn run_detect(plan: &mut RunManifest) -> CliResult<()> {
    let input = plan.inputs[0].clone();
    let img = read_gray(&input)?;
    let bank = resolve_bank(&plan.pipeline.wavelet)?;
    let label = plan.pipeline.wavelet.label();
    let result = detect_with_bank(&img, &bank, &plan.pipeline);
    let (edge, trace) = match result {
        Ok(v) => v,
        Err(e) => {
            plan.items.push(ItemStatus {
                input,
                operator: "edbsw".into(),
                wavelet: label,
                status: Status::Failed,
                message: Some(e.to_string()),
            });
            plan.write()?;
            return Err(CliError::from_pipeline(e));
        }
    };
    write_gray(&plan.output, &edge)?;
    if let Some(dir) = &plan.trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        for (name, grid) in trace.named_grids() {
            let g = if grid.min() < 0.0 || grid.max() > 1.0 { normalize_offset(grid) } else { grid.clone() };
            write_gray(&dir.join(format!("{name}.png")), &g)?;
        }
        let timings = serde_json::json!({
            "stages": trace.timings,
            "selected_windows": trace.selected_windows,
            "reconstruction_iterations": trace.reconstruction_iterations,
        });
        atomic_write(&dir.join("timings.json"), serde_json::to_string_pretty(&timings).expect("json").as_bytes())?;
    }
    plan.items.push(ItemStatus { input, operator: "edbsw".into(), wavelet: label, status: Status::Ok, message: None });
    Ok(())
}

/// Reference map for one image: binarised ground truth or a baseline output.
fn reference_for(plan: &RunManifest, path: &Path, img: &ImageGrid) -> Result<ImageGrid, String> {
    match &plan.ground_truth_dir {
        Some(dir) => {
            let id = image_id(path);
            let gt_path =
                find_by_id(dir, &id).ok_or_else(|| format!("no ground truth for `{id}` in {}", dir.display()))?;
            let gt = read_gray(&gt_path).map_err(|e| e.message)?;
            if gt.dims() != img.dims() {
                return Err(format!(
                    "ground truth {} has dims {:?}, image has {:?}",
                    gt_path.display(),
                    gt.dims(),
                    img.dims()
                ));
            }
            Ok(gt.map(|v| if v > 0.5 { 1.0 } else { 0.0 }))
        }
        None => {
            let name = plan.reference.trim_start_matches("operator:");
            let op = baseline_of(name).ok_or_else(|| format!("bad reference `{}`", plan.reference))?;
            run_baseline(op, img, &plan.baseline).map_err(|e| e.to_string())
        }
    }
}

fn run_operator(
    op: &str,
    img: &ImageGrid,
    bank: &FilterBank,
    spec: &WaveletSpec,
    plan: &RunManifest,
) -> Result<ImageGrid, String> {
    if let Some(b) = baseline_of(op) {
        return run_baseline(b, img, &plan.baseline).map_err(|e| e.to_string());
    }
    if op == "wtmm" {
        return wtmm_with_bank(img, bank).map_err(|e| e.to_string());
    }
    let ablation = ablation_of(op).ok_or_else(|| format!("unknown operator `{op}`"))?;
    let cfg = PipelineConfig { wavelet: spec.clone(), ..plan.pipeline.clone() }.with_ablation(&ablation);
    detect_with_bank(img, bank, &cfg).map(|(e, _)| e).map_err(|e| e.to_string())
}

fn run_batch(plan: &mut RunManifest) -> CliResult<()> {
    for op in &plan.operators {
        if baseline_of(op).is_none() && op != "wtmm" && ablation_of(op).is_none() {
            return Err(CliError::input(format!("unknown operator `{op}`")));
        }
    }
    // Each bank is built once for the whole batch.
    let banks: Vec<FilterBank> = plan.wavelets.iter().map(resolve_bank).collect::<CliResult<_>>()?;

    struct Item<'a> {
        input: &'a PathBuf,
        image: &'a Result<(ImageGrid, ImageGrid), String>,
        op: &'a str,
        w: usize,
    }
    let loaded: Vec<Result<(ImageGrid, ImageGrid), String>> = plan
        .inputs
        .par_iter()
        .map(|p| {
            let img = read_gray(p).map_err(|e| e.message)?;
            let reference = reference_for(plan, p, &img)?;
            Ok((img, reference))
        })
        .collect();
    let mut items = Vec::new();
    for (input, image) in plan.inputs.iter().zip(&loaded) {
        for op in &plan.operators {
            for w in 0..plan.wavelets.len() {
                items.push(Item { input, image, op, w });
            }
        }
    }
    let plan_ref = &*plan;
    let results: Vec<(ItemStatus, Option<ReportRow>)> = items
        .par_iter()
        .map(|it| {
            let spec = &plan_ref.wavelets[it.w];
            let label = spec.label();
            let outcome = it.image.as_ref().map_err(Clone::clone).and_then(|(img, reference)| {
                let t0 = Instant::now();
                let edge = run_operator(it.op, img, &banks[it.w], spec, plan_ref)?;
                let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
                let m = mse(&edge, reference).map_err(|e| e.to_string())?;
                let s = ssim(&edge, reference).map_err(|e| e.to_string())?;
                let ent = match plan_ref.entropy {
                    EntropyMode::Binary => entropy(&edge),
                    EntropyMode::Histogram => histogram_entropy(&edge),
                };
                Ok(ReportRow {
                    image_id: image_id(it.input),
                    operator: it.op.to_string(),
                    wavelet: label.clone(),
                    mse: m,
                    psnr_db: psnr_from_mse(m),
                    ssim: s,
                    entropy: ent,
                    wall_ms,
                })
            });
            let status = ItemStatus {
                input: it.input.clone(),
                operator: it.op.to_string(),
                wavelet: label,
                status: if outcome.is_ok() { Status::Ok } else { Status::Failed },
                message: outcome.as_ref().err().cloned(),
            };
            (status, outcome.ok())
        })
        .collect();

    let mut rows = Vec::new();
    for (status, row) in results {
        if let Some(msg) = &status.message {
            eprintln!("warning: {} / {} / {}: {msg}", status.input.display(), status.operator, status.wavelet);
        }
        plan.items.push(status);
        rows.extend(row);
    }
    sort_rows(&mut rows);
    write_csv(&plan.output, &rows)?;
    if rows.is_empty() {
        plan.write()?;
        return Err(CliError::pipeline("every batch item failed; see the manifest for details"));
    }
    Ok(())
}

/// Builds the requested bank and renders its JSON export.
pub fn filters(spec: &WaveletSpec) -> CliResult<String> {
    let (bank, report) = match spec {
        WaveletSpec::Standard { name } => {
            let bank = standard_bank(name).map_err(CliError::from_bank)?;
            let report = verify_pr(&bank, PR_GRID).map_err(CliError::from_bank)?;
            (bank, report)
        }
        WaveletSpec::Bcssw(p) => derive_bcssw(*p).map_err(CliError::from_bank)?,
    };
    Ok(filters_json(&bank, &report))
}

/// Writes the bundled sample images under `dir`:
/// `square.pgm` (clean) and `synthetic/{square,disk,triangle}.pgm` with
/// Gaussian noise plus their inner contours in `synthetic/gt/`.
pub fn synth(dir: &Path, size: usize, sigma: f64, seed: u64) -> CliResult<Vec<PathBuf>> {
    if size < 16 {
        return Err(CliError::input(format!("size must be at least 16, got {size}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(CliError::input(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    let syn = dir.join("synthetic");
    let gt = syn.join("gt");
    std::fs::create_dir_all(&gt).map_err(|e| CliError::input(format!("cannot create {}: {e}", gt.display())))?;
    let mut written = BTreeMap::new();
    written.insert(dir.join("square.pgm"), shape_image(Shape::Square, size));
    for (i, (name, shape)) in
        [("square", Shape::Square), ("disk", Shape::Disk), ("triangle", Shape::Triangle)].into_iter().enumerate()
    {
        let clean = shape_image(shape, size);
        written.insert(syn.join(format!("{name}.pgm")), add_gaussian_noise(&clean, sigma, seed + i as u64));
        written.insert(gt.join(format!("{name}.pgm")), inner_contour(&clean));
    }
    for (path, grid) in &written {
        write_gray(path, grid)?;
    }
    Ok(written.into_keys().collect())
}

/// Runs `f` inside a pool of `jobs` threads (0 = rayon's default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::input(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}
