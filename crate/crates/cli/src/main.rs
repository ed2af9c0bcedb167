use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edbsw_cli::commands::{self, BatchOptions};
use edbsw_cli::config::{wavelet_from_parts, FlatConfig};
use edbsw_cli::io::atomic_write;
use edbsw_cli::manifest::{Command, EntropyMode, RunManifest};
use edbsw_cli::{CliError, CliResult};
use edbsw_core::baselines::BaselineParams;

/// Wavelet edge detection with a derived spline filter bank.
#[derive(Parser)]
#[command(name = "edbsw", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

/// Derived-bank and detector settings shared by several subcommands.
#[derive(Args, Clone, Default)]
struct DetectorFlags {
    /// Flat TOML configuration file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spline order parameter of the derived bank (bcssw only, >= 3).
    #[arg(long = "L")]
    l: Option<u32>,
    /// Number of filter taps (bcssw only, odd, >= 5).
    #[arg(long)]
    taps: Option<usize>,
    /// Degree of the cosine fit of the denominator (bcssw only).
    #[arg(long)]
    degree: Option<usize>,
    /// Fusion weight in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
}

impl DetectorFlags {
    fn merged(&self, wavelet: Option<String>) -> CliResult<FlatConfig> {
        let base = match &self.config {
            Some(p) => FlatConfig::load(p)?,
            None => FlatConfig::default(),
        };
        let flags = FlatConfig {
            wavelet,
            l: self.l,
            taps: self.taps,
            degree: self.degree,
            alpha: self.alpha,
            ..FlatConfig::default()
        };
        Ok(base.overlay(&flags))
    }
}

#[derive(Args)]
struct BatchFlags {
    /// Directory of PNG/PGM inputs.
    input_dir: PathBuf,
    /// Directory of edge masks named like the inputs (binarised at 0.5).
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Reference operator when no ground truth is given.
    #[arg(long, default_value = "canny")]
    reference: String,
    /// Entropy column definition.
    #[arg(long, value_enum, default_value_t = EntropyMode::Binary)]
    entropy: EntropyMode,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "EDBSW_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    detector: DetectorFlags,
}

#[derive(Subcommand)]
enum Cmd {
    /// Detect edges in one image and write an 8-bit PNG edge map.
    Detect {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Wavelet: bcssw, haar, db2, coif1, sym4 or rbio3.5.
        #[arg(long)]
        wavelet: Option<String>,
        /// Directory receiving every intermediate map plus stage timings.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[command(flatten)]
        detector: DetectorFlags,
    },
    /// Run an operator by wavelet comparison matrix over a directory.
    Compare {
        #[command(flatten)]
        batch: BatchFlags,
        /// Comma-separated operators: sobel, prewitt, canny, wtmm, edbsw.
        #[arg(long, default_value = "sobel,prewitt,canny,wtmm,edbsw")]
        operators: String,
        /// Comma-separated wavelets.
        #[arg(long, default_value = "bcssw")]
        wavelets: String,
    },
    /// Export the coefficients of a filter bank as JSON.
    Filters {
        #[arg(long, default_value = "bcssw")]
        wavelet: String,
        #[arg(long = "L")]
        l: Option<u32>,
        #[arg(long)]
        taps: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the detector with branches switched off.
    Ablate {
        #[command(flatten)]
        batch: BatchFlags,
        /// Comma-separated variants: full, woI, woIII, woI-II.
        #[arg(long, default_value = "full,woI,woIII,woI-II")]
        ablations: String,
        #[arg(long)]
        wavelet: Option<String>,
    },
    /// Write the bundled synthetic sample images.
    Synth {
        dir: PathBuf,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Repeat a run from its manifest side-file.
    Replay {
        manifest: PathBuf,
        /// Write outputs here instead of the recorded location.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, env = "EDBSW_JOBS", default_value_t = 0)]
        jobs: usize,
    },
}

/// Wavelet list for a batch; derived-bank flags apply to `bcssw` entries.
fn wavelet_list(list: &str, flat: &FlatConfig) -> CliResult<Vec<edbsw_core::WaveletSpec>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let spec = if name.eq_ignore_ascii_case("bcssw") {
            wavelet_from_parts(name, flat.l, flat.taps, flat.degree)?
        } else {
            wavelet_from_parts(name, None, None, None)?
        };
        if !out.contains(&spec) {
            out.push(spec);
        }
    }
    if out.is_empty() {
        return Err(CliError::input("wavelet list is empty"));
    }
    Ok(out)
}

fn batch_options(
    b: &BatchFlags,
    flat: &FlatConfig,
    operators: Vec<String>,
    wavelets: Vec<edbsw_core::WaveletSpec>,
) -> CliResult<BatchOptions> {
    Ok(BatchOptions {
        input_dir: b.input_dir.clone(),
        ground_truth: b.ground_truth.clone(),
        operators,
        wavelets,
        reference: b.reference.clone(),
        entropy: b.entropy,
        pipeline: flat.to_pipeline()?,
        baseline: BaselineParams::default(),
        output: b.output.clone(),
    })
}

fn report(m: &RunManifest) {
    let failed = m.failures();
    eprintln!(
        "wrote {} ({} items, {} failed); manifest {}",
        m.output.display(),
        m.items.len(),
        failed,
        RunManifest::path_for(&m.output).display()
    );
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Cmd::Detect { input, output, wavelet, trace_dir, detector } => {
            let cfg = detector.merged(wavelet)?.to_pipeline()?;
            let plan = commands::plan_detect(&input, &output, cfg, trace_dir.as_deref());
            report(&commands::execute(plan)?);
        }
        Cmd::Compare { batch, operators, wavelets } => {
            let flat = batch.detector.merged(None)?;
            let ops = commands::parse_operators(&operators)?;
            let opts = batch_options(&batch, &flat, ops, wavelet_list(&wavelets, &flat)?)?;
            let plan = commands::plan_batch(Command::Compare, opts)?;
            report(&commands::with_jobs(batch.jobs, || commands::execute(plan))??);
        }
        Cmd::Ablate { batch, ablations, wavelet } => {
            let ops = commands::parse_ablations(&ablations)?;
            let flat = batch.detector.merged(wavelet)?;
            let opts = batch_options(&batch, &flat, ops, vec![flat.wavelet_spec()?])?;
            let plan = commands::plan_batch(Command::Ablate, opts)?;
            report(&commands::with_jobs(batch.jobs, || commands::execute(plan))??);
        }
        Cmd::Filters { wavelet, l, taps, degree, output } => {
            let spec = wavelet_from_parts(&wavelet, l, taps, degree)?;
            let json = commands::filters(&spec)?;
            match output {
                Some(p) => atomic_write(&p, json.as_bytes())?,
                None => print!("{json}"),
            }
        }
        Cmd::Synth { dir, size, sigma, seed } => {
            for p in commands::synth(&dir, size, sigma, seed)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Cmd::Replay { manifest, output, jobs } => {
            let mut plan = RunManifest::load(&manifest)?;
            if let Some(o) = output {
                plan.output = std::path::absolute(&o).unwrap_or(o);
            }
            report(&commands::with_jobs(jobs, || commands::execute(plan))??);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { edbsw_cli::EXIT_INPUT } else { edbsw_cli::EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
