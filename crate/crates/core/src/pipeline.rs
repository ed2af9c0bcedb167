//! End-to-end edge detector: decomposition, three feature branches and the
//! final context-weighted fusion.
//!
//! Stages, in order:
//!
//! 1. the input is upsampled ×2 and decomposed once;
//! 2. branch I: anti-noise morphology on `cA` gives `E_d`;
//! 3. branch II: modulus maxima of the `cA` gradient (`E_l`) and of the
//!    combined detail modulus (`E_h`), fused into the mask `E_m`, which then
//!    absorbs `E_d`;
//! 4. branch III: selected detail coefficients are thresholded, rebuilt with
//!    `cA` zeroed, downsampled (`E_r`), refined (`F_d`) and reconstructed
//!    under `E_m` (`G`);
//! 5. `E_u = α·G + (1 − α)·E_m`.
//!
//! Every map entering the final fusion already lies in `[0, 1]` and
//! `G ≤ E_m`, so `E_u` is in range without a further rescale; this keeps the
//! `α = 0` and `α = 1` limits equal to `E_m` and `G` exactly.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dwt::{downsample2, dwt2, idwt2, upsample2, WaveletDecomposition};
use crate::edge::{adaptive_threshold, gradient, modulus_highfreq, nms, uncertainty_select, SelectorParams};
use crate::error::{Error, Result};
use crate::filterbank::{FilterBank, WaveletSpec};
use crate::grid::{normalize_max, EdgeMap, ImageGrid};
use crate::morphology::{
    anti_noise, reconstruct_with, refine, weighted_fuse, MorphConfig, ReconstructionStep, StructuringElement,
};

/// Smallest accepted input side.
pub const MIN_SIDE: usize = 16;

/// Branches that can be switched off for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// Drop the anti-noise map `E_d`.
    DisableBranch1,
    /// Use `E_l` alone as the mask `E_m`.
    DisableBranch2,
    /// Skip window selection and suppress non-maxima over whole subbands.
    DisableSelector,
}

/// How `E_d` enters the mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdFusion {
    /// `E_m ← max(E_m, E_d)`.
    Max,
    /// `E_d` is computed but not used.
    Ignore,
    /// `E_m ← (E_h + E_l + E_d) / 3`.
    ThreeWayAverage,
}

/// Full detector configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub wavelet: WaveletSpec,
    /// Fusion weight shared by the mask and final fusions.
    pub alpha: f64,
    pub selector: SelectorParams,
    pub morph: MorphConfig,
    pub ablation: BTreeSet<Ablation>,
    pub ed_fusion: EdFusion,
    /// Elementary step of the branch III reconstruction.
    pub reconstruction: ReconstructionStep,
    /// Max-normalise each thresholded detail subband before rebuilding.
    pub normalize_subbands: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletSpec::default(),
            alpha: 0.7,
            selector: SelectorParams::default(),
            morph: MorphConfig::default(),
            ablation: BTreeSet::new(),
            ed_fusion: EdFusion::Max,
            reconstruction: ReconstructionStep::Dilation,
            normalize_subbands: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Parameter(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        self.selector.validate()?;
        self.morph.validate()
    }

    pub fn with_ablation(mut self, items: &[Ablation]) -> Self {
        self.ablation = items.iter().copied().collect();
        self
    }
}

/// Wall-clock time of one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub ms: f64,
}

/// Intermediate maps and stage timings of one detection run.
#[derive(Debug, Clone, Default)]
pub struct PipelineTrace {
    pub e_d: Option<ImageGrid>,
    pub e_h: Option<ImageGrid>,
    pub e_l: Option<ImageGrid>,
    pub e_m: Option<ImageGrid>,
    pub ch_sel: Option<ImageGrid>,
    pub cv_sel: Option<ImageGrid>,
    pub cd_sel: Option<ImageGrid>,
    /// Thresholded (and optionally normalised) detail subbands `[cH, cV, cD]`.
    pub m_f: Option<[ImageGrid; 3]>,
    pub e_r: Option<ImageGrid>,
    pub f_d: Option<ImageGrid>,
    pub g: Option<ImageGrid>,
    pub e_u: Option<ImageGrid>,
    /// Number of windows kept by the selector (`None` when it was bypassed).
    pub selected_windows: Option<usize>,
    pub reconstruction_iterations: usize,
    pub timings: Vec<StageTiming>,
}

impl PipelineTrace {
    /// Named intermediates that are present, in pipeline order.
    pub fn named_grids(&self) -> Vec<(String, &ImageGrid)> {
        let mut out: Vec<(String, &ImageGrid)> = Vec::new();
        let singles = [
            ("E_d", &self.e_d),
            ("E_h", &self.e_h),
            ("E_l", &self.e_l),
            ("E_m", &self.e_m),
            ("CH_sel", &self.ch_sel),
            ("CV_sel", &self.cv_sel),
            ("CD_sel", &self.cd_sel),
        ];
        for (n, g) in singles {
            if let Some(g) = g {
                out.push((n.to_string(), g));
            }
        }
        if let Some(mf) = &self.m_f {
            for (n, g) in ["M_f_h", "M_f_v", "M_f_d"].iter().zip(mf.iter()) {
                out.push((n.to_string(), g));
            }
        }
        for (n, g) in [("E_r", &self.e_r), ("F_d", &self.f_d), ("G", &self.g), ("E_u", &self.e_u)] {
            if let Some(g) = g {
                out.push((n.to_string(), g));
            }
        }
        out
    }
}

struct Clock {
    last: Instant,
    timings: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Self { last: Instant::now(), timings: Vec::new() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(StageTiming { stage: stage.to_string(), ms: (now - self.last).as_secs_f64() * 1e3 });
        self.last = now;
    }
}

/// Thresholded, non-maximum-suppressed modulus scaled to `[0, 1]`.
fn maxima_map(modulus: &ImageGrid, angle: &ImageGrid) -> Result<ImageGrid> {
    Ok(normalize_max(&adaptive_threshold(&nms(modulus, angle)?)))
}

/// Runs the detector with an already resolved filter bank.
pub fn detect_with_bank(img: &ImageGrid, bank: &FilterBank, cfg: &PipelineConfig) -> Result<(EdgeMap, PipelineTrace)> {
    cfg.validate()?;
    let (h, w) = img.dims();
    if h < MIN_SIDE || w < MIN_SIDE {
        return Err(Error::Dimension(format!("input must be at least {MIN_SIDE}x{MIN_SIDE}, got {h}x{w}")));
    }
    let mut clock = Clock::new();
    let mut trace = PipelineTrace::default();

    let up = upsample2(img);
    let dec = dwt2(&up, bank).map_err(|e| e.at("decompose"))?;
    clock.lap("decompose");

    // Branch I.
    let ca01 = dec.ca.map(|v| v.clamp(0.0, 1.0));
    let e_d = anti_noise(&ca01, &cfg.morph).map_err(|e| e.at("anti_noise"))?;
    clock.lap("branch1");

    // Branch II.
    let grad = gradient(&dec.ca).map_err(|e| e.at("gradient"))?;
    let e_l = maxima_map(&grad.modulus, &grad.angle).map_err(|e| e.at("low_maxima"))?;
    let (m_c, a_s) = modulus_highfreq(&dec.ch, &dec.cv, &dec.cd).map_err(|e| e.at("high_modulus"))?;
    let e_h = maxima_map(&m_c, &a_s).map_err(|e| e.at("high_maxima"))?;
    let mut e_m = if cfg.ablation.contains(&Ablation::DisableBranch2) {
        e_l.clone()
    } else {
        weighted_fuse(&e_h, &e_l, cfg.alpha).map_err(|e| e.at("mask_fusion"))?
    };
    if !cfg.ablation.contains(&Ablation::DisableBranch1) {
        e_m = match cfg.ed_fusion {
            EdFusion::Max => e_m.zip_map(&e_d, f64::max)?,
            EdFusion::Ignore => e_m,
            EdFusion::ThreeWayAverage => {
                let s = e_h.zip_map(&e_l, |a, b| a + b)?;
                s.zip_map(&e_d, |a, b| (a + b) / 3.0)?
            }
        };
    }
    clock.lap("branch2");

    // Branch III.
    let (sel, selected) = if cfg.ablation.contains(&Ablation::DisableSelector) {
        let mods = [dec.ch.map(f64::abs), dec.cv.map(f64::abs), dec.cd.map(f64::abs)];
        let out = [nms(&mods[0], &a_s)?, nms(&mods[1], &a_s)?, nms(&mods[2], &a_s)?];
        (out, None)
    } else {
        let s = uncertainty_select(&dec, &cfg.selector).map_err(|e| e.at("select"))?;
        let n = s.selected_count();
        ([s.ch, s.cv, s.cd], Some(n))
    };
    let m_f: [ImageGrid; 3] = sel.clone().map(|g| {
        let t = adaptive_threshold(&g);
        if cfg.normalize_subbands {
            normalize_max(&t)
        } else {
            t
        }
    });
    let zero_ca = ImageGrid::zeros(dec.ca.height(), dec.ca.width());
    let rebuilt = WaveletDecomposition::with_original_dims(
        zero_ca,
        m_f[0].clone(),
        m_f[1].clone(),
        m_f[2].clone(),
        dec.orig_height,
        dec.orig_width,
    )?;
    let r = idwt2(&rebuilt, bank).map_err(|e| e.at("reconstruct_details"))?;
    let e_r = normalize_max(&downsample2(&r).map_err(|e| e.at("downsample"))?.map(f64::abs));
    let f_d = refine(&e_r, &cfg.morph).map_err(|e| e.at("refine"))?;
    let marker = f_d.zip_map(&e_m, f64::min)?;
    let rec = reconstruct_with(&marker, &e_m, &StructuringElement::flat(), cfg.reconstruction, cfg.morph.scale)
        .map_err(|e| e.at("geodesic_reconstruction"))?;
    clock.lap("branch3");

    let fused = weighted_fuse(&rec.grid, &e_m, cfg.alpha).map_err(|e| e.at("final_fusion"))?;
    let e_u = fused.map(|v| v.clamp(0.0, 1.0));
    clock.lap("fusion");

    trace.e_d = Some(e_d);
    trace.e_h = Some(e_h);
    trace.e_l = Some(e_l);
    trace.e_m = Some(e_m);
    let [ch, cv, cd] = sel;
    trace.ch_sel = Some(ch);
    trace.cv_sel = Some(cv);
    trace.cd_sel = Some(cd);
    trace.m_f = Some(m_f);
    trace.e_r = Some(e_r);
    trace.f_d = Some(f_d);
    trace.g = Some(rec.grid);
    trace.e_u = Some(e_u.clone());
    trace.selected_windows = selected;
    trace.reconstruction_iterations = rec.iterations;
    trace.timings = clock.timings;
    Ok((e_u, trace))
}

/// Resolves `cfg.wavelet` and runs the detector.
pub fn edbsw_detect(img: &ImageGrid, cfg: &PipelineConfig) -> Result<(EdgeMap, PipelineTrace)> {
    let bank = cfg.wavelet.resolve().map_err(|e| e.at("filterbank"))?;
    detect_with_bank(img, &bank, cfg)
}

/// Runs the detector with the ablations listed in `cfg.ablation`.
///
/// An empty set is accepted and reproduces [`edbsw_detect`] exactly; the
/// CLI is where an empty ablation list is rejected.
pub fn ablate(img: &ImageGrid, cfg: &PipelineConfig) -> Result<EdgeMap> {
    edbsw_detect(img, cfg).map(|(e, _)| e)
}
