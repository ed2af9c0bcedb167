//! Flat key-value configuration file (TOML syntax) mapped onto
//! [`PipelineConfig`]. Every key is optional; absent keys keep defaults.
//!
//! ```toml
//! wavelet = "bcssw"        # or haar, db2, coif1, sym4, rbio3.5
//! L = 4
//! taps = 15
//! degree = 8
//! alpha = 0.7
//! selector_t = 0.05
//! selector_window = 7
//! selector_stride = 3
//! selector_mean_low = 0.0
//! selector_mean_high = 1.0
//! selector_coverage = 0.9
//! selector_floor_mads = 3.0
//! selector_mode = "structural"  # or "literal"
//! morph_mu = 2.0
//! morph_scale = 255.0
//! morph_zero_weight_in_domain = true
//! ablation = []               # disable_branch1, disable_branch2, disable_selector
//! ed_fusion = "max"           # max, ignore, three_way_average
//! reconstruction = "dilation" # or "erosion"
//! normalize_subbands = true
//! ```

use std::path::Path;

use edbsw_core::morphology::ReconstructionStep;
use edbsw_core::{Ablation, BcsswParams, EdFusion, PipelineConfig, SelectorMode, WaveletSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    pub wavelet: Option<String>,
    #[serde(rename = "L")]
    pub l: Option<u32>,
    pub taps: Option<usize>,
    pub degree: Option<usize>,
    pub alpha: Option<f64>,
    pub selector_t: Option<f64>,
    pub selector_window: Option<usize>,
    pub selector_stride: Option<usize>,
    pub selector_mean_low: Option<f64>,
    pub selector_mean_high: Option<f64>,
    pub selector_coverage: Option<f64>,
    pub selector_floor_mads: Option<f64>,
    pub selector_mode: Option<SelectorMode>,
    pub morph_mu: Option<f64>,
    pub morph_scale: Option<f64>,
    pub morph_zero_weight_in_domain: Option<bool>,
    pub ablation: Option<Vec<Ablation>>,
    pub ed_fusion: Option<EdFusion>,
    pub reconstruction: Option<ReconstructionStep>,
    pub normalize_subbands: Option<bool>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::input(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Later values win: fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &FlatConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            wavelet,
            l,
            taps,
            degree,
            alpha,
            selector_t,
            selector_window,
            selector_stride,
            selector_mean_low,
            selector_mean_high,
            selector_coverage,
            selector_floor_mads,
            selector_mode,
            morph_mu,
            morph_scale,
            morph_zero_weight_in_domain,
            ablation,
            ed_fusion,
            reconstruction,
            normalize_subbands
        );
        self
    }

    /// Wavelet selection implied by `wavelet`, `L`, `taps` and `degree`.
    pub fn wavelet_spec(&self) -> CliResult<WaveletSpec> {
        let name = self.wavelet.as_deref().unwrap_or("bcssw");
        wavelet_from_parts(name, self.l, self.taps, self.degree)
    }

    pub fn to_pipeline(&self) -> CliResult<PipelineConfig> {
        let mut cfg = PipelineConfig { wavelet: self.wavelet_spec()?, ..PipelineConfig::default() };
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        let s = &mut cfg.selector;
        if let Some(v) = self.selector_t {
            s.t = v;
        }
        if let Some(v) = self.selector_window {
            s.window = (v, v);
        }
        if let Some(v) = self.selector_stride {
            s.stride = (v, v);
        }
        if let Some(v) = self.selector_mean_low {
            s.mean_gate.0 = v;
        }
        if let Some(v) = self.selector_mean_high {
            s.mean_gate.1 = v;
        }
        if let Some(v) = self.selector_coverage {
            s.coverage = v;
        }
        if let Some(v) = self.selector_floor_mads {
            s.floor_mads = v;
        }
        if let Some(v) = self.selector_mode {
            s.mode = v;
        }
        if let Some(v) = self.morph_mu {
            cfg.morph.mu = v;
        }
        if let Some(v) = self.morph_scale {
            cfg.morph.scale = v;
        }
        if let Some(v) = self.morph_zero_weight_in_domain {
            cfg.morph.zero_weight_in_domain = v;
        }
        if let Some(v) = &self.ablation {
            cfg.ablation = v.iter().copied().collect();
        }
        if let Some(v) = self.ed_fusion {
            cfg.ed_fusion = v;
        }
        if let Some(v) = self.reconstruction {
            cfg.reconstruction = v;
        }
        if let Some(v) = self.normalize_subbands {
            cfg.normalize_subbands = v;
        }
        cfg.validate().map_err(|e| CliError::input(format!("invalid config: {e}")))?;
        Ok(cfg)
    }
}

/// Builds a wavelet selection from a name plus optional derived-bank
/// parameters, which are only meaningful for `bcssw`.
pub fn wavelet_from_parts(
    name: &str,
    l: Option<u32>,
    taps: Option<usize>,
    degree: Option<usize>,
) -> CliResult<WaveletSpec> {
    let spec = WaveletSpec::from_name(name).map_err(|e| CliError::input(e.to_string()))?;
    Ok(match spec {
        WaveletSpec::Bcssw(d) => WaveletSpec::Bcssw(BcsswParams {
            l: l.unwrap_or(d.l),
            taps: taps.unwrap_or(d.taps),
            degree: degree.unwrap_or(d.degree),
        }),
        standard => {
            if l.is_some() || taps.is_some() || degree.is_some() {
                return Err(CliError::input(format!("L, taps and degree only apply to bcssw, not {name}")));
            }
            standard
        }
    })
}
