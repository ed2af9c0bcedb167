//! Two-channel filter banks: construction of the cubic special-spline
//! biorthogonal bank from its frequency responses, a small table of classical
//! comparison wavelets, and a numerical perfect-reconstruction check.
//!
//! Conventions used throughout:
//!
//! * A filter `c` has frequency response `C(ω) = ½ Σ_n c_n e^{-inω}`, so the
//!   low-pass filters sum to 2 and `C(0) = 1`.
//! * Analysis correlates: `a_k = ½ Σ_m h*_m x_{2k+m}` and likewise for `d_k`
//!   with `g*`. Synthesis convolves: `x_n = Σ_k a_k h_{n-2k} + d_k g_{n-2k}`.
//! * High-pass filters come from the opposite low-pass by alternating flip,
//!   `g*_k = (-1)^k h_{1-k}` and `g_k = (-1)^k h*_{1-k}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spline::{eval_p, eval_q, N_SYNTHESIS};

/// Number of points used when fitting the periodized `Q`.
pub const FIT_POINTS: usize = 4096;
/// Simpson panels for coefficient extraction.
pub const QUAD_PANELS: usize = 8192;
/// Fit errors above this level mark a periodization as approximate.
pub const FIT_WARNING_LEVEL: f64 = 1e-3;
/// Deviation above which a derived bank is rejected.
pub const PR_SCREEN: f64 = 1e-2;
/// Tolerance for the bundled classical banks.
pub const STANDARD_PR_TOLERANCE: f64 = 1e-8;
/// Default grid for [`verify_pr`].
pub const PR_GRID: usize = 4096;

/// Names accepted by [`standard_bank`].
pub const STANDARD_NAMES: [&str; 5] = ["haar", "db2", "coif1", "sym4", "rbio3.5"];

/// Finite impulse response with an explicit first index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    start: i64,
    coeffs: Vec<f64>,
}

impl Filter {
    pub fn new(start: i64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "filter needs at least one tap");
        Self { start, coeffs }
    }

    /// Index of the first coefficient.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Index of the last coefficient (inclusive).
    pub fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients in ascending index order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient at index `n`, zero outside the support.
    pub fn at(&self, n: i64) -> f64 {
        if n < self.start || n > self.end() {
            0.0
        } else {
            self.coeffs[(n - self.start) as usize]
        }
    }

    /// `(index, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &v)| (self.start + i as i64, v))
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// `Σ (-1)^n c_n`.
    pub fn alternating_sum(&self) -> f64 {
        self.iter().map(|(n, v)| if n.rem_euclid(2) == 0 { v } else { -v }).sum()
    }

    /// `½ Σ c_n e^{-inω}`.
    pub fn response(&self, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, v) in self.iter() {
            acc += Complex64::from_polar(v, -(n as f64) * omega);
        }
        acc * 0.5
    }

    /// Alternating flip `g_k = (-1)^k c_{1-k}` of this filter.
    pub fn alternating_flip(&self) -> Filter {
        let start = 1 - self.end();
        let coeffs = (start..=1 - self.start)
            .map(|k| {
                let v = self.at(1 - k);
                if k.rem_euclid(2) == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Filter::new(start, coeffs)
    }

    /// True for odd-length filters with `c_n = c_{-n}` exactly.
    pub fn is_symmetric_about_zero(&self) -> bool {
        self.len() % 2 == 1 && self.start == -(self.len() as i64 - 1) / 2 && self.iter().all(|(n, v)| self.at(-n) == v)
    }
}

/// Records the scaling convention of the low-pass filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Low-pass coefficients sum to 2, so `H(0) = 1` with the `½` prefactor.
    SumTwo,
}

/// Construction parameters of a derived special-spline bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BcsswParams {
    /// Total vanishing-moment budget `L = N + N*`.
    pub l: u32,
    /// Degree of the cosine polynomial replacing `Q`.
    pub degree: usize,
    /// Number of coefficients kept in each low-pass filter (odd).
    pub taps: usize,
}

impl Default for BcsswParams {
    fn default() -> Self {
        Self { l: 4, degree: 8, taps: 15 }
    }
}

/// How the transform extends a signal beyond its ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Whole-sample mirror (`… x2 x1 | x0 x1 x2 …`), used for odd symmetric banks.
    Symmetric,
    /// Wrap-around, used for banks without whole-sample symmetry.
    Periodic,
}

/// Analysis and synthesis filter pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    pub name: String,
    /// `h*`
    pub analysis_low: Filter,
    /// `g*`
    pub analysis_high: Filter,
    /// `h`
    pub synthesis_low: Filter,
    /// `g`
    pub synthesis_high: Filter,
    pub normalization: Normalization,
    /// Present for derived special-spline banks.
    pub bcssw: Option<BcsswParams>,
}

impl FilterBank {
    /// Completes a bank from its two low-pass filters.
    pub fn from_lowpass(name: impl Into<String>, analysis_low: Filter, synthesis_low: Filter) -> Self {
        let analysis_high = synthesis_low.alternating_flip();
        let synthesis_high = analysis_low.alternating_flip();
        Self {
            name: name.into(),
            analysis_low,
            analysis_high,
            synthesis_low,
            synthesis_high,
            normalization: Normalization::SumTwo,
            bcssw: None,
        }
    }

    /// Boundary rule the transform uses for this bank.
    pub fn boundary(&self) -> Boundary {
        if self.analysis_low.is_symmetric_about_zero() && self.synthesis_low.is_symmetric_about_zero() {
            Boundary::Symmetric
        } else {
            Boundary::Periodic
        }
    }

    /// Length of the longest analysis filter.
    pub fn max_analysis_len(&self) -> usize {
        self.analysis_low.len().max(self.analysis_high.len())
    }
}

/// Result of the perfect-reconstruction check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrReport {
    pub grid_size: usize,
    /// `max |H·conj(H*) + H(ω+π)·conj(H*(ω+π)) − 1|`.
    pub max_deviation: f64,
    /// `max |H·conj(G*) + H(ω+π)·conj(G*(ω+π))|`.
    pub alias_max: f64,
    /// Max fit error of the periodized `Q` (0 for classical banks).
    pub periodization_error: f64,
}

/// Checks the perfect-reconstruction identity of the stored finite filters
/// on `grid_size` frequencies spread over `[0, 2π)`.
pub fn verify_pr(bank: &FilterBank, grid_size: usize) -> Result<PrReport> {
    if grid_size < 64 {
        return Err(Error::Parameter(format!("grid_size must be >= 64, got {grid_size}")));
    }
    let mut max_dev: f64 = 0.0;
    let mut alias: f64 = 0.0;
    for j in 0..grid_size {
        let w = 2.0 * PI * j as f64 / grid_size as f64;
        let h = bank.synthesis_low.response(w);
        let hp = bank.synthesis_low.response(w + PI);
        let hs = bank.analysis_low.response(w);
        let hsp = bank.analysis_low.response(w + PI);
        let gs = bank.analysis_high.response(w);
        let gsp = bank.analysis_high.response(w + PI);
        let dev = h * hs.conj() + hp * hsp.conj() - 1.0;
        max_dev = max_dev.max(dev.norm());
        alias = alias.max((h * gs.conj() + hp * gsp.conj()).norm());
    }
    Ok(PrReport { grid_size, max_deviation: max_dev, alias_max: alias, periodization_error: 0.0 })
}

/// Whether a periodized fit met [`FIT_WARNING_LEVEL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    Ok,
    /// The fit error exceeds the warning level; the bank is approximate.
    Warning,
}

/// Cosine-polynomial stand-in `Q̃(ω) = Σ_m q_m cos(mω)` for `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodizedQ {
    pub coeffs: Vec<f64>,
    pub max_error: f64,
    pub status: FitStatus,
}

impl PeriodizedQ {
    pub fn eval(&self, omega: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(m, q)| q * (m as f64 * omega).cos()).sum()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn fit_grid() -> Vec<f64> {
    (0..FIT_POINTS).map(|i| PI * i as f64 / (FIT_POINTS - 1) as f64).collect()
}

/// Least-squares fit of `Q` by a cosine polynomial of the given degree on
/// [`FIT_POINTS`] equispaced points of `[0, π]`.
///
/// Degree 0 is accepted and yields the grid mean.
pub fn periodize_response(degree: usize) -> Result<PeriodizedQ> {
    let grid = fit_grid();
    let target: Vec<f64> = grid.iter().map(|&w| eval_q(w)).collect::<Result<_>>()?;
    let cols = degree + 1;
    let a = DMatrix::from_fn(FIT_POINTS, cols, |i, m| (m as f64 * grid[i]).cos());
    let b = DVector::from_vec(target.clone());
    let coeffs = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-13)
        .map_err(|e| Error::Parameter(format!("least-squares fit failed: {e}")))?;
    let fitted = &a * &coeffs;
    let max_error = fitted.iter().zip(&target).map(|(f, t)| (f - t).abs()).fold(0.0, f64::max);
    Ok(PeriodizedQ {
        coeffs: coeffs.iter().copied().collect(),
        max_error,
        status: if max_error <= FIT_WARNING_LEVEL { FitStatus::Ok } else { FitStatus::Warning },
    })
}

/// `c_n = (2/π) ∫₀^π f(ω) cos(nω) dω` for `n = 0..=k`, by composite Simpson.
fn cosine_coefficients(f: &[f64], k: usize) -> Vec<f64> {
    let panels = f.len() - 1;
    let h = PI / panels as f64;
    (0..=k)
        .map(|n| {
            let mut acc = 0.0;
            for (i, &v) in f.iter().enumerate() {
                let wgt = if i == 0 || i == panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += wgt * v * (n as f64 * i as f64 * h).cos();
            }
            2.0 / PI * acc * h / 3.0
        })
        .collect()
}

/// Minimal-norm symmetric correction of a truncated low-pass, given as its
/// half `c_0..c_K`, so that `Σ c = 2` and `Σ (-1)^n c = 0` hold exactly.
///
/// The correction has the form `λ0 + λ1 (-1)^n`, which keeps the filter
/// even and restores constant preservation and constant annihilation that
/// hard truncation breaks.
pub fn moment_correct(half: &[f64]) -> Vec<f64> {
    let k = half.len() - 1;
    let len = (2 * k + 1) as f64;
    let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let sum: f64 = half[0] + 2.0 * half[1..].iter().sum::<f64>();
    let alt: f64 = half[0] + 2.0 * half[1..].iter().enumerate().map(|(i, v)| sign(i + 1) * v).sum::<f64>();
    let s = sign(k); // Σ_{n=-K}^{K} (-1)^n
    let r0 = 2.0 - sum;
    let r1 = -alt;
    // Solve [[len, s], [s, len]] · [λ0, λ1] = [r0, r1].
    let det = len * len - s * s;
    let l0 = (len * r0 - s * r1) / det;
    let l1 = (len * r1 - s * r0) / det;
    half.iter().enumerate().map(|(n, v)| v + l0 + l1 * sign(n)).collect()
}

fn mirror(half: &[f64]) -> Filter {
    let k = half.len() - 1;
    let coeffs = half[1..].iter().rev().chain(half.iter()).copied().collect();
    Filter::new(-(k as i64), coeffs)
}

/// Builds the special-spline biorthogonal bank and rejects it when the
/// perfect-reconstruction deviation exceeds [`PR_SCREEN`].
///
/// See [`build_bcssw`] for the construction itself.
pub fn derive_bcssw(params: BcsswParams) -> Result<(FilterBank, PrReport)> {
    let (bank, report) = build_bcssw(params)?;
    if report.max_deviation > PR_SCREEN {
        return Err(Error::Biorthogonality { deviation: report.max_deviation });
    }
    Ok((bank, report))
}

/// Constructs the special-spline biorthogonal bank without screening it.
///
/// `Q` is replaced by its cosine-polynomial fit, the two low-pass symbols
/// are sampled on `[0, π]`, coefficients are extracted by quadrature,
/// truncated to `taps` symmetric taps and moment-corrected. The returned
/// report carries the fit error alongside the measured deviation.
pub fn build_bcssw(params: BcsswParams) -> Result<(FilterBank, PrReport)> {
    let BcsswParams { l, degree, taps } = params;
    if l <= N_SYNTHESIS {
        return Err(Error::Parameter(format!("L must be at least {} (got {l})", N_SYNTHESIS + 1)));
    }
    if taps < 5 || taps % 2 == 0 {
        return Err(Error::Parameter(format!("taps must be odd and >= 5, got {taps}")));
    }
    let n_star = l - N_SYNTHESIS;
    let q = periodize_response(degree)?;
    let nodes: Vec<f64> = (0..=QUAD_PANELS).map(|i| PI * i as f64 / QUAD_PANELS as f64).collect();
    let mut h_vals = Vec::with_capacity(nodes.len());
    let mut hs_vals = Vec::with_capacity(nodes.len());
    for &w in &nodes {
        let qt = q.eval(w);
        if qt.abs() < 1e-9 {
            return Err(Error::Singularity { omega: w });
        }
        let c = (w / 2.0).cos();
        h_vals.push(c.powi(4) * qt);
        let p = eval_p((w / 2.0).sin().powi(2), l)?;
        hs_vals.push(c.powi(2 * n_star as i32) * p / qt);
    }
    let k = (taps - 1) / 2;
    let h_half = moment_correct(&cosine_coefficients(&h_vals, k));
    let hs_half = moment_correct(&cosine_coefficients(&hs_vals, k));

    let mut bank = FilterBank::from_lowpass(format!("bcssw-L{l}-t{taps}-d{degree}"), mirror(&hs_half), mirror(&h_half));
    bank.bcssw = Some(params);
    let mut report = verify_pr(&bank, PR_GRID)?;
    report.periodization_error = q.max_error;
    Ok((bank, report))
}

/// One of the bundled classical wavelets, rescaled so low-pass filters sum
/// to 2 and checked with [`verify_pr`] before being returned.
pub fn standard_bank(name: &str) -> Result<FilterBank> {
    let s3 = 3f64.sqrt();
    let s7 = 7f64.sqrt();
    let bank = match name {
        "haar" => {
            let h = Filter::new(0, vec![1.0, 1.0]);
            FilterBank::from_lowpass("haar", h.clone(), h)
        }
        "db2" => {
            let h = Filter::new(-1, vec![(1.0 + s3) / 4.0, (3.0 + s3) / 4.0, (3.0 - s3) / 4.0, (1.0 - s3) / 4.0]);
            FilterBank::from_lowpass("db2", h.clone(), h)
        }
        "coif1" => {
            let h = Filter::new(
                -2,
                [-3.0 + s7, 1.0 - s7, 14.0 - 2.0 * s7, 14.0 + 2.0 * s7, 5.0 + s7, 1.0 - s7]
                    .iter()
                    .map(|v| v / 16.0)
                    .collect(),
            );
            FilterBank::from_lowpass("coif1", h.clone(), h)
        }
        "sym4" => {
            let h = Filter::new(
                -3,
                vec![
                    0.04557034589594986,
                    -0.01782470144168039,
                    -0.14031762417884566,
                    0.42123453420353657,
                    1.1366582434087495,
                    0.7037390686552258,
                    -0.0419109651250539,
                    -0.10714890141788212,
                ],
            );
            FilterBank::from_lowpass("sym4", h.clone(), h)
        }
        "rbio3.5" => {
            let analysis = Filter::new(-1, [1.0, 3.0, 3.0, 1.0].iter().map(|v| v / 4.0).collect());
            let synthesis = Filter::new(
                -5,
                [-5.0, 15.0, 19.0, -97.0, -26.0, 350.0, 350.0, -26.0, -97.0, 19.0, 15.0, -5.0]
                    .iter()
                    .map(|v| v / 256.0)
                    .collect(),
            );
            FilterBank::from_lowpass("rbio3.5", analysis, synthesis)
        }
        other => return Err(Error::UnknownWavelet(other.to_string())),
    };
    let report = verify_pr(&bank, PR_GRID)?;
    if report.max_deviation >= STANDARD_PR_TOLERANCE {
        return Err(Error::Biorthogonality { deviation: report.max_deviation });
    }
    Ok(bank)
}

/// A wavelet selection: a bundled classical bank or derived parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WaveletSpec {
    Standard { name: String },
    Bcssw(BcsswParams),
}

impl Default for WaveletSpec {
    fn default() -> Self {
        WaveletSpec::Bcssw(BcsswParams::default())
    }
}

impl WaveletSpec {
    /// Parses a bank name; `bcssw` selects the default derived parameters.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        if lower == "bcssw" {
            Ok(WaveletSpec::default())
        } else if STANDARD_NAMES.contains(&lower.as_str()) {
            Ok(WaveletSpec::Standard { name: lower })
        } else {
            Err(Error::UnknownWavelet(name.to_string()))
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            WaveletSpec::Standard { name } => name.clone(),
            WaveletSpec::Bcssw(_) => "bcssw".to_string(),
        }
    }

    pub fn resolve(&self) -> Result<FilterBank> {
        match self {
            WaveletSpec::Standard { name } => standard_bank(name),
            WaveletSpec::Bcssw(p) => derive_bcssw(*p).map(|(bank, _)| bank),
        }
    }
}
