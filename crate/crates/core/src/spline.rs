//! Cubic B-spline, the compact "special" cubic spline built from five shifted
//! B-splines, and the analytic frequency responses used to derive the
//! biorthogonal filter bank.
//!
//! All responses here are zero-phase, so they are real-valued for real `ω`;
//! the high-pass symbols carry a linear phase and are returned as complex
//! numbers by [`FrequencyResponse::eval`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vanishing-moment order of the synthesis low-pass `H`.
pub const N_SYNTHESIS: u32 = 2;

/// Half-width of the special spline's support: `2 + 1/8`.
pub const SPECIAL_SUPPORT: f64 = 2.0 + 1.0 / 8.0;

/// Weights of the special spline, as `(shift, weight)` pairs applied to
/// `β3(t - shift)`. The outer pair uses 32/3 so that the time-domain sum
/// matches the closed-form transform (and integrates to one).
pub const SPECIAL_TERMS: [(f64, f64); 5] = [
    (0.0, 451.0 / 3.0),
    (1.0 / 16.0, -256.0 / 3.0),
    (-1.0 / 16.0, -256.0 / 3.0),
    (1.0 / 8.0, 32.0 / 3.0),
    (-1.0 / 8.0, 32.0 / 3.0),
];

/// Denominators smaller than this are reported as singular.
const SINGULAR_EPS: f64 = 1e-9;

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {x}")))
    }
}

/// Cubic B-spline `β3(t)` evaluated from its truncated-power expansion
/// `Σ_{i=0}^{4} (-1)^i C(4,i)/6 · (t + 2 - i)^3_+`.
///
/// The sum is evaluated at `-|t|`, where at most the first few terms are
/// active, which keeps rounding small near the support ends and makes the
/// result bit-for-bit even.
pub fn eval_bspline3(t: f64) -> Result<f64> {
    let t = finite(t, "t")?;
    Ok(bspline3_unchecked(t))
}

pub(crate) fn bspline3_unchecked(t: f64) -> f64 {
    let u = -t.abs();
    if u <= -2.0 {
        return 0.0;
    }
    const BINOM: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];
    let mut sum = 0.0;
    for (i, &c) in BINOM.iter().enumerate() {
        let x = u + 2.0 - i as f64;
        if x > 0.0 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * c * x * x * x;
        }
    }
    sum / 6.0
}

/// Special cubic spline `S(t)`, a symmetric combination of five shifted
/// cubic B-splines supported on `[-(2 + 1/8), 2 + 1/8]`.
///
/// With the weights in [`SPECIAL_TERMS`] the spline interpolates:
/// `S(0) = 1` and `S(k) = 0` for every other integer `k`.
pub fn eval_special_spline(t: f64) -> Result<f64> {
    let t = finite(t, "t")?;
    if t.abs() >= SPECIAL_SUPPORT {
        return Ok(0.0);
    }
    let b = bspline3_unchecked;
    // Pairs are summed before weighting so that S(t) = S(-t) exactly.
    let s =
        451.0 * b(t) - 256.0 * (b(t - 1.0 / 16.0) + b(t + 1.0 / 16.0)) + 32.0 * (b(t - 1.0 / 8.0) + b(t + 1.0 / 8.0));
    Ok(s / 3.0)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Fourier transform of the special spline,
/// `Ŝ(ω) = (451 - 512 cos(ω/16) + 64 cos(ω/8))/3 · sinc⁴(ω/2)`.
pub fn eval_spline_ft(omega: f64) -> Result<f64> {
    let w = finite(omega, "omega")?;
    let trig = (451.0 - 512.0 * (w / 16.0).cos() + 64.0 * (w / 8.0).cos()) / 3.0;
    Ok(trig * sinc(w / 2.0).powi(4))
}

/// Binomial coefficient as `f64`; exact for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// Coefficients `C(L-1+n, n)` for `n = 0..L`.
pub fn p_coefficients(l: u32) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(Error::Domain("P requires L >= 1".into()));
    }
    Ok((0..l as u64).map(|n| binomial(l as u64 - 1 + n, n)).collect())
}

/// `P(y) = Σ_{n<L} C(L-1+n, n) y^n`, evaluated by Horner's rule.
pub fn eval_p(y: f64, l: u32) -> Result<f64> {
    let y = finite(y, "y")?;
    let coeffs = p_coefficients(l)?;
    Ok(coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c))
}

/// Denominator `451 - 512 cos(ω/16) + 64 cos(ω/8)` (three times `Ŝ`'s
/// trigonometric factor). Its minimum over the real line is 3.
pub fn q_denominator(omega: f64) -> f64 {
    451.0 - 512.0 * (omega / 16.0).cos() + 64.0 * (omega / 8.0).cos()
}

/// Ratio `Q(ω) = Ŝ-trig(2ω) / Ŝ-trig(ω)`, the non-cosine-power part of `H`.
pub fn eval_q(omega: f64) -> Result<f64> {
    let w = finite(omega, "omega")?;
    let den = q_denominator(w);
    if den.abs() < SINGULAR_EPS {
        return Err(Error::Singularity { omega: w });
    }
    Ok(q_denominator(2.0 * w) / den)
}

/// Synthesis low-pass `H(ω) = Q(ω) cos⁴(ω/2)`, equal to `Ŝ(2ω)/Ŝ(ω)`.
pub fn eval_h(omega: f64) -> Result<f64> {
    let q = eval_q(omega)?;
    Ok(q * (omega / 2.0).cos().powi(4))
}

/// Dual low-pass `H*(ω) = cos(ω/2)^{2N*} P(sin²(ω/2)) / Q(ω)` with
/// `L = 2 + N*`.
pub fn eval_hstar(omega: f64, n_star: u32) -> Result<f64> {
    if n_star == 0 {
        return Err(Error::Domain("N* must be positive".into()));
    }
    let q = eval_q(omega)?;
    let s2 = (omega / 2.0).sin().powi(2);
    let p = eval_p(s2, N_SYNTHESIS + n_star)?;
    Ok((omega / 2.0).cos().powi(2 * n_star as i32) * p / q)
}

/// Which analytic symbol a [`FrequencyResponse`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseKind {
    SHat,
    H,
    HStar,
    /// Synthesis high-pass, built from the dual low-pass.
    G,
    /// Analysis high-pass, built from the synthesis low-pass.
    GStar,
    Q,
    QStar,
    P,
}

/// An analytic frequency response together with its moment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    pub kind: ResponseKind,
    pub n: u32,
    pub n_star: u32,
}

impl FrequencyResponse {
    /// Response with `N = 2` and the dual order derived from `L = N + N*`.
    pub fn new(kind: ResponseKind, l: u32) -> Result<Self> {
        if l <= N_SYNTHESIS {
            return Err(Error::Parameter(format!("L must exceed {N_SYNTHESIS}, got {l}")));
        }
        Ok(Self { kind, n: N_SYNTHESIS, n_star: l - N_SYNTHESIS })
    }

    pub fn l(&self) -> u32 {
        self.n + self.n_star
    }

    /// Evaluates the response at `ω` (radians).
    ///
    /// High-pass symbols follow `g_k = (-1)^k h_{1-k}`, which gives
    /// `G(ω) = -e^{-iω} · conj(H*(ω + π))` and likewise for `G*` with `H`.
    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        let re = |v: f64| Complex64::new(v, 0.0);
        let shift = -Complex64::from_polar(1.0, -omega);
        Ok(match self.kind {
            ResponseKind::SHat => re(eval_spline_ft(omega)?),
            ResponseKind::H => re(eval_h(omega)?),
            ResponseKind::HStar => re(eval_hstar(omega, self.n_star)?),
            ResponseKind::G => shift * eval_hstar(omega + std::f64::consts::PI, self.n_star)?,
            ResponseKind::GStar => shift * eval_h(omega + std::f64::consts::PI)?,
            ResponseKind::Q => re(eval_q(omega)?),
            ResponseKind::QStar => {
                let p = eval_p((omega / 2.0).sin().powi(2), self.l())?;
                re(p / eval_q(omega)?)
            }
            ResponseKind::P => re(eval_p((omega / 2.0).sin().powi(2), self.l())?),
        })
    }
}

/// Smallest value of the `Q` denominator on a dense grid over one full
/// period `[0, 32π]`, with its location.
pub fn scan_denominator(points: usize) -> (f64, f64) {
    let period = 32.0 * std::f64::consts::PI;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..points {
        let w = period * i as f64 / points as f64;
        let d = q_denominator(w);
        if d < best.0 {
            best = (d, w);
        }
    }
    best
}
