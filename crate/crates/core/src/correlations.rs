//! Mutual information and anti-Hawking diagnostics.
//!
//! At second order the detectors' joint state has eigenvalues `𝓛_±` in the
//! block spanned by `|01⟩, |10⟩`, and
//! `I_AB = 𝓛_+ ln 𝓛_+ + 𝓛_− ln 𝓛_− − 𝓛_AA ln 𝓛_AA − 𝓛_BB ln 𝓛_BB`.
//! Since `𝓛_+ + 𝓛_− = 𝓛_AA + 𝓛_BB`, rescaling every element by `λ̃²` rescales
//! `I_AB` by `λ̃²` exactly, so values in units of `λ̃²` carry no `ln λ̃` offset.

use serde::{Deserialize, Serialize};

use crate::detector::MatrixElements;
use crate::error::{Error, Result};

/// Eigenvalues, mutual information and their error bars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub l_plus: f64,
    pub l_minus: f64,
    pub mutual_information: f64,
    pub mutual_information_error: f64,
}

/// `(𝓛_+, 𝓛_−)`, with `𝓛_+ + 𝓛_− = 𝓛_AA + 𝓛_BB` to rounding.
///
/// `𝓛_−` is formed as `min(𝓛_AA, 𝓛_BB) − δ` with
/// `δ = 2|𝓛_AB|² / (s + |𝓛_AA − 𝓛_BB|)`, avoiding the cancellation in the
/// textbook form when `|𝓛_AB|` is small.
pub fn eigenvalues(l_aa: f64, l_bb: f64, l_ab_abs: f64) -> (f64, f64) {
    let (x, y) = if l_aa >= l_bb { (l_aa, l_bb) } else { (l_bb, l_aa) };
    let delta = split(x, y, l_ab_abs);
    (x + delta, y - delta)
}

fn split(x: f64, y: f64, c: f64) -> f64 {
    let gap = x - y;
    let s = gap.hypot(2.0 * c);
    if s == 0.0 {
        return 0.0;
    }
    2.0 * c * c / (s + gap)
}

/// `t − ln(1+t)`.
fn excess_log1p(t: f64) -> f64 {
    if t < 0.1 {
        // Σ_{k≥2} (−1)^k t^k / k
        let mut term = t * t;
        let mut sum = 0.0;
        for k in 2..30 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * term / k as f64;
            term *= t;
        }
        sum
    } else {
        t - t.ln_1p()
    }
}

/// `(1−t) ln(1−t) + t` for `0 ≤ t ≤ 1`.
fn entropy_excess(t: f64) -> f64 {
    if t >= 1.0 {
        return 1.0;
    }
    if t < 0.1 {
        // Σ_{k≥2} t^k / (k(k−1))
        let mut term = t * t;
        let mut sum = 0.0;
        for k in 2..30 {
            sum += term / (k * (k - 1)) as f64;
            term *= t;
        }
        sum
    } else {
        (1.0 - t) * (-t).ln_1p() + t
    }
}

/// `I_AB` from the three elements, in units of `λ̃²`.
///
/// With `x ≥ y` the diagonal elements and `δ` as in [`eigenvalues`],
/// `I = δ ln((x+δ)/y) − x·h(δ/x) + y·g(δ/y)` where `h(t) = t − ln(1+t)` and
/// `g(t) = (1−t)ln(1−t) + t`; every term stays accurate as `|𝓛_AB| → 0`.
/// A `δ` that overshoots `y` (a Cauchy-Schwarz violation by rounding) is clamped.
pub fn mutual_information_of(l_aa: f64, l_bb: f64, l_ab_abs: f64) -> Result<f64> {
    if !(l_aa >= 0.0 && l_bb >= 0.0 && l_ab_abs >= 0.0) {
        return Err(Error::Domain(format!(
            "elements must be non-negative, got 𝓛_AA = {l_aa}, 𝓛_BB = {l_bb}, |𝓛_AB| = {l_ab_abs}"
        )));
    }
    let (x, y) = if l_aa >= l_bb { (l_aa, l_bb) } else { (l_bb, l_aa) };
    if l_ab_abs == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    let delta = split(x, y, l_ab_abs).min(y);
    Ok(delta * ((x + delta) / y).ln() - x * excess_log1p(delta / x) + y * entropy_excess(delta / y))
}

/// A computed probability, with values that are negative only within their error bar set to zero.
fn within_error(value: f64, error: f64) -> f64 {
    if value < 0.0 && value >= -error {
        0.0
    } else {
        value
    }
}

/// Mutual information of a computed set of elements, with error propagated from the element errors.
pub fn mutual_information(elements: &MatrixElements) -> Result<CorrelationResult> {
    let aa = within_error(elements.l_aa.value, elements.l_aa.error);
    let bb = within_error(elements.l_bb.value, elements.l_bb.error);
    let ab = elements.l_ab.value.norm();
    let value = mutual_information_of(aa, bb, ab)?;

    let mut error = 0.0;
    let shifts = [
        (elements.l_aa.error, 0.0, 0.0),
        (0.0, elements.l_bb.error, 0.0),
        (0.0, 0.0, elements.l_ab.error),
    ];
    for (da, db, dc) in shifts {
        if da + db + dc == 0.0 {
            continue;
        }
        let up = mutual_information_of((aa + da).max(0.0), (bb + db).max(0.0), (ab + dc).max(0.0))?;
        let down = mutual_information_of((aa - da).max(0.0), (bb - db).max(0.0), (ab - dc).max(0.0))?;
        error += (up - value).abs().max((down - value).abs());
    }
    let budget = error + 1e-14 * (aa + bb);
    if value < -budget {
        return Err(Error::NegativeMutualInformation { value, budget });
    }
    let (l_plus, l_minus) = eigenvalues(aa, bb, ab);
    Ok(CorrelationResult {
        l_plus,
        l_minus,
        mutual_information: value,
        mutual_information_error: error,
    })
}

/// Effective temperature from the excitation-to-de-excitation ratio, `−Ω/ln(F(Ω)/F(−Ω))`.
pub fn edr_temperature(f_plus: f64, f_minus: f64, gap: f64) -> Result<f64> {
    if !(f_plus > 0.0 && f_minus > 0.0) {
        return Err(Error::Domain(format!(
            "responses must be positive, got F(Ω) = {f_plus}, F(−Ω) = {f_minus}"
        )));
    }
    let log_ratio = f_plus.ln() - f_minus.ln();
    if log_ratio == 0.0 {
        return Err(Error::Domain("excitation and de-excitation rates coincide".into()));
    }
    Ok(-gap / log_ratio)
}

/// Outcome of scanning a sampled curve for a negative slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiHawking {
    pub detected: bool,
    /// Temperature intervals on which the slope is negative beyond its error.
    pub intervals: Vec<(f64, f64)>,
    /// Central-difference slope at each interior grid point.
    pub slopes: Vec<f64>,
}

/// Minimum number of samples for the slope scan.
pub const MIN_GRID: usize = 4;

/// Weak anti-Hawking effect: the response `F(Ω)` decreases as the KMS temperature grows.
pub fn anti_hawking_weak(temperatures: &[f64], response: &[f64], errors: &[f64]) -> Result<AntiHawking> {
    decreasing_intervals(temperatures, response, errors)
}

/// Strong anti-Hawking effect: `T_EDR` decreases as the KMS temperature grows.
pub fn anti_hawking_strong(temperatures: &[f64], edr: &[f64], errors: &[f64]) -> Result<AntiHawking> {
    decreasing_intervals(temperatures, edr, errors)
}

/// Three-point central differences on a non-uniform grid; a point is flagged
/// when the slope is negative by more than its propagated error.
pub fn decreasing_intervals(x: &[f64], y: &[f64], errors: &[f64]) -> Result<AntiHawking> {
    if x.len() < MIN_GRID {
        return Err(Error::InsufficientGrid {
            needed: MIN_GRID,
            got: x.len(),
        });
    }
    if y.len() != x.len() || errors.len() != x.len() {
        return Err(Error::InvalidParameter(
            "grid, values and errors differ in length".into(),
        ));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "temperature grid must be strictly increasing".into(),
        ));
    }
    let mut slopes = Vec::with_capacity(x.len() - 2);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for i in 1..x.len() - 1 {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        let denom = hm * hp * (hm + hp);
        let (cm, c0, cp) = (-hp * hp / denom, (hp * hp - hm * hm) / denom, hm * hm / denom);
        let slope = cm * y[i - 1] + c0 * y[i] + cp * y[i + 1];
        let error = cm.abs() * errors[i - 1] + c0.abs() * errors[i] + cp.abs() * errors[i + 1];
        slopes.push(slope);
        if slope < -error {
            let span = (x[i - 1], x[i + 1]);
            match intervals.last_mut() {
                Some(last) if last.1 >= span.0 => last.1 = span.1,
                _ => intervals.push(span),
            }
        }
    }
    Ok(AntiHawking {
        detected: !intervals.is_empty(),
        intervals,
        slopes,
    })
}
