//! Integration engines.
//!
//! * [`contour_integral`] evaluates the Gaussian-damped branch integrals
//!   `∫₀^∞ dz e^{−az²−iβz} [1/√(cosh α⁻ − cosh z) − ζ/√(cosh α⁺ − cosh z)]`
//!   along a contour in the lower half strip `−π < Im z < 0`, where the
//!   principal square root is analytic and reproduces the `−iε` boundary
//!   values of the real-axis integral.
//! * [`fermi_dirac_response`] is the real-line Fermi-Dirac convolution that
//!   carries the coincident AdS-Rindler contribution of a single detector.
//! * [`integrate_image_sum`] accumulates image terms under a truncation policy.
//!
//! Both integrals use globally adaptive 10/21-point Gauss-Kronrod panels on
//! straight segments of the complex plane.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundaryCondition;
use crate::wightman::TruncationPolicy;

// 21-point Kronrod abscissae (descending) with the embedded 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980238380,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Largest admissible phase jump of a square-root factor between neighbouring nodes.
const BRANCH_JUMP: f64 = PI / 2.0;

/// Integrand evaluated along a complex path, with `K` components.
pub(crate) trait PathIntegrand<const K: usize> {
    fn eval(&self, z: Complex64) -> [Complex64; K];

    /// Principal arguments of the square-root factors at `z`, if any are monitored.
    fn branch_args(&self, _z: Complex64) -> Option<[f64; 2]> {
        None
    }
}

impl<const K: usize, F: Fn(Complex64) -> [Complex64; K]> PathIntegrand<K> for F {
    fn eval(&self, z: Complex64) -> [Complex64; K] {
        self(z)
    }
}

/// Adaptive integration result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const K: usize> {
    pub value: [Complex64; K],
    /// Summed absolute error estimate over the components.
    pub error: f64,
    pub evaluations: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Tolerance {
    rel: f64,
    abs: f64,
    max_subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const K: usize> {
    start: Complex64,
    end: Complex64,
    value: [Complex64; K],
    error: f64,
    splittable: bool,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<const K: usize> Eq for Panel<K> {}

impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut scaled = err.abs();
    if resasc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / resasc).powf(1.5);
        scaled = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * resabs);
    }
    scaled
}

fn gauss_kronrod<const K: usize, F: PathIntegrand<K>>(f: &F, start: Complex64, end: Complex64) -> Panel<K> {
    let center = 0.5 * (start + end);
    let half = 0.5 * (end - start);
    let scale = half.norm();

    // nodes ordered from `start` to `end`, with their Kronrod/Gauss weights
    let mut values = [[Complex64::new(0.0, 0.0); K]; 21];
    let mut nodes = [Complex64::new(0.0, 0.0); 21];
    for j in 0..10 {
        nodes[j] = center - half * XGK[j];
        nodes[20 - j] = center + half * XGK[j];
    }
    nodes[10] = center;
    for (v, z) in values.iter_mut().zip(nodes.iter()) {
        *v = f.eval(*z);
    }

    let mut splittable = true;
    let mut continuous = true;
    if let Some(mut prev) = f.branch_args(nodes[0]) {
        for z in nodes.iter().skip(1).chain(std::iter::once(&end)) {
            if let Some(next) = f.branch_args(*z) {
                if prev.iter().zip(next.iter()).any(|(p, q)| (p - q).abs() > BRANCH_JUMP) {
                    continuous = false;
                }
                prev = next;
            }
        }
    }
    if scale < 1e-14 * (1.0 + center.norm()) {
        splittable = false;
    }

    let mut value = [Complex64::new(0.0, 0.0); K];
    let mut error = 0.0;
    for k in 0..K {
        let mut kronrod = values[10][k] * WGK[10];
        let mut gauss = Complex64::new(0.0, 0.0);
        let mut resabs = values[10][k].norm() * WGK[10];
        for j in 0..10 {
            let pair = values[j][k] + values[20 - j][k];
            kronrod += pair * WGK[j];
            resabs += (values[j][k].norm() + values[20 - j][k].norm()) * WGK[j];
            if j % 2 == 1 {
                gauss += pair * WG[j / 2];
            }
        }
        let mean = kronrod * 0.5;
        let mut resasc = WGK[10] * (values[10][k] - mean).norm();
        for j in 0..10 {
            resasc += WGK[j] * ((values[j][k] - mean).norm() + (values[20 - j][k] - mean).norm());
        }
        value[k] = kronrod * half;
        error += rescale_error(((kronrod - gauss) * half).norm(), resabs * scale, resasc * scale);
    }
    if !continuous {
        error = f64::INFINITY;
    }
    Panel {
        start,
        end,
        value,
        error,
        splittable,
    }
}

fn norm_sum<const K: usize>(v: &[Complex64; K]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

/// Globally adaptive integration over a chain of straight segments.
fn integrate_path<const K: usize, F: PathIntegrand<K>>(
    f: &F,
    vertices: &[Complex64],
    tol: Tolerance,
) -> Result<Estimate<K>> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in vertices.windows(2) {
        if w[0] != w[1] {
            heap.push(gauss_kronrod(f, w[0], w[1]));
            evaluations += 21;
        }
    }

    let total = |heap: &BinaryHeap<Panel<K>>| {
        let mut value = [Complex64::new(0.0, 0.0); K];
        let mut error = 0.0;
        for p in heap.iter() {
            for (v, pv) in value.iter_mut().zip(p.value) {
                *v += pv;
            }
            error += p.error;
        }
        (value, error)
    };

    let mut subdivisions = 0;
    loop {
        let (value, error) = total(&heap);
        let target = tol.abs.max(tol.rel * norm_sum(&value));
        if error <= target {
            return Ok(Estimate {
                value,
                error,
                evaluations,
                panels: heap.len(),
            });
        }
        let worst = heap.peek().copied();
        let Some(worst) = worst else {
            return Ok(Estimate {
                value,
                error,
                evaluations,
                panels: 0,
            });
        };
        if subdivisions >= tol.max_subdivisions || !worst.splittable {
            if worst.error.is_infinite() {
                let mid = 0.5 * (worst.start + worst.end);
                return Err(Error::BranchDiscontinuity { re: mid.re, im: mid.im });
            }
            return Err(Error::NonConvergence {
                subdivisions,
                estimate: norm_sum(&value),
                error,
            });
        }
        heap.pop();
        let mid = 0.5 * (worst.start + worst.end);
        heap.push(gauss_kronrod(f, worst.start, mid));
        heap.push(gauss_kronrod(f, mid, worst.end));
        evaluations += 42;
        subdivisions += 1;
    }
}

/// `sinh p = e^E · m` with `E ≥ 0`, safe for large `|Re p|`.
fn sinh_scaled(p: Complex64) -> (f64, Complex64) {
    if p.re > 20.0 {
        let tail = (-2.0 * p.re).exp();
        let phase = Complex64::cis(p.im);
        (p.re, 0.5 * (phase - tail * phase.conj()))
    } else if p.re < -20.0 {
        let tail = (2.0 * p.re).exp();
        let phase = Complex64::cis(p.im);
        (-p.re, 0.5 * (tail * phase - phase.conj()))
    } else {
        (0.0, p.sinh())
    }
}

/// `cosh α − cosh z = e^E · m` via `−2 sinh((z+α)/2) sinh((z−α)/2)`.
fn branch_base(alpha: f64, z: Complex64) -> (f64, Complex64) {
    let (e1, m1) = sinh_scaled(0.5 * (z + alpha));
    let (e2, m2) = sinh_scaled(0.5 * (z - alpha));
    (e1 + e2, -2.0 * m1 * m2)
}

/// One Gaussian-damped branch integrand `e^{−az²−iβz}[1/√(cosh α⁻ − cosh z) − ζ/√(cosh α⁺ − cosh z)]`.
///
/// `alpha_minus = None` drops the first factor; that is the coincident
/// (`α⁻ = 0`) AdS-Rindler term whose contribution is carried by
/// [`fermi_dirac_response`] instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchIntegrand {
    pub gaussian: f64,
    pub phase: f64,
    pub alpha_minus: Option<f64>,
    pub alpha_plus: f64,
    pub boundary: BoundaryCondition,
}

impl BranchIntegrand {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian.is_finite() && self.gaussian > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Gaussian coefficient must be positive, got {}",
                self.gaussian
            )));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter("phase coefficient is not finite".into()));
        }
        if let Some(am) = self.alpha_minus {
            if !(am > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "α⁻ must be positive for an integrable branch point, got {am}"
                )));
            }
            if !(self.alpha_plus >= am) {
                return Err(Error::InvalidParameter(format!(
                    "need α⁺ ≥ α⁻, got α⁻ = {am}, α⁺ = {}",
                    self.alpha_plus
                )));
            }
        } else if !(self.alpha_plus > 0.0) {
            return Err(Error::InvalidParameter("α⁺ must be positive".into()));
        }
        Ok(())
    }

    fn smallest_alpha(&self) -> f64 {
        self.alpha_minus.unwrap_or(self.alpha_plus)
    }

    fn factor(&self, alpha: f64, exponent: Complex64, z: Complex64) -> Complex64 {
        let (scale, base) = branch_base(alpha, z);
        (exponent - 0.5 * scale).exp() / base.sqrt()
    }
}

impl PathIntegrand<2> for BranchIntegrand {
    fn eval(&self, z: Complex64) -> [Complex64; 2] {
        let exponent = -self.gaussian * z * z - Complex64::i() * self.phase * z;
        let minus = match self.alpha_minus {
            Some(am) => self.factor(am, exponent, z),
            None => Complex64::new(0.0, 0.0),
        };
        [minus, self.factor(self.alpha_plus, exponent, z)]
    }

    fn branch_args(&self, z: Complex64) -> Option<[f64; 2]> {
        let am = self.alpha_minus.unwrap_or(self.alpha_plus);
        Some([
            branch_base(am, z).1.sqrt().arg(),
            branch_base(self.alpha_plus, z).1.sqrt().arg(),
        ])
    }
}

/// Shape of the integration contour from `0` to `+∞` in the lower half strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourPath {
    /// Vertical drop to the saddle height `Im z = −β/2a` of `e^{−az²−iβz}`
    /// (clamped into the strip), then a horizontal run. On the vertical leg
    /// the integrand is `i × real`, so only the horizontal leg feeds the real
    /// part; on it the Gaussian factor has no oscillation.
    Saddle,
    /// The straight segment from `0` to `R + iη`, `η ∈ (−π, 0)`.
    Straight { eta: f64 },
}

/// Contour shape and accuracy controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub path: ContourPath,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Overrides the automatic cutoff `R` when set.
    pub r_max: Option<f64>,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            path: ContourPath::Saddle,
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_subdivisions: 4000,
            r_max: None,
        }
    }
}

/// Deepest horizontal leg used by the saddle path.
///
/// For `Re z ≥ 0` the principal root of `cosh α − cosh z` stays analytic down
/// to the next branch point at `α − 2πi`, so the leg may go below `−π`.
const MAX_DEPTH: f64 = 1.9 * PI;

impl ContourSpec {
    pub fn straight(eta: f64) -> Self {
        ContourSpec {
            path: ContourPath::Straight { eta },
            ..ContourSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ContourPath::Straight { eta } = self.path {
            if !(eta > -PI && eta < 0.0) {
                return Err(Error::Domain(format!("contour shift η = {eta} is outside (−π, 0)")));
            }
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// `ln(1/δ)` where `δ` is the relative size at which the path is cut off.
    fn cutoff_log(&self) -> f64 {
        (1.0 / self.rel_tol).ln() + 12.0
    }

    /// Depth of the horizontal leg of the saddle path (negative).
    fn saddle_depth(a: f64, beta: f64) -> f64 {
        let floor = 1e-3 / (1.0 + a.sqrt());
        let depth = if beta > 0.0 {
            beta / (2.0 * a)
        } else {
            // de-excitation: no saddle below the axis; stay shallow enough that
            // the amplification e^{a y² + |β||y|} is at most e
            2.0 / (beta.abs() + (beta * beta + 4.0 * a).sqrt())
        };
        -depth.clamp(floor, MAX_DEPTH)
    }

    /// Legs of the piecewise-linear contour, with forced breakpoints below the
    /// branch points. The flag marks a leg on the imaginary axis.
    fn legs(&self, f: &BranchIntegrand) -> Vec<(Vec<Complex64>, bool)> {
        let a = f.gaussian;
        let beta = f.phase;
        let log_cut = self.cutoff_log();
        let decay_cut = f.alpha_plus + 2.0 * log_cut;
        let mut alphas = vec![f.alpha_plus];
        if let Some(am) = f.alpha_minus {
            alphas.push(am);
        }
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        match self.path {
            ContourPath::Saddle => {
                let y = Self::saddle_depth(a, beta);
                let reach = self.r_max.unwrap_or_else(|| (log_cut / a).sqrt().min(decay_cut));
                let mut v = vec![Complex64::new(0.0, y)];
                v.extend(alphas.iter().filter(|&&al| al < reach).map(|&al| Complex64::new(al, y)));
                v.push(Complex64::new(reach, y));
                vec![
                    (vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, y)], true),
                    (v, false),
                ]
            }
            ContourPath::Straight { eta } => {
                let reach = self.r_max.unwrap_or_else(|| {
                    ((eta * eta + log_cut / a).sqrt() + beta.abs() / (2.0 * a))
                        .min(decay_cut)
                        .max(2.0 * eta.abs())
                });
                let end = Complex64::new(reach, eta);
                let mut v = vec![Complex64::new(0.0, 0.0)];
                v.extend(alphas.iter().filter(|&&al| al < reach).map(|&al| end * (al / reach)));
                v.push(end);
                vec![(v, false)]
            }
        }
    }
}

/// Value of one branch integral, split into its two square-root factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchValue {
    /// `∫ e^{…}/√(cosh α⁻ − cosh z)` (zero when α⁻ is absent).
    pub minus: Complex64,
    /// `∫ e^{…}/√(cosh α⁺ − cosh z)`.
    pub plus: Complex64,
    pub zeta: f64,
    /// Error bound on the real parts: quadrature estimate plus the endpoint truncation bound.
    pub error: f64,
    /// Additional error carried only by the imaginary parts.
    pub imag_error: f64,
    pub evaluations: usize,
}

impl BranchValue {
    /// `minus − ζ·plus`.
    pub fn combined(&self) -> Complex64 {
        self.minus - self.zeta * self.plus
    }

    fn zero(zeta: f64) -> Self {
        BranchValue {
            minus: Complex64::new(0.0, 0.0),
            plus: Complex64::new(0.0, 0.0),
            zeta,
            error: 0.0,
            imag_error: 0.0,
            evaluations: 0,
        }
    }
}

/// Branch points this far out contribute below `e^{−300}` and are skipped.
const NEGLIGIBLE_ALPHA: f64 = 600.0;

/// `∫₀^∞ dz e^{−az²−iβz}[1/√(cosh α⁻ − cosh z) − ζ/√(cosh α⁺ − cosh z)]` along the chosen contour.
///
/// Returns the full complex value; physical quantities use the real part.
pub fn contour_integral(f: &BranchIntegrand, spec: &ContourSpec) -> Result<BranchValue> {
    spec.validate()?;
    f.validate()?;
    let zeta = f.boundary.zeta();
    if f.smallest_alpha() > NEGLIGIBLE_ALPHA {
        return Ok(BranchValue::zero(zeta));
    }
    let tol = Tolerance {
        rel: spec.rel_tol,
        abs: spec.abs_tol,
        max_subdivisions: spec.max_subdivisions,
    };
    let mut value = [Complex64::new(0.0, 0.0); 2];
    let mut error = 0.0;
    let mut imag_error = 0.0;
    let mut evaluations = 0;
    let mut end = Complex64::new(0.0, 0.0);
    // legs are integrated separately so that the large, purely imaginary
    // contribution of the imaginary axis does not set the tolerance of the rest
    for (vertices, on_axis) in spec.legs(f) {
        let est = integrate_path(f, &vertices, tol)?;
        evaluations += est.evaluations;
        for (v, e) in value.iter_mut().zip(est.value.iter()) {
            // on the imaginary axis the integrand is exactly i × real
            *v += if on_axis { Complex64::new(0.0, e.im) } else { *e };
        }
        if on_axis {
            imag_error += est.error;
        } else {
            error += est.error;
        }
        end = *vertices.last().expect("contour leg has an endpoint");
    }

    // the dropped closing segment and the tail beyond R
    let at_end = f.eval(end);
    let truncation = (at_end[0].norm() + at_end[1].norm()) * (end.im.abs() + 1.0 / (2.0 * f.gaussian * end.re + 1.0));

    Ok(BranchValue {
        minus: value[0],
        plus: value[1],
        zeta,
        error: error + truncation,
        imag_error,
        evaluations,
    })
}

/// A scalar integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Half-width of the Gaussian window, in units of σ: `e^{−81}` beyond it.
const GAUSSIAN_WINDOW: f64 = 9.0;

/// `½ ∫ dx e^{−(x−Ω)²} / (e^{x/T} + 1)` in units of σ.
pub fn fermi_dirac_response(gap: f64, temperature: f64) -> Result<Integral> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !gap.is_finite() {
        return Err(Error::InvalidParameter("energy gap is not finite".into()));
    }
    let occupation = |x: f64| {
        let y = x / temperature;
        if y > 0.0 {
            let e = (-y).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + y.exp())
        }
    };
    let f = |z: Complex64| [Complex64::new((-(z.re - gap).powi(2)).exp() * occupation(z.re), 0.0)];

    // the integrand peaks near min(0, Ω − 1/(2T)) when Ω > 0 and the occupation is sharp
    let lo = gap.min(0.0) - GAUSSIAN_WINDOW;
    let hi = gap.max(0.0) + GAUSSIAN_WINDOW;
    let mut points = vec![lo, 0.0, gap, gap - 0.5 / temperature, hi];
    points.retain(|p| *p >= lo && *p <= hi);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let vertices: Vec<Complex64> = points.iter().map(|&x| Complex64::new(x, 0.0)).collect();

    let est = integrate_path(
        &f,
        &vertices,
        Tolerance {
            rel: 1e-13,
            abs: 1e-300,
            max_subdivisions: 2000,
        },
    )?;
    Ok(Integral {
        value: 0.5 * est.value[0].re,
        error: 0.5 * est.error,
    })
}

/// One image contribution fed to [`integrate_image_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSumTerm {
    pub n: i64,
    /// Multiplicity (2 when `±n` are folded together).
    pub weight: f64,
    pub integrand: BranchIntegrand,
    /// Upper-bound scale from [`crate::wightman::image_term_magnitude`].
    pub magnitude: f64,
}

/// Per-image record of an accumulated sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub n: i64,
    pub weight: f64,
    pub value: BranchValue,
}

/// Weighted image sum with AdS-Rindler (`n = 0`) / BTZ (`n ≠ 0`) split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSum {
    pub total: Complex64,
    pub rindler: Complex64,
    pub btz: Complex64,
    pub quadrature_error: f64,
    pub tail_estimate: f64,
    pub records: Vec<ImageRecord>,
    /// Largest `|n|` included.
    pub max_image: u32,
}

impl ImageSum {
    pub fn error(&self) -> f64 {
        self.quadrature_error + self.tail_estimate
    }
}

/// Accumulate `Σ weight·[minus − ζ plus]` over images ordered by `|n|`.
///
/// Tolerances and the truncation test act on the real part, the only part the
/// matrix elements use.
///
/// `baseline` is the part of the element already known (e.g. the Fermi-Dirac
/// term) and enters the relative truncation test.
pub fn integrate_image_sum<I>(
    terms: I,
    spec: &ContourSpec,
    policy: &TruncationPolicy,
    baseline: f64,
) -> Result<ImageSum>
where
    I: IntoIterator<Item = ImageSumTerm>,
{
    let mut terms = terms.into_iter().peekable();
    let mut sum = ImageSum {
        total: Complex64::new(0.0, 0.0),
        rindler: Complex64::new(0.0, 0.0),
        btz: Complex64::new(0.0, 0.0),
        quadrature_error: 0.0,
        tail_estimate: 0.0,
        records: Vec::new(),
        max_image: 0,
    };
    let cap = policy.fixed.unwrap_or(policy.n_max);
    // magnitudes of successive |n| groups, for the geometric tail estimate
    let mut group_sizes: Vec<f64> = Vec::new();
    let mut group_bounds: Vec<f64> = Vec::new();

    while let Some(first) = terms.peek().copied() {
        let level = first.n.unsigned_abs() as u32;
        if level > cap {
            break;
        }
        let mut group = Complex64::new(0.0, 0.0);
        let mut bound = 0.0f64;
        while let Some(term) = terms.peek().copied() {
            if term.n.unsigned_abs() as u32 != level {
                break;
            }
            terms.next();
            let scale = (baseline.abs() + sum.total.re.abs()) * spec.rel_tol * 0.1;
            let local = ContourSpec {
                abs_tol: spec.abs_tol.max(scale / term.weight),
                ..*spec
            };
            let value = contour_integral(&term.integrand, &local)?;
            let contribution = term.weight * value.combined();
            group += contribution;
            bound = bound.max(term.magnitude * term.weight);
            sum.quadrature_error += term.weight * value.error;
            if term.n == 0 {
                sum.rindler += contribution;
            } else {
                sum.btz += contribution;
            }
            sum.records.push(ImageRecord {
                n: term.n,
                weight: term.weight,
                value,
            });
        }
        sum.total += group;
        sum.max_image = level;
        group_sizes.push(group.re.abs());
        group_bounds.push(bound);

        let tail = geometric_tail(
            &group_sizes,
            &group_bounds,
            terms.peek().map(|t| t.magnitude * t.weight),
        );
        sum.tail_estimate = tail;
        if policy.fixed.is_none()
            && level >= policy.n_min
            && tail <= policy.tail_tol * (baseline.abs() + sum.total.re.abs())
        {
            return Ok(sum);
        }
    }
    Ok(sum)
}

/// Tail after the last group, assuming geometric decay.
///
/// The ratio is the larger of the last two observed ratios, capped by the
/// ratio of the analytic magnitude bounds. The sum is doubled because the
/// observed ratios still creep upward before reaching their asymptote.
fn geometric_tail(sizes: &[f64], bounds: &[f64], next_bound: Option<f64>) -> f64 {
    let n = sizes.len();
    let last = sizes[n - 1];
    if n < 2 {
        return last;
    }
    if last == 0.0 {
        return 0.0;
    }
    let ratio = |i: usize| {
        if sizes[i - 1] > 0.0 {
            sizes[i] / sizes[i - 1]
        } else {
            1.0
        }
    };
    let mut q = ratio(n - 1);
    if n >= 3 {
        q = q.max(ratio(n - 2));
    }
    if let Some(next) = next_bound {
        let b = bounds[n - 1];
        if b > 0.0 {
            q = q.min(next / b);
        }
    }
    let q = q.min(0.999);
    2.0 * last * q / (1.0 - q)
}
