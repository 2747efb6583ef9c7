//! Brute-force reference values for the matrix elements.
//!
//! Evaluates the raw double integral
//! `∫∫ dτ_A dτ_B e^{−τ_A²/2} e^{−τ_B²/2} e^{−iΩ(τ_A−τ_B)} W_ε(x_A(τ_A), x_B(τ_B))`
//! with the regulated image sum truncated at `|n| ≤ n_max`, for a schedule of
//! regulators `ε`, and extrapolates polynomially to `ε → 0`. Shares nothing
//! with the contour path except the raw interval `σ_ε`.
//!
//! Slow; meant for tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Placement, Spacetime};
use crate::wightman::{sigma_epsilon, EventPoint};

use super::DetectorPair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    /// Strictly decreasing positive regulators.
    pub epsilons: Vec<f64>,
    pub n_max: u32,
    pub rel_tol: f64,
    /// Half-width of the proper-time window, in units of σ.
    pub window: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            epsilons: vec![1e-3, 5e-4, 2.5e-4],
            n_max: 3,
            rel_tol: 1e-9,
            window: 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    /// Extrapolated `ε → 0` value, in units of `λ̃²`.
    pub value: Complex64,
    pub error: f64,
    /// `(ε, value at ε)` for every regulator in the schedule.
    pub samples: Vec<(f64, Complex64)>,
}

/// `𝓛_AB` of a pair on a common axis.
pub fn oracle_l_ab_2d(pair: &DetectorPair, spec: &OracleSpec) -> Result<OracleValue> {
    oracle_element(&pair.spacetime, &pair.a, &pair.b, 0.0, pair.gap, spec)
}

/// `𝓛_DD` of a single detector.
pub fn oracle_l_dd_2d(
    spacetime: &Spacetime,
    placement: &Placement,
    gap: f64,
    spec: &OracleSpec,
) -> Result<OracleValue> {
    oracle_element(spacetime, placement, placement, 0.0, gap, spec)
}

/// The element between detectors at `first` and `second`, separated by `delta_phi` in angle.
pub fn oracle_element(
    spacetime: &Spacetime,
    first: &Placement,
    second: &Placement,
    delta_phi: f64,
    gap: f64,
    spec: &OracleSpec,
) -> Result<OracleValue> {
    first.validate(spacetime)?;
    second.validate(spacetime)?;
    if spec.epsilons.is_empty()
        || spec.epsilons.iter().any(|e| !(*e > 0.0))
        || spec.epsilons.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::InvalidParameter(
            "regulator schedule must be strictly decreasing and positive".into(),
        ));
    }
    let setup = Setup::new(spacetime, first, second, delta_phi, gap, spec)?;
    let mut samples = Vec::with_capacity(spec.epsilons.len());
    let mut quad_error = 0.0f64;
    for &eps in &spec.epsilons {
        let (value, error) = setup.integrate(eps);
        samples.push((eps, value));
        quad_error = quad_error.max(error);
    }
    let (value, extrapolation_error) = extrapolate(&samples, quad_error)?;
    Ok(OracleValue {
        value,
        error: extrapolation_error + quad_error,
        samples,
    })
}

/// Polynomial extrapolation of the samples to `ε = 0` (Neville).
fn extrapolate(samples: &[(f64, Complex64)], noise: f64) -> Result<(Complex64, f64)> {
    let n = samples.len();
    if n == 1 {
        return Ok((samples[0].1, f64::INFINITY));
    }
    let diffs: Vec<f64> = samples.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    for d in diffs.windows(2) {
        if d[1] > 0.9 * d[0] && d[1] > 100.0 * noise {
            return Err(Error::ExtrapolationUnstable {
                previous: d[0],
                next: d[1],
            });
        }
    }
    let mut table: Vec<Complex64> = samples.iter().map(|s| s.1).collect();
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut previous_order = table[n - 1];
    for level in 1..n {
        previous_order = table[n - 1];
        for i in (level..n).rev() {
            let (xi, xj) = (xs[i], xs[i - level]);
            table[i] = (table[i] * xj - table[i - 1] * xi) / (xj - xi);
        }
    }
    let value = table[n - 1];
    Ok((value, (value - previous_order).norm()))
}

struct Setup {
    spacetime: Spacetime,
    first: EventPoint,
    second: EventPoint,
    gamma_first: f64,
    gamma_second: f64,
    gap: f64,
    zeta: f64,
    images: Vec<i64>,
    /// Coordinate-time differences at which some image term is singular as `ε → 0`.
    singular_dt: Vec<f64>,
    prefactor: f64,
    window: f64,
    rel_tol: f64,
    scale: f64,
    rule: Rule,
}

impl Setup {
    fn new(
        spacetime: &Spacetime,
        first: &Placement,
        second: &Placement,
        delta_phi: f64,
        gap: f64,
        spec: &OracleSpec,
    ) -> Result<Self> {
        let rh = spacetime.horizon_radius();
        let l = spacetime.ads_length();
        let (r1, r2) = (first.radius(spacetime), second.radius(spacetime));
        let g1 = ((r1 - rh) * (r1 + rh)).sqrt() / l;
        let g2 = ((r2 - rh) * (r2 + rh)).sqrt() / l;
        if !(g1 > 0.0 && g2 > 0.0) {
            return Err(Error::HorizonDivergence);
        }
        let n_max = spec.n_max as i64;
        let images: Vec<i64> = (-n_max..=n_max).collect();

        // cosh(r_h Δt/ℓ²) = cosh α± marks the light-cone singularities
        let mut singular_dt = vec![0.0];
        let pre = rh * rh / (l * l * g1 * g2);
        for &n in &images {
            let angular = (rh / l * (delta_phi - 2.0 * PI * n as f64)).cosh();
            for sign in [-1.0, 1.0] {
                let c = pre * (r1 * r2 / (rh * rh) * angular + sign);
                if c.is_finite() && c >= 1.0 {
                    let dt = c.acosh() * l * l / rh;
                    singular_dt.push(dt);
                    singular_dt.push(-dt);
                }
            }
        }
        singular_dt.sort_by(f64::total_cmp);
        singular_dt.dedup();

        let mut setup = Setup {
            spacetime: *spacetime,
            first: EventPoint {
                t: 0.0,
                r: r1,
                phi: delta_phi,
            },
            second: EventPoint {
                t: 0.0,
                r: r2,
                phi: 0.0,
            },
            gamma_first: g1,
            gamma_second: g2,
            gap,
            zeta: spacetime.zeta(),
            images,
            singular_dt,
            prefactor: 1.0 / (4.0 * PI * 2f64.sqrt() * l),
            window: spec.window,
            rel_tol: spec.rel_tol,
            scale: 1.0,
            rule: Rule::new(12),
        };
        setup.scale = setup.magnitude(spec.epsilons[0]);
        Ok(setup)
    }

    fn integrand(&self, tau1: f64, tau2: f64, eps: f64) -> Complex64 {
        let x = EventPoint {
            t: tau1 / self.gamma_first,
            ..self.first
        };
        let y = EventPoint {
            t: tau2 / self.gamma_second,
            ..self.second
        };
        let mut w = Complex64::new(0.0, 0.0);
        for &n in &self.images {
            let sigma = sigma_epsilon(&x, &y, n, eps, &self.spacetime);
            w += 1.0 / sigma.sqrt();
            if self.zeta != 0.0 {
                w -= self.zeta / (sigma + 2.0).sqrt();
            }
        }
        let envelope = (-0.5 * (tau1 * tau1 + tau2 * tau2)).exp();
        self.prefactor * envelope * Complex64::cis(-self.gap * (tau1 - tau2)) * w
    }

    /// Rough size of the integral of `|integrand|`, used to set absolute tolerances.
    fn magnitude(&self, eps: f64) -> f64 {
        let m = 64;
        let h = 2.0 * self.window / m as f64;
        let mut total = 0.0;
        for i in 0..m {
            let t1 = -self.window + (i as f64 + 0.5) * h;
            for j in 0..m {
                let t2 = -self.window + (j as f64 + 0.5) * h;
                total += self.integrand(t1, t2, eps).norm();
            }
        }
        (total * h * h).max(f64::MIN_POSITIVE)
    }

    fn inner(&self, tau1: f64, eps: f64, tol: f64) -> (Complex64, f64) {
        let w = self.window;
        let mut points = vec![-w, w];
        for dt in &self.singular_dt {
            let tau2 = self.gamma_second * (tau1 / self.gamma_first - dt);
            if tau2 > -w && tau2 < w {
                points.push(tau2);
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let share = tol / (points.len() - 1) as f64;
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for p in points.windows(2) {
            let (v, e) = self
                .rule
                .adaptive(&|t2| self.integrand(tau1, t2, eps), p[0], p[1], share, 48);
            value += v;
            error += e;
        }
        (value, error)
    }

    fn integrate(&self, eps: f64) -> (Complex64, f64) {
        let tol = self.rel_tol * self.scale;
        let inner_tol = 0.1 * tol;
        let w = self.window;
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for p in [-w, 0.0, w].windows(2) {
            let (v, e) = self
                .rule
                .adaptive(&|t1| self.inner(t1, eps, inner_tol).0, p[0], p[1], 0.5 * tol, 30);
            value += v;
            error += e;
        }
        (value, error + inner_tol * 2.0 * w)
    }
}

/// Gauss-Legendre rule on `[−1, 1]`.
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Newton iteration on P_n from the Chebyshev-like initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Rule { nodes, weights }
    }

    fn apply<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Complex64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += f(c + h * x) * *w;
        }
        sum * h
    }

    /// Recursive bisection, comparing each panel with the sum of its halves.
    fn adaptive<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (Complex64, f64) {
        let whole = self.apply(f, a, b);
        self.refine(f, a, b, whole, tol, depth)
    }

    fn refine<F: Fn(f64) -> Complex64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> (Complex64, f64) {
        let m = 0.5 * (a + b);
        let left = self.apply(f, a, m);
        let right = self.apply(f, m, b);
        let diff = (left + right - whole).norm();
        let roundoff = 1e-14 * (left.norm() + right.norm());
        if diff <= tol.max(roundoff) || depth == 0 {
            return (left + right, diff);
        }
        let (l, el) = self.refine(f, a, m, left, 0.5 * tol, depth - 1);
        let (r, er) = self.refine(f, m, b, right, 0.5 * tol, depth - 1);
        (l + r, el + er)
    }
}
