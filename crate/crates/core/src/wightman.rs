//! Image-sum structure of the Hartle-Hawking Wightman function.
//!
//! The BTZ two-point function is a sum over images `n` of the AdS₃ function,
//! each built from the squared geodesic distance `σ_ε(x, Γⁿx')`. For static
//! detectors on a common axis the image terms collapse to two arguments
//! `α∓_{AB,n}`, where `cosh α∓ − 1` is evaluated in a cancellation-free form.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Placement, Spacetime};

/// A point `(t, r, φ)` in the exterior region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventPoint {
    pub t: f64,
    pub r: f64,
    pub phi: f64,
}

/// `σ_ε(x, Γⁿx')` with the `−iε` prescription on the time argument.
///
/// Evaluated as
/// `(rr'/r_h²)·2sinh²(ϑ/2) + (r − r')²/(r_h²(X + R)) − 2R sinh²(z/2)`
/// with `ϑ = (r_h/ℓ)(Δφ − 2πn)`, `z = r_h Δt/ℓ² − iε`, `X = rr'/r_h² − 1` and
/// `R = √((r²−r_h²)(r'²−r_h²))/r_h²`, which equals the defining expression
/// `(rr'/r_h²) cosh ϑ − 1 − R cosh z` without its cancellations near coincidence.
pub fn sigma_epsilon(x: &EventPoint, xp: &EventPoint, n: i64, eps: f64, params: &Spacetime) -> Complex64 {
    let rh = params.horizon_radius();
    let l = params.ads_length();
    let rh2 = rh * rh;
    let product = x.r * xp.r / rh2;
    let half_angle = 0.5 * rh / l * (x.phi - xp.phi - 2.0 * PI * n as f64);
    let radial = ((x.r - rh) * (x.r + rh) * (xp.r - rh) * (xp.r + rh)).max(0.0).sqrt() / rh2;
    let offset = (x.r - xp.r).powi(2) / rh2 / (product - 1.0 + radial);
    let half_time = 0.5 * Complex64::new(rh / (l * l) * (x.t - xp.t), -eps);
    let spatial = 2.0 * product * half_angle.sinh().powi(2) + offset;
    spatial - 2.0 * radial * half_time.sinh().powi(2)
}

/// The pair `(α⁻_{AB,n}, α⁺_{AB,n})` for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageTerm {
    pub n: i64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
}

/// `arccosh(1 + u)` without cancellation for small `u`.
pub fn acosh_one_plus(u: f64) -> f64 {
    if u > 1e150 {
        return LN_2 + u.ln();
    }
    (u + (u * (u + 2.0)).sqrt()).ln_1p()
}

/// `ln sinh x` for `x > 0`, safe for large arguments.
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `α∓_{AB,n}` for detectors on a common axis (`Δφ = 0`).
///
/// With `χ = d/ℓ` and `ρ = r_h/ℓ`,
/// `cosh α⁻ − 1 = [2 cosh χ_A cosh χ_B sinh²(πnρ) + 2 sinh²((χ_B−χ_A)/2)] / (sinh χ_A sinh χ_B)`
/// and `cosh α⁺ = cosh α⁻ + 2/(sinh χ_A sinh χ_B)`.
pub fn alpha_pm(n: i64, a: &Placement, b: &Placement, params: &Spacetime) -> Result<ImageTerm> {
    let (sa, ca) = a.hyperbolic(params);
    let (sb, cb) = b.hyperbolic(params);
    let sab = sa * sb;
    if !(sab > 0.0) {
        return Err(Error::Domain(
            "image arguments need both detectors strictly outside the horizon".into(),
        ));
    }
    let rho = params.horizon_ratio();
    let half_sep = 0.5 * (b.rapidity(params) - a.rapidity(params));
    let x = PI * n.unsigned_abs() as f64 * rho;
    let separation = 2.0 * half_sep.sinh().powi(2);

    let (alpha_minus, alpha_plus) = if x > 300.0 {
        // log domain: the angular term dominates by hundreds of e-folds
        let ln_u = LN_2 + ca.ln() + cb.ln() + 2.0 * ln_sinh(x) - sab.ln();
        let alpha = LN_2 + ln_u;
        (alpha, alpha)
    } else {
        let u_minus = (2.0 * ca * cb * x.sinh().powi(2) + separation) / sab;
        let u_plus = u_minus + 2.0 / sab;
        if !(u_minus >= 0.0) || !u_plus.is_finite() {
            return Err(Error::Domain(format!(
                "arccosh argument for image {n} is invalid (cosh α⁻ − 1 = {u_minus})"
            )));
        }
        (acosh_one_plus(u_minus), acosh_one_plus(u_plus))
    };
    Ok(ImageTerm {
        n,
        alpha_minus,
        alpha_plus,
    })
}

/// Upper-bound scale of image `n`'s contribution, `1/√(1 + cosh α⁻) = 1/(√2 cosh(α⁻/2))`.
///
/// Monotone decreasing in `|n|`; drives the truncation policy.
pub fn image_term_magnitude(term: &ImageTerm) -> f64 {
    1.0 / (std::f64::consts::SQRT_2 * (0.5 * term.alpha_minus).cosh())
}

/// Truncation control for the image sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Stop once the estimated tail falls below `tail_tol × |accumulated|`.
    pub tail_tol: f64,
    /// Images with `|n| ≤ n_min` are always computed.
    pub n_min: u32,
    /// Hard cap on `|n|`.
    pub n_max: u32,
    /// Use exactly `|n| ≤ fixed` when set.
    pub fixed: Option<u32>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_tol: 1e-10,
            n_min: 2,
            n_max: 50,
            fixed: None,
        }
    }
}

impl TruncationPolicy {
    pub fn fixed(n: u32) -> Self {
        TruncationPolicy {
            fixed: Some(n),
            ..TruncationPolicy::default()
        }
    }

    /// Number of images needed when `r_h/ℓ < 1e-4`, where each image is nearly
    /// as large as the previous one: `2πNr_h/ℓ ≥ 30`.
    pub fn small_ratio_requirement(horizon_ratio: f64) -> Option<f64> {
        (horizon_ratio < 1e-4).then(|| 30.0 / (2.0 * PI * horizon_ratio))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCondition;

    fn fig1() -> Spacetime {
        Spacetime::new(10.0, 0.01, BoundaryCondition::Dirichlet).unwrap()
    }

    /// `cosh α∓` straight from the defining arccosh arguments.
    fn direct_cosh_alpha(n: i64, ra: f64, rb: f64, st: &Spacetime) -> (f64, f64) {
        let rh = st.horizon_radius();
        let l = st.ads_length();
        let ga = (ra * ra - rh * rh).sqrt() / l;
        let gb = (rb * rb - rh * rh).sqrt() / l;
        let pre = rh * rh / (l * l * ga * gb);
        let ang = (rh / l * 2.0 * PI * n as f64).cosh();
        (
            pre * (ra * rb / (rh * rh) * ang - 1.0),
            pre * (ra * rb / (rh * rh) * ang + 1.0),
        )
    }

    #[test]
    fn coincident_points_have_zero_interval() {
        let st = fig1();
        let x = EventPoint {
            t: 0.3,
            r: 1.7,
            phi: 0.0,
        };
        assert!(sigma_epsilon(&x, &x, 0, 0.0, &st).norm() < 1e-15);
    }

    #[test]
    fn equal_radii_image_one() {
        let st = fig1();
        let r = 0.7f64.cosh();
        let x = EventPoint { t: 0.0, r, phi: 0.0 };
        let s = sigma_epsilon(&x, &x, 1, 0.0, &st);
        let c2 = 0.7f64.cosh().powi(2);
        let expected = c2 * (0.2 * PI).cosh() - 1.0 - 0.7f64.sinh().powi(2);
        assert!((s.re - expected).abs() < 1e-14 && s.im.abs() < 1e-15);

        // σ + 1 = (ℓ²γ²/r_h²)(cosh α⁻ − 1) + 1 with the stable α⁻
        let p = Placement::HorizonDistance(7.0);
        let term = alpha_pm(1, &p, &p, &st).unwrap();
        let gamma = p.redshift(&st);
        let scale = 100.0 * gamma * gamma;
        assert!(((scale * (term.alpha_minus.cosh() - 1.0) - s.re) / s.re).abs() < 1e-12);
    }

    #[test]
    fn kms_shift_is_periodic() {
        let st = fig1();
        let x = EventPoint {
            t: 0.4,
            r: 1.3,
            phi: 0.0,
        };
        let y = EventPoint {
            t: -0.2,
            r: 2.1,
            phi: 0.0,
        };
        // Δt → Δt + 2πiℓ²/r_h: evaluate cosh at the complex argument directly
        let base = sigma_epsilon(&x, &y, 0, 0.0, &st);
        let rh = st.horizon_radius();
        let radial = ((x.r * x.r - rh * rh) * (y.r * y.r - rh * rh)).sqrt() / (rh * rh);
        let arg = Complex64::new(rh / 100.0 * (x.t - y.t), 2.0 * PI);
        let moved = x.r * y.r / (rh * rh) - 1.0 - radial * arg.cosh();
        assert!((moved - base).norm() < 1e-12);
    }

    #[test]
    fn coincident_detectors_image_zero() {
        let st = fig1();
        let p = Placement::HorizonDistance(7.0);
        let term = alpha_pm(0, &p, &p, &st).unwrap();
        assert_eq!(term.alpha_minus, 0.0);
        let gamma = p.redshift(&st);
        let expected = (1.0 + 2.0 / (100.0 * gamma * gamma)).acosh();
        assert!(((term.alpha_plus - expected) / expected).abs() < 1e-13);
    }

    #[test]
    fn stable_alpha_matches_direct_arccosh() {
        let st = fig1();
        let a = Placement::HorizonDistance(7.0);
        let b = Placement::HorizonDistance(14.0);
        let (ra, rb) = (a.radius(&st), b.radius(&st));
        for n in -4..=4 {
            let term = alpha_pm(n, &a, &b, &st).unwrap();
            let (cm, cp) = direct_cosh_alpha(n, ra, rb, &st);
            assert!(
                ((term.alpha_minus - cm.acosh()) / term.alpha_minus).abs() < 1e-11,
                "n = {n}"
            );
            assert!(
                ((term.alpha_plus - cp.acosh()) / term.alpha_plus).abs() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn zero_image_matches_interval_at_equal_time() {
        let st = fig1();
        let a = Placement::HorizonDistance(7.0);
        let b = Placement::HorizonDistance(14.0);
        let term = alpha_pm(0, &a, &b, &st).unwrap();
        let xa = EventPoint {
            t: 0.0,
            r: a.radius(&st),
            phi: 0.0,
        };
        let xb = EventPoint {
            t: 0.0,
            r: b.radius(&st),
            phi: 0.0,
        };
        let sigma = sigma_epsilon(&xa, &xb, 0, 0.0, &st).re;
        let scale = 100.0 * a.redshift(&st) * b.redshift(&st);
        let via_alpha = scale * (term.alpha_minus.cosh() - 1.0);
        assert!(((sigma - via_alpha) / sigma).abs() < 1e-12);
    }

    #[test]
    fn images_are_even_and_growing() {
        let st = fig1();
        let a = Placement::HorizonDistance(0.5);
        let b = Placement::HorizonDistance(7.5);
        let mut last = alpha_pm(0, &a, &b, &st).unwrap();
        assert!(last.alpha_plus > last.alpha_minus);
        for n in 1..60 {
            let t = alpha_pm(n, &a, &b, &st).unwrap();
            let m = alpha_pm(-n, &a, &b, &st).unwrap();
            assert_eq!(t.alpha_minus, m.alpha_minus);
            assert_eq!(t.alpha_plus, m.alpha_plus);
            // the 2/(sinh χ_A sinh χ_B) offset is lost to rounding for large n
            assert!(t.alpha_plus >= t.alpha_minus);
            assert!(t.alpha_minus > last.alpha_minus && t.alpha_plus >= last.alpha_plus);
            assert!(image_term_magnitude(&t) < image_term_magnitude(&last));
            last = t;
        }
    }

    #[test]
    fn magnitude_decays_exponentially() {
        let st = fig1();
        let a = Placement::HorizonDistance(7.0);
        let b = Placement::HorizonDistance(14.0);
        let m = |n| image_term_magnitude(&alpha_pm(n, &a, &b, &st).unwrap());
        // for large n, α⁻_n ≈ 2πnr_h/ℓ + const, so successive terms shrink by e^{−πr_h/ℓ}
        let ratio = m(40) / m(39);
        let expected = (-PI * st.horizon_ratio()).exp();
        assert!((ratio / expected - 1.0).abs() < 1e-9);
        assert!(m(40) < 1e-5 * m(1));
    }

    #[test]
    fn huge_horizon_uses_log_domain() {
        let st = Spacetime::from_horizon_radius(10.0, 6283.0, BoundaryCondition::Dirichlet).unwrap();
        let a = Placement::HorizonDistance(0.01);
        let b = Placement::HorizonDistance(7.01);
        let t = alpha_pm(1, &a, &b, &st).unwrap();
        assert!(t.alpha_minus.is_finite() && t.alpha_minus > 3000.0);
        assert_eq!(image_term_magnitude(&t), 0.0);
    }

    #[test]
    fn horizon_placement_is_rejected() {
        let st = fig1();
        let a = Placement::HorizonDistance(0.0);
        let b = Placement::HorizonDistance(7.0);
        assert!(alpha_pm(0, &a, &b, &st).is_err());
    }

    #[test]
    fn acosh_small_argument() {
        let u = 1e-14;
        assert!(((acosh_one_plus(u) - (2.0 * u).sqrt()) / (2.0 * u).sqrt()).abs() < 1e-6);
        assert!((acosh_one_plus(3.0) - 4f64.acosh()).abs() < 1e-15);
    }
}
