//! Density-matrix elements of two static detectors.
//!
//! Elements are returned in units of `λ̃² = λ²σ`. Each element is split into
//! its AdS-Rindler (`n = 0`) and BTZ (`n ≠ 0`) parts.
//!
//! With `s_j = sinh χ_j`, the Gaussian and phase coefficients of the branch
//! integrals reduce to
//!
//! * `a = ℓ² s_A² s_B² / (2(s_A² + s_B²))`,
//! * `β = ℓΩ s_A s_B (s_A + s_B) / (s_A² + s_B²)`,
//! * `K = √(s_A s_B) / (4√π √(s_A² + s_B²)) · exp[−Ω²(s_A − s_B)² / (2(s_A² + s_B²))]`,
//!
//! none of which depend on `r_h`; the horizon enters only through `α∓_n`.

pub mod oracle;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Placement, Spacetime};
use crate::quadrature::{
    fermi_dirac_response, integrate_image_sum, BranchIntegrand, ContourSpec, ImageRecord, ImageSum, ImageSumTerm,
};
use crate::wightman::{alpha_pm, image_term_magnitude, ImageTerm, TruncationPolicy};

/// Contour and image-sum controls shared by all elements.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tolerances {
    pub contour: ContourSpec,
    pub truncation: TruncationPolicy,
}

/// Two static detectors on a common axis, A closer to the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorPair {
    pub spacetime: Spacetime,
    pub a: Placement,
    pub b: Placement,
    /// Energy gap `Ωσ`.
    pub gap: f64,
}

impl DetectorPair {
    pub fn new(spacetime: Spacetime, a: Placement, b: Placement, gap: f64) -> Result<Self> {
        a.validate(&spacetime)?;
        b.validate(&spacetime)?;
        if !gap.is_finite() {
            return Err(Error::InvalidParameter("energy gap is not finite".into()));
        }
        let (chi_a, chi_b) = (a.rapidity(&spacetime), b.rapidity(&spacetime));
        if !(chi_a > 0.0) {
            return Err(Error::HorizonDivergence);
        }
        if !(chi_b > chi_a) {
            return Err(Error::InvalidParameter(format!(
                "detector B must be farther from the horizon than A (d_A = {}, d_B = {})",
                a.horizon_distance(&spacetime),
                b.horizon_distance(&spacetime)
            )));
        }
        Ok(DetectorPair { spacetime, a, b, gap })
    }

    /// B placed a proper distance `separation` beyond A.
    pub fn with_separation(spacetime: Spacetime, a: Placement, separation: f64, gap: f64) -> Result<Self> {
        if !(separation.is_finite() && separation > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "detector separation must be positive, got {separation}"
            )));
        }
        let b = Placement::HorizonDistance(a.horizon_distance(&spacetime) + separation);
        DetectorPair::new(spacetime, a, b, gap)
    }

    /// The same pair with `A ↔ B`; only meaningful for the oracle, which has no ordering constraint.
    pub fn swapped(&self) -> (Placement, Placement) {
        (self.b, self.a)
    }
}

/// A real element `𝓛_AA` or `𝓛_BB`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub value: f64,
    /// Fermi-Dirac term plus the `ζ`-weighted `n = 0` branch integral.
    pub rindler: f64,
    pub btz: f64,
    pub fermi_dirac: f64,
    pub error: f64,
    /// Largest `|n|` included.
    pub max_image: u32,
    pub terms: Vec<ImageRecord>,
}

/// The off-diagonal element `𝓛_AB`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub value: Complex64,
    pub rindler: Complex64,
    pub btz: Complex64,
    pub error: f64,
    pub max_image: u32,
    pub terms: Vec<ImageRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixElements {
    pub l_aa: Response,
    pub l_bb: Response,
    pub l_ab: Correlation,
}

impl MatrixElements {
    /// `𝓛_AA 𝓛_BB − |𝓛_AB|²` and the error bar of that difference.
    pub fn cauchy_schwarz_margin(&self) -> (f64, f64) {
        let (aa, bb, ab) = (self.l_aa.value, self.l_bb.value, self.l_ab.value.norm());
        let margin = aa * bb - ab * ab;
        let error = aa.abs() * self.l_bb.error + bb.abs() * self.l_aa.error + 2.0 * ab * self.l_ab.error;
        (margin, error)
    }

    pub fn satisfies_cauchy_schwarz(&self) -> bool {
        let (margin, error) = self.cauchy_schwarz_margin();
        margin >= -error
    }

    /// Largest `|n|` used by any element.
    pub fn max_image(&self) -> u32 {
        self.l_aa.max_image.max(self.l_bb.max_image).max(self.l_ab.max_image)
    }
}

/// `1/(2√(2π))`, the prefactor of the `n = 0` branch integral in `𝓛_DD`.
fn response_prefactor() -> f64 {
    0.5 / (2.0 * PI).sqrt()
}

/// Images `n = 0, 1, 2, …`, with `±n` folded into a weight of 2.
fn folded_images<'a, F>(make: F) -> impl Iterator<Item = ImageSumTerm> + 'a
where
    F: Fn(i64) -> Option<(ImageTerm, BranchIntegrand)> + 'a,
{
    (0i64..).map_while(move |n| {
        make(n).map(|(image, integrand)| ImageSumTerm {
            n,
            weight: if n == 0 { 1.0 } else { 2.0 },
            integrand,
            magnitude: image_term_magnitude(&image),
        })
    })
}

/// Images `n = 0, −1, 1, −2, 2, …` without folding.
fn signed_images<'a, F>(make: F) -> impl Iterator<Item = ImageSumTerm> + 'a
where
    F: Fn(i64) -> Option<(ImageTerm, BranchIntegrand)> + 'a,
{
    (0i64..)
        .flat_map(|k| if k == 0 { vec![0] } else { vec![-k, k] })
        .map_while(move |n| {
            make(n).map(|(image, integrand)| ImageSumTerm {
                n,
                weight: 1.0,
                integrand,
                magnitude: image_term_magnitude(&image),
            })
        })
}

/// Transition probability `𝓛_DD/λ̃²` of a single detector.
///
/// A negative `gap` gives the de-excitation probability.
pub fn compute_l_dd(spacetime: &Spacetime, placement: &Placement, gap: f64, tol: &Tolerances) -> Result<Response> {
    placement.validate(spacetime)?;
    if !gap.is_finite() {
        return Err(Error::InvalidParameter("energy gap is not finite".into()));
    }
    let (s, _) = placement.hyperbolic(spacetime);
    if !(s > 0.0) {
        return Err(Error::HorizonDivergence);
    }
    let l = spacetime.ads_length();
    let temperature = 1.0 / (2.0 * PI * l * s);
    let fd = fermi_dirac_response(gap, temperature)?;

    let gaussian = 0.25 * l * l * s * s;
    let phase = l * s * gap;
    let boundary = spacetime.boundary();
    let make = |n: i64| {
        let image = alpha_pm(n, placement, placement, spacetime).ok()?;
        let integrand = BranchIntegrand {
            gaussian,
            phase,
            alpha_minus: (n != 0).then_some(image.alpha_minus),
            alpha_plus: image.alpha_plus,
            boundary,
        };
        Some((image, integrand))
    };
    let sum = integrate_image_sum(
        folded_images(make),
        &tol.contour,
        &tol.truncation,
        fd.value / response_prefactor(),
    )?;

    let c = response_prefactor();
    let rindler = fd.value + c * sum.rindler.re;
    let btz = c * sum.btz.re;
    Ok(Response {
        value: rindler + btz,
        rindler,
        btz,
        fermi_dirac: fd.value,
        error: fd.error + c * sum.error(),
        max_image: sum.max_image,
        terms: sum.records,
    })
}

/// Coefficients `(a, β, K)` of the pair's branch integrals.
fn pair_coefficients(pair: &DetectorPair) -> (f64, f64, f64) {
    let st = &pair.spacetime;
    let l = st.ads_length();
    let (sa, _) = pair.a.hyperbolic(st);
    let (sb, _) = pair.b.hyperbolic(st);
    let norm = sa * sa + sb * sb;
    let a = l * l * (sa * sb).powi(2) / (2.0 * norm);
    let beta = l * pair.gap * sa * sb * (sa + sb) / norm;
    let mismatch = pair.gap * (sa - sb);
    let k = (sa * sb).sqrt() / (4.0 * PI.sqrt() * norm.sqrt()) * (-mismatch * mismatch / (2.0 * norm)).exp();
    (a, beta, k)
}

fn pair_image_sum(pair: &DetectorPair, tol: &Tolerances, fold: bool) -> Result<(f64, ImageSum)> {
    let (gaussian, phase, k) = pair_coefficients(pair);
    let st = &pair.spacetime;
    let boundary = st.boundary();
    let make = |n: i64| {
        let image = alpha_pm(n, &pair.a, &pair.b, st).ok()?;
        let integrand = BranchIntegrand {
            gaussian,
            phase,
            alpha_minus: Some(image.alpha_minus),
            alpha_plus: image.alpha_plus,
            boundary,
        };
        Some((image, integrand))
    };
    let sum = if fold {
        integrate_image_sum(folded_images(make), &tol.contour, &tol.truncation, 0.0)?
    } else {
        integrate_image_sum(signed_images(make), &tol.contour, &tol.truncation, 0.0)?
    };
    Ok((k, sum))
}

/// Off-diagonal element `𝓛_AB/λ̃²` for simultaneous Gaussian switching.
pub fn compute_l_ab(pair: &DetectorPair, tol: &Tolerances) -> Result<Correlation> {
    let (k, sum) = pair_image_sum(pair, tol, true)?;
    Ok(correlation_from(k, sum))
}

/// [`compute_l_ab`] summing `n` and `−n` separately instead of folding them.
pub fn compute_l_ab_unfolded(pair: &DetectorPair, tol: &Tolerances) -> Result<Correlation> {
    let (k, sum) = pair_image_sum(pair, tol, false)?;
    Ok(correlation_from(k, sum))
}

fn correlation_from(k: f64, sum: ImageSum) -> Correlation {
    // the reduced form keeps only the real part of each branch integral
    let scale = 2.0 * k;
    let rindler = Complex64::new(scale * sum.rindler.re, 0.0);
    let btz = Complex64::new(scale * sum.btz.re, 0.0);
    Correlation {
        value: rindler + btz,
        rindler,
        btz,
        error: scale * sum.error(),
        max_image: sum.max_image,
        terms: sum.records,
    }
}

/// All three elements of the pair.
pub fn compute_elements(pair: &DetectorPair, tol: &Tolerances) -> Result<MatrixElements> {
    Ok(MatrixElements {
        l_aa: compute_l_dd(&pair.spacetime, &pair.a, pair.gap, tol)?,
        l_bb: compute_l_dd(&pair.spacetime, &pair.b, pair.gap, tol)?,
        l_ab: compute_l_ab(pair, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCondition;

    fn fig1(boundary: BoundaryCondition) -> Spacetime {
        Spacetime::new(10.0, 0.01, boundary).unwrap()
    }

    fn fig1_pair(boundary: BoundaryCondition) -> DetectorPair {
        DetectorPair::with_separation(fig1(boundary), Placement::HorizonDistance(7.0), 7.0, 1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pair_ordering_is_enforced() {
        let st = fig1(BoundaryCondition::Dirichlet);
        let err = DetectorPair::new(
            st,
            Placement::HorizonDistance(7.0),
            Placement::HorizonDistance(3.0),
            1.0,
        );
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
        let err = DetectorPair::new(
            st,
            Placement::HorizonDistance(0.0),
            Placement::HorizonDistance(3.0),
            1.0,
        );
        assert_eq!(err, Err(Error::HorizonDivergence));
    }

    #[test]
    fn horizon_response_diverges() {
        let st = fig1(BoundaryCondition::Dirichlet);
        let r = compute_l_dd(&st, &Placement::HorizonDistance(0.0), 1.0, &Tolerances::default());
        assert_eq!(r, Err(Error::HorizonDivergence));
    }

    #[test]
    fn equal_redshifts_leave_k_unsuppressed() {
        let st = fig1(BoundaryCondition::Dirichlet);
        let p = Placement::HorizonDistance(7.0);
        let pair = DetectorPair {
            spacetime: st,
            a: p,
            b: p,
            gap: 3.0,
        };
        let (a, beta, k) = pair_coefficients(&pair);
        let s = p.hyperbolic(&st).0;
        assert!(rel(k, 1.0 / (4.0 * (2.0 * PI).sqrt())) < 1e-15);
        // the pair coefficients reduce to the single-detector ones
        assert!(rel(a, 25.0 * s * s) < 1e-15);
        assert!(rel(beta, 30.0 * s) < 1e-15);
    }

    #[test]
    fn coefficients_match_redshift_form() {
        let pair = fig1_pair(BoundaryCondition::Dirichlet);
        let st = &pair.spacetime;
        let (ga, gb) = (pair.a.redshift(st), pair.b.redshift(st));
        let (rh, l) = (st.horizon_radius(), st.ads_length());
        let norm = ga * ga + gb * gb;
        let a = (ga * gb).powi(2) * l.powi(4) / (2.0 * norm * rh * rh);
        let beta = ga * gb * (ga + gb) * l * l * pair.gap / (norm * rh);
        let k =
            (ga * gb).sqrt() / (4.0 * PI.sqrt() * norm.sqrt()) * (-(pair.gap * (ga - gb)).powi(2) / (2.0 * norm)).exp();
        let (a2, beta2, k2) = pair_coefficients(&pair);
        assert!(rel(a2, a) < 1e-13 && rel(beta2, beta) < 1e-13 && rel(k2, k) < 1e-13);
    }

    #[test]
    fn fig1_elements_are_consistent() {
        let tol = Tolerances::default();
        let m = compute_elements(&fig1_pair(BoundaryCondition::Dirichlet), &tol).unwrap();
        assert!(m.l_aa.value > 0.0 && m.l_bb.value > 0.0);
        assert!(m.satisfies_cauchy_schwarz());
        assert!(m.l_ab.value.norm() > 0.0);
        assert_eq!(m.l_ab.value.im, 0.0);
        assert!(m.l_aa.error < 1e-8 * m.l_aa.value);
        assert!(m.l_ab.error < 1e-8 * m.l_ab.value.norm());
    }

    #[test]
    fn boundary_condition_enters_linearly() {
        let tol = Tolerances {
            truncation: TruncationPolicy::fixed(6),
            ..Tolerances::default()
        };
        let at = |bc| compute_elements(&fig1_pair(bc), &tol).unwrap();
        let (d, t, n) = (
            at(BoundaryCondition::Dirichlet),
            at(BoundaryCondition::Transparent),
            at(BoundaryCondition::Neumann),
        );
        let lin = |x: f64, y: f64, z: f64| ((x + z - 2.0 * y) / y).abs();
        assert!(lin(d.l_aa.value, t.l_aa.value, n.l_aa.value) < 1e-10);
        assert!(lin(d.l_bb.value, t.l_bb.value, n.l_bb.value) < 1e-10);
        assert!(lin(d.l_ab.value.re, t.l_ab.value.re, n.l_ab.value.re) < 1e-10);
    }

    #[test]
    fn folding_matches_signed_sum() {
        let tol = Tolerances {
            truncation: TruncationPolicy::fixed(4),
            ..Tolerances::default()
        };
        let pair = fig1_pair(BoundaryCondition::Dirichlet);
        let folded = compute_l_ab(&pair, &tol).unwrap();
        let signed = compute_l_ab_unfolded(&pair, &tol).unwrap();
        assert!(rel(folded.value.re, signed.value.re) < 1e-12);
        assert_eq!(signed.terms.len(), 9);
        assert_eq!(folded.terms.len(), 5);
    }

    #[test]
    fn distant_pair_decorrelates() {
        let st = fig1(BoundaryCondition::Dirichlet);
        let tol = Tolerances::default();
        let mut last = f64::INFINITY;
        for sep in [7.0, 30.0, 100.0, 400.0] {
            let pair = DetectorPair::with_separation(st, Placement::HorizonDistance(7.0), sep, 1.0).unwrap();
            let v = compute_l_ab(&pair, &tol).unwrap().value.norm();
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn heavy_hole_response_is_pure_rindler() {
        // at fixed proper distance, large r_h/ℓ pushes every image out of reach
        let tol = Tolerances::default();
        let p = Placement::HorizonDistance(1.0);
        let light = compute_l_dd(
            &Spacetime::new(10.0, 0.01, BoundaryCondition::Dirichlet).unwrap(),
            &p,
            1.0,
            &tol,
        )
        .unwrap();
        let heavy = compute_l_dd(
            &Spacetime::new(10.0, 100.0, BoundaryCondition::Dirichlet).unwrap(),
            &p,
            1.0,
            &tol,
        )
        .unwrap();
        assert!(light.btz.abs() > 1e-6 * light.value);
        assert!(heavy.btz.abs() < 1e-12 * heavy.value);
    }

    #[test]
    fn rindler_part_is_independent_of_redshift_at_fixed_temperature() {
        let tol = Tolerances::default();
        let values: Vec<Response> = [0.01, 1.0, 100.0]
            .iter()
            .map(|&gamma| {
                let (st, p) = Placement::thermal_family(10.0, 1.0, gamma, BoundaryCondition::Dirichlet).unwrap();
                compute_l_dd(&st, &p, 1.0, &tol).unwrap()
            })
            .collect();
        for v in &values[1..] {
            assert!(rel(v.rindler, values[0].rindler) < 1e-12);
        }
        assert!(values[2].btz.abs() < 1e-3 * values[0].btz.abs());
    }

    #[test]
    fn de_excitation_exceeds_excitation() {
        let st = fig1(BoundaryCondition::Dirichlet);
        let tol = Tolerances::default();
        let p = Placement::HorizonDistance(7.0);
        let up = compute_l_dd(&st, &p, 1.0, &tol).unwrap();
        let down = compute_l_dd(&st, &p, -1.0, &tol).unwrap();
        assert!(down.value > up.value && up.value > 0.0);
        assert!(down.error < 1e-8 * down.value);
    }

    #[test]
    fn truncation_at_ten_and_twenty_agree_within_tail() {
        // r_h/ℓ = 0.1: images decay by e^{−π/10} per step
        let st = Spacetime::from_horizon_radius(10.0, 1.0, BoundaryCondition::Dirichlet).unwrap();
        let pair = DetectorPair::with_separation(st, Placement::HorizonDistance(2.0), 1.0, 0.5).unwrap();
        let at = |n| Tolerances {
            truncation: TruncationPolicy::fixed(n),
            ..Tolerances::default()
        };
        let ten = compute_l_ab(&pair, &at(10)).unwrap();
        let twenty = compute_l_ab(&pair, &at(20)).unwrap();
        assert_eq!(ten.max_image, 10);
        assert!((ten.value - twenty.value).norm() <= ten.error + twenty.error);
        let aa10 = compute_l_dd(&st, &pair.a, pair.gap, &at(10)).unwrap();
        let aa20 = compute_l_dd(&st, &pair.a, pair.gap, &at(20)).unwrap();
        assert!((aa10.value - aa20.value).abs() <= aa10.error + aa20.error);
        assert!(aa10.value != aa20.value);
    }
}
