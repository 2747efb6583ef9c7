//! Static BTZ kinematics.
//!
//! All lengths are measured in units of the switching width σ. A detector's
//! radial position can be given as a coordinate radius, as a proper distance
//! from the horizon, or as a (local temperature, redshift) pair; the native
//! form is stored and every other quantity is derived from it by the best
//! conditioned route. Internally each placement reduces to the rapidity
//! `χ = d/ℓ`, with `r = r_h cosh χ` and `γ = (r_h/ℓ) sinh χ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field boundary condition at spatial infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Transparent,
    Neumann,
}

impl BoundaryCondition {
    pub fn zeta(self) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => 1.0,
            BoundaryCondition::Transparent => 0.0,
            BoundaryCondition::Neumann => -1.0,
        }
    }

    pub fn from_zeta(zeta: i32) -> Result<Self> {
        match zeta {
            1 => Ok(BoundaryCondition::Dirichlet),
            0 => Ok(BoundaryCondition::Transparent),
            -1 => Ok(BoundaryCondition::Neumann),
            other => Err(Error::InvalidParameter(format!(
                "boundary condition zeta must be -1, 0 or 1, got {other}"
            ))),
        }
    }
}

/// A nonrotating BTZ background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacetime {
    ads_length: f64,
    mass: f64,
    boundary: BoundaryCondition,
}

impl Spacetime {
    pub fn new(ads_length: f64, mass: f64, boundary: BoundaryCondition) -> Result<Self> {
        if !(ads_length.is_finite() && ads_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "AdS length must be positive, got {ads_length}"
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "black-hole mass must be positive, got {mass}"
            )));
        }
        Ok(Spacetime {
            ads_length,
            mass,
            boundary,
        })
    }

    pub fn from_horizon_radius(ads_length: f64, horizon_radius: f64, boundary: BoundaryCondition) -> Result<Self> {
        let ratio = horizon_radius / ads_length;
        Spacetime::new(ads_length, ratio * ratio, boundary)
    }

    pub fn ads_length(&self) -> f64 {
        self.ads_length
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn zeta(&self) -> f64 {
        self.boundary.zeta()
    }

    pub fn with_boundary(self, boundary: BoundaryCondition) -> Self {
        Spacetime { boundary, ..self }
    }

    /// `r_h = ℓ√M`.
    pub fn horizon_radius(&self) -> f64 {
        self.ads_length * self.mass.sqrt()
    }

    /// `r_h/ℓ`, the angular period scale of the image sum.
    pub fn horizon_ratio(&self) -> f64 {
        self.mass.sqrt()
    }

    /// `T_H = r_h / (2πℓ²)`.
    pub fn hawking_temperature(&self) -> f64 {
        self.horizon_radius() / (2.0 * PI * self.ads_length * self.ads_length)
    }
}

/// `r_h = ℓ√M`.
pub fn horizon_radius(params: &Spacetime) -> f64 {
    params.horizon_radius()
}

/// Proper distance between `(t, r1, φ)` and `(t, r2, φ)` for `r_h ≤ r1 ≤ r2`.
pub fn proper_distance(r1: f64, r2: f64, params: &Spacetime) -> Result<f64> {
    let rh = params.horizon_radius();
    if !(r1 >= rh) {
        return Err(Error::Domain(format!("r1 = {r1} lies inside the horizon r_h = {rh}")));
    }
    if !(r2 >= r1) {
        return Err(Error::Domain(format!("need r2 >= r1, got r1 = {r1}, r2 = {r2}")));
    }
    // ℓ ln[(r2 + √(r2²−r_h²)) / (r1 + √(r1²−r_h²))] = ℓ (acosh(r2/r_h) − acosh(r1/r_h))
    let l = params.ads_length();
    Ok(l * ((r2 / rh).acosh() - (r1 / rh).acosh()))
}

/// Closed-form placement for a prescribed local temperature and redshift.
///
/// Returns `(r_h, d)` with `r_h = 2πℓ²Tγ` and `d = ℓ asinh(1/(2πℓT))`; the
/// black-hole mass is an output of this parametrization.
pub fn placement_from_thermal(temperature: f64, redshift: f64, ads_length: f64) -> Result<(f64, f64)> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !(redshift.is_finite() && redshift > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "redshift must be positive, got {redshift}"
        )));
    }
    let rh = 2.0 * PI * ads_length * ads_length * temperature * redshift;
    let d = ads_length * (1.0 / (2.0 * PI * ads_length * temperature)).asinh();
    Ok((rh, d))
}

/// Radial placement of a static detector, in its native representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Radius(f64),
    HorizonDistance(f64),
    Thermal { temperature: f64, redshift: f64 },
}

impl Placement {
    /// Build the spacetime and placement for a `(T, γ)` pair.
    pub fn thermal_family(
        ads_length: f64,
        temperature: f64,
        redshift: f64,
        boundary: BoundaryCondition,
    ) -> Result<(Spacetime, Placement)> {
        let (rh, _) = placement_from_thermal(temperature, redshift, ads_length)?;
        let st = Spacetime::from_horizon_radius(ads_length, rh, boundary)?;
        Ok((st, Placement::Thermal { temperature, redshift }))
    }

    /// Checks the placement against a background.
    pub fn validate(&self, params: &Spacetime) -> Result<()> {
        let rh = params.horizon_radius();
        match *self {
            Placement::Radius(r) => {
                if !(r.is_finite() && r >= rh) {
                    return Err(Error::Domain(format!("radius {r} is below the horizon {rh}")));
                }
            }
            Placement::HorizonDistance(d) => {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::Domain(format!("horizon distance must be >= 0, got {d}")));
                }
            }
            Placement::Thermal { temperature, redshift } => {
                let (rh_thermal, _) = placement_from_thermal(temperature, redshift, params.ads_length())?;
                if ((rh_thermal - rh) / rh).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "thermal pair implies r_h = {rh_thermal}, background has r_h = {rh}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(sinh χ, cosh χ)` with `χ = d/ℓ`.
    pub fn hyperbolic(&self, params: &Spacetime) -> (f64, f64) {
        let rh = params.horizon_radius();
        let l = params.ads_length();
        match *self {
            Placement::Radius(r) => {
                let c = r / rh;
                let s = ((c - 1.0) * (c + 1.0)).max(0.0).sqrt();
                (s, c)
            }
            Placement::HorizonDistance(d) => {
                let chi = d / l;
                (chi.sinh(), chi.cosh())
            }
            Placement::Thermal { temperature, .. } => {
                let s = 1.0 / (2.0 * PI * l * temperature);
                (s, s.hypot(1.0))
            }
        }
    }

    /// Rapidity `χ = d/ℓ`.
    pub fn rapidity(&self, params: &Spacetime) -> f64 {
        match *self {
            Placement::Radius(r) => (r / params.horizon_radius()).acosh(),
            Placement::HorizonDistance(d) => d / params.ads_length(),
            Placement::Thermal { temperature, .. } => (1.0 / (2.0 * PI * params.ads_length() * temperature)).asinh(),
        }
    }

    pub fn radius(&self, params: &Spacetime) -> f64 {
        match *self {
            Placement::Radius(r) => r,
            _ => params.horizon_radius() * self.hyperbolic(params).1,
        }
    }

    pub fn horizon_distance(&self, params: &Spacetime) -> f64 {
        match *self {
            Placement::HorizonDistance(d) => d,
            _ => params.ads_length() * self.rapidity(params),
        }
    }

    /// Redshift factor `γ`, computed from the native representation.
    pub fn redshift(&self, params: &Spacetime) -> f64 {
        let rh = params.horizon_radius();
        let l = params.ads_length();
        match *self {
            Placement::Radius(r) => ((r - rh) * (r + rh)).max(0.0).sqrt() / l,
            Placement::HorizonDistance(d) => rh / l * (d / l).sinh(),
            Placement::Thermal { redshift, .. } => redshift,
        }
    }

    /// Local KMS temperature `T = T_H/γ`.
    pub fn local_temperature(&self, params: &Spacetime) -> Result<f64> {
        if let Placement::Thermal { temperature, .. } = *self {
            return Ok(temperature);
        }
        let gamma = self.redshift(params);
        if gamma <= 0.0 {
            return Err(Error::HorizonDivergence);
        }
        Ok(params.hawking_temperature() / gamma)
    }

    /// The `(T, γ)` pair of this placement.
    pub fn thermal_pair(&self, params: &Spacetime) -> Result<(f64, f64)> {
        Ok((self.local_temperature(params)?, self.redshift(params)))
    }
}

/// Redshift factor `γ = √(r² − r_h²)/ℓ`.
pub fn redshift_factor(placement: &Placement, params: &Spacetime) -> Result<f64> {
    placement.validate(params)?;
    Ok(placement.redshift(params))
}

/// Local temperature `T = r_h/(2πℓ²γ)`; diverges on the horizon.
pub fn local_temperature(placement: &Placement, params: &Spacetime) -> Result<f64> {
    placement.validate(params)?;
    placement.local_temperature(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Spacetime {
        Spacetime::new(10.0, 0.01, BoundaryCondition::Dirichlet).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn horizon_radius_closed_form() {
        assert_eq!(horizon_radius(&fig1()), 1.0);
        let unit = Spacetime::new(1.0, 1.0, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(horizon_radius(&unit), 1.0);
    }

    #[test]
    fn invalid_spacetime_rejected() {
        assert!(Spacetime::new(0.0, 1.0, BoundaryCondition::Dirichlet).is_err());
        assert!(Spacetime::new(1.0, -1.0, BoundaryCondition::Dirichlet).is_err());
        assert!(BoundaryCondition::from_zeta(2).is_err());
    }

    #[test]
    fn proper_distance_examples() {
        let st = fig1();
        assert_eq!(proper_distance(1.3, 1.3, &st).unwrap(), 0.0);
        let unit = Spacetime::new(1.0, 1.0, BoundaryCondition::Dirichlet).unwrap();
        let d = proper_distance(1.0, 1f64.cosh(), &unit).unwrap();
        assert!((d - 1.0).abs() < 1e-14);

        // literal log form, solved for d = 7 by bisection
        let rh = st.horizon_radius();
        let log_form = |r2: f64| 10.0 * ((r2 + (r2 * r2 - rh * rh).sqrt()) / rh).ln();
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if log_form(mid) < 7.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(rel(lo, 0.7f64.cosh()) < 1e-13);
        assert!((lo - 1.25517).abs() < 1e-5);
        assert!(rel(proper_distance(rh, lo, &st).unwrap(), 7.0) < 1e-12);
    }

    #[test]
    fn proper_distance_domain_errors() {
        let st = fig1();
        assert!(matches!(proper_distance(0.5, 2.0, &st), Err(Error::Domain(_))));
        assert!(matches!(proper_distance(2.0, 1.5, &st), Err(Error::Domain(_))));
    }

    #[test]
    fn redshift_examples() {
        let st = fig1();
        assert_eq!(redshift_factor(&Placement::Radius(1.0), &st).unwrap(), 0.0);
        let unit = Spacetime::new(1.0, 1.0, BoundaryCondition::Dirichlet).unwrap();
        let g = redshift_factor(&Placement::HorizonDistance(1.0), &unit).unwrap();
        assert!((g - 1.175201193643801).abs() < 1e-14);

        // B at d_A + d_AB = 14, both routes
        let gb = Placement::HorizonDistance(14.0).redshift(&st);
        let rb = st.horizon_radius() * 1.4f64.cosh();
        let gb_radius = Placement::Radius(rb).redshift(&st);
        assert!((gb - 0.190430).abs() < 1e-6);
        assert!(rel(gb, gb_radius) < 1e-12);
    }

    #[test]
    fn redshift_below_horizon_is_domain_error() {
        assert!(redshift_factor(&Placement::Radius(0.9), &fig1()).is_err());
    }

    #[test]
    fn temperature_examples() {
        let unit = Spacetime::new(1.0, 1.0, BoundaryCondition::Dirichlet).unwrap();
        let p = Placement::Thermal {
            temperature: 1.0,
            redshift: 1.0 / (2.0 * PI),
        };
        assert!(p.validate(&unit).is_ok());
        // route through the distance representation
        let d = p.horizon_distance(&unit);
        let t = local_temperature(&Placement::HorizonDistance(d), &unit).unwrap();
        assert!((t - 1.0).abs() < 1e-12);

        let st = fig1();
        for d in [0.01, 1.0, 7.0, 20.0] {
            let p = Placement::HorizonDistance(d);
            let tg = p.local_temperature(&st).unwrap() * p.redshift(&st);
            assert!(rel(tg, 1.0 / (200.0 * PI)) < 1e-13);
        }

        let (rh, _) = placement_from_thermal(1.0, 0.1, 10.0).unwrap();
        assert!(rel(rh, 20.0 * PI) < 1e-15);
        assert!((rh - 62.8319).abs() < 1e-4);
    }

    #[test]
    fn temperature_diverges_at_horizon() {
        let st = fig1();
        assert_eq!(
            local_temperature(&Placement::HorizonDistance(0.0), &st),
            Err(Error::HorizonDivergence)
        );
        assert_eq!(
            local_temperature(&Placement::Radius(1.0), &st),
            Err(Error::HorizonDivergence)
        );
    }

    #[test]
    fn thermal_placement_closed_form() {
        let (rh, d) = placement_from_thermal(1.0, 0.1, 10.0).unwrap();
        let expected = 10.0 * ((1.0 + (1.0 + (20.0 * PI).powi(2)).sqrt()) / (20.0 * PI)).ln();
        assert!(rel(d, expected) < 1e-13);
        assert!((d - 0.159_148_224_787_988).abs() < 1e-12);
        assert!(rel((d / 10.0).sinh() * rh / 10.0, 0.1) < 1e-13);

        let (st, p) = Placement::thermal_family(10.0, 1.0, 0.1, BoundaryCondition::Dirichlet).unwrap();
        let hd = Placement::HorizonDistance(p.horizon_distance(&st));
        assert!(rel(hd.redshift(&st), 0.1) < 1e-12);
        assert!(rel(hd.local_temperature(&st).unwrap(), 1.0) < 1e-12);
    }

    #[test]
    fn thermal_asymptotics() {
        let (rh_cold, d_cold) = placement_from_thermal(1e-8, 0.5, 10.0).unwrap();
        let (rh_warm, d_warm) = placement_from_thermal(1e-2, 0.5, 10.0).unwrap();
        assert!(d_cold > d_warm && rh_cold < rh_warm);
        assert!(d_cold > 149.0 && rh_cold < 1e-5);
    }

    #[test]
    fn mismatched_thermal_pair_rejected() {
        let p = Placement::Thermal {
            temperature: 1.0,
            redshift: 0.1,
        };
        assert!(p.validate(&fig1()).is_err());
    }

    #[test]
    fn temperature_decreases_with_distance() {
        let st = fig1();
        let mut last = f64::INFINITY;
        for k in 1..200 {
            let d = 0.01 * 1.05f64.powi(k);
            let t = Placement::HorizonDistance(d).local_temperature(&st).unwrap();
            assert!(t < last);
            last = t;
        }
    }
}
