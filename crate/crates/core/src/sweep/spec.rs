use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detector::Tolerances;
use crate::error::{Error, Result};
use crate::quadrature::{ContourPath, ContourSpec};
use crate::wightman::TruncationPolicy;

/// A physical input that can be swept or held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variable {
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "d_a")]
    DA,
    #[serde(rename = "t_a")]
    TA,
    #[serde(rename = "gamma_a")]
    GammaA,
    #[serde(rename = "d_ab")]
    DAB,
    #[serde(rename = "mass")]
    Mass,
    #[serde(rename = "ads_length")]
    AdsLength,
    #[serde(rename = "zeta")]
    Zeta,
}

impl Variable {
    pub const ALL: [Variable; 8] = [
        Variable::AdsLength,
        Variable::Mass,
        Variable::Zeta,
        Variable::Omega,
        Variable::DA,
        Variable::DAB,
        Variable::TA,
        Variable::GammaA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Omega => "omega",
            Variable::DA => "d_a",
            Variable::TA => "t_a",
            Variable::GammaA => "gamma_a",
            Variable::DAB => "d_ab",
            Variable::Mass => "mass",
            Variable::AdsLength => "ads_length",
            Variable::Zeta => "zeta",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub variable: Variable,
    pub grid: Grid,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn log(variable: Variable, min: f64, max: f64, count: usize) -> Self {
        Axis {
            variable,
            grid: Grid::Log,
            min,
            max,
            count,
        }
    }

    pub fn linear(variable: Variable, min: f64, max: f64, count: usize) -> Self {
        Axis {
            variable,
            grid: Grid::Linear,
            min,
            max,
            count,
        }
    }

    /// Grid values; endpoints are reproduced exactly.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Spec(format!("axis `{}` has no points", self.variable)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::Spec(format!(
                "axis `{}` needs finite bounds with min <= max, got [{}, {}]",
                self.variable, self.min, self.max
            )));
        }
        if self.grid == Grid::Log && !(self.min > 0.0) {
            return Err(Error::Spec(format!(
                "log axis `{}` needs a positive minimum, got {}",
                self.variable, self.min
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let last = (self.count - 1) as f64;
        let values = (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.count - 1 {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.grid {
                    Grid::Linear => self.min + t * (self.max - self.min),
                    Grid::Log => {
                        let (lo, hi) = (self.min.log10(), self.max.log10());
                        10f64.powf(lo + t * (hi - lo))
                    }
                }
            })
            .collect();
        Ok(values)
    }
}

/// Numerical controls exposed to sweep configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepTolerances {
    pub rel: f64,
    pub abs: f64,
    pub tail: f64,
    pub n_max: u32,
    /// Straight contour at `Im z = eta`; the saddle path when absent.
    pub eta: Option<f64>,
}

impl Default for SweepTolerances {
    fn default() -> Self {
        let contour = ContourSpec::default();
        SweepTolerances {
            rel: contour.rel_tol,
            abs: contour.abs_tol,
            tail: TruncationPolicy::default().tail_tol,
            n_max: 2000,
            eta: None,
        }
    }
}

impl SweepTolerances {
    pub fn to_detector(&self) -> Result<Tolerances> {
        if !(self.rel > 0.0 && self.rel < 1.0) {
            return Err(Error::Spec(format!(
                "relative tolerance must lie in (0, 1), got {}",
                self.rel
            )));
        }
        if !(self.abs >= 0.0) || !(self.tail > 0.0) {
            return Err(Error::Spec("tolerances must be non-negative".into()));
        }
        let mut contour = ContourSpec {
            rel_tol: self.rel,
            abs_tol: self.abs,
            ..ContourSpec::default()
        };
        if let Some(eta) = self.eta {
            contour.path = ContourPath::Straight { eta };
            contour.validate()?;
        }
        Ok(Tolerances {
            contour,
            truncation: TruncationPolicy {
                tail_tol: self.tail,
                n_max: self.n_max,
                ..TruncationPolicy::default()
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

/// A sweep configuration, as read from JSON.
///
/// A preset supplies axes and fixed values; explicit entries override it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub preset: Option<String>,
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<Variable, f64>,
    pub tolerances: SweepTolerances,
    pub output: Option<OutputSpec>,
    pub jobs: Option<usize>,
}

/// How detector A and the black hole are specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Black-hole mass and proper distance of A from the horizon.
    Mass,
    /// Local temperature and redshift factor of A.
    Thermal,
}

/// A validated spec with the preset merged in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub preset: Option<Preset>,
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<Variable, f64>,
    pub family: Family,
    pub tolerances: SweepTolerances,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Plan> {
        let preset = self.preset.as_deref().map(Preset::from_str).transpose()?;
        let (mut axes, mut fixed) = match preset {
            Some(p) => {
                let base = p.spec();
                (base.axes, base.fixed)
            }
            None => (Vec::new(), BTreeMap::new()),
        };

        let mut seen = Vec::new();
        for axis in &self.axes {
            if seen.contains(&axis.variable) {
                return Err(Error::Spec(format!("variable `{}` appears on two axes", axis.variable)));
            }
            seen.push(axis.variable);
            if let Some(slot) = axes.iter_mut().find(|a| a.variable == axis.variable) {
                *slot = *axis;
            } else {
                axes.push(*axis);
            }
        }
        for (&var, &value) in &self.fixed {
            if seen.contains(&var) {
                return Err(Error::Spec(format!("variable `{var}` is both an axis and fixed")));
            }
            axes.retain(|a| a.variable != var);
            fixed.insert(var, value);
        }
        for axis in &axes {
            fixed.remove(&axis.variable);
            axis.values()?;
        }
        for (var, value) in &fixed {
            if !value.is_finite() {
                return Err(Error::Spec(format!("fixed value of `{var}` is not finite")));
            }
        }

        let given = |v: Variable| fixed.contains_key(&v) || axes.iter().any(|a| a.variable == v);
        let mass_family = given(Variable::Mass) || given(Variable::DA);
        let thermal_family = given(Variable::TA) || given(Variable::GammaA);
        let family = match (mass_family, thermal_family) {
            (true, false) => Family::Mass,
            (false, true) => Family::Thermal,
            (true, true) => {
                return Err(Error::Spec(
                    "use either (mass, d_a) or (t_a, gamma_a) to place detector A, not both".into(),
                ))
            }
            (false, false) => return Err(Error::Spec("detector A needs (mass, d_a) or (t_a, gamma_a)".into())),
        };
        let required: &[Variable] = match family {
            Family::Mass => &[
                Variable::AdsLength,
                Variable::Zeta,
                Variable::Omega,
                Variable::DAB,
                Variable::Mass,
                Variable::DA,
            ],
            Family::Thermal => &[
                Variable::AdsLength,
                Variable::Zeta,
                Variable::Omega,
                Variable::DAB,
                Variable::TA,
                Variable::GammaA,
            ],
        };
        let missing: Vec<_> = required.iter().filter(|v| !given(**v)).map(|v| v.name()).collect();
        if !missing.is_empty() {
            return Err(Error::Spec(format!("missing values for {}", missing.join(", "))));
        }
        self.tolerances.to_detector()?;
        if self.jobs == Some(0) {
            return Err(Error::Spec("jobs must be at least 1".into()));
        }
        Ok(Plan {
            preset,
            axes,
            fixed,
            family,
            tolerances: self.tolerances,
        })
    }
}

impl Plan {
    /// Every grid point in row-major order, the first axis varying slowest.
    pub fn points(&self) -> Result<Vec<BTreeMap<Variable, f64>>> {
        let grids = self.axes.iter().map(Axis::values).collect::<Result<Vec<_>>>()?;
        let total: usize = grids.iter().map(Vec::len).product();
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut point = self.fixed.clone();
            let mut rest = flat;
            for (axis, grid) in self.axes.iter().zip(&grids).rev() {
                point.insert(axis.variable, grid[rest % grid.len()]);
                rest /= grid.len();
            }
            points.push(point);
        }
        Ok(points)
    }
}

/// Built-in figure grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

/// Resolution of every preset axis.
pub const PRESET_RESOLUTION: usize = 60;

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig1, Preset::Fig2, Preset::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn spec(self) -> SweepSpec {
        let n = PRESET_RESOLUTION;
        let (axes, fixed) = match self {
            Preset::Fig1 => (
                vec![
                    Axis::log(Variable::Omega, 0.01, 10.0, n),
                    Axis::log(Variable::DA, 0.01, 20.0, n),
                ],
                vec![
                    (Variable::AdsLength, 10.0),
                    (Variable::Mass, 0.01),
                    (Variable::DAB, 7.0),
                    (Variable::Zeta, 1.0),
                ],
            ),
            // One extra point puts T = 1 and γ = 0.1 on the grid.
            Preset::Fig2 | Preset::Fig3 => (
                vec![
                    Axis::log(Variable::TA, 0.01, 100.0, n + 1),
                    Axis::log(Variable::GammaA, 0.01, 100.0, n + 1),
                ],
                vec![
                    (Variable::AdsLength, 10.0),
                    (Variable::Omega, 1.0),
                    (Variable::DAB, 7.0),
                    (Variable::Zeta, 1.0),
                ],
            ),
        };
        SweepSpec {
            preset: Some(self.name().to_string()),
            axes,
            fixed: fixed.into_iter().collect(),
            ..SweepSpec::default()
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
