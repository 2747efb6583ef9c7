//! Parameter sweeps over the figure axes.
//!
//! A [`SweepSpec`] expands into a grid of points which are evaluated on a
//! worker pool and collected in grid order. Each row records every
//! representation of the inputs, the three matrix elements split into their
//! `n = 0` and `n ≠ 0` parts, the mutual information and error estimates.
//! Failed points keep their row and report the error in `status`.

mod cache;
mod plot;
mod spec;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::correlations::{anti_hawking_strong, anti_hawking_weak, edr_temperature, mutual_information};
use crate::detector::{compute_elements, compute_l_dd, DetectorPair, Tolerances};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Placement, Spacetime};

pub use cache::{Cache, CACHE_ENV};
pub use plot::emit_plot_script;
pub use spec::{
    Axis, Family, Grid, OutputFormat, OutputSpec, Plan, Preset, SweepSpec, SweepTolerances, Variable, PRESET_RESOLUTION,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One evaluated grid point. Field names are the CSV column names.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultRow {
    pub ads_length: Option<f64>,
    pub mass: Option<f64>,
    pub r_h: Option<f64>,
    pub zeta: Option<f64>,
    pub omega: Option<f64>,
    pub d_a: Option<f64>,
    pub d_ab: Option<f64>,
    pub t_a: Option<f64>,
    pub gamma_a: Option<f64>,
    pub r_a: Option<f64>,
    pub r_b: Option<f64>,
    pub d_b: Option<f64>,
    pub gamma_b: Option<f64>,
    pub t_b: Option<f64>,
    #[serde(rename = "L_AA")]
    pub l_aa: Option<f64>,
    #[serde(rename = "L_AA_n0")]
    pub l_aa_n0: Option<f64>,
    #[serde(rename = "L_AA_btz")]
    pub l_aa_btz: Option<f64>,
    #[serde(rename = "L_BB")]
    pub l_bb: Option<f64>,
    #[serde(rename = "L_BB_n0")]
    pub l_bb_n0: Option<f64>,
    #[serde(rename = "L_BB_btz")]
    pub l_bb_btz: Option<f64>,
    #[serde(rename = "L_AB_re")]
    pub l_ab_re: Option<f64>,
    #[serde(rename = "L_AB_im")]
    pub l_ab_im: Option<f64>,
    #[serde(rename = "L_AB_n0_re")]
    pub l_ab_n0_re: Option<f64>,
    #[serde(rename = "L_AB_n0_im")]
    pub l_ab_n0_im: Option<f64>,
    #[serde(rename = "L_AB_btz_re")]
    pub l_ab_btz_re: Option<f64>,
    #[serde(rename = "L_AB_btz_im")]
    pub l_ab_btz_im: Option<f64>,
    #[serde(rename = "I_AB")]
    pub i_ab: Option<f64>,
    #[serde(rename = "T_EDR_A")]
    pub t_edr_a: Option<f64>,
    #[serde(rename = "err_L_AA")]
    pub err_l_aa: Option<f64>,
    #[serde(rename = "err_L_BB")]
    pub err_l_bb: Option<f64>,
    #[serde(rename = "err_L_AB")]
    pub err_l_ab: Option<f64>,
    #[serde(rename = "err_I_AB")]
    pub err_i_ab: Option<f64>,
    #[serde(rename = "err_T_EDR_A")]
    pub err_t_edr_a: Option<f64>,
    /// Largest `|n|` used by any element.
    pub n_terms: Option<u32>,
    pub cauchy_schwarz: Option<bool>,
    /// Set along a `t_a` axis where `L_AA` falls as `T_A` rises.
    pub weak_anti_hawking: Option<bool>,
    /// Set along a `t_a` axis where `T_EDR_A` falls as `T_A` rises.
    pub strong_anti_hawking: Option<bool>,
    pub status: String,
}

/// CSV header, in column order.
pub const COLUMNS: [&str; 38] = [
    "ads_length",
    "mass",
    "r_h",
    "zeta",
    "omega",
    "d_a",
    "d_ab",
    "t_a",
    "gamma_a",
    "r_a",
    "r_b",
    "d_b",
    "gamma_b",
    "t_b",
    "L_AA",
    "L_AA_n0",
    "L_AA_btz",
    "L_BB",
    "L_BB_n0",
    "L_BB_btz",
    "L_AB_re",
    "L_AB_im",
    "L_AB_n0_re",
    "L_AB_n0_im",
    "L_AB_btz_re",
    "L_AB_btz_im",
    "I_AB",
    "T_EDR_A",
    "err_L_AA",
    "err_L_BB",
    "err_L_AB",
    "err_I_AB",
    "err_T_EDR_A",
    "n_terms",
    "cauchy_schwarz",
    "weak_anti_hawking",
    "strong_anti_hawking",
    "status",
];

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

fn required(point: &BTreeMap<Variable, f64>, var: Variable) -> Result<f64> {
    point
        .get(&var)
        .copied()
        .ok_or_else(|| Error::Spec(format!("point has no value for `{var}`")))
}

/// Background and detector A for a grid point.
pub fn resolve_point(point: &BTreeMap<Variable, f64>) -> Result<(Spacetime, Placement)> {
    let l = required(point, Variable::AdsLength)?;
    let zeta = required(point, Variable::Zeta)?;
    if zeta.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("zeta must be -1, 0 or 1, got {zeta}")));
    }
    let boundary = BoundaryCondition::from_zeta(zeta as i32)?;
    if point.contains_key(&Variable::TA) || point.contains_key(&Variable::GammaA) {
        let t = required(point, Variable::TA)?;
        let gamma = required(point, Variable::GammaA)?;
        Placement::thermal_family(l, t, gamma, boundary)
    } else {
        let st = Spacetime::new(l, required(point, Variable::Mass)?, boundary)?;
        let a = Placement::HorizonDistance(required(point, Variable::DA)?);
        a.validate(&st)?;
        Ok((st, a))
    }
}

fn fill_geometry(row: &mut ResultRow, point: &BTreeMap<Variable, f64>) -> Result<DetectorPair> {
    let (st, a) = resolve_point(point)?;
    row.ads_length = Some(st.ads_length());
    row.mass = Some(st.mass());
    row.r_h = Some(st.horizon_radius());
    row.zeta = Some(st.zeta());
    row.d_a = Some(a.horizon_distance(&st));
    row.r_a = Some(a.radius(&st));
    row.gamma_a = Some(a.redshift(&st));
    row.t_a = Some(a.local_temperature(&st)?);
    let gap = required(point, Variable::Omega)?;
    let separation = required(point, Variable::DAB)?;
    row.omega = Some(gap);
    row.d_ab = Some(separation);
    let pair = DetectorPair::with_separation(st, a, separation, gap)?;
    row.d_b = Some(pair.b.horizon_distance(&st));
    row.r_b = Some(pair.b.radius(&st));
    row.gamma_b = Some(pair.b.redshift(&st));
    row.t_b = Some(pair.b.local_temperature(&st)?);
    Ok(pair)
}

fn fill_elements(row: &mut ResultRow, pair: &DetectorPair, tol: &Tolerances) -> Result<()> {
    let elements = compute_elements(pair, tol)?;
    let mi = mutual_information(&elements)?;
    let (aa, bb, ab) = (&elements.l_aa, &elements.l_bb, &elements.l_ab);
    row.l_aa = Some(aa.value);
    row.l_aa_n0 = Some(aa.rindler);
    row.l_aa_btz = Some(aa.btz);
    row.l_bb = Some(bb.value);
    row.l_bb_n0 = Some(bb.rindler);
    row.l_bb_btz = Some(bb.btz);
    row.l_ab_re = Some(ab.value.re);
    row.l_ab_im = Some(ab.value.im);
    row.l_ab_n0_re = Some(ab.rindler.re);
    row.l_ab_n0_im = Some(ab.rindler.im);
    row.l_ab_btz_re = Some(ab.btz.re);
    row.l_ab_btz_im = Some(ab.btz.im);
    row.i_ab = Some(mi.mutual_information);
    row.err_l_aa = Some(aa.error);
    row.err_l_bb = Some(bb.error);
    row.err_l_ab = Some(ab.error);
    row.err_i_ab = Some(mi.mutual_information_error);
    row.cauchy_schwarz = Some(elements.satisfies_cauchy_schwarz());

    let down = compute_l_dd(&pair.spacetime, &pair.a, -pair.gap, tol)?;
    row.n_terms = Some(elements.max_image().max(down.max_image));
    if let Ok(t) = edr_temperature(aa.value, down.value, pair.gap) {
        row.t_edr_a = Some(t);
        row.err_t_edr_a = Some(t * t / pair.gap.abs() * (aa.error / aa.value + down.error / down.value));
    }
    Ok(())
}

/// Evaluate one grid point; errors are recorded in the row.
pub fn evaluate_point(point: &BTreeMap<Variable, f64>, tol: &Tolerances) -> ResultRow {
    let mut row = ResultRow {
        status: "ok".into(),
        ..ResultRow::default()
    };
    let outcome = fill_geometry(&mut row, point).and_then(|pair| fill_elements(&mut row, &pair, tol));
    if let Err(e) = outcome {
        row.status = e.to_string();
    }
    row
}

/// Provenance of a sweep's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    pub spec_sha256: String,
    pub preset: Option<Preset>,
    pub family: Family,
    pub axes: Vec<Axis>,
    pub fixed: BTreeMap<Variable, f64>,
    pub tolerances: SweepTolerances,
    pub columns: Vec<String>,
    pub rows: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub plan: Plan,
    pub rows: Vec<ResultRow>,
    pub manifest: Manifest,
    pub cache: CacheStats,
}

/// Overrides applied on top of the spec.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub jobs: Option<usize>,
    pub cache: Option<Cache>,
}

fn plan_hash(plan: &Plan) -> String {
    let bytes = serde_json::to_vec(plan).expect("plan serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Evaluate every grid point of `spec`.
pub fn run_sweep(spec: &SweepSpec, options: &RunOptions) -> Result<SweepOutput> {
    let plan = spec.resolve()?;
    let tol = plan.tolerances.to_detector()?;
    let points = plan.points()?;
    let jobs = options.jobs.or(spec.jobs).unwrap_or_else(rayon::current_num_threads);
    if jobs == 0 {
        return Err(Error::Spec("jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Spec(e.to_string()))?;

    let cache = options.cache.as_ref();
    let evaluated: Vec<(ResultRow, bool)> = pool.install(|| {
        points
            .par_iter()
            .map(|point| {
                let key = cache.map(|_| Cache::key(point, &plan.tolerances));
                if let (Some(c), Some(k)) = (cache, key.as_deref()) {
                    if let Some(row) = c.lookup(k) {
                        return (row, true);
                    }
                }
                let row = evaluate_point(point, &tol);
                if let (Some(c), Some(k)) = (cache, key.as_deref()) {
                    if row.is_ok() {
                        if let Err(e) = c.store(k, &row) {
                            log::warn!("could not write cache entry {k}: {e}");
                        }
                    }
                }
                (row, false)
            })
            .collect()
    });
    let hits = evaluated.iter().filter(|(_, hit)| *hit).count();
    let mut rows: Vec<ResultRow> = evaluated.into_iter().map(|(row, _)| row).collect();
    mark_anti_hawking(&plan, &mut rows);

    let manifest = Manifest {
        software: "harvest".into(),
        version: VERSION.into(),
        spec_sha256: plan_hash(&plan),
        preset: plan.preset,
        family: plan.family,
        axes: plan.axes.clone(),
        fixed: plan.fixed.clone(),
        tolerances: plan.tolerances,
        columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
        rows: rows.len(),
        failures: rows.iter().filter(|r| !r.is_ok()).count(),
    };
    Ok(SweepOutput {
        plan,
        rows,
        manifest,
        cache: CacheStats {
            hits,
            misses: points.len() - hits,
        },
    })
}

/// Flag rows on each `t_a` line where `L_AA` or `T_EDR_A` decreases.
fn mark_anti_hawking(plan: &Plan, rows: &mut [ResultRow]) {
    let Some(k) = plan.axes.iter().position(|a| a.variable == Variable::TA) else {
        return;
    };
    let sizes: Vec<usize> = plan.axes.iter().map(|a| a.count).collect();
    let stride: usize = sizes[k + 1..].iter().product();
    let count = sizes[k];
    let outer = rows.len() / (stride * count);
    for hi in 0..outer {
        for lo in 0..stride {
            let line: Vec<usize> = (0..count).map(|i| (hi * count + i) * stride + lo).collect();
            mark_line(rows, &line);
        }
    }
}

type Series = (Vec<f64>, Vec<f64>, Vec<f64>);

fn series(rows: &[ResultRow], line: &[usize], pick: fn(&ResultRow) -> Option<(f64, f64, f64)>) -> Option<Series> {
    let mut out: Series = (Vec::new(), Vec::new(), Vec::new());
    for &i in line {
        let (x, y, e) = pick(&rows[i])?;
        out.0.push(x);
        out.1.push(y);
        out.2.push(e);
    }
    Some(out)
}

fn flag(rows: &mut [ResultRow], line: &[usize], intervals: &[(f64, f64)], set: fn(&mut ResultRow, bool)) {
    for &i in line {
        let t = rows[i].t_a.unwrap_or(f64::NAN);
        set(&mut rows[i], intervals.iter().any(|&(lo, hi)| t >= lo && t <= hi));
    }
}

fn mark_line(rows: &mut [ResultRow], line: &[usize]) {
    if let Some((t, y, e)) = series(rows, line, |r| Some((r.t_a?, r.l_aa?, r.err_l_aa?))) {
        if let Ok(found) = anti_hawking_weak(&t, &y, &e) {
            flag(rows, line, &found.intervals, |r, v| r.weak_anti_hawking = Some(v));
        }
    }
    if let Some((t, y, e)) = series(rows, line, |r| Some((r.t_a?, r.t_edr_a?, r.err_t_edr_a?))) {
        if let Ok(found) = anti_hawking_strong(&t, &y, &e) {
            flag(rows, line, &found.intervals, |r, v| r.strong_anti_hawking = Some(v));
        }
    }
}

/// Write rows as CSV: fixed header, shortest round-trip floats, LF endings.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    writer.write_record(COLUMNS).map_err(io)?;
    for row in rows {
        writer.serialize(row).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Path of the manifest written next to a table.
pub fn manifest_path(table: &Path) -> PathBuf {
    let stem = table.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    table.with_file_name(format!("{stem}.manifest.json"))
}

/// Write the table and its manifest.
pub fn write_output(output: &SweepOutput, path: &Path, format: OutputFormat) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(&output.rows, file)?,
        OutputFormat::Json => write_json(&output.rows, file)?,
    }
    let mut manifest = serde_json::to_string_pretty(&output.manifest).map_err(|e| Error::Io(e.to_string()))?;
    manifest.push('\n');
    fs::write(manifest_path(path), manifest)?;
    Ok(())
}
