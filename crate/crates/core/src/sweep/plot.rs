use std::fmt::Write;

use super::spec::Preset;
use super::ResultRow;

enum Panel {
    Surface {
        x: &'static str,
        y: &'static str,
        z: &'static str,
    },
    /// Curves of `columns` against `x`, one group per fixed value of `by`.
    Slices {
        x: &'static str,
        by: &'static str,
        targets: &'static [f64],
        columns: &'static [&'static str],
        ylabel: &'static str,
    },
}

fn column(row: &ResultRow, name: &str) -> Option<f64> {
    match name {
        "omega" => row.omega,
        "d_a" => row.d_a,
        "t_a" => row.t_a,
        "gamma_a" => row.gamma_a,
        _ => None,
    }
}

/// Grid value of `name` closest to `target` on a log scale.
fn nearest(rows: &[ResultRow], name: &str, target: f64) -> Option<f64> {
    rows.iter()
        .filter_map(|r| column(r, name))
        .filter(|v| *v > 0.0)
        .min_by(|a, b| {
            let da = (a / target).ln().abs();
            let db = (b / target).ln().abs();
            da.total_cmp(&db)
        })
}

fn label(name: &str) -> &str {
    match name {
        "omega" => "Ωσ",
        "d_a" => "d_A/σ",
        "t_a" => "T_Aσ",
        "gamma_a" => "γ_A",
        "I_AB" => "I_AB/λ̃²",
        other => other,
    }
}

fn layout(preset: Preset) -> (usize, usize, Vec<Panel>) {
    match preset {
        Preset::Fig1 => (
            1,
            3,
            vec![
                Panel::Surface {
                    x: "omega",
                    y: "d_a",
                    z: "I_AB",
                },
                Panel::Slices {
                    x: "omega",
                    by: "d_a",
                    targets: &[10.0, 1.0, 0.1],
                    columns: &["I_AB"],
                    ylabel: "I_AB/λ̃²",
                },
                Panel::Slices {
                    x: "d_a",
                    by: "omega",
                    targets: &[1.0, 0.5, 0.1],
                    columns: &["I_AB"],
                    ylabel: "I_AB/λ̃²",
                },
            ],
        ),
        Preset::Fig2 => (
            2,
            2,
            vec![
                Panel::Slices {
                    x: "gamma_a",
                    by: "t_a",
                    targets: &[1.0],
                    columns: &["L_AA_n0", "L_AA_btz", "L_AA"],
                    ylabel: "L_AA/λ̃²",
                },
                Panel::Slices {
                    x: "t_a",
                    by: "gamma_a",
                    targets: &[0.1],
                    columns: &["L_AA_n0", "L_AA_btz", "L_AA"],
                    ylabel: "L_AA/λ̃²",
                },
                Panel::Slices {
                    x: "gamma_a",
                    by: "t_a",
                    targets: &[1.0],
                    columns: &["L_AB_n0_re", "L_AB_btz_re", "L_AB_re"],
                    ylabel: "Re L_AB/λ̃²",
                },
                Panel::Slices {
                    x: "t_a",
                    by: "gamma_a",
                    targets: &[0.1],
                    columns: &["L_AB_n0_re", "L_AB_btz_re", "L_AB_re"],
                    ylabel: "Re L_AB/λ̃²",
                },
            ],
        ),
        Preset::Fig3 => (
            1,
            3,
            vec![
                Panel::Surface {
                    x: "t_a",
                    y: "gamma_a",
                    z: "I_AB",
                },
                Panel::Slices {
                    x: "t_a",
                    by: "gamma_a",
                    targets: &[0.01, 0.1, 1.0, 10.0, 100.0],
                    columns: &["I_AB"],
                    ylabel: "I_AB/λ̃²",
                },
                Panel::Slices {
                    x: "gamma_a",
                    by: "t_a",
                    targets: &[0.01, 0.1, 1.0, 10.0, 100.0],
                    columns: &["I_AB"],
                    ylabel: "I_AB/λ̃²",
                },
            ],
        ),
    }
}

/// A gnuplot script drawing the preset's figure from `csv`, a path relative
/// to the script. Slices use the grid values nearest to the nominal ones.
pub fn emit_plot_script(rows: &[ResultRow], preset: Preset, csv: &str) -> String {
    let (nrows, ncols, panels) = layout(preset);
    let mut s = String::new();
    let _ = writeln!(s, "# {preset}: generated by harvest {}", super::VERSION);
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set datafile missing \"\"\n");
    s.push_str("set encoding utf8\n");
    let _ = writeln!(s, "set terminal pngcairo size {},{} enhanced", 600 * ncols, 480 * nrows);
    let _ = writeln!(s, "set output \"{preset}.png\"");
    let _ = writeln!(s, "data = \"{csv}\"");
    if rows.iter().all(|r| !r.is_ok()) {
        s.push_str("# no data\n");
        return s;
    }
    let _ = writeln!(s, "set multiplot layout {nrows},{ncols}");
    for panel in panels {
        s.push_str("reset session\nset datafile separator \",\"\nset key autotitle columnhead\n");
        match panel {
            Panel::Surface { x, y, z } => {
                let _ = writeln!(
                    s,
                    "set logscale xy\nset xlabel \"{}\"\nset ylabel \"{}\"\nset zlabel \"{}\" rotate",
                    label(x),
                    label(y),
                    label(z)
                );
                let _ = writeln!(
                    s,
                    "splot data using (column(\"{x}\")):(column(\"{y}\")):(column(\"{z}\")) with points palette pointtype 5 pointsize 0.4 notitle"
                );
            }
            Panel::Slices {
                x,
                by,
                targets,
                columns,
                ylabel,
            } => {
                let _ = writeln!(
                    s,
                    "set logscale x\nset xlabel \"{}\"\nset ylabel \"{ylabel}\"",
                    label(x)
                );
                let mut curves = Vec::new();
                for &target in targets {
                    let Some(value) = nearest(rows, by, target) else {
                        continue;
                    };
                    for col in columns {
                        curves.push(format!(
                            "data using (column(\"{x}\")):(abs(column(\"{by}\")/{value:?}-1) < 1e-9 ? column(\"{col}\") : 1/0) with lines title \"{col}, {} = {value:.3}\"",
                            label(by)
                        ));
                    }
                }
                let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
            }
        }
    }
    s.push_str("unset multiplot\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(omega: f64, d_a: f64) -> ResultRow {
        ResultRow {
            omega: Some(omega),
            d_a: Some(d_a),
            i_ab: Some(1e-3),
            status: "ok".into(),
            ..ResultRow::default()
        }
    }

    #[test]
    fn empty_table_has_no_plots() {
        let s = emit_plot_script(&[], Preset::Fig1, "fig1.csv");
        assert!(!s.contains("plot "));
        assert!(s.contains("data = \"fig1.csv\""));
    }

    #[test]
    fn fig1_has_surface_and_slices() {
        let rows: Vec<_> = [0.1, 0.5, 1.0]
            .iter()
            .flat_map(|&o| [0.09, 1.1, 9.5].map(move |d| row(o, d)))
            .collect();
        let s = emit_plot_script(&rows, Preset::Fig1, "fig1.csv");
        assert_eq!(s.matches("splot ").count(), 1);
        assert_eq!(s.matches("\nplot ").count(), 2);
        assert!(s.contains("column(\"d_a\")/9.5-1"));
        assert!(s.contains("column(\"omega\")/0.5-1"));
        assert!(s.contains("set multiplot layout 1,3"));
    }

    #[test]
    fn fig2_compares_rindler_and_btz() {
        let rows = vec![ResultRow {
            t_a: Some(1.0),
            gamma_a: Some(0.1),
            status: "ok".into(),
            ..ResultRow::default()
        }];
        let s = emit_plot_script(&rows, Preset::Fig2, "fig2.csv");
        assert!(s.contains("L_AA_n0") && s.contains("L_AA_btz") && s.contains("L_AB_btz_re"));
        assert!(s.contains("set multiplot layout 2,2"));
    }
}
