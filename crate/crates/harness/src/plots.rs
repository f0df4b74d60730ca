//! Standard run figures rendered to SVG: vertical contact forces, bump
//! sensor gaps, and planned-vs-commanded ankle angles (pitch and roll).
//!
//! An optional overlay run draws the same channels from a second telemetry
//! file; legends then tag each run by whether its proximity layer was on.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use plotters::prelude::*;

use crate::telemetry::CsvDoc;

struct SeriesSpec {
    column: &'static str,
    label: &'static str,
}

struct FigureSpec {
    file: &'static str,
    title: &'static str,
    y_label: &'static str,
    series: &'static [SeriesSpec],
}

const FIGURES: [FigureSpec; 4] = [
    FigureSpec {
        file: "forces.svg",
        title: "vertical contact force",
        y_label: "force (N)",
        series: &[
            SeriesSpec {
                column: "l_fz",
                label: "left",
            },
            SeriesSpec {
                column: "r_fz",
                label: "right",
            },
        ],
    },
    FigureSpec {
        file: "bump_distances.svg",
        title: "bump sensor average gap",
        y_label: "gap (m)",
        series: &[
            SeriesSpec {
                column: "l_d_avg",
                label: "left",
            },
            SeriesSpec {
                column: "r_d_avg",
                label: "right",
            },
        ],
    },
    FigureSpec {
        file: "ankle_pitch.svg",
        title: "ankle pitch: planned vs commanded",
        y_label: "pitch (rad)",
        series: &[
            SeriesSpec {
                column: "l_pitch_des",
                label: "left planned",
            },
            SeriesSpec {
                column: "l_pitch_cmd",
                label: "left commanded",
            },
            SeriesSpec {
                column: "r_pitch_des",
                label: "right planned",
            },
            SeriesSpec {
                column: "r_pitch_cmd",
                label: "right commanded",
            },
        ],
    },
    FigureSpec {
        file: "ankle_roll.svg",
        title: "ankle roll: planned vs commanded",
        y_label: "roll (rad)",
        series: &[
            SeriesSpec {
                column: "l_roll_des",
                label: "left planned",
            },
            SeriesSpec {
                column: "l_roll_cmd",
                label: "left commanded",
            },
            SeriesSpec {
                column: "r_roll_des",
                label: "right planned",
            },
            SeriesSpec {
                column: "r_roll_cmd",
                label: "right commanded",
            },
        ],
    },
];

const SERIES_COLORS: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
    RGBColor(140, 86, 75),
    RGBColor(127, 127, 127),
];

fn layer_tag(doc: &CsvDoc) -> &'static str {
    if doc.header.bump_enabled() {
        "on"
    } else {
        "off"
    }
}

fn series_points(doc: &CsvDoc, column: &str) -> Result<Vec<(f64, f64)>> {
    let t = doc.col("t")?;
    let c = doc.col(column)?;
    Ok(doc.rows.iter().map(|r| (r[t], r[c])).collect())
}

/// Render the standard figures for a run, optionally overlaying a second run.
/// Returns the paths written.
pub fn emit_plots(doc: &CsvDoc, overlay: Option<&CsvDoc>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if doc.rows.is_empty() {
        bail!("no samples in telemetry file");
    }
    if let Some(o) = overlay {
        if o.rows.is_empty() {
            bail!("no samples in overlay telemetry file");
        }
    }
    std::fs::create_dir_all(out_dir)?;

    let mut written = Vec::new();
    for fig in &FIGURES {
        // label -> points, base run first, overlay (if any) after
        let mut traces: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for spec in fig.series {
            let label = match overlay {
                Some(_) => format!("{} ({})", spec.label, layer_tag(doc)),
                None => spec.label.to_string(),
            };
            traces.push((label, series_points(doc, spec.column)?));
        }
        if let Some(o) = overlay {
            for spec in fig.series {
                let label = format!("{} ({})", spec.label, layer_tag(o));
                traces.push((label, series_points(o, spec.column)?));
            }
        }

        let path = out_dir.join(fig.file);
        draw_figure(&path, fig, &traces)?;
        written.push(path);
    }
    Ok(written)
}

fn draw_figure(path: &Path, fig: &FigureSpec, traces: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, pts) in traces {
        for (x, y) in pts {
            x_min = x_min.min(*x);
            x_max = x_max.max(*x);
            y_min = y_min.min(*y);
            y_max = y_max.max(*y);
        }
    }
    // keep degenerate (constant) channels drawable
    if x_max <= x_min {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let y_pad = (0.05 * (y_max - y_min)).max(1e-3);
    y_min -= y_pad;
    y_max += y_pad;

    let root = SVGBackend::new(path, (1100, 650)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| anyhow!("plot: {e}"))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(fig.title, ("sans-serif", 24))
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(64)
        .build_cartesian_2d(x_min..x_max, y_min..y_max)
        .map_err(|e| anyhow!("plot: {e}"))?;
    chart
        .configure_mesh()
        .x_desc("time (s)")
        .y_desc(fig.y_label)
        .draw()
        .map_err(|e| anyhow!("plot: {e}"))?;

    for (i, (label, pts)) in traces.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), &color))
            .map_err(|e| anyhow!("plot: {e}"))?
            .label(label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(RGBColor(120, 120, 120))
        .draw()
        .map_err(|e| anyhow!("plot: {e}"))?;
    root.present().map_err(|e| anyhow!("plot: {e}"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::run_to_writer;
    use crate::scenario::apply_scenario;
    use crate::telemetry::parse_csv;
    use biped_core::config::{parse_raw, resolve};

    fn run_doc(text: &str) -> CsvDoc {
        let mut raw = parse_raw(text).unwrap();
        apply_scenario(&mut raw).unwrap();
        let config = resolve(raw).unwrap();
        let mut buf = Vec::new();
        run_to_writer(&config, &mut buf).unwrap();
        parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap()
    }

    #[test]
    fn emits_the_four_standard_figures() {
        let doc = run_doc("scenario = \"step_in_place\"\n[gait]\nn_steps = 1\n[run]\ntail_time = 0.1");
        let dir = tempfile::tempdir().unwrap();
        let written = emit_plots(&doc, None, dir.path()).unwrap();
        assert_eq!(written.len(), 4);
        for path in written {
            let text = std::fs::read_to_string(&path).unwrap();
            assert!(text.contains("<svg"), "{} is not svg", path.display());
            assert!(text.contains("polyline"), "{} has no series", path.display());
        }
    }

    #[test]
    fn overlay_legends_carry_the_layer_tags() {
        let doc_on = run_doc("scenario = \"step_in_place\"\n[gait]\nn_steps = 1\n[run]\ntail_time = 0.1");
        let mut doc_off = doc_on.clone();
        doc_off.header.layers = doc_on.header.layers.replace("bump:on", "bump:off");
        let dir = tempfile::tempdir().unwrap();
        emit_plots(&doc_on, Some(&doc_off), dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("forces.svg")).unwrap();
        assert!(text.contains("left (on)"), "missing on-legend");
        assert!(text.contains("left (off)"), "missing off-legend");
    }

    #[test]
    fn empty_telemetry_is_rejected() {
        let mut doc = run_doc("scenario = \"step_in_place\"\n[gait]\nn_steps = 1\n[run]\ntail_time = 0.1");
        doc.rows.clear();
        let dir = tempfile::tempdir().unwrap();
        let err = emit_plots(&doc, None, dir.path()).unwrap_err();
        assert!(err.to_string().contains("no samples"));
    }
}
