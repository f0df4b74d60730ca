//! Run metrics, recomputed from the telemetry CSV alone.
//!
//! Every quantity here is derived from parsed telemetry — no access to the
//! live simulation — so the emitted metrics file can always be reproduced
//! from the CSV it sits next to.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use crate::telemetry::CsvDoc;

/// Contact threshold (N) for touchdown detection: the first force sample at
/// or above this level in the descending half of a swing marks touchdown.
pub const TOUCHDOWN_FORCE: f64 = 5.0;

/// Window (s) after touchdown over which the landing peak and impulse are
/// taken.
pub const TOUCHDOWN_WINDOW: f64 = 0.05;

/// Sole-ground pitch alignment tolerance (degrees) used for settle timing.
pub const SETTLE_PITCH_TOLERANCE_DEG: f64 = 2.0;

/// Per-step landing and adaptation summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    /// Swing side of this step: "left" or "right".
    pub side: String,
    /// Time of the first contact-force sample in the descending half of the
    /// swing (None if the landing never registered).
    pub touchdown_t: Option<f64>,
    /// Largest substep vertical force on the landing foot within the
    /// touchdown window (N).
    pub peak_touchdown_force: Option<f64>,
    /// Integral of the landing foot's vertical force over the touchdown
    /// window (N s).
    pub touchdown_impulse: Option<f64>,
    /// Largest |height shift| of the force-difference layer during the step.
    pub max_height_shift: f64,
    /// Largest |proximity height offset| of the swing foot during the step.
    pub max_proximity_offset: f64,
    /// Largest |ankle angle offset| of the landing foot after touchdown.
    pub max_ankle_offset: f64,
    /// Whether the foot landed with all contact corners over raised terrain.
    pub landed_on_patch: bool,
    /// Time of full patch contact: foot loaded and entirely over the patch.
    pub full_contact_t: Option<f64>,
    /// Seconds from full contact until the estimated sole-ground pitch stays
    /// below the alignment tolerance for the rest of the stance.
    pub pitch_settle_time: Option<f64>,
}

/// Whole-run metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    pub scenario: String,
    pub control_rate: f64,
    pub samples: usize,
    pub steps: Vec<StepMetrics>,
    /// Mean forward CoM speed (m/s) between the single-support starts of the
    /// third and final steps; None when fewer than four steps registered.
    pub mean_forward_speed: Option<f64>,
    /// RMS distance between measured and planned ZMP over samples with a
    /// fresh measurement (m).
    pub zmp_tracking_rms: Option<f64>,
}

/// Column handles used repeatedly while scanning rows.
struct Cols {
    t: usize,
    phase_mode: usize,
    phase_s: usize,
    step_index: usize,
    zmp_ref: [usize; 2],
    zmp_meas: [usize; 2],
    zmp_valid: usize,
    com_act_x: usize,
    dz: usize,
    du: [usize; 2],
    dtheta: [[usize; 2]; 2],
    alpha_pitch: [usize; 2],
    fz: [usize; 2],
    fz_peak: [usize; 2],
    on_patch: [usize; 2],
}

impl Cols {
    fn resolve(doc: &CsvDoc) -> Result<Cols> {
        let foot = |name: &str| -> Result<[usize; 2]> {
            Ok([doc.col(&format!("l_{name}"))?, doc.col(&format!("r_{name}"))?])
        };
        Ok(Cols {
            t: doc.col("t")?,
            phase_mode: doc.col("phase_mode")?,
            phase_s: doc.col("phase_s")?,
            step_index: doc.col("step_index")?,
            zmp_ref: [doc.col("zmp_ref_x")?, doc.col("zmp_ref_y")?],
            zmp_meas: [doc.col("zmp_meas_x")?, doc.col("zmp_meas_y")?],
            zmp_valid: doc.col("zmp_valid")?,
            com_act_x: doc.col("com_act_x")?,
            dz: doc.col("dz")?,
            du: foot("du")?,
            dtheta: [
                [doc.col("l_dtheta_pitch")?, doc.col("l_dtheta_roll")?],
                [doc.col("r_dtheta_pitch")?, doc.col("r_dtheta_roll")?],
            ],
            alpha_pitch: foot("alpha_pitch")?,
            fz: foot("fz")?,
            fz_peak: foot("fz_peak")?,
            on_patch: foot("on_patch")?,
        })
    }
}

/// A contiguous single-support span of rows.
#[derive(Debug, Clone, Copy)]
struct SwingSpan {
    step: usize,
    /// 0 = left foot swings, 1 = right foot swings.
    swing: usize,
    start: usize,
    /// First row after the span (start of the trailing double support).
    end: usize,
}

fn swing_spans(doc: &CsvDoc, c: &Cols) -> Vec<SwingSpan> {
    let mut spans = Vec::new();
    let mut open: Option<SwingSpan> = None;
    for (i, row) in doc.rows.iter().enumerate() {
        let mode = row[c.phase_mode] as i64;
        if mode == 0 {
            if let Some(mut span) = open.take() {
                span.end = i;
                spans.push(span);
            }
        } else if open.is_none() {
            open = Some(SwingSpan {
                step: row[c.step_index] as usize + 1,
                // mode 1 = left stance (right swings), mode 2 = right stance
                swing: if mode == 1 { 1 } else { 0 },
                start: i,
                end: i,
            });
        }
    }
    if let Some(mut span) = open.take() {
        span.end = doc.rows.len();
        spans.push(span);
    }
    spans
}

/// Compute all metrics from a parsed telemetry file.
pub fn compute_metrics(doc: &CsvDoc) -> Result<RunMetrics> {
    let c = Cols::resolve(doc)?;
    let rows = &doc.rows;
    let dt = doc.dt();
    let window_rows = (TOUCHDOWN_WINDOW * doc.header.control_rate).round() as usize;
    let settle_tol = SETTLE_PITCH_TOLERANCE_DEG.to_radians();
    let spans = swing_spans(doc, &c);

    let mut steps = Vec::with_capacity(spans.len());
    for (si, span) in spans.iter().enumerate() {
        let foot = span.swing;
        let next_start = spans.get(si + 1).map_or(rows.len(), |s| s.start);
        // The same foot swings again two steps later; until then it stands on
        // whatever it landed on.
        let stance_end = spans[si + 1..]
            .iter()
            .find(|s| s.swing == foot)
            .map_or(rows.len(), |s| s.start);

        // Touchdown: first loaded sample once the swing is in its descending
        // half. The force columns lag the physics by one control tick, which
        // shifts every run identically.
        let descent = rows[span.start..span.end]
            .iter()
            .position(|r| r[c.phase_s] >= 0.5)
            .map(|p| span.start + p)
            .unwrap_or(span.end);
        let touchdown = rows[descent..next_start]
            .iter()
            .position(|r| r[c.fz_peak[foot]] >= TOUCHDOWN_FORCE)
            .map(|p| descent + p);

        let (peak, impulse) = match touchdown {
            Some(td) => {
                let end = (td + window_rows).min(rows.len());
                let peak = rows[td..end]
                    .iter()
                    .map(|r| r[c.fz_peak[foot]])
                    .fold(f64::NEG_INFINITY, f64::max);
                let impulse: f64 = rows[td..end].iter().map(|r| r[c.fz[foot]] * dt).sum();
                (Some(peak), Some(impulse))
            }
            None => (None, None),
        };

        let max_abs = |col: usize, lo: usize, hi: usize| {
            rows[lo..hi]
                .iter()
                .map(|r| r[col].abs())
                .fold(0.0_f64, f64::max)
        };
        let max_height_shift = max_abs(c.dz, span.start, next_start);
        let max_proximity_offset = max_abs(c.du[foot], span.start, next_start);
        let max_ankle_offset = max_abs(c.dtheta[foot][0], span.end, next_start)
            .max(max_abs(c.dtheta[foot][1], span.end, next_start));

        // Patch landings: full contact = loaded with every corner over raised
        // terrain; settle = estimated sole-ground pitch stays inside the
        // tolerance for the rest of the stance.
        let full_contact = rows[span.end.min(stance_end)..stance_end]
            .iter()
            .position(|r| r[c.on_patch[foot]] == 1.0 && r[c.fz[foot]] >= TOUCHDOWN_FORCE)
            .map(|p| span.end + p);
        let pitch_settle_time = full_contact.and_then(|fc| {
            let mut settled_from: Option<usize> = None;
            for (off, row) in rows[fc..stance_end].iter().enumerate() {
                if row[c.alpha_pitch[foot]].abs() < settle_tol {
                    settled_from.get_or_insert(fc + off);
                } else {
                    settled_from = None;
                }
            }
            settled_from.map(|i| rows[i][c.t] - rows[fc][c.t])
        });

        steps.push(StepMetrics {
            step: span.step,
            side: if foot == 0 { "left" } else { "right" }.to_string(),
            touchdown_t: touchdown.map(|td| rows[td][c.t]),
            peak_touchdown_force: peak,
            touchdown_impulse: impulse,
            max_height_shift,
            max_proximity_offset,
            max_ankle_offset,
            landed_on_patch: full_contact.is_some(),
            full_contact_t: full_contact.map(|fc| rows[fc][c.t]),
            pitch_settle_time,
        });
    }

    let mean_forward_speed = if spans.len() >= 4 {
        let a = spans[2].start;
        let b = spans[spans.len() - 1].start;
        Some((rows[b][c.com_act_x] - rows[a][c.com_act_x]) / (rows[b][c.t] - rows[a][c.t]))
    } else {
        None
    };

    let mut sq_sum = 0.0;
    let mut n_valid = 0usize;
    for row in rows {
        if row[c.zmp_valid] == 1.0 {
            let dx = row[c.zmp_meas[0]] - row[c.zmp_ref[0]];
            let dy = row[c.zmp_meas[1]] - row[c.zmp_ref[1]];
            sq_sum += dx * dx + dy * dy;
            n_valid += 1;
        }
    }
    let zmp_tracking_rms = (n_valid > 0).then(|| (sq_sum / n_valid as f64).sqrt());

    Ok(RunMetrics {
        scenario: doc.header.scenario.clone(),
        control_rate: doc.header.control_rate,
        samples: rows.len(),
        steps,
        mean_forward_speed,
        zmp_tracking_rms,
    })
}

/// One metric compared across two runs; `diff` is `b - a`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricDelta {
    pub a: f64,
    pub b: f64,
    pub diff: f64,
}

impl MetricDelta {
    fn new(a: f64, b: f64) -> MetricDelta {
        MetricDelta { a, b, diff: b - a }
    }

    fn opt(a: Option<f64>, b: Option<f64>) -> Option<MetricDelta> {
        match (a, b) {
            (Some(a), Some(b)) => Some(MetricDelta::new(a, b)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepComparison {
    pub step: usize,
    pub side: String,
    pub peak_touchdown_force: Option<MetricDelta>,
    pub touchdown_impulse: Option<MetricDelta>,
    pub max_height_shift: MetricDelta,
    pub max_proximity_offset: MetricDelta,
    pub max_ankle_offset: MetricDelta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunComparison {
    pub scenario: String,
    pub steps: Vec<StepComparison>,
    pub mean_forward_speed: Option<MetricDelta>,
    pub zmp_tracking_rms: Option<MetricDelta>,
}

/// Compare two parsed telemetry files. Both must carry the same schema and
/// the same scenario id.
pub fn compare_runs(a: &CsvDoc, b: &CsvDoc) -> Result<RunComparison> {
    if a.columns != b.columns {
        let first = a
            .columns
            .iter()
            .zip(&b.columns)
            .position(|(x, y)| x != y)
            .unwrap_or_else(|| a.columns.len().min(b.columns.len()));
        let name = a
            .columns
            .get(first)
            .or_else(|| b.columns.get(first))
            .cloned()
            .unwrap_or_default();
        bail!("telemetry schemas differ: first differing column is `{name}` (index {first})");
    }
    if a.header.scenario != b.header.scenario {
        bail!(
            "schema error: scenario ids differ ({} vs {})",
            a.header.scenario,
            b.header.scenario
        );
    }
    let ma = compute_metrics(a)?;
    let mb = compute_metrics(b)?;
    let steps = ma
        .steps
        .iter()
        .filter_map(|sa| {
            let sb = mb.steps.iter().find(|s| s.step == sa.step)?;
            Some(StepComparison {
                step: sa.step,
                side: sa.side.clone(),
                peak_touchdown_force: MetricDelta::opt(
                    sa.peak_touchdown_force,
                    sb.peak_touchdown_force,
                ),
                touchdown_impulse: MetricDelta::opt(sa.touchdown_impulse, sb.touchdown_impulse),
                max_height_shift: MetricDelta::new(sa.max_height_shift, sb.max_height_shift),
                max_proximity_offset: MetricDelta::new(
                    sa.max_proximity_offset,
                    sb.max_proximity_offset,
                ),
                max_ankle_offset: MetricDelta::new(sa.max_ankle_offset, sb.max_ankle_offset),
            })
        })
        .collect();
    Ok(RunComparison {
        scenario: ma.scenario.clone(),
        steps,
        mean_forward_speed: MetricDelta::opt(ma.mean_forward_speed, mb.mean_forward_speed),
        zmp_tracking_rms: MetricDelta::opt(ma.zmp_tracking_rms, mb.zmp_tracking_rms),
    })
}

fn fmt_delta(d: &Option<MetricDelta>) -> String {
    match d {
        Some(d) => format!("{:>12.4} {:>12.4} {:>+12.4}", d.a, d.b, d.diff),
        None => format!("{:>12} {:>12} {:>12}", "-", "-", "-"),
    }
}

/// Human-readable comparison table.
pub fn render_comparison(cmp: &RunComparison) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario: {}\n", cmp.scenario));
    out.push_str(&format!(
        "{:<6} {:<6} {:<22} {:>12} {:>12} {:>12}\n",
        "step", "side", "metric", "a", "b", "diff"
    ));
    for s in &cmp.steps {
        let rows = [
            ("peak_touchdown_force", fmt_delta(&s.peak_touchdown_force)),
            ("touchdown_impulse", fmt_delta(&s.touchdown_impulse)),
            (
                "max_height_shift",
                fmt_delta(&Some(s.max_height_shift)),
            ),
            (
                "max_proximity_offset",
                fmt_delta(&Some(s.max_proximity_offset)),
            ),
            ("max_ankle_offset", fmt_delta(&Some(s.max_ankle_offset))),
        ];
        for (name, value) in rows {
            out.push_str(&format!(
                "{:<6} {:<6} {:<22} {}\n",
                s.step, s.side, name, value
            ));
        }
    }
    out.push_str(&format!(
        "{:<13} {:<22} {}\n",
        "aggregate",
        "mean_forward_speed",
        fmt_delta(&cmp.mean_forward_speed)
    ));
    out.push_str(&format!(
        "{:<13} {:<22} {}\n",
        "aggregate",
        "zmp_tracking_rms",
        fmt_delta(&cmp.zmp_tracking_rms)
    ));
    out
}
