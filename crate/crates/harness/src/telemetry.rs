//! Tick-level telemetry CSV: versioned header, fixed column dictionary, one
//! row per control tick, and a parser that reads the files back for metrics
//! and plotting.
//!
//! Format (line-feed endings, `{:.9e}` floats, integers bare) is fully
//! deterministic: the same run produces byte-identical files.
//!
//! Column dictionary (per-foot blocks are prefixed `l_` / `r_`):
//! - tick, t: control tick index and time (s)
//! - phase_mode: 0 double support, 1 single support on the left foot,
//!   2 single support on the right foot
//! - phase_s: normalized progress through the current phase
//! - step_index: completed swing count
//! - swing_side: -1 none, 0 left, 1 right
//! - zmp_ref_x/y: planned ZMP; zmp_meas_x/y: measured ZMP as consumed by the
//!   controller this tick (held at the last valid value when airborne);
//!   zmp_valid: 1 when the measurement was fresh
//! - com_des_x/y: planned CoM; com_mod_x/y: CoM command after adaptation;
//!   com_act_x/y/z: realized CoM at the end of the tick
//! - dz: force-layer height shift; com_corr_x/y: integrated CoM correction
//! - per foot: x/y/z_des and pitch/roll_des (planned pose), z/pitch/roll_cmd
//!   (command after adaptation), x/z/pitch/roll_act (realized pose at tick
//!   end), du and dtheta_pitch/roll (adaptation states), d_a..d_d and d_avg
//!   (bump readings consumed this tick), alpha_pitch/roll (sole-ground angle
//!   estimates from those readings), fz_des (distributor target), fz
//!   (tick-averaged vertical force of this tick), fz_peak (largest substep
//!   force within this tick), on_patch (1 when all four contact corners sit
//!   over raised terrain)

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

pub const CSV_VERSION: &str = "v1";

const SHARED_COLUMNS: [&str; 21] = [
    "tick",
    "t",
    "phase_mode",
    "phase_s",
    "step_index",
    "swing_side",
    "zmp_ref_x",
    "zmp_ref_y",
    "zmp_meas_x",
    "zmp_meas_y",
    "zmp_valid",
    "com_des_x",
    "com_des_y",
    "com_mod_x",
    "com_mod_y",
    "com_act_x",
    "com_act_y",
    "com_act_z",
    "dz",
    "com_corr_x",
    "com_corr_y",
];

const FOOT_COLUMNS: [&str; 26] = [
    "x_des",
    "y_des",
    "z_des",
    "pitch_des",
    "roll_des",
    "z_cmd",
    "pitch_cmd",
    "roll_cmd",
    "x_act",
    "z_act",
    "pitch_act",
    "roll_act",
    "du",
    "dtheta_pitch",
    "dtheta_roll",
    "d_a",
    "d_b",
    "d_c",
    "d_d",
    "d_avg",
    "alpha_pitch",
    "alpha_roll",
    "fz_des",
    "fz",
    "fz_peak",
    "on_patch",
];

/// Full ordered column list of the current schema version.
pub fn column_names() -> Vec<String> {
    let mut names: Vec<String> = SHARED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for prefix in ["l", "r"] {
        for col in FOOT_COLUMNS {
            names.push(format!("{prefix}_{col}"));
        }
    }
    names
}

/// Header metadata identifying a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunHeader {
    pub scenario: String,
    pub seed: u64,
    pub control_rate: f64,
    /// Layer enable summary, e.g. "force:on,bump:off,orientation:on,zmp_com:on".
    pub layers: String,
}

impl RunHeader {
    fn to_line(&self) -> String {
        format!(
            "# bipedsim csv {} scenario={} seed={} control_rate={} layers={}",
            CSV_VERSION, self.scenario, self.seed, self.control_rate, self.layers
        )
    }

    /// Whether the bump layer was enabled, for ablation overlay legends.
    pub fn bump_enabled(&self) -> bool {
        self.layers.contains("bump:on")
    }
}

/// Streaming CSV writer; one `write_row` per control tick.
pub struct CsvWriter<W: Write> {
    out: BufWriter<W>,
    n_columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W, header: &RunHeader) -> std::io::Result<CsvWriter<W>> {
        let mut w = BufWriter::new(out);
        writeln!(w, "{}", header.to_line())?;
        let names = column_names();
        writeln!(w, "{}", names.join(","))?;
        Ok(CsvWriter {
            out: w,
            n_columns: names.len(),
        })
    }

    pub fn write_row(&mut self, row: &[Field]) -> std::io::Result<()> {
        debug_assert_eq!(row.len(), self.n_columns);
        let mut line = String::with_capacity(self.n_columns * 16);
        for (i, field) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            match field {
                Field::Int(v) => write!(line, "{v}").unwrap(),
                Field::Float(v) => write!(line, "{v:.9e}").unwrap(),
            }
        }
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

/// One CSV cell: integers print bare, floats in fixed scientific notation.
#[derive(Debug, Clone, Copy)]
pub enum Field {
    Int(i64),
    Float(f64),
}

/// A parsed telemetry file: header, column names, and all rows as f64.
#[derive(Debug, Clone)]
pub struct CsvDoc {
    pub header: RunHeader,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvDoc {
    pub fn load(path: &Path) -> Result<CsvDoc> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading telemetry file {}", path.display()))?;
        parse_csv(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Index of a named column.
    pub fn col(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| anyhow!("telemetry file has no column named {name}"))
    }

    /// All values of a named column.
    pub fn series(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.col(name)?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.header.control_rate
    }
}

fn parse_header_line(line: &str) -> Result<RunHeader> {
    let rest = line
        .strip_prefix("# bipedsim csv ")
        .ok_or_else(|| anyhow!("not a telemetry file: missing '# bipedsim csv' header"))?;
    let mut parts = rest.split_whitespace();
    let version = parts.next().unwrap_or_default();
    if version != CSV_VERSION {
        bail!("unsupported telemetry version {version} (expected {CSV_VERSION})");
    }
    let mut scenario = None;
    let mut seed = None;
    let mut control_rate = None;
    let mut layers = None;
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("malformed header entry {part}"))?;
        match key {
            "scenario" => scenario = Some(value.to_string()),
            "seed" => seed = Some(value.parse::<u64>().context("header seed")?),
            "control_rate" => {
                control_rate = Some(value.parse::<f64>().context("header control_rate")?)
            }
            "layers" => layers = Some(value.to_string()),
            _ => bail!("unknown header entry {key}"),
        }
    }
    Ok(RunHeader {
        scenario: scenario.ok_or_else(|| anyhow!("header missing scenario"))?,
        seed: seed.ok_or_else(|| anyhow!("header missing seed"))?,
        control_rate: control_rate.ok_or_else(|| anyhow!("header missing control_rate"))?,
        layers: layers.ok_or_else(|| anyhow!("header missing layers"))?,
    })
}

pub fn parse_csv(text: &str) -> Result<CsvDoc> {
    let mut lines = text.lines();
    let header = parse_header_line(
        lines
            .next()
            .ok_or_else(|| anyhow!("empty telemetry file"))?,
    )?;
    let columns: Vec<String> = lines
        .next()
        .ok_or_else(|| anyhow!("telemetry file missing column header"))?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(columns.len());
        for cell in line.split(',') {
            row.push(
                cell.parse::<f64>()
                    .with_context(|| format!("row {}: bad number {cell:?}", n + 1))?,
            );
        }
        if row.len() != columns.len() {
            bail!(
                "row {} has {} fields, expected {}",
                n + 1,
                row.len(),
                columns.len()
            );
        }
        rows.push(row);
    }
    Ok(CsvDoc {
        header,
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_header() -> RunHeader {
        RunHeader {
            scenario: "flat_1kmh".to_string(),
            seed: 7,
            control_rate: 200.0,
            layers: "force:on,bump:off,orientation:on,zmp_com:on".to_string(),
        }
    }

    #[test]
    fn writer_and_parser_round_trip() {
        let header = sample_header();
        let mut buf = Vec::new();
        {
            let mut w = CsvWriter::new(&mut buf, &header).unwrap();
            let n = column_names().len();
            let mut row = vec![Field::Float(0.5); n];
            row[0] = Field::Int(3);
            w.write_row(&row).unwrap();
            w.finish().unwrap();
        }
        let doc = parse_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(doc.header, header);
        assert_eq!(doc.columns, column_names());
        assert_eq!(doc.rows.len(), 1);
        assert_eq!(doc.rows[0][0], 3.0);
        assert_eq!(doc.rows[0][1], 0.5);
        assert!(!doc.header.bump_enabled());
    }

    #[test]
    fn float_formatting_is_fixed_width_scientific() {
        let header = sample_header();
        let mut buf = Vec::new();
        {
            let mut w = CsvWriter::new(&mut buf, &header).unwrap();
            let n = column_names().len();
            let mut row = vec![Field::Float(0.0); n];
            row[1] = Field::Float(-1.0 / 3.0);
            w.write_row(&row).unwrap();
            w.finish().unwrap();
        }
        let text = std::str::from_utf8(&buf).unwrap();
        assert!(text.contains("-3.333333333e-1"), "{text}");
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let text = "# bipedsim csv v99 scenario=x seed=0 control_rate=200 layers=a\ntick\n1\n";
        let err = parse_csv(text).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn non_telemetry_files_are_rejected() {
        assert!(parse_csv("hello,world\n1,2\n").is_err());
    }

    #[test]
    fn column_dictionary_is_stable() {
        let names = column_names();
        assert_eq!(names.len(), 73);
        assert_eq!(names[0], "tick");
        assert!(names.contains(&"l_fz_peak".to_string()));
        assert!(names.contains(&"r_alpha_pitch".to_string()));
        assert!(names.contains(&"r_on_patch".to_string()));
        // no duplicates
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }
}
