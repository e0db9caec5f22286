//! Plot-ready CSV files. Every file opens with `# key: value` lines that
//! record everything needed to regenerate it.

use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fit::Regime;
use crate::lattice::{Topology, GENERATOR_ID};
use crate::scalar::Real;
use crate::seed::SEED_MIXER_ID;
use crate::sweep::{Engine, GiniCurves, SweepResults, TransitionMask};

pub const TOOL_VERSION: &str = concat!("cmlwealth ", env!("CARGO_PKG_VERSION"));

/// Ordered header entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(kind: &str) -> Self {
        Self::default().with("tool", TOOL_VERSION).with("kind", kind)
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    /// Protocol, analysis, scalar type and the random-number plumbing.
    pub fn engine<T: Real>(self, engine: &Engine) -> Self {
        self.with("protocol", engine.protocol)
            .with("analysis", engine.analysis)
            .with("scalar", T::NAME)
            .with("generator", GENERATOR_ID)
            .with("seed_mixer", SEED_MIXER_ID)
            .with("master_seed", engine.protocol.master_seed)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }

    /// Reads the leading `#` lines of a file written by this module.
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .map_while(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once(": "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub const SWEEP_COLUMNS: [&str; 9] = ["a", "r", "regime", "exponent", "correlation", "H", "sigma", "gini", "status"];
pub const FINAL_COLUMNS: [&str; 2] = ["H_final", "gini_final"];

/// Sweep table, one row per cell in grid order. With `final_columns` the
/// last-iteration mean field and Gini are appended.
pub fn write_sweep<W: Write>(mut w: W, meta: &Metadata, results: &SweepResults, final_columns: bool) -> Result<()> {
    meta.write(&mut w)?;
    let mut out = csv_writer(w);
    let mut header: Vec<&str> = SWEEP_COLUMNS.to_vec();
    if final_columns {
        header.extend(FINAL_COLUMNS);
    }
    out.write_record(&header)?;
    for c in &results.cells {
        let s = c.stats;
        let mut row = vec![
            num(c.a),
            num(c.r),
            c.regime.label().to_string(),
            opt(c.exponent),
            opt(c.correlation),
            opt(s.map(|s| s.mean_field)),
            opt(s.map(|s| s.sigma)),
            opt(s.map(|s| s.gini)),
            c.status.to_string(),
        ];
        if final_columns {
            row.push(opt(s.map(|s| s.final_mean_field)));
            row.push(opt(s.map(|s| s.final_gini)));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn sweep_metadata<T: Real>(engine: &Engine, results: &SweepResults, final_columns: bool) -> Metadata {
    Metadata::new("sweep")
        .with("topology", results.topology)
        .with("grid", results.grid)
        .engine::<T>(engine)
        .with("final_columns", final_columns)
}

pub fn write_mask<W: Write>(mut w: W, meta: &Metadata, mask: &TransitionMask) -> Result<()> {
    meta.write(&mut w)?;
    let mut out = csv_writer(w);
    out.write_record(["a", "r", "flag"])?;
    for c in &mask.cells {
        out.write_record([num(c.a), num(c.r), u8::from(c.flag).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn mask_metadata<T: Real>(engine: &Engine, mask: &TransitionMask) -> Metadata {
    Metadata::new("transition-mask")
        .with("source", mask.source)
        .with("target", mask.target)
        .with("grid", mask.grid)
        .engine::<T>(engine)
}

/// `a` followed by one `gini_<topology>` column per curve.
pub fn write_curves<W: Write>(mut w: W, meta: &Metadata, curves: &GiniCurves) -> Result<()> {
    meta.write(&mut w)?;
    let mut out = csv_writer(w);
    let mut header = vec!["a".to_string()];
    header.extend(curves.topologies.iter().map(|t| format!("gini_{t}")));
    out.write_record(&header)?;
    for (i, &a) in curves.a_values.iter().enumerate() {
        let mut row = vec![num(a)];
        row.extend(curves.cells.iter().map(|cells| opt(cells[i].gini())));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn curves_metadata<T: Real>(engine: &Engine, curves: &GiniCurves) -> Metadata {
    let names: Vec<&str> = curves.topologies.iter().map(|t| t.name()).collect();
    let a: Vec<String> = curves.a_values.iter().map(|a| a.to_string()).collect();
    Metadata::new("gini-curve")
        .with("r", curves.r)
        .with("topologies", names.join(","))
        .with("a_values", a.join(","))
        .engine::<T>(engine)
}

/// One row of a single-lattice time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: u64,
    pub mean_field: f64,
    pub sigma: f64,
    /// `None` once all wealth is gone.
    pub gini: Option<f64>,
}

pub fn write_series<W: Write>(mut w: W, meta: &Metadata, rows: &[SeriesRow]) -> Result<()> {
    meta.write(&mut w)?;
    let mut out = csv_writer(w);
    out.write_record(["t", "H", "sigma", "gini"])?;
    for row in rows {
        out.write_record([row.t.to_string(), num(row.mean_field), num(row.sigma), opt(row.gini)])?;
    }
    out.flush()?;
    Ok(())
}

/// The columns of a sweep file needed to recompute masks and regime counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub r: f64,
    pub regime: Regime,
    pub gini: Option<f64>,
}

pub fn read_sweep<R: Read>(r: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("sweep file has no `{name}` column")))
    };
    let (ia, ir, ireg, ig) = (col("a")?, col("r")?, col("regime")?, col("gini")?);
    let float = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("bad number `{s}` in sweep file")));
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let g = &record[ig];
        rows.push(SweepRow {
            a: float(&record[ia])?,
            r: float(&record[ir])?,
            regime: record[ireg].parse()?,
            gini: if g.is_empty() { None } else { Some(float(g)?) },
        });
    }
    Ok(rows)
}

/// Topology named in a file's header, if any.
pub fn header_topology(meta: &Metadata) -> Option<Topology> {
    meta.get("topology").and_then(|t| t.parse().ok())
}
