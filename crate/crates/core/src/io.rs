//! Text formats: field snapshots, ground-state sidecars, time-series CSV and
//! run manifests. Floating-point data is written with 17 significant digits.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::diagnostics::TimeSeriesRecord;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::groundstate::GroundStateResult;

pub const SNAPSHOT_MAGIC: &str = "fracwave-field";
pub const SNAPSHOT_VERSION: &str = "v1";
pub const TIMESERIES_HEADER: &str = "t,mass,energy,linf,D";
pub const SIDECAR_HEADER: &str = "lambda,energy_J,energy_K,iterations,residual,converged";

/// Formats with 17 significant digits.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub s: f64,
    pub sigma: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub field: ComplexField,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

pub fn write_snapshot_to<W: Write>(mut out: W, field: &ComplexField, meta: &SnapshotMeta) -> Result<()> {
    let g = field.grid();
    writeln!(
        out,
        "# {SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} J={} L={} s={} sigma={} t={}",
        g.len(),
        g.half_width(),
        meta.s,
        meta.sigma,
        meta.t
    )?;
    for (j, z) in field.values().iter().enumerate() {
        writeln!(out, "{},{},{}", fmt_sig17(g.node(j)), fmt_sig17(z.re), fmt_sig17(z.im))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshot(path: &Path, field: &ComplexField, meta: &SnapshotMeta) -> Result<()> {
    write_snapshot_to(create(path)?, field, meta)
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn read_snapshot_from<R: BufRead>(input: R, path: &Path) -> Result<Snapshot> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(path, "empty snapshot"))??;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("#")
        || tokens.next() != Some(SNAPSHOT_MAGIC)
        || tokens.next() != Some(SNAPSHOT_VERSION)
    {
        return Err(parse_err(path, format!("bad snapshot header {header:?}")));
    }
    let (mut nodes, mut half_width, mut s, mut sigma, mut t) = (None, None, None, None, None);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(path, format!("bad header token {tok:?}")))?;
        let bad = |_| parse_err(path, format!("bad value in {tok:?}"));
        match key {
            "J" => nodes = Some(value.parse::<usize>().map_err(|_| parse_err(path, format!("bad value in {tok:?}")))?),
            "L" => half_width = Some(value.parse::<f64>().map_err(bad)?),
            "s" => s = Some(value.parse::<f64>().map_err(bad)?),
            "sigma" => sigma = Some(value.parse::<f64>().map_err(bad)?),
            "t" => t = Some(value.parse::<f64>().map_err(bad)?),
            _ => return Err(parse_err(path, format!("unknown header key {key:?}"))),
        }
    }
    let missing = |k: &str| parse_err(path, format!("header lacks {k}"));
    let grid = Grid::new(half_width.ok_or_else(|| missing("L"))?, nodes.ok_or_else(|| missing("J"))?)?;
    let meta = SnapshotMeta {
        s: s.ok_or_else(|| missing("s"))?,
        sigma: sigma.ok_or_else(|| missing("sigma"))?,
        t: t.ok_or_else(|| missing("t"))?,
    };

    let mut values = Vec::with_capacity(grid.len());
    for (j, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(path, format!("line {}: expected x,re,im", j + 2)));
        }
        let num = |c: &str| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(path, format!("line {}: bad number {c:?}", j + 2)))
        };
        let x = num(cols[0])?;
        let idx = values.len();
        if idx >= grid.len() {
            return Err(parse_err(path, format!("more than J = {} rows", grid.len())));
        }
        if (x - grid.node(idx)).abs() > 1e-9 * grid.half_width() {
            return Err(parse_err(
                path,
                format!("row {idx}: node {x} does not match the grid ({})", grid.node(idx)),
            ));
        }
        values.push(Complex64::new(num(cols[1])?, num(cols[2])?));
    }
    if values.len() != grid.len() {
        return Err(parse_err(
            path,
            format!("expected {} rows, found {}", grid.len(), values.len()),
        ));
    }
    Ok(Snapshot {
        meta,
        field: ComplexField::new(grid, values)?,
    })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let file = fs::File::open(path).map_err(|e| parse_err(path, e.to_string()))?;
    read_snapshot_from(BufReader::new(file), path)
}

pub fn sidecar_row(res: &GroundStateResult) -> String {
    format!(
        "{},{},{},{},{},{}",
        fmt_sig17(res.lambda),
        fmt_sig17(res.energy_j),
        res.energy_k.map(fmt_sig17).unwrap_or_default(),
        res.iterations,
        fmt_sig17(res.residual),
        res.converged
    )
}

pub fn write_sidecar(path: &Path, res: &GroundStateResult) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SIDECAR_HEADER}")?;
    writeln!(out, "{}", sidecar_row(res))?;
    out.flush()?;
    Ok(())
}

pub fn write_timeseries_to<W: Write>(mut out: W, records: &[TimeSeriesRecord]) -> Result<()> {
    writeln!(out, "{TIMESERIES_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig17(r.t),
            fmt_sig17(r.mass),
            fmt_sig17(r.energy),
            fmt_sig17(r.linf),
            r.stability_d.map(fmt_sig17).unwrap_or_default()
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_timeseries(path: &Path, records: &[TimeSeriesRecord]) -> Result<()> {
    write_timeseries_to(create(path)?, records)
}

/// Writes any header plus rows as CSV.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

/// Plain-text `key=value` record of a run's parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        let mut m = Manifest::default();
        m.push("library", format!("fracwave {}", crate::VERSION));
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        let mut out = create(path)?;
        out.write_all(self.render().as_bytes())?;
        out.flush()?;
        Ok(path.to_path_buf())
    }
}
