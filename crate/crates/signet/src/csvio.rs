//! CSV artifacts. Floats are written with the shortest round-trip
//! representation so repeated runs are byte-identical and values read back
//! exactly. Readers are strict: exact header, fixed width, typed finite fields.

use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::error::{Error, Result};

pub trait Row: Sized {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    fn parse(rec: &Fields<'_>) -> Result<Self>;
}

/// Typed access to one record, with the line number for diagnostics.
pub struct Fields<'a> {
    rec: &'a StringRecord,
    line: usize,
}

impl Fields<'_> {
    fn raw(&self, i: usize) -> &str {
        self.rec.get(i).unwrap_or("")
    }

    fn err(&self, i: usize, what: &str) -> Error {
        Error::Csv(format!("line {}: column {}: {what}: {:?}", self.line, i + 1, self.raw(i)))
    }

    pub fn float(&self, i: usize) -> Result<f64> {
        let v: f64 = self.raw(i).parse().map_err(|_| self.err(i, "not a number"))?;
        if !v.is_finite() {
            return Err(self.err(i, "not finite"));
        }
        Ok(v)
    }

    pub fn uint(&self, i: usize) -> Result<usize> {
        self.raw(i).parse().map_err(|_| self.err(i, "not an unsigned integer"))
    }

    pub fn text(&self, i: usize) -> Result<String> {
        let s = self.raw(i);
        if s.is_empty() {
            return Err(self.err(i, "empty"));
        }
        Ok(s.to_string())
    }
}

fn num(x: f64) -> String {
    // normalise -0 so sign-of-zero noise cannot change bytes
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn write_rows<R: Row>(out: impl Write, rows: &[R]) -> Result<()> {
    let mut w = WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Row>(input: impl Read) -> Result<Vec<R>> {
    let mut rdr = ReaderBuilder::new().has_headers(false).flexible(false).trim(csv::Trim::None).from_reader(input);
    let mut records = rdr.records();
    let header = records.next().ok_or_else(|| Error::Csv("empty file".into()))??;
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(Error::Csv(format!("bad header {:?}, expected {:?}", header.iter().collect::<Vec<_>>(), R::HEADER)));
    }
    let mut out = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != R::HEADER.len() {
            return Err(Error::Csv(format!("line {line}: {} fields, expected {}", rec.len(), R::HEADER.len())));
        }
        out.push(R::parse(&Fields { rec: &rec, line })?);
    }
    Ok(out)
}

pub fn write_file<R: Row>(path: &Path, rows: &[R]) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_rows(f, rows)
}

pub fn read_file<R: Row>(path: &Path) -> Result<Vec<R>> {
    read_rows(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryRow {
    pub edge_id: u32,
    pub x: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub index: usize,
    pub family: String,
    pub lambda: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionRow {
    pub pair_index: usize,
    pub basis_index: usize,
    pub edge_id: u32,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub edge_id: u32,
    pub x: f64,
    pub re_value: f64,
    pub im_value: f64,
}

/// FD oracle eigenvalues, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub index: usize,
    pub lambda: f64,
    pub multiplicity: usize,
}

fn edge_id(f: &Fields<'_>, i: usize) -> Result<u32> {
    u32::try_from(f.uint(i)?).map_err(|_| f.err(i, "edge id out of range"))
}

impl Row for StationaryRow {
    const HEADER: &'static [&'static str] = &["edge_id", "x", "psi"];
    fn fields(&self) -> Vec<String> {
        vec![self.edge_id.to_string(), num(self.x), num(self.psi)]
    }
    fn parse(f: &Fields<'_>) -> Result<Self> {
        Ok(StationaryRow { edge_id: edge_id(f, 0)?, x: f.float(1)?, psi: f.float(2)? })
    }
}

impl Row for SpectrumRow {
    const HEADER: &'static [&'static str] = &["index", "family", "lambda", "multiplicity"];
    fn fields(&self) -> Vec<String> {
        vec![self.index.to_string(), self.family.clone(), num(self.lambda), self.multiplicity.to_string()]
    }
    fn parse(f: &Fields<'_>) -> Result<Self> {
        Ok(SpectrumRow { index: f.uint(0)?, family: f.text(1)?, lambda: f.float(2)?, multiplicity: f.uint(3)? })
    }
}

impl Row for EigenfunctionRow {
    const HEADER: &'static [&'static str] = &["pair_index", "basis_index", "edge_id", "x", "value"];
    fn fields(&self) -> Vec<String> {
        vec![self.pair_index.to_string(), self.basis_index.to_string(), self.edge_id.to_string(), num(self.x), num(self.value)]
    }
    fn parse(f: &Fields<'_>) -> Result<Self> {
        Ok(EigenfunctionRow { pair_index: f.uint(0)?, basis_index: f.uint(1)?, edge_id: edge_id(f, 2)?, x: f.float(3)?, value: f.float(4)? })
    }
}

impl Row for TrajectoryRow {
    const HEADER: &'static [&'static str] = &["t", "edge_id", "x", "re_value", "im_value"];
    fn fields(&self) -> Vec<String> {
        vec![num(self.t), self.edge_id.to_string(), num(self.x), num(self.re_value), num(self.im_value)]
    }
    fn parse(f: &Fields<'_>) -> Result<Self> {
        Ok(TrajectoryRow { t: f.float(0)?, edge_id: edge_id(f, 1)?, x: f.float(2)?, re_value: f.float(3)?, im_value: f.float(4)? })
    }
}

impl Row for OracleRow {
    const HEADER: &'static [&'static str] = &["index", "lambda", "multiplicity"];
    fn fields(&self) -> Vec<String> {
        vec![self.index.to_string(), num(self.lambda), self.multiplicity.to_string()]
    }
    fn parse(f: &Fields<'_>) -> Result<Self> {
        Ok(OracleRow { index: f.uint(0)?, lambda: f.float(1)?, multiplicity: f.uint(2)? })
    }
}
