//! Rows emitted by the command-line tool, with CSV and JSON writers and readers.
//!
//! Floats are written with twelve significant digits and exact values as
//! reduced fractions `p/q`. Float values are rounded to their printed form when
//! a row is built, so writing and reading a row gives back the same row.

use std::fmt;
use std::io::{Read, Write};

use num_rational::BigRational;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{limiting_value, threshold_equation_root};
use crate::error::{Error, Result};
use crate::model::{Cost, Variant};
use crate::numeric::{format_rational, format_sig12, parse_rational, round_sig12, NumericMode};
use crate::solver::SolveResult;

/// A reported number: a float rounded to twelve significant digits, or an
/// exact fraction.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Float(f64),
    Exact(BigRational),
}

impl Number {
    pub fn float(x: f64) -> Self {
        Number::Float(round_sig12(x))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Float(x) => *x,
            Number::Exact(q) => crate::numeric::rational_to_f64(q),
        }
    }

    /// Reads back what [`fmt::Display`] wrote. Text with a decimal point or an
    /// exponent is a float; anything else is an exact fraction.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.contains(['.', 'e', 'E']) || t.contains("inf") || t.contains("NaN") {
            t.parse::<f64>()
                .map(Number::Float)
                .map_err(|_| Error::Parse(format!("bad float {t:?}")))
        } else {
            parse_rational(t).map(Number::Exact)
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Float(x) => f.write_str(&format_sig12(*x)),
            Number::Exact(q) => f.write_str(&format_rational(q)),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Number::Float(x) => serializer.serialize_f64(*x),
            Number::Exact(q) => serializer.serialize_str(&format_rational(q)),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Float(x) => Ok(Number::Float(x)),
            Raw::Text(s) => parse_rational(&s).map(Number::Exact).map_err(de::Error::custom),
        }
    }
}

/// Conversion of solver scalars into reported numbers.
pub trait ToNumber {
    fn to_number(&self) -> Number;
}

impl ToNumber for f64 {
    fn to_number(&self) -> Number {
        Number::float(*self)
    }
}

impl ToNumber for BigRational {
    fn to_number(&self) -> Number {
        Number::Exact(self.clone())
    }
}

/// One `(N, c)` cell of a table. Tied cells also carry the neighbouring rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub c: f64,
    pub variant: Variant,
    pub k0: usize,
    pub value: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_k0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_value: Option<Number>,
}

impl TableRow {
    pub fn from_result<S>(result: &SolveResult<S>) -> Result<Self>
    where
        S: crate::numeric::Scalar + ToNumber,
    {
        let k0 = result.k0();
        let (tie_k0, tie_value) = if result.boundary_tie {
            (Some(k0 + 1), Some(result.rule_value(k0 + 1)?.to_number()))
        } else {
            (None, None)
        };
        Ok(Self {
            n: result.spec.horizon,
            c: result.spec.cost.value(),
            variant: result.spec.variant,
            k0,
            value: result.value.to_number(),
            tie_k0,
            tie_value,
        })
    }
}

/// Output of a single solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub row: TableRow,
    pub monotone_case: bool,
    pub numeric_mode: NumericMode,
}

impl SolveReport {
    pub fn from_result<S>(result: &SolveResult<S>) -> Result<Self>
    where
        S: crate::numeric::Scalar + ToNumber,
    {
        Ok(Self {
            row: TableRow::from_result(result)?,
            monotone_case: result.monotone_case,
            numeric_mode: result.numeric_mode,
        })
    }

    pub fn to_text(&self) -> String {
        let r = &self.row;
        let mut s = format!(
            "n={}\nc={}\nvariant={}\nk0={}\nvalue={}\nmonotone_case={}\nnumeric_mode={}\n",
            r.n,
            r.c,
            r.variant,
            r.k0,
            r.value,
            self.monotone_case,
            match self.numeric_mode {
                NumericMode::Exact => "exact",
                NumericMode::Float => "float",
            }
        );
        if let (Some(k), Some(v)) = (r.tie_k0, &r.tie_value) {
            s.push_str(&format!("tie_k0={k}\ntie_value={v}\n"));
        }
        s
    }
}

pub const TABLE_HEADER: [&str; 7] = ["N", "c", "variant", "k0", "value", "tie_k0", "tie_value"];

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn opt_text<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, name: &str) -> Result<&'a str> {
    rec.get(i).ok_or_else(|| Error::Parse(format!("missing column {name}")))
}

fn parse_field<T: std::str::FromStr>(text: &str, name: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {name}: {text:?}")))
}

fn write_meta<W: Write>(out: &mut W, meta: &[(&str, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k}={v}").map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(())
}

pub fn write_table_csv<W: Write>(mut out: W, rows: &[TableRow], meta: &[(&str, String)]) -> Result<()> {
    write_meta(&mut out, meta)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(TABLE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.c.to_string(),
            r.variant.to_string(),
            r.k0.to_string(),
            r.value.to_string(),
            opt_text(&r.tie_k0),
            opt_text(&r.tie_value),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input)
}

pub fn read_table_csv<R: Read>(input: R) -> Result<Vec<TableRow>> {
    let mut rd = csv_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != TABLE_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let opt = |i: usize, name: &str| -> Result<Option<&str>> {
            let t = field(&rec, i, name)?;
            Ok(if t.is_empty() { None } else { Some(t) })
        };
        rows.push(TableRow {
            n: parse_field(field(&rec, 0, "N")?, "N")?,
            c: parse_field(field(&rec, 1, "c")?, "c")?,
            variant: field(&rec, 2, "variant")?.parse()?,
            k0: parse_field(field(&rec, 3, "k0")?, "k0")?,
            value: Number::parse(field(&rec, 4, "value")?)?,
            tie_k0: opt(5, "tie_k0")?.map(|t| parse_field(t, "tie_k0")).transpose()?,
            tie_value: opt(6, "tie_value")?.map(Number::parse).transpose()?,
        });
    }
    Ok(rows)
}

pub fn table_to_json(rows: &[TableRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Parse(e.to_string()))
}

pub fn table_from_json(text: &str) -> Result<Vec<TableRow>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// One point of a sweep for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub n: usize,
    pub c: f64,
    pub variant: Variant,
    pub k0: usize,
    pub k0_over_n: f64,
    pub value: f64,
    pub limit_root: f64,
    pub limit_value: f64,
}

pub const PLOT_HEADER: [&str; 8] = [
    "N",
    "c",
    "variant",
    "k0",
    "k0_over_N",
    "value",
    "limit_root",
    "limit_value",
];

impl PlotRow {
    pub fn new(result: &SolveResult<f64>) -> Result<Self> {
        let spec = &result.spec;
        let (root, limit) = limits(&spec.cost, spec.variant)?;
        let n = spec.horizon;
        Ok(Self {
            n,
            c: spec.cost.value(),
            variant: spec.variant,
            k0: result.k0(),
            k0_over_n: round_sig12(result.k0() as f64 / n as f64),
            value: round_sig12(result.value),
            limit_root: round_sig12(root),
            limit_value: round_sig12(limit),
        })
    }
}

/// `(root, limit value)`, with `(0, 1)` for zero cost.
pub fn limits(cost: &Cost, variant: Variant) -> Result<(f64, f64)> {
    if cost.is_zero() {
        Ok((0.0, 1.0))
    } else {
        let c = cost.value();
        Ok((threshold_equation_root(c, variant)?, limiting_value(c, variant)?))
    }
}

pub fn write_plot_csv<W: Write>(mut out: W, rows: &[PlotRow], meta: &[(&str, String)]) -> Result<()> {
    write_meta(&mut out, meta)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(PLOT_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.c.to_string(),
            r.variant.to_string(),
            r.k0.to_string(),
            format_sig12(r.k0_over_n),
            format_sig12(r.value),
            format_sig12(r.limit_root),
            format_sig12(r.limit_value),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_plot_csv<R: Read>(input: R) -> Result<Vec<PlotRow>> {
    let mut rd = csv_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != PLOT_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let f = |i: usize| field(&rec, i, PLOT_HEADER[i]);
        rows.push(PlotRow {
            n: parse_field(f(0)?, "N")?,
            c: parse_field(f(1)?, "c")?,
            variant: f(2)?.parse()?,
            k0: parse_field(f(3)?, "k0")?,
            k0_over_n: parse_field(f(4)?, "k0_over_N")?,
            value: parse_field(f(5)?, "value")?,
            limit_root: parse_field(f(6)?, "limit_root")?,
            limit_value: parse_field(f(7)?, "limit_value")?,
        });
    }
    Ok(rows)
}
