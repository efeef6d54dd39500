//! File formats: random variables, regression datasets and return scenarios
//! as CSV, run specifications as JSON, and stable number formatting.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{QuadError, Result};
use crate::regression::Dataset;
use crate::robust::Scenarios;
use crate::rv::DiscreteRv;

/// Significant digits in every printed number.
pub const SIG_DIGITS: usize = 12;

/// Largest probability-sum deviation that ingestion repairs by rescaling.
pub const INGEST_NORMALIZE_TOL: f64 = 1e-4;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| QuadError::Io(format!("{}: {e}", path.display())))
}

fn cell(s: &str, line: u64, column: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| QuadError::Invalid(format!("line {line}, column {column}: '{s}' is not a finite number")))
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(u64, Vec<f64>)>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> =
        rdr.headers().map_err(|e| QuadError::Io(e.to_string()))?.iter().map(|h| h.to_lowercase()).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| QuadError::Invalid(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let vals = rec.iter().zip(&headers).map(|(s, h)| cell(s, line, h)).collect::<Result<Vec<_>>>()?;
        rows.push((line, vals));
    }
    if rows.is_empty() {
        return Err(QuadError::Invalid("no data rows".into()));
    }
    Ok(Table { headers, rows })
}

/// Rescale probabilities whose sum is within [`INGEST_NORMALIZE_TOL`] of one.
fn normalize(probs: &mut [f64], lines: &[u64]) -> Result<f64> {
    if let Some(i) = probs.iter().position(|p| *p < 0.0) {
        return Err(QuadError::Invalid(format!("line {}: negative probability {}", lines[i], probs[i])));
    }
    let s: f64 = probs.iter().sum();
    let delta = s - 1.0;
    if delta.abs() > INGEST_NORMALIZE_TOL {
        return Err(QuadError::Probability { sum: s });
    }
    if delta != 0.0 {
        log::info!("probabilities sum to {s}; rescaled (delta {delta:e})");
        probs.iter_mut().for_each(|p| *p /= s);
    }
    Ok(delta)
}

#[derive(Clone, Debug)]
pub struct Ingest {
    pub rv: DiscreteRv,
    pub rows: usize,
    /// Probability sum minus one before rescaling.
    pub delta: f64,
}

/// CSV with header `value,prob` or a single column `value` (equal weights).
pub fn parse_rv_csv<R: Read>(reader: R) -> Result<Ingest> {
    let t = read_table(reader)?;
    let vi = t.headers.iter().position(|h| h == "value").ok_or_else(|| QuadError::Invalid("missing 'value' column".into()))?;
    let pi = t.headers.iter().position(|h| h == "prob");
    let n = t.rows.len();
    let values: Vec<f64> = t.rows.iter().map(|r| r.1[vi]).collect();
    let lines: Vec<u64> = t.rows.iter().map(|r| r.0).collect();
    let mut probs: Vec<f64> = match pi {
        Some(pi) => t.rows.iter().map(|r| r.1[pi]).collect(),
        None => vec![1.0 / n as f64; n],
    };
    let delta = normalize(&mut probs, &lines)?;
    let rv = DiscreteRv::new(&values, &probs)?;
    log::info!("read {n} rows into {} atoms", rv.len());
    Ok(Ingest { rv, rows: n, delta })
}

pub fn read_rv_csv(path: &Path) -> Result<Ingest> {
    parse_rv_csv(open(path)?)
}

/// CSV with a `y` column, an optional `weight` column and feature columns.
pub fn parse_dataset_csv<R: Read>(reader: R) -> Result<Dataset> {
    let t = read_table(reader)?;
    let yi = t.headers.iter().position(|h| h == "y").ok_or_else(|| QuadError::Invalid("missing 'y' column".into()))?;
    let wi = t.headers.iter().position(|h| h == "weight");
    let lines: Vec<u64> = t.rows.iter().map(|r| r.0).collect();
    let features = t
        .rows
        .iter()
        .map(|r| r.1.iter().enumerate().filter(|(j, _)| *j != yi && Some(*j) != wi).map(|(_, v)| *v).collect())
        .collect();
    let target = t.rows.iter().map(|r| r.1[yi]).collect();
    let weights = match wi {
        Some(wi) => {
            let mut w: Vec<f64> = t.rows.iter().map(|r| r.1[wi]).collect();
            normalize(&mut w, &lines)?;
            Some(w)
        }
        None => None,
    };
    Dataset::new(features, target, weights)
}

pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    parse_dataset_csv(open(path)?)
}

/// CSV with one column per asset and an optional `prob` column.
pub fn parse_scenarios_csv<R: Read>(reader: R) -> Result<Scenarios> {
    let t = read_table(reader)?;
    let pi = t.headers.iter().position(|h| h == "prob");
    let lines: Vec<u64> = t.rows.iter().map(|r| r.0).collect();
    let returns = t
        .rows
        .iter()
        .map(|r| r.1.iter().enumerate().filter(|(j, _)| Some(*j) != pi).map(|(_, v)| *v).collect())
        .collect();
    let probs = match pi {
        Some(pi) => {
            let mut p: Vec<f64> = t.rows.iter().map(|r| r.1[pi]).collect();
            normalize(&mut p, &lines)?;
            Some(p)
        }
        None => None,
    };
    Scenarios::new(returns, probs)
}

pub fn read_scenarios_csv(path: &Path) -> Result<Scenarios> {
    parse_scenarios_csv(open(path)?)
}

/// Run specification: `{family|phi, params: {...}, tau?, epsilon?}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: RunSpec = serde_json::from_str(text).map_err(|e| QuadError::Invalid(format!("spec: {e}")))?;
        if spec.family.is_some() && spec.phi.is_some() {
            return Err(QuadError::Invalid("spec names both a family and a phi".into()));
        }
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut s = String::new();
        open(path)?.read_to_string(&mut s).map_err(|e| QuadError::Io(e.to_string()))?;
        Self::parse(&s)
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }
}

/// Round to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text of the rounded value; non-finite values are spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let r = round_sig(x);
        // normalize -0
        format!("{}", if r == 0.0 { 0.0 } else { r })
    }
}

/// JSON number rounded to [`SIG_DIGITS`] digits, or a string when non-finite.
pub fn num(x: f64) -> Value {
    let r = round_sig(x);
    match serde_json::Number::from_f64(if r == 0.0 { 0.0 } else { r }) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_num(x)),
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|v| num(*v)).collect())
}

/// Round every number in a serialized value.
pub fn stable(v: Value) -> Value {
    match v {
        Value::Number(n) => n.as_f64().map_or(Value::Number(n), num),
        Value::Array(a) => Value::Array(a.into_iter().map(stable).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stable(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rv_formats() {
        let a = parse_rv_csv("value,prob\n-1,0.5\n1,0.5\n".as_bytes()).unwrap();
        assert_eq!(a.rv, DiscreteRv::new(&[-1.0, 1.0], &[0.5, 0.5]).unwrap());
        let b = parse_rv_csv("value\n1\n2\n3\n4\n5\n".as_bytes()).unwrap();
        assert_eq!(b.rv, DiscreteRv::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap());
        let c = parse_rv_csv("value,prob\n0,0.499999\n1,0.5\n".as_bytes()).unwrap();
        assert!((c.delta + 1e-6).abs() < 1e-12 && (c.rv.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rv_diagnostics() {
        let e = parse_rv_csv("value,prob\n1,0.5\nx,0.5\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = parse_rv_csv("value,prob\n1,-0.5\n2,1.5\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("negative"), "{e}");
        assert!(parse_rv_csv("value\n".as_bytes()).is_err());
    }

    #[test]
    fn number_round_trip() {
        for x in [4.5, 1.0 / 3.0, -2.0e-17, 123_456_789.123_456_79, 0.1 + 0.2] {
            let v = num(x);
            let text = serde_json::to_string(&v).unwrap();
            let back: f64 = serde_json::from_str(&text).unwrap();
            assert_eq!(num(back), v);
            assert_eq!(fmt_num(back), fmt_num(x));
        }
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn spec_schema() {
        let s = RunSpec::parse(r#"{"family":"quantile","params":{"alpha":0.6}}"#).unwrap();
        assert_eq!(s.param("alpha"), Some(0.6));
        assert!(RunSpec::parse(r#"{"family":"quantile","phi":"kl"}"#).is_err());
        assert!(RunSpec::parse(r#"{"famly":"quantile"}"#).is_err());
    }
}
