//! File formats: profile specifications, result tables and plan dumps.
//!
//! A profile specification is a JSON object:
//!
//! ```json
//! { "name": "UT", "F2": 0.05, "params": { "alpha": 2.0 } }
//! { "name": "river", "F2": 0.01, "ux": [1.0, 1.2, 1.1], "uy": [0.0, 0.3] }
//! ```
//!
//! `name` and `F2` are required. With `ux` or `uy` present the components are
//! polynomials in `z` (ascending coefficients, a missing component is zero);
//! otherwise `name` selects a built-in profile and `params` overrides its
//! defaults.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::depth::DepthPlan;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::shear::{builtin_profile, ProfileFn, ShearProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub name: String,
    #[serde(rename = "F2")]
    pub f2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ux: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uy: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

fn schema(field: &str, message: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), message: message.into() }
}

fn number_list(v: &Value, field: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| schema(field, "expected an array of numbers"))?;
    if arr.is_empty() {
        return Err(schema(field, "coefficient list is empty"));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| schema(&format!("{field}[{i}]"), "expected a finite number"))
        })
        .collect()
}

impl ProfileSpec {
    pub fn builtin(name: &str, f2: f64) -> Self {
        Self { name: name.into(), f2, ux: None, uy: None, params: BTreeMap::new() }
    }

    /// Validates field by field so errors name the offending key.
    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| schema("<root>", "expected a JSON object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "name" | "F2" | "ux" | "uy" | "params") {
                return Err(schema(key, "unknown field"));
            }
        }
        let name = obj
            .get("name")
            .ok_or_else(|| schema("name", "missing"))?
            .as_str()
            .ok_or_else(|| schema("name", "expected a string"))?
            .to_string();
        let f2 = obj
            .get("F2")
            .ok_or_else(|| schema("F2", "missing"))?
            .as_f64()
            .ok_or_else(|| schema("F2", "expected a number"))?;
        if !(f2 > 0.0 && f2.is_finite()) {
            return Err(schema("F2", format!("must be positive and finite, got {f2}")));
        }
        let ux = obj.get("ux").map(|v| number_list(v, "ux")).transpose()?;
        let uy = obj.get("uy").map(|v| number_list(v, "uy")).transpose()?;
        let mut params = BTreeMap::new();
        if let Some(p) = obj.get("params") {
            let p = p.as_object().ok_or_else(|| schema("params", "expected an object"))?;
            for (k, x) in p {
                let x = x
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| schema(&format!("params.{k}"), "expected a finite number"))?;
                params.insert(k.clone(), x);
            }
        }
        Ok(Self { name, f2, ux, uy, params })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_profile<T: Real>(&self) -> Result<ShearProfile<T>> {
        if self.ux.is_none() && self.uy.is_none() {
            let mut params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            params.push(("F2", self.f2));
            let mut p = builtin_profile(&self.name, &params).map_err(|e| schema("name", e.to_string()))?;
            p.name = self.name.clone();
            return Ok(p);
        }
        if !self.params.is_empty() {
            return Err(schema("params", "not allowed together with polynomial components"));
        }
        let poly = |c: &Option<Vec<f64>>| match c {
            Some(c) => ProfileFn::Polynomial { coeffs: c.iter().map(|&x| T::lit(x)).collect() },
            None => ProfileFn::Zero,
        };
        ShearProfile::new(self.name.clone(), poly(&self.ux), poly(&self.uy), T::lit(self.f2))
    }
}

pub fn read_profile_spec(path: impl AsRef<Path>) -> Result<ProfileSpec> {
    ProfileSpec::from_json(&std::fs::read_to_string(path)?)
}

pub fn write_profile_spec(path: impl AsRef<Path>, spec: &ProfileSpec) -> Result<()> {
    std::fs::write(path, spec.to_json()?)?;
    Ok(())
}

/// One output row; `theta` and `w` are optional columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord<T> {
    pub k: T,
    pub c: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<T>>,
}

impl<T: Real> ResultRecord<T> {
    pub fn new(k: T, c: T) -> Self {
        Self { k, c, theta: None, w: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'"))),
        }
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt17<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// CSV columns `k, c` (plus `theta` when any record has one); eigenvectors
/// are only written in JSON.
pub fn write_results<T: Real>(out: impl Write, records: &[ResultRecord<T>], format: Format) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(out, records)?;
            Ok(())
        }
        Format::Csv => {
            let with_theta = records.iter().any(|r| r.theta.is_some());
            let mut w = csv::Writer::from_writer(out);
            if with_theta {
                w.write_record(["k", "c", "theta"]).map_err(csv_err)?;
            } else {
                w.write_record(["k", "c"]).map_err(csv_err)?;
            }
            for r in records {
                let mut row = vec![fmt17(r.k), fmt17(r.c)];
                if with_theta {
                    row.push(r.theta.map(fmt17).unwrap_or_default());
                }
                w.write_record(&row).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub fn write_results_file<T: Real>(path: impl AsRef<Path>, records: &[ResultRecord<T>], format: Format) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_results(f, records, format)
}

/// Reads a table written by [`write_results`] in CSV form.
pub fn read_results_csv<T: Real>(input: impl Read) -> Result<Vec<ResultRecord<T>>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (ik, ic) = match (col("k"), col("c")) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(schema("k", "CSV needs columns k and c")),
    };
    let it = col("theta");
    let parse = |s: &str, field: &str| -> Result<T> {
        s.trim().parse::<T>().map_err(|_| schema(field, format!("cannot parse '{s}'")))
    };
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err)?;
        let theta = match it.and_then(|i| row.get(i)).filter(|s| !s.is_empty()) {
            Some(s) => Some(parse(s, "theta")?),
            None => None,
        };
        out.push(ResultRecord {
            k: parse(row.get(ik).unwrap_or(""), "k")?,
            c: parse(row.get(ic).unwrap_or(""), "c")?,
            theta,
            w: None,
        });
    }
    Ok(out)
}

pub fn plan_json<T: Real>(plan: &DepthPlan<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(plan)?)
}
