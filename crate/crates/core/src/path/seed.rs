//! Seed records: an eigenpair stored as decimal strings so it can be computed
//! elsewhere at higher precision and imported into working precision.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::collocation::{assemble_forward, normalise, EigenSolution};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::shear::ReducedProfile;
use crate::spectral::CollocationOperator;

/// Largest accepted relative pencil residual for an imported seed (double precision).
pub const SEED_RESIDUAL_LIMIT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub k: String,
    pub c: String,
    pub w: Vec<String>,
    #[serde(rename = "N_z")]
    pub n_z: usize,
    pub h: String,
    pub profile_name: String,
    #[serde(rename = "F2")]
    pub f2: String,
}

impl SeedRecord {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn digits<T: Real>(x: T) -> String {
    format!("{x:.19e}")
}

fn parse<T: Real>(s: &str, field: &str) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::InvalidSeed(format!("field {field}: cannot parse '{s}'")))
}

/// Writes a real-valued solution with 20 significant digits per entry.
pub fn export_seed<T: Real>(
    solution: &EigenSolution<T>,
    op: &CollocationOperator<T>,
    profile: &ReducedProfile<T>,
) -> Result<SeedRecord> {
    let w = solution
        .real_w()
        .ok_or_else(|| Error::InvalidSeed("eigenvector is not real".into()))?;
    Ok(SeedRecord {
        k: digits(solution.k),
        c: digits(solution.c),
        w: w.into_iter().map(digits).collect(),
        n_z: op.order(),
        h: digits(op.depth()),
        profile_name: profile.name.clone(),
        f2: digits(profile.froude2),
    })
}

fn close<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-12) * a.abs().max(b.abs()).max(T::one())
}

/// Parses a seed and checks it against the target grid and profile.
pub fn import_seed<T: Real>(
    record: &SeedRecord,
    op: &CollocationOperator<T>,
    profile: &ReducedProfile<T>,
) -> Result<EigenSolution<T>> {
    if record.n_z != op.order() {
        return Err(Error::InvalidSeed(format!("seed has N_z = {}, operator has {}", record.n_z, op.order())));
    }
    if record.w.len() != op.order() {
        return Err(Error::InvalidSeed(format!("seed has {} eigenvector entries, expected {}", record.w.len(), op.order())));
    }
    let h: T = parse(&record.h, "h")?;
    if !close(h, op.depth()) {
        return Err(Error::InvalidSeed(format!("seed depth {h} differs from operator depth {}", op.depth())));
    }
    let f2: T = parse(&record.f2, "F2")?;
    if !close(f2, profile.froude2) {
        return Err(Error::InvalidSeed(format!("seed F2 {f2} differs from profile F2 {}", profile.froude2)));
    }
    if record.profile_name != profile.name {
        return Err(Error::InvalidSeed(format!(
            "seed profile '{}' differs from '{}'",
            record.profile_name, profile.name
        )));
    }
    let k: T = parse(&record.k, "k")?;
    let c: T = parse(&record.c, "c")?;
    let w = record
        .w
        .iter()
        .enumerate()
        .map(|(i, s)| parse::<T>(s, &format!("w[{i}]")).map(|x| Complex::new(x, T::zero())))
        .collect::<Result<Vec<_>>>()?;
    let pencil = assemble_forward(profile, op, k)?;
    let residual = pencil.relative_residual(Complex::new(c, T::zero()), &w);
    let limit = T::lit(SEED_RESIDUAL_LIMIT).max(T::epsilon() * T::lit(1e4));
    if !(residual < limit) {
        return Err(Error::StaleSeed { residual: residual.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    // an exported vector is already unit length; renormalising would cost an ulp
    let nrm = w.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    let slack = T::epsilon() * T::lit(4.0 * w.len() as f64);
    let w = if (nrm - T::one()).abs() <= slack && w[0].re >= T::zero() { w } else { normalise(w) };
    Ok(EigenSolution { k, c, w, warnings: Vec::new() })
}
