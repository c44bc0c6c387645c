//! Reference end states: analytic, or BS5(4) at a tight tolerance.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use sha2::{Digest, Sha256};

use super::{Problem, ReferencePolicy};
use crate::builders::load_reference_pair;
use crate::integrate::{integrate, ControllerConfig, IntegrateOptions};

pub const REFERENCE_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ReferenceError {
    #[error("reference run for `{problem}` failed: {message}")]
    Integration { problem: String, message: String },
    #[error("reference cache {path}: {message}")]
    Cache { path: String, message: String },
}

fn memory() -> &'static Mutex<HashMap<String, Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Vec<f64>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cache_key(p: &Problem) -> String {
    format!("{}|bs5(4)|tol={REFERENCE_TOLERANCE:e}|v1", p.name)
}

/// File name for a cache key: the first 16 bytes of its SHA-256.
fn cache_file(dir: &Path, key: &str) -> PathBuf {
    let digest = Sha256::digest(key.as_bytes());
    dir.join(format!("{}.ref", hex::encode(&digest[..16])))
}

/// One line with the key, then one hex bit pattern per component.
fn read_cache(path: &Path, key: &str) -> Result<Option<Vec<f64>>, ReferenceError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => {
            return Err(ReferenceError::Cache {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        }
    };
    let mut lines = text.lines();
    if lines.next() != Some(key) {
        return Ok(None);
    }
    let values: Option<Vec<f64>> = lines
        .map(|l| u64::from_str_radix(l.trim(), 16).ok().map(f64::from_bits))
        .collect();
    Ok(values)
}

fn write_cache(path: &Path, key: &str, y: &[f64]) -> Result<(), ReferenceError> {
    let mut text = format!("{key}\n");
    for v in y {
        text.push_str(&format!("{:016x}\n", v.to_bits()));
    }
    let err = |e: std::io::Error| ReferenceError::Cache {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    std::fs::write(path, text).map_err(err)
}

fn compute(p: &Problem) -> Result<Vec<f64>, ReferenceError> {
    let m = load_reference_pair("bs5(4)").expect("bundled pair loads");
    let span = p.ivp.t_end - p.ivp.t0;
    let opts = IntegrateOptions::adaptive(ControllerConfig::new(REFERENCE_TOLERANCE, 1e-4 * span))
        .without_trajectory();
    let mut ivp = p.ivp.clone();
    ivp.reference = None;
    integrate(&m, &ivp, &opts)
        .map(|(_, rec)| rec.final_state)
        .map_err(|e| ReferenceError::Integration {
            problem: p.name.clone(),
            message: e.to_string(),
        })
}

/// End state of `p` at its final time. Numerical references are computed
/// once per process and, with `cache_dir`, stored bit-exactly on disk.
pub fn reference_solution(p: &Problem, cache_dir: Option<&Path>) -> Result<Vec<f64>, ReferenceError> {
    if let ReferencePolicy::Analytic(y) = &p.policy {
        return Ok(y.clone());
    }
    let key = cache_key(p);
    if let Some(y) = memory().lock().expect("cache lock").get(&key) {
        return Ok(y.clone());
    }
    let file = cache_dir.map(|d| cache_file(d, &key));
    let cached = match &file {
        Some(f) => read_cache(f, &key)?,
        None => None,
    };
    let y = match cached {
        Some(y) if y.len() == p.ivp.y0.len() => y,
        _ => {
            let y = compute(p)?;
            if let Some(f) = &file {
                write_cache(f, &key, &y)?;
            }
            y
        }
    };
    memory().lock().expect("cache lock").insert(key, y.clone());
    Ok(y)
}
