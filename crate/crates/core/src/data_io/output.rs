use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::csv::{fmt_f64, read_csv_matrix, write_csv_matrix};
use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::solver::{FactorizationState, TraceRecord};

pub const TRACE_HEADER: &str = "iter,objective,delta_u,delta_v,mu,lambda,l";
pub const U_FILE: &str = "U.csv";
pub const V_HAT_FILE: &str = "V_hat.csv";
pub const META_FILE: &str = "meta.txt";
pub const TRACE_FILE: &str = "trace.csv";

pub fn format_trace(records: &[TraceRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            fmt_f64(r.objective),
            fmt_f64(r.delta_u),
            fmt_f64(r.delta_v),
            fmt_f64(r.mu),
            fmt_f64(r.lambda),
            fmt_f64(r.l)
        );
    }
    out
}

pub fn write_trace(records: &[TraceRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_trace(records)).map_err(|e| Error::io(path, e))
}

/// Writes `U.csv`, `V_hat.csv` and `meta.txt` into `dir`, creating it if
/// needed. `meta.txt` holds `key=value` lines.
pub fn write_factors(
    state: &FactorizationState,
    spec: &ConstraintSpec,
    seed: u64,
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv_matrix(&state.u, dir.join(U_FILE))?;
    write_csv_matrix(&state.v_hat, dir.join(V_HAT_FILE))?;
    let meta = format!(
        "l={}\nu_set={}\nv_set={}\ns={}\nseed={seed}\niterations={}\nobjective={}\nrank={}\n",
        fmt_f64(state.l),
        spec.u_set,
        spec.v_set,
        spec.sparsity,
        state.iter,
        fmt_f64(state.objective),
        state.rank(),
    );
    let path = dir.join(META_FILE);
    fs::write(&path, meta).map_err(|e| Error::io(&path, e))
}

/// Parsed `meta.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMeta {
    pub entries: BTreeMap<String, String>,
}

impl FactorMeta {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn radius(&self) -> Result<f64> {
        self.get("l")
            .ok_or_else(|| Error::format(0, "meta.txt has no 'l' entry"))?
            .parse()
            .map_err(|_| Error::format(0, "meta.txt 'l' is not a number"))
    }
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<FactorMeta> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(i + 1, format!("expected key=value, got '{line}'")))?;
        entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(FactorMeta { entries })
}

/// Reads back `(U, V_hat, meta)` from a directory written by [`write_factors`].
pub fn read_factors(dir: impl AsRef<Path>) -> Result<(DenseMatrix, DenseMatrix, FactorMeta)> {
    let dir = dir.as_ref();
    Ok((
        read_csv_matrix(dir.join(U_FILE))?,
        read_csv_matrix(dir.join(V_HAT_FILE))?,
        read_meta(dir.join(META_FILE))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{USet, VSet};

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(format_trace(&[]), format!("{TRACE_HEADER}\n"));
    }

    #[test]
    fn trace_rows_have_seven_fields() {
        let rec = TraceRecord {
            iter: 3,
            objective: 1.5,
            delta_u: 0.1,
            delta_v: 0.2,
            mu: 2.0,
            lambda: 2.02,
            l: 0.75,
        };
        let text = format_trace(&[rec]);
        let row = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[0], "3");
        assert_eq!(fields[6].parse::<f64>().unwrap(), 0.75);
    }

    #[test]
    fn factors_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let state = FactorizationState {
            u: DenseMatrix::from_rows(&[&[0.6, 0.0], &[0.8, 0.0], &[0.0, 1.0]]).unwrap(),
            v_hat: DenseMatrix::from_rows(&[&[1.0 / 3.0, 1.0], &[(8.0f64 / 9.0).sqrt(), 0.0]])
                .unwrap(),
            l: 2.0f64.sqrt(),
            iter: 12,
            objective: 0.125,
        };
        let spec = ConstraintSpec::new(USet::Orthogonal, VSet::NonnegSphere, 1);
        write_factors(&state, &spec, 42, dir.path()).unwrap();
        let (u, v, meta) = read_factors(dir.path()).unwrap();
        assert!(u.distance(&state.u).unwrap() < 1e-15);
        assert!(v.distance(&state.v_hat).unwrap() < 1e-15);
        assert_eq!(meta.radius().unwrap(), state.l);
        assert_eq!(meta.get("v_set"), Some("nonneg_sphere"));
        assert_eq!(meta.get("iterations"), Some("12"));
        assert_eq!(meta.get("seed"), Some("42"));
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = read_meta("/nonexistent/dir/meta.txt").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/meta.txt"));
    }
}
