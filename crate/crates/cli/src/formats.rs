//! On-disk formats: trace CSV, run summary JSON, reference-solution files,
//! the instance container, and the key=value config file.
//!
//! All float formatting uses Rust's shortest round-trip representation, so
//! identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use fista_core::linalg::DenseMatrix;
use fista_core::problem::RunTrace;
use fista_core::problems::{
    make_diag_quadratic, make_linear_inverse_from_parts, make_logistic, make_pcp, make_tridiag_lsq,
    BuiltInstance, InstanceData, LinearFamily,
};

use crate::CliError;

/// Shortest round-trip exponent notation; NaN prints as `nan` (constant
/// rules have no t_k).
fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

/// Render the trace CSV with the fixed header
/// `k,residual,obj,a_k,t_k,gamma,restarted[,dist_to_ref]`.
pub fn trace_csv(trace: &RunTrace, with_reference: bool) -> String {
    let mut out = String::new();
    if with_reference {
        out.push_str("k,residual,obj,a_k,t_k,gamma,restarted,dist_to_ref\n");
    } else {
        out.push_str("k,residual,obj,a_k,t_k,gamma,restarted\n");
    }
    for row in &trace.rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            row.k,
            fmt_f64(row.residual),
            fmt_f64(row.obj),
            fmt_f64(row.a),
            fmt_f64(row.t),
            fmt_f64(row.gamma),
            u8::from(row.restarted)
        );
        if with_reference {
            let _ = write!(out, ",{}", fmt_f64(row.dist_to_ref.unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

fn json_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        "null".into()
    }
}

/// Run summary with the fixed key set.
pub fn summary_json(trace: &RunTrace, final_obj: f64, seed: u64, preset: &str) -> String {
    format!(
        "{{\n  \"iterations\": {},\n  \"restarts\": {},\n  \"final_residual\": {},\n  \"final_obj\": {},\n  \"seed\": {},\n  \"preset\": \"{}\",\n  \"gamma_final\": {},\n  \"stop_reason\": \"{}\"\n}}\n",
        trace.iterations,
        trace.total_restarts,
        json_f64(trace.final_residual),
        json_f64(final_obj),
        seed,
        preset,
        json_f64(trace.final_gamma),
        trace.stop_reason.as_str()
    )
}

/// Reference solution file: a small text header, then one coordinate per
/// line in shortest round-trip notation.
pub fn write_reference(path: &Path, x: &[f64], residual: f64) -> Result<(), CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "# fista reference v1");
    let _ = writeln!(out, "dim={}", x.len());
    let _ = writeln!(out, "residual={residual:e}");
    for v in x {
        let _ = writeln!(out, "{v:e}");
    }
    fs::write(path, out).map_err(|e| CliError::usage(format!("writing {path:?}: {e}")))
}

pub fn read_reference(path: &Path) -> Result<(Vec<f64>, f64), CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::usage(format!("reading {path:?}: {e}")))?;
    let mut dim = None;
    let mut residual = f64::NAN;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(v) = line.strip_prefix("dim=") {
            dim = Some(
                v.parse::<usize>()
                    .map_err(|_| CliError::usage("bad dim field"))?,
            );
        } else if let Some(v) = line.strip_prefix("residual=") {
            residual = v
                .parse()
                .map_err(|_| CliError::usage("bad residual field"))?;
        } else {
            values.push(
                line.parse::<f64>()
                    .map_err(|_| CliError::usage("bad value line"))?,
            );
        }
    }
    if let Some(d) = dim {
        if d != values.len() {
            return Err(CliError::usage(format!(
                "reference dim {d} but {} values",
                values.len()
            )));
        }
    }
    Ok((values, residual))
}

/// Plain `key = value` config text; `#` starts a comment. Later keys win.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// Instance container: "FPI1", family tag, seed, dims, mu, nu, payload arrays
// (f64 little-endian).
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 4] = b"FPI1";

fn family_tag(data: &InstanceData) -> u8 {
    match data {
        InstanceData::Tridiag { .. } => 0,
        InstanceData::LinearInverse {
            family: LinearFamily::LinfInverse,
            ..
        } => 1,
        InstanceData::LinearInverse {
            family: LinearFamily::TvInverse,
            ..
        } => 2,
        InstanceData::LinearInverse {
            family: LinearFamily::Lasso,
            ..
        } => 3,
        InstanceData::Logistic { .. } => 4,
        InstanceData::Pcp { .. } => 5,
        InstanceData::Quadratic { .. } => 6,
    }
}

fn push_f64s(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn write_instance(path: &Path, inst: &BuiltInstance, seed: u64) -> Result<(), CliError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.push(family_tag(&inst.data));
    buf.extend_from_slice(&seed.to_le_bytes());
    let (m, n, mu, nu): (u64, u64, f64, f64) = match &inst.data {
        InstanceData::Tridiag { n } => (0, *n as u64, 0.0, 0.0),
        InstanceData::LinearInverse { k_mat, mu, .. } => {
            (k_mat.rows as u64, k_mat.cols as u64, *mu, 0.0)
        }
        InstanceData::Logistic { features, mu, .. } => {
            (features.rows as u64, features.cols as u64, *mu, 0.0)
        }
        InstanceData::Pcp { f, mu, nu } => (f.rows as u64, f.cols as u64, *mu, *nu),
        InstanceData::Quadratic { eigenvalues } => (0, eigenvalues.len() as u64, 0.0, 0.0),
    };
    buf.extend_from_slice(&m.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&mu.to_le_bytes());
    buf.extend_from_slice(&nu.to_le_bytes());
    match &inst.data {
        InstanceData::Tridiag { .. } => {}
        InstanceData::LinearInverse { k_mat, f, x_ob, .. } => {
            push_f64s(&mut buf, &k_mat.data);
            push_f64s(&mut buf, f);
            push_f64s(&mut buf, x_ob);
        }
        InstanceData::Logistic {
            features, labels, ..
        } => {
            push_f64s(&mut buf, &features.data);
            push_f64s(&mut buf, labels);
        }
        InstanceData::Pcp { f, .. } => push_f64s(&mut buf, &f.data),
        InstanceData::Quadratic { eigenvalues } => push_f64s(&mut buf, eigenvalues),
    }
    let mut file =
        fs::File::create(path).map_err(|e| CliError::usage(format!("creating {path:?}: {e}")))?;
    file.write_all(&buf)
        .map_err(|e| CliError::usage(format!("writing {path:?}: {e}")))
}

struct Reader {
    buf: Vec<u8>,
    pos: usize,
}

impl Reader {
    fn take(&mut self, n: usize) -> Result<&[u8], CliError> {
        if self.pos + n > self.buf.len() {
            return Err(CliError::usage("truncated instance file"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, CliError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CliError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>, CliError> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.f64()?);
        }
        Ok(out)
    }
}

/// Load an instance container; returns the rebuilt instance and its recorded
/// seed.
pub fn read_instance(path: &Path) -> Result<(BuiltInstance, u64), CliError> {
    let mut buf = Vec::new();
    fs::File::open(path)
        .map_err(|e| CliError::usage(format!("opening {path:?}: {e}")))?
        .read_to_end(&mut buf)
        .map_err(|e| CliError::usage(format!("reading {path:?}: {e}")))?;
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CliError::usage("not an instance file (bad magic)"));
    }
    let tag = r.take(1)?[0];
    let seed = r.u64()?;
    let m = r.u64()? as usize;
    let n = r.u64()? as usize;
    let mu = r.f64()?;
    let nu = r.f64()?;
    let problems_err = |e: fista_core::problems::ProblemsError| CliError::numerical(e.to_string());
    let inst = match tag {
        0 => make_tridiag_lsq(n),
        1..=3 => {
            let family = match tag {
                1 => LinearFamily::LinfInverse,
                2 => LinearFamily::TvInverse,
                _ => LinearFamily::Lasso,
            };
            let k = DenseMatrix::from_data(m, n, r.f64s(m * n)?);
            let f = r.f64s(m)?;
            let x_ob = r.f64s(n)?;
            make_linear_inverse_from_parts(family, k, f, x_ob, mu).map_err(problems_err)?
        }
        4 => {
            let features = DenseMatrix::from_data(m, n, r.f64s(m * n)?);
            let labels = r.f64s(m)?;
            make_logistic(features, labels, mu).map_err(problems_err)?
        }
        5 => {
            let f = DenseMatrix::from_data(m, n, r.f64s(m * n)?);
            make_pcp(f, mu, nu).map_err(problems_err)?
        }
        6 => {
            let eigs = r.f64s(n)?;
            make_diag_quadratic(&eigs).map_err(problems_err)?
        }
        other => return Err(CliError::usage(format!("unknown family tag {other}"))),
    };
    Ok((inst, seed))
}
