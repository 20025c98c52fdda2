//! Instance construction from command-line options, a config file, or a
//! serialized instance container.

use std::path::PathBuf;

use clap::Args;
use fista_core::problems::{
    make_diag_quadratic, make_linear_inverse, make_logistic, make_logistic_synthetic,
    make_pcp_synthetic, make_tridiag_lsq, parse_libsvm, standardize_features, BuiltInstance,
    LinearFamily,
};

use crate::formats;
use crate::CliError;

#[derive(Args, Debug, Clone, Default)]
pub struct InstanceOpts {
    /// Problem family: tridiag | linf | tv | lasso | logistic | pcp | quadratic
    #[arg(long)]
    pub family: Option<String>,
    /// Load a serialized instance container instead of generating one
    #[arg(long, conflicts_with = "family")]
    pub instance: Option<PathBuf>,
    /// LIBSVM text file for the logistic family
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Standardize dataset features to zero mean / unit variance
    #[arg(long)]
    pub standardize: bool,
    /// Rows (samples / measurements)
    #[arg(long)]
    pub m: Option<usize>,
    /// Columns (variables)
    #[arg(long)]
    pub n: Option<usize>,
    /// Structure count: saturated entries (linf), jumps (tv), nonzeros (lasso)
    #[arg(long)]
    pub structure: Option<usize>,
    /// Rank of the low-rank component (pcp)
    #[arg(long)]
    pub rank: Option<usize>,
    /// Number of sparse entries (pcp)
    #[arg(long)]
    pub sparse_count: Option<usize>,
    /// Observation noise level
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Regularization weight; family-specific default when omitted
    #[arg(long)]
    pub mu: Option<f64>,
    /// Nuclear norm weight (pcp)
    #[arg(long)]
    pub nu: Option<f64>,
    /// Condition number for the quadratic family (log-spaced spectrum)
    #[arg(long)]
    pub cond: Option<f64>,
    /// Generator seed
    #[arg(long)]
    pub seed: Option<u64>,
}

impl InstanceOpts {
    /// Fill unset fields from a parsed config map (flags win).
    pub fn merge_config(
        &mut self,
        map: &std::collections::BTreeMap<String, String>,
    ) -> Result<(), CliError> {
        fn fill<T: std::str::FromStr>(
            slot: &mut Option<T>,
            map: &std::collections::BTreeMap<String, String>,
            key: &str,
        ) -> Result<(), CliError> {
            if slot.is_none() {
                if let Some(v) = map.get(key) {
                    *slot =
                        Some(v.parse().map_err(|_| {
                            CliError::usage(format!("config {key}: bad value {v:?}"))
                        })?);
                }
            }
            Ok(())
        }
        fill(&mut self.family, map, "family")?;
        if self.instance.is_none() {
            if let Some(v) = map.get("instance") {
                self.instance = Some(PathBuf::from(v));
            }
        }
        if self.dataset.is_none() {
            if let Some(v) = map.get("dataset") {
                self.dataset = Some(PathBuf::from(v));
            }
        }
        if !self.standardize {
            if let Some(v) = map.get("standardize") {
                self.standardize = v == "true" || v == "1";
            }
        }
        fill(&mut self.m, map, "m")?;
        fill(&mut self.n, map, "n")?;
        fill(&mut self.structure, map, "structure")?;
        fill(&mut self.rank, map, "rank")?;
        fill(&mut self.sparse_count, map, "sparse-count")?;
        fill(&mut self.noise_sigma, map, "noise-sigma")?;
        fill(&mut self.mu, map, "mu")?;
        fill(&mut self.nu, map, "nu")?;
        fill(&mut self.cond, map, "cond")?;
        fill(&mut self.seed, map, "seed")?;
        Ok(())
    }

    /// Build the instance; returns it together with the seed recorded in the
    /// run summary.
    pub fn build(&self) -> Result<(BuiltInstance, u64), CliError> {
        if let Some(path) = &self.instance {
            if self.family.is_some() {
                return Err(CliError::usage(
                    "give either --instance or --family, not both",
                ));
            }
            return formats::read_instance(path);
        }
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| CliError::usage("no instance source: pass --family or --instance"))?;
        let seed = self.seed.unwrap_or(0);
        let numerical = |e: fista_core::problems::ProblemsError| CliError::numerical(e.to_string());
        let inst = match family {
            "tridiag" => make_tridiag_lsq(self.n.unwrap_or(201)),
            "linf" | "tv" | "lasso" => {
                let (fam, dm, dn, ds) = match family {
                    "linf" => (LinearFamily::LinfInverse, 1020, 1024, 32),
                    "tv" => (LinearFamily::TvInverse, 256, 1024, 32),
                    _ => (LinearFamily::Lasso, 32, 64, 8),
                };
                make_linear_inverse(
                    fam,
                    self.m.unwrap_or(dm),
                    self.n.unwrap_or(dn),
                    self.structure.unwrap_or(ds),
                    self.noise_sigma.unwrap_or(0.0),
                    self.mu,
                    seed,
                )
                .map_err(numerical)?
            }
            "logistic" => {
                let mu = self.mu.unwrap_or(1e-2);
                if let Some(path) = &self.dataset {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::usage(format!("reading {path:?}: {e}")))?;
                    let (mut features, labels) =
                        parse_libsvm(&text).map_err(|e| CliError::usage(e.to_string()))?;
                    if self.standardize {
                        standardize_features(&mut features);
                    }
                    make_logistic(features, labels, mu).map_err(numerical)?
                } else {
                    make_logistic_synthetic(self.m.unwrap_or(400), self.n.unwrap_or(200), mu, seed)
                        .map_err(numerical)?
                }
            }
            "pcp" => {
                let rows = self.m.unwrap_or(60);
                let cols = self.n.unwrap_or(60);
                let count = self.sparse_count.unwrap_or(rows * cols / 20);
                // Calibrated defaults: ν = 0.5 with the usual μ = ν/√max(m,n).
                let nu = self.nu.unwrap_or(0.5);
                let (inst, _, _) = make_pcp_synthetic(
                    rows,
                    cols,
                    self.rank.unwrap_or(2),
                    count,
                    self.mu.unwrap_or(nu / (rows.max(cols) as f64).sqrt()),
                    nu,
                    seed,
                )
                .map_err(numerical)?;
                inst
            }
            "quadratic" => {
                let n = self.n.unwrap_or(50);
                let cond = self.cond.unwrap_or(100.0);
                if cond < 1.0 {
                    return Err(CliError::usage("cond must be >= 1"));
                }
                // Log-spaced spectrum from 1/cond up to 1.
                let eigs: Vec<f64> = (0..n)
                    .map(|i| {
                        if n == 1 {
                            1.0
                        } else {
                            let t = i as f64 / (n as f64 - 1.0);
                            (t * cond.ln()).exp() / cond
                        }
                    })
                    .collect();
                make_diag_quadratic(&eigs).map_err(numerical)?
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown family {other:?} (tridiag, linf, tv, lasso, logistic, pcp, quadratic)"
                )))
            }
        };
        Ok((inst, seed))
    }
}

/// Starting point grammar: `zero`, `ones`, `const:V`, `axis:I` (unit vector
/// along coordinate I), `unit:SEED` (seeded Gaussian direction normalized to
/// unit length).
pub fn parse_x0(spec: Option<&str>, dim: usize) -> Result<Vec<f64>, CliError> {
    match spec.unwrap_or("zero") {
        "zero" => Ok(vec![0.0; dim]),
        "ones" => Ok(vec![1.0; dim]),
        other => {
            if let Some(v) = other.strip_prefix("const:") {
                let c: f64 = v
                    .parse()
                    .map_err(|_| CliError::usage("bad const x0 value"))?;
                Ok(vec![c; dim])
            } else if let Some(v) = other.strip_prefix("axis:") {
                let i: usize = v
                    .parse()
                    .map_err(|_| CliError::usage("bad axis x0 index"))?;
                if i >= dim {
                    return Err(CliError::usage(format!(
                        "axis index {i} out of range for dimension {dim}"
                    )));
                }
                let mut x = vec![0.0; dim];
                x[i] = 1.0;
                Ok(x)
            } else if let Some(v) = other.strip_prefix("unit:") {
                let seed: u64 = v.parse().map_err(|_| CliError::usage("bad unit x0 seed"))?;
                let mut rng = fista_core::rng::SplitMix64::new(seed);
                let mut x = rng.gaussian_vec(dim);
                let nrm = fista_core::linalg::norm(&x);
                for xi in x.iter_mut() {
                    *xi /= nrm;
                }
                Ok(x)
            } else {
                Err(CliError::usage(format!(
                    "bad x0 {other:?} (zero, ones, const:V, axis:I, unit:SEED)"
                )))
            }
        }
    }
}
