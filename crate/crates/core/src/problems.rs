//! Seeded generators for the experiment problem families, plus LIBSVM text
//! ingestion.
//!
//! Families:
//!
//! - tridiagonal least squares `½‖Ax‖²` (no regularizer, analytic spectrum);
//! - linear inverse problems `μR(x) + ½‖Kx − f‖²` with `K` a scaled Gaussian
//!   ensemble, `f = K·x_ob + w`, and `R ∈ {‖·‖∞, TV, ‖·‖₁}`;
//! - sparse logistic regression `μ‖x‖₁ + (1/m) Σ log(1 + e^{−lᵢ hᵢᵀx})`;
//! - principal component pursuit in its Moreau-envelope form
//!   `¹(μ‖·‖₁)(f − x_l) + ν‖x_l‖_*`, whose smooth part has `L = 1` exactly;
//! - a diagonal quadratic with a prescribed spectrum, used by contraction
//!   and safeguard tests.
//!
//! Every generator draws from a single [`crate::rng::SplitMix64`]
//! stream in a documented order, so identical `(recipe, seed)` pairs produce
//! byte-identical instances.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::linalg::{power_iteration, svd, DenseMatrix};
use crate::num;
use crate::problem::{GradOracle, ProblemSpec, ProxOracle, ValueOracle};
use crate::prox;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemsError {
    /// LIBSVM text problem at a 1-based line.
    Parse {
        line: usize,
        message: String,
    },
    /// A label other than {−1, 0, +1}.
    BadLabel {
        line: usize,
        value: f64,
    },
    /// Power iteration for the Lipschitz constant did not converge.
    LipschitzEstimation,
    Invalid(String),
}

impl core::fmt::Display for ProblemsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProblemsError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ProblemsError::BadLabel { line, value } => {
                write!(f, "line {line}: label {value} not in {{-1, 0, +1}}")
            }
            ProblemsError::LipschitzEstimation => {
                write!(
                    f,
                    "power iteration for the Lipschitz constant did not converge"
                )
            }
            ProblemsError::Invalid(s) => write!(f, "{s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProblemsError {}

/// Which regularizer a linear inverse instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearFamily {
    /// `R = ‖·‖∞`, sign-saturated ground truth.
    LinfInverse,
    /// `R = Σ|x_{i+1} − x_i|`, piecewise-constant ground truth.
    TvInverse,
    /// `R = ‖·‖₁`, sparse ground truth.
    Lasso,
}

impl LinearFamily {
    pub fn tag(self) -> &'static str {
        match self {
            LinearFamily::LinfInverse => "linf",
            LinearFamily::TvInverse => "tv",
            LinearFamily::Lasso => "lasso",
        }
    }
}

/// Generation parameters for one instance; together with a seed this fully
/// determines the instance.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceRecipe {
    TridiagLsq {
        n: usize,
    },
    LinearInverse {
        family: LinearFamily,
        m: usize,
        n: usize,
        /// Saturated entries (ℓ∞), jumps (TV) or nonzeros (lasso).
        structure: usize,
        noise_sigma: f64,
        /// `None` selects the calibrated default `0.1·‖Kᵀf‖∞`.
        mu: Option<f64>,
    },
    LogisticSynthetic {
        m: usize,
        n: usize,
        mu: f64,
    },
    PcpSynthetic {
        rows: usize,
        cols: usize,
        rank: usize,
        sparse_count: usize,
        mu: f64,
        nu: f64,
    },
}

/// Raw arrays behind a built instance, kept for serialization and ground
/// truth comparisons. Matrices are shared with the oracle closures.
#[derive(Debug, Clone)]
pub enum InstanceData {
    Tridiag {
        n: usize,
    },
    LinearInverse {
        family: LinearFamily,
        k_mat: Arc<DenseMatrix>,
        f: Arc<Vec<f64>>,
        x_ob: Vec<f64>,
        mu: f64,
    },
    Logistic {
        features: Arc<DenseMatrix>,
        labels: Arc<Vec<f64>>,
        mu: f64,
    },
    Pcp {
        f: Arc<DenseMatrix>,
        mu: f64,
        nu: f64,
    },
    Quadratic {
        eigenvalues: Vec<f64>,
    },
}

/// A generated problem instance: the oracle bundle, the data it was built
/// from, and (when meaningful) the generating ground truth.
pub struct BuiltInstance {
    pub problem: ProblemSpec,
    pub data: InstanceData,
    pub ground_truth: Option<Vec<f64>>,
}

fn tridiag_apply(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = 2.0 * v[i];
        if i > 0 {
            acc -= v[i - 1];
        }
        if i + 1 < n {
            acc -= v[i + 1];
        }
        out.push(acc);
    }
    out
}

/// `F(x) = ½‖Ax‖²` with the tridiagonal `A` (2 diagonal, −1 off), `R = 0`.
/// The spectrum is analytic, the unique minimizer is 0.
pub fn make_tridiag_lsq(n: usize) -> BuiltInstance {
    assert!(n >= 1);
    let model = crate::spectral::tridiag_spectrum(n);
    let grad: GradOracle =
        alloc::boxed::Box::new(move |x: &[f64]| tridiag_apply(&tridiag_apply(x)));
    let eval_f: ValueOracle = alloc::boxed::Box::new(move |x: &[f64]| {
        let ax = tridiag_apply(x);
        0.5 * crate::linalg::dot(&ax, &ax)
    });
    let prox_r: ProxOracle = alloc::boxed::Box::new(|z: &[f64], _g| z.to_vec());
    let eval_r: ValueOracle = alloc::boxed::Box::new(|_| 0.0);
    BuiltInstance {
        problem: ProblemSpec {
            grad_f: grad,
            prox_r,
            eval_f,
            eval_r,
            lipschitz: model.lipschitz,
            strong_convexity: model.alpha,
            dimension: n,
        },
        data: InstanceData::Tridiag { n },
        ground_truth: Some(alloc::vec![0.0; n]),
    }
}

/// Diagonal quadratic `F = ½ Σ λᵢ xᵢ²` with the given positive spectrum,
/// `R = 0`; minimizer 0. Used by contraction and safeguard experiments.
pub fn make_diag_quadratic(eigenvalues: &[f64]) -> Result<BuiltInstance, ProblemsError> {
    if eigenvalues.is_empty() || eigenvalues.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(ProblemsError::Invalid(String::from(
            "eigenvalues must be positive and finite",
        )));
    }
    let lipschitz = eigenvalues.iter().cloned().fold(f64::MIN, num::max);
    let alpha = eigenvalues.iter().cloned().fold(f64::MAX, num::min);
    let eigs = eigenvalues.to_vec();
    let eigs_grad = eigs.clone();
    let eigs_eval = eigs.clone();
    let n = eigs.len();
    Ok(BuiltInstance {
        problem: ProblemSpec {
            grad_f: alloc::boxed::Box::new(move |x: &[f64]| {
                x.iter().zip(&eigs_grad).map(|(xi, li)| li * xi).collect()
            }),
            prox_r: alloc::boxed::Box::new(|z: &[f64], _| z.to_vec()),
            eval_f: alloc::boxed::Box::new(move |x: &[f64]| {
                0.5 * x
                    .iter()
                    .zip(&eigs_eval)
                    .map(|(xi, li)| li * xi * xi)
                    .sum::<f64>()
            }),
            eval_r: alloc::boxed::Box::new(|_| 0.0),
            lipschitz,
            strong_convexity: alpha,
            dimension: n,
        },
        data: InstanceData::Quadratic { eigenvalues: eigs },
        ground_truth: Some(alloc::vec![0.0; n]),
    })
}

/// Rebuild a linear inverse instance from explicit arrays (deserialization
/// path); the Lipschitz constant is re-estimated by power iteration.
pub fn make_linear_inverse_from_parts(
    family: LinearFamily,
    k_mat: DenseMatrix,
    f: Vec<f64>,
    x_ob: Vec<f64>,
    mu: f64,
) -> Result<BuiltInstance, ProblemsError> {
    if k_mat.rows != f.len() || k_mat.cols != x_ob.len() {
        return Err(ProblemsError::Invalid(String::from(
            "array shapes disagree",
        )));
    }
    if mu <= 0.0 || mu.is_nan() {
        return Err(ProblemsError::Invalid(String::from("mu must be positive")));
    }
    assemble_linear_inverse(family, Arc::new(k_mat), Arc::new(f), x_ob, mu)
}

fn assemble_linear_inverse(
    family: LinearFamily,
    k_mat: Arc<DenseMatrix>,
    f: Arc<Vec<f64>>,
    x_ob: Vec<f64>,
    mu: f64,
) -> Result<BuiltInstance, ProblemsError> {
    let n = k_mat.cols;
    let km = k_mat.clone();
    let lipschitz = power_iteration(n, move |v| km.matvec_t(&km.matvec(v)), 1e-9, 100_000, 0)
        .map_err(|_| ProblemsError::LipschitzEstimation)?;

    let km_g = k_mat.clone();
    let f_g = f.clone();
    let grad: GradOracle = alloc::boxed::Box::new(move |x: &[f64]| {
        let mut r = km_g.matvec(x);
        for (ri, fi) in r.iter_mut().zip(f_g.iter()) {
            *ri -= fi;
        }
        km_g.matvec_t(&r)
    });
    let km_e = k_mat.clone();
    let f_e = f.clone();
    let eval_f: ValueOracle = alloc::boxed::Box::new(move |x: &[f64]| {
        let r = km_e.matvec(x);
        0.5 * r
            .iter()
            .zip(f_e.iter())
            .map(|(ri, fi)| (ri - fi) * (ri - fi))
            .sum::<f64>()
    });
    let (prox_r, eval_r): (ProxOracle, ValueOracle) = match family {
        LinearFamily::LinfInverse => (
            alloc::boxed::Box::new(move |z: &[f64], g: f64| prox::prox_linf(z, g * mu)),
            alloc::boxed::Box::new(move |x: &[f64]| {
                mu * x.iter().map(|v| num::abs(*v)).fold(0.0, num::max)
            }),
        ),
        LinearFamily::TvInverse => (
            alloc::boxed::Box::new(move |z: &[f64], g: f64| prox::prox_tv1d(z, g * mu)),
            alloc::boxed::Box::new(move |x: &[f64]| {
                mu * x.windows(2).map(|w| num::abs(w[1] - w[0])).sum::<f64>()
            }),
        ),
        LinearFamily::Lasso => (
            alloc::boxed::Box::new(move |z: &[f64], g: f64| prox::prox_l1(z, g * mu)),
            alloc::boxed::Box::new(move |x: &[f64]| {
                mu * x.iter().map(|v| num::abs(*v)).sum::<f64>()
            }),
        ),
    };

    Ok(BuiltInstance {
        problem: ProblemSpec {
            grad_f: grad,
            prox_r,
            eval_f,
            eval_r,
            lipschitz,
            strong_convexity: 0.0,
            dimension: n,
        },
        data: InstanceData::LinearInverse {
            family,
            k_mat,
            f,
            x_ob: x_ob.clone(),
            mu,
        },
        ground_truth: Some(x_ob),
    })
}

/// Draw order: K row-major, then x_ob (with its structure indices), then the
/// noise vector.
pub fn make_linear_inverse(
    family: LinearFamily,
    m: usize,
    n: usize,
    structure: usize,
    noise_sigma: f64,
    mu: Option<f64>,
    seed: u64,
) -> Result<BuiltInstance, ProblemsError> {
    if m == 0 || n == 0 {
        return Err(ProblemsError::Invalid(String::from(
            "dimensions must be positive",
        )));
    }
    if structure > n {
        return Err(ProblemsError::Invalid(String::from(
            "structure count exceeds the dimension",
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let scale = 1.0 / num::sqrt(m as f64);
    let mut kdata = rng.gaussian_vec(m * n);
    for v in kdata.iter_mut() {
        *v *= scale;
    }
    let k_mat = Arc::new(DenseMatrix::from_data(m, n, kdata));

    let x_ob = match family {
        LinearFamily::LinfInverse => {
            // Entries uniform in ±0.9, `structure` of them saturated at ±1.
            let mut x: Vec<f64> = (0..n).map(|_| 1.8 * rng.next_f64() - 0.9).collect();
            let idx = rng.distinct_indices(structure, n);
            for i in idx {
                x[i] = if rng.next_f64() < 0.5 { 1.0 } else { -1.0 };
            }
            x
        }
        LinearFamily::TvInverse => {
            // Piecewise constant with `structure` jumps.
            let mut breaks = rng.distinct_indices(structure, n.saturating_sub(1));
            breaks.sort_unstable();
            let mut x = Vec::with_capacity(n);
            let mut level = rng.next_gaussian();
            let mut next_break = 0;
            for i in 0..n {
                if next_break < breaks.len() && i == breaks[next_break] + 1 {
                    level = rng.next_gaussian();
                    next_break += 1;
                }
                x.push(level);
            }
            x
        }
        LinearFamily::Lasso => {
            let mut x = alloc::vec![0.0; n];
            let idx = rng.distinct_indices(structure, n);
            for i in idx {
                x[i] = rng.next_gaussian();
            }
            x
        }
    };

    let mut f = k_mat.matvec(&x_ob);
    if noise_sigma > 0.0 {
        for fi in f.iter_mut() {
            *fi += noise_sigma * rng.next_gaussian();
        }
    }
    let f = Arc::new(f);

    let ktf = k_mat.matvec_t(&f);
    let mu = mu.unwrap_or_else(|| 0.1 * ktf.iter().map(|v| num::abs(*v)).fold(0.0, num::max));
    if mu <= 0.0 || mu.is_nan() {
        return Err(ProblemsError::Invalid(String::from(
            "mu must end up positive",
        )));
    }
    assemble_linear_inverse(family, k_mat, f, x_ob, mu)
}

/// Sparse logistic regression from an explicit design matrix and ±1 labels:
/// `μ‖x‖₁ + (1/m) Σ log(1 + e^{−lᵢ hᵢᵀx})`, `L = ‖H‖²/(4m)`.
pub fn make_logistic(
    features: DenseMatrix,
    labels: Vec<f64>,
    mu: f64,
) -> Result<BuiltInstance, ProblemsError> {
    let m = features.rows;
    let n = features.cols;
    if labels.len() != m {
        return Err(ProblemsError::Invalid(format!(
            "{} labels for {m} rows",
            labels.len()
        )));
    }
    if mu <= 0.0 || !mu.is_finite() {
        return Err(ProblemsError::Invalid(String::from("mu must be positive")));
    }
    for (i, l) in labels.iter().enumerate() {
        if *l != 1.0 && *l != -1.0 {
            return Err(ProblemsError::BadLabel {
                line: i + 1,
                value: *l,
            });
        }
    }
    let features = Arc::new(features);
    let labels = Arc::new(labels);

    let ff = features.clone();
    let lipschitz = power_iteration(n, move |v| ff.matvec_t(&ff.matvec(v)), 1e-9, 100_000, 0)
        .map_err(|_| ProblemsError::LipschitzEstimation)?
        / (4.0 * m as f64);

    let fg = features.clone();
    let lg = labels.clone();
    let grad: GradOracle = alloc::boxed::Box::new(move |x: &[f64]| {
        let u = fg.matvec(x);
        let mut out = alloc::vec![0.0; x.len()];
        for i in 0..fg.rows {
            // σ(−l·u) computed stably for either sign.
            let z = -lg[i] * u[i];
            let sig = if z >= 0.0 {
                1.0 / (1.0 + num::exp(-z))
            } else {
                let e = num::exp(z);
                e / (1.0 + e)
            };
            let w = -lg[i] * sig / fg.rows as f64;
            let row = fg.row(i);
            for j in 0..out.len() {
                out[j] += w * row[j];
            }
        }
        out
    });
    let fe = features.clone();
    let le = labels.clone();
    let eval_f: ValueOracle = alloc::boxed::Box::new(move |x: &[f64]| {
        let u = fe.matvec(x);
        let mut acc = 0.0;
        for i in 0..fe.rows {
            let z = -le[i] * u[i];
            // log(1 + e^z) without overflow.
            acc += if z > 0.0 {
                z + num::log1p(num::exp(-z))
            } else {
                num::log1p(num::exp(z))
            };
        }
        acc / fe.rows as f64
    });
    let prox_r: ProxOracle =
        alloc::boxed::Box::new(move |z: &[f64], g: f64| prox::prox_l1(z, g * mu));
    let eval_r: ValueOracle =
        alloc::boxed::Box::new(move |x: &[f64]| mu * x.iter().map(|v| num::abs(*v)).sum::<f64>());

    Ok(BuiltInstance {
        problem: ProblemSpec {
            grad_f: grad,
            prox_r,
            eval_f,
            eval_r,
            lipschitz,
            strong_convexity: 0.0,
            dimension: n,
        },
        data: InstanceData::Logistic {
            features,
            labels,
            mu,
        },
        ground_truth: None,
    })
}

/// Synthetic binary classification: Gaussian features, a sparse hyperplane,
/// labels by its sign. Draw order: features row-major, then the hyperplane
/// support and values.
pub fn make_logistic_synthetic(
    m: usize,
    n: usize,
    mu: f64,
    seed: u64,
) -> Result<BuiltInstance, ProblemsError> {
    let mut rng = SplitMix64::new(seed);
    let features = DenseMatrix::from_data(m, n, rng.gaussian_vec(m * n));
    let support = rng.distinct_indices((n / 10).max(1), n);
    let mut w = alloc::vec![0.0; n];
    for i in support {
        w[i] = rng.next_gaussian();
    }
    let labels: Vec<f64> = (0..m)
        .map(|i| {
            let u = crate::linalg::dot(features.row(i), &w);
            if u >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    make_logistic(features, labels, mu)
}

/// Principal component pursuit on the low-rank variable `x_l` (flattened
/// row-major): smooth part is the index-1 Moreau envelope of `μ‖·‖₁`
/// evaluated at `f − x_l` (so `L = 1` exactly), regularizer `ν‖·‖_*`.
pub fn make_pcp(f: DenseMatrix, mu: f64, nu: f64) -> Result<BuiltInstance, ProblemsError> {
    if mu <= 0.0 || nu <= 0.0 {
        return Err(ProblemsError::Invalid(String::from(
            "mu and nu must be positive",
        )));
    }
    let rows = f.rows;
    let cols = f.cols;
    let dim = rows * cols;
    let f = Arc::new(f);

    let fg = f.clone();
    let grad: GradOracle = alloc::boxed::Box::new(move |xl: &[f64]| {
        let diff: Vec<f64> = fg.data.iter().zip(xl).map(|(fi, li)| fi - li).collect();
        let g = prox::moreau_env_grad_l1(&diff, mu);
        g.iter().map(|v| -v).collect()
    });
    let fe = f.clone();
    let eval_f: ValueOracle = alloc::boxed::Box::new(move |xl: &[f64]| {
        let diff: Vec<f64> = fe.data.iter().zip(xl).map(|(fi, li)| fi - li).collect();
        let z = prox::prox_l1(&diff, mu);
        let mut acc = 0.0;
        for i in 0..diff.len() {
            let r = diff[i] - z[i];
            acc += 0.5 * r * r + mu * num::abs(z[i]);
        }
        acc
    });
    let prox_r: ProxOracle = alloc::boxed::Box::new(move |z: &[f64], g: f64| {
        let zm = DenseMatrix::from_data(rows, cols, z.to_vec());
        prox::prox_nuclear(&zm, g * nu).data
    });
    let eval_r: ValueOracle = alloc::boxed::Box::new(move |xl: &[f64]| {
        let zm = DenseMatrix::from_data(rows, cols, xl.to_vec());
        nu * svd(&zm).singular.iter().sum::<f64>()
    });

    Ok(BuiltInstance {
        problem: ProblemSpec {
            grad_f: grad,
            prox_r,
            eval_f,
            eval_r,
            lipschitz: 1.0,
            strong_convexity: 0.0,
            dimension: dim,
        },
        data: InstanceData::Pcp { f, mu, nu },
        ground_truth: None,
    })
}

/// Companion extractor: the sparse component implied by a low-rank iterate,
/// `x_s = prox_{μ‖·‖₁}(f − x_l)`.
pub fn pcp_sparse_part(f: &DenseMatrix, x_l: &[f64], mu: f64) -> Vec<f64> {
    let diff: Vec<f64> = f.data.iter().zip(x_l).map(|(fi, li)| fi - li).collect();
    prox::prox_l1(&diff, mu)
}

/// Synthetic low-rank + sparse matrix. Draw order: the two rank factors,
/// then the sparse support, then the sparse values. Returns the instance and
/// the two ground-truth components (flattened row-major).
pub fn make_pcp_synthetic(
    rows: usize,
    cols: usize,
    rank: usize,
    sparse_count: usize,
    mu: f64,
    nu: f64,
    seed: u64,
) -> Result<(BuiltInstance, Vec<f64>, Vec<f64>), ProblemsError> {
    if rank == 0 || rank > rows.min(cols) {
        return Err(ProblemsError::Invalid(String::from("rank out of range")));
    }
    if sparse_count > rows * cols {
        return Err(ProblemsError::Invalid(String::from(
            "sparse count out of range",
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let g1 = DenseMatrix::from_data(rows, rank, rng.gaussian_vec(rows * rank));
    let g2 = DenseMatrix::from_data(cols, rank, rng.gaussian_vec(cols * rank));
    let scale = 1.0 / num::sqrt(rank as f64);
    let mut low = alloc::vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = 0.0;
            for r in 0..rank {
                acc += g1.get(i, r) * g2.get(j, r);
            }
            low[i * cols + j] = scale * acc;
        }
    }
    let mut sparse = alloc::vec![0.0; rows * cols];
    let idx = rng.distinct_indices(sparse_count, rows * cols);
    for i in idx {
        // Magnitudes in [1, 4] with random sign, clearly above the low-rank
        // entry scale.
        let mag = 1.0 + 3.0 * rng.next_f64();
        sparse[i] = if rng.next_f64() < 0.5 { mag } else { -mag };
    }
    let mut fdata = alloc::vec![0.0; rows * cols];
    for i in 0..rows * cols {
        fdata[i] = low[i] + sparse[i];
    }
    let inst = make_pcp(DenseMatrix::from_data(rows, cols, fdata), mu, nu)?;
    Ok((inst, low, sparse))
}

/// Parse LIBSVM sparse text: lines of `<label> <idx>:<val> ...` with 1-based
/// indices. Labels may follow the {−1,+1} or {0,1} convention (0 maps to
/// −1). Returns a dense matrix with zeros at absent indices.
pub fn parse_libsvm(text: &str) -> Result<(DenseMatrix, Vec<f64>), ProblemsError> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_idx = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| ProblemsError::Parse {
            line,
            message: format!("non-numeric label {label_tok:?}"),
        })?;
        let mapped = if label == 1.0 {
            1.0
        } else if label == -1.0 || label == 0.0 {
            -1.0
        } else {
            return Err(ProblemsError::BadLabel { line, value: label });
        };
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| ProblemsError::Parse {
                line,
                message: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| ProblemsError::Parse {
                line,
                message: format!("bad feature index {idx_s:?}"),
            })?;
            if idx == 0 {
                return Err(ProblemsError::Parse {
                    line,
                    message: String::from("feature indices are 1-based"),
                });
            }
            let val: f64 = val_s.parse().map_err(|_| ProblemsError::Parse {
                line,
                message: format!("bad feature value {val_s:?}"),
            })?;
            max_idx = max_idx.max(idx);
            entries.push((idx - 1, val));
        }
        labels.push(mapped);
        rows.push(entries);
    }
    let m = rows.len();
    let mut mat = DenseMatrix::zeros(m, max_idx);
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            mat.set(i, j, v);
        }
    }
    Ok((mat, labels))
}

/// Serialize to LIBSVM text (nonzero entries only, 1-based indices). Parsing
/// the output reproduces the matrix exactly.
pub fn write_libsvm(features: &DenseMatrix, labels: &[f64]) -> String {
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate().take(features.rows) {
        if *label >= 0.0 {
            out.push_str("+1");
        } else {
            out.push_str("-1");
        }
        for j in 0..features.cols {
            let v = features.get(i, j);
            if v != 0.0 {
                out.push_str(&format!(" {}:{}", j + 1, v));
            }
        }
        out.push('\n');
    }
    out
}

/// Optional per-feature standardization (zero mean, unit variance) for
/// externally loaded datasets; constant features are left untouched.
pub fn standardize_features(features: &mut DenseMatrix) {
    let m = features.rows;
    for j in 0..features.cols {
        let mut mean = 0.0;
        for i in 0..m {
            mean += features.get(i, j);
        }
        mean /= m as f64;
        let mut var = 0.0;
        for i in 0..m {
            let d = features.get(i, j) - mean;
            var += d * d;
        }
        var /= m as f64;
        if var > 0.0 {
            let inv = 1.0 / num::sqrt(var);
            for i in 0..m {
                let v = features.get(i, j);
                features.set(i, j, (v - mean) * inv);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, norm};
    use crate::problem::{
        check_cocoercivity, check_descent_lemma, max_grad_fd_rel_error, objective,
    };

    #[test]
    fn tridiag_lsq_paper_constants() {
        let inst = make_tridiag_lsq(201);
        assert!((inst.problem.lipschitz / 16.0 - 1.0).abs() < 5e-3);
        assert!((inst.problem.strong_convexity / 5.85e-8 - 1.0).abs() < 5e-3);
        let zero = alloc::vec![0.0; 201];
        let g = (inst.problem.grad_f)(&zero);
        assert!(norm(&g) == 0.0);
        assert!(max_grad_fd_rel_error(&inst.problem, 10, 1.0, 7) <= 1e-6);
    }

    #[test]
    fn linear_inverse_determinism_and_checks() {
        for family in [
            LinearFamily::LinfInverse,
            LinearFamily::TvInverse,
            LinearFamily::Lasso,
        ] {
            let a = make_linear_inverse(family, 24, 16, 4, 0.01, None, 42).unwrap();
            let b = make_linear_inverse(family, 24, 16, 4, 0.01, None, 42).unwrap();
            match (&a.data, &b.data) {
                (
                    InstanceData::LinearInverse {
                        k_mat: ka,
                        f: fa,
                        x_ob: xa,
                        mu: mua,
                        ..
                    },
                    InstanceData::LinearInverse {
                        k_mat: kb,
                        f: fb,
                        x_ob: xb,
                        mu: mub,
                        ..
                    },
                ) => {
                    assert_eq!(ka.data, kb.data);
                    assert_eq!(fa.as_slice(), fb.as_slice());
                    assert_eq!(xa, xb);
                    assert_eq!(mua, mub);
                }
                _ => panic!("wrong data variant"),
            }
            assert!(check_cocoercivity(&a.problem, 100, 1.0, 1) >= -1e-10);
            assert!(check_descent_lemma(&a.problem, 100, 1.0, 2) >= -1e-10);
            assert!(max_grad_fd_rel_error(&a.problem, 5, 1.0, 3) <= 1e-6);
        }
    }

    #[test]
    fn linear_inverse_structures() {
        let inst =
            make_linear_inverse(LinearFamily::TvInverse, 8, 64, 5, 0.0, Some(0.1), 3).unwrap();
        let gt = inst.ground_truth.unwrap();
        let jumps = gt.windows(2).filter(|w| w[1] != w[0]).count();
        assert!((1..=5).contains(&jumps), "jumps {jumps}");
        let inst = make_linear_inverse(LinearFamily::Lasso, 8, 64, 5, 0.0, Some(0.1), 3).unwrap();
        let nnz = inst
            .ground_truth
            .unwrap()
            .iter()
            .filter(|v| **v != 0.0)
            .count();
        assert_eq!(nnz, 5);
        let inst =
            make_linear_inverse(LinearFamily::LinfInverse, 8, 64, 5, 0.0, Some(0.1), 3).unwrap();
        let gt = inst.ground_truth.unwrap();
        let maxmag = gt.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert_eq!(maxmag, 1.0);
        let sat = gt.iter().filter(|v| v.abs() == 1.0).count();
        assert_eq!(sat, 5);
    }

    #[test]
    fn power_iteration_lipschitz_close_to_dense_value() {
        let inst = make_linear_inverse(LinearFamily::Lasso, 20, 12, 3, 0.0, Some(0.1), 11).unwrap();
        let k = match &inst.data {
            InstanceData::LinearInverse { k_mat, .. } => k_mat.clone(),
            _ => unreachable!(),
        };
        let mut ktk = DenseMatrix::zeros(12, 12);
        for i in 0..12 {
            let mut e = alloc::vec![0.0; 12];
            e[i] = 1.0;
            let col = k.matvec_t(&k.matvec(&e));
            for (j, &v) in col.iter().enumerate() {
                ktk.set(j, i, v);
            }
        }
        let eigs = crate::linalg::symmetric_eigenvalues(&ktk);
        let top = eigs[11];
        assert!(inst.problem.lipschitz >= top * (1.0 - 1e-6));
        assert!(inst.problem.lipschitz <= top * (1.0 + 1e-6));
    }

    #[test]
    fn logistic_value_and_gradient() {
        // Single sample h = (1), l = +1.
        let h = DenseMatrix::from_data(1, 1, alloc::vec![1.0]);
        let inst = make_logistic(h, alloc::vec![1.0], 1e-2).unwrap();
        let f0 = (inst.problem.eval_f)(&[0.0]);
        assert!((f0 - num::ln(2.0)).abs() < 1e-15);
        let g0 = (inst.problem.grad_f)(&[0.0]);
        assert!((g0[0] + 0.5).abs() < 1e-15);
        // Multi-sample F(0) = log 2 regardless of data.
        let inst = make_logistic_synthetic(40, 12, 1e-2, 5).unwrap();
        let f0 = (inst.problem.eval_f)(&alloc::vec![0.0; 12]);
        assert!((f0 - num::ln(2.0)).abs() < 1e-12);
        assert!(max_grad_fd_rel_error(&inst.problem, 5, 0.5, 9) <= 1e-6);
        assert!(check_cocoercivity(&inst.problem, 200, 1.0, 13) >= -1e-10);
    }

    #[test]
    fn logistic_rejects_bad_labels() {
        let h = DenseMatrix::from_data(2, 1, alloc::vec![1.0, 2.0]);
        let err = make_logistic(h, alloc::vec![1.0, 3.0], 1e-2);
        assert!(matches!(err, Err(ProblemsError::BadLabel { line: 2, .. })));
    }

    #[test]
    fn pcp_zero_data_has_zero_solution() {
        let inst = make_pcp(DenseMatrix::zeros(4, 4), 0.5, 0.5).unwrap();
        let zero = alloc::vec![0.0; 16];
        assert_eq!(objective(&inst.problem, &zero).unwrap(), 0.0);
        let g = (inst.problem.grad_f)(&zero);
        assert!(norm(&g) == 0.0);
        assert_eq!(inst.problem.lipschitz, 1.0);
    }

    #[test]
    fn pcp_gradient_matches_finite_differences() {
        let mut rng = SplitMix64::new(31);
        let f = DenseMatrix::from_data(5, 4, rng.gaussian_vec(20));
        let inst = make_pcp(f, 0.4, 0.6).unwrap();
        assert!(max_grad_fd_rel_error(&inst.problem, 5, 1.0, 17) <= 1e-6);
        assert!(check_cocoercivity(&inst.problem, 200, 1.0, 19) >= -1e-10);
    }

    #[test]
    fn libsvm_parse_examples() {
        let (mat, labels) = parse_libsvm("+1 1:0.5 3:2\n").unwrap();
        assert_eq!(labels, alloc::vec![1.0]);
        assert_eq!(mat.rows, 1);
        assert_eq!(mat.cols, 3);
        assert_eq!(mat.row(0), &[0.5, 0.0, 2.0]);
        // Degenerate row: label only.
        let (mat, labels) = parse_libsvm("-1\n+1 2:1\n").unwrap();
        assert_eq!(labels, alloc::vec![-1.0, 1.0]);
        assert_eq!(mat.row(0), &[0.0, 0.0]);
        // {0,1} convention.
        let (_, labels) = parse_libsvm("0 1:1\n1 1:2\n").unwrap();
        assert_eq!(labels, alloc::vec![-1.0, 1.0]);
    }

    #[test]
    fn libsvm_parse_errors_carry_line_numbers() {
        let err = parse_libsvm("+1 1:0.5\nfoo 1:1\n");
        assert!(matches!(err, Err(ProblemsError::Parse { line: 2, .. })));
        let err = parse_libsvm("+1 1:0.5\n+1 0:1\n");
        assert!(matches!(err, Err(ProblemsError::Parse { line: 2, .. })));
        let err = parse_libsvm("+1 broken\n");
        assert!(matches!(err, Err(ProblemsError::Parse { line: 1, .. })));
        let err = parse_libsvm("2 1:1\n");
        assert!(matches!(err, Err(ProblemsError::BadLabel { line: 1, .. })));
    }

    #[test]
    fn libsvm_round_trip() {
        let mut rng = SplitMix64::new(77);
        let mut mat = DenseMatrix::zeros(6, 9);
        for _ in 0..20 {
            let i = rng.next_below(6);
            let j = rng.next_below(9);
            mat.set(i, j, rng.next_gaussian());
        }
        let labels: Vec<f64> = (0..6)
            .map(|_| if rng.next_f64() < 0.5 { 1.0 } else { -1.0 })
            .collect();
        let text = write_libsvm(&mat, &labels);
        let (back, back_labels) = parse_libsvm(&text).unwrap();
        assert_eq!(back_labels, labels);
        // Column count may shrink if trailing columns are all-zero.
        for i in 0..6 {
            for j in 0..9 {
                let v = if j < back.cols { back.get(i, j) } else { 0.0 };
                assert_eq!(v, mat.get(i, j));
            }
        }
    }

    #[test]
    fn standardization_normalizes_columns() {
        let mut rng = SplitMix64::new(123);
        let mut mat = DenseMatrix::from_data(50, 3, rng.gaussian_vec(150));
        for i in 0..50 {
            let v = mat.get(i, 1);
            mat.set(i, 1, 3.0 * v + 10.0);
        }
        standardize_features(&mut mat);
        for j in 0..3 {
            let mean: f64 = (0..50).map(|i| mat.get(i, j)).sum::<f64>() / 50.0;
            let var: f64 = (0..50).map(|i| (mat.get(i, j) - mean).powi(2)).sum::<f64>() / 50.0;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diag_quadratic_spectrum() {
        let inst = make_diag_quadratic(&[0.5, 2.0, 4.0]).unwrap();
        assert_eq!(inst.problem.lipschitz, 4.0);
        assert_eq!(inst.problem.strong_convexity, 0.5);
        let g = (inst.problem.grad_f)(&[1.0, 1.0, 1.0]);
        assert_eq!(g, alloc::vec![0.5, 2.0, 4.0]);
        assert!(dist(&g, &[0.5, 2.0, 4.0]) == 0.0);
    }
}
