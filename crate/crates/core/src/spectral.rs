//! Spectral analysis of the inertial iteration on quadratic problems.
//!
//! For `F(x) = ½‖Ax‖²` the iteration is linear: stacking
//! `z_k = (x_k − x*, x_{k−1} − x*)` gives `z_{k+1} = M_k z_k` with
//! `M_k = [[(1+a_k)G, −a_k G], [I, 0]]` and `G = I − (1/L)AᵀA`. The modulus
//! of the leading eigenvalue of the 2×2 block attached to the smallest
//! Hessian eigenvalue determines the per-step contraction; its running
//! product is the envelope `E_{d,k}` that bounds `‖x_k − x*‖` up to a
//! constant. Comparing envelopes across momentum schedules quantifies the
//! lazy-start trade-off: slower momentum growth loses early but wins once
//! the coefficient passes the strongly-convex optimum `a*`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::num;
use crate::problem::RunTrace;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    InvalidParameter(String),
    InsufficientTrace { needed: usize, available: usize },
}

impl core::fmt::Display for SpectralError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpectralError::InvalidParameter(s) => write!(f, "invalid parameter: {s}"),
            SpectralError::InsufficientTrace { needed, available } => {
                write!(f, "trace has {available} usable rows, {needed} required")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SpectralError {}

/// Eigenvalue data of a quadratic's Hessian `AᵀA` plus derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    /// Eigenvalues of `AᵀA`, ascending, all positive.
    pub hessian_eigs: Vec<f64>,
    /// Largest eigenvalue (the gradient Lipschitz constant).
    pub lipschitz: f64,
    /// Smallest eigenvalue (the strong convexity modulus).
    pub alpha: f64,
    /// Leading eigenvalue of `G = I − (1/L)AᵀA`, i.e. `1 − α/L`.
    pub eta: f64,
    /// Optimal momentum `(1 − √(α/L))/(1 + √(α/L))`.
    pub a_star: f64,
    /// Best attainable contraction `1 − √(α/L)`.
    pub rho_star: f64,
    /// Condition number `L/α`.
    pub cond: f64,
}

impl SpectralModel {
    pub fn from_eigenvalues(mut eigs: Vec<f64>) -> Result<Self, SpectralError> {
        if eigs.is_empty() {
            return Err(SpectralError::InvalidParameter(String::from(
                "need at least one eigenvalue",
            )));
        }
        if eigs.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(SpectralError::InvalidParameter(String::from(
                "eigenvalues must be positive and finite",
            )));
        }
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let alpha = eigs[0];
        let lipschitz = eigs[eigs.len() - 1];
        let ratio = alpha / lipschitz;
        let s = num::sqrt(ratio);
        Ok(SpectralModel {
            hessian_eigs: eigs,
            lipschitz,
            alpha,
            eta: 1.0 - ratio,
            a_star: (1.0 - s) / (1.0 + s),
            rho_star: 1.0 - s,
            cond: lipschitz / alpha,
        })
    }
}

/// Model for `F(x) = ½‖Ax‖²` with the n×n tridiagonal `A` (2 on the
/// diagonal, −1 off). The eigenvalues are analytic:
/// `λ_j(AᵀA) = (2 − 2cos(jπ/(n+1)))²`.
pub fn tridiag_spectrum(n: usize) -> SpectralModel {
    assert!(n >= 1);
    let mut eigs = Vec::with_capacity(n);
    for j in 1..=n {
        let lam_a = 2.0 - 2.0 * num::cos(j as f64 * core::f64::consts::PI / (n as f64 + 1.0));
        eigs.push(lam_a * lam_a);
    }
    SpectralModel::from_eigenvalues(eigs).expect("analytic eigenvalues are positive")
}

/// Modulus of the leading eigenvalue of the per-mode 2×2 iteration block:
///
/// ```text
/// a ≤ a*:  ((1+a)η + √((1+a)²η² − 4aη)) / 2      (real regime)
/// a ≥ a*:  √(aη)                                  (complex regime)
/// ```
///
/// Minimized at `a = a*` where both branches equal `ρ* = 1 − √(α/L)`.
pub fn rho_magnitude(eta: f64, a: f64, a_star: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&eta) || eta == 0.0);
    debug_assert!((0.0..=1.0).contains(&a));
    if a <= a_star {
        let disc = (1.0 + a) * (1.0 + a) * eta * eta - 4.0 * a * eta;
        // Roundoff can push the discriminant barely negative at the switch.
        let disc = num::max(disc, 0.0);
        ((1.0 + a) * eta + num::sqrt(disc)) / 2.0
    } else {
        num::sqrt(a * eta)
    }
}

/// `ln E_{d,k}`: log of the envelope `∏_{i=1}^{k−1} |ρ(a_i)|` with
/// `a_i = (i−1)/(i+d)`, accumulated with compensated summation. The empty
/// product (`k = 1`) is 0. Accepts `d ≥ 2`.
pub fn envelope_log(d: f64, k: usize, model: &SpectralModel) -> f64 {
    assert!(d >= 2.0, "envelope requires d >= 2");
    assert!(k >= 1);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 1..k {
        let a = (i as f64 - 1.0) / (i as f64 + d);
        let rho = rho_magnitude(model.eta, a, model.a_star);
        if rho <= 0.0 {
            // Degenerate single-eigenvalue model: one zero factor kills the
            // whole product (and would poison the compensated sum).
            return f64::NEG_INFINITY;
        }
        let term = num::ln(rho);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// The envelope itself; underflows to 0 for very large `k`, so ratio
/// computations should go through [`envelope_log`].
pub fn envelope(d: f64, k: usize, model: &SpectralModel) -> f64 {
    num::exp(envelope_log(d, k, model))
}

/// Cumulative `ln E_{d,k}` for `k = 1..=k_max` in one pass.
pub fn envelope_log_sweep(d: f64, k_max: usize, model: &SpectralModel) -> Vec<f64> {
    assert!(d >= 2.0, "envelope requires d >= 2");
    assert!(k_max >= 1);
    let mut out = Vec::with_capacity(k_max);
    let mut sum = 0.0;
    let mut comp = 0.0;
    out.push(0.0);
    for i in 1..k_max {
        let a = (i as f64 - 1.0) / (i as f64 + d);
        let rho = rho_magnitude(model.eta, a, model.a_star);
        if rho <= 0.0 {
            sum = f64::NEG_INFINITY;
            comp = 0.0;
            out.push(sum);
            continue;
        }
        let term = num::ln(rho);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out.push(sum);
    }
    out
}

/// Crossover index: the first `k` with `a_k = (k−1)/(k+d) ≥ a*`, evaluated
/// through the closed form `⌊(1 + d·a*)/(1 − a*)⌋ + 1`.
pub fn k_eq(d: f64, a_star: f64) -> Result<u64, SpectralError> {
    if d < 2.0 || d.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "d must be >= 2",
        )));
    }
    if !(0.0..1.0).contains(&a_star) || a_star.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "a_star must lie in [0, 1[",
        )));
    }
    Ok(num::floor((1.0 + d * a_star) / (1.0 - a_star)) as u64 + 1)
}

/// Closed-form approximation of the accumulated contraction ratio between
/// the `d = 2` and `d = d_slow` schedules past the crossover:
///
/// ```text
/// R_k ≈ [ (2/(√C + 1)) · (k + d_slow)/(d_slow + 1) ]^((d_slow − 2)/2)
/// ```
///
/// For `d_slow = 20` this is `(2/(√C+1))⁹ ((k+20)/21)⁹`. The approximation
/// is stated for `k ≥ K_eq + 36`; below that the value is still returned
/// with `below_validity` set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioApprox {
    pub value: f64,
    pub below_validity: bool,
}

pub fn ratio_approx(cond: f64, k: u64, d_slow: f64) -> Result<RatioApprox, SpectralError> {
    if cond < 1.0 || cond.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "condition number must be >= 1",
        )));
    }
    if d_slow <= 2.0 || d_slow.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "d_slow must exceed 2",
        )));
    }
    let sqrt_c = num::sqrt(cond);
    let base = (2.0 / (sqrt_c + 1.0)) * ((k as f64 + d_slow) / (d_slow + 1.0));
    let exponent = (d_slow - 2.0) / 2.0;
    let value = num::exp(exponent * num::ln(base));
    let s = 1.0 / sqrt_c;
    let a_star = (1.0 - s) / (1.0 + s);
    let keq = k_eq(d_slow, a_star)?;
    Ok(RatioApprox {
        value,
        below_validity: k < keq + 36,
    })
}

/// Fitted law for the envelope-optimal `d` at a log10 target `tol ≤ −2`:
/// `d* = 10.75 + 4.6(−tol − 2 − shift)`; `shift ≥ 0` moves the law from
/// distance-to-solution targets to residual targets.
pub fn optimal_d_fit(tol: f64, shift: f64) -> Result<f64, SpectralError> {
    if tol > -2.0 || tol.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "tol must be <= -2",
        )));
    }
    if shift < 0.0 || shift.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "shift must be >= 0",
        )));
    }
    Ok(10.75 + 4.6 * (-tol - 2.0 - shift))
}

/// Continuous-time optimal damping for target accuracy `ε ∈ ]0,1[` given the
/// smallest Hessian eigenvalue: `ω = −2√λ₁·ln ε`, with companion `d = ω − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalDamping {
    pub omega: f64,
    pub d: f64,
}

pub fn optimal_damping(lambda1: f64, eps: f64) -> Result<OptimalDamping, SpectralError> {
    if lambda1 <= 0.0 || !lambda1.is_finite() {
        return Err(SpectralError::InvalidParameter(String::from(
            "lambda1 must be positive",
        )));
    }
    if eps <= 0.0 || eps >= 1.0 || eps.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "eps must lie in ]0, 1[",
        )));
    }
    let omega = -2.0 * num::sqrt(lambda1) * num::ln(eps);
    Ok(OptimalDamping {
        omega,
        d: omega - 1.0,
    })
}

/// Observed per-step contraction factor of `‖x_k − x*‖`: geometric mean of
/// consecutive ratios over the last `window` recorded rows that carry a
/// distance-to-reference, i.e. `(d_last/d_first)^(1/(k_last − k_first))`.
pub fn empirical_contraction(trace: &RunTrace, window: usize) -> Result<f64, SpectralError> {
    if window < 2 {
        return Err(SpectralError::InvalidParameter(String::from(
            "window must be >= 2",
        )));
    }
    let usable: Vec<(usize, f64)> = trace
        .rows
        .iter()
        .filter_map(|r| r.dist_to_ref.map(|d| (r.k, d)))
        .collect();
    if usable.len() < window {
        return Err(SpectralError::InsufficientTrace {
            needed: window,
            available: usable.len(),
        });
    }
    let tail = &usable[usable.len() - window..];
    let (k0, d0) = tail[0];
    let (k1, d1) = tail[tail.len() - 1];
    if d0 <= 0.0 || d1 <= 0.0 || d0.is_nan() || d1.is_nan() {
        return Err(SpectralError::InvalidParameter(String::from(
            "distances must be positive over the window",
        )));
    }
    Ok(num::exp(num::ln(d1 / d0) / (k1 - k0) as f64))
}
