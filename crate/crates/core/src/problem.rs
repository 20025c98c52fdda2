//! Problem abstraction, solver configuration and run traces.
//!
//! A [`ProblemSpec`] describes one instance of the composite problem
//! `min_x Φ(x) = F(x) + R(x)` through four referentially transparent oracles
//! (`∇F`, `prox_{γR}`, and the two objective pieces) plus the gradient
//! Lipschitz constant `L` and an optional strong convexity modulus `α`.
//! Solver variants own all mutable state, so a spec can be shared across
//! threads and runs replay exactly.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::{dist, dot, norm, sub};
use crate::num;
use crate::rng::SplitMix64;

pub type GradOracle = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ProxOracle = Box<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;
pub type ValueOracle = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One instance of the composite minimization problem.
pub struct ProblemSpec {
    /// Gradient of the smooth part `F`.
    pub grad_f: GradOracle,
    /// Proximity operator `prox_{γR}(z) = argmin_x γR(x) + ½‖x − z‖²`.
    pub prox_r: ProxOracle,
    /// Value of `F`.
    pub eval_f: ValueOracle,
    /// Value of `R`.
    pub eval_r: ValueOracle,
    /// Lipschitz constant of `∇F` (`L > 0`).
    pub lipschitz: f64,
    /// Strong convexity modulus of `F`; `0` when unknown or absent.
    pub strong_convexity: f64,
    /// Number of variables.
    pub dimension: usize,
}

impl ProblemSpec {
    /// Validate the scalar fields. Oracle correctness is checked statistically
    /// by [`check_cocoercivity`] / [`max_grad_fd_rel_error`] in test suites.
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.lipschitz <= 0.0 || !self.lipschitz.is_finite() {
            return Err(ProblemError::InvalidLipschitz(self.lipschitz));
        }
        if !(0.0..=self.lipschitz).contains(&self.strong_convexity) {
            return Err(ProblemError::InvalidStrongConvexity {
                alpha: self.strong_convexity,
                lipschitz: self.lipschitz,
            });
        }
        if self.dimension == 0 {
            return Err(ProblemError::ZeroDimension);
        }
        Ok(())
    }

    pub fn check_dimension(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.dimension {
            return Err(ProblemError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }
}

impl core::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("lipschitz", &self.lipschitz)
            .field("strong_convexity", &self.strong_convexity)
            .field("dimension", &self.dimension)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    DimensionMismatch { expected: usize, got: usize },
    InvalidLipschitz(f64),
    InvalidStrongConvexity { alpha: f64, lipschitz: f64 },
    ZeroDimension,
    Other(String),
}

impl core::fmt::Display for ProblemError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProblemError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            ProblemError::InvalidLipschitz(l) => {
                write!(f, "lipschitz constant must be positive, got {l}")
            }
            ProblemError::InvalidStrongConvexity { alpha, lipschitz } => write!(
                f,
                "strong convexity modulus {alpha} outside [0, L = {lipschitz}]"
            ),
            ProblemError::ZeroDimension => write!(f, "problem dimension must be positive"),
            ProblemError::Other(s) => write!(f, "{s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProblemError {}

/// `Φ(x) = F(x) + R(x)`.
pub fn objective(problem: &ProblemSpec, x: &[f64]) -> Result<f64, ProblemError> {
    problem.check_dimension(x)?;
    Ok((problem.eval_f)(x) + (problem.eval_r)(x))
}

/// How often trace rows are recorded.
///
/// `Auto` records every iterate up to 10⁴ and every 100th beyond, which keeps
/// million-iteration trace files small without losing the envelope shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceStride {
    #[default]
    Auto,
    Every(u32),
}

impl TraceStride {
    pub fn records(self, k: usize) -> bool {
        match self {
            TraceStride::Auto => k <= 10_000 || k.is_multiple_of(100),
            TraceStride::Every(n) => k.is_multiple_of(n.max(1) as usize),
        }
    }
}

/// Solver configuration shared by every variant.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Step size γ; `None` selects the default `1/L`. Hard cap `γ ≤ 2/L`;
    /// variants additionally validate their own admissible range.
    pub step_gamma: Option<f64>,
    pub max_iters: usize,
    /// Stop once `‖x_k − x_{k−1}‖ ≤ tol_residual`.
    pub tol_residual: f64,
    pub trace_stride: TraceStride,
    pub initial_point: Vec<f64>,
    /// Optional reference solution; when present every recorded row carries
    /// `‖x_k − x*‖` in [`TraceRow::dist_to_ref`].
    pub reference: Option<Vec<f64>>,
}

impl SolverConfig {
    pub fn new(initial_point: Vec<f64>) -> Self {
        Self {
            step_gamma: None,
            max_iters: 1000,
            tol_residual: 0.0,
            trace_stride: TraceStride::default(),
            initial_point,
            reference: None,
        }
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_residual = tol;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.step_gamma = Some(gamma);
        self
    }

    pub fn with_stride(mut self, stride: TraceStride) -> Self {
        self.trace_stride = stride;
        self
    }

    pub fn with_reference(mut self, reference: Vec<f64>) -> Self {
        self.reference = Some(reference);
        self
    }
}

/// One recorded iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// `‖x_k − x_{k−1}‖`.
    pub residual: f64,
    /// `Φ(x_k)`.
    pub obj: f64,
    /// Inertial coefficient used to build `y_k`.
    pub a: f64,
    /// `t_k` of the underlying recursion; NaN for constant-momentum rules.
    pub t: f64,
    pub gamma: f64,
    pub restarted: bool,
    /// `‖x_k − x*‖` when a reference solution was supplied.
    pub dist_to_ref: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
    NumericalFault,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIters => "max_iters",
            StopReason::NumericalFault => "numerical_fault",
        }
    }
}

/// Full record of one solver run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub final_point: Vec<f64>,
    pub iterations: usize,
    pub total_restarts: usize,
    pub final_residual: f64,
    pub final_gamma: f64,
    pub stop_reason: StopReason,
    /// Set when the run terminated while still using γ > 1/L (greedy scheme
    /// before its safeguard clamps the step).
    pub ended_above_base_step: bool,
}

impl RunTrace {
    /// First recorded iteration whose distance-to-reference is ≤ `tol`.
    pub fn first_k_within(&self, tol: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.dist_to_ref.map(|d| d <= tol).unwrap_or(false))
            .map(|r| r.k)
    }
}

/// Worst cocoercivity margin `⟨∇F(x)−∇F(y), x−y⟩ − (1/L)‖∇F(x)−∇F(y)‖²` over
/// sampled Gaussian pairs of scale `scale`; nonnegative (up to roundoff) when
/// `∇F` really is `L`-Lipschitz and `F` convex.
pub fn check_cocoercivity(problem: &ProblemSpec, pairs: usize, scale: f64, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let x: Vec<f64> = rng
            .gaussian_vec(problem.dimension)
            .iter()
            .map(|v| v * scale)
            .collect();
        let y: Vec<f64> = rng
            .gaussian_vec(problem.dimension)
            .iter()
            .map(|v| v * scale)
            .collect();
        let gx = (problem.grad_f)(&x);
        let gy = (problem.grad_f)(&y);
        let dg = sub(&gx, &gy);
        let dx = sub(&x, &y);
        let margin = dot(&dg, &dx) - dot(&dg, &dg) / problem.lipschitz;
        if margin < worst {
            worst = margin;
        }
    }
    worst
}

/// Worst descent-lemma margin
/// `F(y) + ⟨∇F(y), x−y⟩ + (L/2)‖x−y‖² − F(x)` over sampled pairs.
pub fn check_descent_lemma(problem: &ProblemSpec, pairs: usize, scale: f64, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let x: Vec<f64> = rng
            .gaussian_vec(problem.dimension)
            .iter()
            .map(|v| v * scale)
            .collect();
        let y: Vec<f64> = rng
            .gaussian_vec(problem.dimension)
            .iter()
            .map(|v| v * scale)
            .collect();
        let fy = (problem.eval_f)(&y);
        let fx = (problem.eval_f)(&x);
        let gy = (problem.grad_f)(&y);
        let dxy = sub(&x, &y);
        let margin = fy + dot(&gy, &dxy) + 0.5 * problem.lipschitz * dot(&dxy, &dxy) - fx;
        if margin < worst {
            worst = margin;
        }
    }
    worst
}

/// Largest relative error between `∇F` and central finite differences of
/// `F` over sampled points.
pub fn max_grad_fd_rel_error(problem: &ProblemSpec, points: usize, scale: f64, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let n = problem.dimension;
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| v * scale).collect();
        let g = (problem.grad_f)(&x);
        let mut fd = Vec::with_capacity(n);
        for i in 0..n {
            let h = 1e-6 * num::max(1.0, num::abs(x[i]));
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            fd.push(((problem.eval_f)(&xp) - (problem.eval_f)(&xm)) / (2.0 * h));
        }
        let err = dist(&g, &fd);
        let den = num::max(norm(&g), 1.0);
        worst = num::max(worst, err / den);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn half_sq_norm_problem(dim: usize, with_l1: bool) -> ProblemSpec {
        ProblemSpec {
            grad_f: Box::new(|x: &[f64]| x.to_vec()),
            prox_r: if with_l1 {
                Box::new(|z: &[f64], g: f64| crate::prox::prox_l1(z, g))
            } else {
                Box::new(|z: &[f64], _g: f64| z.to_vec())
            },
            eval_f: Box::new(|x: &[f64]| 0.5 * dot(x, x)),
            eval_r: if with_l1 {
                Box::new(|x: &[f64]| x.iter().map(|v| crate::num::abs(*v)).sum())
            } else {
                Box::new(|_x: &[f64]| 0.0)
            },
            lipschitz: 1.0,
            strong_convexity: 1.0,
            dimension: dim,
        }
    }

    #[test]
    fn objective_centered_quadratic_at_zero() {
        let p = half_sq_norm_problem(3, false);
        assert_eq!(objective(&p, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn objective_quadratic_plus_l1() {
        // F = ½‖x‖², R = ‖x‖₁ at x = (1, −1): 1 + 2 = 3.
        let p = half_sq_norm_problem(2, true);
        assert_eq!(objective(&p, &[1.0, -1.0]).unwrap(), 3.0);
    }

    #[test]
    fn objective_rejects_dimension_mismatch() {
        let p = half_sq_norm_problem(2, false);
        assert_eq!(
            objective(&p, &[1.0]),
            Err(ProblemError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn prox_of_zero_regularizer_is_identity() {
        let p = half_sq_norm_problem(4, false);
        let z = [1.0, -2.5, 0.0, 7.0];
        for gamma in [1e-3, 0.5, 1.0, 10.0] {
            assert_eq!((p.prox_r)(&z, gamma), z.to_vec());
        }
    }

    #[test]
    fn cocoercivity_and_descent_hold_for_quadratic() {
        let p = half_sq_norm_problem(5, false);
        assert!(check_cocoercivity(&p, 200, 3.0, 1) >= -1e-12);
        assert!(check_descent_lemma(&p, 200, 3.0, 2) >= -1e-12);
    }

    #[test]
    fn finite_difference_gradient_matches() {
        let p = half_sq_norm_problem(4, false);
        assert!(max_grad_fd_rel_error(&p, 20, 2.0, 3) <= 1e-6);
    }

    #[test]
    fn validate_rejects_bad_scalars() {
        let mut p = half_sq_norm_problem(2, false);
        p.lipschitz = -1.0;
        assert!(p.validate().is_err());
        p.lipschitz = 1.0;
        p.strong_convexity = 2.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn auto_stride_density() {
        let s = TraceStride::Auto;
        assert!(s.records(1));
        assert!(s.records(9_999));
        assert!(s.records(10_000));
        assert!(!s.records(10_001));
        assert!(s.records(10_100));
        assert!(s.records(1_000_000));
        let e = TraceStride::Every(7);
        assert!(e.records(14));
        assert!(!e.records(15));
    }

    #[test]
    fn stop_reason_strings() {
        assert_eq!(StopReason::Converged.as_str(), "converged");
        assert_eq!(StopReason::MaxIters.as_str(), "max_iters");
        assert_eq!(StopReason::NumericalFault.as_str(), "numerical_fault");
        let _ = vec![0u8];
    }

    #[test]
    fn problem_spec_is_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ProblemSpec>();
        assert_send_sync::<RunTrace>();
        assert_send_sync::<SolverConfig>();
    }
}
