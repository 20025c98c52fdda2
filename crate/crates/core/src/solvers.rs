//! The inertial forward–backward engine and its restart policies.
//!
//! One iteration is
//!
//! ```text
//! (t_k, a_k) = rule.next()
//! y_k     = x_k + a_k (x_k − x_{k−1})
//! x_{k+1} = prox_{γR}(y_k − γ ∇F(y_k))
//! ```
//!
//! after which the restart policy may fire on the gradient-mapping test
//! `⟨y_k − x_{k+1}, x_{k+1} − x_k⟩ ≥ 0`. On restart the momentum anchor is
//! set to the new iterate, so the next `a_k` multiplies a zero momentum
//! (`y = x`); policies additionally reset `t_k` and/or rescale the `r`
//! parameter of the `Mod` rule toward its strongly-convex optimum. The
//! greedy policy runs a constant unit momentum with `γ ∈ [1/L, 2/L[` and a
//! safeguard that shrinks `γ ← max(ξγ, 1/L)` whenever the residual grows
//! past `S·‖x₁ − x₀‖`, so `γ` never drops below `1/L`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::dist;
use crate::num;
use crate::problem::{ProblemError, ProblemSpec, RunTrace, SolverConfig, StopReason, TraceRow};
use crate::sequences::{InertialRule, SequenceError};

/// Restart factor: fixed, or calibrated on the first trigger as `a_k^(1/m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiMode {
    Fixed(f64),
    Auto { m: u32 },
}

impl XiMode {
    fn validate(&self) -> Result<(), SolveError> {
        match self {
            XiMode::Fixed(xi) => {
                if !(xi.is_finite() && *xi > 0.0 && *xi < 1.0) {
                    return Err(SolveError::InvalidPolicy(String::from(
                        "xi must lie in ]0, 1[",
                    )));
                }
            }
            XiMode::Auto { m } => {
                if *m == 0 {
                    return Err(SolveError::InvalidPolicy(String::from(
                        "auto-xi m must be >= 1",
                    )));
                }
            }
        }
        Ok(())
    }
}

/// What happens when the restart test fires (and, for `Greedy`, how the step
/// size is safeguarded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RestartPolicy {
    /// Plain run, no test.
    None,
    /// Reset `t_k` to its initial value and zero the momentum.
    Restart,
    /// Rescale `r ← ξ·r`, zero the momentum, keep `t_k`.
    RadaI { xi: XiMode },
    /// Rescale `r ← ξ·r`, reset `t_k`, zero the momentum.
    RadaII { xi: XiMode },
    /// Constant unit momentum with residual safeguard on the step size.
    Greedy { s: f64, xi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Problem(ProblemError),
    Sequence(SequenceError),
    InvalidPolicy(String),
    InvalidConfig(String),
    /// The rule/policy pair is rejected before the run starts.
    IncompatibleRulePolicy(String),
}

impl From<ProblemError> for SolveError {
    fn from(e: ProblemError) -> Self {
        SolveError::Problem(e)
    }
}

impl From<SequenceError> for SolveError {
    fn from(e: SequenceError) -> Self {
        SolveError::Sequence(e)
    }
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::Problem(e) => write!(f, "problem error: {e}"),
            SolveError::Sequence(e) => write!(f, "sequence error: {e}"),
            SolveError::InvalidPolicy(s) => write!(f, "invalid policy: {s}"),
            SolveError::InvalidConfig(s) => write!(f, "invalid config: {s}"),
            SolveError::IncompatibleRulePolicy(s) => write!(f, "incompatible rule/policy: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolveError {}

/// One forward–backward step `prox_{γR}(y − γ∇F(y))`.
pub fn fb_step(problem: &ProblemSpec, y: &[f64], gamma: f64) -> Vec<f64> {
    debug_assert!(gamma > 0.0);
    let grad = (problem.grad_f)(y);
    let mut shifted = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        shifted.push(y[i] - gamma * grad[i]);
    }
    (problem.prox_r)(&shifted, gamma)
}

/// Gradient-mapping restart test: `⟨y − x_next, x_next − x⟩ ≥ 0`.
pub fn restart_test(y: &[f64], x_next: &[f64], x: &[f64]) -> bool {
    debug_assert_eq!(y.len(), x_next.len());
    debug_assert_eq!(y.len(), x.len());
    let mut inner = 0.0;
    for i in 0..y.len() {
        inner += (y[i] - x_next[i]) * (x_next[i] - x[i]);
    }
    inner >= 0.0
}

/// Step-size safeguard: when `residual ≥ s·first_residual`, shrink
/// `γ ← max(ξγ, 1/L)`; otherwise leave it alone. Never returns below `1/L`.
pub fn safeguard(
    gamma: f64,
    residual: f64,
    first_residual: f64,
    s: f64,
    xi: f64,
    lipschitz: f64,
) -> f64 {
    if residual >= s * first_residual {
        num::max(xi * gamma, 1.0 / lipschitz)
    } else {
        gamma
    }
}

struct IterateState {
    x: Vec<f64>,
    x_prev: Vec<f64>,
    gamma: f64,
    first_residual: f64,
    restart_count: usize,
}

fn validate(
    problem: &ProblemSpec,
    rule: &InertialRule,
    policy: &RestartPolicy,
    config: &SolverConfig,
) -> Result<f64, SolveError> {
    problem.validate()?;
    problem.check_dimension(&config.initial_point)?;
    if let Some(reference) = &config.reference {
        problem.check_dimension(reference)?;
    }
    if config.max_iters == 0 {
        return Err(SolveError::InvalidConfig(String::from(
            "max_iters must be >= 1",
        )));
    }
    if config.tol_residual < 0.0 || config.tol_residual.is_nan() {
        return Err(SolveError::InvalidConfig(String::from(
            "tol_residual must be nonnegative",
        )));
    }
    let inv_l = 1.0 / problem.lipschitz;
    let gamma = config.step_gamma.unwrap_or(inv_l);
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(SolveError::InvalidConfig(String::from(
            "gamma must be positive",
        )));
    }
    if gamma > 2.0 * inv_l * (1.0 + 1e-12) {
        return Err(SolveError::InvalidConfig(String::from(
            "gamma exceeds the hard cap 2/L",
        )));
    }
    match policy {
        RestartPolicy::Greedy { s, xi } => {
            if !rule.is_constant() || rule.constant_value() != Some(1.0) {
                return Err(SolveError::IncompatibleRulePolicy(String::from(
                    "the greedy policy requires the constant rule with a = 1",
                )));
            }
            if !(s.is_finite() && *s > 0.0) {
                return Err(SolveError::InvalidPolicy(String::from(
                    "greedy S must be positive",
                )));
            }
            if !(xi.is_finite() && *xi > 0.0 && *xi < 1.0) {
                return Err(SolveError::InvalidPolicy(String::from(
                    "greedy xi must lie in ]0, 1[",
                )));
            }
            if gamma < inv_l * (1.0 - 1e-12) || gamma >= 2.0 * inv_l {
                return Err(SolveError::InvalidConfig(String::from(
                    "greedy requires gamma in [1/L, 2/L[",
                )));
            }
        }
        RestartPolicy::RadaI { xi } | RestartPolicy::RadaII { xi } => {
            xi.validate()?;
            if !rule.supports_r_scaling() {
                return Err(SolveError::IncompatibleRulePolicy(String::from(
                    "r-rescaling policies require the Mod rule",
                )));
            }
            if gamma > inv_l * (1.0 + 1e-12) {
                return Err(SolveError::InvalidConfig(String::from(
                    "t-recursion variants require gamma <= 1/L",
                )));
            }
        }
        RestartPolicy::None | RestartPolicy::Restart => {
            if !rule.is_constant() && gamma > inv_l * (1.0 + 1e-12) {
                return Err(SolveError::InvalidConfig(String::from(
                    "t-recursion variants require gamma <= 1/L",
                )));
            }
        }
    }
    Ok(gamma)
}

/// Run the inertial forward–backward iteration until the residual drops to
/// `tol_residual` or `max_iters` is reached. A non-finite iterate aborts the
/// run with the last good trace and a fault flag; incompatible rule/policy
/// pairs are rejected before the first step.
pub fn run(
    problem: &ProblemSpec,
    mut rule: InertialRule,
    policy: RestartPolicy,
    config: &SolverConfig,
) -> Result<RunTrace, SolveError> {
    let gamma0 = validate(problem, &rule, &policy, config)?;
    let n = problem.dimension;
    let inv_l = 1.0 / problem.lipschitz;

    let mut state = IterateState {
        x: config.initial_point.clone(),
        x_prev: config.initial_point.clone(),
        gamma: gamma0,
        first_residual: 0.0,
        restart_count: 0,
    };
    let mut auto_xi: Option<f64> = None;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut y = alloc::vec![0.0; n];
    let mut stop = StopReason::MaxIters;
    let mut last_residual = f64::NAN;
    let mut iterations = 0usize;

    for k in 1..=config.max_iters {
        let (t, a) = match rule.next_t() {
            Ok(pair) => pair,
            Err(SequenceError::NonFinite { .. }) => {
                stop = StopReason::NumericalFault;
                break;
            }
            Err(e) => return Err(e.into()),
        };
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = state.x[i] + a * (state.x[i] - state.x_prev[i]);
        }
        let gamma_used = state.gamma;
        let x_next = fb_step(problem, &y, gamma_used);
        let residual = dist(&x_next, &state.x);

        // Guard against a poisoned iterate before it becomes the state. The
        // residual picks up most non-finite entries; the full scan runs
        // sparsely.
        let poisoned = !residual.is_finite()
            || (k.is_multiple_of(100) && x_next.iter().any(|v| !v.is_finite()));
        if poisoned {
            stop = StopReason::NumericalFault;
            break;
        }
        iterations = k;
        last_residual = residual;

        if k == 1 {
            state.first_residual = residual;
        }

        let mut restarted = false;
        match policy {
            RestartPolicy::None => {}
            RestartPolicy::Restart => {
                if restart_test(&y, &x_next, &state.x) {
                    rule.reset();
                    restarted = true;
                }
            }
            RestartPolicy::RadaI { xi } | RestartPolicy::RadaII { xi } => {
                if restart_test(&y, &x_next, &state.x) {
                    let factor = match xi {
                        XiMode::Fixed(v) => v,
                        XiMode::Auto { m } => *auto_xi.get_or_insert_with(|| {
                            // ξ = a_k^(1/m) at the first trigger; fall back
                            // when the trigger fires while a_k is still 0.
                            if a > 0.0 {
                                num::exp(num::ln(a) / m as f64)
                            } else {
                                0.96
                            }
                        }),
                    };
                    rule.scale_r(factor);
                    if matches!(policy, RestartPolicy::RadaII { .. }) {
                        rule.reset();
                    }
                    restarted = true;
                }
            }
            RestartPolicy::Greedy { s, xi } => {
                if restart_test(&y, &x_next, &state.x) {
                    restarted = true;
                }
                if k >= 2 {
                    state.gamma = safeguard(
                        state.gamma,
                        residual,
                        state.first_residual,
                        s,
                        xi,
                        problem.lipschitz,
                    );
                }
            }
        }
        if restarted {
            state.restart_count += 1;
        }

        // Momentum anchor: equal to the new iterate after a restart so the
        // next momentum term vanishes.
        if restarted {
            state.x_prev = x_next.clone();
        } else {
            state.x_prev = core::mem::take(&mut state.x);
        }
        state.x = x_next;

        let converged = residual <= config.tol_residual;
        if config.trace_stride.records(k) || converged || k == config.max_iters {
            let obj = (problem.eval_f)(&state.x) + (problem.eval_r)(&state.x);
            let dist_to_ref = config.reference.as_ref().map(|r| dist(&state.x, r));
            rows.push(TraceRow {
                k,
                residual,
                obj,
                a,
                t,
                gamma: gamma_used,
                restarted,
                dist_to_ref,
            });
        }
        if converged {
            stop = StopReason::Converged;
            break;
        }
    }

    Ok(RunTrace {
        final_point: state.x,
        iterations,
        total_restarts: state.restart_count,
        final_residual: last_residual,
        final_gamma: state.gamma,
        stop_reason: stop,
        ended_above_base_step: state.gamma > inv_l * (1.0 + 1e-12),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::problem::TraceStride;
    use alloc::boxed::Box;
    use alloc::vec;

    fn quadratic_problem() -> ProblemSpec {
        // F = ½‖x‖², L = α = 1, minimizer 0.
        ProblemSpec {
            grad_f: Box::new(|x: &[f64]| x.to_vec()),
            prox_r: Box::new(|z: &[f64], _g| z.to_vec()),
            eval_f: Box::new(|x: &[f64]| 0.5 * dot(x, x)),
            eval_r: Box::new(|_| 0.0),
            lipschitz: 1.0,
            strong_convexity: 1.0,
            dimension: 2,
        }
    }

    fn lasso_1d() -> ProblemSpec {
        // F = ½(x−2)², R = |x|.
        ProblemSpec {
            grad_f: Box::new(|x: &[f64]| vec![x[0] - 2.0]),
            prox_r: Box::new(|z: &[f64], g| crate::prox::prox_l1(z, g)),
            eval_f: Box::new(|x: &[f64]| 0.5 * (x[0] - 2.0) * (x[0] - 2.0)),
            eval_r: Box::new(|x: &[f64]| crate::num::abs(x[0])),
            lipschitz: 1.0,
            strong_convexity: 1.0,
            dimension: 1,
        }
    }

    #[test]
    fn fb_step_is_gradient_step_without_regularizer() {
        let p = quadratic_problem();
        // γ = 1 on the identity Hessian jumps straight to the minimizer.
        let out = fb_step(&p, &[3.0, -4.0], 1.0);
        assert_eq!(out, vec![0.0, 0.0]);
        let out = fb_step(&p, &[3.0, -4.0], 0.25);
        assert_eq!(out, vec![2.25, -3.0]);
    }

    #[test]
    fn fb_step_lasso_hand_value() {
        let p = lasso_1d();
        // y = 0, γ = 1: prox_l1(2, 1) = 1.
        assert_eq!(fb_step(&p, &[0.0], 1.0), vec![1.0]);
    }

    #[test]
    fn restart_test_boundary_cases() {
        assert!(restart_test(&[1.0, 0.0], &[0.5, 0.0], &[0.5, 0.0])); // x_next == x
        assert!(restart_test(&[0.5, 0.0], &[0.5, 0.0], &[0.0, 0.0])); // y == x_next
        assert!(restart_test(&[1.0, 0.0], &[0.5, 0.0], &[0.0, 0.0])); // 0.25 >= 0
        assert!(!restart_test(&[1.0, 0.0], &[2.0, 0.0], &[0.0, 0.0])); // -2 < 0
    }

    #[test]
    fn safeguard_clamps_at_base_step() {
        let lipschitz = 2.0;
        let mut gamma = 1.3 / lipschitz;
        for _ in 0..20 {
            gamma = safeguard(gamma, 1.0, 1.0, 1.0, 0.96, lipschitz);
        }
        assert_eq!(gamma, 1.0 / lipschitz);
        // No trigger: unchanged.
        let g = safeguard(0.65, 0.1, 1.0, 1.0, 0.96, lipschitz);
        assert_eq!(g, 0.65);
        // Already at the floor: stays there.
        let g = safeguard(0.5, 1.0, 1.0, 1.0, 0.96, lipschitz);
        assert_eq!(g, 0.5);
    }

    #[test]
    fn run_converges_on_quadratic() {
        let p = quadratic_problem();
        let config = SolverConfig::new(vec![5.0, -3.0])
            .with_max_iters(2000)
            .with_tol(1e-12);
        let trace = run(&p, InertialRule::bt(), RestartPolicy::None, &config).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert!(crate::linalg::norm(&trace.final_point) < 1e-9);
        for w in trace.rows.windows(2) {
            assert!(w[1].k > w[0].k);
        }
        assert!(trace
            .rows
            .iter()
            .all(|r| r.residual >= 0.0 && r.gamma > 0.0));
    }

    #[test]
    fn traces_are_deterministic() {
        let p = quadratic_problem();
        let config = SolverConfig::new(vec![1.0, 2.0]).with_max_iters(500);
        let a = run(&p, InertialRule::bt(), RestartPolicy::Restart, &config).unwrap();
        let b = run(&p, InertialRule::bt(), RestartPolicy::Restart, &config).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.residual.to_bits(), rb.residual.to_bits());
            assert_eq!(ra.obj.to_bits(), rb.obj.to_bits());
        }
    }

    #[test]
    fn incompatible_pairs_rejected() {
        let p = quadratic_problem();
        let config = SolverConfig::new(vec![1.0, 2.0]);
        let err = run(
            &p,
            InertialRule::bt(),
            RestartPolicy::Greedy { s: 1.0, xi: 0.96 },
            &config,
        );
        assert!(matches!(err, Err(SolveError::IncompatibleRulePolicy(_))));
        let err = run(
            &p,
            InertialRule::bt(),
            RestartPolicy::RadaI {
                xi: XiMode::Fixed(0.96),
            },
            &config,
        );
        assert!(matches!(err, Err(SolveError::IncompatibleRulePolicy(_))));
        let err = run(
            &p,
            InertialRule::bt(),
            RestartPolicy::None,
            &config.clone().with_gamma(1.5),
        );
        assert!(matches!(err, Err(SolveError::InvalidConfig(_))));
        let err = run(
            &p,
            InertialRule::constant(1.0).unwrap(),
            RestartPolicy::Greedy { s: 1.0, xi: 0.96 },
            &config.clone().with_gamma(2.5),
        );
        assert!(matches!(err, Err(SolveError::InvalidConfig(_))));
    }

    #[test]
    fn rada_policies_fire_and_keep_r_positive() {
        let p = quadratic_problem();
        let config = SolverConfig::new(vec![10.0, -7.0])
            .with_max_iters(3000)
            .with_tol(1e-13);
        for policy in [
            RestartPolicy::RadaI {
                xi: XiMode::Fixed(0.9),
            },
            RestartPolicy::RadaII {
                xi: XiMode::Fixed(0.9),
            },
        ] {
            let rule = InertialRule::fista_mod(1.0, 1.0, 4.0).unwrap();
            let trace = run(&p, rule, policy, &config).unwrap();
            assert!(trace.total_restarts > 0, "adaptive policy never fired");
        }
    }

    #[test]
    fn greedy_gamma_never_below_base() {
        let p = quadratic_problem();
        let config = SolverConfig::new(vec![4.0, 1.0])
            .with_max_iters(5000)
            .with_tol(1e-13)
            .with_gamma(1.3);
        let trace = run(
            &p,
            InertialRule::constant(1.0).unwrap(),
            RestartPolicy::Greedy { s: 1.0, xi: 0.96 },
            &config,
        )
        .unwrap();
        assert!(trace.final_gamma >= 1.0 - 1e-12);
        assert_eq!(trace.stop_reason, StopReason::Converged);
        // Runs that end while γ > 1/L carry the flag.
        assert_eq!(trace.ended_above_base_step, trace.final_gamma > 1.0 + 1e-12);
    }

    #[test]
    fn nan_aborts_with_fault_flag() {
        // Negative curvature masquerading as convex: the iteration explodes.
        let p = ProblemSpec {
            grad_f: Box::new(|x: &[f64]| x.iter().map(|v| -4.0 * v).collect()),
            prox_r: Box::new(|z: &[f64], _g| z.to_vec()),
            eval_f: Box::new(|x: &[f64]| -2.0 * dot(x, x)),
            eval_r: Box::new(|_| 0.0),
            lipschitz: 4.0,
            strong_convexity: 0.0,
            dimension: 1,
        };
        let config = SolverConfig::new(vec![1.0]).with_max_iters(100_000);
        let trace = run(&p, InertialRule::bt(), RestartPolicy::None, &config).unwrap();
        assert_eq!(trace.stop_reason, StopReason::NumericalFault);
        assert!(trace.final_point.iter().all(|v| v.is_finite()));
        assert!(trace.iterations < 100_000);
    }

    #[test]
    fn stride_thins_rows() {
        // Anisotropic quadratic so the run does not converge immediately.
        let p = ProblemSpec {
            grad_f: Box::new(|x: &[f64]| vec![0.2 * x[0], x[1]]),
            prox_r: Box::new(|z: &[f64], _g| z.to_vec()),
            eval_f: Box::new(|x: &[f64]| 0.5 * (0.2 * x[0] * x[0] + x[1] * x[1])),
            eval_r: Box::new(|_| 0.0),
            lipschitz: 1.0,
            strong_convexity: 0.2,
            dimension: 2,
        };
        let config = SolverConfig::new(vec![1.0, 1.0])
            .with_max_iters(1000)
            .with_stride(TraceStride::Every(100));
        let trace = run(&p, InertialRule::bt(), RestartPolicy::None, &config).unwrap();
        assert_eq!(trace.rows.len(), 10);
        assert!(trace.rows.iter().all(|r| r.k % 100 == 0));
    }

    #[test]
    fn reference_distance_column_decreases() {
        let p = quadratic_problem();
        let config = SolverConfig::new(vec![3.0, 4.0])
            .with_max_iters(200)
            .with_reference(vec![0.0, 0.0]);
        let trace = run(&p, InertialRule::bt(), RestartPolicy::None, &config).unwrap();
        let first = trace.rows.first().unwrap().dist_to_ref.unwrap();
        let last = trace.rows.last().unwrap().dist_to_ref.unwrap();
        assert!(last <= first);
        assert!(trace.first_k_within(1e-6).is_some());
    }
}
