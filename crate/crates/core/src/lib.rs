//! Inertial forward–backward (FISTA-family) solvers over composite objectives
//! `Φ(x) = F(x) + R(x)`, with F convex and L-smooth and R convex with a
//! computable proximity operator.
//!
//! The crate provides:
//!
//! - [`problem`]: the problem abstraction (oracles for `∇F`, `prox_{γR}`, the
//!   objective pieces), solver configuration and per-run traces;
//! - [`sequences`]: every inertial parameter recursion (`t_k`, `a_k`, `θ_k`),
//!   their limits, sandwich bounds and the optimal momentum-limit formula for
//!   strongly convex problems;
//! - [`prox`]: proximity operators used by the experiment problems (soft
//!   thresholding, ℓ1-ball projection, ℓ∞ prox, exact 1-D total variation,
//!   singular value thresholding) and the Moreau-envelope gradient;
//! - [`solvers`]: the generic inertial forward–backward engine together with
//!   restart and step-size safeguard policies;
//! - [`spectral`]: fixed-point spectral analysis of the iteration on quadratic
//!   problems (per-step contraction magnitudes, envelopes, crossover points,
//!   optimal damping);
//! - [`problems`]: seeded generators for least-squares, linear inverse,
//!   logistic regression and principal component pursuit instances, plus
//!   LIBSVM parsing.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (default) only toggles `std::error::Error` impls. All floating point math
//! goes through `libm` so results are identical across feature sets and
//! platforms.
//!
//! ```
//! use fista_core::problem::{ProblemSpec, SolverConfig};
//! use fista_core::sequences::InertialRule;
//! use fista_core::solvers::{run, RestartPolicy};
//!
//! // One-dimensional lasso: F = ½(x − 2)², R = |x|; minimizer x* = 1.
//! let problem = ProblemSpec {
//!     grad_f: Box::new(|x: &[f64]| vec![x[0] - 2.0]),
//!     prox_r: Box::new(|z: &[f64], g| fista_core::prox::prox_l1(z, g)),
//!     eval_f: Box::new(|x: &[f64]| 0.5 * (x[0] - 2.0) * (x[0] - 2.0)),
//!     eval_r: Box::new(|x: &[f64]| x[0].abs()),
//!     lipschitz: 1.0,
//!     strong_convexity: 1.0,
//!     dimension: 1,
//! };
//! let config = SolverConfig::new(vec![0.0]).with_max_iters(200).with_tol(1e-12);
//! let trace = run(&problem, InertialRule::bt(), RestartPolicy::None, &config).unwrap();
//! assert!((trace.final_point[0] - 1.0).abs() < 1e-9);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod linalg;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod sequences;
pub mod solvers;
pub mod spectral;

mod num;

pub use problem::{objective, ProblemError, ProblemSpec, RunTrace, SolverConfig, StopReason};
pub use sequences::{InertialRule, SequenceError, SequenceLimits};
pub use solvers::{run, RestartPolicy, SolveError};
pub use spectral::SpectralModel;
