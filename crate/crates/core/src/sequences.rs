//! Inertial parameter recursions.
//!
//! Every solver variant is driven by a scalar recursion that produces the
//! momentum coefficient `a_k` multiplying `x_k − x_{k−1}`:
//!
//! - `Bt`: `t_k = (1 + √(1 + 4 t_{k−1}²))/2`, `a_k = (t_{k−1} − 1)/t_k`;
//! - `Cd { d }`: `t_k = (k + d)/d`, `a_k = (k − 1)/(k + d)`;
//! - `Mod { p, q, r }`: `t_k = (p + √(q + r t_{k−1}²))/2`, same `a_k`; the
//!   `Bt` rule is the special case `p = q = 1, r = 4` and shares its code
//!   path, so the two produce bit-identical sequences;
//! - `Apg { sigma, tau }`: `θ_k` solves `θ² + (σ θ_{k−1}² − τ)θ − θ_{k−1}² = 0`,
//!   with `a_k = θ_{k−1}(1 − θ_{k−1})/(σ θ_{k−1}² + θ_k)`. Internally the
//!   recursion is advanced through `t_k = 1/θ_k`, which for `τ = 0` performs
//!   exactly the same floating point operations as `Mod { p: σ, q: σ², r: 4 }`;
//! - `Constant { a }`: fixed momentum, used by the greedy restart scheme.
//!
//! `r` controls the limiting momentum (`a_k → 1` iff `r = 4`), while `p, q`
//! control how fast the limit is approached; small `p` (or large `d`) is the
//! lazy-start regime.

use alloc::string::String;

use crate::num;

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceError {
    /// A constructor argument is outside its admissible range.
    InvalidParameter(String),
    /// The recursion state stopped being finite at iteration `k`.
    NonFinite { k: usize },
}

impl core::fmt::Display for SequenceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SequenceError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            SequenceError::NonFinite { k } => {
                write!(f, "non-finite recursion state at iteration {k}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SequenceError {}

fn ensure(cond: bool, msg: &str) -> Result<(), SequenceError> {
    if cond {
        Ok(())
    } else {
        Err(SequenceError::InvalidParameter(String::from(msg)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RuleKind {
    Bt,
    Cd { d: f64 },
    Mod { p: f64, q: f64, r: f64 },
    Apg { sigma: f64, tau: f64 },
    Constant { a: f64 },
}

/// A momentum schedule together with its mutable recursion state.
///
/// Small value type; moves freely between threads, one run uses one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InertialRule {
    kind: RuleKind,
    t0: f64,
    theta0: f64,
    t_prev: f64,
    theta_prev: f64,
    k_local: usize,
    k_total: usize,
}

#[inline]
fn mod_t_update(p: f64, q: f64, r: f64, t_prev: f64) -> f64 {
    0.5 * (p + num::sqrt(q + r * (t_prev * t_prev)))
}

#[inline]
fn apg_t_update(sigma: f64, tau: f64, t_prev: f64) -> f64 {
    let tt = t_prev * t_prev;
    let d = sigma - tau * tt;
    let sq = num::sqrt(d * d + 4.0 * tt);
    if d >= 0.0 {
        0.5 * (d + sq)
    } else {
        // Conjugate form: the direct root cancels when d < 0.
        (2.0 * tt) / (sq - d)
    }
}

impl InertialRule {
    /// Original scheme: `t_k = (1 + √(1 + 4 t_{k−1}²))/2`.
    pub fn bt() -> Self {
        Self::bt_with_t0(1.0).unwrap()
    }

    pub fn bt_with_t0(t0: f64) -> Result<Self, SequenceError> {
        ensure(t0.is_finite() && t0 >= 1.0, "t0 must be >= 1")?;
        Ok(Self {
            kind: RuleKind::Bt,
            t0,
            theta0: 1.0 / t0,
            t_prev: t0,
            theta_prev: 1.0 / t0,
            k_local: 0,
            k_total: 0,
        })
    }

    /// `t_k = (k + d)/d`; requires `d ≥ 2`.
    pub fn cd(d: f64) -> Result<Self, SequenceError> {
        ensure(d.is_finite() && d >= 2.0, "d must be >= 2")?;
        Ok(Self {
            kind: RuleKind::Cd { d },
            t0: 1.0,
            theta0: 1.0,
            t_prev: 1.0,
            theta_prev: 1.0,
            k_local: 0,
            k_total: 0,
        })
    }

    /// `t_k = (p + √(q + r t_{k−1}²))/2` with `p ∈ ]0,1]`, `q > 0`, `r ∈ ]0,4]`.
    pub fn fista_mod(p: f64, q: f64, r: f64) -> Result<Self, SequenceError> {
        Self::fista_mod_with_t0(p, q, r, 1.0)
    }

    pub fn fista_mod_with_t0(p: f64, q: f64, r: f64, t0: f64) -> Result<Self, SequenceError> {
        ensure(p.is_finite() && p > 0.0 && p <= 1.0, "p must lie in ]0, 1]")?;
        ensure(q.is_finite() && q > 0.0, "q must be positive")?;
        ensure(r.is_finite() && r > 0.0 && r <= 4.0, "r must lie in ]0, 4]")?;
        ensure(t0.is_finite() && t0 >= 1.0, "t0 must be >= 1")?;
        Ok(Self {
            kind: RuleKind::Mod { p, q, r },
            t0,
            theta0: 1.0 / t0,
            t_prev: t0,
            theta_prev: 1.0 / t0,
            k_local: 0,
            k_total: 0,
        })
    }

    /// θ-driven rule with `σ ∈ ]0,1]`, `τ ∈ [0, σ]`. `theta0` defaults to 1
    /// when `τ = 0` and to the fixed point `√(τ/σ)` when `τ > 0`.
    pub fn apg(sigma: f64, tau: f64, theta0: Option<f64>) -> Result<Self, SequenceError> {
        ensure(
            sigma.is_finite() && sigma > 0.0 && sigma <= 1.0,
            "sigma must lie in ]0, 1]",
        )?;
        ensure(
            tau.is_finite() && tau >= 0.0 && tau <= sigma,
            "tau must lie in [0, sigma]",
        )?;
        let theta0 = match theta0 {
            Some(th) => {
                ensure(
                    th.is_finite() && th > 0.0 && th <= 1.0,
                    "theta0 must lie in ]0, 1]",
                )?;
                th
            }
            None if tau > 0.0 => num::sqrt(tau / sigma),
            None => 1.0,
        };
        Ok(Self {
            kind: RuleKind::Apg { sigma, tau },
            t0: 1.0 / theta0,
            theta0,
            t_prev: 1.0 / theta0,
            theta_prev: theta0,
            k_local: 0,
            k_total: 0,
        })
    }

    /// Fixed momentum `a ∈ [0, 1]`; `a = 1` is the greedy scheme's setting.
    pub fn constant(a: f64) -> Result<Self, SequenceError> {
        ensure(
            a.is_finite() && (0.0..=1.0).contains(&a),
            "a must lie in [0, 1]",
        )?;
        Ok(Self {
            kind: RuleKind::Constant { a },
            t0: 1.0,
            theta0: 1.0,
            t_prev: 1.0,
            theta_prev: 1.0,
            k_local: 0,
            k_total: 0,
        })
    }

    /// Advance one step; returns `(t_k, a_k)`. `t_k` is NaN for constant
    /// rules, which have no underlying recursion.
    pub fn next_t(&mut self) -> Result<(f64, f64), SequenceError> {
        self.k_local += 1;
        self.k_total += 1;
        let (t, a) = match self.kind {
            RuleKind::Bt => {
                let t = mod_t_update(1.0, 1.0, 4.0, self.t_prev);
                let a = (self.t_prev - 1.0) / t;
                self.t_prev = t;
                (t, a)
            }
            RuleKind::Mod { p, q, r } => {
                let t = mod_t_update(p, q, r, self.t_prev);
                let a = (self.t_prev - 1.0) / t;
                self.t_prev = t;
                (t, a)
            }
            RuleKind::Cd { d } => {
                let k = self.k_local as f64;
                let t = (k + d) / d;
                let a = (k - 1.0) / (k + d);
                self.t_prev = t;
                (t, a)
            }
            RuleKind::Apg { sigma, tau } => {
                let t = apg_t_update(sigma, tau, self.t_prev);
                let theta = 1.0 / t;
                let a = self.theta_prev * (1.0 - self.theta_prev)
                    / (sigma * (self.theta_prev * self.theta_prev) + theta);
                self.t_prev = t;
                self.theta_prev = theta;
                (t, a)
            }
            RuleKind::Constant { a } => (f64::NAN, a),
        };
        match self.kind {
            RuleKind::Constant { .. } => Ok((t, a)),
            _ => {
                if !t.is_finite() || !a.is_finite() {
                    Err(SequenceError::NonFinite { k: self.k_total })
                } else {
                    Ok((t, a))
                }
            }
        }
    }

    /// Reset the recursion state to its initial value (used by restart
    /// policies that reset `t_k`). The global iteration count is kept for
    /// error reporting.
    pub fn reset(&mut self) {
        self.t_prev = self.t0;
        self.theta_prev = self.theta0;
        self.k_local = 0;
    }

    /// Rescale `r ← ξ·r`; only supported for the `Mod` rule. Returns whether
    /// the rescale applied.
    pub fn scale_r(&mut self, xi: f64) -> bool {
        if let RuleKind::Mod { r, .. } = &mut self.kind {
            *r *= xi;
            true
        } else {
            false
        }
    }

    pub fn r(&self) -> Option<f64> {
        match self.kind {
            RuleKind::Mod { r, .. } => Some(r),
            RuleKind::Bt => Some(4.0),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, RuleKind::Constant { .. })
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            RuleKind::Constant { a } => Some(a),
            _ => None,
        }
    }

    pub fn supports_r_scaling(&self) -> bool {
        matches!(self.kind, RuleKind::Mod { .. })
    }

    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    /// Short lowercase tag for traces and presets.
    pub fn name(&self) -> &'static str {
        match self.kind {
            RuleKind::Bt => "bt",
            RuleKind::Cd { .. } => "cd",
            RuleKind::Mod { .. } => "mod",
            RuleKind::Apg { .. } => "apg",
            RuleKind::Constant { .. } => "constant",
        }
    }
}

/// Limits of the `Mod { p, q, r }` recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceLimits {
    /// `t_∞`; `+∞` when `r = 4`.
    pub t_inf: f64,
    /// `a_∞ ∈ [0, 1]`; equals 1 iff `r = 4`.
    pub a_inf: f64,
    /// `Δ = √(r p² + (4 − r) q)`.
    pub delta: f64,
}

/// Limiting values of `t_k` and `a_k` under `Mod { p, q, r }`:
/// for `r < 4`, `t_k → (2p + Δ)/(4 − r)` and `a_k → (2p + Δ − (4 − r))/(2p + Δ)`;
/// for `r = 4` both `t_k` and the momentum saturate (`a_k → 1`).
///
/// ```
/// let lim = fista_core::sequences::limit_values(1.0, 1.0, 2.0).unwrap();
/// assert!((lim.t_inf - 2.0).abs() < 1e-15);
/// assert!((lim.a_inf - 0.5).abs() < 1e-15);
/// ```
pub fn limit_values(p: f64, q: f64, r: f64) -> Result<SequenceLimits, SequenceError> {
    ensure(p.is_finite() && p > 0.0 && p <= 1.0, "p must lie in ]0, 1]")?;
    ensure(q.is_finite() && q > 0.0, "q must be positive")?;
    ensure(r.is_finite() && r > 0.0 && r <= 4.0, "r must lie in ]0, 4]")?;
    let delta = num::sqrt(r * p * p + (4.0 - r) * q);
    if r == 4.0 {
        Ok(SequenceLimits {
            t_inf: f64::INFINITY,
            a_inf: 1.0,
            delta,
        })
    } else {
        let t_inf = (2.0 * p + delta) / (4.0 - r);
        let a_inf = (2.0 * p + delta - (4.0 - r)) / (2.0 * p + delta);
        Ok(SequenceLimits {
            t_inf,
            a_inf,
            delta,
        })
    }
}

/// Smallest truncation index the `a_k` upper-bound argument admits:
/// `⌈q / (p(2 − p))⌉`.
pub fn default_ell(p: f64, q: f64) -> usize {
    num::ceil(q / (p * (2.0 - p))) as usize
}

/// Sandwich bounds for `t_k` in the `r = 4`, `t₀ = 1` regime:
/// `lower = (k+1)p/2` and `upper = 1 + S_ℓ + (p/2 + q/(4p(ℓ+1)))·k` with
/// `S_ℓ = (q/(4p)) Σ_{i=0}^{ℓ} 1/(1+i)`. `ell = None` selects
/// [`default_ell`]; explicit smaller values are accepted (the upper bound is
/// valid for any `ℓ ≥ 0`).
pub fn t_bounds(k: usize, p: f64, q: f64, ell: Option<usize>) -> Result<(f64, f64), SequenceError> {
    ensure(p.is_finite() && p > 0.0 && p <= 1.0, "p must lie in ]0, 1]")?;
    ensure(q.is_finite() && q > 0.0 && q <= 1.0, "q must lie in ]0, 1]")?;
    let ell = ell.unwrap_or_else(|| default_ell(p, q));
    let mut s_ell = 0.0;
    for i in 0..=ell {
        s_ell += 1.0 / (1.0 + i as f64);
    }
    s_ell *= q / (4.0 * p);
    let kf = k as f64;
    let lower = (kf + 1.0) * p / 2.0;
    let upper = 1.0 + s_ell + (p / 2.0 + q / (4.0 * p * (ell as f64 + 1.0))) * kf;
    Ok((lower, upper))
}

/// The momentum-limit formula for `α`-strongly convex problems:
/// `r = 4(1−p) + 4p·a* + (p² − q)(1 − a*)²` with
/// `a* = (1 − √(γα))/(1 + √(γα))`. Returns exactly 4 when `alpha = 0`, so the
/// non-strongly-convex configuration is recovered; always `≤ 4`.
pub fn optimal_r(alpha: f64, gamma: f64, p: f64, q: f64) -> Result<f64, SequenceError> {
    ensure(
        alpha.is_finite() && alpha >= 0.0,
        "alpha must be nonnegative",
    )?;
    ensure(gamma.is_finite() && gamma > 0.0, "gamma must be positive")?;
    ensure(p.is_finite() && p > 0.0 && p <= 1.0, "p must lie in ]0, 1]")?;
    ensure(q.is_finite() && q > 0.0, "q must be positive")?;
    let ga = gamma * alpha;
    ensure(ga <= 1.0, "gamma * alpha must not exceed 1")?;
    if alpha == 0.0 {
        return Ok(4.0);
    }
    let s = num::sqrt(ga);
    let a_star = (1.0 - s) / (1.0 + s);
    let one_minus = 1.0 - a_star;
    Ok(4.0 * (1.0 - p) + 4.0 * p * a_star + (p * p - q) * one_minus * one_minus)
}

/// One step of the θ recursion: solves
/// `θ² + (σ θ_prev² − τ) θ − θ_prev² = 0` for the positive root (via the
/// cancellation-free branch) and returns `(θ, a)` with
/// `a = θ_prev (1 − θ_prev) / (σ θ_prev² + θ)`.
pub fn next_theta(sigma: f64, tau: f64, theta_prev: f64) -> Result<(f64, f64), SequenceError> {
    ensure(
        sigma.is_finite() && sigma > 0.0 && sigma <= 1.0,
        "sigma must lie in ]0, 1]",
    )?;
    ensure(
        tau.is_finite() && tau >= 0.0 && tau <= sigma,
        "tau must lie in [0, sigma]",
    )?;
    ensure(
        theta_prev.is_finite() && theta_prev > 0.0 && theta_prev <= 1.0,
        "theta_prev must lie in ]0, 1]",
    )?;
    let t_prev = 1.0 / theta_prev;
    let t = apg_t_update(sigma, tau, t_prev);
    if !t.is_finite() || t <= 0.0 {
        return Err(SequenceError::NonFinite { k: 0 });
    }
    let theta = 1.0 / t;
    let a = theta_prev * (1.0 - theta_prev) / (sigma * (theta_prev * theta_prev) + theta);
    Ok((theta, a))
}
