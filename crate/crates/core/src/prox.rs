//! Proximity operators used by the experiment problems.
//!
//! Each operator solves `min_x λ·R(x) + ½‖x − z‖²` in closed form or by a
//! direct (non-iterative) method:
//!
//! - [`prox_l1`]: entrywise soft thresholding;
//! - [`project_l1_ball`]: Euclidean projection onto `{x : ‖x‖₁ ≤ radius}`
//!   by sort-based water-filling;
//! - [`prox_linf`]: via the Moreau decomposition
//!   `prox_{λ‖·‖∞}(z) = z − λ·P_{‖·‖₁≤1}(z/λ)`;
//! - [`prox_tv1d`]: exact minimizer of the 1-D (anisotropic) total variation
//!   model by a direct taut-string-class scan;
//! - [`prox_nuclear`]: singular value soft thresholding;
//! - [`moreau_env_grad_l1`]: gradient of the index-1 Moreau envelope of
//!   `μ‖·‖₁`, which is 1-Lipschitz.

use alloc::vec::Vec;

use crate::linalg::{svd, DenseMatrix};
use crate::num;

/// Entrywise soft thresholding: `sign(zᵢ)·max(|zᵢ| − lam, 0)`.
///
/// ```
/// assert_eq!(fista_core::prox::prox_l1(&[3.0, -0.5], 1.0), vec![2.0, 0.0]);
/// ```
pub fn prox_l1(z: &[f64], lam: f64) -> Vec<f64> {
    debug_assert!(lam > 0.0);
    z.iter()
        .map(|&v| {
            let m = num::abs(v) - lam;
            if m > 0.0 {
                if v > 0.0 {
                    m
                } else {
                    -m
                }
            } else {
                0.0
            }
        })
        .collect()
}

/// Euclidean projection onto the ℓ1 ball of the given radius. Sort-based
/// water-filling, O(n log n); the input is returned unchanged when already
/// feasible.
pub fn project_l1_ball(z: &[f64], radius: f64) -> Vec<f64> {
    debug_assert!(radius > 0.0);
    let l1: f64 = z.iter().map(|v| num::abs(*v)).sum();
    if l1 <= radius {
        return z.to_vec();
    }
    let mut mags: Vec<f64> = z.iter().map(|v| num::abs(*v)).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // The active set {i : |z|_(i) > (Σ_{j≤i}|z|_(j) − radius)/i} is a prefix;
    // θ is the candidate at its last element.
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / (i as f64 + 1.0);
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    z.iter()
        .map(|&v| {
            let m = num::abs(v) - theta;
            if m > 0.0 {
                if v > 0.0 {
                    m
                } else {
                    -m
                }
            } else {
                0.0
            }
        })
        .collect()
}

/// Prox of `lam·‖·‖∞` via the Moreau decomposition with its conjugate, the
/// ℓ1-ball indicator: `z − lam·P_{‖·‖₁ ≤ 1}(z/lam)`.
pub fn prox_linf(z: &[f64], lam: f64) -> Vec<f64> {
    debug_assert!(lam > 0.0);
    let scaled: Vec<f64> = z.iter().map(|v| v / lam).collect();
    let projected = project_l1_ball(&scaled, 1.0);
    z.iter()
        .zip(&projected)
        .map(|(&zi, &pi)| zi - lam * pi)
        .collect()
}

/// Exact solution of
/// `min_x lam·Σ|x_{i+1} − x_i| + ½‖x − z‖²`
/// by a direct forward scan that maintains the running block level together
/// with slack accumulators for the lower and upper taut-string boundaries and
/// emits a block whenever a jump is forced. Single pass per fixed block, no
/// inner iterations; preserves the mean of `z`.
pub fn prox_tv1d(z: &[f64], lam: f64) -> Vec<f64> {
    debug_assert!(lam > 0.0);
    let n = z.len();
    let mut x = alloc::vec![0.0; n];
    if n == 0 {
        return x;
    }
    if n == 1 {
        x[0] = z[0];
        return x;
    }

    // Indices are 0-based: k0 is the first sample of the current block,
    // kminus/kplus the last samples certified at the running lower/upper
    // levels vmin/vmax, and umin/umax the accumulated slacks.
    let mut k: usize = 0;
    let mut k0: usize = 0;
    let mut kminus: usize = 0;
    let mut kplus: usize = 0;
    let mut vmin = z[0] - lam;
    let mut vmax = z[0] + lam;
    let mut umin = lam;
    let mut umax = -lam;

    loop {
        if k == n - 1 {
            // Termination phase: decide whether the last block is settled or
            // one more jump is forced at the boundary.
            if umin < 0.0 {
                // Level vmin is too high: jump down after kminus.
                for xi in x.iter_mut().take(kminus + 1).skip(k0) {
                    *xi = vmin;
                }
                k = kminus + 1;
                k0 = k;
                kminus = k;
                kplus = k;
                vmin = z[k];
                vmax = z[k] + 2.0 * lam;
                umin = lam;
                umax = -lam;
            } else if umax > 0.0 {
                // Level vmax is too low: jump up after kplus.
                for xi in x.iter_mut().take(kplus + 1).skip(k0) {
                    *xi = vmax;
                }
                k = kplus + 1;
                k0 = k;
                kminus = k;
                kplus = k;
                vmin = z[k] - 2.0 * lam;
                vmax = z[k];
                umin = lam;
                umax = -lam;
            } else {
                let level = vmin + umin / (k - k0 + 1) as f64;
                for xi in x.iter_mut().take(n).skip(k0) {
                    *xi = level;
                }
                return x;
            }
            if k == n - 1 {
                // The restarted block is the single last sample.
                x[n - 1] = vmin + umin;
                return x;
            }
            continue;
        }

        if z[k + 1] + umin < vmin - lam {
            // Negative jump is unavoidable: flush [k0, kminus] at vmin.
            for xi in x.iter_mut().take(kminus + 1).skip(k0) {
                *xi = vmin;
            }
            k = kminus + 1;
            k0 = k;
            kminus = k;
            kplus = k;
            vmin = z[k];
            vmax = z[k] + 2.0 * lam;
            umin = lam;
            umax = -lam;
        } else if z[k + 1] + umax > vmax + lam {
            // Positive jump is unavoidable: flush [k0, kplus] at vmax.
            for xi in x.iter_mut().take(kplus + 1).skip(k0) {
                *xi = vmax;
            }
            k = kplus + 1;
            k0 = k;
            kminus = k;
            kplus = k;
            vmin = z[k] - 2.0 * lam;
            vmax = z[k];
            umin = lam;
            umax = -lam;
        } else {
            // No jump: absorb the next sample into the running block.
            k += 1;
            umin += z[k] - vmin;
            umax += z[k] - vmax;
            if umin >= lam {
                vmin += (umin - lam) / (k - k0 + 1) as f64;
                umin = lam;
                kminus = k;
            }
            if umax <= -lam {
                vmax += (umax + lam) / (k - k0 + 1) as f64;
                umax = -lam;
                kplus = k;
            }
        }
    }
}

/// Singular value soft thresholding: `U·max(Σ − lam, 0)·Vᵀ` from a full SVD.
pub fn prox_nuclear(z: &DenseMatrix, lam: f64) -> DenseMatrix {
    debug_assert!(lam > 0.0);
    let dec = svd(z);
    let shrunk: Vec<f64> = dec
        .singular
        .iter()
        .map(|&s| if s > lam { s - lam } else { 0.0 })
        .collect();
    dec.recompose(&shrunk)
}

/// Gradient of the index-1 Moreau envelope of `μ‖·‖₁` at `z`, i.e.
/// `z − prox_{μ‖·‖₁}(z)`; entrywise this is the clamp of `z` to `[−μ, μ]`,
/// so every output entry has magnitude at most `μ` and the map is
/// 1-Lipschitz. Shape-agnostic: pass matrices flattened.
pub fn moreau_env_grad_l1(z: &[f64], mu: f64) -> Vec<f64> {
    debug_assert!(mu > 0.0);
    z.iter()
        .map(|&v| {
            if v > mu {
                mu
            } else if v < -mu {
                -mu
            } else {
                v
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, dot, norm, sub};
    use crate::rng::SplitMix64;
    use alloc::vec;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(prox_l1(&[0.0, 0.0], 1.0), vec![0.0, 0.0]);
        assert_eq!(prox_l1(&[3.0, -0.5], 1.0), vec![2.0, 0.0]);
    }

    #[test]
    fn soft_threshold_subgradient_optimality() {
        // 0 ∈ lam·∂|·|(out) + (out − z) per entry.
        let mut rng = SplitMix64::new(1);
        for _ in 0..100 {
            let z: Vec<f64> = rng.gaussian_vec(6).iter().map(|v| 3.0 * v).collect();
            let lam = 0.1 + 2.0 * rng.next_f64();
            let out = prox_l1(&z, lam);
            for i in 0..z.len() {
                if out[i] != 0.0 {
                    let g = out[i] - z[i] + lam * out[i].signum();
                    assert!(g.abs() < 1e-12);
                } else {
                    assert!((z[i]).abs() <= lam + 1e-12);
                }
            }
        }
    }

    #[test]
    fn l1_ball_projection_examples() {
        assert_eq!(project_l1_ball(&[1.5, 0.5], 1.0), vec![1.0, 0.0]);
        let feasible = [0.25, -0.25, 0.1];
        assert_eq!(project_l1_ball(&feasible, 1.0), feasible.to_vec());
    }

    #[test]
    fn l1_ball_projection_feasibility_and_optimality() {
        let mut rng = SplitMix64::new(2);
        for _ in 0..200 {
            let n = 1 + rng.next_below(8);
            let z: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| 2.0 * v).collect();
            let radius = 0.2 + 2.0 * rng.next_f64();
            let p = project_l1_ball(&z, radius);
            let l1: f64 = p.iter().map(|v| v.abs()).sum();
            assert!(l1 <= radius + 1e-12, "l1 = {l1} > {radius}");
            // Projection optimality: ⟨z − p, q − p⟩ ≤ 0 for feasible q.
            for _ in 0..20 {
                let q = project_l1_ball(
                    &rng.gaussian_vec(n)
                        .iter()
                        .map(|v| 3.0 * v)
                        .collect::<Vec<_>>(),
                    radius,
                );
                let inner = dot(&sub(&z, &p), &sub(&q, &p));
                assert!(inner <= 1e-10, "violated by {inner}");
            }
        }
    }

    #[test]
    fn linf_prox_examples() {
        // ‖z‖₁ ≤ lam collapses to the origin.
        assert_eq!(prox_linf(&[0.5, -0.3], 1.0), vec![0.0, 0.0]);
        let out = prox_linf(&[3.0, 1.0], 2.0);
        assert!((out[0] - 1.0).abs() < 1e-15 && (out[1] - 1.0).abs() < 1e-15);
        // One dimension: ‖·‖∞ = |·|.
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let z = [4.0 * rng.next_gaussian()];
            let lam = 0.1 + rng.next_f64();
            assert!((prox_linf(&z, lam)[0] - prox_l1(&z, lam)[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn moreau_decomposition_identity() {
        let mut rng = SplitMix64::new(4);
        for _ in 0..100 {
            let n = 1 + rng.next_below(7);
            let z: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| 3.0 * v).collect();
            let lam = 0.2 + 2.0 * rng.next_f64();
            let p = prox_linf(&z, lam);
            let scaled: Vec<f64> = z.iter().map(|v| v / lam).collect();
            let dual = project_l1_ball(&scaled, 1.0);
            for i in 0..n {
                // Identity up to the one re-rounding of lam·dualᵢ.
                let back = p[i] + lam * dual[i];
                assert!((z[i] - back).abs() <= 1e-15 * z[i].abs().max(1.0));
            }
        }
    }

    /// Exact KKT oracle for the TV prox: reconstruct the dual variable from
    /// the residual and check the subgradient inclusion.
    fn tv_kkt_holds(z: &[f64], x: &[f64], lam: f64, tol: f64) -> bool {
        let n = z.len();
        if n == 1 {
            return (x[0] - z[0]).abs() <= tol;
        }
        // z − x = lam·Dᵀs  =>  s₁ = (x₁−z₁)/lam … forward substitution.
        let mut s = vec![0.0; n - 1];
        s[0] = (x[0] - z[0]) / lam;
        for i in 1..n - 1 {
            s[i] = s[i - 1] + (x[i] - z[i]) / lam;
        }
        // Consistency at the last row.
        if ((z[n - 1] - x[n - 1]) / lam - s[n - 2]).abs() > tol {
            return false;
        }
        for i in 0..n - 1 {
            if s[i].abs() > 1.0 + tol {
                return false;
            }
            let jump = x[i + 1] - x[i];
            if jump > tol && (s[i] - 1.0).abs() > tol {
                return false;
            }
            if jump < -tol && (s[i] + 1.0).abs() > tol {
                return false;
            }
        }
        true
    }

    #[test]
    fn tv_examples() {
        let c = [2.5, 2.5, 2.5, 2.5];
        assert_eq!(prox_tv1d(&c, 0.7), c.to_vec());
        let out = prox_tv1d(&[4.0, 0.0], 1.0);
        assert!((out[0] - 3.0).abs() < 1e-14 && (out[1] - 1.0).abs() < 1e-14);
        // Huge lam flattens to the mean.
        let z = [1.0, -2.0, 5.0, 3.0];
        let mean = z.iter().sum::<f64>() / 4.0;
        let flat = prox_tv1d(&z, 100.0);
        for v in &flat {
            assert!((v - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn tv_mean_preservation_and_kkt() {
        let mut rng = SplitMix64::new(5);
        for trial in 0..500 {
            let n = 1 + rng.next_below(40);
            let z: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| 4.0 * v).collect();
            let lam = 0.05 + 3.0 * rng.next_f64();
            let x = prox_tv1d(&z, lam);
            let mz = z.iter().sum::<f64>() / n as f64;
            let mx = x.iter().sum::<f64>() / n as f64;
            assert!((mz - mx).abs() < 1e-10, "trial {trial}: mean drift");
            assert!(tv_kkt_holds(&z, &x, lam, 1e-8), "trial {trial}: KKT failed");
        }
    }

    #[test]
    fn tv_piecewise_constant_input_survives_small_lam() {
        let mut rng = SplitMix64::new(6);
        for _ in 0..100 {
            let n = 3 + rng.next_below(200);
            let z: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| 10.0 * v).collect();
            let lam = 0.01 + rng.next_f64();
            let x = prox_tv1d(&z, lam);
            assert!(tv_kkt_holds(&z, &x, lam, 1e-8));
        }
    }

    #[test]
    fn nuclear_prox_examples() {
        let z = DenseMatrix::zeros(3, 2);
        let out = prox_nuclear(&z, 0.5);
        assert!(out.data.iter().all(|v| *v == 0.0));
        let d = DenseMatrix::from_data(2, 2, vec![3.0, 0.0, 0.0, 0.5]);
        let out = prox_nuclear(&d, 1.0);
        assert!((out.get(0, 0) - 2.0).abs() < 1e-12);
        assert!(out.get(1, 1).abs() < 1e-12);
        assert!(out.get(0, 1).abs() < 1e-12 && out.get(1, 0).abs() < 1e-12);
    }

    #[test]
    fn nuclear_prox_shrinks_spectrum() {
        let mut rng = SplitMix64::new(7);
        let z = DenseMatrix::from_data(5, 4, rng.gaussian_vec(20));
        let lam = 0.8;
        let out = prox_nuclear(&z, lam);
        let sz = svd(&z).singular;
        let so = svd(&out).singular;
        for i in 0..4 {
            let expect = (sz[i] - lam).max(0.0);
            assert!(
                (so[i] - expect).abs() < 1e-10,
                "σ{i}: {} vs {}",
                so[i],
                expect
            );
        }
    }

    #[test]
    fn moreau_envelope_gradient() {
        assert_eq!(moreau_env_grad_l1(&[0.5, -0.25], 1.0), vec![0.5, -0.25]);
        assert_eq!(moreau_env_grad_l1(&[3.0], 1.0), vec![1.0]);
        let mut rng = SplitMix64::new(8);
        for _ in 0..200 {
            let z: Vec<f64> = rng.gaussian_vec(5).iter().map(|v| 4.0 * v).collect();
            let mu = 0.2 + rng.next_f64();
            let g = moreau_env_grad_l1(&z, mu);
            let direct = sub(&z, &prox_l1(&z, mu));
            for i in 0..g.len() {
                assert!((g[i] - direct[i]).abs() <= 1e-15 * z[i].abs().max(1.0));
            }
            assert!(g.iter().all(|v| v.abs() <= mu));
        }
    }

    #[test]
    fn moreau_envelope_gradient_is_one_lipschitz() {
        let mut rng = SplitMix64::new(9);
        for _ in 0..1000 {
            let a: Vec<f64> = rng.gaussian_vec(6).iter().map(|v| 3.0 * v).collect();
            let b: Vec<f64> = rng.gaussian_vec(6).iter().map(|v| 3.0 * v).collect();
            let mu = 0.3 + rng.next_f64();
            let ga = moreau_env_grad_l1(&a, mu);
            let gb = moreau_env_grad_l1(&b, mu);
            assert!(dist(&ga, &gb) <= dist(&a, &b) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn firm_nonexpansiveness_of_vector_proxes() {
        let mut rng = SplitMix64::new(10);
        type Op = fn(&[f64], f64) -> Vec<f64>;
        let ops: [(&str, Op); 4] = [
            ("l1", prox_l1 as Op),
            ("linf", prox_linf as Op),
            ("tv", prox_tv1d as Op),
            ("l1ball", (|z, _lam| project_l1_ball(z, 1.0)) as Op),
        ];
        for (name, op) in ops {
            for _ in 0..200 {
                let n = 2 + rng.next_below(6);
                let a: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| 2.0 * v).collect();
                let b: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| 2.0 * v).collect();
                let lam = 0.2 + rng.next_f64();
                let pa = op(&a, lam);
                let pb = op(&b, lam);
                let dp = sub(&pa, &pb);
                let lhs = dot(&dp, &dp);
                let rhs = dot(&dp, &sub(&a, &b));
                assert!(lhs <= rhs + 1e-10, "{name}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn firm_nonexpansiveness_of_nuclear_prox() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..100 {
            let a = DenseMatrix::from_data(3, 3, rng.gaussian_vec(9));
            let b = DenseMatrix::from_data(3, 3, rng.gaussian_vec(9));
            let lam = 0.2 + rng.next_f64();
            let pa = prox_nuclear(&a, lam);
            let pb = prox_nuclear(&b, lam);
            let dp = sub(&pa.data, &pb.data);
            let lhs = dot(&dp, &dp);
            let rhs = dot(&dp, &sub(&a.data, &b.data));
            assert!(lhs <= rhs + 1e-10);
        }
    }

    #[test]
    fn l1_ball_projection_norm_never_exceeds_radius() {
        let mut rng = SplitMix64::new(12);
        for _ in 0..500 {
            let n = 1 + rng.next_below(30);
            let z: Vec<f64> = rng.gaussian_vec(n).iter().map(|v| 5.0 * v).collect();
            let r = 0.1 + 4.0 * rng.next_f64();
            let p = project_l1_ball(&z, r);
            let l1: f64 = p.iter().map(|v| v.abs()).sum();
            assert!(l1 <= r + 1e-12);
            let _ = norm(&p);
        }
    }
}
