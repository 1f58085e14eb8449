//! Radial stationary solutions with a prescribed number of nodal regions.
//!
//! From a normalized shot w with K zeros ρ_1 < ... < ρ_K, the scaled
//! function u(r) = γ w(ρ_K r), γ = ρ_K^{2/(p-1)}, solves the stationary
//! problem on the unit disk with u(1) = 0 and K nodal regions. The
//! concentration scales follow from γ^{p-1} = ρ_K²:
//!
//! ```text
//! μ_p⁺ = (p u(0)^{p-1})^{-1/2} = 1 / (√p ρ_K),
//! ```
//!
//! which underflows in plain arithmetic once p is large, so μ_p^± are
//! carried in log scale alongside their f64 values.

use crate::error::{LabError, Result};
use crate::grid::RadialGrid;
use crate::quad::gauss_legendre;
use crate::shooting::{shoot_ivp, RawShot, ShotParams};
use serde::{Deserialize, Serialize};

/// Sampled radial solution u_{p,K} with nodal radii, extrema and scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarySolution {
    pub p: f64,
    pub k: usize,
    pub shot: RawShot,
    /// ln ρ_K (log radius of the K-th shooting zero).
    pub t_k: f64,
    /// γ = ρ_K^{2/(p-1)}; u(0) = γ w(0).
    pub gamma: f64,
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Interior nodal radii r_{p,1} < ... < r_{p,K-1}.
    pub nodal_radii: Vec<f64>,
    pub u_max: f64,
    pub u_min: f64,
    pub r_min: f64,
    /// Most negative value of the normalized profile, w_min = u_min/u(0).
    pub w_min: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub ln_mu_plus: f64,
    pub ln_mu_minus: f64,
}

/// Number of r-grid nodes kept on the stored solution.
pub const DEFAULT_GRID_NODES: usize = 4000;

/// Builds u_{p,K} by shooting and exact scaling.
pub fn build_stationary(p: f64, k: usize, params: &ShotParams) -> Result<StationarySolution> {
    assert!(k >= 1);
    let shot = shoot_ivp(p, k, params)?;
    Ok(from_shot(shot, k))
}

fn from_shot(shot: RawShot, k: usize) -> StationarySolution {
    let p = shot.p;
    let a = shot.series.a;
    let t_k = *shot.zeros_t.last().unwrap();
    let gamma = (2.0 * t_k / (p - 1.0)).exp();
    let u_max = gamma * a;

    // interior nodal radii
    let nodal_radii: Vec<f64> = shot.zeros_t[..k - 1]
        .iter()
        .map(|tz| (tz - t_k).exp())
        .collect();

    // global minimum over interior extrema (the first negative bubble)
    let mut w_min = 0.0f64;
    let mut t_min = t_k;
    for (t, w) in shot.extrema() {
        if w / a < w_min {
            w_min = w / a;
            t_min = t;
        }
    }
    let u_min = u_max * w_min;
    let r_min = (t_min - t_k).exp();

    let ln_mu_plus = -0.5 * p.ln() - t_k - 0.5 * (p - 1.0) * a.abs().ln();
    let ln_mu_minus = if w_min < 0.0 {
        ln_mu_plus - 0.5 * (p - 1.0) * w_min.abs().ln()
    } else {
        f64::INFINITY
    };

    // stored r-grid: subsampled shot nodes mapped through r = e^{t - t_K},
    // naturally graded toward the origin at the bubble scale
    let stride = (shot.nodes.len() / DEFAULT_GRID_NODES).max(1);
    let mut nodes_r = vec![0.0];
    let mut u = vec![u_max];
    let mut du = vec![0.0];
    let last = shot.nodes.len() - 1;
    for (i, n) in shot.nodes.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let r = (n.t - t_k).exp();
        nodes_r.push(r);
        u.push(gamma * n.w);
        du.push(gamma * n.wt / r);
    }
    // the final node sits on the K-th zero: store the Dirichlet value
    // exactly instead of the refined zero's roundoff-size w
    *u.last_mut().unwrap() = 0.0;
    let grid = RadialGrid::from_nodes(nodes_r);

    StationarySolution {
        p,
        k,
        shot,
        t_k,
        gamma,
        grid,
        u,
        du,
        nodal_radii,
        u_max,
        u_min,
        r_min,
        w_min,
        mu_plus: ln_mu_plus.exp(),
        mu_minus: ln_mu_minus.exp(),
        ln_mu_plus,
        ln_mu_minus,
    }
}

impl StationarySolution {
    /// u(r) for r in [0, 1].
    pub fn u_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.u_max;
        }
        let t = r.ln() + self.t_k;
        self.gamma * self.shot.w(t)
    }

    /// u'(r) for r in (0, 1].
    pub fn du_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let t = r.ln() + self.t_k;
        self.gamma * self.shot.eval(t).1 / r
    }

    /// Value at the boundary (zero up to the zero-refinement tolerance).
    pub fn boundary_value(&self) -> f64 {
        self.gamma * self.shot.w(self.t_k)
    }

    /// ln of the map s ↦ ln ρ for the rescaled coordinate s = r/μ_p⁺:
    /// t = ln s + ln(ρ_K μ_p⁺).
    fn ln_smap(&self) -> f64 {
        self.t_k + self.ln_mu_plus
    }

    /// Normalized profile at the bubble scale: ũ(s) = u(μ_p⁺ s)/u(0).
    pub fn u_tilde(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        self.shot.w(s.ln() + self.ln_smap()) / self.shot.series.a
    }

    /// d/ds of ũ.
    pub fn du_tilde(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.shot.eval(s.ln() + self.ln_smap()).1 / (self.shot.series.a * s)
    }

    /// V_p(s) = |ũ(s)|^{p-1}, evaluated in log scale.
    pub fn potential_v(&self, s: f64) -> f64 {
        let ut = self.u_tilde(s).abs();
        if ut < 1e-300 {
            return 0.0;
        }
        let ex = (self.p - 1.0) * ut.ln();
        if ex < -745.0 {
            0.0
        } else {
            ex.exp()
        }
    }

    /// Largest s covered by the rescaled coordinate (1/μ_p⁺, capped to
    /// f64 range).
    pub fn s_end(&self) -> f64 {
        let ln_s = -self.ln_mu_plus;
        if ln_s > 700.0 {
            f64::INFINITY
        } else {
            ln_s.exp()
        }
    }

    /// (p ∫ |∇u|², p ∫ |u|^{p+1}) over the disk; equal for exact
    /// solutions by integration by parts.
    ///
    /// Both integrals are evaluated in the log-radius coordinate, where
    /// ∫ u'² r dr = γ² ∫ w_t² dt and
    /// ∫ |u|^{p+1} r dr = γ² ∫ e^{(p+1) ln|w| + 2(t - t_K)} dt,
    /// with γ-free series contributions below the handoff point.
    pub fn energy_functionals(&self) -> (f64, f64) {
        let p = self.p;
        let two_pi = 2.0 * std::f64::consts::PI;
        let g2 = self.gamma * self.gamma;
        let a = self.shot.series.a;

        // series region in ζ = √A ρ
        let s = &self.shot.series;
        let zeta0 = s.sqrt_amp * s.t0.exp();
        let dgrad = |z: f64| {
            let g = z * (2.0 * s.c2 + z * z * (4.0 * s.c4 + z * z * 6.0 * s.c6));
            g * g * z
        };
        let dpot = |z: f64| {
            let z2 = z * z;
            let wn = 1.0 + z2 * (s.c2 + z2 * (s.c4 + z2 * s.c6));
            ((p + 1.0) * wn.abs().ln()).exp() * z
        };
        let mut grad = a * a * gauss_legendre(dgrad, 0.0, zeta0, 2);
        let mut pot = a * a * gauss_legendre(dpot, 0.0, zeta0, 2);

        // main region, interval-by-interval on the shot nodes
        for i in 0..self.shot.nodes.len() - 1 {
            let (ta, tb) = (self.shot.nodes[i].t, self.shot.nodes[i + 1].t);
            grad += gauss_legendre(
                |t| {
                    let wt = self.shot.eval(t).1;
                    wt * wt
                },
                ta,
                tb,
                1,
            );
            // γ^{p+1} = γ² e^{2 t_K}, so relative to the γ² prefactor the
            // integrand of ∫ |u|^{p+1} r dr carries e^{(p+1) ln|w| + 2t}
            pot += gauss_legendre(
                |t| {
                    let w = self.shot.w(t).abs();
                    if w < 1e-300 {
                        return 0.0;
                    }
                    let ex = (p + 1.0) * w.ln() + 2.0 * t;
                    if ex < -745.0 {
                        0.0
                    } else {
                        ex.exp()
                    }
                },
                ta,
                tb,
                1,
            );
        }
        (p * two_pi * g2 * grad, p * two_pi * g2 * pot)
    }

    /// Scaled ODE defect of the underlying shot.
    pub fn residual_sup(&self) -> f64 {
        self.shot.defect_sup()
    }

    /// sup of |u/u(0)|^{p-1} over {r : r_lo < r ≤ r_hi} (radii in [0,1],
    /// log-scale evaluation). Candidates: grid nodes, refined interior
    /// extrema and the interval endpoints.
    pub fn sup_ratio_pow(&self, r_lo: f64, r_hi: f64) -> f64 {
        let sup_w = self.sup_abs_w_normalized(r_lo, r_hi);
        if sup_w <= 0.0 {
            return 0.0;
        }
        let ex = (self.p - 1.0) * sup_w.ln();
        if ex < -745.0 {
            0.0
        } else {
            ex.exp()
        }
    }

    /// sup of |u(r)/u(0)| over (r_lo, r_hi].
    pub fn sup_abs_w_normalized(&self, r_lo: f64, r_hi: f64) -> f64 {
        assert!(r_lo < r_hi);
        let a = self.shot.series.a;
        let t_lo = if r_lo <= 0.0 {
            f64::NEG_INFINITY
        } else {
            r_lo.ln() + self.t_k
        };
        let t_hi = r_hi.ln() + self.t_k;
        let mut sup: f64 = 0.0;
        // left endpoint (w is monotone near 0, so the endpoint dominates
        // any unsampled stretch there)
        if t_lo == f64::NEG_INFINITY {
            sup = 1.0;
        } else {
            sup = sup.max((self.shot.w(t_lo) / a).abs());
        }
        sup = sup.max((self.shot.w(t_hi) / a).abs());
        for n in &self.shot.nodes {
            if n.t > t_lo && n.t < t_hi {
                sup = sup.max((n.w / a).abs());
            }
        }
        for (t, w) in self.shot.extrema() {
            if t > t_lo && t < t_hi {
                sup = sup.max((w / a).abs());
            }
        }
        sup
    }

    /// Positive nodal regions as radius intervals (lo, hi) within (0, 1].
    pub fn positive_regions(&self) -> Vec<(f64, f64)> {
        let mut bounds = vec![0.0];
        bounds.extend_from_slice(&self.nodal_radii);
        bounds.push(1.0);
        let mut out = Vec::new();
        for i in 0..self.k {
            // sign of region i alternates starting positive at the origin
            if i % 2 == 0 {
                out.push((bounds[i], bounds[i + 1]));
            }
        }
        out
    }
}

/// Checks that re-shooting with initial value u(0) instead of 1
/// reproduces u on [0,1]; returns the sup-norm discrepancy over the
/// stored grid. Only meaningful while u(0)^{p-1} fits in f64.
pub fn reshoot_discrepancy(sol: &StationarySolution, params: &ShotParams) -> Result<f64> {
    let params2 = ShotParams {
        w0: sol.u_max,
        ..params.clone()
    };
    let direct = build_stationary(sol.p, sol.k, &params2)?;
    // The re-shot K-th zero must land at radius one, ρ̄_K = 1, up to the
    // zero-location accuracy of the integrator over the full span.
    if (direct.t_k).abs() > 1e-6 {
        return Err(LabError::InvalidConfig {
            field: "reshoot",
            message: format!("re-shot boundary zero at ln rho = {}", direct.t_k),
        });
    }
    let mut sup: f64 = 0.0;
    for (i, &r) in sol.grid.nodes().iter().enumerate() {
        sup = sup.max((direct.u_at(r) - sol.u[i]).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(p: f64, k: usize) -> StationarySolution {
        build_stationary(p, k, &ShotParams::default()).unwrap()
    }

    #[test]
    fn k1_positive_no_sign_change() {
        let sol = build(5.0, 1);
        assert!(sol.nodal_radii.is_empty());
        for &u in &sol.u[..sol.u.len() - 1] {
            assert!(u >= 0.0);
        }
        assert!(sol.boundary_value().abs() < 1e-10);
    }

    #[test]
    fn scaling_identity_p50_k2() {
        // u(0) = ρ_2^{2/49}
        let sol = build(50.0, 2);
        let rho2 = sol.t_k; // ln ρ_2
        assert!((sol.u_max.ln() - 2.0 * rho2 / 49.0).abs() < 1e-12);
        assert!(sol.u_min < 0.0 && sol.u_min.abs() < sol.u_max);
        // direct residual of the scaled profile
        assert!(sol.residual_sup() < 1e-8);
    }

    #[test]
    fn large_p_max_lower_bound() {
        // liminf of u_p(0) is at least 1
        let sol = build(500.0, 2);
        assert!(sol.u_max >= 0.95);
    }

    #[test]
    fn mu_ordering_and_logs() {
        let sol = build(100.0, 2);
        assert!(sol.mu_plus <= sol.mu_minus);
        assert!(sol.mu_plus > 0.0);
        assert!((sol.mu_plus.ln() - sol.ln_mu_plus).abs() < 1e-10);
    }

    #[test]
    fn sign_changes_count() {
        for k in [2usize, 3] {
            let sol = build(20.0, k);
            let mut changes = 0;
            let interior = &sol.u[1..sol.u.len() - 1];
            for pair in interior.windows(2) {
                if pair[0].signum() != pair[1].signum() && pair[0] != 0.0 && pair[1] != 0.0 {
                    changes += 1;
                }
            }
            assert_eq!(changes, k - 1, "K = {k}");
        }
    }

    #[test]
    fn energy_identity() {
        let sol = build(100.0, 2);
        let (grad, pot) = sol.energy_functionals();
        assert!(grad > 0.0);
        assert!(
            (grad - pot).abs() / grad < 1e-6,
            "grad = {grad}, pot = {pot}"
        );
    }

    #[test]
    fn reshoot_self_consistency() {
        let sol = build(50.0, 2);
        let sup = reshoot_discrepancy(&sol, &ShotParams::default()).unwrap();
        assert!(sup < 1e-7, "sup discrepancy {sup}");
    }

    #[test]
    fn mu_decreasing_along_p() {
        let mut prev_plus = f64::INFINITY;
        let mut prev_ratio = f64::INFINITY;
        for p in [20.0, 50.0, 100.0, 200.0] {
            let sol = build(p, 2);
            let ratio = (sol.ln_mu_plus - sol.ln_mu_minus).exp();
            assert!(sol.ln_mu_plus.exp() < prev_plus);
            assert!(ratio < prev_ratio);
            prev_plus = sol.ln_mu_plus.exp();
            prev_ratio = ratio;
        }
    }
}
