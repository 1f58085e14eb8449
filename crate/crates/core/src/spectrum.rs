//! First eigenpairs of the linearized operators.
//!
//! Two radial Schrödinger operators drive the blow-up analysis: the
//! linearization at a stationary solution,
//!
//! ```text
//!     L_p φ = −φ″ − φ′/r − p|u_p(r)|^{p−1} φ     on (0, 1),
//! ```
//!
//! and the limit operator L* = −Δ − e^U on ℝ². The potential of L_p
//! equals p·u_p(0)^{p−1} at the origin, which overflows f64 long before
//! p reaches the upper end of the sweep, so L_p is never discretized in
//! the physical radius. Instead everything is solved in the bubble
//! coordinate s = r/μ_p⁺, where the operator becomes
//!
//! ```text
//!     L̃_p φ̃ = −φ̃″ − φ̃′/s − V_p(s) φ̃,    V_p(s) = |u(μ_p⁺ s)/u(0)|^{p−1},
//! ```
//!
//! with eigenvalue λ̃₁,p = (μ_p⁺)²·λ₁,p of order one, and 0 ≤ V_p ≤ 1.
//! The rescaling is an exact L²-isometry, so norms and scalar products
//! computed in the s frame transfer verbatim.
//!
//! Discretization is a finite-volume scheme on the radial cells,
//! symmetric with respect to the 2πr dr inner product after a diagonal
//! similarity; the ground state comes from the tridiagonal solver in
//! [`crate::tridiag`]. The Neumann condition at the origin is built
//! into the first cell (no ghost nodes), and the outer boundary is
//! Dirichlet — on the disk itself for moderate potentials, at a
//! truncation radius for L* and the rescaled L_p, where the ground
//! state decays like exp(−√(−λ)·s) and the truncation error at
//! s = 200 is far below every tolerance in play.

use serde::Serialize;
use crate::error::{LabError, Result};
use crate::liouville::LiouvilleBubble;
use crate::stationary::StationarySolution;
use crate::tridiag::SymTridiag;

/// A converged ground-state pair on an explicit radial grid.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    /// Ground eigenvalue of the discretized operator.
    pub lambda: f64,
    /// Grid nodes, including the final Dirichlet node.
    pub r: Vec<f64>,
    /// Eigenfunction samples at the nodes; the last entry is the
    /// Dirichlet zero. Nonnegative, normalized to ‖φ‖ = 1 in the
    /// lumped 2πr dr inner product.
    pub phi: Vec<f64>,
    /// Lumped cell masses for the unknown nodes (len = r.len() − 1).
    pub mass: Vec<f64>,
}

impl EigenPair {
    /// Lumped L² inner product ⟨f, g⟩ = Σ m_i f_i g_i over the unknown
    /// nodes.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.mass
            .iter()
            .zip(f.iter().zip(g))
            .map(|(&m, (&a, &b))| m * a * b)
            .sum()
    }

    /// ‖φ‖ in the lumped measure (should be 1 after construction).
    pub fn l2_norm(&self) -> f64 {
        self.inner(&self.phi, &self.phi).sqrt()
    }
}

/// Finite-volume discretization of −Δ − q(r) on [0, r_end] with a
/// natural (Neumann) condition at 0 and Dirichlet at r_end.
pub struct RadialOperator {
    /// Nodes, the last one carrying the Dirichlet condition.
    pub r: Vec<f64>,
    /// Cell masses m_i = π(r²_{i+1/2} − r²_{i−1/2}) per unknown node.
    pub mass: Vec<f64>,
    /// Flux coefficients 2π r_{i+1/2}/Δr between nodes i and i+1 (the
    /// last entry couples to the Dirichlet node).
    pub flux: Vec<f64>,
    /// Potential samples q(r_i) at the unknown nodes.
    pot: Vec<f64>,
}

impl RadialOperator {
    /// Assembles the operator on the given strictly increasing nodes
    /// starting at 0; all nodes but the last are unknowns.
    pub fn assemble(nodes: &[f64], q: impl Fn(f64) -> f64) -> Self {
        let n = nodes.len() - 1; // unknowns
        assert!(n >= 2, "need at least two unknown nodes");
        assert_eq!(nodes[0], 0.0, "radial grid must start at the origin");
        let half = |i: usize| 0.5 * (nodes[i] + nodes[i + 1]);
        let mut mass = Vec::with_capacity(n);
        let mut flux = Vec::with_capacity(n);
        let mut pot = Vec::with_capacity(n);
        for i in 0..n {
            let r_lo = if i == 0 { 0.0 } else { half(i - 1) };
            let r_hi = half(i);
            mass.push(std::f64::consts::PI * (r_hi * r_hi - r_lo * r_lo));
            flux.push(
                std::f64::consts::TAU * r_hi / (nodes[i + 1] - nodes[i]),
            );
            pot.push(q(nodes[i]));
        }
        RadialOperator {
            r: nodes.to_vec(),
            mass,
            flux,
            pot,
        }
    }

    /// The similarity-transformed matrix B = M^{-1/2} A M^{-1/2},
    /// symmetric tridiagonal with the same spectrum as the generalized
    /// pencil (A, M).
    fn folded(&self) -> SymTridiag {
        let n = self.mass.len();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n - 1);
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { self.flux[i - 1] };
            let a_ii = left + self.flux[i] - self.pot[i] * self.mass[i];
            diag.push(a_ii / self.mass[i]);
            if i + 1 < n {
                off.push(-self.flux[i] / (self.mass[i] * self.mass[i + 1]).sqrt());
            }
        }
        SymTridiag { diag, off }
    }

    /// Ground-state pair. The eigenvector is mapped back to nodal
    /// values φ = M^{-1/2}ψ, sign-fixed, checked for nonnegativity
    /// (roundoff dips below 1e−12 of the max are clipped) and
    /// normalized in the lumped measure.
    pub fn ground_state(&self) -> Result<EigenPair> {
        let b = self.folded();
        let (lambda, psi) = b.ground_state()?;
        let n = self.mass.len();
        let mut phi: Vec<f64> = (0..n).map(|i| psi[i] / self.mass[i].sqrt()).collect();
        if phi[0] < 0.0 {
            for x in &mut phi {
                *x = -*x;
            }
        }
        let peak = phi.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        let mut min_value = 0.0_f64;
        for x in &mut phi {
            if *x < 0.0 {
                min_value = min_value.min(*x);
                if *x > -1e-12 * peak {
                    *x = 0.0;
                }
            }
        }
        if min_value < -1e-12 * peak {
            return Err(LabError::NonNegativeGroundState { min_value });
        }
        // normalize in the lumped 2πr dr measure
        let norm: f64 = self
            .mass
            .iter()
            .zip(&phi)
            .map(|(&m, &f)| m * f * f)
            .sum::<f64>()
            .sqrt();
        let mut phi: Vec<f64> = phi.iter().map(|&f| f / norm).collect();
        phi.push(0.0); // the Dirichlet node
        Ok(EigenPair {
            lambda,
            r: self.r.clone(),
            phi,
            mass: self.mass.clone(),
        })
    }

    /// Rayleigh quotient of an arbitrary trial function given by its
    /// nodal values (the Dirichlet node is implicit): never below the
    /// ground eigenvalue.
    pub fn rayleigh(&self, trial: &[f64]) -> f64 {
        let n = self.mass.len();
        assert_eq!(trial.len(), n);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let next = if i + 1 < n { trial[i + 1] } else { 0.0 };
            num += self.flux[i] * (trial[i] - next) * (trial[i] - next);
            num -= self.pot[i] * self.mass[i] * trial[i] * trial[i];
            den += self.mass[i] * trial[i] * trial[i];
        }
        num / den
    }

    /// Relative eigen-residual ‖Aφ − λMφ‖ / (‖A‖-scale·‖φ‖) in the
    /// folded frame, the solver-facing convergence measure.
    pub fn residual(&self, pair: &EigenPair) -> f64 {
        let b = self.folded();
        let n = self.mass.len();
        let psi: Vec<f64> = (0..n)
            .map(|i| pair.phi[i] * self.mass[i].sqrt())
            .collect();
        let bpsi = b.apply(&psi);
        let num: f64 = bpsi
            .iter()
            .zip(&psi)
            .map(|(&a, &p)| (a - pair.lambda * p) * (a - pair.lambda * p))
            .sum::<f64>()
            .sqrt();
        let den: f64 = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (lo, hi) = b.gershgorin();
        num / (den * hi.abs().max(lo.abs()).max(1.0))
    }
}

/// Uniform nodes 0, h, …, r_end.
pub fn uniform_nodes(r_end: f64, n_cells: usize) -> Vec<f64> {
    let h = r_end / n_cells as f64;
    (0..=n_cells).map(|i| i as f64 * h).collect()
}

/// Default truncation radius for rescaled and limit eigen solves.
pub const S_TRUNC: f64 = 200.0;
/// Default cell count on [0, S_TRUNC] (h = 0.0025).
pub const S_CELLS: usize = 80_000;

/// First eigenpair of L_p, carried in the bubble frame.
#[derive(Debug, Clone, Serialize)]
pub struct LpEigenPair {
    /// The pair of the rescaled operator: `scaled.lambda` is λ̃₁,p and
    /// `scaled.phi` is φ̃₁,p on the s grid.
    pub scaled: EigenPair,
    /// λ̃₁,p = (μ_p⁺)² λ₁,p, order one and negative.
    pub lambda_tilde: f64,
    /// λ₁,p in physical units; −∞ when (μ_p⁺)^{−2} overflows, which is
    /// the honest f64 rendering of its actual magnitude.
    pub lambda: f64,
    /// Potential samples V_p(s_i) on the same grid.
    pub potential: Vec<f64>,
    pub mu_plus: f64,
    pub ln_mu_plus: f64,
}

/// Solves for the first eigenpair of the linearization at `sol`,
/// discretized in the bubble coordinate on [0, S_TRUNC] with `n_cells`
/// cells. λ₁,p < 0 must hold for every p > 1.
pub fn first_eigenpair_lp(
    sol: &StationarySolution,
    n_cells: usize,
) -> Result<LpEigenPair> {
    let nodes = uniform_nodes(S_TRUNC, n_cells);
    // the disk in bubble units must contain the truncation window
    if sol.s_end() <= S_TRUNC {
        return Err(LabError::WindowExceedsDomain {
            window: S_TRUNC,
            limit: sol.s_end(),
        });
    }
    let op = RadialOperator::assemble(&nodes, |s| sol.potential_v(s));
    let scaled = op.ground_state()?;
    let lambda_tilde = scaled.lambda;
    if lambda_tilde >= 0.0 {
        return Err(LabError::EigenSolveDiverged(format!(
            "lambda_tilde = {lambda_tilde} is not negative; discretization too coarse"
        )));
    }
    // λ = λ̃ / (μ⁺)², evaluated in logs to saturate to −∞ gracefully
    let ln_scale = -2.0 * sol.ln_mu_plus;
    let lambda = if ln_scale > 709.0 {
        f64::NEG_INFINITY
    } else {
        lambda_tilde * ln_scale.exp()
    };
    let potential = nodes.iter().map(|&s| sol.potential_v(s)).collect();
    Ok(LpEigenPair {
        scaled,
        lambda_tilde,
        lambda,
        potential,
        mu_plus: sol.mu_plus,
        ln_mu_plus: sol.ln_mu_plus,
    })
}

/// Ground state of the limit operator L* = −Δ − e^U, truncated to
/// [0, r_trunc] with Dirichlet at the outer edge. λ decreases as
/// r_trunc grows (domain monotonicity) toward λ₁*.
pub fn limit_first_eigenpair(r_trunc: f64, n_cells: usize) -> Result<EigenPair> {
    assert!(r_trunc >= 50.0, "truncation radius below the supported range");
    assert!(n_cells >= 2000, "limit solve needs at least 2000 cells");
    let nodes = uniform_nodes(r_trunc, n_cells);
    let op = RadialOperator::assemble(&nodes, LiouvilleBubble::e_u);
    op.ground_state()
}

/// λ₁* at the reference resolution, with Richardson extrapolation in
/// 1/R² over the truncation radius recorded alongside.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitEigenvalue {
    /// Value at R = S_TRUNC, the one every comparison uses.
    pub lambda_star: f64,
    /// Richardson extrapolation from R ∈ {S_TRUNC/2, S_TRUNC}.
    pub extrapolated: f64,
}

/// Computes λ₁* at the reference resolution (h matching the rescaled
/// L_p solves so discretization bias cancels in comparisons).
pub fn limit_eigenvalue(n_cells: usize) -> Result<LimitEigenvalue> {
    let full = limit_first_eigenpair(S_TRUNC, n_cells)?;
    let half = limit_first_eigenpair(S_TRUNC / 2.0, n_cells / 2)?;
    // λ(R) ≈ λ* + c/R²: eliminate c from the two truncations
    let r2 = S_TRUNC * S_TRUNC;
    let r2h = r2 / 4.0;
    let extrapolated =
        (full.lambda / r2h - half.lambda / r2) / (1.0 / r2h - 1.0 / r2);
    Ok(LimitEigenvalue {
        lambda_star: full.lambda,
        extrapolated,
    })
}

/// One row of the spectral convergence table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenRow {
    pub p: f64,
    pub lambda_tilde: f64,
    /// |λ̃₁,p − λ₁*|.
    pub err_lambda: f64,
    /// ‖φ̃₁,p − φ₁*‖_{L²} on the shared grid.
    pub err_phi: f64,
    /// ∫ (e^U − V_p) φ̃₁,p² over the truncated window.
    pub gap_integral: f64,
}

/// Spectral convergence report across a p sweep at fixed K.
#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub k: usize,
    pub lambda_star: f64,
    pub rows: Vec<EigenRow>,
    /// Set when an error column fails to decrease monotonically; the
    /// paper only guarantees subsequence convergence, so this is a
    /// flag, not a failure.
    pub non_monotone: bool,
}

/// Builds the convergence table of λ̃₁,p and φ̃₁,p against the limit
/// pair, at the shared reference resolution.
pub fn eigen_convergence_report(
    solutions: &[&StationarySolution],
    n_cells: usize,
) -> Result<EigenReport> {
    if solutions.is_empty() {
        return Err(LabError::EmptySweep("p_sweep"));
    }
    let k = solutions[0].k;
    let star = limit_first_eigenpair(S_TRUNC, n_cells)?;
    let mut rows = Vec::with_capacity(solutions.len());
    for sol in solutions {
        let lp = first_eigenpair_lp(sol, n_cells)?;
        let n = lp.scaled.mass.len();
        let mut err_phi2 = 0.0;
        let mut gap = 0.0;
        for i in 0..n {
            let d = lp.scaled.phi[i] - star.phi[i];
            err_phi2 += lp.scaled.mass[i] * d * d;
            gap += lp.scaled.mass[i]
                * (LiouvilleBubble::e_u(lp.scaled.r[i]) - lp.potential[i])
                * lp.scaled.phi[i]
                * lp.scaled.phi[i];
        }
        rows.push(EigenRow {
            p: sol.p,
            lambda_tilde: lp.lambda_tilde,
            err_lambda: (lp.lambda_tilde - star.lambda).abs(),
            err_phi: err_phi2.sqrt(),
            gap_integral: gap,
        });
    }
    let non_monotone = rows
        .windows(2)
        .any(|w| w[1].err_lambda > w[0].err_lambda || w[1].err_phi > w[0].err_phi);
    Ok(EigenReport {
        k,
        lambda_star: star.lambda,
        rows,
        non_monotone,
    })
}
