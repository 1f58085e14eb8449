//! The radial semilinear heat flow and its blow-up classification.
//!
//! The dynamical problem is v_t = Δv + |v|^{p−1}v on the unit disk
//! with Dirichlet boundary, radial data v₀ = λ·u_{p,K}. Radial
//! symmetry is preserved by the flow (the data are radial and the
//! equation is rotation invariant), so the 2D problem is integrated as
//! 1D in the radius on the same finite-volume cells as the spectral
//! module, log-graded so the concentration scale μ_p⁺ is resolved.
//!
//! The stationary solution is a violently unstable equilibrium: the
//! first eigenvalue of the linearization is λ₁,p = λ̃₁,p/(μ_p⁺)², of
//! order −10⁴⁰ already at p = 100. No explicit or IMEX treatment of
//! the reaction survives that stiffness, so each step is a fully
//! implicit backward Euler solve, Newton on the nonlinear system with
//! a pivoted tridiagonal Jacobian, and the step size is governed by
//! step-doubling error control. Implicit Euler damps modes it cannot
//! resolve (growth factor 1/(1−dt·|λ₁|) shrinks for large dt), which
//! is a deliberate property here: the λ = 1 trajectory must sit on the
//! discrete equilibrium instead of amplifying roundoff, and the datum
//! is Newton-projected onto that equilibrium before stepping so the
//! discrete stationarity residual genuinely vanishes.
//!
//! Two f64 cliffs shape the defaults. The reaction |v|^{p−1}v is
//! evaluated as exp(p·ln|v|), which overflows once p·ln‖v‖ > 709, so
//! the blow-up threshold is capped at exp(650/p). And near blow-up the
//! remaining time (T − t) ≈ ‖v‖^{−(p−1)}/(p−1) drops below the ulp of
//! t itself, so the blow-up time is fitted only on samples with
//! distinct time stamps and the final crossing contributes its own
//! clock reading.

use serde::Serialize;
use crate::error::{LabError, Result};
use crate::spectrum::RadialOperator;
use rayon::prelude::*;
use crate::stationary::StationarySolution;
use crate::tridiag::solve_tridiag;

/// Integrator configuration; defaults satisfy the desk-scale runs.
#[derive(Debug, Clone, Serialize)]
pub struct SchemeParams {
    /// Cells of the log-graded spatial grid.
    pub n_cells: usize,
    /// Hard cap on the initial step.
    pub dt_init_cap: f64,
    /// Largest accepted step.
    pub dt_max: f64,
    /// Step-underflow floor.
    pub dt_min: f64,
    /// Step-doubling relative error tolerance.
    pub err_tol: f64,
    /// Blow-up threshold (further capped at exp(650/p)).
    pub m_big: f64,
    /// Decay threshold for the global classification.
    pub delta_decay: f64,
    /// Sup-distance to the initial equilibrium accepted as "still
    /// stationary" for the Global verdict.
    pub stationary_tol: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            n_cells: 2000,
            dt_init_cap: 1e-3,
            dt_max: 0.25,
            dt_min: 1e-300,
            err_tol: 1e-4,
            m_big: 1e8,
            delta_decay: 1e-8,
            stationary_tol: 1e-4,
        }
    }
}

/// Trajectory verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Classification {
    Global,
    BlowUp {
        /// Fitted blow-up time.
        t_est: f64,
    },
    Undecided,
}

/// Recorded run of the flow for one datum.
#[derive(Debug, Clone, Serialize)]
pub struct HeatTrajectory {
    pub p: f64,
    pub k: usize,
    pub lambda: f64,
    /// Accepted sample times (strictly increasing as f64 allows; steps
    /// below the ulp of t are recorded at the same stamp and deduced
    /// away by the fit).
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Discrete energy ∫(|∇v|²/2 − |v|^{p+1}/(p+1)); −∞ once the
    /// potential term overflows near blow-up.
    pub energies: Vec<f64>,
    /// sup_i |v_i − v₀_i| per sample (distance to the initial datum).
    pub deviation: Vec<f64>,
    /// Whether ‖v‖_∞ crossed the (capped) blow-up threshold.
    pub crossed_threshold: bool,
    /// Whether the sup norm fell below the decay threshold.
    pub decayed: bool,
    /// Whether the horizon was reached.
    pub horizon_reached: bool,
    pub final_dt: f64,
    pub max_dt: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Threshold actually in force (after the exp(650/p) cap).
    pub threshold: f64,
    pub params: SchemeParams,
}

/// |v|^{p−1}v and its derivative p|v|^{p−1}, in log scale. `None`
/// signals overflow, which the stepper treats as a rejected step.
fn reaction(p: f64, v: f64) -> Option<(f64, f64)> {
    if v == 0.0 {
        return Some((0.0, 0.0));
    }
    let lnv = v.abs().ln();
    let lf = p * lnv;
    if lf > 700.0 {
        return None;
    }
    let f = if lf < -745.0 { 0.0 } else { lf.exp() };
    let lfp = (p - 1.0) * lnv + p.ln();
    let fp = if lfp > 700.0 {
        return None;
    } else if lfp < -745.0 {
        0.0
    } else {
        lfp.exp()
    };
    Some((v.signum() * f, fp))
}

/// The spatial discretization: masses and fluxes of the log-graded
/// cells, plus the stationary datum sampled on them.
struct HeatGrid {
    mass: Vec<f64>,
    flux: Vec<f64>,
}

impl HeatGrid {
    fn build(sol: &StationarySolution, n_cells: usize) -> (HeatGrid, Vec<f64>) {
        // inner node safely below the bubble scale
        let r_inner = (sol.ln_mu_plus - 3.0).exp().max(1e-306);
        let grid = crate::grid::RadialGrid::log_graded(r_inner, 1.0, n_cells);
        let nodes = grid.nodes();
        let op = RadialOperator::assemble(nodes, |_| 0.0);
        let datum: Vec<f64> = nodes[..nodes.len() - 1]
            .iter()
            .map(|&r| sol.u_at(r))
            .collect();
        (
            HeatGrid {
                mass: op.mass.clone(),
                flux: op.flux.clone(),
            },
            datum,
        )
    }

    fn n(&self) -> usize {
        self.mass.len()
    }

    /// (A v)_i: flux form of −Δ with the Dirichlet node folded in.
    fn laplacian(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            out[i] += self.flux[i] * (v[i] - right);
            if i > 0 {
                out[i] += self.flux[i - 1] * (v[i] - v[i - 1]);
            }
        }
        out
    }

    /// Scaled residual of the discrete stationary equation
    /// Δv + |v|^{p−1}v = 0. Each component of Av − Mf(v) is measured
    /// against the magnitudes of the terms that formed it — the raw
    /// residual is meaningless when f ~ 10⁴⁰, and dividing by the cell
    /// mass alone is just as bad in the intermediate annulus, whose
    /// cells carry negligible measure while the flux terms cancel to
    /// roundoff.
    fn stationary_residual(&self, p: f64, v: &[f64]) -> f64 {
        let n = self.n();
        let av = self.laplacian(v);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (f, _) = reaction(p, v[i]).unwrap_or((f64::INFINITY, 0.0));
            let right = if i + 1 < n { v[i + 1].abs() } else { 0.0 };
            let mut scale = self.flux[i] * (v[i].abs() + right);
            if i > 0 {
                scale += self.flux[i - 1] * (v[i].abs() + v[i - 1].abs());
            }
            scale += self.mass[i] * (1.0 + f.abs());
            let res = (av[i] - self.mass[i] * f).abs() / scale;
            worst = worst.max(res);
        }
        worst
    }

    /// Newton projection onto the discrete equilibrium nearest the
    /// supplied datum; needed so the λ = 1 run starts on an exact
    /// fixed point of the scheme rather than an O(h²) perturbation of
    /// one, which the enormous unstable eigenvalue would otherwise be
    /// free to act on.
    fn project_equilibrium(&self, p: f64, v0: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let mut v = v0.to_vec();
        for _ in 0..50 {
            let av = self.laplacian(&v);
            let mut rhs = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut off_sub = vec![0.0; n - 1];
            let mut off_sup = vec![0.0; n - 1];
            for i in 0..n {
                let (f, fp) = reaction(p, v[i]).ok_or_else(|| {
                    LabError::ProjectionFailed("reaction overflow".into())
                })?;
                rhs[i] = -(av[i] - self.mass[i] * f);
                let left = if i == 0 { 0.0 } else { self.flux[i - 1] };
                diag[i] = left + self.flux[i] - self.mass[i] * fp;
                if i + 1 < n {
                    off_sub[i] = -self.flux[i];
                    off_sup[i] = -self.flux[i];
                }
            }
            let delta = solve_tridiag(&off_sub, &diag, &off_sup, &rhs)
                .map_err(|e| LabError::ProjectionFailed(e.to_string()))?;
            let mut worst: f64 = 0.0;
            for i in 0..n {
                v[i] += delta[i];
                worst = worst.max(delta[i].abs() / (1.0 + v[i].abs()));
            }
            if worst < 1e-13 {
                let res = self.stationary_residual(p, &v);
                if res < 1e-6 {
                    return Ok(v);
                }
                return Err(LabError::ProjectionFailed(format!(
                    "stationarity residual {res} after Newton convergence"
                )));
            }
        }
        Err(LabError::ProjectionFailed(
            "Newton did not converge onto the equilibrium".into(),
        ))
    }

    /// One backward Euler step: solves
    /// M(v − v_old) + dt·(A v − M f(v)) = 0 by Newton. `None` means the
    /// step must be rejected (overflowing reaction or stalled Newton).
    fn backward_euler(&self, p: f64, v_old: &[f64], dt: f64) -> Option<Vec<f64>> {
        let n = self.n();
        let mut v = v_old.to_vec();
        for _ in 0..25 {
            let av = self.laplacian(&v);
            let mut rhs = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut off = vec![0.0; n - 1];
            for i in 0..n {
                let (f, fp) = reaction(p, v[i])?;
                rhs[i] = -(self.mass[i] * (v[i] - v_old[i])
                    + dt * (av[i] - self.mass[i] * f));
                let left = if i == 0 { 0.0 } else { self.flux[i - 1] };
                diag[i] = self.mass[i] + dt * (left + self.flux[i] - self.mass[i] * fp);
                if i + 1 < n {
                    off[i] = -dt * self.flux[i];
                }
            }
            let delta = solve_tridiag(&off, &diag, &off, &rhs).ok()?;
            let mut worst: f64 = 0.0;
            for i in 0..n {
                v[i] += delta[i];
                if !v[i].is_finite() {
                    return None;
                }
                worst = worst.max(delta[i].abs() / (1.0 + v[i].abs()));
            }
            if worst < 1e-11 {
                return Some(v);
            }
        }
        None
    }

    /// Discrete energy ∫ (|∇v|²/2 − |v|^{p+1}/(p+1)); saturates to −∞
    /// when the potential term overflows.
    fn energy(&self, p: f64, v: &[f64]) -> f64 {
        let n = self.n();
        let mut grad = 0.0;
        let mut pot = 0.0;
        for i in 0..n {
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            grad += 0.5 * self.flux[i] * (v[i] - right) * (v[i] - right);
            if v[i] != 0.0 {
                let le = (p + 1.0) * v[i].abs().ln();
                pot += if le > 709.0 {
                    f64::INFINITY
                } else {
                    self.mass[i] * le.exp() / (p + 1.0)
                };
            }
        }
        grad - pot
    }
}

/// Integrates the flow from v₀ = λ·u up to `horizon`, stopping early on
/// blow-up or decay. Records the sample series and diagnostics.
pub fn evolve(
    sol: &StationarySolution,
    lambda: f64,
    horizon: f64,
    params: &SchemeParams,
) -> Result<HeatTrajectory> {
    assert!(horizon > 0.0);
    let p = sol.p;
    let (grid, u_datum) = HeatGrid::build(sol, params.n_cells);
    let mut v: Vec<f64> = u_datum.iter().map(|&x| lambda * x).collect();
    if lambda == 1.0 {
        // start on the exact discrete equilibrium
        v = grid.project_equilibrium(p, &v)?;
    }
    let v0 = v.clone();
    let threshold = params.m_big.min((650.0 / p).exp());

    let sup_of = |v: &[f64]| v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    let dev_of = |v: &[f64], v0: &[f64]| {
        v.iter()
            .zip(v0)
            .fold(0.0_f64, |m, (&a, &b)| m.max((a - b).abs()))
    };

    let mut traj = HeatTrajectory {
        p,
        k: sol.k,
        lambda,
        times: vec![0.0],
        sup_norms: vec![sup_of(&v)],
        energies: vec![grid.energy(p, &v)],
        deviation: vec![0.0],
        crossed_threshold: false,
        decayed: false,
        horizon_reached: false,
        final_dt: 0.0,
        max_dt: 0.0,
        steps_accepted: 0,
        steps_rejected: 0,
        threshold,
        params: params.clone(),
    };

    // initial step bounded by the reaction timescale of the datum
    let mut dt = params.dt_init_cap;
    let fastest = v
        .iter()
        .filter_map(|&x| reaction(p, x).map(|(_, fp)| fp))
        .fold(0.0_f64, f64::max);
    if fastest > 0.0 {
        dt = dt.min(0.1 / fastest);
    }

    let mut t = 0.0_f64;
    if traj.sup_norms[0] < params.delta_decay {
        // degenerate datum (λ = 0): nothing to integrate
        traj.decayed = true;
        traj.horizon_reached = true;
        return Ok(traj);
    }

    while t < horizon {
        dt = dt.min(params.dt_max).min(horizon - t).max(params.dt_min);
        // step doubling: one full step against two half steps
        let attempt = grid.backward_euler(p, &v, dt).and_then(|v_full| {
            let v_half = grid.backward_euler(p, &v, 0.5 * dt)?;
            let v_two = grid.backward_euler(p, &v_half, 0.5 * dt)?;
            Some((v_full, v_two))
        });
        let (v_full, v_two) = match attempt {
            Some(pair) => pair,
            None => {
                traj.steps_rejected += 1;
                if dt <= params.dt_min {
                    return step_underflow(traj, t, dt, sup_of(&v));
                }
                dt *= 0.25;
                continue;
            }
        };
        let mut err: f64 = 0.0;
        for i in 0..v_full.len() {
            err = err.max((v_full[i] - v_two[i]).abs() / (1.0 + v_two[i].abs()));
        }
        if err > params.err_tol {
            traj.steps_rejected += 1;
            if dt <= params.dt_min {
                return step_underflow(traj, t, dt, sup_of(&v));
            }
            dt *= (params.err_tol / err).sqrt().clamp(0.1, 0.5);
            continue;
        }

        // accept the doubled solution (the more accurate of the two)
        v = v_two;
        t += dt;
        traj.steps_accepted += 1;
        traj.final_dt = dt;
        traj.max_dt = traj.max_dt.max(dt);
        let sup = sup_of(&v);
        traj.times.push(t);
        traj.sup_norms.push(sup);
        traj.energies.push(grid.energy(p, &v));
        traj.deviation.push(dev_of(&v, &v0));

        if sup > threshold {
            traj.crossed_threshold = true;
            break;
        }
        if sup < params.delta_decay {
            traj.decayed = true;
            break;
        }
        let grow = if err > 0.0 {
            (0.9 * (params.err_tol / err).sqrt()).clamp(0.3, 4.0)
        } else {
            4.0
        };
        dt *= grow;
    }
    traj.horizon_reached = t >= horizon;
    Ok(traj)
}

fn step_underflow(traj: HeatTrajectory, t: f64, dt: f64, sup: f64) -> Result<HeatTrajectory> {
    // dt collapsed: growth means the blow-up threshold logic should
    // have caught it, so a stall without growth is an honest error
    if sup > 2.0 * traj.sup_norms[0].max(1.0) {
        let mut traj = traj;
        traj.crossed_threshold = true;
        traj.final_dt = dt;
        return Ok(traj);
    }
    Err(LabError::StepUnderflowWithoutGrowth { t, dt, sup })
}

/// Fits ‖v‖_∞ ≈ c·(T − t)^{−1/(p−1)} on the last accepted samples and
/// returns T. Works on y = ‖v‖^{−(p−1)} = c′·(T − t): weighted linear
/// least squares with weights 1/y² (relative errors), restricted to
/// samples with distinct time stamps — near blow-up the remaining time
/// drops below the ulp of t, and those samples carry no slope
/// information.
pub fn fit_blowup_time(p: f64, times: &[f64], sups: &[f64]) -> Option<f64> {
    let n = times.len();
    if n < 2 {
        return None;
    }
    let start = n.saturating_sub(30);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in start..n {
        if sups[i] <= 0.0 {
            return None;
        }
        let ly = -(p - 1.0) * sups[i].ln();
        if ly < -700.0 {
            continue; // y underflows; also a sub-ulp sample
        }
        let y = ly.exp();
        match pts.last() {
            Some(&(tl, _)) if tl == times[i] => {
                // same stamp: keep the latest value
                pts.pop();
                pts.push((times[i], y));
            }
            _ => pts.push((times[i], y)),
        }
    }
    let t_last = *times.last().unwrap();
    let y_last = (-(p - 1.0) * sups[n - 1].ln()).exp();
    if pts.len() < 2 {
        // no resolvable slope: the remaining time itself is below
        // resolution, so the last clock reading is the estimate
        return Some(t_last + y_last / (p - 1.0));
    }
    // weighted least squares for y = a - b t, weights 1/y²
    let (mut sw, mut swt, mut swy, mut swtt, mut swty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        let w = 1.0 / (y * y);
        sw += w;
        swt += w * t;
        swy += w * y;
        swtt += w * t * t;
        swty += w * t * y;
    }
    let det = sw * swtt - swt * swt;
    if det == 0.0 {
        return Some(t_last + y_last / (p - 1.0));
    }
    let a = (swy * swtt - swt * swty) / det;
    let b = -(sw * swty - swt * swy) / det;
    if b <= 0.0 {
        return None;
    }
    let t_big = a / b;
    if t_big < t_last {
        return Some(t_last + y_last / (p - 1.0));
    }
    Some(t_big)
}

/// Classifies a completed trajectory.
///
/// BlowUp needs the threshold crossing, a collapsed final step, and a
/// positive fitted blow-up time. Global needs the horizon with either
/// decay or persistent stationarity. Everything else is Undecided.
pub fn classify(traj: &HeatTrajectory) -> Classification {
    if traj.crossed_threshold {
        let dt_collapsed = traj.final_dt < 0.01 * traj.max_dt || traj.max_dt == 0.0;
        if dt_collapsed {
            if let Some(t_est) = fit_blowup_time(traj.p, &traj.times, &traj.sup_norms) {
                return Classification::BlowUp { t_est };
            }
        }
        return Classification::Undecided;
    }
    if traj.decayed {
        return Classification::Global;
    }
    if traj.horizon_reached {
        let sup = *traj.sup_norms.last().unwrap();
        let dev = *traj.deviation.last().unwrap();
        if sup < traj.params.delta_decay || dev < traj.params.stationary_tol {
            return Classification::Global;
        }
    }
    Classification::Undecided
}

/// One cell of the λ sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub lambda: f64,
    pub classification: Classification,
}

/// Result of [`lambda_sweep`]: per-λ verdicts plus the refined
/// Global/BlowUp boundaries.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    /// Refined transition points (λ_global, λ_blowup) between adjacent
    /// decided cells with different verdicts.
    pub boundaries: Vec<(f64, f64)>,
    /// The measured blow-up window below 1: smallest λ < 1 known to
    /// blow up (refined), if any grid point below 1 did.
    pub window_below_one: Option<f64>,
}

/// Classifies every λ in the grid and bisects each Global↔BlowUp
/// transition a few rounds. Undecided cells are reported as they are.
pub fn lambda_sweep(
    sol: &StationarySolution,
    lambda_grid: &[f64],
    horizon: f64,
    params: &SchemeParams,
) -> Result<SweepReport> {
    if lambda_grid.is_empty() {
        return Err(LabError::EmptySweep("lambda_grid"));
    }
    let mut grid: Vec<f64> = lambda_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let run = |lam: f64| -> Result<Classification> {
        Ok(classify(&evolve(sol, lam, horizon, params)?))
    };
    // trajectories are independent; the bisection below is serial
    // because each probe depends on the previous verdict
    let cells: Vec<SweepCell> = grid
        .par_iter()
        .map(|&lam| {
            Ok(SweepCell {
                lambda: lam,
                classification: run(lam)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut boundaries = Vec::new();
    for i in 0..cells.len() - 1 {
        let (a, b) = (&cells[i], &cells[i + 1]);
        let pair = match (a.classification, b.classification) {
            (Classification::Global, Classification::BlowUp { .. }) => {
                Some((a.lambda, b.lambda))
            }
            (Classification::BlowUp { .. }, Classification::Global) => {
                Some((b.lambda, a.lambda))
            }
            _ => None,
        };
        if let Some((mut lam_g, mut lam_b)) = pair {
            for _ in 0..8 {
                let mid = 0.5 * (lam_g + lam_b);
                match run(mid)? {
                    Classification::Global => lam_g = mid,
                    Classification::BlowUp { .. } => lam_b = mid,
                    Classification::Undecided => break,
                }
            }
            boundaries.push((lam_g, lam_b));
        }
    }
    let window_below_one = cells
        .iter()
        .filter(|c| {
            c.lambda < 1.0 && matches!(c.classification, Classification::BlowUp { .. })
        })
        .map(|c| c.lambda)
        .fold(None, |acc: Option<f64>, lam| {
            Some(acc.map_or(lam, |a| a.min(lam)))
        })
        .map(|first_blowup| {
            boundaries
                .iter()
                .filter(|&&(g, b)| b <= first_blowup && g < b)
                .map(|&(_, b)| b)
                .fold(first_blowup, f64::min)
        });
    Ok(SweepReport {
        cells,
        boundaries,
        window_below_one,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::ShotParams;
    use crate::stationary::build_stationary;

    fn build(p: f64, k: usize) -> StationarySolution {
        build_stationary(p, k, &ShotParams::default()).unwrap()
    }

    fn quick_params() -> SchemeParams {
        SchemeParams {
            n_cells: 1200,
            ..SchemeParams::default()
        }
    }

    #[test]
    fn zero_datum_is_global() {
        let sol = build(100.0, 2);
        let traj = evolve(&sol, 0.0, 1.0, &quick_params()).unwrap();
        assert_eq!(classify(&traj), Classification::Global);
        assert_eq!(traj.sup_norms[0], 0.0);
    }

    #[test]
    fn stationary_datum_is_preserved() {
        let sol = build(100.0, 2);
        let traj = evolve(&sol, 1.0, 1.0, &quick_params()).unwrap();
        assert!(traj.horizon_reached);
        let max_dev = traj.deviation.iter().cloned().fold(0.0, f64::max);
        assert!(max_dev < 1e-3, "drift from equilibrium {max_dev}");
        assert_eq!(classify(&traj), Classification::Global);
    }

    #[test]
    fn small_datum_decays() {
        let sol = build(100.0, 2);
        let traj = evolve(&sol, 0.05, 50.0, &quick_params()).unwrap();
        assert!(traj.decayed, "sup series tail: {:?}", traj.sup_norms.last());
        assert_eq!(classify(&traj), Classification::Global);
    }

    #[test]
    fn large_datum_blows_up() {
        let sol = build(50.0, 2);
        let traj = evolve(&sol, 5.0, 50.0, &quick_params()).unwrap();
        assert!(traj.crossed_threshold);
        match classify(&traj) {
            Classification::BlowUp { t_est } => {
                assert!(t_est >= *traj.times.last().unwrap());
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn both_sides_of_one_blow_up() {
        // the measured window below 1 at p = 100, K = 2 is roughly
        // (0.998, 1): λ = 0.999 rebounds negative and blows up, while
        // λ = 0.99 collapses the bubble and decays globally
        let sol = build(100.0, 2);
        for lam in [0.999, 1.01] {
            let traj = evolve(&sol, lam, 50.0, &quick_params()).unwrap();
            assert!(
                matches!(classify(&traj), Classification::BlowUp { .. }),
                "lambda = {lam}: {:?}, sup tail {:?}",
                classify(&traj),
                traj.sup_norms.last()
            );
        }
        let traj = evolve(&sol, 0.99, 50.0, &quick_params()).unwrap();
        assert_eq!(classify(&traj), Classification::Global);
    }

    #[test]
    fn synthetic_selfsimilar_series_fits_its_own_blowup_time() {
        // series following exactly c (T − t)^{−1/(p−1)} at a p where
        // the clock stays resolvable
        let p = 5.0;
        let t_true = 2.0;
        let c = 0.7;
        let times: Vec<f64> = (0..40).map(|i| 1.9 + 0.002 * i as f64).collect();
        let sups: Vec<f64> = times
            .iter()
            .map(|&t| c * (t_true - t).powf(-1.0 / (p - 1.0)))
            .collect();
        let t_est = fit_blowup_time(p, &times, &sups).unwrap();
        assert!(
            (t_est - t_true).abs() < 0.01 * t_true,
            "fit {t_est} vs true {t_true}"
        );
    }

    #[test]
    fn times_strictly_increase_and_sups_finite() {
        let sol = build(100.0, 2);
        let traj = evolve(&sol, 0.05, 2.0, &quick_params()).unwrap();
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(traj.sup_norms.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn equilibrium_projection_residual_is_small() {
        let sol = build(100.0, 2);
        let (grid, datum) = HeatGrid::build(&sol, 1200);
        let v = grid.project_equilibrium(100.0, &datum).unwrap();
        assert!(grid.stationary_residual(100.0, &v) < 1e-6);
        // the projection is a small correction, not a different root
        let rel: f64 = v
            .iter()
            .zip(&datum)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(rel < 1e-2 * sol.u_max, "projection moved by {rel}");
    }

    #[test]
    fn empty_lambda_grid_is_rejected() {
        let sol = build(100.0, 2);
        match lambda_sweep(&sol, &[], 1.0, &quick_params()) {
            Err(LabError::EmptySweep("lambda_grid")) => {}
            other => panic!("{other:?}"),
        }
    }
}
