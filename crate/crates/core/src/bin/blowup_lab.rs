//! Command-line harness: builds stationary solutions (with caching),
//! runs the rescaling, spectral, blow-up-condition and heat-flow
//! experiments, and writes deterministic CSV/JSON/gnuplot artifacts.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use blowup_lab::cache;
use blowup_lab::criteria;
use blowup_lab::heat::{self, SchemeParams};
use blowup_lab::liouville;
use blowup_lab::report::{
    self, FullReport, RescaleRow, StationarySummary,
};
use blowup_lab::spectrum;
use blowup_lab::{LabError, ShotParams, StationarySolution};

/// Experiment configuration; a JSON file sets the base values and
/// command-line flags override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExperimentConfig {
    p_sweep: Vec<f64>,
    k: usize,
    r_sweep: Vec<f64>,
    lambda_grid: Vec<f64>,
    lambda: f64,
    horizon: f64,
    s_max: f64,
    tol: f64,
    n_cells: usize,
    heat_cells: usize,
    out_dir: PathBuf,
    cache_dir: PathBuf,
    jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p_sweep: vec![20.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
            k: 2,
            r_sweep: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            lambda_grid: vec![0.9, 0.95, 0.99, 1.01, 1.05, 1.1],
            lambda: 1.0,
            horizon: 50.0,
            s_max: 10.0,
            tol: 1e-13,
            n_cells: 20_000,
            heat_cells: 2000,
            out_dir: PathBuf::from("artifacts"),
            cache_dir: PathBuf::from("cache"),
            jobs: 0,
        }
    }
}

fn sorted_positive(field: &'static str, values: &[f64]) -> Result<(), LabError> {
    if values.is_empty() {
        return Err(LabError::InvalidConfig {
            field,
            message: "must be a nonempty list".into(),
        });
    }
    for w in values.windows(2) {
        if w[1] <= w[0] {
            return Err(LabError::InvalidConfig {
                field,
                message: format!("must be strictly increasing, found {} after {}", w[1], w[0]),
            });
        }
    }
    if values[0] <= 0.0 {
        return Err(LabError::InvalidConfig {
            field,
            message: format!("entries must be positive, found {}", values[0]),
        });
    }
    Ok(())
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), LabError> {
        sorted_positive("p_sweep", &self.p_sweep)?;
        sorted_positive("r_sweep", &self.r_sweep)?;
        sorted_positive("lambda_grid", &self.lambda_grid)?;
        if self.k < 2 {
            return Err(LabError::InvalidConfig {
                field: "k",
                message: format!("need a sign-changing solution (K >= 2), got {}", self.k),
            });
        }
        if !(self.tol > 0.0) {
            return Err(LabError::InvalidConfig {
                field: "tol",
                message: format!("must be positive, got {}", self.tol),
            });
        }
        if !(self.horizon > 0.0) {
            return Err(LabError::InvalidConfig {
                field: "horizon",
                message: format!("must be positive, got {}", self.horizon),
            });
        }
        if !(self.s_max > 0.0) {
            return Err(LabError::InvalidConfig {
                field: "s_max",
                message: format!("must be positive, got {}", self.s_max),
            });
        }
        if self.n_cells < 100 {
            return Err(LabError::InvalidConfig {
                field: "n_cells",
                message: format!("too coarse ({}), need at least 100", self.n_cells),
            });
        }
        if self.heat_cells < 100 {
            return Err(LabError::InvalidConfig {
                field: "heat_cells",
                message: format!("too coarse ({}), need at least 100", self.heat_cells),
            });
        }
        if !(self.lambda >= 0.0) {
            return Err(LabError::InvalidConfig {
                field: "lambda",
                message: format!("must be nonnegative, got {}", self.lambda),
            });
        }
        Ok(())
    }

    fn shot_params(&self) -> ShotParams {
        ShotParams {
            tol: self.tol,
            ..ShotParams::default()
        }
    }

    fn scheme_params(&self) -> SchemeParams {
        SchemeParams {
            n_cells: self.heat_cells,
            ..SchemeParams::default()
        }
    }

    fn cache_dir(&self) -> PathBuf {
        cache::cache_dir(&self.cache_dir)
    }
}

/// Per-flag overrides of the config file; every flag is optional and,
/// when present, wins over the file value.
#[derive(Debug, Args)]
struct Overrides {
    /// Single exponent p (shorthand for --p-sweep with one entry).
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Comma-separated exponent sweep, strictly increasing.
    #[arg(long, global = true, value_delimiter = ',')]
    p_sweep: Option<Vec<f64>>,
    /// Number of nodal regions K.
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Comma-separated window radii R for the condition tables.
    #[arg(long, global = true, value_delimiter = ',')]
    r_sweep: Option<Vec<f64>>,
    /// Comma-separated λ grid for the sweep subcommand.
    #[arg(long, global = true, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    /// Datum multiplier λ for the heatflow subcommand.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Heat-flow time horizon.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Rescaled-window radius s_max for the rescale subcommand.
    #[arg(long, global = true)]
    s_max: Option<f64>,
    /// Shooting tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Cells of the eigenvalue grids.
    #[arg(long, global = true)]
    n_cells: Option<usize>,
    /// Cells of the heat-flow grid.
    #[arg(long, global = true)]
    heat_cells: Option<usize>,
    /// Artifact output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Cache directory (the BLOWUP_LAB_CACHE_DIR env var wins over both).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads for sweep cells (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(ps) = &self.p_sweep {
            cfg.p_sweep = ps.clone();
        }
        if let Some(p) = self.p {
            cfg.p_sweep = vec![p];
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(rs) = &self.r_sweep {
            cfg.r_sweep = rs.clone();
        }
        if let Some(lg) = &self.lambda_grid {
            cfg.lambda_grid = lg.clone();
        }
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(s) = self.s_max {
            cfg.s_max = s;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(n) = self.n_cells {
            cfg.n_cells = n;
        }
        if let Some(n) = self.heat_cells {
            cfg.heat_cells = n;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(d) = &self.cache_dir {
            cfg.cache_dir = d.clone();
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "blowup-lab",
    about = "Sign-changing radial Lane-Emden solutions, their spectra and heat-flow blow-up"
)]
struct Cli {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Build and cache the stationary solutions of the p-sweep.
    Stationary,
    /// Rescaled profiles and their C¹ distance to the Liouville bubble.
    Rescale,
    /// First eigenpairs of the linearized operators along the sweep.
    Spectrum,
    /// Limit operator eigenpair with a doubled-resolution cross-check.
    LimitSpectrum,
    /// Blow-up condition tables (S, M, M', ratio, P31, energies).
    Conditions,
    /// Scalar criterion ∫uφ₁ along the sweep.
    Criterion,
    /// Integrate one heat trajectory v_t = Δv + |v|^{p-1}v, v0 = λu.
    Heatflow,
    /// Classify a λ grid and refine the global/blow-up boundaries.
    Sweep,
    /// Run the whole chain and emit one combined JSON report.
    Full,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Builds (or loads from cache) every solution of the p-sweep.
fn solutions(cfg: &ExperimentConfig) -> anyhow::Result<Vec<(StationarySolution, bool)>> {
    let params = cfg.shot_params();
    let dir = cfg.cache_dir();
    cfg.p_sweep
        .par_iter()
        .map(|&p| Ok(cache::load_or_build(&dir, p, cfg.k, &params)?))
        .collect()
}

fn summaries(sols: &[(StationarySolution, bool)]) -> Vec<StationarySummary> {
    sols.iter()
        .map(|(sol, from_cache)| {
            let (p_grad, p_pot) = sol.energy_functionals();
            StationarySummary {
                p: sol.p,
                k: sol.k,
                u_center: sol.u_max,
                u_min: sol.u_min,
                du_boundary: sol.du_at(1.0),
                residual_sup: sol.residual_sup(),
                nodal_radii: sol.nodal_radii.clone(),
                mu_plus: sol.mu_plus,
                mu_minus: sol.mu_minus,
                energy: p_grad,
                p_energy: p_pot,
                from_cache: *from_cache,
            }
        })
        .collect()
}

fn cmd_stationary(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sols = solutions(cfg)?;
    for (sol, _) in &sols {
        let nodes = sol.grid.nodes();
        let rows: Vec<Vec<f64>> = (0..nodes.len())
            .map(|i| vec![nodes[i], sol.u[i], sol.du[i]])
            .collect();
        let path = cfg
            .out_dir
            .join(format!("stationary_p{:e}_K{}.csv", sol.p, sol.k));
        report::write_table(&path, &["r", "u", "du"], &rows)?;
    }
    report::write_json(&cfg.out_dir.join("stationary_summary.json"), &summaries(&sols))?;
    println!(
        "built {} stationary solutions (K = {}) into {}",
        sols.len(),
        cfg.k,
        cfg.out_dir.display()
    );
    Ok(())
}

fn rescale_rows(
    cfg: &ExperimentConfig,
    sols: &[(StationarySolution, bool)],
) -> anyhow::Result<Vec<RescaleRow>> {
    sols.iter()
        .map(|(sol, _)| {
            let profile = liouville::rescale_profile(sol, cfg.s_max)?;
            let (dv, ddv) = liouville::convergence_metric(&profile, cfg.s_max);
            Ok(RescaleRow {
                p: sol.p,
                sup_value_gap: dv,
                sup_derivative_gap: ddv,
            })
        })
        .collect()
}

fn cmd_rescale(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sols = solutions(cfg)?;
    for (sol, _) in &sols {
        let profile = liouville::rescale_profile(sol, cfg.s_max)?;
        let rows: Vec<Vec<f64>> = (0..profile.s.len())
            .map(|i| {
                vec![
                    profile.s[i],
                    profile.v[i],
                    profile.dv[i],
                    liouville::LiouvilleBubble::u(profile.s[i]),
                ]
            })
            .collect();
        let path = cfg
            .out_dir
            .join(format!("rescaled_p{:e}_K{}.csv", sol.p, sol.k));
        report::write_table(&path, &["s", "v_plus", "dv_plus", "bubble_u"], &rows)?;
    }
    let conv = rescale_rows(cfg, &sols)?;
    let rows: Vec<Vec<f64>> = conv
        .iter()
        .map(|r| vec![r.p, r.sup_value_gap, r.sup_derivative_gap])
        .collect();
    report::write_table(
        &cfg.out_dir.join("rescale_convergence.csv"),
        &["p", "sup_value_gap", "sup_derivative_gap"],
        &rows,
    )?;
    report::write_json(&cfg.out_dir.join("rescale_convergence.json"), &conv)?;
    println!("rescaled {} profiles (s_max = {})", sols.len(), cfg.s_max);
    Ok(())
}

fn cmd_spectrum(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sols = solutions(cfg)?;
    let refs: Vec<&StationarySolution> = sols.iter().map(|(s, _)| s).collect();
    let eigen = spectrum::eigen_convergence_report(&refs, cfg.n_cells)?;
    let rows: Vec<Vec<f64>> = eigen
        .rows
        .iter()
        .map(|r| vec![r.p, r.lambda_tilde, r.err_lambda, r.err_phi, r.gap_integral])
        .collect();
    report::write_table(
        &cfg.out_dir.join("spectrum_convergence.csv"),
        &["p", "lambda_tilde", "err_lambda", "err_phi", "gap_integral"],
        &rows,
    )?;
    report::write_json(&cfg.out_dir.join("spectrum.json"), &eigen)?;
    println!(
        "lambda_1* = {:.12}; {} sweep rows written",
        eigen.lambda_star,
        eigen.rows.len()
    );
    Ok(())
}

fn cmd_limit_spectrum(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let coarse = spectrum::limit_eigenvalue(cfg.n_cells)?;
    // doubled-resolution oracle run; agreement validates the estimate
    let fine = spectrum::limit_eigenvalue(2 * cfg.n_cells)?;
    #[derive(Serialize)]
    struct LimitArtifact {
        coarse: spectrum::LimitEigenvalue,
        doubled: spectrum::LimitEigenvalue,
        discrepancy: f64,
    }
    let artifact = LimitArtifact {
        discrepancy: (coarse.extrapolated - fine.extrapolated).abs(),
        coarse,
        doubled: fine,
    };
    report::write_json(&cfg.out_dir.join("limit_spectrum.json"), &artifact)?;
    println!(
        "lambda_1* = {:.12} (doubled-resolution discrepancy {:.3e})",
        artifact.doubled.extrapolated, artifact.discrepancy
    );
    Ok(())
}

fn conditions_report(
    cfg: &ExperimentConfig,
    sols: &[(StationarySolution, bool)],
) -> anyhow::Result<criteria::ConditionReport> {
    let refs: Vec<&StationarySolution> = sols.iter().map(|(s, _)| s).collect();
    Ok(criteria::condition_report(&refs, &cfg.r_sweep, cfg.n_cells)?)
}

fn cmd_conditions(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sols = solutions(cfg)?;
    let rep = conditions_report(cfg, &sols)?;
    for (name, table) in [
        ("S", &rep.s_table),
        ("M", &rep.m_table),
        ("Mprime", &rep.mprime_table),
    ] {
        let mut header = vec!["p".to_string()];
        header.extend(rep.r_sweep.iter().map(|r| format!("R{r:e}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = rep
            .p_sweep
            .iter()
            .zip(table)
            .map(|(&p, row)| {
                let mut out = vec![p];
                out.extend_from_slice(row);
                out
            })
            .collect();
        report::write_table(
            &cfg.out_dir.join(format!("conditions_{name}.csv")),
            &header_refs,
            &rows,
        )?;
    }
    report::write_json(&cfg.out_dir.join("conditions.json"), &rep)?;
    println!(
        "condition tables for {} exponents x {} radii written; p* = {:?}",
        rep.p_sweep.len(),
        rep.r_sweep.len(),
        rep.flags.p_star
    );
    Ok(())
}

fn cmd_criterion(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sols = solutions(cfg)?;
    let refs: Vec<&StationarySolution> = sols.iter().map(|(s, _)| s).collect();
    let star = spectrum::limit_first_eigenpair(200.0, cfg.n_cells)?;
    let target = criteria::limit_target(&star);
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    for sol in &refs {
        let lp = spectrum::first_eigenpair_lp(sol, cfg.n_cells)?;
        let sc = criteria::scalar_criterion(sol, &lp);
        rows.push(vec![
            sol.p,
            sc.i1,
            sc.i1_scaled,
            sc.i2_normalized,
            sc.identity_residual,
        ]);
        artifacts.push((sol.p, sc));
    }
    #[derive(Serialize)]
    struct CriterionArtifact {
        limit_target: f64,
        rows: Vec<(f64, criteria::ScalarCriterion)>,
    }
    report::write_table(
        &cfg.out_dir.join("criterion.csv"),
        &["p", "i1", "i1_scaled", "i2_normalized", "identity_residual"],
        &rows,
    )?;
    report::write_json(
        &cfg.out_dir.join("criterion.json"),
        &CriterionArtifact {
            limit_target: target,
            rows: artifacts,
        },
    )?;
    println!(
        "scalar criterion for {} exponents written (limit target {:.6})",
        refs.len(),
        target
    );
    Ok(())
}

fn single_solution(cfg: &ExperimentConfig) -> anyhow::Result<StationarySolution> {
    let p = *cfg.p_sweep.last().expect("validated nonempty");
    let (sol, _) = cache::load_or_build(&cfg.cache_dir(), p, cfg.k, &cfg.shot_params())?;
    Ok(sol)
}

fn cmd_heatflow(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sol = single_solution(cfg)?;
    let traj = heat::evolve(&sol, cfg.lambda, cfg.horizon, &cfg.scheme_params())?;
    let class = heat::classify(&traj);
    let tag = format!("p{:e}_K{}_lam{:e}", sol.p, sol.k, cfg.lambda);
    report::write_trajectory(&cfg.out_dir, &tag, &traj)?;
    #[derive(Serialize)]
    struct TrajectoryArtifact {
        classification: heat::Classification,
        trajectory: heat::HeatTrajectory,
    }
    report::write_json(
        &cfg.out_dir.join(format!("heatflow_{tag}.json")),
        &TrajectoryArtifact {
            classification: class,
            trajectory: traj,
        },
    )?;
    println!("lambda = {} -> {:?}", cfg.lambda, class);
    Ok(())
}

fn run_sweep(cfg: &ExperimentConfig, sol: &StationarySolution) -> anyhow::Result<heat::SweepReport> {
    Ok(heat::lambda_sweep(
        sol,
        &cfg.lambda_grid,
        cfg.horizon,
        &cfg.scheme_params(),
    )?)
}

fn cmd_sweep(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sol = single_solution(cfg)?;
    let rep = run_sweep(cfg, &sol)?;
    report::write_json(
        &cfg.out_dir
            .join(format!("lambda_sweep_p{:e}_K{}.json", sol.p, sol.k)),
        &rep,
    )?;
    for cell in &rep.cells {
        println!("lambda = {} -> {:?}", cell.lambda, cell.classification);
    }
    println!("boundaries: {:?}", rep.boundaries);
    Ok(())
}

fn cmd_full(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let sols = solutions(cfg)?;
    let refs: Vec<&StationarySolution> = sols.iter().map(|(s, _)| s).collect();
    let rescale = rescale_rows(cfg, &sols)?;
    let limit = spectrum::limit_eigenvalue(cfg.n_cells)?;
    let eigen = spectrum::eigen_convergence_report(&refs, cfg.n_cells)?;
    let conditions = conditions_report(cfg, &sols)?;
    let sweep_sol = &sols.last().expect("validated nonempty").0;
    let sweep = Some(run_sweep(cfg, sweep_sol)?);
    let full = FullReport {
        k: cfg.k,
        p_sweep: cfg.p_sweep.clone(),
        r_sweep: cfg.r_sweep.clone(),
        stationary: summaries(&sols),
        rescale,
        limit_eigenvalue: limit,
        eigen,
        conditions,
        sweep,
    };
    report::write_json(&cfg.out_dir.join("full_report.json"), &full)?;
    println!(
        "full report for K = {} over {} exponents written to {}",
        cfg.k,
        cfg.p_sweep.len(),
        cfg.out_dir.join("full_report.json").display()
    );
    Ok(())
}

fn dispatch(cmd: &Cmd, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    match cmd {
        Cmd::Stationary => cmd_stationary(cfg),
        Cmd::Rescale => cmd_rescale(cfg),
        Cmd::Spectrum => cmd_spectrum(cfg),
        Cmd::LimitSpectrum => cmd_limit_spectrum(cfg),
        Cmd::Conditions => cmd_conditions(cfg),
        Cmd::Criterion => cmd_criterion(cfg),
        Cmd::Heatflow => cmd_heatflow(cfg),
        Cmd::Sweep => cmd_sweep(cfg),
        Cmd::Full => cmd_full(cfg),
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    if cfg.jobs > 0 {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .is_err()
        {
            bail!("worker pool already initialized; --jobs must be set once");
        }
    }
    fs::create_dir_all(&cfg.out_dir)?;
    dispatch(&cli.cmd, &cfg)
}
