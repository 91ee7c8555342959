//! Subcommand implementations. Each writes its artefacts under the configured
//! output directory and returns an in-memory summary.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sbpp_core::analysis::{self, build_peak, diagnose, PeakSpec, ProfileDiagnostics};
use sbpp_core::grid::{read_field, write_field};
use sbpp_core::ground_state::write_profile;
use sbpp_core::solver::{
    coefficient_of_variation, minimize_observed, translation_distance, IterationRecord, CONSTANCY_THRESHOLD,
    DEDUP_TOLERANCE,
};
use sbpp_core::{find_ground_state, Functional, RadialProfile, ScalarField, SolveReport, TorusPoint};
use serde::Serialize;

use crate::{CliError, ExperimentConfig};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn dump(path: &Path, field: &ScalarField, epsilon: f64) -> Result<(), CliError> {
    let mut w = create(path)?;
    write_field(&mut w, field, epsilon)?;
    w.flush()?;
    Ok(())
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))
}

// ---------------------------------------------------------------- ground-state

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateSummary {
    pub p: f64,
    pub u0: f64,
    pub m_infinity: f64,
    pub h1_norm_sq: f64,
    pub l2_norm_sq: f64,
    pub lp_pow: f64,
    pub nehari_identity_error: f64,
    pub decay_rate: f64,
    pub tail_amplitude: f64,
    pub r_last: f64,
    pub nodes: usize,
}

impl GroundStateSummary {
    pub fn of(profile: &RadialProfile) -> Self {
        let i = profile.integrals();
        GroundStateSummary {
            p: profile.p(),
            u0: profile.u0(),
            m_infinity: profile.limit_energy(),
            h1_norm_sq: i.h1_norm_sq,
            l2_norm_sq: i.l2_norm_sq,
            lp_pow: i.lp_pow,
            nehari_identity_error: i.nehari_identity_error(),
            decay_rate: profile.decay_rate(),
            tail_amplitude: profile.tail_amplitude(),
            r_last: profile.r_last(),
            nodes: profile.u_values().len(),
        }
    }
}

pub fn load_profile(cfg: &ExperimentConfig) -> Result<RadialProfile, CliError> {
    if !(cfg.ground_state_tol > 0.0) {
        return Err(CliError::Config("ground_state_tol: must be positive".into()));
    }
    Ok(find_ground_state(cfg.p, cfg.ground_state_tol)?)
}

/// Writes `profile.txt` and `ground_state.json`.
pub fn ground_state(cfg: &ExperimentConfig) -> Result<GroundStateSummary, CliError> {
    let profile = load_profile(cfg)?;
    let mut w = create(&cfg.output_dir.join("profile.txt"))?;
    write_profile(&mut w, &profile)?;
    w.flush()?;
    let summary = GroundStateSummary::of(&profile);
    write_json(&cfg.output_dir.join("ground_state.json"), &summary)?;
    Ok(summary)
}

// ----------------------------------------------------------------------- sweep

/// One seed at one ε.
#[derive(Debug)]
pub struct SeedOutcome {
    pub epsilon: f64,
    pub seed_index: usize,
    pub seed: TorusPoint,
    /// `‖W‖²_ε` of the unprojected initial peak.
    pub w_norm_sq: Option<f64>,
    /// Projection scale of the initial peak.
    pub t_w: Option<f64>,
    /// Energy of the projected initial peak.
    pub psi_energy: Option<f64>,
    pub report: Result<SolveReport, sbpp_core::Error>,
    pub diagnostics: Result<ProfileDiagnostics, sbpp_core::Error>,
    pub log: Vec<IterationRecord>,
}

impl SeedOutcome {
    pub fn converged(&self) -> Option<&SolveReport> {
        self.report.as_ref().ok().filter(|r| r.converged)
    }

    pub fn status(&self) -> &'static str {
        match &self.report {
            Ok(r) if r.converged => "converged",
            Ok(_) => "not_converged",
            Err(_) => "failed",
        }
    }
}

#[derive(Debug)]
pub struct EpsilonLevel {
    pub epsilon: f64,
    pub seeds: Vec<SeedOutcome>,
    /// Seed indices of pairwise distinct converged solutions, by energy.
    pub distinct: Vec<usize>,
}

impl EpsilonLevel {
    /// Lowest converged energy.
    pub fn m_eps_estimate(&self) -> Option<f64> {
        self.seeds
            .iter()
            .filter_map(|s| s.converged().map(|r| r.energy))
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub profile: RadialProfile,
    pub m_infinity: f64,
    pub h1_norm_sq: f64,
    pub levels: Vec<EpsilonLevel>,
}

/// Relative margin above `m_∞` beyond which a converged solution is flagged.
pub const HIGH_ENERGY_MARGIN: f64 = 0.1;

/// A CSV row; optional fields are empty when the run failed.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub seed_index: usize,
    pub status: &'static str,
    #[serde(rename = "t_W")]
    pub t_w: Option<f64>,
    pub energy: Option<f64>,
    pub m_eps_estimate: Option<f64>,
    pub concentration_ratio: Option<f64>,
    pub profile_error: Option<f64>,
    pub phi_c2: Option<f64>,
    pub n_local_maxima: Option<usize>,
    pub barycenter_x: Option<f64>,
    pub barycenter_y: Option<f64>,
    pub barycenter_z: Option<f64>,
    pub seed_x: f64,
    pub seed_y: f64,
    pub seed_z: f64,
    pub w_norm_ratio: Option<f64>,
    pub psi_energy_ratio: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub max_value: Option<f64>,
    pub min_value: Option<f64>,
    pub iterations: Option<usize>,
    pub grad_norm: Option<f64>,
    pub pde_residual: Option<f64>,
    pub nonconstant: Option<bool>,
    pub under_resolved: Option<bool>,
    /// Converged with energy above `(1 + HIGH_ENERGY_MARGIN)·m_∞`.
    pub high_energy_candidate: Option<bool>,
    pub distinct: bool,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub epsilon: f64,
    pub m_eps_estimate: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub n_converged: usize,
    pub n_distinct: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub config: ExperimentConfig,
    pub ground_state: GroundStateSummary,
    pub levels: Vec<LevelSummary>,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

fn run_seed(
    cfg: &ExperimentConfig,
    grid: &sbpp_core::TorusGrid,
    profile: &RadialProfile,
    m_inf: f64,
    epsilon: f64,
    seed_index: usize,
    seed: TorusPoint,
) -> Result<SeedOutcome, CliError> {
    let params = cfg.params(epsilon)?;
    let functional = Functional::new(grid, params)?;
    let mut log = Vec::new();
    let peak = PeakSpec::standard(grid, seed, epsilon).and_then(|spec| build_peak(grid, &spec, profile));
    let (w_norm_sq, psi, report) = match peak {
        Err(e) => (None, None, Err(e)),
        Ok(w) => {
            let norm = w.norm_eps_sq(epsilon).ok();
            match functional.project(&w) {
                Err(e) => (norm, None, Err(e)),
                Ok(proj) => {
                    let verbose = cfg.verbose;
                    let report = minimize_observed(&proj.field, &params, &cfg.solver, &mut |rec| {
                        if verbose {
                            log.push(*rec);
                        }
                    });
                    (norm, Some((proj.t, proj.energy)), report)
                }
            }
        }
    };
    let diagnostics = match &report {
        Ok(r) => diagnose(&r.field, &params, profile, m_inf),
        Err(_) => Err(sbpp_core::Error::Format("no solution to diagnose".into())),
    };
    Ok(SeedOutcome {
        epsilon,
        seed_index,
        seed,
        w_norm_sq,
        t_w: psi.map(|p| p.0),
        psi_energy: psi.map(|p| p.1),
        report,
        diagnostics,
        log,
    })
}

fn distinct_solutions(seeds: &[SeedOutcome], p: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..seeds.len()).filter(|&i| seeds[i].converged().is_some()).collect();
    let energy = |i: usize| seeds[i].converged().map_or(f64::INFINITY, |r| r.energy);
    order.sort_by(|&i, &j| energy(i).total_cmp(&energy(j)).then(i.cmp(&j)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let f = &seeds[i].converged().unwrap().field;
        let dup = kept.iter().any(|&j| {
            let g = &seeds[j].converged().unwrap().field;
            translation_distance(f, g, p).map_or(false, |d| d < DEDUP_TOLERANCE)
        });
        if !dup {
            kept.push(i);
        }
    }
    kept
}

/// Solves from a standard peak at every seed and every ε, without writing
/// anything. Seeds run concurrently in a pool of `threads` workers (0 picks
/// the machine default).
pub fn run_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<SweepOutcome, CliError> {
    cfg.validate()?;
    let profile = load_profile(cfg)?;
    let m_inf = profile.limit_energy();
    let h1 = profile.integrals().h1_norm_sq;
    let grid = cfg.grid()?;
    let levels = pool(threads)?.install(|| {
        cfg.epsilon_list
            .iter()
            .map(|&epsilon| {
                let seeds = cfg
                    .seed_points
                    .par_iter()
                    .enumerate()
                    .map(|(i, &seed)| run_seed(cfg, &grid, &profile, m_inf, epsilon, i, seed))
                    .collect::<Result<Vec<_>, CliError>>()?;
                let distinct = distinct_solutions(&seeds, cfg.p);
                Ok(EpsilonLevel {
                    epsilon,
                    seeds,
                    distinct,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    Ok(SweepOutcome {
        profile,
        m_infinity: m_inf,
        h1_norm_sq: h1,
        levels,
    })
}

impl SweepOutcome {
    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for level in &self.levels {
            let m_eps = level.m_eps_estimate();
            for s in &level.seeds {
                let rep = s.report.as_ref().ok();
                let diag = s.diagnostics.as_ref().ok();
                let bary = diag.and_then(|d| d.barycenter);
                let message = match (&s.report, &s.diagnostics) {
                    (Err(e), _) => e.to_string(),
                    (Ok(_), Err(e)) => format!("diagnostics: {e}"),
                    _ => String::new(),
                };
                rows.push(SweepRow {
                    epsilon: level.epsilon,
                    seed_index: s.seed_index,
                    status: s.status(),
                    t_w: s.t_w,
                    energy: rep.map(|r| r.energy),
                    m_eps_estimate: m_eps,
                    concentration_ratio: diag.map(|d| d.concentration_ratio),
                    profile_error: diag.map(|d| d.profile_error),
                    phi_c2: diag.map(|d| d.phi_c2),
                    n_local_maxima: diag.map(|d| d.n_local_maxima),
                    barycenter_x: bary.map(|b| b[0]),
                    barycenter_y: bary.map(|b| b[1]),
                    barycenter_z: bary.map(|b| b[2]),
                    seed_x: s.seed[0],
                    seed_y: s.seed[1],
                    seed_z: s.seed[2],
                    w_norm_ratio: s.w_norm_sq.map(|w| w / self.h1_norm_sq),
                    psi_energy_ratio: s.psi_energy.map(|e| e / self.m_infinity),
                    energy_ratio: rep.map(|r| r.energy / self.m_infinity),
                    max_value: diag.map(|d| d.max_value),
                    min_value: diag.map(|d| d.min_value),
                    iterations: rep.map(|r| r.iterations),
                    grad_norm: rep.map(|r| r.grad_norm),
                    pde_residual: rep.map(|r| r.pde_residual),
                    nonconstant: rep.map(|r| r.nonconstant),
                    under_resolved: rep.map(|r| r.under_resolved),
                    high_energy_candidate: s
                        .converged()
                        .map(|r| r.energy > (1.0 + HIGH_ENERGY_MARGIN) * self.m_infinity),
                    distinct: level.distinct.contains(&s.seed_index),
                    message,
                });
            }
        }
        rows.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon).then(a.seed_index.cmp(&b.seed_index)));
        rows
    }

    pub fn level_summaries(&self) -> Vec<LevelSummary> {
        self.levels
            .iter()
            .map(|l| {
                let m = l.m_eps_estimate();
                LevelSummary {
                    epsilon: l.epsilon,
                    m_eps_estimate: m,
                    energy_ratio: m.map(|m| m / self.m_infinity),
                    n_converged: l.seeds.iter().filter(|s| s.converged().is_some()).count(),
                    n_distinct: l.distinct.len(),
                }
            })
            .collect()
    }
}

pub fn field_dump_path(dir: &Path, epsilon: f64, seed_index: usize) -> PathBuf {
    dir.join("fields").join(format!("eps{epsilon}_seed{seed_index}.sbpf"))
}

#[derive(Serialize)]
struct LogLine<'a> {
    epsilon: f64,
    seed_index: usize,
    #[serde(flatten)]
    record: &'a IterationRecord,
}

/// Full sweep: `sweep.csv`, `sweep.json`, one dump per converged field and,
/// when verbose, `iterations.jsonl`.
pub fn sweep(cfg: &ExperimentConfig, threads: usize) -> Result<SweepSummary, CliError> {
    let outcome = run_sweep(cfg, threads)?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;

    let mut w = create(&out.join("profile.txt"))?;
    write_profile(&mut w, &outcome.profile)?;
    w.flush()?;

    let rows = outcome.rows();
    let mut csv = csv::Writer::from_writer(create(&out.join("sweep.csv"))?);
    for row in &rows {
        csv.serialize(row)?;
    }
    csv.flush()?;

    for level in &outcome.levels {
        for s in &level.seeds {
            if let Some(r) = s.converged() {
                dump(&field_dump_path(out, level.epsilon, s.seed_index), &r.field, level.epsilon)?;
            }
        }
    }

    if cfg.verbose {
        let mut w = create(&out.join("iterations.jsonl"))?;
        for level in &outcome.levels {
            for s in &level.seeds {
                for record in &s.log {
                    let line = LogLine {
                        epsilon: level.epsilon,
                        seed_index: s.seed_index,
                        record,
                    };
                    serde_json::to_writer(&mut w, &line)?;
                    writeln!(w)?;
                }
            }
        }
        w.flush()?;
    }

    let summary = SweepSummary {
        config: cfg.clone(),
        ground_state: GroundStateSummary::of(&outcome.profile),
        levels: outcome.level_summaries(),
        rows,
    };
    write_json(&out.join("sweep.json"), &summary)?;
    Ok(summary)
}

impl SweepSummary {
    /// First ε at which no seed converged.
    pub fn first_unconverged(&self) -> Option<f64> {
        self.levels.iter().find(|l| l.n_converged == 0).map(|l| l.epsilon)
    }
}

// ----------------------------------------------------------------------- solve

/// Where a single solve starts.
#[derive(Debug, Clone)]
pub enum SolveStart {
    /// Standard peak at the given seed index.
    Seed(usize),
    /// A previously dumped field.
    Dump(PathBuf),
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub epsilon: f64,
    pub p: f64,
    pub a: f64,
    pub converged: bool,
    pub energy: f64,
    pub energy_ratio: f64,
    pub grad_norm: f64,
    pub pde_residual: f64,
    pub iterations: usize,
    pub initial_t: f64,
    pub nonconstant: bool,
    pub under_resolved: bool,
    pub diagnostics: Option<ProfileDiagnostics>,
}

/// Writes `solve.json`, `solution.sbpf` and, when verbose, `iterations.jsonl`.
pub fn solve(
    cfg: &ExperimentConfig,
    epsilon: Option<f64>,
    start: &SolveStart,
    threads: usize,
) -> Result<SolveSummary, CliError> {
    let profile = load_profile(cfg)?;
    let m_inf = profile.limit_energy();
    let (u0, epsilon) = match start {
        SolveStart::Seed(i) => {
            let eps = epsilon
                .or_else(|| cfg.epsilon_list.first().copied())
                .ok_or_else(|| CliError::Config("epsilon_list: must not be empty".into()))?;
            cfg.check_epsilon(eps)?;
            cfg.solver.validate()?;
            let seed = *cfg
                .seed_points
                .get(*i)
                .ok_or_else(|| CliError::Config(format!("seed index {i} out of range")))?;
            let grid = cfg.grid()?;
            let spec = PeakSpec::standard(&grid, seed, eps)?;
            (build_peak(&grid, &spec, &profile)?, eps)
        }
        SolveStart::Dump(path) => {
            let d = read_field(BufReader::new(File::open(path)?), None)?;
            (d.field, epsilon.unwrap_or(d.epsilon))
        }
    };
    let params = cfg.params(epsilon)?;
    let mut log = Vec::new();
    let verbose = cfg.verbose;
    let (initial_t, report) = pool(threads)?.install(|| -> Result<_, CliError> {
        let proj = Functional::new(u0.grid(), params)?.project(&u0)?;
        let report = minimize_observed(&proj.field, &params, &cfg.solver, &mut |r| {
            if verbose {
                log.push(*r);
            }
        })?;
        Ok((proj.t, report))
    })?;
    let diagnostics = diagnose(&report.field, &params, &profile, m_inf).ok();
    let out = &cfg.output_dir;
    dump(&out.join("solution.sbpf"), &report.field, epsilon)?;
    if verbose {
        let mut w = create(&out.join("iterations.jsonl"))?;
        for record in &log {
            serde_json::to_writer(&mut w, record)?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    let summary = SolveSummary {
        epsilon,
        p: params.p,
        a: params.a,
        converged: report.converged,
        energy: report.energy,
        energy_ratio: report.energy / m_inf,
        grad_norm: report.grad_norm,
        pde_residual: report.pde_residual,
        iterations: report.iterations,
        initial_t,
        nonconstant: report.nonconstant,
        under_resolved: report.under_resolved,
        diagnostics,
    };
    write_json(&out.join("solve.json"), &summary)?;
    if !report.converged {
        return Err(CliError::Numerical(format!(
            "no convergence after {} iterations (grad {:e})",
            report.iterations, report.grad_norm
        )));
    }
    Ok(summary)
}

// ------------------------------------------------------------- constant-branch

/// Allowed relative spread of `J·ε³` on the constant branch.
pub const SCALED_ENERGY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ConstantLevel {
    pub epsilon: f64,
    pub energy_grid: f64,
    pub energy_exact: f64,
    pub relative_energy_error: f64,
    pub nehari_residual: f64,
    pub grad_norm: f64,
    pub solver_iterations: usize,
    pub final_variation: f64,
    pub final_mean: f64,
    pub stays_constant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantBranchSummary {
    pub p: f64,
    pub a: f64,
    pub c_star: f64,
    pub residual: f64,
    pub energy_coefficient: f64,
    /// Largest relative deviation of `J·ε³` from its value at the first ε.
    pub scaled_energy_spread: f64,
    pub levels: Vec<ConstantLevel>,
}

/// Evaluates the constant solution on the grid at every ε and restarts the
/// solver from it. Writes `constant_branch.json`; fails with a numerical
/// error if `J·ε³` varies by more than [`SCALED_ENERGY_TOL`] or the solver
/// leaves the constant.
pub fn constant_branch(cfg: &ExperimentConfig, threads: usize) -> Result<ConstantBranchSummary, CliError> {
    cfg.validate()?;
    let branch = analysis::constant_branch(cfg.p)?;
    let grid = cfg.grid()?;
    let c = branch.c_star;
    let u = ScalarField::constant(&grid, c);
    let levels = pool(threads)?.install(|| {
        cfg.epsilon_list
            .iter()
            .map(|&epsilon| -> Result<ConstantLevel, CliError> {
                let params = cfg.params(epsilon)?;
                let f = Functional::new(&grid, params)?;
                let energy_grid = f.energy(&u)?;
                let energy_exact = grid.volume() * branch.energy_coefficient / epsilon.powi(3);
                let g = f.grad(&u)?;
                let grad_norm = (f.inner(&g, &g)? / u.norm_eps_sq(epsilon)?).sqrt();
                let report = minimize_observed(&u, &params, &cfg.solver, &mut |_| {})?;
                let variation = coefficient_of_variation(&report.field);
                let mean = report.field.mean();
                Ok(ConstantLevel {
                    epsilon,
                    energy_grid,
                    energy_exact,
                    relative_energy_error: (energy_grid - energy_exact).abs() / energy_exact,
                    nehari_residual: f.nehari_residual(&u)?,
                    grad_norm,
                    solver_iterations: report.iterations,
                    final_variation: variation,
                    final_mean: mean,
                    stays_constant: variation < CONSTANCY_THRESHOLD && (mean - c).abs() <= 1e-6 * c,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let scaled: Vec<f64> = levels.iter().map(|l| l.energy_grid * l.epsilon.powi(3)).collect();
    let scaled_energy_spread = scaled.iter().map(|s| (s - scaled[0]).abs() / scaled[0]).fold(0.0, f64::max);
    let summary = ConstantBranchSummary {
        p: cfg.p,
        a: cfg.a,
        c_star: c,
        residual: branch.residual,
        energy_coefficient: branch.energy_coefficient,
        scaled_energy_spread,
        levels,
    };
    write_json(&cfg.output_dir.join("constant_branch.json"), &summary)?;
    if !(scaled_energy_spread <= SCALED_ENERGY_TOL) {
        return Err(CliError::Numerical(format!("J·ε³ varies by {scaled_energy_spread:e} across ε")));
    }
    if let Some(l) = summary.levels.iter().find(|l| !l.stays_constant) {
        return Err(CliError::Numerical(format!(
            "solver left the constant branch at ε = {} (variation {:e})",
            l.epsilon, l.final_variation
        )));
    }
    Ok(summary)
}

// --------------------------------------------------------------- profile-check

#[derive(Debug, Clone, Serialize)]
pub struct ProfileCheck {
    pub file: PathBuf,
    pub n_per_axis: usize,
    pub period_length: f64,
    pub epsilon: f64,
    pub energy: f64,
    pub energy_ratio: f64,
    pub nehari_residual: f64,
    pub grad_norm: f64,
    pub pde_residual: f64,
    pub variation: f64,
    pub diagnostics: ProfileDiagnostics,
}

/// Reads a dump and reports its diagnostics; writes `profile_check.json`.
pub fn profile_check(cfg: &ExperimentConfig, path: &Path) -> Result<ProfileCheck, CliError> {
    let d = read_field(BufReader::new(File::open(path)?), None)?;
    let profile = load_profile(cfg)?;
    let m_inf = profile.limit_energy();
    let params = cfg.params(d.epsilon)?;
    let u = &d.field;
    let f = Functional::new(u.grid(), params)?;
    let g = f.grad(u)?;
    let norm = u.norm_eps_sq(d.epsilon)?;
    let energy = f.energy(u)?;
    let check = ProfileCheck {
        file: path.to_path_buf(),
        n_per_axis: u.grid().n_per_axis(),
        period_length: u.grid().period_length(),
        epsilon: d.epsilon,
        energy,
        energy_ratio: energy / m_inf,
        nehari_residual: f.nehari_residual(u)?,
        grad_norm: if norm > 0.0 { (f.inner(&g, &g)? / norm).sqrt() } else { f64::NAN },
        pde_residual: f.pde_residual(u)?,
        variation: coefficient_of_variation(u),
        diagnostics: diagnose(u, &params, &profile, m_inf)?,
    };
    write_json(&cfg.output_dir.join("profile_check.json"), &check)?;
    Ok(check)
}
