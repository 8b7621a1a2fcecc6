//! The four subcommands. Each returns the process exit status; diagnostics go
//! to standard error, machine-readable results to files or standard output.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mowave_core::energy::{energy_rate_profile, RatePoint};
use mowave_core::solver::l2_error;
use mowave_core::{
    certify_spec, check_decay_bound, energy_series, fit_decay, lambda_bounds, multiplier_identity_residual,
    simulate, validate_assumptions, AlphaFamily, BetaFamily, BoundReport, BoundTolerance, DampingParams,
    DecayCertificate, EmpiricalDecay, Grid, IdentityReport, InitialData, LambdaBounds, ManufacturedField,
    ProblemSpec, SimOptions, Trajectory,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{load_spec, load_sweep, CellParams};
use crate::exit::{ExitStatus, HarnessError, Result};
use crate::output::{
    decay_svg, sha256_file, sha256_str, write_energy_csv, write_identity_csv, write_manifest, write_trajectory_csv,
    CheckResult, GridInfo, OutputFile, RunManifest,
};

/// Multiplier rate used for the identity check when no certificate exists.
pub const FALLBACK_LAMBDA: f64 = 0.1;
pub const MIN_ORDER: f64 = 1.8;
/// Boundary-group sign check: sum ≥ −BOUNDARY_SLACK · scale.
pub const BOUNDARY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunFlags {
    pub grid_n: usize,
    pub cfl: f64,
    pub sample_every: usize,
    pub paper_literal_energy: bool,
    pub trajectory: bool,
}

impl Default for RunFlags {
    fn default() -> Self {
        Self {
            grid_n: 200,
            cfl: mowave_core::solver::DEFAULT_CFL,
            sample_every: 1,
            paper_literal_energy: false,
            trajectory: false,
        }
    }
}

impl RunFlags {
    fn options(&self) -> SimOptions {
        SimOptions {
            cfl: self.cfl,
            sample_every: self.sample_every,
            ..SimOptions::default()
        }
    }
}

/// Everything a completed simulate run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub bounds: LambdaBounds,
    pub certificate: Option<DecayCertificate>,
    pub fit: Option<EmpiricalDecay>,
    pub bound: Option<BoundReport>,
    pub identity: IdentityReport,
    pub manifest: RunManifest,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Hash of the canonical JSON of the problem actually run (after flag overrides).
pub fn config_hash(spec: &ProblemSpec) -> String {
    sha256_str(&serde_json::to_string(spec).expect("problem specs always serialize"))
}

/// Validate, certify, simulate, check and persist one problem into `outdir`.
///
/// Validation failures and blow-up come back as errors; a violated decay
/// bound is a completed run with status [`ExitStatus::BoundViolated`].
pub fn run_experiment(spec: &ProblemSpec, flags: &RunFlags, outdir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    let mut spec = spec.clone();
    spec.paper_literal_energy |= flags.paper_literal_energy;

    let report = validate_assumptions(&spec);
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    report.into_result()?;

    let bounds = lambda_bounds(&spec.damping, &spec.beta, &spec.alpha, spec.horizon)?;
    let certificate = certify_spec(&spec)?;
    let grid = Grid::new(flags.grid_n)?;
    let traj = simulate(&spec, &grid, &flags.options())?;

    let series = energy_series(&traj);
    let profile: Vec<RatePoint> = energy_rate_profile(&traj).unwrap_or_default();
    let lambda = certificate.as_ref().map_or(FALLBACK_LAMBDA, |c| c.lambda);
    let identity = multiplier_identity_residual(&traj, lambda, lambda);
    let fit = fit_decay(&series).ok();
    let e0 = series.initial().unwrap_or(0.0);

    // Manufactured runs are forced, so the unforced decay bound does not apply.
    let bound = match (&certificate, spec.manufactured) {
        (Some(cert), None) => {
            let tol = BoundTolerance::for_run(traj.dt, identity.residual_rate.unwrap_or(0.0), e0);
            Some(check_decay_bound(&series, cert, &tol))
        }
        _ => None,
    };
    let status = match bound {
        Some(b) if !b.holds => ExitStatus::BoundViolated,
        _ => ExitStatus::Success,
    };

    create_dir(outdir)?;
    let mut files = vec!["energy.csv", "identity.csv", "decay.svg"];
    write_energy_csv(&outdir.join("energy.csv"), &series, certificate.as_ref())?;
    write_identity_csv(&outdir.join("identity.csv"), &profile)?;
    let svg_path = outdir.join("decay.svg");
    fs::write(&svg_path, decay_svg(&series, certificate.as_ref())).map_err(|e| HarnessError::io(&svg_path, e))?;
    if flags.trajectory {
        write_trajectory_csv(&outdir.join("trajectory.csv"), &traj)?;
        files.push("trajectory.csv");
    }
    let outputs = files
        .iter()
        .map(|f| {
            Ok(OutputFile {
                file: (*f).to_string(),
                sha256: sha256_file(&outdir.join(f))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let checks = run_checks(&traj, &identity, &series, bound.as_ref());
    let manifest = RunManifest {
        config_hash: config_hash(&spec),
        spec: serde_json::to_value(&spec).expect("problem specs always serialize"),
        grid: GridInfo {
            n: grid.intervals(),
            dt: traj.dt,
            cfl: flags.cfl,
            sample_every: flags.sample_every,
        },
        outputs,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        exit_code: status.code(),
        checks,
        details: json!({
            "lambda_bounds": bounds,
            "certificate": certificate,
            "fit": fit,
            "bound": bound,
            "identity": identity,
        }),
    };
    write_manifest(outdir, &manifest)?;

    Ok(RunOutcome {
        status,
        bounds,
        certificate,
        fit,
        bound,
        identity,
        manifest,
    })
}

fn run_checks(
    traj: &Trajectory,
    identity: &IdentityReport,
    series: &mowave_core::EnergySeries,
    bound: Option<&BoundReport>,
) -> Vec<CheckResult> {
    let min_flux = series.samples.iter().map(|s| s.flux).fold(f64::INFINITY, f64::min);
    let mut checks = vec![
        CheckResult {
            name: "assumptions".into(),
            passed: true,
            detail: format!("hyperbolicity margin {}", 1.0 - traj.spec.alpha.sup_speed(traj.spec.horizon)),
        },
        CheckResult {
            name: "boundary_flux_nonnegative".into(),
            passed: min_flux >= 0.0,
            detail: format!("min flux {min_flux:e}"),
        },
        CheckResult {
            name: "boundary_group_sign".into(),
            passed: identity.boundary_group >= -BOUNDARY_SLACK * identity.scale,
            detail: format!("boundary group {:e}, scale {:e}", identity.boundary_group, identity.scale),
        },
        CheckResult {
            name: "multiplier_identity".into(),
            passed: identity.relative_plu.is_finite(),
            detail: format!(
                "residual {:e}, relative {:e}",
                identity.residual_plu, identity.relative_plu
            ),
        },
    ];
    if let Some(r) = identity.residual_rate {
        checks.push(CheckResult {
            name: "energy_rate_identity".into(),
            passed: r.is_finite(),
            detail: format!("sup residual {r:e}"),
        });
    }
    if let Some(b) = bound {
        checks.push(CheckResult {
            name: "decay_bound".into(),
            passed: b.holds,
            detail: match b.first_violation {
                Some(t) => format!("first violation at t = {t}, worst margin {}", b.worst_margin),
                None => format!("worst margin {}", b.worst_margin),
            },
        });
    }
    checks
}

fn report_error(e: &HarnessError) -> ExitStatus {
    eprintln!("error: {e}");
    e.exit_status()
}

pub fn cmd_simulate(config: &Path, flags: &RunFlags, outdir: &Path) -> ExitStatus {
    let spec = match load_spec(config) {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };
    match run_experiment(&spec, flags, outdir) {
        Ok(out) => {
            if let Some(b) = out.bound.filter(|b| !b.holds) {
                eprintln!(
                    "decay bound violated first at t = {}, worst margin {}",
                    b.first_violation.unwrap_or(f64::NAN),
                    b.worst_margin
                );
            }
            if out.certificate.is_none() {
                eprintln!(
                    "note: empty window (lambda_lo = {} > lambda_hi = {}); no certificate line",
                    out.bounds.lambda_lo, out.bounds.lambda_hi
                );
            }
            let _ = writeln!(std::io::stdout(), "{}", outdir.display());
            out.status
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_certify(config: &Path) -> ExitStatus {
    let result = load_spec(config).and_then(|spec| {
        validate_assumptions(&spec).into_result()?;
        let bounds = lambda_bounds(&spec.damping, &spec.beta, &spec.alpha, spec.horizon)?;
        Ok((bounds, certify_spec(&spec)?))
    });
    match result {
        Ok((_, Some(cert))) => {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&cert).expect("certificates always serialize"));
            ExitStatus::Success
        }
        Ok((bounds, None)) => {
            eprintln!(
                "empty window: lambda_lo = {} exceeds lambda_hi = {}",
                bounds.lambda_lo, bounds.lambda_hi
            );
            ExitStatus::EmptyWindow
        }
        Err(e) => report_error(&e),
    }
}

/// Errors of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelErrors {
    pub study: &'static str,
    pub n: usize,
    pub solution: f64,
    pub rate: f64,
    pub multiplier: f64,
}

/// Observed order between two consecutive levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservedOrder {
    pub study: &'static str,
    pub quantity: &'static str,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub order: f64,
}

/// Linear problem on the fixed unit interval whose exact solution is the
/// first damped mode, with damping and restoring coefficients from `base`.
pub fn modal_problem(base: &ProblemSpec) -> (ProblemSpec, impl Fn(f64, f64) -> f64) {
    let (a, b) = (base.damping.a, base.damping.b);
    let disc = 0.25 * a * a - (PI * PI + b);
    // Underdamped: e^{−at/2} cos(ωt); otherwise the slow real root e^{σt}.
    let (u1, omega, sigma) = if disc < 0.0 {
        (-0.5 * a, (-disc).sqrt(), -0.5 * a)
    } else {
        let s = -0.5 * a + disc.sqrt();
        (s, 0.0, s)
    };
    let mut spec = ProblemSpec::new(
        DampingParams::new(a, b, base.damping.rho),
        BetaFamily::Constant { c: 1.0 },
        AlphaFamily::Constant,
        InitialData::SineMode {
            m: 1,
            amp_u0: 1.0,
            amp_u1: u1,
        },
        base.horizon,
    );
    spec.linear_mode = true;
    (spec, move |y: f64, t: f64| {
        (sigma * t).exp() * (omega * t).cos() * (PI * y).sin()
    })
}

/// The base problem with a manufactured field attached (default field when
/// the config carries none).
pub fn manufactured_problem(base: &ProblemSpec) -> ProblemSpec {
    let mut spec = base.clone();
    spec.manufactured.get_or_insert_with(ManufacturedField::default);
    spec
}

fn level(
    study: &'static str,
    spec: &ProblemSpec,
    n: usize,
    opts: &SimOptions,
    exact: &dyn Fn(f64, f64) -> f64,
) -> Result<LevelErrors> {
    let grid = Grid::new(n)?;
    let traj = simulate(spec, &grid, opts)?;
    let last = traj.last();
    let scale = l2_error(last, spec, &grid, |_, _| 0.0);
    let err = l2_error(last, spec, &grid, exact);
    let rep = multiplier_identity_residual(&traj, FALLBACK_LAMBDA, FALLBACK_LAMBDA);
    Ok(LevelErrors {
        study,
        n,
        solution: if scale > 0.0 { err / scale } else { err },
        rate: rep.residual_rate.unwrap_or(f64::NAN),
        multiplier: rep.residual_plu.abs(),
    })
}

/// Runs both refinement studies over `ns` (ascending) and returns the
/// per-level errors and the observed orders between consecutive levels.
pub fn convergence_study(
    base: &ProblemSpec,
    ns: &[usize],
    flags: &RunFlags,
) -> Result<(Vec<LevelErrors>, Vec<ObservedOrder>)> {
    if ns.len() < 2 {
        return Err(HarnessError::Other("a convergence study needs at least two grid sizes".into()));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let opts = flags.options();
    let manufactured = manufactured_problem(base);
    let field = manufactured.manufactured.expect("attached above");
    let (modal, modal_exact) = modal_problem(base);

    let levels: Vec<LevelErrors> = ns
        .par_iter()
        .map(|&n| level("manufactured", &manufactured, n, &opts, &|y, t| field.reference_value(y, t)))
        .chain(ns.par_iter().map(|&n| level("modal", &modal, n, &opts, &modal_exact)))
        .collect::<Result<_>>()?;

    let mut orders = Vec::new();
    for study in ["manufactured", "modal"] {
        let rows: Vec<&LevelErrors> = levels.iter().filter(|l| l.study == study).collect();
        for w in rows.windows(2) {
            let ratio = (w[1].n as f64 / w[0].n as f64).ln();
            for (quantity, c, f) in [
                ("solution", w[0].solution, w[1].solution),
                ("energy_rate", w[0].rate, w[1].rate),
                ("multiplier", w[0].multiplier, w[1].multiplier),
            ] {
                orders.push(ObservedOrder {
                    study,
                    quantity,
                    n_coarse: w[0].n,
                    n_fine: w[1].n,
                    order: (c / f).ln() / ratio,
                });
            }
        }
    }
    Ok((levels, orders))
}

pub fn cmd_convergence(config: &Path, ns: &[usize], flags: &RunFlags, outdir: &Path) -> ExitStatus {
    let result = load_spec(config).and_then(|spec| {
        validate_assumptions(&spec).into_result()?;
        convergence_study(&spec, ns, flags)
    });
    let (levels, orders) = match result {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "study         N      solution      energy_rate   multiplier");
    for l in &levels {
        let _ = writeln!(
            out,
            "{:<12} {:>5}  {:<12.4e}  {:<12.4e}  {:<12.4e}",
            l.study, l.n, l.solution, l.rate, l.multiplier
        );
    }
    let mut low = false;
    for o in &orders {
        let ok = o.order >= MIN_ORDER;
        low |= !ok;
        let _ = writeln!(
            out,
            "order {:<12} {:<11} {:>4} -> {:<4} {:.3}{}",
            o.study,
            o.quantity,
            o.n_coarse,
            o.n_fine,
            o.order,
            if ok { "" } else { "  (below 1.8)" }
        );
    }
    if let Err(e) = write_convergence_csv(outdir, &orders) {
        return report_error(&e);
    }
    if low {
        eprintln!("observed order below {MIN_ORDER}; coarse grids are often pre-asymptotic");
        ExitStatus::OrderTooLow
    } else {
        ExitStatus::Success
    }
}

fn write_convergence_csv(outdir: &Path, orders: &[ObservedOrder]) -> Result<()> {
    create_dir(outdir)?;
    let mut w = csv::Writer::from_path(outdir.join("convergence.csv"))?;
    for o in orders {
        w.serialize(o)?;
    }
    w.flush().map_err(|e| HarnessError::io(outdir, e))
}

/// One line of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mu: Option<f64>,
    pub rho: f64,
    pub k: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub lambda_lo: Option<f64>,
    pub lambda_hi: Option<f64>,
    pub lambda_fit: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub bound_holds: Option<bool>,
    pub exit: i32,
}

fn sweep_cell(spec: &ProblemSpec, flags: &RunFlags, dir: &Path) -> SweepRow {
    let mut row = SweepRow {
        mu: match spec.beta {
            BetaFamily::Exponential { mu, .. } => Some(mu),
            BetaFamily::Constant { .. } => Some(0.0),
            BetaFamily::Polynomial { .. } => None,
        },
        rho: spec.damping.rho,
        k: spec.alpha.k(),
        a: spec.damping.a,
        b: spec.damping.b,
        lambda_lo: None,
        lambda_hi: None,
        lambda_fit: None,
        c: None,
        bound_holds: None,
        exit: 0,
    };
    if let Ok(bounds) = lambda_bounds(&spec.damping, &spec.beta, &spec.alpha, spec.horizon) {
        row.lambda_lo = Some(bounds.lambda_lo);
        row.lambda_hi = Some(bounds.lambda_hi);
    }
    match run_experiment(spec, flags, dir) {
        Ok(out) => {
            row.lambda_fit = out.fit.map(|f| f.lambda_fit);
            row.c = out.certificate.map(|c| c.c);
            row.bound_holds = out.bound.map(|b| b.holds);
            row.exit = out.status.code();
        }
        Err(e) => {
            eprintln!("{}: {e}", dir.display());
            row.exit = e.exit_status().code();
        }
    }
    row
}

pub fn cell_dir(outdir: &Path, index: usize) -> PathBuf {
    outdir.join("cells").join(format!("cell_{index:04}"))
}

/// Runs every cell of the sweep on `jobs` threads. Rows come back in cell
/// order regardless of scheduling.
pub fn run_sweep(config: &Path, flags: &RunFlags, jobs: usize, outdir: &Path) -> Result<Vec<SweepRow>> {
    let sweep = load_sweep(config)?;
    let cells: Vec<CellParams> = sweep.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Other(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| sweep_cell(&sweep.spec_for(cell), flags, &cell_dir(outdir, i)))
            .collect()
    });
    create_dir(outdir)?;
    let mut w = csv::Writer::from_path(outdir.join("sweep.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(outdir, e))?;
    Ok(rows)
}

pub fn cmd_sweep(config: &Path, flags: &RunFlags, jobs: usize, outdir: &Path) -> ExitStatus {
    match run_sweep(config, flags, jobs, outdir) {
        Ok(rows) => {
            let failed = rows.iter().filter(|r| r.exit != 0).count();
            let _ = writeln!(std::io::stdout(), "{} cells, {failed} nonzero exits, {}", rows.len(), outdir.join("sweep.csv").display());
            ExitStatus::Success
        }
        Err(e) => report_error(&e),
    }
}
