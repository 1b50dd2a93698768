use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;

use hmix::drive::{classify_symmetries, DriveParams};
use hmix::dynamics::{integrate, ramp_row, IntegrateOptions, RampSchedule};
use hmix::effective::{delta_bias, f_bar, quadrature_check, EffectiveParams};
use hmix::floquet::{
    continue_branch, cycle_averaged_population, find_floquet_states, linear_floquet_states, monodromy_quasienergies,
    normal_pair, population_imbalance, quasienergy_gap, solve_floquet_state, BranchLabel, FloquetState, Mode,
    MonodromyOptions, SolverOptions, SpectrumBranch, SystemParams,
};
use num_complex::Complex64 as C64;

use crate::config::{Command, Initial, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Full search for new states every this many grid points.
const RESCAN_EVERY: usize = 10;
/// Largest Fourier/monodromy disagreement accepted by `validate`.
const VALIDATE_TOL: f64 = 1e-8;

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Perturb => perturb(cfg),
        Command::Dynamics => dynamics(cfg),
        Command::Ramp => ramp(cfg),
        Command::Symmetry => symmetry(cfg),
        Command::Validate => validate(cfg),
    }
}

fn drive(cfg: &RunConfig, x: f64, phi: f64) -> Result<DriveParams, CliError> {
    DriveParams::from_scaled(x, cfg.f, cfg.omega, phi).map_err(|e| CliError::Config(e.to_string()))
}

fn system(cfg: &RunConfig, x: f64, phi: f64) -> Result<SystemParams, CliError> {
    SystemParams::new(cfg.v, cfg.chi, drive(cfg, x, phi)?).map_err(|e| CliError::Config(e.to_string()))
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        damping: cfg.damping,
        adaptive_cutoff: cfg.n.is_none(),
        ..SolverOptions::default()
    }
}

fn integrate_options(cfg: &RunConfig) -> IntegrateOptions {
    IntegrateOptions { dt: cfg.dt, ..IntegrateOptions::default() }
}

/// All states found at `p`, moved to the fixed cutoff when one is set.
fn states_at(p: &SystemParams, cfg: &RunConfig) -> Result<Vec<FloquetState>, String> {
    let opts = solver_options(cfg);
    let search = SolverOptions { adaptive_cutoff: true, ..opts };
    let found = find_floquet_states(p, &search).map_err(|e| e.to_string())?;
    let Some(n) = cfg.n else { return Ok(found) };
    let mut out = Vec::with_capacity(found.len());
    for s in found {
        out.push(solve_floquet_state(p, &s.with_cutoff(n), &opts).map_err(|e| e.to_string())?);
    }
    out.sort_by(|a, b| a.quasienergy.total_cmp(&b.quasienergy));
    Ok(out)
}

fn same_state(a: &FloquetState, b: &FloquetState, omega: f64) -> bool {
    quasienergy_gap(a, b, omega) <= 1e-6 && a.overlap(b) > 0.99
}

fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let grid = cfg.a_over_omega.values();
    let phi = cfg.phi.start;
    let template = system(cfg, grid[0], phi)?;
    let omega = cfg.omega;
    let opts = solver_options(cfg);

    let mut scan_at: Vec<usize> = (0..grid.len()).step_by(RESCAN_EVERY).collect();
    if *scan_at.last().unwrap() != grid.len() - 1 {
        scan_at.push(grid.len() - 1);
    }
    let scans: Vec<Result<Vec<FloquetState>, String>> =
        scan_at.par_iter().map(|&j| states_at(&template.with_a_over_omega(grid[j]), cfg)).collect();
    let first = scans[0].as_ref().map_err(|e| CliError::Solver(format!("no states at A/ω = {}: {e}", grid[0])))?;
    let upper = normal_pair(first).map(|(lo, hi)| (lo.quasienergy, hi.quasienergy));

    let mut branches: Vec<(usize, SpectrumBranch)> = Vec::new();
    for (&j, scan) in scan_at.iter().zip(&scans) {
        let Ok(states) = scan else { continue };
        for s in states {
            let known = branches.iter().any(|(_, b)| {
                b.points.iter().any(|pt| pt.a_over_omega == grid[j] && same_state(&pt.state, s, omega))
            });
            if known {
                continue;
            }
            let label = match upper {
                Some((_, hi)) if j == 0 && s.quasienergy == hi => BranchLabel::NormalUpper,
                Some((lo, _)) if j == 0 && s.quasienergy == lo => BranchLabel::NormalLower,
                _ if population_imbalance(s) >= 0.0 => BranchLabel::BifurcatedPlus,
                _ => BranchLabel::BifurcatedMinus,
            };
            if let Ok(b) = continue_branch(&template, &grid[j..], s, label, &opts) {
                branches.push((j, b));
            }
        }
    }
    if branches.is_empty() {
        return Err(CliError::Solver(format!("no branch could be started at A/ω = {}", grid[0])));
    }
    branches.sort_by(|a, b| {
        a.0.cmp(&b.0).then(a.1.points[0].state.quasienergy.total_cmp(&b.1.points[0].state.quasienergy))
    });

    let mut t = Table::new(vec![
        "branch",
        "A_over_omega",
        "branch_label",
        "quasienergy",
        "imbalance",
        "avg_pop1",
        "residual",
        "N",
    ]);
    for (id, (_, b)) in branches.iter().enumerate() {
        for pt in &b.points {
            let s = &pt.state;
            t.push(vec![
                id.into(),
                pt.a_over_omega.into(),
                b.label.as_str().into(),
                s.quasienergy.into(),
                population_imbalance(s).into(),
                cycle_averaged_population(s, Mode::First).into(),
                s.residual_norm.into(),
                s.cutoff.into(),
            ]);
        }
    }
    Ok(t)
}

fn perturb(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut points = Vec::new();
    for x in cfg.a_over_omega.values() {
        for phi in cfg.phi.values() {
            points.push((x, phi));
        }
    }
    let rows: Vec<Result<Vec<Cell>, CliError>> = points
        .par_iter()
        .map(|&(x, phi)| {
            let d = drive(cfg, x, phi)?;
            let p = SystemParams::new(cfg.v, cfg.chi, d).map_err(|e| CliError::Config(e.to_string()))?;
            let e = EffectiveParams::from_system(&p);
            let fb = f_bar(&d);
            let [lo, hi] = e.linear_energies();
            let mut row: Vec<Cell> = vec![
                x.into(),
                d.phase().into(),
                fb.re.into(),
                fb.im.into(),
                delta_bias(&d).into(),
                e.delta_eff.into(),
                (hi - lo).into(),
            ];
            if cfg.validate {
                let band = x * (1.0 + cfg.f.abs());
                let n = ((8.0 * band) as usize + 256).next_power_of_two();
                let (fq, dq) = quadrature_check(&d, n);
                row.extend([fq.re.into(), fq.im.into(), dq.into()]);
            }
            Ok(row)
        })
        .collect();
    let mut cols = vec!["A_over_omega", "phi", "re_fbar", "im_fbar", "delta", "delta_prime", "gap"];
    if cfg.validate {
        cols.extend(["re_fbar_quad", "im_fbar_quad", "delta_quad"]);
    }
    let mut t = Table::new(cols);
    for r in rows {
        t.push(r?);
    }
    Ok(t)
}

fn dynamics(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = system(cfg, cfg.a_over_omega.start, cfg.phi.start)?;
    let zero = C64::new(0.0, 0.0);
    let initial = match cfg.init {
        Initial::First => (C64::new(1.0, 0.0), zero),
        Initial::Second => (zero, C64::new(1.0, 0.0)),
        Initial::Ground => (C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)),
    };
    let mut opts = integrate_options(cfg);
    let dt = cfg.dt.unwrap_or(p.drive.period() / 500.0);
    opts.stride = Some(((cfg.t_end / dt) as usize).div_ceil(10_000).max(1));
    let tr = integrate(initial, &p, None, cfg.t_end, &opts).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut t = Table::new(vec!["t", "pop1", "pop2", "norm_drift"]);
    for k in 0..tr.len() {
        let (a, b) = (tr.population(Mode::First, k), tr.population(Mode::Second, k));
        t.push(vec![tr.times[k].into(), a.into(), b.into(), (a + b - 1.0).into()]);
    }
    Ok(t)
}

fn ramp(cfg: &RunConfig) -> Result<Table, CliError> {
    let base = system(cfg, 0.0, 0.0)?;
    let schedule = RampSchedule::new(cfg.alpha, cfg.t_f, cfg.omega).map_err(|e| CliError::Config(e.to_string()))?;
    let opts = integrate_options(cfg);
    let phis = cfg.phi.values();
    let rows: Vec<_> = phis.par_iter().map(|&phi| ramp_row(phi, &base, &schedule, cfg.dt_avg, &opts)).collect();
    let mut t = Table::new(vec!["phi", "pop1_final", "pop2_final"]);
    for r in rows {
        if let Some(e) = r.error {
            return Err(CliError::Solver(format!("ramp at φ = {}: {e}", r.phi)));
        }
        t.push(vec![r.phi.into(), r.pop1.into(), r.pop2.into()]);
    }
    Ok(t)
}

fn symmetry(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "phi",
        "shift_symmetric",
        "antisymmetric",
        "time_reversal_symmetric",
        "antisymmetry_point",
        "time_reversal_point",
    ]);
    for phi in cfg.phi.values() {
        let d = drive(cfg, cfg.a_over_omega.start, phi)?;
        let r = classify_symmetries(&d, 1e-9).map_err(|e| CliError::Config(e.to_string()))?;
        t.push(vec![
            d.phase().into(),
            r.shift_symmetric.into(),
            r.antisymmetric.into(),
            r.time_reversal_symmetric.into(),
            r.antisymmetry_point.unwrap_or(f64::NAN).into(),
            r.time_reversal_point.unwrap_or(f64::NAN).into(),
        ]);
    }
    Ok(t)
}

/// Linear quasienergies from the Fourier solver against the monodromy
/// matrix.
fn validate(cfg: &RunConfig) -> Result<Table, CliError> {
    let lin = RunConfig { chi: 0.0, ..cfg.clone() };
    let mut points = Vec::new();
    for x in cfg.a_over_omega.values() {
        for phi in cfg.phi.values() {
            points.push((x, phi));
        }
    }
    let opts = solver_options(&lin);
    let rows: Vec<Result<(Vec<Cell>, f64), CliError>> = points
        .par_iter()
        .map(|&(x, phi)| {
            let p = system(&lin, x, phi)?;
            let solver = |e: hmix::floquet::FloquetError| CliError::Solver(format!("A/ω = {x}, φ = {phi}: {e}"));
            let mut eps = Vec::new();
            for s in linear_floquet_states(&p, &opts).map_err(solver)? {
                eps.push(solve_floquet_state(&p, &s, &opts).map_err(solver)?.quasienergy);
            }
            eps.sort_by(f64::total_cmp);
            let m = monodromy_quasienergies(&p, &MonodromyOptions::default()).map_err(solver)?;
            let diff = (eps[0] - m[0]).abs().max((eps[1] - m[1]).abs());
            let row = vec![
                x.into(),
                p.drive.phase().into(),
                eps[0].into(),
                eps[1].into(),
                m[0].into(),
                m[1].into(),
                diff.into(),
            ];
            Ok((row, diff))
        })
        .collect();
    let mut t = Table::new(vec![
        "A_over_omega",
        "phi",
        "eps_fourier_lo",
        "eps_fourier_hi",
        "eps_monodromy_lo",
        "eps_monodromy_hi",
        "abs_diff",
    ]);
    let mut worst: f64 = 0.0;
    for r in rows {
        let (row, diff) = r?;
        worst = worst.max(diff);
        t.push(row);
    }
    if !(worst <= VALIDATE_TOL) {
        // the table is still useful for diagnosis
        crate::output::emit(cfg, &t)?;
        return Err(CliError::Solver(format!("Fourier and monodromy quasienergies differ by {worst:e}")));
    }
    Ok(t)
}
