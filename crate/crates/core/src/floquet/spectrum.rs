use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;

use super::operator::{linear_matrix, norm2, residual_vector};
use super::{fold_with_shift, solve_floquet_state, FloquetError, FloquetState, SolverOptions, SystemParams};
use crate::effective::{effective_stationary_states, phi_correction, EffectiveParams};

const DEFAULT_CUTOFF: usize = 16;

/// The two Floquet states of the linear (`χ` ignored) problem, sorted by
/// quasienergy.
///
/// The truncated Floquet matrix is diagonalized once; every physical state
/// appears in it with replicas shifted by multiples of `ω`, and the
/// replicas whose harmonics are most concentrated around `n = 0` are kept.
pub fn linear_floquet_states(p: &SystemParams, opts: &SolverOptions) -> Result<[FloquetState; 2], FloquetError> {
    let lin = SystemParams { chi: 0.0, ..*p };
    let omega = p.drive.omega();
    let mut cutoff = DEFAULT_CUTOFF.max(((p.drive.a_over_omega().abs() * (1.0 + p.drive.ratio().abs())) as usize) + 12);
    loop {
        let eig = SymmetricEigen::new(linear_matrix(&lin, cutoff));
        let d = 2 * cutoff + 1;
        let n = cutoff as i64;
        let spread = |k: usize| -> f64 {
            let col = eig.eigenvectors.column(k);
            (0..d).map(|r| ((r as i64 - n) as f64).powi(2) * (col[r].norm_sqr() + col[d + r].norm_sqr())).sum()
        };
        let mut order: Vec<(usize, f64)> = (0..2 * d).map(|k| (k, spread(k))).collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut states: Vec<FloquetState> = order[..2]
            .iter()
            .map(|&(k, _)| {
                let col: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
                let mut s = FloquetState::from_vector(eig.eigenvalues[k], &col, cutoff);
                let (folded, shift) = fold_with_shift(s.quasienergy, omega);
                s.shift_harmonics(shift);
                s.quasienergy = folded;
                s.normalize();
                s.fix_gauge();
                s
            })
            .collect();
        let shell = states.iter().map(|s| s.outer_shell_weight()).fold(0.0, f64::max);
        if shell < opts.shell_tol || cutoff >= opts.max_cutoff || !opts.adaptive_cutoff {
            for s in states.iter_mut() {
                s.residual_norm = norm2(&residual_vector(&lin, &s.to_vector(), s.quasienergy, s.cutoff));
            }
            states.sort_by(|a, b| a.quasienergy.total_cmp(&b.quasienergy));
            let b = states.pop().unwrap();
            let a = states.pop().unwrap();
            return Ok([a, b]);
        }
        cutoff = (cutoff + opts.cutoff_step).min(opts.max_cutoff);
    }
}

/// Floquet-state guess built from a stationary state `(a1, a2) e^{-iμt}` of
/// the averaged equations, including the first-order micromotion, mapped
/// back to the lab frame and Fourier transformed.
pub fn seed_from_amplitudes(p: &SystemParams, a1: C64, a2: C64, mu: f64, cutoff: usize) -> FloquetState {
    let omega = p.drive.omega();
    let x = p.drive.a_over_omega();
    let eps = p.v / omega;
    let samples = (8 * cutoff + 8).next_power_of_two().max(64);
    let n = cutoff as i64;
    let mut ca = vec![C64::new(0.0, 0.0); 2 * cutoff + 1];
    let mut cb = ca.clone();
    for k in 0..samples {
        let tau = std::f64::consts::TAU * k as f64 / samples as f64;
        let g = x * tau.cos() + 0.5 * x * p.drive.ratio() * (2.0 * tau + p.drive.phase()).cos();
        let ph = phi_correction(tau, &p.drive);
        let c1 = (a1 + a2 * ph * (0.5 * eps)) * C64::from_polar(1.0, -0.5 * g);
        let c2 = (a2 - a1 * ph.conj() * (0.5 * eps)) * C64::from_polar(1.0, 0.5 * g);
        for j in -n..=n {
            let e = C64::from_polar(1.0 / samples as f64, -(j as f64) * tau);
            ca[(j + n) as usize] += c1 * e;
            cb[(j + n) as usize] += c2 * e;
        }
    }
    let mut s = FloquetState { quasienergy: mu, coeffs_a: ca, coeffs_b: cb, cutoff, residual_norm: f64::NAN };
    s.normalize();
    s
}

/// Partner state `[c̃₂*(−t), c̃₁*(−t)]`, i.e. `a'_n = conj(b_n)`,
/// `b'_n = conj(a_n)`. It solves the problem with `φ → −φ` at the same
/// quasienergy and has the opposite imbalance.
pub fn partner_state(s: &FloquetState) -> FloquetState {
    let mut out = FloquetState {
        quasienergy: s.quasienergy,
        coeffs_a: s.coeffs_b.iter().map(|c| c.conj()).collect(),
        coeffs_b: s.coeffs_a.iter().map(|c| c.conj()).collect(),
        cutoff: s.cutoff,
        residual_norm: s.residual_norm,
    };
    out.fix_gauge();
    out
}

/// Distance between two quasienergies on the circle of circumference `ω`.
pub fn quasienergy_gap(a: &FloquetState, b: &FloquetState, omega: f64) -> f64 {
    let d = (a.quasienergy - b.quasienergy).rem_euclid(omega);
    d.min(omega - d)
}

pub fn are_degenerate(a: &FloquetState, b: &FloquetState, omega: f64) -> bool {
    quasienergy_gap(a, b, omega) <= 1e-6 * omega
}

fn same_state(a: &FloquetState, b: &FloquetState, omega: f64) -> bool {
    quasienergy_gap(a, b, omega) <= 1e-7 && a.overlap(b) > 0.999
}

/// All Floquet states reachable from the available seeds, sorted by
/// quasienergy: the linear states and the stationary states of the averaged
/// equations (plus their partners when the drive is antisymmetric), each
/// polished with the full solver. Seeds that fail to converge are dropped.
pub fn find_floquet_states(p: &SystemParams, opts: &SolverOptions) -> Result<Vec<FloquetState>, FloquetError> {
    let omega = p.drive.omega();
    let mut seeds: Vec<FloquetState> = linear_floquet_states(p, opts)?.into_iter().collect();
    let cutoff = seeds[0].cutoff;
    if let Ok(stat) = effective_stationary_states(&EffectiveParams::from_system(p)) {
        for s in stat {
            seeds.push(seed_from_amplitudes(p, s.a1, s.a2, s.energy, cutoff));
        }
    }
    let antisymmetric = p.drive.phase().sin().abs() < 1e-12;
    let mut found: Vec<FloquetState> = Vec::new();
    let push = |s: FloquetState, found: &mut Vec<FloquetState>| {
        if !found.iter().any(|q| same_state(q, &s, omega)) {
            found.push(s);
        }
    };
    for seed in seeds {
        if let Ok(s) = solve_floquet_state(p, &seed, opts) {
            if antisymmetric {
                if let Ok(q) = solve_floquet_state(p, &partner_state(&s), opts) {
                    push(q, &mut found);
                }
            }
            push(s, &mut found);
        }
    }
    if found.is_empty() {
        return Err(FloquetError::Numerical("no seed converged".into()));
    }
    found.sort_by(|a, b| a.quasienergy.total_cmp(&b.quasienergy));
    Ok(found)
}

/// The two highest-quasienergy states (the continuation of the linear
/// pair); localized states split off below them.
pub fn normal_pair(states: &[FloquetState]) -> Option<(FloquetState, FloquetState)> {
    if states.len() < 2 {
        return None;
    }
    let mut v: Vec<&FloquetState> = states.iter().collect();
    v.sort_by(|a, b| a.quasienergy.total_cmp(&b.quasienergy));
    let n = v.len();
    Some((v[n - 2].clone(), v[n - 1].clone()))
}

/// Gap `Δε` between the two normal states.
pub fn normal_pair_gap(p: &SystemParams, opts: &SolverOptions) -> Result<f64, FloquetError> {
    let states = find_floquet_states(p, opts)?;
    let (lo, hi) = normal_pair(&states).ok_or_else(|| FloquetError::Numerical("fewer than two states".into()))?;
    Ok(quasienergy_gap(&lo, &hi, p.drive.omega()))
}
