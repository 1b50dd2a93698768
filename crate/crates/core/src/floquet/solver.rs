use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::operator::{frozen_matrix, jacobian_parts, norm2, rayleigh_quotient, residual_vector};
use super::{fold_with_shift, FloquetError, FloquetState, SystemParams};

/// Knobs of the self-consistent solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target Euclidean norm of the Fourier-space residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Mixing weight of the new eigenvector in a self-consistent step.
    pub damping: f64,
    /// Grow the cutoff until the outer shell carries less than `shell_tol`.
    pub adaptive_cutoff: bool,
    pub shell_tol: f64,
    pub cutoff_step: usize,
    pub max_cutoff: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            damping: 0.5,
            adaptive_cutoff: true,
            shell_tol: 1e-12,
            cutoff_step: 8,
            max_cutoff: 128,
        }
    }
}

/// Solve the self-consistent Floquet eigenproblem starting from `guess`.
///
/// Each iteration first tries a Newton step on the full nonlinear system
/// (residual, norm and a phase gauge, solved in the least-squares sense);
/// when that does not reduce the residual it falls back to the
/// self-consistent step: freeze the cubic term, diagonalize, pick the
/// eigenvector with the largest overlap and mix it in with weight `damping`.
///
/// The returned state is normalized, gauge-fixed and has its quasienergy
/// folded into `(-ω/2, ω/2]`.
pub fn solve_floquet_state(
    p: &SystemParams,
    guess: &FloquetState,
    opts: &SolverOptions,
) -> Result<FloquetState, FloquetError> {
    if !(opts.tol > 0.0) {
        return Err(FloquetError::Precondition(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(FloquetError::Precondition(format!("damping must lie in (0, 1], got {}", opts.damping)));
    }
    let n0 = guess.norm_sqr();
    if !(n0.is_finite() && n0 > 0.0) {
        return Err(FloquetError::Precondition("guess has zero or non-finite norm".into()));
    }
    let mut current = guess.clone();
    current.normalize();

    let omega = p.drive.omega();
    let mut state = loop {
        let s = solve_fixed_cutoff(p, &current, opts)?;
        if !opts.adaptive_cutoff || s.outer_shell_weight() < opts.shell_tol || s.cutoff >= opts.max_cutoff {
            break s;
        }
        current = s.with_cutoff((s.cutoff + opts.cutoff_step).min(opts.max_cutoff));
    };

    let (folded, shift) = fold_with_shift(state.quasienergy, omega);
    if shift != 0 {
        state.shift_harmonics(shift);
        state.quasienergy = folded;
        state.normalize();
        state = solve_fixed_cutoff(p, &state, opts)?;
        state.quasienergy = fold_with_shift(state.quasienergy, omega).0;
    } else {
        state.quasienergy = folded;
    }
    state.fix_gauge();
    state.residual_norm = norm2(&residual_vector(p, &state.to_vector(), state.quasienergy, state.cutoff));
    Ok(state)
}

fn normalized(mut x: Vec<C64>) -> Vec<C64> {
    let n = norm2(&x);
    for c in x.iter_mut() {
        *c /= n;
    }
    x
}

fn solve_fixed_cutoff(
    p: &SystemParams,
    guess: &FloquetState,
    opts: &SolverOptions,
) -> Result<FloquetState, FloquetError> {
    let cutoff = guess.cutoff;
    let mut x = normalized(guess.to_vector());
    let mut eps = rayleigh_quotient(p, &x, cutoff);
    let mut r = norm2(&residual_vector(p, &x, eps, cutoff));
    let mut best = (r, x.clone(), eps);

    for _ in 0..opts.max_iter {
        if !r.is_finite() {
            return Err(FloquetError::Numerical("non-finite residual during iteration".into()));
        }
        if r <= opts.tol {
            let mut s = FloquetState::from_vector(eps, &x, cutoff);
            s.residual_norm = r;
            return Ok(s);
        }
        let (nx, neps, nr) = match newton_step(p, &x, eps, r, cutoff) {
            Some(step) => step,
            None => scf_step(p, &x, cutoff, opts.damping)?,
        };
        x = nx;
        eps = neps;
        r = nr;
        if r < best.0 {
            best = (r, x.clone(), eps);
        }
    }
    if r <= opts.tol {
        let mut s = FloquetState::from_vector(eps, &x, cutoff);
        s.residual_norm = r;
        return Ok(s);
    }
    let mut b = FloquetState::from_vector(best.2, &best.1, cutoff);
    b.residual_norm = best.0;
    Err(FloquetError::NotConverged { iterations: opts.max_iter, residual: best.0, best: Box::new(b) })
}

/// Gauss-Newton step with simple backtracking; `None` when it fails to
/// reduce the residual.
fn newton_step(p: &SystemParams, x: &[C64], eps: f64, r0: f64, cutoff: usize) -> Option<(Vec<C64>, f64, f64)> {
    let dim = x.len();
    let (pm, qm) = jacobian_parts(p, x, eps, cutoff);
    let res = residual_vector(p, x, eps, cutoff);
    let gauge = (0..dim)
        .max_by(|&i, &j| x[i].norm_sqr().total_cmp(&x[j].norm_sqr()))
        .unwrap_or(0);

    let rows = 2 * dim + 2;
    let cols = 2 * dim + 1;
    let mut jac = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    for i in 0..dim {
        for k in 0..dim {
            let s = pm[(i, k)] + qm[(i, k)];
            let d = pm[(i, k)] - qm[(i, k)];
            jac[(i, k)] = s.re;
            jac[(i, dim + k)] = -d.im;
            jac[(dim + i, k)] = s.im;
            jac[(dim + i, dim + k)] = d.re;
        }
        jac[(i, 2 * dim)] = -x[i].re;
        jac[(dim + i, 2 * dim)] = -x[i].im;
        rhs[i] = -res[i].re;
        rhs[dim + i] = -res[i].im;
        jac[(2 * dim, i)] = 2.0 * x[i].re;
        jac[(2 * dim, dim + i)] = 2.0 * x[i].im;
    }
    rhs[2 * dim] = 1.0 - x.iter().map(|c| c.norm_sqr()).sum::<f64>();
    jac[(2 * dim + 1, dim + gauge)] = 1.0;
    rhs[2 * dim + 1] = -x[gauge].im;

    let svd = jac.svd(true, true);
    let delta = svd.solve(&rhs, 1e-13).ok()?;
    if delta.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut lambda = 1.0;
    for _ in 0..4 {
        let trial: Vec<C64> =
            (0..dim).map(|i| x[i] + C64::new(delta[i], delta[dim + i]) * lambda).collect();
        let trial = normalized(trial);
        let teps = eps + lambda * delta[2 * dim];
        let tr = norm2(&residual_vector(p, &trial, teps, cutoff));
        if tr.is_finite() && tr < r0 {
            return Some((trial, teps, tr));
        }
        lambda *= 0.5;
    }
    None
}

fn scf_step(
    p: &SystemParams,
    x: &[C64],
    cutoff: usize,
    damping: f64,
) -> Result<(Vec<C64>, f64, f64), FloquetError> {
    let h = frozen_matrix(p, x, cutoff);
    let eig = SymmetricEigen::new(h);
    let xv = DVector::from_column_slice(x);
    let (best, ov) = (0..eig.eigenvalues.len())
        .map(|k| (k, eig.eigenvectors.column(k).dotc(&xv)))
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .ok_or_else(|| FloquetError::Numerical("empty eigen decomposition".into()))?;
    // align the phase of the selected eigenvector with the current iterate
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
    let col = eig.eigenvectors.column(best);
    let mixed: Vec<C64> = (0..x.len()).map(|i| x[i] * (1.0 - damping) + col[i] * phase * damping).collect();
    let mixed = normalized(mixed);
    let eps = rayleigh_quotient(p, &mixed, cutoff);
    let r = norm2(&residual_vector(p, &mixed, eps, cutoff));
    if !r.is_finite() {
        return Err(FloquetError::Numerical("non-finite residual in self-consistent step".into()));
    }
    Ok((mixed, eps, r))
}
