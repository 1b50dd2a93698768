use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use super::{fold_quasienergy, FloquetError, SystemParams};
use crate::drive::drive_value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyOptions {
    /// Upper bound on `h · ‖H‖` per RK4 step.
    pub max_phase_step: f64,
    /// Allowed deviation of `|λ|` from one.
    pub unitarity_tol: f64,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self { max_phase_step: 0.005, unitarity_tol: 1e-8 }
    }
}

fn hamiltonian(p: &SystemParams, t: f64) -> Matrix2<C64> {
    let s = 0.5 * drive_value(t, &p.drive);
    let hv = -0.5 * p.v;
    Matrix2::new(C64::new(s, 0.0), C64::new(hv, 0.0), C64::new(hv, 0.0), C64::new(-s, 0.0))
}

/// One-period propagator of the linear system, integrated from the identity.
pub fn monodromy_matrix(p: &SystemParams, opts: &MonodromyOptions) -> Result<Matrix2<C64>, FloquetError> {
    if p.chi != 0.0 {
        return Err(FloquetError::Precondition("monodromy oracle requires chi = 0".into()));
    }
    let period = p.drive.period();
    let hmax = 0.5 * p.drive.scale() + 0.5 * p.v;
    let steps = ((period * hmax / opts.max_phase_step).ceil() as usize).max(1000);
    let h = period / steps as f64;
    let mi = C64::new(0.0, -1.0);
    let rhs = |t: f64, u: &Matrix2<C64>| hamiltonian(p, t) * u * mi;
    let mut u = Matrix2::<C64>::identity();
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(t, &u);
        let k2 = rhs(t + 0.5 * h, &(u + k1 * C64::from(0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(u + k2 * C64::from(0.5 * h)));
        let k4 = rhs(t + h, &(u + k3 * C64::from(h)));
        u += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0);
    }
    if u.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(FloquetError::Numerical("non-finite monodromy matrix".into()));
    }
    Ok(u)
}

/// Quasienergies `fold(-arg λ / T)` of the two monodromy eigenvalues, sorted
/// ascending.
pub fn monodromy_quasienergies(p: &SystemParams, opts: &MonodromyOptions) -> Result<[f64; 2], FloquetError> {
    let u = monodromy_matrix(p, opts)?;
    let tr = u[(0, 0)] + u[(1, 1)];
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let lams = [(tr + disc) * 0.5, (tr - disc) * 0.5];
    let period = p.drive.period();
    let mut out = [0.0; 2];
    for (o, l) in out.iter_mut().zip(lams) {
        if (l.norm() - 1.0).abs() > opts.unitarity_tol {
            return Err(FloquetError::Numerical(format!("monodromy eigenvalue off the unit circle: |λ| = {}", l.norm())));
        }
        *o = fold_quasienergy(-l.arg() / period, p.drive.omega());
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::DriveParams;
    use approx::assert_abs_diff_eq;

    #[test]
    fn undriven_splitting() {
        let p = SystemParams::new(1.0, 0.0, DriveParams::new(0.0, 0.25, 10.0, 0.0).unwrap()).unwrap();
        let e = monodromy_quasienergies(&p, &MonodromyOptions::default()).unwrap();
        assert_abs_diff_eq!(e[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn monodromy_is_unitary_with_unit_determinant() {
        let p = SystemParams::new(1.0, 0.0, DriveParams::from_scaled(3.1, 0.4, 10.0, 1.1).unwrap()).unwrap();
        let u = monodromy_matrix(&p, &MonodromyOptions::default()).unwrap();
        let id = u.adjoint() * u;
        assert!((id - Matrix2::identity()).iter().all(|c| c.norm() < 1e-10));
        assert!((u.determinant() - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn rejects_nonlinear() {
        let p = SystemParams::new(1.0, 0.1, DriveParams::new(1.0, 0.25, 10.0, 0.0).unwrap()).unwrap();
        assert!(monodromy_quasienergies(&p, &MonodromyOptions::default()).is_err());
    }
}
