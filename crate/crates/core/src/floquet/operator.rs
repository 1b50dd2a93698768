//! Truncated Fourier-space form of the Floquet eigenproblem.
//!
//! For `j = -N..=N` the two rows read
//!
//! ```text
//! -(A/4i)(a_{j-1} - a_{j+1} + f e^{iφ} a_{j-2} - f e^{-iφ} a_{j+2})
//!     - χ Σ_{m,m'} a_m a*_{m'} a_{j+m'-m} - (v/2) b_j + jω a_j = ε a_j
//! +(A/4i)(b_{j-1} - ...)                 - χ (same with b) - (v/2) a_j + jω b_j = ε b_j
//! ```
//!
//! with every index restricted to the truncation window.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{FloquetState, SystemParams};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Hermitian matrix of the linear part (drive, tunneling, `jω`).
pub(crate) fn linear_matrix(p: &SystemParams, cutoff: usize) -> DMatrix<C64> {
    let d = 2 * cutoff + 1;
    let n = cutoff as i64;
    let drive = &p.drive;
    let kappa = C64::new(0.0, drive.amplitude() / 4.0); // -A/(4i)
    let fe = C64::from_polar(drive.ratio(), drive.phase());
    let mut m = DMatrix::from_element(2 * d, 2 * d, ZERO);
    for (block, k) in [(0usize, kappa), (d, -kappa)] {
        for j in -n..=n {
            let r = (j + n) as usize;
            m[(block + r, block + r)] = C64::new(j as f64 * drive.omega(), 0.0);
            let mut put = |offset: i64, val: C64| {
                let c = j + offset + n;
                if (0..d as i64).contains(&c) {
                    m[(block + r, block + c as usize)] += val;
                }
            };
            put(-1, k);
            put(1, -k);
            put(-2, k * fe);
            put(2, -k * fe.conj());
        }
    }
    let half_v = C64::new(-0.5 * p.v, 0.0);
    for r in 0..d {
        m[(r, d + r)] = half_v;
        m[(d + r, r)] = half_v;
    }
    m
}

/// Fourier coefficients of `|c̃|²` (`g_k`, k = -2N..=2N) and of `c̃²`
/// (`h_s`, s = -2N..=2N), both restricted to in-window products.
fn density_coeffs(c: &[C64], cutoff: usize) -> (Vec<C64>, Vec<C64>) {
    let d = c.len();
    let mut g = vec![ZERO; 4 * cutoff + 1];
    let mut h = vec![ZERO; 4 * cutoff + 1];
    for m in 0..d {
        for mp in 0..d {
            // k = m - m', stored at k + 2N
            g[m + 2 * cutoff - mp] += c[m] * c[mp].conj();
            h[m + mp] += c[m] * c[mp];
        }
    }
    (g, h)
}

/// Fill `-scale · χ · G` into the diagonal blocks, `G_{jp} = g_{j-p}`.
fn add_density_blocks(m: &mut DMatrix<C64>, x: &[C64], cutoff: usize, factor: f64) {
    let d = 2 * cutoff + 1;
    for block in [0, d] {
        let (g, _) = density_coeffs(&x[block..block + d], cutoff);
        for j in 0..d {
            for q in 0..d {
                m[(block + j, block + q)] += g[j + 2 * cutoff - q] * factor;
            }
        }
    }
}

/// Linear operator with the cubic term frozen at `x`: `M - χ G(x)`.
pub(crate) fn frozen_matrix(p: &SystemParams, x: &[C64], cutoff: usize) -> DMatrix<C64> {
    let mut m = linear_matrix(p, cutoff);
    if p.chi != 0.0 {
        add_density_blocks(&mut m, x, cutoff, -p.chi);
    }
    m
}

pub(crate) fn residual_vector(p: &SystemParams, x: &[C64], eps: f64, cutoff: usize) -> Vec<C64> {
    let h = frozen_matrix(p, x, cutoff);
    let hx = &h * nalgebra::DVector::from_column_slice(x);
    hx.iter().zip(x).map(|(hv, xv)| hv - xv * eps).collect()
}

pub(crate) fn rayleigh_quotient(p: &SystemParams, x: &[C64], cutoff: usize) -> f64 {
    let h = frozen_matrix(p, x, cutoff);
    let v = nalgebra::DVector::from_column_slice(x);
    let num = v.dotc(&(&h * &v));
    num.re / v.norm_squared()
}

pub(crate) fn norm2(r: &[C64]) -> f64 {
    r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex Jacobian pieces of the residual: `δr = P δx + Q δx* - x δε`.
pub(crate) fn jacobian_parts(
    p: &SystemParams,
    x: &[C64],
    eps: f64,
    cutoff: usize,
) -> (DMatrix<C64>, DMatrix<C64>) {
    let d = 2 * cutoff + 1;
    let mut pm = linear_matrix(p, cutoff);
    let mut qm = DMatrix::from_element(2 * d, 2 * d, ZERO);
    for i in 0..2 * d {
        pm[(i, i)] -= C64::new(eps, 0.0);
    }
    if p.chi != 0.0 {
        add_density_blocks(&mut pm, x, cutoff, -2.0 * p.chi);
        for block in [0, d] {
            let (_, h) = density_coeffs(&x[block..block + d], cutoff);
            for j in 0..d {
                for q in 0..d {
                    // ∂/∂a*_q of Σ a_m a*_{m'} a_{j+m'-m} = h_{j+q}
                    qm[(block + j, block + q)] = h[j + q] * (-p.chi);
                }
            }
        }
    }
    (pm, qm)
}

/// Euclidean norm of the Fourier-space residual over all `2(2N+1)` rows.
pub fn floquet_residual(s: &FloquetState, p: &SystemParams) -> f64 {
    norm2(&residual_vector(p, &s.to_vector(), s.quasienergy, s.cutoff))
}
