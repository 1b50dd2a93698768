//! Nonlinear Floquet states of the driven two-mode system
//!
//! ```text
//! i dc₁/dt = -(v/2) c₂ + (S(t)/2) c₁ - χ|c₁|² c₁
//! i dc₂/dt = -(v/2) c₁ - (S(t)/2) c₂ - χ|c₂|² c₂
//! ```
//!
//! Floquet solutions `c(t) = c̃(t) e^{-iεt}` are computed in a truncated
//! Fourier basis by a self-consistent scheme polished with Newton steps,
//! continued along the drive amplitude, and cross-checked in the linear
//! limit against a monodromy-matrix computation.

mod continuation;
mod monodromy;
mod operator;
mod solver;
mod spectrum;
mod state;

use thiserror::Error;

use crate::drive::{DriveError, DriveParams};

pub use continuation::{continue_branch, BranchLabel, BranchPoint, SpectrumBranch};
pub use monodromy::{monodromy_matrix, monodromy_quasienergies, MonodromyOptions};
pub use operator::floquet_residual;
pub use solver::{solve_floquet_state, SolverOptions};
pub use spectrum::{
    are_degenerate, find_floquet_states, linear_floquet_states, normal_pair, normal_pair_gap,
    partner_state, quasienergy_gap, seed_from_amplitudes,
};
pub use state::{cycle_averaged_population, population_imbalance, FloquetState, Mode};

#[derive(Debug, Error)]
pub enum FloquetError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64, best: Box<FloquetState> },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Drive(#[from] DriveError),
}

/// Tunneling `v > 0`, nonlinearity `χ ≥ 0` and the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub v: f64,
    pub chi: f64,
    pub drive: DriveParams,
}

impl SystemParams {
    pub fn new(v: f64, chi: f64, drive: DriveParams) -> Result<Self, FloquetError> {
        if !(v.is_finite() && v > 0.0) {
            return Err(FloquetError::Precondition(format!("tunneling rate must be positive, got {v}")));
        }
        if !(chi.is_finite() && chi >= 0.0) {
            return Err(FloquetError::Precondition(format!("nonlinearity must be non-negative, got {chi}")));
        }
        Ok(Self { v, chi, drive })
    }

    pub fn with_a_over_omega(mut self, a_over_omega: f64) -> Self {
        self.drive = self.drive.with_amplitude(a_over_omega * self.drive.omega());
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.drive = self.drive.with_phase(phase);
        self
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }
}

/// Fold a quasienergy into the zone `(-ω/2, ω/2]`.
pub fn fold_quasienergy(eps: f64, omega: f64) -> f64 {
    fold_with_shift(eps, omega).0
}

/// Folded value and the integer `k` with `eps = folded + k ω`.
pub(crate) fn fold_with_shift(eps: f64, omega: f64) -> (f64, i64) {
    let half = 0.5 * omega;
    let mut k = ((eps - half) / omega).ceil();
    let mut folded = eps - k * omega;
    if folded <= -half {
        folded += omega;
        k -= 1.0;
    } else if folded > half {
        folded -= omega;
        k += 1.0;
    }
    (folded, k as i64)
}
