//! Harmonic-mixing drive `S(t) = -A [sin ωt + f sin(2ωt + φ)]`.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriveError {
    #[error("drive frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("drive parameters must be finite")]
    NonFinite,
    #[error("symmetry tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("analytic and sampled classification disagree for {which} (sampled residual {residual:e})")]
    InconsistentClassification { which: &'static str, residual: f64 },
}

/// Wrap an angle into `[-π, π)`.
pub fn canonical_phase(phi: f64) -> f64 {
    let mut p = phi - TAU * ((phi + PI) / TAU).floor();
    if p >= PI {
        p -= TAU;
    }
    if p < -PI {
        p = -PI;
    }
    p
}

/// Amplitude, harmonic ratio, angular frequency and relative phase of the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    amplitude: f64,
    ratio: f64,
    omega: f64,
    phase: f64,
}

impl DriveParams {
    pub fn new(amplitude: f64, ratio: f64, omega: f64, phase: f64) -> Result<Self, DriveError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(DriveError::InvalidFrequency(omega));
        }
        if !(amplitude.is_finite() && ratio.is_finite() && phase.is_finite()) {
            return Err(DriveError::NonFinite);
        }
        Ok(Self { amplitude, ratio, omega, phase: canonical_phase(phase) })
    }

    /// Drive specified through the dimensionless amplitude `A/ω`.
    pub fn from_scaled(a_over_omega: f64, ratio: f64, omega: f64, phase: f64) -> Result<Self, DriveError> {
        Self::new(a_over_omega * omega, ratio, omega, phase)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
    pub fn ratio(&self) -> f64 {
        self.ratio
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn phase(&self) -> f64 {
        self.phase
    }
    pub fn a_over_omega(&self) -> f64 {
        self.amplitude / self.omega
    }
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = canonical_phase(phase);
        self
    }

    /// `|A| (1 + |f|)`, the natural magnitude of `S`.
    pub fn scale(&self) -> f64 {
        self.amplitude.abs() * (1.0 + self.ratio.abs())
    }
}

pub fn drive_value(t: f64, p: &DriveParams) -> f64 {
    let wt = p.omega * t;
    -p.amplitude * (wt.sin() + p.ratio * (2.0 * wt + p.phase).sin())
}

/// Zero-mean antiderivative of [`drive_value`]:
/// `(A/ω) cos ωt + (A f / 2ω) cos(2ωt + φ)`.
pub fn drive_antiderivative(t: f64, p: &DriveParams) -> f64 {
    let wt = p.omega * t;
    let x = p.amplitude / p.omega;
    x * wt.cos() + 0.5 * x * p.ratio * (2.0 * wt + p.phase).cos()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// `S(t) = -S(t + T/2)`; generalized parity survives.
    pub shift_symmetric: bool,
    /// `S(t0 + t) = -S(t0 - t)` for some `t0`.
    pub antisymmetric: bool,
    /// `S(t0 + t) = S(t0 - t)` for some `t0`.
    pub time_reversal_symmetric: bool,
    pub antisymmetry_point: Option<f64>,
    pub time_reversal_point: Option<f64>,
}

impl SymmetryReport {
    /// The symmetry point, preferring the time-reversal one when both exist.
    pub fn symmetry_point(&self) -> Option<f64> {
        self.time_reversal_point.or(self.antisymmetry_point)
    }
}

const SAMPLES: usize = 1024;

#[derive(Clone, Copy)]
enum Reflection {
    Odd,
    Even,
}

// max_t |S(t0+t) ∓ S(t0-t)| over one period, relative to the drive scale
fn reflection_residual(p: &DriveParams, t0: f64, kind: Reflection) -> f64 {
    let period = p.period();
    (0..SAMPLES)
        .map(|k| {
            let t = period * k as f64 / SAMPLES as f64;
            let plus = drive_value(t0 + t, p);
            let minus = drive_value(t0 - t, p);
            match kind {
                Reflection::Odd => (plus + minus).abs(),
                Reflection::Even => (plus - minus).abs(),
            }
        })
        .fold(0.0, f64::max)
}

fn shift_residual(p: &DriveParams) -> f64 {
    let period = p.period();
    (0..SAMPLES)
        .map(|k| {
            let t = period * k as f64 / SAMPLES as f64;
            (drive_value(t, p) + drive_value(t + 0.5 * period, p)).abs()
        })
        .fold(0.0, f64::max)
}

// Analytic candidates first, then a grid over one period.
fn best_reflection_point(p: &DriveParams, kind: Reflection) -> (f64, f64) {
    let period = p.period();
    let candidates: &[f64] = match kind {
        Reflection::Odd => &[0.0, 0.5],
        Reflection::Even => &[0.25, 0.75],
    };
    let mut best = (f64::INFINITY, 0.0);
    let grid = (0..SAMPLES).map(|k| k as f64 / SAMPLES as f64);
    for frac in candidates.iter().copied().chain(grid) {
        let t0 = frac * period;
        let r = reflection_residual(p, t0, kind);
        if r < best.0 {
            best = (r, t0);
        }
    }
    best
}

/// Classify the time-space symmetries of the drive.
///
/// `tol` is relative to [`DriveParams::scale`]. The analytic conditions
/// (`φ ≡ 0` or `π/2 (mod π)`, expressed through the exact residual amplitudes
/// `2|A f sin φ|`, `2|A f cos φ|`, `2|A f|`) are cross-checked against dense
/// sampling of `S` over one period.
pub fn classify_symmetries(p: &DriveParams, tol: f64) -> Result<SymmetryReport, DriveError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(DriveError::InvalidTolerance(tol));
    }
    let scale = p.scale();
    if scale == 0.0 {
        return Ok(SymmetryReport {
            shift_symmetric: true,
            antisymmetric: true,
            time_reversal_symmetric: true,
            antisymmetry_point: Some(0.0),
            time_reversal_point: Some(0.0),
        });
    }
    let af = (p.amplitude * p.ratio).abs();
    let analytic_shift = 2.0 * af <= tol * scale;
    let analytic_odd = 2.0 * af * p.phase.sin().abs() <= tol * scale;
    let analytic_even = 2.0 * af * p.phase.cos().abs() <= tol * scale;

    let shift_res = shift_residual(p) / scale;
    let (odd_res, odd_t0) = best_reflection_point(p, Reflection::Odd);
    let (even_res, even_t0) = best_reflection_point(p, Reflection::Even);
    let odd_res = odd_res / scale;
    let even_res = even_res / scale;

    let check = |which, analytic: bool, residual: f64| {
        if analytic == (residual <= tol) {
            Ok(analytic)
        } else {
            Err(DriveError::InconsistentClassification { which, residual })
        }
    };
    let shift_symmetric = check("shift symmetry", analytic_shift, shift_res)?;
    let antisymmetric = check("antisymmetry", analytic_odd, odd_res)?;
    let time_reversal_symmetric = check("time-reversal symmetry", analytic_even, even_res)?;

    Ok(SymmetryReport {
        shift_symmetric,
        antisymmetric,
        time_reversal_symmetric,
        antisymmetry_point: antisymmetric.then_some(odd_t0),
        time_reversal_point: time_reversal_symmetric.then_some(even_t0),
    })
}
