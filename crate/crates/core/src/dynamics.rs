//! Time evolution of the driven two-mode system, optionally under a linear
//! amplitude ramp `A(t) = α min(t, t_f)`.
//!
//! Integration runs in the frame `c₁ = a₁ e^{-iG/2}`, `c₂ = a₂ e^{iG/2}` with
//! `G(t) = ∫₀ᵗ S`, where the equations read
//!
//! ```text
//! i da₁/dt = -(v/2) e^{iG} a₂ - χ|a₁|² a₁
//! i da₂/dt = -(v/2) e^{-iG} a₁ - χ|a₂|² a₂
//! ```
//!
//! The large diagonal drive term is then carried exactly and a classical
//! fixed-step RK4 only has to resolve the slow dynamics. `G(0) = 0`, so the
//! two frames agree at `t = 0`, and populations agree at all times.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use thiserror::Error;

use crate::effective::{effective_rhs, EffectiveParams};
use crate::floquet::{Mode, SystemParams};

/// Fraction of the drive period used as the default step.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 500;
/// Upper bound on stored samples per trajectory.
pub const MAX_SAMPLES: usize = 200_000;
/// Norm deviation treated as an integration failure.
pub const NORM_FAILURE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("norm drifted by {drift:e} at t = {time} (step too large?)")]
    NormDrift { time: f64, drift: f64 },
    #[error("non-finite amplitude at t = {0}")]
    NonFinite(f64),
}

/// Linear ramp of the drive amplitude, frozen after `hold_from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    pub rate: f64,
    pub hold_from: f64,
    pub target_a_over_omega: f64,
}

impl RampSchedule {
    pub fn new(rate: f64, hold_from: f64, omega: f64) -> Result<Self, DynamicsError> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(DynamicsError::Precondition(format!("ramp rate must be non-negative, got {rate}")));
        }
        if !(hold_from.is_finite() && hold_from >= 0.0) {
            return Err(DynamicsError::Precondition(format!("hold time must be non-negative, got {hold_from}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(DynamicsError::Precondition(format!("frequency must be positive, got {omega}")));
        }
        Ok(Self { rate, hold_from, target_a_over_omega: rate * hold_from / omega })
    }

    pub fn amplitude_at(&self, t: f64) -> f64 {
        self.rate * t.min(self.hold_from)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub c1: Vec<C64>,
    pub c2: Vec<C64>,
    pub params: SystemParams,
    pub ramp: Option<RampSchedule>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population(&self, mode: Mode, k: usize) -> f64 {
        match mode {
            Mode::First => self.c1[k].norm_sqr(),
            Mode::Second => self.c2[k].norm_sqr(),
        }
    }

    /// Largest `| |c₁|² + |c₂|² − 1 |` over the stored samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.c1.iter().zip(&self.c2).map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Time step; `None` means one 500th of the drive period.
    pub dt: Option<f64>,
    /// Keep every `stride`-th step; `None` picks the smallest stride that
    /// stays below [`MAX_SAMPLES`].
    pub stride: Option<usize>,
    /// Renormalize after every step. Off by default since the drift is
    /// itself a diagnostic.
    pub renormalize: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { dt: None, stride: None, renormalize: false }
    }
}

pub fn default_dt(p: &SystemParams) -> f64 {
    p.drive.period() / DEFAULT_STEPS_PER_PERIOD as f64
}

/// Phase `G(t) = ∫₀ᵗ S(s) ds` for constant amplitude or a ramp.
struct Phase {
    omega: f64,
    ratio: f64,
    phi: f64,
    amplitude: f64,
    ramp: Option<RampSchedule>,
}

impl Phase {
    // ∫₀ᵗ [sin ωs + f sin(2ωs + φ)] ds
    fn p(&self, t: f64) -> f64 {
        let w = self.omega;
        (1.0 - (w * t).cos()) / w + self.ratio * (self.phi.cos() - (2.0 * w * t + self.phi).cos()) / (2.0 * w)
    }

    // ∫₀ᵗ s [sin ωs + f sin(2ωs + φ)] ds
    fn q(&self, t: f64) -> f64 {
        let w = self.omega;
        let a = 2.0 * w * t + self.phi;
        -t * (w * t).cos() / w + (w * t).sin() / (w * w)
            + self.ratio * (-t * a.cos() / (2.0 * w) + (a.sin() - self.phi.sin()) / (4.0 * w * w))
    }

    fn at(&self, t: f64) -> f64 {
        match self.ramp {
            None => -self.amplitude * self.p(t),
            Some(r) if t <= r.hold_from => -r.rate * self.q(t),
            Some(r) => -r.rate * self.q(r.hold_from) - r.rate * r.hold_from * (self.p(t) - self.p(r.hold_from)),
        }
    }
}

fn check_initial(initial: (C64, C64)) -> Result<(), DynamicsError> {
    let n = initial.0.norm_sqr() + initial.1.norm_sqr();
    if !n.is_finite() || (n - 1.0).abs() > 1e-10 {
        return Err(DynamicsError::Precondition(format!("initial state must be normalized, got norm {n}")));
    }
    Ok(())
}

/// Step count and the step actually used (`t_end / steps`, never above `dt`).
fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

/// Integrate and report every step to `observer(t, c1, c2)`, including
/// `t = 0`. Returns the final lab-frame amplitudes.
pub fn integrate_observed(
    initial: (C64, C64),
    p: &SystemParams,
    ramp: Option<&RampSchedule>,
    t_end: f64,
    opts: &IntegrateOptions,
    mut observer: impl FnMut(usize, f64, C64, C64),
) -> Result<(C64, C64), DynamicsError> {
    check_initial(initial)?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(DynamicsError::Precondition(format!("end time must be positive, got {t_end}")));
    }
    let period = p.drive.period();
    let dt = opts.dt.unwrap_or_else(|| default_dt(p));
    if !(dt > 0.0) || dt > period / 200.0 * (1.0 + 1e-12) {
        return Err(DynamicsError::Precondition(format!("time step must lie in (0, T/200], got {dt}")));
    }
    let phase = Phase {
        omega: p.drive.omega(),
        ratio: p.drive.ratio(),
        phi: p.drive.phase(),
        amplitude: p.drive.amplitude(),
        ramp: ramp.copied(),
    };
    let (steps, h) = step_plan(t_end, dt);
    let hv = 0.5 * p.v;
    let chi = p.chi;
    let mi = C64::new(0.0, -1.0);
    let rhs = |e: C64, a1: C64, a2: C64| {
        let d1 = (a2 * e * (-hv) - a1 * (chi * a1.norm_sqr())) * mi;
        let d2 = (a1 * e.conj() * (-hv) - a2 * (chi * a2.norm_sqr())) * mi;
        (d1, d2)
    };
    let (mut a1, mut a2) = initial;
    let mut e0 = C64::new(1.0, 0.0);
    observer(0, 0.0, a1, a2);
    for k in 0..steps {
        let t = k as f64 * h;
        let gm = phase.at(t + 0.5 * h);
        let g1 = phase.at(t + h);
        let em = C64::from_polar(1.0, gm);
        let e1 = C64::from_polar(1.0, g1);
        let (k1a, k1b) = rhs(e0, a1, a2);
        let (k2a, k2b) = rhs(em, a1 + k1a * (0.5 * h), a2 + k1b * (0.5 * h));
        let (k3a, k3b) = rhs(em, a1 + k2a * (0.5 * h), a2 + k2b * (0.5 * h));
        let (k4a, k4b) = rhs(e1, a1 + k3a * h, a2 + k3b * h);
        a1 += (k1a + (k2a + k3a) * 2.0 + k4a) * (h / 6.0);
        a2 += (k1b + (k2b + k3b) * 2.0 + k4b) * (h / 6.0);
        e0 = e1;
        let tn = (k + 1) as f64 * h;
        let n = a1.norm_sqr() + a2.norm_sqr();
        if !n.is_finite() {
            return Err(DynamicsError::NonFinite(tn));
        }
        if (n - 1.0).abs() > NORM_FAILURE {
            return Err(DynamicsError::NormDrift { time: tn, drift: n - 1.0 });
        }
        if opts.renormalize {
            let s = n.sqrt();
            a1 /= s;
            a2 /= s;
        }
        let half = C64::from_polar(1.0, 0.5 * g1);
        observer(k + 1, tn, a1 * half.conj(), a2 * half);
    }
    let half = C64::from_polar(1.0, 0.5 * phase.at(t_end));
    Ok((a1 * half.conj(), a2 * half))
}

/// Integrate the full equations from `initial` up to `t_end`.
///
/// With a ramp, the drive amplitude follows the schedule and the amplitude
/// stored in `p` is ignored.
pub fn integrate(
    initial: (C64, C64),
    p: &SystemParams,
    ramp: Option<&RampSchedule>,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, DynamicsError> {
    let dt = opts.dt.unwrap_or_else(|| default_dt(p));
    let (steps, _) = step_plan(t_end.max(dt), dt);
    let stride = opts.stride.unwrap_or_else(|| steps.div_ceil(MAX_SAMPLES - 1).max(1)).max(1);
    let cap = steps / stride + 2;
    let mut times = Vec::with_capacity(cap);
    let mut c1 = Vec::with_capacity(cap);
    let mut c2 = Vec::with_capacity(cap);
    integrate_observed(initial, p, ramp, t_end, opts, |k, t, x1, x2| {
        if k % stride == 0 || k == steps {
            times.push(t);
            c1.push(x1);
            c2.push(x2);
        }
    })?;
    Ok(Trajectory { times, c1, c2, params: *p, ramp: ramp.copied() })
}

/// Max-norm difference between the final states obtained with `dt` and
/// `dt/2`.
pub fn step_doubling_difference(
    initial: (C64, C64),
    p: &SystemParams,
    ramp: Option<&RampSchedule>,
    t_end: f64,
    dt: f64,
) -> Result<f64, DynamicsError> {
    let opts = |dt| IntegrateOptions { dt: Some(dt), ..Default::default() };
    let a = integrate_observed(initial, p, ramp, t_end, &opts(dt), |_, _, _, _| {})?;
    let b = integrate_observed(initial, p, ramp, t_end, &opts(0.5 * dt), |_, _, _, _| {})?;
    Ok((a.0 - b.0).norm().max((a.1 - b.1).norm()))
}

/// Trapezoidal mean of `|c_mode|²` over the stored samples in `window`.
pub fn time_averaged_population(tr: &Trajectory, mode: Mode, window: (f64, f64)) -> Result<f64, DynamicsError> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(DynamicsError::Precondition(format!("empty averaging window [{t0}, {t1}]")));
    }
    let (first, last) = match (tr.times.first(), tr.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(DynamicsError::Precondition("empty trajectory".into())),
    };
    let slack = 1e-9 * (1.0 + last.abs());
    if t0 < first - slack || t1 > last + slack {
        return Err(DynamicsError::Precondition(format!("window [{t0}, {t1}] outside trajectory [{first}, {last}]")));
    }
    let idx: Vec<usize> = (0..tr.len()).filter(|&k| tr.times[k] >= t0 - slack && tr.times[k] <= t1 + slack).collect();
    if idx.len() < 2 {
        return Err(DynamicsError::Precondition("fewer than two samples in the averaging window".into()));
    }
    let mut acc = 0.0;
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        acc += 0.5 * (tr.population(mode, i) + tr.population(mode, j)) * (tr.times[j] - tr.times[i]);
    }
    let span = tr.times[*idx.last().unwrap()] - tr.times[idx[0]];
    Ok((acc / span).clamp(0.0, 1.0))
}

/// Running trapezoid of both populations over a window, at full step
/// resolution.
#[derive(Debug, Clone, Copy, Default)]
struct WindowMean {
    t0: f64,
    t1: f64,
    last: Option<(f64, f64, f64)>,
    acc1: f64,
    acc2: f64,
    span: f64,
}

impl WindowMean {
    fn new(t0: f64, t1: f64) -> Self {
        Self { t0, t1, ..Default::default() }
    }

    fn push(&mut self, t: f64, c1: C64, c2: C64) {
        if t < self.t0 || t > self.t1 {
            return;
        }
        let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());
        if let Some((tp, q1, q2)) = self.last {
            let dt = t - tp;
            self.acc1 += 0.5 * (p1 + q1) * dt;
            self.acc2 += 0.5 * (p2 + q2) * dt;
            self.span += dt;
        }
        self.last = Some((t, p1, p2));
    }

    fn means(&self) -> (f64, f64) {
        (self.acc1 / self.span, self.acc2 / self.span)
    }
}

/// Long-run average of `|c₁|²` with a consistency check across the two
/// halves of the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTimeAverage {
    pub mean: f64,
    pub first_half: f64,
    pub second_half: f64,
}

impl LongTimeAverage {
    /// Half-window means agree within 0.02.
    pub fn is_consistent(&self) -> bool {
        (self.first_half - self.second_half).abs() <= 0.02
    }
}

/// Default window: one period discarded, then up to `t = 2000`.
pub fn default_window(p: &SystemParams) -> (f64, f64) {
    (p.drive.period(), 2000.0)
}

pub fn long_time_average(
    initial: (C64, C64),
    p: &SystemParams,
    window: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<LongTimeAverage, DynamicsError> {
    let (t0, t1) = window;
    if !(t1 > t0 && t0 >= 0.0) {
        return Err(DynamicsError::Precondition(format!("empty averaging window [{t0}, {t1}]")));
    }
    let mid = 0.5 * (t0 + t1);
    let mut all = WindowMean::new(t0, t1);
    let mut a = WindowMean::new(t0, mid);
    let mut b = WindowMean::new(mid, t1);
    integrate_observed(initial, p, None, t1, opts, |_, t, c1, c2| {
        all.push(t, c1, c2);
        a.push(t, c1, c2);
        b.push(t, c1, c2);
    })?;
    Ok(LongTimeAverage { mean: all.means().0, first_half: a.means().0, second_half: b.means().0 })
}

/// One row of a ramp experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RampRow {
    pub phi: f64,
    pub pop1: f64,
    pub pop2: f64,
    /// Integration failure for this phase, if any; populations are NaN then.
    pub error: Option<DynamicsError>,
}

/// Ramp the amplitude at rate `alpha` up to `t_f` starting from the ground
/// state `(1, 1)/√2`, then average both populations over `[t_f, t_f + Δt]`.
/// Phases run in parallel; rows come back in input order.
pub fn ramp_localization(
    phis: &[f64],
    base: &SystemParams,
    alpha: f64,
    t_f: f64,
    dt_avg: f64,
    opts: &IntegrateOptions,
) -> Result<Vec<RampRow>, DynamicsError> {
    if !(alpha > 0.0 && dt_avg > 0.0 && t_f >= 0.0) {
        return Err(DynamicsError::Precondition("ramp needs alpha > 0, averaging window > 0 and t_f >= 0".into()));
    }
    let ramp = RampSchedule::new(alpha, t_f, base.drive.omega())?;
    Ok(phis.par_iter().map(|&phi| ramp_row(phi, base, &ramp, dt_avg, opts)).collect())
}

/// Single ramp run; `alpha = 0` is allowed here and leaves the drive off.
pub fn ramp_row(phi: f64, base: &SystemParams, ramp: &RampSchedule, dt_avg: f64, opts: &IntegrateOptions) -> RampRow {
    let p = base.with_phase(phi);
    let g = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let t_f = ramp.hold_from;
    let mut w = WindowMean::new(t_f, t_f + dt_avg);
    match integrate_observed((g, g), &p, Some(ramp), t_f + dt_avg, opts, |_, t, c1, c2| w.push(t, c1, c2)) {
        Ok(_) => {
            let (pop1, pop2) = w.means();
            RampRow { phi: p.drive.phase(), pop1, pop2, error: None }
        }
        Err(e) => RampRow { phi: p.drive.phase(), pop1: f64::NAN, pop2: f64::NAN, error: Some(e) },
    }
}

/// Samples of the averaged equations.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTrajectory {
    pub times: Vec<f64>,
    pub a1: Vec<C64>,
    pub a2: Vec<C64>,
}

/// Fixed-step RK4 for the averaged equations, storing every `stride`-th
/// step.
pub fn integrate_effective(
    initial: (C64, C64),
    e: &EffectiveParams,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<EffectiveTrajectory, DynamicsError> {
    check_initial(initial)?;
    if !(dt > 0.0 && t_end > 0.0 && stride > 0) {
        return Err(DynamicsError::Precondition("need dt > 0, t_end > 0 and stride > 0".into()));
    }
    let (steps, h) = step_plan(t_end, dt);
    let (mut a1, mut a2) = initial;
    let mut out = EffectiveTrajectory { times: vec![0.0], a1: vec![a1], a2: vec![a2] };
    for k in 0..steps {
        let (k1a, k1b) = effective_rhs(a1, a2, e);
        let (k2a, k2b) = effective_rhs(a1 + k1a * (0.5 * h), a2 + k1b * (0.5 * h), e);
        let (k3a, k3b) = effective_rhs(a1 + k2a * (0.5 * h), a2 + k2b * (0.5 * h), e);
        let (k4a, k4b) = effective_rhs(a1 + k3a * h, a2 + k3b * h, e);
        a1 += (k1a + (k2a + k3a) * 2.0 + k4a) * (h / 6.0);
        a2 += (k1b + (k2b + k3b) * 2.0 + k4b) * (h / 6.0);
        if !(a1.norm_sqr() + a2.norm_sqr()).is_finite() {
            return Err(DynamicsError::NonFinite((k + 1) as f64 * h));
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            out.times.push((k + 1) as f64 * h);
            out.a1.push(a1);
            out.a2.push(a2);
        }
    }
    Ok(out)
}
