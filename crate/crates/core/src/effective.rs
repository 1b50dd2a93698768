//! High-frequency effective description of the driven two-mode system.
//!
//! In the rotating frame `c₁ = a₁ e^{-iG/2}`, `c₂ = a₂ e^{iG/2}` with
//! `G' = S`, tunneling acquires the factor `F(τ) = e^{iG}`, `τ = ωt`:
//!
//! ```text
//! F(τ) = exp{i (A/ω) cos τ + i (A f / 2ω) cos(2τ + φ)} = Σ_k F_k e^{ikτ}
//! ```
//!
//! Averaging to second order in `v/ω` leaves a renormalized coupling
//! `v' = v F̄`, a static bias `δ'` and the cubic term.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::bessel::BesselTable;
use crate::drive::DriveParams;
use crate::floquet::SystemParams;

/// Default truncation of the sums over the second-harmonic index.
pub const DEFAULT_HARMONIC_CUTOFF: usize = 12;
/// Default truncation of the sums over the total harmonic index.
pub const DEFAULT_TOTAL_CUTOFF: usize = 40;

#[derive(Debug, Error)]
pub enum EffectiveError {
    #[error("root search incomplete, {} stationary state(s) found", found.len())]
    Partial { found: Vec<StationaryState> },
    #[error("non-finite effective parameters")]
    NonFinite,
}

/// Cutoffs actually used for a given drive.
#[derive(Debug, Clone, Copy)]
struct Cutoffs {
    m: usize,
    total: usize,
}

fn cutoffs(p: &DriveParams) -> Cutoffs {
    let x = p.a_over_omega().abs();
    let y = 0.5 * x * p.ratio().abs();
    // smallest m with (y/2)^m / m! below 1e-18
    let mut m = 0usize;
    let mut term = 1.0f64;
    while term > 1e-18 && m < 200 {
        m += 1;
        term *= 0.5 * y / m as f64;
    }
    let m = m.max(DEFAULT_HARMONIC_CUTOFF);
    let total = DEFAULT_TOTAL_CUTOFF.max((x + 2.0 * y + 30.0 + 3.0 * (x + 2.0 * y).sqrt()).ceil() as usize);
    Cutoffs { m, total }
}

struct Tables {
    jx: BesselTable,
    jy: BesselTable,
    cut: Cutoffs,
}

fn tables(p: &DriveParams) -> Tables {
    let cut = cutoffs(p);
    let x = p.a_over_omega();
    let y = 0.5 * x * p.ratio();
    Tables { jx: BesselTable::new(cut.total + 2 * cut.m + 2, x), jy: BesselTable::new(cut.m, y), cut }
}

fn ipow(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Fourier coefficient `F_k = Σ_m i^{k-m} J_{k-2m}(A/ω) J_m(Af/2ω) e^{imφ}`.
fn f_coeff(t: &Tables, k: i64, phi: f64) -> C64 {
    let mm = t.cut.m as i64;
    (-mm..=mm)
        .map(|m| ipow(k - m) * C64::from_polar(t.jx.get(k - 2 * m) * t.jy.get(m), m as f64 * phi))
        .sum()
}

/// Renormalized coupling factor `F̄ = Σ_m J_{-2m}(A/ω) J_m(Af/2ω) i^{-m} e^{imφ}`.
pub fn f_bar(p: &DriveParams) -> C64 {
    f_coeff(&tables(p), 0, p.phase())
}

/// The driving factor `F(τ)` itself.
pub fn f_tau(tau: f64, p: &DriveParams) -> C64 {
    let x = p.a_over_omega();
    C64::from_polar(1.0, x * tau.cos() + 0.5 * x * p.ratio() * (2.0 * tau + p.phase()).cos())
}

/// First-order correction
/// `Φ(τ) = Σ_{n≠-2m} J_n(A/ω) J_m(Af/2ω) i^{m+n} e^{imφ} e^{i(2m+n)τ} / (2m+n)`.
///
/// Summed with `m` outer and `n` inner over symmetric windows.
pub fn phi_correction(tau: f64, p: &DriveParams) -> C64 {
    let t = tables(p);
    let mm = t.cut.m as i64;
    let nn = t.cut.total as i64 + 2 * mm;
    let phi = p.phase();
    let mut acc = C64::new(0.0, 0.0);
    for m in -mm..=mm {
        let jm = t.jy.get(m);
        if jm == 0.0 {
            continue;
        }
        for n in -nn..=nn {
            let k = 2 * m + n;
            if k == 0 {
                continue;
            }
            let w = t.jx.get(n) * jm / k as f64;
            acc += ipow(m + n) * C64::from_polar(w, m as f64 * phi + k as f64 * tau);
        }
    }
    acc
}

/// Second-order bias summed in the reduced form over `M > 0`,
/// `Σ_{M>0} (1/M) Σ_{m,l} (-1)^{M-l} i^{2M-m-l} J_{M-2m} J_{M-2l} J_m J_l
/// (e^{i(m-l)φ} - e^{-i(m-l)φ})`.
///
/// Returned as a complex number; the imaginary part vanishes up to rounding.
pub fn delta_bias_complex(p: &DriveParams) -> C64 {
    let t = tables(p);
    let mm = t.cut.m as i64;
    let phi = p.phase();
    let mut acc = C64::new(0.0, 0.0);
    for big in 1..=t.cut.total as i64 {
        let mut inner = C64::new(0.0, 0.0);
        for m in -mm..=mm {
            let am = t.jx.get(big - 2 * m) * t.jy.get(m);
            if am == 0.0 {
                continue;
            }
            for l in -mm..=mm {
                let w = am * t.jx.get(big - 2 * l) * t.jy.get(l);
                if w == 0.0 {
                    continue;
                }
                let sign = if (big - l).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let ph = (m - l) as f64 * phi;
                inner += ipow(2 * big - m - l) * C64::new(0.0, 2.0 * ph.sin()) * (sign * w);
            }
        }
        acc += inner / big as f64;
    }
    acc
}

/// Same bias from the unreduced double-sided sum over `M ≠ 0`.
pub fn delta_bias_full(p: &DriveParams) -> C64 {
    let t = tables(p);
    let mm = t.cut.m as i64;
    let phi = p.phase();
    let total = t.cut.total as i64;
    let mut acc = C64::new(0.0, 0.0);
    for big in -total..=total {
        if big == 0 {
            continue;
        }
        let mut inner = C64::new(0.0, 0.0);
        for m in -mm..=mm {
            for l in -mm..=mm {
                let w = t.jx.get(big - 2 * m) * t.jx.get(big - 2 * l) * t.jy.get(m) * t.jy.get(l);
                if w == 0.0 {
                    continue;
                }
                let sign = if (big - l).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                inner += ipow(2 * big - m - l) * C64::from_polar(sign * w, (m - l) as f64 * phi);
            }
        }
        acc += inner / big as f64;
    }
    acc
}

/// Real dimensionless bias `δ`.
pub fn delta_bias(p: &DriveParams) -> f64 {
    let d = delta_bias_complex(p);
    debug_assert!((d - delta_bias_full(p)).norm() <= 1e-12 * (1.0 + d.norm()));
    d.re
}

/// `F̄` and `δ` from an `n`-point DFT of `F(τ)` sampled over one period,
/// without Bessel functions. Spectrally accurate once `n` exceeds the
/// bandwidth of `F`.
pub fn quadrature_check(p: &DriveParams, n: usize) -> (C64, f64) {
    let n = n.max(8);
    let samples: Vec<C64> = (0..n).map(|j| f_tau(std::f64::consts::TAU * j as f64 / n as f64, p)).collect();
    let coeff = |k: i64| -> C64 {
        samples
            .iter()
            .enumerate()
            .map(|(j, f)| f * C64::from_polar(1.0, -std::f64::consts::TAU * (k * j as i64) as f64 / n as f64))
            .sum::<C64>()
            / n as f64
    };
    let half = (n / 2) as i64 - 1;
    let delta = (1..=half).map(|k| (coeff(k).norm_sqr() - coeff(-k).norm_sqr()) / k as f64).sum();
    (coeff(0), delta)
}

/// Coefficients of the averaged equations
///
/// ```text
/// i dA₁/dt =  (δ'/2) A₁ − χ|A₁|² A₁ − (v'/2)  A₂
/// i dA₂/dt = −(δ'/2) A₂ − χ|A₂|² A₂ − (v'*/2) A₁
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub v_eff: C64,
    pub delta_eff: f64,
    pub chi: f64,
    /// `v/ω`
    pub epsilon_small: f64,
    pub series_cutoff: usize,
}

impl EffectiveParams {
    /// Effective parameters of a full system; `δ' = v² δ / (2ω)`.
    pub fn from_system(p: &SystemParams) -> Self {
        let omega = p.drive.omega();
        Self {
            v_eff: f_bar(&p.drive) * p.v,
            delta_eff: p.v * p.v * delta_bias(&p.drive) / (2.0 * omega),
            chi: p.chi,
            epsilon_small: p.v / omega,
            series_cutoff: cutoffs(&p.drive).total,
        }
    }

    /// Whether `v/ω` is small enough for the expansion to be trusted.
    pub fn is_perturbative(&self) -> bool {
        self.epsilon_small < 0.2
    }

    /// Linear eigenvalues `±½ √(δ'² + |v'|²)`.
    pub fn linear_energies(&self) -> [f64; 2] {
        let r = 0.5 * self.delta_eff.hypot(self.v_eff.norm());
        [-r, r]
    }
}

pub fn effective_rhs(a1: C64, a2: C64, e: &EffectiveParams) -> (C64, C64) {
    let mi = C64::new(0.0, -1.0);
    let h1 = a1 * (0.5 * e.delta_eff - e.chi * a1.norm_sqr()) - a2 * e.v_eff * 0.5;
    let h2 = a2 * (-0.5 * e.delta_eff - e.chi * a2.norm_sqr()) - a1 * e.v_eff.conj() * 0.5;
    (h1 * mi, h2 * mi)
}

/// Normalized stationary solution `A(t) = (a1, a2) e^{-i E t}`, with `a1`
/// real and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryState {
    pub energy: f64,
    pub a1: C64,
    pub a2: C64,
}

impl StationaryState {
    pub fn imbalance(&self) -> f64 {
        self.a1.norm_sqr() - self.a2.norm_sqr()
    }

    fn from_z(z: f64, theta: f64, energy: f64) -> Self {
        let z = z.clamp(-1.0, 1.0);
        let a1 = C64::new((0.5 * (1.0 + z)).sqrt(), 0.0);
        let a2 = C64::from_polar((0.5 * (1.0 - z)).sqrt(), theta);
        Self { energy, a1, a2 }
    }
}

/// All normalized stationary states of the averaged equations, sorted by
/// energy.
///
/// With `v' = K e^{iα}` the relative phase is locked to `θ = -α` or `π - α`
/// (`c = cos(θ + α) = ±1`) and the imbalance `z` solves
/// `δ' − χ z + c K z / √(1 − z²) = 0`; the energy is
/// `(δ'/2) z − χ (1 + z²)/2 − (c K/2) √(1 − z²)`.
pub fn effective_stationary_states(e: &EffectiveParams) -> Result<Vec<StationaryState>, EffectiveError> {
    if !(e.v_eff.re.is_finite() && e.v_eff.im.is_finite() && e.delta_eff.is_finite() && e.chi.is_finite()) {
        return Err(EffectiveError::NonFinite);
    }
    let d = e.delta_eff;
    let chi = e.chi;
    let k = e.v_eff.norm();
    let alpha = e.v_eff.arg();
    let energy = |z: f64, c: f64| 0.5 * d * z - 0.5 * chi * (1.0 + z * z) - 0.5 * c * k * (1.0 - z * z).max(0.0).sqrt();

    let mut out = Vec::new();
    if k == 0.0 {
        out.push(StationaryState::from_z(1.0, 0.0, 0.5 * d - chi));
        out.push(StationaryState::from_z(-1.0, 0.0, -0.5 * d - chi));
        if chi > 0.0 && d.abs() < chi {
            let z = d / chi;
            out.push(StationaryState::from_z(z, 0.0, energy(z, 0.0)));
        }
    } else if chi == 0.0 {
        let r = d.hypot(k);
        out.push(StationaryState::from_z(-d / r, -alpha, -0.5 * r));
        out.push(StationaryState::from_z(d / r, std::f64::consts::PI - alpha, 0.5 * r));
    } else {
        for c in [1.0, -1.0] {
            let theta = if c > 0.0 { -alpha } else { std::f64::consts::PI - alpha };
            let h = |u: f64| d * u.cos() - chi * u.sin() * u.cos() + c * k * u.sin();
            for u in bracket_roots(h, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 4096) {
                let z = u.sin();
                out.push(StationaryState::from_z(z, theta, energy(z, c)));
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut dedup: Vec<StationaryState> = Vec::with_capacity(out.len());
    for s in out {
        let dup = dedup.iter().any(|q| {
            let ov = q.a1.conj() * s.a1 + q.a2.conj() * s.a2;
            (1.0 - ov.norm()).abs() < 1e-12 && (q.energy - s.energy).abs() < 1e-6
        });
        if !dup {
            dedup.push(s);
        }
    }
    if dedup.len() < 2 {
        return Err(EffectiveError::Partial { found: dedup });
    }
    Ok(dedup)
}

/// Sign changes of `h` on a uniform grid, refined by bisection.
fn bracket_roots(h: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    for i in 0..=n {
        if hs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i < n && hs[i] * hs[i + 1] < 0.0 {
            let (mut a, mut b, mut ha) = (xs[i], xs[i + 1], hs[i]);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let hm = h(m);
                if hm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (hm < 0.0) == (ha < 0.0) {
                    a = m;
                    ha = hm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    fn drive(x: f64, f: f64, phi: f64) -> DriveParams {
        DriveParams::from_scaled(x, f, 10.0, phi).unwrap()
    }

    // mean over one period by the trapezoid rule
    fn mean_f(p: &DriveParams, n: usize) -> C64 {
        (0..n).map(|k| f_tau(TAU * k as f64 / n as f64, p)).sum::<C64>() / n as f64
    }

    // i · (zero-mean antiderivative of F − F̄) by cumulative Simpson on even nodes
    fn phi_oracle(p: &DriveParams, n: usize) -> Vec<(f64, C64)> {
        let h = TAU / n as f64;
        let fbar = mean_f(p, n);
        let g = |k: usize| f_tau(h * k as f64, p) - fbar;
        let mut vals = vec![(0.0, C64::new(0.0, 0.0))];
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..n).step_by(2) {
            acc += (g(k) + g(k + 1) * 4.0 + g(k + 2)) * (h / 3.0);
            vals.push((h * (k + 2) as f64, acc));
        }
        vals.pop();
        let mean = vals.iter().map(|v| v.1).sum::<C64>() / vals.len() as f64;
        vals.into_iter().map(|(t, v)| (t, (v - mean) * C64::new(0.0, 1.0))).collect()
    }

    #[test]
    fn f_bar_limits() {
        assert_abs_diff_eq!(f_bar(&drive(0.0, 0.25, 0.3)).re, 1.0, epsilon = 1e-15);
        for x in [0.5, 2.4, 7.0] {
            let v = f_bar(&drive(x, 0.0, 1.0));
            assert_abs_diff_eq!(v.re, bessel_j(0, x), epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn f_bar_matches_time_average() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..30 {
            let p = drive(rng.gen_range(0.0..10.0), rng.gen_range(0.0..0.5), rng.gen_range(-PI..PI));
            assert!((f_bar(&p) - mean_f(&p, 512)).norm() < 1e-8);
        }
    }

    fn sign_changes(phi: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        let mut prev = f_bar(&drive(0.0, 0.25, phi)).re;
        for i in 1..=1000 {
            let x = i as f64 * 0.01;
            let cur = f_bar(&drive(x, 0.25, phi)).re;
            if prev * cur < 0.0 {
                roots.push(x);
            }
            prev = cur;
        }
        roots
    }

    #[test]
    fn coupling_zeros_for_symmetric_phase() {
        let r = sign_changes(FRAC_PI_2);
        assert_eq!(r.len(), 3, "{r:?}");
        for (got, want) in r.iter().zip([2.4, 5.4, 8.4]) {
            assert!((got - want).abs() < 0.1, "{got} vs {want}");
        }
        for i in 0..=1000 {
            let v = f_bar(&drive(i as f64 * 0.01, 0.25, FRAC_PI_2));
            assert!(v.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn coupling_never_vanishes_for_antisymmetric_drive() {
        for i in 0..=1000 {
            let v = f_bar(&drive(i as f64 * 0.01, 0.25, 0.0));
            assert!(v.norm() > 0.05);
        }
        assert!(f_bar(&drive(2.4, 0.25, 0.0)).im.abs() > 1e-6);
    }

    #[test]
    fn phi_vanishes_without_drive() {
        for tau in [0.0, 0.7, 3.0] {
            assert_eq!(phi_correction(tau, &drive(0.0, 0.25, 0.4)), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn phi_matches_quadrature() {
        let p = drive(1.3, 0.25, 0.7);
        let oracle = phi_oracle(&p, 4096);
        let mut mean = C64::new(0.0, 0.0);
        for (tau, want) in oracle.iter().step_by(16) {
            let got = phi_correction(*tau, &p);
            assert!((got - want).norm() < 1e-8, "τ={tau}: {got} vs {want}");
        }
        for k in 0..256 {
            mean += phi_correction(TAU * k as f64 / 256.0, &p);
        }
        assert!(mean.norm() / 256.0 < 1e-12);
    }

    #[test]
    fn delta_matches_quadrature() {
        let p = drive(2.4, 0.25, 0.9);
        let oracle = phi_oracle(&p, 4096);
        let n = oracle.len();
        let want = oracle.iter().map(|(t, ph)| f_tau(*t, &p) * ph.conj()).sum::<C64>() / n as f64;
        let got = delta_bias_complex(&p);
        assert!((got - want).norm() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn dft_check_agrees_with_series() {
        for (x, phi) in [(0.7, 0.3), (2.4, FRAC_PI_2), (4.1, -2.0)] {
            let p = drive(x, 0.25, phi);
            let (fb, d) = quadrature_check(&p, 256);
            assert!((fb - f_bar(&p)).norm() < 1e-13);
            assert!((d - delta_bias(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_reduced_matches_full_sum() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let p = drive(rng.gen_range(0.0..10.0), rng.gen_range(0.0..0.5), rng.gen_range(-PI..PI));
            let a = delta_bias_complex(&p);
            let b = delta_bias_full(&p);
            assert!((a - b).norm() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn delta_symmetries() {
        for x in [0.5, 2.4, 6.0] {
            assert!(delta_bias(&drive(x, 0.25, 0.0)).abs() <= 1e-12);
            assert!(delta_bias(&drive(x, 0.0, 1.1)).abs() <= 1e-12);
        }
        let a = delta_bias(&drive(2.4, 0.25, 0.8));
        let b = delta_bias(&drive(2.4, 0.25, -0.8));
        assert!(a.abs() > 1e-3);
        assert!((a + b).abs() <= 1e-12);
    }

    #[test]
    fn delta_extremal_at_quarter_phases() {
        let n = 128;
        let vals: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let phi = -PI + TAU * k as f64 / n as f64;
                (phi, delta_bias(&drive(2.4, 0.25, phi)))
            })
            .collect();
        let max = vals.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let min = vals.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let step = TAU / n as f64;
        assert!((max.0.abs() - FRAC_PI_2).abs() <= step + 1e-12, "max at {}", max.0);
        assert!((min.0.abs() - FRAC_PI_2).abs() <= step + 1e-12, "min at {}", min.0);
    }

    #[test]
    fn doubling_cutoffs_is_stable() {
        let p = drive(9.5, 0.5, 0.6);
        let t = tables(&p);
        let mm = t.cut.m as i64;
        let big = Tables {
            jx: BesselTable::new(4 * (t.cut.total + 2 * t.cut.m + 2), p.a_over_omega()),
            jy: BesselTable::new(2 * t.cut.m, t.jy.argument()),
            cut: Cutoffs { m: 2 * t.cut.m, total: 2 * t.cut.total },
        };
        for k in -(mm)..=mm {
            assert!((f_coeff(&t, k, p.phase()) - f_coeff(&big, k, p.phase())).norm() <= 1e-13);
        }
    }

    fn ep(v: C64, d: f64, chi: f64) -> EffectiveParams {
        EffectiveParams { v_eff: v, delta_eff: d, chi, epsilon_small: 0.1, series_cutoff: 40 }
    }

    #[test]
    fn rhs_trivial_cases() {
        let e = ep(C64::new(0.3, 0.1), 0.02, 0.4);
        let z = C64::new(0.0, 0.0);
        assert_eq!(effective_rhs(z, z, &e), (z, z));
        let free = ep(z, 0.0, 0.0);
        assert_eq!(effective_rhs(C64::new(0.6, 0.1), C64::new(0.2, -0.7), &free), (z, z));
    }

    #[test]
    fn rhs_conserves_norm() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..100 {
            let e = ep(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rng.gen_range(-0.1..0.1), rng.gen_range(0.0..1.0));
            let a1 = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let a2 = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (d1, d2) = effective_rhs(a1, a2, &e);
            let dn = 2.0 * (a1.conj() * d1 + a2.conj() * d2).re;
            assert!(dn.abs() <= 1e-14);
        }
    }

    fn stationary_residual(s: &StationaryState, e: &EffectiveParams) -> f64 {
        let (d1, d2) = effective_rhs(s.a1, s.a2, e);
        // stationary: dA/dt = -i E A
        let mi = C64::new(0.0, -1.0);
        (d1 - mi * s.energy * s.a1).norm() + (d2 - mi * s.energy * s.a2).norm()
    }

    #[test]
    fn linear_eigenpairs() {
        let e = ep(C64::new(1.0, 0.0), 0.0, 0.0);
        let s = effective_stationary_states(&e).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s[0].energy, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1].energy, 0.5, epsilon = 1e-15);
        assert!(s.iter().all(|x| x.imbalance().abs() < 1e-15));

        let e = ep(C64::new(0.0, 0.0), 0.02, 0.0);
        let s = effective_stationary_states(&e).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s[0].energy, -0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1].energy, 0.01, epsilon = 1e-15);
        assert!(s.iter().all(|x| x.imbalance().abs() == 1.0));

        let e = ep(C64::new(0.3, -0.2), 0.07, 0.0);
        let s = effective_stationary_states(&e).unwrap();
        let [lo, hi] = e.linear_energies();
        assert_abs_diff_eq!(s[0].energy, lo, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1].energy, hi, epsilon = 1e-15);
        assert!(s.iter().all(|x| stationary_residual(x, &e) < 1e-14));
    }

    #[test]
    fn degenerate_localized_pair_for_antisymmetric_drive() {
        let sys = SystemParams::new(1.0, 0.4, drive(2.4, 0.25, 0.0)).unwrap();
        let e = EffectiveParams::from_system(&sys);
        assert!(e.delta_eff.abs() < 1e-12);
        let s = effective_stationary_states(&e).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|x| stationary_residual(x, &e) < 1e-12));
        assert_abs_diff_eq!(s[0].energy, s[1].energy, epsilon = 1e-12);
        let p = s[0].imbalance();
        assert!(p.abs() > 0.5);
        assert_abs_diff_eq!(p, -s[1].imbalance(), epsilon = 1e-12);
    }

    #[test]
    fn bias_flip_swaps_modes() {
        for chi in [0.0, 0.1, 0.4] {
            let a = effective_stationary_states(&ep(C64::new(0.13, 0.0), 0.03, chi)).unwrap();
            let b = effective_stationary_states(&ep(C64::new(0.13, 0.0), -0.03, chi)).unwrap();
            assert_eq!(a.len(), b.len());
            for s in &a {
                let hit = b.iter().any(|q| {
                    let ov = q.a1.conj() * s.a2 + q.a2.conj() * s.a1;
                    (q.energy - s.energy).abs() < 1e-12 && (ov.norm() - 1.0).abs() < 1e-10
                });
                assert!(hit, "no partner for {s:?}");
            }
        }
    }

    #[test]
    fn state_count_follows_bifurcation() {
        let sys = SystemParams::new(1.0, 0.0, drive(2.4, 0.25, FRAC_PI_4)).unwrap();
        for (chi, want) in [(0.0, 2), (0.4, 4)] {
            let e = EffectiveParams::from_system(&sys.with_chi(chi));
            let s = effective_stationary_states(&e).unwrap();
            assert_eq!(s.len(), want);
            assert!(s.iter().all(|x| stationary_residual(x, &e) < 1e-12));
        }
    }

    proptest! {
        #[test]
        fn stationary_states_are_fixed_points(
            re in -0.5..0.5f64, im in -0.5..0.5f64, d in -0.2..0.2f64, chi in 0.0..1.0f64,
        ) {
            let e = ep(C64::new(re, im), d, chi);
            let s = effective_stationary_states(&e).unwrap();
            prop_assert!((2..=4).contains(&s.len()) || e.v_eff.norm() == 0.0);
            for x in &s {
                prop_assert!(stationary_residual(x, &e) < 1e-10);
                prop_assert!((x.a1.norm_sqr() + x.a2.norm_sqr() - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn delta_is_odd_in_phase(x in 0.0..10.0f64, f in 0.0..0.5f64, phi in -PI..PI) {
            let a = delta_bias_complex(&drive(x, f, phi));
            let b = delta_bias_complex(&drive(x, f, -phi));
            prop_assert!(a.im.abs() <= 1e-12);
            prop_assert!((a.re + b.re).abs() <= 1e-12);
        }
    }
}
