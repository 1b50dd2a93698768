use num_complex::Complex64 as C64;

use super::FloquetError;

/// A nonlinear Floquet state `c̃(t) = Σ_n (a_n, b_n) e^{inωt}` with its
/// quasienergy.
///
/// Coefficients are stored for `n = -N..=N`, index `n + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetState {
    pub quasienergy: f64,
    pub coeffs_a: Vec<C64>,
    pub coeffs_b: Vec<C64>,
    pub cutoff: usize,
    pub residual_norm: f64,
}

impl FloquetState {
    pub fn new(quasienergy: f64, coeffs_a: Vec<C64>, coeffs_b: Vec<C64>) -> Result<Self, FloquetError> {
        let len = coeffs_a.len();
        if len % 2 == 0 || len < 3 || coeffs_b.len() != len {
            return Err(FloquetError::Precondition(format!(
                "coefficient vectors must share an odd length >= 3 (got {} and {})",
                coeffs_a.len(),
                coeffs_b.len()
            )));
        }
        Ok(Self { quasienergy, coeffs_a, coeffs_b, cutoff: (len - 1) / 2, residual_norm: f64::NAN })
    }

    /// State with only the `n = 0` harmonic populated.
    pub fn from_amplitudes(cutoff: usize, quasienergy: f64, a0: C64, b0: C64) -> Self {
        let dim = 2 * cutoff + 1;
        let mut a = vec![C64::new(0.0, 0.0); dim];
        let mut b = a.clone();
        a[cutoff] = a0;
        b[cutoff] = b0;
        let mut s = Self { quasienergy, coeffs_a: a, coeffs_b: b, cutoff, residual_norm: f64::NAN };
        s.normalize();
        s
    }

    pub(crate) fn from_vector(quasienergy: f64, x: &[C64], cutoff: usize) -> Self {
        let dim = 2 * cutoff + 1;
        Self {
            quasienergy,
            coeffs_a: x[..dim].to_vec(),
            coeffs_b: x[dim..2 * dim].to_vec(),
            cutoff,
            residual_norm: f64::NAN,
        }
    }

    pub(crate) fn to_vector(&self) -> Vec<C64> {
        let mut x = self.coeffs_a.clone();
        x.extend_from_slice(&self.coeffs_b);
        x
    }

    pub fn dim(&self) -> usize {
        self.coeffs_a.len()
    }

    /// `a_n` for any harmonic index (zero outside the truncation).
    pub fn a(&self, n: i64) -> C64 {
        coeff(&self.coeffs_a, self.cutoff, n)
    }

    pub fn b(&self, n: i64) -> C64 {
        coeff(&self.coeffs_b, self.cutoff, n)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs_a.iter().chain(&self.coeffs_b).map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for c in self.coeffs_a.iter_mut().chain(self.coeffs_b.iter_mut()) {
                *c /= n;
            }
        }
    }

    /// Fraction of the norm carried by the outermost harmonics `n = ±N`.
    pub fn outer_shell_weight(&self) -> f64 {
        let last = self.dim() - 1;
        let w = self.coeffs_a[0].norm_sqr()
            + self.coeffs_a[last].norm_sqr()
            + self.coeffs_b[0].norm_sqr()
            + self.coeffs_b[last].norm_sqr();
        w / self.norm_sqr()
    }

    /// Rotate the global phase so the largest-magnitude coefficient is real
    /// and positive.
    pub fn fix_gauge(&mut self) {
        let mut best = C64::new(0.0, 0.0);
        for c in self.coeffs_a.iter().chain(&self.coeffs_b) {
            if c.norm_sqr() > best.norm_sqr() * (1.0 + 1e-12) {
                best = *c;
            }
        }
        if best.norm() == 0.0 {
            return;
        }
        let rot = best.conj() / best.norm();
        for c in self.coeffs_a.iter_mut().chain(self.coeffs_b.iter_mut()) {
            *c *= rot;
        }
    }

    /// Copy of the state re-expressed with a different cutoff (zero padding or
    /// truncation of the outer harmonics).
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let dim = 2 * cutoff + 1;
        let n = cutoff as i64;
        let a = (-n..=n).map(|k| self.a(k)).collect::<Vec<_>>();
        let b = (-n..=n).map(|k| self.b(k)).collect::<Vec<_>>();
        debug_assert_eq!(a.len(), dim);
        Self { quasienergy: self.quasienergy, coeffs_a: a, coeffs_b: b, cutoff, residual_norm: f64::NAN }
    }

    /// Shift all harmonics by `k`: `a'_n = a_{n+k}`.
    pub(crate) fn shift_harmonics(&mut self, k: i64) {
        if k == 0 {
            return;
        }
        let n = self.cutoff as i64;
        let a = (-n..=n).map(|j| self.a(j + k)).collect();
        let b = (-n..=n).map(|j| self.b(j + k)).collect();
        self.coeffs_a = a;
        self.coeffs_b = b;
    }

    /// `|⟨self|other⟩|` over the Fourier coefficients (phase independent).
    pub fn overlap(&self, other: &FloquetState) -> f64 {
        let n = self.cutoff.min(other.cutoff) as i64;
        let mut acc = C64::new(0.0, 0.0);
        for k in -n..=n {
            acc += self.a(k).conj() * other.a(k) + self.b(k).conj() * other.b(k);
        }
        acc.norm() / (self.norm_sqr() * other.norm_sqr()).sqrt()
    }

    /// Evaluate the periodic part `(c̃₁(t), c̃₂(t))` at `t`.
    pub fn evaluate(&self, omega: f64, t: f64) -> (C64, C64) {
        let n = self.cutoff as i64;
        let mut c1 = C64::new(0.0, 0.0);
        let mut c2 = C64::new(0.0, 0.0);
        for k in -n..=n {
            let e = C64::from_polar(1.0, k as f64 * omega * t);
            c1 += self.a(k) * e;
            c2 += self.b(k) * e;
        }
        (c1, c2)
    }
}

fn coeff(v: &[C64], cutoff: usize, n: i64) -> C64 {
    let idx = n + cutoff as i64;
    if idx < 0 || idx as usize >= v.len() {
        C64::new(0.0, 0.0)
    } else {
        v[idx as usize]
    }
}

/// Period-averaged `⟨⟨σz⟩⟩ = Σ_n (|a_n|² − |b_n|²)`.
pub fn population_imbalance(s: &FloquetState) -> f64 {
    let pa: f64 = s.coeffs_a.iter().map(|c| c.norm_sqr()).sum();
    let pb: f64 = s.coeffs_b.iter().map(|c| c.norm_sqr()).sum();
    (pa - pb) / (pa + pb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    First,
    Second,
}

impl TryFrom<u8> for Mode {
    type Error = FloquetError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Mode::First),
            2 => Ok(Mode::Second),
            _ => Err(FloquetError::Precondition(format!("mode must be 1 or 2, got {v}"))),
        }
    }
}

/// Cycle-averaged population `⟨|c_mode|²⟩` of a normalized state.
pub fn cycle_averaged_population(s: &FloquetState, mode: Mode) -> f64 {
    let coeffs = match mode {
        Mode::First => &s.coeffs_a,
        Mode::Second => &s.coeffs_b,
    };
    coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / s.norm_sqr()
}
