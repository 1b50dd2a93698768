//! Bessel functions of the first kind for integer order.
//!
//! Values are produced for a whole range of orders at once with Miller's
//! downward recurrence, normalized by `J_0 + 2 Σ_k J_{2k} = 1`. Relative
//! accuracy is close to machine precision for the arguments used in this
//! crate (|x| up to a few tens).

/// Table of `J_n(x)` for `n = 0..=max_order` at a fixed argument.
#[derive(Debug, Clone)]
pub struct BesselTable {
    x: f64,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn new(max_order: usize, x: f64) -> Self {
        Self { x, values: bessel_j_orders(max_order, x) }
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_n(x)` for any integer order; orders beyond the table are treated as
    /// zero, negative orders use `J_{-n} = (-1)^n J_n`.
    pub fn get(&self, n: i64) -> f64 {
        let k = n.unsigned_abs() as usize;
        if k >= self.values.len() {
            return 0.0;
        }
        let v = self.values[k];
        if n < 0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// `J_n(x)` for a single integer order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    BesselTable::new(n.unsigned_abs() as usize, x).get(n)
}

/// `J_0(x), ..., J_max(x)` by Miller's algorithm.
pub fn bessel_j_orders(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let reach = (max_order as f64).max(ax);
    let mut start = (reach + 30.0 + (60.0 * reach).sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    const BIG: f64 = 1e250;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-280; // J_k
    let mut norm = 0.0;
    let mut k = start;
    loop {
        if k <= max_order {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == 0 {
            break;
        }
        let prev = (2.0 * k as f64 / ax) * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > BIG {
            cur /= BIG;
            next /= BIG;
            norm /= BIG;
            for v in out.iter_mut().skip(k + 1) {
                *v /= BIG;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}
