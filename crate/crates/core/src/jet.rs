//! Second-order local Taylor data of a real function of the four
//! coordinates at one point: value, gradient and Hessian.
//!
//! The inverse metric, Christoffel symbols and spin connection are rational
//! in the tetrad, so they have no polynomial representation. They are instead
//! carried as jets seeded from exact polynomial derivatives; arithmetic on
//! jets applies the product and quotient rules exactly, with the order
//! dropping by one every time a derivative is taken.

use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{inverse4, DIM};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: u8,
    v: f64,
    d: [f64; DIM],
    dd: [[f64; DIM]; DIM],
}

impl Jet {
    pub fn new(order: u8, v: f64, d: [f64; DIM], dd: [[f64; DIM]; DIM]) -> Self {
        assert!(order <= 2, "jets carry at most second derivatives");
        let mut j = Jet { order, v, d, dd };
        j.clear_above_order();
        j
    }

    pub fn constant(v: f64, order: u8) -> Self {
        Jet::new(order, v, [0.0; DIM], [[0.0; DIM]; DIM])
    }

    pub fn zero(order: u8) -> Self {
        Jet::constant(0.0, order)
    }

    fn clear_above_order(&mut self) {
        if self.order < 2 {
            self.dd = [[0.0; DIM]; DIM];
        }
        if self.order < 1 {
            self.d = [0.0; DIM];
        }
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.v
    }

    pub fn grad(&self, b: usize) -> f64 {
        debug_assert!(self.order >= 1);
        self.d[b]
    }

    pub fn hess(&self, b: usize, c: usize) -> f64 {
        debug_assert!(self.order >= 2);
        self.dd[b][c]
    }

    /// `∂_k` of this jet, one order lower.
    pub fn derivative(&self, k: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        Jet::new(self.order - 1, self.d[k], self.dd[k], [[0.0; DIM]; DIM])
    }

    pub fn truncate(&self, order: u8) -> Jet {
        Jet::new(order.min(self.order), self.v, self.d, self.dd)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            order: self.order,
            v: self.v * s,
            d: self.d.map(|x| x * s),
            dd: self.dd.map(|r| r.map(|x| x * s)),
        }
    }

    pub fn recip(&self) -> Jet {
        let inv = 1.0 / self.v;
        let d = self.d.map(|x| -x * inv * inv);
        let dd = std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                -self.dd[b][c] * inv * inv + 2.0 * self.d[b] * self.d[c] * inv * inv * inv
            })
        });
        Jet::new(self.order, inv, d, dd)
    }

    /// Square root; the value must be positive.
    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        let d = self.d.map(|x| x / (2.0 * s));
        let dd = std::array::from_fn(|b| {
            std::array::from_fn(|c| self.dd[b][c] / (2.0 * s) - self.d[b] * self.d[c] / (4.0 * s * s * s))
        });
        Jet::new(self.order, s, d, dd)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        Jet::new(
            order,
            self.v + o.v,
            std::array::from_fn(|b| self.d[b] + o.d[b]),
            std::array::from_fn(|b| std::array::from_fn(|c| self.dd[b][c] + o.dd[b][c])),
        )
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let d = std::array::from_fn(|b| self.d[b] * o.v + self.v * o.d[b]);
        let dd = std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                self.dd[b][c] * o.v + self.d[b] * o.d[c] + self.d[c] * o.d[b] + self.v * o.dd[b][c]
            })
        });
        Jet::new(order, self.v * o.v, d, dd)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::zero(2), |a, b| a + b)
    }
}

/// A 4×4 matrix of jets.
pub type JetMatrix = [[Jet; DIM]; DIM];

pub fn values(m: &JetMatrix) -> [[f64; DIM]; DIM] {
    m.map(|r| r.map(|j| j.v))
}

/// Inverse of a matrix-valued jet, exact through the order of the input:
/// `∂N = -N ∂M N` and
/// `∂∂N = -N ∂∂M N + N ∂M N ∂M N + N ∂M N ∂M N` (both orderings).
pub fn invert(m: &JetMatrix) -> Option<JetMatrix> {
    let order = m.iter().flatten().map(|j| j.order).min().unwrap_or(0);
    let n = inverse4(&values(m))?;
    let mm = |x: &[[f64; DIM]; DIM], y: &[[f64; DIM]; DIM]| -> [[f64; DIM]; DIM] {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..DIM).map(|k| x[i][k] * y[k][j]).sum()))
    };
    let first: [[[f64; DIM]; DIM]; DIM] =
        std::array::from_fn(|b| std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].d[b])));
    // N ∂_b M N
    let nmn: [[[f64; DIM]; DIM]; DIM] = std::array::from_fn(|b| mm(&mm(&n, &first[b]), &n));
    let mut out = [[Jet::zero(order); DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            let d = std::array::from_fn(|b| -nmn[b][i][j]);
            out[i][j] = Jet::new(order, n[i][j], d, [[0.0; DIM]; DIM]);
        }
    }
    if order >= 2 {
        for b in 0..DIM {
            for c in 0..DIM {
                let second: [[f64; DIM]; DIM] = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].dd[b][c]));
                let t1 = mm(&mm(&n, &second), &n);
                let t2 = mm(&nmn[b], &mm(&first[c], &n));
                let t3 = mm(&nmn[c], &mm(&first[b], &n));
                for i in 0..DIM {
                    for j in 0..DIM {
                        out[i][j].dd[b][c] = -t1[i][j] + t2[i][j] + t3[i][j];
                    }
                }
            }
        }
    }
    Some(out)
}
