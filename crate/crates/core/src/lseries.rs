//! Truncated power series in the length parameter ℓ.
//!
//! The grading is in ℓ itself, not ℓ², so odd coefficients are stored and
//! their vanishing can be checked rather than assumed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, Coefficient, TraceProduct};

pub const DEFAULT_ORDER: usize = 4;

/// `Σ_{n=0}^{K} c_n ℓ^n`; coefficients above `K` are never read or written.
#[derive(Clone, Debug, PartialEq)]
pub struct LSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coefficient> LSeries<C> {
    /// A series whose only nonzero coefficient is `c` at order 0.
    pub fn constant(c: C, order: usize) -> Self {
        let z = c.zero_like();
        let mut coeffs = vec![z; order + 1];
        coeffs[0] = c;
        LSeries { coeffs }
    }

    /// `c ℓ^power`, or zero when `power > order`.
    pub fn monomial(c: C, power: usize, order: usize) -> Self {
        let z = c.zero_like();
        let mut coeffs = vec![z; order + 1];
        if power <= order {
            coeffs[power] = c;
        }
        LSeries { coeffs }
    }

    pub fn zero_like(template: &C, order: usize) -> Self {
        LSeries { coeffs: vec![template.zero_like(); order + 1] }
    }

    pub fn from_coeffs(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Shape("a series needs at least its order-0 coefficient".into()));
        }
        Ok(LSeries { coeffs })
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &C {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::Shape(format!(
                "truncation orders differ: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<_>>()?;
        Ok(LSeries { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        LSeries { coeffs: self.coeffs.iter().map(|c| c.scale(z)).collect() }
    }

    /// Multiplies by `ℓ^k`, dropping whatever moves past the truncation order.
    pub fn shift(&self, k: usize) -> Self {
        let z = self.coeffs[0].zero_like();
        let mut coeffs = vec![z; self.coeffs.len()];
        for n in 0..self.coeffs.len() {
            if n + k < coeffs.len() {
                coeffs[n + k] = self.coeffs[n].clone();
            }
        }
        LSeries { coeffs }
    }

    /// Applies `f` to every coefficient.
    pub fn try_map<D: Coefficient>(&self, f: impl Fn(&C) -> Result<D>) -> Result<LSeries<D>> {
        Ok(LSeries { coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()? })
    }

    /// Cauchy product truncated at the common order. Coefficient products keep
    /// their left-right order, so matrix-valued series multiply correctly.
    pub fn series_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let k = self.order();
        let mut coeffs: Vec<Option<C>> = vec![None; k + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(k + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                let p = a.try_mul(b)?;
                coeffs[i + j] = Some(match coeffs[i + j].take() {
                    None => p,
                    Some(acc) => acc.try_add(&p)?,
                });
            }
        }
        let zero = match coeffs.iter().flatten().next() {
            Some(c) => c.zero_like(),
            None => self.coeffs[0].try_mul(&other.coeffs[0])?.zero_like(),
        };
        Ok(LSeries { coeffs: coeffs.into_iter().map(|c| c.unwrap_or_else(|| zero.clone())).collect() })
    }

    /// Largest coefficient magnitude at each order.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(Coefficient::max_abs).collect()
    }
}

impl<C: Coefficient> Coefficient for LSeries<C> {
    fn zero_like(&self) -> Self {
        LSeries { coeffs: self.coeffs.iter().map(Coefficient::zero_like).collect() }
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        self.series_mul(other)
    }
    fn scale(&self, z: Complex64) -> Self {
        LSeries::scale(self, z)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coefficient::is_zero)
    }
    fn max_abs(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }
    fn describe_shape(&self) -> String {
        format!("series to order {} of {}", self.order(), self.coeffs[0].describe_shape())
    }
}

impl TraceProduct for LSeries<CMat> {
    type Scalar = LSeries<Complex64>;
    fn trace_of_product(&self, other: &Self) -> Result<LSeries<Complex64>> {
        self.check_order(other)?;
        let k = self.order();
        let mut out = vec![Complex64::new(0.0, 0.0); k + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(k + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out[i + j] += a.trace_of_product(b)?;
            }
        }
        Ok(LSeries { coeffs: out })
    }
}

impl LSeries<CMat> {
    pub fn trace(&self) -> LSeries<Complex64> {
        LSeries { coeffs: self.coeffs.iter().map(CMat::trace).collect() }
    }
}

impl LSeries<Complex64> {
    /// Evaluates the truncated polynomial at a numeric ℓ.
    pub fn evaluate(&self, ell: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * ell + c)
    }

    /// Square root `S` with `S·S = A` through the truncation order.
    ///
    /// The leading coefficient must be real and positive (its imaginary part
    /// may only carry rounding noise, at most `1e-12` of the real part).
    pub fn series_sqrt(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if !(a0.re > 0.0) || a0.im.abs() > 1e-12 * a0.re {
            return Err(Error::NonPositiveLeading(format!("{a0}")));
        }
        let s0 = Complex64::new(a0.re.sqrt(), 0.0);
        let mut s = vec![s0];
        for n in 1..self.coeffs.len() {
            let mut acc = self.coeffs[n];
            for i in 1..n {
                acc -= s[i] * s[n - i];
            }
            s.push(acc / (s0 * 2.0));
        }
        Ok(LSeries { coeffs: s })
    }
}

impl LSeries<f64> {
    pub fn evaluate(&self, ell: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * ell + c)
    }

    /// Real-coefficient counterpart of [`LSeries::<Complex64>::series_sqrt`].
    pub fn series_sqrt(&self) -> Result<Self> {
        let complex = LSeries { coeffs: self.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect() };
        let s = complex.series_sqrt()?;
        Ok(LSeries { coeffs: s.coeffs.iter().map(|c| c.re).collect() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(coeffs: &[f64]) -> LSeries<f64> {
        LSeries::from_coeffs(coeffs.to_vec()).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let a = 0.7;
        let p = real(&[1.0, a, 0.0, 0.0, 0.0]);
        let m = real(&[1.0, -a, 0.0, 0.0, 0.0]);
        let prod = p.series_mul(&m).unwrap();
        assert_eq!(prod.coeffs(), &[1.0, 0.0, -a * a, 0.0, 0.0]);
    }

    #[test]
    fn unit_series_is_identity() {
        let x = real(&[0.3, -1.2, 2.0, 0.5, 4.0]);
        let one = LSeries::constant(1.0, 4);
        assert_eq!(x.series_mul(&one).unwrap(), x);
        assert_eq!(one.series_mul(&x).unwrap(), x);
        assert_eq!(one.series_sqrt().unwrap(), one);
    }

    #[test]
    fn truncation_never_exceeds_order() {
        let x = real(&[0.0, 0.0, 0.0, 1.0, 0.0]);
        let sq = x.series_mul(&x).unwrap();
        assert_eq!(sq.order(), 4);
        assert!(sq.coeffs().iter().all(|&c| c == 0.0));
        assert_eq!(x.shift(2).coeffs(), &[0.0; 5]);
    }

    #[test]
    fn binomial_square_root() {
        // sqrt(1 + ℓ²u) = 1 + ½uℓ² - ⅛u²ℓ⁴ + O(ℓ⁶)
        let u = 0.37;
        let s = real(&[1.0, 0.0, u, 0.0, 0.0]).series_sqrt().unwrap();
        let binom = [1.0, 0.0, 0.5 * u, 0.0, -0.125 * u * u];
        for (got, want) in s.coeffs().iter().zip(binom) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn sqrt_rejects_nonpositive_leading() {
        assert!(real(&[0.0, 1.0]).series_sqrt().is_err());
        assert!(real(&[-1.0, 1.0]).series_sqrt().is_err());
        let c = LSeries::from_coeffs(vec![Complex64::new(1.0, 0.5)]).unwrap();
        assert!(c.series_sqrt().is_err());
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = real(&[1.0, 2.0]);
        let b = real(&[1.0, 2.0, 3.0]);
        assert!(a.series_mul(&b).is_err());
    }

    #[test]
    fn matrix_series_keep_product_order() {
        let s = crate::linalg::pauli();
        let a = LSeries::from_coeffs(vec![s[0].clone(), s[1].clone()]).unwrap();
        let b = LSeries::from_coeffs(vec![s[1].clone(), s[0].clone()]).unwrap();
        let ab = a.series_mul(&b).unwrap();
        assert_eq!(ab.coeff(0), &(&s[0] * &s[1]));
        // ℓ¹: σ1σ1 + σ2σ2 = 2
        assert_eq!(ab.coeff(1), &CMat::scalar(2, Complex64::new(2.0, 0.0)));
    }

    /// Numeric-evaluation oracle: evaluate both factors at small ℓ and compare
    /// with the truncated product. The mismatch must scale like ℓ^{K+1}.
    #[test]
    fn product_matches_numeric_evaluation() {
        let a = real(&[0.8, -0.3, 1.1, 0.4, -0.9]);
        let b = real(&[1.3, 0.7, -0.2, 0.5, 0.25]);
        let p = a.series_mul(&b).unwrap();
        let mut prev = None;
        for ell in [1e-2, 5e-3, 2.5e-3] {
            let resid = (a.evaluate(ell) * b.evaluate(ell) - p.evaluate(ell)).abs();
            if let Some(r) = prev {
                let ratio: f64 = r / resid;
                // 2^5 = 32 for an O(ℓ⁵) remainder.
                assert!(ratio > 28.0 && ratio < 36.0, "ratio {ratio}");
            }
            prev = Some(resid);
        }
    }

    fn arb_series(positive: bool) -> impl Strategy<Value = LSeries<f64>> {
        prop::collection::vec(-2.0f64..2.0, 5).prop_map(move |mut c| {
            if positive {
                c[0] = c[0].abs() + 0.5;
            }
            LSeries::from_coeffs(c).unwrap()
        })
    }

    proptest! {
        #[test]
        fn associativity(a in arb_series(false), b in arb_series(false), c in arb_series(false)) {
            let l = a.series_mul(&b).unwrap().series_mul(&c).unwrap();
            let r = a.series_mul(&b.series_mul(&c).unwrap()).unwrap();
            for (x, y) in l.coeffs().iter().zip(r.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }

        #[test]
        fn distributivity(a in arb_series(false), b in arb_series(false), c in arb_series(false)) {
            let l = a.series_mul(&b.add(&c).unwrap()).unwrap();
            let r = a.series_mul(&b).unwrap().add(&a.series_mul(&c).unwrap()).unwrap();
            for (x, y) in l.coeffs().iter().zip(r.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }

        #[test]
        fn sqrt_squares_back(a in arb_series(true)) {
            let s = a.series_sqrt().unwrap();
            let back = s.series_mul(&s).unwrap();
            for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
                prop_assert!((x - y).abs() < 1e-11);
            }
        }

        #[test]
        fn sqrt_of_square_is_identity(a in arb_series(true)) {
            let sq = a.series_mul(&a).unwrap();
            let s = sq.series_sqrt().unwrap();
            for (x, y) in s.coeffs().iter().zip(a.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-11 * y.abs().max(1.0));
            }
        }
    }
}
