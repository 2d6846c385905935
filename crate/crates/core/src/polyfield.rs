//! Exact polynomial fields on the four coordinates `x^0..x^3`.
//!
//! Every coordinate-dependent input (tetrads, gauge potentials, test spinors
//! and scalars) is a polynomial with complex scalar, vector or matrix
//! coefficients, so partial derivatives are exact. Products that would push
//! a term past the configured maximum degree are an error rather than being
//! silently dropped.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{CMat, Coefficient, DIM};

pub const DEFAULT_MAX_DEGREE: u32 = 3;

/// Exponents of `x^0, x^1, x^2, x^3` in a monomial.
pub type Exponent = [u8; DIM];

pub fn total_degree(e: &Exponent) -> u32 {
    e.iter().map(|&k| u32::from(k)).sum()
}

/// All exponents of total degree at most `deg`, in lexicographic order.
pub fn exponents_up_to(deg: u32) -> Vec<Exponent> {
    let d = deg as u8;
    let mut out = Vec::new();
    for a in 0..=d {
        for b in 0..=d - a {
            for c in 0..=d - a - b {
                for e in 0..=d - a - b - c {
                    out.push([a, b, c, e]);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Scalar,
    Vector(usize),
    Matrix(usize),
}

impl Shape {
    pub fn len(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector(n) => n,
            Shape::Matrix(n) => n * n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

/// One serialized monomial term of a scalar polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub pow: Exponent,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyField {
    shape: Shape,
    max_degree: u32,
    terms: BTreeMap<Exponent, Vec<Complex64>>,
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn block_is_zero(b: &[Complex64]) -> bool {
    b.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

impl PolyField {
    pub fn zero(shape: Shape) -> Self {
        PolyField { shape, max_degree: DEFAULT_MAX_DEGREE, terms: BTreeMap::new() }
    }

    pub fn constant(shape: Shape, block: Vec<Complex64>) -> Result<Self> {
        if block.len() != shape.len() {
            return Err(Error::Shape(format!(
                "constant block of length {} for shape {:?}",
                block.len(),
                shape
            )));
        }
        let mut f = Self::zero(shape);
        if !block_is_zero(&block) {
            f.terms.insert([0; DIM], block);
        }
        Ok(f)
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::constant(Shape::Scalar, vec![c]).expect("scalar shape")
    }

    pub fn real(c: f64) -> Self {
        Self::scalar(Complex64::new(c, 0.0))
    }

    pub fn matrix_const(m: &CMat) -> Self {
        Self::constant(Shape::Matrix(m.dim()), m.as_slice().to_vec()).expect("matrix shape")
    }

    pub fn vector_const(v: &[Complex64]) -> Self {
        Self::constant(Shape::Vector(v.len()), v.to_vec()).expect("vector shape")
    }

    /// The coordinate function `x^a`.
    pub fn coordinate(a: usize) -> Self {
        let mut e = [0; DIM];
        e[a] = 1;
        Self::monomial(e, Complex64::new(1.0, 0.0))
    }

    /// A scalar monomial `c · x^e`. Its degree must fit the default bound;
    /// raise the bound with [`PolyField::with_max_degree`] before building
    /// higher-degree fields by multiplication.
    pub fn monomial(e: Exponent, c: Complex64) -> Self {
        let mut f = Self::zero(Shape::Scalar);
        f.max_degree = f.max_degree.max(total_degree(&e));
        if c.re != 0.0 || c.im != 0.0 {
            f.terms.insert(e, vec![c]);
        }
        f
    }

    pub fn from_terms(terms: &[PolyTerm]) -> Self {
        let mut f = Self::zero(Shape::Scalar);
        for t in terms {
            f.max_degree = f.max_degree.max(total_degree(&t.pow));
            let entry = f.terms.entry(t.pow).or_insert_with(|| vec![czero()]);
            entry[0] += Complex64::new(t.re, t.im);
        }
        f.prune();
        f
    }

    /// Serializable term list of a scalar field.
    pub fn to_terms(&self) -> Result<Vec<PolyTerm>> {
        if self.shape != Shape::Scalar {
            return Err(Error::Shape("only scalar fields serialize to term lists".into()));
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, b)| PolyTerm { pow: *e, re: b[0].re, im: b[0].im })
            .collect())
    }

    /// Scalar polynomial with coefficients uniform in `[-amplitude, amplitude]`
    /// on every monomial of degree `1..=degree`, plus `constant`.
    pub fn random_scalar(rng: &mut impl Rng, degree: u32, amplitude: f64, constant: f64) -> Self {
        let mut f = Self::real(constant).with_max_degree_unchecked(degree.max(DEFAULT_MAX_DEGREE));
        for e in exponents_up_to(degree) {
            if total_degree(&e) == 0 {
                continue;
            }
            let c = rng.gen_range(-amplitude..=amplitude);
            f.terms.insert(e, vec![Complex64::new(c, 0.0)]);
        }
        f.prune();
        f
    }

    /// Vector field whose components are complex random polynomials.
    pub fn random_vector(rng: &mut impl Rng, n: usize, degree: u32, amplitude: f64) -> Self {
        let mut f = Self::zero(Shape::Vector(n)).with_max_degree_unchecked(degree.max(DEFAULT_MAX_DEGREE));
        for e in exponents_up_to(degree) {
            let block: Vec<Complex64> = (0..n)
                .map(|_| {
                    Complex64::new(rng.gen_range(-amplitude..=amplitude), rng.gen_range(-amplitude..=amplitude))
                })
                .collect();
            f.terms.insert(e, block);
        }
        f
    }

    /// Assembles a vector field from scalar components.
    pub fn vector_from_components(components: &[PolyField]) -> Result<Self> {
        let n = components.len();
        let mut f = Self::zero(Shape::Vector(n));
        for (i, c) in components.iter().enumerate() {
            if c.shape != Shape::Scalar {
                return Err(Error::Shape("vector components must be scalar fields".into()));
            }
            f.max_degree = f.max_degree.max(c.max_degree);
            for (e, b) in &c.terms {
                f.terms.entry(*e).or_insert_with(|| vec![czero(); n])[i] += b[0];
            }
        }
        f.prune();
        Ok(f)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Total degree of the highest nonzero term; `None` for the zero field.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(total_degree).max()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &[Complex64])> {
        self.terms.iter().map(|(e, b)| (e, b.as_slice()))
    }

    pub fn coefficient(&self, e: &Exponent) -> Option<&[Complex64]> {
        self.terms.get(e).map(Vec::as_slice)
    }

    /// Changes the degree bound. Fails if the field already exceeds it.
    pub fn with_max_degree(self, bound: u32) -> Result<Self> {
        if let Some(d) = self.degree() {
            if d > bound {
                return Err(Error::DegreeOverflow { degree: d, bound });
            }
        }
        Ok(self.with_max_degree_unchecked(bound))
    }

    fn with_max_degree_unchecked(mut self, bound: u32) -> Self {
        self.max_degree = bound;
        self
    }

    fn prune(&mut self) {
        self.terms.retain(|_, b| !block_is_zero(b));
    }

    fn check_same_shape(&self, other: &PolyField, op: &str) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!("cannot {op} {:?} and {:?}", self.shape, other.shape)));
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyField) -> Result<PolyField> {
        self.check_same_shape(other, "add")?;
        let mut out = self.clone();
        out.max_degree = self.max_degree.max(other.max_degree);
        for (e, b) in &other.terms {
            let dst = out.terms.entry(*e).or_insert_with(|| vec![czero(); b.len()]);
            for (d, v) in dst.iter_mut().zip(b) {
                *d += v;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &PolyField) -> Result<PolyField> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: Complex64) -> PolyField {
        let mut out = self.clone();
        for b in out.terms.values_mut() {
            for v in b.iter_mut() {
                *v *= z;
            }
        }
        out.prune();
        out
    }

    /// Product with the shape rules scalar·any, any·scalar, matrix·matrix and
    /// matrix·vector. The result carries the larger of the two degree bounds.
    pub fn mul(&self, other: &PolyField) -> Result<PolyField> {
        let shape = match (self.shape, other.shape) {
            (Shape::Scalar, s) | (s, Shape::Scalar) => s,
            (Shape::Matrix(n), Shape::Matrix(m)) if n == m => Shape::Matrix(n),
            (Shape::Matrix(n), Shape::Vector(m)) if n == m => Shape::Vector(n),
            (a, b) => return Err(Error::Shape(format!("cannot multiply {a:?} by {b:?}"))),
        };
        let bound = self.max_degree.max(other.max_degree);
        let mut out = PolyField { shape, max_degree: bound, terms: BTreeMap::new() };
        for (ea, ba) in &self.terms {
            for (eb, bb) in &other.terms {
                let e: Exponent = std::array::from_fn(|i| ea[i] + eb[i]);
                let prod = block_product(self.shape, ba, other.shape, bb);
                let dst = out.terms.entry(e).or_insert_with(|| vec![czero(); shape.len()]);
                for (d, v) in dst.iter_mut().zip(&prod) {
                    *d += v;
                }
            }
        }
        out.prune();
        if let Some(d) = out.degree() {
            if d > bound {
                return Err(Error::DegreeOverflow { degree: d, bound });
            }
        }
        Ok(out)
    }

    /// Exact partial derivative `∂_a`.
    pub fn differentiate(&self, a: usize) -> PolyField {
        let mut out = PolyField { shape: self.shape, max_degree: self.max_degree, terms: BTreeMap::new() };
        for (e, b) in &self.terms {
            if e[a] == 0 {
                continue;
            }
            let k = f64::from(e[a]);
            let mut ne = *e;
            ne[a] -= 1;
            out.terms.insert(ne, b.iter().map(|v| v * k).collect());
        }
        out
    }

    /// Evaluates the coefficient block at `x` using a table of coordinate
    /// powers.
    pub fn evaluate(&self, x: &[f64; DIM]) -> Vec<Complex64> {
        let top = self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
        let mut powers = [[1.0f64; 16]; DIM];
        let mut table: Vec<[f64; DIM]> = Vec::new();
        if top >= 16 {
            table = (0..=top).map(|k| std::array::from_fn(|i| x[i].powi(k as i32))).collect();
        } else {
            for i in 0..DIM {
                for k in 1..=top {
                    powers[i][k] = powers[i][k - 1] * x[i];
                }
            }
        }
        let pw = |i: usize, k: u8| -> f64 {
            if table.is_empty() {
                powers[i][k as usize]
            } else {
                table[k as usize][i]
            }
        };
        let mut out = vec![czero(); self.shape.len()];
        for (e, b) in &self.terms {
            let m = pw(0, e[0]) * pw(1, e[1]) * pw(2, e[2]) * pw(3, e[3]);
            for (o, v) in out.iter_mut().zip(b) {
                *o += v * m;
            }
        }
        out
    }

    pub fn evaluate_scalar(&self, x: &[f64; DIM]) -> Complex64 {
        debug_assert_eq!(self.shape, Shape::Scalar);
        self.evaluate(x)[0]
    }

    pub fn evaluate_matrix(&self, x: &[f64; DIM]) -> CMat {
        debug_assert!(matches!(self.shape, Shape::Matrix(_)));
        CMat::from_row_major(self.evaluate(x)).expect("square block")
    }

    /// Second-order jet of the real part of a scalar field at `x`.
    pub fn jet(&self, x: &[f64; DIM], order: u8) -> Jet {
        debug_assert_eq!(self.shape, Shape::Scalar);
        let v = self.evaluate_scalar(x).re;
        if order == 0 {
            return Jet::constant(v, 0);
        }
        let first: Vec<PolyField> = (0..DIM).map(|b| self.differentiate(b)).collect();
        let d: [f64; DIM] = std::array::from_fn(|b| first[b].evaluate_scalar(x).re);
        let dd: [[f64; DIM]; DIM] = if order >= 2 {
            std::array::from_fn(|b| std::array::from_fn(|c| first[b].differentiate(c).evaluate_scalar(x).re))
        } else {
            [[0.0; DIM]; DIM]
        };
        Jet::new(order.min(2), v, d, dd)
    }

    /// `s(x) · M` for a scalar field `s` and a constant matrix `M`.
    pub fn scalar_times_matrix(s: &PolyField, m: &CMat) -> Result<PolyField> {
        if s.shape != Shape::Scalar {
            return Err(Error::Shape("expected a scalar field".into()));
        }
        s.mul(&PolyField::matrix_const(m))
    }

    /// `M ⊗ F` for a constant matrix `M` and matrix field `F`.
    pub fn kron_left(m: &CMat, f: &PolyField) -> Result<PolyField> {
        let Shape::Matrix(n) = f.shape else {
            return Err(Error::Shape("kron_left needs a matrix field".into()));
        };
        let mut out = PolyField {
            shape: Shape::Matrix(m.dim() * n),
            max_degree: f.max_degree,
            terms: BTreeMap::new(),
        };
        for (e, b) in &f.terms {
            let blk = CMat::from_row_major(b.clone())?;
            out.terms.insert(*e, crate::linalg::kron(m, &blk).into_vec());
        }
        Ok(out)
    }

    /// `F ⊗ M` for a matrix field `F` and constant matrix `M`.
    pub fn kron_right(f: &PolyField, m: &CMat) -> Result<PolyField> {
        let Shape::Matrix(n) = f.shape else {
            return Err(Error::Shape("kron_right needs a matrix field".into()));
        };
        let mut out = PolyField {
            shape: Shape::Matrix(n * m.dim()),
            max_degree: f.max_degree,
            terms: BTreeMap::new(),
        };
        for (e, b) in &f.terms {
            let blk = CMat::from_row_major(b.clone())?;
            out.terms.insert(*e, crate::linalg::kron(&blk, m).into_vec());
        }
        Ok(out)
    }

    /// Scalar field holding entry `i` of a vector field (or flat entry `i` of
    /// a matrix field).
    pub fn component(&self, i: usize) -> PolyField {
        let mut out = PolyField { shape: Shape::Scalar, max_degree: self.max_degree, terms: BTreeMap::new() };
        for (e, b) in &self.terms {
            out.terms.insert(*e, vec![b[i]]);
        }
        out.prune();
        out
    }

    /// Largest coefficient modulus over all terms.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn block_product(sa: Shape, a: &[Complex64], sb: Shape, b: &[Complex64]) -> Vec<Complex64> {
    match (sa, sb) {
        (Shape::Scalar, _) => b.iter().map(|v| v * a[0]).collect(),
        (_, Shape::Scalar) => a.iter().map(|v| v * b[0]).collect(),
        (Shape::Matrix(n), Shape::Matrix(_)) => {
            let mut out = vec![czero(); n * n];
            for r in 0..n {
                for k in 0..n {
                    let x = a[r * n + k];
                    if x.re == 0.0 && x.im == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        out[r * n + c] += x * b[k * n + c];
                    }
                }
            }
            out
        }
        (Shape::Matrix(n), Shape::Vector(_)) => {
            (0..n).map(|r| (0..n).map(|c| a[r * n + c] * b[c]).sum()).collect()
        }
        _ => unreachable!("shape checked by caller"),
    }
}

impl Coefficient for PolyField {
    fn zero_like(&self) -> Self {
        PolyField { shape: self.shape, max_degree: self.max_degree, terms: BTreeMap::new() }
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        self.mul(other)
    }
    fn scale(&self, z: Complex64) -> Self {
        PolyField::scale(self, z)
    }
    fn is_zero(&self) -> bool {
        PolyField::is_zero(self)
    }
    fn max_abs(&self) -> f64 {
        self.max_abs_coefficient()
    }
    fn describe_shape(&self) -> String {
        format!("{:?} field", self.shape)
    }
}
