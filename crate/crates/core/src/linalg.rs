//! Dense complex matrices and the index contractions built on them.
//!
//! Matrices here are tiny (2, 4 or 8 rows), so storage is a flat row-major
//! `Vec` and multiplication is the textbook triple loop. What dominates the
//! cost of the verification suite is the number of products in a Levi-Civita
//! contraction, not the size of each product.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Spacetime dimension.
pub const DIM: usize = 4;

/// A quantity carrying two spacetime indices, `t[a][b]`.
pub type Pairs<T> = [[T; DIM]; DIM];

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Builds a [`Pairs`] from a closure over `(a, b)`.
pub fn pairs_from_fn<T>(mut f: impl FnMut(usize, usize) -> T) -> Pairs<T> {
    std::array::from_fn(|a| std::array::from_fn(|b| f(a, b)))
}

/// Dense `n × n` complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat({}x{})", self.n, self.n)?;
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        CMat { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Complex64::new(1.0, 0.0))
    }

    /// `z · 1̂_n`
    pub fn scalar(n: usize, z: Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.data[r * n + c] = f(r, c);
            }
        }
        m
    }

    /// Builds from row-major data. Fails unless `data.len()` is a perfect square.
    pub fn from_row_major(data: Vec<Complex64>) -> Result<Self> {
        let n = (data.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != data.len() {
            return Err(Error::Shape(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        Ok(CMat { n, data })
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(N, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &CMat) -> Complex64 {
        self.check_dim(other);
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn scale(&self, z: Complex64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|v| v * z).collect() }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self += other · s`
    pub fn add_scaled(&mut self, other: &CMat, s: Complex64) {
        self.check_dim(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.n, |r, c| self[(c, r)].conj())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn commutator(&self, other: &CMat) -> CMat {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &CMat) -> CMat {
        &(self * other) + &(other * self)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n, "vector length does not match matrix");
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.data[r * self.n + c] * v[c]).sum())
            .collect()
    }

    /// Extracts the `size × size` block whose top-left corner is `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> CMat {
        assert!(row + size <= self.n && col + size <= self.n);
        CMat::from_fn(size, |r, c| self[(row + r, col + c)])
    }

    fn check_dim(&self, other: &CMat) {
        assert_eq!(
            self.n, other.n,
            "matrix dimension mismatch: {} vs {}",
            self.n, other.n
        );
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.n + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.n + c]
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        self.check_dim(rhs);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        self.check_dim(rhs);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|a| -a).collect() }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.check_dim(rhs);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        self.check_dim(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMat> for CMat {
    fn sub_assign(&mut self, rhs: &CMat) {
        self.check_dim(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Kronecker product; the result has dimension `a.dim() * b.dim()`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (m, n) = (a.n, b.n);
    CMat::from_fn(m * n, |r, c| a[(r / n, c / n)] * b[(r % n, c % n)])
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.check_dim(b);
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// The three Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [CMat; 3] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    [
        CMat::from_row_major(vec![z, one, one, z]).unwrap(),
        CMat::from_row_major(vec![z, -I, I, z]).unwrap(),
        CMat::from_row_major(vec![one, z, z, -one]).unwrap(),
    ]
}

/// Weight-½ symmetric part: `X_(ab) = ½(X_ab + X_ba)`.
pub fn symmetrize_pair(t: &Pairs<CMat>) -> Pairs<CMat> {
    pairs_from_fn(|a, b| (&t[a][b] + &t[b][a]).scale_re(0.5))
}

/// Weight-½ antisymmetric part: `X_[ab] = ½(X_ab - X_ba)`.
pub fn antisymmetrize_pair(t: &Pairs<CMat>) -> Pairs<CMat> {
    pairs_from_fn(|a, b| (&t[a][b] - &t[b][a]).scale_re(0.5))
}

/// `½(x y + y x)` for a single pair of matrices.
pub fn sym_product(x: &CMat, y: &CMat) -> CMat {
    x.anticommutator(y).scale_re(0.5)
}

/// `½(x y - y x)` for a single pair of matrices.
pub fn antisym_product(x: &CMat, y: &CMat) -> CMat {
    x.commutator(y).scale_re(0.5)
}

/// A permutation of `0..4` together with its sign.
#[derive(Clone, Copy, Debug)]
pub struct SignedPerm {
    pub perm: [usize; DIM],
    pub sign: f64,
}

/// The 24 permutations of four indices with their parity signs, in
/// lexicographic order.
pub fn permutations() -> &'static [SignedPerm; 24] {
    static PERMS: OnceLock<[SignedPerm; 24]> = OnceLock::new();
    PERMS.get_or_init(|| {
        let mut out = Vec::with_capacity(24);
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    for d in 0..DIM {
                        let p = [a, b, c, d];
                        let s = levi_civita(p);
                        if s != 0 {
                            out.push(SignedPerm { perm: p, sign: f64::from(s) });
                        }
                    }
                }
            }
        }
        out.try_into().expect("exactly 24 permutations")
    })
}

/// Totally antisymmetric symbol with `e^{0123} = 1`.
pub fn levi_civita(idx: [usize; DIM]) -> i8 {
    let mut seen = [false; DIM];
    for &i in &idx {
        if i >= DIM || seen[i] {
            return 0;
        }
        seen[i] = true;
    }
    let mut sign = 1;
    for i in 0..DIM {
        for j in i + 1..DIM {
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Values that can be multiplied, added and scaled. Implemented for plain
/// numbers, matrices, and truncated series over them, so the same epsilon
/// contraction code serves commuting and non-commuting entries.
pub trait Coefficient: Clone {
    /// A zero of the same shape as `self`.
    fn zero_like(&self) -> Self;
    fn try_add(&self, other: &Self) -> Result<Self>;
    fn try_mul(&self, other: &Self) -> Result<Self>;
    fn scale(&self, z: Complex64) -> Self;
    fn is_zero(&self) -> bool;
    /// Largest magnitude of any scalar entry; used in residual reports.
    fn max_abs(&self) -> f64;
    fn describe_shape(&self) -> String;
}

impl Coefficient for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn scale(&self, z: Complex64) -> Self {
        // Real numbers only admit real scale factors.
        self * z.re
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
    fn describe_shape(&self) -> String {
        "real scalar".into()
    }
}

impl Coefficient for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn scale(&self, z: Complex64) -> Self {
        self * z
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn max_abs(&self) -> f64 {
        self.norm()
    }
    fn describe_shape(&self) -> String {
        "complex scalar".into()
    }
}

impl Coefficient for CMat {
    fn zero_like(&self) -> Self {
        CMat::zeros(self.n)
    }
    fn try_add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Shape(format!("cannot add {}x{0} and {}x{1}", self.n, other.n)));
        }
        Ok(self + other)
    }
    fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{0} by {}x{1}",
                self.n, other.n
            )));
        }
        Ok(self * other)
    }
    fn scale(&self, z: Complex64) -> Self {
        CMat::scale(self, z)
    }
    fn is_zero(&self) -> bool {
        CMat::is_zero(self)
    }
    fn max_abs(&self) -> f64 {
        CMat::max_abs(self)
    }
    fn describe_shape(&self) -> String {
        format!("{}x{} matrix", self.n, self.n)
    }
}

/// Products whose trace can be taken without forming them.
pub trait TraceProduct {
    type Scalar;
    fn trace_of_product(&self, other: &Self) -> Result<Self::Scalar>;
}

impl TraceProduct for CMat {
    type Scalar = Complex64;
    fn trace_of_product(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Shape("trace of product of mismatched matrices".into()));
        }
        Ok(self.trace_product(other))
    }
}

/// Ordered pairs `(i, j)` with `i != j`, each with its own index triple
/// of remaining slots. Precomputed so the quartic contraction can share the
/// products of its first two and last two factors.
struct HalfPerm {
    head: [usize; 2],
    tail: [usize; 2],
    sign: f64,
}

fn half_perms() -> &'static [HalfPerm; 24] {
    static HP: OnceLock<[HalfPerm; 24]> = OnceLock::new();
    HP.get_or_init(|| {
        let v: Vec<HalfPerm> = permutations()
            .iter()
            .map(|p| HalfPerm {
                head: [p.perm[0], p.perm[1]],
                tail: [p.perm[2], p.perm[3]],
                sign: p.sign,
            })
            .collect();
        v.try_into().ok().expect("24 permutations")
    })
}

fn pair_index(i: usize, j: usize) -> usize {
    i * DIM + j
}

/// Products `F(i1, j1) F(i2, j2)` for every ordered choice of two distinct
/// row indices and two distinct column indices, keyed by
/// `(pair_index(i1,i2), pair_index(j1,j2))`.
fn pair_products<T: Coefficient>(f: &Pairs<T>) -> Result<Vec<Vec<Option<T>>>> {
    let mut table = vec![vec![None; DIM * DIM]; DIM * DIM];
    for i1 in 0..DIM {
        for i2 in 0..DIM {
            if i1 == i2 {
                continue;
            }
            for j1 in 0..DIM {
                for j2 in 0..DIM {
                    if j1 == j2 {
                        continue;
                    }
                    table[pair_index(i1, i2)][pair_index(j1, j2)] =
                        Some(f[i1][j1].try_mul(&f[i2][j2])?);
                }
            }
        }
    }
    Ok(table)
}

/// `e^{abcd} e^{efgh} F_{ae} F_{bf} F_{cg} F_{dh}` with the matrix products
/// ordered left to right as written.
///
/// Runs over the 24 × 24 nonzero permutation pairs only; the products of the
/// first two and of the last two factors are shared between pairs.
pub fn epsilon_contract_quartic<T: Coefficient>(f: &Pairs<T>) -> Result<T> {
    let table = pair_products(f)?;
    let mut acc = f[0][0].zero_like();
    for p in half_perms() {
        for q in half_perms() {
            let left = table[pair_index(p.head[0], p.head[1])][pair_index(q.head[0], q.head[1])]
                .as_ref()
                .expect("distinct indices");
            let right = table[pair_index(p.tail[0], p.tail[1])][pair_index(q.tail[0], q.tail[1])]
                .as_ref()
                .expect("distinct indices");
            let term = left.try_mul(right)?;
            acc = acc.try_add(&term.scale(Complex64::new(p.sign * q.sign, 0.0)))?;
        }
    }
    Ok(acc)
}

/// Trace mode of [`epsilon_contract_quartic`]:
/// `e^{abcd} e^{efgh} Tr{F_{ae} F_{bf} F_{cg} F_{dh}}`.
pub fn epsilon_contract_quartic_trace<T>(f: &Pairs<T>) -> Result<T::Scalar>
where
    T: Coefficient + TraceProduct,
    T::Scalar: Coefficient,
{
    let table = pair_products(f)?;
    let mut acc: Option<T::Scalar> = None;
    for p in half_perms() {
        for q in half_perms() {
            let left = table[pair_index(p.head[0], p.head[1])][pair_index(q.head[0], q.head[1])]
                .as_ref()
                .expect("distinct indices");
            let right = table[pair_index(p.tail[0], p.tail[1])][pair_index(q.tail[0], q.tail[1])]
                .as_ref()
                .expect("distinct indices");
            let term = left
                .trace_of_product(right)?
                .scale(Complex64::new(p.sign * q.sign, 0.0));
            acc = Some(match acc {
                None => term,
                Some(a) => a.try_add(&term)?,
            });
        }
    }
    Ok(acc.expect("nonempty contraction"))
}

/// `e^{abcd} e^{efgh} F_{ae} F_{bf} F_{cg}` with the last indices of both
/// symbols left free as `(d, h)`.
pub fn epsilon_contract_cubic<T: Coefficient>(f: &Pairs<T>, d: usize, h: usize) -> Result<T> {
    let mut acc = f[0][0].zero_like();
    for p in permutations().iter().filter(|p| p.perm[3] == d) {
        for q in permutations().iter().filter(|q| q.perm[3] == h) {
            let term = f[p.perm[0]][q.perm[0]]
                .try_mul(&f[p.perm[1]][q.perm[1]])?
                .try_mul(&f[p.perm[2]][q.perm[2]])?;
            acc = acc.try_add(&term.scale(Complex64::new(p.sign * q.sign, 0.0)))?;
        }
    }
    Ok(acc)
}

/// Determinant of a real 4×4 matrix by cofactor expansion.
pub fn det4(m: &[[f64; DIM]; DIM]) -> f64 {
    let sub = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    // Laplace expansion over the first two rows.
    sub(0, 1, 0, 1) * sub(2, 3, 2, 3) - sub(0, 1, 0, 2) * sub(2, 3, 1, 3)
        + sub(0, 1, 0, 3) * sub(2, 3, 1, 2)
        + sub(0, 1, 1, 2) * sub(2, 3, 0, 3)
        - sub(0, 1, 1, 3) * sub(2, 3, 0, 2)
        + sub(0, 1, 2, 3) * sub(2, 3, 0, 1)
}

/// Inverse of a real 4×4 matrix by Gauss-Jordan elimination with partial
/// pivoting. Returns `None` when a pivot falls below `1e-14` in magnitude.
pub fn inverse4(m: &[[f64; DIM]; DIM]) -> Option<[[f64; DIM]; DIM]> {
    let mut a = *m;
    let mut inv = [[0.0; DIM]; DIM];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..DIM {
        let piv = (col..DIM)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for c in 0..DIM {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for r in 0..DIM {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..DIM {
                        a[r][c] -= f * a[col][c];
                        inv[r][c] -= f * inv[col][c];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_cmat(rng: &mut impl Rng, n: usize) -> CMat {
        CMat::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&CMat::identity(2), &CMat::identity(4));
        assert_eq!(k, CMat::identity(8));
    }

    #[test]
    fn pauli_involution_through_kron() {
        let s1 = kron(&pauli()[0], &CMat::identity(4));
        assert_eq!(&s1 * &s1, CMat::identity(8));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_cmat(&mut rng, 2);
            let b = random_cmat(&mut rng, 4);
            let ab = kron(&a, &b);
            let lhs = &ab * &ab;
            let rhs = kron(&(&a * &a), &(&b * &b));
            let rel = max_abs_diff(&lhs, &rhs) / rhs.max_abs();
            assert!(rel < 1e-13, "relative error {rel}");
        }
    }

    #[test]
    fn pauli_algebra() {
        let s = pauli();
        // [σ1, σ2] = 2iσ3
        let lhs = s[0].commutator(&s[1]);
        assert!(max_abs_diff(&lhs, &s[2].scale(I * 2.0)) == 0.0);
    }

    #[test]
    fn levi_civita_values() {
        assert_eq!(levi_civita([0, 1, 2, 3]), 1);
        assert_eq!(levi_civita([1, 0, 2, 3]), -1);
        assert_eq!(levi_civita([1, 2, 3, 0]), -1);
        assert_eq!(levi_civita([0, 0, 2, 3]), 0);
        let total: f64 = permutations().iter().map(|p| p.sign).sum();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn antisymmetrize_splits_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t: Pairs<CMat> = pairs_from_fn(|_, _| random_cmat(&mut rng, 4));
        let s = symmetrize_pair(&t);
        let a = antisymmetrize_pair(&t);
        for x in 0..DIM {
            for y in 0..DIM {
                // ½(u+v) + ½(u-v) reconstructs u exactly in binary floating point.
                assert_eq!(&s[x][y] + &a[x][y], t[x][y]);
            }
        }
        let aa = antisymmetrize_pair(&a);
        let as_ = antisymmetrize_pair(&s);
        for x in 0..DIM {
            for y in 0..DIM {
                assert!(max_abs_diff(&aa[x][y], &a[x][y]) <= 1e-15);
                assert!(as_[x][y].max_abs() <= 1e-15);
            }
        }
    }

    /// Brute force over all 4^8 index assignments.
    fn brute_quartic_scalar(f: &[[f64; 4]; 4]) -> f64 {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    for d in 0..4 {
                        let s1 = levi_civita([a, b, cc, d]);
                        if s1 == 0 {
                            continue;
                        }
                        for e in 0..4 {
                            for ff in 0..4 {
                                for g in 0..4 {
                                    for h in 0..4 {
                                        let s2 = levi_civita([e, ff, g, h]);
                                        if s2 == 0 {
                                            continue;
                                        }
                                        acc += f64::from(s1 * s2)
                                            * f[a][e]
                                            * f[b][ff]
                                            * f[cc][g]
                                            * f[d][h];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn quartic_contraction_matches_brute_force_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let m: [[f64; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
            let f: Pairs<f64> = pairs_from_fn(|a, b| m[a][b]);
            let fast = epsilon_contract_quartic(&f).unwrap();
            let det = det4(&m);
            assert!((fast - 24.0 * det).abs() <= 1e-12 * (24.0 * det).abs().max(1.0), "trial {trial}");
            if trial < 3 {
                let brute = brute_quartic_scalar(&m);
                assert!((fast - brute).abs() < 1e-12 * brute.abs().max(1.0));
            }
        }
    }

    #[test]
    fn quartic_trace_of_flat_metric() {
        // F_ae = η_ae 1̂_N: 4!·det(η)·N
        for n in [2, 4, 8] {
            let eta = [1.0, -1.0, -1.0, -1.0];
            let f: Pairs<CMat> = pairs_from_fn(|a, b| {
                if a == b {
                    CMat::scalar(n, c(eta[a]))
                } else {
                    CMat::zeros(n)
                }
            });
            let t = epsilon_contract_quartic_trace(&f).unwrap();
            assert_eq!(t, c(-24.0 * n as f64));
            let plain = epsilon_contract_quartic(&f).unwrap();
            assert_eq!(plain, CMat::scalar(n, c(-24.0)));
        }
    }

    #[test]
    fn quartic_with_diagonal_entries() {
        let d = [0.5, 2.0, -1.5, 3.0];
        let f: Pairs<f64> = pairs_from_fn(|a, b| if a == b { d[a] } else { 0.0 });
        let v = epsilon_contract_quartic(&f).unwrap();
        assert!((v - 24.0 * d.iter().product::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn zero_row_kills_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Pairs<CMat> =
            pairs_from_fn(|a, _| if a == 2 { CMat::zeros(4) } else { random_cmat(&mut rng, 4) });
        assert!(epsilon_contract_quartic(&f).unwrap().is_zero());
        assert!(epsilon_contract_quartic_trace(&f).unwrap().norm() == 0.0);
    }

    #[test]
    fn quartic_noncommuting_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f: Pairs<CMat> = pairs_from_fn(|_, _| random_cmat(&mut rng, 4));
        let mut direct = CMat::zeros(4);
        for p in permutations() {
            for q in permutations() {
                let (a, b) = (p.perm, q.perm);
                let prod = &(&(&f[a[0]][b[0]] * &f[a[1]][b[1]]) * &f[a[2]][b[2]]) * &f[a[3]][b[3]];
                direct.add_scaled(&prod, c(p.sign * q.sign));
            }
        }
        let fast = epsilon_contract_quartic(&f).unwrap();
        assert!(max_abs_diff(&fast, &direct) < 1e-11 * direct.max_abs().max(1.0));
        let tr = epsilon_contract_quartic_trace(&f).unwrap();
        assert!((tr - direct.trace()).norm() < 1e-11 * direct.max_abs().max(1.0));
    }

    #[test]
    fn det_and_inverse() {
        let m = [[2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.5], [0.0, 1.0, 0.5, 4.0]];
        let inv = inverse4(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(inverse4(&[[0.0; 4]; 4]).is_none());
        assert_eq!(det4(&[[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]]), -1.0);
    }
}
