//! Electroweak connections per basis, their curvature, and the field
//! strengths of the potentials `W_a^k`, `B_a`.
//!
//! The covariant derivative is `π_a X = −iℓ(∂_a − Γ_a)X`, so the
//! electroweak part of `Γ_a` is `−(i/2)(g′ T_k W_a^k + g″ Y B_a)` with the
//! isospin generators `T_k` and hypercharge `Y` of the basis.

use num_complex::Complex64;
use rand::Rng;

use crate::clifford::Basis;
use crate::error::{Error, Result};
use crate::geometry::{ConnectionJet, PointGeometry, Real4, TetradField};
use crate::linalg::{kron, pairs_from_fn, pauli, CMat, Pairs, DIM, I};
use crate::polyfield::{PolyField, Shape};
use crate::probe::Point;

/// Gauge potentials and couplings. `w[k][a]` is `W_a^{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeConfig {
    pub w: [[PolyField; DIM]; 3],
    pub b: [PolyField; DIM],
    pub g1: f64,
    pub g2: f64,
}

fn scalar_zero() -> PolyField {
    PolyField::zero(Shape::Scalar)
}

impl GaugeConfig {
    pub fn zero(g1: f64, g2: f64) -> Self {
        GaugeConfig {
            w: std::array::from_fn(|_| std::array::from_fn(|_| scalar_zero())),
            b: std::array::from_fn(|_| scalar_zero()),
            g1,
            g2,
        }
    }

    pub fn constant(w: [[f64; DIM]; 3], b: [f64; DIM], g1: f64, g2: f64) -> Self {
        GaugeConfig {
            w: w.map(|r| r.map(PolyField::real)),
            b: b.map(PolyField::real),
            g1,
            g2,
        }
    }

    /// Real random potentials of the given degree with coefficients in
    /// `[-amplitude, amplitude]`, constants included.
    pub fn random(rng: &mut impl Rng, degree: u32, amplitude: f64, g1: f64, g2: f64) -> Self {
        let draw = |rng: &mut _| {
            let c = rand::Rng::gen_range(rng, -amplitude..=amplitude);
            PolyField::random_scalar(rng, degree, amplitude, c)
        };
        let w = std::array::from_fn(|_| std::array::from_fn(|_| draw(rng)));
        let b = std::array::from_fn(|_| draw(rng));
        GaugeConfig { w, b, g1, g2 }
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().flatten().chain(self.b.iter()).all(|f| f.is_zero())
    }

    /// Values `(W_a^k, B_a)` at `x` (real parts).
    pub fn values_at(&self, x: &Point) -> ([[f64; DIM]; 3], [f64; DIM]) {
        (
            self.w.each_ref().map(|r| r.each_ref().map(|f| f.evaluate_scalar(x).re)),
            self.b.each_ref().map(|f| f.evaluate_scalar(x).re),
        )
    }
}

/// Field strengths `W^k_ab` and `B_ab` as polynomials.
#[derive(Clone, Debug)]
pub struct FieldStrengths {
    pub w: [Pairs<PolyField>; 3],
    pub b: Pairs<PolyField>,
}

impl FieldStrengths {
    pub fn at(&self, x: &Point) -> ([Real4; 3], Real4) {
        let ev = |p: &Pairs<PolyField>| pairs_from_fn(|a, b| p[a][b].evaluate_scalar(x).re);
        (self.w.each_ref().map(ev), ev(&self.b))
    }
}

/// Levi-Civita symbol on three isospin indices.
pub fn epsilon3(k: usize, l: usize, m: usize) -> f64 {
    match (k, l, m) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `W^k_ab = ∂_aW^k_b − ∂_bW^k_a − g′ ε_klm W^l_a W^m_b` and
/// `B_ab = ∂_aB_b − ∂_bB_a`.
pub fn field_strengths(gauge: &GaugeConfig) -> Result<FieldStrengths> {
    let curl = |f: &[PolyField; DIM], a: usize, b: usize| f[b].differentiate(a).sub(&f[a].differentiate(b));
    let mut w: [Pairs<PolyField>; 3] = std::array::from_fn(|_| pairs_from_fn(|_, _| scalar_zero()));
    for (k, wk) in w.iter_mut().enumerate() {
        for a in 0..DIM {
            for b in a + 1..DIM {
                let mut f = curl(&gauge.w[k], a, b)?;
                for l in 0..3 {
                    for m in 0..3 {
                        let eps = epsilon3(k, l, m);
                        if eps != 0.0 {
                            let cross = gauge.w[l][a].mul(&gauge.w[m][b])?;
                            f = f.sub(&cross.scale(Complex64::new(gauge.g1 * eps, 0.0)))?;
                        }
                    }
                }
                wk[b][a] = f.scale(Complex64::new(-1.0, 0.0));
                wk[a][b] = f;
            }
        }
    }
    let mut b = pairs_from_fn(|_, _| scalar_zero());
    for i in 0..DIM {
        for j in i + 1..DIM {
            let f = curl(&gauge.b, i, j)?;
            b[j][i] = f.scale(Complex64::new(-1.0, 0.0));
            b[i][j] = f;
        }
    }
    Ok(FieldStrengths { w, b })
}

/// `(W_k^{ab}W^k_ab, B^{ab}B_ab)` with indices raised by `ginv`.
pub fn contract_squares(w: &[Real4; 3], b: &Real4, ginv: &Real4) -> (f64, f64) {
    let square = |t: &Real4| {
        let mut s = 0.0;
        for a in 0..DIM {
            for bb in 0..DIM {
                for c in 0..DIM {
                    for d in 0..DIM {
                        s += ginv[a][c] * ginv[bb][d] * t[c][d] * t[a][bb];
                    }
                }
            }
        }
        s
    };
    (w.iter().map(square).sum(), square(b))
}

/// Hypercharge of the basis: `Y_L ⊗ 1̂_4 = −1̂_8`, `Y_R = −2·1̂_4`,
/// `Y_W = 1̂_4`; the V basis does not couple.
pub fn hypercharge(basis: Basis) -> CMat {
    match basis {
        Basis::L => kron(&CMat::identity(2).scale_re(-1.0), &CMat::identity(4)),
        Basis::R => CMat::identity(4).scale_re(-2.0),
        Basis::U => CMat::identity(4),
        Basis::V => CMat::zeros(4),
    }
}

/// Isospin generators `σ_k ⊗ 1̂_4` (L) or `1̂_2 ⊗ σ_k` (U); none for R, V.
pub fn isospin(basis: Basis) -> Option<[CMat; 3]> {
    let s = pauli();
    match basis {
        Basis::L => Some(s.each_ref().map(|m| kron(m, &CMat::identity(4)))),
        Basis::U => Some(s.each_ref().map(|m| kron(&CMat::identity(2), m))),
        Basis::R | Basis::V => None,
    }
}

/// Total connection `Γ_a` of one basis.
#[derive(Clone, Debug)]
pub struct ConnectionField {
    basis: Basis,
    ew: [PolyField; DIM],
    gravity: Option<TetradField>,
}

/// Electroweak part of `Γ_a` plus, for L and R, the spin connection of the
/// tetrad (as `1̂_2 ⊗ Γ̄_a` for L). The tetrad is ignored for U and V.
pub fn build_connection(gauge: &GaugeConfig, spin: Option<&TetradField>, basis: Basis) -> Result<ConnectionField> {
    let n = basis.dim();
    let y = hypercharge(basis).scale(-I * 0.5 * gauge.g2);
    let t = isospin(basis);
    let mut ew = Vec::with_capacity(DIM);
    for a in 0..DIM {
        let mut f = PolyField::scalar_times_matrix(&gauge.b[a], &y)?;
        if let Some(t) = &t {
            for (k, tk) in t.iter().enumerate() {
                let g = tk.scale(-I * 0.5 * gauge.g1);
                f = f.add(&PolyField::scalar_times_matrix(&gauge.w[k][a], &g)?)?;
            }
        }
        debug_assert_eq!(f.shape(), Shape::Matrix(n));
        ew.push(f);
    }
    let gravity = if basis.is_fermionic() {
        Some(spin.ok_or(Error::MissingSpinConnection(basis.name()))?.clone())
    } else {
        None
    };
    Ok(ConnectionField { basis, ew: ew.try_into().expect("four components"), gravity })
}

impl ConnectionField {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Electroweak part of `Γ_a` as matrix polynomials.
    pub fn ew_fields(&self) -> &[PolyField; DIM] {
        &self.ew
    }

    pub fn gravity(&self) -> Option<&TetradField> {
        self.gravity.as_ref()
    }

    /// Whether the gravity part is identically zero (flat constant frame).
    pub fn gravity_is_trivial(&self) -> bool {
        self.gravity.as_ref().is_none_or(|t| t.is_constant())
    }

    /// Electroweak part of the connection at `x`.
    pub fn ew_jet_at(&self, x: &Point) -> ConnectionJet {
        ConnectionJet::from_polys(&self.ew, x)
    }

    /// `Γ_a` and `∂_bΓ_a` at `x`, gravity included.
    pub fn jet_at(&self, x: &Point) -> Result<ConnectionJet> {
        let ew = self.ew_jet_at(x);
        match &self.gravity {
            None => Ok(ew),
            Some(t) => {
                let spin = PointGeometry::at(t, x)?.spin.jet;
                let spin = if self.basis == Basis::L { spin.kron_identity_left(2) } else { spin };
                ew.add(&spin)
            }
        }
    }
}

/// ℓ² coefficient of `ρ_ab = 2π_[aπ_b]` at `x`.
pub fn gauge_curvature(conn: &ConnectionField, x: &Point) -> Result<Pairs<CMat>> {
    Ok(conn.jet_at(x)?.curvature())
}

/// `−(i/2)(g′ T_k W^k_ab + g″ Y B_ab)` at `x`, from the field strengths.
pub fn field_strength_reconstruction(gauge: &GaugeConfig, fs: &FieldStrengths, basis: Basis, x: &Point) -> Pairs<CMat> {
    let (w, b) = fs.at(x);
    let y = hypercharge(basis);
    let t = isospin(basis);
    pairs_from_fn(|i, j| {
        let mut m = y.scale_re(gauge.g2 * b[i][j]);
        if let Some(t) = &t {
            for k in 0..3 {
                m.add_scaled(&t[k], Complex64::new(gauge.g1 * w[k][i][j], 0.0));
            }
        }
        m.scale(-I * 0.5)
    })
}

/// Scalar quadruplet `(0, p, 0, q)`.
pub fn vacuum_scalar(p: f64, q: f64) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0), Complex64::new(p, 0.0), Complex64::new(0.0, 0.0), Complex64::new(q, 0.0)]
}
