//! Dirac matrices built from a tetrad, the Clifford relation they satisfy,
//! and the cubic epsilon identity relating products of their antisymmetric
//! pairs to the raised pair.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TetradField;
use crate::linalg::{antisym_product, epsilon_contract_cubic, inverse4, pairs_from_fn, pauli, sym_product, CMat, Pairs, DIM};
use crate::polyfield::{PolyField, Shape};
use crate::probe::Point;
use crate::residual::Residual;

/// Pointwise gate on `γ_(aγ_b) − g_ab 1̂` applied by [`build_gammas`].
pub const CLIFFORD_TOLERANCE: f64 = 1e-10;

/// Coefficient of `g γ^{[h}γ^{d]}` in the cubic epsilon identity.
pub const MYFORM_COEFFICIENT: f64 = 10.0;

/// The constant Dirac matrices
/// `Δ_0 = [[0, 1], [1, 0]]`, `Δ_k = [[0, σ_k], [−σ_k, 0]]` in 2×2 blocks.
pub fn delta_basis() -> &'static [CMat; DIM] {
    static DELTA: OnceLock<[CMat; DIM]> = OnceLock::new();
    DELTA.get_or_init(|| {
        let s = pauli();
        let offdiag = |upper: &CMat, lower: &CMat| {
            CMat::from_fn(4, |r, c| match (r < 2, c < 2) {
                (true, false) => upper[(r, c - 2)],
                (false, true) => lower[(r - 2, c)],
                _ => Complex64::new(0.0, 0.0),
            })
        };
        let id = CMat::identity(2);
        [
            offdiag(&id, &id),
            offdiag(&s[0], &(-&s[0])),
            offdiag(&s[1], &(-&s[1])),
            offdiag(&s[2], &(-&s[2])),
        ]
    })
}

/// `Δ_[AΔ_B]` for all index pairs.
pub fn delta_commutators() -> &'static Pairs<CMat> {
    static GEN: OnceLock<Pairs<CMat>> = OnceLock::new();
    GEN.get_or_init(|| {
        let d = delta_basis();
        pairs_from_fn(|a, b| antisym_product(&d[a], &d[b]))
    })
}

/// Representation carried by a field: the lepton doublet `L` (8×8), the
/// right lepton `R`, the scalar doublet pair `U` and the scalar quadruplet `V`
/// (all 4×4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    L,
    R,
    U,
    V,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::L, Basis::R, Basis::U, Basis::V];

    pub fn dim(self) -> usize {
        match self {
            Basis::L => 8,
            _ => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::L => "L",
            Basis::R => "R",
            Basis::U => "U",
            Basis::V => "V",
        }
    }

    pub fn is_fermionic(self) -> bool {
        matches!(self, Basis::L | Basis::R)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" => Ok(Basis::L),
            "R" | "r" => Ok(Basis::R),
            "U" | "u" => Ok(Basis::U),
            "V" | "v" => Ok(Basis::V),
            _ => Err(Error::Config(format!("unknown basis `{s}` (expected L, R, U or V)"))),
        }
    }
}

/// Dirac matrices `γ_a` of one basis as matrix polynomials.
#[derive(Clone, Debug)]
pub struct GammaSet {
    basis: Basis,
    tetrad: TetradField,
    gamma_bar: [PolyField; DIM],
    gammas: [PolyField; DIM],
}

/// `γ̄_a = e_a^A Δ_A`, lifted to `1̂_2 ⊗ γ̄_a` for the L basis. Fails on a
/// degenerate tetrad or when the Clifford relation is violated at a probe.
pub fn build_gammas(tetrad: &TetradField, basis: Basis, probes: &[Point]) -> Result<GammaSet> {
    tetrad.check_nondegenerate(probes)?;
    let delta = delta_basis();
    let mut bar = Vec::with_capacity(DIM);
    for a in 0..DIM {
        let mut acc = PolyField::zero(Shape::Matrix(4));
        for (k, d) in delta.iter().enumerate() {
            acc = acc.add(&PolyField::scalar_times_matrix(tetrad.component(a, k), d)?)?;
        }
        bar.push(acc);
    }
    let gamma_bar: [PolyField; DIM] = bar.try_into().expect("four components");
    let gammas = match basis {
        Basis::L => {
            let id = CMat::identity(2);
            let mut v = Vec::with_capacity(DIM);
            for g in &gamma_bar {
                v.push(PolyField::kron_left(&id, g)?);
            }
            v.try_into().expect("four components")
        }
        _ => gamma_bar.clone(),
    };
    let set = GammaSet { basis, tetrad: tetrad.clone(), gamma_bar, gammas };
    for p in probes {
        let r = set.clifford_residual(p);
        if !(r < CLIFFORD_TOLERANCE) {
            return Err(Error::ResidualTooLarge { what: "clifford", residual: r, tolerance: CLIFFORD_TOLERANCE });
        }
    }
    Ok(set)
}

impl GammaSet {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn tetrad(&self) -> &TetradField {
        &self.tetrad
    }

    pub fn fields(&self) -> &[PolyField; DIM] {
        &self.gammas
    }

    pub fn bar_fields(&self) -> &[PolyField; DIM] {
        &self.gamma_bar
    }

    pub fn at(&self, x: &Point) -> [CMat; DIM] {
        std::array::from_fn(|a| self.gammas[a].evaluate_matrix(x))
    }

    pub fn bar_at(&self, x: &Point) -> [CMat; DIM] {
        std::array::from_fn(|a| self.gamma_bar[a].evaluate_matrix(x))
    }

    /// Largest entry of `γ_(aγ_b) − g_ab 1̂` over all index pairs.
    pub fn clifford_residual(&self, x: &Point) -> f64 {
        let g = self.tetrad.metric_at(x);
        let gam = self.at(x);
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..DIM {
            for b in 0..DIM {
                let r = &sym_product(&gam[a], &gam[b]) - &CMat::scalar(n, Complex64::new(g[a][b], 0.0));
                worst = worst.max(r.max_abs());
            }
        }
        worst
    }

    /// Contravariant set `γ^a = g^{ab} γ_b` at `x`.
    pub fn raised_at(&self, x: &Point) -> Result<[CMat; DIM]> {
        raise_index(self, x)
    }
}

/// `γ^a = g^{ab} γ_b` at `x`.
pub fn raise_index(gammas: &GammaSet, x: &Point) -> Result<[CMat; DIM]> {
    let ginv = inverse4(&gammas.tetrad.metric_at(x)).ok_or(Error::SingularMetric(*x))?;
    let low = gammas.at(x);
    Ok(std::array::from_fn(|a| {
        let mut m = CMat::zeros(gammas.dim());
        for b in 0..DIM {
            m.add_scaled(&low[b], Complex64::new(ginv[a][b], 0.0));
        }
        m
    }))
}

/// Residual of `e^{abcd}e^{efgh} γ_[aγ_e] γ_[bγ_f] γ_[cγ_g] = k g γ^{[h}γ^{d]}`
/// over all 16 free pairs `(d, h)` and all probes. The reference scale is the
/// largest entry of the right-hand side.
pub fn verify_myform(gammas: &GammaSet, probes: &[Point], coefficient: f64) -> Result<Residual> {
    if gammas.dim() != 4 {
        return Err(Error::Domain(format!(
            "the cubic identity is checked on 4x4 Dirac matrices, got the {} basis",
            gammas.basis()
        )));
    }
    let mut res = Residual::new();
    for x in probes {
        let low = gammas.at(x);
        let up = raise_index(gammas, x)?;
        let g = crate::linalg::det4(&gammas.tetrad.metric_at(x));
        let pairs: Pairs<CMat> = pairs_from_fn(|a, e| antisym_product(&low[a], &low[e]));
        for d in 0..DIM {
            for h in 0..DIM {
                let lhs = epsilon_contract_cubic(&pairs, d, h)?;
                let rhs = antisym_product(&up[h], &up[d]).scale_re(coefficient * g);
                res.record((&lhs - &rhs).max_abs(), rhs.max_abs());
            }
        }
    }
    Ok(res)
}
