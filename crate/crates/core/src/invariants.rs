//! The quartic densities built from `φ_ab = γ_[aγ_b] − π_[aπ_b]` and
//! `χ_ab = γ_(aγ_b) − π_(aπ_b)`, their ℓ-expansions, the Dirac leading
//! term, and the `(γ, π)` operator algebra on polynomial test fields.
//!
//! `π_a X = −iℓ(∂_a − Γ_a)X` raises the ℓ-order by one, and
//! `π_[aπ_b] = ½ρ_ab` carries the curvature at order ℓ².

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{raise_index, Basis, GammaSet};
use crate::error::{Error, Result};
use crate::gauge::{field_strengths, gauge_curvature, ConnectionField, GaugeConfig};
use crate::geometry::{christoffel_and_riemann, Real4};
use crate::linalg::{
    antisym_product, det4, epsilon_contract_cubic, epsilon_contract_quartic, epsilon_contract_quartic_trace,
    inverse4, pairs_from_fn, CMat, Pairs, DIM, I,
};
use crate::lseries::LSeries;
use crate::polyfield::{PolyField, Shape};
use crate::probe::Point;

/// `5!`
const FIVE_FACTORIAL: f64 = 120.0;

/// Degree bound for fields acted on by the `(γ, π)` operators: products of
/// connection and field coefficients stay exact up to this degree.
pub const OPERATOR_DEGREE_BOUND: u32 = 10;

/// Normalisation constants of the ℓ-expansions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    /// ℓ² of `√(−φ)`: `c √(−g) Tr{γ̄^aγ̄^bρ̄_ab}`.
    pub eh_trace: f64,
    /// ℓ² of `√(−φ)` with gravity only: `c √(−g) R`.
    pub eh_scalar: f64,
    /// ℓ⁴ of `√(−φ_L)`: `c (g′² W·W + g″² B·B) √(−g)`.
    pub l4_left: f64,
    /// ℓ⁴ of `√(−φ_R)`: `c g″² B·B √(−g)`.
    pub l4_right: f64,
    /// ℓ² of the vacuum sandwich of `√(−χ)U`: `−c √(−g) [mass terms]`.
    pub chi_mass: f64,
    /// ℓ² of `V̄√(−χ)V`: `c √(−g) V̄∂_a∂^aV`.
    pub chi_v: f64,
    /// ℓ¹ of `√(−φ)φ^{ab}Σ_abψ`: `c √(−g) γ^a p_a ψ` with `p_a = −i(∂_a − Γ_a)`.
    pub dirac: f64,
}

impl Default for ExpansionCoefficients {
    fn default() -> Self {
        ExpansionCoefficients {
            eh_trace: 1.0 / 48.0,
            eh_scalar: 1.0 / 24.0,
            l4_left: 1.0 / 320.0,
            l4_right: 1.0 / 80.0,
            chi_mass: 1.0 / 8.0,
            chi_v: 0.5,
            dirac: 2.0,
        }
    }
}

/// `φ_ab` at one point as a series in ℓ.
#[derive(Clone, Debug)]
pub struct PhiTensor {
    basis: Basis,
    pairs: Pairs<LSeries<CMat>>,
}

impl PhiTensor {
    /// `γ_[aγ_b]` at order 0 and `−½ρ_ab` at order 2, where `rho` holds the
    /// ℓ² coefficient of the curvature.
    pub fn new(basis: Basis, gamma: &[CMat; DIM], rho: &Pairs<CMat>, order: usize) -> Result<Self> {
        let n = basis.dim();
        if gamma.iter().any(|g| g.dim() != n) || rho.iter().flatten().any(|r| r.dim() != n) {
            return Err(Error::Shape(format!("the {basis} basis needs {n}x{n} matrices")));
        }
        let pairs = pairs_from_fn(|a, b| {
            let mut coeffs = vec![CMat::zeros(n); order + 1];
            coeffs[0] = antisym_product(&gamma[a], &gamma[b]);
            if order >= 2 {
                coeffs[2] = rho[a][b].scale_re(-0.5);
            }
            LSeries::from_coeffs(coeffs).expect("nonempty")
        });
        Ok(PhiTensor { basis, pairs })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn pairs(&self) -> &Pairs<LSeries<CMat>> {
        &self.pairs
    }

    pub fn order0(&self) -> Pairs<CMat> {
        pairs_from_fn(|a, b| self.pairs[a][b].coeff(0).clone())
    }
}

/// `φ = (1/(5!N)) e^{abcd}e^{efgh} Tr{φ_ae φ_bf φ_cg φ_dh}`.
pub fn phi_density(phi: &PhiTensor) -> Result<LSeries<Complex64>> {
    let n = phi.basis.dim() as f64;
    Ok(epsilon_contract_quartic_trace(&phi.pairs)?.scale(Complex64::new(1.0 / (FIVE_FACTORIAL * n), 0.0)))
}

/// `√(−φ)` at one point with its ingredients.
#[derive(Clone, Debug)]
pub struct SqrtPhi {
    pub density: LSeries<Complex64>,
    pub series: LSeries<Complex64>,
    pub sqrt_neg_g: f64,
    pub curvature: Pairs<CMat>,
    pub gamma: [CMat; DIM],
}

/// `√(−φ)` of a basis at `x`, the curvature being that of `conn`
/// (electroweak plus gravity).
pub fn sqrt_phi_at(gammas: &GammaSet, conn: &ConnectionField, x: &Point, order: usize) -> Result<SqrtPhi> {
    if gammas.basis() != conn.basis() {
        return Err(Error::Shape(format!(
            "gamma matrices of the {} basis with a connection of the {} basis",
            gammas.basis(),
            conn.basis()
        )));
    }
    let gamma = gammas.at(x);
    let rho = gauge_curvature(conn, x)?;
    let phi = PhiTensor::new(gammas.basis(), &gamma, &rho, order)?;
    let density = phi_density(&phi)?;
    let series = density.scale(Complex64::new(-1.0, 0.0)).series_sqrt()?;
    let g = det4(&gammas.tetrad().metric_at(x));
    Ok(SqrtPhi { density, series, sqrt_neg_g: (-g).sqrt(), curvature: rho, gamma })
}

/// The series of `√(−φ)` at `x`.
pub fn sqrt_phi_series(gammas: &GammaSet, conn: &ConnectionField, x: &Point, order: usize) -> Result<LSeries<Complex64>> {
    Ok(sqrt_phi_at(gammas, conn, x, order)?.series)
}

/// `c √(−g) Tr{γ^aγ^bρ_ab}` restricted to one 4×4 block for the L basis.
pub fn eh_trace_prediction(gammas: &GammaSet, rho: &Pairs<CMat>, x: &Point, coefficient: f64) -> Result<Complex64> {
    let up = raise_index(gammas, x)?;
    let g = det4(&gammas.tetrad().metric_at(x));
    let mut tr = Complex64::new(0.0, 0.0);
    for a in 0..DIM {
        for b in 0..DIM {
            tr += (&up[a] * &up[b]).trace_product(&rho[a][b]);
        }
    }
    // The L-basis trace runs over two identical spinor blocks.
    let blocks = (gammas.dim() / 4) as f64;
    Ok(tr * (coefficient * (-g).sqrt() / blocks))
}

/// ℓ² coefficient of `√(−φ)` with gravity only, against the trace form and
/// the coordinate-side scalar curvature.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GravityCoefficientCheck {
    pub computed: f64,
    pub computed_imag: f64,
    pub trace_form: f64,
    pub coordinate_form: f64,
}

pub fn sqrt_phi_gravity_coefficient(
    gammas: &GammaSet,
    conn: &ConnectionField,
    x: &Point,
    coeffs: &ExpansionCoefficients,
) -> Result<GravityCoefficientCheck> {
    let sp = sqrt_phi_at(gammas, conn, x, 2)?;
    let c2 = *sp.series.coeff(2);
    let trace_form = eh_trace_prediction(gammas, &sp.curvature, x, coeffs.eh_trace)?;
    let cb = christoffel_and_riemann(gammas.tetrad(), x)?;
    Ok(GravityCoefficientCheck {
        computed: c2.re,
        computed_imag: c2.im,
        trace_form: trace_form.re,
        coordinate_form: coeffs.eh_scalar * sp.sqrt_neg_g * cb.scalar,
    })
}

/// Predicted ℓ⁴ coefficient of `√(−φ)` from the field strengths at `x`, for
/// the L and R bases.
pub fn field_strength_l4_prediction(
    basis: Basis,
    gauge: &GaugeConfig,
    x: &Point,
    metric: &Real4,
    coeffs: &ExpansionCoefficients,
) -> Result<f64> {
    let fs = field_strengths(gauge)?;
    let (w, b) = fs.at(x);
    let ginv = inverse4(metric).ok_or(Error::SingularMetric(*x))?;
    let (ww, bb) = crate::gauge::contract_squares(&w, &b, &ginv);
    let sqrt_neg_g = (-det4(metric)).sqrt();
    match basis {
        Basis::L => Ok(coeffs.l4_left * (gauge.g1 * gauge.g1 * ww + gauge.g2 * gauge.g2 * bb) * sqrt_neg_g),
        Basis::R => Ok(coeffs.l4_right * gauge.g2 * gauge.g2 * bb * sqrt_neg_g),
        _ => Err(Error::Domain(format!("no field-strength ℓ⁴ term for the {basis} basis"))),
    }
}

/// Commuting-symbol version of the χ density and its inverse.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChiSymbol {
    /// `(1/4!) e e χχχχ` with `χ_ab = g_ab − p_a p_b`.
    pub chi: f64,
    /// `det(g_ab − p_a p_b)` by elimination.
    pub determinant: f64,
    /// `g (1 − p_a p^a)`.
    pub closed_form: f64,
    pub inverse: Real4,
    /// Largest entry of `χ^{ab}χ_bc − δ^a_c`.
    pub inverse_residual: f64,
    /// Largest entry of `χ^{ab} − g^{ab} − p^a p^b`.
    pub expansion_residual: f64,
}

pub fn chi_symbol_determinant(p: [f64; DIM], g: &Real4) -> Result<ChiSymbol> {
    let chi_ab: Real4 = pairs_from_fn(|a, b| g[a][b] - p[a] * p[b]);
    let chi = epsilon_contract_quartic(&chi_ab)? / 24.0;
    let ginv = inverse4(g).ok_or(Error::SingularMetric([0.0; DIM]))?;
    let inverse = inverse4(&chi_ab).ok_or_else(|| Error::Domain("singular χ_ab".into()))?;
    let p_up: [f64; DIM] = std::array::from_fn(|a| (0..DIM).map(|b| ginv[a][b] * p[b]).sum());
    let p_sq: f64 = (0..DIM).map(|a| p[a] * p_up[a]).sum();
    let mut inverse_residual: f64 = 0.0;
    let mut expansion_residual: f64 = 0.0;
    for a in 0..DIM {
        for c in 0..DIM {
            let s: f64 = (0..DIM).map(|b| inverse[a][b] * chi_ab[b][c]).sum();
            inverse_residual = inverse_residual.max((s - if a == c { 1.0 } else { 0.0 }).abs());
            expansion_residual = expansion_residual.max((inverse[a][c] - ginv[a][c] - p_up[a] * p_up[c]).abs());
        }
    }
    Ok(ChiSymbol {
        chi,
        determinant: det4(&chi_ab),
        closed_form: det4(g) * (1.0 - p_sq),
        inverse,
        inverse_residual,
        expansion_residual,
    })
}

/// `γ_a` (multiplication) and `π_a` (covariant derivative, one ℓ-order up)
/// acting on series of polynomial fields. Requires a constant tetrad, so the
/// Christoffel term of `π_b(γ_aψ)` vanishes and the connection is purely
/// electroweak.
#[derive(Clone, Debug)]
pub struct FieldOperators {
    n: usize,
    gammas: [PolyField; DIM],
    connection: [PolyField; DIM],
    metric: Real4,
    order: usize,
}

impl FieldOperators {
    pub fn new(gammas: &GammaSet, conn: &ConnectionField, order: usize) -> Result<Self> {
        if gammas.basis() != conn.basis() {
            return Err(Error::Shape("gamma matrices and connection of different bases".into()));
        }
        if !gammas.tetrad().is_constant() {
            return Err(Error::Domain("operator-level checks need a constant tetrad".into()));
        }
        let promote = |f: &PolyField| f.clone().with_max_degree(OPERATOR_DEGREE_BOUND);
        let mut gs = Vec::with_capacity(DIM);
        let mut cs = Vec::with_capacity(DIM);
        for a in 0..DIM {
            gs.push(promote(&gammas.fields()[a])?);
            cs.push(promote(&conn.ew_fields()[a])?);
        }
        Ok(FieldOperators {
            n: gammas.dim(),
            gammas: gs.try_into().expect("four"),
            connection: cs.try_into().expect("four"),
            metric: gammas.tetrad().metric_at(&[0.0; DIM]),
            order,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn metric(&self) -> &Real4 {
        &self.metric
    }

    /// A test field `X` as an order-0 series.
    pub fn field(&self, x: &PolyField) -> Result<LSeries<PolyField>> {
        if x.shape() != Shape::Vector(self.n) {
            return Err(Error::Shape(format!("test fields must be {}-vectors", self.n)));
        }
        Ok(LSeries::constant(x.clone().with_max_degree(OPERATOR_DEGREE_BOUND)?, self.order))
    }

    /// `∂_a X − Γ_a X`
    pub fn covariant(&self, a: usize, x: &PolyField) -> Result<PolyField> {
        x.differentiate(a).sub(&self.connection[a].mul(x)?)
    }

    pub fn gamma(&self, a: usize, x: &LSeries<PolyField>) -> Result<LSeries<PolyField>> {
        x.try_map(|c| self.gammas[a].mul(c))
    }

    pub fn pi(&self, a: usize, x: &LSeries<PolyField>) -> Result<LSeries<PolyField>> {
        Ok(x.try_map(|c| Ok(self.covariant(a, c)?.scale(-I)))?.shift(1))
    }
}

/// A `(γ, π)` pair expressed as `γ′ = m₀₀γ + m₀₁π`, `π′ = m₁₀γ + m₁₁π` over
/// base operators.
#[derive(Clone, Copy, Debug)]
pub struct PairOperators<'a> {
    base: &'a FieldOperators,
    mix: [[f64; 2]; 2],
}

type Field = LSeries<PolyField>;

impl<'a> PairOperators<'a> {
    pub fn identity(base: &'a FieldOperators) -> Self {
        PairOperators { base, mix: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn with_mix(base: &'a FieldOperators, mix: [[f64; 2]; 2]) -> Self {
        PairOperators { base, mix }
    }

    pub fn mix(&self) -> [[f64; 2]; 2] {
        self.mix
    }

    pub fn base(&self) -> &'a FieldOperators {
        self.base
    }

    fn combine(&self, row: usize, a: usize, x: &Field) -> Result<Field> {
        let [cg, cp] = self.mix[row];
        let mut out = LSeries::zero_like(x.coeff(0), x.order());
        if cg != 0.0 {
            out = out.add(&self.base.gamma(a, x)?.scale(Complex64::new(cg, 0.0)))?;
        }
        if cp != 0.0 {
            out = out.add(&self.base.pi(a, x)?.scale(Complex64::new(cp, 0.0)))?;
        }
        Ok(out)
    }

    pub fn gamma(&self, a: usize, x: &Field) -> Result<Field> {
        self.combine(0, a, x)
    }

    pub fn pi(&self, a: usize, x: &Field) -> Result<Field> {
        self.combine(1, a, x)
    }

    /// `P_a Q_b X − s P_b Q_a X` with the two operators chosen by `rows`,
    /// halved; `s = +1` antisymmetrizes and `s = −1` symmetrizes.
    fn pair(&self, rows: (usize, usize), a: usize, b: usize, x: &Field, sign: f64) -> Result<Field> {
        let ab = self.combine(rows.0, a, &self.combine(rows.1, b, x)?)?;
        let ba = self.combine(rows.0, b, &self.combine(rows.1, a, x)?)?;
        Ok(ab.sub(&ba.scale(Complex64::new(sign, 0.0)))?.scale(Complex64::new(0.5, 0.0)))
    }

    /// `φ_ab X = γ_[aγ_b]X − π_[aπ_b]X`
    pub fn phi(&self, a: usize, b: usize, x: &Field) -> Result<Field> {
        self.pair((0, 0), a, b, x, 1.0)?.sub(&self.pair((1, 1), a, b, x, 1.0)?)
    }

    /// `χ_ab X = γ_(aγ_b)X − π_(aπ_b)X`
    pub fn chi(&self, a: usize, b: usize, x: &Field) -> Result<Field> {
        self.pair((0, 0), a, b, x, -1.0)?.sub(&self.pair((1, 1), a, b, x, -1.0)?)
    }

    /// `Σ_ab X = γ_[aπ_b]X − π_[aγ_b]X`
    pub fn sigma(&self, a: usize, b: usize, x: &Field) -> Result<Field> {
        self.pair((0, 1), a, b, x, 1.0)?.sub(&self.pair((1, 0), a, b, x, 1.0)?)
    }
}

/// Largest coefficient difference between two series of fields.
pub fn field_distance(x: &Field, y: &Field) -> Result<f64> {
    let d = x.sub(y)?;
    Ok(d.coeffs().iter().map(|c| c.max_abs_coefficient()).fold(0.0, f64::max))
}

/// `√(−g)(X − ½ π_aπ^a X)` through ℓ², for the U and V bases on a constant
/// tetrad.
pub fn sqrt_chi_apply(gammas: &GammaSet, conn: &ConnectionField, x: &PolyField) -> Result<Field> {
    if !matches!(conn.basis(), Basis::U | Basis::V) {
        return Err(Error::Domain(format!("√(−χ) acts on scalars, not the {} basis", conn.basis())));
    }
    let ops = FieldOperators::new(gammas, conn, 2)?;
    let ginv = inverse4(ops.metric()).ok_or(Error::SingularMetric([0.0; DIM]))?;
    let sqrt_neg_g = (-det4(ops.metric())).sqrt();
    let xs = ops.field(x)?;
    let mut box_x = LSeries::zero_like(xs.coeff(0), 2);
    for a in 0..DIM {
        for b in 0..DIM {
            if ginv[a][b] == 0.0 {
                continue;
            }
            let t = ops.pi(a, &ops.pi(b, &xs)?)?;
            box_x = box_x.add(&t.scale(Complex64::new(ginv[a][b], 0.0)))?;
        }
    }
    Ok(xs.sub(&box_x.scale(Complex64::new(0.5, 0.0)))?.scale(Complex64::new(sqrt_neg_g, 0.0)))
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `(ŪU)⁻¹ Ū S` at `x`, coefficient by coefficient, with `Ū = U†`.
pub fn sandwich(series: &Field, u: &PolyField, x: &Point) -> Result<LSeries<Complex64>> {
    let uv = u.evaluate(x);
    let norm = dot(&uv, &uv);
    if norm.norm() == 0.0 {
        return Err(Error::Domain("cannot normalise by a vanishing ŪU".into()));
    }
    LSeries::from_coeffs(series.coeffs().iter().map(|c| dot(&uv, &c.evaluate(x)) / norm).collect())
}

/// `V̄ S` at `x` without normalisation.
pub fn bracket(series: &Field, v: &PolyField, x: &Point) -> Result<LSeries<Complex64>> {
    let vv = v.evaluate(x);
    LSeries::from_coeffs(series.coeffs().iter().map(|c| dot(&vv, &c.evaluate(x))).collect())
}

/// `−c √(−g)[g′²(W¹·W¹ + W²·W²) + (g′W³ − g″B)·(g′W³ − g″B)]` at `x`.
pub fn chi_mass_prediction(gauge: &GaugeConfig, metric: &Real4, x: &Point, coefficient: f64) -> Result<f64> {
    let ginv = inverse4(metric).ok_or(Error::SingularMetric(*x))?;
    let (w, b) = gauge.values_at(x);
    let contract = |u: &[f64; DIM], v: &[f64; DIM]| -> f64 {
        (0..DIM).flat_map(|i| (0..DIM).map(move |j| (i, j))).map(|(i, j)| ginv[i][j] * u[i] * v[j]).sum()
    };
    let z: [f64; DIM] = std::array::from_fn(|a| gauge.g1 * w[2][a] - gauge.g2 * b[a]);
    let bracket = gauge.g1 * gauge.g1 * (contract(&w[0], &w[0]) + contract(&w[1], &w[1])) + contract(&z, &z);
    Ok(-coefficient * (-det4(metric)).sqrt() * bracket)
}

/// `c √(−g) V̄ g^{ab}∂_a∂_b V` at `x`.
pub fn chi_v_prediction(v: &PolyField, metric: &Real4, x: &Point, coefficient: f64) -> Result<Complex64> {
    let ginv = inverse4(metric).ok_or(Error::SingularMetric(*x))?;
    let vv = v.evaluate(x);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..DIM {
        for b in 0..DIM {
            if ginv[a][b] != 0.0 {
                acc += dot(&vv, &v.differentiate(a).differentiate(b).evaluate(x)) * ginv[a][b];
            }
        }
    }
    Ok(acc * (coefficient * (-det4(metric)).sqrt()))
}

/// Both sides of the order-ℓ Dirac term at one point.
#[derive(Clone, Debug)]
pub struct DiracCheck {
    /// ℓ¹ coefficient of `√(−φ) φ^{ab} Σ_ab ψ`.
    pub lhs: Vec<Complex64>,
    /// `c √(−g) γ^a p_a ψ`.
    pub rhs: Vec<Complex64>,
    /// `φ^{ab}` at order 0.
    pub phi_up: Pairs<CMat>,
}

impl DiracCheck {
    pub fn residual(&self) -> f64 {
        self.lhs.iter().zip(&self.rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self) -> f64 {
        self.rhs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `φ^{dh} = (4/(5!φ)) e^{abcd}e^{efgh} φ_ae φ_bf φ_cg` at order 0, together
/// with the order-0 density `φ`.
pub fn phi_contravariant_order0(basis: Basis, gamma: &[CMat; DIM]) -> Result<(Pairs<CMat>, f64)> {
    let n = basis.dim();
    let pairs: Pairs<CMat> = pairs_from_fn(|a, b| antisym_product(&gamma[a], &gamma[b]));
    let phi0 = epsilon_contract_quartic_trace(&pairs)? / (FIVE_FACTORIAL * n as f64);
    if phi0.re >= 0.0 {
        return Err(Error::NonPositiveLeading(format!("−φ = {}", -phi0)));
    }
    let mut up: Pairs<CMat> = pairs_from_fn(|_, _| CMat::zeros(n));
    for d in 0..DIM {
        for h in 0..DIM {
            up[d][h] = epsilon_contract_cubic(&pairs, d, h)?.scale(Complex64::new(4.0, 0.0) / (phi0 * FIVE_FACTORIAL));
        }
    }
    Ok((up, phi0.re))
}

/// Order-ℓ coefficient of `√(−φ)φ^{ab}Σ_abψ` against `c √(−g)γ^a p_aψ` at
/// `x`. `π_b(γ_aψ)` includes the Christoffel term, so curved tetrads are
/// admitted.
pub fn dirac_leading_term(
    gammas: &GammaSet,
    conn: &ConnectionField,
    psi: &PolyField,
    x: &Point,
    coefficient: f64,
) -> Result<DiracCheck> {
    let n = gammas.dim();
    if psi.shape() != Shape::Vector(n) || conn.basis() != gammas.basis() {
        return Err(Error::Shape(format!("spinor and connection must match the {} basis", gammas.basis())));
    }
    let gamma = gammas.at(x);
    let up = raise_index(gammas, x)?;
    let d_gamma: Pairs<CMat> = pairs_from_fn(|b, a| gammas.fields()[a].differentiate(b).evaluate_matrix(x));
    let christoffel = christoffel_and_riemann(gammas.tetrad(), x)?.christoffel;
    let conn_at = conn.jet_at(x)?.value;
    let psi0 = psi.evaluate(x);
    let dpsi: [Vec<Complex64>; DIM] = std::array::from_fn(|b| psi.differentiate(b).evaluate(x));
    let sub = |u: &[Complex64], v: &[Complex64]| u.iter().zip(v).map(|(a, b)| a - b).collect::<Vec<_>>();
    let add_into = |acc: &mut Vec<Complex64>, v: &[Complex64], s: Complex64| {
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b * s;
        }
    };
    // p_b ψ = −i(∂_bψ − Γ_bψ)
    let p: [Vec<Complex64>; DIM] =
        std::array::from_fn(|b| sub(&dpsi[b], &conn_at[b].apply(&psi0)).into_iter().map(|z| -I * z).collect());
    // π_b(γ_aψ) at order ℓ: −i(∂_b(γ_aψ) − Γ^c_ab γ_cψ − Γ_b γ_aψ)
    let pi_gamma = |b: usize, a: usize| -> Vec<Complex64> {
        let mut v = d_gamma[b][a].apply(&psi0);
        add_into(&mut v, &gamma[a].apply(&dpsi[b]), Complex64::new(1.0, 0.0));
        for c in 0..DIM {
            add_into(&mut v, &gamma[c].apply(&psi0), Complex64::new(-christoffel[c][a][b], 0.0));
        }
        let gpsi = gamma[a].apply(&psi0);
        add_into(&mut v, &conn_at[b].apply(&gpsi), Complex64::new(-1.0, 0.0));
        v.into_iter().map(|z| -I * z).collect()
    };
    let (phi_up, phi0) = phi_contravariant_order0(gammas.basis(), &gamma)?;
    let sqrt_neg_phi = (-phi0).sqrt();
    let mut lhs = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..DIM {
        for b in 0..DIM {
            if a == b {
                continue;
            }
            // Σ_abψ = ½(γ_a p_bψ − γ_b p_aψ − π_a(γ_bψ) + π_b(γ_aψ))
            let mut s = gamma[a].apply(&p[b]);
            add_into(&mut s, &gamma[b].apply(&p[a]), Complex64::new(-1.0, 0.0));
            add_into(&mut s, &pi_gamma(a, b), Complex64::new(-1.0, 0.0));
            add_into(&mut s, &pi_gamma(b, a), Complex64::new(1.0, 0.0));
            add_into(&mut lhs, &phi_up[a][b].apply(&s), Complex64::new(0.5 * sqrt_neg_phi, 0.0));
        }
    }
    let sqrt_neg_g = (-det4(&gammas.tetrad().metric_at(x))).sqrt();
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..DIM {
        add_into(&mut rhs, &up[a].apply(&p[a]), Complex64::new(coefficient * sqrt_neg_g, 0.0));
    }
    Ok(DiracCheck { lhs, rhs, phi_up })
}
