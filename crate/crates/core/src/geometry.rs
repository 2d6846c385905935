//! Gravity sector: tetrads, the metric and its Levi-Civita curvature on the
//! coordinate side, and the spin connection with its curvature on the
//! spinor side.
//!
//! The tetrad is polynomial. Everything derived from it that involves the
//! inverse metric is evaluated pointwise from exact second-order jets, so
//! Riemann and the derivative of the spin connection carry no
//! finite-difference error.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::clifford::{delta_basis, delta_commutators};
use crate::error::{Error, Result};
use crate::jet::{invert, Jet, JetMatrix};
use crate::linalg::{det4, kron, pairs_from_fn, CMat, Pairs, DIM, I};
use crate::lseries::LSeries;
use crate::polyfield::PolyField;
use crate::probe::Point;
use crate::residual::Residual;

/// Minkowski signature `(+,−,−,−)`.
pub const ETA: [f64; DIM] = [1.0, -1.0, -1.0, -1.0];

/// Smallest accepted `|det e_a^A|` on the probe domain.
pub const MIN_TETRAD_DET: f64 = 1e-3;

/// Relative tolerance of the metricity gate applied by [`spin_connection`].
pub const METRICITY_TOLERANCE: f64 = 1e-9;

pub type Real4 = [[f64; DIM]; DIM];
/// `t[c][a][b]`, e.g. `Γ^c_ab`.
pub type Real3Index = [[[f64; DIM]; DIM]; DIM];
/// `t[a][b][c][d]`, e.g. `R^a_bcd`.
pub type Real4Index = [[[[f64; DIM]; DIM]; DIM]; DIM];

fn identity4() -> Real4 {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

/// Tetrad `e_a^A`: coordinate index `a` first, frame index `A` second.
#[derive(Clone, Debug, PartialEq)]
pub struct TetradField {
    e: [[PolyField; DIM]; DIM],
}

impl TetradField {
    pub fn new(e: [[PolyField; DIM]; DIM]) -> Result<Self> {
        for row in &e {
            for f in row {
                if f.shape() != crate::polyfield::Shape::Scalar {
                    return Err(Error::Shape("tetrad components must be scalar fields".into()));
                }
            }
        }
        Ok(TetradField { e })
    }

    pub fn flat() -> Self {
        Self::constant(identity4())
    }

    pub fn constant(m: Real4) -> Self {
        TetradField { e: pairs_from_fn(|a, b| PolyField::real(m[a][b])) }
    }

    pub fn diagonal(d: [f64; DIM]) -> Self {
        Self::constant(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { d[i] } else { 0.0 })))
    }

    /// `e_a^A = (1 + ε x^axis) δ_a^A`.
    pub fn conformal(eps: f64, axis: usize) -> Self {
        let factor = PolyField::real(1.0)
            .add(&PolyField::coordinate(axis).scale(Complex64::new(eps, 0.0)))
            .expect("scalar fields");
        TetradField {
            e: pairs_from_fn(|a, b| if a == b { factor.clone() } else { PolyField::zero(crate::polyfield::Shape::Scalar) }),
        }
    }

    /// `δ_a^A` plus independent random polynomials of the given degree with
    /// coefficients in `[-amplitude, amplitude]` (no constant shift).
    pub fn random_perturbation(rng: &mut impl Rng, amplitude: f64, degree: u32) -> Self {
        TetradField {
            e: pairs_from_fn(|a, b| {
                PolyField::random_scalar(rng, degree, amplitude, if a == b { 1.0 } else { 0.0 })
            }),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        TetradField { e: pairs_from_fn(|a, b| self.e[a][b].scale(Complex64::new(s, 0.0))) }
    }

    /// `e'_a^A = e_a^B Λ_B^A` for a constant frame transformation `Λ`.
    pub fn frame_transformed(&self, lambda: &Real4) -> Self {
        let e = pairs_from_fn(|a, big_a| {
            (0..DIM).fold(PolyField::zero(crate::polyfield::Shape::Scalar), |acc, b| {
                acc.add(&self.e[a][b].scale(Complex64::new(lambda[b][big_a], 0.0)))
                    .expect("scalar fields")
            })
        });
        TetradField { e }
    }

    pub fn component(&self, a: usize, big_a: usize) -> &PolyField {
        &self.e[a][big_a]
    }

    pub fn components(&self) -> &[[PolyField; DIM]; DIM] {
        &self.e
    }

    pub fn is_constant(&self) -> bool {
        self.e.iter().flatten().all(|f| f.degree().unwrap_or(0) == 0)
    }

    pub fn frame_at(&self, x: &Point) -> Real4 {
        pairs_from_fn(|a, b| self.e[a][b].evaluate_scalar(x).re)
    }

    /// `g_ab = e_a^A η_AB e_b^B`.
    pub fn metric_at(&self, x: &Point) -> Real4 {
        let e = self.frame_at(x);
        pairs_from_fn(|a, b| (0..DIM).map(|k| ETA[k] * e[a][k] * e[b][k]).sum())
    }

    pub fn det_at(&self, x: &Point) -> f64 {
        det4(&self.frame_at(x))
    }

    pub fn check_nondegenerate(&self, points: &[Point]) -> Result<()> {
        for p in points {
            let det = self.det_at(p);
            if !(det.abs() >= MIN_TETRAD_DET) {
                return Err(Error::DegenerateTetrad { det, point: *p });
            }
        }
        Ok(())
    }

    /// `γ̄_a = e_a^A Δ_A` at `x`.
    pub fn gamma_bar_at(&self, x: &Point) -> [CMat; DIM] {
        frame_gammas(&self.frame_at(x))
    }

    fn jets(&self, x: &Point) -> [[Jet; DIM]; DIM] {
        pairs_from_fn(|a, b| self.e[a][b].jet(x, 2))
    }
}

fn frame_gammas(e: &Real4) -> [CMat; DIM] {
    let delta = delta_basis();
    std::array::from_fn(|a| {
        let mut m = CMat::zeros(4);
        for (k, d) in delta.iter().enumerate() {
            m.add_scaled(d, Complex64::new(e[a][k], 0.0));
        }
        m
    })
}

/// Lorentz boost with rapidity `eta` along spatial `axis` (1..=3).
pub fn boost(axis: usize, eta: f64) -> Real4 {
    let mut m = identity4();
    m[0][0] = eta.cosh();
    m[axis][axis] = eta.cosh();
    m[0][axis] = eta.sinh();
    m[axis][0] = eta.sinh();
    m
}

/// Spatial rotation by `angle` in the `(i, j)` plane, `1 <= i, j <= 3`.
pub fn rotation(i: usize, j: usize, angle: f64) -> Real4 {
    let mut m = identity4();
    m[i][i] = angle.cos();
    m[j][j] = angle.cos();
    m[i][j] = -angle.sin();
    m[j][i] = angle.sin();
    m
}

/// Jets of the metric, its inverse and the Christoffel symbols at one point.
struct MetricJets {
    e: [[Jet; DIM]; DIM],
    g: JetMatrix,
    ginv: JetMatrix,
    /// `[c][a][b] = Γ^c_ab`, first order.
    christoffel: [[[Jet; DIM]; DIM]; DIM],
}

impl MetricJets {
    fn at(tetrad: &TetradField, x: &Point) -> Result<Self> {
        let e = tetrad.jets(x);
        let det = det4(&e.map(|r| r.map(|j| j.value())));
        if !(det.abs() >= MIN_TETRAD_DET) {
            return Err(Error::DegenerateTetrad { det, point: *x });
        }
        let g: JetMatrix = pairs_from_fn(|a, b| (0..DIM).map(|k| (e[a][k] * e[b][k]).scale(ETA[k])).sum());
        let ginv = invert(&g).ok_or(Error::SingularMetric(*x))?;
        // dg[c][a][b] = ∂_c g_ab
        let dg: [[[Jet; DIM]; DIM]; DIM] = std::array::from_fn(|c| pairs_from_fn(|a, b| g[a][b].derivative(c)));
        let christoffel = std::array::from_fn(|c| {
            pairs_from_fn(|a, b| {
                (0..DIM)
                    .map(|d| ginv[c][d] * (dg[a][d][b] + dg[b][d][a] - dg[d][a][b]))
                    .sum::<Jet>()
                    .scale(0.5)
            })
        });
        Ok(MetricJets { e, g, ginv, christoffel })
    }
}

/// Coordinate-side curvature at one point.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureBundle {
    pub point: Point,
    pub metric: Real4,
    pub inverse_metric: Real4,
    pub det_metric: f64,
    /// `[c][a][b] = Γ^c_ab`
    pub christoffel: Real3Index,
    /// `[d][c][a][b] = ∂_d Γ^c_ab`
    pub d_christoffel: Real4Index,
    /// `[a][b][c][d] = R^a_bcd`
    pub riemann: Real4Index,
    /// `R_bd = R^a_bad`
    pub ricci: Real4,
    pub scalar: f64,
}

impl CurvatureBundle {
    /// `R_abcd = g_ae R^e_bcd`
    pub fn riemann_lowered(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        (0..DIM).map(|e| self.metric[a][e] * self.riemann[e][b][c][d]).sum()
    }

    /// `R_ac − ½ g_ac R`
    pub fn einstein(&self, a: usize, c: usize) -> f64 {
        self.ricci[a][c] - 0.5 * self.metric[a][c] * self.scalar
    }

    pub fn max_abs_ricci(&self) -> f64 {
        self.ricci.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_riemann(&self) -> f64 {
        self.riemann.iter().flatten().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Riemann from Christoffels and their first derivatives:
/// `R^a_bcd = ∂_c Γ^a_bd − ∂_d Γ^a_bc − Γ^e_bc Γ^a_ed + Γ^e_bd Γ^a_ec`.
pub fn riemann_from_christoffel(gamma: &Real3Index, d_gamma: &Real4Index) -> Real4Index {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            pairs_from_fn(|c, d| {
                let mut r = d_gamma[c][a][b][d] - d_gamma[d][a][b][c];
                for e in 0..DIM {
                    r += -gamma[e][b][c] * gamma[a][e][d] + gamma[e][b][d] * gamma[a][e][c];
                }
                r
            })
        })
    })
}

fn curvature_from_jets(mj: &MetricJets, x: &Point) -> CurvatureBundle {
    let christoffel: Real3Index = mj.christoffel.map(|m| m.map(|r| r.map(|j| j.value())));
    let d_christoffel: Real4Index =
        std::array::from_fn(|d| mj.christoffel.map(|m| m.map(|r| r.map(|j| j.grad(d)))));
    let riemann = riemann_from_christoffel(&christoffel, &d_christoffel);
    let ricci: Real4 = pairs_from_fn(|b, d| (0..DIM).map(|a| riemann[a][b][a][d]).sum());
    let metric = mj.g.map(|r| r.map(|j| j.value()));
    let inverse_metric = mj.ginv.map(|r| r.map(|j| j.value()));
    let scalar = (0..DIM)
        .flat_map(|b| (0..DIM).map(move |d| (b, d)))
        .map(|(b, d)| inverse_metric[b][d] * ricci[b][d])
        .sum();
    CurvatureBundle {
        point: *x,
        det_metric: det4(&metric),
        metric,
        inverse_metric,
        christoffel,
        d_christoffel,
        riemann,
        ricci,
        scalar,
    }
}

/// Christoffel symbols and Levi-Civita curvature of `g_ab = e_a^A e_Ab` at `x`.
pub fn christoffel_and_riemann(tetrad: &TetradField, x: &Point) -> Result<CurvatureBundle> {
    let mj = MetricJets::at(tetrad, x)?;
    Ok(curvature_from_jets(&mj, x))
}

/// Matrix connection `Γ_a` with first derivatives at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionJet {
    pub value: [CMat; DIM],
    /// `[b][a] = ∂_b Γ_a`
    pub derivative: [[CMat; DIM]; DIM],
}

impl ConnectionJet {
    pub fn zero(n: usize) -> Self {
        ConnectionJet {
            value: std::array::from_fn(|_| CMat::zeros(n)),
            derivative: pairs_from_fn(|_, _| CMat::zeros(n)),
        }
    }

    /// Evaluates four matrix-valued polynomial components and their gradients.
    pub fn from_polys(fields: &[PolyField; DIM], x: &Point) -> Self {
        ConnectionJet {
            value: std::array::from_fn(|a| fields[a].evaluate_matrix(x)),
            derivative: pairs_from_fn(|b, a| fields[a].differentiate(b).evaluate_matrix(x)),
        }
    }

    pub fn dim(&self) -> usize {
        self.value[0].dim()
    }

    /// `1̂_n ⊗ Γ_a`
    pub fn kron_identity_left(&self, n: usize) -> Self {
        let id = CMat::identity(n);
        ConnectionJet {
            value: self.value.each_ref().map(|m| kron(&id, m)),
            derivative: self.derivative.each_ref().map(|r| r.each_ref().map(|m| kron(&id, m))),
        }
    }

    pub fn add(&self, other: &ConnectionJet) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "cannot add connections of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(ConnectionJet {
            value: std::array::from_fn(|a| &self.value[a] + &other.value[a]),
            derivative: pairs_from_fn(|b, a| &self.derivative[b][a] + &other.derivative[b][a]),
        })
    }

    /// ℓ² coefficient of `ρ_ab = 2π_[aπ_b]`:
    /// `∂_a Γ_b − ∂_b Γ_a − [Γ_a, Γ_b]`.
    pub fn curvature(&self) -> Pairs<CMat> {
        pairs_from_fn(|a, b| {
            let mut r = &self.derivative[a][b] - &self.derivative[b][a];
            r -= &self.value[a].commutator(&self.value[b]);
            r
        })
    }
}

/// Spin connection `Γ̄_a = f_a^{AB} Δ_[AΔ_B]` at one point.
#[derive(Clone, Debug)]
pub struct SpinConnection {
    pub point: Point,
    /// `[a][A][B] = f_a^{AB}`, antisymmetric in `(A, B)`.
    pub coefficients: [[[f64; DIM]; DIM]; DIM],
    pub jet: ConnectionJet,
    /// Largest entry of `∂_bγ̄_a − Γ^c_ab γ̄_c − [Γ̄_b, γ̄_a]` relative to
    /// the largest entry of `∂_bγ̄_a` (absolute if that vanishes).
    pub metricity_residual: f64,
}

impl SpinConnection {
    pub fn matrices(&self) -> &[CMat; DIM] {
        &self.jet.value
    }
}

/// Everything the spinor-side identities need at one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub curvature: CurvatureBundle,
    pub spin: SpinConnection,
    /// `γ̄_a`
    pub gamma: [CMat; DIM],
    /// `[b][a] = ∂_b γ̄_a`
    pub d_gamma: [[CMat; DIM]; DIM],
    /// `γ̄^a = g^{ab} γ̄_b`
    pub gamma_up: [CMat; DIM],
    /// `[b][a] = ∂_b γ̄^a`
    pub d_gamma_up: [[CMat; DIM]; DIM],
    pub sqrt_neg_g: f64,
    /// `∂_b ln √(−g) = ½ g^{cd} ∂_b g_cd`
    pub d_ln_sqrt_neg_g: [f64; DIM],
    /// ℓ² coefficient of `ρ̄_ab`.
    pub rho_bar: Pairs<CMat>,
}

impl PointGeometry {
    pub fn at(tetrad: &TetradField, x: &Point) -> Result<Self> {
        let mj = MetricJets::at(tetrad, x)?;
        let curvature = curvature_from_jets(&mj, x);
        let delta = delta_basis();
        let e_val = mj.e.map(|r| r.map(|j| j.value()));
        let gamma = frame_gammas(&e_val);
        let d_gamma = pairs_from_fn(|b, a| {
            let mut m = CMat::zeros(4);
            for (k, d) in delta.iter().enumerate() {
                m.add_scaled(d, Complex64::new(mj.e[a][k].grad(b), 0.0));
            }
            m
        });
        let spin = spin_from_jets(&mj, x, &gamma, &d_gamma)?;
        let ginv = curvature.inverse_metric;
        let gamma_up = std::array::from_fn(|a| raise(&ginv, &gamma, a));
        let d_gamma_up = pairs_from_fn(|c, a| {
            let mut m = CMat::zeros(4);
            for b in 0..DIM {
                m.add_scaled(&gamma[b], Complex64::new(mj.ginv[a][b].grad(c), 0.0));
                m.add_scaled(&d_gamma[c][b], Complex64::new(ginv[a][b], 0.0));
            }
            m
        });
        let d_ln_sqrt_neg_g = std::array::from_fn(|b| {
            0.5 * (0..DIM)
                .flat_map(|c| (0..DIM).map(move |d| (c, d)))
                .map(|(c, d)| ginv[c][d] * mj.g[c][d].grad(b))
                .sum::<f64>()
        });
        let rho_bar = spin.jet.curvature();
        Ok(PointGeometry {
            sqrt_neg_g: (-curvature.det_metric).sqrt(),
            curvature,
            spin,
            gamma,
            d_gamma,
            gamma_up,
            d_gamma_up,
            d_ln_sqrt_neg_g,
            rho_bar,
        })
    }
}

fn raise(ginv: &Real4, lower: &[CMat; DIM], a: usize) -> CMat {
    let mut m = CMat::zeros(lower[0].dim());
    for b in 0..DIM {
        m.add_scaled(&lower[b], Complex64::new(ginv[a][b], 0.0));
    }
    m
}

fn spin_from_jets(mj: &MetricJets, x: &Point, gamma: &[CMat; DIM], d_gamma: &[[CMat; DIM]; DIM]) -> Result<SpinConnection> {
    // ∇_a e_c^A = ∂_a e_c^A − Γ^d_ac e_d^A, first order.
    let nabla: [[[Jet; DIM]; DIM]; DIM] = std::array::from_fn(|a| {
        pairs_from_fn(|c, big_a| {
            mj.e[c][big_a].derivative(a) - (0..DIM).map(|d| mj.christoffel[d][a][c] * mj.e[d][big_a]).sum::<Jet>()
        })
    });
    // e^{Bc} = g^{cd} e_d^B
    let e_up: [[Jet; DIM]; DIM] = pairs_from_fn(|big_b, c| (0..DIM).map(|d| mj.ginv[c][d] * mj.e[d][big_b]).sum());
    let raw: [[[Jet; DIM]; DIM]; DIM] = std::array::from_fn(|a| {
        pairs_from_fn(|big_a, big_b| (0..DIM).map(|c| e_up[big_b][c] * nabla[a][c][big_a]).sum::<Jet>().scale(0.25))
    });
    let f: [[[Jet; DIM]; DIM]; DIM] =
        std::array::from_fn(|a| pairs_from_fn(|p, q| (raw[a][p][q] - raw[a][q][p]).scale(0.5)));

    let generators = delta_commutators();
    let assemble = |coef: &dyn Fn(usize, usize) -> f64| {
        let mut m = CMat::zeros(4);
        for p in 0..DIM {
            for q in 0..DIM {
                let c = coef(p, q);
                if c != 0.0 {
                    m.add_scaled(&generators[p][q], Complex64::new(c, 0.0));
                }
            }
        }
        m
    };
    let value: [CMat; DIM] = std::array::from_fn(|a| assemble(&|p, q| f[a][p][q].value()));
    let derivative = pairs_from_fn(|b, a| assemble(&|p, q| f[a][p][q].grad(b)));
    let jet = ConnectionJet { value, derivative };

    let mut res = Residual::new();
    for a in 0..DIM {
        for b in 0..DIM {
            let mut r = d_gamma[b][a].clone();
            for c in 0..DIM {
                r.add_scaled(&gamma[c], Complex64::new(-mj.christoffel[c][a][b].value(), 0.0));
            }
            r -= &jet.value[b].commutator(&gamma[a]);
            res.record(r.max_abs(), d_gamma[b][a].max_abs());
        }
    }
    let metricity_residual = res.relative();
    if !(metricity_residual <= METRICITY_TOLERANCE) {
        return Err(Error::ResidualTooLarge {
            what: "metricity",
            residual: metricity_residual,
            tolerance: METRICITY_TOLERANCE,
        });
    }
    Ok(SpinConnection {
        point: *x,
        coefficients: f.map(|m| m.map(|r| r.map(|j| j.value()))),
        jet,
        metricity_residual,
    })
}

/// Spin connection of the tetrad at `x`, gated on metricity.
pub fn spin_connection(tetrad: &TetradField, x: &Point) -> Result<SpinConnection> {
    Ok(PointGeometry::at(tetrad, x)?.spin)
}

/// ℓ² coefficient of the spin curvature `ρ̄_ab`.
pub fn spin_curvature(conn: &SpinConnection) -> Pairs<CMat> {
    conn.jet.curvature()
}

/// Lifts an ℓ²-coefficient field into a series truncated at `order`.
pub fn as_ell_squared(rho: &Pairs<CMat>, order: usize) -> Pairs<LSeries<CMat>> {
    pairs_from_fn(|a, b| LSeries::monomial(rho[a][b].clone(), 2, order))
}

/// Normalisation constants of the curvature trace identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GravityCoefficients {
    /// `ρ̄_cd = −c R_abcd γ̄^aγ̄^b`
    pub rho_riemann: f64,
    /// `R = c Tr{γ̄^aγ̄^bρ̄_ab}`
    pub scalar_trace: f64,
    /// `R_bd = c Tr{γ̄^a[γ̄_b, ρ̄_ad]}`
    pub ricci_trace: f64,
    /// `¼Tr{γ̄_c([γ̄^b, ρ̄_ab] − ¼γ̄_a Tr{γ̄^eγ̄^fρ̄_ef})} = c (R_ac − ½g_ac R)`
    pub einstein: f64,
}

impl Default for GravityCoefficients {
    fn default() -> Self {
        GravityCoefficients { rho_riemann: 0.25, scalar_trace: 0.5, ricci_trace: 0.25, einstein: 1.0 }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SpinIdentityReport {
    pub metricity: Residual,
    pub riemann_commutator: Residual,
    pub rho_riemann: Residual,
    pub scalar_trace: Residual,
    pub ricci_trace: Residual,
}

impl SpinIdentityReport {
    pub fn entries(&self) -> [(&'static str, Residual); 5] {
        [
            ("metricity", self.metricity),
            ("riemann-commutator", self.riemann_commutator),
            ("rho-riemann", self.rho_riemann),
            ("scalar-trace", self.scalar_trace),
            ("ricci-trace", self.ricci_trace),
        ]
    }

    pub fn max_relative(&self) -> f64 {
        self.entries().iter().map(|(_, r)| r.relative()).fold(0.0, worst)
    }
}

/// `max` that propagates NaN.
pub fn worst(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Residuals of the identities tying the spin curvature to the
/// coordinate-side Riemann tensor, as ℓ² coefficients.
pub fn verify_spin_curvature_identities(
    tetrad: &TetradField,
    probes: &[Point],
    coeffs: &GravityCoefficients,
) -> Result<SpinIdentityReport> {
    let mut rep = SpinIdentityReport::default();
    for x in probes {
        let pg = PointGeometry::at(tetrad, x)?;
        spin_identities_at(&pg, coeffs, &mut rep);
    }
    Ok(rep)
}

fn spin_identities_at(pg: &PointGeometry, coeffs: &GravityCoefficients, rep: &mut SpinIdentityReport) {
    let cb = &pg.curvature;
    let rho = &pg.rho_bar;
    let c = |v: f64| Complex64::new(v, 0.0);
    rep.metricity.record(pg.spin.metricity_residual, 1.0);

    // R^a_bcd γ̄_a − [γ̄_b, ρ̄_cd]
    for b in 0..DIM {
        for cc in 0..DIM {
            for d in 0..DIM {
                let mut lhs = CMat::zeros(4);
                for a in 0..DIM {
                    lhs.add_scaled(&pg.gamma[a], c(cb.riemann[a][b][cc][d]));
                }
                let r = &lhs - &pg.gamma[b].commutator(&rho[cc][d]);
                rep.riemann_commutator.record(r.max_abs(), lhs.max_abs());
            }
        }
    }

    // ρ̄_cd + k R_abcd γ̄^aγ̄^b
    let gg: Pairs<CMat> = pairs_from_fn(|a, b| &pg.gamma_up[a] * &pg.gamma_up[b]);
    for cc in 0..DIM {
        for d in 0..DIM {
            let mut r = rho[cc][d].clone();
            for a in 0..DIM {
                for b in 0..DIM {
                    r.add_scaled(&gg[a][b], c(coeffs.rho_riemann * cb.riemann_lowered(a, b, cc, d)));
                }
            }
            rep.rho_riemann.record(r.max_abs(), rho[cc][d].max_abs());
        }
    }

    // R − k Tr{γ̄^aγ̄^bρ̄_ab}
    let tr: Complex64 = (0..DIM)
        .flat_map(|a| (0..DIM).map(move |b| (a, b)))
        .map(|(a, b)| gg[a][b].trace_product(&rho[a][b]))
        .sum();
    rep.scalar_trace.record((c(cb.scalar) - tr * coeffs.scalar_trace).norm(), cb.scalar);

    // R_bd − k Tr{γ̄^a[γ̄_b, ρ̄_ad]}
    for b in 0..DIM {
        for d in 0..DIM {
            let t: Complex64 = (0..DIM)
                .map(|a| pg.gamma_up[a].trace_product(&pg.gamma[b].commutator(&rho[a][d])))
                .sum();
            rep.ricci_trace.record((c(cb.ricci[b][d]) - t * coeffs.ricci_trace).norm(), cb.max_abs_ricci());
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FieldEquationReport {
    /// `(γ̄^{[a}γ̄^{b]})_{;b}`
    pub divergence: Residual,
    /// Trace construction against `c (R_ac − ½ g_ac R)`.
    pub einstein: Residual,
}

/// `¼Tr{γ̄_c([γ̄^b, ρ̄_ab] − ¼γ̄_a Tr{γ̄^eγ̄^fρ̄_ef})}`, ℓ² coefficient.
pub fn einstein_trace(pg: &PointGeometry) -> Real4 {
    let rho = &pg.rho_bar;
    let full: Complex64 = (0..DIM)
        .flat_map(|e| (0..DIM).map(move |f| (e, f)))
        .map(|(e, f)| (&pg.gamma_up[e] * &pg.gamma_up[f]).trace_product(&rho[e][f]))
        .sum();
    pairs_from_fn(|a, cc| {
        let mut inner = CMat::zeros(4);
        for b in 0..DIM {
            inner += &pg.gamma_up[b].commutator(&rho[a][b]);
        }
        inner.add_scaled(&pg.gamma[a], -full * 0.25);
        (pg.gamma[cc].trace_product(&inner) * 0.25).re
    })
}

/// Least-squares constant `k` in `einstein_trace ≈ k (R_ac − ½ g_ac R)`
/// over the probes. Returns `None` when the Einstein tensor vanishes on all
/// probes.
pub fn fit_einstein_normalization(tetrad: &TetradField, probes: &[Point]) -> Result<Option<f64>> {
    let (mut num, mut den) = (0.0, 0.0);
    for x in probes {
        let pg = PointGeometry::at(tetrad, x)?;
        let t = einstein_trace(&pg);
        for a in 0..DIM {
            for cc in 0..DIM {
                let g = pg.curvature.einstein(a, cc);
                num += t[a][cc] * g;
                den += g * g;
            }
        }
    }
    Ok((den > 1e-24).then(|| num / den))
}

/// Residuals of the divergence identity implied by metricity and of the
/// Einstein-tensor trace identity.
pub fn verify_field_equation_identity(
    tetrad: &TetradField,
    probes: &[Point],
    coeffs: &GravityCoefficients,
) -> Result<FieldEquationReport> {
    let mut rep = FieldEquationReport::default();
    for x in probes {
        let pg = PointGeometry::at(tetrad, x)?;
        field_equation_at(&pg, coeffs, &mut rep);
    }
    Ok(rep)
}

fn field_equation_at(pg: &PointGeometry, coeffs: &GravityCoefficients, rep: &mut FieldEquationReport) {
    let up = &pg.gamma_up;
    let dup = &pg.d_gamma_up;
    for a in 0..DIM {
        let mut r = CMat::zeros(4);
        let mut scale: f64 = 0.0;
        for b in 0..DIM {
            // T^{ab} = ½(γ̄^aγ̄^b − γ̄^bγ̄^a)
            let t = up[a].commutator(&up[b]).scale_re(0.5);
            let forward = &(&dup[b][a] * &up[b]) + &(&up[a] * &dup[b][b]);
            let backward = &(&dup[b][b] * &up[a]) + &(&up[b] * &dup[b][a]);
            let dt = (&forward - &backward).scale_re(0.5);
            scale = scale.max(dt.max_abs());
            r += &dt;
            r.add_scaled(&t, Complex64::new(pg.d_ln_sqrt_neg_g[b], 0.0));
            r -= &pg.spin.jet.value[b].commutator(&t);
        }
        rep.divergence.record(r.max_abs(), scale);
    }

    let t = einstein_trace(pg);
    let cb = &pg.curvature;
    for a in 0..DIM {
        for cc in 0..DIM {
            rep.einstein
                .record((t[a][cc] - coeffs.einstein * cb.einstein(a, cc)).abs(), cb.max_abs_ricci());
        }
    }
}

/// `−(i/2) c_a(x) 1̂_n` as a connection, for abelian checks.
pub fn abelian_connection(c: &[PolyField; DIM], n: usize) -> Result<[PolyField; DIM]> {
    let unit = CMat::identity(n).scale(-I * 0.5);
    let mut out: Vec<PolyField> = Vec::with_capacity(DIM);
    for f in c {
        out.push(PolyField::scalar_times_matrix(f, &unit)?);
    }
    Ok(out.try_into().expect("four components"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn probes(seed: u64, n: usize) -> Vec<Point> {
        sample(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.5)
    }

    fn random_tetrad(seed: u64) -> TetradField {
        TetradField::random_perturbation(&mut ChaCha8Rng::seed_from_u64(seed), 0.1, 2)
    }

    #[test]
    fn flat_tetrad_has_no_curvature() {
        let t = TetradField::flat();
        let x = [0.1, 0.2, -0.3, 0.4];
        let cb = christoffel_and_riemann(&t, &x).unwrap();
        assert!(cb.christoffel.iter().flatten().flatten().all(|v| *v == 0.0));
        assert_eq!(cb.max_abs_riemann(), 0.0);
        assert_eq!(cb.scalar, 0.0);
        assert_eq!(cb.metric, pairs_from_fn(|a, b| if a == b { ETA[a] } else { 0.0 }));
        let sc = spin_connection(&t, &x).unwrap();
        assert!(sc.matrices().iter().all(|m| m.is_zero()));
    }

    #[test]
    fn constant_lorentz_frame_is_parallel() {
        let lambda = {
            let b = boost(1, 0.4);
            let r = rotation(2, 3, 0.7);
            pairs_from_fn(|i, j| (0..DIM).map(|k| b[i][k] * r[k][j]).sum())
        };
        let t = TetradField::flat().frame_transformed(&lambda);
        let x = [0.0, 0.3, 0.1, -0.2];
        let g = t.metric_at(&x);
        for a in 0..DIM {
            for b in 0..DIM {
                let expected = if a == b { ETA[a] } else { 0.0 };
                assert!((g[a][b] - expected).abs() < 1e-13);
            }
        }
        let sc = spin_connection(&t, &x).unwrap();
        assert!(sc.matrices().iter().all(|m| m.is_zero()));
    }

    #[test]
    fn riemann_matches_finite_differences_of_christoffels() {
        let t = TetradField::conformal(0.2, 1);
        let h = 1e-4;
        for x in probes(11, 5) {
            let cb = christoffel_and_riemann(&t, &x).unwrap();
            let d_gamma: Real4Index = std::array::from_fn(|d| {
                let mut xp = x;
                let mut xm = x;
                xp[d] += h;
                xm[d] -= h;
                let gp = christoffel_and_riemann(&t, &xp).unwrap().christoffel;
                let gm = christoffel_and_riemann(&t, &xm).unwrap().christoffel;
                std::array::from_fn(|c| pairs_from_fn(|a, b| (gp[c][a][b] - gm[c][a][b]) / (2.0 * h)))
            });
            let fd = riemann_from_christoffel(&cb.christoffel, &d_gamma);
            for (u, v) in fd.iter().flatten().flatten().flatten().zip(cb.riemann.iter().flatten().flatten().flatten()) {
                assert!((u - v).abs() < 1e-6, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn metric_compatibility_and_bianchi() {
        for seed in 0..5 {
            let t = random_tetrad(seed);
            for x in probes(100 + seed, 4) {
                let mj = MetricJets::at(&t, &x).unwrap();
                let cb = curvature_from_jets(&mj, &x);
                for c in 0..DIM {
                    for a in 0..DIM {
                        for b in 0..DIM {
                            let mut r = mj.g[a][b].grad(c);
                            for d in 0..DIM {
                                r -= cb.christoffel[d][c][a] * cb.metric[d][b] + cb.christoffel[d][c][b] * cb.metric[a][d];
                            }
                            assert!(r.abs() < 1e-10);
                        }
                    }
                }
                for a in 0..DIM {
                    for b in 0..DIM {
                        for c in 0..DIM {
                            for d in 0..DIM {
                                let r = &cb.riemann;
                                assert!((r[a][b][c][d] + r[a][b][d][c]).abs() < 1e-12);
                                let bianchi = r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c];
                                assert!(bianchi.abs() < 1e-9);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn spin_coefficients_are_antisymmetric_and_metric() {
        for seed in 0..5 {
            let t = random_tetrad(seed);
            for x in probes(200 + seed, 10) {
                let sc = spin_connection(&t, &x).unwrap();
                assert!(sc.metricity_residual < 1e-9);
                for a in 0..DIM {
                    for p in 0..DIM {
                        for q in 0..DIM {
                            assert_eq!(sc.coefficients[a][p][q], -sc.coefficients[a][q][p]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn abelian_curvature_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c: [PolyField; DIM] = std::array::from_fn(|_| PolyField::random_scalar(&mut rng, 2, 1.0, 0.3));
        let conn = abelian_connection(&c, 4).unwrap();
        for x in probes(6, 5) {
            let rho = ConnectionJet::from_polys(&conn, &x).curvature();
            for a in 0..DIM {
                for b in 0..DIM {
                    // −i ∂_[a c_b] with weight ½ on both terms, times 2ℓ²/ℓ².
                    let curl = c[b].differentiate(a).evaluate_scalar(&x) - c[a].differentiate(b).evaluate_scalar(&x);
                    let expected = CMat::scalar(4, -I * 0.5 * curl);
                    assert!(crate::linalg::max_abs_diff(&rho[a][b], &expected) < 1e-11);
                }
            }
        }
    }

    #[test]
    fn zero_connection_has_zero_curvature() {
        let rho = ConnectionJet::zero(8).curvature();
        assert!(rho.iter().flatten().all(|m| m.is_zero()));
    }

    #[test]
    fn spin_curvature_is_antisymmetric() {
        let t = random_tetrad(9);
        let x = [0.1, -0.1, 0.2, 0.3];
        let rho = spin_curvature(&spin_connection(&t, &x).unwrap());
        for a in 0..DIM {
            for b in 0..DIM {
                assert!((&rho[a][b] + &rho[b][a]).is_zero());
            }
        }
    }

    #[test]
    fn identities_vanish_exactly_for_flat() {
        let t = TetradField::flat();
        let p = probes(1, 3);
        let rep = verify_spin_curvature_identities(&t, &p, &GravityCoefficients::default()).unwrap();
        assert!(rep.entries().iter().all(|(_, r)| r.absolute == 0.0));
        let fe = verify_field_equation_identity(&t, &p, &GravityCoefficients::default()).unwrap();
        assert_eq!(fe.divergence.absolute, 0.0);
        assert_eq!(fe.einstein.absolute, 0.0);
    }

    #[test]
    fn curvature_identities_hold_on_curved_tetrads() {
        let coeffs = GravityCoefficients::default();
        for t in [TetradField::conformal(0.3, 1), random_tetrad(21), random_tetrad(22)] {
            let p = probes(3, 10);
            let rep = verify_spin_curvature_identities(&t, &p, &coeffs).unwrap();
            for (name, r) in rep.entries() {
                assert!(r.relative() < 1e-7, "{name}: {r:?}");
            }
            assert!(rep.riemann_commutator.scale > 1e-3);
            let fe = verify_field_equation_identity(&t, &p, &coeffs).unwrap();
            assert!(fe.divergence.relative() < 1e-8, "{:?}", fe.divergence);
            assert!(fe.einstein.relative() < 1e-7, "{:?}", fe.einstein);
        }
    }

    #[test]
    fn einstein_normalization_is_plus_one() {
        // Derivation oracle: fit on a weakly curved conformal tetrad, then
        // freeze the value used by the default coefficients.
        let k = fit_einstein_normalization(&TetradField::conformal(0.05, 1), &probes(4, 6))
            .unwrap()
            .unwrap();
        assert!((k - 1.0).abs() < 1e-9, "fitted {k}");
        assert_eq!(GravityCoefficients::default().einstein, 1.0);
    }

    #[test]
    fn wrong_coefficient_is_detected() {
        let t = random_tetrad(31);
        let p = probes(3, 4);
        let bad = GravityCoefficients { scalar_trace: 0.51, ..Default::default() };
        let rep = verify_spin_curvature_identities(&t, &p, &bad).unwrap();
        assert!(rep.scalar_trace.relative() > 1e-3);
    }

    #[test]
    fn degenerate_tetrad_is_rejected() {
        let t = TetradField::diagonal([1.0, 1.0, 1.0, 1e-4]);
        assert!(matches!(t.check_nondegenerate(&[[0.0; 4]]), Err(Error::DegenerateTetrad { .. })));
        assert!(matches!(christoffel_and_riemann(&t, &[0.0; 4]), Err(Error::DegenerateTetrad { .. })));
    }

    #[test]
    fn diagonal_metric() {
        let g = TetradField::diagonal([2.0, 1.0, 1.0, 1.0]).metric_at(&[0.0; 4]);
        assert_eq!(g[0][0], 4.0);
        for a in 0..DIM {
            for b in 0..DIM {
                if a != b {
                    assert_eq!(g[a][b], 0.0);
                }
            }
        }
    }
}
