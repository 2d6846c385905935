//! Hyperbolic mixing of the `(γ, π)` pair, the induced energy/charge
//! transform, and the rapidity fixed by asymptotic potentials.
//!
//! Units: `ħ` and `ℓ` are carried explicitly in [`ChargeEnergyState`];
//! everything else is dimensionless.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::PairOperators;

/// `γ′ = coshθ γ + sinhθ π`, `π′ = sinhθ γ + coshθ π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaRotation {
    pub theta: f64,
}

impl ThetaRotation {
    pub fn new(theta: f64) -> Self {
        ThetaRotation { theta }
    }

    pub fn identity() -> Self {
        ThetaRotation { theta: 0.0 }
    }

    /// Mixing matrix acting on the column `(γ, π)`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        if self.theta == 0.0 {
            return [[1.0, 0.0], [0.0, 1.0]];
        }
        let (c, s) = (self.theta.cosh(), self.theta.sinh());
        [[c, s], [s, c]]
    }

    pub fn compose(&self, other: &ThetaRotation) -> ThetaRotation {
        ThetaRotation { theta: self.theta + other.theta }
    }

    pub fn inverse(&self) -> ThetaRotation {
        ThetaRotation { theta: -self.theta }
    }
}

/// `A·B` for 2×2 matrices.
pub fn mix_product(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

/// Applies `rotation` on top of whatever mixing `pair` already carries.
pub fn rotate_pair<'a>(pair: &PairOperators<'a>, rotation: &ThetaRotation) -> PairOperators<'a> {
    PairOperators::with_mix(pair.base(), mix_product(&rotation.matrix(), &pair.mix()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChargeEnergyState {
    pub energy: f64,
    pub charge: f64,
    pub ell: f64,
    pub hbar: f64,
}

impl ChargeEnergyState {
    pub fn new(energy: f64, charge: f64, ell: f64, hbar: f64) -> Result<Self> {
        if !(ell > 0.0 && hbar > 0.0) {
            return Err(Error::Domain(format!("ℓ and ħ must be positive, got ℓ = {ell}, ħ = {hbar}")));
        }
        Ok(ChargeEnergyState { energy, charge, ell, hbar })
    }

    /// `E² − (ħ/ℓ)²Q²`, preserved by [`transform_eq`].
    pub fn quadratic_form(&self) -> f64 {
        let k = self.hbar / self.ell;
        self.energy * self.energy - k * k * self.charge * self.charge
    }
}

/// `E′ = coshθ E + (ħ/ℓ) sinhθ Q`, `Q′ = coshθ Q + (ℓ/ħ) sinhθ E`.
pub fn transform_eq(state: &ChargeEnergyState, theta: f64) -> ChargeEnergyState {
    if theta == 0.0 {
        return *state;
    }
    let (c, s) = (theta.cosh(), theta.sinh());
    let k = state.hbar / state.ell;
    ChargeEnergyState {
        energy: c * state.energy + k * s * state.charge,
        charge: c * state.charge + s * state.energy / k,
        ..*state
    }
}

/// Rapidities for the L and R sectors given the asymptotic time components
/// `W³₀(∞)` and `B₀(∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticTheta {
    /// `tanh θ_L = (ℓ/2)(g′W³ + g″B)`
    pub theta_l: f64,
    /// `tanh θ_R = ℓ g″B`
    pub theta_r: f64,
    /// `g′W³ = g″B` within tolerance, so both sectors share one θ.
    pub consistent: bool,
}

pub const CONSISTENCY_TOLERANCE: f64 = 1e-12;

pub fn theta_from_asymptotic_potentials(w3: f64, b: f64, g1: f64, g2: f64, ell: f64) -> Result<AsymptoticTheta> {
    let (tw, tb) = (g1 * w3, g2 * b);
    let arg_l = 0.5 * ell * (tw + tb);
    let arg_r = ell * tb;
    for (name, arg) in [("L", arg_l), ("R", arg_r)] {
        if !(arg.abs() < 1.0) {
            return Err(Error::Domain(format!("tanh θ_{name} = {arg} is outside (−1, 1)")));
        }
    }
    let scale = tw.abs().max(tb.abs()).max(1.0);
    Ok(AsymptoticTheta {
        theta_l: arg_l.atanh(),
        theta_r: arg_r.atanh(),
        consistent: (tw - tb).abs() <= CONSISTENCY_TOLERANCE * scale,
    })
}

/// `|Q′ − Q|` along a sequence of halved ℓ with θ from the L-sector
/// potentials, and the convergence order read off successive ratios.
#[derive(Clone, Debug, Serialize)]
pub struct ChargeShiftScaling {
    pub ells: Vec<f64>,
    pub shifts: Vec<f64>,
    /// Smallest `log₂(shift(ℓ)/shift(ℓ/2))` over the sweep.
    pub observed_order: f64,
    /// Least-squares `C` in `|Q′ − Q| ≈ Cℓ²`.
    pub constant: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn charge_shift_scaling(
    energy: f64,
    charge: f64,
    hbar: f64,
    w3: f64,
    b: f64,
    g1: f64,
    g2: f64,
    ell0: f64,
    halvings: usize,
) -> Result<ChargeShiftScaling> {
    if halvings == 0 {
        return Err(Error::Domain("the ℓ sweep needs at least one halving".into()));
    }
    let mut ells = Vec::with_capacity(halvings + 1);
    let mut shifts = Vec::with_capacity(halvings + 1);
    let mut ell = ell0;
    for _ in 0..=halvings {
        let theta = theta_from_asymptotic_potentials(w3, b, g1, g2, ell)?.theta_l;
        let state = ChargeEnergyState::new(energy, charge, ell, hbar)?;
        let moved = transform_eq(&state, theta);
        ells.push(ell);
        shifts.push((moved.charge - charge).abs());
        ell *= 0.5;
    }
    if shifts.contains(&0.0) {
        return Err(Error::Domain("charge shift vanished; the sweep cannot measure an order".into()));
    }
    let observed_order = shifts.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
    let num: f64 = ells.iter().zip(&shifts).map(|(l, s)| l * l * s).sum();
    let den: f64 = ells.iter().map(|l| l.powi(4)).sum();
    Ok(ChargeShiftScaling { ells, shifts, observed_order, constant: num / den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_gammas, Basis};
    use crate::gauge::{build_connection, GaugeConfig};
    use crate::geometry::TetradField;
    use crate::invariants::{field_distance, FieldOperators};
    use crate::polyfield::PolyField;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn operators(seed: u64, basis: Basis) -> FieldOperators {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = TetradField::diagonal([1.1, 0.95, 1.0, 1.05]);
        let g = GaugeConfig::random(&mut rng, 1, 0.4, 0.6, 0.4);
        let gs = build_gammas(&t, basis, &[[0.0; 4]]).unwrap();
        let conn = build_connection(&g, Some(&t), basis).unwrap();
        FieldOperators::new(&gs, &conn, 3).unwrap()
    }

    #[test]
    fn zero_is_identity_matrix() {
        assert_eq!(ThetaRotation::identity().matrix(), [[1.0, 0.0], [0.0, 1.0]]);
        let s = ChargeEnergyState::new(1.5, -0.3, 2.0, 1.0).unwrap();
        assert_eq!(transform_eq(&s, 0.0), s);
    }

    #[test]
    fn rotation_preserves_phi_chi_sigma() {
        let ops = operators(1, Basis::U);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = ops.field(&PolyField::random_vector(&mut rng, 4, 2, 1.0)).unwrap();
        let id = PairOperators::identity(&ops);
        for theta in [0.3, -0.3, 1.0, -1.0] {
            let rot = rotate_pair(&id, &ThetaRotation::new(theta));
            for (a, b) in [(0, 1), (1, 2), (0, 3), (2, 2)] {
                assert!(field_distance(&rot.phi(a, b, &x).unwrap(), &id.phi(a, b, &x).unwrap()).unwrap() < 1e-10);
                assert!(field_distance(&rot.chi(a, b, &x).unwrap(), &id.chi(a, b, &x).unwrap()).unwrap() < 1e-10);
                assert!(field_distance(&rot.sigma(a, b, &x).unwrap(), &id.sigma(a, b, &x).unwrap()).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn rotation_changes_gamma_itself() {
        let ops = operators(3, Basis::R);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = ops.field(&PolyField::random_vector(&mut rng, 4, 2, 1.0)).unwrap();
        let id = PairOperators::identity(&ops);
        let rot = rotate_pair(&id, &ThetaRotation::new(0.3));
        assert!(field_distance(&rot.gamma(1, &x).unwrap(), &id.gamma(1, &x).unwrap()).unwrap() > 1e-3);
    }

    #[test]
    fn composition_and_inverse_on_fields() {
        let ops = operators(5, Basis::U);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = ops.field(&PolyField::random_vector(&mut rng, 4, 2, 1.0)).unwrap();
        let id = PairOperators::identity(&ops);
        let (r3, r5) = (ThetaRotation::new(0.3), ThetaRotation::new(0.5));
        let stepwise = rotate_pair(&rotate_pair(&id, &r3), &r5);
        let direct = rotate_pair(&id, &ThetaRotation::new(0.8));
        let back = rotate_pair(&rotate_pair(&id, &r3), &r3.inverse());
        for a in 0..4 {
            assert!(field_distance(&stepwise.gamma(a, &x).unwrap(), &direct.gamma(a, &x).unwrap()).unwrap() < 1e-11);
            assert!(field_distance(&stepwise.pi(a, &x).unwrap(), &direct.pi(a, &x).unwrap()).unwrap() < 1e-11);
            assert!(field_distance(&back.gamma(a, &x).unwrap(), &id.gamma(a, &x).unwrap()).unwrap() < 1e-12);
            assert!(field_distance(&back.pi(a, &x).unwrap(), &id.pi(a, &x).unwrap()).unwrap() < 1e-12);
        }
        assert_eq!(r3.compose(&r5).theta, 0.8);
    }

    #[test]
    fn zero_energy_recovers_rapidity() {
        let s = ChargeEnergyState::new(0.0, 1.0, 0.7, 1.3).unwrap();
        let theta = 0.1;
        let m = transform_eq(&s, theta);
        assert!((m.energy - (1.3 / 0.7) * theta.sinh()).abs() < 1e-15);
        assert!((theta.tanh() - (s.ell / s.hbar) * m.energy / m.charge).abs() < 1e-15);
    }

    #[test]
    fn potentials_branches() {
        let z = theta_from_asymptotic_potentials(0.0, 0.0, 0.6, 0.4, 0.1).unwrap();
        assert_eq!((z.theta_l, z.theta_r, z.consistent), (0.0, 0.0, true));
        let (g1, g2, c, ell) = (0.6, 0.4, 0.8, 0.3);
        let t = theta_from_asymptotic_potentials(c / g1, c / g2, g1, g2, ell).unwrap();
        assert!(t.consistent);
        assert!((t.theta_l - (ell * c).atanh()).abs() < 1e-15);
        assert!((t.theta_r - (ell * c).atanh()).abs() < 1e-15);
        let u = theta_from_asymptotic_potentials(1.0, 0.2, g1, g2, ell).unwrap();
        assert!(!u.consistent);
        assert!(u.theta_l != u.theta_r);
        assert!(matches!(theta_from_asymptotic_potentials(0.0, 10.0, g1, g2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn charge_shift_is_second_order() {
        let s = charge_shift_scaling(1.0, 0.5, 1.0, 0.7, 0.9, 0.6, 0.4, 0.2, 6).unwrap();
        assert!(s.observed_order >= 1.9, "{s:?}");
        // Oracle: Q′ − Q ≈ ½θ²Q + θℓE/ħ with θ ≈ ℓX/2.
        let x = 0.6 * 0.7 + 0.4 * 0.9;
        let leading = x * x * 0.5 / 8.0 + 0.5 * x * 1.0;
        assert!((s.constant - leading).abs() / leading < 0.01, "{} vs {leading}", s.constant);
    }

    proptest! {
        #[test]
        fn quadratic_form_preserved(e in -5.0..5.0f64, q in -5.0..5.0f64, ell in 0.1..3.0f64, theta in -2.0..2.0f64) {
            let s = ChargeEnergyState::new(e, q, ell, 1.0).unwrap();
            let m = transform_eq(&s, theta);
            let scale = (e * e + q * q / (ell * ell)) * theta.cosh().powi(2);
            prop_assert!((m.quadratic_form() - s.quadratic_form()).abs() <= 1e-13 * scale.max(1.0));
            let back = transform_eq(&m, -theta);
            prop_assert!((back.energy - e).abs() < 1e-13 * scale.max(1.0).sqrt() * 10.0);
            prop_assert!((back.charge - q).abs() < 1e-13 * scale.max(1.0).sqrt() * 10.0);
        }

        #[test]
        fn matrices_compose(t1 in -2.0..2.0f64, t2 in -2.0..2.0f64) {
            let p = mix_product(&ThetaRotation::new(t2).matrix(), &ThetaRotation::new(t1).matrix());
            let d = ThetaRotation::new(t1 + t2).matrix();
            for i in 0..2 { for j in 0..2 { prop_assert!((p[i][j] - d[i][j]).abs() < 1e-12 * d[i][j].abs().max(1.0)); } }
        }
    }
}
