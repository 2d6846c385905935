//! Coupling constants of the action in SI units, the scalar potential and
//! the vacuum family of the doublet.
//!
//! `k` in the gravitational prefactor `c³/(kℓ²)` is Newton's constant.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled inputs file.
pub const BUNDLED_INPUTS: &str = include_str!("../data/physical_inputs.toml");

/// Version string the bundled file must carry.
pub const BUNDLED_VERSION: &str = "codata2018-pdg2020-1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalInputs {
    /// α
    pub fine_structure: f64,
    /// sin²θ_W
    pub sin2_weinberg: f64,
    /// ℓ_p in m
    pub planck_length: f64,
    /// m_W c² in GeV
    pub w_mass_gev: f64,
    /// e in C
    pub elementary_charge: f64,
    /// c in m/s
    pub speed_of_light: f64,
    /// ħ in J·s
    pub reduced_planck: f64,
    /// k = G in m³/(kg·s²)
    pub gravitational_constant: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputsFile {
    version: String,
    inputs: PhysicalInputs,
}

impl PhysicalInputs {
    /// Parses a versioned inputs document, returning its version too.
    pub fn from_toml_str(text: &str) -> Result<(String, Self)> {
        let file: InputsFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.inputs.validate()?;
        Ok((file.version, file.inputs))
    }

    pub fn from_path(path: &Path) -> Result<(String, Self)> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_INPUTS).expect("bundled inputs are valid").1
    }

    /// All positive; `0 ≤ sin²θ_W < 1` (the zero end is a limiting case).
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("α", self.fine_structure),
            ("ℓ_p", self.planck_length),
            ("m_W", self.w_mass_gev),
            ("e", self.elementary_charge),
            ("c", self.speed_of_light),
            ("ħ", self.reduced_planck),
            ("k", self.gravitational_constant),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.sin2_weinberg) {
            return Err(Error::Domain(format!("sin²θ_W must lie in [0, 1), got {}", self.sin2_weinberg)));
        }
        Ok(())
    }

    /// m_W in kg.
    pub fn w_mass_kg(&self) -> f64 {
        self.w_mass_gev * 1e9 * self.elementary_charge / (self.speed_of_light * self.speed_of_light)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// ℓ² in m²
    pub ell_squared: f64,
    /// ℓ in m
    pub ell: f64,
    pub ell_over_planck: f64,
    /// λ_L, λ_R in units of c³/(kℓ²): kg/(m²·s)
    pub lambda_l: f64,
    pub lambda_r: f64,
    /// λ_U = λ_V in units of 1/(cℓ²): s/m³
    pub lambda_u: f64,
    pub lambda_v: f64,
    /// p² + q² in V²
    pub vacuum_norm_squared: f64,
}

pub fn derive_constants(inputs: &PhysicalInputs) -> Result<DerivedConstants> {
    inputs.validate()?;
    let s2 = inputs.sin2_weinberg;
    let c = inputs.speed_of_light;
    let ell_squared = 10.0 / (3.0 * inputs.fine_structure) * (1.0 + 2.0 * s2) * inputs.planck_length.powi(2);
    let grav = c.powi(3) / (inputs.gravitational_constant * ell_squared);
    let lambda_u = -1.0 / (8.0 * PI * c * ell_squared);
    let mw = inputs.w_mass_kg();
    Ok(DerivedConstants {
        ell_squared,
        ell: ell_squared.sqrt(),
        ell_over_planck: ell_squared.sqrt() / inputs.planck_length,
        lambda_l: -(6.0 / PI) * s2 / (1.0 + 2.0 * s2) * grav,
        lambda_r: -(3.0 / (2.0 * PI)) * (1.0 - 2.0 * s2) / (1.0 + 2.0 * s2) * grav,
        lambda_u,
        lambda_v: lambda_u,
        vacuum_norm_squared: 4.0 * s2 * mw * mw * c.powi(4) / inputs.elementary_charge.powi(2),
    })
}

/// Parameters and field values of the scalar potential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialInputs {
    pub sigma_u: f64,
    pub kappa_u: f64,
    pub sigma_v: f64,
    /// ŪU
    pub u_norm: f64,
    /// V̄V
    pub v_norm: f64,
}

/// `V_p = σ_U ŪU + κ_U (ŪU)² + σ_V V̄V`
pub fn potential_energy(p: &PotentialInputs) -> f64 {
    p.sigma_u * p.u_norm + p.kappa_u * p.u_norm * p.u_norm + p.sigma_v * p.v_norm
}

/// `Υ = λ_L + λ_R + V_p`
pub fn upsilon(d: &DerivedConstants, p: &PotentialInputs) -> f64 {
    d.lambda_l + d.lambda_r + potential_energy(p)
}

/// `(p, q) = (r cosψ, r sinψ)` with `r² = p² + q²`.
pub fn vacuum(d: &DerivedConstants, psi: f64) -> (f64, f64) {
    let r = d.vacuum_norm_squared.sqrt();
    (r * psi.cos(), r * psi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with_s2(s2: f64) -> PhysicalInputs {
        PhysicalInputs { sin2_weinberg: s2, ..PhysicalInputs::bundled() }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bundled_file_is_pinned() {
        let (version, inputs) = PhysicalInputs::from_toml_str(BUNDLED_INPUTS).unwrap();
        assert_eq!(version, BUNDLED_VERSION);
        assert_eq!(inputs.fine_structure, 7.2973525693e-3);
        assert_eq!(inputs.sin2_weinberg, 0.23121);
        assert_eq!(inputs.w_mass_gev, 80.379);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = BUNDLED_INPUTS.replace("[inputs]", "[inputs]\nextra = 1.0");
        assert!(matches!(PhysicalInputs::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn ell_ratio_oracle() {
        // Direct evaluation of √((10/3α)(1 + 2s²)).
        let i = PhysicalInputs { fine_structure: 1.0 / 137.035999, ..with_s2(0.2312) };
        let d = derive_constants(&i).unwrap();
        let oracle = (10.0 * 137.035999 / 3.0 * (1.0 + 2.0 * 0.2312_f64)).sqrt();
        assert!(rel(d.ell_over_planck, oracle) < 1e-14);
        assert!((d.ell_over_planck - 25.85).abs() < 0.01);
    }

    #[test]
    fn vacuum_norm_unit_oracle() {
        // (m_W c²/e)² is (m_W in GeV × 10⁹ V)².
        let i = with_s2(0.2312);
        let d = derive_constants(&i).unwrap();
        let volts = i.w_mass_gev * 1e9;
        let oracle = 4.0 * 0.2312 * volts * volts;
        assert!(d.vacuum_norm_squared > 0.0);
        assert!(rel(d.vacuum_norm_squared, oracle) < 1e-12);
        let (p, q) = vacuum(&d, 0.4);
        assert!(rel(p * p + q * q, d.vacuum_norm_squared) < 1e-14);
    }

    #[test]
    fn zero_weinberg_limit() {
        let i = with_s2(0.0);
        let d = derive_constants(&i).unwrap();
        let l2 = 10.0 / (3.0 * i.fine_structure) * i.planck_length.powi(2);
        assert!(rel(d.ell_squared, l2) < 1e-15);
        assert_eq!(d.lambda_l, 0.0);
        let lr = -(3.0 / (2.0 * PI)) * i.speed_of_light.powi(3) / (i.gravitational_constant * l2);
        assert!(rel(d.lambda_r, lr) < 1e-14);
    }

    #[test]
    fn physical_signs_and_scalar_couplings() {
        let d = derive_constants(&PhysicalInputs::bundled()).unwrap();
        assert!(d.lambda_l < 0.0 && d.lambda_r < 0.0);
        assert_eq!(d.lambda_u, d.lambda_v);
    }

    #[test]
    fn domain_violations() {
        assert!(matches!(derive_constants(&with_s2(1.0)), Err(Error::Domain(_))));
        let bad = PhysicalInputs { planck_length: -1.0, ..PhysicalInputs::bundled() };
        assert!(matches!(derive_constants(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential_energy(&PotentialInputs::default()), 0.0);
        let p = PotentialInputs { kappa_u: 0.7, u_norm: 1.0, ..Default::default() };
        assert_eq!(potential_energy(&p), 0.7);
    }

    proptest! {
        #[test]
        fn lambda_ratio(s2 in 0.01..0.49f64) {
            let d = derive_constants(&with_s2(s2)).unwrap();
            prop_assert!(rel(d.lambda_l / d.lambda_r, 4.0 * s2 / (1.0 - 2.0 * s2)) < 1e-13);
        }

        #[test]
        fn ell_monotone(s2 in 0.0..0.98f64, ds in 0.001..0.01f64) {
            let a = derive_constants(&with_s2(s2)).unwrap();
            let b = derive_constants(&with_s2(s2 + ds)).unwrap();
            prop_assert!(b.ell_squared > a.ell_squared);
        }

        #[test]
        fn potential_matches_formula(su in -2.0..2.0f64, k in -2.0..2.0f64, sv in -2.0..2.0f64, u in 0.0..3.0f64, v in 0.0..3.0f64) {
            let p = PotentialInputs { sigma_u: su, kappa_u: k, sigma_v: sv, u_norm: u, v_norm: v };
            let direct = su * u + k * u.powi(2) + sv * v;
            prop_assert!((potential_energy(&p) - direct).abs() < 1e-14 * direct.abs().max(1.0));
            let d = derive_constants(&PhysicalInputs::bundled()).unwrap();
            prop_assert!((upsilon(&d, &p) - (d.lambda_l + d.lambda_r + direct)).abs() <= 1e-15 * (d.lambda_l + d.lambda_r).abs());
        }
    }
}
