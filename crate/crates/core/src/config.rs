//! Verification campaign configuration. Every section is optional and
//! unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::GaugeConfig;
use crate::geometry::TetradField;
use crate::invariants::ExpansionCoefficients;
use crate::geometry::GravityCoefficients;
use crate::linalg::DIM;
use crate::polyfield::{PolyField, PolyTerm};

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tetrad: TetradSection,
    pub gauge: GaugeSection,
    pub scalars: ScalarSection,
    pub spinors: SpinorSection,
    pub series: SeriesSection,
    pub probes: ProbeSection,
    /// Per-check tolerance overrides keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
    pub expectations: Expectations,
}

/// Random tetrads are `δ + amplitude·(degree-bounded polynomial)`.
/// `components[a][A]` optionally adds one explicit tetrad to every
/// tetrad-based check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TetradSection {
    pub amplitude: f64,
    pub degree: u32,
    pub conformal_epsilon: f64,
    pub components: Option<Vec<Vec<Vec<PolyTerm>>>>,
}

impl Default for TetradSection {
    fn default() -> Self {
        TetradSection { amplitude: 0.15, degree: 2, conformal_epsilon: 0.05, components: None }
    }
}

/// `w[k][a]` is `W_a^{k+1}`; `b[a]` is `B_a`. Either both or neither.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeSection {
    pub g1: f64,
    pub g2: f64,
    pub amplitude: f64,
    pub degree: u32,
    pub w: Option<Vec<Vec<Vec<PolyTerm>>>>,
    pub b: Option<Vec<Vec<PolyTerm>>>,
}

impl Default for GaugeSection {
    fn default() -> Self {
        GaugeSection { g1: 0.65, g2: 0.35, amplitude: 0.5, degree: 1, w: None, b: None }
    }
}

/// Vacuum `U = (0, p, 0, q)` with `(p, q) = r(cosψ, sinψ)`, and an optional
/// explicit `V` given by its four components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalarSection {
    pub vacuum_radius: f64,
    pub vacuum_angle: f64,
    pub v_degree: u32,
    pub v: Option<Vec<Vec<PolyTerm>>>,
}

impl Default for ScalarSection {
    fn default() -> Self {
        ScalarSection { vacuum_radius: 1.0, vacuum_angle: 0.6, v_degree: 2, v: None }
    }
}

impl ScalarSection {
    pub fn vacuum(&self) -> (f64, f64) {
        (self.vacuum_radius * self.vacuum_angle.cos(), self.vacuum_radius * self.vacuum_angle.sin())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinorSection {
    pub degree: u32,
    pub amplitude: f64,
    /// Explicit spinor components; length fixes the basis (4 for R, 8 for L).
    pub psi: Option<Vec<Vec<PolyTerm>>>,
}

impl Default for SpinorSection {
    fn default() -> Self {
        SpinorSection { degree: 2, amplitude: 1.0, psi: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesSection {
    pub order: usize,
}

impl Default for SeriesSection {
    fn default() -> Self {
        SeriesSection { order: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub count: usize,
    pub half_width: f64,
    pub seed: u64,
    /// Overrides every check's number of random draws.
    pub trials: Option<usize>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { count: 10, half_width: 0.5, seed: DEFAULT_SEED, trials: None }
    }
}

/// Coefficients the suite expects to find. Changing any of them must make
/// the matching check fail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expectations {
    pub myform: f64,
    pub rho_riemann: f64,
    pub scalar_trace: f64,
    pub ricci_trace: f64,
    pub einstein: f64,
    pub eh_trace: f64,
    pub eh_scalar: f64,
    pub l4_left: f64,
    pub l4_right: f64,
    pub chi_mass: f64,
    pub chi_v: f64,
    pub dirac: f64,
    /// `ℓ² = c (1 + 2s²)ℓ_p²/α`
    pub ell_squared: f64,
    /// `λ_L = −(c/π) s²/(1 + 2s²) · c³/(kℓ²)`
    pub lambda_l: f64,
    /// `λ_R = −(c/π)(1 − 2s²)/(1 + 2s²) · c³/(kℓ²)`
    pub lambda_r: f64,
    /// `λ_U = λ_V = −1/(cπ c_light ℓ²)`
    pub lambda_scalar: f64,
    /// `p² + q² = c s² m_W²c⁴/e²`
    pub vacuum: f64,
}

impl Default for Expectations {
    fn default() -> Self {
        let e = ExpansionCoefficients::default();
        let g = GravityCoefficients::default();
        Expectations {
            myform: crate::clifford::MYFORM_COEFFICIENT,
            rho_riemann: g.rho_riemann,
            scalar_trace: g.scalar_trace,
            ricci_trace: g.ricci_trace,
            einstein: g.einstein,
            eh_trace: e.eh_trace,
            eh_scalar: e.eh_scalar,
            l4_left: e.l4_left,
            l4_right: e.l4_right,
            chi_mass: e.chi_mass,
            chi_v: e.chi_v,
            dirac: e.dirac,
            ell_squared: 10.0 / 3.0,
            lambda_l: 6.0,
            lambda_r: 1.5,
            lambda_scalar: 8.0,
            vacuum: 4.0,
        }
    }
}

impl Expectations {
    pub fn expansion(&self) -> ExpansionCoefficients {
        ExpansionCoefficients {
            eh_trace: self.eh_trace,
            eh_scalar: self.eh_scalar,
            l4_left: self.l4_left,
            l4_right: self.l4_right,
            chi_mass: self.chi_mass,
            chi_v: self.chi_v,
            dirac: self.dirac,
        }
    }

    pub fn gravity(&self) -> GravityCoefficients {
        GravityCoefficients {
            rho_riemann: self.rho_riemann,
            scalar_trace: self.scalar_trace,
            ricci_trace: self.ricci_trace,
            einstein: self.einstein,
        }
    }
}

fn polys(terms: &[Vec<PolyTerm>], len: usize, what: &str) -> Result<Vec<PolyField>> {
    if terms.len() != len {
        return Err(Error::Config(format!("{what} needs {len} components, got {}", terms.len())));
    }
    Ok(terms.iter().map(|t| PolyField::from_terms(t)).collect())
}

fn four<T>(v: Vec<T>) -> [T; DIM] {
    v.try_into().unwrap_or_else(|_| unreachable!("length checked"))
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tetrad.amplitude", self.tetrad.amplitude),
            ("gauge.amplitude", self.gauge.amplitude),
            ("spinors.amplitude", self.spinors.amplitude),
            ("probes.half_width", self.probes.half_width),
        ];
        for (name, v) in positive {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and non-negative")));
            }
        }
        if self.probes.count == 0 {
            return Err(Error::Config("probes.count must be positive".into()));
        }
        if self.series.order < 4 {
            return Err(Error::Config("series.order must be at least 4".into()));
        }
        if self.probes.trials == Some(0) {
            return Err(Error::Config("probes.trials must be positive".into()));
        }
        for (id, tol) in &self.tolerances {
            if !crate::suite::CHECK_IDS.contains(&id.as_str()) {
                return Err(Error::Config(format!("tolerance for unknown check '{id}'")));
            }
            if !(*tol >= 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!("tolerance for '{id}' must be finite and non-negative")));
            }
        }
        if self.gauge.w.is_some() != self.gauge.b.is_some() {
            return Err(Error::Config("gauge.w and gauge.b must be given together".into()));
        }
        self.custom_tetrad()?;
        self.custom_gauge()?;
        self.custom_v()?;
        self.custom_psi()?;
        Ok(())
    }

    pub fn custom_tetrad(&self) -> Result<Option<TetradField>> {
        let Some(rows) = &self.tetrad.components else { return Ok(None) };
        if rows.len() != DIM {
            return Err(Error::Config(format!("tetrad.components needs {DIM} rows")));
        }
        let rows: Vec<[PolyField; DIM]> =
            rows.iter().map(|r| polys(r, DIM, "tetrad.components row").map(four)).collect::<Result<_>>()?;
        TetradField::new(four(rows)).map(Some).map_err(|e| Error::Config(format!("tetrad.components: {e}")))
    }

    pub fn custom_gauge(&self) -> Result<Option<GaugeConfig>> {
        let (Some(w), Some(b)) = (&self.gauge.w, &self.gauge.b) else { return Ok(None) };
        if w.len() != 3 {
            return Err(Error::Config("gauge.w needs 3 isospin components".into()));
        }
        let w: Vec<[PolyField; DIM]> = w.iter().map(|r| polys(r, DIM, "gauge.w row").map(four)).collect::<Result<_>>()?;
        let w: [[PolyField; DIM]; 3] = w.try_into().unwrap_or_else(|_| unreachable!("length checked"));
        Ok(Some(GaugeConfig { w, b: four(polys(b, DIM, "gauge.b")?), g1: self.gauge.g1, g2: self.gauge.g2 }))
    }

    pub fn custom_v(&self) -> Result<Option<PolyField>> {
        let Some(v) = &self.scalars.v else { return Ok(None) };
        PolyField::vector_from_components(&polys(v, 4, "scalars.v")?).map(Some)
    }

    pub fn custom_psi(&self) -> Result<Option<PolyField>> {
        let Some(psi) = &self.spinors.psi else { return Ok(None) };
        if psi.len() != 4 && psi.len() != 8 {
            return Err(Error::Config("spinors.psi needs 4 (R basis) or 8 (L basis) components".into()));
        }
        PolyField::vector_from_components(&polys(psi, psi.len(), "spinors.psi")?).map(Some)
    }

    /// Canonical JSON of the effective configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// `(0, p, 0, q)` as a constant quadruplet.
pub fn vacuum_field(p: f64, q: f64) -> PolyField {
    PolyField::vector_const(&crate::gauge::vacuum_scalar(p, q))
}

pub fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(Config::from_toml_str("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(Config::from_toml_str("[probes]\ncolor = 3\n"), Err(Error::Config(_))));
        assert!(matches!(Config::from_toml_str("[nonsense]\n"), Err(Error::Config(_))));
        assert!(matches!(Config::from_toml_str("[tolerances]\nno-such-check = 1e-3\n"), Err(Error::Config(_))));
    }

    #[test]
    fn partial_sections_fill_in() {
        let c = Config::from_toml_str("[probes]\ncount = 3\n[expectations]\nchi_mass = -0.125\n").unwrap();
        assert_eq!(c.probes.count, 3);
        assert_eq!(c.probes.half_width, 0.5);
        assert_eq!(c.expectations.chi_mass, -0.125);
        assert_eq!(c.expectations.l4_left, 1.0 / 320.0);
    }

    #[test]
    fn custom_tetrad_parses() {
        let mut text = String::from("[tetrad]\ncomponents = [\n");
        for a in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|b| {
                    if a == b {
                        "[{ pow = [0, 0, 0, 0], re = 1.0 }, { pow = [0, 1, 0, 0], re = 0.05 }]".to_string()
                    } else {
                        "[]".to_string()
                    }
                })
                .collect();
            text.push_str(&format!("  [{}],\n", row.join(", ")));
        }
        text.push_str("]\n");
        let c = Config::from_toml_str(&text).unwrap();
        let t = c.custom_tetrad().unwrap().unwrap();
        assert!((t.frame_at(&[0.0, 2.0, 0.0, 0.0])[3][3] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn digest_tracks_content() {
        let a = Config::default();
        let mut b = Config::default();
        assert_eq!(a.digest(), b.digest());
        b.expectations.l4_left = 1.0 / 321.0;
        assert_ne!(a.digest(), b.digest());
    }
}
