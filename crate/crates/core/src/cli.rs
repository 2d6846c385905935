//! Command-line front end. Exit codes: 0 all checks pass, 1 a check failed,
//! 2 invalid input.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{build_gammas, Basis};
use crate::config::{vacuum_field, Config};
use crate::constants::{derive_constants, PhysicalInputs, BUNDLED_VERSION};
use crate::error::{Error, Result};
use crate::gauge::{build_connection, GaugeConfig};
use crate::geometry::TetradField;
use crate::invariants::{
    bracket, chi_mass_prediction, chi_v_prediction, dirac_leading_term, eh_trace_prediction,
    field_strength_l4_prediction, sandwich, sqrt_chi_apply, sqrt_phi_at,
};
use crate::linalg::{det4, inverse4, DIM};
use crate::polyfield::PolyField;
use crate::probe::{rng_for, sample};
use crate::report::VerificationReport;
use crate::suite::{pair, run, Context, RunOptions};
use crate::theta::{theta_from_asymptotic_potentials, transform_eq, ChargeEnergyState};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bicheck", version, about = "Numerical verification of a Born–Infeld-type gravity/electroweak action")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite.
    Verify(VerifyArgs),
    /// Print ℓ-expansion coefficients next to their predicted values.
    Expand(ExpandArgs),
    /// Print the coupling constants derived from physical inputs.
    Constants(ConstantsArgs),
    /// Energy/charge transform and rapidities from asymptotic potentials.
    Theta(ThetaArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random draws per check.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Multiplies every tolerance.
    #[arg(long)]
    pub tol_scale: Option<f64>,
    #[arg(long)]
    pub json: bool,
    /// Run only these checks (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    #[value(name = "phi-L", alias = "phi-l")]
    PhiL,
    #[value(name = "phi-R", alias = "phi-r")]
    PhiR,
    #[value(name = "phi-V", alias = "phi-v")]
    PhiV,
    #[value(name = "chi-U", alias = "chi-u")]
    ChiU,
    #[value(name = "chi-V", alias = "chi-v")]
    ChiV,
    Dirac,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    pub target: Target,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Versioned TOML inputs; the bundled file is used when omitted.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[command(subcommand)]
    pub mode: ThetaMode,
}

#[derive(Debug, Subcommand)]
pub enum ThetaMode {
    /// E′ = coshθ E + (ħ/ℓ)sinhθ Q, Q′ = coshθ Q + (ℓ/ħ)sinhθ E.
    Transform {
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        #[arg(long, allow_hyphen_values = true)]
        charge: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long)]
        json: bool,
    },
    /// θ_L and θ_R from W³₀(∞) and B₀(∞).
    Potentials {
        #[arg(long, allow_hyphen_values = true)]
        w3: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        g1: f64,
        #[arg(long)]
        g2: f64,
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        json: bool,
    },
}

/// Parses `args` and runs the command, printing to stdout/stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
        }
    };
    match dispatch(cli.command) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

pub fn dispatch(cmd: Command) -> Result<(String, i32)> {
    match cmd {
        Command::Verify(a) => cmd_verify(&a),
        Command::Expand(a) => cmd_expand(&a).map(|s| (s, EXIT_PASS)),
        Command::Constants(a) => cmd_constants(&a).map(|s| (s, EXIT_PASS)),
        Command::Theta(a) => cmd_theta(&a.mode).map(|s| (s, EXIT_PASS)),
    }
}

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::from_path(p)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.probes.seed = s;
    }
    Ok(cfg)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(String, i32)> {
    let mut cfg = load_config(&a.config, a.seed)?;
    if let Some(t) = a.trials {
        cfg.probes.trials = Some(t);
    }
    let ctx = Context::new(cfg)?;
    let started = Instant::now();
    let records = run(&ctx, &RunOptions { only: a.only.clone(), tol_scale: a.tol_scale })?;
    let report = VerificationReport::new(
        ctx.config.probes.seed,
        ctx.config.digest(),
        a.tol_scale.unwrap_or(1.0),
        records,
        started.elapsed().as_secs_f64(),
    );
    let text = if a.json { report.to_json() + "\n" } else { report.to_human() };
    Ok((text, if report.passed() { EXIT_PASS } else { EXIT_FAIL }))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpandRow {
    pub order: usize,
    pub label: String,
    pub computed: Option<[f64; 2]>,
    pub predicted: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Expansion {
    pub target: Target,
    pub point: [f64; DIM],
    pub rows: Vec<ExpandRow>,
}

fn row(order: usize, label: &str, computed: Option<Complex64>, predicted: Option<Complex64>) -> ExpandRow {
    ExpandRow { order, label: label.into(), computed: computed.map(pair), predicted: predicted.map(pair) }
}

fn real(v: f64) -> Option<Complex64> {
    Some(Complex64::new(v, 0.0))
}

pub fn expand(cfg: Config, target: Target) -> Result<Expansion> {
    let ctx = Context::new(cfg)?;
    let cfg = &ctx.config;
    let mut rng = rng_for(cfg.probes.seed, "expand");
    let tetrad = ctx.custom_tetrad.clone().unwrap_or_else(TetradField::flat);
    let flat = tetrad == TetradField::flat();
    let gauge = match &ctx.custom_gauge {
        Some(g) => g.clone(),
        None => GaugeConfig::random(&mut rng, cfg.gauge.degree, cfg.gauge.amplitude, cfg.gauge.g1, cfg.gauge.g2),
    };
    let x = sample(&mut rng, 1, cfg.probes.half_width)[0];
    let metric = tetrad.metric_at(&x);
    let sqrt_neg_g = (-det4(&metric)).sqrt();
    let coeffs = cfg.expectations.expansion();
    let order = cfg.series.order;
    let mut rows = Vec::new();
    match target {
        Target::PhiL | Target::PhiR | Target::PhiV => {
            let basis = match target {
                Target::PhiL => Basis::L,
                Target::PhiR => Basis::R,
                _ => Basis::V,
            };
            let gs = build_gammas(&tetrad, basis, &[x])?;
            let conn = build_connection(&gauge, Some(&tetrad), basis)?;
            let sp = sqrt_phi_at(&gs, &conn, &x, order)?;
            for k in 0..=order {
                let c = Some(*sp.series.coeff(k));
                let (label, predicted) = match (basis, k) {
                    (_, 0) => ("√(−g)", real(sqrt_neg_g)),
                    (Basis::V, _) => ("no correction", real(0.0)),
                    (_, 2) => ("Einstein–Hilbert term", Some(eh_trace_prediction(&gs, &sp.curvature, &x, coeffs.eh_trace)?)),
                    (Basis::L, 4) => (
                        "W and B field-strength terms",
                        if flat { real(field_strength_l4_prediction(basis, &gauge, &x, &metric, &coeffs)?) } else { None },
                    ),
                    (Basis::R, 4) => (
                        "B field-strength term",
                        if flat { real(field_strength_l4_prediction(basis, &gauge, &x, &metric, &coeffs)?) } else { None },
                    ),
                    (_, k) if k % 2 == 1 => ("odd order", real(0.0)),
                    _ => ("higher order", None),
                };
                rows.push(row(k, label, c, predicted));
            }
        }
        Target::ChiU => {
            let (w, b) = gauge.values_at(&x);
            let constant = GaugeConfig::constant(w, b, gauge.g1, gauge.g2);
            let (p, q) = cfg.scalars.vacuum();
            let u = vacuum_field(p, q);
            let gs = build_gammas(&tetrad, Basis::U, &[x])?;
            let conn = build_connection(&constant, Some(&tetrad), Basis::U)?;
            let s = sandwich(&sqrt_chi_apply(&gs, &conn, &u)?, &u, &x)?;
            rows.push(row(0, "√(−g)", Some(*s.coeff(0)), real(sqrt_neg_g)));
            rows.push(row(1, "odd order", Some(*s.coeff(1)), real(0.0)));
            let total = chi_mass_prediction(&constant, &metric, &x, coeffs.chi_mass)?;
            rows.push(row(2, "W and Z mass terms", Some(*s.coeff(2)), real(total)));
            let ginv = inverse4(&metric).ok_or(Error::SingularMetric(x))?;
            let dot = |u: &[f64; DIM], v: &[f64; DIM]| -> f64 {
                (0..DIM).flat_map(|i| (0..DIM).map(move |j| ginv[i][j] * u[i] * v[j])).sum()
            };
            let z: [f64; DIM] = std::array::from_fn(|a| gauge.g1 * w[2][a] - gauge.g2 * b[a]);
            let pre = -coeffs.chi_mass * sqrt_neg_g;
            let g1sq = gauge.g1 * gauge.g1;
            rows.push(row(2, "  g′² W¹·W¹", None, real(pre * g1sq * dot(&w[0], &w[0]))));
            rows.push(row(2, "  g′² W²·W²", None, real(pre * g1sq * dot(&w[1], &w[1]))));
            rows.push(row(2, "  (g′W³ − g″B)·(g′W³ − g″B)", None, real(pre * dot(&z, &z))));
        }
        Target::ChiV => {
            let v = match &ctx.custom_v {
                Some(v) => v.clone(),
                None => PolyField::random_vector(&mut rng, 4, cfg.scalars.v_degree, 1.0),
            };
            let gs = build_gammas(&tetrad, Basis::V, &[x])?;
            let conn = build_connection(&gauge, Some(&tetrad), Basis::V)?;
            let s = bracket(&sqrt_chi_apply(&gs, &conn, &v)?, &v, &x)?;
            let vv: f64 = v.evaluate(&x).iter().map(|z| z.norm_sqr()).sum();
            rows.push(row(0, "√(−g) V̄V", Some(*s.coeff(0)), real(sqrt_neg_g * vv)));
            rows.push(row(1, "odd order", Some(*s.coeff(1)), real(0.0)));
            rows.push(row(2, "½√(−g) V̄∂_a∂^aV", Some(*s.coeff(2)), Some(chi_v_prediction(&v, &metric, &x, coeffs.chi_v)?)));
        }
        Target::Dirac => {
            let psi = match &ctx.custom_psi {
                Some(p) => p.clone(),
                None => PolyField::random_vector(&mut rng, 4, cfg.spinors.degree, cfg.spinors.amplitude),
            };
            let basis = if psi.shape().len() == 8 { Basis::L } else { Basis::R };
            let mut abelian = GaugeConfig::zero(gauge.g1, gauge.g2);
            abelian.b = gauge.b.clone();
            let gs = build_gammas(&tetrad, basis, &[x])?;
            let conn = build_connection(&abelian, Some(&tetrad), basis)?;
            let d = dirac_leading_term(&gs, &conn, &psi, &x, coeffs.dirac)?;
            for (i, (l, r)) in d.lhs.iter().zip(&d.rhs).enumerate() {
                rows.push(row(1, &format!("component {i}: 2√(−g)γ^aπ_aψ"), Some(*l), Some(*r)));
            }
        }
    }
    Ok(Expansion { target, point: x, rows })
}

fn fmt_pair(p: Option<[f64; 2]>) -> String {
    match p {
        None => "—".into(),
        Some([re, 0.0]) => format!("{re:.12e}"),
        Some([re, im]) => format!("{re:.12e} {im:+.3e}i"),
    }
}

pub fn cmd_expand(a: &ExpandArgs) -> Result<String> {
    let e = expand(load_config(&a.config, a.seed)?, a.target)?;
    if a.json {
        return Ok(serde_json::to_string_pretty(&e).expect("serializes") + "\n");
    }
    let mut s = format!("{:?} at x = {:?}\n", e.target, e.point);
    s.push_str(&format!("{:<6} {:<36} {:<40} {}\n", "order", "term", "computed", "predicted"));
    for r in &e.rows {
        s.push_str(&format!("ℓ^{:<4} {:<36} {:<40} {}\n", r.order, r.label, fmt_pair(r.computed), fmt_pair(r.predicted)));
    }
    Ok(s)
}

#[derive(Serialize)]
struct ConstantsOut {
    version: String,
    inputs: PhysicalInputs,
    derived: crate::constants::DerivedConstants,
}

pub fn cmd_constants(a: &ConstantsArgs) -> Result<String> {
    let (version, inputs) = match &a.inputs {
        Some(p) => PhysicalInputs::from_path(p)?,
        None => (BUNDLED_VERSION.to_string(), PhysicalInputs::bundled()),
    };
    let d = derive_constants(&inputs)?;
    if a.json {
        let out = ConstantsOut { version, inputs, derived: d };
        return Ok(serde_json::to_string_pretty(&out).expect("serializes") + "\n");
    }
    let rows = [
        ("ℓ", d.ell, "m"),
        ("ℓ/ℓ_p", d.ell_over_planck, ""),
        ("ℓ²", d.ell_squared, "m²"),
        ("λ_L", d.lambda_l, "kg m⁻² s⁻¹"),
        ("λ_R", d.lambda_r, "kg m⁻² s⁻¹"),
        ("λ_U", d.lambda_u, "s m⁻³"),
        ("λ_V", d.lambda_v, "s m⁻³"),
        ("p² + q²", d.vacuum_norm_squared, "V²"),
    ];
    let mut s = format!("inputs {version}  (α = {}, sin²θ_W = {})\n", inputs.fine_structure, inputs.sin2_weinberg);
    for (name, v, unit) in rows {
        s.push_str(&format!("{name:<10} {v:>22.12e} {unit}\n"));
    }
    Ok(s)
}

pub fn cmd_theta(mode: &ThetaMode) -> Result<String> {
    match *mode {
        ThetaMode::Transform { energy, charge, theta, ell, hbar, json } => {
            let s = ChargeEnergyState::new(energy, charge, ell, hbar)?;
            let m = transform_eq(&s, theta);
            if json {
                return Ok(serde_json::to_string_pretty(&serde_json::json!({ "theta": theta, "before": s, "after": m }))
                    .expect("serializes")
                    + "\n");
            }
            Ok(format!(
                "θ = {theta}\nE′ = {:.15e}  (units of ħ/ℓ × charge)\nQ′ = {:.15e}\nE² − (ħ/ℓ)²Q²: {:.15e} → {:.15e}\n",
                m.energy,
                m.charge,
                s.quadratic_form(),
                m.quadratic_form()
            ))
        }
        ThetaMode::Potentials { w3, b, g1, g2, ell, json } => {
            let t = theta_from_asymptotic_potentials(w3, b, g1, g2, ell)?;
            if json {
                return Ok(serde_json::to_string_pretty(&t).expect("serializes") + "\n");
            }
            Ok(format!(
                "θ_L = {:.15e}\nθ_R = {:.15e}\nconsistent (g′W³ = g″B): {}\n",
                t.theta_l, t.theta_r, t.consistent
            ))
        }
    }
}
