//! Scenario configuration files.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub manifold: ManifoldConfig,
    #[serde(default)]
    pub couplings: Option<Couplings>,
    #[serde(default)]
    pub fields: FieldConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Resolutions of the convergence series: angular vertex counts on an annulus,
    /// subdivision levels on a sphere. The finest level is the reported state.
    #[serde(default)]
    pub refinement: Vec<usize>,
    #[serde(default)]
    pub expected_order: Option<f64>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldConfig {
    Annulus(AnnulusConfig),
    Sphere(SphereConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub n_theta: usize,
    /// Ring count at `n_theta`; defaults to near-equilateral triangles.
    #[serde(default)]
    pub n_r: Option<usize>,
    pub r_in: f64,
    pub r_out: f64,
    pub charts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub subdivision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub k: i64,
    pub p: i64,
    pub n: i64,
    #[serde(default = "unit")]
    pub e2: f64,
}

fn unit() -> f64 {
    1.0
}

/// `c + Σ_m (cos_m cos mθ + sin_m sin mθ)`, `m ≥ 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fourier {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl Fourier {
    pub fn eval(&self, t: f64) -> f64 {
        let wave = |c: &[f64], f: fn(f64) -> f64| c.iter().enumerate().map(|(m, a)| a * f((m + 1) as f64 * t)).sum::<f64>();
        self.constant + wave(&self.cos, f64::cos) + wave(&self.sin, f64::sin)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let mut d = 0.0;
        for (m, a) in self.cos.iter().enumerate() {
            let m = (m + 1) as f64;
            d -= a * m * (m * t).sin();
        }
        for (m, b) in self.sin.iter().enumerate() {
            let m = (m + 1) as f64;
            d += b * m * (m * t).cos();
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    #[serde(default)]
    pub x: u32,
    #[serde(default)]
    pub y: u32,
    pub coeff: f64,
}

/// A polynomial in the plane coordinates, as a list of monomials.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<Monomial>);

impl Polynomial {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.iter().map(|m| m.coeff * x.powi(m.x as i32) * y.powi(m.y as i32)).sum()
    }

    /// `∂_θ` at the point `(x, y)`: `x ∂_y - y ∂_x`.
    pub fn angular_derivative(&self, x: f64, y: f64) -> f64 {
        self.0
            .iter()
            .map(|m| {
                let dx = if m.x > 0 { m.x as f64 * x.powi(m.x as i32 - 1) * y.powi(m.y as i32) } else { 0.0 };
                let dy = if m.y > 0 { m.y as f64 * x.powi(m.x as i32) * y.powi(m.y as i32 - 1) } else { 0.0 };
                m.coeff * (x * dy - y * dx)
            })
            .sum()
    }
}

/// A polynomial 1-form `P dx + Q dy`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialForm {
    #[serde(default)]
    pub dx: Polynomial,
    #[serde(default)]
    pub dy: Polynomial,
}

/// Smearing of the dual edge mode: a Fourier series plus `w θ` over charts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualSmearing {
    #[serde(default)]
    pub fourier: Fourier,
    #[serde(default)]
    pub winding: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// Electric smearing function `α(θ)`.
    #[serde(default)]
    pub alpha: Fourier,
    /// Magnetic smearing functions `α̃_i`.
    #[serde(default)]
    pub dual_alpha: DualSmearing,
    /// `χ` with `A = dχ`.
    #[serde(default)]
    pub potential_gauge: Polynomial,
    /// The edge mode `φ`.
    #[serde(default)]
    pub edge_mode: Polynomial,
    /// `Ã`, set to zero on the corner so that the state stays on shell.
    #[serde(default)]
    pub dual_potential: PolynomialForm,
    /// Strength `g` of the sphere 1-form `g (1 - cos ϑ) dφ`.
    #[serde(default)]
    pub monopole: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Bound for linear-solve residuals and equations of motion.
    #[serde(default = "numeric")]
    pub numeric: f64,
    /// Relative bound against quadrature oracles.
    #[serde(default = "oracle")]
    pub oracle_relative: f64,
    /// Allowed deviation of a fitted convergence order.
    #[serde(default = "slack")]
    pub order_slack: f64,
}

fn numeric() -> f64 {
    1e-8
}

fn oracle() -> f64 {
    0.01
}

fn slack() -> f64 {
    0.2
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { numeric: numeric(), oracle_relative: oracle(), order_slack: slack() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.into_inner().to_string();
            if path == "manifold" {
                manifold_error(text).unwrap_or(Error::Config { path, message })
            } else {
                Error::Config { path, message }
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks ranges and cross-field constraints, reporting the offending field path.
    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Err(Error::Config { path: path.into(), message });
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return bad("name", format!("`{}` is not a plain identifier", self.name));
        }
        match &self.manifold {
            ManifoldConfig::Annulus(AnnulusConfig { n_theta, n_r, r_in, r_out, charts }) => {
                if !(*r_in > 0.0 && r_out > r_in) {
                    return bad("manifold.r_out", format!("need 0 < r_in < r_out, got {r_in}, {r_out}"));
                }
                if *charts < 3 || *n_theta < 2 * charts {
                    return bad("manifold.charts", format!("{charts} charts on {n_theta} angular vertices"));
                }
                if *n_r == Some(0) {
                    return bad("manifold.n_r", "at least one ring of triangles".into());
                }
                let Some(c) = &self.couplings else {
                    return bad("couplings", "an annulus scenario needs couplings k, p, n".into());
                };
                if c.k == 0 {
                    return bad("couplings.k", "k must be nonzero".into());
                }
                if !(c.e2 > 0.0) {
                    return bad("couplings.e2", format!("e² must be positive, got {}", c.e2));
                }
                if let Some(&l) = self.refinement.iter().find(|&&l| l < 2 * charts) {
                    return bad("refinement", format!("level {l} is too coarse for {charts} charts"));
                }
            }
            ManifoldConfig::Sphere(SphereConfig { subdivision }) => {
                if *subdivision < 2 {
                    return bad("manifold.subdivision", "the sphere cover needs subdivision >= 2".into());
                }
                if let Some(&l) = self.refinement.iter().find(|&&l| !(2..=7).contains(&l)) {
                    return bad("refinement", format!("sphere level {l} outside 2..=7"));
                }
            }
        }
        for (path, t) in [
            ("tolerances.numeric", self.tolerances.numeric),
            ("tolerances.oracle_relative", self.tolerances.oracle_relative),
            ("tolerances.order_slack", self.tolerances.order_slack),
        ] {
            if !(t > 0.0) {
                return bad(path, format!("tolerance must be positive, got {t}"));
            }
        }
        if self.refinement.windows(2).any(|w| w[1] <= w[0]) {
            return bad("refinement", "levels must increase strictly".into());
        }
        Ok(())
    }

    /// Resolution levels, coarse to fine; the configured manifold when no series is given.
    pub fn levels(&self) -> Vec<usize> {
        if !self.refinement.is_empty() {
            return self.refinement.clone();
        }
        match self.manifold {
            ManifoldConfig::Annulus(a) => vec![a.n_theta],
            ManifoldConfig::Sphere(sp) => vec![sp.subdivision],
        }
    }
}

/// The tagged manifold is buffered before its variant is known, which hides the failing
/// field; parsing the variant on its own recovers it.
fn manifold_error(text: &str) -> Option<Error> {
    let raw: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut body = raw.get("manifold")?.as_object()?.clone();
    let kind = body.remove("kind")?;
    let body = serde_json::Value::Object(body);
    let err = match kind.as_str()? {
        "annulus" => serde_path_to_error::deserialize::<_, AnnulusConfig>(body).err()?,
        "sphere" => serde_path_to_error::deserialize::<_, SphereConfig>(body).err()?,
        _ => return None,
    };
    let path = format!("manifold.{}", err.path());
    Some(Error::Config { path, message: err.into_inner().to_string() })
}

/// Ring count for an annulus level, scaled from the configured one or chosen so that
/// radial and angular spacing agree.
pub fn rings_for(n_theta: usize, base_theta: usize, n_r: Option<usize>, r_in: f64, r_out: f64) -> usize {
    match n_r {
        Some(r) => (r * n_theta).div_ceil(base_theta).max(1),
        None => ((r_out / r_in).ln() / (0.5 * 3f64.sqrt() * TAU / n_theta as f64)).round().max(1.0) as usize,
    }
}
