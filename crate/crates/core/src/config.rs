//! Run configuration shared by the command line and configuration files.
//! Files are flat TOML tables; every value is a string or an integer.
//!
//! ```toml
//! curve = "nodal"        # nodal | p1
//! va = "virasoro"        # heisenberg | virasoro
//! c = "1/2"              # exact "p/q", used by virasoro
//! modules = "V,V"        # one module per puncture
//! points = 2             # number of punctures on p1
//! truncate = 6           # N ≥ 1
//! max_pole = 8           # default N + 2
//! max_deg = 8            # default N + 2
//! format = "csv"         # csv | text
//! seed = 0
//! samples = 200          # budget for sampled checks
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::blocks::{Bounds, ModuleSpec};
use crate::curves::{CurveKind, CurveModel};
use crate::exactalg::{format_scalar, parse_scalar, ParseScalarError, Scalar};
use crate::series::{DiscAuto, SeriesError};
use crate::vacore::{VaKind, VertexAlgebra};

pub const KEYS: [&str; 11] = [
    "curve", "va", "c", "modules", "points", "truncate", "max_pole", "max_deg", "format", "seed", "samples",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("{0}")]
    Inconsistent(String),
}

fn bad(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

/// Reads a flat TOML table into key/value text.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let mut out = BTreeMap::new();
    for (k, v) in table {
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k));
        }
        let text = match v {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            other => return Err(bad(&k, format!("expected a string or integer, got {}", other.type_str()))),
        };
        out.insert(k, text);
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum OutputFormat {
    Csv,
    Text,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RunConfig {
    pub curve: CurveKind,
    pub algebra: VaKind,
    pub modules: Option<Vec<ModuleSpec>>,
    pub points: Option<usize>,
    pub truncation: usize,
    pub max_pole: Option<u32>,
    pub max_deg: Option<u32>,
    pub format: OutputFormat,
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            curve: CurveKind::NodalPair,
            algebra: VaKind::Heisenberg,
            modules: None,
            points: None,
            truncation: 4,
            max_pole: None,
            max_deg: None,
            format: OutputFormat::Text,
            seed: 0,
            samples: 200,
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(key, e))
}

impl RunConfig {
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for k in pairs.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(ConfigError::UnknownKey(k.clone()));
            }
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        if let Some(v) = get("curve") {
            cfg.curve = match v {
                "nodal" => CurveKind::NodalPair,
                "p1" => CurveKind::ProjectiveLine,
                other => return Err(bad("curve", format!("expected nodal or p1, got `{other}`"))),
            };
        }
        let c = get("c")
            .map(|v| parse_scalar(v).map_err(|e: ParseScalarError| bad("c", e)))
            .transpose()?;
        if let Some(v) = get("va") {
            cfg.algebra = match v {
                "heisenberg" => VaKind::Heisenberg,
                "virasoro" => VaKind::Virasoro(c.clone().ok_or_else(|| bad("c", "virasoro needs a central charge"))?),
                other => return Err(bad("va", format!("expected heisenberg or virasoro, got `{other}`"))),
            };
        }
        if let Some(v) = get("modules") {
            let mods = v.split(',').map(ModuleSpec::parse).collect::<Result<Vec<_>, _>>().map_err(|e| bad("modules", e))?;
            cfg.modules = Some(mods);
        }
        if let Some(v) = get("points") {
            cfg.points = Some(number("points", v)?);
        }
        if let Some(v) = get("truncate") {
            cfg.truncation = number("truncate", v)?;
            if cfg.truncation == 0 {
                return Err(bad("truncate", "N must be at least 1"));
            }
        }
        if let Some(v) = get("max_pole") {
            cfg.max_pole = Some(number("max_pole", v)?);
        }
        if let Some(v) = get("max_deg") {
            cfg.max_deg = Some(number("max_deg", v)?);
        }
        if let Some(v) = get("format") {
            cfg.format = match v {
                "csv" => OutputFormat::Csv,
                "text" => OutputFormat::Text,
                other => return Err(bad("format", format!("expected csv or text, got `{other}`"))),
            };
        }
        if let Some(v) = get("seed") {
            cfg.seed = number("seed", v)?;
        }
        if let Some(v) = get("samples") {
            cfg.samples = number("samples", v)?;
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_pairs(&parse_config_text(text)?)
    }

    pub fn bounds(&self) -> Bounds {
        let d = Bounds::for_truncation(self.truncation);
        Bounds {
            max_pole: self.max_pole.unwrap_or(d.max_pole),
            max_deg: self.max_deg.unwrap_or(d.max_deg),
        }
    }

    pub fn vertex_algebra(&self) -> VertexAlgebra {
        VertexAlgebra::new(self.algebra.clone(), self.truncation)
    }

    pub fn central_charge(&self) -> Option<&Scalar> {
        match &self.algebra {
            VaKind::Virasoro(c) => Some(c),
            VaKind::Heisenberg => None,
        }
    }

    /// The punctured curve and its insertions. A single nodal insertion
    /// sits at `∞₁`.
    pub fn insertions(&self) -> Result<(CurveModel, Vec<ModuleSpec>), ConfigError> {
        let count = match (&self.modules, self.points) {
            (Some(m), Some(p)) if m.len() != p => {
                return Err(ConfigError::Inconsistent(format!("{} modules given for {p} points", m.len())))
            }
            (Some(m), _) => m.len(),
            (None, Some(p)) => p,
            (None, None) => match self.curve {
                CurveKind::NodalPair => 2,
                CurveKind::ProjectiveLine => 1,
            },
        };
        let curve = match self.curve {
            CurveKind::NodalPair => match count {
                1 => CurveModel::nodal_with(&[1]),
                2 => Ok(CurveModel::nodal()),
                _ => return Err(ConfigError::Inconsistent("the nodal curve has one or two punctures".into())),
            },
            CurveKind::ProjectiveLine => CurveModel::projective_line(count),
        }
        .map_err(|e| ConfigError::Inconsistent(e.to_string()))?;
        let modules = self.modules.clone().unwrap_or_else(|| vec![ModuleSpec::Vacuum; count]);
        Ok((curve, modules))
    }

    /// Every key with its effective value, in schema order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("curve".to_string(), self.curve.id().to_string()),
            (
                "va".to_string(),
                match self.algebra {
                    VaKind::Heisenberg => "heisenberg".into(),
                    VaKind::Virasoro(_) => "virasoro".into(),
                },
            ),
        ];
        if let Some(c) = self.central_charge() {
            out.push(("c".into(), format_scalar(c)));
        }
        if let Some(m) = &self.modules {
            out.push(("modules".into(), m.iter().map(|m| m.label()).collect::<Vec<_>>().join(",")));
        }
        if let Some(p) = self.points {
            out.push(("points".into(), p.to_string()));
        }
        let b = self.bounds();
        out.extend([
            ("truncate".to_string(), self.truncation.to_string()),
            ("max_pole".to_string(), b.max_pole.to_string()),
            ("max_deg".to_string(), b.max_deg.to_string()),
            (
                "format".to_string(),
                match self.format {
                    OutputFormat::Csv => "csv".into(),
                    OutputFormat::Text => "text".into(),
                },
            ),
            ("seed".to_string(), self.seed.to_string()),
            ("samples".to_string(), self.samples.to_string()),
        ]);
        out
    }

    /// The configuration as a TOML document that [`RunConfig::parse`] reads back.
    pub fn render(&self) -> String {
        let mut table = toml::Table::new();
        for (k, v) in self.to_pairs() {
            table.insert(k, toml_value(&v));
        }
        table.to_string()
    }
}

/// Integers stay integers; everything else is a string.
pub fn toml_value(v: &str) -> toml::Value {
    match v.parse::<i64>() {
        Ok(i) if i.to_string() == v => toml::Value::Integer(i),
        _ => toml::Value::String(v.to_string()),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoordsInputError {
    #[error("coefficient {index}: {source}")]
    Scalar { index: usize, source: ParseScalarError },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `"a₁,a₂,…"` as the automorphism `a₁z + a₂z² + …`, known modulo `z^{k+1}`.
pub fn parse_coords_input(text: &str) -> Result<DiscAuto, CoordsInputError> {
    let coefficients = text
        .split(',')
        .enumerate()
        .map(|(i, s)| parse_scalar(s).map_err(|source| CoordsInputError::Scalar { index: i + 1, source }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DiscAuto::new(coefficients)?)
}
