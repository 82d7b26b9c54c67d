//! Line-oriented run configuration.
//!
//! ```text
//! # comments start with '#'
//! generator = 3 0 0; 0 2 0; 0 0 1
//! gain = -5.5055 -15.8387 -16.3807
//! nu = 0.7
//! delta_angle = 0.15707963267948966
//! x0 = 1 1 1
//! ```
//!
//! Matrices are rows separated by `;` with entries separated by spaces.
//! Optional keys: `weight` (identity), `norm_power` (4), `step` (1e-4),
//! `t_end` (20), `quantized` (true), `rng_seed` (42).

use std::collections::HashMap;
use std::fmt::Write as _;

use dhom_core::{DMatrix, DVector, Dilation, QuantizerParams};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// The offending key for validation errors.
    pub fn key(&self) -> Option<&str> {
        match self {
            Self::Validation { key, .. } => Some(key),
            Self::Parse { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub generator: DMatrix<f64>,
    pub weight: DMatrix<f64>,
    pub gain: DMatrix<f64>,
    pub norm_power: f64,
    pub nu: f64,
    pub delta_angle: f64,
    pub x0: DVector<f64>,
    pub step: f64,
    pub t_end: f64,
    pub quantized: bool,
    pub rng_seed: u64,
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn dilation(&self) -> Result<Dilation, ConfigError> {
        Dilation::new(self.generator.clone(), self.weight.clone()).map_err(|e| {
            let key = match e {
                dhom_core::DilationError::NotSymmetric { .. }
                | dhom_core::DilationError::NotPositiveDefinite { .. } => "weight",
                _ => "generator",
            };
            ConfigError::invalid(key, e.to_string())
        })
    }

    pub fn quantizer_params(&self) -> Result<QuantizerParams, ConfigError> {
        use dhom_core::QuantizerError as Q;
        QuantizerParams::new(self.nu, self.delta_angle, self.dim()).map_err(|e| {
            let key = match e {
                Q::InvalidDensity(_) => "nu",
                Q::InvalidAngle(_) => "delta_angle",
                _ => "generator",
            };
            ConfigError::invalid(key, e.to_string())
        })
    }

    /// Checks every cross-key invariant.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.dim();
        if n == 0 || self.generator.ncols() != n {
            return Err(ConfigError::invalid(
                "generator",
                "must be a nonempty square matrix",
            ));
        }
        if self.weight.shape() != (n, n) {
            return Err(ConfigError::invalid("weight", format!("must be {n}x{n}")));
        }
        if self.gain.ncols() != n || self.gain.nrows() == 0 {
            return Err(ConfigError::invalid(
                "gain",
                format!("must have {n} columns"),
            ));
        }
        if self.x0.len() != n {
            return Err(ConfigError::invalid("x0", format!("must have {n} entries")));
        }
        let finite = |key: &str, values: &[f64]| {
            if values.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, "entries must be finite"))
            }
        };
        finite("generator", self.generator.as_slice())?;
        finite("weight", self.weight.as_slice())?;
        finite("gain", self.gain.as_slice())?;
        finite("x0", self.x0.as_slice())?;
        finite("norm_power", &[self.norm_power])?;
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(ConfigError::invalid("step", "must be positive"));
        }
        if !(self.t_end >= self.step && self.t_end.is_finite()) {
            return Err(ConfigError::invalid("t_end", "must be at least one step"));
        }
        self.quantizer_params()?;
        self.dilation()?;
        Ok(())
    }
}

const KEYS: [&str; 11] = [
    "generator",
    "weight",
    "gain",
    "norm_power",
    "nu",
    "delta_angle",
    "x0",
    "step",
    "t_end",
    "quantized",
    "rng_seed",
];

struct Entry<'a> {
    line: usize,
    column: usize,
    value: &'a str,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let column = content.len() - content.trim_start().len() + 1;
            return Err(ConfigError::parse(line, column, "expected `key = value`"));
        };
        let key = content[..eq].trim();
        let key_col = content.len() - content.trim_start().len() + 1;
        if key.is_empty() {
            return Err(ConfigError::parse(line, key_col, "missing key"));
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::parse(
                line,
                key_col,
                format!("unknown key `{key}`"),
            ));
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        let column = eq + 2 + (after.len() - after.trim_start().len());
        if value.is_empty() {
            return Err(ConfigError::parse(
                line,
                column,
                format!("missing value for `{key}`"),
            ));
        }
        if entries.contains_key(key) {
            return Err(ConfigError::parse(
                line,
                key_col,
                format!("duplicate key `{key}`"),
            ));
        }
        entries.insert(
            key,
            Entry {
                line,
                column,
                value,
            },
        );
    }

    let required = |key: &str| {
        entries
            .get(key)
            .ok_or_else(|| ConfigError::invalid(key, "required key is missing"))
    };
    let generator = parse_matrix(required("generator")?)?;
    let n = generator.nrows();
    let weight = match entries.get("weight") {
        Some(e) => parse_matrix(e)?,
        None => DMatrix::identity(n, n),
    };
    let gain = parse_matrix(required("gain")?)?;
    let x0 = parse_matrix(required("x0")?)?;
    if x0.nrows() != 1 {
        return Err(ConfigError::invalid("x0", "must be a single row"));
    }
    let x0 = DVector::from_iterator(x0.ncols(), x0.iter().copied());

    let real = |key: &str, default: Option<f64>| -> Result<f64, ConfigError> {
        match (entries.get(key), default) {
            (Some(e), _) => parse_real(e.value, e.line, e.column),
            (None, Some(v)) => Ok(v),
            (None, None) => Err(ConfigError::invalid(key, "required key is missing")),
        }
    };
    let quantized = match entries.get("quantized") {
        None => true,
        Some(e) => match e.value {
            "true" => true,
            "false" => false,
            other => {
                return Err(ConfigError::parse(
                    e.line,
                    e.column,
                    format!("expected true or false, got `{other}`"),
                ))
            }
        },
    };
    let rng_seed = match entries.get("rng_seed") {
        None => 42,
        Some(e) => e.value.parse().map_err(|_| {
            ConfigError::parse(
                e.line,
                e.column,
                format!("expected an unsigned integer, got `{}`", e.value),
            )
        })?,
    };

    let cfg = RunConfig {
        generator,
        weight,
        gain,
        norm_power: real("norm_power", Some(4.0))?,
        nu: real("nu", None)?,
        delta_angle: real("delta_angle", None)?,
        x0,
        step: real("step", Some(1e-4))?,
        t_end: real("t_end", Some(20.0))?,
        quantized,
        rng_seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_real(token: &str, line: usize, column: usize) -> Result<f64, ConfigError> {
    let v: f64 = token.parse().map_err(|_| {
        ConfigError::parse(line, column, format!("expected a number, got `{token}`"))
    })?;
    if !v.is_finite() {
        return Err(ConfigError::parse(
            line,
            column,
            format!("`{token}` is not finite"),
        ));
    }
    Ok(v)
}

fn parse_matrix(e: &Entry) -> Result<DMatrix<f64>, ConfigError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut offset = 0;
    for row in e.value.split(';') {
        let mut values = Vec::new();
        let mut pos = 0;
        for token in row.split_whitespace() {
            let at = row[pos..].find(token).map_or(pos, |i| pos + i);
            pos = at + token.len();
            values.push(parse_real(token, e.line, e.column + offset + at)?);
        }
        if values.is_empty() {
            return Err(ConfigError::parse(
                e.line,
                e.column + offset,
                "empty matrix row",
            ));
        }
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(ConfigError::parse(
                    e.line,
                    e.column + offset,
                    format!("row has {} entries, expected {}", values.len(), first.len()),
                ));
            }
        }
        rows.push(values);
        offset += row.len() + 1;
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        cols,
        rows.into_iter().flatten(),
    ))
}

fn write_matrix(out: &mut String, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        if i > 0 {
            out.push_str("; ");
        }
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(" "));
    }
}

/// Writes a document that [`parse_config`] reads back to an equal config.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let matrix = |out: &mut String, key: &str, m: &DMatrix<f64>| {
        out.push_str(key);
        out.push_str(" = ");
        write_matrix(out, m);
        out.push('\n');
    };
    matrix(&mut out, "generator", &cfg.generator);
    matrix(&mut out, "weight", &cfg.weight);
    matrix(&mut out, "gain", &cfg.gain);
    let x0 = DMatrix::from_row_slice(1, cfg.x0.len(), cfg.x0.as_slice());
    matrix(&mut out, "x0", &x0);
    let _ = writeln!(out, "norm_power = {:?}", cfg.norm_power);
    let _ = writeln!(out, "nu = {:?}", cfg.nu);
    let _ = writeln!(out, "delta_angle = {:?}", cfg.delta_angle);
    let _ = writeln!(out, "step = {:?}", cfg.step);
    let _ = writeln!(out, "t_end = {:?}", cfg.t_end);
    let _ = writeln!(out, "quantized = {}", cfg.quantized);
    let _ = writeln!(out, "rng_seed = {}", cfg.rng_seed);
    out
}

/// The third-order example configuration with `x0 = (1, 1, 1)`.
pub fn example_config() -> RunConfig {
    RunConfig {
        generator: DMatrix::from_diagonal(&DVector::from_column_slice(&[3.0, 2.0, 1.0])),
        weight: DMatrix::identity(3, 3),
        gain: DMatrix::from_row_slice(1, 3, &[-5.5055, -15.8387, -16.3807]),
        norm_power: 4.0,
        nu: 0.7,
        delta_angle: std::f64::consts::PI / 20.0,
        x0: DVector::from_element(3, 1.0),
        step: 1e-4,
        t_end: 20.0,
        quantized: true,
        rng_seed: 42,
    }
}
