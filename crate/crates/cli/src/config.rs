//! Run configuration: defaults, `key = value` config files and flag
//! overrides, all funnelled through the same per-key setter.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qfractal_core::ifs::{Preset, DEFAULT_BURN_IN};
use qfractal_core::mobius::{ProbabilityMode, UnitVec3};
use qfractal_core::raster::ToneMode;

/// Custom direction vectors further than this from unit norm are rejected
/// rather than silently normalized.
pub const DIRECTION_NORM_TOL: f64 = 1e-6;
pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Quantum,
    Sierpinski,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hemisphere {
    Upper,
    Lower,
    Both,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quantum => "quantum",
            Self::Sierpinski => "sierpinski",
        })
    }
}

impl fmt::Display for Hemisphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Upper => "upper",
            Self::Lower => "lower",
            Self::Both => "both",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CustomGenerator {
    pub direction: UnitVec3,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub preset: Preset,
    pub alpha: f64,
    pub generators: Vec<CustomGenerator>,
    pub points: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub seeds: usize,
    pub resolution: (usize, usize),
    pub probability: ProbabilityMode,
    pub tone: ToneMode,
    pub hemisphere: Hemisphere,
    pub flip: bool,
    pub plain: bool,
    pub dump_points: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Quantum,
            preset: Preset::Cube8,
            alpha: 0.71,
            generators: Vec::new(),
            points: 1_000_000,
            burn_in: DEFAULT_BURN_IN,
            seed: 1,
            seeds: 1,
            resolution: (600, 600),
            probability: ProbabilityMode::LambdaWeighted,
            tone: ToneMode::Log,
            hemisphere: Hemisphere::Upper,
            flip: false,
            plain: false,
            dump_points: None,
            out: PathBuf::from("fractal.pgm"),
        }
    }
}

/// Where a setting came from, for error messages.
#[derive(Clone, Debug)]
pub enum Origin<'a> {
    Flag,
    Line(&'a Path, usize),
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn located(origin: &Origin<'_>, key: &str, msg: impl fmt::Display) -> ConfigError {
    match origin {
        Origin::Flag => ConfigError(format!("--{}: {msg}", key.replace('_', "-"))),
        Origin::Line(path, line) => ConfigError(format!("{}:{line}: {key}: {msg}", path.display())),
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.replace('_', "");
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    // allow `1e6` style counts when they denote an exact integer
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("`{s}` is not a number"))
}

pub fn check_alpha(alpha: f64) -> Result<f64, String> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(format!("alpha {alpha} outside the open interval (0, 1)"))
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("`{s}` is not of the form WIDTHxHEIGHT"))?;
    let dim = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("`{s}` is not of the form WIDTHxHEIGHT"));
    let (w, h) = (dim(w)?, dim(h)?);
    if w < MIN_RESOLUTION || h < MIN_RESOLUTION {
        return Err(format!("resolution {w}x{h} is below the minimum {MIN_RESOLUTION}x{MIN_RESOLUTION}"));
    }
    Ok((w, h))
}

/// `nx ny nz alpha`; `n` is normalized when within [`DIRECTION_NORM_TOL`] of unit length.
pub fn parse_generator(s: &str) -> Result<CustomGenerator, String> {
    let fields: Vec<&str> = s.split_whitespace().collect();
    let [nx, ny, nz, a] = fields[..] else {
        return Err(format!("expected `nx ny nz alpha`, got `{s}`"));
    };
    let (x, y, z) = (parse_real(nx)?, parse_real(ny)?, parse_real(nz)?);
    let norm = (x * x + y * y + z * z).sqrt();
    if (norm - 1.0).abs() > DIRECTION_NORM_TOL {
        return Err(format!("direction has norm {norm}, expected 1 (tolerance {DIRECTION_NORM_TOL})"));
    }
    let direction = UnitVec3::new(x, y, z).map_err(|e| e.to_string())?;
    Ok(CustomGenerator { direction, alpha: check_alpha(parse_real(a)?)? })
}

pub fn parse_alphas(s: &str) -> Result<Vec<f64>, String> {
    let alphas = s
        .split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| parse_real(t).and_then(check_alpha))
        .collect::<Result<Vec<_>, _>>()?;
    if alphas.is_empty() {
        return Err("empty alpha list".into());
    }
    Ok(alphas)
}

fn parse_enum<T: FromStr>(s: &str, what: &str, options: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("unknown {what} `{s}` (expected {options})"))
}

impl RunConfig {
    /// Applies one `key = value` setting. Keys use underscores; dashes are
    /// accepted as well.
    pub fn set(&mut self, key: &str, value: &str, origin: &Origin<'_>) -> Result<(), ConfigError> {
        let key = key.replace('-', "_");
        let err = |msg: String| located(origin, &key, msg);
        let value = value.trim();
        match key.as_str() {
            "mode" => {
                self.mode = match value {
                    "quantum" => Mode::Quantum,
                    "sierpinski" => Mode::Sierpinski,
                    _ => return Err(err(format!("unknown mode `{value}` (expected quantum or sierpinski)"))),
                }
            }
            "preset" => self.preset = parse_enum(value, "preset", "cube8, octa6 or custom").map_err(err)?,
            "alpha" => self.alpha = parse_real(value).and_then(check_alpha).map_err(err)?,
            "generator" => self.generators.push(parse_generator(value).map_err(err)?),
            "points" => self.points = parse_count(value).map_err(err)?,
            "burn_in" => self.burn_in = parse_count(value).map_err(err)?,
            "seed" => self.seed = parse_count(value).map_err(err)?,
            "seeds" => {
                let n = parse_count(value).map_err(err)?;
                self.seeds = usize::try_from(n).map_err(|_| err(format!("{n} chains is too many")))?;
            }
            "res" | "resolution" => self.resolution = parse_resolution(value).map_err(err)?,
            "probability" => {
                self.probability = parse_enum(value, "probability mode", "lambda or uniform").map_err(err)?
            }
            "tone" => self.tone = parse_enum(value, "tone mode", "log or linear").map_err(err)?,
            "hemisphere" => {
                self.hemisphere = match value {
                    "upper" => Hemisphere::Upper,
                    "lower" => Hemisphere::Lower,
                    "both" => Hemisphere::Both,
                    _ => return Err(err(format!("unknown hemisphere `{value}` (expected upper, lower or both)"))),
                }
            }
            "flip" => self.flip = parse_bool(value).map_err(err)?,
            "plain" => self.plain = parse_bool(value).map_err(err)?,
            "dump_points" => self.dump_points = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            _ => return Err(located(origin, &key, "unknown key")),
        }
        Ok(())
    }

    /// Applies every setting of a config file in order.
    pub fn apply_file(&mut self, text: &str, path: &Path) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::Line(path, idx + 1);
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!("{}:{}: expected `key = value`", path.display(), idx + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(located(&origin, key, "missing value"));
            }
            self.set(key, value, &origin)?;
        }
        Ok(())
    }

    /// Cross-field checks that only make sense once every source is applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mode == Mode::Quantum {
            let custom = self.preset == Preset::Custom;
            if custom && self.generators.is_empty() {
                return Err(ConfigError("preset custom needs at least one generator".into()));
            }
            if !custom && !self.generators.is_empty() {
                return Err(ConfigError("generators are only allowed with preset custom".into()));
            }
        }
        if self.points == 0 {
            return Err(ConfigError("points must be at least 1".into()));
        }
        if self.seeds == 0 {
            return Err(ConfigError("seeds must be at least 1".into()));
        }
        if self.dump_points.is_some() && self.seeds > 1 {
            return Err(ConfigError("dump-points requires a single chain".into()));
        }
        Ok(())
    }
}
