//! Run configuration: flat `key = value` files merged with command-line flags.
//!
//! Every key has a flag of the same name with `_` replaced by `-`
//! (`temperature_K` ↔ `--temperature-K`). Flags win over the file.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use rotdecoh::potential::Preset;
use rotdecoh::rates::RadialModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bohr magneton [J/T].
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

pub const DEFAULT_QUADRUPOLE_COUPLING: f64 = 1e-30;
pub const DEFAULT_TEMPERATURE_K: f64 = 100.0;
pub const DEFAULT_GAS_MASS_KG: f64 = 1e-26;
pub const DEFAULT_DENSITY_PER_M3: f64 = 1e14;
pub const DEFAULT_OMEGA_RAD: f64 = 0.5 * PI;
pub const DEFAULT_Z_M: f64 = 1e-9;
pub const DEFAULT_LMAX: u32 = 2048;
pub const DEFAULT_TAIL_TOL: f64 = 1e-6;
pub const DEFAULT_COEFF_LMAX: u32 = 10;
pub const DEFAULT_ORACLE_TOL: f64 = 0.01;
pub const DEFAULT_ORACLE_NODES: usize = 12;

/// Points per axis of the default grid.
pub const DEFAULT_GRID_POINTS: usize = 100;
/// Physical distance range of the default grid [m].
pub const DEFAULT_Z_RANGE: (f64, f64) = (1e-15, 0.3);

/// Where a setting came from, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Line(usize),
    Flag(String),
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
            Origin::Default => f.write_str("defaults"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    Invalid { origin: Origin, message: String },
    #[error("{0}")]
    Flags(String),
}

fn invalid(origin: &Origin, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        origin: origin.clone(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Rate,
    Ratio,
    Grid,
    Coeffs,
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rate => "rate",
            Command::Ratio => "ratio",
            Command::Grid => "grid",
            Command::Coeffs => "coeffs",
            Command::OracleCheck => "oracle-check",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Command::Rate, Command::Ratio, Command::Grid, Command::Coeffs, Command::OracleCheck]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}' (expected rate, ratio, grid, coeffs or oracle-check)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format '{s}' (expected csv or json)")),
        }
    }
}

impl OutputFormat {
    fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// One explicit multipole term; amplitude in J m^exponent, cutoff in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub l: i32,
    pub m: i32,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub exponent: f64,
    pub cutoff_m: f64,
}

impl TermSpec {
    fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(format!("term needs l,m,amplitude_re,amplitude_im,exponent,cutoff_m; got '{s}'"));
        }
        let int = |i: usize| parts[i].parse::<i32>().map_err(|e| format!("'{}': {e}", parts[i]));
        let real = |i: usize| parse_f64(parts[i]);
        Ok(TermSpec {
            l: int(0)?,
            m: int(1)?,
            amplitude_re: real(2)?,
            amplitude_im: real(3)?,
            exponent: real(4)?,
            cutoff_m: real(5)?,
        })
    }

    fn emit(&self) -> String {
        format!(
            "{},{},{:?},{:?},{:?},{:?}",
            self.l, self.m, self.amplitude_re, self.amplitude_im, self.exponent, self.cutoff_m
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceSpec {
    Preset {
        preset: Preset,
        coupling1: f64,
        coupling2: f64,
    },
    /// Inline terms plus an optional CSV file read at run time.
    Terms {
        terms: Vec<TermSpec>,
        file: Option<PathBuf>,
    },
}

/// `n` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Sweep {
    pub fn linear(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.max } else { self.min + step * i as f64 })
            .collect()
    }

    pub fn logarithmic(&self) -> Vec<f64> {
        let (a, b) = (self.min.ln(), self.max.ln());
        let step = (b - a) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| match i {
                0 => self.min,
                _ if i + 1 == self.n => self.max,
                _ => (a + step * i as f64).exp(),
            })
            .collect()
    }
}

/// Grid axes; missing ones fall back to defaults at run time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GridSpec {
    /// Linear in radians.
    pub omega: Option<Sweep>,
    /// Logarithmic in meters.
    pub z: Option<Sweep>,
    /// Logarithmic in kelvin.
    pub temperature: Option<Sweep>,
}

impl GridSpec {
    fn parse(s: &str) -> Result<Self, String> {
        let mut g = GridSpec::default();
        for axis in s.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            let parts: Vec<&str> = axis.split(':').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(format!("axis '{axis}' is not name:min:max:n"));
            }
            let n: usize = parts[3].parse().map_err(|e| format!("'{}': {e}", parts[3]))?;
            let sweep = Sweep {
                min: parse_f64(parts[1])?,
                max: parse_f64(parts[2])?,
                n,
            };
            if !(sweep.min < sweep.max) {
                return Err(format!("axis '{axis}' needs min < max"));
            }
            if sweep.n < 2 {
                return Err(format!("axis '{axis}' needs at least 2 points"));
            }
            let slot = match parts[0] {
                "omega" => {
                    if sweep.min < 0.0 || sweep.max > 2.0 * PI {
                        return Err(format!("axis '{axis}' leaves [0, 2π]"));
                    }
                    &mut g.omega
                }
                "z" => &mut g.z,
                "T" => &mut g.temperature,
                other => return Err(format!("unknown grid axis '{other}' (expected omega, z or T)")),
            };
            if (parts[0] == "z" || parts[0] == "T") && !(sweep.min > 0.0 && sweep.max.is_finite()) {
                return Err(format!("axis '{axis}' is logarithmic and needs 0 < min < max < ∞"));
            }
            if slot.is_some() {
                return Err(format!("grid axis '{}' given twice", parts[0]));
            }
            *slot = Some(sweep);
        }
        Ok(g)
    }

    fn emit(&self) -> String {
        [("omega", self.omega), ("z", self.z), ("T", self.temperature)]
            .iter()
            .filter_map(|(name, s)| s.map(|s| format!("{name}:{:?}:{:?}:{}", s.min, s.max, s.n)))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub source: SourceSpec,
    pub temperature_k: f64,
    pub gas_mass_kg: f64,
    pub density_per_m3: f64,
    pub omega_rad: f64,
    pub z_m: f64,
    pub grid: Option<GridSpec>,
    pub lmax: u32,
    pub tail_tol: f64,
    pub radial_model: RadialModel,
    pub coeff_lmax: u32,
    pub oracle_tol: f64,
    pub oracle_nodes: usize,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    /// Flat-file form; parsing it back gives an identical configuration.
    pub fn to_config_text(&self) -> String {
        let mut lines = vec![format!("command = {}", self.command.name())];
        match &self.source {
            SourceSpec::Preset {
                preset,
                coupling1,
                coupling2,
            } => {
                lines.push(format!("preset = {preset}"));
                lines.push(format!("coupling1_SI = {coupling1:?}"));
                lines.push(format!("coupling2_SI = {coupling2:?}"));
            }
            SourceSpec::Terms { terms, file } => {
                for t in terms {
                    lines.push(format!("term = {}", t.emit()));
                }
                if let Some(f) = file {
                    lines.push(format!("terms_file = {}", f.display()));
                }
            }
        }
        lines.push(format!("temperature_K = {:?}", self.temperature_k));
        lines.push(format!("gas_mass_kg = {:?}", self.gas_mass_kg));
        lines.push(format!("density_per_m3 = {:?}", self.density_per_m3));
        lines.push(format!("omega_rad = {:?}", self.omega_rad));
        lines.push(format!("z_m = {:?}", self.z_m));
        if let Some(g) = &self.grid {
            lines.push(format!("grid = {}", g.emit()));
        }
        lines.push(format!("lmax = {}", self.lmax));
        lines.push(format!("tail_tol = {:?}", self.tail_tol));
        lines.push(format!("radial_model = {}", self.radial_model.name()));
        lines.push(format!("coeff_lmax = {}", self.coeff_lmax));
        lines.push(format!("oracle_tol = {:?}", self.oracle_tol));
        lines.push(format!("oracle_nodes = {}", self.oracle_nodes));
        lines.push(format!("format = {}", self.format.name()));
        if let Some(o) = &self.out {
            lines.push(format!("out = {}", o.display()));
        }
        lines.push(format!("seed = {}", self.seed));
        lines.join("\n") + "\n"
    }
}

/// Recognised keys. `term` may repeat.
pub const KEYS: &[&str] = &[
    "command",
    "preset",
    "coupling1_SI",
    "coupling2_SI",
    "term",
    "terms_file",
    "temperature_K",
    "gas_mass_kg",
    "density_per_m3",
    "omega_rad",
    "z_m",
    "grid",
    "lmax",
    "tail_tol",
    "radial_model",
    "coeff_lmax",
    "oracle_tol",
    "oracle_nodes",
    "format",
    "out",
    "seed",
];

/// Command-line flags.
#[derive(Debug, Parser)]
#[command(name = "rotdecoh", version, about = "Rotational and translational decoherence rates")]
pub struct Flags {
    /// rate, ratio, grid, coeffs or oracle-check
    pub command: Option<String>,
    /// Flat key = value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// dipole or quadrupole
    #[arg(long)]
    preset: Option<String>,
    /// First preset coupling (γ₁ in J/T, or μ₁)
    #[arg(long = "coupling1-SI")]
    coupling1: Option<String>,
    /// Second preset coupling (γ₂ in J/T, or μ₂)
    #[arg(long = "coupling2-SI")]
    coupling2: Option<String>,
    /// Explicit term l,m,amplitude_re,amplitude_im,exponent,cutoff_m (repeatable)
    #[arg(long)]
    term: Vec<String>,
    /// CSV of terms with header l,m,amplitude_re,amplitude_im,exponent,cutoff_m
    #[arg(long = "terms-file")]
    terms_file: Option<String>,
    #[arg(long = "temperature-K")]
    temperature: Option<String>,
    #[arg(long = "gas-mass-kg")]
    gas_mass: Option<String>,
    #[arg(long = "density-per-m3")]
    density: Option<String>,
    #[arg(long = "omega-rad")]
    omega: Option<String>,
    #[arg(long = "z-m")]
    z: Option<String>,
    /// Sweep axes, e.g. "omega:0.1:6.2:50,z:1e-12:1e-3:40,T:1e-4:100:3"
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    lmax: Option<String>,
    #[arg(long = "tail-tol")]
    tail_tol: Option<String>,
    /// exact, numeric or published
    #[arg(long = "radial-model")]
    radial_model: Option<String>,
    /// Largest l of the coeffs dump
    #[arg(long = "coeff-lmax")]
    coeff_lmax: Option<String>,
    #[arg(long = "oracle-tol")]
    oracle_tol: Option<String>,
    #[arg(long = "oracle-nodes")]
    oracle_nodes: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output file (stdout if absent)
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl Flags {
    fn settings(&self) -> Vec<(&'static str, &'static str, String)> {
        let single: [(&str, &str, &Option<String>); 20] = [
            ("command", "command", &self.command),
            ("preset", "preset", &self.preset),
            ("coupling1_SI", "coupling1-SI", &self.coupling1),
            ("coupling2_SI", "coupling2-SI", &self.coupling2),
            ("terms_file", "terms-file", &self.terms_file),
            ("temperature_K", "temperature-K", &self.temperature),
            ("gas_mass_kg", "gas-mass-kg", &self.gas_mass),
            ("density_per_m3", "density-per-m3", &self.density),
            ("omega_rad", "omega-rad", &self.omega),
            ("z_m", "z-m", &self.z),
            ("grid", "grid", &self.grid),
            ("lmax", "lmax", &self.lmax),
            ("tail_tol", "tail-tol", &self.tail_tol),
            ("radial_model", "radial-model", &self.radial_model),
            ("coeff_lmax", "coeff-lmax", &self.coeff_lmax),
            ("oracle_tol", "oracle-tol", &self.oracle_tol),
            ("oracle_nodes", "oracle-nodes", &self.oracle_nodes),
            ("format", "format", &self.format),
            ("out", "out", &self.out),
            ("seed", "seed", &self.seed),
        ];
        let mut out: Vec<_> = single
            .into_iter()
            .filter_map(|(k, f, v)| v.clone().map(|v| (k, f, v)))
            .collect();
        out.extend(self.term.iter().map(|t| ("term", "term", t.clone())));
        out
    }
}

/// Accepts Rust float syntax plus `pi`-multiples such as `0.5pi` or `pi/4`.
fn parse_f64(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let pi_form = |body: &str| -> Option<f64> {
        if let Some(rest) = body.strip_suffix("pi") {
            let c = rest.trim_end_matches('*');
            return if c.is_empty() { Some(1.0) } else { c.parse().ok() }.map(|c: f64| c * PI);
        }
        None
    };
    if let Some((num, den)) = t.split_once('/') {
        let n = pi_form(num).or_else(|| num.parse().ok());
        let d: Option<f64> = den.parse().ok();
        if let (Some(n), Some(d)) = (n, d) {
            return Ok(n / d);
        }
    }
    if let Some(v) = pi_form(t) {
        return Ok(v);
    }
    t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"))
}

type Entries = BTreeMap<&'static str, (String, Origin)>;

fn key_of(name: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == name)
}

fn parse_text(text: &str) -> Result<(Entries, Vec<(String, Origin)>), ConfigError> {
    let mut entries = Entries::new();
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let origin = Origin::Line(i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(&origin, format!("expected key = value, got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim().to_string());
        let key = key_of(k).ok_or_else(|| invalid(&origin, format!("unknown key '{k}'")))?;
        if key == "term" {
            terms.push((v, origin));
        } else if entries.insert(key, (v, origin.clone())).is_some() {
            return Err(invalid(&origin, format!("key '{k}' repeated")));
        }
    }
    Ok((entries, terms))
}

/// Parses a configuration file body and command-line flags (without the
/// program name) into a validated [`RunConfig`].
pub fn parse_config(text: &[u8], flags: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::str::from_utf8(text)
        .map_err(|e| invalid(&Origin::Line(1), format!("configuration is not UTF-8: {e}")))?;
    let parsed = Flags::try_parse_from(std::iter::once("rotdecoh".to_string()).chain(flags.iter().cloned()))
        .map_err(|e| ConfigError::Flags(e.to_string()))?;
    let (mut entries, mut terms) = parse_text(text)?;
    let mut flag_terms = Vec::new();
    for (key, flag, value) in parsed.settings() {
        let origin = Origin::Flag(flag.to_string());
        if key == "term" {
            flag_terms.push((value, origin));
        } else {
            entries.insert(key, (value, origin));
        }
    }
    if !flag_terms.is_empty() {
        terms = flag_terms;
    }
    build(&entries, &terms)
}

fn get<'a>(entries: &'a Entries, key: &str) -> Option<(&'a str, &'a Origin)> {
    entries.get(key).map(|(v, o)| (v.as_str(), o))
}

fn value<T>(entries: &Entries, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
    match get(entries, key) {
        None => Ok(default),
        Some((v, origin)) => parse(v).map_err(|m| invalid(origin, format!("{key}: {m}"))),
    }
}

fn real(entries: &Entries, key: &str, default: f64, check: fn(f64) -> bool, what: &str) -> Result<f64, ConfigError> {
    let v = value(entries, key, default, parse_f64)?;
    if check(v) {
        Ok(v)
    } else {
        let origin = get(entries, key).map(|(_, o)| o.clone()).unwrap_or(Origin::Default);
        Err(invalid(&origin, format!("{key} = {v} must be {what}")))
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

fn non_negative(v: f64) -> bool {
    v >= 0.0 && v.is_finite()
}

fn integer<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("'{s}': {e}"))
}

fn build(entries: &Entries, terms: &[(String, Origin)]) -> Result<RunConfig, ConfigError> {
    let command = match get(entries, "command") {
        Some((v, o)) => Command::from_str(v).map_err(|m| invalid(o, m))?,
        None => return Err(invalid(&Origin::Default, "no command given (rate, ratio, grid, coeffs or oracle-check)")),
    };

    let explicit = !terms.is_empty() || get(entries, "terms_file").is_some();
    let source = if explicit {
        for key in ["preset", "coupling1_SI", "coupling2_SI"] {
            if let Some((_, o)) = get(entries, key) {
                return Err(invalid(o, format!("{key} cannot be combined with explicit terms")));
            }
        }
        let mut list = Vec::with_capacity(terms.len());
        for (t, o) in terms {
            let parsed = TermSpec::parse(t).map_err(|m| invalid(o, m))?;
            validate_term(&parsed).map_err(|m| invalid(o, m))?;
            list.push(parsed);
        }
        SourceSpec::Terms {
            terms: list,
            file: get(entries, "terms_file").map(|(v, _)| PathBuf::from(v)),
        }
    } else {
        let preset = value(entries, "preset", Preset::Dipole, |s| Preset::from_str(s).map_err(|e| e.to_string()))?;
        let default = match preset {
            Preset::Dipole => BOHR_MAGNETON,
            Preset::Quadrupole => DEFAULT_QUADRUPOLE_COUPLING,
        };
        SourceSpec::Preset {
            preset,
            coupling1: real(entries, "coupling1_SI", default, positive, "positive")?,
            coupling2: real(entries, "coupling2_SI", default, positive, "positive")?,
        }
    };

    let grid = match get(entries, "grid") {
        None => None,
        Some((v, o)) => {
            if command != Command::Grid {
                return Err(invalid(o, format!("grid applies only to the grid command, not {}", command.name())));
            }
            Some(GridSpec::parse(v).map_err(|m| invalid(o, format!("grid: {m}")))?)
        }
    };

    let lmax = value(entries, "lmax", DEFAULT_LMAX, integer::<u32>)?;
    if lmax < 1 {
        return Err(invalid(&get(entries, "lmax").expect("set").1.clone(), "lmax must be at least 1"));
    }
    let oracle_nodes = value(entries, "oracle_nodes", DEFAULT_ORACLE_NODES, integer::<usize>)?;
    if oracle_nodes < 2 {
        return Err(invalid(
            &get(entries, "oracle_nodes").expect("set").1.clone(),
            "oracle_nodes must be at least 2",
        ));
    }

    Ok(RunConfig {
        command,
        source,
        temperature_k: real(entries, "temperature_K", DEFAULT_TEMPERATURE_K, positive, "positive")?,
        gas_mass_kg: real(entries, "gas_mass_kg", DEFAULT_GAS_MASS_KG, positive, "positive")?,
        density_per_m3: real(entries, "density_per_m3", DEFAULT_DENSITY_PER_M3, positive, "positive")?,
        omega_rad: real(entries, "omega_rad", DEFAULT_OMEGA_RAD, f64::is_finite, "finite")?,
        z_m: real(entries, "z_m", DEFAULT_Z_M, non_negative, "non-negative")?,
        grid,
        lmax,
        tail_tol: real(entries, "tail_tol", DEFAULT_TAIL_TOL, positive, "positive")?,
        radial_model: value(entries, "radial_model", RadialModel::Exact, |s| {
            RadialModel::from_str(s).map_err(|e| e.to_string())
        })?,
        coeff_lmax: value(entries, "coeff_lmax", DEFAULT_COEFF_LMAX, integer::<u32>)?,
        oracle_tol: real(entries, "oracle_tol", DEFAULT_ORACLE_TOL, positive, "positive")?,
        oracle_nodes,
        format: value(entries, "format", OutputFormat::Csv, OutputFormat::from_str)?,
        out: get(entries, "out").map(|(v, _)| PathBuf::from(v)),
        seed: value(entries, "seed", 0, integer::<u64>)?,
    })
}

/// Checks a term against the same rules the engine applies.
pub fn validate_term(t: &TermSpec) -> Result<(), String> {
    rotdecoh::potential::make_power_law_term(
        t.l,
        t.m,
        rotdecoh::Complex64::new(t.amplitude_re, t.amplitude_im),
        t.exponent,
        t.cutoff_m,
    )
    .map(|_| ())
    .map_err(|e| e.to_string())
}
