//! Command execution.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rotdecoh::coefficients::{g_rotational, nonvanishing_keys, r_closed};
use rotdecoh::oracle::sphere_integral_sq_amplitude;
use rotdecoh::potential::{make_power_law_term, MultipoleTerm, Orientation, Preset};
use rotdecoh::rates::{
    dimensionless_distance, integrated_sq_amplitude, lambda_rotational, lambda_translational, rate_ratio,
    Environment, RateReport, RateSource, SeriesOptions, Superposition,
};
use rotdecoh::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::config::{
    Command, ConfigError, OutputFormat, RunConfig, SourceSpec, Sweep, TermSpec, DEFAULT_GRID_POINTS, DEFAULT_Z_RANGE,
};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Validation = 1,
    Numerical = 2,
    OracleMismatch = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] rotdecoh::Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Engine(e) if e.is_numerical() => ExitStatus::Numerical,
            _ => ExitStatus::Validation,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn environment(config: &RunConfig, temperature: f64) -> Result<Environment, CliError> {
    Ok(Environment::new(config.density_per_m3, config.gas_mass_kg, temperature)?)
}

pub fn series_options(config: &RunConfig) -> SeriesOptions {
    SeriesOptions {
        l_max: config.lmax,
        tail_tol: config.tail_tol,
        radial: config.radial_model,
        ..SeriesOptions::default()
    }
}

/// Reads a CSV term file with header `l,m,amplitude_re,amplitude_im,exponent,cutoff_m`.
pub fn read_terms_file(path: &Path) -> Result<Vec<TermSpec>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<TermSpec>().enumerate() {
        let t = row.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        crate::config::validate_term(&t)
            .map_err(|m| CliError::Input(format!("{} row {}: {m}", path.display(), i + 1)))?;
        out.push(t);
    }
    Ok(out)
}

fn term_list(terms: &[TermSpec], file: Option<&Path>) -> Result<Vec<MultipoleTerm>, CliError> {
    let mut all = terms.to_vec();
    if let Some(f) = file {
        all.extend(read_terms_file(f)?);
    }
    if all.is_empty() {
        return Err(CliError::Input("term list is empty".into()));
    }
    all.iter()
        .map(|t| {
            Ok(make_power_law_term(
                t.l,
                t.m,
                Complex64::new(t.amplitude_re, t.amplitude_im),
                t.exponent,
                t.cutoff_m,
            )?)
        })
        .collect()
}

pub fn rate_source(config: &RunConfig) -> Result<RateSource, CliError> {
    Ok(match &config.source {
        SourceSpec::Preset {
            preset,
            coupling1,
            coupling2,
        } => RateSource::preset(*preset, *coupling1, *coupling2)?,
        SourceSpec::Terms { terms, file } => RateSource::Terms(term_list(terms, file.as_deref())?),
    })
}

/// Uniformly distributed orientation drawn from `seed`.
pub fn seeded_orientation(seed: u64) -> Orientation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    Orientation { theta: c.acos(), phi }
}

/// Terms at fixed orientation: presets are oriented by the seed.
pub fn fixed_terms(config: &RunConfig) -> Result<Vec<MultipoleTerm>, CliError> {
    match rate_source(config)? {
        RateSource::Preset {
            preset,
            coupling1,
            coupling2,
        } => Ok(preset.terms(coupling1, coupling2, seeded_orientation(config.seed))?),
        RateSource::Terms(t) => Ok(t),
    }
}

pub fn rate_reports(config: &RunConfig) -> Result<Vec<RateReport>, CliError> {
    let source = rate_source(config)?;
    let env = environment(config, config.temperature_k)?;
    let opts = series_options(config);
    Ok(vec![
        lambda_rotational(&source, &env, config.omega_rad, &opts)?,
        lambda_translational(&source, &env, config.z_m, &opts)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub temperature_k: f64,
    pub omega: f64,
    pub z: f64,
    pub z_dimensionless: f64,
    pub ratio: f64,
}

pub fn ratio_row(config: &RunConfig) -> Result<GridRow, CliError> {
    let source = rate_source(config)?;
    let env = environment(config, config.temperature_k)?;
    Ok(GridRow {
        temperature_k: config.temperature_k,
        omega: config.omega_rad,
        z: config.z_m,
        z_dimensionless: dimensionless_distance(&env, config.z_m),
        ratio: rate_ratio(&source, &env, config.omega_rad, config.z_m, &series_options(config))?,
    })
}

/// `n` angles centred in `n` equal slices of (0, 2π), symmetric about π.
pub fn default_omega_axis(n: usize) -> Vec<f64> {
    let h = PI / n as f64;
    Sweep {
        min: h,
        max: 2.0 * PI - h,
        n,
    }
    .linear()
}

pub fn default_z_axis(n: usize) -> Vec<f64> {
    Sweep {
        min: DEFAULT_Z_RANGE.0,
        max: DEFAULT_Z_RANGE.1,
        n,
    }
    .logarithmic()
}

/// Rows ordered by temperature, then ω, then z.
pub fn grid_rows(config: &RunConfig) -> Result<Vec<GridRow>, CliError> {
    let axes = config.grid.unwrap_or_default();
    let omegas = axes.omega.map_or_else(|| default_omega_axis(DEFAULT_GRID_POINTS), |s| s.linear());
    let zs = axes.z.map_or_else(|| default_z_axis(DEFAULT_GRID_POINTS), |s| s.logarithmic());
    let temps = axes.temperature.map_or_else(|| vec![config.temperature_k], |s| s.logarithmic());
    let source = rate_source(config)?;
    let opts = series_options(config);

    let mut rows = Vec::with_capacity(temps.len() * omegas.len() * zs.len());
    for &t in &temps {
        let env = environment(config, t)?;
        let block: Vec<Result<Vec<GridRow>, CliError>> = match &source {
            RateSource::Preset { .. } => omegas
                .par_iter()
                .map(|&w| {
                    zs.iter()
                        .map(|&z| {
                            Ok(GridRow {
                                temperature_k: t,
                                omega: w,
                                z,
                                z_dimensionless: dimensionless_distance(&env, z),
                                ratio: rate_ratio(&source, &env, w, z, &opts)?,
                            })
                        })
                        .collect()
                })
                .collect(),
            RateSource::Terms(_) => {
                // Λ_T is exactly quadratic in z, so one evaluation per temperature suffices
                let per_m2 = lambda_translational(&source, &env, 1.0, &opts)?.lambda;
                if per_m2 == 0.0 {
                    return Err(rotdecoh::Error::DivisionDomain("translational rate vanishes".into()).into());
                }
                omegas
                    .par_iter()
                    .map(|&w| {
                        let rot = lambda_rotational(&source, &env, w, &opts)?.lambda;
                        Ok(zs
                            .iter()
                            .map(|&z| GridRow {
                                temperature_k: t,
                                omega: w,
                                z,
                                z_dimensionless: dimensionless_distance(&env, z),
                                ratio: rot / (per_m2 * z * z),
                            })
                            .collect())
                    })
                    .collect()
            }
        };
        for b in block {
            rows.extend(b?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffRow {
    pub l: i32,
    pub m: i32,
    pub l_p: i32,
    pub m_p: i32,
    pub l_pp: i32,
    pub m_pp: i32,
    pub g: Complex64,
    pub r: Complex64,
}

/// `G` at `omega_rad` and the published `R` (unit amplitude, k = 1) for
/// every non-vanishing index with `l <= coeff_lmax`.
pub fn coeff_rows(config: &RunConfig) -> Result<Vec<CoeffRow>, CliError> {
    let SourceSpec::Preset { preset, .. } = &config.source else {
        return Err(CliError::Input("coeffs needs a preset".into()));
    };
    let l_pp = match preset {
        Preset::Dipole => 1,
        Preset::Quadrupole => 2,
    };
    let mut rows = Vec::new();
    for m_pp in -l_pp..=l_pp {
        for key in nonvanishing_keys(config.coeff_lmax as i32, l_pp, m_pp) {
            rows.push(CoeffRow {
                l: key.l,
                m: key.m,
                l_p: key.l_p,
                m_p: key.m_p,
                l_pp,
                m_pp,
                g: g_rotational(key, config.omega_rad)?,
                r: r_closed(key.l, key.s(), l_pp, Complex64::new(1.0, 0.0), 1.0)?,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub omega: f64,
    pub k: f64,
    pub series: f64,
    pub oracle: f64,
    pub rel_deviation: f64,
    pub oracle_nodes: usize,
    pub pass: bool,
}

/// Multiples of the mean thermal wavenumber checked by `oracle-check`.
pub const ORACLE_K_FACTORS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn oracle_rows(config: &RunConfig) -> Result<Vec<OracleRow>, CliError> {
    let terms = fixed_terms(config)?;
    let env = environment(config, config.temperature_k)?;
    let opts = series_options(config);
    let omega = config.omega_rad;
    let mean_k = env.mean_k();
    ORACLE_K_FACTORS
        .par_iter()
        .map(|&f| {
            let k = f * mean_k;
            let series = integrated_sq_amplitude(&terms, omega, k, config.gas_mass_kg, &opts)?.value;
            let o = sphere_integral_sq_amplitude(
                &terms,
                k,
                omega,
                config.gas_mass_kg,
                config.oracle_nodes,
                config.oracle_tol,
            )?;
            let rel = if o.value == 0.0 && series == 0.0 {
                0.0
            } else {
                (series - o.value).abs() / o.value.abs()
            };
            Ok(OracleRow {
                omega,
                k,
                series,
                oracle: o.value,
                rel_deviation: rel,
                oracle_nodes: o.nodes_used,
                pass: rel <= config.oracle_tol,
            })
        })
        .collect()
}

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_out(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn json_out<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

/// Renders the command's output; the status is `OracleMismatch` when an
/// oracle check fails.
pub fn render(config: &RunConfig) -> Result<(Vec<u8>, ExitStatus), CliError> {
    let csv = config.format == OutputFormat::Csv;
    let mut status = ExitStatus::Success;
    let bytes = match config.command {
        Command::Rate => {
            let reports = rate_reports(config)?;
            if csv {
                let rows = reports.iter().map(|r| {
                    let (kind, w, z) = match r.inputs.superposition {
                        Superposition::Rotational { omega } => ("rotational", e(omega), String::new()),
                        Superposition::Translational { z } => ("translational", String::new(), e(z)),
                    };
                    vec![
                        kind.to_string(),
                        w,
                        z,
                        e(r.lambda),
                        r.l_max_used.to_string(),
                        e(r.tail_estimate),
                        r.warning.clone().unwrap_or_default(),
                    ]
                });
                csv_out(
                    &["superposition", "omega_rad", "z_m", "lambda_per_s", "l_max_used", "tail_estimate", "warning"],
                    rows,
                )?
            } else {
                json_out(&reports)?
            }
        }
        Command::Ratio => {
            let r = ratio_row(config)?;
            if csv {
                csv_out(
                    &["temperature_K", "omega_rad", "z_m", "z_dimensionless", "ratio"],
                    [vec![e(r.temperature_k), e(r.omega), e(r.z), e(r.z_dimensionless), e(r.ratio)]],
                )?
            } else {
                json_out(&r)?
            }
        }
        Command::Grid => {
            let rows = grid_rows(config)?;
            let with_t = config.grid.is_some_and(|g| g.temperature.is_some());
            if csv {
                let mut header = vec!["omega", "z", "z_dimensionless", "ratio"];
                if with_t {
                    header.insert(0, "temperature_K");
                }
                csv_out(
                    &header,
                    rows.iter().map(|r| {
                        let mut v = vec![e(r.omega), e(r.z), e(r.z_dimensionless), e(r.ratio)];
                        if with_t {
                            v.insert(0, e(r.temperature_k));
                        }
                        v
                    }),
                )?
            } else {
                json_out(&rows)?
            }
        }
        Command::Coeffs => {
            let rows = coeff_rows(config)?;
            if csv {
                csv_out(
                    &["l", "m", "l'", "m'", "l''", "m''", "Re G", "Im G", "Re R", "Im R"],
                    rows.iter().map(|r| {
                        let mut v: Vec<String> =
                            [r.l, r.m, r.l_p, r.m_p, r.l_pp, r.m_pp].iter().map(|x| x.to_string()).collect();
                        v.extend([e(r.g.re), e(r.g.im), e(r.r.re), e(r.r.im)]);
                        v
                    }),
                )?
            } else {
                json_out(&rows)?
            }
        }
        Command::OracleCheck => {
            let rows = oracle_rows(config)?;
            if rows.iter().any(|r| !r.pass) {
                status = ExitStatus::OracleMismatch;
            }
            if csv {
                csv_out(
                    &["omega_rad", "k_per_m", "series", "oracle", "rel_deviation", "oracle_nodes", "pass"],
                    rows.iter().map(|r| {
                        vec![
                            e(r.omega),
                            e(r.k),
                            e(r.series),
                            e(r.oracle),
                            e(r.rel_deviation),
                            r.oracle_nodes.to_string(),
                            r.pass.to_string(),
                        ]
                    }),
                )?
            } else {
                json_out(&rows)?
            }
        }
    };
    Ok((bytes, status))
}

/// Renders and writes to `config.out`, or to `stdout` when unset.
pub fn run(config: &RunConfig, stdout: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let (bytes, status) = render(config)?;
    match &config.out {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            f.write_all(&bytes)?;
        }
        None => stdout.write_all(&bytes)?,
    }
    Ok(status)
}
