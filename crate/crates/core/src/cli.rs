//! Command-line front end: subcommands, argument handling and artifact
//! writing. The binary is a thin wrapper around [`run`].

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::instanton::integrate;
use crate::output::{
    apply_exclusions, exclusion_table, sidecar_path, write_json, write_table, Table, EXCLUSION_HALF_WIDTH,
};
use crate::potential::{find_stationary_points, interaction_bounds, PotentialSpec, DEFAULT_BOUNDS_TOLERANCE};
use crate::scaling::{cld_real_axis, density_map, spectral_set, SpectralSet};
use crate::scattering::{oracle_density, phase_curve};
use crate::semiclassics::{
    fit_singularity, predict_rectangular, predict_singularity, reconstruct_phase, singular_energies, smoothed_cld,
    SingularityFit, SingularityPrediction,
};

#[derive(Debug, Parser)]
#[command(name = "tunnelcld", version, about = "Continuum level density of one-dimensional tunneling potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scattering amplitudes and unwrapped phase on the energy grid.
    Transmit(Common),
    /// Complex-scaled density on the (E, Gamma) rectangle plus the eigenvalue dump.
    CldMap(Common),
    /// Complex-scaled density at E + i epsilon plus the eigenvalue dump.
    CldAxis(Common),
    /// Traversal times and the smoothed density.
    Semiclassical(Common),
    /// Oracle, spectral and semiclassical densities on one grid.
    Compare(Common),
    /// Complex-time trajectory at the configured energy.
    Trajectory(Common),
    /// Stationary points with predicted and fitted singular forms.
    Classify(Common),
    /// Phase reconstructed from the smoothed density.
    Phase(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

const OWN_FLAGS: &[&str] = &["config", "out", "threads", "help", "version"];

/// Separate `--key=value` config overrides from the flags clap handles.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<String>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for (i, arg) in args.into_iter().enumerate() {
        let name = arg.strip_prefix("--").map(|b| b.split('=').next().unwrap_or(b));
        match name {
            Some(n) if i > 0 && !n.is_empty() && !OWN_FLAGS.contains(&n) => overrides.push(arg),
            _ => rest.push(arg),
        }
    }
    (rest, overrides)
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run(args: Vec<String>) -> i32 {
    let (rest, overrides) = split_overrides(args);
    let cli = match Cli::try_parse_from(rest) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, &overrides) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, overrides: &[String]) -> Result<()> {
    let (command, common) = match cli.command {
        Command::Transmit(c) => ("transmit", c),
        Command::CldMap(c) => ("cld-map", c),
        Command::CldAxis(c) => ("cld-axis", c),
        Command::Semiclassical(c) => ("semiclassical", c),
        Command::Compare(c) => ("compare", c),
        Command::Trajectory(c) => ("trajectory", c),
        Command::Classify(c) => ("classify", c),
        Command::Phase(c) => ("phase", c),
    };
    let config = RunConfig::load(common.config.as_deref(), overrides)?;
    let job = || match command {
        "transmit" => cmd_transmit(&config, &common.out),
        "cld-map" => cmd_cld_map(&config, &common.out),
        "cld-axis" => cmd_cld_axis(&config, &common.out),
        "semiclassical" => cmd_semiclassical(&config, &common.out),
        "compare" => cmd_compare(&config, &common.out),
        "trajectory" => cmd_trajectory(&config, &common.out),
        "classify" => cmd_classify(&config, &common.out),
        _ => cmd_phase(&config, &common.out),
    };
    match common.threads {
        Some(0) => Err(Error::Config("`--threads` must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(job),
        None => job(),
    }
}

fn c(z: Complex64) -> [crate::output::Cell; 2] {
    [z.re.into(), z.im.into()]
}

/// Singular energies of the configured potential over its interaction region.
fn singular_of(spec: &PotentialSpec) -> Result<Vec<f64>> {
    if spec.is_zero() {
        return Ok(Vec::new());
    }
    singular_energies(spec, &interaction_bounds(spec, DEFAULT_BOUNDS_TOLERANCE)?)
}

/// The configured grid after exclusion windows; the sidecar is written next
/// to `artifact`.
fn filtered_grid(config: &RunConfig, artifact: &Path) -> Result<Vec<f64>> {
    let (kept, dropped) = apply_exclusions(
        &config.grid.values(),
        &singular_of(&config.potential)?,
        EXCLUSION_HALF_WIDTH,
    );
    write_table(&sidecar_path(artifact), &exclusion_table(&dropped))?;
    if kept.is_empty() {
        return Err(Error::Precondition("every grid point falls in an exclusion window".into()));
    }
    Ok(kept)
}

fn spectral(config: &RunConfig) -> Result<SpectralSet> {
    spectral_set(&config.potential, &config.scales, &config.scaling, config.margin)
}

fn eigenvalue_table(set: &SpectralSet) -> Table {
    let mut t = Table::new(&["index", "re_E", "gamma", "class"]);
    for (i, (p, class)) in set.labelled().into_iter().enumerate() {
        t.push(vec![i.into(), p.e.into(), p.gamma.into(), class.label().into()]);
    }
    t
}

pub fn cmd_transmit(config: &RunConfig, out: &Path) -> Result<()> {
    let path = out.join("transmission.csv");
    let grid = filtered_grid(config, &path)?;
    let curve = phase_curve(&config.potential, &config.scales, &grid)?;
    let mut t = Table::new(&["E", "re_alpha", "im_alpha", "re_beta", "im_beta", "re_phi", "im_phi", "trans_prob"]);
    for r in &curve.results {
        let mut row = vec![r.energy.into()];
        row.extend(c(r.alpha));
        row.extend(c(r.beta));
        row.extend(c(r.phi));
        row.push(r.transmission_probability().into());
        t.push(row);
    }
    write_table(&path, &t)
}

pub fn cmd_cld_map(config: &RunConfig, out: &Path) -> Result<()> {
    let set = spectral(config)?;
    let energies = config.grid.values();
    let gammas = config.gammas.values();
    let map = density_map(&set, &energies, &gammas)?;
    let mut t = Table::new(&["re_E", "gamma", "re_rho", "im_rho"]);
    for (p, v) in map.points.iter().zip(&map.values) {
        let mut row = vec![p.e.into(), p.gamma.into()];
        row.extend(c(*v));
        t.push(row);
    }
    write_table(&out.join("eigenvalues.csv"), &eigenvalue_table(&set))?;
    write_table(&out.join("density_map.csv"), &t)
}

pub fn cmd_cld_axis(config: &RunConfig, out: &Path) -> Result<()> {
    let path = out.join("density_axis.csv");
    let grid = filtered_grid(config, &path)?;
    let set = spectral(config)?;
    let axis = cld_real_axis(&set, &grid, config.epsilon)?;
    let mut t = Table::new(&["E", "re_rho", "im_rho", "epsilon"]);
    for (e, v) in grid.iter().zip(&axis.values) {
        let mut row = vec![(*e).into()];
        row.extend(c(*v));
        row.push(config.epsilon.into());
        t.push(row);
    }
    write_table(&out.join("eigenvalues.csv"), &eigenvalue_table(&set))?;
    write_table(&path, &t)
}

fn bounds_of(spec: &PotentialSpec) -> Result<crate::potential::InteractionBounds> {
    if spec.is_zero() {
        return Err(Error::Precondition(
            "traversal times need a nonzero potential to define the interaction region".into(),
        ));
    }
    interaction_bounds(spec, DEFAULT_BOUNDS_TOLERANCE)
}

pub fn cmd_semiclassical(config: &RunConfig, out: &Path) -> Result<()> {
    let path = out.join("semiclassical.csv");
    let grid = filtered_grid(config, &path)?;
    let bounds = bounds_of(&config.potential)?;
    let points = smoothed_cld(&config.potential, &config.scales, &bounds, &grid)?;
    let mut t = Table::new(&["E", "t_plus", "t_minus", "t_zero", "re_rho_bar", "im_rho_bar"]);
    for p in &points {
        let mut row = vec![p.energy.into(), p.times.t_plus.into(), p.times.t_minus.into(), p.times.t_zero.into()];
        row.extend(c(p.value));
        t.push(row);
    }
    write_table(&path, &t)
}

#[derive(Debug, Serialize)]
struct CompareSummary {
    points: usize,
    epsilon: f64,
    max_abs_oracle: f64,
    max_dev_spectral: f64,
    max_rel_dev_spectral: f64,
    max_dev_semiclassical: f64,
    max_rel_dev_semiclassical: f64,
    energy_of_max_dev_semiclassical: f64,
}

pub fn cmd_compare(config: &RunConfig, out: &Path) -> Result<()> {
    let path = out.join("compare.csv");
    let grid = filtered_grid(config, &path)?;
    let spec = &config.potential;
    let eps = config.epsilon;
    let oracle = grid
        .par_iter()
        .map(|&e| oracle_density(spec, &config.scales, Complex64::new(e, eps)))
        .collect::<Result<Vec<_>>>()?;
    let set = spectral(config)?;
    let spectral = cld_real_axis(&set, &grid, eps)?.values;
    let semi: Vec<Complex64> = if spec.is_zero() {
        vec![Complex64::new(0.0, 0.0); grid.len()]
    } else {
        smoothed_cld(spec, &config.scales, &bounds_of(spec)?, &grid)?
            .into_iter()
            .map(|p| p.value)
            .collect()
    };
    let mut t = Table::new(&[
        "E",
        "re_rho_oracle",
        "im_rho_oracle",
        "re_rho_spectral",
        "im_rho_spectral",
        "re_rho_semiclassical",
        "im_rho_semiclassical",
    ]);
    let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut summary = CompareSummary {
        points: grid.len(),
        epsilon: eps,
        max_abs_oracle: scale,
        max_dev_spectral: 0.0,
        max_rel_dev_spectral: 0.0,
        max_dev_semiclassical: 0.0,
        max_rel_dev_semiclassical: 0.0,
        energy_of_max_dev_semiclassical: grid[0],
    };
    for (k, &e) in grid.iter().enumerate() {
        let mut row = vec![e.into()];
        row.extend(c(oracle[k]));
        row.extend(c(spectral[k]));
        row.extend(c(semi[k]));
        t.push(row);
        summary.max_dev_spectral = summary.max_dev_spectral.max((spectral[k] - oracle[k]).norm());
        let d = (semi[k] - oracle[k]).norm();
        if d > summary.max_dev_semiclassical {
            summary.max_dev_semiclassical = d;
            summary.energy_of_max_dev_semiclassical = e;
        }
    }
    if scale > 0.0 {
        summary.max_rel_dev_spectral = summary.max_dev_spectral / scale;
        summary.max_rel_dev_semiclassical = summary.max_dev_semiclassical / scale;
    }
    write_json(&out.join("compare_summary.json"), &summary)?;
    write_table(&path, &t)
}

pub fn cmd_trajectory(config: &RunConfig, out: &Path) -> Result<()> {
    let energy = config
        .trajectory_energy
        .ok_or_else(|| Error::Config("missing key `energy`".into()))?;
    let bounds = bounds_of(&config.potential)?;
    let step = config.step.unwrap_or(bounds.width() / 20_000.0);
    let record = integrate(&config.potential, &config.scales, &bounds, energy, bounds.a, config.s_max, step)?;
    let mut t = Table::new(&["s", "re_T", "im_T", "re_X", "im_X", "re_P", "im_P", "segment"]);
    for i in 0..record.len() {
        let mut row = vec![record.s[i].into()];
        row.extend(c(record.time[i]));
        row.extend([record.position[i].into(), 0.0.into()]);
        row.extend(c(record.momentum[i]));
        row.push(record.segment[i].label().into());
        t.push(row);
    }
    if !record.completed {
        eprintln!("warning: trajectory truncated at s_max = {}", config.s_max);
    }
    write_table(&out.join("trajectory.csv"), &t)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Verdict {
    Pass,
    Fail,
    Unreliable,
}

#[derive(Debug, Serialize)]
struct SingularityRecord {
    x0: f64,
    #[serde(rename = "E0")]
    e0: f64,
    n: Option<u32>,
    kind: &'static str,
    re_form: String,
    im_form: String,
    exponent: Option<f64>,
    fit_verdict: Verdict,
    fit: Option<SingularityFit>,
}

pub fn classify_potential(config: &RunConfig) -> Result<Vec<(SingularityPrediction, Result<SingularityFit>)>> {
    let spec = &config.potential;
    if spec.is_zero() {
        return Ok(Vec::new());
    }
    let bounds = bounds_of(spec)?;
    let predictions: Vec<SingularityPrediction> = match spec {
        PotentialSpec::Rectangular { v0, .. } => vec![predict_rectangular(*v0)],
        _ => find_stationary_points(spec, (bounds.a, bounds.b))?
            .iter()
            .map(predict_singularity)
            .collect(),
    };
    Ok(predictions
        .into_iter()
        .map(|p| (p, fit_singularity(spec, &config.scales, &bounds, &p)))
        .collect())
}

pub fn cmd_classify(config: &RunConfig, out: &Path) -> Result<()> {
    let mut records = Vec::new();
    for (p, fit) in classify_potential(config)? {
        let (verdict, fit) = match fit {
            Ok(f) if f.pass() => (Verdict::Pass, Some(f)),
            Ok(f) => (Verdict::Fail, Some(f)),
            Err(Error::FitUnreliable(_)) => (Verdict::Unreliable, None),
            Err(e) => return Err(e),
        };
        records.push(SingularityRecord {
            x0: p.x0,
            e0: p.e0,
            n: p.order,
            kind: match p.kind {
                crate::potential::StationaryKind::Minimum => "minimum",
                crate::potential::StationaryKind::Maximum => "maximum",
                crate::potential::StationaryKind::Saddle => "saddle",
            },
            re_form: p.re_form.label(),
            im_form: p.im_form.label(),
            exponent: p.re_form.exponent().or(p.im_form.exponent()),
            fit_verdict: verdict,
            fit,
        });
    }
    write_json(&out.join("singularities.json"), &records)
}

pub fn cmd_phase(config: &RunConfig, out: &Path) -> Result<()> {
    let path = out.join("phase.csv");
    let grid = filtered_grid(config, &path)?;
    let bounds = bounds_of(&config.potential)?;
    let points = smoothed_cld(&config.potential, &config.scales, &bounds, &grid)?;
    let values: Vec<Complex64> = points.iter().map(|p| p.value).collect();
    let phase = reconstruct_phase(&grid, &values)?;
    let mut t = Table::new(&["E", "re_phi_bar", "im_phi_bar"]);
    for (e, p) in phase.energies.iter().zip(&phase.phase) {
        let mut row = vec![(*e).into()];
        row.extend(c(*p));
        t.push(row);
    }
    write_table(&path, &t)
}
