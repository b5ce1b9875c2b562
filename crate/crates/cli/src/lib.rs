//! Argument handling and subcommands of the `chiral` binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chiral_core::quasidet::{qdet_by_determinants, qdet_scalar, random_identity_grid};
use chiral_core::su2::SolitonParams;
use chiral_core::tolerance::relative;
use chiral_core::{
    check_homological, check_nc_jacobi, iterate_product, one_soliton, run_full_suite,
    ComplexMatrix, DarbouxChain, LaxSolution, SpacetimePoint, SuiteConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "chiral",
    version,
    about = "Chiral-model multisolitons by Darboux transformation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate g[K+1] and |Y| over a (t, x) grid.
    Profile(CommonArgs),
    /// Run the verification suite and write its report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Override one tolerance, e.g. `--tol derivative_cap=1e-6`.
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tolerances: Vec<String>,
    },
    /// Check the quasideterminant identities on random block grids.
    Identities {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of random grids.
        #[arg(long)]
        count: Option<usize>,
        /// Block dimension; 1 also checks the determinant-ratio formula.
        #[arg(long)]
        dim: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Step angle; repeat for chains.
    #[arg(long = "theta", allow_negative_numbers = true)]
    pub thetas: Vec<f64>,
    /// Number of Darboux steps.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// `tmin,tmax,xmin,xmax,nt,nx`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
    /// Finite-difference step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Flat JSON file with suite configuration keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long = "rng-seed")]
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub nt: usize,
    pub nx: usize,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(format!("expected tmin,tmax,xmin,xmax,nt,nx, got {s:?}"));
    }
    let f = |i: usize| {
        parts[i]
            .parse::<f64>()
            .map_err(|e| format!("{:?}: {e}", parts[i]))
    };
    let u = |i: usize| {
        parts[i]
            .parse::<usize>()
            .map_err(|e| format!("{:?}: {e}", parts[i]))
    };
    Ok(GridSpec {
        t_min: f(0)?,
        t_max: f(1)?,
        x_min: f(2)?,
        x_max: f(3)?,
        nt: u(4)?,
        nx: u(5)?,
    })
}

/// Exit code for a passing run.
pub const EXIT_PASS: i32 = 0;
/// Exit code when a verification check fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

/// Parses `args` and runs the chosen subcommand. Errors map to [`EXIT_USAGE`].
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Profile(common) => cmd_profile(common),
        Command::Verify { common, tolerances } => cmd_verify(common, tolerances),
        Command::Identities { common, count, dim } => cmd_identities(common, *count, *dim),
    }
}

/// Defaults, then the config file, then command-line flags.
pub fn merged_config(common: &CommonArgs) -> Result<SuiteConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => SuiteConfig::default(),
    };
    if let Some(p) = common.p {
        config.p = p;
    }
    if let Some(q) = common.q {
        config.q = q;
    }
    if !common.thetas.is_empty() {
        config.thetas = common.thetas.clone();
        if common.k.is_none() {
            config.k = common.thetas.len();
        }
    }
    if let Some(k) = common.k {
        config.k = k;
    }
    if let Some(g) = common.grid {
        config.t_min = g.t_min;
        config.t_max = g.t_max;
        config.x_min = g.x_min;
        config.x_max = g.x_max;
        config.nt = g.nt;
        config.nx = g.nx;
    }
    if let Some(h) = common.h {
        config.h = h;
    }
    if let Some(seed) = common.rng_seed {
        config.rng_seed = seed;
    }
    Ok(config)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Header of the profile table.
pub const PROFILE_HEADER: [&str; 13] = [
    "t", "x", "xplus", "xminus", "re_g11", "im_g11", "re_g12", "im_g12", "re_g21", "im_g21",
    "re_g22", "im_g22", "abs_Y",
];

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub x: f64,
    pub xplus: f64,
    pub xminus: f64,
    pub g: [[f64; 2]; 4],
    pub abs_y: f64,
}

/// `g[K+1]` and `|Y[K+1]|` at every grid point, `t` outer. One step uses the
/// closed form; deeper chains use the product engine.
pub fn profile_rows(config: &SuiteConfig) -> Result<Vec<ProfileRow>> {
    let grid = config.grid();
    grid.validate()?;
    if config.k == 0 {
        bail!("K must be at least 1");
    }
    if config.thetas.len() < config.k {
        bail!(
            "K = {} needs {} angles, got {}",
            config.k,
            config.k,
            config.thetas.len()
        );
    }
    let thetas = &config.thetas[..config.k];
    let chain = DarbouxChain::su2(config.p, config.q, thetas)?;
    let single = if config.k == 1 {
        Some(SolitonParams::new(config.p, config.q, thetas[0])?)
    } else {
        None
    };
    grid.points()
        .into_iter()
        .map(|pt| {
            let (g, abs_y) = match &single {
                Some(params) => {
                    let sol = one_soliton(params, pt)?;
                    (sol.g, sol.y_tilde.norm())
                }
                None => {
                    let g = iterate_product(&chain, Complex64::new(0.0, 0.0), pt)?.g;
                    let ratio = &g * &chain.base.g(pt)?.invert()?;
                    (g, ratio[(0, 1)].norm())
                }
            };
            Ok(row(
                pt,
                &g.as_slice()
                    .iter()
                    .map(|c| [c.re, c.im])
                    .collect::<Vec<_>>(),
                abs_y,
            ))
        })
        .collect()
}

fn row(pt: SpacetimePoint, g: &[[f64; 2]], abs_y: f64) -> ProfileRow {
    ProfileRow {
        t: pt.t(),
        x: pt.x(),
        xplus: pt.xplus,
        xminus: pt.xminus,
        g: [g[0], g[1], g[2], g[3]],
        abs_y,
    }
}

fn full(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn profile_csv(rows: &[ProfileRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PROFILE_HEADER)?;
    for r in rows {
        let mut rec = vec![full(r.t), full(r.x), full(r.xplus), full(r.xminus)];
        for [re, im] in r.g {
            rec.push(full(re));
            rec.push(full(im));
        }
        rec.push(full(r.abs_y));
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn cmd_profile(common: &CommonArgs) -> Result<i32> {
    let config = merged_config(common)?;
    let rows = profile_rows(&config)?;
    let bytes = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => profile_csv(&rows)?,
        Format::Json => serde_json::to_vec_pretty(&rows)?,
    };
    write_output(common.out.as_deref(), &bytes)?;
    Ok(EXIT_PASS)
}

/// Applies `NAME=VALUE` overrides to the tolerance record.
pub fn apply_tolerances(config: &mut SuiteConfig, overrides: &[String]) -> Result<()> {
    if overrides.is_empty() {
        return Ok(());
    }
    let mut value = serde_json::to_value(&config.tolerances)?;
    for o in overrides {
        let (name, v) = o
            .split_once('=')
            .with_context(|| format!("expected NAME=VALUE, got {o:?}"))?;
        let v: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("tolerance {name}: {v:?} is not a number"))?;
        let slot = value
            .get_mut(name.trim())
            .with_context(|| format!("unknown tolerance {name:?}"))?;
        *slot = serde_json::json!(v);
    }
    config.tolerances = serde_json::from_value(value)?;
    Ok(())
}

pub fn cmd_verify(common: &CommonArgs, tolerances: &[String]) -> Result<i32> {
    let mut config = merged_config(common)?;
    apply_tolerances(&mut config, tolerances)?;
    let report = run_full_suite(&config);
    let bytes = match common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "value", "tolerance", "pass", "severity"])?;
            for e in &report.entries {
                w.write_record([
                    e.name.clone(),
                    full(e.value),
                    full(e.tolerance),
                    e.pass.to_string(),
                    format!("{:?}", e.severity).to_lowercase(),
                ])?;
            }
            w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?
        }
    };
    write_output(common.out.as_deref(), &bytes)?;
    for e in report.failures() {
        eprintln!(
            "FAIL {} = {:e} (tolerance {:e})",
            e.name, e.value, e.tolerance
        );
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub count: usize,
    pub dim: usize,
    pub rng_seed: u64,
    pub redrawn: usize,
    pub max_nc_jacobi: f64,
    pub max_homological: f64,
    /// Determinant-ratio cross-check, scalar blocks only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    pub tolerance: f64,
    pub ratio_tolerance: f64,
    pub pass: bool,
}

pub fn identity_report(config: &SuiteConfig) -> Result<IdentityReport> {
    if config.identity_count == 0 {
        bail!("count must be at least 1");
    }
    if config.identity_dim == 0 {
        bail!("dim must be at least 1");
    }
    let tol = &config.tolerances;
    let mut rng = config.rng(1);
    let (mut jacobi, mut homological, mut redrawn) = (0.0f64, 0.0f64, 0);
    let mut ratio = (config.identity_dim == 1).then_some(0.0f64);
    for _ in 0..config.identity_count {
        let (grid, r) = random_identity_grid(&mut rng, config.identity_dim, tol.identity_condition);
        redrawn += r;
        jacobi = jacobi.max(check_nc_jacobi(&grid)?.relative);
        homological = homological.max(check_homological(&grid)?.relative);
        if let Some(worst) = ratio.as_mut() {
            let size = grid.size();
            let entries = (0..size * size)
                .map(|k| grid.block(k / size, k % size)[(0, 0)])
                .collect();
            let x = ComplexMatrix::from_row_major(size, entries)?;
            for i in 0..size {
                for j in 0..size {
                    let gap = match qdet_scalar(&x, i, j) {
                        Ok(q) => {
                            let d = qdet_by_determinants(&x, i, j);
                            relative((q - d).norm(), q.norm(), d.norm())
                        }
                        Err(_) => f64::INFINITY,
                    };
                    *worst = worst.max(gap);
                }
            }
        }
    }
    let pass = jacobi <= tol.identity
        && homological <= tol.identity
        && ratio.is_none_or(|r| r <= tol.ratio);
    Ok(IdentityReport {
        count: config.identity_count,
        dim: config.identity_dim,
        rng_seed: config.rng_seed,
        redrawn,
        max_nc_jacobi: jacobi,
        max_homological: homological,
        max_ratio: ratio,
        tolerance: tol.identity,
        ratio_tolerance: tol.ratio,
        pass,
    })
}

pub fn cmd_identities(
    common: &CommonArgs,
    count: Option<usize>,
    dim: Option<usize>,
) -> Result<i32> {
    let mut config = merged_config(common)?;
    if let Some(c) = count {
        config.identity_count = c;
    }
    if let Some(d) = dim {
        config.identity_dim = d;
    }
    let report = identity_report(&config)?;
    let mut s = serde_json::to_string_pretty(&report)?;
    s.push('\n');
    write_output(common.out.as_deref(), s.as_bytes())?;
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}
