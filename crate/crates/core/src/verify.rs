//! The verification suite: every invariant of the construction as one named
//! report entry, plus finite-difference convergence studies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::darboux::{
    check_theta_with, iterate_product, iterate_qdet, projector_path, s_conditions_residual,
    unitarity_checks, ChainValues, DarbouxChain, DarbouxStep, SpectralData,
};
use crate::error::{Error, Result};
use crate::matcore::ZERO;
use crate::model::{
    eom_residual, lax_residual, sweep_max, Currents, Direction, Grid, LaxSolution, SeedSolution,
    SpacetimePoint,
};
use crate::quasidet::{
    check_homological, check_nc_jacobi, qdet_by_determinants, qdet_scalar, random_block,
    random_identity_grid,
};
use crate::report::{ReportEntry, ResidualReport, Severity};
use crate::su2::{
    asymptotic_g, one_soliton, point_at_r, quoted_d, two_soliton, AsymptoticSign, SolitonParams,
    TwoSolitonParams,
};
use crate::tolerance::{relative, Tolerances};

/// Suite configuration. Serialized as flat JSON; missing keys take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub p: f64,
    pub q: f64,
    /// Angles of the chain steps; the first `k` are used.
    pub thetas: Vec<f64>,
    pub k: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub nt: usize,
    pub nx: usize,
    pub h: f64,
    /// Decreasing step ladder for empirical convergence orders.
    pub h_values: Vec<f64>,
    /// Spectral parameters `[re, im]` at which Lax residuals are checked.
    pub lambdas: Vec<[f64; 2]>,
    /// Random `(lambda, x)` samples for the quasideterminant/product comparison.
    pub samples: usize,
    /// Random points for closed-form comparisons.
    pub soliton_samples: usize,
    pub identity_count: usize,
    pub identity_dim: usize,
    /// Smallest `|r_k|` for the one-soliton asymptotic check.
    pub asymptotic_r: f64,
    /// Smallest `|r_k|` for the two-soliton asymptotic check.
    pub asymptotic_r_chain: f64,
    pub rng_seed: u64,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let g = Grid::default();
        Self {
            p: 1.0,
            q: 1.0,
            thetas: vec![PI / 2.0, PI / 3.0, 2.0 * PI / 3.0],
            k: 2,
            t_min: g.t_min,
            t_max: g.t_max,
            x_min: g.x_min,
            x_max: g.x_max,
            nt: g.nt,
            nx: g.nx,
            h: g.h,
            h_values: vec![4e-4, 2e-4, 1e-4],
            lambdas: vec![[0.0, 0.0], [0.5, 0.0], [0.3, 0.4]],
            samples: 20,
            soliton_samples: 50,
            identity_count: 100,
            identity_dim: 2,
            asymptotic_r: 20.0,
            asymptotic_r_chain: 30.0,
            rng_seed: 20_240_601,
            tolerances: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    pub fn grid(&self) -> Grid {
        Grid {
            t_min: self.t_min,
            t_max: self.t_max,
            x_min: self.x_min,
            x_max: self.x_max,
            nt: self.nt,
            nx: self.nx,
            h: self.h,
        }
    }

    pub fn lambda_values(&self) -> Vec<Complex64> {
        self.lambdas
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect()
    }

    /// Checks that do not depend on the spectral data.
    pub fn validate(&self) -> Result<()> {
        self.grid().validate()?;
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.thetas.len() < self.k {
            return Err(Error::InvalidParameter(format!(
                "k = {} needs at least {} angles, got {}",
                self.k,
                self.k,
                self.thetas.len()
            )));
        }
        validate_ladder(&self.h_values)?;
        if self.identity_dim == 0 {
            return Err(Error::InvalidParameter(
                "identity_dim must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Deterministic generator for one independent stream of the suite.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> SpacetimePoint {
        let t = self.t_min + (self.t_max - self.t_min) * rng.random::<f64>();
        let x = self.x_min + (self.x_max - self.x_min) * rng.random::<f64>();
        SpacetimePoint::from_tx(t, x)
    }
}

fn validate_ladder(h_values: &[f64]) -> Result<()> {
    if h_values.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 step sizes".into()));
    }
    if h_values.iter().any(|&h| !(h > 0.0 && h.is_finite()))
        || h_values.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter(
            "step sizes must be positive and decreasing".into(),
        ));
    }
    Ok(())
}

/// Empirical convergence order between consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// First row of a table.
    None,
    Value(f64),
    /// One of the two residuals is rounding noise.
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub h: f64,
    pub residual: f64,
    pub order: Order,
}

fn order_rows(h_values: &[f64], residuals: &[f64], floor: f64) -> Vec<StudyRow> {
    h_values
        .iter()
        .zip(residuals)
        .enumerate()
        .map(|(i, (&h, &residual))| {
            let order = if i == 0 {
                Order::None
            } else if residual <= floor || residuals[i - 1] <= floor {
                Order::Floor
            } else {
                Order::Value((residuals[i - 1] / residual).ln() / (h_values[i - 1] / h).ln())
            };
            StudyRow { h, residual, order }
        })
        .collect()
}

/// Field whose finite-difference residual is studied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StudyTarget {
    /// Lax residual (both directions, maximum) after `depth` steps; 0 is the seed.
    Lax { depth: usize, lambda: Complex64 },
    /// Field-equation residual (both equations, maximum) after `depth` steps.
    Eom { depth: usize },
    /// A constant field; every residual is rounding noise.
    Constant,
}

/// Residual of `target` at each step in `h_values` and the empirical orders
/// `log(res(h_prev)/res(h)) / log(h_prev/h)`.
pub fn convergence_study(
    config: &SuiteConfig,
    target: StudyTarget,
    h_values: &[f64],
) -> Result<Vec<StudyRow>> {
    validate_ladder(h_values)?;
    let tol = &config.tolerances;
    let mut residuals = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let grid = config.grid().with_h(h);
        let value = match target {
            StudyTarget::Lax { depth, lambda } => {
                let chain = DarbouxChain::su2(
                    config.p,
                    config.q,
                    &config.thetas[..depth.min(config.thetas.len())],
                )?;
                lax_residual(&chain, lambda, &grid, tol)?.max_value()
            }
            StudyTarget::Eom { depth } => {
                let chain = DarbouxChain::su2(
                    config.p,
                    config.q,
                    &config.thetas[..depth.min(config.thetas.len())],
                )?;
                eom_residual(&chain, &grid, tol)?.max_value()
            }
            StudyTarget::Constant => {
                let seed = SeedSolution::diagonal(vec![0.0; 2], vec![0.0; 2])?;
                lax_residual(&seed, Complex64::new(0.5, 0.0), &grid, tol)?.max_value()
            }
        };
        residuals.push(value);
    }
    Ok(order_rows(h_values, &residuals, tol.rounding_floor))
}

/// Serialized suite outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub entries: Vec<ReportEntry>,
    pub config_echo: SuiteConfig,
    pub version: String,
    pub pass: bool,
}

impl SuiteReport {
    pub fn get(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.blocking_failure())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every check. Construction errors become failing entries; the suite
/// always completes. Entries are sorted by name.
pub fn run_full_suite(config: &SuiteConfig) -> SuiteReport {
    let mut report = ResidualReport::new();
    let tol = &config.tolerances;

    quasidet_section(config, &mut report);

    if let Err(e) = config.validate() {
        report.push(ReportEntry::failure("config.validation", 0.0, &e));
        return finish(config, report);
    }

    let seed = match SeedSolution::su2(config.p, config.q) {
        Ok(s) => s,
        Err(e) => {
            report.push(ReportEntry::failure("seed.validation", 0.0, &e));
            return finish(config, report);
        }
    };
    derivative_section(config, "seed", &seed, &mut report);

    let thetas = &config.thetas[..config.k];
    let spectra: Result<Vec<_>> = thetas
        .iter()
        .map(|&t| {
            check_theta_with(t, tol.theta_guard)?;
            SpectralData::soliton(t)
        })
        .collect();
    let chain = match spectra.and_then(|s| DarbouxChain::new(seed, s)) {
        Ok(c) => c,
        Err(e) => {
            report.push(ReportEntry::failure("spectral.validation", 0.0, &e));
            return finish(config, report);
        }
    };

    for k in 1..=config.k {
        let prefix = format!("k{k}");
        let truncated = chain.truncated(k);
        derivative_section(config, &prefix, &truncated, &mut report);
        match chain.step(k) {
            Ok(step) => step_section(config, &prefix, &step, &mut report),
            Err(e) => report.push(ReportEntry::failure(format!("{prefix}.step"), 0.0, &e)),
        }
        equivalence_section(config, &prefix, &truncated, &mut report);
    }

    su2_section(config, &chain, &mut report);
    finish(config, report)
}

fn finish(config: &SuiteConfig, mut report: ResidualReport) -> SuiteReport {
    report.sort_by_name();
    let pass = report.passed();
    SuiteReport {
        entries: report.entries,
        config_echo: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        pass,
    }
}

fn push_result(
    report: &mut ResidualReport,
    prefix: &str,
    name: &str,
    tolerance: f64,
    result: Result<ResidualReport>,
) {
    match result {
        Ok(r) => report.extend_prefixed(prefix, r),
        Err(e) => report.push(ReportEntry::failure(
            format!("{prefix}.{name}"),
            tolerance,
            &e,
        )),
    }
}

/// Runs `check` at the suite step and along the ladder, recording the main
/// entries and one `.order` entry per component.
fn with_orders<F>(
    config: &SuiteConfig,
    prefix: &str,
    name: &str,
    report: &mut ResidualReport,
    check: F,
) where
    F: Fn(&Grid) -> Result<ResidualReport>,
{
    let tol = &config.tolerances;
    let grid = config.grid();
    let main = check(&grid);
    let main_names: Vec<String> = match &main {
        Ok(r) => r.entries.iter().map(|e| e.name.clone()).collect(),
        Err(_) => Vec::new(),
    };
    push_result(report, prefix, name, tol.derivative_at(grid.h), main);

    let mut ladder: Vec<Vec<f64>> = vec![Vec::new(); main_names.len()];
    for &h in &config.h_values {
        match check(&grid.with_h(h)) {
            Ok(r) => {
                for (i, n) in main_names.iter().enumerate() {
                    ladder[i].push(r.get(n).map_or(f64::INFINITY, |e| e.value));
                }
            }
            Err(e) => {
                report.push(ReportEntry::failure(
                    format!("{prefix}.{name}.order"),
                    tol.order_band,
                    &e,
                ));
                return;
            }
        }
    }
    for (n, residuals) in main_names.iter().zip(ladder) {
        let rows = order_rows(&config.h_values, &residuals, tol.rounding_floor);
        let mut worst: f64 = 0.0;
        let mut orders = Vec::new();
        for row in &rows[1..] {
            match row.order {
                Order::Value(o) => {
                    worst = worst.max((o - 2.0).abs());
                    orders.push(format!("{o:.4}"));
                }
                _ => orders.push("floor".into()),
            }
        }
        report.push(
            ReportEntry::new(format!("{prefix}.{n}.order"), worst, tol.order_band).detail(format!(
                "orders [{}] over h = {:?}",
                orders.join(", "),
                config.h_values
            )),
        );
    }
}

/// Lax residuals at every configured lambda and field-equation residuals.
fn derivative_section<S: LaxSolution>(
    config: &SuiteConfig,
    prefix: &str,
    state: &S,
    report: &mut ResidualReport,
) {
    let tol = &config.tolerances;
    for (i, &lambda) in config.lambda_values().iter().enumerate() {
        let name = format!("lax.l{i}");
        with_orders(config, prefix, &name, report, |grid| {
            let mut r = ResidualReport::new();
            r.extend_prefixed(
                &name,
                strip(lax_residual(state, lambda, grid, tol)?, "lax."),
            );
            Ok(r)
        });
    }
    with_orders(config, prefix, "eom", report, |grid| {
        eom_residual(state, grid, tol)
    });
}

fn strip(mut r: ResidualReport, prefix: &str) -> ResidualReport {
    for e in &mut r.entries {
        if let Some(rest) = e.name.strip_prefix(prefix) {
            e.name = rest.to_string();
        }
    }
    r
}

/// Algebraic and derivative checks specific to one Darboux step.
fn step_section(
    config: &SuiteConfig,
    prefix: &str,
    step: &DarbouxStep<DarbouxChain>,
    report: &mut ResidualReport,
) {
    let tol = &config.tolerances;
    let grid = config.grid();

    with_orders(config, prefix, "s_conditions", report, |g| {
        let mut r = s_conditions_residual(step, g, tol)?;
        r.entries.retain(|e| e.name.starts_with("s_conditions"));
        Ok(r)
    });
    push_result(
        report,
        prefix,
        "trace_dS",
        tol.algebraic,
        s_conditions_residual(step, &grid, tol).map(|mut r| {
            r.entries.retain(|e| e.name.starts_with("trace_dS"));
            r
        }),
    );
    push_result(
        report,
        prefix,
        "unitarity",
        tol.algebraic,
        unitarity_checks(step, &grid, tol),
    );

    // Tr S and det S are the constants Tr Lambda, det Lambda.
    let lam = step.spectral.lambda_matrix();
    let (tr, det) = (lam.trace(), lam.det());
    let similarity = sweep_max(&grid, 2, |x| {
        let s = step.s(x)?;
        Ok(vec![(s.trace() - tr).norm(), (s.det() - det).norm()])
    });
    match similarity {
        Ok(m) => {
            for (n, v) in ["similarity.trace", "similarity.det"].iter().zip(m) {
                report.push(
                    ReportEntry::new(format!("{prefix}.{n}"), v.value, tol.algebraic)
                        .grid(&grid)
                        .at(v.at),
                );
            }
        }
        Err(e) => report.push(ReportEntry::failure(
            format!("{prefix}.similarity"),
            tol.algebraic,
            &e,
        )),
    }

    // (I -+ S) j (I -+ S)^-1 against conjugation by M (I -+ Lambda) M^-1.
    let routes = sweep_max(&grid, 2, |x| {
        [Direction::Plus, Direction::Minus]
            .iter()
            .map(|&d| Ok((&step.current(d, x)? - &step.j_via_m(d, x)?).frobenius_norm()))
            .collect()
    });
    match routes {
        Ok(m) => {
            for (n, v) in ["j_routes.conjugation.plus", "j_routes.conjugation.minus"]
                .iter()
                .zip(m)
            {
                report.push(
                    ReportEntry::new(format!("{prefix}.{n}"), v.value, tol.structural)
                        .grid(&grid)
                        .at(v.at),
                );
            }
        }
        Err(e) => report.push(ReportEntry::failure(
            format!("{prefix}.j_routes.conjugation"),
            tol.structural,
            &e,
        )),
    }

    // j+ + d+ S and j- - d- S.
    with_orders(config, prefix, "j_routes.derivative", report, |g| {
        let m =
            sweep_max(g, 2, |x| {
                [Direction::Plus, Direction::Minus]
                    .iter()
                    .map(|&d| {
                        Ok((&step.current(d, x)? - &step.j_via_derivative(d, x, g.h)?)
                            .frobenius_norm())
                    })
                    .collect()
            })?;
        let mut r = ResidualReport::new();
        for (n, v) in ["j_routes.derivative.plus", "j_routes.derivative.minus"]
            .iter()
            .zip(m)
        {
            r.push(
                ReportEntry::new(*n, v.value, tol.derivative_at(g.h))
                    .grid(g)
                    .at(v.at),
            );
        }
        Ok(r)
    });

    // Projector form of S and D(lambda).
    let probe = PROBE_LAMBDA;
    let projector = sweep_max(&grid, 4, |x| {
        let pf = projector_path(step, x, probe)?;
        let s = step.s(x)?;
        Ok(vec![
            (&pf.s - &s).frobenius_norm(),
            (&pf.d - &crate::darboux::darboux_matrix(&s, probe)).frobenius_norm(),
            (&(&pf.p * &pf.p) - &pf.p).frobenius_norm(),
            (&pf.p.adjoint() - &pf.p).frobenius_norm(),
        ])
    });
    match projector {
        Ok(m) => {
            let names = [
                "projector.s",
                "projector.d",
                "projector.idempotent",
                "projector.hermitian",
            ];
            let tols = [tol.algebraic, tol.algebraic, tol.structural, tol.structural];
            for ((n, v), t) in names.iter().zip(m).zip(tols) {
                report.push(
                    ReportEntry::new(format!("{prefix}.{n}"), v.value, t)
                        .grid(&grid)
                        .at(v.at),
                );
            }
        }
        Err(e) => report.push(ReportEntry::failure(
            format!("{prefix}.projector"),
            tol.algebraic,
            &e,
        )),
    }
}

fn chain_relative_gap(a: &ChainValues, b: &ChainValues) -> f64 {
    [
        (&a.v, &b.v),
        (&a.g, &b.g),
        (&a.f_plus, &b.f_plus),
        (&a.f_minus, &b.f_minus),
        (&a.j_plus, &b.j_plus),
        (&a.j_minus, &b.j_minus),
    ]
    .iter()
    .map(|(p, q)| {
        relative(
            (*p - *q).frobenius_norm(),
            p.frobenius_norm(),
            q.frobenius_norm(),
        )
    })
    .fold(0.0, f64::max)
}

/// Quasideterminant evaluation against sequential products at random `(lambda, x)`.
fn equivalence_section(
    config: &SuiteConfig,
    prefix: &str,
    chain: &DarbouxChain,
    report: &mut ResidualReport,
) {
    let tol = &config.tolerances;
    let mut rng = config.rng(100 + chain.depth() as u64);
    let mut worst: f64 = 0.0;
    let mut worst_at = None;
    let mut condition: f64 = 1.0;
    let mut error = None;
    for _ in 0..config.samples {
        let x = config.random_point(&mut rng);
        let lambda = Complex64::new(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9));
        match iterate_qdet(chain, lambda, x) {
            Ok(q) => {
                condition = condition.max(q.condition.unwrap_or(1.0));
                match iterate_product(chain, lambda, x) {
                    Ok(p) => {
                        let gap = chain_relative_gap(&p, &q);
                        if gap > worst || gap.is_nan() {
                            worst = gap;
                            worst_at = Some((x, lambda));
                        }
                    }
                    Err(e) => error = error.or(Some(e)),
                }
            }
            Err(e) => {
                condition = f64::INFINITY;
                error = error.or(Some(e));
            }
        }
    }
    let name = format!("{prefix}.equivalence");
    match error {
        Some(e) => report.push(ReportEntry::failure(name, tol.equivalence, &e)),
        None => {
            let mut entry = ReportEntry::new(name, worst, tol.equivalence);
            if let Some((x, l)) = worst_at {
                entry = entry
                    .at(x)
                    .detail(format!("lambda = {l}, {} samples", config.samples));
            }
            report.push(entry);
        }
    }
    report.push(
        ReportEntry::new(
            format!("{prefix}.qdet_condition"),
            condition,
            tol.condition_warn,
        )
        .severity(Severity::Warning),
    );
}

fn quasidet_section(config: &SuiteConfig, report: &mut ResidualReport) {
    let tol = &config.tolerances;
    let mut rng = config.rng(1);
    let mut jacobi: f64 = 0.0;
    let mut homological: f64 = 0.0;
    let mut rejected = 0;
    let mut error = None;
    for _ in 0..config.identity_count {
        let (grid, r) =
            random_identity_grid(&mut rng, config.identity_dim.max(1), tol.identity_condition);
        rejected += r;
        match (check_nc_jacobi(&grid), check_homological(&grid)) {
            (Ok(a), Ok(b)) => {
                jacobi = jacobi.max(a.relative);
                homological = homological.max(b.relative);
            }
            (Err(e), _) | (_, Err(e)) => error = error.or(Some(e)),
        }
    }
    let detail = format!("{} grids, {} redrawn", config.identity_count, rejected);
    if let Some(e) = error {
        report.push(ReportEntry::failure(
            "quasidet.identities",
            tol.identity,
            &e,
        ));
    }
    report
        .push(ReportEntry::new("quasidet.nc_jacobi", jacobi, tol.identity).detail(detail.clone()));
    report.push(ReportEntry::new("quasidet.homological", homological, tol.identity).detail(detail));

    let mut rng = config.rng(2);
    let mut ratio: f64 = 0.0;
    for _ in 0..config.identity_count {
        let x = random_block(&mut rng, 4);
        for i in 0..4 {
            for j in 0..4 {
                match qdet_scalar(&x, i, j) {
                    Ok(q) => {
                        let d = qdet_by_determinants(&x, i, j);
                        ratio = ratio.max(relative((q - d).norm(), q.norm(), d.norm()));
                    }
                    Err(_) => ratio = f64::INFINITY,
                }
            }
        }
    }
    report.push(
        ReportEntry::new("quasidet.ratio", ratio, tol.ratio).detail(format!(
            "{} random 4x4 matrices, all expansion points",
            config.identity_count
        )),
    );
}

fn su2_section(config: &SuiteConfig, chain: &DarbouxChain, report: &mut ResidualReport) {
    let tol = &config.tolerances;
    let thetas = &config.thetas[..config.k];
    let seed = &chain.base;

    // One soliton per configured angle against a single engine step.
    let mut rng = config.rng(3);
    let points: Vec<_> = (0..config.soliton_samples)
        .map(|_| config.random_point(&mut rng))
        .collect();
    let mut closed: f64 = 0.0;
    let mut imaginary: f64 = 0.0;
    let mut quoted: f64 = 0.0;
    let mut closed_at = None;
    let mut error = None;
    for &theta in thetas {
        let params = SolitonParams {
            p: config.p,
            q: config.q,
            theta,
        };
        let single = chain.truncated(0);
        let single = DarbouxChain {
            steps: vec![SpectralData::soliton(theta).expect("validated")],
            ..single
        };
        for &x in &points {
            let res = (|| -> Result<()> {
                let cf = one_soliton(&params, x)?;
                let engine = iterate_product(&single, ZERO, x)?;
                let s = single.at(x)?.s.remove(0);
                let gap = [
                    (&cf.s, &s),
                    (&cf.g, &engine.g),
                    (&cf.j_plus, &engine.j_plus),
                    (&cf.j_minus, &engine.j_minus),
                ]
                .iter()
                .map(|(a, b)| (*a - *b).frobenius_norm())
                .fold(0.0, f64::max);
                if gap > closed || gap.is_nan() {
                    closed = gap;
                    closed_at = Some(x);
                }
                imaginary = imaginary.max(cf.rs.imaginary_residue);
                let d = quoted_d(&params, cf.rs.r, cf.rs.s);
                quoted = quoted.max((d - engine.j_minus[(0, 1)]).norm());
                Ok(())
            })();
            if let Err(e) = res {
                error = error.or(Some(e));
            }
        }
    }
    match error {
        Some(e) => report.push(ReportEntry::failure(
            "su2.one_soliton.engine",
            tol.closed_form,
            &e,
        )),
        None => {
            let mut entry = ReportEntry::new("su2.one_soliton.engine", closed, tol.closed_form)
                .detail(format!("{} points per angle", points.len()));
            if let Some(x) = closed_at {
                entry = entry.at(x);
            }
            report.push(entry);
        }
    }
    report.push(ReportEntry::new(
        "su2.rs.imaginary",
        imaginary,
        tol.rs_imaginary,
    ));
    report.push(
        ReportEntry::new("su2.one_soliton.quoted_d", quoted, tol.closed_form)
            .severity(Severity::Finding)
            .detail("off-diagonal of j~- with sign +iq[(1 - cos) tanh r - i sin] sech r e^{is}"),
    );

    if thetas.len() >= 2 && thetas[0] != thetas[1] {
        two_soliton_findings(config, chain, &points, report);
    }

    // Asymptotic limits.
    for (label, count, radius) in [
        ("k1", 1usize, config.asymptotic_r),
        ("k2", 2, config.asymptotic_r_chain),
    ] {
        if thetas.len() < count {
            continue;
        }
        let sub = chain.truncated(count);
        for sign in [AsymptoticSign::Plus, AsymptoticSign::Minus] {
            let name = format!(
                "su2.asymptotic.{label}.{}",
                if sign == AsymptoticSign::Plus {
                    "plus"
                } else {
                    "minus"
                }
            );
            let res = (|| -> Result<(f64, SpacetimePoint)> {
                let x = point_at_r(config.p, &thetas[..count], sign.sign() * radius)?;
                let g = iterate_product(&sub, ZERO, x)?.g;
                let ratio = &g * &seed.g(x)?.invert()?;
                let limit = asymptotic_g(&thetas[..count], sign)?;
                Ok(((&ratio - &limit.factor).frobenius_norm(), x))
            })();
            match res {
                Ok((v, x)) => report.push(
                    ReportEntry::new(name, v, tol.asymptotic)
                        .at(x)
                        .detail(format!("smallest |r_k| = {radius}")),
                ),
                Err(e) => report.push(ReportEntry::failure(name, tol.asymptotic, &e)),
            }
        }
    }
    if thetas.len() == 1 {
        // closed form at the same radius
        let params = SolitonParams {
            p: config.p,
            q: config.q,
            theta: thetas[0],
        };
        let res = (|| -> Result<f64> {
            let x = point_at_r(config.p, thetas, config.asymptotic_r)?;
            let cf = one_soliton(&params, x)?;
            let limit = asymptotic_g(thetas, AsymptoticSign::Plus)?;
            Ok((&(&cf.g * &seed.g(x)?.invert()?) - &limit.factor).frobenius_norm())
        })();
        match res {
            Ok(v) => report.push(ReportEntry::new(
                "su2.asymptotic.closed_form",
                v,
                tol.asymptotic,
            )),
            Err(e) => report.push(ReportEntry::failure(
                "su2.asymptotic.closed_form",
                tol.asymptotic,
                &e,
            )),
        }
    }
    let mut factorization: f64 = 0.0;
    for sign in [AsymptoticSign::Plus, AsymptoticSign::Minus] {
        match asymptotic_g(thetas, sign) {
            Ok(l) => factorization = factorization.max((&l.factor - &l.product).frobenius_norm()),
            Err(_) => factorization = f64::INFINITY,
        }
    }
    report.push(ReportEntry::new(
        "su2.asymptotic.factorization",
        factorization,
        tol.factorization,
    ));
}

/// The quoted two-soliton closed form against the two-step engine. Recorded
/// as findings: disagreements are reported, not enforced.
fn two_soliton_findings(
    config: &SuiteConfig,
    chain: &DarbouxChain,
    points: &[SpacetimePoint],
    report: &mut ResidualReport,
) {
    let tol = &config.tolerances;
    let sub = chain.truncated(2);
    let params = match TwoSolitonParams::new(config.p, config.q, config.thetas[0], config.thetas[1])
    {
        Ok(p) => p,
        Err(e) => {
            report.push(
                ReportEntry::failure("su2.two_soliton.engine", tol.two_soliton, &e)
                    .severity(Severity::Finding),
            );
            return;
        }
    };
    let mut worst: f64 = 0.0;
    let mut norm_gap: f64 = 0.0;
    let mut worst_at = None;
    let mut compared = 0;
    let mut skipped = 0;
    for &x in points {
        let cf = match two_soliton(&params, x, tol.denominator_floor) {
            Ok(cf) => cf,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let Ok(engine) = iterate_product(&sub, ZERO, x) else {
            skipped += 1;
            continue;
        };
        compared += 1;
        let gap = relative(
            (&cf.g - &engine.g).frobenius_norm(),
            cf.g.frobenius_norm(),
            engine.g.frobenius_norm(),
        );
        if gap > worst || gap.is_nan() {
            worst = gap;
            worst_at = Some(x);
        }
        norm_gap = norm_gap.max((cf.x3.norm_sqr() + cf.y3.norm_sqr() - 1.0).abs());
    }
    let detail = format!("{compared} points compared, {skipped} skipped (small denominator)");
    let mut entry = ReportEntry::new("su2.two_soliton.engine", worst, tol.two_soliton)
        .severity(Severity::Finding)
        .detail(detail);
    if let Some(x) = worst_at {
        entry = entry.at(x);
    }
    report.push(entry);
    report.push(
        ReportEntry::new("su2.two_soliton.unit_norm", norm_gap, tol.algebraic)
            .severity(Severity::Finding)
            .detail("max ||X|^2 + |Y|^2 - 1| of the quoted closed form"),
    );
}

/// Spectral parameter at which projector and reality checks probe `D(lambda)`.
pub const PROBE_LAMBDA: Complex64 = Complex64::new(0.3, 0.4);

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            nt: 9,
            nx: 9,
            samples: 5,
            soliton_samples: 8,
            identity_count: 10,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn small_suite_passes() {
        let r = run_full_suite(&small());
        let fails: Vec<_> = r.failures().collect();
        assert!(r.pass, "{fails:#?}");
        assert!(r.get("k2.equivalence").is_some());
        assert!(r.get("seed.lax.l2.plus.order").is_some());
        assert_eq!(
            r.get("su2.two_soliton.engine").unwrap().severity,
            Severity::Finding
        );
    }

    #[test]
    fn invalid_theta_is_recorded() {
        let config = SuiteConfig {
            thetas: vec![0.0, 1.0],
            ..small()
        };
        let r = run_full_suite(&config);
        assert!(!r.pass);
        assert!(!r.get("spectral.validation").unwrap().pass);
        assert!(r.get("quasidet.nc_jacobi").unwrap().pass);
    }

    #[test]
    fn duplicate_angles_warn() {
        let config = SuiteConfig {
            thetas: vec![1.0, 1.0],
            ..small()
        };
        let r = run_full_suite(&config);
        let w = r.get("k2.qdet_condition").unwrap();
        assert_eq!(w.severity, Severity::Warning);
        assert!(!w.pass);
    }

    #[test]
    fn suite_is_deterministic() {
        let c = SuiteConfig { k: 1, ..small() };
        assert_eq!(run_full_suite(&c).to_json(), run_full_suite(&c).to_json());
    }

    #[test]
    fn convergence_orders() {
        let c = small();
        let rows = convergence_study(
            &c,
            StudyTarget::Lax {
                depth: 0,
                lambda: Complex64::new(0.5, 0.0),
            },
            &c.h_values,
        )
        .unwrap();
        assert_eq!(rows[0].order, Order::None);
        for r in &rows[1..] {
            let Order::Value(o) = r.order else {
                panic!("{r:?}")
            };
            assert!((o - 2.0).abs() < 0.1, "{o}");
        }
        let rows = convergence_study(
            &c,
            StudyTarget::Lax {
                depth: 1,
                lambda: Complex64::new(0.5, 0.0),
            },
            &c.h_values,
        )
        .unwrap();
        for r in &rows[1..] {
            let Order::Value(o) = r.order else {
                panic!("{r:?}")
            };
            assert!((o - 2.0).abs() < 0.1, "{o}");
        }
        let rows = convergence_study(&c, StudyTarget::Constant, &c.h_values).unwrap();
        assert!(rows[1..].iter().all(|r| r.order == Order::Floor));
        assert!(convergence_study(&c, StudyTarget::Constant, &[1e-4, 2e-4, 3e-4]).is_err());
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let c = SuiteConfig::default();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SuiteConfig>(&s).unwrap(), c);
        let partial: SuiteConfig = serde_json::from_str(r#"{"p": 2.0, "k": 1}"#).unwrap();
        assert_eq!((partial.p, partial.k, partial.nt), (2.0, 1, 41));
        assert!(serde_json::from_str::<SuiteConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
