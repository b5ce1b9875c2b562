//! Acceptance criteria 1 to 9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::process::Command;
use std::time::{Duration, Instant};

use chiral_cli::identity_report;
use chiral_core::quasidet::{qdet_by_determinants, qdet_scalar, random_block};
use chiral_core::su2::point_at_r;
use chiral_core::tolerance::relative;
use chiral_core::{
    asymptotic_g, one_soliton, run_full_suite, two_soliton, AsymptoticSign, DarbouxChain,
    LaxSolution, SolitonParams, SpacetimePoint, SuiteConfig, SuiteReport, TwoSolitonParams,
};
use rand::Rng;

struct Outcome {
    label: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(label: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        label,
        pass,
        detail,
    }
}

fn base_config() -> SuiteConfig {
    SuiteConfig {
        thetas: vec![FRAC_PI_3, FRAC_PI_2, 2.0 * FRAC_PI_3],
        k: 3,
        ..SuiteConfig::default()
    }
}

/// Worst entry among `names`; missing names count as failures.
fn worst(report: &SuiteReport, names: &[String]) -> (bool, f64, String) {
    let mut pass = true;
    let mut max = 0.0f64;
    let mut at = String::new();
    for n in names {
        match report.get(n) {
            Some(e) => {
                pass &= e.pass;
                let ratio = if e.tolerance > 0.0 {
                    e.value / e.tolerance
                } else {
                    f64::INFINITY
                };
                if ratio > max || at.is_empty() {
                    max = max.max(ratio);
                    at = format!("{} = {:.3e} (tol {:.0e})", n, e.value, e.tolerance);
                }
            }
            None => {
                pass = false;
                at = format!("{n} missing");
            }
        }
    }
    (pass, max, at)
}

fn lax_names(prefix: &str, lambdas: usize) -> Vec<String> {
    let mut v = Vec::new();
    for l in 0..lambdas {
        for d in ["plus", "minus"] {
            v.push(format!("{prefix}.lax.l{l}.{d}"));
            v.push(format!("{prefix}.lax.l{l}.{d}.order"));
        }
    }
    v
}

fn criterion_1() -> Outcome {
    let config = SuiteConfig {
        identity_count: 100,
        identity_dim: 2,
        ..SuiteConfig::default()
    };
    let start = Instant::now();
    let r = identity_report(&config);
    let elapsed = start.elapsed();
    match r {
        Ok(r) => outcome(
            "1 quasideterminant identities",
            r.pass && elapsed < Duration::from_secs(1),
            format!(
                "nc_jacobi {:.2e}, homological {:.2e} (tol {:.0e}), {} redrawn, {:.3} s",
                r.max_nc_jacobi,
                r.max_homological,
                r.tolerance,
                r.redrawn,
                elapsed.as_secs_f64()
            ),
        ),
        Err(e) => outcome("1 quasideterminant identities", false, e.to_string()),
    }
}

fn criterion_2(config: &SuiteConfig) -> Outcome {
    let mut rng = config.rng(2);
    let mut max = 0.0f64;
    for _ in 0..100 {
        let x = random_block(&mut rng, 4);
        for i in 0..4 {
            for j in 0..4 {
                let gap = match qdet_scalar(&x, i, j) {
                    Ok(q) => {
                        let d = qdet_by_determinants(&x, i, j);
                        relative((q - d).norm(), q.norm(), d.norm())
                    }
                    Err(_) => f64::INFINITY,
                };
                max = max.max(gap);
            }
        }
    }
    let tol = config.tolerances.ratio;
    outcome(
        "2 commutative ratio formula",
        max < tol,
        format!("max relative gap {max:.2e} over 100 4x4 matrices (tol {tol:.0e})"),
    )
}

fn criterion_3(report: &SuiteReport, config: &SuiteConfig) -> Outcome {
    let (pass, _, at) = worst(report, &lax_names("seed", config.lambdas.len()));
    outcome("3 seed validity", pass, format!("worst {at}"))
}

fn criterion_4(report: &SuiteReport, config: &SuiteConfig) -> Outcome {
    let mut names = Vec::new();
    for k in 1..=3 {
        let p = format!("k{k}");
        names.extend(lax_names(&p, config.lambdas.len()));
        for n in [
            "eom.conservation",
            "eom.zero_curvature",
            "s_conditions.plus",
            "s_conditions.minus",
        ] {
            names.push(format!("{p}.{n}"));
            names.push(format!("{p}.{n}.order"));
        }
    }
    let (pass, _, at) = worst(report, &names);
    outcome(
        "4 covariance K = 1, 2, 3",
        pass,
        format!("{} checks, worst {at}", names.len()),
    )
}

fn criterion_5(report: &SuiteReport) -> Outcome {
    let mut names = Vec::new();
    for k in 1..=3 {
        for n in [
            "unitarity.product",
            "unitarity.sum",
            "unitarity.g",
            "unitarity.det_g",
            "su.trace_j.plus",
            "su.trace_j.minus",
        ] {
            names.push(format!("k{k}.{n}"));
        }
    }
    let (pass, _, at) = worst(report, &names);
    outcome("5 unitarity and group closure", pass, format!("worst {at}"))
}

fn criterion_6(report: &SuiteReport) -> Outcome {
    let names: Vec<String> = (1..=3)
        .flat_map(|k| [format!("k{k}.equivalence"), format!("k{k}.projector.s")])
        .collect();
    let (pass, _, at) = worst(report, &names);
    outcome("6 formula equivalence", pass, format!("worst {at}"))
}

fn criterion_7a(report: &SuiteReport) -> Outcome {
    let (pass, _, at) = worst(report, &["su2.one_soliton.engine".to_string()]);
    outcome("7a one-soliton closed form", pass, at)
}

/// The quoted two-soliton closed form against the K = 2 engine.
fn criterion_7b(config: &SuiteConfig) -> Outcome {
    let tol = &config.tolerances;
    let (t1, t2) = (config.thetas[0], config.thetas[1]);
    let params = match TwoSolitonParams::new(config.p, config.q, t1, t2) {
        Ok(p) => p,
        Err(e) => return outcome("7b two-soliton closed form", false, e.to_string()),
    };
    let chain = DarbouxChain::su2(config.p, config.q, &[t1, t2]).expect("valid chain");
    let mut rng = config.rng(70);
    let (mut max, mut used, mut skipped) = (0.0f64, 0, 0);
    for _ in 0..config.soliton_samples {
        let t = rng.random_range(config.t_min..config.t_max);
        let x = rng.random_range(config.x_min..config.x_max);
        let pt = SpacetimePoint::from_tx(t, x);
        match two_soliton(&params, pt, tol.denominator_floor) {
            Ok(cf) => {
                let engine = chain.g(pt).expect("engine");
                let diff = (&cf.g - &engine).frobenius_norm();
                max = max.max(relative(
                    diff,
                    cf.g.frobenius_norm(),
                    engine.frobenius_norm(),
                ));
                used += 1;
            }
            Err(_) => skipped += 1,
        }
    }
    outcome(
        "7b two-soliton closed form",
        used > 0 && max < tol.two_soliton,
        format!(
            "max relative gap {max:.3e} over {used} points, {skipped} below the denominator floor (tol {:.0e})",
            tol.two_soliton
        ),
    )
}

fn ratio_to_seed(chain: &DarbouxChain, x: SpacetimePoint) -> chiral_core::ComplexMatrix {
    &chain.g(x).expect("engine g")
        * &chain
            .base
            .g(x)
            .expect("seed g")
            .invert()
            .expect("seed inverse")
}

fn criterion_8(config: &SuiteConfig) -> Outcome {
    let tol = &config.tolerances;
    let mut pass = true;
    let mut lines = Vec::new();
    let signs = [AsymptoticSign::Plus, AsymptoticSign::Minus];

    // One soliton at r = +-20, every configured angle.
    let mut k1 = 0.0f64;
    for &theta in &config.thetas {
        let params = SolitonParams::new(config.p, config.q, theta).expect("params");
        for sign in signs {
            let x =
                point_at_r(config.p, &[theta], config.asymptotic_r * sign.sign()).expect("point");
            let g = one_soliton(&params, x).expect("closed form");
            let ratio = &g.g
                * &params
                    .seed()
                    .expect("seed")
                    .g(x)
                    .expect("seed g")
                    .invert()
                    .expect("inverse");
            let limit = asymptotic_g(&[theta], sign).expect("limit");
            k1 = k1.max((&ratio - &limit.factor).frobenius_norm());
        }
    }
    pass &= k1 < tol.asymptotic;
    lines.push(format!("K=1 at |r|={} {k1:.2e}", config.asymptotic_r));

    // Two solitons; every r_k beyond the chain radius.
    let thetas = &config.thetas[..2];
    let chain = DarbouxChain::su2(config.p, config.q, thetas).expect("chain");
    let mut k2 = 0.0f64;
    let mut k2_near = 0.0f64;
    for sign in signs {
        let limit = asymptotic_g(thetas, sign).expect("limit");
        let x =
            point_at_r(config.p, thetas, config.asymptotic_r_chain * sign.sign()).expect("point");
        k2 = k2.max((&ratio_to_seed(&chain, x) - &limit.factor).frobenius_norm());
        let x = point_at_r(config.p, thetas, config.asymptotic_r * sign.sign()).expect("point");
        k2_near = k2_near.max((&ratio_to_seed(&chain, x) - &limit.factor).frobenius_norm());
    }
    pass &= k2 < tol.asymptotic;
    lines.push(format!(
        "K=2 at min|r_k|={} {k2:.2e} (at {} {k2_near:.2e})",
        config.asymptotic_r_chain, config.asymptotic_r
    ));

    let mut fact = 0.0f64;
    for k in 1..=config.thetas.len() {
        for sign in signs {
            let limit = asymptotic_g(&config.thetas[..k], sign).expect("limit");
            fact = fact.max((&limit.factor - &limit.product).frobenius_norm());
        }
    }
    pass &= fact < tol.factorization;
    lines.push(format!("factorization {fact:.2e}"));
    outcome("8 asymptotics", pass, lines.join(", "))
}

fn chiral(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_chiral"))
        .args(args)
        .output()
        .expect("running chiral")
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let mut timings = Vec::new();
    let mut codes = Vec::new();
    for path in [&a, &b] {
        let start = Instant::now();
        let out = chiral(&[
            "verify",
            "--rng-seed",
            "20240601",
            "--out",
            path.to_str().unwrap(),
        ]);
        timings.push(start.elapsed().as_secs_f64());
        codes.push(out.status.code());
    }
    let identical = match (std::fs::read(&a), std::fs::read(&b)) {
        (Ok(x), Ok(y)) => !x.is_empty() && x == y,
        _ => false,
    };
    let profile = chiral(&[
        "profile",
        "--K",
        "1",
        "--theta",
        &FRAC_PI_2.to_string(),
        "--grid",
        "-5,5,-5,5,41,37",
    ]);
    let rows = String::from_utf8_lossy(&profile.stdout)
        .lines()
        .count()
        .saturating_sub(1);
    let slowest = timings.iter().cloned().fold(0.0, f64::max);
    let pass = identical
        && codes.iter().all(|c| *c == Some(0))
        && profile.status.success()
        && rows == 41 * 37
        && slowest < 60.0;
    outcome(
        "9 CLI determinism",
        pass,
        format!(
            "identical {identical}, exit codes {codes:?}, profile rows {rows} of {}, default suite {slowest:.1} s",
            41 * 37
        ),
    )
}

fn main() {
    let config = base_config();
    let start = Instant::now();
    let report = run_full_suite(&config);
    eprintln!(
        "suite (K = 3) ran in {:.1} s",
        start.elapsed().as_secs_f64()
    );

    let outcomes = vec![
        criterion_1(),
        criterion_2(&config),
        criterion_3(&report, &config),
        criterion_4(&report, &config),
        criterion_5(&report),
        criterion_6(&report),
        criterion_7a(&report),
        criterion_7b(&config),
        criterion_8(&config),
        criterion_9(),
    ];
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "criterion {}: {} ({})",
            o.label,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
