//! The six acceptance criteria, one test each. Every test prints exactly one
//! summary line, ACCEPTANCE n (name): PASS/FAIL - details, then asserts, so a
//! red run still shows the measured numbers.

use std::path::PathBuf;
use std::time::Instant;

use jbb_cli::commands::run_verification;
use jbb_cli::scenario::{self, Prepared};
use jbb_core::closedform::{
    maxmin_control, maxmin_rate, maxmin_sinr, o_rate_bound, o_rate_exact, o_rate_breakdown,
    oa_b_rate, sinr_b_mr, sinr_b_zf,
};
use jbb_core::linalg::{herm_dot, norm_sq};
use jbb_core::model::{
    db_to_linear, linear_to_db, rho_b_prime, OperatingPoint, PathLossProfile, Precoder, Scheme,
    SystemConfig,
};
use jbb_core::montecarlo::{build_null_basis, draw_realization};
use jbb_core::solver::{
    find_intersection, match_oa, optimize_epsilon, power_saving_db, sweep_uplink_snr,
    trace_b_curve, trace_o_curves, Intersection,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn repo_scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn load(name: &str) -> Prepared {
    scenario::load(&repo_scenario(name), None).expect("shipped scenario must load")
}

fn report(n: u32, name: &str, pass: bool, details: &str) {
    println!("ACCEPTANCE {} ({}): {} - {}", n, name, if pass { "PASS" } else { "FAIL" }, details);
    assert!(pass, "ACCEPTANCE {} ({}): {}", n, name, details);
}

struct Crossings {
    red: Option<Intersection>,
    blue: Option<Intersection>,
}

fn solve_crossings(p: &Prepared) -> Crossings {
    let black = trace_b_curve(
        &p.cfg,
        &p.profile,
        &p.gamma,
        p.precoder,
        p.scenario.targets.net_b_sum,
        &p.ratio_grid,
    );
    let o = trace_o_curves(
        &p.cfg,
        &p.profile,
        &p.gamma,
        p.precoder,
        p.scenario.targets.net_o,
        &p.ratio_grid,
    );
    Crossings {
        red: find_intersection(&black, &o.jbb_prime),
        blue: find_intersection(&black, &o.oa),
    }
}

#[test]
fn acceptance_1_figure_a_operating_point() {
    let t0 = Instant::now();
    let p = load("figure_a.json");
    let x = solve_crossings(&p).red;
    let elapsed = t0.elapsed().as_secs_f64();

    let (pass, details) = match x {
        Some(x) => {
            let b = linear_to_db(x.rho_b());
            let o = linear_to_db(x.rho_o());
            let d = linear_to_db(x.rho_d);
            let ok = (b - (-4.0)).abs() <= 0.1
                && (o - 7.0).abs() <= 0.1
                && (d - 7.3).abs() <= 0.15
                && elapsed < 10.0;
            (ok, format!("rho_b {:.2} dB, rho_o {:.2} dB, rho_d {:.2} dB, {:.1} s", b, o, d, elapsed))
        }
        None => (false, "no black/red intersection on the grid".to_string()),
    };
    report(1, "figure_a_operating_point", pass, &details);
}

#[test]
fn acceptance_2_figure_a_oa_match() {
    let t0 = Instant::now();
    let p = load("figure_a.json");
    let x = solve_crossings(&p);
    let (pass, details) = match (x.red, x.blue) {
        (Some(red), Some(blue)) => {
            let op = OperatingPoint {
                rho_b: blue.rho_b(),
                rho_o: blue.rho_o(),
                scheme: Scheme::JbbPrime,
            };
            let m = optimize_epsilon(op, &p.cfg, &p.profile, &p.gamma, p.precoder);
            let d = linear_to_db(blue.rho_d);
            let saving = power_saving_db(&red, &blue);
            let elapsed = t0.elapsed().as_secs_f64();
            let ok = m.feasible
                && (m.epsilon - 0.45).abs() <= 0.02
                && (d - 10.6).abs() <= 0.2
                && (saving - 3.2).abs() <= 0.3
                && elapsed < 60.0;
            (
                ok,
                format!(
                    "epsilon {:.3}, rho_d {:.2} dB, saving {:.2} dB, {:.1} s",
                    m.epsilon, d, saving, elapsed
                ),
            )
        }
        _ => (false, "missing an intersection on the grid".to_string()),
    };
    report(2, "figure_a_oa_match", pass, &details);
}

#[test]
fn acceptance_3_table_term_columns() {
    let mut details = Vec::new();
    let mut pass = true;
    let cases = [
        ("figure_a.json", 5.7, -2.1, -3.8),
        ("figure_e1.json", 9.3, -1.8, 4.6),
    ];
    for (name, want_sig, want_est, want_bint) in cases {
        let p = load(name);
        match solve_crossings(&p).red {
            Some(x) => {
                let boosted = rho_b_prime(x.rho_b(), p.cfg.frame(), p.cfg.tau_po).unwrap();
                let b = o_rate_breakdown(&p.cfg, p.profile.beta_o, x.rho_o(), boosted).unwrap();
                let sig = linear_to_db(b.signal);
                let est = linear_to_db(b.est_error);
                let bint = linear_to_db(b.b_interference);
                let ok = (sig - want_sig).abs() <= 0.15
                    && (est - want_est).abs() <= 0.15
                    && (bint - want_bint).abs() <= 0.15;
                pass &= ok;
                details.push(format!(
                    "{}: signal {:.2}/{:.1}, est {:.2}/{:.1}, b-intf {:.2}/{:.1}",
                    name.trim_end_matches(".json"),
                    sig,
                    want_sig,
                    est,
                    want_est,
                    bint,
                    want_bint
                ));
            }
            None => {
                pass = false;
                details.push(format!("{}: no intersection", name));
            }
        }
    }
    report(3, "table_term_columns", pass, &details.join("; "));
}

#[test]
fn acceptance_4_monte_carlo_oracles() {
    let t0 = Instant::now();
    let p = load("figure_a.json");
    let doc = run_verification(&p).expect("verification must run");
    let elapsed = t0.elapsed().as_secs_f64();

    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(4);
    let budget = 300.0 * 4.0 / cores as f64;

    let has = |prefix: &str| doc.checks.iter().any(|c| c.name.starts_with(prefix));
    let complete = has("leakage_terminal_")
        && has("power_normalization")
        && has("sinr_terminal_")
        && has("o_rate_vs_quadrature")
        && has("jensen_constant")
        && has("v2_independence");
    let pass = doc.all_pass && complete && elapsed < budget;
    let failed: Vec<&str> =
        doc.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let details = format!(
        "{} checks, failed [{}], {:.1} s of {:.0} s budget on {} cores",
        doc.checks.len(),
        failed.join(", "),
        elapsed,
        budget,
        cores
    );
    report(4, "monte_carlo_oracles", pass, &details);
}

#[test]
fn acceptance_5_property_identities() {
    let mut bad = Vec::new();

    // Max-min weights leave every terminal at the common SINR.
    let beta = vec![1.0, 0.4, 2.5];
    let gamma = jbb_core::estimation::estimation_quality(&beta, 0.5, 10).gamma;
    for precoder in [Precoder::Mr, Precoder::Zf] {
        let (control, _) = maxmin_control(64, 2.0, 1.0, &beta, &gamma, precoder).unwrap();
        let common = maxmin_sinr(64, 2.0, 1.0, &beta, &gamma, precoder);
        for t in 0..3 {
            let s = match precoder {
                Precoder::Mr => sinr_b_mr(64, 2.0, 1.0, beta[t], gamma[t], control.eta[t]),
                Precoder::Zf => sinr_b_zf(64, 3, 2.0, 1.0, beta[t], gamma[t], control.eta[t]),
            };
            if ((s - common) / common).abs() > 1e-9 {
                bad.push(format!("maxmin selfconsistency {:?} t{}", precoder, t));
            }
        }
    }

    // The matched OA split spends exactly the JBB power per interval.
    let p = load("figure_a.json");
    let op = p.operating_point.unwrap();
    let m = match_oa(op, &p.cfg, &p.profile, &p.gamma, p.precoder, 0.45);
    let energy = (1.0 - m.epsilon) * m.rho_b_oa + m.epsilon * m.rho_o_oa;
    if !m.feasible || (energy - op.rho_d()).abs() > 1e-9 * op.rho_d() {
        bad.push("oa energy identity".to_string());
    }

    // Jensen bound stays below the exact rate across power and gain.
    'jensen: for i in 0..10 {
        for j in 0..10 {
            let rho_o = db_to_linear(-10.0 + 3.0 * i as f64);
            let beta_o = db_to_linear(-12.0 + 3.0 * j as f64);
            let exact = o_rate_exact(&p.cfg, beta_o, rho_o, 1.0).unwrap();
            let bound = o_rate_bound(&p.cfg, beta_o, rho_o, 1.0).unwrap();
            if bound > exact + 1e-12 {
                bad.push(format!("jensen bound at ({}, {})", i, j));
                break 'jensen;
            }
        }
    }

    // With the broadcast off, a JBB interval is an OA B interval.
    for eps in [0.2, 0.45, 0.8] {
        let full = maxmin_rate(p.cfg.m, 3.0, 0.0, &p.profile.beta, &p.gamma, p.precoder);
        let oa = oa_b_rate(p.cfg.m, 3.0, eps, &p.profile.beta, &p.gamma, p.precoder);
        if (oa / (1.0 - eps) - full).abs() > 1e-12 * full {
            bad.push(format!("rho_o=0 reduction at eps {}", eps));
        }
    }

    // Better pilots never cost beamforming power.
    let grid: Vec<f64> = (0..9).map(|i| db_to_linear(-10.0 + 2.5 * i as f64)).collect();
    let sweep = sweep_uplink_snr(
        &p.cfg,
        &p.profile,
        p.precoder,
        Scheme::JbbPrime,
        p.scenario.targets.net_b_sum,
        db_to_linear(7.0),
        &grid,
    );
    let mut prev = f64::INFINITY;
    for pt in &sweep {
        match pt.required_rho_b {
            Some(r) => {
                if r > prev * (1.0 + 1e-12) {
                    bad.push("required power monotonicity".to_string());
                    break;
                }
                prev = r;
            }
            None => {
                if prev.is_finite() {
                    bad.push("feasibility lost as pilots improve".to_string());
                    break;
                }
            }
        }
    }

    // The broadcast frame is orthonormal and estimate-orthogonal.
    let cfg = SystemConfig::new(16, 2, 4, 500, 10, 10, 1.0).unwrap();
    let profile = PathLossProfile::new(vec![1.0, 0.5], 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    'basis: for _ in 0..1000 {
        let r = draw_realization(&cfg, &profile, &mut rng);
        let basis = build_null_basis(&r.g_hat, cfg.mp, &mut rng).unwrap();
        for a in 0..cfg.mp {
            for b in 0..cfg.mp {
                let dot = herm_dot(basis.u.col(a), basis.u.col(b));
                let want = if a == b { 1.0 } else { 0.0 };
                if (dot.re - want).abs() > 1e-10 || dot.im.abs() > 1e-10 {
                    bad.push("basis orthonormality".to_string());
                    break 'basis;
                }
            }
            for k in 0..cfg.k {
                let leak = herm_dot(r.g_hat.col(k), basis.u.col(a)).norm_sqr();
                let scale = norm_sq(r.g_hat.col(k));
                if leak > 1e-10 * scale {
                    bad.push("basis nullspace".to_string());
                    break 'basis;
                }
            }
        }
    }

    let details = if bad.is_empty() {
        "maxmin, oa energy, jensen, rho_o=0 reduction, sweep monotonicity, basis invariants"
            .to_string()
    } else {
        format!("violated: {}", bad.join(", "))
    };
    report(5, "property_identities", bad.is_empty(), &details);
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn drop_savings(name: &str, n_drops: u64) -> Vec<f64> {
    let base = load(name);
    let mut sc = base.scenario.clone();
    sc.grid.points = 31;
    let mut savings = Vec::new();
    for seed in 0..n_drops {
        sc.drop.random.as_mut().expect("statistical scenarios use random drops").seed = seed;
        let p = scenario::prepare(sc.clone(), base.hash.clone(), None).unwrap();
        let x = solve_crossings(&p);
        if let (Some(red), Some(blue)) = (x.red, x.blue) {
            savings.push(power_saving_db(&red, &blue));
        }
    }
    savings
}

#[test]
fn acceptance_6_random_drop_statistics() {
    let t0 = Instant::now();
    let b = drop_savings("figure_b.json", 50);
    let c = drop_savings("figure_c.json", 50);
    let elapsed = t0.elapsed().as_secs_f64();

    let enough = b.len() >= 40 && c.len() >= 40;
    let (med_b, med_c) = if enough { (median(b.clone()), median(c.clone())) } else { (f64::NAN, f64::NAN) };
    let pass = enough
        && (1.5..=3.5).contains(&med_b)
        && med_c > 0.0
        && med_c < med_b
        && elapsed < 900.0;
    let details = format!(
        "median saving b {:.2} dB ({} drops), c {:.2} dB ({} drops), {:.0} s",
        med_b,
        b.len(),
        med_c,
        c.len(),
        elapsed
    );
    report(6, "random_drop_statistics", pass, &details);
}
