//! Acceptance criteria 1 to 10. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twoweight::operator::{estimate_norm, NormOptions};
use twoweight::random::{random_instance, RandomShape};
use twoweight::suite::{
    bracket_limit, comparability_brackets, large_gamma_checks, run_suite, small_gamma_checks, Check, SuiteConfig,
    SuiteName, SuiteOutcome, CONTRACT_LIMIT, FACTORIZATION_LIMIT, MAUREY_LIMIT, P_GRID, Q_GRID, SANDWICH_LIMIT,
};
use twoweight::Exponents;

struct Verdict {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn failed_named<'a>(outcome: &'a SuiteOutcome, needle: &str) -> Vec<&'a Check> {
    outcome.failures.iter().map(|f| &f.check).filter(|c| c.name.contains(needle)).collect()
}

fn constants_with<'a>(outcome: &'a SuiteOutcome, prefix: &str) -> BTreeMap<&'a str, f64> {
    outcome.report.constants.iter().filter(|(k, _)| k.starts_with(prefix)).map(|(k, &v)| (k.as_str(), v)).collect()
}

fn max_of(m: &BTreeMap<&str, f64>) -> f64 {
    m.values().copied().fold(0.0, f64::max)
}

fn suite(name: SuiteName, seed: u64) -> SuiteOutcome {
    run_suite(name, &SuiteConfig::new(name, seed)).expect("suite runs")
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut above_certificate = 0usize;
    for i in 0..50 {
        let e = Exponents::new([1.5, 2.0][i % 2], [0.25, 0.5][(i / 2) % 2], 1.0).unwrap();
        let depth = rng.gen_range(1..=2);
        let inst = random_instance(&mut rng, RandomShape { depth, ..Default::default() }, e).unwrap();
        let est = estimate_norm(&inst, NormOptions::default()).unwrap();
        let oracle = common::oracle_norm(&inst, 10_000, 900 + i as u64);
        worst = worst.max((est.value - oracle).abs() / oracle);
        if oracle > est.certified_upper * (1.0 + 1e-9) {
            above_certificate += 1;
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        id: 1,
        title: "oracle equivalence",
        passed: worst <= 0.02 && above_certificate == 0 && elapsed < Duration::from_secs(120),
        detail: format!("max rel diff {worst:.2e} over 50 instances, {above_certificate} above certificate, {elapsed:.1?}"),
    }
}

fn sandwich(a: &SuiteOutcome, b: &SuiteOutcome) -> Verdict {
    let ca = constants_with(a, "sandwich/");
    let cb = constants_with(b, "sandwich/");
    let mut drift = 0.0f64;
    for (k, v) in &ca {
        let w = cb[k];
        drift = drift.max((v - w).abs() / v.min(w));
    }
    let failed = failed_named(a, "sandwich").len() + failed_named(b, "sandwich").len();
    let worst = max_of(&ca).max(max_of(&cb));
    Verdict {
        id: 2,
        title: "upper bound sandwich",
        passed: failed == 0 && ca.len() == 9 && worst <= SANDWICH_LIMIT && drift <= 0.2,
        detail: format!("C max {worst:.3} over {} grid points (limit {SANDWICH_LIMIT}), seed drift {:.1}%", ca.len(), 100.0 * drift),
    }
}

fn factorization(a: &SuiteOutcome, b: &SuiteOutcome) -> Verdict {
    let failed = failed_named(a, "factorization").len() + failed_named(b, "factorization").len();
    let c = constants_with(a, "factorization/");
    let worst = max_of(&c).max(max_of(&constants_with(b, "factorization/")));
    let table: Vec<String> = c.iter().map(|(k, v)| format!("{}={v:.3}", &k["factorization/".len()..])).collect();
    Verdict {
        id: 3,
        title: "factorization bound",
        passed: failed == 0 && c.len() == 3 && worst <= FACTORIZATION_LIMIT,
        detail: format!("norm/bound max {worst:.3} (limit {FACTORIZATION_LIMIT}); C_q {}", table.join(" ")),
    }
}

fn contracts(inv: &SuiteOutcome) -> Verdict {
    let failed = failed_named(inv, "contract").len();
    let c = constants_with(inv, "contract_");
    let worst = max_of(&c);
    Verdict {
        id: 4,
        title: "a/d power relations",
        passed: failed == 0 && !c.is_empty() && worst <= CONTRACT_LIMIT,
        detail: format!("C max {worst:.3} (limit {CONTRACT_LIMIT}) over {} cases, {failed} failed checks", inv.report.results["cases"]),
    }
}

fn jensen(inv: &SuiteOutcome, wolff: &SuiteOutcome) -> Verdict {
    let failed = [inv, wolff].iter().map(|o| failed_named(o, "monotonicity").len()).sum::<usize>();
    Verdict {
        id: 5,
        title: "Jensen monotonicity",
        passed: failed == 0 && inv.report.passed && wolff.report.passed,
        detail: format!("γ ladder {{1/4,1/2,1,2,4}} on {} + {} cases, {failed} violations", inv.report.results["cases"], wolff.report.results["cases"]),
    }
}

fn comparability() -> Verdict {
    let mut ok = true;
    let mut worst_widen = 0.0f64;
    let mut lines = Vec::new();
    for p in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let d3 = comparability_brackets(31, 100, 3, p, 4).unwrap();
        let d4 = comparability_brackets(31, 100, 4, p, 4).unwrap();
        let spread = |b: (f64, f64, f64, f64)| [b.1, 1.0 / b.0, b.3, 1.0 / b.2];
        let (s3, s4) = (spread(d3), spread(d4));
        for (x, y) in s3.iter().zip(&s4) {
            worst_widen = worst_widen.max(y / x - 1.0);
            ok &= *y <= 1.1 * x && *y <= bracket_limit(p);
        }
        lines.push(format!("p={p}:[{:.3},{:.3}]", d4.0, d4.1));
    }
    Verdict {
        id: 6,
        title: "comparability brackets",
        passed: ok,
        detail: format!("depth 3→4 widening {:.1}% (limit 10%); sbp {}", 100.0 * worst_widen.max(0.0), lines.join(" ")),
    }
}

fn chain(id: u32, title: &'static str, run: fn(usize) -> twoweight::Result<(Vec<Check>, serde_json::Value)>) -> Verdict {
    let start = Instant::now();
    let (checks, _) = run(1_000_000).unwrap();
    let elapsed = start.elapsed();
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({} vs {})", c.name, c.observed, c.limit)).collect();
    let summary: Vec<String> = checks.iter().map(|c| format!("{}={:.4}", c.name, c.observed)).collect();
    Verdict {
        id,
        title,
        passed: failed.is_empty() && elapsed < Duration::from_secs(30),
        detail: if failed.is_empty() {
            format!("N=10^6 in {elapsed:.1?}; {}", summary.join(", "))
        } else {
            format!("N=10^6 in {elapsed:.1?}; failed: {}", failed.join("; "))
        },
    }
}

fn maurey(inv: &SuiteOutcome) -> Verdict {
    let failed = failed_named(inv, "maurey").len() + failed_named(inv, "density mass").len();
    let c = constants_with(inv, "maurey/");
    let table: Vec<String> = c.iter().map(|(k, v)| format!("{}={v:.3}", &k["maurey/".len()..])).collect();
    Verdict {
        id: 9,
        title: "density round trip",
        passed: failed == 0 && c.len() == 3 && max_of(&c) <= MAUREY_LIMIT,
        detail: format!("C_q {} (limit {MAUREY_LIMIT}), A2 identity to 1e-12", table.join(" ")),
    }
}

fn exact_identities(inv: &SuiteOutcome) -> Verdict {
    let names = ["measure additivity", "power scaling", "domination", "gamma-one"];
    let failed: usize = names.iter().map(|n| failed_named(inv, n).len()).sum();
    let mut cfg = SuiteConfig::new(SuiteName::Invariants, 7);
    cfg.workers = 1;
    let single = run_suite(SuiteName::Invariants, &cfg).unwrap();
    cfg.workers = 3;
    let triple = run_suite(SuiteName::Invariants, &cfg).unwrap();
    let deterministic = single.report.hash == triple.report.hash && single.report.hash == inv.report.hash;
    Verdict {
        id: 10,
        title: "exact identities",
        passed: failed == 0 && deterministic,
        detail: format!("{failed} identity violations; report hash stable across worker counts: {deterministic}"),
    }
}

#[test]
fn acceptance_criteria() {
    let inv = suite(SuiteName::Invariants, 7);
    let sand_a = suite(SuiteName::Sandwich, 7);
    let sand_b = suite(SuiteName::Sandwich, 8);
    let wolff = suite(SuiteName::WolffScale, 7);
    assert_eq!(P_GRID.len() * Q_GRID.len(), 9);
    let verdicts = vec![
        oracle_equivalence(),
        sandwich(&sand_a, &sand_b),
        factorization(&sand_a, &sand_b),
        contracts(&inv),
        jensen(&inv, &wolff),
        comparability(),
        chain(7, "large-gamma chain", large_gamma_checks),
        chain(8, "small-gamma chain", small_gamma_checks),
        maurey(&inv),
        exact_identities(&inv),
    ];
    // Written past the harness capture so the lines show in plain `cargo test` output.
    let mut out = std::io::stdout().lock();
    for v in &verdicts {
        let _ = writeln!(
            out,
            "{} criterion {:>2} {}: {}", if v.passed { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.detail
        );
    }
    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
