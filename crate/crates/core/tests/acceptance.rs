//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Sample counts and tolerances are the contractual ones; each criterion
//! also has a wall-clock budget.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use normforge::interpolation;
use normforge::suite::{self, SuiteConfig, SuiteReport, Verdict};
use normforge::Rat;

struct Outcome {
    ok: bool,
    detail: String,
}

fn config(samples: usize, eps: &str) -> SuiteConfig {
    SuiteConfig { seed: 42, samples, max_dim: 4, eps: eps.parse().expect("eps") }
}

fn describe(r: &SuiteReport) -> String {
    let mut s = format!("{} {}/{}", r.suite, r.summary.pass, r.checks.len());
    for c in r.checks.iter().filter(|c| c.verdict != Verdict::Pass) {
        s.push_str(&format!("; {:?} {}: {}", c.verdict, c.name, c.detail));
    }
    s
}

fn suites(list: &[(&str, usize)], eps: &str) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for &(name, samples) in list {
        match suite::run_suite(name, &config(samples, eps)) {
            Ok(r) => {
                ok &= r.passed();
                parts.push(describe(&r));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: error {e}"));
            }
        }
    }
    Outcome { ok, detail: parts.join(", ") }
}

/// `(Σ_{n=1}^{60} (2^n + 2^{-n})^{-2})^{1/2}` in floating point.
fn series_oracle() -> f64 {
    (1..=60).map(|n| (2f64.powi(n) + 2f64.powi(-n)).powi(-2)).sum::<f64>().sqrt()
}

fn interpolation_scale() -> Outcome {
    let oracle = series_oracle();
    let spec = interpolation::line_spec();
    let eps = Rat::new(1, 1_000_000_000_000);
    let mut detail = Vec::new();
    let mut ok = true;
    for x in [Rat::one(), Rat::new(-7, 3), Rat::new(5, 2)] {
        match spec.interpolation_norm(std::slice::from_ref(&x), &eps) {
            Ok(v) => {
                let ratio = v.scale(&x.abs().recip());
                let err = (ratio.midpoint().to_f64() - oracle).abs() + ratio.width().to_f64();
                ok &= err <= 1e-9;
                detail.push(format!("x = {x}: |ratio - oracle| <= {err:.2e}"));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("x = {x}: error {e}"));
            }
        }
    }
    let rest = suites(&[("interp-scale", 50), ("interp-contraction", 167)], "1/1000000000000");
    Outcome { ok: ok && rest.ok, detail: format!("oracle c = {oracle:.10}; {}; {}", detail.join(", "), rest.detail) }
}

fn determinism(cache: &std::path::Path) -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_normforge"))
            .args(["verify", "all", "--seed", "42", "--json"])
            .env("NORMFORGE_CACHE", cache)
            .output()
    };
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            let same = a.stdout == b.stdout && !a.stdout.is_empty();
            let digest = serde_json::from_slice::<serde_json::Value>(&a.stdout)
                .ok()
                .and_then(|v| v["digest"].as_str().map(str::to_owned))
                .unwrap_or_default();
            Outcome {
                ok: same && a.status.code() == Some(0),
                detail: format!(
                    "{} bytes, identical {same}, exit {:?}, digest {digest}",
                    a.stdout.len(),
                    a.status.code()
                ),
            }
        }
        (Err(e), _) | (_, Err(e)) => Outcome { ok: false, detail: format!("could not run the binary: {e}") },
    }
}

fn main() -> ExitCode {
    let cache = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("normforge-cache");
    std::fs::create_dir_all(&cache).expect("cache dir");
    std::env::set_var("NORMFORGE_CACHE", &cache);

    let fine = "1/1000000000000";
    type Run<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(u32, &str, u64, Run)> = vec![
        (1, "embedding sandwich", 600, Box::new(|| suites(&[("embedding-sandwich", 200)], fine))),
        (2, "operators T and U", 120, Box::new(|| suites(&[("operators", 200)], fine))),
        (
            3,
            "further-level inequalities",
            600,
            Box::new(|| suites(&[("furthlemma", 200), ("furthI", 200), ("furthII", 200)], "1/1000000000")),
        ),
        (4, "beta and alpha bounds", 120, Box::new(|| suites(&[("betabound", 500), ("alphabound", 500)], fine))),
        (5, "rho norm properties", 120, Box::new(|| suites(&[("rho-properties", 1000)], "1/1000000"))),
        (6, "tree-space fidelity", 180, Box::new(|| suites(&[("tree-equivalence", 100), ("tree-monotone", 100)], fine))),
        (7, "level gain with c_n = 7/2^(2n+8)", 180, Box::new(|| suites(&[("b001", 200)], fine))),
        (8, "interpolation scale law and contraction", 300, Box::new(interpolation_scale)),
        (9, "segment lemmas", 180, Box::new(|| suites(&[("segments", 500)], fine))),
        (10, "determinism of verify all", 1800, Box::new(|| determinism(&cache))),
    ];

    let mut failed = 0;
    for (n, name, budget, run) in &criteria {
        let t = Instant::now();
        let out = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let ok = out.ok && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n}: {} {name} [{:.1}s of {budget}s] {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
