//! Acceptance suite. Runs as a plain binary (no libtest harness) so each
//! criterion prints exactly one PASS/FAIL line; the process fails if any
//! criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treeot::measure::Measure;
use treeot::radon::{double_count_all, radon_forward, radon_invert, radon_measure, reconstruct_measure};
use treeot::rational::Rational;
use treeot::transport::convexity_gap;
use treeot::tree::{EdgeId, Geodesic, Tree, TreePoint};
use treeot::verify::gen::{gen_tree, measure_from, random_point, random_vertex_function, TreeMode};
use treeot::verify::properties::{self, Trial};
use treeot::verify::suite::{run_trial, trial_seed};
use treeot::verify::SuiteConfig;

struct Outcome {
    passed: bool,
    detail: String,
}

fn config(max_vertices: usize, denom_bound: u32, max_atoms: usize) -> SuiteConfig {
    SuiteConfig {
        seed: 2024,
        min_vertices: 1,
        max_vertices,
        min_valency: 3,
        max_valency: 6,
        max_atoms,
        denom_bound,
        trials: 0,
        inject_fault: false,
    }
}

fn rng_for(criterion: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(2024, criterion, trial))
}

/// Runs a library property `n` times; fails on the first error.
fn run_property(criterion: usize, trial: Trial, cfg: &SuiteConfig, n: usize) -> Result<BTreeMap<&'static str, usize>, String> {
    let mut tags = BTreeMap::new();
    for i in 0..n {
        let seed = trial_seed(cfg.seed, criterion, i);
        for tag in run_trial(trial, cfg, seed).map_err(|e| format!("trial {i} (seed {seed}): {e}"))? {
            *tags.entry(tag).or_insert(0) += 1;
        }
    }
    Ok(tags)
}

fn inversion_and_double_counting() -> (Outcome, Outcome) {
    let cfg = config(50, 100, 1);
    let start = Instant::now();
    let mut trees = Vec::new();
    let mut failures = 0;
    let mut largest = 0;
    for i in 0..1000 {
        let mut rng = rng_for(1, i);
        let tree = gen_tree(&cfg, &mut rng, TreeMode::Complete).expect("valid config");
        let h = random_vertex_function(&tree, &mut rng, cfg.denom_bound);
        let table = radon_forward(&tree, &h);
        match radon_invert(&tree, &table, h.total()) {
            Ok(back) if back == h => {}
            _ => failures += 1,
        }
        largest = largest.max(tree.vertex_count());
        trees.push(tree);
    }
    let elapsed = start.elapsed();
    let first = Outcome {
        passed: failures == 0 && elapsed <= Duration::from_secs(60),
        detail: format!(
            "Radon inversion round trip: 1000 complete trees (up to {largest} vertices), {failures} failures, {:.1}s (limit 60s)",
            elapsed.as_secs_f64()
        ),
    };

    let mut checks = 0usize;
    let mut failures = 0usize;
    for (i, tree) in trees.iter().enumerate() {
        let mut rng = rng_for(2, i);
        for _ in 0..100 {
            let h = random_vertex_function(tree, &mut rng, cfg.denom_bound);
            for (_, dc) in double_count_all(tree, &h) {
                checks += 1;
                if !dc.holds() {
                    failures += 1;
                }
            }
        }
    }
    let second = Outcome {
        passed: failures == 0,
        detail: format!("double counting: 1000 trees x 100 functions, {checks} vertex checks, {failures} failures"),
    };
    (first, second)
}

/// Measure with at least one vertex atom and one interior atom.
fn mixed_measure(tree: &Tree, rng: &mut ChaCha8Rng, denom: u32) -> Measure {
    loop {
        let n = rng.gen_range(2..=10);
        let points: Vec<TreePoint> = (0..n).map(|_| random_point(tree, rng, denom)).collect();
        let vertex = points.iter().any(|p| matches!(p, TreePoint::Vertex(_)));
        let interior = points.iter().any(|p| matches!(p, TreePoint::Interior { .. }));
        if vertex && interior {
            return measure_from(points, rng, denom);
        }
    }
}

fn reconstruction() -> Outcome {
    let cfg = config(20, 100, 10);
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut atoms = 0;
    for i in 0..500 {
        let mut rng = rng_for(3, i);
        let tree = gen_tree(&cfg, &mut rng, TreeMode::Complete).expect("valid config");
        let mu = mixed_measure(&tree, &mut rng, cfg.denom_bound);
        atoms += mu.len();
        let skeleton = mu
            .atoms()
            .iter()
            .filter_map(|a| match a.point {
                TreePoint::Interior { edge, .. } => Some(edge),
                TreePoint::Vertex(_) => None,
            })
            .chain([EdgeId(rng.gen_range(0..tree.edge_count()))])
            .collect();
        let oracle = |g: &Geodesic| radon_measure(&tree, &mu, g);
        match reconstruct_measure(&tree, oracle, &skeleton) {
            Ok(rec) if rec.measure == mu => {}
            Ok(_) => failures.push(format!("trial {i}: wrong measure")),
            Err(e) => failures.push(format!("trial {i}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        passed: failures.is_empty() && elapsed <= Duration::from_secs(120),
        detail: format!(
            "measure reconstruction: 500 mixed measures ({atoms} atoms), {} failures{}, {:.1}s (limit 120s)",
            failures.len(),
            failures.first().map(|f| format!(" [{f}]")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    }
}

fn solver_vs_enumeration() -> Outcome {
    let cfg = config(20, 100, 4);
    match run_property(4, properties::solver_vs_enumeration, &cfg, 1000) {
        Ok(_) => Outcome { passed: true, detail: "W2 solver vs polytope enumeration: 1000 cases, support <= 4, 0 mismatches".into() },
        Err(e) => Outcome { passed: false, detail: format!("W2 solver vs polytope enumeration: {e}") },
    }
}

fn extension_geodesic() -> Outcome {
    let cfg = config(20, 100, 6);
    match run_property(5, properties::extension_geodesic, &cfg, 200) {
        Ok(_) => Outcome {
            passed: true,
            detail: "extension from Dirac: 200 cases, 21 time pairs each on {0,1/4,1/2,3/4,1,3/2,2}, all exact".into(),
        },
        Err(e) => Outcome { passed: false, detail: format!("extension from Dirac: {e}") },
    }
}

fn thales() -> Outcome {
    let cfg = config(20, 100, 6);
    match run_property(6, properties::thales, &cfg, 200) {
        Ok(tags) => {
            let (strict, equal) = (tags.get("strict").copied().unwrap_or(0), tags.get("equal").copied().unwrap_or(0));
            Outcome {
                passed: strict >= 50 && equal >= 50,
                detail: format!("Thales criterion: 200 configurations, {strict} strict (need 50), {equal} equality (need 50)"),
            }
        }
        Err(e) => Outcome { passed: false, detail: format!("Thales criterion: {e}") },
    }
}

fn nonextendability() -> Outcome {
    let cfg = config(20, 100, 6);
    let result = run_property(7, properties::nonextendability, &cfg, 200);
    // (1+ε)² - (1+ε²) = 2ε, positive for ε > 0
    let mut rng = rng_for(7, usize::MAX);
    let convex = (0..1000).all(|_| {
        let eps = Rational::new(rng.gen_range(1..=1000).into(), rng.gen_range(1..=1000).into());
        let gap = convexity_gap(&eps);
        gap == &eps + &eps && gap > Rational::zero()
    });
    match result {
        Ok(_) => Outcome {
            passed: convex,
            detail: format!(
                "non-extendability: 200 non-Dirac measures x 3 extension rules, 0 misses; convexity gap = 2eps on 1000 samples: {}",
                if convex { "ok" } else { "FAILED" }
            ),
        },
        Err(e) => Outcome { passed: false, detail: format!("non-extendability: {e}") },
    }
}

fn cat0() -> Outcome {
    let cfg = config(20, 100, 1);
    match run_property(8, properties::cat0_comparison, &cfg, 500) {
        Ok(tags) => Outcome {
            passed: true,
            detail: format!(
                "CAT(0) comparison: 500 triangles x 5 times, {} aligned (equality), {} non-aligned ({} strict checks), 0 violations",
                tags.get("aligned").copied().unwrap_or(0),
                tags.get("non-aligned").copied().unwrap_or(0),
                tags.get("strict").copied().unwrap_or(0)
            ),
        },
        Err(e) => Outcome { passed: false, detail: format!("CAT(0) comparison: {e}") },
    }
}

fn report(n: usize, o: &Outcome) {
    println!("criterion {n}: {} - {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
}

fn main() {
    let (first, second) = inversion_and_double_counting();
    report(1, &first);
    report(2, &second);
    let mut outcomes = vec![first, second];
    let rest: [fn() -> Outcome; 6] = [reconstruction, solver_vs_enumeration, extension_geodesic, thales, nonextendability, cat0];
    for criterion in rest {
        let o = criterion();
        report(outcomes.len() + 1, &o);
        outcomes.push(o);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
