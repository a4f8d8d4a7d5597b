//! One randomized trial per property. A trial draws its inputs from the
//! given generator, returns `Ok(tags)` when the property holds (tags label
//! the case, e.g. `"strict"` or `"equal"`), or `Err(description)` with the
//! counterexample.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::measure::{pushforward_projection, Measure};
use crate::radon::{
    double_count_all, enumerate_flags, flag_mass, radon_forward, radon_invert, radon_measure,
    reconstruct_measure, VertexFunction,
};
use crate::rational::{sqrt_sum_dominates, Rational};
use crate::transport::{
    check_nonextendable, convexity_gap, extend_from_dirac, interpolate, is_cyclically_monotone,
    optimal_plan, w2_squared, CycleLength, EXHAUSTIVE_LIMIT,
};
use crate::tree::{
    aligned, check_cat0_triangle, geodesic_through_flag, perpendicular, BranchRule, Geodesic, Tree,
    TreePoint,
};

use super::gen::{gen_tree, measure_from, random_measure, random_point, random_point_on, random_vertex_function, TreeMode};
use super::lemmas::{check_dirac_preserved_extension, check_thales, thales_configuration};
use super::oracle::{brute_force_radon, brute_force_w2, comparison_distance_sq};
use super::SuiteConfig;

pub type TrialResult = Result<Vec<&'static str>, String>;
pub type Trial = fn(&SuiteConfig, &mut ChaCha8Rng) -> TrialResult;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn lib<T>(r: crate::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

fn complete_tree(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Tree, String> {
    lib(gen_tree(config, rng, TreeMode::Complete))
}

fn any_tree(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Tree, String> {
    let finite = config.max_vertices >= 2 && rng.gen_bool(0.5);
    let mode = if finite { TreeMode::Finite } else { TreeMode::Complete };
    lib(gen_tree(config, rng, mode))
}

/// A random maximal geodesic: through a random flag on complete trees,
/// between two random leaves otherwise.
fn random_geodesic(tree: &Tree, rng: &mut ChaCha8Rng) -> Result<Geodesic, String> {
    if tree.is_geodesically_complete() {
        let flags = enumerate_flags(tree);
        let flag = flags.choose(rng).ok_or("tree without flags")?;
        return lib(geodesic_through_flag(tree, flag));
    }
    let leaves = tree.leaves();
    let a = *leaves.choose(rng).unwrap();
    let b = *leaves.iter().filter(|&&l| l != a).collect::<Vec<_>>().choose(rng).ok_or("single leaf")?;
    Ok(Geodesic::between(tree, a, *b))
}

fn describe_measure(tree: &Tree, mu: &Measure) -> String {
    let parts: Vec<String> = mu
        .atoms()
        .iter()
        .map(|a| format!("{}@{}", a.mass, describe_point(tree, &a.point)))
        .collect();
    format!("[{}]", parts.join(", "))
}

fn describe_point(tree: &Tree, p: &TreePoint) -> String {
    match p {
        TreePoint::Vertex(v) => format!("v{}", tree.label(*v)),
        TreePoint::Interior { edge, offset } => format!("e{edge}+{offset}"),
    }
}

// ---- trees ----

pub fn metric_axioms(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let d = config.denom_bound;
    let (p, q, r) = (random_point(&t, rng, d), random_point(&t, rng, d), random_point(&t, rng, d));
    let (dpq, dqr, dpr) = (t.distance(&p, &q), t.distance(&q, &r), t.distance(&p, &r));
    ensure!(dpq == t.distance(&q, &p), "asymmetric distance");
    ensure!(t.distance(&p, &p).is_zero(), "d(p,p) != 0");
    ensure!((dpq.is_zero()) == (p == q), "zero distance between distinct points");
    ensure!(dpr <= &dpq + &dqr, "triangle inequality fails: {dpr} > {dpq} + {dqr}");
    ensure!(t.path(&p, &q).length == dpq, "path length differs from distance");
    let m = t.midpoint(&p, &q);
    ensure!(t.distance(&p, &m) == t.distance(&m, &q), "midpoint not equidistant");
    ensure!(&t.distance(&p, &m) * Rational::from_integer(2.into()) == dpq, "midpoint off path");
    Ok(vec![])
}

pub fn projection_lipschitz(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let gamma = random_geodesic(&t, rng)?;
    let d = config.denom_bound;
    let (p, q) = (random_point(&t, rng, d), random_point(&t, rng, d));
    let (pp, pq) = (gamma.project(&t, &p), gamma.project(&t, &q));
    ensure!(gamma.project(&t, &pp) == pp, "projection not idempotent");
    ensure!(
        t.distance(&pp, &pq) <= t.distance(&p, &q),
        "projection expands {} {}",
        describe_point(&t, &p),
        describe_point(&t, &q)
    );
    // nearest point: no vertex of the geodesic is closer
    let dp = t.distance(&p, &pp);
    for &v in gamma.vertices() {
        ensure!(t.distance(&p, &TreePoint::Vertex(v)) >= dp, "projection is not nearest");
    }
    Ok(vec![])
}

pub fn perpendicular_level_set(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let flags = enumerate_flags(&t);
    let flag = *flags.choose(rng).unwrap();
    let perp = lib(perpendicular(&t, &flag))?;
    let gamma = lib(geodesic_through_flag(&t, &flag))?;
    for _ in 0..8 {
        let p = random_point(&t, rng, config.denom_bound);
        let level = gamma.project(&t, &p) == TreePoint::Vertex(flag.x);
        ensure!(perp.contains(&p) == level, "perpendicular differs from level set at {}", describe_point(&t, &p));
    }
    Ok(vec![])
}

pub fn cat0_comparison(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let d = config.denom_bound;
    let x = random_point(&t, rng, d);
    let z = random_point(&t, rng, d);
    // a third of the time pick y on the segment to get aligned triples
    let y = if rng.gen_bool(0.3) {
        let path = t.path(&x, &z);
        let s = Rational::new(rng.gen_range(0..=4).into(), 4.into()) * &path.length;
        path.point_at(&t, &s)
    } else {
        random_point(&t, rng, d)
    };
    let is_aligned = aligned(&t, &x, &y, &z);
    let mut tags = vec![if is_aligned { "aligned" } else { "non-aligned" }];
    for k in 0..=4 {
        let s = Rational::new(k.into(), 4.into());
        let r = lib(check_cat0_triangle(&t, &x, &y, &z, &s))?;
        ensure!(r.holds, "CAT(0) inequality violated at t={s}: {} > {}", r.lhs, r.rhs);
        let interior = k != 0 && k != 4;
        if is_aligned || !interior {
            ensure!(r.lhs == r.rhs, "expected equality at t={s}: {} vs {}", r.lhs, r.rhs);
        } else {
            ensure!(r.strict, "expected strict inequality for non-aligned triple at t={s}");
            tags.push("strict");
        }
        // the right side is the comparison-triangle distance
        let cmp = comparison_distance_sq(&t.distance(&x, &y), &t.distance(&y, &z), &t.distance(&x, &z), &s);
        ensure!(cmp == r.rhs, "comparison triangle gives {cmp}, formula {}", r.rhs);
    }
    Ok(tags)
}

// ---- measures ----

pub fn pushforward_properties(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let gamma = random_geodesic(&t, rng)?;
    let mu = random_measure(&t, rng, config.max_atoms, config.denom_bound);
    let nu = random_measure(&t, rng, config.max_atoms, config.denom_bound);
    let s = pushforward_projection(&t, &gamma, &mu);
    ensure!(s.total().is_one(), "pushforward changed total mass");
    let pm = lib(s.to_measure(&t))?;
    ensure!(pushforward_projection(&t, &gamma, &pm) == s, "repeated projection changed the sample");
    let pn = lib(pushforward_projection(&t, &gamma, &nu).to_measure(&t))?;
    let (w_proj, w) = (lib(w2_squared(&t, &pm, &pn))?, lib(w2_squared(&t, &mu, &nu))?);
    ensure!(w_proj <= w, "projection increased W²: {w_proj} > {w}");
    Ok(vec![])
}

// ---- transport ----

fn small_measures(config: &SuiteConfig, rng: &mut ChaCha8Rng, t: &Tree, max: usize) -> (Measure, Measure) {
    let cap = config.max_atoms.min(max);
    (random_measure(t, rng, cap, config.denom_bound), random_measure(t, rng, cap, config.denom_bound))
}

pub fn plan_marginals(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let (mu, nu) = small_measures(config, rng, &t, usize::MAX);
    let plan = lib(optimal_plan(&t, &mu, &nu))?;
    ensure!(lib(plan.source())? == mu, "source marginal differs");
    ensure!(lib(plan.target())? == nu, "target marginal differs");
    let recomputed = crate::transport::TransportPlan::new(&t, plan.couplings().to_vec());
    ensure!(recomputed.squared_cost() == plan.squared_cost(), "cached cost differs");
    Ok(vec![])
}

pub fn w2_metric(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let (mu, nu) = small_measures(config, rng, &t, usize::MAX);
    let kappa = random_measure(&t, rng, config.max_atoms, config.denom_bound);
    let w = |a: &Measure, b: &Measure| lib(w2_squared(&t, a, b));
    let (mn, nk, mk) = (w(&mu, &nu)?, w(&nu, &kappa)?, w(&mu, &kappa)?);
    ensure!(mn == w(&nu, &mu)?, "W² not symmetric");
    ensure!(w(&mu, &mu)?.is_zero(), "W²(μ,μ) != 0");
    ensure!(mn.is_zero() == (mu == nu), "W² zero on distinct measures");
    ensure!(sqrt_sum_dominates(&mn, &nk, &mk), "triangle inequality fails: {mn}, {nk}, {mk}");
    Ok(vec![])
}

fn unit_grid() -> Vec<Rational> {
    (0..=4).map(|k| Rational::new(k.into(), 4.into())).collect()
}

pub fn interpolation_geodesic(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let (mu, nu) = small_measures(config, rng, &t, 5);
    let plan = lib(optimal_plan(&t, &mu, &nu))?;
    let total = plan.squared_cost().clone();
    let grid = unit_grid();
    let path: Vec<Measure> = grid.iter().map(|s| lib(interpolate(&t, &plan, s))).collect::<Result<_, _>>()?;
    ensure!(path[0] == mu && path[4] == nu, "interpolation endpoints differ");
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let dt = &grid[j] - &grid[i];
            let got = lib(w2_squared(&t, &path[i], &path[j]))?;
            ensure!(got == &dt * &dt * &total, "W²(μ_s, μ_t) = {got} at s={}, t={}", grid[i], grid[j]);
        }
    }
    Ok(vec![])
}

/// Times used for the extension property.
pub fn extension_times() -> Vec<Rational> {
    [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1), (3, 2), (2, 1)]
        .iter()
        .map(|&(p, q)| Rational::new(p.into(), q.into()))
        .collect()
}

pub fn extension_geodesic(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let x = random_point(&t, rng, config.denom_bound);
    let mu = random_measure(&t, rng, config.max_atoms, config.denom_bound);
    let times = extension_times();
    let path: Vec<Measure> =
        times.iter().map(|s| lib(extend_from_dirac(&t, &x, &mu, s))).collect::<Result<_, _>>()?;
    let unit = lib(w2_squared(&t, &path[0], &path[4]))?;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let dt = &times[j] - &times[i];
            let got = lib(w2_squared(&t, &path[i], &path[j]))?;
            ensure!(
                got == &dt * &dt * &unit,
                "extension breaks geodesic property at s={}, t={}: from {} to {}",
                times[i],
                times[j],
                describe_point(&t, &x),
                describe_measure(&t, &mu)
            );
        }
    }
    Ok(vec![])
}

pub fn plans_monotone(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let (mu, nu) = small_measures(config, rng, &t, usize::MAX);
    let plan = lib(optimal_plan(&t, &mu, &nu))?;
    let mode = if plan.couplings().len() <= EXHAUSTIVE_LIMIT { CycleLength::Exhaustive } else { CycleLength::Max(3) };
    let found = lib(is_cyclically_monotone(&t, &plan, mode))?;
    ensure!(found.is_none(), "optimal plan has a violating cycle");
    Ok(vec![])
}

pub fn solver_vs_enumeration(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let (mu, nu) = small_measures(config, rng, &t, 4);
    let plan = lib(optimal_plan(&t, &mu, &nu))?;
    let brute = brute_force_w2(&t, &mu, &nu);
    ensure!(
        plan.squared_cost() == &brute,
        "solver {} vs enumeration {brute} for {} -> {}",
        plan.squared_cost(),
        describe_measure(&t, &mu),
        describe_measure(&t, &nu)
    );
    Ok(vec![])
}

// ---- radon ----

pub fn inversion_round_trip(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let h = random_vertex_function(&t, rng, config.denom_bound);
    let table = radon_forward(&t, &h);
    let mut back = lib(radon_invert(&t, &table, h.total()))?;
    if config.inject_fault {
        let bumped = back.iter().map(|(v, x)| (*v, x.clone())).chain([(crate::tree::VertexId(0), Rational::one())]);
        back = VertexFunction::new(bumped);
    }
    ensure!(back == h, "inversion round trip failed on a tree with {} vertices", t.vertex_count());
    Ok(vec![])
}

pub fn forward_vs_brute_force(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let h = random_vertex_function(&t, rng, config.denom_bound);
    ensure!(radon_forward(&t, &h) == brute_force_radon(&t, &h), "branch-sum transform differs from perpendicular sums");
    Ok(vec![])
}

pub fn double_counting(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = any_tree(config, rng)?;
    let h = random_vertex_function(&t, rng, config.denom_bound);
    for (x, dc) in double_count_all(&t, &h) {
        ensure!(dc.holds(), "double counting fails at {}: {} vs {}", t.label(x), dc.lhs, dc.rhs);
    }
    Ok(vec![])
}

pub fn injectivity(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    if t.vertex_count() < 2 {
        return Ok(vec!["trivial"]);
    }
    let h = random_vertex_function(&t, rng, config.denom_bound);
    let mut vs: Vec<_> = t.vertices().collect();
    vs.shuffle(rng);
    let delta = Rational::new(rng.gen_range(1..=config.denom_bound as i64).into(), rng.gen_range(1..=config.denom_bound as i64).into());
    let l = VertexFunction::new(
        h.iter().map(|(v, x)| (*v, x.clone())).chain([(vs[0], delta.clone()), (vs[1], -delta)]),
    );
    ensure!(l.total() == h.total() && l != h, "perturbation broke the setup");
    ensure!(radon_forward(&t, &h) != radon_forward(&t, &l), "distinct functions with equal totals share a transform");
    Ok(vec![])
}

/// Random measure mixing vertex atoms and interior atoms on a random
/// skeleton; returns the measure and the skeleton.
pub fn random_skeleton_measure(
    t: &Tree,
    config: &SuiteConfig,
    rng: &mut ChaCha8Rng,
) -> (Measure, BTreeSet<crate::tree::EdgeId>) {
    let count = rng.gen_range(1..=config.max_atoms.max(1));
    let points: Vec<TreePoint> = (0..count).map(|_| random_point(t, rng, config.denom_bound)).collect();
    let mut skeleton: BTreeSet<_> = points
        .iter()
        .filter_map(|p| match p {
            TreePoint::Interior { edge, .. } => Some(*edge),
            TreePoint::Vertex(_) => None,
        })
        .collect();
    // a few empty edges in the skeleton too
    for _ in 0..2 {
        skeleton.insert(crate::tree::EdgeId(rng.gen_range(0..t.edge_count())));
    }
    (measure_from(points, rng, config.denom_bound), skeleton)
}

pub fn reconstruction_round_trip(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let (mu, skeleton) = random_skeleton_measure(&t, config, rng);
    let rec = lib(reconstruct_measure(&t, |g: &Geodesic| radon_measure(&t, &mu, g), &skeleton))?;
    ensure!(rec.measure == mu, "reconstructed {} instead of {}", describe_measure(&t, &rec.measure), describe_measure(&t, &mu));
    let has_vertex = mu.atoms().iter().any(|a| matches!(a.point, TreePoint::Vertex(_)));
    let has_interior = mu.atoms().iter().any(|a| matches!(a.point, TreePoint::Interior { .. }));
    Ok(match (has_vertex, has_interior) {
        (true, true) => vec!["mixed"],
        (true, false) => vec!["vertex-only"],
        _ => vec!["interior-only"],
    })
}

pub fn flag_mass_refinement(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let mu = random_measure(&t, rng, config.max_atoms, config.denom_bound);
    let mass_in = |pred: &dyn Fn(&TreePoint) -> bool| -> Rational {
        mu.atoms().iter().filter(|a| pred(&a.point)).map(|a| &a.mass).sum()
    };
    let x = *t.vertices().collect::<Vec<_>>().choose(rng).unwrap();
    let inc = t.incident(x).to_vec();
    for flag in enumerate_flags(&t).into_iter().filter(|f| f.x == x) {
        let m = lib(flag_mass(&t, &mu, &flag))?;
        let perp = lib(perpendicular(&t, &flag))?;
        ensure!(m == mass_in(&|p| perp.contains(p)), "flag mass differs from perpendicular mass");
        // swapping f for another edge g moves exactly the two branch masses
        for &g in &inc {
            if g == flag.e || g == flag.f {
                continue;
            }
            let other = crate::tree::Flag::new(&t, x, flag.e, g).map_err(|e| e.to_string())?;
            let m2 = lib(flag_mass(&t, &mu, &other))?;
            let (_, f_edges) = t.branch(x, flag.f);
            let (_, g_edges) = t.branch(x, g);
            let (f_verts, _) = t.branch(x, flag.f);
            let (g_verts, _) = t.branch(x, g);
            let in_branch = |verts: &BTreeSet<_>, edges: &BTreeSet<_>, p: &TreePoint| match p {
                TreePoint::Vertex(v) => verts.contains(v),
                TreePoint::Interior { edge, .. } => edges.contains(edge),
            };
            let mf = mass_in(&|p| in_branch(&f_verts, &f_edges, p));
            let mg = mass_in(&|p| in_branch(&g_verts, &g_edges, p));
            ensure!(&m - &m2 == mg - mf, "refinement changes mass by the wrong amount");
        }
    }
    Ok(vec![])
}

// ---- lemmas ----

pub fn thales(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let gamma = random_geodesic(&t, rng)?;
    let d = config.denom_bound;
    let on_gamma = rng.gen_bool(0.5);
    let count = rng.gen_range(1..=config.max_atoms.max(1));
    if on_gamma {
        let points = (0..count).map(|_| random_point_on(&t, &gamma, rng, d)).collect();
        let mu = measure_from(points, rng, d);
        let x = random_point_on(&t, &gamma, rng, d);
        let g = random_point_on(&t, &gamma, rng, d);
        let r = lib(check_thales(&t, &gamma, &x, &g, &mu))?;
        ensure!(r.relation == Ordering::Equal, "supported on γ but {} vs {}", r.lhs_sq, r.rhs_sq);
        return Ok(vec!["equal"]);
    }
    // at least one atom off the geodesic
    let mut points: Vec<TreePoint> = (1..count).map(|_| random_point(&t, rng, d)).collect();
    let off = loop {
        let p = random_point(&t, rng, d);
        if !gamma.contains(&t, &p) {
            break p;
        }
    };
    points.push(off.clone());
    let mu = measure_from(points, rng, d);
    // the inequality holds for arbitrary points of γ
    let (x0, g0) = (random_point_on(&t, &gamma, rng, d), random_point_on(&t, &gamma, rng, d));
    let r0 = lib(check_thales(&t, &gamma, &x0, &g0, &mu))?;
    ensure!(r0.relation != Ordering::Greater, "Thales inequality violated: {} > {}", r0.lhs_sq, r0.rhs_sq);
    let (x, g) = thales_configuration(&t, &gamma, &off).ok_or("no configuration found")?;
    let r = lib(check_thales(&t, &gamma, &x, &g, &mu))?;
    ensure!(r.relation == Ordering::Less, "not supported on γ but {} vs {}", r.lhs_sq, r.rhs_sq);
    Ok(vec!["strict"])
}

pub fn dirac_extension(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let x = random_point(&t, rng, config.denom_bound);
    let mu = random_measure(&t, rng, config.max_atoms.min(4), config.denom_bound);
    let r = lib(check_dirac_preserved_extension(&t, &x, &mu, &Rational::from_integer(2.into())))?;
    ensure!(r.passed, "extension check failed from {} to {}", describe_point(&t, &x), describe_measure(&t, &mu));
    Ok(vec![if mu.is_dirac() { "dirac" } else { "non-dirac" }])
}

/// Branch rules standing in for "every proposed extension".
pub fn extension_rules(seed: u64) -> [BranchRule; 3] {
    [BranchRule::SmallestEdge, BranchRule::LargestEdge, BranchRule::Seeded(seed)]
}

pub fn nonextendability(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> TrialResult {
    let t = complete_tree(config, rng)?;
    let mu0 = loop {
        let m = random_measure(&t, rng, config.max_atoms.max(2), config.denom_bound);
        if !m.is_dirac() {
            break m;
        }
    };
    let y = mu0.atoms().choose(rng).unwrap().point.clone();
    let eps = Rational::new(rng.gen_range(1..=config.denom_bound as i64).into(), rng.gen_range(1..=config.denom_bound as i64).into());
    ensure!(convexity_gap(&eps) > Rational::zero(), "(1+ε)² <= 1+ε² for ε={eps}");
    for rule in extension_rules(rng.gen()) {
        let w = lib(check_nonextendable(&t, &mu0, &y, &eps, rule))?
            .ok_or_else(|| format!("no violation for ε={eps} with {rule:?}"))?;
        ensure!(w.cost > w.swapped_cost, "witness does not violate monotonicity");
        let cyc = lib(is_cyclically_monotone(&t, &w.plan, CycleLength::Max(2)))?;
        ensure!(cyc.is_some(), "monotonicity checker misses the violation");
        let d = t.distance(&w.y_prime, &w.y);
        let aligned_ok = t.distance(&w.y_prime, &w.y_second) == &d * (Rational::one() + &eps);
        ensure!(aligned_ok, "continued path is not a geodesic");
    }
    ensure!(
        lib(check_nonextendable(&t, &mu0, &y, &Rational::zero(), BranchRule::SmallestEdge))?.is_none(),
        "violation reported for zero extension"
    );
    Ok(vec![])
}

/// Every property with its name, in report order.
pub fn all() -> Vec<(&'static str, Trial)> {
    vec![
        ("tree.metric_axioms", metric_axioms as Trial),
        ("tree.projection_lipschitz", projection_lipschitz),
        ("tree.perpendicular_level_set", perpendicular_level_set),
        ("tree.cat0_comparison", cat0_comparison),
        ("measure.pushforward", pushforward_properties),
        ("transport.plan_marginals", plan_marginals),
        ("transport.w2_metric", w2_metric),
        ("transport.interpolation_geodesic", interpolation_geodesic),
        ("transport.extension_geodesic", extension_geodesic),
        ("transport.plans_monotone", plans_monotone),
        ("transport.solver_vs_enumeration", solver_vs_enumeration),
        ("radon.inversion_round_trip", inversion_round_trip),
        ("radon.forward_vs_brute_force", forward_vs_brute_force),
        ("radon.double_counting", double_counting),
        ("radon.injectivity", injectivity),
        ("radon.reconstruction_round_trip", reconstruction_round_trip),
        ("radon.flag_mass_refinement", flag_mass_refinement),
        ("lemma.thales", thales),
        ("lemma.dirac_extension", dirac_extension),
        ("lemma.nonextendability", nonextendability),
    ]
}
