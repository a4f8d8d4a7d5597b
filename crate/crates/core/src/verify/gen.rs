//! Seeded random trees, points, measures and vertex functions.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::radon::VertexFunction;
use crate::rational::Rational;
use crate::tree::{Geodesic, Length, Tree, TreePoint, TreeSpec, VertexLabel};

use super::SuiteConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeMode {
    /// Leaves allowed, no rays.
    Finite,
    /// No leaves: every tip carries rays.
    Complete,
}

impl std::str::FromStr for TreeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "finite" => Ok(TreeMode::Finite),
            "complete" => Ok(TreeMode::Complete),
            other => Err(format!("unknown mode {other:?}, expected finite or complete")),
        }
    }
}

fn rational_in(rng: &mut impl Rng, numer: std::ops::RangeInclusive<i64>, denom_bound: u32) -> Rational {
    let q = rng.gen_range(1..=denom_bound as i64);
    Rational::new(BigInt::from(rng.gen_range(numer)), BigInt::from(q))
}

/// Positive length `p/q` with `q <= denom_bound` and `p/q <= 3`.
fn length(rng: &mut impl Rng, denom_bound: u32) -> Rational {
    let q = rng.gen_range(1..=denom_bound as i64);
    let p = rng.gen_range(1..=3 * q);
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Random tree with no valency-2 vertex.
///
/// Trees grow by giving a leaf between 2 and `max_valency - 1` children, so
/// every internal vertex has valency in `[min_valency, max_valency]`. In
/// complete mode every leaf then receives rays until its valency lies in the
/// same range, and internal vertices below the maximum may get an extra ray.
pub fn gen_tree(config: &SuiteConfig, rng: &mut impl Rng, mode: TreeMode) -> Result<Tree> {
    config.validate()?;
    if mode == TreeMode::Complete && config.max_valency < 3 {
        return Err(Error::Config(
            "complete trees need valency bound at least 3 (valency 2 is forbidden)".into(),
        ));
    }
    if mode == TreeMode::Finite && config.max_vertices < 2 {
        return Err(Error::Config("finite trees need at least 2 vertices".into()));
    }
    let lo = match mode {
        TreeMode::Finite => config.min_vertices.max(2),
        TreeMode::Complete => config.min_vertices.max(1),
    };
    let target = rng.gen_range(lo..=config.max_vertices);
    let min_val = config.min_valency.max(3);
    let max_val = config.max_valency;

    // adjacency as child lists; vertex 0 is the root
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let valency = |v: usize, parent: &[Option<usize>], children: &[Vec<usize>]| {
        children[v].len() + usize::from(parent[v].is_some())
    };
    if max_val >= 3 && target >= 2 {
        // root gets between min_val and max_val children when room allows
        let first = rng.gen_range(min_val..=max_val).min(target - 1);
        let first = if first == 2 { 1 } else { first };
        for _ in 0..first {
            let id = parent.len();
            parent.push(Some(0));
            children.push(Vec::new());
            children[0].push(id);
        }
        loop {
            let room = target - parent.len();
            if room < 2 {
                break;
            }
            let leaves: Vec<usize> =
                (1..parent.len()).filter(|&v| children[v].is_empty()).collect();
            let Some(&leaf) = leaves.choose(rng) else { break };
            let lo_c = (min_val - 1).max(2);
            let hi_c = (max_val - 1).min(room);
            if lo_c > hi_c {
                break;
            }
            let k = rng.gen_range(lo_c..=hi_c);
            for _ in 0..k {
                let id = parent.len();
                parent.push(Some(leaf));
                children.push(Vec::new());
                children[leaf].push(id);
            }
        }
    } else if target >= 2 {
        // valency bound below 3 in finite mode: a single segment
        parent.push(Some(0));
        children.push(Vec::new());
        children[0].push(1);
    }
    let n = parent.len();
    if n < config.min_vertices {
        return Err(Error::Config(format!(
            "cannot reach {} vertices under the valency bounds",
            config.min_vertices
        )));
    }

    let labels: Vec<VertexLabel> = (0..n as u64).map(VertexLabel::Num).collect();
    let mut edges = Vec::new();
    for v in 1..n {
        let p = parent[v].unwrap();
        edges.push((labels[p].clone(), Some(labels[v].clone()), Length::Finite(length(rng, config.denom_bound))));
    }
    if mode == TreeMode::Complete {
        for (v, label) in labels.iter().enumerate() {
            let val = valency(v, &parent, &children);
            let rays = if val <= 1 {
                rng.gen_range(min_val..=max_val) - val
            } else if val < max_val && rng.gen_bool(0.25) {
                rng.gen_range(1..=max_val - val)
            } else {
                0
            };
            for _ in 0..rays {
                edges.push((label.clone(), None, Length::Infinite));
            }
        }
    }
    Tree::build(TreeSpec { vertices: labels, edges })
}

/// A vertex, or an interior point of a random edge.
pub fn random_point(tree: &Tree, rng: &mut impl Rng, denom_bound: u32) -> TreePoint {
    if rng.gen_bool(0.4) {
        return TreePoint::Vertex(crate::tree::VertexId(rng.gen_range(0..tree.vertex_count())));
    }
    let e = crate::tree::EdgeId(rng.gen_range(0..tree.edge_count()));
    let edge = tree.edge(e).unwrap();
    let offset = match &edge.len {
        Length::Finite(len) => {
            let q = rng.gen_range(2..=denom_bound.max(2) as i64);
            len * Rational::new(BigInt::from(rng.gen_range(1..q)), BigInt::from(q))
        }
        Length::Infinite => {
            let q = rng.gen_range(1..=denom_bound as i64);
            Rational::new(BigInt::from(rng.gen_range(1..=3 * q)), BigInt::from(q))
        }
    };
    tree.point(e, offset).unwrap()
}

/// Random point of a geodesic, at most 3 beyond its end vertices.
pub fn random_point_on(tree: &Tree, gamma: &Geodesic, rng: &mut impl Rng, denom_bound: u32) -> TreePoint {
    let coords = gamma.coords();
    let q = rng.gen_range(1..=denom_bound as i64);
    let lo = if gamma.start_ray().is_some() { &coords[0] - Rational::from_integer(3.into()) } else { coords[0].clone() };
    let hi = if gamma.end_ray().is_some() {
        coords.last().unwrap() + Rational::from_integer(3.into())
    } else {
        coords.last().unwrap().clone()
    };
    if rng.gen_bool(0.3) {
        let i = rng.gen_range(0..coords.len());
        return TreePoint::Vertex(gamma.vertices()[i]);
    }
    let step = rng.gen_range(0..=q);
    let s = &lo + (&hi - &lo) * Rational::new(BigInt::from(step), BigInt::from(q));
    gamma.point_at(tree, &s).expect("coordinate within range")
}

/// Masses `w_i / Σ w` with integer weights in `1..=denom_bound`.
pub fn random_masses(rng: &mut impl Rng, count: usize, denom_bound: u32) -> Vec<Rational> {
    let weights: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=denom_bound as i64)).collect();
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| Rational::new(BigInt::from(w), BigInt::from(total))).collect()
}

pub fn measure_from(points: Vec<TreePoint>, rng: &mut impl Rng, denom_bound: u32) -> Measure {
    let masses = random_masses(rng, points.len(), denom_bound);
    Measure::new(points.into_iter().zip(masses)).expect("masses sum to one")
}

/// Random measure with between 1 and `max_atoms` atoms.
pub fn random_measure(tree: &Tree, rng: &mut impl Rng, max_atoms: usize, denom_bound: u32) -> Measure {
    let count = rng.gen_range(1..=max_atoms.max(1));
    let points = (0..count).map(|_| random_point(tree, rng, denom_bound)).collect();
    measure_from(points, rng, denom_bound)
}

/// Random vertex function with values `p/q`, `|p| <= q <= denom_bound`
/// scaled by up to 5, zeros included.
pub fn random_vertex_function(tree: &Tree, rng: &mut impl Rng, denom_bound: u32) -> VertexFunction {
    let d = denom_bound as i64;
    VertexFunction::new(tree.vertices().map(|v| {
        let value = if rng.gen_bool(0.15) { Rational::from_integer(0.into()) } else { rational_in(rng, -5 * d..=5 * d, denom_bound) };
        (v, value)
    }))
}
