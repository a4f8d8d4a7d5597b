//! Perpendicular Radon transform on trees.
//!
//! The combinatorial transform sends a vertex function `h` to the table of
//! its sums over the perpendiculars of all flags. It is inverted in closed
//! form, vertex by vertex, once the total `Σ h` is known:
//!
//! ```text
//! h(x) = 1/(k(x)-1) · Σ_{ef ∋ x} Rh(x, ef) - (k(x)-2)/2 · Σ_y h(y)
//! ```
//!
//! The measure-level transform projects a measure onto geodesics; a finitely
//! supported measure is recovered from those projections by reading its
//! off-vertex atoms directly and inverting the combinatorial transform for
//! the vertex part.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{pushforward_projection, Measure, RadonSample};
use crate::rational::Rational;
use crate::tree::{geodesic_through_flag, perpendicular, EdgeId, Flag, Geodesic, Tree, TreePoint, VertexId};

/// Finitely supported function on vertices. Missing vertices are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexFunction {
    values: BTreeMap<VertexId, Rational>,
    total: Rational,
}

impl VertexFunction {
    pub fn new(values: impl IntoIterator<Item = (VertexId, Rational)>) -> VertexFunction {
        let mut map: BTreeMap<VertexId, Rational> = BTreeMap::new();
        for (v, x) in values {
            *map.entry(v).or_insert_with(Rational::zero) += x;
        }
        map.retain(|_, x| !x.is_zero());
        let total = map.values().sum();
        VertexFunction { values: map, total }
    }

    pub fn get(&self, v: VertexId) -> Rational {
        self.values.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &Rational)> {
        self.values.iter()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlagTable {
    pub values: BTreeMap<Flag, Rational>,
}

impl FlagTable {
    pub fn get(&self, flag: &Flag) -> Option<&Rational> {
        self.values.get(flag)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// All flags, grouped by vertex, pairs in increasing edge order.
pub fn enumerate_flags(tree: &Tree) -> Vec<Flag> {
    let mut out = Vec::new();
    for x in tree.vertices() {
        let inc = tree.incident(x);
        for (i, &e) in inc.iter().enumerate() {
            for &f in &inc[i + 1..] {
                out.push(Flag { x, e, f });
            }
        }
    }
    out
}

/// `branch_sums[x][i]`: sum of `h` over the branch at `x` through its
/// `i`-th incident edge.
fn branch_sums(tree: &Tree, h: &VertexFunction) -> Vec<Vec<Rational>> {
    // subtree sums for a rooting at vertex 0, computed leaves-first
    let n = tree.vertex_count();
    let mut order = Vec::with_capacity(n);
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut stack = vec![VertexId(0)];
    seen[0] = true;
    while let Some(w) = stack.pop() {
        order.push(w);
        for &e in tree.incident(w) {
            let edge = tree.edge(e).unwrap();
            let next = if edge.u == w { edge.v } else { Some(edge.u) };
            if let Some(next) = next {
                if !seen[next.0] {
                    seen[next.0] = true;
                    parent_edge[next.0] = Some(e);
                    stack.push(next);
                }
            }
        }
    }
    let mut below: Vec<Rational> = (0..n).map(|i| h.get(VertexId(i))).collect();
    for &w in order.iter().rev() {
        if let Some(e) = parent_edge[w.0] {
            let edge = tree.edge(e).unwrap();
            let p = if edge.u == w { edge.v.unwrap() } else { edge.u };
            let add = below[w.0].clone();
            below[p.0] += add;
        }
    }
    tree.vertices()
        .map(|x| {
            tree.incident(x)
                .iter()
                .map(|&e| {
                    let edge = tree.edge(e).unwrap();
                    match edge.v {
                        None => Rational::zero(),
                        Some(_) if parent_edge[x.0] == Some(e) => h.total() - &below[x.0],
                        Some(v) => {
                            let child = if edge.u == x { v } else { edge.u };
                            below[child.0].clone()
                        }
                    }
                })
                .collect()
        })
        .collect()
}

/// `Rh(x, ef) = Σ_{y ∈ perp^x(ef)} h(y)`, computed as the total minus the
/// sums over the two branches through `e` and `f`.
pub fn radon_forward(tree: &Tree, h: &VertexFunction) -> FlagTable {
    let sums = branch_sums(tree, h);
    let mut values = BTreeMap::new();
    for x in tree.vertices() {
        let inc = tree.incident(x);
        for i in 0..inc.len() {
            for j in i + 1..inc.len() {
                let value = h.total() - &sums[x.0][i] - &sums[x.0][j];
                values.insert(Flag { x, e: inc[i], f: inc[j] }, value);
            }
        }
    }
    FlagTable { values }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCount {
    /// `Σ_{ef ∋ x} Rh(x, ef)`, from the transform.
    pub lhs: Rational,
    /// `C(k-1, 2) Σh + (k-1) h(x)`, in closed form.
    pub rhs: Rational,
}

impl DoubleCount {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn choose2(k: usize) -> Rational {
    Rational::from_integer((k * k.saturating_sub(1) / 2).into())
}

/// Evaluates both sides of the flag-sum identity at vertex `x`.
pub fn double_count_check(tree: &Tree, h: &VertexFunction, x: VertexId) -> Result<DoubleCount> {
    let k = tree.valency(x);
    if k < 2 {
        return Err(Error::ValencyTooSmall { vertex: tree.label(x).to_string(), valency: k, needed: 2 });
    }
    Ok(double_count_from(tree, &radon_forward(tree, h), h, x))
}

fn double_count_from(tree: &Tree, table: &FlagTable, h: &VertexFunction, x: VertexId) -> DoubleCount {
    let k = tree.valency(x);
    let lhs = table.values.iter().filter(|(f, _)| f.x == x).map(|(_, v)| v).sum();
    let rhs = choose2(k - 1) * h.total() + Rational::from_integer((k - 1).into()) * h.get(x);
    DoubleCount { lhs, rhs }
}

/// The double-counting identity at every vertex of valency at least 2,
/// sharing one forward transform.
pub fn double_count_all(tree: &Tree, h: &VertexFunction) -> Vec<(VertexId, DoubleCount)> {
    let table = radon_forward(tree, h);
    tree.vertices()
        .filter(|&x| tree.valency(x) >= 2)
        .map(|x| (x, double_count_from(tree, &table, h, x)))
        .collect()
}

/// Recovers `h` from its transform and its total.
pub fn radon_invert(tree: &Tree, table: &FlagTable, total: &Rational) -> Result<VertexFunction> {
    for x in tree.vertices() {
        let k = tree.valency(x);
        if k < 3 {
            return Err(Error::ValencyTooSmall { vertex: tree.label(x).to_string(), valency: k, needed: 3 });
        }
    }
    let flags = enumerate_flags(tree);
    for flag in table.values.keys() {
        if flags.binary_search(flag).is_err() {
            return Err(Error::UnknownFlag(flag_name(tree, flag)));
        }
    }
    let mut sums: BTreeMap<VertexId, Rational> = BTreeMap::new();
    for flag in &flags {
        let value = table.get(flag).ok_or_else(|| Error::IncompleteTable(flag_name(tree, flag)))?;
        *sums.entry(flag.x).or_insert_with(Rational::zero) += value;
    }
    let values = sums.into_iter().map(|(x, sum)| {
        let k = tree.valency(x) as i64;
        let hx = sum / Rational::from_integer((k - 1).into())
            - Rational::new((k - 2).into(), 2.into()) * total;
        (x, hx)
    });
    Ok(VertexFunction::new(values))
}

pub fn flag_name(tree: &Tree, flag: &Flag) -> String {
    format!("{}, {}, {}", tree.label(flag.x), flag.e, flag.f)
}

/// The measure-level transform on one geodesic: the projection of `μ`.
pub fn radon_measure(tree: &Tree, mu: &Measure, gamma: &Geodesic) -> RadonSample {
    pushforward_projection(tree, gamma, mu)
}

/// `μ(perp^x(ef))`, read off as the mass the projection onto the flag's
/// geodesic puts on the flag vertex.
pub fn flag_mass(tree: &Tree, mu: &Measure, flag: &Flag) -> Result<Rational> {
    let gamma = geodesic_through_flag(tree, flag)?;
    let sample = radon_measure(tree, mu, &gamma);
    Ok(sample.mass_at(&Rational::zero()))
}

/// One geodesic query made while reading off-vertex atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorRead {
    pub edge: EdgeId,
    pub flag: Flag,
    pub atoms: Vec<(TreePoint, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagSubtraction {
    pub flag: Flag,
    pub flag_mass: Rational,
    pub interior_mass: Rational,
    pub vertex_value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstruction {
    pub measure: Measure,
    pub interior_reads: Vec<InteriorRead>,
    pub flag_subtractions: Vec<FlagSubtraction>,
    pub vertex_total: Rational,
}

/// Flags whose geodesic runs through `e`.
fn flags_through_edge(tree: &Tree, e: EdgeId) -> Vec<Flag> {
    let edge = tree.edge(e).unwrap();
    let mut out = Vec::new();
    for end in std::iter::once(edge.u).chain(edge.v) {
        for &g in tree.incident(end) {
            if g != e {
                out.push(Flag { x: end, e: e.min(g), f: e.max(g) });
            }
        }
    }
    out
}

/// Recovers a finitely supported measure from its projections.
///
/// `oracle` returns the projection of the hidden measure on a geodesic;
/// `skeleton` lists the edges that may carry off-vertex atoms.
pub fn reconstruct_measure<F>(tree: &Tree, oracle: F, skeleton: &BTreeSet<EdgeId>) -> Result<Reconstruction>
where
    F: Fn(&Geodesic) -> RadonSample,
{
    tree.require_complete()?;
    for x in tree.vertices() {
        if tree.valency(x) < 3 {
            return Err(Error::ValencyTooSmall {
                vertex: tree.label(x).to_string(),
                valency: tree.valency(x),
                needed: 3,
            });
        }
    }
    let inconsistent = |msg: String| Error::InconsistentOracle(msg);
    let mut queried: Vec<RadonSample> = Vec::new();

    // off-vertex atoms, read verbatim from geodesics through each skeleton edge
    let mut interior: BTreeMap<TreePoint, Rational> = BTreeMap::new();
    let mut interior_reads = Vec::new();
    for &e in skeleton {
        tree.edge(e)?;
        let flags = flags_through_edge(tree, e);
        let mut first: Option<Vec<(TreePoint, Rational)>> = None;
        // two geodesics through the edge must agree on it
        for flag in flags.iter().take(2) {
            let gamma = geodesic_through_flag(tree, flag)?;
            let sample = oracle(&gamma);
            let mut on_edge = Vec::new();
            for (c, m) in &sample.atoms {
                let p = gamma
                    .point_at(tree, c)
                    .ok_or_else(|| inconsistent(format!("coordinate {c} off the geodesic")))?;
                if let TreePoint::Interior { edge, .. } = &p {
                    if !skeleton.contains(edge) {
                        return Err(inconsistent(format!("atom inside edge {edge} outside the skeleton")));
                    }
                    if *edge == e {
                        on_edge.push((p, m.clone()));
                    }
                }
            }
            on_edge.sort();
            match &first {
                None => {
                    interior_reads.push(InteriorRead { edge: e, flag: *flag, atoms: on_edge.clone() });
                    first = Some(on_edge);
                }
                Some(prev) if *prev != on_edge => {
                    return Err(inconsistent(format!("geodesics through edge {e} disagree")));
                }
                Some(_) => {}
            }
            queried.push(sample);
        }
        for (p, m) in first.unwrap_or_default() {
            interior.insert(p, m);
        }
    }
    let interior_mass: Rational = interior.values().sum();

    // vertex part through the combinatorial inversion
    let mut table = FlagTable::default();
    let mut flag_subtractions = Vec::new();
    for flag in enumerate_flags(tree) {
        let gamma = geodesic_through_flag(tree, &flag)?;
        let sample = oracle(&gamma);
        let at_flag = sample.mass_at(&Rational::zero());
        let perp = perpendicular(tree, &flag)?;
        let inside: Rational =
            interior.iter().filter(|(p, _)| perp.contains(p)).map(|(_, m)| m).sum();
        let value = &at_flag - &inside;
        flag_subtractions.push(FlagSubtraction {
            flag,
            flag_mass: at_flag,
            interior_mass: inside,
            vertex_value: value.clone(),
        });
        table.values.insert(flag, value);
        queried.push(sample);
    }
    let vertex_total = Rational::from_integer(1.into()) - &interior_mass;
    let h = radon_invert(tree, &table, &vertex_total)?;
    if h.iter().any(|(_, x)| x.is_negative()) {
        return Err(inconsistent("negative mass on a vertex".into()));
    }

    let atoms = h
        .iter()
        .map(|(v, m)| (TreePoint::Vertex(*v), m.clone()))
        .chain(interior);
    let measure = Measure::new(atoms).map_err(|e| inconsistent(e.to_string()))?;
    for sample in &queried {
        if radon_measure(tree, &measure, &sample.geodesic) != *sample {
            return Err(inconsistent("reconstruction does not reproduce the oracle data".into()));
        }
    }
    Ok(Reconstruction { measure, interior_reads, flag_subtractions, vertex_total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::tree::fixtures::*;
    use crate::tree::{Length, TreeSpec};

    fn star_h(s: &Tree) -> VertexFunction {
        VertexFunction::new(
            [("c", 1), ("a", 2), ("b", 3), ("d", 4)].map(|(l, x)| (s.vertex(l).unwrap(), int(x))),
        )
    }

    fn brute_force(tree: &Tree, h: &VertexFunction, flag: &Flag) -> Rational {
        perpendicular(tree, flag).unwrap().vertices.iter().map(|&v| h.get(v)).sum()
    }

    #[test]
    fn star3_has_twelve_flags() {
        let s = star3();
        assert_eq!(enumerate_flags(&s).len(), 12);
        assert_eq!(enumerate_flags(&s).iter().filter(|f| f.x == s.vertex("c").unwrap()).count(), 3);
        assert_eq!(enumerate_flags(&tripod()).len(), 3);
    }

    #[test]
    fn forward_transform_on_star3() {
        let s = star3();
        let h = star_h(&s);
        let table = radon_forward(&s, &h);
        let (c, a) = (s.vertex("c").unwrap(), s.vertex("a").unwrap());
        assert_eq!(table.get(&Flag::new(&s, c, EdgeId(0), EdgeId(1)).unwrap()), Some(&int(5)));
        assert_eq!(table.get(&Flag::new(&s, a, EdgeId(3), EdgeId(4)).unwrap()), Some(&int(10)));
        for (flag, value) in &table.values {
            assert_eq!(value, &brute_force(&s, &h, flag));
        }
        let zero = radon_forward(&s, &VertexFunction::default());
        assert!(zero.values.values().all(Zero::is_zero));
    }

    #[test]
    fn double_counting_at_center() {
        let s = star3();
        let h = star_h(&s);
        let c = s.vertex("c").unwrap();
        let dc = double_count_check(&s, &h, c).unwrap();
        // flags at c: 5 + 4 + 3; closed form C(2,2)·10 + 2·1
        assert_eq!(dc.lhs, int(12));
        assert_eq!(dc.rhs, int(12));
        let zero = double_count_check(&s, &VertexFunction::default(), c).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (int(0), int(0)));
        let indicator = VertexFunction::new([(c, int(1))]);
        assert!(double_count_check(&s, &indicator, c).unwrap().holds());
        let t = tripod();
        assert!(double_count_check(&t, &indicator, t.vertex("x").unwrap()).is_err());
    }

    #[test]
    fn inversion_on_star3() {
        let s = star3();
        let h = star_h(&s);
        let table = radon_forward(&s, &h);
        assert_eq!(radon_invert(&s, &table, &int(10)).unwrap(), h);
        let zero = radon_forward(&s, &VertexFunction::default());
        assert_eq!(radon_invert(&s, &zero, &int(0)).unwrap(), VertexFunction::default());
        let c = s.vertex("c").unwrap();
        assert_eq!(radon_invert(&s, &table, &int(10)).unwrap().get(c), int(1));
    }

    #[test]
    fn inversion_rejects_bad_input() {
        let s = star3();
        let mut table = radon_forward(&s, &star_h(&s));
        let first = *table.values.keys().next().unwrap();
        table.values.remove(&first);
        assert!(matches!(radon_invert(&s, &table, &int(10)), Err(Error::IncompleteTable(_))));
        let t = tripod();
        let tt = radon_forward(&t, &VertexFunction::default());
        assert!(matches!(radon_invert(&t, &tt, &int(0)), Err(Error::ValencyTooSmall { .. })));
    }

    #[test]
    fn flag_masses_on_star3() {
        let s = star3();
        let (c, d) = (v(&s, "c"), v(&s, "d"));
        let cv = s.vertex("c").unwrap();
        let mu = Measure::new([(c, ratio(1, 2)), (d, ratio(1, 2))]).unwrap();
        assert_eq!(flag_mass(&s, &mu, &Flag::new(&s, cv, EdgeId(0), EdgeId(1)).unwrap()).unwrap(), int(1));
        assert_eq!(
            flag_mass(&s, &mu, &Flag::new(&s, cv, EdgeId(0), EdgeId(2)).unwrap()).unwrap(),
            ratio(1, 2)
        );
        let beyond_a = Measure::dirac(s.point(EdgeId(3), ratio(5, 2)).unwrap());
        assert_eq!(
            flag_mass(&s, &beyond_a, &Flag::new(&s, cv, EdgeId(1), EdgeId(2)).unwrap()).unwrap(),
            int(1)
        );
    }

    fn all_edges(tree: &Tree) -> BTreeSet<EdgeId> {
        tree.edge_ids().collect()
    }

    #[test]
    fn reconstruction_examples() {
        let s = star3();
        let hidden = Measure::new([
            (v(&s, "c"), ratio(1, 4)),
            (v(&s, "a"), ratio(1, 4)),
            (s.point(EdgeId(1), ratio(1, 3)).unwrap(), ratio(1, 2)),
        ])
        .unwrap();
        let oracle = |g: &Geodesic| radon_measure(&s, &hidden, g);
        let rec = reconstruct_measure(&s, oracle, &all_edges(&s)).unwrap();
        assert_eq!(rec.measure, hidden);
        assert_eq!(rec.vertex_total, ratio(1, 2));

        let dirac = Measure::dirac(v(&s, "c"));
        let rec = reconstruct_measure(&s, |g: &Geodesic| radon_measure(&s, &dirac, g), &BTreeSet::new())
            .unwrap();
        assert_eq!(rec.measure, dirac);

        let uniform = Measure::new(["a", "b", "c", "d"].map(|l| (v(&s, l), ratio(1, 4)))).unwrap();
        let rec = reconstruct_measure(&s, |g: &Geodesic| radon_measure(&s, &uniform, g), &all_edges(&s))
            .unwrap();
        assert_eq!(rec.measure, uniform);
    }

    #[test]
    fn reconstruction_flags_off_skeleton_mass() {
        let s = star3();
        let hidden = Measure::new([
            (v(&s, "c"), ratio(1, 2)),
            (s.point(EdgeId(1), ratio(1, 3)).unwrap(), ratio(1, 2)),
        ])
        .unwrap();
        let skeleton = BTreeSet::from([EdgeId(0)]);
        let err = reconstruct_measure(&s, |g: &Geodesic| radon_measure(&s, &hidden, g), &skeleton);
        assert!(matches!(err, Err(Error::InconsistentOracle(_))));
    }

    #[test]
    fn reconstruction_reads_edges_in_either_direction() {
        // edge 1 is the second flag edge on one geodesic and the first on
        // the other, so the two readings come in opposite orders
        let spec = TreeSpec {
            vertices: vec![lbl("o")],
            edges: (0..4).map(|_| (lbl("o"), None, Length::Infinite)).collect(),
        };
        let t = Tree::build(spec).unwrap();
        let hidden = Measure::new([
            (TreePoint::Vertex(VertexId(0)), ratio(1, 4)),
            (t.point(EdgeId(1), ratio(1, 4)).unwrap(), ratio(1, 4)),
            (t.point(EdgeId(1), ratio(9, 8)).unwrap(), ratio(1, 2)),
        ])
        .unwrap();
        let rec = reconstruct_measure(&t, |g: &Geodesic| radon_measure(&t, &hidden, g), &BTreeSet::from([EdgeId(1)]))
            .unwrap();
        assert_eq!(rec.measure, hidden);
    }
}
