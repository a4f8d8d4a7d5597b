//! Locally finite metric trees.
//!
//! A tree is a list of vertices and a list of edges. An edge has one or two
//! endpoints: two-endpoint edges carry a finite positive length, single
//! endpoint edges are rays of infinite length. Points are either vertices or
//! interior points of an edge, addressed by their offset from the edge's
//! first endpoint `u`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{abs_diff, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// External vertex identifier, as it appears in tree files.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexLabel {
    Num(u64),
    Str(String),
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexLabel::Num(n) => write!(f, "{n}"),
            VertexLabel::Str(s) => f.write_str(s),
        }
    }
}

impl From<&str> for VertexLabel {
    fn from(s: &str) -> Self {
        VertexLabel::Str(s.to_owned())
    }
}

impl From<u64> for VertexLabel {
    fn from(n: u64) -> Self {
        VertexLabel::Num(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Length {
    Finite(Rational),
    Infinite,
}

impl Length {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Length::Finite(l) => Some(l),
            Length::Infinite => None,
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(l) => write!(f, "{l}"),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    /// `None` for a ray.
    pub v: Option<VertexId>,
    pub len: Length,
}

impl Edge {
    pub fn is_ray(&self) -> bool {
        self.v.is_none()
    }

    /// Offset of endpoint `w` along this edge.
    fn offset_of(&self, w: VertexId) -> Rational {
        if w == self.u {
            Rational::zero()
        } else {
            self.len.finite().expect("second endpoint of a finite edge").clone()
        }
    }

    fn other(&self, w: VertexId) -> Option<VertexId> {
        if w == self.u {
            self.v
        } else {
            Some(self.u)
        }
    }
}

/// Unvalidated tree description: labels, and edges given by endpoint labels.
#[derive(Clone, Debug)]
pub struct TreeSpec {
    pub vertices: Vec<VertexLabel>,
    pub edges: Vec<(VertexLabel, Option<VertexLabel>, Length)>,
}

/// A point of a tree in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreePoint {
    Vertex(VertexId),
    /// Strictly inside `edge`, `offset` away from its first endpoint.
    Interior { edge: EdgeId, offset: Rational },
}

/// Locally finite simplicial metric tree. Immutable once built.
#[derive(Clone, Debug)]
pub struct Tree {
    labels: Vec<VertexLabel>,
    label_index: HashMap<VertexLabel, VertexId>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<EdgeId>>,
    // rooted at vertex 0
    parent: Vec<Option<(VertexId, EdgeId)>>,
    depth: Vec<usize>,
    root_dist: Vec<Rational>,
}

/// Summary returned alongside a validated tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSummary {
    /// valency -> number of vertices with that valency
    pub valency_profile: BTreeMap<usize, usize>,
    pub geodesically_complete: bool,
}

impl Tree {
    /// Validates a description and builds the tree.
    pub fn build(spec: TreeSpec) -> Result<Tree> {
        if spec.vertices.is_empty() {
            return Err(Error::EmptyTree);
        }
        let mut label_index = HashMap::new();
        for (i, label) in spec.vertices.iter().enumerate() {
            if label_index.insert(label.clone(), VertexId(i)).is_some() {
                return Err(Error::DuplicateVertex(label.to_string()));
            }
        }
        let n = spec.vertices.len();
        let lookup = |edge: usize, label: &VertexLabel| {
            label_index
                .get(label)
                .copied()
                .ok_or_else(|| Error::UnknownVertex { edge, vertex: label.to_string() })
        };

        let mut uf = UnionFind::new(n);
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for (i, (u, v, len)) in spec.edges.iter().enumerate() {
            let u = lookup(i, u)?;
            let v = v.as_ref().map(|v| lookup(i, v)).transpose()?;
            match (&v, len) {
                (None, Length::Finite(_)) => return Err(Error::FiniteRay(i)),
                (Some(_), Length::Infinite) => return Err(Error::InfiniteEdge(i)),
                (Some(_), Length::Finite(l)) if !l.is_positive() => {
                    return Err(Error::NonPositiveLength(i))
                }
                _ => {}
            }
            if let Some(v) = v {
                if !uf.union(u.0, v.0) {
                    return Err(Error::Cycle(i));
                }
                adjacency[v.0].push(EdgeId(i));
            }
            adjacency[u.0].push(EdgeId(i));
            edges.push(Edge { u, v, len: len.clone() });
        }
        if (1..n).any(|i| uf.find(i) != uf.find(0)) {
            return Err(Error::Disconnected);
        }
        for (i, adj) in adjacency.iter().enumerate() {
            match adj.len() {
                0 => return Err(Error::IsolatedVertex(spec.vertices[i].to_string())),
                2 => return Err(Error::ValencyTwo(spec.vertices[i].to_string())),
                _ => {}
            }
        }

        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut root_dist = vec![Rational::zero(); n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([VertexId(0)]);
        seen[0] = true;
        while let Some(w) = queue.pop_front() {
            for &e in &adjacency[w.0] {
                let edge = &edges[e.0];
                if let Some(next) = edge.other(w) {
                    if !seen[next.0] {
                        seen[next.0] = true;
                        parent[next.0] = Some((w, e));
                        depth[next.0] = depth[w.0] + 1;
                        root_dist[next.0] = &root_dist[w.0] + edge.len.finite().unwrap();
                        queue.push_back(next);
                    }
                }
            }
        }

        Ok(Tree {
            labels: spec.vertices,
            label_index,
            edges,
            adjacency,
            parent,
            depth,
            root_dist,
        })
    }

    pub fn summary(&self) -> TreeSummary {
        let mut valency_profile = BTreeMap::new();
        for adj in &self.adjacency {
            *valency_profile.entry(adj.len()).or_insert(0) += 1;
        }
        TreeSummary { valency_profile, geodesically_complete: self.is_geodesically_complete() }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.labels.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge> {
        self.edges.get(e.0).ok_or(Error::UnknownEdge(e.0))
    }

    pub fn label(&self, v: VertexId) -> &VertexLabel {
        &self.labels[v.0]
    }

    pub fn labels(&self) -> &[VertexLabel] {
        &self.labels
    }

    pub fn vertex(&self, label: impl Into<VertexLabel>) -> Option<VertexId> {
        self.label_index.get(&label.into()).copied()
    }

    /// Incident edges of `v`, in increasing id order.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.adjacency[v.0]
    }

    pub fn valency(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn leaves(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.valency(v) == 1).collect()
    }

    /// A tree is geodesically complete iff it has no leaf.
    pub fn is_geodesically_complete(&self) -> bool {
        self.adjacency.iter().all(|adj| adj.len() != 1)
    }

    pub fn require_complete(&self) -> Result<()> {
        match self.leaves().first() {
            Some(&leaf) => Err(Error::NotGeodesicallyComplete(self.label(leaf).to_string())),
            None => Ok(()),
        }
    }

    /// Canonical point at `offset` along edge `e`.
    pub fn point(&self, e: EdgeId, offset: Rational) -> Result<TreePoint> {
        let edge = self.edge(e)?;
        let out_of_range = || Error::OffsetOutOfRange { edge: e.0, offset: offset.to_string() };
        if offset.is_negative() {
            return Err(out_of_range());
        }
        if offset.is_zero() {
            return Ok(TreePoint::Vertex(edge.u));
        }
        if let Length::Finite(len) = &edge.len {
            if &offset > len {
                return Err(out_of_range());
            }
            if &offset == len {
                return Ok(TreePoint::Vertex(edge.v.unwrap()));
            }
        }
        Ok(TreePoint::Interior { edge: e, offset })
    }

    pub fn check_point(&self, p: &TreePoint) -> Result<()> {
        match p {
            TreePoint::Vertex(v) if v.0 < self.labels.len() => Ok(()),
            TreePoint::Vertex(v) => Err(Error::InvalidGeodesic(format!("unknown vertex {}", v.0))),
            TreePoint::Interior { edge, offset } => match self.point(*edge, offset.clone())? {
                TreePoint::Interior { .. } => Ok(()),
                TreePoint::Vertex(_) => Err(Error::OffsetOutOfRange {
                    edge: edge.0,
                    offset: offset.to_string(),
                }),
            },
        }
    }

    /// `(edge, offset)` encoding of a point; vertices use their smallest
    /// incident edge.
    pub fn edge_offset(&self, p: &TreePoint) -> (EdgeId, Rational) {
        match p {
            TreePoint::Vertex(v) => {
                let e = self.adjacency[v.0][0];
                (e, self.edges[e.0].offset_of(*v))
            }
            TreePoint::Interior { edge, offset } => (*edge, offset.clone()),
        }
    }

    fn lca(&self, mut a: VertexId, mut b: VertexId) -> VertexId {
        while self.depth[a.0] > self.depth[b.0] {
            a = self.parent[a.0].unwrap().0;
        }
        while self.depth[b.0] > self.depth[a.0] {
            b = self.parent[b.0].unwrap().0;
        }
        while a != b {
            a = self.parent[a.0].unwrap().0;
            b = self.parent[b.0].unwrap().0;
        }
        a
    }

    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> Rational {
        let c = self.lca(a, b);
        &self.root_dist[a.0] + &self.root_dist[b.0] - &self.root_dist[c.0] - &self.root_dist[c.0]
    }

    /// Steps `(edge, from, to)` of the vertex path from `a` to `b`.
    fn vertex_steps(&self, a: VertexId, b: VertexId) -> Vec<(EdgeId, VertexId, VertexId)> {
        let c = self.lca(a, b);
        let mut up = Vec::new();
        let mut w = a;
        while w != c {
            let (p, e) = self.parent[w.0].unwrap();
            up.push((e, w, p));
            w = p;
        }
        let mut down = Vec::new();
        let mut w = b;
        while w != c {
            let (p, e) = self.parent[w.0].unwrap();
            down.push((e, p, w));
            w = p;
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Endpoints through which a point can be left, with the leg to each.
    fn anchors(&self, p: &TreePoint) -> Vec<(VertexId, Option<Leg>)> {
        match p {
            TreePoint::Vertex(v) => vec![(*v, None)],
            TreePoint::Interior { edge, offset } => {
                let ed = &self.edges[edge.0];
                let mut out = vec![(
                    ed.u,
                    Some(Leg { edge: *edge, from: offset.clone(), to: Rational::zero() }),
                )];
                if let (Some(v), Length::Finite(len)) = (ed.v, &ed.len) {
                    out.push((v, Some(Leg { edge: *edge, from: offset.clone(), to: len.clone() })));
                }
                out
            }
        }
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> Rational {
        if let (
            TreePoint::Interior { edge: e1, offset: o1 },
            TreePoint::Interior { edge: e2, offset: o2 },
        ) = (p, q)
        {
            if e1 == e2 {
                return abs_diff(o1, o2);
            }
        }
        let mut best: Option<Rational> = None;
        for (a, la) in self.anchors(p) {
            for (b, lb) in self.anchors(q) {
                let d = self.vertex_distance(a, b)
                    + la.as_ref().map_or_else(Rational::zero, Leg::length)
                    + lb.as_ref().map_or_else(Rational::zero, Leg::length);
                if best.as_ref().is_none_or(|cur| &d < cur) {
                    best = Some(d);
                }
            }
        }
        best.unwrap()
    }

    /// The unique injective path from `p` to `q`.
    pub fn path(&self, p: &TreePoint, q: &TreePoint) -> Path {
        if p == q {
            return Path { start: p.clone(), end: q.clone(), legs: Vec::new(), length: Rational::zero() };
        }
        if let (
            TreePoint::Interior { edge: e1, offset: o1 },
            TreePoint::Interior { edge: e2, offset: o2 },
        ) = (p, q)
        {
            if e1 == e2 {
                let leg = Leg { edge: *e1, from: o1.clone(), to: o2.clone() };
                let length = leg.length();
                return Path { start: p.clone(), end: q.clone(), legs: vec![leg], length };
            }
        }
        // (length, anchor of p, leg from p, anchor of q, leg from q)
        type Candidate = (Rational, VertexId, Option<Leg>, VertexId, Option<Leg>);
        let mut best: Option<Candidate> = None;
        for (a, la) in self.anchors(p) {
            for (b, lb) in self.anchors(q) {
                let d = self.vertex_distance(a, b)
                    + la.as_ref().map_or_else(Rational::zero, Leg::length)
                    + lb.as_ref().map_or_else(Rational::zero, Leg::length);
                if best.as_ref().is_none_or(|cur| d < cur.0) {
                    best = Some((d, a, la.clone(), b, lb.clone()));
                }
            }
        }
        let (length, a, la, b, lb) = best.unwrap();
        let mut legs: Vec<Leg> = la.into_iter().collect();
        for (e, from, to) in self.vertex_steps(a, b) {
            let edge = &self.edges[e.0];
            legs.push(Leg { edge: e, from: edge.offset_of(from), to: edge.offset_of(to) });
        }
        if let Some(lb) = lb {
            legs.push(Leg { edge: lb.edge, from: lb.to, to: lb.from });
        }
        Path { start: p.clone(), end: q.clone(), legs, length }
    }

    pub fn midpoint(&self, p: &TreePoint, q: &TreePoint) -> TreePoint {
        let path = self.path(p, q);
        let half = &path.length / Rational::from_integer(2.into());
        path.point_at(self, &half)
    }

    /// Walks `dist` from `offset` on `edge` in the given direction, turning
    /// at vertices according to `rule`.
    pub fn walk(
        &self,
        mut edge: EdgeId,
        mut offset: Rational,
        mut forward: bool,
        mut dist: Rational,
        rule: BranchRule,
    ) -> Result<TreePoint> {
        loop {
            let ed = &self.edges[edge.0];
            let room = if forward {
                ed.len.finite().map(|l| l - &offset)
            } else {
                Some(offset.clone())
            };
            match room {
                Some(room) if dist > room => {
                    dist -= room;
                    let w = if forward { ed.v.unwrap() } else { ed.u };
                    let candidates: Vec<EdgeId> =
                        self.incident(w).iter().copied().filter(|&c| c != edge).collect();
                    if candidates.is_empty() {
                        return Err(Error::LeafReached(self.label(w).to_string()));
                    }
                    edge = rule.choose(w, edge, &candidates);
                    let next = &self.edges[edge.0];
                    forward = next.u == w;
                    offset = next.offset_of(w);
                }
                _ => {
                    let target = if forward { offset + dist } else { offset - dist };
                    return self.point(edge, target);
                }
            }
        }
    }

    /// Vertices of the component of `T \ {x}` entered through edge `e`
    /// (incident to `x`), with the edges of that component including `e`.
    pub fn branch(&self, x: VertexId, e: EdgeId) -> (BTreeSet<VertexId>, BTreeSet<EdgeId>) {
        let mut vertices = BTreeSet::new();
        let mut edges = BTreeSet::from([e]);
        let mut stack: Vec<(VertexId, EdgeId)> =
            self.edges[e.0].other(x).map(|w| (w, e)).into_iter().collect();
        while let Some((w, via)) = stack.pop() {
            vertices.insert(w);
            for &f in self.incident(w) {
                if f == via {
                    continue;
                }
                edges.insert(f);
                if let Some(next) = self.edges[f.0].other(w) {
                    stack.push((next, f));
                }
            }
        }
        (vertices, edges)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Rule used to continue a geodesic through a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BranchRule {
    #[default]
    SmallestEdge,
    LargestEdge,
    /// Pseudo-random but deterministic choice keyed by the seed.
    Seeded(u64),
}

impl BranchRule {
    pub fn choose(self, at: VertexId, incoming: EdgeId, candidates: &[EdgeId]) -> EdgeId {
        match self {
            BranchRule::SmallestEdge => *candidates.iter().min().unwrap(),
            BranchRule::LargestEdge => *candidates.iter().max().unwrap(),
            BranchRule::Seeded(seed) => {
                let mut z = seed
                    ^ (at.0 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    ^ (incoming.0 as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                z ^= z >> 31;
                candidates[(z % candidates.len() as u64) as usize]
            }
        }
    }
}

/// Part of a path inside one edge, in that edge's offset coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leg {
    pub edge: EdgeId,
    pub from: Rational,
    pub to: Rational,
}

impl Leg {
    pub fn length(&self) -> Rational {
        abs_diff(&self.from, &self.to)
    }
}

/// Injective path between two points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub start: TreePoint,
    pub end: TreePoint,
    pub legs: Vec<Leg>,
    pub length: Rational,
}

impl Path {
    /// The point at arc length `s` from the start, clamped to the path.
    pub fn point_at(&self, tree: &Tree, s: &Rational) -> TreePoint {
        if !s.is_positive() {
            return self.start.clone();
        }
        let mut rest = s.clone();
        for leg in &self.legs {
            let len = leg.length();
            if rest <= len {
                let offset = if leg.to >= leg.from { &leg.from + &rest } else { &leg.from - &rest };
                return tree.point(leg.edge, offset).expect("offset inside leg");
            }
            rest -= len;
        }
        self.end.clone()
    }

    /// Vertices crossed by the path, in order, including endpoints that are
    /// vertices.
    pub fn vertices(&self, tree: &Tree) -> Vec<VertexId> {
        let mut out = Vec::new();
        if let TreePoint::Vertex(v) = self.start {
            out.push(v);
        }
        for leg in &self.legs {
            if let TreePoint::Vertex(v) = tree.point(leg.edge, leg.to.clone()).unwrap() {
                if out.last() != Some(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Continues the path past its end by `extra`, turning at vertices by
    /// `rule`. A path of length zero cannot be continued and stays put.
    pub fn extend(&self, tree: &Tree, extra: &Rational, rule: BranchRule) -> Result<TreePoint> {
        match self.legs.last() {
            None => Ok(self.end.clone()),
            Some(_) if extra.is_zero() => Ok(self.end.clone()),
            Some(leg) => tree.walk(leg.edge, leg.to.clone(), leg.to > leg.from, extra.clone(), rule),
        }
    }
}

/// A geodesic of the tree: a vertex path, optionally prolonged by a ray at
/// either end. Arc-length coordinates increase from the first to the last
/// listed vertex; `coords[i]` is the coordinate of `vertices[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geodesic {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    start_ray: Option<EdgeId>,
    end_ray: Option<EdgeId>,
    coords: Vec<Rational>,
    vertex_pos: HashMap<VertexId, usize>,
}

impl Geodesic {
    /// Builds a geodesic through `vertices` (consecutive ones adjacent),
    /// with `origin` the index of the vertex at coordinate 0.
    pub fn new(
        tree: &Tree,
        vertices: Vec<VertexId>,
        start_ray: Option<EdgeId>,
        end_ray: Option<EdgeId>,
        origin: usize,
    ) -> Result<Geodesic> {
        let invalid = |msg: &str| Error::InvalidGeodesic(msg.to_owned());
        if vertices.is_empty() || origin >= vertices.len() {
            return Err(invalid("no vertices"));
        }
        let mut vertex_pos = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if v.0 >= tree.vertex_count() {
                return Err(invalid("unknown vertex"));
            }
            if vertex_pos.insert(*v, i).is_some() {
                return Err(invalid("repeated vertex"));
            }
        }
        let mut edges = Vec::new();
        let mut coords = vec![Rational::zero()];
        for pair in vertices.windows(2) {
            let e = tree
                .incident(pair[0])
                .iter()
                .copied()
                .find(|&e| tree.edges[e.0].other(pair[0]) == Some(pair[1]))
                .ok_or_else(|| invalid("consecutive vertices are not adjacent"))?;
            coords.push(coords.last().unwrap() + tree.edges[e.0].len.finite().unwrap());
            edges.push(e);
        }
        for (ray, at) in [(start_ray, vertices[0]), (end_ray, *vertices.last().unwrap())] {
            if let Some(r) = ray {
                let edge = tree.edge(r)?;
                if !edge.is_ray() || edge.u != at {
                    return Err(invalid("end ray is not a ray at the end vertex"));
                }
            }
        }
        if start_ray.is_some() && start_ray == end_ray {
            return Err(invalid("the same ray used at both ends"));
        }
        let shift = coords[origin].clone();
        for c in &mut coords {
            *c -= &shift;
        }
        Ok(Geodesic { vertices, edges, start_ray, end_ray, coords, vertex_pos })
    }

    /// The vertex geodesic segment between two vertices.
    pub fn between(tree: &Tree, a: VertexId, b: VertexId) -> Geodesic {
        let mut vertices = vec![a];
        vertices.extend(tree.vertex_steps(a, b).into_iter().map(|(_, _, to)| to));
        Geodesic::new(tree, vertices, None, None, 0).expect("tree path is a geodesic")
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn inner_edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn start_ray(&self) -> Option<EdgeId> {
        self.start_ray
    }

    pub fn end_ray(&self) -> Option<EdgeId> {
        self.end_ray
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Both ends are rays.
    pub fn is_complete(&self) -> bool {
        self.start_ray.is_some() && self.end_ray.is_some()
    }

    /// Each end is a ray or a leaf, so the geodesic cannot be prolonged.
    pub fn is_maximal(&self, tree: &Tree) -> bool {
        let first = self.vertices[0];
        let last = *self.vertices.last().unwrap();
        let end_ok = |ray: Option<EdgeId>, v: VertexId| ray.is_some() || tree.valency(v) == 1;
        end_ok(self.start_ray, first) && end_ok(self.end_ray, last)
    }

    pub fn coordinate_of_vertex(&self, v: VertexId) -> Option<&Rational> {
        self.vertex_pos.get(&v).map(|&i| &self.coords[i])
    }

    /// Arc-length coordinate of `p`, if `p` lies on the geodesic.
    pub fn coordinate(&self, tree: &Tree, p: &TreePoint) -> Option<Rational> {
        match p {
            TreePoint::Vertex(v) => self.coordinate_of_vertex(*v).cloned(),
            TreePoint::Interior { edge, offset } => {
                if Some(*edge) == self.start_ray {
                    return Some(&self.coords[0] - offset);
                }
                if Some(*edge) == self.end_ray {
                    return Some(self.coords.last().unwrap() + offset);
                }
                let i = self.edges.iter().position(|e| e == edge)?;
                let ed = &tree.edges[edge.0];
                if ed.u == self.vertices[i] {
                    Some(&self.coords[i] + offset)
                } else {
                    Some(&self.coords[i] + ed.len.finite().unwrap() - offset)
                }
            }
        }
    }

    pub fn contains(&self, tree: &Tree, p: &TreePoint) -> bool {
        self.coordinate(tree, p).is_some()
    }

    /// The point at arc-length coordinate `s`, if inside the parameter range.
    pub fn point_at(&self, tree: &Tree, s: &Rational) -> Option<TreePoint> {
        let first = &self.coords[0];
        let last = self.coords.last().unwrap();
        if s < first {
            let ray = self.start_ray?;
            return tree.point(ray, first - s).ok();
        }
        if s > last {
            let ray = self.end_ray?;
            return tree.point(ray, s - last).ok();
        }
        let i = self.coords.partition_point(|c| c <= s) - 1;
        if &self.coords[i] == s {
            return Some(TreePoint::Vertex(self.vertices[i]));
        }
        let e = self.edges[i];
        let ed = &tree.edges[e.0];
        let along = s - &self.coords[i];
        let offset = if ed.u == self.vertices[i] { along } else { ed.len.finite().unwrap() - along };
        tree.point(e, offset).ok()
    }

    /// Closest point of the geodesic to `p`.
    pub fn project(&self, tree: &Tree, p: &TreePoint) -> TreePoint {
        if self.contains(tree, p) {
            return p.clone();
        }
        // off the geodesic the nearest point is the first geodesic vertex met
        // on the way to any geodesic vertex
        let path = tree.path(p, &TreePoint::Vertex(self.vertices[0]));
        let hit = path
            .vertices(tree)
            .into_iter()
            .find(|v| self.vertex_pos.contains_key(v))
            .unwrap_or(self.vertices[0]);
        TreePoint::Vertex(hit)
    }

    /// Coordinate of the projection of `p`.
    pub fn project_coordinate(&self, tree: &Tree, p: &TreePoint) -> Rational {
        self.coordinate(tree, &self.project(tree, p)).expect("projection lies on geodesic")
    }
}

/// A vertex with an unordered pair of distinct incident edges, stored with
/// `e < f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flag {
    pub x: VertexId,
    pub e: EdgeId,
    pub f: EdgeId,
}

impl Flag {
    pub fn new(tree: &Tree, x: VertexId, e: EdgeId, f: EdgeId) -> Result<Flag> {
        if x.0 >= tree.vertex_count() {
            return Err(Error::InvalidFlag(format!("unknown vertex {}", x.0)));
        }
        if e == f {
            return Err(Error::InvalidFlag("edges must be distinct".into()));
        }
        for g in [e, f] {
            if !tree.incident(x).contains(&g) {
                return Err(Error::InvalidFlag(format!(
                    "edge {g} is not incident to {}",
                    tree.label(x)
                )));
            }
        }
        Ok(Flag { x, e: e.min(f), f: e.max(f) })
    }
}

/// The perpendicular of a flag: its vertex and every branch at that vertex
/// other than the two flag edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subtree {
    pub root: VertexId,
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<EdgeId>,
}

impl Subtree {
    pub fn contains(&self, p: &TreePoint) -> bool {
        match p {
            TreePoint::Vertex(v) => self.vertices.contains(v),
            TreePoint::Interior { edge, .. } => self.edges.contains(edge),
        }
    }
}

pub fn perpendicular(tree: &Tree, flag: &Flag) -> Result<Subtree> {
    let flag = Flag::new(tree, flag.x, flag.e, flag.f)?;
    let mut vertices = BTreeSet::from([flag.x]);
    let mut edges = BTreeSet::new();
    for &g in tree.incident(flag.x) {
        if g != flag.e && g != flag.f {
            let (vs, es) = tree.branch(flag.x, g);
            vertices.extend(vs);
            edges.extend(es);
        }
    }
    Ok(Subtree { root: flag.x, vertices, edges })
}

/// Complete geodesic through the flag, continued at every vertex along the
/// smallest-id edge. The flag vertex sits at coordinate 0 and coordinates
/// increase toward the smaller flag edge.
pub fn geodesic_through_flag(tree: &Tree, flag: &Flag) -> Result<Geodesic> {
    tree.require_complete()?;
    let flag = Flag::new(tree, flag.x, flag.e, flag.f)?;
    let run = |first: EdgeId| -> (Vec<VertexId>, EdgeId) {
        let mut verts = Vec::new();
        let mut at = flag.x;
        let mut edge = first;
        while let Some(next) = tree.edges[edge.0].other(at) {
            verts.push(next);
            at = next;
            edge = BranchRule::SmallestEdge.choose(
                at,
                edge,
                &tree.incident(at).iter().copied().filter(|&g| g != edge).collect::<Vec<_>>(),
            );
        }
        (verts, edge)
    };
    let (back, back_ray) = run(flag.f);
    let (fwd, fwd_ray) = run(flag.e);
    let origin = back.len();
    let mut vertices: Vec<VertexId> = back.into_iter().rev().collect();
    vertices.push(flag.x);
    vertices.extend(fwd);
    Geodesic::new(tree, vertices, Some(back_ray), Some(fwd_ray), origin)
}

/// Result of the CAT(0) comparison for a triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cat0Check {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
    pub strict: bool,
}

/// Compares `d²(y, γ_t)` with `(1-t) d²(y,x) + t d²(y,z) - t(1-t) ℓ²` for the
/// geodesic γ from `x` to `z` of length ℓ.
pub fn check_cat0_triangle(
    tree: &Tree,
    x: &TreePoint,
    y: &TreePoint,
    z: &TreePoint,
    t: &Rational,
) -> Result<Cat0Check> {
    if t.is_negative() || t > &Rational::from_integer(1.into()) {
        return Err(Error::ParameterOutOfRange(t.to_string()));
    }
    for p in [x, y, z] {
        tree.check_point(p)?;
    }
    let path = tree.path(x, z);
    let gamma_t = path.point_at(tree, &(t * &path.length));
    let one_minus = Rational::from_integer(1.into()) - t;
    let d_yx = tree.distance(y, x);
    let d_yz = tree.distance(y, z);
    let lhs = {
        let d = tree.distance(y, &gamma_t);
        &d * &d
    };
    let rhs = &one_minus * &d_yx * &d_yx + t * &d_yz * &d_yz
        - t * &one_minus * &path.length * &path.length;
    Ok(Cat0Check { holds: lhs <= rhs, strict: lhs < rhs, lhs, rhs })
}

/// Whether one of the three points lies on the path between the other two.
pub fn aligned(tree: &Tree, x: &TreePoint, y: &TreePoint, z: &TreePoint) -> bool {
    let between = |a: &TreePoint, m: &TreePoint, b: &TreePoint| {
        tree.distance(a, m) + tree.distance(m, b) == tree.distance(a, b)
    };
    between(x, y, z) || between(y, x, z) || between(x, z, y)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn lbl(s: &str) -> VertexLabel {
        VertexLabel::from(s)
    }

    pub fn fin(n: i64, d: i64) -> Length {
        Length::Finite(crate::rational::ratio(n, d))
    }

    /// Center o, tips x, y, z; edges 0 = (o,x), 1 = (o,y), 2 = (o,z), all of
    /// length 1.
    pub fn tripod() -> Tree {
        Tree::build(TreeSpec {
            vertices: vec![lbl("o"), lbl("x"), lbl("y"), lbl("z")],
            edges: vec![
                (lbl("o"), Some(lbl("x")), fin(1, 1)),
                (lbl("o"), Some(lbl("y")), fin(1, 1)),
                (lbl("o"), Some(lbl("z")), fin(1, 1)),
            ],
        })
        .unwrap()
    }

    /// Tripod with two rays at every tip: edges 3,4 at x, 5,6 at y, 7,8 at z.
    pub fn tripod_extended() -> Tree {
        let mut edges = vec![
            (lbl("o"), Some(lbl("x")), fin(1, 1)),
            (lbl("o"), Some(lbl("y")), fin(1, 1)),
            (lbl("o"), Some(lbl("z")), fin(1, 1)),
        ];
        for tip in ["x", "y", "z"] {
            edges.push((lbl(tip), None, Length::Infinite));
            edges.push((lbl(tip), None, Length::Infinite));
        }
        Tree::build(TreeSpec { vertices: vec![lbl("o"), lbl("x"), lbl("y"), lbl("z")], edges })
            .unwrap()
    }

    /// Center c with legs to a, b, d (edges 0, 1, 2, length 1), two rays at
    /// each leg end: 3,4 at a; 5,6 at b; 7,8 at d.
    pub fn star3() -> Tree {
        let mut edges = vec![
            (lbl("c"), Some(lbl("a")), fin(1, 1)),
            (lbl("c"), Some(lbl("b")), fin(1, 1)),
            (lbl("c"), Some(lbl("d")), fin(1, 1)),
        ];
        for tip in ["a", "b", "d"] {
            edges.push((lbl(tip), None, Length::Infinite));
            edges.push((lbl(tip), None, Length::Infinite));
        }
        Tree::build(TreeSpec { vertices: vec![lbl("c"), lbl("a"), lbl("b"), lbl("d")], edges })
            .unwrap()
    }

    pub fn v(tree: &Tree, s: &str) -> TreePoint {
        TreePoint::Vertex(tree.vertex(s).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn tripod_is_valid_but_not_complete() {
        let t = tripod();
        let leaves: Vec<_> = t.leaves().iter().map(|&v| t.label(v).to_string()).collect();
        assert_eq!(leaves, ["x", "y", "z"]);
        assert!(!t.is_geodesically_complete());
        assert_eq!(t.summary().valency_profile, BTreeMap::from([(1, 3), (3, 1)]));
    }

    #[test]
    fn star3_is_complete_with_valency_three() {
        let t = star3();
        assert!(t.is_geodesically_complete());
        assert_eq!(t.summary().valency_profile, BTreeMap::from([(3, 4)]));
    }

    #[test]
    fn single_vertex_with_three_rays_is_complete() {
        let t = Tree::build(TreeSpec {
            vertices: vec![lbl("v")],
            edges: (0..3).map(|_| (lbl("v"), None, Length::Infinite)).collect(),
        })
        .unwrap();
        assert!(t.is_geodesically_complete());
    }

    #[test]
    fn rejects_malformed_descriptions() {
        let path3 = TreeSpec {
            vertices: vec![lbl("a"), lbl("m"), lbl("b")],
            edges: vec![(lbl("a"), Some(lbl("m")), fin(1, 1)), (lbl("m"), Some(lbl("b")), fin(1, 1))],
        };
        assert_eq!(Tree::build(path3).unwrap_err(), Error::ValencyTwo("m".into()));

        let cycle = TreeSpec {
            vertices: vec![lbl("a"), lbl("b")],
            edges: vec![(lbl("a"), Some(lbl("b")), fin(1, 1)), (lbl("b"), Some(lbl("a")), fin(1, 1))],
        };
        assert_eq!(Tree::build(cycle).unwrap_err(), Error::Cycle(1));

        let split = TreeSpec {
            vertices: vec![lbl("a"), lbl("b")],
            edges: vec![(lbl("a"), None, Length::Infinite), (lbl("b"), None, Length::Infinite)],
        };
        assert_eq!(Tree::build(split).unwrap_err(), Error::Disconnected);

        let zero = TreeSpec {
            vertices: vec![lbl("a"), lbl("b")],
            edges: vec![(lbl("a"), Some(lbl("b")), fin(0, 1))],
        };
        assert_eq!(Tree::build(zero).unwrap_err(), Error::NonPositiveLength(0));

        let short_ray = TreeSpec {
            vertices: vec![lbl("a")],
            edges: vec![(lbl("a"), None, fin(1, 1))],
        };
        assert_eq!(Tree::build(short_ray).unwrap_err(), Error::FiniteRay(0));
    }

    #[test]
    fn tripod_distances() {
        let t = tripod();
        assert_eq!(t.distance(&v(&t, "x"), &v(&t, "y")), int(2));
        let p = t.point(EdgeId(0), ratio(3, 10)).unwrap();
        let q = t.point(EdgeId(1), ratio(1, 2)).unwrap();
        assert_eq!(t.distance(&p, &q), ratio(4, 5));
        assert_eq!(t.distance(&p, &p), int(0));
        assert_eq!(t.path(&p, &q).length, ratio(4, 5));
    }

    #[test]
    fn point_canonicalization() {
        let t = tripod();
        assert_eq!(t.point(EdgeId(0), int(0)).unwrap(), v(&t, "o"));
        assert_eq!(t.point(EdgeId(0), int(1)).unwrap(), v(&t, "x"));
        assert!(t.point(EdgeId(0), ratio(3, 2)).is_err());
        assert!(t.point(EdgeId(0), ratio(-1, 2)).is_err());
        assert!(t.point(EdgeId(9), ratio(1, 2)).is_err());
    }

    #[test]
    fn midpoints() {
        let t = tripod();
        assert_eq!(t.midpoint(&v(&t, "x"), &v(&t, "y")), v(&t, "o"));
        assert_eq!(
            t.midpoint(&v(&t, "x"), &v(&t, "o")),
            TreePoint::Interior { edge: EdgeId(0), offset: ratio(1, 2) }
        );
        let s = star3();
        assert_eq!(s.midpoint(&v(&s, "a"), &v(&s, "d")), v(&s, "c"));
    }

    #[test]
    fn projections_onto_tripod_geodesic() {
        let t = tripod();
        let gamma = Geodesic::between(&t, t.vertex("x").unwrap(), t.vertex("y").unwrap());
        assert!(gamma.is_maximal(&t));
        assert_eq!(gamma.project(&t, &v(&t, "z")), v(&t, "o"));
        let p = t.point(EdgeId(2), ratio(2, 5)).unwrap();
        assert_eq!(gamma.project(&t, &p), v(&t, "o"));
        let on = t.point(EdgeId(0), ratio(1, 4)).unwrap();
        assert_eq!(gamma.project(&t, &on), on);
    }

    #[test]
    fn perpendiculars_on_star3() {
        let s = star3();
        let (c, a, d) = (s.vertex("c").unwrap(), s.vertex("a").unwrap(), s.vertex("d").unwrap());
        let p = perpendicular(&s, &Flag::new(&s, c, EdgeId(0), EdgeId(1)).unwrap()).unwrap();
        assert_eq!(p.vertices, BTreeSet::from([c, d]));
        assert_eq!(p.edges, BTreeSet::from([EdgeId(2), EdgeId(7), EdgeId(8)]));

        let p = perpendicular(&s, &Flag::new(&s, a, EdgeId(3), EdgeId(4)).unwrap()).unwrap();
        assert_eq!(p.vertices.len(), 4);

        let p = perpendicular(&s, &Flag::new(&s, a, EdgeId(0), EdgeId(3)).unwrap()).unwrap();
        assert_eq!(p.vertices, BTreeSet::from([a]));
        assert_eq!(p.edges, BTreeSet::from([EdgeId(4)]));
    }

    #[test]
    fn invalid_flags() {
        let s = star3();
        let c = s.vertex("c").unwrap();
        assert!(Flag::new(&s, c, EdgeId(0), EdgeId(0)).is_err());
        assert!(Flag::new(&s, c, EdgeId(0), EdgeId(3)).is_err());
    }

    #[test]
    fn flag_geodesic_is_complete_and_oriented() {
        let s = star3();
        let c = s.vertex("c").unwrap();
        let flag = Flag::new(&s, c, EdgeId(0), EdgeId(1)).unwrap();
        let g = geodesic_through_flag(&s, &flag).unwrap();
        assert!(g.is_complete());
        assert_eq!(g.coordinate_of_vertex(c), Some(&int(0)));
        assert_eq!(g.coordinate_of_vertex(s.vertex("a").unwrap()), Some(&int(1)));
        assert_eq!(g.coordinate_of_vertex(s.vertex("b").unwrap()), Some(&int(-1)));
        assert_eq!(g.start_ray(), Some(EdgeId(5)));
        assert_eq!(g.end_ray(), Some(EdgeId(3)));
        assert!(geodesic_through_flag(&tripod(), &Flag { x: VertexId(0), e: EdgeId(0), f: EdgeId(1) })
            .is_err());
    }

    #[test]
    fn geodesic_coordinates_round_trip() {
        let s = star3();
        let flag = Flag::new(&s, s.vertex("c").unwrap(), EdgeId(1), EdgeId(2)).unwrap();
        let g = geodesic_through_flag(&s, &flag).unwrap();
        for k in -12..=12 {
            let c = ratio(k, 4);
            let p = g.point_at(&s, &c).unwrap();
            assert_eq!(g.coordinate(&s, &p), Some(c));
        }
    }

    #[test]
    fn cat0_examples() {
        let t = tripod();
        let (x, y, z) = (v(&t, "x"), v(&t, "y"), v(&t, "z"));
        let r = check_cat0_triangle(&t, &x, &y, &z, &ratio(1, 2)).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(1), int(3)));
        assert!(r.strict);

        let ys = t.point(EdgeId(0), ratio(1, 3)).unwrap();
        for k in 0..=4 {
            let r = check_cat0_triangle(&t, &x, &ys, &z, &ratio(k, 4)).unwrap();
            assert_eq!(r.lhs, r.rhs);
        }
        let r = check_cat0_triangle(&t, &x, &y, &z, &int(0)).unwrap();
        assert_eq!(r.lhs, int(4));
        assert_eq!(r.rhs, int(4));
        assert!(check_cat0_triangle(&t, &x, &y, &z, &int(2)).is_err());
    }

    #[test]
    fn walk_turns_at_vertices() {
        let s = star3();
        // from c toward a (edge 0) then onto ray 3
        let p = s.walk(EdgeId(0), int(0), true, ratio(5, 2), BranchRule::SmallestEdge).unwrap();
        assert_eq!(p, TreePoint::Interior { edge: EdgeId(3), offset: ratio(3, 2) });
        let p = s.walk(EdgeId(0), int(0), true, ratio(5, 2), BranchRule::LargestEdge).unwrap();
        assert_eq!(p, TreePoint::Interior { edge: EdgeId(4), offset: ratio(3, 2) });
        // back from a ray into the tree
        let p = s.walk(EdgeId(3), int(1), false, int(2), BranchRule::SmallestEdge).unwrap();
        assert_eq!(p, v(&s, "c"));
        let t = tripod();
        assert!(matches!(
            t.walk(EdgeId(0), int(0), true, int(2), BranchRule::SmallestEdge),
            Err(Error::LeafReached(_))
        ));
    }
}
