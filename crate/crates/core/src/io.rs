//! JSON file formats. Rationals are always `"p/q"` strings; vertices are
//! referred to by their labels, edges by their index in the tree file.

use std::collections::BTreeSet;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::measure::Measure;
use crate::radon::{FlagTable, Reconstruction, VertexFunction};
use crate::rational::{serde_str, Rational};
use crate::transport::TransportPlan;
use crate::tree::{EdgeId, Flag, Length, Tree, TreePoint, TreeSpec, VertexLabel};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    /// Not valid JSON, wrong shape, or a bad rational literal.
    #[error("malformed {what}: {msg}")]
    Malformed { what: &'static str, msg: String },
    /// Well formed but rejected by validation.
    #[error(transparent)]
    Invalid(#[from] Error),
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

fn parse<T: DeserializeOwned>(what: &'static str, text: &str) -> FormatResult<T> {
    serde_json::from_str(text).map_err(|e| FormatError::Malformed { what, msg: e.to_string() })
}

fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types always serialize");
    s.push('\n');
    s
}

fn unknown_vertex(label: &VertexLabel) -> Error {
    Error::Config(format!("unknown vertex {label}"))
}

// ---- tree ----

mod length_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(len: &Length, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(len)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Length, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "inf" {
            return Ok(Length::Infinite);
        }
        crate::rational::parse_rational(&raw).map(Length::Finite).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    u: VertexLabel,
    v: Option<VertexLabel>,
    #[serde(with = "length_str")]
    len: Length,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    vertices: Vec<VertexLabel>,
    edges: Vec<EdgeRecord>,
}

pub fn read_tree(text: &str) -> FormatResult<Tree> {
    let file: TreeFile = parse("tree file", text)?;
    let spec = TreeSpec {
        vertices: file.vertices,
        edges: file.edges.into_iter().map(|e| (e.u, e.v, e.len)).collect(),
    };
    Ok(Tree::build(spec)?)
}

pub fn write_tree(tree: &Tree) -> String {
    let edges = tree
        .edge_ids()
        .map(|e| {
            let edge = tree.edge(e).unwrap();
            EdgeRecord {
                u: tree.label(edge.u).clone(),
                v: edge.v.map(|v| tree.label(v).clone()),
                len: edge.len.clone(),
            }
        })
        .collect();
    render(&TreeFile { vertices: tree.labels().to_vec(), edges })
}

// ---- points and measures ----

/// A point as an edge plus offset from the edge's first endpoint; vertices
/// use their smallest incident edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub edge: EdgeId,
    #[serde(with = "serde_str")]
    pub offset: Rational,
}

impl PointRecord {
    pub fn from_point(tree: &Tree, p: &TreePoint) -> PointRecord {
        let (edge, offset) = tree.edge_offset(p);
        PointRecord { edge, offset }
    }

    pub fn to_point(&self, tree: &Tree) -> crate::Result<TreePoint> {
        tree.point(self.edge, self.offset.clone())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    edge: EdgeId,
    #[serde(with = "serde_str")]
    offset: Rational,
    #[serde(with = "serde_str")]
    mass: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    atoms: Vec<AtomRecord>,
}

fn measure_file(tree: &Tree, mu: &Measure) -> MeasureFile {
    MeasureFile {
        atoms: mu
            .atoms()
            .iter()
            .map(|a| {
                let (edge, offset) = tree.edge_offset(&a.point);
                AtomRecord { edge, offset, mass: a.mass.clone() }
            })
            .collect(),
    }
}

fn measure_from_file(tree: &Tree, file: MeasureFile) -> FormatResult<Measure> {
    let atoms = file
        .atoms
        .into_iter()
        .map(|a| Ok((tree.point(a.edge, a.offset)?, a.mass)))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(Measure::new(atoms)?)
}

pub fn read_measure(tree: &Tree, text: &str) -> FormatResult<Measure> {
    measure_from_file(tree, parse("measure file", text)?)
}

pub fn write_measure(tree: &Tree, mu: &Measure) -> String {
    render(&measure_file(tree, mu))
}

// ---- vertex functions ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueRecord {
    vertex: VertexLabel,
    #[serde(with = "serde_str")]
    value: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexFunctionFile {
    values: Vec<ValueRecord>,
}

/// Vertices missing from the file are zero; repeated vertices add up.
pub fn read_vertex_function(tree: &Tree, text: &str) -> FormatResult<VertexFunction> {
    let file: VertexFunctionFile = parse("vertex function file", text)?;
    let values = file
        .values
        .into_iter()
        .map(|r| tree.vertex(r.vertex.clone()).map(|v| (v, r.value)).ok_or_else(|| unknown_vertex(&r.vertex)))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(VertexFunction::new(values))
}

/// Writes every vertex, zeros included, in vertex order.
pub fn write_vertex_function(tree: &Tree, h: &VertexFunction) -> String {
    let values = tree.vertices().map(|v| ValueRecord { vertex: tree.label(v).clone(), value: h.get(v) }).collect();
    render(&VertexFunctionFile { values })
}

// ---- flag tables ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlagRecord {
    x: VertexLabel,
    e: EdgeId,
    f: EdgeId,
    #[serde(with = "serde_str")]
    value: Rational,
}

pub fn read_flag_table(tree: &Tree, text: &str) -> FormatResult<FlagTable> {
    let rows: Vec<FlagRecord> = parse("flag table", text)?;
    let mut table = FlagTable::default();
    for r in rows {
        let x = tree.vertex(r.x.clone()).ok_or_else(|| unknown_vertex(&r.x))?;
        let flag = Flag::new(tree, x, r.e.min(r.f), r.e.max(r.f))?;
        if table.values.insert(flag, r.value).is_some() {
            return Err(Error::Config(format!("flag ({}, {}, {}) listed twice", r.x, r.e, r.f)).into());
        }
    }
    Ok(table)
}

pub fn write_flag_table(tree: &Tree, table: &FlagTable) -> String {
    let rows: Vec<FlagRecord> = table
        .values
        .iter()
        .map(|(flag, value)| FlagRecord { x: tree.label(flag.x).clone(), e: flag.e, f: flag.f, value: value.clone() })
        .collect();
    render(&rows)
}

// ---- plans ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingRecord {
    src: PointRecord,
    dst: PointRecord,
    #[serde(with = "serde_str")]
    mass: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(with = "serde_str")]
    w2_squared: Rational,
    plan: Vec<CouplingRecord>,
}

pub fn write_plan(tree: &Tree, plan: &TransportPlan) -> String {
    let rows = plan
        .couplings()
        .iter()
        .map(|c| CouplingRecord {
            src: PointRecord::from_point(tree, &c.src),
            dst: PointRecord::from_point(tree, &c.dst),
            mass: c.mass.clone(),
        })
        .collect();
    render(&PlanFile { w2_squared: plan.squared_cost().clone(), plan: rows })
}

/// Reads a plan file back; the squared cost is recomputed and must match.
pub fn read_plan(tree: &Tree, text: &str) -> FormatResult<TransportPlan> {
    let file: PlanFile = parse("plan file", text)?;
    let couplings = file
        .plan
        .into_iter()
        .map(|c| {
            Ok(crate::transport::Coupling { src: c.src.to_point(tree)?, dst: c.dst.to_point(tree)?, mass: c.mass })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let plan = TransportPlan::new(tree, couplings);
    if plan.squared_cost() != &file.w2_squared {
        return Err(Error::Config(format!(
            "plan cost {} does not match recorded {}",
            plan.squared_cost(),
            file.w2_squared
        ))
        .into());
    }
    Ok(plan)
}

// ---- skeletons ----

/// Comma separated edge indices, e.g. `0,3,4`.
pub fn parse_skeleton(text: &str) -> std::result::Result<BTreeSet<EdgeId>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map(EdgeId).map_err(|e| format!("bad edge index {s:?}: {e}")))
        .collect()
}

// ---- reconstruction ----

#[derive(Serialize)]
struct ReadAtom {
    #[serde(flatten)]
    point: PointRecord,
    #[serde(with = "serde_str")]
    mass: Rational,
}

#[derive(Serialize)]
struct FlagRef {
    x: VertexLabel,
    e: EdgeId,
    f: EdgeId,
}

#[derive(Serialize)]
struct InteriorReadRecord {
    edge: EdgeId,
    flag: FlagRef,
    atoms: Vec<ReadAtom>,
}

#[derive(Serialize)]
struct SubtractionRecord {
    flag: FlagRef,
    #[serde(with = "serde_str")]
    flag_mass: Rational,
    #[serde(with = "serde_str")]
    interior_mass: Rational,
    #[serde(with = "serde_str")]
    vertex_value: Rational,
}

#[derive(Serialize)]
struct Provenance {
    interior_reads: Vec<InteriorReadRecord>,
    flag_subtractions: Vec<SubtractionRecord>,
    #[serde(with = "serde_str")]
    vertex_total: Rational,
}

#[derive(Serialize)]
struct ReconstructionFile {
    measure: MeasureFile,
    provenance: Provenance,
}

fn flag_ref(tree: &Tree, flag: &Flag) -> FlagRef {
    FlagRef { x: tree.label(flag.x).clone(), e: flag.e, f: flag.f }
}

pub fn write_reconstruction(tree: &Tree, rec: &Reconstruction) -> String {
    let interior_reads = rec
        .interior_reads
        .iter()
        .map(|r| InteriorReadRecord {
            edge: r.edge,
            flag: flag_ref(tree, &r.flag),
            atoms: r
                .atoms
                .iter()
                .map(|(p, m)| ReadAtom { point: PointRecord::from_point(tree, p), mass: m.clone() })
                .collect(),
        })
        .collect();
    let flag_subtractions = rec
        .flag_subtractions
        .iter()
        .map(|s| SubtractionRecord {
            flag: flag_ref(tree, &s.flag),
            flag_mass: s.flag_mass.clone(),
            interior_mass: s.interior_mass.clone(),
            vertex_value: s.vertex_value.clone(),
        })
        .collect();
    render(&ReconstructionFile {
        measure: measure_file(tree, &rec.measure),
        provenance: Provenance { interior_reads, flag_subtractions, vertex_total: rec.vertex_total.clone() },
    })
}

/// The measure part of a reconstruction file.
pub fn read_reconstructed_measure(tree: &Tree, text: &str) -> FormatResult<Measure> {
    #[derive(Deserialize)]
    struct Partial {
        measure: MeasureFile,
    }
    let file: Partial = parse("reconstruction file", text)?;
    measure_from_file(tree, file.measure)
}

pub fn write_json<T: Serialize>(value: &T) -> String {
    render(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radon::radon_forward;
    use crate::rational::{int, ratio};
    use crate::tree::fixtures::*;

    #[test]
    fn tree_round_trip() {
        for t in [tripod(), tripod_extended(), star3()] {
            let text = write_tree(&t);
            let back = read_tree(&text).unwrap();
            assert_eq!(write_tree(&back), text);
        }
        assert!(text_has_inf(&write_tree(&star3())));
    }

    fn text_has_inf(s: &str) -> bool {
        s.contains("\"inf\"")
    }

    #[test]
    fn measure_round_trip_keeps_exact_values() {
        let t = star3();
        let mu = Measure::new([(v(&t, "a"), ratio(1, 3)), (t.point(EdgeId(7), ratio(22, 7)).unwrap(), ratio(2, 3))])
            .unwrap();
        let text = write_measure(&t, &mu);
        assert!(text.contains("\"22/7\""));
        assert_eq!(read_measure(&t, &text).unwrap(), mu);
    }

    #[test]
    fn flag_table_and_vertex_function_round_trip() {
        let t = star3();
        let h = VertexFunction::new(t.vertices().map(|x| (x, int(x.0 as i64 + 1))));
        assert_eq!(read_vertex_function(&t, &write_vertex_function(&t, &h)).unwrap(), h);
        let table = radon_forward(&t, &h);
        let text = write_flag_table(&t, &table);
        assert_eq!(read_flag_table(&t, &text).unwrap(), table);
    }

    #[test]
    fn decimals_and_garbage_are_malformed() {
        let t = tripod();
        let bad = r#"{"atoms":[{"edge":0,"offset":"0.5","mass":"1"}]}"#;
        assert!(matches!(read_measure(&t, bad), Err(FormatError::Malformed { .. })));
        assert!(matches!(read_measure(&t, "{"), Err(FormatError::Malformed { .. })));
        let off = r#"{"atoms":[{"edge":0,"offset":"5","mass":"1"}]}"#;
        assert!(matches!(read_measure(&t, off), Err(FormatError::Invalid(_))));
    }

    #[test]
    fn skeleton_parsing() {
        assert_eq!(parse_skeleton("0, 2,5").unwrap(), BTreeSet::from([EdgeId(0), EdgeId(2), EdgeId(5)]));
        assert!(parse_skeleton("0,x").is_err());
        assert!(parse_skeleton("").unwrap().is_empty());
    }
}
