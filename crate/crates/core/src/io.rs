//! JSON documents for networks, QUBO instances and compilation results.
//!
//! Complex scalars are `[re, im]` pairs; dense tensors and matrices store
//! separate row-major `re` and `im` arrays. Maps are ordered, so serialising
//! the same value always yields the same bytes. Floats are written in their
//! shortest round-trip form.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{Boundary, Edge, Leg, LegKind, Side, SiteTensor, TensorNetwork};
use crate::operator::{RegisterDesc, RegisterId};
use crate::qubo::Qubo;
use crate::sweep::{CompilationResult, LayoutRegister, OpRole, RegisterKind, RegisterLayout, SiteMeta, SweepOutcome, WiredOp};
use crate::C64;

pub const RESULT_FORMAT: &str = "tnbe-compilation";
pub const RESULT_VERSION: u32 = 1;

/// Parses JSON, reporting the field path and line/column of the first
/// problem.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse(format!("at `{path}`: {inner}"))
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialise");
    s.push('\n');
    s
}

type Pair = [f64; 2];

fn pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(v: &[Pair]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorData {
    pub shape: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TensorData {
    fn new(shape: Vec<usize>, data: &[C64]) -> Self {
        Self { shape, re: data.iter().map(|z| z.re).collect(), im: data.iter().map(|z| z.im).collect() }
    }

    fn values(&self, what: &str) -> Result<Vec<C64>> {
        let count: usize = self.shape.iter().product();
        if self.re.len() != count || self.im.len() != count {
            return Err(Error::Parse(format!(
                "{what}: shape {:?} needs {count} values, got {} real and {} imaginary",
                self.shape,
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LegKindDoc {
    PhysIn,
    PhysOut,
    Bond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LegDoc {
    kind: LegKindDoc,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: usize,
    legs: Vec<LegDoc>,
    data: TensorData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: usize,
    u: usize,
    v: Option<usize>,
    dim: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    cyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    d: usize,
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
    #[serde(default)]
    boundary: BTreeMap<String, Vec<Pair>>,
}

fn boundary_key(edge: usize, side: Side) -> String {
    match side {
        Side::In => format!("{edge}:in"),
        Side::Out => format!("{edge}:out"),
    }
}

fn parse_boundary_key(key: &str) -> Result<(usize, Side)> {
    let bad = || Error::Parse(format!("boundary key {key:?} is not `<edge>:in` or `<edge>:out`"));
    let (edge, side) = match key.split_once(':') {
        Some((e, "in")) => (e, Side::In),
        Some((e, "out")) => (e, Side::Out),
        Some(_) => return Err(bad()),
        None => (key, Side::In),
    };
    Ok((edge.parse().map_err(|_| bad())?, side))
}

/// Parses a network document. Structural problems (dangling edges and so
/// on) are left to [`crate::validate_network`].
pub fn network_from_json(text: &str) -> Result<TensorNetwork> {
    let doc: NetworkDoc = from_json(text)?;
    let mut tn = TensorNetwork::new(doc.d);
    for (i, v) in doc.vertices.iter().enumerate() {
        let legs = v
            .legs
            .iter()
            .enumerate()
            .map(|(a, l)| {
                let kind = match (l.kind, l.edge) {
                    (LegKindDoc::PhysIn, None) => LegKind::PhysIn,
                    (LegKindDoc::PhysOut, None) => LegKind::PhysOut,
                    (LegKindDoc::Bond, Some(e)) => LegKind::Bond(e),
                    (LegKindDoc::Bond, None) => {
                        return Err(Error::Parse(format!("vertices[{i}].legs[{a}]: bond leg without `edge`")))
                    }
                    (_, Some(_)) => {
                        return Err(Error::Parse(format!("vertices[{i}].legs[{a}]: physical leg with an `edge`")))
                    }
                };
                Ok(Leg { kind, dim: l.dim })
            })
            .collect::<Result<Vec<_>>>()?;
        let dims: Vec<usize> = legs.iter().map(|l| l.dim).collect();
        if v.data.shape != dims {
            return Err(Error::Parse(format!(
                "vertices[{i}].data: shape {:?} does not match leg dims {dims:?}",
                v.data.shape
            )));
        }
        tn.vertices.push(SiteTensor::new(v.id, legs, v.data.values(&format!("vertices[{i}].data"))?));
    }
    tn.edges = doc.edges.iter().map(|e| Edge { id: e.id, u: e.u, v: e.v, dim: e.dim, cyclic: e.cyclic }).collect();
    for (key, state) in &doc.boundary {
        let (edge, side) = parse_boundary_key(key)?;
        if tn.boundary.insert(edge, Boundary { side, state: from_pairs(state) }).is_some() {
            return Err(Error::Parse(format!("edge {edge} has two boundary states")));
        }
    }
    Ok(tn)
}

pub fn network_to_json(tn: &TensorNetwork) -> String {
    let doc = NetworkDoc {
        d: tn.d,
        vertices: tn
            .vertices
            .iter()
            .map(|s| VertexDoc {
                id: s.id,
                legs: s
                    .legs
                    .iter()
                    .map(|l| match l.kind {
                        LegKind::PhysIn => LegDoc { kind: LegKindDoc::PhysIn, dim: l.dim, edge: None },
                        LegKind::PhysOut => LegDoc { kind: LegKindDoc::PhysOut, dim: l.dim, edge: None },
                        LegKind::Bond(e) => LegDoc { kind: LegKindDoc::Bond, dim: l.dim, edge: Some(e) },
                    })
                    .collect(),
                data: TensorData::new(s.dims(), &s.data),
            })
            .collect(),
        edges: tn.edges.iter().map(|e| EdgeDoc { id: e.id, u: e.u, v: e.v, dim: e.dim, cyclic: e.cyclic }).collect(),
        boundary: tn.boundary.iter().map(|(&e, b)| (boundary_key(e, b.side), pairs(&b.state))).collect(),
    };
    to_json(&doc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingDoc {
    i: usize,
    j: usize,
    alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuboDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default)]
    c_const: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quadratic: Option<Vec<CouplingDoc>>,
    /// Upper-triangular binary QUBO matrix over `x ∈ {0, 1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    /// Constant of the binary form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
}

/// Parses either the Ising form `{n, c_const, linear, quadratic}` or the
/// binary form `{matrix, offset}`.
pub fn qubo_from_json(text: &str) -> Result<Qubo> {
    let doc: QuboDoc = from_json(text)?;
    if let Some(matrix) = &doc.matrix {
        if doc.linear.is_some() || doc.quadratic.is_some() || doc.c_const != 0.0 {
            return Err(Error::Parse("`matrix` cannot be combined with Ising fields".into()));
        }
        if doc.n.is_some_and(|n| n != matrix.len()) {
            return Err(Error::Parse(format!("`n` does not match the {}-row matrix", matrix.len())));
        }
        return Qubo::from_binary_matrix(matrix, doc.offset.unwrap_or(0.0));
    }
    if doc.offset.is_some() {
        return Err(Error::Parse("`offset` belongs to the `matrix` form; use `c_const`".into()));
    }
    let n = doc.n.ok_or_else(|| Error::Parse("missing field `n`".into()))?;
    let mut q = Qubo::new(n);
    q.c_const = doc.c_const;
    if let Some(linear) = doc.linear {
        if linear.len() != n {
            return Err(Error::Parse(format!("`linear` has {} entries for n = {n}", linear.len())));
        }
        q.linear = linear;
    }
    for (k, c) in doc.quadratic.unwrap_or_default().iter().enumerate() {
        q.add_coupling(c.i, c.j, c.alpha).map_err(|e| Error::Parse(format!("quadratic[{k}]: {e}")))?;
    }
    Ok(q)
}

pub fn qubo_to_json(q: &Qubo) -> String {
    to_json(&QuboDoc {
        n: Some(q.n),
        c_const: q.c_const,
        linear: Some(q.linear.clone()),
        quadratic: Some(q.quadratic.iter().map(|(&(i, j), &alpha)| CouplingDoc { i, j, alpha }).collect()),
        matrix: None,
        offset: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterDoc {
    id: RegisterId,
    kind: RegisterKind,
    dim: usize,
    postselect: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    prepare: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    target: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpDoc {
    vertex: usize,
    role: OpRole,
    registers: Vec<RegisterId>,
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AngleDoc {
    theta: f64,
    multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    vertex: usize,
    m: usize,
    n: usize,
    k: usize,
    p: usize,
    q: usize,
    beta: f64,
    trivial: bool,
    in_edges: Vec<usize>,
    out_edges: Vec<usize>,
    s_k: Vec<f64>,
    angles: Vec<AngleDoc>,
    condition_number: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Encoded,
    ZeroOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResultDoc {
    format: String,
    version: u32,
    status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    gamma: f64,
    d: usize,
    order: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zero_vertex: Option<usize>,
    #[serde(default)]
    betas: Vec<f64>,
    #[serde(default)]
    registers: Vec<RegisterDoc>,
    #[serde(default)]
    ops: Vec<OpDoc>,
    #[serde(default)]
    sites: Vec<SiteDoc>,
}

/// Serialises a sweep outcome. A zero-operator outcome carries `d` from the
/// network it came from.
pub fn outcome_to_json(outcome: &SweepOutcome, d: usize) -> String {
    let doc = match outcome {
        SweepOutcome::ZeroOperator { vertex, order } => ResultDoc {
            format: RESULT_FORMAT.into(),
            version: RESULT_VERSION,
            status: Status::ZeroOperator,
            message: Some(format!("zero operator: vertex {vertex} is identically zero, so Γ = 0 and no block-encoding exists")),
            gamma: 0.0,
            d,
            order: order.clone(),
            zero_vertex: Some(*vertex),
            betas: Vec::new(),
            registers: Vec::new(),
            ops: Vec::new(),
            sites: Vec::new(),
        },
        SweepOutcome::Encoded(r) => ResultDoc {
            format: RESULT_FORMAT.into(),
            version: RESULT_VERSION,
            status: Status::Encoded,
            message: None,
            gamma: r.gamma,
            d: r.d,
            order: r.order.clone(),
            zero_vertex: None,
            betas: r.betas.clone(),
            registers: r
                .layout
                .registers
                .iter()
                .map(|x| RegisterDoc {
                    id: x.id,
                    kind: x.kind,
                    dim: x.dim,
                    postselect: x.postselect,
                    prepare: pairs(&x.prepare),
                    target: pairs(&x.target),
                })
                .collect(),
            ops: r
                .ops
                .iter()
                .map(|op| {
                    let data = linalg::row_major(&op.matrix);
                    OpDoc {
                        vertex: op.vertex,
                        role: op.role,
                        registers: op.register_ids(),
                        dim: op.matrix.nrows(),
                        re: data.iter().map(|z| z.re).collect(),
                        im: data.iter().map(|z| z.im).collect(),
                    }
                })
                .collect(),
            sites: r
                .sites
                .iter()
                .map(|s| SiteDoc {
                    vertex: s.vertex,
                    m: s.m,
                    n: s.n,
                    k: s.k,
                    p: s.p,
                    q: s.q,
                    beta: s.beta,
                    trivial: s.trivial,
                    in_edges: s.in_edges.clone(),
                    out_edges: s.out_edges.clone(),
                    s_k: s.s_k.clone(),
                    angles: s.angles.iter().map(|&(theta, multiplicity)| AngleDoc { theta, multiplicity }).collect(),
                    condition_number: s.condition_number,
                })
                .collect(),
        },
    };
    to_json(&doc)
}

/// Parses a result document back into a sweep outcome.
pub fn outcome_from_json(text: &str) -> Result<SweepOutcome> {
    let doc: ResultDoc = from_json(text)?;
    if doc.format != RESULT_FORMAT || doc.version != RESULT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported result format {:?} version {} (expected {RESULT_FORMAT:?} version {RESULT_VERSION})",
            doc.format, doc.version
        )));
    }
    if doc.status == Status::ZeroOperator {
        let vertex = doc.zero_vertex.ok_or_else(|| Error::Parse("zero-operator result without `zero_vertex`".into()))?;
        return Ok(SweepOutcome::ZeroOperator { vertex, order: doc.order });
    }

    let registers = doc
        .registers
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let reg = LayoutRegister {
                id: r.id,
                kind: r.kind,
                dim: r.dim,
                postselect: r.postselect,
                prepare: from_pairs(&r.prepare),
                target: from_pairs(&r.target),
            };
            let sized = |v: &[C64]| v.len() == r.dim;
            if r.postselect && !(sized(&reg.prepare) && sized(&reg.target)) {
                return Err(Error::Parse(format!("registers[{i}]: prepare/target must have length {}", r.dim)));
            }
            Ok(reg)
        })
        .collect::<Result<Vec<_>>>()?;
    let layout = RegisterLayout { registers };

    let ops = doc
        .ops
        .iter()
        .enumerate()
        .map(|(i, op)| {
            let descs = op
                .registers
                .iter()
                .map(|&id| {
                    layout
                        .get(id)
                        .map(|r| RegisterDesc::new(id, r.dim))
                        .ok_or_else(|| Error::Parse(format!("ops[{i}]: register {id} is not in the layout")))
                })
                .collect::<Result<Vec<_>>>()?;
            let size: usize = descs.iter().map(|r| r.dim).product();
            if op.dim != size || op.re.len() != size * size || op.im.len() != size * size {
                return Err(Error::Parse(format!("ops[{i}]: matrix does not match registers of total size {size}")));
            }
            let data: Vec<C64> = op.re.iter().zip(&op.im).map(|(&r, &m)| C64::new(r, m)).collect();
            Ok(WiredOp { vertex: op.vertex, role: op.role, registers: descs, matrix: DMatrix::from_row_slice(size, size, &data) })
        })
        .collect::<Result<Vec<_>>>()?;

    let sites = doc
        .sites
        .iter()
        .map(|s| SiteMeta {
            vertex: s.vertex,
            m: s.m,
            n: s.n,
            k: s.k,
            p: s.p,
            q: s.q,
            beta: s.beta,
            trivial: s.trivial,
            in_edges: s.in_edges.clone(),
            out_edges: s.out_edges.clone(),
            s_k: s.s_k.clone(),
            angles: s.angles.iter().map(|a| (a.theta, a.multiplicity)).collect(),
            condition_number: s.condition_number,
        })
        .collect();

    Ok(SweepOutcome::Encoded(CompilationResult {
        d: doc.d,
        ops,
        layout,
        gamma: doc.gamma,
        order: doc.order,
        betas: doc.betas,
        sites,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY_CHAIN: &str = r#"{
  "d": 2,
  "vertices": [
    {"id": 0, "legs": [{"kind": "bond", "dim": 1, "edge": 0}, {"kind": "phys_out", "dim": 2}, {"kind": "phys_in", "dim": 2}],
     "data": {"shape": [1, 2, 2], "re": [1, 0, 0, 1], "im": [0, 0, 0, 0]}},
    {"id": 1, "legs": [{"kind": "bond", "dim": 1, "edge": 0}, {"kind": "phys_out", "dim": 2}, {"kind": "phys_in", "dim": 2}],
     "data": {"shape": [1, 2, 2], "re": [1, 0, 0, 1], "im": [0, 0, 0, 0]}}
  ],
  "edges": [{"id": 0, "u": 0, "v": 1, "dim": 1}]
}"#;

    #[test]
    fn network_round_trip_is_stable() {
        let tn = network_from_json(IDENTITY_CHAIN).unwrap();
        assert_eq!(tn.vertices.len(), 2);
        let once = network_to_json(&tn);
        let twice = network_to_json(&network_from_json(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn boundary_keys() {
        assert_eq!(parse_boundary_key("3:out").unwrap(), (3, Side::Out));
        assert_eq!(parse_boundary_key("4").unwrap(), (4, Side::In));
        assert!(parse_boundary_key("x:in").is_err());
    }

    #[test]
    fn parse_errors_name_the_field() {
        let text = IDENTITY_CHAIN.replace(r#""dim": 1}]"#, r#""dim": "one"}]"#);
        let err = network_from_json(&text).unwrap_err().to_string();
        assert!(err.contains("edges[0].dim"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let text = IDENTITY_CHAIN.replacen("[1, 2, 2]", "[2, 2]", 1);
        let err = network_from_json(&text).unwrap_err().to_string();
        assert!(err.contains("vertices[0].data"), "{err}");
    }

    #[test]
    fn qubo_forms() {
        let q = qubo_from_json(r#"{"n": 2, "c_const": 1.5, "linear": [1, 0], "quadratic": [{"i": 1, "j": 0, "alpha": 2}]}"#).unwrap();
        assert_eq!(q.alpha(0, 1), 2.0);
        assert_eq!(qubo_from_json(&qubo_to_json(&q)).unwrap(), q);

        let b = qubo_from_json(r#"{"matrix": [[1, 0], [0, 0]], "offset": 0}"#).unwrap();
        assert_eq!(b.linear, vec![-0.5, 0.0]);
        assert_eq!(b.c_const, 0.5);
        assert!(qubo_from_json(r#"{"n": 1, "quadratic": [{"i": 0, "j": 0, "alpha": 1}]}"#).is_err());
    }
}
