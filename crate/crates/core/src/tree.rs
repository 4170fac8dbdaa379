//! Sliced trees and pruned trees.
//!
//! Vertices are kept sorted by id, so a vertex index order is the same as
//! lexicographic id order. Every edge is stored with its endpoints in index
//! order and, when sliced, the slicing value at each endpoint.

use std::borrow::Cow;
use std::fmt;
use std::sync::OnceLock;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frac::Frac12;
use crate::kodaira::{is_klt_marking, SlicingPair};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    u: usize,
    v: usize,
    slicing: Option<(Frac12, Frac12)>,
}

impl Edge {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.u, self.v)
    }

    /// Slicing values `(at u, at v)`, if the edge is sliced.
    pub fn slicing(&self) -> Option<(Frac12, Frac12)> {
        self.slicing
    }

    pub fn is_sliced(&self) -> bool {
        self.slicing.is_some()
    }

    /// Slicing value seen from endpoint `x` (zero for unsliced edges).
    pub fn value_at(&self, x: usize) -> Frac12 {
        match self.slicing {
            None => Frac12::ZERO,
            Some((a, _)) if x == self.u => a,
            Some((_, b)) => b,
        }
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A decorated tree `(V, E, E0, jdeg)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlicedTree {
    ids: Vec<String>,
    jdeg: Vec<Frac12>,
    edges: Vec<Edge>,
    // Incident edges of `v` are `adj[start[v]..start[v + 1]]`.
    start: Vec<usize>,
    adj: Vec<usize>,
}

type Slicing = Option<(Frac12, Frac12)>;

/// Raw edge input: endpoint ids and optional `(value at first, value at second)`.
pub type EdgeSpec = (String, String, Option<(Frac12, Frac12)>);

impl SlicedTree {
    /// Assembles a tree from raw vertex and edge lists.
    ///
    /// Only structural problems that make the data unusable (duplicate ids,
    /// unknown endpoints, self loops) are errors here; everything else is
    /// reported by [`SlicedTree::validate`].
    pub fn new(vertices: Vec<(String, Frac12)>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let vertices = vertices.into_iter().map(|(id, j)| (id, j, ())).collect();
        Ok(Self::assemble(vertices, edges)?.0)
    }

    /// [`SlicedTree::new`] carrying a payload per vertex; payloads come back
    /// in the sorted vertex order.
    fn assemble<S: AsRef<str>, P>(
        mut vertices: Vec<(S, Frac12, P)>,
        edges: Vec<(S, S, Slicing)>,
    ) -> Result<(Self, Vec<P>)> {
        vertices.sort_by(|a, b| a.0.as_ref().cmp(b.0.as_ref()));
        for w in vertices.windows(2) {
            if w[0].0.as_ref() == w[1].0.as_ref() {
                return Err(Error::InvalidTree(format!(
                    "duplicate vertex id {:?}",
                    w[0].0.as_ref()
                )));
            }
        }
        if vertices.is_empty() {
            return Err(Error::InvalidTree("tree has no vertices".into()));
        }
        let index = |id: &str| {
            vertices
                .binary_search_by(|v| v.0.as_ref().cmp(id))
                .map_err(|_| Error::UnknownVertex(id.to_string()))
        };
        let mut out = Vec::with_capacity(edges.len());
        for (a, b, slicing) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let (ia, ib) = (index(a)?, index(b)?);
            if ia == ib {
                return Err(Error::InvalidTree(format!("self loop at {a:?}")));
            }
            let edge = if ia < ib {
                Edge {
                    u: ia,
                    v: ib,
                    slicing,
                }
            } else {
                Edge {
                    u: ib,
                    v: ia,
                    slicing: slicing.map(|(x, y)| (y, x)),
                }
            };
            out.push(edge);
        }
        let n = vertices.len();
        let (mut ids, mut jdeg, mut payload) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for (id, j, p) in vertices {
            ids.push(id.as_ref().to_string());
            jdeg.push(j);
            payload.push(p);
        }
        Ok((Self::from_parts(ids, jdeg, out), payload))
    }

    fn from_parts(ids: Vec<String>, jdeg: Vec<Frac12>, mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|e| (e.u, e.v));
        let n = ids.len();
        let mut start = vec![0; n + 1];
        for e in &edges {
            start[e.u + 1] += 1;
            start[e.v + 1] += 1;
        }
        for v in 0..n {
            start[v + 1] += start[v];
        }
        // fill from the back so each `start[v]` ends up at its first slot
        let mut adj = vec![0; start[n]];
        for v in 0..n {
            start[v] = start[v + 1];
        }
        for (k, e) in edges.iter().enumerate().rev() {
            for x in [e.v, e.u] {
                start[x] -= 1;
                adj[start[x]] = k;
            }
        }
        SlicedTree {
            ids,
            jdeg,
            edges,
            start,
            adj,
        }
    }

    pub fn builder() -> TreeBuilder {
        TreeBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|x| x.as_str().cmp(id)).ok()
    }

    pub fn jdeg(&self, v: usize) -> Frac12 {
        self.jdeg[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.start[v + 1] - self.start[v]
    }

    pub fn incident(&self, v: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.adj[self.start[v]..self.start[v + 1]]
            .iter()
            .map(move |&k| &self.edges[k])
    }

    /// Neighbours of `v` together with the slicing value of the joining
    /// edge at `v` and at the neighbour.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, Frac12, Frac12)> + '_ {
        self.incident(v).map(move |e| {
            let w = e.other(v);
            (w, e.value_at(v), e.value_at(w))
        })
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.degree(v) == 1
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| self.is_leaf(v))
    }

    /// `jdeg(v) + sum of slicings at v`.
    pub fn slicing_total(&self, v: usize) -> Frac12 {
        self.jdeg[v] + self.incident(v).map(|e| e.value_at(v)).sum::<Frac12>()
    }

    /// Total jdeg of the tree.
    pub fn height(&self) -> Frac12 {
        self.jdeg.iter().sum()
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&|_| Frac12::ZERO)
    }

    /// Validation where `extra(v)` joins the integrality sum at `v`.
    fn validate_with(&self, extra: &dyn Fn(usize) -> Frac12) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.len();
        if self.edges.len() + 1 != n {
            violations.push(Violation::EdgeCount {
                vertices: n,
                edges: self.edges.len(),
            });
        }
        for w in self.edges.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                violations.push(Violation::DuplicateEdge {
                    u: self.ids[w[0].u].clone(),
                    v: self.ids[w[0].v].clone(),
                });
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for (y, _, _) in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        let unreachable: Vec<String> = (0..n)
            .filter(|&v| !seen[v])
            .map(|v| self.ids[v].clone())
            .collect();
        if !unreachable.is_empty() {
            violations.push(Violation::Disconnected { unreachable });
        }
        for v in 0..n {
            if self.jdeg[v] < Frac12::ZERO {
                violations.push(Violation::NegativeJdeg {
                    vertex: self.ids[v].clone(),
                    jdeg: self.jdeg[v],
                });
            }
        }
        for e in &self.edges {
            if let Some((a, b)) = e.slicing {
                if SlicingPair::new(a, b).is_err() {
                    violations.push(Violation::BadSlicing {
                        u: self.ids[e.u].clone(),
                        v: self.ids[e.v].clone(),
                        pair: [a, b],
                    });
                }
            }
        }
        for v in 0..n {
            let total = self.slicing_total(v) + extra(v);
            if !total.is_integer() {
                violations.push(Violation::NonIntegral {
                    vertex: self.ids[v].clone(),
                    total,
                });
            }
        }
        ValidationReport::new(violations)
    }

    /// Every jdeg-0 vertex has at least three incident edges.
    pub fn is_tsm_stable(&self) -> Result<bool> {
        let report = self.validate();
        if !report.ok {
            return Err(Error::InvalidTree(report.summary()));
        }
        Ok((0..self.len()).all(|v| self.jdeg[v] > Frac12::ZERO || self.degree(v) >= 3))
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canonical_key_with(self, &|v| vertex_label(self.jdeg[v], &[], 0))
    }

    /// Removes vertex `v` and its incident edges, returning its id.
    pub(crate) fn remove_vertex(&mut self, v: usize) -> String {
        let remap = |x: usize| if x > v { x - 1 } else { x };
        let id = self.ids.remove(v);
        self.jdeg.remove(v);
        self.edges.retain(|e| e.u != v && e.v != v);
        for e in &mut self.edges {
            e.u = remap(e.u);
            e.v = remap(e.v);
        }
        let (ids, jdeg, edges) = (
            std::mem::take(&mut self.ids),
            std::mem::take(&mut self.jdeg),
            std::mem::take(&mut self.edges),
        );
        *self = SlicedTree::from_parts(ids, jdeg, edges);
        id
    }

    /// Copy with vertex ids replaced via `rename`; the tree is re-sorted.
    pub fn relabeled(&self, rename: impl Fn(&str) -> String) -> Result<SlicedTree> {
        let vertices = self
            .ids
            .iter()
            .zip(&self.jdeg)
            .map(|(id, &j)| (rename(id), j))
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| (rename(&self.ids[e.u]), rename(&self.ids[e.v]), e.slicing))
            .collect();
        SlicedTree::new(vertices, edges)
    }
}

/// A sliced tree together with klt-markings `T(v)` and lc-marking counts `|F(v)|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedTree {
    base: SlicedTree,
    klt: Vec<Vec<Frac12>>,
    lc: Vec<u32>,
}

impl From<SlicedTree> for PrunedTree {
    fn from(base: SlicedTree) -> Self {
        let n = base.len();
        PrunedTree {
            base,
            klt: vec![Vec::new(); n],
            lc: vec![0; n],
        }
    }
}

impl PrunedTree {
    pub fn new(base: SlicedTree, klt: Vec<Vec<Frac12>>, lc: Vec<u32>) -> Result<Self> {
        if klt.len() != base.len() || lc.len() != base.len() {
            return Err(Error::InvalidTree(
                "marking lists do not match the vertex count".into(),
            ));
        }
        let klt = klt
            .into_iter()
            .map(|mut t| {
                t.sort();
                t
            })
            .collect();
        Ok(PrunedTree { base, klt, lc })
    }

    pub fn base(&self) -> &SlicedTree {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn id(&self, v: usize) -> &str {
        self.base.id(v)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.base.index_of(id)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.base.degree(v)
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.base.is_leaf(v)
    }

    /// Klt-markings at `v`, ascending.
    pub fn klt(&self, v: usize) -> &[Frac12] {
        &self.klt[v]
    }

    pub fn lc(&self, v: usize) -> u32 {
        self.lc[v]
    }

    pub fn is_marked(&self) -> bool {
        self.klt.iter().any(|t| !t.is_empty()) || self.lc.iter().any(|&f| f > 0)
    }

    /// `jdeg(v) + sum T(v) + |F(v)|`, the contribution of `v` to the height.
    pub fn vertex_height(&self, v: usize) -> Frac12 {
        self.base.jdeg(v) + self.klt[v].iter().sum::<Frac12>() + Frac12::from_int(self.lc[v] as i64)
    }

    pub(crate) fn weight_at(&self, v: usize) -> Frac12 {
        Frac12::from_int(self.degree(v) as i64 - 2) + self.vertex_height(v)
    }

    /// `deg(v) - 2 + jdeg(v) + sum T(v) + |F(v)|`.
    pub fn weight(&self, v: usize) -> Result<Frac12> {
        if v >= self.len() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        Ok(self.weight_at(v))
    }

    pub fn weight_of(&self, id: &str) -> Result<Frac12> {
        let v = self
            .index_of(id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))?;
        Ok(self.weight_at(v))
    }

    pub fn weights(&self) -> Vec<Frac12> {
        (0..self.len()).map(|v| self.weight_at(v)).collect()
    }

    pub fn is_stable(&self) -> bool {
        (0..self.len()).all(|v| self.weight_at(v).is_positive())
    }

    pub fn height(&self) -> Frac12 {
        (0..self.len()).map(|v| self.vertex_height(v)).sum()
    }

    pub fn sum_weights(&self) -> Frac12 {
        (0..self.len()).map(|v| self.weight_at(v)).sum()
    }

    /// Sliced-tree conditions, except that integrality at `v` counts the
    /// klt-markings too: `jdeg(v) + sum e_v + sum T(v)` must be an integer.
    /// Pruning a sliced leaf moves its slicing into such a marking.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.base.validate_with(&|v| self.klt[v].iter().sum::<Frac12>());
        for v in 0..self.len() {
            for &t in &self.klt[v] {
                if !is_klt_marking(t) {
                    report.violations.push(Violation::BadKltMarking {
                        vertex: self.id(v).to_string(),
                        value: t,
                    });
                }
            }
        }
        report.ok = report.violations.is_empty();
        report
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        canonical_key_with(&self.base, &|v| {
            vertex_label(self.base.jdeg(v), &self.klt[v], self.lc[v])
        })
    }

    pub(crate) fn remove_vertex(&mut self, v: usize) -> String {
        self.klt.remove(v);
        self.lc.remove(v);
        self.base.remove_vertex(v)
    }

    pub(crate) fn add_klt(&mut self, v: usize, t: Frac12) {
        let pos = self.klt[v].partition_point(|&x| x <= t);
        self.klt[v].insert(pos, t);
    }

    pub(crate) fn add_lc(&mut self, v: usize) {
        self.lc[v] += 1;
    }

    pub fn relabeled(&self, rename: impl Fn(&str) -> String) -> Result<PrunedTree> {
        let base = self.base.relabeled(&rename)?;
        let mut klt = vec![Vec::new(); self.len()];
        let mut lc = vec![0; self.len()];
        for v in 0..self.len() {
            let w = base
                .index_of(&rename(self.id(v)))
                .ok_or_else(|| Error::InvalidTree("relabeling is not injective".into()))?;
            klt[w] = self.klt[v].clone();
            lc[w] = self.lc[v];
        }
        PrunedTree::new(base, klt, lc)
    }

    pub fn to_record(&self) -> TreeRecord {
        let b = &self.base;
        TreeRecord {
            vertices: (0..self.len())
                .map(|v| VertexRecord {
                    id: b.id(v).to_string(),
                    jdeg: b.jdeg(v),
                    klt: self.klt[v].clone(),
                    lc: self.lc[v],
                })
                .collect(),
            edges: b
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: b.id(e.u).to_string(),
                    v: b.id(e.v).to_string(),
                    slicing: e.slicing.map(|(x, y)| [x, y]),
                })
                .collect(),
        }
    }

    pub fn from_record(record: TreeRecord) -> Result<Self> {
        let vertices = record
            .vertices
            .into_iter()
            .map(|v| (v.id, v.jdeg, (v.klt, v.lc)))
            .collect();
        let edges = record
            .edges
            .into_iter()
            .map(|e| (e.u, e.v, e.slicing.map(|[x, y]| (x, y))))
            .collect();
        let (base, marks) = SlicedTree::assemble(vertices, edges)?;
        let (klt, lc) = marks.into_iter().unzip();
        PrunedTree::new(base, klt, lc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trees always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawRecord = serde_json::from_str(s)?;
        raw.build()
    }
}

impl TryFrom<TreeRecord> for PrunedTree {
    type Error = Error;
    fn try_from(r: TreeRecord) -> Result<Self> {
        PrunedTree::from_record(r)
    }
}

impl From<PrunedTree> for TreeRecord {
    fn from(t: PrunedTree) -> Self {
        t.to_record()
    }
}

// Serializes straight from the tree in the `TreeRecord` layout.
impl Serialize for PrunedTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Vertex<'a>(&'a PrunedTree, usize);
        struct Link<'a>(&'a PrunedTree, &'a Edge);
        struct Seq<I>(I);

        impl<I: Iterator<Item = T> + Clone, T: Serialize> Serialize for Seq<I> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_seq(self.0.clone())
            }
        }
        impl Serialize for Vertex<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let (p, v) = (self.0, self.1);
                let mut st = s.serialize_struct("VertexRecord", 4)?;
                st.serialize_field("id", p.id(v))?;
                st.serialize_field("jdeg", &p.base.jdeg(v))?;
                st.serialize_field("klt", p.klt(v))?;
                st.serialize_field("lc", &p.lc(v))?;
                st.end()
            }
        }
        impl Serialize for Link<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let (p, e) = (self.0, self.1);
                let mut st = s.serialize_struct("EdgeRecord", 3)?;
                st.serialize_field("u", p.id(e.u))?;
                st.serialize_field("v", p.id(e.v))?;
                st.serialize_field("slicing", &e.slicing.map(|(x, y)| [x, y]))?;
                st.end()
            }
        }

        let mut st = s.serialize_struct("TreeRecord", 2)?;
        st.serialize_field("vertices", &Seq((0..self.len()).map(|v| Vertex(self, v))))?;
        st.serialize_field("edges", &Seq(self.base.edges.iter().map(|e| Link(self, e))))?;
        st.end()
    }
}

// Borrowing twin of `TreeRecord` used when parsing.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord<'a> {
    #[serde(borrow)]
    vertices: Vec<RawVertex<'a>>,
    #[serde(borrow)]
    edges: Vec<RawEdge<'a>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex<'a> {
    #[serde(borrow)]
    id: Cow<'a, str>,
    jdeg: Frac12,
    #[serde(default)]
    klt: Vec<Frac12>,
    #[serde(default)]
    lc: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge<'a> {
    #[serde(borrow)]
    u: Cow<'a, str>,
    #[serde(borrow)]
    v: Cow<'a, str>,
    #[serde(default)]
    slicing: Option<[Frac12; 2]>,
}

impl RawRecord<'_> {
    fn build(self) -> Result<PrunedTree> {
        let vertices = self
            .vertices
            .into_iter()
            .map(|v| (v.id, v.jdeg, (v.klt, v.lc)))
            .collect();
        let edges = self
            .edges
            .into_iter()
            .map(|e| (e.u, e.v, e.slicing.map(|[x, y]| (x, y))))
            .collect();
        let (base, marks) = SlicedTree::assemble(vertices, edges)?;
        let (klt, lc) = marks.into_iter().unzip();
        PrunedTree::new(base, klt, lc)
    }
}

impl<'de> Deserialize<'de> for PrunedTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        RawRecord::deserialize(d)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}

impl SlicedTree {
    pub fn to_json(&self) -> String {
        PrunedTree::from(self.clone()).to_json()
    }

    /// Parses a tree record; markings must be absent.
    pub fn from_json(s: &str) -> Result<Self> {
        let p = PrunedTree::from_json(s)?;
        if p.is_marked() {
            return Err(Error::InvalidTree("sliced tree carries markings".into()));
        }
        Ok(p.base)
    }
}

/// JSON interchange form shared by sliced and pruned trees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRecord {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub jdeg: Frac12,
    #[serde(default)]
    pub klt: Vec<Frac12>,
    #[serde(default)]
    pub lc: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    #[serde(default)]
    pub slicing: Option<[Frac12; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Violation {
    EdgeCount { vertices: usize, edges: usize },
    DuplicateEdge { u: String, v: String },
    Disconnected { unreachable: Vec<String> },
    NegativeJdeg { vertex: String, jdeg: Frac12 },
    BadSlicing { u: String, v: String, pair: [Frac12; 2] },
    NonIntegral { vertex: String, total: Frac12 },
    BadKltMarking { vertex: String, value: Frac12 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn new(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| serde_json::to_string(v).unwrap_or_default())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Canonical encoding of a decorated tree: equal keys iff isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalKey(String);

impl CanonicalKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn vertex_label(jdeg: Frac12, klt: &[Frac12], lc: u32) -> String {
    let klt: Vec<String> = klt.iter().map(|t| t.to_string()).collect();
    format!("{jdeg};{};{lc}", klt.join(" "))
}

/// Centroids by vertex count (one or two).
pub(crate) fn centroids(t: &SlicedTree) -> Vec<usize> {
    let n = t.len();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[0] = true;
    order.push(0);
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        for (y, _, _) in t.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                order.push(y);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &x in order.iter().rev() {
        if parent[x] != usize::MAX {
            size[parent[x]] += size[x];
        }
    }
    let mut best = usize::MAX;
    let mut out = Vec::new();
    for x in 0..n {
        let mut heaviest = n - size[x];
        for (y, _, _) in t.neighbors(x) {
            if parent[y] == x {
                heaviest = heaviest.max(size[y]);
            }
        }
        if heaviest < best {
            best = heaviest;
            out.clear();
        }
        if heaviest == best {
            out.push(x);
        }
    }
    out
}

// AHU encoding rooted at a centroid; for two centroids the smaller code wins.
fn canonical_key_with(t: &SlicedTree, label: &dyn Fn(usize) -> String) -> CanonicalKey {
    fn encode(t: &SlicedTree, v: usize, parent: usize, label: &dyn Fn(usize) -> String) -> String {
        let mut children: Vec<String> = t
            .incident(v)
            .filter(|e| e.other(v) != parent)
            .map(|e| {
                let w = e.other(v);
                let edge = match e.slicing() {
                    Some(_) => format!("{}:{}", e.value_at(v), e.value_at(w)),
                    None => "-".to_string(),
                };
                format!("{edge}={}", encode(t, w, v, label))
            })
            .collect();
        children.sort_unstable();
        format!("({}[{}])", label(v), children.join(","))
    }
    let code = centroids(t)
        .into_iter()
        .map(|c| encode(t, c, usize::MAX, label))
        .min()
        .unwrap_or_default();
    CanonicalKey(code)
}

impl SlicedTree {
    /// Builds from vertex indices; `ids` must already be sorted.
    pub(crate) fn from_indexed(
        ids: Vec<String>,
        jdeg: Vec<Frac12>,
        edges: impl IntoIterator<Item = (usize, usize, Option<(Frac12, Frac12)>)>,
    ) -> SlicedTree {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let edges = edges
            .into_iter()
            .map(|(a, b, s)| {
                if a < b {
                    Edge {
                        u: a,
                        v: b,
                        slicing: s,
                    }
                } else {
                    Edge {
                        u: b,
                        v: a,
                        slicing: s.map(|(x, y)| (y, x)),
                    }
                }
            })
            .collect();
        SlicedTree::from_parts(ids, jdeg, edges)
    }
}

/// Zero-padded ids `v00, v01, ...` that sort in index order.
pub(crate) fn numbered_ids(n: usize) -> Vec<String> {
    static SHORT: OnceLock<Vec<String>> = OnceLock::new();
    if n <= 100 {
        let short = SHORT.get_or_init(|| (0..100).map(|i| format!("v{i:02}")).collect());
        return short[..n].to_vec();
    }
    let width = (n - 1).to_string().len();
    (0..n).map(|i| format!("v{i:0width$}")).collect()
}

struct KeyParser<'a> {
    s: &'a str,
    pos: usize,
}

struct Decoded {
    jdeg: Vec<Frac12>,
    klt: Vec<Vec<Frac12>>,
    lc: Vec<u32>,
    edges: Vec<(usize, usize, Slicing)>,
}

impl<'a> KeyParser<'a> {
    fn fail(&self, what: &str) -> Error {
        Error::InvalidTree(format!("bad canonical key at byte {}: {what}", self.pos))
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.s.as_bytes().get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(&format!("expected {:?}", c as char)))
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.as_bytes().get(self.pos).copied()
    }

    fn until(&mut self, stops: &[u8]) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if stops.contains(&c) {
                break;
            }
            self.pos += 1;
        }
        &self.s[start..self.pos]
    }

    fn frac(&mut self, stops: &[u8]) -> Result<Frac12> {
        let tok = self.until(stops);
        tok.parse()
            .map_err(|_| self.fail(&format!("bad fraction {tok:?}")))
    }

    fn node(&mut self, out: &mut Decoded) -> Result<usize> {
        self.eat(b'(')?;
        let v = out.jdeg.len();
        out.jdeg.push(self.frac(b";")?);
        self.eat(b';')?;
        let mut klt = Vec::new();
        for x in self.until(b";").split(' ').filter(|x| !x.is_empty()) {
            klt.push(x.parse::<Frac12>()?);
        }
        out.klt.push(klt);
        self.eat(b';')?;
        let lc = self.until(b"[");
        out.lc.push(lc.parse().map_err(|_| self.fail("bad lc count"))?);
        self.eat(b'[')?;
        if self.peek() != Some(b']') {
            loop {
                let slicing =
                    if self.peek() == Some(b'-') && self.s.as_bytes().get(self.pos + 1) == Some(&b'=') {
                        self.pos += 1;
                        None
                    } else {
                        let a = self.frac(b":")?;
                        self.eat(b':')?;
                        let b = self.frac(b"=")?;
                        Some((a, b))
                    };
                self.eat(b'=')?;
                let w = self.node(out)?;
                out.edges.push((v, w, slicing));
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(b']')?;
        self.eat(b')')?;
        Ok(v)
    }
}

impl PrunedTree {
    /// Rebuilds a tree from its canonical key, numbering vertices in
    /// preorder of the encoding.
    pub fn from_canonical_key(key: &CanonicalKey) -> Result<PrunedTree> {
        let mut p = KeyParser {
            s: key.as_str(),
            pos: 0,
        };
        let n = key.as_str().bytes().filter(|&c| c == b'(').count();
        let mut d = Decoded {
            jdeg: Vec::with_capacity(n),
            klt: Vec::with_capacity(n),
            lc: Vec::with_capacity(n),
            edges: Vec::with_capacity(n.saturating_sub(1)),
        };
        p.node(&mut d)?;
        if p.pos != p.s.len() {
            return Err(p.fail("trailing input"));
        }
        let ids = numbered_ids(d.jdeg.len());
        let base = SlicedTree::from_indexed(ids, d.jdeg, d.edges);
        PrunedTree::new(base, d.klt, d.lc)
    }
}

impl CanonicalKey {
    /// Wraps a string without checking it; see [`PrunedTree::from_canonical_key`].
    pub fn from_raw(s: String) -> Self {
        CanonicalKey(s)
    }
}

/// Small fluent builder, mostly for tests and examples.
#[derive(Default, Clone, Debug)]
pub struct TreeBuilder {
    vertices: Vec<(String, Frac12)>,
    edges: Vec<EdgeSpec>,
    klt: Vec<(String, Frac12)>,
    lc: Vec<String>,
}

fn frac(s: &str) -> Frac12 {
    s.parse().unwrap_or_else(|e| panic!("builder literal {s:?}: {e}"))
}

impl TreeBuilder {
    pub fn vertex(mut self, id: &str, jdeg: &str) -> Self {
        self.vertices.push((id.to_string(), frac(jdeg)));
        self
    }

    pub fn edge(mut self, u: &str, v: &str) -> Self {
        self.edges.push((u.to_string(), v.to_string(), None));
        self
    }

    /// Sliced edge with value `at_u` at `u` and `at_v` at `v`.
    pub fn sliced(mut self, u: &str, v: &str, at_u: &str, at_v: &str) -> Self {
        self.edges
            .push((u.to_string(), v.to_string(), Some((frac(at_u), frac(at_v)))));
        self
    }

    pub fn klt(mut self, v: &str, t: &str) -> Self {
        self.klt.push((v.to_string(), frac(t)));
        self
    }

    pub fn lc(mut self, v: &str) -> Self {
        self.lc.push(v.to_string());
        self
    }

    pub fn sliced_tree(self) -> Result<SlicedTree> {
        SlicedTree::new(self.vertices, self.edges)
    }

    pub fn pruned_tree(self) -> Result<PrunedTree> {
        let (klt_marks, lc_marks) = (self.klt, self.lc);
        let base = SlicedTree::new(self.vertices, self.edges)?;
        let mut tree = PrunedTree::from(base);
        for (id, t) in klt_marks {
            let v = tree.index_of(&id).ok_or(Error::UnknownVertex(id))?;
            tree.add_klt(v, t);
        }
        for id in lc_marks {
            let v = tree.index_of(&id).ok_or(Error::UnknownVertex(id))?;
            tree.add_lc(v);
        }
        Ok(tree)
    }
}
