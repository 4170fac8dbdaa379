//! Exhaustive enumeration, up to isomorphism, of tsm-stable sliced trees and
//! stable pruned trees of a fixed height.
//!
//! Shapes are grown one leaf at a time and filtered by the least height a
//! vertex of each degree can carry. Each surviving shape is decorated by a
//! depth-first search over edge labels, jdeg residues and markings, with a
//! running budget. Shapes are independent, so they are decorated in
//! parallel and merged by canonical key.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frac::Frac12;
use crate::kodaira::KLT_TWELFTHS;
use crate::par::{self, ExecMode};
use crate::prune::{prune_final, prune_final_each, LeafPolicy};
use crate::tree::{numbered_ids, CanonicalKey, PrunedTree, SlicedTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Sliced,
    Pruned,
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sliced" => Ok(Target::Sliced),
            "pruned" => Ok(Target::Pruned),
            _ => Err(Error::InvalidTree(format!("unknown target {s:?}"))),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Sliced => "sliced",
            Target::Pruned => "pruned",
        })
    }
}

pub const DEFAULT_MAX_ENTRIES: usize = 10_000;
pub const DEFAULT_MAX_VERTICES: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationParams {
    pub height: u32,
    pub target: Target,
    pub max_entries: usize,
    pub max_vertices: usize,
    pub mode: ExecMode,
}

impl EnumerationParams {
    pub fn new(height: u32, target: Target) -> Self {
        EnumerationParams {
            height,
            target,
            max_entries: DEFAULT_MAX_ENTRIES,
            max_vertices: DEFAULT_MAX_VERTICES,
            mode: ExecMode::default(),
        }
    }

    pub fn max_entries(mut self, k: usize) -> Self {
        self.max_entries = k;
        self
    }

    pub fn max_vertices(mut self, k: usize) -> Self {
        self.max_vertices = k;
        self
    }

    pub fn mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }
}

/// One tree of a census. The tree itself is stored as its key and decoded
/// on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusEntry {
    pub key: CanonicalKey,
    pub vertices: usize,
    pub leaves: usize,
    pub profile: String,
    /// Reserved for geometric realizability; never filled in here.
    pub realizable: Option<bool>,
}

impl CensusEntry {
    fn new(key: CanonicalKey, tree: &PrunedTree) -> Self {
        CensusEntry {
            vertices: tree.len(),
            leaves: tree.base().leaves().count(),
            profile: marking_profile(tree),
            realizable: None,
            key,
        }
    }

    pub fn tree(&self) -> Result<PrunedTree> {
        PrunedTree::from_canonical_key(&self.key)
    }

    pub fn sliced_tree(&self) -> Result<SlicedTree> {
        Ok(self.tree()?.base().clone())
    }
}

impl Serialize for CensusEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tree = self.tree().map_err(serde::ser::Error::custom)?;
        let mut st = s.serialize_struct("CensusEntry", 6)?;
        st.serialize_field("key", &self.key)?;
        st.serialize_field("vertices", &self.vertices)?;
        st.serialize_field("leaves", &self.leaves)?;
        st.serialize_field("marking_profile", &self.profile)?;
        st.serialize_field("realizable", &self.realizable)?;
        st.serialize_field("tree", &tree.to_record())?;
        st.end()
    }
}

/// `"unmarked"`, or e.g. `"klt=1/6,1/2 lc=1"`.
pub fn marking_profile(p: &PrunedTree) -> String {
    let mut klt: Vec<Frac12> = (0..p.len()).flat_map(|v| p.klt(v).iter().copied()).collect();
    klt.sort();
    let lc: u32 = (0..p.len()).map(|v| p.lc(v)).sum();
    if klt.is_empty() && lc == 0 {
        return "unmarked".into();
    }
    let klt: Vec<String> = klt.iter().map(|t| t.to_string()).collect();
    format!("klt={} lc={lc}", klt.join(","))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusCounts {
    pub by_vertices: BTreeMap<usize, usize>,
    pub by_leaves: BTreeMap<usize, usize>,
    pub by_marking_profile: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub height: u32,
    pub target: Target,
    /// False when a cap stopped the search.
    pub complete: bool,
    /// Every tree with at most this many vertices is present.
    pub complete_through_vertices: usize,
    pub total: usize,
    pub counts: CensusCounts,
    /// Sorted by key.
    pub entries: Vec<CensusEntry>,
}

impl Census {
    fn assemble(
        height: u32,
        target: Target,
        complete: bool,
        through: usize,
        mut entries: Vec<CensusEntry>,
    ) -> Census {
        entries.sort_by(|a, b| a.key.cmp(&b.key));
        let mut counts = CensusCounts {
            by_vertices: BTreeMap::new(),
            by_leaves: BTreeMap::new(),
            by_marking_profile: BTreeMap::new(),
        };
        for e in &entries {
            *counts.by_vertices.entry(e.vertices).or_default() += 1;
            *counts.by_leaves.entry(e.leaves).or_default() += 1;
            *counts.by_marking_profile.entry(e.profile.clone()).or_default() += 1;
        }
        Census {
            height,
            target,
            complete,
            complete_through_vertices: through,
            total: entries.len(),
            counts,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, key: &CanonicalKey) -> Option<&CensusEntry> {
        self.entries
            .binary_search_by(|e| e.key.cmp(key))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn contains(&self, key: &CanonicalKey) -> bool {
        self.find(key).is_some()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// No tree of the target kind and this height has more vertices.
///
/// Leaves of a sliced tree carry jdeg at least 1/6, degree-two vertices at
/// least 1/12, and there are fewer branch vertices than leaves. In a stable
/// pruned tree every weight is at least 1/12 and the weights sum to `n - 2`.
pub fn vertex_bound(height: u32, target: Target) -> usize {
    let n = height as usize;
    match target {
        Target::Sliced if n == 0 => 0,
        Target::Sliced => 12 * n - 2,
        Target::Pruned if n <= 2 => 0,
        Target::Pruned => 12 * (n - 2),
    }
}

/// Least `jdeg + sum T + |F|`, in twelfths, at a vertex of degree `deg`.
///
/// For pruned trees the weight must be positive and the height at a vertex
/// is congruent to minus its slicings, so a leaf needs more than 1, in fact
/// at least 7/6, and a lone vertex at least 3.
fn min_height(target: Target, deg: usize) -> i64 {
    match (target, deg) {
        (Target::Sliced, 0) => 12,
        (Target::Sliced, 1) => 2,
        (Target::Sliced, 2) => 1,
        (Target::Sliced, _) => 0,
        (Target::Pruned, 0) => 36,
        (Target::Pruned, 1) => 14,
        (Target::Pruned, 2) => 1,
        (Target::Pruned, _) => 0,
    }
}

#[derive(Clone, Debug)]
struct Shape {
    adj: Vec<Vec<usize>>,
}

impl Shape {
    fn lower_bound(&self, target: Target) -> i64 {
        self.adj.iter().map(|a| min_height(target, a.len())).sum()
    }

    fn code(&self) -> String {
        fn enc(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
            let mut kids: Vec<String> = adj[v]
                .iter()
                .filter(|&&w| w != parent)
                .map(|&w| enc(adj, w, v))
                .collect();
            kids.sort_unstable();
            format!("({})", kids.concat())
        }
        shape_centroids(&self.adj)
            .into_iter()
            .map(|c| enc(&self.adj, c, usize::MAX))
            .min()
            .unwrap_or_default()
    }
}

fn shape_centroids(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![0];
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        i += 1;
        for &y in &adj[x] {
            if y != parent[x] {
                parent[y] = x;
                order.push(y);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &x in order.iter().skip(1).rev() {
        size[parent[x]] += size[x];
    }
    let heaviest: Vec<usize> = (0..n)
        .map(|x| {
            adj[x]
                .iter()
                .filter(|&&y| y != parent[x])
                .map(|&y| size[y])
                .chain(std::iter::once(n - size[x]))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let best = *heaviest.iter().min().unwrap_or(&0);
    (0..n).filter(|&x| heaviest[x] == best).collect()
}

/// Shapes on one more vertex, one per isomorphism class, that pass `keep`.
fn grow(shapes: &[Shape], keep: impl Fn(&Shape) -> bool) -> Vec<Shape> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in shapes {
        let n = s.adj.len();
        for v in 0..n {
            let mut adj = s.adj.clone();
            adj.push(vec![v]);
            adj[v].push(n);
            let t = Shape { adj };
            if keep(&t) && seen.insert(t.code()) {
                out.push(t);
            }
        }
    }
    out.sort_by_cached_key(Shape::code);
    out
}

/// Klt multisets (in twelfths, ascending) grouped by their sum.
fn klt_multisets(max_sum: i64) -> Vec<Vec<Vec<i64>>> {
    let mut by_sum = vec![Vec::new(); max_sum as usize + 1];
    fn rec(start: usize, sum: i64, cur: &mut Vec<i64>, max: i64, out: &mut Vec<Vec<Vec<i64>>>) {
        out[sum as usize].push(cur.clone());
        for (k, &t) in KLT_TWELFTHS.iter().enumerate().skip(start) {
            if sum + t <= max {
                cur.push(t);
                rec(k, sum + t, cur, max, out);
                cur.pop();
            }
        }
    }
    rec(0, 0, &mut Vec::new(), max_sum, &mut by_sum);
    by_sum
}

struct Shared<'a> {
    target: Target,
    budget: i64,
    klt_by_sum: &'a [Vec<Vec<i64>>],
    // Printed form of k/12, indexed by k.
    frac: &'a [String],
    found: &'a AtomicUsize,
    max_entries: usize,
    abort: &'a AtomicBool,
}

// Edge labels: the value at the parent end, or UNSLICED.
const UNSLICED: i64 = -1;
const LABELS: [i64; 8] = [UNSLICED, 2, 3, 4, 6, 8, 9, 10];

struct Decorator<'a> {
    sh: &'a Shared<'a>,
    n: usize,
    adj: Vec<Vec<usize>>,
    centroids: Vec<usize>,
    order: Vec<usize>,
    parent: Vec<usize>,
    kids: Vec<Vec<usize>>,
    deg: Vec<usize>,
    suffix_min: Vec<i64>,
    ids: Vec<String>,
    lab: Vec<i64>,
    jd: Vec<i64>,
    klt: Vec<&'a [i64]>,
    lc: Vec<i64>,
    used: i64,
    seen: HashSet<CanonicalKey>,
    entries: Vec<CensusEntry>,
}

impl<'a> Decorator<'a> {
    fn new(sh: &'a Shared<'a>, shape: &Shape) -> Self {
        let n = shape.adj.len();
        let mut order = vec![0];
        let mut parent = vec![usize::MAX; n];
        let mut kids = vec![Vec::new(); n];
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for &y in &shape.adj[x] {
                if y != parent[x] {
                    parent[y] = x;
                    kids[x].push(y);
                    order.push(y);
                }
            }
        }
        let deg: Vec<usize> = shape.adj.iter().map(Vec::len).collect();
        let mut suffix_min = vec![0; n + 1];
        for k in (0..n).rev() {
            suffix_min[k] = suffix_min[k + 1] + min_height(sh.target, deg[order[k]]);
        }
        Decorator {
            sh,
            n,
            adj: shape.adj.clone(),
            centroids: shape_centroids(&shape.adj),
            order,
            parent,
            kids,
            deg,
            suffix_min,
            ids: numbered_ids(n),
            lab: vec![UNSLICED; n],
            jd: vec![0; n],
            klt: vec![&[]; n],
            lc: vec![0; n],
            used: 0,
            seen: HashSet::new(),
            entries: Vec::new(),
        }
    }

    fn visit(&mut self, i: usize) {
        if self.sh.abort.load(Ordering::Relaxed) {
            return;
        }
        if i == self.n {
            self.emit();
            return;
        }
        let v = self.order[i];
        let e_in = match self.lab[v] {
            _ if i == 0 => 0,
            UNSLICED => 0,
            t => 12 - t,
        };
        self.assign(i, v, 0, e_in);
    }

    fn assign(&mut self, i: usize, v: usize, k: usize, s: i64) {
        if k == self.kids[v].len() {
            self.decorate(i, v, s);
            return;
        }
        let c = self.kids[v][k];
        for t in LABELS {
            self.lab[c] = t;
            self.assign(i, v, k + 1, s + t.max(0));
        }
        self.lab[c] = UNSLICED;
    }

    fn decorate(&mut self, i: usize, v: usize, s: i64) {
        let last = i + 1 == self.n;
        let avail = self.sh.budget - self.used - self.suffix_min[i + 1];
        let min_h = min_height(self.sh.target, self.deg[v]);
        match self.sh.target {
            Target::Sliced => {
                let mut jdeg = (-s).rem_euclid(12);
                while jdeg <= avail {
                    if jdeg >= min_h.min(1) && (!last || jdeg == avail) {
                        self.place(i, v, jdeg, &[], 0);
                    }
                    jdeg += 12;
                }
            }
            Target::Pruned => {
                // Integrality here includes the klt-markings.
                let sh = self.sh;
                let mut f = 0;
                while 12 * f <= avail {
                    for sum in 0..=avail - 12 * f {
                        let r = (-(s + sum)).rem_euclid(12);
                        let mut jdeg = r;
                        while 12 * f + sum + jdeg <= avail {
                            let h = 12 * f + sum + jdeg;
                            if h >= min_h && (!last || h == avail) {
                                for t in &sh.klt_by_sum[sum as usize] {
                                    self.place(i, v, jdeg, t, f);
                                }
                            }
                            jdeg += 12;
                        }
                    }
                    f += 1;
                }
            }
        }
    }

    fn place(&mut self, i: usize, v: usize, jdeg: i64, klt: &'a [i64], lc: i64) {
        let h = jdeg + klt.iter().sum::<i64>() + 12 * lc;
        self.jd[v] = jdeg;
        self.klt[v] = klt;
        self.lc[v] = lc;
        self.used += h;
        self.visit(i + 1);
        self.used -= h;
    }

    // Value of the edge x-y at x, if sliced.
    fn edge_value(&self, x: usize, y: usize) -> Option<i64> {
        let (c, at_parent) = if self.parent[y] == x {
            (y, true)
        } else {
            (x, false)
        };
        match self.lab[c] {
            UNSLICED => None,
            t if at_parent => Some(t),
            t => Some(12 - t),
        }
    }

    // Same string as `PrunedTree::canonical_key`, without building the tree.
    fn encode(&self, v: usize, from: usize, labels: &[String], out: &mut String) {
        let frac = self.sh.frac;
        let mut kids: Vec<String> = self.adj[v]
            .iter()
            .filter(|&&w| w != from)
            .map(|&w| {
                let mut s = match self.edge_value(v, w) {
                    Some(t) => format!("{}:{}", frac[t as usize], frac[12 - t as usize]),
                    None => "-".to_string(),
                };
                s.push('=');
                self.encode(w, v, labels, &mut s);
                s
            })
            .collect();
        kids.sort_unstable();
        out.push('(');
        out.push_str(&labels[v]);
        out.push('[');
        out.push_str(&kids.join(","));
        out.push_str("])");
    }

    fn key(&self) -> CanonicalKey {
        let frac = self.sh.frac;
        let labels: Vec<String> = (0..self.n)
            .map(|v| {
                let klt: Vec<&str> = self.klt[v].iter().map(|&t| frac[t as usize].as_str()).collect();
                format!("{};{};{}", frac[self.jd[v] as usize], klt.join(" "), self.lc[v])
            })
            .collect();
        let code = self
            .centroids
            .iter()
            .map(|&c| {
                let mut s = String::new();
                self.encode(c, usize::MAX, &labels, &mut s);
                s
            })
            .min()
            .unwrap_or_default();
        CanonicalKey::from_raw(code)
    }

    fn tree(&self) -> PrunedTree {
        let jdeg = self.jd.iter().map(|&t| Frac12::from_twelfths(t)).collect();
        let edges = (0..self.n).filter(|&c| c != self.order[0]).map(|c| {
            let s = match self.lab[c] {
                UNSLICED => None,
                t => Some((Frac12::from_twelfths(t), Frac12::from_twelfths(12 - t))),
            };
            (self.parent[c], c, s)
        });
        let base = SlicedTree::from_indexed(self.ids.clone(), jdeg, edges);
        let klt = self
            .klt
            .iter()
            .map(|t| t.iter().map(|&x| Frac12::from_twelfths(x)).collect())
            .collect();
        let lc = self.lc.iter().map(|&f| f as u32).collect();
        PrunedTree::new(base, klt, lc).expect("lists match the vertex count")
    }

    fn entry(&self, key: CanonicalKey) -> CensusEntry {
        let frac = self.sh.frac;
        let mut klt: Vec<i64> = self.klt.iter().flat_map(|t| t.iter().copied()).collect();
        klt.sort_unstable();
        let lc: i64 = self.lc.iter().sum();
        let profile = if klt.is_empty() && lc == 0 {
            "unmarked".to_string()
        } else {
            let klt: Vec<&str> = klt.iter().map(|&t| frac[t as usize].as_str()).collect();
            format!("klt={} lc={lc}", klt.join(","))
        };
        CensusEntry {
            key,
            vertices: self.n,
            leaves: self.adj.iter().filter(|a| a.len() == 1).count(),
            profile,
            realizable: None,
        }
    }

    fn emit(&mut self) {
        let key = self.key();
        if self.seen.contains(&key) {
            return;
        }
        let entry = self.entry(key.clone());
        if cfg!(test) {
            let tree = self.tree();
            assert_eq!(key, tree.canonical_key());
            assert_eq!(entry, CensusEntry::new(key.clone(), &tree));
        }
        self.seen.insert(key);
        self.entries.push(entry);
        if self.sh.found.fetch_add(1, Ordering::Relaxed) + 1 > self.sh.max_entries {
            self.sh.abort.store(true, Ordering::Relaxed);
        }
    }
}

/// Every tree of the requested kind and height, once each.
///
/// Stops with [`Error::CapExceeded`] when more than `max_entries` trees
/// exist or trees may have more than `max_vertices` vertices; the error
/// carries every tree found on the vertex counts that were finished.
pub fn enumerate(params: &EnumerationParams) -> Result<Census> {
    let EnumerationParams {
        height,
        target,
        max_entries,
        max_vertices,
        mode,
    } = *params;
    if height == 0 {
        return Err(Error::HeightTooSmall { n: 0, min: 1 });
    }
    let budget = 12 * height as i64;
    let bound = vertex_bound(height, target);
    let top = bound.min(max_vertices);
    let klt_by_sum = klt_multisets(if target == Target::Pruned { budget } else { 0 });
    let frac: Vec<String> = (0..=budget.max(12))
        .map(|t| Frac12::from_twelfths(t).to_string())
        .collect();
    let found = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let shared = Shared {
        target,
        budget,
        klt_by_sum: &klt_by_sum,
        frac: &frac,
        found: &found,
        max_entries,
        abort: &abort,
    };

    let mut entries = Vec::new();
    let mut shapes = vec![Shape {
        adj: vec![Vec::new()],
    }];
    for nv in 1..=top {
        if nv > 1 {
            // Adding a leaf never lowers the bound once there are two vertices.
            shapes = grow(&shapes, |s| s.adj.len() <= 2 || s.lower_bound(target) <= budget);
        }
        let todo: Vec<&Shape> = shapes
            .iter()
            .filter(|s| s.lower_bound(target) <= budget)
            .collect();
        let shared = &shared;
        let batches = par::map(mode, todo, |s| {
            let mut d = Decorator::new(shared, s);
            d.visit(0);
            d.entries
        });
        if abort.load(Ordering::Relaxed) {
            let partial = Census::assemble(height, target, false, nv - 1, entries);
            return Err(Error::CapExceeded {
                reason: format!(
                    "more than {max_entries} entries; complete through {} vertices",
                    nv - 1
                ),
                partial: Box::new(partial),
            });
        }
        entries.extend(batches.into_iter().flatten());
    }
    if top < bound {
        let partial = Census::assemble(height, target, false, top, entries);
        return Err(Error::CapExceeded {
            reason: format!("trees may have up to {bound} vertices; stopped at {top}"),
            partial: Box::new(partial),
        });
    }
    Ok(Census::assemble(height, target, true, top, entries))
}

pub fn enumerate_sliced(params: &EnumerationParams) -> Result<Census> {
    enumerate(&EnumerationParams {
        target: Target::Sliced,
        ..params.clone()
    })
}

pub fn enumerate_pruned(params: &EnumerationParams) -> Result<Census> {
    enumerate(&EnumerationParams {
        target: Target::Pruned,
        ..params.clone()
    })
}

/// Result of pruning one census entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PruneOutcome {
    Pruned { key: CanonicalKey },
    Failed { error: String, message: String },
}

impl PruneOutcome {
    fn of(r: Result<PrunedTree>) -> Self {
        match r {
            Ok(t) => PruneOutcome::Pruned {
                key: t.canonical_key(),
            },
            Err(e) => PruneOutcome::Failed {
                error: e.kind().to_string(),
                message: e.to_string(),
            },
        }
    }

    pub fn key(&self) -> Option<&CanonicalKey> {
        match self {
            PruneOutcome::Pruned { key } => Some(key),
            PruneOutcome::Failed { .. } => None,
        }
    }
}

/// Image of every entry under pruning with the default policy.
pub fn prune_census(census: &Census, mode: ExecMode) -> BTreeMap<CanonicalKey, PruneOutcome> {
    let items: Vec<&CensusEntry> = census.entries.iter().collect();
    let outcomes = par::map(mode, items, |e| {
        let out = PruneOutcome::of(e.tree().and_then(|t| prune_final(t, &LeafPolicy::LowestId)));
        (e.key.clone(), out)
    });
    outcomes.into_iter().collect()
}

/// Pruning results of one tree that disagree across leaf orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub input: CanonicalKey,
    pub results: Vec<(String, PruneOutcome)>,
}

/// The policies compared by [`confluence_of`]: lowest id, rounds, and
/// `random_orders` seeded random orders.
pub fn confluence_policies(random_orders: usize, seed: u64) -> Vec<LeafPolicy> {
    let mut out = vec![LeafPolicy::LowestId, LeafPolicy::Rounds];
    out.extend(
        (0..random_orders as u64).map(|k| LeafPolicy::Random(seed.wrapping_mul(1_000_003).wrapping_add(k))),
    );
    out
}

/// Common pruning result across the policies, or the disagreement.
pub fn confluence_of(
    tree: &PrunedTree,
    policies: &[LeafPolicy],
) -> std::result::Result<PruneOutcome, Divergence> {
    let raw = prune_final_each(tree, policies);
    // Vertex ids survive pruning, so identical trees need only one key.
    if let Ok(first) = &raw[0] {
        if raw.iter().all(|r| matches!(r, Ok(t) if t == first)) {
            return Ok(PruneOutcome::Pruned {
                key: first.canonical_key(),
            });
        }
    }
    let results: Vec<(String, PruneOutcome)> = policies
        .iter()
        .zip(raw)
        .map(|(p, r)| (p.to_string(), PruneOutcome::of(r)))
        .collect();
    if results.windows(2).all(|w| w[0].1 == w[1].1) {
        Ok(results
            .into_iter()
            .next()
            .map(|r| r.1)
            .expect("at least one policy"))
    } else {
        Err(Divergence {
            input: tree.canonical_key(),
            results,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfluenceReport {
    pub checked: usize,
    pub policies: usize,
    pub divergences: Vec<Divergence>,
}

/// Runs [`confluence_of`] on every census entry.
pub fn check_confluence(census: &Census, random_orders: usize, mode: ExecMode) -> ConfluenceReport {
    let items: Vec<(usize, &CensusEntry)> = census.entries.iter().enumerate().collect();
    let results = par::map(mode, items, |(i, e)| {
        let policies = confluence_policies(random_orders, i as u64);
        match e.tree() {
            Ok(t) => confluence_of(&t, &policies).err(),
            Err(err) => Some(Divergence {
                input: e.key.clone(),
                results: vec![("decode".into(), PruneOutcome::of(Err(err)))],
            }),
        }
    });
    ConfluenceReport {
        checked: census.len(),
        policies: 2 + random_orders,
        divergences: results.into_iter().flatten().collect(),
    }
}

/// A random tsm-stable sliced tree of the given height with at most
/// `max_vertices` vertices.
pub fn random_sliced_tree(height: u32, max_vertices: usize, rng: &mut impl Rng) -> SlicedTree {
    assert!(height >= 1 && max_vertices >= 1);
    let budget = 12 * height as i64;
    loop {
        let n = rng.gen_range(1..=max_vertices);
        let parent: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
        let labels: Vec<i64> = (1..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    UNSLICED
                } else {
                    KLT_TWELFTHS[rng.gen_range(0..KLT_TWELFTHS.len())]
                }
            })
            .collect();
        let mut deg = vec![0usize; n];
        let mut slicing_sum = vec![0i64; n];
        for (k, (&p, &t)) in parent.iter().zip(&labels).enumerate() {
            let c = k + 1;
            deg[p] += 1;
            deg[c] += 1;
            if t != UNSLICED {
                slicing_sum[p] += t;
                slicing_sum[c] += 12 - t;
            }
        }
        let mut jd: Vec<i64> = slicing_sum.iter().map(|s| (-s).rem_euclid(12)).collect();
        for v in 0..n {
            if jd[v] == 0 && deg[v] < 3 {
                jd[v] = 12;
            }
        }
        let used: i64 = jd.iter().sum();
        if used > budget {
            continue;
        }
        for _ in 0..(budget - used) / 12 {
            jd[rng.gen_range(0..n)] += 12;
        }
        let edges = parent.iter().zip(&labels).enumerate().map(|(k, (&p, &t))| {
            let s = (t != UNSLICED).then(|| (Frac12::from_twelfths(t), Frac12::from_twelfths(12 - t)));
            (p, k + 1, s)
        });
        let jdeg = jd.into_iter().map(Frac12::from_twelfths).collect();
        return SlicedTree::from_indexed(numbered_ids(n), jdeg, edges);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::kodaira::SlicingPair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    #[test]
    fn free_tree_counts() {
        // Number of unlabeled trees on 1..=10 vertices.
        let expected = [1, 1, 1, 2, 3, 6, 11, 23, 47, 106];
        let mut shapes = vec![Shape {
            adj: vec![Vec::new()],
        }];
        let mut got = vec![1];
        for _ in 1..10 {
            shapes = grow(&shapes, |_| true);
            got.push(shapes.len());
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn klt_multiset_index() {
        let by_sum = klt_multisets(12);
        assert_eq!(by_sum[0], vec![Vec::<i64>::new()]);
        assert!(by_sum[12].contains(&vec![2, 10]));
        assert!(by_sum[12].contains(&vec![6, 6]));
        assert!(by_sum[1].is_empty());
    }

    #[test]
    fn low_heights() {
        let c = enumerate_pruned(&EnumerationParams::new(2, Target::Pruned)).unwrap();
        assert!(c.is_empty() && c.complete);
        let c = enumerate_sliced(&EnumerationParams::new(1, Target::Sliced).max_entries(1_000_000)).unwrap();
        assert!(c.complete);
        assert!(c.contains(
            &SlicedTree::builder()
                .vertex("x", "1")
                .sliced_tree()
                .unwrap()
                .canonical_key()
        ));
        for e in &c.entries {
            let t = e.sliced_tree().unwrap();
            assert!(t.validate().ok);
            assert!(t.is_tsm_stable().unwrap());
            assert_eq!(t.height(), Frac12::from_int(1));
        }
        assert!(enumerate(&EnumerationParams::new(0, Target::Sliced)).is_err());
    }

    #[test]
    fn height_one_sliced_by_brute_force() {
        // Two vertices: an unsliced edge needs integral jdeg >= 1 at both
        // ends, too much for height 1; a sliced edge (t, 1 - t) needs jdeg
        // 1 - t and t, which sums to 1. Seven orientations, up to swapping
        // the ends: 1/2 once, and 1/6, 1/4, 1/3 paired with their complements.
        let c = enumerate_sliced(&EnumerationParams::new(1, Target::Sliced).max_entries(1_000_000)).unwrap();
        assert_eq!(c.counts.by_vertices.get(&1), Some(&1));
        assert_eq!(c.counts.by_vertices.get(&2), Some(&4));
    }

    #[test]
    fn pruned_height_three_small_caps() {
        let p = EnumerationParams::new(3, Target::Pruned).max_entries(50);
        match enumerate(&p) {
            Err(Error::CapExceeded { partial, .. }) => {
                assert!(!partial.complete);
                assert!(partial.total <= 50);
            }
            other => panic!("expected a cap error, got {other:?}"),
        }
        let p = EnumerationParams::new(3, Target::Pruned)
            .max_entries(1_000_000)
            .max_vertices(3);
        match enumerate(&p) {
            Err(Error::CapExceeded { partial, .. }) => {
                assert_eq!(partial.complete_through_vertices, 3);
                let single = PrunedTree::from(SlicedTree::builder().vertex("x", "3").sliced_tree().unwrap());
                assert!(partial.contains(&single.canonical_key()));
                for e in &partial.entries {
                    let t = e.tree().unwrap();
                    assert!(t.validate().ok && t.is_stable());
                    assert_eq!(t.height(), Frac12::from_int(3));
                    assert_eq!(t.sum_weights(), Frac12::ONE);
                }
            }
            other => panic!("expected a cap error, got {other:?}"),
        }
    }

    // Every way to put markings, lc marks and jdeg on one or two vertices,
    // filtered only by the tree predicates.
    fn brute_pruned_h3(n: usize) -> BTreeSet<String> {
        fn multisets(from: usize, budget: i64, cur: &mut Vec<Frac12>, out: &mut Vec<(Vec<Frac12>, i64)>) {
            out.push((cur.clone(), budget));
            for (k, &t) in KLT_TWELFTHS.iter().enumerate().skip(from) {
                if t <= budget {
                    cur.push(Frac12::from_twelfths(t));
                    multisets(k, budget - t, cur, out);
                    cur.pop();
                }
            }
        }
        let mut marks = Vec::new();
        multisets(0, 36, &mut Vec::new(), &mut marks);
        let mut states = Vec::new();
        for (t, left) in &marks {
            for f in 0..=left / 12 {
                states.push((t.clone(), f as u32, left - 12 * f));
            }
        }
        let mut keys = BTreeSet::new();
        let mut keep = |p: PrunedTree| {
            if p.validate().ok && p.is_stable() && p.height() == Frac12::from_int(3) {
                keys.insert(p.canonical_key().as_str().to_string());
            }
        };
        if n == 1 {
            for (t, f, left) in &states {
                let base = SlicedTree::from_indexed(numbered_ids(1), vec![Frac12::from_twelfths(*left)], []);
                keep(PrunedTree::new(base, vec![t.clone()], vec![*f]).unwrap());
            }
            return keys;
        }
        let edges: Vec<Option<(Frac12, Frac12)>> = std::iter::once(None)
            .chain(SlicingPair::all().map(|p| Some((p.left(), p.right()))))
            .collect();
        for (t0, f0, left0) in &states {
            for (t1, f1, left1) in &states {
                let room = 36 - (36 - left0) - (36 - left1);
                if room < 0 {
                    continue;
                }
                for &e in &edges {
                    let (s0, s1) = e.map_or((0, 0), |(a, b)| (a.twelfths(), b.twelfths()));
                    for j0 in 0..=room {
                        // integrality at each end, counting markings
                        if (36 - left0 + j0 + s0) % 12 != 0 || (36 - left1 + room - j0 + s1) % 12 != 0 {
                            continue;
                        }
                        let jdeg = vec![Frac12::from_twelfths(j0), Frac12::from_twelfths(room - j0)];
                        let base = SlicedTree::from_indexed(numbered_ids(2), jdeg, [(0, 1, e)]);
                        keep(PrunedTree::new(base, vec![t0.clone(), t1.clone()], vec![*f0, *f1]).unwrap());
                    }
                }
            }
        }
        keys
    }

    #[test]
    fn pruned_small_trees_match_brute_force() {
        let p = EnumerationParams::new(3, Target::Pruned)
            .max_entries(1_000_000)
            .max_vertices(2);
        let partial = match enumerate(&p) {
            Err(Error::CapExceeded { partial, .. }) => partial,
            other => panic!("expected a cap error, got {other:?}"),
        };
        for n in 1..=2 {
            let got: BTreeSet<String> = partial
                .entries
                .iter()
                .filter(|e| e.vertices == n)
                .map(|e| e.key.as_str().to_string())
                .collect();
            assert_eq!(got, brute_pruned_h3(n), "{n} vertices");
        }
    }

    #[test]
    fn modes_agree() {
        let p = EnumerationParams::new(2, Target::Sliced)
            .max_entries(1_000_000)
            .max_vertices(5);
        let a = enumerate(&p.clone().mode(ExecMode::Sequential));
        let b = enumerate(&p.mode(ExecMode::Parallel));
        let (Err(Error::CapExceeded { partial: a, .. }), Err(Error::CapExceeded { partial: b, .. })) = (a, b)
        else {
            panic!("height 2 allows more than five vertices");
        };
        assert_eq!(a, b);
        let keys: HashSet<_> = a.entries.iter().map(|e| &e.key).collect();
        assert_eq!(keys.len(), a.len());
    }

    #[test]
    fn sliced_census_contains_the_six_chain() {
        let p = EnumerationParams::new(3, Target::Sliced)
            .max_entries(10_000_000)
            .max_vertices(6);
        let Err(Error::CapExceeded { partial, .. }) = enumerate(&p) else {
            panic!("height 3 allows more than six vertices");
        };
        let chain = examples::six_vertex_chain().canonical_key();
        assert!(partial.contains(&chain));
        assert!(partial.contains(
            &SlicedTree::builder()
                .vertex("x", "3")
                .sliced_tree()
                .unwrap()
                .canonical_key()
        ));
        let images = prune_census(&partial, ExecMode::Parallel);
        assert_eq!(
            images[&chain].key(),
            Some(&PrunedTree::from(examples::six_vertex_chain()).canonical_key())
        );
    }

    #[test]
    fn confluence_on_examples() {
        let policies = confluence_policies(5, 1);
        for t in [examples::height6_tree(), examples::height4_chain()] {
            assert!(confluence_of(&PrunedTree::from(t), &policies).is_ok());
        }
    }

    #[test]
    fn random_trees_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for h in 3..=5 {
            for _ in 0..200 {
                let t = random_sliced_tree(h, 12, &mut rng);
                assert!(t.validate().ok, "{:?}", t.validate());
                assert!(t.is_tsm_stable().unwrap());
                assert_eq!(t.height(), Frac12::from_int(h as i64));
            }
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(marking_profile(&examples::height6_tree_pruned()), "klt=1/6 lc=1");
        assert_eq!(
            marking_profile(&PrunedTree::from(examples::height6_tree())),
            "unmarked"
        );
    }
}
