//! Closed and punctured surfaces of positive genus: cut systems reducing a
//! closed surface to a labelled sphere, the counting lower bound, and the
//! explicit genus-1 and genus-2 labelled families.
//!
//! On a surface of genus one or two, a curve is recorded as a planar code
//! on the cut-open punctured sphere concatenated with a subset of reference
//! curves (`θ`, `θ1`, `θ2`, `θ3`, `ω`). Verification is structural: planar
//! parts must be disjoint, reference-flagged parts must respect the side
//! constraint that lets them be concatenated, and the edge/code assignment
//! must match the dual graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve_model::{disjoint, CurveCode, Side};
use crate::error::{Error, Result};
use crate::labelled_sphere::{binomial, fill_below, gen_lambda, plant_codes, recognize, LambdaFamily, RecognitionResult};
use crate::type_census::{
    enum_dual_graphs, for_each_labelled_tree, DualGraph, LabelledTree, TreeBuilder, DEFAULT_GENUS_CUTOFF,
};

/// Cotree edges of a BFS spanning tree, cut open into matched leaf pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSystem {
    pub graph: DualGraph,
    /// Indices into `graph.edges()`, ascending.
    pub cotree: Vec<usize>,
    /// Original leaves keep labels `1..=m`; cotree edge `k` (1-based) becomes
    /// leaves `m + 2k - 1` (at the lower endpoint) and `m + 2k`.
    pub tree: LabelledTree,
    pub matching: Vec<(u32, u32)>,
}

fn check_shape(g: &DualGraph) -> Result<()> {
    if !g.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

fn labelled_leaves(g: &DualGraph) -> Vec<(usize, u32)> {
    (0..g.vertex_count()).filter_map(|v| g.label(v).map(|l| (v, l))).collect()
}

pub fn cut_system(g: &DualGraph) -> Result<CutSystem> {
    check_shape(g)?;
    let adj = g.adjacency();
    let mut seen = vec![false; g.vertex_count()];
    let mut in_tree = vec![false; g.edges().len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        let mut inc = adj[x].clone();
        inc.sort_by_key(|&(_, e)| e);
        for (y, e) in inc {
            if !seen[y] {
                seen[y] = true;
                in_tree[e] = true;
                queue.push_back(y);
            }
        }
    }
    let cotree: Vec<usize> = (0..g.edges().len()).filter(|&e| !in_tree[e]).collect();
    let mut b = TreeBuilder::default();
    for _ in 0..g.vertex_count() {
        b.add_vertex();
    }
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if in_tree[e] {
            b.add_edge(u, v);
        }
    }
    let mut labels = labelled_leaves(g);
    let m = labels.len() as u32;
    let mut matching = Vec::new();
    for (k, &e) in cotree.iter().enumerate() {
        let (u, v) = g.edges()[e];
        let (a, c) = (b.add_vertex(), b.add_vertex());
        b.add_edge(u, a);
        b.add_edge(v, c);
        let first = m + 2 * k as u32 + 1;
        labels.push((a, first));
        labels.push((c, first + 1));
        matching.push((first, first + 1));
    }
    let tree = b.finish(&labels)?;
    Ok(CutSystem { graph: g.clone(), cotree, tree, matching })
}

impl CutSystem {
    pub fn genus(&self) -> usize {
        self.cotree.len()
    }

    /// Glues each matched leaf pair back into one edge.
    pub fn reglue(&self) -> Result<DualGraph> {
        let t = &self.tree;
        let m = t.leaf_count() - 2 * self.matching.len() as u32;
        let keep: Vec<usize> = (0..t.vertex_count()).filter(|&v| t.label(v).is_none_or(|l| l <= m)).collect();
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (u, v) in t.edges() {
            if let (Some(&a), Some(&b)) = (index.get(&u), index.get(&v)) {
                edges.push((a, b));
            }
        }
        for &(x, y) in &self.matching {
            let (lx, ly) = (t.leaf_vertex(x), t.leaf_vertex(y));
            edges.push((index[&t.neighbors(lx)[0]], index[&t.neighbors(ly)[0]]));
        }
        let labels = keep.iter().map(|&v| t.label(v)).collect();
        DualGraph::new(keep.len(), edges, labels)
    }
}

/// Cut curves plus the labelled-sphere family on the `2g` cut punctures.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFamily {
    pub g: u32,
    pub sphere: LambdaFamily,
}

impl ClosedFamily {
    pub fn size(&self) -> usize {
        self.g as usize + self.sphere.codes.len()
    }

    /// `3^(2g - 1)`.
    pub fn bound(&self) -> u128 {
        3u128.pow(2 * self.g - 1)
    }
}

pub fn closed_universal_family(g: u32) -> Result<ClosedFamily> {
    if g < 2 {
        return Err(Error::BadParameters(format!("closed family needs g >= 2, got {g}")));
    }
    let sphere = gen_lambda(2 * g, 2, 2 * g - 2)?;
    let fam = ClosedFamily { g, sphere };
    debug_assert!(fam.size() as u128 <= fam.bound());
    Ok(fam)
}

/// A decomposition of a closed surface: cut along the cotree curves, then
/// recognize the resulting sphere tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedRealization {
    pub cut: CutSystem,
    pub recognition: RecognitionResult,
}

pub fn realize_closed(g: &DualGraph) -> Result<ClosedRealization> {
    let cut = cut_system(g)?;
    let root = cut.tree.default_root().ok_or(Error::NotTrivalent)?;
    let recognition = recognize(&cut.tree, root)?;
    Ok(ClosedRealization { cut, recognition })
}

/// Least `N` with `C(N, 3g - 3)` at least the number of decomposition types:
/// a universal family must contain a distinct `(3g-3)`-subset per type.
pub fn counting_lower_bound(g: u32) -> Result<u64> {
    if g < 2 {
        return Err(Error::BadParameters(format!("counting bound needs g >= 2, got {g}")));
    }
    let types = enum_dual_graphs(g, DEFAULT_GENUS_CUTOFF)?.len() as u128;
    let k = 3 * g - 3;
    let mut n = k;
    while binomial(n, k) < types {
        n += 1;
    }
    Ok(u64::from(n))
}

/// Reference curves of the genus-2 surface. All are pairwise disjoint
/// except `ψ` and `θ1`, which meet once; `ψ` only serves to describe the
/// handle cut off by `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceCurve {
    Theta1,
    Theta2,
    Theta3,
    Psi,
    Omega,
}

impl ReferenceCurve {
    pub const ALL: [ReferenceCurve; 5] = [
        ReferenceCurve::Theta1,
        ReferenceCurve::Theta2,
        ReferenceCurve::Theta3,
        ReferenceCurve::Psi,
        ReferenceCurve::Omega,
    ];

    pub fn intersection(self, other: ReferenceCurve) -> u32 {
        use ReferenceCurve::*;
        match (self, other) {
            (Psi, Theta1) | (Theta1, Psi) => 1,
            _ => 0,
        }
    }
}

/// Reference curve a planar part is concatenated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Theta,
    Theta1,
    Theta2,
    Theta3,
    Omega,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Theta => "theta",
            Flag::Theta1 => "theta1",
            Flag::Theta2 => "theta2",
            Flag::Theta3 => "theta3",
            Flag::Omega => "omega",
        })
    }
}

/// Planar code (or the empty curve) concatenated with reference curves.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConcatCode {
    n: u32,
    planar: Option<CurveCode>,
    flags: Vec<Flag>,
}

impl ConcatCode {
    pub fn new(n: u32, planar: Option<CurveCode>, flags: impl IntoIterator<Item = Flag>) -> Result<Self> {
        if let Some(p) = &planar {
            if p.n() != n {
                return Err(Error::MismatchedN(p.n(), n));
            }
        }
        let flags: Vec<Flag> = flags.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if planar.is_none() && flags.is_empty() {
            return Err(Error::EmptyEnclosedSet);
        }
        Ok(ConcatCode { n, planar, flags })
    }

    pub fn plain(code: CurveCode) -> Self {
        ConcatCode { n: code.n(), planar: Some(code), flags: Vec::new() }
    }

    fn flagged(n: u32, planar: Option<CurveCode>, flag: Flag) -> Self {
        ConcatCode { n, planar, flags: vec![flag] }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn planar(&self) -> Option<&CurveCode> {
        self.planar.as_ref()
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn enclosed(&self) -> &[u32] {
        self.planar.as_ref().map_or(&[], |p| p.enclosed())
    }

    /// An odd number of `θ`-type reference curves makes the curve
    /// non-separating; `ω` is itself separating.
    pub fn separating(&self) -> bool {
        self.flags.iter().filter(|f| **f != Flag::Omega).count() % 2 == 0
    }

    fn planar_is_uniform(&self, side: Side) -> bool {
        self.planar.as_ref().is_none_or(|p| p.is_uniform(side))
    }
}

impl fmt::Display for ConcatCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.planar {
            Some(p) => write!(f, "{p}")?,
            None => write!(f, "{{}}")?,
        }
        for flag in &self.flags {
            write!(f, "+{flag}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConcatRepr {
    n: u32,
    s: Vec<u32>,
    f: BTreeMap<String, Side>,
    flags: Vec<Flag>,
    separating: bool,
}

impl Serialize for ConcatCode {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        struct Planar<'a>(&'a Option<CurveCode>);
        impl Serialize for Planar<'_> {
            fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
                use serde::ser::SerializeMap;
                let w = self.0.as_ref().map_or(&[][..], |p| p.wiggle());
                let mut m = ser.serialize_map(Some(w.len()))?;
                for (j, side) in w {
                    m.serialize_entry(&j.to_string(), side)?;
                }
                m.end()
            }
        }
        let mut st = ser.serialize_struct("ConcatCode", 5)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("s", self.enclosed())?;
        st.serialize_field("f", &Planar(&self.planar))?;
        st.serialize_field("flags", &self.flags)?;
        st.serialize_field("separating", &self.separating())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ConcatCode {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ConcatRepr::deserialize(de)?;
        let planar = if r.s.is_empty() {
            if !r.f.is_empty() {
                return Err(D::Error::custom("wiggle map given for an empty planar part"));
            }
            None
        } else {
            let mut f = Vec::with_capacity(r.f.len());
            for (k, side) in r.f {
                let j = k.parse::<u32>().map_err(|_| D::Error::custom(format!("bad puncture key {k:?}")))?;
                f.push((j, side));
            }
            Some(CurveCode::new(r.n, r.s, f).map_err(D::Error::custom)?)
        };
        let code = ConcatCode::new(r.n, planar, r.flags).map_err(D::Error::custom)?;
        if code.separating() != r.separating {
            return Err(D::Error::custom("separating flag disagrees with the reference curves"));
        }
        Ok(code)
    }
}

/// Edges of the 2-core: what remains after repeatedly pruning degree-1
/// vertices.
fn core_edges(g: &DualGraph) -> Vec<bool> {
    let adj = g.adjacency();
    let mut deg: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
    let mut alive = vec![true; g.edges().len()];
    let mut queue: VecDeque<usize> = (0..g.vertex_count()).filter(|&v| deg[v] == 1).collect();
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if alive[e] {
                alive[e] = false;
                deg[v] -= 1;
                deg[w] -= 1;
                if deg[w] == 1 {
                    queue.push_back(w);
                }
            }
        }
    }
    alive
}

/// Vertices reachable from `start` avoiding the `cut` edges.
fn reach(g: &DualGraph, start: usize, cut: &[usize]) -> Vec<bool> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.vertex_count()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &(y, e) in &adj[x] {
            if !cut.contains(&e) && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

fn leaves_in(g: &DualGraph, part: &[bool]) -> Vec<u32> {
    let mut out: Vec<u32> = (0..g.vertex_count()).filter(|&v| part[v]).filter_map(|v| g.label(v)).collect();
    out.sort_unstable();
    out
}

fn is_internal_edge(g: &DualGraph, e: usize) -> bool {
    let (u, v) = g.edges()[e];
    g.label(u).is_none() && g.label(v).is_none()
}

/// Leaves on the side of an off-core edge away from the core.
fn pendant_leaves(g: &DualGraph, e: usize, core_vertex: &[bool]) -> Vec<u32> {
    let (u, v) = g.edges()[e];
    let side = reach(g, u, &[e]);
    let part = if (0..g.vertex_count()).any(|x| side[x] && core_vertex[x]) { reach(g, v, &[e]) } else { side };
    leaves_in(g, &part)
}

fn core_vertices(g: &DualGraph, core: &[bool]) -> Vec<bool> {
    let mut out = vec![false; g.vertex_count()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if core[e] {
            out[u] = true;
            out[v] = true;
        }
    }
    out
}

/// `G` minus some edges and at most one vertex, as a planted tree.
struct Planted {
    tree: LabelledTree,
    root: usize,
    /// Tree vertex -> graph vertex.
    to_graph: Vec<usize>,
    /// Graph vertex -> tree vertex.
    to_tree: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    removed: Vec<usize>,
}

impl Planted {
    fn new(g: &DualGraph, removed_edges: &[usize], removed_vertex: Option<usize>, root: usize) -> Result<Self> {
        let mut b = TreeBuilder::default();
        let mut ids = vec![None; g.vertex_count()];
        let mut back = Vec::new();
        for (v, id) in ids.iter_mut().enumerate() {
            if Some(v) != removed_vertex {
                *id = Some(b.add_vertex());
                back.push(v);
            }
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if removed_edges.contains(&e) || Some(u) == removed_vertex || Some(v) == removed_vertex {
                continue;
            }
            b.add_edge(ids[u].expect("kept"), ids[v].expect("kept"));
        }
        let labels: Vec<(usize, u32)> =
            labelled_leaves(g).into_iter().map(|(v, l)| (ids[v].expect("leaves are kept"), l)).collect();
        let (tree, map) = b.finish_mapped(&labels)?;
        let mut to_graph = vec![0; tree.vertex_count()];
        let mut to_tree = vec![None; g.vertex_count()];
        for (bid, &gv) in back.iter().enumerate() {
            to_graph[map[bid]] = gv;
            to_tree[gv] = Some(map[bid]);
        }
        let root = to_tree[root].expect("root is kept");
        let mut parent = vec![None; tree.vertex_count()];
        let mut stack = vec![root];
        let mut seen = vec![false; tree.vertex_count()];
        seen[root] = true;
        while let Some(x) = stack.pop() {
            for &y in tree.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    stack.push(y);
                }
            }
        }
        Ok(Planted { tree, root, to_graph, to_tree, parent, removed: removed_edges.to_vec() })
    }

    /// Runs the planting with children ranked by `rank(parent, child)` in
    /// graph vertices (lower first, ties by least puncture), and returns the
    /// planar code of every kept internal edge of `g`.
    fn codes(&self, g: &DualGraph, rank: &dyn Fn(usize, usize) -> u8) -> Result<BTreeMap<usize, Option<CurveCode>>> {
        let order = |u: usize, kids: &mut Vec<usize>| {
            kids.sort_by_key(|&c| rank(self.to_graph[u], self.to_graph[c]));
        };
        let planted = plant_codes(&self.tree, self.root, &order)?;
        let mut out = BTreeMap::new();
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let (Some(a), Some(b)) = (self.to_tree[u], self.to_tree[v]) else { continue };
            if !is_internal_edge(g, e) || self.removed.contains(&e) {
                continue;
            }
            let child = if self.parent[b] == Some(a) {
                b
            } else if self.parent[a] == Some(b) {
                a
            } else {
                continue;
            };
            out.insert(e, planted[child].clone());
        }
        Ok(out)
    }

    fn below(&self) -> Vec<Vec<u32>> {
        let mut below = vec![Vec::new(); self.tree.vertex_count()];
        fill_below(&self.tree, self.root, usize::MAX, &mut below);
        below
    }
}

/// Codes realizing a positive-genus decomposition, keyed by graph edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurfaceRecognition {
    pub edges: Vec<(usize, ConcatCode)>,
}

impl SurfaceRecognition {
    pub fn codes(&self) -> Vec<ConcatCode> {
        self.edges.iter().map(|(_, c)| c.clone()).collect()
    }
}

fn subset_codes(m: u32, side: Side, flag: Flag) -> Result<Vec<ConcatCode>> {
    let mut out = Vec::with_capacity(1 << m);
    for mask in 0u32..(1 << m) {
        let s: Vec<u32> = (1..=m).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        let planar = if s.is_empty() { None } else { Some(CurveCode::uniform(m, s, side)?) };
        out.push(ConcatCode::flagged(m, planar, flag));
    }
    out.sort();
    Ok(out)
}

fn all_wiggles(m: u32) -> Result<Vec<CurveCode>> {
    if m < 2 {
        Ok(Vec::new())
    } else {
        Ok(gen_lambda(m, 2, m)?.codes)
    }
}

/// `Γ` (every code with `|S| >= 2`) and `Θ_S` (every `S`, above-all,
/// concatenated with `θ`).
#[derive(Debug, Clone, PartialEq)]
pub struct Genus1Family {
    pub m: u32,
    pub gamma: Vec<CurveCode>,
    pub theta: Vec<ConcatCode>,
}

impl Genus1Family {
    pub fn size(&self) -> usize {
        self.gamma.len() + self.theta.len()
    }

    pub fn codes(&self) -> Vec<ConcatCode> {
        let mut out: Vec<ConcatCode> = self.gamma.iter().cloned().map(ConcatCode::plain).collect();
        out.extend(self.theta.iter().cloned());
        out
    }

    pub fn contains(&self, c: &ConcatCode) -> bool {
        if c.flags.is_empty() {
            c.planar.as_ref().is_some_and(|p| self.gamma.binary_search(p).is_ok())
        } else {
            self.theta.binary_search(c).is_ok()
        }
    }
}

pub fn genus1_family(m: u32) -> Result<Genus1Family> {
    Ok(Genus1Family { m, gamma: all_wiggles(m)?, theta: subset_codes(m, Side::Above, Flag::Theta)? })
}

/// `(3^m - 2m - 1) / 4 + 2^m`.
pub fn genus1_size_formula(m: u32) -> u128 {
    (3u128.pow(m) - 2 * u128::from(m) - 1) / 4 + (1u128 << m)
}

fn check_cyclomatic(g: &DualGraph, want: i64, err: Error) -> Result<()> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.cyclomatic() != want {
        return Err(err);
    }
    if !g.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    Ok(())
}

/// Cuts the cycle at its lowest vertex `v` along its lowest cycle edge
/// (realized by `θ`), plants the rest at `v` with the cycle always first, so
/// every cycle edge gets an above-all code concatenated with `θ`.
pub fn genus1_recognize(g: &DualGraph) -> Result<SurfaceRecognition> {
    check_cyclomatic(g, 1, Error::NotUnicyclic)?;
    let m = g.leaf_count() as u32;
    let core = core_edges(g);
    let on_cycle = core_vertices(g, &core);
    let v = (0..g.vertex_count()).find(|&x| on_cycle[x]).ok_or(Error::NotUnicyclic)?;
    let e = (0..g.edges().len())
        .find(|&e| core[e] && (g.edges()[e].0 == v || g.edges()[e].1 == v))
        .ok_or(Error::NotUnicyclic)?;
    let planted = Planted::new(g, &[e], None, v)?;
    let rank = |u: usize, c: usize| u8::from(!(on_cycle[u] && on_cycle[c]));
    let codes = planted.codes(g, &rank)?;
    let mut edges = vec![(e, ConcatCode::flagged(m, None, Flag::Theta))];
    for (idx, planar) in codes {
        let code = if core[idx] {
            ConcatCode::flagged(m, planar, Flag::Theta)
        } else {
            ConcatCode::plain(planar.expect("off-cycle edges have punctures beyond them"))
        };
        edges.push((idx, code));
    }
    edges.sort_by_key(|(idx, _)| *idx);
    Ok(SurfaceRecognition { edges })
}

/// Outcome of a structural check, with one line per violated condition.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct StructuralReport {
    pub ok: bool,
    pub problems: Vec<String>,
}

impl StructuralReport {
    fn from(problems: Vec<String>) -> Self {
        StructuralReport { ok: problems.is_empty(), problems }
    }
}

fn common_checks(codes: &[(usize, ConcatCode)], g: &DualGraph, core: &[bool], problems: &mut Vec<String>) {
    let m = g.leaf_count() as u32;
    let internal: Vec<usize> = (0..g.edges().len()).filter(|&e| is_internal_edge(g, e)).collect();
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for (e, c) in codes {
        *seen.entry(*e).or_default() += 1;
        if c.n != m {
            problems.push(format!("edge {e}: code has n = {}, graph has {m} leaves", c.n));
        }
    }
    for &e in &internal {
        match seen.get(&e) {
            None => problems.push(format!("edge {e} has no code")),
            Some(&k) if k > 1 => problems.push(format!("edge {e} has {k} codes")),
            _ => {}
        }
    }
    for e in seen.keys() {
        if !internal.contains(e) {
            problems.push(format!("code assigned to non-internal edge {e}"));
        }
    }
    for (i, (ea, a)) in codes.iter().enumerate() {
        for (eb, b) in &codes[i + 1..] {
            if let (Some(p), Some(q)) = (a.planar(), b.planar()) {
                if !disjoint(p, q).unwrap_or(false) {
                    problems.push(format!("planar parts of edges {ea} and {eb} intersect"));
                }
            }
        }
    }
    let on_core = core_vertices(g, core);
    for (e, c) in codes {
        if *e >= g.edges().len() {
            continue;
        }
        if core[*e] != !c.flags.is_empty() {
            problems.push(format!("edge {e}: reference curves present iff the edge lies on a cycle"));
        }
        if !core[*e] && c.enclosed() != pendant_leaves(g, *e, &on_core).as_slice() {
            problems.push(format!("edge {e}: enclosed set differs from the leaves beyond the edge"));
        }
    }
}

/// Checks a genus-1 code assignment: bijection with the internal edges,
/// pairwise disjoint planar parts, above-all planar parts on `θ`-flagged
/// codes, pendant leaf sets on the other codes, and for every pair of cycle
/// edges, symmetric difference of enclosed sets equal to a side of the pair.
pub fn genus1_verify_structural(codes: &[(usize, ConcatCode)], g: &DualGraph) -> StructuralReport {
    let mut problems = Vec::new();
    if g.cyclomatic() != 1 || !g.is_connected() {
        return StructuralReport::from(vec!["graph is not unicyclic".into()]);
    }
    let core = core_edges(g);
    common_checks(codes, g, &core, &mut problems);
    let flagged: Vec<&(usize, ConcatCode)> = codes.iter().filter(|(_, c)| !c.flags.is_empty()).collect();
    for (e, c) in &flagged {
        if c.flags != [Flag::Theta] {
            problems.push(format!("edge {e}: genus-1 codes carry only theta"));
        }
        if !c.planar_is_uniform(Side::Above) {
            problems.push(format!("edge {e}: theta-concatenated code is not above all punctures"));
        }
    }
    for (i, (ea, a)) in flagged.iter().enumerate() {
        for (eb, b) in &flagged[i + 1..] {
            if ea >= &g.edges().len() || eb >= &g.edges().len() {
                continue;
            }
            let x: BTreeSet<u32> = a.enclosed().iter().copied().collect();
            let y: BTreeSet<u32> = b.enclosed().iter().copied().collect();
            let diff: Vec<u32> = x.symmetric_difference(&y).copied().collect();
            let part = reach(g, g.edges()[*ea].0, &[*ea, *eb]);
            let side = leaves_in(g, &part);
            let other = leaves_in(g, &part.iter().map(|p| !p).collect::<Vec<_>>());
            if diff != side && diff != other {
                problems.push(format!("cycle edges {ea}, {eb}: symmetric difference is not a side"));
            }
        }
    }
    StructuralReport::from(problems)
}

/// `Γ`, `Θ¹` (above-all), `Θ²` (below-all), `Θ³` (every wiggle, `|S| >= 2`)
/// and `Ω` (above-all), plus the `Θ³` codes with `|S| <= 1` that the
/// recognition also needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Genus2Family {
    pub m: u32,
    pub gamma: Vec<CurveCode>,
    pub theta1: Vec<ConcatCode>,
    pub theta2: Vec<ConcatCode>,
    pub theta3: Vec<ConcatCode>,
    pub omega: Vec<ConcatCode>,
    pub theta3_small: Vec<ConcatCode>,
}

impl Genus2Family {
    /// Size of `Γ ∪ Θ¹ ∪ Θ² ∪ Θ³ ∪ Ω`.
    pub fn main_size(&self) -> usize {
        self.gamma.len() + self.theta1.len() + self.theta2.len() + self.theta3.len() + self.omega.len()
    }

    pub fn size(&self) -> usize {
        self.main_size() + self.theta3_small.len()
    }

    pub fn codes(&self) -> Vec<ConcatCode> {
        let mut out: Vec<ConcatCode> = self.gamma.iter().cloned().map(ConcatCode::plain).collect();
        for part in [&self.theta1, &self.theta2, &self.theta3, &self.omega, &self.theta3_small] {
            out.extend(part.iter().cloned());
        }
        out
    }

    pub fn contains(&self, c: &ConcatCode) -> bool {
        match c.flags.as_slice() {
            [] => c.planar.as_ref().is_some_and(|p| self.gamma.binary_search(p).is_ok()),
            [Flag::Theta1] => self.theta1.binary_search(c).is_ok(),
            [Flag::Theta2] => self.theta2.binary_search(c).is_ok(),
            [Flag::Theta3] => self.theta3.binary_search(c).is_ok() || self.theta3_small.binary_search(c).is_ok(),
            [Flag::Omega] => self.omega.binary_search(c).is_ok(),
            _ => false,
        }
    }
}

pub fn genus2_family(m: u32) -> Result<Genus2Family> {
    let gamma = all_wiggles(m)?;
    let theta3: Vec<ConcatCode> =
        gamma.iter().map(|p| ConcatCode::flagged(m, Some(p.clone()), Flag::Theta3)).collect();
    let mut theta3_small = vec![ConcatCode::flagged(m, None, Flag::Theta3)];
    for j in 1..=m {
        theta3_small.push(ConcatCode::flagged(m, Some(CurveCode::uniform(m, [j], Side::Above)?), Flag::Theta3));
    }
    theta3_small.sort();
    Ok(Genus2Family {
        m,
        theta1: subset_codes(m, Side::Above, Flag::Theta1)?,
        theta2: subset_codes(m, Side::Below, Flag::Theta2)?,
        omega: subset_codes(m, Side::Above, Flag::Omega)?,
        theta3,
        gamma,
        theta3_small,
    })
}

/// `3 · 2^m + 2 · (3^m - 2m - 1) / 4`.
pub fn genus2_size_formula(m: u32) -> u128 {
    3 * (1u128 << m) + 2 * ((3u128.pow(m) - 2 * u128::from(m) - 1) / 4)
}

fn core_degree(g: &DualGraph, core: &[bool], v: usize) -> usize {
    g.edges()
        .iter()
        .enumerate()
        .filter(|(e, _)| core[*e])
        .map(|(_, &(a, b))| usize::from(a == v) + usize::from(b == v))
        .sum()
}

fn core_bridges(g: &DualGraph, core: &[bool]) -> Vec<usize> {
    (0..g.edges().len())
        .filter(|&e| core[e] && {
            let (u, v) = g.edges()[e];
            u != v && !reach(g, u, &[e])[v]
        })
        .collect()
}

/// Shape of the 2-core of a graph with cyclomatic number 2.
enum Core {
    /// Two branch vertices `v < w` joined by three paths, each listed as
    /// edges from `v` to `w`.
    Theta { v: usize, w: usize, paths: Vec<Vec<usize>> },
    /// Two cycles joined by the bridge edges; `v2 < v1` are the junctions
    /// and `c2`/`c1` mark the vertices of their cycles.
    Dumbbell { v1: usize, v2: usize, bridges: Vec<usize>, c1: Vec<bool>, c2: Vec<bool> },
}

fn analyse_core(g: &DualGraph) -> Result<(Vec<bool>, Core)> {
    let core = core_edges(g);
    let on_core = core_vertices(g, &core);
    let branch: Vec<usize> = (0..g.vertex_count()).filter(|&x| core_degree(g, &core, x) == 3).collect();
    if branch.len() != 2 {
        return Err(Error::NotCyclomatic2);
    }
    let bridges = core_bridges(g, &core);
    let (a, b) = (branch[0], branch[1]);
    if bridges.is_empty() {
        let mut paths = Vec::new();
        let mut starts: Vec<usize> = (0..g.edges().len())
            .filter(|&e| core[e] && (g.edges()[e].0 == a || g.edges()[e].1 == a))
            .collect();
        starts.sort_unstable();
        for e0 in starts {
            let mut path = vec![e0];
            let (p, q) = g.edges()[e0];
            let (mut prev_edge, mut cur) = (e0, if p == a { q } else { p });
            while cur != b {
                let next = (0..g.edges().len())
                    .find(|&e| e != prev_edge && core[e] && (g.edges()[e].0 == cur || g.edges()[e].1 == cur))
                    .ok_or(Error::NotCyclomatic2)?;
                let (x, y) = g.edges()[next];
                path.push(next);
                prev_edge = next;
                cur = if x == cur { y } else { x };
            }
            paths.push(path);
        }
        Ok((core, Core::Theta { v: a, w: b, paths }))
    } else {
        let side = |start: usize| -> Vec<bool> {
            let r = reach(g, start, &bridges);
            (0..g.vertex_count()).map(|x| r[x] && on_core[x]).collect()
        };
        let (c2, c1) = (side(a), side(b));
        Ok((core, Core::Dumbbell { v1: b, v2: a, bridges, c1, c2 }))
    }
}

fn incident_cycle_edge(g: &DualGraph, core: &[bool], bridges: &[usize], v: usize) -> usize {
    (0..g.edges().len())
        .find(|&e| core[e] && !bridges.contains(&e) && (g.edges()[e].0 == v || g.edges()[e].1 == v))
        .expect("junction lies on a cycle")
}

const BRANCH_FLAGS: [Flag; 3] = [Flag::Theta1, Flag::Theta2, Flag::Theta3];

/// Realizes a genus-2 decomposition. With a theta-shaped core, the branch
/// vertex `w` is removed and the three `v`-`w` paths take the above, below
/// and middle roles (`θ1`, `θ2`, `θ3`); the edges at `w` are the reference
/// curves themselves. With two disjoint cycles, one edge of each is cut
/// (`θ1`, `θ2`), the connecting path is concatenated with `ω` above all,
/// the far cycle with `θ1` above all and the root cycle with `θ2` below all.
pub fn genus2_recognize(g: &DualGraph) -> Result<SurfaceRecognition> {
    check_cyclomatic(g, 2, Error::NotCyclomatic2)?;
    let m = g.leaf_count() as u32;
    let (core, shape) = analyse_core(g)?;
    let mut edges = Vec::new();
    match shape {
        Core::Theta { v, w, paths } => {
            let planted = Planted::new(g, &[], Some(w), v)?;
            let below = planted.below();
            // graph vertex -> index of its path, for path interiors
            let mut path_of = vec![None; g.vertex_count()];
            let mut heads = Vec::new();
            for (i, path) in paths.iter().enumerate() {
                for &e in &path[..path.len() - 1] {
                    let (x, y) = g.edges()[e];
                    for z in [x, y] {
                        if z != v {
                            path_of[z] = Some(i);
                        }
                    }
                }
                if path.len() > 1 {
                    let (x, y) = g.edges()[path[0]];
                    let head = if x == v { y } else { x };
                    heads.push((below[planted.to_tree[head].expect("kept")][0], i));
                }
            }
            heads.sort_unstable();
            let mut flag_of = [None; 3];
            for (k, &(_, i)) in heads.iter().enumerate() {
                flag_of[i] = Some(BRANCH_FLAGS[k]);
            }
            let mut unused = BRANCH_FLAGS.iter().skip(heads.len());
            for f in flag_of.iter_mut() {
                if f.is_none() {
                    *f = unused.next().copied();
                }
            }
            let rank = |u: usize, c: usize| -> u8 {
                if u == v {
                    return 0;
                }
                let Some(i) = path_of[u] else { return 0 };
                let along = path_of[c] == Some(i);
                let below_role = flag_of[i] == Some(Flag::Theta2);
                u8::from(along == below_role)
            };
            for (e, planar) in planted.codes(g, &rank)? {
                let code = if core[e] {
                    let (x, y) = g.edges()[e];
                    let i = path_of[x].or(path_of[y]).expect("core edge off w lies on a path");
                    ConcatCode::flagged(m, planar, flag_of[i].expect("assigned"))
                } else {
                    ConcatCode::plain(planar.expect("pendant edges have punctures beyond them"))
                };
                edges.push((e, code));
            }
            for (i, path) in paths.iter().enumerate() {
                let last = *path.last().expect("paths are non-empty");
                edges.push((last, ConcatCode::flagged(m, None, flag_of[i].expect("assigned"))));
            }
        }
        Core::Dumbbell { v1, v2, bridges, c1, c2 } => {
            let r1 = incident_cycle_edge(g, &core, &bridges, v1);
            let r2 = incident_cycle_edge(g, &core, &bridges, v2);
            let planted = Planted::new(g, &[r1, r2], None, v2)?;
            let on_core = core_vertices(g, &core);
            let rank = |u: usize, c: usize| -> u8 {
                if on_core[u] && on_core[c] {
                    u8::from(c2[u] && c2[c])
                } else {
                    u8::from(!c2[u])
                }
            };
            for (e, planar) in planted.codes(g, &rank)? {
                let (x, y) = g.edges()[e];
                let code = if bridges.contains(&e) {
                    ConcatCode::flagged(m, planar, Flag::Omega)
                } else if core[e] && c1[x] && c1[y] {
                    ConcatCode::flagged(m, planar, Flag::Theta1)
                } else if core[e] {
                    ConcatCode::flagged(m, planar, Flag::Theta2)
                } else {
                    ConcatCode::plain(planar.expect("pendant edges have punctures beyond them"))
                };
                edges.push((e, code));
            }
            edges.push((r1, ConcatCode::flagged(m, None, Flag::Theta1)));
            edges.push((r2, ConcatCode::flagged(m, None, Flag::Theta2)));
        }
    }
    edges.sort_by_key(|(e, _)| *e);
    Ok(SurfaceRecognition { edges })
}

/// Checks a genus-2 code assignment: bijection with the internal edges,
/// disjoint planar parts, pendant leaf sets, one reference curve per core
/// segment (distinct across segments, `ω` exactly on the connecting path),
/// one empty planar part per cut segment, and the side constraints
/// (`θ1`, `ω` above all, `θ2` below all).
pub fn genus2_verify_structural(codes: &[(usize, ConcatCode)], g: &DualGraph) -> StructuralReport {
    if g.cyclomatic() != 2 || !g.is_connected() {
        return StructuralReport::from(vec!["graph does not have cyclomatic number 2".into()]);
    }
    let Ok((core, shape)) = analyse_core(g) else {
        return StructuralReport::from(vec!["core is neither a theta nor a dumbbell".into()]);
    };
    let mut problems = Vec::new();
    common_checks(codes, g, &core, &mut problems);
    let by_edge: BTreeMap<usize, &ConcatCode> = codes.iter().map(|(e, c)| (*e, c)).collect();
    for (e, c) in codes {
        let ok = match c.flags.as_slice() {
            [] => true,
            [Flag::Theta1] | [Flag::Omega] => c.planar_is_uniform(Side::Above),
            [Flag::Theta2] => c.planar_is_uniform(Side::Below),
            [Flag::Theta3] => true,
            _ => false,
        };
        if !ok {
            problems.push(format!("edge {e}: reference curves {:?} violate their side constraint", c.flags));
        }
    }
    let segments: Vec<Vec<usize>> = match &shape {
        Core::Theta { paths, .. } => paths.clone(),
        Core::Dumbbell { bridges, c1, c2, .. } => {
            for &e in bridges {
                if by_edge.get(&e).is_some_and(|c| c.flags != [Flag::Omega]) {
                    problems.push(format!("edge {e} on the connecting path is not concatenated with omega"));
                }
            }
            let cyc = |mark: &[bool]| -> Vec<usize> {
                (0..g.edges().len())
                    .filter(|&e| core[e] && mark[g.edges()[e].0] && mark[g.edges()[e].1] && !bridges.contains(&e))
                    .collect()
            };
            vec![cyc(c1), cyc(c2)]
        }
    };
    let mut used = BTreeSet::new();
    for seg in &segments {
        let flags: BTreeSet<&[Flag]> = seg.iter().filter_map(|e| by_edge.get(e)).map(|c| c.flags()).collect();
        if flags.len() != 1 {
            problems.push(format!("segment {seg:?} mixes reference curves"));
        } else if let Some(f) = flags.into_iter().next() {
            if f.len() != 1 || f[0] == Flag::Omega || f[0] == Flag::Theta || !used.insert(f[0]) {
                problems.push(format!("segment {seg:?} reuses or lacks a theta curve"));
            }
        }
        let empty = seg.iter().filter(|e| by_edge.get(e).is_some_and(|c| c.planar.is_none())).count();
        if empty != 1 {
            problems.push(format!("segment {seg:?} has {empty} bare reference curves, expected 1"));
        }
    }
    StructuralReport::from(problems)
}

/// Every leaf-labelled graph with `m` leaves, internal degree 3 and the
/// given cyclomatic number, up to isomorphism fixing labels. Built by
/// gluing pairs of extra leaves of labelled trees, sorted by canonical key.
pub fn labelled_graphs(m: u32, cyclomatic: u32) -> Result<Vec<DualGraph>> {
    let total = m + 2 * cyclomatic;
    if total < 3 {
        return Err(Error::NTooSmall(total));
    }
    let mut found: BTreeMap<Vec<u32>, DualGraph> = BTreeMap::new();
    let mut failure = None;
    for_each_labelled_tree(total, |t| {
        let glue = |l: u32| t.leaf_vertex(l);
        let special: Vec<usize> = (m + 1..=total).map(glue).collect();
        let keep: Vec<usize> = (0..t.vertex_count()).filter(|v| !special.contains(v)).collect();
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges: Vec<(usize, usize)> = t
            .edges()
            .into_iter()
            .filter_map(|(u, v)| Some((*index.get(&u)?, *index.get(&v)?)))
            .collect();
        for pair in special.chunks(2) {
            edges.push((index[&t.neighbors(pair[0])[0]], index[&t.neighbors(pair[1])[0]]));
        }
        let labels = keep.iter().map(|&v| t.label(v)).collect();
        match DualGraph::new(keep.len(), edges, labels) {
            Ok(g) => {
                found.entry(g.canonical_key()).or_insert(g);
            }
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(found.into_values().collect()),
    }
}
