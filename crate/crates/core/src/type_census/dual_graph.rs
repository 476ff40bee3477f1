use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::trees::unrooted_code;
use crate::error::{Error, Result};

/// Genus cutoff for [`enum_dual_graphs`] (at most 8 vertices).
pub const DEFAULT_GENUS_CUTOFF: u32 = 5;

/// Connected multigraph (loops and parallel edges allowed) where labelled
/// vertices are leaves and every other vertex has degree 3.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DualGraph {
    vertices: usize,
    /// `(u, v)` with `u <= v`, sorted, one entry per edge.
    edges: Vec<(usize, usize)>,
    labels: Vec<Option<u32>>,
}

impl DualGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>, labels: Vec<Option<u32>>) -> Result<Self> {
        if labels.len() != vertices {
            return Err(Error::BadParameters("one label slot per vertex".into()));
        }
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        if edges.iter().any(|&(_, v)| v >= vertices) {
            return Err(Error::BadParameters("edge endpoint out of range".into()));
        }
        edges.sort_unstable();
        Ok(DualGraph { vertices, edges, labels })
    }

    /// Closed-surface graph without leaves.
    pub fn unlabelled(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        DualGraph::new(vertices, edges, vec![None; vertices])
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn label(&self, v: usize) -> Option<u32> {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Option<u32>] {
        &self.labels
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }

    pub fn is_trivalent(&self) -> bool {
        (0..self.vertices).all(|v| {
            let d = self.degree(v);
            if self.labels[v].is_some() {
                d == 1
            } else {
                d == 3
            }
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// `E - V + 1`.
    pub fn cyclomatic(&self) -> i64 {
        self.edges.len() as i64 - self.vertices as i64 + 1
    }

    /// Incident `(neighbor, edge index)` pairs; a loop appears twice.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        adj
    }

    fn multiplicity_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.vertices]; self.vertices];
        for &(u, v) in &self.edges {
            m[u][v] += 1;
            if u != v {
                m[v][u] += 1;
            }
        }
        m
    }

    /// Canonical relabelling (old vertex -> new vertex) and the key it yields.
    /// Equal keys iff isomorphic as leaf-labelled multigraphs.
    pub fn canonical_labelling(&self) -> (Vec<usize>, Vec<u32>) {
        let m = self.multiplicity_matrix();
        let init: Vec<u64> = self
            .labels
            .iter()
            .map(|l| l.map_or(0, |x| u64::from(x) + 1))
            .collect();
        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        search(&m, &self.labels, rank(&init), &mut best);
        let (key, perm) = best.expect("search visits at least one leaf");
        (perm, key)
    }

    pub fn canonical_key(&self) -> Vec<u32> {
        self.canonical_labelling().1
    }

    pub fn canonical_form(&self) -> DualGraph {
        let (perm, _) = self.canonical_labelling();
        self.relabel(&perm)
    }

    pub fn relabel(&self, perm: &[usize]) -> DualGraph {
        let mut labels = vec![None; self.vertices];
        for v in 0..self.vertices {
            labels[perm[v]] = self.labels[v];
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        DualGraph::new(self.vertices, edges, labels).expect("relabelling preserves validity")
    }

    pub fn is_isomorphic(&self, other: &DualGraph) -> bool {
        self.vertices == other.vertices
            && self.edges.len() == other.edges.len()
            && self.canonical_key() == other.canonical_key()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph dual {\n");
        for v in 0..self.vertices {
            match self.labels[v] {
                Some(l) => writeln!(s, "  v{v} [label=\"{l}\", shape=box];").unwrap(),
                None => writeln!(s, "  v{v} [label=\"\", shape=circle];").unwrap(),
            }
        }
        for &(u, v) in &self.edges {
            writeln!(s, "  v{u} -- v{v};").unwrap();
        }
        s.push_str("}\n");
        s
    }
}

fn rank(colors: &[u64]) -> Vec<u64> {
    let distinct: BTreeSet<u64> = colors.iter().copied().collect();
    let index: BTreeMap<u64, u64> = distinct.into_iter().enumerate().map(|(i, c)| (c, i as u64)).collect();
    colors.iter().map(|c| index[c]).collect()
}

/// Own colour plus the sorted (colour, multiplicity) pairs of neighbours.
type Signature = (u64, Vec<(u64, u8)>);

/// Colour refinement until stable; colours stay canonical ranks.
fn refine(m: &[Vec<u8>], mut colors: Vec<u64>) -> Vec<u64> {
    let k = colors.len();
    loop {
        let sigs: Vec<Signature> = (0..k)
            .map(|v| {
                let mut nb: Vec<(u64, u8)> = (0..k)
                    .filter(|&w| m[v][w] > 0)
                    .map(|w| (colors[w], m[v][w] + if w == v { 100 } else { 0 }))
                    .collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let distinct: BTreeSet<&Signature> = sigs.iter().collect();
        let index: BTreeMap<&Signature, u64> =
            distinct.into_iter().enumerate().map(|(i, s)| (s, i as u64)).collect();
        let next: Vec<u64> = sigs.iter().map(|s| index[s]).collect();
        let before = colors.iter().collect::<BTreeSet<_>>().len();
        let after = next.iter().collect::<BTreeSet<_>>().len();
        colors = next;
        if after == before {
            return colors;
        }
    }
}

/// Individualise-and-refine search for the lexicographically least key.
fn search(
    m: &[Vec<u8>],
    labels: &[Option<u32>],
    colors: Vec<u64>,
    best: &mut Option<(Vec<u32>, Vec<usize>)>,
) {
    let colors = refine(m, colors);
    let k = colors.len();
    let mut counts = BTreeMap::new();
    for &c in &colors {
        *counts.entry(c).or_insert(0usize) += 1;
    }
    match counts.iter().find(|(_, &n)| n > 1) {
        None => {
            // discrete: new label of v is its colour
            let perm: Vec<usize> = colors.iter().map(|&c| c as usize).collect();
            let mut inv = vec![0usize; k];
            for v in 0..k {
                inv[perm[v]] = v;
            }
            let mut key = Vec::with_capacity(k + k * (k + 1) / 2);
            for &v in &inv {
                key.push(labels[v].map_or(0, |l| l + 1));
            }
            for a in 0..k {
                for b in a..k {
                    key.push(u32::from(m[inv[a]][inv[b]]));
                }
            }
            if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
                *best = Some((key, perm));
            }
        }
        Some((&target, _)) => {
            for v in (0..k).filter(|&v| colors[v] == target) {
                let split: Vec<u64> = (0..k)
                    .map(|w| 2 * colors[w] + u64::from(colors[w] == target && w != v))
                    .collect();
                search(m, labels, rank(&split), best);
            }
        }
    }
}

/// Unlabelled trees on `k` vertices with maximum degree 3, one per class.
fn subcubic_trees(k: usize) -> Vec<Vec<Vec<usize>>> {
    if k == 1 {
        return vec![vec![Vec::new()]];
    }
    if k == 2 {
        return vec![vec![vec![1], vec![0]]];
    }
    let mut seen = BTreeMap::new();
    let len = k - 2;
    let mut seq = vec![0usize; len];
    loop {
        // Prüfer decoding
        let mut degree = vec![1usize; k];
        for &x in &seq {
            degree[x] += 1;
        }
        if degree.iter().all(|&d| d <= 3) {
            let mut adj = vec![Vec::new(); k];
            let mut deg = degree.clone();
            for &x in &seq {
                let leaf = (0..k).find(|&v| deg[v] == 1).expect("Prüfer leaf");
                adj[leaf].push(x);
                adj[x].push(leaf);
                deg[leaf] -= 1;
                deg[x] -= 1;
            }
            let rest: Vec<usize> = (0..k).filter(|&v| deg[v] == 1).collect();
            adj[rest[0]].push(rest[1]);
            adj[rest[1]].push(rest[0]);
            seen.entry(unrooted_code(&adj)).or_insert(adj);
        }
        // next sequence
        let mut i = 0;
        while i < len {
            seq[i] += 1;
            if seq[i] < k {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
        if i == len {
            break;
        }
    }
    seen.into_values().collect()
}

fn perfect_matchings(stubs: &[usize], out: &mut Vec<Vec<(usize, usize)>>, acc: &mut Vec<(usize, usize)>) {
    if stubs.is_empty() {
        out.push(acc.clone());
        return;
    }
    let first = stubs[0];
    for i in 1..stubs.len() {
        let mut rest = stubs[1..].to_vec();
        let partner = rest.remove(i - 1);
        acc.push((first, partner));
        perfect_matchings(&rest, out, acc);
        acc.pop();
    }
}

/// Connected trivalent multigraphs on `2g - 2` vertices up to isomorphism,
/// in canonical form, sorted by canonical key.
///
/// Every such graph is a spanning tree of maximum degree 3 plus a perfect
/// matching of the remaining half-edges.
pub fn enum_dual_graphs(g: u32, cutoff: u32) -> Result<Vec<DualGraph>> {
    if g < 2 {
        return Err(Error::BadParameters(format!("closed genus must be at least 2, got {g}")));
    }
    if g > cutoff {
        return Err(Error::GTooLarge(g, cutoff));
    }
    let k = (2 * g - 2) as usize;
    let mut classes = BTreeMap::new();
    for tree in subcubic_trees(k) {
        let mut edges = Vec::new();
        for (u, ns) in tree.iter().enumerate() {
            for &v in ns {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        let stubs: Vec<usize> = (0..k).flat_map(|v| std::iter::repeat_n(v, 3 - tree[v].len())).collect();
        let mut matchings = Vec::new();
        perfect_matchings(&stubs, &mut matchings, &mut Vec::new());
        for mt in matchings {
            let mut all = edges.clone();
            all.extend(mt);
            let graph = DualGraph::unlabelled(k, all)?;
            let (perm, key) = graph.canonical_labelling();
            classes.entry(key).or_insert_with(|| graph.relabel(&perm));
        }
    }
    Ok(classes.into_values().collect())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DualGraphRepr {
    vertices: usize,
    /// `[u, v, multiplicity]`, sorted.
    edges: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, u32>,
}

impl Serialize for DualGraph {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut grouped: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &e in &self.edges {
            *grouped.entry(e).or_default() += 1;
        }
        let repr = DualGraphRepr {
            vertices: self.vertices,
            edges: grouped.into_iter().map(|((u, v), m)| [u, v, m]).collect(),
            labels: self
                .labels
                .iter()
                .enumerate()
                .filter_map(|(v, l)| l.map(|l| (v.to_string(), l)))
                .collect(),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DualGraph {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = DualGraphRepr::deserialize(de)?;
        let mut labels = vec![None; repr.vertices];
        for (k, l) in repr.labels {
            let v: usize = k.parse().map_err(serde::de::Error::custom)?;
            if v >= repr.vertices {
                return Err(serde::de::Error::custom("label vertex out of range"));
            }
            labels[v] = Some(l);
        }
        let edges = repr
            .edges
            .iter()
            .flat_map(|&[u, v, m]| std::iter::repeat_n((u, v), m))
            .collect();
        DualGraph::new(repr.vertices, edges, labels).map_err(serde::de::Error::custom)
    }
}
