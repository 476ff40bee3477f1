//! Edge families on the convex `n`-gon: triangle and `ℓ`-gon types, subgraph
//! counts used as lower-bound certificates, and triangulation types.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::labelled_sphere::UniversalityReport;
use crate::type_census::PantsType;
use crate::unlabelled_sphere::{random_index_set, RandomConstructionParams};

/// Graph on polygon vertices `1..=n`, edges stored as sorted pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChordGraph {
    n: u32,
    edges: Vec<(u32, u32)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChordGraphRepr {
    n: u32,
    edges: Vec<(u32, u32)>,
}

impl<'de> Deserialize<'de> for ChordGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ChordGraphRepr::deserialize(d)?;
        ChordGraph::new(r.n, r.edges).map_err(D::Error::custom)
    }
}

impl ChordGraph {
    pub fn new(n: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut out = BTreeSet::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x == 0 || x > n {
                    return Err(Error::PunctureOutOfRange(x, n));
                }
            }
            if u == v {
                return Err(Error::BadParameters(format!("loop at vertex {u}")));
            }
            if !out.insert((u.min(v), u.max(v))) {
                return Err(Error::BadParameters(format!("duplicate edge {u}-{v}")));
            }
        }
        Ok(ChordGraph { n, edges: out.into_iter().collect() })
    }

    /// Complete graph on the given vertices.
    pub fn complete_on(n: u32, vertices: &[u32]) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &vertices[i + 1..] {
                edges.push((u, v));
            }
        }
        ChordGraph::new(n, edges)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Sorted neighbour lists indexed by vertex, slot 0 unused.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n as usize + 1];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn matrix(&self) -> Vec<Vec<bool>> {
        let k = self.n as usize + 1;
        let mut m = vec![vec![false; k]; k];
        for &(u, v) in &self.edges {
            m[u as usize][v as usize] = true;
            m[v as usize][u as usize] = true;
        }
        m
    }
}

/// Complete graph on a random vertex subset, sampled as for index sets.
pub fn random_edge_set(n: u32, c: f64, seed: u64) -> Result<ChordGraph> {
    let s = random_index_set(RandomConstructionParams { n, c, seed })?;
    ChordGraph::complete_on(n, &s.s)
}

pub fn all_chords(n: u32) -> Result<ChordGraph> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    ChordGraph::complete_on(n, &(1..=n).collect::<Vec<_>>())
}

/// Gaps between consecutive corners of sorted vertices, wrapping around.
fn gaps(n: u32, corners: &[u32]) -> Vec<u32> {
    let k = corners.len();
    (0..k)
        .map(|i| {
            if i + 1 < k {
                corners[i + 1] - corners[i] - 1
            } else {
                n - corners[k - 1] + corners[0] - 1
            }
        })
        .collect()
}

/// Type of the triangle with corners `a < b < c`.
pub fn triangle_type(n: u32, a: u32, b: u32, c: u32) -> PantsType {
    let g = gaps(n, &[a, b, c]);
    PantsType::new(g[0], g[1], g[2])
}

/// Triangle types of the `n`-gon: partitions of `n - 3` into at most three parts.
pub fn triangle_types(n: u32) -> Vec<PantsType> {
    let m = n.saturating_sub(3);
    let mut out = Vec::new();
    for a in 0..=m / 3 {
        for b in a..=(m - a) / 2 {
            out.push(PantsType([a, b, m - a - b]));
        }
    }
    out
}

/// All triangles as sorted corner triples, by degree-ordered intersection.
pub fn triangles(g: &ChordGraph) -> Vec<[u32; 3]> {
    let adj = g.adjacency();
    let rank = |v: u32| (adj[v as usize].len(), v);
    // orient each edge towards the higher rank
    let fwd: Vec<Vec<u32>> = (0..adj.len() as u32)
        .map(|v| {
            let mut out: Vec<u32> = adj[v as usize].iter().copied().filter(|&w| rank(w) > rank(v)).collect();
            out.sort_unstable();
            out
        })
        .collect();
    (1..=g.n)
        .into_par_iter()
        .flat_map_iter(|u| {
            let mut found = Vec::new();
            let fu = &fwd[u as usize];
            for &v in fu {
                let fv = &fwd[v as usize];
                let (mut i, mut j) = (0, 0);
                while i < fu.len() && j < fv.len() {
                    match fu[i].cmp(&fv[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            let mut t = [u, v, fu[i]];
                            t.sort_unstable();
                            found.push(t);
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
            found
        })
        .collect()
}

pub fn count_triangles(g: &ChordGraph) -> u64 {
    triangles(g).len() as u64
}

pub fn realized_triangle_types(g: &ChordGraph) -> BTreeSet<PantsType> {
    triangles(g).into_iter().map(|[a, b, c]| triangle_type(g.n, a, b, c)).collect()
}

/// Triangle types with no realizing triangle in `g`.
pub fn covers_triangle_types(g: &ChordGraph) -> Vec<PantsType> {
    let got = realized_triangle_types(g);
    triangle_types(g.n).into_iter().filter(|t| !got.contains(t)).collect()
}

pub const MAX_ELL: usize = 8;

fn check_ell(ell: usize) -> Result<()> {
    if (3..=MAX_ELL).contains(&ell) {
        Ok(())
    } else {
        Err(Error::EllOutOfRange(ell))
    }
}

/// Number of simple cycles of length `ell`. Each cycle is found from its
/// smallest vertex in both directions.
pub fn count_cycles(g: &ChordGraph, ell: usize) -> Result<u64> {
    check_ell(ell)?;
    let adj = g.adjacency();
    fn walk(adj: &[Vec<u32>], start: u32, v: u32, depth: usize, ell: usize, on: &mut [bool]) -> u64 {
        if depth == ell {
            return u64::from(adj[v as usize].binary_search(&start).is_ok());
        }
        let mut total = 0;
        for &w in &adj[v as usize] {
            if w > start && !on[w as usize] {
                on[w as usize] = true;
                total += walk(adj, start, w, depth + 1, ell, on);
                on[w as usize] = false;
            }
        }
        total
    }
    let twice: u64 = (1..=g.n)
        .into_par_iter()
        .map(|s| {
            let mut on = vec![false; adj.len()];
            on[s as usize] = true;
            walk(&adj, s, s, 1, ell, &mut on)
        })
        .sum();
    Ok(twice / 2)
}

/// Gap tuple of an `ℓ`-gon, minimised over rotations and reflections.
pub fn canonical_cycle_type(gaps: &[u32]) -> Vec<u32> {
    let k = gaps.len();
    let mut best: Option<Vec<u32>> = None;
    for dir in [false, true] {
        let seq: Vec<u32> = if dir { gaps.iter().rev().copied().collect() } else { gaps.to_vec() };
        for r in 0..k {
            let rot: Vec<u32> = (0..k).map(|i| seq[(i + r) % k]).collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap_or_default()
}

/// Types of the convex `ℓ`-gons whose sides are all edges of `g`.
pub fn realized_cycle_types(g: &ChordGraph, ell: usize) -> Result<BTreeSet<Vec<u32>>> {
    check_ell(ell)?;
    let adj = g.adjacency();
    let n = g.n;
    fn grow(adj: &[Vec<u32>], n: u32, path: &mut Vec<u32>, ell: usize, out: &mut BTreeSet<Vec<u32>>) {
        let last = *path.last().expect("path starts non-empty");
        if path.len() == ell {
            if adj[last as usize].binary_search(&path[0]).is_ok() {
                out.insert(canonical_cycle_type(&gaps(n, path)));
            }
            return;
        }
        for &w in &adj[last as usize] {
            if w > last {
                path.push(w);
                grow(adj, n, path, ell, out);
                path.pop();
            }
        }
    }
    let sets: Vec<BTreeSet<Vec<u32>>> = (1..=n)
        .into_par_iter()
        .map(|s| {
            let mut out = BTreeSet::new();
            grow(&adj, n, &mut vec![s], ell, &mut out);
            out
        })
        .collect();
    Ok(sets.into_iter().flatten().collect())
}

/// Instance-level certificate: each realized type needs its own cycle, so
/// `realized <= cycles`, while `cycles = O(|E|^(ℓ/2))` bounds `|E|` below.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub n: u32,
    pub ell: usize,
    pub edges: usize,
    pub cycles: u64,
    pub realized_types: usize,
    pub total_types: Option<usize>,
    /// `realized_types^(2/ℓ)`.
    pub edge_lower_bound: f64,
    pub satisfied: bool,
}

pub fn certificate_lower_bound(g: &ChordGraph, realized_types: usize, ell: usize) -> Result<CertificateReport> {
    let cycles = count_cycles(g, ell)?;
    Ok(CertificateReport {
        n: g.n,
        ell,
        edges: g.edges.len(),
        cycles,
        realized_types,
        total_types: (ell == 3).then(|| triangle_types(g.n).len()),
        edge_lower_bound: (realized_types as f64).powf(2.0 / ell as f64),
        satisfied: realized_types as u64 <= cycles,
    })
}

pub const TRIANGULATION_CUTOFF: u32 = 14;

/// A triangulation as its sorted list of diagonals.
pub type Triangulation = Vec<(u32, u32)>;

/// Dihedral-invariant code: the minimum over the `2n` images of the sorted
/// diagonal list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriangulationClass {
    pub n: u32,
    pub code: Vec<(u32, u32)>,
}

impl TriangulationClass {
    pub fn of(n: u32, tri: &[(u32, u32)]) -> Self {
        let mut best: Option<Vec<(u32, u32)>> = None;
        for r in 0..n {
            for flip in [false, true] {
                let map = |x: u32| {
                    let y = if flip { n + 1 - x } else { x };
                    (y - 1 + r) % n + 1
                };
                let mut img: Vec<(u32, u32)> = tri
                    .iter()
                    .map(|&(u, v)| {
                        let (a, b) = (map(u), map(v));
                        (a.min(b), a.max(b))
                    })
                    .collect();
                img.sort_unstable();
                if best.as_ref().is_none_or(|b| img < *b) {
                    best = Some(img);
                }
            }
        }
        TriangulationClass { n, code: best.unwrap_or_default() }
    }
}

/// Triangulations of the sub-polygon `lo..=hi` using only edges accepted by
/// `ok`; the edge `lo-hi` itself is assumed present.
fn triangulations_between(lo: u32, hi: u32, ok: &dyn Fn(u32, u32) -> bool) -> Vec<Triangulation> {
    if hi - lo < 2 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in lo + 1..hi {
        if !ok(lo, k) || !ok(k, hi) {
            continue;
        }
        let left = triangulations_between(lo, k, ok);
        if left.is_empty() {
            continue;
        }
        let right = triangulations_between(k, hi, ok);
        for l in &left {
            for r in &right {
                let mut t = l.clone();
                t.extend_from_slice(r);
                if k - lo >= 2 {
                    t.push((lo, k));
                }
                if hi - k >= 2 {
                    t.push((k, hi));
                }
                out.push(t);
            }
        }
    }
    out
}

fn triangulations_using(n: u32, ok: &dyn Fn(u32, u32) -> bool) -> Vec<Triangulation> {
    if !ok(1, n) {
        return Vec::new();
    }
    triangulations_between(1, n, ok)
        .into_iter()
        .map(|mut t| {
            t.sort_unstable();
            t
        })
        .collect()
}

fn check_triangulation_n(n: u32) -> Result<()> {
    if n < 3 {
        Err(Error::NTooSmall(n))
    } else if n > TRIANGULATION_CUTOFF {
        Err(Error::NTooLarge(n, TRIANGULATION_CUTOFF))
    } else {
        Ok(())
    }
}

/// All triangulations of the `n`-gon.
pub fn enum_triangulations(n: u32) -> Result<Vec<Triangulation>> {
    check_triangulation_n(n)?;
    Ok(triangulations_using(n, &|_, _| true))
}

/// Dihedral classes of triangulations with their multiplicities.
pub fn enum_triangulation_classes(n: u32) -> Result<Vec<(TriangulationClass, usize)>> {
    let mut classes: BTreeMap<TriangulationClass, usize> = BTreeMap::new();
    for t in enum_triangulations(n)? {
        *classes.entry(TriangulationClass::of(n, &t)).or_default() += 1;
    }
    Ok(classes.into_iter().collect())
}

/// Which triangulation classes have a representative all of whose sides and
/// diagonals are edges of `g`.
pub fn verify_universal_triangulations(g: &ChordGraph) -> Result<UniversalityReport> {
    let n = g.n;
    check_triangulation_n(n)?;
    let classes = enum_triangulation_classes(n)?;
    let m = g.matrix();
    let sides = (1..=n).all(|i| m[i as usize][(i % n + 1) as usize]);
    let found: BTreeSet<TriangulationClass> = if sides {
        triangulations_using(n, &|u, v| m[u as usize][v as usize])
            .into_iter()
            .map(|t| TriangulationClass::of(n, &t))
            .collect()
    } else {
        BTreeSet::new()
    };
    let flags: Vec<bool> = classes.iter().map(|(c, _)| found.contains(c)).collect();
    Ok(UniversalityReport::from_flags(&flags))
}
