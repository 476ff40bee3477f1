//! Unlabelled punctures: cyclic-interval families `γ_{i,j}`, random and greedy
//! index sets covering every pants type, and the all-pairs family realizing
//! every decomposition type.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve_model::{canonical_split, sets_laminar, CyclicInterval};
use crate::error::{Error, Result};
use crate::labelled_sphere::UniversalityReport;
use crate::type_census::{
    canonical_unlabelled, enum_pants_types, enum_unlabelled_classes, tree_from_laminar, LabelledTree,
    PantsType, UnlabelledTreeClass,
};

/// Generator set `S ⊆ {1..n}` inducing the curves `γ_{i,j}`, `i, j ∈ S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexFamily {
    pub n: u32,
    pub s: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl IndexFamily {
    pub fn new(n: u32, s: impl IntoIterator<Item = u32>) -> Self {
        let mut s: Vec<u32> = s.into_iter().map(|x| (x + n - 1) % n + 1).collect();
        s.sort_unstable();
        s.dedup();
        IndexFamily { n, s, seed: None, c: None }
    }

    /// Nondegenerate induced curves, `i != j`.
    pub fn curves(&self) -> Vec<CyclicInterval> {
        let mut out = Vec::with_capacity(self.s.len() * self.s.len());
        for &i in &self.s {
            for &j in &self.s {
                if i != j {
                    out.push(CyclicInterval::new(self.n, i as i64, j as i64));
                }
            }
        }
        out
    }

    pub fn family_size(&self) -> usize {
        let k = self.s.len();
        k * k.saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomConstructionParams {
    pub n: u32,
    pub c: f64,
    pub seed: u64,
}

impl RandomConstructionParams {
    /// `c * ln(n)^(1/3) / n^(1/3)` and whether it had to be clamped to 1.
    pub fn probability(&self) -> Result<(f64, bool)> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::BadC(self.c));
        }
        let n = f64::from(self.n.max(2));
        let p = self.c * n.ln().cbrt() / n.cbrt();
        Ok(if p > 1.0 { (1.0, true) } else { (p, false) })
    }
}

/// Uniform draw in `[0, 1)` for index `i`, independent of draw order.
fn keyed_uniform(seed: u64, i: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng.gen::<f64>()
}

/// Puts each index in `S` independently with the construction probability.
pub fn random_index_set(params: RandomConstructionParams) -> Result<IndexFamily> {
    let (p, _) = params.probability()?;
    let s: Vec<u32> = (1..=params.n)
        .filter(|&i| keyed_uniform(params.seed, u64::from(i)) < p)
        .collect();
    Ok(IndexFamily { n: params.n, s, seed: Some(params.seed), c: Some(params.c) })
}

/// Fixed-width bitset over `Z_n` with cyclic rotation.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CyclicBits {
    n: usize,
    words: Vec<u64>,
}

impl CyclicBits {
    fn from_indices(n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut words = vec![0u64; n.div_ceil(64)];
        for i in idx {
            words[i / 64] |= 1 << (i % 64);
        }
        CyclicBits { n, words }
    }

    #[cfg(test)]
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Bit `x` of the result is bit `(x + k) mod n` of `self`.
    fn rotated(&self, k: usize) -> CyclicBits {
        let k = k % self.n;
        if k == 0 {
            return self.clone();
        }
        // shift right by k, then wrap the low k bits to the top
        let low = self.shift_right(k);
        let high = self.shift_left(self.n - k);
        let mut words: Vec<u64> = low.iter().zip(&high).map(|(a, b)| a | b).collect();
        self.mask_tail(&mut words);
        CyclicBits { n: self.n, words }
    }

    fn shift_right(&self, k: usize) -> Vec<u64> {
        let (wq, r) = (k / 64, k % 64);
        let len = self.words.len();
        (0..len)
            .map(|i| {
                let lo = self.words.get(i + wq).copied().unwrap_or(0);
                let hi = self.words.get(i + wq + 1).copied().unwrap_or(0);
                if r == 0 {
                    lo
                } else {
                    (lo >> r) | (hi << (64 - r))
                }
            })
            .collect()
    }

    fn shift_left(&self, k: usize) -> Vec<u64> {
        let (wq, r) = (k / 64, k % 64);
        let len = self.words.len();
        (0..len)
            .map(|i| {
                let lo = if i >= wq { self.words[i - wq] } else { 0 };
                let lower = if i > wq { self.words[i - wq - 1] } else { 0 };
                if r == 0 {
                    lo
                } else {
                    (lo << r) | (lower >> (64 - r))
                }
            })
            .collect()
    }

    fn mask_tail(&self, words: &mut [u64]) {
        let extra = words.len() * 64 - self.n;
        if extra > 0 {
            let last = words.len() - 1;
            words[last] &= u64::MAX >> extra;
        }
    }

    fn intersects3(&self, b: &CyclicBits, c: &CyclicBits) -> bool {
        self.words
            .iter()
            .zip(&b.words)
            .zip(&c.words)
            .any(|((x, y), z)| x & y & z != 0)
    }
}

/// Pants types with no realizing triple in `S`, in listing order.
///
/// Three indices at cyclic gaps `(k1, k2, k3)` bound a pants of that type;
/// both cyclic orders of the gaps are tried since reflections are allowed.
pub fn covers_pants_types(fam: &IndexFamily, essential_only: bool) -> Vec<PantsType> {
    let n = fam.n as usize;
    let bits = CyclicBits::from_indices(n, fam.s.iter().map(|&i| i as usize - 1));
    let types = enum_pants_types(fam.n, essential_only);
    let mut rotations: BTreeMap<usize, CyclicBits> = BTreeMap::new();
    for t in &types {
        let [a, b, _] = t.0;
        for off in [a, a + b, b] {
            rotations.entry(off as usize % n).or_insert_with(|| bits.rotated(off as usize));
        }
    }
    let missing: Vec<bool> = types
        .par_iter()
        .map(|t| {
            let [a, b, _] = t.0;
            let (a, b) = (a as usize, b as usize);
            let r = |k: usize| &rotations[&(k % n)];
            !(bits.intersects3(r(a), r(a + b)) || bits.intersects3(r(b), r(a + b)))
        })
        .collect();
    types.into_iter().zip(missing).filter(|(_, m)| *m).map(|(t, _)| t).collect()
}

/// Types realized by the sorted index triple (or pair/single in zero mode).
fn types_of_tuple(n: u32, idx: &[u32]) -> PantsType {
    match *idx {
        [_] => PantsType::new(0, 0, n),
        [x, y] => PantsType::new(0, y - x, n - (y - x)),
        [x, y, z] => PantsType::new(y - x, z - y, n - (z - x)),
        _ => unreachable!("tuples have one to three indices"),
    }
}

#[cfg(test)]
fn covered_types(fam: &IndexFamily, essential_only: bool) -> BTreeSet<PantsType> {
    let s = &fam.s;
    let mut out = BTreeSet::new();
    for a in 0..s.len() {
        if !essential_only {
            out.insert(types_of_tuple(fam.n, &[s[a]]));
        }
        for b in a + 1..s.len() {
            if !essential_only {
                out.insert(types_of_tuple(fam.n, &[s[a], s[b]]));
            }
            for c in b + 1..s.len() {
                out.insert(types_of_tuple(fam.n, &[s[a], s[b], s[c]]));
            }
        }
    }
    out
}

/// Grows `S` one index at a time, always taking the index that newly covers
/// the most types (lowest index on ties).
pub fn greedy_index_set(n: u32, essential_only: bool) -> Result<IndexFamily> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    let total: BTreeSet<PantsType> = enum_pants_types(n, essential_only).into_iter().collect();
    let mut s: Vec<u32> = Vec::new();
    let mut covered: HashSet<PantsType> = HashSet::new();
    while covered.len() < total.len() {
        let mut best: Option<(usize, u32)> = None;
        for x in 1..=n {
            if s.contains(&x) {
                continue;
            }
            let mut fresh = HashSet::new();
            for (ai, &a) in s.iter().enumerate() {
                if !essential_only {
                    fresh.insert(pair_type(n, a, x));
                }
                for &b in &s[ai + 1..] {
                    let mut t = [a, b, x];
                    t.sort_unstable();
                    fresh.insert(types_of_tuple(n, &t));
                }
            }
            if !essential_only {
                fresh.insert(PantsType::new(0, 0, n));
            }
            let gain = fresh.iter().filter(|t| !covered.contains(t)).count();
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, x));
            }
        }
        let (_, x) = best.expect("some index remains while types are uncovered");
        for (ai, &a) in s.iter().enumerate() {
            if !essential_only {
                covered.insert(pair_type(n, a, x));
            }
            for &b in &s[ai + 1..] {
                let mut t = [a, b, x];
                t.sort_unstable();
                covered.insert(types_of_tuple(n, &t));
            }
        }
        if !essential_only {
            covered.insert(PantsType::new(0, 0, n));
        }
        s.push(x);
        s.sort_unstable();
    }
    Ok(IndexFamily::new(n, s))
}

fn pair_type(n: u32, a: u32, b: u32) -> PantsType {
    let (x, y) = if a < b { (a, b) } else { (b, a) };
    types_of_tuple(n, &[x, y])
}

/// Search cutoff for [`exact_min_index_set`].
pub const EXACT_INDEX_CUTOFF: u32 = 30;

/// Minimum-size `S` covering every essential pants type. Rotations are
/// factored out by forcing index 1 into `S`; sizes are tried in increasing
/// order starting from the counting bound `C(|S|, 3) >= #types`.
pub fn exact_min_index_set(n: u32) -> Result<IndexFamily> {
    if n > EXACT_INDEX_CUTOFF {
        return Err(Error::NTooLarge(n, EXACT_INDEX_CUTOFF));
    }
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    let types = enum_pants_types(n, true);
    let id: BTreeMap<PantsType, usize> = types.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let mut k = 3usize;
    while binom3(k) < types.len() {
        k += 1;
    }
    loop {
        let mut counts = vec![0u32; types.len()];
        let mut chosen = vec![1u32];
        if dfs_cover(n, k, &id, &mut chosen, &mut counts, 0) {
            return Ok(IndexFamily::new(n, chosen));
        }
        k += 1;
    }
}

fn binom3(k: usize) -> usize {
    if k < 3 {
        0
    } else {
        k * (k - 1) * (k - 2) / 6
    }
}

fn dfs_cover(
    n: u32,
    k: usize,
    id: &BTreeMap<PantsType, usize>,
    chosen: &mut Vec<u32>,
    counts: &mut Vec<u32>,
    covered: usize,
) -> bool {
    if covered == id.len() {
        return true;
    }
    if chosen.len() == k {
        return false;
    }
    // every remaining triple covers at most one new type
    if covered + binom3(k) - binom3(chosen.len()) < id.len() {
        return false;
    }
    let last = *chosen.last().expect("index 1 is always present");
    let slots = k - chosen.len();
    for x in last + 1..=n {
        if ((n - x + 1) as usize) < slots {
            break;
        }
        let mut added = Vec::new();
        let mut newly = 0;
        for a in 0..chosen.len() {
            for b in a + 1..chosen.len() {
                let t = types_of_tuple(n, &[chosen[a], chosen[b], x]);
                let i = id[&t];
                if counts[i] == 0 {
                    newly += 1;
                }
                counts[i] += 1;
                added.push(i);
            }
        }
        chosen.push(x);
        if dfs_cover(n, k, id, chosen, counts, covered + newly) {
            return true;
        }
        chosen.pop();
        for i in added {
            counts[i] -= 1;
        }
    }
    false
}

/// Every nondegenerate `γ_{i,j}`, `i != j`: `n (n - 1)` curves.
pub fn all_pairs_family(n: u32) -> Result<Vec<CyclicInterval>> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    let mut out = Vec::with_capacity((n * (n - 1)) as usize);
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                out.push(CyclicInterval::new(n, i as i64, j as i64));
            }
        }
    }
    Ok(out)
}

/// Plants a tree in the plane with punctures in depth-first leaf order,
/// rooted at a leaf that is placed last; each internal edge becomes the
/// interval of leaves beyond it.
pub fn realize_tree_shape(t: &LabelledTree) -> Result<Vec<CyclicInterval>> {
    let n = t.leaf_count();
    if !t.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    // root at a leaf farthest from the centre, ties by label
    let ecc = |v: usize| {
        let mut dist = vec![usize::MAX; t.vertex_count()];
        let mut queue = std::collections::VecDeque::from([v]);
        dist[v] = 0;
        while let Some(x) = queue.pop_front() {
            for &y in t.neighbors(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist.into_iter().max().unwrap_or(0)
    };
    let root = (0..n as usize).max_by_key(|&v| (ecc(v), std::cmp::Reverse(v))).expect("n >= 3");
    let mut size = vec![0usize; t.vertex_count()];
    fn subtree(t: &LabelledTree, v: usize, from: usize, size: &mut [usize]) -> usize {
        let s = usize::from(t.is_leaf(v))
            + t.neighbors(v).iter().filter(|&&c| c != from).map(|&c| subtree(t, c, v, size)).sum::<usize>();
        size[v] = s;
        s
    }
    let start = t.neighbors(root)[0];
    subtree(t, start, root, &mut size);
    let mut position = vec![0u32; t.vertex_count()];
    let mut next = 1u32;
    let mut blocks: Vec<(u32, u32)> = Vec::new();
    fn walk(
        t: &LabelledTree,
        v: usize,
        from: usize,
        size: &[usize],
        next: &mut u32,
        position: &mut [u32],
        blocks: &mut Vec<(u32, u32)>,
    ) {
        if t.is_leaf(v) {
            position[v] = *next;
            *next += 1;
            return;
        }
        let first = *next;
        let mut kids: Vec<usize> = t.neighbors(v).iter().copied().filter(|&c| c != from).collect();
        kids.sort_by_key(|&c| (std::cmp::Reverse(size[c]), c));
        for c in kids {
            walk(t, c, v, size, next, position, blocks);
        }
        blocks.push((first, *next));
    }
    walk(t, start, root, &size, &mut next, &mut position, &mut blocks);
    let mut out: Vec<CyclicInterval> = blocks
        .into_iter()
        .filter(|&(a, b)| b - a >= 2 && b - a <= n - 2)
        .map(|(a, b)| CyclicInterval::new(n, a as i64, b as i64))
        .collect();
    out.sort();
    Ok(out)
}

pub fn realize_unlabelled_tree(cls: &UnlabelledTreeClass, n: u32) -> Result<Vec<CyclicInterval>> {
    if cls.leaves != n {
        return Err(Error::LeafCountMismatch(cls.leaves as usize, n));
    }
    let rep = enum_unlabelled_classes(n)?
        .into_iter()
        .find(|(c, _)| c == cls)
        .map(|(_, t)| t)
        .ok_or_else(|| Error::BadParameters("unknown tree class".into()))?;
    realize_tree_shape(&rep)
}

/// Dual tree of a family of cyclic curves forming a decomposition, using
/// bipartition sides that avoid puncture 1.
pub fn intervals_dual_tree(n: u32, fam: &[CyclicInterval]) -> Result<LabelledTree> {
    let sets: Vec<Vec<u32>> = fam.iter().map(|g| canonical_split(n, &g.enclosed())).collect();
    tree_from_laminar(n, &sets)
}

/// For each unlabelled class, searches the family for `n - 3` essential
/// curves with pairwise compatible bipartitions whose dual tree is in that
/// class. Curves are compared through their bipartitions: on the sphere, two
/// curves of this kind are disjoint up to isotopy iff those are compatible.
pub fn verify_universal_unlabelled(fam: &[CyclicInterval], n: u32) -> Result<UniversalityReport> {
    let classes = enum_unlabelled_classes(n)?;
    let index: BTreeMap<&UnlabelledTreeClass, usize> =
        classes.iter().enumerate().map(|(i, (c, _))| (c, i)).collect();
    let mut realized = vec![false; classes.len()];
    let splits: Vec<Vec<u32>> = fam
        .iter()
        .filter(|g| g.n == n && g.len() >= 2 && g.len() + 2 <= n)
        .map(|g| canonical_split(n, &g.enclosed()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let need = (n - 3) as usize;
    let mut chosen: Vec<usize> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        n: u32,
        start: usize,
        need: usize,
        splits: &[Vec<u32>],
        chosen: &mut Vec<usize>,
        index: &BTreeMap<&UnlabelledTreeClass, usize>,
        realized: &mut [bool],
        remaining: &mut usize,
    ) {
        if *remaining == 0 {
            return;
        }
        if chosen.len() == need {
            let sets: Vec<Vec<u32>> = chosen.iter().map(|&i| splits[i].clone()).collect();
            if let Ok(t) = tree_from_laminar(n, &sets) {
                let cls = canonical_unlabelled(&t).expect("dual trees are trivalent");
                let i = index[&cls];
                if !realized[i] {
                    realized[i] = true;
                    *remaining -= 1;
                }
            }
            return;
        }
        for k in start..splits.len() {
            if splits.len() - k < need - chosen.len() {
                break;
            }
            if chosen.iter().all(|&c| sets_laminar(&splits[c], &splits[k])) {
                chosen.push(k);
                rec(n, k + 1, need, splits, chosen, index, realized, remaining);
                chosen.pop();
            }
        }
    }
    let mut remaining = classes.len();
    if need == 0 {
        realized.iter_mut().for_each(|r| *r = true);
    } else {
        rec(n, 0, need, &splits, &mut chosen, &index, &mut realized, &mut remaining);
    }
    Ok(UniversalityReport::from_flags(&realized))
}

/// One row of a scaling experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: u32,
    pub c: f64,
    pub seed: u64,
    pub set_size: usize,
    pub family_size: usize,
    pub covered: usize,
    pub total: usize,
    pub runtime_ms: u128,
    /// Greedy index set size for the same `n`, when computed.
    pub greedy_set_size: Option<usize>,
}

pub fn scaling_run(n: u32, c: f64, seed: u64, essential_only: bool) -> Result<ExperimentRow> {
    let started = Instant::now();
    let fam = random_index_set(RandomConstructionParams { n, c, seed })?;
    let missing = covers_pants_types(&fam, essential_only);
    let total = enum_pants_types(n, essential_only).len();
    Ok(ExperimentRow {
        n,
        c,
        seed,
        set_size: fam.s.len(),
        family_size: fam.family_size(),
        covered: total - missing.len(),
        total,
        runtime_ms: started.elapsed().as_millis(),
        greedy_set_size: None,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    num / den
}

/// `8 n^(4/3) ln(n)^(2/3)`, the size envelope used for the random family.
pub fn size_envelope(n: u32) -> f64 {
    let n = f64::from(n);
    8.0 * n.powf(4.0 / 3.0) * n.ln().powf(2.0 / 3.0)
}
