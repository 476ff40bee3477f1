//! Labelled punctures: the family of all wiggle codes and the recursive
//! recognition of trivalent trees by pairwise-disjoint codes.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve_model::{canonical_split, disjoint, dual_tree, CurveCode, Side};
use crate::error::{Error, Result};
use crate::type_census::{all_splits_of, enum_labelled_trees, LabelledTree};

/// All codes on `n` punctures whose enclosed set size lies in a range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaFamily {
    pub n: u32,
    pub min_size: u32,
    pub max_size: u32,
    pub codes: Vec<CurveCode>,
}

/// Exhaustive census of codes with `min_size <= |s| <= max_size`, sorted.
pub fn gen_lambda(n: u32, min_size: u32, max_size: u32) -> Result<LambdaFamily> {
    if min_size < 1 || min_size > max_size || max_size > n || n > 24 {
        return Err(Error::BadRange(min_size, max_size, n));
    }
    let mut codes = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones();
        if size < min_size || size > max_size {
            continue;
        }
        let s: Vec<u32> = (1..=n).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        let skipped: Vec<u32> = (s[0]..=s[s.len() - 1])
            .filter(|j| mask >> (j - 1) & 1 == 0)
            .collect();
        for choice in 0u32..(1 << skipped.len()) {
            let f = skipped.iter().enumerate().map(|(k, &j)| {
                (j, if choice >> k & 1 == 0 { Side::Above } else { Side::Below })
            });
            codes.push(CurveCode::new(n, s.iter().copied(), f)?);
        }
    }
    codes.sort();
    Ok(LambdaFamily { n, min_size, max_size, codes })
}

/// The double sum over enclosed-set size `i` and skipped-puncture count `k`
/// of `(n - k - i + 1) * C(k + i - 2, i - 2) * 2^k`.
pub fn lambda_double_sum(n: u32, min_size: u32, max_size: u32) -> u128 {
    let mut total = 0u128;
    for i in min_size..=max_size.min(n) {
        if i == 1 {
            total += u128::from(n);
            continue;
        }
        for k in 0..=n - i {
            total += u128::from(n - k - i + 1) * binomial(k + i - 2, i - 2) * (1u128 << k);
        }
    }
    total
}

pub(crate) fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// `(3^n - 2n - 1) / 4`.
pub fn lambda_closed_form(n: u32) -> u128 {
    (3u128.pow(n) - 2 * u128::from(n) - 1) / 4
}

/// `2^(n-1) - n - 1`: bipartitions with both sides of size at least 2.
pub fn required_bipartitions(n: u32) -> u64 {
    (1u64 << (n - 1)) - u64::from(n) - 1
}

/// Bipartition census collected from the edges of every labelled tree.
pub fn bipartitions_from_trees(n: u32) -> Result<BTreeSet<Vec<u32>>> {
    let mut out = BTreeSet::new();
    crate::type_census::for_each_labelled_tree(n, |t| out.extend(t.splits()))?;
    Ok(out)
}

/// Direct census of bipartitions, independent of tree enumeration.
pub fn bipartition_census(n: u32) -> BTreeSet<Vec<u32>> {
    all_splits_of(n)
}

/// Role of a branch when its curve is routed past the punctures of its
/// sibling branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    Above,
    Below,
    Middle,
}

const ROLES: [Role; 3] = [Role::Above, Role::Below, Role::Middle];

/// Assigns to every non-root vertex `c` the code enclosing the leaves below
/// `c`. At each vertex the children, as ordered by `order`, take the roles
/// above / below / middle: the first child's curve passes above the
/// punctures of its siblings, the second below, the third below the first
/// and above the second. Punctures outside the parent's leaf set are passed
/// the same way the parent curve passes them.
pub(crate) fn plant_codes(
    t: &LabelledTree,
    root: usize,
    order: &dyn Fn(usize, &mut Vec<usize>),
) -> Result<Vec<Option<CurveCode>>> {
    let n = t.leaf_count();
    let mut codes = vec![None; t.vertex_count()];
    let mut below: Vec<Vec<u32>> = vec![Vec::new(); t.vertex_count()];
    fill_below(t, root, usize::MAX, &mut below);
    let mut stack: Vec<(usize, usize)> = vec![(root, usize::MAX)];
    while let Some((u, from)) = stack.pop() {
        let mut kids: Vec<usize> = t.neighbors(u).iter().copied().filter(|&c| c != from).collect();
        kids.sort_by_key(|&c| below[c].first().copied().unwrap_or(u32::MAX));
        order(u, &mut kids);
        if kids.len() > 3 {
            return Err(Error::NotTrivalent);
        }
        let mut side_owner: BTreeMap<u32, Role> = BTreeMap::new();
        for (k, &c) in kids.iter().enumerate() {
            for &p in &below[c] {
                side_owner.insert(p, ROLES[k]);
            }
        }
        for (k, &c) in kids.iter().enumerate() {
            let role = ROLES[k];
            let s = &below[c];
            if s.is_empty() {
                stack.push((c, u));
                continue;
            }
            let (lo, hi) = (s[0], s[s.len() - 1]);
            let mut f = Vec::new();
            for j in lo + 1..hi {
                if s.binary_search(&j).is_ok() {
                    continue;
                }
                let side = match side_owner.get(&j) {
                    None => {
                        let parent: &CurveCode = codes[u].as_ref().expect("outside puncture implies a parent curve");
                        parent.side_at(j).expect("inside parent span")
                    }
                    Some(&other) => match role {
                        Role::Above => Side::Above,
                        Role::Below => Side::Below,
                        Role::Middle => {
                            if other == Role::Above {
                                Side::Below
                            } else {
                                Side::Above
                            }
                        }
                    },
                };
                f.push((j, side));
            }
            codes[c] = Some(CurveCode::new(n, s.iter().copied(), f)?);
            stack.push((c, u));
        }
    }
    Ok(codes)
}

pub(crate) fn fill_below(t: &LabelledTree, v: usize, from: usize, below: &mut [Vec<u32>]) {
    let mut acc = Vec::new();
    if let Some(l) = t.label(v) {
        acc.push(l);
    }
    for &c in t.neighbors(v) {
        if c != from {
            fill_below(t, c, v, below);
            acc.extend_from_slice(&below[c]);
        }
    }
    acc.sort_unstable();
    below[v] = acc;
}

/// Codes recognizing a tree with respect to a root: one per internal edge,
/// enclosing the side away from the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecognitionResult {
    pub root: usize,
    /// `((parent, child), code)` per internal edge.
    pub edges: Vec<((usize, usize), CurveCode)>,
}

impl RecognitionResult {
    pub fn codes(&self) -> Vec<CurveCode> {
        self.edges.iter().map(|(_, c)| c.clone()).collect()
    }

    /// Pairwise disjointness and labelled match of the dual tree.
    pub fn certify(&self, t: &LabelledTree) -> Result<bool> {
        let tree = dual_tree(&self.codes(), t.leaf_count())?;
        Ok(tree.same_labelled(t))
    }
}

pub fn recognize(t: &LabelledTree, root: usize) -> Result<RecognitionResult> {
    if !t.is_trivalent() || t.leaf_count() < 4 {
        return Err(Error::NotTrivalent);
    }
    if root >= t.vertex_count() || t.is_leaf(root) {
        return Err(Error::RootNotInternal(root));
    }
    let codes = plant_codes(t, root, &|_, _| {})?;
    let mut parent = vec![usize::MAX; t.vertex_count()];
    let mut stack = vec![root];
    let mut seen = vec![false; t.vertex_count()];
    seen[root] = true;
    while let Some(x) = stack.pop() {
        for &y in t.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                stack.push(y);
            }
        }
    }
    let mut edges: Vec<((usize, usize), CurveCode)> = t
        .internal_vertices()
        .filter(|&c| c != root)
        .map(|c| ((parent[c], c), codes[c].clone().expect("planted")))
        .collect();
    edges.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(RecognitionResult { root, edges })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalityReport {
    pub total: usize,
    pub realized: usize,
    /// Indices of unrealized types in enumeration order.
    pub failures: Vec<usize>,
}

impl UniversalityReport {
    pub fn is_universal(&self) -> bool {
        self.failures.is_empty()
    }

    pub(crate) fn from_flags(flags: &[bool]) -> Self {
        let failures: Vec<usize> = flags
            .iter()
            .enumerate()
            .filter(|(_, &ok)| !ok)
            .map(|(i, _)| i)
            .collect();
        UniversalityReport { total: flags.len(), realized: flags.len() - failures.len(), failures }
    }
}

/// Searches, for every labelled tree, a pairwise-disjoint subfamily whose dual
/// tree is that tree. Families containing the recognition output are
/// accepted without search.
pub fn verify_universal_labelled(family: &[CurveCode], n: u32) -> Result<UniversalityReport> {
    let trees = enum_labelled_trees(n)?;
    let members: BTreeSet<&CurveCode> = family.iter().filter(|c| c.n() == n).collect();
    let mut by_split: BTreeMap<Vec<u32>, Vec<&CurveCode>> = BTreeMap::new();
    for c in &members {
        if c.is_essential() {
            by_split.entry(c.split()).or_default().push(c);
        }
    }
    let flags: Vec<bool> = trees
        .par_iter()
        .map(|t| {
            if n >= 4 {
                if let Ok(r) = recognize(t, t.default_root().expect("n >= 4")) {
                    if r.edges.iter().all(|(_, c)| members.contains(c)) {
                        return true;
                    }
                }
            }
            realize_by_search(t, &by_split)
        })
        .collect();
    Ok(UniversalityReport::from_flags(&flags))
}

fn realize_by_search(t: &LabelledTree, by_split: &BTreeMap<Vec<u32>, Vec<&CurveCode>>) -> bool {
    let splits = t.splits();
    let mut options = Vec::with_capacity(splits.len());
    for s in &splits {
        match by_split.get(s) {
            Some(v) => options.push(v.as_slice()),
            None => return false,
        }
    }
    fn rec<'a>(options: &[&[&'a CurveCode]], chosen: &mut Vec<&'a CurveCode>, t: &LabelledTree) -> bool {
        if chosen.len() == options.len() {
            let codes: Vec<CurveCode> = chosen.iter().map(|&c| c.clone()).collect();
            return dual_tree(&codes, t.leaf_count()).is_ok_and(|d| d.same_labelled(t));
        }
        for &c in options[chosen.len()] {
            if chosen.iter().all(|&d| disjoint(c, d).unwrap_or(false)) {
                chosen.push(c);
                if rec(options, chosen, t) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(&options, &mut Vec::new(), t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub family: Vec<CurveCode>,
    pub size: usize,
    /// Proven minimal among subfamilies of the code census.
    pub optimal: bool,
    pub nodes: u64,
}

/// Every way of realizing a tree by disjoint essential codes, as bitsets over
/// the code list.
fn realizations(t: &LabelledTree, codes: &[CurveCode]) -> Vec<u128> {
    let splits = t.splits();
    let options: Vec<Vec<usize>> = splits
        .iter()
        .map(|s| (0..codes.len()).filter(|&i| &codes[i].split() == s).collect())
        .collect();
    let mut out = Vec::new();
    fn rec(options: &[Vec<usize>], codes: &[CurveCode], chosen: &mut Vec<usize>, out: &mut Vec<u128>) {
        if chosen.len() == options.len() {
            out.push(chosen.iter().fold(0u128, |m, &i| m | 1 << i));
            return;
        }
        for &i in &options[chosen.len()] {
            if chosen.iter().all(|&j| disjoint(&codes[i], &codes[j]).unwrap_or(false)) {
                chosen.push(i);
                rec(options, codes, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(&options, codes, &mut Vec::new(), &mut out);
    out
}

/// Smallest universal subfamily of the essential code census.
///
/// Exact mode is a branch and bound seeded by the greedy answer; its lower
/// bound counts bipartitions not yet carried by any chosen code. When the
/// node budget runs out the best family so far is returned with
/// `optimal = false`.
pub fn min_family_search(n: u32, mode: SearchMode, budget: u64) -> Result<SearchOutcome> {
    if n < 4 {
        return Err(Error::NTooSmall(n));
    }
    if n > 5 {
        return Err(Error::NTooLarge(n, 5));
    }
    let codes = gen_lambda(n, 2, n - 2)?.codes;
    let trees = enum_labelled_trees(n)?;
    let reals: Vec<Vec<u128>> = trees.iter().map(|t| realizations(t, &codes)).collect();
    let split_of: Vec<Vec<u32>> = codes.iter().map(CurveCode::split).collect();
    let greedy = greedy_cover(&reals);
    let mut best = greedy;
    let mut nodes = 0u64;
    let mut optimal = false;
    if mode == SearchMode::Exact {
        // {1,2} | rest is decided first, then the remaining trees by fewest options
        let first_split = canonical_split(n, &[1, 2]);
        let mut order: Vec<usize> = (0..trees.len()).collect();
        order.sort_by_key(|&i| (!trees[i].splits().contains(&first_split), reals[i].len()));
        let all_splits: Vec<Vec<u32>> = bipartition_census(n).into_iter().collect();
        let mut exhausted = true;
        branch(
            &order, &reals, &split_of, &all_splits, 0, &mut best, &mut nodes, budget, &mut exhausted,
        );
        optimal = exhausted;
    }
    let family: Vec<CurveCode> = (0..codes.len())
        .filter(|&i| best >> i & 1 == 1)
        .map(|i| codes[i].clone())
        .collect();
    Ok(SearchOutcome { size: family.len(), family, optimal, nodes })
}

fn greedy_cover(reals: &[Vec<u128>]) -> u128 {
    let mut mask = 0u128;
    loop {
        let open: Vec<usize> = (0..reals.len())
            .filter(|&i| !reals[i].iter().any(|&r| r & !mask == 0))
            .collect();
        if open.is_empty() {
            return mask;
        }
        let mut popularity = [0u32; 128];
        for &i in &open {
            for &r in &reals[i] {
                for (b, p) in popularity.iter_mut().enumerate() {
                    if r >> b & 1 == 1 {
                        *p += 1;
                    }
                }
            }
        }
        let pick = open
            .iter()
            .flat_map(|&i| reals[i].iter().copied())
            .min_by_key(|&r| {
                let new = r & !mask;
                let pop: u32 = (0..128).filter(|&b| new >> b & 1 == 1).map(|b| popularity[b]).sum();
                (new.count_ones(), std::cmp::Reverse(pop), r)
            })
            .expect("every tree has a realization in the full census");
        mask |= pick;
    }
}

#[allow(clippy::too_many_arguments)]
fn branch(
    order: &[usize],
    reals: &[Vec<u128>],
    split_of: &[Vec<u32>],
    all_splits: &[Vec<u32>],
    mask: u128,
    best: &mut u128,
    nodes: &mut u64,
    budget: u64,
    exhausted: &mut bool,
) {
    *nodes += 1;
    if *nodes > budget {
        *exhausted = false;
        return;
    }
    let carried: BTreeSet<&Vec<u32>> = (0..split_of.len())
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| &split_of[i])
        .collect();
    let bound = mask.count_ones() as usize + all_splits.len() - carried.len();
    if bound >= best.count_ones() as usize {
        return;
    }
    let Some(&next) = order.iter().find(|&&i| !reals[i].iter().any(|&r| r & !mask == 0)) else {
        *best = mask;
        return;
    };
    let mut opts = reals[next].clone();
    opts.sort_by_key(|&r| ((r & !mask).count_ones(), r));
    opts.dedup_by_key(|r| *r & !mask);
    for r in opts {
        branch(order, reals, split_of, all_splits, mask | r, best, nodes, budget, exhausted);
        if *nodes > budget {
            return;
        }
    }
}
