use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::curve_model::{canonical_split, containment_parents};
use crate::error::{Error, Result};

/// Tree whose leaves carry the labels `1..=n`.
///
/// Vertices `0..n` are the leaves (vertex `k - 1` has label `k`); internal
/// vertices follow. Trees produced by the enumerators are trivalent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledTree {
    n: u32,
    adj: Vec<Vec<usize>>,
}

impl LabelledTree {
    pub fn leaf_count(&self) -> u32 {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v < self.n as usize
    }

    pub fn label(&self, v: usize) -> Option<u32> {
        self.is_leaf(v).then_some(v as u32 + 1)
    }

    pub fn leaf_vertex(&self, label: u32) -> usize {
        label as usize - 1
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.n as usize..self.adj.len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, ns) in self.adj.iter().enumerate() {
            for &v in ns {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Edges with both endpoints internal.
    pub fn internal_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .filter(|&(u, v)| !self.is_leaf(u) && !self.is_leaf(v))
            .collect()
    }

    pub fn is_trivalent(&self) -> bool {
        self.internal_vertices().all(|v| self.adj[v].len() == 3)
            && (0..self.n as usize).all(|v| self.adj[v].len() == 1)
            && self.adj.len() + 2 == 2 * self.n as usize
    }

    /// Leaf labels in the component containing `v` once the edge `u-v` is cut.
    pub fn leaves_beyond(&self, u: usize, v: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![(v, u)];
        while let Some((x, from)) = stack.pop() {
            if let Some(l) = self.label(x) {
                out.push(l);
            }
            for &y in &self.adj[x] {
                if y != from {
                    stack.push((y, x));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Canonical sides (not containing leaf 1) of every internal edge, sorted.
    /// Two labelled trivalent trees are equal iff their split lists are.
    pub fn splits(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self
            .internal_edges()
            .into_iter()
            .map(|(u, v)| canonical_split(self.n, &self.leaves_beyond(u, v)))
            .collect();
        out.sort();
        out
    }

    pub fn same_labelled(&self, other: &LabelledTree) -> bool {
        self.n == other.n && self.splits() == other.splits()
    }

    /// Lowest-index internal vertex.
    pub fn default_root(&self) -> Option<usize> {
        self.internal_vertices().next()
    }

    /// Parent-array form rooted at the default root.
    pub fn to_parent_array(&self) -> ParentArray {
        let root = self.default_root().unwrap_or(0);
        let mut parent = vec![None; self.adj.len()];
        let mut stack = vec![(root, usize::MAX)];
        while let Some((x, from)) = stack.pop() {
            for &y in &self.adj[x] {
                if y != from {
                    parent[y] = Some(x);
                    stack.push((y, x));
                }
            }
        }
        ParentArray { n: self.n, parent }
    }

    pub fn from_parent_array(p: &ParentArray) -> Result<Self> {
        let mut b = TreeBuilder::default();
        let ids: Vec<usize> = (0..p.parent.len()).map(|_| b.add_vertex()).collect();
        for (v, par) in p.parent.iter().enumerate() {
            if let Some(u) = *par {
                if u >= ids.len() {
                    return Err(Error::BadParameters(format!("parent {u} out of range")));
                }
                b.add_edge(ids[u], ids[v]);
            }
        }
        let labels: Vec<(usize, u32)> = (0..p.n as usize).map(|v| (v, v as u32 + 1)).collect();
        b.finish(&labels)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph tree {\n");
        for v in 0..self.adj.len() {
            match self.label(v) {
                Some(l) => writeln!(s, "  v{v} [label=\"{l}\", shape=box];").unwrap(),
                None => writeln!(s, "  v{v} [label=\"\", shape=point];").unwrap(),
            }
        }
        for (u, v) in self.edges() {
            writeln!(s, "  v{u} -- v{v};").unwrap();
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParentArray {
    /// Leaves are vertices `0..n` with labels `1..=n`.
    pub n: u32,
    pub parent: Vec<Option<usize>>,
}

/// Assembles a tree from arbitrary vertex ids and relabels it so that the
/// designated leaves become vertices `0..n`.
#[derive(Debug, Default, Clone)]
pub struct TreeBuilder {
    adj: Vec<Vec<usize>>,
}

impl TreeBuilder {
    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u].push(v);
        self.adj[v].push(u);
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Degree-1 vertices in id order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.adj.len()).filter(|&v| self.adj[v].len() == 1).collect()
    }

    /// `labels` maps builder ids to leaf labels `1..=n`, each used once.
    pub fn finish(self, labels: &[(usize, u32)]) -> Result<LabelledTree> {
        self.finish_mapped(labels).map(|(t, _)| t)
    }

    /// As [`TreeBuilder::finish`], also returning the builder id -> vertex map.
    pub fn finish_mapped(self, labels: &[(usize, u32)]) -> Result<(LabelledTree, Vec<usize>)> {
        let n = labels.len();
        let mut map = vec![usize::MAX; self.adj.len()];
        let mut seen = vec![false; n];
        for &(id, l) in labels {
            let k = l as usize;
            if k == 0 || k > n || seen[k - 1] || id >= self.adj.len() || map[id] != usize::MAX {
                return Err(Error::BadParameters("leaf labels must be 1..=n".into()));
            }
            seen[k - 1] = true;
            map[id] = k - 1;
        }
        let mut next = n;
        for m in map.iter_mut() {
            if *m == usize::MAX {
                *m = next;
                next += 1;
            }
        }
        let mut adj = vec![Vec::new(); self.adj.len()];
        for (u, ns) in self.adj.iter().enumerate() {
            adj[map[u]] = ns.iter().map(|&v| map[v]).collect();
            adj[map[u]].sort_unstable();
        }
        let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
        if adj.is_empty() || edges + 1 != adj.len() || !connected(&adj) {
            return Err(Error::BadParameters("not a tree".into()));
        }
        for v in 0..n {
            if adj[v].len() != 1 && adj.len() > 1 {
                return Err(Error::BadParameters(format!("labelled vertex {} is not a leaf", v + 1)));
            }
        }
        Ok((LabelledTree { n: n as u32, adj }, map))
    }
}

fn connected(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == adj.len()
}

/// Calls `visit` on every labelled trivalent tree with `n` leaves, each once,
/// by inserting leaf `k` on every edge of each tree with `k - 1` leaves.
pub fn for_each_labelled_tree(n: u32, mut visit: impl FnMut(&LabelledTree)) -> Result<()> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    let n = n as usize;
    // Leaves are 0..n, internal vertices n.. in creation order.
    let mut edges = vec![(0, n), (1, n), (2, n)];
    fn rec(
        k: usize,
        n: usize,
        edges: &mut Vec<(usize, usize)>,
        visit: &mut dyn FnMut(&LabelledTree),
    ) {
        if k == n {
            let mut adj = vec![Vec::new(); 2 * n - 2];
            for &(u, v) in edges.iter() {
                adj[u].push(v);
                adj[v].push(u);
            }
            for a in adj.iter_mut() {
                a.sort_unstable();
            }
            visit(&LabelledTree { n: n as u32, adj });
            return;
        }
        let x = n + k - 2;
        for i in 0..edges.len() {
            let (a, b) = edges[i];
            edges[i] = (a, x);
            edges.push((x, b));
            edges.push((x, k));
            rec(k + 1, n, edges, visit);
            edges.pop();
            edges.pop();
            edges[i] = (a, b);
        }
    }
    rec(3, n, &mut edges, &mut visit);
    Ok(())
}

pub fn enum_labelled_trees(n: u32) -> Result<Vec<LabelledTree>> {
    let mut out = Vec::new();
    for_each_labelled_tree(n, |t| out.push(t.clone()))?;
    Ok(out)
}

/// Isomorphism class of a trivalent tree ignoring leaf labels: AHU encoding
/// rooted at the centroid (or at the central edge when there are two).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnlabelledTreeClass {
    pub leaves: u32,
    pub code: String,
}

/// AHU code of an unrooted tree given as adjacency lists.
pub(crate) fn unrooted_code(adj: &[Vec<usize>]) -> String {
    let m = adj.len();
    if m == 1 {
        return "()".into();
    }
    // subtree sizes from vertex 0
    let mut order = Vec::with_capacity(m);
    let mut parent = vec![usize::MAX; m];
    let mut stack = vec![0];
    parent[0] = 0;
    while let Some(x) = stack.pop() {
        order.push(x);
        for &y in &adj[x] {
            if parent[y] == usize::MAX {
                parent[y] = x;
                stack.push(y);
            }
        }
    }
    let mut size = vec![1usize; m];
    for &x in order.iter().rev() {
        if x != 0 {
            size[parent[x]] += size[x];
        }
    }
    let centroids: Vec<usize> = (0..m)
        .filter(|&v| {
            let below = adj[v]
                .iter()
                .filter(|&&y| y != v && parent[y] == v && y != 0)
                .map(|&y| size[y])
                .max()
                .unwrap_or(0);
            2 * below.max(m - size[v]) <= m
        })
        .collect();
    fn rooted(adj: &[Vec<usize>], v: usize, from: usize) -> String {
        let mut kids: Vec<String> = adj[v]
            .iter()
            .filter(|&&y| y != from)
            .map(|&y| rooted(adj, y, v))
            .collect();
        kids.sort();
        format!("({})", kids.concat())
    }
    match centroids.as_slice() {
        [c] => rooted(adj, *c, usize::MAX),
        [a, b] => {
            let mut pair = [rooted(adj, *a, *b), rooted(adj, *b, *a)];
            pair.sort();
            format!("[{}{}]", pair[0], pair[1])
        }
        _ => unreachable!("a tree has one or two centroids"),
    }
}

pub fn canonical_unlabelled(t: &LabelledTree) -> Result<UnlabelledTreeClass> {
    if !t.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    Ok(UnlabelledTreeClass { leaves: t.n, code: unrooted_code(&t.adj) })
}

/// One representative per unlabelled class, sorted by class code.
///
/// Classes for `k + 1` leaves come from inserting a leaf on every edge of one
/// representative per class with `k` leaves.
pub fn enum_unlabelled_classes(n: u32) -> Result<Vec<(UnlabelledTreeClass, LabelledTree)>> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    let mut reps = vec![enum_labelled_trees(3)?.remove(0)];
    for k in 4..=n {
        let mut seen = std::collections::BTreeMap::new();
        for t in &reps {
            for (a, b) in t.edges() {
                let mut builder = TreeBuilder::default();
                for _ in 0..t.adj.len() {
                    builder.add_vertex();
                }
                for (u, v) in t.edges() {
                    if (u, v) != (a, b) {
                        builder.add_edge(u, v);
                    }
                }
                let x = builder.add_vertex();
                let leaf = builder.add_vertex();
                builder.add_edge(a, x);
                builder.add_edge(x, b);
                builder.add_edge(x, leaf);
                let labels: Vec<(usize, u32)> = builder
                    .leaves()
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| (v, i as u32 + 1))
                    .collect();
                let nt = builder.finish(&labels)?;
                debug_assert_eq!(nt.n, k);
                let cls = canonical_unlabelled(&nt)?;
                seen.entry(cls).or_insert(nt);
            }
        }
        reps = seen.into_values().collect();
    }
    let mut out: Vec<_> = reps
        .into_iter()
        .map(|t| (canonical_unlabelled(&t).expect("trivalent"), t))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Leaf set beyond an internal edge: the side away from `root` when given,
/// else the side not containing leaf 1.
pub fn edge_leafset(
    t: &LabelledTree,
    edge: (usize, usize),
    root: Option<usize>,
) -> Result<Vec<u32>> {
    let (u, v) = edge;
    if u >= t.adj.len() || v >= t.adj.len() || !t.adj[u].contains(&v) || t.is_leaf(u) || t.is_leaf(v)
    {
        return Err(Error::NotInternalEdge(u, v));
    }
    match root {
        Some(r) => {
            // side containing v must not contain r
            let side_v = component_contains(t, u, v, r);
            Ok(if side_v { t.leaves_beyond(v, u) } else { t.leaves_beyond(u, v) })
        }
        None => Ok(canonical_split(t.n, &t.leaves_beyond(u, v))),
    }
}

fn component_contains(t: &LabelledTree, u: usize, v: usize, target: usize) -> bool {
    let mut stack = vec![(v, u)];
    while let Some((x, from)) = stack.pop() {
        if x == target {
            return true;
        }
        for &y in &t.adj[x] {
            if y != from {
                stack.push((y, x));
            }
        }
    }
    false
}

/// Number of (internal edge, side) pairs whose side holds exactly `i` leaves.
pub fn separating_count(t: &LabelledTree, i: u32) -> usize {
    t.internal_edges()
        .into_iter()
        .map(|(u, v)| {
            let a = t.leaves_beyond(u, v).len() as u32;
            usize::from(a == i) + usize::from(t.n - a == i)
        })
        .sum()
}

/// Rooted left comb with `k` leaves whose root has degree 2 (a bare leaf
/// when `k == 1`); returns the root id.
fn left_comb(b: &mut TreeBuilder, k: u32) -> usize {
    let root = b.add_vertex();
    if k == 1 {
        return root;
    }
    let mut cur = root;
    for remaining in (2..=k).rev() {
        let leaf = b.add_vertex();
        b.add_edge(cur, leaf);
        if remaining == 2 {
            let last = b.add_vertex();
            b.add_edge(cur, last);
        } else {
            let next = b.add_vertex();
            b.add_edge(cur, next);
            cur = next;
        }
    }
    root
}

/// Tree with `n` leaves and at least `floor(n/i)` edges cutting off exactly
/// `i` leaves: a caterpillar with `ceil(n/i)` leaves, each replaced by a comb
/// with `i` leaves, except for one remainder comb when `i` does not divide
/// `n`.
pub fn build_ti(n: u32, i: u32) -> Result<LabelledTree> {
    if i < 2 || i > n / 2 {
        return Err(Error::BadParameters(format!("need 2 <= i <= n/2, got n={n}, i={i}")));
    }
    let q = n / i;
    let r = n % i;
    let base_leaves = n.div_ceil(i);
    let mut b = TreeBuilder::default();
    // caterpillar spine; its leaves are the attachment points
    let mut attach = Vec::new();
    if base_leaves == 2 {
        let x = b.add_vertex();
        let y = b.add_vertex();
        b.add_edge(x, y);
        attach.extend([x, y]);
    } else {
        let spine: Vec<usize> = (0..base_leaves - 2).map(|_| b.add_vertex()).collect();
        for w in spine.windows(2) {
            b.add_edge(w[0], w[1]);
        }
        for (k, &s) in spine.iter().enumerate() {
            let pendant = if k == 0 || k + 1 == spine.len() { 2 } else { 1 };
            let pendant = if spine.len() == 1 { 3 } else { pendant };
            for _ in 0..pendant {
                let l = b.add_vertex();
                b.add_edge(s, l);
                attach.push(l);
            }
        }
    }
    debug_assert_eq!(attach.len() as u32, base_leaves);
    // Paste a comb on each attachment leaf by merging the comb root into it.
    for (k, &a) in attach.iter().enumerate() {
        let size = if (k as u32) < q { i } else { r };
        if size == 1 {
            continue;
        }
        let comb_root = left_comb(&mut b, size);
        let kids: Vec<usize> = b.adj[comb_root].clone();
        for c in kids {
            b.adj[c].retain(|&x| x != comb_root);
            b.adj[comb_root].retain(|&x| x != c);
            b.add_edge(a, c);
        }
    }
    // drop the now isolated comb roots
    let keep: Vec<usize> = (0..b.adj.len()).filter(|&v| !b.adj[v].is_empty()).collect();
    let mut index = vec![usize::MAX; b.adj.len()];
    for (k, &v) in keep.iter().enumerate() {
        index[v] = k;
    }
    let mut nb = TreeBuilder::default();
    for _ in &keep {
        nb.add_vertex();
    }
    for &u in &keep {
        for &v in &b.adj[u] {
            if u < v {
                nb.add_edge(index[u], index[v]);
            }
        }
    }
    let labels: Vec<(usize, u32)> = nb
        .leaves()
        .into_iter()
        .enumerate()
        .map(|(k, v)| (v, k as u32 + 1))
        .collect();
    nb.finish(&labels)
}

/// Dual tree of a laminar family of puncture sets on the sphere with
/// punctures `1..=n`. Each set bounds a region with its maximal proper
/// subsets; the complement of all top-level sets forms the outer region.
/// Every region must have exactly three boundary elements.
pub fn tree_from_laminar(n: u32, sets: &[Vec<u32>]) -> Result<LabelledTree> {
    let refs: Vec<&[u32]> = sets.iter().map(Vec::as_slice).collect();
    for (a, s) in sets.iter().enumerate() {
        for (b, t) in sets.iter().enumerate().skip(a + 1) {
            if !crate::curve_model::sets_laminar(s, t) || s == t {
                return Err(Error::NotLaminar(a, b));
            }
        }
    }
    let parent = containment_parents(&refs);
    let k = sets.len();
    // region k is the outer region
    let mut home = vec![k; n as usize];
    let mut by_size: Vec<usize> = (0..k).collect();
    by_size.sort_by_key(|&i| std::cmp::Reverse(sets[i].len()));
    for &i in &by_size {
        for &p in &sets[i] {
            home[p as usize - 1] = i;
        }
    }
    let mut degree = vec![0usize; k + 1];
    for &h in &home {
        degree[h] += 1;
    }
    for (i, p) in parent.iter().enumerate() {
        degree[i] += 1;
        degree[p.unwrap_or(k)] += 1;
    }
    if let Some(&d) = degree.iter().find(|&&d| d != 3) {
        return Err(Error::NotPants(d));
    }
    let mut b = TreeBuilder::default();
    let leaves: Vec<usize> = (0..n).map(|_| b.add_vertex()).collect();
    let regions: Vec<usize> = (0..=k).map(|_| b.add_vertex()).collect();
    for (p, &h) in home.iter().enumerate() {
        b.add_edge(leaves[p], regions[h]);
    }
    for (i, p) in parent.iter().enumerate() {
        b.add_edge(regions[i], regions[p.unwrap_or(k)]);
    }
    let labels: Vec<(usize, u32)> = leaves.iter().enumerate().map(|(p, &v)| (v, p as u32 + 1)).collect();
    b.finish(&labels)
}

/// Every bipartition `{S, [n] \ S}` with both sides of size at least 2, as
/// canonical sides.
pub fn all_splits_of(n: u32) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    for mask in 0u64..(1 << n) {
        let s: Vec<u32> = (1..=n).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        if s.len() >= 2 && s.len() + 2 <= n as usize {
            out.insert(canonical_split(n, &s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::type_census::double_factorial_count;

    #[test]
    fn labelled_counts() {
        assert_eq!(enum_labelled_trees(3).unwrap().len(), 1);
        assert_eq!(enum_labelled_trees(4).unwrap().len(), 3);
        assert_eq!(enum_labelled_trees(5).unwrap().len(), 15);
        assert!(matches!(enum_labelled_trees(2), Err(Error::NTooSmall(2))));
        for n in 3..=8 {
            let trees = enum_labelled_trees(n).unwrap();
            assert_eq!(trees.len() as u64, double_factorial_count(n).unwrap());
            assert!(trees.iter().all(LabelledTree::is_trivalent));
            let distinct: BTreeSet<_> = trees.iter().map(LabelledTree::splits).collect();
            assert_eq!(distinct.len(), trees.len());
        }
    }

    #[test]
    fn unlabelled_classes() {
        let classes = |n| {
            enum_labelled_trees(n)
                .unwrap()
                .iter()
                .map(|t| canonical_unlabelled(t).unwrap())
                .collect::<BTreeSet<_>>()
        };
        assert_eq!(classes(4).len(), 1);
        assert_eq!(classes(6).len(), 2);
        assert_eq!(classes(7).len(), 2);
        for n in 3..=9 {
            let direct = enum_unlabelled_classes(n).unwrap();
            let keys: BTreeSet<_> = direct.iter().map(|(c, _)| c.clone()).collect();
            assert_eq!(keys, classes(n), "n = {n}");
        }
    }

    #[test]
    fn edge_leafset_cases() {
        let t = tree_from_laminar(5, &[vec![4, 5], vec![3, 4, 5]]).unwrap();
        let sets: BTreeSet<_> = t
            .internal_edges()
            .into_iter()
            .map(|e| edge_leafset(&t, e, None).unwrap())
            .collect();
        assert!(sets.contains(&vec![4, 5]));
        let t4 = tree_from_laminar(4, &[vec![3, 4]]).unwrap();
        let e = t4.internal_edges()[0];
        assert_eq!(edge_leafset(&t4, e, None).unwrap(), vec![3, 4]);
        let leaf_edge = (0, t4.neighbors(0)[0]);
        assert!(matches!(edge_leafset(&t4, leaf_edge, None), Err(Error::NotInternalEdge(..))));
    }

    #[test]
    fn ti_examples() {
        let t = build_ti(8, 3).unwrap();
        assert!(t.is_trivalent());
        assert_eq!(t.leaf_count(), 8);
        assert_eq!(separating_count(&t, 3), 2);
        assert!(separating_count(&build_ti(8, 2).unwrap(), 2) >= 4);
        assert_eq!(separating_count(&build_ti(8, 4).unwrap(), 4), 2);
        assert!(build_ti(8, 5).is_err());
        assert!(build_ti(8, 1).is_err());
    }

    #[test]
    fn parent_array_round_trip() {
        for t in enum_labelled_trees(6).unwrap().iter().step_by(7) {
            let back = LabelledTree::from_parent_array(&t.to_parent_array()).unwrap();
            assert!(back.same_labelled(t));
        }
    }
}
