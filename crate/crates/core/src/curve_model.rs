//! Wiggle codes for simple closed curves on the punctured plane.
//!
//! The punctures `1..=n` sit on a horizontal line. A [`CurveCode`] encloses a
//! set `s` of punctures and, for every puncture strictly inside the span of
//! `s` that it does not enclose, records whether the curve detours above or
//! below it. Between the vertical lines through `min(s)` and `max(s)` every
//! such curve consists of a top strand and a bottom strand joined by a cap at
//! each end.
//!
//! Two strands can only change their vertical order by crossing, so two codes
//! admit disjoint representatives iff there is a fixed vertical order of the
//! (up to four) strands over their common lifetime that is compatible with
//! every puncture line and every cap. [`disjoint`] decides this directly;
//! [`strand_oracle`] enumerates all strand-pair orientations instead.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::type_census::{tree_from_laminar, LabelledTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Above => Side::Below,
            Side::Below => Side::Above,
        }
    }
}

/// How a curve passes a puncture line inside its span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Passage {
    /// Top strand above the puncture, bottom strand below.
    Enclosed,
    /// Both strands on the given side of the puncture.
    Detour(Side),
}

/// Homotopy class of a simple closed curve on the plane with `n` lined-up
/// punctures. Immutable and canonical: `s` ascending, wiggle map ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveCode {
    n: u32,
    s: Vec<u32>,
    wiggle: Vec<(u32, Side)>,
}

impl CurveCode {
    /// Builds a code, checking that `f` is defined exactly on the punctures
    /// strictly between `min(s)` and `max(s)` that are not in `s`.
    pub fn new(
        n: u32,
        s: impl IntoIterator<Item = u32>,
        f: impl IntoIterator<Item = (u32, Side)>,
    ) -> Result<Self> {
        let mut s: Vec<u32> = s.into_iter().collect();
        s.sort_unstable();
        s.dedup();
        let (Some(&lo), Some(&hi)) = (s.first(), s.last()) else {
            return Err(Error::EmptyEnclosedSet);
        };
        if lo == 0 || hi > n {
            return Err(Error::PunctureOutOfRange(if lo == 0 { 0 } else { hi }, n));
        }
        let mut map = BTreeMap::new();
        for (j, side) in f {
            if map.insert(j, side).is_some() {
                return Err(Error::BadWiggleDomain(format!("puncture {j} assigned twice")));
            }
        }
        let mut wiggle = Vec::with_capacity(map.len());
        for j in lo + 1..hi {
            if s.binary_search(&j).is_ok() {
                continue;
            }
            match map.remove(&j) {
                Some(side) => wiggle.push((j, side)),
                None => {
                    return Err(Error::BadWiggleDomain(format!("puncture {j} unassigned")));
                }
            }
        }
        if let Some((&j, _)) = map.iter().next() {
            return Err(Error::BadWiggleDomain(format!(
                "puncture {j} is not a skipped puncture inside the span"
            )));
        }
        Ok(CurveCode { n, s, wiggle })
    }

    /// Code with every skipped puncture assigned the same side.
    pub fn uniform(n: u32, s: impl IntoIterator<Item = u32>, side: Side) -> Result<Self> {
        let s: Vec<u32> = s.into_iter().collect();
        let (lo, hi) = match (s.iter().min(), s.iter().max()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::EmptyEnclosedSet),
        };
        let f: Vec<_> = (lo + 1..hi).filter(|j| !s.contains(j)).map(|j| (j, side)).collect();
        CurveCode::new(n, s, f)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn enclosed(&self) -> &[u32] {
        &self.s
    }

    pub fn wiggle(&self) -> &[(u32, Side)] {
        &self.wiggle
    }

    pub fn contains(&self, j: u32) -> bool {
        self.s.binary_search(&j).is_ok()
    }

    pub fn min(&self) -> u32 {
        self.s[0]
    }

    pub fn max(&self) -> u32 {
        self.s[self.s.len() - 1]
    }

    /// Side of a skipped puncture inside the span, `None` elsewhere.
    pub fn side_at(&self, j: u32) -> Option<Side> {
        self.wiggle
            .binary_search_by_key(&j, |&(k, _)| k)
            .ok()
            .map(|i| self.wiggle[i].1)
    }

    /// Passage at puncture line `j`, `None` outside the span.
    pub fn passage(&self, j: u32) -> Option<Passage> {
        if j < self.min() || j > self.max() {
            None
        } else if self.contains(j) {
            Some(Passage::Enclosed)
        } else {
            self.side_at(j).map(Passage::Detour)
        }
    }

    /// True when every skipped puncture is passed on `side`.
    pub fn is_uniform(&self, side: Side) -> bool {
        self.wiggle.iter().all(|&(_, s)| s == side)
    }

    /// A curve on the sphere is essential when both sides carry at least two
    /// punctures.
    pub fn is_essential(&self) -> bool {
        let k = self.s.len() as u32;
        k >= 2 && k + 2 <= self.n
    }

    /// Bipartition side not containing puncture 1.
    pub fn split(&self) -> Vec<u32> {
        canonical_split(self.n, &self.s)
    }
}

/// Side of the bipartition `{s, [n] \ s}` that does not contain puncture 1.
pub fn canonical_split(n: u32, s: &[u32]) -> Vec<u32> {
    if s.first() == Some(&1) {
        (1..=n).filter(|j| s.binary_search(j).is_err()).collect()
    } else {
        s.to_vec()
    }
}

impl fmt::Display for CurveCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.s.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")?;
        if !self.wiggle.is_empty() {
            write!(f, "[")?;
            for (j, side) in &self.wiggle {
                let c = if *side == Side::Above { '+' } else { '-' };
                write!(f, "{j}{c}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveCodeRepr {
    n: u32,
    s: Vec<u32>,
    f: BTreeMap<String, Side>,
}

impl Serialize for CurveCode {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        // Numeric order for the keys, not string order.
        use serde::ser::SerializeMap;
        struct Wiggle<'a>(&'a [(u32, Side)]);
        impl Serialize for Wiggle<'_> {
            fn serialize<S: serde::Serializer>(
                &self,
                ser: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut m = ser.serialize_map(Some(self.0.len()))?;
                for (j, side) in self.0 {
                    m.serialize_entry(&j.to_string(), side)?;
                }
                m.end()
            }
        }
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("CurveCode", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("f", &Wiggle(&self.wiggle))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CurveCode {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = CurveCodeRepr::deserialize(de)?;
        let mut f = Vec::with_capacity(repr.f.len());
        for (k, side) in repr.f {
            let j = k
                .parse::<u32>()
                .map_err(|_| serde::de::Error::custom(format!("bad puncture key {k:?}")))?;
            f.push((j, side));
        }
        CurveCode::new(repr.n, repr.s, f).map_err(serde::de::Error::custom)
    }
}

pub fn make_code(
    n: u32,
    s: impl IntoIterator<Item = u32>,
    f: impl IntoIterator<Item = (u32, Side)>,
) -> Result<CurveCode> {
    CurveCode::new(n, s, f)
}

// Four strands of a pair: 0 = top of a, 1 = bottom of a, 2 = top of b,
// 3 = bottom of b. An order lists them from top to bottom.
const RELATIONS: [([usize; 4], Containment); 4] = [
    ([0, 1, 2, 3], Containment::None),   // a above b
    ([2, 3, 0, 1], Containment::None),   // b above a
    ([0, 2, 3, 1], Containment::BInA),   // b nested inside a
    ([2, 0, 1, 3], Containment::AInB),   // a nested inside b
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Containment {
    None,
    AInB,
    BInA,
}

/// Range of admissible puncture slots (0 = above all strands, 4 = below all)
/// for one curve's passage, given the positions of its two strands.
fn slot_range(passage: Passage, top_pos: usize, bottom_pos: usize) -> (usize, usize) {
    match passage {
        // strictly between the strands: slots top_pos+1 ..= bottom_pos
        Passage::Enclosed => (top_pos + 1, bottom_pos),
        // puncture below both strands
        Passage::Detour(Side::Above) => (bottom_pos + 1, 4),
        // puncture above both strands
        Passage::Detour(Side::Below) => (0, top_pos),
    }
}

/// Decides whether the two classes admit disjoint representatives.
pub fn disjoint(a: &CurveCode, b: &CurveCode) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::MismatchedN(a.n, b.n));
    }
    if a == b {
        return Ok(true);
    }
    let lo = a.min().max(b.min());
    let hi = a.max().min(b.max());
    if lo > hi {
        // spans do not overlap: the curves live in disjoint vertical strips
        return Ok(true);
    }
    let a_in_b = b.min() <= a.min() && a.max() <= b.max();
    let b_in_a = a.min() <= b.min() && b.max() <= a.max();
    'relations: for (order, containment) in RELATIONS {
        match containment {
            Containment::AInB if !a_in_b => continue,
            Containment::BInA if !b_in_a => continue,
            _ => {}
        }
        let mut pos = [0usize; 4];
        for (p, &strand) in order.iter().enumerate() {
            pos[strand] = p;
        }
        for j in lo..=hi {
            let pa = a.passage(j).expect("inside span");
            let pb = b.passage(j).expect("inside span");
            let (a_lo, a_hi) = slot_range(pa, pos[0], pos[1]);
            let (b_lo, b_hi) = slot_range(pb, pos[2], pos[3]);
            if a_lo.max(b_lo) > a_hi.min(b_hi) {
                continue 'relations;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// Brute-force twin of [`disjoint`]: enumerates every orientation of the six
/// strand pairs and checks each event line of the strip model directly.
pub fn strand_oracle(a: &CurveCode, b: &CurveCode) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::MismatchedN(a.n, b.n));
    }
    if a == b {
        return Ok(true);
    }
    let curves = [a, b];
    // Doubled coordinates: puncture j at 2j, caps at 2min-1 and 2max+1.
    let birth = |c: usize| 2 * curves[c].min() as i64 - 1;
    let death = |c: usize| 2 * curves[c].max() as i64 + 1;
    let alive = |c: usize, x: i64| birth(c) < x && x < death(c);
    let mut lines: Vec<i64> = Vec::new();
    for (c, code) in curves.iter().enumerate() {
        lines.push(birth(c));
        lines.push(death(c));
        for j in CurveCode::min(code)..=CurveCode::max(code) {
            lines.push(2 * j as i64);
        }
    }
    lines.sort_unstable();
    lines.dedup();

    let pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|x| (x + 1..4).map(move |y| (x, y)))
        .collect();
    'assign: for mask in 0u32..(1 << pairs.len()) {
        let mut above = [[false; 4]; 4];
        for (k, &(x, y)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                above[x][y] = true;
            } else {
                above[y][x] = true;
            }
        }
        let owner = |s: usize| s / 2;
        let between = |s: usize, c: usize| above[2 * c][s] && above[s][2 * c + 1];
        for &x in &lines {
            let live: Vec<usize> = (0..4).filter(|&s| alive(owner(s), x)).collect();
            // (a) top above bottom
            for c in 0..2 {
                if alive(c, x) && !above[2 * c][2 * c + 1] {
                    continue 'assign;
                }
            }
            // (d) acyclic on the strands alive at this line
            for &p in &live {
                for &q in &live {
                    for &r in &live {
                        if above[p][q] && above[q][r] && above[r][p] {
                            continue 'assign;
                        }
                    }
                }
            }
            // (b) puncture line
            if x % 2 == 0 {
                let j = (x / 2) as u32;
                let mut ups = Vec::new();
                let mut downs = Vec::new();
                for &s in &live {
                    let c = owner(s);
                    let is_top = s % 2 == 0;
                    match curves[c].passage(j) {
                        Some(Passage::Enclosed) => {
                            if is_top {
                                ups.push(s)
                            } else {
                                downs.push(s)
                            }
                        }
                        Some(Passage::Detour(Side::Above)) => ups.push(s),
                        Some(Passage::Detour(Side::Below)) => downs.push(s),
                        None => unreachable!("alive strand outside span"),
                    }
                }
                for &u in &ups {
                    for &d in &downs {
                        if !above[u][d] {
                            continue 'assign;
                        }
                    }
                }
            }
            // (c) caps
            for c in 0..2 {
                let d = 1 - c;
                let is_birth = x == birth(c);
                let is_death = x == death(c);
                if !is_birth && !is_death {
                    continue;
                }
                if alive(d, x) {
                    if between(2 * d, c) || between(2 * d + 1, c) {
                        continue 'assign;
                    }
                } else if (is_birth && x == birth(d)) || (is_death && x == death(d)) {
                    // simultaneous caps must nest or be separate
                    let inside = between(2 * d, c) as u8 + between(2 * d + 1, c) as u8;
                    if inside == 1 {
                        continue 'assign;
                    }
                }
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// A simple closed curve `γ_{i,j}` enclosing the cyclic run of punctures
/// `i, i+1, ..., j-1` (mod n). Indices are stored in `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclicInterval {
    pub n: u32,
    pub i: u32,
    pub j: u32,
}

impl CyclicInterval {
    pub fn new(n: u32, i: i64, j: i64) -> Self {
        let red = |x: i64| ((x - 1).rem_euclid(n as i64) + 1) as u32;
        CyclicInterval { n, i: red(i), j: red(j) }
    }

    pub fn len(&self) -> u32 {
        (self.j + self.n - self.i) % self.n
    }

    pub fn is_empty(&self) -> bool {
        self.i == self.j
    }

    /// Enclosed punctures, ascending.
    pub fn enclosed(&self) -> Vec<u32> {
        let mut v: Vec<u32> = (0..self.len())
            .map(|k| (self.i - 1 + k) % self.n + 1)
            .collect();
        v.sort_unstable();
        v
    }
}

/// Two cyclic curves are disjoint when their arcs are disjoint or nested.
pub fn cyclic_disjoint(a: &CyclicInterval, b: &CyclicInterval) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::MismatchedN(a.n, b.n));
    }
    let (x, y) = (a.enclosed(), b.enclosed());
    Ok(sets_laminar(&x, &y))
}

/// Nested or disjoint, for sorted sets.
pub(crate) fn sets_laminar(x: &[u32], y: &[u32]) -> bool {
    let common = x.iter().filter(|v| y.binary_search(v).is_ok()).count();
    common == 0 || common == x.len() || common == y.len()
}

/// Pairwise-disjoint codes with their containment forest.
#[derive(Debug, Clone)]
pub struct Arrangement {
    n: u32,
    codes: Vec<CurveCode>,
    parent: Vec<Option<usize>>,
}

impl Arrangement {
    /// Certifies pairwise disjointness and laminarity.
    pub fn new(n: u32, codes: Vec<CurveCode>) -> Result<Self> {
        for c in &codes {
            if c.n != n {
                return Err(Error::MismatchedN(c.n, n));
            }
        }
        for i in 0..codes.len() {
            for j in i + 1..codes.len() {
                if !sets_laminar(codes[i].enclosed(), codes[j].enclosed()) {
                    return Err(Error::NotLaminar(i, j));
                }
                if !disjoint(&codes[i], &codes[j])? {
                    return Err(Error::NotDisjoint(i, j));
                }
            }
        }
        let sets: Vec<&[u32]> = codes.iter().map(|c| c.enclosed()).collect();
        let parent = containment_parents(&sets);
        Ok(Arrangement { n, codes, parent })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn codes(&self) -> &[CurveCode] {
        &self.codes
    }

    /// Immediate enclosing curve of each code, by index.
    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }
}

/// Smallest strict superset of each set in a laminar family.
pub(crate) fn containment_parents(sets: &[&[u32]]) -> Vec<Option<usize>> {
    (0..sets.len())
        .map(|i| {
            (0..sets.len())
                .filter(|&j| {
                    j != i
                        && sets[j].len() > sets[i].len()
                        && sets[i].iter().all(|v| sets[j].binary_search(v).is_ok())
                })
                .min_by_key(|&j| sets[j].len())
        })
        .collect()
}

/// Dual tree of a family of pairwise-disjoint codes forming a pants
/// decomposition. The unbounded region holds the point at infinity, which is
/// not a puncture.
pub fn dual_tree(codes: &[CurveCode], n: u32) -> Result<LabelledTree> {
    let arr = Arrangement::new(n, codes.to_vec())?;
    for i in 0..codes.len() {
        for j in i + 1..codes.len() {
            if codes[i].split() == codes[j].split() && codes[i] != codes[j] {
                return Err(Error::BadParameters(format!(
                    "curves {i} and {j} induce the same bipartition"
                )));
            }
        }
    }
    let sets: Vec<Vec<u32>> = arr.codes.iter().map(|c| c.s.clone()).collect();
    tree_from_laminar(n, &sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Side::*;

    fn code(n: u32, s: &[u32], f: &[(u32, Side)]) -> CurveCode {
        CurveCode::new(n, s.iter().copied(), f.iter().copied()).unwrap()
    }

    #[test]
    fn make_code_examples() {
        let c = code(6, &[2, 6], &[(3, Above), (4, Above), (5, Above)]);
        assert_eq!(c.wiggle().len(), 3);
        assert!(code(4, &[1, 2], &[]).wiggle().is_empty());
        assert!(matches!(
            CurveCode::new(4, [1, 3], []),
            Err(Error::BadWiggleDomain(_))
        ));
        assert_eq!(CurveCode::new(4, [], []), Err(Error::EmptyEnclosedSet));
        assert!(matches!(
            CurveCode::new(4, [1, 2], [(3, Above)]),
            Err(Error::BadWiggleDomain(_))
        ));
    }

    #[test]
    fn disjoint_examples() {
        let a = code(4, &[1, 2], &[]);
        let b = code(4, &[3, 4], &[]);
        assert!(disjoint(&a, &b).unwrap());
        let up = code(4, &[1, 3], &[(2, Above)]);
        let down = code(4, &[1, 3], &[(2, Below)]);
        assert!(!disjoint(&up, &down).unwrap());
        assert!(disjoint(&code(5, &[2, 3], &[]), &code(5, &[2, 3, 5], &[(4, Above)])).unwrap());
        assert!(disjoint(&up, &code(4, &[2, 4], &[(3, Below)])).unwrap());
        assert_eq!(disjoint(&a, &code(5, &[1, 2], &[])), Err(Error::MismatchedN(4, 5)));
    }

    #[test]
    fn root_curves_of_three_branches() {
        // S1 above everything, S2 below everything, S3 below S1 and above S2.
        let s1 = CurveCode::uniform(9, [1, 4, 8], Above).unwrap();
        let s2 = CurveCode::uniform(9, [2, 6], Below).unwrap();
        let s3 = code(9, &[3, 5, 7, 9], &[(4, Below), (6, Above), (8, Below)]);
        assert!(disjoint(&s1, &s2).unwrap());
        assert!(disjoint(&s1, &s3).unwrap());
        assert!(disjoint(&s2, &s3).unwrap());
    }

    #[test]
    fn oracle_examples() {
        let a = code(4, &[1, 2], &[]);
        assert!(strand_oracle(&a, &a).unwrap());
        let w = code(4, &[1, 4], &[(2, Above), (3, Below)]);
        // the 1-4 band crosses between 2 and 3, so it must meet the {2,3} disc
        assert!(!strand_oracle(&w, &code(4, &[2, 3], &[])).unwrap());
        assert!(!disjoint(&w, &code(4, &[2, 3], &[])).unwrap());
        assert!(!strand_oracle(&code(4, &[1, 3], &[(2, Above)]), &code(4, &[1, 3], &[(2, Below)])).unwrap());
    }

    #[test]
    fn cyclic_examples() {
        let g = |i, j| CyclicInterval::new(8, i, j);
        assert!(cyclic_disjoint(&g(1, 3), &g(3, 5)).unwrap());
        assert!(cyclic_disjoint(&g(3, 5), &g(3, 6)).unwrap());
        assert!(!cyclic_disjoint(&g(1, 4), &g(3, 6)).unwrap());
        assert_eq!(g(7, 2).enclosed(), vec![1, 7, 8]);
        assert!(g(4, 4).is_empty());
    }

    #[test]
    fn dual_tree_examples() {
        let t = dual_tree(&[code(5, &[4, 5], &[]), code(5, &[3, 4, 5], &[])], 5).unwrap();
        assert_eq!(t.leaf_count(), 5);
        assert_eq!(t.splits(), vec![vec![3, 4, 5], vec![4, 5]]);
        let t = dual_tree(&[code(4, &[1, 2], &[])], 4).unwrap();
        assert_eq!(t.splits(), vec![vec![3, 4]]);
        assert_eq!(dual_tree(&[code(5, &[4, 5], &[])], 5), Err(Error::NotPants(4)));
        let up = code(4, &[1, 3], &[(2, Above)]);
        let down = code(4, &[1, 3], &[(2, Below)]);
        assert_eq!(dual_tree(&[up, down], 4).unwrap_err(), Error::NotDisjoint(0, 1));
    }

    #[test]
    fn json_shape() {
        let c = code(6, &[2, 6], &[(3, Above), (4, Above), (5, Below)]);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(text, r#"{"n":6,"s":[2,6],"f":{"3":"above","4":"above","5":"below"}}"#);
        assert_eq!(serde_json::from_str::<CurveCode>(&text).unwrap(), c);
        assert!(serde_json::from_str::<CurveCode>(r#"{"n":4,"s":[1,2],"f":{},"x":1}"#).is_err());
        let g: CyclicInterval = serde_json::from_str(r#"{"n":8,"i":3,"j":6}"#).unwrap();
        assert_eq!(g.enclosed(), vec![3, 4, 5]);
    }
}
