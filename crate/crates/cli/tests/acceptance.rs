//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Oracles here are written independently of the library.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pants_atlas::curve_model::{disjoint, strand_oracle, CurveCode, Side};
use pants_atlas::genus::{
    closed_universal_family, counting_lower_bound, genus1_family, genus1_recognize, genus1_verify_structural,
    genus2_family, labelled_graphs,
};
use pants_atlas::labelled_sphere::{
    bipartition_census, gen_lambda, lambda_closed_form, min_family_search, recognize, SearchMode,
};
use pants_atlas::polygon::{
    all_chords, count_cycles, count_triangles, random_edge_set, realized_cycle_types, realized_triangle_types,
    verify_universal_triangulations, ChordGraph,
};
use pants_atlas::type_census::{
    build_ti, enum_dual_graphs, for_each_labelled_tree, lower_bound_sum, LabelledTree, PantsType,
    DEFAULT_GENUS_CUTOFF,
};
use pants_atlas::unlabelled_sphere::{all_pairs_family, scaling_run, size_envelope, verify_universal_unlabelled};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T>(r: pants_atlas::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within(start: Instant, limit: Duration, what: &str) -> std::result::Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("{what} took {took:?}, limit {limit:?}"))
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut full = Vec::new();
    for n in 3..=12u32 {
        let got = lib(gen_lambda(n, 2, n))?.codes.len() as u128;
        let want = (3u128.pow(n) - 2 * u128::from(n) - 1) / 4;
        ensure(got == want, format!("n={n}: census {got}, closed form {want}"))?;
        ensure(lambda_closed_form(n) == want, format!("n={n}: lambda_closed_form disagrees"))?;
        full.push(got);
    }
    let restricted = lib(gen_lambda(4, 2, 2))?.codes.len();
    ensure(restricted == 11, format!("|gen_lambda(4,2,2)| = {restricted}, expected 11"))?;
    within(start, Duration::from_secs(1), "census")?;
    Ok(format!("n=4: full census {} vs restricted {restricted}; n=3..12 all match", full[1]))
}

/// Leaf-set splits of a tree, normalised to the side without leaf 1.
fn splits_of(t: &LabelledTree) -> BTreeSet<Vec<u32>> {
    let n = t.leaf_count();
    t.internal_edges()
        .into_iter()
        .map(|(u, v)| {
            let s = t.leaves_beyond(u, v);
            if s.contains(&1) {
                (1..=n).filter(|x| !s.contains(x)).collect()
            } else {
                s
            }
        })
        .collect()
}

fn split_of_code(c: &CurveCode) -> Vec<u32> {
    let s = c.enclosed().to_vec();
    if s.contains(&1) {
        (1..=c.n()).filter(|x| !s.contains(x)).collect()
    } else {
        s
    }
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut trees = 0usize;
    let mut failures = Vec::new();
    for n in 4..=8u32 {
        let lambda: BTreeSet<CurveCode> = lib(gen_lambda(n, 2, n))?.codes.into_iter().collect();
        let mut count = 0usize;
        lib(for_each_labelled_tree(n, |t| {
            count += 1;
            let ok = (|| -> std::result::Result<bool, String> {
                let root = t.default_root().ok_or("no internal vertex")?;
                let rec = lib(recognize(t, root))?;
                let codes = rec.codes();
                if codes.len() != n as usize - 3 || !codes.iter().all(|c| lambda.contains(c)) {
                    return Ok(false);
                }
                for i in 0..codes.len() {
                    for j in i + 1..codes.len() {
                        if !lib(disjoint(&codes[i], &codes[j]))? {
                            return Ok(false);
                        }
                    }
                }
                let got: BTreeSet<Vec<u32>> = codes.iter().map(split_of_code).collect();
                Ok(got == splits_of(t) && lib(rec.certify(t))?)
            })();
            if !matches!(ok, Ok(true)) && failures.len() < 5 {
                failures.push(format!("n={n} tree {count}: {ok:?}"));
            }
        }))?;
        if n == 8 {
            ensure(count == 10395, format!("n=8 has {count} trees"))?;
        }
        trees += count;
    }
    ensure(failures.is_empty(), failures.join("; "))?;
    within(start, Duration::from_secs(300), "recognition")?;
    Ok(format!("{trees} trees, zero failures, {:?}", start.elapsed()))
}

fn code(s: &[u32], f: &[(u32, Side)]) -> CurveCode {
    CurveCode::new(4, s.iter().copied(), f.iter().copied()).expect("valid code")
}

fn criterion_3() -> Check {
    let mut pairs = 0usize;
    for n in 3..=6u32 {
        let codes = lib(gen_lambda(n, 1, n))?.codes;
        for (i, a) in codes.iter().enumerate() {
            for b in &codes[i..] {
                let d = lib(disjoint(a, b))?;
                let o = lib(strand_oracle(a, b))?;
                ensure(d == o, format!("{a} vs {b}: decision {d}, oracle {o}"))?;
                ensure(d == lib(disjoint(b, a))?, format!("{a} vs {b}: asymmetric"))?;
                pairs += 1;
            }
        }
    }
    ensure(pairs >= 15_000, format!("only {pairs} pairs"))?;
    use Side::{Above as A, Below as B};
    let table: Vec<(CurveCode, CurveCode, bool)> = vec![
        (code(&[1, 3], &[(2, A)]), code(&[1, 3], &[(2, B)]), false),
        (code(&[1, 3], &[(2, A)]), code(&[1, 3], &[(2, A)]), true),
        (code(&[1, 2], &[]), code(&[3, 4], &[]), true),
        (code(&[1, 2], &[]), code(&[1, 2, 3], &[]), true),
        (code(&[1, 3], &[(2, A)]), code(&[1, 2, 3], &[]), true),
        (code(&[1, 3], &[(2, A)]), code(&[2], &[]), true),
        (code(&[1, 3], &[(2, A)]), code(&[2, 3], &[]), false),
        (code(&[1, 3], &[(2, A)]), code(&[2, 4], &[(3, A)]), false),
        (code(&[1, 4], &[(2, A), (3, A)]), code(&[2, 3], &[]), true),
        (code(&[1, 4], &[(2, A), (3, B)]), code(&[2, 3], &[]), false),
        (code(&[1, 3], &[(2, A)]), code(&[1, 3, 4], &[(2, A)]), true),
        (code(&[2, 3], &[]), code(&[1, 4], &[(2, B), (3, B)]), true),
    ];
    for (a, b, want) in &table {
        let d = lib(disjoint(a, b))?;
        ensure(d == *want, format!("hand table: {a} vs {b} gave {d}, expected {want}"))?;
        ensure(d == lib(strand_oracle(a, b))?, format!("hand table: oracle disagrees on {a} vs {b}"))?;
    }
    // Two distinct codes with |s| = 2 that agree on the split would cobound
    // an annulus only if they are equal.
    let twos: Vec<CurveCode> = lib(gen_lambda(4, 2, 2))?.codes;
    for (i, a) in twos.iter().enumerate() {
        for b in &twos[i + 1..] {
            if lib(disjoint(a, b))? {
                ensure(a.enclosed() != b.enclosed() || a == b, format!("{a} and {b} disjoint and distinct"))?;
            }
        }
    }
    Ok(format!("{pairs} pairs agree with the strand oracle; {} hand-checked n=4 pairs", table.len()))
}

fn criterion_4() -> Check {
    for n in 4..=12u32 {
        let got = bipartition_census(n).len() as u64;
        let want = (1u64 << (n - 1)) - u64::from(n) - 1;
        ensure(got == want, format!("n={n}: {got} bipartitions, expected {want}"))?;
        // independent count: subsets without leaf 1 of size 2..=n-2
        let direct = (0u32..1 << (n - 1)).filter(|m| (2..=n - 2).contains(&m.count_ones())).count() as u64;
        ensure(direct == want, format!("n={n}: direct subset count {direct}"))?;
    }
    let res = lib(min_family_search(4, SearchMode::Exact, 10_000_000))?;
    ensure(res.optimal, "n=4 search did not finish")?;
    ensure(res.size == 3, format!("minimal n=4 family has size {}", res.size))?;
    // any universal family needs one curve per split, and n = 4 has three
    let codes = lib(gen_lambda(4, 2, 2))?.codes;
    let splits: Vec<Vec<u32>> = codes.iter().map(split_of_code).collect();
    let distinct: BTreeSet<&Vec<u32>> = splits.iter().collect();
    ensure(distinct.len() == 3, "n=4 has three splits")?;
    Ok(format!("census = 2^(n-1)-n-1 for n<=12; minimal n=4 family size {} (optimal)", res.size))
}

const SCALING_N: [u32; 5] = [64, 128, 256, 512, 1024];
const TUNED_C: f64 = 1.5;

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut points = Vec::new();
    let mut summary = Vec::new();
    for n in SCALING_N {
        let mut good = 0;
        for seed in 0..20u64 {
            let row = lib(scaling_run(n, TUNED_C, seed, true))?;
            if row.covered == row.total && row.family_size as f64 <= size_envelope(n) {
                good += 1;
            }
            points.push((f64::from(n), row.family_size as f64));
        }
        ensure(good >= 18, format!("n={n}: {good}/20 seeds succeed"))?;
        summary.push(format!("{n}:{good}/20"));
    }
    let slope = ols_slope(&points);
    ensure((1.1..=1.5).contains(&slope), format!("slope {slope:.4} outside [1.1, 1.5]"))?;
    within(start, Duration::from_secs(600), "scaling runs")?;
    Ok(format!("c={TUNED_C}; {}; slope {slope:.4}", summary.join(" ")))
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Leaves below each vertex when the tree hangs from vertex 0.
fn side_sizes(t: &LabelledTree) -> Vec<u32> {
    let n = t.vertex_count();
    let mut order = vec![0usize];
    let mut parent = vec![usize::MAX; n];
    parent[0] = 0;
    let mut k = 0;
    while k < order.len() {
        let v = order[k];
        k += 1;
        for &w in t.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                order.push(w);
            }
        }
    }
    let mut below = vec![0u32; n];
    for &v in order.iter().rev() {
        if t.is_leaf(v) && v != 0 {
            below[v] += 1;
        }
        if v != 0 {
            below[parent[v]] += below[v];
        }
    }
    // internal edges (parent[v], v): sides are below[v] and n - below[v]
    (1..n)
        .filter(|&v| !t.is_leaf(v) && !t.is_leaf(parent[v]))
        .flat_map(|v| {
            [below[v], t.leaf_count() - below[v]]
        })
        .collect()
}

fn criterion_6() -> Check {
    for n in 4..=10u32 {
        let fam = lib(all_pairs_family(n))?;
        let rep = lib(verify_universal_unlabelled(&fam, n))?;
        ensure(rep.is_universal(), format!("n={n}: {} of {} types realized", rep.realized, rep.total))?;
    }
    for n in 2..=200u32 {
        let want: u64 = (2..=n / 2).map(|i| u64::from(n / i)).sum();
        ensure(lower_bound_sum(n) == want, format!("lower_bound_sum({n})"))?;
    }
    ensure(lower_bound_sum(8) == 8, "lower_bound_sum(8) != 8")?;
    let mut trees = 0;
    for n in 4..=200u32 {
        for i in 2..=n / 2 {
            let t = lib(build_ti(n, i))?;
            ensure(t.leaf_count() == n && t.is_trivalent(), format!("T_{i} on {n} leaves is malformed"))?;
            // leaf 1 is vertex 0, so side sizes measured from vertex 0 are exact
            let cut = side_sizes(&t).into_iter().filter(|&s| s == i).count() as u32;
            ensure(cut >= n / i, format!("T_{i} on {n} leaves: {cut} sides with {i} leaves"))?;
            trees += 1;
        }
    }
    Ok(format!("all_pairs universal for n<=10; lower_bound_sum(8)=8; {trees} trees T_i checked"))
}

fn brute_triangles(g: &ChordGraph) -> (u64, BTreeSet<PantsType>) {
    let n = g.n();
    let mut count = 0;
    let mut types = BTreeSet::new();
    for a in 1..=n {
        for b in a + 1..=n {
            for c in b + 1..=n {
                if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                    count += 1;
                    types.insert(PantsType::new(b - a - 1, c - b - 1, n - c + a - 1));
                }
            }
        }
    }
    (count, types)
}

fn next_permutation(p: &mut [u32]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn min_dihedral(gaps: &[u32]) -> Vec<u32> {
    let k = gaps.len();
    let mut best = gaps.to_vec();
    for rev in [false, true] {
        let mut s = gaps.to_vec();
        if rev {
            s.reverse();
        }
        for _ in 0..k {
            s.rotate_left(1);
            best = best.min(s.clone());
        }
    }
    best
}

/// Simple cycles through subsets and orderings, plus the convex ones' types.
fn brute_cycles(g: &ChordGraph, ell: usize) -> (u64, BTreeSet<Vec<u32>>) {
    let n = g.n();
    let mut count = 0;
    let mut types = BTreeSet::new();
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != ell {
            continue;
        }
        let vs: Vec<u32> = (1..=n).filter(|v| mask >> (v - 1) & 1 == 1).collect();
        let closed = |cyc: &[u32]| (0..ell).all(|i| g.has_edge(cyc[i], cyc[(i + 1) % ell]));
        if closed(&vs) {
            let mut gaps: Vec<u32> = vs.windows(2).map(|w| w[1] - w[0] - 1).collect();
            gaps.push(n - vs[ell - 1] + vs[0] - 1);
            types.insert(min_dihedral(&gaps));
        }
        let mut rest: Vec<u32> = vs[1..].to_vec();
        let mut directed = 0;
        loop {
            let mut cyc = vec![vs[0]];
            cyc.extend(&rest);
            directed += u64::from(closed(&cyc));
            if !next_permutation(&mut rest) {
                break;
            }
        }
        count += directed / 2;
    }
    (count, types)
}

fn criterion_7() -> Check {
    for n in 4..=12u32 {
        let rep = lib(verify_universal_triangulations(&lib(all_chords(n))?))?;
        ensure(rep.is_universal(), format!("all_chords({n}) misses {} classes", rep.total - rep.realized))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut certified = 0;
    for trial in 0..100 {
        let n = rng.gen_range(5..=12u32);
        let density: f64 = rng.gen_range(0.3..0.9);
        let edges: Vec<(u32, u32)> = (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(density))
            .collect();
        let g = lib(ChordGraph::new(n, edges))?;
        let (tri, tri_types) = brute_triangles(&g);
        ensure(count_triangles(&g) == tri, format!("trial {trial}: triangle count"))?;
        ensure(realized_triangle_types(&g) == tri_types, format!("trial {trial}: triangle types"))?;
        ensure(tri_types.len() as u64 <= tri, format!("trial {trial}: certificate"))?;
        let ell = rng.gen_range(3..=8usize.min(n as usize));
        let (cyc, cyc_types) = brute_cycles(&g, ell);
        ensure(lib(count_cycles(&g, ell))? == cyc, format!("trial {trial}: {ell}-cycle count"))?;
        ensure(lib(realized_cycle_types(&g, ell))? == cyc_types, format!("trial {trial}: {ell}-gon types"))?;
        certified += 1;
    }
    for n in [8u32, 16, 32, 64] {
        for g in [lib(all_chords(n))?, lib(random_edge_set(n, TUNED_C, 3))?] {
            let realized = realized_triangle_types(&g).len() as u64;
            ensure(realized <= count_triangles(&g), format!("n={n}: certificate violated"))?;
            certified += 1;
        }
    }
    Ok(format!("triangulations n<=12 realized; 100 random graphs match brute force; {certified} certificates"))
}

fn criterion_8() -> Check {
    let duals = lib(enum_dual_graphs(2, DEFAULT_GENUS_CUTOFF))?.len();
    ensure(duals == 2, format!("{duals} genus-2 dual graphs"))?;
    let lb = lib(counting_lower_bound(2))?;
    ensure(lb == 4, format!("counting_lower_bound(2) = {lb}"))?;
    for g in 2..=5u32 {
        let fam = lib(closed_universal_family(g))?;
        let bound = 3u128.pow(2 * g - 1);
        ensure((fam.size() as u128) <= bound, format!("g={g}: size {} > {bound}", fam.size()))?;
    }
    for m in 1..=10u32 {
        let want = 2u128.pow(m) + (3u128.pow(m) - 2 * u128::from(m) - 1) / 4;
        let got = lib(genus1_family(m))?.size() as u128;
        ensure(got == want, format!("genus1 m={m}: {got} vs {want}"))?;
    }
    let mut graphs = 0;
    for m in 1..=6u32 {
        for g in lib(labelled_graphs(m, 1))? {
            let rec = lib(genus1_recognize(&g))?;
            let rep = genus1_verify_structural(&rec.edges, &g);
            ensure(rep.ok, format!("genus1 m={m}: {:?}", rep.problems))?;
            graphs += 1;
        }
    }
    for m in 0..=8u32 {
        let want = 3 * 2u128.pow(m) + (3u128.pow(m) - 2 * u128::from(m) - 1) / 2;
        let got = lib(genus2_family(m))?.main_size() as u128;
        ensure(got == want, format!("genus2 m={m}: {got} vs {want}"))?;
    }
    Ok(format!("2 dual graphs; bound 4; closed sizes within 3^(2g-1); {graphs} unicyclic duals verified"))
}

fn run_cli(args: &[&str], threads: &str) -> std::result::Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pants-atlas"))
        .args(args)
        .env("PANTS_ATLAS_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("{args:?} exited with {}", out.status))?;
    Ok(out.stdout)
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fam = dir.path().join("fam.json");
    let fam_path = fam.to_str().expect("utf-8 temp path");
    let commands: Vec<Vec<&str>> = vec![
        vec!["family", "--random-pants", "--n", "128", "--seed", "7"],
        vec!["family", "--random-edges", "--n", "60", "--seed", "3", "--c", "1.2"],
        vec!["family", "--labelled-sphere", "--n", "5"],
        vec!["family", "--genus2", "--m", "3"],
        vec!["family", "--closed", "--g", "3"],
        vec!["types", "--mode", "unlabelled", "--n", "9"],
        vec!["types", "--dual-graphs", "--g", "3"],
        vec!["experiment", "--n", "64,128", "--seeds", "3", "--no-timing", "--greedy"],
        vec!["bounds", "--genus", "3"],
    ];
    for args in &commands {
        let a = run_cli(args, "1")?;
        let b = run_cli(args, "1")?;
        let c = run_cli(args, "4")?;
        ensure(!a.is_empty(), format!("{args:?} wrote nothing"))?;
        ensure(a == b && a == c, format!("{args:?} output differs between runs"))?;
    }
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        run_cli(&["family", "--random-pants", "--n", "96", "--seed", "11", "--out", fam_path], threads)?;
        let file = std::fs::read(&fam).map_err(|e| e.to_string())?;
        let report = run_cli(&["verify", fam_path, "--essential-only"], threads)?;
        reports.push((file, report));
    }
    ensure(reports[0] == reports[1], "family file or verify report differs between runs")?;
    Ok(format!("{} commands byte-identical across reruns and thread counts", commands.len() + 2))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("census vs closed form", criterion_1),
        ("recognition universality", criterion_2),
        ("disjointness oracle equivalence", criterion_3),
        ("labelled lower bound", criterion_4),
        ("random covering", criterion_5),
        ("unlabelled decompositions", criterion_6),
        ("polygon", criterion_7),
        ("genus", criterion_8),
        ("reproducibility", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS {label}: {detail} [{:.1}s]", start.elapsed().as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {label}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
