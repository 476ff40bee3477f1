//! `pants-atlas`: generate, verify and measure universal curve families.
//!
//! Exit codes: 0 success, 1 verification failed, 2 usage or input error,
//! 3 construction error.

mod family_file;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use pants_atlas::curve_model::CurveCode;
use pants_atlas::genus::{
    closed_universal_family, counting_lower_bound, genus1_family, genus1_recognize, genus1_verify_structural,
    genus2_family, genus2_recognize, genus2_verify_structural, labelled_graphs, realize_closed, ConcatCode,
};
use pants_atlas::labelled_sphere::{
    gen_lambda, lambda_closed_form, min_family_search, required_bipartitions, verify_universal_labelled,
    SearchMode, UniversalityReport,
};
use pants_atlas::polygon::{
    all_chords, certificate_lower_bound, covers_triangle_types, enum_triangulation_classes, random_edge_set,
    realized_cycle_types, realized_triangle_types, triangle_types, verify_universal_triangulations, ChordGraph,
};
use pants_atlas::type_census::{
    enum_dual_graphs, enum_labelled_trees, enum_pants_types, enum_unlabelled_classes, lower_bound_sum,
    DEFAULT_GENUS_CUTOFF,
};
use pants_atlas::unlabelled_sphere::{
    all_pairs_family, covers_pants_types, exact_min_index_set, greedy_index_set, log_log_slope,
    random_index_set, scaling_run, size_envelope, verify_universal_unlabelled, RandomConstructionParams,
};
use pants_atlas::Error;

use family_file::FamilyFile;

#[derive(Parser)]
#[command(name = "pants-atlas", version, about = "Universal families of curves for pants decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List decomposition types (trees, tree classes, pants types, dual graphs).
    Types(TypesArgs),
    /// Build a family and write it as JSON.
    Family(FamilyArgs),
    /// Check a family file for universality.
    Verify(VerifyArgs),
    /// Evaluate lower bounds.
    Bounds(BoundsArgs),
    /// Seeded scaling runs of the random pants-type construction, as CSV.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Labelled,
    Unlabelled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Search {
    Exact,
    Greedy,
}

#[derive(Args)]
struct Output {
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").args(["pants", "dual_graphs", "triangulations"])))]
struct TypesArgs {
    #[arg(long, value_enum, default_value = "labelled")]
    mode: Mode,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    g: Option<u32>,
    /// Pants types of the n-punctured sphere.
    #[arg(long)]
    pants: bool,
    /// Trivalent dual graphs of the closed genus-g surface.
    #[arg(long)]
    dual_graphs: bool,
    /// Triangulation types of the n-gon.
    #[arg(long)]
    triangulations: bool,
    #[arg(long)]
    essential_only: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").required(true).args([
    "labelled_sphere", "minimal", "random_pants", "greedy_pants", "exact_pants", "all_pairs",
    "all_chords", "random_edges", "genus1", "genus2", "closed",
])))]
struct FamilyArgs {
    /// Every code with min-size <= |s| <= max-size.
    #[arg(long)]
    labelled_sphere: bool,
    /// Smallest universal family on n labelled punctures (n <= 5).
    #[arg(long)]
    minimal: bool,
    /// Random index set covering pants types.
    #[arg(long)]
    random_pants: bool,
    #[arg(long)]
    greedy_pants: bool,
    #[arg(long)]
    exact_pants: bool,
    /// All cyclic curves, universal for unlabelled decompositions.
    #[arg(long)]
    all_pairs: bool,
    /// All chords of the n-gon, universal for triangulations.
    #[arg(long)]
    all_chords: bool,
    /// Random edge set covering triangle types.
    #[arg(long)]
    random_edges: bool,
    #[arg(long)]
    genus1: bool,
    #[arg(long)]
    genus2: bool,
    /// Cut curves plus sphere codes for the closed genus-g surface.
    #[arg(long)]
    closed: bool,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    g: Option<u32>,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    min_size: u32,
    #[arg(long)]
    max_size: Option<u32>,
    #[arg(long, value_enum, default_value = "exact")]
    search: Search,
    #[arg(long, default_value_t = 5_000_000)]
    budget: u64,
    #[arg(long)]
    essential_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Family file written by `family`.
    file: PathBuf,
    /// For index sets: only essential pants types count.
    #[arg(long)]
    essential_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["labelled", "pants_dec", "genus", "certificate"])))]
struct BoundsArgs {
    /// Bipartitions a labelled universal family must realize.
    #[arg(long)]
    labelled: bool,
    /// Unlabelled decomposition lower bound `Σ ⌊n/i⌋`.
    #[arg(long)]
    pants_dec: bool,
    /// Counting bound for the closed genus-g surface.
    #[arg(long)]
    genus: Option<u32>,
    /// Cycle-count certificate for a polygon edge family file.
    #[arg(long)]
    certificate: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 3)]
    ell: usize,
    /// Compare the bound with this family size.
    #[arg(long)]
    family_size: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [64u32, 128, 256, 512, 1024])]
    n: Vec<u32>,
    /// Number of seeds per n, starting at --seed.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    c: f64,
    #[arg(long)]
    essential_only: bool,
    /// Add greedy index set columns (computed for n <= 256).
    #[arg(long)]
    greedy: bool,
    /// Write 0 in the runtime column so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Construction(String),
    NotUniversal(Vec<u8>, Option<PathBuf>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BadC(_)
            | Error::BadRange(..)
            | Error::NTooSmall(_)
            | Error::NTooLarge(..)
            | Error::GTooLarge(..)
            | Error::BadParameters(_)
            | Error::EllOutOfRange(_) => Failure::Usage(e.to_string()),
            _ => Failure::Construction(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn need(v: Option<u32>, flag: &str) -> std::result::Result<u32, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("values serialize");
    s.push(b'\n');
    s
}

/// Summary lines go to stdout when the payload went to a file, else stderr.
fn note(out: &Option<PathBuf>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn cmd_types(a: TypesArgs) -> Outcome {
    let out = &a.output.out;
    if a.pants {
        let n = need(a.n, "n")?;
        let types = enum_pants_types(n, a.essential_only);
        let bytes = match a.output.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["a", "b", "c"]).map_err(|e| Failure::Usage(e.to_string()))?;
                for t in &types {
                    w.serialize(t.0).map_err(|e| Failure::Usage(e.to_string()))?;
                }
                w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?
            }
            Format::Json => to_json(&json!({"kind": "pants-types", "n": n, "count": types.len(), "items": types})),
            Format::Dot => return Err(Failure::Usage("dot output is for trees and graphs".into())),
        };
        return emit(out, &bytes);
    }
    if a.dual_graphs {
        let g = need(a.g, "g")?;
        let graphs = enum_dual_graphs(g, DEFAULT_GENUS_CUTOFF)?;
        let bytes = match a.output.format {
            Format::Dot => graphs.iter().map(|x| x.to_dot()).collect::<String>().into_bytes(),
            Format::Json => to_json(&json!({"kind": "dual-graphs", "g": g, "count": graphs.len(), "items": graphs})),
            Format::Csv => return Err(Failure::Usage("csv output is for pants types".into())),
        };
        return emit(out, &bytes);
    }
    let n = need(a.n, "n")?;
    if a.triangulations {
        let classes = enum_triangulation_classes(n)?;
        let items: Vec<_> = classes.iter().map(|(c, k)| json!({"diagonals": c.code, "triangulations": k})).collect();
        return match a.output.format {
            Format::Json => emit(out, &to_json(&json!({"kind": "triangulations", "n": n, "count": classes.len(), "items": items}))),
            _ => Err(Failure::Usage("triangulation types are listed as json".into())),
        };
    }
    let bytes = match a.mode {
        Mode::Labelled => {
            let trees = enum_labelled_trees(n)?;
            match a.output.format {
                Format::Dot => trees.iter().map(|t| t.to_dot()).collect::<String>().into_bytes(),
                Format::Json => {
                    let items: Vec<_> = trees.iter().map(|t| t.to_parent_array()).collect();
                    to_json(&json!({"kind": "labelled-trees", "n": n, "count": trees.len(), "items": items}))
                }
                Format::Csv => return Err(Failure::Usage("csv output is for pants types".into())),
            }
        }
        Mode::Unlabelled => {
            let classes = enum_unlabelled_classes(n)?;
            match a.output.format {
                Format::Dot => classes.iter().map(|(_, t)| t.to_dot()).collect::<String>().into_bytes(),
                Format::Json => {
                    let items: Vec<_> = classes.iter().map(|(c, _)| c).collect();
                    to_json(&json!({"kind": "unlabelled-trees", "n": n, "count": classes.len(), "items": items}))
                }
                Format::Csv => return Err(Failure::Usage("csv output is for pants types".into())),
            }
        }
    };
    emit(out, &bytes)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_family(a: FamilyArgs) -> Outcome {
    let out = &a.out;
    let mut lines: Vec<String> = Vec::new();
    let file = if a.labelled_sphere {
        let n = need(a.n, "n")?;
        let max = a.max_size.unwrap_or(n);
        let fam = gen_lambda(n, a.min_size, max)?;
        let bound = lambda_closed_form(n);
        lines.push(format!("size {}; bound (3^n-2n-1)/4 = {bound}: {}", fam.codes.len(), verdict(fam.codes.len() as u128 <= bound)));
        if n >= 4 && (a.min_size, max) == (2, n) {
            let essential = gen_lambda(n, 2, n - 2)?.codes.len();
            lines.push(format!("note: restricting to 2 <= |s| <= n-2 gives {essential} codes"));
        }
        FamilyFile::LabelledSphere { n, family: fam.codes }
    } else if a.minimal {
        let n = need(a.n, "n")?;
        let mode = if a.search == Search::Exact { SearchMode::Exact } else { SearchMode::Greedy };
        let res = min_family_search(n, mode, a.budget)?;
        let lb = required_bipartitions(n);
        lines.push(format!(
            "size {}; optimal {}; lower bound 2^(n-1)-n-1 = {lb}: {}",
            res.size,
            res.optimal,
            verdict(res.size as u64 >= lb)
        ));
        FamilyFile::LabelledSphere { n, family: res.family }
    } else if a.random_pants || a.greedy_pants || a.exact_pants {
        let n = need(a.n, "n")?;
        let fam = if a.random_pants {
            random_index_set(RandomConstructionParams { n, c: a.c, seed: a.seed })?
        } else if a.greedy_pants {
            greedy_index_set(n, a.essential_only)?
        } else {
            exact_min_index_set(n)?
        };
        let missing = covers_pants_types(&fam, a.essential_only);
        let total = enum_pants_types(n, a.essential_only).len();
        let env = size_envelope(n);
        lines.push(format!(
            "index set {}; family {}; covered {}/{total}; envelope 8 n^(4/3) ln^(2/3) n = {env:.1}: {}",
            fam.s.len(),
            fam.family_size(),
            total - missing.len(),
            verdict(fam.family_size() as f64 <= env)
        ));
        FamilyFile::IndexSet { n, family: fam }
    } else if a.all_pairs {
        let n = need(a.n, "n")?;
        let fam = all_pairs_family(n)?;
        lines.push(format!("size {}; bound n^2 = {}: {}", fam.len(), n * n, verdict(fam.len() as u32 <= n * n)));
        FamilyFile::Cyclic { n, family: fam }
    } else if a.all_chords {
        let n = need(a.n, "n")?;
        let g = all_chords(n)?;
        lines.push(format!("size {}; bound n^2 = {}: {}", g.edges().len(), n * n, verdict(g.edges().len() as u32 <= n * n)));
        FamilyFile::Triangulation { n, family: g }
    } else if a.random_edges {
        let n = need(a.n, "n")?;
        let g = random_edge_set(n, a.c, a.seed)?;
        let missing = covers_triangle_types(&g);
        let total = triangle_types(n).len();
        let env = size_envelope(n);
        lines.push(format!(
            "edges {}; covered {}/{total}; envelope 8 n^(4/3) ln^(2/3) n = {env:.1}: {}",
            g.edges().len(),
            total - missing.len(),
            verdict(g.edges().len() as f64 <= env)
        ));
        FamilyFile::TriangleCover { n, family: g }
    } else if a.genus1 {
        let m = need(a.m, "m")?;
        let fam = genus1_family(m)?;
        let bound = 3u128.pow(m);
        lines.push(format!("size {}; bound 3^m = {bound}: {}", fam.size(), verdict((fam.size() as u128) < bound)));
        FamilyFile::Genus1 { m, family: fam.codes() }
    } else if a.genus2 {
        let m = need(a.m, "m")?;
        let fam = genus2_family(m)?;
        let bound = 3u128.pow(m + 1);
        lines.push(format!(
            "size {} (+{} small theta3 codes); bound 3^(m+1) = {bound}: {}",
            fam.main_size(),
            fam.theta3_small.len(),
            verdict(fam.main_size() as u128 <= bound)
        ));
        FamilyFile::Genus2 { m, family: fam.codes() }
    } else {
        let g = need(a.g, "g")?;
        let fam = closed_universal_family(g)?;
        lines.push(format!("size {}; bound 3^(2g-1) = {}: {}", fam.size(), fam.bound(), verdict(fam.size() as u128 <= fam.bound())));
        FamilyFile::Closed { g, cut_curves: g, family: fam.sphere.codes }
    };
    emit(out, &to_json(&file))?;
    for l in lines {
        note(out, &l);
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    kind: &'static str,
    size: usize,
    total: usize,
    realized: usize,
    universal: bool,
    failures: Vec<String>,
}

impl VerifyReport {
    fn from_universality(kind: &'static str, size: usize, r: UniversalityReport) -> Self {
        VerifyReport {
            kind,
            size,
            total: r.total,
            realized: r.realized,
            universal: r.is_universal(),
            failures: r.failures.iter().map(|i| format!("type {i}")).collect(),
        }
    }

    fn from_flags(kind: &'static str, size: usize, flags: &[(String, bool)]) -> Self {
        VerifyReport {
            kind,
            size,
            total: flags.len(),
            realized: flags.iter().filter(|f| f.1).count(),
            universal: flags.iter().all(|f| f.1),
            failures: flags.iter().filter(|f| !f.1).map(|f| f.0.clone()).collect(),
        }
    }
}

const GENUS1_VERIFY_CUTOFF: u32 = 6;
const GENUS2_VERIFY_CUTOFF: u32 = 5;
const LABELLED_VERIFY_CUTOFF: u32 = 10;

fn surface_flags(
    m: u32,
    cyclomatic: u32,
    check: impl Fn(&pants_atlas::type_census::DualGraph) -> bool + Sync,
) -> std::result::Result<Vec<(String, bool)>, Failure> {
    let graphs = labelled_graphs(m, cyclomatic)?;
    Ok(graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| (format!("graph {i}"), check(g)))
        .collect())
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.file).map_err(|e| Failure::Usage(format!("{}: {e}", a.file.display())))?;
    let file: FamilyFile =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.file.display())))?;
    let size = file.size();
    let report = match &file {
        FamilyFile::LabelledSphere { n, family } => {
            if *n > LABELLED_VERIFY_CUTOFF {
                return Err(Failure::Usage(format!("labelled verification supports n <= {LABELLED_VERIFY_CUTOFF}")));
            }
            VerifyReport::from_universality("labelled-sphere", size, verify_universal_labelled(family, *n)?)
        }
        FamilyFile::IndexSet { n, family } => {
            if family.n != *n {
                return Err(Failure::Usage("index set n differs from the envelope".into()));
            }
            let missing: BTreeSet<_> = covers_pants_types(family, a.essential_only).into_iter().collect();
            let flags: Vec<(String, bool)> = enum_pants_types(*n, a.essential_only)
                .into_iter()
                .map(|t| (t.to_string(), !missing.contains(&t)))
                .collect();
            VerifyReport::from_flags("index-set", size, &flags)
        }
        FamilyFile::Cyclic { n, family } => {
            VerifyReport::from_universality("cyclic", size, verify_universal_unlabelled(family, *n)?)
        }
        FamilyFile::TriangleCover { family, .. } => {
            let got = realized_triangle_types(family);
            let flags: Vec<(String, bool)> =
                triangle_types(family.n()).into_iter().map(|t| (t.to_string(), got.contains(&t))).collect();
            VerifyReport::from_flags("triangle-cover", size, &flags)
        }
        FamilyFile::Triangulation { family, .. } => {
            VerifyReport::from_universality("triangulation", size, verify_universal_triangulations(family)?)
        }
        FamilyFile::Genus1 { m, family } => {
            if *m > GENUS1_VERIFY_CUTOFF {
                return Err(Failure::Usage(format!("genus-1 verification supports m <= {GENUS1_VERIFY_CUTOFF}")));
            }
            let members: BTreeSet<&ConcatCode> = family.iter().collect();
            let flags = surface_flags(*m, 1, |g| {
                genus1_recognize(g).is_ok_and(|r| {
                    genus1_verify_structural(&r.edges, g).ok && r.edges.iter().all(|(_, c)| members.contains(c))
                })
            })?;
            VerifyReport::from_flags("genus1", size, &flags)
        }
        FamilyFile::Genus2 { m, family } => {
            if *m > GENUS2_VERIFY_CUTOFF {
                return Err(Failure::Usage(format!("genus-2 verification supports m <= {GENUS2_VERIFY_CUTOFF}")));
            }
            let members: BTreeSet<&ConcatCode> = family.iter().collect();
            let flags = surface_flags(*m, 2, |g| {
                genus2_recognize(g).is_ok_and(|r| {
                    genus2_verify_structural(&r.edges, g).ok && r.edges.iter().all(|(_, c)| members.contains(c))
                })
            })?;
            VerifyReport::from_flags("genus2", size, &flags)
        }
        FamilyFile::Closed { g, cut_curves, family } => {
            if cut_curves != g {
                return Err(Failure::Usage("a closed family needs exactly g cut curves".into()));
            }
            let members: BTreeSet<&CurveCode> = family.iter().collect();
            let graphs = enum_dual_graphs(*g, DEFAULT_GENUS_CUTOFF)?;
            let flags: Vec<(String, bool)> = graphs
                .par_iter()
                .enumerate()
                .map(|(i, graph)| {
                    let ok = realize_closed(graph).is_ok_and(|r| {
                        r.recognition.certify(&r.cut.tree).unwrap_or(false)
                            && r.recognition.edges.iter().all(|(_, c)| members.contains(c))
                    });
                    (format!("graph {i}"), ok)
                })
                .collect();
            VerifyReport::from_flags("closed", size, &flags)
        }
    };
    let bytes = to_json(&report);
    if report.universal {
        emit(&a.out, &bytes)
    } else {
        Err(Failure::NotUniversal(bytes, a.out))
    }
}

fn cmd_bounds(a: BoundsArgs) -> Outcome {
    let compare = |value: u64| a.family_size.map(|s| s >= value);
    let report = if a.labelled {
        let n = need(a.n, "n")?;
        let v = required_bipartitions(n);
        json!({"kind": "labelled", "n": n, "lower_bound": v, "family_size": a.family_size, "satisfied": compare(v)})
    } else if a.pants_dec {
        let n = need(a.n, "n")?;
        let v = lower_bound_sum(n);
        json!({"kind": "pants-dec", "n": n, "lower_bound": v, "family_size": a.family_size, "satisfied": compare(v)})
    } else if let Some(g) = a.genus {
        let v = counting_lower_bound(g)?;
        json!({"kind": "genus", "g": g, "lower_bound": v, "family_size": a.family_size, "satisfied": compare(v)})
    } else {
        let path = a.certificate.as_ref().expect("argument group is required");
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let file: FamilyFile =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let g: ChordGraph = match file {
            FamilyFile::TriangleCover { family, .. } | FamilyFile::Triangulation { family, .. } => family,
            _ => return Err(Failure::Usage("certificates need a polygon edge family".into())),
        };
        let realized = if a.ell == 3 { realized_triangle_types(&g).len() } else { realized_cycle_types(&g, a.ell)?.len() };
        let rep = certificate_lower_bound(&g, realized, a.ell)?;
        let bytes = to_json(&rep);
        return if rep.satisfied { emit(&a.out, &bytes) } else { Err(Failure::NotUniversal(bytes, a.out)) };
    };
    emit(&a.out, &to_json(&report))
}

const GREEDY_EXPERIMENT_CUTOFF: u32 = 256;

fn cmd_experiment(a: ExperimentArgs) -> Outcome {
    let jobs: Vec<(u32, u64)> = a.n.iter().flat_map(|&n| (a.seed..a.seed + a.seeds).map(move |s| (n, s))).collect();
    let rows: Vec<_> = jobs
        .par_iter()
        .map(|&(n, seed)| scaling_run(n, a.c, seed, a.essential_only))
        .collect::<pants_atlas::Result<_>>()?;
    let greedy: Vec<Option<usize>> = if a.greedy {
        a.n.par_iter()
            .map(|&n| {
                if n <= GREEDY_EXPERIMENT_CUTOFF {
                    greedy_index_set(n, a.essential_only).map(|f| Some(f.s.len()))
                } else {
                    Ok(None)
                }
            })
            .collect::<pants_atlas::Result<_>>()?
    } else {
        Vec::new()
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n", "c", "seed", "set_size", "family_size", "covered", "total", "runtime_ms"];
    if a.greedy {
        header.extend(["greedy_set_size", "greedy_family_size"]);
    }
    let io = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in &rows {
        let runtime = if a.no_timing { 0 } else { r.runtime_ms };
        let mut rec = vec![
            r.n.to_string(),
            r.c.to_string(),
            r.seed.to_string(),
            r.set_size.to_string(),
            r.family_size.to_string(),
            r.covered.to_string(),
            r.total.to_string(),
            runtime.to_string(),
        ];
        if a.greedy {
            let k = a.n.iter().position(|&x| x == r.n).and_then(|i| greedy[i]);
            rec.push(k.map(|k| k.to_string()).unwrap_or_default());
            rec.push(k.map(|k| (k * k.saturating_sub(1)).to_string()).unwrap_or_default());
        }
        w.write_record(&rec).map_err(io)?;
    }
    let mut bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    let points: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.family_size > 0).map(|r| (f64::from(r.n), r.family_size as f64)).collect();
    let mut tail = String::new();
    if a.n.iter().collect::<BTreeSet<_>>().len() >= 2 && !points.is_empty() {
        writeln!(tail, "# slope,{:.4}", log_log_slope(&points)).expect("string write");
    }
    bytes.extend(tail.into_bytes());
    emit(&a.out, &bytes)
}

fn configure_threads() -> std::result::Result<(), Failure> {
    if let Ok(v) = std::env::var("PANTS_ATLAS_THREADS") {
        let k: usize = v.parse().map_err(|_| Failure::Usage(format!("PANTS_ATLAS_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Types(a) => cmd_types(a),
        Command::Family(a) => cmd_family(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Experiment(a) => cmd_experiment(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotUniversal(bytes, out)) => {
            if let Err(Failure::Usage(msg)) = emit(&out, &bytes) {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Construction(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
