//! Acceptance criteria, one line each on stderr.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mso_td::cycle_structure::{remember_numbers, RootedForest};
use mso_td::feedback_aug::{augment_edges, augment_vertices, FeedbackError};
use mso_td::graph_core::{
    halin4, halin_from_plane_tree, norm, random_halin, random_kcycle, EdgeSet, Graph, HalinInput, KCycleInput,
};
use mso_td::halin_builder::build_halin_td;
use mso_td::kcycle_builder::build_kcycle_td;
use mso_td::mso::cross_check::{cross_check_halin, cross_check_kcycle, halin_from_kcycle1, CrossCheckReport};
use mso_td::orientation::proper_coloring;
use mso_td::property_automata::{Bipartite, Connected, NamedProperty};
use mso_td::remember_builder::{build_remember_td, find_spanning_tree, random_graph_with_tree, random_outerplanar};
use mso_td::terminal_algebra::{congruence_check, glue_child, glue_child_by_rewrite, isomorphic_fixed, random_terminal_graph};
use mso_td::tree_decomposition::{exact_treewidth, validate, TreeDecomposition};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    let detail = match failures.first() {
        None => summary,
        Some(first) => format!("{summary}; {} violation(s), first: {first}", failures.len()),
    };
    Outcome { pass: failures.is_empty(), detail }
}

fn remember_td(g: &Graph, tree: &EdgeSet) -> TreeDecomposition {
    let col = proper_coloring(g, g.max_degree(), None).expect("coloring");
    build_remember_td(g, tree, &col).expect("remember decomposition")
}

fn halin_width() -> Outcome {
    let mut failures = Vec::new();
    let mut largest = 0;
    for seed in 0..100u64 {
        let internal = 1 + (seed as usize * 97) % 100;
        let h = halin_from_plane_tree(&random_halin(internal, seed)).expect("generator");
        if h.graph.n() > 300 {
            failures.push(format!("seed {seed}: generator gave {} vertices", h.graph.n()));
            continue;
        }
        largest = largest.max(h.graph.n());
        let td = match build_halin_td(&h) {
            Ok(td) => td,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let width = td.width().unwrap_or(usize::MAX);
        let singleton_leaves = td.leaves().iter().all(|&b| td.bags[b].vertices.len() == 1);
        if !validate(&h.graph, &td).is_valid() || width > 3 || !td.is_binary() || !singleton_leaves {
            failures.push(format!(
                "seed {seed}: valid={} width={width} binary={} singleton leaves={singleton_leaves}",
                validate(&h.graph, &td).is_valid(),
                td.is_binary()
            ));
        }
    }
    outcome(&failures, format!("100 Halin graphs up to {largest} vertices"))
}

fn treewidth_floor() -> Outcome {
    let tw = exact_treewidth(&halin4().graph);
    let td = build_halin_td(&halin4()).expect("halin4");
    let w = td.width().expect("nonempty");
    let failures = if tw == 3 && w == 3 { vec![] } else { vec![format!("treewidth {tw}, builder width {w}")] };
    outcome(&failures, format!("exact treewidth of K4 = {tw}, builder width = {w}"))
}

fn kcycle_width() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = Vec::new();
    for k in 1..=4usize {
        let mut max_w = 0;
        for i in 0..25u64 {
            let seed = 1000 * k as u64 + i;
            let kc = random_kcycle(k, 2 + (i as usize % 3), seed);
            match build_kcycle_td(&kc) {
                Ok(td) => {
                    let w = td.width().unwrap_or(usize::MAX);
                    max_w = max_w.max(w);
                    if !validate(&kc.graph, &td).is_valid() || w > 4 * k {
                        failures.push(format!("k={k} seed {seed}: width {w}"));
                    }
                }
                Err(e) => failures.push(format!("k={k} seed {seed}: {e}")),
            }
        }
        worst.push(format!("k={k}: max {max_w}"));
    }
    outcome(&failures, format!("100 cycle trees ({})", worst.join(", ")))
}

fn remember_bound() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, tree) = random_graph_with_tree(rng.gen_range(4..=20), rng.gen_range(0..=12), seed);
        let (vr, er) = remember_numbers(&g, &tree).expect("spanning tree");
        let td = remember_td(&g, &tree);
        let w = td.width().unwrap_or(usize::MAX);
        if !validate(&g, &td).is_valid() || w > vr.max(er + 1) {
            failures.push(format!("seed {seed}: width {w}, vr {vr}, er {er}"));
        }
    }
    let mut found = 0;
    for i in 0..20u64 {
        let k = 1 + (i as usize % 2);
        let cap = 3 + (i as usize / 2 % 2);
        let n = 3 * k + (i as usize * 7) % (41 - 3 * k);
        let inst = random_outerplanar(k, cap, n, i);
        let delta = inst.max_degree;
        let (kappa, lambda) = ((delta * k).saturating_sub(1), 2 * k);
        match find_spanning_tree(&inst.graph, kappa, lambda) {
            Ok(search) if search.tree.is_some() => found += 1,
            Ok(search) => failures.push(format!(
                "outerplanar #{i} (k={k}, n={}, max degree {delta}): best (vr, er) = {:?} against ({kappa}, {lambda})",
                inst.graph.n(),
                search.best
            )),
            Err(e) => failures.push(format!("outerplanar #{i}: {e}")),
        }
    }
    outcome(&failures, format!("50 width checks, spanning trees found on {found}/20 outerplanar instances"))
}

/// Smallest per-block bound the augmentation accepts.
fn least_bound<T>(mut attempt: impl FnMut(usize) -> Result<T, FeedbackError>) -> Result<(usize, T), FeedbackError> {
    for l in 0..=16 {
        match attempt(l) {
            Ok(t) => return Ok((l, t)),
            Err(FeedbackError::BoundExceeded { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(FeedbackError::BoundExceeded { block: vec![], needed: 17, bound: 16 })
}

fn random_non_edge(rng: &mut ChaCha8Rng, g: &Graph, among: &[usize]) -> Option<(usize, usize)> {
    for _ in 0..50 {
        let (a, b) = (among[rng.gen_range(0..among.len())], among[rng.gen_range(0..among.len())]);
        if a != b && !g.has_edge(a, b) {
            return Some(norm(a, b));
        }
    }
    None
}

#[derive(Default)]
struct Tally {
    failures: Vec<String>,
    counts: [usize; 3],
}

impl Tally {
    fn check(&mut self, variant: usize, label: String, g2: &Graph, w_in: usize, l: usize, out: &TreeDecomposition) {
        self.counts[variant] += 1;
        let w = out.width().unwrap_or(usize::MAX);
        if !validate(g2, out).is_valid() || w > w_in + l {
            self.failures.push(format!("{label}: width {w_in} -> {w} with l={l}"));
        }
    }
}

fn feedback_augmentation() -> Outcome {
    let mut t = Tally::default();
    let mut seed = 0u64;
    // Chords on remember decompositions of random graphs and paths.
    while t.counts[0] < 30 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, tree) = random_graph_with_tree(5 + seed as usize % 12, rng.gen_range(0..3), seed);
        let td = remember_td(&g, &tree);
        let all: Vec<usize> = (0..g.n()).collect();
        let extra: EdgeSet = (0..rng.gen_range(1..4)).filter_map(|_| random_non_edge(&mut rng, &g, &all)).collect();
        if extra.is_empty() {
            continue;
        }
        let col = proper_coloring(&g, g.max_degree(), None).expect("coloring");
        match least_bound(|l| augment_edges(&g, &td, &tree, &extra, &col, l)) {
            Ok((l, out)) => t.check(0, format!("chords seed {seed}"), &g.with_edges(&extra).unwrap(), td.width().unwrap(), l, &out),
            Err(e) => t.failures.push(format!("chords seed {seed}: {e}")),
        }
    }
    // Halin decompositions with chords inside one block.
    while t.counts[1] < 30 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = halin_from_plane_tree(&random_halin(3 + seed as usize % 8, seed)).expect("generator");
        let g = &h.graph;
        let td = build_halin_td(&h).expect("halin");
        let forest = RootedForest::new(g.n(), &h.tree_edges, h.root);
        let all: Vec<usize> = (0..g.n()).collect();
        let Some((a, b)) = random_non_edge(&mut rng, g, &all) else { continue };
        let path = forest.path(a, b).expect("spanning tree");
        let mut extra = EdgeSet::from([(a, b)]);
        for _ in 0..rng.gen_range(0..3) {
            extra.extend(random_non_edge(&mut rng, g, &path));
        }
        let col = proper_coloring(g, 3, Some(&td)).expect("coloring");
        match least_bound(|l| augment_edges(g, &td, &h.tree_edges, &extra, &col, l)) {
            Ok((l, out)) => t.check(1, format!("halin seed {seed}"), &g.with_edges(&extra).unwrap(), td.width().unwrap(), l, &out),
            Err(e) => t.failures.push(format!("halin seed {seed}: {e}")),
        }
    }
    // Apex vertices over stretches of a tree.
    while t.counts[2] < 30 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, tree) = random_graph_with_tree(4 + seed as usize % 8, 0, seed);
        let td = remember_td(&g, &tree);
        let n = g.n();
        let apexes: Vec<String> = (0..rng.gen_range(1..=2)).map(|i| format!("apex{i}")).collect();
        let mut edges = EdgeSet::new();
        for i in 0..apexes.len() {
            for _ in 0..rng.gen_range(1..=3) {
                edges.insert((rng.gen_range(0..n), n + i));
            }
        }
        match least_bound(|l| augment_vertices(&g, &td, &tree, &apexes, &edges, l)) {
            Ok((l, (g2, out))) => t.check(2, format!("apex seed {seed}"), &g2, td.width().unwrap(), l, &out),
            Err(e) => t.failures.push(format!("apex seed {seed}: {e}")),
        }
    }
    outcome(&t.failures, format!("{} chord, {} Halin one-block, {} apex cases", t.counts[0], t.counts[1], t.counts[2]))
}

fn algebra() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shapes: [(&[&str], &[&str]); 3] = [(&["x0", "x1"], &["x1", "y"]), (&["x0"], &["x0", "y"]), (&["x0", "x1"], &["x1", "x0"])];
    for i in 0..1000 {
        let (x, y) = shapes[i % shapes.len()];
        let x: Vec<String> = x.iter().map(|s| s.to_string()).collect();
        let y: Vec<String> = y.iter().map(|s| s.to_string()).collect();
        let density = rng.gen_range(0.2..0.8);
        let g = random_terminal_graph(&mut rng, &x, "g", 4, density);
        let h = random_terminal_graph(&mut rng, &y, "h", 4, density);
        match glue_child_by_rewrite(&g, &h) {
            Ok(rhs) if isomorphic_fixed(&glue_child(&g, &h), &rhs) => {}
            Ok(_) => failures.push(format!("rewrite pair {i} differs")),
            Err(e) => failures.push(format!("rewrite pair {i}: {e}")),
        }
    }
    let mut laws = Vec::new();
    for (name, report) in [("bipartite", congruence_check(&Bipartite, 500, 61)), ("connected", congruence_check(&Connected, 500, 62))] {
        match report {
            Ok(r) => {
                laws.push(format!("{name} {}", r.child_glue_checked));
                for c in &r.counterexamples {
                    failures.push(format!("{name}: {} law", c.law));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    outcome(&failures, format!("1000 rewrite pairs, congruence quadruples: {}", laws.join(", ")))
}

fn automata() -> Outcome {
    let properties = [
        NamedProperty::parse("parity", 2).unwrap(),
        NamedProperty::parse("parity", 3).unwrap(),
        NamedProperty::parse("bipartite", 2).unwrap(),
        NamedProperty::parse("connected", 2).unwrap(),
        NamedProperty::parse("hamiltonian", 2).unwrap(),
    ];
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut judge = |name: &str, g: &Graph, tds: &[(&str, TreeDecomposition)], failures: &mut Vec<String>| {
        for p in &properties {
            let truth = p.brute(g);
            let mut verdicts = BTreeSet::new();
            for (method, td) in tds {
                runs += 1;
                match p.run(g, td) {
                    Ok(v) => {
                        verdicts.insert(v);
                        if v != truth {
                            failures.push(format!("{name}, {} by {method}: automaton {v}, brute {truth}", p.name()));
                        }
                    }
                    Err(e) => failures.push(format!("{name}, {} by {method}: {e}", p.name())),
                }
            }
            if verdicts.len() > 1 {
                failures.push(format!("{name}, {}: methods disagree", p.name()));
            }
        }
    };
    let mut halins = 0;
    let mut seed = 0u64;
    while halins < 200 {
        seed += 1;
        let h = halin_from_plane_tree(&random_halin(1 + seed as usize % 4, seed)).expect("generator");
        if h.graph.n() > 12 {
            continue;
        }
        halins += 1;
        let tds = [("halin", build_halin_td(&h).expect("halin")), ("remember", remember_td(&h.graph, &h.tree_edges))];
        judge(&format!("halin seed {seed}"), &h.graph, &tds, &mut failures);
    }
    for i in 0..50u64 {
        let kc = random_kcycle(1 + (i as usize % 2), 2 + (i as usize % 2), 500 + i);
        let tds = [("kcycle", build_kcycle_td(&kc).expect("kcycle")), ("remember", remember_td(&kc.graph, &kc.tree_edges))];
        judge(&format!("cycle tree seed {}", 500 + i), &kc.graph, &tds, &mut failures);
    }
    outcome(&failures, format!("200 Halin graphs and 50 cycle trees, {runs} automaton runs"))
}

fn merged(parts: Vec<Result<CrossCheckReport, String>>, failures: &mut Vec<String>) -> usize {
    let mut total = CrossCheckReport::default();
    for p in parts {
        match p {
            Ok(r) => total.merge(r),
            Err(e) => failures.push(e),
        }
    }
    failures.extend(total.disagreements.iter().cloned());
    total.total()
}

fn mso_cross_checks() -> Outcome {
    let mut failures = Vec::new();
    let wheel: KCycleInput = random_kcycle(1, 4, 0);
    let wheel_halin: Result<HalinInput, String> = halin_from_kcycle1(&wheel).map_err(|e| e.to_string());
    let parts = vec![
        cross_check_halin(&halin4()).map_err(|e| format!("halin4: {e}")),
        cross_check_kcycle(&wheel).map_err(|e| format!("cycle tree: {e}")),
        wheel_halin.and_then(|h| cross_check_halin(&h).map_err(|e| format!("cycle tree as Halin: {e}"))),
    ];
    let checked = merged(parts, &mut failures);
    outcome(&failures, format!("HALIN4 and a {}-vertex cycle tree, {checked} comparisons", wheel.graph.n()))
}

fn refinement() -> Outcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for (i, p) in NamedProperty::all().iter().enumerate() {
        match p.audit(300, 90 + i as u64) {
            Ok(r) => {
                pairs += r.pairs;
                if !r.passed() {
                    failures.push(format!(
                        "{}: {} equal-signature and {} distinguished violations",
                        p.name(),
                        r.equal_signature_violations,
                        r.distinguished_violations
                    ));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", p.name())),
        }
    }
    outcome(&failures, format!("{pairs} sampled pairs over {} properties", NamedProperty::all().len()))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("Halin width <= 3, binary, singleton leaves", halin_width),
        ("Halin treewidth floor", treewidth_floor),
        ("cycle-tree width <= 4k", kcycle_width),
        ("remember width bound and outerplanar tree search", remember_bound),
        ("feedback augmentation width <= width + l", feedback_augmentation),
        ("algebra rewrite and congruence", algebra),
        ("automaton agrees with brute force", automata),
        ("MSO cross-checks", mso_cross_checks),
        ("signature refinement audit", refinement),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        // Straight to stderr so the lines show without --nocapture.
        let line = format!("criterion {}: {status} {name} ({}) [{:.1}s]\n", i + 1, o.detail, start.elapsed().as_secs_f64());
        std::io::stderr().write_all(line.as_bytes()).expect("stderr");
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
