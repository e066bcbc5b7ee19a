//! Predicate library: graph basics, orientations, fundamental cycles, sibling
//! orders, boundary vertices, typed bags and parent relations of the Halin and
//! k-cycle decompositions, feedback additions and remember-number bags.
//!
//! Definitions read structure constants by name:
//! `X0, X1, ...` color classes and `F` the orientation flag set; `E_T` the
//! spanning tree; `E_C` and `r` the Halin cycle and root leaf; `c`, `E_C1..`,
//! `r1..` the k-cycle center, level cycles and level roots; `E_X` the extra
//! edges and `V0` the original vertices of a feedback extension.

use std::collections::BTreeMap;

use super::build::*;
use super::{Definition, Formula, Sort, Term};

use Sort::{Edge as ED, EdgeSet as ES, Vertex as VX, VertexSet as VS};

/// Sizes that generated families are instantiated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LibraryParams {
    /// Number of color classes the structure carries.
    pub colors: usize,
    /// Number of level cycles of k-cycle structures.
    pub levels: usize,
    /// Largest vertex remember bound with a `vr_le_*` sentence.
    pub kappa: usize,
    /// Largest edge remember bound with an `er_le_*` sentence.
    pub lambda: usize,
}

impl Default for LibraryParams {
    fn default() -> Self {
        LibraryParams { colors: 4, levels: 1, kappa: 3, lambda: 3 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Library {
    defs: BTreeMap<String, Definition>,
}

fn key(name: &str) -> String {
    name.chars().filter(|c| *c != '_' && *c != '-').flat_map(char::to_lowercase).collect()
}

impl Library {
    pub fn empty() -> Library {
        Library::default()
    }

    pub fn add(&mut self, name: &str, params: &[(&str, Sort)], body: Formula) {
        let params = params.iter().map(|(p, s)| (p.to_string(), *s)).collect();
        self.defs.insert(name.to_string(), Definition { name: name.to_string(), params, body });
    }

    /// Exact name first, then ignoring case, `_` and `-`.
    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.get(name).or_else(|| {
            let k = key(name);
            self.defs.values().find(|d| key(&d.name) == k)
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(String::as_str)
    }

    pub fn definitions(&self) -> impl Iterator<Item = &Definition> {
        self.defs.values()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// `name` applied to argument terms, as a formula.
    pub fn instantiate(&self, name: &str, args: Vec<Term>) -> Option<Formula> {
        self.get(name).map(|d| Formula::Call(d.name.clone(), args))
    }

    /// Every family below, sized by `p`.
    pub fn standard(p: LibraryParams) -> Library {
        let mut lib = Library::empty();
        basics(&mut lib);
        orientation(&mut lib, p.colors);
        fundamental(&mut lib);
        ordering(&mut lib, "ori_nb", "E_C", "r");
        halin(&mut lib);
        kcycle(&mut lib, p.levels);
        feedback(&mut lib);
        remember(&mut lib, p.kappa, p.lambda);
        lib
    }
}

fn vars(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

/// Pairwise distinctness of the named elements.
fn distinct(names: &[String]) -> Formula {
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            out.push(not(eq(n(&names[i]), n(&names[j]))));
        }
    }
    and(out)
}

/// `∃x1 ... ∃xk` (each ranging over `within` when given) around `body`.
fn exists_many(names: &[String], sort: Sort, within: Option<&Term>, body: Formula) -> Formula {
    names.iter().rev().fold(body, |acc, x| match within {
        Some(t) => ex_in(x, sort, t.clone(), acc),
        None => ex(x, sort, acc),
    })
}

fn forall_many(names: &[String], sort: Sort, within: Option<&Term>, body: Formula) -> Formula {
    names.iter().rev().fold(body, |acc, x| match within {
        Some(t) => all_in(x, sort, t.clone(), acc),
        None => all(x, sort, acc),
    })
}

const SMALL: usize = 4;

fn basics(lib: &mut Library) {
    lib.add("edge", &[("e", ED), ("v", VX), ("w", VX)], and(vec![inc(n("e"), n("v")), inc(n("e"), n("w")), not(eq(n("v"), n("w")))]));
    lib.add("adj", &[("v", VX), ("w", VX), ("S", ES)], ex_in("e", ED, n("S"), call("edge", vec![n("e"), n("v"), n("w")])));
    for k in 0..=SMALL + 1 {
        let es = vars("e", k);
        let body = and(vec![distinct(&es), and(es.iter().map(|e| inc(n(e), n("v"))).collect())]);
        lib.add(&format!("deg_ge_{k}"), &[("v", VX), ("S", ES)], exists_many(&es, ED, Some(&n("S")), body));
    }
    for k in 0..=SMALL {
        let ge_next = call(&format!("deg_ge_{}", k + 1), vec![n("v"), n("S")]);
        lib.add(&format!("deg_le_{k}"), &[("v", VX), ("S", ES)], not(ge_next.clone()));
        lib.add(
            &format!("deg_eq_{k}"),
            &[("v", VX), ("S", ES)],
            and(vec![call(&format!("deg_ge_{k}"), vec![n("v"), n("S")]), not(ge_next)]),
        );
    }
    // Every nonempty proper part of A has an S-edge leaving it inside A.
    lib.add(
        "conn",
        &[("A", VS), ("S", ES)],
        all_in(
            "X",
            VS,
            n("A"),
            imp(
                and(vec![ex_in("x", VX, n("X"), Formula::Const(true)), not(sub(n("A"), n("X")))]),
                ex_in(
                    "e",
                    ED,
                    n("S"),
                    ex_in(
                        "v",
                        VX,
                        n("X"),
                        ex_in("w", VX, Term::diff(n("A"), n("X")), call("edge", vec![n("e"), n("v"), n("w")])),
                    ),
                ),
            ),
        ),
    );
    lib.add(
        "conn2",
        &[("A", VS), ("S", ES)],
        and(vec![
            call("conn", vec![n("A"), n("S")]),
            all_in("u", VX, n("A"), call("conn", vec![Term::diff(n("A"), Term::single(n("u"))), n("S")])),
        ]),
    );
    lib.add(
        "cycle",
        &[("A", VS), ("S", ES)],
        and(vec![
            ex_in("x", VX, n("A"), Formula::Const(true)),
            eq(n("A"), Term::inc_v(n("S"))),
            all_in("v", VX, n("A"), call("deg_eq_2", vec![n("v"), n("S")])),
            call("conn", vec![n("A"), n("S")]),
        ]),
    );
    lib.add(
        "acyclic",
        &[("S", ES)],
        not(ex_in(
            "T",
            ES,
            n("S"),
            and(vec![not(eq(n("T"), Term::NoEdges)), call("cycle", vec![Term::inc_v(n("T")), n("T")])]),
        )),
    );
    lib.add(
        "tree",
        &[("A", VS), ("S", ES)],
        and(vec![
            ex_in("x", VX, n("A"), Formula::Const(true)),
            sub(Term::inc_v(n("S")), n("A")),
            call("conn", vec![n("A"), n("S")]),
            call("acyclic", vec![n("S")]),
        ]),
    );
    // Undirected path with at least one edge between distinct ends.
    lib.add(
        "path",
        &[("v", VX), ("w", VX), ("S", ES)],
        and(vec![
            not(eq(n("v"), n("w"))),
            call("deg_eq_1", vec![n("v"), n("S")]),
            call("deg_eq_1", vec![n("w"), n("S")]),
            all_in("u", VX, Term::inc_v(n("S")), call("deg_le_2", vec![n("u"), n("S")])),
            call("tree", vec![Term::inc_v(n("S")), n("S")]),
        ]),
    );
    for k in 0..=SMALL {
        let es = vars("e", k);
        let cover = all_in("e", ED, n("S"), or(es.iter().map(|x| eq(n("e"), n(x))).collect()));
        lib.add(&format!("card_eq_{k}"), &[("S", ES)], exists_many(&es, ED, Some(&n("S")), and(vec![distinct(&es), cover])));
    }
}

fn partition(lib: &mut Library, name: &str, sort: Sort, k: usize) {
    let xs = vars("X", k);
    let params: Vec<(&str, Sort)> = xs.iter().map(|x| (x.as_str(), sort)).collect();
    let elem = if sort == VS { VX } else { ED };
    let one_class = or((0..k)
        .map(|i| {
            let others = (0..k).filter(|&j| j != i).map(|j| not(mem(n("z"), n(&xs[j])))).collect();
            and(vec![mem(n("z"), n(&xs[i])), and(others)])
        })
        .collect());
    lib.add(name, &params, all("z", elem, one_class));
}

fn orientation(lib: &mut Library, colors: usize) {
    for k in 1..=colors.max(SMALL) {
        partition(lib, &format!("part_v_{k}"), VS, k);
        partition(lib, &format!("part_e_{k}"), ES, k);
        let xs = vars("X", k);
        let params: Vec<(&str, Sort)> = xs.iter().map(|x| (x.as_str(), VS)).collect();
        let args: Vec<Term> = xs.iter().map(|x| n(x)).collect();
        let monochrome = or(xs.iter().map(|x| and(vec![mem(n("v"), n(x)), mem(n("w"), n(x))])).collect());
        lib.add(
            &format!("kcol_{k}"),
            &params,
            and(vec![
                call(&format!("part_v_{k}"), args),
                all("e", ED, all("v", VX, all("w", VX, imp(call("edge", vec![n("e"), n("v"), n("w")]), not(monochrome))))),
            ]),
        );
    }
    let mut lower = Vec::new();
    for i in 0..colors {
        for j in i + 1..colors {
            lower.push(and(vec![mem(n("v"), n(&format!("X{i}"))), mem(n("w"), n(&format!("X{j}")))]));
        }
    }
    lib.add("col_lt", &[("v", VX), ("w", VX)], or(lower));
    let flagged = |v: &str, w: &str| iff(mem(n("e"), n("F")), call("col_lt", vec![n(v), n(w)]));
    lib.add("head", &[("e", ED), ("v", VX)], ex("w", VX, and(vec![call("edge", vec![n("e"), n("v"), n("w")]), flagged("v", "w")])));
    lib.add("tail", &[("e", ED), ("v", VX)], ex("w", VX, and(vec![call("edge", vec![n("e"), n("v"), n("w")]), not(flagged("v", "w"))])));
    lib.add(
        "arc",
        &[("e", ED), ("v", VX), ("w", VX)],
        and(vec![call("edge", vec![n("e"), n("v"), n("w")]), call("head", vec![n("e"), n("v")])]),
    );
    for (dir, arc_of) in [("indeg", true), ("outdeg", false)] {
        for k in 0..=2 {
            let ws = vars("w", k);
            let arcs = ws
                .iter()
                .map(|w| {
                    let a = if arc_of { vec![n("e"), n(w), n("v")] } else { vec![n("e"), n("v"), n(w)] };
                    ex_in("e", ED, n("S"), call("arc", a))
                })
                .collect();
            lib.add(&format!("{dir}_ge_{k}"), &[("v", VX), ("S", ES)], exists_many(&ws, VX, None, and(vec![distinct(&ws), and(arcs)])));
        }
        for k in 0..=1 {
            let ws = vars("w", k + 1);
            let arcs = ws
                .iter()
                .map(|w| {
                    let a = if arc_of { vec![n("e"), n(w), n("v")] } else { vec![n("e"), n("v"), n(w)] };
                    ex_in("e", ED, n("S"), call("arc", a))
                })
                .collect();
            let some_equal = not(distinct(&ws));
            lib.add(&format!("{dir}_le_{k}"), &[("v", VX), ("S", ES)], forall_many(&ws, VX, None, imp(and(arcs), some_equal)));
            lib.add(
                &format!("{dir}_eq_{k}"),
                &[("v", VX), ("S", ES)],
                and(vec![call(&format!("{dir}_le_{k}"), vec![n("v"), n("S")]), call(&format!("{dir}_ge_{k}"), vec![n("v"), n("S")])]),
            );
        }
    }
    for (name, preds) in [("in_reg_1", vec!["indeg_eq_1"]), ("out_reg_1", vec!["outdeg_eq_1"]), ("inout_reg_1", vec!["indeg_eq_1", "outdeg_eq_1"])] {
        let body = and(preds.iter().map(|p| call(p, vec![n("v"), n("S")])).collect());
        lib.add(name, &[("A", VS), ("S", ES)], all_in("v", VX, n("A"), body));
    }
    lib.add(
        "dir_cycle",
        &[("A", VS), ("S", ES)],
        and(vec![call("conn", vec![n("A"), n("S")]), call("inout_reg_1", vec![n("A"), n("S")])]),
    );
    lib.add(
        "dir_tree",
        &[("A", VS), ("S", ES)],
        and(vec![
            call("tree", vec![n("A"), n("S")]),
            ex_in(
                "q",
                VX,
                n("A"),
                all_in(
                    "v",
                    VX,
                    n("A"),
                    or(vec![
                        and(vec![eq(n("q"), n("v")), call("indeg_eq_0", vec![n("v"), n("S")])]),
                        and(vec![not(eq(n("v"), n("q"))), call("indeg_eq_1", vec![n("v"), n("S")])]),
                    ]),
                ),
            ),
        ]),
    );
    lib.add(
        "dir_path_set",
        &[("A", VS), ("S", ES)],
        and(vec![
            call("dir_tree", vec![n("A"), n("S")]),
            all_in("v", VX, n("A"), call("deg_le_2", vec![n("v"), n("S")])),
        ]),
    );
    // Nonempty directed s-t path; both ends must lie on it.
    lib.add(
        "dir_path",
        &[("s", VX), ("t", VX), ("S", ES)],
        and(vec![
            not(eq(n("S"), Term::NoEdges)),
            mem(n("s"), Term::inc_v(n("S"))),
            mem(n("t"), Term::inc_v(n("S"))),
            call("indeg_eq_0", vec![n("s"), n("S")]),
            call("outdeg_eq_0", vec![n("t"), n("S")]),
            call("dir_path_set", vec![Term::inc_v(n("S")), n("S")]),
        ]),
    );
    lib.add("tree_arc", &[("e", ED), ("y", VX), ("x", VX)], and(vec![mem(n("e"), n("E_T")), call("arc", vec![n("e"), n("y"), n("x")])]));
}

fn fundamental(lib: &mut Library) {
    // A cycle with exactly one edge outside the tree.
    lib.add(
        "fund_cyc_set",
        &[("S", ES)],
        and(vec![
            call("cycle", vec![Term::inc_v(n("S")), n("S")]),
            ex_in("e", ED, n("S"), all_in("f", ED, n("S"), iff(not(eq(n("e"), n("f"))), mem(n("f"), n("E_T"))))),
        ]),
    );
    // The cycle's non-tree edge is one of the two arguments, so the search
    // stays inside the tree plus those edges.
    let near = |a: &str, b: &str| Term::union(n("E_T"), Term::union(Term::single(n(a)), Term::single(n(b))));
    lib.add(
        "fund_cyc",
        &[("e", ED), ("f", ED)],
        ex_in("S", ES, near("e", "f"), and(vec![mem(n("e"), n("S")), mem(n("f"), n("S")), call("fund_cyc_set", vec![n("S")])])),
    );
    lib.add(
        "fund_cyc_v",
        &[("v", VX), ("f", ED)],
        ex_in(
            "S",
            ES,
            near("f", "f"),
            and(vec![mem(n("f"), n("S")), mem(n("v"), Term::inc_v(n("S"))), call("fund_cyc_set", vec![n("S")])]),
        ),
    );
    lib.add(
        "lower_end",
        &[("f", ED), ("u", VX)],
        and(vec![
            inc(n("f"), n("u")),
            all("w", VX, imp(and(vec![not(eq(n("u"), n("w"))), inc(n("f"), n("w"))]), call("col_lt", vec![n("u"), n("w")]))),
        ]),
    );
}

/// Sibling order over tree arcs measured along cycle `cyc` from `root`, plus
/// its direct-neighbour, sibling and left-sibling forms (suffix-named).
fn ordering(lib: &mut Library, name: &str, cyc: &str, root: &str) {
    let suffix = name.strip_prefix("ori_nb").unwrap_or("");
    let dist = format!("cyc_dist{suffix}");
    let closer = format!("closer{suffix}");
    // P is the directed cycle path from the root to the target of cycle arc g.
    lib.add(
        &dist,
        &[("g", ED), ("P", ES)],
        ex("u", VX, and(vec![call("tail", vec![n("g"), n("u")]), call("dir_path", vec![n(root), n("u"), n("P")])])),
    );
    // P is strictly shorter than the path to every cycle arc on e's
    // fundamental cycles.
    lib.add(
        &closer,
        &[("P", ES), ("e", ED)],
        all_in(
            "d",
            ED,
            n(cyc),
            imp(
                call("fund_cyc", vec![n("e"), n("d")]),
                all_in("Q", ES, n(cyc), imp(call(&dist, vec![n("d"), n("Q")]), strict_sub(n("P"), n("Q")))),
            ),
        ),
    );
    let body = and(vec![
        mem(n("e"), n("E_T")),
        mem(n("f"), n("E_T")),
        ex("h", VX, and(vec![call("head", vec![n("e"), n("h")]), call("head", vec![n("f"), n("h")])])),
        ex_in(
            "g",
            ED,
            n(cyc),
            and(vec![
                call("fund_cyc", vec![n("f"), n("g")]),
                ex_in(
                    "P",
                    ES,
                    n(cyc),
                    and(vec![call(&dist, vec![n("g"), n("P")]), call(&closer, vec![n("P"), n("e")])]),
                ),
            ]),
        ),
    ]);
    lib.add(name, &[("e", ED), ("f", ED)], body);
    let nba = format!("ori_nba{suffix}");
    lib.add(
        &nba,
        &[("e", ED), ("f", ED)],
        and(vec![
            call(name, vec![n("e"), n("f")]),
            all("g", ED, imp(and(vec![not(eq(n("f"), n("g"))), call(name, vec![n("e"), n("g")])]), call(name, vec![n("f"), n("g")]))),
        ]),
    );
    for (sib, rel) in [(format!("ori_sib{suffix}"), name.to_string()), (format!("ori_siba{suffix}"), nba.clone())] {
        lib.add(
            &sib,
            &[("x", VX), ("y", VX)],
            ex_in(
                "e",
                ED,
                n("E_T"),
                ex_in(
                    "f",
                    ED,
                    n("E_T"),
                    and(vec![call("tail", vec![n("e"), n("x")]), call("tail", vec![n("f"), n("y")]), call(&rel, vec![n("e"), n("f")])]),
                ),
            ),
        );
    }
    lib.add(&format!("left_sibling{suffix}"), &[("y", VX), ("x", VX)], call(&format!("ori_siba{suffix}"), vec![n("y"), n("x")]));
}

fn halin(lib: &mut Library) {
    for (name, first_left) in [("child_rplus", false), ("child_lplus", true)] {
        let order = if first_left { vec![n("e"), n("f")] } else { vec![n("f"), n("e")] };
        lib.add(
            name,
            &[("x", VX)],
            all(
                "y",
                VX,
                all(
                    "z",
                    VX,
                    all_in(
                        "e",
                        ED,
                        n("E_T"),
                        all_in(
                            "f",
                            ED,
                            n("E_T"),
                            imp(
                                and(vec![
                                    call("arc", vec![n("e"), n("y"), n("x")]),
                                    call("arc", vec![n("f"), n("y"), n("z")]),
                                    not(eq(n("e"), n("f"))),
                                ]),
                                call("ori_nb", order.clone()),
                            ),
                        ),
                    ),
                ),
            ),
        );
    }
    for (name, child) in [("bd_r", "child_rplus"), ("bd_l", "child_lplus")] {
        let cyc_v = Term::inc_v(n("E_C"));
        lib.add(
            name,
            &[("x", VX), ("y", VX)],
            or(vec![
                and(vec![mem(n("x"), cyc_v.clone()), eq(n("x"), n("y"))]),
                and(vec![
                    mem(n("y"), cyc_v),
                    ex_in(
                        "P",
                        ES,
                        n("E_T"),
                        and(vec![
                            call("dir_path", vec![n("x"), n("y"), n("P")]),
                            all_in("e", ED, n("P"), all("z", VX, imp(call("tail", vec![n("e"), n("z")]), call(child, vec![n("z")])))),
                        ]),
                    ),
                ]),
            ]),
        );
    }
    let z_is = |v: &str| eq(n("z"), n(v));
    let bd = |side: &str, v: &str| call(side, vec![n(v), n("z")]);
    let left_bd_r = ex("s", VX, and(vec![call("left_sibling", vec![n("s"), n("x")]), bd("bd_r", "s")]));
    let members: [(&str, Vec<Formula>); 7] = [
        ("r1", vec![z_is("x"), bd("bd_r", "x"), bd("bd_l", "x")]),
        ("r2", vec![z_is("y"), z_is("x"), bd("bd_r", "x"), bd("bd_l", "x")]),
        ("r3", vec![z_is("y"), bd("bd_r", "x"), bd("bd_l", "x")]),
        ("l1", vec![z_is("y"), bd("bd_l", "y"), left_bd_r.clone()]),
        ("l2", vec![z_is("y"), bd("bd_l", "y"), left_bd_r, bd("bd_l", "x")]),
        ("l3", vec![z_is("y"), bd("bd_l", "y"), bd("bd_l", "x")]),
        ("lr", vec![z_is("y"), bd("bd_l", "y"), bd("bd_r", "x"), bd("bd_l", "x")]),
    ];
    for (t, alts) in members {
        lib.add(
            &format!("bag_{t}"),
            &[("e", ED), ("X", VS)],
            ex(
                "y",
                VX,
                ex("x", VX, and(vec![call("tree_arc", vec![n("e"), n("y"), n("x")]), all("z", VX, iff(mem(n("z"), n("X")), or(alts)))])),
            ),
        );
    }
    lib.add("arc_at_root", &[("e", ED)], ex("x", VX, call("tree_arc", vec![n("e"), n("r"), n("x")])));
    lib.add(
        "arc_leftmost",
        &[("e", ED)],
        ex("y", VX, ex("x", VX, and(vec![call("tree_arc", vec![n("e"), n("y"), n("x")]), call("child_lplus", vec![n("x")])]))),
    );
    // Bags that the construction actually creates for an arc.
    let at_root = call("arc_at_root", vec![n("e")]);
    let leftmost = call("arc_leftmost", vec![n("e")]);
    for t in ["r1", "r2", "r3", "l1", "l2", "l3", "lr"] {
        let guard = match t {
            "r1" | "r2" => Formula::Const(true),
            "r3" => not(at_root.clone()),
            _ => and(vec![not(at_root.clone()), not(leftmost.clone())]),
        };
        lib.add(&format!("halin_bag_{t}"), &[("e", ED), ("X", VS)], and(vec![guard, call(&format!("bag_{t}"), vec![n("e"), n("X")])]));
    }
    lib.add(
        "bag",
        &[("X", VS)],
        ex_in(
            "e",
            ED,
            n("E_T"),
            or(["r1", "r2", "r3", "l1", "l2", "l3", "lr"].iter().map(|t| call(&format!("halin_bag_{t}"), vec![n("e"), n("X")])).collect()),
        ),
    );
    // Bag that links a component to whatever lies above it.
    lib.add(
        "bag_top",
        &[("e", ED), ("X", VS)],
        or(vec![
            and(vec![not(leftmost.clone()), call("halin_bag_lr", vec![n("e"), n("X")])]),
            and(vec![leftmost, call("halin_bag_r3", vec![n("e"), n("X")])]),
        ]),
    );
    let pair = |c: &str, p: &str| and(vec![call(&format!("halin_bag_{c}"), vec![n("e"), n("C")]), call(&format!("halin_bag_{p}"), vec![n("e"), n("P")])]);
    lib.add(
        "parent_i",
        &[("P", VS), ("C", VS)],
        ex_in(
            "e",
            ED,
            n("E_T"),
            or(vec![pair("r1", "r2"), pair("r2", "r3"), pair("r3", "lr"), pair("l3", "lr"), pair("l1", "l2"), pair("l2", "l3")]),
        ),
    );
    lib.add(
        "parent_nb",
        &[("P", VS), ("C", VS)],
        ex_in(
            "e",
            ED,
            n("E_T"),
            ex_in(
                "f",
                ED,
                n("E_T"),
                and(vec![
                    call("ori_nba", vec![n("e"), n("f")]),
                    call("bag_top", vec![n("e"), n("C")]),
                    call("halin_bag_l1", vec![n("f"), n("P")]),
                ]),
            ),
        ),
    );
    lib.add(
        "parent_p",
        &[("P", VS), ("C", VS)],
        ex_in(
            "e",
            ED,
            n("E_T"),
            ex_in(
                "f",
                ED,
                n("E_T"),
                ex(
                    "y",
                    VX,
                    ex(
                        "x",
                        VX,
                        and(vec![
                            call("tree_arc", vec![n("e"), n("y"), n("x")]),
                            call("child_rplus", vec![n("x")]),
                            call("tail", vec![n("f"), n("y")]),
                            call("bag_top", vec![n("e"), n("C")]),
                            call("halin_bag_r1", vec![n("f"), n("P")]),
                        ]),
                    ),
                ),
            ),
        ),
    );
    lib.add(
        "parent",
        &[("P", VS), ("C", VS)],
        and(vec![
            not(eq(n("P"), n("C"))),
            call("bag", vec![n("P")]),
            call("bag", vec![n("C")]),
            or(vec![
                call("parent_i", vec![n("P"), n("C")]),
                call("parent_nb", vec![n("P"), n("C")]),
                call("parent_p", vec![n("P"), n("C")]),
            ]),
        ]),
    );
    lib.add("leaf_bag", &[("X", VS)], and(vec![call("bag", vec![n("X")]), not(ex("Y", VS, call("parent", vec![n("X"), n("Y")])))]));
    lib.add("root_bag", &[("X", VS)], and(vec![call("bag", vec![n("X")]), not(ex("Y", VS, call("parent", vec![n("Y"), n("X")])))]));
    lib.add(
        "join_bag",
        &[("X", VS)],
        ex("Y", VS, ex("Z", VS, and(vec![not(eq(n("Y"), n("Z"))), call("parent", vec![n("X"), n("Y")]), call("parent", vec![n("X"), n("Z")])]))),
    );
    lib.add(
        "intermediate_bag",
        &[("X", VS)],
        and(vec![ex("Y", VS, call("parent", vec![n("X"), n("Y")])), not(call("join_bag", vec![n("X")]))]),
    );
}

fn kcycle(lib: &mut Library, k: usize) {
    for j in 0..=k.max(1) {
        let body = if j == 0 {
            eq(n("v"), n("w"))
        } else {
            ex_in("P", ES, n("S"), and(vec![call(&format!("card_eq_{j}"), vec![n("P")]), call("path", vec![n("v"), n("w"), n("P")])]))
        };
        lib.add(&format!("reach_{j}"), &[("v", VX), ("w", VX), ("S", ES)], body);
        // Reachable in exactly j steps and no fewer.
        let shorter = (0..j).map(|i| not(call(&format!("reach_{i}"), vec![n("v"), n("w"), n("S")])));
        let body = and(std::iter::once(call(&format!("reach_{j}"), vec![n("v"), n("w"), n("S")])).chain(shorter).collect());
        lib.add(&format!("dist_eq_{j}"), &[("v", VX), ("w", VX), ("S", ES)], body);
    }
    for i in 1..=k {
        lib.add(
            &format!("cycle_level_{i}"),
            &[("S", ES)],
            and(vec![
                call("dir_cycle", vec![Term::inc_v(n("S")), n("S")]),
                all("v", VX, imp(mem(n("v"), Term::inc_v(n("S"))), call(&format!("dist_eq_{i}"), vec![n("c"), n("v"), Term::AllEdges]))),
            ]),
        );
        lib.add(
            &format!("level_{i}"),
            &[("y", VX)],
            mem(n("y"), Term::inc_v(n(&format!("E_C{i}")))),
        );
        ordering(lib, &format!("ori_nb_{i}"), &format!("E_C{i}"), &format!("r{i}"));
    }
    lib.add("level_0", &[("y", VX)], eq(n("y"), n("c")));
    // Closed sentence: tree plus level cycles with roots on the path to r.
    let cs = vars("C", k);
    let rs: Vec<String> = (1..k).map(|i| format!("q{i}")).collect();
    let mut parts = vec![n("T")];
    parts.extend(cs.iter().map(|c| n(c)));
    let mut body = vec![
        call(&format!("part_e_{}", k + 1), parts),
        call("dir_tree", vec![Term::AllVertices, n("T")]),
    ];
    for (i, c) in cs.iter().enumerate() {
        body.push(call(&format!("cycle_level_{}", i + 1), vec![n(c)]));
    }
    for (i, q) in rs.iter().enumerate() {
        body.push(mem(n(q), Term::inc_v(n(&cs[i]))));
        body.push(call(&format!("dist_eq_{}", k - (i + 1)), vec![n("r"), n(q), n("T")]));
    }
    let inner = exists_many(&rs, VX, None, and(body));
    lib.add("kcycle_orientation", &[], ex("T", ES, exists_many(&cs, ES, None, inner)));

    let any_order = |a: &str, b: &str| or((1..=k).map(|i| call(&format!("ori_nb_{i}"), vec![n(a), n(b)])).collect());
    for j in 1..=k {
        let cyc_v = Term::inc_v(n(&format!("E_C{j}")));
        for (side, further) in [("r", any_order("a", "b")), ("l", any_order("b", "a"))] {
            // No other directed path to level j branches off further to this side.
            let other = ex_in(
                "Q",
                ES,
                n("S"),
                ex_in(
                    "u",
                    VX,
                    cyc_v.clone(),
                    and(vec![
                        call("dir_path", vec![n("v"), n("u"), n("Q")]),
                        ex_in("a", ED, n("P"), ex_in("b", ED, n("Q"), further.clone())),
                    ]),
                ),
            );
            lib.add(
                &format!("kc_bd_{side}_{j}"),
                &[("v", VX), ("S", ES), ("w", VX)],
                and(vec![
                    mem(n("w"), cyc_v.clone()),
                    or(vec![
                        eq(n("v"), n("w")),
                        ex_in("P", ES, n("S"), and(vec![call("dir_path", vec![n("v"), n("w"), n("P")]), not(other)])),
                    ]),
                ]),
            );
        }
        lib.add(
            &format!("kc_bd_r_excl_{j}"),
            &[("e", ED), ("y", VX), ("w", VX)],
            ex_in(
                "S",
                ES,
                n("E_T"),
                and(vec![
                    all_in("f", ED, n("E_T"), iff(mem(n("f"), n("S")), not(call("nb_right", vec![n("e"), n("f")])))),
                    call(&format!("kc_bd_r_{j}"), vec![n("y"), n("S"), n("w")]),
                ]),
            ),
        );
        lib.add(
            &format!("carry_bd_r_{j}"),
            &[("e", ED), ("z", VX)],
            ex(
                "y",
                VX,
                ex(
                    "x",
                    VX,
                    and(vec![
                        call("tree_arc", vec![n("e"), n("y"), n("x")]),
                        not(ex("w", VX, call(&format!("kc_bd_l_{j}"), vec![n("x"), n("E_T"), n("w")]))),
                        call(&format!("kc_bd_r_excl_{j}"), vec![n("e"), n("y"), n("z")]),
                    ]),
                ),
            ),
        );
    }
    lib.add("nb_right", &[("e", ED), ("f", ED)], or(vec![eq(n("e"), n("f")), any_order("e", "f")]));
    lib.add(
        "kc_arc_leftmost",
        &[("e", ED)],
        ex(
            "y",
            VX,
            ex(
                "x",
                VX,
                and(vec![
                    call("tree_arc", vec![n("e"), n("y"), n("x")]),
                    all_in(
                        "f",
                        ED,
                        n("E_T"),
                        imp(
                            and(vec![not(eq(n("e"), n("f"))), ex("z", VX, call("arc", vec![n("f"), n("y"), n("z")]))]),
                            any_order("e", "f"),
                        ),
                    ),
                ]),
            ),
        ),
    );
    let bd = |side: &str, j: usize, v: &str| call(&format!("kc_bd_{side}_{j}"), vec![n(v), n("E_T"), n("z")]);
    let excl = |j: usize| call(&format!("kc_bd_r_excl_{j}"), vec![n("e"), n("y"), n("z")]);
    let carry = |j: usize| call(&format!("carry_bd_r_{j}"), vec![n("e"), n("z")]);
    for t in ["r1", "r2", "l1", "l2", "l3", "lr"] {
        let per_level = |i: usize| {
            let mut alts = Vec::new();
            if t != "r1" {
                alts.push(eq(n("z"), n("y")));
            }
            for j in i + 1..=k {
                match t {
                    "r1" | "r2" => alts.extend([bd("l", j, "x"), bd("r", j, "x")]),
                    "l1" => alts.extend([bd("l", j, "y"), excl(j)]),
                    "l2" => alts.extend([bd("l", j, "y"), bd("l", j, "x"), excl(j)]),
                    "l3" => alts.extend([bd("l", j, "y"), bd("l", j, "x"), carry(j)]),
                    _ => alts.extend([bd("l", j, "x"), bd("r", j, "x"), bd("l", j, "y"), carry(j)]),
                }
            }
            and(vec![call(&format!("level_{i}"), vec![n("y")]), all("z", VX, iff(mem(n("z"), n("X")), or(alts)))])
        };
        let mut body = vec![call("tree_arc", vec![n("e"), n("y"), n("x")]), or((0..k).map(per_level).collect())];
        if t.starts_with('l') {
            body.push(not(call("kc_arc_leftmost", vec![n("e")])));
        }
        lib.add(&format!("kc_bag_{t}"), &[("e", ED), ("X", VS)], ex("y", VX, ex("x", VX, and(body))));
    }
}

fn feedback(lib: &mut Library) {
    for (name, anchor, sort, cyc) in [("fb_edge_added", "e", ED, "fund_cyc"), ("fb_vertex_added", "v", VX, "fund_cyc_v")] {
        lib.add(
            name,
            &[(anchor, sort), ("u", VX)],
            ex_in("f", ED, n("E_X"), and(vec![call("lower_end", vec![n("f"), n("u")]), call(cyc, vec![n(anchor), n("f")])])),
        );
    }
    let block_edges = Term::union(n("E_T"), Term::inc_e(Term::diff(n("A"), n("V0"))));
    lib.add(
        "fb_apex_vertex",
        &[("v", VX), ("u", VX)],
        and(vec![
            not(mem(n("u"), n("V0"))),
            ex(
                "A",
                VS,
                and(vec![mem(n("v"), n("A")), mem(n("u"), n("A")), call("conn2", vec![n("A"), block_edges.clone()])]),
            ),
        ]),
    );
    lib.add(
        "fb_apex_edge",
        &[("e", ED), ("u", VX)],
        and(vec![
            not(mem(n("u"), n("V0"))),
            ex(
                "A",
                VS,
                and(vec![
                    mem(n("u"), n("A")),
                    sub(Term::inc_v(Term::single(n("e"))), n("A")),
                    call("conn2", vec![n("A"), block_edges]),
                ]),
            ),
        ]),
    );
}

fn remember(lib: &mut Library, kappa: usize, lambda: usize) {
    let non_tree = Term::diff(Term::AllEdges, n("E_T"));
    for (name, bound, anchor, sort, cyc) in [("vr_le", kappa, "v", VX, "fund_cyc_v"), ("er_le", lambda, "e", ED, "fund_cyc")] {
        for b in 0..=bound {
            let es = vars("f", b + 1);
            let through = and(es.iter().map(|f| call(cyc, vec![n(anchor), n(f)])).collect());
            let body = forall_many(&es, ED, Some(&non_tree), imp(through, not(distinct(&es))));
            let scope = if sort == VX { all(anchor, VX, body) } else { all(anchor, ED, body) };
            lib.add(&format!("{name}_{b}"), &[], scope);
        }
    }
    let added = |cyc: &str, anchor: &str| {
        ex_in("f", ED, non_tree.clone(), and(vec![call("lower_end", vec![n("f"), n("u")]), call(cyc, vec![n(anchor), n("f")])]))
    };
    lib.add(
        "rem_bag_v",
        &[("v", VX), ("X", VS)],
        all("u", VX, iff(mem(n("u"), n("X")), or(vec![eq(n("u"), n("v")), added("fund_cyc_v", "v")]))),
    );
    lib.add(
        "rem_bag_e",
        &[("e", ED), ("X", VS)],
        and(vec![
            mem(n("e"), n("E_T")),
            all("u", VX, iff(mem(n("u"), n("X")), or(vec![inc(n("e"), n("u")), added("fund_cyc", "e")]))),
        ]),
    );
    lib.add(
        "rem_parent",
        &[("P", VS), ("C", VS)],
        ex(
            "v",
            VX,
            ex_in(
                "e",
                ED,
                n("E_T"),
                or(vec![
                    and(vec![
                        call("rem_bag_v", vec![n("v"), n("P")]),
                        call("rem_bag_e", vec![n("e"), n("C")]),
                        call("head", vec![n("e"), n("v")]),
                    ]),
                    and(vec![
                        call("rem_bag_v", vec![n("v"), n("C")]),
                        call("rem_bag_e", vec![n("e"), n("P")]),
                        call("tail", vec![n("e"), n("v")]),
                    ]),
                ]),
            ),
        ),
    );
    lib.add(
        "rem_ori_nb",
        &[("A", VS), ("B", VS)],
        ex_in(
            "a",
            ED,
            n("E_T"),
            ex_in(
                "b",
                ED,
                n("E_T"),
                and(vec![
                    call("ori_nb", vec![n("a"), n("b")]),
                    call("rem_bag_e", vec![n("a"), n("A")]),
                    call("rem_bag_e", vec![n("b"), n("B")]),
                ]),
            ),
        ),
    );
}
