//! Sentence schemata that run a finite automaton over the typed bags of a
//! Halin decomposition.
//!
//! A run is guessed as edge sets `C_i_T` (class `i`, bag type `T`): tree arc
//! `e` is in `C_i_T` when the bag of type `T` on `e` is in state `i`. The
//! schemata below constrain leaves, parent/child steps, joins and the root.
//! They grow as `2^(classes * types * |E_T|)` under exhaustive evaluation, so
//! only the single-class and two-class forms are practical to run, and then
//! only with the class sets fixed as structure constants.

use super::build::*;
use super::{Formula, Sort, Term};

/// Bag type suffixes in the order the library names them.
pub const TYPES: [&str; 7] = ["r1", "r2", "r3", "l1", "l2", "l3", "lr"];

/// Name of the class set for state `i` and bag type `t`.
pub fn class_set(i: usize, t: &str) -> String {
    format!("C_{i}_{}", t.to_uppercase())
}

fn bag_of(t: &str, e: &str, x: &str) -> Formula {
    call(&format!("halin_bag_{t}"), vec![n(e), n(x)])
}

fn in_class(states: &[usize], t: &str, e: &str) -> Formula {
    or(states.iter().map(|&i| mem(n(e), n(&class_set(i, t)))).collect())
}

/// Every present bag carries exactly one state.
pub fn phi_partition(classes: usize) -> Formula {
    let per_type = TYPES.iter().map(|t| {
        let one = (0..classes)
            .map(|i| {
                let rest = (0..classes).filter(|&j| j != i).map(|j| not(mem(n("e"), n(&class_set(j, t))))).collect();
                and(vec![mem(n("e"), n(&class_set(i, t))), and(rest)])
            })
            .collect();
        imp(ex("X", Sort::VertexSet, bag_of(t, "e", "X")), or(one))
    });
    all_in("e", Sort::Edge, n("E_T"), and(per_type.collect()))
}

/// Leaf bags start in one of `initial`.
pub fn phi_leaf(initial: &[usize]) -> Formula {
    let per_type = TYPES
        .iter()
        .map(|t| imp(and(vec![bag_of(t, "e", "X"), call("leaf_bag", vec![n("X")])]), in_class(initial, t, "e")))
        .collect();
    all_in("e", Sort::Edge, n("E_T"), all("X", Sort::VertexSet, and(per_type)))
}

/// The root bag ends in one of `accepting`.
pub fn phi_root(accepting: &[usize]) -> Formula {
    let per_type = TYPES
        .iter()
        .map(|t| imp(and(vec![bag_of(t, "e", "X"), call("root_bag", vec![n("X")])]), in_class(accepting, t, "e")))
        .collect();
    all_in("e", Sort::Edge, n("E_T"), all("X", Sort::VertexSet, and(per_type)))
}

/// A parent with one child moves from child state `i` to parent state `j`
/// only along a listed `(i, j)` step.
pub fn phi_intermediate(steps: &[(usize, usize)]) -> Formula {
    let mut cases = Vec::new();
    for tp in TYPES {
        for tc in TYPES {
            let moves = steps
                .iter()
                .map(|&(i, j)| and(vec![mem(n("c"), n(&class_set(i, tc))), mem(n("p"), n(&class_set(j, tp)))]))
                .collect();
            cases.push(imp(and(vec![bag_of(tp, "p", "P"), bag_of(tc, "c", "C")]), or(moves)));
        }
    }
    let guard = and(vec![call("intermediate_bag", vec![n("P")]), call("parent", vec![n("P"), n("C")])]);
    for_bags(["P", "C"], ["p", "c"], imp(guard, and(cases)))
}

/// A join with children in states `i`, `k` reaches `j` only along a listed
/// `(i, k, j)` step.
pub fn phi_join(steps: &[(usize, usize, usize)]) -> Formula {
    let mut cases = Vec::new();
    for tp in TYPES {
        for ta in TYPES {
            for tb in TYPES {
                let moves = steps
                    .iter()
                    .map(|&(i, k, j)| {
                        and(vec![
                            mem(n("a"), n(&class_set(i, ta))),
                            mem(n("b"), n(&class_set(k, tb))),
                            mem(n("p"), n(&class_set(j, tp))),
                        ])
                    })
                    .collect();
                cases.push(imp(and(vec![bag_of(tp, "p", "P"), bag_of(ta, "a", "A"), bag_of(tb, "b", "B")]), or(moves)));
            }
        }
    }
    let guard = and(vec![
        not(eq(n("A"), n("B"))),
        call("parent", vec![n("P"), n("A")]),
        call("parent", vec![n("P"), n("B")]),
    ]);
    let inner = all("A", Sort::VertexSet, all("B", Sort::VertexSet, imp(guard, and(cases))));
    let inner = all_in("a", Sort::Edge, n("E_T"), all_in("b", Sort::Edge, n("E_T"), inner));
    all_in("p", Sort::Edge, n("E_T"), all("P", Sort::VertexSet, imp(call("join_bag", vec![n("P")]), inner)))
}

fn for_bags(sets: [&str; 2], arcs: [&str; 2], body: Formula) -> Formula {
    let body = all(sets[1], Sort::VertexSet, body);
    let body = all(sets[0], Sort::VertexSet, body);
    let body = all_in(arcs[1], Sort::Edge, n("E_T"), body);
    all_in(arcs[0], Sort::Edge, n("E_T"), body)
}

/// Full acceptance sentence: guess the class sets, then check the run.
pub fn phi_run(
    classes: usize,
    initial: &[usize],
    steps: &[(usize, usize)],
    joins: &[(usize, usize, usize)],
    accepting: &[usize],
) -> Formula {
    let body = and(vec![
        phi_partition(classes),
        phi_leaf(initial),
        phi_intermediate(steps),
        phi_join(joins),
        phi_root(accepting),
    ]);
    let mut out = body;
    for i in (0..classes).rev() {
        for t in TYPES.iter().rev() {
            out = ex_in(&class_set(i, t), Sort::EdgeSet, n("E_T"), out);
        }
    }
    out
}

/// Names of the class sets a schema with `classes` states refers to.
pub fn class_names(classes: usize) -> Vec<String> {
    (0..classes).flat_map(|i| TYPES.iter().map(move |t| class_set(i, t))).collect()
}

/// Term for the class set, for callers building their own constraints.
pub fn class_term(i: usize, t: &str) -> Term {
    n(&class_set(i, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::halin4;
    use crate::mso::cross_check::halin_structure;
    use crate::mso::{free_names, Evaluator, Library, LibraryParams, Value};

    #[test]
    fn run_sentence_is_closed_over_structure_constants() {
        let f = phi_run(2, &[0], &[(0, 1), (1, 0)], &[(0, 0, 0)], &[1]);
        let free = free_names(&f);
        assert_eq!(free.into_iter().collect::<Vec<_>>(), vec!["E_T".to_string()]);
        let g = phi_leaf(&[0]);
        assert!(free_names(&g).contains("C_0_R1"));
    }

    #[test]
    fn single_state_run_on_halin4() {
        let h = halin4();
        let mut s = halin_structure(&h).unwrap();
        let tree = s.constants["E_T"];
        for name in class_names(1) {
            s.constants.insert(name, tree);
        }
        let lib = Library::standard(LibraryParams::default());
        let mut ev = Evaluator::new(&s, &lib);
        let env = Default::default();
        assert!(ev.eval(&phi_leaf(&[0]), &env).unwrap());
        assert!(ev.eval(&phi_root(&[0]), &env).unwrap());
        assert!(!ev.eval(&phi_root(&[]), &env).unwrap());
        assert!(ev.eval(&phi_partition(1), &env).unwrap());
        // Emptying one class breaks the partition for the arcs that carry R1.
        s.constants.insert(class_set(0, "r1"), Value::EdgeSet(0));
        let mut ev = Evaluator::new(&s, &lib);
        assert!(!ev.eval(&phi_partition(1), &env).unwrap());
    }
}
