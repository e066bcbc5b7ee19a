//! S-expression syntax for formulas.
//!
//! ```text
//! formula := true | false
//!          | (= t t) | (inc t t) | (in t t) | (sub t t)
//!          | (not f) | (and f*) | (or f*) | (-> f f) | (<-> f f)
//!          | (exists (x sort [t]) f) | (forall (x sort [t]) f)
//!          | (name t*)                      ; library predicate
//! term    := name | V | E | (empty-v) | (empty-e)
//!          | (union t t) | (inter t t) | (diff t t)
//!          | (incv t) | (ince t) | (set t)
//! sort    := vertex | edge | vset | eset
//! ```
//!
//! `;` starts a comment running to the end of the line.

use thiserror::Error;

use super::{Binder, Formula, Sort, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
enum Sexp {
    Atom(String, (usize, usize)),
    List(Vec<Sexp>, (usize, usize)),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn err<T>(pos: (usize, usize), message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line: pos.0, column: pos.1, message: message.into() })
}

fn read(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, (usize, usize))> = vec![(Vec::new(), (1, 1))];
    let mut atom = String::new();
    let mut atom_pos = (1, 1);
    let (mut line, mut col) = (1, 0);
    let mut comment = false;
    let flush = |atom: &mut String, pos: (usize, usize), stack: &mut Vec<(Vec<Sexp>, (usize, usize))>| {
        if !atom.is_empty() {
            stack.last_mut().expect("outer frame").0.push(Sexp::Atom(std::mem::take(atom), pos));
        }
    };
    for ch in text.chars() {
        if ch == '\n' {
            line += 1;
            col = 0;
            comment = false;
            flush(&mut atom, atom_pos, &mut stack);
            continue;
        }
        col += 1;
        if comment {
            continue;
        }
        match ch {
            ';' => {
                flush(&mut atom, atom_pos, &mut stack);
                comment = true;
            }
            '(' => {
                flush(&mut atom, atom_pos, &mut stack);
                stack.push((Vec::new(), (line, col)));
            }
            ')' => {
                flush(&mut atom, atom_pos, &mut stack);
                if stack.len() == 1 {
                    return err((line, col), "unbalanced ')'");
                }
                let (items, pos) = stack.pop().expect("checked");
                stack.last_mut().expect("outer frame").0.push(Sexp::List(items, pos));
            }
            c if c.is_whitespace() => flush(&mut atom, atom_pos, &mut stack),
            c => {
                if atom.is_empty() {
                    atom_pos = (line, col);
                }
                atom.push(c);
            }
        }
    }
    flush(&mut atom, atom_pos, &mut stack);
    if stack.len() > 1 {
        let pos = stack.last().expect("nonempty").1;
        return err(pos, "unclosed '('");
    }
    Ok(stack.pop().expect("outer frame").0)
}

fn sort(s: &Sexp) -> Result<Sort, ParseError> {
    match s {
        Sexp::Atom(a, p) => match a.as_str() {
            "vertex" => Ok(Sort::Vertex),
            "edge" => Ok(Sort::Edge),
            "vset" => Ok(Sort::VertexSet),
            "eset" => Ok(Sort::EdgeSet),
            _ => err(*p, format!("unknown sort {a}")),
        },
        Sexp::List(_, p) => err(*p, "expected a sort"),
    }
}

fn term(s: &Sexp) -> Result<Term, ParseError> {
    match s {
        Sexp::Atom(a, _) => Ok(match a.as_str() {
            "V" => Term::AllVertices,
            "E" => Term::AllEdges,
            _ => Term::Name(a.clone()),
        }),
        Sexp::List(items, p) => {
            let Some(Sexp::Atom(head, _)) = items.first() else {
                return err(*p, "expected a set operator");
            };
            let args = &items[1..];
            let want = |k: usize| if args.len() == k { Ok(()) } else { err(*p, format!("{head} takes {k} arguments")) };
            Ok(match head.as_str() {
                "empty-v" => {
                    want(0)?;
                    Term::NoVertices
                }
                "empty-e" => {
                    want(0)?;
                    Term::NoEdges
                }
                "union" | "inter" | "diff" => {
                    want(2)?;
                    let (a, b) = (term(&args[0])?, term(&args[1])?);
                    match head.as_str() {
                        "union" => Term::union(a, b),
                        "inter" => Term::inter(a, b),
                        _ => Term::diff(a, b),
                    }
                }
                "incv" | "ince" | "set" => {
                    want(1)?;
                    let a = term(&args[0])?;
                    match head.as_str() {
                        "incv" => Term::inc_v(a),
                        "ince" => Term::inc_e(a),
                        _ => Term::single(a),
                    }
                }
                _ => return err(*p, format!("unknown set operator {head}")),
            })
        }
    }
}

fn formula(s: &Sexp) -> Result<Formula, ParseError> {
    let (items, p) = match s {
        Sexp::Atom(a, p) => {
            return match a.as_str() {
                "true" => Ok(Formula::Const(true)),
                "false" => Ok(Formula::Const(false)),
                _ => err(*p, format!("expected a formula, found {a}")),
            }
        }
        Sexp::List(items, p) => (items, *p),
    };
    let Some(Sexp::Atom(head, _)) = items.first() else {
        return err(p, "expected an operator");
    };
    let args = &items[1..];
    let want = |k: usize| if args.len() == k { Ok(()) } else { err(p, format!("{head} takes {k} arguments")) };
    let two_terms = || -> Result<(Term, Term), ParseError> {
        want(2)?;
        Ok((term(&args[0])?, term(&args[1])?))
    };
    let two_formulas = || -> Result<(Box<Formula>, Box<Formula>), ParseError> {
        want(2)?;
        Ok((Box::new(formula(&args[0])?), Box::new(formula(&args[1])?)))
    };
    Ok(match head.as_str() {
        "=" => {
            let (a, b) = two_terms()?;
            Formula::Eq(a, b)
        }
        "inc" => {
            let (a, b) = two_terms()?;
            Formula::Inc(a, b)
        }
        "in" => {
            let (a, b) = two_terms()?;
            Formula::Mem(a, b)
        }
        "sub" => {
            let (a, b) = two_terms()?;
            Formula::Subset(a, b)
        }
        "not" => {
            want(1)?;
            Formula::Not(Box::new(formula(&args[0])?))
        }
        "and" | "or" => {
            let gs = args.iter().map(formula).collect::<Result<Vec<_>, _>>()?;
            if head == "and" {
                Formula::And(gs)
            } else {
                Formula::Or(gs)
            }
        }
        "->" => {
            let (a, b) = two_formulas()?;
            Formula::Implies(a, b)
        }
        "<->" => {
            let (a, b) = two_formulas()?;
            Formula::Iff(a, b)
        }
        "exists" | "forall" => {
            want(2)?;
            let Sexp::List(spec, sp) = &args[0] else {
                return err(args[0].pos(), "expected (var sort [range])");
            };
            let (var, sort, within) = match spec.as_slice() {
                [Sexp::Atom(v, _), s] => (v.clone(), sort(s)?, None),
                [Sexp::Atom(v, _), s, t] => (v.clone(), sort(s)?, Some(term(t)?)),
                _ => return err(*sp, "expected (var sort [range])"),
            };
            let body = Box::new(formula(&args[1])?);
            let b = Binder { var, sort, within };
            if head == "exists" {
                Formula::Exists(b, body)
            } else {
                Formula::Forall(b, body)
            }
        }
        name => Formula::Call(name.to_string(), args.iter().map(term).collect::<Result<Vec<_>, _>>()?),
    })
}

/// Parse exactly one formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let items = read(text)?;
    match items.as_slice() {
        [one] => formula(one),
        [] => err((1, 1), "empty input"),
        [_, second, ..] => err(second.pos(), "trailing input after the formula"),
    }
}
