//! MSO formulas: syntax tree, prefix-notation parser and evaluation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::mso::structure::{color_pred, mark_pred, Mask, Structure};
use crate::system::TransitionSystem;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// `edge_a(x, y)`
    Edge(String, String, String),
    /// `color_p(x)`
    Color(String, String),
    /// Membership in a non-color unary predicate (`Left`, `Right`, ...).
    Mark(String, String),
    Eq(String, String),
    /// `x ∈ X`
    In(String, String),
    Init(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
}

/// Value of a variable under an assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Element(usize),
    Set(BTreeSet<usize>),
}

pub type Assignment = HashMap<String, Value>;

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_owned(), Box::new(f))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_owned(), Box::new(f))
    }

    pub fn exists_set(x: &str, f: Formula) -> Formula {
        Formula::ExistsSet(x.to_owned(), Box::new(f))
    }

    pub fn forall_set(x: &str, f: Formula) -> Formula {
        Formula::ForallSet(x.to_owned(), Box::new(f))
    }

    /// Nesting depth of quantifiers of both sorts.
    pub fn quantifier_rank(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Edge(..) | Color(..) | Mark(..) | Eq(..) | In(..) | Init(_) => 0,
            Not(f) => f.quantifier_rank(),
            And(fs) | Or(fs) => fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0),
            Exists(_, f) | Forall(_, f) | ExistsSet(_, f) | ForallSet(_, f) => 1 + f.quantifier_rank(),
        }
    }

    /// Free variables, split into (element, set) variables.
    pub fn free_vars(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut el = BTreeSet::new();
        let mut st = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut el, &mut st);
        (el, st)
    }

    fn collect_free(&self, bound: &mut Vec<String>, el: &mut BTreeSet<String>, st: &mut BTreeSet<String>) {
        use Formula::*;
        let e = |v: &String, el: &mut BTreeSet<String>| {
            if !bound.contains(v) {
                el.insert(v.clone());
            }
        };
        match self {
            True | False => {}
            Edge(_, x, y) | Eq(x, y) => {
                e(x, el);
                e(y, el);
            }
            Color(_, x) | Mark(_, x) | Init(x) => e(x, el),
            In(x, s) => {
                e(x, el);
                if !bound.contains(s) {
                    st.insert(s.clone());
                }
            }
            Not(f) => f.collect_free(bound, el, st),
            And(fs) | Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, el, st)),
            Exists(v, f) | Forall(v, f) | ExistsSet(v, f) | ForallSet(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, el, st);
                bound.pop();
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        let list = |f: &mut fmt::Formatter<'_>, head: &str, fs: &[Formula]| {
            write!(f, "({head}")?;
            for g in fs {
                write!(f, " {g}")?;
            }
            write!(f, ")")
        };
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Edge(a, x, y) => write!(f, "(edge {a} {x} {y})"),
            Color(p, x) => write!(f, "(color {p} {x})"),
            Mark(m, x) => write!(f, "(mark {m} {x})"),
            Eq(x, y) => write!(f, "(eq {x} {y})"),
            In(x, s) => write!(f, "(in {x} {s})"),
            Init(x) => write!(f, "(init {x})"),
            Not(g) => write!(f, "(not {g})"),
            And(fs) => list(f, "and", fs),
            Or(fs) => list(f, "or", fs),
            Exists(v, g) => write!(f, "(exists {v} {g})"),
            Forall(v, g) => write!(f, "(forall {v} {g})"),
            ExistsSet(v, g) => write!(f, "(exists-set {v} {g})"),
            ForallSet(v, g) => write!(f, "(forall-set {v} {g})"),
        }
    }
}

#[derive(Debug)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::Syntax("unexpected end of formula".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err(Error::Syntax("missing `)`".into())),
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read_sexp(tokens, pos)?),
                }
            }
        }
        ")" => Err(Error::Syntax("unexpected `)`".into())),
        _ => Ok(Sexp::Atom(tok.clone())),
    }
}

fn name(s: &Sexp) -> Result<String> {
    match s {
        Sexp::Atom(a) => Ok(a.clone()),
        Sexp::List(_) => Err(Error::Syntax("expected a name, found a list".into())),
    }
}

fn build(s: &Sexp) -> Result<Formula> {
    let items = match s {
        Sexp::Atom(a) if a == "true" => return Ok(Formula::True),
        Sexp::Atom(a) if a == "false" => return Ok(Formula::False),
        Sexp::Atom(a) => return Err(Error::Syntax(format!("unexpected atom `{a}`"))),
        Sexp::List(items) => items,
    };
    let head = items.first().map(name).transpose()?.ok_or_else(|| Error::Syntax("empty list".into()))?;
    let args = &items[1..];
    let arity = |k: usize| {
        if args.len() == k {
            Ok(())
        } else {
            Err(Error::Syntax(format!("`{head}` takes {k} arguments, got {}", args.len())))
        }
    };
    let quant = |mk: fn(String, Box<Formula>) -> Formula| -> Result<Formula> {
        arity(2)?;
        Ok(mk(name(&args[0])?, Box::new(build(&args[1])?)))
    };
    Ok(match head.as_str() {
        "edge" => {
            arity(3)?;
            Formula::Edge(name(&args[0])?, name(&args[1])?, name(&args[2])?)
        }
        "color" => {
            arity(2)?;
            Formula::Color(name(&args[0])?, name(&args[1])?)
        }
        "mark" => {
            arity(2)?;
            Formula::Mark(name(&args[0])?, name(&args[1])?)
        }
        "eq" | "=" => {
            arity(2)?;
            Formula::Eq(name(&args[0])?, name(&args[1])?)
        }
        "in" => {
            arity(2)?;
            Formula::In(name(&args[0])?, name(&args[1])?)
        }
        "init" => {
            arity(1)?;
            Formula::Init(name(&args[0])?)
        }
        "not" => {
            arity(1)?;
            Formula::not(build(&args[0])?)
        }
        "and" => Formula::And(args.iter().map(build).collect::<Result<_>>()?),
        "or" => Formula::Or(args.iter().map(build).collect::<Result<_>>()?),
        "exists" => quant(Formula::Exists)?,
        "forall" => quant(Formula::Forall)?,
        "exists-set" => quant(Formula::ExistsSet)?,
        "forall-set" => quant(Formula::ForallSet)?,
        other => return Err(Error::Syntax(format!("unknown operator `{other}`"))),
    })
}

/// Parses a formula in prefix notation, e.g.
/// `(exists x (and (init x) (color p x)))`.
///
/// ```
/// use bisimso_core::format::parse_system;
/// use bisimso_core::mso::{evaluate, parse_formula, Assignment};
///
/// let f = parse_formula("(exists x (and (init x) (forall y (or (not (edge a x y)) (color p y)))))").unwrap();
/// let s = parse_system(r#"{"states":["s","t"],"initial":"s","colors":{"t":"p"},
///     "edges":[{"from":"s","label":"a","to":"t"}]}"#).unwrap();
/// assert!(evaluate(&f, &s, &Assignment::new()).unwrap());
/// ```
pub fn parse_formula(text: &str) -> Result<Formula> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let s = read_sexp(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::Syntax(format!("trailing input after formula: `{}`", tokens[pos..].join(" "))));
    }
    build(&s)
}

#[derive(Clone, Copy)]
enum Val {
    El(usize),
    Set(Mask),
}

struct Env<'a> {
    st: &'a Structure,
    vars: Vec<(&'a str, Val)>,
}

impl<'a> Env<'a> {
    fn lookup(&self, v: &str) -> Result<Val> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| *n == v)
            .map(|(_, x)| *x)
            .ok_or_else(|| Error::UnboundVariable(v.to_owned()))
    }

    fn el(&self, v: &str) -> Result<usize> {
        match self.lookup(v)? {
            Val::El(e) => Ok(e),
            Val::Set(_) => Err(Error::UnboundVariable(format!("`{v}` is a set variable used as an element"))),
        }
    }

    fn set(&self, v: &str) -> Result<Mask> {
        match self.lookup(v)? {
            Val::Set(s) => Ok(s),
            Val::El(_) => Err(Error::UnboundVariable(format!("`{v}` is an element variable used as a set"))),
        }
    }

    fn eval(&mut self, f: &'a Formula) -> Result<bool> {
        use Formula::*;
        Ok(match f {
            True => true,
            False => false,
            Edge(a, x, y) => self.st.has_edge(a, self.el(x)?, self.el(y)?),
            Color(p, x) => self.st.holds(&color_pred(p), self.el(x)?),
            Mark(m, x) => self.st.holds(&mark_pred(m), self.el(x)?),
            Eq(x, y) => self.el(x)? == self.el(y)?,
            In(x, s) => self.set(s)? >> self.el(x)? & 1 == 1,
            Init(x) => Some(self.el(x)?) == self.st.init(),
            Not(g) => !self.eval(g)?,
            And(fs) => {
                for g in fs {
                    if !self.eval(g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Or(fs) => {
                for g in fs {
                    if self.eval(g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Exists(v, g) | Forall(v, g) => {
                let want = matches!(f, Exists(..));
                for e in 0..self.st.len() {
                    self.vars.push((v, Val::El(e)));
                    let r = self.eval(g);
                    self.vars.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                !want
            }
            ExistsSet(v, g) | ForallSet(v, g) => {
                let want = matches!(f, ExistsSet(..));
                let full = self.st.full_mask();
                let mut x: Mask = 0;
                loop {
                    self.vars.push((v, Val::Set(x)));
                    let r = self.eval(g);
                    self.vars.pop();
                    if r? == want {
                        return Ok(want);
                    }
                    if x == full {
                        break;
                    }
                    x += 1;
                }
                !want
            }
        })
    }
}

/// Truth of `f` in structure `st` under `assignment`.
pub fn evaluate_structure(f: &Formula, st: &Structure, assignment: &Assignment) -> Result<bool> {
    let mut vars = Vec::new();
    for (k, v) in assignment {
        let val = match v {
            Value::Element(e) => {
                if *e >= st.len() {
                    return Err(Error::Invalid(format!("`{k}` is assigned element {e}, outside the universe")));
                }
                Val::El(*e)
            }
            Value::Set(s) => {
                let mut m: Mask = 0;
                for &e in s {
                    if e >= st.len() {
                        return Err(Error::Invalid(format!("`{k}` contains element {e}, outside the universe")));
                    }
                    m |= 1 << e;
                }
                Val::Set(m)
            }
        };
        vars.push((k.as_str(), val));
    }
    Env { st, vars }.eval(f)
}

/// Truth of `f` in `s` under `assignment`; `init(x)` holds iff `x` is the
/// initial state. Colors are `color_p`, marks are `mark_m`.
pub fn evaluate(f: &Formula, s: &TransitionSystem, assignment: &Assignment) -> Result<bool> {
    evaluate_structure(f, &Structure::from_system(s)?, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::SystemBuilder;

    fn two_states() -> TransitionSystem {
        let mut b = SystemBuilder::new();
        let s0 = b.state("s0");
        let s1 = b.state("s1");
        b.edge(s0, "a", s1);
        b.set_color(s1, Some("p"));
        b.build(s0)
    }

    fn self_loop() -> TransitionSystem {
        let mut b = SystemBuilder::new();
        let s0 = b.state("s0");
        b.edge(s0, "a", s0);
        b.build(s0)
    }

    fn holds(text: &str, s: &TransitionSystem) -> bool {
        evaluate(&parse_formula(text).unwrap(), s, &Assignment::new()).unwrap()
    }

    #[test]
    fn trivial_sentences() {
        assert!(holds("(exists x (init x))", &two_states()));
        assert!(holds("(exists-set X (forall x (in x X)))", &two_states()));
        assert!(!holds("(exists x (exists y (and (edge a x y) (not (eq x y)))))", &self_loop()));
        assert!(holds("(exists x (exists y (and (edge a x y) (color p y))))", &two_states()));
    }

    #[test]
    fn set_quantifier_enumerates_all_subsets() {
        let f = "(forall-set X (or (exists x (in x X)) (forall x (not (in x X)))))";
        assert!(holds(f, &two_states()));
        let g = "(exists-set X (and (exists x (and (init x) (in x X))) (exists y (and (color p y) (not (in y X))))))";
        assert!(holds(g, &two_states()));
    }

    #[test]
    fn rank_counts_both_sorts() {
        let f = parse_formula("(exists x (exists-set X (and (in x X) (forall y (eq x y)))))").unwrap();
        assert_eq!(f.quantifier_rank(), 3);
    }

    #[test]
    fn display_round_trips() {
        let text = "(forall-set X (or (exists x (and (init x) (in x X))) (not (mark Left y)) true))";
        let f = parse_formula(text).unwrap();
        assert_eq!(f.to_string(), text);
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn unbound_variable() {
        let f = parse_formula("(init x)").unwrap();
        assert!(matches!(evaluate(&f, &self_loop(), &Assignment::new()), Err(Error::UnboundVariable(_))));
        let mut a = Assignment::new();
        a.insert("x".into(), Value::Element(0));
        assert!(evaluate(&f, &self_loop(), &a).unwrap());
        assert_eq!(f.free_vars().0.len(), 1);
    }

    #[test]
    fn syntax_errors() {
        for bad in ["(exists x)", "(and (init x)", "(foo x)", "(init x) extra", ")"] {
            assert!(matches!(parse_formula(bad), Err(Error::Syntax(_))), "{bad}");
        }
    }
}
