//! Witness terms: the syntax of morphisms in the generated subcategory.
//!
//! A term names a morphism built from generators and the structural maps
//! by composition, product, coproduct and `dom`. Terms are certificates;
//! equality of morphisms is always decided on evaluated graphs.

mod parse;

pub use parse::is_valid_name;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::finrel::{
    compose, coproduct_m, dom_m, product_m, structural, Carriers, Element, FinrelError, ObjExpr, SearchProblem,
    Structural,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("ill-typed term `{subterm}`: {reason}")]
    IllTyped { subterm: String, reason: String },
    #[error("problem `{0}` may only appear under dom(...)")]
    ProblemOutsideDom(String),
    #[error("generator `{0}` is not single-valued")]
    NotSingleValued(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("name `{0}` is already bound")]
    DuplicateName(String),
    #[error(transparent)]
    Finrel(#[from] FinrelError),
}

pub type Result<T, E = TermError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WitnessTerm {
    Gen(String),
    Id(ObjExpr),
    /// `Comp(a, b)` is `a ∘ b`: apply `b` first.
    Comp(Arc<WitnessTerm>, Arc<WitnessTerm>),
    Prod(Arc<WitnessTerm>, Arc<WitnessTerm>),
    Coprod(Arc<WitnessTerm>, Arc<WitnessTerm>),
    Diag(ObjExpr),
    Proj1(ObjExpr, ObjExpr),
    Proj2(ObjExpr, ObjExpr),
    Inj1(ObjExpr, ObjExpr),
    Inj2(ObjExpr, ObjExpr),
    Codiag(ObjExpr),
    DomOf(Arc<WitnessTerm>),
    Const(ObjExpr, ObjExpr, Element),
    Assoc { a: ObjExpr, b: ObjExpr, c: ObjExpr, inverse: bool },
    Comm(ObjExpr, ObjExpr),
    Distrib { a: ObjExpr, b: ObjExpr, c: ObjExpr, inverse: bool },
    /// The connectedness morphism `c_{A,B}`.
    Conn(ObjExpr, ObjExpr),
}

impl Serialize for WitnessTerm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Short constructors.
impl WitnessTerm {
    pub fn gen(name: impl Into<String>) -> Self {
        WitnessTerm::Gen(name.into())
    }
    pub fn comp(a: WitnessTerm, b: WitnessTerm) -> Self {
        WitnessTerm::Comp(Arc::new(a), Arc::new(b))
    }
    /// `ts[0] ∘ ts[1] ∘ …`, right-nested.
    pub fn chain(ts: impl IntoIterator<Item = WitnessTerm>) -> Self {
        let mut v: Vec<_> = ts.into_iter().collect();
        let mut acc = v.pop().expect("chain needs at least one term");
        while let Some(t) = v.pop() {
            acc = WitnessTerm::comp(t, acc);
        }
        acc
    }
    pub fn prod(a: WitnessTerm, b: WitnessTerm) -> Self {
        WitnessTerm::Prod(Arc::new(a), Arc::new(b))
    }
    pub fn coprod(a: WitnessTerm, b: WitnessTerm) -> Self {
        WitnessTerm::Coprod(Arc::new(a), Arc::new(b))
    }
    pub fn dom(t: WitnessTerm) -> Self {
        WitnessTerm::DomOf(Arc::new(t))
    }
    pub fn assoc(a: &ObjExpr, b: &ObjExpr, c: &ObjExpr, inverse: bool) -> Self {
        WitnessTerm::Assoc { a: a.clone(), b: b.clone(), c: c.clone(), inverse }
    }
    pub fn distr(a: &ObjExpr, b: &ObjExpr, c: &ObjExpr, inverse: bool) -> Self {
        WitnessTerm::Distrib { a: a.clone(), b: b.clone(), c: c.clone(), inverse }
    }

    pub fn from_structural(s: &Structural) -> Self {
        use Structural as S;
        use WitnessTerm as T;
        match s.clone() {
            S::Id(a) => T::Id(a),
            S::Diag(a) => T::Diag(a),
            S::Proj1(a, b) => T::Proj1(a, b),
            S::Proj2(a, b) => T::Proj2(a, b),
            S::Inj1(a, b) => T::Inj1(a, b),
            S::Inj2(a, b) => T::Inj2(a, b),
            S::Codiag(a) => T::Codiag(a),
            S::Assoc { a, b, c, inverse } => T::Assoc { a, b, c, inverse },
            S::Comm(a, b) => T::Comm(a, b),
            S::Distrib { a, b, c, inverse } => T::Distrib { a, b, c, inverse },
            S::Const { src, dst, value } => T::Const(src, dst, value),
            S::Conn(a, b) => T::Conn(a, b),
        }
    }

    /// The structural morphism a leaf denotes, if it is one.
    pub fn as_structural(&self) -> Option<Structural> {
        use Structural as S;
        use WitnessTerm as T;
        Some(match self.clone() {
            T::Id(a) => S::Id(a),
            T::Diag(a) => S::Diag(a),
            T::Proj1(a, b) => S::Proj1(a, b),
            T::Proj2(a, b) => S::Proj2(a, b),
            T::Inj1(a, b) => S::Inj1(a, b),
            T::Inj2(a, b) => S::Inj2(a, b),
            T::Codiag(a) => S::Codiag(a),
            T::Assoc { a, b, c, inverse } => S::Assoc { a, b, c, inverse },
            T::Comm(a, b) => S::Comm(a, b),
            T::Distrib { a, b, c, inverse } => S::Distrib { a, b, c, inverse },
            T::Const(src, dst, value) => S::Const { src, dst, value },
            T::Conn(a, b) => S::Conn(a, b),
            T::Gen(_) | T::Comp(..) | T::Prod(..) | T::Coprod(..) | T::DomOf(_) => return None,
        })
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        use WitnessTerm as T;
        match self {
            T::Comp(a, b) | T::Prod(a, b) | T::Coprod(a, b) => 1 + a.size() + b.size(),
            T::DomOf(a) => 1 + a.size(),
            _ => 1,
        }
    }

    /// Generator names occurring in the term, sorted and deduplicated.
    pub fn generators(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_gens(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_gens<'a>(&'a self, out: &mut Vec<&'a str>) {
        use WitnessTerm as T;
        match self {
            T::Gen(n) => out.push(n),
            T::Comp(a, b) | T::Prod(a, b) | T::Coprod(a, b) => {
                a.collect_gens(out);
                b.collect_gens(out);
            }
            T::DomOf(a) => a.collect_gens(out),
            _ => {}
        }
    }

    fn objects(&self) -> Vec<&ObjExpr> {
        use WitnessTerm as T;
        match self {
            T::Id(a) | T::Diag(a) | T::Codiag(a) => vec![a],
            T::Proj1(a, b) | T::Proj2(a, b) | T::Inj1(a, b) | T::Inj2(a, b) | T::Comm(a, b) | T::Conn(a, b) => {
                vec![a, b]
            }
            T::Const(a, b, _) => vec![a, b],
            T::Assoc { a, b, c, .. } | T::Distrib { a, b, c, .. } => vec![a, b, c],
            T::Gen(_) | T::Comp(..) | T::Prod(..) | T::Coprod(..) | T::DomOf(_) => vec![],
        }
    }
}

impl fmt::Display for WitnessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use WitnessTerm as T;
        let inv = |i: &bool| if *i { ";inv" } else { "" };
        match self {
            T::Gen(n) => write!(f, "gen:{n}"),
            T::Id(a) => write!(f, "id[{a}]"),
            T::Comp(a, b) => write!(f, "({a} . {b})"),
            T::Prod(a, b) => write!(f, "({a} * {b})"),
            T::Coprod(a, b) => write!(f, "({a} + {b})"),
            T::Diag(a) => write!(f, "delta[{a}]"),
            T::Proj1(a, b) => write!(f, "pi1[{a},{b}]"),
            T::Proj2(a, b) => write!(f, "pi2[{a},{b}]"),
            T::Inj1(a, b) => write!(f, "in1[{a},{b}]"),
            T::Inj2(a, b) => write!(f, "in2[{a},{b}]"),
            T::Codiag(a) => write!(f, "nabla[{a}]"),
            T::DomOf(a) => write!(f, "dom({a})"),
            T::Const(a, b, e) => write!(f, "const[{a}->{b}:{e}]"),
            T::Assoc { a, b, c, inverse } => write!(f, "assoc[{a},{b},{c}{}]", inv(inverse)),
            T::Comm(a, b) => write!(f, "comm[{a},{b}]"),
            T::Distrib { a, b, c, inverse } => write!(f, "distr[{a},{b},{c}{}]", inv(inverse)),
            T::Conn(a, b) => write!(f, "conn[{a}->{b}]"),
        }
    }
}

/// Parses a term without resolving names.
pub fn parse_term_syntax(text: &str) -> Result<WitnessTerm> {
    parse::complete(text, |p| p.term())
}

/// Parses a term and checks every generator and atom name against `env`.
pub fn parse_term(text: &str, env: &Env) -> Result<WitnessTerm> {
    let t = parse_term_syntax(text)?;
    env.check_names(&t)?;
    Ok(t)
}

pub fn parse_obj(text: &str) -> Result<ObjExpr> {
    parse::complete(text, |p| p.obj())
}

pub fn parse_elem(text: &str) -> Result<Element> {
    parse::complete(text, |p| p.elem())
}

/// Carriers plus the named morphisms terms may refer to.
///
/// Generators are single-valued and usable anywhere; problems are arbitrary
/// relations usable only under `dom(...)`. A name resolves to a generator
/// first.
#[derive(Debug, Clone)]
pub struct Env {
    pub carriers: Carriers,
    generators: BTreeMap<String, SearchProblem>,
    problems: BTreeMap<String, SearchProblem>,
}

impl Env {
    pub fn new(carriers: Carriers) -> Self {
        Env { carriers, generators: BTreeMap::new(), problems: BTreeMap::new() }
    }

    fn check_fresh(&self, name: &str) -> Result<()> {
        if !is_valid_name(name) {
            return Err(TermError::InvalidName(name.to_string()));
        }
        if self.generators.contains_key(name) || self.problems.contains_key(name) {
            return Err(TermError::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    pub fn add_generator(&mut self, name: impl Into<String>, m: SearchProblem) -> Result<()> {
        let name = name.into();
        self.check_fresh(&name)?;
        if !m.is_single_valued() {
            return Err(TermError::NotSingleValued(name));
        }
        self.carriers.check_obj(m.src())?;
        self.carriers.check_obj(m.dst())?;
        self.generators.insert(name, m);
        Ok(())
    }

    pub fn add_problem(&mut self, name: impl Into<String>, p: SearchProblem) -> Result<()> {
        let name = name.into();
        self.check_fresh(&name)?;
        self.carriers.check_obj(p.src())?;
        self.carriers.check_obj(p.dst())?;
        self.problems.insert(name, p);
        Ok(())
    }

    /// Registers a derived problem, keeping an existing binding with the same
    /// graph and rejecting a conflicting one.
    pub fn ensure_problem(&mut self, name: &str, p: SearchProblem) -> Result<()> {
        match self.problems.get(name) {
            Some(q) if *q == p => Ok(()),
            Some(_) => Err(TermError::DuplicateName(name.to_string())),
            None => self.add_problem(name, p),
        }
    }

    pub fn generator(&self, name: &str) -> Option<&SearchProblem> {
        self.generators.get(name)
    }

    pub fn problem(&self, name: &str) -> Option<&SearchProblem> {
        self.problems.get(name)
    }

    pub fn generators(&self) -> &BTreeMap<String, SearchProblem> {
        &self.generators
    }

    pub fn problems(&self) -> &BTreeMap<String, SearchProblem> {
        &self.problems
    }

    fn lookup(&self, name: &str, under_dom: bool) -> Result<&SearchProblem> {
        if let Some(g) = self.generators.get(name) {
            return Ok(g);
        }
        match self.problems.get(name) {
            Some(p) if under_dom => Ok(p),
            Some(_) => Err(TermError::ProblemOutsideDom(name.to_string())),
            None => Err(TermError::UnknownGenerator(name.to_string())),
        }
    }

    fn check_names(&self, t: &WitnessTerm) -> Result<()> {
        use WitnessTerm as T;
        match t {
            T::Gen(n) if self.generators.contains_key(n) || self.problems.contains_key(n) => Ok(()),
            T::Gen(n) => Err(TermError::UnknownGenerator(n.clone())),
            T::Comp(a, b) | T::Prod(a, b) | T::Coprod(a, b) => {
                self.check_names(a)?;
                self.check_names(b)
            }
            T::DomOf(a) => self.check_names(a),
            leaf => {
                for o in leaf.objects() {
                    for atom in o.atoms() {
                        if !self.carriers.has_atom(atom) {
                            return Err(TermError::UnknownAtom(atom.to_string()));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn ill_typed<T>(t: &WitnessTerm, reason: String) -> Result<T> {
    Err(TermError::IllTyped { subterm: t.to_string(), reason })
}

/// Infers `(src, dst)` of a term.
pub fn type_of(t: &WitnessTerm, env: &Env) -> Result<(ObjExpr, ObjExpr)> {
    type_in(t, env, false)
}

fn type_in(t: &WitnessTerm, env: &Env, under_dom: bool) -> Result<(ObjExpr, ObjExpr)> {
    use WitnessTerm as T;
    match t {
        T::Gen(n) => {
            let m = env.lookup(n, under_dom)?;
            Ok((m.src().clone(), m.dst().clone()))
        }
        T::Comp(a, b) => {
            let (sa, da) = type_in(a, env, under_dom)?;
            let (sb, db) = type_in(b, env, under_dom)?;
            if db != sa {
                return ill_typed(t, format!("right side ends in {db} but left side starts at {sa}"));
            }
            Ok((sb, da))
        }
        T::Prod(a, b) | T::Coprod(a, b) => {
            let (sa, da) = type_in(a, env, under_dom)?;
            let (sb, db) = type_in(b, env, under_dom)?;
            Ok(if matches!(t, T::Prod(..)) {
                (ObjExpr::prod(sa, sb), ObjExpr::prod(da, db))
            } else {
                (ObjExpr::coprod(sa, sb), ObjExpr::coprod(da, db))
            })
        }
        T::DomOf(a) => {
            let (s, _) = type_in(a, env, true)?;
            Ok((s.clone(), s))
        }
        leaf => {
            env.check_names(leaf)?;
            let s = leaf.as_structural().expect("leaf is structural");
            if let Structural::Const { dst, value, .. } = &s {
                if !env.carriers.is_valid(value, dst) {
                    return ill_typed(t, format!("{value} is not an element of {dst}"));
                }
            }
            Ok((s.src(), s.dst()))
        }
    }
}

/// Evaluates a term to its relation.
pub fn eval_term(t: &WitnessTerm, env: &Env) -> Result<SearchProblem> {
    type_of(t, env)?;
    eval_in(t, env, false)
}

fn eval_in(t: &WitnessTerm, env: &Env, under_dom: bool) -> Result<SearchProblem> {
    use WitnessTerm as T;
    Ok(match t {
        T::Gen(n) => env.lookup(n, under_dom)?.clone(),
        T::Comp(a, b) => compose(&eval_in(a, env, under_dom)?, &eval_in(b, env, under_dom)?)?,
        T::Prod(a, b) => product_m(&eval_in(a, env, under_dom)?, &eval_in(b, env, under_dom)?),
        T::Coprod(a, b) => coproduct_m(&eval_in(a, env, under_dom)?, &eval_in(b, env, under_dom)?),
        T::DomOf(a) => dom_m(&eval_in(a, env, true)?),
        leaf => structural(&env.carriers, &leaf.as_structural().expect("leaf is structural"))?,
    })
}

/// Eliminates identities from composition chains and re-associates them to
/// the right. Evaluation is preserved exactly.
pub fn canonicalize(t: &WitnessTerm) -> WitnessTerm {
    use WitnessTerm as T;
    match t {
        T::Comp(..) => {
            let mut parts = Vec::new();
            flatten_comp(t, &mut parts);
            let last = parts.last().cloned().expect("non-empty chain");
            let kept: Vec<_> = parts.into_iter().filter(|p| !matches!(p, T::Id(_))).collect();
            if kept.is_empty() {
                last
            } else {
                T::chain(kept)
            }
        }
        T::Prod(a, b) => T::prod(canonicalize(a), canonicalize(b)),
        T::Coprod(a, b) => T::coprod(canonicalize(a), canonicalize(b)),
        T::DomOf(a) => T::dom(canonicalize(a)),
        leaf => leaf.clone(),
    }
}

fn flatten_comp(t: &WitnessTerm, out: &mut Vec<WitnessTerm>) {
    match t {
        WitnessTerm::Comp(a, b) => {
            flatten_comp(a, out);
            flatten_comp(b, out);
        }
        other => out.push(canonicalize(other)),
    }
}
