//! Finite relations: the ambient category of search problems.
//!
//! Objects are formal expressions over named finite atom sets, built with
//! `*` (cartesian product) and `+` (tagged union). Morphisms are finite
//! relations between carriers. Everything here is immutable and
//! deterministic: graphs are kept in `BTreeSet`s so iteration order is the
//! derived total order on element pairs.

mod axioms;
mod ops;
mod order;

pub use axioms::{verify_pcategory_axioms, AxiomReport, LawResult};
pub use ops::{
    compose, coproduct_m, dom_m, dom_via_composite, hom_inf, oplus, oplus_via_composite, power,
    power_obj, product_m, star_obj, star_trunc, structural, Structural,
};
pub use order::{classify_domain, dom_subset, entails, DomainClass, HomOrderWitness, OrderKind, Violation};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinrelError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("element {elem} is not valid for object {obj}")]
    InvalidElement { elem: String, obj: String },
    #[error("typed composition error: cannot compose {left} after {right}")]
    Composition { left: String, right: String },
    #[error("hom-set mismatch: {left} vs {right}")]
    HomMismatch { left: String, right: String },
    #[error("no constant of type {0}: carrier is empty")]
    NoConstant(String),
    #[error("not a domain morphism: {0}")]
    NotADomain(String),
    #[error("{0} must be at least 1")]
    ZeroExponent(&'static str),
}

pub type Result<T, E = FinrelError> = std::result::Result<T, E>;

/// A formal finite object. Equality is structural: `(X * Y) * Z` and
/// `X * (Y * Z)` are different objects related by an explicit isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjExpr {
    Atom(String),
    Prod(Box<ObjExpr>, Box<ObjExpr>),
    Coprod(Box<ObjExpr>, Box<ObjExpr>),
}

impl ObjExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        ObjExpr::Atom(name.into())
    }

    pub fn prod(a: ObjExpr, b: ObjExpr) -> Self {
        ObjExpr::Prod(Box::new(a), Box::new(b))
    }

    pub fn coprod(a: ObjExpr, b: ObjExpr) -> Self {
        ObjExpr::Coprod(Box::new(a), Box::new(b))
    }

    /// Nesting depth of `*`/`+` constructors; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            ObjExpr::Atom(_) => 0,
            ObjExpr::Prod(a, b) | ObjExpr::Coprod(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// True when no `+` occurs anywhere in the expression.
    pub fn is_tag_free(&self) -> bool {
        match self {
            ObjExpr::Atom(_) => true,
            ObjExpr::Prod(a, b) => a.is_tag_free() && b.is_tag_free(),
            ObjExpr::Coprod(..) => false,
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ObjExpr::Atom(n) => {
                out.insert(n);
            }
            ObjExpr::Prod(a, b) | ObjExpr::Coprod(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// All subexpressions, including `self`.
    pub fn subexpressions(&self) -> Vec<&ObjExpr> {
        let mut out = vec![self];
        if let ObjExpr::Prod(a, b) | ObjExpr::Coprod(a, b) = self {
            out.extend(a.subexpressions());
            out.extend(b.subexpressions());
        }
        out
    }
}

impl fmt::Display for ObjExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjExpr::Atom(n) => write!(f, "{n}"),
            ObjExpr::Prod(a, b) => write!(f, "({a} * {b})"),
            ObjExpr::Coprod(a, b) => write!(f, "({a} + {b})"),
        }
    }
}

/// Which summand of a coproduct a tagged element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }
}

/// A member of some object's carrier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    Atom(String),
    Pair(Box<Element>, Box<Element>),
    Tag(Side, Box<Element>),
}

impl Element {
    pub fn atom(label: impl Into<String>) -> Self {
        Element::Atom(label.into())
    }

    pub fn pair(a: Element, b: Element) -> Self {
        Element::Pair(Box::new(a), Box::new(b))
    }

    pub fn tag(side: Side, e: Element) -> Self {
        Element::Tag(side, Box::new(e))
    }

    pub fn left(e: Element) -> Self {
        Element::tag(Side::Left, e)
    }

    pub fn right(e: Element) -> Self {
        Element::tag(Side::Right, e)
    }

    pub fn as_pair(&self) -> Option<(&Element, &Element)> {
        match self {
            Element::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_tag(&self) -> Option<(Side, &Element)> {
        match self {
            Element::Tag(s, e) => Some((*s, e)),
            _ => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Atom(l) => write!(f, "{l}"),
            Element::Pair(a, b) => write!(f, "<{a},{b}>"),
            Element::Tag(s, e) => write!(f, "{}:{e}", s.index()),
        }
    }
}

/// Binds atom names to finite label sets and enumerates carriers.
///
/// Atom carriers are listed in sorted label order; composite carriers follow
/// from the derived element order, so `carrier` is always sorted.
pub struct Carriers {
    atoms: BTreeMap<String, Vec<String>>,
    cache: Mutex<HashMap<ObjExpr, Arc<Vec<Element>>>>,
}

impl Carriers {
    pub fn new<I, S, L>(atoms: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<L>)>,
        S: Into<String>,
        L: Into<String>,
    {
        let atoms = atoms
            .into_iter()
            .map(|(name, labels)| {
                let set: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
                (name.into(), set.into_iter().collect())
            })
            .collect();
        Carriers { atoms, cache: Mutex::new(HashMap::new()) }
    }

    pub fn atom_names(&self) -> impl Iterator<Item = &str> {
        self.atoms.keys().map(String::as_str)
    }

    pub fn has_atom(&self, name: &str) -> bool {
        self.atoms.contains_key(name)
    }

    pub fn atom_labels(&self, name: &str) -> Option<&[String]> {
        self.atoms.get(name).map(Vec::as_slice)
    }

    /// Checks that every atom of `obj` is bound.
    pub fn check_obj(&self, obj: &ObjExpr) -> Result<()> {
        for a in obj.atoms() {
            if !self.has_atom(a) {
                return Err(FinrelError::UnknownAtom(a.to_string()));
            }
        }
        Ok(())
    }

    pub fn carrier(&self, obj: &ObjExpr) -> Result<Arc<Vec<Element>>> {
        if let Some(c) = self.cache.lock().unwrap().get(obj) {
            return Ok(c.clone());
        }
        let elems = match obj {
            ObjExpr::Atom(n) => self
                .atoms
                .get(n)
                .ok_or_else(|| FinrelError::UnknownAtom(n.clone()))?
                .iter()
                .map(|l| Element::atom(l.clone()))
                .collect(),
            ObjExpr::Prod(a, b) => {
                let ca = self.carrier(a)?;
                let cb = self.carrier(b)?;
                let mut v = Vec::with_capacity(ca.len() * cb.len());
                for x in ca.iter() {
                    for y in cb.iter() {
                        v.push(Element::pair(x.clone(), y.clone()));
                    }
                }
                v
            }
            ObjExpr::Coprod(a, b) => {
                let ca = self.carrier(a)?;
                let cb = self.carrier(b)?;
                ca.iter()
                    .map(|x| Element::left(x.clone()))
                    .chain(cb.iter().map(|y| Element::right(y.clone())))
                    .collect()
            }
        };
        let arc = Arc::new(elems);
        self.cache.lock().unwrap().insert(obj.clone(), arc.clone());
        Ok(arc)
    }

    /// Carrier size, computed without enumerating the carrier.
    pub fn carrier_len(&self, obj: &ObjExpr) -> Result<usize> {
        Ok(match obj {
            ObjExpr::Atom(n) => self.atoms.get(n).ok_or_else(|| FinrelError::UnknownAtom(n.clone()))?.len(),
            ObjExpr::Prod(a, b) => self.carrier_len(a)? * self.carrier_len(b)?,
            ObjExpr::Coprod(a, b) => self.carrier_len(a)? + self.carrier_len(b)?,
        })
    }

    /// Position of `elem` in `carrier(obj)`: products are row-major and
    /// coproducts list the left summand first.
    pub fn index_of(&self, elem: &Element, obj: &ObjExpr) -> Option<usize> {
        match (elem, obj) {
            (Element::Atom(l), ObjExpr::Atom(n)) => self.atoms.get(n)?.binary_search(l).ok(),
            (Element::Pair(x, y), ObjExpr::Prod(a, b)) => {
                Some(self.index_of(x, a)? * self.carrier_len(b).ok()? + self.index_of(y, b)?)
            }
            (Element::Tag(Side::Left, x), ObjExpr::Coprod(a, _)) => self.index_of(x, a),
            (Element::Tag(Side::Right, y), ObjExpr::Coprod(a, b)) => {
                Some(self.carrier_len(a).ok()? + self.index_of(y, b)?)
            }
            _ => None,
        }
    }

    /// Decides whether `elem` mirrors the shape of `obj` with bound labels.
    pub fn is_valid(&self, elem: &Element, obj: &ObjExpr) -> bool {
        match (elem, obj) {
            (Element::Atom(l), ObjExpr::Atom(n)) => {
                self.atoms.get(n).is_some_and(|ls| ls.binary_search(l).is_ok())
            }
            (Element::Pair(x, y), ObjExpr::Prod(a, b)) => self.is_valid(x, a) && self.is_valid(y, b),
            (Element::Tag(Side::Left, x), ObjExpr::Coprod(a, _)) => self.is_valid(x, a),
            (Element::Tag(Side::Right, y), ObjExpr::Coprod(_, b)) => self.is_valid(y, b),
            _ => false,
        }
    }

    pub fn check_elem(&self, elem: &Element, obj: &ObjExpr) -> Result<()> {
        if self.is_valid(elem, obj) {
            Ok(())
        } else {
            Err(FinrelError::InvalidElement { elem: elem.to_string(), obj: obj.to_string() })
        }
    }
}

impl Clone for Carriers {
    fn clone(&self) -> Self {
        Carriers { atoms: self.atoms.clone(), cache: Mutex::new(HashMap::new()) }
    }
}

impl fmt::Debug for Carriers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Carriers").field("atoms", &self.atoms).finish()
    }
}

/// A finite relation between two objects: instances of `src` paired with
/// admissible solutions in `dst`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SearchProblem {
    src: ObjExpr,
    dst: ObjExpr,
    graph: BTreeSet<(Element, Element)>,
}

impl SearchProblem {
    /// Builds a relation, checking every pair against the carriers.
    pub fn new<I>(carriers: &Carriers, src: ObjExpr, dst: ObjExpr, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Element, Element)>,
    {
        carriers.check_obj(&src)?;
        carriers.check_obj(&dst)?;
        let mut graph = BTreeSet::new();
        for (x, y) in pairs {
            carriers.check_elem(&x, &src)?;
            carriers.check_elem(&y, &dst)?;
            graph.insert((x, y));
        }
        Ok(SearchProblem { src, dst, graph })
    }

    /// Builds a relation whose pairs are already known to be well-typed.
    pub(crate) fn from_parts(src: ObjExpr, dst: ObjExpr, graph: BTreeSet<(Element, Element)>) -> Self {
        SearchProblem { src, dst, graph }
    }

    pub fn empty(src: ObjExpr, dst: ObjExpr) -> Self {
        SearchProblem { src, dst, graph: BTreeSet::new() }
    }

    pub fn identity(carriers: &Carriers, obj: &ObjExpr) -> Result<Self> {
        let graph = carriers.carrier(obj)?.iter().map(|x| (x.clone(), x.clone())).collect();
        Ok(SearchProblem::from_parts(obj.clone(), obj.clone(), graph))
    }

    /// Partial identity on the given subset of `obj`.
    pub fn partial_identity<'a, I>(obj: &ObjExpr, elems: I) -> Self
    where
        I: IntoIterator<Item = &'a Element>,
    {
        let graph = elems.into_iter().map(|x| (x.clone(), x.clone())).collect();
        SearchProblem::from_parts(obj.clone(), obj.clone(), graph)
    }

    pub fn src(&self) -> &ObjExpr {
        &self.src
    }

    pub fn dst(&self) -> &ObjExpr {
        &self.dst
    }

    pub fn graph(&self) -> &BTreeSet<(Element, Element)> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn contains(&self, x: &Element, y: &Element) -> bool {
        self.graph.contains(&(x.clone(), y.clone()))
    }

    /// Instances with at least one solution.
    pub fn dom(&self) -> BTreeSet<&Element> {
        self.graph.iter().map(|(x, _)| x).collect()
    }

    pub fn in_dom(&self, x: &Element) -> bool {
        self.image(x).next().is_some()
    }

    /// Solutions of instance `x`, in canonical order.
    pub fn image<'a>(&'a self, x: &'a Element) -> impl Iterator<Item = &'a Element> + 'a {
        use std::ops::Bound::{Included, Unbounded};
        self.graph
            .range::<(Element, Element), _>((Included((x.clone(), Element::Atom(String::new()))), Unbounded))
            .take_while(move |(a, _)| a == x)
            .map(|(_, y)| y)
    }

    /// The relation as a map from instance to its solution list.
    pub fn as_map(&self) -> BTreeMap<&Element, Vec<&Element>> {
        let mut m: BTreeMap<&Element, Vec<&Element>> = BTreeMap::new();
        for (x, y) in &self.graph {
            m.entry(x).or_default().push(y);
        }
        m
    }

    pub fn is_single_valued(&self) -> bool {
        let mut prev: Option<&Element> = None;
        for (x, _) in &self.graph {
            if prev == Some(x) {
                return false;
            }
            prev = Some(x);
        }
        true
    }

    pub fn is_total(&self, carriers: &Carriers) -> Result<bool> {
        let dom = self.dom();
        Ok(carriers.carrier(&self.src)?.iter().all(|x| dom.contains(x)))
    }

    /// Single-valued lookup; `None` when undefined. Multi-valued relations
    /// return their least solution.
    pub fn apply(&self, x: &Element) -> Option<&Element> {
        use std::ops::Bound::{Included, Unbounded};
        self.graph
            .range::<(Element, Element), _>((Included((x.clone(), Element::Atom(String::new()))), Unbounded))
            .next()
            .filter(|(a, _)| a == x)
            .map(|(_, y)| y)
    }

    /// True when `self` is a partial identity on its source.
    pub fn is_domain(&self) -> bool {
        self.src == self.dst && self.graph.iter().all(|(x, y)| x == y)
    }

    pub fn same_hom(&self, other: &SearchProblem) -> bool {
        self.src == other.src && self.dst == other.dst
    }
}

impl fmt::Display for SearchProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {{", self.src, self.dst)?;
        for (i, (x, y)) in self.graph.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({x}, {y})")?;
        }
        write!(f, "}}")
    }
}

/// The canonical fixture used throughout the tests and docs:
/// `X = {a,b}`, `Y = {0,1}`, `Z = {p,q}`, `PT = {*}`.
pub mod fixture {
    use super::*;

    pub fn carriers() -> Carriers {
        Carriers::new([
            ("X", vec!["a", "b"]),
            ("Y", vec!["0", "1"]),
            ("Z", vec!["p", "q"]),
            ("PT", vec!["*"]),
        ])
    }

    pub fn x() -> ObjExpr {
        ObjExpr::atom("X")
    }
    pub fn y() -> ObjExpr {
        ObjExpr::atom("Y")
    }
    pub fn z() -> ObjExpr {
        ObjExpr::atom("Z")
    }
    pub fn pt() -> ObjExpr {
        ObjExpr::atom("PT")
    }

    fn rel(src: ObjExpr, dst: ObjExpr, pairs: &[(&str, &str)]) -> SearchProblem {
        let c = carriers();
        SearchProblem::new(&c, src, dst, pairs.iter().map(|(a, b)| (Element::atom(*a), Element::atom(*b))))
            .expect("fixture relation is well-typed")
    }

    /// `f = {(a,0),(a,1),(b,1)}`
    pub fn f() -> SearchProblem {
        rel(x(), y(), &[("a", "0"), ("a", "1"), ("b", "1")])
    }
    /// `g = {(a,0)}`
    pub fn g() -> SearchProblem {
        rel(x(), y(), &[("a", "0")])
    }
    /// `g' = {(a,0),(b,1)}`
    pub fn g_prime() -> SearchProblem {
        rel(x(), y(), &[("a", "0"), ("b", "1")])
    }
    /// `h = {(0,p),(1,p),(1,q)}`
    pub fn h() -> SearchProblem {
        rel(y(), z(), &[("0", "p"), ("1", "p"), ("1", "q")])
    }
    pub fn empty() -> SearchProblem {
        SearchProblem::empty(x(), y())
    }
    pub fn id_pt() -> SearchProblem {
        rel(pt(), pt(), &[("*", "*")])
    }
}
