use std::collections::BTreeSet;

use super::{Carriers, Element, FinrelError, ObjExpr, Result, SearchProblem};

/// Relational composition `f ∘ g` (apply `g` first).
pub fn compose(f: &SearchProblem, g: &SearchProblem) -> Result<SearchProblem> {
    if g.dst() != f.src() {
        return Err(FinrelError::Composition { left: f.dst().to_string() + " <- " + &f.src().to_string(), right: g.dst().to_string() + " <- " + &g.src().to_string() });
    }
    let mut graph = BTreeSet::new();
    for (x, y) in g.graph() {
        for z in f.image(y) {
            graph.insert((x.clone(), z.clone()));
        }
    }
    Ok(SearchProblem::from_parts(g.src().clone(), f.dst().clone(), graph))
}

/// Cartesian product of relations.
pub fn product_m(f: &SearchProblem, g: &SearchProblem) -> SearchProblem {
    let mut graph = BTreeSet::new();
    for (x1, y1) in f.graph() {
        for (x2, y2) in g.graph() {
            graph.insert((Element::pair(x1.clone(), x2.clone()), Element::pair(y1.clone(), y2.clone())));
        }
    }
    SearchProblem::from_parts(
        ObjExpr::prod(f.src().clone(), g.src().clone()),
        ObjExpr::prod(f.dst().clone(), g.dst().clone()),
        graph,
    )
}

/// Tagged sum of relations: left instances keep left solutions and so on.
pub fn coproduct_m(f: &SearchProblem, g: &SearchProblem) -> SearchProblem {
    let left = f.graph().iter().map(|(x, y)| (Element::left(x.clone()), Element::left(y.clone())));
    let right = g.graph().iter().map(|(x, y)| (Element::right(x.clone()), Element::right(y.clone())));
    SearchProblem::from_parts(
        ObjExpr::coprod(f.src().clone(), g.src().clone()),
        ObjExpr::coprod(f.dst().clone(), g.dst().clone()),
        left.chain(right).collect(),
    )
}

/// The named structural morphisms of the p-category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structural {
    Id(ObjExpr),
    Diag(ObjExpr),
    /// `A * B -> A`
    Proj1(ObjExpr, ObjExpr),
    /// `A * B -> B`
    Proj2(ObjExpr, ObjExpr),
    /// `A -> A + B`
    Inj1(ObjExpr, ObjExpr),
    /// `B -> A + B`
    Inj2(ObjExpr, ObjExpr),
    /// `A + A -> A`
    Codiag(ObjExpr),
    /// `(A * B) * C -> A * (B * C)`, or the reverse when `inverse`.
    Assoc { a: ObjExpr, b: ObjExpr, c: ObjExpr, inverse: bool },
    /// `A * B -> B * A`
    Comm(ObjExpr, ObjExpr),
    /// `A * (B + C) -> (A * B) + (A * C)`, or the reverse when `inverse`.
    Distrib { a: ObjExpr, b: ObjExpr, c: ObjExpr, inverse: bool },
    /// Constant map `src -> dst` with the given value.
    Const { src: ObjExpr, dst: ObjExpr, value: Element },
    /// Connectedness morphism `c_{A,B}`: the identity when `A == B`, the
    /// constant at the least element of `B` otherwise, and nowhere defined
    /// when `B` is empty.
    Conn(ObjExpr, ObjExpr),
}

impl Structural {
    pub fn src(&self) -> ObjExpr {
        use Structural::*;
        match self {
            Id(a) | Diag(a) => a.clone(),
            Proj1(a, b) | Proj2(a, b) | Comm(a, b) => ObjExpr::prod(a.clone(), b.clone()),
            Inj1(a, _) => a.clone(),
            Inj2(_, b) => b.clone(),
            Codiag(a) => ObjExpr::coprod(a.clone(), a.clone()),
            Assoc { a, b, c, inverse: false } => ObjExpr::prod(ObjExpr::prod(a.clone(), b.clone()), c.clone()),
            Assoc { a, b, c, inverse: true } => ObjExpr::prod(a.clone(), ObjExpr::prod(b.clone(), c.clone())),
            Distrib { a, b, c, inverse: false } => ObjExpr::prod(a.clone(), ObjExpr::coprod(b.clone(), c.clone())),
            Distrib { a, b, c, inverse: true } => {
                ObjExpr::coprod(ObjExpr::prod(a.clone(), b.clone()), ObjExpr::prod(a.clone(), c.clone()))
            }
            Const { src, .. } | Conn(src, _) => src.clone(),
        }
    }

    pub fn dst(&self) -> ObjExpr {
        use Structural::*;
        match self {
            Id(a) | Codiag(a) => a.clone(),
            Diag(a) => ObjExpr::prod(a.clone(), a.clone()),
            Proj1(a, _) => a.clone(),
            Proj2(_, b) => b.clone(),
            Inj1(a, b) | Inj2(a, b) => ObjExpr::coprod(a.clone(), b.clone()),
            Comm(a, b) => ObjExpr::prod(b.clone(), a.clone()),
            Assoc { a, b, c, inverse } => Assoc { a: a.clone(), b: b.clone(), c: c.clone(), inverse: !inverse }.src(),
            Distrib { a, b, c, inverse } => {
                Distrib { a: a.clone(), b: b.clone(), c: c.clone(), inverse: !inverse }.src()
            }
            Const { dst, .. } | Conn(_, dst) => dst.clone(),
        }
    }

    /// The single value of this total map at a source element.
    fn apply(&self, carriers: &Carriers, x: &Element) -> Option<Element> {
        use Structural::*;
        let pair = |e: &Element| e.as_pair().map(|(a, b)| (a.clone(), b.clone()));
        match self {
            Id(_) => Some(x.clone()),
            Codiag(_) => x.as_tag().map(|(_, e)| e.clone()),
            Diag(_) => Some(Element::pair(x.clone(), x.clone())),
            Proj1(..) => pair(x).map(|p| p.0),
            Proj2(..) => pair(x).map(|p| p.1),
            Inj1(..) => Some(Element::left(x.clone())),
            Inj2(..) => Some(Element::right(x.clone())),
            Comm(..) => pair(x).map(|(a, b)| Element::pair(b, a)),
            Assoc { inverse: false, .. } => {
                let (ab, c) = pair(x)?;
                let (a, b) = pair(&ab)?;
                Some(Element::pair(a, Element::pair(b, c)))
            }
            Assoc { inverse: true, .. } => {
                let (a, bc) = pair(x)?;
                let (b, c) = pair(&bc)?;
                Some(Element::pair(Element::pair(a, b), c))
            }
            Distrib { inverse: false, .. } => {
                let (a, bc) = pair(x)?;
                let (side, e) = bc.as_tag()?;
                Some(Element::tag(side, Element::pair(a, e.clone())))
            }
            Distrib { inverse: true, .. } => {
                let (side, ab) = x.as_tag()?;
                let (a, b) = pair(ab)?;
                Some(Element::pair(a, Element::tag(side, b)))
            }
            Const { value, .. } => Some(value.clone()),
            Conn(a, b) if a == b => Some(x.clone()),
            Conn(_, b) => carriers.carrier(b).ok()?.first().cloned(),
        }
    }
}

/// Realizes a structural morphism as a total single-valued relation (the
/// connectedness morphism into an empty object is the nowhere-defined one).
pub fn structural(carriers: &Carriers, s: &Structural) -> Result<SearchProblem> {
    let src = s.src();
    let dst = s.dst();
    carriers.check_obj(&src)?;
    carriers.check_obj(&dst)?;
    if let Structural::Const { value, .. } = s {
        if carriers.carrier(&dst)?.is_empty() {
            return Err(FinrelError::NoConstant(dst.to_string()));
        }
        carriers.check_elem(value, &dst)?;
    }
    let mut graph = BTreeSet::new();
    for x in carriers.carrier(&src)?.iter() {
        if let Some(y) = s.apply(carriers, x) {
            graph.insert((x.clone(), y));
        }
    }
    Ok(SearchProblem::from_parts(src, dst, graph))
}

/// `dom(f)`: the partial identity on the instances of `f`.
pub fn dom_m(f: &SearchProblem) -> SearchProblem {
    SearchProblem::partial_identity(f.src(), f.dom())
}

/// `dom(f)` evaluated through its defining composite `π1 ∘ (id × f) ∘ Δ`.
pub fn dom_via_composite(carriers: &Carriers, f: &SearchProblem) -> Result<SearchProblem> {
    let a = f.src().clone();
    let diag = structural(carriers, &Structural::Diag(a.clone()))?;
    let idf = product_m(&SearchProblem::identity(carriers, &a)?, f);
    let p1 = structural(carriers, &Structural::Proj1(a.clone(), f.dst().clone()))?;
    compose(&p1, &compose(&idf, &diag)?)
}

/// The ⪯-infimum on a hom-set: instances of both, solutions of either.
pub fn hom_inf(f: &SearchProblem, g: &SearchProblem) -> Result<SearchProblem> {
    if !f.same_hom(g) {
        return Err(FinrelError::HomMismatch { left: format!("{} -> {}", f.src(), f.dst()), right: format!("{} -> {}", g.src(), g.dst()) });
    }
    let gdom = g.dom();
    let fdom = f.dom();
    let graph = f
        .graph()
        .iter()
        .filter(|(x, _)| gdom.contains(x))
        .chain(g.graph().iter().filter(|(x, _)| fdom.contains(x)))
        .cloned()
        .collect();
    Ok(SearchProblem::from_parts(f.src().clone(), f.dst().clone(), graph))
}

/// `f ⊕ g`: on `<x,y>` with both defined, any solution of `f` at `x`
/// (tagged left) or of `g` at `y` (tagged right).
pub fn oplus(f: &SearchProblem, g: &SearchProblem) -> SearchProblem {
    let mut graph = BTreeSet::new();
    let fm = f.as_map();
    let gm = g.as_map();
    for (x, fys) in &fm {
        for (y, gys) in &gm {
            let inst = Element::pair((*x).clone(), (*y).clone());
            for u in fys {
                graph.insert((inst.clone(), Element::left((*u).clone())));
            }
            for v in gys {
                graph.insert((inst.clone(), Element::right((*v).clone())));
            }
        }
    }
    SearchProblem::from_parts(
        ObjExpr::prod(f.src().clone(), g.src().clone()),
        ObjExpr::coprod(f.dst().clone(), g.dst().clone()),
        graph,
    )
}

/// `f ⊕ g` through its defining composite `inf{ι1∘π1, ι2∘π2} ∘ (f × g)`.
pub fn oplus_via_composite(carriers: &Carriers, f: &SearchProblem, g: &SearchProblem) -> Result<SearchProblem> {
    let (c, d) = (f.dst().clone(), g.dst().clone());
    let left = compose(
        &structural(carriers, &Structural::Inj1(c.clone(), d.clone()))?,
        &structural(carriers, &Structural::Proj1(c.clone(), d.clone()))?,
    )?;
    let right = compose(
        &structural(carriers, &Structural::Inj2(c.clone(), d.clone()))?,
        &structural(carriers, &Structural::Proj2(c, d))?,
    )?;
    compose(&hom_inf(&left, &right)?, &product_m(f, g))
}

/// Left-nested iterated product: `f^1 = f`, `f^(n+1) = f^n × f`.
pub fn power(f: &SearchProblem, n: usize) -> Result<SearchProblem> {
    if n == 0 {
        return Err(FinrelError::ZeroExponent("power"));
    }
    let mut acc = f.clone();
    for _ in 1..n {
        acc = product_m(&acc, f);
    }
    Ok(acc)
}

/// Truncated star: `f^1 ⊔ f^2 ⊔ … ⊔ f^n`, left-nested; level 1 is `f` itself.
pub fn star_trunc(f: &SearchProblem, n: usize) -> Result<SearchProblem> {
    if n == 0 {
        return Err(FinrelError::ZeroExponent("star truncation"));
    }
    let mut acc = f.clone();
    let mut pw = f.clone();
    for _ in 1..n {
        pw = product_m(&pw, f);
        acc = coproduct_m(&acc, &pw);
    }
    Ok(acc)
}

/// Object of `f^n` for `f : A -> B` given `A` (left-nested).
pub fn power_obj(a: &ObjExpr, n: usize) -> ObjExpr {
    let mut acc = a.clone();
    for _ in 1..n {
        acc = ObjExpr::prod(acc, a.clone());
    }
    acc
}

/// Object of the truncated star over `a`.
pub fn star_obj(a: &ObjExpr, n: usize) -> ObjExpr {
    let mut acc = a.clone();
    for k in 2..=n {
        acc = ObjExpr::coprod(acc, power_obj(a, k));
    }
    acc
}
