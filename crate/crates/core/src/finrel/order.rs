use serde::Serialize;

use super::{Carriers, Element, FinrelError, ObjExpr, Result, SearchProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    Entails,
    DomSubset,
}

/// A counterexample to an order judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// An instance of the left side missing from the right side's domain.
    Instance(Element),
    /// An instance `x` and a solution `y ∈ rhs(x)` with `y ∉ lhs(x)`.
    Solution(Element, Element),
}

/// Outcome of an order check. `violation` is `None` iff the order holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomOrderWitness {
    pub kind: OrderKind,
    pub lhs: SearchProblem,
    pub rhs: SearchProblem,
    pub violation: Option<Violation>,
}

impl HomOrderWitness {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }

    /// Re-derives the violation from `lhs` and `rhs`; true when it is genuine.
    pub fn violation_is_genuine(&self) -> bool {
        match &self.violation {
            None => true,
            Some(Violation::Instance(x)) => self.lhs.in_dom(x) && !self.rhs.in_dom(x),
            Some(Violation::Solution(x, y)) => {
                self.lhs.in_dom(x) && self.rhs.contains(x, y) && !self.lhs.contains(x, y)
            }
        }
    }
}

fn hom_check(f: &SearchProblem, g: &SearchProblem) -> Result<()> {
    if f.same_hom(g) {
        Ok(())
    } else {
        Err(FinrelError::HomMismatch {
            left: format!("{} -> {}", f.src(), f.dst()),
            right: format!("{} -> {}", g.src(), g.dst()),
        })
    }
}

/// Decides `f ⪯ g`: every instance of `f` is an instance of `g`, and every
/// solution `g` offers is acceptable for `f`.
pub fn entails(f: &SearchProblem, g: &SearchProblem) -> Result<HomOrderWitness> {
    hom_check(f, g)?;
    let mut violation = None;
    'outer: for x in f.dom() {
        if !g.in_dom(x) {
            violation = Some(Violation::Instance(x.clone()));
            break;
        }
        for y in g.image(x) {
            if !f.contains(x, y) {
                violation = Some(Violation::Solution(x.clone(), y.clone()));
                break 'outer;
            }
        }
    }
    Ok(HomOrderWitness { kind: OrderKind::Entails, lhs: f.clone(), rhs: g.clone(), violation })
}

/// Decides `d1 ⊆ d2` for partial identities, i.e. `d1 ∘ d2 = d1`.
pub fn dom_subset(d1: &SearchProblem, d2: &SearchProblem) -> Result<HomOrderWitness> {
    for d in [d1, d2] {
        if !d.is_domain() {
            return Err(FinrelError::NotADomain(d.to_string()));
        }
    }
    hom_check(d1, d2)?;
    let violation = d1.dom().into_iter().find(|x| !d2.in_dom(x)).map(|x| Violation::Instance(x.clone()));
    Ok(HomOrderWitness { kind: OrderKind::DomSubset, lhs: d1.clone(), rhs: d2.clone(), violation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainClass {
    Initial,
    /// Initial and nowhere defined.
    Empty,
    Final,
    None,
}

/// Classifies a domain morphism `d` within the domain subcategory, using the
/// context objects as test objects.
///
/// A domain `d` on `A` with `|dom d| = n` has `2^(n·|B|)` relations into a
/// test object `B` (initiality) and `n^|B|` total maps from `B` landing in
/// `dom d` (finality). Both are counted rather than enumerated.
pub fn classify_domain(carriers: &Carriers, d: &SearchProblem, context: &[ObjExpr]) -> Result<DomainClass> {
    if !d.is_domain() {
        return Err(FinrelError::NotADomain(d.to_string()));
    }
    let n = d.len() as u128;
    let mut sizes = Vec::with_capacity(context.len() + 1);
    sizes.push(carriers.carrier_len(d.src())? as u128);
    for obj in context {
        sizes.push(carriers.carrier_len(obj)? as u128);
    }
    let relations_out = |b: u128| if n * b == 0 { 1 } else { 2 };
    let total_maps_in = |b: u128| if b == 0 { 1 } else if n <= 1 { n } else { 2 };
    if sizes.iter().all(|&b| relations_out(b) == 1) {
        return Ok(if n == 0 { DomainClass::Empty } else { DomainClass::Initial });
    }
    if sizes.iter().all(|&b| total_maps_in(b) == 1) {
        return Ok(DomainClass::Final);
    }
    Ok(DomainClass::None)
}
