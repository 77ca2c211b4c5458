//! The two partial choice functions read off a choice function of `f ⊕ g`.

use serde::Serialize;

use super::{ReduceError, Result};
use crate::finrel::{oplus, Carriers, Element, ObjExpr, SearchProblem, Side};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PsiPhiReport {
    /// `Ψ(x)`: the first left answer of `I(x, y)` over `y`.
    pub psi: SearchProblem,
    /// `Φ(y)`: the first right answer of `I(x, y)` over `x`.
    pub phi: SearchProblem,
    pub psi_total: bool,
    pub phi_total: bool,
}

impl PsiPhiReport {
    /// At least one side is a total choice function.
    pub fn dichotomy(&self) -> bool {
        self.psi_total || self.phi_total
    }
}

/// Splits a choice function `i` of `f ⊕ g` into `Ψ` (for `f`) and `Φ` (for `g`).
pub fn psi_phi(carriers: &Carriers, i: &SearchProblem, f: &SearchProblem, g: &SearchProblem) -> Result<PsiPhiReport> {
    for (name, p) in [("f", f), ("g", g)] {
        if !p.is_total(carriers)? {
            return Err(ReduceError::Precondition(format!("{name} is not total")));
        }
    }
    let want_src = ObjExpr::prod(f.src().clone(), g.src().clone());
    let want_dst = ObjExpr::coprod(f.dst().clone(), g.dst().clone());
    if i.src() != &want_src || i.dst() != &want_dst {
        return Err(ReduceError::Precondition(format!("I has type {} -> {}, expected {want_src} -> {want_dst}", i.src(), i.dst())));
    }
    if !i.is_single_valued() {
        return Err(ReduceError::Precondition("I is not single-valued".into()));
    }
    let sum = oplus(f, g);
    let xs = carriers.carrier(f.src())?;
    let ys = carriers.carrier(g.src())?;
    for x in xs.iter() {
        for y in ys.iter() {
            let xy = Element::pair(x.clone(), y.clone());
            match i.apply(&xy) {
                Some(z) if sum.contains(&xy, z) => {}
                Some(z) => return Err(ReduceError::Precondition(format!("I({xy}) = {z} is not a solution of f ⊕ g"))),
                None => return Err(ReduceError::Precondition(format!("I is undefined at {xy}"))),
            }
        }
    }
    let first = |x: &Element, y: &Element, side: Side| match i.apply(&Element::pair(x.clone(), y.clone())).and_then(Element::as_tag) {
        Some((s, z)) if s == side => Some(z.clone()),
        _ => None,
    };
    let psi: Vec<(Element, Element)> =
        xs.iter().filter_map(|x| ys.iter().find_map(|y| first(x, y, Side::Left)).map(|z| (x.clone(), z))).collect();
    let phi: Vec<(Element, Element)> =
        ys.iter().filter_map(|y| xs.iter().find_map(|x| first(x, y, Side::Right)).map(|z| (y.clone(), z))).collect();
    let psi = SearchProblem::new(carriers, f.src().clone(), f.dst().clone(), psi)?;
    let phi = SearchProblem::new(carriers, g.src().clone(), g.dst().clone(), phi)?;
    Ok(PsiPhiReport { psi_total: psi.is_total(carriers)?, phi_total: phi.is_total(carriers)?, psi, phi })
}
