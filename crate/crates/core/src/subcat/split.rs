//! Decomposition of an object into tag-free summands through an explicit
//! isomorphism built from `distr` and `comm`.

use crate::finrel::{Carriers, Element, ObjExpr, Side};
use crate::term::WitnessTerm;

use super::Result;

#[derive(Debug, Clone)]
pub(crate) enum SplitTree {
    Leaf,
    /// `iso : obj -> a1 + a2` for the two halves; `None` when `obj` already is
    /// that coproduct.
    Node { iso: Option<WitnessTerm>, left: Box<SplitTree>, right: Box<SplitTree> },
}

/// The sum-of-products form of an object.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub tree: SplitTree,
    /// Tag-free summands, left to right.
    pub summands: Vec<ObjExpr>,
    /// `(summand, index in summand)` for every index of `carrier(obj)`.
    pub locate: Vec<(usize, usize)>,
    /// Inverse of `locate`, per summand.
    pub origin: Vec<Vec<usize>>,
}

/// One level of splitting: an isomorphism `obj -> a1 + a2`.
fn top_split(obj: &ObjExpr) -> Option<(Option<WitnessTerm>, ObjExpr, ObjExpr)> {
    use WitnessTerm as T;
    match obj {
        ObjExpr::Atom(_) => None,
        ObjExpr::Coprod(a, b) => Some((None, (**a).clone(), (**b).clone())),
        ObjExpr::Prod(l, r) if !r.is_tag_free() => {
            let (tr, r1, r2) = top_split(r)?;
            let distr = T::distr(l, &r1, &r2, false);
            let iso = match tr {
                None => distr,
                Some(tr) => T::comp(distr, T::prod(T::Id((**l).clone()), tr)),
            };
            Some((Some(iso), ObjExpr::prod((**l).clone(), r1), ObjExpr::prod((**l).clone(), r2)))
        }
        ObjExpr::Prod(l, r) if !l.is_tag_free() => {
            let (tl, l1, l2) = top_split(l)?;
            let mut parts = vec![
                T::coprod(T::Comm((**r).clone(), l1.clone()), T::Comm((**r).clone(), l2.clone())),
                T::distr(r, &l1, &l2, false),
            ];
            if let Some(tl) = tl {
                parts.push(T::prod(T::Id((**r).clone()), tl));
            }
            parts.push(T::Comm((**l).clone(), (**r).clone()));
            Some((Some(T::chain(parts)), ObjExpr::prod(l1, (**r).clone()), ObjExpr::prod(l2, (**r).clone())))
        }
        ObjExpr::Prod(..) => None,
    }
}

/// Where one level of splitting sends an element.
fn top_split_elem(obj: &ObjExpr, e: &Element) -> Option<(Side, Element)> {
    match obj {
        ObjExpr::Atom(_) => None,
        ObjExpr::Coprod(..) => e.as_tag().map(|(s, x)| (s, x.clone())),
        ObjExpr::Prod(l, r) => {
            let (a, b) = e.as_pair()?;
            if !r.is_tag_free() {
                let (s, b2) = top_split_elem(r, b)?;
                Some((s, Element::pair(a.clone(), b2)))
            } else {
                let (s, a2) = top_split_elem(l, a)?;
                Some((s, Element::pair(a2, b.clone())))
            }
        }
    }
}

fn build_tree(obj: &ObjExpr, leaves: &mut Vec<ObjExpr>) -> SplitTree {
    match top_split(obj) {
        None => {
            leaves.push(obj.clone());
            SplitTree::Leaf
        }
        Some((iso, a1, a2)) => {
            let left = Box::new(build_tree(&a1, leaves));
            let right = Box::new(build_tree(&a2, leaves));
            SplitTree::Node { iso, left, right }
        }
    }
}

impl Split {
    pub fn new(carriers: &Carriers, obj: &ObjExpr) -> Result<Split> {
        let mut summands = Vec::new();
        let tree = build_tree(obj, &mut summands);
        let mut origin: Vec<Vec<usize>> =
            summands.iter().map(|s| carriers.carrier_len(s).map(|n| vec![0; n])).collect::<Result<_, _>>()?;
        let elems = carriers.carrier(obj)?;
        let mut locate = Vec::with_capacity(elems.len());
        for (i, e) in elems.iter().enumerate() {
            let (k, inner) = Self::descend(&tree, obj, e, 0).expect("carrier element splits");
            let j = carriers.index_of(&inner, &summands[k]).expect("split element is valid");
            origin[k][j] = i;
            locate.push((k, j));
        }
        Ok(Split { tree, summands, locate, origin })
    }

    fn descend(tree: &SplitTree, obj: &ObjExpr, e: &Element, base: usize) -> Option<(usize, Element)> {
        match tree {
            SplitTree::Leaf => Some((base, e.clone())),
            SplitTree::Node { left, right, .. } => {
                let (side, inner) = top_split_elem(obj, e)?;
                let (_, a1, a2) = top_split(obj)?;
                match side {
                    Side::Left => Self::descend(left, &a1, &inner, base),
                    Side::Right => Self::descend(right, &a2, &inner, base + left.leaves()),
                }
            }
        }
    }

    /// The morphism `obj -> target` acting as `terms[k]` on summand `k`.
    pub fn copair(&self, terms: &[WitnessTerm], target: &ObjExpr) -> WitnessTerm {
        debug_assert_eq!(terms.len(), self.summands.len());
        let mut it = terms.iter();
        copair_tree(&self.tree, &mut it, target)
    }
}

impl SplitTree {
    fn leaves(&self) -> usize {
        match self {
            SplitTree::Leaf => 1,
            SplitTree::Node { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

fn copair_tree<'a>(tree: &SplitTree, terms: &mut impl Iterator<Item = &'a WitnessTerm>, target: &ObjExpr) -> WitnessTerm {
    use WitnessTerm as T;
    match tree {
        SplitTree::Leaf => terms.next().expect("one term per summand").clone(),
        SplitTree::Node { iso, left, right } => {
            let l = copair_tree(left, terms, target);
            let r = copair_tree(right, terms, target);
            let mut parts = vec![T::Codiag(target.clone()), T::coprod(l, r)];
            parts.extend(iso.clone());
            T::chain(parts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finrel::fixture::{carriers, pt, x, y};
    use crate::term::{eval_term, type_of, Env};

    #[test]
    fn split_is_an_isomorphism() {
        let c = carriers();
        let env = Env::new(c.clone());
        let objs = [
            ObjExpr::prod(x(), y()),
            ObjExpr::coprod(x(), ObjExpr::prod(y(), pt())),
            ObjExpr::prod(ObjExpr::coprod(x(), y()), ObjExpr::coprod(pt(), x())),
            ObjExpr::prod(ObjExpr::prod(ObjExpr::coprod(x(), y()), pt()), ObjExpr::coprod(y(), ObjExpr::coprod(x(), pt()))),
        ];
        for obj in objs {
            let s = Split::new(&c, &obj).unwrap();
            assert!(s.summands.iter().all(ObjExpr::is_tag_free));
            let total: usize = s.summands.iter().map(|p| c.carrier_len(p).unwrap()).sum();
            assert_eq!(total, c.carrier_len(&obj).unwrap());
            // Copairing the identity-like injections recovers each element's location.
            let target = s.summands.iter().skip(1).fold(s.summands[0].clone(), |acc, p| ObjExpr::coprod(acc, p.clone()));
            let inj: Vec<WitnessTerm> = (0..s.summands.len()).map(|k| inject(&s.summands, k)).collect();
            let t = s.copair(&inj, &target);
            assert_eq!(type_of(&t, &env).unwrap(), (obj.clone(), target.clone()));
            let m = eval_term(&t, &env).unwrap();
            assert!(m.is_single_valued() && m.is_total(&c).unwrap());
            let elems = c.carrier(&obj).unwrap();
            let tgt = c.carrier(&target).unwrap();
            for (i, e) in elems.iter().enumerate() {
                let (k, j) = s.locate[i];
                assert_eq!(s.origin[k][j], i);
                let img = m.apply(e).unwrap();
                let expected = offset(&c, &s.summands, k) + j;
                assert_eq!(&tgt[expected], img);
            }
        }
    }

    /// Injection of summand `k` into the left-nested coproduct of all summands.
    fn inject(summands: &[ObjExpr], k: usize) -> WitnessTerm {
        let mut objs: Vec<ObjExpr> = vec![summands[0].clone()];
        for p in &summands[1..] {
            let last = objs.last().unwrap().clone();
            objs.push(ObjExpr::coprod(last, p.clone()));
        }
        let mut parts: Vec<WitnessTerm> =
            (k + 1..summands.len()).rev().map(|j| WitnessTerm::Inj1(objs[j - 1].clone(), summands[j].clone())).collect();
        if k > 0 {
            parts.push(WitnessTerm::Inj2(objs[k - 1].clone(), summands[k].clone()));
        }
        if parts.is_empty() {
            return WitnessTerm::Id(summands[0].clone());
        }
        WitnessTerm::chain(parts)
    }

    fn offset(c: &Carriers, summands: &[ObjExpr], k: usize) -> usize {
        summands[..k].iter().map(|p| c.carrier_len(p).unwrap()).sum()
    }
}
