//! Structural witness terms assembled from the primitive isomorphisms.

use crate::finrel::{power_obj, ObjExpr};
use crate::term::WitnessTerm as T;

/// A coproduct viewed as a binary tree over its summands.
#[derive(Debug, Clone)]
pub(crate) enum SumTree {
    Leaf(ObjExpr),
    Node(Box<SumTree>, Box<SumTree>),
}

impl SumTree {
    /// Left-nested: `((p1 + p2) + p3) + ...`.
    pub fn list(parts: impl IntoIterator<Item = ObjExpr>) -> SumTree {
        let mut it = parts.into_iter();
        let first = SumTree::Leaf(it.next().expect("at least one summand"));
        it.fold(first, |acc, p| SumTree::Node(Box::new(acc), Box::new(SumTree::Leaf(p))))
    }

    /// Summands of a truncated star `a^1 + ... + a^n`.
    pub fn star(a: &ObjExpr, n: usize) -> SumTree {
        SumTree::list((1..=n).map(|k| power_obj(a, k)))
    }

    pub fn obj(&self) -> ObjExpr {
        match self {
            SumTree::Leaf(o) => o.clone(),
            SumTree::Node(l, r) => ObjExpr::coprod(l.obj(), r.obj()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SumTree::Leaf(_) => 1,
            SumTree::Node(l, r) => l.len() + r.len(),
        }
    }

    pub fn leaves(&self) -> Vec<ObjExpr> {
        match self {
            SumTree::Leaf(o) => vec![o.clone()],
            SumTree::Node(l, r) => {
                let mut v = l.leaves();
                v.extend(r.leaves());
                v
            }
        }
    }

    /// Injection of summand `i`.
    pub fn inj(&self, i: usize) -> T {
        let mut parts = Vec::new();
        let mut cur = self;
        let mut i = i;
        while let SumTree::Node(l, r) = cur {
            if i < l.len() {
                parts.push(T::Inj1(l.obj(), r.obj()));
                cur = l;
            } else {
                parts.push(T::Inj2(l.obj(), r.obj()));
                i -= l.len();
                cur = r;
            }
        }
        if parts.is_empty() {
            T::Id(cur.obj())
        } else {
            T::chain(parts)
        }
    }

    /// The map acting as `f(i, summand_i)` on summand `i`.
    pub fn copair(&self, target: &ObjExpr, f: &mut impl FnMut(usize, &ObjExpr) -> T) -> T {
        self.copair_from(0, target, f)
    }

    fn copair_from(&self, base: usize, target: &ObjExpr, f: &mut impl FnMut(usize, &ObjExpr) -> T) -> T {
        match self {
            SumTree::Leaf(o) => f(base, o),
            SumTree::Node(l, r) => {
                let lt = l.copair_from(base, target, f);
                let rt = r.copair_from(base + l.len(), target, f);
                T::comp(T::Codiag(target.clone()), T::coprod(lt, rt))
            }
        }
    }

    /// The coproduct of the maps `f(i, summand_i)`, shaped like `self`.
    pub fn map(&self, f: &mut impl FnMut(usize, &ObjExpr) -> T) -> T {
        self.map_from(0, f)
    }

    fn map_from(&self, base: usize, f: &mut impl FnMut(usize, &ObjExpr) -> T) -> T {
        match self {
            SumTree::Leaf(o) => f(base, o),
            SumTree::Node(l, r) => T::coprod(l.map_from(base, f), r.map_from(base + l.len(), f)),
        }
    }
}

/// The map `x.obj * y.obj -> target` acting as `f(i, j, x_i, y_j)` on
/// `x_i * y_j`.
pub(crate) fn copair_prod(
    x: &SumTree,
    y: &SumTree,
    target: &ObjExpr,
    f: &mut impl FnMut(usize, usize, &ObjExpr, &ObjExpr) -> T,
) -> T {
    copair_prod_from(x, 0, y, 0, target, f)
}

fn copair_prod_from(
    x: &SumTree,
    xi: usize,
    y: &SumTree,
    yi: usize,
    target: &ObjExpr,
    f: &mut impl FnMut(usize, usize, &ObjExpr, &ObjExpr) -> T,
) -> T {
    match (x, y) {
        (SumTree::Node(l, r), _) => {
            let (lo, ro, yo) = (l.obj(), r.obj(), y.obj());
            let lt = copair_prod_from(l, xi, y, yi, target, f);
            let rt = copair_prod_from(r, xi + l.len(), y, yi, target, f);
            T::chain([
                T::Codiag(target.clone()),
                T::coprod(lt, rt),
                T::coprod(T::Comm(yo.clone(), lo.clone()), T::Comm(yo.clone(), ro.clone())),
                T::distr(&yo, &lo, &ro, false),
                T::Comm(x.obj(), yo),
            ])
        }
        (SumTree::Leaf(xo), SumTree::Node(l, r)) => {
            let lt = copair_prod_from(x, xi, l, yi, target, f);
            let rt = copair_prod_from(x, xi, r, yi + l.len(), target, f);
            T::chain([T::Codiag(target.clone()), T::coprod(lt, rt), T::distr(xo, &l.obj(), &r.obj(), false)])
        }
        (SumTree::Leaf(xo), SumTree::Leaf(yo)) => f(xi, yi, xo, yo),
    }
}

/// `t * t * ... * t`, left-nested, `n >= 1` factors.
pub(crate) fn power_term(t: &T, n: usize) -> T {
    let mut acc = t.clone();
    for _ in 1..n {
        acc = T::prod(acc, t.clone());
    }
    acc
}

/// `(p * q) * (r * s) -> (p * r) * (q * s)`.
pub(crate) fn middle_four(p: &ObjExpr, q: &ObjExpr, r: &ObjExpr, s: &ObjExpr) -> T {
    let id = |o: &ObjExpr| T::Id(o.clone());
    T::chain([
        T::assoc(p, r, &ObjExpr::prod(q.clone(), s.clone()), true),
        T::prod(id(p), T::assoc(r, q, s, false)),
        T::prod(id(p), T::prod(T::Comm(q.clone(), r.clone()), id(s))),
        T::prod(id(p), T::assoc(q, r, s, true)),
        T::assoc(p, q, &ObjExpr::prod(r.clone(), s.clone()), false),
    ])
}

/// `a^n * d^n -> (a * d)^n`.
pub(crate) fn shuffle(a: &ObjExpr, d: &ObjExpr, n: usize) -> T {
    let ad = ObjExpr::prod(a.clone(), d.clone());
    if n == 1 {
        return T::Id(ad);
    }
    T::comp(
        T::prod(shuffle(a, d, n - 1), T::Id(ad)),
        middle_four(&power_obj(a, n - 1), a, &power_obj(d, n - 1), d),
    )
}

/// `a^p * a^q -> a^(p+q)`.
pub(crate) fn flatten(a: &ObjExpr, p: usize, q: usize) -> T {
    if q == 1 {
        return T::Id(power_obj(a, p + 1));
    }
    T::comp(
        T::prod(flatten(a, p, q - 1), T::Id(a.clone())),
        T::assoc(&power_obj(a, p), &power_obj(a, q - 1), a, true),
    )
}

/// `a^(p+q) -> a^p * a^q`.
pub(crate) fn unflatten(a: &ObjExpr, p: usize, q: usize) -> T {
    if q == 1 {
        return T::Id(power_obj(a, p + 1));
    }
    T::comp(
        T::assoc(&power_obj(a, p), &power_obj(a, q - 1), a, false),
        T::prod(unflatten(a, p, q - 1), T::Id(a.clone())),
    )
}

/// Left-nested product of the powers `a^t1 * ... * a^tm`.
#[cfg(test)]
pub(crate) fn powers_obj(a: &ObjExpr, ts: &[usize]) -> ObjExpr {
    let mut acc = power_obj(a, ts[0]);
    for &t in &ts[1..] {
        acc = ObjExpr::prod(acc, power_obj(a, t));
    }
    acc
}

/// `a^t1 * ... * a^tm -> a^(t1 + ... + tm)`.
pub(crate) fn flatten_multi(a: &ObjExpr, ts: &[usize]) -> T {
    let m = ts.len();
    if m == 1 {
        return T::Id(power_obj(a, ts[0]));
    }
    let prefix: usize = ts[..m - 1].iter().sum();
    T::comp(flatten(a, prefix, ts[m - 1]), T::prod(flatten_multi(a, &ts[..m - 1]), T::Id(power_obj(a, ts[m - 1]))))
}

/// `a^(t1 + ... + tm) -> a^t1 * ... * a^tm`.
pub(crate) fn unflatten_multi(a: &ObjExpr, ts: &[usize]) -> T {
    let m = ts.len();
    if m == 1 {
        return T::Id(power_obj(a, ts[0]));
    }
    let prefix: usize = ts[..m - 1].iter().sum();
    T::comp(T::prod(unflatten_multi(a, &ts[..m - 1]), T::Id(power_obj(a, ts[m - 1]))), unflatten(a, prefix, ts[m - 1]))
}

/// The isomorphism `(s.obj)^m -> L`, where `L` is the left-nested coproduct
/// of `s_t1 * ... * s_tm` over all index tuples in lexicographic order.
/// Returns the term and the tuples.
pub(crate) fn distribute_power(s: &SumTree, m: usize) -> (T, Vec<Vec<usize>>, SumTree) {
    let leaves = s.leaves();
    if m == 1 {
        let tuples = (0..leaves.len()).map(|i| vec![i]).collect();
        return (T::Id(s.obj()), tuples, s.clone());
    }
    let (prev, prev_tuples, prev_tree) = distribute_power(s, m - 1);
    let mut tuples = Vec::new();
    let mut parts = Vec::new();
    let prev_leaves = prev_tree.leaves();
    for (t, po) in prev_tuples.iter().zip(&prev_leaves) {
        for (j, so) in leaves.iter().enumerate() {
            let mut t = t.clone();
            t.push(j);
            tuples.push(t);
            parts.push(ObjExpr::prod(po.clone(), so.clone()));
        }
    }
    let tree = SumTree::list(parts);
    let target = tree.obj();
    let n = leaves.len();
    let spread = copair_prod(&prev_tree, s, &target, &mut |i, j, _, _| tree.inj(i * n + j));
    (T::comp(spread, T::prod(prev, T::Id(s.obj()))), tuples, tree)
}

/// The retraction of `tree.obj` onto summand `i`: identity there, the
/// connecting morphism elsewhere.
pub(crate) fn retract(tree: &SumTree, i: usize) -> T {
    let leaves = tree.leaves();
    let target = leaves[i].clone();
    tree.copair(&target, &mut |j, o| if j == i { T::Id(o.clone()) } else { T::Conn(o.clone(), target.clone()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finrel::fixture::{self, pt, x, y, z};
    use crate::finrel::SearchProblem;
    use crate::term::{eval_term, type_of, Env};

    fn env() -> Env {
        Env::new(fixture::carriers())
    }

    fn is_iso(t: &T, env: &Env) -> bool {
        let m = eval_term(t, env).unwrap();
        let (s, d) = type_of(t, env).unwrap();
        let c = &env.carriers;
        m.is_single_valued()
            && m.is_total(c).unwrap()
            && m.len() == c.carrier_len(&d).unwrap()
            && m.graph().iter().map(|(_, y)| y).collect::<std::collections::BTreeSet<_>>().len() == m.len()
            && c.carrier_len(&s).unwrap() == m.len()
    }

    #[test]
    fn isomorphisms_typecheck_and_are_bijective() {
        let env = env();
        let (a, d) = (x(), y());
        let cases = [
            (middle_four(&x(), &y(), &z(), &pt()), (ObjExpr::prod(ObjExpr::prod(x(), y()), ObjExpr::prod(z(), pt())), ObjExpr::prod(ObjExpr::prod(x(), z()), ObjExpr::prod(y(), pt())))),
            (shuffle(&a, &d, 3), (ObjExpr::prod(power_obj(&a, 3), power_obj(&d, 3)), power_obj(&ObjExpr::prod(a.clone(), d.clone()), 3))),
            (flatten(&a, 2, 3), (ObjExpr::prod(power_obj(&a, 2), power_obj(&a, 3)), power_obj(&a, 5))),
            (unflatten(&a, 1, 3), (power_obj(&a, 4), ObjExpr::prod(power_obj(&a, 1), power_obj(&a, 3)))),
            (flatten_multi(&a, &[1, 2, 1]), (powers_obj(&a, &[1, 2, 1]), power_obj(&a, 4))),
            (unflatten_multi(&a, &[2, 1, 2]), (power_obj(&a, 5), powers_obj(&a, &[2, 1, 2]))),
        ];
        for (t, ty) in cases {
            assert_eq!(type_of(&t, &env).unwrap(), ty, "{t}");
            assert!(is_iso(&t, &env), "{t}");
        }
        let back = T::comp(unflatten_multi(&a, &[2, 1]), flatten_multi(&a, &[2, 1]));
        assert_eq!(eval_term(&back, &env).unwrap(), SearchProblem::identity(&env.carriers, &powers_obj(&a, &[2, 1])).unwrap());
    }

    #[test]
    fn sum_tree_maps() {
        let env = env();
        let tree = SumTree::list([x(), y(), z()]);
        for i in 0..3 {
            let r = T::comp(retract(&tree, i), tree.inj(i));
            let leaf = &tree.leaves()[i];
            assert_eq!(eval_term(&r, &env).unwrap(), SearchProblem::identity(&env.carriers, leaf).unwrap());
        }
        let ys = SumTree::list([pt(), x()]);
        let target = ObjExpr::coprod(ObjExpr::coprod(x(), y()), z());
        let t = copair_prod(&tree, &ys, &target, &mut |i, _, xo, yo| {
            T::comp(tree.inj(i), T::Proj1(xo.clone(), yo.clone()))
        });
        assert_eq!(type_of(&t, &env).unwrap(), (ObjExpr::prod(tree.obj(), ys.obj()), target.clone()));
        let proj = T::Proj1(tree.obj(), ys.obj());
        assert_eq!(eval_term(&t, &env).unwrap(), eval_term(&proj, &env).unwrap());
        let star = SumTree::star(&x(), 2);
        let (d, tuples, l) = distribute_power(&star, 2);
        assert_eq!(tuples, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(type_of(&d, &env).unwrap(), (ObjExpr::prod(star.obj(), star.obj()), l.obj()));
        assert!(is_iso(&d, &env));
    }
}
