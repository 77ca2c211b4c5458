//! Certificates assembled from the witnesses in the structural proofs.
//!
//! Derived problems are registered in the environment under canonical names
//! so that certificates can refer to them and to their domains.

use super::build::{
    copair_prod, distribute_power, flatten_multi, middle_four, power_term, retract, shuffle, unflatten_multi, SumTree,
};
use super::{lookup, require_valid, Kind, ReduceError, ReductionCert, Result};
use crate::finrel::{coproduct_m, oplus, power_obj, product_m, star_trunc, ObjExpr, SearchProblem, Side};
use crate::term::{Env, WitnessTerm as T};

pub fn sup_name(f: &str, g: &str) -> String {
    format!("sup{{{f},{g}}}")
}

/// Name of `f ⊕ g`, the infimum.
pub fn inf_name(f: &str, g: &str) -> String {
    format!("inf{{{f},{g}}}")
}

pub fn prod_name(f: &str, g: &str) -> String {
    format!("prod{{{f},{g}}}")
}

pub fn star_name(f: &str, n: usize) -> String {
    format!("star{n}{{{f}}}")
}

fn register(env: &mut Env, name: String, p: SearchProblem) -> Result<String> {
    env.ensure_problem(&name, p)?;
    Ok(name)
}

fn get(env: &Env, name: &str) -> Result<SearchProblem> {
    lookup(env, name).cloned()
}

fn id(o: &ObjExpr) -> T {
    T::Id(o.clone())
}

/// Registers the left-nested supremum of `names` and returns its name.
fn register_sup_family(env: &mut Env, names: &[&str]) -> Result<String> {
    let mut acc = names[0].to_string();
    for n in &names[1..] {
        let p = coproduct_m(&get(env, &acc)?, &get(env, n)?);
        acc = register(env, sup_name(&acc, n), p)?;
    }
    Ok(acc)
}

/// Registers `f ⊔ g` under its canonical name.
pub fn register_sup(env: &mut Env, f: &str, g: &str) -> Result<String> {
    register_sup_family(env, &[f, g])
}

/// Registers `f ⊕ g` under its canonical name.
pub fn register_inf(env: &mut Env, f: &str, g: &str) -> Result<String> {
    let p = oplus(&get(env, f)?, &get(env, g)?);
    register(env, inf_name(f, g), p)
}

/// Registers a derived problem from its canonical name (`sup{f,g}`,
/// `inf{f,g}`, `prod{f,g}`, `starN{f}`, nested freely). Plain names must
/// already be bound.
pub fn ensure_derived(env: &mut Env, name: &str) -> Result<()> {
    if lookup(env, name).is_ok() {
        return Ok(());
    }
    let unknown = || ReduceError::UnknownProblem(name.to_string());
    let open = name.find('{').ok_or_else(unknown)?;
    let (head, body) = (&name[..open], name[open + 1..].strip_suffix('}').ok_or_else(unknown)?);
    let mut depth = 0usize;
    let mut split = None;
    for (i, ch) in body.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => depth = depth.checked_sub(1).ok_or_else(unknown)?,
            ',' if depth == 0 && split.is_some() => return Err(unknown()),
            ',' if depth == 0 => split = Some(i),
            _ => {}
        }
    }
    if depth != 0 {
        return Err(unknown());
    }
    match (head, split) {
        ("sup" | "inf" | "prod", Some(i)) => {
            let (f, g) = (&body[..i], &body[i + 1..]);
            ensure_derived(env, f)?;
            ensure_derived(env, g)?;
            let (fp, gp) = (get(env, f)?, get(env, g)?);
            let p = match head {
                "sup" => coproduct_m(&fp, &gp),
                "inf" => oplus(&fp, &gp),
                _ => product_m(&fp, &gp),
            };
            register(env, name.to_string(), p).map(|_| ())
        }
        (star, None) if star.len() > 4 && star.starts_with("star") => {
            let n: usize = star[4..].parse().map_err(|_| unknown())?;
            ensure_derived(env, body)?;
            let made = register_star(env, body, n)?;
            if made == name {
                Ok(())
            } else {
                Err(unknown())
            }
        }
        _ => Err(unknown()),
    }
}

pub(crate) fn register_star(env: &mut Env, f: &str, n: usize) -> Result<String> {
    if n == 0 {
        return Err(ReduceError::Precondition("star truncation needs N >= 1".into()));
    }
    let p = star_trunc(&get(env, f)?, n)?;
    register(env, star_name(f, n), p)
}

/// `f ≤_sm f` with identities.
pub fn refl_cert(env: &Env, f: &str) -> Result<ReductionCert> {
    let p = lookup(env, f)?;
    Ok(ReductionCert::new(Kind::Sm, f, f, id(p.dst()), id(p.src())))
}

/// `f ≤_sm g` implies `f ≤_m g`: the post-processor ignores the instance.
pub fn sm_to_m(c: &ReductionCert, env: &Env) -> Result<ReductionCert> {
    require_valid(c, env)?;
    to_m(c, env)
}

fn to_m(c: &ReductionCert, env: &Env) -> Result<ReductionCert> {
    if c.kind == Kind::M {
        return Ok(c.clone());
    }
    let f = lookup(env, &c.f)?;
    let g = lookup(env, &c.g)?;
    let h = T::comp(c.h.clone(), T::Proj2(f.src().clone(), g.dst().clone()));
    Ok(ReductionCert::new(Kind::M, &c.f, &c.g, h, c.k.clone()))
}

/// From `f ≤ g` (F, G) and `g ≤ h` (H, K): `M = F ∘ (id × H) ∘ a ∘ (((id × G) ∘ Δ) × id)`
/// and `N = K ∘ G`.
pub fn trans_cert(c1: &ReductionCert, c2: &ReductionCert, env: &Env) -> Result<ReductionCert> {
    if c1.g != c2.f {
        return Err(ReduceError::Mismatch(format!("middle problems `{}` and `{}` differ", c1.g, c2.f)));
    }
    require_valid(c1, env)?;
    require_valid(c2, env)?;
    let (c1, c2) = (to_m(c1, env)?, to_m(c2, env)?);
    let f = lookup(env, &c1.f)?;
    let g = lookup(env, &c1.g)?;
    let h = lookup(env, &c2.g)?;
    let (a, b, q) = (f.src(), g.src(), h.dst());
    let m = T::chain([
        c1.h.clone(),
        T::prod(id(a), c2.h.clone()),
        T::assoc(a, b, q, false),
        T::prod(T::comp(T::prod(id(a), c1.k.clone()), T::Diag(a.clone())), id(q)),
    ]);
    let n = T::comp(c2.k.clone(), c1.k.clone());
    Ok(ReductionCert::new(Kind::M, &c1.f, &c2.g, m, n))
}

/// `f_index ≤_sm f_0 ⊔ f_1 ⊔ ...` via the injection and its retraction.
pub fn sup_inj_cert(env: &mut Env, names: &[&str], index: usize) -> Result<ReductionCert> {
    if index >= names.len() {
        return Err(ReduceError::Precondition(format!("index {index} outside a family of {}", names.len())));
    }
    let sup = register_sup_family(env, names)?;
    let probs: Vec<SearchProblem> = names.iter().map(|n| get(env, n)).collect::<Result<_>>()?;
    let doms = SumTree::list(probs.iter().map(|p| p.src().clone()));
    let cods = SumTree::list(probs.iter().map(|p| p.dst().clone()));
    Ok(ReductionCert::new(Kind::Sm, names[index], sup, retract(&cods, index), doms.inj(index)))
}

/// From `f_i ≤_m g` for every member: `f_0 ⊔ f_1 ⊔ ... ≤_m g`, through
/// `⊔ f_i ≤_m g ⊔ g` and `g ⊔ g ≤_m g`.
pub fn sup_univ_cert(env: &mut Env, certs: &[ReductionCert]) -> Result<ReductionCert> {
    let Some(first) = certs.first() else {
        return Err(ReduceError::Precondition("empty family".into()));
    };
    for c in certs {
        if c.g != first.g {
            return Err(ReduceError::Mismatch(format!("targets `{}` and `{}` differ", first.g, c.g)));
        }
        require_valid(c, env)?;
    }
    let mut acc = to_m(first, env)?;
    for c in &certs[1..] {
        acc = sup_univ_pair(env, &acc, &to_m(c, env)?)?;
    }
    Ok(acc)
}

fn sup_univ_pair(env: &mut Env, c1: &ReductionCert, c2: &ReductionCert) -> Result<ReductionCert> {
    let (f1, f2, g) = (get(env, &c1.f)?, get(env, &c2.f)?, get(env, &c1.g)?);
    let lhs = register_sup_family(env, &[&c1.f, &c2.f])?;
    let gg = register_sup_family(env, &[&c1.g, &c1.g])?;
    let (a1, a2, b, d) = (f1.src(), f2.src(), g.src(), g.dst());
    let x = SumTree::list([a1.clone(), a2.clone()]);
    let xd = SumTree::list([ObjExpr::prod(a1.clone(), d.clone()), ObjExpr::prod(a2.clone(), d.clone())]);
    let s = copair_prod(&x, &SumTree::Leaf(d.clone()), &xd.obj(), &mut |i, _, _, _| xd.inj(i));
    let a = T::comp(T::coprod(s.clone(), s), T::distr(&x.obj(), d, d, false));
    let h4 = T::chain([T::coprod(c1.h.clone(), c2.h.clone()), T::Codiag(xd.obj()), a]);
    let part4 = ReductionCert::new(Kind::M, &lhs, &gg, h4, T::coprod(c1.k.clone(), c2.k.clone()));
    let bb = ObjExpr::coprod(b.clone(), b.clone());
    let a3 = T::chain([
        T::distr(b, d, d, true),
        T::coprod(T::Comm(d.clone(), b.clone()), T::Comm(d.clone(), b.clone())),
        T::distr(d, b, b, false),
        T::Comm(bb, d.clone()),
    ]);
    let h3 = T::comp(T::Proj2(b.clone(), ObjExpr::coprod(d.clone(), d.clone())), a3);
    let part3 = ReductionCert::new(Kind::M, &gg, &c1.g, h3, T::Codiag(b.clone()));
    trans_cert(&part4, &part3, env)
}

/// `f ⊕ g ≤_sm f` (side `Left`) or `f ⊕ g ≤_sm g` (side `Right`).
pub fn inf_proj_cert(env: &mut Env, f: &str, g: &str, side: Side) -> Result<ReductionCert> {
    let (fp, gp) = (get(env, f)?, get(env, g)?);
    let inf = register(env, inf_name(f, g), oplus(&fp, &gp))?;
    let (a, b, c, d) = (fp.src(), gp.src(), fp.dst(), gp.dst());
    let dom = |n: &str| T::dom(T::gen(n));
    Ok(match side {
        Side::Left => {
            let k = T::comp(T::Proj1(a.clone(), b.clone()), T::prod(id(a), dom(g)));
            ReductionCert::new(Kind::Sm, inf, f, T::Inj1(c.clone(), d.clone()), k)
        }
        Side::Right => {
            let k = T::comp(T::Proj2(a.clone(), b.clone()), T::prod(dom(f), id(b)));
            ReductionCert::new(Kind::Sm, inf, g, T::Inj2(c.clone(), d.clone()), k)
        }
    })
}

/// From `h ≤_m f` and `h ≤_m g`: `h ≤_m f ⊕ g` with `∇ ∘ (H1 + H2) ∘ a` and
/// `(K1 × K2) ∘ Δ`, each `K_i` first restricted to `dom h`.
pub fn inf_univ_cert(env: &mut Env, c1: &ReductionCert, c2: &ReductionCert) -> Result<ReductionCert> {
    if c1.f != c2.f {
        return Err(ReduceError::Mismatch(format!("sources `{}` and `{}` differ", c1.f, c2.f)));
    }
    require_valid(c1, env)?;
    require_valid(c2, env)?;
    let (c1, c2) = (to_m(c1, env)?, to_m(c2, env)?);
    let (h, f, g) = (get(env, &c1.f)?, get(env, &c1.g)?, get(env, &c2.g)?);
    let inf = register(env, inf_name(&c1.g, &c2.g), oplus(&f, &g))?;
    let e = h.src();
    let restrict = |k: &T| T::comp(k.clone(), T::dom(T::gen(c1.f.clone())));
    let k = T::comp(T::prod(restrict(&c1.k), restrict(&c2.k)), T::Diag(e.clone()));
    let hh = T::chain([T::Codiag(h.dst().clone()), T::coprod(c1.h.clone(), c2.h.clone()), T::distr(e, f.dst(), g.dst(), false)]);
    Ok(ReductionCert::new(Kind::M, &c1.f, inf, hh, k))
}

/// Both directions of `f ⊕ (g1 ⊔ g2) ≡ (f ⊕ g1) ⊔ (f ⊕ g2)`: the first by the
/// distributivity isomorphism, the second from the lattice combinators.
pub fn distrib_cert(env: &mut Env, f: &str, g1: &str, g2: &str) -> Result<(ReductionCert, ReductionCert)> {
    let (fp, p1, p2) = (get(env, f)?, get(env, g1)?, get(env, g2)?);
    let sup_g = register_sup_family(env, &[g1, g2])?;
    let lhs = register(env, inf_name(f, &sup_g), oplus(&fp, &get(env, &sup_g)?))?;
    let i1 = register(env, inf_name(f, g1), oplus(&fp, &p1))?;
    let i2 = register(env, inf_name(f, g2), oplus(&fp, &p2))?;
    let rhs = register_sup_family(env, &[&i1, &i2])?;
    let (a, c) = (fp.src(), fp.dst());
    let (d1, d2) = (p1.dst(), p2.dst());
    let target = ObjExpr::coprod(c.clone(), ObjExpr::coprod(d1.clone(), d2.clone()));
    let b = T::comp(
        T::Codiag(target),
        T::coprod(
            T::coprod(id(c), T::Inj1(d1.clone(), d2.clone())),
            T::coprod(id(c), T::Inj2(d1.clone(), d2.clone())),
        ),
    );
    let forward = ReductionCert::new(Kind::Sm, &lhs, &rhs, b, T::distr(a, p1.src(), p2.src(), false));
    let mut parts = Vec::new();
    for (i, gi) in [(0, g1), (1, g2)] {
        let to_f = inf_proj_cert(env, f, gi, Side::Left)?;
        let to_gi = inf_proj_cert(env, f, gi, Side::Right)?;
        let gi_up = sup_inj_cert(env, &[g1, g2], i)?;
        let to_sup = trans_cert(&to_gi, &gi_up, env)?;
        parts.push(inf_univ_cert(env, &to_f, &to_sup)?);
    }
    let backward = sup_univ_cert(env, &parts)?;
    Ok((forward, backward))
}

/// From `f1 ≤_m g1` and `f2 ≤_m g2`: `f1 × f2 ≤_m g1 × g2` with
/// `(H1 × H2) ∘ a` and `K1 × K2`.
pub fn prod_cert(env: &mut Env, c1: &ReductionCert, c2: &ReductionCert) -> Result<ReductionCert> {
    require_valid(c1, env)?;
    require_valid(c2, env)?;
    let (c1, c2) = (to_m(c1, env)?, to_m(c2, env)?);
    let (f1, f2, g1, g2) = (get(env, &c1.f)?, get(env, &c2.f)?, get(env, &c1.g)?, get(env, &c2.g)?);
    let lhs = register(env, prod_name(&c1.f, &c2.f), product_m(&f1, &f2))?;
    let rhs = register(env, prod_name(&c1.g, &c2.g), product_m(&g1, &g2))?;
    let a = middle_four(f1.src(), f2.src(), g1.dst(), g2.dst());
    let h = T::comp(T::prod(c1.h.clone(), c2.h.clone()), a);
    Ok(ReductionCert::new(Kind::M, lhs, rhs, h, T::prod(c1.k.clone(), c2.k.clone())))
}

/// `f ≤_m f^1 ⊔ ... ⊔ f^n`.
pub fn star_intro_cert(env: &mut Env, f: &str, n: usize) -> Result<ReductionCert> {
    let star = register_star(env, f, n)?;
    let p = get(env, f)?;
    let doms = SumTree::star(p.src(), n);
    let cods = SumTree::star(p.dst(), n);
    let sm = ReductionCert::new(Kind::Sm, f, star, retract(&cods, 0), doms.inj(0));
    to_m(&sm, env)
}

/// From `f ≤_m g`: the truncated stars reduce, with `K^n` on level `n` and
/// `H^n` after regrouping `A^n × D^n` as `(A × D)^n`.
pub fn star_mono_cert(env: &mut Env, c: &ReductionCert, n: usize) -> Result<ReductionCert> {
    require_valid(c, env)?;
    let c = to_m(c, env)?;
    let lhs = register_star(env, &c.f, n)?;
    let rhs = register_star(env, &c.g, n)?;
    let (f, g) = (get(env, &c.f)?, get(env, &c.g)?);
    let (a, cc, d) = (f.src(), f.dst(), g.dst());
    let ta = SumTree::star(a, n);
    let tc = SumTree::star(cc, n);
    let td = SumTree::star(d, n);
    let k = ta.map(&mut |i, _| power_term(&c.k, i + 1));
    let target = tc.obj();
    let h = copair_prod(&ta, &td, &target, &mut |i, j, xo, yo| {
        if i == j {
            T::chain([tc.inj(i), power_term(&c.h, i + 1), shuffle(a, d, i + 1)])
        } else {
            T::Conn(ObjExpr::prod(xo.clone(), yo.clone()), target.clone())
        }
    });
    Ok(ReductionCert::new(Kind::M, lhs, rhs, h, k))
}

/// `(f^{≤n})^{≤m} ≤_m f^{≤nm}` with the truncated `∇*` and `χ`.
pub fn star_collapse_cert(env: &mut Env, f: &str, n: usize, m: usize) -> Result<ReductionCert> {
    let inner = register_star(env, f, n)?;
    let lhs = register_star(env, &inner, m)?;
    let rhs = register_star(env, f, n * m)?;
    let p = get(env, f)?;
    let (a, c) = (p.src(), p.dst());
    let s = SumTree::star(a, n);
    let x = SumTree::star(&s.obj(), m);
    let t = SumTree::star(a, n * m);
    let tobj = t.obj();
    let k = x.copair(&tobj, &mut |mi, _| {
        let (d, tuples, l) = distribute_power(&s, mi + 1);
        let collapse = l.copair(&tobj, &mut |ti, _| {
            let ts: Vec<usize> = tuples[ti].iter().map(|i| i + 1).collect();
            T::comp(t.inj(ts.iter().sum::<usize>() - 1), flatten_multi(a, &ts))
        });
        T::comp(collapse, d)
    });
    let sc = SumTree::star(c, n);
    let y = SumTree::star(c, n * m);
    let z = SumTree::star(&sc.obj(), m);
    let zobj = z.obj();
    let h = copair_prod(&x, &y, &zobj, &mut |mi, ki, _, yo| {
        let (d, tuples, l) = distribute_power(&s, mi + 1);
        let inner = copair_prod(&l, &SumTree::Leaf(yo.clone()), &zobj, &mut |ti, _, lo, _| {
            let ts: Vec<usize> = tuples[ti].iter().map(|i| i + 1).collect();
            if ts.iter().sum::<usize>() == ki + 1 {
                let embed = ts.iter().map(|&t| sc.inj(t - 1)).reduce(T::prod).expect("m >= 1");
                T::chain([z.inj(mi), embed, unflatten_multi(c, &ts), T::Proj2(lo.clone(), yo.clone())])
            } else {
                T::Conn(ObjExpr::prod(lo.clone(), yo.clone()), zobj.clone())
            }
        });
        T::comp(inner, T::prod(d, id(yo)))
    });
    debug_assert_eq!(power_obj(a, 1), *a);
    Ok(ReductionCert::new(Kind::M, lhs, rhs, h, k))
}
