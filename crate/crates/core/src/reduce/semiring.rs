//! Certificates for the semiring laws of `⊔` and `×`, built from structural
//! isomorphisms. Every certificate is of kind `m`.

use serde::Serialize;

use super::combinators::{register_sup, sm_to_m, sup_inj_cert, sup_univ_cert};
use super::{lookup, prod_name, refl_cert, Kind, ReduceError, ReductionCert, Result};
use crate::finrel::{product_m, ObjExpr, SearchProblem};
use crate::term::{Env, WitnessTerm as T};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    SupIdempotent,
    SupAssociative,
    SupCommutative,
    SupUnit,
    ProdAssociative,
    ProdCommutative,
    ProdUnit,
    ProdZero,
    Distributive,
}

impl std::fmt::Display for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Law::SupIdempotent => "a ⊔ a = a",
            Law::SupAssociative => "(a ⊔ b) ⊔ c = a ⊔ (b ⊔ c)",
            Law::SupCommutative => "a ⊔ b = b ⊔ a",
            Law::SupUnit => "a ⊔ 0 = a",
            Law::ProdAssociative => "(a × b) × c = a × (b × c)",
            Law::ProdCommutative => "a × b = b × a",
            Law::ProdUnit => "a × 1 = a",
            Law::ProdZero => "a × 0 = 0",
            Law::Distributive => "a × (b ⊔ c) = (a × b) ⊔ (a × c)",
        })
    }
}

/// Both directions of one law instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawCerts {
    pub law: Law,
    pub forward: ReductionCert,
    pub backward: ReductionCert,
}

fn register_prod(env: &mut Env, f: &str, g: &str) -> Result<String> {
    let p = product_m(lookup(env, f)?, lookup(env, g)?);
    let name = prod_name(f, g);
    env.ensure_problem(&name, p)?;
    Ok(name)
}

fn sm(f: &str, g: &str, k: T, h: T) -> ReductionCert {
    ReductionCert::new(Kind::Sm, f, g, h, k)
}

/// `p + q -> q + p`.
fn swap_sum(p: &ObjExpr, q: &ObjExpr) -> T {
    T::comp(T::Codiag(ObjExpr::coprod(q.clone(), p.clone())), T::coprod(T::Inj2(q.clone(), p.clone()), T::Inj1(q.clone(), p.clone())))
}

/// `(p + q) + r -> p + (q + r)`.
fn assoc_sum(p: &ObjExpr, q: &ObjExpr, r: &ObjExpr) -> T {
    let qr = ObjExpr::coprod(q.clone(), r.clone());
    let tgt = ObjExpr::coprod(p.clone(), qr.clone());
    T::comp(
        T::Codiag(tgt.clone()),
        T::coprod(
            T::comp(
                T::Codiag(tgt.clone()),
                T::coprod(T::Inj1(p.clone(), qr.clone()), T::comp(T::Inj2(p.clone(), qr.clone()), T::Inj1(q.clone(), r.clone()))),
            ),
            T::comp(T::Inj2(p.clone(), qr.clone()), T::Inj2(q.clone(), r.clone())),
        ),
    )
}

/// `p + (q + r) -> (p + q) + r`.
fn unassoc_sum(p: &ObjExpr, q: &ObjExpr, r: &ObjExpr) -> T {
    let pq = ObjExpr::coprod(p.clone(), q.clone());
    let tgt = ObjExpr::coprod(pq.clone(), r.clone());
    T::comp(
        T::Codiag(tgt.clone()),
        T::coprod(
            T::comp(T::Inj1(pq.clone(), r.clone()), T::Inj1(p.clone(), q.clone())),
            T::comp(
                T::Codiag(tgt.clone()),
                T::coprod(T::comp(T::Inj1(pq.clone(), r.clone()), T::Inj2(p.clone(), q.clone())), T::Inj2(pq.clone(), r.clone())),
            ),
        ),
    )
}

/// `p + q -> p`, sending the (empty) right summand anywhere.
fn retract_left(p: &ObjExpr, q: &ObjExpr) -> T {
    T::comp(T::Codiag(p.clone()), T::coprod(T::Id(p.clone()), T::Conn(q.clone(), p.clone())))
}

/// Certificates for every semiring law at `a`, `b`, `c`, with `zero` an empty
/// problem and `one` the identity on a one-point object.
pub fn semiring_law_certs(env: &mut Env, a: &str, b: &str, c: &str, zero: &str, one: &str) -> Result<Vec<LawCerts>> {
    let (pa, pb, pc) = (lookup(env, a)?.clone(), lookup(env, b)?.clone(), lookup(env, c)?.clone());
    let (pz, p1) = (lookup(env, zero)?.clone(), lookup(env, one)?.clone());
    if !pz.is_empty() {
        return Err(ReduceError::Precondition(format!("{zero} is not empty")));
    }
    let point = env.carriers.carrier(p1.src())?;
    if point.len() != 1 || p1 != SearchProblem::identity(&env.carriers, p1.src())? {
        return Err(ReduceError::Precondition(format!("{one} is not the identity on a one-point object")));
    }
    let star = point[0].clone();
    let pt = p1.src().clone();
    let (sa, sb, sc, sz) = (pa.src(), pb.src(), pc.src(), pz.src());
    let (da, db, dc, dz) = (pa.dst(), pb.dst(), pc.dst(), pz.dst());
    let mut out = Vec::new();
    let mut push = |env: &Env, law, fwd: ReductionCert, bwd: ReductionCert| -> Result<()> {
        let lift = |c: ReductionCert| if c.kind == Kind::Sm { sm_to_m(&c, env) } else { Ok(c) };
        out.push(LawCerts { law, forward: lift(fwd)?, backward: lift(bwd)? });
        Ok(())
    };

    let ra = sm_to_m(&refl_cert(env, a)?, env)?;
    let down = sup_univ_cert(env, &[ra.clone(), ra])?;
    let up = sup_inj_cert(env, &[a, a], 0)?;
    push(env, Law::SupIdempotent, down, up)?;

    let ab = register_sup(env, a, b)?;
    let ab_c = register_sup(env, &ab, c)?;
    let bc = register_sup(env, b, c)?;
    let a_bc = register_sup(env, a, &bc)?;
    push(
        env,
        Law::SupAssociative,
        sm(&ab_c, &a_bc, assoc_sum(sa, sb, sc), unassoc_sum(da, db, dc)),
        sm(&a_bc, &ab_c, unassoc_sum(sa, sb, sc), assoc_sum(da, db, dc)),
    )?;

    let ba = register_sup(env, b, a)?;
    push(env, Law::SupCommutative, sm(&ab, &ba, swap_sum(sa, sb), swap_sum(db, da)), sm(&ba, &ab, swap_sum(sb, sa), swap_sum(da, db)))?;

    let az = register_sup(env, a, zero)?;
    push(
        env,
        Law::SupUnit,
        sm(&az, a, retract_left(sa, sz), T::Inj1(da.clone(), dz.clone())),
        sm(a, &az, T::Inj1(sa.clone(), sz.clone()), retract_left(da, dz)),
    )?;

    let pab = register_prod(env, a, b)?;
    let pab_c = register_prod(env, &pab, c)?;
    let pbc = register_prod(env, b, c)?;
    let pa_bc = register_prod(env, a, &pbc)?;
    push(
        env,
        Law::ProdAssociative,
        sm(&pab_c, &pa_bc, T::assoc(sa, sb, sc, false), T::assoc(da, db, dc, true)),
        sm(&pa_bc, &pab_c, T::assoc(sa, sb, sc, true), T::assoc(da, db, dc, false)),
    )?;

    let pba = register_prod(env, b, a)?;
    push(
        env,
        Law::ProdCommutative,
        sm(&pab, &pba, T::Comm(sa.clone(), sb.clone()), T::Comm(db.clone(), da.clone())),
        sm(&pba, &pab, T::Comm(sb.clone(), sa.clone()), T::Comm(da.clone(), db.clone())),
    )?;

    let a1 = register_prod(env, a, one)?;
    let pair_pt = |o: &ObjExpr| T::comp(T::prod(T::Id(o.clone()), T::Const(o.clone(), pt.clone(), star.clone())), T::Diag(o.clone()));
    push(
        env,
        Law::ProdUnit,
        sm(&a1, a, T::Proj1(sa.clone(), pt.clone()), pair_pt(da)),
        sm(a, &a1, pair_pt(sa), T::Proj1(da.clone(), pt.clone())),
    )?;

    let a0 = register_prod(env, a, zero)?;
    let (az_src, az_dst) = (ObjExpr::prod(sa.clone(), sz.clone()), ObjExpr::prod(da.clone(), dz.clone()));
    push(
        env,
        Law::ProdZero,
        sm(&a0, zero, T::Proj2(sa.clone(), sz.clone()), T::Conn(dz.clone(), az_dst.clone())),
        sm(zero, &a0, T::Conn(sz.clone(), az_src), T::Conn(az_dst, dz.clone())),
    )?;

    let a_sbc = register_prod(env, a, &bc)?;
    let pac = register_prod(env, a, c)?;
    let sum_prods = register_sup(env, &pab, &pac)?;
    push(
        env,
        Law::Distributive,
        sm(&a_sbc, &sum_prods, T::distr(sa, sb, sc, false), T::distr(da, db, dc, true)),
        sm(&sum_prods, &a_sbc, T::distr(sa, sb, sc, true), T::distr(da, db, dc, false)),
    )?;
    Ok(out)
}
