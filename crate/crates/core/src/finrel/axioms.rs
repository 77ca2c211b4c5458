//! Randomized evaluation of the p-category laws on `Rel`.
//!
//! Each case draws three atoms of size at most `max_atom_size`, objects of
//! depth at most one over them, and random relations. Every law is evaluated
//! exactly on the drawn instance.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ops::{compose, coproduct_m, dom_m, dom_via_composite, hom_inf, oplus, oplus_via_composite, product_m, structural, Structural};
use super::order::entails;
use super::{Carriers, Element, ObjExpr, Result, SearchProblem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawResult {
    pub name: &'static str,
    pub checked: usize,
    pub passed: usize,
    /// First failing instance, rendered.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub seed: u64,
    pub cases: usize,
    pub max_atom_size: usize,
    pub laws: Vec<LawResult>,
}

impl AxiomReport {
    pub fn violations(&self) -> usize {
        self.laws.iter().map(|l| l.checked - l.passed).sum()
    }

    pub fn all_pass(&self) -> bool {
        self.violations() == 0
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed={} cases={} max_atom_size={}", self.seed, self.cases, self.max_atom_size)?;
        for law in &self.laws {
            let status = if law.checked == law.passed { "ok" } else { "FAIL" };
            write!(f, "{status}\t{}\t{}/{}", law.name, law.passed, law.checked)?;
            if let Some(c) = &law.counterexample {
                write!(f, "\t{c}")?;
            }
            writeln!(f)?;
        }
        write!(f, "violations={}", self.violations())
    }
}

struct Tally {
    laws: Vec<LawResult>,
}

impl Tally {
    fn record(&mut self, name: &'static str, ok: bool, describe: impl FnOnce() -> String) {
        let idx = match self.laws.iter().position(|l| l.name == name) {
            Some(i) => i,
            None => {
                self.laws.push(LawResult { name, checked: 0, passed: 0, counterexample: None });
                self.laws.len() - 1
            }
        };
        let law = &mut self.laws[idx];
        law.checked += 1;
        if ok {
            law.passed += 1;
        } else if law.counterexample.is_none() {
            law.counterexample = Some(describe());
        }
    }

    fn eq(&mut self, name: &'static str, lhs: &SearchProblem, rhs: &SearchProblem) {
        self.record(name, lhs == rhs, || format!("{lhs} != {rhs}"));
    }

    fn leq(&mut self, name: &'static str, lhs: &SearchProblem, rhs: &SearchProblem) -> Result<()> {
        let w = entails(lhs, rhs)?;
        self.record(name, w.holds(), || format!("{lhs} not below {rhs}: {:?}", w.violation));
        Ok(())
    }
}

fn atom_sizes(rng: &mut ChaCha8Rng, max: usize) -> Carriers {
    let mut atoms = Vec::new();
    for name in ["A", "B", "C"] {
        // Empty atoms are rare but allowed.
        let n = if rng.gen_ratio(1, 12) { 0 } else { rng.gen_range(1..=max.max(1)) };
        atoms.push((name, (0..n).map(|i| format!("{}{i}", name.to_lowercase())).collect::<Vec<_>>()));
    }
    Carriers::new(atoms)
}

fn random_obj(rng: &mut ChaCha8Rng, depth: usize) -> ObjExpr {
    let atom = ObjExpr::atom(["A", "B", "C"][rng.gen_range(0..3)]);
    if depth == 0 || rng.gen_ratio(2, 3) {
        return atom;
    }
    let other = random_obj(rng, depth - 1);
    if rng.gen_bool(0.5) {
        ObjExpr::prod(atom, other)
    } else {
        ObjExpr::coprod(atom, other)
    }
}

/// A random relation; density is itself random so that sparse, partial and
/// dense relations all occur.
fn random_rel(rng: &mut ChaCha8Rng, c: &Carriers, src: &ObjExpr, dst: &ObjExpr) -> Result<SearchProblem> {
    let p = [0.15, 0.35, 0.6][rng.gen_range(0..3)];
    let xs = c.carrier(src)?;
    let ys = c.carrier(dst)?;
    let mut pairs = Vec::new();
    for x in xs.iter() {
        for y in ys.iter() {
            if rng.gen_bool(p) {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    SearchProblem::new(c, src.clone(), dst.clone(), pairs)
}

/// A random partial function; total when `total` is set.
fn random_fn(rng: &mut ChaCha8Rng, c: &Carriers, src: &ObjExpr, dst: &ObjExpr, total: bool) -> Result<SearchProblem> {
    let ys = c.carrier(dst)?;
    let mut pairs = Vec::new();
    for x in c.carrier(src)?.iter() {
        if ys.is_empty() || (!total && rng.gen_ratio(1, 4)) {
            continue;
        }
        pairs.push((x.clone(), ys[rng.gen_range(0..ys.len())].clone()));
    }
    SearchProblem::new(c, src.clone(), dst.clone(), pairs)
}

/// A random `f ⪯ g`: drops some instances of `g` and adds extra solutions.
fn random_coarsening(rng: &mut ChaCha8Rng, c: &Carriers, g: &SearchProblem) -> Result<SearchProblem> {
    let ys = c.carrier(g.dst())?;
    let mut pairs = Vec::new();
    for (x, sols) in g.as_map() {
        if rng.gen_ratio(1, 4) {
            continue;
        }
        pairs.extend(sols.iter().map(|y| (x.clone(), (*y).clone())));
        for y in ys.iter() {
            if rng.gen_ratio(1, 3) {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    SearchProblem::new(c, g.src().clone(), g.dst().clone(), pairs)
}

/// Canonical distributivity `(Y1 + Y2) * (Z + Z) -> ((Y1*Z) + (Y2*Z)) + ((Y1*Z) + (Y2*Z))`,
/// sending `<i:y, j:z>` to `j:(i:<y,z>)`.
fn coproduct_distributor(c: &Carriers, y1: &ObjExpr, y2: &ObjExpr, z: &ObjExpr) -> Result<SearchProblem> {
    let src = ObjExpr::prod(ObjExpr::coprod(y1.clone(), y2.clone()), ObjExpr::coprod(z.clone(), z.clone()));
    let inner = ObjExpr::coprod(ObjExpr::prod(y1.clone(), z.clone()), ObjExpr::prod(y2.clone(), z.clone()));
    let dst = ObjExpr::coprod(inner.clone(), inner);
    let mut graph = BTreeSet::new();
    for e in c.carrier(&src)?.iter() {
        let (l, r) = e.as_pair().expect("product element");
        let (i, y) = l.as_tag().expect("coproduct element");
        let (j, zz) = r.as_tag().expect("coproduct element");
        graph.insert((e.clone(), Element::tag(j, Element::tag(i, Element::pair(y.clone(), zz.clone())))));
    }
    Ok(SearchProblem::from_parts(src, dst, graph))
}

/// Runs the randomized law suite. Failures are report content.
pub fn verify_pcategory_axioms(seed: u64, cases: usize, max_atom_size: usize) -> Result<AxiomReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally { laws: Vec::new() };
    for _ in 0..cases {
        run_case(&mut rng, max_atom_size, &mut t)?;
    }
    Ok(AxiomReport { seed, cases, max_atom_size, laws: t.laws })
}

fn run_case(rng: &mut ChaCha8Rng, max: usize, t: &mut Tally) -> Result<()> {
    use Structural::*;
    let c = atom_sizes(rng, max);
    let (x, y, z) = (random_obj(rng, 1), random_obj(rng, 1), random_obj(rng, 1));
    let s = |k: Structural| structural(&c, &k);
    let id = |o: &ObjExpr| SearchProblem::identity(&c, o);
    let xy = ObjExpr::prod(x.clone(), y.clone());
    let yz = ObjExpr::prod(y.clone(), z.clone());

    // The six defining equations.
    let dx = s(Diag(x.clone()))?;
    t.eq("proj1_diag", &compose(&s(Proj1(x.clone(), x.clone()))?, &dx)?, &id(&x)?);
    t.eq("proj2_diag", &compose(&s(Proj2(x.clone(), x.clone()))?, &dx)?, &id(&x)?);
    let pp = product_m(&s(Proj1(x.clone(), y.clone()))?, &s(Proj2(x.clone(), y.clone()))?);
    t.eq("pair_of_projections", &compose(&pp, &s(Diag(xy.clone()))?)?, &id(&xy)?);
    let l3 = compose(&s(Proj1(x.clone(), y.clone()))?, &product_m(&id(&x)?, &s(Proj1(y.clone(), z.clone()))?))?;
    t.eq("proj1_inner_proj1", &l3, &s(Proj1(x.clone(), yz.clone()))?);
    let l4 = compose(&s(Proj1(x.clone(), z.clone()))?, &product_m(&id(&x)?, &s(Proj2(y.clone(), z.clone()))?))?;
    t.eq("proj1_inner_proj2", &l4, &s(Proj1(x.clone(), yz.clone()))?);
    let l5 = compose(&s(Proj2(x.clone(), z.clone()))?, &product_m(&s(Proj1(x.clone(), y.clone()))?, &id(&z)?))?;
    t.eq("proj2_outer_proj1", &l5, &s(Proj2(xy.clone(), z.clone()))?);
    let l6 = compose(&s(Proj2(y.clone(), z.clone()))?, &product_m(&s(Proj2(x.clone(), y.clone()))?, &id(&z)?))?;
    t.eq("proj2_outer_proj2", &l6, &s(Proj2(xy.clone(), z.clone()))?);

    // Category and functor laws.
    let f = random_rel(rng, &c, &x, &y)?;
    let g = random_rel(rng, &c, &y, &z)?;
    let w = random_obj(rng, 1);
    let h = random_rel(rng, &c, &z, &w)?;
    t.eq("compose_assoc", &compose(&h, &compose(&g, &f)?)?, &compose(&compose(&h, &g)?, &f)?);
    t.eq("left_identity", &compose(&id(&y)?, &f)?, &f);
    t.eq("right_identity", &compose(&f, &id(&x)?)?, &f);
    let f2 = random_rel(rng, &c, &z, &w)?;
    let g2 = random_rel(rng, &c, &w, &x)?;
    t.eq(
        "product_functor",
        &product_m(&compose(&g, &f)?, &compose(&g2, &f2)?),
        &compose(&product_m(&g, &g2), &product_m(&f, &f2))?,
    );
    t.eq(
        "coproduct_functor",
        &coproduct_m(&compose(&g, &f)?, &compose(&g2, &f2)?),
        &compose(&coproduct_m(&g, &g2), &coproduct_m(&f, &f2))?,
    );
    t.eq("product_identity", &product_m(&id(&x)?, &id(&y)?), &id(&xy)?);

    // Projections against diagonals, and domains.
    let fx = random_rel(rng, &c, &x, &y)?;
    let gx = random_rel(rng, &c, &x, &z)?;
    let paired = compose(&product_m(&fx, &gx), &s(Diag(x.clone()))?)?;
    t.eq("proj2_pairing", &compose(&s(Proj2(y.clone(), z.clone()))?, &paired)?, &compose(&gx, &dom_m(&fx))?);
    t.eq("proj1_pairing", &compose(&s(Proj1(y.clone(), z.clone()))?, &paired)?, &compose(&fx, &dom_m(&gx))?);
    t.eq("dom_composite", &dom_via_composite(&c, &fx)?, &dom_m(&fx));
    let sv = random_fn(rng, &c, &x, &y, false)?;
    t.eq(
        "diag_natural",
        &compose(&s(Diag(y.clone()))?, &sv)?,
        &compose(&product_m(&sv, &sv), &s(Diag(x.clone()))?)?,
    );
    t.eq("dom_codiag", &dom_m(&s(Codiag(x.clone()))?), &id(&ObjExpr::coprod(x.clone(), x.clone()))?);
    t.eq("dom_inj1", &dom_m(&s(Inj1(x.clone(), y.clone()))?), &id(&x)?);
    t.eq("dom_inj2", &dom_m(&s(Inj2(x.clone(), y.clone()))?), &id(&y)?);
    t.eq("codiag_retracts_inj", &compose(&s(Codiag(x.clone()))?, &s(Inj1(x.clone(), x.clone()))?)?, &id(&x)?);

    // Coproducts against diagonals.
    let (x1, x2) = (x.clone(), random_obj(rng, 1));
    let y2 = random_obj(rng, 0);
    let (f1, f2c) = (random_rel(rng, &c, &x1, &y)?, random_rel(rng, &c, &x2, &y2)?);
    let (g1, g2c) = (random_rel(rng, &c, &x1, &z)?, random_rel(rng, &c, &x2, &z)?);
    let x12 = ObjExpr::coprod(x1.clone(), x2.clone());
    let inner = ObjExpr::coprod(ObjExpr::prod(y.clone(), z.clone()), ObjExpr::prod(y2.clone(), z.clone()));
    let lhs = compose(
        &s(Codiag(inner))?,
        &compose(
            &coproduct_distributor(&c, &y, &y2, &z)?,
            &compose(&product_m(&coproduct_m(&f1, &f2c), &coproduct_m(&g1, &g2c)), &s(Diag(x12))?)?,
        )?,
    )?;
    let rhs = coproduct_m(
        &compose(&product_m(&f1, &g1), &s(Diag(x1.clone()))?)?,
        &compose(&product_m(&f2c, &g2c), &s(Diag(x2.clone()))?)?,
    );
    t.eq("coproduct_diag", &lhs, &rhs);

    // The entailment order.
    let g_hi = random_rel(rng, &c, &x, &y)?;
    let f_lo = random_coarsening(rng, &c, &g_hi)?;
    let e_lo = random_coarsening(rng, &c, &f_lo)?;
    t.leq("order_reflexive", &f_lo, &f_lo)?;
    t.leq("order_sample", &f_lo, &g_hi)?;
    t.leq("order_transitive", &e_lo, &g_hi)?;
    let a = random_rel(rng, &c, &x, &y)?;
    let b = random_rel(rng, &c, &x, &y)?;
    let anti = !(entails(&a, &b)?.holds() && entails(&b, &a)?.holds()) || a == b;
    t.record("order_antisymmetric", anti, || format!("{a} ~ {b}"));
    t.leq("dom_monotone", &dom_m(&f_lo), &dom_m(&g_hi))?;

    // Compatibility; pre-composition with functions, post-composition with total relations.
    let pre = random_fn(rng, &c, &w, &x, false)?;
    t.leq("compat_precompose", &compose(&f_lo, &pre)?, &compose(&g_hi, &pre)?)?;
    let mut post = random_rel(rng, &c, &y, &z)?;
    if let Some(zz) = c.carrier(&z)?.first() {
        let pairs = c.carrier(&y)?.iter().map(|yy| (yy.clone(), zz.clone())).chain(post.graph().iter().cloned()).collect::<Vec<_>>();
        post = SearchProblem::new(&c, y.clone(), z.clone(), pairs)?;
    }
    if post.is_total(&c)? {
        t.leq("compat_postcompose", &compose(&post, &f_lo)?, &compose(&post, &g_hi)?)?;
    }
    let side = random_rel(rng, &c, &z, &w)?;
    t.leq("compat_product", &product_m(&f_lo, &side), &product_m(&g_hi, &side))?;
    t.leq("compat_coproduct", &coproduct_m(&f_lo, &side), &coproduct_m(&g_hi, &side))?;

    // Infima.
    let i = hom_inf(&a, &b)?;
    t.leq("inf_lower_left", &i, &a)?;
    t.leq("inf_lower_right", &i, &b)?;
    let lower = random_coarsening(rng, &c, &i)?;
    t.leq("inf_greatest", &lower, &i)?;

    // Splitting of domains.
    let dh = dom_m(&a);
    let dg = SearchProblem::partial_identity(&x, dh.dom().into_iter().filter(|_| rng.gen_ratio(3, 4)));
    let df = SearchProblem::partial_identity(&x, dg.dom().into_iter().filter(|_| rng.gen_ratio(3, 4)));
    if entails(&dh, &df)?.holds() {
        t.leq("domain_splitting", &dh, &dg)?;
    }

    // The sum of problems against its defining composite.
    let o2 = random_rel(rng, &c, &z, &w)?;
    t.eq("oplus_composite", &oplus_via_composite(&c, &fx, &o2)?, &oplus(&fx, &o2));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::fixture;
    use super::*;

    #[test]
    fn suite_is_clean_and_deterministic() {
        let r = verify_pcategory_axioms(7, 60, 3).unwrap();
        assert!(r.all_pass(), "{r}");
        assert!(r.laws.len() >= 30);
        assert_eq!(r, verify_pcategory_axioms(7, 60, 3).unwrap());
    }

    #[test]
    fn pairing_law_on_fixture() {
        let c = fixture::carriers();
        let (f, g) = (fixture::f(), fixture::g());
        let x = fixture::x();
        let y = fixture::y();
        let lhs = compose(
            &structural(&c, &Structural::Proj2(y.clone(), y.clone())).unwrap(),
            &compose(&product_m(&f, &g), &structural(&c, &Structural::Diag(x)).unwrap()).unwrap(),
        )
        .unwrap();
        assert_eq!(lhs, compose(&g, &dom_m(&f)).unwrap());
    }

    #[test]
    fn diag_naturality_needs_single_values() {
        let c = fixture::carriers();
        let f = fixture::f();
        let lhs = compose(&structural(&c, &Structural::Diag(fixture::y())).unwrap(), &f).unwrap();
        let rhs = compose(&product_m(&f, &f), &structural(&c, &Structural::Diag(fixture::x())).unwrap()).unwrap();
        assert_ne!(lhs, rhs);
    }
}
