//! Parameterized problems: objects decorated with a parameter map `κ`,
//! morphisms certified by a bound table, and reductions whose witnesses must
//! respect those bounds.
//!
//! Only the parameter-bound half of fixed-parameter tractability is
//! modelled; running times have no meaning on finite carriers.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::finrel::{compose, coproduct_m, entails, product_m, Carriers, Element, FinrelError, HomOrderWitness, ObjExpr, SearchProblem};
use crate::reduce::{check_cert, lookup, Kind, ReduceError, ReductionCert};
use crate::term::{eval_term, type_of, Env, TermError, WitnessTerm};


/// What the reports here establish.
pub const SCOPE: &str = "parameter-bound only";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("κ on {obj}: {reason}")]
    BadKappa { obj: String, reason: String },
    #[error("bound table: {0}")]
    BadBound(String),
    #[error("bound table has no entry at or below parameter {0}")]
    IncompleteBound(u64),
    #[error("witness {0} carries no bound certification")]
    MissingBound(String),
    #[error("{0} is not single-valued")]
    NotSingleValued(String),
    #[error("type mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Finrel(#[from] FinrelError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

pub type Result<T, E = ParamError> = std::result::Result<T, E>;

/// A total map `κ : carrier(obj) -> {1, 2, ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Parameterization {
    obj: ObjExpr,
    kappa: BTreeMap<Element, u64>,
}

impl Parameterization {
    pub fn new(carriers: &Carriers, obj: ObjExpr, kappa: BTreeMap<Element, u64>) -> Result<Self> {
        let bad = |reason: String| ParamError::BadKappa { obj: obj.to_string(), reason };
        let carrier = carriers.carrier(&obj)?;
        for x in carrier.iter() {
            match kappa.get(x) {
                None => return Err(bad(format!("undefined at {x}"))),
                Some(0) => return Err(bad(format!("zero at {x}"))),
                Some(_) => {}
            }
        }
        if let Some(x) = kappa.keys().find(|x| !carriers.is_valid(x, &obj)) {
            return Err(bad(format!("{x} is not an element")));
        }
        Ok(Parameterization { obj, kappa })
    }

    pub fn from_fn(carriers: &Carriers, obj: ObjExpr, mut f: impl FnMut(&Element) -> u64) -> Result<Self> {
        let kappa = carriers.carrier(&obj)?.iter().map(|x| (x.clone(), f(x))).collect();
        Self::new(carriers, obj, kappa)
    }

    /// `κ_⊥ ≡ 1`.
    pub fn bottom(carriers: &Carriers, obj: ObjExpr) -> Result<Self> {
        Self::from_fn(carriers, obj, |_| 1)
    }

    pub fn obj(&self) -> &ObjExpr {
        &self.obj
    }

    pub fn kappa(&self, x: &Element) -> Option<u64> {
        self.kappa.get(x).copied()
    }

    pub fn max(&self) -> u64 {
        self.kappa.values().copied().max().unwrap_or(1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, u64)> {
        self.kappa.iter().map(|(x, &k)| (x, k))
    }
}

/// `κ(⟨u, v⟩) = max(κ1(u), κ2(v))`.
pub fn kappa_product(k1: &Parameterization, k2: &Parameterization) -> Parameterization {
    let mut kappa = BTreeMap::new();
    for (u, a) in k1.iter() {
        for (v, b) in k2.iter() {
            kappa.insert(Element::pair(u.clone(), v.clone()), a.max(b));
        }
    }
    Parameterization { obj: ObjExpr::prod(k1.obj.clone(), k2.obj.clone()), kappa }
}

/// `(κ1 + κ2)(i_k u) = κ_k(u)`.
pub fn kappa_coproduct(k1: &Parameterization, k2: &Parameterization) -> Parameterization {
    let left = k1.iter().map(|(u, a)| (Element::left(u.clone()), a));
    let right = k2.iter().map(|(v, b)| (Element::right(v.clone()), b));
    Parameterization { obj: ObjExpr::coprod(k1.obj.clone(), k2.obj.clone()), kappa: left.chain(right).collect() }
}

/// A finite monotone table `F`. Between and above its keys `F` is extended
/// by the largest entry at or below the argument; below the least key it is
/// undefined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundTable(BTreeMap<u64, u64>);

impl BoundTable {
    pub fn new(entries: BTreeMap<u64, u64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(ParamError::BadBound("empty".into()));
        }
        if entries.keys().chain(entries.values()).any(|&v| v == 0) {
            return Err(ParamError::BadBound("parameters and bounds start at 1".into()));
        }
        let vals: Vec<u64> = entries.values().copied().collect();
        if vals.windows(2).any(|w| w[0] > w[1]) {
            return Err(ParamError::BadBound("not monotone".into()));
        }
        Ok(BoundTable(entries))
    }

    pub fn from_fn(keys: impl IntoIterator<Item = u64>, f: impl Fn(u64) -> u64) -> Result<Self> {
        Self::new(keys.into_iter().map(|k| (k, f(k))).collect())
    }

    /// `F(k) = k` on `1..=max`.
    pub fn identity(max: u64) -> Self {
        BoundTable((1..=max.max(1)).map(|k| (k, k)).collect())
    }

    pub fn entries(&self) -> &BTreeMap<u64, u64> {
        &self.0
    }

    pub fn eval(&self, k: u64) -> Result<u64> {
        self.0.range(..=k).next_back().map(|(_, &v)| v).ok_or(ParamError::IncompleteBound(k))
    }

    /// `F_f ∘ F_g` on the keys of `F_g`.
    pub fn compose(f: &BoundTable, g: &BoundTable) -> Result<BoundTable> {
        let entries = g.0.iter().map(|(&k, &v)| Ok((k, f.eval(v)?))).collect::<Result<_>>()?;
        BoundTable::new(entries)
    }

    /// Pointwise max wherever both are defined; each side alone below the
    /// other's least key.
    pub fn max(f: &BoundTable, g: &BoundTable) -> Result<BoundTable> {
        let mut entries = BTreeMap::new();
        for &k in f.0.keys().chain(g.0.keys()) {
            let v = match (f.eval(k), g.eval(k)) {
                (Ok(a), Ok(b)) => a.max(b),
                (Ok(a), Err(_)) | (Err(_), Ok(a)) => a,
                (Err(e), Err(_)) => return Err(e),
            };
            entries.insert(k, v);
        }
        BoundTable::new(entries)
    }

    /// The least table bounding `m` from `src` to `dst`, keyed `1..=src.max()`.
    pub fn tight(m: &SearchProblem, src: &Parameterization, dst: &Parameterization) -> Result<BoundTable> {
        let mut at = BTreeMap::new();
        for (x, y) in m.graph() {
            let (kx, ky) = (kappa_at(src, x)?, kappa_at(dst, y)?);
            let e = at.entry(kx).or_insert(1);
            *e = ky.max(*e);
        }
        let mut run = 1;
        let entries = (1..=src.max())
            .map(|k| {
                run = run.max(at.get(&k).copied().unwrap_or(1));
                (k, run)
            })
            .collect();
        BoundTable::new(entries)
    }
}

fn kappa_at(p: &Parameterization, x: &Element) -> Result<u64> {
    p.kappa(x).ok_or_else(|| ParamError::BadKappa { obj: p.obj.to_string(), reason: format!("undefined at {x}") })
}

/// A single-valued map with parameterized ends and a bound table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamMorphism {
    pub underlying: SearchProblem,
    pub src_k: Parameterization,
    pub dst_k: Parameterization,
    pub bound: BoundTable,
    pub provenance: WitnessTerm,
}

impl ParamMorphism {
    pub fn new(
        underlying: SearchProblem,
        src_k: Parameterization,
        dst_k: Parameterization,
        bound: BoundTable,
        provenance: WitnessTerm,
    ) -> Result<Self> {
        if !underlying.is_single_valued() {
            return Err(ParamError::NotSingleValued(provenance.to_string()));
        }
        if underlying.src() != src_k.obj() || underlying.dst() != dst_k.obj() {
            return Err(ParamError::Mismatch(format!(
                "{} -> {} parameterized over {} -> {}",
                underlying.src(),
                underlying.dst(),
                src_k.obj(),
                dst_k.obj()
            )));
        }
        Ok(ParamMorphism { underlying, src_k, dst_k, bound, provenance })
    }
}

/// An instance `w` with `κ2(m(w)) > F(κ1(w))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundViolation {
    pub instance: Element,
    pub image: Element,
    pub kappa_in: u64,
    pub kappa_out: u64,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamCheck {
    pub holds: bool,
    pub counterexample: Option<BoundViolation>,
}

/// Checks `κ2(m(w)) ≤ F(κ1(w))` on every instance, in carrier order.
pub fn check_param_morphism(m: &ParamMorphism) -> Result<ParamCheck> {
    for (w, z) in m.underlying.graph() {
        let kappa_in = kappa_at(&m.src_k, w)?;
        let kappa_out = kappa_at(&m.dst_k, z)?;
        let bound = m.bound.eval(kappa_in)?;
        if kappa_out > bound {
            let v = BoundViolation { instance: w.clone(), image: z.clone(), kappa_in, kappa_out, bound };
            return Ok(ParamCheck { holds: false, counterexample: Some(v) });
        }
    }
    Ok(ParamCheck { holds: true, counterexample: None })
}

/// `f ∘ g` with bound `F_f ∘ F_g`.
pub fn compose_param(f: &ParamMorphism, g: &ParamMorphism) -> Result<ParamMorphism> {
    if g.dst_k != f.src_k {
        return Err(ParamError::Mismatch(format!("{} does not feed {}", g.provenance, f.provenance)));
    }
    ParamMorphism::new(
        compose(&f.underlying, &g.underlying)?,
        g.src_k.clone(),
        f.dst_k.clone(),
        BoundTable::compose(&f.bound, &g.bound)?,
        WitnessTerm::comp(f.provenance.clone(), g.provenance.clone()),
    )
}

/// `f × g` with the pointwise max of the bounds.
pub fn product_param(f: &ParamMorphism, g: &ParamMorphism) -> Result<ParamMorphism> {
    ParamMorphism::new(
        product_m(&f.underlying, &g.underlying),
        kappa_product(&f.src_k, &g.src_k),
        kappa_product(&f.dst_k, &g.dst_k),
        BoundTable::max(&f.bound, &g.bound)?,
        WitnessTerm::prod(f.provenance.clone(), g.provenance.clone()),
    )
}

/// `f + g`; each summand is bounded by its own table, so the max bounds both.
pub fn coproduct_param(f: &ParamMorphism, g: &ParamMorphism) -> Result<ParamMorphism> {
    ParamMorphism::new(
        coproduct_m(&f.underlying, &g.underlying),
        kappa_coproduct(&f.src_k, &g.src_k),
        kappa_coproduct(&f.dst_k, &g.dst_k),
        BoundTable::max(&f.bound, &g.bound)?,
        WitnessTerm::coprod(f.provenance.clone(), g.provenance.clone()),
    )
}

/// A problem with parameterized instance and solution objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamProblem {
    pub problem: SearchProblem,
    pub src_k: Parameterization,
    pub dst_k: Parameterization,
}

impl ParamProblem {
    pub fn new(problem: SearchProblem, src_k: Parameterization, dst_k: Parameterization) -> Result<Self> {
        if problem.src() != src_k.obj() || problem.dst() != dst_k.obj() {
            return Err(ParamError::Mismatch(format!("problem on {} -> {}", problem.src(), problem.dst())));
        }
        Ok(ParamProblem { problem, src_k, dst_k })
    }

    /// Output side fixed to `κ_⊥`.
    pub fn simple(carriers: &Carriers, problem: SearchProblem, src_k: Parameterization) -> Result<Self> {
        let dst_k = Parameterization::bottom(carriers, problem.dst().clone())?;
        Self::new(problem, src_k, dst_k)
    }
}

/// `P ⪯ Q` on the underlying relations; `κ` only has to match.
pub fn param_entails(p: &ParamProblem, q: &ParamProblem) -> Result<HomOrderWitness> {
    if p.src_k != q.src_k || p.dst_k != q.dst_k {
        return Err(ParamError::Mismatch("parameterized objects differ".into()));
    }
    Ok(entails(&p.problem, &q.problem)?)
}

/// Parameterizations of objects: registered ones first, otherwise built from
/// the components by max and case split, with `κ_⊥` on unregistered atoms.
#[derive(Debug, Clone, Default)]
pub struct ParamSpace {
    registered: BTreeMap<ObjExpr, Parameterization>,
}

impl ParamSpace {
    pub fn new() -> Self {
        ParamSpace::default()
    }

    /// Registers `p`; an existing different parameterization of the same
    /// object is a conflict.
    pub fn register(&mut self, p: Parameterization) -> Result<()> {
        match self.registered.get(p.obj()) {
            Some(q) if *q != p => Err(ParamError::BadKappa { obj: p.obj().to_string(), reason: "conflicting parameterizations".into() }),
            _ => {
                self.registered.insert(p.obj().clone(), p);
                Ok(())
            }
        }
    }

    pub fn of(&self, carriers: &Carriers, obj: &ObjExpr) -> Result<Parameterization> {
        if let Some(p) = self.registered.get(obj) {
            return Ok(p.clone());
        }
        match obj {
            ObjExpr::Atom(_) => Parameterization::bottom(carriers, obj.clone()),
            ObjExpr::Prod(a, b) => Ok(kappa_product(&self.of(carriers, a)?, &self.of(carriers, b)?)),
            ObjExpr::Coprod(a, b) => Ok(kappa_coproduct(&self.of(carriers, a)?, &self.of(carriers, b)?)),
        }
    }
}

/// Derives a bound for `t` between the parameterizations `space` assigns.
/// Generators must carry a table in `bounds`; the structural leaves and
/// domain restrictions get the tight table of their graph. The result is
/// validated against the evaluated term before it is returned.
pub fn derive_bound(t: &WitnessTerm, env: &Env, space: &ParamSpace, bounds: &BTreeMap<String, BoundTable>) -> Result<ParamMorphism> {
    use WitnessTerm as T;
    let c = &env.carriers;
    let (a, b) = type_of(t, env)?;
    let (src_k, dst_k) = (space.of(c, &a)?, space.of(c, &b)?);
    let m = eval_term(t, env)?;
    let bound = match t {
        T::Gen(n) => bounds.get(n).cloned().ok_or_else(|| ParamError::MissingBound(t.to_string()))?,
        T::Comp(f, g) => {
            let (pf, pg) = (derive_bound(f, env, space, bounds)?, derive_bound(g, env, space, bounds)?);
            BoundTable::compose(&pf.bound, &pg.bound)?
        }
        T::Prod(f, g) | T::Coprod(f, g) => {
            let (pf, pg) = (derive_bound(f, env, space, bounds)?, derive_bound(g, env, space, bounds)?);
            BoundTable::max(&pf.bound, &pg.bound)?
        }
        // Structural maps and domain restrictions (whose generators only
        // restrict) are read off their graphs.
        _ => BoundTable::tight(&m, &src_k, &dst_k)?,
    };
    let pm = ParamMorphism::new(m, src_k, dst_k, bound, t.clone())?;
    match check_param_morphism(&pm)?.counterexample {
        None => Ok(pm),
        Some(v) => Err(ParamError::BadBound(format!(
            "{t} maps {} (κ = {}) to {} (κ = {}) above the bound {}",
            v.instance, v.kappa_in, v.image, v.kappa_out, v.bound
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// Both sides carry their own parameterization.
    Full,
    /// Solutions carry `κ_⊥`.
    Simple,
}

/// A certificate over the parameterized category: the plain certificate
/// plus a bound for each witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamCert {
    pub cert: ReductionCert,
    pub k_bound: Option<BoundTable>,
    pub h_bound: Option<BoundTable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamReport {
    pub scope: &'static str,
    pub mode: ParamMode,
    pub accepted: bool,
    pub finrel_valid: bool,
    pub k: ParamCheck,
    pub h: ParamCheck,
}

impl fmt::Display for ParamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |c: &ParamCheck| match &c.counterexample {
            None => "ok".to_string(),
            Some(v) => format!("violated at {} -> {} (κ {} > F({}) = {})", v.instance, v.image, v.kappa_out, v.kappa_in, v.bound),
        };
        write!(
            f,
            "{} [{}]: finrel {}, K {}, H {}",
            if self.accepted { "ACCEPTED" } else { "REJECTED" },
            SCOPE,
            if self.finrel_valid { "valid" } else { "invalid" },
            show(&self.k),
            show(&self.h)
        )
    }
}

/// Checks `pc` as a reduction of `p` to `q`: the certificate validates and
/// both witnesses respect their bounds. In `Simple` mode the output sides
/// are replaced by `κ_⊥` and `K` is bounded in terms of `κ_p(x)`.
pub fn param_reduce_check(env: &Env, pc: &ParamCert, p: &ParamProblem, q: &ParamProblem, mode: ParamMode) -> Result<ParamReport> {
    let c = &env.carriers;
    let cert = &pc.cert;
    for (name, pp) in [(&cert.f, p), (&cert.g, q)] {
        if lookup(env, name)? != &pp.problem {
            return Err(ParamError::Mismatch(format!("`{name}` is not the parameterized problem given")));
        }
    }
    let (p_out, q_out) = match mode {
        ParamMode::Full => (p.dst_k.clone(), q.dst_k.clone()),
        ParamMode::Simple => (Parameterization::bottom(c, p.problem.dst().clone())?, Parameterization::bottom(c, q.problem.dst().clone())?),
    };
    let finrel_valid = check_cert(cert, env)?.valid;
    let k_bound = pc.k_bound.clone().ok_or_else(|| ParamError::MissingBound(format!("K = {}", cert.k)))?;
    let h_bound = pc.h_bound.clone().ok_or_else(|| ParamError::MissingBound(format!("H = {}", cert.h)))?;
    let k = ParamMorphism::new(eval_term(&cert.k, env)?, p.src_k.clone(), q.src_k.clone(), k_bound, cert.k.clone())?;
    let h_src = match cert.kind {
        Kind::Sm => q_out,
        Kind::M => kappa_product(&p.src_k, &q_out),
    };
    let h = ParamMorphism::new(eval_term(&cert.h, env)?, h_src, p_out, h_bound, cert.h.clone())?;
    let (k, h) = (check_param_morphism(&k)?, check_param_morphism(&h)?);
    Ok(ParamReport { scope: SCOPE, mode, accepted: finrel_valid && k.holds && h.holds, finrel_valid, k, h })
}
