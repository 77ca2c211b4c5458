//! Reduction judgments, certificates and the witness-building combinators.
//!
//! A certificate for `f ≤_m g` is a pair `H, K` of witness terms with
//! `K : Dom f -> Dom g` and `H : Dom f * CDom g -> CDom f`; for `f ≤_sm g`
//! the post-processor forgets the instance, `H : CDom g -> CDom f`.
//!
//! Validity is the entailment `f ⪯ H ∘ (id × g∘K) ∘ Δ` together with
//! definedness: for every instance `x` of `f`, `K(x)` is an instance of `g`
//! and `H` is defined on every answer `g` may give there. Without the second
//! clause transitivity fails for partial witnesses.

mod build;
mod combinators;
mod oracle;
mod psi;
mod semiring;

pub use combinators::{
    distrib_cert, ensure_derived, inf_name, inf_proj_cert, inf_univ_cert, prod_cert, prod_name, refl_cert, register_inf, register_sup, sm_to_m, star_collapse_cert,
    star_intro_cert, star_mono_cert, star_name, sup_inj_cert, sup_name, sup_univ_cert, trans_cert,
};
pub use oracle::{decide, decide_with_budget, wtt_leq, Decided, OracleVerdict, SearchSpace, DEFAULT_BUDGET};
pub use psi::{psi_phi, PsiPhiReport};
pub use semiring::{semiring_law_certs, Law, LawCerts};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finrel::{compose, entails, product_m, structural, Element, FinrelError, HomOrderWitness, ObjExpr, SearchProblem, Structural};
use crate::subcat::SubcatError;
use crate::term::{eval_term, parse_term, type_of, Env, TermError, WitnessTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("{role} has type {found}, expected {expected}")]
    IllTyped { role: &'static str, expected: String, found: String },
    #[error("refused: {0}")]
    Refused(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("object {0} lies outside the universe; undecidable here")]
    Undecidable(String),
    #[error("search budget exhausted after {0} candidate evaluations")]
    Budget(u64),
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Finrel(#[from] FinrelError),
    #[error(transparent)]
    Subcat(#[from] SubcatError),
}

pub type Result<T, E = ReduceError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Sm,
    M,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Sm => "sm",
            Kind::M => "m",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = ReduceError;

    fn from_str(s: &str) -> Result<Kind> {
        match s {
            "sm" => Ok(Kind::Sm),
            "m" => Ok(Kind::M),
            other => Err(ReduceError::Malformed(format!("unknown reduction kind `{other}`"))),
        }
    }
}

/// `f ≤_kind g` witnessed by `H` and `K`. Problems are referred to by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionCert {
    pub kind: Kind,
    pub f: String,
    pub g: String,
    #[serde(rename = "H")]
    pub h: WitnessTerm,
    #[serde(rename = "K")]
    pub k: WitnessTerm,
}

#[derive(Deserialize)]
struct RawCert {
    kind: Kind,
    f: String,
    g: String,
    #[serde(rename = "H")]
    h: String,
    #[serde(rename = "K")]
    k: String,
}

impl ReductionCert {
    pub fn new(kind: Kind, f: impl Into<String>, g: impl Into<String>, h: WitnessTerm, k: WitnessTerm) -> Self {
        ReductionCert { kind, f: f.into(), g: g.into(), h, k }
    }

    /// Reads the JSON certificate format, parsing `H` and `K` against `env`.
    pub fn from_json(text: &str, env: &Env) -> Result<Self> {
        let raw: RawCert = serde_json::from_str(text).map_err(|e| ReduceError::Malformed(e.to_string()))?;
        Ok(ReductionCert { kind: raw.kind, f: raw.f, g: raw.g, h: parse_term(&raw.h, env)?, k: parse_term(&raw.k, env)? })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}

/// Why a certificate whose composite is defined still fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definedness {
    /// `K` is undefined at the instance or lands outside `dom g`.
    Reduction { instance: Element },
    /// `H` is undefined on an answer of `g`.
    PostProcessing { instance: Element, answer: Element },
}

/// The outcome of [`check_cert`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertCheck {
    pub valid: bool,
    /// `f` against the defining composite.
    pub order: HomOrderWitness,
    pub definedness: Option<Definedness>,
}

/// Looks a problem up by name; generators count as problems.
pub fn lookup<'a>(env: &'a Env, name: &str) -> Result<&'a SearchProblem> {
    env.problem(name).or_else(|| env.generator(name)).ok_or_else(|| ReduceError::UnknownProblem(name.to_string()))
}

/// The expected `(K, H)` types of a certificate.
pub fn expected_types(kind: Kind, f: &SearchProblem, g: &SearchProblem) -> ((ObjExpr, ObjExpr), (ObjExpr, ObjExpr)) {
    let k = (f.src().clone(), g.src().clone());
    let h = match kind {
        Kind::Sm => (g.dst().clone(), f.dst().clone()),
        Kind::M => (ObjExpr::prod(f.src().clone(), g.dst().clone()), f.dst().clone()),
    };
    (k, h)
}

fn show(t: &(ObjExpr, ObjExpr)) -> String {
    format!("{} -> {}", t.0, t.1)
}

/// Evaluates the defining composite of `c` and decides validity.
pub fn check_cert(c: &ReductionCert, env: &Env) -> Result<CertCheck> {
    let f = lookup(env, &c.f)?;
    let g = lookup(env, &c.g)?;
    let (kt, ht) = expected_types(c.kind, f, g);
    for (role, term, want) in [("K", &c.k, &kt), ("H", &c.h, &ht)] {
        let found = type_of(term, env)?;
        if &found != want {
            return Err(ReduceError::IllTyped { role, expected: show(want), found: show(&found) });
        }
    }
    let k = eval_term(&c.k, env)?;
    let h = eval_term(&c.h, env)?;
    let carriers = &env.carriers;
    let gk = compose(g, &k)?;
    let composite = match c.kind {
        Kind::Sm => compose(&h, &gk)?,
        Kind::M => {
            let a = f.src().clone();
            let delta = structural(carriers, &Structural::Diag(a.clone()))?;
            let pair = product_m(&SearchProblem::identity(carriers, &a)?, &gk);
            compose(&h, &compose(&pair, &delta)?)?
        }
    };
    let order = entails(f, &composite)?;
    let mut definedness = None;
    'outer: for x in f.dom() {
        let ks: Vec<&Element> = k.image(x).collect();
        if ks.is_empty() || ks.iter().any(|kx| !g.in_dom(kx)) {
            definedness = Some(Definedness::Reduction { instance: x.clone() });
            break;
        }
        for kx in ks {
            for y in g.image(kx) {
                let input = match c.kind {
                    Kind::Sm => y.clone(),
                    Kind::M => Element::pair(x.clone(), y.clone()),
                };
                if !h.in_dom(&input) {
                    definedness = Some(Definedness::PostProcessing { instance: x.clone(), answer: y.clone() });
                    break 'outer;
                }
            }
        }
    }
    Ok(CertCheck { valid: order.holds() && definedness.is_none(), order, definedness })
}

/// Fails unless `c` is valid; combinators only transform valid certificates.
pub(crate) fn require_valid(c: &ReductionCert, env: &Env) -> Result<()> {
    if check_cert(c, env)?.valid {
        Ok(())
    } else {
        Err(ReduceError::Refused(format!("certificate for {} ≤_{} {} does not validate", c.f, c.kind, c.g)))
    }
}
