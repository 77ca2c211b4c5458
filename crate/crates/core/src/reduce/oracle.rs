//! Exhaustive search for reduction witnesses inside a saturated table.
//!
//! Hom-sets are searched in factored form. For `≤_m` the conditions on `K`
//! and `H` split along the tag-free summands of `Dom f`, so each summand is
//! searched on its own; the first hit per summand is the lexicographically
//! first certificate overall. For `≤_sm` the post-processor is shared, so `K`
//! tuples are enumerated and `H` is fitted per summand of `CDom g`.

use std::sync::Arc;

use serde::Serialize;

use super::combinators::register_star;
use super::{check_cert, lookup, Kind, ReduceError, ReductionCert, Result};
use crate::finrel::{Carriers, ObjExpr, SearchProblem};
use crate::subcat::{Cell, Split, SubcatTable, UNDEF};
use crate::term::{Env, WitnessTerm};

/// Candidate evaluations allowed per decision.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum Decided {
    Yes(ReductionCert),
    No,
}

/// Sizes of the candidate spaces and how much of them was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SearchSpace {
    pub k_space: u128,
    pub h_space: u128,
    /// Per-summand `K` candidates (and `K` tuples for `≤_sm`) evaluated.
    pub k_examined: u64,
    /// Per-summand `H` candidates evaluated.
    pub h_examined: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleVerdict {
    pub decided: Decided,
    pub universe_depth: usize,
    pub search_space: SearchSpace,
}

impl OracleVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self.decided, Decided::Yes(_))
    }

    pub fn cert(&self) -> Option<&ReductionCert> {
        match &self.decided {
            Decided::Yes(c) => Some(c),
            Decided::No => None,
        }
    }
}

/// Decides `f ≤_kind g` over `table`. Problems are looked up in `env`, which
/// must extend the environment the table was saturated from.
pub fn decide(env: &Env, table: &SubcatTable, f: &str, g: &str, kind: Kind) -> Result<OracleVerdict> {
    decide_with_budget(env, table, f, g, kind, DEFAULT_BUDGET)
}

pub fn decide_with_budget(
    env: &Env,
    table: &SubcatTable,
    f: &str,
    g: &str,
    kind: Kind,
    budget: u64,
) -> Result<OracleVerdict> {
    let fp = lookup(env, f)?;
    let gp = lookup(env, g)?;
    let (a, c, b, d) = (fp.src(), fp.dst(), gp.src(), gp.dst());
    let h_src = match kind {
        Kind::Sm => d.clone(),
        Kind::M => ObjExpr::prod(a.clone(), d.clone()),
    };
    for obj in [a, b, c, d, &h_src] {
        if !table.universe().contains(obj) {
            return Err(ReduceError::Undecidable(obj.to_string()));
        }
    }
    let mut s = Search::new(table, fp, gp, &h_src, budget)?;
    let found = match kind {
        Kind::M => s.search_m()?,
        Kind::Sm => s.search_sm()?,
    };
    let decided = match found {
        None => Decided::No,
        Some((ks, hs)) => {
            let kt: Vec<WitnessTerm> = ks.iter().enumerate().map(|(i, &j)| s.kcells[i].term(j).clone()).collect();
            let ht: Vec<WitnessTerm> = hs.iter().enumerate().map(|(i, &j)| s.hcells[i].term(j).clone()).collect();
            let cert = ReductionCert::new(kind, f, g, s.hsplit.copair(&ht, c), s.ksplit.copair(&kt, b));
            let check = check_cert(&cert, env)?;
            if !check.valid {
                return Err(ReduceError::Internal(format!("oracle certificate for {f} ≤_{kind} {g} does not validate")));
            }
            Decided::Yes(cert)
        }
    };
    Ok(OracleVerdict { decided, universe_depth: table.universe().depth(), search_space: s.meter.space })
}

/// `f ≤_wtt g` at truncation `n`: `f ≤_m` the truncated star of `g`, which is
/// registered in `env`. Its objects must be in the table's universe.
pub fn wtt_leq(env: &mut Env, table: &SubcatTable, f: &str, g: &str, n: usize) -> Result<OracleVerdict> {
    let star = register_star(env, g, n)?;
    decide(env, table, f, &star, Kind::M)
}

struct Search {
    ksplit: Arc<Split>,
    kcells: Vec<Arc<Cell>>,
    hsplit: Arc<Split>,
    hcells: Vec<Arc<Cell>>,
    /// `f(x)` as a membership vector over `CDom f`; `None` off `dom f`.
    fsets: Vec<Option<Vec<bool>>>,
    /// `g(b)` as indices into `CDom g`; `None` off `dom g`.
    gimgs: Vec<Option<Vec<u32>>>,
    nd: usize,
    meter: Meter,
}

struct Meter {
    space: SearchSpace,
    budget: u64,
    used: u64,
}

impl Meter {
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.budget {
            return Err(ReduceError::Budget(self.budget));
        }
        Ok(())
    }
}

/// First member of `cell` meeting `constraints` (local point, allowed set).
fn fit_h(cell: &Cell, constraints: &[(usize, &[bool])], meter: &mut Meter) -> Result<Option<usize>> {
    for i in 0..cell.len() {
        meter.tick()?;
        meter.space.h_examined += 1;
        let h = cell.fun(i);
        if constraints.iter().all(|&(p, set)| h[p] != UNDEF && set[h[p] as usize]) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

fn index_problem(c: &Carriers, p: &SearchProblem) -> Result<Vec<Vec<u32>>> {
    let mut out = vec![Vec::new(); c.carrier_len(p.src())?];
    for (x, y) in p.graph() {
        let xi = c.index_of(x, p.src()).expect("problem pairs are well-typed");
        out[xi].push(c.index_of(y, p.dst()).expect("problem pairs are well-typed") as u32);
    }
    Ok(out)
}

impl Search {
    fn new(table: &SubcatTable, f: &SearchProblem, g: &SearchProblem, h_src: &ObjExpr, budget: u64) -> Result<Self> {
        let c = table.carriers();
        let (ksplit, kcells) = table.factored(f.src(), g.src())?;
        let (hsplit, hcells) = table.factored(h_src, f.dst())?;
        let nc = c.carrier_len(f.dst())?;
        let fsets = index_problem(c, f)?
            .into_iter()
            .map(|ys| {
                (!ys.is_empty()).then(|| {
                    let mut set = vec![false; nc];
                    for y in ys {
                        set[y as usize] = true;
                    }
                    set
                })
            })
            .collect();
        let gimgs = index_problem(c, g)?.into_iter().map(|ys| (!ys.is_empty()).then_some(ys)).collect();
        let space = SearchSpace {
            k_space: kcells.iter().map(|c| c.len() as u128).product(),
            h_space: hcells.iter().map(|c| c.len() as u128).product(),
            ..SearchSpace::default()
        };
        let nd = c.carrier_len(g.dst())?;
        Ok(Search { ksplit, kcells, hsplit, hcells, fsets, gimgs, nd, meter: Meter { space, budget, used: 0 } })
    }

    /// Whether `K` on summand `k` is defined into `dom g` on `dom f`.
    fn k_defined(&self, k: usize, kf: &[u32]) -> bool {
        self.ksplit.origin[k].iter().zip(kf).all(|(&x, &v)| {
            self.fsets[x].is_none() || (v != UNDEF && self.gimgs[v as usize].is_some())
        })
    }

    fn search_m(&mut self) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        let nd = self.nd;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.kcells.len()];
        let mut hs = vec![0; self.hcells.len()];
        for (j, pts) in self.hsplit.origin.iter().enumerate() {
            match pts.first() {
                Some(&i) => groups[self.ksplit.locate[i / nd].0].push(j),
                None if self.hcells[j].is_empty() => return Ok(None),
                None => {}
            }
        }
        let mut ks = vec![0; self.kcells.len()];
        for k in 0..self.kcells.len() {
            let cell = self.kcells[k].clone();
            let mut hit = false;
            for ki in 0..cell.len() {
                self.meter.tick()?;
                self.meter.space.k_examined += 1;
                let kf = cell.fun(ki);
                if !self.k_defined(k, kf) {
                    continue;
                }
                let mut chosen = Vec::new();
                for &j in &groups[k] {
                    let mut constraints = Vec::new();
                    for (p, &i) in self.hsplit.origin[j].iter().enumerate() {
                        let (x, y) = (i / nd, i % nd);
                        debug_assert_eq!(self.ksplit.locate[x].0, k);
                        if let Some(set) = &self.fsets[x] {
                            let b = kf[self.ksplit.locate[x].1] as usize;
                            if self.gimgs[b].as_ref().is_some_and(|ys| ys.contains(&(y as u32))) {
                                constraints.push((p, set.as_slice()));
                            }
                        }
                    }
                    match fit_h(&self.hcells[j], &constraints, &mut self.meter)? {
                        Some(i) => chosen.push((j, i)),
                        None => break,
                    }
                }
                if chosen.len() == groups[k].len() {
                    ks[k] = ki;
                    for (j, i) in chosen {
                        hs[j] = i;
                    }
                    hit = true;
                    break;
                }
            }
            if !hit {
                return Ok(None);
            }
        }
        Ok(Some((ks, hs)))
    }

    fn search_sm(&mut self) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        let mut valid: Vec<Vec<usize>> = Vec::with_capacity(self.kcells.len());
        for k in 0..self.kcells.len() {
            let cell = self.kcells[k].clone();
            let mut ok = Vec::new();
            for ki in 0..cell.len() {
                self.meter.tick()?;
                self.meter.space.k_examined += 1;
                if self.k_defined(k, cell.fun(ki)) {
                    ok.push(ki);
                }
            }
            if ok.is_empty() {
                return Ok(None);
            }
            valid.push(ok);
        }
        if self.hcells.iter().any(|c| c.is_empty()) {
            return Ok(None);
        }
        let nx = self.fsets.len();
        let mut kval = vec![UNDEF; nx];
        let mut choice = vec![0usize; valid.len()];
        loop {
            self.meter.tick()?;
            self.meter.space.k_examined += 1;
            for (k, &c) in choice.iter().enumerate() {
                let kf = self.kcells[k].fun(valid[k][c]);
                for (&x, &v) in self.ksplit.origin[k].iter().zip(kf) {
                    kval[x] = v;
                }
            }
            let mut allowed: Vec<Option<Vec<bool>>> = vec![None; self.nd];
            for x in 0..nx {
                let Some(set) = &self.fsets[x] else { continue };
                let ys = self.gimgs[kval[x] as usize].as_ref().expect("K lands in dom g");
                for &y in ys {
                    match &mut allowed[y as usize] {
                        Some(a) => a.iter_mut().zip(set).for_each(|(a, &s)| *a &= s),
                        slot @ None => *slot = Some(set.clone()),
                    }
                }
            }
            let mut hs = Vec::with_capacity(self.hcells.len());
            for j in 0..self.hcells.len() {
                let constraints: Vec<(usize, &[bool])> = self.hsplit.origin[j]
                    .iter()
                    .enumerate()
                    .filter_map(|(p, &y)| allowed[y].as_deref().map(|s| (p, s)))
                    .collect();
                match fit_h(&self.hcells[j], &constraints, &mut self.meter)? {
                    Some(i) => hs.push(i),
                    None => break,
                }
            }
            if hs.len() == self.hcells.len() {
                let ks = choice.iter().enumerate().map(|(k, &c)| valid[k][c]).collect();
                return Ok(Some((ks, hs)));
            }
            let mut k = choice.len();
            loop {
                if k == 0 {
                    return Ok(None);
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < valid[k].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }
}
