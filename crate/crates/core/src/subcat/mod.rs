//! The subcategory of admissible witnesses, generated by named single-valued
//! morphisms together with the structural maps, constants and domains, and
//! closed under composition, products and coproducts.
//!
//! Hom-sets are stored in factored form. Every object is isomorphic to a
//! coproduct of tag-free products, so `hom(A, B)` is the product of
//! `hom(P, B)` over the tag-free summands `P` of `A`; and `hom(P, B1 * B2)`
//! is the set of pairings. Saturation therefore only runs over cells
//! `hom(P, T)` with `P` tag-free and `T` an atom or a coproduct occurring in
//! a generator's type ("seed"). Cells for other coproduct targets are
//! derived on demand from injections, constants and case analysis.
//!
//! A morphism out of `P` is a vector over `carrier(P)` holding indices into
//! the target carrier, with [`UNDEF`] where it is undefined. Every distinct
//! vector keeps the first witness term that produced it.

mod split;
#[cfg(test)]
mod tests;

pub(crate) use split::Split;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use thiserror::Error;

use crate::finrel::{dom_m, Carriers, FinrelError, ObjExpr, SearchProblem, Side};
use crate::term::{Env, TermError, WitnessTerm};

/// Marks an undefined point of a morphism vector.
pub const UNDEF: u32 = u32::MAX;

/// Materialized hom-sets larger than this are refused.
pub const MATERIALIZE_LIMIT: u128 = 250_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubcatError {
    #[error("object {0} lies outside the universe")]
    OutsideUniverse(String),
    #[error("generator `{0}` is not single-valued")]
    NotSingleValued(String),
    #[error("generator `{name}` has type object {obj} outside the universe")]
    GeneratorOutsideUniverse { name: String, obj: String },
    #[error("hom-set {src} -> {dst} has {count} members, over the materialization limit")]
    TooLarge { src: String, dst: String, count: u128 },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Finrel(#[from] FinrelError),
}

pub type Result<T, E = SubcatError> = std::result::Result<T, E>;

/// A finite stand-in for the class of objects: every expression over the
/// bases with nesting depth at most `depth`, plus explicitly pinned objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    bases: Vec<String>,
    depth: usize,
    pinned: BTreeSet<ObjExpr>,
}

pub fn build_universe<I, S>(bases: I, depth: usize) -> Universe
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let bases: BTreeSet<String> = bases.into_iter().map(Into::into).collect();
    Universe { bases: bases.into_iter().collect(), depth, pinned: BTreeSet::new() }
}

impl Universe {
    pub fn bases(&self) -> &[String] {
        &self.bases
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn pinned(&self) -> &BTreeSet<ObjExpr> {
        &self.pinned
    }

    /// Adds `obj` and its subexpressions.
    pub fn pin(&mut self, obj: &ObjExpr) {
        for s in obj.subexpressions() {
            if !self.in_bounded_part(s) {
                self.pinned.insert(s.clone());
            }
        }
    }

    fn in_bounded_part(&self, obj: &ObjExpr) -> bool {
        obj.depth() <= self.depth && obj.atoms().iter().all(|a| self.bases.binary_search_by(|b| b.as_str().cmp(a)).is_ok())
    }

    pub fn contains(&self, obj: &ObjExpr) -> bool {
        self.in_bounded_part(obj) || self.pinned.contains(obj)
    }

    /// The depth-bounded objects, ordered by depth and then structurally.
    pub fn objects(&self) -> Vec<ObjExpr> {
        let mut level: Vec<ObjExpr> = self.bases.iter().map(ObjExpr::atom).collect();
        for _ in 0..self.depth {
            let mut next = level.clone();
            for a in &level {
                for b in &level {
                    next.push(ObjExpr::prod(a.clone(), b.clone()));
                    next.push(ObjExpr::coprod(a.clone(), b.clone()));
                }
            }
            next.sort();
            next.dedup();
            level = next;
        }
        level.sort_by(|a, b| a.depth().cmp(&b.depth()).then_with(|| a.cmp(b)));
        level
    }

    /// Number of depth-bounded objects.
    pub fn count(&self) -> u128 {
        let mut n = self.bases.len() as u128;
        for _ in 0..self.depth {
            n = self.bases.len() as u128 + 2 * n * n;
        }
        n
    }
}

/// A saturated hom-cell: morphism vectors in canonical (sorted) order, each
/// with one witness term.
#[derive(Debug, Clone, Default)]
pub struct Cell {
    fns: Vec<Vec<u32>>,
    terms: Vec<WitnessTerm>,
}

impl Cell {
    pub fn len(&self) -> usize {
        self.fns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fns.is_empty()
    }

    pub fn fun(&self, i: usize) -> &[u32] {
        &self.fns[i]
    }

    pub fn term(&self, i: usize) -> &WitnessTerm {
        &self.terms[i]
    }

    pub fn position(&self, f: &[u32]) -> Option<usize> {
        self.fns.binary_search_by(|g| g.as_slice().cmp(f)).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], &WitnessTerm)> {
        self.fns.iter().map(Vec::as_slice).zip(&self.terms)
    }
}

#[derive(Default)]
struct Builder {
    index: HashMap<Vec<u32>, usize>,
    fns: Vec<Vec<u32>>,
    terms: Vec<WitnessTerm>,
}

impl Builder {
    fn insert(&mut self, f: Vec<u32>, term: impl FnOnce() -> WitnessTerm) -> bool {
        if self.index.contains_key(&f) {
            return false;
        }
        self.index.insert(f.clone(), self.fns.len());
        self.fns.push(f);
        self.terms.push(term());
        true
    }

    fn entries(&self) -> Vec<(Vec<u32>, WitnessTerm)> {
        self.entries_from(0)
    }

    fn entries_from(&self, from: usize) -> Vec<(Vec<u32>, WitnessTerm)> {
        self.fns[from..].iter().cloned().zip(self.terms[from..].iter().cloned()).collect()
    }

    fn finish(self) -> Cell {
        let mut pairs: Vec<_> = self.fns.into_iter().zip(self.terms).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (fns, terms) = pairs.into_iter().unzip();
        Cell { fns, terms }
    }
}

/// A generator's contribution to the cells of one component of its target.
struct Deposit {
    target: ObjExpr,
    proj: Vec<u32>,
    term: Option<WitnessTerm>,
}

struct GenInfo {
    term: WitnessTerm,
    src: ObjExpr,
    table: Vec<u32>,
    deposits: Vec<Deposit>,
}

/// Saturated cells out of one tag-free source.
struct Source {
    cells: BTreeMap<ObjExpr, Arc<Cell>>,
    /// Non-total domains realized by morphisms out of the source, with terms.
    domains: Vec<(Vec<bool>, WitnessTerm)>,
}

/// Maximal non-product components of `obj`, with projection paths.
fn components(obj: &ObjExpr) -> Vec<(ObjExpr, Vec<Side>)> {
    match obj {
        ObjExpr::Prod(a, b) => {
            let mut out = Vec::new();
            for (side, part) in [(Side::Left, a), (Side::Right, b)] {
                for (c, mut path) in components(part) {
                    path.insert(0, side);
                    out.push((c, path));
                }
            }
            out
        }
        other => vec![(other.clone(), Vec::new())],
    }
}

fn project_index(c: &Carriers, obj: &ObjExpr, path: &[Side], mut idx: usize) -> Result<usize> {
    let mut cur = obj;
    for side in path {
        let ObjExpr::Prod(a, b) = cur else { unreachable!("projection path follows products") };
        let nb = c.carrier_len(b)?;
        match side {
            Side::Left => {
                idx /= nb;
                cur = a;
            }
            Side::Right => {
                idx %= nb;
                cur = b;
            }
        }
    }
    Ok(idx)
}

/// The projection along `path`; `None` for the empty path.
fn projection_term(obj: &ObjExpr, path: &[Side]) -> Option<WitnessTerm> {
    let mut cur = obj;
    let mut steps = Vec::new();
    for side in path {
        let ObjExpr::Prod(a, b) = cur else { unreachable!("projection path follows products") };
        match side {
            Side::Left => {
                steps.push(WitnessTerm::Proj1((**a).clone(), (**b).clone()));
                cur = a;
            }
            Side::Right => {
                steps.push(WitnessTerm::Proj2((**a).clone(), (**b).clone()));
                cur = b;
            }
        }
    }
    steps.reverse();
    (!steps.is_empty()).then(|| WitnessTerm::chain(steps))
}

fn restrict(f: &[u32], d: &[bool]) -> Vec<u32> {
    f.iter().zip(d).map(|(&v, &keep)| if keep { v } else { UNDEF }).collect()
}

fn pair_vec(f1: &[u32], f2: &[u32], n2: u32) -> Vec<u32> {
    f1.iter().zip(f2).map(|(&a, &b)| if a == UNDEF || b == UNDEF { UNDEF } else { a * n2 + b }).collect()
}

pub struct SubcatTable {
    env: Env,
    universe: Universe,
    gens: Vec<GenInfo>,
    seeds: Vec<ObjExpr>,
    targets: Vec<ObjExpr>,
    empty_obj: Option<ObjExpr>,
    sources: Mutex<HashMap<ObjExpr, Arc<Source>>>,
    homs: Mutex<HashMap<(ObjExpr, ObjExpr), Arc<Cell>>>,
    splits: Mutex<HashMap<ObjExpr, Arc<Split>>>,
}

impl std::fmt::Debug for SubcatTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubcatTable")
            .field("universe", &self.universe)
            .field("generators", &self.gens.iter().map(|g| g.term.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

/// Builds the table for the generators of `env` over `universe`. Cells are
/// saturated on first use; the result is independent of query order.
pub fn saturate(env: &Env, universe: Universe) -> Result<SubcatTable> {
    let c = &env.carriers;
    let mut maps = Vec::new();
    for (name, g) in env.generators() {
        if !g.is_single_valued() {
            return Err(SubcatError::NotSingleValued(name.clone()));
        }
        for obj in [g.src(), g.dst()] {
            if !universe.contains(obj) {
                return Err(SubcatError::GeneratorOutsideUniverse { name: name.clone(), obj: obj.to_string() });
            }
        }
        maps.push((WitnessTerm::gen(name.clone()), g.clone()));
    }
    // Wideness: the domain of every problem over the universe.
    for (name, p) in env.problems() {
        if universe.contains(p.src()) {
            maps.push((WitnessTerm::dom(WitnessTerm::gen(name.clone())), dom_m(p)));
        }
    }
    let mut gens = Vec::new();
    let mut seeds = BTreeSet::new();
    for (term, g) in maps {
        for obj in [g.src(), g.dst()] {
            for s in obj.subexpressions() {
                if let ObjExpr::Coprod(..) = s {
                    seeds.insert(s.clone());
                }
            }
        }
        let mut table = vec![UNDEF; c.carrier_len(g.src())?];
        for (x, y) in g.graph() {
            let xi = c.index_of(x, g.src()).expect("generator pairs are well-typed");
            table[xi] = c.index_of(y, g.dst()).expect("generator pairs are well-typed") as u32;
        }
        let nd = c.carrier_len(g.dst())?;
        let mut deposits = Vec::new();
        for (target, path) in components(g.dst()) {
            let proj = (0..nd).map(|i| project_index(c, g.dst(), &path, i).map(|v| v as u32)).collect::<Result<_>>()?;
            deposits.push(Deposit { term: projection_term(g.dst(), &path), target, proj });
        }
        gens.push(GenInfo { term, src: g.src().clone(), table, deposits });
    }
    let mut atoms: Vec<ObjExpr> = c.atom_names().map(ObjExpr::atom).collect();
    atoms.sort();
    let empty_obj = universe
        .bases()
        .iter()
        .find(|b| c.atom_labels(b).is_some_and(<[String]>::is_empty))
        .map(ObjExpr::atom);
    let seeds: Vec<ObjExpr> = seeds.into_iter().collect();
    let targets = atoms.into_iter().chain(seeds.iter().cloned()).collect();
    Ok(SubcatTable {
        env: env.clone(),
        universe,
        gens,
        seeds,
        targets,
        empty_obj,
        sources: Mutex::new(HashMap::default()),
        homs: Mutex::new(HashMap::default()),
        splits: Mutex::new(HashMap::default()),
    })
}

impl SubcatTable {
    /// Carriers, generators and problems; witness terms resolve against this.
    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn carriers(&self) -> &Carriers {
        &self.env.carriers
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn pin(&mut self, obj: &ObjExpr) {
        self.universe.pin(obj);
    }

    /// Number of tag-free sources saturated so far.
    pub fn saturated_sources(&self) -> usize {
        self.sources.lock().unwrap().len()
    }

    fn check(&self, obj: &ObjExpr) -> Result<()> {
        self.carriers().check_obj(obj)?;
        if self.universe.contains(obj) {
            Ok(())
        } else {
            Err(SubcatError::OutsideUniverse(obj.to_string()))
        }
    }

    /// Case analysis may extend a source by one factor, up to this depth.
    fn case_depth(&self) -> usize {
        self.universe.depth + 1
    }

    fn len(&self, obj: &ObjExpr) -> Result<usize> {
        Ok(self.carriers().carrier_len(obj)?)
    }

    pub(crate) fn split(&self, obj: &ObjExpr) -> Result<Arc<Split>> {
        if let Some(s) = self.splits.lock().unwrap().get(obj) {
            return Ok(s.clone());
        }
        let s = Arc::new(Split::new(self.carriers(), obj)?);
        Ok(self.splits.lock().unwrap().entry(obj.clone()).or_insert(s).clone())
    }

    fn source(&self, p: &ObjExpr) -> Result<Arc<Source>> {
        if let Some(s) = self.sources.lock().unwrap().get(p) {
            return Ok(s.clone());
        }
        let s = Arc::new(self.saturate_source(p)?);
        Ok(self.sources.lock().unwrap().entry(p.clone()).or_insert(s).clone())
    }

    /// The nowhere-defined morphism `p -> t`, when it is available.
    fn nowhere(&self, p: &ObjExpr, t: &ObjExpr) -> Result<Option<WitnessTerm>> {
        if self.len(t)? == 0 || self.len(p)? == 0 {
            return Ok(Some(WitnessTerm::Conn(p.clone(), t.clone())));
        }
        Ok(self.empty_obj.as_ref().map(|e| {
            WitnessTerm::comp(WitnessTerm::Conn(e.clone(), t.clone()), WitnessTerm::Conn(p.clone(), e.clone()))
        }))
    }

    /// Constants and the nowhere-defined morphism.
    fn seed_constants(&self, b: &mut Builder, p: &ObjExpr, n: usize, t: &ObjExpr) -> Result<()> {
        let elems = self.carriers().carrier(t)?;
        for (i, e) in elems.iter().enumerate() {
            b.insert(vec![i as u32; n], || WitnessTerm::Const(p.clone(), t.clone(), e.clone()));
        }
        if let Some(term) = self.nowhere(p, t)? {
            b.insert(vec![UNDEF; n], || term);
        }
        Ok(())
    }

    fn saturate_source(&self, p: &ObjExpr) -> Result<Source> {
        debug_assert!(p.is_tag_free());
        let n = self.len(p)?;
        let mut cur: BTreeMap<ObjExpr, Builder> = BTreeMap::new();
        for t in &self.targets {
            let mut b = Builder::default();
            if let ObjExpr::Atom(_) = t {
                for (leaf, path) in components(p) {
                    if &leaf == t {
                        let f = (0..n).map(|x| project_index(self.carriers(), p, &path, x).map(|v| v as u32));
                        let f = f.collect::<Result<Vec<_>>>()?;
                        b.insert(f, || projection_term(p, &path).unwrap_or_else(|| WitnessTerm::Id(p.clone())));
                    }
                }
            }
            self.seed_constants(&mut b, p, n, t)?;
            cur.insert(t.clone(), b);
        }
        let mut domains: Vec<(Vec<bool>, WitnessTerm)> = Vec::new();
        let mut known: HashSet<Vec<bool>> = HashSet::default();
        // Work already done, so each pass only handles new members.
        let mut seed_done = vec![(0, 0); self.seeds.len()];
        let mut gen_done = vec![0; self.gens.len()];
        let mut case_done = vec![0; self.seeds.len()];
        let mut dom_scanned: BTreeMap<ObjExpr, usize> = BTreeMap::new();
        let mut restricted: BTreeMap<ObjExpr, (usize, usize)> = BTreeMap::new();
        if n > 0 {
            loop {
                let mut changed = false;
                for (si, seed) in self.seeds.iter().enumerate() {
                    let ObjExpr::Coprod(c1, c2) = seed else { unreachable!("seeds are coproducts") };
                    let off = self.len(c1)? as u32;
                    let (l0, r0) = seed_done[si];
                    let (left, l1) = self.hom_new(&cur, p, c1, l0)?;
                    let (right, r1) = self.hom_new(&cur, p, c2, r0)?;
                    seed_done[si] = (l1, r1);
                    let b = cur.get_mut(seed).expect("seed cell");
                    for (f, t) in left {
                        changed |= b.insert(f, || WitnessTerm::comp(WitnessTerm::Inj1((**c1).clone(), (**c2).clone()), t));
                    }
                    for (f, t) in right {
                        let f = f.into_iter().map(|v| if v == UNDEF { UNDEF } else { v + off }).collect();
                        changed |= b.insert(f, || WitnessTerm::comp(WitnessTerm::Inj2((**c1).clone(), (**c2).clone()), t));
                    }
                }
                for (gi, g) in self.gens.iter().enumerate() {
                    let (ms, done) = self.hom_new(&cur, p, &g.src, gen_done[gi])?;
                    gen_done[gi] = done;
                    for (m, mt) in ms {
                        let gm: Vec<u32> = m.iter().map(|&v| if v == UNDEF { UNDEF } else { g.table[v as usize] }).collect();
                        for dep in &g.deposits {
                            let f = gm.iter().map(|&v| if v == UNDEF { UNDEF } else { dep.proj[v as usize] }).collect();
                            let b = cur.get_mut(&dep.target).expect("deposit target cell");
                            changed |= b.insert(f, || {
                                let mut parts: Vec<WitnessTerm> = dep.term.iter().cloned().collect();
                                parts.push(g.term.clone());
                                parts.push(mt.clone());
                                WitnessTerm::chain(parts)
                            });
                        }
                    }
                }
                for (si, seed) in self.seeds.iter().enumerate() {
                    let ms: Vec<_> = cur[seed].entries_from(case_done[si]);
                    case_done[si] += ms.len();
                    for t in &self.targets {
                        for (m, mt) in &ms {
                            let b = cur.get_mut(t).expect("target cell");
                            self.case(p, n, seed, m, mt, t, &mut |f, term| changed |= b.insert(f, term))?;
                        }
                    }
                }
                for (t, b) in &cur {
                    let from = dom_scanned.entry(t.clone()).or_insert(0);
                    for (f, ft) in b.fns[*from..].iter().zip(&b.terms[*from..]) {
                        let d: Vec<bool> = f.iter().map(|&v| v != UNDEF).collect();
                        if d.iter().any(|&x| !x) && known.insert(d.clone()) {
                            domains.push((d, WitnessTerm::dom(ft.clone())));
                        }
                    }
                    *from = b.fns.len();
                }
                // Close under intersection.
                let mut i = 0;
                while i < domains.len() {
                    for j in 0..i {
                        let d: Vec<bool> = domains[i].0.iter().zip(&domains[j].0).map(|(a, b)| *a && *b).collect();
                        if known.insert(d.clone()) {
                            let t = WitnessTerm::comp(domains[j].1.clone(), domains[i].1.clone());
                            domains.push((d, t));
                        }
                    }
                    i += 1;
                }
                for (t, b) in cur.iter_mut() {
                    let (e0, d0) = restricted.get(t).copied().unwrap_or((0, 0));
                    let (e1, d1) = (b.fns.len(), domains.len());
                    for ei in 0..e1 {
                        let dstart = if ei < e0 { d0 } else { 0 };
                        for (d, dt) in &domains[dstart..d1] {
                            let r = restrict(&b.fns[ei], d);
                            if r != b.fns[ei] {
                                let ft = b.terms[ei].clone();
                                changed |= b.insert(r, || WitnessTerm::comp(ft, dt.clone()));
                            }
                        }
                    }
                    restricted.insert(t.clone(), (e1, d1));
                }
                if !changed {
                    break;
                }
            }
        }
        Ok(Source {
            cells: cur.into_iter().map(|(t, b)| (t, Arc::new(b.finish()))).collect(),
            domains,
        })
    }

    /// Members of `hom(p, s)` not yet seen and the new position. Direct cells
    /// only grow at the end; composite ones are recomputed in full.
    fn hom_new(
        &self,
        cur: &BTreeMap<ObjExpr, Builder>,
        p: &ObjExpr,
        s: &ObjExpr,
        from: usize,
    ) -> Result<(Vec<(Vec<u32>, WitnessTerm)>, usize)> {
        match cur.get(s) {
            Some(b) => Ok((b.entries_from(from), b.fns.len())),
            None => Ok((self.hom_cur(cur, p, s)?, 0)),
        }
    }

    /// Current members of `hom(p, s)` during saturation of `p`, where `s` is
    /// built from atoms and seeds by products.
    fn hom_cur(&self, cur: &BTreeMap<ObjExpr, Builder>, p: &ObjExpr, s: &ObjExpr) -> Result<Vec<(Vec<u32>, WitnessTerm)>> {
        if let Some(b) = cur.get(s) {
            return Ok(b.entries());
        }
        let ObjExpr::Prod(s1, s2) = s else { unreachable!("generator types decompose into atoms and seeds") };
        let left = self.hom_cur(cur, p, s1)?;
        let right = self.hom_cur(cur, p, s2)?;
        let n2 = self.len(s2)? as u32;
        let mut b = Builder::default();
        for (f1, t1) in &left {
            for (f2, t2) in &right {
                b.insert(pair_vec(f1, f2, n2), || {
                    WitnessTerm::comp(WitnessTerm::prod(t1.clone(), t2.clone()), WitnessTerm::Diag(p.clone()))
                });
            }
        }
        Ok(b.entries())
    }

    /// Morphisms `p -> t` obtained by branching on `m : p -> d1 + d2` and
    /// continuing with `q_i : p * d_i -> t`. Each is passed to `emit`, which
    /// builds the witness term only when it needs it.
    #[allow(clippy::too_many_arguments)]
    fn case(
        &self,
        p: &ObjExpr,
        n: usize,
        seed: &ObjExpr,
        m: &[u32],
        mt: &WitnessTerm,
        t: &ObjExpr,
        emit: &mut dyn FnMut(Vec<u32>, &mut dyn FnMut() -> WitnessTerm),
    ) -> Result<()> {
        let ObjExpr::Coprod(d1, d2) = seed else { unreachable!("seeds are coproducts") };
        if m.iter().all(|&v| v == UNDEF) {
            return Ok(());
        }
        let n1 = self.len(d1)? as u32;
        // Per branch: its split, and per summand the points it covers with
        // the distinct behaviours there.
        type Behaviours = Vec<(Vec<u32>, usize)>;
        let mut branches: Vec<(Arc<Split>, Vec<(Vec<usize>, Arc<Cell>, Behaviours)>)> = Vec::new();
        for (i, di) in [(0u32, d1), (1, d2)] {
            let obj = ObjExpr::prod(p.clone(), (**di).clone());
            let split = self.split(&obj)?;
            if split.summands.iter().any(|s| s.depth() > self.case_depth()) {
                return Ok(());
            }
            let ndi = self.len(di)?;
            let pts: Vec<(usize, usize, usize)> = (0..n)
                .filter_map(|x| {
                    let v = m[x];
                    let side = if v == UNDEF { return None } else if v < n1 { 0 } else { 1 };
                    (side == i).then(|| {
                        let c = (v - i * n1) as usize;
                        let (k, j) = split.locate[x * ndi + c];
                        (x, k, j)
                    })
                })
                .collect();
            let mut per_summand = Vec::new();
            for (k, s) in split.summands.iter().enumerate() {
                let mine: Vec<(usize, usize)> = pts.iter().filter(|(_, kk, _)| *kk == k).map(|(x, _, j)| (*x, *j)).collect();
                let cell = self.hom_tf(s, t)?;
                if cell.is_empty() {
                    return Ok(());
                }
                let behaviours = distinct_behaviours(&cell, &mine, self.len(t)?);
                per_summand.push((mine.into_iter().map(|(x, _)| x).collect(), cell, behaviours));
            }
            branches.push((split, per_summand));
        }
        let combos = |per: &[(Vec<usize>, Arc<Cell>, Behaviours)]| {
            let mut out: Vec<(Vec<u32>, Vec<usize>)> = vec![(vec![UNDEF; n], Vec::new())];
            for (xs, _, behaviours) in per {
                let mut next = Vec::with_capacity(out.len() * behaviours.len());
                for (f, ch) in &out {
                    for (bi, (vals, _)) in behaviours.iter().enumerate() {
                        let mut f = f.clone();
                        for (x, v) in xs.iter().zip(vals) {
                            f[*x] = *v;
                        }
                        let mut ch = ch.clone();
                        ch.push(bi);
                        next.push((f, ch));
                    }
                }
                out = next;
            }
            out
        };
        let left = combos(&branches[0].1);
        let right = combos(&branches[1].1);
        let branch_term = |b: usize, ch: &[usize]| {
            let (split, per) = &branches[b];
            let ts: Vec<WitnessTerm> = ch.iter().zip(per).map(|(&bi, (_, cell, bs))| cell.term(bs[bi].1).clone()).collect();
            split.copair(&ts, t)
        };
        for (f1, ch1) in &left {
            for (f2, ch2) in &right {
                let f = f1.iter().zip(f2).map(|(&a, &b)| if a != UNDEF { a } else { b }).collect();
                emit(f, &mut || {
                    WitnessTerm::chain([
                        WitnessTerm::Codiag(t.clone()),
                        WitnessTerm::coprod(branch_term(0, ch1), branch_term(1, ch2)),
                        WitnessTerm::distr(p, d1, d2, false),
                        WitnessTerm::prod(WitnessTerm::Id(p.clone()), mt.clone()),
                        WitnessTerm::Diag(p.clone()),
                    ])
                });
            }
        }
        Ok(())
    }

    /// `hom(p, b)` for a tag-free source `p` and any target `b`.
    pub(crate) fn hom_tf(&self, p: &ObjExpr, b: &ObjExpr) -> Result<Arc<Cell>> {
        let key = (p.clone(), b.clone());
        if let Some(c) = self.homs.lock().unwrap().get(&key) {
            return Ok(c.clone());
        }
        self.carriers().check_obj(b)?;
        let src = self.source(p)?;
        let cell = match src.cells.get(b) {
            Some(c) => c.clone(),
            None => Arc::new(self.derived_cell(p, &src, b)?),
        };
        Ok(self.homs.lock().unwrap().entry(key).or_insert(cell).clone())
    }

    fn derived_cell(&self, p: &ObjExpr, src: &Source, b: &ObjExpr) -> Result<Cell> {
        let n = self.len(p)?;
        let mut out = Builder::default();
        match b {
            ObjExpr::Prod(b1, b2) => {
                let left = self.hom_tf(p, b1)?;
                let right = self.hom_tf(p, b2)?;
                let n2 = self.len(b2)? as u32;
                for (f1, t1) in left.iter() {
                    for (f2, t2) in right.iter() {
                        out.insert(pair_vec(f1, f2, n2), || {
                            WitnessTerm::comp(WitnessTerm::prod(t1.clone(), t2.clone()), WitnessTerm::Diag(p.clone()))
                        });
                    }
                }
            }
            ObjExpr::Coprod(b1, b2) => {
                let off = self.len(b1)? as u32;
                for (f, t) in self.hom_tf(p, b1)?.iter() {
                    out.insert(f.to_vec(), || WitnessTerm::comp(WitnessTerm::Inj1((**b1).clone(), (**b2).clone()), t.clone()));
                }
                for (f, t) in self.hom_tf(p, b2)?.iter() {
                    let f = f.iter().map(|&v| if v == UNDEF { UNDEF } else { v + off }).collect();
                    out.insert(f, || WitnessTerm::comp(WitnessTerm::Inj2((**b1).clone(), (**b2).clone()), t.clone()));
                }
                self.seed_constants(&mut out, p, n, b)?;
                if n > 0 {
                    for seed in &self.seeds {
                        for (m, mt) in src.cells[seed].iter() {
                            self.case(p, n, seed, m, mt, b, &mut |f, term| {
                                out.insert(f, term);
                            })?;
                        }
                    }
                    for (f, t) in out.entries() {
                        for (d, dt) in &src.domains {
                            out.insert(restrict(&f, d), || WitnessTerm::comp(t.clone(), dt.clone()));
                        }
                    }
                }
            }
            ObjExpr::Atom(a) => return Err(FinrelError::UnknownAtom(a.clone()).into()),
        }
        Ok(out.finish())
    }

    /// `hom(a, b)` in factored form: the split of `a` and one cell per summand.
    pub(crate) fn factored(&self, a: &ObjExpr, b: &ObjExpr) -> Result<(Arc<Split>, Vec<Arc<Cell>>)> {
        let split = self.split(a)?;
        let cells = split.summands.iter().map(|s| self.hom_tf(s, b)).collect::<Result<Vec<_>>>()?;
        Ok((split, cells))
    }

    /// `|hom(a, b)|`.
    pub fn hom_len(&self, a: &ObjExpr, b: &ObjExpr) -> Result<u128> {
        self.check(a)?;
        self.check(b)?;
        let (_, cells) = self.factored(a, b)?;
        Ok(cells.iter().map(|c| c.len() as u128).product())
    }

    /// All of `hom(a, b)` in canonical order, one witness per graph.
    pub fn hom_set(&self, a: &ObjExpr, b: &ObjExpr) -> Result<Vec<(SearchProblem, WitnessTerm)>> {
        let count = self.hom_len(a, b)?;
        if count > MATERIALIZE_LIMIT {
            return Err(SubcatError::TooLarge { src: a.to_string(), dst: b.to_string(), count });
        }
        let (split, cells) = self.factored(a, b)?;
        let src_elems = self.carriers().carrier(a)?;
        let dst_elems = self.carriers().carrier(b)?;
        let mut out = Vec::with_capacity(count as usize);
        let mut choice = vec![0usize; cells.len()];
        if count == 0 {
            return Ok(out);
        }
        loop {
            let mut graph = BTreeSet::new();
            for (i, &(k, j)) in split.locate.iter().enumerate() {
                let v = cells[k].fun(choice[k])[j];
                if v != UNDEF {
                    graph.insert((src_elems[i].clone(), dst_elems[v as usize].clone()));
                }
            }
            let terms: Vec<WitnessTerm> = choice.iter().zip(&cells).map(|(&c, cell)| cell.term(c).clone()).collect();
            out.push((SearchProblem::from_parts(a.clone(), b.clone(), graph), split.copair(&terms, b)));
            let mut k = cells.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < cells[k].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }

    /// A witness term for `m` when the table contains it.
    pub fn contains(&self, m: &SearchProblem) -> Result<Option<WitnessTerm>> {
        self.check(m.src())?;
        self.check(m.dst())?;
        if !m.is_single_valued() {
            return Ok(None);
        }
        let (split, cells) = self.factored(m.src(), m.dst())?;
        let src_elems = self.carriers().carrier(m.src())?;
        let mut terms = Vec::with_capacity(cells.len());
        for (k, cell) in cells.iter().enumerate() {
            let f: Vec<u32> = split.origin[k]
                .iter()
                .map(|&i| {
                    m.apply(&src_elems[i])
                        .map(|y| self.carriers().index_of(y, m.dst()).expect("well-typed") as u32)
                        .unwrap_or(UNDEF)
                })
                .collect();
            match cell.position(&f) {
                Some(pos) => terms.push(cell.term(pos).clone()),
                None => return Ok(None),
            }
        }
        Ok(Some(split.copair(&terms, m.dst())))
    }
}

/// The distinct restrictions of the members of `cell` to the positions
/// `mine[..].1`, each with the first member showing it.
fn distinct_behaviours(cell: &Cell, mine: &[(usize, usize)], target_len: usize) -> Vec<(Vec<u32>, usize)> {
    let bits = usize::BITS - target_len.leading_zeros();
    let mut out = Vec::new();
    if (mine.len() as u32) * bits <= 128 {
        // Exact packing; `UNDEF` becomes `target_len`.
        let mut seen = HashSet::default();
        for ci in 0..cell.len() {
            let f = cell.fun(ci);
            let key = mine.iter().fold(0u128, |k, (_, j)| {
                let v = if f[*j] == UNDEF { target_len as u128 } else { f[*j] as u128 };
                (k << bits) | v
            });
            if seen.insert(key) {
                out.push((mine.iter().map(|(_, j)| f[*j]).collect(), ci));
            }
        }
    } else {
        let mut seen = HashSet::default();
        for ci in 0..cell.len() {
            let f = cell.fun(ci);
            let vals: Vec<u32> = mine.iter().map(|(_, j)| f[*j]).collect();
            if seen.insert(vals.clone()) {
                out.push((vals, ci));
            }
        }
    }
    out
}
