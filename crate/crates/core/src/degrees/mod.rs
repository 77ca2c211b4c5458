//! Degrees of a finite family: the oracle preorder, its quotient by mutual
//! reducibility, the Hasse diagram and lattice checks.
//!
//! Everything here is relative to one saturated table. Cells the oracle
//! cannot settle (objects outside the universe, exhausted budget) are kept
//! apart from negative verdicts and block the quotient.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::finrel::{coproduct_m, star_obj, ObjExpr, SearchProblem};
use crate::reduce::{
    check_cert, decide, distrib_cert, inf_proj_cert, inf_univ_cert, lookup, register_inf, register_sup, sup_inj_cert,
    sup_univ_cert, wtt_leq, Kind, OracleVerdict, ReduceError, ReductionCert,
};
use crate::finrel::Side;
use crate::subcat::{SubcatTable, Universe};
use crate::term::Env;

#[cfg(test)]
mod tests;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DegreeError {
    #[error("not a preorder: {0}")]
    NotPreorder(String),
    #[error("{0} cell(s) undecided here, first {1}")]
    Undecided(usize, String),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

pub type Result<T, E = DegreeError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    M,
    Sm,
    /// `f ≤_m g^{≤N}`; `N` is part of the verdict.
    Wtt(usize),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::M => f.write_str("m"),
            Mode::Sm => f.write_str("sm"),
            Mode::Wtt(n) => write!(f, "wtt({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    /// Outside the universe or over budget; never read as `No`.
    Undecidable(String),
}

/// One oracle call in `mode`. Undecidability becomes a verdict, other errors
/// propagate.
pub fn decide_mode(env: &mut Env, table: &SubcatTable, f: &str, g: &str, mode: Mode) -> Result<(Verdict, Option<ReductionCert>)> {
    let r: std::result::Result<OracleVerdict, ReduceError> = match mode {
        Mode::M => decide(env, table, f, g, Kind::M),
        Mode::Sm => decide(env, table, f, g, Kind::Sm),
        Mode::Wtt(n) => wtt_leq(env, table, f, g, n),
    };
    match r {
        Ok(v) => Ok(match v.cert() {
            Some(c) => (Verdict::Yes, Some(c.clone())),
            None => (Verdict::No, None),
        }),
        Err(e @ (ReduceError::Undecidable(_) | ReduceError::Budget(_))) => Ok((Verdict::Undecidable(e.to_string()), None)),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreorderMatrix {
    pub problems: Vec<String>,
    pub mode: Mode,
    /// `cells[i][j]` is the verdict on `problems[i] ≤ problems[j]`.
    pub cells: Vec<Vec<Verdict>>,
}

impl PreorderMatrix {
    /// Undecided cells as `(i, j, reason)`.
    pub fn flagged(&self) -> Vec<(usize, usize, &str)> {
        let mut out = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Verdict::Undecidable(r) = v {
                    out.push((i, j, r.as_str()));
                }
            }
        }
        out
    }

    /// The boolean relation, available once every cell is decided.
    pub fn relation(&self) -> Result<Vec<Vec<bool>>> {
        let flagged = self.flagged();
        if let Some(&(i, j, r)) = flagged.first() {
            return Err(DegreeError::Undecided(
                flagged.len(),
                format!("{} ≤ {}: {r}", self.problems[i], self.problems[j]),
            ));
        }
        Ok(self.cells.iter().map(|row| row.iter().map(|v| *v == Verdict::Yes).collect()).collect())
    }

    /// Tab-separated, with a header row and `1`/`0`/`?` cells.
    pub fn to_tsv(&self) -> String {
        let mut s = format!("{}", self.mode);
        for p in &self.problems {
            s.push('\t');
            s.push_str(p);
        }
        s.push('\n');
        for (p, row) in self.problems.iter().zip(&self.cells) {
            s.push_str(p);
            for v in row {
                s.push('\t');
                s.push_str(match v {
                    Verdict::Yes => "1",
                    Verdict::No => "0",
                    Verdict::Undecidable(_) => "?",
                });
            }
            s.push('\n');
        }
        s
    }
}

/// The oracle verdict for every ordered pair of `names`.
pub fn preorder_matrix(env: &mut Env, table: &SubcatTable, names: &[String], mode: Mode) -> Result<PreorderMatrix> {
    let mut cells = Vec::with_capacity(names.len());
    for f in names {
        let mut row = Vec::with_capacity(names.len());
        for g in names {
            row.push(decide_mode(env, table, f, g, mode)?.0);
        }
        cells.push(row);
    }
    Ok(PreorderMatrix { problems: names.to_vec(), mode, cells })
}

fn check_preorder(m: &[Vec<bool>]) -> Result<()> {
    let n = m.len();
    if let Some(i) = m.iter().position(|r| r.len() != n) {
        return Err(DegreeError::NotPreorder(format!("row {i} has length {}, expected {n}", m[i].len())));
    }
    if let Some(i) = (0..n).find(|&i| !m[i][i]) {
        return Err(DegreeError::NotPreorder(format!("not reflexive at {i}")));
    }
    for i in 0..n {
        for j in 0..n {
            if !m[i][j] {
                continue;
            }
            if let Some(k) = (0..n).find(|&k| m[j][k] && !m[i][k]) {
                return Err(DegreeError::NotPreorder(format!("not transitive at {i} ≤ {j} ≤ {k}")));
            }
        }
    }
    Ok(())
}

/// Mutual-reducibility blocks, each sorted, ordered by least member.
pub fn degree_classes(m: &[Vec<bool>]) -> Result<Vec<Vec<usize>>> {
    check_preorder(m)?;
    let mut seen = vec![false; m.len()];
    let mut classes = Vec::new();
    for i in 0..m.len() {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (i..m.len()).filter(|&j| m[i][j] && m[j][i]).collect();
        for &j in &class {
            seen[j] = true;
        }
        classes.push(class);
    }
    Ok(classes)
}

/// Cover pairs `(lower, upper)` of the quotient order, as class indices.
pub fn hasse(classes: &[Vec<usize>], m: &[Vec<bool>]) -> Result<Vec<(usize, usize)>> {
    check_preorder(m)?;
    let members: usize = classes.iter().map(Vec::len).sum();
    let distinct: BTreeSet<usize> = classes.iter().flatten().copied().collect();
    if members != m.len() || distinct.len() != m.len() || distinct.iter().any(|&i| i >= m.len()) {
        return Err(DegreeError::NotPreorder("classes do not partition the family".into()));
    }
    for c in classes {
        if c.is_empty() || c.iter().any(|&i| !(m[i][c[0]] && m[c[0]][i])) {
            return Err(DegreeError::NotPreorder("a class is not a mutual-reducibility block".into()));
        }
    }
    let n = classes.len();
    let lt = |a: usize, b: usize| a != b && m[classes[a][0]][classes[b][0]];
    for a in 0..n {
        for b in 0..n {
            if a != b && lt(a, b) && lt(b, a) {
                return Err(DegreeError::NotPreorder(format!("classes {a} and {b} are mutually reducible")));
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)) {
                edges.push((a, b));
            }
        }
    }
    Ok(edges)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT text for the Hasse diagram; edges point upwards, bottom at the bottom.
pub fn to_dot(problems: &[String], classes: &[Vec<usize>], edges: &[(usize, usize)]) -> String {
    let mut s = String::from("digraph degrees {\n  rankdir=BT;\n  node [shape=box];\n");
    for (k, c) in classes.iter().enumerate() {
        let label: Vec<&str> = c.iter().map(|&i| problems[i].as_str()).collect();
        s.push_str(&format!("  c{k} [label=\"{}\"];\n", dot_escape(&label.join(", "))));
    }
    for (a, b) in edges {
        s.push_str(&format!("  c{a} -> c{b};\n"));
    }
    s.push_str("}\n");
    s
}

/// Pins what deciding among `names` in `mode` needs: the problems' objects,
/// every `Dom f × CDom g`, and star truncations in wtt mode.
pub fn pin_family(u: &mut Universe, env: &Env, names: &[String], mode: Mode) -> Result<()> {
    let probs: Vec<&SearchProblem> = names.iter().map(|n| lookup(env, n)).collect::<std::result::Result<_, _>>()?;
    let targets: Vec<ObjExpr> = match mode {
        Mode::Wtt(n) => probs.iter().map(|p| star_obj(p.dst(), n)).collect(),
        _ => probs.iter().map(|p| p.dst().clone()).collect(),
    };
    for p in &probs {
        u.pin(p.src());
        u.pin(p.dst());
        if let Mode::Wtt(n) = mode {
            u.pin(&star_obj(p.src(), n));
        }
    }
    for t in &targets {
        u.pin(t);
        for p in &probs {
            u.pin(&ObjExpr::prod(p.src().clone(), t.clone()));
        }
    }
    Ok(())
}

/// Registers `f ⊔ g` and `f ⊕ g` for every unordered pair, including
/// `f = g`, and returns the family followed by the new names.
pub fn close_family(env: &mut Env, family: &[String]) -> Result<Vec<String>> {
    let mut out = family.to_vec();
    let mut infs = Vec::new();
    for (i, f) in family.iter().enumerate() {
        for g in &family[i..] {
            out.push(register_sup(env, f, g)?);
            infs.push(register_inf(env, f, g)?);
        }
    }
    out.extend(infs);
    let mut seen = BTreeSet::new();
    out.retain(|n| seen.insert(n.clone()));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `f, g ≤ f ⊔ g`.
    SupUpper,
    /// `f ⊔ g ≤ h` for an upper bound `h`.
    SupLeast,
    /// `f ⊕ g ≤ f, g`.
    InfLower,
    /// `h ≤ f ⊕ g` for a lower bound `h`.
    InfGreatest,
    /// `f ⊕ (g1 ⊔ g2) ≡ (f ⊕ g1) ⊔ (f ⊕ g2)`.
    Distributive,
}

/// Oracle verdicts hold within the family only; certificates are the
/// universally valid constructions, checked on the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Family,
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail(String),
    Undecidable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeFinding {
    pub check: Check,
    pub evidence: Evidence,
    /// The pair (or triple) checked, then the candidate, then the bound.
    pub subjects: Vec<String>,
    pub outcome: Outcome,
}

impl LatticeFinding {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

impl fmt::Display for LatticeFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let check = match self.check {
            Check::SupUpper => "sup-upper",
            Check::SupLeast => "sup-least",
            Check::InfLower => "inf-lower",
            Check::InfGreatest => "inf-greatest",
            Check::Distributive => "distributive",
        };
        let ev = match self.evidence {
            Evidence::Family => "family",
            Evidence::Certificate => "cert",
        };
        let out = match &self.outcome {
            Outcome::Pass => "PASS".to_string(),
            Outcome::Fail(r) => format!("FAIL {r}"),
            Outcome::Undecidable(r) => format!("UNDECIDED {r}"),
        };
        write!(f, "{check}\t{ev}\t{}\t{out}", self.subjects.join(" "))
    }
}

/// Memoized `m`-verdicts with their certificates.
struct Oracle<'a> {
    table: &'a SubcatTable,
    memo: std::collections::HashMap<(String, String), (Verdict, Option<ReductionCert>)>,
}

impl Oracle<'_> {
    fn leq(&mut self, env: &mut Env, f: &str, g: &str) -> Result<(Verdict, Option<ReductionCert>)> {
        let key = (f.to_string(), g.to_string());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = decide_mode(env, self.table, f, g, Mode::M)?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

fn outcome_all(parts: &[(&str, &Verdict)]) -> Outcome {
    if let Some((what, Verdict::Undecidable(r))) = parts.iter().find(|(_, v)| matches!(v, Verdict::Undecidable(_))) {
        return Outcome::Undecidable(format!("{what}: {r}"));
    }
    match parts.iter().find(|(_, v)| **v == Verdict::No) {
        Some((what, _)) => Outcome::Fail(format!("{what} fails")),
        None => Outcome::Pass,
    }
}

fn cert_outcome(r: std::result::Result<Vec<ReductionCert>, ReduceError>, env: &Env) -> Outcome {
    match r {
        Err(e) => Outcome::Fail(e.to_string()),
        Ok(certs) => {
            for c in certs {
                match check_cert(&c, env) {
                    Ok(chk) if chk.valid => {}
                    Ok(_) => return Outcome::Fail(format!("certificate for {} ≤_{} {} does not validate", c.f, c.kind, c.g)),
                    Err(e) => return Outcome::Fail(e.to_string()),
                }
            }
            Outcome::Pass
        }
    }
}

/// Family-evidence checks that `candidate` is the supremum of `f` and `g`
/// among `bounds`. Used for the true `f ⊔ g` and for faulty candidates.
pub fn verify_sup_candidate(
    env: &mut Env,
    table: &SubcatTable,
    f: &str,
    g: &str,
    candidate: &str,
    bounds: &[String],
) -> Result<Vec<LatticeFinding>> {
    let mut o = Oracle { table, memo: Default::default() };
    sup_family(env, &mut o, f, g, candidate, bounds)
}

fn sup_family(env: &mut Env, o: &mut Oracle, f: &str, g: &str, s: &str, bounds: &[String]) -> Result<Vec<LatticeFinding>> {
    let subj = |extra: &[&str]| [f, g, s].iter().chain(extra).map(|x| x.to_string()).collect::<Vec<_>>();
    let vf = o.leq(env, f, s)?.0;
    let vg = o.leq(env, g, s)?.0;
    let mut out = vec![LatticeFinding {
        check: Check::SupUpper,
        evidence: Evidence::Family,
        subjects: subj(&[]),
        outcome: outcome_all(&[(&format!("{f} ≤ {s}"), &vf), (&format!("{g} ≤ {s}"), &vg)]),
    }];
    for h in bounds {
        let hf = o.leq(env, f, h)?.0;
        let hg = o.leq(env, g, h)?.0;
        if hf == Verdict::No || hg == Verdict::No {
            continue;
        }
        let least = o.leq(env, s, h)?.0;
        let outcome = outcome_all(&[(&format!("{f} ≤ {h}"), &hf), (&format!("{g} ≤ {h}"), &hg), (&format!("{s} ≤ {h}"), &least)]);
        out.push(LatticeFinding { check: Check::SupLeast, evidence: Evidence::Family, subjects: subj(&[h]), outcome });
    }
    Ok(out)
}

fn inf_family(env: &mut Env, o: &mut Oracle, f: &str, g: &str, i: &str, bounds: &[String]) -> Result<Vec<LatticeFinding>> {
    let subj = |extra: &[&str]| [f, g, i].iter().chain(extra).map(|x| x.to_string()).collect::<Vec<_>>();
    let vf = o.leq(env, i, f)?.0;
    let vg = o.leq(env, i, g)?.0;
    let mut out = vec![LatticeFinding {
        check: Check::InfLower,
        evidence: Evidence::Family,
        subjects: subj(&[]),
        outcome: outcome_all(&[(&format!("{i} ≤ {f}"), &vf), (&format!("{i} ≤ {g}"), &vg)]),
    }];
    for h in bounds {
        let hf = o.leq(env, h, f)?.0;
        let hg = o.leq(env, h, g)?.0;
        if hf == Verdict::No || hg == Verdict::No {
            continue;
        }
        let great = o.leq(env, h, i)?.0;
        let outcome = outcome_all(&[(&format!("{h} ≤ {f}"), &hf), (&format!("{h} ≤ {g}"), &hg), (&format!("{h} ≤ {i}"), &great)]);
        out.push(LatticeFinding { check: Check::InfGreatest, evidence: Evidence::Family, subjects: subj(&[h]), outcome });
    }
    Ok(out)
}

/// Sup, inf and distributivity checks for `family`. Bounds range over the
/// family closed under pairwise `⊔` and `⊕`; the table should have been
/// saturated after [`close_family`] and [`pin_family`] on that closure.
pub fn verify_lattice(env: &mut Env, table: &SubcatTable, family: &[String]) -> Result<Vec<LatticeFinding>> {
    let bounds = close_family(env, family)?;
    let mut o = Oracle { table, memo: Default::default() };
    let mut out = Vec::new();
    for (a, f) in family.iter().enumerate() {
        for g in &family[a..] {
            let (f, g) = (f.as_str(), g.as_str());
            let s = register_sup(env, f, g)?;
            let i = register_inf(env, f, g)?;

            out.extend(sup_family(env, &mut o, f, g, &s, &bounds)?);
            let r = (0..2).map(|k| sup_inj_cert(env, &[f, g], k)).collect();
            let outcome = cert_outcome(r, env);
            out.push(LatticeFinding { check: Check::SupUpper, evidence: Evidence::Certificate, subjects: vec![f.into(), g.into(), s.clone()], outcome });
            for h in &bounds {
                let (Some(cf), Some(cg)) = (o.leq(env, f, h)?.1, o.leq(env, g, h)?.1) else { continue };
                let outcome = cert_outcome(sup_univ_cert(env, &[cf, cg]).map(|c| vec![c]), env);
                let subjects = vec![f.into(), g.into(), s.clone(), h.clone()];
                out.push(LatticeFinding { check: Check::SupLeast, evidence: Evidence::Certificate, subjects, outcome });
            }

            out.extend(inf_family(env, &mut o, f, g, &i, &bounds)?);
            let r = [Side::Left, Side::Right].into_iter().map(|side| inf_proj_cert(env, f, g, side)).collect();
            let outcome = cert_outcome(r, env);
            out.push(LatticeFinding { check: Check::InfLower, evidence: Evidence::Certificate, subjects: vec![f.into(), g.into(), i.clone()], outcome });
            for h in &bounds {
                let (Some(cf), Some(cg)) = (o.leq(env, h, f)?.1, o.leq(env, h, g)?.1) else { continue };
                let outcome = cert_outcome(inf_univ_cert(env, &cf, &cg).map(|c| vec![c]), env);
                let subjects = vec![f.into(), g.into(), i.clone(), h.clone()];
                out.push(LatticeFinding { check: Check::InfGreatest, evidence: Evidence::Certificate, subjects, outcome });
            }
        }
    }
    for f in family {
        for g1 in family {
            for g2 in family {
                let outcome = cert_outcome(distrib_cert(env, f, g1, g2).map(|(a, b)| vec![a, b]), env);
                let subjects = vec![f.clone(), g1.clone(), g2.clone()];
                out.push(LatticeFinding { check: Check::Distributive, evidence: Evidence::Certificate, subjects, outcome });
            }
        }
    }
    Ok(out)
}

/// `f ⊔ g` with the right summand dropped: a wrong supremum that the
/// universal-property checks must catch whenever `g` has instances.
pub fn register_faulty_sup(env: &mut Env, f: &str, g: &str) -> Result<String> {
    let fp = lookup(env, f)?.clone();
    let gp = lookup(env, g)?;
    let empty = SearchProblem::empty(gp.src().clone(), gp.dst().clone());
    let name = format!("dropsup{{{f},{g}}}");
    env.ensure_problem(&name, coproduct_m(&fp, &empty)).map_err(ReduceError::from)?;
    Ok(name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub problems: Vec<String>,
    pub mode: Mode,
    pub matrix: PreorderMatrix,
    pub classes: Vec<Vec<usize>>,
    /// Cover pairs `(lower, upper)` over `classes`.
    pub hasse: Vec<(usize, usize)>,
    pub lattice_findings: Vec<LatticeFinding>,
    pub universe_depth: usize,
}

impl DegreeReport {
    pub fn dot(&self) -> String {
        to_dot(&self.problems, &self.classes, &self.hasse)
    }
}

/// Matrix, classes and Hasse diagram of `names`; lattice checks on request
/// (in `m` mode, whatever `mode` is).
pub fn degree_report(env: &mut Env, table: &SubcatTable, names: &[String], mode: Mode, lattice: bool) -> Result<DegreeReport> {
    let matrix = preorder_matrix(env, table, names, mode)?;
    let rel = matrix.relation()?;
    let classes = degree_classes(&rel)?;
    let hasse = hasse(&classes, &rel)?;
    let lattice_findings = if lattice { verify_lattice(env, table, names)? } else { Vec::new() };
    Ok(DegreeReport {
        problems: names.to_vec(),
        mode,
        matrix,
        classes,
        hasse,
        lattice_findings,
        universe_depth: table.universe().depth(),
    })
}
