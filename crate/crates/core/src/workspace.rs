//! Workspace files: carriers, generators and problems in one JSON document.
//!
//! ```json
//! {
//!   "atoms": {"X": ["a", "b"], "Y": ["0", "1"]},
//!   "universe_depth": 2,
//!   "star_truncation": 3,
//!   "generators": [{"name": "swap", "src": "Y", "dst": "Y", "map": {"0": "1", "1": "0"}, "bound": {"1": 1}}],
//!   "problems": [{"name": "f", "src": "X", "dst": "Y", "pairs": [["a", "0"], ["b", "1"]], "kappa": {"a": 1, "b": 2}}]
//! }
//! ```
//!
//! Objects and elements use the term grammar. Every diagnostic names the
//! JSON path it concerns.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::degrees::{pin_family, Mode};
use crate::finrel::{Carriers, Element, ObjExpr, SearchProblem};
use crate::param::{BoundTable, ParamSpace, Parameterization};
use crate::subcat::{build_universe, saturate, SubcatError, SubcatTable, Universe};
use crate::term::{is_valid_name, parse_elem, parse_obj, Env};

pub const DEFAULT_UNIVERSE_DEPTH: usize = 2;
pub const DEFAULT_STAR_TRUNCATION: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkspaceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema violation at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("type-check failure at {path}: {msg}")]
    Type { path: String, msg: String },
}

pub type Result<T, E = WorkspaceError> = std::result::Result<T, E>;

fn schema(path: &str, msg: impl Into<String>) -> WorkspaceError {
    WorkspaceError::Schema { path: path.to_string(), msg: msg.into() }
}

fn type_err(path: &str, msg: impl Into<String>) -> WorkspaceError {
    WorkspaceError::Type { path: path.to_string(), msg: msg.into() }
}

#[derive(Debug, Clone)]
pub struct GeneratorDecl {
    pub name: String,
    pub map: SearchProblem,
    pub bound: Option<BoundTable>,
}

#[derive(Debug, Clone)]
pub struct ProblemDecl {
    pub name: String,
    pub problem: SearchProblem,
    /// `κ` on the instance object.
    pub kappa: Option<Parameterization>,
}

#[derive(Debug, Clone)]
pub struct Workspace {
    pub universe_depth: usize,
    pub star_truncation: usize,
    pub generators: Vec<GeneratorDecl>,
    /// In declaration order.
    pub problems: Vec<ProblemDecl>,
    pub env: Env,
}

fn obj_field<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn check_keys(m: &Map<String, Value>, path: &str, required: &[&str], optional: &[&str]) -> Result<()> {
    for k in required {
        if !m.contains_key(*k) {
            return Err(schema(path, format!("missing field `{k}`")));
        }
    }
    if let Some(k) = m.keys().find(|k| !required.contains(&k.as_str()) && !optional.contains(&k.as_str())) {
        return Err(schema(&format!("{path}.{k}"), "unknown field"));
    }
    Ok(())
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn positive(v: &Value, path: &str) -> Result<u64> {
    match v.as_u64() {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(schema(path, "expected a positive integer")),
    }
}

struct Loader {
    carriers: Carriers,
    labels: BTreeSet<String>,
}

impl Loader {
    fn obj(&self, v: &Value, path: &str) -> Result<ObjExpr> {
        let o = parse_obj(string(v, path)?).map_err(|e| schema(path, e.to_string()))?;
        if let Some(a) = o.atoms().into_iter().find(|a| !self.carriers.has_atom(a)) {
            return Err(schema(path, format!("unknown atom `{a}`")));
        }
        Ok(o)
    }

    /// Unknown labels are schema violations; known labels in the wrong
    /// shape or atom are type errors.
    fn elem(&self, text: &str, obj: &ObjExpr, path: &str) -> Result<Element> {
        let e = parse_elem(text).map_err(|e| schema(path, e.to_string()))?;
        fn labels<'a>(e: &'a Element, out: &mut Vec<&'a str>) {
            match e {
                Element::Atom(l) => out.push(l),
                Element::Pair(a, b) => {
                    labels(a, out);
                    labels(b, out);
                }
                Element::Tag(_, a) => labels(a, out),
            }
        }
        let mut ls = Vec::new();
        labels(&e, &mut ls);
        if let Some(l) = ls.into_iter().find(|l| !self.labels.contains(*l)) {
            return Err(schema(path, format!("unknown label \"{l}\"")));
        }
        if !self.carriers.is_valid(&e, obj) {
            return Err(type_err(path, format!("{e} is not an element of {obj}")));
        }
        Ok(e)
    }
}

impl Workspace {
    pub fn from_json(text: &str) -> Result<Workspace> {
        let root: Value = serde_json::from_str(text).map_err(|e| WorkspaceError::Parse(e.to_string()))?;
        let top = obj_field(&root, "$")?;
        check_keys(top, "$", &["atoms", "problems"], &["universe_depth", "star_truncation", "generators"])?;

        let mut atoms = Vec::new();
        let mut labels = BTreeSet::new();
        for (name, ls) in obj_field(&top["atoms"], "atoms")? {
            let path = format!("atoms.{name}");
            if !is_valid_name(name) {
                return Err(schema(&path, "invalid atom name"));
            }
            let arr = ls.as_array().ok_or_else(|| schema(&path, "expected a list of labels"))?;
            let mut seen = BTreeSet::new();
            for (i, l) in arr.iter().enumerate() {
                let p = format!("{path}[{i}]");
                let l = string(l, &p)?;
                let ok = !l.is_empty() && parse_elem(l).is_ok_and(|e| matches!(e, Element::Atom(_)));
                if !ok {
                    return Err(schema(&p, format!("invalid label \"{l}\"")));
                }
                if !seen.insert(l.to_string()) {
                    return Err(schema(&p, format!("duplicate label \"{l}\"")));
                }
                labels.insert(l.to_string());
            }
            atoms.push((name.clone(), seen.into_iter().collect::<Vec<_>>()));
        }
        let ld = Loader { carriers: Carriers::new(atoms), labels };

        let depth = |key: &str, default: usize| -> Result<usize> {
            match top.get(key) {
                None => Ok(default),
                Some(v) => v.as_u64().map(|n| n as usize).ok_or_else(|| schema(key, "expected a non-negative integer")),
            }
        };
        let universe_depth = depth("universe_depth", DEFAULT_UNIVERSE_DEPTH)?;
        let star_truncation = depth("star_truncation", DEFAULT_STAR_TRUNCATION)?;
        if star_truncation == 0 {
            return Err(schema("star_truncation", "must be at least 1"));
        }

        let mut env = Env::new(ld.carriers.clone());
        let mut names = BTreeSet::new();
        let mut generators = Vec::new();
        let empty = Vec::new();
        let gens = match top.get("generators") {
            None => &empty,
            Some(v) => v.as_array().ok_or_else(|| schema("generators", "expected a list"))?,
        };
        for (i, g) in gens.iter().enumerate() {
            let path = format!("generators[{i}]");
            let m = obj_field(g, &path)?;
            check_keys(m, &path, &["name", "src", "dst", "map"], &["bound"])?;
            let name = Self::name(&m["name"], &format!("{path}.name"), &mut names)?;
            let src = ld.obj(&m["src"], &format!("{path}.src"))?;
            let dst = ld.obj(&m["dst"], &format!("{path}.dst"))?;
            let mut pairs = Vec::new();
            for (x, y) in obj_field(&m["map"], &format!("{path}.map"))? {
                let p = format!("{path}.map.{x}");
                pairs.push((ld.elem(x, &src, &p)?, ld.elem(string(y, &p)?, &dst, &p)?));
            }
            let map = SearchProblem::new(&ld.carriers, src, dst, pairs).map_err(|e| type_err(&path, e.to_string()))?;
            let bound = match m.get("bound") {
                None => None,
                Some(b) => {
                    let bp = format!("{path}.bound");
                    let mut entries = BTreeMap::new();
                    for (k, v) in obj_field(b, &bp)? {
                        let kp = format!("{bp}.{k}");
                        let k: u64 = k.parse().ok().filter(|&k| k >= 1).ok_or_else(|| schema(&kp, "keys are positive integers"))?;
                        entries.insert(k, positive(v, &kp)?);
                    }
                    Some(BoundTable::new(entries).map_err(|e| type_err(&bp, e.to_string()))?)
                }
            };
            env.add_generator(name.clone(), map.clone()).map_err(|e| type_err(&path, e.to_string()))?;
            generators.push(GeneratorDecl { name, map, bound });
        }

        let mut problems = Vec::new();
        let arr = top["problems"].as_array().ok_or_else(|| schema("problems", "expected a list"))?;
        for (i, p) in arr.iter().enumerate() {
            let path = format!("problems[{i}]");
            let m = obj_field(p, &path)?;
            check_keys(m, &path, &["name", "src", "dst", "pairs"], &["kappa"])?;
            let name = Self::name(&m["name"], &format!("{path}.name"), &mut names)?;
            let src = ld.obj(&m["src"], &format!("{path}.src"))?;
            let dst = ld.obj(&m["dst"], &format!("{path}.dst"))?;
            let list = m["pairs"].as_array().ok_or_else(|| schema(&format!("{path}.pairs"), "expected a list"))?;
            let mut pairs = Vec::new();
            for (j, pr) in list.iter().enumerate() {
                let pp = format!("{path}.pairs[{j}]");
                let xy = pr.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema(&pp, "expected a pair [x, y]"))?;
                pairs.push((ld.elem(string(&xy[0], &pp)?, &src, &pp)?, ld.elem(string(&xy[1], &pp)?, &dst, &pp)?));
            }
            let problem =
                SearchProblem::new(&ld.carriers, src.clone(), dst, pairs).map_err(|e| type_err(&path, e.to_string()))?;
            let kappa = match m.get("kappa") {
                None => None,
                Some(k) => {
                    let kp = format!("{path}.kappa");
                    let mut map = BTreeMap::new();
                    for (x, v) in obj_field(k, &kp)? {
                        let xp = format!("{kp}.{x}");
                        map.insert(ld.elem(x, &src, &xp)?, positive(v, &xp)?);
                    }
                    Some(Parameterization::new(&ld.carriers, src, map).map_err(|e| type_err(&kp, e.to_string()))?)
                }
            };
            env.add_problem(name.clone(), problem.clone()).map_err(|e| type_err(&path, e.to_string()))?;
            problems.push(ProblemDecl { name, problem, kappa });
        }
        let ws = Workspace { universe_depth, star_truncation, generators, problems, env };
        ws.param_space()?;
        Ok(ws)
    }

    fn name(v: &Value, path: &str, seen: &mut BTreeSet<String>) -> Result<String> {
        let n = string(v, path)?;
        if !is_valid_name(n) {
            return Err(schema(path, format!("invalid name `{n}`")));
        }
        if !seen.insert(n.to_string()) {
            return Err(schema(path, format!("duplicate name `{n}`")));
        }
        Ok(n.to_string())
    }

    pub fn carriers(&self) -> &Carriers {
        &self.env.carriers
    }

    pub fn problem_names(&self) -> Vec<String> {
        self.problems.iter().map(|p| p.name.clone()).collect()
    }

    pub fn problem(&self, name: &str) -> Option<&ProblemDecl> {
        self.problems.iter().find(|p| p.name == name)
    }

    /// The depth-bounded universe over all atoms, with every declared
    /// problem pinned for `modes`, plus `extra` problems of `env`.
    pub fn universe(&self, env: &Env, extra: &[String], modes: &[Mode]) -> Result<Universe, crate::degrees::DegreeError> {
        let bases: Vec<String> = self.carriers().atom_names().map(String::from).collect();
        let mut u = build_universe(bases, self.universe_depth);
        let mut names = self.problem_names();
        names.extend(extra.iter().cloned());
        for &m in modes {
            pin_family(&mut u, env, &names, m)?;
        }
        Ok(u)
    }

    /// Saturates `env` over [`Workspace::universe`].
    pub fn table(&self, env: &Env, extra: &[String], modes: &[Mode]) -> Result<SubcatTable, TableError> {
        let u = self.universe(env, extra, modes)?;
        Ok(saturate(env, u)?)
    }

    /// Registered parameterizations: every problem's `kappa` on its
    /// instance object. Two problems on one object must agree.
    pub fn param_space(&self) -> Result<ParamSpace> {
        let mut s = ParamSpace::new();
        for (i, p) in self.problems.iter().enumerate() {
            if let Some(k) = &p.kappa {
                s.register(k.clone()).map_err(|e| type_err(&format!("problems[{i}].kappa"), e.to_string()))?;
            }
        }
        Ok(s)
    }

    pub fn bounds(&self) -> BTreeMap<String, BoundTable> {
        self.generators.iter().filter_map(|g| Some((g.name.clone(), g.bound.clone()?))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error(transparent)]
    Degree(#[from] crate::degrees::DegreeError),
    #[error(transparent)]
    Subcat(#[from] SubcatError),
}
