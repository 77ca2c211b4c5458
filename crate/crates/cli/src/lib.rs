//! Command-line front end: loads workspaces, dispatches subcommands and maps
//! outcomes to exit codes (0 affirmative, 1 negative, 2 input or usage
//! error).

use std::collections::BTreeSet;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use manyone::degrees::{
    close_family, degree_report, preorder_matrix, verify_lattice, Mode, Outcome,
};
use manyone::finrel::{verify_pcategory_axioms, Violation};
use manyone::param::{check_param_morphism, derive_bound, param_reduce_check, ParamCert, ParamError, ParamMode, ParamMorphism, ParamProblem, Parameterization};
use manyone::reduce::{check_cert, decide, ensure_derived, wtt_leq, Definedness, Kind, ReduceError, ReductionCert};
use manyone::term::{parse_term_syntax, Env};
use manyone::workspace::{TableError, Workspace, WorkspaceError};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "manyone", about = "Decide and certify many-one reductions between finite search problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    M,
    Sm,
    Wtt,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Randomized check of the p-category equations on finite relations.
    Axioms {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_atom_size: usize,
    },
    /// Decide F ≤ G with the exhaustive oracle.
    Reduce {
        workspace: PathBuf,
        f: String,
        g: String,
        #[arg(long, value_enum, default_value_t = ModeArg::M)]
        mode: ModeArg,
        /// Star truncation for wtt (default: the workspace's).
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long)]
        emit_cert: Option<PathBuf>,
    },
    /// Validate a certificate file against a workspace.
    CheckCert { workspace: PathBuf, cert: PathBuf },
    /// The reducibility matrix of all problems, as TSV.
    Order {
        workspace: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::M)]
        mode: ModeArg,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Degree classes and their Hasse diagram in DOT.
    Hasse {
        workspace: PathBuf,
        #[arg(long)]
        dot: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::M)]
        mode: ModeArg,
        #[arg(long)]
        trunc: Option<usize>,
    },
    /// Supremum, infimum and distributivity checks on all problems.
    Lattice { workspace: PathBuf },
    /// Parameter-bound checks: generator bounds, or a reduction F ≤ G.
    ParamCheck { workspace: PathBuf, f: Option<String>, g: Option<String> },
}

/// Input problems: bad files, bad names, objects outside the universe.
#[derive(Debug)]
struct InputError(String);

impl<E: Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Res = Result<i32, InputError>;

/// Runs `manyone` with `argv` (including the program name).
pub fn run<O: Write, E: Write>(argv: &[String], out: &mut O, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_YES };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

pub fn load_workspace(path: &Path) -> Result<Workspace, WorkspaceError> {
    let text = std::fs::read_to_string(path).map_err(|e| WorkspaceError::Parse(format!("{}: {e}", path.display())))?;
    Workspace::from_json(&text)
}

fn mode_of(ws: &Workspace, m: ModeArg, trunc: Option<usize>) -> Result<Mode, InputError> {
    Ok(match m {
        ModeArg::M => Mode::M,
        ModeArg::Sm => Mode::Sm,
        ModeArg::Wtt => {
            let n = trunc.unwrap_or(ws.star_truncation);
            if n == 0 {
                return Err(InputError("--trunc must be at least 1".into()));
            }
            Mode::Wtt(n)
        }
    })
}

fn table(ws: &Workspace, env: &Env, extra: &[String], mode: Mode) -> Result<manyone::subcat::SubcatTable, TableError> {
    let modes: Vec<Mode> = if mode == Mode::M { vec![Mode::M] } else { vec![Mode::M, mode] };
    ws.table(env, extra, &modes)
}

fn dispatch<O: Write>(cmd: Command, out: &mut O) -> Res {
    match cmd {
        Command::Axioms { cases, seed, max_atom_size } => {
            let report = verify_pcategory_axioms(seed, cases, max_atom_size)?;
            writeln!(out, "{report}")?;
            Ok(if report.all_pass() { EXIT_YES } else { EXIT_NO })
        }
        Command::Reduce { workspace, f, g, mode, trunc, emit_cert } => {
            let ws = load_workspace(&workspace)?;
            let mode = mode_of(&ws, mode, trunc)?;
            reduce(&ws, &f, &g, mode, emit_cert.as_deref(), out)
        }
        Command::CheckCert { workspace, cert } => {
            let ws = load_workspace(&workspace)?;
            let text = std::fs::read_to_string(&cert).map_err(|e| InputError(format!("{}: {e}", cert.display())))?;
            check_cert_file(&ws, &text, out)
        }
        Command::Order { workspace, mode, trunc } => {
            let ws = load_workspace(&workspace)?;
            let mode = mode_of(&ws, mode, trunc)?;
            let mut env = ws.env.clone();
            let t = table(&ws, &env, &[], mode)?;
            let m = preorder_matrix(&mut env, &t, &ws.problem_names(), mode)?;
            write!(out, "{}", m.to_tsv())?;
            match m.flagged().first() {
                None => Ok(EXIT_YES),
                Some((i, j, r)) => Err(InputError(format!(
                    "{} cell(s) undecided (first {} ≤ {}: {r}); raise universe_depth",
                    m.flagged().len(),
                    m.problems[*i],
                    m.problems[*j]
                ))),
            }
        }
        Command::Hasse { workspace, dot, mode, trunc } => {
            let ws = load_workspace(&workspace)?;
            let mode = mode_of(&ws, mode, trunc)?;
            let mut env = ws.env.clone();
            let t = table(&ws, &env, &[], mode)?;
            let r = degree_report(&mut env, &t, &ws.problem_names(), mode, false)?;
            std::fs::write(&dot, r.dot()).map_err(|e| InputError(format!("{}: {e}", dot.display())))?;
            writeln!(out, "mode {} at depth {}: {} classes, {} covers", r.mode, r.universe_depth, r.classes.len(), r.hasse.len())?;
            for (k, c) in r.classes.iter().enumerate() {
                let names: Vec<&str> = c.iter().map(|&i| r.problems[i].as_str()).collect();
                writeln!(out, "c{k}\t{}", names.join(", "))?;
            }
            for (a, b) in &r.hasse {
                writeln!(out, "c{a} < c{b}")?;
            }
            Ok(EXIT_YES)
        }
        Command::Lattice { workspace } => {
            let ws = load_workspace(&workspace)?;
            lattice(&ws, out)
        }
        Command::ParamCheck { workspace, f, g } => {
            let ws = load_workspace(&workspace)?;
            match (f, g) {
                (None, None) => param_generators(&ws, out),
                (Some(f), Some(g)) => param_reduction(&ws, &f, &g, out),
                _ => Err(InputError("param-check takes either no problems or both F and G".into())),
            }
        }
    }
}

fn known(ws: &Workspace, name: &str) -> Result<(), InputError> {
    if ws.problem(name).is_some() {
        Ok(())
    } else {
        Err(InputError(format!("unknown problem `{name}`")))
    }
}

fn reduce<O: Write>(ws: &Workspace, f: &str, g: &str, mode: Mode, emit: Option<&Path>, out: &mut O) -> Res {
    known(ws, f)?;
    known(ws, g)?;
    let mut env = ws.env.clone();
    let t = table(ws, &env, &[], mode)?;
    let verdict = match mode {
        Mode::M => decide(&env, &t, f, g, Kind::M),
        Mode::Sm => decide(&env, &t, f, g, Kind::Sm),
        Mode::Wtt(n) => wtt_leq(&mut env, &t, f, g, n),
    };
    let v = match verdict {
        Ok(v) => v,
        Err(e @ (ReduceError::Undecidable(_) | ReduceError::Budget(_))) => {
            return Err(InputError(format!("UNDECIDED: {e}; raise universe_depth")))
        }
        Err(e) => return Err(e.into()),
    };
    match v.cert() {
        None => {
            writeln!(out, "NO (exhaustive at depth {})", v.universe_depth)?;
            Ok(EXIT_NO)
        }
        Some(c) => {
            writeln!(out, "YES {f} ≤_{mode} {g}")?;
            writeln!(out, "{}", c.to_json())?;
            if let Some(p) = emit {
                std::fs::write(p, c.to_json() + "\n").map_err(|e| InputError(format!("{}: {e}", p.display())))?;
            }
            Ok(EXIT_YES)
        }
    }
}

fn check_cert_file<O: Write>(ws: &Workspace, text: &str, out: &mut O) -> Res {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| InputError(format!("certificate: {e}")))?;
    let mut env = ws.env.clone();
    // Derived problems named by the certificate or its terms.
    let mut names = BTreeSet::new();
    for key in ["f", "g"] {
        if let Some(n) = raw.get(key).and_then(|v| v.as_str()) {
            names.insert(n.to_string());
        }
    }
    for key in ["H", "K"] {
        if let Some(t) = raw.get(key).and_then(|v| v.as_str()).and_then(|s| parse_term_syntax(s).ok()) {
            names.extend(t.generators().into_iter().map(String::from));
        }
    }
    for n in &names {
        if env.generator(n).is_none() {
            ensure_derived(&mut env, n)?;
        }
    }
    let cert = ReductionCert::from_json(text, &env)?;
    let chk = match check_cert(&cert, &env) {
        Ok(c) => c,
        Err(e @ ReduceError::IllTyped { .. }) => {
            writeln!(out, "INVALID {} ≤_{} {}: {e}", cert.f, cert.kind, cert.g)?;
            return Ok(EXIT_NO);
        }
        Err(e) => return Err(e.into()),
    };
    if chk.valid {
        writeln!(out, "VALID {} ≤_{} {}", cert.f, cert.kind, cert.g)?;
        return Ok(EXIT_YES);
    }
    let why = match (&chk.order.violation, &chk.definedness) {
        (Some(Violation::Instance(x)), _) => format!("instance {x} of {} is outside the composite's domain", cert.f),
        (Some(Violation::Solution(x, y)), _) => format!("composite answers {y} at {x}, which {} does not allow", cert.f),
        (None, Some(Definedness::Reduction { instance })) => format!("K does not reach dom {} at {instance}", cert.g),
        (None, Some(Definedness::PostProcessing { instance, answer })) => {
            format!("H undefined at instance {instance} with answer {answer}")
        }
        (None, None) => unreachable!("invalid certificates carry a reason"),
    };
    writeln!(out, "INVALID {} ≤_{} {}: {why}", cert.f, cert.kind, cert.g)?;
    Ok(EXIT_NO)
}

fn lattice<O: Write>(ws: &Workspace, out: &mut O) -> Res {
    let mut env = ws.env.clone();
    let family = ws.problem_names();
    let closed = close_family(&mut env, &family)?;
    let extra: Vec<String> = closed[family.len()..].to_vec();
    let t = table(ws, &env, &extra, Mode::M)?;
    let findings = verify_lattice(&mut env, &t, &family)?;
    let mut failed = 0;
    let mut undecided = 0;
    for f in &findings {
        writeln!(out, "{f}")?;
        match f.outcome {
            Outcome::Pass => {}
            Outcome::Fail(_) => failed += 1,
            Outcome::Undecidable(_) => undecided += 1,
        }
    }
    writeln!(out, "checks={} failed={failed} undecided={undecided}", findings.len())?;
    Ok(if failed == 0 && undecided == 0 { EXIT_YES } else { EXIT_NO })
}

fn param_generators<O: Write>(ws: &Workspace, out: &mut O) -> Res {
    let space = ws.param_space()?;
    let c = ws.carriers();
    let mut code = EXIT_YES;
    writeln!(out, "[{}]", manyone::param::SCOPE)?;
    for g in &ws.generators {
        let Some(bound) = &g.bound else {
            writeln!(out, "{}\tno bound", g.name)?;
            continue;
        };
        let pm = ParamMorphism::new(
            g.map.clone(),
            space.of(c, g.map.src())?,
            space.of(c, g.map.dst())?,
            bound.clone(),
            manyone::term::WitnessTerm::gen(g.name.clone()),
        )?;
        match check_param_morphism(&pm) {
            Ok(chk) => match chk.counterexample {
                None => writeln!(out, "{}\tok", g.name)?,
                Some(v) => {
                    code = EXIT_NO;
                    writeln!(out, "{}\tviolated at {} -> {}: κ {} > F({}) = {}", g.name, v.instance, v.image, v.kappa_out, v.kappa_in, v.bound)?;
                }
            },
            Err(e @ ParamError::IncompleteBound(_)) => {
                code = EXIT_NO;
                writeln!(out, "{}\t{e}", g.name)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(code)
}

fn param_problem(ws: &Workspace, name: &str) -> Result<ParamProblem, InputError> {
    let d = ws.problem(name).ok_or_else(|| InputError(format!("unknown problem `{name}`")))?;
    let c = ws.carriers();
    let src_k = match &d.kappa {
        Some(k) => k.clone(),
        None => Parameterization::bottom(c, d.problem.src().clone())?,
    };
    Ok(ParamProblem::simple(c, d.problem.clone(), src_k)?)
}

fn param_reduction<O: Write>(ws: &Workspace, f: &str, g: &str, out: &mut O) -> Res {
    let (pf, pg) = (param_problem(ws, f)?, param_problem(ws, g)?);
    let env = ws.env.clone();
    let t = table(ws, &env, &[], Mode::M)?;
    let v = decide(&env, &t, f, g, Kind::M).map_err(|e| match e {
        ReduceError::Undecidable(_) | ReduceError::Budget(_) => InputError(format!("UNDECIDED: {e}")),
        e => e.into(),
    })?;
    writeln!(out, "[{}]", manyone::param::SCOPE)?;
    let Some(cert) = v.cert() else {
        writeln!(out, "NO (exhaustive at depth {}): no plain certificate", v.universe_depth)?;
        return Ok(EXIT_NO);
    };
    writeln!(out, "certificate H = {}, K = {}", cert.h, cert.k)?;
    let space = ws.param_space()?;
    let bounds = ws.bounds();
    let derived = |t: &manyone::term::WitnessTerm| derive_bound(t, &env, &space, &bounds).map(|m| m.bound);
    let (kb, hb) = match (derived(&cert.k), derived(&cert.h)) {
        (Ok(k), Ok(h)) => (k, h),
        (Err(e), _) | (_, Err(e)) => {
            writeln!(out, "REJECTED: {e}")?;
            return Ok(EXIT_NO);
        }
    };
    let pc = ParamCert { cert: cert.clone(), k_bound: Some(kb), h_bound: Some(hb) };
    let report = param_reduce_check(&env, &pc, &pf, &pg, ParamMode::Simple)?;
    writeln!(out, "{report}")?;
    Ok(if report.accepted { EXIT_YES } else { EXIT_NO })
}
