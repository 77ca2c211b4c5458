//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::any::Any;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use manyone::degrees::{close_family, pin_family, register_faulty_sup, verify_lattice, verify_sup_candidate, Check, Mode, Outcome};
use manyone::finrel::{fixture, oplus, star_trunc, Carriers, Element, ObjExpr, SearchProblem, Side};
use manyone::param::{
    check_param_morphism, compose_param, coproduct_param, kappa_coproduct, kappa_product, param_reduce_check, product_param, BoundTable, ParamCert,
    ParamMode, ParamMorphism, ParamProblem, Parameterization,
};
use manyone::reduce::{
    check_cert, decide, inf_proj_cert, inf_univ_cert, lookup, prod_cert, psi_phi, refl_cert, semiring_law_certs, sm_to_m, star_collapse_cert,
    star_intro_cert, star_mono_cert, sup_inj_cert, sup_univ_cert, trans_cert, Kind, ReductionCert,
};
use manyone::subcat::{build_universe, saturate, SubcatTable};
use manyone::term::{eval_term, Env, WitnessTerm as T};

type Verdict = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Verdict);

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

/// Runs the CLI in-process: `(exit code, stdout, stderr)`.
fn cli(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("manyone").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = manyone_cli::run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(s: &str) -> Element {
    Element::atom(s)
}

// Validity recomputed from the graphs of `H` and `K`, without check_cert.
fn naive_valid(c: &ReductionCert, env: &Env) -> bool {
    let (f, g) = (lookup(env, &c.f).unwrap(), lookup(env, &c.g).unwrap());
    let (k, h) = (eval_term(&c.k, env).unwrap(), eval_term(&c.h, env).unwrap());
    f.dom().into_iter().all(|x| {
        let ks: Vec<&Element> = k.image(x).collect();
        !ks.is_empty()
            && ks.iter().all(|kx| {
                g.in_dom(kx)
                    && g.image(kx).all(|y| {
                        let input = match c.kind {
                            Kind::Sm => y.clone(),
                            Kind::M => Element::pair(x.clone(), y.clone()),
                        };
                        let hs: Vec<&Element> = h.image(&input).collect();
                        !hs.is_empty() && hs.iter().all(|z| f.contains(x, z))
                    })
            })
    })
}

/// Both checkers accept `c`; a disagreement is reported as a failure too.
fn certified(c: &ReductionCert, env: &Env) -> Result<(), String> {
    let fast = check_cert(c, env).map_err(|e| format!("{} ≤ {}: {e}", c.f, c.g))?.valid;
    let slow = naive_valid(c, env);
    ensure(fast && slow, || format!("{} ≤_{} {}: check_cert {fast}, recomputed {slow}", c.f, c.kind, c.g))
}

fn fixture_env() -> Env {
    let mut env = Env::new(fixture::carriers());
    for (n, p) in [
        ("empty", fixture::empty()),
        ("f", fixture::f()),
        ("g", fixture::g()),
        ("gprime", fixture::g_prime()),
        ("h", fixture::h()),
        ("idpt", fixture::id_pt()),
    ] {
        env.add_problem(n, p).unwrap();
    }
    env
}

fn table_over(env: &Env, family: &[String], depth: usize) -> SubcatTable {
    let mut u = build_universe(["X", "Y", "Z", "PT"], depth);
    pin_family(&mut u, env, family, Mode::M).unwrap();
    saturate(env, u).unwrap()
}

fn random_problem(rng: &mut ChaCha8Rng, c: &Carriers, src: &ObjExpr, dst: &ObjExpr) -> SearchProblem {
    let (xs, ys) = (c.carrier(src).unwrap(), c.carrier(dst).unwrap());
    let mut pairs = Vec::new();
    for x in xs.iter() {
        for y in ys.iter() {
            if rng.gen_bool(0.5) {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    SearchProblem::new(c, src.clone(), dst.clone(), pairs).unwrap()
}

/// `n` random problems between `X`, `Y` and `PT`, named `p0..`.
fn random_family(seed: u64, n: usize) -> (Env, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = fixture::carriers();
    let pool = [fixture::x(), fixture::y(), fixture::pt()];
    let mut env = Env::new(c.clone());
    let mut names = Vec::new();
    for i in 0..n {
        let src = pool[rng.gen_range(0..pool.len())].clone();
        let dst = pool[rng.gen_range(0..pool.len())].clone();
        let p = random_problem(&mut rng, &c, &src, &dst);
        names.push(format!("p{i}"));
        env.add_problem(format!("p{i}"), p).unwrap();
    }
    (env, names)
}

fn parse_tsv(text: &str) -> (Vec<String>, Vec<Vec<char>>) {
    let mut lines = text.lines();
    let names: Vec<String> = lines.next().unwrap().split('\t').skip(1).map(String::from).collect();
    let cells = lines.map(|l| l.split('\t').skip(1).map(|c| c.chars().next().unwrap()).collect()).collect();
    (names, cells)
}

fn ac1() -> Verdict {
    let start = Instant::now();
    let (code, out, err) = cli(&["axioms", "--cases", "200", "--seed", "7", "--max-atom-size", "3"]);
    let took = start.elapsed();
    ensure(code == 0, || format!("exit {code}: {out}{err}"))?;
    ensure(out.trim_end().ends_with("violations=0"), || out.clone())?;
    let laws = out.lines().filter(|l| l.starts_with("ok\t")).count();
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!("{laws} laws, 0 violations in {:.1}s", took.as_secs_f64()))
}

fn ac2() -> Verdict {
    let (code, out, err) = cli(&["order", &data("e0.json")]);
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let golden = std::fs::read_to_string(data("e0_order_m.tsv")).unwrap();
    ensure(out == golden, || format!("matrix differs from golden:\n{out}"))?;
    let (names, cells) = parse_tsv(&out);
    let n = names.len();
    let m = |i: usize, j: usize| cells[i][j] == '1';
    for i in 0..n {
        ensure(m(i, i), || format!("{} not reflexive", names[i]))?;
        for j in 0..n {
            for k in 0..n {
                ensure(!(m(i, j) && m(j, k)) || m(i, k), || format!("{} ≤ {} ≤ {} not transitive", names[i], names[j], names[k]))?;
            }
        }
    }
    let bot = names.iter().position(|s| s == "empty").unwrap();
    ensure((0..n).all(|j| m(bot, j)), || "empty row is not all-true".into())?;
    // Every positive cell carries a certificate that validates.
    let ws = manyone_cli::load_workspace(std::path::Path::new(&data("e0.json"))).unwrap();
    let env = ws.env.clone();
    let t = ws.table(&env, &[], &[Mode::M]).unwrap();
    let mut certs = 0;
    for (i, f) in names.iter().enumerate() {
        for (j, g) in names.iter().enumerate() {
            let v = decide(&env, &t, f, g, Kind::M).unwrap();
            ensure(v.is_yes() == m(i, j), || format!("{f} ≤ {g} disagrees with the matrix"))?;
            if let Some(c) = v.cert() {
                certified(c, &env)?;
                certs += 1;
            }
        }
    }
    Ok(format!("{n}x{n} matrix matches golden; preorder with bottom; {certs} certificates validate"))
}

fn lattice_passes(env: &mut Env, family: &[String], depth: usize) -> Result<usize, String> {
    let closed = close_family(env, family).map_err(|e| e.to_string())?;
    let t = table_over(env, &closed, depth);
    let findings = verify_lattice(env, &t, family).map_err(|e| e.to_string())?;
    match findings.iter().find(|f| f.outcome != Outcome::Pass) {
        Some(bad) => Err(bad.to_string()),
        None => Ok(findings.len()),
    }
}

fn ac3() -> Verdict {
    let start = Instant::now();
    let (code, out, err) = cli(&["lattice", &data("e0.json")]);
    ensure(code == 0, || format!("exit {code}: {err}{}", out.lines().filter(|l| !l.contains("\tPASS")).collect::<Vec<_>>().join("\n")))?;
    let distributive = out.lines().filter(|l| l.starts_with("distributive\tcert\t") && l.ends_with("\tPASS")).count();
    ensure(distributive == 125, || format!("{distributive} distributivity findings"))?;
    ensure(out.lines().last().is_some_and(|l| l.ends_with("failed=0 undecided=0")), || "summary".into())?;

    let mut checks = 0;
    for seed in 0..50u64 {
        let (mut env, fam) = random_family(1000 + seed, 3);
        checks += lattice_passes(&mut env, &fam, 1).map_err(|e| format!("family {seed}: {e}"))?;
    }
    // The checker is not vacuous: dropping a summand is caught.
    let mut env = fixture_env();
    let fam: Vec<String> = ["f", "gprime"].map(String::from).into();
    let closed = close_family(&mut env, &fam).unwrap();
    let bad = register_faulty_sup(&mut env, "f", "gprime").unwrap();
    let mut pinned = closed.clone();
    pinned.push(bad.clone());
    let t = table_over(&env, &pinned, 1);
    let neg = verify_sup_candidate(&mut env, &t, "f", "gprime", &bad, &closed).unwrap();
    ensure(neg.iter().any(|f| f.check == Check::SupUpper && matches!(f.outcome, Outcome::Fail(_))), || "faulty sup accepted".into())?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!("fixture closure passes; 50 random families pass ({checks} checks); faulty sup rejected; {:.1}s", took.as_secs_f64()))
}

fn ac4() -> Verdict {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for fam in 0..10u64 {
        let (mut env, names) = random_family(2000 + fam, 10);
        let t = table_over(&env, &names, 1);
        let mut m = BTreeMap::new();
        for f in &names {
            for g in &names {
                if let Some(c) = decide(&env, &t, f, g, Kind::M).unwrap().cert() {
                    m.insert((f.clone(), g.clone()), c.clone());
                }
                if let Some(c) = decide(&env, &t, f, g, Kind::Sm).unwrap().cert() {
                    certified(c, &env)?;
                    certified(&sm_to_m(c, &env).unwrap(), &env)?;
                    *counts.entry("sm_to_m").or_default() += 1;
                }
            }
        }
        let mut run = |name: &'static str, c: Result<ReductionCert, manyone::reduce::ReduceError>, env: &Env| -> Result<(), String> {
            let c = c.map_err(|e| format!("{name}: {e}"))?;
            certified(&c, env).map_err(|e| format!("{name}: {e}"))?;
            *counts.entry(name).or_default() += 1;
            Ok(())
        };
        for f in &names {
            run("refl", refl_cert(&env, f), &env)?;
            run("star_intro", star_intro_cert(&mut env, f, 2), &env)?;
        }
        let valid: Vec<ReductionCert> = m.values().cloned().collect();
        for (idx, c1) in valid.iter().enumerate() {
            certified(c1, &env)?;
            run("star_mono", star_mono_cert(&mut env, c1, 2), &env)?;
            let c2 = &valid[(idx + 1) % valid.len()];
            run("prod", prod_cert(&mut env, c1, c2), &env)?;
            for c2 in &valid {
                if c1.g == c2.f {
                    run("trans", trans_cert(c1, c2, &env), &env)?;
                }
                if c1.g == c2.g && c1.f < c2.f {
                    run("sup_univ", sup_univ_cert(&mut env, &[c1.clone(), c2.clone()]), &env)?;
                }
                if c1.f == c2.f && c1.g < c2.g {
                    run("inf_univ", inf_univ_cert(&mut env, c1, c2), &env)?;
                }
            }
        }
        for (i, f) in names.iter().enumerate() {
            let g = &names[(i + 1) % names.len()];
            run("sup_inj", sup_inj_cert(&mut env, &[f, g], 1), &env)?;
            run("inf_proj", inf_proj_cert(&mut env, f, g, Side::Left), &env)?;
        }
    }
    let total: usize = counts.values().sum();
    let detail: Vec<String> = counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Ok(format!("{total} certificates over 100 problems, 0 failures ({})", detail.join(", ")))
}

fn ac5() -> Verdict {
    let mut env = fixture_env();
    let names = ["empty", "f", "g", "gprime", "h", "idpt"];
    let mut laws = BTreeSet::new();
    let mut certs = 0;
    for a in names {
        for b in names {
            for c in names {
                for l in semiring_law_certs(&mut env, a, b, c, "empty", "idpt").map_err(|e| e.to_string())? {
                    for cert in [&l.forward, &l.backward] {
                        ensure(cert.kind == Kind::M, || format!("{} is not an m certificate", l.law))?;
                        certified(cert, &env).map_err(|e| format!("{} at ({a},{b},{c}): {e}", l.law))?;
                        certs += 1;
                    }
                    laws.insert(l.law);
                }
            }
        }
    }
    Ok(format!("{} laws x 216 fixture triples, {certs} certificates validate both ways", laws.len()))
}

fn ac6() -> Verdict {
    let mut env = fixture_env();
    certified(&star_intro_cert(&mut env, "f", 3).unwrap(), &env)?;
    let col = star_collapse_cert(&mut env, "f", 2, 2).unwrap();
    ensure(col.g == "star4{f}", || col.g.clone())?;
    ensure(env.problem("star4{f}") == Some(&star_trunc(&fixture::f(), 4).unwrap()), || "star4{f} differs".into())?;
    certified(&col, &env)?;
    let names: Vec<String> = env.problems().keys().filter(|n| !n.contains('{')).cloned().collect();
    let t = table_over(&env, &names, 1);
    let mut monos = 0;
    for f in &names {
        for g in &names {
            if let Some(c) = decide(&env, &t, f, g, Kind::M).unwrap().cert().cloned() {
                certified(&star_mono_cert(&mut env, &c, 3).unwrap(), &env)?;
                monos += 1;
            }
        }
    }
    let (c1, m, _) = cli(&["order", &data("e0.json")]);
    let (c2, w, err) = cli(&["order", &data("e0.json"), "--mode", "wtt", "--trunc", "3"]);
    ensure(c1 == 0 && c2 == 0, || format!("order exits {c1}/{c2}: {err}"))?;
    let ((nm, mc), (nw, wc)) = (parse_tsv(&m), parse_tsv(&w));
    ensure(nm == nw, || "problem lists differ".into())?;
    let mut strict = 0;
    for (mr, wr) in mc.iter().zip(&wc) {
        for (a, b) in mr.iter().zip(wr) {
            ensure(*b != '?', || "undecided wtt cell".into())?;
            ensure(*a != '1' || *b == '1', || "an m reduction is missing from wtt".into())?;
            strict += usize::from(*a == '0' && *b == '1');
        }
    }
    Ok(format!("star_intro(3), star_collapse(2,2) and {monos} star_mono(3) validate; wtt(3) ⊇ m ({strict} strictly new)"))
}

/// Every choice function of `f ⊕ g`, fed to psi_phi and to a direct check.
fn psi_phi_exhaustive(c: &Carriers, f: &SearchProblem, g: &SearchProblem) -> Result<usize, String> {
    let sum = oplus(f, g);
    let points: Vec<Element> = c.carrier(sum.src()).unwrap().to_vec();
    let options: Vec<Vec<Element>> = points.iter().map(|p| sum.image(p).cloned().collect()).collect();
    let (xs, ys) = (c.carrier(f.src()).unwrap(), c.carrier(g.src()).unwrap());
    let mut choice = vec![0usize; points.len()];
    let mut count = 0;
    loop {
        let at: BTreeMap<&Element, &Element> = points.iter().zip(&choice).enumerate().map(|(i, (p, &k))| (p, &options[i][k])).collect();
        let i = SearchProblem::new(c, sum.src().clone(), sum.dst().clone(), at.iter().map(|(p, z)| ((*p).clone(), (*z).clone()))).unwrap();
        let r = psi_phi(c, &i, f, g).map_err(|e| e.to_string())?;
        let side = |x: &Element, y: &Element| at[&Element::pair(x.clone(), y.clone())].as_tag().unwrap().0;
        let psi_total = xs.iter().all(|x| ys.iter().any(|y| side(x, y) == Side::Left));
        let phi_total = ys.iter().all(|y| xs.iter().any(|x| side(x, y) == Side::Right));
        ensure(psi_total || phi_total, || format!("dichotomy fails at {i}"))?;
        ensure((r.psi_total, r.phi_total) == (psi_total, phi_total), || format!("totality misreported at {i}"))?;
        ensure(r.psi.graph().iter().all(|(x, z)| f.contains(x, z)) && r.phi.graph().iter().all(|(y, z)| g.contains(y, z)), || {
            format!("Ψ/Φ give non-solutions at {i}")
        })?;
        count += 1;
        let mut k = choice.len();
        loop {
            if k == 0 {
                return Ok(count);
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

fn ac7() -> Verdict {
    let c = fixture::carriers();
    let mut total = psi_phi_exhaustive(&c, &fixture::f(), &fixture::g_prime())?;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut pairs = 0;
    let mut redrawn = 0;
    while pairs < 20 {
        let mut size = || rng.gen_range(1..=3usize);
        let sizes = [size(), size(), size(), size()];
        let atoms = ["A", "B", "C", "D"];
        let c = Carriers::new(atoms.iter().zip(sizes).map(|(a, n)| (*a, (0..n).map(|i| format!("{}{i}", a.to_lowercase())).collect::<Vec<_>>())));
        let total_rel = |rng: &mut ChaCha8Rng, src: &str, dst: &str| {
            let (xs, ys) = (c.carrier(&ObjExpr::atom(src)).unwrap(), c.carrier(&ObjExpr::atom(dst)).unwrap());
            let mut pairs = Vec::new();
            for x in xs.iter() {
                let forced = rng.gen_range(0..ys.len());
                for (j, y) in ys.iter().enumerate() {
                    if j == forced || rng.gen_bool(0.4) {
                        pairs.push((x.clone(), y.clone()));
                    }
                }
            }
            SearchProblem::new(&c, ObjExpr::atom(src), ObjExpr::atom(dst), pairs).unwrap()
        };
        let (f, g) = (total_rel(&mut rng, "A", "C"), total_rel(&mut rng, "B", "D"));
        let space: u64 = f.dom().iter().flat_map(|x| g.dom().into_iter().map(move |y| (x, y))).map(|(x, y)| (f.image(x).count() + g.image(y).count()) as u64).product();
        if space > 200_000 {
            redrawn += 1;
            continue;
        }
        total += psi_phi_exhaustive(&c, &f, &g).map_err(|e| format!("pair {pairs}: {e}"))?;
        pairs += 1;
    }
    Ok(format!("{total} choice functions (fixture + 20 random pairs, {redrawn} oversized draws skipped), 0 counterexamples"))
}

fn ac8() -> Verdict {
    let (mut yes, mut no, mut empty) = (0, 0, 0);
    let mut fam = 0u64;
    while yes + no < 30 {
        let (mut env, mut names) = random_family(3000 + fam, 6);
        env.add_problem("idpt", fixture::id_pt()).unwrap();
        names.push("idpt".into());
        let t = table_over(&env, &names, 1);
        for name in &names[..6] {
            let p = env.problem(name).unwrap().clone();
            let decided = decide(&env, &t, name, "idpt", Kind::M).unwrap().is_yes();
            if p.dom().is_empty() {
                // the bottom, not a nonzero degree
                ensure(decided, || format!("{name}: empty problem not ≤ idpt"))?;
                empty += 1;
                continue;
            }
            if yes + no == 30 {
                break;
            }
            let has_choice = t
                .hom_set(p.src(), p.dst())
                .unwrap()
                .into_iter()
                .any(|(m, _)| p.dom().into_iter().all(|x| m.apply(x).is_some_and(|z| p.contains(x, z))));
            ensure(decided == has_choice, || format!("family {fam} {name}: oracle {decided}, choice function {has_choice}"))?;
            if decided {
                yes += 1;
            } else {
                no += 1;
            }
        }
        fam += 1;
    }
    ensure(yes > 0 && no > 0, || format!("one direction untested ({yes} yes, {no} no)"))?;
    Ok(format!("30 nonempty problems: {yes} with a choice function and ≤ idpt, {no} with neither ({empty} empty skipped)"))
}

fn param_carriers() -> Carriers {
    Carriers::new([("N", (1..=8).map(|i| i.to_string()).collect::<Vec<_>>()), ("Y", vec!["0".into(), "1".into()]), ("PT", vec!["*".to_string()])])
}

fn ac9() -> Verdict {
    let c = param_carriers();
    let n = ObjExpr::atom("N");
    let objs = [n.clone(), ObjExpr::atom("Y"), ObjExpr::atom("PT")];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // κ laws: max on pairs, case split on sums, κ_⊥ neutral.
    for _ in 0..200 {
        let (a, b) = (&objs[rng.gen_range(0..3)], &objs[rng.gen_range(0..3)]);
        let mut draw = |o: &ObjExpr| Parameterization::from_fn(&c, o.clone(), |_| rng.gen_range(1..=6)).unwrap();
        let (ka, kb) = (draw(a), draw(b));
        let (p, s) = (kappa_product(&ka, &kb), kappa_coproduct(&ka, &kb));
        for (x, u) in ka.iter() {
            ensure(s.kappa(&Element::left(x.clone())) == Some(u), || "coproduct left".into())?;
            for (y, v) in kb.iter() {
                ensure(p.kappa(&Element::pair(x.clone(), y.clone())) == Some(u.max(v)), || "product max".into())?;
                ensure(kappa_product(&kb, &ka).kappa(&Element::pair(y.clone(), x.clone())) == Some(u.max(v)), || "product symmetry".into())?;
            }
        }
        for (y, v) in kb.iter() {
            ensure(s.kappa(&Element::right(y.clone())) == Some(v), || "coproduct right".into())?;
        }
        let bot = Parameterization::bottom(&c, b.clone()).unwrap();
        let with_bot = kappa_product(&ka, &bot);
        ensure(ka.iter().all(|(x, u)| kb.iter().all(|(y, _)| with_bot.kappa(&Element::pair(x.clone(), y.clone())) == Some(u))), || {
            "κ_⊥ is not neutral".into()
        })?;
    }

    // Strictness: the doubling reduction is plainly valid but breaks the bound.
    let kappa = Parameterization::from_fn(&c, n.clone(), |x| x.to_string().parse().unwrap()).unwrap();
    let pt = ObjExpr::atom("PT");
    let mut env = Env::new(c.clone());
    let double = SearchProblem::new(&c, n.clone(), n.clone(), (1..=4u64).map(|i| (e(&i.to_string()), e(&(2 * i).to_string())))).unwrap();
    env.add_generator("double", double).unwrap();
    let p = SearchProblem::new(&c, n.clone(), pt.clone(), [(e("1"), e("*")), (e("2"), e("*"))]).unwrap();
    let q = SearchProblem::new(&c, n.clone(), pt.clone(), (1..=8).map(|i| (e(&i.to_string()), e("*")))).unwrap();
    env.add_problem("p", p.clone()).unwrap();
    env.add_problem("q", q.clone()).unwrap();
    let cert = ReductionCert::new(Kind::Sm, "p", "q", T::Id(pt), T::gen("double"));
    certified(&cert, &env)?;
    let pc = ParamCert { cert, k_bound: Some(BoundTable::identity(8)), h_bound: Some(BoundTable::identity(1)) };
    let (pp, qq) = (ParamProblem::simple(&c, p, kappa.clone()).unwrap(), ParamProblem::simple(&c, q, kappa.clone()).unwrap());
    let r = param_reduce_check(&env, &pc, &pp, &qq, ParamMode::Simple).unwrap();
    ensure(r.finrel_valid && !r.accepted, || format!("doubling fixture: {r}"))?;
    let (code, out, _) = cli(&["param-check", &data("doubling.json")]);
    ensure(code == 1 && out.contains("double\tviolated"), || format!("param-check exit {code}: {out}"))?;

    // Bound composition on 30 seeded morphisms, checked against the
    // pointwise composite.
    let random_over = |rng: &mut ChaCha8Rng, ks: Parameterization, dst: &ObjExpr| {
        let kd = Parameterization::from_fn(&c, dst.clone(), |_| rng.gen_range(1..=4)).unwrap();
        let ys = c.carrier(dst).unwrap();
        let mut pairs = Vec::new();
        for x in c.carrier(ks.obj()).unwrap().iter() {
            if rng.gen_bool(0.8) {
                pairs.push((x.clone(), ys[rng.gen_range(0..ys.len())].clone()));
            }
        }
        let m = SearchProblem::new(&c, ks.obj().clone(), dst.clone(), pairs).unwrap();
        let bound = BoundTable::tight(&m, &ks, &kd).unwrap();
        ParamMorphism::new(m, ks, kd, bound, T::gen("m")).unwrap()
    };
    for i in 0..30 {
        let a = &objs[rng.gen_range(0..2)];
        let ka = Parameterization::from_fn(&c, a.clone(), |_| rng.gen_range(1..=4)).unwrap();
        let b = &objs[rng.gen_range(0..2)];
        let f = random_over(&mut rng, ka.clone(), b);
        let b2 = &objs[rng.gen_range(0..2)];
        let g = random_over(&mut rng, f.dst_k.clone(), b2);
        let gf = compose_param(&g, &f).map_err(|e| e.to_string())?;
        ensure(check_param_morphism(&gf).unwrap().holds, || format!("morphism {i}: composite bound fails"))?;
        for (x, z) in gf.underlying.graph() {
            let y = f.underlying.apply(x).unwrap();
            ensure(g.underlying.apply(y) == Some(z), || format!("morphism {i}: composite graph"))?;
            let chained = g.bound.eval(f.bound.eval(ka.kappa(x).unwrap()).unwrap()).unwrap();
            ensure(gf.dst_k.kappa(z).unwrap() <= chained, || format!("morphism {i}: κ exceeds F_g(F_f(κ))"))?;
            ensure(gf.bound.eval(ka.kappa(x).unwrap()).unwrap() <= chained, || format!("morphism {i}: composed table looser than F_g ∘ F_f"))?;
        }
        let b3 = &objs[rng.gen_range(0..2)];
        let h = random_over(&mut rng, ka, b3);
        ensure(check_param_morphism(&product_param(&f, &h).unwrap()).unwrap().holds, || format!("morphism {i}: product"))?;
        ensure(check_param_morphism(&coproduct_param(&f, &h).unwrap()).unwrap().holds, || format!("morphism {i}: coproduct"))?;
    }
    Ok("κ laws on 200 draws; doubling accepted plainly, rejected with bounds; 30 composites bounded".into())
}

fn ac10() -> Verdict {
    let (e0, dbl) = (data("e0.json"), data("doubling.json"));
    let dir = std::env::temp_dir().join(format!("manyone-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cert = dir.join("cert.json").to_string_lossy().into_owned();
    let dot = dir.join("e0.dot").to_string_lossy().into_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec!["axioms", "--cases", "200", "--seed", "7", "--max-atom-size", "3"],
        vec!["reduce", &e0, "f", "idpt", "--emit-cert", &cert],
        vec!["check-cert", &e0, &cert],
        vec!["reduce", &e0, "gprime", "idpt", "--mode", "m"],
        vec!["reduce", &e0, "f", "g", "--mode", "sm"],
        vec!["reduce", &e0, "f", "g", "--mode", "wtt", "--trunc", "3"],
        vec!["order", &e0],
        vec!["order", &e0, "--mode", "wtt", "--trunc", "3"],
        vec!["hasse", &e0, "--dot", &dot],
        vec!["lattice", &e0],
        vec!["param-check", &dbl],
        vec!["param-check", &dbl, "p", "q"],
    ];
    for args in &commands {
        let first = cli(args);
        let file = |p: &str| std::fs::read(p).ok();
        let (cert1, dot1) = (file(&cert), file(&dot));
        let second = cli(args);
        ensure(first == second, || format!("`{}` differs between runs", args.join(" ")))?;
        ensure(cert1 == file(&cert) && dot1 == file(&dot), || format!("`{}` wrote different files", args.join(" ")))?;
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(format!("{} commands byte-identical across two runs", commands.len()))
}

fn panic_text(p: Box<dyn Any + Send>) -> String {
    p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", "p-category axioms", ac1),
        ("AC2", "preorder and bottom", ac2),
        ("AC3", "distributive lattice", ac3),
        ("AC4", "combinator soundness", ac4),
        ("AC5", "semiring laws", ac5),
        ("AC6", "closure operator", ac6),
        ("AC7", "Ψ/Φ dichotomy", ac7),
        ("AC8", "least nonzero degree", ac8),
        ("AC9", "parameterized instance", ac9),
        ("AC10", "determinism", ac10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, title, run) in criteria {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|p| Err(format!("panicked: {}", panic_text(p))));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("{id:<5} PASS  {title}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("{id:<5} FAIL  {title}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
