use proptest::prelude::*;

use super::*;
use crate::finrel::fixture;
use crate::subcat::{build_universe, saturate};

fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}

fn fixture_env() -> Env {
    let mut env = Env::new(fixture::carriers());
    for (n, p) in [
        ("empty", fixture::empty()),
        ("f", fixture::f()),
        ("g", fixture::g()),
        ("gprime", fixture::g_prime()),
        ("idpt", fixture::id_pt()),
    ] {
        env.add_problem(n, p).unwrap();
    }
    env
}

fn table(env: &Env, family: &[String], mode: Mode, depth: usize) -> SubcatTable {
    let mut u = build_universe(["X", "Y", "Z", "PT"], depth);
    pin_family(&mut u, env, family, mode).unwrap();
    saturate(env, u).unwrap()
}

/// Reflexive-transitive closure by Warshall's algorithm.
fn closure(mut m: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    let n = m.len();
    for i in 0..n {
        m[i][i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    m
}

#[test]
fn singleton_family() {
    let mut env = fixture_env();
    let fam = names(&["f"]);
    let t = table(&env, &fam, Mode::M, 1);
    let m = preorder_matrix(&mut env, &t, &fam, Mode::M).unwrap();
    assert_eq!(m.relation().unwrap(), vec![vec![true]]);
}

#[test]
fn fixture_matrix_and_degrees() {
    let mut env = fixture_env();
    let fam = names(&["empty", "f", "g", "gprime", "idpt"]);
    let t = table(&env, &fam, Mode::M, 2);
    let r = degree_report(&mut env, &t, &fam, Mode::M, false).unwrap();
    let m = r.matrix.relation().unwrap();
    assert!(m[0].iter().all(|&b| b), "the empty problem is below everything");
    assert!(m[1][4], "f has the constant choice function 1");
    assert!(!m[3][4], "g' needs the identity on X");
    // empty < {f, g, idpt} < gprime
    assert_eq!(r.classes, vec![vec![0], vec![1, 2, 4], vec![3]]);
    assert_eq!(r.hasse, vec![(0, 1), (1, 2)]);
    assert_eq!(r.universe_depth, 2);
    let dot = r.dot();
    assert!(dot.contains("rankdir=BT"));
    assert!(dot.contains("c1 [label=\"f, g, idpt\"]"));
    assert!(dot.contains("c0 -> c1;") && dot.contains("c1 -> c2;"));
    let again = degree_report(&mut env, &t, &fam, Mode::M, false).unwrap();
    assert_eq!(again.dot(), dot);
    assert_eq!(again.matrix.to_tsv(), r.matrix.to_tsv());
}

#[test]
fn sm_matrix_is_below_m() {
    let mut env = fixture_env();
    let fam = names(&["empty", "f", "g", "gprime", "idpt"]);
    let t = table(&env, &fam, Mode::M, 1);
    let m = preorder_matrix(&mut env, &t, &fam, Mode::M).unwrap().relation().unwrap();
    let sm = preorder_matrix(&mut env, &t, &fam, Mode::Sm).unwrap().relation().unwrap();
    for i in 0..fam.len() {
        for j in 0..fam.len() {
            assert!(!sm[i][j] || m[i][j]);
        }
    }
    degree_classes(&sm).unwrap();
}

#[test]
fn wtt_contains_m() {
    let mut env = fixture_env();
    let fam = names(&["empty", "f", "g", "gprime", "idpt"]);
    let mut u = build_universe(["X", "Y", "Z", "PT"], 1);
    pin_family(&mut u, &env, &fam, Mode::M).unwrap();
    pin_family(&mut u, &env, &fam, Mode::Wtt(2)).unwrap();
    let t = saturate(&env, u).unwrap();
    let m = preorder_matrix(&mut env, &t, &fam, Mode::M).unwrap().relation().unwrap();
    let w = preorder_matrix(&mut env, &t, &fam, Mode::Wtt(2)).unwrap();
    assert_eq!(w.mode, Mode::Wtt(2));
    let w = w.relation().unwrap();
    for i in 0..fam.len() {
        for j in 0..fam.len() {
            assert!(!m[i][j] || w[i][j]);
        }
    }
}

#[test]
fn overflow_is_flagged_not_false() {
    let mut env = fixture_env();
    let fam = names(&["f", "idpt"]);
    let t = saturate(&env, build_universe(["X", "Y"], 1)).unwrap();
    let m = preorder_matrix(&mut env, &t, &fam, Mode::M).unwrap();
    assert!(matches!(m.cells[1][1], Verdict::Undecidable(_)));
    assert!(m.flagged().iter().any(|&(i, j, _)| (i, j) == (0, 1)));
    assert!(matches!(m.relation(), Err(DegreeError::Undecided(..))));
    assert!(m.to_tsv().contains('?'));
}

#[test]
fn classes_and_hasse_examples() {
    let all = vec![vec![true; 3]; 3];
    let c = degree_classes(&all).unwrap();
    assert_eq!(c, vec![vec![0, 1, 2]]);
    assert!(hasse(&c, &all).unwrap().is_empty());

    // bottom < f < top
    let chain = vec![vec![true, true, true], vec![false, true, true], vec![false, false, true]];
    let c = degree_classes(&chain).unwrap();
    assert_eq!(hasse(&c, &chain).unwrap(), vec![(0, 1), (1, 2)]);
}

#[test]
fn non_preorders_are_rejected() {
    let irreflexive = vec![vec![false]];
    assert!(matches!(degree_classes(&irreflexive), Err(DegreeError::NotPreorder(_))));
    let intransitive = vec![vec![true, true, false], vec![false, true, true], vec![false, false, true]];
    assert!(matches!(degree_classes(&intransitive), Err(DegreeError::NotPreorder(_))));
    assert!(matches!(hasse(&[vec![0, 1, 2]], &intransitive), Err(DegreeError::NotPreorder(_))));
    let ok = vec![vec![true, false], vec![false, true]];
    assert!(matches!(hasse(&[vec![0, 1]], &ok), Err(DegreeError::NotPreorder(_))));
    assert!(matches!(hasse(&[vec![0]], &ok), Err(DegreeError::NotPreorder(_))));
}

#[test]
fn adding_a_supremum_keeps_the_classes_below() {
    let mut env = fixture_env();
    let fam = names(&["empty", "f", "g", "gprime", "idpt"]);
    let s = register_sup(&mut env, "g", "gprime").unwrap();
    let mut ext = fam.clone();
    ext.push(s);
    let t = table(&env, &ext, Mode::M, 1);
    let below = |env: &mut Env, fam: &[String]| {
        let m = preorder_matrix(env, &t, fam, Mode::M).unwrap().relation().unwrap();
        let cs = degree_classes(&m).unwrap();
        let f = 1;
        cs.iter().filter(|c| m[c[0]][f]).count()
    };
    let before = below(&mut env, &fam);
    let after = below(&mut env, &ext);
    assert!(after <= before);
}

#[test]
fn singleton_lattice_is_idempotent() {
    let mut env = fixture_env();
    let fam = names(&["f"]);
    let closed = close_family(&mut env, &fam).unwrap();
    assert_eq!(closed, names(&["f", "sup{f,f}", "inf{f,f}"]));
    let t = table(&env, &closed, Mode::M, 1);
    let findings = verify_lattice(&mut env, &t, &fam).unwrap();
    assert!(findings.iter().all(LatticeFinding::passed), "{findings:#?}");
    let m = preorder_matrix(&mut env, &t, &closed, Mode::M).unwrap().relation().unwrap();
    assert!(m.iter().flatten().all(|&b| b), "f ⊔ f ≡ f ≡ f ⊕ f");
}

#[test]
fn fixture_lattice_passes_and_faulty_sup_is_caught() {
    let mut env = fixture_env();
    let fam = names(&["empty", "f", "g", "gprime"]);
    let closed = close_family(&mut env, &fam).unwrap();
    let bad = register_faulty_sup(&mut env, "f", "gprime").unwrap();
    let mut pinned = closed.clone();
    pinned.push(bad.clone());
    let t = table(&env, &pinned, Mode::M, 1);
    let findings = verify_lattice(&mut env, &t, &fam).unwrap();
    let failed: Vec<_> = findings.iter().filter(|f| !f.passed()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    for (check, ev) in [
        (Check::SupUpper, Evidence::Family),
        (Check::SupUpper, Evidence::Certificate),
        (Check::SupLeast, Evidence::Family),
        (Check::SupLeast, Evidence::Certificate),
        (Check::InfLower, Evidence::Certificate),
        (Check::InfGreatest, Evidence::Family),
        (Check::Distributive, Evidence::Certificate),
    ] {
        assert!(findings.iter().any(|f| f.check == check && f.evidence == ev), "{check:?} {ev:?}");
    }
    assert_eq!(findings.iter().filter(|f| f.check == Check::Distributive).count(), 64);

    let neg = verify_sup_candidate(&mut env, &t, "f", "gprime", &bad, &closed).unwrap();
    let upper = neg.iter().find(|f| f.check == Check::SupUpper).unwrap();
    assert_eq!(upper.outcome, Outcome::Fail("gprime ≤ dropsup{f,gprime} fails".into()));
    let line = upper.to_string();
    assert!(line.starts_with("sup-upper\tfamily\tf gprime dropsup{f,gprime}\tFAIL"), "{line}");
}

fn arb_relation() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1usize..7).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(proptest::bool::weighted(0.25), n), n))
}

proptest! {
    #[test]
    fn hasse_closure_reproduces_the_order(r in arb_relation()) {
        let m = closure(r);
        let classes = degree_classes(&m).unwrap();
        // classes partition and are exactly the mutual blocks
        let n = m.len();
        let mut class_of = vec![usize::MAX; n];
        for (k, c) in classes.iter().enumerate() {
            for &i in c {
                prop_assert_eq!(class_of[i], usize::MAX);
                class_of[i] = k;
            }
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(class_of[i] == class_of[j], m[i][j] && m[j][i]);
            }
        }
        let edges = hasse(&classes, &m).unwrap();
        let k = classes.len();
        let mut q = vec![vec![false; k]; k];
        for &(a, b) in &edges {
            q[a][b] = true;
        }
        let qc = closure(q);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(qc[class_of[i]][class_of[j]], m[i][j]);
            }
        }
        // no edge is implied by the others
        for (drop, _) in edges.iter().enumerate() {
            let mut q = vec![vec![false; k]; k];
            for (e, &(a, b)) in edges.iter().enumerate() {
                if e != drop {
                    q[a][b] = true;
                }
            }
            let (a, b) = edges[drop];
            prop_assert!(!closure(q)[a][b]);
        }
        let dot = to_dot(&(0..n).map(|i| format!("p{i}")).collect::<Vec<_>>(), &classes, &edges);
        prop_assert_eq!(dot.matches(" -> ").count(), edges.len());
    }
}
