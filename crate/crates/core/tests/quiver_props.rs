use proptest::prelude::*;

use strata_core::families::{build_family, FamilyTag};
use strata_core::linalg::rat;
use strata_core::linsys::codim_c;
use strata_core::quiver::{check_cycle_conditions, Combination, Path, Quiver, Substitution};
use strata_core::strata::assignments;

fn staircase(h: usize, m0: u32, m1: u32, n: usize) -> strata_core::quiver::BoundQuiverPresentation {
    build_family(FamilyTag::A { h, m0, m1, n }).unwrap()
}

proptest! {
    #[test]
    fn truncation_is_idempotent(
        terms in prop::collection::vec((0usize..6, 0usize..6, -3i64..4), 0..8),
        m0 in 2u32..5,
        m1 in 2u32..5,
    ) {
        let pres = build_family(FamilyTag::APrime { h: 1, m0, m1 }).unwrap();
        let q = pres.quiver();
        let (e0, e1, a1) = (
            q.arrow_by_name("e0").unwrap(),
            q.arrow_by_name("e1").unwrap(),
            q.arrow_by_name("a1").unwrap(),
        );
        let mut c = Combination::new();
        for (i, j, k) in terms {
            let mut f = Vec::new();
            if i > 0 { f.push((e0, i)); }
            f.push((a1, 1));
            if j > 0 { f.push((e1, j)); }
            c.add_term(rat(k), Path::from_factors(q, &f).unwrap());
        }
        let mut once = c.clone();
        pres.truncate(&mut once);
        let mut twice = once.clone();
        pres.truncate(&mut twice);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.terms().all(|(_, p)| pres.forbidden_run(p).is_none()));
        // Truncation only removes terms.
        for (k, p) in once.terms() {
            prop_assert_eq!(k, &c.coefficient(p));
        }
    }

    #[test]
    fn substitution_round_trip(
        m in 3u32..5,
        n in 1usize..3,
        k in 1usize..3,
        lam in prop::sample::select(vec![1i64, -1, 2, 3]),
    ) {
        let pres = staircase(2, m, m, n);
        let sign = if lam < 0 { "-" } else { "+" };
        let text = format!("a1 {sign} {}*e0^{k}*a2", lam.abs());
        let sub = Substitution::parse(&pres, "a1", &text).unwrap();
        let moved = sub.apply(&pres).unwrap();
        let back = sub.inverse(&pres).unwrap().apply(&moved).unwrap();
        prop_assert_eq!(back.relations(), pres.relations());
    }

    #[test]
    fn codimensions_survive_loop_rescaling(
        m in 2u32..4,
        n in 1usize..3,
        lam in prop::sample::select(vec![2i64, -1, 3]),
    ) {
        prop_assume!((n as u32) < m);
        let pres = staircase(1, m, m, n);
        let sub = Substitution::parse(&pres, "e1", &format!("{}{}*e1", if lam < 0 { "-" } else { "" }, lam.abs())).unwrap();
        let moved = sub.apply(&pres).unwrap();
        for ja in assignments(&pres, &[2, 2]) {
            prop_assert_eq!(codim_c(&pres, &ja).unwrap(), codim_c(&moved, &ja).unwrap());
        }
    }

    #[test]
    fn cycle_check_agrees_with_reachability(
        n in 1usize..5,
        edges in prop::collection::vec((0usize..5, 0usize..5), 0..7),
    ) {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let edges: Vec<(usize, usize)> = edges.into_iter().map(|(s, t)| (s % n, t % n)).collect();
        let arrow_names: Vec<String> = (0..edges.len()).map(|i| format!("x{i}")).collect();
        let arrows: Vec<(&str, &str, &str)> = edges
            .iter()
            .zip(&arrow_names)
            .map(|(&(s, t), a)| (a.as_str(), names[s].as_str(), names[t].as_str()))
            .collect();
        let vertex_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let q = Quiver::new(&vertex_refs, &arrows).unwrap();

        // Transitive closure over non-loop arrows.
        let mut reach = vec![vec![false; n]; n];
        for &(s, t) in &edges {
            if s != t { reach[s][t] = true; }
        }
        for k in 0..n { for i in 0..n { for j in 0..n {
            if reach[i][k] && reach[k][j] { reach[i][j] = true; }
        }}}
        let has_cycle = (0..n).any(|v| reach[v][v]);
        let mut loops = vec![0; n];
        for &(s, t) in &edges {
            if s == t { loops[s] += 1; }
        }

        let diag = check_cycle_conditions(&q);
        prop_assert_eq!(diag.offending_cycle.is_some(), has_cycle);
        prop_assert_eq!(diag.multi_loop_vertices.len(), loops.iter().filter(|&&c| c > 1).count());
        if let Some(cycle) = &diag.offending_cycle {
            // A composable closed path.
            let p = Path::new(&q, cycle.clone()).unwrap();
            prop_assert_eq!(p.source(), p.target());
        }
    }
}
