use proptest::prelude::*;

use strata_core::families::{build_family, FamilyTag};
use strata_core::formulas::{test_presentation, FormulaParams, FormulaRegistry};
use strata_core::linalg::{fp_rank, rat, RatMatrix};
use strata_core::linsys::{
    ambient_dim, assemble_system, c_additivity_split, codim_c, codim_c_of, LoopData,
};
use strata_core::partition::{jordan_matrix, partitions_bounded, JordanAssignment, Partition};
use strata_core::quiver::{parse_presentation, BoundQuiverPresentation};

fn family(h: usize, m: u32, n: usize) -> BoundQuiverPresentation {
    build_family(FamilyTag::A { h, m0: m, m1: m, n }).unwrap()
}

/// A Jordan assignment with weights `dims` and parts bounded by the orders.
fn assignment(pres: &BoundQuiverPresentation, dims: [usize; 2], pick: [usize; 2]) -> JordanAssignment {
    JordanAssignment(
        (0..2)
            .map(|v| {
                let all = partitions_bounded(dims[v], pres.orders()[v] as usize);
                all[pick[v] % all.len()].clone()
            })
            .collect(),
    )
}

/// Unitriangular integer matrix from a seed, so it is invertible over Q.
fn unitriangular(n: usize, seed: &[i64]) -> RatMatrix {
    RatMatrix::from_fn(n, n, |r, c| {
        if r == c {
            rat(1)
        } else if r < c {
            rat(seed[(r * n + c) % seed.len()])
        } else {
            rat(0)
        }
    })
}

fn permutation(n: usize, shift: usize) -> RatMatrix {
    RatMatrix::from_fn(n, n, |r, c| rat(((c + shift) % n == r) as i64))
}

proptest! {
    #[test]
    fn codimension_is_conjugation_invariant(
        m in 2u32..4,
        n in 1usize..3,
        d0 in 1usize..4,
        d1 in 1usize..4,
        pick in (0usize..5, 0usize..5),
        seed in prop::collection::vec(-2i64..3, 1..10),
        shift in 0usize..3,
    ) {
        prop_assume!((n as u32) < m);
        let pres = family(1, m, n);
        let ja = assignment(&pres, [d0, d1], [pick.0, pick.1]);
        let direct = codim_c(&pres, &ja).unwrap();
        let loops: Vec<RatMatrix> = ja
            .parts()
            .iter()
            .map(|p| {
                let d = p.weight();
                let g = unitriangular(d, &seed).mul(&permutation(d, shift));
                g.mul(&jordan_matrix(p)).mul(&g.inverse().unwrap())
            })
            .collect();
        let sys = assemble_system(&pres, pres.relations(), &LoopData::explicit(loops)).unwrap();
        prop_assert_eq!(sys.rank(), direct);
    }

    #[test]
    fn codimension_is_additive_over_parts(
        m in 2u32..5,
        n in 1usize..4,
        d0 in 0usize..5,
        d1 in 0usize..5,
        pick in (0usize..7, 0usize..7),
    ) {
        prop_assume!((n as u32) < m);
        let pres = family(1, m, n);
        let ja = assignment(&pres, [d0, d1], [pick.0, pick.1]);
        let table = c_additivity_split(&pres, &ja).unwrap();
        prop_assert_eq!(table.total(), codim_c(&pres, &ja).unwrap());
    }

    #[test]
    fn additivity_for_formula_templates(
        item in 1usize..7,
        p in 1usize..5,
        q in 1usize..5,
        l in 1usize..5,
        d in (0usize..7, 0usize..7),
        pick in (0usize..11, 0usize..11),
    ) {
        let reg = FormulaRegistry::default();
        let x = FormulaParams { p, q, l: None, lambda: None, h: 2 };
        let x = if reg.get(item).unwrap().uses_l() { FormulaParams { l: Some(l), ..x } } else { x };
        prop_assume!(reg.check(item, &x).is_ok());
        let pres = test_presentation(p, q, 2, &reg.get(item).unwrap().template(&x));
        let ja = assignment(&pres, [d.0, d.1], [pick.0, pick.1]);
        let table = c_additivity_split(&pres, &ja).unwrap();
        prop_assert_eq!(table.total(), codim_c(&pres, &ja).unwrap());
    }

    #[test]
    fn disjoint_arrow_relations_add(
        h in 1usize..5,
        shapes in prop::collection::vec(prop::collection::vec((0usize..3, 0usize..3, 1i64..4), 1..4), 4),
        d0 in 0usize..5,
        d1 in 0usize..5,
        pick in (0usize..7, 0usize..7),
    ) {
        let mut text = String::from("vertex 0\nvertex 1\nloop e0 0 order 3\nloop e1 1 order 3\n");
        for i in 1..=h {
            text.push_str(&format!("arrow a{i} 1 -> 0\n"));
        }
        for (i, shape) in shapes.iter().take(h).enumerate() {
            let terms: Vec<String> = shape
                .iter()
                .map(|&(a, b, k)| (if a + b == 0 { 1 } else { a }, b, k)) // length >= 2
                .map(|(a, b, k)| format!("{k}*e0^{a}*a{}*e1^{b}", i + 1).replace("e0^0*", "").replace("*e1^0", ""))
                .collect();
            text.push_str(&format!("relation {}\n", terms.join(" + ")));
        }
        let pres = parse_presentation(&text).unwrap();
        let ja = assignment(&pres, [d0, d1], [pick.0, pick.1]);
        let rels = pres.relations();
        let parts: usize = (0..rels.len())
            .map(|i| codim_c_of(&pres, &rels[i..=i], &ja).unwrap())
            .sum();
        prop_assert_eq!(codim_c(&pres, &ja).unwrap(), parts);
    }

    #[test]
    fn rank_bounds_and_monotonicity(
        m in 2u32..4,
        d0 in 1usize..4,
        d1 in 1usize..4,
        pick in (0usize..5, 0usize..5),
    ) {
        let text = format!(
            "vertex 0\nvertex 1\nloop e0 0 order {m}\nloop e1 1 order {m}\n\
             arrow a1 1 -> 0\narrow a2 1 -> 0\n\
             relation e0*a1 + a1*e1\nrelation e0*a2 - a1*e1\n"
        );
        let pres = parse_presentation(&text).unwrap();
        let ja = assignment(&pres, [d0, d1], [pick.0, pick.1]);
        let rels = pres.relations();
        let first = codim_c_of(&pres, &rels[..1], &ja).unwrap();
        let both = codim_c_of(&pres, rels, &ja).unwrap();
        let second = codim_c_of(&pres, &rels[1..], &ja).unwrap();
        prop_assert!(first <= both && second <= both);
        prop_assert!(both <= first + second);
        let sys = assemble_system(&pres, rels, &LoopData::jordan(&pres, &ja).unwrap()).unwrap();
        prop_assert!(both <= ambient_dim(&pres, &[d0, d1]));
        prop_assert!(both <= sys.matrix().rows());
        // Integer entries: reduction mod p can only lose rank.
        for p in [2u64, 3, 101] {
            prop_assert!(fp_rank(sys.matrix(), p).unwrap() <= both);
        }
    }
}

#[test]
fn doubled_block_against_two_dimensional_source() {
    // c at ((m,m),(2)) is twice c at ((m),(2)).
    for m in 2..=5u32 {
        let mm = JordanAssignment(vec![
            Partition::new(vec![m as usize, m as usize]).unwrap(),
            Partition::single(2),
        ]);
        let text = |rel: &str| {
            format!(
                "vertex 0\nvertex 1\nloop e0 0 order {m}\nloop e1 1 order 2\n\
                 arrow a1 1 -> 0\narrow a2 1 -> 0\nrelation {rel}\n"
            )
        };
        let same = parse_presentation(&text("e0*a1 + a1*e1")).unwrap();
        let split = parse_presentation(&text("e0*a1 + a2*e1")).unwrap();
        let m = m as usize;
        assert_eq!(codim_c(&same, &mm).unwrap(), 4 * (m - 1));
        assert_eq!(codim_c(&split, &mm).unwrap(), 2 * (2 * m - 1));
    }
}

#[test]
fn relations_on_disjoint_arrows_add() {
    let text = "vertex 0\nvertex 1\nloop e0 0 order 3\nloop e1 1 order 3\n\
                arrow a1 1 -> 0\narrow a2 1 -> 0\n\
                relation e0*a1 + a1*e1\nrelation e0^2*a2 + e0*a2*e1 + a2*e1^2\n";
    let pres = parse_presentation(text).unwrap();
    let rels = pres.relations();
    for d0 in 0..=4 {
        for d1 in 0..=4 {
            for ja in strata_core::strata::assignments(&pres, &[d0, d1]) {
                let a = codim_c_of(&pres, &rels[..1], &ja).unwrap();
                let b = codim_c_of(&pres, &rels[1..], &ja).unwrap();
                assert_eq!(codim_c(&pres, &ja).unwrap(), a + b, "{ja}");
            }
        }
    }
}
