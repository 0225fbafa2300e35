//! Stratum dimensions, the maximal stratum and reducibility certificates.

use std::fmt::Write as _;

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::Rat;
use crate::linsys::{ambient_dim, codim_c, LinsysError};
use crate::partition::{
    is_maximal, maximal_partition, orbit_dim, partitions_bounded, JordanAssignment, Partition,
};
use crate::quiver::{
    check_cycle_conditions, BoundQuiverPresentation, Combination, Path, Quiver, QuiverError,
    Relation, VertexId,
};

/// Default bound on the number of Jordan assignments per dimension vector.
pub const DEFAULT_SCAN_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrataError {
    #[error(transparent)]
    Linsys(#[from] LinsysError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error("quiver fails the cycle conditions: {0}")]
    CycleCondition(String),
    #[error("dimension vector has {got} entries, quiver has {want} vertices")]
    DimMismatch { got: usize, want: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumReport {
    pub assignment: JordanAssignment,
    pub orbit_dims: Vec<usize>,
    /// Sum over non-loop arrows of `d_t * d_s`.
    pub ambient: usize,
    pub codim: usize,
    pub dim: usize,
    pub maximal: bool,
}

impl StratumReport {
    pub fn orbit_total(&self) -> usize {
        self.orbit_dims.iter().sum()
    }
}

fn check_shape(pres: &BoundQuiverPresentation, dims: &[usize]) -> Result<(), StrataError> {
    let q = pres.quiver();
    let diag = check_cycle_conditions(q);
    if !diag.passed() {
        let what = match &diag.offending_cycle {
            Some(c) => {
                let names: Vec<&str> = c.iter().map(|&a| q.arrow(a).name.as_str()).collect();
                format!("oriented cycle {}", names.join("*"))
            }
            None => "vertex with two loops".to_string(),
        };
        return Err(StrataError::CycleCondition(what));
    }
    if dims.len() != q.vertex_count() {
        return Err(StrataError::DimMismatch {
            got: dims.len(),
            want: q.vertex_count(),
        });
    }
    Ok(())
}

/// Dimension of the stratum of `ja`: orbit dimensions plus the dimension of
/// the solution space of the arrow system.
pub fn stratum_dim(
    pres: &BoundQuiverPresentation,
    ja: &JordanAssignment,
) -> Result<StratumReport, StrataError> {
    let dims = ja.dims();
    check_shape(pres, &dims)?;
    Ok(report_unchecked(pres, ja)?)
}

fn report_unchecked(
    pres: &BoundQuiverPresentation,
    ja: &JordanAssignment,
) -> Result<StratumReport, LinsysError> {
    let dims = ja.dims();
    let codim = codim_c(pres, ja)?;
    let ambient = ambient_dim(pres, &dims);
    let orbit_dims: Vec<usize> = ja.parts().iter().map(orbit_dim).collect();
    let maximal = ja
        .parts()
        .iter()
        .enumerate()
        .all(|(v, p)| is_maximal(p, pres.order(VertexId(v)) as usize));
    Ok(StratumReport {
        dim: orbit_dims.iter().sum::<usize>() + ambient - codim,
        assignment: ja.clone(),
        orbit_dims,
        ambient,
        codim,
        maximal,
    })
}

pub fn maximal_assignment(pres: &BoundQuiverPresentation, dims: &[usize]) -> JordanAssignment {
    JordanAssignment(
        dims.iter()
            .enumerate()
            .map(|(v, &d)| maximal_partition(d, pres.order(VertexId(v)) as usize))
            .collect(),
    )
}

pub fn max_stratum(
    pres: &BoundQuiverPresentation,
    dims: &[usize],
) -> Result<StratumReport, StrataError> {
    check_shape(pres, dims)?;
    Ok(report_unchecked(pres, &maximal_assignment(pres, dims))?)
}

/// Number of Jordan assignments for `dims`, saturating.
pub fn assignment_count(pres: &BoundQuiverPresentation, dims: &[usize]) -> u128 {
    dims.iter()
        .enumerate()
        .map(|(v, &d)| partitions_bounded(d, pres.order(VertexId(v)) as usize).len() as u128)
        .fold(1u128, |a, b| a.saturating_mul(b))
}

/// All Jordan assignments in canonical order: vertex 0 varies slowest and
/// each vertex runs through its partitions maximal first.
pub fn assignments(pres: &BoundQuiverPresentation, dims: &[usize]) -> Vec<JordanAssignment> {
    let lists: Vec<Vec<Partition>> = dims
        .iter()
        .enumerate()
        .map(|(v, &d)| partitions_bounded(d, pres.order(VertexId(v)) as usize))
        .collect();
    let mut out = vec![Vec::new()];
    for list in &lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for p in list {
                let mut a: Vec<Partition> = prefix.clone();
                a.push(p.clone());
                next.push(a);
            }
        }
        out = next;
    }
    out.into_iter().map(JordanAssignment).collect()
}

/// Every stratum for `dims`, in canonical order.
pub fn all_strata(
    pres: &BoundQuiverPresentation,
    dims: &[usize],
) -> Result<Vec<StratumReport>, StrataError> {
    check_shape(pres, dims)?;
    assignments(pres, dims)
        .par_iter()
        .map(|ja| report_unchecked(pres, ja).map_err(StrataError::from))
        .collect()
}

/// A non-maximal stratum at least as large as the maximal one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducibilityCertificate {
    pub dims: Vec<usize>,
    pub max: StratumReport,
    pub witness: StratumReport,
}

impl ReducibilityCertificate {
    /// `dim S_witness - dim S_max`.
    pub fn margin(&self) -> i64 {
        self.witness.dim as i64 - self.max.dim as i64
    }

    pub fn codim_difference(&self) -> i64 {
        self.max.codim as i64 - self.witness.codim as i64
    }

    /// Per-vertex `orbit_dim(witness) - orbit_dim(max)`.
    pub fn orbit_differences(&self) -> Vec<i64> {
        self.witness
            .orbit_dims
            .iter()
            .zip(&self.max.orbit_dims)
            .map(|(&w, &m)| w as i64 - m as i64)
            .collect()
    }

    /// Margin equals the codimension difference plus the orbit differences.
    pub fn decomposition_holds(&self) -> bool {
        self.margin() == self.codim_difference() + self.orbit_differences().iter().sum::<i64>()
    }

    /// Recomputes both reports from scratch and compares.
    pub fn verify(&self, pres: &BoundQuiverPresentation) -> Result<bool, StrataError> {
        let max = stratum_dim(pres, &self.max.assignment)?;
        let witness = stratum_dim(pres, &self.witness.assignment)?;
        Ok(max == self.max
            && witness == self.witness
            && max.maximal
            && !witness.maximal
            && self.margin() >= 0
            && self.decomposition_holds())
    }

    pub fn to_text(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let orbit: Vec<String> = self.orbit_differences().iter().map(|d| d.to_string()).collect();
        let mut s = String::new();
        let _ = writeln!(s, "certificate d=({})", dims.join(","));
        let _ = writeln!(s, "  ambient N        {}", self.max.ambient);
        for (label, r) in [("maximal", &self.max), ("witness", &self.witness)] {
            let _ = writeln!(
                s,
                "  {label:<8} {:<10} c={} orbits={} dim={}",
                r.assignment.to_string(),
                r.codim,
                r.orbit_total(),
                r.dim
            );
        }
        let _ = writeln!(s, "  margin           {}", self.margin());
        let _ = writeln!(
            s,
            "  decomposition    c_max - c_w = {}, orbit differences = [{}]",
            self.codim_difference(),
            orbit.join(",")
        );
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub cap: usize,
    /// Collect every certificate instead of stopping at the first.
    pub all: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            cap: DEFAULT_SCAN_CAP,
            all: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanOutcome {
    /// Certificates in canonical order; nonempty.
    Certificates(Vec<ReducibilityCertificate>),
    NoCertificate { scanned: usize },
    CapExceeded { assignments: u128, cap: usize },
}

impl ScanOutcome {
    pub fn certificates(&self) -> &[ReducibilityCertificate] {
        match self {
            ScanOutcome::Certificates(c) => c,
            _ => &[],
        }
    }

    pub fn first(&self) -> Option<&ReducibilityCertificate> {
        self.certificates().first()
    }
}

/// Looks for a non-maximal stratum whose dimension reaches that of the
/// maximal one. A certificate proves reducibility; its absence proves
/// nothing.
pub fn reducibility_scan(
    pres: &BoundQuiverPresentation,
    dims: &[usize],
    opts: ScanOptions,
) -> Result<ScanOutcome, StrataError> {
    check_shape(pres, dims)?;
    let count = assignment_count(pres, dims);
    if count > opts.cap as u128 {
        return Ok(ScanOutcome::CapExceeded {
            assignments: count,
            cap: opts.cap,
        });
    }
    let max = report_unchecked(pres, &maximal_assignment(pres, dims))?;
    let candidates: Vec<JordanAssignment> = assignments(pres, dims)
        .into_iter()
        .filter(|ja| *ja != max.assignment)
        .collect();
    let scanned = candidates.len();
    let certify = |ja: &JordanAssignment| -> Option<Result<ReducibilityCertificate, StrataError>> {
        match report_unchecked(pres, ja) {
            Err(e) => Some(Err(e.into())),
            Ok(w) if w.dim >= max.dim => Some(Ok(ReducibilityCertificate {
                dims: dims.to_vec(),
                max: max.clone(),
                witness: w,
            })),
            Ok(_) => None,
        }
    };
    let found: Vec<ReducibilityCertificate> = if opts.all {
        candidates
            .par_iter()
            .filter_map(certify)
            .collect::<Result<_, _>>()?
    } else {
        match candidates.par_iter().find_map_first(certify) {
            Some(r) => vec![r?],
            None => Vec::new(),
        }
    };
    Ok(if found.is_empty() {
        ScanOutcome::NoCertificate { scanned }
    } else {
        ScanOutcome::Certificates(found)
    })
}

/// All dimension vectors with `n` entries and total at most `max_total`,
/// lexicographic from the zero vector.
pub fn dims_up_to(n: usize, max_total: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for d in 0..=rest {
            cur.push(d);
            go(n, rest - d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, max_total, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapTest {
    pub c_max: usize,
    pub c_witness: usize,
    pub witness: JordanAssignment,
    pub holds: bool,
}

impl GapTest {
    pub fn gap(&self) -> i64 {
        self.c_max as i64 - self.c_witness as i64
    }
}

/// Compares the maximal stratum with the one where the single block `(p)` at
/// `vertex` is split into `(p-1, 1)`: the split stratum is a certificate iff
/// the codimension drops by at least 2.
pub fn split_block_gap_test(
    pres: &BoundQuiverPresentation,
    dims: &[usize],
    vertex: VertexId,
) -> Result<GapTest, StrataError> {
    check_shape(pres, dims)?;
    let max = maximal_assignment(pres, dims);
    let at = &max.parts()[vertex.0];
    if at.len() != 1 || at.largest() < 2 {
        return Err(StrataError::Precondition(format!(
            "maximal partition at vertex {} is {}, not a single part >= 2",
            pres.quiver().vertex_name(vertex),
            at
        )));
    }
    let p = at.largest();
    let mut parts = max.parts().to_vec();
    parts[vertex.0] = Partition::new(vec![p - 1, 1]).expect("decreasing");
    let witness = JordanAssignment(parts);
    let c_max = codim_c(pres, &max)?;
    let c_witness = codim_c(pres, &witness)?;
    Ok(GapTest {
        c_max,
        c_witness,
        holds: c_max >= c_witness + 2,
        witness,
    })
}

/// Three vertices `0 <- 1 <- 2` with loops of order `m` everywhere, arrows
/// `a1..ah` from 1 to 0 and `b1..bl` from 2 to 1, and the two relations
/// `sum_i e0^i a1 e1^(n1-i)` and `sum_j f^j b1 e2^(n2-j)` where
/// `f = sum_k lambdas[k-1] e1^k`.
pub fn nooverlap_presentation(
    h: usize,
    l: usize,
    n1: usize,
    n2: usize,
    m: u32,
    lambdas: &[Rat],
) -> Result<BoundQuiverPresentation, StrataError> {
    let bad = |s: &str| Err(StrataError::Precondition(s.to_string()));
    if h == 0 || l == 0 {
        return bad("h, l >= 1");
    }
    if n1 == 0 || n1 > n2 || n2 as u32 >= m {
        return bad("0 < n1 <= n2 < m");
    }
    if lambdas.first().is_none_or(Zero::is_zero) {
        return bad("lambda_1 != 0");
    }
    if lambdas.len() >= m as usize {
        return bad("at most m - 1 lambdas");
    }
    let a_names: Vec<String> = (1..=h).map(|i| format!("a{i}")).collect();
    let b_names: Vec<String> = (1..=l).map(|i| format!("b{i}")).collect();
    let mut arrows: Vec<(&str, &str, &str)> =
        vec![("e0", "0", "0"), ("e1", "1", "1"), ("e2", "2", "2")];
    arrows.extend(a_names.iter().map(|n| (n.as_str(), "1", "0")));
    arrows.extend(b_names.iter().map(|n| (n.as_str(), "2", "1")));
    let q = Quiver::new(&["0", "1", "2"], &arrows)?;
    let shell = BoundQuiverPresentation::new(q.clone(), vec![m; 3], Vec::new())?;
    let id = |n: &str| q.arrow_by_name(n).expect("declared");
    let (e0, e1, e2, a1, b1) = (id("e0"), id("e1"), id("e2"), id("a1"), id("b1"));
    let path = |factors: &[(crate::quiver::ArrowId, usize)]| {
        let f: Vec<_> = factors.iter().copied().filter(|&(_, k)| k > 0).collect();
        Path::from_factors(&q, &f).expect("composable")
    };

    let mut first = Combination::new();
    for i in 0..=n1 {
        first.add_term(Rat::from_integer(1.into()), path(&[(e0, i), (a1, 1), (e1, n1 - i)]));
    }
    let mut f = Combination::new();
    for (k, lam) in lambdas.iter().enumerate() {
        f.add_term(lam.clone(), path(&[(e1, k + 1)]));
    }
    let mut second = Combination::new();
    let mut power = Combination::single(Path::trivial(VertexId(1)));
    for j in 0..=n2 {
        let tail = Combination::single(path(&[(b1, 1), (e2, n2 - j)]));
        second = second.add(&power.compose(&tail));
        power = power.compose(&f);
        shell.truncate(&mut power);
    }
    shell.truncate(&mut first);
    shell.truncate(&mut second);
    let relations = vec![
        Relation::from_combination(&q, first)?,
        Relation::from_combination(&q, second)?,
    ];
    Ok(BoundQuiverPresentation::new(q, vec![m; 3], relations)?)
}

/// Dimensions of the strata with middle Jordan type `(n2+1)` and `(n2, 1)`
/// at dimension vector `(1, n2+1, 1)`.
pub fn nooverlap_dims(
    h: usize,
    l: usize,
    n1: usize,
    n2: usize,
    m: u32,
    lambdas: &[Rat],
) -> Result<(usize, usize), StrataError> {
    let pres = nooverlap_presentation(h, l, n1, n2, m, lambdas)?;
    let one = Partition::single(1);
    let open = JordanAssignment(vec![one.clone(), Partition::single(n2 + 1), one.clone()]);
    let split = JordanAssignment(vec![
        one.clone(),
        Partition::new(vec![n2, 1]).expect("decreasing"),
        one,
    ]);
    Ok((stratum_dim(&pres, &open)?.dim, stratum_dim(&pres, &split)?.dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::quiver::parse_presentation;

    fn two_vertex(m0: u32, m1: u32, h: usize, relations: &[&str]) -> BoundQuiverPresentation {
        let mut text = String::from("vertex 0\nvertex 1\n");
        if m0 > 1 {
            text.push_str(&format!("loop e0 0 order {m0}\n"));
        }
        if m1 > 1 {
            text.push_str(&format!("loop e1 1 order {m1}\n"));
        }
        for i in 1..=h {
            text.push_str(&format!("arrow a{i} 1 -> 0\n"));
        }
        for r in relations {
            text.push_str(&format!("relation {r}\n"));
        }
        parse_presentation(&text).unwrap()
    }

    fn ja(s: &str) -> JordanAssignment {
        s.parse().unwrap()
    }

    #[test]
    fn report_fields() {
        let free = two_vertex(2, 2, 1, &[]);
        let r = stratum_dim(&free, &ja("2;2")).unwrap();
        assert_eq!((r.orbit_total(), r.ambient, r.codim, r.dim), (4, 4, 0, 8));
        assert!(r.maximal);
        let r = stratum_dim(&free, &ja("1,1;1,1")).unwrap();
        assert_eq!(r.dim, 4);
        assert!(!r.maximal);

        let a = two_vertex(2, 2, 1, &["e0*a1 + a1*e1"]);
        let r = stratum_dim(&a, &ja("2;2")).unwrap();
        assert_eq!((r.codim, r.dim), (2, 6));
    }

    #[test]
    fn maximal_pairs() {
        let a = two_vertex(3, 3, 1, &["e0*a1 + a1*e1"]);
        assert_eq!(max_stratum(&a, &[3, 6]).unwrap().assignment, ja("3;3,3"));
        let a = two_vertex(2, 2, 1, &["e0*a1 + a1*e1"]);
        assert_eq!(max_stratum(&a, &[3, 1]).unwrap().assignment, ja("2,1;1"));
        let r = max_stratum(&a, &[0, 0]).unwrap();
        assert_eq!((r.assignment.clone(), r.dim), (ja("-;-"), 0));
    }

    #[test]
    fn cycle_conditions_enforced() {
        let p = parse_presentation("vertex 0\nvertex 1\narrow a 0 -> 1\narrow b 1 -> 0\n").unwrap();
        assert!(matches!(
            stratum_dim(&p, &ja("1;1")),
            Err(StrataError::CycleCondition(_))
        ));
    }

    #[test]
    fn canonical_assignment_order() {
        let a = two_vertex(2, 2, 1, &[]);
        let all: Vec<String> = assignments(&a, &[2, 2]).iter().map(|j| j.to_string()).collect();
        assert_eq!(all, ["2;2", "2;1,1", "1,1;2", "1,1;1,1"]);
        assert_eq!(assignment_count(&a, &[2, 2]), 4);
        assert_eq!(dims_up_to(2, 1), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn certificate_for_split_arrows() {
        // e0^a1 a1, e0^a2 a2 with a1 = 1, a2 = 2 at d = (3, 1)
        let p = two_vertex(4, 2, 2, &["e0*a1", "e0^2*a2"]);
        let out = reducibility_scan(&p, &[3, 1], ScanOptions::default()).unwrap();
        let c = out.first().expect("certificate");
        assert_eq!(c.witness.assignment, ja("2,1;1"));
        assert_eq!((c.max.codim, c.witness.codim), (3, 1));
        assert!(c.verify(&p).unwrap());
        assert!(c.to_text().contains("margin"));
    }

    #[test]
    fn scan_cap_and_none() {
        let a = two_vertex(2, 2, 1, &["e0*a1 + a1*e1"]);
        let out = reducibility_scan(&a, &[2, 2], ScanOptions::default()).unwrap();
        assert_eq!(out, ScanOutcome::NoCertificate { scanned: 3 });
        let out = reducibility_scan(&a, &[2, 2], ScanOptions { cap: 3, all: false }).unwrap();
        assert!(matches!(out, ScanOutcome::CapExceeded { assignments: 4, cap: 3 }));
    }

    #[test]
    fn scan_all_lists_first_certificate_first() {
        let p = two_vertex(4, 2, 2, &["e0*a1", "e0^2*a2"]);
        let first = reducibility_scan(&p, &[3, 1], ScanOptions::default()).unwrap();
        let all = reducibility_scan(&p, &[3, 1], ScanOptions { all: true, ..Default::default() }).unwrap();
        assert_eq!(first.first(), all.first());
        assert!(!all.certificates().is_empty());
    }

    #[test]
    fn gap_test() {
        let a = two_vertex(2, 2, 1, &["e0*a1 + a1*e1"]);
        let g = split_block_gap_test(&a, &[2, 1], VertexId(0)).unwrap();
        assert_eq!((g.c_max, g.c_witness, g.holds), (1, 0, false));
        let free = two_vertex(3, 2, 1, &[]);
        let g = split_block_gap_test(&free, &[2, 4], VertexId(0)).unwrap();
        assert_eq!((g.c_max, g.c_witness, g.holds), (0, 0, false));
        assert!(split_block_gap_test(&a, &[1, 1], VertexId(0)).is_err());
    }

    #[test]
    fn nooverlap_equal_small() {
        let (u, v) = nooverlap_dims(1, 1, 1, 1, 2, &[rat(1)]).unwrap();
        assert_eq!(u, v);
        assert!(nooverlap_dims(1, 1, 2, 1, 4, &[rat(1)]).is_err());
        assert!(nooverlap_dims(1, 1, 1, 1, 4, &[rat(0)]).is_err());
    }
}
