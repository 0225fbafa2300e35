use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use super::field::{is_small_prime, rat_mod, FFMatrix};
use crate::linsys::{ambient_dim, codim_c, LinsysError};
use crate::partition::{classify_nilpotent, orbit_count_ff, JordanAssignment, PartitionError};
use crate::quiver::{ArrowId, BoundQuiverPresentation, VertexId};
use crate::strata::assignments;

/// Default bound on `q^E`, `E` the number of free matrix entries.
pub const DEFAULT_POINT_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} is not a prime below 2^16")]
    NotPrime(u64),
    #[error("enumeration needs {q}^{entries} points, cap is {cap}")]
    CapExceeded { q: u64, entries: usize, cap: u64 },
    #[error("coefficient {coefficient} has no image in F_{q}")]
    BadPrime { q: u64, coefficient: String },
    #[error("dimension vector has {got} entries, quiver has {want} vertices")]
    DimMismatch { got: usize, want: usize },
    #[error("no count for stratum {0}")]
    MissingStratum(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Linsys(#[from] LinsysError),
}

/// Point counts of every stratum of `rep(A, d)(F_q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumCountTable {
    pub dims: Vec<usize>,
    pub q: u64,
    pub total: u64,
    /// Canonical order, zero counts included.
    pub counts: Vec<(JordanAssignment, u64)>,
}

impl StratumCountTable {
    pub fn get(&self, ja: &JordanAssignment) -> Option<u64> {
        self.counts.iter().find(|(a, _)| a == ja).map(|&(_, c)| c)
    }

    /// The strata exhaust the enumerated points.
    pub fn is_complete(&self) -> bool {
        self.counts.iter().map(|&(_, c)| c).sum::<u64>() == self.total
    }
}

struct CompiledTerm {
    coefficient: u64,
    arrows: Vec<ArrowId>,
}

struct CompiledRelation {
    source: VertexId,
    target: VertexId,
    terms: Vec<CompiledTerm>,
}

fn compile(pres: &BoundQuiverPresentation, q: u64) -> Result<Vec<CompiledRelation>, OracleError> {
    pres.relations()
        .iter()
        .map(|r| {
            let terms = r
                .terms()
                .map(|(k, p)| {
                    let coefficient = rat_mod(k, q).ok_or_else(|| OracleError::BadPrime {
                        q,
                        coefficient: k.to_string(),
                    })?;
                    Ok(CompiledTerm {
                        coefficient,
                        arrows: p.arrows().to_vec(),
                    })
                })
                .collect::<Result<Vec<_>, OracleError>>()?;
            Ok(CompiledRelation {
                source: r.source(),
                target: r.target(),
                terms,
            })
        })
        .collect()
}

/// Square matrices of size `d` over `F_q` with `X^m = 0`, with Jordan types.
fn nilpotent_matrices(d: usize, m: u32, q: u64) -> Vec<(FFMatrix, crate::partition::Partition)> {
    if m <= 1 {
        return vec![(
            FFMatrix::zeros(d, d, q),
            crate::partition::Partition::new(vec![1; d]).expect("all ones"),
        )];
    }
    let total = q.pow((d * d) as u32);
    (0..total)
        .filter_map(|code| {
            let x = FFMatrix::from_code(d, d, q, code);
            let ja = classify_nilpotent(&x)?;
            (ja.largest() <= m as usize).then_some((x, ja))
        })
        .collect()
}

fn relations_vanish(
    rels: &[CompiledRelation],
    dims: &[usize],
    q: u64,
    matrices: &[FFMatrix],
) -> bool {
    for r in rels {
        let (dt, ds) = (dims[r.target.0], dims[r.source.0]);
        let mut sum = FFMatrix::zeros(dt, ds, q);
        for t in &r.terms {
            let mut prod = matrices[t.arrows[0].0].clone();
            for a in &t.arrows[1..] {
                prod = prod.mul(&matrices[a.0]);
            }
            sum.add_scaled(t.coefficient, &prod);
        }
        if !sum.is_zero() {
            return false;
        }
    }
    true
}

/// Enumerates `rep(A, d)(F_q)` and tallies points by the Jordan types of the
/// loop matrices. Loop matrices are fixed first and checked for nilpotency
/// before any arrow entry is enumerated.
pub fn enumerate_and_classify(
    pres: &BoundQuiverPresentation,
    dims: &[usize],
    q: u64,
    cap: u64,
) -> Result<StratumCountTable, OracleError> {
    if !is_small_prime(q) {
        return Err(OracleError::NotPrime(q));
    }
    let quiver = pres.quiver();
    if dims.len() != quiver.vertex_count() {
        return Err(OracleError::DimMismatch {
            got: dims.len(),
            want: quiver.vertex_count(),
        });
    }
    let loop_entries: usize = quiver
        .vertices()
        .filter(|&v| quiver.loop_at(v).is_some())
        .map(|v| dims[v.0] * dims[v.0])
        .sum();
    let arrow_entries = ambient_dim(pres, dims);
    let entries = loop_entries + arrow_entries;
    if (q as f64).powi(entries as i32) > cap as f64 {
        return Err(OracleError::CapExceeded { q, entries, cap });
    }
    let rels = compile(pres, q)?;

    let per_vertex: Vec<Vec<(FFMatrix, crate::partition::Partition)>> = quiver
        .vertices()
        .map(|v| nilpotent_matrices(dims[v.0], pres.order(v), q))
        .collect();
    let proper = quiver.proper_arrows();
    let shapes: Vec<(usize, usize)> = proper
        .iter()
        .map(|&a| (dims[quiver.arrow(a).target.0], dims[quiver.arrow(a).source.0]))
        .collect();
    let arrow_codes = q.pow(arrow_entries as u32);

    // every combination of loop matrices, vertex 0 slowest
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for list in &per_vertex {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                (0..list.len()).map(move |i| {
                    let mut c = c.clone();
                    c.push(i);
                    c
                })
            })
            .collect();
    }

    let tally: BTreeMap<JordanAssignment, u64> = combos
        .par_iter()
        .fold(BTreeMap::new, |mut acc, combo| {
            let ja = JordanAssignment(
                combo.iter().enumerate().map(|(v, &i)| per_vertex[v][i].1.clone()).collect(),
            );
            let mut matrices: Vec<FFMatrix> = vec![FFMatrix::zeros(0, 0, q); quiver.arrow_count()];
            for v in quiver.vertices() {
                if let Some(l) = quiver.loop_at(v) {
                    matrices[l.0] = per_vertex[v.0][combo[v.0]].0.clone();
                }
            }
            let mut hits = 0u64;
            for code in 0..arrow_codes {
                let mut rest = code;
                for (&a, &(r, c)) in proper.iter().zip(&shapes) {
                    let block = q.pow((r * c) as u32);
                    matrices[a.0] = FFMatrix::from_code(r, c, q, rest % block);
                    rest /= block;
                }
                if relations_vanish(&rels, dims, q, &matrices) {
                    hits += 1;
                }
            }
            if hits > 0 {
                *acc.entry(ja).or_insert(0) += hits;
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let counts: Vec<(JordanAssignment, u64)> = assignments(pres, dims)
        .into_iter()
        .map(|ja| {
            let c = tally.get(&ja).copied().unwrap_or(0);
            (ja, c)
        })
        .collect();
    Ok(StratumCountTable {
        dims: dims.to_vec(),
        q,
        total: tally.values().sum(),
        counts,
    })
}

/// Total number of points of `rep(A, d)(F_q)`.
pub fn total_points(
    pres: &BoundQuiverPresentation,
    dims: &[usize],
    q: u64,
    cap: u64,
) -> Result<u64, OracleError> {
    Ok(enumerate_and_classify(pres, dims, q, cap)?.total)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityRow {
    pub assignment: JordanAssignment,
    pub count: u64,
    /// Product of orbit counts times `q^(N - c)`.
    pub predicted: u64,
    pub codim: usize,
}

impl IdentityRow {
    pub fn pass(&self) -> bool {
        self.count == self.predicted
    }
}

/// Compares every stratum count with the rank-based prediction.
pub fn verify_count_identity(
    table: &StratumCountTable,
    pres: &BoundQuiverPresentation,
) -> Result<Vec<IdentityRow>, OracleError> {
    let q = table.q;
    let n = ambient_dim(pres, &table.dims);
    let mut rows = Vec::new();
    for ja in assignments(pres, &table.dims) {
        let count = table
            .get(&ja)
            .ok_or_else(|| OracleError::MissingStratum(ja.to_string()))?;
        let codim = codim_c(pres, &ja)?;
        let mut predicted = q.pow((n - codim) as u32);
        for p in ja.parts() {
            predicted *= orbit_count_ff(p, q)?;
        }
        rows.push(IdentityRow {
            assignment: ja,
            count,
            predicted,
            codim,
        });
    }
    Ok(rows)
}

fn csv_field(s: String) -> String {
    if s.contains(',') {
        format!("\"{s}\"")
    } else {
        s
    }
}

/// `assignment,count,q,predicted,pass`, one row per stratum. Assignments
/// with a comma are quoted.
pub fn identity_csv(q: u64, rows: &[IdentityRow]) -> String {
    let mut s = String::from("assignment,count,q,predicted,pass\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            csv_field(r.assignment.to_string()),
            r.count,
            q,
            r.predicted,
            if r.pass() { "pass" } else { "fail" }
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionEstimate {
    /// `ceil(log_q(count))` per field size, `None` for an empty stratum.
    pub per_field: Vec<(u64, Option<usize>)>,
    pub estimate: Option<usize>,
    pub consistent: bool,
}

/// Estimates the dimension from point counts over several field sizes.
/// Stratum counts are `q^D` times products of factors `1 - q^-i`, which
/// only pull the count down, so the logarithm is rounded up.
pub fn dimension_estimate(counts: &[(u64, u64)]) -> DimensionEstimate {
    let per_field: Vec<(u64, Option<usize>)> = counts
        .iter()
        .map(|&(q, c)| {
            let e = (c > 0).then(|| ((c as f64).ln() / (q as f64).ln() - 1e-9).ceil() as usize);
            (q, e)
        })
        .collect();
    let values: Vec<Option<usize>> = per_field.iter().map(|&(_, e)| e).collect();
    let consistent = values.windows(2).all(|w| w[0] == w[1]);
    DimensionEstimate {
        estimate: if consistent { values.first().copied().flatten() } else { None },
        per_field,
        consistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::parse_presentation;

    fn ja(s: &str) -> JordanAssignment {
        s.parse().unwrap()
    }

    #[test]
    fn one_vertex_square_zero() {
        let p = parse_presentation("vertex 0\nloop e 0 order 2\n").unwrap();
        let t = enumerate_and_classify(&p, &[2], 2, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(t.counts, vec![(ja("2"), 3), (ja("1,1"), 1)]);
        assert_eq!(t.total, 4);
        let rows = verify_count_identity(&t, &p).unwrap();
        assert!(rows.iter().all(IdentityRow::pass));
    }

    #[test]
    fn empty_representation() {
        let p = parse_presentation("vertex 0\nvertex 1\nloop e0 0 order 2\narrow a 1 -> 0\n").unwrap();
        let t = enumerate_and_classify(&p, &[0, 0], 3, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(t.counts, vec![(ja("-;-"), 1)]);
    }

    #[test]
    fn commuting_square_scalars() {
        let p = parse_presentation(
            "vertex 0\nvertex 1\nloop e0 0 order 2\nloop e1 1 order 2\narrow a1 1 -> 0\nrelation e0*a1 + a1*e1\n",
        )
        .unwrap();
        let t = enumerate_and_classify(&p, &[1, 1], 2, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(t.total, 2);
        let t = enumerate_and_classify(&p, &[2, 2], 2, DEFAULT_POINT_CAP).unwrap();
        assert!(t.is_complete());
        let rows = verify_count_identity(&t, &p).unwrap();
        assert!(rows.iter().all(IdentityRow::pass), "{}", identity_csv(2, &rows));
        assert!(identity_csv(2, &rows).starts_with("assignment,count,q,predicted,pass\n2;2,"));
    }

    #[test]
    fn guards() {
        let p = parse_presentation("vertex 0\nloop e 0 order 3\n").unwrap();
        assert_eq!(enumerate_and_classify(&p, &[2], 4, DEFAULT_POINT_CAP), Err(OracleError::NotPrime(4)));
        assert!(matches!(
            enumerate_and_classify(&p, &[5], 2, DEFAULT_POINT_CAP),
            Err(OracleError::CapExceeded { entries: 25, .. })
        ));
        let p = parse_presentation(
            "vertex 0\nvertex 1\nloop e0 0 order 2\narrow a 1 -> 0\nrelation 1/3*e0*a\n",
        )
        .unwrap();
        assert!(matches!(
            enumerate_and_classify(&p, &[1, 1], 3, DEFAULT_POINT_CAP),
            Err(OracleError::BadPrime { q: 3, .. })
        ));
    }

    #[test]
    fn estimates() {
        let e = dimension_estimate(&[(2, 8), (3, 27), (5, 125)]);
        assert_eq!((e.estimate, e.consistent), (Some(3), true));
        let e = dimension_estimate(&[(2, 3), (3, 8)]);
        assert_eq!(e.estimate, Some(2));
        let e = dimension_estimate(&[(2, 0), (3, 0)]);
        assert_eq!((e.estimate, e.consistent), (None, true));
        let e = dimension_estimate(&[(2, 2), (3, 27)]);
        assert!(!e.consistent);
        // q^2 (q^2 - 1)^2, the maximal stratum of e0 a1 + a1 e1 at (2,2).
        let e = dimension_estimate(&[(2, 36), (3, 576)]);
        assert_eq!(e.estimate, Some(6));
    }
}
