//! Linear systems obtained by evaluating degree-one relations on fixed loop
//! matrices with unknown arrow matrices.

use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{format_rat, BareissRank, RankEngine, RankError, RatMatrix};
use crate::partition::{jordan_matrix, JordanAssignment};
use crate::quiver::{path_degree, ArrowId, BoundQuiverPresentation, Relation, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinsysError {
    #[error("relation {relation} has a term of degree {degree}; only degree 1 is supported")]
    UnsupportedDegree { relation: String, degree: usize },
    #[error("relations do not share source and target")]
    EndpointMismatch,
    #[error("bad Jordan assignment: {0}")]
    BadAssignment(String),
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// One unknown: entry `(row, col)` of the matrix of `arrow`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicArrowEntry {
    pub arrow: ArrowId,
    pub row: usize,
    pub col: usize,
}

/// Row label: entry `(row, col)` of the evaluated relation number `relation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquationLabel {
    pub relation: usize,
    pub row: usize,
    pub col: usize,
}

/// Columns for every entry of every non-loop arrow matrix, arrows in quiver
/// order, entries row-major.
pub fn unknowns(pres: &BoundQuiverPresentation, dims: &[usize]) -> Vec<SymbolicArrowEntry> {
    let q = pres.quiver();
    let mut out = Vec::new();
    for a in q.proper_arrows() {
        let arrow = q.arrow(a);
        for row in 0..dims[arrow.target.0] {
            for col in 0..dims[arrow.source.0] {
                out.push(SymbolicArrowEntry { arrow: a, row, col });
            }
        }
    }
    out
}

/// Sum over non-loop arrows of `d_t * d_s`.
pub fn ambient_dim(pres: &BoundQuiverPresentation, dims: &[usize]) -> usize {
    let q = pres.quiver();
    q.proper_arrows()
        .into_iter()
        .map(|a| dims[q.arrow(a).target.0] * dims[q.arrow(a).source.0])
        .sum()
}

/// Loop matrices and dimension vector at which relations are evaluated.
#[derive(Debug, Clone)]
pub struct LoopData {
    dims: Vec<usize>,
    loops: Vec<RatMatrix>,
}

impl LoopData {
    /// Jordan matrices of `ja`, checked against the nilpotency orders.
    pub fn jordan(pres: &BoundQuiverPresentation, ja: &JordanAssignment) -> Result<Self, LinsysError> {
        let q = pres.quiver();
        if ja.parts().len() != q.vertex_count() {
            return Err(LinsysError::BadAssignment(format!(
                "{} partitions for {} vertices",
                ja.parts().len(),
                q.vertex_count()
            )));
        }
        for v in q.vertices() {
            let p = &ja.parts()[v.0];
            if p.largest() > pres.order(v) as usize {
                return Err(LinsysError::BadAssignment(format!(
                    "part {} exceeds order {} at vertex {}",
                    p.largest(),
                    pres.order(v),
                    q.vertex_name(v)
                )));
            }
        }
        Ok(LoopData {
            dims: ja.dims(),
            loops: ja.parts().iter().map(jordan_matrix).collect(),
        })
    }

    /// Arbitrary square loop matrices, one per vertex.
    pub fn explicit(loops: Vec<RatMatrix>) -> Self {
        LoopData {
            dims: loops.iter().map(RatMatrix::rows).collect(),
            loops,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn loop_power(&self, v: VertexId, k: usize) -> RatMatrix {
        self.loops[v.0].pow(k)
    }
}

/// Splits a degree-one path into (loops after the arrow, arrow, loops before).
fn split_term(
    pres: &BoundQuiverPresentation,
    r: &Relation,
    path: &crate::quiver::Path,
) -> Result<(usize, ArrowId, usize), LinsysError> {
    let q = pres.quiver();
    let deg = path_degree(q, path);
    if deg != 1 {
        return Err(LinsysError::UnsupportedDegree {
            relation: r.display(q),
            degree: deg,
        });
    }
    let arrows = path.arrows();
    let pos = arrows.iter().position(|&a| !q.is_loop(a)).expect("degree 1");
    Ok((pos, arrows[pos], arrows.len() - pos - 1))
}

/// Evaluates `r` with the given loop matrices. Row `r * d_s + c` holds the
/// coefficients of entry `(r, c)` of the result as a linear form in the
/// columns of [`unknowns`].
pub fn evaluate_relation(
    pres: &BoundQuiverPresentation,
    r: &Relation,
    data: &LoopData,
) -> Result<RatMatrix, LinsysError> {
    let q = pres.quiver();
    let dims = data.dims();
    let cols = unknowns(pres, dims);
    let (dt, ds) = (dims[r.target().0], dims[r.source().0]);
    let mut out = RatMatrix::zeros(dt * ds, cols.len());
    // offset of each proper arrow's block of columns
    let mut offset = vec![usize::MAX; q.arrow_count()];
    let mut next = 0;
    for a in q.proper_arrows() {
        offset[a.0] = next;
        next += dims[q.arrow(a).target.0] * dims[q.arrow(a).source.0];
    }
    for (k, path) in r.terms() {
        let (a, x, b) = split_term(pres, r, path)?;
        let left = data.loop_power(r.target(), a);
        let right = data.loop_power(r.source(), b);
        let base = offset[x.0];
        // coefficient of X[i][j] in entry (row, col) is left[row][i] * right[j][col]
        for row in 0..dt {
            for i in 0..dt {
                let li = left.get(row, i);
                if li.is_zero() {
                    continue;
                }
                for j in 0..ds {
                    for col in 0..ds {
                        let rj = right.get(j, col);
                        if rj.is_zero() {
                            continue;
                        }
                        let idx = base + i * ds + j;
                        let cur = out.get(row * ds + col, idx).clone();
                        out.set(row * ds + col, idx, cur + k * li * rj);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Stacked linear system of several relations at fixed loop data.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    matrix: RatMatrix,
    equations: Vec<EquationLabel>,
    columns: Vec<SymbolicArrowEntry>,
}

impl ConstraintSystem {
    pub fn matrix(&self) -> &RatMatrix {
        &self.matrix
    }

    pub fn equations(&self) -> &[EquationLabel] {
        &self.equations
    }

    pub fn columns(&self) -> &[SymbolicArrowEntry] {
        &self.columns
    }

    /// Number of unknowns `N`.
    pub fn ambient_dim(&self) -> usize {
        self.columns.len()
    }

    pub fn rank(&self) -> usize {
        BareissRank
            .rank(&self.matrix)
            .expect("rational rank cannot fail")
    }

    pub fn rank_with(&self, engine: &dyn RankEngine) -> Result<usize, RankError> {
        engine.rank(&self.matrix)
    }

    /// `rows cols` header followed by one row per line, entries as `num/den`.
    pub fn to_text(&self) -> String {
        let m = &self.matrix;
        let mut s = format!("{} {}\n", m.rows(), m.cols());
        for r in 0..m.rows() {
            let row: Vec<String> = m.row(r).iter().map(format_rat).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

pub fn assemble_system(
    pres: &BoundQuiverPresentation,
    relations: &[Relation],
    data: &LoopData,
) -> Result<ConstraintSystem, LinsysError> {
    let columns = unknowns(pres, data.dims());
    let mut rows = Vec::new();
    let mut equations = Vec::new();
    for (idx, r) in relations.iter().enumerate() {
        let m = evaluate_relation(pres, r, data)?;
        let ds = data.dims()[r.source().0];
        for (k, row) in m.into_rows().into_iter().enumerate() {
            equations.push(EquationLabel {
                relation: idx,
                row: k / ds.max(1),
                col: k % ds.max(1),
            });
            rows.push(row);
        }
    }
    let matrix = if rows.is_empty() {
        RatMatrix::zeros(0, columns.len())
    } else {
        RatMatrix::from_rows(rows)
    };
    Ok(ConstraintSystem {
        matrix,
        equations,
        columns,
    })
}

/// Codimension of the fibre over `ja`: rank of the system of all relations
/// of `pres`.
pub fn codim_c(pres: &BoundQuiverPresentation, ja: &JordanAssignment) -> Result<usize, LinsysError> {
    codim_c_of(pres, pres.relations(), ja)
}

pub fn codim_c_of(
    pres: &BoundQuiverPresentation,
    relations: &[Relation],
    ja: &JordanAssignment,
) -> Result<usize, LinsysError> {
    let data = LoopData::jordan(pres, ja)?;
    Ok(assemble_system(pres, relations, &data)?.rank())
}

pub fn codim_c_with(
    pres: &BoundQuiverPresentation,
    relations: &[Relation],
    ja: &JordanAssignment,
    engine: &dyn RankEngine,
) -> Result<usize, LinsysError> {
    let data = LoopData::jordan(pres, ja)?;
    Ok(assemble_system(pres, relations, &data)?.rank_with(engine)?)
}

/// Codimensions for every pair of single parts at the target and source of
/// the relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditivityTable {
    pub target_parts: Vec<usize>,
    pub source_parts: Vec<usize>,
    /// `values[i][j]` is c for parts `target_parts[i]`, `source_parts[j]`.
    pub values: Vec<Vec<usize>>,
}

impl AdditivityTable {
    pub fn total(&self) -> usize {
        self.values.iter().flatten().sum()
    }
}

pub fn c_additivity_split(
    pres: &BoundQuiverPresentation,
    ja: &JordanAssignment,
) -> Result<AdditivityTable, LinsysError> {
    let rels = pres.relations();
    let (s, t) = match rels.first() {
        Some(r) => (r.source(), r.target()),
        None => {
            return Ok(AdditivityTable {
                target_parts: Vec::new(),
                source_parts: Vec::new(),
                values: Vec::new(),
            })
        }
    };
    if rels.iter().any(|r| (r.source(), r.target()) != (s, t)) || s == t {
        return Err(LinsysError::EndpointMismatch);
    }
    let tp = ja.parts()[t.0].parts().to_vec();
    let sp = ja.parts()[s.0].parts().to_vec();
    let mut values = Vec::new();
    for &p in &tp {
        let mut row = Vec::new();
        for &qv in &sp {
            let mut sub = vec![crate::partition::Partition::empty(); ja.parts().len()];
            sub[t.0] = crate::partition::Partition::single(p);
            sub[s.0] = crate::partition::Partition::single(qv);
            row.push(codim_c(pres, &JordanAssignment(sub))?);
        }
        values.push(row);
    }
    Ok(AdditivityTable {
        target_parts: tp,
        source_parts: sp,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::parse_presentation;

    fn pres(orders: (u32, u32), h: usize, relations: &[&str]) -> BoundQuiverPresentation {
        let mut text = format!(
            "vertex 0\nvertex 1\nloop e0 0 order {}\nloop e1 1 order {}\n",
            orders.0, orders.1
        );
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
    fn shifted_copies() {
        // e0^l*a with p = 4, q = 1 gives p - l independent rows
        for l in 1..=4 {
            let p = pres((5, 2), 1, &[&format!("e0^{l}*a1")]);
            assert_eq!(codim_c(&p, &ja("4;1")).unwrap(), 4 - l);
        }
    }

    #[test]
    fn commuting_relation_shape() {
        let p = pres((2, 2), 1, &["e0*a1 + a1*e1"]);
        let data = LoopData::jordan(&p, &ja("2;2")).unwrap();
        let sys = assemble_system(&p, p.relations(), &data).unwrap();
        assert_eq!((sys.matrix().rows(), sys.matrix().cols()), (4, 4));
        assert_eq!(sys.ambient_dim(), 4);
        assert_eq!(sys.rank(), 2);
        let text = sys.to_text();
        assert!(text.starts_with("4 4\n"));
        assert_eq!(text.lines().count(), 5);
        // q(p - 1) at p = 3, q = 2
        let p = pres((3, 2), 1, &["e0*a1 + a1*e1"]);
        assert_eq!(codim_c(&p, &ja("3;2")).unwrap(), 4);
    }

    #[test]
    fn empty_and_zero() {
        let p = pres((2, 2), 1, &[]);
        let data = LoopData::jordan(&p, &ja("2;2")).unwrap();
        let sys = assemble_system(&p, &[], &data).unwrap();
        assert_eq!(sys.matrix().rows(), 0);
        assert_eq!(sys.rank(), 0);
        let z = Relation::zero(VertexId(1), VertexId(0));
        assert!(evaluate_relation(&p, &z, &data).unwrap().is_zero());
        // e0^2 vanishes on a block of size 2
        let p = pres((3, 2), 1, &["e0^2*a1"]);
        let data = LoopData::jordan(&p, &ja("2;2")).unwrap();
        assert!(evaluate_relation(&p, &p.relations()[0], &data).unwrap().is_zero());
    }

    #[test]
    fn degree_two_rejected() {
        let p = parse_presentation(
            "vertex 0\nvertex 1\nvertex 2\narrow a 1 -> 0\narrow b 2 -> 1\nrelation a*b\n",
        )
        .unwrap();
        assert!(matches!(
            codim_c(&p, &ja("1;1;1")),
            Err(LinsysError::UnsupportedDegree { degree: 2, .. })
        ));
    }

    #[test]
    fn bad_assignment() {
        let p = pres((2, 2), 1, &["e0*a1 + a1*e1"]);
        assert!(codim_c(&p, &ja("3;1")).is_err());
        assert!(codim_c(&p, &ja("2")).is_err());
    }

    #[test]
    fn additivity_table() {
        let p = pres((3, 2), 1, &["e0*a1"]);
        let t = c_additivity_split(&p, &ja("2,1;1")).unwrap();
        assert_eq!(t.values, vec![vec![1], vec![0]]);
        assert_eq!(t.total(), codim_c(&p, &ja("2,1;1")).unwrap());
    }

    #[test]
    fn block_diagonal_for_disjoint_arrows() {
        let p = pres((4, 3), 2, &["e0*a1 + a1*e1", "e0^2*a2"]);
        let data = LoopData::jordan(&p, &ja("3;2")).unwrap();
        let sys = assemble_system(&p, p.relations(), &data).unwrap();
        let m = sys.matrix();
        for (r, e) in sys.equations().iter().enumerate() {
            for (c, col) in sys.columns().iter().enumerate() {
                let own = p.quiver().arrow(col.arrow).name == if e.relation == 0 { "a1" } else { "a2" };
                if !own {
                    assert!(m.get(r, c).is_zero());
                }
            }
        }
        let whole = sys.rank();
        let sep: usize = p
            .relations()
            .iter()
            .map(|r| codim_c_of(&p, std::slice::from_ref(r), &ja("3;2")).unwrap())
            .sum();
        assert_eq!(whole, sep);
    }
}
