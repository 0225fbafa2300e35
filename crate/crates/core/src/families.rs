//! The named two-vertex families, their recognizer and the product
//! decomposition check for the relation-free family.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::ff_oracle::{total_points, OracleError};
use crate::linalg::Rat;
use crate::linsys::ambient_dim;
use crate::quiver::{
    path_degree, ArrowId, BoundQuiverPresentation, Combination, Path, Quiver, QuiverError,
    Relation, VertexId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("parameters out of range: {0}")]
    Range(String),
    #[error("relation truncates to zero for {0}")]
    VanishingRelation(String),
    #[error("recognizer handles at most two vertices, got {0}")]
    TooManyVertices(usize),
    #[error("cannot parse family tag {0:?}")]
    Syntax(String),
    #[error("presentation has mixed relations")]
    HasRelations,
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    /// Loops of orders `m0`, `m1`, `h` arrows and the staircase relation of
    /// length `n` in the first arrow.
    A { h: usize, m0: u32, m1: u32, n: usize },
    /// Same quiver without mixed relations.
    APrime { h: usize, m0: u32, m1: u32 },
    /// One vertex with a loop of order `m`.
    Truncated { m: u32 },
    Unrecognized,
}

impl FamilyTag {
    /// Whether the tag is one of the algebras with irreducible representation
    /// schemes on two vertices: `A(h,m,m,1)`, `A(h,m,m,m-1)`, `A'`, or the
    /// truncated polynomial rings.
    pub fn is_known_irreducible(&self) -> bool {
        match *self {
            FamilyTag::A { m0, m1, n, .. } => m0 == m1 && (n == 1 || n + 1 == m0 as usize),
            FamilyTag::APrime { .. } | FamilyTag::Truncated { .. } => true,
            FamilyTag::Unrecognized => false,
        }
    }

    fn check_range(&self) -> Result<(), FamilyError> {
        let bad = |s: &str| Err(FamilyError::Range(format!("{self}: {s}")));
        match *self {
            FamilyTag::A { h, m0, m1, n } => {
                if m0 < 2 || m1 < 2 {
                    return bad("m0, m1 >= 2");
                }
                if h < 1 || n < 1 {
                    return bad("h, n >= 1");
                }
            }
            FamilyTag::APrime { m0, m1, .. } => {
                if m0 < 1 || m1 < 1 {
                    return bad("m0, m1 >= 1");
                }
            }
            FamilyTag::Truncated { m } => {
                if m < 1 {
                    return bad("m >= 1");
                }
            }
            FamilyTag::Unrecognized => return bad("no presentation"),
        }
        Ok(())
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::A { h, m0, m1, n } => write!(f, "A({h},{m0},{m1},{n})"),
            FamilyTag::APrime { h, m0, m1 } => write!(f, "A'({h},{m0},{m1})"),
            FamilyTag::Truncated { m } => write!(f, "K[X]/(X^{m})"),
            FamilyTag::Unrecognized => f.write_str("unrecognized"),
        }
    }
}

impl FromStr for FamilyTag {
    type Err = FamilyError;

    /// `A(1,2,2,1)`, `A'(1,2,2)`, `K[X]/(X^4)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FamilyError::Syntax(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let args = |body: &str| -> Result<Vec<usize>, FamilyError> {
            body.strip_suffix(')')
                .ok_or_else(err)?
                .split(',')
                .map(|x| x.parse().map_err(|_| err()))
                .collect()
        };
        if let Some(m) = t.strip_prefix("K[X]/(X^").and_then(|r| r.strip_suffix(')')) {
            return Ok(FamilyTag::Truncated {
                m: m.parse().map_err(|_| err())?,
            });
        }
        if let Some(body) = t.strip_prefix("A'(") {
            if let [h, m0, m1] = args(body)?[..] {
                return Ok(FamilyTag::APrime {
                    h,
                    m0: m0 as u32,
                    m1: m1 as u32,
                });
            }
        } else if let Some(body) = t.strip_prefix("A(") {
            if let [h, m0, m1, n] = args(body)?[..] {
                return Ok(FamilyTag::A {
                    h,
                    m0: m0 as u32,
                    m1: m1 as u32,
                    n,
                });
            }
        }
        Err(err())
    }
}

fn two_vertex_quiver(h: usize, m0: u32, m1: u32) -> Quiver {
    let names: Vec<String> = (1..=h).map(|i| format!("a{i}")).collect();
    let mut arrows: Vec<(&str, &str, &str)> = Vec::new();
    if m0 >= 2 {
        arrows.push(("e0", "0", "0"));
    }
    if m1 >= 2 {
        arrows.push(("e1", "1", "1"));
    }
    arrows.extend(names.iter().map(|n| (n.as_str(), "1", "0")));
    Quiver::new(&["0", "1"], &arrows).expect("fixed shape")
}

/// `sum_{i=0}^{n} e0^(n-i) a1 e1^i` without the terms that vanish.
fn staircase_relation(pres: &BoundQuiverPresentation, n: usize) -> Combination {
    let q = pres.quiver();
    let (e0, e1, a1) = (
        q.arrow_by_name("e0").unwrap(),
        q.arrow_by_name("e1").unwrap(),
        q.arrow_by_name("a1").unwrap(),
    );
    let (m0, m1) = (pres.order(VertexId(0)) as usize, pres.order(VertexId(1)) as usize);
    let mut c = Combination::new();
    for i in 0..=n {
        if n - i >= m0 || i >= m1 {
            continue;
        }
        let mut f = Vec::new();
        if n > i {
            f.push((e0, n - i));
        }
        f.push((a1, 1));
        if i > 0 {
            f.push((e1, i));
        }
        c.add_term(Rat::one(), Path::from_factors(q, &f).expect("composable"));
    }
    c
}

pub fn build_family(tag: FamilyTag) -> Result<BoundQuiverPresentation, FamilyError> {
    tag.check_range()?;
    match tag {
        FamilyTag::Truncated { m } => {
            let arrows: Vec<(&str, &str, &str)> = if m >= 2 { vec![("e0", "0", "0")] } else { vec![] };
            let q = Quiver::new(&["0"], &arrows)?;
            Ok(BoundQuiverPresentation::new(q, vec![m], Vec::new())?)
        }
        FamilyTag::APrime { h, m0, m1 } => {
            let q = two_vertex_quiver(h, m0, m1);
            Ok(BoundQuiverPresentation::new(q, vec![m0, m1], Vec::new())?)
        }
        FamilyTag::A { h, m0, m1, n } => {
            let q = two_vertex_quiver(h, m0, m1);
            let shell = BoundQuiverPresentation::new(q.clone(), vec![m0, m1], Vec::new())?;
            let c = staircase_relation(&shell, n);
            if c.is_zero() {
                return Err(FamilyError::VanishingRelation(tag.to_string()));
            }
            let r = Relation::from_combination(&q, c)?;
            Ok(BoundQuiverPresentation::new(q, vec![m0, m1], vec![r])?)
        }
        FamilyTag::Unrecognized => unreachable!("rejected by range check"),
    }
}

/// Matches `pres` against the named families up to vertex and arrow
/// relabeling, one arrow change `a <- sum c e0^k a_j` with an invertible
/// leading part, and rescaling of the second loop and of the relation.
pub fn recognize_family(pres: &BoundQuiverPresentation) -> Result<FamilyTag, FamilyError> {
    let q = pres.quiver();
    match q.vertex_count() {
        0 => return Ok(FamilyTag::Unrecognized),
        1 => {
            return Ok(if q.proper_arrows().is_empty() && pres.relations().is_empty() {
                FamilyTag::Truncated {
                    m: pres.order(VertexId(0)),
                }
            } else {
                FamilyTag::Unrecognized
            })
        }
        2 => {}
        n => return Err(FamilyError::TooManyVertices(n)),
    }
    let proper = q.proper_arrows();
    // the target of the arrows plays the role of vertex 0
    let (t, s) = match proper.first() {
        None => (VertexId(0), VertexId(1)),
        Some(&a) => (q.arrow(a).target, q.arrow(a).source),
    };
    if proper.iter().any(|&a| q.arrow(a).target != t) {
        return Ok(FamilyTag::Unrecognized);
    }
    let (h, m0, m1) = (proper.len(), pres.order(t), pres.order(s));
    match pres.relations() {
        [] => Ok(FamilyTag::APrime { h, m0, m1 }),
        [r] if m0 >= 2 && m1 >= 2 => Ok(match_staircase(pres, r, t, s)
            .map_or(FamilyTag::Unrecognized, |n| FamilyTag::A { h, m0, m1, n })),
        _ => Ok(FamilyTag::Unrecognized),
    }
}

/// The staircase length `n` if `r` has the form
/// `sum_b c_b e0^(n-b) W e1^b` with `c_b = c t^b` and `W` a combination of
/// `e0^k a_j` whose `k = 0` part is nonzero.
fn match_staircase(
    pres: &BoundQuiverPresentation,
    r: &Relation,
    t: VertexId,
    s: VertexId,
) -> Option<usize> {
    let q = pres.quiver();
    let e0 = q.loop_at(t)?;
    let e1 = q.loop_at(s)?;
    let (m0, m1) = (pres.order(t) as usize, pres.order(s) as usize);
    // rows[b] collects the terms with e1^b, with the e1 suffix stripped
    let mut rows: Vec<Combination> = vec![Combination::new(); m1];
    for (k, p) in r.terms() {
        if path_degree(q, p) != 1 {
            return None;
        }
        let arrows = p.arrows();
        let b = arrows.iter().rev().take_while(|&&a| a == e1).count();
        let left = Path::new(q, arrows[..arrows.len() - b].to_vec()).ok()?;
        rows[b].add_term(k.clone(), left);
    }
    let e0_power = |p: &Path| p.arrows().iter().take_while(|&&a| a == e0).count();
    let b_min = rows.iter().position(|c| !c.is_zero())?;
    let n = b_min + rows[b_min].terms().map(|(_, p)| e0_power(p)).min()?;
    if n >= m0 + b_min || (b_min > 0 && n < m0 + b_min - 1) {
        return None;
    }
    // the row with the smallest shift shows the most of W
    let b_top = n.min(m1 - 1);
    let shift = n - b_top;
    let mut w = Combination::new();
    for (k, p) in rows[b_top].terms() {
        if e0_power(p) < shift {
            return None;
        }
        let rest: Vec<ArrowId> = p.arrows()[shift..].to_vec();
        w.add_term(k.clone(), Path::new(q, rest).ok()?);
    }
    if !w.terms().any(|(_, p)| e0_power(p) == 0) {
        return None;
    }
    let mut scales: Vec<Rat> = Vec::new();
    for (b, row) in rows.iter().enumerate() {
        if b > n || b < b_min {
            if !row.is_zero() {
                return None;
            }
            continue;
        }
        let mut expected = w.clone();
        for _ in 0..n - b {
            expected =
                Combination::single(Path::new(q, vec![e0]).ok()?).compose(&expected);
        }
        pres.truncate(&mut expected);
        let (lead_k, lead_p) = expected.terms().next()?;
        let c = row.coefficient(lead_p) / lead_k;
        if c.is_zero() || row != &expected.scale(&c) {
            return None;
        }
        scales.push(c);
    }
    // c_b must be geometric so that rescaling e1 makes all of them equal
    if scales.len() >= 2 {
        let ratio = &scales[1] / &scales[0];
        for w in scales.windows(2) {
            if &w[1] / &w[0] != ratio {
                return None;
            }
        }
    }
    Some(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductCheck {
    pub total: u64,
    /// Points of each one-vertex factor.
    pub vertex_counts: Vec<u64>,
    /// `q^N` for the free arrow part.
    pub arrow_factor: u64,
}

impl ProductCheck {
    pub fn predicted(&self) -> u64 {
        self.vertex_counts.iter().product::<u64>() * self.arrow_factor
    }

    pub fn holds(&self) -> bool {
        self.total == self.predicted()
    }
}

/// Checks that for a presentation without mixed relations the point count
/// factors into the one-vertex counts times `q^N`, by exhaustive counting.
pub fn product_decomposition_check(
    pres: &BoundQuiverPresentation,
    dims: &[usize],
    q: u64,
    cap: u64,
) -> Result<ProductCheck, FamilyError> {
    if !pres.relations().is_empty() {
        return Err(FamilyError::HasRelations);
    }
    let total = total_points(pres, dims, q, cap)?;
    let mut vertex_counts = Vec::new();
    for v in pres.quiver().vertices() {
        let one = build_family(FamilyTag::Truncated { m: pres.order(v) })?;
        vertex_counts.push(total_points(&one, &[dims[v.0]], q, cap)?);
    }
    let n = ambient_dim(pres, dims);
    Ok(ProductCheck {
        total,
        vertex_counts,
        arrow_factor: q.pow(n as u32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff_oracle::DEFAULT_POINT_CAP;
    use crate::quiver::parse_presentation;

    fn a(h: usize, m0: u32, m1: u32, n: usize) -> FamilyTag {
        FamilyTag::A { h, m0, m1, n }
    }

    fn relation_text(tag: FamilyTag) -> String {
        let p = build_family(tag).unwrap();
        p.relations()[0].display(p.quiver())
    }

    #[test]
    fn builds() {
        let p = build_family(a(1, 2, 2, 1)).unwrap();
        assert_eq!(p.relations().len(), 1);
        let expected = parse_presentation(
            "vertex 0\nvertex 1\nloop e0 0 order 2\nloop e1 1 order 2\narrow a1 1 -> 0\nrelation e0*a1 + a1*e1\n",
        )
        .unwrap();
        assert_eq!(p, expected);
        let p = build_family(a(2, 3, 3, 2)).unwrap();
        assert_eq!(p.quiver().proper_arrows().len(), 2);
        let r = p.relations()[0].combination();
        assert_eq!(r.len(), 3);
        let again = parse_presentation(&p.to_text()).unwrap();
        let want = parse_presentation(
            &p.to_text().replace(&relation_text(a(2, 3, 3, 2)), "e0^2*a1 + e0*a1*e1 + a1*e1^2"),
        )
        .unwrap();
        assert_eq!(again.relations(), want.relations());
        let p = build_family(FamilyTag::APrime { h: 0, m0: 3, m1: 2 }).unwrap();
        assert_eq!(p.quiver().proper_arrows().len(), 0);
        assert!(p.relations().is_empty());
    }

    #[test]
    fn out_of_range() {
        assert!(build_family(a(1, 1, 2, 1)).is_err());
        assert!(build_family(a(0, 2, 2, 1)).is_err());
        assert!(matches!(build_family(a(1, 2, 2, 3)), Err(FamilyError::VanishingRelation(_))));
        assert!(build_family(FamilyTag::Truncated { m: 0 }).is_err());
    }

    #[test]
    fn tags_parse_and_print() {
        for s in ["A(1,2,2,1)", "A'(1,2,2)", "K[X]/(X^4)"] {
            assert_eq!(s.parse::<FamilyTag>().unwrap().to_string(), s);
        }
        assert!("B(1)".parse::<FamilyTag>().is_err());
        assert!("A(1,2)".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn recognizes_round_trip() {
        let t = a(1, 3, 3, 2);
        assert_eq!(recognize_family(&build_family(t).unwrap()).unwrap(), t);
        let p = parse_presentation("vertex 0\nloop x 0 order 4\n").unwrap();
        assert_eq!(recognize_family(&p).unwrap(), FamilyTag::Truncated { m: 4 });
        let t = a(1, 4, 4, 2);
        assert_eq!(recognize_family(&build_family(t).unwrap()).unwrap(), t);
        assert!(!t.is_known_irreducible());
        assert!(a(2, 4, 4, 3).is_known_irreducible());
    }

    #[test]
    fn recognizes_modulo_changes() {
        // reversed vertex names, rescaled relation, arrow change b <- b + f*c
        // and the second loop rescaled by 2
        let p = parse_presentation(
            "vertex x\nvertex y\nloop f y order 3\nloop g x order 3\narrow b x -> y\narrow c x -> y\n\
             relation 3*f^2*b + 6*f*b*g + 6*f^2*c*g + 12*b*g^2 + 12*f*c*g^2\n",
        )
        .unwrap();
        assert_eq!(recognize_family(&p).unwrap(), a(2, 3, 3, 2));
        let p = parse_presentation(
            "vertex 0\nvertex 1\nloop e0 0 order 3\nloop e1 1 order 3\narrow a1 1 -> 0\n\
             relation e0^2*a1 + e0*a1*e1 + 2*a1*e1^2\n",
        )
        .unwrap();
        assert_eq!(recognize_family(&p).unwrap(), FamilyTag::Unrecognized);
        let three = parse_presentation("vertex 0\nvertex 1\nvertex 2\n").unwrap();
        assert!(matches!(recognize_family(&three), Err(FamilyError::TooManyVertices(3))));
    }

    #[test]
    fn product_counts() {
        let p = build_family(FamilyTag::APrime { h: 1, m0: 2, m1: 2 }).unwrap();
        let c = product_decomposition_check(&p, &[1, 1], 2, DEFAULT_POINT_CAP).unwrap();
        assert_eq!((c.vertex_counts.clone(), c.arrow_factor, c.total), (vec![1, 1], 2, 2));
        assert!(c.holds());
        let p = build_family(FamilyTag::APrime { h: 2, m0: 2, m1: 2 }).unwrap();
        let c = product_decomposition_check(&p, &[1, 1], 2, DEFAULT_POINT_CAP).unwrap();
        assert_eq!((c.arrow_factor, c.total), (4, 4));
        let p = build_family(a(1, 2, 2, 1)).unwrap();
        assert!(matches!(
            product_decomposition_check(&p, &[1, 1], 2, DEFAULT_POINT_CAP),
            Err(FamilyError::HasRelations)
        ));
    }
}
