//! Bounded partitions, nilpotent Jordan matrices and orbit dimensions for
//! modules over truncated polynomial algebras.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::ff_oracle::field::{is_small_prime, FFMatrix};
use crate::linalg::{bareiss_rank, Rat, RatMatrix};

/// Largest weight accepted by [`commutant_dim_oracle`].
pub const COMMUTANT_MAX_WEIGHT: usize = 12;
/// Largest `q^(d*d)` enumerated by [`orbit_count_ff`].
pub const ORBIT_COUNT_CAP: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("parts must be positive and weakly decreasing: {0:?}")]
    NotMonotone(Vec<usize>),
    #[error("cannot parse partition {0:?}")]
    Syntax(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("{0} is not a prime below 2^16")]
    NotPrime(u64),
}

/// Weakly decreasing sequence of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self, PartitionError> {
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(PartitionError::NotMonotone(parts));
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn single(p: usize) -> Self {
        assert!(p > 0);
        Partition(vec![p])
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest part, 0 for the empty partition.
    pub fn largest(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        let top = self.largest();
        Partition(
            (1..=top)
                .map(|k| self.0.iter().filter(|&&p| p >= k).count())
                .collect(),
        )
    }

    /// Dominance order on partitions of equal weight.
    pub fn dominates(&self, other: &Partition) -> bool {
        if self.weight() != other.weight() {
            return false;
        }
        let (mut a, mut b) = (0, 0);
        for i in 0..self.len().max(other.len()) {
            a += self.0.get(i).copied().unwrap_or(0);
            b += other.0.get(i).copied().unwrap_or(0);
            if a < b {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

impl FromStr for Partition {
    type Err = PartitionError;

    /// `2,2,1`; `-` or the empty string is the empty partition.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.is_empty() || s == "-" {
            return Ok(Partition::empty());
        }
        let parts: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse()).collect();
        Partition::new(parts.map_err(|_| PartitionError::Syntax(s.to_string()))?)
    }
}

/// Jordan type of the loop at every vertex, indexed by vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JordanAssignment(pub Vec<Partition>);

impl JordanAssignment {
    pub fn parts(&self) -> &[Partition] {
        &self.0
    }

    pub fn dims(&self) -> Vec<usize> {
        self.0.iter().map(Partition::weight).collect()
    }
}

impl fmt::Display for JordanAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join(";"))
    }
}

impl FromStr for JordanAssignment {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(';')
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(JordanAssignment)
    }
}

/// All partitions of `d` with parts at most `m`, reverse-lexicographic, so the
/// maximal partition comes first.
pub fn partitions_bounded(d: usize, m: usize) -> Vec<Partition> {
    assert!(m >= 1);
    fn go(rest: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=cap.min(rest)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, m, &mut Vec::new(), &mut out);
    out
}

/// `(m, ..., m, r)` with `0 < r <= m`.
pub fn maximal_partition(d: usize, m: usize) -> Partition {
    assert!(m >= 1);
    let mut parts = vec![m; d / m];
    if !d.is_multiple_of(m) {
        parts.push(d % m);
    }
    Partition(parts)
}

pub fn is_maximal(p: &Partition, m: usize) -> bool {
    *p == maximal_partition(p.weight(), m)
}

/// Block-diagonal nilpotent matrix with ones on each block's superdiagonal.
pub fn jordan_matrix(p: &Partition) -> RatMatrix {
    let d = p.weight();
    let mut j = RatMatrix::zeros(d, d);
    let mut start = 0;
    for &b in p.parts() {
        for i in start..start + b - 1 {
            j.set(i, i + 1, Rat::one());
        }
        start += b;
    }
    j
}

pub fn hom_dim(p: usize, q: usize) -> usize {
    p.min(q)
}

pub fn end_dim(p: &Partition) -> usize {
    let parts = p.parts();
    parts
        .iter()
        .map(|&a| parts.iter().map(|&b| hom_dim(a, b)).sum::<usize>())
        .sum()
}

/// Dimension of the conjugacy orbit of `jordan_matrix(p)`.
pub fn orbit_dim(p: &Partition) -> usize {
    let d = p.weight();
    d * d - end_dim(p)
}

/// Dimension of the commutant of `J_p`, as the nullity of `X -> XJ - JX`.
pub fn commutant_dim_oracle(p: &Partition) -> Result<usize, PartitionError> {
    let d = p.weight();
    if d > COMMUTANT_MAX_WEIGHT {
        return Err(PartitionError::CapExceeded(format!(
            "weight {d} > {COMMUTANT_MAX_WEIGHT}"
        )));
    }
    let j = jordan_matrix(p);
    // unknown X[a][b] sits in column a*d + b; equation (r, c) of XJ - JX
    let sys = RatMatrix::from_fn(d * d, d * d, |row, col| {
        let (r, c) = (row / d, row % d);
        let (a, b) = (col / d, col % d);
        let mut v = Rat::from_integer(0.into());
        if a == r {
            v += j.get(b, c);
        }
        if b == c {
            v -= j.get(r, a);
        }
        v
    });
    Ok(d * d - bareiss_rank(&sys))
}

/// Jordan type of a nilpotent `d x d` matrix from `ranks[k] = rank X^k`,
/// `ranks[0] = d`, continued until it reaches 0.
pub fn jordan_type_from_ranks(ranks: &[usize]) -> Partition {
    // r_{k-1} - r_k blocks have size >= k; that is the conjugate partition
    let conj: Vec<usize> = ranks
        .windows(2)
        .map(|w| w[0] - w[1])
        .filter(|&n| n > 0)
        .collect();
    Partition(conj).conjugate()
}

/// Jordan type of a nilpotent matrix over a prime field, `None` if it is not
/// nilpotent.
pub fn classify_nilpotent(x: &FFMatrix) -> Option<Partition> {
    let d = x.rows();
    if d == 0 {
        return Some(Partition::empty());
    }
    let mut ranks = vec![d];
    let mut power = FFMatrix::identity(d, x.modulus());
    for _ in 0..d {
        power = power.mul(x);
        let r = power.rank();
        ranks.push(r);
        if r == 0 {
            return Some(jordan_type_from_ranks(&ranks));
        }
    }
    None
}

type OrbitTable = BTreeMap<Partition, u64>;

fn orbit_cache() -> &'static Mutex<BTreeMap<(usize, u64), OrbitTable>> {
    static CACHE: OnceLock<Mutex<BTreeMap<(usize, u64), OrbitTable>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Number of `d x d` matrices over `F_q` per nilpotent Jordan type, by
/// enumeration of all matrices.
pub fn nilpotent_orbit_counts(d: usize, q: u64) -> Result<OrbitTable, PartitionError> {
    if !is_small_prime(q) {
        return Err(PartitionError::NotPrime(q));
    }
    let space = (q as f64).powi((d * d) as i32);
    if space > ORBIT_COUNT_CAP as f64 {
        return Err(PartitionError::CapExceeded(format!(
            "{q}^{} matrices > {ORBIT_COUNT_CAP}",
            d * d
        )));
    }
    if let Some(t) = orbit_cache().lock().unwrap().get(&(d, q)) {
        return Ok(t.clone());
    }
    let total = q.pow((d * d) as u32);
    let table = (0..total)
        .into_par_iter()
        .fold(OrbitTable::new, |mut acc, code| {
            let x = FFMatrix::from_code(d, d, q, code);
            if let Some(p) = classify_nilpotent(&x) {
                *acc.entry(p).or_insert(0) += 1;
            }
            acc
        })
        .reduce(OrbitTable::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    orbit_cache()
        .lock()
        .unwrap()
        .insert((d, q), table.clone());
    Ok(table)
}

/// Number of matrices over `F_q` similar to `J_p`.
pub fn orbit_count_ff(p: &Partition, q: u64) -> Result<u64, PartitionError> {
    let table = nilpotent_orbit_counts(p.weight(), q)?;
    Ok(table.get(p).copied().unwrap_or(0))
}
