use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::RatMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    /// A denominator vanishes modulo the chosen prime, so the matrix has no
    /// image over that field.
    #[error("denominator {denominator} is not invertible modulo {prime}")]
    BadPrime { prime: u64, denominator: String },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("unknown rank engine `{0}`")]
    UnknownEngine(String),
}

/// A way of computing the rank of an exact rational matrix.
pub trait RankEngine: Send + Sync {
    fn name(&self) -> &str;
    fn rank(&self, m: &RatMatrix) -> Result<usize, RankError>;
}

/// Fraction-free elimination over the integers after clearing row
/// denominators. Full pivoting; the pivot is the first entry of maximal
/// absolute value in row-major order.
#[derive(Debug, Default, Clone, Copy)]
pub struct BareissRank;

impl RankEngine for BareissRank {
    fn name(&self) -> &str {
        "bareiss"
    }

    fn rank(&self, m: &RatMatrix) -> Result<usize, RankError> {
        Ok(bareiss_rank(m))
    }
}

/// Gaussian elimination over the prime field `F_p`.
#[derive(Debug, Clone)]
pub struct PrimeFieldRank {
    prime: u64,
    name: String,
}

impl PrimeFieldRank {
    pub fn new(prime: u64) -> Result<Self, RankError> {
        if !is_prime(prime) || prime >= 1 << 31 {
            return Err(RankError::NotPrime(prime));
        }
        Ok(Self {
            prime,
            name: format!("fp:{prime}"),
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }
}

impl RankEngine for PrimeFieldRank {
    fn name(&self) -> &str {
        &self.name
    }

    fn rank(&self, m: &RatMatrix) -> Result<usize, RankError> {
        fp_rank(m, self.prime)
    }
}

/// Named collection of rank engines, selectable at runtime.
pub struct RankRegistry {
    engines: Vec<Box<dyn RankEngine>>,
}

impl RankRegistry {
    pub fn empty() -> Self {
        Self {
            engines: Vec::new(),
        }
    }

    /// `bareiss`, `fp:101` and `fp:997`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(BareissRank));
        for p in [101, 997] {
            r.register(Box::new(PrimeFieldRank::new(p).expect("prime")));
        }
        r
    }

    pub fn register(&mut self, engine: Box<dyn RankEngine>) {
        self.engines.retain(|e| e.name() != engine.name());
        self.engines.push(engine);
    }

    pub fn names(&self) -> Vec<&str> {
        self.engines.iter().map(|e| e.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn RankEngine> {
        self.engines
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
    }

    /// Like [`get`](Self::get), but also builds `fp:<prime>` engines on demand.
    pub fn resolve(&self, name: &str) -> Result<Box<dyn RankEngine>, RankError> {
        if name == "bareiss" {
            return Ok(Box::new(BareissRank));
        }
        if let Some(p) = name.strip_prefix("fp:") {
            let p: u64 = p
                .parse()
                .map_err(|_| RankError::UnknownEngine(name.to_string()))?;
            return Ok(Box::new(PrimeFieldRank::new(p)?));
        }
        Err(RankError::UnknownEngine(name.to_string()))
    }
}

impl Default for RankRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Clears denominators row by row and removes the content of each row.
/// Zero rows and zero columns are dropped since they do not affect rank.
fn integer_rows(m: &RatMatrix) -> Vec<Vec<BigInt>> {
    let live_cols: Vec<usize> = (0..m.cols())
        .filter(|&c| (0..m.rows()).any(|r| !m.get(r, c).is_zero()))
        .collect();
    let mut out = Vec::new();
    for r in 0..m.rows() {
        let row = m.row(r);
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        let lcm = live_cols
            .iter()
            .fold(<BigInt as One>::one(), |acc, &c| acc.lcm(row[c].denom()));
        let mut ints: Vec<BigInt> = live_cols
            .iter()
            .map(|&c| row[c].numer() * (&lcm / row[c].denom()))
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if !g.is_one() {
            for x in &mut ints {
                *x /= &g;
            }
        }
        out.push(ints);
    }
    out
}

trait EliminationScalar: Clone {
    fn is_zero(&self) -> bool;
    fn abs_gt(&self, other: &Self) -> bool;
    /// `(a * p - b * c) / prev`, `None` on overflow.
    fn bareiss_step(a: &Self, p: &Self, b: &Self, c: &Self, prev: &Self) -> Option<Self>;
    fn one() -> Self;
}

impl EliminationScalar for i128 {
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn abs_gt(&self, other: &Self) -> bool {
        self.unsigned_abs() > other.unsigned_abs()
    }
    fn bareiss_step(a: &Self, p: &Self, b: &Self, c: &Self, prev: &Self) -> Option<Self> {
        let x = a.checked_mul(*p)?;
        let y = b.checked_mul(*c)?;
        Some(x.checked_sub(y)? / prev)
    }
    fn one() -> Self {
        1
    }
}

impl EliminationScalar for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_gt(&self, other: &Self) -> bool {
        self.abs() > other.abs()
    }
    fn bareiss_step(a: &Self, p: &Self, b: &Self, c: &Self, prev: &Self) -> Option<Self> {
        Some((a * p - b * c) / prev)
    }
    fn one() -> Self {
        One::one()
    }
}

/// Returns `None` if an intermediate value overflowed the scalar type.
fn bareiss_generic<T: EliminationScalar>(mut a: Vec<Vec<T>>) -> Option<usize> {
    let rows = a.len();
    if rows == 0 {
        return Some(0);
    }
    let cols = a[0].len();
    let mut prev = T::one();
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if !v.abs_gt(&a[bi][bj]) => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(k, pi);
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
        }
        rank += 1;
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pivot = pivot_row[k].clone();
        for row in tail.iter_mut() {
            let lead = row[k].clone();
            for j in (k + 1)..cols {
                row[j] = T::bareiss_step(&row[j], &pivot, &lead, &pivot_row[j], &prev)?;
            }
            row[k] = T::bareiss_step(&row[k], &pivot, &lead, &pivot_row[k], &prev)?;
        }
        prev = pivot;
    }
    Some(rank)
}

/// Exact rank over the rationals. Runs on `i128` and restarts on arbitrary
/// precision integers if any intermediate minor overflows.
pub fn bareiss_rank(m: &RatMatrix) -> usize {
    let ints = integer_rows(m);
    let small: Option<Vec<Vec<i128>>> = ints
        .iter()
        .map(|row| row.iter().map(ToPrimitive::to_i128).collect())
        .collect();
    if let Some(small) = small {
        if let Some(r) = bareiss_generic(small) {
            return r;
        }
    }
    bareiss_generic(ints).expect("arbitrary precision never overflows")
}

pub(crate) fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

pub(crate) fn reduce_mod(x: &BigInt, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let r = x.mod_floor(&pb);
    r.to_u64().expect("residue fits")
}

/// Rank over `F_p` of the reduction of `m`. Fails if some denominator is
/// divisible by `p`.
pub fn fp_rank(m: &RatMatrix, p: u64) -> Result<usize, RankError> {
    let mut a = vec![vec![0u64; m.cols()]; m.rows()];
    for (r, row) in a.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            let v = m.get(r, c);
            if v.is_zero() {
                continue;
            }
            let den = reduce_mod(v.denom(), p);
            if den == 0 {
                return Err(RankError::BadPrime {
                    prime: p,
                    denominator: v.denom().to_string(),
                });
            }
            *slot = reduce_mod(v.numer(), p) * mod_inverse(den, p) % p;
        }
    }
    Ok(fp_rank_residues(a, p))
}

pub(crate) fn fp_rank_residues(mut a: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, pr);
        let inv = mod_inverse(a[rank][c], p);
        for j in c..cols {
            a[rank][j] = a[rank][j] * inv % p;
        }
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c];
                for j in c..cols {
                    a[r][j] = (a[r][j] + (p - f) * a[rank][j]) % p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}
