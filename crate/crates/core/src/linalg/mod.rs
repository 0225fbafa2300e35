//! Dense exact-rational matrices and rank engines.

mod matrix;
pub(crate) mod rank;

pub use matrix::RatMatrix;
pub use rank::{
    bareiss_rank, fp_rank, BareissRank, PrimeFieldRank, RankEngine, RankError, RankRegistry,
};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar used throughout the engine.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `n` or `n/d` (optionally signed) into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    Some(Rat::new(n, d))
}

/// `num/den` formatting used by the plain-text matrix dump.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
