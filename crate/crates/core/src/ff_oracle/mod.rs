//! Brute-force point counts over small prime fields. Used only to check the
//! rank engine, never by it.

mod enumerate;
pub mod field;

pub use enumerate::{
    dimension_estimate, enumerate_and_classify, identity_csv, total_points, verify_count_identity,
    DimensionEstimate, IdentityRow, OracleError, StratumCountTable, DEFAULT_POINT_CAP,
};
pub use field::{is_small_prime, rat_mod, FFMatrix};
