//! Residue arithmetic over small prime fields.

use crate::linalg::rank::{fp_rank_residues, is_prime, mod_inverse, reduce_mod};
use crate::linalg::Rat;

/// Primes accepted by the oracle.
pub fn is_small_prime(q: u64) -> bool {
    q < (1 << 16) && is_prime(q)
}

/// Image of an exact rational in `F_q`, `None` if the denominator vanishes.
pub fn rat_mod(r: &Rat, q: u64) -> Option<u64> {
    let den = reduce_mod(r.denom(), q);
    if den == 0 {
        return None;
    }
    Some(reduce_mod(r.numer(), q) * mod_inverse(den, q) % q)
}

/// Dense matrix over `F_q`, entries kept reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FFMatrix {
    rows: usize,
    cols: usize,
    q: u64,
    data: Vec<u64>,
}

impl FFMatrix {
    pub fn zeros(rows: usize, cols: usize, q: u64) -> Self {
        FFMatrix {
            rows,
            cols,
            q,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, q: u64) -> Self {
        let mut m = Self::zeros(n, n, q);
        for i in 0..n {
            m.data[i * n + i] = 1 % q;
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, q: u64, entries: &[u64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        FFMatrix {
            rows,
            cols,
            q,
            data: entries.iter().map(|e| e % q).collect(),
        }
    }

    /// Entries are the base-`q` digits of `code`, least significant first,
    /// in row-major order.
    pub fn from_code(rows: usize, cols: usize, q: u64, mut code: u64) -> Self {
        let mut m = Self::zeros(rows, cols, q);
        for slot in m.data.iter_mut() {
            *slot = code % q;
            code /= q;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.q;
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &FFMatrix) -> FFMatrix {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.q, other.q);
        let q = self.q;
        let mut out = Self::zeros(self.rows, other.cols, q);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = (out.data[idx] + a * other.get(k, j)) % q;
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, k: u64, other: &FFMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let q = self.q;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = (*a + k % q * b) % q;
        }
    }

    pub fn pow(&self, k: usize) -> FFMatrix {
        assert_eq!(self.rows, self.cols);
        let mut out = Self::identity(self.rows, self.q);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<u64>> = self.data.chunks(self.cols.max(1)).map(<[u64]>::to_vec).collect();
        if self.cols == 0 {
            return 0;
        }
        fp_rank_residues(rows, self.q)
    }

    /// Inverse by Gauss-Jordan, `None` if singular.
    pub fn inverse(&self) -> Option<FFMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let q = self.q;
        let mut a = self.clone();
        let mut inv = Self::identity(n, q);
        for c in 0..n {
            let pr = (c..n).find(|&r| a.get(r, c) != 0)?;
            for j in 0..n {
                a.data.swap(c * n + j, pr * n + j);
                inv.data.swap(c * n + j, pr * n + j);
            }
            let s = mod_inverse(a.get(c, c), q);
            for j in 0..n {
                a.data[c * n + j] = a.data[c * n + j] * s % q;
                inv.data[c * n + j] = inv.data[c * n + j] * s % q;
            }
            for r in 0..n {
                let f = a.get(r, c);
                if r == c || f == 0 {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] = (a.data[r * n + j] + (q - f) * a.data[c * n + j]) % q;
                    inv.data[r * n + j] =
                        (inv.data[r * n + j] + (q - f) * inv.data[c * n + j]) % q;
                }
            }
        }
        Some(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    #[test]
    fn residues() {
        assert_eq!(rat_mod(&ratio(1, 2), 3), Some(2));
        assert_eq!(rat_mod(&ratio(-1, 1), 5), Some(4));
        assert_eq!(rat_mod(&ratio(1, 3), 3), None);
        assert!(is_small_prime(65521));
        assert!(!is_small_prime(4));
        assert!(!is_small_prime(65537));
    }

    #[test]
    fn products_and_rank() {
        let j = FFMatrix::from_entries(2, 2, 3, &[0, 1, 0, 0]);
        assert!(j.pow(2).is_zero());
        assert_eq!(j.rank(), 1);
        let a = FFMatrix::from_entries(2, 2, 3, &[1, 2, 2, 1]);
        // det = 1 - 4 = 0 mod 3
        assert_eq!(a.rank(), 1);
        assert!(a.inverse().is_none());
        let b = FFMatrix::from_entries(2, 2, 5, &[1, 2, 3, 4]);
        let bi = b.inverse().unwrap();
        assert_eq!(b.mul(&bi), FFMatrix::identity(2, 5));
    }

    #[test]
    fn codes_cover_all_matrices() {
        let all: std::collections::HashSet<_> =
            (0..16).map(|c| FFMatrix::from_code(2, 2, 2, c)).collect();
        assert_eq!(all.len(), 16);
        assert_eq!(FFMatrix::from_code(1, 3, 3, 5).entries(), &[2, 1, 0]);
    }
}
