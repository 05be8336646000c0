//! Scalar arithmetic for boundary reduction over Q and F_p.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub trait Field {
    type E: Clone + std::fmt::Debug;
    fn zero(&self) -> Self::E;
    fn embed(&self, v: i64) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn div(&self, a: &Self::E, b: &Self::E) -> Self::E;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Rationals;

impl Field for Rationals {
    type E = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn embed(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn div(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a / b
    }
}

/// F_p with inverses tabulated for p < 2^16 and computed by Fermat's little
/// theorem otherwise.
#[derive(Debug, Clone)]
pub struct PrimeField {
    p: u64,
    inverses: Vec<u32>,
}

impl PrimeField {
    pub fn new(p: u32) -> Self {
        let p64 = p as u64;
        let inverses = if p < 1 << 16 {
            let mut inv = vec![0u32; p as usize];
            if p > 1 {
                inv[1] = 1;
                for a in 2..p64 {
                    // inv[a] = -(p / a) * inv[p mod a]
                    inv[a as usize] = ((p64 - (p64 / a) * inv[(p64 % a) as usize] as u64 % p64) % p64) as u32;
                }
            }
            inv
        } else {
            Vec::new()
        };
        Self { p: p64, inverses }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        b %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % self.p;
            }
            b = b * b % self.p;
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        if self.inverses.is_empty() {
            self.pow(a, self.p - 2)
        } else {
            self.inverses[a as usize] as u64
        }
    }
}

impl Field for PrimeField {
    type E = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn embed(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }

    fn div(&self, a: &u64, b: &u64) -> u64 {
        a * self.inv(*b) % self.p
    }
}

/// Rank over the field of the integer matrix with the given nonzero
/// `(row, column, value)` entries.
pub fn rank<F: Field>(f: &F, rows: usize, cols: usize, entries: &[(usize, usize, i64)]) -> usize {
    let mut m = vec![vec![f.zero(); cols]; rows];
    for &(r, c, v) in entries {
        m[r][c] = f.embed(v);
    }
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !f.is_zero(&m[r][c])) else { continue };
        m.swap(rank, p);
        for r in 0..rows {
            if r != rank && !f.is_zero(&m[r][c]) {
                let factor = f.div(&m[r][c], &m[rank][c]);
                let (pivot, row) = if r < rank {
                    let (a, b) = m.split_at_mut(rank);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = m.split_at_mut(r);
                    (&a[rank], &mut b[0])
                };
                for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x = f.sub(x, &f.mul(&factor, y));
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_inverses() {
        for p in [2u32, 3, 5, 7, 65521, 2147483647] {
            let f = PrimeField::new(p);
            for a in [1u64, 2, 3, (p as u64) - 1] {
                let a = a % p as u64;
                if a == 0 {
                    continue;
                }
                assert_eq!(a * f.inv(a) % p as u64, 1, "p = {p}, a = {a}");
            }
        }
    }

    #[test]
    fn rank_depends_on_characteristic() {
        let e = [(0, 0, 3), (0, 1, 0), (1, 0, 0), (1, 1, 6)];
        assert_eq!(rank(&Rationals, 2, 2, &e), 2);
        assert_eq!(rank(&PrimeField::new(3), 2, 2, &e), 0);
        assert_eq!(rank(&PrimeField::new(2), 2, 2, &e), 1);
    }
}
