//! Arithmetic and linear algebra over the prime field F_p.
//!
//! Residues are stored as `u32` in `0..p`. Primes in this crate are small
//! (portrait labels are stored as `u8`), so all products fit comfortably.

/// Returns true when `n` is prime.
pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub fn add(x: u32, y: u32, p: u32) -> u32 {
    (x + y) % p
}

#[inline]
pub fn sub(x: u32, y: u32, p: u32) -> u32 {
    (x + p - y % p) % p
}

#[inline]
pub fn mul(x: u32, y: u32, p: u32) -> u32 {
    ((x as u64 * y as u64) % p as u64) as u32
}

#[inline]
pub fn neg(x: u32, p: u32) -> u32 {
    (p - x % p) % p
}

/// Reduces a signed integer into `0..p`.
#[inline]
pub fn reduce(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

/// Multiplicative inverse of a nonzero residue.
pub fn inv(x: u32, p: u32) -> u32 {
    assert!(!x.is_multiple_of(p), "zero has no inverse mod {p}");
    // Fermat: x^(p-2)
    pow(x, p - 2, p)
}

pub fn pow(mut base: u32, mut exp: u32, p: u32) -> u32 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Row echelon data of a matrix over F_p.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rank: usize,
    /// For every input row, a combination of the input rows (coefficients
    /// indexed by input row) that reduces to zero. Only rows that became zero
    /// during elimination are reported, in input order.
    pub null_combinations: Vec<Vec<u32>>,
}

/// Gaussian elimination of `rows` (all of equal length) over F_p.
///
/// Rows are processed in order; a row that reduces to zero against the
/// earlier pivots yields a left null vector, which is recorded together with
/// the combination that produced it.
pub fn echelon(rows: &[Vec<u32>], p: u32) -> Echelon {
    let n = rows.len();
    // Each pivot row carries its tracking combination.
    let mut pivots: Vec<(usize, Vec<u32>, Vec<u32>)> = Vec::new();
    let mut null_combinations = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut v: Vec<u32> = row.iter().map(|x| x % p).collect();
        let mut comb = vec![0u32; n];
        comb[idx] = 1;
        for (col, prow, pcomb) in &pivots {
            let c = v[*col];
            if c != 0 {
                for (x, y) in v.iter_mut().zip(prow) {
                    *x = sub(*x, mul(c, *y, p), p);
                }
                for (x, y) in comb.iter_mut().zip(pcomb) {
                    *x = sub(*x, mul(c, *y, p), p);
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            Some(col) => {
                let s = inv(v[col], p);
                for x in v.iter_mut() {
                    *x = mul(*x, s, p);
                }
                for x in comb.iter_mut() {
                    *x = mul(*x, s, p);
                }
                // Keep earlier pivots reduced in this column as well, so that
                // later rows only need one pass.
                for (_, prow, pcomb) in pivots.iter_mut() {
                    let c = prow[col];
                    if c != 0 {
                        for (x, y) in prow.iter_mut().zip(&v) {
                            *x = sub(*x, mul(c, *y, p), p);
                        }
                        for (x, y) in pcomb.iter_mut().zip(&comb) {
                            *x = sub(*x, mul(c, *y, p), p);
                        }
                    }
                }
                pivots.push((col, v, comb));
            }
            None => null_combinations.push(comb),
        }
    }
    Echelon {
        rank: pivots.len(),
        null_combinations,
    }
}

pub fn rank(rows: &[Vec<u32>], p: u32) -> usize {
    echelon(rows, p).rank
}

pub fn is_independent(rows: &[Vec<u32>], p: u32) -> bool {
    rank(rows, p) == rows.len()
}
