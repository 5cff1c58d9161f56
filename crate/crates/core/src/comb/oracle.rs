//! Brute-force oracles that share no code path with the closed forms they
//! certify.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{binomial, factorial};

/// Number of partitions of `{1..n}` into exactly `k` non-empty blocks,
/// counted by walking every restricted growth string.
pub fn count_set_partitions(n: usize, k: usize) -> u64 {
    if n == 0 {
        return u64::from(k == 0);
    }
    fn walk(pos: usize, n: usize, blocks: usize, k: usize) -> u64 {
        if blocks > k || blocks + (n - pos) < k {
            return 0;
        }
        if pos == n {
            return u64::from(blocks == k);
        }
        // element `pos` joins an existing block or opens a new one
        let mut total = 0;
        for _ in 0..blocks {
            total += walk(pos + 1, n, blocks, k);
        }
        total + walk(pos + 1, n, blocks + 1, k)
    }
    walk(1, n, 1, k)
}

/// `B_{k,j}(1!, 2!, ...)` as `k! [t^k] (t/(1-t))^j / j!`, using truncated
/// power series with rational coefficients.
pub fn bell_factorial_series(k: usize, j: usize) -> BigInt {
    let geometric: Vec<BigRational> = (0..=k)
        .map(|i| {
            if i == 0 {
                BigRational::zero()
            } else {
                BigRational::one()
            }
        })
        .collect();
    let mut power = vec![BigRational::zero(); k + 1];
    power[0] = BigRational::one();
    for _ in 0..j {
        let mut next = vec![BigRational::zero(); k + 1];
        for (a, pa) in power.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, gb) in geometric.iter().enumerate().take(k + 1 - a) {
                next[a + b] += pa * gb;
            }
        }
        power = next;
    }
    let value = &power[k] * BigRational::from_integer(factorial(k)) / BigRational::from_integer(factorial(j));
    assert!(value.is_integer(), "Bell value must be integral");
    value.to_integer()
}

/// `B_{n,k}` from the standard recurrence
/// `B_{n,k} = sum_i C(n-1, i-1) x_i B_{n-i,k-1}` at `x_i = i!`.
pub fn bell_factorial_recurrence(n: usize, k: usize) -> BigInt {
    let mut table = vec![vec![BigInt::zero(); k + 1]; n + 1];
    table[0][0] = BigInt::one();
    for nn in 1..=n {
        for kk in 1..=k.min(nn) {
            let mut acc = BigInt::zero();
            for i in 1..=(nn - kk + 1) {
                acc += binomial(nn as i64 - 1, i as i64 - 1) * factorial(i) * &table[nn - i][kk - 1];
            }
            table[nn][kk] = acc;
        }
    }
    table[n][k].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_small() {
        assert_eq!(count_set_partitions(0, 0), 1);
        assert_eq!(count_set_partitions(4, 2), 7);
        assert_eq!(count_set_partitions(6, 3), 90);
        assert_eq!(count_set_partitions(3, 0), 0);
        // Bell number B_5 = 52
        assert_eq!((0..=5).map(|k| count_set_partitions(5, k)).sum::<u64>(), 52);
    }

    #[test]
    fn bell_oracles_agree_on_known_values() {
        // B_{3,2}(x1, x2) = 3 x1 x2 at x1 = 1, x2 = 2
        assert_eq!(bell_factorial_series(3, 2), BigInt::from(6));
        assert_eq!(bell_factorial_recurrence(3, 2), BigInt::from(6));
        assert_eq!(bell_factorial_series(5, 2), BigInt::from(240));
        assert_eq!(bell_factorial_recurrence(5, 2), BigInt::from(240));
    }
}
