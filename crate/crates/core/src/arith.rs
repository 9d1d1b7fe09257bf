//! Exact elementary arithmetic: factorization by trial division, the Möbius
//! and Euler functions, Ramanujan sums, and Dirichlet convolution on finite
//! tables of rationals.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{domain, Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_u(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical `p/q` rendering: lowest terms, sign on the numerator, the
/// denominator always written (integers come out as `p/1`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`, with an optional sign. No decimals.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let parse_int = |t: &str| -> Option<BigInt> {
        let digits = t.strip_prefix('+').unwrap_or(t);
        let body = digits.strip_prefix('-').unwrap_or(digits);
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()
    };
    let num = parse_int(num)?;
    let den = parse_int(den)?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

const PRIME_CACHE_LIMIT: u64 = 1 << 16;

fn sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn cached_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(PRIME_CACHE_LIMIT))
}

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit <= PRIME_CACHE_LIMIT {
        let cache = cached_primes();
        let end = cache.partition_point(|&p| p <= limit);
        cache[..end].to_vec()
    } else {
        sieve(limit)
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n).factors() == [(n, 1)]
}

/// A positive integer with its prime factorization, primes ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredInteger {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn mobius(&self) -> i64 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.factors.last().map(|&(p, _)| p)
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Trial division against the cached prime list, continuing with odd
/// candidates past the cache.
///
/// Panics if `n == 0`.
pub fn factor(n: u64) -> FactoredInteger {
    assert!(n >= 1, "factor: n must be positive");
    let mut m = n;
    let mut factors = Vec::new();
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    for &p in cached_primes() {
        if p * p > m {
            break;
        }
        push(p, &mut m);
    }
    let mut p = PRIME_CACHE_LIMIT + 1;
    while p.saturating_mul(p) <= m {
        push(p, &mut m);
        p += 2;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    FactoredInteger { n, factors }
}

pub fn mobius(n: u64) -> i64 {
    factor(n).mobius()
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n).phi()
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> u32 {
    factor(n).omega()
}

pub fn divisors(n: u64) -> Vec<u64> {
    factor(n).divisors()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// `lcm(1, ..., q)`, or `None` on overflow.
pub fn lcm_up_to(q: u64) -> Option<u64> {
    let mut acc = 1u64;
    for k in 2..=q {
        let g = acc.gcd(&k);
        acc = acc.checked_mul(k / g)?;
    }
    Some(acc)
}

/// Ramanujan sum `c_q(n) = sum_{d | (q, n)} d * mu(q / d)`, with `(q, 0) = q`.
///
/// Evaluated through the multiplicative local factors of `q`:
/// `c_{p^a}(n)` is `phi(p^a)` if `p^a | n`, `-p^(a-1)` if only `p^(a-1) | n`,
/// and `0` otherwise.
///
/// Panics if `q == 0`; see [`try_ramanujan_sum`].
pub fn ramanujan_sum(q: u64, n: i64) -> i64 {
    ramanujan_sum_factored(&factor(q), n)
}

pub fn try_ramanujan_sum(q: u64, n: i64) -> Result<i64> {
    if q == 0 {
        return Err(domain("Ramanujan sum modulus must be positive"));
    }
    Ok(ramanujan_sum(q, n))
}

pub fn ramanujan_sum_factored(q: &FactoredInteger, n: i64) -> i64 {
    let r = n.rem_euclid(q.n() as i64) as u64;
    let mut value = 1i64;
    for &(p, a) in q.factors() {
        let pa1 = p.pow(a - 1);
        let pa = pa1 * p;
        let local = if r % pa == 0 {
            (pa - pa1) as i64
        } else if r % pa1 == 0 {
            -(pa1 as i64)
        } else {
            return 0;
        };
        value *= local;
    }
    value
}

/// `c_q(0), c_q(1), ..., c_q(q - 1)`: one full period.
pub fn ramanujan_row(q: u64) -> Vec<i64> {
    let fq = factor(q);
    (0..q as i64).map(|n| ramanujan_sum_factored(&fq, n)).collect()
}

/// Values of an arithmetic function on `[1, X]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    values: Vec<Rational>,
}

impl FunctionTable {
    /// `values[0]` is the value at `n = 1`.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("function table needs at least one entry"));
        }
        Ok(Self { values })
    }

    pub fn from_fn(bound: u64, mut f: impl FnMut(u64) -> Rational) -> Self {
        assert!(bound >= 1, "function table bound must be positive");
        Self {
            values: (1..=bound).map(&mut f).collect(),
        }
    }

    pub fn bound(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn get(&self, n: u64) -> Option<&Rational> {
        if n == 0 {
            return None;
        }
        self.values.get(n as usize - 1)
    }

    pub fn value(&self, n: u64) -> Result<&Rational> {
        self.get(n).ok_or(Error::OutOfRange {
            n,
            bound: self.bound(),
        })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.values.iter().enumerate().map(|(i, v)| (i as u64 + 1, v))
    }

    pub fn max_abs(&self) -> Rational {
        self.values
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// `F' = F * mu` on the same window.
pub fn eratosthenes_transform(table: &FunctionTable) -> FunctionTable {
    let x = table.bound();
    let mu: Vec<i64> = (1..=x).map(mobius).collect();
    let mut out = vec![Rational::zero(); x as usize];
    for (t, ft) in table.iter() {
        if ft.is_zero() {
            continue;
        }
        for k in 1..=x / t {
            match mu[k as usize - 1] {
                0 => {}
                1 => out[(t * k) as usize - 1] += ft,
                _ => out[(t * k) as usize - 1] -= ft,
            }
        }
    }
    FunctionTable { values: out }
}

/// `F(n) = sum_{d | n} F'(d)` on the same window.
pub fn inverse_transform(transform: &FunctionTable) -> FunctionTable {
    let x = transform.bound();
    let mut out = vec![Rational::zero(); x as usize];
    for (d, fd) in transform.iter() {
        if fd.is_zero() {
            continue;
        }
        let mut m = d;
        while m <= x {
            out[m as usize - 1] += fd;
            m += d;
        }
    }
    FunctionTable { values: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn trial_factor(mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut p = 2;
        while n > 1 {
            while n % p == 0 {
                out.push(p);
                n /= p;
            }
            p += 1;
        }
        out
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(30), -1);
    }

    #[test]
    fn phi_matches_gcd_count() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(3), 2);
        assert_eq!(euler_phi(12), 4);
        for n in 1..=300u64 {
            let count = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
            assert_eq!(euler_phi(n), count, "n = {n}");
        }
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(1), 0);
        assert_eq!(omega(12), 2);
        assert_eq!(omega(30), 3);
    }

    #[test]
    fn factorization_agrees_with_naive_trial() {
        for n in 1..=2000u64 {
            let f = factor(n);
            let flat: Vec<u64> = f
                .factors()
                .iter()
                .flat_map(|&(p, e)| std::iter::repeat(p).take(e as usize))
                .collect();
            assert_eq!(flat, trial_factor(n));
            let prod: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
        }
        // past the prime cache
        let big = 4_294_967_311u64 * 3;
        assert_eq!(factor(big).factors(), &[(3, 1), (4_294_967_311, 1)]);
        assert_eq!(factor(999_999_937).factors(), &[(999_999_937, 1)]);
    }

    #[test]
    fn divisors_examples() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(97), vec![1, 97]);
        for n in 1..=500u64 {
            let naive: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
            assert_eq!(divisors(n), naive);
        }
    }

    #[test]
    fn mobius_sums_to_delta() {
        for n in 1..=10_000u64 {
            let s: i64 = divisors(n).into_iter().map(mobius).sum();
            assert_eq!(s, i64::from(n == 1), "n = {n}");
        }
    }

    fn ramanujan_divisor_form(q: u64, n: i64) -> i64 {
        let r = n.rem_euclid(q as i64) as u64;
        let g = if r == 0 { q } else { gcd(q, r) };
        divisors(g)
            .into_iter()
            .map(|d| d as i64 * mobius(q / d))
            .sum()
    }

    #[test]
    fn ramanujan_sum_examples() {
        for n in -5..20 {
            assert_eq!(ramanujan_sum(1, n), 1);
        }
        assert_eq!(ramanujan_sum(3, 3), 2);
        assert_eq!(ramanujan_sum(4, 2), -2);
        assert_eq!(ramanujan_sum(12, 0), 4);
        assert!(try_ramanujan_sum(0, 1).is_err());
    }

    #[test]
    fn ramanujan_local_factors_match_divisor_sum() {
        for q in 1..=200u64 {
            for n in -50..=250i64 {
                assert_eq!(ramanujan_sum(q, n), ramanujan_divisor_form(q, n), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn ramanujan_row_is_one_period() {
        for q in 1..=40u64 {
            let row = ramanujan_row(q);
            for n in 0..(3 * q as i64) {
                assert_eq!(row[(n as u64 % q) as usize], ramanujan_sum(q, n));
            }
        }
    }

    #[test]
    fn transform_examples() {
        let ones = FunctionTable::from_fn(50, |_| rat(1));
        let t = eratosthenes_transform(&ones);
        for (n, v) in t.iter() {
            assert_eq!(*v, rat(i64::from(n == 1)));
        }

        let id = FunctionTable::from_fn(100, rat_u);
        let t = eratosthenes_transform(&id);
        for (n, v) in t.iter() {
            assert_eq!(*v, rat_u(euler_phi(n)));
        }

        for q0 in 1..=30u64 {
            let c = FunctionTable::from_fn(120, |n| rat(ramanujan_sum(q0, n as i64)));
            let t = eratosthenes_transform(&c);
            for (d, v) in t.iter() {
                let expected = if q0 % d == 0 {
                    d as i64 * mobius(q0 / d)
                } else {
                    0
                };
                assert_eq!(*v, rat(expected), "q0={q0} d={d}");
            }
        }
    }

    #[test]
    fn inverse_transform_examples() {
        let delta = FunctionTable::from_fn(40, |n| rat(i64::from(n == 1)));
        assert!(inverse_transform(&delta).values().iter().all(|v| v.is_one()));

        let phi = FunctionTable::from_fn(100, |n| rat_u(euler_phi(n)));
        for (n, v) in inverse_transform(&phi).iter() {
            assert_eq!(*v, rat_u(n));
        }

        let mu = FunctionTable::from_fn(100, |n| rat(mobius(n)));
        for (n, v) in inverse_transform(&mu).iter() {
            assert_eq!(*v, rat(i64::from(n == 1)));
        }
    }

    #[test]
    fn table_rejects_index_zero() {
        let t = FunctionTable::from_fn(3, rat_u);
        assert!(t.get(0).is_none());
        assert!(t.value(4).is_err());
        assert!(FunctionTable::new(Vec::new()).is_err());
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(parse_rational("-2/5"), Some(ratio(-2, 5)));
        assert_eq!(parse_rational("+4/2"), Some(rat(2)));
        assert_eq!(parse_rational("7"), Some(rat(7)));
        assert_eq!(parse_rational("1.5"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1/-2"), Some(ratio(-1, 2)));
        assert_eq!(format_rational(&ratio(6, -4)), "-3/2");
        assert_eq!(format_rational(&rat(2)), "2/1");
    }
}
