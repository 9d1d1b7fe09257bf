//! Smooth and sifted integers relative to a bound `Q`, their Euler products,
//! and Rankin-style tail bounds.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{primes_up_to, rat_u, ratio, Rational};
use crate::bounds::{pow_lower, pow_upper};
use crate::error::{domain, Error, Result};

/// Context fixing the smoothness bound `Q` and its prime set.
#[derive(Debug)]
pub struct SmoothContext {
    bound: u64,
    primes: Vec<u64>,
    totient_product: Rational,
    smooth_harmonic: Rational,
    euler_cache: Mutex<HashMap<Rational, Rational>>,
}

impl Clone for SmoothContext {
    fn clone(&self) -> Self {
        Self {
            bound: self.bound,
            primes: self.primes.clone(),
            totient_product: self.totient_product.clone(),
            smooth_harmonic: self.smooth_harmonic.clone(),
            euler_cache: Mutex::new(HashMap::new()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiftedCount {
    pub count: u64,
    pub main_term: Rational,
}

impl SmoothContext {
    pub fn new(bound: u64) -> Result<Self> {
        if bound < 2 {
            return Err(domain(format!("smoothness bound must be at least 2, got {bound}")));
        }
        let primes = primes_up_to(bound);
        let mut totient_product = Rational::one();
        for &p in &primes {
            totient_product *= ratio(p as i64 - 1, p as i64);
        }
        let smooth_harmonic = totient_product.recip();
        Ok(Self {
            bound,
            primes,
            totient_product,
            smooth_harmonic,
            euler_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn prime_count(&self) -> u32 {
        self.primes.len() as u32
    }

    /// `prod_{p<=Q} (1 - 1/p)`.
    pub fn totient_product(&self) -> &Rational {
        &self.totient_product
    }

    /// `sum_{t smooth} 1/t = prod_{p<=Q} (1 - 1/p)^-1`.
    pub fn smooth_harmonic(&self) -> &Rational {
        &self.smooth_harmonic
    }

    /// `2^pi(Q)` as a rational.
    pub fn squarefree_kernel_count(&self) -> Rational {
        Rational::from_integer(num_bigint::BigInt::one() << self.primes.len())
    }

    /// Product of the primes `<= Q`, if it fits.
    pub fn primorial(&self) -> Option<u64> {
        self.primes.iter().try_fold(1u64, |acc, &p| acc.checked_mul(p))
    }

    /// Splits `n = t * K` with `t` smooth and `K` sifted.
    pub fn split(&self, n: u64) -> (u64, u64) {
        assert!(n >= 1);
        let mut rest = n;
        for &p in &self.primes {
            while rest % p == 0 {
                rest /= p;
            }
        }
        (n / rest, rest)
    }

    pub fn smooth_part(&self, n: u64) -> u64 {
        self.split(n).0
    }

    pub fn is_smooth(&self, n: u64) -> bool {
        self.split(n).1 == 1
    }

    pub fn is_sifted(&self, n: u64) -> bool {
        assert!(n >= 1);
        self.primes.iter().all(|&p| n % p != 0)
    }

    /// Smooth integers in `[1, x]`, ascending, by merging products over
    /// nondecreasing prime indices.
    pub fn smooth_up_to(&self, x: u64) -> Vec<u64> {
        let mut out = Vec::new();
        if x == 0 {
            return out;
        }
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((1u64, 0usize)));
        while let Some(Reverse((v, i))) = heap.pop() {
            out.push(v);
            for (j, &p) in self.primes.iter().enumerate().skip(i) {
                match v.checked_mul(p) {
                    Some(w) if w <= x => heap.push(Reverse((w, j))),
                    _ => break,
                }
            }
        }
        out
    }

    /// Number of sifted integers in `[1, x]` by inclusion-exclusion over the
    /// squarefree divisors of the primorial.
    pub fn sifted_count(&self, x: u64) -> SiftedCount {
        fn walk(primes: &[u64], start: usize, d: u64, sign: i64, x: u64, acc: &mut i64) {
            *acc += sign * (x / d) as i64;
            for (j, &p) in primes.iter().enumerate().skip(start) {
                match d.checked_mul(p) {
                    Some(e) if e <= x => walk(primes, j + 1, e, -sign, x, acc),
                    _ => break,
                }
            }
        }
        let mut acc = 0i64;
        if x > 0 {
            walk(&self.primes, 0, 1, 1, x, &mut acc);
        }
        SiftedCount {
            count: acc as u64,
            main_term: &self.totient_product * rat_u(x),
        }
    }

    /// Exact `sum_{m smooth} m^s` for a negative integer `s`.
    pub fn smooth_power_series(&self, s: &Rational) -> Result<Rational> {
        if !s.is_negative() {
            return Err(domain("smooth power series diverges for s >= 0"));
        }
        if !s.is_integer() {
            return Err(domain("smooth power series is exact only for integer s"));
        }
        let k = s
            .to_integer()
            .abs()
            .to_u32()
            .ok_or_else(|| domain("exponent too large"))?;
        let mut acc = Rational::one();
        for &p in &self.primes {
            let pk = Rational::from_integer(num_bigint::BigInt::from(p).pow(k));
            acc *= &pk / (&pk - Rational::one());
        }
        Ok(acc)
    }

    /// Certified upper bound for `prod_{p<=Q} (1 - p^sigma)^-1`, `sigma < 0`.
    pub fn euler_product_upper(&self, sigma: &Rational) -> Result<Rational> {
        if !sigma.is_negative() {
            return Err(domain("Euler product needs a negative exponent"));
        }
        if let Some(v) = self.euler_cache.lock().unwrap().get(sigma) {
            return Ok(v.clone());
        }
        let mut acc = Rational::one();
        for &p in &self.primes {
            let up = pow_upper(&rat_u(p), sigma);
            let denom = Rational::one() - up;
            if !denom.is_positive() {
                return Err(domain("Euler factor bound is not positive"));
            }
            acc /= denom;
        }
        self.euler_cache
            .lock()
            .unwrap()
            .insert(sigma.clone(), acc.clone());
        Ok(acc)
    }

    /// Certified lower bound for the same product.
    pub fn euler_product_lower(&self, sigma: &Rational) -> Result<Rational> {
        if !sigma.is_negative() {
            return Err(domain("Euler product needs a negative exponent"));
        }
        let mut acc = Rational::one();
        for &p in &self.primes {
            acc /= Rational::one() - pow_lower(&rat_u(p), sigma);
        }
        Ok(acc)
    }

    /// `(lower, upper)` enclosing `sum_{t smooth, t<=x} t^exponent`.
    pub fn smooth_power_partial(&self, exponent: &Rational, x: u64) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for t in self.smooth_up_to(x) {
            let (l, h) = crate::bounds::pow_bounds(&rat_u(t), exponent);
            lo += l;
            hi += h;
        }
        (lo, hi)
    }

    /// Exact `sum_{t smooth, t > x} 1/t`.
    pub fn smooth_reciprocal_tail(&self, x: u64) -> Rational {
        let partial = self.weighted_reciprocal_sum(&self.smooth_up_to(x), |_| 1);
        &self.smooth_harmonic - partial
    }

    /// `prod_p p^k` over the primes `p <= Q`, `p^k` the largest power
    /// `<= top`: every smooth `t <= top` divides it.
    pub fn common_denominator(&self, top: u64) -> BigInt {
        let mut den = BigInt::one();
        for &p in &self.primes {
            let mut pk = 1u64;
            while pk <= top / p {
                pk *= p;
            }
            den *= pk;
        }
        den
    }

    /// `sum_t w(t) / t` over the given smooth integers (ascending).
    pub fn weighted_reciprocal_sum(&self, smooth: &[u64], w: impl Fn(u64) -> i64) -> Rational {
        let Some(&top) = smooth.last() else {
            return Rational::zero();
        };
        let den = self.common_denominator(top);
        let mut num = BigInt::zero();
        for &t in smooth {
            let v = w(t);
            if v != 0 {
                num += (&den / t) * v;
            }
        }
        Rational::new(num, den)
    }

    /// Rankin bound `x^-delta * prod (1 - p^(sigma+delta))^-1` for
    /// `sum_{t smooth, t > x} t^sigma`.
    pub fn rankin_bound(&self, sigma: &Rational, delta: &Rational, x: u64) -> Result<Rational> {
        if !delta.is_positive() {
            return Err(domain("Rankin exponent must be positive"));
        }
        let shifted = sigma + delta;
        if !shifted.is_negative() {
            return Err(domain("Rankin exponent too large for the series"));
        }
        let euler = self.euler_product_upper(&shifted)?;
        if x == 0 {
            return Ok(euler);
        }
        Ok(pow_upper(&rat_u(x), &(-delta)) * euler)
    }

    /// Rankin bound in terms of [`TailParams`] for the series with exponent
    /// `epsilon - 1`.
    pub fn rankin_tail_bound(&self, tp: &TailParams) -> Result<Rational> {
        tp.validate()?;
        self.rankin_bound(&(&tp.epsilon - Rational::one()), &tp.delta, tp.x)
    }

    /// Best Rankin bound over `delta = k/16` for the tail of
    /// `sum t^sigma`, together with the chosen `delta`.
    pub fn rankin_bound_auto(&self, sigma: &Rational, x: u64) -> Result<(Rational, Rational)> {
        let mut best: Option<(Rational, Rational)> = None;
        for k in 1..16 {
            let delta = ratio(k, 16);
            if !(sigma + &delta).is_negative() {
                break;
            }
            let b = self.rankin_bound(sigma, &delta, x)?;
            if best.as_ref().map_or(true, |(bb, _)| b < *bb) {
                best = Some((b, delta));
            }
        }
        best.ok_or_else(|| domain("no admissible Rankin exponent on the 1/16 grid"))
    }

    /// Upper bound for `sum_{t smooth, t > x} t^sigma`: exact when
    /// `sigma = -1`, otherwise the smaller of the best Rankin bound and the
    /// Euler product minus a lower partial sum.
    pub fn power_tail_upper(&self, sigma: &Rational, x: u64) -> Result<Rational> {
        if !sigma.is_negative() {
            return Err(domain("tail of a divergent smooth series"));
        }
        if *sigma == -Rational::one() {
            return Ok(self.smooth_reciprocal_tail(x));
        }
        if sigma.is_integer() {
            let full = self.smooth_power_series(sigma)?;
            let (lo, _) = self.smooth_power_partial(sigma, x);
            return Ok(full - lo);
        }
        let full = self.euler_product_upper(sigma)?;
        let (lo, _) = self.smooth_power_partial(sigma, x);
        let direct = full - lo;
        match self.rankin_bound_auto(sigma, x) {
            Ok((b, _)) if b < direct => Ok(b),
            _ => Ok(direct),
        }
    }
}

/// Exponents for a Rankin tail bound on `sum t^(epsilon-1)` beyond `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailParams {
    pub epsilon: Rational,
    pub delta: Rational,
    pub x: u64,
}

impl TailParams {
    pub fn new(epsilon: Rational, delta: Rational, x: u64) -> Result<Self> {
        let tp = Self { epsilon, delta, x };
        tp.validate()?;
        Ok(tp)
    }

    /// Picks `delta` on the 1/16 grid minimizing the Rankin bound.
    pub fn auto(ctx: &SmoothContext, epsilon: Rational, x: u64) -> Result<Self> {
        let sigma = &epsilon - Rational::one();
        let (_, delta) = ctx.rankin_bound_auto(&sigma, x)?;
        Self::new(epsilon, delta, x)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_negative() || self.epsilon >= Rational::one() {
            return Err(Error::Domain(format!(
                "epsilon must lie in [0, 1), got {}",
                crate::arith::format_rational(&self.epsilon)
            )));
        }
        if !self.delta.is_positive() || &self.epsilon + &self.delta >= Rational::one() {
            return Err(domain("delta must satisfy 0 < delta < 1 - epsilon"));
        }
        if self.x == 0 {
            return Err(domain("truncation point must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factor, gcd, rat};

    fn ctx(q: u64) -> SmoothContext {
        SmoothContext::new(q).unwrap()
    }

    #[test]
    fn rejects_small_bound() {
        assert!(SmoothContext::new(1).is_err());
        assert!(SmoothContext::new(0).is_err());
    }

    #[test]
    fn context_products() {
        for q in [2, 3, 4, 10, 13, 30] {
            let c = ctx(q);
            assert_eq!(c.totient_product() * c.smooth_harmonic(), rat(1));
            assert!(*c.totient_product() <= ratio(1, 2));
            assert!(c.totient_product().is_positive());
        }
        assert_eq!(ctx(4).primes(), &[2, 3]);
    }

    #[test]
    fn smooth_and_sifted_examples() {
        assert!(ctx(2).is_smooth(1) && ctx(7).is_smooth(1));
        assert!(ctx(2).is_smooth(16));
        assert!(!ctx(3).is_smooth(10));
        assert!(ctx(5).is_sifted(1));
        assert!(ctx(5).is_sifted(49));
        assert!(!ctx(3).is_sifted(6));
    }

    #[test]
    fn smooth_and_sifted_meet_only_at_one() {
        for q in [2, 3, 5, 7] {
            let c = ctx(q);
            assert!(c.is_smooth(1) && c.is_sifted(1));
            for n in 2..=10_000 {
                assert!(!(c.is_smooth(n) && c.is_sifted(n)));
            }
        }
    }

    #[test]
    fn smooth_and_sifted_are_coprime() {
        for q in [2, 3, 5] {
            let c = ctx(q);
            for n in (1..=300).filter(|&n| c.is_smooth(n)) {
                for m in (1..=300).filter(|&m| c.is_sifted(m)) {
                    assert_eq!(gcd(n, m), 1);
                }
            }
        }
    }

    #[test]
    fn unique_smooth_sifted_factorization() {
        for q in [2, 3, 5, 7] {
            let c = ctx(q);
            for a in 1..=10_000u64 {
                let splits = crate::arith::divisors(a)
                    .into_iter()
                    .filter(|&t| c.is_smooth(t) && c.is_sifted(a / t))
                    .count();
                assert_eq!(splits, 1, "a = {a}, Q = {q}");
                let (t, k) = c.split(a);
                assert_eq!(t * k, a);
            }
        }
    }

    #[test]
    fn smooth_enumeration_examples() {
        assert_eq!(ctx(2).smooth_up_to(16), vec![1, 2, 4, 8, 16]);
        assert_eq!(ctx(3).smooth_up_to(12), vec![1, 2, 3, 4, 6, 8, 9, 12]);
        assert_eq!(ctx(11).smooth_up_to(1), vec![1]);
    }

    #[test]
    fn smooth_enumeration_matches_filter() {
        for q in 2..=13 {
            let c = ctx(q);
            let brute: Vec<u64> = (1..=10_000)
                .filter(|&n| factor(n).largest_prime().map_or(true, |p| p <= q))
                .collect();
            assert_eq!(c.smooth_up_to(10_000), brute, "Q = {q}");
        }
    }

    #[test]
    fn sifted_count_examples() {
        assert_eq!(ctx(2).sifted_count(10), SiftedCount { count: 5, main_term: rat(5) });
        assert_eq!(ctx(3).sifted_count(6), SiftedCount { count: 2, main_term: rat(2) });
        for q in [2, 5, 13] {
            assert_eq!(ctx(q).sifted_count(1).count, 1);
        }
    }

    #[test]
    fn sifted_count_error_term() {
        for q in [2, 3, 5, 7, 11, 13] {
            let c = ctx(q);
            let limit = c.squarefree_kernel_count();
            let mut brute = 0u64;
            for x in 1..=100_000u64 {
                if c.is_sifted(x) {
                    brute += 1;
                }
                if x % 997 == 0 || x <= 200 || x == 100_000 {
                    let sc = c.sifted_count(x);
                    assert_eq!(sc.count, brute);
                    assert!((rat_u(sc.count) - &sc.main_term).abs() <= limit);
                }
            }
        }
    }

    #[test]
    fn exact_power_series() {
        assert_eq!(ctx(2).smooth_power_series(&rat(-1)).unwrap(), rat(2));
        assert_eq!(ctx(3).smooth_power_series(&rat(-1)).unwrap(), rat(3));
        assert_eq!(ctx(3).smooth_power_series(&rat(-2)).unwrap(), ratio(3, 2));
        assert!(ctx(3).smooth_power_series(&rat(0)).is_err());
        assert!(ctx(3).smooth_power_series(&ratio(-1, 2)).is_err());
    }

    #[test]
    fn reciprocal_tail_is_exact_difference() {
        let c = ctx(3);
        assert_eq!(c.smooth_reciprocal_tail(0), rat(3));
        let head: Rational = [1, 2, 3, 4].iter().map(|&t| ratio(1, t)).sum();
        assert_eq!(c.smooth_reciprocal_tail(5), rat(3) - head);
    }

    #[test]
    fn rankin_closed_form() {
        let c = ctx(2);
        let tp = TailParams::new(rat(0), ratio(1, 2), 1024).unwrap();
        let b = c.rankin_tail_bound(&tp).unwrap();
        let (lo, hi) = crate::bounds::pow_bounds(&rat(2), &ratio(-1, 2));
        let expected_hi = ratio(1, 32) / (rat(1) - hi);
        assert_eq!(b, expected_hi);
        let true_value = ratio(1, 32) / (rat(1) - lo);
        assert!(b >= true_value);
    }

    #[test]
    fn rankin_scaling_and_monotonicity() {
        let c = ctx(5);
        let tp = |x| TailParams::new(ratio(1, 4), ratio(1, 2), x).unwrap();
        for x in [1u64, 4, 9, 100, 2500] {
            let b1 = c.rankin_tail_bound(&tp(x)).unwrap();
            let b4 = c.rankin_tail_bound(&tp(4 * x)).unwrap();
            assert_eq!(b4 / b1, ratio(1, 2));
        }
        let mut prev = c.rankin_tail_bound(&tp(1)).unwrap();
        for x in 2..200 {
            let b = c.rankin_tail_bound(&tp(x)).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn rankin_exceeds_partial_sums() {
        for q in [2, 3, 7] {
            let c = ctx(q);
            let eps = ratio(1, 3);
            let sigma = &eps - rat(1);
            let tp = TailParams::new(eps.clone(), ratio(1, 4), 1).unwrap();
            let b = c.rankin_tail_bound(&tp).unwrap();
            let terms: Vec<u64> = c.smooth_up_to(1_000_000_000).into_iter().skip(1).take(100).collect();
            let mut partial = Rational::zero();
            for t in terms {
                partial += pow_lower(&rat_u(t), &sigma);
            }
            assert!(b >= partial);
        }
    }

    #[test]
    fn tail_bound_consistency() {
        let c = ctx(3);
        let eps = ratio(1, 4);
        let sigma = &eps - rat(1);
        for x in [10u64, 100, 1000] {
            let (_, hi) = c.smooth_power_partial(&sigma, x);
            let b = c.rankin_tail_bound(&TailParams::auto(&c, eps.clone(), x).unwrap()).unwrap();
            let (lo_big, _) = c.smooth_power_partial(&sigma, 100_000);
            assert!(hi + b >= lo_big);
        }
    }

    #[test]
    fn tail_params_validation() {
        assert!(TailParams::new(rat(1), ratio(1, 4), 10).is_err());
        assert!(TailParams::new(ratio(1, 2), ratio(1, 2), 10).is_err());
        assert!(TailParams::new(ratio(1, 2), rat(0), 10).is_err());
        assert!(TailParams::new(ratio(1, 2), ratio(1, 4), 0).is_err());
        assert!(TailParams::new(ratio(-1, 2), ratio(1, 4), 1).is_err());
        let tp = TailParams::auto(&ctx(3), ratio(1, 2), 1000).unwrap();
        assert!(&tp.epsilon + &tp.delta < rat(1));
    }

    #[test]
    fn power_tail_upper_bounds_true_tail() {
        let c = ctx(5);
        for sigma in [rat(-1), rat(-2), ratio(-1, 2), ratio(-3, 4)] {
            for x in [1u64, 30, 500] {
                let t = c.power_tail_upper(&sigma, x).unwrap();
                let (_, hi_x) = c.smooth_power_partial(&sigma, x);
                let (lo_big, _) = c.smooth_power_partial(&sigma, 200_000);
                assert!(hi_x + &t >= lo_big);
            }
        }
    }
}
