//! Shifted convolution sums `C(N, a) = sum_{n<=N} f(n) g(n+a)` with `g` of
//! bounded range, their period, Eratosthenes transform, coefficients and
//! the smooth/non-smooth tail identities.

use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::arith::{
    divisors, euler_phi, format_rational, gcd, lcm, lcm_up_to, mobius, rat, rat_u, ratio,
    ramanujan_sum, FunctionTable, Rational,
};
use crate::coefficients::{carmichael_periodic_exact, expansion_indices, ExpansionPartial};
use crate::error::{domain, Error, Result};
use crate::interval::BoundedValue;
use crate::smooth::{SmoothContext, TailParams};
use crate::transforms::{build_range_q, ArithmeticFunctionSpec, RangeQFunction, TableMode};

/// `g` of range `Q <= N` paired with `f`. The shift only enters through
/// `g`'s argument, so fairness holds by construction.
#[derive(Clone, Debug)]
pub struct BhPair {
    f: ArithmeticFunctionSpec,
    g: RangeQFunction,
    length: u64,
    f_values: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasicHypothesisWitness {
    pub range_ok: bool,
    pub fair: bool,
}

impl BasicHypothesisWitness {
    pub fn holds(&self) -> bool {
        self.range_ok && self.fair
    }
}

impl BhPair {
    pub fn new(f: ArithmeticFunctionSpec, g: RangeQFunction, length: u64) -> Result<Self> {
        if length == 0 {
            return Err(domain("correlation length must be positive"));
        }
        if g.range() > length {
            return Err(Error::BasicHypothesis(format!(
                "range {} exceeds the length {length}",
                g.range()
            )));
        }
        let f_values = (1..=length).map(|n| f.value(n)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            f,
            g,
            length,
            f_values,
        })
    }

    pub fn witness(&self) -> BasicHypothesisWitness {
        BasicHypothesisWitness {
            range_ok: self.g.range() <= self.length,
            fair: true,
        }
    }

    pub fn f(&self) -> &ArithmeticFunctionSpec {
        &self.f
    }

    pub fn g(&self) -> &RangeQFunction {
        &self.g
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn range(&self) -> u64 {
        self.g.range()
    }

    /// `f(n)` for `1 <= n <= N`.
    pub fn f_values(&self) -> &[Rational] {
        &self.f_values
    }

    /// `lcm(1, ..., Q)`.
    pub fn period(&self) -> Result<u64> {
        lcm_up_to(self.range()).ok_or_else(|| domain("period overflows u64"))
    }

    /// `sum_{n<=N} f(n) c_ell(n + shift)`.
    pub fn ramanujan_moment(&self, ell: u64, shift: u64) -> Rational {
        let mut acc = Rational::zero();
        for (i, v) in self.f_values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let c = ramanujan_sum(ell, i as i64 + 1 + shift as i64);
            if c != 0 {
                acc += v * rat(c);
            }
        }
        acc
    }

    pub fn describe(&self) -> String {
        format!("f = {}, Q = {}, N = {}", self.f.describe(), self.range(), self.length)
    }
}

/// Direct `sum_{n<=N} f(n) g(n + a)`.
pub fn correlation(pair: &BhPair, a: u64) -> Rational {
    let mut acc = Rational::zero();
    for (i, v) in pair.f_values.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        acc += v * pair.g.value(i as i64 + 1 + a as i64);
    }
    acc
}

/// Values scaled to a common denominator, when they fit in `i128`.
fn common_scale(vals: &[Rational]) -> Option<(BigInt, Vec<i128>)> {
    let mut den = BigInt::one();
    for v in vals {
        den = den.lcm(v.denom());
    }
    let ints = vals
        .iter()
        .map(|v| (v.numer() * (&den / v.denom())).to_i128())
        .collect::<Option<Vec<_>>>()?;
    Some((den, ints))
}

fn unscale(v: i128, scale: &BigInt) -> Rational {
    Rational::new(BigInt::from(v), scale.clone())
}

/// `C(N, a)` for `1 <= a <= shifts`, exact.
pub fn correlation_shifts(pair: &BhPair, shifts: u64) -> Vec<Rational> {
    let n = pair.length;
    let top = n + shifts;
    let g_vals: Vec<Rational> = {
        let mut out = vec![Rational::zero(); top as usize + 1];
        for d in 1..=pair.range() {
            let gd = pair.g.gprime(d);
            if gd.is_zero() {
                continue;
            }
            let mut m = d;
            while m <= top {
                out[m as usize] += &gd;
                m += d;
            }
        }
        out
    };
    let fast = common_scale(&pair.f_values).zip(common_scale(&g_vals[1..]));
    if let Some(((fs, fi), (gs, gi))) = fast {
        let scale = &fs * &gs;
        let mut out = Vec::with_capacity(shifts as usize);
        let mut ok = true;
        for a in 1..=shifts {
            let mut acc: i128 = 0;
            for (i, fv) in fi.iter().enumerate() {
                if *fv == 0 {
                    continue;
                }
                let m = i as u64 + 1 + a;
                match fv.checked_mul(gi[m as usize - 1]).and_then(|p| acc.checked_add(p)) {
                    Some(s) => acc = s,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            out.push(acc);
        }
        if ok {
            return out.into_iter().map(|v| unscale(v, &scale)).collect();
        }
    }
    (1..=shifts)
        .map(|a| {
            let mut acc = Rational::zero();
            for (i, fv) in pair.f_values.iter().enumerate() {
                if !fv.is_zero() {
                    acc += fv * &g_vals[(i as u64 + 1 + a) as usize];
                }
            }
            acc
        })
        .collect()
}

/// `C'(d) = sum_{t | d} C(t) mu(d/t)` for `d <= bound`, `C` given on one
/// period.
fn dirichlet_transform(period_values: &[Rational], bound: u64) -> Vec<Rational> {
    let p = period_values.len() as u64;
    let mu: Vec<i64> = (1..=bound).map(mobius).collect();
    if let Some((scale, ints)) = common_scale(period_values) {
        let mut out = vec![0i128; bound as usize];
        let mut ok = true;
        'outer: for t in 1..=bound {
            let ct = ints[((t - 1) % p) as usize];
            if ct == 0 {
                continue;
            }
            for k in 1..=bound / t {
                let m = mu[k as usize - 1];
                if m == 0 {
                    continue;
                }
                let slot = &mut out[(t * k) as usize - 1];
                match slot.checked_add(m as i128 * ct) {
                    Some(v) => *slot = v,
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            return out.into_iter().map(|v| unscale(v, &scale)).collect();
        }
    }
    let table = FunctionTable::from_fn(bound, |t| period_values[((t - 1) % p) as usize].clone());
    crate::arith::eratosthenes_transform(&table).values().to_vec()
}

/// Partial Wintner series of the correlation transform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WintnerSide {
    /// `sum_{d <= X, ell | d} C'(d) / d`.
    pub partial: Rational,
    /// Certified value, available when the transform has finite support.
    pub certified: Option<BoundedValue>,
    pub x: u64,
}

/// Correlation values over one period, audited over two more, plus the
/// transform up to a chosen bound.
#[derive(Clone, Debug)]
pub struct CorrelationTable {
    pair: BhPair,
    period: u64,
    values: Vec<Rational>,
    transform: Vec<Rational>,
    transform_den: BigInt,
    even: bool,
    max_abs: Rational,
    moment_rows: Vec<(u64, Vec<Rational>)>,
}

impl CorrelationTable {
    /// Builds the table; the transform is kept for `d <= max(bound, period)`.
    pub fn build(pair: BhPair, transform_bound: u64) -> Result<Self> {
        let period = pair.period()?;
        let window = correlation_shifts(&pair, 3 * period);
        for a in 0..2 * period as usize {
            if window[a] != window[a + period as usize] {
                return Err(Error::PeriodAudit {
                    a: a as u64 + 1,
                    period,
                });
            }
        }
        let values: Vec<Rational> = window[..2 * period as usize].to_vec();
        let one_period = &values[..period as usize];
        let even = (1..=period).all(|a| one_period[a as usize - 1] == one_period[gcd(a, period) as usize - 1]);
        let max_abs = one_period.iter().map(|v| v.abs()).max().unwrap_or_default();
        let transform = dirichlet_transform(one_period, transform_bound.max(period));
        let transform_den = transform.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let moment_rows = (1..=pair.range())
            .filter(|&q| !pair.g.ghat(q).is_zero())
            .map(|q| (q, (0..q).map(|r| pair.ramanujan_moment(q, r)).collect()))
            .collect();
        Ok(Self {
            pair,
            period,
            values,
            transform,
            transform_den,
            even,
            max_abs,
            moment_rows,
        })
    }

    pub fn pair(&self) -> &BhPair {
        &self.pair
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// `C(N, a)` for `1 <= a <= 2 * period`, index `a - 1`.
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn correlation(&self, a: u64) -> Rational {
        let idx = (a + self.period - 1) % self.period;
        self.values[idx as usize].clone()
    }

    /// `C(N, a)` depends only on `gcd(a, period)`.
    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn max_abs(&self) -> &Rational {
        &self.max_abs
    }

    pub fn transform_bound(&self) -> u64 {
        self.transform.len() as u64
    }

    /// `C'(N, d)`.
    pub fn transform(&self, d: u64) -> Result<Rational> {
        if d == 0 {
            return Err(domain("transform is defined on d >= 1"));
        }
        match self.transform.get(d as usize - 1) {
            Some(v) => Ok(v.clone()),
            None if self.even && self.period % d != 0 => Ok(Rational::zero()),
            None => Err(Error::TransformRange {
                bound: self.transform_bound(),
                needed: d,
            }),
        }
    }

    /// `sum_{q<=Q} ghat(q) sum_{n<=N} f(n) c_q(n + a)`.
    pub fn ramanujan_decomposition(&self, a: u64) -> Rational {
        let mut acc = Rational::zero();
        for (q, row) in &self.moment_rows {
            acc += self.pair.g.ghat(*q) * &row[(a % q) as usize];
        }
        acc
    }

    /// `(ghat(ell) / phi(ell)) sum_{n<=N} f(n) c_ell(n)`, zero past the range.
    pub fn correlation_coefficient(&self, ell: u64) -> Rational {
        let h = self.pair.g.ghat(ell);
        if h.is_zero() {
            return Rational::zero();
        }
        h / rat_u(euler_phi(ell)) * self.pair.ramanujan_moment(ell, 0)
    }

    /// Exact Cesàro mean of `C(N, .)` against `c_ell`.
    pub fn carmichael_mean(&self, ell: u64) -> Result<Rational> {
        carmichael_periodic_exact(&self.values, self.period, ell)
    }

    /// `sum_{ell | d} C'(d) / d`, exact when the transform is supported on
    /// divisors of the period.
    pub fn transform_wintner(&self, ell: u64, x: u64) -> Result<WintnerSide> {
        if ell == 0 {
            return Err(domain("coefficient index must be positive"));
        }
        let partial = self.reciprocal_sum((1..=x / ell).map(|k| k * ell))?;
        let certified = if self.even {
            let mut exact = Rational::zero();
            for d in divisors(self.period).into_iter().filter(|d| d % ell == 0) {
                exact += self.transform(d)? / rat_u(d);
            }
            Some(BoundedValue::exact(exact))
        } else {
            None
        };
        Ok(WintnerSide { partial, certified, x })
    }

    /// `sum_{d smooth, ell | d} C'(d) / d`, certified with
    /// `|C'(d)| <= 2^omega(d) max|C|`.
    pub fn smooth_wintner(&self, ctx: &SmoothContext, ell: u64, x: u64) -> Result<BoundedValue> {
        if ell == 0 {
            return Err(domain("coefficient index must be positive"));
        }
        if !ctx.is_smooth(ell) {
            return Ok(BoundedValue::zero());
        }
        if self.even {
            let mut exact = Rational::zero();
            for d in divisors(self.period) {
                if d % ell == 0 && ctx.is_smooth(d) {
                    exact += self.transform(d)? / rat_u(d);
                }
            }
            return Ok(BoundedValue::exact(exact));
        }
        if x > self.transform_bound() {
            return Err(Error::TransformRange {
                bound: self.transform_bound(),
                needed: x,
            });
        }
        let kmax = x / ell;
        let acc = self.reciprocal_sum(ctx.smooth_up_to(kmax).into_iter().map(|k| k * ell))?;
        let radius = ctx.squarefree_kernel_count() * &self.max_abs / rat_u(ell)
            * ctx.smooth_reciprocal_tail(kmax);
        Ok(BoundedValue::new(acc, radius))
    }

    /// `sum_{d not smooth, ell | d, d <= X} C'(d) / d`.
    pub fn nonsmooth_partial(&self, ctx: &SmoothContext, ell: u64, x: u64) -> Result<Rational> {
        self.reciprocal_sum((1..=x / ell).map(|k| k * ell).filter(|&d| !ctx.is_smooth(d)))
    }

    /// `sum C'(d) / d` over ascending `d`, on one common denominator.
    fn reciprocal_sum(&self, ds: impl Iterator<Item = u64>) -> Result<Rational> {
        let ds: Vec<u64> = ds.collect();
        let Some(&top) = ds.last() else {
            return Ok(Rational::zero());
        };
        let mut den = self.transform_den.clone();
        for p in crate::arith::primes_up_to(top) {
            let mut pk = p;
            while pk <= top / p {
                pk *= p;
            }
            den *= pk;
        }
        let mut num = BigInt::zero();
        for d in ds {
            let v = self.transform(d)?;
            if !v.is_zero() {
                num += v.numer() * (&den / (v.denom() * d));
            }
        }
        Ok(Rational::new(num, den))
    }

    /// Rows `a,value` over one period.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "a,correlation")?;
        for a in 1..=self.period {
            writeln!(w, "{a},{}", format_rational(&self.correlation(a)))?;
        }
        Ok(())
    }
}

/// `G(a) = sum_{d | a, d smooth} C'(N, d)`, through the transform.
pub fn smooth_restricted_correlation(table: &CorrelationTable, ctx: &SmoothContext, a: u64) -> Result<Rational> {
    if a == 0 {
        return Err(domain("shift must be positive"));
    }
    let mut acc = Rational::zero();
    for d in divisors(ctx.smooth_part(a)) {
        acc += table.transform(d)?;
    }
    Ok(acc)
}

/// The same value from the correlation itself:
/// `sum_{t | a, t smooth, a/t sifted} C(N, t)`.
pub fn smooth_restricted_correlation_switch(table: &CorrelationTable, ctx: &SmoothContext, a: u64) -> Rational {
    divisors(a)
        .into_iter()
        .filter(|&t| ctx.is_smooth(t) && ctx.is_sifted(a / t))
        .map(|t| table.correlation(t))
        .sum()
}

/// Both sides of the split of the transform's Wintner series into smooth
/// and non-smooth parts at index `ell`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIdentity {
    pub ell: u64,
    /// Smooth part, certified.
    pub smooth: BoundedValue,
    /// `(ghat(ell)/phi(ell)) sum f(n) c_ell(n)`.
    pub coefficient: Rational,
    /// Non-smooth part summed up to `x`.
    pub nonsmooth_partial: Rational,
    /// Non-smooth part, certified when the table is even.
    pub nonsmooth: Option<BoundedValue>,
    pub x: u64,
}

impl SplitIdentity {
    /// `coefficient - nonsmooth`, the value the smooth part must take.
    pub fn rhs(&self) -> Option<BoundedValue> {
        self.nonsmooth
            .as_ref()
            .map(|ns| &BoundedValue::exact(self.coefficient.clone()) - ns)
    }

    /// `Some(true)` if the certified sides agree, `None` when undecided.
    pub fn consistent(&self) -> Option<bool> {
        self.rhs().map(|r| r.intersects(&self.smooth))
    }

    /// Non-smooth part implied by the smooth part and the coefficient.
    pub fn implied_nonsmooth(&self) -> BoundedValue {
        &BoundedValue::exact(self.coefficient.clone()) - &self.smooth
    }
}

pub fn split_identity(
    table: &CorrelationTable,
    ctx: &SmoothContext,
    ell: u64,
    tp: &TailParams,
) -> Result<SplitIdentity> {
    let x = tp.x.min(table.transform_bound());
    let smooth = table.smooth_wintner(ctx, ell, x)?;
    let nonsmooth_partial = table.nonsmooth_partial(ctx, ell, x)?;
    let nonsmooth = if table.is_even() {
        let mut exact = Rational::zero();
        for d in divisors(table.period()) {
            if d % ell == 0 && !ctx.is_smooth(d) {
                exact += table.transform(d)? / rat_u(d);
            }
        }
        Some(BoundedValue::exact(exact))
    } else {
        None
    };
    Ok(SplitIdentity {
        ell,
        smooth,
        coefficient: table.correlation_coefficient(ell),
        nonsmooth_partial,
        nonsmooth,
        x,
    })
}

/// Expansion of `G` at `a` over smooth indices `<= L`.
pub fn scs_expansion(
    table: &CorrelationTable,
    ctx: &SmoothContext,
    a: u64,
    l: u64,
    tp: &TailParams,
) -> Result<ExpansionPartial> {
    let x = tp.x.min(table.transform_bound());
    let (indices, complete) = table_indices(table, ctx, a, l);
    let mut partial = BoundedValue::zero();
    for ell in indices {
        let c = ramanujan_sum(ell, a as i64);
        if c != 0 {
            partial = &partial + &table.smooth_wintner(ctx, ell, x)?.scale(&rat(c));
        }
    }
    let index_tail = if complete {
        Rational::zero()
    } else {
        index_tail_bound(table, ctx, a, l)
    };
    Ok(ExpansionPartial {
        partial,
        index_tail,
        target: smooth_restricted_correlation(table, ctx, a)?,
    })
}

/// Indices contributing to expansions over the table. For even tables the
/// smooth coefficients vanish off divisors of the period.
fn table_indices(table: &CorrelationTable, ctx: &SmoothContext, a: u64, l: u64) -> (Vec<u64>, bool) {
    if table.is_even() {
        let idx = divisors(table.period())
            .into_iter()
            .filter(|&e| ctx.is_smooth(e))
            .collect();
        return (idx, true);
    }
    expansion_indices(ctx, a, l)
}

fn index_tail_bound(table: &CorrelationTable, ctx: &SmoothContext, a: u64, l: u64) -> Rational {
    rat_u(a) * ctx.squarefree_kernel_count() * table.max_abs() * ctx.smooth_harmonic() * ctx.smooth_reciprocal_tail(l)
}

/// `sum_{ell smooth} (sum_{d not smooth, ell | d} C'(d)/d) c_ell(a)`,
/// evaluated through the split identity. Requires `L >= Q`.
pub fn asymptotic_reef_tail(
    table: &CorrelationTable,
    ctx: &SmoothContext,
    a: u64,
    l: u64,
    tp: &TailParams,
) -> Result<BoundedValue> {
    if l < table.pair().range() {
        return Err(domain("index cutoff must cover the range of g"));
    }
    if ctx.bound() < table.pair().range() {
        return Err(domain("smoothness bound must be at least the range of g"));
    }
    let x = tp.x.min(table.transform_bound());
    let (indices, complete) = table_indices(table, ctx, a, l);
    let mut acc = BoundedValue::zero();
    for ell in indices {
        let c = ramanujan_sum(ell, a as i64);
        if c == 0 {
            continue;
        }
        let smooth = table.smooth_wintner(ctx, ell, x)?;
        let term = &BoundedValue::exact(table.correlation_coefficient(ell)) - &smooth;
        acc = &acc + &term.scale(&rat(c));
    }
    if complete {
        Ok(acc)
    } else {
        Ok(acc.widen(&index_tail_bound(table, ctx, a, l)))
    }
}

/// `(1 / lcm(q, ell)) sum_a c_ell(a) c_q(n + a)` over one common period.
pub fn carmichael_orthogonality_mean(q: u64, ell: u64, n: i64) -> Rational {
    let l = lcm(q, ell);
    let s: i64 = (1..=l as i64)
        .map(|a| ramanujan_sum(ell, a) * ramanujan_sum(q, n + a))
        .sum();
    ratio(s, l as i64)
}

/// Small random rational in `[-5, 5]` with denominator at most 4.
fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

/// Random pair with `Q <= max_q`, `Q <= N <= max_n`, `f` given by values on
/// `[1, N]` and `g'` by values on `[1, Q]`.
pub fn random_bh_instance<R: Rng>(rng: &mut R, max_n: u64, max_q: u64) -> Result<BhPair> {
    let q = rng.gen_range(1..=max_q.min(max_n).max(1));
    let n = rng.gen_range(q..=max_n.max(q));
    random_bh_pair(rng, n, q)
}

/// Random pair with the given `N` and `Q`, values drawn as in
/// [`random_bh_instance`].
pub fn random_bh_pair<R: Rng>(rng: &mut R, n: u64, q: u64) -> Result<BhPair> {
    if q == 0 || q > n {
        return Err(Error::BasicHypothesis(format!("need 1 <= Q <= N, got Q = {q}, N = {n}")));
    }
    let f = FunctionTable::from_fn(n, |_| small_rational(rng));
    let g = FunctionTable::from_fn(q, |_| small_rational(rng));
    let f = ArithmeticFunctionSpec::from_table(TableMode::Direct, f, None)?;
    BhPair::new(f, build_range_q(&g)?, n)
}

/// Largest `|a - b|` over the pairs.
pub fn max_abs_deviation<'a>(pairs: impl Iterator<Item = (&'a Rational, &'a Rational)>) -> Rational {
    pairs
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::CatalogFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn catalog(f: CatalogFunction) -> ArithmeticFunctionSpec {
        ArithmeticFunctionSpec::catalog(f)
    }

    fn ctx(v: u64) -> SmoothContext {
        SmoothContext::new(v).unwrap()
    }

    fn tp(x: u64) -> TailParams {
        TailParams::new(rat(0), ratio(1, 2), x).unwrap()
    }

    fn brute(f: &[Rational], g: impl Fn(i64) -> Rational, a: u64) -> Rational {
        f.iter()
            .enumerate()
            .map(|(i, v)| v * g(i as i64 + 1 + a as i64))
            .sum()
    }

    #[test]
    fn range_must_not_exceed_length() {
        let g = RangeQFunction::ramanujan_sum(5, 5).unwrap();
        assert!(matches!(
            BhPair::new(catalog(CatalogFunction::One), g, 4),
            Err(Error::BasicHypothesis(_))
        ));
    }

    #[test]
    fn correlation_examples() {
        let g = RangeQFunction::ramanujan_sum(3, 5).unwrap();
        let pair = BhPair::new(catalog(CatalogFunction::Indicator(4)), g, 10).unwrap();
        for a in 1..30 {
            assert_eq!(correlation(&pair, a), rat(ramanujan_sum(3, 4 + a as i64)));
        }
        let zero = ArithmeticFunctionSpec::from_table(TableMode::Direct, FunctionTable::from_fn(8, |_| rat(0)), None).unwrap();
        let pair = BhPair::new(zero, RangeQFunction::ramanujan_sum(4, 6).unwrap(), 8).unwrap();
        assert_eq!(correlation(&pair, 3), rat(0));
        let pair = BhPair::new(catalog(CatalogFunction::One), RangeQFunction::constant_one(), 17).unwrap();
        assert_eq!(correlation(&pair, 5), rat(17));
    }

    #[test]
    fn table_matches_direct_sum_and_decomposition() {
        for q0 in 1..=10u64 {
            for (n, f) in [(50u64, CatalogFunction::Mobius), (12, CatalogFunction::PhiOverN), (q0.max(3), CatalogFunction::Indicator(2))] {
                if n < q0 {
                    continue;
                }
                let g = RangeQFunction::ramanujan_sum(q0, q0).unwrap();
                let pair = BhPair::new(catalog(f), g, n).unwrap();
                let table = CorrelationTable::build(pair.clone(), 100).unwrap();
                for a in 1..=2 * table.period() {
                    let direct = brute(pair.f_values(), |m| rat(ramanujan_sum(q0, m)), a);
                    assert_eq!(table.correlation(a), direct);
                    assert_eq!(table.ramanujan_decomposition(a), direct, "q0 = {q0}, a = {a}");
                }
            }
        }
    }

    #[test]
    fn random_instances_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pair = random_bh_instance(&mut rng, 30, 6).unwrap();
            let table = CorrelationTable::build(pair.clone(), 64).unwrap();
            for a in 1..=table.period() {
                assert_eq!(table.correlation(a), correlation(&pair, a));
                assert_eq!(table.ramanujan_decomposition(a), correlation(&pair, a));
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let g = RangeQFunction::ramanujan_sum(5, 6).unwrap();
        let pair = BhPair::new(catalog(CatalogFunction::Indicator(3)), g, 10).unwrap();
        let table = CorrelationTable::build(pair, 100).unwrap();
        assert_eq!(table.correlation_coefficient(7), rat(0));
        assert_eq!(table.correlation_coefficient(5), ratio(ramanujan_sum(5, 3), 4));
        for ell in 1..=8 {
            assert_eq!(table.correlation_coefficient(ell), table.carmichael_mean(ell).unwrap());
        }
    }

    #[test]
    fn even_tables_have_exact_wintner_series() {
        let g = RangeQFunction::ramanujan_sum(6, 6).unwrap();
        let pair = BhPair::new(catalog(CatalogFunction::Indicator(6)), g, 10).unwrap();
        let table = CorrelationTable::build(pair, 200).unwrap();
        assert!(table.is_even());
        for d in 1..=200 {
            if table.period() % d != 0 {
                assert_eq!(table.transform(d).unwrap(), rat(0));
            }
        }
        for ell in 1..=8 {
            let w = table.transform_wintner(ell, 200).unwrap();
            assert_eq!(w.certified.unwrap(), BoundedValue::exact(table.correlation_coefficient(ell)));
        }
        let g = RangeQFunction::ramanujan_sum(3, 3).unwrap();
        let pair = BhPair::new(catalog(CatalogFunction::Indicator(2)), g, 10).unwrap();
        let table = CorrelationTable::build(pair, 200).unwrap();
        assert!(!table.is_even());
        assert!(table.transform_wintner(3, 200).unwrap().certified.is_none());
    }

    #[test]
    fn transform_inverts_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pair = random_bh_instance(&mut rng, 20, 5).unwrap();
        let table = CorrelationTable::build(pair, 300).unwrap();
        for a in 1..=300u64 {
            let s: Rational = divisors(a).into_iter().map(|d| table.transform(d).unwrap()).sum();
            assert_eq!(s, table.correlation(a));
        }
    }

    #[test]
    fn smooth_restricted_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let pair = random_bh_instance(&mut rng, 25, 6).unwrap();
            let table = CorrelationTable::build(pair, 2000).unwrap();
            for v in [2, 3, 5] {
                let c = ctx(v);
                assert_eq!(smooth_restricted_correlation(&table, &c, 1).unwrap(), table.transform(1).unwrap());
                assert_eq!(table.transform(1).unwrap(), table.correlation(1));
                for a in 1..=2000u64 {
                    let g = smooth_restricted_correlation(&table, &c, a).unwrap();
                    assert_eq!(g, smooth_restricted_correlation_switch(&table, &c, a));
                    if c.is_smooth(a) {
                        assert_eq!(g, table.correlation(a));
                    }
                }
                for a in 1..=100u64 {
                    for p in [7u64, 11, 13] {
                        assert_eq!(
                            smooth_restricted_correlation(&table, &c, a * p).unwrap(),
                            smooth_restricted_correlation(&table, &c, a).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_of_ramanujan_sums() {
        for q in 1..=12u64 {
            for ell in 1..=12u64 {
                for n in 0..=24i64 {
                    let expected = if q == ell { rat(ramanujan_sum(ell, n)) } else { rat(0) };
                    assert_eq!(carmichael_orthogonality_mean(q, ell, n), expected);
                }
            }
        }
    }

    #[test]
    fn split_identity_off_smooth_indices() {
        let c = ctx(2);
        let g = RangeQFunction::ramanujan_sum(3, 3).unwrap();
        let pair = BhPair::new(catalog(CatalogFunction::Indicator(3)), g, 10).unwrap();
        let table = CorrelationTable::build(pair, 1000).unwrap();
        let s = split_identity(&table, &c, 3, &tp(1000)).unwrap();
        assert_eq!(s.smooth, BoundedValue::zero());
        assert_eq!(s.consistent(), Some(true));
        assert_eq!(s.nonsmooth.unwrap(), BoundedValue::exact(s.coefficient.clone()));

        let zero = ArithmeticFunctionSpec::from_table(TableMode::Direct, FunctionTable::from_fn(6, |_| rat(0)), None).unwrap();
        let pair = BhPair::new(zero, RangeQFunction::ramanujan_sum(3, 3).unwrap(), 6).unwrap();
        let table = CorrelationTable::build(pair, 100).unwrap();
        let s = split_identity(&table, &c, 3, &tp(100)).unwrap();
        assert_eq!(s.coefficient, rat(0));
        assert_eq!(s.smooth, BoundedValue::zero());
        assert_eq!(s.nonsmooth.unwrap(), BoundedValue::zero());
    }

    #[test]
    fn smooth_part_interval_shrinks_and_nests() {
        let c = ctx(3);
        let g = RangeQFunction::ramanujan_sum(5, 5).unwrap();
        let pair = BhPair::new(catalog(CatalogFunction::Indicator(4)), g, 10).unwrap();
        let table = CorrelationTable::build(pair, 20_000).unwrap();
        for ell in [1u64, 2, 3, 6] {
            let coarse = table.smooth_wintner(&c, ell, 1000).unwrap();
            let fine = table.smooth_wintner(&c, ell, 20_000).unwrap();
            assert!(coarse.contains(fine.center()));
            assert!(fine.radius() <= coarse.radius());
        }
    }

    #[test]
    fn scs_expansion_at_smooth_shifts() {
        let c = ctx(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pair = random_bh_instance(&mut rng, 20, 5).unwrap();
        let table = CorrelationTable::build(pair, 10_000).unwrap();
        for a in c.smooth_up_to(30) {
            let e = scs_expansion(&table, &c, a, 10_000, &tp(10_000)).unwrap();
            assert_eq!(e.target, table.correlation(a));
            assert!(e.consistent(), "a = {a}");
        }
    }

    #[test]
    fn reef_tail_for_finite_support() {
        let g = RangeQFunction::ramanujan_sum(6, 6).unwrap();
        let pair = BhPair::new(catalog(CatalogFunction::Indicator(6)), g, 10).unwrap();
        let table = CorrelationTable::build(pair, 100).unwrap();
        let c = ctx(7);
        for a in 1..20 {
            let t = asymptotic_reef_tail(&table, &c, a, 100, &tp(100)).unwrap();
            assert_eq!(t, BoundedValue::zero());
        }
    }

    #[test]
    fn reef_tail_reproduces_counterexample_defect() {
        for (q0, v) in [(3u64, 3u64), (5, 5), (5, 7)] {
            let g = RangeQFunction::ramanujan_sum(q0, q0).unwrap();
            let pair = BhPair::new(catalog(CatalogFunction::Indicator(q0 - 1)), g, 10).unwrap();
            let table = CorrelationTable::build(pair, 10_000).unwrap();
            let c = ctx(v);
            let t = asymptotic_reef_tail(&table, &c, 1, 10_000, &tp(10_000)).unwrap();
            let phi = rat_u(euler_phi(q0));
            let mu2 = rat(mobius(q0).abs());
            let defect = &phi - mu2 / &phi;
            assert!(t.contains(&(-defect)), "q0 = {q0}, V = {v}: {t}");
        }
    }
}
