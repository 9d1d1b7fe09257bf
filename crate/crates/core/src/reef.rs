//! Finite Ramanujan expansions of correlations at smooth shifts: the
//! indicator/Ramanujan-sum counterexample, the falsifier sweep for the
//! weighted orthogonality relation with a shift, and residual profiles.

use num_integer::Roots;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{euler_phi, format_rational, lcm_up_to, rat, rat_u, ramanujan_row, ramanujan_sum, Rational};
use crate::bounds::pow_bounds;
use crate::correlations::{correlation, correlation_shifts, BhPair};
use crate::error::{domain, Result};
use crate::interval::BoundedValue;
use crate::smooth::SmoothContext;
use crate::transforms::{ArithmeticFunctionSpec, CatalogFunction, RangeQFunction};

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_rational_opt<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&format_rational(r)),
        None => s.serialize_none(),
    }
}

/// `f = 1_{n0}`, `g = c_{q0}` of range `Q`, correlation length `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReefInstance {
    #[serde(rename = "N")]
    pub length: u64,
    #[serde(rename = "Q")]
    pub range: u64,
    pub n0: u64,
    pub q0: u64,
}

impl ReefInstance {
    pub fn new(length: u64, range: u64, n0: u64, q0: u64) -> Result<Self> {
        if n0 == 0 || n0 > length {
            return Err(domain(format!("need 1 <= n0 <= N, got n0 = {n0}, N = {length}")));
        }
        if q0 <= 2 || q0 > range {
            return Err(domain(format!("need 2 < q0 <= Q, got q0 = {q0}, Q = {range}")));
        }
        if range > length {
            return Err(domain(format!("need Q <= N, got Q = {range}, N = {length}")));
        }
        Ok(Self {
            length,
            range,
            n0,
            q0,
        })
    }

    pub fn pair(&self) -> Result<BhPair> {
        BhPair::new(
            ArithmeticFunctionSpec::catalog(CatalogFunction::Indicator(self.n0)),
            RangeQFunction::ramanujan_sum(self.q0, self.range)?,
            self.length,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReefReport {
    pub instance: ReefInstance,
    pub a: u64,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub defect: Rational,
}

/// `(ghat(ell) / phi(ell)) sum_{n<=N} f(n) c_ell(n)` for `ell <= Q`.
pub fn reef_coefficients(pair: &BhPair) -> Vec<(u64, Rational)> {
    (1..=pair.range())
        .filter_map(|ell| {
            let h = pair.g().ghat(ell);
            if h.is_zero() {
                return None;
            }
            let c = h / rat_u(euler_phi(ell)) * pair.ramanujan_moment(ell, 0);
            (!c.is_zero()).then_some((ell, c))
        })
        .collect()
}

fn expand(coefs: &[(u64, Rational)], a: u64) -> Rational {
    coefs
        .iter()
        .map(|(ell, c)| c * rat(ramanujan_sum(*ell, a as i64)))
        .sum()
}

/// `sum_{ell<=Q} (ghat(ell)/phi(ell)) (sum_{n<=N} f(n) c_ell(n)) c_ell(a)`.
pub fn reef_rhs(pair: &BhPair, a: u64) -> Rational {
    expand(&reef_coefficients(pair), a)
}

/// Evaluates both sides at `a = 1` for `n0 = -1 (mod q0)`.
pub fn indicator_counterexample(length: u64, range: u64, n0: u64, q0: u64) -> Result<ReefReport> {
    let instance = ReefInstance::new(length, range, n0, q0)?;
    if (n0 + 1) % q0 != 0 {
        return Err(domain(format!("need n0 = -1 (mod q0), got n0 = {n0}, q0 = {q0}")));
    }
    reef_report(&instance, 1)
}

pub fn reef_report(instance: &ReefInstance, a: u64) -> Result<ReefReport> {
    let pair = instance.pair()?;
    let lhs = correlation(&pair, a);
    let rhs = reef_rhs(&pair, a);
    Ok(ReefReport {
        instance: *instance,
        a,
        defect: &lhs - &rhs,
        lhs,
        rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    /// The certified interval excludes the conjectured value.
    Violated,
    /// The interval still contains the conjectured value at the final `X`.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepPoint {
    pub q: u64,
    pub ell: u64,
    pub n: i64,
    #[serde(rename = "X")]
    pub x: u64,
    pub value: BoundedValue,
    #[serde(serialize_with = "ser_rational")]
    pub conjectured: Rational,
    pub status: PointStatus,
}

/// `1_{q=ell} c_ell(n)`.
pub fn shifted_orthogonality_value(q: u64, ell: u64, n: i64) -> Rational {
    if q == ell {
        rat(ramanujan_sum(ell, n))
    } else {
        Rational::zero()
    }
}

fn shifted_orthogonality_on(ctx: &SmoothContext, smooth: &[u64], q: u64, ell: u64, n: i64, x: u64) -> BoundedValue {
    let upto = &smooth[..smooth.partition_point(|&t| t <= x)];
    let sum = ctx.weighted_reciprocal_sum(upto, |t| {
        ramanujan_sum(q, n + t as i64) * ramanujan_sum(ell, t as i64)
    });
    let p = ctx.totient_product();
    let radius = p * rat_u(q * ell) * ctx.smooth_reciprocal_tail(x);
    BoundedValue::new(p * sum, radius)
}

/// `(1/H) sum_{t smooth, t <= X} c_q(n+t) c_ell(t) / t` with radius
/// `q ell T(X) / H`, `H = sum_{t smooth} 1/t`.
pub fn shifted_orthogonality_eval(ctx: &SmoothContext, q: u64, ell: u64, n: i64, x: u64) -> Result<BoundedValue> {
    if q == 0 || ell == 0 || !ctx.is_smooth(q) || !ctx.is_smooth(ell) {
        return Err(domain(format!("q = {q} and ell = {ell} must be {}-smooth", ctx.bound())));
    }
    if x == 0 {
        return Err(domain("truncation point must be positive"));
    }
    Ok(shifted_orthogonality_on(ctx, &ctx.smooth_up_to(x), q, ell, n, x))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    #[serde(rename = "Q")]
    pub bound: u64,
    /// Largest `q`, `ell` visited.
    pub index_max: u64,
    /// Largest `|n|` visited.
    pub shift_max: u64,
    pub x_start: u64,
    pub x_cap: u64,
    /// Doubling stops once the radius is at most this.
    #[serde(serialize_with = "ser_rational")]
    pub resolution: Rational,
}

impl SweepConfig {
    /// Indices and shifts up to `lcm(1..Q)`, `X` from `10^4` doubled up to
    /// `2^20`.
    pub fn new(bound: u64) -> Result<Self> {
        let period = lcm_up_to(bound).ok_or_else(|| domain("lcm(1..Q) overflows u64"))?;
        Ok(Self {
            bound,
            index_max: period,
            shift_max: period,
            x_start: 10_000,
            x_cap: 1 << 20,
            resolution: Rational::new(1.into(), 1_000_000.into()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub witness: Option<SweepPoint>,
    pub points_examined: usize,
    pub undecided: Vec<SweepPoint>,
}

/// `0, 1, -1, 2, -2, ...` up to `|n| <= max`.
fn shift_order(max: u64) -> Vec<i64> {
    let mut out = vec![0i64];
    for k in 1..=max as i64 {
        out.push(k);
        out.push(-k);
    }
    out
}

/// Smooth integers up to the cap with `D / t` precomputed, `D` the common
/// denominator, so nested truncations can be summed incrementally.
struct SweepTerms {
    checkpoints: Vec<u64>,
    /// `sum_{t smooth, t > x} 1/t` at each checkpoint.
    tails: Vec<Rational>,
    smooth: Vec<u64>,
    den: BigInt,
    scaled: Vec<BigInt>,
    scaled_small: Option<Vec<i128>>,
}

impl SweepTerms {
    fn new(ctx: &SmoothContext, cfg: &SweepConfig) -> Self {
        let checkpoints = checkpoints(cfg);
        let cap = *checkpoints.last().expect("nonempty");
        let tails = checkpoints.iter().map(|&x| ctx.smooth_reciprocal_tail(x)).collect();
        let smooth = ctx.smooth_up_to(cap);
        let den = ctx.common_denominator(cap);
        let scaled: Vec<BigInt> = smooth.iter().map(|&t| &den / t).collect();
        let scaled_small = scaled.iter().map(|v| v.to_i128()).collect();
        Self {
            checkpoints,
            tails,
            smooth,
            den,
            scaled,
            scaled_small,
        }
    }

    /// Numerators of the truncations at each checkpoint in `xs` (ascending).
    fn nested_sums(&self, w: impl Fn(u64) -> i64, xs: &[u64]) -> Vec<BigInt> {
        let mut out = Vec::with_capacity(xs.len());
        let mut big = BigInt::zero();
        let mut small: i128 = 0;
        let mut use_small = self.scaled_small.is_some();
        let mut i = 0;
        for &x in xs {
            while i < self.smooth.len() && self.smooth[i] <= x {
                let v = w(self.smooth[i]);
                if v != 0 {
                    let next = self.scaled_small.as_ref().filter(|_| use_small).and_then(|sc| {
                        sc[i].checked_mul(v as i128).and_then(|p| small.checked_add(p))
                    });
                    match next {
                        Some(n) => small = n,
                        None => {
                            if use_small {
                                big += BigInt::from(small);
                                small = 0;
                                use_small = false;
                            }
                            big += &self.scaled[i] * v;
                        }
                    }
                }
                i += 1;
            }
            out.push(&big + BigInt::from(small));
        }
        out
    }
}

fn checkpoints(cfg: &SweepConfig) -> Vec<u64> {
    let cap = cfg.x_cap.max(cfg.x_start);
    let mut xs = vec![cfg.x_start];
    while *xs.last().unwrap() < cap {
        let next = xs.last().unwrap().saturating_mul(2).min(cap);
        xs.push(next);
    }
    xs
}

fn decide_point(ctx: &SmoothContext, terms: &SweepTerms, cfg: &SweepConfig, q: u64, ell: u64, n: i64) -> SweepPoint {
    let conjectured = shifted_orthogonality_value(q, ell, n);
    let xs = &terms.checkpoints;
    let row_q = ramanujan_row(q);
    let row_l = ramanujan_row(ell);
    let sums = terms.nested_sums(
        |t| {
            let m = (n + t as i64).rem_euclid(q as i64) as usize;
            row_q[m] * row_l[(t % ell) as usize]
        },
        xs,
    );
    let p = ctx.totient_product();
    let scale = p * rat_u(q * ell);
    let mut last = None;
    for ((&x, num), tail) in xs.iter().zip(sums).zip(&terms.tails) {
        let value = BoundedValue::new(p * Rational::new(num, terms.den.clone()), &scale * tail);
        let excluded = !value.contains(&conjectured);
        let status = if excluded {
            PointStatus::Violated
        } else {
            PointStatus::Undecided
        };
        let done = excluded || value.radius() <= &cfg.resolution;
        last = Some((x, value, status));
        if done {
            break;
        }
    }
    let (x, value, status) = last.expect("at least one checkpoint");
    SweepPoint {
        q,
        ell,
        n,
        x,
        value,
        conjectured,
        status,
    }
}

/// Visits `q`, then `ell`, then `|n|` in ascending order and stops at the
/// first certified violation. Points are evaluated concurrently one `q` row
/// at a time; the witness is the first in visiting order.
pub fn shifted_orthogonality_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.x_start == 0 || cfg.x_cap == 0 || cfg.index_max == 0 {
        return Err(domain("sweep bounds must be positive"));
    }
    let ctx = SmoothContext::new(cfg.bound)?;
    let terms = SweepTerms::new(&ctx, cfg);
    let indices = ctx.smooth_up_to(cfg.index_max);
    let shifts = shift_order(cfg.shift_max);
    let mut undecided = Vec::new();
    let mut examined = 0;
    for &q in &indices {
        let row: Vec<(u64, i64)> = indices
            .iter()
            .flat_map(|&ell| shifts.iter().map(move |&n| (ell, n)))
            .collect();
        let results: Vec<SweepPoint> = row
            .par_iter()
            .map(|&(ell, n)| decide_point(&ctx, &terms, cfg, q, ell, n))
            .collect();
        for point in results {
            examined += 1;
            match point.status {
                PointStatus::Violated => {
                    return Ok(SweepReport {
                        config: cfg.clone(),
                        witness: Some(point),
                        points_examined: examined,
                        undecided,
                    })
                }
                PointStatus::Undecided => undecided.push(point),
            }
        }
    }
    Ok(SweepReport {
        config: cfg.clone(),
        witness: None,
        points_examined: examined,
        undecided,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualRow {
    pub a: u64,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub defect: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    #[serde(rename = "N")]
    pub length: u64,
    #[serde(rename = "Q")]
    pub range: u64,
    pub a_max: u64,
    /// `delta` in the shift window `a <= N^(1 - delta)`.
    #[serde(serialize_with = "ser_rational")]
    pub window_delta: Rational,
    /// `floor(N^(1 - window_delta))`.
    pub window: u64,
    /// `delta` in the error envelope `N^(1 - delta)`.
    #[serde(serialize_with = "ser_rational")]
    pub envelope_delta: Rational,
    pub envelope: BoundedValue,
    pub rows: Vec<ResidualRow>,
    #[serde(serialize_with = "ser_rational")]
    pub max_abs_defect: Rational,
    #[serde(serialize_with = "ser_rational_opt")]
    pub max_abs_defect_in_window: Option<Rational>,
}

fn check_delta(delta: &Rational) -> Result<()> {
    if delta.is_negative() || *delta > rat(1) {
        return Err(domain("delta must lie in [0, 1]"));
    }
    Ok(())
}

/// Exact defects `C(N, a) - RHS(a)` for `a <= a_max`, with summaries over
/// all rows and over `a <= N^(1 - window_delta)`.
pub fn approximate_reef_residual(
    pair: &BhPair,
    a_max: u64,
    window_delta: &Rational,
    envelope_delta: &Rational,
) -> Result<ResidualReport> {
    let n = pair.length();
    if a_max == 0 || a_max > n {
        return Err(domain(format!("need 1 <= a_max <= N, got a_max = {a_max}, N = {n}")));
    }
    check_delta(window_delta)?;
    check_delta(envelope_delta)?;
    let (wlo, _) = pow_bounds(&rat_u(n), &(rat(1) - window_delta));
    let window = wlo.floor().to_integer().to_u64().unwrap_or(0);
    let (elo, ehi) = pow_bounds(&rat_u(n), &(rat(1) - envelope_delta));
    let envelope = BoundedValue::new((&elo + &ehi) / rat(2), (&ehi - &elo) / rat(2));

    let top = a_max.max(window);
    let lhs = correlation_shifts(pair, top);
    let coefs = reef_coefficients(pair);
    let rows: Vec<ResidualRow> = lhs
        .into_iter()
        .enumerate()
        .map(|(i, lhs)| {
            let a = i as u64 + 1;
            let rhs = expand(&coefs, a);
            ResidualRow {
                a,
                defect: &lhs - &rhs,
                lhs,
                rhs,
            }
        })
        .collect();
    let max_in_window = rows[..window.min(top) as usize]
        .iter()
        .map(|r| r.defect.abs())
        .max();
    let mut rows = rows;
    rows.truncate(a_max as usize);
    let max_abs_defect = rows.iter().map(|r| r.defect.abs()).max().unwrap_or_default();
    Ok(ResidualReport {
        length: n,
        range: pair.range(),
        a_max,
        window_delta: window_delta.clone(),
        window,
        envelope_delta: envelope_delta.clone(),
        envelope,
        rows,
        max_abs_defect,
        max_abs_defect_in_window: max_in_window,
    })
}

/// `round(sqrt(N))`, at least 1.
pub fn sqrt_range(n: u64) -> u64 {
    let r = n.sqrt();
    // r^2 <= n < (r+1)^2; round up when n >= r^2 + r + 1/2
    if n - r * r > r {
        r + 1
    } else {
        r.max(1)
    }
}
