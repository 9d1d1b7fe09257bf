//! Carmichael and Wintner coefficients of smooth restrictions, their
//! expansions, decay checks and uniqueness comparison.

use std::collections::BTreeMap;
use std::io::Write;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{
    divisors, euler_phi, format_rational, gcd, lcm, mobius, omega, rat, rat_u, ramanujan_sum,
    Rational,
};
use crate::bounds::pow_upper;
use crate::error::{domain, Error, Result};
use crate::interval::BoundedValue;
use crate::smooth::{SmoothContext, TailParams};
use crate::transforms::{smooth_restrict, ArithmeticFunctionSpec, GrowthCertificate};

/// How a coefficient value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientMethod {
    /// Index outside the smooth set; the coefficient vanishes.
    Zero,
    /// Finite transform support; no truncation.
    Exact,
    /// Partial sum with a certified tail radius.
    Truncated,
}

impl CoefficientMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoefficientMethod::Zero => "zero",
            CoefficientMethod::Exact => "exact",
            CoefficientMethod::Truncated => "truncated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientRecord {
    pub ell: u64,
    pub wintner: BoundedValue,
    pub carmichael_formula: BoundedValue,
    pub carmichael_empirical: Vec<(u64, Rational)>,
    pub method: CoefficientMethod,
}

impl CoefficientRecord {
    pub fn consistent(&self) -> bool {
        self.wintner.intersects(&self.carmichael_formula)
    }
}

fn power_certificate(spec: &ArithmeticFunctionSpec) -> Result<(Rational, Rational)> {
    match spec.certificate() {
        Some(GrowthCertificate::Power { c, epsilon }) => Ok((c.clone(), epsilon.clone())),
        Some(GrowthCertificate::FiniteSupport { .. }) => {
            Err(domain("finite-support spec has no power certificate"))
        }
        None => Err(Error::MissingCertificate(spec.describe())),
    }
}

/// Upper bound for `sum_{t smooth, t > x} t^sigma`, also trying the Rankin
/// exponent `delta` when it is admissible.
fn series_tail(ctx: &SmoothContext, sigma: &Rational, x: u64, delta: Option<&Rational>) -> Result<Rational> {
    let mut best = ctx.power_tail_upper(sigma, x)?;
    if let Some(d) = delta {
        if d.is_positive() && (sigma + d).is_negative() {
            let r = ctx.rankin_bound(sigma, d, x)?;
            if r < best {
                best = r;
            }
        }
    }
    Ok(best)
}

/// `Win_ell(F_(V)) = sum_{d smooth, ell | d} F'(d) / d`.
pub fn wintner_restricted(
    spec: &ArithmeticFunctionSpec,
    ctx: &SmoothContext,
    ell: u64,
    tp: &TailParams,
) -> Result<BoundedValue> {
    if ell == 0 {
        return Err(domain("coefficient index must be positive"));
    }
    if !ctx.is_smooth(ell) {
        return Ok(BoundedValue::zero());
    }
    if let Some(bound) = spec.support_bound() {
        let mut acc = Rational::zero();
        for k in ctx.smooth_up_to(bound / ell) {
            let d = ell * k;
            acc += spec.transform_value(d)? / rat_u(d);
        }
        return Ok(BoundedValue::exact(acc));
    }
    let (c, eps) = power_certificate(spec)?;
    let kmax = tp.x / ell;
    let mut acc = Rational::zero();
    for k in ctx.smooth_up_to(kmax) {
        let d = ell * k;
        acc += spec.transform_value(d)? / rat_u(d);
    }
    let sigma = &eps - Rational::one();
    let tail = series_tail(ctx, &sigma, kmax, Some(&tp.delta))?;
    let radius = c * pow_upper(&rat_u(ell), &sigma) * tail;
    Ok(BoundedValue::new(acc, radius))
}

/// `sum_{e | ell} mu(ell/e) gcd(e, d)`.
fn gcd_mobius_sum(ell: u64, d: u64) -> i64 {
    divisors(ell)
        .into_iter()
        .map(|e| mobius(ell / e) * gcd(e, d) as i64)
        .sum()
}

/// Upper bound for `sum_{t smooth, t > x} |F(t)| / t` from the certificate
/// on `F'`.
fn value_tail(ctx: &SmoothContext, c: &Rational, eps: &Rational, x: u64) -> Result<Rational> {
    if eps.is_zero() {
        // |F(t)| <= C tau(t) and sum_{t smooth} tau(t)/t = H^2
        let h = ctx.smooth_harmonic();
        let head: Rational = ctx
            .smooth_up_to(x)
            .into_iter()
            .map(|t| rat(divisors(t).len() as i64) / rat_u(t))
            .sum();
        return Ok(c * (h * h - head));
    }
    let mut best: Option<Rational> = None;
    for k in 1..16 {
        let delta = Rational::new(k.into(), 16.into());
        let s1 = eps + &delta - Rational::one();
        if !s1.is_negative() {
            break;
        }
        let s2 = &delta - Rational::one();
        let b = pow_upper(&rat_u(x.max(1)), &(-&delta))
            * ctx.euler_product_upper(&s1)?
            * ctx.euler_product_upper(&s2)?;
        if best.as_ref().map_or(true, |bb| b < *bb) {
            best = Some(b);
        }
    }
    let b = best.ok_or_else(|| domain("no admissible Rankin exponent"))?;
    Ok(c * b)
}

/// `P / phi(ell) * sum_{t smooth} F(t) c_ell(t) / t` for smooth `ell`.
pub fn carmichael_formula(
    spec: &ArithmeticFunctionSpec,
    ctx: &SmoothContext,
    ell: u64,
    tp: &TailParams,
) -> Result<BoundedValue> {
    if ell == 0 || !ctx.is_smooth(ell) {
        return Err(domain(format!("index {ell} is not smooth for V = {}", ctx.bound())));
    }
    let phi = rat_u(euler_phi(ell));
    if let Some(support) = spec.transform_support() {
        let mut acc = Rational::zero();
        for (d, v) in support {
            if ctx.is_smooth(d) {
                acc += v / rat_u(d) * rat(gcd_mobius_sum(ell, d));
            }
        }
        return Ok(BoundedValue::exact(acc / phi));
    }
    let (c, eps) = power_certificate(spec)?;
    let mut acc = Rational::zero();
    for t in ctx.smooth_up_to(tp.x) {
        let ft = spec.value(t)?;
        if ft.is_zero() {
            continue;
        }
        acc += ft * rat(ramanujan_sum(ell, t as i64)) / rat_u(t);
    }
    let scale = ctx.totient_product() / &phi;
    let tail = value_tail(ctx, &c, &eps, tp.x)?;
    Ok(BoundedValue::new(&scale * acc, scale * rat_u(ell) * tail))
}

/// `(x, (1/phi(ell)) (1/x) sum_{n<=x} F(n) c_ell(n))` for each `x`.
pub fn carmichael_empirical(
    spec: &ArithmeticFunctionSpec,
    ell: u64,
    xs: &[u64],
) -> Result<Vec<(u64, Rational)>> {
    if ell == 0 {
        return Err(domain("coefficient index must be positive"));
    }
    if xs.is_empty() || xs.windows(2).any(|w| w[0] > w[1]) || xs[0] == 0 {
        return Err(domain("sample points must be a nonempty ascending list of positive integers"));
    }
    let phi = rat_u(euler_phi(ell));
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = Rational::zero();
    let mut n = 0u64;
    for &x in xs {
        while n < x {
            n += 1;
            let c = ramanujan_sum(ell, n as i64);
            if c != 0 {
                acc += spec.value(n)? * rat(c);
            }
        }
        out.push((x, &acc / (&phi * rat_u(x))));
    }
    Ok(out)
}

/// Cesàro limit of a periodic function against `c_ell`. `values[a - 1]` is
/// `F(a)`; at least two periods are required and audited.
pub fn carmichael_periodic_exact(values: &[Rational], period: u64, ell: u64) -> Result<Rational> {
    if period == 0 || ell == 0 {
        return Err(domain("period and index must be positive"));
    }
    let t = period as usize;
    if values.len() < 2 * t {
        return Err(domain("need values over two periods for the audit"));
    }
    for a in 0..values.len() - t {
        if values[a] != values[a + t] {
            return Err(Error::PeriodAudit {
                a: a as u64 + 1,
                period,
            });
        }
    }
    let l = lcm(period, ell);
    let mut acc = Rational::zero();
    for a in 1..=l {
        let c = ramanujan_sum(ell, a as i64);
        if c != 0 {
            acc += &values[((a - 1) % period) as usize] * rat(c);
        }
    }
    Ok(acc / (rat_u(l) * rat_u(euler_phi(ell))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionPartial {
    /// `sum_{ell smooth, ell <= L} Win_ell c_ell(a)` with propagated radii.
    pub partial: BoundedValue,
    /// Bound on the omitted indices `ell > L`.
    pub index_tail: Rational,
    /// `F_(V)(a)`.
    pub target: Rational,
}

impl ExpansionPartial {
    pub fn residual(&self) -> Rational {
        (self.partial.center() - &self.target).abs()
    }

    pub fn residual_bound(&self) -> Rational {
        self.partial.radius() + &self.index_tail
    }

    pub fn consistent(&self) -> bool {
        self.residual() <= self.residual_bound()
    }
}

/// Smooth indices `ell <= l` with `c_ell(a) != 0`, and whether they exhaust
/// all smooth indices with that property. Such `ell` divide
/// `smooth_part(a) * P_V`.
pub fn expansion_indices(ctx: &SmoothContext, a: u64, l: u64) -> (Vec<u64>, bool) {
    match ctx.primorial().and_then(|p| p.checked_mul(ctx.smooth_part(a))) {
        Some(m) => {
            let idx = divisors(m).into_iter().filter(|&e| e <= l).collect();
            (idx, l >= m)
        }
        None => {
            let idx = ctx
                .smooth_up_to(l)
                .into_iter()
                .filter(|&e| ramanujan_sum(e, a as i64) != 0)
                .collect();
            (idx, false)
        }
    }
}

/// Partial Ramanujan expansion of `F_(V)` at `a` over smooth indices `<= L`.
pub fn re_expansion_partial(
    spec: &ArithmeticFunctionSpec,
    ctx: &SmoothContext,
    a: u64,
    l: u64,
    tp: &TailParams,
) -> Result<ExpansionPartial> {
    if a == 0 || l == 0 {
        return Err(domain("shift and index cutoff must be positive"));
    }
    let (indices, complete) = expansion_indices(ctx, a, l);
    let mut partial = BoundedValue::zero();
    for ell in indices {
        let c = ramanujan_sum(ell, a as i64);
        if c == 0 {
            continue;
        }
        let w = wintner_restricted(spec, ctx, ell, tp)?;
        partial = &partial + &w.scale(&rat(c));
    }
    let index_tail = match spec.support_bound() {
        _ if complete => Rational::zero(),
        Some(bound) => {
            let mut acc = Rational::zero();
            for ell in ctx.smooth_up_to(bound).into_iter().filter(|&e| e > l) {
                let c = ramanujan_sum(ell, a as i64);
                if c != 0 {
                    acc += wintner_restricted(spec, ctx, ell, tp)?.abs_upper() * rat(c.abs());
                }
            }
            acc
        }
        None => {
            let (c, eps) = power_certificate(spec)?;
            let sigma = &eps - Rational::one();
            let full = if eps.is_zero() {
                ctx.smooth_harmonic().clone()
            } else {
                ctx.euler_product_upper(&sigma)?
            };
            rat_u(a) * c * full * series_tail(ctx, &sigma, l, None)?
        }
    };
    Ok(ExpansionPartial {
        partial,
        index_tail,
        target: smooth_restrict(spec, ctx, a)?,
    })
}

/// `(sum_{ell <= L} 2^omega(ell) |coef|, bound on the rest)`.
pub fn dual_delange_check(
    records: &[CoefficientRecord],
    spec: &ArithmeticFunctionSpec,
    ctx: &SmoothContext,
    l: u64,
    tp: &TailParams,
) -> Result<(Rational, Rational)> {
    let by_ell: BTreeMap<u64, &CoefficientRecord> = records.iter().map(|r| (r.ell, r)).collect();
    let mut partial = Rational::zero();
    for ell in ctx.smooth_up_to(l) {
        let r = by_ell
            .get(&ell)
            .ok_or_else(|| domain(format!("no coefficient record for ell = {ell}")))?;
        partial += rat(1i64 << omega(ell)) * r.wintner.abs_upper();
    }
    let tail = match spec.support_bound() {
        Some(bound) => {
            let mut acc = Rational::zero();
            for ell in ctx.smooth_up_to(bound).into_iter().filter(|&e| e > l) {
                acc += rat(1i64 << omega(ell)) * wintner_restricted(spec, ctx, ell, tp)?.abs_upper();
            }
            acc
        }
        None => {
            let (c, eps) = power_certificate(spec)?;
            let sigma = &eps - Rational::one();
            let full = if eps.is_zero() {
                ctx.smooth_harmonic().clone()
            } else {
                ctx.euler_product_upper(&sigma)?
            };
            ctx.squarefree_kernel_count() * c * full * series_tail(ctx, &sigma, l, None)?
        }
    };
    Ok((partial, tail))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniquenessReport {
    /// Indices where the candidate lies outside the certified coefficient.
    pub flagged: Vec<u64>,
    /// Candidate indices without a record.
    pub unchecked: Vec<u64>,
}

impl UniquenessReport {
    pub fn consistent(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Compares a candidate coefficient system with the records. Missing
/// candidate entries count as zero.
pub fn uniqueness_compare(
    candidate: &BTreeMap<u64, Rational>,
    records: &[CoefficientRecord],
) -> UniquenessReport {
    let mut flagged = Vec::new();
    for r in records {
        let v = candidate.get(&r.ell).cloned().unwrap_or_default();
        if !r.wintner.contains(&v) {
            flagged.push(r.ell);
        }
    }
    let known: std::collections::BTreeSet<u64> = records.iter().map(|r| r.ell).collect();
    let unchecked = candidate
        .keys()
        .filter(|k| !known.contains(k))
        .copied()
        .collect();
    UniquenessReport { flagged, unchecked }
}

/// Records for every `ell <= L`, computed in parallel and ordered by `ell`.
pub fn coefficient_records(
    spec: &ArithmeticFunctionSpec,
    ctx: &SmoothContext,
    l: u64,
    tp: &TailParams,
    empirical_xs: &[u64],
) -> Result<Vec<CoefficientRecord>> {
    (1..=l)
        .into_par_iter()
        .map(|ell| {
            let smooth = ctx.is_smooth(ell);
            let wintner = wintner_restricted(spec, ctx, ell, tp)?;
            let carmichael_formula = if smooth {
                carmichael_formula(spec, ctx, ell, tp)?
            } else {
                BoundedValue::zero()
            };
            let carmichael_empirical = if empirical_xs.is_empty() {
                Vec::new()
            } else {
                carmichael_empirical(spec, ell, empirical_xs)?
            };
            let method = if !smooth {
                CoefficientMethod::Zero
            } else if wintner.is_exact() && carmichael_formula.is_exact() {
                CoefficientMethod::Exact
            } else {
                CoefficientMethod::Truncated
            };
            Ok(CoefficientRecord {
                ell,
                wintner,
                carmichael_formula,
                carmichael_empirical,
                method,
            })
        })
        .collect()
}

pub fn write_coefficients_csv<W: Write>(mut w: W, records: &[CoefficientRecord]) -> Result<()> {
    writeln!(w, "ell,win_center,win_radius,car_center,car_radius,method")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.ell,
            format_rational(r.wintner.center()),
            format_rational(r.wintner.radius()),
            format_rational(r.carmichael_formula.center()),
            format_rational(r.carmichael_formula.radius()),
            r.method.as_str()
        )?;
    }
    Ok(())
}

/// Default target radius for automatic truncation.
pub fn default_target() -> Rational {
    Rational::new(1.into(), 1_000_000.into())
}

/// Doubles the truncation point from `start` until `eval` returns a radius
/// at most `target`, failing at `cap`.
pub fn truncate_to_target<F>(start: u64, cap: u64, target: &Rational, mut eval: F) -> Result<(u64, BoundedValue)>
where
    F: FnMut(u64) -> Result<BoundedValue>,
{
    let mut x = start.max(1);
    loop {
        let v = eval(x)?;
        if v.radius() <= target {
            return Ok((x, v));
        }
        if x >= cap {
            return Err(Error::TruncationCap { cap });
        }
        x = (x.saturating_mul(2)).min(cap);
    }
}
