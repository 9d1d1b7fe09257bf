//! Orthogonality of Ramanujan sums against the smooth harmonic weight
//! `1/t`, `t` running over smooth integers.

use std::io::Write;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::{divisors, euler_phi, factor, format_rational, gcd, mobius, rat, rat_u, ratio, ramanujan_sum, Rational};
use crate::error::{domain, Result};
use crate::interval::BoundedValue;
use crate::smooth::{SmoothContext, TailParams};

/// `sum_{q'|q} mu(q/q') sum_{l'|l} mu(l/l') gcd(l', q')`.
pub fn orthogonality_exact(q: u64, ell: u64) -> Rational {
    let mut acc = 0i64;
    let dl = divisors(ell);
    for qp in divisors(q) {
        let mq = mobius(q / qp);
        if mq == 0 {
            continue;
        }
        for &lp in &dl {
            let ml = mobius(ell / lp);
            if ml != 0 {
                acc += mq * ml * gcd(lp, qp) as i64;
            }
        }
    }
    rat(acc)
}

fn check_smooth(ctx: &SmoothContext, q: u64, ell: u64) -> Result<()> {
    if q == 0 || ell == 0 || !ctx.is_smooth(q) || !ctx.is_smooth(ell) {
        return Err(domain(format!(
            "indices ({q}, {ell}) must be {}-smooth",
            ctx.bound()
        )));
    }
    Ok(())
}

/// `P * sum_{t smooth, t <= X} c_q(t) c_ell(t) / t` with radius
/// `P q ell sum_{t smooth, t > X} 1/t`.
pub fn orthogonality_truncated(ctx: &SmoothContext, q: u64, ell: u64, tp: &TailParams) -> Result<BoundedValue> {
    check_smooth(ctx, q, ell)?;
    let acc = ctx.weighted_reciprocal_sum(&ctx.smooth_up_to(tp.x), |t| {
        ramanujan_sum(q, t as i64) * ramanujan_sum(ell, t as i64)
    });
    let p = ctx.totient_product();
    let radius = p * rat_u(q * ell) * ctx.smooth_reciprocal_tail(tp.x);
    Ok(BoundedValue::new(p * acc, radius))
}

/// The full series `P * sum_{t smooth} c_q(t) c_ell(t) / t`, summed exactly
/// as a product of local geometric series.
pub fn orthogonality_series_exact(ctx: &SmoothContext, q: u64, ell: u64) -> Result<Rational> {
    check_smooth(ctx, q, ell)?;
    Ok(ctx.totient_product() * local_product(ctx, q, ell, |x| x))
}

/// `prod_p sum_{k>=0} h(c_{p^a}(p^k) c_{p^b}(p^k)) / p^k`, where
/// `a`, `b` are the exponents of `p` in `q`, `ell`.
fn local_product(ctx: &SmoothContext, q: u64, ell: u64, h: impl Fn(i64) -> i64) -> Rational {
    let fq = factor(q);
    let fl = factor(ell);
    let exp = |f: &crate::arith::FactoredInteger, p: u64| {
        f.factors().iter().find(|(pp, _)| *pp == p).map_or(0, |(_, k)| *k)
    };
    let mut acc = Rational::one();
    for &p in ctx.primes() {
        let a = exp(&fq, p);
        let b = exp(&fl, p);
        let pa = p.pow(a);
        let pb = p.pow(b);
        let top = a.max(b);
        let mut local = Rational::zero();
        let mut pk = 1u64;
        for _ in 0..top {
            local += ratio(h(ramanujan_sum(pa, pk as i64) * ramanujan_sum(pb, pk as i64)), pk as i64);
            pk *= p;
        }
        // from k = top on both sums are constant: phi(p^a) phi(p^b)
        let stable = h(euler_phi(pa) as i64 * euler_phi(pb) as i64);
        local += ratio(stable, pk as i64) * ratio(p as i64, p as i64 - 1);
        acc *= local;
    }
    acc
}

/// Enclosure `[partial, partial + q ell T(X)]` of
/// `sum_{t smooth} |c_q(t) c_ell(t)| / t`.
pub fn absolute_series_bound(ctx: &SmoothContext, q: u64, ell: u64, tp: &TailParams) -> Result<BoundedValue> {
    check_smooth(ctx, q, ell)?;
    let partial = ctx.weighted_reciprocal_sum(&ctx.smooth_up_to(tp.x), |t| {
        (ramanujan_sum(q, t as i64) * ramanujan_sum(ell, t as i64)).abs()
    });
    let tail = rat_u(q * ell) * ctx.smooth_reciprocal_tail(tp.x);
    let half = &tail / rat(2);
    Ok(BoundedValue::new(partial + &half, half))
}

/// Exact value of the absolute series, by local factors.
pub fn absolute_series_exact(ctx: &SmoothContext, q: u64, ell: u64) -> Result<Rational> {
    check_smooth(ctx, q, ell)?;
    Ok(local_product(ctx, q, ell, |x| x.abs()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalityResult {
    pub q: u64,
    pub ell: u64,
    pub exact_value: Rational,
    pub series_value: Rational,
    pub truncated: BoundedValue,
    pub expected: Rational,
}

impl OrthogonalityResult {
    pub fn exact_ok(&self) -> bool {
        self.exact_value == self.expected && self.series_value == self.expected
    }

    pub fn truncated_ok(&self) -> bool {
        self.truncated.contains(&self.expected)
    }
}

pub fn expected_value(q: u64, ell: u64) -> Rational {
    if q == ell {
        rat_u(euler_phi(ell))
    } else {
        Rational::zero()
    }
}

/// All pairs of smooth indices `<= max`, in row-major order.
pub fn orthogonality_grid(ctx: &SmoothContext, max: u64, tp: &TailParams) -> Result<Vec<OrthogonalityResult>> {
    let idx = ctx.smooth_up_to(max);
    let pairs: Vec<(u64, u64)> = idx
        .iter()
        .flat_map(|&q| idx.iter().map(move |&l| (q, l)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(q, ell)| {
            Ok(OrthogonalityResult {
                q,
                ell,
                exact_value: orthogonality_exact(q, ell),
                series_value: orthogonality_series_exact(ctx, q, ell)?,
                truncated: orthogonality_truncated(ctx, q, ell, tp)?,
                expected: expected_value(q, ell),
            })
        })
        .collect()
}

/// Matrix of exact values: header `q,<ell_1>,<ell_2>,...`, one row per `q`.
pub fn write_orthogonality_csv<W: Write>(mut w: W, ctx: &SmoothContext, max: u64) -> Result<()> {
    let idx = ctx.smooth_up_to(max);
    let header: Vec<String> = idx.iter().map(|l| l.to_string()).collect();
    writeln!(w, "q,{}", header.join(","))?;
    for &q in &idx {
        let row: Vec<String> = idx.iter().map(|&l| format_rational(&orthogonality_exact(q, l))).collect();
        writeln!(w, "{q},{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: u64) -> SmoothContext {
        SmoothContext::new(q).unwrap()
    }

    fn tp(x: u64) -> TailParams {
        TailParams::new(rat(0), ratio(1, 2), x).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(orthogonality_exact(1, 1), rat(1));
        assert_eq!(orthogonality_exact(2, 2), rat(1));
        assert_eq!(orthogonality_exact(2, 3), rat(0));
    }

    #[test]
    fn exact_identity_and_symmetry() {
        for q in 1..=100u64 {
            for ell in 1..=100u64 {
                assert_eq!(orthogonality_exact(q, ell), expected_value(q, ell));
                assert_eq!(orthogonality_exact(q, ell), orthogonality_exact(ell, q));
            }
        }
    }

    #[test]
    fn truncated_examples() {
        let v = orthogonality_truncated(&ctx(2), 2, 2, &tp(1024)).unwrap();
        assert!(v.contains(&rat(1)));
        let one = orthogonality_truncated(&ctx(5), 1, 1, &tp(50)).unwrap();
        assert_eq!(one.upper(), rat(1));
        assert!(one.contains(&rat(1)));
        assert!(orthogonality_truncated(&ctx(3), 2, 3, &tp(500)).unwrap().contains(&rat(0)));
        assert!(orthogonality_truncated(&ctx(3), 5, 3, &tp(500)).is_err());
    }

    #[test]
    fn series_oracle_by_brute_partial_sums() {
        // partial sums far out approach the local-factor value
        let c = ctx(3);
        for (q, ell) in [(2u64, 2u64), (6, 6), (4, 2), (9, 3), (12, 12)] {
            let exact = orthogonality_series_exact(&c, q, ell).unwrap();
            let far = orthogonality_truncated(&c, q, ell, &tp(1 << 40)).unwrap();
            assert!(far.contains(&exact), "({q}, {ell})");
        }
    }

    #[test]
    fn absolute_convergence_examples() {
        let c = ctx(2);
        let b = absolute_series_bound(&c, 1, 1, &tp(64)).unwrap();
        assert_eq!(b.upper(), rat(2));
        assert_eq!(absolute_series_exact(&c, 1, 1).unwrap(), rat(2));
        let b = absolute_series_bound(&c, 2, 2, &tp(64)).unwrap();
        // |c_2(1)|^2 + sum_{k>=1} 2^-k = 2
        assert_eq!(absolute_series_exact(&c, 2, 2).unwrap(), rat(2));
        assert!(b.contains(&rat(2)));
        let mut prev = absolute_series_bound(&ctx(3), 6, 4, &tp(10)).unwrap().upper();
        for x in [20u64, 40, 80, 160, 320] {
            let u = absolute_series_bound(&ctx(3), 6, 4, &tp(x)).unwrap().upper();
            assert!(u <= prev);
            prev = u;
        }
    }

    #[test]
    fn csv_matrix() {
        let mut buf = Vec::new();
        write_orthogonality_csv(&mut buf, &ctx(2), 4).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "q,1,2,4\n1,1/1,0/1,0/1\n2,0/1,1/1,0/1\n4,0/1,0/1,2/1\n"
        );
    }

    #[test]
    fn grid_results() {
        let c = ctx(3);
        let grid = orthogonality_grid(&c, 30, &tp(10_000)).unwrap();
        assert!(grid.iter().all(|r| r.exact_ok()));
        assert!(grid.iter().filter(|r| r.q <= 4 && r.ell <= 4).all(|r| r.truncated_ok()));
    }
}
