//! Arithmetic function descriptions, smooth restrictions, the Möbius
//! switch, and functions of bounded range with their finite Ramanujan
//! expansions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::arith::{
    divisors, eratosthenes_transform, euler_phi, factor, format_rational, inverse_transform,
    mobius, parse_rational, rat, rat_u, ratio, ramanujan_sum, FunctionTable, Rational,
};
use crate::error::{domain, Error, Result};
use crate::smooth::SmoothContext;

/// How far growth certificates are audited.
pub const AUDIT_LIMIT: u64 = 10_000;

/// Built-in functions with closed-form Eratosthenes transforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CatalogFunction {
    One,
    Indicator(u64),
    RamanujanSum(u64),
    Mobius,
    MobiusSquared,
    PhiOverN,
}

impl CatalogFunction {
    pub fn value(&self, n: u64) -> Rational {
        assert!(n >= 1);
        match *self {
            CatalogFunction::One => rat(1),
            CatalogFunction::Indicator(n0) => rat((n == n0) as i64),
            CatalogFunction::RamanujanSum(q0) => rat(ramanujan_sum(q0, n as i64)),
            CatalogFunction::Mobius => rat(mobius(n)),
            CatalogFunction::MobiusSquared => rat(mobius(n).abs()),
            CatalogFunction::PhiOverN => ratio(euler_phi(n) as i64, n as i64),
        }
    }

    pub fn transform(&self, d: u64) -> Rational {
        assert!(d >= 1);
        match *self {
            CatalogFunction::One => rat((d == 1) as i64),
            CatalogFunction::Indicator(n0) => {
                if d % n0 == 0 {
                    rat(mobius(d / n0))
                } else {
                    Rational::zero()
                }
            }
            CatalogFunction::RamanujanSum(q0) => {
                if q0 % d == 0 {
                    rat(d as i64 * mobius(q0 / d))
                } else {
                    Rational::zero()
                }
            }
            CatalogFunction::Mobius => {
                let mut v = 1i64;
                for &(_, k) in factor(d).factors() {
                    v *= match k {
                        1 => -2,
                        2 => 1,
                        _ => 0,
                    };
                }
                rat(v)
            }
            CatalogFunction::MobiusSquared => {
                let mut v = 1i64;
                for &(_, k) in factor(d).factors() {
                    v *= if k == 2 { -1 } else { 0 };
                }
                rat(v)
            }
            CatalogFunction::PhiOverN => ratio(mobius(d), d as i64),
        }
    }

    pub fn certificate(&self) -> GrowthCertificate {
        match *self {
            CatalogFunction::One => GrowthCertificate::FiniteSupport { bound: 1 },
            CatalogFunction::RamanujanSum(q0) => GrowthCertificate::FiniteSupport { bound: q0 },
            CatalogFunction::Mobius => GrowthCertificate::Power {
                c: rat(3),
                epsilon: ratio(1, 3),
            },
            CatalogFunction::Indicator(_)
            | CatalogFunction::MobiusSquared
            | CatalogFunction::PhiOverN => GrowthCertificate::Power {
                c: rat(1),
                epsilon: rat(0),
            },
        }
    }

    /// Parses `one`, `indicator:<n0>`, `ramanujan:<q0>`, `mu`, `mu2`, `phi-over-n`.
    pub fn parse(id: &str) -> Option<Self> {
        let positive = |s: &str| s.parse::<u64>().ok().filter(|&v| v >= 1);
        match id {
            "one" => Some(CatalogFunction::One),
            "mu" => Some(CatalogFunction::Mobius),
            "mu2" => Some(CatalogFunction::MobiusSquared),
            "phi-over-n" => Some(CatalogFunction::PhiOverN),
            _ => {
                if let Some(v) = id.strip_prefix("indicator:") {
                    positive(v).map(CatalogFunction::Indicator)
                } else if let Some(v) = id.strip_prefix("ramanujan:") {
                    positive(v).map(CatalogFunction::RamanujanSum)
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for CatalogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogFunction::One => write!(f, "one"),
            CatalogFunction::Indicator(n0) => write!(f, "indicator:{n0}"),
            CatalogFunction::RamanujanSum(q0) => write!(f, "ramanujan:{q0}"),
            CatalogFunction::Mobius => write!(f, "mu"),
            CatalogFunction::MobiusSquared => write!(f, "mu2"),
            CatalogFunction::PhiOverN => write!(f, "phi-over-n"),
        }
    }
}

/// Bound on the Eratosthenes transform: `|F'(d)| <= C d^epsilon`, or
/// `F'(d) = 0` for `d > bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrowthCertificate {
    Power { c: Rational, epsilon: Rational },
    FiniteSupport { bound: u64 },
}

impl GrowthCertificate {
    pub fn validate(&self) -> Result<()> {
        match self {
            GrowthCertificate::Power { c, epsilon } => {
                if !c.is_positive() {
                    return Err(domain("certificate constant must be positive"));
                }
                if epsilon.is_negative() || *epsilon >= Rational::one() {
                    return Err(domain(format!(
                        "certificate exponent must lie in [0, 1), got {}",
                        format_rational(epsilon)
                    )));
                }
                Ok(())
            }
            GrowthCertificate::FiniteSupport { bound } => {
                if *bound == 0 {
                    Err(domain("support bound must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Exact check of the certificate at a single point.
    pub fn holds_at(&self, d: u64, value: &Rational) -> bool {
        match self {
            GrowthCertificate::FiniteSupport { bound } => d <= *bound || value.is_zero(),
            GrowthCertificate::Power { c, epsilon } => {
                // |v|^b <= C^b d^a with epsilon = a/b
                let a = epsilon.numer().to_u32().unwrap_or(u32::MAX);
                let b = epsilon.denom().to_u32().unwrap_or(u32::MAX);
                let lhs = Pow::pow(value.abs(), b);
                let rhs = Pow::pow(c.clone(), b) * Pow::pow(rat_u(d), a);
                lhs <= rhs
            }
        }
    }

    pub fn support_bound(&self) -> Option<u64> {
        match self {
            GrowthCertificate::FiniteSupport { bound } => Some(*bound),
            GrowthCertificate::Power { .. } => None,
        }
    }
}

/// Which of `F` or `F'` a value table holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableMode {
    Direct,
    Eratosthenes,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Source {
    Catalog(CatalogFunction),
    Table {
        mode: TableMode,
        values: FunctionTable,
        transform: FunctionTable,
    },
}

/// An arithmetic function together with its Eratosthenes transform and an
/// optional audited growth certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithmeticFunctionSpec {
    source: Source,
    certificate: Option<GrowthCertificate>,
}

impl ArithmeticFunctionSpec {
    pub fn catalog(f: CatalogFunction) -> Self {
        if let CatalogFunction::Indicator(n0) | CatalogFunction::RamanujanSum(n0) = f {
            assert!(n0 >= 1, "catalog parameter must be positive");
        }
        Self {
            certificate: Some(f.certificate()),
            source: Source::Catalog(f),
        }
    }

    /// A table of `F` (direct) or `F'` (Eratosthenes) on `[1, X]`, with an
    /// optional certificate that is audited before the spec is returned.
    pub fn from_table(
        mode: TableMode,
        table: FunctionTable,
        certificate: Option<GrowthCertificate>,
    ) -> Result<Self> {
        let (values, transform) = match mode {
            TableMode::Direct => {
                let t = eratosthenes_transform(&table);
                (table, t)
            }
            TableMode::Eratosthenes => (inverse_transform(&table), table),
        };
        let spec = Self {
            source: Source::Table {
                mode,
                values,
                transform,
            },
            certificate: None,
        };
        match certificate {
            Some(c) => spec.with_certificate(c),
            None => Ok(spec),
        }
    }

    /// Attaches a certificate after auditing it on `d <= min(10^4, range)`.
    pub fn with_certificate(mut self, cert: GrowthCertificate) -> Result<Self> {
        cert.validate()?;
        let limit = match &self.source {
            Source::Catalog(_) => AUDIT_LIMIT,
            Source::Table { transform, .. } => transform.bound().min(AUDIT_LIMIT),
        };
        for d in 1..=limit {
            let v = self.transform_value(d)?;
            if !cert.holds_at(d, &v) {
                return Err(Error::CertificateAudit {
                    n: d,
                    detail: format!("transform value {} violates the bound", format_rational(&v)),
                });
            }
        }
        if let (Source::Table { transform, .. }, GrowthCertificate::FiniteSupport { bound }) =
            (&self.source, &cert)
        {
            if *bound > transform.bound() {
                return Err(domain(format!(
                    "support bound {bound} exceeds the table length {}",
                    transform.bound()
                )));
            }
        }
        self.certificate = Some(cert);
        Ok(self)
    }

    pub fn certificate(&self) -> Option<&GrowthCertificate> {
        self.certificate.as_ref()
    }

    pub fn catalog_function(&self) -> Option<CatalogFunction> {
        match self.source {
            Source::Catalog(f) => Some(f),
            Source::Table { .. } => None,
        }
    }

    pub fn mode(&self) -> TableMode {
        match &self.source {
            Source::Catalog(_) => TableMode::Eratosthenes,
            Source::Table { mode, .. } => *mode,
        }
    }

    /// Largest `d` with `F'(d)` possibly nonzero, when the support is finite.
    pub fn support_bound(&self) -> Option<u64> {
        self.certificate.as_ref().and_then(|c| c.support_bound())
    }

    pub fn has_finite_support(&self) -> bool {
        self.support_bound().is_some()
    }

    /// Range on which values are known without extrapolation.
    pub fn table_bound(&self) -> Option<u64> {
        match &self.source {
            Source::Catalog(_) => None,
            Source::Table { values, .. } => Some(values.bound()),
        }
    }

    /// `F'(d)`.
    pub fn transform_value(&self, d: u64) -> Result<Rational> {
        if d == 0 {
            return Err(domain("arithmetic functions are defined on n >= 1"));
        }
        match &self.source {
            Source::Catalog(f) => Ok(f.transform(d)),
            Source::Table { transform, .. } => match transform.get(d) {
                Some(v) => Ok(v.clone()),
                None if self.support_bound().is_some_and(|b| d > b) => Ok(Rational::zero()),
                None => Err(Error::OutOfRange {
                    n: d,
                    bound: transform.bound(),
                }),
            },
        }
    }

    /// `F(n)`.
    pub fn value(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Err(domain("arithmetic functions are defined on n >= 1"));
        }
        match &self.source {
            Source::Catalog(f) => Ok(f.value(n)),
            Source::Table { values, .. } => match values.get(n) {
                Some(v) => Ok(v.clone()),
                None => match self.support_bound() {
                    Some(b) => {
                        let mut acc = Rational::zero();
                        for d in divisors(n).into_iter().take_while(|&d| d <= b) {
                            acc += self.transform_value(d)?;
                        }
                        Ok(acc)
                    }
                    None => Err(Error::OutOfRange {
                        n,
                        bound: values.bound(),
                    }),
                },
            },
        }
    }

    /// Values on `[1, x]`.
    pub fn table(&self, x: u64) -> Result<FunctionTable> {
        let values = (1..=x).map(|n| self.value(n)).collect::<Result<Vec<_>>>()?;
        FunctionTable::new(values)
    }

    /// `sum_d |F'(d)|` over a finite support.
    pub fn transform_abs_sum(&self) -> Option<Rational> {
        let b = self.support_bound()?;
        Some(
            (1..=b)
                .map(|d| self.transform_value(d).map(|v| v.abs()).unwrap_or_default())
                .sum(),
        )
    }

    /// Nonzero transform values `(d, F'(d))` over a finite support.
    pub fn transform_support(&self) -> Option<Vec<(u64, Rational)>> {
        let b = self.support_bound()?;
        Some(
            (1..=b)
                .filter_map(|d| {
                    let v = self.transform_value(d).ok()?;
                    (!v.is_zero()).then_some((d, v))
                })
                .collect(),
        )
    }

    pub fn describe(&self) -> String {
        match &self.source {
            Source::Catalog(f) => f.to_string(),
            Source::Table { mode, values, .. } => {
                let m = match mode {
                    TableMode::Direct => "direct",
                    TableMode::Eratosthenes => "eratosthenes",
                };
                format!("table[{m}; 1..={}]", values.bound())
            }
        }
    }
}

pub fn evaluate(spec: &ArithmeticFunctionSpec, n: u64) -> Result<Rational> {
    spec.value(n)
}

/// `F_(Q)(n) = sum_{d | n, d smooth} F'(d)`.
pub fn smooth_restrict(spec: &ArithmeticFunctionSpec, ctx: &SmoothContext, n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(domain("smooth restriction is defined on n >= 1"));
    }
    let t = ctx.smooth_part(n);
    let mut acc = Rational::zero();
    for d in divisors(t) {
        acc += spec.transform_value(d)?;
    }
    Ok(acc)
}

/// `sum_{t | a, t smooth, a/t sifted} F(t)`.
pub fn mobius_switch_rhs(spec: &ArithmeticFunctionSpec, ctx: &SmoothContext, a: u64) -> Result<Rational> {
    if a == 0 {
        return Err(domain("switch is defined on a >= 1"));
    }
    let mut acc = Rational::zero();
    for t in divisors(a) {
        if ctx.is_smooth(t) && ctx.is_sifted(a / t) {
            acc += spec.value(t)?;
        }
    }
    Ok(acc)
}

/// A function `g(m) = sum_{d | m, d <= Q} g'(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeQFunction {
    gprime: Vec<Rational>,
    ghat: Vec<Rational>,
}

impl RangeQFunction {
    pub fn range(&self) -> u64 {
        self.gprime.len() as u64
    }

    pub fn gprime(&self, d: u64) -> Rational {
        if d == 0 || d > self.range() {
            Rational::zero()
        } else {
            self.gprime[d as usize - 1].clone()
        }
    }

    /// `ghat(q) = sum_{d <= Q, q | d} g'(d) / d`; zero beyond the range.
    pub fn ghat(&self, q: u64) -> Rational {
        if q == 0 || q > self.range() {
            Rational::zero()
        } else {
            self.ghat[q as usize - 1].clone()
        }
    }

    pub fn ghat_values(&self) -> &[Rational] {
        &self.ghat
    }

    /// Direct truncated divisor sum at any integer `m` (every `d` divides 0).
    pub fn value(&self, m: i64) -> Rational {
        let mut acc = Rational::zero();
        for (i, v) in self.gprime.iter().enumerate() {
            let d = i as i64 + 1;
            if m % d == 0 {
                acc += v;
            }
        }
        acc
    }

    /// `sum_{q <= Q} ghat(q) c_q(m)`.
    pub fn finite_ramanujan_eval(&self, m: i64) -> Rational {
        let mut acc = Rational::zero();
        for (i, h) in self.ghat.iter().enumerate() {
            if !h.is_zero() {
                acc += h * rat(ramanujan_sum(i as u64 + 1, m));
            }
        }
        acc
    }

    /// `g = c_{q0}` viewed as a function of range `q`.
    pub fn ramanujan_sum(q0: u64, q: u64) -> Result<Self> {
        if q0 == 0 || q0 > q {
            return Err(domain(format!("need 1 <= q0 <= Q, got q0 = {q0}, Q = {q}")));
        }
        let f = CatalogFunction::RamanujanSum(q0);
        build_range_q(&FunctionTable::from_fn(q, |d| f.transform(d)))
    }

    /// `g = 1`, of range 1.
    pub fn constant_one() -> Self {
        build_range_q(&FunctionTable::from_fn(1, |_| rat(1))).expect("nonempty")
    }

    /// The same function as a finite-support spec.
    pub fn to_spec(&self) -> ArithmeticFunctionSpec {
        let table = FunctionTable::new(self.gprime.clone()).expect("nonempty");
        ArithmeticFunctionSpec::from_table(
            TableMode::Eratosthenes,
            table,
            Some(GrowthCertificate::FiniteSupport { bound: self.range() }),
        )
        .expect("a range table always has finite support")
    }
}

pub fn build_range_q(gprime: &FunctionTable) -> Result<RangeQFunction> {
    let q = gprime.bound();
    let g: Vec<Rational> = gprime.values().to_vec();
    let mut ghat = vec![Rational::zero(); q as usize];
    for d in 1..=q {
        let v = &g[d as usize - 1];
        if v.is_zero() {
            continue;
        }
        let term = v / rat_u(d);
        for e in divisors(d) {
            ghat[e as usize - 1] += &term;
        }
    }
    Ok(RangeQFunction { gprime: g, ghat })
}

pub fn finite_ramanujan_eval(g: &RangeQFunction, m: i64) -> Rational {
    g.finite_ramanujan_eval(m)
}

/// Parses the tab-separated table format:
///
/// ```text
/// #mode=direct #C=1/1 #eps=1/2
/// 1	1/1
/// 2	-1/2
/// ```
///
/// Without `#C`/`#eps` the transform is taken to vanish past the table.
pub fn parse_function_text(text: &str) -> Result<ArithmeticFunctionSpec> {
    let mut mode = TableMode::Direct;
    let mut c: Option<Rational> = None;
    let mut eps: Option<Rational> = None;
    let mut entries: BTreeMap<u64, Rational> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        if line.starts_with('#') {
            for tok in line.split_whitespace() {
                let tok = tok
                    .strip_prefix('#')
                    .ok_or_else(|| err(format!("header token without '#': {tok}")))?;
                let (key, val) = tok
                    .split_once('=')
                    .ok_or_else(|| err(format!("header token without '=': {tok}")))?;
                match key {
                    "mode" => {
                        mode = match val {
                            "direct" => TableMode::Direct,
                            "eratosthenes" => TableMode::Eratosthenes,
                            _ => return Err(err(format!("unknown mode {val}"))),
                        }
                    }
                    "C" => c = Some(parse_rational(val).ok_or_else(|| err(format!("bad rational {val}")))?),
                    "eps" => {
                        eps = Some(parse_rational(val).ok_or_else(|| err(format!("bad rational {val}")))?)
                    }
                    "support" if val == "finite" => {}
                    _ => return Err(err(format!("unknown header token {tok}"))),
                }
            }
            continue;
        }
        let mut parts = line.split('\t');
        let (n, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(v), None) => (n.trim(), v.trim()),
            _ => {
                let ws: Vec<&str> = line.split_whitespace().collect();
                if ws.len() != 2 {
                    return Err(err("expected `n<TAB>p/q`".into()));
                }
                (ws[0], ws[1])
            }
        };
        let n: u64 = n
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| err(format!("bad index {n}")))?;
        let v = parse_rational(v).ok_or_else(|| err(format!("bad rational {v}")))?;
        if entries.insert(n, v).is_some() {
            return Err(err(format!("duplicate index {n}")));
        }
    }
    let x = entries.keys().next_back().copied().ok_or(Error::Parse {
        line: 0,
        msg: "no table entries".into(),
    })?;
    if entries.len() as u64 != x {
        let missing = (1..=x).find(|k| !entries.contains_key(k)).unwrap_or(0);
        return Err(Error::Parse {
            line: 0,
            msg: format!("missing index {missing}"),
        });
    }
    let table = FunctionTable::new(entries.into_values().collect())?;
    let cert = match (c, eps) {
        (None, None) => GrowthCertificate::FiniteSupport { bound: x },
        (Some(c), Some(epsilon)) => GrowthCertificate::Power { c, epsilon },
        _ => {
            return Err(Error::Parse {
                line: 0,
                msg: "#C and #eps must be given together".into(),
            })
        }
    };
    ArithmeticFunctionSpec::from_table(mode, table, Some(cert))
}

pub fn parse_function_file(path: &std::path::Path) -> Result<ArithmeticFunctionSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_function_text(&text)
}

/// Renders a spec's values on `[1, x]` in the table format.
pub fn render_function_text(spec: &ArithmeticFunctionSpec, x: u64) -> Result<String> {
    let mut out = String::from("#mode=direct\n");
    for n in 1..=x {
        out.push_str(&format!("{n}\t{}\n", format_rational(&spec.value(n)?)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALOG: [CatalogFunction; 8] = [
        CatalogFunction::One,
        CatalogFunction::Indicator(2),
        CatalogFunction::Indicator(6),
        CatalogFunction::RamanujanSum(3),
        CatalogFunction::RamanujanSum(12),
        CatalogFunction::Mobius,
        CatalogFunction::MobiusSquared,
        CatalogFunction::PhiOverN,
    ];

    fn ctx(q: u64) -> SmoothContext {
        SmoothContext::new(q).unwrap()
    }

    #[test]
    fn catalog_values() {
        assert_eq!(CatalogFunction::One.value(17), rat(1));
        assert_eq!(CatalogFunction::Indicator(2).value(2), rat(1));
        assert_eq!(CatalogFunction::Indicator(2).value(3), rat(0));
        assert_eq!(CatalogFunction::RamanujanSum(3).value(3), rat(2));
    }

    #[test]
    fn closed_form_transforms_match_inversion() {
        for f in CATALOG {
            let values = FunctionTable::from_fn(2000, |n| f.value(n));
            let t = eratosthenes_transform(&values);
            for (d, v) in t.iter() {
                assert_eq!(*v, f.transform(d), "{f} at {d}");
            }
        }
    }

    #[test]
    fn catalog_certificates_pass_audit() {
        for f in CATALOG {
            let spec = ArithmeticFunctionSpec::catalog(f);
            let cert = spec.certificate().unwrap().clone();
            assert!(spec.with_certificate(cert).is_ok(), "{f}");
        }
    }

    #[test]
    fn failing_audit_is_rejected() {
        let phi = FunctionTable::from_fn(100, |d| rat_u(euler_phi(d)));
        let cert = GrowthCertificate::Power {
            c: rat(1),
            epsilon: ratio(1, 2),
        };
        let err = ArithmeticFunctionSpec::from_table(TableMode::Eratosthenes, phi.clone(), Some(cert));
        assert!(matches!(err, Err(Error::CertificateAudit { n: 3, .. })));
        let too_big = GrowthCertificate::Power {
            c: rat(1),
            epsilon: rat(1),
        };
        assert!(ArithmeticFunctionSpec::from_table(TableMode::Eratosthenes, phi, Some(too_big)).is_err());
    }

    #[test]
    fn smooth_restrict_examples() {
        let id = FunctionTable::from_fn(100, rat_u);
        let spec = ArithmeticFunctionSpec::from_table(TableMode::Direct, id, None).unwrap();
        assert_eq!(smooth_restrict(&spec, &ctx(2), 6).unwrap(), rat(2));
        let one = ArithmeticFunctionSpec::catalog(CatalogFunction::One);
        for n in 1..200 {
            assert_eq!(smooth_restrict(&one, &ctx(3), n).unwrap(), rat(1));
        }
        for f in CATALOG {
            let spec = ArithmeticFunctionSpec::catalog(f);
            let c = ctx(5);
            for n in c.smooth_up_to(500) {
                assert_eq!(smooth_restrict(&spec, &c, n).unwrap(), spec.value(n).unwrap());
            }
        }
    }

    #[test]
    fn switch_examples() {
        let one = ArithmeticFunctionSpec::catalog(CatalogFunction::One);
        for q in [2, 3, 5] {
            for a in 1..300 {
                assert_eq!(mobius_switch_rhs(&one, &ctx(q), a).unwrap(), rat(1));
            }
        }
        let c = ctx(3);
        for n0 in [1u64, 2, 6, 5, 10] {
            let spec = ArithmeticFunctionSpec::catalog(CatalogFunction::Indicator(n0));
            for a in 1..=1000 {
                let expected = a % n0 == 0 && c.is_smooth(n0) && c.is_sifted(a / n0);
                assert_eq!(mobius_switch_rhs(&spec, &c, a).unwrap(), rat(expected as i64));
            }
        }
        let id = FunctionTable::from_fn(6, rat_u);
        let spec = ArithmeticFunctionSpec::from_table(TableMode::Direct, id, None).unwrap();
        assert_eq!(mobius_switch_rhs(&spec, &ctx(2), 6).unwrap(), rat(2));
        assert_eq!(
            mobius_switch_rhs(&spec, &ctx(2), 6).unwrap(),
            smooth_restrict(&spec, &ctx(2), 6).unwrap()
        );
    }

    #[test]
    fn switch_identity_on_catalog() {
        for f in CATALOG {
            let spec = ArithmeticFunctionSpec::catalog(f);
            for q in [2, 3, 5, 7] {
                let c = ctx(q);
                for a in 1..=5000 {
                    assert_eq!(
                        smooth_restrict(&spec, &c, a).unwrap(),
                        mobius_switch_rhs(&spec, &c, a).unwrap(),
                        "{f}, Q = {q}, a = {a}"
                    );
                }
            }
        }
    }

    #[test]
    fn restriction_transform_is_masked_transform() {
        for f in CATALOG {
            let spec = ArithmeticFunctionSpec::catalog(f);
            let c = ctx(3);
            let restricted = FunctionTable::from_fn(1000, |n| smooth_restrict(&spec, &c, n).unwrap());
            let t = eratosthenes_transform(&restricted);
            for (d, v) in t.iter() {
                let expected = if c.is_smooth(d) { f.transform(d) } else { rat(0) };
                assert_eq!(*v, expected);
            }
        }
    }

    #[test]
    fn restriction_ignores_sifted_factors() {
        let spec = ArithmeticFunctionSpec::catalog(CatalogFunction::Mobius);
        let c = ctx(3);
        for n in 1..=200u64 {
            for k in (1..=50).filter(|&k| c.is_sifted(k)) {
                let literal: Rational = divisors(n * k)
                    .into_iter()
                    .filter(|&d| c.is_smooth(d))
                    .map(|d| spec.transform_value(d).unwrap())
                    .sum();
                assert_eq!(smooth_restrict(&spec, &c, n * k).unwrap(), literal);
                assert_eq!(smooth_restrict(&spec, &c, n * k).unwrap(), smooth_restrict(&spec, &c, n).unwrap());
            }
        }
    }

    #[test]
    fn range_q_examples() {
        let g = RangeQFunction::constant_one();
        assert_eq!(g.ghat(1), rat(1));
        assert_eq!(g.ghat(2), rat(0));
        for m in 1..50 {
            assert_eq!(g.finite_ramanujan_eval(m), rat(1));
        }

        for q0 in 1..=12u64 {
            let g = RangeQFunction::ramanujan_sum(q0, 12).unwrap();
            for l in 1..=12 {
                assert_eq!(g.ghat(l), rat((l == q0) as i64));
            }
            for m in 1..=100 {
                assert_eq!(g.value(m), rat(ramanujan_sum(q0, m)));
            }
        }
        let c3 = RangeQFunction::ramanujan_sum(3, 5).unwrap();
        assert_eq!(c3.finite_ramanujan_eval(3), rat(2));

        let ones = build_range_q(&FunctionTable::from_fn(4, |_| rat(1))).unwrap();
        assert_eq!(ones.finite_ramanujan_eval(12), rat(4));
        for q in 1..=4u64 {
            let expected: Rational = (1..=4 / q).map(|j| ratio(1, (q * j) as i64)).sum();
            assert_eq!(ones.ghat(q), expected);
        }
    }

    #[test]
    fn finite_expansion_matches_divisor_sum() {
        let mut seed = 7u64;
        for q in [1u64, 2, 5, 9, 12, 20] {
            let table = FunctionTable::from_fn(q, |_| {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ratio(((seed >> 33) % 11) as i64 - 5, ((seed >> 20) % 7) as i64 + 1)
            });
            let g = build_range_q(&table).unwrap();
            for m in -5..=1000i64 {
                assert_eq!(g.finite_ramanujan_eval(m), g.value(m), "Q = {q}, m = {m}");
            }
        }
    }

    #[test]
    fn parse_examples() {
        let spec = parse_function_text("#mode=eratosthenes\n1\t1/1\n").unwrap();
        for n in 1..30 {
            assert_eq!(spec.value(n).unwrap(), rat(1));
        }
        let spec = parse_function_text("1\t1\n2\t0/1\n3\t-2/5\n").unwrap();
        assert_eq!(spec.value(3).unwrap(), ratio(-2, 5));
        assert!(matches!(
            parse_function_text("1\t1\n1\t2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_function_text("1\t1\n3\t1\n").is_err());
        assert!(parse_function_text("1\t0.5\n").is_err());
        assert!(parse_function_text("#mode=weird\n1\t1\n").is_err());
        assert!(parse_function_text("#C=1\n1\t1\n").is_err());
        let spec = parse_function_text("#mode=eratosthenes #C=1/1 #eps=0/1\n1\t1\n2\t-1\n").unwrap();
        assert!(!spec.has_finite_support());
        assert!(spec.value(3).is_err());
    }

    #[test]
    fn render_round_trip() {
        let spec = ArithmeticFunctionSpec::catalog(CatalogFunction::PhiOverN);
        let text = render_function_text(&spec, 40).unwrap();
        let back = parse_function_text(&text).unwrap();
        for n in 1..=40 {
            assert_eq!(back.value(n).unwrap(), spec.value(n).unwrap());
        }
    }

    #[test]
    fn finite_support_table_extends() {
        let g = RangeQFunction::ramanujan_sum(6, 6).unwrap().to_spec();
        for n in 1..=100 {
            assert_eq!(g.value(n).unwrap(), rat(ramanujan_sum(6, n as i64)));
        }
        assert_eq!(
            g.transform_abs_sum().unwrap(),
            (1..=6u64).filter(|d| 6 % d == 0).map(|d| rat(d as i64 * mobius(6 / d).abs())).sum::<Rational>()
        );
    }
}
