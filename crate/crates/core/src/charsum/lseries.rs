//! Exact L-series over `Q(ζ_p)` and rational-function recovery.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::geometry::Q;
use crate::padic::PadicScalar;

use super::{CycRational, CyclotomicInteger};

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesCoeffs {
    Exact(Vec<CycRational>),
    Padic(Vec<PadicScalar>),
}

impl SeriesCoeffs {
    pub fn len(&self) -> usize {
        match self {
            SeriesCoeffs::Exact(v) => v.len(),
            SeriesCoeffs::Padic(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A power series in `T` together with whatever has been derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct LSeriesReport {
    pub p: u64,
    pub series: SeriesCoeffs,
    /// Certified p-adic digits of every coefficient (`u32::MAX` when exact).
    pub precision: u32,
    pub recovered: Option<(Vec<CycRational>, Vec<CycRational>)>,
    pub unit_root: Option<(PadicScalar, u32)>,
    pub newton_polygon: Vec<(usize, Q)>,
}

impl LSeriesReport {
    pub fn exact(p: u64, coeffs: Vec<CycRational>) -> Self {
        LSeriesReport {
            p,
            series: SeriesCoeffs::Exact(coeffs),
            precision: u32::MAX,
            recovered: None,
            unit_root: None,
            newton_polygon: Vec::new(),
        }
    }

    pub fn padic(p: u64, coeffs: Vec<PadicScalar>, precision: u32) -> Self {
        LSeriesReport {
            p,
            series: SeriesCoeffs::Padic(coeffs),
            precision,
            recovered: None,
            unit_root: None,
            newton_polygon: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.series.len().saturating_sub(1)
    }

    pub fn exact_coeffs(&self) -> Result<&[CycRational]> {
        match &self.series {
            SeriesCoeffs::Exact(v) => Ok(v),
            SeriesCoeffs::Padic(_) => Err(Error::Invalid("series has p-adic coefficients".into())),
        }
    }

    pub fn padic_coeffs(&self) -> Result<&[PadicScalar]> {
        match &self.series {
            SeriesCoeffs::Padic(v) => Ok(v),
            SeriesCoeffs::Exact(_) => Err(Error::Invalid("series has exact coefficients".into())),
        }
    }
}

fn ratio(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `exp(Σ_{m ≤ d_T} S_m T^m / m)` to degree `d_T`.
pub fn l_series(p: u64, sums: &[CyclotomicInteger], d_t: usize) -> Result<LSeriesReport> {
    if sums.len() < d_t {
        return Err(Error::Invalid(format!("need {d_t} sums, got {}", sums.len())));
    }
    let s: Vec<CycRational> = sums.iter().map(|x| x.to_rational()).collect();
    let mut l = vec![CycRational::one(p)];
    for k in 1..=d_t {
        let mut acc = CycRational::zero(p);
        for m in 1..=k {
            acc = acc.add(&s[m - 1].mul(&l[k - m]));
        }
        let c = acc.scale(&ratio(k as i64).recip());
        if !c.is_integral() {
            return Err(Error::Invalid(format!("coefficient of T^{k} is not integral")));
        }
        l.push(c);
    }
    Ok(LSeriesReport::exact(p, l))
}

/// Power sums `S_m` recovered from `L = exp(Σ S_m T^m/m)`.
pub fn log_sums(report: &LSeriesReport) -> Result<Vec<CycRational>> {
    let l = report.exact_coeffs()?;
    let mut s: Vec<CycRational> = Vec::new();
    for k in 1..l.len() {
        // k L_k = Σ_{m=1}^{k} S_m L_{k-m}
        let mut acc = l[k].scale(&ratio(k as i64));
        for m in 1..k {
            acc = acc.sub(&s[m - 1].mul(&l[k - m]));
        }
        s.push(acc);
    }
    Ok(s)
}

/// `1/a` to `len` terms.
pub fn inverse_exact(p: u64, a: &[CycRational], len: usize) -> Result<Vec<CycRational>> {
    let inv0 = a
        .first()
        .and_then(|c| c.inv())
        .ok_or_else(|| Error::Invalid("series with zero constant term".into()))?;
    let mut out = vec![inv0.clone()];
    for k in 1..len {
        let mut acc = CycRational::zero(p);
        for i in 1..=k.min(a.len() - 1) {
            acc = acc.add(&a[i].mul(&out[k - i]));
        }
        out.push(acc.mul(&inv0).neg());
    }
    Ok(out)
}

pub fn mul_exact(p: u64, a: &[CycRational], b: &[CycRational], len: usize) -> Vec<CycRational> {
    (0..len)
        .map(|k| {
            let mut acc = CycRational::zero(p);
            for i in 0..=k {
                if i < a.len() && k - i < b.len() {
                    acc = acc.add(&a[i].mul(&b[k - i]));
                }
            }
            acc
        })
        .collect()
}

/// `L^{(-1)^{n+1}}`.
pub fn signed_power(report: &LSeriesReport, n: usize) -> Result<LSeriesReport> {
    if n % 2 == 1 {
        return Ok(report.clone());
    }
    let inv = inverse_exact(report.p, report.exact_coeffs()?, report.series.len())?;
    Ok(LSeriesReport::exact(report.p, inv))
}

/// Berlekamp–Massey over `Q(ζ_p)`: connection polynomial and linear complexity.
pub fn berlekamp_massey(p: u64, s: &[CycRational]) -> (Vec<CycRational>, usize) {
    let mut c = vec![CycRational::one(p)];
    let mut b = vec![CycRational::one(p)];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bd = CycRational::one(p);
    for n in 0..s.len() {
        let mut d = s[n].clone();
        for i in 1..=l.min(c.len() - 1) {
            d = d.add(&c[i].mul(&s[n - i]));
        }
        if d.is_zero() {
            m += 1;
            continue;
        }
        let coef = d.mul(&bd.inv().expect("nonzero discrepancy"));
        let mut next = c.clone();
        if next.len() < b.len() + m {
            next.resize(b.len() + m, CycRational::zero(p));
        }
        for (i, bi) in b.iter().enumerate() {
            next[i + m] = next[i + m].sub(&coef.mul(bi));
        }
        if 2 * l <= n {
            b = c;
            l = n + 1 - l;
            bd = d;
            m = 1;
        } else {
            m += 1;
        }
        c = next;
    }
    while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    (c, l)
}

fn trim(mut v: Vec<CycRational>) -> Vec<CycRational> {
    while v.len() > 1 && v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

/// Numerator and denominator of the series as a rational function of degree
/// at most `max_degree`, checked against every known coefficient.
pub fn rational_recover(report: &LSeriesReport, max_degree: usize) -> Result<LSeriesReport> {
    let s = report.exact_coeffs()?;
    let p = report.p;
    if s.len() < 2 * max_degree + 2 {
        return Err(Error::Recovery(format!(
            "series known to degree {} but degree bound {max_degree} needs {}",
            s.len().saturating_sub(1),
            2 * max_degree + 1
        )));
    }
    let (den, l) = berlekamp_massey(p, s);
    if 2 * l > s.len() {
        return Err(Error::Recovery("insufficient degree bound".into()));
    }
    let num = trim(mul_exact(p, s, &den, l.max(1)));
    let den = trim(den);
    if num.len() > max_degree + 1 || den.len() > max_degree + 1 {
        return Err(Error::Recovery("insufficient degree bound".into()));
    }
    let back = mul_exact(p, &num, &inverse_exact(p, &den, s.len())?, s.len());
    if back != s {
        return Err(Error::Recovery("round trip mismatch".into()));
    }
    let mut out = report.clone();
    out.recovered = Some((num, den));
    Ok(out)
}

/// Expansion of a recovered rational function to degree `d`.
pub fn expand(p: u64, num: &[CycRational], den: &[CycRational], d: usize) -> Result<Vec<CycRational>> {
    Ok(mul_exact(p, num, &inverse_exact(p, den, d + 1)?, d + 1))
}
