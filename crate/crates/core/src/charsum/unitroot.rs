//! Unit roots of fiber L-functions and the unit root L-function.

use std::sync::Arc;

use num_traits::Zero;

use crate::dwork::{embed_cyc_rational, zeta_embed};
use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::ffield::{closed_points, ClosedPoint, FqField, TABLE_LIMIT};
use crate::geometry::{WeightedGeometry, Q};
use crate::padic::{KappaExponent, PadicRing, PadicScalar};
use crate::par::{map_slice, Exec};
use crate::pseries::{self, is_one_unit, newton_polygon, unit_reciprocal_root, valuations};

use super::lseries::{l_series, signed_power, LSeriesReport};
use super::sums::exp_sum;

/// Embed a recovered polynomial into `R[T]`.
pub fn embed_poly(ring: &PadicRing, zeta: &PadicScalar, poly: &[super::CycRational]) -> Result<Vec<PadicScalar>> {
    poly.iter().map(|c| embed_cyc_rational(ring, zeta, c)).collect()
}

/// The unique unit reciprocal root of the recovered numerator.
pub fn unit_root(report: &LSeriesReport, ring: &PadicRing) -> Result<LSeriesReport> {
    let (num, den) = report
        .recovered
        .as_ref()
        .ok_or_else(|| Error::UnitRoot("no recovered rational function".into()))?;
    let zeta = zeta_embed(ring)?;
    let n = embed_poly(ring, &zeta, num)?;
    let d = embed_poly(ring, &zeta, den)?;
    if pseries::slope_zero_length(ring, &d) > 0 {
        return Err(Error::UnitRoot("denominator has a unit root".into()));
    }
    let (root, prec) = unit_reciprocal_root(ring, &n, None)?;
    if !is_one_unit(ring, &root) {
        return Err(Error::UnitRoot("unit root is not a 1-unit".into()));
    }
    let mut out = report.clone();
    out.newton_polygon = newton_polygon(&valuations(ring, &n));
    out.unit_root = Some((root, prec));
    Ok(out)
}

/// Data shared by every fiber of `G(t̄, λ, x)` at a fixed `t̄ ∈ F_q`.
#[derive(Clone, Debug)]
pub struct FiberContext {
    pub family: LaurentFamily,
    pub t_bar: Vec<u32>,
    pub geom_f: WeightedGeometry,
    pub ring: PadicRing,
    pub zeta: PadicScalar,
    pub exec: Exec,
}

impl FiberContext {
    pub fn new(family: &LaurentFamily, t_bar: &[u32], ring: &PadicRing, exec: Exec) -> Result<Self> {
        family.validate()?;
        let geom_f = family.geometry_f()?;
        family.geometry_gamma(&geom_f)?;
        if t_bar.len() != family.num_vars() {
            return Err(Error::DimensionMismatch { expected: family.num_vars(), found: t_bar.len() });
        }
        Ok(FiberContext {
            family: family.clone(),
            t_bar: t_bar.to_vec(),
            geom_f,
            ring: ring.clone(),
            zeta: zeta_embed(ring)?,
            exec,
        })
    }

    /// Degree of `L^{(-1)^{n+1}}` on a nondegenerate fiber.
    pub fn l_degree(&self) -> usize {
        self.geom_f.normalized_volume() as usize
    }

    pub fn base_field(&self) -> Result<Arc<FqField>> {
        FqField::new(self.family.p, self.family.a)
    }
}

fn max_table_degree(p: u64) -> usize {
    let mut k = 0;
    let mut s = 1u64;
    while s * p <= TABLE_LIMIT {
        s *= p;
        k += 1;
    }
    k
}

/// Truncation degree for a fiber of degree `d`: enough terms for the Hodge
/// bound on the tail to reach the ring precision, limited by enumeration size.
pub fn fiber_truncation(ctx: &FiberContext, d: usize) -> (usize, Option<Q>) {
    fiber_truncation_to(ctx, d, ctx.ring.prec)
}

/// As [`fiber_truncation`] with an explicit target precision.
pub fn fiber_truncation_to(ctx: &FiberContext, d: usize, target: u32) -> (usize, Option<Q>) {
    let deg = ctx.l_degree();
    let scale = Q::from_integer((ctx.family.a * d) as i64);
    let target = Q::from_integer(target.min(ctx.ring.prec) as i64);
    let cap = (max_table_degree(ctx.family.p) / (ctx.family.a * d)).max(1);
    for k in 1..=deg.min(cap) {
        if k == deg {
            return (k, None);
        }
        let tail = ctx.geom_f.hodge_polygon(k + 1) * scale;
        if tail >= target {
            return (k, Some(tail));
        }
    }
    let k = deg.min(cap);
    if k == deg {
        (k, None)
    } else {
        (k, Some(ctx.geom_f.hodge_polygon(k + 1) * scale))
    }
}

/// The fiber polynomial `L^{(-1)^{n+1}}` truncated to the degree from
/// [`fiber_truncation`], embedded in the ring, with its certified precision.
pub fn fiber_l_poly(ctx: &FiberContext, point: &ClosedPoint) -> Result<(Vec<PadicScalar>, u32)> {
    fiber_l_poly_to(ctx, point, ctx.ring.prec)
}

/// As [`fiber_l_poly`], truncated for `target` digits.
pub fn fiber_l_poly_to(ctx: &FiberContext, point: &ClosedPoint, target: u32) -> Result<(Vec<PadicScalar>, u32)> {
    let d = point.degree;
    let (k, tail) = fiber_truncation_to(ctx, d, target);
    let sums = (1..=k)
        .map(|m| exp_sum(&ctx.family, &ctx.t_bar, &point.orbit_rep, d, m, Exec::Sequential))
        .collect::<Result<Vec<_>>>()?;
    let l = signed_power(&l_series(ctx.family.p, &sums, k)?, ctx.family.n)?;
    let coeffs = embed_poly(&ctx.ring, &ctx.zeta, l.exact_coeffs()?)?;
    let prec = match tail {
        None => ctx.ring.prec,
        Some(t) => ctx.ring.prec.min(t.floor().to_integer().max(0) as u32),
    };
    Ok((coeffs, prec))
}

/// `π₀(t̄, λ̄)` from the first `k` sums over the fiber, with its certified precision.
pub fn fiber_unit_root(ctx: &FiberContext, point: &ClosedPoint) -> Result<(PadicScalar, u32)> {
    fiber_unit_root_to(ctx, point, ctx.ring.prec)
}

/// As [`fiber_unit_root`], truncated for `target` digits.
pub fn fiber_unit_root_to(ctx: &FiberContext, point: &ClosedPoint, target: u32) -> Result<(PadicScalar, u32)> {
    let (_, tail) = fiber_truncation_to(ctx, point.degree, target);
    let (coeffs, prec) = fiber_l_poly_to(ctx, point, target)?;
    let (root, rp) = unit_reciprocal_root(&ctx.ring, &coeffs, tail)?;
    if !is_one_unit(&ctx.ring, &root) {
        return Err(Error::UnitRoot("fiber unit root is not a 1-unit".into()));
    }
    Ok((root, rp.min(prec)))
}

/// Fiber unit roots of all closed points of degree `<= max_degree`.
pub fn fiber_unit_roots(ctx: &FiberContext, max_degree: usize) -> Result<Vec<(ClosedPoint, PadicScalar, u32)>> {
    fiber_unit_roots_to(ctx, max_degree, ctx.ring.prec)
}

/// As [`fiber_unit_roots`], each root to `target` digits.
pub fn fiber_unit_roots_to(ctx: &FiberContext, max_degree: usize, target: u32) -> Result<Vec<(ClosedPoint, PadicScalar, u32)>> {
    let base = ctx.base_field()?;
    let points = closed_points(&base, ctx.family.s, max_degree)?;
    let roots = map_slice(ctx.exec, &points, |pt| fiber_unit_root_to(ctx, pt, target));
    points
        .into_iter()
        .zip(roots)
        .map(|(pt, r)| r.map(|(x, prec)| (pt, x, prec)))
        .collect()
}

/// `Π_λ̄ (1 - π₀(λ̄)^κ T^{deg λ̄})^{-1}` to degree `d_T` from precomputed fiber roots.
pub fn assemble_unit_l(
    ring: &PadicRing,
    roots: &[(ClosedPoint, PadicScalar, u32)],
    kappa: &KappaExponent,
    d_t: usize,
) -> Result<LSeriesReport> {
    let mut series = vec![ring.zero(); d_t + 1];
    series[0] = ring.one();
    let mut prec = ring.prec;
    for (pt, root, rp) in roots {
        if pt.degree > d_t {
            continue;
        }
        prec = prec.min(*rp);
        let c = ring.one_unit_power(root, kappa)?;
        // multiply by Σ_r c^r T^{r·deg}
        let mut factor = vec![ring.zero(); d_t + 1];
        let mut cr = ring.one();
        let mut j = 0;
        while j <= d_t {
            factor[j] = cr.clone();
            cr = ring.mul(&cr, &c);
            j += pt.degree;
        }
        series = pseries::mul_trunc(ring, &series, &factor, d_t + 1);
    }
    let mut rep = LSeriesReport::padic(ring.p, series, prec);
    rep.newton_polygon = newton_polygon(&valuations(ring, rep.padic_coeffs()?));
    Ok(rep)
}

/// `L_unit(κ, t̄, T)` to degree `d_T`.
pub fn unit_l_function(ctx: &FiberContext, kappa: &KappaExponent, d_t: usize) -> Result<LSeriesReport> {
    if d_t == 0 {
        return Err(Error::Invalid("d_T must be positive".into()));
    }
    let roots = fiber_unit_roots(ctx, d_t)?;
    assemble_unit_l(&ctx.ring, &roots, kappa, d_t)
}

/// Smallest positive slope of the fiber Hodge polygon, in `ord_p` of the base field.
///
/// Every reciprocal zero and pole of `L_unit` other than the unit root has at
/// least this valuation, so the coefficient of `T^j` has `ord_p >= (j - 1)` times it.
pub fn unit_l_gap(ctx: &FiberContext) -> Q {
    let deg = ctx.l_degree();
    let a = Q::from_integer(ctx.family.a as i64);
    (2..=deg)
        .map(|j| ctx.geom_f.hodge_polygon(j) - ctx.geom_f.hodge_polygon(j - 1))
        .filter(|s| *s > Q::zero())
        .min()
        .map_or(Q::from_integer(ctx.ring.prec as i64), |s| s * a)
}

/// Degree of `L_unit` needed for `target` digits of its unit root.
pub fn unit_l_degree(ctx: &FiberContext, target: u32) -> usize {
    let gap = unit_l_gap(ctx);
    ((Q::from_integer(target as i64) / gap).ceil().to_integer() as usize).max(1)
}

/// The unit root of `L_unit(κ, t̄, T)` from fibers of degree `<= d_t`, with the
/// a priori tail bound from [`unit_l_gap`].
pub fn unit_l_root(ctx: &FiberContext, kappa: &KappaExponent, d_t: usize, target: u32) -> Result<(PadicScalar, u32, LSeriesReport)> {
    let roots = fiber_unit_roots_to(ctx, d_t, target)?;
    let rep = assemble_unit_l(&ctx.ring, &roots, kappa, d_t)?;
    let (root, prec) = series_unit_root(&rep, &ctx.ring, Some(unit_l_gap(ctx)))?;
    if !is_one_unit(&ctx.ring, &root) {
        return Err(Error::UnitRoot("unit root is not a 1-unit".into()));
    }
    Ok((root, prec, rep))
}

/// Observed slope of the Newton polygon right after the unit segment.
pub fn observed_gap(ring: &PadicRing, coeffs: &[PadicScalar]) -> Option<Q> {
    let mut best: Option<Q> = None;
    for (j, c) in coeffs.iter().enumerate().skip(2) {
        let v = ring.valuation_or_prec(c);
        let s = v / Q::from_integer((j - 1) as i64);
        best = Some(best.map_or(s, |b: Q| b.min(s)));
    }
    best
}

/// Unique unit root of a truncated entire series.
///
/// The precision is the smaller of the series precision and the tail bound
/// `gap · d_T`, where `gap` is `rho` if given and otherwise the slope observed
/// after the unit segment of the computed Newton polygon.
pub fn series_unit_root(report: &LSeriesReport, ring: &PadicRing, rho: Option<Q>) -> Result<(PadicScalar, u32)> {
    let c = report.padic_coeffs()?;
    if c.len() < 2 {
        return Err(Error::UnitRoot("increase d_T".into()));
    }
    if pseries::slope_zero_length(ring, c) != 1 {
        return Err(Error::UnitRoot("slope-0 segment absent or not separated; increase d_T".into()));
    }
    let d_t = c.len() - 1;
    let gap = rho.or_else(|| observed_gap(ring, c)).unwrap_or(Q::zero());
    let tail = gap * Q::from_integer(d_t as i64);
    let (root, prec) = unit_reciprocal_root(ring, c, Some(tail))?;
    Ok((root, prec.min(report.precision)))
}

/// Power-sum ratios `s_{m+1}/s_m` and the number of digits on which the last two agree.
pub fn ratio_unit_root(report: &LSeriesReport, ring: &PadicRing) -> Result<(PadicScalar, u32)> {
    let rs = pseries::power_sum_ratios(ring, report.padic_coeffs()?)?;
    match rs.as_slice() {
        [] => Err(Error::UnitRoot("increase d_T".into())),
        [x] => Ok((x.clone(), 0)),
        [.., a, b] => Ok((b.clone(), pseries::agreement_digits(ring, a, b).min(report.precision))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charsum::{exp_sum, l_series, rational_recover};

    fn k_ctx(prec: u32) -> FiberContext {
        let ring = PadicRing::new(3, 1, 2, prec).unwrap();
        FiberContext::new(&LaurentFamily::reference(), &[1, 1], &ring, Exec::Sequential).unwrap()
    }

    #[test]
    fn reference_fiber_polynomial() {
        let fam = LaurentFamily::reference();
        let sums: Vec<_> = (1..=9).map(|m| exp_sum(&fam, &[1, 1], &[1], 1, m, Exec::Parallel).unwrap()).collect();
        let rep = rational_recover(&l_series(3, &sums, 9).unwrap(), 4).unwrap();
        let (num, den) = rep.recovered.clone().unwrap();
        assert_eq!(num.len(), 5);
        assert_eq!(den.len(), 1);
        let ring = PadicRing::new(3, 1, 2, 4).unwrap();
        let rep = unit_root(&rep, &ring).unwrap();
        let (root, prec) = rep.unit_root.unwrap();
        assert_eq!(prec, 4);
        // the truncated route agrees
        let ctx = k_ctx(4);
        let pt = ClosedPoint { degree: 1, orbit_rep: vec![1] };
        let (r2, p2) = fiber_unit_root(&ctx, &pt).unwrap();
        assert_eq!(p2, 4);
        assert_eq!(r2, root);
    }

    #[test]
    fn kappa_zero_counts_points() {
        let ctx = k_ctx(3);
        let k0 = KappaExponent::from_int(3, 0, 8);
        let rep = unit_l_function(&ctx, &k0, 2).unwrap();
        let c = rep.padic_coeffs().unwrap();
        assert_eq!(c[1], ctx.ring.from_int(2));
    }
}
