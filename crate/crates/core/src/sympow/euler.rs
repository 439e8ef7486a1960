//! `L^{(0)}(κ, t̄, T)` and `det(1 - β_{κ,t̄} T)` as Euler products over the
//! fibers, from the fiber L-polynomials and their unit roots.
//!
//! For a fiber with unit root `π₀` and nonunit Frobenius eigenvalues `π_i`,
//! the local factor of `L^{(0)}` is `exp(Σ_k π₀^{kκ} H_k T^{dk}/k)` with
//! `H_k = Π_{i≥1} (1 - (π_i/π₀)^k)^{-1}`. The eigenvalues of `α` are the
//! roots of the fiber polynomial scaled by `q_λ^j`, so
//! `1/H_k = Q_k(π₀^{-k}) Π_{j≥1} L_k(q_λ^{jk} π₀^{-k})^{C(n-1+j, n-1)}` with
//! `L_k` the polynomial of `k`-th powers of the roots and `Q_k = L_k/(1 - π₀^k T)`.

use crate::charsum::unitroot::fiber_l_poly_to;
use crate::dwork::{fredholm, next_weight, ord_pitilde, FiberOperator, FiberSide};
use crate::geometry::Q;
use crate::par::Exec;
use crate::charsum::{FiberContext, LSeriesReport};
use crate::error::{Error, Result};
use crate::ffield::{closed_points, ClosedPoint};
use crate::geometry::binomial;
use crate::padic::{KappaExponent, PadicRing, PadicScalar};
use crate::par::map_slice;

use super::basis::index_floor_sum;
use crate::pseries::{delta_q_pow, vp_u64, fredholm_from_traces, inv_trunc, is_one_unit, mul_trunc, newton_polygon, unit_reciprocal_root, valuations};

/// Fiber data used by the Euler products.
#[derive(Clone, Debug)]
pub struct FiberSpectrum {
    pub point: ClosedPoint,
    /// `L^{(-1)^{n+1}}` of the fiber, possibly truncated.
    pub lpoly: Vec<PadicScalar>,
    pub degree: usize,
    pub unit_root: PadicScalar,
    pub precision: u32,
}

/// Power sums `Σ ρ^m`, `m = 1..=count`, of the reciprocal roots of `Σ c_j T^j`.
pub fn power_sums(ring: &PadicRing, c: &[PadicScalar], count: usize) -> Vec<PadicScalar> {
    let mut out: Vec<PadicScalar> = Vec::with_capacity(count);
    for m in 1..=count {
        let mut acc = match c.get(m) {
            Some(x) => ring.scale_int(x, m as i64),
            None => ring.zero(),
        };
        for i in 1..m {
            if let Some(ci) = c.get(i) {
                acc = ring.add(&acc, &ring.mul(ci, &out[m - i - 1]));
            }
        }
        out.push(ring.neg(&acc));
    }
    out
}

fn eval(ring: &PadicRing, c: &[PadicScalar], t: &PadicScalar) -> PadicScalar {
    let mut acc = ring.zero();
    for x in c.iter().rev() {
        acc = ring.add(&ring.mul(&acc, t), x);
    }
    acc
}

/// Digits a fiber of degree `d` needs so that `L^{(0)}` to degree `d_t`
/// comes out with `target` digits.
pub fn euler_fiber_target(p: u64, target: u32, l_degree: usize, d_t: usize, d: usize) -> u32 {
    target + vp_factorial(l_degree as u64, p) + vp_factorial((d_t / d) as u64, p)
}

fn vp_factorial(n: u64, p: u64) -> u32 {
    (1..=n).map(|j| vp_u64(j, p)).sum()
}

fn spectrum(ring: &PadicRing, point: &ClosedPoint, lpoly: Vec<PadicScalar>, degree: usize, prec: u32) -> Result<FiberSpectrum> {
    let (root, rp) = unit_reciprocal_root(ring, &lpoly, None)?;
    if !is_one_unit(ring, &root) {
        return Err(Error::UnitRoot("fiber unit root is not a 1-unit".into()));
    }
    Ok(FiberSpectrum { point: point.clone(), lpoly, degree, unit_root: root, precision: prec.min(rp) })
}

/// Spectra of every closed fiber of degree `<= max_degree` from exponential sums,
/// each truncated for `target(d)` digits.
pub fn fiber_spectra(ctx: &FiberContext, max_degree: usize, target: impl Fn(usize) -> u32 + Sync) -> Result<Vec<FiberSpectrum>> {
    let base = ctx.base_field()?;
    let points = closed_points(&base, ctx.family.s, max_degree)?;
    let degree = ctx.l_degree();
    map_slice(ctx.exec, &points, |pt| {
        let (lpoly, prec) = fiber_l_poly_to(ctx, pt, target(pt.degree))?;
        spectrum(&ctx.ring, pt, lpoly, degree, prec)
    })
    .into_iter()
    .collect()
}

/// The same spectra read off the dual fiber operators `α*_{t̄,λ̄}`:
/// `L^{(-1)^{n+1}} = δ_q^n det(1 - α* T)`, brought back to the base ring.
pub fn dual_fiber_spectra(ctx: &FiberContext, max_degree: usize, target: impl Fn(usize) -> u32 + Sync) -> Result<Vec<FiberSpectrum>> {
    dual_fiber_spectra_raised(ctx, max_degree, target, Q::from_integer(0))
}

/// [`dual_fiber_spectra`] with every fiber cap `W_x` raised by `raise`.
pub fn dual_fiber_spectra_raised(
    ctx: &FiberContext,
    max_degree: usize,
    target: impl Fn(usize) -> u32 + Sync,
    raise: Q,
) -> Result<Vec<FiberSpectrum>> {
    let base = ctx.base_field()?;
    let points = closed_points(&base, ctx.family.s, max_degree)?;
    let degree = ctx.l_degree();
    let p = ctx.family.p;
    let newton = vp_factorial(degree as u64, p);
    let fam = &ctx.family;
    let geom_f = fam.geometry_f()?;
    let step = ord_pitilde(p) * Q::from_integer(p as i64 - 1);
    let mut ops = Vec::with_capacity(max_degree);
    for d in 1..=max_degree {
        let want = target(d).min(ctx.ring.prec);
        let mut op = FiberOperator::new(fam, &ctx.t_bar, want + newton)?;
        op.prepare(d)?;
        // smallest cap whose dropped rows sit at or above `want`
        let mut w_x = Q::from_integer(0);
        while step * next_weight(&geom_f, w_x) < Q::from_integer(want as i64) {
            w_x += Q::new(1, geom_f.d);
        }
        let w_x = w_x + raise;
        ops.push((op, want, w_x));
    }
    map_slice(ctx.exec, &points, |pt| {
        let (op, want, w_x) = &ops[pt.degree - 1];
        let alpha = op.fiber_matrix_prepared(pt, *w_x, FiberSide::Dual, Exec::Sequential)?;
        let det = fredholm(&alpha, degree.min(alpha.dim), Exec::Sequential)?;
        let big = alpha.ring.clone();
        let l = delta_q_pow(&big, &det.coeffs, big.q(), fam.n)?;
        let prec = det.min_certified().min(*want);
        let lpoly = l
            .iter()
            .take(degree + 1)
            .map(|c| ctx.ring.descend_zp(&big, c, prec))
            .collect::<Result<Vec<_>>>()?;
        spectrum(&ctx.ring, pt, lpoly, degree, prec)
    })
    .into_iter()
    .collect()
}

/// `Tr([α_{t̄,λ̄}]_κ^k) = π₀^{kκ} H_k` for one fiber, with the digits lost to divisions.
pub fn sym_power_trace(
    ring: &PadicRing,
    fiber: &FiberSpectrum,
    kappa: &KappaExponent,
    k: usize,
    n: usize,
) -> Result<(PadicScalar, u32)> {
    let deg = fiber.degree;
    let ps = power_sums(ring, &fiber.lpoly, deg * k);
    let pk: Vec<PadicScalar> = (1..=deg).map(|i| ps[i * k - 1].clone()).collect();
    let (lk, loss) = fredholm_from_traces(ring, &pk)?;
    let loss = loss.into_iter().max().unwrap_or(0);
    let a = ring.pow(&fiber.unit_root, k as u64);
    // Q_k = L_k / (1 - a T)
    let mut qk = vec![ring.one()];
    for i in 1..deg {
        let next = ring.add(&lk[i], &ring.mul(&a, &qk[i - 1]));
        qk.push(next);
    }
    let t0 = ring.inv_unit(&a)?;
    let mut d = eval(ring, &qk, &t0);
    let qlam = ring.pow(&ring.from_int(ring.p as i64), (ring.a * fiber.point.degree * k) as u64);
    let mut scale = ring.one();
    let mut j = 1u64;
    loop {
        scale = ring.mul(&scale, &qlam);
        if scale.is_zero() {
            break;
        }
        let f = eval(ring, &lk, &ring.mul(&scale, &t0));
        let e = binomial(n as u64 - 1 + j, n as u64 - 1);
        d = ring.mul(&d, &ring.pow(&f, e));
        j += 1;
    }
    let h = ring.inv_unit(&d)?;
    let lead = ring.one_unit_power(&a, kappa)?;
    Ok((ring.mul(&lead, &h), loss))
}

/// `L^{(0)}(κ, t̄, T)` to degree `d_T` from fiber spectra of degree `<= d_T`.
pub fn l0_euler(ring: &PadicRing, spectra: &[FiberSpectrum], kappa: &KappaExponent, n: usize, d_t: usize) -> Result<LSeriesReport> {
    let mut series = vec![ring.zero(); d_t + 1];
    series[0] = ring.one();
    let mut prec = ring.prec;
    for fb in spectra {
        let d = fb.point.degree;
        if d > d_t {
            continue;
        }
        let kmax = d_t / d;
        let mut g = Vec::with_capacity(kmax);
        let mut worst = 0;
        for k in 1..=kmax {
            let (x, l) = sym_power_trace(ring, fb, kappa, k, n)?;
            worst = worst.max(l);
            g.push(ring.neg(&x));
        }
        // exp(Σ g_k U^k / k) = 1/det(1 - G U) with traces g_k
        let (h, l2) = fredholm_from_traces(ring, &g)?;
        prec = prec.min(fb.precision.saturating_sub(worst + l2.into_iter().max().unwrap_or(0)));
        let mut factor = vec![ring.zero(); d_t + 1];
        for (j, c) in h.into_iter().enumerate() {
            factor[j * d] = c;
        }
        series = mul_trunc(ring, &series, &factor, d_t + 1);
    }
    let mut rep = LSeriesReport::padic(ring.p, series, prec);
    rep.newton_polygon = newton_polygon(&valuations(ring, rep.padic_coeffs()?));
    Ok(rep)
}

/// `det(1 - β T) = Π_{j≥0} L^{(0)}(q^j T)^{(-1)^{s+1} C(s-1+j, s-1)}` to degree `d_T`.
pub fn det_from_l0(ring: &PadicRing, l0: &[PadicScalar], s: usize) -> Result<Vec<PadicScalar>> {
    let len = l0.len();
    let base = if s % 2 == 1 { l0.to_vec() } else { inv_trunc(ring, l0, len)? };
    let q = ring.from_int(ring.q() as i64);
    let mut out = vec![ring.zero(); len];
    out[0] = ring.one();
    let mut qj = ring.one();
    let mut j = 0u64;
    loop {
        let scaled: Vec<PadicScalar> = {
            let mut pw = ring.one();
            base.iter()
                .map(|c| {
                    let v = ring.mul(c, &pw);
                    pw = ring.mul(&pw, &qj);
                    v
                })
                .collect()
        };
        if scaled.iter().skip(1).all(|c| c.is_zero()) {
            break;
        }
        let e = if s == 0 { 1 } else { binomial(s as u64 - 1 + j, s as u64 - 1) };
        for _ in 0..e {
            out = mul_trunc(ring, &out, &scaled, len);
        }
        if s == 0 {
            break;
        }
        qj = ring.mul(&qj, &q);
        j += 1;
    }
    Ok(out)
}

/// `det(1 - β_{κ,t̄} T)` to degree `d_T` as an Euler product, with its certified precision.
#[derive(Clone, Debug)]
pub struct EulerDet {
    pub det: Vec<PadicScalar>,
    pub precision: u32,
    pub l0: LSeriesReport,
    /// Lower bound for `ord_p` of the coefficients past `d_T`.
    pub tail: Q,
}

impl EulerDet {
    /// The unique unit reciprocal root and its certified digits.
    pub fn unit_root(&self, ring: &PadicRing) -> Result<(PadicScalar, u32)> {
        let (r, rp) = unit_reciprocal_root(ring, &self.det, Some(self.tail))?;
        Ok((r, rp.min(self.precision)))
    }
}

/// Which fiber operators feed the Euler product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectraSource {
    /// Exponential sums, i.e. the operators `α`.
    Sums,
    /// The dual operators `α*`.
    Dual,
}

pub fn beta_det_euler(ctx: &FiberContext, kappa: &KappaExponent, d_t: usize, target: u32, source: SpectraSource) -> Result<EulerDet> {
    let spectra = euler_spectra(ctx, d_t, target, source)?;
    euler_det_from_spectra(ctx, &spectra, kappa, d_t)
}

/// Fiber spectra of degree `<= d_t` at the precision the Euler product needs for `target` digits.
pub fn euler_spectra(ctx: &FiberContext, d_t: usize, target: u32, source: SpectraSource) -> Result<Vec<FiberSpectrum>> {
    let p = ctx.family.p;
    let deg = ctx.l_degree();
    let tf = |d: usize| euler_fiber_target(p, target, deg, d_t, d);
    match source {
        SpectraSource::Sums => fiber_spectra(ctx, d_t, tf),
        SpectraSource::Dual => dual_fiber_spectra(ctx, d_t, tf),
    }
}

/// `det(1 - β_{κ,t̄} T)` to degree `d_t` from precomputed spectra.
pub fn euler_det_from_spectra(ctx: &FiberContext, spectra: &[FiberSpectrum], kappa: &KappaExponent, d_t: usize) -> Result<EulerDet> {
    let l0 = l0_euler(&ctx.ring, spectra, kappa, ctx.family.n, d_t)?;
    let det = det_from_l0(&ctx.ring, l0.padic_coeffs()?, ctx.family.s)?;
    let geom_f = ctx.family.geometry_f()?;
    let geom_g = ctx.family.geometry_gamma(&geom_f)?;
    let tail = index_floor_sum(&geom_f, &geom_g, ctx.family.p, d_t + 1);
    Ok(EulerDet { det, precision: l0.precision, l0, tail })
}
