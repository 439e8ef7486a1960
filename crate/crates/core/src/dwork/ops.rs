//! Fiber operators, the trace formula and the total-family operator.

use std::collections::HashMap;

use crate::charsum::{
    exp_sum, exp_sum_total, l_series, signed_power, unitroot::embed_poly, FiberContext, LSeriesReport,
};
use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::ffield::{ClosedPoint, FqField};
use crate::geometry::{enumerate_monoid, WeightedGeometry, Q};
use crate::padic::{PadicRing, PadicScalar};
use crate::par::{map_range, Exec};
use crate::pseries::{self, agreement_digits, delta_q_pow, newton_polygon, unit_reciprocal_root, valuations};

use super::matrix::{fredholm, ord_pitilde, FredholmSeries, NuclearMatrix};
use super::series::{frobenius_one, lift_family, SparseSeries};
use super::theta::{embed_cyclotomic, zeta_embed};

/// Matrix of `(σ^{-1} ψ_p F)^steps` on the monomials `index`, where `F` is a
/// series in the same variables. `weights` are the index weights for the
/// geometry in which `F`'s coefficient at `z^w` has `ord_p ≥ ord(π̃)·W(w)`.
pub fn dwork_matrix(
    ring: &PadicRing,
    series: &SparseSeries,
    index: &[Vec<i64>],
    weights: &[Q],
    steps: usize,
    trunc_weight: Q,
    exec: Exec,
) -> Result<NuclearMatrix> {
    let p = ring.p as i64;
    let c = ord_pitilde(ring.p);
    let n = index.len();
    let prec = Q::from_integer(ring.prec as i64);
    let rows = map_range(exec, n, |i| {
        (0..n)
            .map(|j| {
                let key: Vec<i64> = index[i].iter().zip(&index[j]).map(|(v, u)| p * v - u).collect();
                let val = series.get(&key).cloned().unwrap_or_else(|| ring.zero());
                let floor = if val.is_zero() {
                    prec
                } else {
                    (c * (Q::from_integer(p) * weights[i] - weights[j])).max(Q::from_integer(0)).min(prec)
                };
                (val, floor)
            })
            .collect::<Vec<_>>()
    });
    let pm1 = Q::from_integer(p - 1);
    let mut one = NuclearMatrix::zeros(ring, weights.to_vec(), c * pm1 * trunc_weight);
    one.row_floors = weights.iter().map(|w| c * pm1 * *w).collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, (v, f)) in row.into_iter().enumerate() {
            one.set(i, j, v, f);
        }
    }
    // σ^{-1}(A σ^{-1}(A) ⋯ σ^{1-steps}(A))
    let a = ring.a;
    Ok(twisted_product(&one, steps, true, exec)?.frobenius_pow((a - 1) % a))
}

/// Matrix of the dual operator `(pr ∘ F ∘ Φ_p ∘ σ)^steps` on the monomials
/// `x^{-v}`, `v ∈ index`: one step sends `x^{-v}` to `Σ_z F(pv - z) x^{-z}`.
/// Entries decay with the column weight, so the stored weights are `-w`.
pub fn dual_dwork_matrix(
    ring: &PadicRing,
    series: &SparseSeries,
    index: &[Vec<i64>],
    weights: &[Q],
    steps: usize,
    trunc_weight: Q,
    exec: Exec,
) -> Result<NuclearMatrix> {
    let p = ring.p as i64;
    let c = ord_pitilde(ring.p);
    let n = index.len();
    let prec = Q::from_integer(ring.prec as i64);
    let rows = map_range(exec, n, |i| {
        (0..n)
            .map(|j| {
                let key: Vec<i64> = index[j].iter().zip(&index[i]).map(|(v, z)| p * v - z).collect();
                let val = series.get(&key).cloned().unwrap_or_else(|| ring.zero());
                let floor = if val.is_zero() {
                    prec
                } else {
                    (c * (Q::from_integer(p) * weights[j] - weights[i])).max(Q::from_integer(0)).min(prec)
                };
                (val, floor)
            })
            .collect::<Vec<_>>()
    });
    let pm1 = Q::from_integer(p - 1);
    let mut one = NuclearMatrix::zeros(ring, weights.iter().map(|w| -*w).collect(), c * pm1 * trunc_weight);
    one.row_floors = weights.iter().map(|w| c * pm1 * *w).collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, (v, f)) in row.into_iter().enumerate() {
            one.set(i, j, v, f);
        }
    }
    // M σ(M) ⋯ σ^{steps-1}(M)
    twisted_product(&one, steps, false, exec)
}

/// `M σ^s(M) σ^{2s}(M) ⋯ σ^{(steps-1)s}(M)` with `s = ±1`, by doubling.
pub fn twisted_product(m: &NuclearMatrix, steps: usize, inverse: bool, exec: Exec) -> Result<NuclearMatrix> {
    let a = m.ring.a;
    let shift = |k: usize| if inverse { (a - k % a) % a } else { k % a };
    if steps == 0 {
        return Err(Error::Invalid("empty twisted product".into()));
    }
    let mut acc = m.clone();
    let mut len = 1;
    for bit in (0..usize::BITS - 1 - steps.leading_zeros()).rev() {
        acc = acc.mul(&acc.frobenius_pow(shift(len)), exec)?;
        len *= 2;
        if (steps >> bit) & 1 == 1 {
            acc = acc.mul(&m.frobenius_pow(shift(len)), exec)?;
            len += 1;
        }
    }
    Ok(acc)
}

/// Smallest weight strictly above `cap` among monoid points (for truncation bounds).
pub fn next_weight(geom: &WeightedGeometry, cap: Q) -> Q {
    cap + Q::new(1, geom.d)
}

/// Per-degree Frobenius series for the fibers of one family at one `t̄`.
#[derive(Clone, Debug)]
pub struct FiberOperator {
    pub family: LaurentFamily,
    pub t_bar: Vec<u32>,
    pub geom_f: WeightedGeometry,
    pub prec: u32,
    pub e: usize,
    cache: HashMap<usize, (PadicRing, SparseSeries)>,
}

impl FiberOperator {
    pub fn new(family: &LaurentFamily, t_bar: &[u32], prec: u32) -> Result<Self> {
        family.validate()?;
        let geom_f = family.geometry_f()?;
        family.geometry_gamma(&geom_f)?;
        Ok(FiberOperator {
            family: family.clone(),
            t_bar: t_bar.to_vec(),
            geom_f,
            prec,
            e: (family.p - 1) as usize,
            cache: HashMap::new(),
        })
    }

    /// Ring and `F(t̂, λ, x)` for fibers of degree `d`.
    pub fn prepare(&mut self, d: usize) -> Result<(PadicRing, SparseSeries)> {
        if let Some(x) = self.cache.get(&d) {
            return Ok(x.clone());
        }
        let ring = PadicRing::new(self.family.p, self.family.a * d, self.e, self.prec)?;
        let lifted = lift_family(&self.family, &self.t_bar, &ring)?;
        let f = frobenius_one(&lifted)?;
        self.cache.insert(d, (ring.clone(), f.clone()));
        Ok((ring, f))
    }

    /// Teichmüller lift of a closed point's representative and its inverse.
    pub fn lift_point(ring: &PadicRing, point: &ClosedPoint) -> Result<(Vec<PadicScalar>, Vec<PadicScalar>)> {
        let field = FqField::new(ring.p, ring.a)?;
        let mut vals = Vec::new();
        let mut invs = Vec::new();
        for &x in &point.orbit_rep {
            if x == 0 {
                return Err(Error::Invalid("zero coordinate in lambda".into()));
            }
            vals.push(ring.teichmuller(&field.unpack(x)));
            invs.push(ring.teichmuller(&field.unpack(field.inv(x))));
        }
        Ok((vals, invs))
    }

    /// Matrix of `α_{t̄,λ̄}` on monomials of weight `<= w_x`.
    pub fn fiber_matrix(&mut self, point: &ClosedPoint, w_x: Q, exec: Exec) -> Result<NuclearMatrix> {
        self.prepare(point.degree)?;
        self.fiber_matrix_prepared(point, w_x, FiberSide::Primal, exec)
    }

    /// Matrix of the dual fiber operator `α*_{t̄,λ̄}` on `x^{-v}`, `w(v) <= w_x`.
    pub fn dual_fiber_matrix(&mut self, point: &ClosedPoint, w_x: Q, exec: Exec) -> Result<NuclearMatrix> {
        self.prepare(point.degree)?;
        self.fiber_matrix_prepared(point, w_x, FiberSide::Dual, exec)
    }

    /// Either fiber matrix for a degree already passed to [`FiberOperator::prepare`].
    pub fn fiber_matrix_prepared(&self, point: &ClosedPoint, w_x: Q, side: FiberSide, exec: Exec) -> Result<NuclearMatrix> {
        let (ring, f) = self
            .cache
            .get(&point.degree)
            .ok_or_else(|| Error::Invalid(format!("fibers of degree {} are not prepared", point.degree)))?;
        let (vals, invs) = Self::lift_point(ring, point)?;
        let fx = f.specialize_leading(ring, &vals, &invs);
        let slice = enumerate_monoid(&self.geom_f, w_x);
        let index: Vec<Vec<i64>> = slice.points.iter().map(|(u, _)| u.0.clone()).collect();
        let weights: Vec<Q> = slice.points.iter().map(|(_, w)| *w).collect();
        let trunc = next_weight(&self.geom_f, w_x);
        match side {
            FiberSide::Primal => dwork_matrix(ring, &fx, &index, &weights, ring.a, trunc, exec),
            FiberSide::Dual => dual_dwork_matrix(ring, &fx, &index, &weights, ring.a, trunc, exec),
        }
    }
}

/// Which fiber operator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberSide {
    Primal,
    Dual,
}

/// Working precision so that Fredholm coefficients to degree `d_T` keep `target` digits.
pub fn working_precision(p: u64, target: u32, d_t: usize) -> u32 {
    let loss: u32 = (1..=d_t as u64).map(|j| pseries::vp_u64(j, p)).sum();
    target + loss
}

/// Default `W_x`: `⌈N p²/(p-1)²⌉ + 2`.
pub fn default_cap(p: u64, prec: u32) -> Q {
    let num = prec as i64 * (p * p) as i64;
    let den = ((p - 1) * (p - 1)) as i64;
    Q::from_integer((num + den - 1) / den + 2)
}

#[derive(Clone, Debug)]
pub struct TraceCheck {
    pub m: usize,
    pub lhs: PadicScalar,
    pub rhs: PadicScalar,
    pub agreement: u32,
    pub certified: u32,
    pub ring: PadicRing,
}

impl TraceCheck {
    pub fn passed(&self) -> bool {
        self.agreement >= self.certified
    }
}

/// `(q_λ^m - 1)^n Tr(α^m)` against the ζ-embedded brute-force sum.
pub fn trace_formula_check(
    op: &mut FiberOperator,
    point: &ClosedPoint,
    m: usize,
    w_x: Q,
    exec: Exec,
) -> Result<TraceCheck> {
    let alpha = op.fiber_matrix(point, w_x, exec)?;
    let ring = alpha.ring.clone();
    let traces = alpha.power_traces(m, exec)?;
    let tr = traces[m - 1].clone();
    let q = ring.q() as u128;
    let qm = q.pow(m as u32) % ring.modulus as u128;
    let factor = (qm + ring.modulus as u128 - 1) % ring.modulus as u128;
    let mut lhs = tr;
    for _ in 0..op.family.n {
        lhs = ring.scale_int(&lhs, factor as i64);
    }
    let s = exp_sum(&op.family, &op.t_bar, &point.orbit_rep, point.degree, m, exec)?;
    let zeta = zeta_embed(&ring)?;
    let rhs = embed_cyclotomic(&ring, &zeta, &s);
    let certified = ring.prec.min(alpha.trunc_floor.floor().to_integer().max(0) as u32);
    let agreement = agreement_digits(&ring, &lhs, &rhs);
    let out = TraceCheck { m, lhs, rhs, agreement, certified, ring };
    if !out.passed() {
        return Err(Error::CheckFailed(format!(
            "trace formula m={m}: agreement {} below certified {}",
            out.agreement, out.certified
        )));
    }
    Ok(out)
}

/// `det(1 - αT)^{δ^n}` for one fiber, its certified precision and unit root.
pub fn fiber_l_via_dwork(
    op: &mut FiberOperator,
    point: &ClosedPoint,
    d_t: usize,
    w_x: Q,
    exec: Exec,
) -> Result<(LSeriesReport, FredholmSeries)> {
    let alpha = op.fiber_matrix(point, w_x, exec)?;
    let ring = alpha.ring.clone();
    let det = fredholm(&alpha, d_t, exec)?;
    let q = ring.q();
    let l = delta_q_pow(&ring, &det.coeffs, q, op.family.n)?;
    let prec = det.min_certified();
    let mut rep = LSeriesReport::padic(ring.p, l, prec);
    rep.newton_polygon = newton_polygon(&valuations(&ring, &det.coeffs));
    let tail = alpha.fredholm_tail(d_t);
    let (root, rp) = unit_reciprocal_root(&ring, &det.coeffs, Some(tail))?;
    rep.unit_root = Some((root, rp.min(prec)));
    Ok((rep, det))
}

/// The Dwork-side L-series compared coefficientwise with the brute-force one.
pub fn check_fiber_l(
    op: &mut FiberOperator,
    ctx: &FiberContext,
    point: &ClosedPoint,
    d_t: usize,
    w_x: Q,
    exec: Exec,
) -> Result<(LSeriesReport, u32)> {
    let (rep, _) = fiber_l_via_dwork(op, point, d_t, w_x, exec)?;
    let (ring, _) = op.prepare(point.degree)?;
    let sums = (1..=d_t)
        .map(|m| exp_sum(&ctx.family, &ctx.t_bar, &point.orbit_rep, point.degree, m, exec))
        .collect::<Result<Vec<_>>>()?;
    let exact = signed_power(&l_series(ring.p, &sums, d_t)?, ctx.family.n)?;
    let zeta = zeta_embed(&ring)?;
    let reference = embed_poly(&ring, &zeta, exact.exact_coeffs()?)?;
    let mut worst = rep.precision;
    for (a, b) in rep.padic_coeffs()?.iter().zip(&reference) {
        worst = worst.min(agreement_digits(&ring, a, b));
    }
    if worst < rep.precision {
        return Err(Error::CheckFailed(format!(
            "Dwork and brute-force L-series differ at {} digits (certified {})",
            worst, rep.precision
        )));
    }
    Ok((rep, worst))
}

/// The joint slice `(γ, u)` of weight `<= w`, its weights, the Frobenius series
/// `F(t̂, λ, x)` and the weight just past the slice.
pub fn total_family_slice(
    family: &LaurentFamily,
    t_bar: &[u32],
    ring: &PadicRing,
    w: Q,
) -> Result<(Vec<Vec<i64>>, Vec<Q>, SparseSeries, Q)> {
    let geom_f = family.geometry_f()?;
    let geom_g = family.geometry_gamma(&geom_f)?;
    let lifted = lift_family(family, t_bar, ring)?;
    let f = frobenius_one(&lifted)?;
    let sg = enumerate_monoid(&geom_g, w);
    let sf = enumerate_monoid(&geom_f, w);
    let mut pts: Vec<(Q, Vec<i64>)> = Vec::new();
    for (g, wg) in &sg.points {
        for (u, wu) in &sf.points {
            if *wg + *wu <= w {
                let mut e = g.0.clone();
                e.extend(u.0.iter().copied());
                pts.push((*wg + *wu, e));
            }
        }
    }
    pts.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let index: Vec<Vec<i64>> = pts.iter().map(|x| x.1.clone()).collect();
    let weights: Vec<Q> = pts.iter().map(|x| x.0).collect();
    let dd = geom_f.d.max(geom_g.d);
    let step = Q::new(1, num_integer::lcm(geom_f.d, geom_g.d).max(dd));
    Ok((index, weights, f, w + step))
}

/// The total-family operator in `(λ, x)` at `t̂`, on the joint slice of weight `<= w`.
pub fn total_family_matrix(
    family: &LaurentFamily,
    t_bar: &[u32],
    ring: &PadicRing,
    w: Q,
    exec: Exec,
) -> Result<NuclearMatrix> {
    let (index, weights, f, trunc) = total_family_slice(family, t_bar, ring, w)?;
    dwork_matrix(ring, &f, &index, &weights, ring.a, trunc, exec)
}

/// The dual total-family operator on `λ^{-γ} x^{-u}`, same slice.
pub fn total_family_dual_matrix(
    family: &LaurentFamily,
    t_bar: &[u32],
    ring: &PadicRing,
    w: Q,
    exec: Exec,
) -> Result<(NuclearMatrix, Vec<Vec<i64>>)> {
    let (index, weights, f, trunc) = total_family_slice(family, t_bar, ring, w)?;
    let m = dual_dwork_matrix(ring, &f, &index, &weights, ring.a, trunc, exec)?;
    Ok((m, index))
}

/// Trace formula in `s + n` variables for the total family at `m`.
pub fn total_trace_check(
    family: &LaurentFamily,
    t_bar: &[u32],
    matrix: &NuclearMatrix,
    m: usize,
    exec: Exec,
) -> Result<TraceCheck> {
    let ring = matrix.ring.clone();
    let traces = matrix.power_traces(m, exec)?;
    let q = ring.q() as u128;
    let qm = q.pow(m as u32) % ring.modulus as u128;
    let factor = (qm + ring.modulus as u128 - 1) % ring.modulus as u128;
    let mut lhs = traces[m - 1].clone();
    for _ in 0..family.s + family.n {
        lhs = ring.scale_int(&lhs, factor as i64);
    }
    let s = exp_sum_total(family, t_bar, m, exec)?;
    let zeta = zeta_embed(&ring)?;
    let rhs = embed_cyclotomic(&ring, &zeta, &s);
    let certified = ring.prec.min(matrix.trunc_floor.floor().to_integer().max(0) as u32);
    let agreement = agreement_digits(&ring, &lhs, &rhs);
    let out = TraceCheck { m, lhs, rhs, agreement, certified, ring };
    if !out.passed() {
        return Err(Error::CheckFailed(format!("total trace formula m={m}: agreement {}", out.agreement)));
    }
    Ok(out)
}

/// Unit root of `det(1 - A T)` from its truncation to degree `d_T`.
pub fn fredholm_unit_root(matrix: &NuclearMatrix, d_t: usize, exec: Exec) -> Result<(PadicScalar, u32, FredholmSeries)> {
    let det = fredholm(matrix, d_t, exec)?;
    let tail = matrix.fredholm_tail(d_t);
    let ring = &matrix.ring;
    let (root, prec) = unit_reciprocal_root(ring, &det.coeffs, Some(tail))?;
    if !pseries::is_one_unit(ring, &root) {
        return Err(Error::UnitRoot("unit root is not a 1-unit".into()));
    }
    Ok((root, prec.min(det.min_certified()), det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Coeff, FTerm, LaurentFamily, PTerm};
    use crate::geometry::LatticePoint;
    use crate::ffield::closed_points;

    fn quadratic_family() -> LaurentFamily {
        LaurentFamily {
            p: 3,
            a: 1,
            n: 1,
            s: 1,
            f_terms: vec![FTerm { u: LatticePoint(vec![2]), coeff: Coeff::Fixed(1) }],
            p_terms: vec![PTerm { gamma: LatticePoint(vec![1]), v: LatticePoint(vec![1]), coeff: 1 }],
        }
    }

    #[test]
    fn quadratic_fiber() {
        let fam = quadratic_family();
        let mut op = FiberOperator::new(&fam, &[], 4).unwrap();
        let base = FqField::new(3, 1).unwrap();
        let pts = closed_points(&base, 1, 1).unwrap();
        for m in 1..=3 {
            let c = trace_formula_check(&mut op, &pts[0], m, Q::from_integer(6), Exec::Sequential).unwrap();
            assert!(c.certified >= 2, "{}", c.certified);
        }
    }

    #[test]
    fn reference_trace_formula() {
        let fam = LaurentFamily::reference();
        let mut op = FiberOperator::new(&fam, &[1, 1], 4).unwrap();
        let base = FqField::new(3, 1).unwrap();
        let pts = closed_points(&base, 1, 2).unwrap();
        for pt in &pts {
            for m in 1..=3 {
                let c = trace_formula_check(&mut op, pt, m, default_cap(3, 4), Exec::default()).unwrap();
                assert_eq!(c.certified, 4);
            }
        }
    }

    #[test]
    fn reference_fiber_l_matches_brute_force() {
        let fam = LaurentFamily::reference();
        let ring = PadicRing::new(3, 1, 2, 4).unwrap();
        let ctx = FiberContext::new(&fam, &[1, 1], &ring, Exec::default()).unwrap();
        let mut op = FiberOperator::new(&fam, &[1, 1], working_precision(3, 4, 8)).unwrap();
        let pt = ClosedPoint { degree: 1, orbit_rep: vec![1] };
        let (rep, agree) = check_fiber_l(&mut op, &ctx, &pt, 8, default_cap(3, 4), Exec::default()).unwrap();
        assert!(rep.precision >= 4 && agree >= 4);
        let (root, prec) = rep.unit_root.clone().unwrap();
        let (r2, _) = crate::charsum::fiber_unit_root(&ctx, &pt).unwrap();
        assert!(prec >= 4);
        assert!(agreement_digits(&ring, &root, &r2) >= 4);
    }

    #[test]
    fn reference_fiber_floors_and_residue() {
        let fam = LaurentFamily::reference();
        let mut op = FiberOperator::new(&fam, &[1, 1], 4).unwrap();
        let pt = ClosedPoint { degree: 2, orbit_rep: vec![5] };
        let m = op.fiber_matrix(&pt, default_cap(3, 4), Exec::default()).unwrap();
        assert!(m.floors_respected());
        let zero = m.weights.iter().position(|w| *w == Q::from_integer(0)).unwrap();
        assert!(m.ring.is_unit(&m.ring.sub(m.get(zero, zero), &m.ring.one())) == false);
    }

    #[test]
    fn reference_total_family() {
        let fam = LaurentFamily::reference();
        let ring = PadicRing::new(3, 1, 2, 8).unwrap();
        let m = total_family_matrix(&fam, &[1, 1], &ring, Q::from_integer(7), Exec::default()).unwrap();
        assert!(m.floors_respected());
        let c = total_trace_check(&fam, &[1, 1], &m, 1, Exec::default()).unwrap();
        assert!(c.certified >= 3);
        let (root, prec, det) = fredholm_unit_root(&m, 10, Exec::default()).unwrap();
        assert!(prec >= 3);
        assert_eq!(pseries::slope_zero_length(&ring, &det.coeffs), 1);
        assert!(pseries::is_one_unit(&ring, &root));
    }
}
