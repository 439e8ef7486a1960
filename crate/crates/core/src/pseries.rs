//! Truncated power series in `T` over the p-adic ring.

use crate::error::{Error, Result};
use crate::geometry::Q;
use crate::padic::{PadicRing, PadicScalar};

pub fn mul_trunc(ring: &PadicRing, a: &[PadicScalar], b: &[PadicScalar], len: usize) -> Vec<PadicScalar> {
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = vec![0u128; ring.acc_len()];
        let mut any = false;
        for i in 0..=k.min(a.len().saturating_sub(1)) {
            let j = k - i;
            if j >= b.len() {
                continue;
            }
            ring.mul_acc(&mut acc, &a[i].coeffs, &b[j].coeffs);
            any = true;
            if i % 64 == 63 {
                reduce_in_place(ring, &mut acc);
            }
        }
        let mut c = if any { ring.from_coeffs(ring.reduce_acc(&acc)) } else { ring.zero() };
        ring.refresh_floor(&mut c);
        out.push(c);
    }
    out
}

fn reduce_in_place(ring: &PadicRing, acc: &mut [u128]) {
    let m = ring.modulus as u128;
    for x in acc.iter_mut() {
        *x %= m;
    }
}

/// `1/a` to `len` terms; `a_0` must be a unit.
pub fn inv_trunc(ring: &PadicRing, a: &[PadicScalar], len: usize) -> Result<Vec<PadicScalar>> {
    let a0 = a.first().ok_or(Error::Degenerate("empty series".into()))?;
    let inv0 = ring.inv_unit(a0).map_err(|_| Error::Invalid("non-unit constant term".into()))?;
    let mut out: Vec<PadicScalar> = vec![inv0.clone()];
    for k in 1..len {
        let mut acc = ring.zero();
        for i in 1..=k.min(a.len() - 1) {
            acc = ring.add(&acc, &ring.mul(&a[i], &out[k - i]));
        }
        let mut c = ring.neg(&ring.mul(&acc, &inv0));
        ring.refresh_floor(&mut c);
        out.push(c);
    }
    Ok(out)
}

/// `g(T) / g(qT)`.
pub fn delta_q(ring: &PadicRing, g: &[PadicScalar], q: u64) -> Result<Vec<PadicScalar>> {
    let mut gq = Vec::with_capacity(g.len());
    let mut qp = ring.one();
    let qs = ring.from_int((q % ring.modulus) as i64);
    for c in g {
        gq.push(ring.mul(c, &qp));
        qp = ring.mul(&qp, &qs);
    }
    let inv = inv_trunc(ring, &gq, g.len())?;
    Ok(mul_trunc(ring, g, &inv, g.len()))
}

/// `n`-fold `δ_q`.
pub fn delta_q_pow(ring: &PadicRing, g: &[PadicScalar], q: u64, n: usize) -> Result<Vec<PadicScalar>> {
    let mut out = g.to_vec();
    for _ in 0..n {
        out = delta_q(ring, &out, q)?;
    }
    Ok(out)
}

/// Vertices of the lower convex hull of the points `(j, v_j)`, skipping `None`.
pub fn newton_polygon(vals: &[Option<Q>]) -> Vec<(usize, Q)> {
    let pts: Vec<(usize, Q)> = vals.iter().enumerate().filter_map(|(j, v)| v.map(|v| (j, v))).collect();
    let mut hull: Vec<(usize, Q)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point when it lies on or above the chord
            let lhs = (y2 - y1) * Q::from_integer((pt.0 - x1) as i64);
            let rhs = (pt.1 - y1) * Q::from_integer((x2 - x1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

pub fn valuations(ring: &PadicRing, coeffs: &[PadicScalar]) -> Vec<Option<Q>> {
    coeffs.iter().map(|c| ring.valuation(c)).collect()
}

/// Length of the slope-0 segment of the Newton polygon of `coeffs`.
pub fn slope_zero_length(ring: &PadicRing, coeffs: &[PadicScalar]) -> usize {
    coeffs.iter().rposition(|c| ring.is_unit(c)).unwrap_or(0)
}

fn eval(ring: &PadicRing, coeffs: &[PadicScalar], t: &PadicScalar) -> PadicScalar {
    let mut acc = ring.zero();
    for c in coeffs.iter().rev() {
        acc = ring.add(&ring.mul(&acc, t), c);
    }
    acc
}

fn derivative(ring: &PadicRing, coeffs: &[PadicScalar]) -> Vec<PadicScalar> {
    coeffs.iter().enumerate().skip(1).map(|(j, c)| ring.scale_int(c, j as i64)).collect()
}

/// The unique unit reciprocal root of `Σ c_j T^j`, Hensel-lifted.
///
/// `tail` bounds `ord_p` of every coefficient beyond the given ones (`None`
/// when the polynomial is exact). Returns the root and its certified precision.
pub fn unit_reciprocal_root(ring: &PadicRing, coeffs: &[PadicScalar], tail: Option<Q>) -> Result<(PadicScalar, u32)> {
    if coeffs.is_empty() || !ring.is_unit(&coeffs[0]) {
        return Err(Error::UnitRoot("constant term is not a unit".into()));
    }
    match slope_zero_length(ring, coeffs) {
        0 => return Err(Error::UnitRoot("no unit root".into())),
        1 => {}
        k => return Err(Error::UnitRoot(format!("{k} unit roots"))),
    }
    let dp = derivative(ring, coeffs);
    let mut t = ring.neg(&ring.mul(&coeffs[0], &ring.inv_unit(&coeffs[1])?));
    let steps = 2 + (64 - (ring.prec as u64 * ring.e as u64).leading_zeros()) as usize;
    for _ in 0..steps {
        let f = eval(ring, coeffs, &t);
        if f.is_zero() {
            break;
        }
        let d = eval(ring, &dp, &t);
        t = ring.sub(&t, &ring.mul(&f, &ring.inv_unit(&d)?));
    }
    if !eval(ring, coeffs, &t).is_zero() {
        return Err(Error::Precision("Hensel iteration did not converge".into()));
    }
    let root = ring.inv_unit(&t)?;
    let mut prec = ring.prec;
    if let Some(tau) = tail {
        let tau = tau.floor().to_integer().max(0) as u32;
        prec = prec.min(tau);
    }
    Ok((root, prec))
}

/// Newton's identities: `det(1 - AT)` from `tr(A^j)`, `j = 1..=d`.
///
/// Returns the coefficients and, per coefficient, the number of p-adic digits
/// lost to divisions.
pub fn fredholm_from_traces(ring: &PadicRing, traces: &[PadicScalar]) -> Result<(Vec<PadicScalar>, Vec<u32>)> {
    let mut c = vec![ring.one()];
    let mut loss = vec![0u32];
    for j in 1..=traces.len() {
        let mut acc = ring.zero();
        let mut worst = 0;
        for i in 1..=j {
            acc = ring.add(&acc, &ring.mul(&c[j - i], &traces[i - 1]));
            worst = worst.max(loss[j - i]);
        }
        let acc = ring.neg(&acc);
        let (cj, l) = ring.div_int(&acc, j as i64)?;
        c.push(cj);
        loss.push(worst + l);
    }
    Ok((c, loss))
}

pub fn vp_u64(mut x: u64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Ratio `s_{m+1}/s_m` of power sums `s_m = Σ α_i^m` read off `log g`.
///
/// Returns the successive ratios, which converge to the unit root at a
/// rate set by the slope gap.
pub fn power_sum_ratios(ring: &PadicRing, g: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
    // s_m from g'/g = -Σ s_m T^{m-1} for g = Π(1 - α_i T)
    let dg = derivative(ring, g);
    let inv = inv_trunc(ring, g, g.len())?;
    let ratio = mul_trunc(ring, &dg, &inv, g.len().saturating_sub(1));
    let sums: Vec<PadicScalar> = ratio.iter().map(|c| ring.neg(c)).collect();
    let mut out = Vec::new();
    for m in 0..sums.len().saturating_sub(1) {
        if !ring.is_unit(&sums[m]) {
            return Err(Error::UnitRoot("power sum is not a unit".into()));
        }
        out.push(ring.mul(&sums[m + 1], &ring.inv_unit(&sums[m])?));
    }
    Ok(out)
}

/// Number of leading digits on which two values agree, capped at the ring precision.
pub fn agreement_digits(ring: &PadicRing, x: &PadicScalar, y: &PadicScalar) -> u32 {
    let v = ring.agreement(x, y);
    v.floor().to_integer().max(0) as u32
}

pub fn is_one_unit(ring: &PadicRing, x: &PadicScalar) -> bool {
    let d = ring.sub(x, &ring.one());
    ring.val_pihat(&d).is_none_or(|v| v >= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> PadicRing {
        PadicRing::new(3, 1, 2, 6).unwrap()
    }

    #[test]
    fn unit_root_of_products() {
        let r = ring();
        // (1 - T)(1 - 3T)(1 - 9T)
        let c: Vec<PadicScalar> = [1, -13, 39, -27].iter().map(|&x| r.from_int(x)).collect();
        let (root, prec) = unit_reciprocal_root(&r, &c, None).unwrap();
        assert_eq!(root, r.one());
        assert_eq!(prec, 6);
        let two: Vec<PadicScalar> = [1, -2, 1].iter().map(|&x| r.from_int(x)).collect();
        assert!(unit_reciprocal_root(&r, &two, None).is_err());
    }

    #[test]
    fn delta_of_linear() {
        let r = ring();
        let g = vec![r.one(), r.from_int(-1), r.zero(), r.zero()];
        let d = delta_q(&r, &g, 3).unwrap();
        // (1 - T)/(1 - 3T) = 1 + 2T + 6T^2 + 18T^3
        let want: Vec<PadicScalar> = [1, 2, 6, 18].iter().map(|&x| r.from_int(x)).collect();
        assert_eq!(d, want);
    }

    #[test]
    fn fredholm_diagonal() {
        let r = ring();
        // diag(1, 3): traces 4, 10
        let tr = vec![r.from_int(4), r.from_int(10)];
        let (c, _) = fredholm_from_traces(&r, &tr).unwrap();
        assert_eq!(c, vec![r.one(), r.from_int(-4), r.from_int(3)]);
    }

    #[test]
    fn polygon_vertices() {
        let v = vec![Some(Q::from_integer(0)), Some(Q::from_integer(0)), Some(Q::from_integer(2)), Some(Q::from_integer(3))];
        let np = newton_polygon(&v);
        assert_eq!(np.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 3]);
    }

    #[test]
    fn ratios_converge() {
        let r = ring();
        let c: Vec<PadicScalar> = [1, -13, 39, -27, 0, 0, 0, 0].iter().map(|&x| r.from_int(x)).collect();
        let rs = power_sum_ratios(&r, &c).unwrap();
        let last = rs.last().unwrap();
        assert!(agreement_digits(&r, last, &r.one()) >= 5);
    }
}
