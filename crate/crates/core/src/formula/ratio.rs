//! `𝔉(Λ) = A_{0,0}(Λ)/A_{0,0}(Λ^p)` at Teichmüller points, by truncated
//! ratios and by power iteration on the dual total-family operator.

use crate::dwork::{lift_residue, ord_pitilde, total_family_dual_matrix, NuclearMatrix};
use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::geometry::Q;
use crate::padic::{PadicRing, PadicScalar};
use crate::par::Exec;
use crate::pseries::agreement_digits;

use super::expansion::{ExpPiHSeries, LambdaPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioMethod {
    TruncatedRatio,
    DualPowerIteration,
}

#[derive(Clone, Debug)]
pub struct RatioValue {
    pub value: PadicScalar,
    /// Digits claimed: observed stabilization for truncated ratios,
    /// certified for power iteration.
    pub precision: u32,
    pub method: RatioMethod,
}

/// `Â`: Teichmüller lifts of the coefficients of `G(t̄, ·)`, in the order of [`super::h_support`].
pub fn lambda_point(family: &LaurentFamily, t_bar: &[u32], ring: &PadicRing) -> Result<Vec<PadicScalar>> {
    family.monomials(t_bar)?.iter().map(|m| lift_residue(ring, family.a, m.coeff)).collect()
}

fn power_point(ring: &PadicRing, point: &[PadicScalar], k: u64) -> Vec<PadicScalar> {
    point.iter().map(|x| ring.pow(x, k)).collect()
}

/// `𝔉(Λ)` as a Λ-series to total degree `deg`.
pub fn f_ratio_series(series: &ExpPiHSeries, deg: u32) -> Result<LambdaPoly> {
    let ring = &series.ring;
    let k = series.constant_coeff();
    let den = k.dilate(ring.p as u32).inverse(ring, series.nvars(), deg)?;
    Ok(k.mul(&den, ring, deg))
}

/// `𝔉_m(Λ) = A_{0,0}(Λ)/A_{0,0}(Λ^{p^m})` at `point` with the numerator cut at
/// total degree `deg` and the denominator at `⌊deg/p^m⌋`.
pub fn f_ratio_m_at(series: &ExpPiHSeries, point: &[PadicScalar], m: usize, deg: u32) -> Result<PadicScalar> {
    let ring = &series.ring;
    let k = series.constant_coeff();
    let pm = ring.p.pow(m as u32);
    let num = k.eval(ring, point, deg);
    let den = k.eval(ring, &power_point(ring, point, pm), deg / pm as u32);
    Ok(ring.mul(&num, &ring.inv_unit(&den)?))
}

/// Truncated ratios at the cuts `r p^j - 1`, `r` the lowest degree of a
/// nonconstant term of `A_{0,0}`; the precision is the number of digits on
/// which the last two cuts agree.
pub fn f_ratio_truncated(series: &ExpPiHSeries, point: &[PadicScalar], m: usize) -> Result<RatioValue> {
    let ring = &series.ring;
    let Some(r) = series.constant_coeff().min_positive_degree() else {
        return Ok(RatioValue { value: ring.one(), precision: ring.prec, method: RatioMethod::TruncatedRatio });
    };
    let p = ring.p as u32;
    let mut cuts = Vec::new();
    let mut pj = p;
    while r * pj - 1 <= series.caps.d_lambda {
        cuts.push(r * pj - 1);
        pj *= p;
    }
    if cuts.len() < 2 {
        return Err(Error::Precision(format!("d_Λ = {} gives fewer than two cuts", series.caps.d_lambda)));
    }
    let vals = cuts.iter().map(|&d| f_ratio_m_at(series, point, m, d)).collect::<Result<Vec<_>>>()?;
    let n = vals.len();
    let precision = agreement_digits(ring, &vals[n - 1], &vals[n - 2]).min(ring.prec);
    Ok(RatioValue { value: vals[n - 1].clone(), precision, method: RatioMethod::TruncatedRatio })
}

/// Result of power iteration on a matrix congruent to a rank-one projector.
#[derive(Clone, Debug)]
pub struct PowerIteration {
    pub eigenvalue: PadicScalar,
    /// Eigenvector normalized so that its first coordinate is 1.
    pub vector: Vec<PadicScalar>,
    pub certified: u32,
    pub iterations: usize,
    /// Smallest normalized valuation off the `(0, 0)` entry, with `m_00 - 1`.
    pub epsilon: Q,
}

/// Power iteration from `e_0` for the unit eigenvalue of `m`.
///
/// After `k` steps the eigenvalue is correct to `(k + 2) ε` digits for the
/// truncated matrix, and to `trunc_floor` for the operator.
pub fn dual_power_iteration(m: &NuclearMatrix, c: Q) -> Result<PowerIteration> {
    let ring = &m.ring;
    let n = m.dim;
    let prec = Q::from_integer(ring.prec as i64);
    let mut eps = prec;
    for i in 0..n {
        for j in 0..n {
            let x = if i == 0 && j == 0 { ring.sub(m.get(0, 0), &ring.one()) } else { m.get(i, j).clone() };
            if let Some(v) = ring.valuation(&x) {
                eps = eps.min(v + c * (m.weights[j] - m.weights[i]));
            }
        }
    }
    if eps <= Q::from_integer(0) {
        return Err(Error::NotOneUnit);
    }
    let steps = ((prec / eps).ceil().to_integer() as usize).max(1);
    let mut v = vec![ring.zero(); n];
    v[0] = ring.one();
    let mut lambda = ring.one();
    for _ in 0..steps {
        let u = crate::sympow::checks::apply(m, &v);
        lambda = u[0].clone();
        let inv = ring.inv_unit(&lambda)?;
        v = u.iter().map(|x| ring.mul(x, &inv)).collect();
    }
    let bound = (Q::from_integer(steps as i64 + 2) * eps).min(prec).min(m.trunc_floor);
    let certified = bound.floor().to_integer().max(0) as u32;
    Ok(PowerIteration { eigenvalue: lambda, vector: v, certified, iterations: steps, epsilon: eps })
}

/// `𝔉_{a}(t̂, Â)` as the unit eigenvalue of the dual total-family operator on the
/// slice of weight `<= w`.
pub fn f_ratio_dual(family: &LaurentFamily, t_bar: &[u32], ring: &PadicRing, w: Q, exec: Exec) -> Result<(RatioValue, PowerIteration, Vec<Vec<i64>>)> {
    let (m, index) = total_family_dual_matrix(family, t_bar, ring, w, exec)?;
    let c = ord_pitilde(ring.p) / Q::from_integer((ring.p as i64).pow(ring.a as u32 - 1));
    let it = dual_power_iteration(&m, c)?;
    let value = RatioValue { value: it.eigenvalue.clone(), precision: it.certified, method: RatioMethod::DualPowerIteration };
    Ok((value, it, index))
}

/// Configuration for [`f_ratio_eval`].
#[derive(Clone, Copy, Debug)]
pub struct RatioConfig {
    /// Weight cap of the total-family slice.
    pub total_weight: Q,
    pub exec: Exec,
}

/// `𝔉_{a}(t̂, Â)` by `method`; both methods are run and must agree to the
/// smaller of their precisions.
pub fn f_ratio_eval(
    series: &ExpPiHSeries,
    family: &LaurentFamily,
    t_bar: &[u32],
    cfg: RatioConfig,
    method: RatioMethod,
) -> Result<RatioValue> {
    let ring = &series.ring;
    let point = lambda_point(family, t_bar, ring)?;
    let tr = f_ratio_truncated(series, &point, family.a)?;
    let (du, _, _) = f_ratio_dual(family, t_bar, ring, cfg.total_weight, cfg.exec)?;
    let joint = tr.precision.min(du.precision);
    let agree = agreement_digits(ring, &tr.value, &du.value);
    if agree < joint {
        return Err(Error::CheckFailed(format!(
            "truncated ratio and power iteration agree to {agree} digits, expected {joint}: {:?} vs {:?}",
            ring.canonical_digits(&tr.value),
            ring.canonical_digits(&du.value)
        )));
    }
    Ok(match method {
        RatioMethod::TruncatedRatio => tr,
        RatioMethod::DualPowerIteration => du,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Coeff, FTerm};
    use crate::formula::{exp_pi_h, ExpCaps};
    use crate::geometry::LatticePoint;

    #[test]
    fn single_monomial_ratio_is_one() {
        let fam = LaurentFamily {
            p: 3,
            a: 1,
            n: 1,
            s: 0,
            f_terms: vec![FTerm { u: LatticePoint(vec![1]), coeff: Coeff::Var(0) }],
            p_terms: vec![],
        };
        let ring = PadicRing::new(3, 1, 2, 5).unwrap();
        let caps = ExpCaps { w_gamma: Q::from_integer(0), w_x: Q::from_integer(4), d_lambda: 10 };
        let s = exp_pi_h(&fam, &ring, caps, Exec::Sequential).unwrap();
        let pt = lambda_point(&fam, &[2], &ring).unwrap();
        let r = f_ratio_truncated(&s, &pt, 1).unwrap();
        assert_eq!(r.value, ring.one());
        assert_eq!(f_ratio_series(&s, 10).unwrap(), LambdaPoly::constant(ring.one(), 1));
    }

    #[test]
    fn multiplicativity() {
        let fam = LaurentFamily::reference();
        let ring = PadicRing::new(3, 1, 2, 6).unwrap();
        let caps = ExpCaps { w_gamma: Q::from_integer(0), w_x: Q::from_integer(0), d_lambda: 60 };
        let s = exp_pi_h(&fam, &ring, caps, Exec::Parallel).unwrap();
        let pt = vec![ring.teichmuller(&[2]), ring.one(), ring.teichmuller(&[2])];
        let d = 54;
        for (m1, m2) in [(1usize, 1usize), (1, 2), (2, 1)] {
            let lhs = f_ratio_m_at(&s, &pt, m1 + m2, d).unwrap();
            let a = f_ratio_m_at(&s, &pt, m1, d).unwrap();
            let shifted: Vec<_> = pt.iter().map(|x| ring.pow(x, 3u64.pow(m1 as u32))).collect();
            let b = f_ratio_m_at(&s, &shifted, m2, d / 3u32.pow(m1 as u32)).unwrap();
            assert_eq!(lhs, ring.mul(&a, &b), "({m1}, {m2})");
        }
    }
}
