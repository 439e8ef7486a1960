//! The splitting function `θ(T) = exp(π(T - T^p))` and `ζ_p := θ(1)`.

use num_traits::Zero;

use crate::charsum::{CycRational, CyclotomicInteger};
use crate::error::{Error, Result};
use crate::geometry::Q;
use crate::padic::{PadicRing, PadicScalar};

#[derive(Clone, Debug)]
pub struct SplittingSeries {
    pub coeffs: Vec<PadicScalar>,
    pub imax: usize,
}

impl SplittingSeries {
    pub fn get(&self, i: usize) -> Option<&PadicScalar> {
        self.coeffs.get(i)
    }
}

/// `π` inside a ring whose ramification index is a multiple of `p - 1`.
pub fn pi_of(ring: &PadicRing) -> Result<PadicScalar> {
    let pm1 = (ring.p - 1) as usize;
    if ring.e % pm1 != 0 {
        return Err(Error::Invalid(format!("ramification {} not divisible by p-1", ring.e)));
    }
    Ok(ring.pi_hat_pow((ring.e / pm1) as u64))
}

/// Smallest index past which every θ_i vanishes modulo `p^prec`.
pub fn default_imax(p: u64, prec: u32) -> usize {
    let num = prec as u64 * p * p;
    let den = p - 1;
    (num.div_ceil(den) as usize).max(p as usize)
}

/// `π^i / i!` for `i = 0..=imax`.
fn exp_pi_coeffs(ring: &PadicRing, imax: usize) -> Result<Vec<PadicScalar>> {
    let p = ring.p;
    let step = (ring.e / (p - 1) as usize) as u64;
    let mut out = Vec::with_capacity(imax + 1);
    let mut unit = 1u64;
    let mut v = 0u64;
    for i in 0..=imax as u64 {
        if i > 0 {
            let mut k = i;
            while k % p == 0 {
                k /= p;
                v += 1;
            }
            unit = ((unit as u128 * (k % ring.modulus) as u128) % ring.modulus as u128) as u64;
        }
        // π^i / (p^v u) = (-1)^v π^{i-(p-1)v} / u
        let shift = (i - (p - 1) * v) * step;
        let mut t = ring.pi_hat_pow(shift);
        if v % 2 == 1 {
            t = ring.neg(&t);
        }
        let (t, _) = ring.div_int(&t, unit as i64)?;
        out.push(t);
    }
    Ok(out)
}

pub fn theta(ring: &PadicRing, imax: usize) -> Result<SplittingSeries> {
    let p = ring.p as usize;
    if imax < p {
        return Err(Error::Invalid(format!("theta needs imax >= p, got {imax}")));
    }
    let e = exp_pi_coeffs(ring, imax)?;
    let mut coeffs = Vec::with_capacity(imax + 1);
    for k in 0..=imax {
        let mut acc = ring.zero();
        let mut j = 0;
        while p * j <= k {
            let mut term = ring.mul(&e[k - p * j], &e[j]);
            if j % 2 == 1 {
                term = ring.neg(&term);
            }
            acc = ring.add(&acc, &term);
            j += 1;
        }
        ring.refresh_floor(&mut acc);
        let bound = Q::new(((p - 1) * k) as i64, (p * p) as i64).min(Q::from_integer(ring.prec as i64));
        if acc.val_floor < bound {
            return Err(Error::Invalid(format!("theta_{k} violates its valuation bound")));
        }
        coeffs.push(acc);
    }
    Ok(SplittingSeries { coeffs, imax })
}

/// `θ(1)`, a primitive p-th root of unity.
pub fn zeta_embed(ring: &PadicRing) -> Result<PadicScalar> {
    let th = theta(ring, default_imax(ring.p, ring.prec))?;
    let mut z = ring.zero();
    for c in &th.coeffs {
        z = ring.add(&z, c);
    }
    z.val_floor = Q::zero();
    Ok(z)
}

/// Image of a cyclotomic integer under `ζ_p ↦ θ(1)`.
pub fn embed_cyclotomic(ring: &PadicRing, zeta: &PadicScalar, z: &CyclotomicInteger) -> PadicScalar {
    let mut acc = ring.zero();
    let mut zp = ring.one();
    for &c in &z.coeffs {
        if c != 0 {
            acc = ring.add(&acc, &ring.scale_int(&zp, c));
        }
        zp = ring.mul(&zp, zeta);
    }
    ring.refresh_floor(&mut acc);
    acc
}

/// Same for a p-integral element of `Q(ζ_p)`.
pub fn embed_cyc_rational(ring: &PadicRing, zeta: &PadicScalar, z: &CycRational) -> Result<PadicScalar> {
    let m = num_bigint::BigInt::from(ring.modulus);
    let mut acc = ring.zero();
    let mut zp = ring.one();
    for c in &z.coeffs {
        if !c.is_zero() {
            let den = c.denom() % &m;
            let num = c.numer() % &m;
            let den_i: i64 = i64::try_from(&den).map_err(|_| Error::Invalid("denominator overflow".into()))?;
            let num_i: i64 = i64::try_from(&num).map_err(|_| Error::Invalid("numerator overflow".into()))?;
            let scaled = ring.scale_int(&zp, num_i);
            let (q, loss) = ring.div_int(&scaled, den_i)?;
            if loss > 0 {
                return Err(Error::Precision("coefficient is not p-integral".into()));
            }
            acc = ring.add(&acc, &q);
        }
        zp = ring.mul(&zp, zeta);
    }
    ring.refresh_floor(&mut acc);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_leading_terms() {
        let ring = PadicRing::new(3, 1, 2, 4).unwrap();
        let th = theta(&ring, 18).unwrap();
        assert_eq!(th.coeffs[0], ring.one());
        assert_eq!(th.coeffs[1].coeffs, pi_of(&ring).unwrap().coeffs);
    }

    #[test]
    fn zeta_is_primitive_root() {
        for (p, prec) in [(2u64, 6u32), (3, 4), (5, 3), (7, 3)] {
            let ring = PadicRing::new(p, 1, (p - 1) as usize, prec).unwrap();
            let z = zeta_embed(&ring).unwrap();
            assert_eq!(ring.pow(&z, p), ring.one());
            assert_ne!(z, ring.one());
            // ζ ≡ 1 + π mod π²
            let pi = pi_of(&ring).unwrap();
            let d = ring.sub(&z, &ring.add(&ring.one(), &pi));
            assert!(ring.val_pihat(&d).map_or(true, |v| v >= 2));
            let all: Vec<i64> = vec![1; (p - 1) as usize];
            let phi = CyclotomicInteger { p, coeffs: all };
            let s = embed_cyclotomic(&ring, &z, &phi);
            // 1 + ζ + … + ζ^{p-2} = -ζ^{p-1}
            assert_eq!(ring.add(&s, &ring.pow(&z, p - 1)), ring.zero());
        }
    }
}
