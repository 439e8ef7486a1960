//! `exp πH` with one Λ-variable per monomial of `H = f + P`.

use std::collections::BTreeMap;

use crate::dwork::pi_of;
use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::geometry::{build_newton, LatticePoint, WeightedGeometry, Q};
use crate::padic::{PadicRing, PadicScalar};
use crate::par::{map_range, Exec};
use crate::pseries::vp_u64;

/// Polynomial in the Λ-variables, keyed by exponent vectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LambdaPoly {
    pub terms: BTreeMap<Vec<u32>, PadicScalar>,
}

impl LambdaPoly {
    pub fn constant(c: PadicScalar, nvars: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        LambdaPoly { terms }
    }

    pub fn get(&self, e: &[u32]) -> Option<&PadicScalar> {
        self.terms.get(e)
    }

    pub fn constant_term(&self, ring: &PadicRing) -> PadicScalar {
        self.terms.iter().next().filter(|(e, _)| e.iter().all(|&x| x == 0)).map_or_else(|| ring.zero(), |(_, c)| c.clone())
    }

    /// Lowest total degree of a nonconstant term.
    pub fn min_positive_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).filter(|&d| d > 0).min()
    }

    pub fn add_term(&mut self, ring: &PadicRing, e: Vec<u32>, c: &PadicScalar) {
        match self.terms.get_mut(&e) {
            Some(x) => ring.add_assign(x, c),
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    /// Product truncated at total degree `deg`.
    pub fn mul(&self, other: &Self, ring: &PadicRing, deg: u32) -> Self {
        let mut out = LambdaPoly::default();
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &other.terms {
                if da + eb.iter().sum::<u32>() > deg {
                    continue;
                }
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(ring, e, &ring.mul(ca, cb));
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Inverse to total degree `deg`; the constant term must be a unit.
    pub fn inverse(&self, ring: &PadicRing, nvars: usize, deg: u32) -> Result<Self> {
        let c0 = ring.inv_unit(&self.constant_term(ring))?;
        // 1/(c(1 + h)) = c^{-1} Σ (-h)^j
        let mut minus_h = LambdaPoly::default();
        for (e, c) in &self.terms {
            if e.iter().any(|&x| x > 0) {
                minus_h.terms.insert(e.clone(), ring.neg(&ring.mul(c, &c0)));
            }
        }
        let mut out = LambdaPoly::constant(ring.one(), nvars);
        let mut pw = out.clone();
        let step = minus_h.min_positive_degree().unwrap_or(deg + 1).max(1);
        for _ in 0..=deg / step {
            pw = pw.mul(&minus_h, ring, deg);
            if pw.terms.is_empty() {
                break;
            }
            for (e, c) in &pw.terms {
                out.add_term(ring, e.clone(), c);
            }
        }
        Ok(out.scale(ring, &c0))
    }

    pub fn scale(&self, ring: &PadicRing, c: &PadicScalar) -> Self {
        let mut out = LambdaPoly { terms: self.terms.iter().map(|(e, x)| (e.clone(), ring.mul(x, c))).collect() };
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// `Λ ↦ Λ^k` in every variable.
    pub fn dilate(&self, k: u32) -> Self {
        LambdaPoly { terms: self.terms.iter().map(|(e, c)| (e.iter().map(|x| x * k).collect(), c.clone())).collect() }
    }

    /// Sum of the terms of total degree `<= deg` at `point`.
    pub fn eval(&self, ring: &PadicRing, point: &[PadicScalar], deg: u32) -> PadicScalar {
        let mut acc = ring.zero();
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() > deg {
                continue;
            }
            let mut v = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    v = ring.mul(&v, &ring.pow(x, k as u64));
                }
            }
            ring.add_assign(&mut acc, &v);
        }
        acc
    }
}

/// Caps for the expansion: `w_Γ(γ) <= w_gamma`, `w(u) <= w_x`, total Λ-degree `<= d_lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpCaps {
    pub w_gamma: Q,
    pub w_x: Q,
    pub d_lambda: u32,
}

impl ExpCaps {
    /// `d_Λ = 2 N p² / (p - 1)`, rounded up.
    pub fn default_degree(p: u64, prec: u32) -> u32 {
        (2 * prec as u64 * p * p).div_ceil(p - 1) as u32
    }
}

/// `exp πH = Σ A_{γ,u}(Λ) λ^γ x^u` on the capped slice.
#[derive(Clone, Debug)]
pub struct ExpPiHSeries {
    pub s: usize,
    pub n: usize,
    pub ring: PadicRing,
    /// `(γ, u)` of each Λ-variable: the f-monomials first, then those of P.
    pub vars: Vec<(LatticePoint, LatticePoint)>,
    pub caps: ExpCaps,
    pub geom_f: WeightedGeometry,
    pub geom_g: WeightedGeometry,
    /// Keyed by `γ ‖ u`.
    pub coeffs: BTreeMap<Vec<i64>, LambdaPoly>,
}

impl ExpPiHSeries {
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn coeff(&self, gamma: &LatticePoint, u: &LatticePoint) -> Option<&LambdaPoly> {
        let mut key = gamma.0.clone();
        key.extend(u.0.iter().copied());
        self.coeffs.get(&key)
    }

    /// `A_{0,0}(Λ)`.
    pub fn constant_coeff(&self) -> LambdaPoly {
        self.coeffs
            .get(&vec![0; self.s + self.n])
            .cloned()
            .unwrap_or_else(|| LambdaPoly::constant(self.ring.one(), self.nvars()))
    }
}

/// `π^k / k!`, `k = 0..=kmax`.
pub fn exp_coefficients(ring: &PadicRing, kmax: u32) -> Result<Vec<PadicScalar>> {
    let pi = pi_of(ring)?;
    let pm1 = ring.p - 1;
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut unit = 1u64; // k!/p^{v_p(k!)} mod modulus
    let mut v = 0u64;
    for k in 0..=kmax as u64 {
        if k > 0 {
            let t = vp_u64(k, ring.p);
            v += t as u64;
            let mut m = k;
            for _ in 0..t {
                m /= ring.p;
            }
            unit = ((unit as u128 * (m % ring.modulus) as u128) % ring.modulus as u128) as u64;
        }
        // π^k / (p^v u) = (-1)^v π^{k - (p-1)v} / u
        let e = k - pm1 * v;
        let mut c = ring.mul(&ring.pow(&pi, e), &ring.inv_unit(&ring.from_int(unit as i64))?);
        if v % 2 == 1 {
            c = ring.neg(&c);
        }
        out.push(c);
    }
    Ok(out)
}

/// The `(γ, u)` of each monomial of `H`, f-terms first.
pub fn h_support(family: &LaurentFamily) -> Vec<(LatticePoint, LatticePoint)> {
    let mut out: Vec<(LatticePoint, LatticePoint)> =
        family.f_terms.iter().map(|t| (LatticePoint::zero(family.s), t.u.clone())).collect();
    out.extend(family.p_terms.iter().map(|t| (t.gamma.clone(), t.v.clone())));
    out
}

const MAX_TERMS: usize = 4_000_000;

fn count_vectors(nvars: usize, deg: u32) -> usize {
    // C(deg + nvars, nvars), saturating
    let mut r: u128 = 1;
    for i in 0..nvars as u128 {
        r = r * (deg as u128 + 1 + i) / (i + 1);
        if r > MAX_TERMS as u128 {
            return usize::MAX;
        }
    }
    r as usize
}

/// Expand `Π_w exp(π Λ_w λ^{γ_w} x^{u_w})` to total Λ-degree `d_Λ`, keeping
/// `(γ, u)` within the caps.
pub fn exp_pi_h(family: &LaurentFamily, ring: &PadicRing, caps: ExpCaps, exec: Exec) -> Result<ExpPiHSeries> {
    family.validate()?;
    let geom_f = family.geometry_f()?;
    let geom_g = family.geometry_gamma(&geom_f)?;
    let vars = h_support(family);
    let nv = vars.len();
    if count_vectors(nv, caps.d_lambda) == usize::MAX {
        return Err(Error::Precision(format!("d_Λ = {} is too large for {nv} Λ-variables", caps.d_lambda)));
    }
    let gens: Vec<LatticePoint> = vars
        .iter()
        .map(|(g, u)| {
            let mut e = g.0.clone();
            e.extend(u.0.iter().copied());
            LatticePoint(e)
        })
        .collect();
    let geom_h = build_newton(&gens)?;
    let coef = exp_coefficients(ring, caps.d_lambda)?;
    let dim = family.s + family.n;
    let parts = map_range(exec, caps.d_lambda as usize + 1, |k0| {
        let mut out: BTreeMap<Vec<i64>, LambdaPoly> = BTreeMap::new();
        let mut k = vec![0u32; nv];
        k[0] = k0 as u32;
        let start: Vec<i64> = gens[0].0.iter().map(|x| x * k0 as i64).collect();
        expand_rest(ring, &gens, &coef, caps.d_lambda - k0 as u32, 1, &mut k, start, coef[k0].clone(), &mut |e, kk, c| {
            let g = LatticePoint(e[..family.s].to_vec());
            let u = LatticePoint(e[family.s..].to_vec());
            let (Some(wg), Some(wu)) = (geom_g.weight(&g).finite(), geom_f.weight(&u).finite()) else { return };
            if wg > caps.w_gamma || wu > caps.w_x {
                return;
            }
            out.entry(e.to_vec()).or_default().add_term(ring, kk.to_vec(), c);
        });
        out
    });
    let mut coeffs: BTreeMap<Vec<i64>, LambdaPoly> = BTreeMap::new();
    for part in parts {
        for (e, poly) in part {
            let slot = coeffs.entry(e).or_default();
            for (k, c) in poly.terms {
                slot.add_term(ring, k, &c);
            }
        }
    }
    coeffs.retain(|_, p| {
        p.terms.retain(|_, c| !c.is_zero());
        !p.terms.is_empty()
    });
    for e in coeffs.keys() {
        let g = LatticePoint(e[..family.s].to_vec());
        let u = LatticePoint(e[family.s..].to_vec());
        let wt = geom_g.weight(&g).finite().unwrap() + geom_f.weight(&u).finite().unwrap();
        match geom_h.weight(&LatticePoint(e.clone())).finite() {
            Some(wh) if wt <= wh => {}
            _ => return Err(Error::Invalid(format!("w_tot exceeds w_H at ({g}, {u})"))),
        }
    }
    debug_assert!(coeffs.keys().all(|e| e.len() == dim));
    Ok(ExpPiHSeries { s: family.s, n: family.n, ring: ring.clone(), vars, caps, geom_f, geom_g, coeffs })
}

#[allow(clippy::too_many_arguments)]
fn expand_rest(
    ring: &PadicRing,
    gens: &[LatticePoint],
    coef: &[PadicScalar],
    left: u32,
    w: usize,
    k: &mut Vec<u32>,
    e: Vec<i64>,
    c: PadicScalar,
    emit: &mut dyn FnMut(&[i64], &[u32], &PadicScalar),
) {
    if w == gens.len() {
        emit(&e, k, &c);
        return;
    }
    for kw in 0..=left {
        let ek: Vec<i64> = e.iter().zip(&gens[w].0).map(|(a, b)| a + b * kw as i64).collect();
        k[w] = kw;
        let ck = if kw == 0 { c.clone() } else { ring.mul(&c, &coef[kw as usize]) };
        if !ck.is_zero() {
            expand_rest(ring, gens, coef, left - kw, w + 1, k, ek, ck, emit);
        }
    }
    k[w] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Coeff, FTerm};
    use crate::pseries::agreement_digits;

    #[test]
    fn coefficients_match_direct_division() {
        let ring = PadicRing::new(3, 1, 2, 6).unwrap();
        let c = exp_coefficients(&ring, 12).unwrap();
        let pi = pi_of(&ring).unwrap();
        // k! c_k = π^k
        let mut fact = 1i64;
        for k in 0..=12u32 {
            if k > 0 {
                fact *= k as i64;
            }
            let lhs = ring.scale_int(&c[k as usize], fact % ring.modulus as i64);
            assert_eq!(lhs, ring.pow(&pi, k as u64), "k = {k}");
        }
    }

    #[test]
    fn single_monomial() {
        let fam = LaurentFamily {
            p: 3,
            a: 1,
            n: 1,
            s: 0,
            f_terms: vec![FTerm { u: LatticePoint(vec![1]), coeff: Coeff::Var(0) }],
            p_terms: vec![],
        };
        let ring = PadicRing::new(3, 1, 2, 5).unwrap();
        let caps = ExpCaps { w_gamma: Q::from_integer(0), w_x: Q::from_integer(20), d_lambda: 9 };
        let s = exp_pi_h(&fam, &ring, caps, Exec::Sequential).unwrap();
        let coef = exp_coefficients(&ring, 9).unwrap();
        for k in 0..=9u32 {
            let a = s.coeff(&LatticePoint(vec![]), &LatticePoint(vec![k as i64])).unwrap();
            assert_eq!(a.terms.len(), 1);
            assert_eq!(a.get(&[k]), Some(&coef[k as usize]));
        }
        assert_eq!(s.constant_coeff(), LambdaPoly::constant(ring.one(), 1));
    }

    #[test]
    fn reference_constant_coefficient() {
        let fam = LaurentFamily::reference();
        let ring = PadicRing::new(3, 1, 2, 6).unwrap();
        let caps = ExpCaps { w_gamma: Q::from_integer(2), w_x: Q::from_integer(2), d_lambda: 6 };
        let s = exp_pi_h(&fam, &ring, caps, Exec::Parallel).unwrap();
        let k00 = s.constant_coeff();
        // multisets of {2, -2, (1,1)} summing to zero: (Λ₁Λ₂)^k only
        let coef = exp_coefficients(&ring, 6).unwrap();
        let mut want = LambdaPoly::default();
        for k in 0..=3u32 {
            want.terms.insert(vec![k, k, 0], ring.mul(&coef[k as usize], &coef[k as usize]));
        }
        assert_eq!(k00, want);
        let pi = pi_of(&ring).unwrap();
        assert_eq!(k00.get(&[1, 1, 0]), Some(&ring.mul(&pi, &pi)));
        assert_eq!(k00.min_positive_degree(), Some(2));
    }

    #[test]
    fn inverse_round_trip() {
        let fam = LaurentFamily::reference();
        let ring = PadicRing::new(3, 1, 2, 6).unwrap();
        let caps = ExpCaps { w_gamma: Q::from_integer(1), w_x: Q::from_integer(1), d_lambda: 8 };
        let s = exp_pi_h(&fam, &ring, caps, Exec::Sequential).unwrap();
        let k = s.constant_coeff();
        let inv = k.inverse(&ring, 3, 8).unwrap();
        let one = k.mul(&inv, &ring, 8);
        assert_eq!(one, LambdaPoly::constant(ring.one(), 3));
        let pt = vec![ring.one(); 3];
        assert!(agreement_digits(&ring, &one.eval(&ring, &pt, 8), &ring.one()) >= 6);
    }
}
