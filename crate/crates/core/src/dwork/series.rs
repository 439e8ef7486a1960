//! Sparse multivariate Laurent series with p-adic coefficients, and the
//! Frobenius series `F(t̂, λ, x) = Π θ(ĉ λ^γ x^u)`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::ffield::FqField;
use crate::geometry::{LatticePoint, WeightedGeometry, Q};
use crate::padic::{PadicRing, PadicScalar};

use super::theta::{default_imax, theta, SplittingSeries};

#[derive(Clone, Debug, Default)]
pub struct SparseSeries {
    pub nvars: usize,
    pub terms: HashMap<Vec<i64>, PadicScalar>,
}

impl SparseSeries {
    pub fn one(ring: &PadicRing, nvars: usize) -> Self {
        let mut terms = HashMap::new();
        terms.insert(vec![0; nvars], ring.one());
        SparseSeries { nvars, terms }
    }

    pub fn get(&self, e: &[i64]) -> Option<&PadicScalar> {
        self.terms.get(e)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `θ(c · z^e)` as a series.
    pub fn theta_monomial(ring: &PadicRing, th: &SplittingSeries, c: &PadicScalar, e: &[i64]) -> Self {
        let mut terms = HashMap::new();
        let mut cp = ring.one();
        for (i, ti) in th.coeffs.iter().enumerate() {
            let v = ring.mul(ti, &cp);
            if !v.is_zero() {
                terms.insert(e.iter().map(|&x| x * i as i64).collect(), v);
            }
            cp = ring.mul(&cp, c);
        }
        SparseSeries { nvars: e.len(), terms }
    }

    /// Product, dropping coefficients that vanish at the working precision.
    pub fn mul(&self, other: &Self, ring: &PadicRing) -> Self {
        let mut acc: HashMap<Vec<i64>, Vec<u128>> = HashMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                if ca.val_floor + cb.val_floor >= Q::from_integer(ring.prec as i64) {
                    continue;
                }
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let slot = acc.entry(e).or_insert_with(|| vec![0u128; ring.acc_len()]);
                ring.mul_acc(slot, &ca.coeffs, &cb.coeffs);
            }
        }
        let terms = acc
            .into_iter()
            .filter_map(|(e, a)| {
                let mut c = ring.from_coeffs(ring.reduce_acc(&a));
                if c.is_zero() {
                    return None;
                }
                ring.refresh_floor(&mut c);
                Some((e, c))
            })
            .collect();
        SparseSeries { nvars: self.nvars, terms }
    }

    /// `z ↦ z^k` in every variable.
    pub fn dilate(&self, k: i64) -> Self {
        SparseSeries {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.iter().map(|x| x * k).collect(), c.clone())).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&PadicScalar) -> PadicScalar) -> Self {
        SparseSeries { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect() }
    }

    /// Substitute values for the first `vals.len()` variables (given with their
    /// inverses), leaving a series in the remaining ones.
    pub fn specialize_leading(&self, ring: &PadicRing, vals: &[PadicScalar], invs: &[PadicScalar]) -> Self {
        let k = vals.len();
        let mut out: HashMap<Vec<i64>, PadicScalar> = HashMap::new();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for i in 0..k {
                let base = if e[i] >= 0 { &vals[i] } else { &invs[i] };
                v = ring.mul(&v, &ring.pow(base, e[i].unsigned_abs()));
            }
            let rest = e[k..].to_vec();
            match out.get_mut(&rest) {
                Some(x) => ring.add_assign(x, &v),
                None => {
                    out.insert(rest, v);
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        for c in out.values_mut() {
            c.val_floor = Q::from_integer(0);
            ring.refresh_floor(c);
        }
        SparseSeries { nvars: self.nvars - k, terms: out }
    }
}

/// A family with every coefficient replaced by its Teichmüller lift in `ring`.
#[derive(Clone, Debug)]
pub struct LiftedFamily {
    pub family: LaurentFamily,
    pub ring: PadicRing,
    /// `(coefficient, γ, u)` per monomial.
    pub terms: Vec<(PadicScalar, LatticePoint, LatticePoint)>,
}

/// Teichmüller lift of an `F_q` element into a ring of unramified degree divisible by `a`.
pub fn lift_residue(ring: &PadicRing, base_a: usize, x: u32) -> Result<PadicScalar> {
    if ring.a % base_a != 0 {
        return Err(Error::Invalid("ring does not contain the base field".into()));
    }
    let base = FqField::new(ring.p, base_a)?;
    let big = FqField::new(ring.p, ring.a)?;
    let y = base.embedding_into(&big)?.apply(&base, &big, x);
    Ok(ring.teichmuller(&big.unpack(y)))
}

pub fn lift_family(family: &LaurentFamily, t_bar: &[u32], ring: &PadicRing) -> Result<LiftedFamily> {
    let terms = family
        .monomials(t_bar)?
        .into_iter()
        .map(|m| Ok((lift_residue(ring, family.a, m.coeff)?, m.gamma, m.u)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiftedFamily { family: family.clone(), ring: ring.clone(), terms })
}

/// `F_m` in the variables `(λ, x)` with coefficients truncated at the working precision,
/// together with the caps used when reading off its coefficients.
#[derive(Clone, Debug)]
pub struct FrobeniusSeries {
    pub m: usize,
    pub s: usize,
    pub n: usize,
    pub series: SparseSeries,
    pub caps: (Q, Q),
}

impl FrobeniusSeries {
    /// Coefficient `𝓑^m(γ, u)`.
    pub fn coeff(&self, gamma: &LatticePoint, u: &LatticePoint) -> Option<&PadicScalar> {
        let mut key = gamma.0.clone();
        key.extend(u.0.iter().copied());
        self.series.get(&key)
    }

    /// Terms within the caps, with their weights.
    pub fn capped_terms<'a>(
        &'a self,
        geom_g: &'a WeightedGeometry,
        geom_f: &'a WeightedGeometry,
    ) -> impl Iterator<Item = (LatticePoint, LatticePoint, &'a PadicScalar)> + 'a {
        self.series.terms.iter().filter_map(move |(e, c)| {
            let g = LatticePoint(e[..self.s].to_vec());
            let u = LatticePoint(e[self.s..].to_vec());
            let wg = geom_g.weight(&g).finite()?;
            let wu = geom_f.weight(&u).finite()?;
            (wg <= self.caps.0 && wu <= self.caps.1).then_some((g, u, c))
        })
    }
}

/// `F(t̂, λ, x)` over `(s+n)` variables.
pub fn frobenius_one(lifted: &LiftedFamily) -> Result<SparseSeries> {
    let ring = &lifted.ring;
    let fam = &lifted.family;
    let th = theta(ring, default_imax(ring.p, ring.prec))?;
    let mut f = SparseSeries::one(ring, fam.s + fam.n);
    for (c, g, u) in &lifted.terms {
        let mut e = g.0.clone();
        e.extend(u.0.iter().copied());
        f = f.mul(&SparseSeries::theta_monomial(ring, &th, c, &e), ring);
    }
    Ok(f)
}

/// `F_m(t̂, λ, x) = Π_{i<m} F^{σ^i}(t̂, λ^{p^i}, x^{p^i})`.
pub fn frobenius_series(lifted: &LiftedFamily, m: usize, caps: (Q, Q)) -> Result<FrobeniusSeries> {
    if m == 0 {
        return Err(Error::Invalid("m must be positive".into()));
    }
    let ring = &lifted.ring;
    let f = frobenius_one(lifted)?;
    let mut out = f.clone();
    let mut pk = 1i64;
    for i in 1..m {
        pk *= ring.p as i64;
        let twisted = f.map_coeffs(|c| ring.frobenius_pow(c, i)).dilate(pk);
        out = twisted.mul(&out, ring);
    }
    Ok(FrobeniusSeries { m, s: lifted.family.s, n: lifted.family.n, series: out, caps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::LaurentFamily;
    use crate::pseries;

    #[test]
    fn single_monomial_is_theta() {
        let ring = PadicRing::new(3, 1, 2, 4).unwrap();
        let th = theta(&ring, default_imax(3, 4)).unwrap();
        let t = ring.teichmuller(&[2]);
        let f = SparseSeries::theta_monomial(&ring, &th, &t, &[1]);
        let mut ti = ring.one();
        for i in 0..8 {
            let want = ring.mul(&th.coeffs[i], &ti);
            let got = f.get(&[i as i64]).cloned().unwrap_or_else(|| ring.zero());
            assert_eq!(got, want, "i = {i}");
            ti = ring.mul(&ti, &t);
        }
    }

    #[test]
    fn constant_term_without_cancellation() {
        use crate::family::{Coeff, FTerm, PTerm};
        let ring = PadicRing::new(3, 1, 2, 4).unwrap();
        let fam = LaurentFamily {
            p: 3,
            a: 1,
            n: 1,
            s: 1,
            f_terms: vec![FTerm { u: LatticePoint(vec![2]), coeff: Coeff::Fixed(1) }],
            p_terms: vec![PTerm { gamma: LatticePoint(vec![1]), v: LatticePoint(vec![1]), coeff: 1 }],
        };
        let f = frobenius_one(&lift_family(&fam, &[], &ring).unwrap()).unwrap();
        assert_eq!(f.get(&[0, 0]), Some(&ring.one()));
    }

    #[test]
    fn constant_term_and_second_power() {
        let ring = PadicRing::new(3, 1, 2, 4).unwrap();
        let lifted = lift_family(&LaurentFamily::reference(), &[1, 1], &ring).unwrap();
        let f1 = frobenius_series(&lifted, 1, (Q::from_integer(4), Q::from_integer(4))).unwrap();
        let c0 = f1.coeff(&LatticePoint(vec![0]), &LatticePoint(vec![0])).unwrap();
        assert!(!ring.is_unit(&ring.sub(c0, &ring.one())));
        // direct product of dense truncations
        let f = frobenius_one(&lifted).unwrap();
        let f2 = frobenius_series(&lifted, 2, (Q::from_integer(4), Q::from_integer(4))).unwrap();
        for (g, u) in [(0i64, 0i64), (1, 1), (2, 0), (3, 3), (1, -1), (4, 2), (0, 6)] {
            let mut acc = ring.zero();
            for (e, c) in &f.terms {
                let rest = (g - 3 * e[0], u - 3 * e[1]);
                if let Some(d) = f.get(&[rest.0, rest.1]) {
                    acc = ring.add(&acc, &ring.mul(c, d));
                }
            }
            let got = f2.coeff(&LatticePoint(vec![g]), &LatticePoint(vec![u])).cloned().unwrap_or_else(|| ring.zero());
            assert!(pseries::agreement_digits(&ring, &got, &acc) >= 4, "({g}, {u})");
        }
    }
}
