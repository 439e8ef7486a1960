//! Laurent families `G(t, λ, x) = f(t, x) + P(λ, x)` and their geometry.

use crate::error::{Error, Result};
use crate::geometry::{build_newton, relative_polytope, LatticePoint, WeightedGeometry};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coeff {
    /// Coefficient taken from the `i`-th entry of `t̄`.
    Var(usize),
    /// Fixed nonzero residue in F_q (packed).
    Fixed(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FTerm {
    pub u: LatticePoint,
    pub coeff: Coeff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PTerm {
    pub gamma: LatticePoint,
    pub v: LatticePoint,
    pub coeff: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentFamily {
    pub p: u64,
    pub a: usize,
    pub n: usize,
    pub s: usize,
    pub f_terms: Vec<FTerm>,
    pub p_terms: Vec<PTerm>,
}

/// One monomial of the family after substituting `t̄`: coefficient residue,
/// λ-exponent and x-exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: u32,
    pub gamma: LatticePoint,
    pub u: LatticePoint,
}

impl LaurentFamily {
    pub fn num_vars(&self) -> usize {
        self.f_terms.iter().filter(|t| matches!(t.coeff, Coeff::Var(_))).count()
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.f_terms {
            if t.u.dim() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: t.u.dim() });
            }
        }
        for t in &self.p_terms {
            if t.gamma.dim() != self.s {
                return Err(Error::DimensionMismatch { expected: self.s, found: t.gamma.dim() });
            }
            if t.v.dim() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: t.v.dim() });
            }
            if t.coeff == 0 {
                return Err(Error::Invalid("zero coefficient in P".into()));
            }
        }
        Ok(())
    }

    pub fn geometry_f(&self) -> Result<WeightedGeometry> {
        let gens: Vec<LatticePoint> = self.f_terms.iter().map(|t| t.u.clone()).collect();
        build_newton(&gens)
    }

    pub fn geometry_gamma(&self, geom_f: &WeightedGeometry) -> Result<WeightedGeometry> {
        let supp: Vec<(LatticePoint, LatticePoint)> =
            self.p_terms.iter().map(|t| (t.gamma.clone(), t.v.clone())).collect();
        relative_polytope(&supp, geom_f)
    }

    /// Monomials of `G(t̄, λ, x)` with residues for every coefficient.
    pub fn monomials(&self, t_bar: &[u32]) -> Result<Vec<Monomial>> {
        let mut out = Vec::new();
        for t in &self.f_terms {
            let c = match t.coeff {
                Coeff::Var(i) => *t_bar
                    .get(i)
                    .ok_or_else(|| Error::Invalid(format!("t_bar has no entry {i}")))?,
                Coeff::Fixed(c) => c,
            };
            if c == 0 {
                return Err(Error::Invalid("zero coordinate in t_bar".into()));
            }
            out.push(Monomial { coeff: c, gamma: LatticePoint::zero(self.s), u: t.u.clone() });
        }
        for t in &self.p_terms {
            out.push(Monomial { coeff: t.coeff, gamma: t.gamma.clone(), u: t.v.clone() });
        }
        Ok(out)
    }

    /// The reference family `t1 x^2 + t2 x^-2 + λ x` over F_3.
    pub fn reference() -> LaurentFamily {
        LaurentFamily {
            p: 3,
            a: 1,
            n: 1,
            s: 1,
            f_terms: vec![
                FTerm { u: LatticePoint(vec![2]), coeff: Coeff::Var(0) },
                FTerm { u: LatticePoint(vec![-2]), coeff: Coeff::Var(1) },
            ],
            p_terms: vec![PTerm { gamma: LatticePoint(vec![1]), v: LatticePoint(vec![1]), coeff: 1 }],
        }
    }
}
