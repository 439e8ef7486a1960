//! Exact arithmetic in `Z[ζ_p]` and `Q(ζ_p)` in the power basis `1, ζ, …, ζ^{p-2}`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `Σ c_i ζ_p^i` with `i < p - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclotomicInteger {
    pub p: u64,
    pub coeffs: Vec<i64>,
}

impl CyclotomicInteger {
    pub fn zero(p: u64) -> Self {
        CyclotomicInteger { p, coeffs: vec![0; (p - 1) as usize] }
    }

    pub fn from_int(p: u64, c: i64) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = c;
        z
    }

    /// `ζ_p^k`.
    pub fn zeta_pow(p: u64, k: u64) -> Self {
        Self::from_counts(p, &{
            let mut counts = vec![0i64; p as usize];
            counts[(k % p) as usize] = 1;
            counts
        })
    }

    /// `Σ_r counts[r] ζ^r` for `r < p`, reduced with `ζ^{p-1} = -(1 + … + ζ^{p-2})`.
    pub fn from_counts(p: u64, counts: &[i64]) -> Self {
        let n = (p - 1) as usize;
        let top = if counts.len() > n { counts[n] } else { 0 };
        let coeffs = (0..n).map(|i| counts.get(i).copied().unwrap_or(0) - top).collect();
        CyclotomicInteger { p, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        CyclotomicInteger { p: self.p, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn neg(&self) -> Self {
        CyclotomicInteger { p: self.p, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.p as usize;
        let mut counts = vec![0i64; p];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                counts[(i + j) % p] += a * b;
            }
        }
        Self::from_counts(self.p, &counts)
    }

    /// Galois action `ζ ↦ ζ^c`.
    pub fn galois(&self, c: u64) -> Self {
        let p = self.p as usize;
        let mut counts = vec![0i64; p];
        for (i, &a) in self.coeffs.iter().enumerate() {
            counts[(i * c as usize) % p] += a;
        }
        Self::from_counts(self.p, &counts)
    }

    pub fn to_rational(&self) -> CycRational {
        CycRational {
            p: self.p,
            coeffs: self.coeffs.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect(),
        }
    }
}

impl fmt::Display for CyclotomicInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(usize, i64)> = self.coeffs.iter().copied().enumerate().filter(|(_, c)| *c != 0).collect();
        write_terms(f, terms.iter().map(|(i, c)| (*i, c.to_string())))
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: impl Iterator<Item = (usize, String)>) -> fmt::Result {
    let mut first = true;
    for (i, c) in terms {
        let (neg, mag) = match c.strip_prefix('-') {
            Some(m) => (true, m.to_string()),
            None => (false, c),
        };
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { "-" } else { "+" })?;
        }
        first = false;
        match i {
            0 => write!(f, "{mag}")?,
            _ => {
                if mag != "1" {
                    write!(f, "{mag}")?;
                }
                if i == 1 {
                    write!(f, "z")?;
                } else {
                    write!(f, "z^{i}")?;
                }
            }
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Element of `Q(ζ_p)` with big rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycRational {
    pub p: u64,
    pub coeffs: Vec<BigRational>,
}

impl CycRational {
    pub fn zero(p: u64) -> Self {
        CycRational { p, coeffs: vec![BigRational::zero(); (p - 1) as usize] }
    }

    pub fn one(p: u64) -> Self {
        Self::from_rational(p, BigRational::one())
    }

    pub fn from_rational(p: u64, r: BigRational) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = r;
        z
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        CycRational { p: self.p, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CycRational { p: self.p, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        CycRational { p: self.p, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CycRational { p: self.p, coeffs: self.coeffs.iter().map(|a| a * r).collect() }
    }

    fn reduce(p: u64, counts: Vec<BigRational>) -> Self {
        let n = (p - 1) as usize;
        let top = counts[n].clone();
        CycRational { p, coeffs: counts.into_iter().take(n).map(|c| c - &top).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.p as usize;
        let mut counts = vec![BigRational::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                counts[(i + j) % p] += a * b;
            }
        }
        Self::reduce(self.p, counts)
    }

    pub fn galois(&self, c: u64) -> Self {
        let p = self.p as usize;
        let mut counts = vec![BigRational::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            counts[(i * c as usize) % p] += a;
        }
        Self::reduce(self.p, counts)
    }

    /// Inverse via the product of the nontrivial Galois conjugates over the norm.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut conj = Self::one(self.p);
        for c in 2..self.p {
            conj = conj.mul(&self.galois(c));
        }
        let norm = self.mul(&conj);
        let n = norm.coeffs[0].clone();
        debug_assert!(norm.coeffs[1..].iter().all(|c| c.is_zero()));
        Some(conj.scale(&n.recip()))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn to_integer(&self) -> Option<CyclotomicInteger> {
        if !self.is_integral() {
            return None;
        }
        let coeffs: Option<Vec<i64>> = self.coeffs.iter().map(|c| c.to_integer().to_i64()).collect();
        coeffs.map(|coeffs| CyclotomicInteger { p: self.p, coeffs })
    }
}

impl fmt::Display for CycRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(usize, String)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let s = if c.is_integer() { c.to_integer().to_string() } else { format!("({})", c) };
                let s = if c.is_negative() && !c.is_integer() { format!("-({})", c.abs()) } else { s };
                (i, s)
            })
            .collect();
        write_terms(f, terms.into_iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_reduction() {
        let z = CyclotomicInteger::zeta_pow(3, 1);
        assert_eq!(CyclotomicInteger::from_int(3, 1).add(&z).to_string(), "1+z");
        assert_eq!(CyclotomicInteger::zeta_pow(3, 2).to_string(), "-1-z");
        assert_eq!(CyclotomicInteger::from_counts(5, &[1, 1, 1, 1, 1]).to_string(), "0");
        assert_eq!(z.mul(&z).mul(&z), CyclotomicInteger::from_int(3, 1));
    }

    #[test]
    fn inverse() {
        let x = CyclotomicInteger { p: 5, coeffs: vec![2, -1, 0, 3] }.to_rational();
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y), CycRational::one(5));
    }
}
