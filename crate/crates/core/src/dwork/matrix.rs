//! Weight-truncated matrices of nuclear operators and their Fredholm series.

use crate::error::{Error, Result};
use crate::geometry::Q;
use crate::padic::{PadicRing, PadicScalar};
use crate::par::{map_range, Exec};
use crate::pseries::fredholm_from_traces;

/// Square matrix in an unnormalized monomial basis.
///
/// `weights[i]` is the weight of basis vector `i`; the normalized entry
/// `(i, j)` has valuation `ord(entry) + c·(weights[j] - weights[i])` where
/// `c = ord_p π̃`. `floors` are lower bounds on the unnormalized valuations,
/// `row_floors` bound the normalized valuation of each row and `trunc_floor`
/// bounds the normalized valuation of every discarded row.
#[derive(Clone, Debug)]
pub struct NuclearMatrix {
    pub dim: usize,
    pub entries: Vec<PadicScalar>,
    pub floors: Vec<Q>,
    pub weights: Vec<Q>,
    pub row_floors: Vec<Q>,
    pub trunc_floor: Q,
    pub ring: PadicRing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FredholmSeries {
    pub coeffs: Vec<PadicScalar>,
    /// Certified p-adic digits per coefficient.
    pub certified: Vec<u32>,
}

impl NuclearMatrix {
    pub fn zeros(ring: &PadicRing, weights: Vec<Q>, trunc_floor: Q) -> Self {
        let dim = weights.len();
        NuclearMatrix {
            dim,
            entries: vec![ring.zero(); dim * dim],
            floors: vec![Q::from_integer(ring.prec as i64); dim * dim],
            row_floors: vec![Q::from_integer(0); dim],
            weights,
            trunc_floor,
            ring: ring.clone(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &PadicScalar {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PadicScalar, floor: Q) {
        self.entries[i * self.dim + j] = v;
        self.floors[i * self.dim + j] = floor;
    }

    pub fn trace(&self) -> PadicScalar {
        let mut t = self.ring.zero();
        for i in 0..self.dim {
            t = self.ring.add(&t, self.get(i, i));
        }
        t
    }

    /// `σ^k` applied to every entry.
    pub fn frobenius_pow(&self, k: usize) -> Self {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            *e = self.ring.frobenius_pow(e, k);
        }
        out
    }

    /// Every entry's valuation is at least its stored floor.
    pub fn floors_respected(&self) -> bool {
        self.entries.iter().zip(&self.floors).all(|(e, f)| self.ring.valuation_or_prec(e) >= *f)
    }

    /// Entry-wise reduction modulo π̂, as residues in F_q coordinates.
    pub fn residues(&self) -> Vec<Vec<u64>> {
        self.entries.iter().map(|e| self.ring.residue(e)).collect()
    }

    pub fn mul(&self, other: &Self, exec: Exec) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let n = self.dim;
        let ring = &self.ring;
        let al = ring.acc_len();
        let prec = Q::from_integer(ring.prec as i64);
        // floors as integers over a common denominator
        let den = self.floors.iter().chain(&other.floors).fold(1i64, |d, f| num_integer::lcm(d, *f.denom()));
        let scaled = |f: &Q| (f * Q::from_integer(den)).to_integer();
        let fa_int: Vec<i64> = self.floors.iter().map(scaled).collect();
        let fb_int: Vec<i64> = other.floors.iter().map(scaled).collect();
        let cap = scaled(&prec);
        let nonzero: Vec<Vec<usize>> =
            (0..n).map(|k| (0..n).filter(|&j| !other.entries[k * n + j].is_zero()).collect()).collect();
        let rows = map_range(exec, n, |i| {
            let mut acc = vec![0u128; n * al];
            let mut fl = vec![cap; n];
            for k in 0..n {
                let fa = fa_int[i * n + k];
                for (f, &fb) in fl.iter_mut().zip(&fb_int[k * n..(k + 1) * n]) {
                    *f = (*f).min(fa + fb);
                }
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for &j in &nonzero[k] {
                    ring.mul_acc(&mut acc[j * al..(j + 1) * al], &a.coeffs, &other.entries[k * n + j].coeffs);
                }
            }
            let vals: Vec<PadicScalar> = (0..n)
                .map(|j| {
                    let mut c = ring.from_coeffs(ring.reduce_acc(&acc[j * al..(j + 1) * al]));
                    ring.refresh_floor(&mut c);
                    c
                })
                .collect();
            let fl: Vec<Q> = fl.into_iter().map(|f| Q::new(f, den)).collect();
            (vals, fl)
        });
        let mut out = NuclearMatrix::zeros(ring, self.weights.clone(), self.trunc_floor.min(other.trunc_floor));
        out.row_floors = self.row_floors.clone();
        for (i, (vals, fl)) in rows.into_iter().enumerate() {
            for (j, (v, f)) in vals.into_iter().zip(fl).enumerate() {
                out.set(i, j, v, f.min(prec));
            }
        }
        Ok(out)
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> PadicScalar {
        let n = self.dim;
        let ring = &self.ring;
        let mut acc = vec![0u128; ring.acc_len()];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                let b = &other.entries[k * n + i];
                if !a.is_zero() && !b.is_zero() {
                    ring.mul_acc(&mut acc, &a.coeffs, &b.coeffs);
                }
            }
        }
        ring.from_coeffs(ring.reduce_acc(&acc))
    }

    /// `Tr(A^j)` for `j = 1..=d`.
    pub fn power_traces(&self, d: usize, exec: Exec) -> Result<Vec<PadicScalar>> {
        let mut powers: Vec<NuclearMatrix> = vec![self.clone()];
        let half = d.div_ceil(2);
        while powers.len() < half {
            let next = powers.last().unwrap().mul(self, exec)?;
            powers.push(next);
        }
        let mut out = Vec::with_capacity(d);
        for j in 1..=d {
            if j <= powers.len() {
                out.push(powers[j - 1].trace());
            } else {
                let a = j / 2;
                let b = j - a;
                out.push(powers[a - 1].trace_of_product(&powers[b - 1]));
            }
        }
        Ok(out)
    }

    /// Lower bound for `ord_p` of every Fredholm coefficient of degree `> d`:
    /// the sum of the `d + 1` smallest row floors.
    pub fn fredholm_tail(&self, d: usize) -> Q {
        let mut f = self.row_floors.clone();
        f.sort();
        if f.len() <= d {
            return Q::from_integer(self.ring.prec as i64);
        }
        f.iter().take(d + 1).fold(Q::from_integer(0), |a, b| a + b)
    }
}

/// `det(1 - A T)` to degree `d_T` via traces of powers and Newton's identities.
pub fn fredholm(matrix: &NuclearMatrix, d_t: usize, exec: Exec) -> Result<FredholmSeries> {
    if d_t > matrix.dim {
        return Err(Error::Invalid(format!("d_T = {d_t} exceeds the matrix dimension {}", matrix.dim)));
    }
    let ring = &matrix.ring;
    let traces = matrix.power_traces(d_t, exec)?;
    let (coeffs, loss) = fredholm_from_traces(ring, &traces)?;
    let tf = matrix.trunc_floor.floor().to_integer().max(0) as u32;
    let certified = loss.iter().map(|&l| ring.prec.saturating_sub(l).min(tf)).collect();
    Ok(FredholmSeries { coeffs, certified })
}

impl FredholmSeries {
    pub fn min_certified(&self) -> u32 {
        self.certified.iter().copied().min().unwrap_or(0)
    }

    pub fn is_trivial(&self, ring: &PadicRing) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero()) && self.coeffs.first().is_none_or(|c| *c == ring.one())
    }
}

/// `ord_p π̃ = (p-1)/p²`.
pub fn ord_pitilde(p: u64) -> Q {
    Q::new((p - 1) as i64, (p * p) as i64)
}
