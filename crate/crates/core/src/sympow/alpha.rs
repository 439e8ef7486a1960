//! `[α]_κ`, `[α*]_κ` and the block matrices of `β_{κ,t̄}` and `β*_{κ,t̄}`.

use std::sync::Arc;

use num_traits::Zero;

use crate::dwork::{frobenius_series, lift_family, ord_pitilde, NuclearMatrix, SparseSeries};
use crate::error::{Error, Result};
use crate::padic::{KappaExponent, PadicRing, PadicScalar};
use crate::par::{map_range, Exec};
use crate::geometry::{LatticePoint, Q};

use super::basis::{LinearSeries, SymSeries, SymSpace};

/// Which side of the pairing a family lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Primal,
    Dual,
}

/// The exponent applied to the constant column factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymPower {
    /// `[α]_κ`: every column uses `(1 + η)^{κ - r}`.
    Kappa(KappaExponent),
    /// `[α]_{(k)}`: `(1 + η)^{k - r}`, columns of length `> k` are zero.
    Finite(u64),
}

impl SymPower {
    fn exponent(&self, r: usize, p: u64) -> Option<KappaExponent> {
        match self {
            SymPower::Kappa(k) => Some(k.minus(r as u64)),
            SymPower::Finite(k) => (r as u64 <= *k).then(|| {
                let v = *k - r as u64;
                let mut m = 1u32;
                while p.pow(m) <= v {
                    m += 1;
                }
                KappaExponent::from_int(p, v as i64, m as usize)
            }),
        }
    }
}

/// `B^{[κ]}(λ) = Σ b_γ λ^γ`, stored column by column: `columns[ū]` is the
/// image of `e_ū` (or `e*_ū`) as a truncated series.
#[derive(Clone, Debug)]
pub struct SymMatrixFamily {
    pub space: Arc<SymSpace>,
    pub ring: PadicRing,
    pub side: Side,
    pub power: SymPower,
    pub columns: Vec<SymSeries>,
    /// The linear images `Z_u`, slot 0 being the image of 1.
    pub linear: Vec<LinearSeries>,
    /// Smallest `ord_p` among the coefficients of `η = Z_0 - 1`.
    pub eta_order: Option<Q>,
}

impl SymMatrixFamily {
    /// `b_g` as a dense `|basis| x |basis|` matrix, row-major.
    pub fn block(&self, g: &[i64]) -> Option<Vec<PadicScalar>> {
        let l = self.space.lambda.position(g)?;
        let s = self.space.basis.len();
        let mut out = vec![self.ring.zero(); s * s];
        for (j, col) in self.columns.iter().enumerate() {
            for i in 0..s {
                out[i * s + j] = col.get(&self.space, l, i).clone();
            }
        }
        Some(out)
    }
}

/// `F_a(t̂, λ, x)` at `t̄` in the working ring.
pub fn frobenius_for(space: &SymSpace, t_bar: &[u32], ring: &PadicRing) -> Result<SparseSeries> {
    let lifted = lift_family(&space.family, t_bar, ring)?;
    let caps = (space.trunc.w_gamma, space.trunc.w_sym);
    Ok(frobenius_series(&lifted, space.family.a, caps)?.series)
}

/// The images of `1` and of every kept `e_u` (primal) or `e*_u` (dual):
/// `Z_u = Σ_{v,γ} 𝓑(γ, qv - u) λ^γ e_v` and `Z*_u = Σ_{z,γ} 𝓑(γ, qu - z) λ^γ e*_z`.
pub fn linear_images(space: &SymSpace, f: &SparseSeries, side: Side) -> Vec<LinearSeries> {
    let s = space.family.s;
    let q = space.q;
    let mut sources: Vec<LatticePoint> = vec![LatticePoint::zero(space.family.n)];
    sources.extend(space.basis.singles.iter().map(|(u, _)| u.clone()));
    let mut terms: Vec<(&Vec<i64>, &PadicScalar)> = f.terms.iter().collect();
    terms.sort_by(|a, b| a.0.cmp(b.0));
    sources
        .iter()
        .map(|u| {
            let mut out: LinearSeries = Vec::new();
            for (e, c) in &terms {
                let Some(l) = space.lambda.position(&e[..s]) else { continue };
                let w = &e[s..];
                let target: Option<Vec<i64>> = match side {
                    Side::Primal => {
                        let t: Vec<i64> = w.iter().zip(&u.0).map(|(a, b)| a + b).collect();
                        t.iter().all(|x| x % q == 0).then(|| t.iter().map(|x| x / q).collect())
                    }
                    Side::Dual => Some(u.0.iter().zip(w).map(|(a, b)| q * a - b).collect()),
                };
                if let Some(v) = target.and_then(|t| space.basis.single_slot(&LatticePoint(t))) {
                    out.push((l, v, (*c).clone()));
                }
            }
            out
        })
        .collect()
}

/// `(1 + η)^τ` by the binomial series, stopping once `l·ord(η) >= N`.
pub fn one_unit_series_power(
    space: &SymSpace,
    ring: &PadicRing,
    eta: &LinearSeries,
    eta_order: Option<Q>,
    tau: &KappaExponent,
) -> Result<SymSeries> {
    let mut out = SymSeries::one(space, ring);
    let Some(eps) = eta_order else { return Ok(out) };
    if eps <= Q::zero() {
        return Err(Error::NotOneUnit);
    }
    let prec = Q::from_integer(ring.prec as i64);
    let mut pw = SymSeries::one(space, ring);
    let mut l = 1u64;
    while Q::from_integer(l as i64) * eps < prec {
        pw = pw.mul_linear(space, ring, eta);
        if pw.is_zero() {
            break;
        }
        let c = tau.binomial_mod(l, ring.modulus);
        if c != 0 {
            out.add_scaled(ring, &pw, &ring.from_int(c as i64));
        }
        l += 1;
    }
    Ok(out)
}

/// `[α]_κ` (primal) or `[α*]_κ` (dual) on the kept monomials.
pub fn sym_family(
    space: Arc<SymSpace>,
    t_bar: &[u32],
    ring: &PadicRing,
    power: SymPower,
    side: Side,
    exec: Exec,
) -> Result<SymMatrixFamily> {
    if let SymPower::Kappa(k) = &power {
        k.check_precision(ring)?;
    }
    let f = frobenius_for(&space, t_bar, ring)?;
    let linear = linear_images(&space, &f, side);
    let mut eta = linear[0].clone();
    let mut constant = ring.zero();
    eta.retain(|(l, v, c)| {
        if *l == 0 && *v == 0 {
            constant = c.clone();
            false
        } else {
            true
        }
    });
    let h = ring.sub(&constant, &ring.one());
    if !h.is_zero() {
        eta.push((0, 0, h));
    }
    let eta_order = eta.iter().map(|(_, _, c)| ring.valuation_or_prec(c)).min();
    if eta_order.is_some_and(|e| e <= Q::zero()) {
        return Err(Error::NotOneUnit);
    }
    let l_max = space.trunc.l_max;
    let powers: Vec<Option<SymSeries>> = (0..=l_max)
        .map(|r| match power.exponent(r, ring.p) {
            Some(tau) => one_unit_series_power(&space, ring, &eta, eta_order, &tau).map(Some),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;
    let columns = map_range(exec, space.basis.len(), |j| {
        let idx = &space.basis.indices[j];
        match &powers[idx.len()] {
            None => SymSeries::zero(&space, ring),
            Some(start) => {
                let mut g = start.clone();
                for &part in &idx.parts {
                    g = g.mul_linear(&space, ring, &linear[part as usize + 1]);
                }
                g
            }
        }
    });
    Ok(SymMatrixFamily { space, ring: ring.clone(), side, power, columns, linear, eta_order })
}

/// Block matrix over the joint index `(γ, ū)`: `β` for the primal family,
/// `β*` for the dual one.
pub fn operator_matrix(fam: &SymMatrixFamily, exec: Exec) -> Result<NuclearMatrix> {
    let space = &fam.space;
    let ring = &fam.ring;
    let p = ring.p;
    let q = space.q;
    let c = ord_pitilde(p);
    let ca = c / Q::from_integer((p as i64).pow(space.family.a as u32 - 1));
    let qq = Q::from_integer(q);
    let prec = Q::from_integer(ring.prec as i64);
    let index = space.joint_index();
    let n = index.len();
    let rows = map_range(exec, n, |i| {
        let (gi, vi, wi) = index[i];
        let g = &space.lambda.slice[gi].0;
        (0..n)
            .map(|j| {
                let (mj, uj, wj) = index[j];
                let m = &space.lambda.slice[mj].0;
                // primal: λ^{qγ_row - μ_col}; dual: λ^{qγ_col - τ_row}
                let (off, floor) = match fam.side {
                    Side::Primal => (g.scale(q).sub(m), ca * (qq * wi - wj)),
                    Side::Dual => (m.scale(q).sub(g), ca * (qq * wj - wi)),
                };
                let val = space
                    .lambda
                    .position(&off.0)
                    .map(|l| fam.columns[uj].get(space, l, vi).clone())
                    .unwrap_or_else(|| ring.zero());
                let floor = if val.is_zero() { prec } else { floor.max(Q::zero()).min(prec) };
                (val, floor)
            })
            .collect::<Vec<_>>()
    });
    let pm1 = Q::from_integer(p as i64 - 1);
    let sign = match fam.side {
        Side::Primal => Q::from_integer(1),
        Side::Dual => Q::from_integer(-1),
    };
    let weights: Vec<Q> = index.iter().map(|x| sign * x.2).collect();
    let mut out = NuclearMatrix::zeros(ring, weights, c * pm1 * space.dropped_weight());
    out.row_floors = index.iter().map(|x| c * pm1 * x.2).collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, (v, f)) in row.into_iter().enumerate() {
            out.set(i, j, v, f);
        }
    }
    if out.dim == 0 {
        return Err(Error::Truncation("empty basis".into()));
    }
    Ok(out)
}

/// `β_{κ,t̄}` on the truncated basis.
pub fn beta_matrix(fam: &SymMatrixFamily, exec: Exec) -> Result<NuclearMatrix> {
    if fam.side != Side::Primal {
        return Err(Error::Invalid("beta_matrix needs the primal family".into()));
    }
    operator_matrix(fam, exec)
}

/// `β*_{κ,t̄}` on the truncated dual basis.
pub fn dual_beta_matrix(fam: &SymMatrixFamily, exec: Exec) -> Result<NuclearMatrix> {
    if fam.side != Side::Dual {
        return Err(Error::Invalid("dual_beta_matrix needs the dual family".into()));
    }
    operator_matrix(fam, exec)
}
