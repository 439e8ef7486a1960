//! The eigenvector `η = pr₀ exp πH / A_{0,0}` and the residual of
//! `β*_{κ,t̄} Υ(η)^κ = 𝔉^κ Υ(η)^κ`.

use std::sync::Arc;

use crate::dwork::ord_pitilde;
use crate::error::{Error, Result};
use crate::geometry::{LatticePoint, Q};
use crate::padic::{KappaExponent, PadicRing, PadicScalar};
use crate::par::Exec;
use crate::pseries::agreement_digits;
use crate::sympow::alpha::{one_unit_series_power, operator_matrix};
use crate::sympow::basis::LinearSeries;
use crate::sympow::checks::apply;
use crate::sympow::{sym_family, Side, SymPower, SymSpace};

use super::expansion::{ExpPiHSeries, LambdaPoly};

/// `η = Σ R_{γ,u} λ^{-γ} x^{-u}` over `γ ∈ M₀(Γ)`, `u ∈ M₀(f)`, with
/// `R_{γ,u} = A_{-γ,-u} / A_{0,0}` kept as numerator and denominator.
#[derive(Clone, Debug)]
pub struct EtaVector {
    pub entries: Vec<(LatticePoint, LatticePoint, LambdaPoly)>,
    pub denominator: LambdaPoly,
}

/// Specialized `η` with the digits on which the last two cuts agree.
#[derive(Clone, Debug)]
pub struct EtaValues {
    pub entries: Vec<(LatticePoint, LatticePoint, PadicScalar)>,
    pub stable_digits: u32,
}

pub fn build_eta(series: &ExpPiHSeries) -> EtaVector {
    let s = series.s;
    let mut entries = Vec::new();
    for (e, poly) in &series.coeffs {
        let g = LatticePoint(e[..s].iter().map(|x| -x).collect());
        let u = LatticePoint(e[s..].iter().map(|x| -x).collect());
        if series.geom_g.weight(&g).finite().is_none() || series.geom_f.weight(&u).finite().is_none() {
            continue;
        }
        entries.push((g, u, poly.clone()));
    }
    entries.sort_by(|a, b| (&a.0 .0, &a.1 .0).cmp(&(&b.0 .0, &b.1 .0)));
    EtaVector { entries, denominator: series.constant_coeff() }
}

impl EtaVector {
    /// `R_{γ,u}` as Λ-series to total degree `deg`.
    pub fn series_entries(&self, ring: &PadicRing, nvars: usize, deg: u32) -> Result<Vec<(LatticePoint, LatticePoint, LambdaPoly)>> {
        let inv = self.denominator.inverse(ring, nvars, deg)?;
        Ok(self.entries.iter().map(|(g, u, a)| (g.clone(), u.clone(), a.mul(&inv, ring, deg))).collect())
    }

    /// `R_{γ,u}(point)` with numerator and denominator cut at total degree `deg`.
    pub fn specialize(&self, ring: &PadicRing, point: &[PadicScalar], deg: u32) -> Result<Vec<(LatticePoint, LatticePoint, PadicScalar)>> {
        let inv = ring.inv_unit(&self.denominator.eval(ring, point, deg))?;
        Ok(self
            .entries
            .iter()
            .map(|(g, u, a)| (g.clone(), u.clone(), ring.mul(&a.eval(ring, point, deg), &inv)))
            .collect())
    }

    /// Specialization at the cuts `r p^j - 1 <= d_Λ`; reports the last one.
    pub fn specialize_stable(&self, ring: &PadicRing, point: &[PadicScalar], d_lambda: u32) -> Result<EtaValues> {
        let r = self.denominator.min_positive_degree().unwrap_or(1);
        let p = ring.p as u32;
        let mut cuts = Vec::new();
        let mut pj = p;
        while r * pj - 1 <= d_lambda {
            cuts.push(r * pj - 1);
            pj *= p;
        }
        let Some(&last) = cuts.last() else {
            return Err(Error::Precision(format!("d_Λ = {d_lambda} is below the first cut")));
        };
        let entries = self.specialize(ring, point, last)?;
        let stable_digits = match cuts.len() {
            1 => 0,
            n => {
                let prev = self.specialize(ring, point, cuts[n - 2])?;
                prev.iter().zip(&entries).map(|(a, b)| agreement_digits(ring, &a.2, &b.2)).min().unwrap_or(ring.prec)
            }
        };
        Ok(EtaValues { entries, stable_digits })
    }
}

/// Residual of the eigen-relation in the truncated dual space.
#[derive(Clone, Debug)]
pub struct EigenReport {
    pub kappa: KappaExponent,
    /// `𝔉^κ`.
    pub eigenvalue: PadicScalar,
    /// Smallest normalized valuation `ord_p + c·W` of `β* v - 𝔉^κ v` over the kept rows.
    pub residual: Q,
    /// Lower bound for the discarded columns' contribution, in the same normalization.
    pub dropped: Q,
    /// Smallest valuation of `Υ(η) - 1`.
    pub eta_order: Q,
    pub dim: usize,
}

impl EigenReport {
    /// Digits of the residual that are not masked by truncation or precision.
    pub fn digits(&self, prec: u32) -> u32 {
        self.residual.min(self.dropped).min(Q::from_integer(prec as i64)).floor().to_integer().max(0) as u32
    }
}

/// `v = Υ(η)^κ`, `β*_{κ,t̄} v` and the residual against `𝔉^κ v`.
pub fn eigen_residual(
    space: Arc<SymSpace>,
    t_bar: &[u32],
    ring: &PadicRing,
    kappa: &KappaExponent,
    eta: &[(LatticePoint, LatticePoint, PadicScalar)],
    f_value: &PadicScalar,
    exec: Exec,
) -> Result<EigenReport> {
    let fam = sym_family(space.clone(), t_bar, ring, SymPower::Kappa(kappa.clone()), Side::Dual, exec)?;
    let beta = operator_matrix(&fam, exec)?;
    let p = ring.p;
    let a = space.family.a as u32;
    let c = ord_pitilde(p) / Q::from_integer((p as i64).pow(a - 1));
    let cq = c * Q::from_integer(space.q);
    let prec = Q::from_integer(ring.prec as i64);
    // linear part of Υ(η); entries outside the truncation feed the dropped bound
    let mut h: LinearSeries = Vec::new();
    let mut eps = prec;
    let mut dropped = prec;
    for (g, u, r) in eta {
        if g.is_zero() && u.is_zero() {
            continue;
        }
        let ord = ring.valuation_or_prec(r);
        eps = eps.min(ord);
        let wg = space.geom_g.weight(g).finite().unwrap_or(prec);
        let wu = space.geom_f.weight(u).finite().unwrap_or(prec);
        let kept = (wg <= space.trunc.w_gamma).then(|| space.lambda.position(&g.0)).flatten().zip(space.basis.single_slot(u));
        match kept {
            Some((l, v)) => {
                if !r.is_zero() {
                    h.push((l, v, r.clone()));
                }
            }
            None => dropped = dropped.min(cq * (wg + wu) + ord),
        }
    }
    if eps <= Q::from_integer(0) {
        return Err(Error::NotOneUnit);
    }
    // products of kept monomials that leave the basis
    let tr = &space.trunc;
    let w_min = space.basis.singles.first().map_or(prec, |x| x.1);
    let by_weight = cq * (tr.w_sym + Q::new(1, space.geom_f.d)) + eps;
    let by_length = Q::from_integer(tr.l_max as i64 + 1) * (cq * w_min + eps);
    dropped = dropped.min(by_weight).min(by_length);
    let v = one_unit_series_power(&space, ring, &h, (!h.is_empty()).then_some(eps), kappa)?;
    let index = space.joint_index();
    let x: Vec<PadicScalar> = index
        .iter()
        .map(|&(gi, si, _)| {
            let l = space.lambda.position(&space.lambda.slice[gi].0.0).expect("slice point is reachable");
            v.get(&space, l, si).clone()
        })
        .collect();
    let eigenvalue = ring.one_unit_power(f_value, kappa)?;
    let bx = apply(&beta, &x);
    let mut residual = prec;
    for (i, (y, xi)) in bx.iter().zip(&x).enumerate() {
        let r = ring.sub(y, &ring.mul(&eigenvalue, xi));
        if let Some(o) = ring.valuation(&r) {
            residual = residual.min(o + c * index[i].2);
        }
    }
    Ok(EigenReport { kappa: kappa.clone(), eigenvalue, residual, dropped, eta_order: eps, dim: index.len() })
}
