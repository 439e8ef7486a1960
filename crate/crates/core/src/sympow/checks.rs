//! Structural checks on `β` and `β*`: normalization mod π̂, the trace
//! identity, the pairings, finite symmetric-power approximations and the
//! unit root of `det(1 - β T)`.

use std::sync::Arc;

use num_traits::Zero;

use crate::charsum::{FiberContext, LSeriesReport};
use crate::dwork::{dual_dwork_matrix, dwork_matrix, fredholm, next_weight, FiberOperator, FredholmSeries, NuclearMatrix};
use crate::error::{Error, Result};
use crate::ffield::ClosedPoint;
use crate::geometry::{enumerate_monoid, Q};
use crate::padic::{KappaExponent, PadicRing, PadicScalar};
use crate::par::Exec;
use crate::pseries::{agreement_digits, delta_q_pow, is_one_unit, newton_polygon, unit_reciprocal_root, valuations};

use super::alpha::{operator_matrix, sym_family, Side, SymMatrixFamily, SymPower};
use super::basis::{index_floor_sum, SymSpace};
use super::euler::{fiber_spectra, sym_power_trace};

/// `c_a = ord_p π̃ / p^{a-1}`, the normalization used by the block matrices.
pub fn block_scale(space: &SymSpace) -> Q {
    let p = space.family.p as i64;
    Q::new(p - 1, p * p) / Q::from_integer(p.pow(space.family.a as u32 - 1))
}

/// Normalized valuation of entry `(i, j)`, `None` for a zero entry.
pub fn normalized_valuation(m: &NuclearMatrix, c: Q, i: usize, j: usize) -> Option<Q> {
    m.ring.valuation(m.get(i, j)).map(|v| v + c * (m.weights[j] - m.weights[i]))
}

#[derive(Clone, Debug)]
pub struct NormalizationReport {
    /// Entry `(0, 0)` is `≡ 1 mod π̂`.
    pub leading_one: bool,
    /// Every other entry has positive normalized valuation.
    pub rank_one: bool,
    pub det: FredholmSeries,
    /// `det(1 - M T) ≡ 1 - T mod π̂` to the computed degree.
    pub det_one_minus_t: bool,
}

impl NormalizationReport {
    pub fn passed(&self) -> bool {
        self.leading_one && self.rank_one && self.det_one_minus_t
    }
}

/// Checks that `M` reduces to the projector onto the constant vector.
pub fn normalization_check(m: &NuclearMatrix, c: Q, d_t: usize, exec: Exec) -> Result<NormalizationReport> {
    let ring = &m.ring;
    let zero_w = (0..m.dim).find(|&i| m.weights[i].is_zero()).ok_or_else(|| Error::Invalid("no weight-0 index".into()))?;
    let leading_one = is_one_unit(ring, m.get(zero_w, zero_w));
    let mut rank_one = true;
    for i in 0..m.dim {
        for j in 0..m.dim {
            if (i, j) == (zero_w, zero_w) {
                continue;
            }
            if normalized_valuation(m, c, i, j).is_some_and(|v| v <= Q::zero()) {
                rank_one = false;
            }
        }
    }
    let det = fredholm(m, d_t.min(m.dim), exec)?;
    let mut det_one_minus_t = det.coeffs[0] == ring.one();
    if let Some(c1) = det.coeffs.get(1) {
        det_one_minus_t &= !ring.is_unit(&ring.add(c1, &ring.one()));
    }
    for cj in det.coeffs.iter().skip(2) {
        det_one_minus_t &= !ring.is_unit(cj);
    }
    Ok(NormalizationReport { leading_one, rank_one, det, det_one_minus_t })
}

#[derive(Clone, Debug)]
pub struct TraceIdentity {
    pub lhs: PadicScalar,
    pub rhs: PadicScalar,
    pub agreement: u32,
    pub certified: u32,
}

impl TraceIdentity {
    pub fn passed(&self) -> bool {
        self.agreement >= self.certified
    }
}

/// `(q - 1)^s Tr(β) = Σ_{deg λ̄ = 1} Tr([α_{t̄,λ̄}]_κ)` on the truncated matrix.
pub fn trace_identity(ctx: &FiberContext, beta: &NuclearMatrix, kappa: &KappaExponent) -> Result<TraceIdentity> {
    let ring = &ctx.ring;
    if beta.ring.prec != ring.prec {
        return Err(Error::Invalid("β and the fiber context use different precisions".into()));
    }
    let spectra = fiber_spectra(ctx, 1, |_| ring.prec)?;
    let mut rhs = ring.zero();
    let mut prec = ring.prec;
    for fb in &spectra {
        let (x, loss) = sym_power_trace(ring, fb, kappa, 1, ctx.family.n)?;
        prec = prec.min(fb.precision.saturating_sub(loss));
        rhs = ring.add(&rhs, &x);
    }
    let q1 = ring.from_int(ring.q() as i64 - 1);
    let mut lhs = beta.trace();
    for _ in 0..ctx.family.s {
        lhs = ring.mul(&lhs, &q1);
    }
    let certified = prec.min(beta.trunc_floor.floor().to_integer().max(0) as u32);
    let agreement = agreement_digits(ring, &lhs, &rhs);
    Ok(TraceIdentity { lhs, rhs, agreement, certified })
}

/// One step of `ψ_x ∘ F` and of `pr ∘ F ∘ Φ_x` on the first `size` monomials of a
/// fiber: entry `(v, u)` of the first must equal entry `(u, v)` of the second.
pub fn pairing_slice(op: &mut FiberOperator, point: &ClosedPoint, size: usize) -> Result<bool> {
    let (ring, f) = op.prepare(point.degree)?;
    let (vals, invs) = FiberOperator::lift_point(&ring, point)?;
    let fx = f.specialize_leading(&ring, &vals, &invs);
    let mut cap = Q::from_integer(1);
    let slice = loop {
        let s = enumerate_monoid(&op.geom_f, cap);
        if s.len() >= size {
            break s;
        }
        cap *= Q::from_integer(2);
    };
    let index: Vec<Vec<i64>> = slice.points.iter().take(size).map(|(u, _)| u.0.clone()).collect();
    let weights: Vec<Q> = slice.points.iter().take(size).map(|(_, w)| *w).collect();
    let trunc = next_weight(&op.geom_f, weights[size - 1]);
    // the primal step is stored as σ^{-1}(A)
    let a = dwork_matrix(&ring, &fx, &index, &weights, 1, trunc, Exec::Sequential)?.frobenius_pow(1 % ring.a);
    let b = dual_dwork_matrix(&ring, &fx, &index, &weights, 1, trunc, Exec::Sequential)?;
    Ok((0..size).all(|i| (0..size).all(|j| a.get(i, j) == b.get(j, i))))
}

/// `m(ū)! = (k - r)! Π mult_i!`, the weight of `e_ū` in the degree-`k` pairing.
pub fn pairing_weights(space: &SymSpace, k: u64) -> Vec<u64> {
    let fact = |n: u64| (1..=n).product::<u64>();
    space
        .joint_index()
        .iter()
        .map(|&(_, s, _)| {
            let idx = &space.basis.indices[s];
            let r = idx.len() as u64;
            if r > k {
                0
            } else {
                fact(k - r) * idx.multiplicity_factorial()
            }
        })
        .collect()
}

/// `k! ⟨ξ, ξ*⟩_k = Σ m(ū)! ξ_i ξ*_i`: the degree-`k` pairing scaled by `k!`.
pub fn scaled_pairing(ring: &PadicRing, weights: &[u64], xi: &[PadicScalar], xi_star: &[PadicScalar]) -> PadicScalar {
    let mut acc = ring.zero();
    for ((w, a), b) in weights.iter().zip(xi).zip(xi_star) {
        if *w != 0 {
            acc = ring.add(&acc, &ring.scale_int(&ring.mul(a, b), (*w % ring.modulus) as i64));
        }
    }
    acc
}

pub fn apply(m: &NuclearMatrix, v: &[PadicScalar]) -> Vec<PadicScalar> {
    let ring = &m.ring;
    (0..m.dim)
        .map(|i| {
            let mut acc = ring.zero();
            for (j, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    acc = ring.add(&acc, &ring.mul(m.get(i, j), x));
                }
            }
            acc
        })
        .collect()
}

/// `m(v̄)! β_{(γ,v̄),(μ,ū)} = m(ū)! β*_{(μ,ū),(γ,v̄)}` on every pair of indices.
pub fn sym_pairing_identity(beta: &NuclearMatrix, dual: &NuclearMatrix, weights: &[u64]) -> bool {
    let ring = &beta.ring;
    let n = beta.dim;
    (0..n).all(|i| {
        (0..n).all(|j| {
            let l = ring.scale_int(beta.get(i, j), (weights[i] % ring.modulus) as i64);
            let r = ring.scale_int(dual.get(j, i), (weights[j] % ring.modulus) as i64);
            l == r
        })
    })
}

#[derive(Clone, Debug)]
pub struct FiniteSymStep {
    pub k: u64,
    /// `v_p(κ - k)`.
    pub tau: u32,
    /// `min ord_p` over the columns of `[α]_κ - [α]_{(κ;m)}`.
    pub distance: Q,
    pub bound: Q,
    /// Digits on which `det(1 - β_{(κ;m)} T)` agrees with `det(1 - β T)`.
    pub det_agreement: u32,
}

#[derive(Clone, Debug)]
pub struct FiniteSymReport {
    pub eta_order: Q,
    pub steps: Vec<FiniteSymStep>,
}

impl FiniteSymReport {
    pub fn passed(&self) -> bool {
        let bounded = self.steps.iter().all(|s| s.distance >= s.bound);
        let shrinking = self.steps.windows(2).all(|w| w[1].distance > w[0].distance);
        let converging = self.steps.windows(2).all(|w| w[1].det_agreement >= w[0].det_agreement);
        bounded && shrinking && converging
    }
}

fn column_distance(a: &SymMatrixFamily, b: &SymMatrixFamily) -> Q {
    let ring = &a.ring;
    let mut out = Q::from_integer(ring.prec as i64);
    for (x, y) in a.columns.iter().zip(&b.columns) {
        for (u, v) in x.data.iter().zip(&y.data) {
            out = out.min(ring.valuation_or_prec(&ring.sub(u, v)));
        }
    }
    out
}

/// `v_p(κ - k)`, capped at the number of stored digits of `κ`.
pub fn kappa_distance(kappa: &KappaExponent, k: u64) -> u32 {
    let p = kappa.p;
    let mut rest = k;
    for (i, d) in kappa.digits.iter().enumerate() {
        if rest % p != *d {
            return i as u32;
        }
        rest /= p;
    }
    if rest == 0 {
        kappa.digits.len() as u32
    } else {
        0
    }
}

/// Compares `[α]_κ` with `[α]_{(κ;m)}` for each `k_m`, against
/// `min(min_{j<=τ} (τ - j + p^j ε), (k_m + 1) min_u ‖Z_u‖)` where
/// `ε = ‖η‖` and the second term only applies when columns are dropped.
pub fn finite_sym_approx(
    space: Arc<SymSpace>,
    t_bar: &[u32],
    ring: &PadicRing,
    kappa: &KappaExponent,
    ks: &[u64],
    exec: Exec,
) -> Result<FiniteSymReport> {
    let full = sym_family(space.clone(), t_bar, ring, SymPower::Kappa(kappa.clone()), Side::Primal, exec)?;
    let beta = operator_matrix(&full, exec)?;
    let d_t = space.trunc.d_t.min(beta.dim);
    let det = fredholm(&beta, d_t, exec)?;
    let eps = full.eta_order.unwrap_or(Q::from_integer(ring.prec as i64));
    let z_min = full
        .linear
        .iter()
        .skip(1)
        .flat_map(|z| z.iter().map(|(_, _, c)| ring.valuation_or_prec(c)))
        .min()
        .unwrap_or(Q::from_integer(ring.prec as i64));
    let p = Q::from_integer(ring.p as i64);
    let longest = space.basis.indices.iter().map(|x| x.len()).max().unwrap_or(0) as u64;
    let mut steps = Vec::new();
    for &k in ks {
        let fam = sym_family(space.clone(), t_bar, ring, SymPower::Finite(k), Side::Primal, exec)?;
        let distance = column_distance(&full, &fam);
        let tau = kappa_distance(kappa, k);
        let mut bound = (0..=tau)
            .map(|j| Q::from_integer((tau - j) as i64) + eps * num_traits::pow(p, j as usize))
            .min()
            .unwrap();
        if longest > k {
            bound = bound.min(Q::from_integer(k as i64 + 1) * z_min);
        }
        bound = bound.min(Q::from_integer(ring.prec as i64));
        let b = operator_matrix(&fam, exec)?;
        let dk = fredholm(&b, d_t, exec)?;
        let det_agreement = det
            .coeffs
            .iter()
            .zip(&dk.coeffs)
            .map(|(x, y)| agreement_digits(ring, x, y))
            .min()
            .unwrap_or(0);
        steps.push(FiniteSymStep { k, tau, distance, bound, det_agreement });
    }
    Ok(FiniteSymReport { eta_order: eps, steps })
}

/// `L^{(0)}(κ, t̄, T)^{(-1)^{s+1}} = δ_q^s det(1 - β T)` and the unit root of `det(1 - β T)`.
pub fn l0_unit_root(space: &SymSpace, beta: &NuclearMatrix, d_t: usize, exec: Exec) -> Result<(LSeriesReport, PadicScalar, u32)> {
    let ring = &beta.ring;
    let det = fredholm(beta, d_t, exec)?;
    let l = delta_q_pow(ring, &det.coeffs, ring.q(), space.family.s)?;
    let mut rep = LSeriesReport::padic(ring.p, l, det.min_certified());
    rep.newton_polygon = newton_polygon(&valuations(ring, &det.coeffs));
    let tail = index_floor_sum(&space.geom_f, &space.geom_g, ring.p, d_t + 1);
    let (root, rp) = unit_reciprocal_root(ring, &det.coeffs, Some(tail))?;
    if !is_one_unit(ring, &root) {
        return Err(Error::UnitRoot("unit root of det(1 - βT) is not a 1-unit".into()));
    }
    let prec = rp.min(det.min_certified());
    rep.unit_root = Some((root.clone(), prec));
    Ok((rep, root, prec))
}
