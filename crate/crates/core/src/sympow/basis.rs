//! Index sets for symmetric powers and the truncated series ring in `(λ, e_u)`.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::geometry::{enumerate_monoid, LatticePoint, WeightedGeometry, Q};
use crate::padic::{PadicRing, PadicScalar};

/// Largest basis the truncated matrices are allowed to reach.
pub const MAX_DIM: usize = 20_000;

/// A monomial `e_ū = e_{u_1} ⋯ e_{u_r}`; `parts` index the nonzero points of
/// [`SymBasis::singles`] in nondecreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymIndex {
    pub parts: Vec<u16>,
    pub weight: Q,
}

impl SymIndex {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `Π mult_i!` over the distinct parts.
    pub fn multiplicity_factorial(&self) -> u64 {
        let mut out = 1u64;
        let mut run = 0u64;
        for (i, x) in self.parts.iter().enumerate() {
            run = if i > 0 && self.parts[i - 1] == *x { run + 1 } else { 1 };
            out *= run;
        }
        out
    }
}

/// Caps `(L_max, W_sym, W_Γ)` and the determinant degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymTruncation {
    pub l_max: usize,
    pub w_sym: Q,
    pub w_gamma: Q,
    pub d_t: usize,
}

impl SymTruncation {
    pub fn new(l_max: usize, w_sym: Q, w_gamma: Q, d_t: usize) -> Result<Self> {
        if w_sym < Q::zero() || w_gamma < Q::zero() {
            return Err(Error::Truncation("weight caps must be non-negative".into()));
        }
        if d_t == 0 {
            return Err(Error::Truncation("d_T must be positive".into()));
        }
        Ok(SymTruncation { l_max, w_sym, w_gamma, d_t })
    }

    /// Both weight caps raised by `step`.
    pub fn raised(&self, step: Q) -> Self {
        SymTruncation { w_sym: self.w_sym + step, w_gamma: self.w_gamma + step, ..*self }
    }
}

/// Monomials `e_ū` with `|ū| <= L_max` and `w(ū) <= W_sym`, sorted by weight,
/// then length, then parts.
#[derive(Clone, Debug)]
pub struct SymBasis {
    pub singles: Vec<(LatticePoint, Q)>,
    pub indices: Vec<SymIndex>,
    lookup: HashMap<Vec<u16>, usize>,
    /// `times[i * (singles + 1) + v]`: position of `e_{ū_i} e_v`, with `v = 0` the constant.
    times: Vec<Option<u32>>,
}

impl SymBasis {
    pub fn new(geom_f: &WeightedGeometry, l_max: usize, w_sym: Q) -> Result<Self> {
        let singles: Vec<(LatticePoint, Q)> =
            enumerate_monoid(geom_f, w_sym).points.into_iter().filter(|(u, _)| !u.is_zero()).collect();
        if singles.len() >= u16::MAX as usize {
            return Err(Error::Truncation("too many monomials".into()));
        }
        let mut indices = vec![SymIndex { parts: Vec::new(), weight: Q::zero() }];
        let mut frontier = vec![0usize];
        for _ in 0..l_max {
            let mut next = Vec::new();
            for &k in &frontier {
                let base = indices[k].clone();
                let start = base.parts.last().copied().unwrap_or(0) as usize;
                for (j, (_, w)) in singles.iter().enumerate().skip(start) {
                    let wt = base.weight + *w;
                    if wt > w_sym {
                        break;
                    }
                    let mut parts = base.parts.clone();
                    parts.push(j as u16);
                    indices.push(SymIndex { parts, weight: wt });
                    next.push(indices.len() - 1);
                    if indices.len() > MAX_DIM {
                        return Err(Error::Truncation("symmetric basis exceeds the size limit".into()));
                    }
                }
            }
            frontier = next;
        }
        indices.sort_by(|a, b| a.weight.cmp(&b.weight).then(a.len().cmp(&b.len())).then(a.parts.cmp(&b.parts)));
        let lookup: HashMap<Vec<u16>, usize> = indices.iter().enumerate().map(|(i, x)| (x.parts.clone(), i)).collect();
        let ns = singles.len() + 1;
        let mut times = vec![None; indices.len() * ns];
        for (i, x) in indices.iter().enumerate() {
            times[i * ns] = Some(i as u32);
            for v in 0..singles.len() {
                let mut parts = x.parts.clone();
                let pos = parts.partition_point(|&y| y <= v as u16);
                parts.insert(pos, v as u16);
                times[i * ns + v + 1] = lookup.get(&parts).map(|&k| k as u32);
            }
        }
        Ok(SymBasis { singles, indices, lookup, times })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, parts: &[u16]) -> Option<usize> {
        self.lookup.get(parts).copied()
    }

    /// Position of the single `e_u` (1-based, 0 for the constant), if kept.
    pub fn single_slot(&self, u: &LatticePoint) -> Option<usize> {
        if u.is_zero() {
            return Some(0);
        }
        self.singles.iter().position(|(x, _)| x == u).map(|k| k + 1)
    }

    /// Position of `e_ū · e_v` for `v` a slot from [`Self::single_slot`].
    pub fn times(&self, i: usize, slot: usize) -> Option<usize> {
        self.times[i * (self.singles.len() + 1) + slot].map(|k| k as usize)
    }

    /// Smallest weight of a discarded monomial.
    pub fn dropped_weight(&self, geom_f: &WeightedGeometry, l_max: usize, w_sym: Q) -> Q {
        let by_weight = w_sym + Q::new(1, geom_f.d);
        let w_min = self.singles.first().map(|x| x.1).unwrap_or(by_weight);
        by_weight.min(w_min * Q::from_integer(l_max as i64 + 1))
    }
}

/// `Σ` of the `count` smallest index floors `c(p-1)(w_Γ(γ) + w(ū))` over the
/// untruncated joint index; bounds every Fredholm coefficient of degree `>= count`.
pub fn index_floor_sum(geom_f: &WeightedGeometry, geom_g: &WeightedGeometry, p: u64, count: usize) -> Q {
    let l = num_integer::lcm(geom_f.d, geom_g.d);
    let unit = |w: Q| (w * Q::from_integer(l)).to_integer() as usize;
    let mut cap = Q::from_integer(1);
    loop {
        let top = unit(cap);
        let mut sym = vec![0u128; top + 1];
        sym[0] = 1;
        for (u, w) in enumerate_monoid(geom_f, cap).points {
            if u.is_zero() {
                continue;
            }
            let k = unit(w);
            for i in k..=top {
                sym[i] = sym[i].saturating_add(sym[i - k]);
            }
        }
        let mut joint = vec![0u128; top + 1];
        for (_, w) in enumerate_monoid(geom_g, cap).points {
            let k = unit(w);
            for i in k..=top {
                joint[i] = joint[i].saturating_add(sym[i - k]);
            }
        }
        if joint.iter().fold(0u128, |a, b| a.saturating_add(*b)) >= count as u128 {
            let mut left = count as u128;
            let mut sum = Q::zero();
            for (i, n) in joint.iter().enumerate() {
                let take = left.min(*n);
                sum += Q::new(i as i64, l) * Q::from_integer(take as i64);
                left -= take;
            }
            let c = Q::new(p as i64 - 1, (p * p) as i64);
            return c * Q::from_integer(p as i64 - 1) * sum;
        }
        cap *= Q::from_integer(2);
    }
}

/// λ-exponents: the row/column slice `w_Γ <= W_Γ` and the closed set of
/// exponents reachable below the block offsets `qγ - μ`.
#[derive(Clone, Debug)]
pub struct LambdaSet {
    pub slice: Vec<(LatticePoint, Q)>,
    pub points: Vec<(LatticePoint, Q)>,
    lookup: HashMap<Vec<i64>, usize>,
    add: Vec<Option<u32>>,
}

impl LambdaSet {
    pub fn new(geom_g: &WeightedGeometry, w_gamma: Q, q: i64) -> Self {
        let slice = enumerate_monoid(geom_g, w_gamma).points;
        let mut needed: Vec<LatticePoint> = Vec::new();
        let mut cap = Q::zero();
        for (g, _) in &slice {
            for (m, _) in &slice {
                let t = g.scale(q).sub(m);
                if let Some(w) = geom_g.weight(&t).finite() {
                    cap = cap.max(w);
                    needed.push(t);
                }
            }
        }
        let points: Vec<(LatticePoint, Q)> = enumerate_monoid(geom_g, cap)
            .points
            .into_iter()
            .filter(|(g, _)| needed.iter().any(|n| geom_g.weight(&n.sub(g)).finite().is_some()))
            .collect();
        let lookup: HashMap<Vec<i64>, usize> = points.iter().enumerate().map(|(i, (g, _))| (g.0.clone(), i)).collect();
        let n = points.len();
        let mut add = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                add[i * n + j] = lookup.get(&points[i].0.add(&points[j].0).0).map(|&k| k as u32);
            }
        }
        LambdaSet { slice, points, lookup, add }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, g: &[i64]) -> Option<usize> {
        self.lookup.get(g).copied()
    }

    pub fn add(&self, i: usize, j: usize) -> Option<usize> {
        self.add[i * self.points.len() + j].map(|k| k as usize)
    }
}

/// Everything needed to multiply in the truncated ring `R[λ][[e_u]]`.
#[derive(Clone, Debug)]
pub struct SymSpace {
    pub family: LaurentFamily,
    pub geom_f: WeightedGeometry,
    pub geom_g: WeightedGeometry,
    pub trunc: SymTruncation,
    pub q: i64,
    pub basis: SymBasis,
    pub lambda: LambdaSet,
}

impl SymSpace {
    pub fn new(family: &LaurentFamily, trunc: SymTruncation) -> Result<Self> {
        family.validate()?;
        let geom_f = family.geometry_f()?;
        let geom_g = family.geometry_gamma(&geom_f)?;
        let q = (family.p as i64).pow(family.a as u32);
        let basis = SymBasis::new(&geom_f, trunc.l_max, trunc.w_sym)?;
        let lambda = LambdaSet::new(&geom_g, trunc.w_gamma, q);
        if basis.len() * lambda.slice.len() > MAX_DIM {
            return Err(Error::Truncation(format!(
                "{} x {} basis exceeds the size limit",
                lambda.slice.len(),
                basis.len()
            )));
        }
        Ok(SymSpace { family: family.clone(), geom_f, geom_g, trunc, q, basis, lambda })
    }

    /// Length of a dense series.
    pub fn series_len(&self) -> usize {
        self.lambda.len() * self.basis.len()
    }

    /// Smallest total weight `w_Γ + w` of a discarded basis element.
    pub fn dropped_weight(&self) -> Q {
        let g = self.trunc.w_gamma + Q::new(1, self.geom_g.d);
        g.min(self.basis.dropped_weight(&self.geom_f, self.trunc.l_max, self.trunc.w_sym))
    }

    /// The joint index `(γ, ū)` of the operator matrices with weights `w_Γ(γ) + w(ū)`,
    /// sorted by weight.
    pub fn joint_index(&self) -> Vec<(usize, usize, Q)> {
        let mut out = Vec::with_capacity(self.lambda.slice.len() * self.basis.len());
        for (gi, (_, wg)) in self.lambda.slice.iter().enumerate() {
            for (si, x) in self.basis.indices.iter().enumerate() {
                out.push((gi, si, *wg + x.weight));
            }
        }
        out.sort_by(|a, b| a.2.cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        out
    }
}

/// A sparse series whose `e`-part has length at most one:
/// `(λ position, single slot, coefficient)`.
pub type LinearSeries = Vec<(usize, usize, PadicScalar)>;

/// Dense truncated series indexed by `λ position * |basis| + basis position`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSeries {
    pub data: Vec<PadicScalar>,
}

impl SymSeries {
    pub fn zero(space: &SymSpace, ring: &PadicRing) -> Self {
        SymSeries { data: vec![ring.zero(); space.series_len()] }
    }

    pub fn one(space: &SymSpace, ring: &PadicRing) -> Self {
        let mut s = Self::zero(space, ring);
        s.data[0] = ring.one();
        s
    }

    pub fn get(&self, space: &SymSpace, lam: usize, sym: usize) -> &PadicScalar {
        &self.data[lam * space.basis.len() + sym]
    }

    pub fn add_scaled(&mut self, ring: &PadicRing, other: &SymSeries, c: &PadicScalar) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                ring.add_assign(a, &ring.mul(b, c));
            }
        }
    }

    /// Product with a linear series, re-truncated.
    pub fn mul_linear(&self, space: &SymSpace, ring: &PadicRing, z: &LinearSeries) -> SymSeries {
        let s = space.basis.len();
        let al = ring.acc_len();
        let prec = Q::from_integer(ring.prec as i64);
        let mut acc = vec![0u128; self.data.len() * al];
        let mut touched = vec![false; self.data.len()];
        for (k, c) in self.data.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (l1, s1) = (k / s, k % s);
            for (l2, v, zc) in z {
                if c.val_floor + zc.val_floor >= prec {
                    continue;
                }
                let (Some(l), Some(t)) = (space.lambda.add(l1, *l2), space.basis.times(s1, *v)) else {
                    continue;
                };
                let idx = l * s + t;
                touched[idx] = true;
                ring.mul_acc(&mut acc[idx * al..(idx + 1) * al], &c.coeffs, &zc.coeffs);
            }
        }
        let data = (0..self.data.len())
            .map(|i| {
                if !touched[i] {
                    return ring.zero();
                }
                let mut c = ring.from_coeffs(ring.reduce_acc(&acc[i * al..(i + 1) * al]));
                ring.refresh_floor(&mut c);
                c
            })
            .collect();
        SymSeries { data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_basis_counts() {
        let fam = LaurentFamily::reference();
        let gf = fam.geometry_f().unwrap();
        let b = SymBasis::new(&gf, 3, Q::from_integer(2)).unwrap();
        // singles ±1..±4; 8 of length 1, 14 of length 2, 10 of length 3
        assert_eq!(b.singles.len(), 8);
        assert_eq!(b.len(), 33);
        assert_eq!(b.indices[0].parts, Vec::<u16>::new());
        for w in b.indices.windows(2) {
            assert!(w[0].weight <= w[1].weight);
        }
        let i = b.position(&[0]).unwrap();
        let j = b.times(i, 1).unwrap();
        assert_eq!(b.indices[j].parts, vec![0, 0]);
    }

    #[test]
    fn reference_floor_sums() {
        let fam = LaurentFamily::reference();
        let gf = fam.geometry_f().unwrap();
        let gg = fam.geometry_gamma(&gf).unwrap();
        assert_eq!(index_floor_sum(&gf, &gg, 3, 1), Q::zero());
        assert_eq!(index_floor_sum(&gf, &gg, 3, 4), Q::new(6, 9));
        assert_eq!(index_floor_sum(&gf, &gg, 3, 10), Q::new(30, 9));
    }

    #[test]
    fn multiplicity_factorials() {
        let x = SymIndex { parts: vec![0, 0, 1, 2, 2, 2], weight: Q::zero() };
        assert_eq!(x.multiplicity_factorial(), 2 * 6);
    }

    #[test]
    fn reference_lambda_set() {
        let fam = LaurentFamily::reference();
        let gf = fam.geometry_f().unwrap();
        let gg = fam.geometry_gamma(&gf).unwrap();
        let l = LambdaSet::new(&gg, Q::from_integer(2), 3);
        assert_eq!(l.slice.len(), 5);
        assert_eq!(l.len(), 13);
        assert_eq!(l.add(3, 4), l.position(&[7]));
        assert_eq!(l.add(9, 4), None);
    }
}
