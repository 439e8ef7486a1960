//! Newton polytopes at infinity, weight functions and monoid enumeration.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = num_rational::Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn zero(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: i64) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> LatticePoint {
        self.scale(-1)
    }

    fn to_q(&self) -> Vec<Q> {
        self.0.iter().map(|&c| Q::from_integer(c)).collect()
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Value of the weight function; `Infinite` marks points outside the cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Finite(Q),
    Infinite,
}

impl Weight {
    pub fn finite(self) -> Option<Q> {
        match self {
            Weight::Finite(w) => Some(w),
            Weight::Infinite => None,
        }
    }
}

/// Half-space `<normal, x> <= offset`. Boundary facets at infinity have offset 1,
/// cone facets through the origin have offset 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<Q>,
    pub offset: Q,
}

impl Facet {
    fn eval(&self, x: &[Q]) -> Q {
        self.normal.iter().zip(x).map(|(a, b)| *a * *b).sum()
    }
}

#[derive(Clone, Debug)]
pub struct WeightedGeometry {
    pub dim: usize,
    pub generators: Vec<Vec<Q>>,
    pub vertices: Vec<Vec<Q>>,
    /// Facets of the Newton boundary at infinity (offset 1).
    pub facets: Vec<Facet>,
    /// Facets through the origin cutting out the cone.
    pub cone_facets: Vec<Facet>,
    pub d: i64,
    /// True when the polytope is the single point {0}.
    trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoidSlice {
    pub points: Vec<(LatticePoint, Q)>,
    pub weight_cap: Q,
}

impl MonoidSlice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, u: &LatticePoint) -> Option<usize> {
        self.points.iter().position(|(p, _)| p == u)
    }
}

fn cmp_weighted(a: &(LatticePoint, Q), b: &(LatticePoint, Q)) -> Ordering {
    a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0))
}

/// Null space of a rational matrix given by rows, returned as basis vectors.
fn null_space(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in 0..ncols {
                    let t = m[r][j] * f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Q::zero(); ncols];
            v[fc] = Q::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[ri][fc];
            }
            v
        })
        .collect()
}

fn rank(points: &[Vec<Q>]) -> usize {
    if points.is_empty() {
        return 0;
    }
    let n = points[0].len();
    n - null_space(points, n).len()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn gcd_q(a: Q, b: Q) -> Q {
    let den = a.denom().lcm(b.denom());
    let an = a.numer() * (den / a.denom());
    let bn = b.numer() * (den / b.denom());
    Q::new(an.gcd(&bn), den)
}

impl WeightedGeometry {
    fn point(dim: usize) -> Self {
        WeightedGeometry {
            dim,
            generators: Vec::new(),
            vertices: vec![vec![Q::zero(); dim]],
            facets: Vec::new(),
            cone_facets: Vec::new(),
            d: 1,
            trivial: true,
        }
    }

    fn from_rational(dim: usize, gens: Vec<Vec<Q>>) -> Result<Self> {
        for g in &gens {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.len() });
            }
        }
        if gens.iter().all(|g| g.iter().all(|c| c.is_zero())) {
            return Ok(Self::point(dim));
        }
        let mut pts: Vec<Vec<Q>> = vec![vec![Q::zero(); dim]];
        for g in &gens {
            if !pts.contains(g) {
                pts.push(g.clone());
            }
        }
        if rank(&pts) < dim {
            return Err(Error::Degenerate(format!(
                "hull of the support together with 0 is not full-dimensional in dimension {dim}"
            )));
        }
        let mut facets: Vec<Facet> = Vec::new();
        let mut cone_facets: Vec<Facet> = Vec::new();
        for subset in combinations(pts.len(), dim) {
            let rows: Vec<Vec<Q>> = subset
                .iter()
                .map(|&i| {
                    let mut r = pts[i].clone();
                    r.push(-Q::one());
                    r
                })
                .collect();
            let ns = null_space(&rows, dim + 1);
            if ns.len() != 1 {
                continue;
            }
            let mut normal: Vec<Q> = ns[0][..dim].to_vec();
            let mut offset = ns[0][dim];
            if normal.iter().all(|c| c.is_zero()) {
                continue;
            }
            let vals: Vec<Q> = pts.iter().map(|p| normal.iter().zip(p).map(|(a, b)| *a * *b).sum()).collect();
            let above = vals.iter().any(|v| *v > offset);
            let below = vals.iter().any(|v| *v < offset);
            if above && below {
                continue;
            }
            if above {
                normal.iter_mut().for_each(|c| *c = -*c);
                offset = -offset;
            }
            if offset.is_zero() {
                let scale = normal.iter().map(|c| c.abs()).max().unwrap();
                normal.iter_mut().for_each(|c| *c /= scale);
                let f = Facet { normal, offset };
                if !cone_facets.contains(&f) {
                    cone_facets.push(f);
                }
            } else {
                normal.iter_mut().for_each(|c| *c /= offset);
                let f = Facet { normal, offset: Q::one() };
                if !facets.contains(&f) {
                    facets.push(f);
                }
            }
        }
        let all: Vec<&Facet> = facets.iter().chain(cone_facets.iter()).collect();
        let vertices: Vec<Vec<Q>> = pts
            .iter()
            .filter(|p| {
                let tight: Vec<Vec<Q>> = all
                    .iter()
                    .filter(|f| f.eval(p) == f.offset)
                    .map(|f| f.normal.clone())
                    .collect();
                rank(&tight) == dim
            })
            .cloned()
            .collect();
        let mut d = 1i64;
        for f in &facets {
            let g = f.normal.iter().fold(Q::zero(), |acc, c| gcd_q(acc, *c));
            d = d.lcm(g.denom());
        }
        Ok(WeightedGeometry { dim, generators: gens, vertices, facets, cone_facets, d, trivial: false })
    }

    pub fn weight(&self, u: &LatticePoint) -> Weight {
        self.weight_q(&u.to_q())
    }

    fn weight_q(&self, x: &[Q]) -> Weight {
        let is_zero = x.iter().all(|c| c.is_zero());
        if self.trivial {
            return if is_zero { Weight::Finite(Q::zero()) } else { Weight::Infinite };
        }
        if self.cone_facets.iter().any(|f| f.eval(x) > Q::zero()) {
            return Weight::Infinite;
        }
        let w = self.facets.iter().map(|f| f.eval(x)).max().unwrap_or_else(Q::zero);
        Weight::Finite(if w < Q::zero() { Q::zero() } else { w })
    }

    /// Bounding box of `cap * hull`.
    fn bounding_box(&self, cap: Q) -> Vec<(i64, i64)> {
        (0..self.dim)
            .map(|i| {
                let lo = self.vertices.iter().map(|v| v[i]).chain(std::iter::once(Q::zero())).min().unwrap();
                let hi = self.vertices.iter().map(|v| v[i]).chain(std::iter::once(Q::zero())).max().unwrap();
                ((lo * cap).floor().to_integer(), (hi * cap).ceil().to_integer())
            })
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    /// `W(k) = #{u in M : D w(u) = k}` for `k = 0..=kmax`.
    pub fn weight_counts(&self, kmax: i64) -> Vec<u64> {
        let slice = enumerate_monoid(self, Q::new(kmax, self.d));
        let mut counts = vec![0u64; kmax as usize + 1];
        for (_, w) in &slice.points {
            let k = (*w * self.d).to_integer();
            counts[k as usize] += 1;
        }
        counts
    }

    /// Hodge numbers `H(k) = sum_i (-1)^i C(n,i) W(k - iD)` for `k = 0..=nD`.
    pub fn hodge_numbers(&self) -> Vec<i64> {
        let n = self.dim as i64;
        let kmax = n * self.d;
        let w = self.weight_counts(kmax);
        (0..=kmax)
            .map(|k| {
                let mut h = 0i64;
                for i in 0..=n {
                    let j = k - i * self.d;
                    if j < 0 {
                        break;
                    }
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    h += sign * binomial(n as u64, i as u64) as i64 * w[j as usize] as i64;
                }
                h
            })
            .collect()
    }

    /// `n! Vol(hull)`, read off the Hodge numbers.
    pub fn normalized_volume(&self) -> i64 {
        self.hodge_numbers().iter().sum()
    }

    /// Lower Hodge polygon value at `j` (sum of the `j` smallest slopes, in units of ord_q).
    pub fn hodge_polygon(&self, j: usize) -> Q {
        let h = self.hodge_numbers();
        let mut left = j as i64;
        let mut total = Q::zero();
        for (k, &mult) in h.iter().enumerate() {
            if left == 0 {
                break;
            }
            let take = left.min(mult);
            total += Q::new(k as i64, self.d) * take;
            left -= take;
        }
        if left > 0 {
            return Q::from_integer(i64::MAX / 4);
        }
        total
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Hull of `generators ∪ {0}` with its facets at infinity and weight denominator.
pub fn build_newton(generators: &[LatticePoint]) -> Result<WeightedGeometry> {
    let Some(first) = generators.first() else {
        return Err(Error::Invalid("empty generator set".into()));
    };
    let dim = first.dim();
    for g in generators {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
        }
        if g.is_zero() {
            return Err(Error::Invalid("the origin may not be a generator".into()));
        }
    }
    WeightedGeometry::from_rational(dim, generators.iter().map(|g| g.to_q()).collect())
}

pub fn weight(geom: &WeightedGeometry, u: &LatticePoint) -> Weight {
    geom.weight(u)
}

/// Relative polytope of a lower deformation: the hull of `γ / (1 - w(v))`.
pub fn relative_polytope(supp_p: &[(LatticePoint, LatticePoint)], geom_f: &WeightedGeometry) -> Result<WeightedGeometry> {
    let Some((g0, _)) = supp_p.first() else {
        return Ok(WeightedGeometry::point(0));
    };
    let s = g0.dim();
    let mut gens = Vec::new();
    for (gamma, v) in supp_p {
        if gamma.dim() != s {
            return Err(Error::DimensionMismatch { expected: s, found: gamma.dim() });
        }
        let w = match geom_f.weight(v) {
            Weight::Finite(w) => w,
            Weight::Infinite => {
                return Err(Error::InvalidDeformation(format!("{v} lies outside the cone of f")));
            }
        };
        if w.is_zero() || w >= Q::one() {
            return Err(Error::InvalidDeformation(format!("w({v}) = {w} is not in (0, 1)")));
        }
        let scale = (Q::one() - w).recip();
        gens.push(gamma.0.iter().map(|&c| Q::from_integer(c) * scale).collect::<Vec<Q>>());
    }
    let geom = WeightedGeometry::from_rational(s, gens)?;
    for (gamma, v) in supp_p {
        let wg = geom.weight(gamma).finite().unwrap_or_else(|| Q::from_integer(2));
        let wv = geom_f.weight(v).finite().unwrap();
        if wg + wv > Q::one() || wg >= Q::one() {
            return Err(Error::InvalidDeformation(format!(
                "monomial ({gamma}, {v}) has relative weight {} >= 1",
                wg + wv
            )));
        }
    }
    Ok(geom)
}

/// All cone lattice points of weight at most `cap`, sorted by weight then lexicographically.
pub fn enumerate_monoid(geom: &WeightedGeometry, cap: Q) -> MonoidSlice {
    let mut points = Vec::new();
    if cap >= Q::zero() {
        if geom.trivial {
            points.push((LatticePoint::zero(geom.dim), Q::zero()));
        } else {
            let bbox = geom.bounding_box(cap);
            let mut cur: Vec<i64> = bbox.iter().map(|b| b.0).collect();
            'outer: loop {
                let u = LatticePoint(cur.clone());
                if let Weight::Finite(w) = geom.weight(&u) {
                    if w <= cap {
                        points.push((u, w));
                    }
                }
                for i in (0..geom.dim).rev() {
                    if cur[i] < bbox[i].1 {
                        cur[i] += 1;
                        continue 'outer;
                    }
                    cur[i] = bbox[i].0;
                }
                break;
            }
        }
    }
    points.sort_by(cmp_weighted);
    MonoidSlice { points, weight_cap: cap }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    #[test]
    fn segment_hull() {
        let g = build_newton(&[lp(&[2]), lp(&[-2])]).unwrap();
        assert_eq!(g.d, 2);
        assert_eq!(g.weight(&lp(&[1])), Weight::Finite(Q::new(1, 2)));
        assert_eq!(g.weight(&lp(&[-3])), Weight::Finite(Q::new(3, 2)));
        assert_eq!(g.vertices.len(), 2);
    }

    #[test]
    fn simplex() {
        let g = build_newton(&[lp(&[1, 0]), lp(&[0, 1])]).unwrap();
        assert_eq!(g.d, 1);
        assert_eq!(g.weight(&lp(&[-1, 0])), Weight::Infinite);
        assert_eq!(g.weight(&lp(&[2, 3])), Weight::Finite(Q::from_integer(5)));
        assert_eq!(g.cone_facets.len(), 2);
    }

    #[test]
    fn origin_rejected() {
        assert!(build_newton(&[lp(&[0])]).is_err());
        assert!(matches!(build_newton(&[lp(&[1]), lp(&[1, 2])]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn relative() {
        let g = build_newton(&[lp(&[2]), lp(&[-2])]).unwrap();
        let gamma = relative_polytope(&[(lp(&[1]), lp(&[1]))], &g).unwrap();
        assert_eq!(gamma.d, 2);
        assert_eq!(gamma.weight(&lp(&[2])), Weight::Finite(Q::one()));
        assert_eq!(gamma.weight(&lp(&[-1])), Weight::Infinite);
        let s = enumerate_monoid(&gamma, Q::new(3, 2));
        let pts: Vec<i64> = s.points.iter().map(|(p, _)| p.0[0]).collect();
        assert_eq!(pts, vec![0, 1, 2, 3]);
        let narrow = build_newton(&[lp(&[1]), lp(&[-1])]).unwrap();
        assert!(relative_polytope(&[(lp(&[1]), lp(&[1]))], &narrow).is_err());
        let empty = relative_polytope(&[], &g).unwrap();
        assert!(empty.is_trivial());
    }

    #[test]
    fn enumeration_segment() {
        let g = build_newton(&[lp(&[2]), lp(&[-2])]).unwrap();
        let s = enumerate_monoid(&g, Q::one());
        let got: Vec<(i64, Q)> = s.points.iter().map(|(p, w)| (p.0[0], *w)).collect();
        assert_eq!(
            got,
            vec![
                (0, Q::zero()),
                (-1, Q::new(1, 2)),
                (1, Q::new(1, 2)),
                (-2, Q::one()),
                (2, Q::one())
            ]
        );
        assert_eq!(enumerate_monoid(&g, Q::zero()).points.len(), 1);
    }

    #[test]
    fn hodge_segment() {
        let g = build_newton(&[lp(&[2]), lp(&[-2])]).unwrap();
        assert_eq!(g.hodge_numbers(), vec![1, 2, 1]);
        assert_eq!(g.normalized_volume(), 4);
        assert_eq!(g.hodge_polygon(3), Q::one());
        let x = build_newton(&[lp(&[1])]).unwrap();
        assert_eq!(x.hodge_numbers(), vec![1, 0]);
    }
}
