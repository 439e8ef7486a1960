//! Finite-precision arithmetic in `R = Z_q[π̂]` with `π̂^e = -p`.
//!
//! An element is stored as coefficients `c_{ij}` modulo `p^N` of `π̂^i Y^j`
//! (`i < e`, `j < a`), flattened in row-major `(i, j)` order. `Y` is the
//! Teichmüller lift of a root of the lexicographically least irreducible
//! polynomial of degree `a` over F_p, so Frobenius acts by `Y ↦ Y^p`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ffield::{is_prime, lex_least_irreducible};
use crate::geometry::Q;

/// Element of `R` with a conservative valuation floor (in units of `ord_p`).
///
/// Equality compares the stored digits only.
#[derive(Clone, Debug)]
pub struct PadicScalar {
    pub coeffs: Vec<u64>,
    pub val_floor: Q,
}

impl PartialEq for PadicScalar {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for PadicScalar {}

impl PadicScalar {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

#[derive(Clone, Debug)]
pub struct PadicRing {
    pub p: u64,
    pub a: usize,
    pub e: usize,
    /// Absolute precision in p-adic digits.
    pub prec: u32,
    pub modulus: u64,
    minpoly: Vec<u64>,
    frob: Vec<Vec<u64>>,
    width: usize,
}

fn vp(mut x: u64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn inv_mod_u64(x: u64, m: u64) -> Option<u64> {
    let (mut a, mut b) = (x as i128 % m as i128, m as i128);
    let (mut x0, mut x1) = (1i128, 0i128);
    while b != 0 {
        let q = a / b;
        (a, b) = (b, a - q * b);
        (x0, x1) = (x1, x0 - q * x1);
    }
    if a != 1 {
        return None;
    }
    Some(x0.rem_euclid(m as i128) as u64)
}

impl PadicRing {
    /// The ring `Z_q[π̂]/(p^prec)` with `π̂^e = -p`.
    pub fn new(p: u64, a: usize, e: usize, prec: u32) -> Result<PadicRing> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if a == 0 || e == 0 || prec == 0 {
            return Err(Error::Invalid("ring parameters must be positive".into()));
        }
        let modulus = p
            .checked_pow(prec)
            .filter(|&m| m < (1u64 << 32))
            .ok_or_else(|| Error::Precision(format!("p^{prec} exceeds the 32-bit coefficient range")))?;
        let mut ring = PadicRing { p, a, e, prec, modulus, minpoly: vec![0, 1], frob: vec![vec![1]], width: e * a };
        if a > 1 {
            ring.minpoly = teichmuller_modulus(p, a, prec, modulus);
            ring.frob = (0..a)
                .map(|j| {
                    let mut y = vec![0u64; a];
                    y[1] = 1;
                    let yj = ring.zq_pow(&y, (j as u64) * p);
                    yj
                })
                .collect();
        }
        Ok(ring)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.a as u32)
    }

    pub fn minpoly(&self) -> &[u64] {
        &self.minpoly
    }

    /// Same ring with a different precision.
    pub fn with_prec(&self, prec: u32) -> Result<PadicRing> {
        if prec == self.prec {
            return Ok(self.clone());
        }
        let mut r = PadicRing::new(self.p, self.a, self.e, prec)?;
        if self.a > 1 && prec < self.prec {
            r.minpoly = self.minpoly.iter().map(|c| c % r.modulus).collect();
        }
        Ok(r)
    }

    fn wrap(&self, coeffs: Vec<u64>) -> PadicScalar {
        let mut s = PadicScalar { coeffs, val_floor: Q::zero() };
        s.val_floor = self.valuation_or_prec(&s);
        s
    }

    pub fn zero(&self) -> PadicScalar {
        PadicScalar { coeffs: vec![0; self.width], val_floor: Q::from_integer(self.prec as i64) }
    }

    pub fn one(&self) -> PadicScalar {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> PadicScalar {
        let mut v = vec![0u64; self.width];
        v[0] = c.rem_euclid(self.modulus as i64) as u64;
        self.wrap(v)
    }

    /// Element of `Z_q` given by its `Y`-coordinates.
    pub fn from_zq(&self, z: &[u64]) -> PadicScalar {
        let mut v = vec![0u64; self.width];
        for (j, &c) in z.iter().enumerate().take(self.a) {
            v[j] = c % self.modulus;
        }
        self.wrap(v)
    }

    pub fn from_coeffs(&self, coeffs: Vec<u64>) -> PadicScalar {
        assert_eq!(coeffs.len(), self.width);
        self.wrap(coeffs.into_iter().map(|c| c % self.modulus).collect())
    }

    /// `π̂^k`.
    pub fn pi_hat_pow(&self, k: u64) -> PadicScalar {
        let t = k / self.e as u64;
        let i = (k % self.e as u64) as usize;
        let mut v = vec![0u64; self.width];
        if (t as u32) < self.prec {
            let mag = self.p.pow(t as u32);
            v[i * self.a] = if t % 2 == 0 { mag } else { self.modulus - mag };
        }
        let mut s = PadicScalar { coeffs: v, val_floor: Q::zero() };
        s.val_floor = Q::new(k as i64, self.e as i64).min(Q::from_integer(self.prec as i64));
        s
    }

    pub fn add(&self, x: &PadicScalar, y: &PadicScalar) -> PadicScalar {
        let coeffs = x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| (a + b) % self.modulus).collect();
        PadicScalar { coeffs, val_floor: x.val_floor.min(y.val_floor) }
    }

    pub fn sub(&self, x: &PadicScalar, y: &PadicScalar) -> PadicScalar {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(a, b)| (a + self.modulus - b) % self.modulus)
            .collect();
        PadicScalar { coeffs, val_floor: x.val_floor.min(y.val_floor) }
    }

    pub fn neg(&self, x: &PadicScalar) -> PadicScalar {
        let coeffs = x.coeffs.iter().map(|a| (self.modulus - a) % self.modulus).collect();
        PadicScalar { coeffs, val_floor: x.val_floor }
    }

    pub fn add_assign(&self, x: &mut PadicScalar, y: &PadicScalar) {
        for (a, b) in x.coeffs.iter_mut().zip(&y.coeffs) {
            *a = (*a + b) % self.modulus;
        }
        x.val_floor = x.val_floor.min(y.val_floor);
    }

    pub fn scale_int(&self, x: &PadicScalar, c: i64) -> PadicScalar {
        let cm = c.rem_euclid(self.modulus as i64) as u64;
        let coeffs = x.coeffs.iter().map(|a| a * cm % self.modulus).collect();
        let mut s = PadicScalar { coeffs, val_floor: Q::zero() };
        s.val_floor = self.valuation_or_prec(&s).max(x.val_floor);
        s
    }

    /// Accumulate the unreduced product `x*y` into `acc` (length `acc_len()`).
    #[inline]
    pub fn mul_acc(&self, acc: &mut [u128], x: &[u64], y: &[u64]) {
        if self.a == 1 {
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0 {
                    continue;
                }
                let xi = xi as u128;
                for (j, &yj) in y.iter().enumerate() {
                    acc[i + j] += xi * yj as u128;
                }
            }
            return;
        }
        let a = self.a;
        let sa = 2 * a - 1;
        for i1 in 0..self.e {
            for j1 in 0..a {
                let xv = x[i1 * a + j1];
                if xv == 0 {
                    continue;
                }
                for i2 in 0..self.e {
                    for j2 in 0..a {
                        let yv = y[i2 * a + j2];
                        acc[(i1 + i2) * sa + j1 + j2] += xv as u128 * yv as u128;
                    }
                }
            }
        }
    }

    pub fn acc_len(&self) -> usize {
        (2 * self.e - 1) * (2 * self.a - 1)
    }

    /// Reduce an accumulator filled by `mul_acc`.
    pub fn reduce_acc(&self, acc: &[u128]) -> Vec<u64> {
        let m = self.modulus;
        let a = self.a;
        let sa = 2 * a - 1;
        let ne = 2 * self.e - 1;
        let mut rows: Vec<Vec<u64>> = (0..ne)
            .map(|i| {
                let mut r: Vec<u64> = (0..sa).map(|j| (acc[i * sa + j] % m as u128) as u64).collect();
                if a > 1 {
                    for k in (a..sa).rev() {
                        let c = r[k];
                        if c == 0 {
                            continue;
                        }
                        r[k] = 0;
                        for t in 0..a {
                            let sub = c * self.minpoly[t] % m;
                            r[k - a + t] = (r[k - a + t] + m - sub) % m;
                        }
                    }
                }
                r.truncate(a);
                r
            })
            .collect();
        let minus_p = m - self.p % m;
        for i in (self.e..ne).rev() {
            let hi = std::mem::take(&mut rows[i]);
            for j in 0..a {
                let t = hi[j] * minus_p % m;
                rows[i - self.e][j] = (rows[i - self.e][j] + t) % m;
            }
        }
        let mut out = Vec::with_capacity(self.width);
        for r in rows.into_iter().take(self.e) {
            out.extend(r);
        }
        out
    }

    pub fn mul(&self, x: &PadicScalar, y: &PadicScalar) -> PadicScalar {
        let mut acc = vec![0u128; self.acc_len()];
        self.mul_acc(&mut acc, &x.coeffs, &y.coeffs);
        let coeffs = self.reduce_acc(&acc);
        let floor = (x.val_floor + y.val_floor).min(Q::from_integer(self.prec as i64));
        PadicScalar { coeffs, val_floor: floor }
    }

    pub fn pow(&self, x: &PadicScalar, mut k: u64) -> PadicScalar {
        let mut r = self.one();
        let mut b = x.clone();
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            k >>= 1;
        }
        r
    }

    /// `ord_p(x)` of the stored representative, `None` when it is zero mod `p^N`.
    pub fn valuation(&self, x: &PadicScalar) -> Option<Q> {
        self.val_pihat(x).map(|v| Q::new(v as i64, self.e as i64))
    }

    /// `ord_π̂(x)` of the stored representative.
    pub fn val_pihat(&self, x: &PadicScalar) -> Option<u64> {
        let mut best: Option<u64> = None;
        for i in 0..self.e {
            for j in 0..self.a {
                let c = x.coeffs[i * self.a + j];
                if c != 0 {
                    let v = vp(c, self.p) as u64 * self.e as u64 + i as u64;
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
        best
    }

    /// Valuation clamped to the working precision.
    pub fn valuation_or_prec(&self, x: &PadicScalar) -> Q {
        self.valuation(x).unwrap_or_else(|| Q::from_integer(self.prec as i64)).min(Q::from_integer(self.prec as i64))
    }

    /// Tighten the stored floor to the observed valuation.
    pub fn refresh_floor(&self, x: &mut PadicScalar) {
        let v = self.valuation_or_prec(x);
        if v > x.val_floor {
            x.val_floor = v;
        }
    }

    pub fn is_unit(&self, x: &PadicScalar) -> bool {
        self.val_pihat(x) == Some(0)
    }

    /// Residue mod π̂ as F_q coordinates.
    pub fn residue(&self, x: &PadicScalar) -> Vec<u64> {
        (0..self.a).map(|j| x.coeffs[j] % self.p).collect()
    }

    pub fn inv_unit(&self, x: &PadicScalar) -> Result<PadicScalar> {
        if !self.is_unit(x) {
            return Err(Error::Invalid("inverse of a non-unit".into()));
        }
        let mut y = self.pow(x, self.q() - 2);
        let two = self.from_int(2);
        let steps = 64 - ((self.prec as u64 * self.e as u64).leading_zeros() as usize) + 1;
        for _ in 0..steps {
            let xy = self.mul(x, &y);
            y = self.mul(&y, &self.sub(&two, &xy));
        }
        y.val_floor = Q::zero();
        Ok(y)
    }

    /// Divide by `p^t`; the result is meaningful modulo `p^{N-t}`.
    pub fn div_p_pow(&self, x: &PadicScalar, t: u32) -> Result<PadicScalar> {
        if t == 0 {
            return Ok(x.clone());
        }
        let pt = self.p.pow(t);
        if x.coeffs.iter().any(|&c| c % pt != 0) {
            return Err(Error::Precision(format!("value not divisible by p^{t}")));
        }
        let coeffs = x.coeffs.iter().map(|&c| c / pt).collect();
        let mut s = PadicScalar { coeffs, val_floor: Q::zero() };
        s.val_floor = (x.val_floor - Q::from_integer(t as i64)).max(Q::zero());
        Ok(s)
    }

    /// Divide by an integer, tracking the loss of `v_p(c)` digits.
    pub fn div_int(&self, x: &PadicScalar, c: i64) -> Result<(PadicScalar, u32)> {
        let t = vp(c.unsigned_abs(), self.p);
        let unit = c / (self.p as i64).pow(t);
        let inv = inv_mod_u64(unit.rem_euclid(self.modulus as i64) as u64, self.modulus)
            .ok_or_else(|| Error::Invalid("non-invertible integer".into()))?;
        let y = self.div_p_pow(x, t)?;
        Ok((self.scale_int(&y, inv as i64), t))
    }

    /// Multiply two `Z_q` coordinate vectors (length `a`).
    fn zq_mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let mut a = vec![0u64; self.width];
        let mut b = vec![0u64; self.width];
        a[..self.a].copy_from_slice(x);
        b[..self.a].copy_from_slice(y);
        let mut acc = vec![0u128; self.acc_len()];
        self.mul_acc(&mut acc, &a, &b);
        self.reduce_acc(&acc)[..self.a].to_vec()
    }

    fn zq_pow(&self, x: &[u64], mut k: u64) -> Vec<u64> {
        let mut r = vec![0u64; self.a];
        r[0] = 1;
        let mut b = x.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                r = self.zq_mul(&r, &b);
            }
            b = self.zq_mul(&b, &b);
            k >>= 1;
        }
        r
    }

    /// Frobenius σ: `Y ↦ Y^p` on `Z_q`, identity on π̂.
    pub fn frobenius(&self, x: &PadicScalar) -> PadicScalar {
        if self.a == 1 {
            return x.clone();
        }
        let m = self.modulus;
        let mut out = vec![0u64; self.width];
        for i in 0..self.e {
            for j in 0..self.a {
                let c = x.coeffs[i * self.a + j];
                if c == 0 {
                    continue;
                }
                for (t, &f) in self.frob[j].iter().enumerate() {
                    let o = &mut out[i * self.a + t];
                    *o = (*o + c * f % m) % m;
                }
            }
        }
        PadicScalar { coeffs: out, val_floor: x.val_floor }
    }

    pub fn frobenius_pow(&self, x: &PadicScalar, k: usize) -> PadicScalar {
        let mut y = x.clone();
        for _ in 0..k % self.a {
            y = self.frobenius(&y);
        }
        y
    }

    /// Teichmüller lift of a residue given by F_q coordinates.
    pub fn teichmuller(&self, residue: &[u64]) -> PadicScalar {
        let mut x = self.from_zq(&residue.iter().map(|c| c % self.p).collect::<Vec<_>>());
        if x.is_zero() {
            return self.zero();
        }
        let q = self.q();
        for _ in 0..self.prec {
            x = self.pow(&x, q);
        }
        x.val_floor = Q::zero();
        x
    }

    /// `u^κ` for a 1-unit `u` via the binomial series.
    pub fn one_unit_power(&self, u: &PadicScalar, kappa: &KappaExponent) -> Result<PadicScalar> {
        let one = self.one();
        let h = self.sub(u, &one);
        let vh = match self.val_pihat(&h) {
            None => return Ok(one),
            Some(0) => return Err(Error::NotOneUnit),
            Some(v) => v,
        };
        kappa.check_precision(self)?;
        let target = self.prec as u64 * self.e as u64;
        let mut result = one.clone();
        let mut hpow = one;
        let mut l = 1u64;
        while l * vh < target {
            hpow = self.mul(&hpow, &h);
            let c = kappa.binomial_mod(l, self.modulus);
            result = self.add(&result, &self.scale_int(&hpow, c as i64));
            l += 1;
        }
        self.refresh_floor(&mut result);
        result.val_floor = Q::zero();
        Ok(result)
    }

    /// An element of `Z_p[π̂]` computed in `from` (same `p` and `e`, any
    /// unramified degree) to `digits` p-adic digits, moved into this ring.
    pub fn descend_zp(&self, from: &PadicRing, x: &PadicScalar, digits: u32) -> Result<PadicScalar> {
        if from.p != self.p || from.e != self.e {
            return Err(Error::Invalid("rings differ in p or ramification".into()));
        }
        let m = self.modulus.min(from.modulus);
        let check = self.p.pow(digits.min(self.prec).min(from.prec));
        let mut v = vec![0u64; self.width()];
        for i in 0..self.e {
            for j in 1..from.a {
                if x.coeffs[i * from.a + j] % check != 0 {
                    return Err(Error::Invalid("element does not lie in Z_p[π̂]".into()));
                }
            }
            v[i * self.a] = x.coeffs[i * from.a] % m;
        }
        let mut out = self.from_coeffs(v);
        self.refresh_floor(&mut out);
        Ok(out)
    }

    /// Base-p little-endian digits of every coefficient, row-major `(i, j)`.
    pub fn canonical_digits(&self, x: &PadicScalar) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.width * self.prec as usize);
        for &c in &x.coeffs {
            let mut t = c;
            for _ in 0..self.prec {
                out.push((t % self.p) as u8);
                t /= self.p;
            }
        }
        out
    }

    /// Reduce to a lower precision.
    pub fn truncate(&self, x: &PadicScalar, prec: u32) -> PadicScalar {
        let m = self.p.pow(prec.min(self.prec));
        PadicScalar { coeffs: x.coeffs.iter().map(|c| c % m).collect(), val_floor: x.val_floor }
    }

    /// `ord_p(x - y)`, capped at `cap`.
    pub fn agreement(&self, x: &PadicScalar, y: &PadicScalar) -> Q {
        self.valuation_or_prec(&self.sub(x, y))
    }
}

fn log_p_ceil(p: u64, n: u64) -> u32 {
    let mut k = 0;
    let mut t = 1u64;
    while t < n {
        t = t.saturating_mul(p);
        k += 1;
    }
    k
}

/// Monic polynomial over `Z/p^prec` whose roots are Teichmüller lifts of the roots
/// of the lexicographically least irreducible polynomial of degree `a`.
fn teichmuller_modulus(p: u64, a: usize, prec: u32, modulus: u64) -> Vec<u64> {
    let g = lex_least_irreducible(p, a);
    let naive = PadicRing {
        p,
        a,
        e: 1,
        prec,
        modulus,
        minpoly: g.clone(),
        frob: Vec::new(),
        width: a,
    };
    let q = p.pow(a as u32);
    let mut y = vec![0u64; a];
    y[1] = 1;
    for _ in 0..prec {
        y = naive.zq_pow(&y, q);
    }
    // h(Z) = Π_{i<a} (Z - y^{p^i}) with coefficients in Z_q, which must be constants.
    let mut h: Vec<Vec<u64>> = vec![{
        let mut one = vec![0u64; a];
        one[0] = 1;
        one
    }];
    let mut root = y.clone();
    for _ in 0..a {
        let mut next = vec![vec![0u64; a]; h.len() + 1];
        for (k, c) in h.iter().enumerate() {
            for t in 0..a {
                next[k + 1][t] = (next[k + 1][t] + c[t]) % modulus;
            }
            let prod = naive.zq_mul(c, &root);
            for t in 0..a {
                next[k][t] = (next[k][t] + modulus - prod[t]) % modulus;
            }
        }
        h = next;
        root = naive.zq_pow(&root, p);
    }
    h.iter()
        .map(|c| {
            debug_assert!(c[1..].iter().all(|&x| x == 0));
            c[0]
        })
        .collect()
}

/// A p-adic integer exponent given by its base-p digits modulo `p^M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaExponent {
    pub p: u64,
    pub digits: Vec<u64>,
}

impl KappaExponent {
    pub fn new(p: u64, digits: Vec<u64>) -> Result<Self> {
        if digits.iter().any(|&d| d >= p) {
            return Err(Error::Invalid("kappa digit out of range".into()));
        }
        Ok(KappaExponent { p, digits })
    }

    pub fn from_int(p: u64, k: i64, m: usize) -> Self {
        let pm = BigUint::from(p).pow(m as u32);
        let mut t = if k >= 0 {
            BigUint::from(k as u64) % &pm
        } else {
            let r = BigUint::from(k.unsigned_abs()) % &pm;
            (&pm - r) % &pm
        };
        let mut digits = Vec::with_capacity(m);
        for _ in 0..m {
            digits.push((&t % p).to_u64().unwrap());
            t /= p;
        }
        KappaExponent { p, digits }
    }

    /// κ with every digit equal to 1, i.e. `1/(1-p)` truncated.
    pub fn all_ones(p: u64, m: usize) -> Self {
        KappaExponent { p, digits: vec![1; m] }
    }

    pub fn m(&self) -> usize {
        self.digits.len()
    }

    /// Integer representative in `[0, p^M)`.
    pub fn value(&self) -> BigUint {
        let mut t = BigUint::zero();
        for &d in self.digits.iter().rev() {
            t = t * self.p + d;
        }
        t
    }

    /// `κ - r` with the same number of digits.
    pub fn minus(&self, r: u64) -> KappaExponent {
        let pm = BigUint::from(self.p).pow(self.m() as u32);
        let v = (self.value() + &pm * (r + 1) - BigUint::from(r)) % &pm;
        let mut t = v;
        let mut digits = Vec::with_capacity(self.m());
        for _ in 0..self.m() {
            digits.push((&t % self.p).to_u64().unwrap());
            t /= self.p;
        }
        KappaExponent { p: self.p, digits }
    }

    pub fn add(&self, other: &KappaExponent) -> KappaExponent {
        let m = self.m().min(other.m());
        let pm = BigUint::from(self.p).pow(m as u32);
        let mut t = (self.value() + other.value()) % &pm;
        let mut digits = Vec::with_capacity(m);
        for _ in 0..m {
            digits.push((&t % self.p).to_u64().unwrap());
            t /= self.p;
        }
        KappaExponent { p: self.p, digits }
    }

    /// Minimum exponent precision for a ring of precision `N` and ramification `e`.
    pub fn required_m(p: u64, prec: u32, e: usize) -> usize {
        prec as usize + log_p_ceil(p, prec as u64 * (p - 1) * e as u64) as usize
    }

    pub fn check_precision(&self, ring: &PadicRing) -> Result<()> {
        let need = Self::required_m(ring.p, ring.prec, ring.e);
        if self.m() < need {
            return Err(Error::Precision(format!("kappa has {} digits, at least {need} required", self.m())));
        }
        Ok(())
    }

    /// `C(κ, l) mod modulus`, computed from the integer representative.
    pub fn binomial_mod(&self, l: u64, modulus: u64) -> u64 {
        let t = self.value();
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for i in 0..l {
            if t < BigUint::from(i) {
                return 0;
            }
            num *= &t - BigUint::from(i);
            den *= BigUint::from(i + 1);
        }
        ((num / den) % BigUint::from(modulus)).to_u64().unwrap()
    }
}

/// The tower `Z_p ⊂ Z_q ⊂ R` with `e = (p-1) p^2 D`.
#[derive(Clone, Debug)]
pub struct TowerConfig {
    pub p: u64,
    pub a: usize,
    pub d: i64,
    pub n: u32,
    pub e: usize,
    pub pi_index: usize,
    pub pitilde_index: usize,
    pub ring: PadicRing,
}

pub fn make_tower(p: u64, a: usize, d: i64, n: u32) -> Result<TowerConfig> {
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    if a == 0 || d < 1 || n == 0 {
        return Err(Error::Invalid("tower parameters must be positive".into()));
    }
    let e = ((p - 1) * p * p) as usize * d as usize;
    let ring = PadicRing::new(p, a, e, n)?;
    Ok(TowerConfig {
        p,
        a,
        d,
        n,
        e,
        pi_index: e / (p as usize - 1),
        pitilde_index: (p as usize - 1) * (p as usize - 1) * d as usize,
        ring,
    })
}

impl TowerConfig {
    pub fn pi(&self) -> PadicScalar {
        self.ring.pi_hat_pow(self.pi_index as u64)
    }

    pub fn pitilde(&self) -> PadicScalar {
        self.ring.pi_hat_pow(self.pitilde_index as u64)
    }

    /// `π̃^w` for `w ∈ (1/D) Z_{≥0}`.
    pub fn pitilde_pow(&self, w: Q) -> Result<PadicScalar> {
        let k = w * Q::from_integer(self.pitilde_index as i64);
        if !k.is_integer() || k < Q::zero() {
            return Err(Error::Invalid(format!("weight {w} is not in (1/D)Z_{{>=0}}")));
        }
        Ok(self.ring.pi_hat_pow(k.to_integer() as u64))
    }

    /// The subring `Z_q[π]` (ramification `p - 1`) at precision `prec`.
    pub fn working_ring(&self, prec: u32) -> Result<PadicRing> {
        PadicRing::new(self.p, self.a, self.p as usize - 1, prec)
    }

    /// Embed an element of `Z_q[π]` (from `working_ring`) into `R`.
    pub fn embed(&self, sub: &PadicRing, x: &PadicScalar) -> PadicScalar {
        let step = self.e / sub.e;
        let m = self.ring.modulus;
        let mut v = vec![0u64; self.ring.width()];
        for i in 0..sub.e {
            for j in 0..self.a {
                v[i * step * self.a + j] = x.coeffs[i * sub.a + j] % m;
            }
        }
        PadicScalar { coeffs: v, val_floor: x.val_floor.min(Q::from_integer(self.n as i64)) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_indices() {
        let t = make_tower(3, 1, 2, 4).unwrap();
        assert_eq!((t.e, t.pi_index, t.pitilde_index), (36, 18, 8));
        let pi = t.pi();
        let lhs = t.ring.add(&t.ring.pow(&pi, 2), &t.ring.from_int(3));
        assert!(lhs.is_zero());
        let t2 = make_tower(2, 1, 1, 4).unwrap();
        assert_eq!(t2.e, 4);
        assert_eq!(t2.ring.pow(&t2.pi(), 1), t2.ring.from_int(-2));
    }

    #[test]
    fn teichmuller_f9() {
        let r = PadicRing::new(3, 2, 2, 4).unwrap();
        let x = r.teichmuller(&[1, 1]);
        assert_eq!(r.pow(&x, 8), r.one());
        assert_eq!(r.residue(&x), vec![1, 1]);
        let m1 = PadicRing::new(3, 1, 2, 4).unwrap();
        assert_eq!(m1.teichmuller(&[2]), m1.from_int(-1));
        let s = r.frobenius(&x);
        assert_eq!(s, r.pow(&x, 3));
        assert_eq!(r.frobenius(&s), x);
    }

    #[test]
    fn binomial_powers() {
        let r = PadicRing::new(3, 1, 2, 4).unwrap();
        let u = r.from_int(4);
        let m = KappaExponent::required_m(3, 4, 2);
        let k3 = KappaExponent::from_int(3, 3, m);
        assert_eq!(r.one_unit_power(&u, &k3).unwrap(), r.pow(&u, 3));
        let km1 = KappaExponent::from_int(3, -1, m);
        assert_eq!(r.mul(&r.one_unit_power(&u, &km1).unwrap(), &u), r.one());
        assert!(r.one_unit_power(&r.from_int(2), &k3).is_err());
    }

    #[test]
    fn inverse_and_division() {
        let r = PadicRing::new(3, 2, 2, 5).unwrap();
        let x = r.add(&r.teichmuller(&[2, 1]), &r.pi_hat_pow(1));
        let y = r.inv_unit(&x).unwrap();
        assert_eq!(r.mul(&x, &y), r.one());
        let (z, loss) = r.div_int(&r.from_int(12), 6).unwrap();
        assert_eq!(loss, 1);
        assert_eq!(r.truncate(&z, 4), r.truncate(&r.from_int(2), 4));
    }
}
