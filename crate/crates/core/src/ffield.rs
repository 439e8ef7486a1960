//! Finite fields F_{p^k} with packed element encoding, log tables, traces and
//! Frobenius orbits.
//!
//! An element `Σ c_i y^i` is packed as the integer `Σ c_i p^i`, where `y` is a
//! root of the lexicographically least monic irreducible polynomial of degree
//! `k` over F_p (coefficients compared from `y^{k-1}` down to `y^0`).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::charsum::CyclotomicInteger;
use crate::error::{Error, Result};

/// Fields above this size are built without log tables.
pub const TABLE_LIMIT: u64 = 1 << 24;

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomial arithmetic over F_p, coefficients low degree first.
pub(crate) mod fp_poly {
    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn inv_mod(x: u64, p: u64) -> u64 {
        let mut r = 1u64;
        let mut b = x % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let k = r.len() - 1;
            let c = r[k] * lead_inv % p;
            for i in 0..=dm {
                let idx = k - dm + i;
                r[idx] = (r[idx] + p * p - c * m[i] % p) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut result = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = rem(&mul(&result, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        result
    }

    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let k = f.len() - 1;
        if k == 1 {
            return true;
        }
        let mut ypow = vec![0, 1];
        for _ in 0..k / 2 {
            ypow = powmod(&ypow, p, f, p);
            let mut diff = ypow.clone();
            diff.resize(diff.len().max(2), 0);
            diff[1] = (diff[1] + p - 1) % p;
            trim(&mut diff);
            let g = gcd(f, &diff, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

/// Lexicographically least monic irreducible polynomial of degree `k` over F_p.
pub fn lex_least_irreducible(p: u64, k: usize) -> Vec<u64> {
    let total = p.pow(k as u32);
    for idx in 0..total {
        // most significant digit of idx is the coefficient of y^{k-1}
        let mut f = vec![0u64; k + 1];
        let mut t = idx;
        for i in 0..k {
            f[i] = t % p;
            t /= p;
        }
        f[k] = 1;
        if k > 1 && f[0] == 0 {
            continue;
        }
        if fp_poly::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u8>,
}

pub struct FqField {
    pub p: u64,
    /// Degree over the prime field.
    pub k: usize,
    pub size: u64,
    pub minpoly: Vec<u64>,
    tr_basis: Vec<u64>,
    tables: Option<Tables>,
}

impl std::fmt::Debug for FqField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}^{}", self.p, self.k)
    }
}

fn cache() -> &'static Mutex<HashMap<(u64, usize), Arc<FqField>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<FqField>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl FqField {
    /// The field with `p^k` elements, cached per `(p, k)`.
    pub fn new(p: u64, k: usize) -> Result<Arc<FqField>> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::Invalid("field degree must be positive".into()));
        }
        let size = p
            .checked_pow(k as u32)
            .filter(|&s| s <= u32::MAX as u64)
            .ok_or_else(|| Error::Invalid(format!("field F_{p}^{k} is too large")))?;
        let mut guard = cache().lock().unwrap();
        if let Some(f) = guard.get(&(p, k)) {
            return Ok(f.clone());
        }
        let field = Arc::new(Self::build(p, k, size));
        guard.insert((p, k), field.clone());
        Ok(field)
    }

    fn build(p: u64, k: usize, size: u64) -> FqField {
        let minpoly = lex_least_irreducible(p, k);
        let mut f = FqField { p, k, size, minpoly, tr_basis: Vec::new(), tables: None };
        f.tr_basis = (0..k)
            .map(|i| {
                let mut v = vec![0u64; k];
                v[i] = 1;
                let mut x = f.pack(&v);
                let mut acc = 0u32;
                for _ in 0..k {
                    acc = f.add(acc, x);
                    x = f.pow_slow(x, p);
                }
                f.unpack(acc)[0]
            })
            .collect();
        if size <= TABLE_LIMIT {
            f.tables = Some(f.build_tables());
        }
        f
    }

    fn build_tables(&self) -> Tables {
        let order = self.size - 1;
        let factors = prime_factors(order);
        let g = (1..self.size as u32)
            .find(|&g| factors.iter().all(|&r| self.pow_slow(g, order / r) != 1))
            .expect("multiplicative group is cyclic");
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; self.size as usize];
        let mut trace = Vec::with_capacity(order as usize);
        let mut x = 1u32;
        for i in 0..order {
            exp.push(x);
            log[x as usize] = i as u32;
            trace.push(self.trace_slow(x) as u8);
            x = self.mul_slow(x, g);
        }
        Tables { exp, log, trace }
    }

    pub fn q_minus_1(&self) -> u64 {
        self.size - 1
    }

    pub fn unpack(&self, x: u32) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.k);
        let mut t = x as u64;
        for _ in 0..self.k {
            v.push(t % self.p);
            t /= self.p;
        }
        v
    }

    pub fn pack(&self, digits: &[u64]) -> u32 {
        let mut t = 0u64;
        for &d in digits.iter().rev() {
            t = t * self.p + d % self.p;
        }
        t as u32
    }

    pub fn from_int(&self, c: i64) -> u32 {
        c.rem_euclid(self.p as i64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let x = self.unpack(a);
        let y = self.unpack(b);
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.pack(&s)
    }

    pub fn neg(&self, a: u32) -> u32 {
        let x: Vec<u64> = self.unpack(a).iter().map(|u| (self.p - u) % self.p).collect();
        self.pack(&x)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p) as u32;
        }
        let prod = fp_poly::mul(&self.unpack(a), &self.unpack(b), self.p);
        let mut r = fp_poly::rem(&prod, &self.minpoly, self.p);
        r.resize(self.k, 0);
        self.pack(&r)
    }

    fn pow_slow(&self, a: u32, mut e: u64) -> u32 {
        let mut r = 1u32;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_slow(r, b);
            }
            b = self.mul_slow(b, b);
            e >>= 1;
        }
        r
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => {
                if a == 0 || b == 0 {
                    return 0;
                }
                let order = (self.size - 1) as u64;
                let l = (t.log[a as usize] as u64 + t.log[b as usize] as u64) % order;
                t.exp[l as usize]
            }
            None => self.mul_slow(a, b),
        }
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        match &self.tables {
            Some(t) => {
                if a == 0 {
                    return if e == 0 { 1 } else { 0 };
                }
                let order = self.size - 1;
                let l = (t.log[a as usize] as u128 * e as u128 % order as u128) as usize;
                t.exp[l]
            }
            None => self.pow_slow(a, e),
        }
    }

    /// Power with a signed exponent; `a` must be nonzero when `e < 0`.
    pub fn pow_i(&self, a: u32, e: i64) -> u32 {
        let order = (self.size - 1) as i64;
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.pow(a, e.rem_euclid(order) as u64)
        }
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.pow(a, self.size - 2)
    }

    fn trace_slow(&self, x: u32) -> u64 {
        self.unpack(x)
            .iter()
            .zip(&self.tr_basis)
            .map(|(c, t)| c * t)
            .sum::<u64>()
            % self.p
    }

    /// Absolute trace to F_p.
    pub fn trace(&self, x: u32) -> u64 {
        self.trace_slow(x)
    }

    /// Relative trace to the subfield of degree `sub_k`, as an element of this field.
    pub fn relative_trace(&self, x: u32, sub_k: usize) -> u32 {
        assert_eq!(self.k % sub_k, 0);
        let q = self.p.pow(sub_k as u32);
        let mut acc = 0u32;
        let mut y = x;
        for _ in 0..self.k / sub_k {
            acc = self.add(acc, y);
            y = self.pow(y, q);
        }
        acc
    }

    /// Log of a nonzero element with respect to the table generator.
    pub fn log(&self, x: u32) -> u64 {
        let t = self.tables.as_ref().expect("field too large for log tables");
        t.log[x as usize] as u64
    }

    pub fn exp(&self, i: u64) -> u32 {
        let t = self.tables.as_ref().expect("field too large for log tables");
        t.exp[(i % (self.size - 1)) as usize]
    }

    /// Absolute trace of `g^i`.
    pub fn trace_of_exp(&self) -> &[u8] {
        &self.tables.as_ref().expect("field too large for log tables").trace
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.size as u32
    }

    /// Field of degree `d` over this one.
    pub fn extension(&self, d: usize) -> Result<Arc<FqField>> {
        FqField::new(self.p, self.k * d)
    }

    /// Embedding of `self` into a field of degree divisible by `self.k`.
    pub fn embedding_into(&self, big: &FqField) -> Result<Embedding> {
        if big.p != self.p || big.k % self.k != 0 {
            return Err(Error::Invalid(format!("{self:?} does not embed in {big:?}")));
        }
        if self.k == 1 {
            return Ok(Embedding { powers: vec![1] });
        }
        if !big.has_tables() {
            return Err(Error::Invalid(format!("F_{}^{} is too large to tabulate", big.p, big.k)));
        }
        let step = (big.size - 1) / (self.size - 1);
        let root = (0..self.size - 1)
            .map(|j| big.exp(j * step))
            .find(|&r| {
                let mut acc = 0u32;
                for &c in self.minpoly.iter().rev() {
                    acc = big.add(big.mul(acc, r), big.from_int(c as i64));
                }
                acc == 0
            })
            .expect("subfield contains every root of its defining polynomial");
        let mut powers = Vec::with_capacity(self.k);
        let mut x = 1u32;
        for _ in 0..self.k {
            powers.push(x);
            x = big.mul(x, root);
        }
        Ok(Embedding { powers })
    }
}

/// F_p-linear field embedding determined by the images of the power basis.
#[derive(Clone, Debug)]
pub struct Embedding {
    powers: Vec<u32>,
}

impl Embedding {
    pub fn apply(&self, small: &FqField, big: &FqField, x: u32) -> u32 {
        let digits = small.unpack(x);
        let mut acc = 0u32;
        for (c, &pw) in digits.iter().zip(&self.powers) {
            for _ in 0..*c {
                acc = big.add(acc, pw);
            }
        }
        acc
    }
}

/// `extension(field, d)`: the field of degree `d` over `field`.
pub fn extension(field: &FqField, d: usize) -> Result<Arc<FqField>> {
    field.extension(d)
}

/// A Frobenius orbit of points of the s-torus over the base field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedPoint {
    /// Degree over the base field.
    pub degree: usize,
    /// Coordinates of the orbit representative, packed in the field of degree `degree` over the base.
    pub orbit_rep: Vec<u32>,
}

/// One representative per Frobenius orbit of `(F̄_q^×)^s` of degree `<= max_degree`, ordered
/// by degree and then by the logs of the representative.
pub fn closed_points(field: &FqField, s: usize, max_degree: usize) -> Result<Vec<ClosedPoint>> {
    let q = field.size;
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let big = field.extension(d)?;
        if !big.has_tables() {
            return Err(Error::Invalid(format!("{big:?} is too large for orbit enumeration")));
        }
        let order = big.size - 1;
        let mut cur = vec![0u64; s];
        if s == 0 {
            if d == 1 {
                out.push(ClosedPoint { degree: 1, orbit_rep: Vec::new() });
            }
            continue;
        }
        'outer: loop {
            let mut size = 0usize;
            let mut is_min = true;
            let mut image = cur.clone();
            for t in 1..=d {
                for c in image.iter_mut() {
                    *c = (*c as u128 * q as u128 % order as u128) as u64;
                }
                if image == cur {
                    size = t;
                    break;
                }
                if image < cur {
                    is_min = false;
                }
            }
            if size == d && is_min {
                out.push(ClosedPoint { degree: d, orbit_rep: cur.iter().map(|&j| big.exp(j)).collect() });
            }
            for i in (0..s).rev() {
                if cur[i] + 1 < order {
                    cur[i] += 1;
                    continue 'outer;
                }
                cur[i] = 0;
            }
            break;
        }
    }
    Ok(out)
}

/// `Ψ(x) = ζ_p^{Tr(x)}` as an exact cyclotomic integer.
pub fn additive_character(field: &FqField, x: u32) -> CyclotomicInteger {
    CyclotomicInteger::zeta_pow(field.p, field.trace(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields() {
        let f3 = FqField::new(3, 1).unwrap();
        assert_eq!(f3.minpoly, vec![0, 1]);
        let f9 = FqField::new(3, 2).unwrap();
        assert_eq!(f9.minpoly, vec![1, 0, 1]);
        assert_eq!(f9.q_minus_1(), 8);
        let mut counts = [0; 3];
        for x in f9.elements() {
            counts[f9.trace(x) as usize] += 1;
        }
        assert_eq!(counts, [3, 3, 3]);
        assert!(FqField::new(4, 1).is_err());
    }

    #[test]
    fn field_axioms_f27() {
        let f = FqField::new(3, 3).unwrap();
        for a in f.elements() {
            for b in [1u32, 5, 13, 26] {
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
            }
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }

    #[test]
    fn closed_point_counts() {
        let f3 = FqField::new(3, 1).unwrap();
        let pts = closed_points(&f3, 1, 2).unwrap();
        assert_eq!(pts.iter().filter(|c| c.degree == 1).count(), 2);
        assert_eq!(pts.iter().filter(|c| c.degree == 2).count(), 3);
        let pts2 = closed_points(&f3, 2, 2).unwrap();
        let total: usize = pts2.iter().map(|c| c.degree).sum();
        assert_eq!(total, 64);
    }

    #[test]
    fn embedding_is_multiplicative() {
        let f9 = FqField::new(3, 2).unwrap();
        let f81 = FqField::new(3, 4).unwrap();
        let e = f9.embedding_into(&f81).unwrap();
        for a in f9.elements() {
            for b in f9.elements() {
                assert_eq!(e.apply(&f9, &f81, f9.mul(a, b)), f81.mul(e.apply(&f9, &f81, a), e.apply(&f9, &f81, b)));
            }
        }
    }
}
