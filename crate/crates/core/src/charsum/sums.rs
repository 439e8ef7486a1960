//! Brute-force exponential sums over tori.

use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::ffield::FqField;
use crate::par::{map_range, Exec};

use super::CyclotomicInteger;

const CHUNK: u64 = 1 << 12;

/// A monomial `c x^e` with `c` packed in the summation field.
#[derive(Clone, Debug)]
pub struct TorusTerm {
    pub coeff: u32,
    pub exps: Vec<i64>,
}

/// `Σ_{x ∈ (F^×)^dim} Ψ(Σ_t c_t x^{e_t})` for a field with log tables.
pub fn torus_sum(field: &FqField, dim: usize, terms: &[TorusTerm], exec: Exec) -> Result<CyclotomicInteger> {
    if !field.has_tables() {
        return Err(Error::Invalid(format!("{field:?} is too large for enumeration")));
    }
    let p = field.p as usize;
    let q1 = field.q_minus_1();
    let total = q1
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Invalid("torus too large".into()))?;
    let tl = field.trace_of_exp();
    let mut base = Vec::with_capacity(terms.len());
    let mut exps = Vec::with_capacity(terms.len());
    for t in terms {
        if t.coeff == 0 {
            continue;
        }
        if t.exps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: t.exps.len() });
        }
        base.push(field.log(t.coeff));
        exps.push(t.exps.iter().map(|&e| e.rem_euclid(q1 as i64) as u64).collect::<Vec<u64>>());
    }
    // step[t][i]: log change of term t when coordinate i increments and all
    // lower coordinates wrap from q1-1 back to 0
    let step: Vec<Vec<u64>> = exps
        .iter()
        .map(|e| {
            (0..dim)
                .map(|i| {
                    let wrap: u64 = e[..i].iter().map(|&x| x * (q1 - 1) % q1).sum::<u64>() % q1;
                    (e[i] + q1 - wrap) % q1
                })
                .collect()
        })
        .collect();
    let nchunks = total.div_ceil(CHUNK) as usize;
    let partial = map_range(exec, nchunks, |c| {
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut counts = vec![0i64; p];
        let mut k = vec![0u64; dim];
        let mut rest = start;
        for ki in k.iter_mut() {
            *ki = rest % q1;
            rest /= q1;
        }
        let mut idx: Vec<u64> = base
            .iter()
            .zip(&exps)
            .map(|(&b, e)| {
                let s: u128 = e.iter().zip(&k).map(|(&x, &y)| x as u128 * y as u128).sum();
                ((b as u128 + s) % q1 as u128) as u64
            })
            .collect();
        for _ in start..end {
            let mut tr = 0usize;
            for &i in &idx {
                tr += tl[i as usize] as usize;
            }
            counts[tr % p] += 1;
            let mut i = 0;
            while i < dim && k[i] == q1 - 1 {
                k[i] = 0;
                i += 1;
            }
            if i == dim {
                break;
            }
            k[i] += 1;
            for (x, st) in idx.iter_mut().zip(&step) {
                *x += st[i];
                if *x >= q1 {
                    *x -= q1;
                }
            }
        }
        counts
    });
    let mut counts = vec![0i64; p];
    for part in partial {
        for (a, b) in counts.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(CyclotomicInteger::from_counts(field.p, &counts))
}

/// `S_m(t̄, λ̄)`: the sum of `Ψ(G(t̄, λ̄, x))` over the n-torus of `F_{q^{d m}}`,
/// where `λ̄` has coordinates in the degree-`d` extension of `F_q`.
pub fn exp_sum(
    family: &LaurentFamily,
    t_bar: &[u32],
    lambda: &[u32],
    d: usize,
    m: usize,
    exec: Exec,
) -> Result<CyclotomicInteger> {
    if m == 0 || d == 0 {
        return Err(Error::Invalid("degrees must be positive".into()));
    }
    if lambda.len() != family.s {
        return Err(Error::DimensionMismatch { expected: family.s, found: lambda.len() });
    }
    if lambda.contains(&0) {
        return Err(Error::Invalid("zero coordinate in lambda".into()));
    }
    let base = FqField::new(family.p, family.a)?;
    let fiber = FqField::new(family.p, family.a * d)?;
    let big = FqField::new(family.p, family.a * d * m)?;
    let emb_base = base.embedding_into(&big)?;
    let emb_fiber = fiber.embedding_into(&big)?;
    let lam: Vec<u32> = lambda.iter().map(|&l| emb_fiber.apply(&fiber, &big, l)).collect();
    let mut terms = Vec::new();
    for mono in family.monomials(t_bar)? {
        let mut c = emb_base.apply(&base, &big, mono.coeff);
        for (l, &g) in lam.iter().zip(&mono.gamma.0) {
            c = big.mul(c, big.pow_i(*l, g));
        }
        terms.push(TorusTerm { coeff: c, exps: mono.u.0.clone() });
    }
    torus_sum(&big, family.n, &terms, exec)
}

/// Sum of `Ψ(G(t̄, λ, x))` over the `(s+n)`-torus of `F_{q^m}`.
pub fn exp_sum_total(family: &LaurentFamily, t_bar: &[u32], m: usize, exec: Exec) -> Result<CyclotomicInteger> {
    let base = FqField::new(family.p, family.a)?;
    let big = FqField::new(family.p, family.a * m)?;
    let emb = base.embedding_into(&big)?;
    let terms: Vec<TorusTerm> = family
        .monomials(t_bar)?
        .into_iter()
        .map(|mono| {
            let mut exps = mono.gamma.0.clone();
            exps.extend(mono.u.0.iter().copied());
            TorusTerm { coeff: emb.apply(&base, &big, mono.coeff), exps }
        })
        .collect();
    torus_sum(&big, family.s + family.n, &terms, exec)
}
