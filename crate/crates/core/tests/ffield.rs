use proptest::prelude::*;
use unitroot_core::ffield::{closed_points, lex_least_irreducible, FqField};

fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut out = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            out = -out;
        }
        d += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}

/// Closed points of exact degree `d` on the `s`-torus over F_q.
fn orbit_count(q: i64, s: u32, d: u64) -> i64 {
    let total: i64 = (1..=d).filter(|e| d % e == 0).map(|e| mobius(d / e) * (q.pow(e as u32) - 1).pow(s)).sum();
    total / d as i64
}

#[test]
fn orbit_counts() {
    for (p, k, s, dmax) in [(2u64, 1usize, 1usize, 6usize), (2, 1, 2, 4), (3, 1, 1, 6), (3, 1, 2, 3), (3, 2, 1, 3), (5, 1, 2, 2), (2, 2, 2, 2)] {
        let f = FqField::new(p, k).unwrap();
        let pts = closed_points(&f, s, dmax).unwrap();
        let q = p.pow(k as u32) as i64;
        for d in 1..=dmax {
            let n = pts.iter().filter(|x| x.degree == d).count() as i64;
            assert_eq!(n, orbit_count(q, s as u32, d as u64), "q = {q}, s = {s}, d = {d}");
        }
    }
}

#[test]
fn orbit_representatives_have_exact_degree() {
    let f = FqField::new(3, 1).unwrap();
    for pt in closed_points(&f, 1, 4).unwrap() {
        let big = f.extension(pt.degree).unwrap();
        let x = pt.orbit_rep[0];
        let orbit: std::collections::BTreeSet<u32> = (0..pt.degree as u64).map(|i| big.pow(x, 3u64.pow(i as u32))).collect();
        assert_eq!(orbit.len(), pt.degree);
        assert_eq!(big.pow(x, 3u64.pow(pt.degree as u32)), x);
    }
}

#[test]
fn defining_polynomials_are_lex_least() {
    assert_eq!(lex_least_irreducible(2, 2), vec![1, 1, 1]);
    assert_eq!(lex_least_irreducible(3, 2), vec![1, 0, 1]);
    assert_eq!(lex_least_irreducible(2, 3), vec![1, 1, 0, 1]);
}

fn field() -> impl Strategy<Value = (u64, usize, usize)> {
    prop::sample::select(vec![(2u64, 4usize, 2usize), (2, 6, 3), (2, 6, 2), (3, 4, 2), (3, 2, 1), (5, 2, 1), (3, 6, 3)])
}

proptest! {
    #[test]
    fn trace_is_transitive((p, k, j) in field(), seed in any::<u32>()) {
        let big = FqField::new(p, k).unwrap();
        let sub = FqField::new(p, j).unwrap();
        let emb = sub.embedding_into(&big).unwrap();
        let x = seed % (big.q_minus_1() as u32 + 1);
        let y = big.relative_trace(x, j);
        let pre = sub.elements().find(|&z| emb.apply(&sub, &big, z) == y);
        prop_assert!(pre.is_some(), "relative trace leaves the subfield");
        prop_assert_eq!(sub.trace(pre.unwrap()), big.trace(x));
    }

    #[test]
    fn field_axioms((p, k, _) in field(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let f = FqField::new(p, k).unwrap();
        let q = f.q_minus_1() as u32 + 1;
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a)), f.from_int(1));
            prop_assert_eq!(f.pow(a, f.q_minus_1()), f.from_int(1));
        }
    }
}
