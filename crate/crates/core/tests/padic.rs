use proptest::prelude::*;
use unitroot_core::ffield::FqField;
use unitroot_core::padic::{KappaExponent, PadicRing, PadicScalar};

fn ring_params() -> impl Strategy<Value = PadicRing> {
    (prop::sample::select(vec![2u64, 3, 5]), 1usize..=2, 3u32..=6).prop_map(|(p, a, prec)| PadicRing::new(p, a, p as usize - 1, prec).unwrap())
}

fn element(ring: &PadicRing) -> impl Strategy<Value = PadicScalar> {
    let r = ring.clone();
    prop::collection::vec(0..ring.modulus, ring.width()).prop_map(move |c| r.from_coeffs(c))
}

fn ring_and(k: usize) -> impl Strategy<Value = (PadicRing, Vec<PadicScalar>)> {
    ring_params().prop_flat_map(move |r| {
        let els = prop::collection::vec(element(&r), k);
        (Just(r), els)
    })
}

/// `1 + π̂ x`.
fn one_unit(ring: &PadicRing, x: &PadicScalar) -> PadicScalar {
    ring.add(&ring.one(), &ring.mul(&ring.pi_hat_pow(1), x))
}

proptest! {
    #[test]
    fn ring_axioms((r, v) in ring_and(3)) {
        let (x, y, z) = (&v[0], &v[1], &v[2]);
        prop_assert_eq!(r.add(x, y), r.add(y, x));
        prop_assert_eq!(r.mul(x, y), r.mul(y, x));
        prop_assert_eq!(r.mul(&r.mul(x, y), z), r.mul(x, &r.mul(y, z)));
        prop_assert_eq!(r.add(&r.add(x, y), z), r.add(x, &r.add(y, z)));
        prop_assert_eq!(r.mul(x, &r.add(y, z)), r.add(&r.mul(x, y), &r.mul(x, z)));
        prop_assert_eq!(r.mul(x, &r.one()), x.clone());
        prop_assert!(r.add(x, &r.neg(x)).is_zero());
        prop_assert_eq!(r.sub(x, y), r.add(x, &r.neg(y)));
    }

    #[test]
    fn pi_hat_relation(r in ring_params()) {
        prop_assert_eq!(r.pow(&r.pi_hat_pow(1), r.e as u64), r.from_int(-(r.p as i64)));
    }

    #[test]
    fn unit_inverse((r, v) in ring_and(1)) {
        let u = r.add(&r.teichmuller(&[1]), &r.mul(&r.pi_hat_pow(1), &v[0]));
        let inv = r.inv_unit(&u).unwrap();
        prop_assert_eq!(r.mul(&u, &inv), r.one());
    }

    #[test]
    fn frobenius_is_a_ring_map((r, v) in ring_and(2)) {
        let (x, y) = (&v[0], &v[1]);
        prop_assert_eq!(r.frobenius(&r.mul(x, y)), r.mul(&r.frobenius(x), &r.frobenius(y)));
        prop_assert_eq!(r.frobenius(&r.add(x, y)), r.add(&r.frobenius(x), &r.frobenius(y)));
        prop_assert_eq!(r.frobenius_pow(x, r.a), x.clone());
    }

    #[test]
    fn teichmuller_is_multiplicative(r in ring_params(), xs in (1u32..1000, 1u32..1000)) {
        let f = FqField::new(r.p, r.a).unwrap();
        let q = r.q() as u32;
        let (x, y) = (xs.0 % q, xs.1 % q);
        let tx = r.teichmuller(&f.unpack(x));
        let ty = r.teichmuller(&f.unpack(y));
        prop_assert_eq!(r.teichmuller(&f.unpack(f.mul(x, y))), r.mul(&tx, &ty));
        prop_assert_eq!(r.pow(&tx, r.q()), tx.clone());
        prop_assert_eq!(r.residue(&tx), f.unpack(x));
        prop_assert_eq!(r.frobenius(&tx), r.pow(&tx, r.p));
    }

    #[test]
    fn kappa_powers_add((r, v) in ring_and(1), k1 in 0i64..200, k2 in 0i64..200, ones in any::<bool>()) {
        let m = KappaExponent::required_m(r.p, r.prec, r.e);
        let u = one_unit(&r, &v[0]);
        let a = if ones { KappaExponent::all_ones(r.p, m) } else { KappaExponent::from_int(r.p, k1, m) };
        let b = KappaExponent::from_int(r.p, k2, m);
        let lhs = r.one_unit_power(&u, &a.add(&b)).unwrap();
        let rhs = r.mul(&r.one_unit_power(&u, &a).unwrap(), &r.one_unit_power(&u, &b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn integer_kappa_is_a_power((r, v) in ring_and(1), k in 0u64..300) {
        let m = KappaExponent::required_m(r.p, r.prec, r.e);
        let u = one_unit(&r, &v[0]);
        prop_assert_eq!(r.one_unit_power(&u, &KappaExponent::from_int(r.p, k as i64, m)).unwrap(), r.pow(&u, k));
    }

    #[test]
    fn all_ones_inverts_one_minus_p((r, v) in ring_and(1)) {
        // κ = 1/(1-p), so (u^κ)^(1-p) = u
        let m = KappaExponent::required_m(r.p, r.prec, r.e);
        let u = one_unit(&r, &v[0]);
        let w = r.one_unit_power(&u, &KappaExponent::all_ones(r.p, m)).unwrap();
        let back = r.mul(&w, &r.inv_unit(&r.pow(&w, r.p)).unwrap());
        prop_assert_eq!(back, u);
    }
}

#[test]
fn short_kappa_is_rejected() {
    let r = PadicRing::new(3, 1, 2, 6).unwrap();
    let u = one_unit(&r, &r.one());
    assert!(r.one_unit_power(&u, &KappaExponent::from_int(3, 1, 2)).is_err());
    assert!(r.one_unit_power(&r.from_int(2), &KappaExponent::from_int(3, 1, 12)).is_err());
}

#[test]
fn composite_modulus_is_rejected() {
    assert!(PadicRing::new(4, 1, 3, 4).is_err());
    assert!(PadicRing::new(3, 1, 2, 40).is_err());
}
