use std::sync::Arc;

use proptest::prelude::*;
use unitroot_core::charsum::FiberContext;
use unitroot_core::family::LaurentFamily;
use unitroot_core::geometry::Q;
use unitroot_core::padic::{KappaExponent, PadicRing};
use unitroot_core::par::Exec;
use unitroot_core::pseries::agreement_digits;
use unitroot_core::sympow::alpha::operator_matrix;
use unitroot_core::sympow::checks::{
    block_scale, finite_sym_approx, normalization_check, pairing_weights, sym_pairing_identity, trace_identity,
};
use unitroot_core::sympow::euler::{beta_det_euler, SpectraSource};
use unitroot_core::sympow::{sym_family, Side, SymPower, SymSpace, SymTruncation};

fn ring() -> PadicRing {
    PadicRing::new(3, 1, 2, 6).unwrap()
}

fn space(l_max: usize, w_sym: i64) -> Arc<SymSpace> {
    let tr = SymTruncation::new(l_max, Q::from_integer(w_sym), Q::from_integer(0), 4).unwrap();
    Arc::new(SymSpace::new(&LaurentFamily::reference(), tr).unwrap())
}

fn m() -> usize {
    let r = ring();
    KappaExponent::required_m(3, r.prec, r.e)
}

fn t_bar() -> impl Strategy<Value = [u32; 2]> {
    prop::sample::select(vec![[1u32, 1], [1, 2], [2, 1], [2, 2]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn operators_reduce_to_the_projector(t in t_bar(), k in 0i64..100_000, dual in any::<bool>()) {
        let ring = ring();
        let sp = space(3, 3);
        let side = if dual { Side::Dual } else { Side::Primal };
        let fam = sym_family(sp.clone(), &t, &ring, SymPower::Kappa(KappaExponent::from_int(3, k, m())), side, Exec::default()).unwrap();
        let b = operator_matrix(&fam, Exec::default()).unwrap();
        let r = normalization_check(&b, block_scale(&sp), 4, Exec::default()).unwrap();
        prop_assert!(r.passed());
    }

    #[test]
    fn pairing_between_the_sides(t in t_bar(), k in 1u64..=3) {
        let ring = ring();
        let sp = space(3, 3);
        let b = operator_matrix(&sym_family(sp.clone(), &t, &ring, SymPower::Finite(k), Side::Primal, Exec::default()).unwrap(), Exec::default()).unwrap();
        let d = operator_matrix(&sym_family(sp.clone(), &t, &ring, SymPower::Finite(k), Side::Dual, Exec::default()).unwrap(), Exec::default()).unwrap();
        prop_assert!(sym_pairing_identity(&b, &d, &pairing_weights(&sp, k)));
    }

    #[test]
    fn integer_kappa_agrees_with_the_finite_power(t in t_bar(), k in 1u64..=3) {
        let ring = ring();
        // every monomial has length <= k, so nothing is dropped
        let sp = space(k as usize, 3);
        let r = finite_sym_approx(sp, &t, &ring, &KappaExponent::from_int(3, k as i64, m()), &[k], Exec::default()).unwrap();
        prop_assert_eq!(r.steps[0].distance, Q::from_integer(ring.prec as i64));
    }
}

#[test]
fn finite_powers_converge_at_other_parameters() {
    let ring = ring();
    for t in [[1u32, 2], [2, 2]] {
        let r = finite_sym_approx(space(3, 4), &t, &ring, &KappaExponent::all_ones(3, m()), &[1, 4, 13], Exec::default()).unwrap();
        assert!(r.passed(), "{t:?}: {:?}", r.steps);
    }
}

#[test]
fn trace_of_beta_is_a_sum_over_fibers() {
    let ring = ring();
    let fam = LaurentFamily::reference();
    let ctx = FiberContext::new(&fam, &[1, 2], &ring, Exec::default()).unwrap();
    for kappa in [KappaExponent::from_int(3, 1, m()), KappaExponent::all_ones(3, m())] {
        let sp = space(3, 4);
        let b = operator_matrix(&sym_family(sp, &[1, 2], &ring, SymPower::Kappa(kappa.clone()), Side::Primal, Exec::default()).unwrap(), Exec::default()).unwrap();
        let r = trace_identity(&ctx, &b, &kappa).unwrap();
        assert!(r.passed(), "{} of {}", r.agreement, r.certified);
    }
}

#[test]
fn euler_duality_at_another_parameter() {
    let ring = ring();
    let fam = LaurentFamily::reference();
    let ctx = FiberContext::new(&fam, &[1, 2], &ring, Exec::default()).unwrap();
    let kappa = KappaExponent::from_int(3, 2, m());
    let a = beta_det_euler(&ctx, &kappa, 3, 3, SpectraSource::Sums).unwrap();
    let b = beta_det_euler(&ctx, &kappa, 3, 3, SpectraSource::Dual).unwrap();
    let cert = a.precision.min(b.precision);
    assert!(cert >= 3);
    for (x, y) in a.det.iter().zip(&b.det) {
        assert!(agreement_digits(&ring, x, y) >= cert);
    }
}
