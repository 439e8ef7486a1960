use proptest::prelude::*;
use unitroot_core::charsum::lseries::log_sums;
use unitroot_core::charsum::{exp_sum, exp_sum_total, l_series, CyclotomicInteger};
use unitroot_core::family::LaurentFamily;
use unitroot_core::ffield::FqField;
use unitroot_core::padic::{PadicRing, PadicScalar};
use unitroot_core::par::Exec;
use unitroot_core::pseries::{delta_q, mul_trunc};

/// `Σ_{x ≠ 0} ζ^{Tr(t1 x^2 + t2 x^-2 + λ x)}` over F_{3^m}, straight from the definition.
fn brute_force(t1: u32, t2: u32, lambda: u32, m: usize) -> CyclotomicInteger {
    let f = FqField::new(3, m).unwrap();
    let (t1, t2, l) = (f.from_int(t1 as i64), f.from_int(t2 as i64), f.from_int(lambda as i64));
    let mut counts = [0i64; 3];
    for x in f.elements().skip(1) {
        let x2 = f.mul(x, x);
        let v = f.add(f.add(f.mul(t1, x2), f.mul(t2, f.inv(x2))), f.mul(l, x));
        counts[f.trace(v) as usize] += 1;
    }
    CyclotomicInteger::from_counts(3, &counts)
}

fn unit() -> impl Strategy<Value = u32> {
    1u32..=2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sums_match_the_definition(t1 in unit(), t2 in unit(), l in unit(), m in 1usize..=4) {
        let fam = LaurentFamily::reference();
        prop_assert_eq!(exp_sum(&fam, &[t1, t2], &[l], 1, m, Exec::default()).unwrap(), brute_force(t1, t2, l, m));
    }

    #[test]
    fn scaling_acts_by_galois(t1 in unit(), t2 in unit(), l in unit(), m in 1usize..=3) {
        let fam = LaurentFamily::reference();
        let s = exp_sum(&fam, &[t1, t2], &[l], 1, m, Exec::default()).unwrap();
        let scaled = exp_sum(&fam, &[3 - t1, 3 - t2], &[3 - l], 1, m, Exec::default()).unwrap();
        prop_assert_eq!(scaled, s.galois(2));
    }

    #[test]
    fn log_inverts_exp(t1 in unit(), t2 in unit(), l in unit()) {
        let fam = LaurentFamily::reference();
        let sums: Vec<_> = (1..=6).map(|m| exp_sum(&fam, &[t1, t2], &[l], 1, m, Exec::default()).unwrap()).collect();
        let rep = l_series(3, &sums, 6).unwrap();
        let back = log_sums(&rep).unwrap();
        let want: Vec<_> = sums.iter().map(|s| s.to_rational()).collect();
        prop_assert_eq!(back, want);
    }

    #[test]
    fn delta_q_is_multiplicative(g in prop::collection::vec(0u64..729, 6), h in prop::collection::vec(0u64..729, 6)) {
        let ring = PadicRing::new(3, 1, 2, 6).unwrap();
        let series = |c: &[u64]| -> Vec<PadicScalar> {
            let mut out = vec![ring.one()];
            out.extend(c.chunks(2).map(|x| ring.from_coeffs(x.to_vec())));
            out
        };
        let (g, h) = (series(&g), series(&h));
        let gh = mul_trunc(&ring, &g, &h, g.len());
        let lhs = delta_q(&ring, &gh, 3).unwrap();
        let rhs = mul_trunc(&ring, &delta_q(&ring, &g, 3).unwrap(), &delta_q(&ring, &h, 3).unwrap(), g.len());
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn total_sum_is_the_sum_over_fibers() {
    let fam = LaurentFamily::reference();
    for m in 1..=3 {
        let total = exp_sum_total(&fam, &[1, 1], m, Exec::default()).unwrap();
        let f = FqField::new(3, m).unwrap();
        let mut acc = CyclotomicInteger::zero(3);
        for l in f.elements().skip(1) {
            acc = acc.add(&exp_sum(&fam, &[1, 1], &[l], m, 1, Exec::default()).unwrap());
        }
        assert_eq!(total, acc, "m = {m}");
    }
}

#[test]
fn reference_first_sums() {
    let fam = LaurentFamily::reference();
    assert_eq!(exp_sum(&fam, &[1, 1], &[1], 1, 1, Exec::default()).unwrap().to_string(), "1+z");
    assert_eq!(exp_sum_total(&fam, &[1, 1], 1, Exec::default()).unwrap().to_string(), "2+2z");
}
