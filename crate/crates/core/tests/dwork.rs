use proptest::prelude::*;
use unitroot_core::charsum::FiberContext;
use unitroot_core::dwork::{
    check_fiber_l, default_cap, fredholm, total_family_matrix, total_trace_check, trace_formula_check, twisted_product,
    working_precision, FiberOperator, NuclearMatrix,
};
use unitroot_core::family::{Coeff, FTerm, LaurentFamily, PTerm};
use unitroot_core::ffield::{closed_points, FqField};
use unitroot_core::formula::total_weight_for;
use unitroot_core::geometry::{LatticePoint, Q};
use unitroot_core::padic::{PadicRing, PadicScalar};
use unitroot_core::par::Exec;
use unitroot_core::pseries::{agreement_digits, mul_trunc};

fn quintic_family() -> LaurentFamily {
    LaurentFamily {
        p: 5,
        a: 1,
        n: 1,
        s: 1,
        f_terms: vec![
            FTerm { u: LatticePoint(vec![2]), coeff: Coeff::Var(0) },
            FTerm { u: LatticePoint(vec![-2]), coeff: Coeff::Var(1) },
        ],
        p_terms: vec![PTerm { gamma: LatticePoint(vec![1]), v: LatticePoint(vec![1]), coeff: 1 }],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn trace_formula_on_reference_fibers(t1 in 1u32..=2, t2 in 1u32..=2, pick in 0usize..8) {
        let fam = LaurentFamily::reference();
        let pts = closed_points(&FqField::new(3, 1).unwrap(), 1, 2).unwrap();
        let pt = &pts[pick % pts.len()];
        let mut op = FiberOperator::new(&fam, &[t1, t2], 3).unwrap();
        for m in 1..=2 {
            let c = trace_formula_check(&mut op, pt, m, default_cap(3, 3), Exec::default()).unwrap();
            prop_assert_eq!(c.certified, 3);
        }
    }

    #[test]
    fn trace_formula_over_f5(t1 in 1u32..=4, t2 in 1u32..=4, l in 1u32..=4) {
        let fam = quintic_family();
        let pts = closed_points(&FqField::new(5, 1).unwrap(), 1, 1).unwrap();
        let pt = pts.iter().find(|x| x.orbit_rep == vec![l]).unwrap();
        let mut op = FiberOperator::new(&fam, &[t1, t2], 3).unwrap();
        for m in 1..=2 {
            let c = trace_formula_check(&mut op, pt, m, default_cap(5, 3), Exec::default()).unwrap();
            prop_assert!(c.certified >= 3);
        }
    }

    #[test]
    fn fredholm_of_a_diagonal(d in prop::collection::vec(0u64..729, 4)) {
        let ring = PadicRing::new(3, 1, 2, 6).unwrap();
        let mut m = NuclearMatrix::zeros(&ring, vec![Q::from_integer(0); 4], Q::from_integer(6));
        let diag: Vec<PadicScalar> = d.iter().map(|&c| ring.from_int(c as i64)).collect();
        for (i, x) in diag.iter().enumerate() {
            m.set(i, i, x.clone(), Q::from_integer(0));
        }
        let det = fredholm(&m, 4, Exec::Sequential).unwrap();
        let mut want = vec![ring.one()];
        for x in &diag {
            want = mul_trunc(&ring, &want, &[ring.one(), ring.neg(x)], 5);
        }
        for (j, (c, w)) in det.coeffs.iter().zip(&want).enumerate() {
            prop_assert!(agreement_digits(&ring, c, w) >= det.certified[j]);
        }
    }
}

#[test]
fn twisted_product_matches_the_direct_product() {
    let ring = PadicRing::new(3, 2, 2, 4).unwrap();
    let n = 3;
    let mut m = NuclearMatrix::zeros(&ring, vec![Q::from_integer(0); n], Q::from_integer(4));
    for i in 0..n {
        for j in 0..n {
            let c: Vec<u64> = (0..ring.width()).map(|k| ((7 * i + 5 * j + 3 * k + 1) * 13 % 81) as u64).collect();
            m.set(i, j, ring.from_coeffs(c), Q::from_integer(0));
        }
    }
    for steps in 1..=5 {
        for inverse in [false, true] {
            let mut direct = m.clone();
            for k in 1..steps {
                let shift = if inverse { (2 - k % 2) % 2 } else { k % 2 };
                direct = direct.mul(&m.frobenius_pow(shift), Exec::Sequential).unwrap();
            }
            let fast = twisted_product(&m, steps, inverse, Exec::Sequential).unwrap();
            assert_eq!(fast.entries, direct.entries, "steps = {steps}, inverse = {inverse}");
        }
    }
}

#[test]
fn fiber_determinant_is_stable_in_the_cap() {
    let fam = LaurentFamily::reference();
    let prec = working_precision(3, 4, 4);
    let mut op = FiberOperator::new(&fam, &[1, 2], prec).unwrap();
    let pts = closed_points(&FqField::new(3, 1).unwrap(), 1, 1).unwrap();
    for pt in &pts {
        let w = default_cap(3, prec);
        let a = fredholm(&op.fiber_matrix(pt, w, Exec::default()).unwrap(), 4, Exec::default()).unwrap();
        let b = fredholm(&op.fiber_matrix(pt, w + Q::new(1, 2), Exec::default()).unwrap(), 4, Exec::default()).unwrap();
        let ring = PadicRing::new(3, 1, 2, prec).unwrap();
        for j in 0..=4 {
            let cert = a.certified[j].min(b.certified[j]);
            assert!(cert >= 4);
            assert!(agreement_digits(&ring, &a.coeffs[j], &b.coeffs[j]) >= cert);
        }
    }
}

#[test]
fn dwork_l_function_matches_the_sums() {
    let fam = LaurentFamily::reference();
    for t_bar in [[1u32, 2], [2, 2]] {
        let ring = PadicRing::new(3, 1, 2, 4).unwrap();
        let ctx = FiberContext::new(&fam, &t_bar, &ring, Exec::default()).unwrap();
        let mut op = FiberOperator::new(&fam, &t_bar, working_precision(3, 4, 8)).unwrap();
        for pt in closed_points(&FqField::new(3, 1).unwrap(), 1, 1).unwrap() {
            let (rep, agree) = check_fiber_l(&mut op, &ctx, &pt, 8, default_cap(3, 4), Exec::default()).unwrap();
            assert!(rep.precision >= 4 && agree >= 4);
        }
    }
}

#[test]
fn total_family_trace_formula() {
    let fam = LaurentFamily::reference();
    let ring = PadicRing::new(3, 1, 2, 6).unwrap();
    for t_bar in [[1u32, 1], [1, 2]] {
        let w = total_weight_for(&fam, 3).unwrap();
        let m = total_family_matrix(&fam, &t_bar, &ring, w, Exec::default()).unwrap();
        assert!(m.floors_respected());
        for k in 1..=2 {
            assert!(total_trace_check(&fam, &t_bar, &m, k, Exec::default()).unwrap().passed());
        }
    }
}
