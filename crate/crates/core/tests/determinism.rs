//! Results do not depend on the execution mode or the worker count.

use std::sync::Arc;

use unitroot_core::charsum::exp_sum;
use unitroot_core::dwork::{default_cap, fredholm, total_family_matrix, FiberOperator};
use unitroot_core::family::LaurentFamily;
use unitroot_core::ffield::{closed_points, FqField};
use unitroot_core::formula::{total_weight_for, verify_main_theorem, VerifyConfig};
use unitroot_core::geometry::Q;
use unitroot_core::padic::{KappaExponent, PadicRing, PadicScalar};
use unitroot_core::par::Exec;
use unitroot_core::sympow::alpha::operator_matrix;
use unitroot_core::sympow::{sym_family, Side, SymPower, SymSpace, SymTruncation};

/// Every computation below, as digit strings.
fn fingerprint(exec: Exec) -> Vec<Vec<u64>> {
    let fam = LaurentFamily::reference();
    let ring = PadicRing::new(3, 1, 2, 6).unwrap();
    let flat = |xs: &[PadicScalar]| xs.iter().flat_map(|x| x.coeffs.clone()).collect::<Vec<u64>>();
    let mut out = Vec::new();
    let s = exp_sum(&fam, &[1, 1], &[1], 1, 5, exec).unwrap();
    out.push(s.coeffs.iter().map(|&c| c as u64).collect());
    let mut op = FiberOperator::new(&fam, &[1, 1], 6).unwrap();
    for pt in closed_points(&FqField::new(3, 1).unwrap(), 1, 2).unwrap() {
        let a = op.fiber_matrix(&pt, default_cap(3, 6), exec).unwrap();
        out.push(flat(&a.entries));
        out.push(flat(&fredholm(&a, 4, exec).unwrap().coeffs));
    }
    let m = total_family_matrix(&fam, &[1, 1], &ring, total_weight_for(&fam, 3).unwrap(), exec).unwrap();
    out.push(flat(&fredholm(&m, 6, exec).unwrap().coeffs));
    let tr = SymTruncation::new(3, Q::from_integer(4), Q::from_integer(0), 4).unwrap();
    let space = Arc::new(SymSpace::new(&fam, tr).unwrap());
    let kappa = KappaExponent::all_ones(3, KappaExponent::required_m(3, 6, 2));
    let b = operator_matrix(&sym_family(space, &[1, 1], &ring, SymPower::Kappa(kappa.clone()), Side::Dual, exec).unwrap(), exec).unwrap();
    out.push(flat(&fredholm(&b, 4, exec).unwrap().coeffs));
    let mut cfg = VerifyConfig::new(2);
    cfg.prec = 6;
    cfg.exec = exec;
    let rep = verify_main_theorem(&fam, &[1, 1], &kappa, &cfg).unwrap();
    for r in &rep.routes {
        out.push(r.value.coeffs.clone());
        out.push(vec![r.certified as u64, r.degree as u64]);
    }
    out
}

#[test]
fn sequential_matches_parallel() {
    assert_eq!(fingerprint(Exec::Sequential), fingerprint(Exec::Parallel));
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_matter() {
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| fingerprint(Exec::Parallel))
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}
