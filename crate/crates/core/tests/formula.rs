use std::sync::Arc;

use unitroot_core::family::LaurentFamily;
use unitroot_core::formula::{
    eigen_residual, exp_pi_h, f_ratio_dual, f_ratio_eval, f_ratio_series, total_weight_for, verify_main_theorem,
    ExpCaps, RatioConfig, RatioMethod, VerifyConfig,
};
use unitroot_core::geometry::{LatticePoint, Q};
use unitroot_core::padic::{KappaExponent, PadicRing, PadicScalar};
use unitroot_core::par::Exec;
use unitroot_core::sympow::{SymSpace, SymTruncation};

fn ring() -> PadicRing {
    PadicRing::new(3, 1, 2, 6).unwrap()
}

fn m() -> usize {
    KappaExponent::required_m(3, 6, 2)
}

type Eta = Vec<(LatticePoint, LatticePoint, PadicScalar)>;

fn eta_and_f(t_bar: &[u32], ring: &PadicRing, target: u32) -> (Eta, PadicScalar, u32) {
    let fam = LaurentFamily::reference();
    let w = total_weight_for(&fam, target).unwrap();
    let (f, it, index) = f_ratio_dual(&fam, t_bar, ring, w, Exec::default()).unwrap();
    let eta = index
        .iter()
        .zip(&it.vector)
        .map(|(e, v)| (LatticePoint(e[..1].to_vec()), LatticePoint(e[1..].to_vec()), v.clone()))
        .collect();
    (eta, f.value, it.certified)
}

#[test]
fn ratio_telescopes() {
    // 𝔉(Λ) 𝔉(Λ^p) = A(Λ) / A(Λ^{p^2})
    let ring = ring();
    let fam = LaurentFamily::reference();
    let caps = ExpCaps { w_gamma: Q::from_integer(0), w_x: Q::from_integer(3), d_lambda: 12 };
    let s = exp_pi_h(&fam, &ring, caps, Exec::default()).unwrap();
    let deg = 12;
    let f = f_ratio_series(&s, deg).unwrap();
    let lhs = f.mul(&f.dilate(3), &ring, deg);
    let a = s.constant_coeff();
    let rhs = a.mul(&a.dilate(9).inverse(&ring, s.nvars(), deg).unwrap(), &ring, deg);
    assert_eq!(lhs, rhs);
}

#[test]
fn eta_starts_with_one() {
    let ring = ring();
    for t in [[1u32, 1], [2, 1]] {
        let (eta, f, cert) = eta_and_f(&t, &ring, 3);
        assert!(eta[0].0.is_zero() && eta[0].1.is_zero());
        assert_eq!(eta[0].2, ring.one());
        assert!(cert >= 3);
        assert!(ring.is_unit(&f) && ring.residue(&f) == ring.residue(&ring.one()));
    }
}

#[test]
fn trivial_exponent_has_no_residual() {
    let ring = ring();
    let (eta, f, _) = eta_and_f(&[1, 1], &ring, 3);
    let tr = SymTruncation::new(3, Q::from_integer(4), Q::from_integer(0), 4).unwrap();
    let space = Arc::new(SymSpace::new(&LaurentFamily::reference(), tr).unwrap());
    let r = eigen_residual(space, &[1, 1], &ring, &KappaExponent::from_int(3, 0, m()), &eta, &f, Exec::default()).unwrap();
    assert_eq!(r.eigenvalue, ring.one());
    assert_eq!(r.residual, Q::from_integer(ring.prec as i64));
}

#[test]
fn eigen_relation_at_another_parameter() {
    let ring = ring();
    let (eta, f, cert) = eta_and_f(&[2, 2], &ring, 4);
    let tr = SymTruncation::new(3, Q::from_integer(4), Q::from_integer(0), 4).unwrap();
    let space = Arc::new(SymSpace::new(&LaurentFamily::reference(), tr).unwrap());
    for k in [1, 2] {
        let r = eigen_residual(space.clone(), &[2, 2], &ring, &KappaExponent::from_int(3, k, m()), &eta, &f, Exec::default()).unwrap();
        assert!(r.digits(ring.prec).min(cert) >= 3, "κ = {k}: {r:?}");
    }
}

#[test]
fn ratio_methods_agree() {
    let ring = ring();
    let fam = LaurentFamily::reference();
    let caps = ExpCaps { w_gamma: Q::from_integer(0), w_x: Q::from_integer(4), d_lambda: ExpCaps::default_degree(3, 4) };
    let s = exp_pi_h(&fam, &ring, caps, Exec::default()).unwrap();
    let cfg = RatioConfig { total_weight: total_weight_for(&fam, 3).unwrap(), exec: Exec::default() };
    for t in [[1u32, 1], [1, 2]] {
        let v = f_ratio_eval(&s, &fam, &t, cfg, RatioMethod::DualPowerIteration).unwrap();
        assert!(v.precision >= 3);
    }
}

#[test]
fn main_theorem_at_another_parameter() {
    let fam = LaurentFamily::reference();
    let mut cfg = VerifyConfig::new(2);
    cfg.prec = 6;
    let rep = verify_main_theorem(&fam, &[1, 2], &KappaExponent::from_int(3, 1, m()), &cfg).unwrap();
    assert!(rep.passed());
    assert!(rep.joint >= 2);
    assert_eq!(rep.routes.len(), 4);
}
