//! Four independent routes to the unit root of `L_unit(κ, t̄, T)^{(-1)^{s+1}}`.

use crate::charsum::{assemble_unit_l, fiber_unit_roots_to, series_unit_root, unit_l_degree, unit_l_gap, FiberContext};
use crate::dwork::{fredholm_unit_root, ord_pitilde, total_family_matrix};
use crate::error::{Error, Result};
use crate::family::LaurentFamily;
use crate::geometry::Q;
use crate::padic::{KappaExponent, PadicRing, PadicScalar};
use crate::par::Exec;
use crate::pseries::{agreement_digits, is_one_unit};
use crate::sympow::basis::index_floor_sum;
use crate::sympow::euler::{euler_det_from_spectra, euler_spectra, SpectraSource};

use super::ratio::f_ratio_dual;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Digits every route must certify.
    pub target: u32,
    /// Working precision of the shared ring.
    pub prec: u32,
    /// Fiber degree for the `L_unit` route; `None` picks it from the Hodge gap.
    pub fiber_degree: Option<usize>,
    /// `d_T` of the Euler-product determinant; `None` picks it from the tail bound.
    pub euler_degree: Option<usize>,
    /// Weight cap of the total-family slice; `None` picks it from the floors.
    pub total_weight: Option<Q>,
    /// `d_T` of the total-family Fredholm determinant.
    pub total_degree: usize,
    pub exec: Exec,
}

impl VerifyConfig {
    pub fn new(target: u32) -> Self {
        VerifyConfig {
            target,
            prec: target + 5,
            fiber_degree: None,
            euler_degree: None,
            total_weight: None,
            total_degree: 10,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Route {
    pub name: &'static str,
    pub value: PadicScalar,
    pub certified: u32,
    /// The truncation parameter the route ran at.
    pub degree: usize,
}

#[derive(Clone, Debug)]
pub struct MainTheoremReport {
    pub kappa: KappaExponent,
    pub ring: PadicRing,
    pub routes: Vec<Route>,
    /// Smallest certified precision among the routes.
    pub joint: u32,
    /// Pairwise agreement in digits.
    pub agreement: Vec<(usize, usize, u32)>,
}

impl MainTheoremReport {
    pub fn passed(&self) -> bool {
        self.agreement.iter().all(|&(i, j, d)| d >= self.routes[i].certified.min(self.routes[j].certified))
    }
}

/// Smallest `d_T` whose index-floor tail reaches `target`.
pub fn euler_degree_for(family: &LaurentFamily, target: u32) -> Result<usize> {
    let geom_f = family.geometry_f()?;
    let geom_g = family.geometry_gamma(&geom_f)?;
    let t = Q::from_integer(target as i64);
    (1..64)
        .find(|&d| index_floor_sum(&geom_f, &geom_g, family.p, d + 1) >= t)
        .ok_or_else(|| Error::Precision("no determinant degree reaches the target".into()))
}

/// Smallest total-family weight cap whose discarded rows sit at `>= target`.
pub fn total_weight_for(family: &LaurentFamily, target: u32) -> Result<Q> {
    let geom_f = family.geometry_f()?;
    let geom_g = family.geometry_gamma(&geom_f)?;
    let p = family.p;
    let step = Q::new(1, num_integer::lcm(geom_f.d, geom_g.d));
    let scale = ord_pitilde(p) * Q::from_integer(p as i64 - 1);
    let mut w = Q::from_integer(0);
    while scale * (w + step) < Q::from_integer(target as i64) {
        w += step;
    }
    Ok(w)
}

/// Run every route for `κ`; `κ = 1` adds the total-family Fredholm determinant.
pub fn verify_main_theorem(family: &LaurentFamily, t_bar: &[u32], kappa: &KappaExponent, cfg: &VerifyConfig) -> Result<MainTheoremReport> {
    let mut out = verify_main_theorem_all(family, t_bar, std::slice::from_ref(kappa), cfg)?;
    Ok(out.remove(0))
}

/// [`verify_main_theorem`] for several exponents, sharing the fiber data and `𝔉`.
pub fn verify_main_theorem_all(
    family: &LaurentFamily,
    t_bar: &[u32],
    kappas: &[KappaExponent],
    cfg: &VerifyConfig,
) -> Result<Vec<MainTheoremReport>> {
    let ring = PadicRing::new(family.p, family.a, family.p as usize - 1, cfg.prec)?;
    for kappa in kappas {
        kappa.check_precision(&ring)?;
    }
    let ctx = FiberContext::new(family, t_bar, &ring, cfg.exec)?;

    let d_a = cfg.fiber_degree.unwrap_or_else(|| unit_l_degree(&ctx, cfg.target));
    let roots = fiber_unit_roots_to(&ctx, d_a, cfg.target)?;
    let d_b = match cfg.euler_degree {
        Some(d) => d,
        None => euler_degree_for(family, cfg.target)?,
    };
    let spectra = euler_spectra(&ctx, d_b, cfg.target, SpectraSource::Dual)?;
    let w = match cfg.total_weight {
        Some(w) => w,
        None => total_weight_for(family, cfg.target)?,
    };
    let (f, it, _) = f_ratio_dual(family, t_bar, &ring, w, cfg.exec)?;

    let mut reports = Vec::with_capacity(kappas.len());
    for kappa in kappas {
        let mut routes = Vec::new();
        let rep = assemble_unit_l(&ring, &roots, kappa, d_a)?;
        let (root, prec) = series_unit_root(&rep, &ring, Some(unit_l_gap(&ctx)))?;
        if !is_one_unit(&ring, &root) {
            return Err(Error::UnitRoot("unit root is not a 1-unit".into()));
        }
        routes.push(Route { name: "unit_l", value: root, certified: prec, degree: d_a });

        let det = euler_det_from_spectra(&ctx, &spectra, kappa, d_b)?;
        let (root, prec) = det.unit_root(&ring)?;
        routes.push(Route { name: "beta_det", value: root, certified: prec, degree: d_b });

        let value = ring.one_unit_power(&f.value, kappa)?;
        routes.push(Route { name: "f_ratio", value, certified: f.precision, degree: it.iterations });

        if kappa.value() == 1u32.into() {
            let m = total_family_matrix(family, t_bar, &ring, w, cfg.exec)?;
            let (root, prec, _) = fredholm_unit_root(&m, cfg.total_degree, cfg.exec)?;
            routes.push(Route { name: "total_det", value: root, certified: prec, degree: cfg.total_degree });
        }

        let joint = routes.iter().map(|r| r.certified).min().unwrap_or(0);
        let mut agreement = Vec::new();
        for i in 0..routes.len() {
            for j in i + 1..routes.len() {
                agreement.push((i, j, agreement_digits(&ring, &routes[i].value, &routes[j].value)));
            }
        }
        let report = MainTheoremReport { kappa: kappa.clone(), ring: ring.clone(), routes, joint, agreement };
        if !report.passed() {
            let diff: Vec<String> = report
                .routes
                .iter()
                .map(|r| format!("{} = {:?} ({} digits)", r.name, ring.canonical_digits(&r.value), r.certified))
                .collect();
            return Err(Error::CheckFailed(format!("unit-root routes disagree: {}", diff.join("; "))));
        }
        reports.push(report);
    }
    Ok(reports)
}
