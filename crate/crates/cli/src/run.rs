//! Command dispatch.

use std::sync::Arc;

use unitroot_core::charsum::{
    exp_sum, exp_sum_total, fiber_unit_root_to, l_series, rational_recover, signed_power, unit_l_degree, unit_l_root,
    FiberContext,
};
use unitroot_core::dwork::{
    check_fiber_l, fredholm, fredholm_unit_root, total_family_matrix, total_trace_check, trace_formula_check,
    working_precision, FiberOperator, FredholmSeries,
};
use unitroot_core::ffield::{closed_points, ClosedPoint, FqField};
use unitroot_core::formula::{
    eigen_residual, exp_pi_h, f_ratio_dual, f_ratio_truncated, lambda_point, total_weight_for, verify_main_theorem,
    ExpCaps, VerifyConfig,
};
use unitroot_core::geometry::{enumerate_monoid, LatticePoint, Q, WeightedGeometry};
use unitroot_core::padic::{KappaExponent, PadicRing};
use unitroot_core::par::Exec;
use unitroot_core::pseries::{agreement_digits, is_one_unit, slope_zero_length};
use unitroot_core::sympow::checks::{
    block_scale, finite_sym_approx, normalization_check, pairing_weights, sym_pairing_identity,
};
use unitroot_core::sympow::euler::{beta_det_euler, SpectraSource};
use unitroot_core::sympow::alpha::operator_matrix;
use unitroot_core::sympow::{sym_family, Side, SymPower, SymSpace, SymTruncation};
use unitroot_core::{Error, Result};

use crate::config::{emit_config, Command, InstanceConfig, GUARD_DIGITS};
use crate::report::{format_point, format_poly, RunReport};

/// Runs `cfg.command`; hard-check failures are recorded in the report, module
/// errors are returned.
pub fn run(cfg: &InstanceConfig, exec: Exec) -> Result<RunReport> {
    let mut rep = RunReport::default();
    for line in emit_config(cfg).lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            rep.push("input", k, v);
        }
    }
    let r = Runner { cfg, exec };
    let name = cfg.command.name();
    rep.timed(name, |rep| match cfg.command {
        Command::Weights => r.weights(rep),
        Command::Expsum => r.expsum(rep),
        Command::Lfunction => r.lfunction(rep),
        Command::Dworkdet => r.dworkdet(rep),
        Command::Sympow => r.sympow(rep),
        Command::Unitroot => r.unitroot(rep),
        Command::Verify => r.verify(rep),
    })?;
    rep.push("status", "result", if rep.passed() { "pass" } else { "fail" });
    Ok(rep)
}

struct Runner<'a> {
    cfg: &'a InstanceConfig,
    exec: Exec,
}

fn point_key(pt: &ClosedPoint) -> String {
    let c: Vec<String> = pt.orbit_rep.iter().map(|x| x.to_string()).collect();
    format!("[{}]", c.join(","))
}

fn weight_table(rep: &mut RunReport, section: &str, geom: &WeightedGeometry, cap: Q) {
    rep.push(section, "D", geom.d);
    for (u, w) in &enumerate_monoid(geom, cap).points {
        rep.push(section, format!("w[{}]", format_point(&u.0)), w);
    }
}

fn fredholm_records(rep: &mut RunReport, section: &str, ring: &PadicRing, det: &FredholmSeries) {
    for (j, (c, cert)) in det.coeffs.iter().zip(&det.certified).enumerate() {
        rep.padic(section, format!("det[{j}]"), ring, c, *cert);
    }
}

impl Runner<'_> {
    fn family(&self) -> unitroot_core::family::LaurentFamily {
        self.cfg.family()
    }

    fn kappa(&self) -> Result<KappaExponent> {
        self.cfg.kappa_exponent()
    }

    /// Ring shared by the certified routes: target plus guard digits.
    fn verify_ring(&self) -> Result<PadicRing> {
        PadicRing::new(self.cfg.p, self.cfg.a, self.cfg.p as usize - 1, self.cfg.target() + GUARD_DIGITS)
    }

    fn base_points(&self) -> Result<Vec<ClosedPoint>> {
        let field = FqField::new(self.cfg.p, self.cfg.a)?;
        closed_points(&field, self.cfg.s, 1)
    }

    fn weights(&self, rep: &mut RunReport) -> Result<()> {
        let fam = self.family();
        let gf = fam.geometry_f()?;
        weight_table(rep, "weights.f", &gf, self.cfg.caps.w_sym);
        let hodge: Vec<String> = gf.hodge_numbers().iter().map(|h| h.to_string()).collect();
        rep.push("weights.f", "hodge", hodge.join(","));
        rep.push("weights.f", "volume", gf.normalized_volume());
        if self.cfg.s > 0 {
            let gg = fam.geometry_gamma(&gf)?;
            weight_table(rep, "weights.gamma", &gg, self.cfg.caps.w_sym);
        }
        Ok(())
    }

    fn expsum(&self, rep: &mut RunReport) -> Result<()> {
        let fam = self.family();
        for pt in self.base_points()? {
            for m in 1..=self.cfg.caps.d_t {
                let s = exp_sum(&fam, &self.cfg.t_bar, &pt.orbit_rep, 1, m, self.exec)?;
                rep.push("expsum", format!("S{m}{}", point_key(&pt)), s);
            }
        }
        let total = exp_sum_total(&fam, &self.cfg.t_bar, 1, self.exec)?;
        rep.push("expsum", "total.S1", total);
        Ok(())
    }

    fn lfunction(&self, rep: &mut RunReport) -> Result<()> {
        let fam = self.family();
        let ring = self.verify_ring()?;
        let target = self.cfg.target();
        let ctx = FiberContext::new(&fam, &self.cfg.t_bar, &ring, self.exec)?;
        let deg = ctx.l_degree();
        for pt in self.base_points()? {
            let key = point_key(&pt);
            let sums = (1..=2 * deg + 1)
                .map(|m| exp_sum(&fam, &self.cfg.t_bar, &pt.orbit_rep, 1, m, self.exec))
                .collect::<Result<Vec<_>>>()?;
            let series = signed_power(&l_series(fam.p, &sums, 2 * deg + 1)?, fam.n)?;
            let rec = rational_recover(&series, deg)?;
            let (num, den) = rec.recovered.clone().expect("recovered");
            rep.push("lfunction", format!("fiber{key}.numerator"), format_poly(&num));
            rep.push("lfunction", format!("fiber{key}.denominator"), format_poly(&den));
            let (root, prec) = fiber_unit_root_to(&ctx, &pt, target)?;
            rep.padic("lfunction", format!("fiber{key}.unit_root"), &ring, &root, prec);
            rep.check("lfunction", format!("fiber{key}.one_unit"), is_one_unit(&ring, &root));
        }
        let kappa = self.kappa()?;
        let d = self.cfg.caps.max_fiber_degree.unwrap_or_else(|| unit_l_degree(&ctx, target));
        let (root, prec, l) = unit_l_root(&ctx, &kappa, d, target)?;
        rep.push("lfunction", "unit.fiber_degree", d);
        for (j, c) in l.padic_coeffs()?.iter().enumerate() {
            rep.padic("lfunction", format!("unit.coeff[{j}]"), &ring, c, l.precision);
        }
        rep.padic("lfunction", "unit.root", &ring, &root, prec);
        rep.check("lfunction", "unit.certified", prec >= target);
        Ok(())
    }

    fn dworkdet(&self, rep: &mut RunReport) -> Result<()> {
        let fam = self.family();
        let caps = &self.cfg.caps;
        let prec = working_precision(fam.p, self.cfg.precision, caps.d_t);
        let mut op = FiberOperator::new(&fam, &self.cfg.t_bar, prec)?;
        let base = PadicRing::new(fam.p, fam.a, fam.p as usize - 1, prec)?;
        let ctx = FiberContext::new(&fam, &self.cfg.t_bar, &base, self.exec)?;
        for pt in self.base_points()? {
            let key = point_key(&pt);
            for m in 1..=caps.d_t.min(3) {
                let tc = trace_formula_check(&mut op, &pt, m, caps.w_x, self.exec)?;
                rep.push("dworkdet", format!("fiber{key}.trace[{m}]"), format!("{} of {} digits", tc.agreement, tc.certified));
                rep.check("dworkdet", format!("fiber{key}.trace[{m}].check"), tc.passed());
            }
            let alpha = op.fiber_matrix(&pt, caps.w_x, self.exec)?;
            let det = fredholm(&alpha, caps.d_t, self.exec)?;
            fredholm_records(rep, &format!("dworkdet.fiber{key}"), &alpha.ring, &det);
            let (_, agree) = check_fiber_l(&mut op, &ctx, &pt, caps.d_t, caps.w_x, self.exec)?;
            rep.push("dworkdet", format!("fiber{key}.l_agreement"), agree);
        }
        let ring = self.verify_ring()?;
        let w = total_weight_for(&fam, self.cfg.target())?;
        let mat = total_family_matrix(&fam, &self.cfg.t_bar, &ring, w, self.exec)?;
        for m in 1..=2 {
            let tc = total_trace_check(&fam, &self.cfg.t_bar, &mat, m, self.exec)?;
            rep.check("dworkdet", format!("total.trace[{m}]"), tc.passed());
        }
        rep.push("dworkdet", "total.weight", w);
        rep.push("dworkdet", "total.dim", mat.dim);
        let (root, rp, det) = fredholm_unit_root(&mat, 10.min(mat.dim), self.exec)?;
        fredholm_records(rep, "dworkdet.total", &ring, &det);
        rep.padic("dworkdet", "total.unit_root", &ring, &root, rp);
        Ok(())
    }

    fn sym_space(&self) -> Result<Arc<SymSpace>> {
        let c = &self.cfg.caps;
        let tr = SymTruncation::new(c.l_max, c.w_sym, c.w_gamma, c.d_t)?;
        Ok(Arc::new(SymSpace::new(&self.family(), tr)?))
    }

    fn sympow(&self, rep: &mut RunReport) -> Result<()> {
        let fam = self.family();
        let ring = self.verify_ring()?;
        let kappa = self.kappa()?;
        let target = self.cfg.target();
        let t_bar = &self.cfg.t_bar;
        let space = self.sym_space()?;
        let c = block_scale(&space);
        for (name, side) in [("beta", Side::Primal), ("dual", Side::Dual)] {
            let fam_k = sym_family(space.clone(), t_bar, &ring, SymPower::Kappa(kappa.clone()), side, self.exec)?;
            let m = operator_matrix(&fam_k, self.exec)?;
            let norm = normalization_check(&m, c, self.cfg.caps.d_t, self.exec)?;
            rep.push("sympow", format!("{name}.dim"), m.dim);
            rep.check("sympow", format!("{name}.normalized"), norm.passed());
            fredholm_records(rep, &format!("sympow.{name}"), &ring, &norm.det);
            rep.check("sympow", format!("{name}.single_unit_slope"), slope_zero_length(&ring, &norm.det.coeffs) == 1);
        }
        for k in 1..=2u64 {
            let b = operator_matrix(&sym_family(space.clone(), t_bar, &ring, SymPower::Finite(k), Side::Primal, self.exec)?, self.exec)?;
            let d = operator_matrix(&sym_family(space.clone(), t_bar, &ring, SymPower::Finite(k), Side::Dual, self.exec)?, self.exec)?;
            rep.check("sympow", format!("pairing[{k}]"), sym_pairing_identity(&b, &d, &pairing_weights(&space, k)));
        }
        let mut ks: Vec<u64> = Vec::new();
        let mut acc = 0u64;
        let mut pj = 1u64;
        for &dgt in kappa.digits.iter().take(3) {
            acc += dgt * pj;
            pj *= fam.p;
            if acc > 0 && !ks.contains(&acc) {
                ks.push(acc);
            }
        }
        let fs = finite_sym_approx(space.clone(), t_bar, &ring, &kappa, &ks, self.exec)?;
        for st in &fs.steps {
            rep.push("sympow", format!("finite[{}].distance", st.k), st.distance);
            rep.push("sympow", format!("finite[{}].bound", st.k), st.bound);
        }
        rep.check("sympow", "finite.converging", fs.passed());

        let ctx = FiberContext::new(&fam, t_bar, &ring, self.exec)?;
        let d_t = self.cfg.caps.d_t;
        let sums = beta_det_euler(&ctx, &kappa, d_t, target, SpectraSource::Sums)?;
        let dual = beta_det_euler(&ctx, &kappa, d_t, target, SpectraSource::Dual)?;
        let joint = sums.precision.min(dual.precision);
        let mut agree = ring.prec;
        for (j, (x, y)) in sums.det.iter().zip(&dual.det).enumerate() {
            rep.padic("sympow", format!("euler.det[{j}]"), &ring, x, sums.precision);
            agree = agree.min(agreement_digits(&ring, x, y));
        }
        rep.push("sympow", "euler.certified", joint);
        rep.check("sympow", "euler.duality", agree >= joint);
        let (root, rp) = sums.unit_root(&ring)?;
        rep.padic("sympow", "euler.unit_root", &ring, &root, rp);
        Ok(())
    }

    fn unitroot(&self, rep: &mut RunReport) -> Result<()> {
        let fam = self.family();
        let ring = self.verify_ring()?;
        let kappa = self.kappa()?;
        let target = self.cfg.target();
        let t_bar = &self.cfg.t_bar;
        // one digit beyond the target for η, so the residual is not masked by it
        let w = total_weight_for(&fam, target + 1)?;
        let (f, it, index) = f_ratio_dual(&fam, t_bar, &ring, w, self.exec)?;
        rep.push("unitroot", "total_weight", w);
        rep.padic("unitroot", "f_ratio", &ring, &f.value, f.precision);
        rep.check("unitroot", "f_ratio.certified", f.precision >= target);
        let caps = ExpCaps { w_gamma: self.cfg.caps.w_gamma, w_x: self.cfg.caps.w_sym, d_lambda: self.cfg.caps.d_lambda };
        let series = exp_pi_h(&fam, &ring, caps, self.exec)?;
        let point = lambda_point(&fam, t_bar, &ring)?;
        match f_ratio_truncated(&series, &point, fam.a) {
            Ok(tr) => {
                let agree = agreement_digits(&ring, &tr.value, &f.value);
                rep.push("unitroot", "truncated_ratio.agreement", agree);
                rep.check("unitroot", "truncated_ratio.consistent", agree >= tr.precision.min(f.precision));
            }
            Err(Error::Precision(msg)) => rep.push("unitroot", "truncated_ratio", format!("skipped: {msg}")),
            Err(e) => return Err(e),
        }
        let f_kappa = ring.one_unit_power(&f.value, &kappa)?;
        rep.padic("unitroot", "f_kappa", &ring, &f_kappa, f.precision);
        let s = fam.s;
        let eta: Vec<_> = index
            .iter()
            .zip(&it.vector)
            .map(|(e, v)| (LatticePoint(e[..s].to_vec()), LatticePoint(e[s..].to_vec()), v.clone()))
            .collect();
        rep.check("unitroot", "eta.constant_one", eta[0].0.is_zero() && eta[0].1.is_zero() && eta[0].2 == ring.one());
        let er = eigen_residual(self.sym_space()?, t_bar, &ring, &kappa, &eta, &f.value, self.exec)?;
        rep.push("unitroot", "eigen.dim", er.dim);
        rep.push("unitroot", "eigen.residual", er.residual);
        rep.push("unitroot", "eigen.dropped", er.dropped);
        let digits = er.digits(ring.prec).min(it.certified);
        rep.push("unitroot", "eigen.digits", digits);
        rep.check("unitroot", "eigen.certified", digits >= target);
        Ok(())
    }

    fn verify(&self, rep: &mut RunReport) -> Result<()> {
        let fam = self.family();
        let kappa = self.kappa()?;
        let target = self.cfg.target();
        let mut vc = VerifyConfig::new(target);
        vc.prec = target + GUARD_DIGITS;
        vc.fiber_degree = self.cfg.caps.max_fiber_degree;
        vc.exec = self.exec;
        let out = match verify_main_theorem(&fam, &self.cfg.t_bar, &kappa, &vc) {
            Ok(out) => out,
            Err(Error::CheckFailed(msg)) => {
                rep.push("verify", "error", msg);
                rep.check("verify", "agreement", false);
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let ring = &out.ring;
        for r in &out.routes {
            rep.padic("verify", format!("{}.value", r.name), ring, &r.value, r.certified);
            rep.push("verify", format!("{}.degree", r.name), r.degree);
        }
        for &(i, j, d) in &out.agreement {
            rep.push("verify", format!("agree[{},{}]", out.routes[i].name, out.routes[j].name), d);
        }
        rep.push("verify", "joint", out.joint);
        rep.check("verify", "agreement", out.passed());
        rep.check("verify", "certified", out.joint >= target);
        Ok(())
    }
}
