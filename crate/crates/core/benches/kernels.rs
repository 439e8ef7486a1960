//! Sequential against rayon-parallel execution of the main kernels.
//!
//! `cargo bench -p unitroot-core --bench kernels`

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use unitroot_core::charsum::exp_sum;
use unitroot_core::dwork::{default_cap, fredholm, total_family_matrix, FiberOperator};
use unitroot_core::family::LaurentFamily;
use unitroot_core::ffield::ClosedPoint;
use unitroot_core::formula::total_weight_for;
use unitroot_core::geometry::Q;
use unitroot_core::padic::{KappaExponent, PadicRing};
use unitroot_core::par::Exec;
use unitroot_core::sympow::alpha::operator_matrix;
use unitroot_core::sympow::{sym_family, Side, SymPower, SymSpace, SymTruncation};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn kernels(c: &mut Criterion) {
    let fam = LaurentFamily::reference();
    let ring = PadicRing::new(3, 1, 2, 8).unwrap();
    let t_bar = [1, 1];

    let mut g = c.benchmark_group("exp_sum_m9");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| exp_sum(&fam, &t_bar, &[1], 1, 9, exec).unwrap()));
    }
    g.finish();

    let mut op = FiberOperator::new(&fam, &t_bar, 8).unwrap();
    let pt = ClosedPoint { degree: 1, orbit_rep: vec![1] };
    op.prepare(1).unwrap();
    let mut g = c.benchmark_group("fiber_det");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let a = op.fiber_matrix(&pt, default_cap(3, 8), exec).unwrap();
                fredholm(&a, 6, exec).unwrap()
            })
        });
    }
    g.finish();

    let w = total_weight_for(&fam, 3).unwrap();
    let mut g = c.benchmark_group("total_family_det");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fredholm(&total_family_matrix(&fam, &t_bar, &ring, w, exec).unwrap(), 10, exec).unwrap())
        });
    }
    g.finish();

    let tr = SymTruncation::new(4, Q::from_integer(5), Q::from_integer(0), 4).unwrap();
    let space = Arc::new(SymSpace::new(&fam, tr).unwrap());
    let kappa = KappaExponent::all_ones(3, KappaExponent::required_m(3, 8, 2));
    let mut g = c.benchmark_group("beta_det");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let f = sym_family(space.clone(), &t_bar, &ring, SymPower::Kappa(kappa.clone()), Side::Primal, exec).unwrap();
                fredholm(&operator_matrix(&f, exec).unwrap(), 4, exec).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
