use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use giant_atoms::evolve::Propagator;
use giant_atoms::resolvent::{
    branch_cut_contribution, find_real_poles, find_unstable_poles, self_energy_two, CutOptions, PoleSearch,
};
use giant_atoms::{BathParams, Channel, Complex64, ComplexEnergy, Layout, SingleExcitationState, Splitting};
use std::hint::black_box;

fn split_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("split_step");
    for n in [256usize, 1024, 4096] {
        let layout = Layout::braided(0.0, 0.2, 5).unwrap().centered_in(n).unwrap();
        let bath = BathParams::unit(n).unwrap();
        for splitting in [Splitting::Lie, Splitting::Strang] {
            let mut prop = Propagator::new(&bath, &layout, 0.05, splitting).unwrap();
            let mut state = SingleExcitationState::atom_excited(2, n, 0).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("{splitting:?}"), n), &n, |b, _| {
                b.iter(|| prop.step(black_box(&mut state)).unwrap())
            });
        }
    }
    group.finish();
}

fn pole_search(c: &mut Criterion) {
    let search = PoleSearch::default();
    let mut group = c.benchmark_group("pole_search");
    for d in [1usize, 5, 10] {
        let layout = Layout::braided(0.3, 0.2, d).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| {
                let real = find_real_poles(&layout, Channel::Plus, &search).unwrap();
                let unstable = find_unstable_poles(&layout, Channel::Plus, &search).unwrap();
                black_box((real, unstable))
            })
        });
    }
    group.finish();
}

fn self_energy(c: &mut Criterion) {
    let layout = Layout::braided(0.0, 0.2, 3).unwrap();
    let z = ComplexEnergy::physical(Complex64::new(0.7, 0.05));
    c.bench_function("self_energy_two", |b| {
        b.iter(|| self_energy_two(black_box(z), &layout).unwrap())
    });
}

fn cut_integral(c: &mut Criterion) {
    let layout = Layout::giant(0.5, 0.2, 2, 2).unwrap();
    let cut = CutOptions::default();
    let mut group = c.benchmark_group("cut_integral");
    for t in [1.0f64, 10.0, 50.0] {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| branch_cut_contribution(black_box(t), Channel::E, &layout, &cut).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, split_step, pole_search, self_energy, cut_integral);
criterion_main!(benches);
