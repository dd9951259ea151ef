use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ripot::grid::{make_divfree_family, make_field, FamilyConfig, FieldDescriptor};
use ripot::interpolation::{holmstedt, k_functional_bruteforce, Couple, KQuery};
use ripot::operators::{hardy, project, riesz, RieszKernelSpec};
use ripot::rearrange::{decreasing_rearrangement, Profile};
use ripot::spaces::{norm_fn, SpaceSpec};
use ripot::young::{sobolev_conjugate, TableOptions, YoungFunction};

fn grids(c: &mut Criterion) {
    let f = make_field(&FieldDescriptor::RandomCells { seed: 1, components: 2 }, 2, 256, 1.0).unwrap();
    c.bench_function("rearrange 256^2", |b| b.iter(|| decreasing_rearrangement(black_box(&f))));
    let m = make_field(&FieldDescriptor::RandomModes { seed: 1, modes: 8, components: 2 }, 2, 128, 1.0).unwrap();
    c.bench_function("project 128^2", |b| b.iter(|| project(black_box(&m)).unwrap()));
    let spec = RieszKernelSpec::new(1.0);
    for side in [64, 128, 256] {
        let g = make_divfree_family(&[1.0], &FamilyConfig::new(2, side)).unwrap().remove(0);
        c.bench_function(&format!("riesz spectral {side}^2"), |b| b.iter(|| riesz(black_box(&g), &spec).unwrap()));
    }
}

fn profiles(c: &mut Criterion) {
    let values: Vec<f64> = (0..64).map(|k| 64.0 - k as f64).collect();
    let widths = vec![0.25; 64];
    let f = Profile::from_widths(&values, &widths, f64::INFINITY).unwrap();
    let y = SpaceSpec::lorentz_star(2.0, 1.0);
    c.bench_function("L^(2,1) norm of hardy, 64 steps", |b| b.iter(|| norm_fn(&y, &hardy(black_box(&f), 2, 1.0).unwrap()).unwrap()));
    c.bench_function("holmstedt (2,1)", |b| b.iter(|| holmstedt(black_box(&f), 2.0, 1.0, 3.0).unwrap()));
    let q = KQuery::new(Couple::L1Lorentz { p: 2.0, q: 1.0 }, 3.0).unwrap();
    c.bench_function("brute-force K (2,1)", |b| b.iter(|| k_functional_bruteforce(black_box(&f), &q).unwrap()));
}

fn young(c: &mut Criterion) {
    let a = YoungFunction::power_log(1.5, 1.0, 3.0);
    let opts = TableOptions::default();
    c.bench_function("sobolev conjugate table", |b| b.iter(|| sobolev_conjugate(black_box(&a), 2, 1.0, &opts).unwrap()));
}

criterion_group!(benches, grids, profiles, young);
criterion_main!(benches);
