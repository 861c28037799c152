//! Hot paths: the closed-form solver with its certificate, lower bounds,
//! grid construction and rounding, the exhaustive searches, one simulator
//! run, and a full sweep row.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use multittm::{
    exhaustive_best_grid, exhaustive_best_ttm_seq_grid, multi_ttm_lb, round_grid_pow2,
    seeded_data, select_grid_real, simulate_alg, solve, sweep_row, verify_kkt,
    CappedMinSumProblem, Curves, MultiTtmShape, ProcGrid, SweepOptions,
};

fn solver(c: &mut Criterion) {
    let caps: Vec<f64> = (0..6).map(|i| 2f64.powi(3 * i + 4)).collect();
    let problem = CappedMinSumProblem::new(caps, (1u64 << 17) as f64).unwrap();
    c.bench_function("solve_and_certify_d6", |b| {
        b.iter(|| {
            let sol = solve(black_box(&problem));
            verify_kkt(&problem, &sol).unwrap()
        })
    });
}

fn lower_bound(c: &mut Criterion) {
    let shape = MultiTtmShape::new(
        vec![1 << 12, 1 << 13, 1 << 19],
        vec![1 << 8, 1 << 13, 1 << 11],
    )
    .unwrap();
    c.bench_function("multi_ttm_lb", |b| {
        b.iter(|| multi_ttm_lb(black_box(&shape), 1 << 13).unwrap())
    });
}

fn grid_construction(c: &mut Criterion) {
    let shape = MultiTtmShape::cubical(3, 1 << 20, 1 << 8).unwrap();
    c.bench_function("select_and_round_grid", |b| {
        b.iter(|| {
            let choice = select_grid_real(black_box(&shape), 1 << 21).unwrap();
            round_grid_pow2(&choice, &shape, 1 << 21).unwrap()
        })
    });
}

fn exhaustive_searches(c: &mut Criterion) {
    let shape = MultiTtmShape::cubical(3, 1 << 13, 1 << 6).unwrap();
    c.bench_function("exhaustive_best_grid_p12", |b| {
        b.iter(|| exhaustive_best_grid(black_box(&shape), 1 << 12).unwrap())
    });
    c.bench_function("exhaustive_ttm_seq_grid_p12", |b| {
        b.iter(|| exhaustive_best_ttm_seq_grid(black_box(&shape), 1 << 12, None).unwrap())
    });
}

fn simulator(c: &mut Criterion) {
    let shape = MultiTtmShape::cubical(3, 8, 4).unwrap();
    let grid = ProcGrid {
        p: vec![2, 2, 2],
        q: vec![2, 1, 1],
    };
    let (x, mats) = seeded_data(&shape, 42);
    c.bench_function("simulate_8x8x8_on_16_ranks", |b| {
        b.iter(|| simulate_alg(black_box(&shape), &grid, &x, &mats).unwrap())
    });
}

fn full_row(c: &mut Criterion) {
    let shape = MultiTtmShape::cubical(3, 1 << 12, 1 << 4).unwrap();
    let opts = SweepOptions {
        curves: Curves::all(),
        validate: true,
    };
    c.bench_function("sweep_row_all_curves", |b| {
        b.iter(|| sweep_row(black_box(&shape), 1 << 6, &opts).unwrap())
    });
}

criterion_group!(
    benches,
    solver,
    lower_bound,
    grid_construction,
    exhaustive_searches,
    simulator,
    full_row
);
criterion_main!(benches);
