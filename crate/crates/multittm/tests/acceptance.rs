//! Acceptance suite: every headline number of the simulated evaluation at
//! its stated tolerance, plus the randomized optimality, certificate, and
//! simulator-exactness suites. One pass/fail line prints per criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multittm::{
    alg_comm_words_exact, canonicalize, comp_overhead, exhaustive_best_grid, multi_ttm_lb,
    oracle_atomic, run_figure, seeded_data, select_grid_real, simulate_alg, solve, verify_kkt,
    CappedMinSumProblem, FigureId, FigureSummary, MultiTtmShape, ProcGrid, SweepRow,
};

fn within_pp(value: f64, expected: f64, pp: f64) -> bool {
    (value - expected).abs() <= pp
}

fn within_rel(value: f64, expected: f64, rel: f64) -> bool {
    (value - expected).abs() <= rel * expected
}

fn ratios(rows: &[SweepRow]) -> Vec<(u128, f64)> {
    rows.iter()
        .map(|r| (r.p, r.ttmseq.unwrap() / r.alg_best.unwrap()))
        .collect()
}

#[test]
fn criterion_1_lower_bound_gaps() {
    let res = run_figure(FigureId::F4a).unwrap();
    let FigureSummary::Gap { max_gap_pct, at_p } = res.summary else {
        panic!("wrong summary kind")
    };
    assert!(
        within_pp(max_gap_pct, 9.0, 1.0),
        "fig 4a max gap {max_gap_pct}% not 9% +/- 1pp"
    );
    assert_eq!(at_p, 1 << 13, "fig 4a max gap not at P=2^13");

    for id in [FigureId::F4b, FigureId::F4c] {
        let res = run_figure(id).unwrap();
        let FigureSummary::Gap { max_gap_pct, at_p } = res.summary else {
            panic!("wrong summary kind")
        };
        assert!(
            within_pp(max_gap_pct, 13.0, 1.0),
            "fig {id} max gap {max_gap_pct}% not 13% +/- 1pp"
        );
        assert_eq!(at_p, 2, "fig {id} max gap not at P=2");
    }
    println!("[PASS] criterion 1: best-grid vs lower-bound gaps 9%@2^13 (4a), 13%@2 (4b,4c)");
}

#[test]
fn criterion_2_sequence_speedups() {
    // (a) n_i=2^12, r_i=2^4: never worse through p_max = 2^12, ~5x at the end.
    let res = run_figure(FigureId::F5a).unwrap();
    let rr = ratios(&res.rows);
    for &(p, ratio) in &rr {
        assert!(ratio >= 1.0 - 1e-12, "5a: worse than sequence at P={p}");
        if p >= 4 {
            assert!(ratio > 1.0, "5a: not strictly better at P={p}");
        }
    }
    let FigureSummary::Speedup { max_ratio, at_p, .. } = res.summary else {
        panic!("wrong summary kind")
    };
    assert!(
        within_rel(max_ratio, 5.0, 0.10),
        "5a max ratio {max_ratio} not 5x +/- 10%"
    );
    assert_eq!(at_p, 1 << 12);

    // (b) n_i=2^13, r_i=2^6: better through 2^16, worse after, ~2x peak.
    let res = run_figure(FigureId::F5b).unwrap();
    for &(p, ratio) in &ratios(&res.rows) {
        if p <= 1 << 16 {
            assert!(ratio >= 1.0 - 1e-12, "5b: worse at P={p}");
            if p >= 4 {
                assert!(ratio > 1.0, "5b: not strictly better at P={p}");
            }
        } else {
            assert!(ratio < 1.0, "5b: sequence not better at P={p}");
        }
    }
    let FigureSummary::Speedup { max_ratio, .. } = res.summary else {
        panic!("wrong summary kind")
    };
    assert!(
        within_rel(max_ratio, 2.0, 0.10),
        "5b max ratio {max_ratio} not 2x +/- 10%"
    );

    // (c) n_i=2^20, r_i=2^8: ~12x at P=2^21.
    let res = run_figure(FigureId::F5c).unwrap();
    let FigureSummary::Speedup { max_ratio, at_p, .. } = res.summary else {
        panic!("wrong summary kind")
    };
    assert!(
        within_rel(max_ratio, 12.0, 0.10),
        "5c max ratio {max_ratio} not 12x +/- 10%"
    );
    assert_eq!(at_p, 1 << 21);
    println!("[PASS] criterion 2: speedups 5x@2^12, 2x with 2^16 crossover, 12x@2^21 (ties only at P=2)");
}

#[test]
fn criterion_3_fixed_p_crossover() {
    let res = run_figure(FigureId::F6).unwrap();
    let n_is = res.n_i_per_row.clone().unwrap();
    for (row, &n_i) in res.rows.iter().zip(&n_is) {
        let ratio = row.ttmseq.unwrap() / row.alg_best.unwrap();
        if n_i < 1 << 12 {
            assert!(ratio < 1.0, "sequence not cheaper at n_i={n_i}");
        } else {
            assert!(ratio > 1.0, "grid algorithm not cheaper at n_i={n_i}");
        }
    }
    // The improvement factor settles near 6x as n_i grows.
    for (row, &n_i) in res.rows.iter().zip(&n_is) {
        if n_i >= 1 << 18 {
            let ratio = row.ttmseq.unwrap() / row.alg_best.unwrap();
            assert!(
                within_rel(ratio, 6.0, 0.10),
                "ratio {ratio} at n_i={n_i} not 6x +/- 10%"
            );
        }
    }
    println!("[PASS] criterion 3: crossover at n_i=2^12, ~6x maintained for large n_i");
}

#[test]
fn criterion_4_computation_overhead() {
    // Region-wide overhead ceilings for the three strong-scaling configs,
    // and the overhead at the point of largest communication reduction for
    // the first two (the third is covered by the companion test below).
    let limits = [(FigureId::F5a, 6.0), (FigureId::F5b, 30.0), (FigureId::F5c, 7.0)];
    let mut at_peak = Vec::new();
    for (id, region_limit) in limits {
        let res = run_figure(id).unwrap();
        let FigureSummary::Speedup {
            region_max_overhead_pct,
            overhead_at_max_ratio_pct,
            ..
        } = res.summary
        else {
            panic!("wrong summary kind")
        };
        assert!(
            region_max_overhead_pct <= region_limit + 1.0,
            "fig {id}: region overhead {region_max_overhead_pct}% above {region_limit}% +1pp"
        );
        at_peak.push(overhead_at_max_ratio_pct);
    }
    assert!(
        within_pp(at_peak[0], 6.0, 1.0),
        "5a overhead at peak reduction {}% not 6% +/- 1pp",
        at_peak[0]
    );
    assert!(
        within_pp(at_peak[1], 2.0, 1.0),
        "5b overhead at peak reduction {}% not 2% +/- 1pp",
        at_peak[1]
    );

    // Fixed-P experiment: ~13% at n_i = 2^13.
    let res = run_figure(FigureId::F6).unwrap();
    let FigureSummary::Crossover {
        overhead_at_n_i_8192_pct,
        ..
    } = res.summary
    else {
        panic!("wrong summary kind")
    };
    assert!(
        within_pp(overhead_at_n_i_8192_pct, 13.0, 1.0),
        "fig 6 overhead {overhead_at_n_i_8192_pct}% at n_i=2^13 not 13% +/- 1pp"
    );

    // Higher-order configs: under half a percent everywhere.
    for id in [FigureId::F8a, FigureId::F8b, FigureId::F8c] {
        let res = run_figure(id).unwrap();
        let FigureSummary::Overhead { max_overhead_pct } = res.summary else {
            panic!("wrong summary kind")
        };
        assert!(
            max_overhead_pct < 0.5,
            "fig {id} overhead {max_overhead_pct}% not under 0.5%"
        );
    }

    // Cubical shapes at P = n/r: the extra computation is at most (d-1)
    // times the sequence computation — the d local terms each approach
    // r^((d+1)/d) there, so the ratio tends to d from below (2x extra for
    // three modes).
    for (d, n_e, r_e) in [(3usize, 6u32, 4u32), (3, 8, 6), (4, 6, 4)] {
        let shape = MultiTtmShape::cubical(d, 1 << n_e, 1 << r_e).unwrap();
        let p = shape.n_total() / shape.r_total();
        assert!(p <= shape.p_max());
        let (grid, _) = exhaustive_best_grid(&shape, p).unwrap();
        let pct = comp_overhead(&shape, &grid, p).unwrap();
        let limit = 100.0 * (d as f64 - 1.0);
        assert!(
            pct <= limit + 1e-9,
            "extra computation {pct}% above {limit}% at P = n/r for d={d} 2^{n_e}/2^{r_e}"
        );
    }
    println!(
        "[PASS] criterion 4: overhead ceilings 6/30/7 pct, at peak reduction 6/2 pct, \
         fig6 13pct@2^13, fig8 <0.5pct, P=n/r within (d-1)x extra"
    );
}

/// The reference evaluation reports 7% extra computation at fig 5c's
/// greatest communication reduction (P = 2^21). That figure's own cost
/// formulas give 3.2% there: with the unique best grid (2^7,2^7,2^7) the
/// overhead is (2^42 + 2^37 - 2^35 - 2^23)/(2^47 + 2^35 + 2^23) = 3.1975%,
/// while 7% occurs only at the region end P = 2^24 (6.61%, checked above).
/// The stated value is kept here as stated and this check fails; see the
/// decisions ledger.
#[test]
fn criterion_4_fig5c_overhead_at_greatest_reduction() {
    let res = run_figure(FigureId::F5c).unwrap();
    let FigureSummary::Speedup {
        overhead_at_max_ratio_pct,
        at_p,
        ..
    } = res.summary
    else {
        panic!("wrong summary kind")
    };
    assert_eq!(at_p, 1 << 21);
    if !within_pp(overhead_at_max_ratio_pct, 7.0, 1.0) {
        println!(
            "[FAIL] criterion 4 (fig 5c at greatest reduction): measured {overhead_at_max_ratio_pct:.2}% at P=2^21, stated 7% +/- 1pp; \
             the stated value matches the region maximum (6.61% at P=2^24) instead"
        );
        panic!(
            "fig 5c overhead at greatest reduction is {overhead_at_max_ratio_pct:.4}%, not 7% +/- 1pp \
             (inconsistent reference value; see decisions ledger)"
        );
    }
    println!("[PASS] criterion 4 (fig 5c at greatest reduction)");
}

#[test]
fn criterion_5_fast_grid_and_sequence_bounds() {
    let cases = [
        (FigureId::F7a, 7.9, 1u128 << 5),
        (FigureId::F7b, 25.0, 1 << 6),
        (FigureId::F7c, 9.3, 1 << 21),
    ];
    for (id, gap, at) in cases {
        let res = run_figure(id).unwrap();
        let FigureSummary::FastBest {
            fast_equals_best,
            ttmseq_max_gap_pct,
            at_p,
            min_first_ttm_share,
        } = res.summary
        else {
            panic!("wrong summary kind")
        };
        assert!(fast_equals_best, "fig {id}: fast grid cost != best grid cost");
        assert!(
            within_pp(ttmseq_max_gap_pct, gap, 1.0),
            "fig {id}: sequence gap {ttmseq_max_gap_pct}% not {gap}% +/- 1pp"
        );
        assert_eq!(at_p, at, "fig {id}: gap not at P={at}");
        assert!(
            min_first_ttm_share >= 0.5 - 1e-9,
            "fig {id}: first product bound below half of the sequence bound"
        );
    }
    println!("[PASS] criterion 5: fast==best exactly; sequence gaps 7.9%@2^5, 25%@2^6, 9.3%@2^21; first product >= half");
}

#[test]
fn criterion_6_constructive_grid_three_times_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..1000 {
        let d = rng.gen_range(2..=6usize);
        let n: Vec<u64> = (0..d).map(|_| 1u64 << rng.gen_range(1..=12u32)).collect();
        let r: Vec<u64> = (0..d).map(|_| 1u64 << rng.gen_range(1..=12u32)).collect();
        let raw = MultiTtmShape::new(n, r).unwrap();
        let (shape, _) = canonicalize(&raw);
        let max_exp = shape.p_max().trailing_zeros();
        let p = 1u128 << rng.gen_range(1..=max_exp);
        let lb = multi_ttm_lb(&shape, p).unwrap().lb;
        let choice = select_grid_real(&shape, p).unwrap();
        for j in 0..d {
            assert!(
                choice.grid.p[j] >= 1.0 - 1e-9
                    && choice.grid.p[j] <= shape.n_dims()[j] as f64 * (1.0 + 1e-9),
                "trial {trial}: p[{j}] out of bounds for {shape} P={p}"
            );
            assert!(
                choice.grid.q[j] >= 1.0 - 1e-9
                    && choice.grid.q[j] <= shape.r_dims()[j] as f64 * (1.0 + 1e-9),
                "trial {trial}: q[{j}] out of bounds for {shape} P={p}"
            );
        }
        let cost = multittm::alg_comm_cost(&shape, &choice.grid).unwrap();
        assert!(
            cost.total_bandwidth <= 3.0 * lb + 1e-6 * lb + 1e-6,
            "trial {trial}: {shape} P={p}: cost {} above 3x bound {}",
            cost.total_bandwidth,
            3.0 * lb
        );
    }
    println!("[PASS] criterion 6: 1000 random shapes within 3x of the bound, grid dims in range");
}

#[test]
fn criterion_7_kkt_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..10_000 {
        let d = rng.gen_range(2..=6usize);
        let mut caps: Vec<f64> = (0..d)
            .map(|_| 10f64.powf(rng.gen_range(0.0..6.0)))
            .collect();
        caps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cap_prod: f64 = caps.iter().product();
        let divisor = cap_prod.powf(rng.gen_range(0.0..1.0)).max(1.0);
        let problem = CappedMinSumProblem::new(caps.clone(), divisor).unwrap();
        let sol = solve(&problem);
        verify_kkt(&problem, &sol)
            .unwrap_or_else(|e| panic!("trial {trial}: certificate rejected: {e}"));

        // The closed form must not exceed any sampled feasible point.
        let ln_budget = divisor.ln();
        for _ in 0..1_000 {
            let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(1e-9..1.0f64)).collect();
            let wsum: f64 = weights.iter().sum();
            let spend: f64 = rng.gen_range(0.0..1.0f64) * ln_budget;
            let value: f64 = caps
                .iter()
                .zip(&weights)
                .map(|(&k, &w)| k * (-spend * w / wsum).exp())
                .sum();
            assert!(
                sol.objective <= value * (1.0 + 1e-9),
                "trial {trial}: objective {} beaten by {value}",
                sol.objective
            );
        }
    }
    println!("[PASS] criterion 7: 10000 certificates valid; closed form below 10^3 sampled points each");
}

#[test]
fn criterion_8_simulator_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    while done < 50 {
        let d = rng.gen_range(3..=4usize);
        let n: Vec<u64> = (0..d).map(|_| 1u64 << rng.gen_range(1..=4u32)).collect();
        let r: Vec<u64> = n
            .iter()
            .map(|&ni| 1u64 << rng.gen_range(1..=ni.trailing_zeros()))
            .collect();
        let shape = MultiTtmShape::new(n, r).unwrap();
        let grid = ProcGrid {
            p: (0..d)
                .map(|i| 1u64 << rng.gen_range(0..=shape.n_dims()[i].trailing_zeros()))
                .collect(),
            q: (0..d)
                .map(|i| 1u64 << rng.gen_range(0..=shape.r_dims()[i].trailing_zeros()))
                .collect(),
        };
        let p_total = grid.total();
        if p_total > 64 || p_total > shape.p_max() {
            continue;
        }
        done += 1;
        let (x, mats) = seeded_data(&shape, 1000 + done);
        let res = simulate_alg(&shape, &grid, &x, &mats).unwrap();

        // (a) numerical agreement with the direct oracle
        let oracle = oracle_atomic(&x, &mats).unwrap();
        assert!(
            res.y.max_rel_err(&oracle) < 1e-12,
            "instance {done}: simulated output diverges"
        );

        // (b) measured words equal the analytic bandwidth, exactly
        let words = alg_comm_words_exact(&shape, &grid).unwrap();
        assert!(res.per_rank_words.iter().all(|&w| w == words));

        // (c) measured flops equal the compute formula, exactly
        let mut cur: Vec<u128> = (0..d)
            .map(|i| (shape.n_dims()[i] / grid.p[i]) as u128)
            .collect();
        let mut expect_flops = 0u128;
        for k in 0..d {
            let r_local = (shape.r_dims()[k] / grid.q[k]) as u128;
            expect_flops += 2 * r_local * cur.iter().product::<u128>();
            cur[k] = r_local;
        }
        let y_block: u128 = cur.iter().product();
        let q_y = p_total / grid.q_product();
        expect_flops += y_block - y_block / q_y;
        assert!(
            res.flops_per_rank.iter().all(|&f| f == expect_flops),
            "instance {done}: flops {:?} != {expect_flops}",
            res.flops_per_rank[0]
        );
    }
    println!("[PASS] criterion 8: 50 simulations match the oracle, exact words, exact flops");
}

#[test]
fn criterion_9_general_d_dominance() {
    for id in [FigureId::F9a, FigureId::F9b, FigureId::F9c] {
        let res = run_figure(id).unwrap();
        let FigureSummary::Dominance {
            alg_never_worse, ..
        } = res.summary
        else {
            panic!("wrong summary kind")
        };
        assert!(alg_never_worse, "fig {id}: sequence beat the grid algorithm");
    }
    println!("[PASS] criterion 9: grid algorithm never above the sequence cost for figs 9a-9c");
}
