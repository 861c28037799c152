//! Processor grid construction: the constructive near-optimal real-valued
//! grid (with its adjustment loops), fast power-of-two rounding to an
//! integer grid, and exhaustive searches for the best integer grids of both
//! algorithms.

use serde::Serialize;

use crate::cost::{alg_comm_cost_int, alg_comm_words_exact, ttm_seq_comm_cost};
use crate::error::{Error, Result};
use crate::shape::{MultiTtmShape, ProcGrid, RealGrid};
use crate::solver::solve_matrix_term;

const REL_EPS: f64 = 1e-9;

/// Which tensor-term regime the construction targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    /// P < n/r: the output tensor is replicated (q = 1), input split P ways.
    ReplicateOutput,
    /// P ≥ n/r: both tensors split so n/p = r/q = (nr/P)^(1/2).
    SplitBoth,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::ReplicateOutput => write!(f, "I (P < n/r)"),
            Scenario::SplitBoth => write!(f, "II (P >= n/r)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    P,
    Q,
}

/// Fix-up stages of the constructive procedure, in the order they can fire.
/// Each stage leaves the p and q products at their scenario targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AdjustStage {
    /// Per-mode fold moving sub-1 entries into the other side, followed by
    /// the redistribution returning both products to their targets.
    MinFix,
    /// Reassignment of per-mode mass when both sides exceed caps somewhere.
    CapSwap,
    /// Final descending multi-pass clamp to the dimension caps.
    UpperClamp,
}

/// One fired fix-up, with the grid products after it (the products must stay
/// at the scenario targets through every stage).
#[derive(Debug, Clone, Serialize)]
pub struct Adjustment {
    pub stage: AdjustStage,
    /// For MinFold/ProductRestore the side that absorbed mass; for
    /// CapSwap/UpperClamp the side rebuilt to fit its caps.
    pub side: Side,
    pub p_product: f64,
    pub q_product: f64,
}

/// A constructed real-valued grid plus provenance.
#[derive(Debug, Clone, Serialize)]
pub struct GridChoice {
    pub grid: RealGrid,
    pub scenario: Scenario,
    /// Active case of the matrix-term optimization.
    pub matrix_case: usize,
    pub adjustments: Vec<Adjustment>,
    /// Scenario target for Πp_i.
    pub p_target: f64,
    /// Scenario target for Πq_i.
    pub q_target: f64,
}

fn product(v: &[f64]) -> f64 {
    v.iter().product()
}

/// Builds the real-valued grid whose communication cost is within a factor
/// of 3 of the lower bound: per-case closed forms, then the fold/restore
/// loops enforcing entries ≥ 1, the cap swap when both sides overflow, and
/// the final clamp to the dimension caps.
pub fn select_grid_real(shape: &MultiTtmShape, p: u128) -> Result<GridChoice> {
    if p < 1 {
        return Err(Error::LoadBalance("P must be at least 1".into()));
    }
    if p > shape.n_total().saturating_mul(shape.r_total()) {
        return Err(Error::LoadBalance(format!("P = {p} exceeds nr")));
    }
    let d = shape.d();
    let nf = shape.n_total() as f64;
    let rf = shape.r_total() as f64;
    let pf = p as f64;
    let n_dims: Vec<f64> = shape.n_dims().iter().map(|&v| v as f64).collect();
    let r_dims: Vec<f64> = shape.r_dims().iter().map(|&v| v as f64).collect();

    let scenario = if p.saturating_mul(shape.r_total()) < shape.n_total() {
        Scenario::ReplicateOutput
    } else {
        Scenario::SplitBoth
    };
    let matrix_case = solve_matrix_term(shape, p)?.case_index;
    let active = d - matrix_case; // first index with a non-saturated cap

    let mut gp = vec![1.0f64; d];
    let mut gq = vec![1.0f64; d];
    match scenario {
        Scenario::ReplicateOutput => {
            // q = 1 and matrix terms n_j r_j/p_j match the bound cases.
            let cap_suffix: f64 = (active..d).map(|j| n_dims[j] * r_dims[j]).product();
            let scale = (pf / cap_suffix).powf(1.0 / matrix_case as f64);
            for j in active..d {
                gp[j] = n_dims[j] * r_dims[j] * scale;
            }
        }
        Scenario::SplitBoth => {
            let n_suffix: f64 = n_dims[active..].iter().product();
            let r_suffix: f64 = r_dims[active..].iter().product();
            let p_scale =
                (nf * pf / (rf * n_suffix * n_suffix)).powf(1.0 / (2 * matrix_case) as f64);
            let q_scale =
                (rf * pf / (nf * r_suffix * r_suffix)).powf(1.0 / (2 * matrix_case) as f64);
            for j in active..d {
                gp[j] = n_dims[j] * p_scale;
                gq[j] = r_dims[j] * q_scale;
            }
        }
    }
    let p_target = product(&gp);
    let q_target = product(&gq);
    let mut adjustments = Vec::new();

    // Fold sub-1 entries into the other side of the same mode, then restore
    // the products by shrinking oversized entries of the side that grew.
    let below = |v: f64| v < 1.0 - REL_EPS;
    if gp.iter().any(|&v| below(v)) || gq.iter().any(|&v| below(v)) {
        let q_deficit: f64 = gq.iter().filter(|&&v| below(v)).product();
        let p_deficit: f64 = gp.iter().filter(|&&v| below(v)).product();
        let fold_into_p = q_deficit <= p_deficit;
        let (shrink, grow) = if fold_into_p {
            (&mut gq, &mut gp)
        } else {
            (&mut gp, &mut gq)
        };
        let products = |shrink: &[f64], grow: &[f64]| {
            if fold_into_p {
                (product(grow), product(shrink))
            } else {
                (product(shrink), product(grow))
            }
        };
        let side = if fold_into_p { Side::P } else { Side::Q };
        let mut a = 1.0f64;
        for j in 0..d {
            if below(shrink[j]) {
                a *= shrink[j];
                grow[j] *= shrink[j];
                shrink[j] = 1.0;
            } else if below(grow[j]) {
                a /= grow[j];
                shrink[j] *= grow[j];
                grow[j] = 1.0;
            }
        }
        // a < 1 is the factor by which the shrink side must come back down.
        for j in 0..d {
            if a >= 1.0 - REL_EPS {
                break;
            }
            if shrink[j] > 1.0 + REL_EPS {
                let prev = shrink[j];
                shrink[j] = (a * shrink[j]).max(1.0);
                a *= prev / shrink[j];
                grow[j] *= prev / shrink[j];
            }
        }
        if (a - 1.0).abs() > 1e-6 {
            return Err(Error::Internal(format!(
                "product restore left residual factor {a}"
            )));
        }
        let (pp, qp) = products(shrink, grow);
        adjustments.push(Adjustment {
            stage: AdjustStage::MinFix,
            side,
            p_product: pp,
            q_product: qp,
        });
    }

    // If caps are exceeded on both sides, rebuild one side from the per-mode
    // products so that it fits its caps everywhere.
    let p_over = (0..d).any(|j| gp[j] > n_dims[j] * (1.0 + REL_EPS));
    let q_over = (0..d).any(|j| gq[j] > r_dims[j] * (1.0 + REL_EPS));
    if p_over && q_over {
        let active_modes: Vec<usize> = (0..d)
            .filter(|&j| gp[j] * gq[j] > 1.0 + REL_EPS)
            .collect();
        let p_mass: f64 = active_modes.iter().map(|&j| gp[j]).product();
        let p_room: f64 = active_modes.iter().map(|&j| n_dims[j]).product();
        let side = if p_mass <= p_room * (1.0 + REL_EPS) {
            Side::P
        } else {
            Side::Q
        };
        {
            let (caps, lead, trail) = match side {
                Side::P => (&n_dims, &mut gp, &mut gq),
                Side::Q => (&r_dims, &mut gq, &mut gp),
            };
            let mut mass: f64 = active_modes.iter().map(|&j| lead[j]).product();
            for &j in &active_modes {
                let pair = lead[j] * trail[j];
                lead[j] = mass.min(caps[j]);
                trail[j] = pair / lead[j];
                mass /= lead[j];
                if trail[j] < 1.0 - 1e-6 {
                    return Err(Error::Internal(format!(
                        "cap swap pushed mode {j} below 1: {}",
                        trail[j]
                    )));
                }
            }
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::Internal(format!(
                    "cap swap left unplaced mass {mass}"
                )));
            }
        }
        adjustments.push(Adjustment {
            stage: AdjustStage::CapSwap,
            side,
            p_product: product(&gp),
            q_product: product(&gq),
        });
    }

    // Final clamp: at most one side can still exceed its caps; redistribute
    // its product target under the caps, iterating descending until stable.
    if clamp_side(&mut gp, &n_dims, p_target)? {
        adjustments.push(Adjustment {
            stage: AdjustStage::UpperClamp,
            side: Side::P,
            p_product: product(&gp),
            q_product: product(&gq),
        });
    }
    if clamp_side(&mut gq, &r_dims, q_target)? {
        adjustments.push(Adjustment {
            stage: AdjustStage::UpperClamp,
            side: Side::Q,
            p_product: product(&gp),
            q_product: product(&gq),
        });
    }

    // Settle float drift and check the contract.
    for j in 0..d {
        gp[j] = gp[j].clamp(1.0, n_dims[j]);
        gq[j] = gq[j].clamp(1.0, r_dims[j]);
    }
    let grid = RealGrid { p: gp, q: gq };
    for (prod, target, what) in [
        (grid.p_product(), p_target, "p"),
        (grid.q_product(), q_target, "q"),
    ] {
        if (prod / target - 1.0).abs() > 1e-6 {
            return Err(Error::Internal(format!(
                "{what} product {prod} drifted from target {target}"
            )));
        }
    }
    Ok(GridChoice {
        grid,
        scenario,
        matrix_case,
        adjustments,
        p_target,
        q_target,
    })
}

/// Descending passes of v_j := min(cap_j, target/Π_{l≠j}v_l) until the
/// product returns to the target. Returns whether any entry was clamped.
fn clamp_side(vals: &mut [f64], caps: &[f64], target: f64) -> Result<bool> {
    let d = vals.len();
    if !vals
        .iter()
        .zip(caps)
        .any(|(&v, &c)| v > c * (1.0 + REL_EPS))
    {
        return Ok(false);
    }
    for _pass in 0..=d {
        for j in (0..d).rev() {
            let rest: f64 = vals
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != j)
                .map(|(_, &v)| v)
                .product();
            vals[j] = caps[j].min(target / rest).max(1.0);
        }
        if (product(vals) / target - 1.0).abs() <= REL_EPS {
            return Ok(true);
        }
    }
    Err(Error::Internal(format!(
        "cap clamp failed to restore product {target}"
    )))
}

fn log2_u64(v: u64) -> u32 {
    63 - v.leading_zeros()
}

/// Round-half-up in log space with a small nudge so that values computed
/// through f64 roots land on the intended side of a half-integer.
fn round_log(x: f64) -> i64 {
    (x + 0.5 + 1e-9).floor() as i64
}

/// Rounds one side of a real grid to integer powers of two: each mode in
/// turn is rounded to the nearest power of two with the change spread evenly
/// over the remaining modes; the last mode absorbs the remainder exactly.
fn round_side_pow2(values: &[f64], caps: &[u64], target_exp: i64) -> Result<Vec<u64>> {
    let d = values.len();
    let cap_exp: Vec<i64> = caps.iter().map(|&c| log2_u64(c) as i64).collect();
    if target_exp < 0 || target_exp > cap_exp.iter().sum::<i64>() {
        return Err(Error::NoFeasibleGrid(format!(
            "product 2^{target_exp} cannot fit caps"
        )));
    }
    let mut logs: Vec<f64> = values.iter().map(|&v| v.log2().max(0.0)).collect();
    let spread = (target_exp as f64 - logs.iter().sum::<f64>()) / d as f64;
    for l in logs.iter_mut() {
        *l += spread;
    }
    let mut exps = vec![0i64; d];
    let mut assigned = 0i64;
    for i in 0..d {
        let remaining_cap: i64 = cap_exp[i + 1..].iter().sum();
        let lo = (target_exp - assigned - remaining_cap).max(0);
        let hi = cap_exp[i].min(target_exp - assigned);
        let e = if i + 1 == d {
            target_exp - assigned
        } else {
            round_log(logs[i]).clamp(lo, hi)
        };
        if e < 0 || e > cap_exp[i] {
            return Err(Error::Internal(format!(
                "rounded exponent {e} escaped [0, {}]",
                cap_exp[i]
            )));
        }
        if i + 1 < d {
            let delta = logs[i] - e as f64;
            let share = delta / (d - 1 - i) as f64;
            for l in logs.iter_mut().skip(i + 1) {
                *l += share;
            }
        }
        exps[i] = e;
        assigned += e;
    }
    Ok(exps.iter().map(|&e| 1u64 << e).collect())
}

/// Fast integral grid for power-of-two instances, built from the
/// constructive real grid. The total p product is rounded half-up first and
/// the q product takes the complement, so Πp_i·Πq_i = P exactly.
pub fn round_grid_pow2(choice: &GridChoice, shape: &MultiTtmShape, p: u128) -> Result<ProcGrid> {
    if !shape.is_pow2() || !p.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(format!("{shape} with P = {p}")));
    }
    let total_exp = p.trailing_zeros() as i64;
    let n_exp: i64 = shape.n_dims().iter().map(|&v| log2_u64(v) as i64).sum();
    let r_exp: i64 = shape.r_dims().iter().map(|&v| log2_u64(v) as i64).sum();

    let p_log = choice.grid.p_product().log2();
    let p_exp = round_log(p_log).clamp((total_exp - r_exp).max(0), n_exp.min(total_exp));
    let q_exp = total_exp - p_exp;

    let p_side = round_side_pow2(&choice.grid.p, shape.n_dims(), p_exp)?;
    let q_side = round_side_pow2(&choice.grid.q, shape.r_dims(), q_exp)?;
    let grid = ProcGrid {
        p: p_side,
        q: q_side,
    };
    debug_assert_eq!(grid.total(), p);
    debug_assert!(grid.divides(shape));
    Ok(grid)
}

/// Divisors of v in ascending order.
fn divisors(v: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= v {
        if v.is_multiple_of(i) {
            out.push(i);
            if i != v / i {
                out.push(v / i);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

/// Exhaustive search over integer grids dividing the dims with
/// Πp_i·Πq_i = P, minimizing the bandwidth cost. Ties break to the
/// lexicographically smallest (p_1..p_d, q_1..q_d).
pub fn exhaustive_best_grid(shape: &MultiTtmShape, p: u128) -> Result<(ProcGrid, f64)> {
    if p < 1 {
        return Err(Error::LoadBalance("P must be at least 1".into()));
    }
    if p == 1 {
        return Ok((ProcGrid::ones(shape.d()), 0.0));
    }
    if shape.is_pow2() && p.is_power_of_two() {
        return exhaustive_pow2(shape, p);
    }
    exhaustive_divisors(shape, p)
}

/// Power-of-two search: enumerate per-mode exponent totals c_i (the matrix
/// terms depend only on those), then the input-side exponent split, and
/// materialize the lexicographically smallest assignment per candidate.
fn exhaustive_pow2(shape: &MultiTtmShape, p: u128) -> Result<(ProcGrid, f64)> {
    let d = shape.d();
    let e_total = p.trailing_zeros() as i64;
    let alpha: Vec<i64> = shape.n_dims().iter().map(|&v| log2_u64(v) as i64).collect();
    let beta: Vec<i64> = shape.r_dims().iter().map(|&v| log2_u64(v) as i64).collect();
    let mats = shape.matrix_sizes();
    let n = shape.n_total();
    let r = shape.r_total();
    let owned: u128 = [n, r]
        .iter()
        .chain(mats.iter())
        .map(|&s| s / p) // exact for P <= p_max; otherwise a constant shift
        .sum();

    let mut best: Option<(u128, ProcGrid)> = None;
    let mut c = vec![0i64; d];
    search_compositions(&mut c, 0, e_total, &alpha, &beta, &mut |c| {
        let mat_gross: u128 = (0..d).map(|i| mats[i] >> c[i] as u32).sum();
        let lo: i64 = (0..d).map(|i| (c[i] - beta[i]).max(0)).sum();
        let hi: i64 = (0..d).map(|i| c[i].min(alpha[i])).sum();
        for e_p in lo..=hi {
            let gross = mat_gross + (n >> e_p as u32) + (r >> (e_total - e_p) as u32);
            let cost = gross.saturating_sub(owned);
            let improves = best.as_ref().is_none_or(|(bc, _)| cost < *bc);
            let ties = best.as_ref().is_some_and(|(bc, _)| cost == *bc);
            if improves || ties {
                let grid = materialize_pow2(c, e_p, &alpha, &beta);
                if improves
                    || best
                        .as_ref()
                        .is_some_and(|(_, bg)| grid_key(&grid) < grid_key(bg))
                {
                    best = Some((cost, grid));
                }
            }
        }
    });
    let (_, grid) = best.ok_or_else(|| Error::NoFeasibleGrid(format!("P = {p}")))?;
    let cost = match alg_comm_words_exact(shape, &grid) {
        Ok(words) => words as f64,
        Err(_) => alg_comm_cost_int(shape, &grid)?.total_bandwidth,
    };
    Ok((grid, cost))
}

fn grid_key(g: &ProcGrid) -> Vec<u64> {
    g.p.iter().chain(g.q.iter()).copied().collect()
}

/// Lexicographically smallest exponent assignment: place as little as
/// possible on each earlier mode while the rest stays feasible.
fn materialize_pow2(c: &[i64], e_p: i64, alpha: &[i64], beta: &[i64]) -> ProcGrid {
    let d = c.len();
    let los: Vec<i64> = (0..d).map(|i| (c[i] - beta[i]).max(0)).collect();
    let his: Vec<i64> = (0..d).map(|i| c[i].min(alpha[i])).collect();
    let mut rem = e_p;
    let mut p = vec![1u64; d];
    let mut q = vec![1u64; d];
    for i in 0..d {
        let hi_rest: i64 = his[i + 1..].iter().sum();
        let a = los[i].max(rem - hi_rest);
        rem -= a;
        p[i] = 1 << a;
        q[i] = 1 << (c[i] - a);
    }
    debug_assert_eq!(rem, 0);
    ProcGrid { p, q }
}

fn search_compositions(
    c: &mut Vec<i64>,
    idx: usize,
    remaining: i64,
    alpha: &[i64],
    beta: &[i64],
    visit: &mut impl FnMut(&[i64]),
) {
    let d = c.len();
    if idx == d {
        if remaining == 0 {
            visit(c);
        }
        return;
    }
    let rest_cap: i64 = (idx + 1..d).map(|i| alpha[i] + beta[i]).sum();
    let lo = (remaining - rest_cap).max(0);
    let hi = (alpha[idx] + beta[idx]).min(remaining);
    for v in lo..=hi {
        c[idx] = v;
        search_compositions(c, idx + 1, remaining - v, alpha, beta, visit);
    }
    c[idx] = 0;
}

/// General-P search over the divisor lattice of the dims. Enumeration is in
/// lexicographic order, so keeping the first strict minimum realizes the
/// tie-break.
fn exhaustive_divisors(shape: &MultiTtmShape, p: u128) -> Result<(ProcGrid, f64)> {
    let d = shape.d();
    let dims: Vec<u64> = shape
        .n_dims()
        .iter()
        .chain(shape.r_dims().iter())
        .copied()
        .collect();
    let div_lists: Vec<Vec<u64>> = dims.iter().map(|&v| divisors(v)).collect();
    let mut suffix_cap = vec![1u128; 2 * d + 1];
    for i in (0..2 * d).rev() {
        suffix_cap[i] = suffix_cap[i + 1].saturating_mul(dims[i] as u128);
    }
    let mut best: Option<(f64, ProcGrid)> = None;
    let mut picked = vec![1u64; 2 * d];
    divisor_search(0, p, &mut picked, &div_lists, &suffix_cap, &mut |picked| {
        let grid = ProcGrid {
            p: picked[..d].to_vec(),
            q: picked[d..].to_vec(),
        };
        if let Ok(br) = alg_comm_cost_int(shape, &grid) {
            let cost = br.total_bandwidth;
            if best
                .as_ref()
                .is_none_or(|(bc, _)| cost < *bc * (1.0 - 1e-12))
            {
                best = Some((cost, grid));
            }
        }
    });
    best.map(|(c, g)| (g, c))
        .ok_or_else(|| Error::NoFeasibleGrid(format!("no divisor factorization of P = {p}")))
}

fn divisor_search(
    idx: usize,
    rem: u128,
    picked: &mut Vec<u64>,
    div_lists: &[Vec<u64>],
    suffix_cap: &[u128],
    visit: &mut impl FnMut(&[u64]),
) {
    if idx == div_lists.len() {
        if rem == 1 {
            visit(picked);
        }
        return;
    }
    if suffix_cap[idx] < rem {
        return;
    }
    for &v in &div_lists[idx] {
        if rem.is_multiple_of(v as u128) {
            picked[idx] = v;
            divisor_search(idx + 1, rem / v as u128, picked, div_lists, suffix_cap, visit);
        }
    }
    picked[idx] = 1;
}

/// Exhaustive search over d-dimensional grids p̃ (p̃_i | n_i, Πp̃_i = P)
/// minimizing the TTM-in-sequence cost in the given mode order, ties to the
/// lexicographically smallest p̃.
pub fn exhaustive_best_ttm_seq_grid(
    shape: &MultiTtmShape,
    p: u128,
    order: Option<&[usize]>,
) -> Result<(Vec<u64>, f64)> {
    if p < 1 {
        return Err(Error::LoadBalance("P must be at least 1".into()));
    }
    let d = shape.d();
    let increasing: Vec<usize> = (0..d).collect();
    let order = order.unwrap_or(&increasing);
    if p == 1 {
        return Ok((vec![1; d], 0.0));
    }
    // Sizes for the exact cost path: intermediates and matrices.
    let mut cur: Vec<u128> = shape.n_dims().iter().map(|&v| v as u128).collect();
    let mut inter: Vec<Option<u128>> = Vec::with_capacity(d);
    let mut step_mode = vec![0usize; d];
    for (t, &m) in order.iter().enumerate() {
        cur[m] = shape.r_dims()[m] as u128;
        inter.push(cur.iter().try_fold(1u128, |a, &v| a.checked_mul(v)));
        step_mode[t] = m;
    }
    let mats = shape.matrix_sizes();

    let exact_cost = |tilde: &[u64]| -> Option<u128> {
        let mut net = 0u128;
        for t in 0..d {
            let k = step_mode[t];
            let size = inter[t]?;
            if !size.is_multiple_of(p)
                || !mats[k].is_multiple_of(tilde[k] as u128)
                || !mats[k].is_multiple_of(p)
            {
                return None;
            }
            net += (size / p) * (tilde[k] as u128 - 1);
            net += mats[k] / tilde[k] as u128 - mats[k] / p;
        }
        Some(net)
    };

    let div_lists: Vec<Vec<u64>> = shape.n_dims().iter().map(|&v| divisors(v)).collect();
    let mut suffix_cap = vec![1u128; d + 1];
    for i in (0..d).rev() {
        suffix_cap[i] = suffix_cap[i + 1].saturating_mul(shape.n_dims()[i] as u128);
    }
    let mut best: Option<(f64, Vec<u64>)> = None;
    let mut picked = vec![1u64; d];
    divisor_search(0, p, &mut picked, &div_lists, &suffix_cap, &mut |picked| {
        let cost = match exact_cost(picked) {
            Some(words) => words as f64,
            None => {
                let tf: Vec<f64> = picked.iter().map(|&v| v as f64).collect();
                match ttm_seq_comm_cost(shape, &tf, Some(order)) {
                    Ok(br) => br.total,
                    Err(_) => return,
                }
            }
        };
        if best
            .as_ref()
            .is_none_or(|(bc, _)| cost < *bc * (1.0 - 1e-12))
        {
            best = Some((cost, picked.to_vec()));
        }
    });
    best.map(|(c, g)| (g, c))
        .ok_or_else(|| Error::NoFeasibleGrid(format!("no p̃ factorization of P = {p}")))
}
