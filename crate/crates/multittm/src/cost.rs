//! Analytic communication, latency, and computation costs for the atomic
//! grid algorithm and the TTM-in-sequence alternative, plus the sweep driver
//! that tabulates every curve per processor count.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{first_ttm_lb, multi_ttm_lb, ttm_seq_lb};
use crate::error::{Error, Result};
use crate::grid::{exhaustive_best_grid, exhaustive_best_ttm_seq_grid, round_grid_pow2, select_grid_real};
use crate::shape::{MultiTtmShape, ProcGrid, RealGrid};

/// Per-array bandwidth cost of the atomic algorithm on a 2d-dimensional grid.
#[derive(Debug, Clone, Serialize)]
pub struct CostBreakdown {
    /// Input tensor words gathered per processor: n/p.
    pub tensor_in: f64,
    /// Output tensor words reduced per processor: r/q.
    pub tensor_out: f64,
    /// Matrix words gathered per processor: n_i r_i/(p_i q_i).
    pub matrix_terms: Vec<f64>,
    /// Owned-data credit (n + r + Σn_i r_i)/P.
    pub owned: f64,
    /// Words communicated along the critical path.
    pub total_bandwidth: f64,
    /// Messages along the critical path: d·log2(P).
    pub latency: f64,
    /// Local multiply-add flops plus reduction adds, increasing mode order.
    pub flops: f64,
    /// False when an integer grid did not divide the dims and block sizes
    /// were rounded up.
    pub exact_blocks: bool,
}

fn check_mode_count(shape: &MultiTtmShape, modes: usize) -> Result<()> {
    if modes != shape.d() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {modes} modes, shape has {}",
            shape.d()
        )));
    }
    Ok(())
}

/// Bandwidth, latency, and flops of the atomic algorithm for a real-valued
/// grid. The grid products must multiply to the processor count.
pub fn alg_comm_cost(shape: &MultiTtmShape, grid: &RealGrid) -> Result<CostBreakdown> {
    check_mode_count(shape, grid.p.len())?;
    let d = shape.d();
    let n = shape.n_total() as f64;
    let r = shape.r_total() as f64;
    let p_total = grid.total();
    let tensor_in = n / grid.p_product();
    let tensor_out = r / grid.q_product();
    let matrix_terms: Vec<f64> = (0..d)
        .map(|i| shape.n_dims()[i] as f64 * shape.r_dims()[i] as f64 / (grid.p[i] * grid.q[i]))
        .collect();
    let owned = (n + r + shape.matrix_sizes().iter().map(|&s| s as f64).sum::<f64>()) / p_total;
    // Net words per collective, (1 - group share) * block, so that a fully
    // local array contributes exactly zero no matter how large it is.
    let mut total = tensor_in * (1.0 - grid.p_product() / p_total)
        + tensor_out * (1.0 - grid.q_product() / p_total);
    for (i, m) in matrix_terms.iter().enumerate() {
        total += m * (1.0 - grid.p[i] * grid.q[i] / p_total);
    }
    Ok(CostBreakdown {
        tensor_in,
        tensor_out,
        matrix_terms,
        owned,
        total_bandwidth: total.max(0.0),
        latency: d as f64 * p_total.log2().max(0.0),
        flops: alg_compute(shape, grid, None)?,
        exact_blocks: true,
    })
}

/// Cost of an integer grid. When some p_i ∤ n_i or q_i ∤ r_i the block sizes
/// round up and `exact_blocks` is cleared.
pub fn alg_comm_cost_int(shape: &MultiTtmShape, grid: &ProcGrid) -> Result<CostBreakdown> {
    check_mode_count(shape, grid.p.len())?;
    if grid.divides(shape) {
        let mut br = alg_comm_cost(shape, &grid.to_real())?;
        if let Ok(words) = alg_comm_words_exact(shape, grid) {
            br.total_bandwidth = words as f64;
        }
        return Ok(br);
    }
    let d = shape.d();
    let p_total = grid.total() as f64;
    let blocks_n: Vec<u128> = (0..d)
        .map(|i| (shape.n_dims()[i] as u128).div_ceil(grid.p[i] as u128))
        .collect();
    let blocks_r: Vec<u128> = (0..d)
        .map(|i| (shape.r_dims()[i] as u128).div_ceil(grid.q[i] as u128))
        .collect();
    let tensor_in = blocks_n.iter().product::<u128>() as f64;
    let tensor_out = blocks_r.iter().product::<u128>() as f64;
    let matrix_terms: Vec<f64> = (0..d)
        .map(|i| (blocks_n[i] * blocks_r[i]) as f64)
        .collect();
    let n = shape.n_total() as f64;
    let r = shape.r_total() as f64;
    let owned = (n + r + shape.matrix_sizes().iter().map(|&s| s as f64).sum::<f64>()) / p_total;
    let gross = tensor_in + tensor_out + matrix_terms.iter().sum::<f64>();
    let real = RealGrid {
        p: grid.p.iter().map(|&v| v as f64).collect(),
        q: grid.q.iter().map(|&v| v as f64).collect(),
    };
    Ok(CostBreakdown {
        tensor_in,
        tensor_out,
        matrix_terms,
        owned,
        total_bandwidth: (gross - owned).max(0.0),
        latency: d as f64 * p_total.log2().max(0.0),
        flops: alg_compute(shape, &real, None)?,
        exact_blocks: false,
    })
}

/// Exact bandwidth words for an integer grid, requiring every cost term to
/// divide exactly (holds for power-of-two instances with P ≤ p_max).
pub fn alg_comm_words_exact(shape: &MultiTtmShape, grid: &ProcGrid) -> Result<u128> {
    check_mode_count(shape, grid.p.len())?;
    if !grid.divides(shape) {
        return Err(Error::Divisibility(format!(
            "grid {grid} does not divide {shape}"
        )));
    }
    let p_total = grid.total();
    let div = |num: u128, den: u128, what: &str| -> Result<u128> {
        if !num.is_multiple_of(den) {
            return Err(Error::Divisibility(format!("{what}: {den} does not divide {num}")));
        }
        Ok(num / den)
    };
    let n = shape.n_total();
    let r = shape.r_total();
    let mut total = div(n, grid.p_product(), "input block")?
        + div(r, grid.q_product(), "output block")?;
    let mut owned = div(n, p_total, "owned input")? + div(r, p_total, "owned output")?;
    for (i, s) in shape.matrix_sizes().iter().enumerate() {
        total += div(*s, grid.p[i] as u128 * grid.q[i] as u128, "matrix block")?;
        owned += div(*s, p_total, "owned matrix")?;
    }
    Ok(total.saturating_sub(owned))
}

/// Local computation flops of the atomic algorithm: the mode-by-mode
/// contraction sequence over local blocks (2 flops per multiply-add) plus
/// the (1 − q/P)·(r/q) reduction adds.
pub fn alg_compute(shape: &MultiTtmShape, grid: &RealGrid, order: Option<&[usize]>) -> Result<f64> {
    check_mode_count(shape, grid.p.len())?;
    let d = shape.d();
    let increasing: Vec<usize> = (0..d).collect();
    let order = order.unwrap_or(&increasing);
    let mut cur: Vec<f64> = (0..d)
        .map(|i| shape.n_dims()[i] as f64 / grid.p[i])
        .collect();
    let mut flops = 0.0;
    for &mode in order {
        let r_local = shape.r_dims()[mode] as f64 / grid.q[mode];
        flops += 2.0 * r_local * cur.iter().product::<f64>();
        cur[mode] = r_local;
    }
    let p_total = grid.total();
    let q = grid.q_product();
    let r = shape.r_total() as f64;
    flops += (1.0 - q / p_total) * (r / q);
    Ok(flops)
}

/// Per-step communication of the TTM-in-sequence algorithm on a
/// d-dimensional grid (mode k split p̃_k ways).
#[derive(Debug, Clone, Serialize)]
pub struct SeqCostBreakdown {
    /// Partially computed intermediate words per step: T_k·p̃_k/P.
    pub intermediate_terms: Vec<f64>,
    /// Matrix words gathered per step: n_k r_k/p̃_k.
    pub matrix_terms: Vec<f64>,
    /// Owned-data credit (ΣT_k + Σn_k r_k)/P.
    pub owned: f64,
    pub total: f64,
}

/// Intermediate tensor sizes T_k produced after each step of the sequence.
fn seq_intermediates(shape: &MultiTtmShape, order: &[usize]) -> Vec<f64> {
    let mut cur: Vec<f64> = shape.n_dims().iter().map(|&v| v as f64).collect();
    let mut out = Vec::with_capacity(order.len());
    for &mode in order {
        cur[mode] = shape.r_dims()[mode] as f64;
        out.push(cur.iter().product());
    }
    out
}

/// Communication cost of the TTM-in-sequence algorithm for grid p̃ with
/// Πp̃_i = P (increasing mode order unless one is given).
pub fn ttm_seq_comm_cost(
    shape: &MultiTtmShape,
    tilde: &[f64],
    order: Option<&[usize]>,
) -> Result<SeqCostBreakdown> {
    check_mode_count(shape, tilde.len())?;
    let d = shape.d();
    let increasing: Vec<usize> = (0..d).collect();
    let order = order.unwrap_or(&increasing).to_vec();
    let p_total: f64 = tilde.iter().product();
    let inter = seq_intermediates(shape, &order);
    let intermediate_terms: Vec<f64> = (0..d)
        .map(|t| inter[t] * tilde[order[t]] / p_total)
        .collect();
    let matrix_terms: Vec<f64> = (0..d)
        .map(|k| shape.n_dims()[k] as f64 * shape.r_dims()[k] as f64 / tilde[k])
        .collect();
    let owned = (inter.iter().sum::<f64>()
        + shape.matrix_sizes().iter().map(|&s| s as f64).sum::<f64>())
        / p_total;
    let mut total = 0.0;
    for (t, &term) in intermediate_terms.iter().enumerate() {
        total += term * (1.0 - 1.0 / tilde[order[t]]);
    }
    for (k, &term) in matrix_terms.iter().enumerate() {
        total += term * (1.0 - tilde[k] / p_total);
    }
    Ok(SeqCostBreakdown {
        intermediate_terms,
        matrix_terms,
        owned,
        total: total.max(0.0),
    })
}

/// Tensor and matrix shares of a TTM-in-sequence cost.
pub fn ttm_seq_cost_split(shape: &MultiTtmShape, tilde: &[f64]) -> Result<(f64, f64)> {
    let br = ttm_seq_comm_cost(shape, tilde, None)?;
    let p_total: f64 = tilde.iter().product();
    let tensor = br
        .intermediate_terms
        .iter()
        .enumerate()
        .map(|(t, &term)| term * (1.0 - 1.0 / tilde[t]))
        .sum();
    let matrix = br
        .matrix_terms
        .iter()
        .enumerate()
        .map(|(k, &term)| term * (1.0 - tilde[k] / p_total))
        .sum();
    Ok((tensor, matrix))
}

/// Parallel computation flops of the TTM-in-sequence algorithm (perfectly
/// balanced): 2·Σ_k (Π_{i≤k}r_i)(Π_{j≥k}n_j)/P in the given order.
pub fn ttm_seq_compute(shape: &MultiTtmShape, p: u128, order: Option<&[usize]>) -> Result<f64> {
    let d = shape.d();
    let increasing: Vec<usize> = (0..d).collect();
    let order = order.unwrap_or(&increasing);
    if order.len() != d {
        return Err(Error::InvalidModeOrder(format!(
            "order has {} entries for {d} modes",
            order.len()
        )));
    }
    let mut cur: Vec<f64> = shape.n_dims().iter().map(|&v| v as f64).collect();
    let mut total = 0.0;
    for &mode in order {
        total += 2.0 * shape.r_dims()[mode] as f64 * cur.iter().product::<f64>();
        cur[mode] = shape.r_dims()[mode] as f64;
    }
    Ok(total / p as f64)
}

/// Extra computation of the atomic algorithm relative to TTM-in-sequence,
/// as a percentage. Non-negative for any valid grid.
pub fn comp_overhead(shape: &MultiTtmShape, grid: &ProcGrid, p: u128) -> Result<f64> {
    let alg = alg_compute(shape, &grid.to_real(), None)?;
    let seq = ttm_seq_compute(shape, p, None)?;
    if seq <= 0.0 {
        return Err(Error::Internal("zero sequence flops".into()));
    }
    Ok(100.0 * (alg - seq) / seq)
}

/// Which curves a sweep evaluates.
#[derive(Debug, Clone, Copy)]
pub struct Curves {
    pub lb: bool,
    pub alg_best: bool,
    pub alg_fast: bool,
    pub ttmseq: bool,
    pub ttmseq_lb: bool,
    pub first_ttm_lb: bool,
    pub overhead: bool,
}

impl Curves {
    pub fn all() -> Self {
        Curves {
            lb: true,
            alg_best: true,
            alg_fast: true,
            ttmseq: true,
            ttmseq_lb: true,
            first_ttm_lb: true,
            overhead: true,
        }
    }

    pub fn none() -> Self {
        Curves {
            lb: false,
            alg_best: false,
            alg_fast: false,
            ttmseq: false,
            ttmseq_lb: false,
            first_ttm_lb: false,
            overhead: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub curves: Curves,
    /// Re-check the constructive-grid factor-3 bound and lb ≤ best cost on
    /// every row; violations abort the sweep.
    pub validate: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            curves: Curves::all(),
            validate: true,
        }
    }
}

/// One row of a sweep table; absent curves stay `None`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: u128,
    pub lb: Option<f64>,
    pub lb_tensor: Option<f64>,
    pub lb_matrix: Option<f64>,
    pub alg_best: Option<f64>,
    pub alg_best_tensor: Option<f64>,
    pub alg_best_matrix: Option<f64>,
    pub alg_fast: Option<f64>,
    pub ttmseq: Option<f64>,
    pub ttmseq_tensor: Option<f64>,
    pub ttmseq_matrix: Option<f64>,
    pub ttmseq_lb: Option<f64>,
    pub first_ttm_lb: Option<f64>,
    pub comp_overhead_pct: Option<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "P,lb,lb_tensor,lb_matrix,alg_best,alg_best_tensor,alg_best_matrix,alg_fast,ttmseq,ttmseq_tensor,ttmseq_matrix,ttmseq_lb,first_ttm_lb,comp_overhead_pct";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let cell = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.p,
            cell(&self.lb),
            cell(&self.lb_tensor),
            cell(&self.lb_matrix),
            cell(&self.alg_best),
            cell(&self.alg_best_tensor),
            cell(&self.alg_best_matrix),
            cell(&self.alg_fast),
            cell(&self.ttmseq),
            cell(&self.ttmseq_tensor),
            cell(&self.ttmseq_matrix),
            cell(&self.ttmseq_lb),
            cell(&self.first_ttm_lb),
            cell(&self.comp_overhead_pct),
        )
    }
}

/// Evaluates one sweep row.
pub fn sweep_row(shape: &MultiTtmShape, p: u128, opts: &SweepOptions) -> Result<SweepRow> {
    if p > shape.p_max() {
        return Err(Error::LoadBalance(format!(
            "P = {p} exceeds p_max = {}",
            shape.p_max()
        )));
    }
    let c = opts.curves;
    let mut row = SweepRow {
        p,
        lb: None,
        lb_tensor: None,
        lb_matrix: None,
        alg_best: None,
        alg_best_tensor: None,
        alg_best_matrix: None,
        alg_fast: None,
        ttmseq: None,
        ttmseq_tensor: None,
        ttmseq_matrix: None,
        ttmseq_lb: None,
        first_ttm_lb: None,
        comp_overhead_pct: None,
    };

    if c.lb || opts.validate {
        let b = multi_ttm_lb(shape, p)?;
        if c.lb {
            row.lb = Some(b.lb);
            row.lb_tensor = Some(b.lb_tensor);
            row.lb_matrix = Some(b.lb_matrix);
        }
        if opts.validate {
            let choice = select_grid_real(shape, p)?;
            let cost = alg_comm_cost(shape, &choice.grid)?;
            let slack = 3.0 * b.lb + 1e-6 * b.lb + 1e-6;
            if cost.total_bandwidth > slack {
                return Err(Error::Internal(format!(
                    "constructed grid exceeds 3x bound at P={p}: {} > {slack}",
                    cost.total_bandwidth
                )));
            }
        }
    }

    if c.alg_best || c.overhead || opts.validate {
        let (grid, cost) = exhaustive_best_grid(shape, p)?;
        let br = alg_comm_cost_int(shape, &grid)?;
        if c.alg_best {
            row.alg_best = Some(cost);
            let pf = p as f64;
            row.alg_best_tensor = Some(
                br.tensor_in * (1.0 - grid.p_product() as f64 / pf)
                    + br.tensor_out * (1.0 - grid.q_product() as f64 / pf),
            );
            row.alg_best_matrix = Some(
                br.matrix_terms
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m * (1.0 - (grid.p[i] * grid.q[i]) as f64 / pf))
                    .sum(),
            );
        }
        if c.overhead {
            row.comp_overhead_pct = Some(comp_overhead(shape, &grid, p)?);
        }
        if opts.validate {
            if let Some(lb) = row.lb {
                if lb > cost * (1.0 + 1e-9) + 1e-6 {
                    return Err(Error::Internal(format!(
                        "lower bound {lb} exceeds best grid cost {cost} at P={p}"
                    )));
                }
            }
        }
    }

    if c.alg_fast {
        let choice = select_grid_real(shape, p)?;
        let fast = round_grid_pow2(&choice, shape, p)?;
        row.alg_fast = Some(match alg_comm_words_exact(shape, &fast) {
            Ok(words) => words as f64,
            Err(_) => alg_comm_cost_int(shape, &fast)?.total_bandwidth,
        });
    }

    if c.ttmseq {
        let (tilde, cost) = exhaustive_best_ttm_seq_grid(shape, p, None)?;
        let tf: Vec<f64> = tilde.iter().map(|&v| v as f64).collect();
        let (tensor, matrix) = ttm_seq_cost_split(shape, &tf)?;
        row.ttmseq = Some(cost);
        row.ttmseq_tensor = Some(tensor);
        row.ttmseq_matrix = Some(matrix);
    }

    if c.ttmseq_lb {
        row.ttmseq_lb = Some(ttm_seq_lb(shape, p, None)?);
    }
    if c.first_ttm_lb {
        row.first_ttm_lb = Some(first_ttm_lb(shape, p)?);
    }
    Ok(row)
}

/// Runs one row per processor count, in parallel, output ordered as given.
pub fn sweep(shape: &MultiTtmShape, p_list: &[u128], opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    p_list
        .par_iter()
        .map(|&p| sweep_row(shape, p, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn alg_cost_small_example() {
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        let grid = ProcGrid {
            p: vec![2, 2, 2],
            q: vec![1, 1, 1],
        };
        let br = alg_comm_cost_int(&shape, &grid).unwrap();
        // 8 + (4 + 4 + 4) + 8 - 12 words, 3*log2(8) messages.
        assert_eq!(br.total_bandwidth, 16.0);
        assert_eq!(br.tensor_in, 8.0);
        assert_eq!(br.tensor_out, 8.0);
        assert_eq!(br.matrix_terms, vec![4.0, 4.0, 4.0]);
        assert_eq!(br.owned, 12.0);
        assert_eq!(br.latency, 9.0);
        assert!(br.exact_blocks);
        assert_eq!(alg_comm_words_exact(&shape, &grid).unwrap(), 16);
    }

    #[test]
    fn alg_cost_single_processor_is_free() {
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        let br = alg_comm_cost_int(&shape, &ProcGrid::ones(3)).unwrap();
        assert_eq!(br.total_bandwidth, 0.0);
        assert_eq!(br.latency, 0.0);
    }

    #[test]
    fn alg_cost_small_p_closed_form() {
        // First-case grids communicate one tensor and two matrices:
        // (r + n1 r1 + n2 r2)(1 - 1/P).
        let shape = MultiTtmShape::new(
            vec![1 << 12, 1 << 13, 1 << 19],
            vec![1 << 8, 1 << 13, 1 << 11],
        )
        .unwrap();
        let p = 4u128;
        let (_, cost) = crate::grid::exhaustive_best_grid(&shape, p).unwrap();
        let expect = ((1u128 << 32) as f64 + (1u128 << 20) as f64 + (1u128 << 26) as f64)
            * (1.0 - 1.0 / p as f64);
        assert!(rel_close(cost, expect, 1e-12));
    }

    #[test]
    fn alg_cost_ceil_blocks_flagged_when_not_dividing() {
        let shape = MultiTtmShape::new(vec![6, 6], vec![2, 2]).unwrap();
        let grid = ProcGrid {
            p: vec![4, 1],
            q: vec![1, 1],
        };
        let br = alg_comm_cost_int(&shape, &grid).unwrap();
        assert!(!br.exact_blocks);
        assert_eq!(br.tensor_in, 12.0); // ceil(6/4) * 6
        assert!(alg_comm_words_exact(&shape, &grid).is_err());
    }

    #[test]
    fn alg_compute_matches_simulated_flops() {
        // 2 * (16*2/8-style terms) plus (1 - q/P) r/q reduction adds = 103.
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        let grid = ProcGrid {
            p: vec![2, 2, 2],
            q: vec![1, 1, 1],
        };
        let flops = alg_compute(&shape, &grid.to_real(), None).unwrap();
        assert_eq!(flops, 103.0);
        // Grid of ones: the sequential contraction-sequence count.
        let seq = alg_compute(&shape, &ProcGrid::ones(3).to_real(), None).unwrap();
        let expect = 2.0 * ((2 * 64) + (4 * 16) + (8 * 4)) as f64;
        assert_eq!(seq, expect);
        assert_eq!(ttm_seq_compute(&shape, 1, None).unwrap(), expect);
    }

    #[test]
    fn seq_cost_example_term_by_term() {
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        let tilde = [1.0, 1.0, 8.0];
        let br = ttm_seq_comm_cost(&shape, &tilde, None).unwrap();
        // Independent recomputation: intermediates 32, 16, 8; matrices 8 each.
        let p = 8.0;
        let inter = [32.0f64, 16.0, 8.0];
        let mats = [8.0f64, 8.0, 8.0];
        let mut expect = 0.0;
        for k in 0..3 {
            expect += inter[k] * tilde[k] / p + mats[k] / tilde[k];
        }
        expect -= (inter.iter().sum::<f64>() + mats.iter().sum::<f64>()) / p;
        assert_eq!(expect, 21.0);
        assert_eq!(br.total, 21.0);
        assert_eq!(br.owned, 10.0);
        assert_eq!(br.intermediate_terms, vec![4.0, 2.0, 8.0]);
        assert_eq!(br.matrix_terms, vec![8.0, 8.0, 1.0]);
    }

    #[test]
    fn seq_cost_single_processor_is_free() {
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        let br = ttm_seq_comm_cost(&shape, &[1.0, 1.0, 1.0], None).unwrap();
        assert_eq!(br.total, 0.0);
    }

    #[test]
    fn seq_compute_cubical_closed_form() {
        // 2 (r^(1/3) n + r^(2/3) n^(2/3) + r n^(1/3)) / P for cubical shapes.
        let shape = MultiTtmShape::cubical(3, 1 << 10, 1 << 3).unwrap();
        let p = 1u128 << 6;
        let n = shape.n_total() as f64;
        let r = shape.r_total() as f64;
        let expect = 2.0
            * (r.powf(1.0 / 3.0) * n
                + r.powf(2.0 / 3.0) * n.powf(2.0 / 3.0)
                + r * n.powf(1.0 / 3.0))
            / p as f64;
        let got = ttm_seq_compute(&shape, p, None).unwrap();
        assert!(rel_close(got, expect, 1e-12));
    }

    #[test]
    fn seq_compute_general_d_sum() {
        // Term-by-term: 2 * sum_k prod_{i<=k} r_i * prod_{j>=k} n_j over P.
        let shape = MultiTtmShape::cubical(4, 1 << 10, 1 << 3).unwrap();
        let p = 1u128 << 5;
        let mut direct = 0.0f64;
        for k in 0..4usize {
            let pre: f64 = (0..=k).map(|i| shape.r_dims()[i] as f64).product();
            let suf: f64 = (k..4).map(|j| shape.n_dims()[j] as f64).product();
            direct += 2.0 * pre * suf;
        }
        assert!(rel_close(
            ttm_seq_compute(&shape, p, None).unwrap(),
            direct / p as f64,
            1e-12
        ));
    }

    #[test]
    fn alg_compute_cubical_simplification() {
        // Cubical shape, q = 1, p_i equal: the flops collapse to
        // 2 (r^(1/3) n / P + r^(2/3) n^(2/3) / P^(2/3) + r n^(1/3) / P^(1/3))
        // plus the reduction adds.
        let shape = MultiTtmShape::cubical(3, 1 << 12, 1 << 4).unwrap();
        let grid = ProcGrid {
            p: vec![4, 4, 4],
            q: vec![1, 1, 1],
        };
        let pf = 64.0f64;
        let n = shape.n_total() as f64;
        let r = shape.r_total() as f64;
        let simplified = 2.0
            * (r.powf(1.0 / 3.0) * n / pf
                + r.powf(2.0 / 3.0) * n.powf(2.0 / 3.0) / pf.powf(2.0 / 3.0)
                + r * n.powf(1.0 / 3.0) / pf.powf(1.0 / 3.0))
            + (1.0 - 1.0 / pf) * r;
        let got = alg_compute(&shape, &grid.to_real(), None).unwrap();
        assert!(rel_close(got, simplified, 1e-12));
    }

    #[test]
    fn overhead_vanishes_for_small_p() {
        // The extra terms are lower order when P << n/r, so the overhead
        // shrinks as P drops.
        let shape = MultiTtmShape::cubical(3, 1 << 12, 1 << 4).unwrap();
        let at = |p: u128, exps: [u64; 3]| {
            let grid = ProcGrid {
                p: exps.to_vec(),
                q: vec![1, 1, 1],
            };
            comp_overhead(&shape, &grid, p).unwrap()
        };
        let small = at(2, [2, 1, 1]);
        let mid = at(8, [2, 2, 2]);
        let big = at(1 << 9, [8, 8, 8]);
        assert!(small >= 0.0 && small < mid && mid < big);
        assert!(mid < 0.5, "overhead {mid}% not negligible at P << n/r");
    }

    #[test]
    fn sweep_single_row_p1_all_zero() {
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        let rows = sweep(&shape, &[1], &SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row.lb, Some(0.0));
        assert_eq!(row.alg_best, Some(0.0));
        assert_eq!(row.alg_fast, Some(0.0));
        assert_eq!(row.ttmseq, Some(0.0));
        assert_eq!(row.ttmseq_lb, Some(0.0));
        assert_eq!(row.first_ttm_lb, Some(0.0));
        assert_eq!(row.comp_overhead_pct, Some(0.0));
    }

    #[test]
    fn sweep_rejects_p_above_p_max() {
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        assert!(sweep_row(&shape, 16, &SweepOptions::default()).is_err());
    }

    #[test]
    fn csv_row_leaves_missing_curves_empty() {
        let shape = MultiTtmShape::cubical(3, 4, 2).unwrap();
        let mut curves = Curves::none();
        curves.lb = true;
        let opts = SweepOptions {
            curves,
            validate: false,
        };
        let row = sweep_row(&shape, 2, &opts).unwrap();
        let line = row.to_csv();
        assert!(line.starts_with("2,"));
        assert!(line.ends_with(",,,,,,,,,,"));
    }
}
