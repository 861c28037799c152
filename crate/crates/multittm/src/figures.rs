//! Built-in experiment table: the strong-scaling and dimension sweeps the
//! CLI can reproduce, plus per-figure summary statistics.

use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{sweep, sweep_row, Curves, SweepOptions, SweepRow};
use crate::error::{Error, Result};
use crate::grid::{exhaustive_best_grid, round_grid_pow2, select_grid_real};
use crate::shape::{parse_dim, MultiTtmShape};

/// Identifiers of the built-in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FigureId {
    F4a,
    F4b,
    F4c,
    F5a,
    F5b,
    F5c,
    F6,
    F7a,
    F7b,
    F7c,
    F8a,
    F8b,
    F8c,
    F9a,
    F9b,
    F9c,
}

pub const ALL_FIGURES: [FigureId; 16] = [
    FigureId::F4a,
    FigureId::F4b,
    FigureId::F4c,
    FigureId::F5a,
    FigureId::F5b,
    FigureId::F5c,
    FigureId::F6,
    FigureId::F7a,
    FigureId::F7b,
    FigureId::F7c,
    FigureId::F8a,
    FigureId::F8b,
    FigureId::F8c,
    FigureId::F9a,
    FigureId::F9b,
    FigureId::F9c,
];

impl std::str::FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "4a" => FigureId::F4a,
            "4b" => FigureId::F4b,
            "4c" => FigureId::F4c,
            "5a" => FigureId::F5a,
            "5b" => FigureId::F5b,
            "5c" => FigureId::F5c,
            "6" => FigureId::F6,
            "7a" => FigureId::F7a,
            "7b" => FigureId::F7b,
            "7c" => FigureId::F7c,
            "8a" => FigureId::F8a,
            "8b" => FigureId::F8b,
            "8c" => FigureId::F8c,
            "9a" => FigureId::F9a,
            "9b" => FigureId::F9b,
            "9c" => FigureId::F9c,
            other => return Err(Error::UnknownFigure(other.into())),
        })
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FigureId::F4a => "4a",
            FigureId::F4b => "4b",
            FigureId::F4c => "4c",
            FigureId::F5a => "5a",
            FigureId::F5b => "5b",
            FigureId::F5c => "5c",
            FigureId::F6 => "6",
            FigureId::F7a => "7a",
            FigureId::F7b => "7b",
            FigureId::F7c => "7c",
            FigureId::F8a => "8a",
            FigureId::F8b => "8b",
            FigureId::F8c => "8c",
            FigureId::F9a => "9a",
            FigureId::F9b => "9b",
            FigureId::F9c => "9c",
        };
        write!(f, "{s}")
    }
}

/// What varies across the rows of an experiment.
#[derive(Debug, Clone, Serialize)]
pub enum SweepKind {
    /// Strong scaling: one row per processor count.
    OverP { p_list: Vec<u128> },
    /// Fixed P, growing cubical input dimension (one row per n_i).
    OverInputDim { n_dims: Vec<u64>, r_i: u64, p: u128 },
}

#[derive(Debug, Clone)]
pub struct FigureConfig {
    pub id: FigureId,
    pub shape: MultiTtmShape,
    pub sweep: SweepKind,
    pub curves: Curves,
}

/// Powers of two from 2^lo to 2^hi inclusive.
pub fn pow2_range(lo: u32, hi: u32) -> Vec<u128> {
    (lo..=hi).map(|e| 1u128 << e).collect()
}

/// Parses a processor list: `2^a..2^b` (powers of two), a comma list, or a
/// single value. Entries accept `2^k` notation.
pub fn parse_p_list(s: &str) -> Result<Vec<u128>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse_dim(lo)? as u128;
        let hi = parse_dim(hi)? as u128;
        if !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
            return Err(Error::Parse(format!("bad range `{s}`")));
        }
        let mut out = Vec::new();
        let mut p = lo;
        while p <= hi {
            out.push(p);
            p *= 2;
        }
        return Ok(out);
    }
    s.split(',').map(|t| Ok(parse_dim(t)? as u128)).collect()
}

fn exp_of(p: u128) -> u32 {
    p.trailing_zeros()
}

/// Shape and sweep definition for each built-in experiment.
pub fn figure_config(id: FigureId) -> FigureConfig {
    let cubical = |n_exp: u32, r_exp: u32, d: usize| {
        MultiTtmShape::cubical(d, 1 << n_exp, 1 << r_exp).unwrap()
    };
    let full_p = |shape: &MultiTtmShape| pow2_range(1, exp_of(shape.p_max()));
    let mut curves = Curves::none();
    match id {
        FigureId::F4a | FigureId::F4b | FigureId::F4c => {
            curves.lb = true;
            curves.alg_best = true;
            let shape = match id {
                FigureId::F4a => MultiTtmShape::new(
                    vec![1 << 12, 1 << 13, 1 << 19],
                    vec![1 << 8, 1 << 13, 1 << 11],
                )
                .unwrap(),
                FigureId::F4b => cubical(12, 4, 3),
                _ => cubical(20, 8, 3),
            };
            let p_list = full_p(&shape);
            FigureConfig {
                id,
                shape,
                sweep: SweepKind::OverP { p_list },
                curves,
            }
        }
        FigureId::F5a | FigureId::F5b | FigureId::F5c => {
            curves.lb = true;
            curves.alg_best = true;
            curves.ttmseq = true;
            curves.overhead = true;
            let shape = match id {
                FigureId::F5a => cubical(12, 4, 3),
                FigureId::F5b => cubical(13, 6, 3),
                _ => cubical(20, 8, 3),
            };
            let p_list = full_p(&shape);
            FigureConfig {
                id,
                shape,
                sweep: SweepKind::OverP { p_list },
                curves,
            }
        }
        FigureId::F6 => {
            curves.alg_best = true;
            curves.ttmseq = true;
            curves.overhead = true;
            let shape = cubical(12, 6, 3);
            FigureConfig {
                id,
                shape,
                sweep: SweepKind::OverInputDim {
                    n_dims: (6..=18).map(|e| 1u64 << e).collect(),
                    r_i: 1 << 6,
                    p: 1 << 12,
                },
                curves,
            }
        }
        FigureId::F7a | FigureId::F7b | FigureId::F7c => {
            curves.alg_best = true;
            curves.alg_fast = true;
            curves.ttmseq = true;
            curves.ttmseq_lb = true;
            curves.first_ttm_lb = true;
            let shape = match id {
                FigureId::F7a => cubical(12, 4, 3),
                FigureId::F7b => cubical(13, 6, 3),
                _ => cubical(20, 8, 3),
            };
            let p_list = full_p(&shape);
            FigureConfig {
                id,
                shape,
                sweep: SweepKind::OverP { p_list },
                curves,
            }
        }
        FigureId::F8a | FigureId::F8b | FigureId::F8c => {
            curves.lb = true;
            curves.alg_best = true;
            curves.ttmseq = true;
            curves.overhead = true;
            let d = match id {
                FigureId::F8a => 3,
                FigureId::F8b => 4,
                _ => 5,
            };
            let shape = cubical(20, 6, d);
            let p_list = full_p(&shape);
            FigureConfig {
                id,
                shape,
                sweep: SweepKind::OverP { p_list },
                curves,
            }
        }
        FigureId::F9a | FigureId::F9b | FigureId::F9c => {
            curves.lb = true;
            curves.alg_best = true;
            curves.ttmseq = true;
            curves.overhead = true;
            let (d, r_exp) = match id {
                FigureId::F9a => (3, 4u32),
                FigureId::F9b => (4, 3),
                _ => (6, 2),
            };
            let shape = cubical(10, r_exp, d);
            let p_list = full_p(&shape);
            FigureConfig {
                id,
                shape,
                sweep: SweepKind::OverP { p_list },
                curves,
            }
        }
    }
}

/// Headline statistic(s) for one experiment, printed as a summary line.
#[derive(Debug, Clone, Serialize)]
pub enum FigureSummary {
    /// Worst relative gap between the best grid cost and the lower bound.
    Gap { max_gap_pct: f64, at_p: u128 },
    /// TTM-in-sequence vs atomic cost comparison over a strong-scaling run.
    Speedup {
        max_ratio: f64,
        at_p: u128,
        /// Largest P such that the atomic algorithm is cheaper for every
        /// P' ≤ P in the sweep.
        alg_better_through: u128,
        region_max_overhead_pct: f64,
        overhead_at_max_ratio_pct: f64,
    },
    /// Fixed-P sweep over the input dimension.
    Crossover {
        crossover_n_i: Option<u64>,
        ratio_at_largest: f64,
        overhead_at_n_i_8192_pct: f64,
    },
    /// Fast rounded grid vs exhaustive best, and sequence bound tightness.
    FastBest {
        fast_equals_best: bool,
        ttmseq_max_gap_pct: f64,
        at_p: u128,
        min_first_ttm_share: f64,
    },
    /// Largest computation overhead across the sweep.
    Overhead { max_overhead_pct: f64 },
    /// Whether the atomic algorithm is never costlier than the sequence.
    Dominance {
        alg_never_worse: bool,
        max_ratio: f64,
        at_p: u128,
    },
}

impl FigureSummary {
    pub fn to_line(&self) -> String {
        match self {
            FigureSummary::Gap { max_gap_pct, at_p } => {
                format!("max_gap_pct={max_gap_pct:.2} at_P={at_p}")
            }
            FigureSummary::Speedup {
                max_ratio,
                at_p,
                alg_better_through,
                region_max_overhead_pct,
                overhead_at_max_ratio_pct,
            } => format!(
                "max_ratio={max_ratio:.3} at_P={at_p} alg_better_through_P={alg_better_through} region_max_overhead_pct={region_max_overhead_pct:.2} overhead_at_max_ratio_pct={overhead_at_max_ratio_pct:.2}"
            ),
            FigureSummary::Crossover {
                crossover_n_i,
                ratio_at_largest,
                overhead_at_n_i_8192_pct,
            } => format!(
                "crossover_n_i={} ratio_at_largest={ratio_at_largest:.3} overhead_at_n_i_8192_pct={overhead_at_n_i_8192_pct:.2}",
                crossover_n_i.map(|v| v.to_string()).unwrap_or_else(|| "none".into())
            ),
            FigureSummary::FastBest {
                fast_equals_best,
                ttmseq_max_gap_pct,
                at_p,
                min_first_ttm_share,
            } => format!(
                "fast_equals_best={fast_equals_best} ttmseq_gap_pct={ttmseq_max_gap_pct:.2} at_P={at_p} min_first_ttm_share={min_first_ttm_share:.3}"
            ),
            FigureSummary::Overhead { max_overhead_pct } => {
                format!("max_overhead_pct={max_overhead_pct:.3}")
            }
            FigureSummary::Dominance {
                alg_never_worse,
                max_ratio,
                at_p,
            } => format!(
                "alg_never_worse={alg_never_worse} max_ratio={max_ratio:.3} at_P={at_p}"
            ),
        }
    }
}

/// Rows plus summary of one experiment.
#[derive(Debug, Clone)]
pub struct FigureResult {
    pub id: FigureId,
    pub shape: MultiTtmShape,
    pub rows: Vec<SweepRow>,
    /// Set for the fixed-P experiment: the input dimension per row.
    pub n_i_per_row: Option<Vec<u64>>,
    pub summary: FigureSummary,
}

fn ratio_rows(rows: &[SweepRow]) -> Vec<(u128, f64)> {
    rows.iter()
        .filter_map(|r| Some((r.p, r.ttmseq? / r.alg_best?)))
        .collect()
}

/// Runs one built-in experiment: all rows, row-level validation, summary.
pub fn run_figure(id: FigureId) -> Result<FigureResult> {
    let config = figure_config(id);
    let opts = SweepOptions {
        curves: config.curves,
        validate: true,
    };
    let (rows, n_i_per_row): (Vec<SweepRow>, Option<Vec<u64>>) = match &config.sweep {
        SweepKind::OverP { p_list } => (sweep(&config.shape, p_list, &opts)?, None),
        SweepKind::OverInputDim { n_dims, r_i, p } => {
            let rows = n_dims
                .par_iter()
                .map(|&n_i| {
                    let shape = MultiTtmShape::cubical(3, n_i, *r_i)?;
                    sweep_row(&shape, *p, &opts)
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, Some(n_dims.clone()))
        }
    };
    let summary = summarize(id, &config, &rows, n_i_per_row.as_deref())?;
    Ok(FigureResult {
        id,
        shape: config.shape,
        rows,
        n_i_per_row,
        summary,
    })
}

fn summarize(
    id: FigureId,
    config: &FigureConfig,
    rows: &[SweepRow],
    n_i_per_row: Option<&[u64]>,
) -> Result<FigureSummary> {
    use FigureId::*;
    Ok(match id {
        F4a | F4b | F4c => {
            let (at_p, max_gap_pct) = rows
                .iter()
                .filter_map(|r| Some((r.p, 100.0 * (r.alg_best? - r.lb?) / r.lb?)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::Internal("no gap rows".into()))?;
            FigureSummary::Gap { max_gap_pct, at_p }
        }
        F5a | F5b | F5c => {
            let ratios = ratio_rows(rows);
            let &(at_p, max_ratio) = ratios
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::Internal("no ratio rows".into()))?;
            let alg_better_through = ratios
                .iter()
                .take_while(|&&(_, ratio)| ratio >= 1.0 - 1e-12)
                .last()
                .map(|&(p, _)| p)
                .unwrap_or(0);
            let region_max_overhead_pct = rows
                .iter()
                .zip(&ratios)
                .filter(|(_, &(_, ratio))| ratio >= 1.0 - 1e-12)
                .filter_map(|(r, _)| r.comp_overhead_pct)
                .fold(0.0, f64::max);
            let overhead_at_max_ratio_pct = rows
                .iter()
                .find(|r| r.p == at_p)
                .and_then(|r| r.comp_overhead_pct)
                .unwrap_or(f64::NAN);
            FigureSummary::Speedup {
                max_ratio,
                at_p,
                alg_better_through,
                region_max_overhead_pct,
                overhead_at_max_ratio_pct,
            }
        }
        F6 => {
            let n_is = n_i_per_row.ok_or_else(|| Error::Internal("fig 6 needs n_i".into()))?;
            let mut crossover = None;
            let mut ratio_at_largest = f64::NAN;
            let mut overhead_at_8192 = f64::NAN;
            for (row, &n_i) in rows.iter().zip(n_is) {
                if let (Some(alg), Some(seq)) = (row.alg_best, row.ttmseq) {
                    let ratio = seq / alg;
                    if ratio > 1.0 && crossover.is_none() {
                        crossover = Some(n_i);
                    }
                    ratio_at_largest = ratio;
                }
                if n_i == 8192 {
                    overhead_at_8192 = row.comp_overhead_pct.unwrap_or(f64::NAN);
                }
            }
            FigureSummary::Crossover {
                crossover_n_i: crossover,
                ratio_at_largest,
                overhead_at_n_i_8192_pct: overhead_at_8192,
            }
        }
        F7a | F7b | F7c => {
            // Exact comparison of the fast rounded grid against the
            // exhaustive best, in integer words.
            let fast_equals_best = match &config.sweep {
                SweepKind::OverP { p_list } => p_list
                    .par_iter()
                    .map(|&p| -> Result<bool> {
                        let (best_grid, _) = exhaustive_best_grid(&config.shape, p)?;
                        let best_words =
                            crate::cost::alg_comm_words_exact(&config.shape, &best_grid)?;
                        let choice = select_grid_real(&config.shape, p)?;
                        let fast = round_grid_pow2(&choice, &config.shape, p)?;
                        let fast_words = crate::cost::alg_comm_words_exact(&config.shape, &fast)?;
                        Ok(fast_words == best_words)
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .all(|b| b),
                _ => false,
            };
            let (at_p, ttmseq_max_gap_pct) = rows
                .iter()
                .filter_map(|r| {
                    let lb = r.ttmseq_lb.filter(|&v| v > 0.0)?;
                    let seq = r.ttmseq?;
                    Some((r.p, 100.0 * (seq - lb) / lb))
                })
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::Internal("no gap rows".into()))?;
            let min_first_ttm_share = rows
                .iter()
                .filter_map(|r| {
                    let lb = r.ttmseq_lb.filter(|&v| v > 0.0)?;
                    Some(r.first_ttm_lb.unwrap_or(0.0) / lb)
                })
                .fold(f64::INFINITY, f64::min);
            FigureSummary::FastBest {
                fast_equals_best,
                ttmseq_max_gap_pct,
                at_p,
                min_first_ttm_share,
            }
        }
        F8a | F8b | F8c => FigureSummary::Overhead {
            max_overhead_pct: rows
                .iter()
                .filter_map(|r| r.comp_overhead_pct)
                .fold(0.0, f64::max),
        },
        F9a | F9b | F9c => {
            let ratios = ratio_rows(rows);
            let alg_never_worse = ratios.iter().all(|&(_, ratio)| ratio >= 1.0 - 1e-12);
            let &(at_p, max_ratio) = ratios
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::Internal("no ratio rows".into()))?;
            FigureSummary::Dominance {
                alg_never_worse,
                max_ratio,
                at_p,
            }
        }
    })
}
