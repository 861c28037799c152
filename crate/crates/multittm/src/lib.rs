//! Communication analysis for parallel Multi-TTM: lower bounds, optimal
//! processor grid construction, analytic cost models for the atomic grid
//! algorithm and the TTM-in-sequence alternative, and a deterministic
//! rank-level simulator that checks the cost model against real dense data.

pub mod bounds;
pub mod cost;
pub mod error;
pub mod figures;
pub mod grid;
pub mod shape;
pub mod sim;
pub mod solver;

pub use bounds::{cubical_lb, first_ttm_lb, matmul_lb, multi_ttm_lb, ttm_seq_lb, LbBreakdown};
pub use cost::{
    alg_comm_cost, alg_comm_cost_int, alg_comm_words_exact, alg_compute, comp_overhead, sweep,
    sweep_row, ttm_seq_comm_cost, ttm_seq_compute, CostBreakdown, Curves, SeqCostBreakdown,
    SweepOptions, SweepRow, SWEEP_CSV_HEADER,
};
pub use error::{Error, Result};
pub use figures::{
    figure_config, parse_p_list, pow2_range, run_figure, FigureId, FigureResult, FigureSummary,
    ALL_FIGURES,
};
pub use grid::{
    exhaustive_best_grid, exhaustive_best_ttm_seq_grid, round_grid_pow2, select_grid_real,
    AdjustStage, Adjustment, GridChoice, Scenario, Side,
};
pub use shape::{
    canonicalize, suffix_products, CanonicalMap, MultiTtmShape, ProcGrid, RealGrid, SuffixProducts,
};
pub use sim::{
    oracle_atomic, oracle_sequence, oracle_sequence_counted, seeded_data, simulate_alg, ttm,
    CollectiveKind, CollectiveRecord, DenseTensor, FactorMatrix, SimResult,
};
pub use solver::{
    solve, solve_matrix_term, solve_tensor_term, verify_kkt, CappedMinSumProblem, KktCertificate,
    OptSolution,
};
