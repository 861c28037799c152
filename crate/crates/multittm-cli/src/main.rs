//! Command-line driver: single-instance queries (bounds, grids, costs),
//! simulator runs, generic sweeps, and reproduction of the built-in
//! experiments as CSV/JSON data files.
//!
//! Exit codes: 0 success, 2 invalid input, 1 internal invariant failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use multittm::{
    alg_comm_cost_int, canonicalize, exhaustive_best_grid, multi_ttm_lb, oracle_atomic,
    parse_p_list, round_grid_pow2, run_figure, seeded_data, select_grid_real, simulate_alg, sweep,
    ttm_seq_comm_cost, Curves, Error, FigureId, FigureResult, MultiTtmShape, ProcGrid,
    SweepOptions, SweepRow, SWEEP_CSV_HEADER,
};

#[derive(Parser)]
#[command(
    name = "multittm",
    about = "Communication bounds, optimal grids, cost models, and a rank-level simulator for parallel Multi-TTM",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Communication lower bound for an instance.
    Lb(LbArgs),
    /// Construct grids: real-valued, fast-rounded, and exhaustive-best.
    Grid(GridArgs),
    /// Cost breakdown of a given grid (or of the exhaustive best).
    Cost(CostArgs),
    /// Logical rank-level execution on seeded random data.
    Simulate(SimulateArgs),
    /// Sweep every requested curve over a list of processor counts.
    Sweep(SweepArgs),
    /// Reproduce a built-in experiment and write its data file.
    Repro(ReproArgs),
}

#[derive(Args)]
struct ShapeArgs {
    /// Input dims, comma separated (accepts 2^k).
    #[arg(long)]
    n: Option<String>,
    /// Output dims, comma separated (accepts 2^k).
    #[arg(long)]
    r: Option<String>,
    /// Key-value config file with `n = ...` and `r = ...` lines.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ShapeArgs {
    fn resolve(&self) -> Result<MultiTtmShape, Error> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            // The config may carry an extra P line for sweeps; ignore it here.
            let filtered: String = text
                .lines()
                .filter(|l| !l.trim_start().starts_with('P'))
                .collect::<Vec<_>>()
                .join("\n");
            return MultiTtmShape::parse_config(&filtered);
        }
        match (&self.n, &self.r) {
            (Some(n), Some(r)) => MultiTtmShape::parse_text(&format!("n={n} r={r}")),
            _ => Err(Error::Parse("need --n and --r (or --config)".into())),
        }
    }
}

#[derive(Args)]
struct LbArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Processor count (accepts 2^k).
    #[arg(long = "P")]
    p: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long = "P")]
    p: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Grid as `p=2,2,2 q=1,1,1` (or with `;`); omit to use the best grid.
    #[arg(long)]
    grid: Option<String>,
    /// Processor count, used when no grid is given.
    #[arg(long = "P")]
    p: Option<String>,
    /// Also report the sequence algorithm on this d-dimensional grid
    /// (comma separated).
    #[arg(long = "seq-grid")]
    seq_grid: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Grid as `p=...;q=...`; must divide the dims.
    #[arg(long)]
    grid: String,
    /// Seed for the input tensor and matrices.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write one line per collective to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Processor counts: `2^a..2^b`, a comma list, or one value.
    #[arg(long = "P")]
    p: String,
    /// Curves to evaluate (default: all).
    #[arg(long, value_delimiter = ',')]
    curves: Vec<CurveName>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CurveName {
    Lb,
    AlgBest,
    AlgFast,
    Ttmseq,
    TtmseqLb,
    FirstTtmLb,
    Overhead,
}

#[derive(Args)]
struct ReproArgs {
    /// Experiment id: 4a 4b 4c 5a 5b 5c 6 7a 7b 7c 8a 8b 8c 9a 9b 9c.
    figure: String,
    /// Output path (default fig<ID>.csv or .json).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Override the built-in shape (and optionally `P = ...`) from a
    /// key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Lb(args) => cmd_lb(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Cost(args) => cmd_cost(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Repro(args) => cmd_repro(args),
    }
}

fn parse_p(s: &str) -> Result<u128, Error> {
    Ok(multittm::shape::parse_dim(s)? as u128)
}

fn cmd_lb(args: LbArgs) -> Result<(), Error> {
    let raw = args.shape.resolve()?;
    let (shape, map) = canonicalize(&raw);
    let p = parse_p(&args.p)?;
    let b = multi_ttm_lb(&shape, p)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "shape": shape,
                "canonical_of": map.original,
                "P": p.to_string(),
                "bound": b,
            }))
            .unwrap()
        );
    } else {
        if shape != raw {
            println!("canonicalized to {shape}");
        }
        println!(
            "A={} (case {}), B={} (case {}), owned={}",
            b.matrix_access, b.matrix_case, b.tensor_access, b.tensor_case, b.owned
        );
        println!(
            "lb={} (matrix part {}, tensor part {})",
            b.lb, b.lb_matrix, b.lb_tensor
        );
    }
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<(), Error> {
    let raw = args.shape.resolve()?;
    let (shape, map) = canonicalize(&raw);
    let p = parse_p(&args.p)?;
    let b = multi_ttm_lb(&shape, p)?;
    let choice = select_grid_real(&shape, p)?;
    let real_cost = multittm::alg_comm_cost(&shape, &choice.grid)?;
    let within = real_cost.total_bandwidth <= 3.0 * b.lb + 1e-6 * b.lb + 1e-6;
    let fast = if shape.is_pow2() && p.is_power_of_two() {
        Some(round_grid_pow2(&choice, &shape, p)?)
    } else {
        None
    };
    let (best, best_cost) = exhaustive_best_grid(&shape, p)?;

    if args.json {
        let fast_info = fast.as_ref().map(|g| {
            json!({
                "grid": g,
                "cost": alg_comm_cost_int(&shape, g).map(|c| c.total_bandwidth).ok(),
                "original_orientation": map.grid_to_original(g),
            })
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "shape": shape,
                "P": p.to_string(),
                "lb": b.lb,
                "real": choice,
                "real_cost": real_cost.total_bandwidth,
                "within_3x_lb": within,
                "fast": fast_info,
                "best": { "grid": best, "cost": best_cost,
                          "original_orientation": map.grid_to_original(&best) },
            }))
            .unwrap()
        );
        return Ok(());
    }

    if shape != raw {
        println!("canonicalized to {shape} (mode order {:?}, swapped={})", map.perm, map.swapped);
    }
    println!("scenario {} | matrix case {}", choice.scenario, choice.matrix_case);
    let fmt_real = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    println!(
        "real grid:  p={} q={}  cost={}  (3x-lb check: {})",
        fmt_real(&choice.grid.p),
        fmt_real(&choice.grid.q),
        real_cost.total_bandwidth,
        if within { "pass" } else { "FAIL" }
    );
    if !choice.adjustments.is_empty() {
        for adj in &choice.adjustments {
            println!("  fix-up {:?} on {:?} side", adj.stage, adj.side);
        }
    }
    match &fast {
        Some(g) => {
            let cost = alg_comm_cost_int(&shape, g)?.total_bandwidth;
            println!("fast grid:  {g}  cost={cost}");
        }
        None => println!("fast grid:  (requires power-of-two dims and P)"),
    }
    println!("best grid:  {best}  cost={best_cost}");
    println!("lower bound: {}", b.lb);
    if shape != raw {
        if let Some(g) = &fast {
            println!("fast grid for original shape: {}", map.grid_to_original(g));
        }
        println!("best grid for original shape: {}", map.grid_to_original(&best));
    }
    Ok(())
}

fn cmd_cost(args: CostArgs) -> Result<(), Error> {
    let shape = args.shape.resolve()?;
    let grid = match (&args.grid, &args.p) {
        (Some(text), _) => ProcGrid::parse_text(text)?,
        (None, Some(p)) => exhaustive_best_grid(&shape, parse_p(p)?)?.0,
        (None, None) => return Err(Error::Parse("need --grid or --P".into())),
    };
    let br = alg_comm_cost_int(&shape, &grid)?;
    let p = grid.total();
    let seq = match &args.seq_grid {
        Some(text) => {
            let tilde: Vec<f64> = text
                .split(',')
                .map(|t| Ok(multittm::shape::parse_dim(t)? as f64))
                .collect::<Result<_, Error>>()?;
            Some(ttm_seq_comm_cost(&shape, &tilde, None)?)
        }
        None => None,
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "shape": shape,
                "grid": grid,
                "cost": br,
                "ttm_seq": seq,
            }))
            .unwrap()
        );
        return Ok(());
    }
    println!("grid {grid} on {shape} (P={p})");
    println!(
        "tensor_in={} tensor_out={} matrix_terms={:?} owned={}",
        br.tensor_in, br.tensor_out, br.matrix_terms, br.owned
    );
    println!(
        "total_bandwidth={} latency={} flops={} exact_blocks={}",
        br.total_bandwidth, br.latency, br.flops, br.exact_blocks
    );
    if let Some(seq) = seq {
        println!(
            "ttm-seq: intermediate_terms={:?} matrix_terms={:?} owned={} total={}",
            seq.intermediate_terms, seq.matrix_terms, seq.owned, seq.total
        );
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let shape = args.shape.resolve()?;
    let grid = ProcGrid::parse_text(&args.grid)?;
    let work = shape.n_total().saturating_mul(shape.r_total());
    if work > 10_000_000 {
        return Err(Error::LoadBalance(format!(
            "instance has {work} multiply terms; the simulator is for desk-scale runs (<= 1e7)"
        )));
    }
    let (x, mats) = seeded_data(&shape, args.seed);
    let res = simulate_alg(&shape, &grid, &x, &mats)?;
    let oracle = oracle_atomic(&x, &mats)?;
    let err = res.y.max_rel_err(&oracle);
    let verified = err < 1e-12;
    let words_ok = alg_comm_words_match(&shape, &grid, &res);
    if let Some(path) = &args.trace {
        std::fs::write(path, res.trace() + "\n")
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
    }
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "shape": shape,
                "grid": grid,
                "seed": args.seed,
                "words_per_rank": res.per_rank_words[0].to_string(),
                "critical_path_words": res.critical_path_words.to_string(),
                "flops_per_rank": res.flops_per_rank[0].to_string(),
                "max_rel_err": err,
                "verified": verified,
                "words_match_analytic": words_ok,
                "collectives": res.collectives,
            }))
            .unwrap()
        );
    } else {
        println!(
            "words_per_rank={} verified={verified}",
            res.per_rank_words[0]
        );
        println!(
            "critical_path_words={} flops_per_rank={} max_rel_err={err:.3e} words_match_analytic={words_ok}",
            res.critical_path_words, res.flops_per_rank[0]
        );
    }
    if !verified || !words_ok {
        return Err(Error::Internal("simulation failed verification".into()));
    }
    Ok(())
}

fn alg_comm_words_match(
    shape: &MultiTtmShape,
    grid: &ProcGrid,
    res: &multittm::SimResult,
) -> bool {
    multittm::alg_comm_words_exact(shape, grid)
        .map(|w| res.per_rank_words.iter().all(|&x| x == w))
        .unwrap_or(false)
}

fn curves_from(names: &[CurveName]) -> Curves {
    if names.is_empty() {
        return Curves::all();
    }
    let mut c = Curves::none();
    for name in names {
        match name {
            CurveName::Lb => c.lb = true,
            CurveName::AlgBest => c.alg_best = true,
            CurveName::AlgFast => c.alg_fast = true,
            CurveName::Ttmseq => c.ttmseq = true,
            CurveName::TtmseqLb => c.ttmseq_lb = true,
            CurveName::FirstTtmLb => c.first_ttm_lb = true,
            CurveName::Overhead => c.overhead = true,
        }
    }
    c
}

fn rows_to_csv(rows: &[SweepRow], n_i: Option<&[u64]>) -> String {
    let mut out = String::new();
    match n_i {
        Some(n_is) => {
            out.push_str(&format!("n_i,{SWEEP_CSV_HEADER}\n"));
            for (row, n) in rows.iter().zip(n_is) {
                out.push_str(&format!("{n},{}\n", row.to_csv()));
            }
        }
        None => {
            out.push_str(SWEEP_CSV_HEADER);
            out.push('\n');
            for row in rows {
                out.push_str(&row.to_csv());
                out.push('\n');
            }
        }
    }
    out
}

fn rows_to_json(shape: &MultiTtmShape, rows: &[SweepRow], n_i: Option<&[u64]>) -> String {
    let rows_json: Vec<_> = match n_i {
        Some(n_is) => rows
            .iter()
            .zip(n_is)
            .map(|(row, n)| {
                let mut v = serde_json::to_value(row).unwrap();
                v["n_i"] = json!(n);
                v
            })
            .collect(),
        None => rows
            .iter()
            .map(|r| serde_json::to_value(r).unwrap())
            .collect(),
    };
    serde_json::to_string_pretty(&json!({
        "meta": {
            "shape": shape,
            "version": env!("CARGO_PKG_VERSION"),
            "git_hash": option_env!("GIT_HASH").unwrap_or("unknown"),
        },
        "rows": rows_json,
    }))
    .unwrap()
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let raw = args.shape.resolve()?;
    let (shape, _) = canonicalize(&raw);
    let p_list = parse_p_list(&args.p)?;
    let opts = SweepOptions {
        curves: curves_from(&args.curves),
        validate: true,
    };
    let rows = sweep(&shape, &p_list, &opts)?;
    let text = match args.format {
        OutputFormat::Csv => rows_to_csv(&rows, None),
        OutputFormat::Json => rows_to_json(&shape, &rows, None),
    };
    emit(&text, &args.out)
}

fn cmd_repro(args: ReproArgs) -> Result<(), Error> {
    let id: FigureId = args.figure.parse()?;
    let result: FigureResult = match &args.config {
        None => run_figure(id)?,
        Some(path) => {
            // Same curves as the built-in experiment, custom shape/P range.
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            let p_line = text
                .lines()
                .map(str::trim)
                .find(|l| l.starts_with("P"))
                .and_then(|l| l.split_once('='))
                .map(|(_, v)| v.trim().to_string());
            let filtered: String = text
                .lines()
                .filter(|l| !l.trim_start().starts_with('P'))
                .collect::<Vec<_>>()
                .join("\n");
            let raw = MultiTtmShape::parse_config(&filtered)?;
            let (shape, _) = canonicalize(&raw);
            let config = multittm::figure_config(id);
            let p_list = match p_line {
                Some(range) => parse_p_list(&range)?,
                None => {
                    let top = shape.p_max().trailing_zeros();
                    multittm::pow2_range(1, top)
                }
            };
            let opts = SweepOptions {
                curves: config.curves,
                validate: true,
            };
            let rows = sweep(&shape, &p_list, &opts)?;
            FigureResult {
                id,
                shape,
                rows,
                n_i_per_row: None,
                summary: multittm::FigureSummary::Overhead {
                    max_overhead_pct: f64::NAN,
                },
            }
        }
    };
    let default_name = format!(
        "fig{id}.{}",
        match args.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    );
    let out = Some(args.out.clone().unwrap_or_else(|| PathBuf::from(default_name)));
    let text = match args.format {
        OutputFormat::Csv => rows_to_csv(&result.rows, result.n_i_per_row.as_deref()),
        OutputFormat::Json => rows_to_json(&result.shape, &result.rows, result.n_i_per_row.as_deref()),
    };
    emit(&text, &out)?;
    if args.config.is_none() {
        println!("fig {id}: {}", result.summary.to_line());
    } else {
        println!("fig {id} (config override): rows written");
    }
    if let Some(path) = &out {
        println!("wrote {}", path.display());
    }
    Ok(())
}
