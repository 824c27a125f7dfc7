//! Command-line front end for the control-protocol simulator: single
//! runs, parameter sweeps, the two comparison presets, correctability
//! checks and the adaptive estimation loop.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use fbdd::conditions::{check_blocks, check_mixing, solve_qubit_feedback, FeedbackSynthesis, LdStatus};
use fbdd::cxmat::{fro_norm, is_normal, trace, CMatrix};
use fbdd::estimate::{tune, EstimationState, TuneConfig};
use fbdd::feedback::RunMode;
use fbdd::model::QubitErrorModel;
use fbdd::protocols::{run as run_protocol, time_average, ProtocolName, ProtocolRun};

use config::{pick, pick_opt, FileConfig};
use output::{resolve_output, Cell, Format, Table};

#[derive(Parser)]
#[command(name = "fbdd", version, about = "Dynamical decoupling and single-bit feedback protocol simulator")]
struct Cli {
    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Estimated qubit splitting (frequency unit).
    #[arg(long)]
    omega_z: Option<f64>,
    /// Error component along x, in units of omega_z.
    #[arg(long)]
    eps_x: Option<f64>,
    /// Error component along y.
    #[arg(long)]
    eps_y: Option<f64>,
    /// Error component along z.
    #[arg(long)]
    eps_z: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct OutputArgs {
    /// Output file path (single-name paths resolve under FBDD_OUT_DIR).
    #[arg(long)]
    out: Option<String>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Comma-separated protocol names, e.g. free,seldd-x,cp-x,maxdd:ixzy,fdd,fed,fed-plain,def.
    #[arg(long, value_delimiter = ',')]
    protocols: Option<Vec<String>>,
    /// Total evolution time in 1/omega_z units.
    #[arg(long)]
    t_total: Option<f64>,
    /// Pulse spacing in 1/omega_z units.
    #[arg(long)]
    delta_t: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, value_delimiter = ',')]
    protocols: Option<Vec<String>>,
    /// Sweep axis: delta-t or error-norm.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated grid values (Δt values, or error-norm multipliers).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    t_total: Option<f64>,
    /// Pulse spacing used by the error-norm sweep.
    #[arg(long)]
    delta_t: Option<f64>,
}

#[derive(Args, Debug)]
struct FigArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    t_total: Option<f64>,
    #[arg(long)]
    delta_t: Option<f64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// JSON matrix file: {"dims": [ds, de], "matrix": [[[re, im], ...], ...]}.
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long)]
    ds: Option<usize>,
    #[arg(long)]
    de: Option<usize>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Feedback cycle time for both estimation protocols.
    #[arg(long)]
    t_c: Option<f64>,
    #[arg(long)]
    delta_t: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Measurement repetitions per iteration in sampled mode.
    #[arg(long)]
    trials: Option<usize>,
    /// exact or sampled.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    eta_x: Option<f64>,
    #[arg(long)]
    eta_z: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity-versus-time traces for one or more protocols.
    Run(RunArgs),
    /// Final and time-averaged fidelity over a Δt or error-norm grid.
    Sweep(SweepArgs),
    /// Selective-protocol comparison preset (fdd vs seldd-x/y with envelopes).
    Fig1(FigArgs),
    /// Maximal-protocol comparison preset (maxdd, fed, fed-plain, def).
    Fig2(FigArgs),
    /// Correctability report for a joint propagator matrix file.
    Check(CheckArgs),
    /// Adaptive Hamiltonian estimation loop.
    Estimate(EstimateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Clap help/version requests are not errors.
            if e.use_stderr() {
                eprintln!("{}", e);
                return ExitCode::from(1);
            }
            print!("{}", e);
            return ExitCode::SUCCESS;
        }
    };

    let file_cfg = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {}", e);
                return ExitCode::from(1);
            }
        },
        None => FileConfig::default(),
    };

    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, &file_cfg),
        Command::Sweep(args) => cmd_sweep(args, &file_cfg),
        Command::Fig1(args) => cmd_fig1(args, &file_cfg),
        Command::Fig2(args) => cmd_fig2(args, &file_cfg),
        Command::Check(args) => cmd_check(args, &file_cfg),
        Command::Estimate(args) => cmd_estimate(args, &file_cfg),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 1 config error, 2 numerical failure, 3 I/O error.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
        if let Some(lib) = cause.downcast_ref::<fbdd::Error>() {
            return match lib {
                fbdd::Error::Numerical(_) | fbdd::Error::Linalg(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn build_model(args: &ModelArgs, cfg: &FileConfig) -> QubitErrorModel {
    QubitErrorModel::new(
        pick(args.omega_z, cfg.omega_z, 1.0),
        pick(args.eps_x, cfg.eps_x, 0.0),
        pick(args.eps_y, cfg.eps_y, 0.0),
        pick(args.eps_z, cfg.eps_z, 0.0),
    )
}

fn output_target(args: &OutputArgs, cfg: &FileConfig, default_name: &str) -> anyhow::Result<(PathBuf, Format)> {
    let name = pick(args.out.clone(), cfg.output_path.clone(), default_name.to_string());
    let format = Format::parse(&pick(args.format.clone(), cfg.format.clone(), "csv".into()))?;
    Ok((resolve_output(&name), format))
}

fn parse_protocols(names: &[String]) -> anyhow::Result<Vec<ProtocolName>> {
    names
        .iter()
        .map(|s| ProtocolName::from_str(s).map_err(anyhow::Error::from))
        .collect()
}

fn cmd_run(args: &RunArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    cfg.check_experiment("run")?;
    let model = build_model(&args.model, cfg);
    let names = parse_protocols(&pick(
        args.protocols.clone(),
        cfg.protocols.clone(),
        vec!["free".to_string()],
    ))?;
    if names.is_empty() {
        anyhow::bail!("no protocols requested");
    }
    let t_total = pick(args.t_total, cfg.t_total, 10.0);
    let dt = pick(args.delta_t, cfg.delta_t, 0.05);
    let seed = pick(args.seed, cfg.seed, 0);

    let runs: Vec<ProtocolRun> = names
        .iter()
        .map(|n| ProtocolRun::new(n.clone(), model, t_total, dt).map(|r| r.with_seed(seed)))
        .collect::<fbdd::Result<_>>()?;
    let traces: Vec<Vec<(f64, f64)>> = runs
        .par_iter()
        .map(run_protocol)
        .collect::<fbdd::Result<_>>()?;

    // Emit on the coarsest cycle grid; every finer cycle time must divide it.
    let coarse = runs.iter().map(|r| r.t_c).fold(0.0f64, f64::max);
    let mut strides = Vec::new();
    for r in &runs {
        let ratio = coarse / r.t_c;
        if (ratio - ratio.round()).abs() > 1e-9 {
            anyhow::bail!(
                "protocol cycle times {} and {} are incommensurate; run them separately",
                r.t_c,
                coarse
            );
        }
        strides.push(ratio.round() as usize);
    }
    let mut rows_available = traces
        .iter()
        .zip(&strides)
        .map(|(t, s)| (t.len() - 1) / s)
        .min()
        .unwrap();
    if let Some(cap) = cfg.cycles {
        rows_available = rows_available.min(cap);
    }

    let mut header = vec!["t".to_string()];
    header.extend(names.iter().map(|n| format!("f_{}", n)));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header_refs);
    for k in 0..=rows_available {
        let mut row = vec![Cell::Float(k as f64 * coarse)];
        for (trace, stride) in traces.iter().zip(&strides) {
            row.push(Cell::Float(trace[k * stride].1));
        }
        table.push(row);
    }
    let (path, format) = output_target(&args.output, cfg, "run.csv")?;
    table.write(&path, format)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    let axis = pick(args.axis.clone(), cfg.axis.clone(), "delta-t".into());
    match axis.as_str() {
        "delta-t" => cfg.check_experiment("sweep-dt")?,
        "error-norm" => cfg.check_experiment("sweep-error")?,
        other => anyhow::bail!("unknown sweep axis '{}'", other),
    }
    let model = build_model(&args.model, cfg);
    let names = parse_protocols(&pick(
        args.protocols.clone(),
        cfg.protocols.clone(),
        vec!["maxdd".into(), "fed".into(), "def".into()],
    ))?;
    let grid = pick_opt(args.grid.clone(), cfg.grid.clone())
        .ok_or_else(|| anyhow::anyhow!("sweep requires a --grid"))?;
    if grid.is_empty() {
        anyhow::bail!("sweep grid is empty");
    }
    let t_total = pick(args.t_total, cfg.t_total, 20.0);
    let dt_base = pick(args.delta_t, cfg.delta_t, 0.1);

    let jobs: Vec<(usize, ProtocolName, f64)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, &g)| names.iter().map(move |n| (i, n.clone(), g)))
        .collect();

    let results: Vec<(usize, String, f64, f64, f64)> = jobs
        .par_iter()
        .map(|(i, name, g)| {
            let (m, dt) = match axis.as_str() {
                "delta-t" => (model, *g),
                _ => (
                    QubitErrorModel::new(
                        model.omega_z,
                        model.eps_x * g,
                        model.eps_y * g,
                        model.eps_z * g,
                    ),
                    dt_base,
                ),
            };
            let spec = ProtocolRun::new(name.clone(), m, t_total, dt)?;
            let trace = run_protocol(&spec)?;
            Ok((
                *i,
                name.to_string(),
                *g,
                trace.last().unwrap().1,
                time_average(&trace),
            ))
        })
        .collect::<fbdd::Result<_>>()?;

    let axis_col = if axis == "delta-t" { "delta_t" } else { "error_scale" };
    let mut table = Table::new(&[axis_col, "protocol", "f_final", "f_avg"]);
    let mut sorted = results;
    sorted.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    for (_, name, g, f_final, f_avg) in sorted {
        table.push(vec![
            Cell::Float(g),
            Cell::Text(name),
            Cell::Float(f_final),
            Cell::Float(f_avg),
        ]);
    }
    let (path, format) = output_target(&args.output, cfg, "sweep.csv")?;
    table.write(&path, format)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_fig1(args: &FigArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    cfg.check_experiment("fig1")?;
    // Preset: eps_x = omega/20, eps_y = omega/10, omega*dt = 0.04, omega*T = 30.
    let model = QubitErrorModel::new(
        pick(args.model.omega_z, cfg.omega_z, 1.0),
        pick(args.model.eps_x, cfg.eps_x, 0.05),
        pick(args.model.eps_y, cfg.eps_y, 0.1),
        pick(args.model.eps_z, cfg.eps_z, 0.0),
    );
    let t_total = pick(args.t_total, cfg.t_total, 30.0);
    let dt = pick(args.delta_t, cfg.delta_t, 0.04);

    let names = [
        ProtocolName::Fdd,
        ProtocolName::SelDd(fbdd::pauli::PauliAxis::X),
        ProtocolName::SelDd(fbdd::pauli::PauliAxis::Y),
    ];
    let traces: Vec<Vec<(f64, f64)>> = names
        .par_iter()
        .map(|n| run_protocol(&ProtocolRun::new(n.clone(), model, t_total, dt)?))
        .collect::<fbdd::Result<_>>()?;

    let rows = traces.iter().map(|t| t.len()).min().unwrap();
    let mut table = Table::new(&[
        "t",
        "f_fdd",
        "f_seldd_x",
        "f_seldd_y",
        "envelope_x",
        "envelope_y",
    ]);
    for ((&(t, f_fdd), &(_, f_x)), &(_, f_y)) in traces[0][..rows]
        .iter()
        .zip(&traces[1][..rows])
        .zip(&traces[2][..rows])
    {
        table.push(vec![
            Cell::Float(t),
            Cell::Float(f_fdd),
            Cell::Float(f_x),
            Cell::Float(f_y),
            Cell::Float((model.eps_x * t).cos().powi(2)),
            Cell::Float((model.eps_y * t).cos().powi(2)),
        ]);
    }
    let (path, format) = output_target(&args.output, cfg, "fig1.csv")?;
    table.write(&path, format)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_fig2(args: &FigArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    cfg.check_experiment("fig2")?;
    // Preset: eps_x = eps_y = omega/10, omega*dt = 0.32, omega*T = 120.
    let model = QubitErrorModel::new(
        pick(args.model.omega_z, cfg.omega_z, 1.0),
        pick(args.model.eps_x, cfg.eps_x, 0.1),
        pick(args.model.eps_y, cfg.eps_y, 0.1),
        pick(args.model.eps_z, cfg.eps_z, 0.0),
    );
    let t_total = pick(args.t_total, cfg.t_total, 120.0);
    let dt = pick(args.delta_t, cfg.delta_t, 0.32);

    let names = [
        ProtocolName::MaxDd(fbdd::protocols::DEFAULT_MAXDD_PATH),
        ProtocolName::Fed,
        ProtocolName::FedPlain,
        ProtocolName::Def,
    ];
    let runs: Vec<ProtocolRun> = names
        .iter()
        .map(|n| ProtocolRun::new(n.clone(), model, t_total, dt))
        .collect::<fbdd::Result<_>>()?;
    let traces: Vec<Vec<(f64, f64)>> = runs
        .par_iter()
        .map(run_protocol)
        .collect::<fbdd::Result<_>>()?;

    // Sample on the coarsest (maxdd) grid; the feedback cycles are half as long.
    let coarse = runs[0].t_c;
    let mut strides = Vec::new();
    for r in &runs {
        let ratio = coarse / r.t_c;
        anyhow::ensure!((ratio - ratio.round()).abs() < 1e-9, "incommensurate cycles");
        strides.push(ratio.round() as usize);
    }
    let rows = traces
        .iter()
        .zip(&strides)
        .map(|(t, s)| (t.len() - 1) / s)
        .min()
        .unwrap();

    let mut table = Table::new(&["t", "f_maxdd", "f_fed", "f_fed_plain", "f_def"]);
    for k in 0..=rows {
        let mut row = vec![Cell::Float(k as f64 * coarse)];
        for (trace, stride) in traces.iter().zip(&strides) {
            row.push(Cell::Float(trace[k * stride].1));
        }
        table.push(row);
    }
    let (path, format) = output_target(&args.output, cfg, "fig2.csv")?;
    table.write(&path, format)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn complex_json(z: &num_complex::Complex64) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}

fn matrix_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<serde_json::Value>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_json(&m[[i, j]])).collect())
        .collect();
    serde_json::json!(rows)
}

fn parse_matrix_file(path: &str) -> anyhow::Result<(CMatrix, usize, usize)> {
    #[derive(serde::Deserialize)]
    struct MatrixFile {
        dims: [usize; 2],
        matrix: Vec<Vec<[f64; 2]>>,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!(std::io::Error::new(e.kind(), format!("{}: {}", path, e))))?;
    let parsed: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("{}: parse error at line {}, column {}", path, e.line(), e.column()))?;
    let [ds, de] = parsed.dims;
    let n = ds * de;
    anyhow::ensure!(
        parsed.matrix.len() == n && parsed.matrix.iter().all(|r| r.len() == n),
        "{}: matrix must be {}x{} for dims [{}, {}]",
        path,
        n,
        n,
        ds,
        de
    );
    let mut m = fbdd::cxmat::zeros(n, n);
    for (i, row) in parsed.matrix.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[[i, j]] = num_complex::Complex64::new(re, im);
        }
    }
    Ok((m, ds, de))
}

fn cmd_check(args: &CheckArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    cfg.check_experiment("check")?;
    let file = pick_opt(args.matrix.clone(), cfg.matrix_file.clone())
        .ok_or_else(|| anyhow::anyhow!("check requires a --matrix file"))?;
    let (m, file_ds, file_de) = parse_matrix_file(&file)?;
    let ds = pick(args.ds, cfg.ds, file_ds);
    let de = pick(args.de, cfg.de, file_de);
    anyhow::ensure!(ds * de == m.nrows(), "dims [{}, {}] do not match the matrix", ds, de);

    let blocks = check_blocks(&m, ds, de)?;
    let ld_status = match blocks.ld.status {
        LdStatus::Certified => "certified",
        LdStatus::NotCommuting => "not-commuting",
        LdStatus::Unresolved => "unresolved",
    };

    let mut report = serde_json::json!({
        "dims": [ds, de],
        "is_ld": blocks.ld.is_ld(),
        "ld": {
            "status": ld_status,
            "commutator_residual": blocks.ld.commutator_residual,
            "offdiag_residual": blocks.ld.offdiag_residual,
            "diagonalizer": blocks.ld.diagonalizer.as_ref().map(matrix_json),
        },
        "correctable": blocks.correctable,
        "trivial": blocks.trivial,
        "direction_residual": blocks.direction_residual,
        "modulus_spread": blocks.modulus_spread,
        "d_bar": blocks.d_bar.as_ref().map(|d| {
            serde_json::Value::Array(d.iter().map(complex_json).collect())
        }),
        "block_mixing": blocks.mixing.as_ref().map(|mx| {
            serde_json::json!({
                "satisfied": mx.satisfied,
                "residual": mx.residual,
                "spectrum": mx.spectrum.iter().map(complex_json).collect::<Vec<_>>(),
                "solution": mx.solution.as_ref().map(matrix_json),
            })
        }),
    });

    // Direct spectrum test of the input itself when it qualifies.
    if trace(&m).norm() <= 1e-10 * fro_norm(&m).max(1.0) && is_normal(&m, 1e-10) {
        let mx = check_mixing(&m)?;
        report["input_mixing"] = serde_json::json!({
            "satisfied": mx.satisfied,
            "residual": mx.residual,
            "spectrum": mx.spectrum.iter().map(complex_json).collect::<Vec<_>>(),
            "solution": mx.solution.as_ref().map(matrix_json),
        });
    }

    if ds == 2 {
        report["qubit_feedback"] = match solve_qubit_feedback(&m, de)? {
            FeedbackSynthesis::Solved(sol) => serde_json::json!({
                "solved": true,
                "system_unitary": matrix_json(&sol.system_unitary),
                "correction": matrix_json(&sol.correction),
                "plus_residual": sol.plus_residual,
                "minus_residual": sol.minus_residual,
            }),
            FeedbackSynthesis::NotLd(ld) => serde_json::json!({
                "solved": false,
                "commutator_residual": ld.commutator_residual,
            }),
        };
    }

    let (path, _) = output_target(&args.output, cfg, "check.json")?;
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes)
        .map_err(|e| anyhow::anyhow!(std::io::Error::new(e.kind(), format!("{}: {}", path.display(), e))))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs, cfg: &FileConfig) -> anyhow::Result<()> {
    cfg.check_experiment("estimate")?;
    let model = build_model(&args.model, cfg);
    let t_c = pick(args.t_c, cfg.t_c, 1.0);
    let dt = pick(args.delta_t, cfg.delta_t, t_c / 1024.0);
    let iterations = pick(args.iterations, cfg.iterations, 10);
    let trials = pick(args.trials, cfg.trials, 10_000);
    let mode = match pick(args.mode.clone(), cfg.mode.clone(), "exact".into()).as_str() {
        "exact" => RunMode::Exact,
        "sampled" => RunMode::Sampled,
        other => anyhow::bail!("unknown mode '{}'", other),
    };
    let seed = pick(args.seed, cfg.seed, 0);
    let eta_x = pick(args.eta_x, cfg.eta_x, 0.5);
    let eta_z = pick(args.eta_z, cfg.eta_z, 0.5);

    let state = EstimationState::new([0.0, 0.0, model.omega_z], eta_x, eta_z)
        .map_err(anyhow::Error::from)?;
    let tune_cfg = TuneConfig {
        t_c,
        dt,
        trials,
        mode,
        iterations,
        p1_floor: 1e-6,
    };
    let out = tune(state, &model, &tune_cfg, seed)?;

    let mut table = Table::new(&[
        "iteration",
        "p1_x",
        "p1_z",
        "est_eps_x",
        "est_eps_z",
        "sign_x",
        "est_error_norm",
    ]);
    for rec in &out.history {
        table.push(vec![
            Cell::Int(rec.iteration as i64),
            Cell::Float(rec.p1_x),
            Cell::Float(rec.p1_z),
            Cell::Float(rec.est_eps_x),
            Cell::Float(rec.est_eps_z),
            Cell::Float(rec.sign_x),
            Cell::Float(rec.error_norm),
        ]);
    }
    let (path, format) = output_target(&args.output, cfg, "estimate.csv")?;
    table.write(&path, format)?;
    println!("wrote {}", path.display());
    Ok(())
}
