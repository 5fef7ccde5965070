//! `ezone` — command-line front end for the engagement-zone toolkit.
//!
//! Subcommands: `frontier` (boundary polylines), `ez-eval` (signed margin
//! of a target against a zone, scriptable via exit codes), `plan`
//! (minimum-time avoidance planning, optionally comparing models),
//! `snapshots` (instantaneous zone boundaries along a planned trajectory)
//! and `validate` (Monte Carlo containment/tightness check of the analytic
//! boundaries).
//!
//! Exit codes: 0 success, 1 I/O or configuration failure, 2 usage error,
//! 3 target inside the zone (`ez-eval`), 4 numeric failure or validation
//! violations, 5 infeasible planning problem.

mod config;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{OutputFormat, RunConfig};
use ezone_core::engagement::{ez_boundary_polyline, ez_center, MarginEvaluator};
use ezone_core::oracle::{validate_region, PathKind};
use ezone_core::planner::{
    self, compare_with_options, nominal_path, PlanModel, PlanResult, SolveOptions,
};
use ezone_core::reachability::{min_turn_circles, sample_frontier, FrontierKind};
use ezone_core::{EngagementState, Error as CoreError, TargetState, Vec2};
use output::{
    comparison_csv, fmt_f64, frontier_csv, model_name, sidecar_path, trajectory_csv, write_json,
    write_text, FrontierSidecar,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_IO: u8 = 1;
const EXIT_INSIDE: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_INFEASIBLE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "ezone",
    version,
    about = "Reachability frontiers, engagement zones and min-time avoidance planning for a turn-constrained pursuer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    C,
    Cs,
    Disk,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Nominal,
    Bez,
    Cbez,
    Csbez,
}

impl From<ModelArg> for PlanModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Nominal => PlanModel::Nominal,
            ModelArg::Bez => PlanModel::Bez,
            ModelArg::Cbez => PlanModel::Cbez,
            ModelArg::Csbez => PlanModel::Csbez,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Shared flags. Anything left unset falls back to the config file and then
/// to the built-in defaults.
#[derive(Args)]
struct CommonArgs {
    /// JSON config file mirroring these flag names; flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pursuer speed.
    #[arg(long, allow_negative_numbers = true)]
    v: Option<f64>,
    /// Minimum turn radius.
    #[arg(long, allow_negative_numbers = true)]
    abar: Option<f64>,
    /// Flight time (range = v * t).
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    capture_radius: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pursuer_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pursuer_y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pursuer_heading: Option<f64>,
    /// Target/pursuer speed ratio.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    target_heading: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    target_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    target_y: Option<f64>,
    /// Planner start point as "x,y".
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    start: Option<(f64, f64)>,
    /// Planner goal point as "x,y".
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    goal: Option<(f64, f64)>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Transcription nodes (plan) or polyline vertices (frontier/snapshots).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count (validate).
    #[arg(long)]
    samples: Option<usize>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"x,y\", got {s:?}"));
    }
    let x: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let y: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((x, y))
}

impl CommonArgs {
    fn effective_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! merge {
            ($($field:ident),*) => {
                $(if let Some(value) = self.$field { cfg.$field = value; })*
            };
        }
        merge!(
            v,
            abar,
            t,
            capture_radius,
            pursuer_x,
            pursuer_y,
            pursuer_heading,
            mu,
            target_heading,
            target_x,
            target_y,
            nodes,
            seed,
            samples
        );
        if let Some((x, y)) = self.start {
            cfg.start = [x, y];
        }
        if let Some((x, y)) = self.goal {
            cfg.goal = [x, y];
        }
        if let Some(model) = self.model {
            cfg.model = model.into();
        }
        if let Some(format) = self.format {
            cfg.format = match format {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        Ok(cfg)
    }

    fn out_path(&self, default_name: &str) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(default_name))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Export a reachability boundary polyline (pursuer at the origin,
    /// heading +x) as CSV rows `param,x,y` with a JSON sidecar.
    Frontier {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Evaluate the signed margin of the target against an engagement zone.
    /// Exit 0 if outside (margin >= 0), 3 if inside, 4 on numeric failure.
    EzEval {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the minimum-time avoidance problem; writes a trajectory CSV
    /// and a JSON summary. Exit 5 if no feasible plan exists.
    Plan {
        #[command(flatten)]
        common: CommonArgs,
        /// Also run the nominal/BEZ/CBEZ comparison.
        #[arg(long)]
        compare: bool,
    },
    /// Emit the instantaneous zone boundary at evenly spaced times along a
    /// previously planned trajectory.
    Snapshots {
        #[command(flatten)]
        common: CommonArgs,
        /// Trajectory CSV produced by `plan`.
        #[arg(long)]
        plan: PathBuf,
        /// Number of snapshots.
        #[arg(short = 'k', long, default_value_t = 4)]
        count: usize,
    },
    /// Monte Carlo validation of the analytic boundary for one path family.
    /// Exit 4 if any sampled endpoint escapes the analytic region.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Frontier { common, kind } => cmd_frontier(&common, kind),
        Command::EzEval { common } => cmd_ez_eval(&common),
        Command::Plan { common, compare } => cmd_plan(&common, compare),
        Command::Snapshots {
            common,
            plan,
            count,
        } => cmd_snapshots(&common, &plan, count),
        Command::Validate { common, kind } => cmd_validate(&common, kind),
    }
}

fn cmd_frontier(common: &CommonArgs, kind: KindArg) -> Result<ExitCode> {
    let cfg = common.effective_config()?;
    let params = cfg.params()?;
    let frontier_kind = match kind {
        KindArg::C => FrontierKind::C,
        KindArg::Cs => FrontierKind::Cs,
        KindArg::Disk => FrontierKind::HolonomicDisk,
    };
    let frontier = sample_frontier(&params, frontier_kind, cfg.nodes)?;
    let circles = match frontier_kind {
        FrontierKind::HolonomicDisk => None,
        _ => {
            let (a, b) = min_turn_circles(&params);
            Some([a, b])
        }
    };
    let out = common.out_path("frontier.csv");
    match cfg.format {
        OutputFormat::Csv => {
            write_text(&out, &frontier_csv(&frontier))?;
            write_json(
                &sidecar_path(&out),
                &FrontierSidecar {
                    config: &cfg,
                    kind: frontier.kind,
                    min_turn_circles: circles,
                },
            )?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct FrontierJson<'a> {
                config: &'a RunConfig,
                frontier: &'a ezone_core::Frontier,
                min_turn_circles: Option<[ezone_core::Circle; 2]>,
            }
            write_json(
                &out,
                &FrontierJson {
                    config: &cfg,
                    frontier: &frontier,
                    min_turn_circles: circles,
                },
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EzEvalOutput<'a> {
    config: &'a RunConfig,
    eval: ezone_core::ConstraintEval,
}

fn cmd_ez_eval(common: &CommonArgs) -> Result<ExitCode> {
    let cfg = common.effective_config()?;
    let model = match cfg.model.ez_model() {
        Some(m) => m,
        None => bail!("ez-eval requires --model bez, cbez or csbez"),
    };
    let state = cfg.engagement_state()?;
    let evaluator = MarginEvaluator::new(model, state.params);
    let eval = match evaluator.eval(&state.pursuer, &state.target) {
        Ok(eval) => eval,
        Err(err @ (CoreError::RootFindFailed { .. } | CoreError::NonFinite(_))) => {
            eprintln!("numeric failure: {err}");
            return Ok(ExitCode::from(EXIT_NUMERIC));
        }
        Err(err) => return Err(err.into()),
    };
    match cfg.format {
        OutputFormat::Csv => println!(
            "model={} margin={} d_prime={} lambda_prime={} effective_bearing={} boundary_radius={}",
            model_name(cfg.model),
            fmt_f64(eval.margin),
            fmt_f64(eval.d_prime),
            fmt_f64(eval.lambda_prime),
            fmt_f64(eval.effective_bearing),
            fmt_f64(eval.boundary_radius)
        ),
        OutputFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(&EzEvalOutput {
                config: &cfg,
                eval
            })?
        ),
    }
    if let Some(out) = &common.out {
        write_json(out, &EzEvalOutput { config: &cfg, eval })?;
    }
    Ok(if eval.margin >= 0.0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INSIDE)
    })
}

#[derive(Serialize)]
struct PlanSummary<'a> {
    config: &'a RunConfig,
    model: PlanModel,
    t_f: f64,
    feasible: bool,
    min_margin: f64,
    solver_stats: ezone_core::planner::SolverStats,
}

fn trajectory_margins(result: &PlanResult, cfg: &RunConfig) -> Result<Vec<f64>> {
    let problem = cfg.plan_problem()?;
    let evaluator = problem.model.ez_model().map(|m| MarginEvaluator::new(m, problem.params));
    result
        .trajectory
        .positions
        .iter()
        .zip(&result.trajectory.headings)
        .map(|(pos, heading)| match &evaluator {
            Some(ev) => Ok(ev.margin_value(&problem.pursuer, *pos, *heading, problem.mu)?),
            None => Ok(pos.distance(problem.pursuer.position()) - problem.params.range()),
        })
        .collect()
}

fn cmd_plan(common: &CommonArgs, compare: bool) -> Result<ExitCode> {
    let cfg = common.effective_config()?;
    let problem = cfg.plan_problem()?;
    let options = SolveOptions {
        n_nodes: cfg.nodes,
        ..Default::default()
    };
    let result = match problem.model {
        PlanModel::Nominal => nominal_path(&problem)?,
        _ => planner::solve(&problem, &options)?,
    };
    let margins = trajectory_margins(&result, &cfg)?;
    let out = common.out_path("plan.csv");
    let summary = PlanSummary {
        config: &cfg,
        model: problem.model,
        t_f: result.trajectory.t_f,
        feasible: result.feasible,
        min_margin: result.min_margin,
        solver_stats: result.stats,
    };
    match cfg.format {
        OutputFormat::Csv => {
            write_text(&out, &trajectory_csv(&result, &margins))?;
            write_json(&sidecar_path(&out), &summary)?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct PlanJson<'a> {
                #[serde(flatten)]
                summary: PlanSummary<'a>,
                trajectory: &'a ezone_core::planner::Trajectory,
                margins: &'a [f64],
            }
            write_json(
                &out,
                &PlanJson {
                    summary,
                    trajectory: &result.trajectory,
                    margins: &margins,
                },
            )?;
        }
    }

    if compare {
        let report = compare_with_options(&problem, &options);
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("plan");
        let compare_path = out.with_file_name(format!("{stem}_compare.csv"));
        write_text(&compare_path, &comparison_csv(&report))?;
        #[derive(Serialize)]
        struct CompareJson<'a> {
            config: &'a RunConfig,
            report: &'a ezone_core::planner::ComparisonReport,
        }
        write_json(
            &sidecar_path(&compare_path),
            &CompareJson {
                config: &cfg,
                report: &report,
            },
        )?;
    }

    if result.feasible {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("no feasible plan found; best attempt written to {}", out.display());
        Ok(ExitCode::from(EXIT_INFEASIBLE))
    }
}

struct TrajectoryRow {
    t: f64,
    x: f64,
    y: f64,
    psi: f64,
}

fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading trajectory {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 4 {
            bail!("trajectory row {i} has {} fields, expected >= 4", fields.len());
        }
        rows.push(TrajectoryRow {
            t: fields[0].parse().context("parsing t")?,
            x: fields[1].parse().context("parsing x")?,
            y: fields[2].parse().context("parsing y")?,
            psi: fields[3].parse().context("parsing psi_T")?,
        });
    }
    if rows.len() < 2 {
        bail!("trajectory {} has fewer than 2 rows", path.display());
    }
    Ok(rows)
}

fn interpolate(rows: &[TrajectoryRow], t: f64) -> (Vec2, f64) {
    let t = t.clamp(rows[0].t, rows[rows.len() - 1].t);
    let j = rows
        .windows(2)
        .position(|w| t <= w[1].t)
        .unwrap_or(rows.len() - 2);
    let (a, b) = (&rows[j], &rows[j + 1]);
    let f = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
    (
        Vec2::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)),
        a.psi + f * (b.psi - a.psi),
    )
}

fn cmd_snapshots(common: &CommonArgs, plan: &Path, count: usize) -> Result<ExitCode> {
    if count == 0 {
        bail!("snapshot count must be >= 1");
    }
    let cfg = common.effective_config()?;
    let model = match cfg.model.ez_model() {
        Some(m) => m,
        None => bail!("snapshots require --model bez, cbez or csbez"),
    };
    let rows = read_trajectory(plan)?;
    let t_f = rows[rows.len() - 1].t;
    let out = common.out_path("snapshot.csv");
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("snapshot")
        .to_string();

    for i in 0..count {
        let time = if count == 1 {
            0.0
        } else {
            t_f * (i as f64) / ((count - 1) as f64)
        };
        let (pos, heading) = interpolate(&rows, time);
        let target = TargetState::new(pos.x, pos.y, heading, cfg.mu)?;
        let state = EngagementState::new(cfg.pursuer()?, target, cfg.params()?)?;
        let boundary = ez_boundary_polyline(&state, model, cfg.nodes)?;
        let path = out.with_file_name(format!("{stem}_{i}.csv"));
        write_text(&path, &frontier_csv(&boundary))?;
        #[derive(Serialize)]
        struct SnapshotSidecar<'a> {
            config: &'a RunConfig,
            time: f64,
            target: TargetState,
            ez_center: Vec2,
        }
        write_json(
            &sidecar_path(&path),
            &SnapshotSidecar {
                config: &cfg,
                time,
                target,
                ez_center: ez_center(&state),
            },
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(common: &CommonArgs, kind: KindArg) -> Result<ExitCode> {
    let cfg = common.effective_config()?;
    if cfg.samples < 1000 {
        bail!("validation needs --samples >= 1000, got {}", cfg.samples);
    }
    let kind = match kind {
        KindArg::C => PathKind::C,
        KindArg::Cs => PathKind::Cs,
        KindArg::Disk => bail!("validate supports --kind c or cs"),
    };
    let params = cfg.params()?;
    let report = validate_region(&params, kind, cfg.samples, cfg.seed);
    #[derive(Serialize)]
    struct ValidateJson<'a> {
        config: &'a RunConfig,
        report: &'a ezone_core::oracle::ValidationReport,
    }
    let out = common.out_path("validation.json");
    write_json(
        &out,
        &ValidateJson {
            config: &cfg,
            report: &report,
        },
    )?;
    println!(
        "kind={:?} samples={} violations={} max_exterior={} coverage={:.4} max_gap={:.5}",
        report.kind,
        report.samples,
        report.violations,
        fmt_f64(report.max_exterior_distance),
        report.coverage_fraction,
        report.max_tightness_gap
    );
    Ok(if report.violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERIC)
    })
}
