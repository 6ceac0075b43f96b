mod lists;
mod report;

use lists::List;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cq_covert::format::SCHEMA_VERSION;
use cq_covert::scaling::{grid_size, DEFAULT_GRID_CAP};
use cq_covert::sim::{sqrt_law_sweep, write_csv, SweepConfig, SweepReport};
use cq_covert::{
    chi_sq_expansion_check, classify, covert_rate, holevo_expansion_check, sanitize,
    scaling_constant, scaling_constant_grid_oracle, ChannelFile, ChiSqExpansionReport,
    CqWiretapChannel, DensityOperator, Diagnostics, DimCap, Error, FeasibilityTolerances,
    GridOracleResult, HolevoExpansionReport, InputDistribution, Regime, RegimeReport, Sanitized,
    ScalingConstantResult,
};
use report::{
    chain_to, Envelope, ErrorBody, ErrorEnvelope, InfoUnit, Sanitization, Tolerances, Units,
};
use serde::Serialize;

const EXIT_VALIDATION: i32 = 2;
const EXIT_UNUSABLE: i32 = 3;
const EXIT_WRONG_REGIME: i32 = 4;
const EXIT_CAP: i32 = 5;
const EXIT_OTHER: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "cq-covert", version)]
#[command(about = "Covert communication over classical-quantum wiretap channels")]
struct Cli {
    /// Report information quantities in bits instead of nats. Inputs such as δ stay in nats.
    #[arg(long, global = true)]
    bits: bool,

    /// Largest tensor-power dimension any computation may build.
    #[arg(long, global = true, env = "CQ_COVERT_DIM_CAP", default_value_t = DimCap::DEFAULT.0)]
    dim_cap: usize,

    #[command(flatten)]
    feasibility: FeasibilityArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct FeasibilityArgs {
    /// Minimum mass on receiver-distinguishable symbols for a covert-mixture witness.
    #[arg(long, global = true, default_value_t = FeasibilityTolerances::default().min_mass)]
    min_mass: f64,

    /// Largest Frobenius residual accepted for a covert mixture.
    #[arg(long, global = true, default_value_t = FeasibilityTolerances::default().residual)]
    residual: f64,

    /// Trace distance below which two states count as equal.
    #[arg(long, global = true, default_value_t = FeasibilityTolerances::default().state_equality)]
    state_equality: f64,
}

impl FeasibilityArgs {
    fn tolerances(&self) -> FeasibilityTolerances {
        FeasibilityTolerances {
            min_mass: self.min_mass,
            residual: self.residual,
            state_equality: self.state_equality,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a channel file; exit 0 iff every state is a valid density operator.
    Validate {
        /// Channel JSON file, or `-` for standard input.
        file: PathBuf,
    },
    /// Decide whether the channel is in the positive-rate, square-root or super-square-root regime.
    Classify { file: PathBuf },
    /// Covert capacity: the largest Holevo information over inputs that hide from the eavesdropper.
    Rate { file: PathBuf },
    /// The square-root-law constant L.
    ScalingConstant {
        file: PathBuf,
        /// Also maximize over a simplex grid with this step and report both values.
        #[arg(long)]
        oracle_resolution: Option<f64>,
        /// Refuse oracle grids with more points than this.
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        oracle_max_points: u64,
    },
    /// Numerical check of the small-α expansions of the covertness divergence and the Holevo information.
    ExpansionCheck {
        file: PathBuf,
        /// Comma-separated α values in (0, 1].
        #[arg(long, value_parser = lists::f64_list, default_value = "1e-2,1e-3,1e-4")]
        alphas: List<f64>,
        /// Weights of P̃ over all k input labels (symbol 0 must be 0). Defaults to the L optimizer
        /// in the square-root regime and to uniform over the nonzero symbols otherwise.
        #[arg(long, value_parser = lists::f64_list)]
        p_tilde: Option<List<f64>>,
    },
    /// Sample random codebooks and evaluate them exactly at small blocklength.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    file: PathBuf,
    /// Covertness budget δ in nats.
    #[arg(long)]
    delta: f64,
    /// Blocklengths, e.g. `2..=8` or `2,4,6`.
    #[arg(long = "n", value_parser = lists::usize_list)]
    n_list: List<usize>,
    /// Codebook sizes, e.g. `2,4,8`.
    #[arg(long = "m", value_parser = lists::usize_list)]
    m_list: List<usize>,
    /// Seeds, e.g. `0..20`.
    #[arg(long, value_parser = lists::u64_list, default_value = "0")]
    seeds: List<u64>,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Order parameter s ∈ (0, 1) of the ψₙ diagnostic.
    #[arg(long, default_value_t = 0.1)]
    s: f64,
    /// Decoding-error target of `meets_targets`.
    #[arg(long, default_value_t = 0.1)]
    epsilon_target: f64,
    /// Write the per-cell CSV here; otherwise it is embedded in the JSON envelope.
    #[arg(long)]
    csv: Option<PathBuf>,
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    diagnostics: Option<Diagnostics>,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            diagnostics: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Format(_) => (EXIT_VALIDATION, "format"),
            Error::InvalidParameter(_) | Error::InvalidDistribution(_) => {
                (EXIT_VALIDATION, "invalid_parameter")
            }
            Error::UnusableChannel(_) => (EXIT_UNUSABLE, "unusable_channel"),
            Error::WrongRegime(_) => (EXIT_WRONG_REGIME, "wrong_regime"),
            Error::DimensionCap { .. } => (EXIT_CAP, "resource_cap"),
            _ => (EXIT_OTHER, "numerical"),
        };
        Failure::new(code, kind, e.to_string())
    }
}

impl From<Diagnostics> for Failure {
    fn from(d: Diagnostics) -> Self {
        let summary: Vec<String> = d.issues.iter().map(|i| i.detail.clone()).collect();
        Failure {
            code: EXIT_VALIDATION,
            kind: "validation",
            message: format!("channel failed validation: {}", summary.join("; ")),
            diagnostics: Some(d),
        }
    }
}

type Outcome = Result<(String, i32), Failure>;

struct Ctx {
    unit: InfoUnit,
    cap: DimCap,
    feasibility: FeasibilityTolerances,
}

impl Ctx {
    fn envelope<T: Serialize>(
        &self,
        command: &'static str,
        fields: Vec<&'static str>,
        sanitization: Option<Sanitization>,
        result: T,
    ) -> String {
        report::to_json(&Envelope {
            schema_version: SCHEMA_VERSION,
            command,
            units: Units {
                information: self.unit,
                fields,
            },
            tolerances: Tolerances::new(self.feasibility, self.cap),
            sanitization,
            result,
        })
    }
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    let io_fail =
        |e: io::Error| Failure::new(EXIT_VALIDATION, "io", format!("{}: {e}", path.display()));
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_fail)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io_fail)
    }
}

fn load(path: &PathBuf) -> Result<CqWiretapChannel, Failure> {
    Ok(ChannelFile::parse(&read_input(path)?)?.into_channel()?)
}

fn load_sanitized(path: &PathBuf) -> Result<Sanitized, Failure> {
    Ok(sanitize(&load(path)?)?)
}

fn require_regime(report: &RegimeReport, wanted: Regime, command: &str) -> Result<(), Failure> {
    if report.regime == wanted {
        return Ok(());
    }
    Err(Failure::new(
        EXIT_WRONG_REGIME,
        "wrong_regime",
        format!(
            "{command} needs a {wanted:?} channel, but this channel is {:?}",
            report.regime
        ),
    ))
}

fn cmd_validate(ctx: &Ctx, file: &PathBuf) -> Outcome {
    let parsed = ChannelFile::parse(&read_input(file)?)?;
    let diagnostics = match parsed.to_matrices() {
        Ok(m) => m.validate(),
        Err(d) => d,
    };
    let code = if diagnostics.pass { 0 } else { EXIT_VALIDATION };
    Ok((ctx.envelope("validate", vec![], None, diagnostics), code))
}

fn cmd_classify(ctx: &Ctx, file: &PathBuf) -> Outcome {
    let s = load_sanitized(file)?;
    let report = classify(&s.channel, &ctx.feasibility)?;
    Ok((
        ctx.envelope("classify", vec![], Some((&s).into()), report),
        0,
    ))
}

fn cmd_rate(ctx: &Ctx, file: &PathBuf) -> Outcome {
    let s = load_sanitized(file)?;
    let mut res = covert_rate(&s.channel, &ctx.feasibility)?;
    res.rate = ctx.unit.convert(res.rate);
    res.gap = ctx.unit.convert(res.gap);
    Ok((
        ctx.envelope("rate", vec!["rate", "gap"], Some((&s).into()), res),
        0,
    ))
}

#[derive(Serialize)]
struct ScalingOutput {
    #[serde(flatten)]
    solver: ScalingConstantResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<GridOracleResult>,
    /// `|L − oracle| / oracle`.
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_relative_gap: Option<f64>,
}

fn cmd_scaling_constant(
    ctx: &Ctx,
    file: &PathBuf,
    resolution: Option<f64>,
    max_points: u64,
) -> Outcome {
    let s = load_sanitized(file)?;
    require_regime(
        &classify(&s.channel, &ctx.feasibility)?,
        Regime::SquareRoot,
        "scaling-constant",
    )?;
    let mut solver = scaling_constant(&s.channel)?;
    let mut oracle = match resolution {
        Some(r) => {
            if r > 0.0 && r <= 1.0 && s.channel.k() <= 5 {
                let points = grid_size((1.0 / r).round() as u64, s.channel.k() - 1);
                if points > max_points {
                    return Err(Failure::new(
                        EXIT_CAP,
                        "resource_cap",
                        format!("oracle grid of {points} points exceeds --oracle-max-points {max_points}"),
                    ));
                }
            }
            Some(scaling_constant_grid_oracle(&s.channel, r, max_points)?)
        }
        None => None,
    };
    let oracle_relative_gap = oracle
        .as_ref()
        .map(|o| (solver.l - o.value).abs() / o.value);

    let u = ctx.unit;
    solver.l = u.convert(solver.l);
    solver.l_distinguishable_only = u.convert(solver.l_distinguishable_only);
    solver.ratio_at_optimizer = u.convert(solver.ratio_at_optimizer);
    solver.d.iter_mut().for_each(|v| *v = u.convert(*v));
    if let Some(o) = oracle.as_mut() {
        o.value = u.convert(o.value);
    }
    let fields = vec![
        "l",
        "l_distinguishable_only",
        "ratio_at_optimizer",
        "d",
        "oracle.value",
    ];
    let out = ScalingOutput {
        solver,
        oracle,
        oracle_relative_gap,
    };
    Ok((
        ctx.envelope("scaling-constant", fields, Some((&s).into()), out),
        0,
    ))
}

#[derive(Serialize)]
struct ExpansionOutput {
    p_tilde: InputDistribution,
    chi_squared: ChiSqExpansionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    holevo: Option<HolevoExpansionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    holevo_skipped: Option<String>,
}

fn expansion_p_tilde(
    s: &Sanitized,
    regime: Regime,
    given: Option<&[f64]>,
) -> Result<InputDistribution, Failure> {
    let k = s.channel.k();
    let Some(weights) = given else {
        if regime == Regime::SquareRoot {
            return Ok(scaling_constant(&s.channel)?.optimizer);
        }
        let mut p = vec![1.0 / (k - 1) as f64; k];
        p[0] = 0.0;
        return Ok(InputDistribution::new(p)?);
    };
    let original_k = s.retained.len() + s.removed.len();
    if weights.len() != original_k {
        return Err(Failure::new(
            EXIT_VALIDATION,
            "invalid_parameter",
            format!(
                "--p-tilde has {} weights for k = {original_k}",
                weights.len()
            ),
        ));
    }
    if let Some(&x) = s.removed.iter().find(|&&x| weights[x] != 0.0) {
        return Err(Failure::new(
            EXIT_VALIDATION,
            "invalid_parameter",
            format!("--p-tilde puts weight on symbol {x}, which sanitization removed"),
        ));
    }
    let w: Vec<f64> = s.retained.iter().map(|&x| weights[x]).collect();
    if w[0] != 0.0 {
        return Err(Failure::new(
            EXIT_VALIDATION,
            "invalid_parameter",
            "--p-tilde must give symbol 0 weight 0",
        ));
    }
    Ok(InputDistribution::from_weights(&w)?)
}

fn cmd_expansion_check(
    ctx: &Ctx,
    file: &PathBuf,
    alphas: &[f64],
    p_tilde: Option<&[f64]>,
) -> Outcome {
    let s = load_sanitized(file)?;
    let ch = &s.channel;
    let regime = classify(ch, &ctx.feasibility)?.regime;
    let p = expansion_p_tilde(&s, regime, p_tilde)?;
    let states: Vec<&DensityOperator> = (0..ch.k()).map(|x| ch.rho(x)).collect();
    let rho_tilde = DensityOperator::mixture(p.probs(), &states)?;
    let mut chi = chi_sq_expansion_check(ch.rho(0), &rho_tilde, alphas)?;

    let receiver_finite = p.support().iter().all(|&x| {
        cq_covert::relative_entropy(ch.sigma(x), ch.sigma(0))
            .map(|d| d.is_finite())
            .unwrap_or(false)
    });
    let (mut holevo, holevo_skipped) = if receiver_finite {
        (Some(holevo_expansion_check(ch, &p, alphas)?), None)
    } else {
        (
            None,
            Some(
                "D(σ(x)‖σ(0)) is infinite on the support of P̃: the Holevo slope diverges"
                    .to_string(),
            ),
        )
    };

    let u = ctx.unit;
    chi.rows
        .iter_mut()
        .for_each(|r| r.divergence = u.convert(r.divergence));
    if let Some(h) = holevo.as_mut() {
        h.limit = u.convert(h.limit);
        for r in &mut h.rows {
            r.holevo = u.convert(r.holevo);
            r.slope = u.convert(r.slope);
        }
    }
    let fields = vec![
        "chi_squared.rows.divergence",
        "holevo.limit",
        "holevo.rows.holevo",
        "holevo.rows.slope",
    ];
    let out = ExpansionOutput {
        p_tilde: p,
        chi_squared: chi,
        holevo,
        holevo_skipped,
    };
    Ok((
        ctx.envelope("expansion-check", fields, Some((&s).into()), out),
        0,
    ))
}

#[derive(Serialize)]
struct SimulateOutput {
    #[serde(flatten)]
    sweep: SweepReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv_path: Option<PathBuf>,
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> Outcome {
    let s = load_sanitized(&a.file)?;
    require_regime(
        &classify(&s.channel, &ctx.feasibility)?,
        Regime::SquareRoot,
        "simulate",
    )?;
    let mut cfg = SweepConfig::new(
        a.delta,
        a.n_list.0.clone(),
        a.m_list.0.clone(),
        a.seeds.0.clone(),
    );
    cfg.beta = a.beta;
    cfg.gamma = a.gamma;
    cfg.theta = a.theta;
    cfg.s = a.s;
    cfg.epsilon_target = a.epsilon_target;
    cfg.cap = ctx.cap;
    let mut sweep = sqrt_law_sweep(&s.channel, &cfg)?;

    let u = ctx.unit;
    sweep.scaling_constant = u.convert(sweep.scaling_constant);
    for c in &mut sweep.cells {
        for v in [
            &mut c.k_n,
            &mut c.covert_div,
            &mut c.covert_div_ensemble,
            &mut c.normalized_throughput,
            &mut c.a_hat,
            &mut c.converse_bound,
        ] {
            *v = u.convert(*v);
        }
        chain_to(u, &mut c.converse_chain);
    }

    let mut csv = Vec::new();
    write_csv(&sweep.cells, &mut csv).map_err(|e| Failure::new(EXIT_OTHER, "io", e.to_string()))?;
    let (csv, csv_path) = match &a.csv {
        Some(path) => {
            fs::write(path, &csv)
                .map_err(|e| Failure::new(EXIT_OTHER, "io", format!("{}: {e}", path.display())))?;
            (None, Some(path.clone()))
        }
        None => (Some(String::from_utf8(csv).expect("CSV is UTF-8")), None),
    };
    let code = if sweep.skipped.is_empty() {
        0
    } else {
        eprintln!(
            "{} cell(s) skipped: tensor dimension above the cap of {}",
            sweep.skipped.len(),
            ctx.cap.0
        );
        EXIT_CAP
    };
    let fields = vec![
        "scaling_constant",
        "cells.k_n",
        "cells.covert_div",
        "cells.covert_div_ensemble",
        "cells.normalized_throughput",
        "cells.a_hat",
        "cells.converse_bound",
        "cells.converse_chain",
    ];
    let out = SimulateOutput {
        sweep,
        csv,
        csv_path,
    };
    Ok((
        ctx.envelope("simulate", fields, Some((&s).into()), out),
        code,
    ))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Classify { .. } => "classify",
        Command::Rate { .. } => "rate",
        Command::ScalingConstant { .. } => "scaling-constant",
        Command::ExpansionCheck { .. } => "expansion-check",
        Command::Simulate(_) => "simulate",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        unit: if cli.bits {
            InfoUnit::Bits
        } else {
            InfoUnit::Nats
        },
        cap: DimCap(cli.dim_cap),
        feasibility: cli.feasibility.tolerances(),
    };
    let outcome = match &cli.command {
        Command::Validate { file } => cmd_validate(&ctx, file),
        Command::Classify { file } => cmd_classify(&ctx, file),
        Command::Rate { file } => cmd_rate(&ctx, file),
        Command::ScalingConstant {
            file,
            oracle_resolution,
            oracle_max_points,
        } => cmd_scaling_constant(&ctx, file, *oracle_resolution, *oracle_max_points),
        Command::ExpansionCheck {
            file,
            alphas,
            p_tilde,
        } => cmd_expansion_check(
            &ctx,
            file,
            &alphas.0,
            p_tilde.as_ref().map(|p| p.0.as_slice()),
        ),
        Command::Simulate(args) => cmd_simulate(&ctx, args),
    };
    let (text, code) = match outcome {
        Ok(ok) => ok,
        Err(f) => {
            eprintln!("error: {}", f.message);
            let body = ErrorBody {
                exit_code: f.code,
                kind: f.kind,
                message: f.message,
                diagnostics: f.diagnostics,
            };
            (
                report::to_json(&ErrorEnvelope::new(command_name(&cli.command), body)),
                f.code,
            )
        }
    };
    let mut out = io::stdout().lock();
    if writeln!(out, "{text}").is_err() {
        return ExitCode::from(EXIT_OTHER as u8);
    }
    ExitCode::from(code as u8)
}
