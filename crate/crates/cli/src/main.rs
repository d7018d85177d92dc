use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hybrid_witness::oracle::Mutation;
use hybrid_witness_cli::output::{emit, render};
use hybrid_witness_cli::verify::{report_json, summary};
use hybrid_witness_cli::{
    cmd_sweep, cmd_verify, CliError, CoefficientChoice, Format, Scenario, SweepRange, SweepRequest, SweepSettings,
    VerifyRequest, VerifySettings, EXIT_VERIFY_FAILED,
};

/// Structure-factor entanglement witnesses: figure sweeps and verification.
#[derive(Parser)]
#[command(name = "hybrid-witness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Double-well position states against x.
    Gaussian(SweepArgs),
    /// Two ions in |Ψ⁺⟩ with a thermal mode, one curve per Δ.
    Thermal(SweepArgs),
    /// Spin-mode hybrid states against q'.
    Hybrid(SweepArgs),
    /// Any scenario, chosen with --scenario or in the config file.
    Sweep {
        #[arg(long, value_parser = parse::<Scenario>)]
        scenario: Option<Scenario>,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Compare every closed form against the operator oracle.
    Verify(VerifyArgs),
}

fn parse<T: std::str::FromStr<Err = CliError>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep range MIN:MAX[:STEPS].
    #[arg(long, allow_hyphen_values = true, value_parser = parse::<SweepRange>)]
    range: Option<SweepRange>,
    /// Delocalization ratio r/σ of the double well.
    #[arg(long)]
    y: Option<f64>,
    /// Energy-temperature ratio; repeat for several curves.
    #[arg(long)]
    delta: Vec<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    /// Mixing weight of the third hybrid state.
    #[arg(long)]
    p: Option<f64>,
    /// Witness coefficients `cx,cy,cz`, or `auto`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse::<CoefficientChoice>)]
    c: Option<CoefficientChoice>,
    /// Fock truncation.
    #[arg(long)]
    nmax: Option<usize>,
    /// Add operator-oracle curves.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with any of the above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SweepArgs {
    fn settings(self) -> Result<SweepSettings, CliError> {
        let file = match &self.config {
            Some(path) => SweepSettings::load(path)?,
            None => SweepSettings::default(),
        };
        let flags = SweepSettings {
            scenario: None,
            range: self.range,
            y: self.y,
            delta: self.delta,
            eta: self.eta,
            alpha_re: self.alpha_re,
            alpha_im: self.alpha_im,
            p: self.p,
            c: self.c,
            nmax: self.nmax,
            oracle: self.oracle.then_some(true),
            out: self.out,
            format: self.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            }),
            seed: self.seed,
        };
        Ok(flags.over(file))
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run only the named suite; repeatable.
    #[arg(long)]
    suite: Vec<String>,
    /// Also rerun a representative subset at doubled resolution.
    #[arg(long)]
    stability: bool,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    sweep_points: Option<usize>,
    #[arg(long)]
    random_samples: Option<usize>,
    #[arg(long)]
    factorization_samples: Option<usize>,
    /// Deliberately corrupt a closed form to check the suite catches it.
    #[arg(long, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipThermalSign,
}

fn run_sweep(scenario: Option<Scenario>, args: SweepArgs) -> Result<ExitCode, CliError> {
    let req = SweepRequest::resolve(scenario, args.settings()?)?;
    let results = cmd_sweep(&req)?;
    emit(&render(&req, &results)?, req.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let file = match &args.config {
        Some(path) => VerifySettings::load(path)?,
        None => VerifySettings::default(),
    };
    let flags = VerifySettings {
        seed: args.seed,
        grid_points: args.grid_points,
        sweep_points: args.sweep_points,
        random_samples: args.random_samples,
        factorization_samples: args.factorization_samples,
        suite: args.suite,
        stability: args.stability.then_some(true),
        out: args.out,
    };
    let mutation = args.inject_fault.map(|FaultArg::FlipThermalSign| Mutation::FlipThermalSign);
    let req = VerifyRequest::resolve(flags.over(file), mutation)?;
    let report = cmd_verify(&req)?;
    emit(&report_json(&report)?, req.out.as_deref())?;
    eprint!("{}", summary(&report));
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILED as u8)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gaussian(a) => run_sweep(Some(Scenario::Gaussian), a),
        Command::Thermal(a) => run_sweep(Some(Scenario::Thermal), a),
        Command::Hybrid(a) => run_sweep(Some(Scenario::Hybrid), a),
        Command::Sweep { scenario, args } => run_sweep(scenario, args),
        Command::Verify(a) => run_verify(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.exit_code() as u8)
    })
}
