use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use na_harness::{
    compare_table, emit_reports, run_experiment, run_registry, with_linesearch, ConfigOverrides, ExperimentSpec,
    Format, ProblemSelector,
};
use newton_anderson::problems::{HEquationSpec, MultipolySpec};
use newton_anderson::MethodId;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Run Newton, Newton-Anderson variants and projected LM on benchmark
/// problems and write comparison tables and residual histories.
#[derive(Debug, Parser)]
#[command(name = "na-bench", version)]
struct Cli {
    /// `hequation`, `multipoly`, `registry` (every registry entry) or a
    /// registry entry name such as `Bullard-Biegler`.
    #[arg(long, default_value = "registry")]
    problem: String,

    /// Method to run; repeat for several. Defaults to all six.
    #[arg(long = "method")]
    methods: Vec<MethodId>,

    /// Dimension for the scalable problems.
    #[arg(long)]
    n: Option<usize>,

    /// H-equation parameter in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    omega: f64,

    /// Multipoly exponent (root order k - 1).
    #[arg(long, default_value_t = 2)]
    k: u32,

    /// Safeguard parameter; registry problems default to their own.
    #[arg(long)]
    r: Option<f64>,

    #[arg(long)]
    tol: Option<f64>,

    #[arg(long)]
    max_iters: Option<usize>,

    /// Use the Armijo variants of the selected Newton-Anderson methods.
    #[arg(long)]
    linesearch: bool,

    /// Output directory.
    #[arg(long, default_value = "na-out")]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Also write every iterate.
    #[arg(long)]
    keep_history: bool,

    /// Run methods concurrently.
    #[arg(long)]
    parallel: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> na_harness::Result<()> {
    let mut methods = if cli.methods.is_empty() {
        MethodId::ALL.to_vec()
    } else {
        cli.methods.clone()
    };
    if cli.linesearch {
        methods = with_linesearch(&methods);
    }
    let overrides = ConfigOverrides {
        tol: cli.tol,
        max_iters: cli.max_iters,
        r: cli.r,
        ls_step0: None,
    };
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };

    let reports = if cli.problem.eq_ignore_ascii_case("registry") {
        let (reports, skipped) = run_registry(&methods, &overrides, cli.parallel)?;
        for s in &skipped {
            eprintln!("skipped {}: {}", s.problem, s.reason);
        }
        reports
    } else {
        let problem = match cli.problem.to_ascii_lowercase().as_str() {
            "hequation" | "h-equation" => ProblemSelector::HEquation(HEquationSpec {
                n: cli.n.unwrap_or(HEquationSpec::default().n),
                omega: cli.omega,
            }),
            "multipoly" => ProblemSelector::Multipoly(MultipolySpec {
                n: cli.n.unwrap_or(10_000),
                k: cli.k,
            }),
            _ => ProblemSelector::Registry(cli.problem.clone()),
        };
        let spec = ExperimentSpec {
            problem,
            methods,
            overrides,
            keep_history: cli.keep_history,
            parallel: cli.parallel,
        };
        vec![run_experiment(&spec)?]
    };

    print!("{}", compare_table(&reports));
    let written = emit_reports(&reports, format, &cli.out)?;
    eprintln!("wrote {} files to {}", written.len(), cli.out.display());
    Ok(())
}
