mod commands;
mod spec;

use clap::Parser;

/// Batch analyses over self-similar systems and lattice measures: separation
/// tables, overlap detection, dimension estimates, group-partition
/// diagnostics, convolution-entropy growth, inverse-theorem verdicts,
/// parameter scans, and exceptional-set covers.
#[derive(Debug, Parser)]
#[command(name = "fel", version)]
pub struct Args {
    /// Run configuration JSON; command-line flags override its fields.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,

    /// One of: analyze-ifs, delta, overlaps, dim-estimate, diagnostics,
    /// conv-entropy, kv-check, inverse-verdict, isometry-verdict, slice,
    /// scan, cover.
    #[arg(long)]
    pub command: Option<String>,

    /// Output path (sidecar manifest written next to it).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,

    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,

    /// Worker threads (default 1; outputs are byte-identical regardless).
    #[arg(long)]
    pub threads: Option<usize>,

    /// Composition budget (FEL_BUDGET overrides the default).
    #[arg(long)]
    pub budget: Option<u64>,

    /// IFS: named system or a path to an IFS JSON file.
    #[arg(long)]
    pub system: Option<String>,

    /// Measure: synth spec (uniform(d,L), segment(L,gap), cascade(n:g,...),
    /// circle(count,L), dirac(d,L)) or a path to a measure JSON file.
    #[arg(long)]
    pub measure: Option<String>,

    /// Second measure for binary operations.
    #[arg(long)]
    pub measure2: Option<String>,

    /// Rotation count for the synthetic isometry measure rotations(count).
    #[arg(long)]
    pub isometry: Option<String>,

    /// Parametrized family: bernoulli, fat-sierpinski.
    #[arg(long)]
    pub family: Option<String>,

    /// Comma-separated diagnostics for scan: sdim, sdim-measure,
    /// dim-estimate, delta, diag.
    #[arg(long)]
    pub diagnostics: Option<String>,

    #[arg(long)]
    pub n: Option<i64>,
    #[arg(long)]
    pub n_min: Option<i64>,
    #[arg(long)]
    pub n_max: Option<i64>,
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long)]
    pub k: Option<i64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub level: Option<i64>,
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Axis index defining the slice subspace V = span(e_axis).
    #[arg(long)]
    pub axis: Option<usize>,
}

fn main() {
    let args = Args::parse();
    let run = match spec::RunConfig::assemble(args) {
        Ok(run) => run,
        Err(errors) => {
            for e in &errors {
                eprintln!("config error: {e}");
            }
            std::process::exit(2);
        }
    };
    match commands::run(&run) {
        Ok(()) => {}
        Err(e) => {
            let code = match &e {
                fel_core::FelError::BudgetExceeded { .. } => 3,
                _ => 2,
            };
            eprintln!("error: {e}");
            std::process::exit(code);
        }
    }
}
