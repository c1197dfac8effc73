mod commands;
mod output;
mod reproduce;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bhg_core::Error;
use clap::{Args, Parser, Subcommand};

use output::Format;

const EXIT_MISMATCH: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;

/// Upper bounds and exact computations for B_h[g]-sets.
///
/// Exit status: 0 on success, 1 when `reproduce` finds a value outside its
/// tolerance, 2 on invalid input, 3 when a certification or search budget
/// runs out. Set RAYON_NUM_THREADS to limit worker threads.
#[derive(Parser, Debug)]
#[command(name = "bhg", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    /// Seed for randomized sweeps.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cardinality bounds |A| <= (C g N)^(1/h).
    ///
    /// CSV columns: method,h,g,N,constant,cardinality_bound,asymptotic.
    Bounds(BoundsArgs),
    /// Check that a set file is B_h[g], with optional structural checks.
    ///
    /// CSV columns: check,value,detail. With --random, checks counting
    /// identities on random sets instead of reading a file.
    Verify(VerifyArgs),
    /// Largest B_h[g]-set in {1..N}, exactly and greedily.
    ///
    /// CSV columns: method,size,optimal,nodes,set.
    Search(SearchArgs),
    /// Certified lower bound on the min-max quantity psi for a family.
    ///
    /// CSV columns: quantity,value. Rows: psi, active_members, then the
    /// nonzero cell masses alpha_j.
    Psi(PsiArgs),
    /// Certified minimum of a cosine polynomial over an interval.
    ///
    /// CSV columns: lower,upper,witness,tol,rounds.
    Certify(CertifyArgs),
    /// Windowed representation sums against L_h H |A|^h.
    ///
    /// CSV columns: h,window,mu,lhs,rhs_classic,rhs_psi,ratio,best_mu,best_lhs.
    Window(WindowArgs),
    /// Recompute every reference constant and compare within tolerance.
    ///
    /// CSV columns: status,label,computed,relation,reference,tolerance.
    Reproduce(ReproduceArgs),
}

/// Accepts integers written as `1000000` or `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9_007_199_254_740_992.0 {
        Ok(x as u64)
    } else {
        Err(format!("{s:?} is not a nonnegative integer"))
    }
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    h: u32,
    #[arg(long, default_value_t = 1)]
    g: u64,
    #[arg(long = "N", value_parser = parse_count)]
    n: u64,
    /// all, trivial, crt, cju, thm11, b3refined or prop31.
    #[arg(long, default_value = "all")]
    method: String,
    /// Lower bound on psi used by prop31.
    #[arg(long)]
    psi: Option<f64>,
    /// Certification tolerance for the refined h = 3 constant.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Cells for the refined h = 3 constant.
    #[arg(long, default_value_t = 128)]
    m: usize,
    /// Denominator of the capped mass fractions for the refined constant.
    #[arg(long = "delta-den", default_value_t = 128)]
    delta_den: u32,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    h: u32,
    #[arg(long, default_value_t = 1)]
    g: u64,
    /// Also check the exponential-sum bound at every frequency.
    #[arg(long)]
    expsum: bool,
    /// Also report end masses and, for h = 3, the class-size inequality.
    #[arg(long)]
    delta: Option<f64>,
    /// Check counting identities on this many random sets instead.
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long = "N", value_parser = parse_count)]
    n: u64,
    #[arg(long)]
    h: u32,
    #[arg(long, default_value_t = 1)]
    g: u64,
    /// Node budget for the exhaustive search.
    #[arg(long, default_value_t = bhg_core::sets::DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Only run the greedy construction.
    #[arg(long)]
    greedy: bool,
}

#[derive(Args, Debug)]
struct PsiArgs {
    /// Use the built-in five-weight family for h = 3.
    #[arg(long, conflicts_with = "family")]
    canonical: bool,
    /// Family file: header `h=<int> K=<int>`, one `c1,...,cK` per line.
    #[arg(long)]
    family: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    m: usize,
    #[arg(long, default_value_t = bhg_core::trigcert::DEFAULT_TOL)]
    tol: f64,
    /// Improve the family by coordinate search with this many candidates.
    #[arg(long)]
    budget: Option<usize>,
    /// Coefficient steps tried by the search.
    #[arg(long, value_delimiter = ',', default_value = "0.05,-0.05,0.01,-0.01")]
    steps: Vec<f64>,
    /// Include the certified value matrix in json output.
    #[arg(long)]
    matrix: bool,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Coefficients c1,...,cK of sum c_j cos(jx).
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
    /// Interval `lo,hi`; endpoints may be written like -pi/3.
    #[arg(long, allow_hyphen_values = true)]
    interval: String,
    #[arg(long, default_value_t = bhg_core::trigcert::DEFAULT_TOL)]
    tol: f64,
    /// Refinement rounds.
    #[arg(long, default_value_t = bhg_core::trigcert::MAX_REFINEMENT_ROUNDS)]
    budget: u32,
}

#[derive(Args, Debug)]
struct WindowArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long)]
    h: u32,
    /// Window length H.
    #[arg(long, default_value_t = 1)]
    window: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(long, default_value_t = bhg_core::trigcert::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 12)]
    m: usize,
    #[arg(long = "delta-den", default_value_t = 128)]
    delta_den: u32,
}

/// Outcome of a command that produced a report.
pub enum Status {
    Ok,
    Mismatch,
    Exhausted,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CertificationBudget { .. } | Error::Overflow(_) => EXIT_EXHAUSTED,
        Error::Cell { source, .. } => exit_code(source),
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => commands::bounds(a),
        Command::Verify(a) => commands::verify(a, cli.seed),
        Command::Search(a) => commands::search(a),
        Command::Psi(a) => commands::psi(a),
        Command::Certify(a) => commands::certify(a),
        Command::Window(a) => commands::window(a),
        Command::Reproduce(a) => reproduce::run(a),
    };
    match result {
        Ok((report, status)) => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not worth a panic.
            let _ = out.write_all(report.render(cli.format).as_bytes());
            match status {
                Status::Ok => ExitCode::SUCCESS,
                Status::Mismatch => ExitCode::from(EXIT_MISMATCH),
                Status::Exhausted => ExitCode::from(EXIT_EXHAUSTED),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
