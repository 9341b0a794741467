//! `qdpa`: reports on the algebras `A_{T,S}`, their projective functors and
//! the bounded classification search.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a check failed (`classify` not
//! confirmed, `selftest` failure), 3 search budget exceeded.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdpa::algebra::Algebra;
use qdpa::flor::{parse_matrix, NonnegMatrix};
use qdpa::search::{SearchBounds, SearchError, SearchOptions, DEFAULT_BUDGET};
use qdpa::selftest::{bundled_fixtures, SelftestConfig};
use qdpa::tree::{parse_tree_spec, validate};

use report::Report;

#[derive(Parser)]
#[command(
    name = "qdpa",
    version,
    about = "Algebras of trees, their projective functors and a bounded 2-representation search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Basis, multiplication table and Cartan matrix.
    Algebra { tree: PathBuf },
    /// Cartan matrix and the scalars k_i.
    Cartan { tree: PathBuf },
    /// Radical layers of every projective and the self-injectivity check.
    Projectives { tree: PathBuf },
    /// Left, right and two-sided cells.
    Cells { tree: PathBuf },
    /// Matrices [F_ik] of a cell 2-representation.
    Cellmatrices {
        tree: PathBuf,
        /// Left cell index j.
        #[arg(long, default_value_t = 1)]
        cell: usize,
    },
    /// Normal form of a nonnegative quasi-idempotent matrix.
    Flor { matrix: PathBuf },
    /// Enumerate candidate 2-representations within bounds.
    Search {
        tree: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        /// Only faithful candidates.
        #[arg(long)]
        faithful: bool,
        /// Require every diagonal entry of [F_ii] to be 0 or k_i.
        #[arg(long)]
        dichotomy: bool,
    },
    /// Run the search with and without the dichotomy and compare with the cell representation.
    Classify {
        tree: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Run the bundled checks, one line per criterion.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the 4-vertex star in the classification checks.
        #[arg(long)]
        full: bool,
        /// Read tree fixtures (*.tree, *.json) from this directory instead of the bundled ones.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// Maximum rank r (default n + 1).
    #[arg(long)]
    rmax: Option<usize>,
    /// Maximum entry of m and cartanB.
    #[arg(long, default_value_t = 2)]
    cap: i64,
    /// Search node limit.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

impl BoundArgs {
    fn bounds(&self, alg: &Algebra) -> SearchBounds {
        SearchBounds {
            r_max: self.rmax.unwrap_or(alg.n() + 1),
            entry_cap: self.cap,
        }
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        let code = match e {
            SearchError::InvalidBounds(_) => 1,
            SearchError::BudgetExceeded { .. } => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_algebra(path: &Path) -> Result<Algebra, Failure> {
    let text = read(path)?;
    let inst = parse_tree_spec(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let valid = validate(inst).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(Algebra::build(&valid))
}

fn load_fixtures(dir: &Path) -> Result<Vec<(String, String)>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::input(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|x| x.to_str()), Some("tree" | "json")))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| Ok((p.file_name().unwrap().to_string_lossy().into_owned(), read(p)?)))
        .collect()
}

fn run(cli: &Cli) -> Result<(Report, u8), Failure> {
    let done = |r: Report| Ok((r, 0));
    match &cli.command {
        Command::Algebra { tree } => done(report::algebra(&load_algebra(tree)?)),
        Command::Cartan { tree } => done(report::cartan(&load_algebra(tree)?)),
        Command::Projectives { tree } => {
            report::projectives(&load_algebra(tree)?)
                .map(|r| (r, 0))
                .map_err(|e| Failure {
                    code: 2,
                    message: e.to_string(),
                })
        }
        Command::Cells { tree } => done(report::cells(&load_algebra(tree)?)),
        Command::Cellmatrices { tree, cell } => {
            let alg = load_algebra(tree)?;
            report::cell_matrices(&alg, *cell)
                .map(|r| (r, 0))
                .map_err(|e| Failure::input(e.to_string()))
        }
        Command::Flor { matrix } => {
            let text = read(matrix)?;
            let m = parse_matrix(&text).map_err(|e| Failure::input(format!("{}: {e}", matrix.display())))?;
            let m = NonnegMatrix::new(m).map_err(|e| Failure::input(format!("{}: {e}", matrix.display())))?;
            report::flor(&m)
                .map(|r| (r, 0))
                .map_err(|e| Failure::input(format!("{}: {e}", matrix.display())))
        }
        Command::Search {
            tree,
            bounds,
            faithful,
            dichotomy,
        } => {
            let alg = load_algebra(tree)?;
            let options = SearchOptions {
                require_faithful: *faithful,
                require_dichotomy: *dichotomy,
                budget: bounds.budget,
            };
            done(report::search(&alg, &bounds.bounds(&alg), &options)?)
        }
        Command::Classify { tree, bounds } => {
            let alg = load_algebra(tree)?;
            let (r, confirmed) = report::classify(&alg, &bounds.bounds(&alg), bounds.budget)?;
            Ok((r, if confirmed { 0 } else { 2 }))
        }
        Command::Selftest { seed, full, fixtures } => {
            let fixtures = match fixtures {
                Some(dir) => load_fixtures(dir)?,
                None => bundled_fixtures(),
            };
            let config = SelftestConfig {
                seed: *seed,
                full: *full,
                fixtures,
            };
            let (r, passed) = report::selftest(&config);
            Ok((r, if passed { 0 } else { 2 }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((report, code)) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report.json).expect("reports serialize") + "\n",
                Format::Text => report.text,
            };
            // A closed pipe (`qdpa ... | head`) is not an error.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
