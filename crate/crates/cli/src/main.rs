use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use largesets::formats::{parse_design, parse_large_set, parse_matrix};
use largesets::lattice::lattice_report;
use largesets::probmodel::{
    estimate_success_probability, exact_hit_probability, monte_carlo_hit_probability, Constants,
    EstimateOptions, McConfig, DEFAULT_EXACT_CAP,
};
use largesets::search::{
    max_disjoint_designs, search_design, search_large_set, BlockOrder, SearchConfig, SearchOutcome,
    Strategy,
};
use largesets::setsys::{
    build_incidence, check_design_divisibility, check_largeset_divisibility, IncidenceSystem,
    InstanceParams,
};
use largesets::verify::{block_rows, verify_design, verify_large_set, verify_uniform_subset};
use largesets::Error;

mod output;

use output::{Format, Rendered};

#[derive(Parser)]
#[command(name = "largesets", version, about = "Designs, large sets and their Gaussian estimates")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Necessary divisibility conditions for a design (--lambda) or a large set (--l).
    Divisibility {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
        #[arg(long, required_unless_present = "lambda", conflicts_with = "lambda")]
        l: Option<u64>,
        #[arg(long)]
        lambda: Option<u64>,
        #[command(flatten)]
        io: Io,
    },
    /// Check a design file.
    VerifyDesign {
        file: PathBuf,
        #[command(flatten)]
        io: Io,
    },
    /// Check a large-set file.
    VerifyLargeset {
        file: PathBuf,
        #[command(flatten)]
        io: Io,
    },
    /// Whether a set of rows has the same average as the whole system.
    UniformCheck {
        /// A design file; its blocks are the subset of the t-in-k system.
        #[arg(required_unless_present = "matrix", conflicts_with_all = ["matrix", "rows"])]
        file: Option<PathBuf>,
        /// Integer matrix file for a general system.
        #[arg(long, requires = "rows")]
        matrix: Option<PathBuf>,
        /// 1-based row indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
        #[command(flatten)]
        io: Io,
    },
    /// Lattice basis, c1, determinant, dual basis and optional membership.
    Lattice {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        l: Option<u64>,
        /// Query vector, comma separated; entries may be fractions like 1/2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vector: Option<Vec<BigRational>>,
        #[command(flatten)]
        io: Io,
    },
    /// Gaussian point estimate with error bounds and threshold verdicts.
    Estimate {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        l: u64,
        #[command(flatten)]
        consts: ConstArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        c3: Option<BigUint>,
        #[arg(long)]
        c2: Option<u64>,
        /// Accepted for uniformity; the estimate is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: Io,
    },
    /// Monte Carlo estimate of the hit probability.
    Sample {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        l: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Exact hit probability by enumerating every assignment.
    Exact {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        l: u64,
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        cap: u64,
        #[command(flatten)]
        io: Io,
    },
    /// Backtracking search for a t-(n, k, lambda) design.
    SearchDesign {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
        #[arg(long, default_value_t = 1)]
        lambda: u64,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Backtracking search for a large set LS(l; t, k, n).
    SearchLargeset {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        l: u64,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Maximum number of pairwise disjoint t-(n, k, lambda) designs.
    MaxDisjoint {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
        #[arg(long, default_value_t = 1)]
        lambda: u64,
        /// Most designs to enumerate.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Args)]
struct Io {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Either the t-in-k system for (n, k, t) or an explicit matrix.
#[derive(Args)]
struct Instance {
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    n: Option<u32>,
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    k: Option<u32>,
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    t: Option<u32>,
    /// Integer matrix file (rows are blocks) for a general system.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

impl Instance {
    fn system(&self) -> Result<IncidenceSystem, Failure> {
        match (&self.matrix, self.n, self.k, self.t) {
            (Some(path), ..) => parse_matrix(&read(path)?).map_err(|e| Failure::file(path, e)),
            (None, Some(n), Some(k), Some(t)) => Ok(build_incidence(n, k, t)?),
            _ => unreachable!("clap enforces the instance group"),
        }
    }
}

#[derive(Args)]
struct ConstArgs {
    #[arg(long, default_value_t = 1.0)]
    const_main: f64,
    #[arg(long, default_value_t = 1.0)]
    const_klp: f64,
    #[arg(long, default_value_t = 1.0)]
    const_norm: f64,
    #[arg(long, default_value_t = 1.0)]
    const_i1: f64,
    #[arg(long, default_value_t = 1.0)]
    const_c4: f64,
    #[arg(long, default_value_t = 1.0)]
    const_c5: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Restart,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Colex,
    Random,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 100_000_000)]
    budget_nodes: u64,
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
    strategy: StrategyArg,
    /// Restarts for the restart strategy; the node budget is split evenly.
    #[arg(long, default_value_t = 10)]
    restarts: u32,
    #[arg(long, value_enum, default_value_t = OrderArg::Colex)]
    order: OrderArg,
    /// Let every bin take the first block (large sets only).
    #[arg(long)]
    no_symmetry_breaking: bool,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, Failure> {
        let time_budget = match self.budget_seconds {
            Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
            Some(_) => return Err(Failure::usage("--budget-seconds must be positive")),
            None => None,
        };
        let strategy = match self.strategy {
            StrategyArg::Exhaustive => Strategy::Exhaustive,
            StrategyArg::Restart => Strategy::RandomizedRestart {
                restarts: self.restarts,
                nodes_per_restart: self.budget_nodes / u64::from(self.restarts.max(1)),
            },
        };
        let order = match self.order {
            OrderArg::Colex => BlockOrder::Colex,
            OrderArg::Random => BlockOrder::Random,
        };
        Ok(SearchConfig {
            strategy,
            node_budget: self.budget_nodes,
            time_budget,
            seed: self.seed,
            order,
            symmetry_breaking: !self.no_symmetry_breaking,
        })
    }
}

/// Exit statuses.
const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: USAGE, message: msg.into() }
    }

    fn file(path: &Path, e: Error) -> Self {
        Self { code: USAGE, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } | Error::BudgetExceeded { .. } => BUDGET,
            Error::NotApplicable(_) => FAIL,
            _ => USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn rendered<T: Serialize>(report: &T, headline: String, code: u8, table: Option<&'static str>) -> Rendered {
    Rendered::new(report, headline, code, table)
}

fn verdict(pass: bool) -> (&'static str, u8) {
    if pass {
        ("PASS", PASS)
    } else {
        ("FAIL", FAIL)
    }
}

fn search_rendered<T: Serialize>(out: &SearchOutcome<T>, what: String) -> Rendered {
    let (word, code) = match out {
        SearchOutcome::Found { .. } => ("FOUND", PASS),
        SearchOutcome::Exhausted { .. } => ("NONE", FAIL),
        SearchOutcome::BudgetExceeded { .. } => ("BUDGET EXCEEDED", BUDGET),
    };
    rendered(out, format!("{what}: {word} after {} nodes", out.nodes()), code, None)
}

fn run(cmd: &Command) -> Result<Rendered, Failure> {
    Ok(match cmd {
        Command::Divisibility { n, k, t, l, lambda, .. } => {
            let (report, what) = match (l, lambda) {
                (Some(l), _) => (
                    check_largeset_divisibility(&InstanceParams::new(*n, *k, *t, *l)?)?,
                    format!("LS({l}; {t}, {k}, {n})"),
                ),
                (None, Some(lam)) => (
                    check_design_divisibility(*n, *k, *t, &BigUint::from(*lam))?,
                    format!("{t}-({n}, {k}, {lam})"),
                ),
                (None, None) => unreachable!("clap requires --l or --lambda"),
            };
            let (word, code) = verdict(report.pass);
            rendered(&report, format!("{what} divisibility: {word}"), code, Some("checks"))
        }
        Command::VerifyDesign { file, .. } => {
            let d = parse_design(&read(file)?).map_err(|e| Failure::file(file, e))?;
            let report = verify_design(&d)?;
            let (word, code) = verdict(report.pass);
            rendered(&report, format!("{}-({}, {}, {}) design: {word}", d.t, d.n, d.k, d.lambda), code, None)
        }
        Command::VerifyLargeset { file, .. } => {
            let ls = parse_large_set(&read(file)?).map_err(|e| Failure::file(file, e))?;
            let report = verify_large_set(&ls)?;
            let (word, code) = verdict(report.pass);
            let InstanceParams { n, k, t, l } = ls.params;
            rendered(&report, format!("LS({l}; {t}, {k}, {n}): {word}"), code, None)
        }
        Command::UniformCheck { file, matrix, rows, .. } => {
            let (sys, subset) = match (file, matrix) {
                (Some(file), _) => {
                    let d = parse_design(&read(file)?).map_err(|e| Failure::file(file, e))?;
                    (build_incidence(d.n, d.k, d.t)?, block_rows(d.n, d.k, &d.blocks)?)
                }
                (None, Some(path)) => {
                    let sys = parse_matrix(&read(path)?).map_err(|e| Failure::file(path, e))?;
                    if rows.contains(&0) {
                        return Err(Failure::usage("--rows are 1-based"));
                    }
                    (sys, rows.iter().map(|r| r - 1).collect())
                }
                (None, None) => unreachable!("clap requires a file or --matrix"),
            };
            let report = verify_uniform_subset(&subset, &sys)?;
            let (word, code) = verdict(report.pass);
            rendered(&report, format!("uniform subset of {} rows: {word}", subset.len()), code, None)
        }
        Command::Lattice { inst, l, vector, .. } => {
            let sys = inst.system()?;
            let report = lattice_report(&sys, *l, vector.as_deref())?;
            let code = if report.main_divisibility == Some(false) || report.member == Some(false) { FAIL } else { PASS };
            let headline = format!("lattice of rank {} in dimension {}", report.rank, report.dim);
            rendered(&report, headline, code, None)
        }
        Command::Estimate { inst, l, consts, eps, c3, c2, .. } => {
            let sys = inst.system()?;
            let opts = EstimateOptions {
                c3: c3.clone(),
                c2: *c2,
                eps: *eps,
                constants: Constants {
                    main: consts.const_main,
                    klp: consts.const_klp,
                    norm: consts.const_norm,
                    i1: consts.const_i1,
                    c4: consts.const_c4,
                    c5: consts.const_c5,
                },
            };
            let report = estimate_success_probability(&sys, *l, &opts)?;
            let headline = format!("point estimate {:.6e}", report.point_estimate);
            rendered(&report, headline, PASS, None)
        }
        Command::Sample { inst, l, trials, seed, workers, .. } => {
            let sys = inst.system()?;
            let cfg = McConfig { workers: *workers, ..McConfig::new(*trials, *seed) };
            let report = monte_carlo_hit_probability(&sys, *l, cfg)?;
            let headline = format!("{} hits in {} trials, phat {:.6e} +- {:.2e}", report.hits, report.trials, report.phat, report.stderr);
            rendered(&report, headline, PASS, Some("chunks"))
        }
        Command::Exact { inst, l, cap, .. } => {
            let sys = inst.system()?;
            let report = exact_hit_probability(&sys, *l, *cap)?;
            rendered(&report, format!("probability {}", report.probability), PASS, None)
        }
        Command::SearchDesign { n, k, t, lambda, search, .. } => {
            let out = search_design(*n, *k, *t, *lambda, &search.config()?)?;
            search_rendered(&out, format!("{t}-({n}, {k}, {lambda}) design"))
        }
        Command::SearchLargeset { n, k, t, l, search, .. } => {
            let out = search_large_set(InstanceParams::new(*n, *k, *t, *l)?, &search.config()?)?;
            search_rendered(&out, format!("LS({l}; {t}, {k}, {n})"))
        }
        Command::MaxDisjoint { n, k, t, lambda, cap, search, .. } => {
            let report = max_disjoint_designs(*n, *k, *t, *lambda, *cap, &search.config()?)?;
            let headline = format!(
                "{} pairwise disjoint {t}-({n}, {k}, {lambda}) designs among {}",
                report.count, report.designs_enumerated
            );
            rendered(&report, headline, PASS, None)
        }
    })
}

fn io(cmd: &Command) -> &Io {
    match cmd {
        Command::Divisibility { io, .. }
        | Command::VerifyDesign { io, .. }
        | Command::VerifyLargeset { io, .. }
        | Command::UniformCheck { io, .. }
        | Command::Lattice { io, .. }
        | Command::Estimate { io, .. }
        | Command::Sample { io, .. }
        | Command::Exact { io, .. }
        | Command::SearchDesign { io, .. }
        | Command::SearchLargeset { io, .. }
        | Command::MaxDisjoint { io, .. } => io,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let io = io(&cli.cmd);
    match run(&cli.cmd).and_then(|r| r.emit(io.format, io.out.as_deref()).map(|()| r.code)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == USAGE {
                eprintln!("run with --help for usage");
            }
            ExitCode::from(f.code)
        }
    }
}
