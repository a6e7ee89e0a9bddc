//! `listcolor` command-line tool.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 when a
//! run fails (coloring did not finish, enumeration too large, certificate
//! failed).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use listcolor::bias::{BiasProfile, ProfileKind};
use listcolor::colorer::{default_max_rounds, moser_tardos_color};
use listcolor::coupon::{
    analytic_bound, exact_collection_prob, monte_carlo, product_bound, CouponInstance,
};
use listcolor::graph::{gen_regular_bipartite, BipartiteGraph};
use listcolor::harness::{
    compare_profiles, emit_plot_data, run_experiment, ExperimentConfig, PlotKind,
};
use listcolor::lists::{gen_lists, stats_csv, ListAssignment, ListMode};
use listcolor::optimizer::{certificate_for, Objective};
use listcolor::oracle::{choosability, choosable, chromatic_number, l_colorable, Choosability};
use listcolor::seed::mix;
use listcolor::Error;

#[derive(Parser)]
#[command(
    name = "listcolor",
    version,
    about = "Randomized list coloring of bipartite graphs"
)]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random Δ-regular bipartite graph.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
    },
    /// Generate random lists for a graph.
    Lists {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        pool: usize,
        /// Planted overlap fraction; independent uniform lists when omitted.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Per-vertex overlap statistics of part B as CSV.
    Stats {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        lists: PathBuf,
    },
    /// Color with biased sampling and resampling.
    Color {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        lists: PathBuf,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        max_rounds: Option<usize>,
        /// Where to write the JSON run report. Without it the report goes to
        /// stdout when `--out` is set and to stderr otherwise.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Coupon-collector bounds against simulation on random instances.
    Coupon {
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        pool: usize,
        #[command(flatten)]
        profile: ProfileArgs,
        /// Monte Carlo trials per instance.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        instances: u64,
    },
    /// Exact answers for small graphs.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
    /// Numerical checks of the sampling coefficient.
    Optimize {
        #[command(subcommand)]
        action: OptimizeAction,
    },
    /// Run an experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Also write plot data of this kind next to the CSV.
        #[arg(long)]
        plot: Option<String>,
        #[arg(long)]
        plot_out: Option<PathBuf>,
    },
    /// Paired comparison of profiles on the instances of a config file.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated profiles; the first is the baseline.
        #[arg(long, value_delimiter = ',', default_value = "uniform,piecewise")]
        profiles: Vec<ProfileKind>,
    },
}

#[derive(Subcommand)]
enum OracleQuery {
    /// Least k for which the graph is k-choosable.
    Choosability {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pool: Option<usize>,
        /// Write lists with no L-coloring at list size one below the answer.
        #[arg(long)]
        counterexample: Option<PathBuf>,
    },
    /// Find an L-coloring or report that none exists.
    Lcolor {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        lists: PathBuf,
    },
    /// Exact chromatic number.
    Chromatic {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Subcommand)]
enum OptimizeAction {
    /// Maximize h and check both branches against 0.7969.
    Certify {
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileName {
    Uniform,
    Linear,
    Piecewise,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, value_enum, default_value = "piecewise")]
    profile: ProfileName,
    /// Slack of the linear profile.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

impl ProfileArgs {
    fn profile(&self) -> BiasProfile {
        match self.profile {
            ProfileName::Uniform => BiasProfile::uniform(),
            ProfileName::Linear => BiasProfile::linear(self.gamma),
            ProfileName::Piecewise => BiasProfile::piecewise(),
        }
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RetryExhausted { .. }
            | Error::TooLargeToEnumerate(_)
            | Error::CertificateFailed(_)
            | Error::NoAvailableColor(_)
            | Error::SideAIncomplete(_) => Failure::Run(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<BipartiteGraph, Failure> {
    Ok(BipartiteGraph::from_text(&read(path)?)?)
}

fn read_lists(path: &Path, g: &BipartiteGraph) -> Result<ListAssignment, Failure> {
    let l = ListAssignment::from_text(&read(path)?)?;
    if l.len() != g.vertex_count() {
        return Err(Failure::Config(format!(
            "{} lists for {} vertices",
            l.len(),
            g.vertex_count()
        )));
    }
    Ok(l)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Run(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Generate { n, delta } => {
            emit(out, &gen_regular_bipartite(n, delta, cli.seed)?.to_text())
        }
        Command::Lists {
            graph,
            k,
            pool,
            theta,
        } => {
            let g = read_graph(&graph)?;
            let mode = theta.map_or(ListMode::IndependentUniform, ListMode::PlantedOverlap);
            emit(out, &gen_lists(&g, k, pool, mode, cli.seed)?.to_text())
        }
        Command::Stats { graph, lists } => {
            let g = read_graph(&graph)?;
            let l = read_lists(&lists, &g)?;
            emit(out, &stats_csv(&l, &g)?)
        }
        Command::Color {
            graph,
            lists,
            profile,
            max_rounds,
            report,
        } => {
            let g = read_graph(&graph)?;
            let l = read_lists(&lists, &g)?;
            let rounds = max_rounds.unwrap_or_else(|| default_max_rounds(&g));
            let result = moser_tardos_color(&g, &l, &profile.profile(), rounds, cli.seed)?;
            let json =
                serde_json::to_string_pretty(&result.report).expect("report serializes") + "\n";
            match report {
                Some(p) => fs::write(&p, json)
                    .map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?,
                None if out.is_some() => print!("{json}"),
                None => eprint!("{json}"),
            }
            match result.coloring {
                Some(c) => emit(out, &c.to_text()),
                None => Err(Failure::Run(format!(
                    "{} bad vertices remain after {} rounds",
                    result.report.remaining_bad.len(),
                    result.report.rounds
                ))),
            }
        }
        Command::Coupon {
            delta,
            k,
            pool,
            profile,
            trials,
            instances,
        } => {
            let mut text =
                String::from("trial_count,empirical,exact_or_na,product_bound,analytic_bound\n");
            for i in 0..instances {
                let inst = CouponInstance::random(
                    delta,
                    k,
                    pool,
                    &profile.profile(),
                    mix(cli.seed, 2 * i),
                )?;
                let exact = match exact_collection_prob(&inst) {
                    Ok(q) => q.to_string(),
                    Err(Error::TooLargeToEnumerate(_)) => "NA".into(),
                    Err(e) => return Err(e.into()),
                };
                let analytic =
                    analytic_bound(&inst).map_or_else(|_| "NA".into(), |b| b.to_string());
                let mc = monte_carlo(&inst, trials, mix(cli.seed, 2 * i + 1));
                text.push_str(&format!(
                    "{trials},{},{exact},{},{analytic}\n",
                    mc.frequency(),
                    product_bound(&inst)
                ));
            }
            emit(out, &text)
        }
        Command::Oracle { query } => match query {
            OracleQuery::Choosability {
                graph,
                pool,
                counterexample,
            } => {
                let g = read_graph(&graph)?;
                let ch = choosability(&g, pool)?;
                if let Some(path) = counterexample {
                    if ch < 2 {
                        return Err(Failure::Config(
                            "no counterexample exists below list size 1".into(),
                        ));
                    }
                    if let Choosability::Counterexample(l) = choosable(&g, ch - 1, pool)? {
                        fs::write(&path, l.to_text())
                            .map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
                    }
                }
                emit(out, &format!("choosability {ch}\n"))
            }
            OracleQuery::Chromatic { graph } => {
                let g = read_graph(&graph)?;
                emit(out, &format!("chromatic number {}\n", chromatic_number(&g)))
            }
            OracleQuery::Lcolor { graph, lists } => {
                let g = read_graph(&graph)?;
                let l = read_lists(&lists, &g)?;
                match l_colorable(&g, &l) {
                    Some(c) => emit(out, &c.to_text()),
                    None => emit(out, "not colorable\n"),
                }
            }
        },
        Command::Optimize {
            action: OptimizeAction::Certify { grid_step, json },
        } => {
            let cert = certificate_for(&Objective::default(), grid_step)?;
            let text = if json {
                cert.to_json() + "\n"
            } else {
                cert.to_string() + "\n"
            };
            emit(out, &text)
        }
        Command::Experiment {
            config,
            plot,
            plot_out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if cli.out.is_some() {
                cfg.out = cli.out.clone();
            }
            if cli.workers.is_some() {
                cfg.workers = None;
            }
            let result = run_experiment(&cfg)?;
            if cfg.out.is_none() {
                print!("{}", result.table.to_csv()?);
            }
            if let Some(kind) = plot {
                let kind: PlotKind = kind.parse()?;
                let text = emit_plot_data(&result.table, kind)?;
                match plot_out {
                    Some(p) => fs::write(&p, text)
                        .map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?,
                    None => return Err(Failure::Config("--plot needs --plot-out".into())),
                }
            }
            eprintln!(
                "{}",
                serde_json::to_string(&result.summary).expect("summary serializes")
            );
            Ok(())
        }
        Command::Compare { config, profiles } => {
            let cfg = ExperimentConfig::load(&config)?;
            let profiles: Vec<BiasProfile> =
                profiles.into_iter().map(BiasProfile::of_kind).collect();
            let cmp = compare_profiles(&cfg, &profiles)?;
            if let Some(p) = out {
                cmp.table.write_csv(p)?;
            }
            print!("{}", cmp.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
