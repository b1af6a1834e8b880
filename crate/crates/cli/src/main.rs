use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use k3rm::branchgeom::{self, Family, FiberSpec};
use k3rm::counter::{self, CountOptions, Method};
use k3rm::ffield::FqElement;
use k3rm::harness::{self, CountCache, CountProvider, HarnessError, Target};

#[derive(Parser)]
#[command(
    name = "k3rm",
    version,
    about = "Point counts, Frobenius charpolys and Picard bounds for the Qw2/Qw5 K3 families"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Directory holding counts.jsonl; counts are not cached when absent.
    #[arg(long, global = true, env = "K3RM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Machine-readable output.
    #[arg(long, global = true, conflicts_with = "table")]
    json: bool,
    /// Human-readable output.
    #[arg(long, global = true)]
    table: bool,
    /// Largest q = p^k counted.
    #[arg(long, global = true, default_value_t = counter::DEFAULT_BUDGET as u64)]
    budget: u64,
}

#[derive(Args)]
struct FiberArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    t: u64,
}

impl FiberArgs {
    fn spec(&self) -> Result<FiberSpec, HarnessError> {
        Ok(FiberSpec::new(self.family, self.p, self.t)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Branch lines over their splitting field, Frobenius permutation, nodes.
    Lines(FiberArgs),
    /// Count points on X' and X over F_{p^k}.
    Count {
        #[command(flatten)]
        fiber: FiberArgs,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value = "naive")]
        method: Method,
    },
    /// Frobenius characteristic polynomial on H^2.
    Charpoly {
        #[command(flatten)]
        fiber: FiberArgs,
        #[arg(long, default_value_t = 3)]
        kmax: u32,
        /// Also count k = 4 and check it against the assembled polynomial.
        #[arg(long)]
        verify: bool,
    },
    /// Van Luijk comparison of two reductions.
    Picard {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        p1: u64,
        #[arg(long)]
        t1: u64,
        #[arg(long)]
        p2: u64,
        #[arg(long)]
        t2: u64,
        /// Take [E:Q] >= 2 as given.
        #[arg(long)]
        rm_certificate: bool,
    },
    /// Check #X_t(F_p) against the family's formula for all good fibres.
    RmSweep {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        pmax: u64,
        #[arg(long, default_value = "naive")]
        method: Method,
    },
    /// Dickson normalization and permutation property of the pencil quintics.
    Dickson {
        #[arg(long)]
        pmax: u64,
    },
    /// Re-run a named set of reference computations and compare with the published values.
    Reproduce {
        #[arg(long)]
        target: Target,
    },
}

enum Outcome {
    Pass,
    Mismatch,
}

fn element_json(a: &FqElement) -> Value {
    json!(a.coeffs())
}

fn provider(g: &Global) -> Result<CountProvider, HarnessError> {
    let cache = g.cache_dir.as_deref().map(CountCache::open).transpose()?;
    Ok(CountProvider::new(cache, CountOptions { budget: g.budget as u128 }))
}

fn emit(g: &Global, json_default: bool, value: &Value, table: impl FnOnce() -> String) {
    let as_json = g.json || (json_default && !g.table);
    if as_json {
        println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
    } else {
        print!("{}", table());
    }
}

fn run(cli: &Cli) -> Result<Outcome, HarnessError> {
    let g = &cli.global;
    match &cli.command {
        Command::Lines(fa) => {
            let a = branchgeom::lines(&fa.spec()?)?;
            let v = json!({
                "fiber": a.fiber,
                "field": {"p": a.field.p(), "k": a.field.degree(), "modulus": a.field.modulus()},
                "lines": a.lines.iter().map(|l| l.0.iter().map(element_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "lead": element_json(&a.lead),
                "sigma": a.sigma.cycle_notation(),
                "sigma_cycle_type": a.sigma.cycle_type(),
                "pair_cycle_type": a.pair_permutation().cycle_type(),
                "nodes": a.nodes.iter().map(|n| n.0.iter().map(element_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            emit(g, true, &v, || {
                let mut s = format!(
                    "{}  over F_{}^{}\nsigma = {}\n",
                    a.fiber,
                    a.field.p(),
                    a.field.degree(),
                    a.sigma.cycle_notation()
                );
                for (i, l) in a.lines.iter().enumerate() {
                    s += &format!("  L{} = {:?}\n", i + 1, l.0.iter().map(|c| c.coeffs().to_vec()).collect::<Vec<_>>());
                }
                s
            });
            Ok(Outcome::Pass)
        }
        Command::Count { fiber, k, method } => {
            let r = provider(g)?.count(&fiber.spec()?, *k, *method)?;
            let v = json!({
                "fiber": r.fiber, "k": r.k, "method": r.method,
                "n_prime": r.n_prime.to_string(), "n_k3": r.n_k3.to_string(),
                "wall_time_secs": r.wall_time_secs,
            });
            emit(g, true, &v, || format!("{} k={} #X'={} #X={} ({})\n", r.fiber, r.k, r.n_prime, r.n_k3, r.method));
            Ok(Outcome::Pass)
        }
        Command::Charpoly { fiber, kmax, verify } => {
            let run = harness::charpoly_pipeline(&fiber.spec()?, *kmax, *verify, Method::Naive, &provider(g)?)?;
            emit(g, true, &harness::charpoly_json(&run), || {
                format!(
                    "{}\nQ(T)     = {}\nchi^tr   = {}\nremoved  = {:?}\n",
                    run.fiber, run.charpoly.untwisted, run.transcendental.chi_tr, run.transcendental.removed
                )
            });
            Ok(Outcome::Pass)
        }
        Command::Picard { family, p1, t1, p2, t2, rm_certificate } => {
            let a = FiberSpec::new(*family, *p1, *t1)?;
            let b = FiberSpec::new(*family, *p2, *t2)?;
            let (report, _) = harness::picard_pipeline(&a, &b, *rm_certificate, &provider(g)?)?;
            let v = serde_json::to_value(&report).expect("report serializes");
            emit(g, true, &v, || format!("{report:#?}\n"));
            Ok(Outcome::Pass)
        }
        Command::RmSweep { family, pmax, method } => {
            let r = harness::rm_sweep(*family, *pmax, *method, &provider(g)?)?;
            let v = serde_json::to_value(&r).expect("report serializes");
            emit(g, false, &v, || {
                let mut s = format!(
                    "{} p <= {} (p mod {} in {:?}): {} primes, {} fibres, {} failures\n",
                    r.family,
                    r.p_max,
                    r.modulus,
                    r.residues,
                    r.primes.len(),
                    r.fibers_checked,
                    r.failures.len()
                );
                for f in &r.failures {
                    s += &format!("  p={} t={} observed {} expected {}\n", f.p, f.t, f.observed, f.expected);
                }
                s
            });
            Ok(if r.passed() { Outcome::Pass } else { Outcome::Mismatch })
        }
        Command::Dickson { pmax } => {
            let r = harness::dickson_suite(*pmax)?;
            let v = serde_json::to_value(&r).expect("report serializes");
            emit(g, false, &v, || {
                format!("{} primes, {} pairs, {} failures\n", r.primes.len(), r.pairs_checked, r.failures.len())
            });
            Ok(if r.failures.is_empty() { Outcome::Pass } else { Outcome::Mismatch })
        }
        Command::Reproduce { target } => {
            let r = harness::reproduce(*target, &provider(g)?)?;
            let v = serde_json::to_value(&r).expect("report serializes");
            emit(g, false, &v, || r.render_table());
            Ok(if r.passed() { Outcome::Pass } else { Outcome::Mismatch })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
