//! Command-line front end. [`run`] never prints; it returns the exit code
//! and both output streams so it can be driven from tests.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::counting::{
    count_complete_matchings, count_scds_exact, kleitman_extend, kleitman_l, matching_lower_bound,
    meets_matching_bound, scd_bounds_report, LevelSide, MAX_SATURATED_SIDE,
};
use crate::error::{Error, Result};
use crate::lattice::{binomial, GroundSet, Subset, SubsetFormat, MAX_N};
use crate::partition::{
    alpha_constant, btk_scd, k_for_epsilon, read_partition, uniform_rank_symmetric_partition,
    verify_chains, write_partition, ChainPartition, Provenance, Requirements, Universe,
};
use crate::signature::{btk_chain, circular_signature, mirror, signature};
use crate::symposet::{
    check_order, component_stats, covers_down, covers_up, level_graph, verify_level, verify_poset_nm,
    NmEngine,
};

/// Environment variable lowering the largest accepted `n`.
pub const MAX_N_ENV: &str = "SYMCHAIN_MAX_N";

/// Largest `n` for commands that sweep the whole lattice.
pub const SWEEP_MAX_N: u32 = 24;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "symchain", version, about = "Symmetric chains in the Boolean lattice")]
struct Cli {
    /// Subset syntax for output: `set` ({1,3}) or `bits` (1010).
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Set)]
    format: FormatArg,

    /// Worker threads for data-parallel sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Set,
    Bits,
}

impl From<FormatArg> for SubsetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Set => SubsetFormat::Set,
            FormatArg::Bits => SubsetFormat::Bits,
        }
    }
}

#[derive(Args, Debug)]
struct SubsetArgs {
    #[arg(short = 'n')]
    n: u32,
    /// Subset as `{1,3}` or as a bit string.
    x: String,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Requirement {
    Symmetric,
    RankSymmetric,
    Skipless,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CountMode {
    Exact,
    Kleitman,
    Bound,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Upper,
    Lower,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Linear signature of a subset.
    Sig(SubsetArgs),
    /// Circular signature of a subset.
    Csig(SubsetArgs),
    /// The symmetric chain of equal signature through a subset.
    Chain(SubsetArgs),
    /// The mirror image p(x) of a subset of rank at least n/2.
    Mirror(SubsetArgs),
    /// Up- or down-covers of a subset in the order on the upper half.
    Covers {
        #[command(flatten)]
        subset: SubsetArgs,
        #[arg(long, conflicts_with = "down", required_unless_present = "down")]
        up: bool,
        #[arg(long)]
        down: bool,
    },
    /// Symmetric chain decomposition as JSON lines.
    Scd {
        #[arg(short = 'n')]
        n: Option<u32>,
        /// Extend the decomposition in this file by one element.
        #[arg(long, requires = "bits")]
        kleitman: Option<PathBuf>,
        /// One binary digit per chain with more than one element.
        #[arg(long, requires = "kleitman")]
        bits: Option<String>,
    },
    /// Rank-symmetric chain partition of near-uniform chain sizes.
    PartitionUniform {
        #[arg(short = 'n')]
        n: u32,
        #[arg(long)]
        epsilon: f64,
        /// Write the partition here and print the report instead.
        #[arg(short = 'o')]
        output: Option<PathBuf>,
        /// Write a `size,count` CSV histogram of chain sizes here.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Validate a partition file (`-` for standard input).
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        require: Vec<Requirement>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        min_size: Option<usize>,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Normalized matching check of level graphs.
    NmCheck {
        #[arg(short = 'n')]
        n: u32,
        /// Upper rank of a single level graph.
        #[arg(short = 'k', conflicts_with = "all")]
        k: Option<u32>,
        #[arg(long)]
        all: bool,
        /// Enumerate subsets instead of solving a flow problem.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Connected components of a level graph.
    Components {
        #[arg(short = 'n')]
        n: u32,
        #[arg(short = 'k')]
        k: u32,
    },
    /// Vertices and weighted edges of a level graph.
    LevelGraph {
        #[arg(short = 'n')]
        n: u32,
        #[arg(short = 'k')]
        k: u32,
    },
    /// Number of complete matchings of a level graph and the lower bound.
    Matchings {
        #[arg(short = 'n')]
        n: u32,
        #[arg(short = 'k')]
        k: u32,
        #[arg(long, value_enum, default_value_t = SideArg::Upper)]
        side: SideArg,
    },
    /// Exhaustive check of the mirror map, the order and its covers.
    OrderCheck {
        #[arg(short = 'n')]
        n: u32,
    },
    /// Count symmetric chain decompositions.
    CountScd {
        #[arg(short = 'n')]
        n: u32,
        #[arg(long, value_enum)]
        mode: CountMode,
    },
    /// Enclosure of the constant alpha.
    Alpha {
        #[arg(long)]
        precision: f64,
        /// Also report the smallest K for this epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

struct Ctx {
    format: SubsetFormat,
    max_n: u32,
}

impl Ctx {
    fn ground(&self, n: u32) -> Result<GroundSet> {
        if n > self.max_n {
            return Err(Error::input(format!("n = {n} exceeds the limit {}", self.max_n)));
        }
        GroundSet::new(n)
    }

    fn sweep_ground(&self, n: u32, what: &str) -> Result<GroundSet> {
        let g = self.ground(n)?;
        if n > SWEEP_MAX_N {
            return Err(Error::resource(what, format!("2^{n} subsets")));
        }
        Ok(g)
    }

    fn subset(&self, a: &SubsetArgs) -> Result<Subset> {
        Subset::parse_any(self.ground(a.n)?, &a.x)
    }

    fn render(&self, s: Subset) -> String {
        s.render(self.format)
    }
}

fn max_n_from_env() -> Result<u32> {
    match std::env::var(MAX_N_ENV) {
        Err(_) => Ok(MAX_N),
        Ok(text) => {
            let v: u32 = text
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("{MAX_N_ENV} must be an integer, got {text:?}")))?;
            if v > MAX_N {
                return Err(Error::resource(
                    format!("{MAX_N_ENV} = {v} needs multiword subsets"),
                    format!("masks wider than {MAX_N} bits"),
                ));
            }
            Ok(v)
        }
    }
}

/// Output of a subcommand: exit code and payload.
struct Outcome {
    ok: bool,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn json<T: Serialize>(value: &T, ok: bool) -> Result<Outcome> {
        Ok(Outcome { ok, stdout: to_line(value)?, stderr: String::new() })
    }
}

fn to_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

/// Parse `argv` (including the program name) and execute it.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CommandResult { code: 0, stdout: text, stderr: String::new() }
                }
                _ => CommandResult { code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    let outcome = max_n_from_env().and_then(|max_n| {
        let ctx = Ctx { format: cli.format.into(), max_n };
        let threads = cli.threads.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::input(format!("cannot start {threads} threads: {e}")))?;
        pool.install(|| dispatch(&ctx, cli.command))
    });
    match outcome {
        Ok(o) => CommandResult { code: if o.ok { 0 } else { 1 }, stdout: o.stdout, stderr: o.stderr },
        Err(e) => CommandResult { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn dispatch(ctx: &Ctx, command: Command) -> Result<Outcome> {
    match command {
        Command::Sig(a) => Outcome::json(&signature(ctx.subset(&a)?).to_json(ctx.format), true),
        Command::Csig(a) => {
            Outcome::json(&circular_signature(ctx.subset(&a)?).to_json(ctx.format), true)
        }
        Command::Chain(a) => {
            let x = ctx.subset(&a)?;
            let chain = btk_chain(x);
            let elements: Vec<String> = chain.elements().iter().map(|&s| ctx.render(s)).collect();
            Outcome::json(
                &json!({"n": a.n, "x": ctx.render(x), "chain": elements, "symmetric": chain.is_symmetric()}),
                true,
            )
        }
        Command::Mirror(a) => {
            let x = ctx.subset(&a)?;
            let p = mirror(x)?;
            Outcome::json(&json!({"n": a.n, "x": ctx.render(x), "mirror": ctx.render(p)}), true)
        }
        Command::Covers { subset, up, down: _ } => {
            let x = ctx.subset(&subset)?;
            let (direction, covers) = if up { ("up", covers_up(x)?) } else { ("down", covers_down(x)?) };
            let covers: Vec<String> = covers.into_iter().map(|s| ctx.render(s)).collect();
            Outcome::json(
                &json!({"n": subset.n, "x": ctx.render(x), "direction": direction, "covers": covers}),
                true,
            )
        }
        Command::Scd { n, kleitman, bits } => scd(ctx, n, kleitman, bits),
        Command::PartitionUniform { n, epsilon, output, stats } => {
            partition_uniform(ctx, n, epsilon, output, stats)
        }
        Command::Verify { file, require, count, min_size, max_size } => {
            let req = Requirements {
                skipless: require.contains(&Requirement::Skipless),
                rank_symmetric: require.contains(&Requirement::RankSymmetric),
                symmetric: require.contains(&Requirement::Symmetric),
                count,
                min_size,
                max_size,
            };
            verify(ctx, &file, &req)
        }
        Command::NmCheck { n, k, all, exhaustive } => {
            let ground = ctx.sweep_ground(n, "level graph construction")?;
            let engine = if exhaustive { NmEngine::Exhaustive } else { NmEngine::Auto };
            match k {
                Some(k) if !all => {
                    let report = verify_level(ground, k, engine)?;
                    let ok = report.holds && report.weight_certificate;
                    Outcome::json(&report, ok)
                }
                _ => {
                    let report = verify_poset_nm(ground, engine)?;
                    Outcome::json(&report, report.holds)
                }
            }
        }
        Command::Components { n, k } => {
            let ground = ctx.sweep_ground(n, "level graph construction")?;
            Outcome::json(&component_stats(&level_graph(ground, k)?), true)
        }
        Command::LevelGraph { n, k } => {
            let ground = ctx.sweep_ground(n, "level graph construction")?;
            Outcome::json(&level_graph(ground, k)?.to_json(ctx.format), true)
        }
        Command::Matchings { n, k, side } => {
            let ground = ctx.sweep_ground(n, "level graph construction")?;
            let (side, saturated, other) = match side {
                SideArg::Upper => (LevelSide::Upper, binomial(n, k), binomial(n, k.saturating_sub(1))),
                SideArg::Lower => (LevelSide::Lower, binomial(n, k.saturating_sub(1)), binomial(n, k)),
            };
            if saturated > MAX_SATURATED_SIDE as u64 {
                return Err(Error::resource(
                    "counting complete matchings",
                    format!("2^{saturated} subsets of the saturated side"),
                ));
            }
            let g = level_graph(ground, k)?;
            let count = count_complete_matchings(&g, side)?;
            let (bound, meets) = if saturated <= other {
                (Some(matching_lower_bound(saturated, other)?), meets_matching_bound(&count, saturated, other))
            } else {
                (None, true)
            };
            Outcome::json(
                &json!({
                    "n": n, "k": k, "side": side, "saturated": saturated, "other": other,
                    "count": count.to_string(), "lower_bound": bound, "meets_bound": meets,
                }),
                meets,
            )
        }
        Command::OrderCheck { n } => {
            let ground = ctx.sweep_ground(n, "order check")?;
            let report = check_order(ground);
            Outcome::json(&report, report.holds)
        }
        Command::CountScd { n, mode } => {
            let ground = ctx.ground(n)?;
            match mode {
                CountMode::Exact => {
                    let count = count_scds_exact(ground)?;
                    Outcome::json(&json!({"n": n, "mode": "exact", "count": count.to_string()}), true)
                }
                CountMode::Kleitman => {
                    let l = kleitman_l(n);
                    let count = num_bigint::BigUint::from(1u32) << l;
                    Outcome::json(
                        &json!({"n": n, "mode": "kleitman", "l": l, "count": count.to_string()}),
                        true,
                    )
                }
                CountMode::Bound => {
                    let mut report = scd_bounds_report(ground);
                    if n <= crate::counting::MAX_EXACT_SCD_N {
                        report.exact = Some(count_scds_exact(ground)?.to_string());
                    }
                    let ok = report.lower_le_upper;
                    Outcome::json(&report, ok)
                }
            }
        }
        Command::Alpha { precision, epsilon } => {
            let a = alpha_constant(precision)?;
            let k = epsilon.map(k_for_epsilon).transpose()?;
            Outcome::json(
                &json!({
                    "lo": a.lo, "hi": a.hi, "width": a.width(), "terms": a.terms,
                    "precision": precision, "epsilon": epsilon, "k": k,
                }),
                true,
            )
        }
    }
}

fn partition_text(p: &ChainPartition, format: SubsetFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_partition(p, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("json is utf-8"))
}

fn scd(ctx: &Ctx, n: Option<u32>, seed: Option<PathBuf>, bits: Option<String>) -> Result<Outcome> {
    let partition = match (seed, bits) {
        (Some(path), Some(bits)) => {
            let file = read_partition(BufReader::new(open(&path)?))?;
            if file.header.universe != Universe::Lattice {
                return Err(Error::input("the seed must partition the whole lattice"));
            }
            let chains = file
                .chains
                .into_iter()
                .map(|c| crate::chain::Chain::new(file.ground, c))
                .collect::<Result<Vec<_>>>()?;
            let mut seed = ChainPartition {
                ground: file.ground,
                universe: Universe::Lattice,
                chains,
                provenance: file.header.provenance,
            };
            seed.canonicalize();
            let out = kleitman_extend(&seed, &bits)?;
            if let Some(n) = n {
                if n != out.ground.n() {
                    return Err(Error::input(format!(
                        "seed has n = {}, so the result has n = {}, not {n}",
                        seed.ground.n(),
                        out.ground.n()
                    )));
                }
            }
            ctx.ground(out.ground.n())?;
            out
        }
        (None, None) => {
            let n = n.ok_or_else(|| Error::input("scd needs -n"))?;
            btk_scd(ctx.sweep_ground(n, "symmetric chain decomposition")?)
        }
        _ => return Err(Error::input("--kleitman and --bits go together")),
    };
    Ok(Outcome { ok: true, stdout: partition_text(&partition, ctx.format)?, stderr: String::new() })
}

fn partition_uniform(
    ctx: &Ctx,
    n: u32,
    epsilon: f64,
    output: Option<PathBuf>,
    stats: Option<PathBuf>,
) -> Result<Outcome> {
    let ground = ctx.sweep_ground(n, "uniform partition")?;
    let (partition, report) = uniform_rank_symmetric_partition(ground, epsilon)?;
    if let Some(path) = stats {
        let mut csv = String::from("size,count\n");
        for (size, count) in partition.size_histogram() {
            csv.push_str(&format!("{size},{count}\n"));
        }
        std::fs::write(&path, csv)?;
    }
    let text = partition_text(&partition, ctx.format)?;
    match output {
        Some(path) => {
            let mut f = File::create(&path)?;
            f.write_all(text.as_bytes())?;
            Ok(Outcome { ok: true, stdout: to_line(&report)?, stderr: String::new() })
        }
        None => Ok(Outcome { ok: true, stdout: text, stderr: to_line(&report)? }),
    }
}

fn open(path: &PathBuf) -> Result<Box<dyn std::io::Read>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(std::io::stdin()))
    } else {
        Ok(Box::new(File::open(path).map_err(|e| {
            Error::input(format!("cannot open {}: {e}", path.display()))
        })?))
    }
}

fn verify(ctx: &Ctx, path: &PathBuf, req: &Requirements) -> Result<Outcome> {
    let file = read_partition(BufReader::new(open(path)?))?;
    ctx.ground(file.ground.n())?;
    let mut verdict = verify_chains(file.ground, file.header.universe, &file.chains, req);
    let declared = file.header.chains;
    let header_ok = declared == file.chains.len();
    if !header_ok {
        verdict.ok = false;
        verdict.failure_count += 1;
        verdict.failures.push(crate::partition::Failure::WrongCount {
            expected: declared,
            actual: file.chains.len(),
        });
    }
    let provenance: Provenance = file.header.provenance;
    let payload = json!({
        "n": file.ground.n(),
        "universe": file.header.universe,
        "provenance": provenance,
        "requirements": req,
        "verdict": verdict,
    });
    Outcome::json(&payload, verdict.ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> CommandResult {
        run(std::iter::once("symchain").chain(args.iter().copied()))
    }

    #[test]
    fn worked_example() {
        let r = run_args(&["sig", "-n", "12", "{2,3,4,6,7,10,11}"]);
        assert_eq!(r.code, 0, "{r:?}");
        let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        assert_eq!(v["stars"], "{1,2,3,10}");
    }

    #[test]
    fn usage_errors_leave_stdout_empty() {
        for args in [
            vec!["sig"],
            vec!["nope"],
            vec!["sig", "-n", "4", "{9}"],
            vec!["mirror", "-n", "4", "{1}"],
            vec!["count-scd", "-n", "6", "--mode", "exact"],
        ] {
            let r = run_args(&args);
            assert_eq!(r.code, 2, "{args:?}");
            assert!(r.stdout.is_empty());
            assert!(!r.stderr.is_empty());
        }
    }

    #[test]
    fn mirror_of_middle_level() {
        let r = run_args(&["mirror", "-n", "4", "{1,3}"]);
        let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        assert_eq!(v["mirror"], "{1,3}");
    }
}
