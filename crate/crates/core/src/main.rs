use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sclcone::arcs::build_arc_system;
use sclcone::chain::{normalize, parse_chain_auto, Factor};
use sclcone::disks::{enumerate_disk_generators, DiskError};
use sclcone::engine::{compute_scl_with, EngineOptions, Strategy};
use sclcone::family::{detect_congruence_pattern, scan, Axis, FitCaps, ScanOptions, ScanTable};
use sclcone::heisenberg::{disk_region, suv_bruteforce, suv_formula, DEFAULT_MAX_UV};
use sclcone::par::{self, Execution};

const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "sclcone", version, about = "Exact scl of chains in free products of two cyclic groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute scl of a chain at fixed orders (0 means infinite cyclic)
    Compute {
        chain: String,
        #[arg(long, default_value_t = 0)]
        order_a: u64,
        #[arg(long, default_value_t = 0)]
        order_b: u64,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Compute scl over a grid of orders and write a CSV table
    Scan {
        chain: String,
        /// comma list of orders and inclusive ranges, e.g. "0,2..12"
        #[arg(long)]
        orders_a: String,
        #[arg(long)]
        orders_b: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// fill the millis column
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Fit exact rational functions per congruence class to a scan table
    Fit {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = AxisArg::A)]
        axis: AxisArg,
        #[arg(long, default_value_t = 6)]
        max_period: u64,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        #[arg(long, default_value_t = 3)]
        max_pieces: usize,
    },
    /// List the disk-vector generators of each factor
    Diskgen {
        chain: String,
        #[arg(long, default_value_t = 0)]
        order_a: u64,
        #[arg(long, default_value_t = 0)]
        order_b: u64,
        #[arg(long)]
        sequential: bool,
    },
    /// Heisenberg group exponent sets
    Heisenberg {
        #[command(subcommand)]
        cmd: HeisenbergCmd,
    },
}

#[derive(Subcommand)]
enum HeisenbergCmd {
    /// Print S_{u,v} by enumeration and by formula
    Suv {
        #[arg(long)]
        u: u32,
        #[arg(long)]
        v: u32,
        /// exit nonzero unless the two agree
        #[arg(long)]
        check: bool,
    },
    /// Print the disk-region grid for m/n over u, v in 0..=max
    Region {
        #[arg(long)]
        m: i64,
        #[arg(long)]
        n: i64,
        #[arg(long, default_value_t = 12)]
        max: u32,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = StrategyArg::Lazy)]
    strategy: StrategyArg,
    /// run without the thread pool
    #[arg(long)]
    sequential: bool,
}

impl EngineArgs {
    fn options(&self) -> EngineOptions {
        let mut o = EngineOptions::from_env();
        o.strategy = match self.strategy {
            StrategyArg::Lazy => Strategy::Lazy,
            StrategyArg::Enumerate => Strategy::Enumerate,
        };
        if self.sequential {
            o.exec = Execution::Sequential;
        }
        o
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Lazy,
    Enumerate,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    A,
    B,
}

fn parse_orders(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| format!("bad range {part:?}"))?;
            let hi: u64 = hi.trim().parse().map_err(|_| format!("bad range {part:?}"))?;
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| format!("bad order {part:?}"))?);
        }
    }
    Ok(out)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("sclcone: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Command::Compute { chain, order_a, order_b, json, engine } => {
            let chain = match parse_chain_auto(&chain, (order_a, order_b)) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            match compute_scl_with(&chain, &engine.options()) {
                Ok(r) => {
                    for w in &r.warnings {
                        eprintln!("warning: {w}");
                    }
                    if json {
                        println!("{}", serde_json::to_string_pretty(&r.to_json()).unwrap());
                    } else {
                        println!("{}", r.display_value());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) if e.is_resource_limit() => fail(EXIT_RESOURCE, e),
                Err(e) => fail(1, e),
            }
        }
        Command::Scan { chain, orders_a, orders_b, out, jobs, timings, engine } => {
            let (oa, ob) = match (parse_orders(&orders_a), parse_orders(&orders_b)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return fail(EXIT_USAGE, e),
            };
            let template = match parse_chain_auto(&chain, (0, 0)) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let opts = ScanOptions {
                exec: engine.options().exec,
                engine: engine.options(),
                timings,
            };
            let table = par::with_threads(jobs, || scan(&template, &oa, &ob, &opts));
            let res = match out {
                Some(p) => File::create(&p)
                    .map_err(|e| e.to_string())
                    .and_then(|f| table.write_csv(BufWriter::new(f)).map_err(|e| e.to_string())),
                None => table.write_csv(io::stdout().lock()).map_err(|e| e.to_string()),
            };
            match res {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(1, e),
            }
        }
        Command::Fit { file, axis, max_period, max_degree, max_pieces } => {
            let table = match File::open(&file).map_err(|e| e.to_string()).and_then(|f| {
                ScanTable::read_csv(f).map_err(|e| e.to_string())
            }) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let axis = match axis {
                AxisArg::A => Axis::A,
                AxisArg::B => Axis::B,
            };
            let caps = FitCaps { max_period, max_degree, max_pieces };
            println!("caps: period <= {max_period}, degree <= {max_degree}, pieces <= {max_pieces}");
            match detect_congruence_pattern(&table, axis, caps) {
                Ok(fits) => {
                    for f in fits {
                        println!("{f}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    println!("no fit: {e}");
                    ExitCode::SUCCESS
                }
            }
        }
        Command::Diskgen { chain, order_a, order_b, sequential } => {
            let chain = match parse_chain_auto(&chain, (order_a, order_b)) {
                Ok(c) => normalize(&c),
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let sys = build_arc_system(&chain);
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let limits = EngineOptions::from_env().limits;
            for f in Factor::BOTH {
                let order = chain.factors.order(f);
                match enumerate_disk_generators(&sys, f, order, &limits, exec) {
                    Ok(set) => {
                        println!(
                            "factor {} (order {order}): {} generators, multiplicity bound {}",
                            chain.factors.spec(f).name,
                            set.generators.len(),
                            set.bound
                        );
                        for g in &set.generators {
                            println!("  {g:?}");
                        }
                    }
                    Err(e @ DiskError::ResourceLimit { .. }) => return fail(EXIT_RESOURCE, e),
                    Err(e) => return fail(1, e),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Heisenberg { cmd: HeisenbergCmd::Suv { u, v, check } } => {
            if u + v == 0 {
                return fail(EXIT_USAGE, "u + v must be at least 1");
            }
            let (lo, hi) = suv_formula(u, v);
            println!("formula: [{lo}, {hi}]");
            match suv_bruteforce(u, v) {
                Ok(set) => {
                    let listed: Vec<String> = set.iter().map(i64::to_string).collect();
                    println!("enumerated: {{{}}}", listed.join(", "));
                    let ok = set.iter().copied().eq(lo..=hi);
                    println!("{}", if ok { "match" } else { "MISMATCH" });
                    if check && !ok {
                        return ExitCode::from(1);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    println!("enumerated: unverified ({e}, cap {DEFAULT_MAX_UV})");
                    if check {
                        return fail(EXIT_RESOURCE, e);
                    }
                    ExitCode::SUCCESS
                }
            }
        }
        Command::Heisenberg { cmd: HeisenbergCmd::Region { m, n, max } } => {
            println!("rows u = 0..={max}, columns v = 0..={max}");
            for u in 0..=max {
                let line: String = (0..=max)
                    .map(|v| if disk_region(m, n, u, v) { '#' } else { '.' })
                    .collect();
                println!("{u:>3} {line}");
            }
            ExitCode::SUCCESS
        }
    }
}
