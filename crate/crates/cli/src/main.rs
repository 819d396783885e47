use std::fs;
use std::io;
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use zkcec_core::circuit::{build_miter, parse_netlist, Circuit, VarClass};
use zkcec_core::cnf::CnfFormula;
use zkcec_core::error::Error;
use zkcec_core::protocol::{
    prepare, run_plan, run_prover, run_verifier, Config, Instance, Mutation, PublicInstance, RomMode, TapeBudget,
    TapeSource, VerifyOptions,
};
use zkcec_core::sat::{compress, count_structures, factorial, solve, RefutationProof, SolveResult};
use zkcec_core::zk::{write_tapes, Channel, ProverTape, TcpChannel, VerifierTape};

use zkcec_cli::bench::{self, BenchOptions};
use zkcec_cli::outcome::{exit_code, Outcome, EXIT_ACCEPT, EXIT_INPUT, EXIT_NOT_EQUIVALENT};
use zkcec_cli::settings::{FileConfig, Overrides, CONFIG_ENV};

/// Print a line to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "zkcec", version, about = "Zero-knowledge combinational equivalence checking")]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    /// Base seed for dealer, verifier and prover randomness
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Memory read argument
    #[arg(long, global = true)]
    rom_mode: Option<RomMode>,

    /// Chain-compress the refutation (true or false)
    #[arg(long, global = true)]
    compress: Option<bool>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Pair {
    /// Public specification netlist
    spec: PathBuf,
    /// Secret implementation netlist
    #[arg(name = "IMPL")]
    imp: PathBuf,
}

#[derive(Args)]
struct Endpoint {
    /// Accept one peer on this address
    #[arg(long, conflicts_with = "connect")]
    listen: Option<String>,
    /// Connect to a listening peer
    #[arg(long)]
    connect: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the miter and write DIMACS, the variable partition and the index map
    Compile {
        #[command(flatten)]
        pair: Pair,
        /// Output directory
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Solve the miter in the clear and report the refutation size
    Solve {
        #[command(flatten)]
        pair: Pair,
        /// Write the refutation in binary form
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Write the refutation as a resolution trace
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the prover against a remote verifier
    Prove {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        endpoint: Endpoint,
        /// Prover correlation tape from `tape-gen`
        #[arg(long)]
        tape: Option<PathBuf>,
        /// Deliberately cheat (testing only)
        #[arg(long, value_name = "NAME")]
        mutate: Option<String>,
        /// Also write the JSON outcome here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the verifier against a remote prover
    Verify {
        /// Public specification netlist
        spec: PathBuf,
        #[command(flatten)]
        endpoint: Endpoint,
        /// Verifier correlation tape from `tape-gen`
        #[arg(long)]
        tape: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run both parties in one process
    RunLocal {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_name = "NAME")]
        mutate: Option<String>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Benchmark every spec/impl pair under a corpus directory
    Bench {
        corpus: PathBuf,
        /// CSV output
        #[arg(long)]
        report: Option<PathBuf>,
        /// Run pairs concurrently
        #[arg(long)]
        parallel: bool,
        /// Refuse pairs whose miter has more clauses
        #[arg(long, default_value_t = BenchOptions::default().max_clauses)]
        max_clauses: usize,
        /// Refuse runs needing more correlations
        #[arg(long, default_value_t = BenchOptions::default().max_tape)]
        max_tape: u64,
    },
    /// Count proof structures consistent with a compressed refutation
    EstimateStructures {
        /// Binary refutation written by `solve --proof`
        #[arg(required_unless_present = "chains")]
        proof: Option<PathBuf>,
        /// Chain lengths instead of a proof file, comma separated
        #[arg(long, value_delimiter = ',', conflicts_with = "proof")]
        chains: Option<Vec<usize>>,
    },
    /// Write matching prover and verifier correlation tapes
    TapeGen {
        /// Size the tapes for this spec/impl pair
        #[arg(long, requires = "imp", conflicts_with = "count")]
        spec: Option<PathBuf>,
        #[arg(long = "impl", id = "imp")]
        imp: Option<PathBuf>,
        /// Number of correlations
        #[arg(long, required_unless_present = "spec")]
        count: Option<u64>,
        #[arg(long)]
        prover_out: PathBuf,
        #[arg(long)]
        verifier_out: PathBuf,
    },
}

fn input_error(msg: impl Into<String>) -> Error {
    Error::Io(io::Error::new(io::ErrorKind::InvalidInput, msg.into()))
}

fn load_circuit(path: &Path) -> Result<Circuit, Error> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(parse_netlist(&path.to_string_lossy(), &text)?)
}

fn load_instance(pair: &Pair) -> Result<Instance, Error> {
    Instance::cec(&load_circuit(&pair.spec)?, &load_circuit(&pair.imp)?)
}

fn mutation(name: Option<&str>) -> Result<Option<Mutation>, Error> {
    name.map(|n| {
        Mutation::from_name(n).ok_or_else(|| {
            let known: Vec<&str> = Mutation::NAMED.iter().map(|(s, _)| *s).collect();
            input_error(format!("unknown mutation {n:?}; known: {}", known.join(", ")))
        })
    })
    .transpose()
}

fn write_out(path: &Path, data: &[u8]) -> Result<(), Error> {
    fs::write(path, data).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn emit(outcome: &Outcome, report: Option<&Path>) -> Result<i32, Error> {
    let json = outcome.to_json();
    say!("{json}");
    if let Some(p) = report {
        write_out(p, json.as_bytes())?;
    }
    Ok(outcome.code())
}

fn open_channel(ep: &Endpoint, file: &FileConfig) -> Result<Box<dyn Channel>, Error> {
    let listen = ep.listen.clone().or_else(|| if ep.connect.is_none() { file.transport.listen.clone() } else { None });
    let connect = ep.connect.clone().or_else(|| file.transport.connect.clone());
    let stream = match (listen, connect) {
        (Some(addr), _) => {
            let l = TcpListener::bind(&addr).map_err(|e| Error::Transport(format!("bind {addr}: {e}")))?;
            eprintln!("listening on {}", l.local_addr()?);
            l.accept().map_err(|e| Error::Transport(format!("accept: {e}")))?.0
        }
        (None, Some(addr)) => {
            let deadline = Instant::now() + Duration::from_secs(30);
            loop {
                match TcpStream::connect(&addr) {
                    Ok(s) => break s,
                    Err(_) if Instant::now() < deadline => std::thread::sleep(Duration::from_millis(100)),
                    Err(e) => return Err(Error::Transport(format!("connect {addr}: {e}"))),
                }
            }
        }
        (None, None) => return Err(input_error("one of --listen or --connect is required")),
    };
    Ok(Box::new(TcpChannel::new(stream)?))
}

fn cmd_compile(pair: &Pair, out: &Path) -> Result<i32, Error> {
    let spec = load_circuit(&pair.spec)?;
    let imp = load_circuit(&pair.imp)?;
    let m = build_miter(&spec, &imp)?;
    fs::create_dir_all(out)?;
    write_out(&out.join("miter.cnf"), format!("{}\n", m.combined().to_dimacs()).as_bytes())?;

    #[derive(Serialize)]
    struct VarEntry<'a> {
        var: usize,
        name: &'a str,
        class: &'static str,
    }
    #[derive(Serialize)]
    struct Partition<'a> {
        num_vars: usize,
        /// Clauses `1..=secret_clauses` of the DIMACS file are secret, the rest public.
        secret_clauses: usize,
        public_clauses: usize,
        public_vars: usize,
        variables: Vec<VarEntry<'a>>,
    }
    let class = |c: VarClass| match c {
        VarClass::Public => "public",
        VarClass::Io => "io",
        VarClass::Secret => "secret",
    };
    let part = Partition {
        num_vars: m.num_vars(),
        secret_clauses: m.phi_sec.len(),
        public_clauses: m.phi_pub.len(),
        public_vars: m.num_public_vars,
        variables: m
            .names
            .iter()
            .zip(&m.classes)
            .enumerate()
            .map(|(v, (n, c))| VarEntry { var: v + 1, name: n, class: class(*c) })
            .collect(),
    };
    write_out(&out.join("partition.json"), serde_json::to_string_pretty(&part).expect("serializes").as_bytes())?;

    #[derive(Serialize)]
    struct IndexEntry<'a> {
        name: &'a str,
        index: u64,
    }
    let index: Vec<IndexEntry> =
        m.names[..m.num_public_vars].iter().enumerate().map(|(v, n)| IndexEntry { name: n, index: v as u64 + 1 }).collect();
    write_out(&out.join("index.json"), serde_json::to_string_pretty(&index).expect("serializes").as_bytes())?;

    say!(
        "variables {} (public {}, io {}, secret {})",
        m.num_vars(),
        m.classes.iter().filter(|c| **c == VarClass::Public).count(),
        m.vars_io.len(),
        m.vars_sec.len()
    );
    say!("clauses {} (public {}, secret {})", m.phi_pub.len() + m.phi_sec.len(), m.phi_pub.len(), m.phi_sec.len());
    say!("wrote miter.cnf, partition.json, index.json to {}", out.display());
    Ok(EXIT_ACCEPT)
}

fn cmd_solve(pair: &Pair, cfg: &Config, proof_out: Option<&Path>, trace_out: Option<&Path>) -> Result<i32, Error> {
    let spec = load_circuit(&pair.spec)?;
    let m = build_miter(&spec, &load_circuit(&pair.imp)?)?;
    let f: CnfFormula = m.combined();
    let t = Instant::now();
    match solve(&f, cfg.solver_budget)? {
        SolveResult::Sat(model) => {
            say!("sat: circuits differ ({:.3}s)", t.elapsed().as_secs_f64());
            let ins: Vec<String> = m
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| n.starts_with("in:"))
                .map(|(v, n)| format!("{}={}", &n[3..], model[v] as u8))
                .collect();
            say!("counterexample: {}", ins.join(" "));
            Ok(EXIT_NOT_EQUIVALENT)
        }
        SolveResult::Unsat(p) => {
            let c = compress(&p);
            say!("unsat: circuits are equivalent ({:.3}s)", t.elapsed().as_secs_f64());
            say!("R {} R' {} width {}", p.len(), c.num_stored(), p.width(&f).max(c.max_width()));
            if let Some(path) = proof_out {
                let mut w = io::BufWriter::new(fs::File::create(path)?);
                p.write_binary(&mut w)?;
            }
            if let Some(path) = trace_out {
                write_out(path, zkcec_core::sat::export_trace(&f, &p).as_bytes())?;
            }
            Ok(EXIT_ACCEPT)
        }
    }
}

fn cmd_estimate(proof: Option<&Path>, chains: Option<&[usize]>) -> Result<i32, Error> {
    let lengths = match (chains, proof) {
        (Some(c), _) => c.to_vec(),
        (None, Some(path)) => {
            let mut r = io::BufReader::new(fs::File::open(path)?);
            compress(&RefutationProof::read_binary(&mut r)?).chain_lengths()
        }
        (None, None) => return Err(input_error("a proof file or --chains is required")),
    };
    let n = count_structures(&lengths)?;
    let f = factorial(lengths.len() - 1);
    let ratio = n.to_string().parse::<f64>().unwrap_or(f64::INFINITY) / f.to_string().parse::<f64>().unwrap_or(f64::INFINITY);
    say!("R' {}", lengths.len());
    say!("R {}", lengths.iter().sum::<usize>());
    say!("N {n}");
    say!("(R'-1)! {f}");
    say!("ratio {ratio:.6e}");
    say!("N >= (R'-1)! {}", n >= f);
    Ok(EXIT_ACCEPT)
}

fn cmd_tape_gen(
    pair: Option<(&Path, &Path)>,
    count: Option<u64>,
    cfg: &Config,
    prover_out: &Path,
    verifier_out: &Path,
) -> Result<i32, Error> {
    let n = match (pair, count) {
        (_, Some(n)) => n,
        (Some((s, i)), None) => {
            let inst = Instance::cec(&load_circuit(s)?, &load_circuit(i)?)?;
            let plan = prepare(&inst, cfg, None)?;
            let public = &plan.instance.public;
            TapeBudget::new(&plan.statement, public.phi_pub.len(), public.private_vars().len()).total()
        }
        (None, None) => return Err(input_error("--count or --spec/--impl is required")),
    };
    write_tapes(cfg.dealer_seed, n, prover_out, verifier_out)?;
    say!("wrote {n} correlations");
    Ok(EXIT_ACCEPT)
}

fn real_main() -> Result<i32, Error> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_ACCEPT };
            let _ = e.print();
            return Ok(code);
        }
    };
    let file = FileConfig::load(cli.config.as_deref()).map_err(input_error)?;
    let mut cfg = file.protocol.clone();
    Overrides { seed: cli.seed, rom_mode: cli.rom_mode, compress: cli.compress }.apply(&mut cfg);

    match &cli.command {
        Command::Compile { pair, out } => cmd_compile(pair, out),
        Command::Solve { pair, proof, trace } => cmd_solve(pair, &cfg, proof.as_deref(), trace.as_deref()),
        Command::Prove { pair, endpoint, tape, mutate, report } => {
            let m = mutation(mutate.as_deref())?;
            let plan = match prepare(&load_instance(pair)?, &cfg, m) {
                Ok(p) => p,
                Err(e @ (Error::NotEquivalent | Error::NotRefutable)) => return emit(&Outcome::failed(&e), report.as_deref()),
                Err(e) => return Err(e),
            };
            let tape = match tape {
                Some(p) => TapeSource::Given(ProverTape::load(p).map_err(|e| input_error(e.to_string()))?),
                None => TapeSource::Seeded,
            };
            let chan = open_channel(endpoint, &file)?;
            let outcome = match run_prover(&plan, &cfg, chan, tape) {
                Ok(r) => Outcome::accepted(None, Some(r)),
                Err(e) => Outcome::failed(&e),
            };
            emit(&outcome, report.as_deref())
        }
        Command::Verify { spec, endpoint, tape, report } => {
            let public = PublicInstance::cec(&load_circuit(spec)?);
            let tape = match tape {
                Some(p) => TapeSource::Given(VerifierTape::load(p).map_err(|e| input_error(e.to_string()))?),
                None => TapeSource::Seeded,
            };
            let chan = open_channel(endpoint, &file)?;
            let outcome = match run_verifier(&public, &cfg, chan, tape, VerifyOptions::default()) {
                Ok(r) => Outcome::accepted(Some(r), None),
                Err(e) => Outcome::failed(&e),
            };
            emit(&outcome, report.as_deref())
        }
        Command::RunLocal { pair, mutate, report } => {
            let m = mutation(mutate.as_deref())?;
            let outcome = match prepare(&load_instance(pair)?, &cfg, m) {
                Ok(plan) => {
                    let run = run_plan(&plan, &cfg, VerifyOptions::default());
                    match (run.verifier, run.prover) {
                        (Ok(v), Ok(p)) => Outcome::accepted(Some(v), Some(p)),
                        (Err(e), _) | (Ok(_), Err(e)) => Outcome::failed(&e),
                    }
                }
                Err(e @ (Error::NotEquivalent | Error::NotRefutable)) => Outcome::failed(&e),
                Err(e) => return Err(e),
            };
            emit(&outcome, report.as_deref())
        }
        Command::Bench { corpus, report, parallel, max_clauses, max_tape } => {
            let opts = BenchOptions { cfg: cfg.clone(), max_clauses: *max_clauses, max_tape: *max_tape, parallel: *parallel };
            let rows = bench::run(corpus, &opts).map_err(|e| input_error(format!("{}: {e}", corpus.display())))?;
            {
                use std::io::Write;
                let _ = io::stdout().write_all(bench::render_table(&rows).as_bytes());
            }
            if let Some(p) = report {
                let f = fs::File::create(p).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
                bench::write_csv(&rows, f).map_err(|e| input_error(e.to_string()))?;
            }
            Ok(EXIT_ACCEPT)
        }
        Command::EstimateStructures { proof, chains } => cmd_estimate(proof.as_deref(), chains.as_deref()),
        Command::TapeGen { spec, imp, count, prover_out, verifier_out } => {
            let pair = spec.as_deref().zip(imp.as_deref());
            cmd_tape_gen(pair, *count, &cfg, prover_out, verifier_out)
        }
    }
}

fn main() -> ExitCode {
    let code = match real_main() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("zkcec: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
