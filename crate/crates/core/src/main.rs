//! Command-line front end: coverability verdicts, protocol
//! transformations and generators, with deterministic machine-readable
//! output.
//!
//! Exit codes: 0 = decided, 1 = error, 2 = unknown.

use bpcov::line_cover::{cover_lines, LineCoverError};
use bpcov::minsky::reduce::protocol_from_minsky;
use bpcov::minsky::parse_minsky;
use bpcov::protocol::phase::{infer_phase_partition, PhaseInference};
use bpcov::protocol::unfold::k_unfold;
use bpcov::protocol::{parse_protocol, print_protocol, Protocol};
use bpcov::semantics::explore::{
    brute_force_cover, brute_force_cover_family, SearchOptions, TopologyFamily,
};
use bpcov::semantics::trace::{parse_execution, render_execution};
use bpcov::semantics::{replay, CoverVerdict, Execution};
use bpcov::star_cover::reduce::protocol_from_vass;
use bpcov::star_cover::{cover_1pb, parse_vass, StarCoverError};
use bpcov::topology::lift::lift_execution;
use bpcov::topology::unfold::unfold_to_tree;
use bpcov::topology::{parse_edge_file, parse_topology, Topology};
use clap::{Args, Parser, Subcommand};
use std::io::{Read, Write};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "bpcov",
    about = "Coverability checking for broadcast networks of finite-state processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print elapsed wall-clock time to stderr.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args)]
struct TopologyArg {
    /// Topology literal (`line:N`, `star:N`, `clique:N`, `tree:{ε,1,...}`)
    /// or `@file` for an adjacency-list file with `edge u v` lines.
    #[arg(long)]
    topology: String,
}

fn load_topology(spec: &str) -> Result<Topology, String> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = read_input(path).map_err(|e| e.to_string())?;
        parse_edge_file(&text).map_err(|e| e.to_string())
    } else {
        parse_topology(spec).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide phase-boundedness and print the partition.
    Check { file: String },
    /// Write the k-unfolding of a protocol.
    Unfold {
        file: String,
        #[arg(long)]
        k: u32,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Coverability over line topologies (protocols with at most 2 phases).
    CoverLines {
        file: String,
        #[arg(long)]
        target: String,
        /// Print the five-vertex witness fragment.
        #[arg(long)]
        witness: bool,
    },
    /// Coverability over all graphs (protocols with at most 1 phase).
    #[command(name = "cover-1pb")]
    Cover1pb {
        file: String,
        #[arg(long)]
        target: String,
        /// Print the star witness fragment.
        #[arg(long)]
        witness: bool,
    },
    /// Exhaustive breadth-first coverability search.
    Brute {
        file: String,
        #[arg(long)]
        target: String,
        /// Topology literal or `@file`; mutually exclusive with --family.
        #[arg(long)]
        topology: Option<String>,
        /// Family literal: `lines:N`, `stars:N` or `trees:H,D,M`.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        max_depth: Option<usize>,
        /// Node budget before giving up with UNKNOWN.
        #[arg(long, default_value_t = 10_000_000)]
        budget: usize,
        /// Sort star leaves to shrink the search (never changes verdicts).
        #[arg(long)]
        symmetry: bool,
        /// Print the witness trace.
        #[arg(long)]
        witness: bool,
    },
    /// Generate the reduction protocol of a two-counter machine.
    GenMinsky {
        machine: String,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Generate the one-phase protocol simulating a VASS.
    GenVass {
        vass: String,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Lift a witness trace onto the tree unfolding of its topology.
    UnfoldTree {
        file: String,
        #[command(flatten)]
        topology: TopologyArg,
        /// Witness trace file (as printed by `brute --witness`).
        #[arg(long)]
        witness: String,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Validate a witness trace and print the final configuration.
    Replay {
        file: String,
        #[command(flatten)]
        topology: TopologyArg,
        /// Trace file, `-` for stdin.
        #[arg(long)]
        trace: String,
    },
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
    }
}

fn write_output(path: &str, content: &str) -> std::io::Result<()> {
    if path == "-" {
        std::io::stdout().write_all(content.as_bytes())
    } else {
        std::fs::write(path, content)
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn load_protocol(path: &str) -> Result<Protocol, String> {
    let text = read_input(path).map_err(|e| format!("{path}: {e}"))?;
    parse_protocol(&text).map_err(|e| format!("{path}:{e}"))
}

fn target_of(p: &Protocol, name: &str) -> Result<bpcov::protocol::StateId, String> {
    p.state_id(name)
        .ok_or_else(|| format!("unknown target state `{name}`"))
}

fn parse_family(spec: &str) -> Result<TopologyFamily, String> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| format!("bad family literal `{spec}`"))?;
    let bad = || format!("bad family literal `{spec}`");
    match kind {
        "lines" => Ok(TopologyFamily::Lines {
            max: arg.parse().map_err(|_| bad())?,
        }),
        "stars" => Ok(TopologyFamily::Stars {
            max: arg.parse().map_err(|_| bad())?,
        }),
        "trees" => {
            let parts: Vec<&str> = arg.split(',').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok(TopologyFamily::Trees {
                max_height: parts[0].parse().map_err(|_| bad())?,
                max_degree: parts[1].parse().map_err(|_| bad())?,
                max_nodes: parts[2].parse().map_err(|_| bad())?,
            })
        }
        _ => Err(bad()),
    }
}

/// Prints a verdict; returns the exit code (0 decided, 2 unknown).
fn report_verdict(
    p: &Protocol,
    verdict: &CoverVerdict,
    extra: Option<String>,
    witness: bool,
) -> ExitCode {
    match verdict {
        CoverVerdict::Coverable {
            topology,
            witness: exec,
            vertex,
        } => {
            println!(
                "COVERABLE vertex={} len={}",
                topology.vertex_name(*vertex),
                exec.len()
            );
            if let Some(line) = extra {
                println!("{line}");
            }
            if witness {
                print!("{}", render_execution(p, topology, exec));
            }
            ExitCode::from(0)
        }
        CoverVerdict::NotCoverable => {
            println!("NOT_COVERABLE");
            ExitCode::from(0)
        }
        CoverVerdict::Unknown { reason } => {
            println!("UNKNOWN");
            eprintln!("unknown: {reason}");
            ExitCode::from(2)
        }
    }
}

fn run() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = dispatch(&cli.command);
    if cli.timing {
        eprintln!("elapsed: {:?}", start.elapsed());
    }
    code
}

fn dispatch(cmd: &Command) -> ExitCode {
    match cmd {
        Command::Check { file } => {
            let p = match load_protocol(file) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            match infer_phase_partition(&p) {
                PhaseInference::Bounded(part) => {
                    println!("PHASE_BOUNDED k={}", part.k());
                    for q in p.states() {
                        println!("state {} {}", p.state_name(q), part.label(q));
                    }
                    ExitCode::from(0)
                }
                PhaseInference::NotPhaseBounded => {
                    println!("NOT_PHASE_BOUNDED");
                    ExitCode::from(0)
                }
            }
        }
        Command::Unfold { file, k, output } => {
            let p = match load_protocol(file) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            if *k < 1 {
                return fail("--k must be at least 1");
            }
            let u = k_unfold(&p, *k);
            match write_output(output, &print_protocol(&u)) {
                Ok(()) => ExitCode::from(0),
                Err(e) => fail(e),
            }
        }
        Command::CoverLines {
            file,
            target,
            witness,
        } => {
            let p = match load_protocol(file) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let q = match target_of(&p, target) {
                Ok(q) => q,
                Err(e) => return fail(e),
            };
            match cover_lines(&p, q) {
                Ok(out) => {
                    let extra = out.pair.map(|(a, b)| {
                        format!("pair={},{}", p.state_name(a), p.state_name(b))
                    });
                    report_verdict(&p, &out.verdict, extra, *witness)
                }
                Err(e @ LineCoverError::NotPhaseBoundedWithin2(_)) => fail(e),
                Err(e) => fail(e),
            }
        }
        Command::Cover1pb {
            file,
            target,
            witness,
        } => {
            let p = match load_protocol(file) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let q = match target_of(&p, target) {
                Ok(q) => q,
                Err(e) => return fail(e),
            };
            match cover_1pb(&p, q) {
                Ok(out) => {
                    let extra = out.print.as_ref().map(|pr| format!("print={}", pr.render(&p)));
                    report_verdict(&p, &out.verdict, extra, *witness)
                }
                Err(e @ StarCoverError::NotPhaseBoundedWithin1(_)) => fail(e),
                Err(e) => fail(e),
            }
        }
        Command::Brute {
            file,
            target,
            topology,
            family,
            max_depth,
            budget,
            symmetry,
            witness,
        } => {
            let p = match load_protocol(file) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let q = match target_of(&p, target) {
                Ok(q) => q,
                Err(e) => return fail(e),
            };
            let opts = SearchOptions {
                depth_bound: *max_depth,
                node_budget: *budget,
                star_symmetry: *symmetry,
                ..Default::default()
            };
            let verdict = match (topology, family) {
                (Some(t), None) => {
                    let topo = match load_topology(t) {
                        Ok(t) => t,
                        Err(e) => return fail(e),
                    };
                    brute_force_cover(&p, q, &topo, &opts)
                }
                (None, Some(f)) => {
                    let fam = match parse_family(f) {
                        Ok(f) => f,
                        Err(e) => return fail(e),
                    };
                    brute_force_cover_family(&p, q, &fam, &opts)
                }
                _ => return fail("exactly one of --topology / --family is required"),
            };
            let extra = match &verdict {
                CoverVerdict::Coverable { topology, .. } if family.is_some() => Some(format!(
                    "topology_size={}",
                    topology.num_vertices()
                )),
                _ => None,
            };
            report_verdict(&p, &verdict, extra, *witness)
        }
        Command::GenMinsky { machine, output } => {
            let text = match read_input(machine) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let m = match parse_minsky(&text) {
                Ok(m) => m,
                Err(e) => return fail(e),
            };
            let p = protocol_from_minsky(&m);
            match write_output(output, &print_protocol(&p)) {
                Ok(()) => ExitCode::from(0),
                Err(e) => fail(e),
            }
        }
        Command::GenVass { vass, output } => {
            let text = match read_input(vass) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let (v, init) = match parse_vass(&text) {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            let p = protocol_from_vass(&v, init);
            match write_output(output, &print_protocol(&p)) {
                Ok(()) => ExitCode::from(0),
                Err(e) => fail(e),
            }
        }
        Command::UnfoldTree {
            file,
            topology,
            witness,
            output,
        } => {
            let p = match load_protocol(file) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let topo = match load_topology(&topology.topology) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let text = match read_input(witness) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let exec = match parse_execution(&p, &topo, &text) {
                Ok(e) => e,
                Err(e) => return fail(e),
            };
            let final_cfg = match replay(&p, &topo, &exec) {
                Ok(c) => c,
                Err(e) => return fail(format!("witness does not replay: {e}")),
            };
            // the covering vertex from the trace header, else the first
            // vertex whose final state differs... default to vertex 0
            let root = covering_vertex(&text, &topo).unwrap_or(bpcov::topology::VertexId(0));
            let (tree, labels) = unfold_to_tree(&topo, root, exec.len());
            let lifted = match lift_execution(&p, &topo, &exec, &tree, &labels) {
                Ok(l) => l,
                Err(e) => return fail(format!("lift failed: {e}")),
            };
            let mut out = String::new();
            out.push_str(&format!(
                "COVERABLE vertex={} len={}\n",
                tree.topology().vertex_name(bpcov::topology::VertexId(0)),
                lifted.len()
            ));
            out.push_str(&tree.topology().to_string());
            out.push_str(&render_execution(&p, tree.topology(), &lifted));
            let _ = final_cfg;
            match write_output(output, &out) {
                Ok(()) => ExitCode::from(0),
                Err(e) => fail(e),
            }
        }
        Command::Replay {
            file,
            topology,
            trace,
        } => {
            let p = match load_protocol(file) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let topo = match load_topology(&topology.topology) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let text = match read_input(trace) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let exec: Execution = match parse_execution(&p, &topo, &text) {
                Ok(e) => e,
                Err(e) => return fail(e),
            };
            match replay(&p, &topo, &exec) {
                Ok(cfg) => {
                    println!("REPLAY_OK len={}", exec.len());
                    println!("final {}", cfg.render(&p, &topo));
                    ExitCode::from(0)
                }
                Err(e) => fail(e),
            }
        }
    }
}

/// Extracts `vertex=<v>` from a `COVERABLE ...` line of a trace file.
fn covering_vertex(text: &str, topo: &Topology) -> Option<bpcov::topology::VertexId> {
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("COVERABLE") {
            for field in rest.split_whitespace() {
                if let Some(v) = field.strip_prefix("vertex=") {
                    return topo.vertex_id(v);
                }
            }
        }
    }
    None
}

fn main() -> ExitCode {
    run()
}
