//! `secgraph`: build graphs from scenario files, export the public view,
//! compute metrics, run attacks and evaluate access policies.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use secgraph_core::access::{evaluate_access, visible_members, AccessError, Policy};
use secgraph_core::adversary::{run_attack, AdversaryKind, AttackConfig, AttackError, DEFAULT_EXACT_LIMIT};
use secgraph_core::analysis::metrics_report;
use secgraph_core::codec::{canonical_json, deserialize_graph, export_dot, public_view_to_json, serialize_graph};
use secgraph_core::generate::{random_graph, GenConfig};
use secgraph_core::scenario::{catalog_of, Scenario, ScenarioError};
use secgraph_core::{Graph, UserId};

#[derive(Parser)]
#[command(name = "secgraph", version, about = "Secretary-based private social graphs")]
struct Cli {
    /// Master seed; overrides the scenario seed where one applies.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Scenario file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file to read (default: <out>/graph.json).
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a whole scenario and write every output.
    Run,
    /// Build a graph from the scenario's setup section, or a random one.
    Gen(GenArgs),
    /// Apply the scenario's connection list to an existing graph.
    Connect(GraphArg),
    /// Export the public view as JSON and/or DOT.
    Export {
        #[arg(long)]
        public: bool,
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Analytic and measured privacy metrics.
    Metrics(GraphArg),
    /// Run one adversary against a graph.
    Attack(AttackArgs),
    /// Access-control queries.
    Acl {
        #[command(subcommand)]
        command: AclCommand,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    users: Option<u32>,
    #[arg(long)]
    snodes: Option<u32>,
    #[arg(long)]
    types: Option<u32>,
    #[arg(long, default_value_t = 1)]
    instances: u32,
    /// Mean connections per user.
    #[arg(long, default_value_t = 0.0)]
    degree: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Seeker,
    Passive,
    Active,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long, value_delimiter = ',')]
    coalition: Vec<String>,
    #[arg(long)]
    attacker: Option<String>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 0)]
    probes: u32,
    #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
    #[arg(long, default_value_t = 10_000)]
    max_probes: u32,
    #[command(flatten)]
    graph: GraphArg,
}

#[derive(Subcommand)]
enum AclCommand {
    /// Permissions of `viewer` on `owner`'s page under the scenario's policies.
    Eval {
        #[arg(long)]
        owner: String,
        #[arg(long)]
        viewer: String,
        #[command(flatten)]
        graph: GraphArg,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::new(e.exit_code() as u8, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e)
    }
}

impl From<AttackError> for Failure {
    fn from(e: AttackError) -> Self {
        let code = match e {
            AttackError::UnknownUser(_) | AttackError::EmptyCoalition => 3,
            _ => 4,
        };
        Failure::new(code, e)
    }
}

impl From<AccessError> for Failure {
    fn from(e: AccessError) -> Self {
        let code = match e {
            AccessError::UnknownUser(_) => 3,
            _ => 4,
        };
        Failure::new(code, e)
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario, Failure> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| Failure::new(2, "this command needs --input <scenario.json>"))?;
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

fn graph_path(cli: &Cli, arg: &GraphArg) -> PathBuf {
    arg.graph.clone().unwrap_or_else(|| cli.out.join("graph.json"))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    deserialize_graph(&bytes).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn write_out(cli: &Cli, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    fs::create_dir_all(&cli.out)?;
    fs::write(cli.out.join(name), bytes)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run => {
            let output = load_scenario(cli)?.execute()?;
            output.write_to(&cli.out)?;
        }
        Command::Gen(args) => {
            let graph = match (&cli.input, args.users, args.snodes, args.types) {
                (Some(_), ..) => {
                    let scenario = load_scenario(cli)?;
                    scenario.catalog()?;
                    scenario.setup_graph()?
                }
                (None, Some(users), Some(snodes), Some(types)) => {
                    let config = GenConfig {
                        instances: args.instances,
                        ..GenConfig::naive(users, snodes, types, args.degree)
                    };
                    random_graph(&config, cli.seed.unwrap_or(0)).map_err(|e| Failure::new(4, e))?
                }
                _ => {
                    return Err(Failure::new(
                        2,
                        "gen needs --input, or --users, --snodes and --types",
                    ))
                }
            };
            write_out(cli, "graph.json", &serialize_graph(&graph))?;
        }
        Command::Connect(arg) => {
            let scenario = load_scenario(cli)?;
            let mut graph = load_graph(&graph_path(cli, arg))?;
            let connect_only = Scenario {
                connections: scenario.connections.clone(),
                ..Scenario::default()
            };
            connect_only.validate_against(&catalog_of(&graph))?;
            connect_only.apply_connections(&mut graph)?;
            write_out(cli, "graph.json", &serialize_graph(&graph))?;
        }
        Command::Export { public, dot, graph } => {
            if !public && !dot {
                return Err(Failure::new(2, "export needs --public and/or --dot"));
            }
            let view = load_graph(&graph_path(cli, graph))?.export_public_view();
            if *public {
                write_out(cli, "public.json", &public_view_to_json(&view))?;
            }
            if *dot {
                write_out(cli, "public.dot", export_dot(&view).as_bytes())?;
            }
        }
        Command::Metrics(arg) => {
            let graph = load_graph(&graph_path(cli, arg))?;
            let report = metrics_report(&graph, None).map_err(|e| Failure::new(4, e))?;
            write_out(cli, "metrics.json", &canonical_json(&report))?;
        }
        Command::Attack(args) => {
            let graph = load_graph(&graph_path(cli, &args.graph))?;
            let kind = match args.model {
                Model::Seeker => AdversaryKind::Seeker,
                Model::Passive => AdversaryKind::Passive {
                    coalition: args.coalition.iter().map(|c| UserId::from(c.as_str())).collect(),
                },
                Model::Active => {
                    let need = |v: &Option<String>, flag: &str| {
                        v.as_deref()
                            .map(UserId::from)
                            .ok_or_else(|| Failure::new(2, format!("active attack needs --{flag}")))
                    };
                    AdversaryKind::Active {
                        attacker: need(&args.attacker, "attacker")?,
                        target: need(&args.target, "target")?,
                        probes: args.probes,
                    }
                }
            };
            let config = AttackConfig {
                seed: cli.seed.unwrap_or(0),
                exact_limit: args.exact_limit,
                max_probes: args.max_probes,
                ..AttackConfig::default()
            };
            let report = canonical_json(&run_attack(&graph, &kind, &config)?);
            write_out(cli, "attack-0.json", &report)?;
            print!("{}", String::from_utf8_lossy(&report));
        }
        Command::Acl {
            command: AclCommand::Eval { owner, viewer, graph },
        } => {
            let graph = load_graph(&graph_path(cli, graph))?;
            let (owner, viewer) = (UserId::from(owner.as_str()), UserId::from(viewer.as_str()));
            let mut policies = match &cli.input {
                Some(_) => load_scenario(cli)?.build_policies(&graph)?,
                None => Default::default(),
            };
            let policy = policies.remove(&owner).unwrap_or_else(|| Policy::new(owner.clone()));
            let permissions = evaluate_access(&graph, &policy, &owner, &viewer)?;
            let members = visible_members(&graph, &policy, &owner, &viewer)?;
            let doc = json!({
                "owner": owner,
                "viewer": viewer,
                "permissions": permissions,
                "visible_members": members,
            });
            print!("{}", String::from_utf8_lossy(&canonical_json(&doc)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
