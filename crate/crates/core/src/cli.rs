//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or parse error, 2 negative result (path
//! not confidential, routing dead end), 3 enumeration cap exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::pathing::{
    enumerate_paths, most_likely_route, rank_paths, Path, PathingError, RouteError, RouteHop,
    DEFAULT_CAP,
};
use crate::propagation::{evaluate_path, Chaining, PathEvaluation, TestMode};
use crate::sim::simulate;
use crate::topology::{paper_fixture_text, parse_topology_with, ParseOptions, Topology};
use crate::trust::{display_round, Complementarity, ModelConstants};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainingArg {
    Edge,
    Output,
}

impl From<ChainingArg> for Chaining {
    fn from(c: ChainingArg) -> Self {
        match c {
            ChainingArg::Edge => Chaining::EdgeChaining,
            ChainingArg::Output => Chaining::OutputChaining,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMode {
    Trust,
    Untrust,
    Both,
}

impl CheckMode {
    fn modes(self) -> &'static [TestMode] {
        match self {
            CheckMode::Trust => &[TestMode::TrustTest],
            CheckMode::Untrust => &[TestMode::UntrustTest],
            CheckMode::Both => &[TestMode::TrustTest, TestMode::UntrustTest],
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "trustnet",
    version,
    about = "Fuzzy trust propagation and routing over P2P topologies"
)]
pub struct Cli {
    /// Topology file (.trust); reads standard input when omitted or '-'
    #[arg(long, global = true)]
    pub topology: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Digits kept when truncating numbers in text output
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=12))]
    pub decimals: u8,

    /// Require trust + untrust = 1 on every edge (default)
    #[arg(long, global = true, overrides_with = "no_strict")]
    pub strict: bool,

    #[arg(long = "no-strict", global = true, overrides_with = "strict")]
    pub no_strict: bool,

    #[arg(long, global = true, value_enum, default_value_t = ChainingArg::Edge)]
    pub chaining: ChainingArg,

    /// Maximum number of paths to enumerate
    #[arg(long, global = true, default_value_t = DEFAULT_CAP, value_parser = parse_cap)]
    pub cap: usize,

    #[arg(long, global = true)]
    pub theta_min: Option<f64>,
    #[arg(long, global = true)]
    pub theta_max: Option<f64>,
    #[arg(long, global = true)]
    pub theta_ind: Option<f64>,
    #[arg(long, global = true)]
    pub upsilon_min: Option<f64>,
    #[arg(long, global = true)]
    pub upsilon_max: Option<f64>,
    #[arg(long, global = true)]
    pub upsilon_ind: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_cap(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("{s:?} is not a positive integer")),
    }
}

fn parse_packets(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("{s:?} is not a positive integer")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the trust and/or untrust test along one path
    Check {
        /// Comma-separated node list, e.g. S,3,7,11,D
        path: String,
        #[arg(long, value_enum, default_value_t = CheckMode::Trust)]
        mode: CheckMode,
    },
    /// Rank every simple path by mean trust
    Rank {
        #[arg(long)]
        top: Option<usize>,
    },
    /// Greedy most likely route from source to destination
    Route,
    /// List every simple path in canonical order
    Enumerate,
    /// Print the reference topology
    Fixture,
    /// Forward packets along the greedy route
    Simulate {
        #[arg(long, default_value_t = 1, value_parser = parse_packets)]
        packets: u64,
    },
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub topology: Option<PathBuf>,
    pub format: OutputFormat,
    pub decimals: usize,
    pub constants: ModelConstants,
    pub strict: bool,
    pub chaining: Chaining,
    pub cap: usize,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<RunConfig, CliError> {
        let mut c = ModelConstants::default();
        let overrides = [
            (&mut c.theta_min, cli.theta_min),
            (&mut c.theta_max, cli.theta_max),
            (&mut c.theta_ind, cli.theta_ind),
            (&mut c.upsilon_min, cli.upsilon_min),
            (&mut c.upsilon_max, cli.upsilon_max),
            (&mut c.upsilon_ind, cli.upsilon_ind),
        ];
        for (slot, value) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        c.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(RunConfig {
            topology: cli.topology.clone(),
            format: cli.format,
            decimals: cli.decimals as usize,
            constants: c,
            strict: !cli.no_strict,
            chaining: cli.chaining.into(),
            cap: cli.cap,
        })
    }

    fn topology_name(&self) -> String {
        match &self.topology {
            Some(p) if p.as_os_str() != "-" => p.display().to_string(),
            _ => "-".to_string(),
        }
    }

    fn inputs(&self) -> Value {
        let c = &self.constants;
        json!({
            "topology": self.topology_name(),
            "format": format!("{:?}", self.format).to_lowercase(),
            "decimals": self.decimals,
            "strict": self.strict,
            "chaining": self.chaining.as_str(),
            "cap": self.cap,
            "constants": {
                "theta_min": c.theta_min,
                "theta_max": c.theta_max,
                "theta_ind": c.theta_ind,
                "upsilon_min": c.upsilon_min,
                "upsilon_max": c.upsilon_max,
                "upsilon_ind": c.upsilon_ind,
            },
        })
    }

    fn num(&self, x: f64) -> String {
        display_round(x, self.decimals)
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Cap(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Cap(_) => EXIT_CAP,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Cap(m) => m,
        }
    }
}

impl From<PathingError> for CliError {
    fn from(e: PathingError) -> Self {
        match e {
            PathingError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            PathingError::Path(p) => CliError::Input(p.to_string()),
        }
    }
}

/// What a command produced: text for stdout, optional diagnostic for
/// stderr, and the exit code.
struct Outcome {
    stdout: String,
    stderr: Option<String>,
    code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            stderr: None,
            code: EXIT_OK,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };
    match execute(&cli, stdin) {
        Ok(outcome) => {
            let _ = out.write_all(outcome.stdout.as_bytes());
            if let Some(msg) = outcome.stderr {
                let _ = writeln!(err, "{msg}");
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome, CliError> {
    if let Command::Fixture = cli.command {
        return Ok(Outcome::ok(paper_fixture_text()));
    }
    let cfg = RunConfig::from_cli(cli)?;
    let topology = load_topology(&cfg, stdin)?;
    match &cli.command {
        Command::Check { path, mode } => cmd_check(&cfg, &topology, path, *mode),
        Command::Rank { top } => cmd_rank(&cfg, &topology, *top),
        Command::Route => Ok(cmd_route(&cfg, &topology)),
        Command::Enumerate => cmd_enumerate(&cfg, &topology),
        Command::Simulate { packets } => Ok(cmd_simulate(&cfg, &topology, *packets)),
        Command::Fixture => unreachable!(),
    }
}

fn load_topology(cfg: &RunConfig, stdin: &mut dyn Read) -> Result<Topology, CliError> {
    let name = cfg.topology_name();
    let text = if name == "-" {
        let mut buf = String::new();
        stdin
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Input(format!("reading standard input: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(&name).map_err(|e| CliError::Input(format!("{name}: {e}")))?
    };
    let options = ParseOptions {
        complementarity: Complementarity::from_flag(cfg.strict),
    };
    parse_topology_with(&text, options).map_err(|e| CliError::Input(format!("{name}: {e}")))
}

fn render_json(command: &str, inputs: Value, results: Value) -> String {
    let doc = json!({ "command": command, "inputs": inputs, "results": results });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

fn with_inputs(cfg: &RunConfig, extra: Value) -> Value {
    let mut inputs = cfg.inputs();
    if let (Value::Object(base), Value::Object(extra)) = (&mut inputs, extra) {
        base.extend(extra);
    }
    inputs
}

fn cmd_check(
    cfg: &RunConfig,
    t: &Topology,
    spec: &str,
    mode: CheckMode,
) -> Result<Outcome, CliError> {
    let path = Path::parse_spec(spec);
    let evaluations = mode
        .modes()
        .iter()
        .map(|&m| evaluate_path(t, &path, &cfg.constants, m, cfg.chaining))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let confidential = evaluations.iter().all(|e| e.confidential);

    let stdout = match cfg.format {
        OutputFormat::Text => {
            let mut s = String::new();
            for ev in &evaluations {
                let _ = writeln!(
                    s,
                    "{} test of {} ({} chaining)",
                    ev.mode.as_str(),
                    ev.path,
                    ev.chaining.as_str()
                );
                for (i, hop) in ev.hops.iter().enumerate() {
                    let v = hop.vector(ev.mode);
                    let _ = writeln!(
                        s,
                        "  hop {} {}→{} [{} {}] {}",
                        i + 1,
                        ev.path.nodes()[i],
                        ev.path.nodes()[i + 1],
                        cfg.num(v[0]),
                        cfg.num(v[1]),
                        hop.verdict
                    );
                }
                let _ = writeln!(
                    s,
                    "  confidential: {}",
                    if ev.confidential { "yes" } else { "no" }
                );
            }
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from(
                "mode,hop,from,to,first,second,f_trust,f_untrust,verdict,confidential\n",
            );
            for ev in &evaluations {
                for (i, hop) in ev.hops.iter().enumerate() {
                    let v = hop.vector(ev.mode);
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{},{}",
                        ev.mode.as_str(),
                        i + 1,
                        ev.path.nodes()[i],
                        ev.path.nodes()[i + 1],
                        v[0],
                        v[1],
                        hop.f_trust,
                        hop.f_untrust,
                        hop.verdict,
                        ev.confidential
                    );
                }
            }
            s
        }
        OutputFormat::Json => {
            let results: Vec<Value> = evaluations.iter().map(evaluation_json).collect();
            render_json(
                "check",
                with_inputs(
                    cfg,
                    json!({ "path": path, "mode": format!("{mode:?}").to_lowercase() }),
                ),
                json!({ "confidential": confidential, "evaluations": results }),
            )
        }
    };
    Ok(Outcome {
        stdout,
        stderr: None,
        code: if confidential { EXIT_OK } else { EXIT_NEGATIVE },
    })
}

fn evaluation_json(ev: &PathEvaluation) -> Value {
    let hops: Vec<Value> = ev
        .hops
        .iter()
        .enumerate()
        .map(|(i, hop)| {
            json!({
                "hop": i + 1,
                "from": ev.path.nodes()[i],
                "to": ev.path.nodes()[i + 1],
                "vector": hop.vector(ev.mode),
                "f_trust": hop.f_trust,
                "f_untrust": hop.f_untrust,
                "verdict": hop.verdict.as_str(),
            })
        })
        .collect();
    json!({
        "mode": ev.mode.as_str(),
        "chaining": ev.chaining.as_str(),
        "confidential": ev.confidential,
        "hops": hops,
    })
}

fn cmd_rank(cfg: &RunConfig, t: &Topology, top: Option<usize>) -> Result<Outcome, CliError> {
    let mut ranked = rank_paths(t, &cfg.constants, cfg.cap)?;
    if let Some(n) = top {
        ranked.truncate(n);
    }
    let stdout = match cfg.format {
        OutputFormat::Text => {
            let width = ranked
                .iter()
                .map(|r| r.path.to_string().chars().count())
                .max()
                .unwrap_or(0)
                .max(4);
            let mut s = format!(
                "rank  {:<width$}  mean_trust  mean_untrust  class\n",
                "path"
            );
            for r in &ranked {
                let _ = writeln!(
                    s,
                    "{:<4}  {:<width$}  {:<10}  {:<12}  {}",
                    r.rank,
                    r.path.to_string(),
                    cfg.num(r.mean_trust),
                    cfg.num(r.mean_untrust),
                    r.trust_class
                );
            }
            s
        }
        OutputFormat::Csv => {
            let mut s =
                String::from("rank,index,path,mean_trust,mean_untrust,class,confidential\n");
            for r in &ranked {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.rank,
                    r.index,
                    r.path,
                    r.mean_trust,
                    r.mean_untrust,
                    r.trust_class,
                    r.confidential
                );
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = ranked
                .iter()
                .map(|r| {
                    json!({
                        "rank": r.rank,
                        "index": r.index,
                        "path": r.path,
                        "mean_trust": r.mean_trust,
                        "mean_untrust": r.mean_untrust,
                        "class": r.trust_class.abbreviation(),
                        "confidential": r.confidential,
                    })
                })
                .collect();
            render_json(
                "rank",
                with_inputs(cfg, json!({ "top": top })),
                Value::Array(rows),
            )
        }
    };
    Ok(Outcome::ok(stdout))
}

fn hop_lines(cfg: &RunConfig, hops: &[RouteHop], s: &mut String) {
    for (i, h) in hops.iter().enumerate() {
        let _ = writeln!(
            s,
            "  hop {} {}→{} trust {} [{} {}] {}",
            i + 1,
            h.from,
            h.to,
            cfg.num(h.edge.trust()),
            cfg.num(h.result.f_trust),
            cfg.num(h.result.f_untrust),
            h.result.verdict
        );
    }
}

fn hops_csv(hops: &[RouteHop], s: &mut String) {
    for (i, h) in hops.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            h.from,
            h.to,
            h.edge.trust(),
            h.edge.untrust(),
            h.result.f_trust,
            h.result.f_untrust,
            h.result.verdict
        );
    }
}

fn hops_json(hops: &[RouteHop]) -> Vec<Value> {
    hops.iter()
        .enumerate()
        .map(|(i, h)| {
            json!({
                "hop": i + 1,
                "from": h.from,
                "to": h.to,
                "edge_trust": h.edge.trust(),
                "edge_untrust": h.edge.untrust(),
                "f_trust": h.result.f_trust,
                "f_untrust": h.result.f_untrust,
                "verdict": h.result.verdict.as_str(),
            })
        })
        .collect()
}

const ROUTE_CSV_HEADER: &str = "hop,from,to,edge_trust,edge_untrust,f_trust,f_untrust,verdict\n";

fn cmd_route(cfg: &RunConfig, t: &Topology) -> Outcome {
    let result = most_likely_route(t, &cfg.constants);
    let (stdout, stderr, code) = match (&result, cfg.format) {
        (Ok(route), OutputFormat::Text) => {
            let mut s = format!("route {}\n", route.path);
            hop_lines(cfg, &route.hops, &mut s);
            let _ = writeln!(s, "mean trust {}", cfg.num(route.mean_trust));
            (s, None, EXIT_OK)
        }
        (Ok(route), OutputFormat::Csv) => {
            let mut s = String::from(ROUTE_CSV_HEADER);
            hops_csv(&route.hops, &mut s);
            (s, None, EXIT_OK)
        }
        (Ok(route), OutputFormat::Json) => {
            let results = json!({
                "delivered": true,
                "path": route.path,
                "mean_trust": route.mean_trust,
                "hops": hops_json(&route.hops),
            });
            (render_json("route", cfg.inputs(), results), None, EXIT_OK)
        }
        (
            Err(
                e @ RouteError::DeadEnd {
                    stuck,
                    partial,
                    trace,
                },
            ),
            format,
        ) => {
            let s = match format {
                OutputFormat::Text => {
                    let mut s = format!("dead end at {stuck}\npartial {partial}\n");
                    hop_lines(cfg, trace, &mut s);
                    s
                }
                OutputFormat::Csv => {
                    let mut s = String::from(ROUTE_CSV_HEADER);
                    hops_csv(trace, &mut s);
                    s
                }
                OutputFormat::Json => {
                    let results = json!({
                        "delivered": false,
                        "stuck": stuck,
                        "path": partial,
                        "hops": hops_json(trace),
                    });
                    render_json("route", cfg.inputs(), results)
                }
            };
            (s, Some(format!("route: {e}")), EXIT_NEGATIVE)
        }
        (Err(e @ RouteError::EmptyTopology), _) => {
            (String::new(), Some(format!("error: {e}")), EXIT_INPUT)
        }
    };
    Outcome {
        stdout,
        stderr,
        code,
    }
}

fn cmd_enumerate(cfg: &RunConfig, t: &Topology) -> Result<Outcome, CliError> {
    let paths = enumerate_paths(t, cfg.cap)?;
    let stdout = match cfg.format {
        OutputFormat::Text => paths
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{} {}\n", i + 1, p))
            .collect(),
        OutputFormat::Csv => {
            let mut s = String::from("index,path\n");
            for (i, p) in paths.iter().enumerate() {
                let _ = writeln!(s, "{},{}", i + 1, p);
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = paths
                .iter()
                .enumerate()
                .map(|(i, p)| json!({ "index": i + 1, "path": p }))
                .collect();
            render_json("enumerate", cfg.inputs(), Value::Array(rows))
        }
    };
    Ok(Outcome::ok(stdout))
}

fn cmd_simulate(cfg: &RunConfig, t: &Topology, packets: u64) -> Outcome {
    let report = simulate(t, packets, &cfg.constants);
    let stdout = match cfg.format {
        OutputFormat::Text => {
            let mut s = format!(
                "packets sent {}\ndelivered {}\ndropped {}\n",
                report.packets_sent, report.delivered, report.dropped
            );
            for (path, n) in &report.route_usage {
                let _ = writeln!(s, "route {path} {n}");
            }
            for (node, n) in &report.drop_points {
                let _ = writeln!(s, "drop at {node} {n}");
            }
            s
        }
        OutputFormat::Csv => {
            let mut s = format!(
                "kind,key,count\nsummary,packets_sent,{}\nsummary,delivered,{}\nsummary,dropped,{}\n",
                report.packets_sent, report.delivered, report.dropped
            );
            for (path, n) in &report.route_usage {
                let _ = writeln!(s, "route,{path},{n}");
            }
            for (node, n) in &report.drop_points {
                let _ = writeln!(s, "drop,{node},{n}");
            }
            s
        }
        OutputFormat::Json => {
            let routes: Vec<Value> = report
                .route_usage
                .iter()
                .map(|(p, n)| json!({ "path": p, "count": n }))
                .collect();
            let drops: Vec<Value> = report
                .drop_points
                .iter()
                .map(|(node, n)| json!({ "node": node, "count": n }))
                .collect();
            let results = json!({
                "packets_sent": report.packets_sent,
                "delivered": report.delivered,
                "dropped": report.dropped,
                "route_usage": routes,
                "drop_points": drops,
            });
            render_json(
                "simulate",
                with_inputs(cfg, json!({ "packets": packets })),
                results,
            )
        }
    };
    Outcome::ok(stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str], stdin: &str) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut input = stdin.as_bytes();
        let argv = std::iter::once("trustnet").chain(args.iter().copied());
        let code = run(argv, &mut input, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn check_from_stdin() {
        let (code, out, _) = run_str(&["check", "S,3,7,11,D"], &paper_fixture_text());
        assert_eq!(code, 0);
        assert!(out.contains("hop 2 3→7 [0.53 0.40] acceptable"), "{out}");
    }

    #[test]
    fn usage_errors_are_input_errors() {
        assert_eq!(run_str(&["bogus"], "").0, EXIT_INPUT);
        assert_eq!(run_str(&["--decimals", "13", "route"], "").0, EXIT_INPUT);
        assert_eq!(run_str(&["--cap", "0", "route"], "").0, EXIT_INPUT);
        assert_eq!(run_str(&["--help"], "").0, EXIT_OK);
    }

    #[test]
    fn bad_constants_rejected() {
        let (code, _, err) = run_str(&["--theta-min", "1.5", "route"], &paper_fixture_text());
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("theta_min"), "{err}");
    }

    #[test]
    fn no_strict_accepts_loose_pairs() {
        let text = "node S\nnode D\nsource S\ndest D\nedge S D 0.9 0.2\n";
        assert_eq!(run_str(&["route"], text).0, EXIT_INPUT);
        assert_eq!(run_str(&["--no-strict", "route"], text).0, EXIT_OK);
        assert_eq!(
            run_str(&["--no-strict", "--strict", "route"], text).0,
            EXIT_INPUT
        );
    }

    #[test]
    fn empty_topology_route_is_input_error() {
        let (code, _, err) = run_str(&["route"], "node S\nnode D\nsource S\ndest D\n");
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("no edges"));
    }
}
