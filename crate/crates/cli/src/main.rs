//! `qkdgame` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 unsupported query.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qkdgame::attacks::{load_attack, AttackError, AttackRegistry};
use qkdgame::game::{
    build_game, nash_region, verify_tables, BimatrixGame, EquilibriumReport, GameError, GameKind, Player,
    Redundancy, Scenario, VerifyConfig, WeightAssignment, DEFAULT_EPS,
};
use qkdgame::protocols::{Encoding, Protocol, ProtocolStats};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "qkdgame", version, about = "Two-way QKD attack statistics and payoff-game analysis")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Markdown)]
    format: Format,
    /// Attack file to add to the registry; replaces a built-in of the same name.
    #[arg(long = "attack-file", global = true, value_name = "FILE")]
    attack_files: Vec<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Statistics of one attack against one protocol.
    Stats {
        #[arg(long)]
        protocol: String,
        /// Required for pp; not accepted for lm05.
        #[arg(long)]
        encoding: Option<String>,
        #[arg(long)]
        attack: String,
    },
    /// Symbolic payoff grid, or numeric when weights are given.
    PayoffTable {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_name = "FILE")]
        weights: Option<PathBuf>,
    },
    /// Pure Nash equilibria at a weight assignment.
    Nash(PointArgs),
    /// Pareto-optimal profiles at a weight assignment.
    Pareto(PointArgs),
    /// Weight inequalities under which a profile is a pure Nash equilibrium.
    Regions {
        #[command(flatten)]
        game: GameArgs,
        /// Profile such as `A2,E4`.
        #[arg(long)]
        profile: String,
    },
    /// Checks the assembled games against the published tables.
    VerifyPaper {
        #[arg(long, env = "QKDGAME_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct GameArgs {
    /// `pp` or `twoway`.
    #[arg(long)]
    game: String,
    /// generic, equal-weights, no-dos or unlimited-eve.
    #[arg(long, default_value = "generic")]
    scenario: String,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, value_name = "FILE")]
    weights: PathBuf,
    /// Tolerance for weak preferences.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

fn attack_code(e: &AttackError) -> u8 {
    match e {
        AttackError::MissingKey { .. } | AttackError::TableForm(_) => 3,
        _ => 2,
    }
}

impl From<AttackError> for Failure {
    fn from(e: AttackError) -> Self {
        Self { code: attack_code(&e), message: e.to_string() }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        let code = match &e {
            GameError::UnsupportedScenario { .. } | GameError::MissingStats(_) | GameError::MissingQuantity { .. } => 3,
            GameError::Attack(a) => attack_code(a),
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

/// Rendered output and whether the command counts as a success.
struct Output {
    text: String,
    ok: bool,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Self { text, ok: true }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let registry = registry(&cli.attack_files)?;
    let f = cli.format;
    match &cli.command {
        Command::Stats { protocol, encoding, attack } => cmd_stats(&registry, protocol, encoding.as_deref(), attack, f),
        Command::PayoffTable { game, weights } => cmd_payoff_table(&registry, game, weights.as_deref(), f),
        Command::Nash(p) | Command::Pareto(p) => cmd_equilibria(&registry, p, f),
        Command::Regions { game, profile } => cmd_regions(&registry, game, profile, f),
        Command::VerifyPaper { seed } => cmd_verify(&registry, *seed, f),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn registry(files: &[PathBuf]) -> Result<AttackRegistry, Failure> {
    let mut registry = AttackRegistry::builtin();
    for path in files {
        let spec = load_attack(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        if registry.get(&spec.name).is_ok() {
            registry = registry.with_replacement(spec)?;
        } else {
            registry.register(spec)?;
        }
    }
    Ok(registry)
}

fn load_weights(path: &Path) -> Result<WeightAssignment, Failure> {
    WeightAssignment::from_json(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn game_for(registry: &AttackRegistry, args: &GameArgs) -> Result<BimatrixGame, Failure> {
    let kind: GameKind = args.game.parse()?;
    let scenario: Scenario = args.scenario.parse()?;
    Ok(build_game(kind, scenario, registry)?)
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Six decimals, without a sign on values that round to zero.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn cmd_stats(
    registry: &AttackRegistry,
    protocol: &str,
    encoding: Option<&str>,
    attack: &str,
    format: Format,
) -> Result<Output, Failure> {
    let protocol: Protocol = protocol.parse().map_err(Failure::usage)?;
    let encoding = match (protocol, encoding) {
        (Protocol::PingPong, None) => return Err(Failure::usage("pp needs --encoding A1 or A2")),
        (Protocol::Lm05, Some(_)) => return Err(Failure::usage("lm05 takes no --encoding")),
        (_, e) => e.map(str::parse::<Encoding>).transpose().map_err(Failure::usage)?,
    };
    let stats = registry.stats_for(attack, protocol, encoding)?;
    let key = match encoding {
        Some(e) => format!("{protocol}/{e}"),
        None => protocol.to_string(),
    };
    Ok(render_stats(attack, &key, &stats, format).into())
}

fn render_stats(attack: &str, key: &str, s: &ProtocolStats, format: Format) -> String {
    let fields: Vec<(&str, String)> = vec![
        ("i_ab", num(s.i_ab)),
        ("i_ae", opt(s.i_ae)),
        ("i_be", opt(s.i_be)),
        ("i_e_sum", num(s.i_e_sum)),
        ("p_d", opt(s.p_d)),
        ("qber", opt(s.qber)),
        ("detection_cost", opt(s.detection_cost)),
        ("inconclusive", opt(s.inconclusive)),
        ("n_entangled", s.n_entangled.to_string()),
        ("n1", s.gate_costs.n1.to_string()),
        ("n2", s.gate_costs.n2.to_string()),
        ("n3", s.gate_costs.n3.to_string()),
    ];
    match format {
        Format::Json => json_text(&json!({ "attack": attack, "key": key, "stats": s })),
        Format::Csv => {
            let mut header = vec!["attack", "key"];
            header.extend(fields.iter().map(|(k, _)| *k));
            let mut row = vec![attack.to_string(), key.to_string()];
            row.extend(fields.into_iter().map(|(_, v)| v));
            csv_rows(&header, [row])
        }
        Format::Markdown => {
            let mut out = format!("## {attack} on {key}\n\n| quantity | value |\n|---|---|\n");
            for (k, v) in fields.iter().filter(|(_, v)| !v.is_empty()) {
                out.push_str(&format!("| {k} | {v} |\n"));
            }
            out
        }
    }
}

/// Grid of per-player cells, Alice strategies as rows.
fn markdown_grid(title: &str, game: &BimatrixGame, cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = format!("### {title}\n\n|  | {} |\n|---|", game.col_labels().join(" | "));
    out.push_str(&"---|".repeat(game.n_cols()));
    out.push('\n');
    for (r, label) in game.row_labels().iter().enumerate() {
        let cells: Vec<String> = (0..game.n_cols()).map(|c| cell(r, c)).collect();
        out.push_str(&format!("| {label} | {} |\n", cells.join(" | ")));
    }
    out.push('\n');
    out
}

fn cmd_payoff_table(
    registry: &AttackRegistry,
    args: &GameArgs,
    weights: Option<&Path>,
    format: Format,
) -> Result<Output, Failure> {
    let game = game_for(registry, args)?;
    let numeric = match weights {
        Some(path) => Some(game.evaluate(&load_weights(path)?)?),
        None => None,
    };
    let cell = |r: usize, c: usize, player: Player| -> String {
        let p = qkdgame::game::Profile::new(r, c);
        match &numeric {
            Some(n) => {
                let (a, e) = n.at(p);
                num(if player == Player::Row { a } else { e })
            }
            None => game.payoff(p, player).to_string(),
        }
    };
    let text = match format {
        Format::Json => {
            let grid = |player| -> Vec<Vec<String>> {
                (0..game.n_rows()).map(|r| (0..game.n_cols()).map(|c| cell(r, c, player)).collect()).collect()
            };
            json_text(&json!({
                "game": args.game,
                "scenario": args.scenario,
                "numeric": numeric.is_some(),
                "rows": game.row_labels(),
                "cols": game.col_labels(),
                "alice": grid(Player::Row),
                "eve": grid(Player::Col),
            }))
        }
        Format::Csv => {
            let rows = game.profiles().flat_map(|p| {
                [(Player::Row, "alice"), (Player::Col, "eve")].map(|(player, name)| {
                    vec![
                        name.to_string(),
                        game.row_labels()[p.row].clone(),
                        game.col_labels()[p.col].clone(),
                        cell(p.row, p.col, player),
                    ]
                })
            });
            csv_rows(&["player", "row", "col", "payoff"], rows.collect::<Vec<_>>())
        }
        Format::Markdown => {
            let kind = if numeric.is_some() { "numeric" } else { "symbolic" };
            let mut out = format!("## {} game, {} scenario ({kind})\n\n", args.game, args.scenario);
            out.push_str(&markdown_grid("Alice", &game, |r, c| cell(r, c, Player::Row)));
            out.push_str(&markdown_grid("Eve", &game, |r, c| cell(r, c, Player::Col)));
            out
        }
    };
    Ok(text.into())
}

fn cmd_equilibria(registry: &AttackRegistry, args: &PointArgs, format: Format) -> Result<Output, Failure> {
    if !args.eps.is_finite() || args.eps < 0.0 {
        return Err(Failure::usage(format!("--eps must be finite and nonnegative, got {}", args.eps)));
    }
    let game = game_for(registry, &args.game)?;
    let report = EquilibriumReport::analyze(game.evaluate(&load_weights(&args.weights)?)?, args.eps);
    let sets = [("nash", &report.nash), ("pareto", &report.pareto), ("pareto_nash", &report.pareto_nash)];
    let text = match format {
        Format::Json => {
            let payoffs: Vec<Value> = report
                .payoffs
                .profiles()
                .map(|p| {
                    let (a, e) = report.payoffs.at(p);
                    json!({ "profile": report.payoffs.profile_label(p), "alice": a, "eve": e })
                })
                .collect();
            let mut obj = json!({ "game": args.game.game, "scenario": args.game.scenario, "eps": report.eps });
            for (name, set) in sets {
                obj[name] = json!(report.labels(set));
            }
            obj["payoffs"] = Value::Array(payoffs);
            json_text(&obj)
        }
        Format::Csv => {
            let rows = report.payoffs.profiles().map(|p| {
                let (a, e) = report.payoffs.at(p);
                let mut row = vec![report.payoffs.profile_label(p), num(a), num(e)];
                row.extend(sets.iter().map(|(_, s)| s.contains(&p).to_string()));
                row
            });
            csv_rows(&["profile", "alice", "eve", "nash", "pareto", "pareto_nash"], rows.collect::<Vec<_>>())
        }
        Format::Markdown => {
            let mut out = format!("## Equilibria (eps {})\n\n", report.eps);
            for (name, set) in sets {
                out.push_str(&format!("- {name}: {{{}}}\n", report.labels(set).join(", ")));
            }
            out.push('\n');
            out.push_str(&markdown_grid("Payoffs (Alice, Eve)", &game, |r, c| {
                let (a, e) = report.payoffs.at(qkdgame::game::Profile::new(r, c));
                format!("{}, {}", num(a), num(e))
            }));
            out
        }
    };
    Ok(text.into())
}

fn cmd_regions(registry: &AttackRegistry, args: &GameArgs, profile: &str, format: Format) -> Result<Output, Failure> {
    let game = game_for(registry, args)?;
    let p = game.profile(profile)?;
    let system = nash_region(&game, p)?;
    let rows: Vec<[String; 3]> = system
        .entries()
        .iter()
        .map(|e| {
            let comparison = e
                .comparison
                .map(|c| c.describe(game.row_labels(), game.col_labels()))
                .unwrap_or_default();
            let status = match e.redundant {
                None => "active".to_string(),
                Some(Redundancy::AlwaysTrue) => "always true".to_string(),
                Some(Redundancy::Duplicate(i)) => format!("duplicate of {}", i + 1),
            };
            [e.inequality.threshold_form(), comparison, status]
        })
        .collect();
    let label = game.profile_label(p);
    let text = match format {
        Format::Json => {
            let entries: Vec<Value> = rows
                .iter()
                .map(|[ineq, cmp, status]| json!({ "inequality": ineq, "comparison": cmp, "status": status }))
                .collect();
            json_text(&json!({
                "game": args.game,
                "scenario": args.scenario,
                "profile": label,
                "inequalities": entries,
            }))
        }
        Format::Csv => csv_rows(&["inequality", "comparison", "status"], rows.into_iter().map(Vec::from)),
        Format::Markdown => {
            let mut out = format!(
                "## {label} is a Nash equilibrium of the {} game ({}) iff\n\n| # | inequality | comparison | status |\n|---|---|---|---|\n",
                args.game, args.scenario
            );
            for (i, [ineq, cmp, status]) in rows.iter().enumerate() {
                out.push_str(&format!("| {} | {ineq} | {cmp} | {status} |\n", i + 1));
            }
            out
        }
    };
    Ok(text.into())
}

fn cmd_verify(registry: &AttackRegistry, seed: u64, format: Format) -> Result<Output, Failure> {
    let report = verify_tables(registry, &VerifyConfig::new(seed))?;
    for failure in report.failures() {
        eprintln!("FAIL {failure}");
    }
    let text = match format {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Markdown => report.to_markdown(),
        Format::Csv => {
            let mark = |b: bool| if b { "pass" } else { "fail" }.to_string();
            let mut rows = Vec::new();
            for c in &report.cells {
                rows.push(vec!["cell".into(), format!("{} {}", c.table, c.profile), format!("{:.3e}", c.max_diff), mark(c.pass)]);
            }
            for c in &report.constants {
                rows.push(vec!["constant".into(), c.name.clone(), num(c.computed), mark(c.pass)]);
            }
            for r in &report.regions {
                rows.push(vec![
                    "region".into(),
                    format!("{} {} interior", r.table, r.profile),
                    r.interior_samples.to_string(),
                    mark(r.interior_failures.is_empty() && r.interior_samples >= report.config.interior_samples),
                ]);
                for c in &r.conditions {
                    rows.push(vec![
                        "region".into(),
                        format!("{} {} violate {}", r.table, r.profile, c.condition),
                        c.samples.to_string(),
                        mark(c.pass),
                    ]);
                }
            }
            rows.push(vec![
                "pareto-bound".into(),
                "informational".into(),
                report.pareto.bound_disagreements.to_string(),
                mark(report.pareto.bound_agrees),
            ]);
            csv_rows(&["check", "item", "value", "result"], rows)
        }
    };
    Ok(Output { text, ok: report.passed })
}
