//! The `parley` command line.
//!
//! Exit codes: 0 success (feasible, IR holds), 1 a negative answer
//! (infeasible, IR violated), 2 bad usage or input, 3 a budget ran out
//! before an answer was reached.

pub mod docs;
pub mod fixtures;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use parley::belief::{Belief, Side};
use parley::conversation::DEFAULT_TRANSCRIPT_BUDGET;
use parley::design::{self, DesignProblem, IrConstraint, Objective, SearchFilter, SearchOptions};
use parley::feasibility::{self, FeasibilityVerdict, Violation};
use parley::game::Game;
use parley::ir::{self, IrReport, Notion};
use parley::protocol::Protocol;
use parley::repeated::{self, Punishment, RepeatedSpec};
use parley::Rational;
use serde_json::{json, Value};

use docs::{DistributionDocument, GameDocument, ObjectiveDocument, ProtocolDocument, WitnessDocument};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] parley::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(parley::Error::BudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "parley",
    version,
    about = "Exact analysis of communication protocols between two privately informed parties"
)]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Operations on game documents.
    #[command(subcommand)]
    Game(GameCommand),
    /// Run a protocol and list its outcomes with the observer's posterior.
    Simulate(ProtocolArgs),
    /// Write the joint posterior distribution a protocol induces.
    Induce {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a distribution can be induced by communication.
    Feasible(FeasibleArgs),
    /// Audit a protocol for individual rationality.
    IrCheck {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long, value_enum, default_value_t = NotionArg::Interim)]
        notion: NotionArg,
        #[arg(long, value_enum, default_value_t = AgentArg::Bob)]
        agent: AgentArg,
    },
    /// Find the best recommendation scheme under an IR constraint.
    Optimize(OptimizeArgs),
    /// Search multi-round conversations under ex-post or non-committed IR.
    Search(SearchArgs),
    /// Trace the IR-constrained Pareto frontier.
    Pareto {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = IrArg::Interim)]
        ir: IrArg,
        /// Comma-separated weights on Alice's utility.
        #[arg(long, default_value = "0,1/4,1/2,3/4,1")]
        weights: String,
    },
    /// Audit a repeated conversation against a patient, uncommitted Bob.
    Repeat(RepeatArgs),
    /// Write an SVG or CSV rendering.
    #[command(subcommand)]
    Export(ExportCommand),
    /// Print a bundled example document.
    Fixture {
        /// Fixture name; `list` shows all of them.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GameCommand {
    /// Check a game document and summarize it.
    Validate { path: PathBuf },
}

#[derive(Debug, Subcommand)]
enum ExportCommand {
    /// The belief walk of a conversation as SVG.
    Svg {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Index of the Bob type on the horizontal axis.
        #[arg(long, default_value_t = 0)]
        bob_type: usize,
        /// Index of the Alice type on the vertical axis.
        #[arg(long, default_value_t = 0)]
        alice_type: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The Pareto frontier as CSV.
    Csv {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = IrArg::Interim)]
        ir: IrArg,
        #[arg(long, default_value = "0,1/4,1/2,3/4,1")]
        weights: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ProtocolArgs {
    #[arg(long)]
    protocol: PathBuf,
    /// Game supplying the priors (and utilities, where needed).
    #[arg(long)]
    game: Option<PathBuf>,
    /// Alice's prior, comma-separated, when no game is given.
    #[arg(long)]
    prior_a: Option<String>,
    #[arg(long)]
    prior_b: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TRANSCRIPT_BUDGET)]
    budget: usize,
}

#[derive(Debug, Args)]
struct FeasibleArgs {
    distribution: PathBuf,
    /// Rounds allowed to a conversation.
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Extra belief coordinates for the witness search, comma-separated.
    #[arg(long)]
    grid: Option<String>,
    /// Only ask whether a mediator can induce it.
    #[arg(long)]
    mediator: bool,
    /// Check this witness instead of searching.
    #[arg(long, conflicts_with = "mediator")]
    verify: Option<PathBuf>,
    /// Where to write a witness when one is found.
    #[arg(long)]
    witness_out: Option<PathBuf>,
    /// Where to write the conversation built from a found witness.
    #[arg(long)]
    protocol_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = IrArg::Interim)]
    ir: IrArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Welfare)]
    objective: ObjectiveArg,
    /// Objective table for `--objective file`.
    #[arg(long, required_if_eq("objective", "file"))]
    objective_file: Option<PathBuf>,
    /// Write the optimal scheme as a mediator.
    #[arg(long)]
    mediator_out: Option<PathBuf>,
    /// Write the optimal scheme as a one-round conversation.
    #[arg(long)]
    conversation_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = FilterArg::Expost)]
    filter: FilterArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Welfare)]
    objective: ObjectiveArg,
    #[arg(long, required_if_eq("objective", "file"))]
    objective_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    max_rounds: usize,
    #[arg(long, default_value_t = 3)]
    branching: usize,
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RepeatArgs {
    #[arg(long)]
    game: PathBuf,
    /// A conversation protocol.
    #[arg(long)]
    protocol: PathBuf,
    #[arg(long)]
    delta: String,
    /// Copies audited explicitly.
    #[arg(long, default_value_t = 2)]
    horizon: usize,
    #[arg(long, value_enum, default_value_t = PunishmentArg::Zero)]
    punishment: PunishmentArg,
    #[arg(long, default_value_t = DEFAULT_TRANSCRIPT_BUDGET)]
    budget: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NotionArg {
    Exante,
    Interim,
    Expost,
    Noncommitted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AgentArg {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IrArg {
    None,
    Exante,
    Interim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Welfare,
    Alice,
    Bob,
    File,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FilterArg {
    Expost,
    Noncommitted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PunishmentArg {
    /// Quitting ends the relationship.
    Zero,
    /// Quitting falls back to no-communication play.
    Nocomm,
}

impl From<IrArg> for IrConstraint {
    fn from(a: IrArg) -> Self {
        match a {
            IrArg::None => IrConstraint::None,
            IrArg::Exante => IrConstraint::ExAnte,
            IrArg::Interim => IrConstraint::Interim,
        }
    }
}

/// Parses and runs one invocation, writing everything to `out`.
pub fn run<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(out, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let json = cli.json;
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            if json {
                let _ = writeln!(out, "{}", json!({ "error": e.to_string(), "exit_code": code }));
            } else {
                let _ = writeln!(out, "error: {e}");
            }
            code
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    let json = cli.json;
    match cli.command {
        Command::Game(GameCommand::Validate { path }) => game_validate(&path, json, out),
        Command::Simulate(p) => simulate(&p, json, out),
        Command::Induce { protocol, out: path } => induce(&protocol, path.as_deref(), json, out),
        Command::Feasible(a) => feasible(&a, json, out),
        Command::IrCheck {
            protocol,
            notion,
            agent,
        } => ir_check(&protocol, notion, agent, json, out),
        Command::Optimize(a) => optimize(&a, json, out),
        Command::Search(a) => search(&a, json, out),
        Command::Pareto { game, ir, weights } => pareto(&game, ir, &weights, json, out),
        Command::Repeat(a) => repeat(&a, json, out),
        Command::Export(ExportCommand::Svg {
            protocol,
            bob_type,
            alice_type,
            out: path,
        }) => export_svg(&protocol, bob_type, alice_type, path.as_deref(), out),
        Command::Export(ExportCommand::Csv {
            game,
            ir,
            weights,
            out: path,
        }) => export_csv(&game, ir, &weights, path.as_deref(), out),
        Command::Fixture { name, out: path } => fixture(&name, path.as_deref(), out),
    }
}

pub fn parse_rationals(text: &str) -> CliResult<Vec<Rational>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<Rational>()
                .map_err(|_| CliError::Input(format!("not a rational number: {s:?}")))
        })
        .collect()
}

fn load_game(path: &Path) -> CliResult<Game> {
    docs::load::<GameDocument>(path)?.into_game()
}

fn load_protocol(path: &Path) -> CliResult<Protocol> {
    docs::load::<ProtocolDocument>(path)?.into_protocol()
}

fn priors(p: &ProtocolArgs) -> CliResult<(Option<Game>, Belief, Belief)> {
    if let Some(path) = &p.game {
        let g = load_game(path)?;
        let (a, b) = (g.prior_a().clone(), g.prior_b().clone());
        return Ok((Some(g), a, b));
    }
    match (&p.prior_a, &p.prior_b) {
        (Some(a), Some(b)) => Ok((
            None,
            Belief::new(parse_rationals(a)?)?,
            Belief::new(parse_rationals(b)?)?,
        )),
        _ => Err(CliError::Input("give --game or both --prior-a and --prior-b".into())),
    }
}

fn print_json(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("values serialize"))?;
    Ok(())
}

fn emit_text(path: Option<&Path>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn rows_json(rows: &[Vec<Rational>]) -> Value {
    json!(rows
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn game_validate(path: &Path, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let g = load_game(path)?;
    let r0 = g.no_comm_profile();
    let (ua, ub) = g.no_comm_utilities();
    let baseline: Vec<&str> = r0.iter().map(|&r| g.actions()[r].as_str()).collect();
    if json {
        print_json(
            out,
            &json!({
                "valid": true,
                "types_a": g.types_a(),
                "types_b": g.types_b(),
                "actions": g.actions(),
                "no_comm_actions": baseline,
                "no_comm_u_a": ua.to_string(),
                "no_comm_u_b": ub.to_string(),
            }),
        )?;
    } else {
        writeln!(
            out,
            "valid game: {} Alice types, {} Bob types, {} actions",
            g.num_a(),
            g.num_b(),
            g.num_actions()
        )?;
        for (t, a) in g.types_a().iter().zip(&baseline) {
            writeln!(out, "  without communication {t} plays {a}")?;
        }
        writeln!(out, "  no-communication utilities: Alice {ua}, Bob {ub}")?;
    }
    Ok(0)
}

fn simulate(p: &ProtocolArgs, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let (game, pa, pb) = priors(p)?;
    let protocol = load_protocol(&p.protocol)?;
    let outcomes = protocol.outcomes(&pa, &pb, p.budget)?;
    let mut listed = Vec::new();
    for o in &outcomes {
        let prob = o.matrix.total();
        let posterior = o.matrix.scale(&prob.recip());
        let actions: Option<Vec<Option<String>>> = game.as_ref().map(|g| {
            o.actions(g)
                .into_iter()
                .map(|r| r.map(|r| g.actions()[r].clone()))
                .collect()
        });
        listed.push((o.label.clone(), prob, posterior, actions));
    }
    if json {
        let v: Vec<Value> = listed
            .iter()
            .map(|(label, prob, post, actions)| {
                json!({ "outcome": label, "prob": prob.to_string(), "posterior": rows_json(&post.to_rows()), "actions": actions })
            })
            .collect();
        print_json(out, &json!({ "outcomes": v }))?;
    } else {
        for (label, prob, post, actions) in &listed {
            let rows: Vec<String> = post
                .to_rows()
                .iter()
                .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
                .collect();
            write!(out, "{label}\tprob {prob}\tposterior [{}]", rows.join("; "))?;
            if let Some(actions) = actions {
                let shown: Vec<&str> = actions.iter().map(|a| a.as_deref().unwrap_or("-")).collect();
                write!(out, "\tAlice plays {}", shown.join(","))?;
            }
            writeln!(out)?;
        }
    }
    Ok(0)
}

fn induce(p: &ProtocolArgs, path: Option<&Path>, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let (_, pa, pb) = priors(p)?;
    let j = load_protocol(&p.protocol)?.induced_joint_posterior(&pa, &pb, p.budget)?;
    let doc = DistributionDocument::from_joint(&j, &pa, &pb);
    match path {
        Some(path) => {
            docs::save(path, &doc)?;
            if json {
                print_json(
                    out,
                    &json!({ "written": path.display().to_string(), "atoms": doc.atoms.len() }),
                )?;
            } else {
                writeln!(out, "wrote {} atoms to {}", doc.atoms.len(), path.display())?;
            }
        }
        None => out.write_all(docs::to_canonical_json(&doc).as_bytes())?,
    }
    Ok(0)
}

fn verdict_code(v: &FeasibilityVerdict) -> i32 {
    match v {
        FeasibilityVerdict::Feasible { .. } => 0,
        FeasibilityVerdict::Infeasible { .. } => 1,
        FeasibilityVerdict::Unknown { .. } => 3,
    }
}

fn describe(v: &FeasibilityVerdict) -> String {
    match v {
        FeasibilityVerdict::Feasible { .. } => "feasible".into(),
        FeasibilityVerdict::Infeasible { violation } => format!("infeasible: {}", describe_violation(violation)),
        FeasibilityVerdict::Unknown { reason } => format!("unknown: {reason}"),
    }
}

fn weights(b: &Belief) -> String {
    let w: Vec<String> = b.weights().iter().map(Rational::to_string).collect();
    format!("({})", w.join(", "))
}

fn describe_violation(v: &Violation) -> String {
    match v {
        Violation::ProductCondition { q_b, q_a } => {
            format!(
                "posteriors at q_B = {}, q_A = {} are not a product",
                weights(q_b),
                weights(q_a)
            )
        }
        Violation::MeanMismatch { .. } => "the average posterior differs from the prior".into(),
        Violation::NoObserverFamily => "no consistent family of observer posteriors exists".into(),
    }
}

fn feasible(a: &FeasibleArgs, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let (j, pa, pb) = docs::load::<DistributionDocument>(&a.distribution)?.into_parts()?;
    let product = feasibility::check_product_condition(&j);

    if let Some(path) = &a.verify {
        let w = docs::load::<WitnessDocument>(path)?.into_witness()?;
        let ok = feasibility::verify_witness(&j, &w, a.rounds, &pa, &pb)?;
        if json {
            print_json(
                out,
                &json!({ "product_condition": product, "witness_valid": ok, "rounds": a.rounds }),
            )?;
        } else {
            writeln!(
                out,
                "witness {} within {} rounds",
                if ok { "valid" } else { "invalid" },
                a.rounds
            )?;
        }
        return Ok(if ok { 0 } else { 1 });
    }

    let mediator = feasibility::check_mediator_feasibility(&j, &pa, &pb)?;
    let conversation = if a.mediator {
        None
    } else {
        let grid = a.grid.as_deref().map(parse_rationals).transpose()?.unwrap_or_default();
        Some(
            match feasibility::search_witness(&j, a.rounds, &pa, &pb, a.budget, &grid) {
                Ok(v) => v,
                Err(parley::Error::BudgetExceeded { limit, during }) => FeasibilityVerdict::Unknown {
                    reason: format!("budget of {limit} exceeded while {during}"),
                },
                Err(e) => return Err(e.into()),
            },
        )
    };
    if let Some(w) = conversation.as_ref().and_then(FeasibilityVerdict::witness) {
        if let Some(path) = &a.witness_out {
            docs::save(path, &WitnessDocument::new(w.clone()))?;
        }
        if let Some(path) = &a.protocol_out {
            let c = feasibility::witness_to_conversation(w, &pa, &pb)?;
            docs::save(path, &ProtocolDocument::from_protocol(&c.into()))?;
        }
    }
    let decisive = conversation.as_ref().unwrap_or(&mediator);
    if json {
        let mut v = json!({
            "product_condition": product,
            "mediator": serde_json::to_value(&mediator).expect("verdicts serialize"),
        });
        if let Some(c) = &conversation {
            v["conversation"] = serde_json::to_value(c).expect("verdicts serialize");
            v["rounds"] = json!(a.rounds);
        }
        print_json(out, &v)?;
    } else {
        writeln!(out, "product condition: {}", if product { "holds" } else { "fails" })?;
        writeln!(out, "mediator: {}", describe(&mediator))?;
        if let Some(c) = &conversation {
            write!(out, "conversation within {} rounds: {}", a.rounds, describe(c))?;
            match c.witness() {
                Some(w) => writeln!(out, " (witness uses {} rounds)", w.rounds())?,
                None => writeln!(out)?,
            }
        }
    }
    Ok(verdict_code(decisive))
}

fn report_json(r: &IrReport, game: &Game) -> Value {
    let type_label = |t: Option<usize>| {
        t.map(|t| match r.agent {
            Side::A => game.types_a()[t].clone(),
            Side::B => game.types_b()[t].clone(),
        })
    };
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| {
            json!({
                "type": type_label(c.own_type),
                "at": c.at,
                "lhs": c.lhs.to_string(),
                "rhs": c.rhs.to_string(),
                "holds": c.holds(),
            })
        })
        .collect();
    json!({ "notion": r.notion.to_string(), "agent": format!("{:?}", r.agent), "pass": r.pass(), "checks": checks })
}

fn write_report(r: &IrReport, game: &Game, out: &mut dyn Write) -> CliResult<()> {
    let who = match r.agent {
        Side::A => "Alice",
        Side::B => "Bob",
    };
    writeln!(
        out,
        "{} IR for {who}: {}",
        r.notion,
        if r.pass() { "holds" } else { "violated" }
    )?;
    for c in &r.checks {
        let t = c.own_type.map(|t| match r.agent {
            Side::A => game.types_a()[t].as_str(),
            Side::B => game.types_b()[t].as_str(),
        });
        writeln!(
            out,
            "  {} type {} at {}: {} vs {}",
            if c.holds() { "ok  " } else { "FAIL" },
            t.unwrap_or("*"),
            c.at.as_deref().unwrap_or("*"),
            c.lhs,
            c.rhs
        )?;
    }
    Ok(())
}

fn ir_check(p: &ProtocolArgs, notion: NotionArg, agent: AgentArg, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let Some(path) = &p.game else {
        return Err(CliError::Input("ir-check needs --game".into()));
    };
    let game = load_game(path)?;
    let protocol = load_protocol(&p.protocol)?;
    let notion = match notion {
        NotionArg::Exante => Notion::ExAnte,
        NotionArg::Interim => Notion::Interim,
        NotionArg::Expost => Notion::ExPost,
        NotionArg::Noncommitted => Notion::NonCommitted,
    };
    let side = match agent {
        AgentArg::Alice => Side::A,
        AgentArg::Bob => Side::B,
    };
    let report = ir::audit(&game, &protocol, notion, side, p.budget)?;
    if json {
        print_json(out, &report_json(&report, &game))?;
    } else {
        write_report(&report, &game, out)?;
    }
    Ok(if report.pass() { 0 } else { 1 })
}

fn objective(arg: ObjectiveArg, file: Option<&Path>) -> CliResult<Objective> {
    Ok(match arg {
        ObjectiveArg::Welfare => Objective::Welfare,
        ObjectiveArg::Alice => Objective::Alice,
        ObjectiveArg::Bob => Objective::Bob,
        ObjectiveArg::File => {
            let path = file.ok_or_else(|| CliError::Input("--objective file needs --objective-file".into()))?;
            Objective::Table(docs::load::<ObjectiveDocument>(path)?.into_table()?)
        }
    })
}

fn optimize(a: &OptimizeArgs, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let game = load_game(&a.game)?;
    let problem = DesignProblem {
        game: game.clone(),
        ir: a.ir.into(),
        objective: objective(a.objective, a.objective_file.as_deref())?,
    };
    let d = design::optimize(&problem)?;
    if let Some(path) = &a.mediator_out {
        let m = design::scheme_to_mediator(&d.scheme, &game)?;
        docs::save(path, &ProtocolDocument::from_protocol(&m.into()))?;
    }
    if let Some(path) = &a.conversation_out {
        let c = design::scheme_to_one_round_conversation(&d.scheme, &game)?;
        docs::save(path, &ProtocolDocument::from_protocol(&c.into()))?;
    }
    let (na, nr, nb) = d.scheme.dims();
    let mut entries = Vec::new();
    for x in 0..na {
        for r in 0..nr {
            for y in 0..nb {
                let p = d.scheme.get(x, r, y);
                if !p.is_zero() {
                    entries.push((
                        game.types_a()[x].clone(),
                        game.actions()[r].clone(),
                        game.types_b()[y].clone(),
                        p.clone(),
                    ));
                }
            }
        }
    }
    if json {
        let scheme: Vec<Value> = entries
            .iter()
            .map(|(x, r, y, p)| json!({ "type_a": x, "action": r, "type_b": y, "prob": p.to_string() }))
            .collect();
        print_json(
            out,
            &json!({
                "value": d.value.to_string(),
                "u_a": d.u_a.to_string(),
                "u_b": d.u_b.to_string(),
                "scheme": scheme,
            }),
        )?;
    } else {
        writeln!(out, "optimal value {} (Alice {}, Bob {})", d.value, d.u_a, d.u_b)?;
        for (x, r, y, p) in &entries {
            writeln!(out, "  P({x}, {y}) recommends {r}: {p}")?;
        }
    }
    Ok(0)
}

fn search(a: &SearchArgs, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let game = load_game(&a.game)?;
    let opts = SearchOptions {
        max_rounds: a.max_rounds,
        branching: a.branching,
        budget: a.budget,
        grid: a.grid.as_deref().map(parse_rationals).transpose()?.unwrap_or_default(),
        filter: match a.filter {
            FilterArg::Expost => SearchFilter::ExPost,
            FilterArg::Noncommitted => SearchFilter::NonCommitted,
        },
    };
    let r = design::search_expost_conversation(&game, &objective(a.objective, a.objective_file.as_deref())?, &opts)?;
    if let Some(path) = &a.out {
        docs::save(path, &ProtocolDocument::from_protocol(&r.protocol.clone().into()))?;
    }
    if json {
        print_json(
            out,
            &json!({
                "value": r.value.to_string(),
                "rounds": r.rounds,
                "u_a": r.u_a.to_string(),
                "u_b": r.u_b.to_string(),
                "budget_exhausted": r.budget_exhausted,
            }),
        )?;
    } else {
        writeln!(
            out,
            "best value found {} with {} rounds (Alice {}, Bob {})",
            r.value, r.rounds, r.u_a, r.u_b
        )?;
        if r.budget_exhausted {
            writeln!(
                out,
                "budget ran out before {} rounds; deeper protocols were not tried",
                a.max_rounds
            )?;
        }
    }
    Ok(if r.budget_exhausted { 3 } else { 0 })
}

fn frontier(game: &Path, ir: IrArg, weights: &str) -> CliResult<Vec<design::FrontierPoint>> {
    let game = load_game(game)?;
    Ok(design::pareto_frontier(&game, ir.into(), &parse_rationals(weights)?)?)
}

fn pareto(game: &Path, ir: IrArg, weights: &str, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let points = frontier(game, ir, weights)?;
    if json {
        let v: Vec<Value> = points
            .iter()
            .map(|p| json!({ "lambda": p.lambda.to_string(), "u_a": p.u_a.to_string(), "u_b": p.u_b.to_string() }))
            .collect();
        print_json(out, &json!({ "frontier": v }))?;
    } else {
        writeln!(out, "lambda\tu_A\tu_B")?;
        for p in &points {
            writeln!(out, "{}\t{}\t{}", p.lambda, p.u_a, p.u_b)?;
        }
    }
    Ok(0)
}

fn repeat(a: &RepeatArgs, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let game = load_game(&a.game)?;
    let Protocol::Conversation(protocol) = load_protocol(&a.protocol)? else {
        return Err(CliError::Input("repeat needs a conversation protocol".into()));
    };
    let delta = a
        .delta
        .trim()
        .parse::<Rational>()
        .map_err(|_| CliError::Input(format!("bad --delta {:?}", a.delta)))?;
    let threshold = match repeated::delta_threshold(&game, &protocol, a.budget) {
        Ok(d) => Some(d),
        Err(parley::Error::NonPositiveCommittedValue(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let committed = repeated::committed_value(&game, &protocol, a.budget)?;
    let ceiling = repeated::quit_ceiling(&game, &protocol, a.budget)?;
    let spec = RepeatedSpec {
        game: game.clone(),
        protocol,
        delta,
        punishment: match a.punishment {
            PunishmentArg::Zero => Punishment::ZeroFuture,
            PunishmentArg::Nocomm => Punishment::NoCommFuture,
        },
        horizon: a.horizon,
    };
    let report = repeated::audit_repeated_ir(&spec, a.budget)?;
    let (va, vb) = repeated::committed_super_value(&spec, a.budget)?;
    if json {
        print_json(
            out,
            &json!({
                "committed_u_b": committed.to_string(),
                "quit_ceiling": ceiling.to_string(),
                "delta_threshold": threshold.as_ref().map(Rational::to_string),
                "super_value_a": va.to_string(),
                "super_value_b": vb.to_string(),
                "audit": report_json(&report, &game),
            }),
        )?;
    } else {
        writeln!(
            out,
            "committed value for Bob {committed}, best quitting payoff {ceiling}"
        )?;
        match &threshold {
            Some(d) => writeln!(out, "patience threshold {d}")?,
            None => writeln!(out, "no patience threshold: the committed value is not positive")?,
        }
        writeln!(out, "discounted totals: Alice {va}, Bob {vb}")?;
        write_report(&report, &game, out)?;
    }
    Ok(if report.pass() { 0 } else { 1 })
}

fn export_svg(
    p: &ProtocolArgs,
    bob_type: usize,
    alice_type: usize,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let (game, pa, pb) = priors(p)?;
    let Protocol::Conversation(c) = load_protocol(&p.protocol)? else {
        return Err(CliError::Input("only conversations have a belief walk".into()));
    };
    if bob_type >= pb.len() || alice_type >= pa.len() {
        return Err(CliError::Input("axis type index out of range".into()));
    }
    let trace = c.dimartingale_audit(&pa, &pb, p.budget)?;
    let (x, y) = match &game {
        Some(g) => (
            format!("q_B({})", g.types_b()[bob_type]),
            format!("q_A({})", g.types_a()[alice_type]),
        ),
        None => (format!("q_B({bob_type})"), format!("q_A({alice_type})")),
    };
    emit_text(
        path,
        &svg::render(&svg::belief_walk(&trace, bob_type, alice_type), &x, &y),
        out,
    )?;
    Ok(0)
}

fn export_csv(game: &Path, ir: IrArg, weights: &str, path: Option<&Path>, out: &mut dyn Write) -> CliResult<i32> {
    let mut csv = String::from("lambda,u_a,u_b\n");
    for p in frontier(game, ir, weights)? {
        csv.push_str(&format!("{},{},{}\n", p.lambda, p.u_a, p.u_b));
    }
    emit_text(path, &csv, out)?;
    Ok(0)
}

fn fixture(name: &str, path: Option<&Path>, out: &mut dyn Write) -> CliResult<i32> {
    if name == "list" {
        for (n, _) in fixtures::FIXTURES {
            writeln!(out, "{n}")?;
        }
        return Ok(0);
    }
    let text = fixtures::render(name)
        .ok_or_else(|| CliError::Input(format!("unknown fixture {name:?}; try `fixture list`")))?;
    emit_text(path, &text, out)?;
    Ok(0)
}
