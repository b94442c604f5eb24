use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use svrp_core::detvrp::stoch_lower_bound;
use svrp_core::indep::{self, IndepSampler};
use svrp_core::instances::{self, Hypergraph};
use svrp_core::oracle::{exact_stoch_vrp, OracleCaps};
use svrp_core::rational::{self, Rational};
use svrp_core::recourse::{self, COPIES};
use svrp_core::reduction::{self, BlackBoxConfig, DemandSampler, EmpiricalSampler};
use svrp_core::setcover::{greedy_set_cover, SetCoverConfig};
use svrp_core::solution::{action_to_json, fixed_to_json, parse_solution};
use svrp_core::{evaluate_objective, seed, Demands, Error, FixedTour, StochVrpInstance};

mod bench;

const BUILD: &str = env!("SVRP_GIT_DESCRIBE");

#[derive(Parser, Debug)]
#[command(name = "svrp", version, about = "Two-stage stochastic vehicle routing with recourse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance and write the solution JSON.
    Solve(SolveArgs),
    /// Exhaustive optimum for tiny explicit instances.
    Oracle(OracleArgs),
    /// Recompute the objective of a solution file.
    Eval(EvalArgs),
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a suite and emit a CSV of objectives and ratios.
    Bench(bench::BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Auto,
    Explicit,
    Blackbox,
    Indep,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Auto => "auto",
            Mode::Explicit => "explicit",
            Mode::Blackbox => "blackbox",
            Mode::Indep => "indep",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of budget guesses (black-box) or orienteering
    /// budgets per embedding (explicit).
    #[arg(long = "b-sweep")]
    b_sweep: Option<usize>,
    /// Tree embeddings sampled per orienteering call.
    #[arg(long, default_value_t = 8)]
    embeddings: usize,
    /// Scenario count for the black-box reduction (computed when absent).
    #[arg(long)]
    samples: Option<usize>,
    /// Fresh draws used for objective estimates.
    #[arg(long = "eval-samples", default_value_t = 200)]
    eval_samples: usize,
    /// Adds wall-clock timing to the output (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Random grid instance.
    Random(GenRandomArgs),
    /// Hardness construction from a uniform hypergraph.
    Hardness(GenHardnessArgs),
}

#[derive(Args, Debug)]
struct GenRandomArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    capacity: u32,
    #[arg(long, default_value = "2")]
    lambda: String,
    #[arg(long, default_value = "0.5")]
    density: String,
    /// Independent demands instead of explicit scenarios.
    #[arg(long)]
    indep: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenHardnessArgs {
    /// Hypergraph file (`.hg.json`).
    #[arg(long, conflicts_with_all = ["parts", "dense"])]
    hypergraph: Option<PathBuf>,
    /// Part sizes of a random k-partite hypergraph, e.g. `6,6`.
    #[arg(long, value_delimiter = ',')]
    parts: Option<Vec<usize>>,
    /// Edge count for `--parts`.
    #[arg(long, default_value_t = 12)]
    edges: usize,
    /// Vertex count of a random dense non-bipartite graph.
    #[arg(long)]
    dense: Option<usize>,
    /// Edge probability for `--dense`.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also writes the hypergraph used.
    #[arg(long = "hypergraph-out")]
    hypergraph_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) => 4,
            _ => 3,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure { code: 3, message: format!("{}: {e}", path.display()) })
}

pub fn load_instance(path: &Path) -> CliResult<StochVrpInstance> {
    let text = read_file(path)?;
    instances::parse_instance(&text).map_err(|e| Failure { code: 3, message: format!("{}: {e}", path.display()) })
}

fn write_out(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure { code: 3, message: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn fmt(r: &Rational) -> Value {
    Value::String(rational::format(r))
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn solve_flags(a: &SolveArgs) -> Value {
    json!({
        "instance": a.instance.display().to_string(),
        "mode": a.mode.name(),
        "seed": a.seed,
        "b_sweep": a.b_sweep,
        "embeddings": a.embeddings,
        "samples": a.samples,
        "eval_samples": a.eval_samples,
        "timing": a.timing,
        "out": a.out.as_ref().map(|p| p.display().to_string()),
    })
}

fn setcover_config(a: &SolveArgs) -> SetCoverConfig {
    let mut cfg = SetCoverConfig::default();
    cfg.kro.embeddings = a.embeddings.max(1);
    cfg.kro.max_budgets = a.b_sweep;
    cfg.kro.seed = seed::derive(a.seed, 0x5E7C);
    cfg
}

/// Solves per `args`; returns the solution document.
pub fn solve(args: &SolveArgs) -> CliResult<Value> {
    let inst = load_instance(&args.instance)?;
    let mode = match (args.mode, &inst.demands) {
        (Mode::Auto, Demands::Scenarios(_)) => Mode::Explicit,
        (Mode::Auto, Demands::Independent(_)) => Mode::Indep,
        (Mode::Explicit, Demands::Independent(_)) => {
            return Err(Failure::usage("--mode explicit needs an instance with \"scenarios\""))
        }
        (Mode::Indep, Demands::Scenarios(_)) => {
            return Err(Failure::usage("--mode indep needs an instance with \"indep\" demands"))
        }
        (m, _) => m,
    };
    let started = Instant::now();
    let mut doc = match mode {
        Mode::Explicit => solve_explicit(&inst, args)?,
        Mode::Blackbox => solve_blackbox(&inst, args)?,
        Mode::Indep => solve_indep(&inst, args)?,
        Mode::Auto => unreachable!("auto resolved above"),
    };
    let obj = doc.as_object_mut().expect("solution is an object");
    obj.insert("build".into(), json!(BUILD));
    obj.insert("flags".into(), solve_flags(args));
    obj.insert("mode".into(), json!(mode.name()));
    if args.timing {
        obj.insert("timing_ms".into(), num(started.elapsed().as_secs_f64() * 1e3));
    }
    Ok(doc)
}

fn fixed_json(inst: &StochVrpInstance, fixed: &FixedTour, base: Option<&FixedTour>, copies: usize) -> Value {
    let mut o = Map::new();
    o.insert("rtours".into(), fixed_to_json(&inst.metric, fixed));
    o.insert("copies".into(), json!(copies));
    o.insert("length".into(), fmt(&fixed.total_length()));
    if let Some(b) = base {
        o.insert("base".into(), fixed_to_json(&inst.metric, b));
        o.insert("base_length".into(), fmt(&b.total_length()));
    }
    Value::Object(o)
}

fn solve_explicit(inst: &StochVrpInstance, args: &SolveArgs) -> CliResult<Value> {
    let set = inst.scenarios().expect("explicit mode");
    let out = greedy_set_cover(inst, &setcover_config(args))?;
    let objective = evaluate_objective(inst, &out.fixed, &out.actions)?;
    if objective != out.total_cost {
        return Err(Error::Invariant("set-cover cost differs from the evaluated objective".into()).into());
    }
    let lb = stoch_lower_bound(&inst.metric, set.scenarios(), inst.capacity);
    Ok(json!({
        "fixed_tour": fixed_json(inst, &out.fixed, None, 1),
        "actions": out.actions.iter().map(|a| action_to_json(&inst.metric, a)).collect::<Vec<_>>(),
        "objective": fmt(&objective),
        "objective_f64": num(rational::to_f64(&objective)),
        "lower_bound": fmt(&lb),
        "ratios": {
            "ground_set": out.ground_size,
            "rho_sub": out.rho_sub.map(num),
            "guarantee": out.guarantee().map(num),
            "vs_lower_bound": if lb > Rational::from_integer(0) { num(rational::to_f64(&(objective / lb))) } else { Value::Null },
        },
        "picks": out.picks.len(),
    }))
}

fn solve_blackbox(inst: &StochVrpInstance, args: &SolveArgs) -> CliResult<Value> {
    let cfg = BlackBoxConfig {
        setcover: setcover_config(args),
        samples: args.samples,
        eval_samples: args.eval_samples.max(1),
        max_budgets: args.b_sweep,
        seed: args.seed,
        ..Default::default()
    };
    let mut sampler: Box<dyn DemandSampler + '_> = match &inst.demands {
        Demands::Scenarios(set) => Box::new(EmpiricalSampler { scenarios: set.clone() }),
        Demands::Independent(dist) => Box::new(IndepSampler { dist }),
    };
    let out = reduction::solve_black_box(&inst.metric, inst.capacity, inst.lambda, sampler.as_mut(), &cfg)?;
    let candidates: Vec<Value> = out
        .candidates
        .iter()
        .map(|c| {
            json!({
                "budget": fmt(&c.budget),
                "classes": c.classes,
                "samples_required": num(c.samples.required),
                "samples_used": c.samples.used,
                "capped": c.samples.capped,
                "base_length": fmt(&c.base.total_length()),
                "explicit_objective": fmt(&c.explicit_objective),
                "estimate": num(c.estimate),
                "std_error": num(c.std_error),
            })
        })
        .collect();
    let mut doc = json!({
        "fixed_tour": fixed_json(inst, &out.fixed, Some(&out.base), COPIES),
        "policy": {
            "kind": "outlier-lp rounding",
            "copies": COPIES,
            "budget": fmt(&out.budget),
            "candidates": candidates,
        },
        "estimate": num(out.estimate),
        "std_error": num(out.std_error),
    });
    if let Some(set) = inst.scenarios() {
        let mut actions = Vec::with_capacity(set.len());
        for q in set.scenarios() {
            let (action, _, _) = recourse::recourse_for(inst, &out.base, q)?;
            actions.push(action);
        }
        let objective = evaluate_objective(inst, &out.fixed, &actions)?;
        let lb = stoch_lower_bound(&inst.metric, set.scenarios(), inst.capacity);
        let o = doc.as_object_mut().expect("object");
        o.insert("actions".into(), Value::Array(actions.iter().map(|a| action_to_json(&inst.metric, a)).collect()));
        o.insert("objective".into(), fmt(&objective));
        o.insert("objective_f64".into(), num(rational::to_f64(&objective)));
        o.insert("lower_bound".into(), fmt(&lb));
    }
    Ok(doc)
}

/// Joint outcomes enumerated for the exact indep objective.
const OUTCOME_LIMIT: usize = 1 << 12;

fn solve_indep(inst: &StochVrpInstance, args: &SolveArgs) -> CliResult<Value> {
    let Demands::Independent(dist) = &inst.demands else {
        return Err(Failure::usage("indep mode needs independent demands"));
    };
    let cfg = indep::IndepConfig {
        samples: args.samples.unwrap_or(64),
        eval_samples: args.eval_samples.max(1),
        seed: args.seed,
        ..Default::default()
    };
    let out = indep::solve_indep(&inst.metric, dist, inst.capacity, inst.lambda, &cfg)?;
    let names = |pts: &[usize]| -> Vec<String> { pts.iter().map(|&v| inst.metric.name(v).to_string()).collect() };
    let base = FixedTour::new(out.policy.routes.iter().map(|r| r.tour.clone()).collect());
    let mut doc = json!({
        "fixed_tour": fixed_json(inst, &out.policy.fixed, Some(&base), out.policy.beta),
        "policy": {
            "kind": "route copies with first-fit filling",
            "copies": out.policy.beta,
            "first_stage_points": names(&out.policy.d1),
            "recourse_points": names(&out.policy.d2),
            "lp_value": num(out.lp.value),
            "lp_rounds": out.lp.rounds,
        },
        "estimate": num(out.estimate),
        "std_error": num(out.std_error),
        "lower_bound_lp": num(out.lp.value),
    });
    match out.policy.exact_objective(&inst.metric, dist, inst.capacity, inst.lambda, OUTCOME_LIMIT) {
        Ok(exact) => {
            let o = doc.as_object_mut().expect("object");
            o.insert("objective".into(), fmt(&exact));
            o.insert("objective_f64".into(), num(rational::to_f64(&exact)));
        }
        Err(Error::TooLarge(_)) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(doc)
}

pub fn oracle_doc(inst: &StochVrpInstance) -> CliResult<Value> {
    if inst.scenarios().is_none() {
        return Err(Failure::usage("the oracle needs an instance with \"scenarios\""));
    }
    let opt = exact_stoch_vrp(inst, OracleCaps::default())?;
    Ok(json!({
        "fixed_tour": fixed_json(inst, &opt.fixed, None, 1),
        "actions": opt.actions.iter().map(|a| action_to_json(&inst.metric, a)).collect::<Vec<_>>(),
        "objective": fmt(&opt.cost),
        "objective_f64": num(rational::to_f64(&opt.cost)),
    }))
}

fn run_oracle(a: &OracleArgs) -> CliResult<()> {
    let inst = load_instance(&a.instance)?;
    let mut doc = oracle_doc(&inst)?;
    let o = doc.as_object_mut().expect("object");
    o.insert("build".into(), json!(BUILD));
    o.insert("mode".into(), json!("oracle"));
    o.insert(
        "flags".into(),
        json!({ "instance": a.instance.display().to_string(), "out": a.out.as_ref().map(|p| p.display().to_string()) }),
    );
    write_out(a.out.as_deref(), &to_pretty(&doc))
}

fn run_eval(a: &EvalArgs) -> CliResult<()> {
    let inst = load_instance(&a.instance)?;
    let text = read_file(&a.solution)?;
    let (fixed, actions) = parse_solution(&inst.metric, &text)?;
    let objective = evaluate_objective(&inst, &fixed, &actions)?;
    let reported = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| v.get("objective").and_then(|o| o.as_str()).map(str::to_string));
    let consistent = match &reported {
        Some(r) => rational::parse(r).map(|r| r == objective).unwrap_or(false),
        None => true,
    };
    let doc = json!({
        "objective": fmt(&objective),
        "objective_f64": num(rational::to_f64(&objective)),
        "reported": reported,
        "consistent": consistent,
    });
    print!("{}", to_pretty(&doc));
    if consistent {
        Ok(())
    } else {
        Err(Failure { code: 4, message: "reported objective differs from the recomputed one".into() })
    }
}

fn parse_rational_arg(s: &str, what: &str) -> CliResult<Rational> {
    rational::parse(s).map_err(|_| Failure::usage(format!("--{what}: not a number: {s:?}")))
}

fn run_gen(g: &GenCommand) -> CliResult<()> {
    match g {
        GenCommand::Random(a) => {
            let lambda = parse_rational_arg(&a.lambda, "lambda")?;
            let density = parse_rational_arg(&a.density, "density")?;
            if density < Rational::from_integer(0) || density > Rational::from_integer(1) {
                return Err(Failure::usage("--density must lie in [0, 1]"));
            }
            let inst = if a.indep {
                instances::gen_random_indep(a.n, a.capacity, lambda, density, a.seed)?
            } else {
                instances::gen_random(a.n, a.m, a.capacity, lambda, rational::to_f64(&density), a.seed)?
            };
            write_out(a.out.as_deref(), &instances::serialize_instance(&inst))
        }
        GenCommand::Hardness(a) => {
            let h = match (&a.hypergraph, &a.parts, a.dense) {
                (Some(p), _, _) => Hypergraph::parse(&read_file(p)?)?,
                (None, Some(parts), _) => instances::random_k_partite(parts, a.edges, a.seed),
                (None, None, Some(n)) => instances::random_dense_graph(n, a.p, a.seed),
                (None, None, None) => return Err(Failure::usage("give --hypergraph, --parts or --dense")),
            };
            let inst = instances::gen_hardness(&h)?;
            if let Some(p) = &a.hypergraph_out {
                fs::write(p, h.serialize()).map_err(|e| Failure { code: 3, message: format!("{}: {e}", p.display()) })?;
            }
            let params = instances::hardness_params(h.k, h.vertices.len(), h.edges.len());
            log::info!(
                "L = {}, lambda = {}",
                rational::format(&params.depot_distance),
                rational::format(&params.lambda)
            );
            write_out(a.out.as_deref(), &instances::serialize_instance(&inst))
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve(a) => {
            let doc = solve(&a)?;
            write_out(a.out.as_deref(), &to_pretty(&doc))
        }
        Command::Oracle(a) => run_oracle(&a),
        Command::Eval(a) => run_eval(&a),
        Command::Gen(g) => run_gen(&g),
        Command::Bench(a) => bench::run(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("svrp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
