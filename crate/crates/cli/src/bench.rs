//! Benchmark harness: solver vs oracle per instance, one CSV row each.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use svrp_core::detvrp::stoch_lower_bound;
use svrp_core::instances;
use svrp_core::oracle::{exact_stoch_vrp, OracleCaps};
use svrp_core::rational::{self, int};
use svrp_core::setcover::{greedy_set_cover, SetCoverConfig};
use svrp_core::{seed, Demands, Error, StochVrpInstance};

use crate::{load_instance, CliResult, Failure};

/// CSV header; the column set is fixed.
pub const COLUMNS: [&str; 7] = ["instance", "family", "algo_objective", "oracle_objective", "lp_bound", "ratio", "wall_ms"];

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of `.svrp.json` files, or `random` for seeded random
    /// instances (n <= 5, m <= 3, Q <= 2).
    #[arg(long, default_value = "random")]
    suite: String,
    /// Runs per instance; the reported wall time is the median.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Instance count for the random suite.
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fills the wall_ms column (left empty otherwise, so reruns are
    /// byte-identical).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn suite(args: &BenchArgs) -> CliResult<Vec<(String, String, StochVrpInstance)>> {
    if args.suite == "random" {
        let lambdas = [1, 2, 8];
        return (0..args.count)
            .map(|i| {
                let s = seed::derive(args.seed, i as u64);
                let n = 3 + (s % 3) as usize;
                let m = 1 + ((s >> 8) % 3) as usize;
                let q = 1 + ((s >> 16) % 2) as u32;
                let lambda = int(lambdas[((s >> 24) % 3) as usize]);
                let inst = instances::gen_random(n, m, q, lambda, 0.6, s)?;
                Ok((format!("random-{i}"), "random".to_string(), inst))
            })
            .collect();
    }
    let dir = PathBuf::from(&args.suite);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| Failure { code: 3, message: format!("{}: {e}", dir.display()) })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".svrp.json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|f| f.to_string_lossy().trim_end_matches(".svrp.json").to_string()).unwrap_or_default();
            let family = name.split(['-', '_']).next().unwrap_or("").to_string();
            Ok((name, family, load_instance(&p)?))
        })
        .collect()
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure { code: 4, message: e.to_string() };
    w.write_record(COLUMNS).map_err(csv_err)?;
    let mut worst: std::collections::BTreeMap<String, f64> = std::collections::BTreeMap::new();
    for (name, family, inst) in suite(args)? {
        let Demands::Scenarios(set) = &inst.demands else {
            log::warn!("{name}: skipped, bench needs explicit scenarios");
            continue;
        };
        let mut cfg = SetCoverConfig::default();
        cfg.kro.seed = seed::derive(args.seed, 0xBE7C);
        let mut times = Vec::new();
        let mut cost = None;
        for _ in 0..args.repeats.max(1) {
            let t = Instant::now();
            let out = greedy_set_cover(&inst, &cfg)?;
            times.push(t.elapsed().as_secs_f64() * 1e3);
            cost = Some(out.total_cost);
        }
        let cost = cost.expect("at least one run");
        times.sort_by(f64::total_cmp);
        let oracle = match exact_stoch_vrp(&inst, OracleCaps::default()) {
            Ok(o) => Some(o.cost),
            Err(Error::TooLarge(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let lb = stoch_lower_bound(&inst.metric, set.scenarios(), inst.capacity);
        let reference = oracle.unwrap_or(lb);
        let ratio = if reference > int(0) {
            rational::to_f64(&(cost / reference))
        } else {
            1.0
        };
        let e = worst.entry(family.clone()).or_insert(0.0);
        *e = e.max(ratio);
        w.write_record([
            name,
            family,
            rational::format(&cost),
            oracle.map(|o| rational::format(&o)).unwrap_or_default(),
            rational::format(&lb),
            format!("{ratio:.6}"),
            if args.timing { format!("{:.3}", times[times.len() / 2]) } else { String::new() },
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure { code: 4, message: e.to_string() })?;
    let text = String::from_utf8(bytes).map_err(|e| Failure { code: 4, message: e.to_string() })?;
    for (family, r) in &worst {
        eprintln!("{family}: max ratio {r:.6}");
    }
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure { code: 3, message: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
