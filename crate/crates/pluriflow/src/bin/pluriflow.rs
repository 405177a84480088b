//! Batch command-line front end: catalog browsing, predicate checks, flow
//! runs, feasibility searches, and file export for plots.
//!
//! Exit codes: 0 success; 1 negative/infeasible answer under `--assert`;
//! 2 input error; 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use pluriflow::frame::ComplexFrame;
use pluriflow::metrics::{
    balanced_residual, kahler_residual, sample_metric, skt_residual, HermitianMetric,
};
use pluriflow::search::SearchOpts;
use pluriflow::{catalog, flow, search};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "pluriflow",
    version,
    about = "Invariant Hermitian geometry and the pluriclosed flow on Lie algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse the built-in algebra catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Evaluate the special-metric predicates of one metric.
    Check {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        metric: MetricArgs,
        /// Exit 1 unless the SKT residual is below 1e-8.
        #[arg(long)]
        assert_skt: bool,
        /// Exit 1 unless the balanced residual is below 1e-8.
        #[arg(long)]
        assert_balanced: bool,
        /// Exit 1 unless the Kähler residual is below 1e-8.
        #[arg(long)]
        assert_kahler: bool,
    },
    /// Integrate the pluriclosed flow.
    Flow {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        metric: MetricArgs,
        /// Final flow time; negative runs the backward flow.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-12)]
        abs_tol: f64,
        #[arg(long, default_value_t = 0.1)]
        sample_dt: f64,
        /// Write the trajectory as CSV.
        #[arg(long)]
        csv: Option<std::path::PathBuf>,
        /// Write the trajectory as JSON.
        #[arg(long)]
        json: Option<std::path::PathBuf>,
    },
    /// Integrate the bracket flow, optionally reconstructing the metric flow.
    BracketFlow {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Final flow time; negative runs the backward flow.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        #[arg(long, default_value_t = 0.1)]
        sample_dt: f64,
        /// Also integrate h(t) and report the deviation from the metric flow.
        #[arg(long)]
        reconstruct: bool,
        #[arg(long)]
        json: Option<std::path::PathBuf>,
    },
    /// Feasibility searches over the invariant cone.
    Search {
        /// One of: skt, balanced, kahler, taming, static.
        target: String,
        #[command(flatten)]
        geometry: GeometryArgs,
        /// λ values for the static search (repeatable).
        #[arg(long = "lambda", allow_negative_numbers = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (default: PLURIFLOW_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Exit 1 when the search is infeasible.
        #[arg(long)]
        assert_feasible: bool,
    },
    /// Algebra-level Bott-Chern dimension h^{p,q}_BC.
    BcDim {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List catalog keys, optionally filtered by tags (AND semantics).
    List {
        #[arg(long = "tag")]
        tags: Vec<String>,
    },
    /// Print one entry as JSON.
    Show {
        key: String,
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
    },
}

#[derive(Args)]
struct GeometryArgs {
    /// Catalog key of the geometry.
    #[arg(long)]
    catalog: Option<String>,
    /// Parameters for catalog families, as name=value.
    #[arg(long = "param", value_parser = parse_kv)]
    params: Vec<(String, f64)>,
    /// Named complex structure inside the entry (default: first).
    #[arg(long)]
    structure: Option<String>,
    /// Complex structure-equation DSL, e.g. "d a1 = i*a{13}; ...".
    #[arg(long)]
    complex_dsl: Option<String>,
    /// JSON config file providing any of the geometry/metric/run fields;
    /// explicit flags override it.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct MetricArgs {
    /// identity | random:<seed> | a path to a metric JSON file.
    #[arg(long)]
    metric: Option<String>,
}

/// File form of the run configuration; every field optional, flags win.
#[derive(Default, serde::Deserialize)]
struct ConfigFile {
    catalog: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    structure: Option<String>,
    complex_dsl: Option<String>,
    metric: Option<String>,
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.to_string(), v))
}

fn load_config(g: &GeometryArgs) -> Result<ConfigFile, (i32, String)> {
    match &g.config {
        None => Ok(ConfigFile::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| (2, format!("cannot read config `{}`: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| (2, format!("bad config: {e}")))
        }
    }
}

fn resolve_frame(g: &GeometryArgs) -> Result<Arc<ComplexFrame>, (i32, String)> {
    let file = load_config(g)?;
    let catalog_key = g.catalog.clone().or(file.catalog);
    let dsl = g.complex_dsl.clone().or(file.complex_dsl);
    if catalog_key.is_some() && dsl.is_some() {
        return Err((
            2,
            "give exactly one algebra source (--catalog or --complex-dsl)".into(),
        ));
    }
    if let Some(dsl) = &dsl {
        let (_, _, frame) =
            pluriflow::frame::parse_complex_equations(dsl).map_err(|e| (2, e.to_string()))?;
        return Ok(frame);
    }
    let key =
        catalog_key.ok_or_else(|| (2, "need --catalog <key> or --complex-dsl".to_string()))?;
    let mut params: BTreeMap<String, f64> = file.params;
    for (k, v) in &g.params {
        params.insert(k.clone(), *v);
    }
    if params.is_empty() {
        params = catalog::default_params(&key);
    }
    let entry = catalog::get(&key, &params).map_err(|e| (2, e.to_string()))?;
    let structure = g.structure.clone().or(file.structure);
    let frame = match &structure {
        Some(name) => entry
            .complex_structures
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f.clone())
            .ok_or_else(|| (2, format!("entry `{key}` has no structure `{name}`")))?,
        None => entry.frame().map_err(|e| (2, e.to_string()))?.clone(),
    };
    Ok(frame)
}

fn resolve_metric(
    frame: &Arc<ComplexFrame>,
    g: &GeometryArgs,
    m: &MetricArgs,
) -> Result<HermitianMetric, (i32, String)> {
    let file = load_config(g)?;
    let spec = m
        .metric
        .clone()
        .or(file.metric)
        .unwrap_or_else(|| "identity".to_string());
    match spec.as_str() {
        "identity" => Ok(HermitianMetric::identity(frame)),
        s if s.starts_with("random:") => {
            let seed: u64 = s["random:".len()..]
                .parse()
                .map_err(|e| (2, format!("bad random seed: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(sample_metric(frame, &mut rng))
        }
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| (2, format!("cannot read metric file `{path}`: {e}")))?;
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| (2, e.to_string()))?;
            HermitianMetric::from_json(frame, &v).map_err(|e| (2, e.to_string()))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = run(cli);
    std::process::exit(code);
}

fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, (i32, String)> {
    match cli.command {
        Command::Catalog { action } => match action {
            CatalogAction::List { tags } => {
                let mut filter = BTreeSet::new();
                for t in &tags {
                    filter.insert(catalog::Tag::parse(t).map_err(|e| (2, e.to_string()))?);
                }
                for key in catalog::list(&filter) {
                    println!("{key}");
                }
                Ok(0)
            }
            CatalogAction::Show { key, params } => {
                let p: BTreeMap<String, f64> = params.into_iter().collect();
                let p = if p.is_empty() {
                    catalog::default_params(&key)
                } else {
                    p
                };
                let entry = catalog::get(&key, &p).map_err(|e| (2, e.to_string()))?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&entry.to_json()).unwrap()
                );
                Ok(0)
            }
        },
        Command::Check {
            geometry,
            metric,
            assert_skt,
            assert_balanced,
            assert_kahler,
        } => {
            let frame = resolve_frame(&geometry)?;
            let g = resolve_metric(&frame, &geometry, &metric)?;
            let skt = skt_residual(&g);
            let balanced = balanced_residual(&g);
            let kahler = kahler_residual(&g);
            let doc = serde_json::json!({
                "skt": skt,
                "balanced": balanced,
                "kahler": kahler,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            let thresh = 1e-8;
            let failed = (assert_skt && skt >= thresh)
                || (assert_balanced && balanced >= thresh)
                || (assert_kahler && kahler >= thresh);
            Ok(if failed { 1 } else { 0 })
        }
        Command::Flow {
            geometry,
            metric,
            t_end,
            rel_tol,
            abs_tol,
            sample_dt,
            csv,
            json,
        } => {
            let frame = resolve_frame(&geometry)?;
            let g0 = resolve_metric(&frame, &geometry, &metric)?;
            let opts = flow::FlowOpts {
                rel_tol,
                abs_tol,
                sample_dt,
                ..Default::default()
            };
            let traj =
                flow::integrate(&frame, &g0, t_end, &opts).map_err(|e| (3, e.to_string()))?;
            if let Some(path) = csv {
                std::fs::write(&path, traj.to_csv()).map_err(|e| (3, e.to_string()))?;
            }
            if let Some(path) = json {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&traj.to_json()).unwrap(),
                )
                .map_err(|e| (3, e.to_string()))?;
            }
            let last = traj.states.last().unwrap();
            let doc = serde_json::json!({
                "status": traj.status,
                "samples": traj.times.len(),
                "t_last": traj.times.last(),
                "g11_last": last[(0, 0)].re,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            match traj.status {
                flow::FlowStatus::StoppedStepFail { .. } => Ok(3),
                _ => Ok(0),
            }
        }
        Command::BracketFlow {
            geometry,
            t_end,
            rel_tol,
            sample_dt,
            reconstruct,
            json,
        } => {
            let frame = resolve_frame(&geometry)?;
            let opts = flow::FlowOpts {
                rel_tol,
                sample_dt,
                ..Default::default()
            };
            let traj = pluriflow::bracket::integrate_bracket(&frame.mu, t_end, &opts)
                .map_err(|e| (3, e.to_string()))?;
            let mut doc = traj.to_json();
            if reconstruct {
                let h = pluriflow::bracket::integrate_h(
                    &traj,
                    &pluriflow::bracket::FrameChange::identity(frame.n()),
                    t_end,
                    &opts,
                )
                .map_err(|e| (3, e.to_string()))?;
                let g0 = HermitianMetric::identity(&frame);
                let mtraj =
                    flow::integrate(&frame, &g0, t_end, &opts).map_err(|e| (3, e.to_string()))?;
                let mut dev = 0.0_f64;
                for (idx, fr) in h.frames.iter().enumerate() {
                    if idx >= mtraj.states.len() {
                        break;
                    }
                    dev = dev.max(fr.reconstruct().sub(&mtraj.states[idx]).max_abs());
                }
                doc["reconstruction_max_deviation"] = serde_json::json!(dev);
            }
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap())
                    .map_err(|e| (3, e.to_string()))?;
            }
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            Ok(0)
        }
        Command::Search {
            target,
            geometry,
            lambdas,
            starts,
            seed,
            workers,
            assert_feasible,
        } => {
            let frame = resolve_frame(&geometry)?;
            let mut opts = SearchOpts {
                starts,
                seed,
                ..Default::default()
            };
            if let Some(w) = workers {
                opts.workers = w.max(1);
            }
            let result = match target.as_str() {
                "skt" => search::search_skt(&frame, &opts),
                "balanced" => search::search_balanced(&frame, &opts),
                "kahler" => search::search_kahler(&frame, &opts),
                "taming" => search::search_taming(&frame, &opts),
                "static" => {
                    let grid = if lambdas.is_empty() {
                        vec![-1.0, 0.0, 1.0]
                    } else {
                        lambdas
                    };
                    search::search_static(&frame, &grid, &opts)
                }
                other => return Err((2, format!("unknown search target `{other}`"))),
            }
            .map_err(|e| (3, e.to_string()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&result.to_json()).unwrap()
            );
            if assert_feasible && !result.is_feasible() {
                return Ok(1);
            }
            Ok(0)
        }
        Command::BcDim { geometry, p, q } => {
            let frame = resolve_frame(&geometry)?;
            if p > frame.n() || q > frame.n() {
                return Err((
                    2,
                    format!("(p,q) = ({p},{q}) out of range for n = {}", frame.n()),
                ));
            }
            let dim = search::bott_chern_dim(&frame, p, q);
            println!("{}", serde_json::json!({ "p": p, "q": q, "dim": dim }));
            Ok(0)
        }
    }
}
