//! Command-line entry point: run a pipeline over a built-in scenario or a
//! system JSON file and export graphs, chain sets, reports, and plot data.
//!
//! Exit codes: 0 success, 2 configuration error, 3 box-budget exceeded,
//! 4 divergence-dominated run (more than half of all arrival events left the
//! domain). Every error is also emitted as a JSON diagnostic on stderr.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::Parser;
use serde_json::json;

use chainsets::compactification::conjugacy_residual;
use chainsets::engine::{
    antipodal_classification, build_covering, build_transition_graph, chain_control_sets,
    euclidean_flow, export, projective_quotient, sphere_flow, strong_chain_ladder, AntipodalClass,
    ChainSetResult, DomainSpec, EngineError, JumpSpec, TransitionGraph, Weight,
};
use chainsets::scenarios::{self, Scenario};
use chainsets::systems::{
    check_unbounded_strong_set, monodromy, AffineSystem, ControlSignal, SystemError,
};
use nalgebra::DVector;

const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "chainsets", version, about = "Chain control sets via Poincaré-sphere symbolic images")]
struct Args {
    /// Built-in scenario name: shear_flow | linear_3d | example2 | scalar_hyperbolic
    #[arg(long, conflicts_with = "system_file")]
    scenario: Option<String>,

    /// System definition JSON file (uses default engine parameters)
    #[arg(long)]
    system_file: Option<PathBuf>,

    /// euclidean | sphere | hemisphere | projective | strong-ladder | monodromy | conjugacy
    #[arg(long)]
    pipeline: String,

    /// Subdivision depth (2^depth cells per grid axis)
    #[arg(long)]
    depth: Option<usize>,

    /// Chain step time T (also the monodromy period τ)
    #[arg(long = "T")]
    t_chain: Option<f64>,

    /// Constant jump radius ε
    #[arg(long, conflicts_with = "delta_ladder")]
    eps: Option<f64>,

    /// Strictly decreasing δ ladder, comma separated (with --weight)
    #[arg(long, value_delimiter = ',')]
    delta_ladder: Option<Vec<f64>>,

    /// Jump weight: unit | equator_height | inverse_norm
    #[arg(long)]
    weight: Option<String>,

    /// Evenly spaced control samples per control axis (default: Ω vertices + 0)
    #[arg(long)]
    controls: Option<usize>,

    /// Integration start points per box (default: center + 2·(grid axes))
    #[arg(long)]
    samples_per_box: Option<usize>,

    /// RK4 step size
    #[arg(long)]
    step: Option<f64>,

    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads for graph construction (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Hemisphere sign (+1 north / −1 south); selects the hemisphere domain
    /// for the hemisphere and strong-ladder pipelines
    #[arg(long, allow_hyphen_values = true)]
    hemisphere_sign: Option<i8>,

    /// Keep equator-touching boxes in hemisphere domains
    #[arg(long, default_value_t = false)]
    closed: bool,

    /// Seed for the low-discrepancy start-point offsets
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            diag("config", &e.to_string());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            let (kind, code) = classify(&e);
            diag(kind, &format!("{e:#}"));
            ExitCode::from(code)
        }
    }
}

fn diag(kind: &str, message: &str) {
    eprintln!("{}", json!({"error": kind, "message": message}));
}

fn classify(e: &anyhow::Error) -> (&'static str, u8) {
    if let Some(ee) = e.downcast_ref::<EngineError>() {
        return match ee {
            EngineError::Budget { .. } => ("budget", EXIT_BUDGET),
            EngineError::Depth { .. } | EngineError::Input(_) | EngineError::UnknownBox(_) => {
                ("config", EXIT_CONFIG)
            }
            EngineError::System(_) => ("internal", EXIT_INTERNAL),
        };
    }
    if e.downcast_ref::<SystemError>().is_some() {
        return ("config", EXIT_CONFIG);
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return ("io", EXIT_INTERNAL);
    }
    ("config", EXIT_CONFIG)
}

/// Fully resolved run configuration (echoed into manifest.json).
struct RunConfig {
    scenario_name: String,
    system: AffineSystem,
    window: Vec<(f64, f64)>,
    pipeline: String,
    depth: usize,
    t_chain: f64,
    jump: JumpKind,
    control_samples: Vec<Vec<f64>>,
    samples_per_box: usize,
    step: f64,
    out: PathBuf,
    threads: usize,
    hemisphere_sign: Option<i8>,
    closed: bool,
    seed: u64,
}

enum JumpKind {
    Constant(f64),
    Ladder { deltas: Vec<f64>, weight: Weight },
}

fn resolve(args: Args) -> Result<RunConfig> {
    let (scenario_name, base): (String, Option<Scenario>) = match (&args.scenario, &args.system_file)
    {
        (Some(name), None) => {
            let sc = scenarios::by_name(name)
                .ok_or_else(|| anyhow!("unknown scenario '{name}'"))?;
            (name.clone(), Some(sc))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow!("reading system file {}: {e}", path.display()))?;
            let system = AffineSystem::from_json_str(&text)?;
            (format!("file:{}", path.display()), Some(file_scenario(system)))
        }
        _ => return Err(anyhow!("exactly one of --scenario or --system-file is required")),
    };
    let sc = base.expect("scenario resolved");
    let weight = match &args.weight {
        Some(w) => Weight::parse(w).ok_or_else(|| anyhow!("unknown weight '{w}'"))?,
        None => sc.weight,
    };
    let jump = if let Some(deltas) = args.delta_ladder.clone() {
        JumpKind::Ladder { deltas, weight }
    } else if args.pipeline == "strong-ladder" {
        JumpKind::Ladder { deltas: sc.ladder.clone(), weight }
    } else {
        JumpKind::Constant(args.eps.unwrap_or(sc.eps))
    };
    let control_samples = match args.controls {
        None => sc.system.omega().default_samples(),
        Some(k) => {
            if k < 2 {
                return Err(anyhow!("--controls must be at least 2"));
            }
            grid_controls(&sc.system, k)
        }
    };
    let depth = args.depth.unwrap_or(sc.depth);
    let samples_per_box = args
        .samples_per_box
        .unwrap_or(1 + 2 * grid_axes_for(&sc));
    Ok(RunConfig {
        scenario_name,
        window: sc.window.clone(),
        t_chain: args.t_chain.unwrap_or(sc.t_chain),
        step: args.step.unwrap_or(sc.step),
        system: sc.system,
        pipeline: args.pipeline,
        depth,
        jump,
        control_samples,
        samples_per_box,
        out: args.out,
        threads: args.threads,
        hemisphere_sign: args.hemisphere_sign,
        closed: args.closed,
        seed: args.seed,
    })
}

/// System files come without recommendations: supply documented defaults
/// (window [−5,5]ⁿ, depth 6, T = 1, ε = 0.1, unit-weight ladder).
fn file_scenario(system: AffineSystem) -> Scenario {
    let n = system.n();
    Scenario {
        name: "file",
        window: vec![(-5.0, 5.0); n],
        depth: 6,
        t_chain: 1.0,
        eps: 0.1,
        ladder: vec![0.3, 0.1, 0.05],
        weight: Weight::Unit,
        step: 1e-3,
        system,
    }
}

fn grid_axes_for(sc: &Scenario) -> usize {
    // Euclidean windows have n grid axes; cube-sphere faces of 𝕊ⁿ do too.
    sc.system.n()
}

/// k evenly spaced values per control axis, Cartesian product, sorted.
fn grid_controls(sys: &AffineSystem, k: usize) -> Vec<Vec<f64>> {
    let omega = sys.omega();
    let m = omega.dim();
    if m == 0 {
        return vec![vec![]];
    }
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..k)
                .map(|j| {
                    omega.lower()[i]
                        + (omega.upper()[i] - omega.lower()[i]) * j as f64 / (k - 1) as f64
                })
                .collect()
        })
        .collect();
    let mut out = vec![vec![]];
    for ax in axes {
        let mut next = Vec::new();
        for base in &out {
            for &v in &ax {
                let mut b: Vec<f64> = base.clone();
                b.push(v);
                next.push(b);
            }
        }
        out = next;
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn run(args: Args) -> Result<ExitCode> {
    let started = Instant::now();
    let cfg = resolve(args)?;
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;

    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .ok(); // a second configuration attempt in-process is harmless
    }

    let mut report = json!({ "pipeline": cfg.pipeline });
    let mut summary = String::new();
    let mut exit = ExitCode::SUCCESS;

    match cfg.pipeline.as_str() {
        "euclidean" => {
            let domain = DomainSpec::euclidean(&cfg.window);
            let covering = build_covering(domain, cfg.depth)?;
            let flow = euclidean_flow(&cfg.system, cfg.t_chain, cfg.step);
            let graph = build_transition_graph(
                &covering,
                &flow,
                cfg.t_chain,
                &cfg.control_samples,
                &constant_jump(&cfg)?,
                cfg.samples_per_box,
                cfg.seed,
            )?;
            let sets = chain_control_sets(&graph);
            exit = finish_graph_run(&cfg, &graph, &sets, &mut report, &mut summary)?;
        }
        "sphere" | "hemisphere" | "projective" => {
            let n = cfg.system.n();
            let ext = cfg.system.extend();
            let flow = sphere_flow(&ext, cfg.t_chain, cfg.step);
            let jump = constant_jump(&cfg)?;
            let (graph, mut sets) = match cfg.pipeline.as_str() {
                "hemisphere" => {
                    let domain = DomainSpec::Hemisphere {
                        dim: n,
                        sign: cfg.hemisphere_sign.unwrap_or(1),
                        closed: cfg.closed,
                    };
                    let covering = build_covering(domain, cfg.depth)?;
                    let g = build_transition_graph(
                        &covering,
                        &flow,
                        cfg.t_chain,
                        &cfg.control_samples,
                        &jump,
                        cfg.samples_per_box,
                        cfg.seed,
                    )?;
                    let s = chain_control_sets(&g);
                    (g, s)
                }
                _ => {
                    let covering = build_covering(DomainSpec::Sphere { dim: n }, cfg.depth)?;
                    let g = build_transition_graph(
                        &covering,
                        &flow,
                        cfg.t_chain,
                        &cfg.control_samples,
                        &jump,
                        cfg.samples_per_box,
                        cfg.seed,
                    )?;
                    if cfg.pipeline == "projective" {
                        let q = projective_quotient(&g)?;
                        let s = chain_control_sets(&q);
                        (q, s)
                    } else {
                        let s = chain_control_sets(&g);
                        (g, s)
                    }
                }
            };
            if cfg.pipeline == "sphere" {
                for i in 0..sets.len() {
                    if let Ok(c) = antipodal_classification(&graph, &sets, i) {
                        sets[i].antipodal_class = c;
                    }
                }
            }
            if cfg.pipeline == "projective" {
                let central: Vec<usize> = sets
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| !set_in_equator(&graph, s))
                    .map(|(i, _)| i)
                    .collect();
                report["central_scc_count"] = json!(central.len());
                report["central_sets"] = json!(central);
            }
            exit = finish_graph_run(&cfg, &graph, &sets, &mut report, &mut summary)?;
        }
        "strong-ladder" => {
            let (deltas, weight) = match &cfg.jump {
                JumpKind::Ladder { deltas, weight } => (deltas.clone(), *weight),
                JumpKind::Constant(_) => {
                    return Err(anyhow!("strong-ladder needs --delta-ladder (and --weight)"))
                }
            };
            let n = cfg.system.n();
            let (covering, outcome) = if let Some(sign) = cfg.hemisphere_sign {
                let covering = build_covering(
                    DomainSpec::Hemisphere {
                        dim: n,
                        sign,
                        closed: cfg.closed,
                    },
                    cfg.depth,
                )?;
                let ext = cfg.system.extend();
                let flow = sphere_flow(&ext, cfg.t_chain, cfg.step);
                let o = strong_chain_ladder(
                    &covering,
                    &flow,
                    cfg.t_chain,
                    weight,
                    &deltas,
                    &cfg.control_samples,
                    cfg.samples_per_box,
                    cfg.seed,
                )?;
                (covering, o)
            } else {
                let covering = build_covering(DomainSpec::euclidean(&cfg.window), cfg.depth)?;
                let flow = euclidean_flow(&cfg.system, cfg.t_chain, cfg.step);
                let o = strong_chain_ladder(
                    &covering,
                    &flow,
                    cfg.t_chain,
                    weight,
                    &deltas,
                    &cfg.control_samples,
                    cfg.samples_per_box,
                    cfg.seed,
                )?;
                (covering, o)
            };
            report["delta_ladder"] = json!(deltas);
            report["weight"] = json!(weight.name());
            report["survivor_count"] = json!(outcome.survivors.len());
            report["died_count"] = json!(outcome.died.len());
            report["per_level_component_counts"] = json!(outcome.per_level_counts);
            let csv_text = export::chain_sets_csv(&covering, &outcome.survivors);
            std::fs::write(cfg.out.join("chain_sets.csv"), csv_text)?;
            for (i, s) in outcome.survivors.iter().enumerate() {
                std::fs::write(
                    cfg.out.join(format!("chain_set_{i}.txt")),
                    export::plot_points(&covering, s),
                )?;
            }
            summary.push_str(&format!(
                "strong-ladder: {} survivor(s), {} non-strong component(s) died\n",
                outcome.survivors.len(),
                outcome.died.len()
            ));
        }
        "monodromy" => {
            let u = ControlSignal::constant(
                vec![0.0; cfg.system.m()],
                cfg.system.omega(),
            )?;
            let rep = monodromy(&cfg.system, &u, cfg.t_chain)?;
            let chk = check_unbounded_strong_set(
                &cfg.system,
                &u,
                cfg.t_chain,
                &DVector::zeros(cfg.system.n()),
            )?;
            report["eigenvalues"] = json!(rep
                .eigenvalues
                .iter()
                .map(|l| [l.re, l.im])
                .collect::<Vec<_>>());
            report["has_unit_eigenvalue"] = json!(rep.has_unit_eigenvalue);
            report["matrix_row_major"] = json!(rep
                .matrix
                .row_iter()
                .flat_map(|r| r.iter().copied().collect::<Vec<_>>())
                .collect::<Vec<_>>());
            report["origin_is_periodic"] = json!(chk.is_periodic_orbit);
            report["unbounded_flag"] = json!(chk.unbounded_flag);
            report["unbounded_direction"] =
                json!(chk.direction.map(|d| d.iter().copied().collect::<Vec<f64>>()));
            summary.push_str(&format!(
                "monodromy over τ = {}: unit eigenvalue = {}, unbounded flag at origin = {}\n",
                cfg.t_chain, rep.has_unit_eigenvalue, chk.unbounded_flag
            ));
        }
        "conjugacy" => {
            let samples = 100usize;
            let mut rng = cfg.seed.wrapping_add(0x9E3779B97F4A7C15);
            let mut next = move || {
                // xorshift64*
                rng ^= rng >> 12;
                rng ^= rng << 25;
                rng ^= rng >> 27;
                (rng.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
            };
            let omega = cfg.system.omega().clone();
            let mut max_res = 0.0f64;
            for _ in 0..samples {
                let x = DVector::from_iterator(
                    cfg.system.n(),
                    cfg.window.iter().map(|(lo, hi)| lo + (hi - lo) * next()),
                );
                let uv: Vec<f64> = (0..omega.dim())
                    .map(|i| omega.lower()[i] + (omega.upper()[i] - omega.lower()[i]) * next())
                    .collect();
                let t = cfg.t_chain * next();
                let u = ControlSignal::constant(uv, &omega)?;
                let r = conjugacy_residual(&cfg.system, &x, &u, t, cfg.step)
                    .map_err(|e| anyhow!("conjugacy check failed: {e}"))?;
                max_res = max_res.max(r);
            }
            report["samples"] = json!(samples);
            report["max_residual"] = json!(max_res);
            summary.push_str(&format!(
                "conjugacy: max residual over {samples} random trajectories = {max_res:.3e}\n"
            ));
        }
        other => return Err(anyhow!("unknown pipeline '{other}'")),
    }

    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": cfg.scenario_name,
        "system": serde_json::from_str::<serde_json::Value>(&cfg.system.to_json_string())?,
        "pipeline": cfg.pipeline,
        "window": cfg.window.iter().map(|w| [w.0, w.1]).collect::<Vec<_>>(),
        "depth": cfg.depth,
        "T": cfg.t_chain,
        "jump": match &cfg.jump {
            JumpKind::Constant(e) => json!({"kind": "constant", "eps": e}),
            JumpKind::Ladder { deltas, weight } =>
                json!({"kind": "ladder", "deltas": deltas, "weight": weight.name()}),
        },
        "control_samples": cfg.control_samples,
        "samples_per_box": cfg.samples_per_box,
        "step": cfg.step,
        "threads": cfg.threads,
        "hemisphere_sign": cfg.hemisphere_sign,
        "closed": cfg.closed,
        "seed": cfg.seed,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    std::fs::write(
        cfg.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    std::fs::write(
        cfg.out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    summary.push_str("note: all computed sets are sampled approximations\n");
    std::fs::write(cfg.out.join("summary.txt"), summary)?;
    Ok(exit)
}

fn constant_jump(cfg: &RunConfig) -> Result<JumpSpec> {
    match &cfg.jump {
        JumpKind::Constant(e) => Ok(JumpSpec::Constant(*e)),
        JumpKind::Ladder { .. } => Err(anyhow!(
            "pipeline '{}' takes a constant --eps, not a ladder",
            cfg.pipeline
        )),
    }
}

fn set_in_equator(graph: &TransitionGraph, set: &ChainSetResult) -> bool {
    set.boxes.iter().all(|&b| graph.covering.touches_equator(b))
}

fn finish_graph_run(
    cfg: &RunConfig,
    graph: &TransitionGraph,
    sets: &[ChainSetResult],
    report: &mut serde_json::Value,
    summary: &mut String,
) -> Result<ExitCode> {
    let n_edges: usize = graph.edges.iter().map(|e| e.len()).sum();
    report["n_boxes"] = json!(graph.n_boxes());
    report["n_edges"] = json!(n_edges);
    report["sink_fraction"] = json!(graph.sink_fraction());
    report["chain_set_count"] = json!(sets.len());
    report["sets"] = json!(sets
        .iter()
        .enumerate()
        .map(|(i, s)| json!({
            "id": i,
            "size": s.boxes.len(),
            "touches_equator": s.touches_equator,
            "hemisphere_sign": s.hemisphere_sign,
            "antipodal_class": match &s.antipodal_class {
                AntipodalClass::One => json!("one"),
                AntipodalClass::Two { partner } => json!({"two": partner}),
                AntipodalClass::NotApplicable => json!("n/a"),
            },
        }))
        .collect::<Vec<_>>());
    std::fs::write(
        cfg.out.join("graph.json"),
        serde_json::to_string(&export::graph_json(graph))?,
    )?;
    std::fs::write(
        cfg.out.join("chain_sets.csv"),
        export::chain_sets_csv(&graph.covering, sets),
    )?;
    for (i, s) in sets.iter().enumerate() {
        std::fs::write(
            cfg.out.join(format!("chain_set_{i}.txt")),
            export::plot_points(&graph.covering, s),
        )?;
    }
    summary.push_str(&format!(
        "{}: {} boxes, {} edges, {} chain set(s), sink fraction {:.3}\n",
        cfg.pipeline,
        graph.n_boxes(),
        n_edges,
        sets.len(),
        graph.sink_fraction()
    ));
    if graph.sink_fraction() > 0.5 {
        diag(
            "divergence",
            &format!(
                "divergence-dominated run: {:.1}% of arrival events left the domain",
                100.0 * graph.sink_fraction()
            ),
        );
        return Ok(ExitCode::from(EXIT_DIVERGENCE));
    }
    Ok(ExitCode::SUCCESS)
}
