use conflict_min::dynamics::polarization_index;
use conflict_min::graph::load_edge_list;
use conflict_min::greedy::{
    baseline_pagerank, baseline_random, brute_force, evaluate_selection, greedy_ac, greedy_exact,
    pagerank_top_k, random_nodes,
};
use conflict_min::{Graph, Method, NodeIdMap, OpinionVector, SelectionResult};

use crate::config::{ExperimentConfig, OpinionSource};
use crate::error::CliError;
use crate::opinions::{generate_opinions, load_opinion_file, Normalization};
use crate::report::{dataset_name, relative_error, DatasetInfo, RunReport, SweepRow};

const ID_MAPPING: &str =
    "largest connected component; original ids renumbered 0..n in order of first appearance";

/// A loaded dataset together with the opinions drawn for it.
pub struct Instance {
    pub graph: Graph,
    pub ids: NodeIdMap,
    pub opinions: OpinionVector,
    pub dataset: DatasetInfo,
    pub opinion_scaling: String,
}

pub fn load_instance(config: &ExperimentConfig) -> Result<Instance, CliError> {
    if !config.graph.is_file() {
        return Err(CliError::Data(format!("{}: no such file", config.graph.display())));
    }
    let (graph, ids) = load_edge_list(&config.graph)?;
    let n = graph.node_count();
    let (opinions, opinion_scaling) = match &config.opinions {
        OpinionSource::Distribution {
            distribution,
            param,
            normalization,
        } => {
            let s = generate_opinions(n, *distribution, *param, *normalization, config.opinion_seed)?;
            let note = match normalization {
                Normalization::Max => format!("{distribution}: samples divided by their maximum"),
                Normalization::Clamp => format!("{distribution}: samples clamped to [0, 1]"),
            };
            (s, note)
        }
        OpinionSource::File { path } => (load_opinion_file(path, &ids)?, format!("read from {}", path.display())),
    };
    let dataset = DatasetInfo {
        path: config.graph.display().to_string(),
        n,
        m: graph.edge_count(),
        id_mapping: ID_MAPPING.to_string(),
    };
    Ok(Instance {
        graph,
        ids,
        opinions,
        dataset,
        opinion_scaling,
    })
}

fn check_budget(config: &ExperimentConfig, k: usize, n: usize) -> Result<(), CliError> {
    let allow_all = matches!(config.method, Method::Random | Method::PageRank | Method::BruteForce);
    if k > n || (!allow_all && k == n) {
        return Err(CliError::Usage(format!(
            "k = {k} is too large for the {n}-node largest component"
        )));
    }
    Ok(())
}

fn select(config: &ExperimentConfig, inst: &Instance, method: Method, k: usize) -> Result<SelectionResult, CliError> {
    let (g, s, kind) = (&inst.graph, &inst.opinions, config.measure);
    let opts = config.solve_options();
    Ok(match method {
        Method::Greedy => greedy_exact(g, s, kind, k, &opts)?,
        Method::GreedyAc => greedy_ac(g, s, kind, k, &config.sketch_options(), &opts)?,
        Method::Random => baseline_random(g, s, kind, k, config.seed, &opts)?,
        Method::PageRank => baseline_pagerank(g, s, kind, k, config.damping, &opts)?,
        Method::BruteForce => brute_force(g, s, kind, k, &opts)?,
    })
}

/// One experiment: select `k` nodes and report the exact drop of the
/// measure.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    let inst = load_instance(config)?;
    check_budget(config, config.k, inst.dataset.n)?;
    let result = select(config, &inst, config.method, config.k)?;
    Ok(report(config, &inst, result))
}

fn report(config: &ExperimentConfig, inst: &Instance, result: SelectionResult) -> RunReport {
    let n = inst.dataset.n;
    let delta_f = result.delta_f();
    let gamma = config.reference_delta.and_then(|r| relative_error(delta_f, r));
    RunReport {
        config: config.clone(),
        dataset: inst.dataset.clone(),
        opinion_scaling: inst.opinion_scaling.clone(),
        polarization_index: (
            polarization_index(result.f_initial, n),
            polarization_index(result.f_final, n),
        ),
        result,
        delta_f,
        gamma,
    }
}

/// Rows for every `k` in `1..=k_max` and every method.
///
/// Greedy, sketched greedy, random and PageRank selections for budget `k`
/// are prefixes of the selection for `k_max`, so each of them runs once and
/// its prefixes are evaluated exactly. Brute force runs per `k`. When both
/// greedy variants are requested, the sketched rows carry `Γ` against the
/// exact greedy drop at the same `k`.
pub fn sweep(config: &ExperimentConfig, methods: &[Method], k_max: usize) -> Result<Vec<SweepRow>, CliError> {
    let base = ExperimentConfig { k: k_max, ..config.clone() };
    base.validate()?;
    let inst = load_instance(&base)?;
    let (n, m) = (inst.dataset.n, inst.dataset.m);
    let opts = base.solve_options();
    let name = dataset_name(&inst.dataset.path);

    let mut per_method: Vec<(Method, Vec<(f64, f64)>)> = Vec::new();
    for &method in methods {
        check_budget(&ExperimentConfig { method, ..base.clone() }, k_max, n)?;
        let points = match method {
            Method::BruteForce => (1..=k_max)
                .map(|k| {
                    let r = select(&base, &inst, method, k)?;
                    Ok((r.delta_f(), r.elapsed_seconds))
                })
                .collect::<Result<Vec<_>, CliError>>()?,
            _ => {
                let full = match method {
                    Method::Random => {
                        let t = std::time::Instant::now();
                        let chosen = random_nodes(n, k_max, base.seed)?;
                        (chosen, vec![t.elapsed().as_secs_f64() / k_max as f64; k_max], 0.0)
                    }
                    Method::PageRank => {
                        let t = std::time::Instant::now();
                        let chosen = pagerank_top_k(&inst.graph, k_max, base.damping)?;
                        (chosen, vec![0.0; k_max], t.elapsed().as_secs_f64())
                    }
                    _ => {
                        let r = select(&base, &inst, method, k_max)?;
                        let setup = r.elapsed_seconds - r.round_seconds.iter().sum::<f64>();
                        (r.chosen, r.round_seconds, setup.max(0.0))
                    }
                };
                let (chosen, rounds, setup) = full;
                let eval = evaluate_selection(&inst.graph, &inst.opinions, base.measure, method, chosen, &opts)?;
                let mut drop = 0.0;
                let mut seconds = setup;
                eval.step_gains
                    .iter()
                    .zip(&rounds)
                    .map(|(g, t)| {
                        drop += g;
                        seconds += t;
                        (drop, seconds)
                    })
                    .collect()
            }
        };
        per_method.push((method, points));
    }

    let exact = per_method
        .iter()
        .find(|(m, _)| *m == Method::Greedy)
        .map(|(_, p)| p.clone());
    let mut rows = Vec::new();
    for (method, points) in &per_method {
        for (i, &(delta_f, seconds)) in points.iter().enumerate() {
            let gamma = match (method, &exact) {
                (Method::GreedyAc, Some(reference)) => relative_error(delta_f, reference[i].0),
                _ => None,
            };
            rows.push(SweepRow {
                dataset: name.clone(),
                n,
                m,
                method: method.to_string(),
                measure: base.measure.to_string(),
                k: i + 1,
                epsilon: base.epsilon,
                seed: base.seed,
                delta_f,
                gamma,
                seconds,
            });
        }
    }
    Ok(rows)
}
