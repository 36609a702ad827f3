//! Ranking-time benchmark: full attribute set against the reduced set.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::casestudy;
use crate::clustering::{attach_decision, kmeans, ClusterConfig};
use crate::discernibility::{build_clause_set, ReductConfig};
use crate::error::Result;
use crate::model::{min_max_normalize, DefinitionDocument, InformationSystem, ProviderProfile, QosRequest, Scale};
use crate::ranking::rank;
use crate::reduct::{enumerate_all_reducts_with_limit, project_to_rds, select_best_reduct, Reduct};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub alpha: f64,
    /// Timed repetitions per point.
    pub runs: usize,
    pub sweep_a_providers: usize,
    pub request_counts: Vec<usize>,
    pub sweep_b_requests: usize,
    pub provider_counts: Vec<usize>,
    /// Providers used to derive the reduct for each dataset.
    pub reduct_sample: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            alpha: 0.15,
            runs: 5,
            sweep_a_providers: 100,
            request_counts: vec![1, 10, 100, 500, 1000, 2500, 5000],
            sweep_b_requests: 100,
            provider_counts: vec![10, 50, 100, 500, 1000, 2500, 5000],
            reduct_sample: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Full,
    Reduced,
}

impl Pipeline {
    pub fn as_str(self) -> &'static str {
        match self {
            Pipeline::Full => "full",
            Pipeline::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub sweep: char,
    pub x: usize,
    pub pipeline: Pipeline,
    /// Mean wall time of one batch of requests, over the runs.
    pub mean_ms: f64,
    /// 95th percentile of single-request times across all runs.
    pub p95_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
}

impl BenchmarkReport {
    /// CSV with header `sweep,x,pipeline,mean_ms,p95_ms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep,x,pipeline,mean_ms,p95_ms\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6}\n",
                r.sweep,
                r.x,
                r.pipeline.as_str(),
                r.mean_ms,
                r.p95_ms
            ));
        }
        out
    }
}

/// Per-attribute (lo, hi) bounds taken from the case-study columns.
fn domains(is: &InformationSystem) -> Vec<(f64, f64)> {
    is.schema
        .iter()
        .map(|spec| match spec.scale {
            Scale::Categorical { lo, hi } => (lo as f64, hi as f64),
            Scale::Numeric => {
                let col = is.providers.iter().map(|p| p.values[&spec.name]);
                let lo = col.clone().fold(f64::INFINITY, f64::min);
                let hi = col.fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        })
        .collect()
}

fn draw(rng: &mut ChaCha8Rng, scale: &Scale, (lo, hi): (f64, f64)) -> f64 {
    match scale {
        Scale::Categorical { lo, hi } => rng.random_range(*lo..=*hi) as f64,
        Scale::Numeric if lo < hi => rng.random_range(lo..=hi),
        Scale::Numeric => lo,
    }
}

/// `n` providers over the case-study schema, each value uniform over the
/// attribute's case-study range.
pub fn synthetic_information_system(n: usize, seed: u64) -> InformationSystem {
    let base = casestudy::information_system();
    let bounds = domains(&base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let providers = (0..n)
        .map(|i| {
            let values: BTreeMap<String, f64> = base
                .schema
                .iter()
                .zip(&bounds)
                .map(|(spec, b)| (spec.name.clone(), draw(&mut rng, &spec.scale, *b)))
                .collect();
            ProviderProfile {
                id: format!("p{i:05}"),
                display_name: format!("Provider {i}"),
                values,
            }
        })
        .collect();
    InformationSystem {
        schema: base.schema,
        providers,
    }
}

/// Requests over the case-study attribute set and weights with random values.
pub fn synthetic_requests(count: usize, seed: u64) -> Vec<DefinitionDocument> {
    let base = casestudy::information_system();
    let bounds = domains(&base);
    let template = casestudy::request();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..count)
        .map(|i| DefinitionDocument {
            user_id: format!("user-{i}"),
            requests: template
                .requests
                .iter()
                .map(|q| {
                    let idx = base.attribute_index(&q.attribute).expect("template attribute in schema");
                    QosRequest {
                        attribute: q.attribute.clone(),
                        value: draw(&mut rng, &base.schema[idx].scale, bounds[idx]),
                        weight: q.weight,
                    }
                })
                .collect(),
        })
        .collect()
}

/// Reduct of the first `sample` providers, labelled by 3-means.
pub fn sample_reduct(is: &InformationSystem, request: &DefinitionDocument, sample: usize, alpha: f64, seed: u64) -> Result<Reduct> {
    let head = InformationSystem {
        schema: is.schema.clone(),
        providers: is.providers.iter().take(sample.max(2)).cloned().collect(),
    };
    let matrix = min_max_normalize(&head);
    let k = 3.min(head.providers.len());
    let assignment = kmeans(
        &matrix,
        &ClusterConfig {
            seed,
            ..ClusterConfig::with_k(k)
        },
    )?;
    let ds = attach_decision(&head, &assignment)?;
    let config = ReductConfig::with_alpha(alpha)?;
    let clauses = build_clause_set(&ds, &config);
    let reducts = enumerate_all_reducts_with_limit(&clauses, config.max_attributes)?;
    select_best_reduct(&reducts, request, &is.schema)
}

/// Full system and its reduct projection for one dataset size.
pub fn prepare_dataset(n: usize, config: &BenchConfig, probe: &DefinitionDocument) -> Result<(InformationSystem, InformationSystem)> {
    let full = synthetic_information_system(n, config.seed);
    let reduct = sample_reduct(&full, probe, config.reduct_sample, config.alpha, config.seed)?;
    let labels = full.providers.iter().map(|p| (p.id.clone(), 1)).collect();
    let ds = crate::model::DecisionSystem::new(full.clone(), labels)?;
    let reduced = project_to_rds(&ds, &reduct)?.base;
    Ok((full, reduced))
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Times ranking each request over `is`, `runs` times.
pub fn time_batch(is: &InformationSystem, requests: &[DefinitionDocument], runs: usize) -> Result<(f64, f64)> {
    let mut batch_ms = Vec::with_capacity(runs);
    let mut single_ms = Vec::with_capacity(runs * requests.len());
    for _ in 0..runs.max(1) {
        let start = Instant::now();
        for req in requests {
            let t = Instant::now();
            let ranking = rank(is, req)?;
            std::hint::black_box(&ranking);
            single_ms.push(t.elapsed().as_secs_f64() * 1e3);
        }
        batch_ms.push(start.elapsed().as_secs_f64() * 1e3);
    }
    single_ms.sort_by(f64::total_cmp);
    let mean = batch_ms.iter().sum::<f64>() / batch_ms.len() as f64;
    Ok((mean, percentile(&single_ms, 0.95)))
}

fn measure(rows: &mut Vec<BenchRow>, sweep: char, x: usize, full: &InformationSystem, reduced: &InformationSystem, requests: &[DefinitionDocument], runs: usize) -> Result<()> {
    for (pipeline, is) in [(Pipeline::Full, full), (Pipeline::Reduced, reduced)] {
        let (mean_ms, p95_ms) = time_batch(is, requests, runs)?;
        log::info!("sweep {sweep} x={x} {}: {mean_ms:.3} ms", pipeline.as_str());
        rows.push(BenchRow {
            sweep,
            x,
            pipeline,
            mean_ms,
            p95_ms,
        });
    }
    Ok(())
}

/// Sweep `a` varies the request count at a fixed provider count; sweep `b`
/// varies the provider count at a fixed request count. Reduct derivation is
/// done once per dataset and not timed.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchmarkReport> {
    let mut rows = Vec::new();
    let max_requests = config.request_counts.iter().copied().max().unwrap_or(0).max(config.sweep_b_requests);
    let requests = synthetic_requests(max_requests.max(1), config.seed);

    let (full, reduced) = prepare_dataset(config.sweep_a_providers, config, &requests[0])?;
    for &count in &config.request_counts {
        measure(&mut rows, 'a', count, &full, &reduced, &requests[..count], config.runs)?;
    }
    for &n in &config.provider_counts {
        let (full, reduced) = prepare_dataset(n, config, &requests[0])?;
        measure(&mut rows, 'b', n, &full, &reduced, &requests[..config.sweep_b_requests], config.runs)?;
    }
    Ok(BenchmarkReport { rows })
}
