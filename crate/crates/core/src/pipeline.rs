//! End-to-end ranking pass: label, reduce, weight, rank.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{attach_decision, kmeans, ClusterConfig, KChoice};
use crate::discernibility::{build_clause_set, ReductConfig};
use crate::error::Result;
use crate::model::{min_max_normalize, DecisionSystem, DefinitionDocument, InformationSystem, WeightCheck};
use crate::ranking::{rank, Ranking};
use crate::reduct::{enumerate_all_reducts_with_limit, project_to_rds, select_best_reduct, Reduct, ReductionReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub reduct: ReductConfig,
    pub cluster: ClusterConfig,
    /// Decision labels to use instead of clustering.
    pub labels: Option<BTreeMap<String, u32>>,
    /// Skip enumeration and use this reduct.
    pub reduct_override: Option<Reduct>,
    /// When false, rank over every attribute.
    pub reduction: bool,
    pub weight_check: WeightCheck,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            reduct: ReductConfig::default(),
            cluster: ClusterConfig::default(),
            labels: None,
            reduct_override: None,
            reduction: true,
            weight_check: WeightCheck::PerCategory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub labels: BTreeMap<String, u32>,
    pub clause_count: usize,
    /// Every reduct found; empty when the reduct was supplied or reduction is off.
    pub reducts: Vec<Reduct>,
    pub chosen: Option<Reduct>,
    pub rds: InformationSystem,
    pub report: ReductionReport,
    pub ranking: Ranking,
}

/// Labels from the override, or k-means on the normalized system. Automatic k
/// needs at least four providers; smaller systems use k = 2.
pub fn decision_system(is: &InformationSystem, config: &PipelineConfig) -> Result<DecisionSystem> {
    if let Some(labels) = &config.labels {
        let mut own = BTreeMap::new();
        for p in &is.providers {
            let label = labels
                .get(&p.id)
                .ok_or_else(|| crate::Error::MissingLabel(p.id.clone()))?;
            own.insert(p.id.clone(), *label);
        }
        return DecisionSystem::new(is.clone(), own);
    }
    let matrix = min_max_normalize(is);
    let mut cluster = config.cluster.clone();
    if cluster.k == KChoice::Auto && matrix.n_rows() < 4 {
        cluster.k = KChoice::Fixed(2.min(matrix.n_rows()));
    }
    let assignment = kmeans(&matrix, &cluster)?;
    attach_decision(is, &assignment)
}

pub fn run_pipeline(is: &InformationSystem, request: &DefinitionDocument, config: &PipelineConfig) -> Result<PipelineOutcome> {
    request.validate_with(&is.schema, config.weight_check)?;
    let ds = decision_system(is, config)?;

    let mut clause_count = 0;
    let mut reducts = Vec::new();
    let (chosen, rds) = if !config.reduction {
        (None, ds.base.clone())
    } else {
        let chosen = match &config.reduct_override {
            Some(r) => r.clone(),
            None => {
                let clauses = build_clause_set(&ds, &config.reduct);
                clause_count = clauses.clauses.len();
                reducts = enumerate_all_reducts_with_limit(&clauses, config.reduct.max_attributes)?;
                select_best_reduct(&reducts, request, &is.schema)?
            }
        };
        let rds = project_to_rds(&ds, &chosen)?.base;
        (Some(chosen), rds)
    };

    let report = ReductionReport::new(is.schema.len(), rds.schema.len());
    let ranking = rank(&rds, request)?;
    Ok(PipelineOutcome {
        labels: ds.labels,
        clause_count,
        reducts,
        chosen,
        rds,
        report,
        ranking,
    })
}
