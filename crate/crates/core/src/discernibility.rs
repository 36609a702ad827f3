//! Fuzzy discernibility between differently-labelled providers.
//!
//! Each attribute contributes a degree in [0, 1] to how well it separates a
//! pair of providers. Degrees aggregate by bounded sum, and a pair counts as
//! discerned by an attribute subset once that sum reaches `1 - alpha`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{min_max_normalize, AttributeSpec, DecisionSystem, FuzzyDegree, Scale};

/// Absolute slack on threshold comparisons.
pub const SATISFACTION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductConfig {
    pub alpha: f64,
    /// Largest attribute count the branch-and-bound search accepts.
    pub max_attributes: usize,
}

impl Default for ReductConfig {
    fn default() -> Self {
        Self {
            alpha: 0.15,
            max_attributes: 24,
        }
    }
}

impl ReductConfig {
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::OutOfRange(format!("alpha out of [0,1]: {alpha}")));
        }
        Ok(Self {
            alpha,
            ..Self::default()
        })
    }

    pub fn threshold(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// Discernibility degree of one attribute for one pair.
///
/// Numeric attributes take normalized inputs and yield their absolute
/// difference. Categorical attributes take raw levels and yield crisp 0/1.
pub fn pair_discernibility(spec: &AttributeSpec, x: f64, y: f64) -> FuzzyDegree {
    match spec.scale {
        Scale::Numeric => FuzzyDegree::saturating((x - y).abs()),
        Scale::Categorical { .. } => {
            if x == y {
                FuzzyDegree::ZERO
            } else {
                FuzzyDegree::ONE
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyClause {
    pub pair: (String, String),
    pub degrees: BTreeMap<String, FuzzyDegree>,
}

impl FuzzyClause {
    pub fn degree(&self, attribute: &str) -> f64 {
        self.degrees.get(attribute).map_or(0.0, |d| d.value())
    }

    pub fn total(&self) -> f64 {
        self.degrees.values().map(|d| d.value()).sum()
    }
}

/// Bounded-sum satisfaction: `min(1, sum of degrees over subset) >= threshold`.
pub fn subset_satisfies(clause: &FuzzyClause, subset: &BTreeSet<String>, threshold: f64) -> bool {
    let sum: f64 = subset.iter().map(|a| clause.degree(a)).sum();
    sum.min(1.0) >= threshold - SATISFACTION_EPS
}

/// Kept clauses for every differently-labelled pair at one precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseSet {
    pub attributes: Vec<String>,
    pub clauses: Vec<FuzzyClause>,
    pub threshold: f64,
    /// Differently-labelled pairs examined before filtering.
    pub pairs_considered: usize,
}

impl ClauseSet {
    /// Builds a clause set directly from per-pair degree rows aligned with `attributes`.
    pub fn from_degrees(attributes: Vec<String>, rows: Vec<Vec<f64>>, alpha: f64) -> Self {
        let threshold = 1.0 - alpha;
        let pairs_considered = rows.len();
        let clauses = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| FuzzyClause {
                pair: (format!("x{i}"), format!("y{i}")),
                degrees: attributes
                    .iter()
                    .cloned()
                    .zip(row.into_iter().map(FuzzyDegree::saturating))
                    .collect(),
            })
            .filter(|c| c.total().min(1.0) >= threshold - SATISFACTION_EPS)
            .collect();
        Self {
            attributes,
            clauses,
            threshold,
            pairs_considered,
        }
    }

    /// No kept clauses, or a zero threshold that every subset meets.
    pub fn is_degenerate(&self) -> bool {
        self.clauses.is_empty() || self.threshold <= SATISFACTION_EPS
    }

    /// Degree rows aligned with `attributes`.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        self.clauses
            .iter()
            .map(|c| self.attributes.iter().map(|a| c.degree(a)).collect())
            .collect()
    }
}

/// One clause per differently-labelled pair, kept when the full attribute set
/// reaches the threshold.
pub fn build_clause_set(ds: &DecisionSystem, config: &ReductConfig) -> ClauseSet {
    let is = &ds.base;
    let raw = is.matrix();
    let norm = min_max_normalize(is).rows;
    let labels = ds.label_vec();
    let threshold = config.threshold();
    let n = is.providers.len();

    let per_row: Vec<(usize, Vec<FuzzyClause>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut considered = 0;
            let mut kept = Vec::new();
            for j in (i + 1)..n {
                if labels[i] == labels[j] {
                    continue;
                }
                considered += 1;
                let degrees: BTreeMap<String, FuzzyDegree> = is
                    .schema
                    .iter()
                    .enumerate()
                    .map(|(a, spec)| {
                        let d = match spec.scale {
                            Scale::Numeric => pair_discernibility(spec, norm[i][a], norm[j][a]),
                            Scale::Categorical { .. } => pair_discernibility(spec, raw[i][a], raw[j][a]),
                        };
                        (spec.name.clone(), d)
                    })
                    .collect();
                let clause = FuzzyClause {
                    pair: (is.providers[i].id.clone(), is.providers[j].id.clone()),
                    degrees,
                };
                if clause.total().min(1.0) >= threshold - SATISFACTION_EPS {
                    kept.push(clause);
                }
            }
            (considered, kept)
        })
        .collect();

    let pairs_considered = per_row.iter().map(|(c, _)| c).sum();
    let clauses = per_row.into_iter().flat_map(|(_, k)| k).collect();
    ClauseSet {
        attributes: is.attribute_names(),
        clauses,
        threshold,
        pairs_considered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casestudy;
    use crate::model::{Category, Direction, InformationSystem, Kind, ProviderProfile};

    fn num() -> AttributeSpec {
        AttributeSpec::numeric("a", Category::Performance, "", Kind::Dynamic, Direction::HigherBetter)
    }

    fn clause(pairs: &[(&str, f64)]) -> FuzzyClause {
        FuzzyClause {
            pair: ("x".into(), "y".into()),
            degrees: pairs.iter().map(|(a, d)| (a.to_string(), FuzzyDegree::new(*d).unwrap())).collect(),
        }
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn numeric_degree_is_absolute_difference() {
        assert!((pair_discernibility(&num(), 0.2, 0.7).value() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn categorical_degree_is_crisp() {
        let spec = AttributeSpec::levels("s", Category::Security, Kind::Static);
        assert_eq!(pair_discernibility(&spec, 8.0, 8.0).value(), 0.0);
        assert_eq!(pair_discernibility(&spec, 8.0, 2.0).value(), 1.0);
    }

    #[test]
    fn bounded_sum_satisfaction() {
        let c = clause(&[("a", 0.9), ("b", 0.2)]);
        assert!(subset_satisfies(&c, &set(&["a"]), 0.85));
        let c = clause(&[("a", 0.6), ("b", 0.5)]);
        assert!(!subset_satisfies(&c, &set(&["a"]), 0.85));
        assert!(subset_satisfies(&c, &set(&["a", "b"]), 0.85));
        assert!(subset_satisfies(&c, &set(&[]), 0.0));
    }

    fn tiny_ds(labels: [u32; 3]) -> DecisionSystem {
        let spec = num();
        let providers = [0.0, 0.5, 1.0]
            .iter()
            .enumerate()
            .map(|(i, v)| ProviderProfile {
                id: format!("p{}", i + 1),
                display_name: format!("P{}", i + 1),
                values: [("a".to_string(), *v)].into_iter().collect(),
            })
            .collect();
        let is = InformationSystem {
            schema: vec![spec],
            providers,
        };
        let labels = is.providers.iter().map(|p| p.id.clone()).zip(labels).collect();
        DecisionSystem::new(is, labels).unwrap()
    }

    #[test]
    fn same_label_pairs_produce_no_clause() {
        let cs = build_clause_set(&tiny_ds([1, 1, 2]), &ReductConfig::with_alpha(1.0).unwrap());
        let pairs: Vec<_> = cs.clauses.iter().map(|c| c.pair.clone()).collect();
        assert_eq!(pairs, vec![("p1".into(), "p3".into()), ("p2".into(), "p3".into())]);
        assert_eq!(cs.pairs_considered, 2);
    }

    #[test]
    fn alpha_one_is_degenerate() {
        let cs = build_clause_set(&casestudy::decision_system(), &ReductConfig::with_alpha(1.0).unwrap());
        assert_eq!(cs.threshold, 0.0);
        assert!(cs.is_degenerate());
    }

    #[test]
    fn weak_pair_is_dropped() {
        let cs = ClauseSet::from_degrees(vec!["a".into(), "b".into()], vec![vec![0.3, 0.4]], 0.15);
        assert!(cs.clauses.is_empty());
        assert_eq!(cs.pairs_considered, 1);
    }

    #[test]
    fn every_kept_clause_is_satisfiable_by_all_attributes() {
        let cs = build_clause_set(&casestudy::decision_system(), &ReductConfig::default());
        let all: BTreeSet<String> = cs.attributes.iter().cloned().collect();
        assert!(!cs.clauses.is_empty());
        assert!(cs.clauses.iter().all(|c| subset_satisfies(c, &all, cs.threshold)));
        assert!(cs.clauses.iter().all(|c| c.degrees.len() == 17));
    }

    #[test]
    fn alpha_out_of_range() {
        assert!(ReductConfig::with_alpha(1.5).is_err());
        assert!(ReductConfig::with_alpha(-0.1).is_err());
    }
}
