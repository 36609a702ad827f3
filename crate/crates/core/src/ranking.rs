//! Two-level weighting and weighted-Euclidean ranking of providers.
//!
//! Requested attributes present in the reduced system share a 0.67 system
//! weight, the remaining attributes share 0.33, and each requested attribute
//! is further scaled by the user's weight. Providers are scored by their
//! distance to a target vector and sorted ascending.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DefinitionDocument, Direction, InformationSystem, Kind};

pub const REQUESTED_SHARE: f64 = 0.67;
pub const OTHER_SHARE: f64 = 0.33;
/// Absolute score difference treated as a tie.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub attribute: String,
    pub system_weight: f64,
    pub user_weight: Option<f64>,
    pub combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub entries: Vec<WeightEntry>,
}

impl WeightTable {
    pub fn get(&self, attribute: &str) -> Option<&WeightEntry> {
        self.entries.iter().find(|e| e.attribute == attribute)
    }

    /// Sum of system weights over (requested, other) attributes.
    pub fn group_sums(&self) -> (f64, f64) {
        self.entries.iter().fold((0.0, 0.0), |(r, o), e| {
            if e.user_weight.is_some() {
                (r + e.system_weight, o)
            } else {
                (r, o + e.system_weight)
            }
        })
    }
}

/// Assigns system and user weights to every attribute of the reduced system.
pub fn assign_weights(rds: &InformationSystem, request: &DefinitionDocument) -> Result<WeightTable> {
    if rds.schema.is_empty() {
        return Err(Error::EmptyRds);
    }
    let requested = rds.schema.iter().filter(|a| request.request(&a.name).is_some()).count();
    let others = rds.schema.len() - requested;
    let (requested_each, other_each) = match (requested, others) {
        (0, m) => (0.0, 1.0 / m as f64),
        (r, 0) => (1.0 / r as f64, 0.0),
        (r, m) => (REQUESTED_SHARE / r as f64, OTHER_SHARE / m as f64),
    };
    let entries = rds
        .schema
        .iter()
        .map(|a| match request.request(&a.name) {
            Some(req) => WeightEntry {
                attribute: a.name.clone(),
                system_weight: requested_each,
                user_weight: Some(req.weight),
                combined: requested_each * req.weight,
            },
            None => WeightEntry {
                attribute: a.name.clone(),
                system_weight: other_each,
                user_weight: None,
                combined: other_each,
            },
        })
        .collect();
    Ok(WeightTable { entries })
}

/// Weighted raw values and the target vector they are measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTable {
    pub attributes: Vec<String>,
    pub dynamic: Vec<bool>,
    pub provider_ids: Vec<String>,
    pub provider_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

/// Weights raw values and derives targets: requested attributes aim at the
/// weighted request value, other lower-better attributes at zero, other
/// higher-better attributes at the best weighted observation.
pub fn build_weighted_table(rds: &InformationSystem, weights: &WeightTable, request: &DefinitionDocument) -> Result<WeightedTable> {
    let mut combined = Vec::with_capacity(rds.schema.len());
    for a in &rds.schema {
        let w = weights
            .get(&a.name)
            .ok_or_else(|| Error::SchemaMismatch(format!("no weight for attribute `{}`", a.name)))?;
        combined.push(w.combined);
    }
    let rows: Vec<Vec<f64>> = rds
        .matrix()
        .into_iter()
        .map(|row| row.iter().zip(&combined).map(|(v, w)| v * w).collect())
        .collect();
    let targets = rds
        .schema
        .iter()
        .enumerate()
        .map(|(j, a)| match (request.request(&a.name), a.direction) {
            (Some(req), _) => req.value * combined[j],
            (None, Direction::LowerBetter) => 0.0,
            (None, Direction::HigherBetter) => rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    Ok(WeightedTable {
        attributes: rds.attribute_names(),
        dynamic: rds.schema.iter().map(|a| a.kind == Kind::Dynamic).collect(),
        provider_ids: rds.providers.iter().map(|p| p.id.clone()).collect(),
        provider_names: rds.providers.iter().map(|p| p.display_name.clone()).collect(),
        rows,
        targets,
    })
}

/// Weighted Euclidean distance from `row` to `targets`.
pub fn compute_score(row: &[f64], targets: &[f64]) -> f64 {
    row.iter().zip(targets).map(|(v, t)| (v - t) * (v - t)).sum::<f64>().sqrt()
}

fn dynamic_score(row: &[f64], targets: &[f64], dynamic: &[bool]) -> f64 {
    row.iter()
        .zip(targets)
        .zip(dynamic)
        .filter(|(_, &d)| d)
        .map(|((v, t), _)| (v - t) * (v - t))
        .sum::<f64>()
        .sqrt()
}

/// Squared per-attribute distance terms, one row per provider.
pub fn score_contributions(table: &WeightedTable) -> Vec<Vec<f64>> {
    table
        .rows
        .iter()
        .map(|r| r.iter().zip(&table.targets).map(|(v, t)| (v - t) * (v - t)).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    Score,
    DynamicScore,
    ProviderId,
}

impl TieBreak {
    pub fn as_str(self) -> &'static str {
        match self {
            TieBreak::Score => "score",
            TieBreak::DynamicScore => "dynamic_score",
            TieBreak::ProviderId => "provider_id",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub provider_id: String,
    pub name: String,
    pub score: f64,
    pub rank: usize,
    pub tiebreak_trail: Vec<TieBreak>,
}

/// Splits a slice sorted by `key` into runs whose neighbours differ by at most the tie tolerance.
fn tie_runs<T>(items: &[T], key: impl Fn(&T) -> f64) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=items.len() {
        if i == items.len() || (key(&items[i]) - key(&items[i - 1])).abs() > SCORE_TIE_TOLERANCE {
            runs.push(start..i);
            start = i;
        }
    }
    runs
}

/// Sorts providers by ascending score. Tied scores fall back to the score over
/// dynamic attributes only, then to provider id.
pub fn rank_providers(table: &WeightedTable) -> Vec<RankedEntry> {
    struct Scored {
        idx: usize,
        score: f64,
        dynamic: f64,
        trail: Vec<TieBreak>,
    }
    let mut scored: Vec<Scored> = table
        .rows
        .iter()
        .enumerate()
        .map(|(idx, row)| Scored {
            idx,
            score: compute_score(row, &table.targets),
            dynamic: dynamic_score(row, &table.targets, &table.dynamic),
            trail: vec![TieBreak::Score],
        })
        .collect();
    let id = |s: &Scored| table.provider_ids[s.idx].as_str();
    scored.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| id(a).cmp(id(b))));

    for run in tie_runs(&scored, |s| s.score) {
        if run.len() < 2 {
            continue;
        }
        let group = &mut scored[run];
        group.sort_by(|a, b| a.dynamic.total_cmp(&b.dynamic).then_with(|| id(a).cmp(id(b))));
        group.iter_mut().for_each(|s| s.trail.push(TieBreak::DynamicScore));
        for sub in tie_runs(group, |s| s.dynamic) {
            if sub.len() > 1 {
                group[sub].iter_mut().for_each(|s| s.trail.push(TieBreak::ProviderId));
            }
        }
    }

    scored
        .into_iter()
        .enumerate()
        .map(|(pos, s)| RankedEntry {
            provider_id: table.provider_ids[s.idx].clone(),
            name: table.provider_names[s.idx].clone(),
            score: s.score,
            rank: pos + 1,
            tiebreak_trail: s.trail,
        })
        .collect()
}

/// Everything produced by one ranking pass over a reduced system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub weights: WeightTable,
    pub table: WeightedTable,
    pub entries: Vec<RankedEntry>,
}

pub fn rank(rds: &InformationSystem, request: &DefinitionDocument) -> Result<Ranking> {
    let weights = assign_weights(rds, request)?;
    let table = build_weighted_table(rds, &weights, request)?;
    let entries = rank_providers(&table);
    Ok(Ranking { weights, table, entries })
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[derive(Serialize)]
struct EntryRecord<'a> {
    provider_id: &'a str,
    name: &'a str,
    score: f64,
    rank: usize,
    tiebreak_trail: Vec<&'static str>,
}

/// JSON array of ranked entries with scores rounded to six decimals.
pub fn ranked_list_json(entries: &[RankedEntry]) -> String {
    let records: Vec<EntryRecord> = entries
        .iter()
        .map(|e| EntryRecord {
            provider_id: &e.provider_id,
            name: &e.name,
            score: round6(e.score),
            rank: e.rank,
            tiebreak_trail: e.tiebreak_trail.iter().map(|t| t.as_str()).collect(),
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("ranked list serializes")
}

/// CSV with header `provider_id,name,score,rank,tiebreak_trail`; the trail is `|`-joined.
pub fn ranked_list_csv(entries: &[RankedEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["provider_id", "name", "score", "rank", "tiebreak_trail"])
        .expect("in-memory csv");
    for e in entries {
        let trail: Vec<&str> = e.tiebreak_trail.iter().map(|t| t.as_str()).collect();
        w.write_record([
            e.provider_id.as_str(),
            e.name.as_str(),
            &format!("{:.6}", e.score),
            &e.rank.to_string(),
            &trail.join("|"),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Fixed-width table with three-decimal scores.
pub fn ranked_list_table(entries: &[RankedEntry]) -> String {
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(4).max(8);
    let mut out = String::new();
    let _ = writeln!(out, "{:>4}  {:<width$}  {:>9}", "rank", "provider", "score");
    for e in entries {
        let _ = writeln!(out, "{:>4}  {:<width$}  {:>9.3}", e.rank, e.name, e.score);
    }
    out
}

/// Attribute names a request touches within a reduced system.
pub fn requested_in(rds: &InformationSystem, request: &DefinitionDocument) -> BTreeSet<String> {
    rds.schema
        .iter()
        .filter(|a| request.request(&a.name).is_some())
        .map(|a| a.name.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casestudy;
    use crate::model::{AttributeSpec, Category, ProviderProfile, QosRequest};
    use crate::reduct::project_to_rds;

    fn case_rds() -> InformationSystem {
        let r1 = casestudy::reference_reducts().remove(0);
        project_to_rds(&casestudy::decision_system(), &r1).unwrap().base
    }

    #[test]
    fn case_study_system_weights() {
        let w = assign_weights(&case_rds(), &casestudy::effective_request()).unwrap();
        let acc = w.get(casestudy::ACCOUNTABILITY).unwrap();
        assert!((acc.system_weight - 0.67 / 7.0).abs() < 1e-15);
        assert!((w.get(casestudy::LATENCY).unwrap().system_weight - 0.0825).abs() < 1e-15);
        let avail = w.get(casestudy::AVAILABILITY).unwrap();
        assert!((avail.combined - 0.067).abs() < 1e-12);
        let (r, o) = w.group_sums();
        assert!((r - 0.67).abs() < 1e-9 && (o - 0.33).abs() < 1e-9);
    }

    #[test]
    fn single_group_takes_everything() {
        let rds = case_rds();
        let requests = rds
            .schema
            .iter()
            .map(|a| QosRequest {
                attribute: a.name.clone(),
                value: 1.0,
                weight: 1.0,
            })
            .collect();
        let doc = DefinitionDocument {
            user_id: "u".into(),
            requests,
        };
        let w = assign_weights(&rds, &doc).unwrap();
        assert!(w.entries.iter().all(|e| (e.system_weight - 1.0 / 11.0).abs() < 1e-15));
    }

    #[test]
    fn empty_rds_is_an_error() {
        let rds = InformationSystem {
            schema: vec![],
            providers: vec![],
        };
        assert!(matches!(assign_weights(&rds, &casestudy::request()), Err(Error::EmptyRds)));
    }

    #[test]
    fn case_study_weighted_cells() {
        let rds = case_rds();
        let req = casestudy::effective_request();
        let w = assign_weights(&rds, &req).unwrap();
        let t = build_weighted_table(&rds, &w, &req).unwrap();
        let amazon = t.provider_ids.iter().position(|p| p == "amazon-ec2").unwrap();
        let col = |name: &str| t.attributes.iter().position(|a| a == name).unwrap();
        assert!((t.rows[amazon][col(casestudy::ACCOUNTABILITY)] - 0.861).abs() < 5e-4);
        assert!((t.rows[amazon][col(casestudy::RESPONSE_TIME)] - 4.290).abs() < 5e-4);
        assert!((t.targets[col(casestudy::THROUGHPUT)] - 24.99 * 0.0825).abs() < 1e-12);
        assert_eq!(t.targets[col(casestudy::LATENCY)], 0.0);
    }

    #[test]
    fn zero_distance_on_target() {
        assert_eq!(compute_score(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!((compute_score(&[3.0, 0.0], &[0.0, 4.0]) - 5.0).abs() < 1e-15);
    }

    fn table(rows: Vec<Vec<f64>>, targets: Vec<f64>, dynamic: Vec<bool>, ids: &[&str]) -> WeightedTable {
        WeightedTable {
            attributes: (0..targets.len()).map(|j| format!("a{j}")).collect(),
            dynamic,
            provider_ids: ids.iter().map(|s| s.to_string()).collect(),
            provider_names: ids.iter().map(|s| s.to_uppercase()).collect(),
            rows,
            targets,
        }
    }

    #[test]
    fn identical_rows_tie_on_id() {
        let t = table(vec![vec![1.0, 2.0], vec![1.0, 2.0]], vec![0.0, 0.0], vec![true, false], &["b", "a"]);
        let ranked = rank_providers(&t);
        assert_eq!(ranked[0].provider_id, "a");
        assert_eq!(ranked[1].provider_id, "b");
        for e in &ranked {
            assert_eq!(e.tiebreak_trail, vec![TieBreak::Score, TieBreak::DynamicScore, TieBreak::ProviderId]);
        }
    }

    #[test]
    fn dynamic_score_breaks_ties() {
        // Both rows sit at distance 5; the dynamic column favours `y`.
        let t = table(vec![vec![3.0, 4.0], vec![4.0, 3.0]], vec![0.0, 0.0], vec![true, false], &["x", "y"]);
        let ranked = rank_providers(&t);
        assert_eq!(ranked[0].provider_id, "x");
        assert_eq!(ranked[0].tiebreak_trail, vec![TieBreak::Score, TieBreak::DynamicScore]);
    }

    #[test]
    fn hand_computed_order() {
        // p: sqrt(1+1)=1.414, q: sqrt(0.25+4)=2.062, r: sqrt(0+0.81)=0.9
        let t = table(
            vec![vec![2.0, 1.0], vec![1.5, 2.0], vec![1.0, 0.9]],
            vec![1.0, 0.0],
            vec![false, false],
            &["p", "q", "r"],
        );
        let ranked = rank_providers(&t);
        let order: Vec<&str> = ranked.iter().map(|e| e.provider_id.as_str()).collect();
        assert_eq!(order, vec!["r", "p", "q"]);
        assert!((ranked[0].score - 0.9).abs() < 1e-12);
        assert!((ranked[1].score - 2f64.sqrt()).abs() < 1e-12);
        assert!((ranked[2].score - 4.25f64.sqrt()).abs() < 1e-12);
        assert_eq!(ranked.iter().map(|e| e.rank).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn csv_layout() {
        let t = table(vec![vec![1.0]], vec![0.0], vec![true], &["p"]);
        let csv = ranked_list_csv(&rank_providers(&t));
        assert_eq!(csv, "provider_id,name,score,rank,tiebreak_trail\np,P,1.000000,1,score\n");
    }

    #[test]
    fn higher_better_unrequested_target_is_best_observation() {
        let spec = AttributeSpec::numeric("tp", Category::NetworkLayerQos, "", Kind::Dynamic, Direction::HigherBetter);
        let providers = [("a", 2.0), ("b", 5.0)]
            .iter()
            .map(|(id, v)| ProviderProfile {
                id: id.to_string(),
                display_name: id.to_string(),
                values: [("tp".to_string(), *v)].into_iter().collect(),
            })
            .collect();
        let is = InformationSystem {
            schema: vec![spec],
            providers,
        };
        let doc = DefinitionDocument {
            user_id: "u".into(),
            requests: vec![],
        };
        let ranking = rank(&is, &doc).unwrap();
        assert_eq!(ranking.table.targets, vec![5.0]);
        assert_eq!(ranking.entries[0].provider_id, "b");
        assert!((ranking.entries[1].score - 3.0).abs() < 1e-12);
    }
}
