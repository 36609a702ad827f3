//! All-reducts enumeration over a fuzzy clause set, best-reduct selection and
//! projection to the reduced decision system.
//!
//! A reduct is a minimal attribute subset that satisfies every kept clause.
//! [`enumerate_all_reducts`] finds them by branch and bound;
//! [`brute_force_reducts_oracle`] checks every subset and exists to verify it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::discernibility::{build_clause_set, ClauseSet, ReductConfig, SATISFACTION_EPS};
use crate::error::{Error, Result};
use crate::model::{AttributeSpec, DecisionSystem, DefinitionDocument, Kind};

/// Attribute limit for the exhaustive oracle.
pub const ORACLE_MAX_ATTRIBUTES: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Reduct {
    pub attributes: BTreeSet<String>,
}

impl Reduct {
    pub fn new(attributes: BTreeSet<String>) -> Self {
        Self { attributes }
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.attributes.contains(name)
    }
}

type Mask = u32;

fn mask_satisfies(degrees: &[f64], mask: Mask, threshold: f64) -> bool {
    let mut sum = 0.0;
    for (a, d) in degrees.iter().enumerate() {
        if mask >> a & 1 == 1 {
            sum += d;
        }
    }
    sum.min(1.0) >= threshold - SATISFACTION_EPS
}

fn mask_to_reduct(mask: Mask, attributes: &[String]) -> Reduct {
    Reduct::new(
        attributes
            .iter()
            .enumerate()
            .filter(|(a, _)| mask >> a & 1 == 1)
            .map(|(_, n)| n.clone())
            .collect(),
    )
}

fn full_set(cs: &ClauseSet) -> Vec<Reduct> {
    vec![Reduct::new(cs.attributes.iter().cloned().collect())]
}

struct Search<'a> {
    clauses: Vec<Vec<f64>>,
    threshold: f64,
    width: usize,
    found: Vec<Mask>,
    attributes: &'a [String],
}

impl Search<'_> {
    fn satisfies_all(&self, mask: Mask) -> bool {
        self.clauses.iter().all(|c| mask_satisfies(c, mask, self.threshold))
    }

    fn is_minimal(&self, mask: Mask) -> bool {
        (0..self.width)
            .filter(|a| mask >> a & 1 == 1)
            .all(|a| !self.satisfies_all(mask & !(1 << a)))
    }

    fn visit(&mut self, chosen: Mask, excluded: Mask) {
        if self.found.iter().any(|&r| r & !chosen == 0) {
            return;
        }
        let allowed = !excluded & ((1u64 << self.width) - 1) as Mask;
        let mut open = None;
        for (i, c) in self.clauses.iter().enumerate() {
            if mask_satisfies(c, chosen, self.threshold) {
                continue;
            }
            if !mask_satisfies(c, allowed, self.threshold) {
                return;
            }
            if open.is_none() {
                open = Some(i);
            }
        }
        let Some(open) = open else {
            if self.is_minimal(chosen) {
                self.found.push(chosen);
            }
            return;
        };

        let clause = &self.clauses[open];
        let mut candidates: Vec<usize> = (0..self.width)
            .filter(|&a| allowed >> a & 1 == 1 && chosen >> a & 1 == 0 && clause[a] > 0.0)
            .collect();
        candidates.sort_by(|&a, &b| clause[b].total_cmp(&clause[a]).then(a.cmp(&b)));

        let mut skip: Mask = 0;
        for a in candidates {
            self.visit(chosen | 1 << a, excluded | skip);
            skip |= 1 << a;
        }
    }
}

/// Drops clauses implied by another clause: if `x <= y` pointwise then any
/// subset meeting the threshold on `x` also meets it on `y`.
fn prune_dominated(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    rows.sort_by(|a, b| {
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        sa.total_cmp(&sb).then_with(|| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let implied = kept.iter().any(|k| k.iter().zip(&row).all(|(x, y)| x <= y));
        if !implied {
            kept.push(row);
        }
    }
    kept
}

/// Every minimal attribute subset satisfying all kept clauses.
///
/// Falls back to the single full attribute set when no clause is kept or the
/// threshold is zero. Results are sorted.
pub fn enumerate_all_reducts(cs: &ClauseSet) -> Result<Vec<Reduct>> {
    enumerate_all_reducts_with_limit(cs, ReductConfig::default().max_attributes)
}

pub fn enumerate_all_reducts_with_limit(cs: &ClauseSet, max_attributes: usize) -> Result<Vec<Reduct>> {
    let width = cs.attributes.len();
    let limit = max_attributes.min(Mask::BITS as usize - 1);
    if width > limit {
        return Err(Error::TooManyAttributes { count: width, limit });
    }
    if cs.is_degenerate() {
        return Ok(full_set(cs));
    }

    let mut clauses = prune_dominated(cs.dense());
    // Tightest clauses first: they constrain the search earliest.
    clauses.sort_by(|a, b| {
        let ma = a.iter().sum::<f64>().min(1.0) - cs.threshold;
        let mb = b.iter().sum::<f64>().min(1.0) - cs.threshold;
        ma.total_cmp(&mb)
    });

    let mut search = Search {
        clauses,
        threshold: cs.threshold,
        width,
        found: Vec::new(),
        attributes: &cs.attributes,
    };
    search.visit(0, 0);

    let mut out: Vec<Reduct> = search
        .found
        .iter()
        .map(|&m| mask_to_reduct(m, search.attributes))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    out.sort();
    Ok(out)
}

/// Exhaustive reference: test all `2^m` subsets and keep the minimal satisfying ones.
pub fn brute_force_reducts_oracle(cs: &ClauseSet) -> Result<Vec<Reduct>> {
    let width = cs.attributes.len();
    if width > ORACLE_MAX_ATTRIBUTES {
        return Err(Error::TooManyAttributes {
            count: width,
            limit: ORACLE_MAX_ATTRIBUTES,
        });
    }
    if cs.is_degenerate() {
        return Ok(full_set(cs));
    }
    let rows = cs.dense();
    let total = 1usize << width;
    let sat: Vec<bool> = (0..total)
        .map(|m| rows.iter().all(|c| mask_satisfies(c, m as Mask, cs.threshold)))
        .collect();
    let mut out = Vec::new();
    for m in 0..total {
        if !sat[m] {
            continue;
        }
        // Walk every proper submask of m.
        let mut has_satisfying_proper_subset = false;
        if m != 0 {
            let mut s = (m - 1) & m;
            loop {
                if sat[s] {
                    has_satisfying_proper_subset = true;
                    break;
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & m;
            }
        }
        if !has_satisfying_proper_subset {
            out.push(mask_to_reduct(m as Mask, &cs.attributes));
        }
    }
    out.sort();
    Ok(out)
}

/// Selection statistics for one candidate reduct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductSummary {
    pub attributes: Vec<String>,
    pub overlap: usize,
    pub dynamic: usize,
    pub chosen: bool,
}

fn overlap_and_dynamic(reduct: &Reduct, requested: &BTreeSet<String>, kinds: &BTreeMap<&str, Kind>) -> (usize, usize) {
    let overlap = reduct.attributes.intersection(requested).count();
    let dynamic = reduct
        .attributes
        .iter()
        .filter(|a| kinds.get(a.as_str()) == Some(&Kind::Dynamic))
        .count();
    (overlap, dynamic)
}

/// Most requested attributes, then most dynamic attributes, then the
/// lexicographically smallest sorted name list.
pub fn select_best_reduct(reducts: &[Reduct], request: &DefinitionDocument, schema: &[AttributeSpec]) -> Result<Reduct> {
    let requested = request.requested_names();
    let kinds: BTreeMap<&str, Kind> = schema.iter().map(|a| (a.name.as_str(), a.kind)).collect();
    reducts
        .iter()
        .max_by(|a, b| {
            let (oa, da) = overlap_and_dynamic(a, &requested, &kinds);
            let (ob, db) = overlap_and_dynamic(b, &requested, &kinds);
            oa.cmp(&ob).then(da.cmp(&db)).then_with(|| b.cmp(a))
        })
        .cloned()
        .ok_or_else(|| Error::validation("no reducts to choose from"))
}

pub fn summarize_reducts(
    reducts: &[Reduct],
    chosen: &Reduct,
    request: &DefinitionDocument,
    schema: &[AttributeSpec],
) -> Vec<ReductSummary> {
    let requested = request.requested_names();
    let kinds: BTreeMap<&str, Kind> = schema.iter().map(|a| (a.name.as_str(), a.kind)).collect();
    reducts
        .iter()
        .map(|r| {
            let (overlap, dynamic) = overlap_and_dynamic(r, &requested, &kinds);
            ReductSummary {
                attributes: r.attributes.iter().cloned().collect(),
                overlap,
                dynamic,
                chosen: r == chosen,
            }
        })
        .collect()
}

/// Restricts the decision system to the reduct plus every network-layer attribute.
pub fn project_to_rds(ds: &DecisionSystem, reduct: &Reduct) -> Result<DecisionSystem> {
    for name in &reduct.attributes {
        if ds.base.attribute(name).is_none() {
            return Err(Error::SchemaMismatch(format!("reduct attribute `{name}` not in schema")));
        }
    }
    let mut keep = reduct.attributes.clone();
    keep.extend(ds.base.schema.iter().filter(|a| a.network_layer).map(|a| a.name.clone()));
    Ok(DecisionSystem {
        base: ds.base.project(&keep),
        labels: ds.labels.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub is_attributes: usize,
    pub rds_attributes: usize,
    pub percent: f64,
}

impl ReductionReport {
    pub fn new(is_attributes: usize, rds_attributes: usize) -> Self {
        let percent = if is_attributes == 0 {
            0.0
        } else {
            (1.0 - rds_attributes as f64 / is_attributes as f64) * 100.0
        };
        Self {
            is_attributes,
            rds_attributes,
            percent,
        }
    }
}

/// One row of a precision sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub reduct_count: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub min_dynamic: usize,
    pub min_static: usize,
    pub max_dynamic: usize,
    pub max_static: usize,
}

/// Evenly spaced precision values `step, 2*step, ..., 1.0`.
pub fn alpha_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::OutOfRange(format!("alpha step out of (0,1]: {step}")));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() < 1e-9 {
        let n = n as usize;
        return Ok((1..=n).map(|i| i as f64 / n as f64).collect());
    }
    let mut out = Vec::new();
    let mut i = 1.0;
    while i * step <= 1.0 + 1e-12 {
        out.push(i * step);
        i += 1.0;
    }
    Ok(out)
}

pub fn sweep_row(alpha: f64, reducts: &[Reduct], schema: &[AttributeSpec]) -> SweepRow {
    let kinds: BTreeMap<&str, Kind> = schema.iter().map(|a| (a.name.as_str(), a.kind)).collect();
    let dynamic = |r: &Reduct| r.attributes.iter().filter(|a| kinds.get(a.as_str()) == Some(&Kind::Dynamic)).count();
    let smallest = reducts.iter().min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let largest = reducts.iter().max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)));
    let (min_size, min_dynamic) = smallest.map_or((0, 0), |r| (r.len(), dynamic(r)));
    let (max_size, max_dynamic) = largest.map_or((0, 0), |r| (r.len(), dynamic(r)));
    SweepRow {
        alpha,
        reduct_count: reducts.len(),
        min_size,
        max_size,
        min_dynamic,
        min_static: min_size - min_dynamic,
        max_dynamic,
        max_static: max_size - max_dynamic,
    }
}

/// Enumerates reducts at each precision value.
pub fn sweep_alpha(ds: &DecisionSystem, alphas: &[f64]) -> Result<Vec<SweepRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let config = ReductConfig::with_alpha(alpha)?;
            let reducts = enumerate_all_reducts_with_limit(&build_clause_set(ds, &config), config.max_attributes)?;
            Ok(sweep_row(alpha, &reducts, &ds.base.schema))
        })
        .collect()
}
