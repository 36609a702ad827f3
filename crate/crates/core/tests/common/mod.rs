#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use csb_core::discernibility::{subset_satisfies, ClauseSet};
use csb_core::model::{
    AttributeSpec, Category, DecisionSystem, DefinitionDocument, Direction, InformationSystem, Kind, ProviderProfile,
    QosRequest, Scale,
};
use csb_core::reduct::Reduct;
use rand::seq::SliceRandom;
use rand::Rng;

const CATEGORIES: [Category; 4] = [Category::Agility, Category::Cost, Category::Performance, Category::Assurance];

/// A random schema of `m` attributes mixing numeric and level scales.
pub fn random_schema(rng: &mut impl Rng, m: usize) -> Vec<AttributeSpec> {
    (0..m)
        .map(|i| {
            let name = format!("a{i}");
            let category = CATEGORIES[rng.random_range(0..CATEGORIES.len())];
            let kind = if rng.random_bool(0.5) { Kind::Dynamic } else { Kind::Static };
            if rng.random_bool(0.3) {
                AttributeSpec::levels(&name, category, kind)
            } else {
                let direction = if rng.random_bool(0.5) {
                    Direction::LowerBetter
                } else {
                    Direction::HigherBetter
                };
                AttributeSpec::numeric(&name, category, "u", kind, direction)
            }
        })
        .collect()
}

pub fn random_value(rng: &mut impl Rng, spec: &AttributeSpec) -> f64 {
    match spec.scale {
        Scale::Categorical { lo, hi } => rng.random_range(lo..=hi) as f64,
        // A coarse grid makes ties and constant columns likely.
        Scale::Numeric => rng.random_range(0..=8) as f64 * 0.5,
    }
}

pub fn random_is(rng: &mut impl Rng, m: usize, n: usize) -> InformationSystem {
    let schema = random_schema(rng, m);
    let providers = (0..n)
        .map(|i| ProviderProfile {
            id: format!("p{i:02}"),
            display_name: format!("Provider {i}"),
            values: schema.iter().map(|a| (a.name.clone(), random_value(rng, a))).collect(),
        })
        .collect();
    InformationSystem { schema, providers }
}

pub fn random_ds(rng: &mut impl Rng, m: usize, n: usize, classes: u32) -> DecisionSystem {
    let is = random_is(rng, m, n);
    let labels = is
        .providers
        .iter()
        .map(|p| (p.id.clone(), rng.random_range(1..=classes)))
        .collect();
    DecisionSystem::new(is, labels).unwrap()
}

/// A request over a random non-empty subset of attributes whose weights sum
/// to one within each category.
pub fn random_request(rng: &mut impl Rng, is: &InformationSystem) -> DefinitionDocument {
    let mut names: Vec<&AttributeSpec> = is.schema.iter().collect();
    names.shuffle(rng);
    let take = rng.random_range(1..=names.len());
    let chosen = &names[..take];
    let mut by_category: BTreeMap<Category, Vec<&AttributeSpec>> = BTreeMap::new();
    for a in chosen {
        by_category.entry(a.category).or_default().push(a);
    }
    let mut requests = Vec::new();
    for specs in by_category.values() {
        let raw: Vec<f64> = specs.iter().map(|_| rng.random_range(1..=10) as f64).collect();
        let total: f64 = raw.iter().sum();
        let mut acc = 0.0;
        for (i, (spec, r)) in specs.iter().zip(&raw).enumerate() {
            let weight = if i + 1 == specs.len() { 1.0 - acc } else { r / total };
            acc += weight;
            requests.push(QosRequest {
                attribute: spec.name.clone(),
                value: random_value(rng, spec),
                weight,
            });
        }
    }
    DefinitionDocument {
        user_id: "u".into(),
        requests,
    }
}

/// Direct check that `reduct` keeps every clause and no attribute can be dropped.
pub fn is_minimal_reduct(cs: &ClauseSet, reduct: &Reduct) -> bool {
    let keeps = |s: &BTreeSet<String>| cs.clauses.iter().all(|c| subset_satisfies(c, s, cs.threshold));
    if !keeps(&reduct.attributes) {
        return false;
    }
    reduct.attributes.iter().all(|a| {
        let mut smaller = reduct.attributes.clone();
        smaller.remove(a);
        !keeps(&smaller)
    })
}
