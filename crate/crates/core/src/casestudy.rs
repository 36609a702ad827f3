//! The ten-provider, seventeen-attribute IaaS case study used as a fixture
//! throughout the tests, the CLI examples and the acceptance suite.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{DecisionSystem, DefinitionDocument, InformationSystem};
use crate::reduct::Reduct;

pub const IS_JSON: &str = include_str!("../fixtures/case_study_is.json");
pub const LABELS_JSON: &str = include_str!("../fixtures/case_study_labels.json");
pub const REQUEST_JSON: &str = include_str!("../fixtures/case_study_request.json");
/// The request with the user weights that the reference weighted table
/// actually carries (Memory at 0.3 instead of 0.1).
pub const EFFECTIVE_REQUEST_JSON: &str = include_str!("../fixtures/case_study_request_effective.json");
pub const REDUCTS_JSON: &str = include_str!("../fixtures/case_study_reducts.json");

pub const ACCOUNTABILITY: &str = "Accountability";
pub const VCPU_COUNT: &str = "Number of vCPUs";
pub const VCPU_SPEED: &str = "vCPU Speed";
pub const DISK: &str = "Disk";
pub const MEMORY: &str = "Memory";
pub const VCPU_COST: &str = "vCPU Cost";
pub const DATA_IN_COST: &str = "Data In Cost";
pub const DATA_OUT_COST: &str = "Data Out Cost";
pub const STORAGE_COST: &str = "Storage Cost";
pub const SUPPORT: &str = "Support";
pub const AVAILABILITY: &str = "Availability";
pub const SECURITY: &str = "Security";
pub const FEEDBACK: &str = "Feedback";
pub const RESPONSE_TIME: &str = "Response Time";
pub const DOWN_TIME: &str = "Down Time";
pub const LATENCY: &str = "Latency";
pub const THROUGHPUT: &str = "Throughput";

/// Reference scores, best first.
pub const REFERENCE_SCORES: [(&str, f64); 10] = [
    ("amazon-ec2", 4.989),
    ("rackspace", 5.404),
    ("microsoft-azure", 6.843),
    ("google-compute-engine", 7.372),
    ("digital-ocean", 7.387),
    ("vultr-cloud", 7.916),
    ("century-link", 8.403),
    ("linode", 8.450),
    ("ibm-soft-layer", 8.668),
    ("storm-on-demand", 8.814),
];

pub fn information_system() -> InformationSystem {
    InformationSystem::from_json(IS_JSON.as_bytes()).expect("case study IS fixture parses")
}

pub fn labels() -> BTreeMap<String, u32> {
    crate::model::parse_labels(LABELS_JSON.as_bytes()).expect("case study labels parse")
}

pub fn decision_system() -> DecisionSystem {
    DecisionSystem::new(information_system(), labels()).expect("case study labels cover every provider")
}

pub fn request() -> DefinitionDocument {
    DefinitionDocument::from_json(REQUEST_JSON.as_bytes()).expect("case study request parses")
}

pub fn effective_request() -> DefinitionDocument {
    DefinitionDocument::from_json(EFFECTIVE_REQUEST_JSON.as_bytes()).expect("effective request parses")
}

/// The four reference reducts at alpha = 0.15, in reference order.
pub fn reference_reducts() -> Vec<Reduct> {
    let lists: Vec<Vec<String>> = serde_json::from_str(REDUCTS_JSON).expect("reduct fixture parses");
    lists.into_iter().map(|l| Reduct::new(l.into_iter().collect::<BTreeSet<_>>())).collect()
}
