//! Request intake, selection, SLA snapshots, monitored execution and feedback.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::monitor::{aggregate_monitoring, LogEntry, MonitoringLog};
use super::scheduler::simulate_time_shared;
use super::{generate_workload, SimConfig};
use crate::casestudy;
use crate::error::{Error, Result};
use crate::model::{DefinitionDocument, InformationSystem, Kind, Scale, WeightCheck};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineOutcome};
use crate::ranking::{ranked_list_csv, Ranking};
use crate::registry::{
    build_information_system, clamp_to_domain, fetch_dynamic_readings, AssemblyOptions, DynamicBackend, RegistryStore,
    SharedRegistry,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaRecord {
    pub sla_id: String,
    pub user_id: String,
    pub provider_id: String,
    pub agreed: BTreeMap<String, f64>,
    /// Simulated ms.
    pub created_at: u64,
}

struct UserSession {
    is: InformationSystem,
    outcome: PipelineOutcome,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub struct Broker {
    pub registry: SharedRegistry,
    pub pipeline: PipelineConfig,
    pub sim: SimConfig,
    pub assembly: AssemblyOptions,
    backend: Option<Box<dyn DynamicBackend>>,
    documents: BTreeMap<String, DefinitionDocument>,
    sessions: BTreeMap<String, UserSession>,
    log: MonitoringLog,
    slas: Vec<SlaRecord>,
    clock_us: u64,
    executions: u64,
    state_dir: Option<PathBuf>,
}

impl Broker {
    pub fn new(registry: SharedRegistry, pipeline: PipelineConfig, sim: SimConfig) -> Self {
        Self {
            registry,
            pipeline,
            sim,
            assembly: AssemblyOptions::default(),
            backend: None,
            documents: BTreeMap::new(),
            sessions: BTreeMap::new(),
            log: MonitoringLog::new(),
            slas: Vec::new(),
            clock_us: 0,
            executions: 0,
            state_dir: None,
        }
    }

    pub fn with_backend(mut self, backend: Box<dyn DynamicBackend>) -> Self {
        self.backend = Some(backend);
        self
    }

    /// Definition documents go to `<dir>/documents/<user>.json`, SLAs are
    /// appended to `<dir>/slas.jsonl`.
    pub fn with_state_dir(mut self, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let docs = dir.join("documents");
        std::fs::create_dir_all(&docs).map_err(|e| Error::io(&docs, e))?;
        self.state_dir = Some(dir);
        Ok(self)
    }

    pub fn log(&self) -> &MonitoringLog {
        &self.log
    }

    pub fn slas(&self) -> &[SlaRecord] {
        &self.slas
    }

    pub fn document(&self, user_id: &str) -> Option<&DefinitionDocument> {
        self.documents.get(user_id)
    }

    pub fn latest_outcome(&self, user_id: &str) -> Option<&PipelineOutcome> {
        self.sessions.get(user_id).map(|s| &s.outcome)
    }

    pub fn clock_us(&self) -> u64 {
        self.clock_us
    }

    /// Assembles a fresh information system and runs the full pipeline for one user.
    pub fn handle_ranking_request(&mut self, doc: DefinitionDocument) -> Result<Ranking> {
        let store = self.registry.snapshot();
        if store.is_empty() {
            return Err(Error::EmptyRegistry);
        }
        doc.validate_with(&store.schema, self.pipeline.weight_check)?;

        let readings = match &self.backend {
            Some(backend) => {
                let ids: Vec<String> = store.providers.iter().map(|p| p.id.clone()).collect();
                let dynamic: Vec<String> = store
                    .schema
                    .iter()
                    .filter(|a| a.kind == Kind::Dynamic)
                    .map(|a| a.name.clone())
                    .collect();
                fetch_dynamic_readings(backend.as_ref(), &store, &ids, &dynamic)?
            }
            None => Vec::new(),
        };
        let feed = aggregate_monitoring(&self.log, &self.assembly.binding);
        let options = AssemblyOptions {
            now_ms: self.clock_us / 1000,
            ..self.assembly.clone()
        };
        let is = build_information_system(&store, &readings, &feed, &options)?;
        let outcome = run_pipeline(&is, &doc, &self.pipeline)?;

        if let Some(dir) = &self.state_dir {
            let path = dir.join("documents").join(format!("{}.json", doc.user_id));
            std::fs::write(&path, doc.to_json()).map_err(|e| Error::io(&path, e))?;
        }
        let ranking = outcome.ranking.clone();
        self.documents.insert(doc.user_id.clone(), doc.clone());
        self.sessions.insert(doc.user_id, UserSession { is, outcome });
        Ok(ranking)
    }

    /// Creates the SLA snapshot and runs one monitored workload on the provider.
    pub fn execute_selection(&mut self, user_id: &str, provider_id: &str) -> Result<(SlaRecord, MonitoringLog)> {
        let store = self.registry.snapshot();
        if store.provider(provider_id).is_none() {
            return Err(Error::UnknownProvider(provider_id.to_string()));
        }
        let not_ranked = || Error::NotRanked {
            user: user_id.to_string(),
            provider: provider_id.to_string(),
        };
        let session = self.sessions.get(user_id).ok_or_else(not_ranked)?;
        if !session.outcome.ranking.entries.iter().any(|e| e.provider_id == provider_id) {
            return Err(not_ranked());
        }

        let binding = &self.assembly.binding;
        let profile_idx = session.is.provider_index(provider_id).ok_or_else(not_ranked)?;
        let full_row = &session.is.providers[profile_idx].values;
        let mut agreed: BTreeMap<String, f64> = session
            .outcome
            .rds
            .schema
            .iter()
            .map(|a| (a.name.clone(), full_row[&a.name]))
            .collect();
        for name in [&binding.response_time, &binding.vcpu_speed] {
            if let Some(v) = full_row.get(name) {
                agreed.entry(name.clone()).or_insert(*v);
            }
        }

        let start_us = self.clock_us;
        let sla = SlaRecord {
            sla_id: format!("sla-{:06}", self.slas.len() + 1),
            user_id: user_id.to_string(),
            provider_id: provider_id.to_string(),
            agreed,
            created_at: start_us / 1000,
        };

        let stream = self.executions;
        self.executions += 1;
        let tasks = generate_workload(&self.sim, 2 * stream)?;
        let outcomes = simulate_time_shared(&tasks, self.sim.hosts_per_provider)?;
        let to_us = |ms: f64| start_us + (ms * 1000.0).round() as u64;

        let mut entries = Vec::new();
        if let (Some(&agreed_rt), Some(spec)) = (sla.agreed.get(&binding.response_time), store.attribute(&binding.response_time)) {
            let mut by_completion = outcomes.clone();
            by_completion.sort_by(|a, b| a.completion_ms.total_cmp(&b.completion_ms).then(a.id.cmp(&b.id)));
            for o in &by_completion {
                let observed = round6(agreed_rt * o.slowdown());
                entries.push(LogEntry {
                    timestamp_us: to_us(o.completion_ms),
                    provider_id: provider_id.to_string(),
                    attribute: binding.response_time.clone(),
                    value: observed,
                    violation: spec.direction.is_worse(observed, agreed_rt),
                });
            }
        }

        let makespan = outcomes.iter().map(|o| o.completion_ms).fold(0.0, f64::max);
        let observed_attrs: Vec<_> = sla
            .agreed
            .iter()
            .filter(|(name, _)| **name != binding.response_time)
            .filter_map(|(name, v)| store.attribute(name).map(|spec| (spec, *v)))
            .filter(|(spec, _)| spec.kind == Kind::Dynamic && spec.scale == Scale::Numeric)
            .collect();
        let mut rng = self.sim.rng(2 * stream + 1);
        for i in 0..self.sim.observations {
            let at = makespan * (i + 1) as f64 / self.sim.observations as f64;
            for (spec, agreed_value) in &observed_attrs {
                let noise = 1.0 + self.sim.jitter * rng.random_range(-1.0..=1.0);
                let observed = round6(clamp_to_domain(spec, agreed_value * noise));
                entries.push(LogEntry {
                    timestamp_us: to_us(at),
                    provider_id: provider_id.to_string(),
                    attribute: spec.name.clone(),
                    value: observed,
                    violation: spec.direction.is_worse(observed, *agreed_value),
                });
            }
        }
        entries.sort_by_key(|e| e.timestamp_us);

        let mut run_log = MonitoringLog::new();
        for e in entries {
            run_log.push(e)?;
        }
        self.log.extend(&run_log)?;
        self.clock_us = self.clock_us.max(self.log.last_timestamp_us()) + 1;

        if let Some(dir) = &self.state_dir {
            let path = dir.join("slas.jsonl");
            let mut f = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|e| Error::io(&path, e))?;
            let line = serde_json::to_string(&sla).expect("sla serializes");
            writeln!(f, "{line}").map_err(|e| Error::io(&path, e))?;
        }
        self.slas.push(sla.clone());
        Ok((sla, run_log))
    }

    /// Folds a satisfaction level into the provider's profile and logs it.
    pub fn record_feedback(&mut self, provider_id: &str, level: i64) -> Result<u64> {
        let attribute = self.assembly.binding.feedback.clone();
        let stored = self
            .registry
            .write(|s| s.record_feedback(provider_id, &attribute, level))?;
        self.log.push(LogEntry {
            timestamp_us: self.clock_us,
            provider_id: provider_id.to_string(),
            attribute,
            value: level as f64,
            violation: false,
        })?;
        self.clock_us += 1;
        Ok(stored)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub sim: SimConfig,
    pub alpha: f64,
    pub feedback_level: i64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            alpha: 0.15,
            feedback_level: 9,
        }
    }
}

/// Serialized artifacts of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTranscript {
    pub first_ranking_csv: String,
    pub selected: String,
    pub sla_json: String,
    pub log_csv: String,
    pub feedback_stored: u64,
    pub second_ranking_csv: String,
}

/// Register the providers of `is`, rank, select the top provider, execute,
/// give feedback and rank again.
pub fn run_scenario(
    is: &InformationSystem,
    doc: &DefinitionDocument,
    pipeline: PipelineConfig,
    config: &ScenarioConfig,
    state_dir: Option<&Path>,
) -> Result<ScenarioTranscript> {
    let store = RegistryStore::from_information_system(is)?;
    let mut broker = Broker::new(SharedRegistry::new(store), pipeline, config.sim.clone());
    if let Some(dir) = state_dir {
        broker = broker.with_state_dir(dir)?;
    }
    let user = doc.user_id.clone();

    let first = broker.handle_ranking_request(doc.clone())?;
    let selected = first.entries[0].provider_id.clone();
    let (sla, _) = broker.execute_selection(&user, &selected)?;
    let feedback_stored = broker.record_feedback(&selected, config.feedback_level)?;
    let second = broker.handle_ranking_request(doc.clone())?;

    if let Some(dir) = state_dir {
        let path = dir.join("monitoring_log.csv");
        std::fs::write(&path, broker.log().to_csv()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(ScenarioTranscript {
        first_ranking_csv: ranked_list_csv(&first.entries),
        selected,
        sla_json: serde_json::to_string(&sla).expect("sla serializes"),
        log_csv: broker.log().to_csv(),
        feedback_stored,
        second_ranking_csv: ranked_list_csv(&second.entries),
    })
}

/// [`run_scenario`] on the case-study providers, labels and request.
pub fn run_case_study_scenario(config: &ScenarioConfig, state_dir: Option<&Path>) -> Result<ScenarioTranscript> {
    let pipeline = PipelineConfig {
        reduct: crate::discernibility::ReductConfig::with_alpha(config.alpha)?,
        labels: Some(casestudy::labels()),
        weight_check: WeightCheck::Lenient,
        ..PipelineConfig::default()
    };
    run_scenario(
        &casestudy::information_system(),
        &casestudy::effective_request(),
        pipeline,
        config,
        state_dir,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QosRequest;

    fn case_broker() -> Broker {
        let store = RegistryStore::from_information_system(&casestudy::information_system()).unwrap();
        let pipeline = PipelineConfig {
            reduct_override: Some(casestudy::reference_reducts()[0].clone()),
            labels: Some(casestudy::labels()),
            weight_check: WeightCheck::Lenient,
            ..PipelineConfig::default()
        };
        Broker::new(
            SharedRegistry::new(store),
            pipeline,
            SimConfig {
                seed: 7,
                ..SimConfig::default()
            },
        )
    }

    #[test]
    fn case_study_request_gives_reference_order() {
        let mut broker = case_broker();
        let ranking = broker.handle_ranking_request(casestudy::effective_request()).unwrap();
        let ids: Vec<_> = ranking.entries.iter().map(|e| e.provider_id.as_str()).collect();
        let expected: Vec<_> = casestudy::REFERENCE_SCORES.iter().map(|(id, _)| *id).collect();
        assert_eq!(ids, expected);
        assert!(broker.document("case-study-user").is_some());
    }

    #[test]
    fn empty_registry() {
        let store = RegistryStore::new(casestudy::information_system().schema);
        let mut broker = Broker::new(SharedRegistry::new(store), PipelineConfig::default(), SimConfig::default());
        assert!(matches!(
            broker.handle_ranking_request(casestudy::request()),
            Err(Error::EmptyRegistry)
        ));
    }

    #[test]
    fn unknown_attribute_in_document() {
        let mut broker = case_broker();
        let mut doc = casestudy::request();
        doc.requests.push(QosRequest {
            attribute: "GPU".into(),
            value: 1.0,
            weight: 1.0,
        });
        assert!(matches!(broker.handle_ranking_request(doc), Err(Error::Validation(_))));
    }

    #[test]
    fn selection_requires_ranking() {
        let mut broker = case_broker();
        assert!(matches!(
            broker.execute_selection("case-study-user", "amazon-ec2"),
            Err(Error::NotRanked { .. })
        ));
        broker.handle_ranking_request(casestudy::effective_request()).unwrap();
        assert!(matches!(
            broker.execute_selection("case-study-user", "nobody"),
            Err(Error::UnknownProvider(_))
        ));
    }

    #[test]
    fn execution_is_deterministic_and_consistent() {
        let run = || {
            let mut broker = case_broker();
            broker.handle_ranking_request(casestudy::effective_request()).unwrap();
            broker.execute_selection("case-study-user", "amazon-ec2").unwrap()
        };
        let (sla_a, log_a) = run();
        let (sla_b, log_b) = run();
        assert_eq!(sla_a, sla_b);
        assert_eq!(log_a.to_csv(), log_b.to_csv());
        assert!(log_a.entries.windows(2).all(|w| w[0].timestamp_us <= w[1].timestamp_us));
        let rt_entries = log_a.entries.iter().filter(|e| e.attribute == casestudy::RESPONSE_TIME).count();
        assert_eq!(rt_entries, 100);
        let schema = casestudy::information_system().schema;
        for e in &log_a.entries {
            let spec = schema.iter().find(|a| a.name == e.attribute).unwrap();
            assert_eq!(e.violation, spec.direction.is_worse(e.value, sla_a.agreed[&e.attribute]));
        }
    }

    #[test]
    fn feed_matches_serialized_log() {
        let mut broker = case_broker();
        broker.handle_ranking_request(casestudy::effective_request()).unwrap();
        broker.execute_selection("case-study-user", "amazon-ec2").unwrap();
        let binding = broker.assembly.binding.clone();
        let parsed = MonitoringLog::from_csv(broker.log().to_csv().as_bytes()).unwrap();
        let rts: Vec<f64> = parsed
            .entries
            .iter()
            .filter(|e| e.attribute == binding.response_time)
            .map(|e| e.value)
            .collect();
        let mean = rts.iter().sum::<f64>() / rts.len() as f64;
        let feed = aggregate_monitoring(broker.log(), &binding);
        assert!((feed["amazon-ec2"].mean_response_time.unwrap() - mean).abs() < 1e-9);
    }

    #[test]
    fn sla_file_is_appended() {
        let dir = tempfile::tempdir().unwrap();
        let mut broker = case_broker().with_state_dir(dir.path()).unwrap();
        broker.handle_ranking_request(casestudy::effective_request()).unwrap();
        broker.execute_selection("case-study-user", "amazon-ec2").unwrap();
        broker.execute_selection("case-study-user", "rackspace").unwrap();
        let text = std::fs::read_to_string(dir.path().join("slas.jsonl")).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(dir.path().join("documents/case-study-user.json").exists());
    }

    #[test]
    fn scenario_replays() {
        let config = ScenarioConfig::default();
        let a = run_case_study_scenario(&config, None).unwrap();
        let b = run_case_study_scenario(&config, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.feedback_stored, 9);
    }
}
