//! Provider repository and dynamic QoS readings.
//!
//! [`RegistryStore`] holds registered provider profiles and persists them as
//! the information-system JSON plus a version counter. Dynamic attribute
//! values come from a [`DynamicBackend`] (a replayed trace or a seeded random
//! walk) and are layered with monitoring aggregates when a fresh
//! information system is assembled.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    profile_violations, validate_information_system, AttributeSpec, InformationSystem, Kind, ProviderProfile, Scale,
};
use crate::sim::monitor::PerformanceFeed;

/// Default staleness limit for dynamic readings: 300 s of simulated time.
pub const DEFAULT_TTL_MS: u64 = 300_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackHistory {
    pub count: u64,
    pub sum: u64,
}

impl FeedbackHistory {
    /// Mean level rounded half-up.
    pub fn level(&self) -> Option<u64> {
        (self.count > 0).then(|| (2 * self.sum + self.count) / (2 * self.count))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryStore {
    pub schema: Vec<AttributeSpec>,
    pub providers: Vec<ProviderProfile>,
    pub version: u64,
    #[serde(default)]
    pub feedback: BTreeMap<String, FeedbackHistory>,
    #[serde(skip)]
    path: Option<PathBuf>,
}

impl RegistryStore {
    pub fn new(schema: Vec<AttributeSpec>) -> Self {
        Self {
            schema,
            providers: Vec::new(),
            version: 0,
            feedback: BTreeMap::new(),
            path: None,
        }
    }

    /// A store seeded with every provider of `is`, one version bump per provider.
    pub fn from_information_system(is: &InformationSystem) -> Result<Self> {
        let mut store = Self::new(is.schema.clone());
        for p in &is.providers {
            store.upsert_provider(p.clone())?;
        }
        Ok(store)
    }

    /// Opens a store file, creating an empty store with `schema` if absent.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut store: RegistryStore =
            serde_json::from_slice(&bytes).map_err(|e| Error::Parse(format!("registry store: {e}")))?;
        store.path = Some(path.to_path_buf());
        Ok(store)
    }

    /// Binds the store to a file; later mutations persist there.
    pub fn persist_to(&mut self, path: impl Into<PathBuf>) -> Result<()> {
        self.path = Some(path.into());
        self.save()
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Writes the store to its bound file through a temporary file and rename.
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(self.to_json().as_bytes()).map_err(|e| Error::io(path, e))?;
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    pub fn len(&self) -> usize {
        self.providers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }

    pub fn provider(&self, id: &str) -> Option<&ProviderProfile> {
        self.providers.iter().find(|p| p.id == id)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.schema.iter().find(|a| a.name == name)
    }

    /// Registers or replaces a provider and returns the new version.
    pub fn upsert_provider(&mut self, profile: ProviderProfile) -> Result<u64> {
        let violations = profile_violations(&self.schema, &profile);
        if let Some(v) = violations.first() {
            return Err(Error::SchemaMismatch(v.to_string()));
        }
        match self.providers.iter_mut().find(|p| p.id == profile.id) {
            Some(slot) => *slot = profile,
            None => self.providers.push(profile),
        }
        self.bump()
    }

    fn bump(&mut self) -> Result<u64> {
        self.version += 1;
        self.save()?;
        Ok(self.version)
    }

    /// The stored profiles as an information system.
    pub fn information_system(&self) -> InformationSystem {
        InformationSystem {
            schema: self.schema.clone(),
            providers: self.providers.clone(),
        }
    }

    /// Folds one feedback level into the provider's running mean and stores
    /// the rounded mean as the provider's `attribute` value.
    pub fn record_feedback(&mut self, provider_id: &str, attribute: &str, level: i64) -> Result<u64> {
        let spec = self
            .attribute(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        let (lo, hi) = match spec.scale {
            Scale::Categorical { lo, hi } => (lo, hi),
            Scale::Numeric => (1, 10),
        };
        if level < lo.max(1) || level > hi {
            return Err(Error::OutOfRange(format!("feedback level {level} not in {}..={hi}", lo.max(1))));
        }
        let idx = self
            .providers
            .iter()
            .position(|p| p.id == provider_id)
            .ok_or_else(|| Error::UnknownProvider(provider_id.to_string()))?;
        let history = self.feedback.entry(provider_id.to_string()).or_default();
        history.count += 1;
        history.sum += level as u64;
        let stored = history.level().expect("count > 0");
        self.providers[idx].values.insert(attribute.to_string(), stored as f64);
        self.bump()?;
        Ok(stored)
    }
}

/// Single-writer, multi-reader handle over a store.
#[derive(Debug, Clone)]
pub struct SharedRegistry {
    inner: Arc<RwLock<RegistryStore>>,
}

impl SharedRegistry {
    pub fn new(store: RegistryStore) -> Self {
        Self {
            inner: Arc::new(RwLock::new(store)),
        }
    }

    /// A consistent copy of the current store.
    pub fn snapshot(&self) -> RegistryStore {
        self.inner.read().expect("registry lock").clone()
    }

    pub fn version(&self) -> u64 {
        self.inner.read().expect("registry lock").version
    }

    pub fn write<T>(&self, f: impl FnOnce(&mut RegistryStore) -> Result<T>) -> Result<T> {
        let mut guard = self.inner.write().expect("registry lock");
        f(&mut guard)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicReading {
    pub provider_id: String,
    pub attribute: String,
    pub value: f64,
    pub timestamp_ms: u64,
}

/// Source of current values for dynamic attributes.
pub trait DynamicBackend: Send + Sync {
    fn fetch(&self, store: &RegistryStore, provider_ids: &[String], attributes: &[String]) -> Result<Vec<DynamicReading>>;
}

/// Replays a CSV trace with header `timestamp_ms,provider_id,attribute,value`.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    pub path: PathBuf,
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    timestamp_ms: u64,
    provider_id: String,
    attribute: String,
    value: f64,
}

impl ReplayBackend {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }
}

impl DynamicBackend for ReplayBackend {
    fn fetch(&self, _store: &RegistryStore, provider_ids: &[String], attributes: &[String]) -> Result<Vec<DynamicReading>> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(&self.path)
            .map_err(|e| Error::BackendUnavailable(format!("{}: {e}", self.path.display())))?;
        let mut out = Vec::new();
        for row in reader.deserialize::<TraceRow>() {
            let row = row.map_err(|e| Error::Parse(format!("replay trace {}: {e}", self.path.display())))?;
            if provider_ids.contains(&row.provider_id) && attributes.contains(&row.attribute) {
                out.push(DynamicReading {
                    provider_id: row.provider_id,
                    attribute: row.attribute,
                    value: row.value,
                    timestamp_ms: row.timestamp_ms,
                });
            }
        }
        Ok(out)
    }
}

/// Seeded multiplicative random walk around each stored baseline, clamped to
/// the attribute's domain.
#[derive(Debug, Clone)]
pub struct SyntheticBackend {
    pub seed: u64,
    pub steps: usize,
    /// Largest relative change per step.
    pub step_scale: f64,
    pub timestamp_ms: u64,
}

impl SyntheticBackend {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            steps: 10,
            step_scale: 0.02,
            timestamp_ms: 0,
        }
    }
}

pub(crate) fn clamp_to_domain(spec: &AttributeSpec, value: f64) -> f64 {
    match spec.scale {
        Scale::Categorical { lo, hi } => value.round().clamp(lo as f64, hi as f64),
        Scale::Numeric => {
            let v = value.max(0.0);
            if spec.unit == "%" {
                v.min(100.0)
            } else {
                v
            }
        }
    }
}

impl DynamicBackend for SyntheticBackend {
    fn fetch(&self, store: &RegistryStore, provider_ids: &[String], attributes: &[String]) -> Result<Vec<DynamicReading>> {
        let mut out = Vec::with_capacity(provider_ids.len() * attributes.len());
        for (pi, pid) in provider_ids.iter().enumerate() {
            let profile = store.provider(pid).ok_or_else(|| Error::UnknownProvider(pid.clone()))?;
            for (ai, attr) in attributes.iter().enumerate() {
                let spec = store.attribute(attr).ok_or_else(|| Error::UnknownAttribute(attr.clone()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(((pi as u64) << 32) | ai as u64);
                let mut value = profile.values.get(attr).copied().unwrap_or(0.0);
                for _ in 0..self.steps {
                    value *= 1.0 + rng.random_range(-self.step_scale..=self.step_scale);
                }
                out.push(DynamicReading {
                    provider_id: pid.clone(),
                    attribute: attr.clone(),
                    value: clamp_to_domain(spec, value),
                    timestamp_ms: self.timestamp_ms,
                });
            }
        }
        Ok(out)
    }
}

/// Parses `replay:<path>` or `synthetic:<seed>`.
pub fn backend_from_spec(spec: &str) -> Result<Box<dyn DynamicBackend>> {
    match spec.split_once(':') {
        Some(("replay", path)) if !path.is_empty() => Ok(Box::new(ReplayBackend::new(path))),
        Some(("synthetic", seed)) => {
            let seed = seed
                .parse()
                .map_err(|_| Error::validation(format!("backend: `{seed}` is not a seed")))?;
            Ok(Box::new(SyntheticBackend::new(seed)))
        }
        _ => Err(Error::validation(format!(
            "backend: expected `replay:<path>` or `synthetic:<seed>`, got `{spec}`"
        ))),
    }
}

/// Fetches one reading per (provider, attribute); every attribute must be dynamic.
pub fn fetch_dynamic_readings(
    backend: &dyn DynamicBackend,
    store: &RegistryStore,
    provider_ids: &[String],
    attributes: &[String],
) -> Result<Vec<DynamicReading>> {
    for attr in attributes {
        match store.attribute(attr) {
            Some(spec) if spec.kind == Kind::Dynamic => {}
            _ => return Err(Error::UnknownAttribute(attr.clone())),
        }
    }
    backend.fetch(store, provider_ids, attributes)
}

/// Names of the attributes that monitoring aggregates overwrite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedBinding {
    pub response_time: String,
    pub vcpu_speed: String,
    pub down_time: String,
    pub availability: String,
    pub feedback: String,
}

impl Default for FeedBinding {
    fn default() -> Self {
        Self {
            response_time: "Response Time".into(),
            vcpu_speed: "vCPU Speed".into(),
            down_time: "Down Time".into(),
            availability: "Availability".into(),
            feedback: "Feedback".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyOptions {
    /// Current simulated time.
    pub now_ms: u64,
    pub ttl_ms: u64,
    pub binding: FeedBinding,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            now_ms: 0,
            ttl_ms: DEFAULT_TTL_MS,
            binding: FeedBinding::default(),
        }
    }
}

/// Builds a fresh information system: stored profiles, overlaid by the latest
/// non-stale dynamic readings, overlaid by monitoring aggregates.
pub fn build_information_system(
    store: &RegistryStore,
    readings: &[DynamicReading],
    feed: &PerformanceFeed,
    options: &AssemblyOptions,
) -> Result<InformationSystem> {
    if store.is_empty() {
        return Err(Error::EmptyRegistry);
    }
    let mut is = store.information_system();

    let mut latest: BTreeMap<(&str, &str), &DynamicReading> = BTreeMap::new();
    for r in readings {
        if options.now_ms.saturating_sub(r.timestamp_ms) > options.ttl_ms {
            log::warn!(
                "stale reading for {}/{} at {} ms ignored; keeping stored baseline",
                r.provider_id,
                r.attribute,
                r.timestamp_ms
            );
            continue;
        }
        let key = (r.provider_id.as_str(), r.attribute.as_str());
        match latest.get(&key) {
            Some(prev) if prev.timestamp_ms > r.timestamp_ms => {}
            _ => {
                latest.insert(key, r);
            }
        }
    }
    for ((pid, attr), r) in latest {
        let Some(spec) = store.attribute(attr) else {
            log::warn!("reading for unknown attribute `{attr}` ignored");
            continue;
        };
        if spec.kind != Kind::Dynamic {
            log::warn!("reading for static attribute `{attr}` ignored");
            continue;
        }
        let value = clamp_to_domain(spec, r.value);
        if let Some(p) = is.providers.iter_mut().find(|p| p.id == pid) {
            p.values.insert(attr.to_string(), value);
        }
    }

    let binding = &options.binding;
    for p in is.providers.iter_mut() {
        let Some(perf) = feed.get(&p.id) else { continue };
        let overlays = [
            (&binding.response_time, perf.mean_response_time),
            (&binding.vcpu_speed, perf.mean_vcpu_speed),
            (&binding.feedback, perf.feedback_level),
        ];
        for (attr, value) in overlays {
            if let (Some(v), Some(spec)) = (value, store.attribute(attr)) {
                p.values.insert(attr.clone(), clamp_to_domain(spec, v));
            }
        }
    }

    validate_information_system(&is).into_result()?;
    Ok(is)
}
