//! Domain types shared by every stage of the broker pipeline.
//!
//! An [`InformationSystem`] is a provider-by-attribute value matrix described
//! by a list of [`AttributeSpec`]s. Attaching one crisp label per provider
//! yields a [`DecisionSystem`]. A user's request arrives as a
//! [`DefinitionDocument`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on per-category user weight sums.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Service Measurement Index category of an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Accountability,
    Agility,
    Cost,
    Assurance,
    Security,
    Satisfaction,
    Performance,
    #[serde(rename = "NetworkLayerQoS")]
    NetworkLayerQos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Numeric,
    /// Ordinal levels `lo..=hi`, stored as integers.
    Categorical { lo: i64, hi: i64 },
}

impl Scale {
    /// The usual 1..=10 level range.
    pub const LEVELS: Scale = Scale::Categorical { lo: 1, hi: 10 };

    pub fn is_categorical(&self) -> bool {
        matches!(self, Scale::Categorical { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LowerBetter,
    #[default]
    HigherBetter,
}

impl Direction {
    /// True when `observed` is strictly worse than `agreed`.
    pub fn is_worse(self, observed: f64, agreed: f64) -> bool {
        match self {
            Direction::LowerBetter => observed > agreed,
            Direction::HigherBetter => observed < agreed,
        }
    }
}

/// Schema entry for one QoS attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub category: Category,
    #[serde(default)]
    pub unit: String,
    pub kind: Kind,
    pub scale: Scale,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub network_layer: bool,
}

impl AttributeSpec {
    pub fn numeric(name: &str, category: Category, unit: &str, kind: Kind, direction: Direction) -> Self {
        Self {
            name: name.to_string(),
            category,
            unit: unit.to_string(),
            kind,
            scale: Scale::Numeric,
            direction,
            network_layer: false,
        }
    }

    pub fn levels(name: &str, category: Category, kind: Kind) -> Self {
        Self {
            name: name.to_string(),
            category,
            unit: "levels".to_string(),
            kind,
            scale: Scale::LEVELS,
            direction: Direction::HigherBetter,
            network_layer: false,
        }
    }

    pub fn network(mut self) -> Self {
        self.network_layer = true;
        self
    }

    pub fn is_dynamic(&self) -> bool {
        self.kind == Kind::Dynamic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub id: String,
    #[serde(rename = "name")]
    pub display_name: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationSystem {
    pub schema: Vec<AttributeSpec>,
    pub providers: Vec<ProviderProfile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub provider: Option<String>,
    pub attribute: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.provider, &self.attribute) {
            (Some(p), Some(a)) => write!(f, "provider `{p}`, attribute `{a}`: {}", self.message),
            (Some(p), None) => write!(f, "provider `{p}`: {}", self.message),
            (None, Some(a)) => write!(f, "attribute `{a}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, provider: Option<&str>, attribute: Option<&str>, message: impl Into<String>) {
        self.violations.push(Violation {
            provider: provider.map(str::to_string),
            attribute: attribute.map(str::to_string),
            message: message.into(),
        });
    }

    /// Converts a failed report into a [`Error::Validation`] naming the first violations.
    pub fn into_result(self) -> Result<()> {
        if self.ok {
            return Ok(());
        }
        let shown: Vec<String> = self.violations.iter().take(5).map(ToString::to_string).collect();
        let more = self.violations.len().saturating_sub(shown.len());
        let mut msg = shown.join("; ");
        if more > 0 {
            msg.push_str(&format!("; and {more} more"));
        }
        Err(Error::Validation(msg))
    }
}

/// Problems with one provider's values against `schema`.
pub fn profile_violations(schema: &[AttributeSpec], p: &ProviderProfile) -> Vec<Violation> {
    let mut report = ValidationReport::default();
    for spec in schema {
        match p.values.get(&spec.name) {
            None => report.push(Some(&p.id), Some(&spec.name), "missing value"),
            Some(v) if !v.is_finite() => report.push(Some(&p.id), Some(&spec.name), "non-finite value"),
            Some(&v) => {
                if let Scale::Categorical { lo, hi } = spec.scale {
                    if v.fract() != 0.0 {
                        report.push(Some(&p.id), Some(&spec.name), format!("level {v} is not an integer"));
                    } else if v < lo as f64 || v > hi as f64 {
                        report.push(
                            Some(&p.id),
                            Some(&spec.name),
                            format!("level out of range: {v} not in {lo}..={hi}"),
                        );
                    }
                }
            }
        }
    }
    for key in p.values.keys() {
        if !schema.iter().any(|a| &a.name == key) {
            report.push(Some(&p.id), Some(key), "attribute not in schema");
        }
    }
    report.violations
}

/// Checks schema and matrix invariants without aborting on the first problem.
pub fn validate_information_system(is: &InformationSystem) -> ValidationReport {
    let mut report = ValidationReport::default();

    if is.schema.is_empty() {
        report.push(None, None, "schema has no attributes");
    }
    if is.providers.len() < 2 {
        report.push(None, None, format!("need at least 2 providers, found {}", is.providers.len()));
    }

    let mut names = BTreeSet::new();
    for spec in &is.schema {
        if !names.insert(spec.name.as_str()) {
            report.push(None, Some(&spec.name), "duplicate attribute name");
        }
        if let Scale::Categorical { lo, hi } = spec.scale {
            if lo >= hi {
                report.push(None, Some(&spec.name), format!("level range {lo}..{hi} is empty"));
            }
        }
        if spec.network_layer && spec.kind != Kind::Dynamic {
            report.push(None, Some(&spec.name), "network-layer attribute must be dynamic");
        }
    }

    let mut ids = BTreeSet::new();
    for p in &is.providers {
        if !ids.insert(p.id.as_str()) {
            report.push(Some(&p.id), None, "duplicate provider id");
        }
        report.violations.extend(profile_violations(&is.schema, p));
    }

    report.ok = report.violations.is_empty();
    report
}

impl InformationSystem {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("information system: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("information system serializes")
    }

    /// Reads the CSV variant: header `attribute,<provider ids...>`, one row per
    /// attribute, plus the schema from a sidecar JSON array of attribute specs.
    pub fn from_csv(csv_bytes: &[u8], schema_json: &[u8]) -> Result<Self> {
        let schema: Vec<AttributeSpec> =
            serde_json::from_slice(schema_json).map_err(|e| Error::Parse(format!("schema sidecar: {e}")))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_bytes);
        let headers = reader.headers().map_err(|e| Error::Parse(format!("csv header: {e}")))?.clone();
        let mut providers: Vec<ProviderProfile> = headers
            .iter()
            .skip(1)
            .map(|id| ProviderProfile {
                id: id.to_string(),
                display_name: id.to_string(),
                values: BTreeMap::new(),
            })
            .collect();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("csv row {}: {e}", line + 2)))?;
            let attr = record.get(0).unwrap_or_default().to_string();
            for (p, cell) in providers.iter_mut().zip(record.iter().skip(1)) {
                if cell.is_empty() {
                    continue;
                }
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Parse(format!("csv row {}: `{cell}` is not a number", line + 2)))?;
                p.values.insert(attr.clone(), v);
            }
        }
        Ok(Self { schema, providers })
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.schema.iter().find(|a| a.name == name)
    }

    pub fn provider_index(&self, id: &str) -> Option<usize> {
        self.providers.iter().position(|p| p.id == id)
    }

    pub fn attribute_names(&self) -> Vec<String> {
        self.schema.iter().map(|a| a.name.clone()).collect()
    }

    /// Row-major values in schema order. Missing cells read as NaN.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.providers
            .iter()
            .map(|p| {
                self.schema
                    .iter()
                    .map(|a| p.values.get(&a.name).copied().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }

    /// Restricts the system to `names`, keeping schema order.
    pub fn project(&self, names: &BTreeSet<String>) -> InformationSystem {
        let schema: Vec<AttributeSpec> = self.schema.iter().filter(|a| names.contains(&a.name)).cloned().collect();
        let providers = self
            .providers
            .iter()
            .map(|p| ProviderProfile {
                id: p.id.clone(),
                display_name: p.display_name.clone(),
                values: p
                    .values
                    .iter()
                    .filter(|(k, _)| names.contains(*k))
                    .map(|(k, v)| (k.clone(), *v))
                    .collect(),
            })
            .collect();
        InformationSystem { schema, providers }
    }
}

/// Min-max normalized copy of an information system, in schema and provider order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMatrix {
    pub attributes: Vec<String>,
    pub provider_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NormalizedMatrix {
    /// Wraps raw rows; attribute and provider names are generated.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        Self {
            attributes: (0..width).map(|j| format!("a{j}")).collect(),
            provider_ids: (0..rows.len()).map(|i| format!("p{i}")).collect(),
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.attributes.len()
    }
}

fn normalize_columns(rows: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    let mut out = rows.to_vec();
    for j in 0..width {
        let (lo, hi) = rows
            .iter()
            .map(|r| r[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        for row in out.iter_mut() {
            row[j] = if span > 0.0 { (row[j] - lo) / span } else { 0.0 };
        }
    }
    out
}

/// Maps every attribute column onto [0, 1]; constant columns become all zeros.
pub fn min_max_normalize(is: &InformationSystem) -> NormalizedMatrix {
    let rows = normalize_columns(&is.matrix(), is.schema.len());
    NormalizedMatrix {
        attributes: is.attribute_names(),
        provider_ids: is.providers.iter().map(|p| p.id.clone()).collect(),
        rows,
    }
}

impl NormalizedMatrix {
    /// Re-normalizes this matrix column by column.
    pub fn renormalized(&self) -> NormalizedMatrix {
        NormalizedMatrix {
            attributes: self.attributes.clone(),
            provider_ids: self.provider_ids.clone(),
            rows: normalize_columns(&self.rows, self.n_cols()),
        }
    }
}

/// An information system plus one crisp decision label per provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSystem {
    pub base: InformationSystem,
    pub labels: BTreeMap<String, u32>,
}

impl DecisionSystem {
    pub fn new(base: InformationSystem, labels: BTreeMap<String, u32>) -> Result<Self> {
        for p in &base.providers {
            match labels.get(&p.id) {
                None => return Err(Error::MissingLabel(p.id.clone())),
                Some(0) => return Err(Error::validation(format!("provider `{}`: label must be positive", p.id))),
                Some(_) => {}
            }
        }
        Ok(Self { base, labels })
    }

    /// Labels in provider order.
    pub fn label_vec(&self) -> Vec<u32> {
        self.base.providers.iter().map(|p| self.labels[&p.id]).collect()
    }

    pub fn distinct_labels(&self) -> usize {
        self.labels.values().collect::<BTreeSet<_>>().len()
    }
}

/// Reads a label file: a JSON object mapping provider id to a positive label.
pub fn parse_labels(bytes: &[u8]) -> Result<BTreeMap<String, u32>> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("labels: {e}")))
}

/// A membership or discernibility degree in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FuzzyDegree(f64);

impl FuzzyDegree {
    pub const ZERO: FuzzyDegree = FuzzyDegree(0.0);
    pub const ONE: FuzzyDegree = FuzzyDegree(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::OutOfRange(format!("fuzzy degree {value} not in [0,1]")))
        }
    }

    /// Clamps into [0, 1]; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Self(0.0)
        } else {
            Self(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FuzzyDegree {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FuzzyDegree> for f64 {
    fn from(d: FuzzyDegree) -> f64 {
        d.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QosRequest {
    pub attribute: String,
    pub value: f64,
    pub weight: f64,
}

/// A user's QoS request: per-attribute targets and weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitionDocument {
    pub user_id: String,
    pub requests: Vec<QosRequest>,
}

/// How strictly [`DefinitionDocument::validate_with`] treats per-category weight sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightCheck {
    #[default]
    PerCategory,
    /// Report unbalanced categories through `log::warn!` instead of failing.
    Lenient,
}

impl DefinitionDocument {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("definition document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("definition document serializes")
    }

    pub fn request(&self, attribute: &str) -> Option<&QosRequest> {
        self.requests.iter().find(|r| r.attribute == attribute)
    }

    pub fn requested_names(&self) -> BTreeSet<String> {
        self.requests.iter().map(|r| r.attribute.clone()).collect()
    }

    /// Per-category sums of user weights.
    pub fn category_sums(&self, schema: &[AttributeSpec]) -> BTreeMap<Category, f64> {
        let by_name: HashMap<&str, &AttributeSpec> = schema.iter().map(|a| (a.name.as_str(), a)).collect();
        let mut sums = BTreeMap::new();
        for r in &self.requests {
            if let Some(spec) = by_name.get(r.attribute.as_str()) {
                *sums.entry(spec.category).or_insert(0.0) += r.weight;
            }
        }
        sums
    }

    pub fn validate(&self, schema: &[AttributeSpec]) -> Result<()> {
        self.validate_with(schema, WeightCheck::PerCategory)
    }

    pub fn validate_with(&self, schema: &[AttributeSpec], check: WeightCheck) -> Result<()> {
        if self.user_id.trim().is_empty() {
            return Err(Error::validation("user_id: must not be empty"));
        }
        let mut seen = BTreeSet::new();
        for r in &self.requests {
            if !schema.iter().any(|a| a.name == r.attribute) {
                return Err(Error::validation(format!("requests.attribute: unknown attribute `{}`", r.attribute)));
            }
            if !seen.insert(r.attribute.as_str()) {
                return Err(Error::validation(format!("requests.attribute: `{}` requested twice", r.attribute)));
            }
            if !r.value.is_finite() {
                return Err(Error::validation(format!("requests.value: `{}` is not finite", r.attribute)));
            }
            if !(r.weight > 0.0 && r.weight <= 1.0) {
                return Err(Error::validation(format!(
                    "requests.weight: `{}` weight {} not in (0,1]",
                    r.attribute, r.weight
                )));
            }
        }
        for (category, sum) in self.category_sums(schema) {
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                let msg = format!("requests.weight: {category:?} weights sum to {sum}, expected 1");
                match check {
                    WeightCheck::PerCategory => return Err(Error::Validation(msg)),
                    WeightCheck::Lenient => log::warn!("{msg}"),
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a definition document against `schema`.
pub fn parse_definition_document(bytes: &[u8], schema: &[AttributeSpec]) -> Result<DefinitionDocument> {
    let doc = DefinitionDocument::from_json(bytes)?;
    doc.validate(schema)?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casestudy;

    #[test]
    fn case_study_is_valid() {
        let report = validate_information_system(&casestudy::information_system());
        assert!(report.ok, "{:?}", report.violations);
    }

    #[test]
    fn missing_value_is_reported() {
        let mut is = casestudy::information_system();
        is.providers[3].values.remove(casestudy::LATENCY);
        let report = validate_information_system(&is);
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].message, "missing value");
        assert_eq!(report.violations[0].attribute.as_deref(), Some(casestudy::LATENCY));
    }

    #[test]
    fn level_out_of_range_is_reported() {
        let mut is = casestudy::information_system();
        is.providers[0].values.insert(casestudy::SECURITY.into(), 11.0);
        let report = validate_information_system(&is);
        assert!(!report.ok);
        assert!(report.violations[0].message.starts_with("level out of range"));
    }

    #[test]
    fn network_attribute_must_be_dynamic() {
        let mut is = casestudy::information_system();
        let idx = is.attribute_index(casestudy::LATENCY).unwrap();
        is.schema[idx].kind = Kind::Static;
        assert!(!validate_information_system(&is).ok);
    }

    #[test]
    fn vcpu_speed_normalizes_to_0_875_for_amazon() {
        let is = casestudy::information_system();
        let m = min_max_normalize(&is);
        let j = is.attribute_index(casestudy::VCPU_SPEED).unwrap();
        let i = is.provider_index("amazon-ec2").unwrap();
        assert!((m.rows[i][j] - 0.875).abs() < 1e-12);
        let col: Vec<f64> = m.rows.iter().map(|r| r[j]).collect();
        assert_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
        assert_eq!(col.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
    }

    #[test]
    fn constant_column_normalizes_to_zero() {
        let m = NormalizedMatrix::from_rows(vec![vec![3.0, 1.0], vec![3.0, 2.0]]).renormalized();
        assert_eq!(m.rows, vec![vec![0.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn table_iv_request_parses() {
        let is = casestudy::information_system();
        let doc = parse_definition_document(casestudy::REQUEST_JSON.as_bytes(), &is.schema).unwrap();
        assert_eq!(doc.requests.len(), 13);
        assert_eq!(doc.request(casestudy::AVAILABILITY).unwrap().weight, 0.7);
    }

    #[test]
    fn unbalanced_agility_weights_fail() {
        let is = casestudy::information_system();
        let mut doc = casestudy::request();
        for r in doc.requests.iter_mut() {
            if r.attribute == casestudy::MEMORY {
                r.weight = 0.2;
            }
        }
        let err = doc.validate(&is.schema).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("Agility")), "{err}");
        assert!(doc.validate_with(&is.schema, WeightCheck::Lenient).is_ok());
    }

    #[test]
    fn unknown_attribute_fails() {
        let is = casestudy::information_system();
        let json = r#"{"user_id":"u","requests":[{"attribute":"GPU","value":1,"weight":1.0}]}"#;
        let err = parse_definition_document(json.as_bytes(), &is.schema).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("GPU")));
    }

    #[test]
    fn non_positive_weight_fails() {
        let is = casestudy::information_system();
        let json = r#"{"user_id":"u","requests":[{"attribute":"Security","value":1,"weight":0.0}]}"#;
        assert!(parse_definition_document(json.as_bytes(), &is.schema).is_err());
    }

    #[test]
    fn malformed_json_is_parse_error() {
        let err = DefinitionDocument::from_json(b"{not json").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn csv_variant_matches_json() {
        let is = casestudy::information_system();
        let mut csv = String::from("attribute");
        for p in &is.providers {
            csv.push(',');
            csv.push_str(&p.id);
        }
        csv.push('\n');
        for a in &is.schema {
            csv.push_str(&a.name);
            for p in &is.providers {
                csv.push_str(&format!(",{}", p.values[&a.name]));
            }
            csv.push('\n');
        }
        let schema = serde_json::to_vec(&is.schema).unwrap();
        let parsed = InformationSystem::from_csv(csv.as_bytes(), &schema).unwrap();
        assert_eq!(parsed.matrix(), is.matrix());
        assert!(validate_information_system(&parsed).ok);
    }

    #[test]
    fn decision_system_requires_every_label() {
        let is = casestudy::information_system();
        let mut labels = casestudy::labels();
        labels.remove("linode");
        assert!(matches!(DecisionSystem::new(is, labels), Err(Error::MissingLabel(id)) if id == "linode"));
    }

    #[test]
    fn fuzzy_degree_bounds() {
        assert!(FuzzyDegree::new(1.2).is_err());
        assert_eq!(FuzzyDegree::saturating(1.2).value(), 1.0);
        assert_eq!(FuzzyDegree::saturating(f64::NAN).value(), 0.0);
        assert!(serde_json::from_str::<FuzzyDegree>("-0.1").is_err());
    }

    #[test]
    fn sla_direction() {
        assert!(Direction::LowerBetter.is_worse(2.0, 1.0));
        assert!(!Direction::LowerBetter.is_worse(1.0, 1.0));
        assert!(Direction::HigherBetter.is_worse(0.5, 1.0));
    }
}
