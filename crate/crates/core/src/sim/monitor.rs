//! Execution monitoring log and its per-provider aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::FeedBinding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub timestamp_us: u64,
    pub provider_id: String,
    pub attribute: String,
    pub value: f64,
    pub violation: bool,
}

/// Append-only observations with non-decreasing timestamps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitoringLog {
    pub entries: Vec<LogEntry>,
}

impl MonitoringLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_timestamp_us(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.timestamp_us)
    }

    pub fn push(&mut self, entry: LogEntry) -> Result<()> {
        if entry.timestamp_us < self.last_timestamp_us() {
            return Err(Error::validation(format!(
                "log timestamp {} precedes {}",
                entry.timestamp_us,
                self.last_timestamp_us()
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn extend(&mut self, other: &MonitoringLog) -> Result<()> {
        for e in &other.entries {
            self.push(e.clone())?;
        }
        Ok(())
    }

    /// CSV with header `timestamp_us,provider_id,attribute,value,violation`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["timestamp_us", "provider_id", "attribute", "value", "violation"])
            .expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.timestamp_us.to_string(),
                e.provider_id.clone(),
                e.attribute.clone(),
                format!("{:.6}", e.value),
                e.violation.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(bytes);
        let mut log = MonitoringLog::new();
        for row in reader.deserialize::<LogEntry>() {
            let entry = row.map_err(|e| Error::Parse(format!("monitoring log: {e}")))?;
            log.push(entry)?;
        }
        Ok(log)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProviderPerformance {
    pub mean_response_time: Option<f64>,
    pub mean_vcpu_speed: Option<f64>,
    /// Mean observed down time, in the attribute's own unit.
    pub downtime_minutes: Option<f64>,
    pub availability: Option<f64>,
    pub feedback_level: Option<f64>,
    pub violation_count: u64,
}

pub type PerformanceFeed = BTreeMap<String, ProviderPerformance>;

#[derive(Default)]
struct Acc {
    sum: f64,
    n: usize,
}

impl Acc {
    fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

/// Means of the bound attributes per provider plus violation counts.
/// Feedback levels are averaged and rounded half-up.
pub fn aggregate_monitoring(log: &MonitoringLog, binding: &FeedBinding) -> PerformanceFeed {
    let mut accs: BTreeMap<&str, BTreeMap<&str, Acc>> = BTreeMap::new();
    let mut violations: BTreeMap<&str, u64> = BTreeMap::new();
    for e in &log.entries {
        let acc = accs
            .entry(e.provider_id.as_str())
            .or_default()
            .entry(e.attribute.as_str())
            .or_default();
        acc.sum += e.value;
        acc.n += 1;
        *violations.entry(e.provider_id.as_str()).or_default() += u64::from(e.violation);
    }
    accs.into_iter()
        .map(|(pid, by_attr)| {
            let mean = |name: &str| by_attr.get(name).and_then(Acc::mean);
            let perf = ProviderPerformance {
                mean_response_time: mean(&binding.response_time),
                mean_vcpu_speed: mean(&binding.vcpu_speed),
                downtime_minutes: mean(&binding.down_time),
                availability: mean(&binding.availability),
                feedback_level: mean(&binding.feedback).map(|m| (m + 0.5).floor()),
                violation_count: violations[pid],
            };
            (pid.to_string(), perf)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(t: u64, pid: &str, attr: &str, value: f64, violation: bool) -> LogEntry {
        LogEntry {
            timestamp_us: t,
            provider_id: pid.into(),
            attribute: attr.into(),
            value,
            violation,
        }
    }

    #[test]
    fn mean_response_time() {
        let mut log = MonitoringLog::new();
        log.push(entry(1, "rackspace", "Response Time", 50.0, false)).unwrap();
        log.push(entry(2, "rackspace", "Response Time", 70.0, true)).unwrap();
        let feed = aggregate_monitoring(&log, &FeedBinding::default());
        assert_eq!(feed["rackspace"].mean_response_time, Some(60.0));
        assert_eq!(feed["rackspace"].violation_count, 1);
        assert_eq!(feed["rackspace"].mean_vcpu_speed, None);
    }

    #[test]
    fn empty_log_empty_feed() {
        assert!(aggregate_monitoring(&MonitoringLog::new(), &FeedBinding::default()).is_empty());
    }

    #[test]
    fn timestamps_must_not_decrease() {
        let mut log = MonitoringLog::new();
        log.push(entry(5, "a", "Latency", 1.0, false)).unwrap();
        assert!(log.push(entry(4, "a", "Latency", 1.0, false)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut log = MonitoringLog::new();
        log.push(entry(10, "amazon-ec2", "Response Time", 48.125, false)).unwrap();
        log.push(entry(10, "amazon-ec2", "Latency", 41.5, true)).unwrap();
        let csv = log.to_csv();
        assert!(csv.starts_with("timestamp_us,provider_id,attribute,value,violation\n"));
        assert_eq!(MonitoringLog::from_csv(csv.as_bytes()).unwrap(), log);
    }

    #[test]
    fn feedback_mean_rounds_half_up() {
        let mut log = MonitoringLog::new();
        log.push(entry(1, "x", "Feedback", 7.0, false)).unwrap();
        log.push(entry(2, "x", "Feedback", 8.0, false)).unwrap();
        assert_eq!(aggregate_monitoring(&log, &FeedBinding::default())["x"].feedback_level, Some(8.0));
    }
}
