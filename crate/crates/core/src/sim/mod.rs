//! Broker simulator: workload generation, time-shared execution, monitoring,
//! and ranking benchmarks.

pub mod bench;
pub mod broker;
pub mod monitor;
pub mod scheduler;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use scheduler::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub hosts_per_provider: usize,
    /// Service demand bounds in ms.
    pub task_time_range: (f64, f64),
    pub tasks_per_request: usize,
    pub mean_interarrival_ms: f64,
    /// Periodic QoS observations per execution.
    pub observations: usize,
    /// Relative amplitude of observation noise.
    pub jitter: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            hosts_per_provider: 50,
            task_time_range: (0.1, 1.0),
            tasks_per_request: 100,
            mean_interarrival_ms: 0.01,
            observations: 5,
            jitter: 0.05,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.task_time_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::validation(format!("task_time_range: need 0 < lo < hi, got ({lo}, {hi})")));
        }
        if self.hosts_per_provider == 0 {
            return Err(Error::validation("hosts_per_provider: must be at least 1"));
        }
        if !(self.mean_interarrival_ms > 0.0 && self.mean_interarrival_ms.is_finite()) {
            return Err(Error::validation("mean_interarrival_ms: must be positive"));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::validation("jitter: must be in [0, 1)"));
        }
        Ok(())
    }

    /// A seeded RNG for one independent purpose.
    pub(crate) fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// `tasks_per_request` tasks with Poisson arrivals and uniform demands.
pub fn generate_workload(config: &SimConfig, stream: u64) -> Result<Vec<Task>> {
    config.validate()?;
    let mut rng = config.rng(stream);
    let gaps = Exp::new(1.0 / config.mean_interarrival_ms).map_err(|e| Error::validation(e.to_string()))?;
    let (lo, hi) = config.task_time_range;
    let mut t = 0.0;
    let mut tasks = Vec::with_capacity(config.tasks_per_request);
    for id in 0..config.tasks_per_request {
        if id > 0 {
            t += gaps.sample(&mut rng);
        }
        tasks.push(Task {
            id,
            arrival_ms: t,
            demand_ms: rng.random_range(lo..hi),
        });
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_is_seeded_and_bounded() {
        let config = SimConfig {
            seed: 7,
            ..SimConfig::default()
        };
        let a = generate_workload(&config, 0).unwrap();
        assert_eq!(a, generate_workload(&config, 0).unwrap());
        assert_ne!(a, generate_workload(&config, 1).unwrap());
        assert_eq!(a.len(), 100);
        assert!(a.iter().all(|t| (0.1..1.0).contains(&t.demand_ms)));
        assert!(a.windows(2).all(|w| w[0].arrival_ms <= w[1].arrival_ms));
    }

    #[test]
    fn bad_range_rejected() {
        let config = SimConfig {
            task_time_range: (1.0, 0.1),
            ..SimConfig::default()
        };
        assert!(config.validate().is_err());
        let config = SimConfig {
            hosts_per_provider: 0,
            ..SimConfig::default()
        };
        assert!(config.validate().is_err());
    }
}
