//! Egalitarian processor-sharing over a pool of identical hosts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Remaining work below this is treated as finished.
const DONE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub arrival_ms: f64,
    pub demand_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub id: usize,
    pub host: usize,
    pub arrival_ms: f64,
    pub demand_ms: f64,
    pub completion_ms: f64,
    /// Processor time the task actually received.
    pub processor_ms: f64,
}

impl TaskOutcome {
    pub fn response_ms(&self) -> f64 {
        self.completion_ms - self.arrival_ms
    }

    pub fn slowdown(&self) -> f64 {
        self.response_ms() / self.demand_ms
    }
}

struct Running {
    slot: usize,
    remaining: f64,
}

/// Runs every task to completion. Each arriving task joins the host with the
/// fewest running tasks (lowest index on ties); a host with `n` running tasks
/// serves each at rate `1/n`. Outcomes are returned in task order.
pub fn simulate_time_shared(tasks: &[Task], hosts: usize) -> Result<Vec<TaskOutcome>> {
    if hosts == 0 {
        return Err(Error::validation("hosts must be at least 1"));
    }
    for t in tasks {
        if !(t.demand_ms > 0.0 && t.demand_ms.is_finite() && t.arrival_ms.is_finite() && t.arrival_ms >= 0.0) {
            return Err(Error::validation(format!("task {}: bad arrival or demand", t.id)));
        }
    }
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by(|&a, &b| tasks[a].arrival_ms.total_cmp(&tasks[b].arrival_ms).then(a.cmp(&b)));

    let mut outcomes: Vec<TaskOutcome> = tasks
        .iter()
        .map(|t| TaskOutcome {
            id: t.id,
            host: 0,
            arrival_ms: t.arrival_ms,
            demand_ms: t.demand_ms,
            completion_ms: f64::NAN,
            processor_ms: 0.0,
        })
        .collect();
    let mut running: Vec<Vec<Running>> = (0..hosts).map(|_| Vec::new()).collect();
    let mut now = 0.0_f64;
    let mut next = 0;
    let mut active = 0usize;

    while next < order.len() || active > 0 {
        let next_arrival = order.get(next).map(|&i| tasks[i].arrival_ms).unwrap_or(f64::INFINITY);
        let next_completion = running
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| {
                let min_remaining = r.iter().map(|t| t.remaining).fold(f64::INFINITY, f64::min);
                now + min_remaining * r.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let t_next = next_arrival.min(next_completion).max(now);

        let dt = t_next - now;
        if dt > 0.0 {
            for host in running.iter_mut() {
                let share = dt / host.len().max(1) as f64;
                for task in host.iter_mut() {
                    let used = share.min(task.remaining);
                    task.remaining -= used;
                    outcomes[task.slot].processor_ms += used;
                }
            }
        }
        now = t_next;

        for (h, host) in running.iter_mut().enumerate() {
            let before = host.len();
            host.retain(|task| {
                if task.remaining <= DONE_EPS {
                    let out = &mut outcomes[task.slot];
                    out.processor_ms += task.remaining;
                    out.completion_ms = now;
                    out.host = h;
                    false
                } else {
                    true
                }
            });
            active -= before - host.len();
        }

        while next < order.len() && tasks[order[next]].arrival_ms <= now {
            let slot = order[next];
            let h = (0..hosts).min_by_key(|&h| (running[h].len(), h)).expect("hosts >= 1");
            outcomes[slot].host = h;
            running[h].push(Running {
                slot,
                remaining: tasks[slot].demand_ms,
            });
            active += 1;
            next += 1;
        }
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: usize, arrival_ms: f64, demand_ms: f64) -> Task {
        Task { id, arrival_ms, demand_ms }
    }

    #[test]
    fn lone_task_runs_at_full_speed() {
        let out = simulate_time_shared(&[task(0, 0.0, 0.37)], 1).unwrap();
        assert_eq!(out[0].response_ms(), 0.37);
    }

    #[test]
    fn two_equal_tasks_share_one_host() {
        let out = simulate_time_shared(&[task(0, 0.0, 0.4), task(1, 0.0, 0.4)], 1).unwrap();
        assert!((out[0].completion_ms - 0.8).abs() < 1e-12);
        assert!((out[1].completion_ms - 0.8).abs() < 1e-12);
    }

    #[test]
    fn unequal_tasks_share_then_finish_alone() {
        // Both run at half speed until the short one ends at 0.4; the long one
        // then has 0.6 left at full speed.
        let out = simulate_time_shared(&[task(0, 0.0, 0.2), task(1, 0.0, 0.8)], 1).unwrap();
        assert!((out[0].completion_ms - 0.4).abs() < 1e-12);
        assert!((out[1].completion_ms - 1.0).abs() < 1e-12);
    }

    #[test]
    fn late_arrival_joins_running_host() {
        let out = simulate_time_shared(&[task(0, 0.0, 1.0), task(1, 0.5, 0.25)], 1).unwrap();
        assert!((out[1].completion_ms - 1.0).abs() < 1e-12);
        assert!((out[0].completion_ms - 1.25).abs() < 1e-12);
    }

    #[test]
    fn spreads_over_hosts() {
        let out = simulate_time_shared(&[task(0, 0.0, 0.4), task(1, 0.0, 0.4)], 2).unwrap();
        assert_eq!(out[0].host, 0);
        assert_eq!(out[1].host, 1);
        assert!(out.iter().all(|o| (o.completion_ms - 0.4).abs() < 1e-12));
    }

    #[test]
    fn conserves_service_demand() {
        let tasks: Vec<Task> = (0..200)
            .map(|i| task(i, (i / 7) as f64 * 0.13, 0.1 + (i % 10) as f64 * 0.09))
            .collect();
        let out = simulate_time_shared(&tasks, 3).unwrap();
        let demand: f64 = tasks.iter().map(|t| t.demand_ms).sum();
        let used: f64 = out.iter().map(|o| o.processor_ms).sum();
        assert!((demand - used).abs() < 1e-9);
        assert!(out.iter().all(|o| o.response_ms() >= o.demand_ms - 1e-12));
    }

    #[test]
    fn zero_hosts_rejected() {
        assert!(simulate_time_shared(&[task(0, 0.0, 0.1)], 0).is_err());
    }
}
