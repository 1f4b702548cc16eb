//! Discrete-time queue with constant arrivals and on/off service, used as the
//! empirical reference for the delay bound.

use rand::Rng;
use serde::Serialize;

use super::snc::{ArrivalModel, ServiceModel};
use crate::monte_carlo::chunk_rng;

const BURN_IN: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueSimulation {
    pub frames: usize,
    /// Violation frequency for deadlines `1..=max_deadline`.
    pub violation_frequency: Vec<f64>,
}

impl QueueSimulation {
    pub fn std_error(&self, w: u32) -> f64 {
        let p = self.violation_frequency[w as usize - 1];
        (p * (1.0 - p) / self.frames as f64).sqrt()
    }
}

/// Bits in the backlog at the end of frame `t` are late by `w` frames when the
/// service of frames `t+1..=t+w` does not cover them.
pub fn simulate_delay_violations(
    arrival: &ArrivalModel,
    service: &ServiceModel,
    frames: usize,
    max_deadline: u32,
    seed: u64,
) -> QueueSimulation {
    let w_max = max_deadline as usize;
    let total = BURN_IN + frames + w_max;
    let mut rng = chunk_rng(seed, 0);
    let served: Vec<f64> = (0..total)
        .map(|_| {
            if rng.random::<f64>() < service.outage_probability {
                0.0
            } else {
                service.frame_bits()
            }
        })
        .collect();
    let mut backlog = 0.0f64;
    let mut late = vec![0u64; w_max];
    for t in 0..BURN_IN + frames {
        backlog = (backlog + arrival.bits_per_frame - served[t]).max(0.0);
        if t < BURN_IN {
            continue;
        }
        let mut ahead = 0.0;
        for w in 1..=w_max {
            ahead += served[t + w];
            if ahead < backlog {
                late[w - 1] += 1;
            }
        }
    }
    QueueSimulation {
        frames,
        violation_frequency: late.iter().map(|&c| c as f64 / frames as f64).collect(),
    }
}
