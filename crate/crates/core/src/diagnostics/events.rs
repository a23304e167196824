use serde::{Deserialize, Serialize};

use crate::classical::ClassicalState;
use crate::qsd::{FineSample, TrajectoryRecord};

/// Default hysteresis level in scaled units (wells at ±1).
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterwellEvent {
    /// Interpolated time of the zero crossing of `β⟨Q⟩`.
    pub t: f64,
    /// `+1` for left-to-right, `−1` for right-to-left.
    pub direction: i8,
    /// `⟨H_D⟩` interpolated to the zero crossing.
    pub energy: f64,
    pub below_barrier: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventList {
    pub events: Vec<InterwellEvent>,
}

impl EventList {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Hysteresis detector on `s = β⟨Q⟩`: an event fires when `s` passes from
/// above `+h` to below `−h` or back.
pub fn detect_crossings(samples: &[FineSample], beta: f64, h: f64) -> EventList {
    let mut events = Vec::new();
    let mut side = 0i8;
    // Index of the last sample whose sign differs from its predecessor.
    let mut last_sign_change: Option<usize> = None;
    for i in 0..samples.len() {
        let s = beta * samples[i].q;
        if i > 0 {
            let prev = beta * samples[i - 1].q;
            if (prev > 0.0) != (s > 0.0) || s == 0.0 {
                last_sign_change = Some(i);
            }
        }
        let current = if s > h {
            1
        } else if s < -h {
            -1
        } else {
            side
        };
        if side != 0 && current != side {
            let (t, energy) = match last_sign_change {
                Some(j) if j > 0 => {
                    let (a, b) = (&samples[j - 1], &samples[j]);
                    let (sa, sb) = (beta * a.q, beta * b.q);
                    let f = if sa == sb { 1.0 } else { sa / (sa - sb) };
                    (a.t + f * (b.t - a.t), a.energy + f * (b.energy - a.energy))
                }
                _ => (samples[i].t, samples[i].energy),
            };
            events.push(InterwellEvent {
                t,
                direction: current,
                energy,
                below_barrier: energy < 0.0,
            });
        }
        side = current;
    }
    EventList { events }
}

/// Interwell events of a trajectory's fine series.
pub fn interwell_events(record: &TrajectoryRecord, threshold_fraction: f64) -> EventList {
    detect_crossings(&record.fine, record.params.beta, threshold_fraction)
}

/// Events that occur with `⟨H_D⟩ < 0`, in order.
pub fn tunneling_events(events: &EventList) -> EventList {
    EventList {
        events: events.events.iter().copied().filter(|e| e.below_barrier).collect(),
    }
}

/// Classical samples as a fine series in scaled units (`β = 1`).
pub fn classical_series(samples: &[ClassicalState]) -> Vec<FineSample> {
    samples
        .iter()
        .map(|s| FineSample {
            t: s.t,
            q: s.q,
            p: s.p,
            energy: s.energy(),
        })
        .collect()
}
