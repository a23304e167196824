use serde::Serialize;

use crate::error::{Error, Result};
use crate::qsd::TrajectoryRecord;

/// Fewer post-transient points than this makes a section unusable.
pub const MIN_SECTION_POINTS: usize = 50;

/// Strobed `(⟨Q⟩, ⟨P⟩)` points, raw and scaled by `β` to classical units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareSection {
    /// Drive-period index of each point.
    pub periods: Vec<usize>,
    pub points: Vec<(f64, f64)>,
    pub scaled_points: Vec<(f64, f64)>,
    pub beta: f64,
    pub strobe_period: f64,
}

impl PoincareSection {
    pub fn from_points(
        periods: Vec<usize>,
        points: Vec<(f64, f64)>,
        beta: f64,
        strobe_period: f64,
    ) -> Result<Self> {
        if points.len() < MIN_SECTION_POINTS {
            return Err(Error::InsufficientData(format!(
                "{} post-transient section points (need {MIN_SECTION_POINTS})",
                points.len()
            )));
        }
        let scaled_points = points.iter().map(|&(q, p)| (beta * q, beta * p)).collect();
        Ok(Self {
            periods,
            points,
            scaled_points,
            beta,
            strobe_period,
        })
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// RMS distance of the scaled points from their centroid.
    pub fn rms_dispersion(&self) -> f64 {
        let n = self.scaled_points.len() as f64;
        let (mq, mp) = self
            .scaled_points
            .iter()
            .fold((0.0, 0.0), |(a, b), &(q, p)| (a + q / n, b + p / n));
        let ms = self
            .scaled_points
            .iter()
            .map(|&(q, p)| (q - mq).powi(2) + (p - mp).powi(2))
            .sum::<f64>()
            / n;
        ms.sqrt()
    }

    /// Number of groups of scaled points whose members lie within `tol` of
    /// the first point of the group.
    pub fn cluster_count(&self, tol: f64) -> usize {
        let mut centers: Vec<(f64, f64)> = Vec::new();
        for &(q, p) in &self.scaled_points {
            if !centers.iter().any(|&(cq, cp)| (q - cq).hypot(p - cp) <= tol) {
                centers.push((q, p));
            }
        }
        centers.len()
    }
}

/// Drops the first `transient_skip` periods and returns the remaining strobes.
pub fn strobe_section(record: &TrajectoryRecord, transient_skip: usize) -> Result<PoincareSection> {
    let kept: Vec<_> = record
        .strobes
        .iter()
        .filter(|s| s.period > transient_skip)
        .collect();
    PoincareSection::from_points(
        kept.iter().map(|s| s.period).collect(),
        kept.iter().map(|s| (s.q, s.p)).collect(),
        record.params.beta,
        record.params.period(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::qsd::StrobeSample;

    fn synthetic(q: impl Fn(f64) -> f64, p: impl Fn(f64) -> f64, periods: usize, beta: f64) -> TrajectoryRecord {
        let params = ModelParams::new(0.3, 0.3, 1.0, beta).unwrap();
        let strobes = (1..=periods)
            .map(|k| {
                let t = k as f64 * params.period();
                StrobeSample {
                    period: k,
                    t,
                    q: q(t),
                    p: p(t),
                    energy: 0.0,
                    norm_deficit_max: 0.0,
                    leakage_max: 0.0,
                }
            })
            .collect();
        TrajectoryRecord {
            params,
            seed: 0,
            cutoff: 8,
            steps_per_period: 256,
            transient_periods: 0,
            strobes,
            fine: vec![],
            fine_samples_per_period: 1,
            frames: vec![],
        }
    }

    #[test]
    fn period_one_motion_collapses_to_a_point() {
        let rec = synthetic(f64::cos, |t| -t.sin(), 600, 0.3);
        let s = strobe_section(&rec, 100).unwrap();
        assert_eq!(s.count(), 500);
        let (q0, p0) = s.points[0];
        assert!(s.points.iter().all(|&(q, p)| (q - q0).abs() < 1e-9 && (p - p0).abs() < 1e-9));
        assert_eq!(s.cluster_count(1e-6), 1);
    }

    #[test]
    fn period_two_motion_has_two_clusters() {
        let rec = synthetic(|t| (0.5 * t).cos(), |t| (0.5 * t).sin() + 0.1, 300, 1.0);
        let s = strobe_section(&rec, 100).unwrap();
        assert_eq!(s.cluster_count(1e-6), 2);
    }

    #[test]
    fn scaled_points_are_beta_times_raw() {
        let rec = synthetic(|t| 3.0 * t.sin(), |t| 0.2 * t, 80, 0.3);
        let s = strobe_section(&rec, 10).unwrap();
        for (raw, scaled) in s.points.iter().zip(&s.scaled_points) {
            assert_eq!(scaled.0, 0.3 * raw.0);
            assert_eq!(scaled.1, 0.3 * raw.1);
        }
    }

    #[test]
    fn short_sections_are_rejected() {
        let rec = synthetic(f64::cos, f64::sin, 120, 1.0);
        assert!(matches!(strobe_section(&rec, 100), Err(Error::InsufficientData(_))));
    }
}
