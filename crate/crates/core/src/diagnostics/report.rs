use serde::Serialize;

/// Minimum difference in `R` that counts as an ordering.
pub const ORDERING_THRESHOLD: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    MonotoneDecreasing,
    NonMonotone,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::MonotoneDecreasing => "MONOTONE_DECREASING",
            Verdict::NonMonotone => "NON_MONOTONE",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-β diagnostics entering the transition report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaSummary {
    pub beta: f64,
    /// Low-frequency rise.
    pub r: f64,
    pub interwell_count: usize,
    pub tunneling_count: usize,
    /// RMS dispersion of the scaled section.
    pub section_rms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionReport {
    /// Sorted by β.
    pub rows: Vec<BetaSummary>,
    pub verdict: Verdict,
}

/// Orders the rows by β and classifies the `R(β)` profile:
///
/// * `NON_MONOTONE` if an interior β has the largest `R` and exceeds both
///   end points by more than [`ORDERING_THRESHOLD`];
/// * `MONOTONE_DECREASING` if `R` drops by more than the threshold from
///   the smallest to the largest β and never rises by more than the
///   threshold between neighbours;
/// * `INCONCLUSIVE` otherwise.
pub fn transition_report(per_beta: &[BetaSummary]) -> TransitionReport {
    let mut rows = per_beta.to_vec();
    rows.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    let verdict = classify(&rows.iter().map(|r| r.r).collect::<Vec<_>>());
    TransitionReport { rows, verdict }
}

fn classify(r: &[f64]) -> Verdict {
    if r.len() < 2 {
        return Verdict::Inconclusive;
    }
    let (first, last) = (r[0], r[r.len() - 1]);
    let (imax, rmax) = r
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if imax > 0
        && imax < r.len() - 1
        && rmax - first > ORDERING_THRESHOLD
        && rmax - last > ORDERING_THRESHOLD
    {
        return Verdict::NonMonotone;
    }
    let no_rise = r.windows(2).all(|w| w[1] - w[0] <= ORDERING_THRESHOLD);
    if first - last > ORDERING_THRESHOLD && no_rise {
        return Verdict::MonotoneDecreasing;
    }
    Verdict::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(r: &[f64], beta: &[f64]) -> Vec<BetaSummary> {
        r.iter()
            .zip(beta)
            .map(|(&r, &beta)| BetaSummary {
                beta,
                r,
                interwell_count: 0,
                tunneling_count: 0,
                section_rms: 0.0,
            })
            .collect()
    }

    #[test]
    fn monotone_profile() {
        let rep = transition_report(&rows(&[3.0, 1.5, 0.2], &[0.1, 0.3, 1.0]));
        assert_eq!(rep.verdict, Verdict::MonotoneDecreasing);
    }

    #[test]
    fn interior_maximum() {
        let rep = transition_report(&rows(&[0.2, 2.5, 0.3], &[0.1, 0.3, 1.0]));
        assert_eq!(rep.verdict, Verdict::NonMonotone);
    }

    #[test]
    fn close_values_are_inconclusive() {
        let rep = transition_report(&rows(&[0.5, 1.2, 0.9], &[0.1, 0.3, 1.0]));
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn rows_are_sorted_by_beta() {
        let rep = transition_report(&rows(&[0.3, 0.2, 2.5], &[1.0, 0.1, 0.3]));
        assert_eq!(rep.rows.iter().map(|r| r.beta).collect::<Vec<_>>(), vec![0.1, 0.3, 1.0]);
        assert_eq!(rep.verdict, Verdict::NonMonotone);
    }
}
