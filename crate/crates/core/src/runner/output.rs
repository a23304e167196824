use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{EventList, PowerSpectrum, TransitionReport};
use crate::error::Result;
use crate::qsd::{FineSample, StrobeSample};

pub const STROBE_HEADER: [&str; 9] = [
    "period",
    "t",
    "q_exp",
    "p_exp",
    "q_scaled",
    "p_scaled",
    "energy",
    "norm_deficit_max",
    "leakage_max",
];
pub const FINE_HEADER: [&str; 4] = ["t", "q_exp", "p_exp", "energy"];
pub const SPECTRUM_HEADER: [&str; 3] = ["omega", "S_raw", "S_smooth"];
pub const EVENTS_HEADER: [&str; 4] = ["t", "direction", "energy", "below_barrier"];
pub const SECTION_HEADER: [&str; 5] = ["period", "q_exp", "p_exp", "q_scaled", "p_scaled"];
pub const REPORT_HEADER: [&str; 6] = [
    "beta",
    "R",
    "interwell_count",
    "tunneling_count",
    "section_rms",
    "verdict",
];

/// A written file and the SHA-256 of its bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv_bytes<H, R, I>(header: &[H], rows: I) -> Result<Vec<u8>>
where
    H: AsRef<[u8]>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
    I: IntoIterator<Item = R>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes `bytes` to `dir/name` and records its checksum.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileRecord> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, bytes)?;
    Ok(FileRecord {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
    })
}

/// Shortest round-trip decimal; exponent form outside `[1e−5, 1e16)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn strobe_csv(strobes: &[StrobeSample], beta: f64) -> Result<Vec<u8>> {
    csv_bytes(
        &STROBE_HEADER,
        strobes.iter().map(|s| {
            [
                s.period.to_string(),
                num(s.t),
                num(s.q),
                num(s.p),
                num(beta * s.q),
                num(beta * s.p),
                num(s.energy),
                num(s.norm_deficit_max),
                num(s.leakage_max),
            ]
        }),
    )
}

pub fn fine_csv(fine: &[FineSample]) -> Result<Vec<u8>> {
    csv_bytes(
        &FINE_HEADER,
        fine.iter().map(|s| [num(s.t), num(s.q), num(s.p), num(s.energy)]),
    )
}

pub fn spectrum_csv(spectrum: &PowerSpectrum) -> Result<Vec<u8>> {
    csv_bytes(
        &SPECTRUM_HEADER,
        spectrum
            .omega
            .iter()
            .zip(&spectrum.raw)
            .zip(&spectrum.smooth)
            .map(|((w, r), s)| [num(*w), num(*r), num(*s)]),
    )
}

pub fn events_csv(events: &EventList) -> Result<Vec<u8>> {
    csv_bytes(
        &EVENTS_HEADER,
        events.events.iter().map(|e| {
            [
                num(e.t),
                e.direction.to_string(),
                num(e.energy),
                e.below_barrier.to_string(),
            ]
        }),
    )
}

/// Section rows `(period, Q, P)` with scaled columns `β·Q`, `β·P`.
pub fn section_csv(rows: &[(usize, f64, f64)], beta: f64) -> Result<Vec<u8>> {
    csv_bytes(
        &SECTION_HEADER,
        rows.iter().map(|&(k, q, p)| {
            [k.to_string(), num(q), num(p), num(beta * q), num(beta * p)]
        }),
    )
}

pub fn report_csv(report: &TransitionReport) -> Result<Vec<u8>> {
    let verdict = report.verdict.as_str();
    csv_bytes(
        &REPORT_HEADER,
        report.rows.iter().map(|r| {
            [
                num(r.beta),
                num(r.r),
                r.interwell_count.to_string(),
                r.tunneling_count.to_string(),
                num(r.section_rms),
                verdict.to_string(),
            ]
        }),
    )
}

/// Generic CSV with a caller-supplied header.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    csv_bytes(header, rows.iter())
}

pub(crate) fn fmt_num(x: f64) -> String {
    num(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_are_exact() {
        let s = String::from_utf8(strobe_csv(&[], 0.3).unwrap()).unwrap();
        assert_eq!(
            s,
            "period,t,q_exp,p_exp,q_scaled,p_scaled,energy,norm_deficit_max,leakage_max\n"
        );
        let f = String::from_utf8(fine_csv(&[]).unwrap()).unwrap();
        assert_eq!(f, "t,q_exp,p_exp,energy\n");
        let e = String::from_utf8(events_csv(&EventList::default()).unwrap()).unwrap();
        assert_eq!(e, "t,direction,energy,below_barrier\n");
        let sec = String::from_utf8(section_csv(&[], 1.0).unwrap()).unwrap();
        assert_eq!(sec, "period,q_exp,p_exp,q_scaled,p_scaled\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn checksum_of_known_bytes() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
