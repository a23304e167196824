//! Poincaré sections, low-frequency spectra, interwell-event detection and
//! the per-β transition report.

mod events;
mod report;
mod section;
mod spectrum;

pub use events::{
    classical_series, detect_crossings, interwell_events, tunneling_events, EventList,
    InterwellEvent, DEFAULT_THRESHOLD_FRACTION,
};
pub use report::{transition_report, BetaSummary, TransitionReport, Verdict, ORDERING_THRESHOLD};
pub use section::{strobe_section, PoincareSection, MIN_SECTION_POINTS};
pub use spectrum::{
    low_freq_rise, periodogram, periodogram_sampled, spectrum_and_rise, spline_smooth, windowed,
    Bands, PowerSpectrum, Window, DEFAULT_KNOT_COUNT, LOG_FLOOR,
};
