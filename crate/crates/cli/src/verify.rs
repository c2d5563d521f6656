//! Exhaustive comparison of the closed-form conditionals against the
//! brute-force Fock-space oracle.

use mdiqkd::conditionals::{
    success_event_probability, BeamSplitterInput, Polarization, ORIENTATIONS,
};
use mdiqkd::detector::{EventPair, SUCCESS_EVENTS};
use mdiqkd::oracle::{oracle_event_prob, DEFAULT_ORACLE_CEILING};

use crate::config::ConfigError;
use crate::RunError;

/// Largest allowed closed-form-vs-oracle deviation.
pub const VERIFY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct Mismatch {
    pub dark: f64,
    pub k1: usize,
    pub k2: usize,
    pub alpha: Polarization,
    pub beta: Polarization,
    pub event: EventPair,
    pub closed: f64,
    pub oracle: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct DarkSummary {
    pub dark: f64,
    pub comparisons: usize,
    pub max_abs_diff: f64,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub max_photons: usize,
    pub tolerance: f64,
    pub summaries: Vec<DarkSummary>,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn total_comparisons(&self) -> usize {
        self.summaries.iter().map(|s| s.comparisons).sum()
    }

    pub fn max_abs_diff(&self) -> f64 {
        self.summaries
            .iter()
            .map(|s| s.max_abs_diff)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn render(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(
            out,
            "verify: photon numbers up to ({max}, {max}) per side, tolerance {tol:e}",
            max = self.max_photons,
            tol = self.tolerance
        )?;
        for s in &self.summaries {
            writeln!(
                out,
                "  dark = {:<8e} {} comparisons, max |closed - oracle| = {:.3e}",
                s.dark, s.comparisons, s.max_abs_diff
            )?;
        }
        for m in self.mismatches.iter().take(20) {
            writeln!(
                out,
                "  MISMATCH d={} k=({},{}) pols=({:?},{:?}) event {}: closed {:e} oracle {:e}",
                m.dark, m.k1, m.k2, m.alpha, m.beta, m.event, m.closed, m.oracle
            )?;
        }
        if self.mismatches.len() > 20 {
            writeln!(out, "  ... and {} more", self.mismatches.len() - 20)?;
        }
        writeln!(
            out,
            "verify: {} comparisons total, {}",
            self.total_comparisons(),
            if self.passed() {
                "all passed"
            } else {
                "FAILED"
            }
        )?;
        Ok(())
    }
}

/// Compares every `(k1, k2, orientation, success event, dark rate)` with
/// `k1, k2 <= max_photons` against the oracle.
pub fn run_verify(max_photons: usize, darks: &[f64]) -> Result<VerifyReport, RunError> {
    if 2 * max_photons > DEFAULT_ORACLE_CEILING {
        return Err(RunError::Config(ConfigError::Invalid {
            field: "--max-photons",
            message: format!(
                "{max_photons} photons per side exceeds the oracle ceiling of {DEFAULT_ORACLE_CEILING} total"
            ),
        }));
    }
    if darks.is_empty() {
        return Err(RunError::Config(ConfigError::Invalid {
            field: "--dark",
            message: "at least one dark rate is required".into(),
        }));
    }
    let mut summaries = Vec::new();
    let mut mismatches = Vec::new();
    for &dark in darks {
        if !(0.0..1.0).contains(&dark) {
            return Err(RunError::Config(ConfigError::Invalid {
                field: "--dark",
                message: format!("{dark} is outside [0, 1)"),
            }));
        }
        let mut comparisons = 0;
        let mut max_abs_diff = 0.0f64;
        for k1 in 0..=max_photons {
            for k2 in 0..=max_photons {
                for &(alpha, beta) in &ORIENTATIONS {
                    for &event in &SUCCESS_EVENTS {
                        let closed = success_event_probability(
                            event,
                            BeamSplitterInput::new(k1, k2, alpha, beta),
                            dark,
                        )?;
                        let oracle = oracle_event_prob(event, k1, k2, alpha, beta, dark)?;
                        let diff = (closed - oracle).abs();
                        comparisons += 1;
                        max_abs_diff = max_abs_diff.max(diff);
                        if diff > VERIFY_TOLERANCE {
                            mismatches.push(Mismatch {
                                dark,
                                k1,
                                k2,
                                alpha,
                                beta,
                                event,
                                closed,
                                oracle,
                            });
                        }
                    }
                }
            }
        }
        summaries.push(DarkSummary {
            dark,
            comparisons,
            max_abs_diff,
        });
    }
    Ok(VerifyReport {
        max_photons,
        tolerance: VERIFY_TOLERANCE,
        summaries,
        mismatches,
    })
}
