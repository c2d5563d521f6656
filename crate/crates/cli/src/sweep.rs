//! The sweep engine: per loss point, optimize the signal intensity, collect
//! the gain table, decoy bounds, reference values and key rates.

use mdiqkd::channel::ChannelParams;
use mdiqkd::conditionals::{Basis, ConditionalTable};
use mdiqkd::decoy::{
    build_gain_table, e11_upper_bound, optimize_mu_prime, three_intensity_key_rate,
    true_single_pair_values, y11_lower_bound, E11Bound, GainTable, IntensityLevel, KeyRate,
    ThreeIntensityConfig,
};
use mdiqkd::ModelError;
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::RunError;

/// Per-point conditions worth surfacing next to the numbers. Rendered in a
/// fixed order, pipe-separated, empty when nothing is flagged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RowFlags {
    pub y11_z_ill_conditioned: bool,
    pub y11_x_ill_conditioned: bool,
    pub e11_undefined: bool,
    pub e11_overflow: bool,
    pub r3_below_threshold: bool,
    pub rinf_below_threshold: bool,
}

impl std::fmt::Display for RowFlags {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tokens = [
            (self.y11_z_ill_conditioned, "y11_z_ill_conditioned"),
            (self.y11_x_ill_conditioned, "y11_x_ill_conditioned"),
            (self.e11_undefined, "e11_undefined"),
            (self.e11_overflow, "e11_overflow"),
            (self.r3_below_threshold, "r3_below_threshold"),
            (self.rinf_below_threshold, "rinf_below_threshold"),
        ];
        let mut first = true;
        for (set, name) in tokens {
            if set {
                if !first {
                    f.write_str("|")?;
                }
                f.write_str(name)?;
                first = false;
            }
        }
        Ok(())
    }
}

impl RowFlags {
    /// Whether the decoy analysis itself failed at this point (as opposed to
    /// the key rate merely being zero).
    pub fn conditioning_failure(&self) -> bool {
        self.y11_z_ill_conditioned || self.y11_x_ill_conditioned || self.e11_undefined
    }
}

/// One CSV row: everything observed and derived at a single total loss.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub loss_db: f64,
    pub mu_prime_star: f64,
    pub s_z_signal: f64,
    pub e_z_signal: Option<f64>,
    pub s_x_signal: f64,
    pub e_x_signal: Option<f64>,
    pub y11_z_true: f64,
    pub y11_z_lower: Option<f64>,
    pub y11_x_true: f64,
    pub y11_x_lower: Option<f64>,
    pub e11_x_true: Option<f64>,
    pub e11_x_upper: Option<f64>,
    pub r_3decoy: f64,
    pub r_infinite: f64,
    pub flags: RowFlags,
}

/// Everything the `point` command dumps beyond the row itself.
pub struct PointReport {
    pub row: SweepRow,
    pub table: GainTable<f64>,
    pub chosen: ThreeIntensityConfig<f64>,
    /// The phase-error bound numerator in its plain four-term form divided
    /// by `Y11` alone (diagnostic, not the bound).
    pub e11_as_printed: Option<f64>,
    /// The yield-bound denominator `a1' a1 (b2' b1 - b2 b1')`; positivity is
    /// the bound's validity condition.
    pub y11_denominator: f64,
}

struct CandidateEval {
    mu_prime: f64,
    table: GainTable<f64>,
    y11_z_lower: Option<f64>,
    y11_x_lower: Option<f64>,
    e11: Option<E11Bound<f64>>,
    r3: KeyRate<f64>,
    flags: RowFlags,
}

/// Prebuilt per-run state: the source states at every candidate intensity
/// and the conditional-probability kernel for the configured dark rate.
pub struct SweepEngine {
    config: SweepConfig,
    mu_prime_grid: Vec<f64>,
    candidates: Vec<ThreeIntensityConfig<f64>>,
    kernel: ConditionalTable<f64>,
}

impl SweepEngine {
    pub fn new(config: SweepConfig) -> Result<Self, RunError> {
        config.validate()?;
        let alice = config.alice_spec();
        let bob = config.bob_spec();
        let mu_prime_grid = config.mu_prime_grid();
        let candidates = mu_prime_grid
            .iter()
            .map(|&mu_prime| {
                ThreeIntensityConfig::from_sources(
                    &alice,
                    &bob,
                    config.decoy.mu,
                    mu_prime,
                    config.model.n_max,
                )
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let max_cutoff = candidates
            .iter()
            .map(ThreeIntensityConfig::max_cutoff)
            .max()
            .expect("grid is non-empty");
        let kernel = ConditionalTable::new(config.detector.dark_rate, max_cutoff, max_cutoff)?;
        Ok(Self {
            config,
            mu_prime_grid,
            candidates,
            kernel,
        })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }

    fn channel_at(&self, total_loss_db: f64) -> Result<ChannelParams<f64>, ModelError> {
        let split = self.config.channel.loss_split_a;
        ChannelParams::new(
            total_loss_db * split,
            total_loss_db * (1.0 - split),
            self.config.detector.efficiency,
        )
    }

    fn eval_candidate(
        &self,
        index: usize,
        channel: &ChannelParams<f64>,
    ) -> Result<CandidateEval, RunError> {
        let cfg3 = &self.candidates[index];
        let dark = self.config.detector.dark_rate;
        let e_d = self.config.model.misalignment;
        let table = build_gain_table(cfg3, channel, dark, e_d, &self.kernel)?;
        let mut flags = RowFlags::default();
        let y11_z_lower = match y11_lower_bound(&table, cfg3, Basis::Z) {
            Ok(v) => Some(v),
            Err(ModelError::IllConditionedDecoy { .. }) => {
                flags.y11_z_ill_conditioned = true;
                None
            }
            Err(e) => return Err(e.into()),
        };
        let y11_x_lower = match y11_lower_bound(&table, cfg3, Basis::X) {
            Ok(v) => Some(v),
            Err(ModelError::IllConditionedDecoy { .. }) => {
                flags.y11_x_ill_conditioned = true;
                None
            }
            Err(e) => return Err(e.into()),
        };
        let e11 = match y11_x_lower {
            Some(y) if y > 0.0 => Some(e11_upper_bound(&table, cfg3, y)?),
            _ => {
                flags.e11_undefined = true;
                None
            }
        };
        if let Some(bound) = &e11 {
            flags.e11_overflow = bound.overflow;
        }
        let r3 = match (y11_z_lower, &e11) {
            (Some(y_z), Some(bound)) => {
                three_intensity_key_rate(&table, cfg3, y_z, bound.value, self.config.decoy.f_ec)?
            }
            _ => KeyRate {
                rate: 0.0,
                below_threshold: true,
            },
        };
        flags.r3_below_threshold = r3.below_threshold;
        Ok(CandidateEval {
            mu_prime: self.mu_prime_grid[index],
            table,
            y11_z_lower,
            y11_x_lower,
            e11,
            r3,
            flags,
        })
    }

    fn evaluate_point_inner(&self, total_loss_db: f64) -> Result<(SweepRow, usize), RunError> {
        let channel = self.channel_at(total_loss_db)?;
        let dark = self.config.detector.dark_rate;
        let e_d = self.config.model.misalignment;
        let mu = self.config.decoy.mu;

        let (y11_z_true, _) = true_single_pair_values(&channel, dark, e_d, Basis::Z)?;
        let (y11_x_true, e11_x_true) = true_single_pair_values(&channel, dark, e_d, Basis::X)?;

        let evals = (0..self.candidates.len())
            .map(|i| self.eval_candidate(i, &channel))
            .collect::<Result<Vec<_>, RunError>>()?;

        // Signal intensity maximizing the three-intensity rate; the grid scan
        // visits candidates in ascending order, matching `evals`.
        let mut cursor = 0;
        let choice = optimize_mu_prime(mu, &self.mu_prime_grid, |mu_prime| {
            let eval = &evals[cursor];
            debug_assert_eq!(eval.mu_prime, mu_prime);
            cursor += 1;
            Ok(eval.r3)
        })?;
        let chosen_index = self
            .mu_prime_grid
            .iter()
            .position(|&g| g == choice.mu_prime)
            .expect("chosen intensity is on the grid");
        let chosen = &evals[chosen_index];

        // The infinite-decoy reference rate gets its own optimum over the
        // same grid; it only shares the per-candidate signal statistics.
        let (r_infinite, rinf_below) = match e11_x_true {
            Some(e11_true) => {
                let mut cursor = 0;
                let choice = optimize_mu_prime(mu, &self.mu_prime_grid, |mu_prime| {
                    let eval = &evals[cursor];
                    debug_assert_eq!(eval.mu_prime, mu_prime);
                    cursor += 1;
                    let signal =
                        eval.table
                            .basis(IntensityLevel::Signal, IntensityLevel::Signal, Basis::Z);
                    let signal_error = signal
                        .adjusted_error
                        .ok_or(ModelError::UndefinedErrorRate)?;
                    let cfg3 = &self.candidates[cursor - 1];
                    mdiqkd::decoy::key_rate(
                        y11_z_true,
                        e11_true,
                        cfg3.a_prime(1) * cfg3.b_prime(1),
                        signal.gain,
                        signal_error,
                        self.config.decoy.f_ec,
                    )
                    .map_err(Into::into)
                })?;
                (choice.rate.rate, choice.rate.below_threshold)
            }
            None => (0.0, true),
        };

        let signal_z = chosen
            .table
            .basis(IntensityLevel::Signal, IntensityLevel::Signal, Basis::Z);
        let signal_x = chosen
            .table
            .basis(IntensityLevel::Signal, IntensityLevel::Signal, Basis::X);
        let mut flags = chosen.flags;
        flags.rinf_below_threshold = rinf_below;
        let row = SweepRow {
            loss_db: total_loss_db,
            mu_prime_star: choice.mu_prime,
            s_z_signal: signal_z.gain,
            e_z_signal: signal_z.adjusted_error,
            s_x_signal: signal_x.gain,
            e_x_signal: signal_x.adjusted_error,
            y11_z_true,
            y11_z_lower: chosen.y11_z_lower,
            y11_x_true,
            y11_x_lower: chosen.y11_x_lower,
            e11_x_true,
            e11_x_upper: chosen.e11.as_ref().map(|b| b.value),
            r_3decoy: chosen.r3.rate,
            r_infinite,
            flags,
        };
        Ok((row, chosen_index))
    }

    /// One sweep row at the given total loss.
    pub fn evaluate_point(&self, total_loss_db: f64) -> Result<SweepRow, RunError> {
        self.evaluate_point_inner(total_loss_db).map(|(row, _)| row)
    }

    /// The row plus the full gain table and bound diagnostics at the chosen
    /// signal intensity.
    pub fn evaluate_point_detailed(&self, total_loss_db: f64) -> Result<PointReport, RunError> {
        let (row, chosen_index) = self.evaluate_point_inner(total_loss_db)?;
        let channel = self.channel_at(total_loss_db)?;
        let eval = self.eval_candidate(chosen_index, &channel)?;
        let cfg3 = self.candidates[chosen_index].clone();
        let y11_denominator = cfg3.a_prime(1)
            * cfg3.a(1)
            * (cfg3.b_prime(2) * cfg3.b(1) - cfg3.b(2) * cfg3.b_prime(1));
        Ok(PointReport {
            row,
            table: eval.table,
            chosen: cfg3,
            e11_as_printed: eval.e11.as_ref().map(|b| b.as_printed),
            y11_denominator,
        })
    }

    /// All loss points, computed in parallel, assembled in grid order.
    pub fn run(&self) -> Result<Vec<SweepRow>, RunError> {
        self.config
            .loss_grid()
            .par_iter()
            .map(|&loss| self.evaluate_point(loss))
            .collect()
    }
}

/// Parses nothing, validates everything: the one-call entry the binary uses.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, RunError> {
    SweepEngine::new(config.clone())?.run()
}
