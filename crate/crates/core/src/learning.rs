//! Link-probability learning and exploration scheduling.
//!
//! [`LinkEstimator`] keeps per-link success/trial counts with a Beta prior.
//! [`DseeState`] decides, deterministically, whether each slot explores
//! (probes every link) or exploits (routes on the current estimates). The
//! ε-greedy and Thompson-sampling baselines share the same estimator.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::topology::{LinkId, Topology};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearningError {
    #[error("unknown link index {0}")]
    UnknownLink(usize),
    #[error("prior parameters must be nonnegative and finite, got ({alpha}, {beta})")]
    InvalidPrior { alpha: f64, beta: f64 },
    #[error("Thompson sampling needs strictly positive priors, got ({alpha}, {beta})")]
    NonPositivePrior { alpha: f64, beta: f64 },
    #[error("min_prob must lie in (0, 1), got {0}")]
    InvalidMinProb(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Explore,
    Exploit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkEstimator {
    successes: Vec<u64>,
    trials: Vec<u64>,
    prior_alpha: f64,
    prior_beta: f64,
    min_prob: f64,
}

impl LinkEstimator {
    pub fn new(
        link_count: usize,
        prior_alpha: f64,
        prior_beta: f64,
        min_prob: f64,
    ) -> Result<Self, LearningError> {
        let valid = |x: f64| x.is_finite() && x >= 0.0;
        if !valid(prior_alpha) || !valid(prior_beta) {
            return Err(LearningError::InvalidPrior {
                alpha: prior_alpha,
                beta: prior_beta,
            });
        }
        if !(min_prob > 0.0 && min_prob < 1.0) {
            return Err(LearningError::InvalidMinProb(min_prob));
        }
        Ok(LinkEstimator {
            successes: vec![0; link_count],
            trials: vec![0; link_count],
            prior_alpha,
            prior_beta,
            min_prob,
        })
    }

    pub fn for_topology(
        topo: &Topology,
        prior_alpha: f64,
        prior_beta: f64,
        min_prob: f64,
    ) -> Result<Self, LearningError> {
        Self::new(topo.link_count(), prior_alpha, prior_beta, min_prob)
    }

    pub fn link_count(&self) -> usize {
        self.trials.len()
    }

    fn check(&self, link: LinkId) -> Result<usize, LearningError> {
        if link.0 < self.trials.len() {
            Ok(link.0)
        } else {
            Err(LearningError::UnknownLink(link.0))
        }
    }

    pub fn update(&mut self, link: LinkId, success: bool) -> Result<(), LearningError> {
        let i = self.check(link)?;
        self.trials[i] += 1;
        self.successes[i] += u64::from(success);
        Ok(())
    }

    /// `(successes, trials)` for a link.
    pub fn counts(&self, link: LinkId) -> Result<(u64, u64), LearningError> {
        let i = self.check(link)?;
        Ok((self.successes[i], self.trials[i]))
    }

    /// Posterior-mean estimate, clamped to `[min_prob, 1]`.
    pub fn estimate(&self, link: LinkId) -> Result<f64, LearningError> {
        let i = self.check(link)?;
        Ok(self.estimate_at(i))
    }

    fn estimate_at(&self, i: usize) -> f64 {
        let num = self.successes[i] as f64 + self.prior_alpha;
        let den = self.trials[i] as f64 + self.prior_alpha + self.prior_beta;
        if den <= 0.0 {
            // No data and an improper prior: fall back to the floor.
            return self.min_prob;
        }
        (num / den).clamp(self.min_prob, 1.0)
    }

    /// Estimates for every link, indexed by [`LinkId`].
    pub fn estimates(&self) -> Vec<f64> {
        (0..self.trials.len())
            .map(|i| self.estimate_at(i))
            .collect()
    }

    pub fn min_trials(&self) -> u64 {
        self.trials.iter().copied().min().unwrap_or(0)
    }

    pub fn min_prob(&self) -> f64 {
        self.min_prob
    }

    pub fn prior(&self) -> (f64, f64) {
        (self.prior_alpha, self.prior_beta)
    }
}

/// Free-function form of [`LinkEstimator::update`].
pub fn update(est: &mut LinkEstimator, link: LinkId, success: bool) -> Result<(), LearningError> {
    est.update(link, success)
}

/// Free-function form of [`LinkEstimator::estimate`].
pub fn estimate(est: &LinkEstimator, link: LinkId) -> Result<f64, LearningError> {
    est.estimate(link)
}

/// What the exploration budget counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BudgetMode {
    /// One unit per directed link slot: `N * N_max`.
    #[default]
    PerLink,
    /// One unit per possible forwarding set: `N * 2^N_max`.
    PerHyperlink,
}

impl BudgetMode {
    pub fn unit_count(self, topo: &Topology) -> u64 {
        let n = u64::from(topo.node_count());
        let n_max = topo.max_out_degree() as u32;
        match self {
            BudgetMode::PerLink => n.saturating_mul(u64::from(n_max)),
            BudgetMode::PerHyperlink => {
                n.saturating_mul(1u64.checked_shl(n_max).unwrap_or(u64::MAX))
            }
        }
    }
}

/// Deterministic exploration/exploitation sequencing.
///
/// Slot `t` explores iff the number of earlier exploration slots is below
/// `unit_count * max(1, ceil(f_scale * ln(t+1)^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DseeState {
    t: u64,
    exploration_count: u64,
    f_scale: f64,
    budget_mode: BudgetMode,
    unit_count: u64,
}

impl DseeState {
    pub fn new(topo: &Topology, f_scale: f64, budget_mode: BudgetMode) -> Self {
        Self::with_units(budget_mode.unit_count(topo), f_scale, budget_mode)
    }

    pub fn with_units(unit_count: u64, f_scale: f64, budget_mode: BudgetMode) -> Self {
        DseeState {
            t: 1,
            exploration_count: 0,
            f_scale,
            budget_mode,
            unit_count,
        }
    }

    /// The slot the next [`DseeState::step`] call decides.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn exploration_count(&self) -> u64 {
        self.exploration_count
    }

    pub fn unit_count(&self) -> u64 {
        self.unit_count
    }

    pub fn budget_mode(&self) -> BudgetMode {
        self.budget_mode
    }

    pub fn f_scale(&self) -> f64 {
        self.f_scale
    }

    /// Checks that `unit_count` still matches the mode and topology.
    pub fn is_consistent_with(&self, topo: &Topology) -> bool {
        self.unit_count == self.budget_mode.unit_count(topo) && self.exploration_count < self.t
    }

    pub fn budget(&self, t: u64) -> u64 {
        exploration_budget(t, self)
    }

    /// Decides slot `t` and advances to `t + 1`.
    pub fn step(&mut self) -> Phase {
        let phase = if self.exploration_count < self.budget(self.t) {
            self.exploration_count += 1;
            Phase::Explore
        } else {
            Phase::Exploit
        };
        self.t += 1;
        phase
    }
}

/// `unit_count * max(1, ceil(f_scale * ln(t+1)^2))`, saturating.
pub fn exploration_budget(t: u64, state: &DseeState) -> u64 {
    let log = libm::log(t as f64 + 1.0);
    let scaled = libm::ceil(state.f_scale * log * log);
    // f64 -> u64 casts saturate; NaN (only from a NaN f_scale) maps to 0.
    let multiplier = (scaled as u64).max(1);
    state.unit_count.saturating_mul(multiplier)
}

/// Free-function form of [`DseeState::step`].
pub fn dsee_step(state: &mut DseeState) -> Phase {
    state.step()
}

/// Explore with probability `epsilon`; consumes one draw.
pub fn egreedy_step<R: Rng + ?Sized>(epsilon: f64, rng: &mut R) -> Phase {
    if rng.random::<f64>() < epsilon {
        Phase::Explore
    } else {
        Phase::Exploit
    }
}

/// One posterior draw per link from `Beta(successes + α, failures + β)`,
/// clamped to `[min_prob, 1]`.
pub fn thompson_estimates<R: Rng + ?Sized>(
    est: &LinkEstimator,
    rng: &mut R,
) -> Result<Vec<f64>, LearningError> {
    let (alpha, beta) = est.prior();
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(LearningError::NonPositivePrior { alpha, beta });
    }
    let draws = est
        .successes
        .iter()
        .zip(&est.trials)
        .map(|(&s, &n)| {
            let a = s as f64 + alpha;
            let b = (n - s) as f64 + beta;
            // Both shape parameters are positive and finite here.
            let x = Beta::new(a, b)
                .map(|d| d.sample(rng))
                .unwrap_or(a / (a + b));
            x.clamp(est.min_prob, 1.0)
        })
        .collect();
    Ok(draws)
}
