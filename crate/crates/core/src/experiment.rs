//! Epoch simulation and regret accounting against a genie.
//!
//! A slot either explores (every node sends one dummy packet, every link is
//! sampled once) or exploits (SAF on the policy's current link estimates, one
//! packet routed over the true channel). Regret is the expected-cost gap
//! between what the policy chose and the genie's optimum, both evaluated
//! under the true probabilities.

use alloc::vec::Vec;

use crate::anypath::{evaluate_table_cost, shortest_anypath_first, AnypathError, ForwardingTable};
use crate::channel::{probe_all_links, route_packet_observed, ChannelError, DEFAULT_RETRY_CAP};
use crate::learning::{
    egreedy_step, thompson_estimates, BudgetMode, DseeState, LearningError, LinkEstimator, Phase,
};
use crate::rng::{stream, Purpose};
use crate::topology::Topology;

/// Evaluated costs above this multiple of `N` (including infinity) are
/// clamped before computing regret.
pub const COST_CAP_PER_NODE: f64 = 100.0;

/// Default scale of `f(t) = f_scale * ln(t + 1)`.
pub const DEFAULT_F_SCALE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Policy {
    #[default]
    Dsee,
    Genie,
    EGreedy,
    Thompson,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Dsee => "dsee",
            Policy::Genie => "genie",
            Policy::EGreedy => "egreedy",
            Policy::Thompson => "thompson",
        }
    }
}

/// Cost charged for an exploration slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ExploreCost {
    /// One dummy broadcast per node: `N`.
    #[default]
    Auto,
    Fixed(f64),
}

impl ExploreCost {
    pub fn resolve(self, topo: &Topology) -> f64 {
        match self {
            ExploreCost::Auto => f64::from(topo.node_count()),
            ExploreCost::Fixed(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("epochs must be at least 1")]
    ZeroEpochs,
    #[error("epsilon must lie in [0, 1], got {0}")]
    Epsilon(f64),
    #[error("min_prob must lie in (0, 1), got {0}")]
    MinProb(f64),
    #[error("f_scale must be positive and finite, got {0}")]
    FScale(f64),
    #[error("prior parameters must be nonnegative and finite, got ({0}, {1})")]
    Prior(f64, f64),
    #[error("Thompson sampling needs strictly positive priors, got ({0}, {1})")]
    ThompsonPrior(f64, f64),
    #[error("retry cap must be at least 1")]
    RetryCap,
    #[error("exploration slot cost must be nonnegative and finite, got {0}")]
    ExploreCost(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub horizon: u64,
    pub epochs: u64,
    pub base_seed: u64,
    pub policy: Policy,
    pub f_scale: f64,
    pub budget_mode: BudgetMode,
    pub epsilon: f64,
    pub prior_alpha: f64,
    pub prior_beta: f64,
    pub min_prob: f64,
    pub retry_cap: u32,
    pub explore_slot_cost: ExploreCost,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            horizon: 5000,
            epochs: 100,
            base_seed: 0,
            policy: Policy::Dsee,
            f_scale: DEFAULT_F_SCALE,
            budget_mode: BudgetMode::PerLink,
            epsilon: 0.1,
            prior_alpha: 1.0,
            prior_beta: 1.0,
            min_prob: 1e-3,
            retry_cap: DEFAULT_RETRY_CAP,
            explore_slot_cost: ExploreCost::Auto,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon == 0 {
            return Err(ConfigError::ZeroHorizon);
        }
        if self.epochs == 0 {
            return Err(ConfigError::ZeroEpochs);
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(ConfigError::Epsilon(self.epsilon));
        }
        if !(self.min_prob > 0.0 && self.min_prob < 1.0) {
            return Err(ConfigError::MinProb(self.min_prob));
        }
        if !(self.f_scale.is_finite() && self.f_scale > 0.0) {
            return Err(ConfigError::FScale(self.f_scale));
        }
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.prior_alpha) || !ok(self.prior_beta) {
            return Err(ConfigError::Prior(self.prior_alpha, self.prior_beta));
        }
        if self.policy == Policy::Thompson && !(self.prior_alpha > 0.0 && self.prior_beta > 0.0) {
            return Err(ConfigError::ThompsonPrior(
                self.prior_alpha,
                self.prior_beta,
            ));
        }
        if self.retry_cap == 0 {
            return Err(ConfigError::RetryCap);
        }
        if let ExploreCost::Fixed(c) = self.explore_slot_cost {
            if !ok(c) {
                return Err(ConfigError::ExploreCost(c));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Anypath(#[from] AnypathError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error("destination unreachable from source under true probabilities; regret is undefined")]
    GenieUnreachable,
    #[error("cannot aggregate zero traces")]
    NoTraces,
    #[error("traces have different horizons ({0} vs {1})")]
    HorizonMismatch(usize, usize),
}

/// Optimal source distance under true probabilities.
pub fn genie_cost(topo: &Topology) -> Result<f64, ExperimentError> {
    let table = shortest_anypath_first(&topo.true_probs(), topo)?;
    let d = table.distance(topo.source());
    if d.is_finite() {
        Ok(d)
    } else {
        Err(ExperimentError::GenieUnreachable)
    }
}

/// What the policy did in a slot.
#[derive(Debug, Clone, Copy)]
pub enum SlotChoice<'a> {
    Explore,
    Exploit(&'a ForwardingTable),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRegret {
    pub value: f64,
    /// The evaluated cost hit [`COST_CAP_PER_NODE`]` * N`.
    pub capped: bool,
}

/// Regret of one slot relative to the optimal source distance `optimum`.
pub fn slot_regret(
    choice: SlotChoice<'_>,
    true_probs: &[f64],
    topo: &Topology,
    config: &ExperimentConfig,
    optimum: f64,
) -> Result<SlotRegret, ExperimentError> {
    match choice {
        SlotChoice::Explore => Ok(SlotRegret {
            value: (config.explore_slot_cost.resolve(topo) - optimum).max(0.0),
            capped: false,
        }),
        SlotChoice::Exploit(table) => {
            let cost = evaluate_table_cost(table, true_probs, topo)?[topo.source().index()];
            let cap = COST_CAP_PER_NODE * f64::from(topo.node_count());
            let capped = cost >= cap;
            let cost = if capped { cap } else { cost };
            Ok(SlotRegret {
                value: (cost - optimum).max(0.0),
                capped,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub t: u64,
    pub phase: Phase,
    pub inst_regret: f64,
    pub cum_regret: f64,
    pub avg_regret: f64,
    pub transmissions: u64,
    /// `None` on exploration slots.
    pub delivered: Option<bool>,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub epoch: u64,
    pub slots: Vec<SlotRecord>,
}

impl RegretTrace {
    pub fn final_cum_regret(&self) -> f64 {
        self.slots.last().map_or(0.0, |s| s.cum_regret)
    }

    pub fn capped_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.capped).count()
    }

    pub fn explore_slots(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| s.phase == Phase::Explore)
            .count()
    }
}

/// One epoch, advanced slot by slot.
#[derive(Debug, Clone)]
pub struct Epoch<'a> {
    topo: &'a Topology,
    config: &'a ExperimentConfig,
    index: u64,
    true_probs: Vec<f64>,
    genie_table: ForwardingTable,
    optimum: f64,
    estimator: LinkEstimator,
    dsee: DseeState,
    t: u64,
    cum_regret: f64,
}

impl<'a> Epoch<'a> {
    pub fn new(
        topo: &'a Topology,
        config: &'a ExperimentConfig,
        index: u64,
    ) -> Result<Self, ExperimentError> {
        config.validate()?;
        let true_probs = topo.true_probs();
        let genie_table = shortest_anypath_first(&true_probs, topo)?;
        let optimum = genie_table.distance(topo.source());
        if !optimum.is_finite() {
            return Err(ExperimentError::GenieUnreachable);
        }
        let estimator = LinkEstimator::for_topology(
            topo,
            config.prior_alpha,
            config.prior_beta,
            config.min_prob,
        )?;
        Ok(Epoch {
            topo,
            config,
            index,
            true_probs,
            genie_table,
            optimum,
            estimator,
            dsee: DseeState::new(topo, config.f_scale, config.budget_mode),
            t: 0,
            cum_regret: 0.0,
        })
    }

    pub fn estimator(&self) -> &LinkEstimator {
        &self.estimator
    }

    pub fn dsee(&self) -> &DseeState {
        &self.dsee
    }

    /// Last completed slot (0 before the first step).
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn optimum(&self) -> f64 {
        self.optimum
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.config.horizon
    }

    pub fn step(&mut self) -> Result<SlotRecord, ExperimentError> {
        self.t += 1;
        let t = self.t;
        let cfg = self.config;
        let mut policy_rng = stream(cfg.base_seed, self.index, t, Purpose::Policy);

        let phase = match cfg.policy {
            Policy::Dsee => self.dsee.step(),
            Policy::EGreedy => egreedy_step(cfg.epsilon, &mut policy_rng),
            Policy::Genie | Policy::Thompson => Phase::Exploit,
        };

        let (regret, transmissions, delivered) = match phase {
            Phase::Explore => {
                let mut rng = stream(cfg.base_seed, self.index, t, Purpose::Probe);
                let round = probe_all_links(self.topo, &self.true_probs, &mut rng);
                for (link, ok) in round.samples {
                    self.estimator.update(link, ok)?;
                }
                let regret = slot_regret(
                    SlotChoice::Explore,
                    &self.true_probs,
                    self.topo,
                    cfg,
                    self.optimum,
                )?;
                (regret, round.transmissions, None)
            }
            Phase::Exploit => {
                let learned;
                let table = match cfg.policy {
                    Policy::Genie => &self.genie_table,
                    Policy::Thompson => {
                        let draws = thompson_estimates(&self.estimator, &mut policy_rng)?;
                        learned = shortest_anypath_first(&draws, self.topo)?;
                        &learned
                    }
                    Policy::Dsee | Policy::EGreedy => {
                        learned = shortest_anypath_first(&self.estimator.estimates(), self.topo)?;
                        &learned
                    }
                };
                let regret = slot_regret(
                    SlotChoice::Exploit(table),
                    &self.true_probs,
                    self.topo,
                    cfg,
                    self.optimum,
                )?;
                let mut rng = stream(cfg.base_seed, self.index, t, Purpose::Route);
                let estimator = &mut self.estimator;
                let learn = cfg.policy != Policy::Genie;
                let mut failed = None;
                let trace = route_packet_observed(
                    table,
                    &self.true_probs,
                    self.topo,
                    &mut rng,
                    cfg.retry_cap,
                    |link, ok| {
                        if learn && failed.is_none() {
                            failed = estimator.update(link, ok).err();
                        }
                    },
                )?;
                if let Some(e) = failed {
                    return Err(e.into());
                }
                (regret, trace.total_transmissions, Some(trace.delivered))
            }
        };

        self.cum_regret += regret.value;
        Ok(SlotRecord {
            t,
            phase,
            inst_regret: regret.value,
            cum_regret: self.cum_regret,
            avg_regret: self.cum_regret / t as f64,
            transmissions,
            delivered,
            capped: regret.capped,
        })
    }

    /// Runs the remaining slots up to the horizon.
    pub fn run(mut self) -> Result<RegretTrace, ExperimentError> {
        let remaining = self.config.horizon.saturating_sub(self.t) as usize;
        let mut slots = Vec::with_capacity(remaining);
        while !self.is_done() {
            slots.push(self.step()?);
        }
        Ok(RegretTrace {
            epoch: self.index,
            slots,
        })
    }
}

/// Runs one complete epoch. Deterministic in `(config.base_seed, epoch_index)`.
pub fn run_epoch(
    topo: &Topology,
    config: &ExperimentConfig,
    epoch_index: u64,
) -> Result<RegretTrace, ExperimentError> {
    Epoch::new(topo, config, epoch_index)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub t: u64,
    pub mean_cum_regret: f64,
    pub se_cum_regret: f64,
    pub mean_avg_regret: f64,
    pub se_avg_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrace {
    pub epochs: usize,
    pub rows: Vec<AggregateRow>,
}

impl AggregateTrace {
    pub fn last(&self) -> Option<&AggregateRow> {
        self.rows.last()
    }

    /// Row for slot `t` (1-based).
    pub fn at(&self, t: u64) -> Option<&AggregateRow> {
        self.rows.get((t as usize).checked_sub(1)?)
    }
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    let var = ss / (n - 1) as f64;
    (mean, libm::sqrt(var / n as f64))
}

/// Per-slot mean and standard error across epochs. The result does not
/// depend on the order of `traces`; they are reduced in epoch-index order.
pub fn aggregate(traces: &[RegretTrace]) -> Result<AggregateTrace, ExperimentError> {
    let first = traces.first().ok_or(ExperimentError::NoTraces)?;
    let len = first.slots.len();
    if let Some(bad) = traces.iter().find(|tr| tr.slots.len() != len) {
        return Err(ExperimentError::HorizonMismatch(len, bad.slots.len()));
    }
    let mut ordered: Vec<&RegretTrace> = traces.iter().collect();
    ordered.sort_by_key(|tr| tr.epoch);
    let n = ordered.len();
    let rows = (0..len)
        .map(|i| {
            let (mean_cum, se_cum) =
                mean_and_se(ordered.iter().map(|tr| tr.slots[i].cum_regret), n);
            let (mean_avg, se_avg) =
                mean_and_se(ordered.iter().map(|tr| tr.slots[i].avg_regret), n);
            AggregateRow {
                t: ordered[0].slots[i].t,
                mean_cum_regret: mean_cum,
                se_cum_regret: se_cum,
                mean_avg_regret: mean_avg,
                se_avg_regret: se_avg,
            }
        })
        .collect();
    Ok(AggregateTrace { epochs: n, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub traces: Vec<RegretTrace>,
    pub aggregate: AggregateTrace,
}

/// Runs every epoch sequentially and aggregates.
pub fn run_experiment(
    topo: &Topology,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome, ExperimentError> {
    config.validate()?;
    let traces = (0..config.epochs)
        .map(|e| run_epoch(topo, config, e))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregate = aggregate(&traces)?;
    Ok(ExperimentOutcome { traces, aggregate })
}
