//! The outer tuning loop: warm start, then fit / acquire / evaluate until the
//! budget is spent or a stopping rule fires.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::acquisition::{maximize_acquisition, AcquisitionSearch};
use super::design::warm_start;
use super::domain::SearchDomain;
use super::surrogate::Surrogate;
use crate::controller::GainVector;
use crate::cost::CostBreakdown;
use crate::error::{Error, Result};
use crate::gp::{HyperSearch, KernelHyperparams, Point};
use crate::sim::LapSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Baseline,
    SpaceFilling,
    Acquisition,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    EiBelowThreshold,
    Stalled,
}

/// Outcome of one closed-loop evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub j_bo: f64,
    pub cost: Option<CostBreakdown>,
    pub lap: Option<LapSummary>,
    /// Experiment time consumed by the evaluation, in seconds.
    pub duration_s: f64,
}

impl Evaluation {
    pub fn value(j_bo: f64) -> Self {
        Self { j_bo, cost: None, lap: None, duration_s: 0.0 }
    }
}

pub trait Evaluator {
    /// Evaluates gains for campaign iteration `i` (1-based).
    fn evaluate(&mut self, i: usize, theta: &GainVector) -> Result<Evaluation>;
}

impl<F: FnMut(usize, &GainVector) -> Result<Evaluation>> Evaluator for F {
    fn evaluate(&mut self, i: usize, theta: &GainVector) -> Result<Evaluation> {
        self(i, theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignSettings {
    pub n_init: usize,
    pub n_max: usize,
    /// Max-EI threshold in standardized cost units.
    pub ei_tol: f64,
    /// Consecutive low-EI acquisitions that end the campaign.
    pub ei_patience: usize,
    /// Consecutive acquisitions without relative improvement that end the campaign.
    pub stall_window: usize,
    pub stall_rel_tol: f64,
    pub seed: u64,
    pub hyper_search: HyperSearch,
    pub acquisition: AcquisitionSearch,
}

impl Default for CampaignSettings {
    fn default() -> Self {
        Self {
            n_init: 15,
            n_max: 32,
            ei_tol: 1e-3,
            ei_patience: 3,
            stall_window: 8,
            stall_rel_tol: 1e-3,
            seed: 0,
            hyper_search: HyperSearch::default(),
            acquisition: AcquisitionSearch::default(),
        }
    }
}

impl CampaignSettings {
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.n_init == 0 {
            p.push("budget.n_init must be >= 1".to_string());
        }
        if self.n_init > self.n_max {
            p.push(format!("budget.n_init ({}) must not exceed budget.n_max ({})", self.n_init, self.n_max));
        }
        if !(self.ei_tol.is_finite() && self.ei_tol >= 0.0) {
            p.push(format!("stopping.ei_tol must be >= 0, got {}", self.ei_tol));
        }
        if self.stall_window == 0 {
            p.push("stopping.stall_window must be >= 1".to_string());
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(p))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub i: usize,
    pub source: Source,
    pub theta: GainVector,
    pub z: Point,
    pub j_bo: f64,
    pub cost: Option<CostBreakdown>,
    pub lap: Option<LapSummary>,
    pub hyper: Option<KernelHyperparams>,
    /// EI of the selected point in original cost units.
    pub ei_at_selection: Option<f64>,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub seed: u64,
    pub iterations: Vec<IterationRecord>,
    pub best_so_far: Vec<f64>,
    pub stop_reason: Option<StopReason>,
}

impl CampaignRecord {
    fn new(seed: u64) -> Self {
        Self { seed, iterations: Vec::new(), best_so_far: Vec::new(), stop_reason: None }
    }

    fn push(&mut self, rec: IterationRecord) {
        let prev = self.best_so_far.last().copied().unwrap_or(f64::INFINITY);
        self.best_so_far.push(prev.min(rec.j_bo));
        self.iterations.push(rec);
    }

    /// Lowest observed cost; earliest iteration on ties.
    pub fn best(&self) -> Option<&IterationRecord> {
        self.iterations.iter().fold(None, |acc: Option<&IterationRecord>, r| match acc {
            Some(b) if b.j_bo <= r.j_bo => Some(b),
            _ => Some(r),
        })
    }

    pub fn best_j(&self) -> f64 {
        self.best_so_far.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Best cost among the warm-start evaluations.
    pub fn best_warm_start(&self) -> f64 {
        self.iterations
            .iter()
            .filter(|r| matches!(r.source, Source::Baseline | Source::SpaceFilling))
            .map(|r| r.j_bo)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluator failure with whatever was recorded before it.
#[derive(Debug)]
pub struct CampaignAbort {
    pub error: Error,
    pub partial: Box<CampaignRecord>,
}

impl std::fmt::Display for CampaignAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "campaign aborted after {} evaluations: {}", self.partial.iterations.len(), self.error)
    }
}

impl std::error::Error for CampaignAbort {}

/// SplitMix64 of `seed` mixed with a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const ACQ_STREAM: u64 = 0xac9_0000;
const RANDOM_STREAM: u64 = 0xa4d_0000;

fn evaluate_into(
    record: &mut CampaignRecord,
    evaluator: &mut dyn Evaluator,
    theta: GainVector,
    source: Source,
    hyper: Option<KernelHyperparams>,
    ei: Option<f64>,
) -> std::result::Result<(), Error> {
    let i = record.iterations.len() + 1;
    let eval = evaluator.evaluate(i, &theta).map_err(|e| match e {
        Error::Evaluator { .. } => e,
        other => Error::Evaluator { iteration: i, message: other.to_string() },
    })?;
    if !eval.j_bo.is_finite() {
        return Err(Error::Evaluator { iteration: i, message: format!("non-finite cost {}", eval.j_bo) });
    }
    record.push(IterationRecord {
        i,
        source,
        theta,
        z: SearchDomain::to_log(&theta),
        j_bo: eval.j_bo,
        cost: eval.cost,
        lap: eval.lap,
        hyper,
        ei_at_selection: ei,
        duration_s: eval.duration_s,
    });
    Ok(())
}

fn run_warm_start(
    domain: &SearchDomain,
    baseline: &GainVector,
    settings: &CampaignSettings,
    evaluator: &mut dyn Evaluator,
    record: &mut CampaignRecord,
    observer: &mut dyn FnMut(&CampaignRecord) -> Result<()>,
) -> Result<()> {
    for (k, theta) in warm_start(domain, baseline, settings.n_init, settings.seed)?.into_iter().enumerate() {
        let source = if k == 0 { Source::Baseline } else { Source::SpaceFilling };
        evaluate_into(record, evaluator, theta, source, None, None)?;
        observer(record)?;
    }
    Ok(())
}

/// Runs the tuning loop. `observer` sees the record after every evaluation;
/// an observer error aborts the campaign like an evaluator failure.
pub fn run_campaign(
    domain: &SearchDomain,
    baseline: &GainVector,
    settings: &CampaignSettings,
    evaluator: &mut dyn Evaluator,
    observer: &mut dyn FnMut(&CampaignRecord) -> Result<()>,
) -> std::result::Result<CampaignRecord, CampaignAbort> {
    let mut record = CampaignRecord::new(settings.seed);
    match campaign_loop(domain, baseline, settings, evaluator, observer, &mut record) {
        Ok(()) => Ok(record),
        Err(error) => Err(CampaignAbort { error, partial: Box::new(record) }),
    }
}

fn campaign_loop(
    domain: &SearchDomain,
    baseline: &GainVector,
    settings: &CampaignSettings,
    evaluator: &mut dyn Evaluator,
    observer: &mut dyn FnMut(&CampaignRecord) -> Result<()>,
    record: &mut CampaignRecord,
) -> Result<()> {
    domain.validate()?;
    settings.validate()?;
    run_warm_start(domain, baseline, settings, evaluator, record, observer)?;

    let mut hyper = KernelHyperparams::default();
    let mut low_ei = 0;
    let mut stalled = 0;
    while record.iterations.len() < settings.n_max {
        let thetas: Vec<GainVector> = record.iterations.iter().map(|r| r.theta).collect();
        let costs: Vec<f64> = record.iterations.iter().map(|r| r.j_bo).collect();
        let surrogate = Surrogate::fit(domain, &thetas, &costs, &hyper, &settings.hyper_search)?;
        hyper = *surrogate.hyper();

        let i = record.iterations.len() + 1;
        let proposal = maximize_acquisition(
            surrogate.model(),
            surrogate.best_scaled(),
            derive_seed(settings.seed ^ ACQ_STREAM, i as u64),
            &settings.acquisition,
        );
        let theta = domain.from_unit(&proposal.point);
        assert!(domain.contains(&theta), "acquisition proposed {theta:?} outside the domain");

        let prev_best = record.best_j();
        evaluate_into(record, evaluator, theta, Source::Acquisition, Some(hyper), Some(proposal.ei * surrogate.scale()))?;
        observer(record)?;

        low_ei = if proposal.ei < settings.ei_tol { low_ei + 1 } else { 0 };
        let improved = prev_best - record.best_j() > settings.stall_rel_tol * prev_best.abs();
        stalled = if improved { 0 } else { stalled + 1 };
        if low_ei >= settings.ei_patience {
            record.stop_reason = Some(StopReason::EiBelowThreshold);
            return Ok(());
        }
        if stalled >= settings.stall_window {
            record.stop_reason = Some(StopReason::Stalled);
            return Ok(());
        }
    }
    record.stop_reason = Some(StopReason::Budget);
    Ok(())
}

/// Same warm start as [`run_campaign`], then uniform random points in the
/// normalized log box until `n_max` evaluations. No early stopping.
pub fn random_search(
    domain: &SearchDomain,
    baseline: &GainVector,
    settings: &CampaignSettings,
    evaluator: &mut dyn Evaluator,
) -> std::result::Result<CampaignRecord, CampaignAbort> {
    let mut record = CampaignRecord::new(settings.seed);
    let result = (|| -> Result<()> {
        domain.validate()?;
        settings.validate()?;
        run_warm_start(domain, baseline, settings, evaluator, &mut record, &mut |_| Ok(()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(settings.seed, RANDOM_STREAM));
        while record.iterations.len() < settings.n_max {
            let u: Point = std::array::from_fn(|_| rng.random());
            evaluate_into(&mut record, evaluator, domain.from_unit(&u), Source::Random, None, None)?;
        }
        record.stop_reason = Some(StopReason::Budget);
        Ok(())
    })();
    match result {
        Ok(()) => Ok(record),
        Err(error) => Err(CampaignAbort { error, partial: Box::new(record) }),
    }
}
