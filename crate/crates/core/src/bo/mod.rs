//! Sequential Bayesian optimization over the controller's log-gain box.

mod acquisition;
mod campaign;
mod design;
mod domain;
mod surrogate;

pub use acquisition::{
    expected_improvement, maximize_acquisition, normal_cdf, normal_pdf, AcquisitionSearch, Proposal,
};
pub use campaign::{
    derive_seed, random_search, run_campaign, CampaignAbort, CampaignRecord, CampaignSettings, Evaluation, Evaluator,
    IterationRecord, Source, StopReason,
};
pub use design::{halton, latin_hypercube, warm_start, warm_start_split};
pub use domain::SearchDomain;
pub use surrogate::Surrogate;
