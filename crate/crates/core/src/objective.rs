//! The closed-loop objective: one simulated lap per gain vector, scored by the
//! penalized lap cost.

use crate::bo::{derive_seed, Evaluation, Evaluator};
use crate::controller::GainVector;
use crate::cost::{evaluate_cost, CostWeights};
use crate::error::Result;
use crate::sim::{run_lap, LapResult, SimConfig};
use crate::track::TrackSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LapObjective {
    pub track: TrackSpec,
    pub sim: SimConfig,
    pub weights: CostWeights,
    /// Campaign seed; iteration `i` simulates with `derive_seed(seed, i)`.
    pub seed: u64,
}

impl LapObjective {
    pub fn sim_for(&self, i: usize) -> SimConfig {
        SimConfig { seed: derive_seed(self.seed, i as u64), ..self.sim }
    }

    /// Runs the lap for iteration `i` and returns it along with its score.
    pub fn evaluate_lap(&self, i: usize, theta: &GainVector) -> Result<(Evaluation, LapResult)> {
        let lap = run_lap(&self.track, theta, &self.sim_for(i))?;
        let cost = evaluate_cost(&lap, &self.weights)?;
        let eval = Evaluation {
            j_bo: cost.j_bo,
            cost: Some(cost),
            lap: Some(lap.summary()),
            duration_s: lap.log.samples.last().map_or(0.0, |s| s.t),
        };
        Ok((eval, lap))
    }
}

impl Evaluator for LapObjective {
    fn evaluate(&mut self, i: usize, theta: &GainVector) -> Result<Evaluation> {
        self.evaluate_lap(i, theta).map(|(e, _)| e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterations_get_independent_noise() {
        let obj = LapObjective { track: TrackSpec::default(), sim: SimConfig::default(), weights: CostWeights::default(), seed: 3 };
        let (a, _) = obj.evaluate_lap(1, &GainVector::BASELINE).unwrap();
        let (b, _) = obj.evaluate_lap(2, &GainVector::BASELINE).unwrap();
        let (c, _) = obj.evaluate_lap(1, &GainVector::BASELINE).unwrap();
        assert_ne!(a.j_bo, b.j_bo);
        assert_eq!(a, c);
        assert!(a.duration_s > 0.0);
    }
}
