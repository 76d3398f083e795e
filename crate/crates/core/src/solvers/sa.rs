use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Search, SolverError};
use crate::routing::Move;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaParams {
    /// Geometric cooling factor applied after every epoch.
    pub cooling: f64,
    /// Epoch length is `epoch_factor * n` proposals.
    pub epoch_factor: usize,
    /// Acceptance probability of the median uphill probe at the start.
    pub initial_acceptance: f64,
    pub calibration_probes: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams { cooling: 0.95, epoch_factor: 100, initial_acceptance: 0.8, calibration_probes: 100 }
    }
}

impl SaParams {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(format!("sa: {m}")));
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad("cooling must lie in (0, 1)");
        }
        if self.epoch_factor < 1 {
            return bad("epoch_factor must be >= 1");
        }
        if !(self.initial_acceptance > 0.0 && self.initial_acceptance < 1.0) {
            return bad("initial_acceptance must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Uniform draw from {2-opt, relocate, swap} with random distinct positions.
fn random_move(search: &mut Search) -> Move {
    let (i, j) = search.two_positions();
    match search.rng.gen_range(0..3u8) {
        0 => Move::TwoOpt { i, j },
        1 => Move::Relocate { from: i, to: j },
        _ => Move::Swap { i, j },
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { 0.5 * (values[m - 1] + values[m]) })
}

pub(super) fn run(search: &mut Search, p: &SaParams) {
    let mut current = search.random_tour();
    let Some(mut current_obj) = search.eval(&current) else { return };

    // Calibrate the starting temperature from random probes around the start.
    let mut uphill = Vec::new();
    for _ in 0..p.calibration_probes {
        let mut probe = current.clone();
        random_move(search).apply_in_place(&mut probe);
        let Some(obj) = search.eval(&probe) else { return };
        let delta = obj.value - current_obj.value;
        if delta > 0.0 {
            uphill.push(delta);
        }
    }
    let mut temperature = match median(&mut uphill) {
        Some(m) => -m / p.initial_acceptance.ln(),
        // flat neighborhood: any small positive scale works
        None => 1e-3 * current_obj.value.max(1.0),
    };

    let epoch = p.epoch_factor * search.n();
    let mut proposals = 0usize;
    let mut candidate = current.clone();
    loop {
        candidate.copy_from_slice(&current);
        random_move(search).apply_in_place(&mut candidate);
        let Some(obj) = search.eval(&candidate) else { return };
        let delta = obj.value - current_obj.value;
        let accept = delta <= 0.0 || search.rng.gen::<f64>() < (-delta / temperature).exp();
        if accept {
            std::mem::swap(&mut current, &mut candidate);
            current_obj = obj;
        }
        proposals += 1;
        if proposals.is_multiple_of(epoch) {
            temperature *= p.cooling;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_probes() {
        assert_eq!(median(&mut []), None);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn initial_temperature_accepts_median_at_target_rate() {
        let p = SaParams::default();
        let m = 7.3;
        let t = -m / p.initial_acceptance.ln();
        assert!(((-m / t).exp() - 0.8).abs() < 1e-12);
    }
}
