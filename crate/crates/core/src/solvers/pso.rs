use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Search, SolverError};
use crate::routing::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub swarm: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// Per-dimension velocity clamp.
    pub max_velocity: f64,
    /// Run 2-opt on the global best every this many iterations.
    pub local_search_every: usize,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams { swarm: 40, inertia: 0.729, c1: 1.49445, c2: 1.49445, max_velocity: 0.5, local_search_every: 10 }
    }
}

impl PsoParams {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(format!("pso: {m}")));
        if self.swarm < 1 {
            return bad("swarm must be >= 1");
        }
        if self.local_search_every < 1 {
            return bad("local_search_every must be >= 1");
        }
        if !(self.max_velocity > 0.0) {
            return bad("max_velocity must be > 0");
        }
        Ok(())
    }
}

/// Random-key decoding: stations sorted by ascending key, ties by index.
pub(crate) fn decode(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    order
}

/// Keys that decode to `tour`, reusing the multiset of values in `keys`.
pub(crate) fn encode_like(keys: &[f64], tour: &[usize]) -> Vec<f64> {
    let mut sorted = keys.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = vec![0.0; keys.len()];
    for (rank, &s) in tour.iter().enumerate() {
        out[s] = sorted[rank];
    }
    out
}

struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best_x: Vec<f64>,
    best_obj: Objective,
}

/// First-improvement 2-opt on `tour`; every neighbor evaluated counts against
/// the budget. Returns `None` if the budget ran out mid-way, with the best
/// tour found so far still written back.
fn two_opt(search: &mut Search, tour: &mut Vec<usize>, obj: &mut Objective) -> Option<()> {
    let n = tour.len();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let mut cand = tour.clone();
                cand[i..=j].reverse();
                let c = search.eval(&cand)?;
                if c.better_than(obj) {
                    *tour = cand;
                    *obj = c;
                    improved = true;
                }
            }
        }
    }
    Some(())
}

/// Random-key PSO with periodic 2-opt on the global best.
#[allow(clippy::needless_range_loop)]
pub(super) fn run(search: &mut Search, p: &PsoParams) {
    let n = search.n();
    let mut swarm: Vec<Particle> = Vec::with_capacity(p.swarm);
    let mut gbest: Option<(Vec<f64>, Objective)> = None;
    for _ in 0..p.swarm {
        let x: Vec<f64> = (0..n).map(|_| search.rng.gen::<f64>()).collect();
        let v: Vec<f64> = (0..n).map(|_| search.rng.gen_range(-0.1..0.1)).collect();
        let Some(obj) = search.eval(&decode(&x)) else { return };
        if gbest.as_ref().is_none_or(|(_, g)| obj.better_than(g)) {
            gbest = Some((x.clone(), obj));
        }
        swarm.push(Particle { best_x: x.clone(), x, v, best_obj: obj });
    }
    let (mut g_x, mut g_obj) = gbest.expect("swarm is non-empty");

    let mut iteration = 0usize;
    loop {
        iteration += 1;
        for particle in swarm.iter_mut() {
            for d in 0..n {
                let r1: f64 = search.rng.gen();
                let r2: f64 = search.rng.gen();
                let v = p.inertia * particle.v[d]
                    + p.c1 * r1 * (particle.best_x[d] - particle.x[d])
                    + p.c2 * r2 * (g_x[d] - particle.x[d]);
                particle.v[d] = v.clamp(-p.max_velocity, p.max_velocity);
                particle.x[d] += particle.v[d];
            }
            let Some(obj) = search.eval(&decode(&particle.x)) else { return };
            if obj.better_than(&particle.best_obj) {
                particle.best_x.copy_from_slice(&particle.x);
                particle.best_obj = obj;
            }
            if obj.better_than(&g_obj) {
                g_x.copy_from_slice(&particle.x);
                g_obj = obj;
            }
        }
        if iteration.is_multiple_of(p.local_search_every) {
            let mut tour = decode(&g_x);
            let done = two_opt(search, &mut tour, &mut g_obj);
            g_x = encode_like(&g_x, &tour);
            if done.is_none() {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decode_sorts_keys() {
        assert_eq!(decode(&[0.7, 0.1, 0.5]), vec![1, 2, 0]);
        assert_eq!(decode(&[0.5, 0.5, 0.1]), vec![2, 0, 1]);
    }

    proptest! {
        #[test]
        fn encode_round_trips(
            (keys, tour) in (1usize..12).prop_flat_map(|n| (
                proptest::collection::vec(0.0f64..1.0, n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            ))
        ) {
            let mut distinct = keys.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            prop_assume!(distinct.len() == keys.len());
            prop_assert_eq!(decode(&encode_like(&keys, &tour)), tour);
        }
    }
}
