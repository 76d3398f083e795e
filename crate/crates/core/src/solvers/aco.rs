use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Search, SolverError};
use crate::routing::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcoParams {
    pub ants: usize,
    /// Pheromone exponent.
    pub alpha: f64,
    /// Heuristic (1 / distance) exponent.
    pub beta: f64,
    pub evaporation: f64,
    /// Pheromone bounds as multiples of the initial level.
    pub tau_min_factor: f64,
    pub tau_max_factor: f64,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams { ants: 25, alpha: 1.0, beta: 3.0, evaporation: 0.5, tau_min_factor: 0.01, tau_max_factor: 10.0 }
    }
}

impl AcoParams {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(format!("aco: {m}")));
        if self.ants < 1 {
            return bad("ants must be >= 1");
        }
        if !(self.evaporation > 0.0 && self.evaporation <= 1.0) {
            return bad("evaporation must lie in (0, 1]");
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return bad("alpha and beta must be >= 0");
        }
        if !(self.tau_min_factor > 0.0 && self.tau_min_factor <= self.tau_max_factor) {
            return bad("need 0 < tau_min_factor <= tau_max_factor");
        }
        Ok(())
    }
}

/// Shortest distance used for the heuristic; coincident points would
/// otherwise give an infinite attraction.
const MIN_HEURISTIC_DISTANCE_KM: f64 = 1e-6;

fn nearest_neighbor_tour(search: &Search) -> Vec<usize> {
    let m = search.ev.matrix();
    let n = search.n();
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut cur = 0;
    for _ in 0..n {
        let next = (0..n)
            .filter(|&s| !visited[s])
            .min_by(|&a, &b| m.get(cur, a + 1).total_cmp(&m.get(cur, b + 1)))
            .expect("unvisited station remains");
        visited[next] = true;
        tour.push(next);
        cur = next + 1;
    }
    tour
}

/// Max-min ant system over directed node pairs (depot = node 0). Ants build
/// giant tours from the depot; the best-so-far tour deposits after every
/// colony.
pub(super) fn run(search: &mut Search, p: &AcoParams) {
    let n = search.n();
    let size = n + 1;
    let m = search.ev.matrix();
    let mut attraction = vec![0.0; size * size];
    for a in 0..size {
        for b in 0..size {
            attraction[a * size + b] = (1.0 / m.get(a, b).max(MIN_HEURISTIC_DISTANCE_KM)).powf(p.beta);
        }
    }
    let q = match m.mean_off_diagonal() {
        x if x > 0.0 => x,
        _ => 1.0,
    };

    let seed_tour = nearest_neighbor_tour(search);
    let Some(seed_obj) = search.eval(&seed_tour) else { return };
    let tau0 = q / (p.evaporation * seed_obj.value.max(f64::MIN_POSITIVE));
    let (tau_min, tau_max) = (p.tau_min_factor * tau0, p.tau_max_factor * tau0);
    let mut tau = vec![tau0; size * size];
    let mut best: (Vec<usize>, Objective) = (seed_tour, seed_obj);

    let mut weights = vec![0.0; n];
    let mut visited = vec![false; n];
    loop {
        for _ in 0..p.ants {
            visited.fill(false);
            let mut tour = Vec::with_capacity(n);
            let mut cur = 0;
            for _ in 0..n {
                let mut total = 0.0;
                for s in 0..n {
                    weights[s] = if visited[s] {
                        0.0
                    } else {
                        let k = cur * size + s + 1;
                        tau[k].powf(p.alpha) * attraction[k]
                    };
                    total += weights[s];
                }
                let next = if total > 0.0 && total.is_finite() {
                    let mut r = search.rng.gen::<f64>() * total;
                    let mut pick = None;
                    for s in 0..n {
                        if visited[s] {
                            continue;
                        }
                        pick = Some(s);
                        if r < weights[s] {
                            break;
                        }
                        r -= weights[s];
                    }
                    pick.expect("an unvisited station remains")
                } else {
                    // degenerate weights: uniform over the unvisited
                    let open: Vec<usize> = (0..n).filter(|&s| !visited[s]).collect();
                    open[search.rng.gen_range(0..open.len())]
                };
                visited[next] = true;
                tour.push(next);
                cur = next + 1;
            }
            let Some(obj) = search.eval(&tour) else { return };
            if obj.better_than(&best.1) {
                best = (tour, obj);
            }
        }

        for t in tau.iter_mut() {
            *t *= 1.0 - p.evaporation;
        }
        let deposit = q / best.1.value.max(f64::MIN_POSITIVE);
        let mut prev = 0;
        for &s in &best.0 {
            tau[prev * size + s + 1] += deposit;
            prev = s + 1;
        }
        tau[prev * size] += deposit;
        for t in tau.iter_mut() {
            *t = t.clamp(tau_min, tau_max);
        }
    }
}
