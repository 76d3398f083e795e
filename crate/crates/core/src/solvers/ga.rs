use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Search, SolverError};
use crate::routing::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population: usize,
    pub tournament_size: usize,
    pub elitism: usize,
    /// Probability that a child is mutated (swap or segment inversion).
    pub mutation_rate: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams { population: 100, tournament_size: 5, elitism: 2, mutation_rate: 0.1 }
    }
}

impl GaParams {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(format!("ga: {m}")));
        if self.population < 2 {
            return bad("population must be >= 2");
        }
        if self.tournament_size < 1 {
            return bad("tournament_size must be >= 1");
        }
        if self.elitism >= self.population {
            return bad("elitism must be smaller than the population");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must lie in [0, 1]");
        }
        Ok(())
    }
}

struct Individual {
    tour: Vec<usize>,
    obj: Objective,
}

fn tournament(search: &mut Search, pop: &[Individual], size: usize) -> usize {
    let mut best = search.rng.gen_range(0..pop.len());
    for _ in 1..size {
        let c = search.rng.gen_range(0..pop.len());
        if pop[c].obj.better_than(&pop[best].obj) {
            best = c;
        }
    }
    best
}

/// Order crossover: keep `p1[a..=b]` in place and fill the remaining slots,
/// starting after `b` and wrapping, with the genes of `p2` in the order they
/// appear from `b + 1`.
pub(crate) fn order_crossover(p1: &[usize], p2: &[usize], a: usize, b: usize) -> Vec<usize> {
    let n = p1.len();
    let mut child = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for k in a..=b {
        child[k] = p1[k];
        used[p1[k]] = true;
    }
    let mut pos = (b + 1) % n;
    for off in 0..n {
        let gene = p2[(b + 1 + off) % n];
        if used[gene] {
            continue;
        }
        child[pos] = gene;
        used[gene] = true;
        pos = (pos + 1) % n;
    }
    child
}

pub(super) fn run(search: &mut Search, p: &GaParams) {
    let mut pop: Vec<Individual> = Vec::with_capacity(p.population);
    for _ in 0..p.population {
        let tour = search.random_tour();
        let Some(obj) = search.eval(&tour) else { return };
        pop.push(Individual { tour, obj });
    }
    let n = search.n();

    loop {
        // stable: equal objectives keep their previous relative order
        pop.sort_by(|x, y| {
            y.obj.better_than(&x.obj).cmp(&x.obj.better_than(&y.obj))
        });
        let mut next: Vec<Individual> = Vec::with_capacity(p.population);
        for elite in pop.iter().take(p.elitism) {
            next.push(Individual { tour: elite.tour.clone(), obj: elite.obj });
        }
        while next.len() < p.population {
            let i = tournament(search, &pop, p.tournament_size);
            let j = tournament(search, &pop, p.tournament_size);
            let mut a = search.rng.gen_range(0..n);
            let mut b = search.rng.gen_range(0..n);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            let mut child = order_crossover(&pop[i].tour, &pop[j].tour, a, b);
            if search.rng.gen::<f64>() < p.mutation_rate {
                let (x, y) = search.two_positions();
                if search.rng.gen::<bool>() {
                    child.swap(x, y);
                } else {
                    child[x.min(y)..=x.max(y)].reverse();
                }
            }
            let Some(obj) = search.eval(&child) else { return };
            next.push(Individual { tour: child, obj });
        }
        pop = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::is_permutation;
    use proptest::prelude::*;

    #[test]
    fn ox_reference_case() {
        let p1 = [0, 1, 2, 3, 4, 5, 6, 7];
        let p2 = [7, 6, 5, 4, 3, 2, 1, 0];
        // keep 2..=4 from p1; fill from p2 starting after position 4
        let child = order_crossover(&p1, &p2, 2, 4);
        assert_eq!(child, vec![6, 5, 2, 3, 4, 1, 0, 7]);
    }

    proptest! {
        #[test]
        fn ox_yields_permutations(
            (p1, p2, a, b) in (1usize..15).prop_flat_map(|n| (
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                0..n, 0..n,
            ))
        ) {
            let (a, b) = (a.min(b), a.max(b));
            let child = order_crossover(&p1, &p2, a, b);
            prop_assert!(is_permutation(&child, p1.len()));
            prop_assert_eq!(&child[a..=b], &p1[a..=b]);
        }
    }
}
