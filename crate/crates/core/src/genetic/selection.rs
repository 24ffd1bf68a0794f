use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use super::Population;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectionError {
    #[error("member {0} has no fitness")]
    Unevaluated(usize),
    #[error("tournament size {k} is outside 1..={size}")]
    BadTournamentSize { k: usize, size: usize },
}

/// Draws `k` distinct members uniformly and returns the index of the
/// winner: highest fitness, then fewer tree nodes, then earlier index.
pub fn tournament_select<R: Rng + ?Sized>(
    pop: &Population,
    k: usize,
    rng: &mut R,
) -> Result<usize, SelectionError> {
    let size = pop.members.len();
    if k == 0 || k > size {
        return Err(SelectionError::BadTournamentSize { k, size });
    }
    if let Some(i) = pop.members.iter().position(|m| m.fitness.is_none()) {
        return Err(SelectionError::Unevaluated(i));
    }
    let mut best: Option<(usize, f64, usize)> = None;
    for i in index::sample(rng, size, k) {
        let m = &pop.members[i];
        let (f, n) = (m.fitness.unwrap_or(0.0), m.node_count());
        let better = match best {
            None => true,
            Some((bi, bf, bn)) => f > bf || (f == bf && (n < bn || (n == bn && i < bi))),
        };
        if better {
            best = Some((i, f, n));
        }
    }
    Ok(best.map(|(i, _, _)| i).expect("k >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genetic::Individual;
    use crate::tree::DerivationTree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn member(nodes: usize, fitness: f64) -> Individual {
        let children = (1..nodes).map(|_| DerivationTree::terminal("x")).collect();
        let mut m = Individual::new(DerivationTree::Nonterminal {
            rule: 0,
            alt: 0,
            children,
        });
        m.fitness = Some(fitness);
        m
    }

    #[test]
    fn full_tournament_is_argmax() {
        let pop = Population::new(vec![member(1, 10.0), member(1, 30.0), member(1, 20.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(tournament_select(&pop, 3, &mut rng), Ok(1));
        }
    }

    #[test]
    fn ties_prefer_smaller_then_earlier() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pop = Population::new(vec![member(7, 5.0), member(3, 5.0)]);
        assert_eq!(tournament_select(&pop, 2, &mut rng), Ok(1));
        let pop = Population::new(vec![member(3, 5.0), member(3, 5.0)]);
        assert_eq!(tournament_select(&pop, 2, &mut rng), Ok(0));
    }

    #[test]
    fn errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pop = Population::new(vec![member(1, 1.0), member(1, 1.0)]);
        assert!(tournament_select(&pop, 3, &mut rng).is_err());
        assert!(tournament_select(&pop, 0, &mut rng).is_err());
        pop.members[1].fitness = None;
        assert_eq!(
            tournament_select(&pop, 1, &mut rng),
            Err(SelectionError::Unevaluated(1))
        );
    }
}
