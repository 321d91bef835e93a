//! Canonical bisimulation contraction.
//!
//! Blocks are numbered by rank of their signature, and signatures are built
//! only from valuations and earlier block numbers, so bisimilar pointed
//! states contract to identical (not merely isomorphic) states.

use std::collections::BTreeSet;

use super::kripke::KripkeState;

type Signature = (u32, Vec<Vec<u32>>);

fn rank<T: Ord + Clone>(items: &[T]) -> Vec<u32> {
    let distinct: Vec<T> = items
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    items
        .iter()
        .map(|x| distinct.binary_search(x).unwrap() as u32)
        .collect()
}

/// Largest-bisimulation quotient of the generated submodel, in canonical form.
pub fn minimize(s: &KripkeState) -> KripkeState {
    let s = s.generated();
    let n = s.world_count();
    let agents = s.signature().agents().len();
    let mut block = rank(&(0..n).map(|w| s.valuation(w)).collect::<Vec<_>>());
    let mut count = block.iter().collect::<BTreeSet<_>>().len();
    let mut signatures: Vec<Signature>;
    loop {
        signatures = (0..n)
            .map(|w| {
                let succ = (0..agents)
                    .map(|i| {
                        s.successors(i, w)
                            .iter()
                            .map(|&v| block[v as usize])
                            .collect::<BTreeSet<_>>()
                            .into_iter()
                            .collect()
                    })
                    .collect();
                (block[w], succ)
            })
            .collect();
        let next = rank(&signatures);
        let next_count = next.iter().collect::<BTreeSet<_>>().len();
        let stable = next_count == count;
        block = next;
        count = next_count;
        if stable {
            break;
        }
    }
    // the partition is stable, so any representative yields the same successor blocks
    let mut worlds = vec![0u64; count];
    let mut relations = vec![vec![Vec::new(); count]; agents];
    let mut done = vec![false; count];
    for w in 0..n {
        let b = block[w] as usize;
        if done[b] {
            continue;
        }
        done[b] = true;
        worlds[b] = s.valuation(w);
        for (i, rel) in relations.iter_mut().enumerate() {
            rel[b] = s
                .successors(i, w)
                .iter()
                .map(|&v| block[v as usize])
                .collect();
        }
    }
    KripkeState::new(s.signature().clone(), worlds, relations, block[s.pointed()])
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::ast::*;
    use crate::oracle::kripke::Signature;

    fn sig() -> Arc<Signature> {
        Arc::new(Signature::new(vec![GroundFluent::new("p", &[])], vec![Agent::new("a")]).unwrap())
    }

    #[test]
    fn duplicate_worlds_collapse() {
        // p, p, ¬p all mutually accessible
        let all = vec![0, 1, 2];
        let s = KripkeState::new(
            sig(),
            vec![1, 1, 0],
            vec![vec![all.clone(), all.clone(), all]],
            1,
        );
        let m = minimize(&s);
        assert_eq!(m.world_count(), 2);
        assert_eq!(m.valuation(m.pointed()), 1);
    }

    #[test]
    fn unreachable_worlds_dropped() {
        let s = KripkeState::new(sig(), vec![1, 0], vec![vec![vec![0], vec![1]]], 0);
        assert_eq!(minimize(&s).world_count(), 1);
    }

    #[test]
    fn isomorphic_states_become_identical() {
        let a = KripkeState::new(sig(), vec![1, 0], vec![vec![vec![0, 1], vec![0, 1]]], 0);
        let b = KripkeState::new(sig(), vec![0, 1], vec![vec![vec![0, 1], vec![0, 1]]], 1);
        assert_eq!(minimize(&a), minimize(&b));
    }
}
