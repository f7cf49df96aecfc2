use rand::{Rng, RngCore};

use super::{all_labels, BobMove, NonlocalStrategy};
use crate::model::{Bitstring, Index, Matching};

/// Both players answer uniformly at random: a uniform label for Alice, a
/// uniform edge and label for Bob. Wins with probability exactly 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformRandomStrategy {
    n: usize,
}

impl UniformRandomStrategy {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl NonlocalStrategy for UniformRandomStrategy {
    type Shared = ();

    fn n(&self) -> usize {
        self.n
    }

    fn shared_support(&self) -> Option<Vec<()>> {
        Some(vec![()])
    }

    fn sample_shared(&self, _rng: &mut dyn RngCore) {}

    fn alice(&self, _x: &Bitstring, _: &()) -> Vec<Index> {
        all_labels(self.n)
    }

    fn bob(&self, m: &Matching, _: &()) -> Vec<BobMove> {
        m.edges()
            .iter()
            .flat_map(|&edge| all_labels(self.n).into_iter().map(move |b| BobMove { edge, b }))
            .collect()
    }

    fn sample_alice(&self, _x: &Bitstring, _: &(), rng: &mut dyn RngCore) -> Index {
        Index(rng.random_range(0..self.n as u32))
    }

    fn sample_bob(&self, m: &Matching, _: &(), rng: &mut dyn RngCore) -> BobMove {
        BobMove {
            edge: m.edges()[rng.random_range(0..m.edges().len())],
            b: Index(rng.random_range(0..self.n as u32)),
        }
    }
}
