use rand::{Rng, RngCore};

use super::{all_labels, BobMove, CommProtocol, NonlocalStrategy};
use crate::error::{Error, Result};
use crate::model::{Bitstring, Index, Matching};

/// The `b` with a single 1 at the lowest set bit of `s` when `v = 1`, and
/// `b = 0` otherwise, so that `b·s = v`.
pub fn solve_b_for_parity(v: u8, s: Index) -> Result<Index> {
    if s.is_zero() {
        return Err(Error::InvalidParameter("s must be nonzero".into()));
    }
    if v > 1 {
        return Err(Error::InvalidParameter(format!("{v} is not a bit")));
    }
    Ok(Index(if v == 1 { s.0 & s.0.wrapping_neg() } else { 0 }))
}

/// Runs a `c`-bit protocol without communication: the shared string `r`
/// stands in for the message. Alice answers `0` if her real message equals
/// `r` and a private uniform label otherwise; Bob runs the protocol on `r` and
/// encodes its bit `v` as some `b` with `b·(i⊕j) = v`.
#[derive(Clone, Debug)]
pub struct SimulatedStrategy<P> {
    protocol: P,
}

pub fn nonlocal_from_comm<P: CommProtocol>(protocol: P) -> SimulatedStrategy<P> {
    SimulatedStrategy { protocol }
}

impl<P: CommProtocol> SimulatedStrategy<P> {
    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    fn encode(&self, d: super::Decision) -> BobMove {
        BobMove {
            edge: d.edge,
            b: solve_b_for_parity(d.v, d.edge.xor()).expect("edges join distinct vertices"),
        }
    }
}

impl<P: CommProtocol> NonlocalStrategy for SimulatedStrategy<P> {
    type Shared = Bitstring;

    fn n(&self) -> usize {
        self.protocol.n()
    }

    fn shared_support(&self) -> Option<Vec<Bitstring>> {
        Some(Bitstring::all(self.protocol.message_bits()).collect())
    }

    fn sample_shared(&self, rng: &mut dyn RngCore) -> Bitstring {
        Bitstring::random(self.protocol.message_bits(), rng)
    }

    fn alice(&self, x: &Bitstring, r: &Bitstring) -> Vec<Index> {
        if self.protocol.message(x) == *r {
            vec![Index(0)]
        } else {
            all_labels(self.n())
        }
    }

    fn bob(&self, m: &Matching, r: &Bitstring) -> Vec<BobMove> {
        self.protocol
            .decide(r, m)
            .into_iter()
            .map(|d| self.encode(d))
            .collect()
    }

    fn sample_alice(&self, x: &Bitstring, r: &Bitstring, rng: &mut dyn RngCore) -> Index {
        if self.protocol.message(x) == *r {
            Index(0)
        } else {
            Index(rng.random_range(0..self.n() as u32))
        }
    }

    fn sample_bob(&self, m: &Matching, r: &Bitstring, rng: &mut dyn RngCore) -> BobMove {
        self.encode(self.protocol.sample_decision(r, m, rng))
    }
}
