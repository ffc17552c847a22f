//! The finite customer pool. Customers rest in the pool between visits,
//! are drawn uniformly at random when an arrival fires, and return with
//! their visit score added to a history that persists for the whole run.

use alloc::vec::Vec;
use core::fmt;

use crate::agents::{CustomerId, CustomerState, Stereotype, VisitOutcome};
use crate::engine::RngStream;

/// Number of customers per stereotype, indexed by [`Stereotype::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PoolMix(pub [u32; 5]);

/// The seven customer type configurations of the sensitivity experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MixConfig {
    A,
    B,
    C,
    D,
    E,
    F,
    /// Manager-reported split for audio & TV.
    GAudioTv,
    /// Manager-reported split for womenswear.
    GWomenswear,
}

impl MixConfig {
    pub fn label(self) -> &'static str {
        match self {
            MixConfig::A => "a",
            MixConfig::B => "b",
            MixConfig::C => "c",
            MixConfig::D => "d",
            MixConfig::E => "e",
            MixConfig::F => "f",
            MixConfig::GAudioTv | MixConfig::GWomenswear => "g",
        }
    }

    pub fn mix(self) -> PoolMix {
        PoolMix(match self {
            MixConfig::A => [10_000, 0, 0, 0, 0],
            MixConfig::B => [0, 10_000, 0, 0, 0],
            MixConfig::C => [0, 0, 10_000, 0, 0],
            MixConfig::D => [0, 0, 0, 10_000, 0],
            MixConfig::E => [0, 0, 0, 0, 10_000],
            MixConfig::F => [2_000; 5],
            MixConfig::GAudioTv => [500, 4_000, 4_000, 500, 1_000],
            MixConfig::GWomenswear => [8_000, 0, 0, 2_000, 0],
        })
    }
}

impl PoolMix {
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn count(&self, s: Stereotype) -> u32 {
        self.0[s.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolError {
    Empty,
    /// The customer is already resting; returning it again is a model bug.
    DoubleReturn(CustomerId),
    UnknownCustomer(CustomerId),
}

impl fmt::Display for PoolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoolError::Empty => f.write_str("customer pool must contain at least one customer"),
            PoolError::DoubleReturn(id) => write!(f, "customer {id} returned to the pool twice"),
            PoolError::UnknownCustomer(id) => write!(f, "customer {id} does not exist"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CustomerHistory {
    pub cumulative_score: i64,
    pub visits: u32,
    pub per_visit_scores: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Customer {
    pub id: CustomerId,
    pub stereotype: Stereotype,
    pub state: CustomerState,
    pub history: CustomerHistory,
}

#[derive(Debug, Clone)]
pub struct CustomerPool {
    members: Vec<Customer>,
    resting: Vec<CustomerId>,
    // position of each member in `resting`, or usize::MAX when in-department
    slot: Vec<usize>,
}

const OUT: usize = usize::MAX;

impl CustomerPool {
    /// Build a pool with exactly the requested composition, ordered by
    /// stereotype. All histories start at zero and every customer rests.
    pub fn create(mix: &PoolMix) -> Result<Self, PoolError> {
        let size = mix.total();
        if size == 0 {
            return Err(PoolError::Empty);
        }
        let mut members = Vec::with_capacity(size as usize);
        for stereotype in Stereotype::ALL {
            for _ in 0..mix.count(stereotype) {
                let id = members.len() as CustomerId;
                members.push(Customer {
                    id,
                    stereotype,
                    state: CustomerState::RestingInPool,
                    history: CustomerHistory::default(),
                });
            }
        }
        let resting: Vec<CustomerId> = (0..size as CustomerId).collect();
        let slot = (0..size as usize).collect();
        Ok(Self {
            members,
            resting,
            slot,
        })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn resting(&self) -> usize {
        self.resting.len()
    }

    pub fn in_department(&self) -> usize {
        self.members.len() - self.resting.len()
    }

    pub fn customer(&self, id: CustomerId) -> &Customer {
        &self.members[id as usize]
    }

    pub fn customer_mut(&mut self, id: CustomerId) -> &mut Customer {
        &mut self.members[id as usize]
    }

    pub fn members(&self) -> &[Customer] {
        &self.members
    }

    pub fn is_resting(&self, id: CustomerId) -> bool {
        self.slot[id as usize] != OUT
    }

    /// Draw a uniformly random resting customer and mark it in-department.
    /// The caller moves it out of the resting state. `None` when every
    /// customer is already inside.
    pub fn draw(&mut self, rng: &mut RngStream) -> Option<CustomerId> {
        if self.resting.is_empty() {
            return None;
        }
        let pos = rng.below(self.resting.len());
        let id = self.resting.swap_remove(pos);
        if let Some(&moved) = self.resting.get(pos) {
            self.slot[moved as usize] = pos;
        }
        self.slot[id as usize] = OUT;
        Some(id)
    }

    /// Put a customer back after a completed visit and fold the visit score
    /// into its history.
    pub fn return_customer(
        &mut self,
        id: CustomerId,
        outcome: &VisitOutcome,
    ) -> Result<(), PoolError> {
        let idx = id as usize;
        if idx >= self.members.len() {
            return Err(PoolError::UnknownCustomer(id));
        }
        if self.slot[idx] != OUT {
            return Err(PoolError::DoubleReturn(id));
        }
        let customer = &mut self.members[idx];
        customer.history.cumulative_score += i64::from(outcome.per_visit_score);
        customer.history.visits += 1;
        customer.history.per_visit_scores.push(outcome.per_visit_score);
        customer.state = CustomerState::RestingInPool;
        self.slot[idx] = self.resting.len();
        self.resting.push(id);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::ExitCategory;
    use crate::engine::{fork_stream, StreamId};

    fn outcome(score: i32) -> VisitOutcome {
        VisitOutcome {
            exit_category: ExitCategory::LeftWithoutFindingAnything,
            per_visit_score: score,
            transactions_made: 0,
        }
    }

    #[test]
    fn mixes_total_ten_thousand() {
        use MixConfig::*;
        for m in [A, B, C, D, E, F, GAudioTv, GWomenswear] {
            assert_eq!(m.mix().total(), 10_000, "{m:?}");
        }
        assert_eq!(GAudioTv.mix().0, [500, 4000, 4000, 500, 1000]);
    }

    #[test]
    fn empty_pool_rejected() {
        assert_eq!(CustomerPool::create(&PoolMix([0; 5])).unwrap_err(), PoolError::Empty);
    }

    #[test]
    fn homogeneous_pool_draws_single_stereotype() {
        let mut pool = CustomerPool::create(&MixConfig::A.mix()).unwrap();
        let mut rng = fork_stream(9, 0, StreamId::PoolDraws);
        for _ in 0..500 {
            let id = pool.draw(&mut rng).unwrap();
            assert_eq!(pool.customer(id).stereotype, Stereotype::ShoppingEnthusiast);
        }
    }

    #[test]
    fn single_member_pool() {
        let mut pool = CustomerPool::create(&PoolMix([0, 0, 1, 0, 0])).unwrap();
        let mut rng = fork_stream(9, 0, StreamId::PoolDraws);
        assert_eq!(pool.draw(&mut rng), Some(0));
        assert_eq!(pool.draw(&mut rng), None);
        pool.return_customer(0, &outcome(0)).unwrap();
        assert_eq!(pool.draw(&mut rng), Some(0));
    }

    #[test]
    fn drawn_customers_are_exclusive_until_returned() {
        let mut pool = CustomerPool::create(&PoolMix([3, 2, 0, 0, 0])).unwrap();
        let mut rng = fork_stream(2, 0, StreamId::PoolDraws);
        let mut drawn: Vec<_> = (0..5).map(|_| pool.draw(&mut rng).unwrap()).collect();
        drawn.sort_unstable();
        assert_eq!(drawn, [0, 1, 2, 3, 4]);
        assert_eq!(pool.in_department(), 5);
        assert!(pool.draw(&mut rng).is_none());
    }

    #[test]
    fn history_accumulates_and_double_return_is_rejected() {
        let mut pool = CustomerPool::create(&PoolMix([1, 0, 0, 0, 0])).unwrap();
        let mut rng = fork_stream(2, 0, StreamId::PoolDraws);
        let id = pool.draw(&mut rng).unwrap();
        pool.return_customer(id, &outcome(-1)).unwrap();
        assert_eq!(pool.customer(id).history.cumulative_score, -1);
        assert_eq!(pool.customer(id).history.visits, 1);
        assert_eq!(pool.return_customer(id, &outcome(1)), Err(PoolError::DoubleReturn(id)));

        let mut pool = CustomerPool::create(&PoolMix([1, 0, 0, 0, 0])).unwrap();
        for score in [1, -2] {
            let id = pool.draw(&mut rng).unwrap();
            pool.return_customer(id, &outcome(score)).unwrap();
        }
        let h = &pool.customer(0).history;
        assert_eq!((h.cumulative_score, h.visits), (-1, 2));
        assert_eq!(h.per_visit_scores, [1, -2]);
    }

    #[test]
    fn even_mix_draw_frequencies() {
        let mut pool = CustomerPool::create(&MixConfig::F.mix()).unwrap();
        let mut rng = fork_stream(11, 0, StreamId::PoolDraws);
        let mut counts = [0u32; 5];
        let n = 100_000;
        for _ in 0..n {
            let id = pool.draw(&mut rng).unwrap();
            counts[pool.customer(id).stereotype.index()] += 1;
            pool.return_customer(id, &outcome(0)).unwrap();
        }
        for c in counts {
            let share = f64::from(c) / f64::from(n);
            assert!((share - 0.2).abs() < 0.005, "share {share}");
        }
    }
}
