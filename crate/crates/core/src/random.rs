//! Seeded random markets and grid samples.
//!
//! Market `k` of a suite draws from its own ChaCha stream, so any single
//! market can be regenerated from `(seed, k)` without replaying the others.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::market::{Id, Market, PriceVector, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub seed: u64,
    pub trials: usize,
    pub max_buyers: usize,
    pub max_goods: usize,
    pub max_value: u64,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        SuiteSpec { seed: 7, trials: 200, max_buyers: 3, max_goods: 3, max_value: 6 }
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform valuations in `[0, max_value]` for a market of exactly the given size.
pub fn random_valuations<R: Rng>(rng: &mut R, buyers: usize, goods: usize, max_value: u64) -> Vec<Vec<u64>> {
    (0..buyers).map(|_| (0..goods).map(|_| rng.gen_range(0..=max_value)).collect()).collect()
}

fn named(valuations: Vec<Vec<u64>>, name: String, tick: Rational) -> Result<Market> {
    let buyers = (1..=valuations.len() as u64).map(Id::Int).collect();
    let goods = (0..valuations.first().map_or(0, Vec::len)).map(crate::market::default_good_id).collect();
    Market::new(Some(name), buyers, goods, valuations, None, tick)
}

/// A market of fixed size, as produced by `gen`.
pub fn generate(seed: u64, buyers: usize, goods: usize, max_value: u64) -> Result<Market> {
    let mut rng = rng_for(seed, 0);
    let valuations = random_valuations(&mut rng, buyers, goods, max_value);
    named(valuations, format!("random-{seed}-{buyers}x{goods}"), Market::DEFAULT_TICK)
}

/// Market `k` of a suite: sizes uniform in `1..=max`, values uniform in `[0, max_value]`.
pub fn suite_market(shape: &SuiteSpec, k: usize) -> Result<Market> {
    let mut rng = rng_for(shape.seed, k as u64 + 1);
    let buyers = rng.gen_range(1..=shape.max_buyers.max(1));
    let goods = rng.gen_range(1..=shape.max_goods.max(1));
    let valuations = random_valuations(&mut rng, buyers, goods, shape.max_value);
    named(valuations, format!("suite-{}-{k}", shape.seed), Market::DEFAULT_TICK)
}

pub fn suite(shape: &SuiteSpec) -> Result<Vec<Market>> {
    (0..shape.trials).map(|k| suite_market(shape, k)).collect()
}

/// A uniform grid point.
pub fn random_point<R: Rng>(rng: &mut R, market: &Market) -> PriceVector {
    let cap = market.cap_ticks();
    PriceVector::new((0..market.num_goods()).map(|_| rng.gen_range(0..=cap)).collect())
}

/// A pair `p ≤ q`: `p` uniform, then each `q_x` uniform in `[p_x, H]`.
pub fn random_ordered_pair<R: Rng>(rng: &mut R, market: &Market) -> (PriceVector, PriceVector) {
    let cap = market.cap_ticks();
    let p = random_point(rng, market);
    let q = PriceVector::new(p.ticks().iter().map(|&t| rng.gen_range(t..=cap)).collect());
    (p, q)
}
