//! Brute-force oracles shared by the integration tests.
//!
//! Nothing here calls the matching, tipping or price-map code: demand is
//! recomputed with exact rationals, set conditions by enumerating subsets,
//! and equilibria by searching allocations.

#![allow(dead_code)]

use num_rational::Ratio;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use walras::random::{rng_for, suite, SuiteSpec};
use walras::{Market, PriceVector, Ticks};

pub type Q = Ratio<i64>;

pub fn e1() -> Market {
    Market::from_valuations(vec![vec![5], vec![3]]).unwrap()
}

pub fn e2() -> Market {
    Market::from_valuations(vec![vec![4, 1], vec![3, 2]]).unwrap()
}

pub fn unit_tick(market: &Market) -> Market {
    market.with_tick(Ratio::from_integer(1)).unwrap()
}

/// The 200-market suite: sizes in 1..=3, values in [0, 6], tick 1/2.
pub fn random_suite() -> Vec<Market> {
    suite(&SuiteSpec { seed: 7, trials: 200, max_buyers: 3, max_goods: 3, max_value: 6 }).unwrap()
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    rng_for(0xacce97, stream)
}

pub fn pv(t: &[Ticks]) -> PriceVector {
    PriceVector::new(t.to_vec())
}

pub fn price(market: &Market, t: Ticks) -> Q {
    let r = market.ticks_to_price(t);
    Ratio::new(*r.numer() as i64, *r.denom() as i64)
}

/// Every point of `{0, ..., H}^m` in ticks, lexicographic.
pub fn grid(market: &Market) -> Vec<PriceVector> {
    let cap = market.cap_ticks();
    let mut points = vec![Vec::new()];
    for _ in 0..market.num_goods() {
        points = points
            .into_iter()
            .flat_map(|prefix: Vec<Ticks>| {
                (0..=cap).map(move |t| {
                    let mut p = prefix.clone();
                    p.push(t);
                    p
                })
            })
            .collect();
    }
    points.into_iter().map(PriceVector::new).collect()
}

pub fn random_grid_point<R: Rng>(rng: &mut R, market: &Market) -> PriceVector {
    PriceVector::new((0..market.num_goods()).map(|_| rng.gen_range(0..=market.cap_ticks())).collect())
}

/// Demand of one buyer: goods maximizing surplus, and whether 0 does too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demand {
    pub goods: Vec<usize>,
    pub dummy: bool,
}

pub fn demand(market: &Market, p: &PriceVector) -> Vec<Demand> {
    let m = market.num_goods();
    market
        .valuations()
        .iter()
        .map(|row| {
            let surplus: Vec<Q> =
                (0..m).map(|x| Ratio::from_integer(row[x] as i64) - price(market, p.get(x))).collect();
            let best = surplus.iter().copied().fold(Ratio::from_integer(0), Q::max);
            Demand { goods: (0..m).filter(|&x| surplus[x] == best).collect(), dummy: best == Ratio::from_integer(0) }
        })
        .collect()
}

pub fn subsets(pool: &[usize]) -> Vec<Vec<usize>> {
    (1u32..1 << pool.len())
        .map(|mask| (0..pool.len()).filter(|b| mask >> b & 1 == 1).map(|b| pool[b]).collect())
        .collect()
}

pub fn positive(p: &PriceVector) -> Vec<usize> {
    (0..p.len()).filter(|&x| p.get(x) > 0).collect()
}

pub fn exclusive_count(d: &[Demand], s: &[usize]) -> usize {
    d.iter().filter(|di| !di.dummy && di.goods.iter().all(|x| s.contains(x))).count()
}

pub fn demander_count(d: &[Demand], s: &[usize]) -> usize {
    d.iter().filter(|di| di.goods.iter().any(|x| s.contains(x))).count()
}

pub fn is_over(d: &[Demand], s: &[usize]) -> bool {
    !s.is_empty() && exclusive_count(d, s) > s.len()
}

pub fn is_under(d: &[Demand], pos: &[usize], s: &[usize]) -> bool {
    !s.is_empty() && s.iter().all(|x| pos.contains(x)) && demander_count(d, s) < s.len()
}

pub fn some_over(market: &Market, p: &PriceVector) -> bool {
    let d = demand(market, p);
    let all: Vec<usize> = (0..market.num_goods()).collect();
    subsets(&all).iter().any(|s| is_over(&d, s))
}

pub fn some_under(market: &Market, p: &PriceVector) -> bool {
    let d = demand(market, p);
    let pos = positive(p);
    subsets(&pos).iter().any(|s| is_under(&d, &pos, s))
}

fn proper_subsets_containing(s: &[usize], x: usize) -> Vec<Vec<usize>> {
    let rest: Vec<usize> = s.iter().copied().filter(|&y| y != x).collect();
    let mut out = vec![vec![x]];
    for t in subsets(&rest) {
        if t.len() < rest.len() {
            let mut t = t;
            t.push(x);
            out.push(t);
        }
    }
    out.retain(|t| t.len() < s.len());
    out
}

/// Some over-demanded `S ∋ x` has no over-demanded proper subset containing `x`.
pub fn minimally_over(market: &Market, p: &PriceVector, x: usize) -> bool {
    let d = demand(market, p);
    let all: Vec<usize> = (0..market.num_goods()).collect();
    subsets(&all)
        .iter()
        .filter(|s| s.contains(&x) && is_over(&d, s))
        .any(|s| !proper_subsets_containing(s, x).iter().any(|t| is_over(&d, t)))
}

pub fn minimally_under(market: &Market, p: &PriceVector, x: usize) -> bool {
    let d = demand(market, p);
    let pos = positive(p);
    subsets(&pos)
        .iter()
        .filter(|s| s.contains(&x) && is_under(&d, &pos, s))
        .any(|s| !proper_subsets_containing(s, x).iter().any(|t| is_under(&d, &pos, t)))
}

/// Searches all allocations for one where every buyer gets a demanded
/// object and every positively priced good is sold.
pub fn is_we(market: &Market, p: &PriceVector) -> bool {
    fn assign(d: &[Demand], i: usize, used: &mut Vec<bool>, pos: &[usize]) -> bool {
        if i == d.len() {
            return pos.iter().all(|&x| used[x]);
        }
        if d[i].dummy && assign(d, i + 1, used, pos) {
            return true;
        }
        for &x in &d[i].goods {
            if !used[x] {
                used[x] = true;
                let ok = assign(d, i + 1, used, pos);
                used[x] = false;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    let d = demand(market, p);
    assign(&d, 0, &mut vec![false; market.num_goods()], &positive(p))
}

pub fn we_set(market: &Market) -> Vec<PriceVector> {
    grid(market).into_iter().filter(|p| is_we(market, p)).collect()
}

/// Highest own price (in ticks) at which `a` is minimally over-demanded,
/// moved up one tick unless it is the cap; 0 when there is none.
pub fn sup_o(market: &Market, a: usize, p: &PriceVector) -> Ticks {
    let cap = market.cap_ticks();
    match (0..=cap).rev().find(|&t| minimally_over(market, &p.with(a, t), a)) {
        Some(t) if t < cap => t + 1,
        Some(t) => t,
        None => 0,
    }
}

/// Lowest own price at which `a` is minimally under-demanded, one tick
/// lower; scanned up to one tick past the cap.
pub fn inf_u(market: &Market, a: usize, p: &PriceVector) -> Option<Ticks> {
    (0..=market.cap_ticks() + 1).find(|&t| minimally_under(market, &p.with(a, t), a)).map(|t| t.saturating_sub(1))
}

/// All `q₋ₐ` with `p₋ₐ ≤ q₋ₐ ≤ H`, as full vectors with `a` left at `p`'s value.
fn upper_box(market: &Market, a: usize, p: &PriceVector) -> Vec<PriceVector> {
    grid(market)
        .into_iter()
        .filter(|q| (0..market.num_goods()).all(|x| x == a || q.get(x) >= p.get(x)))
        .map(|q| q.with(a, p.get(a)))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn neutral_s(market: &Market, a: usize, p: &PriceVector) -> Ticks {
    let others = upper_box(market, a, p);
    (0..=market.cap_ticks())
        .find(|&own| {
            others.iter().any(|q| {
                let q = q.with(a, own);
                own >= sup_o(market, a, &q) && !some_over(market, &q)
            })
        })
        .unwrap_or(market.cap_ticks())
}

pub fn neutral_i(market: &Market, a: usize, p: &PriceVector) -> Ticks {
    let others = upper_box(market, a, p);
    (0..=market.cap_ticks())
        .find(|&own| {
            others.iter().any(|q| {
                let q = q.with(a, own);
                inf_u(market, a, &q).is_some_and(|b| own >= b) && !some_under(market, &q)
            })
        })
        .unwrap_or(market.cap_ticks())
}

/// The price-adjusting map, coordinate by coordinate.
pub fn apply_map(market: &Market, p: &PriceVector) -> PriceVector {
    PriceVector::new(
        (0..market.num_goods())
            .map(|a| {
                let (s, i, own) = (neutral_s(market, a, p), neutral_i(market, a, p), p.get(a));
                if i < s {
                    (s + i) / 2
                } else if own > i {
                    i
                } else if own < s {
                    s
                } else {
                    own
                }
            })
            .collect(),
    )
}
