//! Tipping prices `sup 𝒪ₐ`, `inf 𝒰ₐ` and neutral prices `𝒮ₐ`, `ℐₐ`.
//!
//! Everything is an exact search over the tick grid. Being minimally
//! over- or underdemanded is an open condition in the own price, so the
//! grid sup/inf is moved one tick outward: the largest grid price at which
//! a good is minimally overdemanded is promoted by one tick, the smallest
//! at which it is minimally underdemanded is demoted by one tick.
//!
//! The neutral prices range over the box `q₋ₐ ∈ [p₋ₐ, H]`, so one call can
//! probe many price vectors. Verdicts are memoized per price vector in a
//! [`Tipping`] context and shared across calls and threads.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    minimal_over_witness, minimal_under_witness, overdemand_certificate, underdemand_certificate, Verdict,
    MINIMALITY_CAP,
};
use crate::error::{Error, Result};
use crate::market::{demand_at, GoodSet, Market, PriceVector, Ticks};

/// Where the constraint `qₐ ≥ sup 𝒪ₐ(·)` (and `qₐ ≥ inf 𝒰ₐ(·)`) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintReading {
    /// At the candidate's own `q₋ₐ`.
    #[default]
    Candidate,
    /// At the base prices `p₋ₐ`.
    Base,
}

/// How an undefined `inf 𝒰ₐ(q₋ₐ)` constrains the `ℐₐ` search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingInfU {
    /// Treat it as `+∞`: that `q₋ₐ` contributes nothing.
    #[default]
    Exclude,
    /// Treat the constraint as satisfied.
    Vacuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TippingConfig {
    pub constraint: ConstraintReading,
    pub missing_inf_u: MissingInfU,
    /// Maximum box probes in one neutral-price search.
    pub budget: u64,
}

impl TippingConfig {
    pub const DEFAULT_BUDGET: u64 = 50_000_000;
}

impl Default for TippingConfig {
    fn default() -> Self {
        TippingConfig {
            constraint: ConstraintReading::Candidate,
            missing_inf_u: MissingInfU::Exclude,
            budget: Self::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TippingProfile {
    pub good: usize,
    pub base: Vec<Ticks>,
    pub sup_o: Ticks,
    /// `None` when no own price makes the good minimally underdemanded.
    pub inf_u: Option<Ticks>,
    pub neutral_s: Ticks,
    pub neutral_i: Ticks,
}

impl TippingProfile {
    /// `inf_U` as a number, with `H + tick` standing in for "none".
    pub fn inf_u_or_sentinel(&self, market: &Market) -> Ticks {
        self.inf_u.unwrap_or(market.cap_ticks() + 1)
    }

    pub fn to_json(&self, market: &Market) -> serde_json::Value {
        json!({
            "good": market.goods()[self.good].to_string(),
            "base_prices": market.prices_json(&self.base),
            "sup_O": market.price_json(self.sup_o),
            "inf_U": self.inf_u.map(|t| market.price_json(t)),
            "S": market.price_json(self.neutral_s),
            "I": market.price_json(self.neutral_i),
        })
    }
}

struct Memo<K, V> {
    map: RwLock<HashMap<K, V>>,
}

impl<K: Eq + Hash, V: Clone> Memo<K, V> {
    fn new() -> Self {
        Memo { map: RwLock::new(HashMap::new()) }
    }

    /// Values are pure functions of their keys, so a racing insert stores
    /// the same value twice.
    fn get_or_try(&self, key: K, compute: impl FnOnce() -> Result<V>) -> Result<V> {
        if let Some(v) = self.map.read().expect("memo lock").get(&key) {
            return Ok(v.clone());
        }
        let v = compute()?;
        self.map.write().expect("memo lock").insert(key, v.clone());
        Ok(v)
    }

    fn get_or(&self, key: K, compute: impl FnOnce() -> V) -> V {
        match self.get_or_try(key, || Ok(compute())) {
            Ok(v) => v,
            Err(_) => unreachable!("infallible computation"),
        }
    }
}

type CoordKey = (usize, Vec<Ticks>);

/// Odometer step through `[base, cap]`, last coordinate fastest.
fn next_in_box(point: &mut [Ticks], base: &[Ticks], cap: Ticks) -> bool {
    for k in (0..point.len()).rev() {
        if point[k] < cap {
            point[k] += 1;
            return true;
        }
        point[k] = base[k];
    }
    false
}

/// Memoizing evaluator for tipping and neutral prices of one market.
pub struct Tipping<'m> {
    market: &'m Market,
    config: TippingConfig,
    no_over: Memo<Vec<Ticks>, bool>,
    no_under: Memo<Vec<Ticks>, bool>,
    sup_o: Memo<CoordKey, Ticks>,
    inf_u: Memo<CoordKey, Option<Ticks>>,
    neutral_s: Memo<CoordKey, Ticks>,
    neutral_i: Memo<CoordKey, Ticks>,
    evaluations: AtomicU64,
}

impl<'m> Tipping<'m> {
    pub fn new(market: &'m Market) -> Self {
        Tipping::with_config(market, TippingConfig::default())
    }

    pub fn with_config(market: &'m Market, config: TippingConfig) -> Self {
        Tipping {
            market,
            config,
            no_over: Memo::new(),
            no_under: Memo::new(),
            sup_o: Memo::new(),
            inf_u: Memo::new(),
            neutral_s: Memo::new(),
            neutral_i: Memo::new(),
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn market(&self) -> &'m Market {
        self.market
    }

    pub fn config(&self) -> TippingConfig {
        self.config
    }

    /// Demand-level predicate evaluations performed so far (cache misses).
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    fn check_coord(&self, a: usize, base: &[Ticks]) -> Result<()> {
        let m = self.market.num_goods();
        if a >= m {
            return Err(Error::UnknownGood(format!("#{a}")));
        }
        if m > MINIMALITY_CAP {
            return Err(Error::SubsetCapExceeded { goods: m, cap: MINIMALITY_CAP });
        }
        if base.len() + 1 != m {
            return Err(Error::DimensionMismatch { expected: m - 1, found: base.len() });
        }
        let cap = self.market.cap_ticks();
        if let Some(k) = base.iter().position(|&t| t > cap) {
            let good = if k < a { k } else { k + 1 };
            return Err(Error::PriceOutOfRange { good, ticks: base[k], cap });
        }
        Ok(())
    }

    fn tick_eval(&self) {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
    }

    fn minimally_over(&self, a: usize, own: Ticks, base: &[Ticks]) -> bool {
        self.tick_eval();
        let p = PriceVector::assemble(a, own, base);
        minimal_over_witness(&demand_at(self.market, p.ticks()), self.market.num_goods(), a).is_some()
    }

    fn minimally_under(&self, a: usize, own: Ticks, base: &[Ticks]) -> bool {
        self.tick_eval();
        let p = PriceVector::assemble(a, own, base);
        let profile = demand_at(self.market, p.ticks());
        minimal_under_witness(&profile, p.positive(), self.market.num_goods(), a).is_some()
    }

    /// No set is overdemanded at `q`.
    pub fn no_overdemand(&self, q: &[Ticks]) -> bool {
        self.no_over.get_or(q.to_vec(), || {
            self.tick_eval();
            let profile = demand_at(self.market, q);
            overdemand_certificate(&profile, self.market.num_goods()).verdict == Verdict::None
        })
    }

    /// No set is underdemanded at `q`.
    pub fn no_underdemand(&self, q: &[Ticks]) -> bool {
        self.no_under.get_or(q.to_vec(), || {
            self.tick_eval();
            let profile = demand_at(self.market, q);
            let positive = GoodSet::from_indices(q.iter().enumerate().filter(|(_, &t)| t > 0).map(|(x, _)| x));
            underdemand_certificate(&profile, positive, self.market.num_goods()).verdict == Verdict::None
        })
    }

    /// `sup 𝒪ₐ(p₋ₐ)`: highest own price at which `a` is minimally
    /// overdemanded, promoted one tick past the last grid hit; `0` if none.
    pub fn sup_o(&self, a: usize, base: &[Ticks]) -> Result<Ticks> {
        self.check_coord(a, base)?;
        self.sup_o.get_or_try((a, base.to_vec()), || {
            let cap = self.market.cap_ticks();
            let last = (0..=cap).rev().find(|&k| self.minimally_over(a, k, base));
            Ok(match last {
                None => 0,
                Some(k) if k < cap => k + 1,
                Some(k) => k,
            })
        })
    }

    /// `inf 𝒰ₐ(p₋ₐ)`: lowest own price at which `a` is minimally
    /// underdemanded, demoted one tick below the first grid hit.
    ///
    /// The scan runs one tick past `H`, where the good is priced above every
    /// valuation; so for a validated market the result is always `Some`.
    pub fn inf_u(&self, a: usize, base: &[Ticks]) -> Result<Option<Ticks>> {
        self.check_coord(a, base)?;
        self.inf_u.get_or_try((a, base.to_vec()), || {
            let cap = self.market.cap_ticks();
            let first = (0..=cap + 1).find(|&k| self.minimally_under(a, k, base));
            Ok(first.map(|k| k.saturating_sub(1)))
        })
    }

    /// `𝒮ₐ(p₋ₐ)`: least `qₐ` such that some `q₋ₐ ≥ p₋ₐ` has no overdemanded
    /// set at `(qₐ, q₋ₐ)` and `qₐ ≥ sup 𝒪ₐ(q₋ₐ)`.
    pub fn neutral_s(&self, a: usize, base: &[Ticks]) -> Result<Ticks> {
        self.check_coord(a, base)?;
        self.neutral_s.get_or_try((a, base.to_vec()), || {
            let base_bound = match self.config.constraint {
                ConstraintReading::Base => Some(self.sup_o(a, base)?),
                ConstraintReading::Candidate => None,
            };
            let found = self.box_search(base, |own, others| {
                let bound = match base_bound {
                    Some(b) => b,
                    None => self.sup_o(a, others)?,
                };
                Ok(own >= bound && self.no_overdemand(PriceVector::assemble(a, own, others).ticks()))
            })?;
            // The top corner is never overdemanded, so the search always hits.
            Ok(found.unwrap_or(self.market.cap_ticks()))
        })
    }

    /// `ℐₐ(p₋ₐ)`: least `qₐ` such that some `q₋ₐ ≥ p₋ₐ` has no underdemanded
    /// set at `(qₐ, q₋ₐ)` and `qₐ ≥ inf 𝒰ₐ(q₋ₐ)`; `H` if there is none.
    pub fn neutral_i(&self, a: usize, base: &[Ticks]) -> Result<Ticks> {
        self.check_coord(a, base)?;
        self.neutral_i.get_or_try((a, base.to_vec()), || {
            let base_bound = match self.config.constraint {
                ConstraintReading::Base => Some(self.inf_u(a, base)?),
                ConstraintReading::Candidate => None,
            };
            let found = self.box_search(base, |own, others| {
                let bound = match base_bound {
                    Some(b) => b,
                    None => self.inf_u(a, others)?,
                };
                let bound = match (bound, self.config.missing_inf_u) {
                    (Some(b), _) => b,
                    (None, MissingInfU::Vacuous) => 0,
                    (None, MissingInfU::Exclude) => return Ok(false),
                };
                Ok(own >= bound && self.no_underdemand(PriceVector::assemble(a, own, others).ticks()))
            })?;
            Ok(found.unwrap_or(self.market.cap_ticks()))
        })
    }

    /// Least own price `qₐ ∈ [0, H]` for which some `q₋ₐ` in the box
    /// `[base, H]` satisfies `accept`. Scans `qₐ` ascending, then `q₋ₐ`
    /// lexicographically, and stops at the first hit.
    fn box_search(
        &self,
        base: &[Ticks],
        mut accept: impl FnMut(Ticks, &[Ticks]) -> Result<bool>,
    ) -> Result<Option<Ticks>> {
        let cap = self.market.cap_ticks();
        let mut probes: u64 = 0;
        for own in 0..=cap {
            let mut others = base.to_vec();
            loop {
                probes += 1;
                if probes > self.config.budget {
                    let side = u64::from(cap) + 1;
                    let needed = base.iter().fold(side, |acc, &b| acc.saturating_mul(u64::from(cap - b) + 1));
                    return Err(Error::BudgetExceeded { needed, budget: self.config.budget });
                }
                if accept(own, &others)? {
                    return Ok(Some(own));
                }
                if !next_in_box(&mut others, base, cap) {
                    break;
                }
            }
        }
        Ok(None)
    }

    pub fn profile(&self, a: usize, base: &[Ticks]) -> Result<TippingProfile> {
        Ok(TippingProfile {
            good: a,
            base: base.to_vec(),
            sup_o: self.sup_o(a, base)?,
            inf_u: self.inf_u(a, base)?,
            neutral_s: self.neutral_s(a, base)?,
            neutral_i: self.neutral_i(a, base)?,
        })
    }
}
