//! The price-adjusting map `f : [0, H]^m → [0, H]^m`.
//!
//! Coordinate `a` looks only at the neutral prices `𝒮ₐ(p₋ₐ)` and `ℐₐ(p₋ₐ)`:
//!
//! | region   | condition            | `fₐ(p)`              |
//! |----------|----------------------|----------------------|
//! | AboveI   | `pₐ > ℐₐ ≥ 𝒮ₐ`       | `ℐₐ`                 |
//! | Neutral  | `𝒮ₐ ≤ pₐ ≤ ℐₐ`       | `pₐ`                 |
//! | BelowS   | `pₐ < 𝒮ₐ ≤ ℐₐ`       | `𝒮ₐ`                 |
//! | Inverted | `ℐₐ < 𝒮ₐ`            | `⌊(𝒮ₐ + ℐₐ) / 2⌋`    |
//!
//! The inverted average is floored to the grid. All coordinates read the
//! same input vector (a simultaneous update).

use serde::Serialize;
use serde_json::json;

use crate::error::Result;
use crate::market::{Market, PriceVector, Ticks};
use crate::tipping::{Tipping, TippingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    AboveI,
    Neutral,
    BelowS,
    Inverted,
}

impl Region {
    /// Colour used for the region in plots.
    pub fn colour(self) -> &'static str {
        match self {
            Region::AboveI => "red",
            Region::Neutral => "yellow",
            Region::BelowS => "green",
            Region::Inverted => "blue",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::AboveI => "above_i",
            Region::Neutral => "neutral",
            Region::BelowS => "below_s",
            Region::Inverted => "inverted",
        }
    }

    /// Position along the own-price axis when `𝒮ₐ ≤ ℐₐ`; `None` for Inverted.
    pub fn rank(self) -> Option<u8> {
        match self {
            Region::BelowS => Some(0),
            Region::Neutral => Some(1),
            Region::AboveI => Some(2),
            Region::Inverted => None,
        }
    }
}

pub fn region_of(own: Ticks, neutral_s: Ticks, neutral_i: Ticks) -> Region {
    if neutral_i < neutral_s {
        Region::Inverted
    } else if own > neutral_i {
        Region::AboveI
    } else if own < neutral_s {
        Region::BelowS
    } else {
        Region::Neutral
    }
}

/// The adjusting rule for one coordinate, given its neutral prices.
pub fn adjust(own: Ticks, neutral_s: Ticks, neutral_i: Ticks) -> Ticks {
    match region_of(own, neutral_s, neutral_i) {
        Region::AboveI => neutral_i,
        Region::Neutral => own,
        Region::BelowS => neutral_s,
        Region::Inverted => (neutral_s + neutral_i) / 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateStep {
    pub good: usize,
    pub region: Region,
    pub neutral_s: Ticks,
    pub neutral_i: Ticks,
    pub input: Ticks,
    pub output: Ticks,
}

/// The price-adjusting map of one market, with a shared tipping cache.
pub struct PriceMap<'m> {
    tipping: Tipping<'m>,
}

impl<'m> PriceMap<'m> {
    pub fn new(market: &'m Market) -> Self {
        PriceMap { tipping: Tipping::new(market) }
    }

    pub fn with_config(market: &'m Market, config: TippingConfig) -> Self {
        PriceMap { tipping: Tipping::with_config(market, config) }
    }

    pub fn market(&self) -> &'m Market {
        self.tipping.market()
    }

    pub fn tipping(&self) -> &Tipping<'m> {
        &self.tipping
    }

    pub fn step(&self, a: usize, p: &PriceVector) -> Result<CoordinateStep> {
        self.market().check_prices(p)?;
        let base = p.without(a);
        let s = self.tipping.neutral_s(a, &base)?;
        let i = self.tipping.neutral_i(a, &base)?;
        let own = p.get(a);
        Ok(CoordinateStep {
            good: a,
            region: region_of(own, s, i),
            neutral_s: s,
            neutral_i: i,
            input: own,
            output: adjust(own, s, i),
        })
    }

    pub fn classify_region(&self, a: usize, p: &PriceVector) -> Result<Region> {
        Ok(self.step(a, p)?.region)
    }

    /// `fₐ(p)`.
    pub fn apply_coord(&self, a: usize, p: &PriceVector) -> Result<Ticks> {
        Ok(self.step(a, p)?.output)
    }

    /// `f(p)`.
    pub fn apply(&self, p: &PriceVector) -> Result<PriceVector> {
        Ok(PriceVector::new(self.explain(p)?.into_iter().map(|s| s.output).collect()))
    }

    pub fn explain(&self, p: &PriceVector) -> Result<Vec<CoordinateStep>> {
        (0..self.market().num_goods()).map(|a| self.step(a, p)).collect()
    }

    pub fn is_fixed(&self, p: &PriceVector) -> Result<bool> {
        Ok(&self.apply(p)? == p)
    }

    /// `{input, goods: [{good, region, S, I, output}], output}`.
    pub fn explain_json(&self, p: &PriceVector) -> Result<serde_json::Value> {
        let market = self.market();
        let steps = self.explain(p)?;
        let output: Vec<Ticks> = steps.iter().map(|s| s.output).collect();
        let goods: Vec<serde_json::Value> = steps
            .iter()
            .map(|s| {
                json!({
                    "good": market.goods()[s.good].to_string(),
                    "region": s.region,
                    "colour": s.region.colour(),
                    "S": market.price_json(s.neutral_s),
                    "I": market.price_json(s.neutral_i),
                    "input": market.price_json(s.input),
                    "output": market.price_json(s.output),
                })
            })
            .collect();
        Ok(json!({
            "input": market.prices_json(p.ticks()),
            "goods": goods,
            "output": market.prices_json(&output),
        }))
    }
}
