//! Property suites over seeded random markets.
//!
//! Every check is a function of `(market, prices, good)`; a failing check is
//! reported with the serialized market and the price vectors involved, and
//! [`Counterexample::replay`] runs the same check again from that record.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{check_we, check_we_by_characterization};
use crate::error::Result;
use crate::lattice::{
    bottom, default_max_steps, enumerate_we, equilibrium_report, grid_point, iterate_from, top, Direction,
};
use crate::market::{Market, MarketDocument, PriceVector, Ticks};
use crate::price_map::{PriceMap, Region};
use crate::random::{random_ordered_pair, random_point, rng_for, suite, SuiteSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// `sup 𝒪ₐ(p₋ₐ) ≤ inf 𝒰ₐ(p₋ₐ)`.
    TippingOrder,
    /// `sup 𝒪ₐ` is non-decreasing in the other prices.
    SupOMonotone,
    /// `𝒮ₐ` and `ℐₐ` are non-decreasing in the other prices.
    NeutralMonotone,
    /// `fₐ` is non-decreasing in the own price.
    OwnPriceMonotone,
    /// `p ≤ q ⇒ f(p) ≤ f(q)`.
    MapMonotone,
    /// Along the own price, regions run BelowS, Neutral, AboveI, or are all Inverted.
    RegionOrder,
    /// Fixed points of `f` and equilibrium prices coincide on the grid.
    FixedPointsAreEquilibria,
    /// Equilibrium prices are closed under meet and join, with the Tarski extremes as bounds.
    EquilibriumLattice,
    /// The allocation oracle and the no-over/no-underdemand test agree.
    Characterization,
    /// Iteration from the grid corners is monotone and within `m·H/δ` steps.
    IterationBound,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::TippingOrder,
        Property::SupOMonotone,
        Property::NeutralMonotone,
        Property::OwnPriceMonotone,
        Property::MapMonotone,
        Property::RegionOrder,
        Property::FixedPointsAreEquilibria,
        Property::EquilibriumLattice,
        Property::Characterization,
        Property::IterationBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::TippingOrder => "tipping_order",
            Property::SupOMonotone => "sup_o_monotone",
            Property::NeutralMonotone => "neutral_monotone",
            Property::OwnPriceMonotone => "own_price_monotone",
            Property::MapMonotone => "map_monotone",
            Property::RegionOrder => "region_order",
            Property::FixedPointsAreEquilibria => "fixed_points_are_equilibria",
            Property::EquilibriumLattice => "equilibrium_lattice",
            Property::Characterization => "characterization",
            Property::IterationBound => "iteration_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub property: Property,
    pub market: MarketDocument,
    /// Price vector (or the lower of a pair) as comma-separated decimals.
    pub prices: Option<String>,
    /// Upper vector of a pair.
    pub upper: Option<String>,
    pub good: Option<String>,
    pub detail: String,
}

impl Counterexample {
    fn new(property: Property, market: &Market, detail: String) -> Self {
        Counterexample { property, market: market.to_document(), prices: None, upper: None, good: None, detail }
    }

    fn at(mut self, market: &Market, p: &PriceVector) -> Self {
        self.prices = Some(market.format_prices(p.ticks()));
        self
    }

    fn upper(mut self, market: &Market, q: &PriceVector) -> Self {
        self.upper = Some(market.format_prices(q.ticks()));
        self
    }

    fn good(mut self, market: &Market, a: usize) -> Self {
        self.good = Some(market.goods()[a].to_string());
        self
    }

    /// Runs the failing check again; `Some` when it still fails.
    pub fn replay(&self) -> Result<Option<Counterexample>> {
        let market = Market::from_document(&self.market)?;
        let map = PriceMap::new(&market);
        let price =
            |s: &Option<String>| -> Result<PriceVector> { market.parse_price_vector(s.as_deref().unwrap_or_default()) };
        let good = || -> Result<usize> { market.good_index(self.good.as_deref().unwrap_or_default()) };
        match self.property {
            Property::TippingOrder => check_tipping_order(&map, &price(&self.prices)?, good()?),
            Property::SupOMonotone => check_sup_o_monotone(&map, &price(&self.prices)?, &price(&self.upper)?, good()?),
            Property::NeutralMonotone => {
                check_neutral_monotone(&map, &price(&self.prices)?, &price(&self.upper)?, good()?)
            }
            Property::OwnPriceMonotone => check_own_price_monotone(&map, &price(&self.prices)?, good()?),
            Property::MapMonotone => check_map_monotone(&map, &price(&self.prices)?, &price(&self.upper)?),
            Property::RegionOrder => check_region_order(&map, &price(&self.prices)?, good()?),
            Property::FixedPointsAreEquilibria => check_fixed_point_equivalence(&map, &price(&self.prices)?),
            Property::EquilibriumLattice => check_lattice(&map),
            Property::Characterization => check_characterization(&market, &price(&self.prices)?),
            Property::IterationBound => check_iteration(&map),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("counterexample serializes")
    }
}

type Check = Result<Option<Counterexample>>;

pub fn check_tipping_order(map: &PriceMap<'_>, p: &PriceVector, a: usize) -> Check {
    let market = map.market();
    let base = p.without(a);
    let t = map.tipping();
    let sup_o = t.sup_o(a, &base)?;
    let inf_u = t.inf_u(a, &base)?;
    Ok(match inf_u {
        Some(inf_u) if inf_u < sup_o => Some(
            Counterexample::new(
                Property::TippingOrder,
                market,
                format!(
                    "sup_O = {} exceeds inf_U = {}",
                    market.format_prices(&[sup_o]),
                    market.format_prices(&[inf_u])
                ),
            )
            .at(market, p)
            .good(market, a),
        ),
        _ => None,
    })
}

pub fn check_sup_o_monotone(map: &PriceMap<'_>, p: &PriceVector, q: &PriceVector, a: usize) -> Check {
    let market = map.market();
    let t = map.tipping();
    let low = t.sup_o(a, &p.without(a))?;
    let high = t.sup_o(a, &q.without(a))?;
    Ok((low > high).then(|| {
        Counterexample::new(
            Property::SupOMonotone,
            market,
            format!("sup_O drops from {} to {}", market.format_prices(&[low]), market.format_prices(&[high])),
        )
        .at(market, p)
        .upper(market, q)
        .good(market, a)
    }))
}

pub fn check_neutral_monotone(map: &PriceMap<'_>, p: &PriceVector, q: &PriceVector, a: usize) -> Check {
    let market = map.market();
    let t = map.tipping();
    let (bp, bq) = (p.without(a), q.without(a));
    let pairs = [("S", t.neutral_s(a, &bp)?, t.neutral_s(a, &bq)?), ("I", t.neutral_i(a, &bp)?, t.neutral_i(a, &bq)?)];
    Ok(pairs.iter().find(|(_, low, high)| low > high).map(|(which, low, high)| {
        Counterexample::new(
            Property::NeutralMonotone,
            market,
            format!("{which} drops from {} to {}", market.format_prices(&[*low]), market.format_prices(&[*high])),
        )
        .at(market, p)
        .upper(market, q)
        .good(market, a)
    }))
}

/// Scans every own price of `a` with the other prices of `p` held fixed.
pub fn check_own_price_monotone(map: &PriceMap<'_>, p: &PriceVector, a: usize) -> Check {
    let market = map.market();
    let mut previous: Option<(Ticks, Ticks)> = None;
    for own in 0..=market.cap_ticks() {
        let out = map.apply_coord(a, &p.with(a, own))?;
        if let Some((lo, lo_out)) = previous {
            if lo_out > out {
                return Ok(Some(
                    Counterexample::new(
                        Property::OwnPriceMonotone,
                        market,
                        format!(
                            "f_a({}) = {} but f_a({}) = {}",
                            market.format_prices(&[lo]),
                            market.format_prices(&[lo_out]),
                            market.format_prices(&[own]),
                            market.format_prices(&[out])
                        ),
                    )
                    .at(market, p)
                    .good(market, a),
                ));
            }
        }
        previous = Some((own, out));
    }
    Ok(None)
}

pub fn check_map_monotone(map: &PriceMap<'_>, p: &PriceVector, q: &PriceVector) -> Check {
    let market = map.market();
    let (fp, fq) = (map.apply(p)?, map.apply(q)?);
    Ok((!fp.is_below(&fq)).then(|| {
        Counterexample::new(
            Property::MapMonotone,
            market,
            format!(
                "f(p) = ({}) is not below f(q) = ({})",
                market.format_prices(fp.ticks()),
                market.format_prices(fq.ticks())
            ),
        )
        .at(market, p)
        .upper(market, q)
    }))
}

pub fn check_region_order(map: &PriceMap<'_>, p: &PriceVector, a: usize) -> Check {
    let market = map.market();
    let regions: Vec<Region> =
        (0..=market.cap_ticks()).map(|own| map.classify_region(a, &p.with(a, own))).collect::<Result<_>>()?;
    let all_inverted = regions.iter().all(|&r| r == Region::Inverted);
    let ranks: Option<Vec<u8>> = regions.iter().map(|r| r.rank()).collect();
    let ordered = ranks.is_some_and(|r| r.windows(2).all(|w| w[0] <= w[1]));
    Ok((!all_inverted && !ordered).then(|| {
        let sequence: Vec<&str> = regions.iter().map(|r| r.label()).collect();
        Counterexample::new(Property::RegionOrder, market, format!("regions along own price: {}", sequence.join(" ")))
            .at(market, p)
            .good(market, a)
    }))
}

pub fn check_fixed_point_equivalence(map: &PriceMap<'_>, p: &PriceVector) -> Check {
    let market = map.market();
    let fixed = map.is_fixed(p)?;
    let we = check_we(market, p)?.is_we;
    Ok((fixed != we).then(|| {
        let detail = if fixed { "fixed point of f that is not an equilibrium" } else { "equilibrium that f moves" };
        Counterexample::new(Property::FixedPointsAreEquilibria, market, detail.to_string()).at(market, p)
    }))
}

pub fn check_characterization(market: &Market, p: &PriceVector) -> Check {
    let oracle = check_we(market, p)?.is_we;
    let hall = check_we_by_characterization(market, p)?;
    Ok((oracle != hall).then(|| {
        Counterexample::new(Property::Characterization, market, format!("allocation oracle {oracle}, Hall test {hall}"))
            .at(market, p)
    }))
}

pub fn check_lattice(map: &PriceMap<'_>) -> Check {
    let market = map.market();
    let report = equilibrium_report(map)?;
    let lattice = &report.lattice;
    if let Some(f) = lattice.closure_failures.first() {
        let op = if f.join { "join" } else { "meet" };
        return Ok(Some(
            Counterexample::new(
                Property::EquilibriumLattice,
                market,
                format!("{op} ({}) is not an equilibrium", market.format_prices(f.point.ticks())),
            )
            .at(market, &f.p)
            .upper(market, &f.q),
        ));
    }
    if !(lattice.min_attained && lattice.max_attained && lattice.extremes_match()) {
        let show = |p: &Option<PriceVector>| p.as_ref().map_or("none".to_string(), |p| market.format_prices(p.ticks()));
        return Ok(Some(Counterexample::new(
            Property::EquilibriumLattice,
            market,
            format!(
                "equilibrium extremes ({}) and ({}) but iteration reaches ({}) and ({})",
                show(&lattice.min),
                show(&lattice.max),
                market.format_prices(lattice.tarski_least.ticks()),
                market.format_prices(lattice.tarski_greatest.ticks())
            ),
        )));
    }
    Ok(None)
}

pub fn check_iteration(map: &PriceMap<'_>) -> Check {
    let market = map.market();
    let bound = market.num_goods() * market.cap_ticks() as usize;
    for (start, expected) in [(bottom(market), Direction::Ascending), (top(market), Direction::Descending)] {
        let trace = iterate_from(map, &start, default_max_steps(market))?;
        let monotone = trace.direction == expected || trace.direction == Direction::None;
        if !trace.converged || trace.steps > bound || !monotone {
            return Ok(Some(
                Counterexample::new(
                    Property::IterationBound,
                    market,
                    format!(
                        "{} steps ({:?}, converged {}) against a bound of {bound}",
                        trace.steps, trace.direction, trace.converged
                    ),
                )
                .at(market, &start),
            ));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SelfcheckConfig {
    pub suite: SuiteSpec,
    /// Random grid points per market for the pointwise checks.
    pub points_per_market: usize,
    /// Ordered pairs spread over the whole suite.
    pub pairs: usize,
    /// Markets (from the front of the suite) that get the lattice check.
    pub lattice_markets: usize,
}

impl Default for SelfcheckConfig {
    fn default() -> Self {
        SelfcheckConfig { suite: SuiteSpec::default(), points_per_market: 50, pairs: 2000, lattice_markets: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub property: Property,
    pub checks: u64,
    pub failures: u64,
    pub first_counterexample: Option<Counterexample>,
}

impl PropertyOutcome {
    fn empty(property: Property) -> Self {
        PropertyOutcome { property, checks: 0, failures: 0, first_counterexample: None }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, result: Option<Counterexample>) {
        self.checks += 1;
        if let Some(c) = result {
            self.failures += 1;
            self.first_counterexample.get_or_insert(c);
        }
    }

    fn absorb(&mut self, other: PropertyOutcome) {
        self.checks += other.checks;
        self.failures += other.failures;
        if self.first_counterexample.is_none() {
            self.first_counterexample = other.first_counterexample;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfcheckReport {
    pub config: SelfcheckConfig,
    pub markets: usize,
    pub outcomes: Vec<PropertyOutcome>,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(PropertyOutcome::passed)
    }

    pub fn outcome(&self, property: Property) -> &PropertyOutcome {
        self.outcomes.iter().find(|o| o.property == property).expect("every property is reported")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "passed": self.passed(),
            "markets": self.markets,
            "config": self.config,
            "properties": self.outcomes.iter().map(|o| json!({
                "property": o.property.name(),
                "checks": o.checks,
                "failures": o.failures,
                "passed": o.passed(),
                "first_counterexample": o.first_counterexample.as_ref().map(Counterexample::to_json),
            })).collect::<Vec<_>>(),
        })
    }
}

fn outcomes() -> Vec<PropertyOutcome> {
    Property::ALL.iter().map(|&p| PropertyOutcome::empty(p)).collect()
}

fn slot(out: &mut [PropertyOutcome], property: Property) -> &mut PropertyOutcome {
    out.iter_mut().find(|o| o.property == property).expect("slot exists")
}

/// Runs every property on market `k` of the suite.
pub fn check_market(config: &SelfcheckConfig, k: usize, market: &Market) -> Result<Vec<PropertyOutcome>> {
    let map = PriceMap::new(market);
    let m = market.num_goods();
    let mut out = outcomes();
    let mut rng = rng_for(config.suite.seed ^ 0x5eed, k as u64);

    for _ in 0..config.points_per_market {
        let p = random_point(&mut rng, market);
        let a = rng.gen_range(0..m);
        slot(&mut out, Property::TippingOrder).record(check_tipping_order(&map, &p, a)?);
        slot(&mut out, Property::OwnPriceMonotone).record(check_own_price_monotone(&map, &p, a)?);
        slot(&mut out, Property::RegionOrder).record(check_region_order(&map, &p, a)?);
    }

    let trials = config.suite.trials.max(1);
    let pairs_here = config.pairs / trials + usize::from(k < config.pairs % trials);
    for _ in 0..pairs_here {
        let (p, q) = random_ordered_pair(&mut rng, market);
        let a = rng.gen_range(0..m);
        slot(&mut out, Property::SupOMonotone).record(check_sup_o_monotone(&map, &p, &q, a)?);
        slot(&mut out, Property::NeutralMonotone).record(check_neutral_monotone(&map, &p, &q, a)?);
        slot(&mut out, Property::MapMonotone).record(check_map_monotone(&map, &p, &q)?);
    }

    let grid_ok = market.grid_size() <= crate::lattice::ENUMERATION_BUDGET;
    if grid_ok {
        let we = enumerate_we(market)?;
        let side = u64::from(market.cap_ticks()) + 1;
        for index in 0..market.grid_size() {
            let p = grid_point(index, m, side);
            let fixed = map.is_fixed(&p)?;
            let result = (fixed != we.contains(&p)).then(|| {
                let detail =
                    if fixed { "fixed point of f that is not an equilibrium" } else { "equilibrium that f moves" };
                Counterexample::new(Property::FixedPointsAreEquilibria, market, detail.to_string()).at(market, &p)
            });
            slot(&mut out, Property::FixedPointsAreEquilibria).record(result);
            slot(&mut out, Property::Characterization).record(check_characterization(market, &p)?);
        }
        if k < config.lattice_markets {
            slot(&mut out, Property::EquilibriumLattice).record(check_lattice(&map)?);
        }
    }
    slot(&mut out, Property::IterationBound).record(check_iteration(&map)?);
    Ok(out)
}

/// Runs all property suites; markets are checked in parallel and merged in
/// suite order, so the report does not depend on the worker count.
pub fn run(config: &SelfcheckConfig) -> Result<SelfcheckReport> {
    let markets = suite(&config.suite)?;
    let per_market: Vec<Vec<PropertyOutcome>> =
        markets.par_iter().enumerate().map(|(k, market)| check_market(config, k, market)).collect::<Result<_>>()?;
    let mut total = outcomes();
    for results in per_market {
        for (acc, r) in total.iter_mut().zip(results) {
            acc.absorb(r);
        }
    }
    Ok(SelfcheckReport { config: *config, markets: markets.len(), outcomes: total })
}
