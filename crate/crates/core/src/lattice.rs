//! Tarski iteration of the price map, exhaustive grid enumeration and the
//! lattice checks on the resulting point sets.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::check_we;
use crate::error::{Error, Result};
use crate::market::{Market, PriceVector, Ticks};
use crate::price_map::{PriceMap, Region};

/// Largest grid that the enumerations will walk.
pub const ENUMERATION_BUDGET: u64 = 1_000_000;

pub type PointSet = BTreeSet<PriceVector>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ascending,
    Descending,
    /// No step was taken.
    None,
    /// Some step went up in one coordinate and down in another, or the
    /// steps disagreed with each other.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub start: PriceVector,
    /// `start, f(start), f(f(start)), ...`, ending at the fixed point when converged.
    pub iterates: Vec<PriceVector>,
    /// Region of every coordinate at every iterate, in step.
    pub regions: Vec<Vec<Region>>,
    pub steps: usize,
    pub direction: Direction,
    pub converged: bool,
}

impl IterationTrace {
    pub fn last(&self) -> &PriceVector {
        self.iterates.last().expect("trace holds at least the start")
    }

    /// The fixed point reached, or `NoConvergence`.
    pub fn fixed_point(&self, max_steps: usize) -> Result<&PriceVector> {
        if self.converged {
            Ok(self.last())
        } else {
            Err(Error::NoConvergence { max_steps })
        }
    }

    /// Every consecutive pair is ordered in the trace direction.
    pub fn is_monotone(&self) -> bool {
        self.direction != Direction::Mixed
    }

    pub fn summary(&self) -> String {
        if self.converged {
            format!("fixed point reached in {} steps", self.steps)
        } else {
            format!("no fixed point after {} steps", self.steps)
        }
    }

    pub fn to_json(&self, market: &Market) -> serde_json::Value {
        json!({
            "start": market.prices_json(self.start.ticks()),
            "iterates": self.iterates.iter().map(|p| market.prices_json(p.ticks())).collect::<Vec<_>>(),
            "steps": self.steps,
            "direction": self.direction,
            "converged": self.converged,
            "fixed_point": if self.converged { market.prices_json(self.last().ticks()) } else { serde_json::Value::Null },
            "summary": self.summary(),
        })
    }

    /// One row per iterate per good.
    pub fn table(&self, market: &Market) -> Vec<TraceRow> {
        let mut rows = Vec::new();
        for (step, (p, regions)) in self.iterates.iter().zip(&self.regions).enumerate() {
            for (good, &region) in regions.iter().enumerate() {
                rows.push(TraceRow {
                    step,
                    good: market.goods()[good].to_string(),
                    price: crate::market::format_rational(market.ticks_to_price(p.get(good))),
                    region,
                });
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub good: String,
    pub price: String,
    pub region: Region,
}

fn direction_of(iterates: &[PriceVector]) -> Direction {
    if iterates.len() < 2 {
        return Direction::None;
    }
    let pairs = || iterates.windows(2);
    if pairs().all(|w| w[0].is_below(&w[1])) {
        Direction::Ascending
    } else if pairs().all(|w| w[1].is_below(&w[0])) {
        Direction::Descending
    } else {
        Direction::Mixed
    }
}

/// Enough applications to climb every coordinate one tick at a time, plus
/// the one that confirms the fixed point.
pub fn default_max_steps(market: &Market) -> usize {
    market.num_goods() * market.cap_ticks() as usize + 1
}

/// The point reached by iterating from the bottom of the grid.
pub fn bottom(market: &Market) -> PriceVector {
    PriceVector::zeros(market.num_goods())
}

/// The point reached by iterating from the top of the grid.
pub fn top(market: &Market) -> PriceVector {
    PriceVector::uniform(market.num_goods(), market.cap_ticks())
}

/// Applies `f` until `p = f(p)` or `max_steps` applications have been made.
///
/// Exhaustion is not an error here; it shows up as `converged == false`.
pub fn iterate_from(map: &PriceMap<'_>, start: &PriceVector, max_steps: usize) -> Result<IterationTrace> {
    map.market().check_prices(start)?;
    let mut iterates = vec![start.clone()];
    let mut regions = Vec::new();
    let mut converged = false;
    for _ in 0..max_steps {
        let current = iterates.last().expect("non-empty");
        let explained = map.explain(current)?;
        regions.push(explained.iter().map(|s| s.region).collect());
        let next = PriceVector::new(explained.iter().map(|s| s.output).collect());
        if &next == current {
            converged = true;
            break;
        }
        iterates.push(next);
    }
    if !converged {
        // Keep one region row per iterate.
        let last = iterates.last().expect("non-empty");
        regions.push(map.explain(last)?.iter().map(|s| s.region).collect());
    }
    let steps = iterates.len() - 1;
    Ok(IterationTrace { start: start.clone(), direction: direction_of(&iterates), iterates, regions, steps, converged })
}

pub fn least_fixed_point(map: &PriceMap<'_>) -> Result<PriceVector> {
    let max_steps = default_max_steps(map.market());
    Ok(iterate_from(map, &bottom(map.market()), max_steps)?.fixed_point(max_steps)?.clone())
}

pub fn greatest_fixed_point(map: &PriceMap<'_>) -> Result<PriceVector> {
    let max_steps = default_max_steps(map.market());
    Ok(iterate_from(map, &top(map.market()), max_steps)?.fixed_point(max_steps)?.clone())
}

/// Decodes grid point `index` in mixed radix `side`, first good most significant.
pub(crate) fn grid_point(index: u64, m: usize, side: u64) -> PriceVector {
    let mut ticks = vec![0; m];
    let mut rest = index;
    for t in ticks.iter_mut().rev() {
        *t = (rest % side) as Ticks;
        rest /= side;
    }
    PriceVector::new(ticks)
}

fn enumerate<F>(market: &Market, budget: u64, keep: F) -> Result<PointSet>
where
    F: Fn(&PriceVector) -> Result<bool> + Sync,
{
    let size = market.grid_size();
    if size > budget {
        return Err(Error::BudgetExceeded { needed: size, budget });
    }
    let m = market.num_goods();
    let side = u64::from(market.cap_ticks()) + 1;
    let points: Vec<PriceVector> = (0..size)
        .into_par_iter()
        .map(|k| {
            let p = grid_point(k, m, side);
            Ok(if keep(&p)? { Some(p) } else { None })
        })
        .filter_map(|r: Result<Option<PriceVector>>| r.transpose())
        .collect::<Result<_>>()?;
    Ok(points.into_iter().collect())
}

/// Every grid point with `f(p) = p`.
pub fn enumerate_fixed_points(map: &PriceMap<'_>) -> Result<PointSet> {
    enumerate_fixed_points_within(map, ENUMERATION_BUDGET)
}

pub fn enumerate_fixed_points_within(map: &PriceMap<'_>, budget: u64) -> Result<PointSet> {
    enumerate(map.market(), budget, |p| map.is_fixed(p))
}

/// Every grid point that supports a Walrasian allocation. Never consults the price map.
pub fn enumerate_we(market: &Market) -> Result<PointSet> {
    enumerate_we_within(market, ENUMERATION_BUDGET)
}

pub fn enumerate_we_within(market: &Market, budget: u64) -> Result<PointSet> {
    enumerate(market, budget, |p| Ok(check_we(market, p)?.is_we))
}

fn is_integer_point(market: &Market, p: &PriceVector) -> bool {
    p.ticks().iter().all(|&t| market.ticks_to_price(t).is_integer())
}

/// Points of the fixed-point set and the equilibrium set that are in one but not the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub fixed_points: PointSet,
    pub we_points: PointSet,
    pub fixed_not_we: Vec<PriceVector>,
    pub we_not_fixed: Vec<PriceVector>,
    pub integer_discrepancies: usize,
    pub off_integer_discrepancies: usize,
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        self.fixed_not_we.is_empty() && self.we_not_fixed.is_empty()
    }

    pub fn to_json(&self, market: &Market) -> serde_json::Value {
        json!({
            "holds": self.holds(),
            "fixed_points": points_json(market, &self.fixed_points),
            "we_points": points_json(market, &self.we_points),
            "fixed_not_we": points_json(market, &self.fixed_not_we),
            "we_not_fixed": points_json(market, &self.we_not_fixed),
            "integer_discrepancies": self.integer_discrepancies,
            "off_integer_discrepancies": self.off_integer_discrepancies,
        })
    }
}

pub fn fixed_point_equivalence(map: &PriceMap<'_>) -> Result<Equivalence> {
    let market = map.market();
    let fixed_points = enumerate_fixed_points(map)?;
    let we_points = enumerate_we(market)?;
    Ok(compare(market, fixed_points, we_points))
}

pub fn compare(market: &Market, fixed_points: PointSet, we_points: PointSet) -> Equivalence {
    let fixed_not_we: Vec<_> = fixed_points.difference(&we_points).cloned().collect();
    let we_not_fixed: Vec<_> = we_points.difference(&fixed_points).cloned().collect();
    let integer_discrepancies =
        fixed_not_we.iter().chain(&we_not_fixed).filter(|p| is_integer_point(market, p)).count();
    let off_integer_discrepancies = fixed_not_we.len() + we_not_fixed.len() - integer_discrepancies;
    Equivalence {
        fixed_points,
        we_points,
        fixed_not_we,
        we_not_fixed,
        integer_discrepancies,
        off_integer_discrepancies,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureFailure {
    pub p: PriceVector,
    pub q: PriceVector,
    /// The meet or join that is not an equilibrium.
    pub point: PriceVector,
    pub join: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeCertificate {
    pub pairs_checked: usize,
    pub closure_failures: Vec<ClosureFailure>,
    /// Componentwise minimum and maximum of the sample.
    pub min: Option<PriceVector>,
    pub max: Option<PriceVector>,
    pub min_attained: bool,
    pub max_attained: bool,
    pub tarski_least: PriceVector,
    pub tarski_greatest: PriceVector,
}

impl LatticeCertificate {
    pub fn closed(&self) -> bool {
        self.closure_failures.is_empty()
    }

    pub fn extremes_match(&self) -> bool {
        self.min.as_ref() == Some(&self.tarski_least) && self.max.as_ref() == Some(&self.tarski_greatest)
    }

    pub fn certified(&self) -> bool {
        self.closed() && self.min_attained && self.max_attained && self.extremes_match()
    }

    pub fn to_json(&self, market: &Market) -> serde_json::Value {
        let opt = |p: &Option<PriceVector>| p.as_ref().map(|p| market.prices_json(p.ticks()));
        json!({
            "certified": self.certified(),
            "pairs_checked": self.pairs_checked,
            "closure_failures": self.closure_failures.iter().map(|f| json!({
                "p": market.prices_json(f.p.ticks()),
                "q": market.prices_json(f.q.ticks()),
                "operation": if f.join { "join" } else { "meet" },
                "point": market.prices_json(f.point.ticks()),
            })).collect::<Vec<_>>(),
            "min": opt(&self.min),
            "max": opt(&self.max),
            "min_attained": self.min_attained,
            "max_attained": self.max_attained,
            "tarski_least": market.prices_json(self.tarski_least.ticks()),
            "tarski_greatest": market.prices_json(self.tarski_greatest.ticks()),
            "extremes_match": self.extremes_match(),
        })
    }
}

fn componentwise<F: Fn(&PriceVector, &PriceVector) -> Result<PriceVector>>(
    points: &PointSet,
    op: F,
) -> Result<Option<PriceVector>> {
    let mut it = points.iter();
    let Some(first) = it.next() else { return Ok(None) };
    it.try_fold(first.clone(), |acc, p| op(&acc, p)).map(Some)
}

/// Meet/join closure of `sample` under the equilibrium oracle, plus the
/// comparison of its extremes with the Tarski extremes of the price map.
pub fn lattice_check(map: &PriceMap<'_>, sample: &PointSet) -> Result<LatticeCertificate> {
    let market = map.market();
    let points: Vec<&PriceVector> = sample.iter().collect();
    let pairs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (i..points.len()).map(move |j| (i, j))).collect();
    let failures: Vec<Vec<ClosureFailure>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (p, q) = (points[i], points[j]);
            let mut out = Vec::new();
            for (join, point) in [(false, p.meet(q)?), (true, p.join(q)?)] {
                if !check_we(market, &point)?.is_we {
                    out.push(ClosureFailure { p: p.clone(), q: q.clone(), point, join });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let min = componentwise(sample, PriceVector::meet)?;
    let max = componentwise(sample, PriceVector::join)?;
    Ok(LatticeCertificate {
        pairs_checked: pairs.len(),
        closure_failures: failures.into_iter().flatten().collect(),
        min_attained: min.as_ref().is_some_and(|p| sample.contains(p)),
        max_attained: max.as_ref().is_some_and(|p| sample.contains(p)),
        min,
        max,
        tarski_least: least_fixed_point(map)?,
        tarski_greatest: greatest_fixed_point(map)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub equivalence: Equivalence,
    pub lattice: LatticeCertificate,
    /// Fixed points outside `[least, greatest]` of the Tarski iteration.
    pub unbracketed: Vec<PriceVector>,
}

impl EquilibriumReport {
    pub fn lattice_certified(&self) -> bool {
        self.lattice.certified()
    }

    /// Symmetric difference, closure failures and unbracketed fixed points.
    pub fn counterexamples(&self) -> Vec<PriceVector> {
        let mut out: PointSet = self.equivalence.fixed_not_we.iter().cloned().collect();
        out.extend(self.equivalence.we_not_fixed.iter().cloned());
        out.extend(self.lattice.closure_failures.iter().map(|f| f.point.clone()));
        out.extend(self.unbracketed.iter().cloned());
        out.into_iter().collect()
    }

    pub fn to_json(&self, market: &Market) -> serde_json::Value {
        let opt = |p: &Option<PriceVector>| p.as_ref().map(|p| market.prices_json(p.ticks()));
        json!({
            "tick": crate::market::rational_json(market.tick()),
            "cap": crate::market::rational_json(market.cap()),
            "fixed_points": points_json(market, &self.equivalence.fixed_points),
            "we_points": points_json(market, &self.equivalence.we_points),
            "min_we": opt(&self.lattice.min),
            "max_we": opt(&self.lattice.max),
            "least_fixed_point": market.prices_json(self.lattice.tarski_least.ticks()),
            "greatest_fixed_point": market.prices_json(self.lattice.tarski_greatest.ticks()),
            "equivalence_holds": self.equivalence.holds(),
            "lattice_certified": self.lattice_certified(),
            "counterexamples": points_json(market, &self.counterexamples()),
            "lattice": self.lattice.to_json(market),
        })
    }
}

pub fn equilibrium_report(map: &PriceMap<'_>) -> Result<EquilibriumReport> {
    let equivalence = fixed_point_equivalence(map)?;
    let lattice = lattice_check(map, &equivalence.we_points)?;
    let unbracketed = equivalence
        .fixed_points
        .iter()
        .filter(|p| !(lattice.tarski_least.is_below(p) && p.is_below(&lattice.tarski_greatest)))
        .cloned()
        .collect();
    Ok(EquilibriumReport { equivalence, lattice, unbracketed })
}

pub fn points_json<'a, I>(market: &Market, points: I) -> serde_json::Value
where
    I: IntoIterator<Item = &'a PriceVector>,
{
    serde_json::Value::Array(points.into_iter().map(|p| market.prices_json(p.ticks())).collect())
}
