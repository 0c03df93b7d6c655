//! Acceptance suite. Each test prints one line:
//!
//! ```text
//! criterion N [PASS|FAIL] name: detail (seconds)
//! ```
//!
//! Run with `cargo test --release --test acceptance -- --nocapture --test-threads=1`.
//! All tolerances are exact: zero violations, exact set equality on the grid.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use walras::analysis::{check_we, check_we_by_characterization, exists_overdemanded, exists_underdemanded, Verdict};
use walras::lattice::{bottom, default_max_steps, enumerate_fixed_points, iterate_from, top, Direction};
use walras::random::random_ordered_pair;
use walras::{Market, PriceMap, PriceVector};

use common::{e1, e2, pv, random_suite, rng, unit_tick};

fn report(n: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} [{verdict}] {name}: {detail} ({:.2}s)", elapsed.as_secs_f64());
}

fn show(market: &Market, p: &PriceVector) -> String {
    format!("({})", market.format_prices(p.ticks()))
}

fn describe(market: &Market) -> String {
    format!("v={:?}", market.valuations())
}

/// Suite markets plus the two worked examples.
fn all_markets() -> Vec<Market> {
    let mut markets = vec![e1(), e2()];
    markets.extend(random_suite());
    markets
}

#[test]
fn criterion_1_tipping_order() {
    let start = Instant::now();
    let suite = random_suite();
    let results: Vec<(u64, u64, Option<String>)> = suite
        .par_iter()
        .enumerate()
        .map(|(k, market)| {
            let f = PriceMap::new(market);
            let mut rng = rng(k as u64);
            let (mut checks, mut violations, mut first) = (0, 0, None);
            for _ in 0..50 {
                let p = common::random_grid_point(&mut rng, market);
                for a in 0..market.num_goods() {
                    let base = p.without(a);
                    let sup_o = f.tipping().sup_o(a, &base).unwrap();
                    let inf_u = f.tipping().inf_u(a, &base).unwrap();
                    checks += 1;
                    if inf_u.is_some_and(|i| i < sup_o) {
                        violations += 1;
                        first.get_or_insert_with(|| {
                            format!(
                                "{} p={} good {}: sup_O {} > inf_U {}",
                                describe(market),
                                show(market, &p),
                                market.goods()[a],
                                market.format_prices(&[sup_o]),
                                market.format_prices(&[inf_u.unwrap()])
                            )
                        });
                    }
                }
            }
            (checks, violations, first)
        })
        .collect();
    let checks: u64 = results.iter().map(|r| r.0).sum();
    let violations: u64 = results.iter().map(|r| r.1).sum();
    let first = results.iter().find_map(|r| r.2.clone());
    let elapsed = start.elapsed();
    let pass = violations == 0 && elapsed < Duration::from_secs(120);
    let mut detail = format!("{violations} violations in {checks} (market, point, good) checks, target < 120s");
    if let Some(c) = first {
        detail.push_str(&format!("; first: {c}"));
    }
    report(1, "sup_O <= inf_U on 200 markets x 50 points", pass, &detail, elapsed);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_2_neutral_prices_monotone() {
    let start = Instant::now();
    let suite = random_suite();
    let results: Vec<(u64, u64, Option<String>)> = suite
        .par_iter()
        .enumerate()
        .map(|(k, market)| {
            let f = PriceMap::new(market);
            let mut rng = rng(1000 + k as u64);
            let (mut pairs, mut violations, mut first) = (0, 0, None);
            for _ in 0..10 {
                let (p, q) = random_ordered_pair(&mut rng, market);
                pairs += 1;
                for a in 0..market.num_goods() {
                    let t = f.tipping();
                    let (bp, bq) = (p.without(a), q.without(a));
                    let s = (t.neutral_s(a, &bp).unwrap(), t.neutral_s(a, &bq).unwrap());
                    let i = (t.neutral_i(a, &bp).unwrap(), t.neutral_i(a, &bq).unwrap());
                    if s.0 > s.1 || i.0 > i.1 {
                        violations += 1;
                        first.get_or_insert_with(|| {
                            format!("{} p={} q={} good {}", describe(market), show(market, &p), show(market, &q), a)
                        });
                    }
                }
            }
            (pairs, violations, first)
        })
        .collect();
    let pairs: u64 = results.iter().map(|r| r.0).sum();
    let violations: u64 = results.iter().map(|r| r.1).sum();
    let mut detail = format!("{violations} violations over {pairs} ordered pairs p <= q (S and I, every good)");
    if let Some(c) = results.iter().find_map(|r| r.2.clone()) {
        detail.push_str(&format!("; first: {c}"));
    }
    let pass = violations == 0 && pairs == 2000;
    report(2, "S and I monotone in the other prices", pass, &detail, start.elapsed());
    assert!(pass, "{detail}");
}

fn map_violations(f: &PriceMap<'_>, pairs: impl Iterator<Item = (PriceVector, PriceVector)>) -> (u64, Vec<String>) {
    let market = f.market();
    let mut checked = 0;
    let mut bad = Vec::new();
    for (p, q) in pairs {
        checked += 1;
        let (fp, fq) = (f.apply(&p).unwrap(), f.apply(&q).unwrap());
        if !fp.is_below(&fq) {
            bad.push(format!("{} p={} q={}", describe(market), show(market, &p), show(market, &q)));
        }
    }
    (checked, bad)
}

#[test]
fn criterion_3_price_map_monotone() {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut failures = Vec::new();
    for (name, market, points) in [("E1", e1(), 11), ("E2", e2(), 81)] {
        let f = PriceMap::new(&market);
        let grid = common::grid(&market);
        assert_eq!(grid.len(), points);
        let pairs: Vec<_> = grid
            .iter()
            .flat_map(|p| grid.iter().map(move |q| (p.clone(), q.clone())))
            .filter(|(p, q)| p.is_below(q))
            .collect();
        let unordered = points * (points + 1) / 2;
        let (checked, bad) = map_violations(&f, pairs.into_iter());
        detail.push(format!("{name}: {checked} comparable pairs of {unordered} unordered, {} violations", bad.len()));
        failures.extend(bad);
    }
    let suite = random_suite();
    let mut random_checked = 0;
    for (k, market) in suite.iter().enumerate() {
        let f = PriceMap::new(market);
        let mut rng = rng(2000 + k as u64);
        let (checked, bad) = map_violations(&f, (0..10).map(|_| random_ordered_pair(&mut rng, market)));
        random_checked += checked;
        failures.extend(bad);
    }
    detail.push(format!("random: {random_checked} pairs"));
    let pass = failures.is_empty() && random_checked == 2000;
    let mut detail = detail.join("; ");
    if let Some(c) = failures.first() {
        detail.push_str(&format!("; first: {c}"));
    }
    report(3, "p <= q implies f(p) <= f(q)", pass, &detail, start.elapsed());
    assert!(pass, "{detail}");
}

#[test]
fn criterion_4_region_order() {
    let start = Instant::now();
    let markets = all_markets();
    let results: Vec<(u64, Option<String>)> = markets
        .par_iter()
        .enumerate()
        .map(|(k, market)| {
            let f = PriceMap::new(market);
            let mut rng = rng(3000 + k as u64);
            let mut sweeps = 0;
            for _ in 0..10 {
                let p = common::random_grid_point(&mut rng, market);
                for a in 0..market.num_goods() {
                    sweeps += 1;
                    let regions: Vec<_> =
                        (0..=market.cap_ticks()).map(|own| f.classify_region(a, &p.with(a, own)).unwrap()).collect();
                    let ranks: Option<Vec<u8>> = regions.iter().map(|r| r.rank()).collect();
                    let ok = match ranks {
                        Some(r) => r.windows(2).all(|w| w[0] <= w[1]),
                        None => regions.iter().all(|r| r.rank().is_none()),
                    };
                    if !ok {
                        let seq: Vec<_> = regions.iter().map(|r| r.label()).collect();
                        return (
                            sweeps,
                            Some(format!("{} p={} good {a}: {}", describe(market), show(market, &p), seq.join(" "))),
                        );
                    }
                }
            }
            (sweeps, None)
        })
        .collect();
    let sweeps: u64 = results.iter().map(|r| r.0).sum();
    let first = results.iter().find_map(|r| r.1.clone());
    let pass = first.is_none();
    let mut detail = format!("{sweeps} own-price sweeps over {} markets", markets.len());
    if let Some(c) = first {
        detail.push_str(&format!("; forbidden transition: {c}"));
    }
    report(4, "regions ordered BelowS, Neutral, AboveI or all Inverted", pass, &detail, start.elapsed());
    assert!(pass, "{detail}");
}

fn point_set(points: impl IntoIterator<Item = PriceVector>) -> BTreeSet<PriceVector> {
    points.into_iter().collect()
}

#[test]
fn criterion_5_fixed_points_equal_equilibria() {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;

    let m1 = e1();
    let expected1 = point_set((6..=10).map(|t| pv(&[t])));
    let fixed1 = enumerate_fixed_points(&PriceMap::new(&m1)).unwrap();
    let we1 = point_set(common::we_set(&m1));
    let ok1 = fixed1 == expected1 && we1 == expected1;
    pass &= ok1;
    detail.push(format!("E1: {} fixed, {} equilibria, equal to {{3,...,5}}: {ok1}", fixed1.len(), we1.len()));

    let m2 = unit_tick(&e2());
    let expected2 = point_set(common::grid(&m2).into_iter().filter(|p| {
        let (a, b) = (p.get(0) as i64, p.get(1) as i64);
        (1..=3).contains(&(a - b)) && b <= 2 && a <= 4
    }));
    let fixed2 = enumerate_fixed_points(&PriceMap::new(&m2)).unwrap();
    let we2 = point_set(common::we_set(&m2));
    let ok2 = fixed2 == expected2 && we2 == expected2;
    pass &= ok2;
    detail.push(format!(
        "E2 at tick 1: {} fixed, {} equilibria, equal to {{1 <= pa-pb <= 3, pb <= 2, pa <= 4}} ({} points): {ok2}",
        fixed2.len(),
        we2.len(),
        expected2.len()
    ));

    let suite = random_suite();
    let diffs: Vec<(usize, usize, usize, Option<String>)> = suite
        .par_iter()
        .map(|market| {
            let fixed = enumerate_fixed_points(&PriceMap::new(market)).unwrap();
            let we = point_set(common::we_set(market));
            let diff: Vec<&PriceVector> = fixed.symmetric_difference(&we).collect();
            let integer =
                diff.iter().filter(|p| p.ticks().iter().all(|&t| market.ticks_to_price(t).is_integer())).count();
            let first = diff.first().map(|p| {
                let kind = if fixed.contains(*p) { "fixed, not equilibrium" } else { "equilibrium, not fixed" };
                format!("{} p={} {kind}", describe(market), show(market, p))
            });
            (diff.len(), integer, usize::from(!diff.is_empty()), first)
        })
        .collect();
    let total: usize = diffs.iter().map(|d| d.0).sum();
    let integer: usize = diffs.iter().map(|d| d.1).sum();
    let markets: usize = diffs.iter().map(|d| d.2).sum();
    pass &= total == 0;
    detail.push(format!(
        "random: {markets}/200 markets differ, {total} points ({integer} integer, {} off-integer)",
        total - integer
    ));
    if let Some(c) = diffs.iter().find_map(|d| d.3.clone()) {
        detail.push(format!("first: {c}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(600);
    let detail = detail.join("; ");
    report(5, "fixed points of f = equilibrium prices", pass, &detail, elapsed);
    assert!(pass, "{detail}");
}

/// Closure failures and the extremes check for one market.
fn lattice_outcome(market: &Market) -> (usize, Vec<String>) {
    let f = PriceMap::new(market);
    let we: Vec<PriceVector> = common::we_set(market);
    let mut failures = Vec::new();
    let mut pairs = 0;
    for (i, p) in we.iter().enumerate() {
        for q in &we[i..] {
            pairs += 1;
            for (op, r) in [("meet", p.meet(q).unwrap()), ("join", p.join(q).unwrap())] {
                if !common::is_we(market, &r) {
                    failures.push(format!(
                        "{} {op} of {} and {} is {}",
                        describe(market),
                        show(market, p),
                        show(market, q),
                        show(market, &r)
                    ));
                }
            }
        }
    }
    let min = we.iter().skip(1).fold(we.first().cloned(), |acc, p| acc.map(|a| a.meet(p).unwrap()));
    let max = we.iter().skip(1).fold(we.first().cloned(), |acc, p| acc.map(|a| a.join(p).unwrap()));
    let steps = default_max_steps(market);
    let least = iterate_from(&f, &bottom(market), steps).unwrap();
    let greatest = iterate_from(&f, &top(market), steps).unwrap();
    let (least, greatest) = (least.last().clone(), greatest.last().clone());
    if min.as_ref() != Some(&least) || max.as_ref() != Some(&greatest) {
        let opt = |p: &Option<PriceVector>| p.as_ref().map_or("none".into(), |p| show(market, p));
        failures.push(format!(
            "{} equilibria span {}..{} but iteration gives {}..{}",
            describe(market),
            opt(&min),
            opt(&max),
            show(market, &least),
            show(market, &greatest)
        ));
    }
    (pairs, failures)
}

#[test]
fn criterion_6_equilibrium_lattice() {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut failures = Vec::new();

    for (name, market, lo, hi) in [("E1", e1(), pv(&[6]), pv(&[10])), ("E2", e2(), pv(&[2, 0]), pv(&[8, 4]))] {
        let (pairs, bad) = lattice_outcome(&market);
        let f = PriceMap::new(&market);
        let steps = default_max_steps(&market);
        let least = iterate_from(&f, &bottom(&market), steps).unwrap().last().clone();
        let greatest = iterate_from(&f, &top(&market), steps).unwrap().last().clone();
        let extremes = least == lo && greatest == hi;
        detail.push(format!(
            "{name}: {pairs} pairs, {} failures, extremes {} and {} as expected: {extremes}",
            bad.len(),
            show(&market, &least),
            show(&market, &greatest)
        ));
        if !extremes {
            failures.push(format!("{name} extremes {} {}", show(&market, &least), show(&market, &greatest)));
        }
        failures.extend(bad);
    }

    let suite: Vec<Market> = random_suite().into_iter().take(50).collect();
    let outcomes: Vec<(usize, Vec<String>)> = suite.par_iter().map(lattice_outcome).collect();
    let pairs: usize = outcomes.iter().map(|o| o.0).sum();
    let closure: usize = outcomes.iter().flat_map(|o| &o.1).filter(|s| s.contains(" of ")).count();
    let extremes: usize = outcomes.iter().filter(|o| o.1.iter().any(|s| s.contains("iteration gives"))).count();
    detail.push(format!(
        "random: {pairs} pairs over 50 markets, {closure} closure failures, {extremes} markets with mismatched extremes"
    ));
    failures.extend(outcomes.into_iter().flat_map(|o| o.1));

    let pass = failures.is_empty();
    let mut detail = detail.join("; ");
    if let Some(c) = failures.first() {
        detail.push_str(&format!("; first: {c}"));
    }
    report(6, "equilibria closed under meet/join, extremes from iteration", pass, &detail, start.elapsed());
    assert!(pass, "{detail}");
}

#[test]
fn criterion_7_characterization_agrees() {
    let start = Instant::now();
    let markets = all_markets();
    let results: Vec<(usize, Vec<String>)> = markets
        .par_iter()
        .map(|market| {
            let grid = common::grid(market);
            let bad = grid
                .iter()
                .filter(|p| check_we(market, p).unwrap().is_we != check_we_by_characterization(market, p).unwrap())
                .map(|p| format!("{} p={}", describe(market), show(market, p)))
                .collect();
            (grid.len(), bad)
        })
        .collect();
    let points: usize = results.iter().map(|r| r.0).sum();
    let bad: Vec<&String> = results.iter().flat_map(|r| &r.1).collect();
    let pass = bad.is_empty();
    let mut detail = format!("{} disagreements over {points} grid points of {} markets", bad.len(), markets.len());
    if let Some(c) = bad.first() {
        detail.push_str(&format!("; first: {c}"));
    }
    report(7, "allocation check = no over/underdemanded set", pass, &detail, start.elapsed());
    assert!(pass, "{detail}");
}

#[test]
fn criterion_8_hall_matches_subset_enumeration() {
    let start = Instant::now();
    let markets: Vec<Market> = all_markets().into_iter().filter(|m| m.num_goods() <= 4).collect();
    let results: Vec<(usize, Vec<String>)> = markets
        .par_iter()
        .map(|market| {
            let grid = common::grid(market);
            let bad = grid
                .iter()
                .filter(|p| {
                    let over = exists_overdemanded(market, p).unwrap().verdict == Verdict::Over;
                    let under = exists_underdemanded(market, p).unwrap().verdict == Verdict::Under;
                    over != common::some_over(market, p) || under != common::some_under(market, p)
                })
                .map(|p| format!("{} p={}", describe(market), show(market, p)))
                .collect();
            (grid.len(), bad)
        })
        .collect();
    let points: usize = results.iter().map(|r| r.0).sum();
    let bad: Vec<&String> = results.iter().flat_map(|r| &r.1).collect();
    let pass = bad.is_empty();
    let mut detail = format!("{} disagreements over {points} grid points of {} markets", bad.len(), markets.len());
    if let Some(c) = bad.first() {
        detail.push_str(&format!("; first: {c}"));
    }
    report(8, "matching-based detection = subset enumeration", pass, &detail, start.elapsed());
    assert!(pass, "{detail}");
}

#[test]
fn criterion_9_iteration_bound() {
    let start = Instant::now();
    let markets = all_markets();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for market in &markets {
        let f = PriceMap::new(market);
        let bound = market.num_goods() * market.cap_ticks() as usize;
        for (start, expected) in [(bottom(market), Direction::Ascending), (top(market), Direction::Descending)] {
            let trace = iterate_from(&f, &start, default_max_steps(market)).unwrap();
            let monotone = trace.iterates.windows(2).all(|w| match expected {
                Direction::Ascending => w[0].is_below(&w[1]),
                _ => w[1].is_below(&w[0]),
            });
            if bound > 0 {
                worst = worst.max(trace.steps as f64 / bound as f64);
            }
            if !trace.converged || trace.steps > bound || !monotone {
                failures.push(format!(
                    "{} from {}: {} steps, bound {bound}, monotone {monotone}",
                    describe(market),
                    show(market, &start),
                    trace.steps
                ));
            }
        }
    }
    let pass = failures.is_empty();
    let mut detail =
        format!("{} traces over {} markets, largest steps/bound ratio {worst:.2}", 2 * markets.len(), markets.len());
    if let Some(c) = failures.first() {
        detail.push_str(&format!("; first: {c}"));
    }
    report(9, "corner iterations monotone within m*H/tick steps", pass, &detail, start.elapsed());
    assert!(pass, "{detail}");
}
