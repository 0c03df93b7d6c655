mod common;

use proptest::prelude::*;

use walras::analysis::{
    check_we, check_we_by_characterization, exists_overdemanded, exists_underdemanded, minimally_overdemanded,
    minimally_underdemanded, Verdict,
};
use walras::lattice::{bottom, default_max_steps, iterate_from, top, Direction};
use walras::market::demand;
use walras::price_map::{adjust, region_of, Region};
use walras::{Market, PriceMap, PriceVector, Ticks};

fn market(max_buyers: usize, max_goods: usize, max_value: u64) -> impl Strategy<Value = Market> {
    (1..=max_buyers, 1..=max_goods).prop_flat_map(move |(n, m)| {
        proptest::collection::vec(proptest::collection::vec(0..=max_value, m), n)
            .prop_map(|v| Market::from_valuations(v).unwrap())
    })
}

fn point(market: &Market) -> impl Strategy<Value = PriceVector> {
    proptest::collection::vec(0..=market.cap_ticks(), market.num_goods()).prop_map(PriceVector::new)
}

fn market_and_point(n: usize, m: usize, v: u64) -> impl Strategy<Value = (Market, PriceVector)> {
    market(n, m, v).prop_flat_map(|mk| {
        let p = point(&mk);
        (Just(mk), p)
    })
}

fn market_and_pair(n: usize, m: usize, v: u64) -> impl Strategy<Value = (Market, PriceVector, PriceVector)> {
    market_and_point(n, m, v).prop_flat_map(|(mk, p)| {
        let cap = mk.cap_ticks();
        let upper: Vec<_> = p.ticks().iter().map(|&t| t..=cap).collect();
        (Just(mk), Just(p), upper.prop_map(PriceVector::new))
    })
}

fn with_good<T: Clone + std::fmt::Debug>(
    s: impl Strategy<Value = (Market, T)>,
) -> impl Strategy<Value = (Market, T, usize)> {
    s.prop_flat_map(|(mk, t)| {
        let m = mk.num_goods();
        (Just(mk), Just(t), 0..m)
    })
}

proptest! {
    #[test]
    fn demand_matches_oracle((mk, p) in market_and_point(4, 4, 8)) {
        let profile = demand(&mk, &p).unwrap();
        let oracle = common::demand(&mk, &p);
        for (i, d) in oracle.iter().enumerate() {
            let got = profile.get(i);
            prop_assert_eq!(got.goods.iter().collect::<Vec<_>>(), d.goods.clone());
            prop_assert_eq!(got.dummy, d.dummy);
        }
    }

    #[test]
    fn hall_tests_match_subset_enumeration((mk, p) in market_and_point(4, 4, 6)) {
        let over = exists_overdemanded(&mk, &p).unwrap();
        let under = exists_underdemanded(&mk, &p).unwrap();
        prop_assert_eq!(over.verdict == Verdict::Over, common::some_over(&mk, &p));
        prop_assert_eq!(under.verdict == Verdict::Under, common::some_under(&mk, &p));

        let d = common::demand(&mk, &p);
        if over.verdict == Verdict::Over {
            let s: Vec<usize> = over.witness_goods.iter().collect();
            prop_assert!(common::is_over(&d, &s));
        }
        if under.verdict == Verdict::Under {
            let s: Vec<usize> = under.witness_goods.iter().collect();
            prop_assert!(common::is_under(&d, &common::positive(&p), &s));
        }
        for &(i, x) in over.matching.iter().chain(&under.matching) {
            prop_assert!(d[i].goods.contains(&x));
        }
    }

    #[test]
    fn equilibrium_check_matches_allocation_search((mk, p) in market_and_point(4, 4, 6)) {
        let we = check_we(&mk, &p).unwrap();
        prop_assert_eq!(we.is_we, common::is_we(&mk, &p));
        prop_assert_eq!(we.is_we, check_we_by_characterization(&mk, &p).unwrap());
        if let Some(alloc) = we.allocation {
            let d = common::demand(&mk, &p);
            for (i, a) in alloc.assignment().iter().enumerate() {
                match a {
                    Some(x) => prop_assert!(d[i].goods.contains(x)),
                    None => prop_assert!(d[i].dummy),
                }
            }
            for x in common::positive(&p) {
                prop_assert!(alloc.assigned_goods().contains(x));
            }
        }
    }

    #[test]
    fn minimality_matches_oracle((mk, p, x) in with_good(market_and_point(4, 4, 6))) {
        prop_assert_eq!(minimally_overdemanded(&mk, &p, x).unwrap().is_some(), common::minimally_over(&mk, &p, x));
        prop_assert_eq!(minimally_underdemanded(&mk, &p, x).unwrap().is_some(), common::minimally_under(&mk, &p, x));
    }

    #[test]
    fn meet_and_join_bound_their_arguments((mk, p) in market_and_point(1, 4, 6), q in proptest::collection::vec(0u32..=12, 4)) {
        let q = PriceVector::new(q[..mk.num_goods()].iter().map(|&t| t.min(mk.cap_ticks())).collect());
        let lo = p.meet(&q).unwrap();
        let hi = p.join(&q).unwrap();
        prop_assert!(lo.is_below(&p) && lo.is_below(&q));
        prop_assert!(p.is_below(&hi) && q.is_below(&hi));
        prop_assert_eq!(p.meet(&p).unwrap(), p.clone());
        prop_assert_eq!(lo.join(&hi).unwrap(), hi.clone());
    }

    #[test]
    fn adjusting_rule_lands_between_neutral_prices(own in 0u32..20, s in 0u32..20, i in 0u32..20) {
        let out = adjust(own, s, i);
        prop_assert!(s.min(i) <= out && out <= s.max(i));
        if region_of(own, s, i) == Region::Neutral {
            prop_assert_eq!(out, own);
        }
    }

    #[test]
    fn market_documents_round_trip(mk in market(4, 4, 9)) {
        let again = Market::from_json(&mk.to_json()).unwrap();
        prop_assert_eq!(again.valuations(), mk.valuations());
        prop_assert_eq!(again.digest(), mk.digest());
    }

    #[test]
    fn prices_round_trip_through_text((mk, p) in market_and_point(1, 4, 9)) {
        let text = mk.format_prices(p.ticks());
        prop_assert_eq!(mk.parse_price_vector(&text).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tipping_prices_match_oracle((mk, p, a) in with_good(market_and_point(3, 3, 4))) {
        let f = PriceMap::new(&mk);
        let base = p.without(a);
        prop_assert_eq!(f.tipping().sup_o(a, &base).unwrap(), common::sup_o(&mk, a, &p));
        prop_assert_eq!(f.tipping().inf_u(a, &base).unwrap(), common::inf_u(&mk, a, &p));
    }

    #[test]
    fn price_map_matches_oracle((mk, p) in market_and_point(3, 2, 3)) {
        let f = PriceMap::new(&mk);
        prop_assert_eq!(f.apply(&p).unwrap(), common::apply_map(&mk, &p));
    }

    #[test]
    fn price_map_stays_on_the_grid((mk, p) in market_and_point(3, 3, 6)) {
        let out = PriceMap::new(&mk).apply(&p).unwrap();
        prop_assert!(mk.check_prices(&out).is_ok());
    }

    #[test]
    fn price_map_is_monotone((mk, p, q) in market_and_pair(3, 3, 6)) {
        let f = PriceMap::new(&mk);
        prop_assert!(f.apply(&p).unwrap().is_below(&f.apply(&q).unwrap()));
    }

    #[test]
    fn neutral_prices_are_monotone((mk, p, q) in market_and_pair(3, 3, 6)) {
        let f = PriceMap::new(&mk);
        for a in 0..mk.num_goods() {
            let (bp, bq) = (p.without(a), q.without(a));
            prop_assert!(f.tipping().neutral_s(a, &bp).unwrap() <= f.tipping().neutral_s(a, &bq).unwrap());
            prop_assert!(f.tipping().neutral_i(a, &bp).unwrap() <= f.tipping().neutral_i(a, &bq).unwrap());
        }
    }

    #[test]
    fn own_price_sweep_is_monotone_and_ordered((mk, p, a) in with_good(market_and_point(3, 3, 6))) {
        let f = PriceMap::new(&mk);
        let sweep: Vec<(Ticks, Region)> = (0..=mk.cap_ticks())
            .map(|own| {
                let step = f.step(a, &p.with(a, own)).unwrap();
                (step.output, step.region)
            })
            .collect();
        prop_assert!(sweep.windows(2).all(|w| w[0].0 <= w[1].0));
        let inverted = sweep.iter().filter(|(_, r)| *r == Region::Inverted).count();
        prop_assert!(inverted == 0 || inverted == sweep.len());
        if inverted == 0 {
            prop_assert!(sweep.windows(2).all(|w| w[0].1.rank() <= w[1].1.rank()));
        }
    }

    #[test]
    fn iteration_from_corners_is_monotone_and_bounded(mk in market(3, 3, 6)) {
        let f = PriceMap::new(&mk);
        let bound = mk.num_goods() * mk.cap_ticks() as usize;
        let up = iterate_from(&f, &bottom(&mk), default_max_steps(&mk)).unwrap();
        let down = iterate_from(&f, &top(&mk), default_max_steps(&mk)).unwrap();
        prop_assert!(up.converged && down.converged);
        prop_assert!(up.steps <= bound && down.steps <= bound);
        prop_assert!(matches!(up.direction, Direction::Ascending | Direction::None));
        prop_assert!(matches!(down.direction, Direction::Descending | Direction::None));
        prop_assert!(up.last().is_below(down.last()));
    }

    #[test]
    fn sup_o_never_exceeds_inf_u((mk, p, a) in with_good(market_and_point(3, 3, 6))) {
        let f = PriceMap::new(&mk);
        let base = p.without(a);
        let sup_o = f.tipping().sup_o(a, &base).unwrap();
        if let Some(inf_u) = f.tipping().inf_u(a, &base).unwrap() {
            prop_assert!(sup_o <= inf_u, "sup_O {} > inf_U {}", sup_o, inf_u);
        }
    }

    #[test]
    fn sup_o_is_monotone_in_other_prices((mk, p, q) in market_and_pair(3, 3, 6)) {
        let f = PriceMap::new(&mk);
        for a in 0..mk.num_goods() {
            prop_assert!(f.tipping().sup_o(a, &p.without(a)).unwrap() <= f.tipping().sup_o(a, &q.without(a)).unwrap());
        }
    }

    #[test]
    fn fixed_points_are_exactly_equilibria((mk, p) in market_and_point(3, 3, 6)) {
        let fixed = PriceMap::new(&mk).is_fixed(&p).unwrap();
        prop_assert_eq!(fixed, common::is_we(&mk, &p), "prices {}", mk.format_prices(p.ticks()));
    }
}
