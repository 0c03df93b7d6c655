//! Over- and underdemanded sets, Hall certificates and the Walrasian check.
//!
//! Conventions: the empty set is never over- or underdemanded. Existence
//! questions go through bipartite matchings on the demand graph, minimality
//! questions through subset enumeration.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::market::{demand, Allocation, DemandProfile, GoodSet, Market, PriceVector};
use crate::matching::{hall_violator, maximum_matching, Bipartite};

/// Largest market for which minimality is decided by subset enumeration.
pub const MINIMALITY_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Over,
    Under,
    None,
}

/// Outcome of a Hall check.
///
/// For `Over`, `witness_buyers` is `O(S, p)`; for `Under` it is `U(S, p)`.
/// For `None`, `matching` saturates the side under test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandCertificate {
    pub verdict: Verdict,
    pub witness_goods: GoodSet,
    pub witness_buyers: Vec<usize>,
    /// `(buyer, good)` pairs.
    pub matching: Vec<(usize, usize)>,
}

impl DemandCertificate {
    pub fn to_json(&self, market: &Market) -> serde_json::Value {
        json!({
            "verdict": self.verdict,
            "witness_goods": market.good_ids(self.witness_goods),
            "witness_buyers": market.buyer_ids(&self.witness_buyers),
            "matching": self.matching.iter().map(|&(i, x)| json!([market.buyers()[i].to_string(), market.goods()[x].to_string()])).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeCheck {
    pub is_we: bool,
    pub allocation: Option<Allocation>,
}

fn check_goods(market: &Market, s: GoodSet) -> Result<()> {
    if !s.is_subset(GoodSet::full(market.num_goods())) {
        let bad = s.iter().find(|&x| x >= market.num_goods()).unwrap_or_default();
        return Err(Error::UnknownGood(format!("#{bad}")));
    }
    Ok(())
}

fn check_good(market: &Market, x: usize) -> Result<()> {
    if x < market.num_goods() {
        Ok(())
    } else {
        Err(Error::UnknownGood(format!("#{x}")))
    }
}

/// `U(S, p) = {i : D_i(p) ∩ S ≠ ∅}`.
pub fn demanders(market: &Market, p: &PriceVector, s: GoodSet) -> Result<Vec<usize>> {
    check_goods(market, s)?;
    Ok(demand(market, p)?.demanders(s))
}

/// `O(S, p) = {i : D_i(p) ⊆ S}`.
pub fn exclusive_demanders(market: &Market, p: &PriceVector, s: GoodSet) -> Result<Vec<usize>> {
    check_goods(market, s)?;
    Ok(demand(market, p)?.exclusive_demanders(s))
}

pub(crate) fn overdemanded_in(profile: &DemandProfile, s: GoodSet, weak: bool) -> bool {
    if s.is_empty() {
        return false;
    }
    let o = profile.count_exclusive(s);
    if weak {
        o >= s.len()
    } else {
        o > s.len()
    }
}

pub(crate) fn underdemanded_in(profile: &DemandProfile, positive: GoodSet, s: GoodSet, weak: bool) -> bool {
    if s.is_empty() || !s.is_subset(positive) {
        return false;
    }
    let u = profile.count_demanders(s);
    if weak {
        u <= s.len()
    } else {
        u < s.len()
    }
}

/// `|O(S,p)| > |S|` (strict) or `≥` (weak).
pub fn is_overdemanded(market: &Market, p: &PriceVector, s: GoodSet, weak: bool) -> Result<bool> {
    check_goods(market, s)?;
    Ok(overdemanded_in(&demand(market, p)?, s, weak))
}

/// `S ⊆ M⁺(p)` and `|U(S,p)| < |S|` (strict) or `≤` (weak).
pub fn is_underdemanded(market: &Market, p: &PriceVector, s: GoodSet, weak: bool) -> Result<bool> {
    check_goods(market, s)?;
    Ok(underdemanded_in(&demand(market, p)?, p.positive(), s, weak))
}

pub(crate) fn overdemand_certificate(profile: &DemandProfile, m: usize) -> DemandCertificate {
    // Only buyers that shun the dummy good can be exclusive demanders.
    let strict: Vec<usize> = (0..profile.sets().len()).filter(|&i| !profile.get(i).dummy).collect();
    let adj = strict.iter().map(|&i| profile.get(i).goods.iter().collect()).collect();
    let g = Bipartite::new(m, adj);
    let matching = maximum_matching(&g);
    let pairs = matching.pairs().into_iter().map(|(l, x)| (strict[l], x)).collect();
    match hall_violator(&g, &matching) {
        None => DemandCertificate {
            verdict: Verdict::None,
            witness_goods: GoodSet::EMPTY,
            witness_buyers: Vec::new(),
            matching: pairs,
        },
        Some((_, goods)) => {
            let s = GoodSet::from_indices(goods);
            DemandCertificate {
                verdict: Verdict::Over,
                witness_goods: s,
                witness_buyers: profile.exclusive_demanders(s),
                matching: pairs,
            }
        }
    }
}

pub(crate) fn underdemand_certificate(profile: &DemandProfile, positive: GoodSet, m: usize) -> DemandCertificate {
    let n = profile.sets().len();
    let goods: Vec<usize> = positive.iter().filter(|&x| x < m).collect();
    let adj = goods.iter().map(|&x| (0..n).filter(|&i| profile.get(i).goods.contains(x)).collect()).collect();
    let g = Bipartite::new(n, adj);
    let matching = maximum_matching(&g);
    let pairs = matching.pairs().into_iter().map(|(l, i)| (i, goods[l])).collect();
    match hall_violator(&g, &matching) {
        None => DemandCertificate {
            verdict: Verdict::None,
            witness_goods: GoodSet::EMPTY,
            witness_buyers: Vec::new(),
            matching: pairs,
        },
        Some((left, buyers)) => DemandCertificate {
            verdict: Verdict::Under,
            witness_goods: GoodSet::from_indices(left.into_iter().map(|l| goods[l])),
            witness_buyers: buyers,
            matching: pairs,
        },
    }
}

/// Is some set overdemanded at `p`? Decided by a matching that saturates
/// the buyers who do not demand the dummy good.
pub fn exists_overdemanded(market: &Market, p: &PriceVector) -> Result<DemandCertificate> {
    Ok(overdemand_certificate(&demand(market, p)?, market.num_goods()))
}

/// Is some set underdemanded at `p`? Decided by a matching that saturates
/// the positively priced goods.
pub fn exists_underdemanded(market: &Market, p: &PriceVector) -> Result<DemandCertificate> {
    Ok(underdemand_certificate(&demand(market, p)?, p.positive(), market.num_goods()))
}

/// Subsets of `pool` in order of increasing size, ties by numeric mask.
fn subsets_by_size(pool: GoodSet) -> impl Iterator<Item = GoodSet> {
    let members: Vec<usize> = pool.iter().collect();
    let k = members.len();
    (0..=k).flat_map(move |size| {
        let members = members.clone();
        combinations(k, size)
            .map(move |mask| GoodSet::from_indices((0..k).filter(|b| mask >> b & 1 == 1).map(|b| members[b])))
    })
}

/// Masks over `k` bits with exactly `size` ones, ascending (Gosper's hack).
fn combinations(k: usize, size: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << k;
    let first = if size == 0 { 0 } else { (1u64 << size) - 1 };
    let mut next = Some(first);
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit && !(cur == 0 && size == 0) {
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur)
    })
}

/// Smallest set containing `x` with the property; the first hit in order of
/// size has no proper subset containing `x` with the property.
fn minimal_witness(pool: GoodSet, x: usize, mut holds: impl FnMut(GoodSet) -> bool) -> Option<GoodSet> {
    if !pool.contains(x) {
        return None;
    }
    let others = GoodSet::from_bits(pool.bits() & !(1 << x));
    subsets_by_size(others).map(|t| t.with(x)).find(|&s| holds(s))
}

fn check_minimality_cap(m: usize) -> Result<()> {
    if m > MINIMALITY_CAP {
        return Err(Error::SubsetCapExceeded { goods: m, cap: MINIMALITY_CAP });
    }
    Ok(())
}

pub(crate) fn minimal_over_witness(profile: &DemandProfile, m: usize, x: usize) -> Option<GoodSet> {
    minimal_witness(GoodSet::full(m), x, |s| overdemanded_in(profile, s, false))
}

pub(crate) fn minimal_under_witness(profile: &DemandProfile, positive: GoodSet, m: usize, x: usize) -> Option<GoodSet> {
    let pool = GoodSet::from_bits(positive.bits() & GoodSet::full(m).bits());
    minimal_witness(pool, x, |s| underdemanded_in(profile, positive, s, false))
}

/// Witness that `x` is minimally overdemanded at `p`: an overdemanded `S ∋ x`
/// none of whose proper subsets containing `x` is overdemanded.
pub fn minimally_overdemanded(market: &Market, p: &PriceVector, x: usize) -> Result<Option<GoodSet>> {
    check_good(market, x)?;
    check_minimality_cap(market.num_goods())?;
    Ok(minimal_over_witness(&demand(market, p)?, market.num_goods(), x))
}

pub fn is_minimally_overdemanded(market: &Market, p: &PriceVector, x: usize) -> Result<bool> {
    Ok(minimally_overdemanded(market, p, x)?.is_some())
}

/// Underdemand counterpart of [`minimally_overdemanded`].
pub fn minimally_underdemanded(market: &Market, p: &PriceVector, x: usize) -> Result<Option<GoodSet>> {
    check_good(market, x)?;
    check_minimality_cap(market.num_goods())?;
    Ok(minimal_under_witness(&demand(market, p)?, p.positive(), market.num_goods(), x))
}

pub fn is_minimally_underdemanded(market: &Market, p: &PriceVector, x: usize) -> Result<bool> {
    Ok(minimally_underdemanded(market, p, x)?.is_some())
}

/// A Walrasian allocation at `p`, if one exists.
///
/// Starts from a matching that saturates the buyers who shun the dummy good,
/// then brings every unmatched positively priced good in along an alternating
/// path that ends at a free buyer or at a buyer holding a zero-priced good.
/// Matched buyers and matched positive goods stay matched throughout.
pub(crate) fn we_allocation(profile: &DemandProfile, positive: GoodSet, m: usize) -> Option<Allocation> {
    let n = profile.sets().len();
    let over = overdemand_certificate(profile, m);
    if over.verdict != Verdict::None {
        return None;
    }
    if underdemand_certificate(profile, positive, m).verdict != Verdict::None {
        return None;
    }
    let mut buyer_good: Vec<Option<usize>> = vec![None; n];
    let mut good_buyer: Vec<Option<usize>> = vec![None; m];
    for (i, x) in over.matching {
        buyer_good[i] = Some(x);
        good_buyer[x] = Some(i);
    }

    struct State<'a> {
        profile: &'a DemandProfile,
        positive: GoodSet,
        buyer_good: Vec<Option<usize>>,
        good_buyer: Vec<Option<usize>>,
        visited: Vec<bool>,
    }

    fn bring_in(st: &mut State<'_>, x: usize) -> bool {
        for i in 0..st.profile.sets().len() {
            if st.visited[i] || !st.profile.get(i).goods.contains(x) {
                continue;
            }
            st.visited[i] = true;
            let moved = match st.buyer_good[i] {
                None => true,
                Some(y) if !st.positive.contains(y) => {
                    st.good_buyer[y] = None;
                    true
                }
                Some(y) => bring_in(st, y),
            };
            if moved {
                st.buyer_good[i] = Some(x);
                st.good_buyer[x] = Some(i);
                return true;
            }
        }
        false
    }

    let mut st = State { profile, positive, buyer_good, good_buyer, visited: vec![false; n] };
    for x in positive.iter().filter(|&x| x < m) {
        if st.good_buyer[x].is_some() {
            continue;
        }
        st.visited.iter_mut().for_each(|v| *v = false);
        if !bring_in(&mut st, x) {
            debug_assert!(false, "both-sided matching must exist when neither side has a Hall violator");
            return None;
        }
    }
    let unassigned_ok = (0..n).all(|i| st.buyer_good[i].is_some() || profile.get(i).dummy);
    let positive_ok = positive.iter().filter(|&x| x < m).all(|x| st.good_buyer[x].is_some());
    if !(unassigned_ok && positive_ok) {
        return None;
    }
    Allocation::new(st.buyer_good).ok()
}

/// Equilibrium test: every buyer gets a demanded object and every unassigned
/// good is free.
pub fn check_we(market: &Market, p: &PriceVector) -> Result<WeCheck> {
    let profile = demand(market, p)?;
    let allocation = we_allocation(&profile, p.positive(), market.num_goods());
    Ok(WeCheck { is_we: allocation.is_some(), allocation })
}

/// No set is overdemanded and no set is underdemanded.
pub fn check_we_by_characterization(market: &Market, p: &PriceVector) -> Result<bool> {
    Ok(exists_overdemanded(market, p)?.verdict == Verdict::None
        && exists_underdemanded(market, p)?.verdict == Verdict::None)
}
