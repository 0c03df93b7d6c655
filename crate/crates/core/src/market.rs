//! Markets, the discrete price grid, demand correspondences and allocations.
//!
//! Prices are stored as whole numbers of ticks. A market with tick `δ` and
//! cap `H` has the price grid `{0, δ, 2δ, ..., H}` on every good; the dummy
//! good `0` always costs nothing and is never stored.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Exact non-negative rational used for ticks and logical prices.
pub type Rational = Ratio<u64>;

/// Price in whole ticks.
pub type Ticks = u32;

/// Largest number of goods a market may carry (goods sets are 64-bit masks).
pub const MAX_GOODS: usize = 64;

/// Parses `"3"`, `"3.25"` or `"7/2"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().ok()?;
        let den: u64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Ratio::new(num, den));
    }
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
    if frac.is_empty() {
        return Some(Ratio::from_integer(whole));
    }
    let scale = 10u64.checked_pow(frac.len() as u32)?;
    let frac: u64 = frac.parse().ok()?;
    Some(Ratio::from_integer(whole) + Ratio::new(frac, scale))
}

/// Renders a rational as a plain decimal when it terminates, `p/q` otherwise.
pub fn format_rational(r: Rational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut den = *r.denom();
    while den.is_multiple_of(2) {
        den /= 2;
    }
    while den.is_multiple_of(5) {
        den /= 5;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let whole = r.to_integer();
    let mut rem = r - Ratio::from_integer(whole);
    let mut digits = String::new();
    while *rem.numer() != 0 {
        rem *= 10;
        let d = rem.to_integer();
        digits.push(char::from(b'0' + d as u8));
        rem -= Ratio::from_integer(d);
    }
    format!("{whole}.{digits}")
}

/// JSON form of a logical price: a number when the decimal expansion
/// terminates, otherwise the string `"p/q"`.
pub fn rational_json(r: Rational) -> serde_json::Value {
    let text = format_rational(r);
    if text.contains('/') {
        return serde_json::Value::String(text);
    }
    if r.is_integer() {
        return serde_json::Value::from(r.to_integer());
    }
    serde_json::from_str(&text).unwrap_or(serde_json::Value::String(text))
}

/// A set of goods, as a bitmask over good indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GoodSet(u64);

impl GoodSet {
    pub const EMPTY: GoodSet = GoodSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        GoodSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(x: usize) -> Self {
        GoodSet(1 << x)
    }

    /// All goods `0..m`.
    pub fn full(m: usize) -> Self {
        if m >= 64 {
            GoodSet(u64::MAX)
        } else {
            GoodSet((1u64 << m) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(GoodSet::EMPTY, |s, x| s.with(x))
    }

    pub fn with(self, x: usize) -> Self {
        GoodSet(self.0 | (1 << x))
    }

    pub fn contains(self, x: usize) -> bool {
        self.0 >> x & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: GoodSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: GoodSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: GoodSet) -> GoodSet {
        GoodSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |x| bits >> x & 1 == 1)
    }
}

/// Buyer or good identifier as it appears in a market document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Id {
    Int(u64),
    Text(String),
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Id::Int(v) => write!(f, "{v}"),
            Id::Text(s) => f.write_str(s),
        }
    }
}

/// The on-disk market schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buyers: Option<Vec<Id>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goods: Option<Vec<Id>>,
    pub valuations: Vec<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_override: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tick: Option<serde_json::Value>,
}

fn rational_field(value: &serde_json::Value, field: &str) -> Result<Rational> {
    let text = match value {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(Error::Schema(format!("{field} must be a number or string, got {other}"))),
    };
    if text.trim_start().starts_with('-') {
        return Err(Error::Schema(format!("{field} must be non-negative, got {text}")));
    }
    parse_rational(&text).ok_or_else(|| Error::Schema(format!("{field} is not a rational: {text:?}")))
}

/// Default label of the `k`-th good: `a`, `b`, ..., `z`, then `g27`, ...
pub fn default_good_id(k: usize) -> Id {
    if k < 26 {
        Id::Text(char::from(b'a' + k as u8).to_string())
    } else {
        Id::Text(format!("g{}", k + 1))
    }
}

/// A validated unit-demand market with quasilinear integer valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    name: Option<String>,
    buyers: Vec<Id>,
    goods: Vec<Id>,
    valuations: Vec<Vec<u64>>,
    cap: Rational,
    cap_overridden: bool,
    tick: Rational,
    cap_ticks: Ticks,
    value_ticks: Vec<Vec<Ticks>>,
}

impl Market {
    pub const DEFAULT_TICK: Rational = Ratio::new_raw(1, 2);

    /// Builds a market; `cap` defaults to the largest valuation.
    pub fn new(
        name: Option<String>,
        buyers: Vec<Id>,
        goods: Vec<Id>,
        valuations: Vec<Vec<u64>>,
        cap: Option<Rational>,
        tick: Rational,
    ) -> Result<Market> {
        let n = buyers.len();
        let m = goods.len();
        if n == 0 {
            return Err(Error::Schema("market needs at least one buyer".into()));
        }
        if m == 0 {
            return Err(Error::Schema("market needs at least one good".into()));
        }
        if m > MAX_GOODS {
            return Err(Error::TooManyGoods(m));
        }
        if valuations.len() != n {
            return Err(Error::Schema(format!("valuations has {} rows for {n} buyers", valuations.len())));
        }
        if let Some(row) = valuations.iter().find(|row| row.len() != m) {
            return Err(Error::Schema(format!("valuation row has {} entries for {m} goods", row.len())));
        }
        for (label, ids) in [("buyer", &buyers), ("good", &goods)] {
            for (k, id) in ids.iter().enumerate() {
                if ids[..k].iter().any(|other| other.to_string() == id.to_string()) {
                    return Err(Error::Schema(format!("duplicate {label} id {id}")));
                }
            }
        }
        if goods.iter().any(|g| g.to_string() == "0") {
            return Err(Error::Schema("good id 0 is reserved for the dummy good".into()));
        }
        if *tick.numer() == 0 {
            return Err(Error::InvalidTick("tick must be positive".into()));
        }
        let max = valuations.iter().flatten().copied().max().unwrap_or(0);
        let cap_overridden = cap.is_some();
        let cap = cap.unwrap_or_else(|| Ratio::from_integer(max));
        if cap < Ratio::from_integer(max) {
            return Err(Error::CapBelowMaxValuation { cap: format_rational(cap), max });
        }
        let to_ticks = |value: Rational, what: String| -> Result<Ticks> {
            let q = value / tick;
            if !q.is_integer() {
                return Err(Error::TickDoesNotDivide { tick: format_rational(tick), what });
            }
            // Leave headroom for the one-tick probe above the cap.
            Ticks::try_from(q.to_integer())
                .ok()
                .filter(|t| *t < Ticks::MAX / 4)
                .ok_or_else(|| Error::Schema(format!("{what} spans too many ticks")))
        };
        let cap_ticks = to_ticks(cap, format!("H = {}", format_rational(cap)))?;
        let mut value_ticks = Vec::with_capacity(n);
        for (i, row) in valuations.iter().enumerate() {
            let mut out = Vec::with_capacity(m);
            for (x, &v) in row.iter().enumerate() {
                out.push(to_ticks(
                    Ratio::from_integer(v),
                    format!("valuation of buyer {} for good {}", buyers[i], goods[x]),
                )?);
            }
            value_ticks.push(out);
        }
        Ok(Market { name, buyers, goods, valuations, cap, cap_overridden, tick, cap_ticks, value_ticks })
    }

    /// Builds a market from integer valuations with default ids, cap and tick.
    pub fn from_valuations(valuations: Vec<Vec<u64>>) -> Result<Market> {
        let n = valuations.len();
        let m = valuations.first().map_or(0, Vec::len);
        Market::new(
            None,
            (1..=n as u64).map(Id::Int).collect(),
            (0..m).map(default_good_id).collect(),
            valuations,
            None,
            Market::DEFAULT_TICK,
        )
    }

    pub fn from_document(doc: &MarketDocument) -> Result<Market> {
        let n = doc.valuations.len();
        let m = doc.valuations.first().map_or(0, Vec::len);
        let buyers = doc.buyers.clone().unwrap_or_else(|| (1..=n as u64).map(Id::Int).collect());
        let goods = doc.goods.clone().unwrap_or_else(|| (0..m).map(default_good_id).collect());
        let label = |ids: &[Id], k: usize| ids.get(k).map_or_else(|| k.to_string(), Id::to_string);
        let mut valuations = Vec::with_capacity(n);
        for (i, row) in doc.valuations.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (x, cell) in row.iter().enumerate() {
                let err_neg = || Error::NegativeValuation { buyer: label(&buyers, i), good: label(&goods, x) };
                let err_frac = || Error::NonIntegerValuation { buyer: label(&buyers, i), good: label(&goods, x) };
                let serde_json::Value::Number(num) = cell else {
                    return Err(Error::Schema(format!("valuation {cell} is not a number")));
                };
                if let Some(v) = num.as_u64() {
                    out.push(v);
                } else if num.as_i64().is_some() {
                    return Err(err_neg());
                } else {
                    let f = num.as_f64().unwrap_or(f64::NAN);
                    if f < 0.0 {
                        return Err(err_neg());
                    }
                    if f.fract() != 0.0 || !f.is_finite() || f > u32::MAX as f64 {
                        return Err(err_frac());
                    }
                    out.push(f as u64);
                }
            }
            valuations.push(out);
        }
        let tick = match &doc.tick {
            Some(v) => rational_field(v, "tick")?,
            None => Market::DEFAULT_TICK,
        };
        let cap = doc.h_override.as_ref().map(|v| rational_field(v, "h_override")).transpose()?;
        Market::new(doc.name.clone(), buyers, goods, valuations, cap, tick)
    }

    pub fn from_json(text: &str) -> Result<Market> {
        let doc: MarketDocument = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Market::from_document(&doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Market> {
        let text = std::fs::read_to_string(path)?;
        Market::from_json(&text)
    }

    pub fn to_document(&self) -> MarketDocument {
        MarketDocument {
            name: self.name.clone(),
            buyers: Some(self.buyers.clone()),
            goods: Some(self.goods.clone()),
            valuations: self
                .valuations
                .iter()
                .map(|row| row.iter().map(|&v| serde_json::Value::from(v)).collect())
                .collect(),
            h_override: self.cap_overridden.then(|| serde_json::Value::String(format_rational(self.cap))),
            tick: Some(serde_json::Value::String(format_rational(self.tick))),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("market document serializes")
    }

    /// Hex SHA-256 of the canonical document.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// The same market on a different price grid.
    pub fn with_tick(&self, tick: Rational) -> Result<Market> {
        Market::new(
            self.name.clone(),
            self.buyers.clone(),
            self.goods.clone(),
            self.valuations.clone(),
            self.cap_overridden.then_some(self.cap),
            tick,
        )
    }

    /// The same market with an explicit cap.
    pub fn with_cap(&self, cap: Rational) -> Result<Market> {
        Market::new(
            self.name.clone(),
            self.buyers.clone(),
            self.goods.clone(),
            self.valuations.clone(),
            Some(cap),
            self.tick,
        )
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn num_buyers(&self) -> usize {
        self.buyers.len()
    }

    pub fn num_goods(&self) -> usize {
        self.goods.len()
    }

    pub fn buyers(&self) -> &[Id] {
        &self.buyers
    }

    pub fn goods(&self) -> &[Id] {
        &self.goods
    }

    pub fn valuations(&self) -> &[Vec<u64>] {
        &self.valuations
    }

    pub fn tick(&self) -> Rational {
        self.tick
    }

    /// The cap `H` as a logical price.
    pub fn cap(&self) -> Rational {
        self.cap
    }

    /// The cap `H` in ticks.
    pub fn cap_ticks(&self) -> Ticks {
        self.cap_ticks
    }

    /// `v_i(x)` in ticks.
    pub fn value_ticks(&self, buyer: usize, good: usize) -> Ticks {
        self.value_ticks[buyer][good]
    }

    pub fn good_index(&self, id: &str) -> Result<usize> {
        self.goods.iter().position(|g| g.to_string() == id).ok_or_else(|| Error::UnknownGood(id.to_string()))
    }

    pub fn good_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<GoodSet> {
        ids.iter().try_fold(GoodSet::EMPTY, |set, id| Ok(set.with(self.good_index(id.as_ref())?)))
    }

    pub fn good_ids(&self, set: GoodSet) -> Vec<String> {
        set.iter().map(|x| self.goods[x].to_string()).collect()
    }

    pub fn buyer_ids(&self, buyers: &[usize]) -> Vec<String> {
        buyers.iter().map(|&i| self.buyers[i].to_string()).collect()
    }

    /// Number of points of the full price grid, saturating.
    pub fn grid_size(&self) -> u64 {
        let side = u64::from(self.cap_ticks) + 1;
        (0..self.num_goods()).fold(1u64, |acc, _| acc.saturating_mul(side))
    }

    pub fn ticks_to_price(&self, ticks: Ticks) -> Rational {
        self.tick * Ratio::from_integer(u64::from(ticks))
    }

    /// Exact conversion of a logical price onto the grid.
    pub fn price_to_ticks(&self, price: Rational) -> Result<Ticks> {
        let q = price / self.tick;
        if !q.is_integer() {
            return Err(Error::OffGrid(format_rational(price)));
        }
        Ticks::try_from(q.to_integer()).map_err(|_| Error::OffGrid(format_rational(price)))
    }

    /// Parses comma-separated prices, each an exact tick multiple.
    pub fn parse_prices(&self, csv: &str) -> Result<Vec<Ticks>> {
        if csv.trim().is_empty() {
            return Ok(Vec::new());
        }
        csv.split(',')
            .map(|field| {
                let value = parse_rational(field).ok_or_else(|| Error::BadPrice(field.trim().to_string()))?;
                self.price_to_ticks(value)
            })
            .collect()
    }

    /// Parses a full price vector and checks it lies in `[0, H]^m`.
    pub fn parse_price_vector(&self, csv: &str) -> Result<PriceVector> {
        let p = PriceVector::new(self.parse_prices(csv)?);
        self.check_prices(&p)?;
        Ok(p)
    }

    pub fn check_prices(&self, p: &PriceVector) -> Result<()> {
        if p.len() != self.num_goods() {
            return Err(Error::DimensionMismatch { expected: self.num_goods(), found: p.len() });
        }
        match p.ticks().iter().position(|&t| t > self.cap_ticks) {
            Some(good) => Err(Error::PriceOutOfRange { good, ticks: p.ticks()[good], cap: self.cap_ticks }),
            None => Ok(()),
        }
    }

    pub fn format_prices(&self, p: &[Ticks]) -> String {
        p.iter().map(|&t| format_rational(self.ticks_to_price(t))).collect::<Vec<_>>().join(",")
    }

    pub fn prices_json(&self, p: &[Ticks]) -> serde_json::Value {
        serde_json::Value::Array(p.iter().map(|&t| rational_json(self.ticks_to_price(t))).collect())
    }

    pub fn price_json(&self, t: Ticks) -> serde_json::Value {
        rational_json(self.ticks_to_price(t))
    }
}

impl FromStr for Market {
    type Err = Error;

    fn from_str(s: &str) -> Result<Market> {
        Market::from_json(s)
    }
}

/// `H = max_i max_x v_i(x)`.
pub fn price_cap(market: &Market) -> Rational {
    Ratio::from_integer(market.valuations().iter().flatten().copied().max().unwrap_or(0))
}

/// Prices of the real goods in ticks.
///
/// The derived `Ord` is lexicographic and only orders storage; the price
/// lattice order is [`PriceVector::is_below`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PriceVector(Vec<Ticks>);

impl PriceVector {
    pub fn new(ticks: Vec<Ticks>) -> Self {
        PriceVector(ticks)
    }

    pub fn zeros(m: usize) -> Self {
        PriceVector(vec![0; m])
    }

    pub fn uniform(m: usize, ticks: Ticks) -> Self {
        PriceVector(vec![ticks; m])
    }

    pub fn ticks(&self) -> &[Ticks] {
        &self.0
    }

    pub fn into_ticks(self) -> Vec<Ticks> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, good: usize) -> Ticks {
        self.0[good]
    }

    /// Goods with a strictly positive price.
    pub fn positive(&self) -> GoodSet {
        GoodSet::from_indices(self.0.iter().enumerate().filter(|(_, &t)| t > 0).map(|(x, _)| x))
    }

    /// `p_{-a}`: every coordinate except `a`.
    pub fn without(&self, a: usize) -> Vec<Ticks> {
        self.0.iter().enumerate().filter(|&(x, _)| x != a).map(|(_, &t)| t).collect()
    }

    /// Reassembles `(p_a, p_{-a})`.
    pub fn assemble(a: usize, own: Ticks, others: &[Ticks]) -> Self {
        let mut v = Vec::with_capacity(others.len() + 1);
        v.extend_from_slice(&others[..a]);
        v.push(own);
        v.extend_from_slice(&others[a..]);
        PriceVector(v)
    }

    pub fn with(&self, a: usize, own: Ticks) -> Self {
        let mut v = self.0.clone();
        v[a] = own;
        PriceVector(v)
    }

    /// Componentwise `self ≤ other`.
    pub fn is_below(&self, other: &PriceVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn meet(&self, other: &PriceVector) -> Result<PriceVector> {
        self.zip_with(other, Ticks::min)
    }

    pub fn join(&self, other: &PriceVector) -> Result<PriceVector> {
        self.zip_with(other, Ticks::max)
    }

    fn zip_with(&self, other: &PriceVector, f: fn(Ticks, Ticks) -> Ticks) -> Result<PriceVector> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(PriceVector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect()))
    }
}

/// `D_i(p)`: the surplus-maximizing goods plus whether the dummy good is among them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DemandSet {
    pub goods: GoodSet,
    pub dummy: bool,
}

impl DemandSet {
    pub fn is_subset_of(self, s: GoodSet) -> bool {
        !self.dummy && self.goods.is_subset(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandProfile(Vec<DemandSet>);

impl DemandProfile {
    pub fn sets(&self) -> &[DemandSet] {
        &self.0
    }

    pub fn get(&self, buyer: usize) -> DemandSet {
        self.0[buyer]
    }

    /// `U(S, p)`.
    pub fn demanders(&self, s: GoodSet) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i].goods.intersects(s)).collect()
    }

    /// `O(S, p)`.
    pub fn exclusive_demanders(&self, s: GoodSet) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i].is_subset_of(s)).collect()
    }

    /// `[{buyer, demand}]`, with the dummy good listed as `"0"`.
    pub fn to_json(&self, market: &Market) -> serde_json::Value {
        serde_json::Value::Array(
            self.0
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let mut ids = if d.dummy { vec!["0".to_string()] } else { Vec::new() };
                    ids.extend(market.good_ids(d.goods));
                    serde_json::json!({"buyer": market.buyers()[i].to_string(), "demand": ids})
                })
                .collect(),
        )
    }

    pub(crate) fn count_demanders(&self, s: GoodSet) -> usize {
        self.0.iter().filter(|d| d.goods.intersects(s)).count()
    }

    pub(crate) fn count_exclusive(&self, s: GoodSet) -> usize {
        self.0.iter().filter(|d| d.is_subset_of(s)).count()
    }
}

/// Demand at raw tick prices, without the range check. Prices above the cap
/// are allowed here so the tipping search can probe one tick beyond `H`.
pub(crate) fn demand_at(market: &Market, p: &[Ticks]) -> DemandProfile {
    let sets = (0..market.num_buyers())
        .map(|i| {
            let mut best: i64 = 0;
            let mut goods = GoodSet::EMPTY;
            for (x, &px) in p.iter().enumerate() {
                let surplus = i64::from(market.value_ticks(i, x)) - i64::from(px);
                if surplus > best {
                    best = surplus;
                    goods = GoodSet::singleton(x);
                } else if surplus == best {
                    goods = goods.with(x);
                }
            }
            DemandSet { goods, dummy: best == 0 }
        })
        .collect();
    DemandProfile(sets)
}

/// `D_i(p)` for every buyer; ties are kept.
pub fn demand(market: &Market, p: &PriceVector) -> Result<DemandProfile> {
    market.check_prices(p)?;
    Ok(demand_at(market, p.ticks()))
}

/// Per-buyer assignment; `None` is the dummy good.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation(Vec<Option<usize>>);

impl Allocation {
    pub fn new(assignment: Vec<Option<usize>>) -> Result<Allocation> {
        for (i, a) in assignment.iter().enumerate() {
            if a.is_some() && assignment[..i].contains(a) {
                return Err(Error::Schema(format!("good {} assigned twice", a.unwrap())));
            }
        }
        Ok(Allocation(assignment))
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.0
    }

    pub fn assigned_goods(&self) -> GoodSet {
        GoodSet::from_indices(self.0.iter().flatten().copied())
    }

    /// Ids per buyer, `"0"` for the dummy good.
    pub fn ids(&self, market: &Market) -> Vec<String> {
        self.0.iter().map(|a| a.map_or_else(|| "0".to_string(), |x| market.goods()[x].to_string())).collect()
    }
}
