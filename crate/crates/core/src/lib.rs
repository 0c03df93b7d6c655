//! Walrasian equilibria of unit-demand assignment markets.
//!
//! Prices live on a finite grid `{0, δ, ..., H}^m`. The [`price_map`] module
//! builds a monotone price-adjusting map on that grid whose fixed points are
//! meant to be exactly the Walrasian price vectors; [`lattice`] iterates it
//! to its least and greatest fixed points and cross-checks every fixed point
//! against an independent equilibrium test from [`analysis`].

pub mod analysis;
pub mod error;
pub mod lattice;
pub mod market;
pub mod matching;
pub mod price_map;
pub mod random;
pub mod selfcheck;
pub mod tipping;

pub use error::{Error, Result};
pub use market::{Allocation, DemandProfile, DemandSet, GoodSet, Id, Market, PriceVector, Rational, Ticks};
pub use price_map::{PriceMap, Region};
pub use tipping::{Tipping, TippingConfig, TippingProfile};
