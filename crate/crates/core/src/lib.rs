//! Deterministic desk-scale model of a multi-application credit economy.
//!
//! * [`ledger`]: accounts, credit registry, gas-metered execution, blocks.
//! * [`market`]: bonding-curve credit adaptors for price discovery.
//! * [`swap`]: hashed-timelock atomic swaps and an exhaustive schedule checker.
//! * [`sim`]: seeded trading-bot and gas-usage simulations with CSV export.
//! * [`gateway`]: JSON request/response types and handlers for the price,
//!   swap and submit endpoints.

pub mod address;
pub mod gateway;
pub mod amount;
pub mod ledger;
pub mod market;
pub mod sim;
pub mod swap;

pub use address::{Address, Hash32};
pub use amount::Amount;
pub use ledger::{CreditUnitId, Ledger};
