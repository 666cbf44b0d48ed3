//! Seeded simulations: the adaptor weight sweep, the month-long gas study and
//! the transaction graph built from its traffic.
//!
//! Every run derives its random streams from [`SimScenario::seed`], so equal
//! scenarios produce byte-identical CSV output.

mod gas;
mod graph;
mod scenario;
mod sweep;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

pub use gas::{run_gas_study, write_daily_csv, DailyAggregate, GasStudy, DAILY_HEADER};
pub use graph::{
    build_transaction_graph, modularity, write_communities, write_edge_list, GraphError,
    TransactionGraph,
};
pub use scenario::{DemandProcess, GasPriceProcess, ScenarioError, SimScenario, TxMix};
pub use sweep::{run_weight_sweep, weight_label, write_price_csv, write_supply_csv, PriceSeries, RoundSeries};

use crate::ledger::LedgerError;
use crate::market::MarketError;
use crate::swap::SwapError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("round with weight {weight_ppm} ppm failed at hour {hour}: {source}")]
    Round {
        weight_ppm: u32,
        hour: u32,
        source: MarketError,
    },
    #[error("day {day}: {source}")]
    Ledger { day: u32, source: LedgerError },
    #[error("day {day}: {source}")]
    Swap { day: u32, source: SwapError },
}

/// Independent random stream `stream` of the scenario seed.
pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
