use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{self, Amount};
use crate::market::WEIGHT_SCALE;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("botCount must be positive")]
    NoBots,
    #[error("weightRounds must not be empty")]
    NoRounds,
    #[error("weight {0} ppm is outside (0, 1000000]")]
    BadWeight(u32),
    #[error("dailyTxRange [{0}, {1}] has min above max")]
    BadTxRange(u32, u32),
    #[error("{name} = {value} must lie in [0, 1]")]
    BadProbability { name: &'static str, value: f64 },
    #[error("{name} = {value} must be finite and nonnegative")]
    BadRate { name: &'static str, value: f64 },
    #[error("initialPrice must be finite and positive")]
    BadPrice,
    #[error("initialSupply must be positive")]
    NoSupply,
    #[error("credits must list at least one unique, nonempty name")]
    BadCredits,
    #[error("txMix weights must be nonnegative with a positive total")]
    BadMix,
    #[error("startDate `{0}` is not a YYYY-MM-DD date")]
    BadDate(String),
}

/// Hourly trading behaviour of each sweep bot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct DemandProcess {
    /// Mean main-credit deposit of one buy, in credits.
    pub net_buy_rate: f64,
    pub buy_probability: f64,
    /// Mean fraction of holdings a selling bot sells.
    pub sell_fraction: f64,
}

impl Default for DemandProcess {
    fn default() -> Self {
        DemandProcess {
            net_buy_rate: 1.0,
            buy_probability: 0.7,
            sell_fraction: 0.1,
        }
    }
}

/// Daily gas price, lognormal with the given mean (micro-units per gas)
/// and log-scale spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasPriceProcess {
    pub mean: f64,
    pub spread: f64,
}

impl Default for GasPriceProcess {
    fn default() -> Self {
        GasPriceProcess {
            mean: 20.0,
            spread: 0.35,
        }
    }
}

/// Relative frequency of each transaction kind in the gas study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct TxMix {
    pub transfer: f64,
    pub market_trade: f64,
    pub swap_step: f64,
}

impl Default for TxMix {
    fn default() -> Self {
        TxMix {
            transfer: 0.5,
            market_trade: 0.35,
            swap_step: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct SimScenario {
    pub seed: u64,
    pub bot_count: u32,
    pub horizon_hours: u32,
    pub weight_rounds: Vec<u32>,
    #[serde(with = "amount::as_credits")]
    pub initial_supply: Amount,
    pub initial_price: f64,
    pub demand_process: DemandProcess,
    /// Main credit each bot starts with.
    #[serde(with = "amount::as_credits")]
    pub bot_endowment: Amount,
    pub days: u32,
    pub daily_tx_range: [u32; 2],
    pub gas_price_process: GasPriceProcess,
    /// Application credits of the gas study; bots are split evenly between them.
    pub credits: Vec<String>,
    pub tx_mix: TxMix,
    /// Chance that a gas-study transaction crosses to another bot population.
    pub cross_population_rate: f64,
    /// Chance that a transaction is sent with too little gas and reverts.
    pub under_gas_rate: f64,
    /// Gas limits exceed the schedule cost by up to this fraction.
    pub gas_limit_headroom: f64,
    /// Swap timelock margin in blocks (one block per simulated day).
    pub swap_delta: u64,
    pub start_date: String,
}

impl Default for SimScenario {
    fn default() -> Self {
        SimScenario {
            seed: 1,
            bot_count: 500,
            horizon_hours: 16,
            weight_rounds: vec![1_000_000, 500_000, 800_000],
            initial_supply: Amount::from_credits(500),
            initial_price: 1.0,
            demand_process: DemandProcess::default(),
            bot_endowment: Amount::from_credits(1_000),
            days: 31,
            daily_tx_range: [2_000, 8_000],
            gas_price_process: GasPriceProcess::default(),
            credits: vec!["ourtube".into(), "ourstore".into()],
            tx_mix: TxMix::default(),
            cross_population_rate: 0.05,
            under_gas_rate: 0.02,
            gas_limit_headroom: 0.5,
            swap_delta: 2,
            start_date: "2018-11-01".into(),
        }
    }
}

impl SimScenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: SimScenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: SimScenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn start(&self) -> Result<NaiveDate, ScenarioError> {
        NaiveDate::parse_from_str(&self.start_date, "%Y-%m-%d")
            .map_err(|_| ScenarioError::BadDate(self.start_date.clone()))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.bot_count == 0 {
            return Err(ScenarioError::NoBots);
        }
        if self.weight_rounds.is_empty() {
            return Err(ScenarioError::NoRounds);
        }
        if let Some(&w) = self
            .weight_rounds
            .iter()
            .find(|&&w| w == 0 || w > WEIGHT_SCALE)
        {
            return Err(ScenarioError::BadWeight(w));
        }
        let [lo, hi] = self.daily_tx_range;
        if lo > hi {
            return Err(ScenarioError::BadTxRange(lo, hi));
        }
        if !(self.initial_price.is_finite() && self.initial_price > 0.0) {
            return Err(ScenarioError::BadPrice);
        }
        if self.initial_supply.is_zero() {
            return Err(ScenarioError::NoSupply);
        }
        let d = &self.demand_process;
        for (name, value) in [
            ("demandProcess.buyProbability", d.buy_probability),
            ("demandProcess.sellFraction", d.sell_fraction),
            ("crossPopulationRate", self.cross_population_rate),
            ("underGasRate", self.under_gas_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ScenarioError::BadProbability { name, value });
            }
        }
        for (name, value) in [
            ("demandProcess.netBuyRate", d.net_buy_rate),
            ("gasPriceProcess.mean", self.gas_price_process.mean),
            ("gasPriceProcess.spread", self.gas_price_process.spread),
            ("gasLimitHeadroom", self.gas_limit_headroom),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScenarioError::BadRate { name, value });
            }
        }
        let mut names: Vec<_> = self.credits.iter().collect();
        names.sort();
        names.dedup();
        if names.is_empty()
            || names.len() != self.credits.len()
            || names.iter().any(|n| n.is_empty() || n.as_str() == crate::ledger::MAIN_CREDIT)
        {
            return Err(ScenarioError::BadCredits);
        }
        let m = &self.tx_mix;
        let parts = [m.transfer, m.market_trade, m.swap_step];
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || parts.iter().sum::<f64>() <= 0.0 {
            return Err(ScenarioError::BadMix);
        }
        self.start()?;
        Ok(())
    }
}
