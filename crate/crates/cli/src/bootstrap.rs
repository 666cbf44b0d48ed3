//! Building a starting ledger when no snapshot exists yet.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};
use proofware::amount::{self, Amount};
use proofware::market::AdaptorConfig;
use proofware::{Address, Ledger};
use serde::Deserialize;

/// Default gas price, in main-credit micro-units per gas unit.
pub const DEFAULT_GAS_PRICE: u128 = 20;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountSpec {
    /// A `0x` address or a label hashed into one.
    pub address: String,
    #[serde(with = "amount::as_credits")]
    pub balance: Amount,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BootstrapFile {
    #[serde(default)]
    pub gas_price: Option<u128>,
    #[serde(default, rename = "adaptor")]
    pub adaptors: Vec<AdaptorConfig>,
    #[serde(default, rename = "account")]
    pub accounts: Vec<AccountSpec>,
}

impl Default for BootstrapFile {
    fn default() -> Self {
        let adaptor = |name: &str, id: &str, weight_ppm| AdaptorConfig {
            credit_name: name.into(),
            credit_id: Some(id.into()),
            initial_supply: Amount::from_credits(500),
            initial_price: 1.0,
            weight_ppm,
        };
        let account = |address: &str| AccountSpec {
            address: address.into(),
            balance: Amount::from_credits(10_000),
        };
        BootstrapFile {
            gas_price: None,
            adaptors: vec![
                adaptor("ourtube", "91f33e6a-b7bc-11e8-96f8-529269fb1459", 500_000),
                adaptor("ourstore", "1f8d70bf-96d4-4996-ac19-2e154cd2531f", 800_000),
            ],
            accounts: vec![
                account("trader"),
                account("0x0788a4c4Ff559eCe29C0a670E0eD76cB3e626511"),
            ],
        }
    }
}

pub fn resolve_account(s: &str) -> Result<Address> {
    if s.starts_with("0x") {
        s.parse().with_context(|| format!("invalid address `{s}`"))
    } else {
        Ok(Address::derive(s))
    }
}

impl BootstrapFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid bootstrap file {}", path.display()))
    }

    /// Funds the accounts, then launches every adaptor with its reserve paid
    /// by the `developer` account.
    pub fn build(&self) -> Result<Ledger> {
        let mut ledger = Ledger::new(Default::default(), self.gas_price.unwrap_or(DEFAULT_GAS_PRICE));
        for a in &self.accounts {
            ledger.genesis_allocate(resolve_account(&a.address)?, a.balance)?;
        }
        let developer = Address::derive("developer");
        for cfg in &self.adaptors {
            let reserve = cfg.initial_supply.as_credits_f64() * cfg.initial_price * cfg.weight_ppm as f64 / 1e6;
            ledger.genesis_allocate(developer, Amount::from_credits(reserve.ceil() as u64 + 1))?;
            ledger
                .launch_credit(cfg, developer)
                .with_context(|| format!("cannot launch {}", cfg.credit_name))?;
        }
        ledger.seal_block(0)?;
        Ok(ledger)
    }
}

/// Loads the snapshot at `path`, or bootstraps from `config` (or the
/// built-in defaults) when it does not exist.
pub fn open_ledger(snapshot: Option<&Path>, config: Option<&Path>) -> Result<Ledger> {
    if let Some(path) = snapshot.filter(|p| p.exists()) {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        return Ledger::read_snapshot(BufReader::new(file))
            .with_context(|| format!("invalid snapshot {}", path.display()));
    }
    let file = match config {
        Some(path) => BootstrapFile::load(path)?,
        None => BootstrapFile::default(),
    };
    file.build()
}

pub fn save_ledger(ledger: &Ledger, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let file = File::create(&tmp).with_context(|| format!("cannot write {}", tmp.display()))?;
        ledger.write_snapshot(std::io::BufWriter::new(file))?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
