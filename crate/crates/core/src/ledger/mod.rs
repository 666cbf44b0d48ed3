//! In-memory multi-asset ledger with gas-metered execution.
//!
//! All state lives in one [`Ledger`] value; mutation goes through `&mut self`
//! so a single owner serializes writers. Cloning a ledger gives an
//! independent snapshot.
//!
//! Fees are always paid in the main credit. A transaction is charged
//! `gasUsed * gasPrice`, where `gasUsed` is the schedule cost of its kind,
//! or the whole `gasLimit` when the limit is too low (the transaction then
//! reverts). Reverted transactions still pay and still consume their nonce.

mod snapshot;
mod types;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

pub use snapshot::SnapshotError;
pub use types::{
    Block, CreditInfo, CreditUnitId, ExecutedTx, GasSchedule, MarketCall, Receipt, Transaction,
    TxKind, TxStatus, MAIN_CREDIT,
};

use crate::address::{Address, Hash32};
use crate::amount::Amount;
use crate::market::{self, ConversionQuote, CreditAdaptor, MarketError};
use crate::swap::{self, SwapCall, SwapContract, SwapError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("credit name must not be empty")]
    EmptyName,
    #[error("a credit named `{0}` is already registered")]
    DuplicateName(String),
    #[error("credit id `{0}` is already registered or reserved")]
    DuplicateId(CreditUnitId),
    #[error("credit id `{0}` is not a lowercase UUID")]
    InvalidCreditId(String),
    #[error("unknown credit {0}")]
    UnknownCredit(CreditUnitId),
    #[error("{address} holds {available} of {credit}, needs {required}")]
    InsufficientBalance {
        address: Address,
        credit: CreditUnitId,
        available: Amount,
        required: Amount,
    },
    #[error("bad nonce for {address}: expected {expected}, got {got}")]
    BadNonce {
        address: Address,
        expected: u64,
        got: u64,
    },
    #[error("{address} cannot prepay a gas cap of {cap} micro-units")]
    CannotAffordGasCap { address: Address, cap: u128 },
    #[error("gas limit must be positive")]
    ZeroGasLimit,
    #[error("block timestamp {got} precedes previous block timestamp {last}")]
    ClockRegression { last: u64, got: u64 },
    #[error("genesis allocations are closed after the first block")]
    GenesisClosed,
    #[error("credit {0} already has an adaptor")]
    AdaptorExists(CreditUnitId),
    #[error("amount overflow")]
    Overflow,
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Why a transaction reverted.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RevertReason {
    #[error("out of gas: needs {required}, limit {limit}")]
    OutOfGas { required: u64, limit: u64 },
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("input credit {got} does not match the payload's {expected}")]
    CreditMismatch {
        expected: CreditUnitId,
        got: CreditUnitId,
    },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Swap(#[from] SwapError),
}

impl From<MarketError> for RevertReason {
    fn from(e: MarketError) -> Self {
        RevertReason::Ledger(LedgerError::Market(e))
    }
}

/// State change made by a successful transaction.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Transfer,
    Trade(Box<ConversionQuote>),
    Swap(SwapContract),
}

/// Receipt plus the detailed outcome, which receipts do not carry.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub receipt: Receipt,
    pub outcome: Result<Effect, RevertReason>,
}

#[derive(Debug, Clone)]
pub struct Ledger {
    gas_schedule: GasSchedule,
    gas_price: u128,
    credits: BTreeMap<CreditUnitId, CreditInfo>,
    names: BTreeMap<String, CreditUnitId>,
    balances: BTreeMap<Address, BTreeMap<CreditUnitId, Amount>>,
    nonces: BTreeMap<Address, u64>,
    adaptors: BTreeMap<CreditUnitId, CreditAdaptor>,
    contracts: BTreeMap<Hash32, SwapContract>,
    blocks: Vec<Block>,
    pending: Vec<Hash32>,
    history: Vec<ExecutedTx>,
    by_id: HashMap<Hash32, usize>,
    registrations: u64,
}

impl Default for Ledger {
    fn default() -> Self {
        Ledger::new(GasSchedule::default(), 0)
    }
}

impl Ledger {
    /// Fresh ledger holding only the main credit and the genesis block.
    pub fn new(gas_schedule: GasSchedule, gas_price: u128) -> Self {
        let main = CreditUnitId::main();
        let mut credits = BTreeMap::new();
        credits.insert(
            main.clone(),
            CreditInfo {
                id: main.clone(),
                name: MAIN_CREDIT.to_string(),
                owner: Address::fee_sink(),
                total_supply: Amount::ZERO,
            },
        );
        let mut names = BTreeMap::new();
        names.insert(MAIN_CREDIT.to_string(), main);
        Ledger {
            gas_schedule,
            gas_price,
            credits,
            names,
            balances: BTreeMap::new(),
            nonces: BTreeMap::new(),
            adaptors: BTreeMap::new(),
            contracts: BTreeMap::new(),
            blocks: vec![Block {
                height: 0,
                timestamp: 0,
                tx_ids: Vec::new(),
            }],
            pending: Vec::new(),
            history: Vec::new(),
            by_id: HashMap::new(),
            registrations: 0,
        }
    }

    pub fn gas_schedule(&self) -> GasSchedule {
        self.gas_schedule
    }

    /// Gas price used by the convenience builders (`transfer`, swaps).
    pub fn gas_price(&self) -> u128 {
        self.gas_price
    }

    pub fn set_gas_price(&mut self, gas_price: u128) {
        self.gas_price = gas_price;
    }

    /// Height of the last sealed block.
    pub fn height(&self) -> u64 {
        self.last_block().height
    }

    pub fn last_block(&self) -> &Block {
        self.blocks.last().expect("genesis block exists")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn pending(&self) -> &[Hash32] {
        &self.pending
    }

    /// Every transaction executed by this ledger instance, in order.
    pub fn history(&self) -> &[ExecutedTx] {
        &self.history
    }

    pub fn executed(&self, tx_id: &Hash32) -> Option<&ExecutedTx> {
        self.by_id.get(tx_id).map(|&i| &self.history[i])
    }

    pub fn balance(&self, addr: &Address, credit: &CreditUnitId) -> Amount {
        self.balances
            .get(addr)
            .and_then(|m| m.get(credit))
            .copied()
            .unwrap_or(Amount::ZERO)
    }

    pub fn balances_of(&self, addr: &Address) -> impl Iterator<Item = (&CreditUnitId, &Amount)> {
        self.balances.get(addr).into_iter().flatten()
    }

    /// Next nonce expected from `addr`.
    pub fn nonce(&self, addr: &Address) -> u64 {
        self.nonces.get(addr).copied().unwrap_or(0)
    }

    /// An address is known once it has held a balance or sent a transaction.
    pub fn is_known(&self, addr: &Address) -> bool {
        self.balances.contains_key(addr) || self.nonces.contains_key(addr)
    }

    pub fn credit(&self, id: &CreditUnitId) -> Option<&CreditInfo> {
        self.credits.get(id)
    }

    pub fn credit_by_name(&self, name: &str) -> Option<&CreditUnitId> {
        self.names.get(name)
    }

    pub fn credits(&self) -> impl Iterator<Item = &CreditInfo> {
        self.credits.values()
    }

    pub fn adaptor(&self, credit: &CreditUnitId) -> Option<&CreditAdaptor> {
        self.adaptors.get(credit)
    }

    pub fn adaptors(&self) -> impl Iterator<Item = &CreditAdaptor> {
        self.adaptors.values()
    }

    pub fn contract(&self, id: &Hash32) -> Option<&SwapContract> {
        self.contracts.get(id)
    }

    pub fn contracts(&self) -> impl Iterator<Item = &SwapContract> {
        self.contracts.values()
    }

    /// Sum of every holding of `credit`: balances, adaptor reserves (for the
    /// main credit) and open swap escrows. Constant under execution.
    pub fn circulating(&self, credit: &CreditUnitId) -> Amount {
        let held: Amount = self
            .balances
            .values()
            .filter_map(|m| m.get(credit).copied())
            .sum();
        let reserves: Amount = if credit.is_main() {
            self.adaptors.values().map(|a| a.reserve_balance).sum()
        } else {
            Amount::ZERO
        };
        let escrow: Amount = self
            .contracts
            .values()
            .filter(|c| c.is_open() && &c.credit == credit)
            .map(|c| c.value)
            .sum();
        held.checked_add(reserves)
            .and_then(|a| a.checked_add(escrow))
            .expect("circulating supply fits")
    }

    /// Credits main credit to `addr` before the first block is sealed.
    pub fn genesis_allocate(&mut self, addr: Address, amount: Amount) -> Result<(), LedgerError> {
        if self.height() > 0 {
            return Err(LedgerError::GenesisClosed);
        }
        let main = CreditUnitId::main();
        self.credit_to(addr, &main, amount)?;
        let info = self.credits.get_mut(&main).expect("main credit registered");
        info.total_supply = info
            .total_supply
            .checked_add(amount)
            .ok_or(LedgerError::Overflow)?;
        Ok(())
    }

    /// Registers a new application credit and mints its initial supply to `owner`.
    pub fn register_credit(
        &mut self,
        name: &str,
        initial_supply: Amount,
        owner: Address,
    ) -> Result<CreditUnitId, LedgerError> {
        let mut seq = self.registrations;
        let id = loop {
            let id = CreditUnitId::generate(name, seq);
            if !self.credits.contains_key(&id) {
                break id;
            }
            seq += 1;
        };
        self.register_credit_with_id(name, id, initial_supply, owner)
    }

    /// As [`Ledger::register_credit`], with a caller-chosen UUID.
    pub fn register_credit_with_id(
        &mut self,
        name: &str,
        id: CreditUnitId,
        initial_supply: Amount,
        owner: Address,
    ) -> Result<CreditUnitId, LedgerError> {
        if name.is_empty() {
            return Err(LedgerError::EmptyName);
        }
        if self.names.contains_key(name) {
            return Err(LedgerError::DuplicateName(name.to_string()));
        }
        if !CreditUnitId::is_well_formed_uuid(id.as_str()) {
            return Err(LedgerError::InvalidCreditId(id.to_string()));
        }
        if self.credits.contains_key(&id) {
            return Err(LedgerError::DuplicateId(id));
        }
        self.registrations += 1;
        self.credits.insert(
            id.clone(),
            CreditInfo {
                id: id.clone(),
                name: name.to_string(),
                owner,
                total_supply: initial_supply,
            },
        );
        self.names.insert(name.to_string(), id.clone());
        self.credit_to(owner, &id, initial_supply)?;
        Ok(id)
    }

    /// Attaches a bonding-curve adaptor to a registered credit. The seeded
    /// reserve `P0 * S0 * W` is paid by `funder` in main credit, where `S0`
    /// is the credit's current total supply.
    pub fn launch_adaptor(
        &mut self,
        credit: &CreditUnitId,
        initial_price: f64,
        weight_ppm: u32,
        funder: Address,
    ) -> Result<CreditAdaptor, LedgerError> {
        let info = self
            .credits
            .get(credit)
            .filter(|_| !credit.is_main())
            .ok_or_else(|| LedgerError::UnknownCredit(credit.clone()))?;
        if self.adaptors.contains_key(credit) {
            return Err(LedgerError::AdaptorExists(credit.clone()));
        }
        let adaptor =
            CreditAdaptor::launch(credit.clone(), info.total_supply, initial_price, weight_ppm)?;
        self.debit(funder, &CreditUnitId::main(), adaptor.reserve_balance)?;
        self.adaptors.insert(credit.clone(), adaptor.clone());
        Ok(adaptor)
    }

    /// Registers a credit and launches its adaptor in one step.
    pub fn launch_credit(
        &mut self,
        config: &market::AdaptorConfig,
        owner: Address,
    ) -> Result<CreditUnitId, LedgerError> {
        let id = match &config.credit_id {
            Some(id) => self.register_credit_with_id(
                &config.credit_name,
                CreditUnitId::new(id.clone()),
                config.initial_supply,
                owner,
            )?,
            None => self.register_credit(&config.credit_name, config.initial_supply, owner)?,
        };
        self.launch_adaptor(&id, config.initial_price, config.weight_ppm, owner)?;
        Ok(id)
    }

    /// Builds a transaction from `from` with its next nonce and the ledger's
    /// gas price and schedule limit.
    pub fn build_tx(
        &self,
        from: Address,
        to: Address,
        credit: CreditUnitId,
        value: Amount,
        kind: TxKind,
        payload: Vec<u8>,
    ) -> Transaction {
        Transaction {
            from,
            to,
            credit,
            value,
            nonce: self.nonce(&from),
            gas_limit: self.gas_schedule.cost(kind),
            gas_price: self.gas_price,
            kind,
            payload,
        }
    }

    /// Moves `value` of `credit` and records the transaction for the next block.
    pub fn transfer(
        &mut self,
        from: Address,
        to: Address,
        credit: &CreditUnitId,
        value: Amount,
    ) -> Result<Transaction, LedgerError> {
        if !self.credits.contains_key(credit) {
            return Err(LedgerError::UnknownCredit(credit.clone()));
        }
        let tx = self.build_tx(from, to, credit.clone(), value, TxKind::Transfer, Vec::new());
        let mut required = value;
        if credit.is_main() {
            let cap = tx.fee_cap().ok_or(LedgerError::Overflow)?;
            required = required
                .checked_add(Amount::from_micros(cap))
                .ok_or(LedgerError::Overflow)?;
        }
        let available = self.balance(&from, credit);
        if available < required {
            return Err(LedgerError::InsufficientBalance {
                address: from,
                credit: credit.clone(),
                available,
                required,
            });
        }
        let exec = self.execute_detailed(tx.clone())?;
        match exec.outcome {
            Ok(_) => Ok(tx),
            Err(RevertReason::Ledger(e)) => Err(e),
            Err(e) => unreachable!("transfer prechecked but reverted: {e}"),
        }
    }

    /// Executes a transaction, returning only its receipt.
    pub fn execute(&mut self, tx: Transaction) -> Result<Receipt, LedgerError> {
        self.execute_detailed(tx).map(|e| e.receipt)
    }

    /// Executes a transaction. Errors mean the transaction was rejected
    /// outright (nothing recorded); reverts are reported in the outcome.
    pub fn execute_detailed(&mut self, tx: Transaction) -> Result<Execution, LedgerError> {
        let expected = self.nonce(&tx.from);
        if tx.nonce != expected {
            return Err(LedgerError::BadNonce {
                address: tx.from,
                expected,
                got: tx.nonce,
            });
        }
        if tx.gas_limit == 0 {
            return Err(LedgerError::ZeroGasLimit);
        }
        let main = CreditUnitId::main();
        let cap = tx.fee_cap().ok_or(LedgerError::CannotAffordGasCap {
            address: tx.from,
            cap: u128::MAX,
        })?;
        if self.balance(&tx.from, &main).micros() < cap {
            return Err(LedgerError::CannotAffordGasCap {
                address: tx.from,
                cap,
            });
        }

        let required = self.gas_schedule.cost(tx.kind);
        let gas_used = required.min(tx.gas_limit);
        let fee = Amount::from_micros(gas_used as u128 * tx.gas_price);
        self.debit(tx.from, &main, fee)?;
        self.credit_to(Address::fee_sink(), &main, fee)?;

        let outcome = if tx.gas_limit < required {
            Err(RevertReason::OutOfGas {
                required,
                limit: tx.gas_limit,
            })
        } else {
            self.apply(&tx)
        };
        *self.nonces.entry(tx.from).or_insert(0) += 1;

        let tx_id = tx.id();
        let receipt = Receipt {
            tx_id,
            gas_used,
            fee,
            block_height: self.height() + 1,
            status: if outcome.is_ok() {
                TxStatus::Success
            } else {
                TxStatus::Reverted
            },
        };
        self.pending.push(tx_id);
        self.by_id.insert(tx_id, self.history.len());
        self.history.push(ExecutedTx {
            tx,
            receipt: receipt.clone(),
        });
        Ok(Execution { receipt, outcome })
    }

    /// Closes the pending queue into a new block.
    pub fn seal_block(&mut self, timestamp: u64) -> Result<Block, LedgerError> {
        let last = self.last_block();
        if timestamp < last.timestamp {
            return Err(LedgerError::ClockRegression {
                last: last.timestamp,
                got: timestamp,
            });
        }
        let block = Block {
            height: last.height + 1,
            timestamp,
            tx_ids: std::mem::take(&mut self.pending),
        };
        self.blocks.push(block.clone());
        Ok(block)
    }

    /// Prices a conversion against current adaptor state without changing it.
    /// Either side may be the main credit; identical sides convert 1:1.
    pub fn quote_conversion(
        &self,
        from: &CreditUnitId,
        to: &CreditUnitId,
        amount: Amount,
    ) -> Result<ConversionQuote, LedgerError> {
        for id in [from, to] {
            if !self.credits.contains_key(id) {
                return Err(LedgerError::UnknownCredit(id.clone()));
            }
        }
        let adaptor = |id: &CreditUnitId| {
            self.adaptors
                .get(id)
                .ok_or_else(|| MarketError::UnknownAdaptor(id.clone()))
        };
        if from == to {
            return Ok(ConversionQuote {
                input: amount,
                output: amount,
                proceeds: Amount::ZERO,
                sell: None,
                buy: None,
            });
        }
        let quote = if from.is_main() {
            let q = market::buy(adaptor(to)?, amount)?;
            ConversionQuote {
                input: amount,
                output: q.output,
                proceeds: amount,
                sell: None,
                buy: Some(q),
            }
        } else if to.is_main() {
            let q = market::sell(adaptor(from)?, amount)?;
            ConversionQuote {
                input: amount,
                output: q.output,
                proceeds: q.output,
                sell: Some(q),
                buy: None,
            }
        } else {
            market::convert(adaptor(from)?, adaptor(to)?, amount)?
        };
        Ok(quote)
    }

    fn apply(&mut self, tx: &Transaction) -> Result<Effect, RevertReason> {
        match tx.kind {
            TxKind::Transfer => {
                if !self.credits.contains_key(&tx.credit) {
                    return Err(LedgerError::UnknownCredit(tx.credit.clone()).into());
                }
                self.debit(tx.from, &tx.credit, tx.value)?;
                self.credit_to(tx.to, &tx.credit, tx.value)?;
                Ok(Effect::Transfer)
            }
            TxKind::MarketTrade => {
                let call = MarketCall::decode(&tx.payload)
                    .map_err(|e| RevertReason::MalformedPayload(e.to_string()))?;
                self.apply_trade(tx, &call)
            }
            TxKind::SwapStep => {
                let call = SwapCall::decode(&tx.payload)
                    .map_err(|e| RevertReason::MalformedPayload(e.to_string()))?;
                let contract = swap::apply(self, tx, call)?;
                Ok(Effect::Swap(contract))
            }
        }
    }

    fn apply_trade(&mut self, tx: &Transaction, call: &MarketCall) -> Result<Effect, RevertReason> {
        let (input, output) = (call.input_credit(), call.output_credit());
        if tx.credit != input {
            return Err(RevertReason::CreditMismatch {
                expected: input,
                got: tx.credit.clone(),
            });
        }
        let quote = self.quote_conversion(&input, &output, tx.value)?;
        let available = self.balance(&tx.from, &input);
        if available < tx.value {
            return Err(LedgerError::InsufficientBalance {
                address: tx.from,
                credit: input,
                available,
                required: tx.value,
            }
            .into());
        }
        if input == output {
            return Ok(Effect::Trade(Box::new(quote)));
        }
        self.debit(tx.from, &input, tx.value)?;
        if let Some(sale) = &quote.sell {
            self.set_adaptor_state(sale.post_state.clone());
        }
        if let Some(purchase) = &quote.buy {
            self.set_adaptor_state(purchase.post_state.clone());
        }
        self.credit_to(tx.from, &output, quote.output)?;
        Ok(Effect::Trade(Box::new(quote)))
    }

    fn set_adaptor_state(&mut self, state: CreditAdaptor) {
        if let Some(info) = self.credits.get_mut(&state.credit) {
            info.total_supply = state.outstanding_supply;
        }
        self.adaptors.insert(state.credit.clone(), state);
    }

    pub(crate) fn debit(
        &mut self,
        addr: Address,
        credit: &CreditUnitId,
        amount: Amount,
    ) -> Result<(), LedgerError> {
        let available = self.balance(&addr, credit);
        let rest = available
            .checked_sub(amount)
            .ok_or_else(|| LedgerError::InsufficientBalance {
                address: addr,
                credit: credit.clone(),
                available,
                required: amount,
            })?;
        if amount.is_zero() {
            return Ok(());
        }
        self.balances
            .entry(addr)
            .or_default()
            .insert(credit.clone(), rest);
        Ok(())
    }

    pub(crate) fn credit_to(
        &mut self,
        addr: Address,
        credit: &CreditUnitId,
        amount: Amount,
    ) -> Result<(), LedgerError> {
        let slot = self
            .balances
            .entry(addr)
            .or_default()
            .entry(credit.clone())
            .or_insert(Amount::ZERO);
        *slot = slot.checked_add(amount).ok_or(LedgerError::Overflow)?;
        Ok(())
    }

    pub(crate) fn contracts_mut(&mut self) -> &mut BTreeMap<Hash32, SwapContract> {
        &mut self.contracts
    }
}
