//! Hashed-timelock atomic swaps.
//!
//! Each leg is a [`SwapContract`] escrowing one credit under a SHA-256
//! hashlock. The initiator locks first with timelock `t0 + 2D`; the
//! participant locks the counter-asset under the same hashlock with the
//! shorter timelock `t0 + D`. The initiator redeems the participant's leg,
//! which publishes the preimage; the participant then redeems the
//! initiator's leg with it. Unredeemed legs are refundable to their escrower
//! once the chain reaches their timelock.
//!
//! Redeem is allowed strictly before the timelock height, refund at or after.
//! Every step is a ledger transaction of kind [`TxKind::SwapStep`].

pub mod checker;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::address::{Address, Hash32};
use crate::amount::Amount;
use crate::ledger::{CreditUnitId, Ledger, LedgerError, Receipt, RevertReason, Transaction, TxKind};

pub use checker::{check_atomicity, explore, CheckReport, CheckerConfig, Step, Verdict};

/// 32-byte hashlock preimage.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Secret(pub [u8; 32]);

impl Secret {
    pub fn derive(label: &str) -> Self {
        Secret(Hash32::sha256(label.as_bytes()).0)
    }

    pub fn hashlock(&self) -> Hash32 {
        Hash32::sha256(&self.0)
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Secret(0x{})", hex::encode(self.0))
    }
}

impl Serialize for Secret {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&format_args!("0x{}", hex::encode(self.0)))
    }
}

impl<'de> Deserialize<'de> for Secret {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Hash32::from_str(&s)
            .map(|h| Secret(h.0))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapState {
    Initiated,
    Redeemed,
    Refunded,
}

/// One escrowed leg. `initiator` is whoever locked the funds and may refund
/// them; `participant` is the counterparty allowed to redeem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SwapContract {
    pub id: Hash32,
    pub initiator: Address,
    pub participant: Address,
    pub credit: CreditUnitId,
    pub value: Amount,
    pub hashlock: Hash32,
    pub timelock: u64,
    pub state: SwapState,
    pub revealed_preimage: Option<Secret>,
    /// Height of the block that publishes the preimage.
    pub revealed_at: Option<u64>,
}

impl SwapContract {
    pub fn is_open(&self) -> bool {
        self.state == SwapState::Initiated
    }
}

/// Payload of a swap-step transaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum SwapCall {
    /// Escrow the transaction's value for its `to` address.
    #[serde(rename_all = "camelCase")]
    Lock {
        hashlock: Hash32,
        timelock: u64,
        /// When set, `timelock` must be strictly below it.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        must_precede: Option<u64>,
    },
    Redeem { contract: Hash32, preimage: Secret },
    Refund { contract: Hash32 },
}

impl SwapCall {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("swap call serializes")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwapError {
    #[error("{address} holds {available} of {credit}, needs {required}")]
    InsufficientBalance {
        address: Address,
        credit: CreditUnitId,
        available: Amount,
        required: Amount,
    },
    #[error("timelock {timelock} is not after the current height {height}")]
    TimelockInPast { timelock: u64, height: u64 },
    #[error("timelock {timelock} must be below the initiator's timelock {limit}")]
    TimelockOrderingViolated { timelock: u64, limit: u64 },
    #[error("preimage does not match the hashlock")]
    WrongPreimage,
    #[error("contract expired at height {timelock} (current {height})")]
    Expired { timelock: u64, height: u64 },
    #[error("{0} may not settle this contract")]
    WrongClaimant(Address),
    #[error("contract already {0:?}")]
    AlreadySettled(SwapState),
    #[error("refund opens at height {timelock} (current {height})")]
    NotYetExpired { timelock: u64, height: u64 },
    #[error("unknown contract {0}")]
    UnknownContract(Hash32),
    #[error("transaction rejected: {0}")]
    Rejected(LedgerError),
    #[error("transaction reverted: {0}")]
    Reverted(String),
}

/// Applies a decoded swap step inside ledger execution. Checks everything
/// before touching state.
pub(crate) fn apply(
    ledger: &mut Ledger,
    tx: &Transaction,
    call: SwapCall,
) -> Result<SwapContract, SwapError> {
    let height = ledger.height();
    match call {
        SwapCall::Lock {
            hashlock,
            timelock,
            must_precede,
        } => {
            if timelock <= height {
                return Err(SwapError::TimelockInPast { timelock, height });
            }
            if let Some(limit) = must_precede {
                if timelock >= limit {
                    return Err(SwapError::TimelockOrderingViolated { timelock, limit });
                }
            }
            let available = ledger.balance(&tx.from, &tx.credit);
            if available < tx.value {
                return Err(SwapError::InsufficientBalance {
                    address: tx.from,
                    credit: tx.credit.clone(),
                    available,
                    required: tx.value,
                });
            }
            ledger
                .debit(tx.from, &tx.credit, tx.value)
                .map_err(SwapError::Rejected)?;
            let contract = SwapContract {
                id: tx.id(),
                initiator: tx.from,
                participant: tx.to,
                credit: tx.credit.clone(),
                value: tx.value,
                hashlock,
                timelock,
                state: SwapState::Initiated,
                revealed_preimage: None,
                revealed_at: None,
            };
            ledger.contracts_mut().insert(contract.id, contract.clone());
            Ok(contract)
        }
        SwapCall::Redeem { contract, preimage } => {
            let c = open_contract(ledger, &contract)?;
            if tx.from != c.participant {
                return Err(SwapError::WrongClaimant(tx.from));
            }
            if height >= c.timelock {
                return Err(SwapError::Expired {
                    timelock: c.timelock,
                    height,
                });
            }
            if preimage.hashlock() != c.hashlock {
                return Err(SwapError::WrongPreimage);
            }
            settle(ledger, &contract, tx.from, |c| {
                c.state = SwapState::Redeemed;
                c.revealed_preimage = Some(preimage);
                c.revealed_at = Some(height + 1);
            })
        }
        SwapCall::Refund { contract } => {
            let c = open_contract(ledger, &contract)?;
            if tx.from != c.initiator {
                return Err(SwapError::WrongClaimant(tx.from));
            }
            if height < c.timelock {
                return Err(SwapError::NotYetExpired {
                    timelock: c.timelock,
                    height,
                });
            }
            settle(ledger, &contract, tx.from, |c| c.state = SwapState::Refunded)
        }
    }
}

fn open_contract<'a>(ledger: &'a Ledger, id: &Hash32) -> Result<&'a SwapContract, SwapError> {
    let c = ledger
        .contract(id)
        .ok_or(SwapError::UnknownContract(*id))?;
    if !c.is_open() {
        return Err(SwapError::AlreadySettled(c.state));
    }
    Ok(c)
}

fn settle(
    ledger: &mut Ledger,
    id: &Hash32,
    payee: Address,
    mark: impl FnOnce(&mut SwapContract),
) -> Result<SwapContract, SwapError> {
    let c = ledger.contracts_mut().get_mut(id).expect("checked open");
    mark(c);
    let settled = c.clone();
    ledger
        .credit_to(payee, &settled.credit, settled.value)
        .map_err(SwapError::Rejected)?;
    Ok(settled)
}

fn submit(
    ledger: &mut Ledger,
    from: Address,
    to: Address,
    credit: CreditUnitId,
    value: Amount,
    call: &SwapCall,
) -> Result<(Receipt, SwapContract), SwapError> {
    let tx = ledger.build_tx(from, to, credit, value, TxKind::SwapStep, call.encode());
    let exec = ledger.execute_detailed(tx).map_err(SwapError::Rejected)?;
    match exec.outcome {
        Ok(crate::ledger::Effect::Swap(c)) => Ok((exec.receipt, c)),
        Ok(other) => unreachable!("swap step produced {other:?}"),
        Err(RevertReason::Swap(e)) => Err(e),
        Err(e) => Err(SwapError::Reverted(e.to_string())),
    }
}

/// Locks `value` of `credit` for `participant` under `sha256(secret)`.
pub fn initiate(
    ledger: &mut Ledger,
    initiator: Address,
    participant: Address,
    credit: &CreditUnitId,
    value: Amount,
    secret: &Secret,
    timelock: u64,
) -> Result<SwapContract, SwapError> {
    let call = SwapCall::Lock {
        hashlock: secret.hashlock(),
        timelock,
        must_precede: None,
    };
    submit(ledger, initiator, participant, credit.clone(), value, &call).map(|(_, c)| c)
}

/// Locks the counter-asset under an existing hashlock. When the initiator's
/// timelock is known, the new timelock must be strictly below it.
#[allow(clippy::too_many_arguments)]
pub fn participate(
    ledger: &mut Ledger,
    participant: Address,
    initiator: Address,
    credit: &CreditUnitId,
    value: Amount,
    hashlock: Hash32,
    timelock: u64,
    initiator_timelock: Option<u64>,
) -> Result<SwapContract, SwapError> {
    let call = SwapCall::Lock {
        hashlock,
        timelock,
        must_precede: initiator_timelock,
    };
    submit(ledger, participant, initiator, credit.clone(), value, &call).map(|(_, c)| c)
}

pub fn redeem(
    ledger: &mut Ledger,
    contract: &Hash32,
    claimant: Address,
    preimage: &Secret,
) -> Result<Receipt, SwapError> {
    let c = ledger
        .contract(contract)
        .ok_or(SwapError::UnknownContract(*contract))?;
    let (to, credit) = (c.initiator, c.credit.clone());
    let call = SwapCall::Redeem {
        contract: *contract,
        preimage: *preimage,
    };
    submit(ledger, claimant, to, credit, Amount::ZERO, &call).map(|(r, _)| r)
}

pub fn refund(ledger: &mut Ledger, contract: &Hash32, claimant: Address) -> Result<Receipt, SwapError> {
    let c = ledger
        .contract(contract)
        .ok_or(SwapError::UnknownContract(*contract))?;
    let (to, credit) = (c.participant, c.credit.clone());
    let call = SwapCall::Refund {
        contract: *contract,
    };
    submit(ledger, claimant, to, credit, Amount::ZERO, &call).map(|(r, _)| r)
}

/// Timelocks for a session started at height `t0` with safety margin `delta`:
/// `(initiator leg, participant leg) = (t0 + 2D, t0 + D)`.
pub fn session_timelocks(t0: u64, delta: u64) -> (u64, u64) {
    (t0 + 2 * delta, t0 + delta)
}

/// The two legs of one exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapSession {
    pub leg_a: SwapContract,
    pub leg_b: SwapContract,
}

impl SwapSession {
    pub fn new(leg_a: SwapContract, leg_b: SwapContract) -> Result<Self, SwapError> {
        if leg_b.timelock >= leg_a.timelock {
            return Err(SwapError::TimelockOrderingViolated {
                timelock: leg_b.timelock,
                limit: leg_a.timelock,
            });
        }
        if leg_a.hashlock != leg_b.hashlock {
            return Err(SwapError::WrongPreimage);
        }
        Ok(SwapSession { leg_a, leg_b })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEntry {
    pub block_height: u64,
    pub contract_id: Hash32,
    pub operation: String,
    pub outcome: String,
}

pub const AUDIT_LOG_HEADER: [&str; 4] = ["blockHeight", "contractId", "operation", "outcome"];

pub fn write_audit_log<W: Write>(out: W, entries: &[AuditEntry]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AUDIT_LOG_HEADER)?;
    for e in entries {
        w.write_record([
            e.block_height.to_string(),
            e.contract_id.to_string(),
            e.operation.clone(),
            e.outcome.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Result of [`run_happy_path`].
#[derive(Debug, Clone)]
pub struct Demo {
    pub ledger: Ledger,
    pub alice: Address,
    pub bob: Address,
    pub credit_a: CreditUnitId,
    pub credit_b: CreditUnitId,
    pub log: Vec<AuditEntry>,
}

/// Alice trades 100 of her credit for 80 of Bob's: initiate, participate,
/// Alice redeems Bob's leg, Bob redeems Alice's leg with the published secret.
/// The schedule needs `delta >= 2`; smaller values are raised to 2.
pub fn run_happy_path(delta: u64) -> Result<Demo, SwapError> {
    let mut ledger = Ledger::default();
    let (alice, bob) = (Address::derive("alice"), Address::derive("bob"));
    let credit_a = ledger
        .register_credit("alice-credit", Amount::from_credits(100), alice)
        .map_err(SwapError::Rejected)?;
    let credit_b = ledger
        .register_credit("bob-credit", Amount::from_credits(80), bob)
        .map_err(SwapError::Rejected)?;
    let secret = Secret::derive("swap-demo");
    let (lock_a, lock_b) = session_timelocks(ledger.height(), delta.max(2));
    let mut log = Vec::new();
    let mut record = |ledger: &Ledger, c: &Hash32, op: &str, outcome: &str| {
        log.push(AuditEntry {
            block_height: ledger.height(),
            contract_id: *c,
            operation: op.to_string(),
            outcome: outcome.to_string(),
        })
    };

    let leg_a = initiate(
        &mut ledger,
        alice,
        bob,
        &credit_a,
        Amount::from_credits(100),
        &secret,
        lock_a,
    )?;
    record(&ledger, &leg_a.id, "initiate", "Initiated");

    let leg_b = participate(
        &mut ledger,
        bob,
        alice,
        &credit_b,
        Amount::from_credits(80),
        leg_a.hashlock,
        lock_b,
        Some(leg_a.timelock),
    )?;
    record(&ledger, &leg_b.id, "participate", "Initiated");
    let session = SwapSession::new(leg_a, leg_b)?;
    ledger.seal_block(1).map_err(SwapError::Rejected)?;

    redeem(&mut ledger, &session.leg_b.id, alice, &secret)?;
    record(&ledger, &session.leg_b.id, "redeem", "Redeemed");
    ledger.seal_block(2).map_err(SwapError::Rejected)?;

    let published = ledger
        .contract(&session.leg_b.id)
        .and_then(|c| c.revealed_preimage)
        .expect("redeem publishes the preimage");
    redeem(&mut ledger, &session.leg_a.id, bob, &published)?;
    record(&ledger, &session.leg_a.id, "redeem", "Redeemed");
    ledger.seal_block(3).map_err(SwapError::Rejected)?;

    Ok(Demo {
        ledger,
        alice,
        bob,
        credit_a,
        credit_b,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixture {
        ledger: Ledger,
        alice: Address,
        bob: Address,
        a: CreditUnitId,
        b: CreditUnitId,
        secret: Secret,
    }

    fn fixture() -> Fixture {
        let mut ledger = Ledger::default();
        let (alice, bob) = (Address::derive("alice"), Address::derive("bob"));
        let a = ledger.register_credit("a", Amount::from_credits(10), alice).unwrap();
        let b = ledger.register_credit("b", Amount::from_credits(10), bob).unwrap();
        Fixture {
            ledger,
            alice,
            bob,
            a,
            b,
            secret: Secret::derive("s"),
        }
    }

    #[test]
    fn initiate_escrows_value() {
        let mut f = fixture();
        let c = initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::from_credits(4), &f.secret, 4).unwrap();
        assert_eq!(c.state, SwapState::Initiated);
        assert_eq!(c.hashlock, f.secret.hashlock());
        assert_eq!(f.ledger.balance(&f.alice, &f.a), Amount::from_credits(6));
        assert_eq!(f.ledger.circulating(&f.a), Amount::from_credits(10));

        let zero = initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::ZERO, &f.secret, 4).unwrap();
        assert_eq!(zero.value, Amount::ZERO);
    }

    #[test]
    fn initiate_errors() {
        let mut f = fixture();
        let h = f.ledger.height();
        assert!(matches!(
            initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::from_credits(1), &f.secret, h),
            Err(SwapError::TimelockInPast { .. })
        ));
        assert!(matches!(
            initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::from_credits(11), &f.secret, 5),
            Err(SwapError::InsufficientBalance { .. })
        ));
    }

    #[test]
    fn participate_checks_ordering() {
        let mut f = fixture();
        let leg_a = initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::from_credits(1), &f.secret, 4).unwrap();
        assert!(matches!(
            participate(&mut f.ledger, f.bob, f.alice, &f.b, Amount::from_credits(1), leg_a.hashlock, 4, Some(leg_a.timelock)),
            Err(SwapError::TimelockOrderingViolated { .. })
        ));
        let leg_b = participate(&mut f.ledger, f.bob, f.alice, &f.b, Amount::from_credits(1), leg_a.hashlock, 2, Some(leg_a.timelock)).unwrap();
        assert_eq!(leg_b.hashlock, leg_a.hashlock);
        // Unknown hashlock and no reference leg: still a valid contract.
        let other = participate(&mut f.ledger, f.bob, f.alice, &f.b, Amount::from_credits(1), Hash32([7; 32]), 9, None).unwrap();
        assert!(other.is_open());
    }

    #[test]
    fn redeem_boundaries() {
        let mut f = fixture();
        let c = initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::from_credits(3), &f.secret, 2).unwrap();
        assert_eq!(
            redeem(&mut f.ledger, &c.id, f.bob, &Secret([0; 32])),
            Err(SwapError::WrongPreimage)
        );
        assert!(f.ledger.contract(&c.id).unwrap().is_open());
        assert!(matches!(
            redeem(&mut f.ledger, &c.id, f.alice, &f.secret),
            Err(SwapError::WrongClaimant(_))
        ));
        f.ledger.seal_block(1).unwrap();
        f.ledger.seal_block(2).unwrap();
        assert!(matches!(
            redeem(&mut f.ledger, &c.id, f.bob, &f.secret),
            Err(SwapError::Expired { timelock: 2, height: 2 })
        ));
    }

    #[test]
    fn redeem_before_timelock_pays_claimant() {
        let mut f = fixture();
        let c = initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::from_credits(3), &f.secret, 2).unwrap();
        f.ledger.seal_block(1).unwrap();
        redeem(&mut f.ledger, &c.id, f.bob, &f.secret).unwrap();
        let c = f.ledger.contract(&c.id).unwrap();
        assert_eq!(c.state, SwapState::Redeemed);
        assert_eq!(c.revealed_preimage, Some(f.secret));
        assert_eq!(c.revealed_at, Some(2));
        assert_eq!(f.ledger.balance(&f.bob, &f.a), Amount::from_credits(3));
        let id = c.id;
        assert_eq!(
            redeem(&mut f.ledger, &id, f.bob, &f.secret),
            Err(SwapError::AlreadySettled(SwapState::Redeemed))
        );
        assert_eq!(
            refund(&mut f.ledger, &id, f.alice),
            Err(SwapError::AlreadySettled(SwapState::Redeemed))
        );
    }

    #[test]
    fn refund_boundaries() {
        let mut f = fixture();
        let c = initiate(&mut f.ledger, f.alice, f.bob, &f.a, Amount::from_credits(3), &f.secret, 2).unwrap();
        f.ledger.seal_block(1).unwrap();
        assert!(matches!(
            refund(&mut f.ledger, &c.id, f.alice),
            Err(SwapError::NotYetExpired { .. })
        ));
        f.ledger.seal_block(2).unwrap();
        assert!(matches!(
            refund(&mut f.ledger, &c.id, f.bob),
            Err(SwapError::WrongClaimant(_))
        ));
        refund(&mut f.ledger, &c.id, f.alice).unwrap();
        assert_eq!(f.ledger.contract(&c.id).unwrap().state, SwapState::Refunded);
        assert_eq!(f.ledger.balance(&f.alice, &f.a), Amount::from_credits(10));
    }

    #[test]
    fn happy_path_ends_with_two_redeemed_legs() {
        let demo = run_happy_path(2).unwrap();
        let last_two: Vec<_> = demo.log.iter().rev().take(2).map(|e| e.outcome.as_str()).collect();
        assert_eq!(last_two, ["Redeemed", "Redeemed"]);
        assert_eq!(demo.ledger.balance(&demo.alice, &demo.credit_b), Amount::from_credits(80));
        assert_eq!(demo.ledger.balance(&demo.bob, &demo.credit_a), Amount::from_credits(100));
    }

    #[test]
    fn swap_steps_pay_gas() {
        let mut ledger = Ledger::new(Default::default(), 3);
        let (alice, bob) = (Address::derive("alice"), Address::derive("bob"));
        ledger.genesis_allocate(alice, Amount::from_credits(1)).unwrap();
        let a = ledger.register_credit("a", Amount::from_credits(1), alice).unwrap();
        initiate(&mut ledger, alice, bob, &a, Amount::from_credits(1), &Secret::derive("x"), 3).unwrap();
        let r = &ledger.history().last().unwrap().receipt;
        assert_eq!(r.gas_used, 45_000);
        assert_eq!(r.fee, Amount::from_micros(135_000));
    }

    #[test]
    fn audit_log_header() {
        let mut out = Vec::new();
        write_audit_log(&mut out, &[]).unwrap();
        assert_eq!(out, b"blockHeight,contractId,operation,outcome\n");
    }
}
