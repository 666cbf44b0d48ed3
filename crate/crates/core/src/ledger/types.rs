use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::address::{Address, Hash32};
use crate::amount::Amount;

/// Id of a registered credit: a lowercase 8-4-4-4-12 UUID, or the reserved
/// symbol `proofware` for the main credit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CreditUnitId(String);

pub const MAIN_CREDIT: &str = "proofware";

impl CreditUnitId {
    pub fn new(id: impl Into<String>) -> Self {
        CreditUnitId(id.into())
    }

    pub fn main() -> Self {
        CreditUnitId(MAIN_CREDIT.to_string())
    }

    pub fn is_main(&self) -> bool {
        self.0 == MAIN_CREDIT
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Deterministic UUID-shaped id for the `seq`-th registration of `name`.
    pub(crate) fn generate(name: &str, seq: u64) -> Self {
        let digest: [u8; 32] = Sha256::digest(format!("credit/{seq}/{name}").as_bytes()).into();
        let mut bytes = [0u8; 16];
        bytes.copy_from_slice(&digest[..16]);
        CreditUnitId(
            uuid::Builder::from_random_bytes(bytes)
                .into_uuid()
                .to_string(),
        )
    }

    /// True for lowercase hyphenated UUIDs.
    pub fn is_well_formed_uuid(s: &str) -> bool {
        s.len() == 36
            && uuid::Uuid::try_parse(s).is_ok()
            && s.bytes().all(|b| !b.is_ascii_uppercase())
            && s.as_bytes()[8] == b'-'
    }
}

impl fmt::Display for CreditUnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CreditUnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TxKind {
    Transfer,
    MarketTrade,
    SwapStep,
}

/// Gas units charged per transaction kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GasSchedule {
    pub transfer: u64,
    pub market_trade: u64,
    pub swap_step: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        GasSchedule {
            transfer: 21_000,
            market_trade: 60_000,
            swap_step: 45_000,
        }
    }
}

impl GasSchedule {
    pub fn cost(&self, kind: TxKind) -> u64 {
        match kind {
            TxKind::Transfer => self.transfer,
            TxKind::MarketTrade => self.market_trade,
            TxKind::SwapStep => self.swap_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Transaction {
    pub from: Address,
    pub to: Address,
    pub credit: CreditUnitId,
    pub value: Amount,
    pub nonce: u64,
    pub gas_limit: u64,
    /// Main-credit micro-units per gas unit.
    pub gas_price: u128,
    pub kind: TxKind,
    #[serde(with = "hex_bytes")]
    pub payload: Vec<u8>,
}

impl Transaction {
    pub fn id(&self) -> Hash32 {
        let bytes = serde_json::to_vec(self).expect("transaction serializes");
        Hash32::sha256(&bytes)
    }

    /// Largest fee this transaction can be charged.
    pub fn fee_cap(&self) -> Option<u128> {
        (self.gas_limit as u128).checked_mul(self.gas_price)
    }
}

mod hex_bytes {
    use super::*;

    pub fn serialize<S: Serializer>(bytes: &[u8], serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&format_args!("0x{}", hex::encode(bytes)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(deserializer)?;
        let body = s.strip_prefix("0x").unwrap_or(&s);
        hex::decode(body).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TxStatus {
    Success,
    Reverted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Receipt {
    pub tx_id: Hash32,
    pub gas_used: u64,
    pub fee: Amount,
    pub block_height: u64,
    pub status: TxStatus,
}

impl Receipt {
    pub fn succeeded(&self) -> bool {
        self.status == TxStatus::Success
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Block {
    pub height: u64,
    /// Logical hours since scenario start.
    pub timestamp: u64,
    pub tx_ids: Vec<Hash32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreditInfo {
    pub id: CreditUnitId,
    pub name: String,
    pub owner: Address,
    pub total_supply: Amount,
}

/// A transaction together with its receipt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutedTx {
    pub tx: Transaction,
    pub receipt: Receipt,
}

/// Payload of a [`TxKind::MarketTrade`] transaction. The transaction's
/// `credit` and `value` name the input side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum MarketCall {
    Buy { credit: CreditUnitId },
    Sell { credit: CreditUnitId },
    Convert { from: CreditUnitId, to: CreditUnitId },
}

impl MarketCall {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("market call serializes")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// Credit the caller pays in.
    pub fn input_credit(&self) -> CreditUnitId {
        match self {
            MarketCall::Buy { .. } => CreditUnitId::main(),
            MarketCall::Sell { credit } => credit.clone(),
            MarketCall::Convert { from, .. } => from.clone(),
        }
    }

    pub fn output_credit(&self) -> CreditUnitId {
        match self {
            MarketCall::Buy { credit } => credit.clone(),
            MarketCall::Sell { .. } => CreditUnitId::main(),
            MarketCall::Convert { to, .. } => to.clone(),
        }
    }

    /// The application credit a trade is about, for grouping traders.
    pub fn app_credit(&self) -> CreditUnitId {
        match self {
            MarketCall::Buy { credit } | MarketCall::Sell { credit } => credit.clone(),
            MarketCall::Convert { from, .. } => from.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_ids_are_uuids() {
        let id = CreditUnitId::generate("ourtube", 1);
        assert!(CreditUnitId::is_well_formed_uuid(id.as_str()), "{id}");
        assert_ne!(id, CreditUnitId::generate("ourtube", 2));
        assert!(CreditUnitId::is_well_formed_uuid(
            "91f33e6a-b7bc-11e8-96f8-529269fb1459"
        ));
        assert!(!CreditUnitId::is_well_formed_uuid("proofware"));
        assert!(!CreditUnitId::is_well_formed_uuid(
            "91F33E6A-B7BC-11E8-96F8-529269FB1459"
        ));
    }

    #[test]
    fn market_call_payload_round_trips() {
        let call = MarketCall::Convert {
            from: CreditUnitId::new("a"),
            to: CreditUnitId::new("b"),
        };
        assert_eq!(MarketCall::decode(&call.encode()).unwrap(), call);
    }
}
