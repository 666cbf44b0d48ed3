//! Request and response bodies of the `/1.0/price`, `/1.0/swap` and
//! `/1.0/submit` endpoints, and the handlers behind them.
//!
//! Wire structs keep every field as the string that was sent, so a parsed
//! body re-renders byte-identically. Interpretation happens in the handlers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::amount::{Amount, MICROS_PER_CREDIT};
use crate::ledger::{
    CreditUnitId, Ledger, LedgerError, MarketCall, Receipt, Transaction, TxKind, MAIN_CREDIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceRequest {
    #[serde(rename = "MainAppCredit")]
    pub main_app_credit: String,
    #[serde(rename = "fromAppCreditId")]
    pub from_app_credit_id: String,
    #[serde(rename = "toAppCreditId")]
    pub to_app_credit_id: String,
    pub amount: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceResponse {
    pub price: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SwapRequest {
    pub blockchain_type: String,
    pub from_app_credit_id: String,
    pub to_app_credit_id: String,
    pub amount: String,
    pub owner_address: String,
}

/// An unsigned market transaction. Numeric fields are 0x-prefixed hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UnsignedTxEnvelope {
    pub from: String,
    pub to: String,
    pub data: String,
    pub value: String,
    pub gas_price: String,
    pub nonce: String,
    pub gas_limit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapResponse {
    pub data: Vec<UnsignedTxEnvelope>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

/// Compact JSON in declaration order, the canonical rendering of every body.
pub fn render<T: Serialize>(body: &T) -> String {
    serde_json::to_string(body).expect("wire bodies serialize")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatewayError {
    pub code: &'static str,
    pub message: String,
}

impl GatewayError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        GatewayError {
            code,
            message: message.into(),
        }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new("malformed-request", message)
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: ErrorDetail {
                code: self.code.to_string(),
                message: self.message.clone(),
            },
        }
    }

    /// HTTP status an endpoint answers this error with.
    pub fn status(&self) -> u16 {
        match self.code {
            "unknown-credit" | "unknown-owner" => 404,
            "bad-nonce" => 409,
            "malformed-request" | "malformed-amount" | "malformed-address" | "malformed-envelope"
            | "unsupported-chain" => 400,
            _ => 422,
        }
    }
}

impl fmt::Display for GatewayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for GatewayError {}

impl From<LedgerError> for GatewayError {
    fn from(e: LedgerError) -> Self {
        let code = match &e {
            LedgerError::UnknownCredit(_) => "unknown-credit",
            LedgerError::BadNonce { .. } => "bad-nonce",
            LedgerError::InsufficientBalance { .. } => "insufficient-balance",
            LedgerError::CannotAffordGasCap { .. } => "cannot-afford-gas",
            LedgerError::Market(_) => "market-error",
            _ => "ledger-error",
        };
        GatewayError::new(code, e.to_string())
    }
}

fn parse_amount(s: &str) -> Result<Amount, GatewayError> {
    let amount = Amount::parse_micros(s)
        .map_err(|e| GatewayError::new("malformed-amount", e.to_string()))?;
    if amount.is_zero() {
        return Err(GatewayError::new("malformed-amount", "amount must be positive"));
    }
    Ok(amount)
}

fn known_credit(ledger: &Ledger, id: &str) -> Result<CreditUnitId, GatewayError> {
    let id = CreditUnitId::new(id);
    if ledger.credit(&id).is_none() {
        return Err(GatewayError::new("unknown-credit", format!("unknown credit {id}")));
    }
    Ok(id)
}

fn parse_address(s: &str) -> Result<Address, GatewayError> {
    s.parse()
        .map_err(|e| GatewayError::new("malformed-address", format!("{s}: {e}")))
}

/// Parses a 0x-prefixed hex quantity.
pub fn parse_hex_quantity(s: &str) -> Result<u128, GatewayError> {
    let digits = s
        .strip_prefix("0x")
        .filter(|d| !d.is_empty())
        .ok_or_else(|| GatewayError::new("malformed-envelope", format!("`{s}` is not 0x-hex")))?;
    u128::from_str_radix(digits, 16)
        .map_err(|e| GatewayError::new("malformed-envelope", format!("`{s}`: {e}")))
}

pub fn hex_quantity(v: u128) -> String {
    format!("0x{v:x}")
}

fn market_call(from: CreditUnitId, to: CreditUnitId) -> MarketCall {
    if from.is_main() {
        MarketCall::Buy { credit: to }
    } else if to.is_main() {
        MarketCall::Sell { credit: from }
    } else {
        MarketCall::Convert { from, to }
    }
}

/// Micro-units of `to` received per whole unit of `from`, at the average
/// rate of converting `amount` against the current adaptor states.
pub fn handle_price(ledger: &Ledger, req: &PriceRequest) -> Result<PriceResponse, GatewayError> {
    if req.main_app_credit != MAIN_CREDIT {
        return Err(GatewayError::new(
            "unsupported-chain",
            format!("main credit must be `{MAIN_CREDIT}`"),
        ));
    }
    let amount = parse_amount(&req.amount)?;
    let from = known_credit(ledger, &req.from_app_credit_id)?;
    let to = known_credit(ledger, &req.to_app_credit_id)?;
    let quote = ledger.quote_conversion(&from, &to, amount)?;
    let price = quote.output.micros() * MICROS_PER_CREDIT / amount.micros();
    Ok(PriceResponse {
        price: price.to_string(),
    })
}

/// Builds, without executing, the market transaction that converts
/// `amount` for the owner.
pub fn handle_swap(ledger: &Ledger, req: &SwapRequest) -> Result<SwapResponse, GatewayError> {
    if req.blockchain_type != MAIN_CREDIT {
        return Err(GatewayError::new(
            "unsupported-chain",
            format!("blockchainType must be `{MAIN_CREDIT}`"),
        ));
    }
    let owner = parse_address(&req.owner_address)?;
    if !ledger.is_known(&owner) {
        return Err(GatewayError::new("unknown-owner", format!("no account {owner}")));
    }
    let amount = parse_amount(&req.amount)?;
    let from = known_credit(ledger, &req.from_app_credit_id)?;
    let to = known_credit(ledger, &req.to_app_credit_id)?;
    let call = market_call(from.clone(), to);
    let tx = ledger.build_tx(
        owner,
        Address::market(),
        from,
        amount,
        TxKind::MarketTrade,
        call.encode(),
    );
    Ok(SwapResponse {
        data: vec![envelope(&tx)],
    })
}

pub fn envelope(tx: &Transaction) -> UnsignedTxEnvelope {
    UnsignedTxEnvelope {
        from: tx.from.to_string(),
        to: tx.to.to_string(),
        data: format!("0x{}", hex::encode(&tx.payload)),
        value: hex_quantity(tx.value.micros()),
        gas_price: hex_quantity(tx.gas_price),
        nonce: hex_quantity(tx.nonce as u128),
        gas_limit: hex_quantity(tx.gas_limit as u128),
    }
}

/// Decodes an envelope into the transaction it describes. Empty data is a
/// main-credit transfer; anything else must be a market call.
pub fn decode_envelope(env: &UnsignedTxEnvelope) -> Result<Transaction, GatewayError> {
    let bytes = env
        .data
        .strip_prefix("0x")
        .and_then(|d| hex::decode(d).ok())
        .ok_or_else(|| GatewayError::new("malformed-envelope", "data is not 0x-hex bytes"))?;
    let (kind, credit) = if bytes.is_empty() {
        (TxKind::Transfer, CreditUnitId::main())
    } else {
        let call = MarketCall::decode(&bytes)
            .map_err(|e| GatewayError::new("malformed-envelope", format!("data: {e}")))?;
        (TxKind::MarketTrade, call.input_credit())
    };
    let narrow = |field: &str, v: u128| {
        u64::try_from(v).map_err(|_| GatewayError::new("malformed-envelope", format!("{field} too large")))
    };
    Ok(Transaction {
        from: parse_address(&env.from)?,
        to: parse_address(&env.to)?,
        credit,
        value: Amount::from_micros(parse_hex_quantity(&env.value)?),
        nonce: narrow("nonce", parse_hex_quantity(&env.nonce)?)?,
        gas_limit: narrow("gasLimit", parse_hex_quantity(&env.gas_limit)?)?,
        gas_price: parse_hex_quantity(&env.gas_price)?,
        kind,
        payload: bytes,
    })
}

/// Executes an envelope returned by [`handle_swap`].
pub fn submit(ledger: &mut Ledger, env: &UnsignedTxEnvelope) -> Result<Receipt, GatewayError> {
    let tx = decode_envelope(env)?;
    Ok(ledger.execute(tx)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::AdaptorConfig;

    fn ledger() -> (Ledger, Address, CreditUnitId, CreditUnitId) {
        let mut l = Ledger::new(Default::default(), 3);
        let owner = Address::derive("owner");
        l.genesis_allocate(owner, Amount::from_credits(2_000_000_000)).unwrap();
        let mut ids = Vec::new();
        for name in ["ourtube", "ourstore"] {
            let cfg = AdaptorConfig {
                credit_name: name.into(),
                credit_id: None,
                initial_supply: Amount::from_credits(1_000_000_000),
                initial_price: 1.0,
                weight_ppm: 500_000,
            };
            ids.push(l.launch_credit(&cfg, owner).unwrap());
        }
        (l, owner, ids[0].clone(), ids[1].clone())
    }

    fn price(l: &Ledger, from: &CreditUnitId, to: &CreditUnitId, amount: &str) -> Result<String, GatewayError> {
        handle_price(
            l,
            &PriceRequest {
                main_app_credit: "proofware".into(),
                from_app_credit_id: from.to_string(),
                to_app_credit_id: to.to_string(),
                amount: amount.into(),
            },
        )
        .map(|r| r.price)
    }

    #[test]
    fn identity_and_twin_prices() {
        let (l, _, a, b) = ledger();
        assert_eq!(price(&l, &a, &a, "500").unwrap(), "1000000");
        let twin: u128 = price(&l, &a, &b, "100000000").unwrap().parse().unwrap();
        assert!(1_000_000 - twin <= 1, "{twin}");
    }

    #[test]
    fn price_errors() {
        let (l, _, a, _) = ledger();
        let ghost = CreditUnitId::new("00000000-0000-4000-8000-000000000000");
        assert_eq!(price(&l, &a, &ghost, "5").unwrap_err().code, "unknown-credit");
        assert_eq!(price(&l, &a, &a, "-5").unwrap_err().code, "malformed-amount");
        assert_eq!(price(&l, &a, &a, "0").unwrap_err().code, "malformed-amount");
    }

    #[test]
    fn swap_builds_without_mutating() {
        let (l, owner, a, b) = ledger();
        let before = l.snapshot_string();
        let req = SwapRequest {
            blockchain_type: "proofware".into(),
            from_app_credit_id: a.to_string(),
            to_app_credit_id: b.to_string(),
            amount: "500".into(),
            owner_address: owner.to_string(),
        };
        let resp = handle_swap(&l, &req).unwrap();
        assert_eq!(l.snapshot_string(), before);
        let env = &resp.data[0];
        assert_eq!(env.gas_limit, "0xea60");
        assert_eq!(env.nonce, "0x0");
        assert_eq!(env.value, "0x1f4");
        assert_eq!(env.gas_price, "0x3");
        assert_eq!(env.to, Address::market().to_string());

        let stranger = SwapRequest {
            owner_address: Address::derive("nobody").to_string(),
            ..req
        };
        assert_eq!(handle_swap(&l, &stranger).unwrap_err().code, "unknown-owner");
    }

    #[test]
    fn buy_submit_and_double_submit() {
        let (mut l, owner, a, _) = ledger();
        let req = SwapRequest {
            blockchain_type: "proofware".into(),
            from_app_credit_id: "proofware".into(),
            to_app_credit_id: a.to_string(),
            amount: "2000000".into(),
            owner_address: owner.to_string(),
        };
        let env = handle_swap(&l, &req).unwrap().data.remove(0);
        let expected = l
            .quote_conversion(&CreditUnitId::main(), &a, Amount::from_micros(2_000_000))
            .unwrap()
            .output;
        let held = l.balance(&owner, &a);
        let receipt = submit(&mut l, &env).unwrap();
        assert!(receipt.succeeded());
        assert_eq!(l.balance(&owner, &a), held.checked_add(expected).unwrap());
        assert_eq!(submit(&mut l, &env).unwrap_err().code, "bad-nonce");
    }

    #[test]
    fn hex_quantities() {
        assert_eq!(parse_hex_quantity("0x28587600").unwrap(), 676_886_016);
        assert_eq!(hex_quantity(0x8ab33), "0x8ab33");
        assert!(parse_hex_quantity("500").is_err());
        assert!(parse_hex_quantity("0x").is_err());
    }
}
