//! Bonding-curve credit adaptors.
//!
//! An adaptor holds a reserve `B` of main credit against an outstanding
//! supply `S` of one application credit, with a constant connector weight
//! `W = B / (P * S)`. Buying with a main-credit deposit `E` issues
//!
//! ```text
//! issued = S * ((1 + E / B)^W - 1)
//! ```
//!
//! and the inverse (required deposit for a target issue, or main credit
//! returned for a sale) follows from the same curve, so trades are
//! path independent: the state only depends on the net reserve moved.
//! Along any trade path the spot price obeys `P ∝ S^((1 - W) / W)`.
//!
//! Ledger amounts are exact micro-units. Curve evaluation runs in `f64` via
//! `ln_1p` / `exp_m1`, and results are rounded in the adaptor's favour:
//! issued and returned amounts round down, required deposits round up.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::{self, Amount};
use crate::ledger::CreditUnitId;

/// Parts-per-million denominator of [`CreditAdaptor::weight_ppm`].
pub const WEIGHT_SCALE: u32 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("adaptor for {0} has no reserve or no supply")]
    UninitializedAdaptor(CreditUnitId),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("weight {0} ppm outside 1..=1000000")]
    InvalidWeight(u32),
    #[error("price {0} must be finite and positive")]
    InvalidPrice(f64),
    #[error("trade result exceeds the amount range")]
    Overflow,
    #[error("cannot sell {tokens} from an outstanding supply of {supply}")]
    TokensExceedSupply { tokens: Amount, supply: Amount },
    #[error("no adaptor for credit {0}")]
    UnknownAdaptor(CreditUnitId),
}

/// Market state for one application credit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreditAdaptor {
    pub credit: CreditUnitId,
    /// Main credit held by the adaptor.
    pub reserve_balance: Amount,
    /// Application credit in circulation.
    pub outstanding_supply: Amount,
    pub weight_ppm: u32,
}

impl CreditAdaptor {
    pub fn new(
        credit: CreditUnitId,
        reserve_balance: Amount,
        outstanding_supply: Amount,
        weight_ppm: u32,
    ) -> Result<Self, MarketError> {
        check_weight(weight_ppm)?;
        Ok(CreditAdaptor {
            credit,
            reserve_balance,
            outstanding_supply,
            weight_ppm,
        })
    }

    /// Creates an adaptor at a chosen starting price. The reserve is seeded
    /// as `P0 * S0 * W` so the spot price equals `P0` at genesis.
    pub fn launch(
        credit: CreditUnitId,
        initial_supply: Amount,
        initial_price: f64,
        weight_ppm: u32,
    ) -> Result<Self, MarketError> {
        check_weight(weight_ppm)?;
        if !(initial_price.is_finite() && initial_price > 0.0) {
            return Err(MarketError::InvalidPrice(initial_price));
        }
        let weight = weight_ppm as f64 / WEIGHT_SCALE as f64;
        let reserve = (initial_supply.micros() as f64 * initial_price * weight).round();
        if !(reserve.is_finite() && reserve < u128::MAX as f64) {
            return Err(MarketError::Overflow);
        }
        let adaptor = CreditAdaptor {
            credit: credit.clone(),
            reserve_balance: Amount::from_micros(reserve as u128),
            outstanding_supply: initial_supply,
            weight_ppm,
        };
        if !adaptor.is_initialized() {
            return Err(MarketError::UninitializedAdaptor(credit));
        }
        Ok(adaptor)
    }

    pub fn weight(&self) -> f64 {
        self.weight_ppm as f64 / WEIGHT_SCALE as f64
    }

    pub fn is_initialized(&self) -> bool {
        !self.reserve_balance.is_zero() && !self.outstanding_supply.is_zero()
    }

    fn require_initialized(&self) -> Result<(), MarketError> {
        if self.is_initialized() {
            Ok(())
        } else {
            Err(MarketError::UninitializedAdaptor(self.credit.clone()))
        }
    }

    fn is_linear(&self) -> bool {
        self.weight_ppm == WEIGHT_SCALE
    }

    fn reserve_f(&self) -> f64 {
        self.reserve_balance.micros() as f64
    }

    fn supply_f(&self) -> f64 {
        self.outstanding_supply.micros() as f64
    }
}

fn check_weight(weight_ppm: u32) -> Result<(), MarketError> {
    if (1..=WEIGHT_SCALE).contains(&weight_ppm) {
        Ok(())
    } else {
        Err(MarketError::InvalidWeight(weight_ppm))
    }
}

/// Price and size of the main credit in an external numeraire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MainCreditStats {
    pub price: f64,
    pub total_units: Amount,
}

impl MainCreditStats {
    pub fn market_cap(&self) -> f64 {
        self.price * self.total_units.as_credits_f64()
    }

    /// Weight an adaptor holding `reserve` main credits has against this
    /// market cap.
    pub fn weight_of(&self, reserve: Amount) -> Result<f64, MarketError> {
        let cap = self.market_cap();
        if cap == 0.0 {
            return Err(MarketError::ZeroDenominator);
        }
        Ok(reserve.as_credits_f64() / cap)
    }
}

/// Closed-form curve functions on real-valued state, before any rounding.
/// Units cancel, so callers may pass credits or micro-units consistently.
pub mod curve {
    pub fn price(reserve: f64, supply: f64, weight: f64) -> f64 {
        reserve / (supply * weight)
    }

    /// `(1 + deposit / reserve)^weight - 1`
    pub fn supply_coefficient(reserve: f64, weight: f64, deposit: f64) -> f64 {
        (weight * (deposit / reserve).ln_1p()).exp_m1()
    }

    /// `(1 + issued / supply)^(1 / weight) - 1`
    pub fn payout_coefficient(supply: f64, weight: f64, issued: f64) -> f64 {
        ((issued / supply).ln_1p() / weight).exp_m1()
    }

    /// `1 - (1 - tokens / supply)^(1 / weight)`
    pub fn sale_coefficient(supply: f64, weight: f64, tokens: f64) -> f64 {
        -((-tokens / supply).ln_1p() / weight).exp_m1()
    }

    pub fn issued_for_deposit(reserve: f64, supply: f64, weight: f64, deposit: f64) -> f64 {
        supply * supply_coefficient(reserve, weight, deposit)
    }

    pub fn deposit_for_issued(reserve: f64, supply: f64, weight: f64, issued: f64) -> f64 {
        reserve * payout_coefficient(supply, weight, issued)
    }

    pub fn returned_for_sale(reserve: f64, supply: f64, weight: f64, tokens: f64) -> f64 {
        reserve * sale_coefficient(supply, weight, tokens)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TradeDirection {
    Buy,
    Sell,
    QuoteDeposit,
}

impl TradeDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            TradeDirection::Buy => "buy",
            TradeDirection::Sell => "sell",
            TradeDirection::QuoteDeposit => "quote-deposit",
        }
    }
}

/// Outcome of a curve computation against one adaptor.
///
/// `deposit` is always the main credit side of the trade and `issued` the
/// application credit side: for a sale, `deposit` is the main credit paid
/// out and `issued` the tokens burned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TradeQuote {
    pub direction: TradeDirection,
    pub input: Amount,
    pub output: Amount,
    pub coefficient: f64,
    pub pre_state: CreditAdaptor,
    pub post_state: CreditAdaptor,
    pub deposit: Amount,
    pub issued: Amount,
}

/// Sell on one adaptor, buy on another, with the main credit in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConversionQuote {
    pub input: Amount,
    pub output: Amount,
    /// Main credit released by the sale and deposited into the purchase.
    pub proceeds: Amount,
    pub sell: Option<TradeQuote>,
    pub buy: Option<TradeQuote>,
}

const ROUNDING_MARGIN: f64 = 4.0 * f64::EPSILON;

fn floor_to_amount(x: f64) -> Result<Amount, MarketError> {
    if x.is_nan() || x >= u128::MAX as f64 {
        return Err(MarketError::Overflow);
    }
    if x <= 0.0 {
        return Ok(Amount::ZERO);
    }
    Ok(Amount::from_micros((x * (1.0 - ROUNDING_MARGIN)).floor() as u128))
}

fn ceil_to_amount(x: f64) -> Result<Amount, MarketError> {
    if x.is_nan() || x >= u128::MAX as f64 {
        return Err(MarketError::Overflow);
    }
    if x <= 0.0 {
        return Ok(Amount::ZERO);
    }
    Ok(Amount::from_micros((x * (1.0 + ROUNDING_MARGIN)).ceil() as u128))
}

fn mul_div(a: Amount, b: Amount, c: Amount, round_up: bool) -> Result<Amount, MarketError> {
    if c.is_zero() {
        return Err(MarketError::ZeroDenominator);
    }
    let num = a
        .micros()
        .checked_mul(b.micros())
        .ok_or(MarketError::Overflow)?;
    let mut q = num / c.micros();
    if round_up && num % c.micros() != 0 {
        q += 1;
    }
    Ok(Amount::from_micros(q))
}

fn add(a: Amount, b: Amount) -> Result<Amount, MarketError> {
    a.checked_add(b).ok_or(MarketError::Overflow)
}

/// Spot price in main credit per application credit: `B / (S * W)`.
pub fn spot_price(adaptor: &CreditAdaptor) -> Result<f64, MarketError> {
    adaptor.require_initialized()?;
    Ok(curve::price(
        adaptor.reserve_f(),
        adaptor.supply_f(),
        adaptor.weight(),
    ))
}

/// Weight implied by a reserve, a price and a supply: `B / (P * S)`.
pub fn implied_weight(reserve: Amount, price: f64, supply: Amount) -> Result<f64, MarketError> {
    let denom = price * supply.micros() as f64;
    if denom == 0.0 || !denom.is_finite() {
        return Err(MarketError::ZeroDenominator);
    }
    Ok(reserve.micros() as f64 / denom)
}

/// Issues application credit against a main-credit deposit.
pub fn buy(adaptor: &CreditAdaptor, deposit: Amount) -> Result<TradeQuote, MarketError> {
    adaptor.require_initialized()?;
    let coefficient = curve::supply_coefficient(
        adaptor.reserve_f(),
        adaptor.weight(),
        deposit.micros() as f64,
    );
    let issued = if deposit.is_zero() {
        Amount::ZERO
    } else if adaptor.is_linear() {
        mul_div(
            adaptor.outstanding_supply,
            deposit,
            adaptor.reserve_balance,
            false,
        )?
    } else {
        floor_to_amount(adaptor.supply_f() * coefficient)?
    };
    let post_state = CreditAdaptor {
        reserve_balance: add(adaptor.reserve_balance, deposit)?,
        outstanding_supply: add(adaptor.outstanding_supply, issued)?,
        ..adaptor.clone()
    };
    Ok(TradeQuote {
        direction: TradeDirection::Buy,
        input: deposit,
        output: issued,
        coefficient,
        pre_state: adaptor.clone(),
        post_state,
        deposit,
        issued,
    })
}

/// Main-credit deposit needed to issue at least `target` application credit.
pub fn quote_deposit(adaptor: &CreditAdaptor, target: Amount) -> Result<TradeQuote, MarketError> {
    adaptor.require_initialized()?;
    let coefficient = curve::payout_coefficient(
        adaptor.supply_f(),
        adaptor.weight(),
        target.micros() as f64,
    );
    let mut deposit = if target.is_zero() {
        Amount::ZERO
    } else if adaptor.is_linear() {
        mul_div(
            adaptor.reserve_balance,
            target,
            adaptor.outstanding_supply,
            true,
        )?
    } else {
        ceil_to_amount(adaptor.reserve_f() * coefficient)?
    };
    // Float evaluation can land one micro-unit short of the target.
    let mut fill = buy(adaptor, deposit)?;
    while fill.issued < target {
        deposit = add(deposit, Amount::from_micros(1))?;
        fill = buy(adaptor, deposit)?;
    }
    Ok(TradeQuote {
        direction: TradeDirection::QuoteDeposit,
        input: target,
        output: deposit,
        coefficient,
        pre_state: adaptor.clone(),
        post_state: fill.post_state,
        deposit,
        issued: fill.issued,
    })
}

/// Burns application credit and pays out main credit from the reserve.
pub fn sell(adaptor: &CreditAdaptor, tokens: Amount) -> Result<TradeQuote, MarketError> {
    adaptor.require_initialized()?;
    if tokens > adaptor.outstanding_supply {
        return Err(MarketError::TokensExceedSupply {
            tokens,
            supply: adaptor.outstanding_supply,
        });
    }
    let coefficient = curve::sale_coefficient(
        adaptor.supply_f(),
        adaptor.weight(),
        tokens.micros() as f64,
    );
    let returned = if tokens.is_zero() {
        Amount::ZERO
    } else if tokens == adaptor.outstanding_supply {
        adaptor.reserve_balance
    } else if adaptor.is_linear() {
        mul_div(
            adaptor.reserve_balance,
            tokens,
            adaptor.outstanding_supply,
            false,
        )?
    } else {
        floor_to_amount(adaptor.reserve_f() * coefficient)?.min(adaptor.reserve_balance)
    };
    let post_state = CreditAdaptor {
        reserve_balance: adaptor.reserve_balance.saturating_sub(returned),
        outstanding_supply: adaptor.outstanding_supply.saturating_sub(tokens),
        ..adaptor.clone()
    };
    Ok(TradeQuote {
        direction: TradeDirection::Sell,
        input: tokens,
        output: returned,
        coefficient,
        pre_state: adaptor.clone(),
        post_state,
        deposit: returned,
        issued: tokens,
    })
}

/// Sells `amount` of the source credit and buys the target credit with the
/// proceeds. When both sides are the same adaptor the purchase runs against
/// the post-sale state.
pub fn convert(
    from: &CreditAdaptor,
    to: &CreditAdaptor,
    amount: Amount,
) -> Result<ConversionQuote, MarketError> {
    let sale = sell(from, amount)?;
    let purchase = if from.credit == to.credit {
        buy(&sale.post_state, sale.output)?
    } else {
        buy(to, sale.output)?
    };
    Ok(ConversionQuote {
        input: amount,
        output: purchase.output,
        proceeds: sale.output,
        sell: Some(sale),
        buy: Some(purchase),
    })
}

/// One row of an adaptor's configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AdaptorConfig {
    pub credit_name: String,
    /// Fixed credit id; generated from the name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credit_id: Option<String>,
    #[serde(with = "amount::as_credits")]
    pub initial_supply: Amount,
    pub initial_price: f64,
    pub weight_ppm: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptorConfigFile {
    #[serde(rename = "adaptor")]
    pub adaptors: Vec<AdaptorConfig>,
}

impl AdaptorConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// One executed trade, as exported to the trade log.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeLogEntry {
    pub time: u64,
    pub direction: TradeDirection,
    pub input: Amount,
    pub output: Amount,
    pub post_reserve: Amount,
    pub post_supply: Amount,
    pub post_price: f64,
}

impl TradeLogEntry {
    pub fn from_quote(time: u64, quote: &TradeQuote) -> Self {
        TradeLogEntry {
            time,
            direction: quote.direction,
            input: quote.input,
            output: quote.output,
            post_reserve: quote.post_state.reserve_balance,
            post_supply: quote.post_state.outstanding_supply,
            post_price: spot_price(&quote.post_state).unwrap_or(0.0),
        }
    }
}

pub const TRADE_LOG_HEADER: [&str; 7] = [
    "time",
    "direction",
    "input",
    "output",
    "postReserve",
    "postSupply",
    "postPrice",
];

pub fn write_trade_log<W: Write>(out: W, entries: &[TradeLogEntry]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRADE_LOG_HEADER)?;
    for e in entries {
        w.write_record([
            e.time.to_string(),
            e.direction.as_str().to_string(),
            e.input.to_string(),
            e.output.to_string(),
            e.post_reserve.to_string(),
            e.post_supply.to_string(),
            e.post_price.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn credits(c: u64) -> Amount {
        Amount::from_credits(c)
    }

    fn adaptor(b: Amount, s: Amount, w: u32) -> CreditAdaptor {
        CreditAdaptor::new(CreditUnitId::new("test"), b, s, w).unwrap()
    }

    #[test]
    fn spot_price_examples() {
        let a = adaptor(credits(500), credits(500), 1_000_000);
        assert_eq!(spot_price(&a).unwrap(), 1.0);
        let a = adaptor(credits(250), credits(500), 500_000);
        assert_eq!(spot_price(&a).unwrap(), 1.0);
        let doubled = adaptor(credits(500), credits(1000), 500_000);
        assert_eq!(spot_price(&doubled).unwrap(), 1.0);
    }

    #[test]
    fn spot_price_needs_reserve_and_supply() {
        let a = adaptor(Amount::ZERO, credits(500), 500_000);
        assert!(matches!(
            spot_price(&a),
            Err(MarketError::UninitializedAdaptor(_))
        ));
        assert!(matches!(
            buy(&a, credits(1)),
            Err(MarketError::UninitializedAdaptor(_))
        ));
    }

    #[test]
    fn implied_weight_examples() {
        let w = implied_weight(credits(250), 1.0, credits(500)).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
        assert_eq!(implied_weight(credits(500), 1.0, credits(500)).unwrap(), 1.0);
        assert_eq!(implied_weight(Amount::ZERO, 1.0, credits(500)).unwrap(), 0.0);
        assert_eq!(
            implied_weight(credits(1), 0.0, credits(1)),
            Err(MarketError::ZeroDenominator)
        );
        let a = adaptor(credits(321), credits(77), 730_000);
        let w = implied_weight(
            a.reserve_balance,
            spot_price(&a).unwrap(),
            a.outstanding_supply,
        )
        .unwrap();
        assert!((w - a.weight()).abs() / a.weight() < 1e-9);
    }

    #[test]
    fn launch_seeds_reserve_from_price() {
        let a = CreditAdaptor::launch(CreditUnitId::new("t"), credits(500), 1.0, 500_000).unwrap();
        assert_eq!(a.reserve_balance, credits(250));
        assert_eq!(spot_price(&a).unwrap(), 1.0);
        assert!(matches!(
            CreditAdaptor::launch(CreditUnitId::new("t"), credits(500), 1.0, 0),
            Err(MarketError::InvalidWeight(0))
        ));
        assert!(matches!(
            CreditAdaptor::launch(CreditUnitId::new("t"), credits(500), -1.0, 10),
            Err(MarketError::InvalidPrice(_))
        ));
    }

    #[test]
    fn buy_half_weight_example() {
        let a = adaptor(credits(250), credits(500), 500_000);
        let q = buy(&a, credits(250)).unwrap();
        // 500 * (sqrt(2) - 1) = 207.10678118654755
        assert_eq!(q.issued, Amount::from_micros(207_106_781));
        let p = spot_price(&q.post_state).unwrap();
        assert!((p - std::f64::consts::SQRT_2).abs() < 1e-6);
        assert_eq!(q.post_state.reserve_balance, credits(500));
    }

    #[test]
    fn buy_zero_and_linear() {
        let a = adaptor(credits(250), credits(500), 500_000);
        let q = buy(&a, Amount::ZERO).unwrap();
        assert_eq!(q.issued, Amount::ZERO);
        assert_eq!(q.post_state, a);

        let a = adaptor(credits(500), credits(500), 1_000_000);
        let q = buy(&a, credits(100)).unwrap();
        assert_eq!(q.issued, credits(100));
        assert_eq!(spot_price(&q.post_state).unwrap(), 1.0);
    }

    #[test]
    fn quote_deposit_examples() {
        let a = adaptor(credits(250), credits(500), 500_000);
        let q = quote_deposit(&a, Amount::from_micros(207_106_781)).unwrap();
        assert_eq!(q.deposit, credits(250));
        assert!(q.issued >= Amount::from_micros(207_106_781));

        assert_eq!(quote_deposit(&a, Amount::ZERO).unwrap().deposit, Amount::ZERO);

        let a = adaptor(credits(500), credits(500), 1_000_000);
        assert_eq!(quote_deposit(&a, credits(100)).unwrap().deposit, credits(100));
    }

    #[test]
    fn sell_examples() {
        let a = adaptor(credits(250), credits(500), 500_000);
        let bought = buy(&a, credits(250)).unwrap();
        let after = bought.post_state.clone();
        let q = sell(&after, bought.issued).unwrap();
        assert!(q.output <= credits(250));
        assert!(credits(250).micros() - q.output.micros() <= 1, "{}", q.output);
        assert!(q.post_state.reserve_balance.micros().abs_diff(credits(250).micros()) <= 1);
        assert_eq!(q.post_state.outstanding_supply, credits(500));

        assert_eq!(sell(&after, Amount::ZERO).unwrap().output, Amount::ZERO);

        let all = sell(&after, after.outstanding_supply).unwrap();
        assert_eq!(all.output, after.reserve_balance);

        let too_many = after
            .outstanding_supply
            .checked_add(Amount::from_micros(1))
            .unwrap();
        assert!(matches!(
            sell(&after, too_many),
            Err(MarketError::TokensExceedSupply { .. })
        ));
    }

    #[test]
    fn convert_examples() {
        let a = CreditAdaptor::new(CreditUnitId::new("a"), credits(250), credits(500), 500_000).unwrap();
        let b = CreditAdaptor::new(CreditUnitId::new("b"), credits(250), credits(500), 500_000).unwrap();
        let q = convert(&a, &b, credits(10)).unwrap();
        // Both legs slip: 10 sells for 9.9, which buys 500*(sqrt(1+9.9/250)-1).
        let expected = 500.0 * ((1.0 + 9.9 / 250.0f64).sqrt() - 1.0);
        assert!((q.output.as_credits_f64() - expected).abs() < 2e-6, "{}", q.output);
        assert!(q.proceeds.as_credits_f64() - 9.9 < 1e-6);
        assert_eq!(convert(&a, &b, Amount::ZERO).unwrap().output, Amount::ZERO);
        let same = convert(&a, &a, credits(10)).unwrap();
        assert!(same.output.micros().abs_diff(credits(10).micros()) <= 2);
    }

    #[test]
    fn rounding_favors_adaptor() {
        let a = adaptor(Amount::from_micros(123_456_789), Amount::from_micros(987_654_321), 333_333);
        for e in [1u128, 17, 1_000, 999_999, 12_345_678_901] {
            let q = buy(&a, Amount::from_micros(e)).unwrap();
            let exact = curve::issued_for_deposit(
                a.reserve_f(),
                a.supply_f(),
                a.weight(),
                e as f64,
            );
            assert!((q.issued.micros() as f64) <= exact);
            let back = sell(&q.post_state, q.issued).unwrap();
            assert!(back.post_state.reserve_balance >= a.reserve_balance);
        }
    }

    #[test]
    fn config_file_parses() {
        let cfg = AdaptorConfigFile::from_toml(
            r#"
[[adaptor]]
creditName = "ourtube"
initialSupply = 500
initialPrice = 1.0
weightPpm = 500000
"#,
        )
        .unwrap();
        assert_eq!(cfg.adaptors[0].initial_supply, credits(500));
        assert_eq!(cfg.adaptors[0].credit_id, None);
    }

    #[test]
    fn trade_log_header() {
        let mut out = Vec::new();
        write_trade_log(&mut out, &[]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "time,direction,input,output,postReserve,postSupply,postPrice\n"
        );
    }
}
