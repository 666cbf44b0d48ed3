//! Small browser API over the market and simulator for the static demo in
//! `www/`. Each exported function has a plain Rust twin returning
//! `Result<_, String>` so it can be tested off the browser.

use proofware::market::{self, CreditAdaptor};
use proofware::sim::{self, SimScenario};
use proofware::{Amount, CreditUnitId};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn launch(supply: f64, price: f64, weight: f64) -> Result<CreditAdaptor, String> {
    if !(supply.is_finite() && supply > 0.0 && supply < 1e12) {
        return Err(format!("supply must be in (0, 1e12), got {supply}"));
    }
    let weight_ppm = (weight * 1e6).round();
    if !(1.0..=1e6).contains(&weight_ppm) {
        return Err(format!("weight must be in (0, 1], got {weight}"));
    }
    CreditAdaptor::launch(
        CreditUnitId::new("demo"),
        Amount::from_micros((supply * 1e6).round() as u128),
        price,
        weight_ppm as u32,
    )
    .map_err(|e| e.to_string())
}

fn credits(a: Amount) -> f64 {
    a.as_credits_f64()
}

/// Walks the curve with `steps` equal purchases that together spend
/// `total_deposit` main credit. Returns `[supply0, price0, supply1, ...]`.
pub fn curve_points(supply: f64, price: f64, weight: f64, total_deposit: f64, steps: u32) -> Result<Vec<f64>, String> {
    let mut adaptor = launch(supply, price, weight)?;
    if !(total_deposit.is_finite() && total_deposit >= 0.0) {
        return Err(format!("deposit must be non-negative, got {total_deposit}"));
    }
    let steps = steps.clamp(1, 2_000);
    let each = Amount::from_micros((total_deposit * 1e6 / steps as f64).floor() as u128);
    let mut out = Vec::with_capacity(2 * (steps as usize + 1));
    let spot = |a: &CreditAdaptor| market::spot_price(a).map_err(|e| e.to_string());
    out.extend([credits(adaptor.outstanding_supply), spot(&adaptor)?]);
    for _ in 0..steps {
        adaptor = market::buy(&adaptor, each).map_err(|e| e.to_string())?.post_state;
        out.extend([credits(adaptor.outstanding_supply), spot(&adaptor)?]);
    }
    Ok(out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BuyQuote {
    pub issued: f64,
    pub average_price: f64,
    pub spot_before: f64,
    pub spot_after: f64,
    pub reserve_after: f64,
    pub supply_after: f64,
}

pub fn quote_buy(supply: f64, price: f64, weight: f64, deposit: f64) -> Result<BuyQuote, String> {
    let adaptor = launch(supply, price, weight)?;
    if !(deposit.is_finite() && deposit > 0.0) {
        return Err("deposit must be positive".into());
    }
    let q = market::buy(&adaptor, Amount::from_micros((deposit * 1e6).round() as u128)).map_err(|e| e.to_string())?;
    let issued = credits(q.issued);
    Ok(BuyQuote {
        issued,
        average_price: if issued > 0.0 { credits(q.deposit) / issued } else { f64::NAN },
        spot_before: market::spot_price(&adaptor).map_err(|e| e.to_string())?,
        spot_after: market::spot_price(&q.post_state).map_err(|e| e.to_string())?,
        reserve_after: credits(q.post_state.reserve_balance),
        supply_after: credits(q.post_state.outstanding_supply),
    })
}

#[derive(Serialize)]
pub struct SweepRound {
    pub label: String,
    pub weight: f64,
    pub prices: Vec<f64>,
    pub supplies: Vec<f64>,
}

#[derive(Serialize)]
pub struct Sweep {
    pub hours: Vec<u32>,
    pub rounds: Vec<SweepRound>,
}

/// Runs the weight sweep with the default bot market, scaled down by
/// `bots` and `hours` so it stays interactive.
pub fn sweep(seed: u64, bots: u32, hours: u32, weights: &[f64]) -> Result<Sweep, String> {
    let scenario = SimScenario {
        seed,
        bot_count: bots.clamp(1, 2_000),
        horizon_hours: hours.clamp(1, 96),
        weight_rounds: weights.iter().map(|w| (w * 1e6).round() as u32).collect(),
        ..SimScenario::default()
    };
    let series = sim::run_weight_sweep(&scenario).map_err(|e| e.to_string())?;
    Ok(Sweep {
        hours: series.hours,
        rounds: series
            .rounds
            .into_iter()
            .map(|r| SweepRound {
                label: sim::weight_label(r.weight_ppm),
                weight: r.weight_ppm as f64 / 1e6,
                prices: r.prices,
                supplies: r.supplies.into_iter().map(credits).collect(),
            })
            .collect(),
    })
}

fn js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.map(|v| serde_json::to_string(&v).expect("plain data serializes"))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bonding_curve(supply: f64, price: f64, weight: f64, total_deposit: f64, steps: u32) -> Result<Vec<f64>, JsValue> {
    curve_points(supply, price, weight, total_deposit, steps).map_err(|e| JsValue::from_str(&e))
}

/// JSON-encoded [`BuyQuote`].
#[wasm_bindgen]
pub fn buy_quote(supply: f64, price: f64, weight: f64, deposit: f64) -> Result<String, JsValue> {
    js(quote_buy(supply, price, weight, deposit))
}

/// JSON-encoded [`Sweep`]. The seed is a `u32` so JavaScript numbers pass
/// through unchanged.
#[wasm_bindgen]
pub fn weight_sweep(seed: u32, bots: u32, hours: u32, weights: Vec<f64>) -> Result<String, JsValue> {
    js(sweep(seed as u64, bots, hours, &weights))
}
