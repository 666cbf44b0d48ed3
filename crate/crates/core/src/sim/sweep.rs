use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{stream, SimError, SimScenario};
use crate::amount::Amount;
use crate::ledger::CreditUnitId;
use crate::market::{self, CreditAdaptor};

/// Hourly samples of one sweep round. Index `h` is the state after hour `h`;
/// index 0 is the freshly launched adaptor.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSeries {
    pub weight_ppm: u32,
    pub prices: Vec<f64>,
    pub supplies: Vec<Amount>,
    pub reserves: Vec<Amount>,
    pub trades: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub hours: Vec<u32>,
    pub rounds: Vec<RoundSeries>,
}

impl PriceSeries {
    pub fn round(&self, weight_ppm: u32) -> Option<&RoundSeries> {
        self.rounds.iter().find(|r| r.weight_ppm == weight_ppm)
    }
}

/// Column suffix for a weight: 1.0 -> `10`, 0.5 -> `5`, 0.8 -> `8`; weights
/// off the tenth grid fall back to their ppm value.
pub fn weight_label(weight_ppm: u32) -> String {
    match weight_ppm {
        1_000_000 => "10".into(),
        w if w % 100_000 == 0 => (w / 100_000).to_string(),
        w => format!("{w}ppm"),
    }
}

struct Bot {
    main: Amount,
    tokens: Amount,
}

pub fn run_weight_sweep(scenario: &SimScenario) -> Result<PriceSeries, SimError> {
    scenario.validate()?;
    let rounds = scenario
        .weight_rounds
        .iter()
        .enumerate()
        .map(|(i, &w)| run_round(scenario, i as u64, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PriceSeries {
        hours: (0..=scenario.horizon_hours).collect(),
        rounds,
    })
}

fn run_round(scenario: &SimScenario, index: u64, weight_ppm: u32) -> Result<RoundSeries, SimError> {
    let fail = |hour| move |source| SimError::Round {
        weight_ppm,
        hour,
        source,
    };
    let mut rng = stream(scenario.seed, index + 1);
    let mut adaptor = CreditAdaptor::launch(
        CreditUnitId::new("ourtube"),
        scenario.initial_supply,
        scenario.initial_price,
        weight_ppm,
    )
    .map_err(fail(0))?;
    let mut bots: Vec<Bot> = (0..scenario.bot_count)
        .map(|_| Bot {
            main: scenario.bot_endowment,
            tokens: Amount::ZERO,
        })
        .collect();
    let demand = &scenario.demand_process;
    let mut series = RoundSeries {
        weight_ppm,
        prices: Vec::new(),
        supplies: Vec::new(),
        reserves: Vec::new(),
        trades: 0,
    };
    let sample = |a: &CreditAdaptor, s: &mut RoundSeries, hour| -> Result<(), SimError> {
        s.prices.push(market::spot_price(a).map_err(fail(hour))?);
        s.supplies.push(a.outstanding_supply);
        s.reserves.push(a.reserve_balance);
        Ok(())
    };
    sample(&adaptor, &mut series, 0)?;

    for hour in 1..=scenario.horizon_hours {
        for bot in &mut bots {
            let size: f64 = Exp1.sample(&mut rng);
            if rng.random::<f64>() < demand.buy_probability {
                let deposit = Amount::from_credits_f64_floor(size * demand.net_buy_rate).min(bot.main);
                if deposit.is_zero() {
                    continue;
                }
                let q = market::buy(&adaptor, deposit).map_err(fail(hour))?;
                bot.main = bot.main.saturating_sub(deposit);
                bot.tokens = bot.tokens.checked_add(q.issued).expect("holdings fit");
                adaptor = q.post_state;
            } else {
                let fraction = (size * demand.sell_fraction).min(1.0);
                let tokens = Amount::from_micros((bot.tokens.micros() as f64 * fraction) as u128)
                    .min(bot.tokens);
                if tokens.is_zero() {
                    continue;
                }
                let q = market::sell(&adaptor, tokens).map_err(fail(hour))?;
                bot.tokens = bot.tokens.saturating_sub(tokens);
                bot.main = bot.main.checked_add(q.output).expect("holdings fit");
                adaptor = q.post_state;
            }
            series.trades += 1;
        }
        sample(&adaptor, &mut series, hour)?;
    }
    Ok(series)
}

fn write_columns<W: Write>(
    out: W,
    prefix: &str,
    series: &PriceSeries,
    cell: impl Fn(&RoundSeries, usize) -> String,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend(
        series
            .rounds
            .iter()
            .map(|r| format!("{prefix}{}", weight_label(r.weight_ppm))),
    );
    w.write_record(&header)?;
    for (i, hour) in series.hours.iter().enumerate() {
        let mut row = vec![hour.to_string()];
        row.extend(series.rounds.iter().map(|r| cell(r, i)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `time,w10,w5,w8`-style spot prices, one row per hour.
pub fn write_price_csv<W: Write>(out: W, series: &PriceSeries) -> csv::Result<()> {
    write_columns(out, "w", series, |r, i| r.prices[i].to_string())
}

/// Writes outstanding supply per hour in credits, columns `time,s10,...`.
pub fn write_supply_csv<W: Write>(out: W, series: &PriceSeries) -> csv::Result<()> {
    write_columns(out, "s", series, |r, i| r.supplies[i].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimScenario {
        SimScenario {
            bot_count: 40,
            horizon_hours: 5,
            ..SimScenario::default()
        }
    }

    #[test]
    fn labels_match_column_names() {
        assert_eq!(weight_label(1_000_000), "10");
        assert_eq!(weight_label(500_000), "5");
        assert_eq!(weight_label(800_000), "8");
        assert_eq!(weight_label(333_333), "333333ppm");
    }

    #[test]
    fn series_has_one_sample_per_hour_plus_launch() {
        let s = run_weight_sweep(&small()).unwrap();
        assert_eq!(s.hours, [0, 1, 2, 3, 4, 5]);
        for r in &s.rounds {
            assert_eq!(r.prices.len(), 6);
            assert!(r.prices.iter().all(|p| *p > 0.0));
            assert_eq!(r.prices[0], 1.0);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let s = run_weight_sweep(&small()).unwrap();
        let mut out = Vec::new();
        write_price_csv(&mut out, &s).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("time,w10,w5,w8"));
        assert_eq!(lines.count(), 6);
    }

    #[test]
    fn empty_series_is_header_only() {
        let s = PriceSeries {
            hours: vec![],
            rounds: vec![],
        };
        let mut out = Vec::new();
        write_price_csv(&mut out, &s).unwrap();
        assert_eq!(out, b"time\n");
    }

    #[test]
    fn pegged_round_stays_at_one() {
        let s = run_weight_sweep(&small()).unwrap();
        let r = s.round(1_000_000).unwrap();
        assert!(r.prices.iter().all(|p| *p == 1.0));
        assert!(r.supplies.last() > r.supplies.first());
    }
}
