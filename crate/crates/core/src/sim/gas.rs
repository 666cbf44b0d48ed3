use std::collections::VecDeque;
use std::io::Write;

use chrono::Days;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, LogNormal};

use super::{stream, SimError, SimScenario};
use crate::address::{Address, Hash32};
use crate::amount::Amount;
use crate::ledger::{
    CreditUnitId, Effect, ExecutedTx, Ledger, LedgerError, MarketCall, Transaction, TxKind,
};
use crate::market::AdaptorConfig;
use crate::swap::{Secret, SwapCall};

/// Totals over the receipts of one simulated day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailyAggregate {
    pub tx_date: String,
    pub tx_count: u64,
    pub sum_receipt_gas_used: u64,
    pub sum_receipt_gas_fee_paid: Amount,
    /// Sum of gas limits, the most the day's transactions could have paid for.
    pub sum_gas: u64,
    pub gas_price: u128,
}

pub const DAILY_HEADER: [&str; 5] = [
    "tx_count",
    "sum_receipt_gas_used",
    "sum_receipt_gas_fee_paid",
    "sum_gas",
    "tx_date",
];

#[derive(Debug, Clone)]
pub struct GasStudy {
    pub days: Vec<DailyAggregate>,
    /// Transactions executed during the simulated days, setup excluded.
    pub transactions: Vec<ExecutedTx>,
    pub credits: Vec<CreditUnitId>,
    pub ledger: Ledger,
}

struct OpenSwap {
    contract: Hash32,
    initiator: Address,
    participant: Address,
    secret: Secret,
    timelock: u64,
    locked_at: u64,
}

struct World<'a> {
    scenario: &'a SimScenario,
    ledger: Ledger,
    bots: Vec<Address>,
    credits: Vec<CreditUnitId>,
    swaps: VecDeque<OpenSwap>,
    rng: ChaCha12Rng,
    seq: u64,
}

pub fn run_gas_study(scenario: &SimScenario) -> Result<GasStudy, SimError> {
    scenario.validate()?;
    let start = scenario.start()?;
    let mut world = World::setup(scenario)?;
    let first_tx = world.ledger.history().len();
    let price_dist = {
        let g = &scenario.gas_price_process;
        let sigma = g.spread;
        let mu = g.mean.max(f64::MIN_POSITIVE).ln() - sigma * sigma / 2.0;
        LogNormal::new(mu, sigma).expect("validated spread")
    };
    let [lo, hi] = scenario.daily_tx_range;

    let mut days = Vec::with_capacity(scenario.days as usize);
    for day in 1..=scenario.days {
        let gas_price = (price_dist.sample(&mut world.rng).round() as u128).max(1);
        world.ledger.set_gas_price(gas_price);
        let count = world.rng.random_range(lo..=hi);
        for _ in 0..count {
            world.step().map_err(|source| SimError::Ledger { day, source })?;
        }
        let block = world
            .ledger
            .seal_block(day as u64 * 24)
            .map_err(|source| SimError::Ledger { day, source })?;
        let mut agg = DailyAggregate {
            tx_date: (start + Days::new(day as u64 - 1)).format("%Y-%m-%d").to_string(),
            tx_count: 0,
            sum_receipt_gas_used: 0,
            sum_receipt_gas_fee_paid: Amount::ZERO,
            sum_gas: 0,
            gas_price,
        };
        for id in &block.tx_ids {
            let e = world.ledger.executed(id).expect("sealed tx was executed");
            agg.tx_count += 1;
            agg.sum_receipt_gas_used += e.receipt.gas_used;
            agg.sum_gas += e.tx.gas_limit;
            agg.sum_receipt_gas_fee_paid = agg
                .sum_receipt_gas_fee_paid
                .checked_add(e.receipt.fee)
                .expect("daily fees fit");
        }
        days.push(agg);
    }
    Ok(GasStudy {
        days,
        transactions: world.ledger.history()[first_tx..].to_vec(),
        credits: world.credits,
        ledger: world.ledger,
    })
}

impl<'a> World<'a> {
    fn setup(scenario: &'a SimScenario) -> Result<Self, SimError> {
        let at_setup = |source| SimError::Ledger { day: 0, source };
        let mut ledger = Ledger::new(Default::default(), 0);
        let bots: Vec<Address> = (0..scenario.bot_count)
            .map(|i| Address::derive(&format!("bot/{i}")))
            .collect();
        for bot in &bots {
            ledger
                .genesis_allocate(*bot, scenario.bot_endowment)
                .map_err(at_setup)?;
        }
        let weight = scenario.weight_rounds[0];
        let mut credits = Vec::new();
        for name in &scenario.credits {
            let dev = Address::derive(&format!("dev/{name}"));
            let reserve = (scenario.initial_supply.as_credits_f64()
                * scenario.initial_price
                * weight as f64
                / 1e6)
                .ceil() as u64
                + 1;
            ledger
                .genesis_allocate(dev, Amount::from_credits(reserve))
                .map_err(at_setup)?;
            let config = AdaptorConfig {
                credit_name: name.clone(),
                credit_id: None,
                initial_supply: scenario.initial_supply,
                initial_price: scenario.initial_price,
                weight_ppm: weight,
            };
            let id = ledger.launch_credit(&config, dev).map_err(at_setup)?;
            credits.push(id);
        }
        // Developers hand half their supply to their own population.
        for (p, id) in credits.iter().enumerate() {
            let dev = ledger.credit(id).expect("registered").owner;
            let members: Vec<Address> = population(&bots, credits.len(), p).collect();
            if members.is_empty() {
                continue;
            }
            let share = Amount::from_micros(
                scenario.initial_supply.micros() / 2 / members.len() as u128,
            );
            if share.is_zero() {
                continue;
            }
            for m in members {
                ledger.transfer(dev, m, id, share).map_err(at_setup)?;
            }
        }
        ledger.seal_block(0).map_err(at_setup)?;
        Ok(World {
            scenario,
            ledger,
            bots,
            credits,
            swaps: VecDeque::new(),
            rng: stream(scenario.seed, 1_000),
            seq: 0,
        })
    }

    fn home(&self, bot: usize) -> usize {
        bot % self.credits.len()
    }

    /// Another bot, from the same population unless the draw crosses over.
    fn pick_peer(&mut self, bot: usize) -> usize {
        let n = self.bots.len();
        if n == 1 {
            return 0;
        }
        let pops = self.credits.len();
        let cross = pops > 1 && self.rng.random::<f64>() < self.scenario.cross_population_rate;
        for _ in 0..64 {
            let peer = self.rng.random_range(0..n);
            if peer != bot && (peer % pops != bot % pops) == cross {
                return peer;
            }
        }
        (bot + 1) % n
    }

    fn gas_limit(&mut self, kind: TxKind) -> u64 {
        let required = self.ledger.gas_schedule().cost(kind);
        if self.rng.random::<f64>() < self.scenario.under_gas_rate {
            return (required / 2).max(1);
        }
        let extra = (required as f64 * self.scenario.gas_limit_headroom) as u64;
        required + self.rng.random_range(0..=extra)
    }

    /// Main credit `addr` can spend after reserving the largest possible fee.
    fn spendable_main(&self, addr: &Address, kind: TxKind) -> Amount {
        let limit = self.ledger.gas_schedule().cost(kind) as f64 * (1.0 + self.scenario.gas_limit_headroom);
        let cap = (limit.ceil() as u128 + 1) * self.ledger.gas_price();
        self.ledger
            .balance(addr, &CreditUnitId::main())
            .saturating_sub(Amount::from_micros(cap))
    }

    fn step(&mut self) -> Result<(), LedgerError> {
        let mix = &self.scenario.tx_mix;
        let total = mix.transfer + mix.market_trade + mix.swap_step;
        let roll = self.rng.random::<f64>() * total;
        let bot = self.rng.random_range(0..self.bots.len());
        if roll < mix.transfer {
            self.transfer(bot)
        } else if roll < mix.transfer + mix.market_trade {
            self.trade(bot)
        } else {
            self.swap_step(bot)
        }
    }

    fn send(&mut self, mut tx: Transaction) -> Result<Option<Effect>, LedgerError> {
        tx.gas_limit = self.gas_limit(tx.kind);
        let exec = self.ledger.execute_detailed(tx)?;
        Ok(exec.outcome.ok())
    }

    /// A small payment, in the sender's home credit when it holds any.
    fn transfer(&mut self, bot: usize) -> Result<(), LedgerError> {
        let from = self.bots[bot];
        let peer = self.pick_peer(bot);
        let to = self.bots[peer];
        let home = self.credits[self.home(bot)].clone();
        let held = self.ledger.balance(&from, &home);
        let (credit, value) = if held.is_zero() {
            let spendable = self.spendable_main(&from, TxKind::Transfer);
            (CreditUnitId::main(), spendable.min(Amount::from_micros(10_000)))
        } else {
            let share = self.rng.random_range(1..=20u128);
            (home, Amount::from_micros((held.micros() * share / 1_000).max(1)))
        };
        let tx = self
            .ledger
            .build_tx(from, to, credit, value, TxKind::Transfer, Vec::new());
        self.send(tx).map(drop)
    }

    /// Buys or sells the home credit, or converts into another population's.
    fn trade(&mut self, bot: usize) -> Result<(), LedgerError> {
        let from = self.bots[bot];
        let home = self.credits[self.home(bot)].clone();
        let held = self.ledger.balance(&from, &home);
        let demand = &self.scenario.demand_process;
        let size: f64 = Exp1.sample(&mut self.rng);
        let buy = held.is_zero() || self.rng.random::<f64>() < demand.buy_probability;
        let (call, credit, value) = if buy {
            let spendable = self.spendable_main(&from, TxKind::MarketTrade);
            let deposit = Amount::from_credits_f64_floor(size * demand.net_buy_rate * 0.1)
                .min(Amount::from_micros(spendable.micros() / 20));
            (MarketCall::Buy { credit: home.clone() }, CreditUnitId::main(), deposit)
        } else {
            let fraction = (size * demand.sell_fraction).min(1.0);
            let tokens = Amount::from_micros(((held.micros() as f64) * fraction) as u128).min(held);
            let peer = self.pick_peer(bot);
            let other = self.credits[self.home(peer)].clone();
            if other != home {
                let to = other.clone();
                (MarketCall::Convert { from: home.clone(), to }, home, tokens)
            } else {
                (MarketCall::Sell { credit: home.clone() }, home, tokens)
            }
        };
        let tx = self.ledger.build_tx(
            from,
            Address::market(),
            credit,
            value,
            TxKind::MarketTrade,
            call.encode(),
        );
        self.send(tx).map(drop)
    }

    /// Settles the oldest open swap when it is due, otherwise opens a new one.
    fn swap_step(&mut self, bot: usize) -> Result<(), LedgerError> {
        let height = self.ledger.height();
        if let Some(s) = self.swaps.pop_front_if(|f| height >= f.timelock) {
            let c = self.ledger.contract(&s.contract).expect("tracked").clone();
            let call = SwapCall::Refund {
                contract: s.contract,
            };
            let tx = self.ledger.build_tx(
                s.initiator,
                s.participant,
                c.credit,
                Amount::ZERO,
                TxKind::SwapStep,
                call.encode(),
            );
            if self.send(tx)?.is_none() {
                self.swaps.push_front(s);
            }
            return Ok(());
        }
        let rng = &mut self.rng;
        if let Some(s) = self
            .swaps
            .pop_front_if(|f| f.locked_at < height && rng.random::<f64>() < 0.9)
        {
            let c = self.ledger.contract(&s.contract).expect("tracked").clone();
            let call = SwapCall::Redeem {
                contract: s.contract,
                preimage: s.secret,
            };
            let tx = self.ledger.build_tx(
                s.participant,
                s.initiator,
                c.credit,
                Amount::ZERO,
                TxKind::SwapStep,
                call.encode(),
            );
            if self.send(tx)?.is_none() {
                self.swaps.push_front(s);
            }
            return Ok(());
        }
        let from = self.bots[bot];
        let peer = self.pick_peer(bot);
        let to = self.bots[peer];
        let home = self.credits[self.home(bot)].clone();
        let held = self.ledger.balance(&from, &home);
        let (credit, value) = if held.is_zero() {
            let spendable = self.spendable_main(&from, TxKind::SwapStep);
            (CreditUnitId::main(), spendable.min(Amount::from_micros(10_000)))
        } else {
            (home, Amount::from_micros((held.micros() / 50).max(1)))
        };
        self.seq += 1;
        let secret = Secret::derive(&format!("gas-study/{}/{}", self.scenario.seed, self.seq));
        let timelock = height + self.scenario.swap_delta.max(1);
        let call = SwapCall::Lock {
            hashlock: secret.hashlock(),
            timelock,
            must_precede: None,
        };
        let tx = self
            .ledger
            .build_tx(from, to, credit, value, TxKind::SwapStep, call.encode());
        if let Some(Effect::Swap(c)) = self.send(tx)? {
            self.swaps.push_back(OpenSwap {
                contract: c.id,
                initiator: from,
                participant: to,
                secret,
                timelock,
                locked_at: height,
            });
        }
        Ok(())
    }
}

fn population(bots: &[Address], pops: usize, p: usize) -> impl Iterator<Item = Address> + '_ {
    bots.iter()
        .enumerate()
        .filter(move |(i, _)| i % pops == p)
        .map(|(_, a)| *a)
}

/// Writes the daily aggregates with the `tx_count,...,tx_date` header.
/// Fees are rendered in whole main credits with six decimals.
pub fn write_daily_csv<W: Write>(out: W, days: &[DailyAggregate]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DAILY_HEADER)?;
    for d in days {
        w.write_record([
            d.tx_count.to_string(),
            d.sum_receipt_gas_used.to_string(),
            d.sum_receipt_gas_fee_paid.to_string(),
            d.sum_gas.to_string(),
            d.tx_date.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimScenario {
        SimScenario {
            bot_count: 30,
            days: 4,
            daily_tx_range: [100, 300],
            ..SimScenario::default()
        }
    }

    #[test]
    fn every_drawn_transaction_lands_in_its_day() {
        let study = run_gas_study(&small()).unwrap();
        assert_eq!(study.days.len(), 4);
        let total: u64 = study.days.iter().map(|d| d.tx_count).sum();
        assert_eq!(total as usize, study.transactions.len());
        for d in &study.days {
            assert!((100..=300).contains(&d.tx_count));
            assert!(d.sum_gas >= d.sum_receipt_gas_used);
        }
        assert_eq!(study.days[0].tx_date, "2018-11-01");
        assert_eq!(study.days[3].tx_date, "2018-11-04");
    }

    #[test]
    fn fees_match_receipts() {
        let study = run_gas_study(&small()).unwrap();
        for (day, agg) in study.days.iter().enumerate() {
            let block = &study.ledger.blocks()[day + 2];
            let fee: u128 = block
                .tx_ids
                .iter()
                .map(|id| {
                    let e = study.ledger.executed(id).unwrap();
                    e.receipt.gas_used as u128 * e.tx.gas_price
                })
                .sum();
            assert_eq!(agg.sum_receipt_gas_fee_paid.micros(), fee);
        }
    }

    #[test]
    fn mix_exercises_every_kind_and_some_reverts() {
        let study = run_gas_study(&small()).unwrap();
        for kind in [TxKind::Transfer, TxKind::MarketTrade, TxKind::SwapStep] {
            assert!(study.transactions.iter().any(|e| e.tx.kind == kind));
        }
        assert!(study.transactions.iter().any(|e| !e.receipt.succeeded()));
        assert!(study
            .transactions
            .iter()
            .any(|e| e.tx.kind == TxKind::SwapStep && e.tx.value.is_zero() && e.receipt.succeeded()));
    }

    #[test]
    fn zero_days_is_empty() {
        let study = run_gas_study(&SimScenario {
            days: 0,
            ..small()
        })
        .unwrap();
        assert!(study.days.is_empty());
        let mut out = Vec::new();
        write_daily_csv(&mut out, &study.days).unwrap();
        assert_eq!(
            out,
            b"tx_count,sum_receipt_gas_used,sum_receipt_gas_fee_paid,sum_gas,tx_date\n"
        );
    }
}
