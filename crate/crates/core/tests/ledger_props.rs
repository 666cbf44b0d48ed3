use proofware::ledger::{GasSchedule, MarketCall, TxKind};
use proofware::market::AdaptorConfig;
use proofware::{Address, Amount, CreditUnitId, Ledger};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Transfer { from: usize, to: usize, micros: u64 },
    Buy { who: usize, micros: u64 },
    Sell { who: usize, permille: u16 },
    UnderGas { from: usize, to: usize },
    Seal,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..4usize, 0..4usize, 0..5_000_000u64).prop_map(|(from, to, micros)| Op::Transfer { from, to, micros }),
        (0..4usize, 1..50_000_000u64).prop_map(|(who, micros)| Op::Buy { who, micros }),
        (0..4usize, 0..=1000u16).prop_map(|(who, permille)| Op::Sell { who, permille }),
        (0..4usize, 0..4usize).prop_map(|(from, to)| Op::UnderGas { from, to }),
        Just(Op::Seal),
    ]
}

fn users() -> Vec<Address> {
    (0..4).map(|i| Address::derive(&format!("user{i}"))).collect()
}

fn setup() -> (Ledger, CreditUnitId) {
    let mut l = Ledger::new(GasSchedule::default(), 7);
    for u in users() {
        l.genesis_allocate(u, Amount::from_credits(1_000)).unwrap();
    }
    let cfg = AdaptorConfig {
        credit_name: "ourtube".into(),
        credit_id: None,
        initial_supply: Amount::from_credits(500),
        initial_price: 1.0,
        weight_ppm: 500_000,
    };
    let id = l.launch_credit(&cfg, users()[0]).unwrap();
    (l, id)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Main credit is only ever moved between accounts, reserves and the fee
    /// sink; application credit only changes through the curve.
    #[test]
    fn value_is_conserved(ops in prop::collection::vec(op(), 1..40)) {
        let (mut l, app) = setup();
        let main = CreditUnitId::main();
        let u = users();
        let total_main = l.circulating(&main);
        let mut clock = 0;
        for op in ops {
            match op {
                Op::Transfer { from, to, micros } => {
                    let _ = l.transfer(u[from], u[to], &main, Amount::from_micros(micros as u128));
                }
                Op::Buy { who, micros } => {
                    let tx = l.build_tx(u[who], Address::market(), main.clone(), Amount::from_micros(micros as u128),
                        TxKind::MarketTrade, MarketCall::Buy { credit: app.clone() }.encode());
                    let _ = l.execute(tx);
                }
                Op::Sell { who, permille } => {
                    let held = l.balance(&u[who], &app);
                    let value = Amount::from_micros(held.micros() * permille as u128 / 1000);
                    let tx = l.build_tx(u[who], Address::market(), app.clone(), value,
                        TxKind::MarketTrade, MarketCall::Sell { credit: app.clone() }.encode());
                    let _ = l.execute(tx);
                }
                Op::UnderGas { from, to } => {
                    let mut tx = l.build_tx(u[from], u[to], main.clone(), Amount::from_micros(1), TxKind::Transfer, vec![]);
                    tx.gas_limit = 20_000;
                    let r = l.execute(tx).unwrap();
                    prop_assert!(!r.succeeded());
                    prop_assert_eq!(r.gas_used, 20_000);
                }
                Op::Seal => {
                    clock += 1;
                    l.seal_block(clock).unwrap();
                }
            }
            prop_assert_eq!(l.circulating(&main), total_main);
            let supply = l.adaptor(&app).unwrap().outstanding_supply;
            let held: Amount = u.iter().map(|a| l.balance(a, &app)).sum();
            prop_assert_eq!(held, supply);
        }
        for (i, e) in l.history().iter().enumerate() {
            prop_assert_eq!(e.receipt.fee.micros(), e.receipt.gas_used as u128 * e.tx.gas_price, "tx {}", i);
        }
        let sent: u64 = u.iter().map(|a| l.nonce(a)).sum();
        prop_assert_eq!(sent as usize, l.history().len());
    }

    #[test]
    fn snapshots_round_trip(ops in prop::collection::vec(op(), 1..20)) {
        let (mut l, _) = setup();
        let u = users();
        let mut clock = 0;
        for op in ops {
            match op {
                Op::Transfer { from, to, micros } => {
                    let _ = l.transfer(u[from], u[to], &CreditUnitId::main(), Amount::from_micros(micros as u128));
                }
                _ => {
                    clock += 1;
                    l.seal_block(clock).unwrap();
                }
            }
        }
        let text = l.snapshot_string();
        let restored = Ledger::read_snapshot(text.as_bytes()).unwrap();
        prop_assert_eq!(restored.snapshot_string(), text);
    }
}
