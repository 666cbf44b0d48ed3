//! Property tests for the bonding curve against an independent closed-form
//! oracle written with `powf` rather than the library's `ln_1p`/`exp_m1`.

use proofware::market::{self, curve, CreditAdaptor};
use proofware::{Amount, CreditUnitId};
use proptest::prelude::*;

fn oracle_issued(b: f64, s: f64, w: f64, e: f64) -> f64 {
    s * ((1.0 + e / b).powf(w) - 1.0)
}

fn oracle_returned(b: f64, s: f64, w: f64, t: f64) -> f64 {
    b * (1.0 - (1.0 - t / s).powf(1.0 / w))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn adaptor(b: u64, s: u64, w: u32) -> CreditAdaptor {
    CreditAdaptor::new(
        CreditUnitId::new("p"),
        Amount::from_micros(b as u128),
        Amount::from_micros(s as u128),
        w,
    )
    .unwrap()
}

fn state() -> impl Strategy<Value = (u64, u64, u32)> {
    (1_000_000u64..1_000_000_000_000, 1_000_000u64..1_000_000_000_000, 10_000u32..=1_000_000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn buy_matches_oracle_and_rounds_down((b, s, w) in state(), e in 1u64..10_000_000_000) {
        let a = adaptor(b, s, w);
        let q = market::buy(&a, Amount::from_micros(e as u128)).unwrap();
        let exact = oracle_issued(b as f64, s as f64, w as f64 / 1e6, e as f64);
        prop_assert!((q.issued.micros() as f64) <= exact * (1.0 + 1e-12));
        prop_assert!(exact - (q.issued.micros() as f64) <= 1.0 + exact * 1e-12);
        prop_assert_eq!(q.post_state.reserve_balance.micros(), b as u128 + e as u128);
    }

    #[test]
    fn buy_then_sell_never_drains_reserve((b, s, w) in state(), e in 1u64..10_000_000_000) {
        let a = adaptor(b, s, w);
        let bought = market::buy(&a, Amount::from_micros(e as u128)).unwrap();
        let sold = market::sell(&bought.post_state, bought.issued).unwrap();
        prop_assert_eq!(sold.post_state.outstanding_supply, a.outstanding_supply);
        prop_assert!(sold.post_state.reserve_balance >= a.reserve_balance);
        prop_assert!(sold.output.micros() <= e as u128);
    }

    #[test]
    fn sell_matches_oracle((b, s, w) in state(), frac in 0.0f64..1.0) {
        let a = adaptor(b, s, w);
        let t = ((s as f64) * frac) as u64;
        let q = market::sell(&a, Amount::from_micros(t as u128)).unwrap();
        let exact = oracle_returned(b as f64, s as f64, w as f64 / 1e6, t as f64);
        prop_assert!((q.output.micros() as f64) <= exact * (1.0 + 1e-9) + 1e-9);
        prop_assert!(exact - (q.output.micros() as f64) <= 1.0 + exact * 1e-9);
    }

    #[test]
    fn quote_deposit_buys_at_least_the_target((b, s, w) in state(), t in 1u64..1_000_000_000) {
        let a = adaptor(b, s, w);
        let q = market::quote_deposit(&a, Amount::from_micros(t as u128)).unwrap();
        let bought = market::buy(&a, q.deposit).unwrap();
        prop_assert!(bought.issued.micros() >= t as u128);
    }

    #[test]
    fn continuous_inverse_round_trip((b, s, w) in state(), e in 1u64..10_000_000_000) {
        let (b, s, w, e) = (b as f64, s as f64, w as f64 / 1e6, e as f64);
        let issued = curve::issued_for_deposit(b, s, w, e);
        let back = curve::deposit_for_issued(b, s, w, issued);
        prop_assert!(rel(back, e) < 1e-9, "{} vs {}", back, e);
        prop_assert!(rel(issued, oracle_issued(b, s, w, e)) < 1e-9);
    }

    #[test]
    fn price_stays_on_the_power_law((b, s, w) in state(), steps in prop::collection::vec(1u64..1_000_000_000, 1..20)) {
        let w = w as f64 / 1e6;
        let (mut b, mut s) = (b as f64, s as f64);
        let invariant = |b: f64, s: f64| curve::price(b, s, w) / s.powf((1.0 - w) / w);
        let start = invariant(b, s);
        for e in steps {
            s += curve::issued_for_deposit(b, s, w, e as f64);
            b += e as f64;
            prop_assert!(rel(invariant(b, s), start) < 1e-9);
        }
    }
}

#[test]
fn linear_weight_is_exact() {
    let a = adaptor(500_000_000, 500_000_000, 1_000_000);
    for e in [1u128, 7, 999_999, 123_456_789] {
        let q = market::buy(&a, Amount::from_micros(e)).unwrap();
        assert_eq!(q.issued.micros(), e);
        assert_eq!(market::spot_price(&q.post_state).unwrap(), 1.0);
    }
}
