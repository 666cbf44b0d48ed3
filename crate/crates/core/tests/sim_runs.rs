use proofware::sim::{self, SimScenario};
use proofware::swap::{explore, CheckerConfig};

fn small() -> SimScenario {
    SimScenario {
        bot_count: 60,
        horizon_hours: 6,
        days: 3,
        daily_tx_range: [200, 400],
        ..SimScenario::default()
    }
}

fn artifacts(s: &SimScenario) -> Vec<Vec<u8>> {
    let series = sim::run_weight_sweep(s).unwrap();
    let study = sim::run_gas_study(s).unwrap();
    let graph = sim::build_transaction_graph(&study.transactions).unwrap();
    let mut files = vec![Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    sim::write_price_csv(&mut files[0], &series).unwrap();
    sim::write_daily_csv(&mut files[1], &study.days).unwrap();
    sim::write_edge_list(&mut files[2], &graph).unwrap();
    sim::write_communities(&mut files[3], &graph).unwrap();
    files
}

#[test]
fn equal_seeds_give_identical_bytes() {
    assert_eq!(artifacts(&small()), artifacts(&small()));
    let other = SimScenario { seed: 2, ..small() };
    assert_ne!(artifacts(&small())[0], artifacts(&other)[0]);
}

#[test]
fn disjoint_populations_have_positive_modularity() {
    let s = SimScenario {
        cross_population_rate: 0.0,
        ..small()
    };
    let study = sim::run_gas_study(&s).unwrap();
    let graph = sim::build_transaction_graph(&study.transactions).unwrap();
    assert_eq!(graph.communities().len(), 2);
    assert!(sim::modularity(&graph).unwrap() > 0.3);
}

#[test]
fn observed_prices_follow_closed_form() {
    let series = sim::run_weight_sweep(&small()).unwrap();
    for r in &series.rounds {
        let w = r.weight_ppm as f64 / 1e6;
        for i in 0..r.prices.len() {
            let b = r.reserves[i].micros() as f64;
            let s = r.supplies[i].micros() as f64;
            let closed = b / (s * w);
            assert!(((r.prices[i] - closed) / closed).abs() < 1e-9);
        }
    }
}

#[test]
fn short_horizon_checker_is_atomic() {
    let report = explore(&CheckerConfig::new(8, 2));
    assert!(report.is_atomic(), "{}", report.to_json());
    assert!(report.schedules > 100);
}
