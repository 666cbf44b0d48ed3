mod bootstrap;
mod serve;

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use proofware::ledger::{Effect, MarketCall, RevertReason, TxKind};
use proofware::market::{self, TradeLogEntry};
use proofware::sim::{self, SimScenario};
use proofware::swap::{self, CheckerConfig};
use proofware::{Address, Amount, CreditUnitId, Ledger};

use crate::bootstrap::{open_ledger, resolve_account, save_ledger};

#[derive(Parser)]
#[command(name = "proofware", version, about = "Credit-economy simulations, trades, swaps and gateway")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptor weight sweep and write simulated.csv.
    Sweep(ScenarioArgs),
    /// Run the gas study and write Nov_Sum.csv plus the transaction graph.
    GasStudy(ScenarioArgs),
    /// Buy or sell an application credit against a ledger snapshot.
    Trade(TradeArgs),
    /// Run the two-party swap happy path and print its audit log.
    SwapDemo(SwapDemoArgs),
    /// Serve the price, swap and submit endpoints over HTTP.
    Serve(ServeArgs),
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Scenario file (TOML, or JSON with a .json extension). Defaults apply when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Buy,
    Sell,
}

#[derive(clap::Args)]
struct LedgerArgs {
    /// Ledger snapshot; created from the bootstrap config when missing.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Bootstrap config with [[adaptor]] and [[account]] tables.
    #[arg(long)]
    adaptors: Option<PathBuf>,
}

#[derive(clap::Args)]
struct TradeArgs {
    /// Credit name or id.
    #[arg(long)]
    credit: String,
    #[arg(long, value_enum)]
    direction: Direction,
    /// Amount in credits: main credit to spend on a buy, tokens to sell.
    #[arg(long)]
    amount: Amount,
    /// Trading account, as a 0x address or a label.
    #[arg(long, default_value = "trader")]
    account: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    ledger: LedgerArgs,
}

#[derive(clap::Args)]
struct SwapDemoArgs {
    /// Timelock margin in blocks.
    #[arg(long, default_value_t = 2)]
    delta: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also enumerate adversarial schedules and print the report.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = 12)]
    horizon: usize,
    /// Gap between the two legs' timelocks for --check (defaults to delta).
    #[arg(long)]
    leg_gap: Option<u64>,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[command(flatten)]
    ledger: LedgerArgs,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => sweep(&args),
        Command::GasStudy(args) => gas_study(&args),
        Command::Trade(args) => trade(&args),
        Command::SwapDemo(args) => swap_demo(&args),
        Command::Serve(args) => {
            let ledger = open_ledger(args.ledger.snapshot.as_deref(), args.ledger.adaptors.as_deref())?;
            serve::run(ledger, args.port, args.ledger.snapshot)
        }
    }
}

fn load_scenario(args: &ScenarioArgs) -> Result<SimScenario> {
    let mut scenario = match &args.scenario {
        Some(path) => SimScenario::load(path)?,
        None => SimScenario::default(),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn sweep(args: &ScenarioArgs) -> Result<()> {
    let scenario = load_scenario(args)?;
    let series = sim::run_weight_sweep(&scenario)?;
    sim::write_price_csv(create(&args.out, "simulated.csv")?, &series)?;
    sim::write_supply_csv(create(&args.out, "simulated_supply.csv")?, &series)?;
    for r in &series.rounds {
        println!(
            "w{}: {} trades, price {:.6} -> {:.6}",
            sim::weight_label(r.weight_ppm),
            r.trades,
            r.prices.first().copied().unwrap_or_default(),
            r.prices.last().copied().unwrap_or_default(),
        );
    }
    Ok(())
}

fn gas_study(args: &ScenarioArgs) -> Result<()> {
    let scenario = load_scenario(args)?;
    let study = sim::run_gas_study(&scenario)?;
    sim::write_daily_csv(create(&args.out, "Nov_Sum.csv")?, &study.days)?;
    if study.transactions.is_empty() {
        println!("modularity n/a (no transactions)");
        return Ok(());
    }
    let graph = sim::build_transaction_graph(&study.transactions)?;
    sim::write_edge_list(create(&args.out, "edges.txt")?, &graph)?;
    sim::write_communities(create(&args.out, "communities.txt")?, &graph)?;
    match sim::modularity(&graph) {
        Ok(q) => println!("modularity {q:.6}"),
        Err(e) => println!("modularity n/a ({e})"),
    }
    Ok(())
}

fn find_credit(ledger: &Ledger, key: &str) -> Result<CreditUnitId> {
    if let Some(id) = ledger.credit_by_name(key) {
        return Ok(id.clone());
    }
    let id = CreditUnitId::new(key);
    if ledger.credit(&id).is_none() {
        bail!("unknown-credit: {key}");
    }
    Ok(id)
}

fn trade(args: &TradeArgs) -> Result<()> {
    let snapshot = args
        .ledger
        .snapshot
        .clone()
        .unwrap_or_else(|| args.out.join("ledger.jsonl"));
    let mut ledger = open_ledger(Some(&snapshot), args.ledger.adaptors.as_deref())?;
    let account = resolve_account(&args.account)?;
    let credit = find_credit(&ledger, &args.credit)?;
    if credit.is_main() {
        bail!("trade an application credit, not the main credit");
    }
    let main = CreditUnitId::main();
    let (input, call) = match args.direction {
        Direction::Buy => (main.clone(), MarketCall::Buy { credit: credit.clone() }),
        Direction::Sell => (credit.clone(), MarketCall::Sell { credit: credit.clone() }),
    };
    let tx = ledger.build_tx(account, Address::market(), input.clone(), args.amount, TxKind::MarketTrade, call.encode());
    let fee_cap = Amount::from_micros(tx.fee_cap().context("fee overflows")?);
    let mut required = args.amount;
    if input.is_main() {
        required = required.checked_add(fee_cap).context("amount overflows")?;
    }
    let held = ledger.balance(&account, &input);
    if held < required {
        bail!("insufficient-balance: {account} holds {held} of {input}, needs {required}");
    }
    if !input.is_main() && ledger.balance(&account, &main) < fee_cap {
        bail!("insufficient-balance: {account} cannot cover the {fee_cap} fee cap");
    }

    let exec = ledger.execute_detailed(tx)?;
    let quote = match exec.outcome {
        Ok(Effect::Trade(q)) => q,
        Ok(other) => bail!("unexpected effect {other:?}"),
        Err(RevertReason::Ledger(e)) => bail!("trade reverted: {e}"),
        Err(e) => bail!("trade reverted: {e}"),
    };
    let next = ledger.last_block().timestamp + 1;
    ledger.seal_block(next)?;
    save_ledger(&ledger, &snapshot)?;

    let leg = quote.buy.as_ref().or(quote.sell.as_ref()).context("trade without a curve leg")?;
    let entry = TradeLogEntry::from_quote(ledger.height(), leg);
    append_trade_log(&args.out.join("trade_log.csv"), &entry)?;
    let report = serde_json::json!({
        "status": "success",
        "direction": leg.direction.as_str(),
        "input": quote.input.to_string(),
        "output": quote.output.to_string(),
        "fee": exec.receipt.fee.to_string(),
        "postPrice": market::spot_price(&leg.post_state)?,
        "txId": exec.receipt.tx_id.to_string(),
    });
    println!("{report}");
    Ok(())
}

fn append_trade_log(path: &Path, entry: &TradeLogEntry) -> Result<()> {
    let mut text = Vec::new();
    market::write_trade_log(&mut text, std::slice::from_ref(entry))?;
    let fresh = !path.exists();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        file.write_all(&text)?;
    } else {
        let body = text.iter().position(|&b| b == b'\n').map_or(&text[..], |i| &text[i + 1..]);
        file.write_all(body)?;
    }
    Ok(())
}

fn swap_demo(args: &SwapDemoArgs) -> Result<()> {
    if args.delta < 2 {
        bail!("--delta must be at least 2 blocks");
    }
    let demo = swap::run_happy_path(args.delta)?;
    swap::write_audit_log(create(&args.out, "swap_audit.csv")?, &demo.log)?;
    swap::write_audit_log(io::stdout().lock(), &demo.log)?;
    if args.check {
        let cfg = CheckerConfig {
            leg_gap: args.leg_gap.unwrap_or(args.delta),
            ..CheckerConfig::new(args.horizon, args.delta)
        };
        let report = swap::explore(&cfg);
        println!("{}", report.to_json());
        if !report.is_atomic() {
            bail!("{} atomicity violations", report.violations());
        }
    }
    Ok(())
}
