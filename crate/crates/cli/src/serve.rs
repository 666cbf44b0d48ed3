use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use anyhow::Result;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use proofware::gateway::{self, render, GatewayError, PriceRequest, SwapRequest, UnsignedTxEnvelope};
use proofware::ledger::Receipt;
use proofware::{Amount, CreditUnitId, Ledger};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::bootstrap::save_ledger;

#[derive(Clone)]
struct AppState {
    ledger: Arc<RwLock<Ledger>>,
    snapshot: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SubmitResponse {
    receipt: Receipt,
    /// The sender's balances after execution.
    balances: BTreeMap<CreditUnitId, Amount>,
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn reply<T: Serialize>(result: Result<T, GatewayError>) -> Response {
    match result {
        Ok(body) => json(StatusCode::OK, render(&body)),
        Err(e) => {
            let status = StatusCode::from_u16(e.status()).unwrap_or(StatusCode::BAD_REQUEST);
            json(status, render(&e.body()))
        }
    }
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T, GatewayError> {
    serde_json::from_str(body).map_err(|e| GatewayError::malformed(e.to_string()))
}

async fn price(State(s): State<AppState>, body: String) -> Response {
    let ledger = s.ledger.read().expect("ledger lock");
    reply(parse::<PriceRequest>(&body).and_then(|r| gateway::handle_price(&ledger, &r)))
}

async fn swap(State(s): State<AppState>, body: String) -> Response {
    let ledger = s.ledger.read().expect("ledger lock");
    reply(parse::<SwapRequest>(&body).and_then(|r| gateway::handle_swap(&ledger, &r)))
}

async fn submit(State(s): State<AppState>, body: String) -> Response {
    let mut ledger = s.ledger.write().expect("ledger lock");
    let result = parse::<UnsignedTxEnvelope>(&body).and_then(|env| {
        let receipt = gateway::submit(&mut ledger, &env)?;
        let next = ledger.last_block().timestamp + 1;
        ledger.seal_block(next)?;
        let sender = gateway::decode_envelope(&env)?.from;
        let balances = ledger
            .balances_of(&sender)
            .map(|(c, a)| (c.clone(), *a))
            .collect();
        Ok(SubmitResponse { receipt, balances })
    });
    if result.is_ok() {
        if let Some(path) = &s.snapshot {
            if let Err(e) = save_ledger(&ledger, path) {
                eprintln!("warning: snapshot not saved: {e:#}");
            }
        }
    }
    reply(result)
}

pub fn router(ledger: Ledger, snapshot: Option<PathBuf>) -> Router {
    let state = AppState {
        ledger: Arc::new(RwLock::new(ledger)),
        snapshot,
    };
    Router::new()
        .route("/1.0/price", post(price))
        .route("/1.0/swap", post(swap))
        .route("/1.0/submit", post(submit))
        .with_state(state)
}

pub fn run(ledger: Ledger, port: u16, snapshot: Option<PathBuf>) -> Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(ledger, snapshot))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
