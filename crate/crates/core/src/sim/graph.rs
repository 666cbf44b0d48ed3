use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use thiserror::Error;

use crate::address::Address;
use crate::ledger::{CreditUnitId, ExecutedTx, MarketCall, TxKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("no transactions to build a graph from")]
    EmptyInput,
    #[error("graph has no edges")]
    NoEdges,
    #[error("node {0} has no community")]
    Uncovered(Address),
}

/// Undirected, weighted transaction graph between user addresses. Edge keys
/// are stored with the smaller address first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransactionGraph {
    pub nodes: BTreeSet<Address>,
    pub edges: BTreeMap<(Address, Address), u64>,
    pub partition: BTreeMap<Address, CreditUnitId>,
}

impl TransactionGraph {
    pub fn add_edge(&mut self, a: Address, b: Address, weight: u64) {
        self.nodes.insert(a);
        self.nodes.insert(b);
        if a != b && weight > 0 {
            *self.edges.entry((a.min(b), a.max(b))).or_insert(0) += weight;
        }
    }

    pub fn communities(&self) -> BTreeSet<&CreditUnitId> {
        self.partition.values().collect()
    }
}

fn tx_credit(e: &ExecutedTx) -> CreditUnitId {
    match e.tx.kind {
        TxKind::MarketTrade => MarketCall::decode(&e.tx.payload)
            .map(|c| c.app_credit())
            .unwrap_or_else(|_| e.tx.credit.clone()),
        TxKind::Transfer | TxKind::SwapStep => e.tx.credit.clone(),
    }
}

/// Counts transactions between user addresses and assigns each address the
/// credit it transacted most often. Ties go to the smallest credit id.
pub fn build_transaction_graph(txs: &[ExecutedTx]) -> Result<TransactionGraph, GraphError> {
    if txs.is_empty() {
        return Err(GraphError::EmptyInput);
    }
    let mut graph = TransactionGraph::default();
    let mut usage: BTreeMap<Address, BTreeMap<CreditUnitId, u64>> = BTreeMap::new();
    for e in txs {
        let credit = tx_credit(e);
        let (from, to) = (e.tx.from, e.tx.to);
        for addr in [from, to] {
            if !addr.is_system() {
                graph.nodes.insert(addr);
                *usage.entry(addr).or_default().entry(credit.clone()).or_insert(0) += 1;
            }
            if from == to {
                break;
            }
        }
        if !from.is_system() && !to.is_system() {
            graph.add_edge(from, to, 1);
        }
    }
    for (addr, counts) in usage {
        // BTreeMap iterates ids in order, so keeping the first maximum
        // implements the lexicographic tie-break.
        let mut best: Option<(&CreditUnitId, u64)> = None;
        for (credit, &n) in &counts {
            if best.is_none_or(|(_, m)| n > m) {
                best = Some((credit, n));
            }
        }
        let (credit, _) = best.expect("every node has at least one transaction");
        graph.partition.insert(addr, credit.clone());
    }
    Ok(graph)
}

/// Newman modularity of the graph's partition.
pub fn modularity(graph: &TransactionGraph) -> Result<f64, GraphError> {
    let m: u64 = graph.edges.values().sum();
    if m == 0 {
        return Err(GraphError::NoEdges);
    }
    let label = |a: &Address| graph.partition.get(a).ok_or(GraphError::Uncovered(*a));
    let mut inside: BTreeMap<&CreditUnitId, u64> = BTreeMap::new();
    let mut degree: BTreeMap<&CreditUnitId, u64> = BTreeMap::new();
    for (&(a, b), &w) in &graph.edges {
        let (ca, cb) = (label(&a)?, label(&b)?);
        if ca == cb {
            *inside.entry(ca).or_insert(0) += w;
        }
        *degree.entry(ca).or_insert(0) += w;
        *degree.entry(cb).or_insert(0) += w;
    }
    let m = m as f64;
    Ok(degree
        .iter()
        .map(|(c, &d)| {
            let e = inside.get(c).copied().unwrap_or(0) as f64;
            let share = d as f64 / (2.0 * m);
            e / m - share * share
        })
        .sum())
}

/// One `from to weight` line per edge.
pub fn write_edge_list<W: Write>(mut out: W, graph: &TransactionGraph) -> io::Result<()> {
    for ((a, b), w) in &graph.edges {
        writeln!(out, "{a} {b} {w}")?;
    }
    out.flush()
}

/// One `node community` line per node.
pub fn write_communities<W: Write>(mut out: W, graph: &TransactionGraph) -> io::Result<()> {
    for (node, credit) in &graph.partition {
        writeln!(out, "{node} {credit}")?;
    }
    out.flush()
}
