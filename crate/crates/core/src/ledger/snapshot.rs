//! Line-delimited JSON snapshots of ledger state.
//!
//! One record per line, in a fixed order (header, credits, adaptors, blocks,
//! pending, nonces, balances, contracts), each group sorted by key so two
//! snapshots of equal state are byte-identical. Execution history is not
//! part of a snapshot.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Block, CreditInfo, CreditUnitId, GasSchedule, Ledger};
use crate::address::{Address, Hash32};
use crate::amount::Amount;
use crate::market::CreditAdaptor;
use crate::swap::SwapContract;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot io: {0}")]
    Io(#[from] io::Error),
    #[error("snapshot line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("snapshot has no header record")]
    MissingHeader,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("snapshot has no blocks")]
    NoBlocks,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "camelCase")]
enum Record {
    #[serde(rename_all = "camelCase")]
    Header {
        version: u32,
        gas_schedule: GasSchedule,
        #[serde(with = "u128_string")]
        gas_price: u128,
        registrations: u64,
    },
    Credit(CreditInfo),
    Adaptor(CreditAdaptor),
    Block(Block),
    #[serde(rename_all = "camelCase")]
    Pending { tx_id: Hash32 },
    Nonce { address: Address, nonce: u64 },
    Balance {
        address: Address,
        credit: CreditUnitId,
        balance: Amount,
    },
    Contract(SwapContract),
}

// Internally tagged records cannot carry 128-bit integers directly.
mod u128_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl Ledger {
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<(), SnapshotError> {
        let mut emit = |r: Record| -> Result<(), SnapshotError> {
            serde_json::to_writer(&mut out, &r).map_err(io::Error::from)?;
            out.write_all(b"\n")?;
            Ok(())
        };
        emit(Record::Header {
            version: SNAPSHOT_VERSION,
            gas_schedule: self.gas_schedule,
            gas_price: self.gas_price,
            registrations: self.registrations,
        })?;
        for c in self.credits.values() {
            emit(Record::Credit(c.clone()))?;
        }
        for a in self.adaptors.values() {
            emit(Record::Adaptor(a.clone()))?;
        }
        for b in &self.blocks {
            emit(Record::Block(b.clone()))?;
        }
        for tx_id in &self.pending {
            emit(Record::Pending { tx_id: *tx_id })?;
        }
        for (address, nonce) in &self.nonces {
            emit(Record::Nonce {
                address: *address,
                nonce: *nonce,
            })?;
        }
        for (address, held) in &self.balances {
            for (credit, balance) in held {
                emit(Record::Balance {
                    address: *address,
                    credit: credit.clone(),
                    balance: *balance,
                })?;
            }
        }
        for c in self.contracts.values() {
            emit(Record::Contract(c.clone()))?;
        }
        Ok(())
    }

    pub fn snapshot_string(&self) -> String {
        let mut out = Vec::new();
        self.write_snapshot(&mut out).expect("in-memory write");
        String::from_utf8(out).expect("snapshot is utf-8")
    }

    pub fn read_snapshot<R: BufRead>(input: R) -> Result<Ledger, SnapshotError> {
        let mut ledger: Option<Ledger> = None;
        let mut blocks = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line)
                .map_err(|source| SnapshotError::Parse { line: i + 1, source })?;
            if let Record::Header {
                version,
                gas_schedule,
                gas_price,
                registrations,
            } = record
            {
                if version != SNAPSHOT_VERSION {
                    return Err(SnapshotError::Version(version));
                }
                let mut l = Ledger::new(gas_schedule, gas_price);
                l.credits.clear();
                l.names.clear();
                l.blocks.clear();
                l.registrations = registrations;
                ledger = Some(l);
                continue;
            }
            let l = ledger.as_mut().ok_or(SnapshotError::MissingHeader)?;
            match record {
                Record::Header { .. } => unreachable!(),
                Record::Credit(c) => {
                    l.names.insert(c.name.clone(), c.id.clone());
                    l.credits.insert(c.id.clone(), c);
                }
                Record::Adaptor(a) => {
                    l.adaptors.insert(a.credit.clone(), a);
                }
                Record::Block(b) => blocks.push(b),
                Record::Pending { tx_id } => l.pending.push(tx_id),
                Record::Nonce { address, nonce } => {
                    l.nonces.insert(address, nonce);
                }
                Record::Balance {
                    address,
                    credit,
                    balance,
                } => {
                    l.balances
                        .entry(address)
                        .or_insert_with(BTreeMap::new)
                        .insert(credit, balance);
                }
                Record::Contract(c) => {
                    l.contracts.insert(c.id, c);
                }
            }
        }
        let mut ledger = ledger.ok_or(SnapshotError::MissingHeader)?;
        if blocks.is_empty() {
            return Err(SnapshotError::NoBlocks);
        }
        ledger.blocks = blocks;
        ledger.history = Vec::new();
        ledger.by_id = HashMap::new();
        Ok(ledger)
    }
}
