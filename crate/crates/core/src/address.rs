use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// 20-byte account identifier, rendered as `0x` followed by 40 lowercase hex digits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address([u8; 20]);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid address `{0}`: expected 0x followed by 40 hex digits")]
pub struct AddressParseError(pub String);

impl Address {
    pub const fn from_bytes(bytes: [u8; 20]) -> Self {
        Address(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Deterministic address for a label, used for bots, treasuries and
    /// system accounts.
    pub fn derive(label: &str) -> Self {
        let digest: [u8; 32] = Sha256::digest(label.as_bytes()).into();
        let mut bytes = [0u8; 20];
        bytes.copy_from_slice(&digest[..20]);
        Address(bytes)
    }

    /// Counterparty of every market trade; holds no balances.
    pub fn market() -> Self {
        Address::derive("proofware/market")
    }

    /// Collects transaction fees.
    pub fn fee_sink() -> Self {
        Address::derive("proofware/fee-sink")
    }

    pub fn is_system(&self) -> bool {
        *self == Address::market() || *self == Address::fee_sink()
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Address {
    type Err = AddressParseError;

    /// Accepts either case, so checksummed addresses parse too.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AddressParseError(s.to_string());
        let body = s.strip_prefix("0x").ok_or_else(err)?;
        if body.len() != 40 {
            return Err(err());
        }
        let mut bytes = [0u8; 20];
        hex::decode_to_slice(body, &mut bytes).map_err(|_| err())?;
        Ok(Address(bytes))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// 32-byte SHA-256 digest used for transaction ids, contract ids and hashlocks.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hash32(pub [u8; 32]);

impl Hash32 {
    pub fn sha256(data: &[u8]) -> Self {
        Hash32(Sha256::digest(data).into())
    }
}

impl fmt::Display for Hash32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Hash32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Hash32 {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.strip_prefix("0x").unwrap_or(s);
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(body, &mut bytes)?;
        Ok(Hash32(bytes))
    }
}

impl Serialize for Hash32 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Hash32 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lowercase_and_round_trips() {
        let a: Address = "0x0788a4c4Ff559eCe29C0a670E0eD76cB3e626511".parse().unwrap();
        let s = a.to_string();
        assert_eq!(s, "0x0788a4c4ff559ece29c0a670e0ed76cb3e626511");
        assert_eq!(s.len(), 42);
        assert_eq!(s.parse::<Address>().unwrap(), a);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!("0x1234".parse::<Address>().is_err());
        assert!("0788a4c4ff559ece29c0a670e0ed76cb3e626511".parse::<Address>().is_err());
        assert!("0xzz88a4c4ff559ece29c0a670e0ed76cb3e626511".parse::<Address>().is_err());
    }

    #[test]
    fn derived_addresses_are_stable() {
        assert_eq!(Address::derive("bot/1"), Address::derive("bot/1"));
        assert_ne!(Address::derive("bot/1"), Address::derive("bot/2"));
        assert!(Address::market().is_system());
    }
}
