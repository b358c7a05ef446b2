//! In-process, tamper-evident opinion collector: validator registry with
//! surety escrow, a role-gated opinion store, and a hash-chained
//! transaction log.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("validator {0} is already registered")]
    DuplicateValidator(Address),
    #[error("access denied: {caller} may not call {operation}")]
    AccessDenied {
        caller: Address,
        operation: &'static str,
    },
    #[error("invalid ledger state: {0}")]
    State(String),
}

/// Opaque identity token for a participant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Address(String);

impl Address {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Coordinator,
    Validator,
    Other,
}

/// Registry view of one participant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Account {
    pub address: Address,
    /// Escrowed surety for validators; zero otherwise.
    pub balance: f64,
    pub role: Role,
}

/// Outcome of a registration attempt that is not an error: the contract
/// reports underpayment as a plain failure, not a fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TxPayload {
    AddValidator { address: Address, payment: f64 },
    Setup { capacity: usize },
    SetOpinion {
        caller: Address,
        key: usize,
        opinion: Vec<bool>,
    },
}

/// One log entry: `hash = SHA-256(payload_json || prev_hash)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TxEntry {
    pub index: u64,
    pub payload: TxPayload,
    #[serde(serialize_with = "hex_bytes")]
    pub prev_hash: [u8; 32],
    #[serde(serialize_with = "hex_bytes")]
    pub hash: [u8; 32],
}

fn hex_bytes<S: serde::Serializer>(bytes: &[u8; 32], serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&hex::encode(bytes))
}

pub const DEFAULT_SURETY_FEE: f64 = 0.005;

const GENESIS_HASH: [u8; 32] = [0; 32];

fn chain_hash(payload: &TxPayload, prev_hash: &[u8; 32]) -> [u8; 32] {
    let bytes = serde_json::to_vec(payload).expect("payload serializes");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hasher.update(prev_hash);
    hasher.finalize().into()
}

/// The opinion-collector state machine. One logical owner; callers are
/// identified by address and checked against the registry on every call.
#[derive(Debug, Clone)]
pub struct Ledger {
    coordinator: Address,
    surety_fee: f64,
    validators: Vec<Address>,
    escrow: BTreeMap<Address, f64>,
    store: Option<Vec<Option<Vec<bool>>>>,
    log: Vec<TxEntry>,
}

impl Ledger {
    /// Creates a ledger owned by `coordinator` with the default surety fee.
    pub fn new(coordinator: Address) -> Self {
        Self {
            coordinator,
            surety_fee: DEFAULT_SURETY_FEE,
            validators: Vec::new(),
            escrow: BTreeMap::new(),
            store: None,
            log: Vec::new(),
        }
    }

    pub fn with_fee(coordinator: Address, surety_fee: f64) -> Result<Self, LedgerError> {
        if surety_fee <= 0.0 || !surety_fee.is_finite() {
            return Err(LedgerError::State("surety fee must be > 0".into()));
        }
        let mut ledger = Self::new(coordinator);
        ledger.surety_fee = surety_fee;
        Ok(ledger)
    }

    pub fn coordinator(&self) -> &Address {
        &self.coordinator
    }

    pub fn surety_fee(&self) -> f64 {
        self.surety_fee
    }

    pub fn validators(&self) -> &[Address] {
        &self.validators
    }

    pub fn role_of(&self, address: &Address) -> Role {
        if *address == self.coordinator {
            Role::Coordinator
        } else if self.validators.contains(address) {
            Role::Validator
        } else {
            Role::Other
        }
    }

    pub fn account(&self, address: &Address) -> Account {
        Account {
            address: address.clone(),
            balance: self.escrow.get(address).copied().unwrap_or(0.0),
            role: self.role_of(address),
        }
    }

    fn append(&mut self, payload: TxPayload) {
        let prev_hash = self.log.last().map(|e| e.hash).unwrap_or(GENESIS_HASH);
        let hash = chain_hash(&payload, &prev_hash);
        self.log.push(TxEntry {
            index: self.log.len() as u64,
            payload,
            prev_hash,
            hash,
        });
    }

    /// Registers `caller` as a validator when the payment strictly exceeds
    /// the surety fee. Underpayment leaves the ledger untouched.
    pub fn add_validator(
        &mut self,
        caller: &Address,
        payment: f64,
    ) -> Result<Admission, LedgerError> {
        if self.validators.contains(caller) {
            return Err(LedgerError::DuplicateValidator(caller.clone()));
        }
        // strictly greater than the fee; NaN payments are rejections too
        if payment.is_nan() || payment <= self.surety_fee {
            return Ok(Admission::Rejected);
        }
        self.validators.push(caller.clone());
        self.escrow.insert(caller.clone(), payment);
        self.append(TxPayload::AddValidator {
            address: caller.clone(),
            payment,
        });
        Ok(Admission::Accepted)
    }

    /// Coordinator-only: clears the opinion store and sizes it for
    /// `capacity` keys. Calling it again resets the store.
    pub fn setup(&mut self, caller: &Address, capacity: usize) -> Result<(), LedgerError> {
        if *caller != self.coordinator {
            return Err(LedgerError::AccessDenied {
                caller: caller.clone(),
                operation: "setup",
            });
        }
        self.store = Some(vec![None; capacity]);
        self.append(TxPayload::Setup { capacity });
        Ok(())
    }

    /// Writes one opinion row. Open to registered validators and the
    /// coordinator once the store has been set up.
    pub fn set_opinion(
        &mut self,
        caller: &Address,
        key: usize,
        opinion: Vec<bool>,
    ) -> Result<(), LedgerError> {
        if self.role_of(caller) == Role::Other {
            return Err(LedgerError::AccessDenied {
                caller: caller.clone(),
                operation: "set_opinion",
            });
        }
        let store = self
            .store
            .as_mut()
            .ok_or_else(|| LedgerError::State("store not initialized; call setup first".into()))?;
        if key >= store.len() {
            return Err(LedgerError::State(format!(
                "key {key} out of range for store capacity {}",
                store.len()
            )));
        }
        store[key] = Some(opinion.clone());
        self.append(TxPayload::SetOpinion {
            caller: caller.clone(),
            key,
            opinion,
        });
        Ok(())
    }

    /// Coordinator-only snapshot of every written opinion row.
    pub fn get_opinion(
        &self,
        caller: &Address,
    ) -> Result<BTreeMap<usize, Vec<bool>>, LedgerError> {
        if *caller != self.coordinator {
            return Err(LedgerError::AccessDenied {
                caller: caller.clone(),
                operation: "get_opinion",
            });
        }
        let mut snapshot = BTreeMap::new();
        if let Some(store) = &self.store {
            for (key, row) in store.iter().enumerate() {
                if let Some(opinion) = row {
                    snapshot.insert(key, opinion.clone());
                }
            }
        }
        Ok(snapshot)
    }

    /// True iff every log entry's hash and back-link validate.
    pub fn verify_chain(&self) -> bool {
        let mut prev = GENESIS_HASH;
        for entry in &self.log {
            if entry.prev_hash != prev || entry.hash != chain_hash(&entry.payload, &prev) {
                return false;
            }
            prev = entry.hash;
        }
        true
    }

    pub fn entries(&self) -> &[TxEntry] {
        &self.log
    }

    /// Hash of the latest entry, if any.
    pub fn root_hash(&self) -> Option<String> {
        self.log.last().map(|e| hex::encode(e.hash))
    }

    /// Writes the transaction log as JSONL for audit tooling.
    pub fn dump_jsonl<W: Write>(&self, mut writer: W) -> io::Result<()> {
        for entry in &self.log {
            serde_json::to_writer(&mut writer, entry)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Adversarial-test hook: overwrites a logged payload in place without
    /// re-hashing, so tamper evidence can be exercised. Returns false when
    /// the index is out of range.
    pub fn tamper_payload(&mut self, index: usize, payload: TxPayload) -> bool {
        match self.log.get_mut(index) {
            Some(entry) => {
                entry.payload = payload;
                true
            }
            None => false,
        }
    }

    /// Adversarial-test hook: overwrites a stored hash in place.
    pub fn tamper_hash(&mut self, index: usize, hash: [u8; 32]) -> bool {
        match self.log.get_mut(index) {
            Some(entry) => {
                entry.hash = hash;
                true
            }
            None => false,
        }
    }
}
