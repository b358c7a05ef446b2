//! Encrypted, content-addressed weight transfer: a canonical binary codec
//! for weight vectors, authenticated hybrid encryption to a recipient's
//! public key, and an in-process store keyed by the ciphertext digest.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self};
use std::path::Path;

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;
use x25519_dalek::{EphemeralSecret, PublicKey, StaticSecret};

use crate::model::WeightVector;

#[derive(Debug, Error)]
pub enum VaultError {
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("decryption failed")]
    Decrypt,
    #[error("content {0} not found")]
    NotFound(Cid),
    #[error("stored content for {0} no longer matches its digest")]
    Integrity(Cid),
}

/// Recipient keypair for hybrid encryption.
pub struct KeyPair {
    secret: StaticSecret,
    public: PublicKey,
}

impl KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let secret = StaticSecret::random_from_rng(rng);
        let public = PublicKey::from(&secret);
        Self { secret, public }
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn secret(&self) -> &StaticSecret {
        &self.secret
    }
}

/// Version tag for the weight codec.
pub const WEIGHT_CODEC_V1: u8 = 1;

/// Canonical little-endian encoding of a weight vector. Equal vectors
/// always produce identical bytes; non-finite entries are rejected.
pub fn serialize_weights(weights: &WeightVector) -> Result<Vec<u8>, VaultError> {
    if !weights.is_finite() {
        return Err(VaultError::Encoding(
            "weight vector contains non-finite entries".into(),
        ));
    }
    let n = u32::try_from(weights.coefficients.len())
        .map_err(|_| VaultError::Encoding("too many coefficients".into()))?;
    let mut bytes = Vec::with_capacity(1 + 8 + 4 + 8 * (weights.coefficients.len() + 1));
    bytes.push(WEIGHT_CODEC_V1);
    bytes.extend_from_slice(&weights.sample_count.to_le_bytes());
    bytes.extend_from_slice(&n.to_le_bytes());
    for c in &weights.coefficients {
        bytes.extend_from_slice(&c.to_le_bytes());
    }
    bytes.extend_from_slice(&weights.intercept.to_le_bytes());
    Ok(bytes)
}

/// Strict inverse of [`serialize_weights`]; trailing bytes, unknown
/// versions, and non-finite values are all errors.
pub fn deserialize_weights(bytes: &[u8]) -> Result<WeightVector, VaultError> {
    let err = |msg: &str| VaultError::Encoding(msg.into());
    if bytes.len() < 1 + 8 + 4 + 8 {
        return Err(err("payload too short"));
    }
    if bytes[0] != WEIGHT_CODEC_V1 {
        return Err(err("unknown codec version"));
    }
    let sample_count = u64::from_le_bytes(bytes[1..9].try_into().unwrap());
    let n = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let expected_len = 13 + 8 * (n + 1);
    if bytes.len() != expected_len {
        return Err(err("payload length does not match coefficient count"));
    }
    let mut values = bytes[13..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let coefficients: Vec<f64> = values.by_ref().take(n).collect();
    let intercept = values.next().unwrap();
    let weights = WeightVector {
        coefficients,
        intercept,
        sample_count,
    };
    if !weights.is_finite() {
        return Err(err("decoded weight vector contains non-finite entries"));
    }
    Ok(weights)
}

const KDF_CONTEXT: &[u8] = b"fedvet.hybrid.v1";
const NONCE_CONTEXT: &[u8] = b"fedvet.nonce.v1";

fn derive_key(shared: &[u8; 32], ephemeral: &PublicKey, recipient: &PublicKey) -> Key {
    let mut hasher = Sha256::new();
    hasher.update(KDF_CONTEXT);
    hasher.update(shared);
    hasher.update(ephemeral.as_bytes());
    hasher.update(recipient.as_bytes());
    Key::from(<[u8; 32]>::from(hasher.finalize()))
}

fn derive_nonce(ephemeral: &PublicKey, recipient: &PublicKey) -> Nonce {
    let mut hasher = Sha256::new();
    hasher.update(NONCE_CONTEXT);
    hasher.update(ephemeral.as_bytes());
    hasher.update(recipient.as_bytes());
    let digest = hasher.finalize();
    Nonce::clone_from_slice(&digest[..12])
}

/// Encrypts `plaintext` so only the holder of the matching secret can read
/// it: an ephemeral X25519 agreement keyed into ChaCha20-Poly1305. Output
/// is `ephemeral_public (32 bytes) || ciphertext`.
pub fn encrypt_for<R: RngCore + CryptoRng>(
    recipient: &PublicKey,
    plaintext: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let ephemeral = EphemeralSecret::random_from_rng(&mut *rng);
    let ephemeral_public = PublicKey::from(&ephemeral);
    let shared = ephemeral.diffie_hellman(recipient);
    let key = derive_key(shared.as_bytes(), &ephemeral_public, recipient);
    let nonce = derive_nonce(&ephemeral_public, recipient);
    let sealed = ChaCha20Poly1305::new(&key)
        .encrypt(&nonce, plaintext)
        .expect("encryption is infallible for in-memory payloads");
    let mut out = Vec::with_capacity(32 + sealed.len());
    out.extend_from_slice(ephemeral_public.as_bytes());
    out.extend_from_slice(&sealed);
    out
}

/// Opens a ciphertext produced by [`encrypt_for`]. Any bit flip, wrong
/// key, or truncation fails authentication.
pub fn decrypt(secret: &StaticSecret, ciphertext: &[u8]) -> Result<Vec<u8>, VaultError> {
    if ciphertext.len() < 32 + 16 {
        return Err(VaultError::Decrypt);
    }
    let ephemeral_public = PublicKey::from(<[u8; 32]>::try_from(&ciphertext[..32]).unwrap());
    let recipient = PublicKey::from(secret);
    let shared = secret.diffie_hellman(&ephemeral_public);
    let key = derive_key(shared.as_bytes(), &ephemeral_public, &recipient);
    let nonce = derive_nonce(&ephemeral_public, &recipient);
    ChaCha20Poly1305::new(&key)
        .decrypt(&nonce, &ciphertext[32..])
        .map_err(|_| VaultError::Decrypt)
}

/// Content identifier: the SHA-256 digest of the stored bytes plus a
/// codec/version tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cid {
    digest: [u8; 32],
    codec_tag: u8,
}

/// Version marker carried by every CID this store mints.
pub const CID_CODEC_V1: u8 = 1;

impl Cid {
    pub fn of(bytes: &[u8]) -> Self {
        Self {
            digest: Sha256::digest(bytes).into(),
            codec_tag: CID_CODEC_V1,
        }
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn codec_tag(&self) -> u8 {
        self.codec_tag
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.digest)
    }

    pub fn from_hex(hex_digest: &str) -> Result<Self, VaultError> {
        let raw = hex::decode(hex_digest)
            .map_err(|e| VaultError::Encoding(format!("bad cid hex: {e}")))?;
        let digest: [u8; 32] = raw
            .try_into()
            .map_err(|_| VaultError::Encoding("cid digest must be 32 bytes".into()))?;
        Ok(Self {
            digest,
            codec_tag: CID_CODEC_V1,
        })
    }
}

impl fmt::Display for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Clone)]
struct StoredEntry {
    bytes: Vec<u8>,
    pinned: bool,
}

/// In-process content-addressed store. `put` is idempotent; `get`
/// re-checks the digest so silent corruption surfaces as an error.
#[derive(Debug, Clone, Default)]
pub struct VaultStore {
    entries: BTreeMap<Cid, StoredEntry>,
}

impl VaultStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, cid: &Cid) -> bool {
        self.entries.contains_key(cid)
    }

    /// Stores `bytes` under their digest. Storing the same content twice
    /// keeps a single copy and returns the same CID.
    pub fn put(&mut self, bytes: Vec<u8>) -> Cid {
        let cid = Cid::of(&bytes);
        self.entries
            .entry(cid)
            .or_insert(StoredEntry { bytes, pinned: false });
        cid
    }

    pub fn get(&self, cid: &Cid) -> Result<&[u8], VaultError> {
        let entry = self.entries.get(cid).ok_or(VaultError::NotFound(*cid))?;
        if Cid::of(&entry.bytes) != *cid {
            return Err(VaultError::Integrity(*cid));
        }
        Ok(&entry.bytes)
    }

    /// Protects an entry from garbage collection.
    pub fn pin(&mut self, cid: &Cid) -> Result<(), VaultError> {
        let entry = self.entries.get_mut(cid).ok_or(VaultError::NotFound(*cid))?;
        entry.pinned = true;
        Ok(())
    }

    /// Evicts every unpinned entry and returns how many were removed.
    pub fn gc(&mut self) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, entry| entry.pinned);
        before - self.entries.len()
    }

    /// Adversarial-test hook: mutates stored bytes in place without
    /// updating the key, so integrity checking can be exercised.
    pub fn tamper(
        &mut self,
        cid: &Cid,
        mutate: impl FnOnce(&mut Vec<u8>),
    ) -> Result<(), VaultError> {
        let entry = self.entries.get_mut(cid).ok_or(VaultError::NotFound(*cid))?;
        mutate(&mut entry.bytes);
        Ok(())
    }

    /// Writes one file per entry into `dir`, named by the hex digest.
    pub fn persist_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (cid, entry) in &self.entries {
            fs::write(dir.join(cid.to_hex()), &entry.bytes)?;
        }
        Ok(())
    }

    /// Loads a directory written by [`VaultStore::persist_to`], verifying every file
    /// against its filename digest. Pins are not persisted.
    pub fn load_from(dir: &Path) -> Result<Self, VaultError> {
        let mut store = Self::new();
        let entries = fs::read_dir(dir).map_err(|e| VaultError::Encoding(e.to_string()))?;
        for entry in entries {
            let entry = entry.map_err(|e| VaultError::Encoding(e.to_string()))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let expected = Cid::from_hex(&name)?;
            let bytes = fs::read(entry.path()).map_err(|e| VaultError::Encoding(e.to_string()))?;
            if Cid::of(&bytes) != expected {
                return Err(VaultError::Integrity(expected));
            }
            store.put(bytes);
        }
        Ok(store)
    }
}
