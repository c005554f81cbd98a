//! Pairwise keys and authenticated share envelopes for the sharing phase.
//!
//! Keys come from HMAC-SHA256 over the ordered node pair, keyed by a
//! deployment-wide master secret, truncated to 128 bits. Shares are sealed
//! with AES-128-GCM; the 96-bit nonce is the round id followed by the chain
//! sub-slot index, and the addressing header is bound as associated data.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use aes_gcm::aead::{AeadInPlace, KeyInit};
use aes_gcm::{Aes128Gcm, Nonce, Tag};
use hmac::{Hmac, Mac};
use sha2::Sha256;

use crate::field::FieldModulus;
use crate::node::NodeId;
use crate::shamir::{PublicPoint, Share};

pub const KEY_LEN: usize = 16;
pub const TAG_LEN: usize = 16;
/// Canonical share encoding: point then value, 8 bytes little-endian each.
pub const SHARE_LEN: usize = 16;
/// sender (4) + destination (4) + round (8) + sub-slot (4) + ciphertext + tag
pub const SEALED_LEN: usize = 20 + SHARE_LEN + TAG_LEN;

const KDF_LABEL: &[u8] = b"minishare/pairwise-key/v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CryptoError {
    SameNode(NodeId),
    NonceReuse {
        pair: (NodeId, NodeId),
        nonce: ShareNonce,
    },
    /// Wrong key, corrupted bytes, or a share not meant for this key.
    Authentication,
    Malformed(usize),
}

impl fmt::Display for CryptoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CryptoError::SameNode(n) => write!(f, "no pairwise key between node {n} and itself"),
            CryptoError::NonceReuse { pair, nonce } => write!(
                f,
                "nonce (round {}, sub-slot {}) already used for pair ({}, {})",
                nonce.round, nonce.sub_slot, pair.0, pair.1
            ),
            CryptoError::Authentication => f.write_str("sealed share failed authentication"),
            CryptoError::Malformed(len) => {
                write!(f, "sealed share must be {SEALED_LEN} bytes, got {len}")
            }
        }
    }
}

impl core::error::Error for CryptoError {}

/// 128-bit deployment master secret.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct MasterSecret(pub [u8; KEY_LEN]);

impl fmt::Debug for MasterSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MasterSecret(..)")
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PairwiseKey {
    bytes: [u8; KEY_LEN],
    pair: (NodeId, NodeId),
}

impl fmt::Debug for PairwiseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairwiseKey")
            .field("pair", &self.pair)
            .finish_non_exhaustive()
    }
}

impl PairwiseKey {
    pub fn bytes(&self) -> &[u8; KEY_LEN] {
        &self.bytes
    }

    /// The pair in ascending order.
    pub fn pair(&self) -> (NodeId, NodeId) {
        self.pair
    }

    fn cipher(&self) -> Aes128Gcm {
        Aes128Gcm::new(&self.bytes.into())
    }
}

pub fn derive_pairwise_key(
    master: &MasterSecret,
    i: NodeId,
    j: NodeId,
) -> Result<PairwiseKey, CryptoError> {
    if i == j {
        return Err(CryptoError::SameNode(i));
    }
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let mut mac =
        <Hmac<Sha256> as Mac>::new_from_slice(&master.0).expect("HMAC takes any key length");
    mac.update(KDF_LABEL);
    mac.update(&lo.0.to_le_bytes());
    mac.update(&hi.0.to_le_bytes());
    let digest = mac.finalize().into_bytes();
    let mut bytes = [0u8; KEY_LEN];
    bytes.copy_from_slice(&digest[..KEY_LEN]);
    Ok(PairwiseKey {
        bytes,
        pair: (lo, hi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShareNonce {
    pub round: u64,
    pub sub_slot: u32,
}

impl ShareNonce {
    fn to_bytes(self) -> [u8; 12] {
        let mut out = [0u8; 12];
        out[..8].copy_from_slice(&self.round.to_le_bytes());
        out[8..].copy_from_slice(&self.sub_slot.to_le_bytes());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedShare {
    pub sender: NodeId,
    pub destination: NodeId,
    pub nonce: ShareNonce,
    pub ciphertext: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

impl SealedShare {
    fn header(sender: NodeId, destination: NodeId, nonce: ShareNonce) -> [u8; 20] {
        let mut h = [0u8; 20];
        h[..4].copy_from_slice(&sender.0.to_le_bytes());
        h[4..8].copy_from_slice(&destination.0.to_le_bytes());
        h[8..16].copy_from_slice(&nonce.round.to_le_bytes());
        h[16..].copy_from_slice(&nonce.sub_slot.to_le_bytes());
        h
    }

    /// Wire form carried in a chain sub-slot.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SEALED_LEN);
        out.extend_from_slice(&Self::header(self.sender, self.destination, self.nonce));
        out.extend_from_slice(&self.ciphertext);
        out.extend_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != SEALED_LEN {
            return Err(CryptoError::Malformed(bytes.len()));
        }
        let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let mut tag = [0u8; TAG_LEN];
        tag.copy_from_slice(&bytes[20 + SHARE_LEN..]);
        Ok(SealedShare {
            sender: NodeId(u32_at(0)),
            destination: NodeId(u32_at(4)),
            nonce: ShareNonce {
                round: u64::from_le_bytes(bytes[8..16].try_into().unwrap()),
                sub_slot: u32_at(16),
            },
            ciphertext: bytes[20..20 + SHARE_LEN].to_vec(),
            tag,
        })
    }
}

pub fn encode_share(share: &Share) -> [u8; SHARE_LEN] {
    let mut out = [0u8; SHARE_LEN];
    out[..8].copy_from_slice(&share.point.x.value().to_le_bytes());
    out[8..].copy_from_slice(&share.value.value().to_le_bytes());
    out
}

/// Seals `share` for `destination`. The caller owns nonce uniqueness; see
/// [`SealingSession`] for a tracked variant.
pub fn seal_share(
    key: &PairwiseKey,
    sender: NodeId,
    destination: NodeId,
    share: &Share,
    nonce: ShareNonce,
) -> SealedShare {
    let mut buf = encode_share(share).to_vec();
    let aad = SealedShare::header(sender, destination, nonce);
    let tag = key
        .cipher()
        .encrypt_in_place_detached(Nonce::from_slice(&nonce.to_bytes()), &aad, &mut buf)
        .expect("16-byte plaintext is within AES-GCM limits");
    SealedShare {
        sender,
        destination,
        nonce,
        ciphertext: buf,
        tag: tag.into(),
    }
}

/// Opens a sealed share. The decoded point is attributed to the addressed
/// destination.
pub fn open_share(
    key: &PairwiseKey,
    sealed: &SealedShare,
    modulus: FieldModulus,
) -> Result<Share, CryptoError> {
    if sealed.ciphertext.len() != SHARE_LEN {
        return Err(CryptoError::Authentication);
    }
    let mut buf = sealed.ciphertext.clone();
    let aad = SealedShare::header(sealed.sender, sealed.destination, sealed.nonce);
    key.cipher()
        .decrypt_in_place_detached(
            Nonce::from_slice(&sealed.nonce.to_bytes()),
            &aad,
            &mut buf,
            Tag::from_slice(&sealed.tag),
        )
        .map_err(|_| CryptoError::Authentication)?;
    let x = u64::from_le_bytes(buf[..8].try_into().unwrap());
    let value = u64::from_le_bytes(buf[8..].try_into().unwrap());
    let q = modulus.get();
    // Authentic but encoded under another field: treat like a foreign packet.
    if x == 0 || x >= q || value >= q {
        return Err(CryptoError::Authentication);
    }
    Ok(Share {
        point: PublicPoint {
            x: modulus.element(x),
            owner: sealed.destination,
        },
        value: modulus.element(value),
    })
}

/// Seals shares for one round and refuses to reuse a nonce under a key.
#[derive(Debug)]
pub struct SealingSession {
    round: u64,
    used: BTreeSet<(NodeId, NodeId, u32)>,
}

impl SealingSession {
    pub fn new(round: u64) -> Self {
        SealingSession {
            round,
            used: BTreeSet::new(),
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn seal(
        &mut self,
        key: &PairwiseKey,
        sender: NodeId,
        destination: NodeId,
        share: &Share,
        sub_slot: u32,
    ) -> Result<SealedShare, CryptoError> {
        let nonce = ShareNonce {
            round: self.round,
            sub_slot,
        };
        let (lo, hi) = key.pair();
        if !self.used.insert((lo, hi, sub_slot)) {
            return Err(CryptoError::NonceReuse {
                pair: (lo, hi),
                nonce,
            });
        }
        Ok(seal_share(key, sender, destination, share, nonce))
    }
}
