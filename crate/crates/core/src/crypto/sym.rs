//! Deterministic keyed cipher for server-local records.
//!
//! Keystream and tag both come from SHA-256 with domain separation. Equal
//! plaintexts under one key give equal ciphertexts, so ciphertexts work as
//! stable table entries.

use sha2::{Digest as _, Sha256};

use super::{CryptoError, PackedPlaintext};

pub const SYM_TAG_LEN: usize = 16;

fn keystream(key: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 32);
    let mut counter = 0u64;
    while out.len() < len {
        let mut h = Sha256::new();
        h.update(b"tmis-lab/sym/stream");
        h.update((key.len() as u64).to_be_bytes());
        h.update(key);
        h.update(counter.to_be_bytes());
        out.extend(h.finalize());
        counter += 1;
    }
    out.truncate(len);
    out
}

fn tag(key: &[u8], body: &[u8]) -> [u8; SYM_TAG_LEN] {
    let mut h = Sha256::new();
    h.update(b"tmis-lab/sym/tag");
    h.update((key.len() as u64).to_be_bytes());
    h.update(key);
    h.update(body);
    let full = h.finalize();
    full[..SYM_TAG_LEN].try_into().expect("tag length")
}

pub fn sym_encrypt(key: &[u8], plaintext: &PackedPlaintext) -> Result<Vec<u8>, CryptoError> {
    if key.is_empty() {
        return Err(CryptoError::InvalidParams("empty symmetric key".into()));
    }
    let pt = plaintext.to_bytes();
    let mut body: Vec<u8> = pt.iter().zip(keystream(key, pt.len())).map(|(a, b)| a ^ b).collect();
    let t = tag(key, &body);
    body.extend_from_slice(&t);
    Ok(body)
}

pub fn sym_decrypt(key: &[u8], ciphertext: &[u8]) -> Result<PackedPlaintext, CryptoError> {
    if key.is_empty() {
        return Err(CryptoError::InvalidParams("empty symmetric key".into()));
    }
    if ciphertext.len() < SYM_TAG_LEN {
        return Err(CryptoError::DecryptFailure);
    }
    let (body, t) = ciphertext.split_at(ciphertext.len() - SYM_TAG_LEN);
    if tag(key, body) != t {
        return Err(CryptoError::DecryptFailure);
    }
    let pt: Vec<u8> = body.iter().zip(keystream(key, body.len())).map(|(a, b)| a ^ b).collect();
    PackedPlaintext::from_bytes(&pt).map_err(|_| CryptoError::DecryptFailure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::PackLayout;

    fn record() -> PackedPlaintext {
        PackLayout::new(&[("ID", 16), ("N", 16), ("SC", 16)]).pack(&[7u32.into(), 0u32.into(), 42u32.into()]).unwrap()
    }

    #[test]
    fn round_trip() {
        let ct = sym_encrypt(b"server key", &record()).unwrap();
        assert_eq!(sym_decrypt(b"server key", &ct).unwrap(), record());
    }

    #[test]
    fn wrong_key_fails() {
        let ct = sym_encrypt(b"server key", &record()).unwrap();
        assert_eq!(sym_decrypt(b"other key", &ct), Err(CryptoError::DecryptFailure));
    }

    #[test]
    fn deterministic() {
        assert_eq!(sym_encrypt(b"k", &record()).unwrap(), sym_encrypt(b"k", &record()).unwrap());
    }

    #[test]
    fn tampering_is_detected() {
        let mut ct = sym_encrypt(b"k", &record()).unwrap();
        ct[0] ^= 1;
        assert_eq!(sym_decrypt(b"k", &ct), Err(CryptoError::DecryptFailure));
        assert!(sym_encrypt(b"", &record()).is_err());
    }
}
