//! Stable 64-bit FNV-1a hashing.
//!
//! Used wherever a platform- and release-independent hash is required
//! (template selection, parameter seeding). `std`'s hasher is not stable
//! across releases, so it is never used for anything persisted.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Hash a sequence of byte fields with length framing, so that
/// `("ab", "c")` and `("a", "bc")` hash differently.
pub fn fnv1a64_fields(fields: &[&[u8]]) -> u64 {
    let mut bytes = Vec::new();
    for field in fields {
        bytes.extend_from_slice(&(field.len() as u64).to_le_bytes());
        bytes.extend_from_slice(field);
    }
    fnv1a64(&bytes)
}
