//! Tokenization shared by the comment matcher and the feature hasher.

/// Lowercases `text` and splits it on every non-alphanumeric character.
/// Punctuation is dropped and empty pieces are skipped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(|piece| piece.to_lowercase())
        .collect()
}

/// 64-bit FNV-1a. Used for feature hashing because its output is stable
/// across platforms and compiler versions, which keeps checkpoints portable.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |hash, &b| (hash ^ u64::from(b)).wrapping_mul(PRIME))
}
