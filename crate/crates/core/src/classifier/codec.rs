//! Binary model container.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "TMV1" | version u32 | dim u32 | weights f64 x (7 * dim) | bias f64 x 7
//!        | max_ngram u32 | overlap u8 | max_tokens u32 | crc32 u32
//! ```
//!
//! The CRC covers every byte before it.

use super::features::FeatureConfig;
use super::model::ModelParams;
use super::ClassifierError;
use crate::taxonomy::NUM_LABELS;

pub const MODEL_MAGIC: &[u8; 4] = b"TMV1";
pub const MODEL_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 4;
const FEATURE_BLOCK_LEN: usize = 4 + 1 + 4;
const CRC_LEN: usize = 4;

fn expected_len(dim: usize) -> usize {
    HEADER_LEN + 8 * NUM_LABELS * dim + 8 * NUM_LABELS + FEATURE_BLOCK_LEN + CRC_LEN
}

pub fn save_model(model: &ModelParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(expected_len(model.dim));
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.dim as u32).to_le_bytes());
    for w in model.weights.iter().chain(&model.bias) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&model.features.max_ngram.to_le_bytes());
    out.push(u8::from(model.features.overlap));
    out.extend_from_slice(&model.features.max_tokens.to_le_bytes());
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut buf = [0u8; N];
        buf.copy_from_slice(&self.bytes[self.pos..self.pos + N]);
        self.pos += N;
        buf
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

pub fn load_model(bytes: &[u8]) -> Result<ModelParams, ClassifierError> {
    let corrupt = |msg: String| ClassifierError::CorruptModel(msg);
    if bytes.len() < MODEL_MAGIC.len() {
        return Err(corrupt(format!("{} bytes is too short for a header", bytes.len())));
    }
    if &bytes[..4] != MODEL_MAGIC {
        return Err(ClassifierError::VersionMismatch(format!(
            "bad magic {:02x?}",
            &bytes[..4]
        )));
    }
    if bytes.len() < HEADER_LEN {
        return Err(corrupt("truncated header".into()));
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32();
    if version != MODEL_VERSION {
        return Err(ClassifierError::VersionMismatch(format!(
            "version {version}, expected {MODEL_VERSION}"
        )));
    }
    let dim = r.u32() as usize;
    if dim == 0 || !dim.is_power_of_two() {
        return Err(corrupt(format!("dimension {dim} is not a power of two")));
    }
    if bytes.len() != expected_len(dim) {
        return Err(corrupt(format!(
            "length {} does not match {} expected for dimension {dim}",
            bytes.len(),
            expected_len(dim)
        )));
    }
    let body = &bytes[..bytes.len() - CRC_LEN];
    let stored = u32::from_le_bytes(bytes[bytes.len() - CRC_LEN..].try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored {
        return Err(corrupt("checksum mismatch".into()));
    }
    let weights: Vec<f64> = (0..NUM_LABELS * dim).map(|_| r.f64()).collect();
    let mut bias = [0.0; NUM_LABELS];
    for b in &mut bias {
        *b = r.f64();
    }
    let max_ngram = r.u32();
    let overlap = match r.take::<1>()[0] {
        0 => false,
        1 => true,
        other => return Err(corrupt(format!("overlap flag {other}"))),
    };
    let max_tokens = r.u32();
    let model = ModelParams {
        dim,
        weights,
        bias,
        features: FeatureConfig {
            max_ngram,
            overlap,
            max_tokens,
        },
    };
    if !model.is_finite() {
        return Err(corrupt("non-finite parameter".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(dim: usize, seed: u64) -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = ModelParams::zeros(dim, FeatureConfig { max_ngram: 2, overlap: true, max_tokens: 64 }).unwrap();
        for w in m.weights.iter_mut().chain(m.bias.iter_mut()) {
            *w = rng.random_range(-3.0..3.0);
        }
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = random_model(32, 11);
        let bytes = save_model(&m);
        assert_eq!(&bytes[..4], b"TMV1");
        assert_eq!(bytes.len(), expected_len(32));
        let back = load_model(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_model(&back), bytes);
    }

    #[test]
    fn truncated_is_corrupt() {
        let bytes = save_model(&random_model(16, 1));
        for cut in [bytes.len() - 1, bytes.len() / 2, 10, 2] {
            assert!(matches!(load_model(&bytes[..cut]), Err(ClassifierError::CorruptModel(_))), "cut {cut}");
        }
    }

    #[test]
    fn flipped_byte_is_corrupt() {
        let mut bytes = save_model(&random_model(16, 2));
        bytes[40] ^= 0x01;
        assert!(matches!(load_model(&bytes), Err(ClassifierError::CorruptModel(_))));
    }

    #[test]
    fn wrong_magic_or_version() {
        let mut bytes = save_model(&random_model(16, 3));
        bytes[3] = b'2';
        assert!(matches!(load_model(&bytes), Err(ClassifierError::VersionMismatch(_))));
        let mut bytes = save_model(&random_model(16, 3));
        bytes[4] = 9;
        assert!(matches!(load_model(&bytes), Err(ClassifierError::VersionMismatch(_))));
    }
}
