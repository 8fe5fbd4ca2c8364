//! Counter-based random substreams.
//!
//! Every random quantity in an experiment is drawn from its own ChaCha8
//! stream. The key is derived from `(trial seed, purpose)` and the ChaCha
//! stream id carries a sub-index (ensemble member, pool input index), so any
//! one stream can be regenerated without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used throughout the crate.
pub type Stream = ChaCha8Rng;

/// What a substream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Teacher,
    Student,
    PoolInputs,
    TestInputs,
    Presentation,
    DropoutMask,
}

impl Purpose {
    fn tag(self) -> &'static [u8] {
        match self {
            Purpose::Teacher => b"teacher",
            Purpose::Student => b"student",
            Purpose::PoolInputs => b"pool-inputs",
            Purpose::TestInputs => b"test-inputs",
            Purpose::Presentation => b"presentation",
            Purpose::DropoutMask => b"dropout-mask",
        }
    }
}

/// Key shared by all substreams of one `(seed, purpose)` pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamKey([u8; 32]);

impl StreamKey {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"scm-substream-v1\0");
        hasher.update(seed.to_le_bytes());
        hasher.update(purpose.tag());
        StreamKey(hasher.finalize().into())
    }

    /// The stream with id `index` under this key.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(index);
        rng
    }
}

/// Returns the substream for `(seed, purpose, index)`.
pub fn substream(seed: u64, purpose: Purpose, index: u64) -> Stream {
    StreamKey::new(seed, purpose).stream(index)
}

/// A plain seeded stream, for callers that do not need named substreams.
pub fn seeded(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}
