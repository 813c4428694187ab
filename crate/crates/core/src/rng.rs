//! Seed splitting. Every random decision in a run derives from one
//! top-level seed; each consumer gets its own ChaCha stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream identifiers for the consumers of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Sdp,
    MergeTies,
    Annealing,
    Variational,
    Sampling,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Sdp => 1,
            Stream::MergeTies => 2,
            Stream::Annealing => 3,
            Stream::Variational => 4,
            Stream::Sampling => 5,
        }
    }
}

/// Independent generator for `stream`, further split by `index`
/// (e.g. the n-th SDP re-solve).
pub fn stream(seed: u64, stream: Stream, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream.id());
    rng
}
