//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed, with the
//! 64-bit stream number packing `(sim, slot, phase)`: 32 bits of simulation
//! index, 24 bits of slot (0 for per-simulation streams, `b + 1` for
//! bootstrap replicate `b`), and 8 bits of phase. Distinct triples select
//! disjoint ChaCha streams, so draws never depend on scheduling, on worker
//! count, or on which schemes run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bootstrap replicate counts must stay below this bound.
pub const MAX_BOOT: usize = (1 << 24) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Phase {
    /// Covariates and errors of the simulated dataset.
    Data = 0,
    /// Uniforms choosing atoms of the residual pool (and sign flips).
    Picks = 1,
    /// Kernel noise of the smooth bootstrap.
    Noise = 2,
    /// Picks for the smooth scheme when coupling is switched off.
    PicksUncoupled = 3,
}

/// The stream for `(master, sim, slot, phase)`.
pub fn seed_stream(master: u64, sim: u64, slot: u64, phase: Phase) -> ChaCha8Rng {
    assert!(sim <= u32::MAX as u64, "simulation index exceeds 32 bits");
    assert!(slot <= MAX_BOOT as u64, "slot exceeds 24 bits");
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream((sim << 32) | (slot << 8) | phase as u64);
    rng
}

/// The stream generating simulation `sim`'s dataset.
pub fn data_stream(master: u64, sim: u64) -> ChaCha8Rng {
    seed_stream(master, sim, 0, Phase::Data)
}

/// `(picks, noise)` streams for bootstrap replicate `boot` of simulation
/// `sim`. With `coupled`, both schemes read the same picks.
pub fn boot_streams(master: u64, sim: u64, boot: u64, smooth: bool, coupled: bool) -> (ChaCha8Rng, ChaCha8Rng) {
    let picks = if smooth && !coupled { Phase::PicksUncoupled } else { Phase::Picks };
    (
        seed_stream(master, sim, boot + 1, picks),
        seed_stream(master, sim, boot + 1, Phase::Noise),
    )
}
