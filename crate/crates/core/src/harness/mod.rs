//! Multi-party protocol execution with exact bit accounting.
//!
//! Parties are in-process state machines that exchange serialized messages
//! through instrumented writers; the [`BitLedger`] is the ground truth for
//! every communication-cost claim. Shared randomness is never charged.

mod smp;
mod twoway;
mod yao;

pub use smp::{run_smp, PartyMessage};
pub use twoway::{
    equality_protocol, referee_reconstruct, run_twoway, twoway_to_smp, TwowayProtocol,
};
pub use yao::{
    simulate_twoway_quantum, yao_compile, ProtocolInputs, ProtocolRound, QuantumProtocolSpec,
    YaoCompilation,
};

/// One of the two input-holding parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// Direction of a two-way message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

/// Exact per-party bit counts for one protocol run.
#[derive(Debug, Clone, Default)]
pub struct BitLedger {
    pub alice_to_referee: u64,
    pub bob_to_referee: u64,
    pub alice_bob_roundtrips: Vec<(Direction, u64)>,
    /// Shared random bits consumed; informational, never charged.
    pub shared_random_bits_drawn: u64,
}

impl BitLedger {
    /// Sum of all charged entries.
    pub fn total_charged(&self) -> u64 {
        self.alice_to_referee
            + self.bob_to_referee
            + self.alice_bob_roundtrips.iter().map(|(_, b)| b).sum::<u64>()
    }

    /// Accumulates another run's counts (used by multi-outcome protocols).
    pub fn absorb(&mut self, other: &BitLedger) {
        self.alice_to_referee += other.alice_to_referee;
        self.bob_to_referee += other.bob_to_referee;
        self.alice_bob_roundtrips
            .extend(other.alice_bob_roundtrips.iter().cloned());
        self.shared_random_bits_drawn += other.shared_random_bits_drawn;
    }
}

/// Packs bits most-significant-first into bytes; the final partial byte is
/// charged at its true bit count.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_count: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_bit(&mut self, bit: bool) {
        let offset = (self.bit_count % 8) as u8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << (7 - offset);
        }
        self.bit_count += 1;
    }

    /// Pushes the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u64) {
        for k in (0..width).rev() {
            self.push_bit((value >> k) & 1 == 1);
        }
    }

    pub fn bit_count(&self) -> u64 {
        self.bit_count
    }

    pub fn finish(self) -> (Vec<u8>, u64) {
        (self.bytes, self.bit_count)
    }
}

/// Reads back what [`BitWriter`] packed.
pub struct BitReader<'a> {
    bytes: &'a [u8],
    cursor: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, cursor: 0 }
    }

    pub fn read_bit(&mut self) -> bool {
        let byte = self.bytes[(self.cursor / 8) as usize];
        let offset = (self.cursor % 8) as u8;
        self.cursor += 1;
        (byte >> (7 - offset)) & 1 == 1
    }

    pub fn read_bits(&mut self, width: u64) -> u64 {
        let mut value = 0u64;
        for _ in 0..width {
            value = (value << 1) | self.read_bit() as u64;
        }
        value
    }
}
