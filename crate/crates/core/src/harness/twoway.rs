//! Conversion of a deterministic two-way protocol into an SMP protocol:
//! each party sends the referee its full response table against every
//! possible opposing message string, and the referee reconstructs the
//! unique consistent transcript.

use super::{BitLedger, BitWriter, Party};
use crate::error::{Error, Result};

/// Next-message function: `(own input, opposing bits seen so far) -> bits`.
pub type NextMessage = Box<dyn Fn(u64, &[bool]) -> Vec<bool>>;

/// A deterministic two-way protocol with a fixed speaking schedule.
/// Alice sends `bits_a` bits in total and Bob `bits_b`; the output of a run
/// is the final transcript bit.
pub struct TwowayProtocol {
    bits_a: usize,
    bits_b: usize,
    schedule: Vec<(Party, usize)>,
    next_a: NextMessage,
    next_b: NextMessage,
}

impl TwowayProtocol {
    pub fn new(
        schedule: Vec<(Party, usize)>,
        next_a: NextMessage,
        next_b: NextMessage,
    ) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::MalformedProtocol("empty schedule".into()));
        }
        let bits_a: usize = schedule
            .iter()
            .filter(|(p, _)| *p == Party::Alice)
            .map(|(_, n)| n)
            .sum();
        let bits_b: usize = schedule
            .iter()
            .filter(|(p, _)| *p == Party::Bob)
            .map(|(_, n)| n)
            .sum();
        if bits_a > 24 || bits_b > 24 {
            return Err(Error::SizeLimit(
                "SMP conversion enumerates 2^bits opposing strings; capped at 24".into(),
            ));
        }
        Ok(Self {
            bits_a,
            bits_b,
            schedule,
            next_a,
            next_b,
        })
    }

    pub fn bits_a(&self) -> usize {
        self.bits_a
    }

    pub fn bits_b(&self) -> usize {
        self.bits_b
    }

    /// One party's full emission against a hypothesized complete opposing
    /// string, following the schedule.
    fn response(&self, party: Party, input: u64, opposing: &[bool]) -> Result<Vec<bool>> {
        let mut own = Vec::new();
        let mut seen = Vec::new();
        for &(speaker, len) in &self.schedule {
            if speaker == party {
                let next = match party {
                    Party::Alice => (self.next_a)(input, &seen),
                    Party::Bob => (self.next_b)(input, &seen),
                };
                if next.len() != len {
                    return Err(Error::MalformedProtocol(format!(
                        "party emitted {} bits where the schedule says {len}",
                        next.len()
                    )));
                }
                own.extend(next);
            } else {
                if seen.len() + len > opposing.len() {
                    return Err(Error::MalformedProtocol(
                        "opposing string shorter than the schedule".into(),
                    ));
                }
                seen.extend(&opposing[seen.len()..seen.len() + len]);
            }
        }
        Ok(own)
    }
}

/// Little-endian bit decoding: bit `k` of `value` is the k-th chronological
/// bit of the string.
fn bits_of(value: u64, len: usize) -> Vec<bool> {
    (0..len).map(|k| (value >> k) & 1 == 1).collect()
}

/// Direct execution of the two-way protocol. Returns the transcript in
/// chronological order and the output (its last bit). Every exchanged chunk
/// is recorded in the ledger's round-trip list.
pub fn run_twoway(
    protocol: &TwowayProtocol,
    x: u64,
    y: u64,
) -> Result<(Vec<bool>, bool, BitLedger)> {
    let mut transcript = Vec::new();
    let mut seen_by_a = Vec::new();
    let mut seen_by_b = Vec::new();
    let mut ledger = BitLedger::default();
    for &(speaker, len) in &protocol.schedule {
        let chunk = match speaker {
            Party::Alice => (protocol.next_a)(x, &seen_by_a),
            Party::Bob => (protocol.next_b)(y, &seen_by_b),
        };
        if chunk.len() != len {
            return Err(Error::MalformedProtocol(format!(
                "party emitted {} bits where the schedule says {len}",
                chunk.len()
            )));
        }
        match speaker {
            Party::Alice => {
                seen_by_b.extend(chunk.iter().copied());
                ledger
                    .alice_bob_roundtrips
                    .push((super::Direction::AliceToBob, len as u64));
            }
            Party::Bob => {
                seen_by_a.extend(chunk.iter().copied());
                ledger
                    .alice_bob_roundtrips
                    .push((super::Direction::BobToAlice, len as u64));
            }
        }
        transcript.extend(chunk);
    }
    let output = *transcript
        .last()
        .ok_or_else(|| Error::MalformedProtocol("empty transcript".into()))?;
    Ok((transcript, output, ledger))
}

/// SMP conversion: Alice sends her `bits_a`-bit response for each of the
/// `2^bits_b` possible Bob strings, Bob symmetrically, and the referee
/// replays the schedule against the tables to reconstruct the transcript
/// and output its last bit. Charged cost is exactly
/// `2^{b_B} b_A + 2^{b_A} b_B` bits.
pub fn twoway_to_smp(protocol: &TwowayProtocol, x: u64, y: u64) -> Result<(bool, BitLedger)> {
    let (ba, bb) = (protocol.bits_a, protocol.bits_b);

    // Party tables, serialized exactly as transmitted.
    let mut table_a = Vec::with_capacity(1 << bb);
    let mut writer_a = BitWriter::new();
    for s in 0..(1u64 << bb) {
        let resp = protocol.response(Party::Alice, x, &bits_of(s, bb))?;
        for &bit in &resp {
            writer_a.push_bit(bit);
        }
        table_a.push(resp);
    }
    let mut table_b = Vec::with_capacity(1 << ba);
    let mut writer_b = BitWriter::new();
    for s in 0..(1u64 << ba) {
        let resp = protocol.response(Party::Bob, y, &bits_of(s, ba))?;
        for &bit in &resp {
            writer_b.push_bit(bit);
        }
        table_b.push(resp);
    }

    let (_, output) = referee_reconstruct(&protocol.schedule, &table_a, &table_b)?;

    let (_, sent_a) = writer_a.finish();
    let (_, sent_b) = writer_b.finish();
    debug_assert_eq!(sent_a, ((1u64 << bb) * ba as u64));
    debug_assert_eq!(sent_b, ((1u64 << ba) * bb as u64));
    let ledger = BitLedger {
        alice_to_referee: sent_a,
        bob_to_referee: sent_b,
        alice_bob_roundtrips: Vec::new(),
        shared_random_bits_drawn: 0,
    };
    Ok((output, ledger))
}

/// Referee side of the conversion: replays the schedule against the two
/// received tables. A party's next chunk is read from its row for the
/// zero-padded opposing prefix; for causal tables the padding is immaterial,
/// and the final fixpoint check rejects tables with no unique consistent
/// transcript.
pub fn referee_reconstruct(
    schedule: &[(Party, usize)],
    table_a: &[Vec<bool>],
    table_b: &[Vec<bool>],
) -> Result<(Vec<bool>, bool)> {
    let encode = |bits: &[bool]| -> usize {
        bits.iter()
            .enumerate()
            .fold(0usize, |acc, (k, &b)| acc | ((b as usize) << k))
    };
    let mut a_bits: Vec<bool> = Vec::new();
    let mut b_bits: Vec<bool> = Vec::new();
    let mut transcript = Vec::new();
    for &(speaker, len) in schedule {
        match speaker {
            Party::Alice => {
                let row = table_a
                    .get(encode(&b_bits))
                    .ok_or_else(|| Error::MalformedProtocol("table row missing".into()))?;
                if row.len() < a_bits.len() + len {
                    return Err(Error::MalformedProtocol("table row too short".into()));
                }
                let chunk = &row[a_bits.len()..a_bits.len() + len];
                a_bits.extend_from_slice(chunk);
                transcript.extend_from_slice(chunk);
            }
            Party::Bob => {
                let row = table_b
                    .get(encode(&a_bits))
                    .ok_or_else(|| Error::MalformedProtocol("table row missing".into()))?;
                if row.len() < b_bits.len() + len {
                    return Err(Error::MalformedProtocol("table row too short".into()));
                }
                let chunk = &row[b_bits.len()..b_bits.len() + len];
                b_bits.extend_from_slice(chunk);
                transcript.extend_from_slice(chunk);
            }
        }
    }
    if table_a.get(encode(&b_bits)) != Some(&a_bits) || table_b.get(encode(&a_bits)) != Some(&b_bits)
    {
        return Err(Error::MalformedProtocol(
            "no unique consistent transcript".into(),
        ));
    }
    let output = *transcript
        .last()
        .ok_or_else(|| Error::MalformedProtocol("empty transcript".into()))?;
    Ok((transcript, output))
}

/// The n-bit equality protocol: Alice announces her input, Bob replies with
/// all-ones when it matches his and all-zeros otherwise, so the last bit is
/// the answer.
pub fn equality_protocol(n: usize) -> Result<TwowayProtocol> {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    TwowayProtocol::new(
        vec![(Party::Alice, n), (Party::Bob, n)],
        Box::new(move |x, _seen| bits_of(x & mask, n)),
        Box::new(move |y, seen| {
            let equal = seen == bits_of(y & mask, n);
            vec![equal; n]
        }),
    )
}
