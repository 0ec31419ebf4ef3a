//! Pseudo-random bit sources: maximal-length LFSRs and MT19937.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

/// Feedback taps of maximal-length Fibonacci LFSRs (Xilinx XAPP052 table).
/// Each entry lists the stages XOR-ed into the feedback, order first.
const PRIMITIVE_TAPS: &[(u32, &[u32])] = &[
    (2, &[2, 1]),
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 6, 4, 1]),
    (13, &[13, 4, 3, 1]),
    (14, &[14, 5, 3, 1]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
    (17, &[17, 14]),
    (18, &[18, 11]),
    (19, &[19, 6, 2, 1]),
    (20, &[20, 17]),
    (21, &[21, 19]),
    (22, &[22, 21]),
    (23, &[23, 18]),
    (24, &[24, 23, 22, 17]),
    (25, &[25, 22]),
    (26, &[26, 6, 2, 1]),
    (27, &[27, 5, 2, 1]),
    (28, &[28, 25]),
    (29, &[29, 27]),
    (30, &[30, 6, 4, 1]),
    (31, &[31, 28]),
    (32, &[32, 22, 2, 1]),
    (33, &[33, 20]),
    (34, &[34, 27, 2, 1]),
];

/// Orders up to this value are cycle-checked when custom taps are supplied.
const CYCLE_CHECK_MAX_ORDER: u32 = 20;

pub fn primitive_taps(order: u32) -> Option<&'static [u32]> {
    PRIMITIVE_TAPS
        .iter()
        .find(|(o, _)| *o == order)
        .map(|(_, t)| *t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitSourceKind {
    PrbsLfsr,
    MersenneTwister,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitSource {
    pub kind: BitSourceKind,
    #[serde(default)]
    pub prbs_order: Option<u32>,
    pub seed: u64,
    /// Custom feedback taps; the primitive-polynomial table is used when absent.
    #[serde(default)]
    pub polynomial_taps: Option<Vec<u32>>,
}

impl BitSource {
    pub fn lfsr(order: u32, seed: u64) -> Self {
        Self {
            kind: BitSourceKind::PrbsLfsr,
            prbs_order: Some(order),
            seed,
            polynomial_taps: None,
        }
    }

    pub fn mersenne(seed: u64) -> Self {
        Self {
            kind: BitSourceKind::MersenneTwister,
            prbs_order: None,
            seed,
            polynomial_taps: None,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn bits(&self, n: usize) -> Result<Vec<u8>> {
        match self.kind {
            BitSourceKind::PrbsLfsr => prbs_bits(self, n),
            BitSourceKind::MersenneTwister => Ok(mt_bits(self.seed, n)),
        }
    }
}

/// Fibonacci LFSR over GF(2): b[t] = XOR of b[t - k] for every tap k.
#[derive(Debug, Clone)]
pub struct Lfsr {
    order: u32,
    tap_mask: u64,
    state_mask: u64,
    state: u64,
}

impl Lfsr {
    pub fn new(order: u32, taps: &[u32], seed: u64) -> Result<Self> {
        if !(2..=63).contains(&order) {
            return config(format!("LFSR order {order} outside 2..=63"));
        }
        if taps.is_empty() || taps.iter().any(|&t| t == 0 || t > order) || !taps.contains(&order) {
            return config(format!("taps {taps:?} invalid for order {order}"));
        }
        let tap_mask = taps.iter().fold(0u64, |m, &t| m | 1 << (t - 1));
        let state_mask = (1u64 << order) - 1;
        let mut state = splitmix64(seed) & state_mask;
        if state == 0 {
            state = 1;
        }
        Ok(Self {
            order,
            tap_mask,
            state_mask,
            state,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_bit(&mut self) -> u8 {
        let fb = ((self.state & self.tap_mask).count_ones() & 1) as u64;
        self.state = ((self.state << 1) | fb) & self.state_mask;
        fb as u8
    }

    /// Number of steps until the register returns to its current state.
    pub fn cycle_length(&self) -> u64 {
        let mut probe = self.clone();
        let start = probe.state;
        let mut n = 0u64;
        loop {
            probe.next_bit();
            n += 1;
            if probe.state == start || n > self.state_mask {
                return n;
            }
        }
    }
}

/// First `n` bits of the LFSR stream described by `src`.
pub fn prbs_bits(src: &BitSource, n: usize) -> Result<Vec<u8>> {
    if src.kind != BitSourceKind::PrbsLfsr {
        return config("prbs_bits requires an LFSR source");
    }
    let order = src
        .prbs_order
        .ok_or_else(|| Error::Config("LFSR source without prbs_order".into()))?;
    let mut lfsr = match &src.polynomial_taps {
        Some(taps) => {
            let lfsr = Lfsr::new(order, taps, src.seed)?;
            if order <= CYCLE_CHECK_MAX_ORDER {
                let expected = (1u64 << order) - 1;
                let cycle = lfsr.cycle_length();
                if cycle != expected {
                    return Err(Error::NonPrimitive {
                        order,
                        cycle,
                        expected,
                    });
                }
            }
            lfsr
        }
        None => {
            let taps = primitive_taps(order)
                .ok_or_else(|| Error::Config(format!("no tabulated polynomial for order {order}")))?;
            Lfsr::new(order, taps, src.seed)?
        }
    };
    Ok((0..n).map(|_| lfsr.next_bit()).collect())
}

/// Bits from the MT19937 32-bit word stream, most significant bit first.
///
/// Seeds that fit in 32 bits use the reference `init_genrand` seeding, so
/// seed 5489 reproduces the canonical output sequence. Wider seeds go
/// through `init_by_array` with the low and high words.
pub fn mt_bits(seed: u64, n: usize) -> Vec<u8> {
    let mut mt = mt19937(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = mt.next_u32();
        for k in (0..32).rev() {
            if out.len() == n {
                break;
            }
            out.push(((w >> k) & 1) as u8);
        }
    }
    out
}

pub fn mt19937(seed: u64) -> rand_mt::Mt {
    match u32::try_from(seed) {
        Ok(s) => rand_mt::Mt::new(s),
        Err(_) => rand_mt::Mt::new_with_key([seed as u32, (seed >> 32) as u32]),
    }
}

pub(crate) fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
