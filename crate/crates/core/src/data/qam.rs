//! Gray-labelled rectangular QAM alphabets, bit mapping and hard decisions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::signal::DualPol;

/// A unit-energy QAM alphabet. Point `i` carries the bit label `i`
/// (most significant bit first), so constellation indices and labels coincide.
///
/// Square orders use the usual per-axis Gray code. Odd orders are laid out as
/// a 2^ceil(k/2) x 2^floor(k/2) rectangle: 8-QAM is two rows of four.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QamSpec", into = "QamSpec")]
pub struct QamConstellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct QamSpec {
    order: usize,
}

impl TryFrom<QamSpec> for QamConstellation {
    type Error = Error;
    fn try_from(s: QamSpec) -> Result<Self> {
        QamConstellation::new(s.order)
    }
}

impl From<QamConstellation> for QamSpec {
    fn from(c: QamConstellation) -> Self {
        QamSpec { order: c.order }
    }
}

pub const SUPPORTED_ORDERS: [usize; 7] = [2, 4, 8, 16, 32, 64, 128];

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&order) {
            return config(format!("unsupported QAM order {order}"));
        }
        let k = order.trailing_zeros() as usize;
        let ki = k.div_ceil(2);
        let kq = k / 2;
        let (ni, nq) = (1usize << ki, 1usize << kq);
        let mut points: Vec<Complex64> = (0..order)
            .map(|label| {
                let li = gray_decode(label >> kq);
                let lq = gray_decode(label & (nq - 1));
                Complex64::new(
                    2.0 * li as f64 - (ni - 1) as f64,
                    2.0 * lq as f64 - (nq - 1) as f64,
                )
            })
            .collect();
        let mean_energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let scale = mean_energy.sqrt().recip();
        points.iter_mut().for_each(|p| *p *= scale);
        Ok(Self {
            order,
            bits_per_symbol: k,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn is_square(&self) -> bool {
        self.bits_per_symbol % 2 == 0
    }

    /// Bits of the label of point `index`, most significant first.
    pub fn label_bits(&self, index: usize) -> impl Iterator<Item = u8> + '_ {
        (0..self.bits_per_symbol)
            .rev()
            .map(move |b| ((index >> b) & 1) as u8)
    }

    /// Nearest point by Euclidean distance; ties go to the lowest index.
    pub fn decide(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn decide_all(&self, ys: &[Complex64]) -> Vec<usize> {
        ys.iter().map(|&y| self.decide(y)).collect()
    }

    pub fn bit_distance(&self, a: usize, b: usize) -> u32 {
        (a ^ b).count_ones()
    }

    /// Map a bit stream onto one polarization.
    pub fn map_single(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol;
        if bits.len() % k != 0 {
            return config(format!("{} bits not divisible by {k}", bits.len()));
        }
        Ok(bits
            .chunks_exact(k)
            .map(|c| self.points[bits_to_index(c)])
            .collect())
    }

    pub fn indices_of(&self, symbols: &[Complex64]) -> Vec<usize> {
        self.decide_all(symbols)
    }
}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Map bits onto both polarizations: alternating blocks of log2(M) bits go
/// to X then Y.
pub fn map_symbols(bits: &[u8], c: &QamConstellation) -> Result<DualPol> {
    let k = c.bits_per_symbol();
    if bits.len() % (2 * k) != 0 {
        return config(format!(
            "{} bits not divisible by 2*log2(M) = {}",
            bits.len(),
            2 * k
        ));
    }
    let (x, y) = bits
        .chunks_exact(2 * k)
        .map(|block| {
            (
                c.point(bits_to_index(&block[..k])),
                c.point(bits_to_index(&block[k..])),
            )
        })
        .unzip();
    Ok(DualPol { x, y })
}

/// Inverse of [`map_symbols`] via hard decision.
pub fn demap_symbols(symbols: &DualPol, c: &QamConstellation) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * 2 * c.bits_per_symbol());
    for (a, b) in symbols.x.iter().zip(&symbols.y) {
        out.extend(c.label_bits(c.decide(*a)));
        out.extend(c.label_bits(c.decide(*b)));
    }
    out
}

/// Constellation indices of both polarizations.
pub fn symbol_indices(symbols: &DualPol, c: &QamConstellation) -> (Vec<usize>, Vec<usize>) {
    (c.decide_all(&symbols.x), c.decide_all(&symbols.y))
}
