//! Sobol sequence in Gray-code order with optional Matoušek linear scrambling
//! plus a random digital shift.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::directions::TABLE;

pub(crate) const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

/// Highest dimension with embedded direction numbers.
pub const MAX_SOBOL_DIMS: usize = TABLE.len() + 1;

/// Direction numbers `v_1..v_32` of a coordinate (0-based `dim`), as 32-bit
/// binary fractions.
pub(crate) fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let p = &TABLE[dim - 1];
    let s = p.degree as usize;
    let mut m = [0u32; BITS];
    for k in 0..BITS {
        m[k] = if k < s {
            p.initial[k]
        } else {
            let mut next = m[k - s] ^ (m[k - s] << s);
            for l in 1..s {
                if (p.coeffs >> (s - 1 - l)) & 1 == 1 {
                    next ^= m[k - l] << l;
                }
            }
            next
        };
    }
    for k in 0..BITS {
        v[k] = m[k] << (BITS - 1 - k);
    }
    v
}

/// Random non-singular lower-triangular scramble of the digits, followed by a
/// digital shift. Row `r` of the matrix produces output digit `r` (most
/// significant first) from input digits `0..=r`.
pub(crate) struct Scramble {
    rows: [u32; BITS],
    shift: u32,
}

impl Scramble {
    pub(crate) fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut rows = [0u32; BITS];
        for (r, row) in rows.iter_mut().enumerate() {
            let own = 1u32 << (BITS - 1 - r);
            let above = if r == 0 { 0 } else { !((1u32 << (BITS - r)) - 1) };
            *row = own | (rng.random::<u32>() & above);
        }
        let shift = rng.random::<u32>();
        Self { rows, shift }
    }

    fn apply(&self, x: u32) -> u32 {
        let mut out = 0u32;
        for (r, row) in self.rows.iter().enumerate() {
            out |= ((row & x).count_ones() & 1) << (BITS - 1 - r);
        }
        out
    }
}

/// Fills `out` with points `start..start + out.len()` of one coordinate.
///
/// Scrambling is linear over GF(2), so it is applied once to the direction
/// numbers instead of to every point.
pub(crate) fn fill_coordinate(dim: usize, start: usize, scramble: Option<&Scramble>, out: &mut [f64]) {
    let mut v = directions(dim);
    let mut x = 0u32;
    if let Some(s) = scramble {
        for vk in v.iter_mut() {
            *vk = s.apply(*vk);
        }
        x = s.shift;
    }
    // Gray code: point i+1 differs from point i in direction trailing_zeros(i+1)
    for i in 0..start {
        x ^= v[(i + 1).trailing_zeros() as usize];
    }
    for (offset, slot) in out.iter_mut().enumerate() {
        *slot = x as f64 * SCALE;
        let i = start + offset;
        x ^= v[(i + 1).trailing_zeros() as usize];
    }
}
