//! Stateless, counter-addressed random numbers.
//!
//! Every draw is a pure function of a 64-bit seed and an address tuple. The
//! address words are folded through the SplitMix64 finalizer one at a time;
//! a standard normal is produced from two derived uniforms with the
//! Box-Muller cosine branch. Changing any of this changes every simulated
//! result, so the algorithm is frozen: seed `s`, address `[w0, .., wn]`
//!
//! ```text
//! h  = mix(s ^ GAMMA)
//! h  = mix(rotl(h, 17) ^ mix(w + GAMMA))      for each word w
//! u1 = ((h >> 11) + 1) * 2^-53                 in (0, 1]
//! u2 = (mix(h ^ GAMMA2) >> 11) * 2^-53         in [0, 1)
//! z  = sqrt(-2 ln u1) * cos(2 pi u2)
//! ```

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const GAMMA2: u64 = 0xD1B5_4A32_D192_ED03;
const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Address tags that keep the independent random streams apart.
pub(crate) mod tag {
    pub const TREE_NOISE: u64 = 1;
    pub const DATA_BITS: u64 = 2;
    pub const BLOCK_NOISE: u64 = 3;
    pub const BLOCK_MESSAGE: u64 = 4;
    pub const DMC_OUTPUT: u64 = 5;
}

#[inline(always)]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn hash_address(seed: u64, address: &[u64]) -> u64 {
    address.iter().fold(mix(seed ^ GAMMA), |h, &w| {
        mix(h.rotate_left(17) ^ mix(w.wrapping_add(GAMMA)))
    })
}

/// Uniform in `[0, 1)`.
#[inline]
pub fn uniform(seed: u64, address: &[u64]) -> f64 {
    (hash_address(seed, address) >> 11) as f64 * INV_2_53
}

#[inline]
pub fn standard_normal(seed: u64, address: &[u64]) -> f64 {
    let h = hash_address(seed, address);
    let u1 = ((h >> 11) + 1) as f64 * INV_2_53;
    let u2 = (mix(h ^ GAMMA2) >> 11) as f64 * INV_2_53;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_function_of_address() {
        assert_eq!(hash_address(7, &[1, 2, 3]), hash_address(7, &[1, 2, 3]));
        assert_ne!(hash_address(7, &[1, 2, 3]), hash_address(7, &[1, 3, 2]));
        assert_ne!(hash_address(7, &[1, 2, 3]), hash_address(8, &[1, 2, 3]));
        assert_ne!(hash_address(7, &[0]), hash_address(7, &[0, 0]));
        assert_eq!(standard_normal(1, &[5, 6]), standard_normal(1, &[5, 6]));
    }

    #[test]
    fn uniform_range() {
        for i in 0..10_000u64 {
            let u = uniform(3, &[i]);
            assert!((0.0..1.0).contains(&u));
            assert!(standard_normal(3, &[i]).is_finite());
        }
    }
}
