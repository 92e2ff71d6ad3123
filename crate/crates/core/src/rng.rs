//! Counter-based pseudo-random streams.
//!
//! Every draw is a pure function of `(key, counter)`:
//!
//! ```text
//! x = mix64(key + counter * 0x9E3779B97F4A7C15)
//! mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!           z ^= z >> 27; z *= 0x94D049BB133111EB;
//!           z ^= z >> 31
//! ```
//!
//! which is SplitMix64 evaluated at an arbitrary position, so any element of
//! a stream can be produced without generating its predecessors. Stream keys
//! are derived from `(seed, tag, index)` with [`stream_key`], where the tag
//! is hashed with 64-bit FNV-1a.
//!
//! Uniforms use the top 52 bits, `u = ((x >> 12) + 0.5) · 2⁻⁵² ∈ (0, 1)` (both ends exact), and
//! standard normals are produced by inverse-CDF sampling with Wichura's
//! AS 241 (`PPND16`) rational approximation.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a of a stream tag.
pub fn tag_hash(tag: &str) -> u64 {
    tag.bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Key of the stream identified by `(seed, tag, index)`.
pub fn stream_key(seed: u64, tag: &str, index: u64) -> u64 {
    let a = mix64(seed ^ GOLDEN_GAMMA);
    let b = mix64(a ^ tag_hash(tag));
    mix64(b ^ index.wrapping_mul(GOLDEN_GAMMA))
}

/// A position in a counter-based stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// Stream for `(seed, tag, index)`; see [`stream_key`].
    pub fn stream(seed: u64, tag: &str, index: u64) -> Self {
        Self::new(stream_key(seed, tag, index))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Value at an arbitrary counter position, independent of `self.counter`.
    #[inline]
    pub fn at(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let x = self.at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        x
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        bits_to_open_uniform(self.next_u64())
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_uniform())
    }

    /// Uniform on (0, 1) at counter position `i`.
    #[inline]
    pub fn uniform_at(&self, i: u64) -> f64 {
        bits_to_open_uniform(self.at(i))
    }

    /// Standard normal at counter position `i`.
    #[inline]
    pub fn normal_at(&self, i: u64) -> f64 {
        inverse_normal_cdf(bits_to_open_uniform(self.at(i)))
    }

    /// ±1 with equal probability at counter position `i`.
    #[inline]
    pub fn sign_at(&self, i: u64) -> f64 {
        if self.at(i) >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[inline]
fn bits_to_open_uniform(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// Evaluates `c[0] + c[1]·x + … ` by Horner's rule.
#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

// AS 241 coefficients, lowest degree first.
const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_4,
    13_731.693_765_509_461,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_546,
];
const NEAR_NUM: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_545,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const NEAR_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const FAR_NUM: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_9,
    0.026_532_189_526_576_124,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const FAR_DEN: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_9,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_8e-15,
];

/// Inverse standard normal CDF (Wichura, AS 241, `PPND16`).
///
/// Relative accuracy about 1e-16 on (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&CENTRAL_NUM, r) / horner(&CENTRAL_DEN, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        horner(&NEAR_NUM, r) / horner(&NEAR_DEN, r)
    } else {
        let r = r - 5.0;
        horner(&FAR_NUM, r) / horner(&FAR_DEN, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
