//! Small floating-point and hashing utilities.

/// Error-free transformation of a sum: returns `(s, e)` with `s = fl(a + b)`
/// and `s + e == a + b` exactly (Knuth's TwoSum).
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Reconstructs `y` from the output of a compensated subtraction.
///
/// Given `(z, e) = two_sum(y, -c)`, the exact real identity `y = z + c + e`
/// holds and `y` is representable, so summing the three-term expansion with
/// one more error-free step recovers `y` bit-for-bit.
#[inline]
pub fn compensated_add(z: f64, c: f64, e: f64) -> f64 {
    let (v, w) = two_sum(z, c);
    v + (w + e)
}

/// FNV-1a over bytes; stable across platforms, used for content identifiers.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// SplitMix64 finalizer; decorrelates structured inputs into seed material.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
