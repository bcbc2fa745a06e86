//! Seeded, counter-based random sampling.
//!
//! Every consumer gets its own ChaCha stream keyed by `(seed, stream)`, so the
//! values it draws do not depend on how many values other consumers drew or on
//! thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Quaternion, SplitOctonion, UnitQuaternion};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Quaternion with independent entries uniform in `[−1, 1]`.
pub fn quaternion<R: Rng>(r: &mut R) -> Quaternion {
    Quaternion::new(
        r.gen_range(-1.0..=1.0),
        r.gen_range(-1.0..=1.0),
        r.gen_range(-1.0..=1.0),
        r.gen_range(-1.0..=1.0),
    )
}

/// Uniformly distributed point of S³ (rejection from the unit ball).
pub fn unit_quaternion<R: Rng>(r: &mut R) -> UnitQuaternion {
    loop {
        let q = quaternion(r);
        let n = q.norm_sq();
        if n > 1e-2 && n <= 1.0 {
            return UnitQuaternion::new_unchecked(q.scale(1.0 / n.sqrt()));
        }
    }
}

/// Uniformly distributed unit vector of ℝ³.
pub fn unit_vector3<R: Rng>(r: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0)];
        let n = v.iter().map(|c| c * c).sum::<f64>();
        if n > 1e-2 && n <= 1.0 {
            let s = 1.0 / n.sqrt();
            return [v[0] * s, v[1] * s, v[2] * s];
        }
    }
}

/// Split-octonion with independent entries uniform in `[−1, 1]`.
pub fn split_octonion<R: Rng>(r: &mut R) -> SplitOctonion {
    SplitOctonion::new(quaternion(r), quaternion(r))
}

/// Angle uniform in `[0, 2π)`.
pub fn angle<R: Rng>(r: &mut R) -> f64 {
    r.gen_range(0.0..std::f64::consts::TAU)
}
