//! Quaternions and split-octonions.
//!
//! A split-octonion is stored as a pair of quaternions `(a, b)` standing for
//! `a + ℓb`. The product is
//!
//! ```text
//! (a + ℓb)(c + ℓd) = (ac + d b̄) + ℓ(ā d + c b)
//! ```
//!
//! and the quadratic form is `Q(a + ℓb) = |a|² − |b|²`, which has signature
//! (4,4). The 8-vector layout used throughout the crate is
//! `(1, i, j, k, ℓ, ℓi, ℓj, ℓk)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Real quaternion `w + xi + yj + zk`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Pure imaginary quaternion with vector part `v`.
    pub const fn from_imag(v: [f64; 3]) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn imag(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean inner product on ℝ⁴.
    pub fn dot(self, o: Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.w, s * self.x, s * self.y, s * self.z)
    }

    /// Multiplicative inverse; `None` for the zero quaternion.
    pub fn inverse(self) -> Option<Self> {
        let n = self.norm_sq();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    /// Commutator `ab − ba`.
    pub fn commutator(self, o: Self) -> Self {
        self * o - o * self
    }

    /// Exponential. For a pure imaginary `v` this is `cos|v| + sin|v| v/|v|`.
    pub fn exp(self) -> Self {
        let v = self.imag();
        let th = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let s = if th < 1e-8 {
            1.0 - th * th / 6.0
        } else {
            th.sin() / th
        };
        Quaternion::new(th.cos(), s * v[0], s * v[1], s * v[2]).scale(self.w.exp())
    }

    /// Logarithm of a unit quaternion, returned as the imaginary 3-vector `v`
    /// with `exp(v) = self` and `|v| ≤ π`.
    pub fn log_unit(self) -> [f64; 3] {
        let v = self.imag();
        let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let th = s.atan2(self.w);
        let f = if s < 1e-12 { 1.0 / self.w.max(f64::MIN_POSITIVE) } else { th / s };
        [f * v[0], f * v[1], f * v[2]]
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

/// Hamilton product, spelled out for call sites that prefer a function.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

/// Quaternion of unit length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Quaternion", try_from = "Quaternion")]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::ONE);

    /// Normalizes `q`; fails on the zero quaternion.
    pub fn new_normalize(q: Quaternion) -> Result<Self, Error> {
        let n = q.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero quaternion".into()));
        }
        Ok(Self(q.scale(1.0 / n)))
    }

    /// Wraps `q` without renormalizing. Callers guarantee `|q| = 1`.
    pub(crate) fn new_unchecked(q: Quaternion) -> Self {
        Self(q)
    }

    pub fn exp_imag(v: [f64; 3]) -> Self {
        Self(Quaternion::from_imag(v).exp())
    }

    pub fn quaternion(self) -> Quaternion {
        self.0
    }

    pub fn conj(self) -> Self {
        Self(self.0.conj())
    }

    /// Product renormalized to absorb rounding drift.
    pub fn compose(self, o: Self) -> Self {
        let p = self.0 * o.0;
        Self(p.scale(1.0 / p.norm()))
    }
}

impl From<UnitQuaternion> for Quaternion {
    fn from(u: UnitQuaternion) -> Self {
        u.0
    }
}

impl TryFrom<Quaternion> for UnitQuaternion {
    type Error = Error;
    fn try_from(q: Quaternion) -> Result<Self, Error> {
        if (q.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("quaternion is not of unit length".into()));
        }
        Self::new_normalize(q)
    }
}

/// Hopf map `w ↦ w̄ i w`, a unit imaginary quaternion read as a point of S².
pub fn hopf(w: UnitQuaternion) -> [f64; 3] {
    let w = w.0;
    (w.conj() * Quaternion::I * w).imag()
}

/// The pair of Hopf-type maps `w ↦ (w̄ i w, w̄ j w)`.
pub fn psi(w: UnitQuaternion) -> ([f64; 3], [f64; 3]) {
    let w = w.0;
    let wc = w.conj();
    ((wc * Quaternion::I * w).imag(), (wc * Quaternion::J * w).imag())
}

/// Split-octonion `a + ℓb`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitOctonion {
    pub a: Quaternion,
    pub b: Quaternion,
}

impl SplitOctonion {
    pub const ZERO: SplitOctonion = SplitOctonion::new(Quaternion::ZERO, Quaternion::ZERO);
    pub const ONE: SplitOctonion = SplitOctonion::new(Quaternion::ONE, Quaternion::ZERO);
    pub const L: SplitOctonion = SplitOctonion::new(Quaternion::ZERO, Quaternion::ONE);

    pub const fn new(a: Quaternion, b: Quaternion) -> Self {
        Self { a, b }
    }

    /// The `n`-th basis element in the order `1, i, j, k, ℓ, ℓi, ℓj, ℓk`.
    pub fn basis(n: usize) -> Self {
        let mut v = [0.0; 8];
        v[n] = 1.0;
        Self::from_array(v)
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        Self::new(
            Quaternion::new(v[0], v[1], v[2], v[3]),
            Quaternion::new(v[4], v[5], v[6], v[7]),
        )
    }

    pub fn to_array(self) -> [f64; 8] {
        let (a, b) = (self.a, self.b);
        [a.w, a.x, a.y, a.z, b.w, b.x, b.y, b.z]
    }

    /// Conjugation `a + ℓb ↦ ā − ℓb`, the involution with `x̄x = Q(x)`.
    pub fn conj(self) -> Self {
        Self::new(self.a.conj(), -self.b)
    }

    /// `Q(a + ℓb) = |a|² − |b|²`.
    pub fn q_form(self) -> f64 {
        self.a.norm_sq() - self.b.norm_sq()
    }

    /// Euclidean norm of the 8-vector (not the split form).
    pub fn euclid_norm(self) -> f64 {
        (self.a.norm_sq() + self.b.norm_sq()).sqrt()
    }

    pub fn re(self) -> f64 {
        self.a.w
    }

    /// Drops the real part, leaving the component in the imaginary ℝ⁷.
    pub fn imag_part(self) -> Self {
        Self::new(Quaternion::new(0.0, self.a.x, self.a.y, self.a.z), self.b)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a.scale(s), self.b.scale(s))
    }

    /// `x⁻¹ = x̄ / Q(x)`; zero divisors (null vectors) have no inverse.
    pub fn inverse(self) -> Result<Self, Error> {
        let q = self.q_form();
        let scale = self.a.norm_sq() + self.b.norm_sq();
        if q.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::ZeroDivisor);
        }
        Ok(self.conj().scale(1.0 / q))
    }
}

impl Add for SplitOctonion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for SplitOctonion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for SplitOctonion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Mul for SplitOctonion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        omul(self, o)
    }
}

/// Split-octonion product `(a + ℓb)(c + ℓd) = (ac + d b̄) + ℓ(ā d + c b)`.
pub fn omul(x: SplitOctonion, y: SplitOctonion) -> SplitOctonion {
    let (a, b, c, d) = (x.a, x.b, y.a, y.b);
    SplitOctonion::new(a * c + d * b.conj(), a.conj() * d + c * b)
}

/// Polarization of `Q`: `𝐐(x, y) = ⟨a, c⟩ − ⟨b, d⟩`.
pub fn polarize(x: SplitOctonion, y: SplitOctonion) -> f64 {
    x.a.dot(y.a) - x.b.dot(y.b)
}

/// Worst-case residuals of the algebraic identities over a batch of samples.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityReport {
    pub samples: usize,
    pub composition: f64,
    pub left_alternative: f64,
    pub right_alternative: f64,
    pub flexible: f64,
    pub conjugate_norm: f64,
    pub inverse: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.composition,
            self.left_alternative,
            self.right_alternative,
            self.flexible,
            self.conjugate_norm,
            self.inverse,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks composition, alternativity, flexibility and `x̄x = Q(x)` for every
/// pair, using the supplied product. Residuals are relative to the sizes of
/// the operands so that entries in `[−1, 1]` give errors near 1e-16.
pub fn check_identities<F>(pairs: &[(SplitOctonion, SplitOctonion)], mul: F) -> IdentityReport
where
    F: Fn(SplitOctonion, SplitOctonion) -> SplitOctonion,
{
    let mut r = IdentityReport { samples: pairs.len(), ..Default::default() };
    let diff = |u: SplitOctonion, v: SplitOctonion| (u - v).euclid_norm();
    for &(x, y) in pairs {
        let s = (x.euclid_norm() * y.euclid_norm()).max(1e-300);
        let sx = x.euclid_norm().powi(2).max(1e-300);
        let sy = y.euclid_norm().powi(2).max(1e-300);
        let xy = mul(x, y);
        r.composition = r
            .composition
            .max((xy.q_form() - x.q_form() * y.q_form()).abs() / (s * s));
        r.left_alternative = r
            .left_alternative
            .max(diff(mul(mul(x, x), y), mul(x, mul(x, y))) / (sx * y.euclid_norm().max(1e-300)));
        r.right_alternative = r
            .right_alternative
            .max(diff(mul(mul(x, y), y), mul(x, mul(y, y))) / (sy * x.euclid_norm().max(1e-300)));
        r.flexible = r
            .flexible
            .max(diff(mul(mul(x, y), x), mul(x, mul(y, x))) / (sx * y.euclid_norm().max(1e-300)));
        let qx = SplitOctonion::ONE.scale(x.q_form());
        r.conjugate_norm = r
            .conjugate_norm
            .max(diff(mul(x.conj(), x), qx).max(diff(mul(x, x.conj()), qx)) / sx);
        if let Ok(inv) = x.inverse() {
            let cond = sx / x.q_form().abs();
            let e = diff(mul(x, inv), SplitOctonion::ONE).max(diff(mul(inv, x), SplitOctonion::ONE));
            r.inverse = r.inverse.max(e / cond);
        }
    }
    r
}
