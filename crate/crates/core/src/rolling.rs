//! Configuration space of two rolling balls and its rolling distribution.
//!
//! Points are pairs of unit quaternions `(w1, w2)` modulo the diagonal circle
//! `(w1, w2) ~ (e^{iθ}w1, e^{iθ}w2)`. Tangent directions are encoded by
//! right-invariant fields `w ↦ (a w1, b w2)` with imaginary `a, b`, so the Lie
//! algebra `Im ℍ ⊕ Im ℍ ≅ ℝ⁶` carries all bracket computations and the circle
//! direction is the vertical pair `(i, i)`.
//!
//! For radius ratio `ρ` the rolling distribution is spanned by
//! `f = (j, ρj)` and `g = (k, ρk)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{hopf, Quaternion, UnitQuaternion};
use crate::error::Error;
use crate::linalg;

/// Singular-value threshold for rank decisions on unit-normalized generators.
pub const RANK_TOL: f64 = 1e-9;
/// Largest admissible horizontality residual of a rolled path.
pub const HORIZONTAL_TOL: f64 = 1e-6;

/// Ratio of the radii, at least 1 (the fixed ball is the larger one).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Rho {
    Finite(f64),
    Infinite,
}

impl Rho {
    /// Accepts `v ≥ 1`; `+∞` becomes [`Rho::Infinite`]. The value 1 (equal
    /// balls) is admitted because it is the involutive reference case.
    pub fn new(v: f64) -> Result<Self, Error> {
        if v == f64::INFINITY {
            Ok(Rho::Infinite)
        } else if v.is_finite() && v >= 1.0 {
            Ok(Rho::Finite(v))
        } else {
            Err(Error::InvalidInput(format!("radius ratio must be ≥ 1, got {v}")))
        }
    }

    pub fn finite(self) -> Result<f64, Error> {
        match self {
            Rho::Finite(v) => Ok(v),
            Rho::Infinite => Err(Error::InfiniteRho),
        }
    }
}

/// Phase-normalized representative of a point of the configuration space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigPoint {
    pub w1: UnitQuaternion,
    pub w2: UnitQuaternion,
}

/// Gauge phase of `w1 = z1 + z2 j`: the argument of `z1`, or of `z2` when
/// `z1` vanishes.
pub fn gauge_phase(w1: Quaternion) -> f64 {
    if w1.w.hypot(w1.x) > 1e-8 {
        w1.x.atan2(w1.w)
    } else {
        w1.z.atan2(w1.y)
    }
}

/// Canonical representative: both slots multiplied on the left by `e^{−iθ}`
/// with `θ` the gauge phase of `w1`.
pub fn normalize(w1: UnitQuaternion, w2: UnitQuaternion) -> ConfigPoint {
    let th = gauge_phase(w1.quaternion());
    let h = UnitQuaternion::exp_imag([-th, 0.0, 0.0]);
    ConfigPoint { w1: h.compose(w1), w2: h.compose(w2) }
}

impl ConfigPoint {
    pub fn new(w1: UnitQuaternion, w2: UnitQuaternion) -> Self {
        normalize(w1, w2)
    }

    pub fn identity() -> Self {
        Self { w1: UnitQuaternion::IDENTITY, w2: UnitQuaternion::IDENTITY }
    }

    /// Distance between representatives in ℝ⁸.
    pub fn distance(&self, o: &ConfigPoint) -> f64 {
        let d1 = self.w1.quaternion() - o.w1.quaternion();
        let d2 = self.w2.quaternion() - o.w2.quaternion();
        (d1.norm_sq() + d2.norm_sq()).sqrt()
    }

    pub fn to_array(&self) -> [f64; 8] {
        let (a, b) = (self.w1.quaternion(), self.w2.quaternion());
        [a.w, a.x, a.y, a.z, b.w, b.x, b.y, b.z]
    }
}

/// Coefficients `(a, b)` of the right-invariant field `w ↦ (a w1, b w2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoeffPair {
    pub a: Quaternion,
    pub b: Quaternion,
}

impl CoeffPair {
    /// Builds a pair from two imaginary 3-vectors.
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Self {
        Self { a: Quaternion::from_imag(a), b: Quaternion::from_imag(b) }
    }

    pub fn from_vec6(v: [f64; 6]) -> Self {
        Self::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
    }

    pub fn to_vec6(self) -> [f64; 6] {
        let (a, b) = (self.a, self.b);
        [a.x, a.y, a.z, b.x, b.y, b.z]
    }

    pub fn scale(self, s: f64) -> Self {
        Self { a: self.a.scale(s), b: self.b.scale(s) }
    }

    pub fn norm(self) -> f64 {
        (self.a.norm_sq() + self.b.norm_sq()).sqrt()
    }

    /// The tangent vector `(a w1, b w2)` at a representative, as an 8-vector.
    pub fn at(self, p: &ConfigPoint) -> [f64; 8] {
        let u = self.a * p.w1.quaternion();
        let v = self.b * p.w2.quaternion();
        [u.w, u.x, u.y, u.z, v.w, v.x, v.y, v.z]
    }
}

impl std::ops::Add for CoeffPair {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self { a: self.a + o.a, b: self.b + o.b }
    }
}

/// Generator `(i, i)` of the circle action.
pub fn vertical() -> CoeffPair {
    CoeffPair::new([1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
}

/// The rolling frame `(j, ρj)`, `(k, ρk)`. The same coefficients serve every
/// representative `p`, since the fields are right-invariant.
pub fn dist_frame(rho: Rho, _p: &ConfigPoint) -> Result<(CoeffPair, CoeffPair), Error> {
    let r = rho.finite()?;
    Ok((CoeffPair::new([0.0, 1.0, 0.0], [0.0, r, 0.0]), CoeffPair::new([0.0, 0.0, 1.0], [0.0, 0.0, r])))
}

/// Sign relating the vector-field bracket to the quaternion commutator:
/// `[X_u, X_v] = BRACKET_SIGN · X_{([a₁,a₂], [b₁,b₂])}` for the convention
/// `[X, Y] = DY·X − DX·Y`. Pinned by the flow-commutator tests.
pub const BRACKET_SIGN: f64 = -1.0;

/// Lie bracket of the right-invariant fields with coefficients `u` and `v`.
pub fn bracket(u: CoeffPair, v: CoeffPair) -> CoeffPair {
    CoeffPair { a: u.a.commutator(v.a), b: u.b.commutator(v.b) }.scale(BRACKET_SIGN)
}

/// Dimension of the span of `gens` in the quotient `ℝ⁶ / (i, i)`.
pub fn quotient_rank(gens: &[CoeffPair]) -> usize {
    let mut cols: Vec<nalgebra::DVector<f64>> = gens
        .iter()
        .filter(|g| g.norm() > 0.0)
        .map(|g| nalgebra::DVector::from_row_slice(&g.scale(1.0 / g.norm()).to_vec6()))
        .collect();
    let v = vertical();
    cols.push(nalgebra::DVector::from_row_slice(&v.scale(1.0 / v.norm()).to_vec6()));
    linalg::rank(&DMatrix::from_columns(&cols), RANK_TOL) - 1
}

/// Growth of the flag generated by the rolling frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagReport {
    pub rho: f64,
    /// `dim Δ^l` for `l = 1, 2, …` until the flag stops growing.
    pub dims: Vec<usize>,
    /// Generators spanning each level.
    pub bases: Vec<Vec<CoeffPair>>,
}

/// Iterated brackets of the rolling frame, level by level, until the
/// dimension reaches 5, stops growing, or `max_level` levels are built.
pub fn flag(rho: Rho, p: &ConfigPoint, max_level: usize) -> Result<FlagReport, Error> {
    if max_level == 0 {
        return Err(Error::InvalidInput("max_level must be at least 1".into()));
    }
    let (f, g) = dist_frame(rho, p)?;
    let first = vec![f, g];
    let mut level = first.clone();
    let mut newest = first.clone();
    let mut dims = vec![quotient_rank(&level)];
    let mut bases = vec![level.clone()];
    while dims.len() < max_level && *dims.last().unwrap() < 5 {
        let mut fresh = Vec::new();
        for x in &first {
            for y in &newest {
                let b = bracket(*x, *y);
                if b.norm() > RANK_TOL {
                    fresh.push(b);
                }
            }
        }
        level.extend(fresh.iter().copied());
        let d = quotient_rank(&level);
        let stalled = d == *dims.last().unwrap();
        dims.push(d);
        bases.push(level.clone());
        newest = fresh;
        if stalled {
            break;
        }
    }
    Ok(FlagReport { rho: rho.finite()?, dims, bases })
}

/// Whether `f, g, [f,g], [f,[f,g]], [g,[g,f]]` span the 5-dimensional
/// tangent space.
pub fn condition_one(rho: Rho, p: &ConfigPoint) -> Result<bool, Error> {
    let (f, g) = dist_frame(rho, p)?;
    let fg = bracket(f, g);
    let gens = [f, g, fg, bracket(f, fg), bracket(g, bracket(g, f))];
    Ok(quotient_rank(&gens) == 5)
}

/// One sample `(t, q₂(t))` of a path on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub point: [f64; 3],
}

/// One sample of a rolled path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RollSample {
    pub t: f64,
    pub point: ConfigPoint,
}

/// Rolled path together with the achieved horizontality residual.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RolledPath {
    pub samples: Vec<RollSample>,
    pub max_residual: f64,
    pub substeps: usize,
}

/// C¹ interpolant through sphere samples: cubic Hermite in ℝ³ with
/// three-point tangents, radially projected back to the sphere.
struct SphereSpline<'a> {
    pts: &'a [CurveSample],
    tangents: Vec<[f64; 3]>,
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl<'a> SphereSpline<'a> {
    fn new(pts: &'a [CurveSample]) -> Self {
        let n = pts.len();
        let mut tangents = vec![[0.0; 3]; n];
        if n >= 2 {
            for m in 0..n {
                let (l, r) = (m.saturating_sub(1), (m + 1).min(n - 1));
                if m == 0 || m == n - 1 || n == 2 {
                    let d = sub3(pts[r].point, pts[l].point);
                    let h = pts[r].t - pts[l].t;
                    tangents[m] = [d[0] / h, d[1] / h, d[2] / h];
                } else {
                    let (h0, h1) = (pts[m].t - pts[l].t, pts[r].t - pts[m].t);
                    let d0 = sub3(pts[m].point, pts[l].point);
                    let d1 = sub3(pts[r].point, pts[m].point);
                    for c in 0..3 {
                        tangents[m][c] = (d0[c] * h1 / h0 + d1[c] * h0 / h1) / (h0 + h1);
                    }
                }
            }
        }
        Self { pts, tangents }
    }

    /// Point and velocity of the projected interpolant on segment `seg`.
    fn eval(&self, seg: usize, t: f64) -> ([f64; 3], [f64; 3]) {
        let (p0, p1) = (self.pts[seg], self.pts[seg + 1]);
        let h = p1.t - p0.t;
        let s = (t - p0.t) / h;
        let (m0, m1) = (self.tangents[seg], self.tangents[seg + 1]);
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        let d00 = (6.0 * s * s - 6.0 * s) / h;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d01 = (-6.0 * s * s + 6.0 * s) / h;
        let d11 = 3.0 * s * s - 2.0 * s;
        let mut x = [0.0; 3];
        let mut v = [0.0; 3];
        for c in 0..3 {
            x[c] = h00 * p0.point[c] + h10 * h * m0[c] + h01 * p1.point[c] + h11 * h * m1[c];
            v[c] = d00 * p0.point[c] + d10 * m0[c] + d01 * p1.point[c] + d11 * m1[c];
        }
        let n = dot3(x, x).sqrt();
        let u = [x[0] / n, x[1] / n, x[2] / n];
        let radial = dot3(u, v);
        let vel = [(v[0] - radial * u[0]) / n, (v[1] - radial * u[1]) / n, (v[2] - radial * u[2]) / n];
        (u, vel)
    }
}

/// Horizontal control `c ∈ span{j, k}` with `d/dt hopf(w1) = ṗ` for
/// `ẇ1 = c w1`.
fn horizontal_control(w1: Quaternion, pdot: [f64; 3]) -> Quaternion {
    let u = w1 * Quaternion::from_imag(pdot) * w1.conj();
    Quaternion::new(0.0, 0.0, 0.5 * u.z, -0.5 * u.y)
}

type State = (Quaternion, Quaternion);

fn rhs(rho: f64, s: State, pdot: [f64; 3]) -> State {
    let c = horizontal_control(s.0, pdot);
    (c * s.0, c.scale(rho) * s.1)
}

fn axpy(s: State, h: f64, k: State) -> State {
    (s.0 + k.0.scale(h), s.1 + k.1.scale(h))
}

/// Residual of one step measured on the secant: the increments
/// `log(w(t+h) w(t)⁻¹)/h` of both slots must have `j,k` parts in ratio `ρ`
/// and equal `i` parts (the latter being the vertical freedom).
fn step_residual(rho: f64, a: State, b: State, h: f64) -> f64 {
    let c1 = (b.0 * a.0.conj()).log_unit();
    let c2 = (b.1 * a.1.conj()).log_unit();
    let dj = c2[1] - rho * c1[1];
    let dk = c2[2] - rho * c1[2];
    let di = c2[0] - c1[0];
    let size = (c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2]).sqrt().max(h);
    (dj * dj + dk * dk + di * di).sqrt() / size
}

fn roll_with(
    rho: f64,
    start: &ConfigPoint,
    spline: &SphereSpline,
    substeps: usize,
) -> (Vec<RollSample>, f64) {
    let pts = spline.pts;
    let mut s: State = (start.w1.quaternion(), start.w2.quaternion());
    let mut out = vec![RollSample { t: pts[0].t, point: *start }];
    let mut worst: f64 = 0.0;
    for seg in 0..pts.len() - 1 {
        let (t0, t1) = (pts[seg].t, pts[seg + 1].t);
        let h = (t1 - t0) / substeps as f64;
        for n in 0..substeps {
            let t = t0 + n as f64 * h;
            let pd = |tt: f64| spline.eval(seg, tt).1;
            let k1 = rhs(rho, s, pd(t));
            let k2 = rhs(rho, axpy(s, 0.5 * h, k1), pd(t + 0.5 * h));
            let k3 = rhs(rho, axpy(s, 0.5 * h, k2), pd(t + 0.5 * h));
            let k4 = rhs(rho, axpy(s, h, k3), pd(t + h));
            let mut next = s;
            next = axpy(next, h / 6.0, k1);
            next = axpy(next, h / 3.0, k2);
            next = axpy(next, h / 3.0, k3);
            next = axpy(next, h / 6.0, k4);
            next = (next.0.scale(1.0 / next.0.norm()), next.1.scale(1.0 / next.1.norm()));
            worst = worst.max(step_residual(rho, s, next, h));
            s = next;
        }
        let p = normalize(UnitQuaternion::new_unchecked(s.0), UnitQuaternion::new_unchecked(s.1));
        out.push(RollSample { t: t1, point: p });
    }
    (out, worst)
}

/// Rolls along the sampled path `q₂(t)` traced by the contact point, i.e.
/// lifts it horizontally through `hopf(w1) = q₂`, starting at `start`.
///
/// Steps are halved until the horizontality residual drops below
/// [`HORIZONTAL_TOL`].
pub fn roll(rho: Rho, start: &ConfigPoint, curve: &[CurveSample]) -> Result<RolledPath, Error> {
    let r = rho.finite()?;
    if curve.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: curve.len() });
    }
    for w in curve.windows(2) {
        if w[0].t.partial_cmp(&w[1].t) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidInput("curve times must increase strictly".into()));
        }
    }
    for c in curve {
        if (dot3(c.point, c.point).sqrt() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!("curve point at t={} is off the unit sphere", c.t)));
        }
    }
    let h0 = hopf(start.w1);
    if dot3(sub3(h0, curve[0].point), sub3(h0, curve[0].point)).sqrt() > 1e-6 {
        return Err(Error::InvalidInput("start configuration does not lie over the first curve point".into()));
    }
    let spline = SphereSpline::new(curve);
    let longest = curve.windows(2).map(|w| w[1].t - w[0].t).fold(0.0, f64::max);
    let mut substeps = ((longest / 1e-2).ceil() as usize).max(1);
    let mut last = f64::INFINITY;
    for _ in 0..12 {
        let (samples, resid) = roll_with(r, start, &spline, substeps);
        if resid <= HORIZONTAL_TOL {
            return Ok(RolledPath { samples, max_residual: resid, substeps });
        }
        last = resid;
        substeps *= 2;
    }
    Err(Error::NonHorizontalDrift(last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn unit(q: Quaternion) -> UnitQuaternion {
        UnitQuaternion::new_normalize(q).unwrap()
    }

    #[test]
    fn gauge_examples() {
        let p = normalize(UnitQuaternion::IDENTITY, UnitQuaternion::IDENTITY);
        assert_eq!(p, ConfigPoint::identity());
        let e = UnitQuaternion::exp_imag([std::f64::consts::FRAC_PI_3, 0.0, 0.0]);
        let p = normalize(e, e);
        assert!(p.distance(&ConfigPoint::identity()) < 1e-15);
    }

    #[test]
    fn gauge_invariance_random() {
        let mut r = sampling::rng(7, 0);
        for n in 0..100 {
            let w1 = sampling::unit_quaternion(&mut r);
            let w2 = sampling::unit_quaternion(&mut r);
            let th = 0.0628 * n as f64 - 3.0;
            let e = UnitQuaternion::exp_imag([th, 0.0, 0.0]);
            let a = normalize(w1, w2);
            let b = normalize(e.compose(w1), e.compose(w2));
            assert!(a.distance(&b) < 1e-12);
            assert!(normalize(a.w1, a.w2).distance(&a) < 1e-15);
        }
    }

    #[test]
    fn gauge_fallback_when_z1_vanishes() {
        let w1 = unit(Quaternion::new(0.0, 0.0, 0.6, 0.8));
        let e = UnitQuaternion::exp_imag([0.9, 0.0, 0.0]);
        let a = normalize(w1, w1);
        let b = normalize(e.compose(w1), e.compose(w1));
        assert!(a.distance(&b) < 1e-12);
    }

    #[test]
    fn frame_values() {
        let p = ConfigPoint::identity();
        let (f, g) = dist_frame(Rho::Finite(3.0), &p).unwrap();
        assert_eq!(f.to_vec6(), [0.0, 1.0, 0.0, 0.0, 3.0, 0.0]);
        assert_eq!(g.to_vec6(), [0.0, 0.0, 1.0, 0.0, 0.0, 3.0]);
        assert_eq!(dist_frame(Rho::Infinite, &p), Err(Error::InfiniteRho));
    }

    #[test]
    fn frame_is_gauge_covariant() {
        let mut r = sampling::rng(8, 0);
        let (f, g) = dist_frame(Rho::Finite(2.0), &ConfigPoint::identity()).unwrap();
        for _ in 0..10 {
            let w1 = sampling::unit_quaternion(&mut r);
            let w2 = sampling::unit_quaternion(&mut r);
            let p = ConfigPoint { w1, w2 };
            let h = UnitQuaternion::exp_imag([1.3, 0.0, 0.0]);
            let p2 = ConfigPoint { w1: h.compose(w1), w2: h.compose(w2) };
            // left translation by h carries tangent vectors at p to p2
            let moved: Vec<[f64; 8]> = [f, g]
                .iter()
                .map(|c| {
                    let v = c.at(&p);
                    let hq = h.quaternion();
                    let a = hq * Quaternion::new(v[0], v[1], v[2], v[3]);
                    let b = hq * Quaternion::new(v[4], v[5], v[6], v[7]);
                    [a.w, a.x, a.y, a.z, b.w, b.x, b.y, b.z]
                })
                .collect();
            let mut cols: Vec<nalgebra::DVector<f64>> =
                [f, g, vertical()].iter().map(|c| nalgebra::DVector::from_row_slice(&c.at(&p2))).collect();
            assert_eq!(linalg::rank(&DMatrix::from_columns(&cols), RANK_TOL), 3);
            for m in moved {
                cols.push(nalgebra::DVector::from_row_slice(&m));
            }
            assert_eq!(linalg::rank(&DMatrix::from_columns(&cols), RANK_TOL), 3);
        }
    }

    #[test]
    fn bracket_structure() {
        let (f, g) = dist_frame(Rho::Finite(3.0), &ConfigPoint::identity()).unwrap();
        assert_eq!(bracket(f, g).to_vec6(), [-2.0, 0.0, 0.0, -18.0, 0.0, 0.0]);
        assert_eq!(bracket(f, f).norm(), 0.0);
    }

    #[test]
    fn jacobi_identity() {
        let mut r = sampling::rng(9, 0);
        let mut pair = || CoeffPair::new(sampling::unit_vector3(&mut r), sampling::unit_vector3(&mut r));
        let (x, y, z) = (pair(), pair(), pair());
        let s = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
        assert!(s.norm() < 1e-12);
    }

    /// Flow-commutator oracle: for exact flows `w ↦ exp(ta) w`,
    /// `φ^Y_{−t} φ^X_{−t} φ^Y_t φ^X_t (q) = q + t²[X,Y](q) + O(t³)`; the odd
    /// terms cancel in the symmetric combination and one Richardson level
    /// removes the `t²` error.
    fn fd_bracket(u: CoeffPair, v: CoeffPair, p: &ConfigPoint, t: f64) -> [f64; 8] {
        let a = fd_bracket_once(u, v, p, t);
        let b = fd_bracket_once(u, v, p, 0.5 * t);
        std::array::from_fn(|n| (4.0 * b[n] - a[n]) / 3.0)
    }

    fn fd_bracket_once(u: CoeffPair, v: CoeffPair, p: &ConfigPoint, t: f64) -> [f64; 8] {
        let flow = |c: CoeffPair, s: f64, q: (Quaternion, Quaternion)| {
            let ea = Quaternion::from_imag(c.a.imag()).scale(s).exp();
            let eb = Quaternion::from_imag(c.b.imag()).scale(s).exp();
            (ea * q.0, eb * q.1)
        };
        let comm = |s: f64| {
            let q = (p.w1.quaternion(), p.w2.quaternion());
            flow(v, -s, flow(u, -s, flow(v, s, flow(u, s, q))))
        };
        let (a, b) = (comm(t), comm(-t));
        let q = (p.w1.quaternion(), p.w2.quaternion());
        let x = (a.0 + b.0 - q.0.scale(2.0)).scale(0.5 / (t * t));
        let y = (a.1 + b.1 - q.1.scale(2.0)).scale(0.5 / (t * t));
        [x.w, x.x, x.y, x.z, y.w, y.x, y.y, y.z]
    }

    #[test]
    fn bracket_sign_matches_flow_commutator() {
        let p = ConfigPoint::identity();
        let (f, g) = dist_frame(Rho::Finite(3.0), &p).unwrap();
        let fd = fd_bracket(f, g, &p, 1e-4);
        let exact = bracket(f, g).at(&p);
        for n in 0..8 {
            assert!((fd[n] - exact[n]).abs() < 1e-6, "{n}: {} vs {}", fd[n], exact[n]);
        }
    }

    #[test]
    fn bracket_matches_flow_commutator_random() {
        let mut r = sampling::rng(10, 0);
        for _ in 0..20 {
            let u = CoeffPair::new(sampling::unit_vector3(&mut r), sampling::unit_vector3(&mut r));
            let v = CoeffPair::new(sampling::unit_vector3(&mut r), sampling::unit_vector3(&mut r));
            let p = ConfigPoint { w1: sampling::unit_quaternion(&mut r), w2: sampling::unit_quaternion(&mut r) };
            let fd = fd_bracket(u, v, &p, 1e-4);
            let exact = bracket(u, v).at(&p);
            let err = (0..8).map(|n| (fd[n] - exact[n]).powi(2)).sum::<f64>().sqrt();
            assert!(err < 1e-5, "{err}");
        }
    }

    #[test]
    fn flags() {
        let p = ConfigPoint::identity();
        assert_eq!(flag(Rho::Finite(1.0), &p, 6).unwrap().dims, vec![2, 2]);
        assert_eq!(flag(Rho::Finite(3.0), &p, 6).unwrap().dims, vec![2, 3, 5]);
        assert_eq!(flag(Rho::Finite(2.0), &p, 6).unwrap().dims, vec![2, 3, 5]);
        assert_eq!(flag(Rho::Finite(2.0), &p, 2).unwrap().dims, vec![2, 3]);
        assert!(flag(Rho::Finite(2.0), &p, 0).is_err());
    }

    #[test]
    fn condition_one_cases() {
        let mut r = sampling::rng(11, 0);
        for _ in 0..20 {
            let p = ConfigPoint::new(sampling::unit_quaternion(&mut r), sampling::unit_quaternion(&mut r));
            assert!(condition_one(Rho::Finite(2.0), &p).unwrap());
            assert!(condition_one(Rho::Finite(3.0), &p).unwrap());
            assert!(!condition_one(Rho::Finite(1.0), &p).unwrap());
        }
    }

    fn great_circle(rate: f64, n: usize, t_end: f64) -> Vec<CurveSample> {
        (0..=n)
            .map(|m| {
                let t = t_end * m as f64 / n as f64;
                CurveSample { t, point: hopf(UnitQuaternion::exp_imag([0.0, rate * t, 0.0])) }
            })
            .collect()
    }

    #[test]
    fn constant_curve_stays_put() {
        let curve: Vec<_> = (0..5).map(|m| CurveSample { t: m as f64 * 0.1, point: [1.0, 0.0, 0.0] }).collect();
        let out = roll(Rho::Finite(2.0), &ConfigPoint::identity(), &curve).unwrap();
        for s in out.samples {
            assert!(s.point.distance(&ConfigPoint::identity()) < 1e-14);
        }
    }

    #[test]
    fn great_circle_matches_closed_form() {
        for rho in [1.0, 2.0, 3.0] {
            let rate = 0.5;
            let t_end = 2.0 * std::f64::consts::PI;
            let curve = great_circle(rate, 400, t_end);
            let out = roll(Rho::Finite(rho), &ConfigPoint::identity(), &curve).unwrap();
            assert!(out.max_residual <= HORIZONTAL_TOL);
            for s in &out.samples {
                let exact = normalize(
                    UnitQuaternion::exp_imag([0.0, rate * s.t, 0.0]),
                    UnitQuaternion::exp_imag([0.0, rho * rate * s.t, 0.0]),
                );
                assert!(s.point.distance(&exact) < 1e-5, "rho {rho} t {}: {}", s.t, s.point.distance(&exact));
            }
        }
    }

    #[test]
    fn rolled_path_projects_onto_curve() {
        let curve: Vec<_> = (0..=200)
            .map(|m| {
                let t = m as f64 * 0.01;
                let w = UnitQuaternion::exp_imag([0.0, 0.7 * t, 0.4 * (3.0 * t).sin()]);
                CurveSample { t, point: hopf(w) }
            })
            .collect();
        let start = ConfigPoint::identity();
        let out = roll(Rho::Finite(2.5), &start, &curve).unwrap();
        for (s, c) in out.samples.iter().zip(&curve) {
            let h = hopf(s.point.w1);
            let d = sub3(h, c.point);
            assert!(dot3(d, d).sqrt() < 1e-6);
        }
    }

    #[test]
    fn roll_rejects_bad_start() {
        let curve = great_circle(1.0, 10, 1.0);
        let start = ConfigPoint::new(unit(Quaternion::J), UnitQuaternion::IDENTITY);
        assert!(roll(Rho::Finite(2.0), &start, &curve).is_err());
    }
}
