//! The null cone of imaginary split-octonions and its distribution.
//!
//! The spherized cone `𝐊 = {v1 + ℓv2 : v1 ∈ Im ℍ, |v1| = |v2| = 1}` is a
//! 5-manifold. At `x ∈ 𝐊` the annihilator `Δ_x = {y ∈ ℝ⁷ : xy = 0}` is
//! 3-dimensional, contains `x`, and cuts `T_x𝐊` in a plane `𝚫_x`. The map
//! `Φ(w1, w2) = (w̄1 i w1, w̄1 w2)` identifies the configuration space of
//! rolling balls with `𝐊`, carrying the `ρ = 3` rolling distribution onto `𝚫`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::{polarize, Quaternion, SplitOctonion, UnitQuaternion};
use crate::error::Error;
use crate::linalg;
use crate::rolling::{normalize, ConfigPoint};

/// Tolerance of membership predicates.
pub const MEMBER_TOL: f64 = 1e-10;
/// Relative singular-value cut for nullspace dimensions.
pub const NULL_TOL: f64 = 1e-9;

/// Point `v1 + ℓv2` of the spherized cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConePoint {
    pub v1: Quaternion,
    pub v2: Quaternion,
}

impl ConePoint {
    /// Checks `re v1 = 0` and `|v1| = |v2| = 1` within 1e-12.
    pub fn new(v1: Quaternion, v2: Quaternion) -> Result<Self, Error> {
        let ok = v1.w.abs() <= 1e-12 && (v1.norm() - 1.0).abs() <= 1e-12 && (v2.norm() - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(Error::DegenerateCone);
        }
        Ok(Self { v1, v2 })
    }

    /// Radial projection of a nonzero cone element onto the spherization.
    pub fn from_octonion(x: SplitOctonion) -> Result<Self, Error> {
        if !cone_member(x) {
            return Err(Error::DegenerateCone);
        }
        let (n1, n2) = (x.a.norm(), x.b.norm());
        if n1 == 0.0 {
            return Err(Error::DegenerateCone);
        }
        Self::new(
            Quaternion::new(0.0, x.a.x / n1, x.a.y / n1, x.a.z / n1),
            x.b.scale(1.0 / n2),
        )
    }

    pub fn octonion(&self) -> SplitOctonion {
        SplitOctonion::new(self.v1, self.v2)
    }
}

/// Whether `x` is imaginary and null. Both descriptions of the cone, `Q = 0`
/// on `ℝ⁷` and `xx = 0`, are checked against each other.
pub fn cone_member(x: SplitOctonion) -> bool {
    let scale = x.euclid_norm().powi(2).max(f64::MIN_POSITIVE);
    let member = polarize(SplitOctonion::ONE, x).abs() <= MEMBER_TOL * scale.sqrt()
        && x.q_form().abs() <= MEMBER_TOL * scale;
    if member {
        assert!((x * x).euclid_norm() <= MEMBER_TOL * scale.max(1.0), "cone characterizations disagree");
    }
    member
}

/// Orthonormal frame of a subspace of ℝ⁸, as 8-vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaFrame {
    pub basis: Vec<[f64; 8]>,
}

impl DeltaFrame {
    fn from_columns(m: &DMatrix<f64>) -> Self {
        let basis = (0..m.ncols())
            .map(|c| {
                let mut v = [0.0; 8];
                for r in 0..8 {
                    v[r] = m[(r, c)];
                }
                v
            })
            .collect();
        Self { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(8, self.basis.len(), |r, c| self.basis[c][r])
    }

    /// Norm of the component of `y` orthogonal to the frame's span.
    pub fn distance_to(&self, y: [f64; 8]) -> f64 {
        let m = self.matrix();
        let y = DVector::from_row_slice(&y);
        (&y - &m * (m.transpose() * &y)).norm()
    }
}

/// Matrix of `y ↦ xy` on the imaginary part `ℝ⁷` (columns `i … ℓk`).
fn left_mult_on_r7(x: SplitOctonion) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(8, 7);
    for c in 0..7 {
        let col = (x * SplitOctonion::basis(c + 1)).to_array();
        for r in 0..8 {
            m[(r, c)] = col[r];
        }
    }
    m
}

fn embed_r7(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(8, m.ncols());
    out.view_mut((1, 0), (7, m.ncols())).copy_from(m);
    out
}

/// The 3-dimensional annihilator `Δ_x = {y ∈ ℝ⁷ : xy = 0}`.
pub fn delta_space(x: &ConePoint) -> Result<DeltaFrame, Error> {
    let k = linalg::nullspace(&left_mult_on_r7(x.octonion()), NULL_TOL);
    if k.ncols() != 3 {
        return Err(Error::DegenerateCone);
    }
    Ok(DeltaFrame::from_columns(&embed_r7(&k)))
}

/// The plane `𝚫_x = Δ_x ∩ T_x𝐊`.
pub fn spherized_delta(x: &ConePoint) -> Result<DeltaFrame, Error> {
    let d = delta_space(x)?.matrix();
    // T_x𝐊 inside ℝ⁷: ⟨a, v1⟩ = 0 and ⟨b, v2⟩ = 0 for y = a + ℓb
    let mut c = DMatrix::zeros(2, 8);
    for r in 0..4 {
        c[(0, r)] = x.v1.to_array()[r];
        c[(1, 4 + r)] = x.v2.to_array()[r];
    }
    let k = linalg::nullspace(&(&c * &d), NULL_TOL);
    if k.ncols() != 2 {
        return Err(Error::DegenerateCone);
    }
    let plane = linalg::column_basis(&(&d * k), 1e-12);
    Ok(DeltaFrame::from_columns(&plane))
}

/// Orthonormal basis of the 5-dimensional tangent space `T_x𝐊`.
pub fn cone_tangent_space(x: &ConePoint) -> DeltaFrame {
    let mut c = DMatrix::zeros(3, 8);
    c[(0, 0)] = 1.0;
    for r in 0..4 {
        c[(1, r)] = x.v1.to_array()[r];
        c[(2, 4 + r)] = x.v2.to_array()[r];
    }
    DeltaFrame::from_columns(&linalg::nullspace(&c, NULL_TOL))
}

/// Explicit parametrization `[v1, w] + ℓ((w + v1 w v1) v2)` of `𝚫` at
/// `v1 + ℓv2`.
pub fn delta_param(v1: Quaternion, v2: Quaternion, w: Quaternion) -> SplitOctonion {
    SplitOctonion::new(v1.commutator(w), (w + v1 * w * v1) * v2)
}

/// `Φ(w1, w2) = w̄1 i w1 + ℓ(w̄1 w2)`, constant on circle orbits.
pub fn phi(p: &ConfigPoint) -> ConePoint {
    let (w1, w2) = (p.w1.quaternion(), p.w2.quaternion());
    let v1 = w1.conj() * Quaternion::I * w1;
    ConePoint { v1: Quaternion::new(0.0, v1.x, v1.y, v1.z), v2: w1.conj() * w2 }
}

/// Lift of `v ∈ S²` through the Hopf map closest to the identity: the
/// conjugate of the minimal rotation taking `i` to `v`. At `v = −i` the
/// rotation about `j` is used.
pub fn hopf_lift(v: [f64; 3]) -> UnitQuaternion {
    let c = v[0];
    // i × v
    let q = Quaternion::new(1.0 + c, 0.0, -v[2], v[1]);
    let q = if q.norm() < 1e-12 { Quaternion::J } else { q };
    UnitQuaternion::new_normalize(q.conj()).expect("nonzero lift")
}

/// Inverse of `Φ`: `π(w1, w1 v2)` for a Hopf lift `w1` of `v1`.
pub fn phi_inv(x: &ConePoint) -> ConfigPoint {
    let w1 = hopf_lift(x.v1.imag());
    let w2 = UnitQuaternion::new_normalize(w1.quaternion() * x.v2).expect("unit product");
    normalize(w1, w2)
}

/// `DΦ` applied to the tangent vector `(z j w1, ρ z j w2)`, `z = z[0] + z[1] i`:
/// `2 w̄1 z k w1 + (ρ − 1) ℓ(w̄1 z j w2)`.
pub fn dphi_frame(p: &ConfigPoint, z: [f64; 2], rho: f64) -> SplitOctonion {
    let (w1, w2) = (p.w1.quaternion(), p.w2.quaternion());
    let zq = Quaternion::new(z[0], z[1], 0.0, 0.0);
    SplitOctonion::new(
        (w1.conj() * zq * Quaternion::K * w1).scale(2.0),
        (w1.conj() * zq * Quaternion::J * w2).scale(rho - 1.0),
    )
}

/// `DΦ` on the `ρ = 3` rolling direction `(z j w1, 3 z j w2)`, which is
/// `2 w̄1 z k w1 + 2ℓ(w̄1 z j w2)`.
pub fn dphi_pushforward(p: &ConfigPoint, z: [f64; 2]) -> SplitOctonion {
    dphi_frame(p, z, 3.0)
}

/// `‖Φ(p) · DΦ(z j w1, ρ z j w2)‖`, which vanishes exactly when `ρ = 3`.
pub fn pushforward_residual(p: &ConfigPoint, z: [f64; 2], rho: f64) -> f64 {
    (phi(p).octonion() * dphi_frame(p, z, rho)).euclid_norm()
}

/// Derivations of the split-octonions, `D(xy) = D(x)y + xD(y)`.
#[derive(Clone, Debug, Serialize)]
pub struct DerivationAlgebra {
    pub dimension: usize,
    /// Row-major 8×8 matrices in the basis `1, i, j, k, ℓ, ℓi, ℓj, ℓk`.
    pub basis: Vec<[[f64; 8]; 8]>,
}

impl DerivationAlgebra {
    pub fn apply(d: &[[f64; 8]; 8], x: SplitOctonion) -> SplitOctonion {
        let v = x.to_array();
        let mut out = [0.0; 8];
        for r in 0..8 {
            out[r] = (0..8).map(|c| d[r][c] * v[c]).sum();
        }
        SplitOctonion::from_array(out)
    }
}

fn solve_derivations() -> DerivationAlgebra {
    // unknown D[r][c] sits at column 8r + c
    let table: Vec<Vec<[f64; 8]>> = (0..8)
        .map(|p| (0..8).map(|q| (SplitOctonion::basis(p) * SplitOctonion::basis(q)).to_array()).collect())
        .collect();
    let mut m = DMatrix::zeros(512, 64);
    for p in 0..8 {
        for q in 0..8 {
            let row0 = 64 * p + 8 * q;
            // D(e_p e_q)
            for (s, &c) in table[p][q].iter().enumerate() {
                if c != 0.0 {
                    for r in 0..8 {
                        m[(row0 + r, 8 * r + s)] += c;
                    }
                }
            }
            // − D(e_p) e_q − e_p D(e_q)
            for s in 0..8 {
                for r in 0..8 {
                    let a = table[s][q][r];
                    if a != 0.0 {
                        m[(row0 + r, 8 * s + p)] -= a;
                    }
                    let b = table[p][s][r];
                    if b != 0.0 {
                        m[(row0 + r, 8 * s + q)] -= b;
                    }
                }
            }
        }
    }
    let k = linalg::nullspace(&m, NULL_TOL);
    let basis = (0..k.ncols())
        .map(|c| {
            let mut d = [[0.0; 8]; 8];
            for r in 0..8 {
                for s in 0..8 {
                    d[r][s] = k[(8 * r + s, c)];
                }
            }
            d
        })
        .collect();
    DerivationAlgebra { dimension: k.ncols(), basis }
}

/// The derivation algebra, computed once and cached.
pub fn derivation_algebra() -> &'static DerivationAlgebra {
    static CACHE: OnceLock<DerivationAlgebra> = OnceLock::new();
    CACHE.get_or_init(solve_derivations)
}

/// Largest `|Q(y)|` over unit vectors `y` of the frame of `𝚫_x`.
pub fn nurowski_quadric_check(x: &ConePoint) -> Result<f64, Error> {
    let frame = spherized_delta(x)?;
    let mut worst: f64 = 0.0;
    for a in 0..frame.dim() {
        for b in a..frame.dim() {
            worst = worst.max(
                polarize(SplitOctonion::from_array(frame.basis[a]), SplitOctonion::from_array(frame.basis[b])).abs(),
            );
        }
    }
    Ok(worst)
}
