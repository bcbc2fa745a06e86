//! Jacobi curves of a singular extremal.
//!
//! The subspace of `T C⁰` lying over the distribution at `λ(t)` is carried
//! back to `z = λ(0)` by the linearized flow and reduced to the 4-dimensional
//! symplectic space `Σ_z = (E^∠ ∩ T_z C⁰) / span{Z_H, Z_V, E}`, where `Z_H`
//! is the characteristic direction, `Z_V` the circle orbit and `E` the Euler
//! (radial) direction.

use nalgebra::{DMatrix, SMatrix};
use serde::Serialize;

use super::extremal::Extremal;
use super::model::{Mat12, Vec12, Vec6};
use crate::linalg;
use crate::Error;

/// Longest Magnus step.
const MAX_STEP: f64 = 0.05;
/// Refusal threshold on the condition number of `[J(t) | J(τ)]`.
pub const COND_LIMIT: f64 = 1e8;

pub type Frame = SMatrix<f64, 12, 2>;
pub type Mat4 = SMatrix<f64, 4, 4>;
pub type Mat42 = SMatrix<f64, 4, 2>;

/// Lagrangian plane in `Σ_z` with the reduced symplectic form.
#[derive(Clone, Debug, Serialize)]
pub struct LagrangianFrame {
    pub basis: [[f64; 4]; 2],
    pub omega: [[f64; 4]; 4],
}

impl LagrangianFrame {
    /// `|σ(b₁, b₂)|` for the orthonormal basis.
    pub fn lagrangian_residual(&self) -> f64 {
        let mut s = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                s += self.basis[0][r] * self.omega[r][c] * self.basis[1][c];
            }
        }
        s.abs()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(4, 2, |r, c| self.basis[c][r])
    }
}

/// Constant data of the Jacobi construction for one extremal.
pub struct JacobiData {
    /// Balancing scale `|ξ|` of the covector coordinates.
    pub scale: f64,
    /// Two fixed columns spanning the fiber subspace modulo its kernel.
    pub s2: Frame,
    /// Orthonormal coordinates on `Σ_z` (rows act on 12-vectors).
    pub reduce: SMatrix<f64, 4, 12>,
    pub omega_sigma: Mat4,
}

fn block(eta: &Vec6, dxi: &Vec6) -> Vec12 {
    let mut v = Vec12::zeros();
    v.fixed_rows_mut::<6>(0).copy_from(eta);
    v.fixed_rows_mut::<6>(6).copy_from(dxi);
    v
}

impl JacobiData {
    pub fn new(e: &Extremal) -> Result<Self, Error> {
        let m = e.model();
        let xi = e.xi_at(0.0)?;
        let s = e.xi_scale();
        let u = m.control(&xi);
        let xin = xi / xi.norm();
        // horizontal direction complementary to the control
        let eta_h = {
            let un = u / u.norm();
            let mut h = m.f - un * un.dot(&m.f);
            if h.norm() < 1e-8 * m.f.norm() {
                h = m.g - un * un.dot(&m.g);
            }
            h / h.norm()
        };
        // annihilator direction complementary to ξ
        let nu = {
            let n = m.ann[0] - xin * xin.dot(&m.ann[0]);
            let n = if n.norm() < 0.5 { m.ann[1] - xin * xin.dot(&m.ann[1]) } else { n };
            n / n.norm()
        };
        let s2 = Frame::from_columns(&[block(&eta_h, &Vec6::zeros()), block(&Vec6::zeros(), &nu)]);

        // T_z C⁰ ∩ E^∠: η ⟂ ξ (as a pairing), δξ in the annihilator
        let mut cons = DMatrix::zeros(5, 12);
        for c in 0..6 {
            cons[(0, c)] = xi[c];
            cons[(1, 6 + c)] = m.f[c];
            cons[(2, 6 + c)] = m.g[c];
            cons[(3, 6 + c)] = m.fg[c];
            cons[(4, 6 + c)] = m.v[c];
        }
        let y = linalg::nullspace(&cons, 1e-12);
        if y.ncols() != 7 {
            return Err(Error::TransportSingular);
        }
        let zh = block(&u, &Vec6::zeros());
        let zv = block(&m.v, &(super::model::xi_form(&xi) * m.v / s));
        let ee = block(&Vec6::zeros(), &(xi / s));
        let n = DMatrix::from_columns(&[zh, zv, ee].map(|v| nalgebra::DVector::from_column_slice(v.as_slice())));
        let nq = linalg::column_basis(&n, 1e-12);
        if nq.ncols() != 3 {
            return Err(Error::TransportSingular);
        }
        let rest = &y - &nq * (nq.transpose() * &y);
        let c = linalg::column_basis(&rest, 1e-9);
        if c.ncols() != 4 {
            return Err(Error::TransportSingular);
        }
        let reduce = SMatrix::<f64, 4, 12>::from_fn(|r, k| c[(k, r)]);
        let omega = m.omega(&xi, s);
        let omega_sigma = reduce * omega * reduce.transpose();
        Ok(Self { scale: s, s2, reduce, omega_sigma })
    }
}

/// Linearized flow `Φ_{to←from}` and `Φ_{to←from} S − S` for the columns
/// `S`, accumulated directly so that the difference keeps full relative
/// precision for short intervals. Fourth-order Magnus steps with Gauss
/// nodes, cut at the fixed grid `k · MAX_STEP` so that the result depends
/// smoothly on both endpoints.
pub(crate) fn transport_delta(
    e: &Extremal,
    data: &JacobiData,
    from: f64,
    to: f64,
    s: &Frame,
) -> Result<Frame, Error> {
    let m = e.model();
    let c = 3f64.sqrt() / 6.0;
    let mut cuts = vec![from];
    let (lo, hi) = (from.min(to), from.max(to));
    let first = (lo / MAX_STEP).floor() as i64 + 1;
    let mut inner: Vec<f64> =
        (first..).map(|k| k as f64 * MAX_STEP).take_while(|&x| x < hi).filter(|&x| x > lo).collect();
    if to < from {
        inner.reverse();
    }
    cuts.extend(inner);
    cuts.push(to);
    let mut y = Frame::zeros();
    for w in cuts.windows(2) {
        let (a, h) = (w[0], w[1] - w[0]);
        if h == 0.0 {
            continue;
        }
        let a1 = m.variational(&e.xi_at(a + (0.5 - c) * h)?, data.scale);
        let a2 = m.variational(&e.xi_at(a + (0.5 + c) * h)?, data.scale);
        let omega = (a1 + a2) * (0.5 * h) + (a2 * a1 - a1 * a2) * (3f64.sqrt() / 12.0 * h * h);
        let e1: Mat12 = linalg::expm1(&omega);
        y += e1 * (s + y);
    }
    Ok(y)
}

pub(crate) fn transport(e: &Extremal, data: &JacobiData, from: f64, to: f64, s: &Frame) -> Result<Frame, Error> {
    Ok(s + transport_delta(e, data, from, to, s)?)
}

/// `J(t)` in `Σ_z` coordinates, unnormalized (the fixed columns transported).
pub(crate) fn raw_frame(e: &Extremal, data: &JacobiData, t: f64) -> Result<Mat42, Error> {
    let x = transport(e, data, t, 0.0, &data.s2)?;
    Ok(data.reduce * x)
}

/// Derivative of [`raw_frame`]: `d/dt Φ_{0←t} S = −Φ_{0←t} A(t) S`.
pub(crate) fn raw_frame_derivative(e: &Extremal, data: &JacobiData, t: f64) -> Result<Mat42, Error> {
    let a = e.model().variational(&e.xi_at(t)?, data.scale);
    let v = transport(e, data, t, 0.0, &(a * data.s2))?;
    Ok(-(data.reduce * v))
}

fn to_frame(p: &Mat42, omega: &Mat4) -> Result<LagrangianFrame, Error> {
    let d = DMatrix::from_column_slice(4, 2, p.as_slice());
    let q = linalg::column_basis(&d, 1e-10);
    if q.ncols() != 2 {
        return Err(Error::TransportSingular);
    }
    Ok(LagrangianFrame {
        basis: [0, 1].map(|c| std::array::from_fn(|r| q[(r, c)])),
        omega: std::array::from_fn(|r| std::array::from_fn(|c| omega[(r, c)])),
    })
}

/// The Jacobi curve at time `t`, as a plane in `Σ_z`.
pub fn jacobi_curve(e: &Extremal, t: f64) -> Result<LagrangianFrame, Error> {
    let data = JacobiData::new(e)?;
    to_frame(&raw_frame(e, &data, t)?, &data.omega_sigma)
}

/// The projector onto `J(τ)` along `J(t)`, refusing ill-conditioned pairs.
pub fn projector(e: &Extremal, t: f64, tau: f64) -> Result<Mat4, Error> {
    let data = JacobiData::new(e)?;
    let (pt, pu) = (raw_frame(e, &data, t)?, raw_frame(e, &data, tau)?);
    projector_from(&pt, &pu).ok_or(Error::FramesNotTransverse { t, tau })
}

fn joint(pt: &Mat42, pu: &Mat42) -> Mat4 {
    let mut b = Mat4::zeros();
    b.fixed_view_mut::<4, 2>(0, 0).copy_from(pt);
    b.fixed_view_mut::<4, 2>(0, 2).copy_from(pu);
    b
}

fn projector_from(pt: &Mat42, pu: &Mat42) -> Option<Mat4> {
    let b = joint(pt, pu);
    let sv = b.singular_values();
    if sv.min() * COND_LIMIT < sv.max() {
        return None;
    }
    let binv = b.try_inverse()?;
    let mut right = Mat4::zeros();
    right.fixed_view_mut::<4, 2>(0, 2).copy_from(pu);
    Some(right * binv)
}

/// `tr(∂_t π_{tτ} ∂_τ π_{tτ})` from the analytic derivatives of the frames.
/// Its leading behaviour is `(n − 3)² / (t − τ)²`.
pub fn trace_kernel(e: &Extremal, t: f64, tau: f64) -> Result<f64, Error> {
    let data = JacobiData::new(e)?;
    trace_kernel_with(e, &data, t, tau)
}

pub(crate) fn trace_kernel_with(e: &Extremal, data: &JacobiData, t: f64, tau: f64) -> Result<f64, Error> {
    let (pt, pu) = (raw_frame(e, data, t)?, raw_frame(e, data, tau)?);
    let (dt, du) = (raw_frame_derivative(e, data, t)?, raw_frame_derivative(e, data, tau)?);
    let b = joint(&pt, &pu);
    let sv = b.singular_values();
    if sv.min() * COND_LIMIT < sv.max() {
        return Err(Error::FramesNotTransverse { t, tau });
    }
    let binv = b.try_inverse().ok_or(Error::FramesNotTransverse { t, tau })?;
    let mut zp = Mat4::zeros();
    zp.fixed_view_mut::<4, 2>(0, 2).copy_from(&pu);
    let mut dtz = Mat4::zeros();
    dtz.fixed_view_mut::<4, 2>(0, 0).copy_from(&dt);
    let mut duz = Mat4::zeros();
    duz.fixed_view_mut::<4, 2>(0, 2).copy_from(&du);
    let pi_t = -(zp * binv * dtz * binv);
    let pi_u = duz * binv - zp * binv * duz * binv;
    Ok((pi_t * pi_u).trace())
}

/// Smallest principal angle between `J(t)` and `J(τ)`.
pub fn transversality_angle(e: &Extremal, t: f64, tau: f64) -> Result<f64, Error> {
    let data = JacobiData::new(e)?;
    let a = raw_frame(e, &data, t)?;
    let b = raw_frame(e, &data, tau)?;
    Ok(linalg::min_principal_angle(
        &DMatrix::from_column_slice(4, 2, a.as_slice()),
        &DMatrix::from_column_slice(4, 2, b.as_slice()),
    ))
}

/// Point of the projective plane `ℙ(z^⊥ / span{U, V})` traced by the
/// distinguished line `J⁰(t)`: the fiber direction complementary to `ξ`,
/// carried back to `z`, seen through its base component.
pub(crate) fn j0_point(e: &Extremal, data: &JacobiData, plane: &SMatrix<f64, 6, 3>, t: f64) -> Result<[f64; 3], Error> {
    let col = Frame::from_columns(&[Vec12::zeros(), data.s2.column(1).into_owned()]);
    let x = transport(e, data, t, 0.0, &col)?;
    let eta: Vec6 = x.column(1).fixed_rows::<6>(0).into_owned();
    let c = plane.transpose() * eta;
    let n = c.norm();
    if n == 0.0 {
        return Err(Error::DegenerateSamples);
    }
    Ok([c[0] / n, c[1] / n, c[2] / n])
}

/// Orthonormal basis of `{η : ξ(η) = 0} ⊖ span{U, V}` at `z`.
pub(crate) fn quotient_plane(e: &Extremal) -> Result<SMatrix<f64, 6, 3>, Error> {
    let m = e.model();
    let xi = e.xi_at(0.0)?;
    let u = m.control(&xi);
    let cons = DMatrix::from_fn(3, 6, |r, c| [xi, u, m.v][r][c]);
    let k = linalg::nullspace(&cons, 1e-12);
    if k.ncols() != 3 {
        return Err(Error::DegenerateSamples);
    }
    Ok(SMatrix::<f64, 6, 3>::from_fn(|r, c| k[(r, c)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::extremal::{singular_extremal, CotangentState};
    use crate::rolling::{ConfigPoint, Rho};

    fn extremal(rho: f64) -> Extremal {
        let r = Rho::Finite(rho);
        let z = CotangentState::regular(r, ConfigPoint::identity(), 0.0).unwrap();
        singular_extremal(&z, r, 2.0, 1e-2).unwrap()
    }

    #[test]
    fn start_is_the_fibre_plane() {
        let e = extremal(5.0);
        let data = JacobiData::new(&e).unwrap();
        let p = raw_frame(&e, &data, 0.0).unwrap();
        assert!((p - data.reduce * data.s2).norm() < 1e-15);
    }

    #[test]
    fn frames_are_lagrangian() {
        let e = extremal(5.0);
        for k in 0..=10 {
            let f = jacobi_curve(&e, 0.2 * k as f64).unwrap();
            assert!(f.lagrangian_residual() <= 1e-8, "t = {}", 0.2 * k as f64);
        }
    }

    #[test]
    fn transport_composes() {
        let e = extremal(2.0);
        let data = JacobiData::new(&e).unwrap();
        let direct = transport(&e, &data, 1.3, 0.1, &data.s2).unwrap();
        let mid = transport(&e, &data, 1.3, 0.77, &data.s2).unwrap();
        let two = transport(&e, &data, 0.77, 0.1, &mid).unwrap();
        assert!((direct - two).norm() < 1e-9 * direct.norm());
        let back = transport(&e, &data, 0.1, 1.3, &direct).unwrap();
        assert!((back - data.s2).norm() < 1e-9);
    }

    #[test]
    fn nearby_frames_are_transverse_with_cubic_contact() {
        let e = extremal(5.0);
        for d in [0.15, 0.2, 0.25, 0.3] {
            assert!(transversality_angle(&e, 1.0, 1.0 + d).unwrap() > 1e-4);
            assert!(transversality_angle(&e, 1.0, 1.0 - d).unwrap() > 1e-4);
        }
        // closer in, the smallest angle decays like |t − τ|³ but never closes
        let c = transversality_angle(&e, 1.0, 1.1).unwrap() / 1e-3;
        for d in [0.01, 0.02, 0.05] {
            let ratio = transversality_angle(&e, 1.0, 1.0 + d).unwrap() / (d * d * d);
            assert!(ratio > 0.5 * c && ratio < 2.0 * c, "d = {d}: {ratio} vs {c}");
        }
    }

    #[test]
    fn projector_is_idempotent_and_kills_the_first_plane() {
        let e = extremal(4.0);
        let data = JacobiData::new(&e).unwrap();
        let pi = projector(&e, 0.6, 0.9).unwrap();
        assert!((pi * pi - pi).norm() < 1e-8 * pi.norm());
        let pt = raw_frame(&e, &data, 0.6).unwrap();
        let pu = raw_frame(&e, &data, 0.9).unwrap();
        assert!((pi * pt).norm() < 1e-8 * pi.norm() * pt.norm());
        assert!((pi * pu - pu).norm() < 1e-8 * pi.norm() * pu.norm());
        assert_eq!(projector(&e, 0.6, 0.6).unwrap_err(), Error::FramesNotTransverse { t: 0.6, tau: 0.6 });
    }

    #[test]
    fn trace_kernel_has_the_double_pole() {
        let e = extremal(5.0);
        let at = |u: f64| u * u * trace_kernel(&e, 1.0, 1.0 + u).unwrap();
        let (coarse, fine) = (at(0.08), at(0.04));
        assert!((fine - 4.0).abs() < (coarse - 4.0).abs());
        // the remainder is quadratic in u
        assert!(((4.0 * fine - coarse) / 3.0 - 4.0).abs() < 1e-4);
    }
}
