//! The regular part of the projector-trace kernel and the invariants built
//! from its behaviour near the diagonal.
//!
//! For transverse Jacobi planes,
//! `tr(∂_t π_{tτ} ∂_τ π_{tτ}) = ∂²/∂t∂τ ln|det σ(J(t), J(τ))|`, and the
//! determinant is evaluated as `det(Sᵀ Ω_{λ(t)} Φ_{t←τ} S)` with the fixed
//! columns `S`, which is exact up to factors depending on `t` or `τ` alone.
//! Subtracting `(n − 3)² ln|t − τ|` before differentiating removes the pole.

use serde::Serialize;

use super::extremal::{singular_extremal, CotangentState, Extremal};
use super::jacobi::{transport_delta, JacobiData};
use crate::rolling::{ConfigPoint, Rho};
use crate::Error;

/// Dimension of the configuration space.
pub const DIM: usize = 5;
/// Pole coefficient `(n − 3)²` of the trace kernel.
pub const POLE: f64 = ((DIM - 3) * (DIM - 3)) as f64;
/// `𝔯 = RICCI_SCALE · g(t, t)`; the doubled kernel is the one whose quartic
/// differential vanishes exactly on the flat distribution.
pub const RICCI_SCALE: f64 = 2.0;
/// Coefficient of `𝔯²` in the fundamental form.
pub const ALPHA: f64 = 3.0 / (5.0 * POLE);
/// Coefficient of `𝔯̈` in the fundamental form.
pub const BETA: f64 = 3.0 / 10.0;
/// Coefficient of the Schwarzian, normalized as `φ⃛/(2φ̇) − (3/4)(φ̈/φ̇)²`
/// in the chain rule for `𝔯`.
pub const CHAIN_RULE_COEFF: f64 = RICCI_SCALE * POLE / 3.0;

/// Largest mixed-difference step.
const FD_STEP: f64 = 1e-2;
/// Largest offset from the diagonal used in the diagonal fit.
const DIAG_OFFSET: f64 = 0.4;
/// Second offset set, compared with the first for the error bar.
const DIAG_REF_OFFSET: f64 = 0.3;
/// Half-width of the second difference for `𝔯̈`.
const RICCI_DOT_STEP: f64 = 0.1;

/// Extremal seen through a change of parameter `t = φ(s)`.
pub struct Parameterized<'a> {
    e: &'a Extremal,
    data: JacobiData,
    map: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
}

impl<'a> Parameterized<'a> {
    pub fn new(e: &'a Extremal) -> Result<Self, Error> {
        Self::with_map(e, |t| t)
    }

    pub fn with_map(e: &'a Extremal, map: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Result<Self, Error> {
        Ok(Self { e, data: JacobiData::new(e)?, map: Box::new(map) })
    }

    pub fn extremal(&self) -> &Extremal {
        self.e
    }

    /// `ln|det σ(J(t), J(τ))| − (n − 3)² ln|s − σ|` with `t = φ(s)`, `τ = φ(σ)`.
    pub fn potential(&self, s: f64, sigma: f64) -> Result<f64, Error> {
        let (t, tau) = ((self.map)(s), (self.map)(sigma));
        let m = self.e.model();
        let xi = self.e.xi_at(t)?;
        let omega = m.omega(&xi, self.data.scale);
        let s2 = &self.data.s2;
        let y = transport_delta(self.e, &self.data, tau, t, s2)?;
        // `Sᵀ Ω S` vanishes identically (the fibre plane is Lagrangian), so
        // only the transported increment enters and keeps its relative
        // precision as `τ → t`
        let w = s2.transpose() * omega * y;
        let det = w.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::FramesNotTransverse { t, tau });
        }
        Ok(det.abs().ln() - POLE * (s - sigma).abs().ln())
    }

    fn mixed(&self, s: f64, sigma: f64, d: f64) -> Result<f64, Error> {
        let f = |a: f64, b: f64| self.potential(a, b);
        Ok((f(s + d, sigma + d)? - f(s + d, sigma - d)? - f(s - d, sigma + d)? + f(s - d, sigma - d)?) / (4.0 * d * d))
    }

    /// Mixed central difference with one Richardson level and step `d`.
    pub fn g_with_step(&self, s: f64, sigma: f64, d: f64) -> Result<f64, Error> {
        if (s - sigma).abs() <= 2.0 * d {
            return Err(Error::FramesNotTransverse { t: s, tau: sigma });
        }
        let coarse = self.mixed(s, sigma, d)?;
        let fine = self.mixed(s, sigma, 0.5 * d)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Regular part `g(s, σ)` of the trace kernel.
    pub fn g(&self, s: f64, sigma: f64) -> Result<f64, Error> {
        self.g_with_step(s, sigma, FD_STEP.min((s - sigma).abs() / 4.0))
    }

    /// Diagonal value and second derivative from the symmetric offsets
    /// `u₀, 3u₀/4, u₀/2, u₀/4`: the averages `(g(s, s+u) + g(s, s−u))/2`
    /// are interpolated by `g₀ + a u² + b u⁴ + c u⁶`, giving `g(s, s) = g₀`
    /// and `∂²_σ g = 2a`. Small offsets are avoided on purpose since the
    /// difference quotients lose digits there.
    pub fn diagonal_with(&self, s: f64, u0: f64) -> Result<(f64, f64), Error> {
        let mut m = nalgebra::Matrix4::zeros();
        let mut rhs = nalgebra::Vector4::zeros();
        for k in 0..4 {
            let u = u0 * (4 - k) as f64 / 4.0;
            let u2 = u * u;
            rhs[k] = 0.5 * (self.g(s, s + u)? + self.g(s, s - u)?);
            for c in 0..4 {
                m[(k, c)] = u2.powi(c as i32);
            }
        }
        let sol = m.lu().solve(&rhs).ok_or(Error::FramesNotTransverse { t: s, tau: s })?;
        Ok((sol[0], 2.0 * sol[1]))
    }

    pub fn diagonal(&self, s: f64) -> Result<DiagonalEstimate, Error> {
        let (g, gtt) = self.diagonal_with(s, DIAG_OFFSET)?;
        let (g2, gtt2) = self.diagonal_with(s, DIAG_REF_OFFSET)?;
        Ok(DiagonalEstimate { g, g_tautau: gtt, g_err: (g - g2).abs(), g_tautau_err: (gtt - gtt2).abs() })
    }

    pub fn ricci(&self, s: f64) -> Result<f64, Error> {
        Ok(RICCI_SCALE * self.diagonal(s)?.g)
    }

    /// Coefficient of `(ds)⁴` in the fundamental form, with an error bar from
    /// halving the diagonal offsets.
    pub fn fundamental_form(&self, s: f64) -> Result<FormEstimate, Error> {
        let at = |u0: f64| -> Result<(f64, f64), Error> {
            let (g, gtt) = self.diagonal_with(s, u0)?;
            let r = RICCI_SCALE * g;
            let h = RICCI_DOT_STEP;
            let rp = RICCI_SCALE * self.diagonal_with(s + h, u0)?.0;
            let rm = RICCI_SCALE * self.diagonal_with(s - h, u0)?.0;
            let rdd = (rp - 2.0 * r + rm) / (h * h);
            Ok((RICCI_SCALE * gtt - ALPHA * r * r - BETA * rdd, r))
        };
        let (a, r) = at(DIAG_OFFSET)?;
        let (a2, _) = at(DIAG_REF_OFFSET)?;
        Ok(FormEstimate { value: a, err: (a - a2).abs(), ricci: r })
    }
}

/// Half-width of parameter values around `s` consumed by
/// [`Parameterized::fundamental_form`].
pub fn stencil_reach() -> f64 {
    RICCI_DOT_STEP + DIAG_OFFSET + FD_STEP
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiagonalEstimate {
    pub g: f64,
    pub g_tautau: f64,
    pub g_err: f64,
    pub g_tautau_err: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FormEstimate {
    pub value: f64,
    pub err: f64,
    pub ricci: f64,
}

/// Regular part of the trace kernel in the extremal's own parameter.
pub fn g_function(e: &Extremal, t: f64, tau: f64) -> Result<f64, Error> {
    Parameterized::new(e)?.g(t, tau)
}

/// Generalized Ricci curvature `𝔯(t)`.
pub fn ricci(e: &Extremal, t: f64) -> Result<f64, Error> {
    Parameterized::new(e)?.ricci(t)
}

/// Fundamental form `A(t)`, the coefficient of `(dt)⁴`.
pub fn fundamental_form(e: &Extremal, t: f64) -> Result<FormEstimate, Error> {
    Parameterized::new(e)?.fundamental_form(t)
}

/// Schwarzian in the normalization `φ⃛/(2φ̇) − (3/4)(φ̈/φ̇)²`.
pub fn schwarzian(d1: f64, d2: f64, d3: f64) -> Result<f64, Error> {
    if d1 == 0.0 {
        return Err(Error::DomainError);
    }
    Ok(d3 / (2.0 * d1) - 0.75 * (d2 / d1).powi(2))
}

/// Change of parameter `t = t₀ + ψ(s)` that turns a constant curvature
/// `r₀` into zero: `ψ = arctan(cs)/c` for `r₀ > 0`, `artanh(cs)/c` for
/// `r₀ < 0`, with `c² = |r₀| / CHAIN_RULE_COEFF`.
pub fn projective_map(r0: f64, t0: f64) -> impl Fn(f64) -> f64 + Send + Sync + Copy {
    let c = (r0.abs() / CHAIN_RULE_COEFF).sqrt();
    move |s: f64| {
        if c == 0.0 {
            t0 + s
        } else if r0 > 0.0 {
            t0 + (c * s).atan() / c
        } else {
            t0 + (c * s).atanh() / c
        }
    }
}

/// `4√35 (ρ² + 1) / (3 √((ρ² − 9)(9ρ² − 1)))`, and its limit `4√35/9` at
/// `ρ = ∞`.
pub fn rbar_closed_form(rho: Rho) -> Result<f64, Error> {
    let c = 4.0 * 35f64.sqrt();
    match rho {
        Rho::Infinite => Ok(c / 9.0),
        Rho::Finite(r) => {
            let r2 = r * r;
            let rad = (r2 - 9.0) * (9.0 * r2 - 1.0);
            if rad <= 0.0 {
                return Err(Error::DomainError);
            }
            Ok(c * (r2 + 1.0) / (3.0 * rad.sqrt()))
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RbarEstimate {
    pub rho: f64,
    /// `r̄`, the curvature in the normal parameter.
    pub value: f64,
    pub err: f64,
    /// Fundamental form in the extremal's own parameter.
    pub a: f64,
    pub a_err: f64,
    /// Generalized Ricci curvature in the extremal's own parameter.
    pub ricci: f64,
}

/// Sampling step of the extremals built here, per unit of arc length.
const ARC_DT: f64 = 1e-2;

/// Fundamental form and curvature at the middle of the extremal through
/// `z`, in that extremal's own parameter. The stencils run in arc length
/// and the results are carried back by the transformation laws
/// `A ↦ A φ̇⁴`, `𝔯 ↦ 𝔯 φ̇²` of the affine change `t = s / |U|`.
pub fn form_at(z: &CotangentState, rho: Rho) -> Result<FormEstimate, Error> {
    let v = z.speed(rho)?;
    let reach = stencil_reach() + 0.05;
    let e = singular_extremal(z, rho, 2.0 * reach / v, ARC_DT / v)?;
    let f = Parameterized::with_map(&e, move |s| s / v)?.fundamental_form(reach)?;
    let v4 = v.powi(4);
    Ok(FormEstimate { value: f.value * v4, err: f.err * v4, ricci: f.ricci * v * v })
}

/// `r̄` from the extremal through `z`: the fundamental form fixes the
/// normal parameter `t = t₀ + |A|^{-1/4} s`, in which the curvature is
/// recomputed.
pub fn rbar_from(z: &CotangentState, rho: Rho) -> Result<RbarEstimate, Error> {
    let form = form_at(z, rho)?;
    if form.value.abs() <= (10.0 * form.err).max(1e-12) {
        return Err(Error::FormVanishes);
    }
    let c = form.value.abs().powf(-0.25);
    let v = z.speed(rho)?;
    let reach = stencil_reach() * c + 0.05 / v;
    let e = singular_extremal(z, rho, 2.0 * reach, ARC_DT / v)?;
    let p = Parameterized::with_map(&e, move |s| reach + c * s)?;
    let d = p.diagonal(0.0)?;
    let value = RICCI_SCALE * d.g;
    let err = RICCI_SCALE * d.g_err + 0.5 * value.abs() * form.err / form.value.abs();
    Ok(RbarEstimate { rho: rho.finite()?, value, err, a: form.value, a_err: form.err, ricci: form.ricci })
}

/// `r̄(ρ)` along the reference extremal through the identity configuration.
pub fn rbar_numeric(rho: Rho) -> Result<RbarEstimate, Error> {
    let z = CotangentState::regular(rho, ConfigPoint::identity(), 0.0)?;
    rbar_from(&z, rho)
}

/// Values of the invariants on a grid of parameter values.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub rho: f64,
    pub t_grid: Vec<f64>,
    pub g_diag: Vec<f64>,
    pub ricci: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    /// `𝔯 / √|A|` at the first grid point (exact when the coefficients are
    /// constant), absent when `A` is below its error bar.
    pub rbar: Option<f64>,
}

pub fn invariant_report(e: &Extremal, t_grid: &[f64]) -> Result<InvariantReport, Error> {
    let p = Parameterized::new(e)?;
    let mut rep = InvariantReport {
        rho: e.rho.finite()?,
        t_grid: t_grid.to_vec(),
        g_diag: Vec::new(),
        ricci: Vec::new(),
        a: Vec::new(),
        rbar: None,
    };
    for (n, &t) in t_grid.iter().enumerate() {
        let d = p.diagonal(t)?;
        let f = p.fundamental_form(t)?;
        rep.g_diag.push(d.g);
        rep.ricci.push(RICCI_SCALE * d.g);
        rep.a.push(f.value);
        if n == 0 && f.value.abs() > 10.0 * f.err {
            rep.rbar = Some(RICCI_SCALE * d.g / f.value.abs().sqrt());
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extremal(rho: f64, t_end: f64) -> Extremal {
        let r = Rho::Finite(rho);
        let z = CotangentState::regular(r, ConfigPoint::identity(), 0.0).unwrap();
        singular_extremal(&z, r, t_end, 1e-2).unwrap()
    }

    #[test]
    fn g_is_symmetric() {
        let e = extremal(5.0, 2.0);
        for (t, tau) in [(0.3, 0.6), (0.9, 1.1), (0.4, 1.4), (1.2, 1.25)] {
            let (a, b) = (g_function(&e, t, tau).unwrap(), g_function(&e, tau, t).unwrap());
            assert!((a - b).abs() <= 1e-6, "g({t},{tau}) = {a}, g({tau},{t}) = {b}");
        }
    }

    #[test]
    fn diagonal_limit_converges() {
        let e = extremal(5.0, 2.0);
        let p = Parameterized::new(&e).unwrap();
        let avg = |h: f64| 0.5 * (p.g(1.0, 1.0 + h).unwrap() + p.g(1.0, 1.0 - h).unwrap());
        let hs = [0.2, 0.1, 0.05, 0.025];
        let rich: Vec<f64> = hs.windows(2).map(|w| (4.0 * avg(w[1]) - avg(w[0])) / 3.0).collect();
        let d1 = (rich[0] - rich[1]).abs();
        let d2 = (rich[1] - rich[2]).abs();
        assert!(d2 * 2.0 <= d1, "{rich:?}");
        assert!((rich[2] - p.diagonal(1.0).unwrap().g).abs() < 1e-6);
    }

    #[test]
    fn ricci_is_constant_along_a_geodesic_extremal() {
        let e = extremal(5.0, 2.0);
        let r: Vec<f64> = [0.6, 0.8, 1.0, 1.2, 1.4].iter().map(|&t| ricci(&e, t).unwrap()).collect();
        for v in &r {
            assert!((v - r[0]).abs() <= 1e-4, "{r:?}");
        }
    }

    #[test]
    fn affine_reparameterization_scales_ricci_and_form() {
        let e = extremal(5.0, 3.0);
        let base = Parameterized::new(&e).unwrap();
        let twice = Parameterized::with_map(&e, |s| 2.0 * s).unwrap();
        let (r1, r2) = (base.ricci(1.5).unwrap(), twice.ricci(0.75).unwrap());
        assert!((r2 / r1 - 4.0).abs() < 1e-4, "{r1} {r2}");
        let (a1, a2) = (base.fundamental_form(1.5).unwrap(), twice.fundamental_form(0.75).unwrap());
        assert!((a2.value / a1.value - 16.0).abs() < 0.16, "{} {}", a1.value, a2.value);
    }

    #[test]
    fn projective_parameter_kills_ricci() {
        let e = extremal(5.0, 3.0);
        let r0 = ricci(&e, 1.5).unwrap();
        let map = projective_map(r0, 1.5);
        let p = Parameterized::with_map(&e, map).unwrap();
        assert!(p.ricci(0.0).unwrap().abs() < 1e-4);
        // a projective parameter is only defined up to a Möbius map
        let q = Parameterized::with_map(&e, move |s| map(s / (1.0 + 0.3 * s))).unwrap();
        assert!(q.ricci(0.0).unwrap().abs() < 1e-4);
        // while a non-projective change brings curvature back
        let w = Parameterized::with_map(&e, move |s| map(s + 0.3 * s * s)).unwrap();
        assert!(w.ricci(0.0).unwrap().abs() > 0.1);
    }

    #[test]
    fn schwarzian_of_simple_maps() {
        // affine maps have none, s ↦ 1/s has none either
        assert_eq!(schwarzian(2.0, 0.0, 0.0).unwrap(), 0.0);
        let s = 0.7f64;
        let (d1, d2, d3) = (-1.0 / (s * s), 2.0 / s.powi(3), -6.0 / s.powi(4));
        assert!(schwarzian(d1, d2, d3).unwrap().abs() < 1e-12);
        // exp: 1/2 − 3/4
        assert!((schwarzian(1.0, 1.0, 1.0).unwrap() + 0.25).abs() < 1e-15);
        assert_eq!(schwarzian(0.0, 1.0, 1.0).unwrap_err(), Error::DomainError);
    }

    #[test]
    fn sign_of_the_form_follows_rho_minus_three() {
        let z = |r| CotangentState::regular(r, ConfigPoint::identity(), 0.0).unwrap();
        for (rho, sign) in [(2.0, -1.0), (3.0, 0.0), (4.0, 1.0)] {
            let r = Rho::Finite(rho);
            let a = form_at(&z(r), r).unwrap();
            if sign == 0.0 {
                assert!(a.value.abs() <= 1e-3, "rho = 3: {}", a.value);
            } else {
                assert!(a.value * sign > 10.0 * a.err, "rho = {rho}: {} ± {}", a.value, a.err);
            }
        }
    }

    #[test]
    fn rbar_matches_closed_form_and_ignores_scale() {
        let r = Rho::Finite(5.0);
        let est = rbar_numeric(r).unwrap();
        let closed = rbar_closed_form(r).unwrap();
        assert!((est.value / closed - 1.0).abs() < 1e-3, "{} vs {closed}", est.value);
        let z = CotangentState::regular(r, ConfigPoint::identity(), 0.0).unwrap();
        let scaled = rbar_from(&z.scaled(2.0), r).unwrap();
        assert!((scaled.value - est.value).abs() < 1e-4);
        assert_eq!(rbar_numeric(Rho::Finite(3.0)).unwrap_err(), Error::FormVanishes);
    }

    #[test]
    fn closed_form_values() {
        let lim = 4.0 * 35f64.sqrt() / 9.0;
        assert_eq!(rbar_closed_form(Rho::Infinite).unwrap(), lim);
        assert!((rbar_closed_form(Rho::Finite(1e6)).unwrap() - lim).abs() < 1e-9);
        assert!((lim - 2.6293).abs() < 1e-4);
        assert_eq!(rbar_closed_form(Rho::Finite(3.0)).unwrap_err(), Error::DomainError);
        assert_eq!(rbar_closed_form(Rho::Finite(2.0)).unwrap_err(), Error::DomainError);
        assert!(rbar_closed_form(Rho::Finite(4.0)).unwrap() > rbar_closed_form(Rho::Finite(9.0)).unwrap());
        // 4√35·17 / (3√(7·143))
        let v = 4.0 * 35f64.sqrt() * 17.0 / (3.0 * (7.0f64 * 143.0).sqrt());
        assert!((rbar_closed_form(Rho::Finite(4.0)).unwrap() - v).abs() < 1e-13);
    }
}
