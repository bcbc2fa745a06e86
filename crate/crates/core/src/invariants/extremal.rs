use serde::{Deserialize, Serialize};

use super::model::{Model, Vec6};
use crate::algebra::{Quaternion, UnitQuaternion};
use crate::rolling::{gauge_phase, ConfigPoint, Rho};
use crate::Error;

/// Tolerance of the annihilator tests in [`char_membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Orthonormal basis of `{ξ ∈ ℝ⁶ : ξ(i, i) = 0}` used for the coordinates `p`.
pub fn cobasis() -> [Vec6; 5] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        Vec6::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0),
        Vec6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
        Vec6::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0),
        Vec6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0),
        Vec6::new(h, 0.0, 0.0, -h, 0.0, 0.0),
    ]
}

fn rotate_slots(h: Quaternion, xi: &Vec6) -> Vec6 {
    let r = |v: [f64; 3]| (h * Quaternion::from_imag(v) * h.conj()).imag();
    let a = r([xi[0], xi[1], xi[2]]);
    let b = r([xi[3], xi[4], xi[5]]);
    Vec6::new(a[0], a[1], a[2], b[0], b[1], b[2])
}

/// Covector on the configuration space at a phase-normalized point.
///
/// `p` holds the right-trivialized components `ξ(a) = λ(a w)` in the basis
/// [`cobasis`] of the annihilator of the circle direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CotangentState {
    pub q: ConfigPoint,
    pub p: [f64; 5],
}

impl CotangentState {
    /// Builds the state at the canonical representative of `(w1, w2)`,
    /// transporting `ξ` through the gauge rotation.
    pub fn from_raw(w1: Quaternion, w2: Quaternion, xi: &Vec6) -> Result<Self, Error> {
        let th = gauge_phase(w1);
        let h = UnitQuaternion::exp_imag([-th, 0.0, 0.0]);
        let w1 = UnitQuaternion::new_normalize(w1)?;
        let w2 = UnitQuaternion::new_normalize(w2)?;
        let q = ConfigPoint { w1: h.compose(w1), w2: h.compose(w2) };
        let xi = rotate_slots(h.quaternion(), xi);
        let basis = cobasis();
        let p = std::array::from_fn(|n| basis[n].dot(&xi));
        let s = Self { q, p };
        if s.xi().norm() == 0.0 {
            return Err(Error::InvalidInput("covector must be nonzero".into()));
        }
        Ok(s)
    }

    pub fn xi(&self) -> Vec6 {
        let basis = cobasis();
        (0..5).fold(Vec6::zeros(), |acc, n| acc + basis[n] * self.p[n])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { q: self.q, p: self.p.map(|c| c * s) }
    }

    /// Speed `|U|` of the base curve of the extremal through this state.
    pub fn speed(&self, rho: Rho) -> Result<f64, Error> {
        Ok(Model::new(rho)?.control(&self.xi()).norm())
    }

    /// A regular point of the characteristic variety over `q`: the
    /// annihilator direction at angle `angle`, scaled so that the base curve
    /// has unit speed.
    pub fn regular(rho: Rho, q: ConfigPoint, angle: f64) -> Result<Self, Error> {
        let m = Model::new(rho)?;
        let xi = m.ann[0] * angle.cos() + m.ann[1] * angle.sin();
        let xi = xi / m.control(&xi).norm();
        // the annihilator is fixed by the gauge rotation, so q may be used as is
        let basis = cobasis();
        Ok(Self { q, p: std::array::from_fn(|n| basis[n].dot(&xi)) })
    }
}

/// Whether `ξ` annihilates the second and third members of the flag.
pub fn char_membership(z: &CotangentState, rho: Rho) -> Result<(bool, bool), Error> {
    let m = Model::new(rho)?;
    let xi = z.xi();
    let n = xi.norm();
    let pairs = |gens: &[Vec6]| gens.iter().all(|v| (xi.dot(v) / v.norm()).abs() <= MEMBERSHIP_TOL * n);
    let in2 = pairs(&[m.f, m.g, m.fg]);
    let in3 = in2 && pairs(&[m.gf, m.gg]);
    Ok((in2, in3))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSample {
    pub t: f64,
    pub state: CotangentState,
}

/// Singular extremal sampled on a uniform grid.
#[derive(Clone, Debug, Serialize)]
pub struct Extremal {
    pub rho: Rho,
    pub dt: f64,
    pub samples: Vec<ExtremalSample>,
    /// Coefficients `(u₁, u₂)` of the control `u₁ f + u₂ g`.
    pub controls: Vec<[f64; 2]>,
    /// Largest constraint violation removed by the per-step projection.
    pub max_drift: f64,
    #[serde(skip)]
    pub(crate) model: Model,
    #[serde(skip)]
    pub(crate) xis: Vec<Vec6>,
}

type Raw = (Quaternion, Quaternion, Vec6);

fn deriv(m: &Model, s: &Raw) -> Raw {
    let u = m.control(&s.2);
    let ua = Quaternion::new(0.0, u[0], u[1], u[2]);
    let ub = Quaternion::new(0.0, u[3], u[4], u[5]);
    (ua * s.0, ub * s.1, m.xi_dot(&s.2))
}

fn advance(s: &Raw, h: f64, k: &Raw) -> Raw {
    (s.0 + k.0.scale(h), s.1 + k.1.scale(h), s.2 + k.2 * h)
}

fn rk4(m: &Model, s: &Raw, h: f64) -> Raw {
    let k1 = deriv(m, s);
    let k2 = deriv(m, &advance(s, 0.5 * h, &k1));
    let k3 = deriv(m, &advance(s, 0.5 * h, &k2));
    let k4 = deriv(m, &advance(s, h, &k3));
    let mut n = advance(s, h / 6.0, &k1);
    n = advance(&n, h / 3.0, &k2);
    n = advance(&n, h / 3.0, &k3);
    advance(&n, h / 6.0, &k4)
}

/// RK4 on `ξ` alone, which evolves independently of the base point.
fn rk4_xi(m: &Model, xi: &Vec6, h: f64) -> Vec6 {
    let k1 = m.xi_dot(xi);
    let k2 = m.xi_dot(&(xi + k1 * (0.5 * h)));
    let k3 = m.xi_dot(&(xi + k2 * (0.5 * h)));
    let k4 = m.xi_dot(&(xi + k3 * h));
    xi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Substep for the dense covector track, small enough that restarting the
/// integration from any stored sample agrees with the track to roundoff.
const XI_SUBSTEP: f64 = 1e-3;

fn advance_xi(m: &Model, xi: &Vec6, h: f64) -> Vec6 {
    let n = ((h.abs() / XI_SUBSTEP).ceil() as usize).max(1);
    (0..n).fold(*xi, |x, _| rk4_xi(m, &x, h / n as f64))
}

/// Integrates the characteristic flow from `z0` over `[0, T]` with step
/// `dt`, projecting back onto the constraint set after every step.
pub fn singular_extremal(z0: &CotangentState, rho: Rho, t_end: f64, dt: f64) -> Result<Extremal, Error> {
    if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) {
        return Err(Error::InvalidInput("need 0 < dt ≤ T".into()));
    }
    let m = Model::new(rho)?;
    match char_membership(z0, rho)? {
        (false, _) => return Err(Error::InvalidInput("start covector does not annihilate Δ²".into())),
        (true, true) => return Err(Error::LeavesRegularLocus),
        _ => {}
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut s: Raw = (z0.q.w1.quaternion(), z0.q.w2.quaternion(), m.project_ann(&z0.xi()));
    let goh = |xi: &Vec6| xi.dot(&m.gf).hypot(xi.dot(&m.gg)) / (xi.norm() * m.gf.norm());
    let control = |xi: &Vec6| [xi.dot(&m.gg), -xi.dot(&m.gf)];
    let mut samples = Vec::with_capacity(steps + 1);
    let mut controls = Vec::with_capacity(steps + 1);
    let mut xis = Vec::with_capacity(steps + 1);
    // the covector also gets a separate fine track, which the Jacobi
    // curves read between samples
    let mut xi_fine = s.2;
    let mut drift: f64 = 0.0;
    samples.push(ExtremalSample { t: 0.0, state: CotangentState::from_raw(s.0, s.1, &s.2)? });
    controls.push(control(&s.2));
    xis.push(s.2);
    for n in 1..=steps {
        let mut next = rk4(&m, &s, h);
        let projected = m.project_ann(&next.2);
        drift = drift.max((next.2 - projected).norm() / projected.norm());
        next.2 = projected;
        next.0 = next.0.scale(1.0 / next.0.norm());
        next.1 = next.1.scale(1.0 / next.1.norm());
        if goh(&next.2) < 1e-12 {
            return Err(Error::LeavesRegularLocus);
        }
        s = next;
        samples.push(ExtremalSample { t: n as f64 * h, state: CotangentState::from_raw(s.0, s.1, &s.2)? });
        controls.push(control(&s.2));
        xi_fine = advance_xi(&m, &xi_fine, h);
        xis.push(xi_fine);
    }
    Ok(Extremal { rho, dt: h, samples, controls, max_drift: drift, model: m, xis })
}

impl Extremal {
    pub fn t_end(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Right-trivialized covector at the raw (unnormalized) representative.
    pub(crate) fn xi_at(&self, t: f64) -> Result<Vec6, Error> {
        let slack = 1e-9 * self.t_end().max(1.0);
        if !(t >= -slack && t <= self.t_end() + slack) {
            return Err(Error::OutOfRange(t));
        }
        let k = ((t / self.dt).floor().max(0.0) as usize).min(self.xis.len() - 1);
        let dt = t - k as f64 * self.dt;
        if dt == 0.0 {
            return Ok(self.xis[k]);
        }
        Ok(advance_xi(&self.model, &self.xis[k], dt))
    }

    /// Base configuration at each sample.
    pub fn base_curve(&self) -> Vec<(f64, ConfigPoint)> {
        self.samples.iter().map(|s| (s.t, s.state.q)).collect()
    }

    /// Scale of the covector, used to balance the variational coordinates.
    pub(crate) fn xi_scale(&self) -> f64 {
        self.xis[0].norm()
    }
}
