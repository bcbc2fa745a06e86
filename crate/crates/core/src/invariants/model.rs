//! Right-trivialized cotangent bundle of `S³ × S³`.
//!
//! A covector at `w` is stored as `ξ ∈ ℝ⁶ ≅ (Im ℍ ⊕ Im ℍ)*` through
//! `ξ(a) = λ(a w)`. Tangent vectors to `T*G` are pairs `(η, δξ)` with
//! `δw = η w`. In these coordinates the symplectic form reads
//! `σ = δξ₁(η₂) − δξ₂(η₁) + ξ([η₁, η₂])`.

use nalgebra::{SMatrix, SVector};

use crate::rolling::{dist_frame, vertical, ConfigPoint, Rho};
use crate::Error;

pub type Vec6 = SVector<f64, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Vec12 = SVector<f64, 12>;
pub type Mat12 = SMatrix<f64, 12, 12>;

/// Commutator on `Im ℍ ⊕ Im ℍ`: `2 a×b` in each slot.
pub fn lie(a: &Vec6, b: &Vec6) -> Vec6 {
    let c = |x: &[f64], y: &[f64]| {
        [
            2.0 * (x[1] * y[2] - x[2] * y[1]),
            2.0 * (x[2] * y[0] - x[0] * y[2]),
            2.0 * (x[0] * y[1] - x[1] * y[0]),
        ]
    };
    let p = c(&a.as_slice()[0..3], &b.as_slice()[0..3]);
    let q = c(&a.as_slice()[3..6], &b.as_slice()[3..6]);
    Vec6::new(p[0], p[1], p[2], q[0], q[1], q[2])
}

fn unit6(n: usize) -> Vec6 {
    let mut v = Vec6::zeros();
    v[n] = 1.0;
    v
}

/// Matrix of `η ↦ [u, η]`.
pub fn ad(u: &Vec6) -> Mat6 {
    Mat6::from_fn(|r, c| lie(u, &unit6(c))[r])
}

/// Matrix of `(η₁, η₂) ↦ ξ([η₁, η₂])`, antisymmetric.
pub fn xi_form(xi: &Vec6) -> Mat6 {
    Mat6::from_fn(|r, c| xi.dot(&lie(&unit6(r), &unit6(c))))
}

/// Structure of the rolling distribution at a fixed ratio `ρ`.
#[derive(Clone, Debug)]
pub struct Model {
    pub rho: f64,
    pub f: Vec6,
    pub g: Vec6,
    pub v: Vec6,
    /// `[f, g]`
    pub fg: Vec6,
    /// `[[f, g], f]`
    pub gf: Vec6,
    /// `[[f, g], g]`
    pub gg: Vec6,
    /// Orthonormal basis of the annihilator of `f, g, [f, g], (i, i)`.
    pub ann: [Vec6; 2],
    /// Hessian of the characteristic Hamiltonian (constant).
    pub hess: Mat6,
}

impl Model {
    pub fn new(rho: Rho) -> Result<Self, Error> {
        let r = rho.finite()?;
        let (f, g) = dist_frame(rho, &ConfigPoint::identity())?;
        let f = Vec6::from_row_slice(&f.to_vec6());
        let g = Vec6::from_row_slice(&g.to_vec6());
        let v = Vec6::from_row_slice(&vertical().to_vec6());
        let fg = lie(&f, &g);
        let gf = lie(&fg, &f);
        let gg = lie(&fg, &g);
        let cons = nalgebra::DMatrix::from_rows(&[f.transpose(), g.transpose(), fg.transpose(), v.transpose()].map(
            |row| nalgebra::RowDVector::from_row_slice(row.as_slice()),
        ));
        let k = crate::linalg::nullspace(&cons, 1e-12);
        if k.ncols() != 2 {
            return Err(Error::InvalidInput(format!("ρ = {r} has a degenerate flag")));
        }
        let ann = [Vec6::from_column_slice(k.column(0).as_slice()), Vec6::from_column_slice(k.column(1).as_slice())];
        let hess = f * gg.transpose() + gg * f.transpose() - g * gf.transpose() - gf * g.transpose();
        Ok(Self { rho: r, f, g, v, fg, gf, gg, ann, hess })
    }

    /// `Ĥ(ξ) = ξ([[f,g],g]) ξ(f) − ξ([[f,g],f]) ξ(g)`; its Hamiltonian vector
    /// field on `{ξ(f) = ξ(g) = ξ([f,g]) = 0}` is the characteristic
    /// direction of the restricted symplectic form.
    pub fn hamiltonian(&self, xi: &Vec6) -> f64 {
        xi.dot(&self.gg) * xi.dot(&self.f) - xi.dot(&self.gf) * xi.dot(&self.g)
    }

    /// `U = ∇Ĥ(ξ)`, linear in `ξ`.
    pub fn control(&self, xi: &Vec6) -> Vec6 {
        self.hess * xi
    }

    /// `ξ̇(b) = ξ([b, U])`.
    pub fn xi_dot(&self, xi: &Vec6) -> Vec6 {
        xi_form(xi) * self.control(xi)
    }

    /// Orthogonal projection onto the span of `ann`.
    pub fn project_ann(&self, xi: &Vec6) -> Vec6 {
        self.ann[0] * self.ann[0].dot(xi) + self.ann[1] * self.ann[1].dot(xi)
    }

    /// Linearized characteristic flow in coordinates `(η, δξ / s)`.
    pub fn variational(&self, xi: &Vec6, s: f64) -> Mat12 {
        let u = self.control(xi);
        let adu = ad(&u);
        let mut a = Mat12::zeros();
        a.fixed_view_mut::<6, 6>(0, 0).copy_from(&adu);
        a.fixed_view_mut::<6, 6>(0, 6).copy_from(&(self.hess * s));
        a.fixed_view_mut::<6, 6>(6, 6).copy_from(&(-adu.transpose() + xi_form(xi) * self.hess));
        a
    }

    /// Symplectic form in coordinates `(η, δξ / s)`, divided by `s`.
    pub fn omega(&self, xi: &Vec6, s: f64) -> Mat12 {
        let mut o = Mat12::zeros();
        o.fixed_view_mut::<6, 6>(0, 0).copy_from(&(xi_form(xi) / s));
        o.fixed_view_mut::<6, 6>(0, 6).copy_from(&(-Mat6::identity()));
        o.fixed_view_mut::<6, 6>(6, 0).copy_from(&Mat6::identity());
        o
    }
}
