use nalgebra::DMatrix;
use serde::Serialize;

use super::extremal::Extremal;
use super::jacobi::{j0_point, quotient_plane, JacobiData};
use crate::Error;

/// Samples needed for a meaningful conic fit (a conic has five degrees of
/// freedom).
pub const MIN_SAMPLES: usize = 9;

#[derive(Clone, Debug, Serialize)]
pub struct ConicFit {
    /// `σ_min / σ_max` of the design matrix.
    pub residual: f64,
    /// Coefficients of `x², xy, y², xz, yz, z²`.
    pub coefficients: [f64; 6],
}

/// Least-squares conic through points of the projective plane given by
/// homogeneous coordinates.
pub fn fit_conic(points: &[[f64; 3]]) -> Result<ConicFit, Error> {
    if points.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: points.len() });
    }
    let mut d = DMatrix::zeros(points.len(), 6);
    for (r, p) in points.iter().enumerate() {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if n == 0.0 {
            return Err(Error::DegenerateSamples);
        }
        let [x, y, z] = p.map(|c| c / n);
        let row = [x * x, x * y, y * y, x * z, y * z, z * z];
        for c in 0..6 {
            d[(r, c)] = row[c];
        }
    }
    let svd = d.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let order: Vec<usize> = {
        let mut o: Vec<usize> = (0..6).collect();
        o.sort_by(|a, b| sv[*b].total_cmp(&sv[*a]));
        o
    };
    let smax = sv[order[0]];
    // five independent constraints are needed for a unique conic
    if sv[order[4]] <= 1e-9 * smax {
        return Err(Error::DegenerateSamples);
    }
    let last = order[5];
    Ok(ConicFit { residual: sv[last] / smax, coefficients: std::array::from_fn(|c| vt[(last, c)]) })
}

/// Conic-fit residual of the curve traced by `J⁰(t)` in `ℙ(z^⊥ / T γ)`,
/// sampled at `t_k = T k / samples`, `k = 1..=samples`.
pub fn quadric_flatness_test_with(e: &Extremal, samples: usize) -> Result<ConicFit, Error> {
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_SAMPLES, got: samples });
    }
    let data = JacobiData::new(e)?;
    let plane = quotient_plane(e)?;
    let t_end = e.t_end();
    let pts = (1..=samples)
        .map(|k| j0_point(e, &data, &plane, t_end * k as f64 / samples as f64))
        .collect::<Result<Vec<_>, _>>()?;
    fit_conic(&pts)
}

/// [`quadric_flatness_test_with`] using twelve samples.
pub fn quadric_flatness_test(e: &Extremal) -> Result<f64, Error> {
    Ok(quadric_flatness_test_with(e, 12)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_on_a_circle_fit_exactly() {
        let pts: Vec<[f64; 3]> = (0..12)
            .map(|k| {
                let a = 0.4 * k as f64;
                [a.cos(), a.sin(), 1.0]
            })
            .collect();
        let fit = fit_conic(&pts).unwrap();
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn cubic_curve_does_not_fit() {
        let pts: Vec<[f64; 3]> = (0..12)
            .map(|k| {
                let x = -1.0 + 0.2 * k as f64;
                [x, x * x * x, 1.0]
            })
            .collect();
        assert!(fit_conic(&pts).unwrap().residual > 1e-3);
    }

    #[test]
    fn too_few_or_repeated_points() {
        let pts = vec![[1.0, 0.0, 0.0]; 5];
        assert_eq!(fit_conic(&pts).unwrap_err(), Error::InsufficientSamples { needed: 9, got: 5 });
        let pts = vec![[1.0, 2.0, 3.0]; 10];
        assert_eq!(fit_conic(&pts).unwrap_err(), Error::DegenerateSamples);
    }
}
