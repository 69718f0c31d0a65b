//! Derivatives of the residual in per-node tangent frames.
//!
//! Coordinates: column `2j` moves node `j` along its unit tangent `T_j`,
//! column `2j+1` along its left normal `n_j` (node then re-projected to the
//! sphere). Row `2k` is `R_k · T_k`, row `2k+1` is `R_k · n_k`, both in the
//! frames of the unperturbed curve.

use nalgebra::{DMatrix, Vector3};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;
use crate::real::{norm, Dual, Real};

use super::sobolev::{frames, Frames};
use super::{node_residual, CurvatureSpec};

fn residual_at<S: Real>(
    w: &[Vector3<S>; 5],
    h: f64,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    k: usize,
) -> Result<Vector3<S>> {
    let (rn, rt, f) =
        node_residual(w, h, metric, spec).ok_or_else(|| Error::Degenerate(format!("zero velocity at node {k}")))?;
    Ok(f.normal * rn + f.tangent * rt)
}

fn window_index(n: usize, k: usize, d: isize) -> usize {
    (k as isize + d).rem_euclid(n as isize) as usize
}

/// Central finite-difference Jacobian, `2N × 2N`.
pub fn jacobian_fd(
    curve: &DiscreteCurve,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    h_fd: f64,
) -> Result<DMatrix<f64>> {
    if !(1e-8..=1e-4).contains(&h_fd) {
        return Err(Error::Domain(format!("finite-difference step {h_fd:e} outside [1e-8, 1e-4]")));
    }
    let n = curve.len();
    let h = curve.step();
    let fr = frames(curve)?;
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for (c, dir) in [fr.tangent[j], fr.normal[j]].into_iter().enumerate() {
            let plus = (curve.nodes()[j] + dir * h_fd).normalize();
            let minus = (curve.nodes()[j] - dir * h_fd).normalize();
            for d in -2isize..=2 {
                let k = window_index(n, j, d);
                let idx = (2 - d) as usize;
                let mut wp = curve.window(k);
                let mut wm = wp;
                wp[idx] = plus;
                wm[idx] = minus;
                let diff =
                    (residual_at(&wp, h, metric, spec, k)? - residual_at(&wm, h, metric, spec, k)?) / (2.0 * h_fd);
                jac[(2 * k, 2 * j + c)] += diff.dot(&fr.tangent[k]);
                jac[(2 * k + 1, 2 * j + c)] += diff.dot(&fr.normal[k]);
            }
        }
    }
    Ok(jac)
}

fn dual_node(p: &Vector3<f64>, w: &Vector3<f64>) -> Vector3<Dual> {
    let q = Vector3::new(Dual::new(p.x, w.x), Dual::new(p.y, w.y), Dual::new(p.z, w.z));
    q / norm(&q)
}

fn jvp_with_frames(
    curve: &DiscreteCurve,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    fr: &Frames,
    direction: &[f64],
) -> Result<Vec<f64>> {
    let n = curve.len();
    let h = curve.step();
    let nodes: Vec<Vector3<Dual>> = (0..n)
        .map(|j| {
            dual_node(&curve.nodes()[j], &(fr.tangent[j] * direction[2 * j] + fr.normal[j] * direction[2 * j + 1]))
        })
        .collect();
    let mut out = vec![0.0; 2 * n];
    for k in 0..n {
        let w = [-2isize, -1, 0, 1, 2].map(|d| nodes[window_index(n, k, d)]);
        let r = residual_at(&w, h, metric, spec, k)?;
        let dr = Vector3::new(r.x.eps, r.y.eps, r.z.eps);
        out[2 * k] = dr.dot(&fr.tangent[k]);
        out[2 * k + 1] = dr.dot(&fr.normal[k]);
    }
    Ok(out)
}

/// Exact directional derivative of the residual (forward-mode dual numbers)
/// along the frame-coordinate direction `direction` of length `2N`.
pub fn jvp(
    curve: &DiscreteCurve,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    direction: &[f64],
) -> Result<Vec<f64>> {
    if direction.len() != 2 * curve.len() {
        return Err(Error::Domain(format!("direction has length {}, expected {}", direction.len(), 2 * curve.len())));
    }
    let fr = frames(curve)?;
    jvp_with_frames(curve, metric, spec, &fr, direction)
}

/// Jacobian assembled column by column from [`jvp`].
pub fn analytic_jacobian(
    curve: &DiscreteCurve,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
) -> Result<DMatrix<f64>> {
    let n = curve.len();
    let fr = frames(curve)?;
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    let mut e = vec![0.0; 2 * n];
    for c in 0..2 * n {
        e[c] = 1.0;
        let col = jvp_with_frames(curve, metric, spec, &fr, &e)?;
        e[c] = 0.0;
        jac.set_column(c, &nalgebra::DVector::from_vec(col));
    }
    Ok(jac)
}
