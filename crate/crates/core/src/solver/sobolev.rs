//! The preconditioner `(−D_θ² + 1)` on tangent fields along a discrete curve.
//!
//! Tangent vectors at node `k` are written as complex numbers in the frame
//! `(T_k, n_k)`, so `x = Re z·T_k + Im z·n_k`. Neighbouring frames are linked by
//! parallel transport along the connecting great arc, which acts on these
//! coordinates as a unit phase. The discrete operator is then a Hermitian,
//! strictly diagonally dominant cyclic tridiagonal matrix.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use crate::curve::{node_frame, DiscreteCurve};
use crate::error::{Error, Result};

use super::TangentField;

/// Parallel transport of `u ∈ T_q S²` to `T_p S²` along the shorter great arc.
pub(crate) fn transport(u: &Vector3<f64>, q: &Vector3<f64>, p: &Vector3<f64>) -> Vector3<f64> {
    u - (p + q) * (p.dot(u) / (1.0 + p.dot(q)))
}

pub(crate) struct Frames {
    pub tangent: Vec<Vector3<f64>>,
    pub normal: Vec<Vector3<f64>>,
}

pub(crate) fn frames(curve: &DiscreteCurve) -> Result<Frames> {
    let h = curve.step();
    let mut tangent = Vec::with_capacity(curve.len());
    let mut normal = Vec::with_capacity(curve.len());
    for k in 0..curve.len() {
        let f =
            node_frame(&curve.window(k), h).ok_or_else(|| Error::Degenerate(format!("zero velocity at node {k}")))?;
        tangent.push(f.tangent);
        normal.push(f.normal);
    }
    Ok(Frames { tangent, normal })
}

/// Phases `e^{iβ_k}` of the transport from frame `k+1` into frame `k`.
fn couplings(curve: &DiscreteCurve, fr: &Frames) -> Vec<Complex64> {
    let n = curve.len();
    let p = curve.nodes();
    (0..n)
        .map(|k| {
            let j = (k + 1) % n;
            let u = transport(&fr.tangent[j], &p[j], &p[k]);
            let z = Complex64::new(u.dot(&fr.tangent[k]), u.dot(&fr.normal[k]));
            z / z.norm()
        })
        .collect()
}

/// Off-diagonal bands: `sup[k] = A[k][k+1]`, `sub[k] = A[k][k-1]`, cyclically.
fn bands(curve: &DiscreteCurve, fr: &Frames) -> (Vec<Complex64>, Complex64, Vec<Complex64>) {
    let n = curve.len();
    let h = curve.step();
    let inv_h2 = 1.0 / (h * h);
    let phase = couplings(curve, fr);
    let sup: Vec<Complex64> = phase.iter().map(|z| -z * inv_h2).collect();
    let sub: Vec<Complex64> = (0..n).map(|k| sup[(k + n - 1) % n].conj()).collect();
    let diag = Complex64::new(2.0 * inv_h2 + 1.0, 0.0);
    (sub, diag, sup)
}

/// Dense form of the operator in frame coordinates; meant for tests and diagnostics.
pub fn sobolev_matrix(curve: &DiscreteCurve) -> Result<DMatrix<Complex64>> {
    let fr = frames(curve)?;
    let n = curve.len();
    let (sub, diag, sup) = bands(curve, &fr);
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        m[(k, k)] = diag;
        m[(k, (k + 1) % n)] += sup[k];
        m[(k, (k + n - 1) % n)] += sub[k];
    }
    Ok(m)
}

/// Frame coordinates of a tangent field.
pub fn to_frame(curve: &DiscreteCurve, field: &TangentField) -> Result<Vec<Complex64>> {
    let fr = frames(curve)?;
    Ok(field
        .vectors()
        .iter()
        .enumerate()
        .map(|(k, v)| Complex64::new(v.dot(&fr.tangent[k]), v.dot(&fr.normal[k])))
        .collect())
}

/// Solves `(−D_θ² + 1) X = R` for the tangent field `X`.
pub fn sobolev_field(curve: &DiscreteCurve, r: &TangentField) -> Result<TangentField> {
    if r.len() != curve.len() {
        return Err(Error::Domain(format!("field has {} vectors for {} nodes", r.len(), curve.len())));
    }
    let fr = frames(curve)?;
    let (sub, diag, sup) = bands(curve, &fr);
    let rhs: Vec<Complex64> = r
        .vectors()
        .iter()
        .enumerate()
        .map(|(k, v)| Complex64::new(v.dot(&fr.tangent[k]), v.dot(&fr.normal[k])))
        .collect();
    let diag = vec![diag; curve.len()];
    let z = solve_cyclic(&sub, &diag, &sup, &rhs)?;
    let vectors = z.iter().enumerate().map(|(k, c)| fr.tangent[k] * c.re + fr.normal[k] * c.im).collect();
    Ok(TangentField::from_vectors_unchecked(vectors))
}

/// Cyclic tridiagonal solve by the Thomas algorithm with a Sherman–Morrison
/// correction for the two corner entries `A[0][n-1] = sub[0]` and
/// `A[n-1][0] = sup[n-1]`.
pub fn solve_cyclic(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if n < 3 || sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::LinearSolve("inconsistent cyclic system dimensions".into()));
    }
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let x = thomas(sub, &bb, sup, rhs)?;
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(sub, &bb, sup, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (Complex64::new(1.0, 0.0) + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

fn thomas(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    let mut piv = diag[0];
    if piv.norm() < 1e-300 {
        return Err(Error::LinearSolve("zero pivot".into()));
    }
    c[0] = sup[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if !(piv.norm() > 1e-300) {
            return Err(Error::LinearSolve(format!("zero pivot at row {i}")));
        }
        c[i] = sup[i] / piv;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    Ok(d)
}
