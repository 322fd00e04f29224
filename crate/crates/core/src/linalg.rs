//! Dense complex matrix helpers shared by every module.
//!
//! All spectral work goes through the Hermitian eigensolver; eigenvalues are
//! returned in ascending order so callers can index the extremes directly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// The input is symmetrized first, so tiny anti-Hermitian noise is ignored.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part together with a unit eigenvector.
pub fn min_eigenpair(m: &CMat) -> (f64, DVector<Complex64>) {
    let (values, vectors) = eigh(m);
    (values[0], vectors.column(0).into_owned())
}

/// Largest singular value, computed as the square root of the top
/// eigenvalue of `m* m`.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let (values, _) = eigh(&gram);
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `m - m*`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Largest entrywise deviation of `u* u` and `u u*` from the identity.
pub fn unitary_deviation(u: &CMat) -> f64 {
    let n = u.nrows();
    let id = CMat::identity(n, n);
    max_abs_diff(&(u.adjoint() * u), &id).max(max_abs_diff(&(u * u.adjoint()), &id))
}

/// Functional calculus for Hermitian `h`: returns `V f(Λ) V*`.
pub fn hermitian_apply(h: &CMat, f: impl Fn(f64) -> Complex64) -> CMat {
    let (values, vectors) = eigh(h);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let fj = f(lambda);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(i h)` for Hermitian `h`.
pub fn expi_hermitian(h: &CMat) -> CMat {
    hermitian_apply(h, |x| Complex64::new(x.cos(), x.sin()))
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    project_simplex_radius(v, 1.0)
}

fn project_simplex_radius(v: &[f64], radius: f64) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - radius) / (i + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection onto the complex l1 ball of the given radius: moduli are
/// projected, phases kept.
pub fn project_l1_ball(v: &[Complex64], radius: f64) -> Vec<Complex64> {
    let moduli: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    if moduli.iter().sum::<f64>() <= radius {
        return v.to_vec();
    }
    let projected = project_simplex_radius(&moduli, radius);
    v.iter()
        .zip(moduli.iter().zip(projected))
        .map(|(z, (&m, p))| if m > 0.0 { z * (p / m) } else { ZERO })
        .collect()
}

/// Frobenius-nearest density matrix (PSD, unit trace) to the Hermitian part
/// of `m`.
pub fn project_density(m: &CMat) -> CMat {
    let (values, vectors) = eigh(m);
    let clipped = project_simplex(&values);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &lambda) in clipped.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= lambda;
        }
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Real inner product `Re tr(a* b)`.
pub fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}
