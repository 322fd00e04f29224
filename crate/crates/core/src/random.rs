//! Seeded random instances. Every sampler takes an explicit RNG; streams are
//! derived from a 64-bit seed so parallel work stays reproducible.

use nalgebra::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{commutator, Element, FdAlgebra, Tuple};
use crate::linalg::{self, CMat};
use crate::mixing::{MixingOperator, Term, Unitary};
use crate::state::State;

pub type SeededRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with unit-variance complex entries.
pub fn gaussian_matrix(n: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| gaussian_complex(rng))
}

pub fn random_element(algebra: &FdAlgebra, rng: &mut impl Rng) -> Element {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| gaussian_matrix(n, rng))
        .collect();
    Element::from_blocks(algebra, blocks).expect("shapes follow the algebra")
}

pub fn random_hermitian(algebra: &FdAlgebra, rng: &mut impl Rng) -> Element {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| linalg::hermitian_part(&gaussian_matrix(n, rng)))
        .collect();
    Element::from_blocks(algebra, blocks).expect("shapes follow the algebra")
}

/// `a - E(a)` for a Gaussian `a`: blockwise traceless.
pub fn random_traceless(algebra: &FdAlgebra, rng: &mut impl Rng) -> Element {
    let a = random_element(algebra, rng);
    a.sub(&a.center_valued_trace()).expect("same shape")
}

/// Sum of `count` commutators of Gaussian elements.
pub fn random_commutator_sum(algebra: &FdAlgebra, count: usize, rng: &mut impl Rng) -> Element {
    let mut acc = algebra.zero();
    for _ in 0..count {
        let a = random_element(algebra, rng);
        let b = random_element(algebra, rng);
        acc = acc
            .add(&commutator(&a, &b).expect("same shape"))
            .expect("same shape");
    }
    acc
}

pub fn random_tuple(algebra: &FdAlgebra, n: usize, rng: &mut impl Rng) -> Tuple {
    Tuple::new((0..n).map(|_| random_element(algebra, rng)).collect()).expect("n >= 1")
}

/// Haar-distributed unitary block via QR of a Ginibre matrix with the phase
/// of `R`'s diagonal divided out.
pub fn haar_unitary_matrix(n: usize, rng: &mut impl Rng) -> CMat {
    let qr = QR::new(gaussian_matrix(n, rng));
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            linalg::ONE
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unitary(algebra: &FdAlgebra, rng: &mut impl Rng) -> Unitary {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| haar_unitary_matrix(n, rng))
        .collect();
    Unitary::new(Element::from_blocks(algebra, blocks).expect("shapes follow the algebra"))
        .expect("QR factor is unitary")
}

/// Mixing operator with `terms` Haar unitaries and Dirichlet(1) weights.
pub fn random_mixing_operator(
    algebra: &FdAlgebra,
    terms: usize,
    rng: &mut impl Rng,
) -> MixingOperator {
    let raw: Vec<f64> = (0..terms.max(1))
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let terms = raw
        .iter()
        .map(|w| Term {
            weight: w / total,
            unitary: random_unitary(algebra, rng),
        })
        .collect();
    MixingOperator::new(algebra, terms).expect("normalized weights")
}

/// Density matrix `G G* / tr(G G*)` for a Ginibre `G`.
pub fn random_density(n: usize, rng: &mut impl Rng) -> CMat {
    let g = gaussian_matrix(n, rng);
    let p = &g * g.adjoint();
    let tr = linalg::trace(&p).re;
    linalg::hermitian_part(&p.scale(1.0 / tr))
}

pub fn random_state(algebra: &FdAlgebra, rng: &mut impl Rng) -> State {
    let raw: Vec<f64> = (0..algebra.num_blocks())
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let densities = algebra
        .block_dims()
        .iter()
        .map(|&n| random_density(n, rng))
        .collect();
    State::new(algebra, raw.iter().map(|w| w / total).collect(), densities).expect("valid state")
}

/// A state supported on block `k`.
pub fn random_block_state(algebra: &FdAlgebra, k: usize, rng: &mut impl Rng) -> State {
    let n = algebra.block_dims()[k];
    State::on_block(algebra, k, random_density(n, rng)).expect("valid state")
}

/// Uniform point of the probability simplex of the given size.
pub fn random_simplex_point(size: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..size)
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let alg = FdAlgebra::new(vec![2, 3]).unwrap();
        let a = random_element(&alg, &mut rng_for(7, 0));
        let b = random_element(&alg, &mut rng_for(7, 0));
        let c = random_element(&alg, &mut rng_for(7, 1));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn samplers_respect_their_contracts() {
        let alg = FdAlgebra::new(vec![3, 2]).unwrap();
        let mut rng = rng_for(1, 0);
        assert!(random_traceless(&alg, &mut rng).in_commutator_closure(1e-12));
        assert!(random_commutator_sum(&alg, 4, &mut rng).in_commutator_closure(1e-12));
        let u = random_unitary(&alg, &mut rng);
        assert!(Unitary::new(u.into_element()).is_ok());
        let rho = random_state(&alg, &mut rng);
        assert!((rho.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let s = random_simplex_point(5, &mut rng);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
