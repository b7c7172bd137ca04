//! Seeded random matrices, subspaces, forms and relations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_eigen, orthonormalize, spectral_norm, CMatrix, Subspace, Tolerance, C64, I};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for case `index` of a suite.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Entries `(x + i·y)/√2` with `x, y` standard normal.
pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

pub fn real_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), 0.0))
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = gaussian(rng, n, n);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Unit-norm Hermitian matrix.
pub fn unit_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let h = hermitian(rng, n);
    let s = spectral_norm(&h);
    if s == 0.0 {
        CMatrix::zeros(n, n)
    } else {
        h / C64::new(s, 0.0)
    }
}

pub fn unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = gaussian(rng, n, n);
    g.qr().q()
}

/// Hermitian PSD matrix `G·Gᴴ` of the given rank.
pub fn psd(rng: &mut impl Rng, n: usize, rank: usize) -> CMatrix {
    let g = gaussian(rng, n, rank);
    &g * g.adjoint()
}

/// Hermitian matrix with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn hermitian_with_spectrum(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> CMatrix {
    let u = unitary(rng, n);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| C64::new(rng.random_range(lo..=hi), 0.0)));
    &u * d * u.adjoint()
}

/// Random `k`-dimensional subspace of `ℂⁿ`.
pub fn subspace(rng: &mut impl Rng, n: usize, k: usize) -> Subspace {
    let tol = Tolerance::default();
    orthonormalize(&gaussian(rng, n, k), &tol).expect("finite gaussian")
}

/// Sectorial matrix `R + i·R^{1/2}·S·R^{1/2}` with `R ⪰ floor·I` and
/// `‖S‖ = c`, so that its sector constant is exactly `c`.
pub fn sectorial(rng: &mut impl Rng, n: usize, floor: f64, c: f64) -> CMatrix {
    let g = gaussian(rng, n, n);
    let re = &g * g.adjoint() + CMatrix::identity(n, n) * C64::new(floor, 0.0);
    let root = hermitian_eigen(&re).apply(|l| l.max(0.0).sqrt());
    let s = unit_hermitian(rng, n) * C64::new(c, 0.0);
    &re + &root * s * &root * I
}
