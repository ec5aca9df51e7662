//! Dense reference operators for cross-checking the sparse kernels. Matrices
//! are built column by column from the scatter form of the definition, an
//! independent path from the library's row-wise gather kernels, so sign or
//! wrap-around mistakes in either one show up as a mismatch.
#![allow(dead_code)]

use ctqw::{Complex64, GridSpec, MarkedVertex};
use nalgebra::DMatrix;

/// Free Hamiltonian: column v scatters (-1)^{v_x} onto v +- e_x and
/// (-1)^{v_x+v_y} onto v +- e_y, with periodic wrap-around.
pub fn dense_free(grid: GridSpec) -> DMatrix<f64> {
    let l = grid.side();
    let n = grid.n_vertices();
    let idx = |x: usize, y: usize| x * l + y;
    let mut h = DMatrix::zeros(n, n);
    for x in 0..l {
        for y in 0..l {
            let v = idx(x, y);
            let sx = if x % 2 == 0 { 1.0 } else { -1.0 };
            let sxy = if (x + y) % 2 == 0 { 1.0 } else { -1.0 };
            h[(idx((x + 1) % l, y), v)] += sx;
            h[(idx((x + l - 1) % l, y), v)] -= sx;
            h[(idx(x, (y + 1) % l), v)] += sxy;
            h[(idx(x, (y + l - 1) % l), v)] -= sxy;
        }
    }
    h
}

/// Marking perturbation -|m><m|H0 - H0|m><m|, assembled from the dense free
/// matrix: negated row m plus negated column m.
pub fn dense_oracle(grid: GridSpec, m: MarkedVertex) -> DMatrix<f64> {
    let h0 = dense_free(grid);
    let n = grid.n_vertices();
    let mi = grid.index(m.vertex());
    let mut or = DMatrix::zeros(n, n);
    for v in 0..n {
        or[(mi, v)] -= h0[(mi, v)];
    }
    for u in 0..n {
        or[(u, mi)] -= h0[(u, mi)];
    }
    or
}

pub fn dense_search(grid: GridSpec, m: MarkedVertex) -> DMatrix<f64> {
    dense_free(grid) + dense_oracle(grid, m)
}

/// exp(-i H t) psi via the symmetric eigendecomposition of H.
pub fn propagate(h: &DMatrix<f64>, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let n = psi.len();
    let mut coeffs = vec![Complex64::ZERO; n];
    for k in 0..n {
        let mut acc = Complex64::ZERO;
        for i in 0..n {
            acc += psi[i] * eig.eigenvectors[(i, k)];
        }
        coeffs[k] = acc * Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    let mut out = vec![Complex64::ZERO; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for (k, &c) in coeffs.iter().enumerate() {
            acc += c * eig.eigenvectors[(i, k)];
        }
        *slot = acc;
    }
    out
}

/// Deterministic normalized complex vector (SplitMix64 entries in [-1, 1]).
pub fn pseudo_random_state(n: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed;
    let mut next_unit = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut amps: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(next_unit(), next_unit()))
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amps {
        *z /= norm;
    }
    amps
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
