//! Shared fixtures for the criterion benches.

use carpet_core::latflow::UnimodularLattice;
use carpet_core::rng::rng_for;
use rand::Rng;

/// Deterministic skewed unimodular basis in the given dimension: a unit
/// upper-triangular shear followed by volume-preserving row scaling.
pub fn skewed_lattice(dim: usize, seed: u64) -> UnimodularLattice {
    let mut rng = rng_for(seed, 31, 0);
    let mut basis = vec![vec![0.0; dim]; dim];
    for (i, row) in basis.iter_mut().enumerate() {
        row[i] = 1.0;
        for cell in row.iter_mut().skip(i + 1) {
            *cell = rng.gen_range(-40.0..40.0);
        }
    }
    let scale: f64 = rng.gen_range(1.5..4.0);
    for j in 0..dim {
        basis[0][j] *= scale;
        basis[dim - 1][j] /= scale;
    }
    UnimodularLattice {
        basis,
        exact: None,
        log_det_drift: 0.0,
    }
}
