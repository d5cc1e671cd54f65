//! Floating-point LLL reduction and Fincke-Pohst enumeration for the small
//! dimensions (<= 6) used here. Bases are lists of column vectors in R^n.

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("basis is singular or ill-conditioned")]
    IllConditioned,
    #[error("enumeration exceeded {0} nodes; radius too large for this basis")]
    EnumerationBlowup(usize),
}

const ENUM_CAP: usize = 4_000_000;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gram-Schmidt data: mu[i][j] for j < i, and squared lengths of the
/// orthogonalized vectors.
fn gram_schmidt(basis: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let k = basis.len();
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut mu = vec![vec![0.0; k]; k];
    let mut b2 = vec![0.0; k];
    for i in 0..k {
        let mut v = basis[i].clone();
        for j in 0..i {
            let m = if b2[j] == 0.0 {
                0.0
            } else {
                dot(&basis[i], &ortho[j]) / b2[j]
            };
            mu[i][j] = m;
            for (vc, oc) in v.iter_mut().zip(&ortho[j]) {
                *vc -= m * oc;
            }
        }
        b2[i] = dot(&v, &v);
        ortho.push(v);
    }
    (ortho, mu, b2)
}

/// In-place LLL with Lovasz parameter delta. Swaps and size-reduces actual
/// basis vectors; the lattice they generate is unchanged.
pub fn lll_reduce(basis: &mut [Vec<f64>], delta: f64) -> Result<(), ReductionError> {
    let k = basis.len();
    if k <= 1 {
        return Ok(());
    }
    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > 10_000 {
            return Err(ReductionError::IllConditioned);
        }
        // size reduction, innermost mu recomputed after each subtraction
        for i in 1..k {
            for j in (0..i).rev() {
                let (_, mu_now, b2_now) = gram_schmidt(basis);
                if b2_now.iter().any(|&b| !b.is_finite() || b <= 0.0) {
                    return Err(ReductionError::IllConditioned);
                }
                let r = mu_now[i][j].round();
                if r != 0.0 {
                    let bj = basis[j].clone();
                    for (vc, oc) in basis[i].iter_mut().zip(&bj) {
                        *vc -= r * oc;
                    }
                }
            }
        }
        let (_, mu, b2) = gram_schmidt(basis);
        if b2.iter().any(|&b| !b.is_finite() || b <= 0.0) {
            return Err(ReductionError::IllConditioned);
        }
        // Lovasz condition
        let mut swapped = false;
        for i in 1..k {
            if b2[i] < (delta - mu[i][i - 1] * mu[i][i - 1]) * b2[i - 1] {
                basis.swap(i, i - 1);
                swapped = true;
                break;
            }
        }
        if !swapped {
            return Ok(());
        }
    }
}

/// All nonzero lattice vectors of Euclidean length <= radius, as
/// (coefficients, vector) pairs. Both signs of each vector are returned.
pub fn enumerate_in_ball(
    basis: &[Vec<f64>],
    radius: f64,
) -> Result<Vec<(Vec<i64>, Vec<f64>)>, ReductionError> {
    let k = basis.len();
    let (_, mu, b2) = gram_schmidt(basis);
    if b2.iter().any(|&b| !b.is_finite() || b <= 0.0) {
        return Err(ReductionError::IllConditioned);
    }
    // slack absorbs rounding in the bound tests; hits are re-checked exactly
    // against the true vector below
    let r2 = radius * radius * (1.0 + 1e-9) + 1e-12;
    let mut out = Vec::new();
    let mut coeff = vec![0i64; k];
    let mut nodes = 0usize;
    // depth runs from k-1 down to 0; partial[i] = c_i + sum_{j>i} mu[j][i]*c_j
    fn recurse(
        depth: isize,
        remaining: f64,
        coeff: &mut Vec<i64>,
        mu: &[Vec<f64>],
        b2: &[f64],
        out: &mut Vec<Vec<i64>>,
        nodes: &mut usize,
    ) -> Result<(), ReductionError> {
        if depth < 0 {
            if coeff.iter().any(|&c| c != 0) {
                out.push(coeff.clone());
            }
            return Ok(());
        }
        let i = depth as usize;
        let shift: f64 = (i + 1..coeff.len())
            .map(|j| mu[j][i] * coeff[j] as f64)
            .sum();
        let half_width = (remaining / b2[i]).sqrt();
        let lo = (-shift - half_width).ceil() as i64;
        let hi = (-shift + half_width).floor() as i64;
        for c in lo..=hi {
            *nodes += 1;
            if *nodes > ENUM_CAP {
                return Err(ReductionError::EnumerationBlowup(ENUM_CAP));
            }
            let contrib = (c as f64 + shift).powi(2) * b2[i];
            if contrib > remaining {
                continue;
            }
            coeff[i] = c;
            recurse(depth - 1, remaining - contrib, coeff, mu, b2, out, nodes)?;
        }
        coeff[i] = 0;
        Ok(())
    }
    let mut coeffs_found = Vec::new();
    recurse(
        k as isize - 1,
        r2,
        &mut coeff,
        &mu,
        &b2,
        &mut coeffs_found,
        &mut nodes,
    )?;
    for c in coeffs_found {
        let mut v = vec![0.0; basis[0].len()];
        for (j, &cj) in c.iter().enumerate() {
            for (vc, bc) in v.iter_mut().zip(&basis[j]) {
                *vc += cj as f64 * bc;
            }
        }
        if norm2(&v) <= radius * (1.0 + 1e-9) {
            out.push((c, v));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lll_fixes_skewed_basis() {
        let mut basis = vec![vec![1.0, 0.0], vec![100.0, 1.0]];
        lll_reduce(&mut basis, 0.99).unwrap();
        assert!(basis.iter().all(|v| norm2(v) <= 1.5));
    }

    #[test]
    fn enumeration_counts_z2_points() {
        let basis = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        // nonzero integer points with norm <= 1.5: (+-1,0),(0,+-1),(+-1,+-1)
        let hits = enumerate_in_ball(&basis, 1.5).unwrap();
        assert_eq!(hits.len(), 8);
    }

    #[test]
    fn singular_basis_rejected() {
        let basis = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(enumerate_in_ball(&basis, 1.0).is_err());
    }
}
