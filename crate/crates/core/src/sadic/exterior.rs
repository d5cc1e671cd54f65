//! Exterior powers of the adjoint representation, the distinguished wedge
//! subspaces built from the unipotent and parabolic blocks, and projective
//! distances in the ultrametric geometry at finite places.

use super::lie::LieBasis;
use super::subalgebra::PlaceSubalgebras;
use super::{SadicError, Walk};
use crate::arith::{padic_vec_norm, rat_int, Rat};
use crate::qmat::{span_matrix, QMat};
use crate::report::ExperimentReport;
use crate::rng::rng_for;
use num_traits::Zero;
use rand::Rng;
use std::collections::HashMap;
use std::time::Instant;

/// Exterior powers are only needed for planar and linear systems here; the
/// wedge dimension C(m, r) stays small under this guard.
pub const MAX_AMBIENT_D: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum ExteriorError {
    #[error("ambient dimension {0} exceeds the supported bound {MAX_AMBIENT_D}")]
    AmbientTooLarge(usize),
    #[error("wedge degree {r} out of range for dimension {m}")]
    DegreeOutOfRange { r: usize, m: usize },
    #[error("subspace of degree {0} is not defined (needs 1 <= r <= d^2 + d)")]
    UndefinedSubspace(usize),
    #[error("wedge subspace at degree {r} is not invariant under generator {generator}")]
    NotInvariant { r: usize, generator: usize },
    #[error(transparent)]
    Sadic(#[from] SadicError),
}

/// The degree-r exterior power of an m-dimensional space, with coordinates
/// indexed by sorted r-element subsets of the base indices in lex order.
#[derive(Debug, Clone)]
pub struct ExteriorPower {
    pub m: usize,
    pub r: usize,
    pub combos: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

fn combinations(m: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..r).collect();
    loop {
        out.push(current.clone());
        // advance to the next lex combination
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + m - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in i + 1..r {
            current[j] = current[j - 1] + 1;
        }
    }
}

impl ExteriorPower {
    pub fn new(m: usize, r: usize) -> Result<ExteriorPower, ExteriorError> {
        if r == 0 || r > m {
            return Err(ExteriorError::DegreeOutOfRange { r, m });
        }
        let combos = combinations(m, r);
        let index = combos
            .iter()
            .enumerate()
            .map(|(k, c)| (c.clone(), k))
            .collect();
        Ok(ExteriorPower { m, r, combos, index })
    }

    pub fn dim(&self) -> usize {
        self.combos.len()
    }

    pub fn combo_index(&self, combo: &[usize]) -> Option<usize> {
        self.index.get(combo).copied()
    }

    /// Coordinates of v_1 wedge ... wedge v_r via r x r minors.
    pub fn wedge(&self, vectors: &[Vec<Rat>]) -> Vec<Rat> {
        assert_eq!(vectors.len(), self.r);
        self.combos
            .iter()
            .map(|combo| {
                let minor = QMat::from_fn(self.r, self.r, |a, b| vectors[b][combo[a]].clone());
                minor.det()
            })
            .collect()
    }

    /// The induced operator on the exterior power: entry (I, J) is the
    /// minor of `a` with rows I and columns J.
    pub fn power_matrix(&self, a: &QMat) -> QMat {
        assert_eq!(a.rows, self.m);
        let n = self.dim();
        QMat::from_fn(n, n, |ii, jj| {
            let (rows, cols) = (&self.combos[ii], &self.combos[jj]);
            let minor = QMat::from_fn(self.r, self.r, |x, y| a[(rows[x], cols[y])].clone());
            minor.det()
        })
    }
}

/// The distinguished subspace of the degree-r exterior power at one place:
/// wedges of r vectors from u for r <= d, and for d < r <= d^2 + d the
/// span of (u_1 ^ ... ^ u_d) ^ (r - d vectors from p).
pub fn wedge_subspace(
    ext: &ExteriorPower,
    place_data: &PlaceSubalgebras,
    d: usize,
    r: usize,
) -> Result<Vec<Vec<Rat>>, ExteriorError> {
    if r == 0 || r > d * d + d {
        return Err(ExteriorError::UndefinedSubspace(r));
    }
    let mut out = Vec::new();
    if r <= d {
        for combo in combinations(d, r) {
            let vecs: Vec<Vec<Rat>> = combo.iter().map(|&i| place_data.u[i].clone()).collect();
            out.push(ext.wedge(&vecs));
        }
    } else {
        for combo in combinations(place_data.p.len(), r - d) {
            let mut vecs: Vec<Vec<Rat>> = place_data.u.clone();
            vecs.extend(combo.iter().map(|&i| place_data.p[i].clone()));
            let w = ext.wedge(&vecs);
            if w.iter().any(|c| !c.is_zero()) {
                out.push(w);
            }
        }
        // keep an independent generating subset
        if !out.is_empty() {
            let mut kept: Vec<Vec<Rat>> = Vec::new();
            for w in out {
                let mut trial = kept.clone();
                trial.push(w.clone());
                if span_matrix(&trial).rank() == trial.len() {
                    kept = trial;
                }
            }
            out = kept;
        }
    }
    Ok(out)
}

/// Certifies that each wedge subspace of degree 1..=d^2+d is carried into
/// itself by the induced action of every generator at every place.
pub fn wedge_invariance_suite(
    walk: &Walk,
    registry: &[PlaceSubalgebras],
    basis: &LieBasis,
) -> Result<(), ExteriorError> {
    let d = walk.d;
    if d > MAX_AMBIENT_D {
        return Err(ExteriorError::AmbientTooLarge(d));
    }
    let m = basis.dim();
    for place_data in registry {
        let ads: Vec<QMat> = walk
            .h_bar
            .iter()
            .map(|g| {
                super::lie::AdOperator::new_unchecked(basis, g.at(place_data.place)?, place_data.place)
                    .map(|ad| ad.matrix)
                    .map_err(SadicError::from)
            })
            .collect::<Result<_, _>>()?;
        for r in 1..=d * d + d {
            let ext = ExteriorPower::new(m, r)?;
            let w = wedge_subspace(&ext, place_data, d, r)?;
            if w.is_empty() {
                continue;
            }
            let span = span_matrix(&w);
            for (gi, ad) in ads.iter().enumerate() {
                let big = ext.power_matrix(ad);
                for v in &w {
                    if !span.spans(&big.mul_vec(v)) {
                        return Err(ExteriorError::NotInvariant { r, generator: gi });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Projective distance from the line [x] to the projectivized subspace
/// spanned by `basis_vectors`, at the finite place p: the norm of the wedge
/// of x with the subspace divided by the norms of the factors. Exact in Q.
pub fn projective_distance_to_subspace(x: &[Rat], basis_vectors: &[Vec<Rat>], p: u64) -> Rat {
    let m = x.len();
    let ext = ExteriorPower::new(m, basis_vectors.len() + 1).expect("wedge degree");
    let mut vecs = vec![x.to_vec()];
    vecs.extend(basis_vectors.iter().cloned());
    let top = ext.wedge(&vecs);
    let sub = if basis_vectors.len() == 1 {
        padic_vec_norm(&basis_vectors[0], p)
    } else {
        let lower = ExteriorPower::new(m, basis_vectors.len()).expect("wedge degree");
        padic_vec_norm(&lower.wedge(basis_vectors), p)
    };
    let nx = padic_vec_norm(x, p);
    if nx.is_zero() || sub.is_zero() {
        return rat_int(1);
    }
    &padic_vec_norm(&top, p) / &(&nx * &sub)
}

/// Projective distance between two lines at a finite place.
pub fn projective_distance(v: &[Rat], w: &[Rat], p: u64) -> Rat {
    let ext = ExteriorPower::new(v.len(), 2).expect("wedge degree");
    let nv = padic_vec_norm(v, p);
    let nw = padic_vec_norm(w, p);
    if nv.is_zero() || nw.is_zero() {
        return rat_int(1);
    }
    &padic_vec_norm(&ext.wedge(&[v.to_vec(), w.to_vec()]), p) / &(&nv * &nw)
}

/// Monte Carlo drift-to-u test at an expanding place: push a fixed direction
/// through random generator words and measure how often the image line lands
/// within eta of the unipotent block in projective distance.
pub fn direction_test(
    walk: &Walk,
    place_data: &PlaceSubalgebras,
    v: &[Rat],
    word_len: usize,
    eta: &Rat,
    n_samples: usize,
    seed: u64,
) -> Result<ExperimentReport, ExteriorError> {
    let p = match place_data.place {
        crate::arith::Place::Finite(p) => p,
        crate::arith::Place::Infinity => {
            return Err(SadicError::UnknownPlace(place_data.place).into())
        }
    };
    let start = Instant::now();
    let basis = LieBasis::new(walk.d + 1);
    let mut hits = 0usize;
    let mut rng = rng_for(seed, 17, 0);
    let cdf: Vec<f64> = walk
        .probs
        .iter()
        .scan(0.0, |acc, q| {
            *acc += q;
            Some(*acc)
        })
        .collect();
    for _ in 0..n_samples {
        let word: Vec<usize> = (0..word_len)
            .map(|_| {
                let t: f64 = rng.gen();
                cdf.iter().position(|&c| t < c).unwrap_or(walk.probs.len() - 1)
            })
            .collect();
        let g = walk.h_bar_word(&word).map_err(SadicError::from)?;
        let ad = super::lie::AdOperator::new_unchecked(&basis, g.at(place_data.place)?, place_data.place)
            .map_err(SadicError::from)?;
        let image = ad.matrix.mul_vec(v);
        let dist = projective_distance_to_subspace(&image, &place_data.u, p);
        if &dist < eta {
            hits += 1;
        }
    }
    let (estimate, clt_bar) = crate::report::fraction_and_clt_bar(hits, n_samples);
    let mut report = ExperimentReport {
        estimate,
        clt_bar,
        n_samples,
        seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        config_hash: crate::report::config_hash(&(word_len, n_samples, p)),
        extra: serde_json::Map::new(),
    };
    report
        .extra
        .insert("word_len".to_string(), serde_json::json!(word_len));
    Ok(report)
}
