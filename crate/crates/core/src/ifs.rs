//! Carpet iterated function systems: families of affine contractions
//! x -> rho*x + y_i with a common rational ratio, their attractors, Bernoulli
//! measures, seeded sampling, separation checks, and Federer / absolute-decay
//! estimators for the sampled measure.

use crate::arith::{format_rat, parse_rat, rat_to_f64, Rat};
use crate::qmat::span_matrix;
use crate::report::mean_and_clt_bar;
use crate::rng::rng_for;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const STREAM_THETA: u64 = 1;
const STREAM_SUFFIX: u64 = 2;
const STREAM_FRIEND: u64 = 3;

#[derive(Debug, thiserror::Error)]
pub enum IfsError {
    #[error("contraction ratio must satisfy 0 < |rho| < 1, got {0}")]
    BadRatio(String),
    #[error("need at least two maps, got {0}")]
    TooFewMaps(usize),
    #[error("translation {index} has dimension {got}, expected {expected}")]
    BadTranslation {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("probability vector is degenerate: {0}")]
    BadProbabilities(String),
    #[error("conjugation scale must be nonzero")]
    ZeroScale,
    #[error("no samples landed in the denominator set ({0})")]
    InsufficientSamples(String),
    #[error("invalid rational in IFS file: {0}")]
    Parse(#[from] crate::arith::ArithError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separation {
    Strong,
    OpenSet,
    Unknown,
}

/// Carpet IFS with k maps f_i(x) = rho*x + y_i on R^d and a probability
/// vector driving the Bernoulli measure.
#[derive(Debug, Clone)]
pub struct CarpetIfs {
    pub d: usize,
    pub rho: Rat,
    pub translations: Vec<Vec<Rat>>,
    pub probs: Vec<f64>,
    pub separation_assertion: Option<Separation>,
}

/// On-disk JSON form with bit-exact rational strings.
#[derive(Debug, Serialize, Deserialize)]
pub struct IfsFile {
    pub d: usize,
    pub rho: String,
    pub translations: Vec<Vec<String>>,
    pub probs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation_assertion: Option<Separation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub separation: Separation,
    pub spanning_irreducible: bool,
}

#[derive(Debug, Clone)]
pub struct AttractorPoint {
    pub coords: Vec<f64>,
    pub truncation_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FriendlinessEstimate {
    pub federer_d: f64,
    pub decay_c: f64,
    pub decay_alpha: f64,
    pub sample_count: usize,
    pub seed: u64,
}

/// Closed half-space {x : normal . x <= offset} with rational data.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    pub normal: Vec<Rat>,
    pub offset: Rat,
}

impl HalfSpace {
    pub fn contains(&self, x: &[f64]) -> bool {
        let dot: f64 = self
            .normal
            .iter()
            .zip(x)
            .map(|(a, b)| rat_to_f64(a) * b)
            .sum();
        dot <= rat_to_f64(&self.offset) + 1e-12
    }
}

impl CarpetIfs {
    pub fn new(
        d: usize,
        rho: Rat,
        translations: Vec<Vec<Rat>>,
        probs: Vec<f64>,
    ) -> Result<CarpetIfs, IfsError> {
        let ifs = CarpetIfs {
            d,
            rho,
            translations,
            probs,
            separation_assertion: None,
        };
        ifs.check_structure()?;
        Ok(ifs)
    }

    pub fn k(&self) -> usize {
        self.translations.len()
    }

    fn check_structure(&self) -> Result<(), IfsError> {
        let abs = self.rho.abs();
        if abs.is_zero() || abs >= Rat::one() {
            return Err(IfsError::BadRatio(format_rat(&self.rho)));
        }
        if self.k() < 2 {
            return Err(IfsError::TooFewMaps(self.k()));
        }
        for (i, y) in self.translations.iter().enumerate() {
            if y.len() != self.d {
                return Err(IfsError::BadTranslation {
                    index: i,
                    got: y.len(),
                    expected: self.d,
                });
            }
        }
        if self.probs.len() != self.k() {
            return Err(IfsError::BadProbabilities(format!(
                "{} weights for {} maps",
                self.probs.len(),
                self.k()
            )));
        }
        if self.probs.iter().any(|&p| p <= 0.0) {
            return Err(IfsError::BadProbabilities("nonpositive entry".into()));
        }
        let s: f64 = self.probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(IfsError::BadProbabilities(format!("sum {s}")));
        }
        Ok(())
    }

    /// Cantor middle-thirds system: d=1, rho=1/3, digits {0, 2}.
    pub fn middle_thirds() -> CarpetIfs {
        CarpetIfs::new(
            1,
            Rat::new(1.into(), 3.into()),
            vec![vec![Rat::zero()], vec![Rat::new(2.into(), 3.into())]],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    /// Sierpinski carpet: d=2, rho=1/3, the eight digit cells excluding the
    /// center.
    pub fn sierpinski_carpet() -> CarpetIfs {
        let third = Rat::new(1.into(), 3.into());
        let mut translations = Vec::new();
        for a in 0..3i64 {
            for b in 0..3i64 {
                if a == 1 && b == 1 {
                    continue;
                }
                translations.push(vec![
                    Rat::new(a.into(), 3.into()),
                    Rat::new(b.into(), 3.into()),
                ]);
            }
        }
        CarpetIfs::new(2, third, translations, vec![1.0 / 8.0; 8]).unwrap()
    }

    pub fn from_file(path: &std::path::Path) -> Result<CarpetIfs, IfsError> {
        let text = std::fs::read_to_string(path)?;
        let file: IfsFile = serde_json::from_str(&text)?;
        CarpetIfs::from_file_record(&file)
    }

    pub fn from_file_record(file: &IfsFile) -> Result<CarpetIfs, IfsError> {
        let rho = parse_rat(&file.rho)?;
        let translations = file
            .translations
            .iter()
            .map(|row| row.iter().map(|s| parse_rat(s)).collect())
            .collect::<Result<Vec<Vec<Rat>>, _>>()?;
        let mut ifs = CarpetIfs::new(file.d, rho, translations, file.probs.clone())?;
        ifs.separation_assertion = file.separation_assertion;
        Ok(ifs)
    }

    pub fn to_file_record(&self) -> IfsFile {
        IfsFile {
            d: self.d,
            rho: format_rat(&self.rho),
            translations: self
                .translations
                .iter()
                .map(|row| row.iter().map(format_rat).collect())
                .collect(),
            probs: self.probs.clone(),
            separation_assertion: self.separation_assertion,
        }
    }

    /// Digit-system recognition: rho = ±1/b with integral digit vectors
    /// b*y_i in [0,b)^d. Returns (b, digits) when the system qualifies.
    fn digit_system(&self) -> Option<(i64, Vec<Vec<i64>>)> {
        if !self.rho.numer().abs().is_one() {
            return None;
        }
        let b = self.rho.denom().to_i64()?;
        if b < 2 {
            return None;
        }
        let mut digits = Vec::with_capacity(self.k());
        for y in &self.translations {
            let mut row = Vec::with_capacity(self.d);
            for c in y {
                let scaled = c * Rat::from_integer(b.into());
                if !scaled.denom().is_one() {
                    return None;
                }
                let a = scaled.numer().to_i64()?;
                if !(0..b).contains(&a) {
                    return None;
                }
                row.push(a);
            }
            digits.push(row);
        }
        Some((b, digits))
    }

    /// Separation status plus the spanning surrogate for irreducibility:
    /// span_Q{y_j - y_i} = Q^d, decided by exact rank.
    pub fn validate(&self) -> Result<ValidationReport, IfsError> {
        self.check_structure()?;
        let diffs: Vec<Vec<Rat>> = self.translations[1..]
            .iter()
            .map(|y| {
                y.iter()
                    .zip(&self.translations[0])
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        let spanning_irreducible = span_matrix(&diffs).rank() == self.d;

        let separation = match self.digit_system() {
            Some((_, digits)) => {
                // Image of the unit cell under f_i is a closed box of side 1/b
                // with lower corner (L_i)/b; boxes are disjoint iff some
                // coordinate differs by at least 2.
                let shift = if self.rho.is_negative() { -1 } else { 0 };
                let corners: Vec<Vec<i64>> = digits
                    .iter()
                    .map(|row| row.iter().map(|a| a + shift).collect())
                    .collect();
                let k = corners.len();
                let strong = (0..k).all(|i| {
                    (i + 1..k).all(|j| {
                        corners[i]
                            .iter()
                            .zip(&corners[j])
                            .any(|(a, b)| (a - b).abs() >= 2)
                    })
                });
                let distinct = (0..k).all(|i| (i + 1..k).all(|j| digits[i] != digits[j]));
                if strong {
                    Separation::Strong
                } else if distinct {
                    Separation::OpenSet
                } else {
                    Separation::Unknown
                }
            }
            None => self.separation_assertion.unwrap_or(Separation::Unknown),
        };
        Ok(ValidationReport {
            separation,
            spanning_irreducible,
        })
    }

    pub fn apply_map(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let r = rat_to_f64(&self.rho);
        x.iter()
            .zip(&self.translations[i])
            .map(|(xi, yi)| r * xi + rat_to_f64(yi))
            .collect()
    }

    /// Bound on ||cod(b) - x|| for any truncation anchored at x0.
    pub fn diameter_bound(&self, x0: &[f64]) -> f64 {
        let denom = 1.0 - rat_to_f64(&self.rho);
        let max_fix = self
            .translations
            .iter()
            .map(|y| {
                y.iter()
                    .map(|c| (rat_to_f64(c) / denom).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        let x0_norm = x0.iter().map(|c| c * c).sum::<f64>().sqrt();
        2.0 * max_fix + x0_norm
    }

    /// Coding map on a finite word: f_{w1} o ... o f_{wn} (x0), with the
    /// truncation error |rho|^n * diameter_bound.
    pub fn cod(&self, word: &[usize], x0: &[f64]) -> AttractorPoint {
        assert!(!word.is_empty());
        assert!(word.iter().all(|&i| i < self.k()));
        let mut x = x0.to_vec();
        for &i in word.iter().rev() {
            x = self.apply_map(i, &x);
        }
        let abs_rho = rat_to_f64(&self.rho).abs();
        AttractorPoint {
            coords: x,
            truncation_error: abs_rho.powi(word.len() as i32) * self.diameter_bound(x0),
        }
    }

    fn draw_letter(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.k() - 1
    }

    pub fn draw_word(&self, len: usize, rng: &mut impl Rng) -> Vec<usize> {
        (0..len).map(|_| self.draw_letter(rng)).collect()
    }

    /// i.i.d. samples from the Bernoulli measure, truncated at depth
    /// `n_trunc`. Per-index derived seeds: the stream is identical no matter
    /// how samples are distributed across workers.
    pub fn sample_theta(&self, n_samples: usize, n_trunc: usize, seed: u64) -> Vec<AttractorPoint> {
        assert!(n_trunc >= 1);
        let x0 = vec![0.0; self.d];
        (0..n_samples)
            .into_par_iter()
            .map(|idx| {
                let mut rng = rng_for(seed, STREAM_THETA, idx as u64);
                let word = self.draw_word(n_trunc, &mut rng);
                self.cod(&word, &x0)
            })
            .collect()
    }

    /// Conjugation by the affine dilation f(x) = c*x + v: same ratio,
    /// translations c*y_i + (1-rho)*v.
    pub fn conjugate(&self, c: &Rat, v: &[Rat]) -> Result<CarpetIfs, IfsError> {
        if c.is_zero() {
            return Err(IfsError::ZeroScale);
        }
        assert_eq!(v.len(), self.d);
        let one_minus_rho = Rat::one() - &self.rho;
        let translations = self
            .translations
            .iter()
            .map(|y| {
                y.iter()
                    .zip(v)
                    .map(|(yi, vi)| yi * c + &one_minus_rho * vi)
                    .collect()
            })
            .collect();
        let mut out = CarpetIfs::new(self.d, self.rho.clone(), translations, self.probs.clone())?;
        out.separation_assertion = self.separation_assertion;
        Ok(out)
    }

    /// Conditional Monte Carlo trace of theta(B ∩ f_w(K)) / theta(f_w(K))
    /// along the prefixes of `word`.
    pub fn density_ratio_trace(
        &self,
        half_space: &HalfSpace,
        word: &[usize],
        n_suffix: usize,
        suffix_len: usize,
        seed: u64,
    ) -> Result<Vec<f64>, IfsError> {
        if n_suffix == 0 {
            return Err(IfsError::InsufficientSamples("zero suffix samples".into()));
        }
        let x0 = vec![0.0; self.d];
        let mut trace = Vec::with_capacity(word.len());
        for n in 1..=word.len() {
            let hits: usize = (0..n_suffix)
                .into_par_iter()
                .filter(|&idx| {
                    let mut rng = rng_for(seed, STREAM_SUFFIX, (n * n_suffix + idx) as u64);
                    let mut w = word[..n].to_vec();
                    w.extend(self.draw_word(suffix_len, &mut rng));
                    half_space.contains(&self.cod(&w, &x0).coords)
                })
                .count();
            trace.push(hits as f64 / n_suffix as f64);
        }
        Ok(trace)
    }

    /// Federer and absolute-decay estimators from an empirical sample cloud.
    pub fn estimate_friendliness(
        &self,
        n_samples: usize,
        n_scales: usize,
        seed: u64,
    ) -> Result<FriendlinessEstimate, IfsError> {
        let report = self.validate()?;
        if report.separation == Separation::Unknown {
            return Err(IfsError::InsufficientSamples(
                "separation unknown; assert strong or open-set first".into(),
            ));
        }
        let cloud = self.sample_cloud(n_samples, seed);
        let centers: Vec<Vec<f64>> = (0..8)
            .map(|i| cloud[(i * cloud.len()) / 8].clone())
            .collect();
        let federer_d = self.federer_ratio(&cloud, &centers, 0.3, n_scales)?;

        // random rational hyperplanes through sampled support points,
        // normal entries in [-3, 3]
        let mut slopes = Vec::new();
        let mut rng = rng_for(seed, STREAM_FRIEND, 0);
        let eps_ladder: Vec<f64> = (1..=n_scales.max(3)).map(|j| 0.3f64.powi(j as i32)).collect();
        for trial in 0..8 {
            let center = &cloud[(trial * 131) % cloud.len()];
            let normal: Vec<f64> = (0..self.d)
                .map(|_| {
                    let num: i64 = rng.gen_range(-24..=24);
                    let den: i64 = rng.gen_range(1..=8);
                    (num as f64 / den as f64).clamp(-3.0, 3.0)
                })
                .collect();
            if normal.iter().all(|&c| c == 0.0) {
                continue;
            }
            let offset: f64 = normal.iter().zip(center).map(|(a, b)| a * b).sum();
            if let Ok(slope) =
                decay_slope(&cloud, center, &normal, offset, 1.0, &eps_ladder)
            {
                slopes.push(slope);
            }
        }
        if slopes.is_empty() {
            return Err(IfsError::InsufficientSamples("no decay regressions".into()));
        }
        let (decay_alpha, _) = mean_and_clt_bar(&slopes);
        Ok(FriendlinessEstimate {
            federer_d,
            decay_c: 1.0,
            decay_alpha,
            sample_count: n_samples,
            seed,
        })
    }

    pub fn sample_cloud(&self, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
        self.sample_theta(n_samples, 48, seed)
            .into_iter()
            .map(|p| p.coords)
            .collect()
    }

    /// max over centers and a geometric ladder of scales of
    /// count(B(x,3r)) / count(B(x,r)).
    pub fn federer_ratio(
        &self,
        cloud: &[Vec<f64>],
        centers: &[Vec<f64>],
        r0: f64,
        n_scales: usize,
    ) -> Result<f64, IfsError> {
        let mut worst: f64 = 1.0;
        for center in centers {
            for j in 0..n_scales {
                let r = r0 * 0.5f64.powi(j as i32);
                let inner = count_in_ball(cloud, center, r);
                if inner == 0 {
                    return Err(IfsError::InsufficientSamples(format!(
                        "empty ball radius {r}"
                    )));
                }
                let outer = count_in_ball(cloud, center, 3.0 * r);
                worst = worst.max(outer as f64 / inner as f64);
            }
        }
        Ok(worst)
    }
}

fn count_in_ball(cloud: &[Vec<f64>], center: &[f64], r: f64) -> usize {
    cloud
        .iter()
        .filter(|p| {
            p.iter()
                .zip(center)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                <= r
        })
        .count()
}

/// Slope of the log-log regression of
/// count(B(center,r) ∩ L^(eps)) / count(B(center,r)) against eps/r, for the
/// hyperplane {x : normal.x = offset}.
pub fn decay_slope(
    cloud: &[Vec<f64>],
    center: &[f64],
    normal: &[f64],
    offset: f64,
    r: f64,
    eps_ladder: &[f64],
) -> Result<f64, IfsError> {
    let norm = normal.iter().map(|c| c * c).sum::<f64>().sqrt();
    let in_ball: Vec<&Vec<f64>> = cloud
        .iter()
        .filter(|p| {
            p.iter()
                .zip(center)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                <= r
        })
        .collect();
    if in_ball.is_empty() {
        return Err(IfsError::InsufficientSamples("empty base ball".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &eps in eps_ladder {
        let hits = in_ball
            .iter()
            .filter(|p| {
                let dist = (p.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() - offset).abs()
                    / norm;
                dist <= eps
            })
            .count();
        if hits == 0 {
            continue;
        }
        xs.push((eps / r).ln());
        ys.push((hits as f64 / in_ball.len() as f64).ln());
    }
    if xs.len() < 2 {
        return Err(IfsError::InsufficientSamples(
            "not enough nonempty neighborhoods for regression".into(),
        ));
    }
    Ok(regression_slope(&xs, &ys))
}

fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
