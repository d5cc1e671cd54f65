//! Weighted badly-approximable and Dirichlet-improvable classification, by
//! direct inequality scans and by the trajectory of Lambda_x under the
//! weighted diagonal flow, with the two routes cross-checked against each
//! other for the sup norm.

use crate::arith::{rat_to_f64, Rat};
use crate::ifs::CarpetIfs;
use crate::latflow::{embed_f64, flow, lambda1, DiagonalSequence, LatflowError, NormSpec, WeightVector};
use crate::report::fraction_and_clt_bar;
use num_traits::Signed;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum DiophError {
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("epsilon {eps} is not below the critical radius {crit}; the condition is vacuous")]
    VacuousEpsilon { eps: f64, crit: f64 },
    #[error("critical radius for this norm needs a user-supplied value")]
    MissingCriticalRadius,
    #[error("grid resolution dt must be positive and at most 0.1, got {0}")]
    BadGrid(f64),
    #[error(transparent)]
    Latflow(#[from] LatflowError),
    #[error(transparent)]
    Ifs(#[from] crate::ifs::IfsError),
}

/// Coordinate of a classification target: exact rational, or a real
/// quadratic a + b*sqrt(disc) evaluated in doubles with its conjugate data
/// kept for oracles.
#[derive(Debug, Clone)]
pub enum RealInput {
    Rational(Rat),
    Quadratic { a: Rat, b: Rat, disc: u64 },
    Double(f64),
}

impl RealInput {
    pub fn to_f64(&self) -> f64 {
        match self {
            RealInput::Rational(r) => rat_to_f64(r),
            RealInput::Quadratic { a, b, disc } => {
                rat_to_f64(a) + rat_to_f64(b) * (*disc as f64).sqrt()
            }
            RealInput::Double(x) => *x,
        }
    }

    /// (sqrt(5) - 1) / 2, the golden-rotation number.
    pub fn golden() -> RealInput {
        RealInput::Quadratic {
            a: Rat::new((-1).into(), 2.into()),
            b: Rat::new(1.into(), 2.into()),
            disc: 5,
        }
    }

    /// Distance from q * x to the nearest integer; exact for rational x.
    fn dist_to_z(&self, q: u64) -> f64 {
        match self {
            RealInput::Rational(r) => {
                let qx = r * Rat::from_integer(q.into());
                let p = qx.round();
                rat_to_f64(&(qx - p).abs())
            }
            _ => {
                let qx = self.to_f64() * q as f64;
                (qx - qx.round()).abs()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaReport {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub horizon: u64,
    /// (Q, margin) with margin = Q * max_i |Q x_i - P_i|^{1/r_i}
    pub margin_trace: Vec<(u64, f64)>,
    pub min_margin: f64,
}

/// Exhaustive scan Q = 1..=horizon of the weighted approximation margin,
/// with P_i the nearest integer to Q x_i.
pub fn ba_test(x: &[RealInput], r: &WeightVector, horizon: u64) -> Result<BaReport, DiophError> {
    if horizon < 1 {
        return Err(DiophError::BadHorizon);
    }
    assert_eq!(x.len(), r.d());
    let mut margin_trace = Vec::with_capacity(horizon as usize);
    let mut min_margin = f64::INFINITY;
    for q in 1..=horizon {
        let worst = x
            .iter()
            .zip(&r.r)
            .map(|(xi, &ri)| xi.dist_to_z(q).powf(1.0 / ri))
            .fold(0.0f64, f64::max);
        let margin = q as f64 * worst;
        min_margin = min_margin.min(margin);
        margin_trace.push((q, margin));
    }
    Ok(BaReport {
        x: x.iter().map(RealInput::to_f64).collect(),
        r: r.r.clone(),
        horizon,
        margin_trace,
        min_margin,
    })
}

/// Margin-only fast path used by the Monte Carlo experiments.
pub fn min_margin_up_to(x: &[f64], r: &WeightVector, horizon: u64) -> f64 {
    let mut min_margin = f64::INFINITY;
    for q in 1..=horizon {
        let worst = x
            .iter()
            .zip(&r.r)
            .map(|(&xi, &ri)| {
                let qx = xi * q as f64;
                (qx - qx.round()).abs().powf(1.0 / ri)
            })
            .fold(0.0f64, f64::max);
        min_margin = min_margin.min(q as f64 * worst);
        if min_margin == 0.0 {
            break;
        }
    }
    min_margin
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusProvenance {
    Exact,
    UserSupplied,
    LowerBound,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CriticalRadius {
    pub epsilon_norm: f64,
    pub provenance: RadiusProvenance,
}

/// Largest eps such that some covolume-one lattice misses the punctured
/// eps-ball. Exact for the sup norm (any d) and the Euclidean norm at d = 1;
/// other norms need a user value.
pub fn critical_radius(
    norm: &NormSpec,
    d: usize,
    user_value: Option<f64>,
) -> Result<CriticalRadius, DiophError> {
    match norm {
        NormSpec::Sup => Ok(CriticalRadius {
            epsilon_norm: 1.0,
            provenance: RadiusProvenance::Exact,
        }),
        NormSpec::Euclidean if d == 1 => Ok(CriticalRadius {
            // hexagonal critical lattice
            epsilon_norm: (4.0f64 / 3.0).powf(0.25),
            provenance: RadiusProvenance::Exact,
        }),
        _ => match user_value {
            Some(v) if v > 0.0 => Ok(CriticalRadius {
                epsilon_norm: v,
                provenance: RadiusProvenance::UserSupplied,
            }),
            _ => Err(DiophError::MissingCriticalRadius),
        },
    }
}

#[derive(Debug, Clone)]
pub struct DirichletReport {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub eps: f64,
    pub t0: f64,
    pub horizon_t: f64,
    pub always_below: bool,
    pub systole_trace: Vec<(f64, f64)>,
    /// sup norm only: verdict of the integer scan, and per-grid-point
    /// agreement fraction with the dynamical route
    pub arithmetic_always_below: Option<bool>,
    pub route_agreement: Option<f64>,
}

/// For fixed Q, the t-interval on which Q witnesses the Dirichlet condition
/// in the sup norm: Q <= eps e^t and |Q x_i - P_i| <= eps e^{-r_i t}.
fn witness_interval(x: &[RealInput], r: &WeightVector, eps: f64, q: u64) -> (f64, f64) {
    let lo = ((q as f64) / eps).ln();
    let mut hi = f64::INFINITY;
    for (xi, &ri) in x.iter().zip(&r.r) {
        let dist = xi.dist_to_z(q);
        if dist > 0.0 {
            hi = hi.min(-(dist / eps).ln() / ri);
        }
    }
    (lo, hi)
}

/// Trajectory-based Dirichlet test on a t-grid, with bisection refinement
/// where the systole crosses eps inside a step. For the sup norm the
/// equivalent integer scan runs alongside and the verdicts are compared.
pub fn dirichlet_test(
    x: &[RealInput],
    r: &WeightVector,
    norm: &NormSpec,
    eps: f64,
    t0: f64,
    horizon_t: f64,
    dt: f64,
) -> Result<DirichletReport, DiophError> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(DiophError::BadGrid(dt));
    }
    let crit = critical_radius(norm, x.len(), Some(f64::INFINITY))?.epsilon_norm;
    if eps >= crit {
        return Err(DiophError::VacuousEpsilon { eps, crit });
    }
    let coords: Vec<f64> = x.iter().map(RealInput::to_f64).collect();
    let lat0 = embed_f64(&coords);
    let a = DiagonalSequence::Weighted(r.clone());
    let systole_at = |t: f64| -> Result<f64, DiophError> {
        Ok(lambda1(&flow(&lat0, &a, t)?, norm)?)
    };
    let n_steps = ((horizon_t - t0) / dt).ceil() as usize;
    let grid: Vec<f64> = (0..=n_steps)
        .map(|k| (t0 + k as f64 * dt).min(horizon_t))
        .collect();
    let mut systole_trace = Vec::with_capacity(grid.len());
    for &t in &grid {
        systole_trace.push((t, systole_at(t)?));
    }
    // refine where lambda_1 - eps changes sign within a step
    let mut refined = Vec::new();
    for w in systole_trace.windows(2) {
        let ((ta, la), (tb, lb)) = (w[0], w[1]);
        if (la - eps).signum() != (lb - eps).signum() {
            let mut lo = ta;
            let mut hi = tb;
            while hi - lo > dt / 32.0 {
                let mid = 0.5 * (lo + hi);
                refined.push((mid, systole_at(mid)?));
                if (systole_at(lo)? - eps).signum() != (systole_at(mid)? - eps).signum() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
    }
    systole_trace.extend(refined);
    systole_trace.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let always_below = systole_trace.iter().all(|&(_, l)| l <= eps);

    let (arithmetic_always_below, route_agreement) = if matches!(norm, NormSpec::Sup) {
        let q_max = (eps * horizon_t.exp()).floor() as u64;
        let intervals: Vec<(f64, f64)> = (1..=q_max)
            .map(|q| witness_interval(x, r, eps, q))
            .filter(|&(lo, hi)| lo <= hi)
            .collect();
        let covered = |t: f64| intervals.iter().any(|&(lo, hi)| lo <= t && t <= hi);
        let arith_ok = grid.iter().all(|&t| covered(t));
        let agree = grid
            .iter()
            .filter(|&&t| covered(t) == (systole_at(t).map(|l| l <= eps).unwrap_or(false)))
            .count() as f64
            / grid.len() as f64;
        (Some(arith_ok), Some(agree))
    } else {
        (None, None)
    };

    Ok(DirichletReport {
        x: coords,
        r: r.r.clone(),
        eps,
        t0,
        horizon_t,
        always_below,
        systole_trace,
        arithmetic_always_below,
        route_agreement,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayRow {
    pub horizon: u64,
    pub threshold: f64,
    pub ba_fraction: f64,
    pub ba_clt_bar: f64,
    pub dirichlet_fraction: f64,
    pub dirichlet_clt_bar: f64,
}

/// theta-nullity experiment: for each horizon T, the fraction of theta
/// samples whose BA margin up to T exceeds each threshold, and the fraction
/// that is Dirichlet-improvable up to the matching time horizon ln T in the
/// sup norm with the given eps. One sample panel is reused across horizons,
/// so both fraction families are nonincreasing by construction.
pub fn measure_zero_experiment(
    ifs: &CarpetIfs,
    r: &WeightVector,
    thresholds: &[f64],
    horizons: &[u64],
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<DecayRow>, DiophError> {
    let crit = critical_radius(&NormSpec::Sup, ifs.d, None)?.epsilon_norm;
    if eps >= crit {
        return Err(DiophError::VacuousEpsilon { eps, crit });
    }
    let samples = ifs.sample_theta(n_samples, 48, seed);
    let max_t = *horizons.iter().max().ok_or(DiophError::BadHorizon)?;
    // per sample: the full margin running minimum at each horizon, and the
    // witness intervals for the Dirichlet scan
    let per_sample: Vec<(Vec<f64>, Vec<bool>)> = samples
        .par_iter()
        .map(|p| {
            let x = &p.coords;
            let margins: Vec<f64> = horizons
                .iter()
                .map(|&t| min_margin_up_to(x, r, t))
                .collect();
            let inputs: Vec<RealInput> = x.iter().map(|&c| RealInput::Double(c)).collect();
            let q_max = (eps * (max_t as f64)).floor() as u64;
            let intervals: Vec<(f64, f64)> = (1..=q_max.max(1))
                .map(|q| witness_interval(&inputs, r, eps, q))
                .filter(|&(lo, hi)| lo <= hi)
                .collect();
            let improvable: Vec<bool> = horizons
                .iter()
                .map(|&t_h| {
                    let t_end = (t_h as f64).ln();
                    let mut t = 1.0f64;
                    let mut ok = true;
                    while t <= t_end && ok {
                        ok = intervals.iter().any(|&(lo, hi)| lo <= t && t <= hi);
                        t += 0.02;
                    }
                    ok
                })
                .collect();
            (margins, improvable)
        })
        .collect();
    let mut rows = Vec::new();
    for (ti, &horizon) in horizons.iter().enumerate() {
        let di_hits = per_sample.iter().filter(|(_, imp)| imp[ti]).count();
        let (di_f, di_b) = fraction_and_clt_bar(di_hits, n_samples);
        for &threshold in thresholds {
            let ba_hits = per_sample
                .iter()
                .filter(|(m, _)| m[ti] >= threshold)
                .count();
            let (ba_f, ba_b) = fraction_and_clt_bar(ba_hits, n_samples);
            rows.push(DecayRow {
                horizon,
                threshold,
                ba_fraction: ba_f,
                ba_clt_bar: ba_b,
                dirichlet_fraction: di_f,
                dirichlet_clt_bar: di_b,
            });
        }
    }
    Ok(rows)
}
