//! Bernoulli shift space on a finite alphabet: cylinder measures, complete
//! prefix sets with exact partition certificates, and the prefix averaging
//! operator with a seeded convergence test against a Monte Carlo reference.

use crate::arith::{rat_to_f64, Rat};
use crate::report::mean_and_clt_bar;
use crate::rng::rng_for;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use std::sync::Arc;

const STREAM_TAIL: u64 = 21;
const STREAM_REF: u64 = 22;

/// Hard cap on enumerated prefix sets.
pub const PREFIX_SET_CAP: usize = 10_000_000;

#[derive(Debug, thiserror::Error)]
pub enum ShiftError {
    #[error("probability vector must be positive and sum to one")]
    BadProbabilities,
    #[error("prefix set of size {0} exceeds the cap")]
    TooLarge(usize),
    #[error("word {0:?} is a prefix of word {1:?}")]
    NotPrefixFree(Vec<usize>, Vec<usize>),
    #[error("length-{0} word {1:?} is covered by {2} prefixes, expected exactly one")]
    NotAPartition(usize, Vec<usize>, usize),
    #[error("tail of length {got} is too short, need at least {need}")]
    TailTooShort { need: usize, got: usize },
    #[error("minimum prefix lengths must be strictly increasing")]
    LengthsNotIncreasing,
    #[error("letter {0} out of range for alphabet size {1}")]
    BadLetter(usize, usize),
}

/// The full shift B = {1..k}^N with the Bernoulli measure from a rational
/// probability vector. Measures of cylinders are exact.
#[derive(Debug, Clone)]
pub struct ShiftSpace {
    pub k: usize,
    pub probs: Vec<Rat>,
    probs_f64: Vec<f64>,
}

impl ShiftSpace {
    pub fn new(probs: Vec<Rat>) -> Result<ShiftSpace, ShiftError> {
        if probs.is_empty()
            || probs.iter().any(|p| p <= &Rat::zero())
            || probs.iter().sum::<Rat>() != Rat::one()
        {
            return Err(ShiftError::BadProbabilities);
        }
        let probs_f64 = probs.iter().map(rat_to_f64).collect();
        Ok(ShiftSpace {
            k: probs.len(),
            probs,
            probs_f64,
        })
    }

    pub fn uniform(k: usize) -> ShiftSpace {
        let p = Rat::new(1.into(), (k as i64).into());
        ShiftSpace::new(vec![p; k]).expect("uniform vector is valid")
    }

    /// Exact measure of the cylinder [a].
    pub fn cylinder_measure(&self, word: &[usize]) -> Result<Rat, ShiftError> {
        let mut beta = Rat::one();
        for &a in word {
            if a >= self.k {
                return Err(ShiftError::BadLetter(a, self.k));
            }
            beta *= &self.probs[a];
        }
        Ok(beta)
    }

    pub fn sample_word<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<usize> {
        (0..len)
            .map(|_| {
                let t: f64 = rng.gen();
                let mut acc = 0.0;
                for (i, p) in self.probs_f64.iter().enumerate() {
                    acc += p;
                    if t < acc {
                        return i;
                    }
                }
                self.k - 1
            })
            .collect()
    }
}

/// A finite set of words whose cylinders partition the shift space. The
/// constructor certifies prefix-freeness and completeness exactly.
#[derive(Debug, Clone)]
pub struct CompletePrefixSet {
    pub words: Vec<Vec<usize>>,
    pub min_len: usize,
    pub max_len: usize,
}

impl CompletePrefixSet {
    pub fn new(k: usize, words: Vec<Vec<usize>>) -> Result<CompletePrefixSet, ShiftError> {
        if words.is_empty() || words.len() > PREFIX_SET_CAP {
            return Err(ShiftError::TooLarge(words.len()));
        }
        for w in &words {
            for &a in w {
                if a >= k {
                    return Err(ShiftError::BadLetter(a, k));
                }
            }
            if w.is_empty() {
                return Err(ShiftError::NotAPartition(0, Vec::new(), words.len()));
            }
        }
        for (i, a) in words.iter().enumerate() {
            for b in words.iter().skip(i + 1) {
                let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                if long.starts_with(short) {
                    return Err(ShiftError::NotPrefixFree(short.clone(), long.clone()));
                }
            }
        }
        let max_len = words.iter().map(Vec::len).max().unwrap();
        let min_len = words.iter().map(Vec::len).min().unwrap();
        if k.pow(max_len as u32) > PREFIX_SET_CAP {
            return Err(ShiftError::TooLarge(k.pow(max_len as u32)));
        }
        // completeness: every length-max_len word has exactly one prefix in
        // the set (prefix-freeness already rules out more than one)
        let mut probe = vec![0usize; max_len];
        loop {
            let covered = words.iter().filter(|w| probe.starts_with(w)).count();
            if covered != 1 {
                return Err(ShiftError::NotAPartition(max_len, probe.clone(), covered));
            }
            let mut pos = max_len;
            loop {
                if pos == 0 {
                    return Ok(CompletePrefixSet {
                        words,
                        min_len,
                        max_len,
                    });
                }
                pos -= 1;
                probe[pos] += 1;
                if probe[pos] < k {
                    break;
                }
                probe[pos] = 0;
            }
        }
    }

    /// All k^n words of length n.
    pub fn uniform(k: usize, n: usize) -> Result<CompletePrefixSet, ShiftError> {
        assert!(n >= 1);
        if (k as f64).powi(n as i32) > PREFIX_SET_CAP as f64 {
            return Err(ShiftError::TooLarge(k.saturating_pow(n as u32)));
        }
        let mut words: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..n {
            words = words
                .into_iter()
                .flat_map(|w| {
                    (0..k).map(move |a| {
                        let mut v = w.clone();
                        v.push(a);
                        v
                    })
                })
                .collect();
        }
        CompletePrefixSet::new(k, words)
    }

    /// Words ending at the first occurrence of the symbol s, together with
    /// every s-free word of the cap length.
    pub fn first_hit(k: usize, s: usize, cap: usize) -> Result<CompletePrefixSet, ShiftError> {
        assert!(cap >= 1);
        if s >= k {
            return Err(ShiftError::BadLetter(s, k));
        }
        let mut words = Vec::new();
        let others: Vec<usize> = (0..k).filter(|&a| a != s).collect();
        let mut free: Vec<Vec<usize>> = vec![Vec::new()];
        for len in 1..=cap {
            let mut next_free = Vec::new();
            for w in &free {
                let mut hit = w.clone();
                hit.push(s);
                words.push(hit);
                for &a in &others {
                    let mut v = w.clone();
                    v.push(a);
                    next_free.push(v);
                }
            }
            if len == cap {
                words.extend(next_free.clone());
            }
            free = next_free;
            if words.len() + free.len() > PREFIX_SET_CAP {
                return Err(ShiftError::TooLarge(words.len() + free.len()));
            }
        }
        CompletePrefixSet::new(k, words)
    }

    /// Exact partition mass check: the cylinder measures sum to one.
    pub fn total_measure(&self, space: &ShiftSpace) -> Result<Rat, ShiftError> {
        let mut total = Rat::zero();
        for w in &self.words {
            total += space.cylinder_measure(w)?;
        }
        Ok(total)
    }
}

/// A bounded word-functional evaluated from the first `depth` letters, with
/// an optional exact rational path.
#[derive(Clone)]
pub struct WordFn {
    pub label: String,
    pub depth: usize,
    pub sup_bound: f64,
    eval: Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>,
    eval_exact: Option<Arc<dyn Fn(&[usize]) -> Rat + Send + Sync>>,
}

impl WordFn {
    pub fn new(
        label: &str,
        depth: usize,
        sup_bound: f64,
        eval: impl Fn(&[usize]) -> f64 + Send + Sync + 'static,
    ) -> WordFn {
        WordFn {
            label: label.to_string(),
            depth,
            sup_bound,
            eval: Arc::new(eval),
            eval_exact: None,
        }
    }

    pub fn new_exact(
        label: &str,
        depth: usize,
        sup_bound: f64,
        eval: impl Fn(&[usize]) -> Rat + Send + Sync + 'static,
    ) -> WordFn {
        let exact = Arc::new(eval);
        let e2 = exact.clone();
        WordFn {
            label: label.to_string(),
            depth,
            sup_bound,
            eval: Arc::new(move |w| rat_to_f64(&e2(w))),
            eval_exact: Some(exact),
        }
    }

    pub fn constant(c: f64) -> WordFn {
        WordFn::new("constant", 0, c.abs(), move |_| c)
    }

    /// Indicator of the cylinder [c].
    pub fn cylinder_indicator(c: Vec<usize>) -> WordFn {
        let depth = c.len();
        WordFn::new_exact("cylinder", depth, 1.0, move |w| {
            if w[..depth] == c[..] {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
    }

    /// The Lipschitz test functional sum over i of 2^{-(i+1)} [w_i = 0],
    /// truncated at the given depth.
    pub fn dyadic_weight(depth: usize) -> WordFn {
        WordFn::new_exact("dyadic-weight", depth, 1.0, move |w| {
            let mut v = Rat::zero();
            let mut scale = Rat::new(1.into(), 2.into());
            for &a in &w[..depth] {
                if a == 0 {
                    v += &scale;
                }
                scale /= Rat::from_integer(2.into());
            }
            v
        })
    }

    pub fn eval(&self, word: &[usize]) -> f64 {
        (self.eval)(word)
    }
}

/// The weighted average Sum over a in P of f(ab) beta([a]).
#[derive(Debug, Clone)]
pub struct PrefixAverage {
    pub value: f64,
    pub exact: Option<Rat>,
    pub integrand: String,
    pub n_words: usize,
}

pub fn prefix_average(
    space: &ShiftSpace,
    f: &WordFn,
    pset: &CompletePrefixSet,
    tail: &[usize],
) -> Result<PrefixAverage, ShiftError> {
    if tail.len() < f.depth {
        return Err(ShiftError::TailTooShort {
            need: f.depth,
            got: tail.len(),
        });
    }
    let mut buffer = Vec::with_capacity(pset.max_len + f.depth);
    let mut exact = f.eval_exact.as_ref().map(|_| Rat::zero());
    let mut value = 0.0;
    let mut comp = 0.0;
    for a in &pset.words {
        buffer.clear();
        buffer.extend_from_slice(a);
        buffer.extend_from_slice(&tail[..f.depth.min(tail.len())]);
        let beta = space.cylinder_measure(a)?;
        match (&mut exact, &f.eval_exact) {
            (Some(acc), Some(ex)) => *acc += &ex(&buffer) * &beta,
            _ => {}
        }
        // compensated summation for the floating path
        let term = f.eval(&buffer) * rat_to_f64(&beta);
        let y = term - comp;
        let t = value + y;
        comp = (t - value) - y;
        value = t;
    }
    if let Some(acc) = &exact {
        value = rat_to_f64(acc);
    }
    debug_assert!(value.abs() <= f.sup_bound + 1e-9);
    Ok(PrefixAverage {
        value,
        exact,
        integrand: f.label.clone(),
        n_words: pset.words.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub min_len: usize,
    pub max_dev: f64,
    pub ref_value: f64,
    pub ref_clt_bar: f64,
}

/// For each prefix set, samples random tails and reports the worst deviation
/// of the prefix average from a high-accuracy Monte Carlo reference of the
/// integral of f.
pub fn ergodic_convergence_test(
    space: &ShiftSpace,
    f: &WordFn,
    prefix_sets: &[CompletePrefixSet],
    n_tails: usize,
    n_reference: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>, ShiftError> {
    for pair in prefix_sets.windows(2) {
        if pair[1].min_len <= pair[0].min_len {
            return Err(ShiftError::LengthsNotIncreasing);
        }
    }
    let mut ref_rng = rng_for(seed, STREAM_REF, 0);
    let samples: Vec<f64> = (0..n_reference)
        .map(|_| f.eval(&space.sample_word(f.depth.max(1), &mut ref_rng)))
        .collect();
    let (ref_value, ref_clt_bar) = mean_and_clt_bar(&samples);
    let mut rows = Vec::new();
    for pset in prefix_sets {
        let devs: Result<Vec<f64>, ShiftError> = (0..n_tails)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(seed, STREAM_TAIL, i as u64);
                let tail = space.sample_word(f.depth, &mut rng);
                let avg = prefix_average(space, f, pset, &tail)?;
                Ok((avg.value - ref_value).abs())
            })
            .collect();
        let max_dev = devs?.into_iter().fold(0.0, f64::max);
        rows.push(ConvergenceRow {
            min_len: pset.min_len,
            max_dev,
            ref_value,
            ref_clt_bar,
        });
    }
    Ok(rows)
}
