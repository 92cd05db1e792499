//! Brute-force reference implementations and random fixtures.
//!
//! Nothing here calls into the library's kernels: tables are plain
//! `(token, vector)` lists searched linearly and every statistic is spelled
//! out with raw sums.

#![allow(dead_code)]

use lexiprofile_core::{CaseMode, EmbeddingTable, Lexicon};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Entries = Vec<(String, Vec<f64>)>;

pub fn find<'a>(entries: &'a Entries, token: &str) -> Option<&'a [f64]> {
    entries.iter().find(|(t, _)| t == token).map(|(_, v)| v.as_slice())
}

pub fn oracle_cosine(u: &[f64], v: &[f64]) -> f64 {
    let mut uv = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for i in 0..u.len() {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    uv / (uu * vv).sqrt()
}

/// Mean similarity to found positive tokens minus mean similarity to found
/// negative tokens, by explicit double loop. `None` if the person or a whole
/// pole is missing.
pub fn oracle_bipolar(entries: &Entries, person: &str, positive: &[String], negative: &[String]) -> Option<f64> {
    let p = find(entries, person)?;
    let mut means = [0.0; 2];
    for (k, pole) in [positive, negative].iter().enumerate() {
        let mut total = 0.0;
        let mut count = 0usize;
        for token in pole.iter() {
            for (t, v) in entries {
                if t == token {
                    total += oracle_cosine(p, v);
                    count += 1;
                }
            }
        }
        if count == 0 {
            return None;
        }
        means[k] = total / count as f64;
    }
    Some(means[0] - means[1])
}

pub fn oracle_lexicon_score(entries: &Entries, person: &str, lexicon: &Lexicon) -> Option<f64> {
    oracle_bipolar(entries, person, lexicon.positive(), lexicon.negative())
}

pub fn oracle_ep(valence: f64, arousal: f64) -> f64 {
    let magnitude = if valence < 0.0 { -valence } else { valence };
    magnitude * arousal
}

pub fn oracle_mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

/// Pearson r from the raw-sum formula.
pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn oracle_zscore(x: &[f64], ddof: usize) -> Vec<f64> {
    let m = oracle_mean(x);
    let mut ss = 0.0;
    for v in x {
        ss += (v - m).powi(2);
    }
    let sd = (ss / (x.len() - ddof) as f64).sqrt();
    x.iter().map(|v| (v - m) / sd).collect()
}

pub struct OracleAnova {
    pub f: f64,
    pub eta_squared: f64,
    pub p: Option<f64>,
    pub df_between: usize,
    pub df_within: usize,
}

/// One-way ANOVA from the computational formulas
/// `SST = sum x^2 - (sum x)^2 / N` and `SSB = sum T_g^2 / n_g - (sum x)^2 / N`.
/// The p-value uses the closed-form F tail, available when either degree of
/// freedom is even.
pub fn oracle_anova(groups: &[Vec<f64>]) -> OracleAnova {
    let mut n = 0.0;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut between_raw = 0.0;
    for g in groups {
        let t: f64 = g.iter().sum();
        between_raw += t * t / g.len() as f64;
        for v in g {
            sum_sq += v * v;
        }
        sum += t;
        n += g.len() as f64;
    }
    let correction = sum * sum / n;
    let sst = sum_sq - correction;
    let ssb = between_raw - correction;
    let ssw = sst - ssb;
    let df_between = groups.len() - 1;
    let df_within = n as usize - groups.len();
    let f = (ssb / df_between as f64) / (ssw / df_within as f64);
    OracleAnova {
        f,
        eta_squared: ssb / sst,
        p: f_tail_closed_form(f, df_between, df_within),
        df_between,
        df_within,
    }
}

/// `P(F > f)` via the finite series for `I_y(a, m)` with integer `m`:
/// `I_y(a, m) = y^a * sum_{j<m} Γ(a+j) / (Γ(a) j!) * (1-y)^j`.
pub fn f_tail_closed_form(f: f64, d1: usize, d2: usize) -> Option<f64> {
    let y = d2 as f64 / (d2 as f64 + d1 as f64 * f);
    // P(F > f) = I_y(d2/2, d1/2)
    if d1.is_multiple_of(2) {
        Some(beta_integer_b(y, d2 as f64 / 2.0, d1 / 2))
    } else if d2.is_multiple_of(2) {
        // I_y(a, b) = 1 - I_{1-y}(b, a) with a = d2/2 an integer
        Some(1.0 - beta_integer_b(1.0 - y, d1 as f64 / 2.0, d2 / 2))
    } else {
        None
    }
}

fn beta_integer_b(y: f64, a: f64, m: usize) -> f64 {
    let mut term = 1.0;
    let mut total = 0.0;
    for j in 0..m {
        if j > 0 {
            term *= (a + j as f64 - 1.0) / j as f64 * (1.0 - y);
        }
        total += term;
    }
    y.powf(a) * total
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
            return v;
        }
    }
}

pub fn random_entries(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Entries {
    (0..n).map(|i| (format!("t{i}"), random_vector(rng, dim))).collect()
}

pub fn table_of(entries: &Entries) -> EmbeddingTable {
    EmbeddingTable::from_entries("random", entries[0].1.len(), CaseMode::Exact, entries.iter().cloned())
        .unwrap()
}

/// A lexicon over disjoint random subsets of `vocab`, optionally including
/// tokens that are not in any table.
pub fn random_lexicon(rng: &mut ChaCha8Rng, name: &str, vocab: &[String], with_oov: bool) -> Lexicon {
    let mut pool: Vec<String> = vocab.to_vec();
    pool.shuffle(rng);
    let n_pos = rng.gen_range(1..=pool.len().min(8) / 2).max(1);
    let n_neg = rng.gen_range(1..=(pool.len() - n_pos).min(8) / 2).max(1);
    let mut positive: Vec<String> = pool[..n_pos].to_vec();
    let mut negative: Vec<String> = pool[n_pos..n_pos + n_neg].to_vec();
    if with_oov {
        positive.push(format!("{name}_oov_pos"));
        negative.push(format!("{name}_oov_neg"));
    }
    Lexicon::new(name, positive, negative, vec![]).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
