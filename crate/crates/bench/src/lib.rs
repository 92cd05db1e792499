//! Synthetic inputs shared by the benchmarks.

use lexiprofile_core::numerics::GroupSample;
use lexiprofile_core::{bundled, CaseMode, Domain, EmbeddingTable, LexiconSet, PersonRoster, RosterEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `vec` text with `n` random rows of dimension `dim`.
pub fn vec_text(n: usize, dim: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = format!("{n} {dim}\n");
    for i in 0..n {
        out.push_str(&format!("tok{i}"));
        for v in vector(&mut rng, dim) {
            out.push_str(&format!(" {v:.5}"));
        }
        out.push('\n');
    }
    out
}

pub struct World {
    pub table: EmbeddingTable,
    pub roster: PersonRoster,
    pub lexicons: LexiconSet,
}

/// The bundled lexicons plus `n_persons` persons, all with random vectors.
pub fn world(n_persons: usize, dim: usize, seed: u64) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicons = bundled::lexicon_set();
    let mut tokens: Vec<String> = lexicons.iter().flat_map(|l| l.tokens().map(String::from)).collect();
    tokens.sort();
    tokens.dedup();
    let domains = [Domain::Arts, Domain::Politics, Domain::Science];
    let roster: Vec<RosterEntry> = (0..n_persons)
        .map(|i| RosterEntry {
            name: format!("person{i}"),
            domain: domains[i % 3],
        })
        .collect();
    tokens.extend(roster.iter().map(|r| r.name.clone()));
    let entries: Vec<(String, Vec<f64>)> = tokens.into_iter().map(|t| (t, vector(&mut rng, dim))).collect();
    World {
        table: EmbeddingTable::from_entries("synthetic", dim, CaseMode::FoldFallback, entries).unwrap(),
        roster: PersonRoster::new(roster).unwrap(),
        lexicons,
    }
}

pub fn groups(n_groups: usize, size: usize, seed: u64) -> Vec<GroupSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_groups)
        .map(|g| {
            let shift = g as f64 * 0.1;
            GroupSample::new(g.to_string(), (0..size).map(|_| rng.gen_range(-1.0..1.0) + shift).collect())
        })
        .collect()
}
