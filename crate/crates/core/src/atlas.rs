//! Enumeration and classification of canonical character sets for small ranks.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{self, F2Matrix, F2Vec};
use crate::oracle::{KResult, OracleError};
use crate::reducer::{self, ReduceError, ReduceOptions};
use crate::rep::{parse_rep, CanonicalRep};
use crate::Oracle;

pub const MAX_EXHAUSTIVE_RANK: usize = 4;
pub const MAX_SAMPLED_RANK: usize = 8;
pub const MAX_ORBIT_RANK: usize = 4;

pub const DISCREPANCY_FLAG: &str = "paper_discrepancy";

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("rank {n} exceeds the limit {limit} for {what}")]
    SizeGuard { n: usize, limit: usize, what: &'static str },
    #[error("engines disagree on S = {{{chars}}}: oracle {oracle:?}, reducer {reducer:?}")]
    EngineDisagreement {
        chars: String,
        oracle: KResult,
        reducer: KResult,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasRow {
    pub n: usize,
    #[serde(rename = "S")]
    pub chars: Vec<F2Vec>,
    pub chi: i64,
    pub m: u32,
    pub epsilon: u8,
    pub orbit: Option<Vec<F2Vec>>,
    #[serde(skip)]
    pub trace_toggle_count: usize,
    pub flags: Vec<String>,
}

/// A case of the rank-three classification together with its published value.
#[derive(Debug, Clone, Copy)]
pub struct PublishedCase {
    pub name: &'static str,
    pub expr: &'static str,
    pub published: KResult,
}

pub const PUBLISHED_CASES: [PublishedCase; 6] = [
    PublishedCase {
        name: "ee1",
        expr: "a+b+c+abc",
        published: KResult { m: 2, epsilon: 0 },
    },
    PublishedCase {
        name: "ee2",
        expr: "a+b+c+ab+bc",
        published: KResult { m: 1, epsilon: 1 },
    },
    PublishedCase {
        name: "ee3",
        expr: "a+b+c+ab+abc",
        published: KResult { m: 1, epsilon: 1 },
    },
    PublishedCase {
        name: "ee4",
        expr: "a+b+c+ab+ac+bc",
        published: KResult { m: 2, epsilon: 1 },
    },
    PublishedCase {
        name: "ee5",
        expr: "a+b+c+ab+bc+abc",
        published: KResult { m: 2, epsilon: 1 },
    },
    PublishedCase {
        name: "ee6",
        expr: "a+b+c+ab+bc+ac+abc",
        published: KResult { m: 3, epsilon: 1 },
    },
];

impl PublishedCase {
    pub fn chars(&self) -> Vec<F2Vec> {
        let rep = parse_rep(self.expr, 3).expect("case expressions parse");
        rep.summands()
    }
}

/// Bit `c - 1` of a mask stands for the nonzero character `c`.
pub fn mask_to_chars(mask: u64) -> Vec<F2Vec> {
    (0..64)
        .filter(|i| (mask >> i) & 1 == 1)
        .map(|i| F2Vec(i as u16 + 1))
        .collect()
}

pub fn chars_to_mask(chars: &[F2Vec]) -> u64 {
    chars.iter().fold(0, |acc, c| acc | (1u64 << (c.bits() - 1)))
}

fn check_orbit_rank(n: usize) -> Result<(), AtlasError> {
    if n > MAX_ORBIT_RANK {
        return Err(AtlasError::SizeGuard {
            n,
            limit: MAX_ORBIT_RANK,
            what: "GL(n,2) canonical forms",
        });
    }
    Ok(())
}

fn sorted_image(a: &F2Matrix, chars: &[F2Vec]) -> Vec<F2Vec> {
    let mut img: Vec<F2Vec> = chars.iter().map(|c| a.dual_apply(*c)).collect();
    img.sort_unstable();
    img
}

/// Lexicographically least image of `chars` under every invertible dual map.
pub fn gl_canonical_form(chars: &[F2Vec], n: usize) -> Result<Vec<F2Vec>, AtlasError> {
    check_orbit_rank(n)?;
    let mut best: Vec<F2Vec> = chars.to_vec();
    best.sort_unstable();
    best.dedup();
    for a in gf2::general_linear_group(n) {
        let img = sorted_image(&a, &best);
        if img < best {
            best = img;
        }
    }
    Ok(best)
}

/// Canonical form of every subset of nonzero characters at rank `n`, found
/// by walking orbits under the transvections.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    pub n: usize,
    canonical: Vec<u64>,
}

impl OrbitTable {
    pub fn new(n: usize) -> Result<Self, AtlasError> {
        check_orbit_rank(n)?;
        let chars = (1usize << n) - 1;
        let total = 1usize << chars;
        // Each generator as a permutation of character bits.
        let gens: Vec<Vec<u8>> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| {
                let t = F2Matrix::transvection(n, i, j);
                (1..=chars)
                    .map(|c| (t.dual_apply(F2Vec(c as u16)).bits() - 1) as u8)
                    .collect()
            })
            .collect();
        let apply = |perm: &[u8], mask: u64| {
            (0..chars).fold(0u64, |acc, b| {
                if (mask >> b) & 1 == 1 {
                    acc | (1 << perm[b])
                } else {
                    acc
                }
            })
        };
        const UNSEEN: u64 = u64::MAX;
        let mut canonical = vec![UNSEEN; total];
        let mut queue = VecDeque::new();
        for start in 0..total as u64 {
            if canonical[start as usize] != UNSEEN {
                continue;
            }
            let mut members = vec![start];
            canonical[start as usize] = start;
            queue.push_back(start);
            while let Some(s) = queue.pop_front() {
                for g in &gens {
                    let t = apply(g, s);
                    if canonical[t as usize] == UNSEEN {
                        canonical[t as usize] = start;
                        members.push(t);
                        queue.push_back(t);
                    }
                }
            }
            let rep = members
                .iter()
                .copied()
                .min_by(|a, b| mask_to_chars(*a).cmp(&mask_to_chars(*b)))
                .expect("orbit is nonempty");
            for m in members {
                canonical[m as usize] = rep;
            }
        }
        Ok(OrbitTable { n, canonical })
    }

    pub fn canonical_mask(&self, mask: u64) -> u64 {
        self.canonical[mask as usize]
    }

    pub fn canonical(&self, chars: &[F2Vec]) -> Vec<F2Vec> {
        mask_to_chars(self.canonical_mask(chars_to_mask(chars)))
    }

    pub fn orbit_count(&self) -> usize {
        let mut reps: Vec<u64> = self.canonical.clone();
        reps.sort_unstable();
        reps.dedup();
        reps.len()
    }
}

fn hex_join(chars: &[F2Vec]) -> String {
    chars.iter().map(|c| format!("{c:x}")).collect::<Vec<_>>().join(" ")
}

fn evaluate(n: usize, chars: Vec<F2Vec>, oracle: &mut Oracle) -> Result<AtlasRow, AtlasError> {
    let rep = CanonicalRep::from_set(n, chars.iter().copied()).expect("characters fit the rank");
    let chi = oracle.chi_canonical(&rep)?;
    let by_oracle = crate::oracle::to_k_result(chi, n)?;
    let (by_reducer, trace) = reducer::reduce_with(&rep.to_multiset(), ReduceOptions::default(), oracle)?;
    if by_oracle != by_reducer {
        return Err(AtlasError::EngineDisagreement {
            chars: hex_join(&chars),
            oracle: by_oracle,
            reducer: by_reducer,
        });
    }
    Ok(AtlasRow {
        n,
        chars,
        chi: chi.0,
        m: by_oracle.m,
        epsilon: by_oracle.epsilon,
        orbit: None,
        trace_toggle_count: trace.toggle_count(),
        flags: Vec::new(),
    })
}

/// Orbit forms of the rank-three cases, with the cases sharing each form.
fn published_orbits(table: &OrbitTable) -> HashMap<u64, Vec<&'static PublishedCase>> {
    let mut out: HashMap<u64, Vec<&'static PublishedCase>> = HashMap::new();
    for case in &PUBLISHED_CASES {
        out.entry(table.canonical_mask(chars_to_mask(&case.chars())))
            .or_default()
            .push(case);
    }
    out
}

/// Rows for every canonical `S` (exhaustive) or for random subsets (sampled),
/// each checked by both engines. Sorted by `S`.
pub fn enumerate(n: usize, mode: Mode) -> Result<Vec<AtlasRow>, AtlasError> {
    let sets: Vec<Vec<F2Vec>> = match mode {
        Mode::Exhaustive => all_sets(n)?,
        Mode::Sample { count, seed } => {
            if n > MAX_SAMPLED_RANK {
                return Err(AtlasError::SizeGuard {
                    n,
                    limit: MAX_SAMPLED_RANK,
                    what: "sampled enumeration",
                });
            }
            sample_sets(n, count, seed)
        }
    };
    let mut rows: Vec<AtlasRow> = sets
        .into_par_iter()
        .map_init(Oracle::new, |oracle, chars| evaluate(n, chars, oracle))
        .collect::<Result<_, _>>()?;

    if n <= MAX_ORBIT_RANK {
        let table = OrbitTable::new(n)?;
        let cases = if n == 3 {
            published_orbits(&table)
        } else {
            HashMap::new()
        };
        for row in &mut rows {
            let canon = table.canonical_mask(chars_to_mask(&row.chars));
            row.orbit = Some(mask_to_chars(canon));
            if let Some(matched) = cases.get(&canon) {
                let k = KResult::new(row.m, row.epsilon);
                row.flags.extend(matched.iter().map(|c| c.name.to_string()));
                if matched.iter().any(|c| c.published != k) {
                    row.flags.push(DISCREPANCY_FLAG.to_string());
                }
            }
        }
    }
    rows.sort_by(|a, b| (a.n, &a.chars).cmp(&(b.n, &b.chars)));
    Ok(rows)
}

/// `count` random subsets, each character kept with probability one half.
pub fn sample_sets(n: usize, count: usize, seed: u64) -> Vec<Vec<F2Vec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (1u32..(1 << n))
                .filter(|_| rng.gen_bool(0.5))
                .map(|c| F2Vec(c as u16))
                .collect()
        })
        .collect()
}

pub fn render_table(rows: &[AtlasRow], format: Format) -> String {
    let mut rows: Vec<&AtlasRow> = rows.iter().collect();
    rows.sort_by(|a, b| (a.n, &a.chars).cmp(&(b.n, &b.chars)));
    match format {
        Format::Csv => {
            let mut out = String::from("n,S,chi,m,epsilon,orbit,flags\n");
            for r in rows {
                let orbit = r.orbit.as_deref().map_or_else(|| "-".to_string(), hex_join);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.n,
                    hex_join(&r.chars),
                    r.chi,
                    r.m,
                    r.epsilon,
                    orbit,
                    r.flags.join(";")
                )
                .unwrap();
            }
            out
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
            s.push('\n');
            s
        }
    }
}

pub fn write_table(rows: &[AtlasRow], format: Format, path: &Path) -> Result<(), AtlasError> {
    std::fs::write(path, render_table(rows, format))?;
    Ok(())
}

/// A set on which the engines disagree, the reducer fails, or its trace
/// does not replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub n: usize,
    pub chars: Vec<F2Vec>,
    pub oracle: Result<KResult, String>,
    pub reducer: Result<KResult, String>,
    pub replay: Option<String>,
}

/// Checks one set: both engines, plus a replay of the reducer's trace.
pub fn verify_set(n: usize, chars: &[F2Vec], oracle: &mut Oracle) -> Option<VerifyFailure> {
    let rep = CanonicalRep::from_set(n, chars.iter().copied())
        .expect("characters fit the rank")
        .to_multiset();
    let by_oracle = oracle.k_groups(&rep).map_err(|e| e.to_string());
    let reduced = reducer::reduce_with(&rep, ReduceOptions::default(), oracle);
    let (by_reducer, replay) = match reduced {
        Ok((k, trace)) => {
            let replay = reducer::replay_trace(&rep, &trace, oracle).err().map(|e| e.to_string());
            (Ok(k), replay)
        }
        Err(e) => (Err(e.to_string()), None),
    };
    let agree = matches!((&by_oracle, &by_reducer), (Ok(a), Ok(b)) if a == b);
    if agree && replay.is_none() {
        None
    } else {
        Some(VerifyFailure {
            n,
            chars: chars.to_vec(),
            oracle: by_oracle,
            reducer: by_reducer,
            replay,
        })
    }
}

/// [`verify_set`] over many sets in parallel; failures come back sorted.
pub fn verify_sets(n: usize, sets: Vec<Vec<F2Vec>>) -> Vec<VerifyFailure> {
    let mut failures: Vec<VerifyFailure> = sets
        .into_par_iter()
        .map_init(Oracle::new, |oracle, chars| verify_set(n, &chars, oracle))
        .flatten()
        .collect();
    failures.sort_by(|a, b| a.chars.cmp(&b.chars));
    failures
}

/// Every subset of nonzero characters at rank `n`.
pub fn all_sets(n: usize) -> Result<Vec<Vec<F2Vec>>, AtlasError> {
    if n > MAX_EXHAUSTIVE_RANK {
        return Err(AtlasError::SizeGuard {
            n,
            limit: MAX_EXHAUSTIVE_RANK,
            what: "exhaustive enumeration",
        });
    }
    Ok((0..1u64 << ((1 << n) - 1)).map(mask_to_chars).collect())
}

/// Greedily drops characters while `still_fails` holds.
pub fn shrink<F: FnMut(&[F2Vec]) -> bool>(chars: &[F2Vec], mut still_fails: F) -> Vec<F2Vec> {
    let mut current = chars.to_vec();
    let mut i = 0;
    while i < current.len() {
        let mut candidate = current.clone();
        candidate.remove(i);
        if still_fails(&candidate) {
            current = candidate;
        } else {
            i += 1;
        }
    }
    current
}

/// One of the rank-three cases evaluated by both engines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub name: &'static str,
    pub expr: &'static str,
    pub published: KResult,
    pub oracle: KResult,
    pub reducer: KResult,
    pub flags: Vec<String>,
}

pub fn published_case_report(oracle: &mut Oracle) -> Result<Vec<CaseReport>, AtlasError> {
    PUBLISHED_CASES
        .iter()
        .map(|case| {
            let rep = parse_rep(case.expr, 3).expect("case expressions parse");
            let by_oracle = oracle.k_groups(&rep)?;
            let (by_reducer, _) = reducer::reduce_with(&rep, ReduceOptions::default(), oracle)?;
            let mut flags = Vec::new();
            if by_oracle != case.published {
                flags.push(DISCREPANCY_FLAG.to_string());
            }
            Ok(CaseReport {
                name: case.name,
                expr: case.expr,
                published: case.published,
                oracle: by_oracle,
                reducer: by_reducer,
                flags,
            })
        })
        .collect()
}
