//! Certificates of a reduction run and their two serializations.
//!
//! Text form, one record per line:
//!
//! ```text
//! trace n=3 sign=+1 S=1,2,4,7
//! toggle 1 2 4 chk=2
//! basechange 1 6 4 chk=2
//! rebuild 1 2 4
//! split 0,1 2
//! base 0 hard-triangle m=0 eps=1
//! result m=1 eps=0
//! ```
//!
//! Vectors are lowercase hex; `chk=` is an optional signed checkpoint.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{build_hypergraph, combine, signed_chi, Component, Move, Pattern};
use crate::gf2::{parse_hex, F2Matrix, F2Vec};
use crate::oracle::KResult;
use crate::rep::{canonicalize, CanonicalRep, RepMultiset, Sign};
use crate::Oracle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub mv: Move,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub initial: CanonicalRep,
    pub steps: Vec<Step>,
    pub result: KResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("trace starts from {trace:?}, but the representation canonicalizes to {rep:?}")]
    InitialMismatch { rep: CanonicalRep, trace: CanonicalRep },
    #[error("move {index}: {reason}")]
    InvalidMove { index: usize, reason: String },
    #[error("move {index}: checkpoint records {expected}, state evaluates to {got}")]
    CheckpointMismatch { index: usize, expected: i64, got: i64 },
    #[error("trace claims {claimed:?}, replay yields {replayed:?}")]
    ResultMismatch { claimed: KResult, replayed: KResult },
    #[error("trace ends before every component is evaluated")]
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct TraceParseError {
    pub line: usize,
    pub reason: String,
}

/// Re-applies every move with its preconditions re-checked, verifies the
/// recorded checkpoints with a fresh oracle evaluation, and recombines the
/// base cases.
pub fn replay_trace(rep: &RepMultiset, trace: &Trace, oracle: &mut Oracle) -> Result<KResult, ReplayError> {
    let initial = canonicalize(rep);
    if initial != trace.initial {
        return Err(ReplayError::InitialMismatch {
            rep: initial,
            trace: trace.initial.clone(),
        });
    }
    let mut h = build_hypergraph(&initial);
    let mut parts: Option<Vec<Vec<usize>>> = None;
    let mut locals: Vec<Option<KResult>> = Vec::new();
    let invalid = |index: usize, reason: String| ReplayError::InvalidMove { index, reason };

    for (index, step) in trace.steps.iter().enumerate() {
        match &step.mv {
            Move::SpinToggle { .. } | Move::BaseChange { .. } | Move::Rebuild { .. } => {
                if parts.is_some() {
                    return Err(invalid(index, "state change after the split".into()));
                }
                h.apply(&step.mv).map_err(|r| invalid(index, r))?;
            }
            Move::KunnethSplit { parts: p } => {
                if parts.is_some() {
                    return Err(invalid(index, "second split".into()));
                }
                validate_split(&h.sets, h.rank(), p).map_err(|r| invalid(index, r))?;
                locals = vec![None; p.len()];
                parts = Some(p.clone());
            }
            Move::BaseCase {
                component,
                pattern,
                local,
            } => {
                let Some(p) = parts.as_ref() else {
                    return Err(invalid(index, "base case before the split".into()));
                };
                let Some(verts) = p.get(*component) else {
                    return Err(invalid(index, format!("no component {component}")));
                };
                if locals[*component].is_some() {
                    return Err(invalid(index, format!("component {component} evaluated twice")));
                }
                let mask = verts.iter().fold(0u32, |acc, v| acc | (1 << v));
                let sets: Vec<u32> = h.sets.iter().copied().filter(|m| m & mask != 0).collect();
                let comp = Component::from_global(mask, &sets);
                match Pattern::classify(comp.rank(), &comp.sets) {
                    Some(found) if found == *pattern => {}
                    Some(found) => {
                        return Err(invalid(
                            index,
                            format!("component {component} is {found}, not {pattern}"),
                        ))
                    }
                    None => return Err(invalid(index, format!("component {component} matches no base case"))),
                }
                if *local != pattern.value() {
                    return Err(invalid(index, format!("{pattern} has value {:?}", pattern.value())));
                }
                locals[*component] = Some(*local);
            }
        }
        if let Some(expected) = step.checkpoint {
            let got = signed_chi(oracle, &h).map_err(|e| invalid(index, e.to_string()))?;
            if got != expected {
                return Err(ReplayError::CheckpointMismatch { index, expected, got });
            }
        }
    }

    let Some(p) = parts else {
        return Err(ReplayError::Incomplete);
    };
    let locals: Vec<KResult> = locals
        .into_iter()
        .collect::<Option<_>>()
        .ok_or(ReplayError::Incomplete)?;
    let used: usize = p.iter().map(Vec::len).sum();
    let replayed = combine(h.sign, h.ambient_n - used, &locals);
    if replayed != trace.result {
        return Err(ReplayError::ResultMismatch {
            claimed: trace.result,
            replayed,
        });
    }
    Ok(replayed)
}

fn validate_split(sets: &BTreeSet<u32>, rank: usize, parts: &[Vec<usize>]) -> Result<(), String> {
    let mut seen = 0u32;
    let mut masks = Vec::with_capacity(parts.len());
    for part in parts {
        if part.is_empty() {
            return Err("empty part".into());
        }
        let mut mask = 0u32;
        for &v in part {
            if v >= rank {
                return Err(format!("vertex {v} out of range"));
            }
            if (seen >> v) & 1 == 1 {
                return Err(format!("vertex {v} in two parts"));
            }
            seen |= 1 << v;
            mask |= 1 << v;
        }
        masks.push(mask);
    }
    for s in sets {
        if !masks.iter().any(|m| s & !m == 0) {
            return Err(format!("set {s:#b} straddles the split"));
        }
    }
    Ok(())
}

fn hex_list(v: &[F2Vec]) -> String {
    v.iter().map(|x| format!("{x:x}")).collect::<Vec<_>>().join(",")
}

impl Trace {
    pub fn toggle_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.mv, Move::SpinToggle { .. }))
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<Trace, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let chars: Vec<F2Vec> = self.initial.chars_vec();
        writeln!(
            out,
            "trace n={} sign={:+} S={}",
            self.initial.n,
            self.initial.sign.as_i64(),
            hex_list(&chars)
        )
        .unwrap();
        for step in &self.steps {
            let line = match &step.mv {
                Move::SpinToggle { a, b, c } => format!("toggle {a:x} {b:x} {c:x}"),
                Move::BaseChange { matrix } => {
                    let rows: Vec<String> = matrix.rows.iter().map(|r| format!("{r:x}")).collect();
                    format!("basechange {}", rows.join(" ")).trim_end().to_string()
                }
                Move::Rebuild { basis } => {
                    let b: Vec<String> = basis.iter().map(|r| format!("{r:x}")).collect();
                    format!("rebuild {}", b.join(" ")).trim_end().to_string()
                }
                Move::KunnethSplit { parts } => {
                    let p: Vec<String> = parts
                        .iter()
                        .map(|part| part.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                        .collect();
                    format!("split {}", p.join(" ")).trim_end().to_string()
                }
                Move::BaseCase {
                    component,
                    pattern,
                    local,
                } => format!("base {component} {pattern} m={} eps={}", local.m, local.epsilon),
            };
            out.push_str(&line);
            if let Some(c) = step.checkpoint {
                write!(out, " chk={c}").unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "result m={} eps={}", self.result.m, self.result.epsilon).unwrap();
        out
    }

    pub fn from_text(s: &str) -> Result<Trace, TraceParseError> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, reason: &str| TraceParseError {
            line,
            reason: reason.to_string(),
        };
        let (ln, header) = lines.next().ok_or_else(|| err(1, "empty trace"))?;
        let initial = parse_header(header).map_err(|r| err(ln, &r))?;
        let mut steps = Vec::new();
        let mut result = None;
        for (ln, line) in lines {
            if result.is_some() {
                return Err(err(ln, "content after the result line"));
            }
            let mut words: Vec<&str> = line.split_whitespace().collect();
            let kind = words.remove(0);
            if kind == "result" {
                result = Some(parse_result(&words).map_err(|r| err(ln, &r))?);
                continue;
            }
            let checkpoint = match words.last().and_then(|w| w.strip_prefix("chk=")) {
                Some(v) => {
                    let c = v.parse::<i64>().map_err(|e| err(ln, &e.to_string()))?;
                    words.pop();
                    Some(c)
                }
                None => None,
            };
            let mv = parse_move(kind, &words).map_err(|r| err(ln, &r))?;
            steps.push(Step { mv, checkpoint });
        }
        let result = result.ok_or_else(|| err(s.lines().count(), "missing result line"))?;
        Ok(Trace { initial, steps, result })
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn field<'a>(word: &'a str, key: &str) -> Result<&'a str, String> {
    word.strip_prefix(key)
        .and_then(|w| w.strip_prefix('='))
        .ok_or_else(|| format!("expected {key}=..., found {word:?}"))
}

fn parse_header(line: &str) -> Result<CanonicalRep, String> {
    let words: Vec<&str> = line.split_whitespace().collect();
    if words.len() != 4 || words[0] != "trace" {
        return Err("header must read `trace n=.. sign=.. S=..`".into());
    }
    let n: usize = field(words[1], "n")?.parse().map_err(|e| format!("{e}"))?;
    let sign = match field(words[2], "sign")? {
        "+1" | "1" => Sign::Plus,
        "-1" => Sign::Minus,
        other => return Err(format!("bad sign {other:?}")),
    };
    let list = field(words[3], "S")?;
    let chars = if list.is_empty() {
        BTreeSet::new()
    } else {
        list.split(',').map(parse_hex).collect::<Result<BTreeSet<_>, _>>()?
    };
    CanonicalRep::new(n, chars, sign).map_err(|e| e.to_string())
}

fn parse_result(words: &[&str]) -> Result<KResult, String> {
    if words.len() != 2 {
        return Err("result must read `result m=.. eps=..`".into());
    }
    let m = field(words[0], "m")?.parse().map_err(|e| format!("{e}"))?;
    let eps: u8 = field(words[1], "eps")?.parse().map_err(|e| format!("{e}"))?;
    if eps > 1 {
        return Err("eps must be 0 or 1".into());
    }
    Ok(KResult::new(m, eps))
}

fn parse_move(kind: &str, words: &[&str]) -> Result<Move, String> {
    let hexes = |ws: &[&str]| ws.iter().map(|w| parse_hex(w)).collect::<Result<Vec<_>, _>>();
    match kind {
        "toggle" => match hexes(words)?.as_slice() {
            &[a, b, c] => Ok(Move::SpinToggle { a, b, c }),
            _ => Err("toggle takes three vectors".into()),
        },
        "basechange" => {
            let rows = hexes(words)?;
            Ok(Move::BaseChange {
                matrix: F2Matrix { n: rows.len(), rows },
            })
        }
        "rebuild" => Ok(Move::Rebuild { basis: hexes(words)? }),
        "split" => {
            let parts = words
                .iter()
                .map(|w| {
                    w.split(',')
                        .map(|i| i.parse::<usize>().map_err(|e| format!("{e}")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Move::KunnethSplit { parts })
        }
        "base" => {
            if words.len() != 4 {
                return Err("base takes a component, a pattern, m= and eps=".into());
            }
            let component = words[0].parse().map_err(|e| format!("{e}"))?;
            let pattern = Pattern::from_name(words[1]).ok_or_else(|| format!("unknown pattern {:?}", words[1]))?;
            let local = parse_result(&words[2..])?;
            Ok(Move::BaseCase {
                component,
                pattern,
                local,
            })
        }
        other => Err(format!("unknown move {other:?}")),
    }
}
