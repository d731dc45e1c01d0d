// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Edge weights derived from parity-matrix rows.
//!
//! A weight rule is a symmetric two-bit boolean function applied to every
//! column of the rows at both ends of an edge; the edge weight is the number
//! of ones it produces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{popcount, ParityMatrix};
use crate::topology::CouplingGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("the ZERO rule assigns no information and cannot drive synthesis")]
    ZeroRule,
    #[error("unknown weight rule {0:?}")]
    Unknown(String),
}

/// Symmetric two-bit boolean function, identified by its outputs on the
/// inputs `00`, `01`/`10` and `11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightRule {
    Zero,
    And,
    Xor,
    Or,
    Nor,
    Nxor,
    Nand,
    One,
}

impl WeightRule {
    /// The seven rules usable for synthesis, in table order.
    pub const USABLE: [WeightRule; 7] = [
        WeightRule::And,
        WeightRule::Xor,
        WeightRule::Or,
        WeightRule::Nor,
        WeightRule::Nxor,
        WeightRule::Nand,
        WeightRule::One,
    ];

    pub const ALL: [WeightRule; 8] = [
        WeightRule::Zero,
        WeightRule::And,
        WeightRule::Xor,
        WeightRule::Or,
        WeightRule::Nor,
        WeightRule::Nxor,
        WeightRule::Nand,
        WeightRule::One,
    ];

    /// Outputs for inputs `00`, `01`/`10`, `11`.
    pub const fn truth_table(self) -> [bool; 3] {
        match self {
            WeightRule::Zero => [false, false, false],
            WeightRule::And => [false, false, true],
            WeightRule::Xor => [false, true, false],
            WeightRule::Or => [false, true, true],
            WeightRule::Nor => [true, false, false],
            WeightRule::Nxor => [true, false, true],
            WeightRule::Nand => [true, true, false],
            WeightRule::One => [true, true, true],
        }
    }

    pub fn apply(self, x: bool, y: bool) -> bool {
        self.truth_table()[x as usize + y as usize]
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightRule::Zero => "zero",
            WeightRule::And => "and",
            WeightRule::Xor => "xor",
            WeightRule::Or => "or",
            WeightRule::Nor => "nor",
            WeightRule::Nxor => "nxor",
            WeightRule::Nand => "nand",
            WeightRule::One => "one",
        }
    }

    /// Hamming weight of the rule applied to two packed rows of `len` bits.
    fn count(self, a: &[u64], b: &[u64], len: usize) -> usize {
        let ones = |f: fn(u64, u64) -> u64| -> usize {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| f(x, y).count_ones() as usize)
                .sum()
        };
        match self {
            WeightRule::Zero => 0,
            WeightRule::And => ones(|x, y| x & y),
            WeightRule::Xor => ones(|x, y| x ^ y),
            WeightRule::Or => ones(|x, y| x | y),
            WeightRule::Nor => len - ones(|x, y| x | y),
            WeightRule::Nxor => len - ones(|x, y| x ^ y),
            WeightRule::Nand => len - ones(|x, y| x & y),
            WeightRule::One => len,
        }
    }
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightRule {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WeightRule::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| WeightError::Unknown(s.to_string()))
    }
}

/// How a synthesis run weights the coupling graph before each tree search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Weighting {
    /// Every edge weighs 1.
    Unweighted,
    Rule(WeightRule),
    /// `h(M_u xor M_v) - h(M_v)` clamped at zero, symmetrised by taking the
    /// smaller of the two orientations.
    Vandaele,
}

impl Weighting {
    pub fn label(&self) -> String {
        match self {
            Weighting::Unweighted => "unweighted".into(),
            Weighting::Rule(r) => r.name().into(),
            Weighting::Vandaele => "vandaele".into(),
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl From<Weighting> for String {
    fn from(w: Weighting) -> String {
        w.label()
    }
}

impl TryFrom<String> for Weighting {
    type Error = WeightError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for Weighting {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unweighted" => Ok(Weighting::Unweighted),
            "vandaele" => Ok(Weighting::Vandaele),
            other => other.parse().map(Weighting::Rule),
        }
    }
}

/// Weight of edge `(u, v)` under `rule`: the Hamming weight of the rule
/// applied columnwise to rows `u` and `v`. Always in `0..=n`.
pub fn edge_weight(
    m: &ParityMatrix,
    u: usize,
    v: usize,
    rule: WeightRule,
) -> Result<usize, WeightError> {
    if rule == WeightRule::Zero {
        return Err(WeightError::ZeroRule);
    }
    Ok(rule.count(m.row_words(u), m.row_words(v), m.n()))
}

/// `h(M_u xor M_v) - h(M_v)`; may be negative.
pub fn vandaele_weight(m: &ParityMatrix, u: usize, v: usize) -> i64 {
    let xor: usize = m
        .row_words(u)
        .iter()
        .zip(m.row_words(v))
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum();
    xor as i64 - popcount(m.row_words(v)) as i64
}

/// Recomputes every live edge weight of `g` from the rows of `m`.
pub fn update_all_weights(
    m: &ParityMatrix,
    g: &mut CouplingGraph,
    weighting: Weighting,
) -> Result<(), WeightError> {
    if weighting == Weighting::Rule(WeightRule::Zero) {
        return Err(WeightError::ZeroRule);
    }
    let updates: Vec<(usize, f64)> = g
        .edges()
        .map(|(id, u, v, _)| {
            let w = match weighting {
                Weighting::Unweighted => 1.0,
                Weighting::Rule(rule) => rule.count(m.row_words(u), m.row_words(v), m.n()) as f64,
                Weighting::Vandaele => {
                    let w = vandaele_weight(m, u, v).min(vandaele_weight(m, v, u));
                    w.max(0) as f64
                }
            };
            (id, w)
        })
        .collect();
    for (id, w) in updates {
        g.set_edge_weight(id, w)
            .expect("weights are finite and non-negative");
    }
    Ok(())
}
