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

//! Synthesis of CNOT-only (linear reversible) circuits for devices with
//! restricted qubit connectivity, using Steiner trees whose edge weights are
//! derived from the parity matrix being reduced.
//!
//! The crate is split into:
//!
//! * [`gf2`]: packed parity matrices and GF(2) helpers.
//! * [`topology`]: coupling graphs, generators, cut vertices, Steiner trees.
//! * [`weighting`]: edge-weight rules computed from matrix rows.
//! * [`synthesis`]: RowCol, SteinerGauss and PMH, plus circuit utilities.
//! * [`bench`]: cost estimation, rule ranking and the experiment harness.
//! * [`cli`]: the `steiner-cnot` command line.

pub mod bench;
pub mod cli;
pub mod gf2;
pub mod synthesis;
pub mod topology;
pub mod weighting;

pub use gf2::{hamming_distance, hamming_weight, BitRow, Gf2Error, ParityMatrix};
pub use synthesis::{
    pmh, rowcol, steiner_gauss, synthesize, Algorithm, CnotCircuit, EmitFormat, SynthError,
    SynthesisOptions,
};
pub use topology::{CouplingGraph, SteinerTree, Topology, TopologyError};
pub use weighting::{edge_weight, update_all_weights, vandaele_weight, WeightRule, Weighting};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide RNG: ChaCha8, identical streams on every platform.
pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for cell `index` of a run seeded with `seed`.
pub fn cell_rng(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
