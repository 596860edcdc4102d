//! Inputs shared by the benchmarks.

use std::path::Path;

use nbaudit_core::nbmodel::{parse_notebook, Notebook};
use nbaudit_core::synth;

/// Raw JSON bytes of `n` synthetic notebooks.
pub fn raw_corpus(n: usize, seed: u64) -> Vec<(String, Vec<u8>)> {
    synth::generate(n, seed)
        .into_iter()
        .map(|nb| (nb.file, nb.json.to_string().into_bytes()))
        .collect()
}

pub fn parsed_corpus(n: usize, seed: u64) -> Vec<Notebook> {
    raw_corpus(n, seed)
        .into_iter()
        .map(|(name, raw)| parse_notebook(&raw, Path::new(&name)).expect("synthetic notebooks are valid"))
        .collect()
}

/// The first embedded PNG found in the corpus.
pub fn sample_png(seed: u64) -> Vec<u8> {
    parsed_corpus(32, seed)
        .iter()
        .flat_map(nbaudit_core::nbmodel::extract_images)
        .map(|i| i.bytes)
        .find(|b| b.starts_with(b"\x89PNG"))
        .expect("corpus contains a PNG")
}
