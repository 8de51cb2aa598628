//! JSON checkpoints written between and after the two stages.
//!
//! Everything in a checkpoint is a function of the inputs and seed, so identical runs
//! produce byte-identical files. Timing lives in the run manifest instead.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diverse::{DiverseDocument, DiverseSet};
use crate::error::CheckpointError;
use crate::refine::{AgentWeights, ReplaySummary};

pub const FORMAT_VERSION: u32 = 1;

/// Where each random stream stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngDescriptor {
    pub algorithm: String,
    pub seed: u64,
    /// ChaCha word position of each stream, as decimal strings.
    pub word_positions: Vec<String>,
}

impl RngDescriptor {
    pub fn chacha8(seed: u64, words: impl IntoIterator<Item = u128>) -> Self {
        Self {
            algorithm: "chacha8".into(),
            seed,
            word_positions: words.into_iter().map(|w| w.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    /// Bundled case name or case-file path.
    pub case: String,
    pub max_nodes: usize,
    pub seed: u64,
    pub jobs: usize,
    pub kappa: f64,
    pub search_iterations: u64,
    pub rl_steps: u64,
    pub rng: RngDescriptor,
    pub diverse: DiverseDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplaySummary>,
}

impl Checkpoint {
    pub fn diverse_set(&self) -> Result<DiverseSet, CheckpointError> {
        Ok(DiverseSet::from_document(&self.diverse)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoints always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let cp: Self = serde_json::from_str(text)?;
        if cp.format != FORMAT_VERSION {
            return Err(CheckpointError::Format(cp.format));
        }
        Ok(cp)
    }

    pub fn read(path: &Path) -> Result<Self, CheckpointError> {
        let text = std::fs::read_to_string(path).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CheckpointError> {
        write_text(path, &(self.to_json() + "\n"))
    }
}

/// Writes `text`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), CheckpointError> {
    let io = |source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{run_search, SearchParams};
    use crate::testbeds::load_case;

    fn searched(seed: u64) -> Checkpoint {
        let case = load_case("ten-bar-load1", None).unwrap();
        let out = run_search(&case, SearchParams::default(), 300, seed, 1);
        Checkpoint {
            format: FORMAT_VERSION,
            case: case.name.clone(),
            max_nodes: case.max_nodes,
            seed,
            jobs: 1,
            kappa: out.kappa,
            search_iterations: out.iterations,
            rl_steps: 0,
            rng: RngDescriptor::chacha8(seed, out.rng_words),
            diverse: out.diverse.to_document(),
            agent: None,
            replay: None,
        }
    }

    #[test]
    fn round_trips_and_repeats_byte_for_byte() {
        let a = searched(7);
        assert_eq!(a.to_json(), searched(7).to_json());
        let back = Checkpoint::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.diverse_set().unwrap().to_document(), a.diverse);
        assert!(!a.to_json().contains("agent"));
    }

    #[test]
    fn rejects_other_formats() {
        let mut cp = searched(1);
        cp.format = 99;
        assert!(matches!(Checkpoint::from_json(&cp.to_json()), Err(CheckpointError::Format(99))));
        assert!(matches!(Checkpoint::from_json("{"), Err(CheckpointError::Json(_))));
    }

    #[test]
    fn write_creates_directories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/search.json");
        let cp = searched(2);
        cp.write(&path).unwrap();
        assert_eq!(Checkpoint::read(&path).unwrap(), cp);
        assert!(matches!(Checkpoint::read(&dir.path().join("missing.json")), Err(CheckpointError::Io { .. })));
    }
}
