//! Two-stage truss layout design: tree search for valid topologies, then
//! reinforcement-learning refinement of node positions and cross-sections.

pub mod catalog;
pub mod checkpoint;
pub mod cli;
pub mod diverse;
pub mod document;
pub mod error;
pub mod fea;
pub mod model;
pub mod refine;
pub mod render;
pub mod report;
pub mod search;
pub mod testbeds;
pub mod validity;

pub use catalog::SectionCatalog;
pub use diverse::DiverseSet;
pub use checkpoint::Checkpoint;
pub use error::{CaseError, CatalogError, CheckpointError, LayoutError, RefineError};
pub use fea::{assemble_and_solve, AnalysisResult, MaterialSpec};
pub use model::{mass, section_area, Bar, CrossSection, Dim, NodeSpec, TopologyKey, TrussLayout, Vec3};
pub use refine::{run_refinement, RefineParams};
pub use search::{run_search, Search, SearchParams};
pub use testbeds::{load_case, CaseConfig};
pub use validity::{check, evaluate, Classification, Constraint, ValidityReport};
