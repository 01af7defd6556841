//! Constructive pipelines: parameter synthesis on the line, the pair and its certificate, the
//! thinned variant and the assemblies in `ℝ^d`.

pub mod params;

pub use params::{choose_parameters, eps_candidates, raw_choice, CheckKind, ConstraintCheck, Lemma51Params, RawChoice};
pub mod pair;

pub use pair::{delta_out, thin_grid, thin_variant, Pair1D, ThinPair};
pub mod assembly;
pub use assembly::{assemble_theorem1, assemble_theorem2, coordinate_raw, replay_plane, Assembly, AssemblyConfig, GroupPart, PlaneGroup, ProductCertificate, SpotReport};
pub mod stability;
pub use stability::{intersection_witness, perturbation_trial, stability, StabilityReport, Witness};
