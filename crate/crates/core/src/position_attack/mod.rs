//! Attacker-position optimization.

pub mod lobes;
pub mod objective;
pub mod search;

pub use lobes::{lobe_sets, ArrayLobes, LobeSets, OmegaInterval};
pub use objective::{angular_inner_product, f_obj, AttackGeometry, EveTerm};
pub use search::{
    exhaustive_search, is_allowed, pmd_at, pmd_map, scenario_authenticator, truncated_search, CandidatePosition,
    ExhaustiveObjective, Grid, PmdMap, SearchReport,
};
