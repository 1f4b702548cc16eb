//! Power-manipulation attacks: optimal and fixed scaling strategies and the
//! resulting missed-detection probabilities.

pub mod dncf;
pub mod mdp;
pub mod quadform;
pub mod strategy;

pub use dncf::dncf_cdf;
pub use mdp::{
    covariance_ratio, mc_mdp_fixed_strategies, mc_mdp_optimal_pma, mdp_fixed_strategy, mdp_fixed_strategy_with,
    mdp_optimal_pma, mdp_optimal_pma_robust, mdp_optimal_pma_saddlepoint, mdp_optimal_pma_with,
    mdp_single_array_closed_form, MdpSource, MdpValue,
};
pub use quadform::{
    build_fixed_strategy_form, build_indefinite_form, saddlepoint_tail_probability, tail_probability, upper_tail,
    IndefiniteForm, TailMethod,
};
pub use strategy::{d_min, optimal_power_strategy, statistical_power_strategy, wrap_phase, PowerStrategy};
