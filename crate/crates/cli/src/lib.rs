//! Scenario runner behind the `uqprop` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod output;
pub mod run;
pub mod scenario;

/// Bundled scenarios, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("duffing_oracle", include_str!("../scenarios/duffing_oracle.toml")),
    ("ou_linear", include_str!("../scenarios/ou_linear.toml")),
    ("kepler_desk", include_str!("../scenarios/kepler_desk.toml")),
    ("kepler_table5", include_str!("../scenarios/kepler_table5.toml")),
    ("kepler_mf_desk", include_str!("../scenarios/kepler_mf_desk.toml")),
    ("heo_mf_deterministic", include_str!("../scenarios/heo_mf_deterministic.toml")),
    ("lowthrust_bifidelity_desk", include_str!("../scenarios/lowthrust_bifidelity_desk.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
