//! Built-in experiment configurations, one per reproduced figure or table.

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// (name, description, TOML source)
pub const PRESETS: [(&str, &str, &str); 7] = [
    ("fig3", "Gibbs variants and superconstellation vs SNR, L=5", include_str!("../presets/fig3.toml")),
    ("fig4", "channel length mismatch, L=3 with L̂ in {1,3,5}", include_str!("../presets/fig4.toml")),
    ("fig5", "four-format pool vs SNR, L=3", include_str!("../presets/fig5.toml")),
    ("fig6", "Gibbs vs hybrid Gibbs/mean-field vs M, K=1, L=2, 10 dB", include_str!("../presets/fig6.toml")),
    ("fig7_mr1", "one receive antenna, L=5", include_str!("../presets/fig7_mr1.toml")),
    ("table2", "three-format confusion matrix at 5 dB", include_str!("../presets/table2.toml")),
    ("table3", "four-format confusion matrix at 5 dB", include_str!("../presets/table3.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, _, src) = PRESETS
        .iter()
        .find(|p| p.0 == name)
        .ok_or_else(|| HarnessError::Config(format!("unknown preset '{name}' (try `modclass presets`)")))?;
    ExperimentConfig::from_toml_str(src).map_err(|e| e.with_context(format!("preset {name}")))
}
