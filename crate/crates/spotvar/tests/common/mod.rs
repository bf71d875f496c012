#![allow(dead_code)]

use std::path::Path;

use spotvar::PipelineConfig;

pub const HESTON: &str = r#"
[source]
kind = "simulation"

[model]
kind = "heston"
kappa = 2.0
theta = 0.04
sigma = 0.3
rho = -0.7
v0 = 0.04
"#;

pub const BATES: &str = r#"
[source]
kind = "simulation"

[model]
kind = "bates"
kappa = 2.0
theta = 0.04
sigma = 0.3
rho = -0.7
v0 = 0.04
lambda = 10.0
jumps = { mean = -0.01, sd = 0.04 }
"#;

/// Parses `toml` and points the output at `out`.
pub fn config(toml: &str, days: usize, seed: u64, out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::from_toml(toml).unwrap();
    c.simulation.days = days;
    c.simulation.seed = seed;
    c.output.dir = out.to_path_buf();
    c.validate().unwrap();
    c
}

pub fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}
