#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use decarb_core::config::RunConfig;
use decarb_core::population::generate_sample;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

/// Writes a small ten-sector economy into `dir` and returns the config path.
pub fn small_config(dir: &Path, horizon: u32, seed: u64) -> PathBuf {
    fs::copy(data("io_table.csv"), dir.join("io.csv")).unwrap();
    generate_sample(&dir.join("micro.csv"), 200, 10, 7).unwrap();
    let text = format!(
        r#"{{
  "population": {{
    "microdata": "micro.csv",
    "n_households": 400,
    "n_firms": 40,
    "firm_size": {{"mean": 10.0, "sigma": 0.8}}
  }},
  "io_table": "io.csv",
  "policy": {{"green_sector": 6}},
  "technologies": [
    {{"name": "solar", "c0": 45.0, "floor": 5.0, "x0": 1.0, "learning_exponent": 0.6,
      "adoption": {{"k": 15.0, "r": 0.08, "t0": 60.0}}, "purchase_scale": 1e-9}}
  ],
  "durables": [
    {{"name": "heat_pump", "degree_k": 4, "rewire_p": 0.1,
      "params": {{"base": -4.0, "price_coeff": -1.0, "income_coeff": 0.0, "peer_coeff": 4.0, "subsidy_coeff": 1.0}},
      "weight_shift": {{"from": 3, "to": 2, "fraction": 0.7}},
      "price": 8000.0, "tech_ref": "solar", "initial_share": 0.02}}
  ],
  "horizon_quarters": {horizon},
  "seed": {seed},
  "output_dir": "out"
}}"#
    );
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path
}

pub fn load(path: &Path) -> RunConfig {
    RunConfig::load(path).unwrap()
}

pub fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, body).unwrap();
    path
}
