//! The bundled reference scenario: a small network modelled on the
//! delivery area between a motorway exit and two supermarkets, with one
//! signalized junction, a surrogate heavy-duty emission table and a
//! matching scenario config.

use std::path::Path;

use crate::compare::{CompareError, ScenarioConfig, ScenarioSetup};

pub const NETWORK: &str = include_str!("../data/linz_reference.net.xml");
pub const NETWORK_60KMH: &str = include_str!("../data/linz_reference_60kmh.net.xml");
pub const ADDITIONAL: &str = include_str!("../data/linz_reference.add.xml");
pub const VTYPES: &str = include_str!("../data/trucks.rou.xml");
pub const EMISSIONS: &str = include_str!("../data/hbefa3_surrogate.emissions");
pub const SCENARIO: &str = include_str!("../data/reference_scenario.toml");

/// Directory holding the reference data files.
pub fn data_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data"))
}

pub fn config() -> ScenarioConfig {
    toml::from_str(SCENARIO).expect("bundled scenario config parses")
}

/// The reference setup, loaded from the bundled data directory.
pub fn setup() -> Result<ScenarioSetup, CompareError> {
    ScenarioSetup::from_config(&config(), data_dir())
}
