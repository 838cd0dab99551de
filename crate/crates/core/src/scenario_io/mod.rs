//! Scenario files: network, routes (vehicle types, routes, vehicles),
//! additional (induction loops, container stops) and detector output.
//!
//! The grammar is a small XML dialect in the spirit of SUMO's input files.
//! Writers emit attributes in a fixed order and numbers in their shortest
//! round-trip form, so `parse(write(x)) == x` for every valid value.

mod additional_file;
mod detector_output;
mod generate;
mod network_file;
mod routes_file;
mod xml;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::net_model::NetError;

pub use additional_file::{parse_additional_file, write_additional_file, AdditionalFile};
pub use detector_output::{parse_detector_output, write_detector_output};
pub use generate::{generate_route_file, GenSpec};
pub use network_file::{parse_network_file, write_network_file};
pub use routes_file::{parse_routes_file, write_routes_file, RouteFile};

/// Dwell applied when a `<stop>` omits `dwell`.
pub const DEFAULT_DWELL_S: f64 = 90.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("input is not UTF-8: {0}")]
    Utf8(String),
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("<{element}>: {message}")]
    Schema { element: String, message: String },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("network has no edges")]
    NoEdges,
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown vehicle class `{0}`")]
    UnknownVClass(String),
    #[error("vehicle `{0}` has a negative depart time")]
    NegativeDepart(String),
    #[error("vehicle type `{id}`: {message}")]
    InvalidVType { id: String, message: String },
    #[error("vehicle `{0}` has a stop with negative dwell")]
    NegativeDwell(String),
    #[error("`{id}` references unknown edge `{edge}`")]
    UnknownEdge { id: String, edge: String },
    #[error("`{id}`: position {pos} outside [0, {length}] on edge `{edge}`")]
    PosOutOfRange {
        id: String,
        edge: String,
        pos: f64,
        length: f64,
    },
    #[error("container stop `{0}` needs startPos < endPos")]
    EmptyStopInterval(String),
    #[error("detector `{0}` needs freq > 0")]
    NonPositiveFreq(String),
    #[error("interval for `{id}` at {begin}: {message}")]
    InvalidInterval { id: String, begin: f64, message: String },
    #[error("intervals must be sorted by (id, begin)")]
    Unsorted,
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VehicleClass {
    TruckSingle,
    TruckDouble,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::TruckSingle => "truck_single",
            VehicleClass::TruckDouble => "truck_double",
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VehicleClass {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "truck_single" => Ok(VehicleClass::TruckSingle),
            "truck_double" => Ok(VehicleClass::TruckDouble),
            other => Err(ParseError::UnknownVClass(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTypeSpec {
    pub id: String,
    pub vclass: VehicleClass,
    pub max_speed: f64,
    /// Floor on the free-flow desired speed; lights, leaders and stops may
    /// still force the vehicle slower.
    pub min_speed: f64,
    pub accel: f64,
    pub decel: f64,
    pub length: f64,
    pub min_gap: f64,
    pub sigma: f64,
    pub emission_class: String,
}

impl VehicleTypeSpec {
    /// Single-trailer delivery truck with the shipped default parameters.
    pub fn reference_single() -> Self {
        VehicleTypeSpec {
            id: "truck_single".into(),
            vclass: VehicleClass::TruckSingle,
            max_speed: 15.0,
            min_speed: 5.0,
            accel: 1.3,
            decel: 4.0,
            length: 12.0,
            min_gap: 2.5,
            sigma: 0.0,
            emission_class: "HBEFA3/HDV_G".into(),
        }
    }

    /// Truck pulling two trailers.
    pub fn reference_double() -> Self {
        VehicleTypeSpec {
            id: "truck_double".into(),
            vclass: VehicleClass::TruckDouble,
            accel: 1.0,
            length: 18.75,
            ..Self::reference_single()
        }
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        let fail = |message: &str| {
            Err(ParseError::InvalidVType {
                id: self.id.clone(),
                message: message.to_string(),
            })
        };
        if !(self.min_speed > 0.0 && self.min_speed <= self.max_speed) {
            return fail("need 0 < minSpeed <= maxSpeed");
        }
        for (name, v) in [
            ("accel", self.accel),
            ("decel", self.decel),
            ("length", self.length),
            ("minGap", self.min_gap),
        ] {
            if !(v > 0.0) {
                return fail(&format!("{name} must be > 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return fail("sigma must lie in [0, 1]");
        }
        if self.emission_class.is_empty() {
            return fail("emissionClass must not be empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopSpec {
    pub container_stop: String,
    pub dwell: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSpec {
    pub id: String,
    pub vtype: String,
    pub route: String,
    pub depart: f64,
    pub stops: Vec<StopSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainerStopSpec {
    pub id: String,
    pub edge: String,
    pub start_pos: f64,
    pub end_pos: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    pub id: String,
    pub edge: String,
    pub pos: f64,
    pub freq: f64,
}
