//! Built-in scenarios: the smooth and discontinuous periodic accuracy
//! problems, three bottleneck problems, merge and crossing junctions, and a
//! traffic circle.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::junction::JunctionSpec;
use crate::network::config::{
    BoundaryConfig, InitialCondition, NetworkConfig, RoadConfig, RoadEnd, SolverConfig,
};

/// Cells per unit length in every preset.
pub const PRESET_CELLS_PER_UNIT: usize = 40;

/// Density of roads 2 and 3 (and the inflow on road 2) in the constant
/// crossing problem; its flux is 1/7.
pub const TWO_TWO_CONST_DENSITY: f64 = 0.82732683535;

/// Density on the downstream half of road 1 in the constant crossing
/// problem.
pub const TWO_TWO_CONST_RHO_10: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioPreset {
    Accuracy,
    AccuracyStep,
    Bottleneck1,
    Bottleneck2,
    Bottleneck3,
    TwoOne,
    TwoTwoConst,
    TwoTwoStep,
    TrafficCircle,
}

impl ScenarioPreset {
    pub const ALL: [ScenarioPreset; 9] = [
        ScenarioPreset::Accuracy,
        ScenarioPreset::AccuracyStep,
        ScenarioPreset::Bottleneck1,
        ScenarioPreset::Bottleneck2,
        ScenarioPreset::Bottleneck3,
        ScenarioPreset::TwoOne,
        ScenarioPreset::TwoTwoConst,
        ScenarioPreset::TwoTwoStep,
        ScenarioPreset::TrafficCircle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioPreset::Accuracy => "accuracy",
            ScenarioPreset::AccuracyStep => "accuracy-step",
            ScenarioPreset::Bottleneck1 => "bottleneck-1",
            ScenarioPreset::Bottleneck2 => "bottleneck-2",
            ScenarioPreset::Bottleneck3 => "bottleneck-3",
            ScenarioPreset::TwoOne => "two-one",
            ScenarioPreset::TwoTwoConst => "two-two-const",
            ScenarioPreset::TwoTwoStep => "two-two-step",
            ScenarioPreset::TrafficCircle => "traffic-circle",
        }
    }

    pub fn config(self) -> NetworkConfig {
        match self {
            ScenarioPreset::Accuracy => accuracy(),
            ScenarioPreset::AccuracyStep => accuracy_step(),
            ScenarioPreset::Bottleneck1 => bottleneck(
                "bottleneck with both parts near the narrow road's capacity",
                InitialCondition::Constant { value: 0.66 },
                0.66,
                0.25,
                &[0.5, 1.0, 4.0],
            ),
            ScenarioPreset::Bottleneck2 => bottleneck(
                "empty bottleneck fed above the jam threshold",
                InitialCondition::Constant { value: 0.0 },
                0.0,
                0.4,
                &[2.0, 4.0, 10.0],
            ),
            ScenarioPreset::Bottleneck3 => bottleneck(
                "bottleneck with a sinusoidal wide part",
                sine(0.4, 0.2, 5.0),
                0.66,
                0.25,
                &[0.2, 0.5, 0.7],
            ),
            ScenarioPreset::TwoOne => two_one(),
            ScenarioPreset::TwoTwoConst => two_two_const(),
            ScenarioPreset::TwoTwoStep => two_two_step(),
            ScenarioPreset::TrafficCircle => traffic_circle(),
        }
    }
}

impl fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Configuration of the preset called `name`.
pub fn build_preset(name: &str) -> Result<NetworkConfig> {
    Ok(name.parse::<ScenarioPreset>()?.config())
}

fn sine(mean: f64, amplitude: f64, frequency: f64) -> InitialCondition {
    InitialCondition::Sine {
        mean,
        amplitude,
        frequency,
    }
}

/// `a` on `[0, 0.2] ∪ [0.4, 0.6] ∪ [0.8, 1]`, `b` elsewhere.
fn steps(a: f64, b: f64) -> InitialCondition {
    InitialCondition::Piecewise {
        breaks: vec![0.2, 0.4, 0.6, 0.8],
        values: vec![a, b, a, b, a],
    }
}

fn road(id: &str, x_min: f64, x_max: f64, flux: FluxModel, initial: InitialCondition) -> RoadConfig {
    RoadConfig {
        id: id.to_string(),
        x_min,
        x_max,
        flux,
        cells: ((x_max - x_min) * PRESET_CELLS_PER_UNIT as f64).round() as usize,
        degree: None,
        initial,
    }
}

fn unit_road(id: &str, initial: InitialCondition) -> RoadConfig {
    road(id, 0.0, 1.0, FluxModel::unit(), initial)
}

fn inflow(road: &str, density: f64) -> BoundaryConfig {
    BoundaryConfig::Inflow {
        road: road.to_string(),
        end: RoadEnd::Left,
        density,
    }
}

fn outflow(road: &str) -> BoundaryConfig {
    BoundaryConfig::Outflow {
        road: road.to_string(),
        end: RoadEnd::Right,
    }
}

fn junction(incoming: &[&str], outgoing: &[&str]) -> JunctionSpec {
    JunctionSpec {
        incoming: incoming.iter().map(|s| s.to_string()).collect(),
        outgoing: outgoing.iter().map(|s| s.to_string()).collect(),
        alpha: None,
        beta: None,
        q: None,
    }
}

fn solver(output_times: &[f64]) -> SolverConfig {
    let t_end = output_times.iter().copied().fold(0.0, f64::max);
    SolverConfig {
        output_times: output_times.to_vec(),
        ..SolverConfig::new(t_end)
    }
}

fn periodic(description: &str, initial: InitialCondition, tvb: bool) -> NetworkConfig {
    NetworkConfig {
        description: Some(description.to_string()),
        roads: vec![unit_road("1", initial)],
        junctions: vec![],
        boundaries: vec![BoundaryConfig::Periodic { road: "1".into() }],
        solver: SolverConfig {
            tvb,
            ..solver(&[0.1])
        },
    }
}

fn accuracy() -> NetworkConfig {
    periodic(
        "smooth periodic data 0.5 + 0.5 sin(2 pi x) before shock formation",
        sine(0.5, 0.5, 2.0),
        false,
    )
}

fn accuracy_step() -> NetworkConfig {
    periodic(
        "periodic step data, 1 on [0, 0.3] and [0.6, 1], 0 elsewhere",
        InitialCondition::Piecewise {
            breaks: vec![0.3, 0.6],
            values: vec![1.0, 0.0, 1.0],
        },
        true,
    )
}

fn bottleneck(
    description: &str,
    initial_wide: InitialCondition,
    rho_narrow: f64,
    inflow_density: f64,
    output_times: &[f64],
) -> NetworkConfig {
    NetworkConfig {
        description: Some(description.to_string()),
        roads: vec![
            road("1", 0.0, 1.0, FluxModel::unit(), initial_wide),
            road(
                "2",
                1.0,
                2.0,
                FluxModel::BottleneckNarrow,
                InitialCondition::Constant { value: rho_narrow },
            ),
        ],
        junctions: vec![junction(&["1"], &["2"])],
        boundaries: vec![inflow("1", inflow_density), outflow("2")],
        solver: solver(output_times),
    }
}

fn two_one() -> NetworkConfig {
    NetworkConfig {
        description: Some("two incoming roads merging into one".into()),
        roads: vec![
            unit_road("1", steps(0.1, 0.2)),
            unit_road("2", sine(0.1, 0.05, 5.0)),
            unit_road("3", InitialCondition::Constant { value: 0.1 }),
        ],
        junctions: vec![JunctionSpec {
            q: Some(0.5),
            ..junction(&["1", "2"], &["3"])
        }],
        boundaries: vec![inflow("1", 0.1), inflow("2", 0.1), outflow("3")],
        solver: solver(&[0.25, 0.5, 1.0]),
    }
}

fn crossing(description: &str, roads: Vec<RoadConfig>, inflows: [f64; 2], output_times: &[f64]) -> NetworkConfig {
    NetworkConfig {
        description: Some(description.to_string()),
        roads,
        junctions: vec![JunctionSpec {
            alpha: Some(0.4),
            beta: Some(0.3),
            ..junction(&["1", "2"], &["3", "4"])
        }],
        boundaries: vec![
            inflow("1", inflows[0]),
            inflow("2", inflows[1]),
            outflow("3"),
            outflow("4"),
        ],
        solver: solver(output_times),
    }
}

fn two_two_const() -> NetworkConfig {
    let c = InitialCondition::Constant {
        value: TWO_TWO_CONST_DENSITY,
    };
    crossing(
        "crossing with congested constant data on roads 2 and 3",
        vec![
            unit_road(
                "1",
                InitialCondition::Piecewise {
                    breaks: vec![0.5],
                    values: vec![0.4, TWO_TWO_CONST_RHO_10],
                },
            ),
            unit_road("2", c.clone()),
            unit_road("3", c),
            unit_road("4", InitialCondition::Constant { value: 0.5 }),
        ],
        [0.4, TWO_TWO_CONST_DENSITY],
        &[25.0, 470.0],
    )
}

fn two_two_step() -> NetworkConfig {
    crossing(
        "crossing with step data on road 1",
        vec![
            unit_road("1", steps(0.2, 0.4)),
            unit_road("2", sine(0.2, 0.1, 5.0)),
            unit_road("3", InitialCondition::Constant { value: 0.5 }),
            unit_road("4", InitialCondition::Constant { value: 0.5 }),
        ],
        [0.2, 0.2],
        &[0.25, 0.5],
    )
}

fn traffic_circle() -> NetworkConfig {
    let half = || InitialCondition::Constant { value: 0.5 };
    NetworkConfig {
        description: Some("traffic circle with four ring roads, two entries and two exits".into()),
        roads: vec![
            unit_road("1", steps(0.25, 0.35)),
            unit_road("2", sine(0.2, 0.2, 5.0)),
            unit_road("3", half()),
            unit_road("4", half()),
            unit_road("1R", half()),
            unit_road("2R", half()),
            unit_road("3R", half()),
            unit_road("4R", half()),
        ],
        junctions: vec![
            JunctionSpec {
                q: Some(0.25),
                ..junction(&["1", "4R"], &["1R"])
            },
            JunctionSpec {
                alpha: Some(0.5),
                ..junction(&["1R"], &["2R", "3"])
            },
            JunctionSpec {
                q: Some(0.25),
                ..junction(&["2", "2R"], &["3R"])
            },
            JunctionSpec {
                alpha: Some(0.5),
                ..junction(&["3R"], &["4R", "4"])
            },
        ],
        boundaries: vec![inflow("1", 0.25), inflow("2", 0.4), outflow("3"), outflow("4")],
        solver: solver(&[0.5, 1.0]),
    }
}
