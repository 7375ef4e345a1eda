//! Network configuration: the JSON-facing description of roads, junctions,
//! open boundaries and solver settings.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dg::MAX_DEGREE;
use crate::error::{Error, Result};
use crate::flux::{FluxModel, FundamentalDiagram, NumericalFlux};
use crate::junction::{JunctionRule, JunctionSpec};

/// CFL numbers for degrees 0 to 3.
pub const DEFAULT_CFL: [f64; 4] = [1.0, 0.33, 0.20, 0.14];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub roads: Vec<RoadConfig>,
    #[serde(default)]
    pub junctions: Vec<JunctionSpec>,
    #[serde(default)]
    pub boundaries: Vec<BoundaryConfig>,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadConfig {
    pub id: String,
    pub x_min: f64,
    pub x_max: f64,
    pub flux: FluxModel,
    pub cells: usize,
    /// Overrides `solver.degree` for this road.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub initial: InitialCondition,
}

/// Initial density along a road, in the road's own coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant { value: f64 },
    /// `mean + amplitude · sin(frequency · π · x)`.
    Sine {
        mean: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `values[i]` on the `i`-th interval cut by the ascending `breaks`.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Constant { value } => *value,
            InitialCondition::Sine {
                mean,
                amplitude,
                frequency,
            } => mean + amplitude * (frequency * std::f64::consts::PI * x).sin(),
            InitialCondition::Piecewise { breaks, values } => {
                values[breaks.partition_point(|&b| b <= x)]
            }
        }
    }

    /// Bounds of the density over the road, used for validation.
    fn range(&self) -> (f64, f64) {
        match self {
            InitialCondition::Constant { value } => (*value, *value),
            InitialCondition::Sine {
                mean, amplitude, ..
            } => (mean - amplitude.abs(), mean + amplitude.abs()),
            InitialCondition::Piecewise { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
        }
    }

    fn validate(&self, key: &str, rho_max: f64) -> Result<()> {
        if let InitialCondition::Piecewise { breaks, values } = self {
            if values.len() != breaks.len() + 1 {
                return Err(Error::config(
                    format!("{key}.values"),
                    format!(
                        "{} breaks need {} values, got {}",
                        breaks.len(),
                        breaks.len() + 1,
                        values.len()
                    ),
                ));
            }
            if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks.iter().any(|b| !b.is_finite())
            {
                return Err(Error::config(
                    format!("{key}.breaks"),
                    "breaks must be finite and strictly increasing",
                ));
            }
        }
        let (lo, hi) = self.range();
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi <= rho_max) {
            return Err(Error::config(
                key,
                format!("initial density range [{lo}, {hi}] leaves [0, {rho_max}]"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoadEnd {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryConfig {
    /// Ghost density `density` outside the road end.
    Inflow {
        road: String,
        end: RoadEnd,
        density: f64,
    },
    /// Zero-order extrapolation of the interior trace.
    Outflow { road: String, end: RoadEnd },
    /// Joins both ends of a single road.
    Periodic { road: String },
}

fn default_degree() -> usize {
    1
}

fn default_cfl() -> [f64; 4] {
    DEFAULT_CFL
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_cfl")]
    pub cfl: [f64; 4],
    #[serde(default, rename = "tvb_M")]
    pub tvb_m: f64,
    #[serde(default = "yes")]
    pub tvb: bool,
    #[serde(default = "yes")]
    pub bp: bool,
    #[serde(default)]
    pub flux: NumericalFlux,
    pub t_end: f64,
    #[serde(default)]
    pub output_times: Vec<f64>,
}

impl SolverConfig {
    pub fn new(t_end: f64) -> Self {
        SolverConfig {
            degree: default_degree(),
            cfl: DEFAULT_CFL,
            tvb_m: 0.0,
            tvb: true,
            bp: true,
            flux: NumericalFlux::default(),
            t_end,
            output_times: Vec::new(),
        }
    }
}

/// Where one end of a road gets its numerical flux from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndKind {
    /// Slot `slot` of the incoming or outgoing list of junction `junction`.
    Junction { junction: usize, slot: usize },
    Inflow { density: f64 },
    Outflow,
    Periodic,
}

/// A junction with road ids resolved to indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedJunction {
    pub rule: JunctionRule,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
}

/// Output of [`NetworkConfig::resolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedTopology {
    pub ends: Vec<[EndKind; 2]>,
    pub junctions: Vec<ResolvedJunction>,
    pub degrees: Vec<usize>,
}

impl NetworkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn road_index(&self, id: &str) -> Option<usize> {
        self.roads.iter().position(|r| r.id == id)
    }

    /// Sets the polynomial degree of every road.
    pub fn set_degree(&mut self, degree: usize) {
        self.solver.degree = degree;
        for r in &mut self.roads {
            r.degree = None;
        }
    }

    /// Resizes every road to `cells_per_unit` cells per unit length.
    pub fn set_cells_per_unit(&mut self, cells_per_unit: usize) {
        for r in &mut self.roads {
            r.cells = ((r.x_max - r.x_min) * cells_per_unit as f64).round().max(1.0) as usize;
        }
    }

    /// Checks the configuration and resolves road references.
    pub fn resolve(&self) -> Result<ResolvedTopology> {
        let s = &self.solver;
        if s.degree > MAX_DEGREE {
            return Err(Error::config(
                "solver.degree",
                format!("must be in 0..={MAX_DEGREE}, got {}", s.degree),
            ));
        }
        for (i, c) in s.cfl.iter().enumerate() {
            if !(c.is_finite() && *c > 0.0) {
                return Err(Error::config(
                    format!("solver.cfl[{i}]"),
                    format!("must be positive, got {c}"),
                ));
            }
        }
        if !(s.tvb_m.is_finite() && s.tvb_m >= 0.0) {
            return Err(Error::config("solver.tvb_M", format!("must be >= 0, got {}", s.tvb_m)));
        }
        if !(s.t_end.is_finite() && s.t_end > 0.0) {
            return Err(Error::config("solver.t_end", format!("must be positive, got {}", s.t_end)));
        }
        for (i, t) in s.output_times.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0 && *t <= s.t_end) {
                return Err(Error::config(
                    format!("solver.output_times[{i}]"),
                    format!("{t} outside [0, t_end = {}]", s.t_end),
                ));
            }
        }
        if self.roads.is_empty() {
            return Err(Error::config("roads", "network has no roads"));
        }

        let mut index = HashMap::new();
        let mut degrees = Vec::with_capacity(self.roads.len());
        for (i, r) in self.roads.iter().enumerate() {
            let key = format!("roads[{i}]");
            if r.id.is_empty() {
                return Err(Error::config(format!("{key}.id"), "road id is empty"));
            }
            if index.insert(r.id.as_str(), i).is_some() {
                return Err(Error::config(
                    format!("{key}.id"),
                    format!("duplicate road id `{}`", r.id),
                ));
            }
            if !(r.x_min.is_finite() && r.x_max.is_finite() && r.x_max > r.x_min) {
                return Err(Error::config(
                    format!("{key}.x_max"),
                    format!("road interval [{}, {}] is empty", r.x_min, r.x_max),
                ));
            }
            if r.cells == 0 {
                return Err(Error::config(format!("{key}.cells"), "must be at least 1"));
            }
            let degree = r.degree.unwrap_or(s.degree);
            if degree > MAX_DEGREE {
                return Err(Error::config(
                    format!("{key}.degree"),
                    format!("must be in 0..={MAX_DEGREE}, got {degree}"),
                ));
            }
            degrees.push(degree);
            r.flux.validate(&format!("{key}.flux"))?;
            r.initial
                .validate(&format!("{key}.initial"), r.flux.rho_max())?;
        }

        let mut ends: Vec<[Option<(EndKind, String)>; 2]> = vec![[None, None]; self.roads.len()];
        let mut attach = |road: usize, end: RoadEnd, kind: EndKind, key: String| -> Result<()> {
            let slot = &mut ends[road][end as usize];
            if let Some((_, prev)) = slot {
                return Err(Error::config(
                    key,
                    format!(
                        "{} end of road `{}` is already attached by {prev}",
                        match end {
                            RoadEnd::Left => "left",
                            RoadEnd::Right => "right",
                        },
                        self.roads[road].id
                    ),
                ));
            }
            *slot = Some((kind, key));
            Ok(())
        };
        let lookup = |id: &str, key: String| -> Result<usize> {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::config(key, format!("unknown road `{id}`")))
        };

        let mut junctions = Vec::with_capacity(self.junctions.len());
        for (ji, j) in self.junctions.iter().enumerate() {
            let key = format!("junctions[{ji}]");
            let rule = j.rule(&key)?;
            let mut incoming = Vec::new();
            for (slot, id) in j.incoming.iter().enumerate() {
                let k = format!("{key}.incoming[{slot}]");
                let r = lookup(id, k.clone())?;
                attach(r, RoadEnd::Right, EndKind::Junction { junction: ji, slot }, k)?;
                incoming.push(r);
            }
            let mut outgoing = Vec::new();
            for (slot, id) in j.outgoing.iter().enumerate() {
                let k = format!("{key}.outgoing[{slot}]");
                let r = lookup(id, k.clone())?;
                attach(r, RoadEnd::Left, EndKind::Junction { junction: ji, slot }, k)?;
                outgoing.push(r);
            }
            junctions.push(ResolvedJunction {
                rule,
                incoming,
                outgoing,
            });
        }

        for (bi, b) in self.boundaries.iter().enumerate() {
            let key = format!("boundaries[{bi}]");
            match b {
                BoundaryConfig::Inflow { road, end, density } => {
                    let r = lookup(road, format!("{key}.road"))?;
                    let rho_max = self.roads[r].flux.rho_max();
                    if !(density.is_finite() && *density >= 0.0 && *density <= rho_max) {
                        return Err(Error::config(
                            format!("{key}.density"),
                            format!("inflow density {density} outside [0, {rho_max}]"),
                        ));
                    }
                    attach(r, *end, EndKind::Inflow { density: *density }, key)?;
                }
                BoundaryConfig::Outflow { road, end } => {
                    let r = lookup(road, format!("{key}.road"))?;
                    attach(r, *end, EndKind::Outflow, key)?;
                }
                BoundaryConfig::Periodic { road } => {
                    let r = lookup(road, format!("{key}.road"))?;
                    attach(r, RoadEnd::Left, EndKind::Periodic, key.clone())?;
                    attach(r, RoadEnd::Right, EndKind::Periodic, key)?;
                }
            }
        }

        let ends = ends
            .into_iter()
            .enumerate()
            .map(|(i, pair)| {
                let [l, r] = pair;
                let missing = |side: &str| {
                    Error::config(
                        format!("roads[{i}]"),
                        format!(
                            "{side} end of road `{}` is attached to neither a junction nor a boundary",
                            self.roads[i].id
                        ),
                    )
                };
                Ok([
                    l.ok_or_else(|| missing("left"))?.0,
                    r.ok_or_else(|| missing("right"))?.0,
                ])
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(ResolvedTopology {
            ends,
            junctions,
            degrees,
        })
    }
}
