//! Run configuration: strict JSON, one parameter block per experiment.

use crate::failure::Failure;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    OneCorner,
    Polygon,
    Compare,
    Hrot,
    Evolve,
    CmTable,
    EnergyScan,
    EnergyFit,
    Momentum,
    Riemann,
    Conservation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::OneCorner => "one-corner",
            Experiment::Polygon => "polygon",
            Experiment::Compare => "compare",
            Experiment::Hrot => "hrot",
            Experiment::Evolve => "evolve",
            Experiment::CmTable => "cm-table",
            Experiment::EnergyScan => "energy-scan",
            Experiment::EnergyFit => "energy-fit",
            Experiment::Momentum => "momentum",
            Experiment::Riemann => "riemann",
            Experiment::Conservation => "conservation",
        }
    }

    pub fn is_scan(self) -> bool {
        matches!(self, Experiment::CmTable | Experiment::EnergyScan | Experiment::EnergyFit | Experiment::Momentum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Desk,
    Full,
}

/// Largest scan denominator and evolution grid allowed without `mode = full`.
pub const DESK_MAX_Q: u64 = 10_000;
pub const DESK_MAX_N: usize = 8192;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub parameters: Option<Value>,
    pub output_dir: Option<PathBuf>,
    pub mode: Option<Mode>,
    /// Test hook: stop a scan after this many new cells, as if interrupted.
    pub stop_after_cells: Option<u64>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Usage(format!("invalid config: {e}")))
}

fn default_sides_3() -> u32 {
    3
}
fn default_sides_5() -> u32 {
    5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneCornerParams {
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default, rename = "M")]
    pub sides: Option<u32>,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "ten")]
    pub s_max: f64,
    #[serde(default = "milli")]
    pub ds: f64,
    #[serde(default = "ten_usize")]
    pub every: usize,
    /// Rotate onto side 0 of the regular `M`-gon (needs `M`).
    #[serde(default)]
    pub rotate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonParams {
    #[serde(rename = "M")]
    pub sides: u32,
    pub p: u64,
    pub q: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareParams {
    #[serde(default = "default_sides_5", rename = "M")]
    pub sides: u32,
    #[serde(default = "default_compare_qs")]
    pub qs: Vec<u64>,
}

fn default_compare_qs() -> Vec<u64> {
    vec![1001, 2001, 4001, 1000, 2000, 4000, 1002, 2002, 4002]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HrotParams {
    /// One `M`, or use `Ms` for several.
    #[serde(default, rename = "M")]
    pub sides: Option<u32>,
    #[serde(default, rename = "Ms")]
    pub sides_list: Option<Vec<u32>>,
    #[serde(default = "thousand")]
    pub s_max: f64,
    #[serde(default = "milli")]
    pub ds: f64,
    /// Write `H_rot(s)` every this many steps (0 = no profile).
    #[serde(default)]
    pub profile_every: usize,
}

impl HrotParams {
    pub fn sides(&self) -> Result<Vec<u32>, Failure> {
        match (&self.sides, &self.sides_list) {
            (Some(m), None) => Ok(vec![*m]),
            (None, Some(ms)) if !ms.is_empty() => Ok(ms.clone()),
            (None, None) => Ok(vec![3]),
            _ => Err(Failure::Usage("give either M or a nonempty Ms, not both".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Datum {
    Polygon,
    Quadrilateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Update {
    FromTangent,
    Binormal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub datum: Datum,
    #[serde(default = "default_sides_3", rename = "M")]
    pub sides: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub steps: u64,
    /// Final time; defaults to one period `2π/M²` (polygon) or `π/32` (quadrilateral).
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "one_u64")]
    pub snapshots: u64,
    #[serde(default = "default_update")]
    pub update: Update,
}

fn default_update() -> Update {
    Update::FromTangent
}

impl EvolveParams {
    pub fn t_end(&self) -> f64 {
        self.t_end.unwrap_or(match self.datum {
            Datum::Polygon => 2.0 * PI / (self.sides * self.sides) as f64,
            Datum::Quadrilateral => PI / 32.0,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmTableParams {
    #[serde(default = "default_cm_sides", rename = "Ms")]
    pub sides: Vec<u32>,
    #[serde(default = "default_cm_points")]
    pub n_over_m: Vec<usize>,
    /// Steps per period at `N/M = 512`; scaled by `(N/M / 512)²`.
    #[serde(default = "default_nt_base")]
    pub nt_base: u64,
}

fn default_cm_sides() -> Vec<u32> {
    vec![3]
}
fn default_cm_points() -> Vec<usize> {
    vec![512, 1024]
}
fn default_nt_base() -> u64 {
    151_200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyScanParams {
    #[serde(default = "default_sides_3", rename = "M")]
    pub sides: u32,
    pub q: u64,
    /// Defaults to every `p = 0..=q`.
    #[serde(default)]
    pub p: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Search {
    Exhaustive,
    Restricted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyFitParams {
    #[serde(default = "default_sides_3", rename = "M")]
    pub sides: u32,
    /// The ladder is `q = 2·prime` in `[q_min, q_max]`.
    #[serde(default = "default_q_min")]
    pub q_min: u64,
    #[serde(default = "default_q_max")]
    pub q_max: u64,
    #[serde(default = "default_search")]
    pub search: Search,
    /// Reference fit `a ln q + b` for the residual column.
    #[serde(default = "default_fit_a")]
    pub a: f64,
    #[serde(default = "default_fit_b")]
    pub b: f64,
}

fn default_q_min() -> u64 {
    554
}
fn default_q_max() -> u64 {
    6000
}
fn default_search() -> Search {
    Search::Exhaustive
}
fn default_fit_a() -> f64 {
    0.258_039_752_572_419
}
fn default_fit_b() -> f64 {
    0.152_992_510_344_641
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumParams {
    #[serde(default = "default_sides_3", rename = "M")]
    pub sides: u32,
    #[serde(default = "default_momentum_q")]
    pub q: u64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Terms of `φ` for the comparison curve.
    #[serde(default = "default_phi_terms")]
    pub phi_terms: u64,
}

fn default_momentum_q() -> u64 {
    960
}
fn default_k_max() -> usize {
    200
}
fn default_phi_terms() -> u64 {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannParams {
    #[serde(default = "default_riemann_terms")]
    pub n_max: u64,
    #[serde(default = "default_riemann_points")]
    pub points: usize,
    #[serde(default)]
    pub x_min: f64,
    #[serde(default = "one")]
    pub x_max: f64,
}

fn default_riemann_terms() -> u64 {
    10_000
}
fn default_riemann_points() -> usize {
    1001
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConservationParams {
    #[serde(default = "default_conservation_n", rename = "N")]
    pub n: usize,
    /// Step as a divisor of π at `N = 3072`; scaled as `N⁻²` for other grids.
    #[serde(default = "default_dt_divisor")]
    pub dt_divisor: f64,
    /// Sample times `[num, den, sides]` meaning `t = num·π/den` with that many sides.
    #[serde(default = "default_conservation_times")]
    pub times: Vec<[u64; 3]>,
}

fn default_conservation_n() -> usize {
    3072
}
fn default_dt_divisor() -> f64 {
    2_654_208.0
}
fn default_conservation_times() -> Vec<[u64; 3]> {
    vec![[1, 32, 32], [1, 16, 32]]
}

fn one() -> f64 {
    1.0
}
fn one_u64() -> u64 {
    1
}
fn ten() -> f64 {
    10.0
}
fn ten_usize() -> usize {
    10
}
fn thousand() -> f64 {
    1000.0
}
fn milli() -> f64 {
    1e-3
}

#[derive(Debug, Clone)]
pub enum Params {
    OneCorner(OneCornerParams),
    Polygon(PolygonParams),
    Compare(CompareParams),
    Hrot(HrotParams),
    Evolve(EvolveParams),
    CmTable(CmTableParams),
    EnergyScan(EnergyScanParams),
    EnergyFit(EnergyFitParams),
    Momentum(MomentumParams),
    Riemann(RiemannParams),
    Conservation(ConservationParams),
}

fn typed<T: DeserializeOwned>(v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("invalid parameters: {e}")))
}

impl Params {
    pub fn parse(exp: Experiment, v: Option<Value>) -> Result<Self, Failure> {
        let v = v.unwrap_or_else(|| Value::Object(Default::default()));
        if !v.is_object() {
            return Err(Failure::Usage("parameters must be a JSON object".into()));
        }
        Ok(match exp {
            Experiment::OneCorner => Params::OneCorner(typed(v)?),
            Experiment::Polygon => Params::Polygon(typed(v)?),
            Experiment::Compare => Params::Compare(typed(v)?),
            Experiment::Hrot => Params::Hrot(typed(v)?),
            Experiment::Evolve => Params::Evolve(typed(v)?),
            Experiment::CmTable => Params::CmTable(typed(v)?),
            Experiment::EnergyScan => Params::EnergyScan(typed(v)?),
            Experiment::EnergyFit => Params::EnergyFit(typed(v)?),
            Experiment::Momentum => Params::Momentum(typed(v)?),
            Experiment::Riemann => Params::Riemann(typed(v)?),
            Experiment::Conservation => Params::Conservation(typed(v)?),
        })
    }

    /// Parameters with every default filled in; identifies a scan in its checkpoint.
    pub fn canonical(&self) -> Value {
        let v = match self {
            Params::OneCorner(p) => serde_json::to_value(p),
            Params::Polygon(p) => serde_json::to_value(p),
            Params::Compare(p) => serde_json::to_value(p),
            Params::Hrot(p) => serde_json::to_value(p),
            Params::Evolve(p) => serde_json::to_value(p),
            Params::CmTable(p) => serde_json::to_value(p),
            Params::EnergyScan(p) => serde_json::to_value(p),
            Params::EnergyFit(p) => serde_json::to_value(p),
            Params::Momentum(p) => serde_json::to_value(p),
            Params::Riemann(p) => serde_json::to_value(p),
            Params::Conservation(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }

    /// `(largest scan q, largest grid N)` the run will touch.
    fn scale(&self) -> (u64, usize) {
        match self {
            Params::Compare(p) => (p.qs.iter().copied().max().unwrap_or(0), 0),
            Params::EnergyScan(p) => (p.q, 0),
            Params::EnergyFit(p) => (p.q_max, 0),
            Params::Momentum(p) => (p.q, 0),
            Params::Evolve(p) => (0, p.n),
            Params::CmTable(p) => {
                let n = p.sides.iter().flat_map(|&m| p.n_over_m.iter().map(move |&r| m as usize * r)).max();
                (0, n.unwrap_or(0))
            }
            Params::Conservation(p) => (0, p.n),
            _ => (0, 0),
        }
    }

    pub fn check_mode(&self, mode: Mode) -> Result<(), Failure> {
        if mode == Mode::Full {
            return Ok(());
        }
        let (q, n) = self.scale();
        if q > DESK_MAX_Q {
            return Err(Failure::Usage(format!("q = {q} exceeds {DESK_MAX_Q}; rerun with --mode full")));
        }
        if n > DESK_MAX_N {
            return Err(Failure::Usage(format!("N = {n} exceeds {DESK_MAX_N}; rerun with --mode full")));
        }
        Ok(())
    }
}
