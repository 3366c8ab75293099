//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. Unknown or repeated keys are refused
//! rather than ignored, so a typo can never silently fall back to a default.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::io::sha256_hex;
use crate::packets;
use crate::spectral::GridSpec;
use crate::waterwave::{dt_max_spec, DEFAULT_CARRIER, DEFAULT_CHORD_ARC_FLOOR};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    /// Weighted-energy size of the data.
    pub eps: f64,
    /// If set, scale the data to this peak |W| instead of using `eps`.
    pub amplitude: Option<f64>,
    pub width: f64,
    pub carrier: f64,
    pub dt: f64,
    pub t_max: f64,
    pub sample_cadence: f64,
    pub checkpoint_every: f64,
    pub chord_arc_floor: f64,
    pub energy_tol: f64,
    pub packet_t_min: f64,
    pub packet_t_ratio: f64,
    pub packet_v_count: usize,
    pub packet_rays: Vec<f64>,
    pub gamma_refine: usize,
    pub eps_list: Vec<f64>,
    pub dt_probe: f64,
    pub probe_substeps: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: GridSpec { n_points: 1024, length: 256.0, dealias_fraction: 2.0 / 3.0 },
            eps: 0.01,
            amplitude: None,
            width: 2.0,
            carrier: DEFAULT_CARRIER,
            dt: 0.05,
            t_max: 50.0,
            sample_cadence: 1.0,
            checkpoint_every: 10.0,
            chord_arc_floor: DEFAULT_CHORD_ARC_FLOOR,
            energy_tol: 1e-6,
            packet_t_min: 40.0,
            packet_t_ratio: 1.05,
            packet_v_count: 33,
            packet_rays: vec![0.8, 1.0, 1.25],
            gamma_refine: 4,
            eps_list: vec![0.02, 0.01, 0.005],
            dt_probe: 0.05,
            probe_substeps: 4,
            seed: 1,
        }
    }
}

const KEYS: &[&str] = &[
    "n_points",
    "length",
    "dealias_fraction",
    "eps",
    "amplitude",
    "width",
    "carrier",
    "dt",
    "t_max",
    "sample_cadence",
    "checkpoint_every",
    "chord_arc_floor",
    "energy_tol",
    "packet_t_min",
    "packet_t_ratio",
    "packet_v_count",
    "packet_rays",
    "gamma_refine",
    "eps_list",
    "dt_probe",
    "probe_substeps",
    "seed",
];

fn refuse(msg: impl Into<String>) -> Error {
    Error::ConfigRefused(msg.into())
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| refuse(format!("{key}: not a number: {v:?}")))?;
    if !x.is_finite() {
        return Err(refuse(format!("{key}: not finite")));
    }
    Ok(x)
}

fn int(key: &str, v: &str) -> Result<u64> {
    v.parse().map_err(|_| refuse(format!("{key}: not a nonnegative integer: {v:?}")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(key, s.trim())).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

/// Which ray velocities the domain-size policy must accommodate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Workload {
    /// Only the data itself travels (group velocity at the carrier).
    Flow,
    /// Packets are placed on the whole ray grid as well.
    Packets,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| refuse(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(refuse(format!("unknown key {k:?}")));
            }
            if !seen.insert(k.to_string()) {
                return Err(refuse(format!("key {k:?} given twice")));
            }
            match k {
                "n_points" => c.grid.n_points = int(k, v)? as usize,
                "length" => c.grid.length = num(k, v)?,
                "dealias_fraction" => c.grid.dealias_fraction = num(k, v)?,
                "eps" => c.eps = num(k, v)?,
                "amplitude" => c.amplitude = Some(num(k, v)?),
                "width" => c.width = num(k, v)?,
                "carrier" => c.carrier = num(k, v)?,
                "dt" => c.dt = num(k, v)?,
                "t_max" => c.t_max = num(k, v)?,
                "sample_cadence" => c.sample_cadence = num(k, v)?,
                "checkpoint_every" => c.checkpoint_every = num(k, v)?,
                "chord_arc_floor" => c.chord_arc_floor = num(k, v)?,
                "energy_tol" => c.energy_tol = num(k, v)?,
                "packet_t_min" => c.packet_t_min = num(k, v)?,
                "packet_t_ratio" => c.packet_t_ratio = num(k, v)?,
                "packet_v_count" => c.packet_v_count = int(k, v)? as usize,
                "packet_rays" => c.packet_rays = list(k, v)?,
                "gamma_refine" => c.gamma_refine = int(k, v)? as usize,
                "eps_list" => c.eps_list = list(k, v)?,
                "dt_probe" => c.dt_probe = num(k, v)?,
                "probe_substeps" => c.probe_substeps = int(k, v)? as usize,
                "seed" => c.seed = int(k, v)?,
                _ => unreachable!(),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| refuse(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("n_points", self.grid.n_points.to_string());
        kv("length", format!("{:?}", self.grid.length));
        kv("dealias_fraction", format!("{:?}", self.grid.dealias_fraction));
        kv("eps", format!("{:?}", self.eps));
        if let Some(a) = self.amplitude {
            kv("amplitude", format!("{a:?}"));
        }
        kv("width", format!("{:?}", self.width));
        kv("carrier", format!("{:?}", self.carrier));
        kv("dt", format!("{:?}", self.dt));
        kv("t_max", format!("{:?}", self.t_max));
        kv("sample_cadence", format!("{:?}", self.sample_cadence));
        kv("checkpoint_every", format!("{:?}", self.checkpoint_every));
        kv("chord_arc_floor", format!("{:?}", self.chord_arc_floor));
        kv("energy_tol", format!("{:?}", self.energy_tol));
        kv("packet_t_min", format!("{:?}", self.packet_t_min));
        kv("packet_t_ratio", format!("{:?}", self.packet_t_ratio));
        kv("packet_v_count", self.packet_v_count.to_string());
        kv("packet_rays", fmt_list(&self.packet_rays));
        kv("gamma_refine", self.gamma_refine.to_string());
        kv("eps_list", fmt_list(&self.eps_list));
        kv("dt_probe", format!("{:?}", self.dt_probe));
        kv("probe_substeps", self.probe_substeps.to_string());
        kv("seed", self.seed.to_string());
        s
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }

    /// Group velocity of the carrier, 1/(2√ξ₀).
    pub fn carrier_velocity(&self) -> f64 {
        0.5 / self.carrier.sqrt()
    }

    pub fn v_grid(&self) -> Vec<f64> {
        packets::v_grid(self.packet_t_min, self.t_max, self.packet_v_count)
    }

    /// Largest packet-centre velocity the run will reach.
    pub fn v_max(&self, work: Workload) -> f64 {
        let mut v = self.carrier_velocity();
        if work == Workload::Packets {
            for x in self.v_grid().iter().chain(&self.packet_rays) {
                v = v.max(x.abs());
            }
        }
        v
    }

    /// All checks that must pass before any work starts.
    pub fn validate(&self, work: Workload) -> Result<()> {
        self.grid.validate().map_err(|e| refuse(e.to_string()))?;
        let pos = |k: &str, x: f64| if x > 0.0 { Ok(()) } else { Err(refuse(format!("{k} must be positive, got {x}"))) };
        pos("width", self.width)?;
        pos("carrier", self.carrier)?;
        pos("dt", self.dt)?;
        pos("sample_cadence", self.sample_cadence)?;
        pos("checkpoint_every", self.checkpoint_every)?;
        pos("energy_tol", self.energy_tol)?;
        pos("dt_probe", self.dt_probe)?;
        if !(self.t_max >= 0.0) {
            return Err(refuse("t_max must be nonnegative"));
        }
        if !(self.eps >= 0.0) {
            return Err(refuse("eps must be nonnegative"));
        }
        if let Some(a) = self.amplitude {
            if !(a >= 0.0) {
                return Err(refuse("amplitude must be nonnegative"));
            }
        }
        if !(self.chord_arc_floor > 0.0 && self.chord_arc_floor < 1.0) {
            return Err(refuse("chord_arc_floor must lie in (0, 1)"));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0)) {
            return Err(refuse("eps_list entries must be positive"));
        }
        let limit = dt_max_for(&self.grid);
        if self.dt > limit {
            return Err(refuse(format!("dt = {} exceeds the stability limit {:.4e} for this grid", self.dt, limit)));
        }
        if self.carrier > self.grid.dealias_cutoff() {
            return Err(refuse(format!(
                "carrier {} above the dealias cutoff {:.4}",
                self.carrier,
                self.grid.dealias_cutoff()
            )));
        }
        let l = self.grid.length;
        if l < 40.0 * self.width {
            return Err(refuse(format!("length {l} < 40 x width {}", self.width)));
        }
        let reach = self.v_max(work) * self.t_max;
        if l < 4.0 * reach {
            return Err(refuse(format!(
                "length {l} < 4 x furthest packet centre {reach:.1} (v = {:.3}, t_max = {})",
                self.v_max(work),
                self.t_max
            )));
        }
        if work == Workload::Packets {
            if !(self.packet_t_min >= 1.0 && self.packet_t_min < self.t_max) {
                return Err(refuse("need 1 <= packet_t_min < t_max"));
            }
            if !(self.packet_t_ratio > 1.0) {
                return Err(refuse("packet_t_ratio must exceed 1"));
            }
            if self.gamma_refine == 0 {
                return Err(refuse("gamma_refine must be at least 1"));
            }
        }
        Ok(())
    }
}

fn dt_max_for(spec: &GridSpec) -> f64 {
    dt_max_spec(spec)
}
