//! Flat `key = value` run configuration with command-line overrides.
//!
//! Lines are `key = value`; `#` starts a comment. Every key may appear at
//! most once per source, and overrides replace file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::potential::{presets, PhysicalScales, PotentialSpec};
use crate::scaling::{ComplexScalingConfig, DEFAULT_MARGIN};

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("preset", "gallery potential a-f or `square`; excludes kind/coeffs/eta/v0/half_width"),
    ("kind", "gaussian | rectangular | zero"),
    ("coeffs", "comma-separated polynomial coefficients c0,c1,..."),
    ("eta", "Gaussian width parameter (default 1)"),
    ("v0", "square barrier height"),
    ("half_width", "square barrier half-width"),
    ("mass", "particle mass (default 1)"),
    ("hbar", "reduced Planck constant; exactly one of hbar, kappa"),
    ("kappa", "semiclassical parameter sqrt(2m)/hbar"),
    ("e_min", "lowest grid energy (default 0.1)"),
    ("e_max", "highest grid energy (default 1.5)"),
    ("e_points", "number of grid energies (default 141)"),
    ("epsilon", "imaginary offset for real-axis densities (default 0)"),
    ("theta", "complex rotation angle (default 0.3)"),
    ("box_length", "box length L (default 20)"),
    ("basis_size", "number of sine basis functions M (default 1200)"),
    ("quadrature_points", "matrix-element quadrature nodes (default automatic)"),
    ("ecs_inner", "exterior scaling: radius where the bend starts"),
    ("ecs_outer", "exterior scaling: radius where the full rotation is reached"),
    ("margin", "angular margin for resonance classification (default 0.02)"),
    ("gamma_min", "lowest width of the density map (default 0)"),
    ("gamma_max", "highest width of the density map (default 0.2)"),
    ("gamma_points", "number of map widths (default 41)"),
    ("energy", "trajectory energy"),
    ("step", "trajectory step in s (default (b - a)/20000)"),
    ("s_max", "trajectory length limit (default 1e4)"),
];

/// Uniform real-energy grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EnergyGrid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub scales: PhysicalScales,
    pub scaling: ComplexScalingConfig,
    pub margin: f64,
    pub grid: EnergyGrid,
    pub epsilon: f64,
    pub gammas: EnergyGrid,
    pub trajectory_energy: Option<f64>,
    pub step: Option<f64>,
    pub s_max: f64,
}

/// Parse `key = value` lines into a map, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        insert_pair(&mut map, key.trim(), value.trim())?;
    }
    Ok(map)
}

fn insert_pair(map: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<()> {
    if !KEYS.iter().any(|(k, _)| *k == key) {
        return Err(Error::Config(format!("unknown key `{key}`")));
    }
    if map.insert(key.to_string(), value.to_string()).is_some() {
        return Err(Error::Config(format!("key `{key}` given twice")));
    }
    Ok(())
}

/// Parse `--key=value` overrides.
pub fn parse_overrides(args: &[String]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for arg in args {
        let body = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("override `{arg}` must look like --key=value")))?;
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{arg}` must look like --key=value")))?;
        insert_pair(&mut map, key, value)?;
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, String>,
}

impl Reader {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.map
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Config(format!("key `{key}`: `{v}` is not a finite number")))
            })
            .transpose()
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.map
            .get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not a non-negative integer")))
            })
            .transpose()
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.float(key)?
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    fn potential(&self) -> Result<PotentialSpec> {
        let shape_keys = ["kind", "coeffs", "eta", "v0", "half_width"];
        if let Some(name) = self.map.get("preset") {
            if let Some(k) = shape_keys.iter().find(|k| self.has(k)) {
                return Err(Error::Config(format!("key `{k}` conflicts with `preset`")));
            }
            let mut chars = name.chars();
            let spec = match (chars.next(), chars.next()) {
                _ if name == "square" => Some(presets::square_barrier()),
                (Some(c), None) => presets::gaussian(c),
                _ => None,
            };
            return spec.ok_or_else(|| Error::Config(format!("key `preset`: unknown preset `{name}`")));
        }
        let kind = self
            .map
            .get("kind")
            .ok_or_else(|| Error::Config("missing key `kind` (or `preset`)".into()))?;
        let spec = match kind.as_str() {
            "gaussian" => {
                let raw = self
                    .map
                    .get("coeffs")
                    .ok_or_else(|| Error::Config("missing key `coeffs`".into()))?;
                let coeffs = raw
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config(format!("key `coeffs`: cannot parse `{raw}`")))?;
                PotentialSpec::gaussian_polynomial(coeffs, self.float_or("eta", 1.0)?)?
            }
            "rectangular" => PotentialSpec::rectangular(self.require("v0")?, self.require("half_width")?)?,
            "zero" => PotentialSpec::zero(),
            other => return Err(Error::Config(format!("key `kind`: unknown kind `{other}`"))),
        };
        Ok(spec)
    }

    fn scales(&self) -> Result<PhysicalScales> {
        let mass = self.float_or("mass", 1.0)?;
        let scales = match (self.float("hbar")?, self.float("kappa")?) {
            (Some(h), None) => PhysicalScales::new(mass, h),
            (None, Some(k)) => PhysicalScales::from_kappa(mass, k),
            (Some(_), Some(_)) => return Err(Error::Config("keys `hbar` and `kappa` are mutually exclusive".into())),
            (None, None) => return Err(Error::Config("missing key `hbar` (or `kappa`)".into())),
        };
        scales.map_err(|e| Error::Config(e.to_string()))
    }
}

impl RunConfig {
    pub fn from_pairs(map: BTreeMap<String, String>) -> Result<Self> {
        let r = Reader { map };
        let potential = r.potential()?;
        let scales = r.scales()?;
        let mut scaling = ComplexScalingConfig::new(
            r.float_or("theta", 0.3)?,
            r.float_or("box_length", 20.0)?,
            r.count("basis_size")?.unwrap_or(1200),
        );
        scaling.quadrature_points = r.count("quadrature_points")?;
        match (r.float("ecs_inner")?, r.float("ecs_outer")?) {
            (Some(inner), Some(outer)) => scaling = scaling.with_exterior(inner, outer),
            (None, None) => {
                // the square barrier cannot be rotated, so it always gets an exterior contour
                if let PotentialSpec::Rectangular { half_width, .. } = potential {
                    let inner = half_width + 1.0;
                    scaling = scaling.with_exterior(inner, inner + 10.0);
                }
            }
            _ => return Err(Error::Config("keys `ecs_inner` and `ecs_outer` must be given together".into())),
        }
        let grid = EnergyGrid {
            min: r.float_or("e_min", 0.1)?,
            max: r.float_or("e_max", 1.5)?,
            points: r.count("e_points")?.unwrap_or(141),
        };
        let gammas = EnergyGrid {
            min: r.float_or("gamma_min", 0.0)?,
            max: r.float_or("gamma_max", 0.2)?,
            points: r.count("gamma_points")?.unwrap_or(41),
        };
        for (name, g) in [("e", &grid), ("gamma", &gammas)] {
            if g.points == 0 || !(g.max >= g.min) || (g.points > 1 && g.max == g.min) {
                return Err(Error::Config(format!(
                    "keys `{name}_min`, `{name}_max`, `{name}_points` do not describe a grid"
                )));
            }
        }
        let config = RunConfig {
            potential,
            scales,
            scaling,
            margin: r.float_or("margin", DEFAULT_MARGIN)?,
            grid,
            epsilon: r.float_or("epsilon", 0.0)?,
            gammas,
            trajectory_energy: r.float("energy")?,
            step: r.float("step")?,
            s_max: r.float_or("s_max", 1e4)?,
        };
        if config.epsilon < 0.0 {
            return Err(Error::Config("key `epsilon` must be non-negative".into()));
        }
        Ok(config)
    }

    /// Load a config file (if any) and apply overrides on top.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut map = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        map.extend(parse_overrides(overrides)?);
        Self::from_pairs(map)
    }
}
