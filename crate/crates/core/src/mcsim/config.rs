//! Run configuration, read from JSON or from `key = value` lines.
//!
//! ```text
//! # 64 ellipses 2×1 in a square box
//! n_particles = 64
//! species = 2 1 1.0
//! box = 31.7 31.7
//! max_translation = 0.3
//! max_rotation_deg = 10
//! seed = 7
//! sweeps = 1000
//! sample_every = 100
//! ```
//!
//! `species = a b fraction` may repeat, one line per species.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::EllipseShape;

/// Densest packing of congruent ellipses in the plane, π/√12.
pub const MAX_PACKING_FRACTION: f64 = 0.9069;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub a: f64,
    pub b: f64,
    pub fraction: f64,
}

impl Species {
    pub fn shape(&self) -> Result<EllipseShape> {
        EllipseShape::new(self.a, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCConfig {
    pub n_particles: usize,
    pub species: Vec<Species>,
    #[serde(rename = "box")]
    pub box_size: [f64; 2],
    pub max_translation: f64,
    pub max_rotation_deg: f64,
    pub seed: u64,
    pub sweeps: usize,
    #[serde(default = "one")]
    pub sample_every: usize,
}

fn one() -> usize {
    1
}

impl MCConfig {
    /// A square box sized for `packing` with a single species.
    pub fn single_species(n: usize, a: f64, b: f64, packing: f64, seed: u64) -> Self {
        let side = (n as f64 * PI * a * b / packing).sqrt();
        MCConfig {
            n_particles: n,
            species: vec![Species { a, b, fraction: 1.0 }],
            box_size: [side, side],
            max_translation: 0.1 * b,
            max_rotation_deg: 5.0,
            seed,
            sweeps: 100,
            sample_every: 10,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: MCConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut n_particles = None;
        let mut species = Vec::new();
        let mut box_size = None;
        let mut max_translation = None;
        let mut max_rotation_deg = None;
        let mut seed = None;
        let mut sweeps = None;
        let mut sample_every = 1;

        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::InvalidConfig(format!("line {}: {msg}", no + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let value = value.trim();
            let nums = || -> Result<Vec<f64>> {
                value
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().map_err(|_| bad(&format!("not a number: {s}"))))
                    .collect()
            };
            let int = || value.parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
            match key.trim() {
                "n_particles" => n_particles = Some(int()? as usize),
                "species" => match nums()?[..] {
                    [a, b, fraction] => species.push(Species { a, b, fraction }),
                    _ => return Err(bad("species takes: a b fraction")),
                },
                "box" => match nums()?[..] {
                    [lx, ly] => box_size = Some([lx, ly]),
                    [l] => box_size = Some([l, l]),
                    _ => return Err(bad("box takes: Lx Ly")),
                },
                "max_translation" => max_translation = Some(nums()?.first().copied().unwrap_or(f64::NAN)),
                "max_rotation_deg" => max_rotation_deg = Some(nums()?.first().copied().unwrap_or(f64::NAN)),
                "seed" => seed = Some(int()?),
                "sweeps" => sweeps = Some(int()? as usize),
                "sample_every" => sample_every = int()? as usize,
                other => return Err(bad(&format!("unknown key {other}"))),
            }
        }
        let missing = |k: &str| Error::InvalidConfig(format!("missing key {k}"));
        let cfg = MCConfig {
            n_particles: n_particles.ok_or_else(|| missing("n_particles"))?,
            species,
            box_size: box_size.ok_or_else(|| missing("box"))?,
            max_translation: max_translation.ok_or_else(|| missing("max_translation"))?,
            max_rotation_deg: max_rotation_deg.ok_or_else(|| missing("max_rotation_deg"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            sweeps: sweeps.ok_or_else(|| missing("sweeps"))?,
            sample_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// JSON when the text starts with `{`, `key = value` otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_key_value(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn shapes(&self) -> Result<Vec<EllipseShape>> {
        self.species.iter().map(Species::shape).collect()
    }

    /// Particle count per species, by largest remainder.
    pub fn species_counts(&self) -> Vec<usize> {
        let n = self.n_particles as f64;
        let mut counts: Vec<usize> = self.species.iter().map(|s| (s.fraction * n).floor() as usize).collect();
        let mut rest: Vec<(usize, f64)> = self
            .species
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.fraction * n - counts[i] as f64))
            .collect();
        rest.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        let mut left = self.n_particles.saturating_sub(counts.iter().sum());
        for (i, _) in rest.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[*i] += 1;
            left -= 1;
        }
        counts
    }

    pub fn packing_fraction(&self) -> f64 {
        let filled: f64 = self
            .species_counts()
            .iter()
            .zip(&self.species)
            .map(|(&c, s)| c as f64 * PI * s.a * s.b)
            .sum();
        filled / (self.box_size[0] * self.box_size[1])
    }

    pub fn max_semi_major(&self) -> f64 {
        self.species.iter().map(|s| s.a.max(s.b)).fold(0.0, f64::max)
    }

    /// Side of a cell: the largest contact distance any pair can have.
    pub fn cell_size(&self) -> f64 {
        2.0 * self.max_semi_major()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_particles == 0 {
            return bad("n_particles must be at least 1".into());
        }
        if self.species.is_empty() {
            return bad("at least one species is required".into());
        }
        self.shapes()?;
        if self.species.iter().any(|s| s.fraction.is_nan() || s.fraction <= 0.0) {
            return bad("species fractions must be positive".into());
        }
        let total: f64 = self.species.iter().map(|s| s.fraction).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("species fractions sum to {total}, not 1"));
        }
        if self.box_size.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return bad("box lengths must be positive".into());
        }
        if !(self.max_translation.is_finite() && self.max_translation >= 0.0) {
            return bad("max_translation must be non-negative".into());
        }
        if !(self.max_rotation_deg.is_finite() && self.max_rotation_deg >= 0.0) {
            return bad("max_rotation_deg must be non-negative".into());
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        let phi = self.packing_fraction();
        if phi >= MAX_PACKING_FRACTION {
            return Err(Error::PackingInfeasible(format!(
                "packing fraction {phi:.4} is not below {MAX_PACKING_FRACTION}"
            )));
        }
        let min_side = 2.0 * self.cell_size();
        if self.box_size.iter().any(|&l| l < min_side) {
            return bad(format!("box sides must be at least {min_side} for the minimum image"));
        }
        Ok(())
    }
}
