//! Hard-ellipse Monte Carlo in a periodic box (constant N, V, T).
//!
//! Each trial move translates or rotates one particle and is accepted only
//! when the particle is disjoint from every neighbour, using [`overlap`].

mod cells;
mod config;

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use cells::CellList;
pub use config::{MCConfig, Species, MAX_PACKING_FRACTION};

use crate::contact::{overlap, OverlapVerdict};
use crate::error::{Error, Result};
use crate::types::{EllipseShape, UnitVec2, Vec2};

pub const RENORMALIZE_EVERY: u64 = 1_000_000;
/// Lattice spacing is the particle extent times this.
const LATTICE_MARGIN: f64 = 1.0 + 1e-6;
// outside this band of the circumscribed and inscribed circles the verdict
// is decided without the kernel
const PRECHECK_BAND: f64 = 2e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MoveCount {
    pub attempted: u64,
    pub accepted: u64,
}

impl MoveCount {
    pub fn ratio(&self) -> f64 {
        if self.attempted == 0 {
            1.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MoveStats {
    pub translation: MoveCount,
    pub rotation: MoveCount,
}

impl MoveStats {
    pub fn acceptance(&self) -> f64 {
        let all = MoveCount {
            attempted: self.translation.attempted + self.rotation.attempted,
            accepted: self.translation.accepted + self.rotation.accepted,
        };
        all.ratio()
    }

    pub fn add(&mut self, o: &MoveStats) {
        self.translation.attempted += o.translation.attempted;
        self.translation.accepted += o.translation.accepted;
        self.rotation.attempted += o.rotation.attempted;
        self.rotation.accepted += o.rotation.accepted;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCState {
    pub positions: Vec<Vec2>,
    pub orientations: Vec<UnitVec2>,
    pub species_index: Vec<usize>,
    pub shapes: Vec<EllipseShape>,
    pub box_size: [f64; 2],
    pub cells: CellList,
    pub stats: MoveStats,
    pub moves: u64,
}

impl MCState {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn shape(&self, i: usize) -> EllipseShape {
        self.shapes[self.species_index[i]]
    }

    pub fn minimum_image(&self, mut r: Vec2) -> Vec2 {
        r.x -= self.box_size[0] * (r.x / self.box_size[0]).round();
        r.y -= self.box_size[1] * (r.y / self.box_size[1]).round();
        r
    }

    fn wrap(&self, mut p: Vec2) -> Vec2 {
        p.x = p.x.rem_euclid(self.box_size[0]);
        p.y = p.y.rem_euclid(self.box_size[1]);
        // rem_euclid can round up to the box length itself
        if p.x >= self.box_size[0] {
            p.x = 0.0;
        }
        if p.y >= self.box_size[1] {
            p.y = 0.0;
        }
        p
    }

    /// Verdict for particle `i` placed at `p` with orientation `k` against `j`.
    fn pair_verdict(&self, i: usize, p: Vec2, k: UnitVec2, j: usize) -> OverlapVerdict {
        let (si, sj) = (self.shape(i), self.shape(j));
        let r = self.minimum_image(self.positions[j] - p);
        let dist = r.norm();
        if dist > (si.a() + sj.a()) * (1.0 + PRECHECK_BAND) {
            return OverlapVerdict::Disjoint;
        }
        if dist < (si.b() + sj.b()) * (1.0 - PRECHECK_BAND) {
            return OverlapVerdict::Overlapping;
        }
        // concentric centres and kernel failures count as overlap
        overlap(si, sj, k, self.orientations[j], r).unwrap_or(OverlapVerdict::Overlapping)
    }

    fn fits_with_neighbours(&self, i: usize, p: Vec2, k: UnitVec2) -> bool {
        self.cells.neighbour_cells(p).iter().all(|&c| {
            self.cells
                .members(c)
                .iter()
                .all(|&j| j == i || self.pair_verdict(i, p, k, j) == OverlapVerdict::Disjoint)
        })
    }

    fn fits_brute_force(&self, i: usize, p: Vec2, k: UnitVec2) -> bool {
        (0..self.len()).all(|j| j == i || self.pair_verdict(i, p, k, j) == OverlapVerdict::Disjoint)
    }

    pub fn renormalize(&mut self) {
        for k in &mut self.orientations {
            *k = k.renormalized();
        }
    }
}

fn lattice(cfg: &MCConfig, along_x: bool) -> Vec<Vec2> {
    let (a, b) = cfg
        .species
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), s| (a.max(s.a), b.max(s.b)));
    let (wx, wy) = if along_x { (a, b) } else { (b, a) };
    let nx = (cfg.box_size[0] / (2.0 * wx * LATTICE_MARGIN)).floor() as usize;
    let ny = (cfg.box_size[1] / (2.0 * wy * LATTICE_MARGIN)).floor() as usize;
    let (hx, hy) = (cfg.box_size[0] / nx.max(1) as f64, cfg.box_size[1] / ny.max(1) as f64);
    let sites = nx * ny;
    if sites < cfg.n_particles {
        return Vec::new();
    }
    // spread the particles evenly over the available sites
    (0..cfg.n_particles)
        .map(|i| {
            let s = i * sites / cfg.n_particles;
            Vec2::new(((s % nx) as f64 + 0.5) * hx, ((s / nx) as f64 + 0.5) * hy)
        })
        .collect()
}

/// Particles on a rectangular lattice with a common orientation.
pub fn init_state(cfg: &MCConfig, rng: &mut ChaCha8Rng) -> Result<MCState> {
    cfg.validate()?;
    let shapes = cfg.shapes()?;
    let (positions, k) = [(true, 0.0), (false, 90.0)]
        .iter()
        .map(|&(along_x, deg)| (lattice(cfg, along_x), UnitVec2::from_degrees(deg)))
        .find(|(p, _)| p.len() == cfg.n_particles)
        .ok_or_else(|| {
            Error::PackingInfeasible(format!(
                "{} particles do not fit on a lattice in a {}×{} box",
                cfg.n_particles, cfg.box_size[0], cfg.box_size[1]
            ))
        })?;
    let mut species_index: Vec<usize> = cfg
        .species_counts()
        .iter()
        .enumerate()
        .flat_map(|(s, &c)| std::iter::repeat_n(s, c))
        .collect();
    species_index.shuffle(rng);
    let cells = CellList::new(cfg.box_size, cfg.cell_size(), &positions);
    let state = MCState {
        orientations: vec![k; positions.len()],
        positions,
        species_index,
        shapes,
        box_size: cfg.box_size,
        cells,
        stats: MoveStats::default(),
        moves: 0,
    };
    let report = audit(&state);
    if !report.passed() {
        return Err(Error::PackingInfeasible(format!(
            "lattice start has {} overlapping pairs",
            report.overlapping_pairs.len()
        )));
    }
    Ok(state)
}

/// N trial moves, half translations and half rotations on average.
pub fn mc_sweep(state: &mut MCState, cfg: &MCConfig, rng: &mut ChaCha8Rng) -> MoveStats {
    let mut stats = MoveStats::default();
    let max_rot = cfg.max_rotation_deg.to_radians();
    for _ in 0..state.len() {
        let i = rng.gen_range(0..state.len());
        let (p, k) = (state.positions[i], state.orientations[i]);
        let translate = rng.gen_bool(0.5);
        let (new_p, new_k) = if translate {
            let dx = cfg.max_translation * rng.gen_range(-1.0..=1.0);
            let dy = cfg.max_translation * rng.gen_range(-1.0..=1.0);
            (state.wrap(p + Vec2::new(dx, dy)), k)
        } else {
            (p, k.rotated(max_rot * rng.gen_range(-1.0..=1.0)))
        };
        let count = if translate {
            &mut stats.translation
        } else {
            &mut stats.rotation
        };
        count.attempted += 1;
        if state.fits_with_neighbours(i, new_p, new_k) {
            count.accepted += 1;
            state.positions[i] = new_p;
            state.orientations[i] = new_k;
            state.cells.relocate(i, new_p);
        }
        state.moves += 1;
        if state.moves.is_multiple_of(RENORMALIZE_EVERY) {
            state.renormalize();
        }
    }
    state.stats.add(&stats);
    stats
}

/// Nematic order S = |⟨(cos 2θ, sin 2θ)⟩|.
pub fn order_parameter(orientations: &[UnitVec2]) -> f64 {
    let n = orientations.len().max(1) as f64;
    let (c, s) = orientations.iter().fold((0.0, 0.0), |(c, s), k| {
        (c + k.x() * k.x() - k.y() * k.y(), s + 2.0 * k.x() * k.y())
    });
    ((c / n).powi(2) + (s / n).powi(2)).sqrt().min(1.0)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AuditReport {
    /// Pairs the plain all-pairs test finds not disjoint.
    pub overlapping_pairs: Vec<(usize, usize)>,
    /// Particles for which the cell-list and all-pairs decisions differ.
    pub neighbour_mismatches: Vec<usize>,
    pub cells_consistent: bool,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.overlapping_pairs.is_empty() && self.neighbour_mismatches.is_empty() && self.cells_consistent
    }
}

/// O(N²) check of the hard-core condition and of the cell list.
pub fn audit(state: &MCState) -> AuditReport {
    let n = state.len();
    let mut report = AuditReport {
        cells_consistent: state.cells.is_consistent(&state.positions),
        ..Default::default()
    };
    for i in 0..n {
        for j in i + 1..n {
            let r = state.minimum_image(state.positions[j] - state.positions[i]);
            let v = overlap(
                state.shape(i),
                state.shape(j),
                state.orientations[i],
                state.orientations[j],
                r,
            )
            .unwrap_or(OverlapVerdict::Overlapping);
            if v != OverlapVerdict::Disjoint {
                report.overlapping_pairs.push((i, j));
            }
        }
        let (p, k) = (state.positions[i], state.orientations[i]);
        if state.fits_with_neighbours(i, p, k) != state.fits_brute_force(i, p, k) {
            report.neighbour_mismatches.push(i);
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub sweep: usize,
    pub positions: Vec<[f64; 2]>,
    pub orientations: Vec<[f64; 2]>,
    #[serde(rename = "S")]
    pub s: f64,
    pub acceptance: f64,
}

impl Snapshot {
    pub fn of(state: &MCState, sweep: usize) -> Self {
        Snapshot {
            sweep,
            positions: state.positions.iter().map(|p| [p.x, p.y]).collect(),
            orientations: state.orientations.iter().map(|k| [k.x(), k.y()]).collect(),
            s: order_parameter(&state.orientations),
            acceptance: state.stats.acceptance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub n_particles: usize,
    pub packing_fraction: f64,
    pub seed: u64,
    pub sweeps: usize,
    pub moves: u64,
    pub stats: MoveStats,
    pub acceptance: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub audits: usize,
    pub audit_failures: usize,
}

fn write_line<T: Serialize>(out: &mut Option<&mut dyn Write>, value: &T) -> Result<()> {
    let Some(w) = out.as_deref_mut() else {
        return Ok(());
    };
    let io = |e: std::io::Error| Error::Io(format!("writing trajectory: {e}"));
    serde_json::to_writer(&mut *w, value).map_err(|e| io(e.into()))?;
    w.write_all(b"\n").map_err(io)
}

#[derive(Serialize)]
struct SummaryRecord<'a> {
    summary: &'a RunSummary,
}

/// A seeded run: lattice start, `cfg.sweeps` sweeps, snapshots every
/// `cfg.sample_every` sweeps (and at sweep 0) written as JSON lines.
pub struct Simulation {
    pub cfg: MCConfig,
    pub state: MCState,
    rng: ChaCha8Rng,
}

impl Simulation {
    pub fn new(cfg: MCConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let state = init_state(&cfg, &mut rng)?;
        Ok(Simulation { cfg, state, rng })
    }

    pub fn sweep(&mut self) -> MoveStats {
        mc_sweep(&mut self.state, &self.cfg, &mut self.rng)
    }

    pub fn run(&mut self, audit_every_sweep: bool, mut out: Option<&mut dyn Write>) -> Result<RunSummary> {
        write_line(&mut out, &Snapshot::of(&self.state, 0))?;
        let (mut audits, mut failures) = (0, 0);
        for sweep in 1..=self.cfg.sweeps {
            self.sweep();
            if audit_every_sweep {
                audits += 1;
                if !audit(&self.state).passed() {
                    failures += 1;
                }
            }
            if sweep % self.cfg.sample_every == 0 {
                write_line(&mut out, &Snapshot::of(&self.state, sweep))?;
            }
        }
        let summary = RunSummary {
            n_particles: self.state.len(),
            packing_fraction: self.cfg.packing_fraction(),
            seed: self.cfg.seed,
            sweeps: self.cfg.sweeps,
            moves: self.state.moves,
            stats: self.state.stats,
            acceptance: self.state.stats.acceptance(),
            s: order_parameter(&self.state.orientations),
            audits,
            audit_failures: failures,
        };
        write_line(&mut out, &SummaryRecord { summary: &summary })?;
        Ok(summary)
    }
}
