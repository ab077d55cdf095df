//! Uniform cell list on a periodic box.

use crate::types::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub struct CellList {
    pub nx: usize,
    pub ny: usize,
    box_size: [f64; 2],
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl CellList {
    /// Cells at least `min_size` wide covering the box.
    pub fn new(box_size: [f64; 2], min_size: f64, positions: &[Vec2]) -> Self {
        let nx = ((box_size[0] / min_size).floor() as usize).max(1);
        let ny = ((box_size[1] / min_size).floor() as usize).max(1);
        let mut list = CellList {
            nx,
            ny,
            box_size,
            cells: vec![Vec::new(); nx * ny],
            cell_of: Vec::with_capacity(positions.len()),
        };
        for (i, &p) in positions.iter().enumerate() {
            let c = list.cell_index(p);
            list.cells[c].push(i);
            list.cell_of.push(c);
        }
        list
    }

    pub fn cell_index(&self, p: Vec2) -> usize {
        let cx = ((p.x / self.box_size[0] * self.nx as f64).floor() as usize).min(self.nx - 1);
        let cy = ((p.y / self.box_size[1] * self.ny as f64).floor() as usize).min(self.ny - 1);
        cy * self.nx + cx
    }

    pub fn cell_of(&self, i: usize) -> usize {
        self.cell_of[i]
    }

    pub fn members(&self, cell: usize) -> &[usize] {
        &self.cells[cell]
    }

    pub fn relocate(&mut self, i: usize, p: Vec2) {
        let new = self.cell_index(p);
        let old = self.cell_of[i];
        if new == old {
            return;
        }
        let slot = &mut self.cells[old];
        let at = slot
            .iter()
            .position(|&j| j == i)
            .expect("particle missing from its cell");
        slot.swap_remove(at);
        self.cells[new].push(i);
        self.cell_of[i] = new;
    }

    /// The cell of `p` and its eight periodic neighbours, each once.
    pub fn neighbour_cells(&self, p: Vec2) -> Vec<usize> {
        let c = self.cell_index(p);
        let (cx, cy) = ((c % self.nx) as isize, (c / self.nx) as isize);
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let mut out = Vec::with_capacity(9);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let x = (cx + dx).rem_euclid(nx);
                let y = (cy + dy).rem_euclid(ny);
                out.push((y * nx + x) as usize);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Every particle sits in exactly one cell, the one its position maps to.
    pub fn is_consistent(&self, positions: &[Vec2]) -> bool {
        let mut seen = vec![0usize; positions.len()];
        for (c, members) in self.cells.iter().enumerate() {
            for &i in members {
                if i >= positions.len() || self.cell_of[i] != c {
                    return false;
                }
                seen[i] += 1;
            }
        }
        seen.iter().all(|&k| k == 1)
            && positions
                .iter()
                .enumerate()
                .all(|(i, &p)| self.cell_index(p) == self.cell_of[i])
    }
}
