//! Grid sweeps over `[0, pi/2]^N` and coordinate-descent refinement.
//!
//! Reductions are ordered by `(value, grid index)` so results do not depend
//! on how rayon splits the work.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

/// Regular grid with `resolution` points per axis, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleGrid {
    pub dims: usize,
    pub resolution: usize,
}

impl AngleGrid {
    pub fn new(dims: usize, resolution: usize) -> Self {
        assert!(resolution >= 2, "grid needs at least the two endpoints");
        Self { dims, resolution }
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        FRAC_PI_2 / (self.resolution - 1) as f64
    }

    pub fn axis_value(&self, k: usize) -> f64 {
        if k + 1 == self.resolution {
            FRAC_PI_2
        } else {
            k as f64 * self.spacing()
        }
    }

    /// Per-axis indices of flat index `idx`; the first axis varies slowest.
    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims];
        for slot in out.iter_mut().rev() {
            *slot = idx % self.resolution;
            idx /= self.resolution;
        }
        out
    }

    pub fn flat(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.resolution + c)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.coords(idx)
            .into_iter()
            .map(|k| self.axis_value(k))
            .collect()
    }

    /// Flat indices of the axis neighbours of `idx`.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let coords = self.coords(idx);
        let mut out = Vec::with_capacity(2 * self.dims);
        for axis in 0..self.dims {
            for delta in [-1isize, 1] {
                let k = coords[axis] as isize + delta;
                if k >= 0 && (k as usize) < self.resolution {
                    let mut c = coords.clone();
                    c[axis] = k as usize;
                    out.push(self.flat(&c));
                }
            }
        }
        out
    }

    /// `f` at every grid point, in flat-index order.
    pub fn evaluate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|idx| f(&self.point(idx)))
            .collect()
    }

    /// Smallest value and the first flat index attaining it.
    pub fn argmin<F>(&self, f: F) -> (f64, usize)
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|idx| (f(&self.point(idx)), idx))
            .reduce(|| (f64::INFINITY, usize::MAX), pick_min)
    }
}

fn pick_min(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Grid points that are no larger than any of their axis neighbours,
/// sorted by value then index.
pub fn local_minima(grid: &AngleGrid, values: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = (0..values.len())
        .filter(|&idx| {
            grid.neighbors(idx)
                .into_iter()
                .all(|n| values[idx] <= values[n])
        })
        .collect();
    out.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refinement {
    pub rounds: usize,
    pub initial_step: f64,
    pub shrink: f64,
    /// Cap on accepted moves per round.
    pub max_moves: usize,
}

impl Refinement {
    /// Three rounds starting at half the grid spacing, shrinking tenfold.
    pub fn for_grid(grid: &AngleGrid) -> Self {
        Self {
            rounds: 3,
            initial_step: grid.spacing() / 2.0,
            shrink: 0.1,
            max_moves: 500,
        }
    }
}

/// Minimizes `f` over the box `[0, pi/2]^N` from `start` by axis moves of
/// shrinking size. Returns the best value and point.
pub fn coordinate_descent<F>(f: F, start: &[f64], cfg: &Refinement) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = start.to_vec();
    let mut best = f(&x);
    let mut step = cfg.initial_step;
    for _ in 0..cfg.rounds {
        for _ in 0..cfg.max_moves {
            let mut candidate: Option<(f64, Vec<f64>)> = None;
            for axis in 0..x.len() {
                for dir in [-1.0, 1.0] {
                    let mut y = x.clone();
                    y[axis] = (y[axis] + dir * step).clamp(0.0, FRAC_PI_2);
                    if y[axis] == x[axis] {
                        continue;
                    }
                    let v = f(&y);
                    if v < candidate.as_ref().map_or(best, |c| c.0) {
                        candidate = Some((v, y));
                    }
                }
            }
            match candidate {
                Some((v, y)) => {
                    best = v;
                    x = y;
                }
                None => break,
            }
        }
        step *= cfg.shrink;
    }
    (best, x)
}
