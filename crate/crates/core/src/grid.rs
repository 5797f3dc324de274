//! Box discretizations of bounded open boxes in one to three dimensions.
//!
//! A [`GridSpec`] describes a cell-centered finite-volume grid: the box
//! `(origin_k, origin_k + shape_k * h)` per axis carries `shape_k` cells of
//! width `h`, and the node of cell `i` sits at its center
//! `origin_k + (i + 1/2) h`. The default cube constructor places the box at
//! `(-1/2, L - 1/2)^d` so that its decomposition into unit cells centered at
//! the integer lattice sites `0, ..., L-1` is exact.
//!
//! Points are padded `[f64; 3]` arrays; coordinates beyond the grid dimension
//! are zero and drop out of all formulas.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point in up to three dimensions, padded with zeros.
pub type Point = [f64; 3];

/// Cell-centered grid on an axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    shape: [usize; 3],
    spacing: f64,
    origin: [f64; 3],
}

impl GridSpec {
    /// Cube of side `n * h` with the canonical origin `-1/2` per axis.
    pub fn cube(dim: usize, cells: usize, spacing: f64) -> Result<Self> {
        let mut origin = [0.0; 3];
        origin[..dim].fill(-0.5);
        Self::boxed(dim, [cells; 3], spacing, origin)
    }

    /// General box with per-axis cell counts. Axes at and above `dim` are
    /// forced to a single cell and ignored geometrically.
    pub fn boxed(dim: usize, mut shape: [usize; 3], spacing: f64, origin: [f64; 3]) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Grid(format!("dimension {dim} not in 1..=3")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Grid(format!("spacing {spacing} must be positive")));
        }
        for k in 0..dim {
            if shape[k] == 0 {
                return Err(Error::Grid("empty axis".into()));
            }
        }
        for s in shape.iter_mut().skip(dim) {
            *s = 1;
        }
        Ok(GridSpec {
            dim,
            shape,
            spacing,
            origin,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    /// Number of cells along `axis`.
    pub fn cells(&self, axis: usize) -> usize {
        self.shape[axis]
    }

    /// Total number of nodes.
    pub fn node_count(&self) -> usize {
        self.shape[..self.dim].iter().product()
    }

    /// Side lengths of the box.
    pub fn side(&self, axis: usize) -> f64 {
        self.shape[axis] as f64 * self.spacing
    }

    /// Lebesgue volume of the box.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|k| self.side(k)).product()
    }

    /// True when every side length is an integer number of unit cells
    /// (within floating-point slack), which is what alloy-type fields and
    /// unit-cell decompositions require.
    pub fn has_integer_sides(&self) -> bool {
        (0..self.dim).all(|k| {
            let s = self.side(k);
            (s - s.round()).abs() < 1e-9 && s.round() >= 1.0
        })
    }

    /// Linear node index from per-axis cell indices (axis 0 fastest).
    pub fn node_index(&self, iv: [usize; 3]) -> usize {
        iv[0] + self.shape[0] * (iv[1] + self.shape[1] * iv[2])
    }

    /// Per-axis cell indices of a linear node index.
    pub fn node_iv(&self, index: usize) -> [usize; 3] {
        let i0 = index % self.shape[0];
        let rest = index / self.shape[0];
        let i1 = rest % self.shape[1];
        let i2 = rest / self.shape[1];
        [i0, i1, i2]
    }

    /// Position of a node (cell center).
    pub fn node_pos(&self, index: usize) -> Point {
        let iv = self.node_iv(index);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = self.origin[k] + (iv[k] as f64 + 0.5) * self.spacing;
        }
        x
    }

    /// Iterator over all node positions in index order.
    pub fn positions(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.node_count()).map(|i| self.node_pos(i))
    }

    /// Neighbor node in `+axis` direction, if inside the box.
    pub fn neighbor(&self, index: usize, axis: usize) -> Option<usize> {
        let iv = self.node_iv(index);
        if iv[axis] + 1 < self.shape[axis] {
            let mut jv = iv;
            jv[axis] += 1;
            Some(self.node_index(jv))
        } else {
            None
        }
    }

    /// Integer lattice site whose unit cell contains the node. Nodes of a
    /// grid with `1/h` integer never sit on cell boundaries, so the
    /// assignment is unambiguous there.
    pub fn node_site(&self, index: usize) -> [i64; 3] {
        let x = self.node_pos(index);
        let mut site = [0i64; 3];
        for k in 0..self.dim {
            site[k] = x[k].round() as i64;
        }
        site
    }

    /// All integer lattice sites whose unit cells intersect the open box,
    /// optionally enlarged by `halo` extra cells per side (for single-site
    /// profiles with support wider than one cell).
    pub fn lattice_sites(&self, halo: i64) -> Vec<[i64; 3]> {
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for k in 0..self.dim {
            // Unit cell of site j is the open cube (j - 1/2, j + 1/2).
            lo[k] = (self.origin[k] + 0.5).ceil() as i64 - halo;
            while (lo[k] as f64 - 0.5) > self.origin[k] + 1e-12 {
                lo[k] -= 1;
            }
            let top = self.origin[k] + self.side(k);
            hi[k] = (top - 0.5).floor() as i64 + halo;
            while (hi[k] as f64 + 0.5) < top - 1e-12 {
                hi[k] += 1;
            }
        }
        let mut sites = Vec::new();
        let range = |k: usize| -> std::ops::RangeInclusive<i64> {
            if k < self.dim {
                lo[k]..=hi[k]
            } else {
                0..=0
            }
        };
        for j2 in range(2) {
            for j1 in range(1) {
                for j0 in range(0) {
                    sites.push([j0, j1, j2]);
                }
            }
        }
        sites
    }

    /// Split the box into two along `axis` after `cells_left` cells.
    /// Returns the sub-boxes together with the parent node indices of each.
    pub fn bisect(&self, axis: usize, cells_left: usize) -> Result<(SubBox, SubBox)> {
        if axis >= self.dim {
            return Err(Error::Grid(format!("axis {axis} out of range")));
        }
        if cells_left == 0 || cells_left >= self.shape[axis] {
            return Err(Error::Grid("bisection must leave cells on both sides".into()));
        }
        let mut left_shape = self.shape;
        left_shape[axis] = cells_left;
        let mut right_shape = self.shape;
        right_shape[axis] = self.shape[axis] - cells_left;
        let mut right_origin = self.origin;
        right_origin[axis] += cells_left as f64 * self.spacing;

        let left = GridSpec::boxed(self.dim, left_shape, self.spacing, self.origin)?;
        let right = GridSpec::boxed(self.dim, right_shape, self.spacing, right_origin)?;

        let mut left_nodes = Vec::with_capacity(left.node_count());
        let mut right_nodes = Vec::with_capacity(right.node_count());
        // Sub-box node order must be the sub-grid's own index order.
        for sub_index in 0..left.node_count() {
            let iv = left.node_iv(sub_index);
            left_nodes.push(self.node_index(iv));
        }
        for sub_index in 0..right.node_count() {
            let mut iv = right.node_iv(sub_index);
            iv[axis] += cells_left;
            right_nodes.push(self.node_index(iv));
        }
        Ok((
            SubBox {
                grid: left,
                parent_nodes: left_nodes,
            },
            SubBox {
                grid: right,
                parent_nodes: right_nodes,
            },
        ))
    }

    /// Decompose a grid with integer sides and `1/h` integer into its unit
    /// cells, each returned as a sub-grid with the parent node indices.
    pub fn unit_cells(&self) -> Result<Vec<UnitCell>> {
        if !self.has_integer_sides() {
            return Err(Error::NonIntegerSide { side: self.side(0) });
        }
        let per_cell = (1.0 / self.spacing).round();
        if (1.0 / self.spacing - per_cell).abs() > 1e-9 || per_cell < 1.0 {
            return Err(Error::Grid(format!(
                "spacing {} does not divide the unit cell",
                self.spacing
            )));
        }
        let m = per_cell as usize;
        let mut cells = Vec::new();
        for site in self.lattice_sites(0) {
            let mut origin = [0.0; 3];
            let mut base_iv = [0usize; 3];
            for k in 0..self.dim {
                origin[k] = site[k] as f64 - 0.5;
                let offset = (origin[k] - self.origin[k]) / self.spacing;
                base_iv[k] = offset.round() as usize;
            }
            let grid = GridSpec::boxed(self.dim, [m; 3], self.spacing, origin)?;
            let mut parent_nodes = Vec::with_capacity(grid.node_count());
            for sub_index in 0..grid.node_count() {
                let sub_iv = grid.node_iv(sub_index);
                let mut iv = [0usize; 3];
                for k in 0..self.dim {
                    iv[k] = base_iv[k] + sub_iv[k];
                }
                parent_nodes.push(self.node_index(iv));
            }
            cells.push(UnitCell {
                site,
                sub: SubBox { grid, parent_nodes },
            });
        }
        Ok(cells)
    }

    /// True when the interiors of two boxes are disjoint.
    pub fn disjoint_from(&self, other: &GridSpec) -> bool {
        if self.dim != other.dim {
            return true;
        }
        for k in 0..self.dim {
            let (a0, a1) = (self.origin[k], self.origin[k] + self.side(k));
            let (b0, b1) = (other.origin[k], other.origin[k] + other.side(k));
            if a1 <= b0 + 1e-12 || b1 <= a0 + 1e-12 {
                return true;
            }
        }
        false
    }
}

/// A sub-box of a parent grid plus the parent node index of each sub-node.
#[derive(Debug, Clone)]
pub struct SubBox {
    pub grid: GridSpec,
    pub parent_nodes: Vec<usize>,
}

/// One unit cell of a unit-cell decomposition.
#[derive(Debug, Clone)]
pub struct UnitCell {
    pub site: [i64; 3],
    pub sub: SubBox,
}

/// Euclidean norm squared of a padded point.
pub fn norm_sq(x: Point) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

/// Difference of two padded points.
pub fn sub(x: Point, y: Point) -> Point {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}
