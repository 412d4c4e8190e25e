//! Uniform cell-centered grid, scalar fields and the simulation state.
//!
//! Fields are stored row-major with `x` as the fastest index, so cell `(i, j)`
//! lives at `j * nx + i`. Boundary handling is implicit: a neighbor outside
//! the domain is the cell itself (homogeneous Neumann, zero gradient).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub h: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2x2 cells, got {nx}x{ny}")));
        }
        if !(xmax > xmin && ymax > ymin) {
            return Err(Error::InvalidGrid("empty domain".into()));
        }
        let hx = (xmax - xmin) / nx as f64;
        let hy = (ymax - ymin) / ny as f64;
        if ((hx - hy) / hx).abs() > 1e-12 {
            return Err(Error::InvalidGrid(format!("cells are not square: hx={hx}, hy={hy}")));
        }
        Ok(Self { nx, ny, xmin, xmax, ymin, ymax, h: hx })
    }

    /// Square `n x n` grid on the default domain [-2, 2]^2.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, -2.0, 2.0, -2.0, 2.0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        if i >= self.nx || j >= self.ny {
            return Err(Error::IndexOutOfRange { i, j, nx: self.nx, ny: self.ny });
        }
        Ok(self.center_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn center_unchecked(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.xmin + (i as f64 + 0.5) * self.h,
            self.ymin + (j as f64 + 0.5) * self.h,
        )
    }

    /// Iterator over `(i, j, x, y)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).map(move |i| {
                let (x, y) = self.center_unchecked(i, j);
                (i, j, x, y)
            })
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    XMinus,
    XPlus,
    YMinus,
    YPlus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub min: f64,
    pub max: f64,
    pub mass: f64,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldSize { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = grid.cells().map(|(_, _, x, y)| f(x, y)).collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Neighbor value across the given face, mirroring the cell itself
    /// when the neighbor lies outside the domain.
    #[inline]
    pub fn neumann_neighbor(&self, i: usize, j: usize, dir: Direction) -> f64 {
        let g = &self.grid;
        let (ni, nj) = match dir {
            Direction::XMinus if i > 0 => (i - 1, j),
            Direction::XPlus if i + 1 < g.nx => (i + 1, j),
            Direction::YMinus if j > 0 => (i, j - 1),
            Direction::YPlus if j + 1 < g.ny => (i, j + 1),
            _ => (i, j),
        };
        self.values[g.index(ni, nj)]
    }

    /// Cell-average integral, `h^2 * sum(values)` summed in storage order.
    pub fn integrate(&self) -> f64 {
        let h2 = self.grid.h * self.grid.h;
        h2 * self.values.iter().sum::<f64>()
    }

    pub fn stats(&self) -> FieldStats {
        let (min, max) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        FieldStats { min, max, mass: self.integrate() }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Snapshot of all active species at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub m: ScalarField,
    pub p: ScalarField,
    pub v: ScalarField,
    /// Acidity; present only in the acidity-driven variant.
    pub h: Option<ScalarField>,
    pub t: f64,
}

impl SimState {
    pub fn new(m: ScalarField, p: ScalarField, v: ScalarField, h: Option<ScalarField>, t: f64) -> Result<Self> {
        let g = *m.grid();
        let same = |f: &ScalarField| *f.grid() == g;
        if !same(&p) || !same(&v) || h.as_ref().is_some_and(|f| !same(f)) {
            return Err(Error::InvalidGrid("state fields live on different grids".into()));
        }
        Ok(Self { m, p, v, h, t })
    }

    pub fn grid(&self) -> &Grid2D {
        self.m.grid()
    }

    /// Fields as `(name, field)` in the canonical species order m, p, v[, h].
    pub fn fields(&self) -> Vec<(&'static str, &ScalarField)> {
        let mut out = vec![("m", &self.m), ("p", &self.p), ("v", &self.v)];
        if let Some(h) = &self.h {
            out.push(("h", h));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|(_, f)| f.is_finite())
    }

    pub(crate) fn components(&self) -> Vec<Vec<f64>> {
        self.fields().iter().map(|(_, f)| f.values().to_vec()).collect()
    }

    pub(crate) fn from_components(grid: Grid2D, mut comps: Vec<Vec<f64>>, t: f64) -> Self {
        let h = if comps.len() > 3 { comps.pop() } else { None };
        let v = comps.pop().expect("v component");
        let p = comps.pop().expect("p component");
        let m = comps.pop().expect("m component");
        let wrap = |values| ScalarField { grid, values };
        Self { m: wrap(m), p: wrap(p), v: wrap(v), h: h.map(wrap), t }
    }
}
