//! Initial conditions and the randomly structured ECM generator.
//!
//! The random ECM starts from a coarse matrix of uniform draws and is refined
//! by repeated doubling. Each fine value is the mean of the 2x2 periodic
//! coarse neighborhood times a multiplicative noise factor of +-0.1%.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, SimState};

/// SplitMix64 generator. The stream is part of the output contract, so the
/// algorithm is fixed here rather than delegated to a crate whose stream
/// could change between versions.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Square matrix of ECM densities, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CoarseMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::InvalidArgument(format!("matrix of side {n} needs {} values", n * n)));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    /// One doubling step. `noise(idx)` returns the multiplicative factor for
    /// fine cell `idx` (visited in row-major order).
    pub fn refine_with(&self, mut noise: impl FnMut() -> f64) -> Self {
        let n = self.n;
        let fine = 2 * n;
        let mut values = Vec::with_capacity(fine * fine);
        for j in 0..fine {
            let cj = j / 2;
            let cj1 = (cj + 1) % n;
            for i in 0..fine {
                let ci = i / 2;
                let ci1 = (ci + 1) % n;
                let mean = 0.25 * (self.get(ci, cj) + self.get(ci1, cj) + self.get(ci, cj1) + self.get(ci1, cj1));
                values.push(noise() * mean);
            }
        }
        Self { n: fine, values }
    }

    /// Affine map of the values onto `[lo, hi]`; a constant matrix maps to `lo`.
    pub fn rescaled(&self, lo: f64, hi: f64) -> Self {
        let (min, max) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = max - min;
        let values = self
            .values
            .iter()
            .map(|&v| if span > 0.0 { lo + (hi - lo) * (v - min) / span } else { lo })
            .collect();
        Self { n: self.n, values }
    }

    /// Value at the matrix cell nearest to solver cell `(i, j)` of an
    /// `nx x ny` grid.
    pub fn sample_nearest(&self, i: usize, j: usize, nx: usize, ny: usize) -> f64 {
        let si = (((i as f64 + 0.5) * self.n as f64 / nx as f64) as usize).min(self.n - 1);
        let sj = (((j as f64 + 0.5) * self.n as f64 / ny as f64) as usize).min(self.n - 1);
        self.get(si, sj)
    }
}

/// Relative amplitude of the refinement noise: factors lie in [0.999, 1.001).
pub const ECM_NOISE_AMPLITUDE: f64 = 0.002;

/// Number of doublings taking `coarse_n` to `target_n`, if any.
fn refinement_levels(coarse_n: usize, target_n: usize) -> Option<u32> {
    if coarse_n == 0 || target_n < coarse_n || !target_n.is_multiple_of(coarse_n) {
        return None;
    }
    let ratio = target_n / coarse_n;
    ratio.is_power_of_two().then(|| ratio.trailing_zeros())
}

pub fn generate_random_ecm(seed: u64, coarse_n: usize, target_n: usize) -> Result<CoarseMatrix> {
    generate_random_ecm_with_noise(seed, coarse_n, target_n, ECM_NOISE_AMPLITUDE)
}

/// As [`generate_random_ecm`] with a configurable noise amplitude. The draw
/// order is identical for every amplitude: coarse values first, then one draw
/// per fine cell, level by level, row-major.
pub fn generate_random_ecm_with_noise(
    seed: u64,
    coarse_n: usize,
    target_n: usize,
    amplitude: f64,
) -> Result<CoarseMatrix> {
    let levels = refinement_levels(coarse_n, target_n).ok_or_else(|| {
        Error::InvalidArgument(format!("{target_n} is not reachable from {coarse_n} by doubling"))
    })?;
    let mut rng = SplitMix64::new(seed);
    let values = (0..coarse_n * coarse_n).map(|_| rng.next_f64()).collect();
    let mut matrix = CoarseMatrix::new(coarse_n, values)?;
    for _ in 0..levels {
        matrix = matrix.refine_with(|| 1.0 + amplitude * (rng.next_f64() - 0.5));
    }
    Ok(matrix)
}

/// Initial tumor: Gaussian PCC mass with a 5% MCC fraction.
fn gaussian_tumor(x: f64, y: f64, eps: f64) -> f64 {
    (-(x * x + y * y) / eps).exp()
}

/// ECM with two tissue-free stripes (`|x| < 0.05` and `|y - x| < 0.1`).
///
/// `v0 = 1 - m0 - p0` floored at zero; near the tumor center `m0 + p0`
/// slightly exceeds one.
pub fn ic_stripes(grid: &Grid2D, eps: f64) -> SimState {
    let p0 = ScalarField::from_fn(*grid, |x, y| {
        if x.abs() < 0.05 || (y - x).abs() < 0.1 {
            0.0
        } else {
            gaussian_tumor(x, y, eps)
        }
    });
    let m0 = scaled(&p0, 0.05);
    let v0 = ScalarField::from_values(
        *grid,
        m0.values().iter().zip(p0.values()).map(|(m, p)| (1.0 - m - p).max(0.0)).collect(),
    )
    .expect("same grid");
    SimState { m: m0, p: p0, v: v0, h: None, t: 0.0 }
}

/// Gaussian tumor on a randomly structured ECM rescaled to `v_range` and
/// capped so that `m0 + p0 + v0 <= 1`.
pub fn ic_random(grid: &Grid2D, seed: u64, eps: f64, v_range: (f64, f64)) -> Result<SimState> {
    let target = ecm_resolution(grid.nx.max(grid.ny));
    let ecm = generate_random_ecm(seed, 8, target)?.rescaled(v_range.0, v_range.1);
    let p0 = ScalarField::from_fn(*grid, |x, y| gaussian_tumor(x, y, eps));
    let m0 = scaled(&p0, 0.05);
    let v0: Vec<f64> = grid
        .cells()
        .map(|(i, j, _, _)| {
            let k = grid.index(i, j);
            let cap = 1.0 - m0.values()[k] - p0.values()[k];
            ecm.sample_nearest(i, j, grid.nx, grid.ny).min(cap).max(0.0)
        })
        .collect();
    let v0 = ScalarField::from_values(*grid, v0)?;
    Ok(SimState { m: m0, p: p0, v: v0, h: None, t: 0.0 })
}

/// Smallest `8 * 2^k` that is at least `n`.
pub fn ecm_resolution(n: usize) -> usize {
    let mut target = 8;
    while target < n {
        target *= 2;
    }
    target
}

fn scaled(f: &ScalarField, factor: f64) -> ScalarField {
    ScalarField::from_values(*f.grid(), f.values().iter().map(|v| factor * v).collect()).expect("same grid")
}
