//! Finite-volume spatial operators: MC-limited reconstruction, central-upwind
//! advective fluxes for the taxis terms, and the conservative 5-point
//! diffusion operator.
//!
//! The explicit part `E(w)` holds advection and reactions; the implicit part
//! is the diffusion operator, assembled as a sparse matrix.

use crate::error::{Error, Result};
use crate::grid::{Direction, Grid2D, ScalarField, SimState};
use crate::kinetics::{cell_reactions, diffusion_coeff, taxis_sensitivities, CellState, ModelConfig};
use crate::sparse::SparseOperator;

/// Values on cell faces: `x_edges` on the `(nx+1) x ny` vertical faces,
/// `y_edges` on the `nx x (ny+1)` horizontal faces.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeField {
    pub grid: Grid2D,
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
}

impl EdgeField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            x_edges: vec![0.0; (grid.nx + 1) * grid.ny],
            y_edges: vec![0.0; grid.nx * (grid.ny + 1)],
        }
    }

    /// Face left of cell `(i, j)`; `i == nx` is the right boundary.
    #[inline]
    pub fn x_index(&self, i: usize, j: usize) -> usize {
        j * (self.grid.nx + 1) + i
    }

    /// Face below cell `(i, j)`; `j == ny` is the top boundary.
    #[inline]
    pub fn y_index(&self, i: usize, j: usize) -> usize {
        j * self.grid.nx + i
    }

    pub fn max_abs(&self) -> f64 {
        self.x_edges.iter().chain(&self.y_edges).fold(0.0, |a, v| a.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    M,
    P,
    V,
    H,
}

impl Species {
    pub fn name(self) -> &'static str {
        match self {
            Species::M => "m",
            Species::P => "p",
            Species::V => "v",
            Species::H => "h",
        }
    }
}

#[inline]
fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Monotonized-central limited slope.
#[inline]
pub fn mc_slope(u_l: f64, u_c: f64, u_r: f64, h: f64) -> f64 {
    minmod3(2.0 * (u_c - u_l) / h, (u_r - u_l) / (2.0 * h), 2.0 * (u_r - u_c) / h)
}

/// Central-upwind flux for a flux linear in the transported density.
#[inline]
pub fn advective_flux(a: f64, m_minus: f64, m_plus: f64) -> f64 {
    a.max(0.0) * m_minus + a.min(0.0) * m_plus
}

#[inline]
pub(crate) fn cell_state(state: &SimState, k: usize) -> CellState {
    CellState {
        m: state.m.values()[k],
        p: state.p.values()[k],
        v: state.v.values()[k],
        h: state.h.as_ref().map(|h| h.values()[k]),
    }
}

/// Taxis velocity `chi1 grad v - chi2 grad q` on every interior face, with
/// `q = p` or `q = h` for the acidity variant. Boundary faces carry zero.
pub fn interface_velocity(state: &SimState, cfg: &ModelConfig) -> EdgeField {
    let g = *state.grid();
    let mut out = EdgeField::zeros(g);
    let v = state.v.values();
    let q = match (&state.h, cfg.has_acidity()) {
        (Some(h), true) => h.values(),
        _ => state.p.values(),
    };
    let velocity = |l: usize, r: usize| {
        let mean = CellState::mean(cell_state(state, l), cell_state(state, r));
        let (chi1, chi2) = taxis_sensitivities(mean.m, mean.p, mean.v, cfg);
        (chi1 * (v[r] - v[l]) - chi2 * (q[r] - q[l])) / g.h
    };
    for j in 0..g.ny {
        for i in 1..g.nx {
            let idx = out.x_index(i, j);
            out.x_edges[idx] = velocity(g.index(i - 1, j), g.index(i, j));
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let idx = out.y_index(i, j);
            out.y_edges[idx] = velocity(g.index(i, j - 1), g.index(i, j));
        }
    }
    out
}

/// `-div(a m)` with MC-reconstructed face states and central-upwind fluxes.
pub fn advection_divergence_with(m: &ScalarField, velocity: &EdgeField) -> ScalarField {
    let g = *m.grid();
    let h = g.h;
    let half = 0.5 * h;
    let mv = m.values();
    let slope = |i: usize, j: usize, lo: Direction, hi: Direction| {
        mc_slope(m.neumann_neighbor(i, j, lo), m.get(i, j), m.neumann_neighbor(i, j, hi), h)
    };
    let sx: Vec<f64> = g.cells().map(|(i, j, _, _)| slope(i, j, Direction::XMinus, Direction::XPlus)).collect();
    let sy: Vec<f64> = g.cells().map(|(i, j, _, _)| slope(i, j, Direction::YMinus, Direction::YPlus)).collect();

    let mut fx = vec![0.0; (g.nx + 1) * g.ny];
    for j in 0..g.ny {
        for i in 1..g.nx {
            let (l, r) = (g.index(i - 1, j), g.index(i, j));
            let idx = velocity.x_index(i, j);
            fx[idx] = advective_flux(velocity.x_edges[idx], mv[l] + half * sx[l], mv[r] - half * sx[r]);
        }
    }
    let mut fy = vec![0.0; g.nx * (g.ny + 1)];
    for j in 1..g.ny {
        for i in 0..g.nx {
            let (l, r) = (g.index(i, j - 1), g.index(i, j));
            let idx = velocity.y_index(i, j);
            fy[idx] = advective_flux(velocity.y_edges[idx], mv[l] + half * sy[l], mv[r] - half * sy[r]);
        }
    }
    let values = g
        .cells()
        .map(|(i, j, _, _)| {
            let dx = fx[velocity.x_index(i + 1, j)] - fx[velocity.x_index(i, j)];
            let dy = fy[velocity.y_index(i, j + 1)] - fy[velocity.y_index(i, j)];
            -(dx + dy) / h
        })
        .collect();
    ScalarField::from_values(g, values).expect("grid-sized")
}

pub fn advection_divergence(state: &SimState, cfg: &ModelConfig) -> ScalarField {
    advection_divergence_with(&state.m, &interface_velocity(state, cfg))
}

/// Assembles `L` with `(L u)_c = sum_faces D_face (u_nbr - u_c) / h^2`,
/// `D_face` the arithmetic mean of the two adjacent cell coefficients.
/// Boundary faces are dropped (zero flux).
pub fn diffusion_operator(state: &SimState, cfg: &ModelConfig, species: Species) -> Result<SparseOperator> {
    let g = *state.grid();
    let coeffs: Vec<f64> = match species {
        Species::M => (0..g.len())
            .map(|k| {
                let c = cell_state(state, k);
                diffusion_coeff(c.m, c.p, c.v, cfg)
            })
            .collect(),
        Species::H if cfg.has_acidity() && state.h.is_some() => vec![cfg.d_h; g.len()],
        other => return Err(Error::NonDiffusingSpecies(other.name())),
    };
    Ok(assemble_laplacian(&g, &coeffs))
}

/// Variable-coefficient 5-point Laplacian with homogeneous Neumann walls.
pub fn assemble_laplacian(g: &Grid2D, coeffs: &[f64]) -> SparseOperator {
    let inv_h2 = 1.0 / (g.h * g.h);
    let n = g.len();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(5 * n);
    let mut vals = Vec::with_capacity(5 * n);
    offsets.push(0);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let c = g.index(i, j);
            // columns ascending: below, left, center, right, above
            let below = (j > 0).then(|| c - g.nx);
            let left = (i > 0).then(|| c - 1);
            let right = (i + 1 < g.nx).then(|| c + 1);
            let above = (j + 1 < g.ny).then(|| c + g.nx);
            let weight = |n: usize| 0.5 * (coeffs[c] + coeffs[n]) * inv_h2;
            let mut diag = 0.0;
            for nb in [below, left].into_iter().flatten() {
                let w = weight(nb);
                diag -= w;
                cols.push(nb);
                vals.push(w);
            }
            let center = vals.len();
            cols.push(c);
            vals.push(0.0);
            for nb in [right, above].into_iter().flatten() {
                let w = weight(nb);
                diag -= w;
                cols.push(nb);
                vals.push(w);
            }
            vals[center] = diag;
            offsets.push(cols.len());
        }
    }
    SparseOperator::from_csr(n, offsets, cols, vals).expect("stencil columns in range")
}

/// Per-species time derivatives, one field per active species.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendencies {
    pub m: ScalarField,
    pub p: ScalarField,
    pub v: ScalarField,
    pub h: Option<ScalarField>,
}

impl Tendencies {
    pub(crate) fn into_components(self) -> Vec<Vec<f64>> {
        let mut out = vec![self.m.into_values(), self.p.into_values(), self.v.into_values()];
        if let Some(h) = self.h {
            out.push(h.into_values());
        }
        out
    }
}

/// Explicit part `E(w)`: taxis advection of `m` plus all reaction terms.
pub fn explicit_rhs(state: &SimState, cfg: &ModelConfig) -> Tendencies {
    explicit_rhs_with(state, cfg, &interface_velocity(state, cfg))
}

pub(crate) fn explicit_rhs_with(state: &SimState, cfg: &ModelConfig, velocity: &EdgeField) -> Tendencies {
    let g = *state.grid();
    let mut m = advection_divergence_with(&state.m, velocity).into_values();
    let n = g.len();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut h = state.h.as_ref().map(|_| vec![0.0; n]);
    for k in 0..n {
        let r = cell_reactions(cell_state(state, k), cfg);
        m[k] += r.m;
        p[k] = r.p;
        v[k] = r.v;
        if let (Some(hv), Some(rh)) = (h.as_mut(), r.h) {
            hv[k] = rh;
        }
    }
    let wrap = |values| ScalarField::from_values(g, values).expect("grid-sized");
    Tendencies { m: wrap(m), p: wrap(p), v: wrap(v), h: h.map(wrap) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{DiffusionKind, RateKind, SensitivityKind};
    use proptest::prelude::*;

    fn state_from(g: Grid2D, m: impl FnMut(f64, f64) -> f64, p: impl FnMut(f64, f64) -> f64, v: impl FnMut(f64, f64) -> f64) -> SimState {
        SimState::new(ScalarField::from_fn(g, m), ScalarField::from_fn(g, p), ScalarField::from_fn(g, v), None, 0.0)
            .unwrap()
    }

    #[test]
    fn slope_examples() {
        assert_eq!(mc_slope(0.0, 1.0, 2.0, 1.0), 1.0);
        assert_eq!(mc_slope(0.0, 1.0, 0.0, 1.0), 0.0);
        assert_eq!(mc_slope(0.0, 1.0, 4.0, 1.0), 2.0);
        assert_eq!(mc_slope(4.0, 1.0, 0.0, 1.0), -2.0);
    }

    #[test]
    fn flux_examples() {
        assert_eq!(advective_flux(1.0, 2.0, 5.0), 2.0);
        assert_eq!(advective_flux(-1.0, 2.0, 5.0), -5.0);
        assert_eq!(advective_flux(0.0, 2.0, 5.0), 0.0);
    }

    #[test]
    fn velocity_vanishes_for_uniform_fields() {
        let g = Grid2D::square(8).unwrap();
        let s = state_from(g, |x, _| 0.1 + 0.01 * x, |_, _| 0.3, |_, _| 0.5);
        let a = interface_velocity(&s, &ModelConfig::default());
        assert_eq!(a.max_abs(), 0.0);
    }

    #[test]
    fn velocity_of_linear_ecm() {
        let g = Grid2D::square(8).unwrap();
        let cfg = ModelConfig {
            sensitivity_kind: SensitivityKind::SimplifiedRational,
            c2: 0.0,
            ..Default::default()
        };
        // chi1 = c1 v/(1+v) is not constant, so check against the face mean directly
        let s = state_from(g, |_, _| 0.0, |_, _| 0.0, |x, _| 1.0 + 0.25 * x);
        let a = interface_velocity(&s, &cfg);
        for j in 0..g.ny {
            for i in 1..g.nx {
                let vm = 0.5 * (s.v.get(i - 1, j) + s.v.get(i, j));
                let expected = vm / (1.0 + vm) * 0.25;
                assert!((a.x_edges[a.x_index(i, j)] - expected).abs() < 1e-14);
            }
            assert_eq!(a.x_edges[a.x_index(0, j)], 0.0);
            assert_eq!(a.x_edges[a.x_index(g.nx, j)], 0.0);
        }
        assert!(a.y_edges.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn velocity_reference_face() {
        let g = Grid2D::new(2, 2, 0.0, 1.0, 0.0, 1.0).unwrap();
        let cfg = ModelConfig { sensitivity_kind: SensitivityKind::EquilibriumValues, ..Default::default() };
        let v = ScalarField::from_values(g, vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        let s = SimState::new(ScalarField::zeros(g), ScalarField::constant(g, 0.0), v, None, 0.0).unwrap();
        let a = interface_velocity(&s, &cfg);
        assert!((a.x_edges[a.x_index(1, 0)] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_velocity_gives_zero_divergence() {
        let g = Grid2D::square(8).unwrap();
        let m = ScalarField::from_fn(g, |x, y| (x * y).sin() + 1.0);
        assert!(advection_divergence_with(&m, &EdgeField::zeros(g)).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_cell_outflow() {
        let g = Grid2D::square(8).unwrap();
        let mut m = ScalarField::zeros(g);
        let (ci, cj) = (3, 4);
        m.values_mut()[g.index(ci, cj)] = 2.0;
        let mut a = EdgeField::zeros(g);
        for j in 0..g.ny {
            for i in 1..g.nx {
                let idx = a.x_index(i, j);
                a.x_edges[idx] = 0.7;
            }
        }
        let d = advection_divergence_with(&m, &a);
        let rate = 0.7 * 2.0 / g.h;
        assert!((d.get(ci, cj) + rate).abs() < 1e-12);
        assert!((d.get(ci + 1, cj) - rate).abs() < 1e-12);
        let others: f64 = d.values().iter().map(|v| v.abs()).sum::<f64>() - 2.0 * rate;
        assert!(others.abs() < 1e-12);
    }

    #[test]
    fn laplacian_stencil() {
        let g = Grid2D::new(5, 5, 0.0, 5.0, 0.0, 5.0).unwrap();
        let l = assemble_laplacian(&g, &vec![1.0; g.len()]);
        let mut u = vec![0.0; g.len()];
        u[g.index(2, 2)] = 1.0;
        let lu = l.mul_vec(&u);
        assert_eq!(lu[g.index(2, 2)], -4.0);
        for (i, j) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
            assert_eq!(lu[g.index(i, j)], 1.0);
        }
        assert!(l.mul_vec(&vec![3.5; g.len()]).iter().all(|v| v.abs() < 1e-14));
        assert!(l.row_sums().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn laplacian_exact_on_linear_interior() {
        let g = Grid2D::square(16).unwrap();
        let l = assemble_laplacian(&g, &vec![0.3; g.len()]);
        let u: Vec<f64> = g.cells().map(|(_, _, x, _)| x).collect();
        let lu = l.mul_vec(&u);
        for (i, j, _, _) in g.cells() {
            if i > 0 && i + 1 < g.nx {
                assert!(lu[g.index(i, j)].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diffusion_operator_symmetric_for_random_states() {
        let g = Grid2D::square(8).unwrap();
        let mut rng = crate::ecm::SplitMix64::new(11);
        for _ in 0..5 {
            let vals = |rng: &mut crate::ecm::SplitMix64| (0..g.len()).map(|_| rng.next_f64()).collect::<Vec<_>>();
            let s = SimState::new(
                ScalarField::from_values(g, vals(&mut rng)).unwrap(),
                ScalarField::from_values(g, vals(&mut rng)).unwrap(),
                ScalarField::from_values(g, vals(&mut rng)).unwrap(),
                None,
                0.0,
            )
            .unwrap();
            let l = diffusion_operator(&s, &ModelConfig::default(), Species::M).unwrap();
            assert_eq!(l.asymmetry(), 0.0);
            assert!(l.row_sums().iter().all(|v| v.abs() < 1e-15));
            assert!((0..l.dim()).all(|r| l.row(r).count() <= 5));
        }
        let s = state_from(g, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0);
        assert!(matches!(diffusion_operator(&s, &ModelConfig::default(), Species::P), Err(Error::NonDiffusingSpecies("p"))));
        assert!(diffusion_operator(&s, &ModelConfig::default(), Species::H).is_err());
    }

    #[test]
    fn explicit_rhs_examples() {
        let g = Grid2D::square(8).unwrap();
        let cfg = ModelConfig::default();
        // m = 0: advection vanishes, Em = lambda p
        let s = state_from(g, |_, _| 0.0, |x, y| 0.5 + 0.1 * (x + y).sin(), |x, _| 0.3 + 0.05 * x);
        let e = explicit_rhs(&s, &cfg);
        for k in 0..g.len() {
            assert!((e.m.values()[k] - 0.01 * s.p.values()[k]).abs() < 1e-15);
        }
        // all rates zero, uniform fields
        let idle = ModelConfig { lambda0: 0.0, gamma0: 0.0, mu: 0.0, mu_v: 0.0, delta: 0.0, ..Default::default() };
        let s = state_from(g, |_, _| 0.2, |_, _| 0.3, |_, _| 0.4);
        let e = explicit_rhs(&s, &idle);
        assert!(e.into_components().iter().flatten().all(|&v| v == 0.0));
        // uniform reaction fixed point: m = p = 0, v = 1
        let s = state_from(g, |_, _| 0.0, |_, _| 0.0, |_, _| 1.0);
        let e = explicit_rhs(&s, &ModelConfig { rate_kind: RateKind::Dynamic, ..Default::default() });
        assert!(e.into_components().iter().flatten().all(|&v| v == 0.0));
        let _ = DiffusionKind::Constant;
    }

    proptest! {
        #[test]
        fn reconstruction_within_neighbor_range(l in -5.0f64..5.0, c in -5.0f64..5.0, r in -5.0f64..5.0, h in 0.01f64..2.0) {
            let s = mc_slope(l, c, r, h);
            let lo = l.min(c).min(r);
            let hi = l.max(c).max(r);
            for face in [c + 0.5 * h * s, c - 0.5 * h * s] {
                prop_assert!(face >= lo - 1e-12 && face <= hi + 1e-12);
            }
        }

        #[test]
        fn advection_telescopes(seed in 0u64..500) {
            let g = Grid2D::square(12).unwrap();
            let mut rng = crate::ecm::SplitMix64::new(seed);
            let mut vals = || (0..g.len()).map(|_| rng.next_f64()).collect::<Vec<_>>();
            let s = SimState::new(
                ScalarField::from_values(g, vals()).unwrap(),
                ScalarField::from_values(g, vals()).unwrap(),
                ScalarField::from_values(g, vals()).unwrap(),
                None,
                0.0,
            ).unwrap();
            let d = advection_divergence(&s, &ModelConfig::default());
            let scale: f64 = d.values().iter().map(|v| v.abs()).sum::<f64>() * g.h * g.h;
            prop_assert!(d.integrate().abs() <= 1e-12 * scale.max(1e-300));
        }
    }
}
