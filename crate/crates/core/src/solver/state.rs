//! Solver state: `u_h` on the horizontal grid, `u3` on the 3D grid and a
//! density that is 2D (constrained, kinematic) or 3D (free).

use std::f64::consts::TAU;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Mode, SolverConfig};
use crate::fields::{band_limited_random, Grid, ScalarField, TrigField, TrigPoly, VectorField};
use crate::{Error, Result};

/// Initial density floor.
pub const RHO_FLOOR: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    grid3: Grid,
    grid2: Grid,
    u_h: VectorField,
    u3: ScalarField,
    rho: ScalarField,
    time: f64,
    steps: usize,
}

/// Repeats a horizontal field along x3.
pub fn broadcast(f2: &ScalarField, grid3: &Grid) -> ScalarField {
    let n3 = grid3.dims()[2];
    let mut out = Vec::with_capacity(grid3.len());
    for &v in f2.values() {
        out.extend(std::iter::repeat_n(v, n3));
    }
    ScalarField::from_raw(grid3.clone(), out)
}

/// Average over x3 of a 3D field.
pub fn x3_mean(f3: &ScalarField, grid2: &Grid) -> ScalarField {
    let n3 = f3.grid().dims()[2];
    let values = f3
        .values()
        .chunks(n3)
        .map(|col| col.iter().sum::<f64>() / n3 as f64)
        .collect();
    ScalarField::from_raw(grid2.clone(), values)
}

/// Samples `p` with integer wavenumbers mapped onto the box, so any box
/// length stays periodic.
fn sample_on(p: &TrigPoly, grid: &Grid) -> Result<ScalarField> {
    let unit = Grid::new(grid.dims().to_vec(), vec![TAU; grid.dim()])?;
    ScalarField::new(grid.clone(), p.sample(&unit)?.into_values())
}

impl FlowState {
    pub fn new(u_h: VectorField, u3: ScalarField, rho: ScalarField, time: f64) -> Result<Self> {
        let grid3 = u3.grid().clone();
        if grid3.dim() != 3 {
            return Err(Error::DimensionMismatch("u3 must live on a 3D grid".into()));
        }
        let grid2 = grid3.leading(2)?;
        if u_h.ncomp() != 2 || u_h.grid() != &grid2 {
            return Err(Error::DimensionMismatch(
                "u_h must have 2 components on the horizontal grid".into(),
            ));
        }
        if rho.grid() != &grid2 && rho.grid() != &grid3 {
            return Err(Error::GridMismatch);
        }
        check_density(&rho, time)?;
        Ok(FlowState {
            grid3,
            grid2,
            u_h,
            u3,
            rho,
            time,
            steps: 0,
        })
    }

    /// `u = 0`, `ρ = 1`; density layout chosen by `mode`.
    pub fn rest(grid3: &Grid, mode: Mode) -> Result<Self> {
        let grid2 = grid3.leading(2)?;
        let rho_grid = if mode == Mode::Free { grid3 } else { &grid2 };
        Self::new(
            VectorField::zeros(&grid2, 2),
            ScalarField::zeros(grid3),
            ScalarField::constant(rho_grid, 1.0),
            0.0,
        )
    }

    pub fn grid3(&self) -> &Grid {
        &self.grid3
    }

    pub fn grid2(&self) -> &Grid {
        &self.grid2
    }

    pub fn u_h(&self) -> &VectorField {
        &self.u_h
    }

    pub fn u3(&self) -> &ScalarField {
        &self.u3
    }

    pub fn rho(&self) -> &ScalarField {
        &self.rho
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Completed time steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn density_is_3d(&self) -> bool {
        self.rho.grid().dim() == 3
    }

    pub fn rho3(&self) -> ScalarField {
        if self.density_is_3d() {
            self.rho.clone()
        } else {
            broadcast(&self.rho, &self.grid3)
        }
    }

    /// `(u1, u2, u3)` on the 3D grid.
    pub fn velocity3(&self) -> VectorField {
        VectorField::new(vec![
            broadcast(self.u_h.component(0), &self.grid3),
            broadcast(self.u_h.component(1), &self.grid3),
            self.u3.clone(),
        ])
        .expect("shared grid")
    }

    /// `(u1, u2, u3, ρ)` on the 3D grid, the snapshot layout.
    pub fn assembled(&self) -> VectorField {
        let mut comps = self.velocity3().into_components();
        comps.push(self.rho3());
        VectorField::new(comps).expect("shared grid")
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub(crate) fn pack(&self) -> Vec<f64> {
        let mut v =
            Vec::with_capacity(2 * self.grid2.len() + self.grid3.len() + self.rho.grid().len());
        for c in self.u_h.components() {
            v.extend_from_slice(c.values());
        }
        v.extend_from_slice(self.u3.values());
        v.extend_from_slice(self.rho.values());
        v
    }

    /// Same layout as `self`, values from `packed`. Values must be finite.
    pub(crate) fn with_packed(&self, packed: &[f64], time: f64, steps: usize) -> FlowState {
        let n2 = self.grid2.len();
        let n3 = self.grid3.len();
        let f = |g: &Grid, s: &[f64]| ScalarField::from_raw(g.clone(), s.to_vec());
        FlowState {
            grid3: self.grid3.clone(),
            grid2: self.grid2.clone(),
            u_h: VectorField::new(vec![
                f(&self.grid2, &packed[..n2]),
                f(&self.grid2, &packed[n2..2 * n2]),
            ])
            .expect("shared grid"),
            u3: f(&self.grid3, &packed[2 * n2..2 * n2 + n3]),
            rho: f(self.rho.grid(), &packed[2 * n2 + n3..]),
            time,
            steps,
        }
    }
}

pub(crate) fn check_density(rho: &ScalarField, time: f64) -> Result<()> {
    match rho.values().iter().position(|&r| r <= 0.0 || r.is_nan()) {
        Some(node) => Err(Error::NonPositiveDensity {
            node,
            value: rho.values()[node],
            time,
        }),
        None => Ok(()),
    }
}

/// Random RSF data: band-limited `u_h(x1, x2)`, band-limited `u3(x)`, and
/// `ρ = 1 + amplitude·δ` clipped at [`RHO_FLOOR`]. All fields have unit RMS
/// before scaling. The density is 3D in free mode and 2D otherwise. Returns
/// the state and the number of clipped density nodes.
pub fn init_random(
    grid3: &Grid,
    seed: u64,
    kmax: i32,
    amplitude: f64,
    mode: Mode,
) -> Result<(FlowState, usize)> {
    if kmax < 1 {
        return Err(Error::Config("kmax must be at least 1".into()));
    }
    let grid2 = grid3.leading(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = || rng.next_u64();
    let horizontal = [true, true];
    let u1 = sample_on(&band_limited_random(next(), kmax, &horizontal), &grid2)?;
    let u2 = sample_on(&band_limited_random(next(), kmax, &horizontal), &grid2)?;
    let u3 = sample_on(&band_limited_random(next(), kmax, &[true; 3]), grid3)?;
    let rho_seed = next();
    let delta = if mode == Mode::Free {
        sample_on(&band_limited_random(rho_seed, kmax, &[true; 3]), grid3)?
    } else {
        sample_on(&band_limited_random(rho_seed, kmax, &horizontal), &grid2)?
    };
    let scale = |f: ScalarField| f.map(|v| amplitude * v);
    let mut clipped = 0;
    let rho = delta.map(|v| 1.0 + amplitude * v);
    let rho = ScalarField::new(
        rho.grid().clone(),
        rho.values()
            .iter()
            .map(|&r| {
                if r < RHO_FLOOR {
                    clipped += 1;
                    RHO_FLOOR
                } else {
                    r
                }
            })
            .collect(),
    )?;
    let state = FlowState::new(
        VectorField::new(vec![scale(u1), scale(u2)])?,
        scale(u3),
        rho,
        0.0,
    )?;
    Ok((state, clipped))
}

/// Steady Taylor–Green `u_h`, `ρ = 1`, band-limited `u3` of the given
/// amplitude.
pub fn init_kinematic_tg(grid3: &Grid, seed: u64, kmax: i32, amplitude: f64) -> Result<FlowState> {
    let grid2 = grid3.leading(2)?;
    let tg = TrigField::taylor_green_2d();
    let u_h = tg
        .components()
        .iter()
        .map(|c| sample_on(c, &grid2))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.next_u64();
    rng.next_u64();
    let u3 = sample_on(
        &band_limited_random(rng.next_u64(), kmax, &[true; 3]),
        grid3,
    )?
    .map(|v| amplitude * v);
    FlowState::new(
        VectorField::new(u_h)?,
        u3,
        ScalarField::constant(&grid2, 1.0),
        0.0,
    )
}

/// Initial state for `config`, with the clipped-node count.
pub fn initial_state(config: &SolverConfig) -> Result<(FlowState, usize)> {
    let grid3 = config.grid3()?;
    match config.mode {
        Mode::KinematicTg => Ok((
            init_kinematic_tg(&grid3, config.seed, config.kmax, config.amplitude)?,
            0,
        )),
        mode => init_random(&grid3, config.seed, config.kmax, config.amplitude, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::divergence;
    use crate::rsf::{check_rsf, zero_pattern};

    #[test]
    fn zero_amplitude_is_rest() {
        let g = Grid::cube(3, 8).unwrap();
        let (s, clipped) = init_random(&g, 3, 2, 0.0, Mode::Constrained).unwrap();
        assert_eq!(clipped, 0);
        assert_eq!(s, FlowState::rest(&g, Mode::Constrained).unwrap());
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let g = Grid::new(vec![16, 16, 8], vec![TAU; 3]).unwrap();
        let a = init_random(&g, 5, 2, 0.3, Mode::Free).unwrap();
        let b = init_random(&g, 5, 2, 0.3, Mode::Free).unwrap();
        assert_eq!(a, b);
        assert!(a.0.density_is_3d());
        assert_ne!(a.0, init_random(&g, 6, 2, 0.3, Mode::Free).unwrap().0);
    }

    #[test]
    fn random_rsf_field_is_general() {
        let g = Grid::cube(3, 16).unwrap();
        let (s, _) = init_random(&g, 7, 2, 0.1, Mode::Constrained).unwrap();
        assert_eq!(check_rsf(&s.velocity3(), &zero_pattern(3)).unwrap(), 0.0);
        assert!(divergence(s.u_h()).unwrap().max_abs() > 1e-3);
    }

    #[test]
    fn large_amplitude_clips_density() {
        let g = Grid::cube(3, 16).unwrap();
        let (s, clipped) = init_random(&g, 1, 2, 5.0, Mode::Constrained).unwrap();
        assert!(clipped > 0);
        assert!(s.rho().values().iter().all(|&r| r >= RHO_FLOOR));
    }

    #[test]
    fn pack_round_trip() {
        let g = Grid::new(vec![8, 8, 16], vec![TAU; 3]).unwrap();
        let (s, _) = init_random(&g, 2, 1, 0.2, Mode::Constrained).unwrap();
        let p = s.pack();
        assert_eq!(s.with_packed(&p, s.time(), 0), s);
        assert_eq!(s.assembled().ncomp(), 4);
        let back = x3_mean(&broadcast(s.rho(), &g), s.grid2());
        assert!(back.zip_with(s.rho(), |a, b| a - b).unwrap().max_abs() < 1e-15);
    }
}
