//! Barotropic real Schur flow in a periodic 3D box.
//!
//! `u_h = (u1, u2)` depends on `(x1, x2)` only and lives on the horizontal
//! grid; `u3` is fully 3D. The momentum equations are
//! `∂t u_h + u_h·∇_h u_h = −∇_hΠ + ν∇²_h u_h` and
//! `∂t u3 + u_h·∇_h u3 + u3 ∂3 u3 = −∂3Π + ν∇²u3`, with `Π = c² ln ρ` and
//! continuity for `ρ`.

mod config;
mod integrate;
mod output;
mod rhs;
mod state;

pub use config::{Mode, SolverConfig};
pub use integrate::{
    cfl_dt, diagnostics, rsf_deviation, run, step_plan, step_rk4, Diagnostics, RunSummary,
    GRADIENT_LIMIT,
};
pub use output::{
    list_snapshots, read_diagnostics, simulate_to_dir, snapshot_name, CONFIG_FILE, DIAGNOSTICS_FILE,
};
pub use rhs::{pressure_function, pressure_residual, rhs, Tendencies};
pub use state::{
    broadcast, init_kinematic_tg, init_random, initial_state, x3_mean, FlowState, RHO_FLOOR,
};
