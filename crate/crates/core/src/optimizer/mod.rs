//! Simulated annealing of film pairs under the spanning constraint.

mod anneal;
mod foam;
mod guard;
mod init;
mod mincut;
mod params;
mod state;

pub use anneal::{minimize_bulk, minimize_plateau, MinimizeResult, TraceRow};
pub use params::{AnnealParams, Objective};
pub use mincut::{
    ball_cells, competitor_cost, lambda_minimality_check, local_min_cut, local_perimeter, ball_core, smallest_lambda,
    MinimalityReport, EXHAUSTIVE_CELLS,
};
pub use foam::{foam_layout, foam_pair, foam_relax, FoamResult, LIQUID};
