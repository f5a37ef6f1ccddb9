//! Fixed-step simulation, settling detection and the transformed-time oracle.

mod engine;
mod oracle;
mod settling;
mod trace;

pub use engine::{
    apply_gain_cap, euler_simulate, guarded_switch_elapsed, tbg_euler_limit, Cap, SimConfig, DEFAULT_DT,
    DIVERGENCE_LIMIT,
};
pub use oracle::{default_tau_max, eps_mismatch, tau_oracle, EpsMismatch, OracleRun, TauOracleState, DEFAULT_DTAU};
pub use settling::{detect_settling, settling_time, SETTLING_BAND, SETTLING_HOLD};
pub use trace::{Trace, TraceRecord, CSV_HEADER};
