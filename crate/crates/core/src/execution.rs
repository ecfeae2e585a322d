//! Local and edge execution: times, CPU sharing, compute energy, and
//! slot feasibility.

use crate::error::SimError;

/// Where a vehicle's head task runs this slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionChoice {
    Local,
    Uav(usize),
    Bs,
    /// Task stays buffered and waits for the next slot.
    Defer,
}

/// Local execution time z / f.
pub fn local_time(cycles: f64, cpu: f64) -> f64 {
    cycles / cpu
}

/// Local compute energy mu * f^2 * z.
pub fn local_energy(cycles: f64, cpu: f64, mu: f64) -> f64 {
    mu * cpu * cpu * cycles
}

/// Equal CPU split among the tasks offloaded to one node.
pub fn cpu_share(capacity: f64, offload_count: usize) -> Result<f64, SimError> {
    if offload_count == 0 {
        return Err(SimError::Domain("cpu_share with zero offloaded tasks"));
    }
    Ok(capacity / offload_count as f64)
}

/// Edge execution time z / share.
pub fn mec_time(cycles: f64, share: f64) -> f64 {
    cycles / share
}

/// Whether the chosen execution fits in one slot. Local needs only the
/// compute time; offloading needs transmission plus execution; deferral
/// is trivially feasible.
pub fn slot_feasible(choice: ExecutionChoice, tx_seconds: f64, exec_seconds: f64, tau: f64) -> bool {
    match choice {
        ExecutionChoice::Local => exec_seconds <= tau,
        ExecutionChoice::Uav(_) | ExecutionChoice::Bs => tx_seconds + exec_seconds <= tau,
        ExecutionChoice::Defer => true,
    }
}
