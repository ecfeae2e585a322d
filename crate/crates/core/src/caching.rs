//! Cached-data indicators and ages at vehicles and UAVs.
//!
//! An entry's age starts at 1 when fetched, grows by 1 per slot while
//! kept, and becomes undefined when deleted. `None` is the UNCACHED
//! sentinel, so the indicator matrix c and the age matrix A can never
//! disagree.

use alloc::format;
use alloc::vec::Vec;

use crate::error::SimError;
use crate::util::Grid;

/// Age of one cache entry in slots; `None` means not cached.
pub type CacheAge = Option<u32>;

/// Node addressing for cache queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeId {
    Vehicle(usize),
    Uav(usize),
    Bs,
}

/// Result of an age lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgeLookup {
    /// Cached, with an age in slots (>= 1).
    Slots(u32),
    /// Not cached at this node.
    Uncached,
    /// BS data is always fresh: age 0.
    ZeroAtBs,
}

/// Per-node cached-task ages: N x W for vehicles, M x W for UAVs.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheState {
    pub veh: Grid<CacheAge>,
    pub uav: Grid<CacheAge>,
}

impl CacheState {
    pub fn empty(n_vehicles: usize, n_uavs: usize, n_tasks: usize) -> Self {
        Self {
            veh: Grid::filled(n_vehicles, n_tasks, None),
            uav: Grid::filled(n_uavs, n_tasks, None),
        }
    }

    pub fn vehicle_cached(&self, i: usize, w: usize) -> bool {
        self.veh.get(i, w).is_some()
    }

    pub fn uav_cached(&self, j: usize, w: usize) -> bool {
        self.uav.get(j, w).is_some()
    }

    /// Age of the data for `task` at `node`; the BS is always fresh.
    pub fn age_of(&self, node: NodeId, task: usize) -> Result<AgeLookup, SimError> {
        let entry = match node {
            NodeId::Bs => return Ok(AgeLookup::ZeroAtBs),
            NodeId::Vehicle(i) => {
                if i >= self.veh.rows() {
                    return Err(SimError::UnknownId { what: "vehicle", id: i });
                }
                if task >= self.veh.cols() {
                    return Err(SimError::UnknownId { what: "task", id: task });
                }
                self.veh.get(i, task)
            }
            NodeId::Uav(j) => {
                if j >= self.uav.rows() {
                    return Err(SimError::UnknownId { what: "uav", id: j });
                }
                if task >= self.uav.cols() {
                    return Err(SimError::UnknownId { what: "task", id: task });
                }
                self.uav.get(j, task)
            }
        };
        Ok(match entry {
            Some(a) => AgeLookup::Slots(*a),
            None => AgeLookup::Uncached,
        })
    }

    /// Applies a refresh plan: fetched entries reset to age 1, kept
    /// entries grow by 1, dropped entries become uncached. Keeping an
    /// entry that was never fetched is rejected.
    pub fn evolve_ages(&mut self, plan: &RefreshPlan) -> Result<(), SimError> {
        evolve_grid(&mut self.veh, &plan.y_veh, &plan.next_c_veh, "vehicle")?;
        evolve_grid(&mut self.uav, &plan.y_uav, &plan.next_c_uav, "uav")
    }
}

fn evolve_grid(
    ages: &mut Grid<CacheAge>,
    y: &Grid<bool>,
    next_c: &Grid<bool>,
    kind: &str,
) -> Result<(), SimError> {
    for r in 0..ages.rows() {
        for c in 0..ages.cols() {
            let fetched = *y.get(r, c);
            let keep = *next_c.get(r, c);
            if fetched && !keep {
                return Err(SimError::CacheConstraint { node: format!("{kind} {r}"), task: c });
            }
            let next = if !keep {
                None
            } else if fetched {
                Some(1)
            } else {
                match ages.get(r, c) {
                    Some(a) => Some(a + 1),
                    None => {
                        // next_c=1, y=0 on an uncached entry: data never fetched.
                        return Err(SimError::CacheConstraint {
                            node: format!("{kind} {r}"),
                            task: c,
                        });
                    }
                }
            };
            ages.set(r, c, next);
        }
    }
    Ok(())
}

/// Per-slot refresh decision: which entries to fetch (y) and which to
/// hold next slot (next_c), for vehicles and UAVs.
#[derive(Debug, Clone, PartialEq)]
pub struct RefreshPlan {
    pub y_veh: Grid<bool>,
    pub next_c_veh: Grid<bool>,
    pub y_uav: Grid<bool>,
    pub next_c_uav: Grid<bool>,
}

impl RefreshPlan {
    pub fn noop(cache: &CacheState) -> Self {
        let keep = |g: &Grid<CacheAge>| {
            let mut out = Grid::filled(g.rows(), g.cols(), false);
            for r in 0..g.rows() {
                for c in 0..g.cols() {
                    out.set(r, c, g.get(r, c).is_some());
                }
            }
            out
        };
        Self {
            y_veh: Grid::filled(cache.veh.rows(), cache.veh.cols(), false),
            next_c_veh: keep(&cache.veh),
            y_uav: Grid::filled(cache.uav.rows(), cache.uav.cols(), false),
            next_c_uav: keep(&cache.uav),
        }
    }
}

/// Task-data sizes and per-node storage budgets, all in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheCatalog {
    /// Input-data size per task type, bits.
    pub input_bits: Vec<f64>,
    /// Storage per vehicle, bits.
    pub vehicle_capacity: f64,
    /// Storage per UAV, bits.
    pub uav_capacity: f64,
}

impl CacheCatalog {
    /// Capacities sized to hold the given number of largest tasks.
    pub fn from_sizes(input_bits: Vec<f64>, vehicle_tasks: usize, uav_tasks: usize) -> Self {
        let max = input_bits.iter().cloned().fold(0.0f64, f64::max);
        Self {
            input_bits,
            vehicle_capacity: vehicle_tasks as f64 * max,
            uav_capacity: uav_tasks as f64 * max,
        }
    }
}

/// True iff every node's planned contents fit its storage.
pub fn check_capacity(plan: &RefreshPlan, catalog: &CacheCatalog) -> bool {
    let row_fits = |g: &Grid<bool>, cap: f64| {
        (0..g.rows()).all(|r| {
            let used: f64 = g
                .row(r)
                .iter()
                .zip(&catalog.input_bits)
                .filter(|(c, _)| **c)
                .map(|(_, l)| *l)
                .sum();
            used <= cap
        })
    };
    row_fits(&plan.next_c_veh, catalog.vehicle_capacity)
        && row_fits(&plan.next_c_uav, catalog.uav_capacity)
}

/// Fetch energy: theta * (sum of fetched bits over vehicles and UAVs).
pub fn refresh_energy(plan: &RefreshPlan, catalog: &CacheCatalog, theta: f64) -> f64 {
    let fetched_bits = |g: &Grid<bool>| -> f64 {
        (0..g.rows())
            .map(|r| {
                g.row(r)
                    .iter()
                    .zip(&catalog.input_bits)
                    .filter(|(y, _)| **y)
                    .map(|(_, l)| *l)
                    .sum::<f64>()
            })
            .sum()
    };
    theta * (fetched_bits(&plan.y_veh) + fetched_bits(&plan.y_uav))
}
