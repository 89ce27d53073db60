//! Arrival-rate sweep used to pick a stable operating point.
//!
//! The load metric is the time-averaged number of vehicles in the system:
//! those on the map plus those whose arrival time has passed but which are
//! still waiting for their entry to clear. In the stable region it grows
//! linearly with the vehicle rate; once queues at the minor roads stop
//! draining it grows faster.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arrivals::{generate_arrivals, ArrivalConfig};
use super::scenario::Scenario;
use super::world::World;
use super::MobilityError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    pub lambda_v: f64,
    pub lambda_p: f64,
    /// Mean over seeds of the time-averaged vehicle count.
    pub mean_vehicles: f64,
    /// Half-width of the normal 95% interval over seeds (0 for one seed).
    pub ci95: f64,
    pub seeds: usize,
}

/// Time-averaged vehicle count of one mobility-only run, sampled once per
/// second.
pub fn mean_vehicle_count(
    scenario: &Scenario,
    arrivals: &ArrivalConfig,
    duration: f64,
) -> Result<f64, MobilityError> {
    let spawns = generate_arrivals(arrivals, duration);
    let mut world = World::new(scenario.clone(), spawns)?;
    let steps = (duration / world.step_size().as_secs()).round() as u64;
    let per_sample = (1.0 / world.step_size().as_secs()).round().max(1.0) as u64;
    let mut total = 0usize;
    let mut samples = 0usize;
    for k in 1..=steps {
        world.step();
        if k % per_sample == 0 {
            total += world.active_vehicles() + world.waiting_vehicles();
            samples += 1;
        }
    }
    Ok(if samples == 0 { 0.0 } else { total as f64 / samples as f64 })
}

/// Runs every `(λ_v, λ_p, seed)` combination in parallel. Rows come back
/// ordered by `λ_p` then `λ_v`.
pub fn stability_sweep(
    scenario: &Scenario,
    lambda_v: &[f64],
    lambda_p: &[f64],
    duration: f64,
    seeds: &[u64],
) -> Result<Vec<StabilityPoint>, MobilityError> {
    if lambda_v.is_empty() || lambda_p.is_empty() || seeds.is_empty() {
        return Err(MobilityError::InvalidSweep("rate grids and seed list must be non-empty".into()));
    }
    if !(duration > 0.0) {
        return Err(MobilityError::InvalidSweep(format!("duration must be positive, got {duration}")));
    }
    if lambda_v.iter().chain(lambda_p).any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(MobilityError::InvalidSweep("rates must be finite and non-negative".into()));
    }
    let jobs: Vec<(usize, usize, u64)> = (0..lambda_p.len())
        .flat_map(|p| (0..lambda_v.len()).flat_map(move |v| seeds.iter().map(move |&s| (p, v, s))))
        .collect();
    let counts: Vec<f64> = jobs
        .par_iter()
        .map(|&(p, v, seed)| {
            let cfg = ArrivalConfig { lambda_v: lambda_v[v], lambda_p: lambda_p[p], seed };
            mean_vehicle_count(scenario, &cfg, duration)
        })
        .collect::<Result<_, _>>()?;
    let n = seeds.len();
    Ok(counts
        .chunks(n)
        .zip(jobs.chunks(n))
        .map(|(c, j)| {
            let mean = c.iter().sum::<f64>() / n as f64;
            let ci95 = if n > 1 {
                let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                1.96 * (var / n as f64).sqrt()
            } else {
                0.0
            };
            StabilityPoint {
                lambda_v: lambda_v[j[0].1],
                lambda_p: lambda_p[j[0].0],
                mean_vehicles: mean,
                ci95,
                seeds: n,
            }
        })
        .collect())
}

/// First `λ_v` at which the count departs from the linear trend by more
/// than `tolerance` (relative). The trend is a least-squares line through
/// the origin fitted on points with `0 < λ_v <= fit_max`. Points must share
/// one `λ_p`.
pub fn find_knee(points: &[StabilityPoint], fit_max: f64, tolerance: f64) -> Option<f64> {
    let mut pts: Vec<&StabilityPoint> = points.iter().collect();
    pts.sort_by(|a, b| a.lambda_v.total_cmp(&b.lambda_v));
    let fit: Vec<_> = pts
        .iter()
        .filter(|p| p.lambda_v > 0.0 && p.lambda_v <= fit_max)
        .collect();
    let sxx: f64 = fit.iter().map(|p| p.lambda_v * p.lambda_v).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = fit.iter().map(|p| p.lambda_v * p.mean_vehicles).sum::<f64>() / sxx;
    pts.iter()
        .filter(|p| p.lambda_v > fit_max)
        .find(|p| {
            let predicted = slope * p.lambda_v;
            (p.mean_vehicles - predicted).abs() > tolerance * predicted
        })
        .map(|p| p.lambda_v)
}
