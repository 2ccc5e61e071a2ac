//! Long-run attractor classification of trajectories.
//!
//! The decision procedure runs on the post-transient window of a trajectory:
//! settle on an equilibrium, lock onto a periodic orbit of the norm signal
//! (period-doubled patterns included), flag a chaos candidate by a positive
//! largest Lyapunov exponent, or report the run unresolved. Integrator
//! failures degrade to `Unresolved` with the diagnostic attached.

use crate::equilibria::{all_equilibria, nearest, Equilibrium, EquilibriumName};
use crate::error::Error;
use crate::lyapunov::{lle, LleConfig};
use crate::model::{rhs, Params, State};
use crate::numeric::norm7;
use crate::ode::{integrate, IntegratorConfig, Trajectory};
use crate::tol;

/// Outcome category of a long-run simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttractorKind {
    Equilibrium,
    Periodic,
    ChaoticCandidate,
    Unresolved,
}

/// Identity of an attractor, used as the bucketing key in basin statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttractorBucket {
    /// Settled on the named equilibrium.
    Equilibrium(EquilibriumName),
    /// Periodic orbit around the named host equilibrium.
    PeriodicAbout(EquilibriumName),
    /// Positive largest Lyapunov exponent.
    Chaotic,
    Unresolved,
}

impl std::fmt::Display for AttractorBucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttractorBucket::Equilibrium(n) => write!(f, "{n}"),
            AttractorBucket::PeriodicAbout(n) => write!(f, "PO about {n}"),
            AttractorBucket::Chaotic => f.write_str("chaotic"),
            AttractorBucket::Unresolved => f.write_str("unresolved"),
        }
    }
}

/// Numbers backing a classification decision.
#[derive(Clone, Debug, Default)]
pub struct AttractorMetrics {
    /// `‖rhs‖` at the final sample.
    pub final_residual: Option<f64>,
    /// Largest norm over the post-transient window (periodic/chaotic runs).
    pub po_max: Option<f64>,
    /// Smallest norm over the post-transient window.
    pub po_min: Option<f64>,
    /// Estimated orbit period (peak spacing times the pattern length).
    pub period: Option<f64>,
    /// Largest Lyapunov exponent, when one was computed.
    pub lle: Option<f64>,
    /// Failure description for unresolved runs.
    pub diagnostic: Option<String>,
}

/// Classification of the long-run attractor of one trajectory.
#[derive(Clone, Debug)]
pub struct AttractorClass {
    pub kind: AttractorKind,
    /// Equilibrium label: the attractor itself, or the orbit's host.
    pub target: Option<EquilibriumName>,
    pub metrics: AttractorMetrics,
}

impl AttractorClass {
    fn unresolved(diagnostic: impl Into<String>) -> AttractorClass {
        AttractorClass {
            kind: AttractorKind::Unresolved,
            target: None,
            metrics: AttractorMetrics {
                diagnostic: Some(diagnostic.into()),
                ..Default::default()
            },
        }
    }

    pub fn bucket(&self) -> AttractorBucket {
        match (self.kind, self.target) {
            (AttractorKind::Equilibrium, Some(n)) => AttractorBucket::Equilibrium(n),
            (AttractorKind::Periodic, Some(n)) => AttractorBucket::PeriodicAbout(n),
            (AttractorKind::ChaoticCandidate, _) => AttractorBucket::Chaotic,
            _ => AttractorBucket::Unresolved,
        }
    }
}

/// Norm maxima/minima and period estimate of the post-transient window.
#[derive(Clone, Copy, Debug)]
pub struct PoExtrema {
    pub max_norm: f64,
    pub min_norm: f64,
    /// Mean peak spacing; `None` with fewer than three peaks.
    pub period: Option<f64>,
}

/// Local maxima `(time, value)` of a sampled signal.
fn peaks(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if values[i] > values[i - 1] && values[i] > values[i + 1] {
            out.push((times[i], values[i]));
        }
    }
    out
}

/// Extrema of the state-norm signal over the post-transient window.
pub fn po_extrema(traj: &Trajectory, transient_fraction: f64) -> Result<PoExtrema, Error> {
    let start = traj.post_transient_index(transient_fraction);
    let window = &traj.states[start..];
    if window.is_empty() {
        return Err(Error::InvalidInput("post-transient window is empty".into()));
    }
    let norms: Vec<f64> = window.iter().map(State::norm).collect();
    let times = &traj.times[start..];
    let max_norm = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_norm = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let pk = peaks(times, &norms);
    let period = if pk.len() >= 3 {
        let spacings: Vec<f64> = pk.windows(2).map(|w| w[1].0 - w[0].0).collect();
        Some(spacings.iter().sum::<f64>() / spacings.len() as f64)
    } else {
        None
    };
    Ok(PoExtrema {
        max_norm,
        min_norm,
        period,
    })
}

/// Smallest pattern length `k ≤ 8` for which the trailing peaks repeat with
/// period `k` to within the relative tolerance, and the orbit period.
fn detect_period(pk: &[(f64, f64)], amplitude: f64) -> Option<(usize, f64)> {
    const COMPARISONS: usize = 10;
    for k in 1..=8usize {
        let needed = COMPARISONS + k;
        if pk.len() < needed {
            break;
        }
        let tail = &pk[pk.len() - needed..];
        let matched = (0..COMPARISONS)
            .all(|j| (tail[j].1 - tail[j + k].1).abs() <= tol::PEAK_EQUALITY_REL_TOL * amplitude);
        if matched {
            let spacings: Vec<f64> = tail.windows(2).map(|w| w[1].0 - w[0].0).collect();
            let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
            return Some((k, mean * k as f64));
        }
    }
    None
}

/// Classify the long-run attractor reached from `s0`.
///
/// Decision order on the post-transient window: (1) equilibrium when the
/// final residual is small and a feasible equilibrium is within matching
/// distance; (2) periodic when the norm peaks repeat (pattern length up to
/// 8, so period-doubled orbits report the doubled period); (3) chaotic
/// candidate when the largest Lyapunov exponent is positive; (4) unresolved.
pub fn classify_attractor(p: &Params, s0: &State, cfg: &IntegratorConfig) -> AttractorClass {
    let eqs = match all_equilibria(p) {
        Ok(eqs) => eqs,
        Err(e) => return AttractorClass::unresolved(e.to_string()),
    };
    classify_attractor_with(p, s0, cfg, &LleConfig::default(), &eqs)
}

/// [`classify_attractor`] against precomputed equilibria and an explicit
/// Lyapunov configuration; sweeps call this to share work across runs.
pub fn classify_attractor_with(
    p: &Params,
    s0: &State,
    cfg: &IntegratorConfig,
    lle_cfg: &LleConfig,
    eqs: &[Equilibrium],
) -> AttractorClass {
    let traj = match integrate(p, s0, cfg) {
        Ok(t) => t,
        Err(e) => return AttractorClass::unresolved(e.to_string()),
    };

    // (1) settled on an equilibrium
    let final_state = traj.final_state();
    let final_residual = norm7(&rhs(p, final_state));
    if final_residual < tol::ATTRACTOR_RESIDUAL_TOL {
        if let Some((eq, dist)) = nearest(eqs, final_state, true) {
            if dist < tol::ATTRACTOR_MATCH_TOL {
                return AttractorClass {
                    kind: AttractorKind::Equilibrium,
                    target: Some(eq.name),
                    metrics: AttractorMetrics {
                        final_residual: Some(final_residual),
                        ..Default::default()
                    },
                };
            }
        }
    }

    // (2) periodic orbit of the norm signal
    let start = traj.post_transient_index(cfg.transient_fraction);
    let times = &traj.times[start..];
    let norms: Vec<f64> = traj.states[start..].iter().map(State::norm).collect();
    let max_norm = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_norm = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let amplitude = max_norm - min_norm;
    if amplitude > tol::PO_MIN_AMPLITUDE {
        let pk = peaks(times, &norms);
        if let Some((_k, period)) = detect_period(&pk, amplitude) {
            let mean = State::mean(&traj.states[start..]).expect("window non-empty");
            let host = nearest(eqs, &mean, true).map(|(e, _)| e.name);
            return AttractorClass {
                kind: AttractorKind::Periodic,
                target: host,
                metrics: AttractorMetrics {
                    final_residual: Some(final_residual),
                    po_max: Some(max_norm),
                    po_min: Some(min_norm),
                    period: Some(period),
                    ..Default::default()
                },
            };
        }
    }

    // (3) chaos candidate by Lyapunov exponent
    match lle(p, s0, lle_cfg) {
        Ok(r) if r.lle > tol::CHAOS_LLE_TOL => AttractorClass {
            kind: AttractorKind::ChaoticCandidate,
            target: None,
            metrics: AttractorMetrics {
                final_residual: Some(final_residual),
                po_max: Some(max_norm),
                po_min: Some(min_norm),
                lle: Some(r.lle),
                ..Default::default()
            },
        },
        Ok(r) => AttractorClass {
            kind: AttractorKind::Unresolved,
            target: None,
            metrics: AttractorMetrics {
                final_residual: Some(final_residual),
                po_max: Some(max_norm),
                po_min: Some(min_norm),
                period: None,
                lle: Some(r.lle),
                diagnostic: Some("no equilibrium, periodic, or chaotic signature".into()),
            },
        },
        Err(e) => AttractorClass::unresolved(e.to_string()),
    }
}
