//! Figure-grade data assembly: 1-D bifurcation sweeps, probabilistic basin
//! statistics, and the 2-D stability and Lyapunov maps over the rate plane.
//!
//! Everything here parallelizes over independent cells or runs with a
//! deterministic merge, so identical inputs produce byte-identical CSV
//! artifacts regardless of worker count.

use rayon::prelude::*;

use crate::dynamics::{classify_attractor_with, AttractorBucket, AttractorClass};
use crate::equilibria::{all_equilibria, EquilibriumName};
use crate::error::Error;
use crate::lyapunov::{lle, LleConfig};
use crate::model::{Params, RateAxis, State};
use crate::numeric::bisect;
use crate::ode::IntegratorConfig;
use crate::stability::{classify_equilibrium, curve_value, CurveLabel, CurveRule};
use crate::tol;

/// Inclusive uniform grid along one rate axis.
#[derive(Clone, Copy, Debug)]
pub struct AxisGrid {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl AxisGrid {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.from > 0.0 && self.to > self.from) {
            return Err(Error::InvalidInput(format!(
                "axis range must satisfy 0 < from < to, got [{}, {}]",
                self.from, self.to
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidInput("axis count must be at least 2".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.to - self.from) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.to
                } else {
                    self.from + i as f64 * step
                }
            })
            .collect()
    }

    /// Spacing between neighbouring grid values.
    pub fn cell_size(&self) -> f64 {
        (self.to - self.from) / (self.count - 1) as f64
    }
}

/// Rectangular grid over the `(alpha, alpha_s)` plane.
#[derive(Clone, Copy, Debug)]
pub struct Grid2D {
    pub alpha: AxisGrid,
    pub alpha_s: AxisGrid,
}

impl Grid2D {
    pub fn validate(&self) -> Result<(), Error> {
        self.alpha.validate()?;
        self.alpha_s.validate()
    }
}

/// Initial-condition protocol of the basin statistics: susceptible cells at
/// their virus-free maxima, no infected cells, and virion loads on an
/// `n x n` grid of cell centers of the unit square.
#[derive(Clone, Debug)]
pub struct BasinConfig {
    /// Per-axis count of initial viral loads.
    pub n: usize,
    pub integrator: IntegratorConfig,
    pub lle: LleConfig,
}

impl Default for BasinConfig {
    fn default() -> Self {
        BasinConfig {
            n: 5,
            integrator: IntegratorConfig::default(),
            lle: LleConfig::default(),
        }
    }
}

impl BasinConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 2 {
            return Err(Error::InvalidInput("basin grid needs n >= 2".into()));
        }
        self.integrator.validate()?;
        self.lle.validate()
    }

    /// Strictly positive viral loads: cell centers `(2k-1)/(2n)` of `[0, 1]`.
    pub fn viral_loads(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|k| (2 * k - 1) as f64 / (2 * self.n) as f64)
            .collect()
    }

    /// The `n²` initial states in deterministic row-major order
    /// (`zs` outer, `z` inner), with `(x1, x2) = (1, beta1/beta2)`.
    pub fn initial_states(&self, p: &Params) -> Vec<State> {
        let x2 = p.beta1 / p.beta2;
        let loads = self.viral_loads();
        let mut out = Vec::with_capacity(self.n * self.n);
        for &zs in &loads {
            for &z in &loads {
                out.push(State::new(1.0, x2, 0.0, 0.0, 0.0, zs, z));
            }
        }
        out
    }
}

/// One classified basin run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub zs0: f64,
    pub z0: f64,
    pub class: AttractorClass,
}

/// Attractor frequencies over a basin grid; counts always sum to `n²`.
#[derive(Clone, Debug)]
pub struct BasinDistribution {
    /// `(bucket, count)` sorted by bucket identity.
    pub counts: Vec<(AttractorBucket, usize)>,
    pub n_runs: usize,
}

impl BasinDistribution {
    fn from_buckets(buckets: impl IntoIterator<Item = AttractorBucket>) -> BasinDistribution {
        let mut map = std::collections::BTreeMap::new();
        let mut n_runs = 0;
        for b in buckets {
            *map.entry(b).or_insert(0usize) += 1;
            n_runs += 1;
        }
        BasinDistribution {
            counts: map.into_iter().collect(),
            n_runs,
        }
    }

    pub fn probability(&self, bucket: AttractorBucket) -> f64 {
        self.counts
            .iter()
            .find(|(b, _)| *b == bucket)
            .map(|(_, c)| *c as f64 / self.n_runs as f64)
            .unwrap_or(0.0)
    }

    /// `(bucket, count, probability)` in deterministic bucket order.
    pub fn iter(&self) -> impl Iterator<Item = (AttractorBucket, usize, f64)> + '_ {
        let n = self.n_runs as f64;
        self.counts
            .iter()
            .map(move |(b, c)| (*b, *c, *c as f64 / n))
    }
}

/// Classify every basin run at the given parameters.
pub fn basin_runs(p: &Params, cfg: &BasinConfig) -> Result<Vec<RunRecord>, Error> {
    cfg.validate()?;
    p.validate()?;
    let eqs = all_equilibria(p)?;
    let ics = cfg.initial_states(p);
    let records: Vec<RunRecord> = ics
        .par_iter()
        .map(|s0| RunRecord {
            zs0: s0.zs,
            z0: s0.z,
            class: classify_attractor_with(p, s0, &cfg.integrator, &cfg.lle, &eqs),
        })
        .collect();
    Ok(records)
}

/// Probability of reaching each attractor over the basin grid.
pub fn basin_probability(p: &Params, cfg: &BasinConfig) -> Result<BasinDistribution, Error> {
    let runs = basin_runs(p, cfg)?;
    Ok(BasinDistribution::from_buckets(
        runs.iter().map(|r| r.class.bucket()),
    ))
}

/// One row of a 1-D bifurcation sweep.
#[derive(Clone, Debug)]
pub enum SweepEntry {
    /// A feasible equilibrium with its norm and linear stability.
    Equilibrium {
        name: EquilibriumName,
        norm: f64,
        stable: bool,
    },
    /// A simulated long-run orbit, recorded when no equilibrium is stable.
    Orbit {
        bucket: AttractorBucket,
        mean_norm: f64,
        po_max: Option<f64>,
        po_min: Option<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct Sweep1dRow {
    pub rate: f64,
    pub entry: SweepEntry,
}

/// A bifurcation point annotated during a sweep.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub rate: f64,
    /// Analytic curve matched to the crossing, when one is close.
    pub curve: Option<CurveLabel>,
    /// Equilibrium whose spectrum crossed, for numerically detected points.
    pub eq: Option<EquilibriumName>,
    /// `|Im λ|` of the crossing pair; `Some(> 0)` marks a Hopf point.
    pub omega: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Sweep1d {
    pub axis: RateAxis,
    pub rows: Vec<Sweep1dRow>,
    pub crossings: Vec<Crossing>,
}

/// Reference initial condition used when a sweep sample has no stable
/// equilibrium and falls back to simulation.
pub fn reference_initial_state(p: &Params) -> State {
    State::new(1.0, p.beta1 / p.beta2, 0.0, 0.0, 0.0, 0.5, 0.5)
}

/// Sweep one infection rate over `[range.0, range.1]` with `n >= 10` samples.
///
/// Each sample lists every feasible equilibrium with its norm and stability;
/// where no stable equilibrium exists the long-run orbit from the reference
/// initial condition is simulated and recorded with its norm extrema.
/// Eigenvalue sign changes between samples are bisected and annotated with
/// the analytic curve they lie on, when one matches.
pub fn bifurcation_sweep_1d(
    p: &Params,
    axis: RateAxis,
    range: (f64, f64),
    n: usize,
    integrator: &IntegratorConfig,
    lle_cfg: &LleConfig,
) -> Result<Sweep1d, Error> {
    let (lo, hi) = range;
    if n < 10 {
        return Err(Error::InvalidInput(
            "sweep needs at least 10 samples".into(),
        ));
    }
    let grid = AxisGrid {
        from: lo,
        to: hi,
        count: n,
    };
    grid.validate()?;
    p.validate()?;

    struct Sample {
        rate: f64,
        rows: Vec<SweepEntry>,
        /// max Re λ per equilibrium index, NaN when absent
        max_re: [f64; 9],
    }

    let eval = |rate: f64| -> Result<Sample, Error> {
        let pv = axis.apply(p, rate);
        let eqs = all_equilibria(&pv)?;
        let mut rows = Vec::new();
        let mut max_re = [f64::NAN; 9];
        let mut any_stable = false;
        for e in &eqs {
            let rep = match classify_equilibrium(&pv, e) {
                Ok(rep) => rep,
                // a formula pole: the point is at infinity at this sample
                Err(Error::EquilibriumAtInfinity { .. }) => continue,
                Err(other) => return Err(other),
            };
            max_re[e.name.index()] = rep.max_real;
            if e.feasible {
                let stable = rep.is_stable();
                any_stable |= stable;
                rows.push(SweepEntry::Equilibrium {
                    name: e.name,
                    norm: e.state.norm(),
                    stable,
                });
            }
        }
        if !any_stable {
            let class = classify_attractor_with(
                &pv,
                &reference_initial_state(&pv),
                integrator,
                lle_cfg,
                &eqs,
            );
            // a run can still settle on an equilibrium the linear analysis
            // called marginal; report its norm in that case
            let mean_norm = match (class.metrics.po_max, class.metrics.po_min) {
                (Some(hi), Some(lo)) => 0.5 * (hi + lo),
                _ => class
                    .target
                    .and_then(|name| crate::equilibria::find(&eqs, name))
                    .map_or(f64::NAN, |e| e.state.norm()),
            };
            rows.push(SweepEntry::Orbit {
                bucket: class.bucket(),
                mean_norm,
                po_max: class.metrics.po_max,
                po_min: class.metrics.po_min,
            });
        }
        Ok(Sample {
            rate,
            rows,
            max_re,
        })
    };

    let samples: Vec<Sample> = grid
        .values()
        .par_iter()
        .map(|rate| eval(*rate))
        .collect::<Result<_, _>>()?;

    // numeric crossings: bisect each per-equilibrium sign change
    let mut crossings: Vec<Crossing> = Vec::new();
    for idx in 0..9 {
        let name = EquilibriumName::from_index(idx).unwrap();
        for w in samples.windows(2) {
            let (s0, s1) = (&w[0], &w[1]);
            let (r0, r1) = (s0.max_re[idx], s1.max_re[idx]);
            if !(r0.is_finite() && r1.is_finite()) || r0 * r1 >= 0.0 {
                continue;
            }
            let g = |rate: f64| {
                let pv = axis.apply(p, rate);
                all_equilibria(&pv)
                    .ok()
                    .and_then(|eqs| crate::equilibria::find(&eqs, name).cloned())
                    .and_then(|e| classify_equilibrium(&pv, &e).ok())
                    .map_or(f64::NAN, |rep| rep.max_real)
            };
            if let Ok(root) = bisect(g, s0.rate, s1.rate, tol::HOPF_BISECT_TOL, "sweep crossing") {
                // the discriminator between Hopf and transcritical is the
                // imaginary part of the eigenvalue that actually crosses
                let pv = axis.apply(p, root);
                let om = all_equilibria(&pv)
                    .ok()
                    .and_then(|eqs| crate::equilibria::find(&eqs, name).cloned())
                    .and_then(|e| classify_equilibrium(&pv, &e).ok())
                    .and_then(|rep| {
                        rep.eigenvalues
                            .iter()
                            .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
                            .map(|l| l.im.abs())
                    });
                crossings.push(Crossing {
                    rate: root,
                    curve: None,
                    eq: Some(name),
                    omega: om.filter(|om| *om > tol::HOPF_IM_TOL),
                });
            }
        }
    }

    // analytic curve crossings within the range
    let fixed_other = match axis {
        RateAxis::Alpha => p.alpha_s,
        RateAxis::AlphaS => p.alpha,
    };
    for label in CurveLabel::ALL {
        let hit: Option<f64> = match (label.rule(), axis) {
            (CurveRule::ConstAlpha, RateAxis::Alpha) => curve_value(label, p, None).ok(),
            (CurveRule::ConstAlphaS, RateAxis::AlphaS) => curve_value(label, p, None).ok(),
            (CurveRule::AlphaSOfAlpha, RateAxis::Alpha) => {
                let g =
                    |al: f64| curve_value(label, p, Some(al)).map_or(f64::NAN, |v| v - fixed_other);
                crate::numeric::find_bracket(g, lo, hi, 256)
                    .and_then(|(blo, bhi)| bisect(g, blo, bhi, tol::CURVE_ROOT_TOL, "curve").ok())
            }
            (CurveRule::AlphaSOfAlpha, RateAxis::AlphaS) => {
                curve_value(label, p, Some(fixed_other)).ok()
            }
            _ => None,
        };
        if let Some(rate) = hit {
            if rate >= lo && rate <= hi {
                let spacing = grid.cell_size();
                match crossings
                    .iter_mut()
                    .find(|c| c.curve.is_none() && (c.rate - rate).abs() < spacing)
                {
                    Some(c) => c.curve = Some(label),
                    None => crossings.push(Crossing {
                        rate,
                        curve: Some(label),
                        eq: None,
                        omega: None,
                    }),
                }
            }
        }
    }
    crossings.sort_by(|a, b| a.rate.total_cmp(&b.rate));

    let rows = samples
        .into_iter()
        .flat_map(|s| {
            s.rows.into_iter().map(move |entry| Sweep1dRow {
                rate: s.rate,
                entry,
            })
        })
        .collect();

    Ok(Sweep1d {
        axis,
        rows,
        crossings,
    })
}

/// Basin statistics of one grid cell.
#[derive(Clone, Debug)]
pub struct MapCell {
    pub alpha: f64,
    pub alpha_s: f64,
    pub distribution: BasinDistribution,
    pub runs: Vec<RunRecord>,
}

/// Basin probabilities over every cell of a rate grid, row-major with
/// `alpha` varying fastest.
#[derive(Clone, Debug)]
pub struct StabilityMap {
    pub grid: Grid2D,
    pub cells: Vec<MapCell>,
}

pub fn stability_map(p: &Params, grid: &Grid2D, cfg: &BasinConfig) -> Result<StabilityMap, Error> {
    grid.validate()?;
    cfg.validate()?;
    p.validate()?;
    let alphas = grid.alpha.values();
    let alpha_ss = grid.alpha_s.values();
    let mut points = Vec::with_capacity(alphas.len() * alpha_ss.len());
    for &asv in &alpha_ss {
        for &al in &alphas {
            points.push((al, asv));
        }
    }
    let cells: Vec<MapCell> = points
        .par_iter()
        .map(|&(alpha, alpha_s)| {
            let pv = p.with_rates(alpha, alpha_s);
            match basin_runs(&pv, cfg) {
                Ok(runs) => {
                    let distribution =
                        BasinDistribution::from_buckets(runs.iter().map(|r| r.class.bucket()));
                    MapCell {
                        alpha,
                        alpha_s,
                        distribution,
                        runs,
                    }
                }
                // per-cell failures become an unresolved cell, not an abort
                Err(e) => MapCell {
                    alpha,
                    alpha_s,
                    distribution: BasinDistribution {
                        counts: vec![(AttractorBucket::Unresolved, cfg.n * cfg.n)],
                        n_runs: cfg.n * cfg.n,
                    },
                    runs: vec![RunRecord {
                        zs0: f64::NAN,
                        z0: f64::NAN,
                        class: AttractorClass {
                            kind: crate::dynamics::AttractorKind::Unresolved,
                            target: None,
                            metrics: crate::dynamics::AttractorMetrics {
                                diagnostic: Some(e.to_string()),
                                ..Default::default()
                            },
                        },
                    }],
                },
            }
        })
        .collect();
    Ok(StabilityMap { grid: *grid, cells })
}

/// Largest-Lyapunov-exponent value of one grid cell.
#[derive(Clone, Debug)]
pub struct LleCell {
    pub alpha: f64,
    pub alpha_s: f64,
    /// `None` when the computation failed outright.
    pub lle: Option<f64>,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

/// Largest Lyapunov exponent over every cell of a rate grid, from a fixed
/// initial state; row-major with `alpha` varying fastest.
pub fn lle_map(
    p: &Params,
    grid: &Grid2D,
    s0: &State,
    cfg: &LleConfig,
) -> Result<Vec<LleCell>, Error> {
    grid.validate()?;
    cfg.validate()?;
    p.validate()?;
    let alphas = grid.alpha.values();
    let alpha_ss = grid.alpha_s.values();
    let mut points = Vec::with_capacity(alphas.len() * alpha_ss.len());
    for &asv in &alpha_ss {
        for &al in &alphas {
            points.push((al, asv));
        }
    }
    Ok(points
        .par_iter()
        .map(|&(alpha, alpha_s)| {
            let pv = p.with_rates(alpha, alpha_s);
            match lle(&pv, s0, cfg) {
                Ok(r) => LleCell {
                    alpha,
                    alpha_s,
                    lle: Some(r.lle),
                    converged: r.converged,
                    diagnostic: None,
                },
                Err(e) => LleCell {
                    alpha,
                    alpha_s,
                    lle: None,
                    converged: false,
                    diagnostic: Some(e.to_string()),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viral_load_grid_is_strictly_positive_cell_centers() {
        let cfg = BasinConfig::default();
        assert_eq!(cfg.viral_loads(), vec![0.1, 0.3, 0.5, 0.7, 0.9]);
        let p = Params::baseline(1.0, 1.0);
        let ics = cfg.initial_states(&p);
        assert_eq!(ics.len(), 25);
        assert!(ics.iter().all(|s| s.zs > 0.0 && s.z > 0.0));
        assert!(ics.iter().all(|s| s.x1 == 1.0 && s.x2 == 0.75));
    }

    #[test]
    fn axis_grid_hits_both_endpoints() {
        let g = AxisGrid {
            from: 0.05,
            to: 3.0,
            count: 12,
        };
        let v = g.values();
        assert_eq!(v.len(), 12);
        assert_eq!(v[0], 0.05);
        assert_eq!(*v.last().unwrap(), 3.0);
    }

    #[test]
    fn distribution_probabilities_sum_to_one() {
        use AttractorBucket::*;
        let d = BasinDistribution::from_buckets(vec![
            Equilibrium(EquilibriumName::V1),
            Equilibrium(EquilibriumName::V1),
            Chaotic,
            Unresolved,
        ]);
        let total: f64 = d.iter().map(|(_, _, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(d.probability(Equilibrium(EquilibriumName::V1)), 0.5);
    }

    #[test]
    fn sweep_reproduces_the_branch_structure_at_low_alpha_s() {
        let p = Params::baseline(1.0, 0.2);
        let sweep = bifurcation_sweep_1d(
            &p,
            RateAxis::Alpha,
            (0.2, 1.5),
            14,
            &IntegratorConfig::default(),
            &LleConfig::default(),
        )
        .unwrap();
        let t13 = crate::transcritical_value(crate::CurveLabel::T13, &p, None).unwrap();
        let t57 = crate::transcritical_value(crate::CurveLabel::T57, &p, None).unwrap();
        for row in &sweep.rows {
            if let SweepEntry::Equilibrium { name, stable, .. } = row.entry {
                match name {
                    EquilibriumName::V1 => {
                        assert_eq!(stable, row.rate < t13, "v1 stability wrong at {}", row.rate)
                    }
                    EquilibriumName::V3 => {
                        if stable {
                            assert!(row.rate > t13);
                        }
                    }
                    EquilibriumName::V5 => {
                        assert_eq!(stable, row.rate > t57, "v5 stability wrong at {}", row.rate)
                    }
                    _ => {}
                }
            }
        }
        // the v1/v3 exchange is annotated and labelled
        assert!(sweep
            .crossings
            .iter()
            .any(|c| { c.curve == Some(crate::CurveLabel::T13) && (c.rate - t13).abs() < 1e-6 }));
        assert!(sweep
            .crossings
            .iter()
            .any(|c| c.curve == Some(crate::CurveLabel::T57)));
    }

    #[test]
    fn sweep_falls_back_to_simulation_in_the_chaotic_regime() {
        // small alpha, large alpha_s: no stable equilibrium at any sample,
        // so every sample carries a simulated-orbit row (chaotic)
        let p = Params::baseline(1.0, 2.0);
        let lle_cfg = LleConfig {
            transient: 500.0,
            accumulation: 6000.0,
            ..Default::default()
        };
        let sweep = bifurcation_sweep_1d(
            &p,
            RateAxis::Alpha,
            (0.35, 0.5),
            10,
            &IntegratorConfig::default(),
            &lle_cfg,
        )
        .unwrap();
        let mut orbit_rows = 0;
        for row in &sweep.rows {
            match &row.entry {
                SweepEntry::Equilibrium { stable, .. } => assert!(!stable),
                SweepEntry::Orbit {
                    bucket,
                    po_max,
                    po_min,
                    ..
                } => {
                    orbit_rows += 1;
                    assert_eq!(*bucket, AttractorBucket::Chaotic, "at {}", row.rate);
                    assert!(po_max.unwrap() > po_min.unwrap());
                }
            }
        }
        assert_eq!(orbit_rows, 10);
    }

    #[test]
    fn sweep_rejects_too_few_samples() {
        let p = Params::baseline(1.0, 0.2);
        let err = bifurcation_sweep_1d(
            &p,
            RateAxis::Alpha,
            (0.1, 3.0),
            5,
            &IntegratorConfig::default(),
            &LleConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
