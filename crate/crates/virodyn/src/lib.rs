//! Dynamics of a generalist and a specialist viral strain competing for two
//! types of host cells.
//!
//! The model tracks seven populations — uninfected cells `x1`, `x2`,
//! infected cells `ys1`, `y1`, `y2`, and virions `zs`, `z` — through a
//! nondimensionalized polynomial vector field. The generalist strain `z`
//! infects both cell types at rate `alpha`; the specialist `zs` infects only
//! type 1 at rate `alpha_s` and arises from the generalist by mutation.
//! This crate provides the full analysis pipeline over those two rates:
//!
//! - [`model`]: parameters (dimensional and rescaled), the vector field, and
//!   its analytic Jacobian;
//! - [`equilibria`]: the nine closed-form critical points with feasibility
//!   and residual checks;
//! - [`stability`]: spectra and classification, the analytic transcritical
//!   curves, and root-found Hopf loci;
//! - [`ode`]: adaptive 5(4) Runge–Kutta integration with dense output;
//! - [`dynamics`]: long-run attractor classification of trajectories;
//! - [`lyapunov`]: largest Lyapunov exponents via the variational equation;
//! - [`sweep`]: 1-D bifurcation diagrams, basin probabilities, and 2-D
//!   stability/chaos maps, parallelized with a deterministic merge;
//! - [`csv`]: the plain-text artifact formats shared with the command-line
//!   interface.
//!
//! ```
//! use virodyn::{EquilibriumName, Params};
//!
//! let p = Params::baseline(1.0, 1.0);
//! let eqs = virodyn::all_equilibria(&p).unwrap();
//! assert_eq!(eqs.len(), 9);
//! let v2 = virodyn::equilibria::find(&eqs, EquilibriumName::V2).unwrap();
//! assert!((v2.state.x1 - 0.44).abs() < 1e-12 && v2.feasible);
//! ```

pub mod csv;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod lyapunov;
pub mod model;
mod numeric;
pub mod ode;
pub mod stability;
pub mod sweep;
pub mod tol;

pub use dynamics::{
    classify_attractor, po_extrema, AttractorBucket, AttractorClass, AttractorKind,
};
pub use equilibria::{
    all_equilibria, coexistence_discriminant, coexistence_roots, derived_constants,
    CoexistenceRoots, DerivedConstants, Equilibrium, EquilibriumName,
};
pub use error::Error;
pub use lyapunov::{lle, LleConfig, LleResult};
pub use model::{
    jacobian, rhs, DimensionalParams, Matrix7, Params, RateAxis, State, DIM, PARAM_KEYS,
};
pub use ode::{integrate, IntegratorConfig, Trajectory};
pub use stability::{
    classify_all, classify_equilibrium, curve_intersection, curve_value, hopf_locus_v5, hopf_scan,
    transcritical_value, Classification, CurveKind, CurveLabel, CurveRule, HopfPoint, HopfScan,
    StabilityReport,
};
pub use sweep::{
    basin_probability, basin_runs, bifurcation_sweep_1d, lle_map, stability_map, AxisGrid,
    BasinConfig, BasinDistribution, Grid2D, LleCell, MapCell, StabilityMap, Sweep1d,
};

/// Sampling helpers shared by the unit, property, and acceptance tests.
/// Not part of the supported API.
#[doc(hidden)]
pub mod test_support {
    use crate::model::Params;
    use rand::Rng;

    /// A random parameter set satisfying every construction invariant:
    /// positive fields, `nu_s < 1`, `nu < min(kappa1, kappa2)`.
    pub fn random_params(rng: &mut impl Rng) -> Params {
        let kappa1 = rng.random_range(0.5..3.0);
        let kappa2 = rng.random_range(0.5..3.0);
        let p = Params {
            beta1: rng.random_range(0.5..3.0),
            beta2: rng.random_range(0.5..3.0),
            alpha: rng.random_range(0.05..3.0),
            alpha_s: rng.random_range(0.05..3.0),
            mu: rng.random_range(0.01..0.3),
            gamma1_s: rng.random_range(0.05..1.0),
            gamma1: rng.random_range(0.05..1.0),
            gamma2: rng.random_range(0.05..1.0),
            kappa1,
            kappa2,
            nu_s: rng.random_range(0.05..0.95),
            nu: rng.random_range(0.05..0.95) * kappa1.min(kappa2),
            zeta_s: rng.random_range(0.05..1.0),
            zeta: rng.random_range(0.05..1.0),
        };
        p.validate().expect("generator respects the invariants");
        p
    }
}

// The guide's code blocks double as doc-tests, keeping the book in sync
// with the crate (`cargo test --doc`).
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(model, "../../../book/src/model.md");
    chapter!(equilibria, "../../../book/src/equilibria.md");
    chapter!(stability, "../../../book/src/stability.md");
    chapter!(simulation, "../../../book/src/simulation.md");
    chapter!(chaos, "../../../book/src/chaos.md");
    chapter!(maps, "../../../book/src/maps.md");
    chapter!(cli, "../../../book/src/cli.md");
}
