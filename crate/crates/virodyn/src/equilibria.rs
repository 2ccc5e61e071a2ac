//! Closed-form equilibria of the model and their biological feasibility.
//!
//! The system has nine critical points, built from mutually exclusive sign
//! conditions on `(x1, x2, z, zs)`. The infected-cell components always
//! follow from the four primary ones:
//!
//! ```text
//! y1 = (C/mu)·x1·z,   y2 = (alpha/gamma2)·x2·z,   ys1 = (x1/gamma1_s)·(C·z + alpha_s·zs)
//! ```
//!
//! with the derived constants of [`derived_constants`]. The two full
//! coexistence points have `x1` equal to the roots of a quadratic whose
//! coefficients are also provided there.

use crate::error::Error;
use crate::model::{rhs, Params, State};
use crate::numeric::norm7;
use crate::tol;

/// Names of the nine critical points, with their descriptive labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EquilibriumName {
    /// `v0`, trivial: total extinction.
    V0,
    /// `v1`, v-free-1: type-1 cells only.
    V1,
    /// `v2`, gen-free-1: type-1 cells with the specialist.
    V2,
    /// `v3`, coex-1: type-1 cells with both strains.
    V3,
    /// `v4`, v-free-2: type-2 cells only.
    V4,
    /// `v5`, spec-free: type-2 cells with the generalist.
    V5,
    /// `v6`, gen-free-2: both cell types with the specialist.
    V6,
    /// `v7`, coex-2: everything, upper quadratic root.
    V7,
    /// `v8`, coex-3: everything, lower quadratic root.
    V8,
}

impl EquilibriumName {
    pub const ALL: [EquilibriumName; 9] = [
        EquilibriumName::V0,
        EquilibriumName::V1,
        EquilibriumName::V2,
        EquilibriumName::V3,
        EquilibriumName::V4,
        EquilibriumName::V5,
        EquilibriumName::V6,
        EquilibriumName::V7,
        EquilibriumName::V8,
    ];

    pub fn index(self) -> usize {
        match self {
            EquilibriumName::V0 => 0,
            EquilibriumName::V1 => 1,
            EquilibriumName::V2 => 2,
            EquilibriumName::V3 => 3,
            EquilibriumName::V4 => 4,
            EquilibriumName::V5 => 5,
            EquilibriumName::V6 => 6,
            EquilibriumName::V7 => 7,
            EquilibriumName::V8 => 8,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EquilibriumName::V0 => "trivial",
            EquilibriumName::V1 => "v-free-1",
            EquilibriumName::V2 => "gen-free-1",
            EquilibriumName::V3 => "coex-1",
            EquilibriumName::V4 => "v-free-2",
            EquilibriumName::V5 => "spec-free",
            EquilibriumName::V6 => "gen-free-2",
            EquilibriumName::V7 => "coex-2",
            EquilibriumName::V8 => "coex-3",
        }
    }

    pub fn from_index(i: usize) -> Option<EquilibriumName> {
        EquilibriumName::ALL.get(i).copied()
    }
}

impl std::fmt::Display for EquilibriumName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v{}", self.index())
    }
}

/// Parameter combinations that recur in every equilibrium expression, plus
/// the coefficients of the coexistence quadratic `phi2·x1² + phi1·x1 + phi0`.
///
/// With valid parameters, `c > 0` and `b > 0` always, and `d < 0` because
/// the specialist MOI is below one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedConstants {
    /// `A = alpha·(gamma1·kappa1/(mu+gamma1) − nu)`; positive for small `mu`.
    pub a: f64,
    /// `B = alpha·(kappa2 − nu)`.
    pub b: f64,
    /// `C = alpha·mu/(mu+gamma1)`.
    pub c: f64,
    /// `D = alpha_s·(nu_s − 1)`.
    pub d: f64,
    pub phi2: f64,
    pub phi1: f64,
    pub phi0: f64,
}

pub fn derived_constants(p: &Params) -> DerivedConstants {
    let a = p.alpha * (p.gamma1 * p.kappa1 / (p.mu + p.gamma1) - p.nu);
    let b = p.alpha * (p.kappa2 - p.nu);
    let c = p.alpha * p.mu / (p.mu + p.gamma1);
    let d = p.alpha_s * (p.nu_s - 1.0);
    let da_ca = d * p.alpha + c * p.alpha_s;
    let phi2 = (a - b) * (da_ca * p.beta2 - d * p.alpha);
    let phi1 = (a - b) * p.alpha * p.zeta_s * (p.beta2 - 1.0)
        + da_ca * (b * p.beta1 - p.zeta * p.beta2)
        + d * p.alpha * (p.zeta - b);
    let phi0 = p.alpha * p.zeta_s * ((1.0 - p.beta2) * p.zeta + b * (p.beta1 - 1.0));
    DerivedConstants {
        a,
        b,
        c,
        d,
        phi2,
        phi1,
        phi0,
    }
}

/// Discriminant of the coexistence quadratic, exposed unthresholded so fold
/// loci can be located by root finding.
pub fn coexistence_discriminant(p: &Params) -> f64 {
    let dc = derived_constants(p);
    dc.phi1 * dc.phi1 - 4.0 * dc.phi2 * dc.phi0
}

/// Real roots of the coexistence quadratic, largest first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoexistenceRoots {
    /// Negative discriminant: the full-coexistence pair does not exist.
    None,
    /// The quadratic degenerated to a linear equation: a single root.
    Single(f64),
    /// Double root within tolerance: the pair is at a fold.
    Double(f64),
    /// Two distinct real roots `x1+ > x1−`.
    Pair { plus: f64, minus: f64 },
}

impl CoexistenceRoots {
    pub fn is_fold(&self) -> bool {
        matches!(self, CoexistenceRoots::Double(_))
    }

    /// Roots in descending order.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            CoexistenceRoots::None => vec![],
            CoexistenceRoots::Single(r) => vec![r],
            CoexistenceRoots::Double(r) => vec![r, r],
            CoexistenceRoots::Pair { plus, minus } => vec![plus, minus],
        }
    }
}

pub fn coexistence_roots(p: &Params) -> Result<CoexistenceRoots, Error> {
    let dc = derived_constants(p);
    let (p2, p1, p0) = (dc.phi2, dc.phi1, dc.phi0);
    if p2.abs() < tol::QUADRATIC_DEGENERATE_TOL {
        if p1.abs() < tol::QUADRATIC_DEGENERATE_TOL {
            if p0.abs() < tol::QUADRATIC_DEGENERATE_TOL {
                return Err(Error::DegenerateQuadratic);
            }
            return Ok(CoexistenceRoots::None);
        }
        return Ok(CoexistenceRoots::Single(-p0 / p1));
    }
    let disc = p1 * p1 - 4.0 * p2 * p0;
    if disc.abs() <= tol::DISCRIMINANT_FOLD_TOL {
        return Ok(CoexistenceRoots::Double(-p1 / (2.0 * p2)));
    }
    if disc < 0.0 {
        return Ok(CoexistenceRoots::None);
    }
    // cancellation-free quadratic formula, then one Newton polish per root
    let q = -0.5 * (p1 + p1.signum() * disc.sqrt());
    let polish = |mut r: f64| {
        let deriv = 2.0 * p2 * r + p1;
        if deriv != 0.0 {
            r -= (p2 * r * r + p1 * r + p0) / deriv;
        }
        r
    };
    let r1 = polish(q / p2);
    let r2 = polish(p0 / q);
    let (plus, minus) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    Ok(CoexistenceRoots::Pair { plus, minus })
}

/// One critical point, its feasibility, and the vector-field residual at it.
#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    pub name: EquilibriumName,
    pub state: State,
    /// All components nonnegative (to `FEASIBILITY_TOL`).
    pub feasible: bool,
    /// `‖rhs(p, state)‖`; below `1e-10·max(1, ‖state‖)` for consistent inputs.
    pub residual: f64,
}

/// Infected-cell components from the primary four.
fn infected_closure(p: &Params, dc: &DerivedConstants, x1: f64, x2: f64, zs: f64, z: f64) -> State {
    let y1 = dc.c / p.mu * x1 * z;
    let y2 = p.alpha / p.gamma2 * x2 * z;
    let ys1 = x1 / p.gamma1_s * (dc.c * z + p.alpha_s * zs);
    State::new(x1, x2, ys1, y1, y2, zs, z)
}

fn finish(p: &Params, name: EquilibriumName, raw: State) -> Equilibrium {
    let mut a = raw.to_array();
    // a pole of the closed form: the critical point sits at infinity
    if !a.iter().all(|v| v.is_finite()) {
        return Equilibrium {
            name,
            state: raw,
            feasible: false,
            residual: f64::INFINITY,
        };
    }
    let feasible = a.iter().all(|v| *v >= -tol::FEASIBILITY_TOL);
    if feasible {
        for v in &mut a {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    let state = State::from_array(a);
    let residual = norm7(&rhs(p, &state));
    Equilibrium {
        name,
        state,
        feasible,
        residual,
    }
}

/// All critical points for the given parameters: always `v0..v6`, plus the
/// coexistence pair `v7`/`v8` when the quadratic has real roots. A double
/// root at a fold reports the same point under both names.
pub fn all_equilibria(p: &Params) -> Result<Vec<Equilibrium>, Error> {
    let dc = derived_constants(p);
    if dc.a == 0.0 {
        return Err(Error::InvalidParams(
            "derived constant A is exactly zero; the coex-1 point is undefined".into(),
        ));
    }
    let mut out = Vec::with_capacity(9);

    out.push(finish(p, EquilibriumName::V0, State::ZERO));
    out.push(finish(
        p,
        EquilibriumName::V1,
        State::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    ));

    // v2: x1 from the specialist balance, zs from the type-1 cell balance
    {
        let x1 = -p.zeta_s / dc.d;
        let zs = 1.0 / p.alpha_s + p.zeta_s / (p.alpha_s * dc.d);
        out.push(finish(
            p,
            EquilibriumName::V2,
            infected_closure(p, &dc, x1, 0.0, zs, 0.0),
        ));
    }

    // v3: x1 from the generalist balance, then zs, then z
    {
        let x1 = p.zeta / dc.a;
        let zs =
            (1.0 - x1) / (p.alpha * p.zeta_s / (dc.c * x1) + p.alpha_s + dc.d * p.alpha / dc.c);
        let z = (1.0 - x1 - p.alpha_s * zs) / p.alpha;
        out.push(finish(
            p,
            EquilibriumName::V3,
            infected_closure(p, &dc, x1, 0.0, zs, z),
        ));
    }

    out.push(finish(
        p,
        EquilibriumName::V4,
        State::new(0.0, p.beta1 / p.beta2, 0.0, 0.0, 0.0, 0.0, 0.0),
    ));

    // v5: x2 from the generalist balance, z from the type-2 cell balance
    {
        let x2 = p.zeta / dc.b;
        let z = p.beta1 / p.alpha - p.beta2 * p.zeta / (p.alpha * dc.b);
        out.push(finish(
            p,
            EquilibriumName::V5,
            infected_closure(p, &dc, 0.0, x2, 0.0, z),
        ));
    }

    // v6: x1 as in v2, x2 from the type-2 balance, zs from the type-1 balance
    {
        let x1 = -p.zeta_s / dc.d;
        let x2 = p.beta1 / p.beta2 + p.zeta_s / dc.d;
        let zs = (p.beta2 - p.beta1) / (p.alpha_s * p.beta2);
        out.push(finish(
            p,
            EquilibriumName::V6,
            infected_closure(p, &dc, x1, x2, zs, 0.0),
        ));
    }

    // v7/v8: x1 from the quadratic, the rest by back-substitution
    let coex = |x1: f64, name: EquilibriumName| {
        let x2 = (p.zeta - dc.a * x1) / dc.b;
        let total = x1 + x2;
        let z = (p.beta1 - p.beta2 * total) / p.alpha;
        let zs = (1.0 - p.beta1 + (p.beta2 - 1.0) * total) / p.alpha_s;
        finish(p, name, infected_closure(p, &dc, x1, x2, zs, z))
    };
    match coexistence_roots(p)? {
        CoexistenceRoots::None => {}
        CoexistenceRoots::Single(r) => out.push(coex(r, EquilibriumName::V7)),
        CoexistenceRoots::Double(r) => {
            out.push(coex(r, EquilibriumName::V7));
            out.push(coex(r, EquilibriumName::V8));
        }
        CoexistenceRoots::Pair { plus, minus } => {
            out.push(coex(plus, EquilibriumName::V7));
            out.push(coex(minus, EquilibriumName::V8));
        }
    }

    Ok(out)
}

/// Feasibility predicate used for every equilibrium: all components at least
/// `-FEASIBILITY_TOL`.
pub fn is_feasible(state: &State) -> bool {
    state.is_nonnegative(tol::FEASIBILITY_TOL)
}

pub fn find(eqs: &[Equilibrium], name: EquilibriumName) -> Option<&Equilibrium> {
    eqs.iter().find(|e| e.name == name)
}

/// Nearest finite equilibrium to a state, optionally restricted to feasible
/// ones.
pub fn nearest<'e>(
    eqs: &'e [Equilibrium],
    s: &State,
    feasible_only: bool,
) -> Option<(&'e Equilibrium, f64)> {
    eqs.iter()
        .filter(|e| e.state.to_array().iter().all(|v| v.is_finite()))
        .filter(|e| !feasible_only || e.feasible)
        .map(|e| (e, e.state.distance(s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Pairs of distinct equilibria closer than `COLLISION_TOL`, reported so
/// sweeps can flag in-progress bifurcations. Never deduplicated.
pub fn collisions(eqs: &[Equilibrium]) -> Vec<(EquilibriumName, EquilibriumName)> {
    let mut pairs = Vec::new();
    for (i, e1) in eqs.iter().enumerate() {
        for e2 in &eqs[i + 1..] {
            if e1.state.distance(&e2.state) < tol::COLLISION_TOL {
                pairs.push((e1.name, e2.name));
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn derived_constants_hand_values() {
        let p = Params::baseline(1.0, 1.0);
        let dc = derived_constants(&p);
        assert!((dc.c - 0.1 / 0.35).abs() < 1e-12);
        assert!((dc.d - (-0.5)).abs() < 1e-12);
        assert!((dc.b - 0.5).abs() < 1e-12);
        assert!((dc.a - (0.25 / 0.35 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn small_mu_limit_of_constants() {
        let mut p = Params::baseline(1.0, 1.0);
        p.mu = 1e-12;
        let dc = derived_constants(&p);
        assert!(dc.c < 1e-11);
        assert!((dc.a - p.alpha * (p.kappa1 - p.nu)).abs() < 1e-10);
    }

    #[test]
    fn trivial_and_v4_rows() {
        let p = Params::baseline(1.0, 1.0);
        let eqs = all_equilibria(&p).unwrap();
        let v0 = find(&eqs, EquilibriumName::V0).unwrap();
        assert_eq!(v0.state, State::ZERO);
        assert!(v0.feasible);
        let v4 = find(&eqs, EquilibriumName::V4).unwrap();
        assert_eq!(v4.state.x2, 0.75);
        assert!(v4.feasible);
        assert!(v4.residual < 1e-14);
    }

    #[test]
    fn gen_free_1_hand_values() {
        // alpha_s = 1: x1 = 0.44, zs = 0.56, ys1 = -zeta_s(zeta_s+D)/(D² gamma1_s)
        let p = Params::baseline(1.0, 1.0);
        let eqs = all_equilibria(&p).unwrap();
        let v2 = find(&eqs, EquilibriumName::V2).unwrap();
        assert!((v2.state.x1 - 0.44).abs() < 1e-12);
        assert!((v2.state.zs - 0.56).abs() < 1e-12);
        let ys1_expect = -0.22 * (0.22 - 0.5) / (0.25 * 0.25);
        assert!((v2.state.ys1 - ys1_expect).abs() < 1e-12);
        assert!(v2.feasible);
        assert!(v2.residual < 1e-14);
    }

    #[test]
    fn spec_free_hand_values() {
        let p = Params::baseline(1.0, 1.0);
        let eqs = all_equilibria(&p).unwrap();
        let v5 = find(&eqs, EquilibriumName::V5).unwrap();
        assert!((v5.state.x2 - 0.44).abs() < 1e-12);
        assert!((v5.state.z - 0.62).abs() < 1e-12);
        assert!(v5.state.y2 > 0.0);
        assert!(v5.feasible);
    }

    #[test]
    fn gen_free_2_infeasible_when_type1_grows_faster() {
        // beta2 > beta1 here makes zs positive; flip the comparison instead
        let mut p = Params::baseline(1.0, 1.0);
        p.beta1 = 2.0;
        p.beta2 = 1.5;
        let eqs = all_equilibria(&p).unwrap();
        let v6 = find(&eqs, EquilibriumName::V6).unwrap();
        assert!(v6.state.zs < 0.0);
        assert!(!v6.feasible);
    }

    #[test]
    fn coexistence_pair_residuals() {
        let p = Params::baseline(1.0, 1.0);
        let roots = coexistence_roots(&p).unwrap();
        assert!(matches!(roots, CoexistenceRoots::Pair { .. }));
        let eqs = all_equilibria(&p).unwrap();
        assert_eq!(eqs.len(), 9);
        for name in [EquilibriumName::V7, EquilibriumName::V8] {
            let e = find(&eqs, name).unwrap();
            assert!(
                e.residual < 1e-10 * e.state.norm().max(1.0),
                "{name}: residual {}",
                e.residual
            );
        }
    }

    #[test]
    fn residuals_over_random_parameter_draws() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let p = crate::test_support::random_params(&mut rng);
            let eqs = all_equilibria(&p).unwrap();
            assert!(eqs.len() >= 7);
            for e in &eqs {
                let bound = 1e-10 * e.state.norm().max(1.0);
                assert!(
                    e.residual < bound,
                    "{} residual {} exceeds {bound} at {:?}",
                    e.name,
                    e.residual,
                    p
                );
            }
        }
    }

    #[test]
    fn x1_zero_forces_zs_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = crate::test_support::random_params(&mut rng);
            for e in all_equilibria(&p).unwrap() {
                if e.state.x1 == 0.0 {
                    assert_eq!(e.state.zs, 0.0, "{}: zs must vanish with x1", e.name);
                }
            }
        }
    }

    #[test]
    fn signature_exclusivity_away_from_bifurcations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let p = crate::test_support::random_params(&mut rng);
            let eqs = all_equilibria(&p).unwrap();
            // collisions happen exactly on bifurcation curves; for random
            // draws they are measure-zero
            let pairs = collisions(&eqs);
            assert!(pairs.is_empty(), "unexpected collision {pairs:?} at {p:?}");
        }
    }

    #[test]
    fn collisions_are_reported_on_a_transcritical_curve() {
        // exactly on the v1/v2 exchange the pair coincides and is reported,
        // not deduplicated
        let p = Params::baseline(1.0, 0.44);
        let eqs = all_equilibria(&p).unwrap();
        assert_eq!(eqs.len(), 9);
        let pairs = collisions(&eqs);
        assert!(
            pairs.contains(&(EquilibriumName::V1, EquilibriumName::V2)),
            "missing v1/v2 collision: {pairs:?}"
        );
    }

    #[test]
    fn pole_of_the_coex1_formula_is_marked_infinite() {
        // on the alpha_s = alpha diagonal of the symmetric reference set the
        // coex-1 denominator vanishes exactly
        let p = Params::baseline(0.2, 0.2);
        let eqs = all_equilibria(&p).unwrap();
        let v3 = find(&eqs, EquilibriumName::V3).unwrap();
        assert!(!v3.state.to_array().iter().all(|v| v.is_finite()));
        assert!(!v3.feasible);
        assert!(v3.residual.is_infinite());
        // matching and the other eight rows are unaffected
        assert!(nearest(&eqs, &State::ZERO, true).is_some());
        assert_eq!(eqs.len(), 9);
    }

    #[test]
    fn negative_discriminant_drops_the_pair() {
        // small rates keep the coexistence quadratic without real roots
        let p = Params::baseline(0.3, 1.0);
        assert!(coexistence_discriminant(&p) < 0.0);
        assert!(matches!(
            coexistence_roots(&p).unwrap(),
            CoexistenceRoots::None
        ));
        let eqs = all_equilibria(&p).unwrap();
        assert_eq!(eqs.len(), 7);
    }
}
