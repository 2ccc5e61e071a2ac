//! Linear stability of equilibria and the analytic bifurcation curves in the
//! `(alpha, alpha_s)` plane.
//!
//! Eigenvalues are always taken from the full 7x7 Jacobian; the factored
//! characteristic polynomials that exist at special equilibria are used only
//! as test oracles. Transcritical curves `Tij` are closed forms on which the
//! equilibria `vi` and `vj` collide with a zero eigenvalue. Hopf loci are
//! found by root finding: `H5` from the Routh–Hurwitz marginal condition of
//! the cubic factor at `v5`, everything else by scanning the spectrum along
//! a rate axis.

use num_complex::Complex64;

use crate::equilibria::{all_equilibria, find, Equilibrium, EquilibriumName};
use crate::error::Error;
use crate::model::{jacobian, Matrix7, Params, RateAxis};
use crate::numeric::{bisect, find_bracket, scan_root};
use crate::tol;

/// Sign structure of the spectrum at an equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// All real parts negative.
    Stable,
    /// All real parts positive (beyond the marginal tolerance).
    Unstable,
    /// Real parts of both signs.
    Saddle,
    /// `|max Re λ|` below the marginal tolerance.
    Marginal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Stable => "stable",
            Classification::Unstable => "unstable",
            Classification::Saddle => "saddle",
            Classification::Marginal => "marginal",
        })
    }
}

/// Spectrum of the Jacobian at one equilibrium.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub name: EquilibriumName,
    /// Eigenvalues sorted by descending real part (ties by imaginary part).
    pub eigenvalues: [Complex64; 7],
    pub max_real: f64,
    pub classification: Classification,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.classification == Classification::Stable
    }

    /// Largest real part among eigenvalues with `|Im| > HOPF_IM_TOL`, if any.
    pub fn max_real_complex(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .filter(|l| l.im.abs() > tol::HOPF_IM_TOL)
            .map(|l| l.re)
            .max_by(f64::total_cmp)
    }
}

/// Eigenvalues of a 7x7 real matrix via the Schur decomposition; solver
/// non-convergence is surfaced, never skipped.
pub fn eigenvalues(m: &Matrix7) -> Result<[Complex64; 7], Error> {
    let schur =
        nalgebra::linalg::Schur::try_new(*m, f64::EPSILON, 100_000).ok_or(Error::EigenFailure)?;
    let vals = schur.complex_eigenvalues();
    let mut out = [Complex64::new(0.0, 0.0); 7];
    for (o, v) in out.iter_mut().zip(vals.iter()) {
        *o = *v;
    }
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(out)
}

/// Classify the linear stability of an equilibrium from its full spectrum.
pub fn classify_equilibrium(p: &Params, e: &Equilibrium) -> Result<StabilityReport, Error> {
    if !e.state.to_array().iter().all(|v| v.is_finite()) {
        return Err(Error::EquilibriumAtInfinity {
            name: e.name.to_string(),
        });
    }
    let eig = eigenvalues(&jacobian(p, &e.state))?;
    let max_real = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let min_real = eig.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let classification = if max_real.abs() < tol::MARGINAL_TOL {
        Classification::Marginal
    } else if max_real < 0.0 {
        Classification::Stable
    } else if min_real < 0.0 {
        Classification::Saddle
    } else {
        Classification::Unstable
    };
    Ok(StabilityReport {
        name: e.name,
        eigenvalues: eig,
        max_real,
        classification,
    })
}

/// Stability reports for every finite equilibrium at the given parameters;
/// critical points at a formula pole have no spectrum and are omitted.
pub fn classify_all(p: &Params) -> Result<Vec<StabilityReport>, Error> {
    let mut out = Vec::new();
    for e in all_equilibria(p)? {
        match classify_equilibrium(p, &e) {
            Ok(rep) => out.push(rep),
            Err(Error::EquilibriumAtInfinity { .. }) => {}
            Err(other) => return Err(other),
        }
    }
    Ok(out)
}

/// Labels of the analytic bifurcation curves in the rate plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveLabel {
    T12,
    T13,
    T23,
    T26,
    T37,
    T45,
    T57,
    T67,
    /// Hopf locus of the spec-free point, a vertical line in the rate plane.
    H5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Transcritical,
    Hopf,
}

/// How a curve is evaluated in the `(alpha, alpha_s)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveRule {
    /// Vertical line: a critical `alpha` independent of `alpha_s`.
    ConstAlpha,
    /// Horizontal line: a critical `alpha_s` independent of `alpha`.
    ConstAlphaS,
    /// `alpha_s` as a closed-form function of `alpha`.
    AlphaSOfAlpha,
}

impl CurveLabel {
    pub const ALL: [CurveLabel; 9] = [
        CurveLabel::T12,
        CurveLabel::T13,
        CurveLabel::T23,
        CurveLabel::T26,
        CurveLabel::T37,
        CurveLabel::T45,
        CurveLabel::T57,
        CurveLabel::T67,
        CurveLabel::H5,
    ];

    pub fn kind(self) -> CurveKind {
        match self {
            CurveLabel::H5 => CurveKind::Hopf,
            _ => CurveKind::Transcritical,
        }
    }

    pub fn rule(self) -> CurveRule {
        match self {
            CurveLabel::T13 | CurveLabel::T45 | CurveLabel::T57 | CurveLabel::H5 => {
                CurveRule::ConstAlpha
            }
            CurveLabel::T12 | CurveLabel::T26 => CurveRule::ConstAlphaS,
            CurveLabel::T23 | CurveLabel::T37 | CurveLabel::T67 => CurveRule::AlphaSOfAlpha,
        }
    }

    /// The pair of equilibria that collide on a transcritical curve.
    pub fn pair(self) -> Option<(EquilibriumName, EquilibriumName)> {
        use EquilibriumName as N;
        match self {
            CurveLabel::T12 => Some((N::V1, N::V2)),
            CurveLabel::T13 => Some((N::V1, N::V3)),
            CurveLabel::T23 => Some((N::V2, N::V3)),
            CurveLabel::T26 => Some((N::V2, N::V6)),
            CurveLabel::T37 => Some((N::V3, N::V7)),
            CurveLabel::T45 => Some((N::V4, N::V5)),
            CurveLabel::T57 => Some((N::V5, N::V7)),
            CurveLabel::T67 => Some((N::V6, N::V7)),
            CurveLabel::H5 => None,
        }
    }
}

impl std::fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CurveLabel::T12 => "T12",
            CurveLabel::T13 => "T13",
            CurveLabel::T23 => "T23",
            CurveLabel::T26 => "T26",
            CurveLabel::T37 => "T37",
            CurveLabel::T45 => "T45",
            CurveLabel::T57 => "T57",
            CurveLabel::T67 => "T67",
            CurveLabel::H5 => "H5",
        };
        f.write_str(s)
    }
}

// Per-unit-rate versions of the derived constants: A = a·alpha, B = b·alpha,
// C = c·alpha, D = d·alpha_s.
fn unit_constants(p: &Params) -> (f64, f64, f64, f64) {
    let a = p.gamma1 * p.kappa1 / (p.mu + p.gamma1) - p.nu;
    let b = p.kappa2 - p.nu;
    let c = p.mu / (p.mu + p.gamma1);
    let d = p.nu_s - 1.0;
    (a, b, c, d)
}

/// Closed-form critical rate of a transcritical curve.
///
/// Curves constant in one rate (`T12`, `T13`, `T26`, `T45`, `T57`) ignore
/// `alpha` and return that constant; `T23`, `T37`, and `T67` require the
/// `alpha` argument and return the matching `alpha_s`.
pub fn transcritical_value(
    label: CurveLabel,
    p: &Params,
    alpha: Option<f64>,
) -> Result<f64, Error> {
    let (a, b, c, d) = unit_constants(p);
    let k0 = (p.kappa1 - p.nu) * p.gamma1 - p.mu * p.nu; // = a·(mu+gamma1)
    let need_alpha = || {
        alpha.ok_or_else(|| Error::InvalidInput(format!("curve {label} needs the alpha argument")))
    };
    match label {
        CurveLabel::T12 => Ok(p.zeta_s / (1.0 - p.nu_s)),
        CurveLabel::T26 => Ok(p.beta2 / p.beta1 * p.zeta_s / (1.0 - p.nu_s)),
        CurveLabel::T13 => {
            if k0 <= 0.0 {
                return Err(Error::InvalidParams(
                    "T13 undefined: (kappa1 - nu)·gamma1 <= mu·nu".into(),
                ));
            }
            Ok((p.gamma1 + p.mu) * p.zeta / k0)
        }
        CurveLabel::T45 => Ok(p.beta2 / p.beta1 * p.zeta / b),
        CurveLabel::T57 => {
            if (p.beta1 - 1.0).abs() < 1e-14 {
                return Err(Error::InvalidParams("T57 undefined at beta1 = 1".into()));
            }
            Ok((p.beta2 - 1.0) / (p.beta1 - 1.0) * p.zeta / b)
        }
        CurveLabel::T23 => {
            let al = need_alpha()?;
            Ok(p.zeta_s / p.zeta * k0 / ((p.gamma1 + p.mu) * (1.0 - p.nu_s)) * al)
        }
        CurveLabel::T37 => {
            // Locus on which x1 = zeta/A solves the coexistence quadratic,
            // i.e. the coex-1 point collides with the upper coexistence root.
            let al = need_alpha()?;
            let cd = c + d;
            let num = p.zeta_s * a * al * (p.zeta * (p.beta2 - 1.0) - a * (p.beta1 - 1.0) * al);
            let den = p.zeta * (a * (cd * p.beta1 - d) * al - p.zeta * (cd * p.beta2 - d));
            if den.abs() < 1e-14 {
                return Err(Error::CurveUndefined {
                    label: label.to_string(),
                    alpha: al,
                });
            }
            Ok(num / den)
        }
        CurveLabel::T67 => {
            // Locus on which the gen-free-2 coordinates satisfy the
            // generalist balance A·x1 + B·x2 = zeta.
            let al = need_alpha()?;
            let num = p.zeta_s * (b - a) * p.beta2 * al;
            let den = d * (p.zeta * p.beta2 - b * p.beta1 * al);
            if den.abs() < 1e-14 {
                return Err(Error::CurveUndefined {
                    label: label.to_string(),
                    alpha: al,
                });
            }
            Ok(num / den)
        }
        CurveLabel::H5 => Err(Error::InvalidInput(
            "H5 is a Hopf locus; use hopf_locus_v5".into(),
        )),
    }
}

/// Coefficients of the cubic factor of the characteristic polynomial at the
/// spec-free point, `a3·λ³ + a2·λ² + a1·λ + a0`.
pub fn v5_cubic(p: &Params, alpha: f64) -> [f64; 4] {
    let b = p.kappa2 - p.nu;
    let a3 = alpha * b * b;
    let a2 = b * ((alpha * p.kappa2 + p.beta2) * p.zeta + p.gamma2 * alpha * b);
    let a1 = (p.beta2 * (p.kappa2 + p.nu) * p.zeta
        - b * (alpha * p.beta1 * p.nu - p.beta2 * p.gamma2))
        * p.zeta;
    let a0 = b * (p.beta1 * alpha * b - p.zeta * p.beta2) * p.gamma2 * p.zeta;
    [a3, a2, a1, a0]
}

/// Critical generalist rate at which the spec-free point undergoes a Hopf
/// bifurcation, independent of `alpha_s`.
///
/// Solves the Routh–Hurwitz marginal condition `a2·a1 = a3·a0` of the cubic
/// factor, bracketed between the `T45` value (where `a0` vanishes) and 10,
/// and checks `a1/a3 > 0` so the critical pair is purely imaginary.
pub fn hopf_locus_v5(p: &Params) -> Result<f64, Error> {
    let t45 = transcritical_value(CurveLabel::T45, p, None)?;
    let g = |alpha: f64| {
        let [a3, a2, a1, a0] = v5_cubic(p, alpha);
        a2 * a1 - a3 * a0
    };
    let lo = t45 + 1e-9;
    let hi = 10.0;
    let root = scan_root(g, lo, hi, 512, tol::CURVE_ROOT_TOL, "H5 marginal condition")?;
    let [a3, _, a1, _] = v5_cubic(p, root);
    if a1 / a3 <= 0.0 {
        return Err(Error::NoBracket {
            what: "H5: marginal condition root has a1/a3 <= 0 (no imaginary pair)".into(),
            lo,
            hi,
        });
    }
    Ok(root)
}

/// Critical value of any labelled curve: transcritical closed forms, or the
/// root-found `H5` locus.
pub fn curve_value(label: CurveLabel, p: &Params, alpha: Option<f64>) -> Result<f64, Error> {
    match label {
        CurveLabel::H5 => hopf_locus_v5(p),
        _ => transcritical_value(label, p, alpha),
    }
}

/// One Hopf point found by scanning a rate axis.
#[derive(Clone, Copy, Debug)]
pub struct HopfPoint {
    /// Value of the scanned rate at the crossing.
    pub rate: f64,
    /// `|Im λ|` of the crossing pair.
    pub omega: f64,
}

/// Result of a Hopf scan: crossings plus any sub-intervals where the scanned
/// equilibrium was missing, infeasible, or had no complex pair.
#[derive(Clone, Debug, Default)]
pub struct HopfScan {
    pub points: Vec<HopfPoint>,
    pub gaps: Vec<(f64, f64)>,
}

/// Scan `n+1` samples of one rate, track the largest real part over complex
/// eigenvalue pairs of the named equilibrium, and bisect every sign change.
///
/// Crossings are refined to `HOPF_BISECT_TOL` in the parameter and reported
/// with `ω = |Im λ| > HOPF_IM_TOL`, which separates Hopf points from
/// transcritical zero crossings. Samples where the equilibrium is absent or
/// infeasible become gap intervals.
pub fn hopf_scan(
    p: &Params,
    name: EquilibriumName,
    axis: RateAxis,
    range: (f64, f64),
    n: usize,
) -> Result<HopfScan, Error> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::InvalidInput(format!(
            "hopf_scan needs 0 < lo < hi and n >= 2, got ({lo}, {hi}) with n = {n}"
        )));
    }

    // max Re over complex pairs, or None when unavailable
    let sample = |rate: f64| -> Result<Option<(f64, f64)>, Error> {
        let pv = axis.apply(p, rate);
        let eqs = all_equilibria(&pv)?;
        let Some(e) = find(&eqs, name) else {
            return Ok(None);
        };
        if !e.feasible {
            return Ok(None);
        }
        let report = match classify_equilibrium(&pv, e) {
            Ok(rep) => rep,
            Err(Error::EquilibriumAtInfinity { .. }) => return Ok(None),
            Err(other) => return Err(other),
        };
        let best = report
            .eigenvalues
            .iter()
            .filter(|l| l.im.abs() > tol::HOPF_IM_TOL)
            .max_by(|x, y| x.re.total_cmp(&y.re));
        Ok(best.map(|l| (l.re, l.im.abs())))
    };

    let step = (hi - lo) / n as f64;
    let mut scan = HopfScan::default();
    let mut gap_start: Option<f64> = None;
    let mut prev: Option<(f64, f64)> = None; // (rate, max-re-complex)

    for i in 0..=n {
        let rate = if i == n { hi } else { lo + i as f64 * step };
        match sample(rate)? {
            None => {
                gap_start.get_or_insert(rate);
                prev = None;
            }
            Some((re, _im)) => {
                if let Some(gs) = gap_start.take() {
                    scan.gaps.push((gs, rate));
                }
                if let Some((prate, pre)) = prev {
                    if pre * re < 0.0 {
                        let f = |r: f64| match sample(r) {
                            Ok(Some((re, _))) => re,
                            _ => f64::NAN,
                        };
                        let root = bisect(f, prate, rate, tol::HOPF_BISECT_TOL, "hopf crossing")?;
                        if let Some((_, omega)) = sample(root)? {
                            if omega > tol::HOPF_IM_TOL {
                                scan.points.push(HopfPoint { rate: root, omega });
                            }
                        }
                    }
                }
                prev = Some((rate, re));
            }
        }
    }
    if let Some(gs) = gap_start {
        scan.gaps.push((gs, hi));
    }
    Ok(scan)
}

/// Intersection of two labelled curves inside an `alpha` bracket, located to
/// `CURVE_ROOT_TOL`. Returns the `(alpha, alpha_s)` point.
pub fn curve_intersection(
    a: CurveLabel,
    b: CurveLabel,
    p: &Params,
    bracket: (f64, f64),
) -> Result<(f64, f64), Error> {
    if a == b {
        return Err(Error::DegenerateIntersection(a.to_string()));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!(
            "intersection bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let in_bracket = |x: f64| x >= lo && x <= hi;
    let no_hit = || Error::NoBracket {
        what: format!("intersection of {a} and {b}"),
        lo,
        hi,
    };

    use CurveRule::*;
    let value = |label: CurveLabel| curve_value(label, p, None);
    let func = |label: CurveLabel, al: f64| curve_value(label, p, Some(al));

    match (a.rule(), b.rule()) {
        (ConstAlpha, ConstAlpha) | (ConstAlphaS, ConstAlphaS) => {
            // parallel lines; equal values would mean an identical curve
            let va = value(a)?;
            let vb = value(b)?;
            if (va - vb).abs() < tol::CURVE_ROOT_TOL {
                Err(Error::DegenerateIntersection(format!(
                    "{a} and {b} coincide"
                )))
            } else {
                Err(no_hit())
            }
        }
        (ConstAlpha, ConstAlphaS) => {
            let al = value(a)?;
            if in_bracket(al) {
                Ok((al, value(b)?))
            } else {
                Err(no_hit())
            }
        }
        (ConstAlphaS, ConstAlpha) => {
            let al = value(b)?;
            if in_bracket(al) {
                Ok((al, value(a)?))
            } else {
                Err(no_hit())
            }
        }
        (ConstAlpha, AlphaSOfAlpha) => {
            let al = value(a)?;
            if in_bracket(al) {
                Ok((al, func(b, al)?))
            } else {
                Err(no_hit())
            }
        }
        (AlphaSOfAlpha, ConstAlpha) => {
            let al = value(b)?;
            if in_bracket(al) {
                Ok((al, func(a, al)?))
            } else {
                Err(no_hit())
            }
        }
        (ConstAlphaS, AlphaSOfAlpha) => {
            let target = value(a)?;
            let g = |al: f64| func(b, al).map_or(f64::NAN, |v| v - target);
            let root = scan_root(g, lo, hi, 512, tol::CURVE_ROOT_TOL, "curve intersection")?;
            Ok((root, target))
        }
        (AlphaSOfAlpha, ConstAlphaS) => {
            let target = value(b)?;
            let g = |al: f64| func(a, al).map_or(f64::NAN, |v| v - target);
            let root = scan_root(g, lo, hi, 512, tol::CURVE_ROOT_TOL, "curve intersection")?;
            Ok((root, target))
        }
        (AlphaSOfAlpha, AlphaSOfAlpha) => {
            let g = |al: f64| match (func(a, al), func(b, al)) {
                (Ok(x), Ok(y)) => x - y,
                _ => f64::NAN,
            };
            let (blo, bhi) = find_bracket(g, lo, hi, 512).ok_or_else(no_hit)?;
            let root = bisect(g, blo, bhi, tol::CURVE_ROOT_TOL, "curve intersection")?;
            Ok((root, func(a, root)?))
        }
    }
}
