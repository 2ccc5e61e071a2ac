//! Small shared numerics: bracket scanning and bisection.

use crate::error::Error;

/// Euclidean norm of a 7-vector.
pub(crate) fn norm7(v: &[f64; 7]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scan `[lo, hi]` with `n` subintervals and return the first subinterval
/// over which `f` changes sign. Samples where `f` is not finite are skipped.
pub(crate) fn find_bracket(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> Option<(f64, f64)> {
    let step = (hi - lo) / n as f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = if i == n { hi } else { lo + i as f64 * step };
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if fx == 0.0 {
            return Some((x, x));
        }
        if let Some((px, pfx)) = prev {
            if pfx * fx < 0.0 {
                return Some((px, x));
            }
        }
        prev = Some((x, fx));
    }
    None
}

/// Bisection on a bracket with a sign change, to absolute tolerance `xtol`.
pub(crate) fn bisect(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    what: &str,
) -> Result<f64, Error> {
    if lo == hi {
        return Ok(lo);
    }
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return Err(Error::NoBracket {
            what: what.to_string(),
            lo,
            hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of `f` located by scanning for a sign change and bisecting it.
pub(crate) fn scan_root(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
    xtol: f64,
    what: &str,
) -> Result<f64, Error> {
    let (blo, bhi) = find_bracket(&mut f, lo, hi, n).ok_or_else(|| Error::NoBracket {
        what: what.to_string(),
        lo,
        hi,
    })?;
    bisect(f, blo, bhi, xtol, what)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_simple_root() {
        let root = scan_root(|x| x * x - 2.0, 0.0, 2.0, 16, 1e-12, "sqrt2").unwrap();
        assert!((root - std::f64::consts::SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn no_bracket_is_reported() {
        let err = scan_root(|x| x * x + 1.0, -1.0, 1.0, 8, 1e-12, "none").unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }));
    }
}
