//! Model parameters, dimensional and nondimensional.

use crate::error::Error;

/// Dimensional rate constants of the two-host-cell infection model.
///
/// Uninfected cells of types 1 and 2 grow logistically toward a shared
/// carrying capacity and are infected by two viral strains: a generalist
/// (rate `alpha`, infects both types) and a specialist (rate `alpha_s`,
/// infects type 1 only) that arises from the generalist by mutation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionalParams {
    /// Growth rate of uninfected cells of type 1 \[1/time\].
    pub beta1: f64,
    /// Growth rate of uninfected cells of type 2 \[1/time\].
    pub beta2: f64,
    /// Death rate of uninfected cells of type 1 \[1/time\].
    pub delta1: f64,
    /// Death rate of uninfected cells of type 2 \[1/time\].
    pub delta2: f64,
    /// Carrying capacity of the environment \[cells\].
    pub k: f64,
    /// Generalist infection rate \[1/(virion·time)\].
    pub alpha: f64,
    /// Specialist infection rate \[1/(virion·time)\].
    pub alpha_s: f64,
    /// Generalist-to-specialist mutation rate \[1/time\].
    pub mu: f64,
    /// Death rate of specialist-infected cells \[1/time\].
    pub gamma1_s: f64,
    /// Death rate of generalist-infected type-1 cells \[1/time\].
    pub gamma1: f64,
    /// Death rate of generalist-infected type-2 cells \[1/time\].
    pub gamma2: f64,
    /// Specialist burst size \[virions/cell\].
    pub kappa_s: f64,
    /// Generalist burst size from type-1 cells \[virions/cell\].
    pub kappa1: f64,
    /// Generalist burst size from type-2 cells \[virions/cell\].
    pub kappa2: f64,
    /// Specialist multiplicity of infection \[virions/cell\].
    pub nu_s: f64,
    /// Generalist multiplicity of infection \[virions/cell\].
    pub nu: f64,
    /// Specialist virion decay rate \[1/time\].
    pub zeta_s: f64,
    /// Generalist virion decay rate \[1/time\].
    pub zeta: f64,
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<(), Error> {
        let fields = [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("k", self.k),
            ("alpha", self.alpha),
            ("alpha_s", self.alpha_s),
            ("mu", self.mu),
            ("gamma1_s", self.gamma1_s),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("kappa_s", self.kappa_s),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("nu_s", self.nu_s),
            ("nu", self.nu),
            ("zeta_s", self.zeta_s),
            ("zeta", self.zeta),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        if self.beta1 <= self.delta1 || self.beta2 <= self.delta2 {
            return Err(Error::InvalidParams(
                "persistence requires beta1 > delta1 and beta2 > delta2".into(),
            ));
        }
        if self.beta1 == self.beta2 || self.delta1 == self.delta2 {
            return Err(Error::InvalidParams(
                "the two cell types must differ: beta1 != beta2 and delta1 != delta2".into(),
            ));
        }
        Ok(())
    }

    /// Rescale to the nondimensional system.
    ///
    /// Time is measured in units of `1/(beta1 - delta1)`, cell populations in
    /// units of the virus-free maximum of type 1, and virions in units of
    /// that maximum times the specialist burst size. Rates other than the
    /// betas, alphas, kappas, and nus simply divide by `beta1 - delta1`.
    pub fn nondimensionalize(&self) -> Result<Params, Error> {
        self.validate()?;
        let rate = self.beta1 - self.delta1;
        let p = Params {
            beta1: (self.beta2 - self.delta2) / rate,
            beta2: self.beta2 / self.beta1,
            alpha: self.kappa_s * self.k * self.alpha / self.beta1,
            alpha_s: self.kappa_s * self.k * self.alpha_s / self.beta1,
            mu: self.mu / rate,
            gamma1_s: self.gamma1_s / rate,
            gamma1: self.gamma1 / rate,
            gamma2: self.gamma2 / rate,
            kappa1: self.kappa1 / self.kappa_s,
            kappa2: self.kappa2 / self.kappa_s,
            nu_s: self.nu_s / self.kappa_s,
            nu: self.nu / self.kappa_s,
            zeta_s: self.zeta_s / rate,
            zeta: self.zeta / rate,
        };
        p.validate().map_err(|e| {
            Error::InvalidParams(format!(
                "nondimensionalized set violates model assumptions: {e}"
            ))
        })?;
        Ok(p)
    }
}

/// The 14 nondimensional parameters of the model. All strictly positive,
/// with `nu_s < 1` and `nu < min(kappa1, kappa2)` (multiplicities of
/// infection are small compared to burst sizes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    /// Effective growth rate of type-2 cells relative to type 1.
    pub beta1: f64,
    /// Ratio of raw growth rates of the two cell types.
    pub beta2: f64,
    /// Generalist infection rate.
    pub alpha: f64,
    /// Specialist infection rate.
    pub alpha_s: f64,
    /// Mutation rate, generalist to specialist.
    pub mu: f64,
    /// Death rate of specialist-infected cells.
    pub gamma1_s: f64,
    /// Death rate of generalist-infected type-1 cells.
    pub gamma1: f64,
    /// Death rate of generalist-infected type-2 cells.
    pub gamma2: f64,
    /// Generalist burst size from type-1 cells (relative to specialist's).
    pub kappa1: f64,
    /// Generalist burst size from type-2 cells (relative to specialist's).
    pub kappa2: f64,
    /// Specialist multiplicity of infection (relative to its burst size).
    pub nu_s: f64,
    /// Generalist multiplicity of infection (relative to specialist burst).
    pub nu: f64,
    /// Specialist virion decay rate.
    pub zeta_s: f64,
    /// Generalist virion decay rate.
    pub zeta: f64,
}

/// Accepted keys of the flat `key=value` parameter file, in canonical order.
pub const PARAM_KEYS: [&str; 14] = [
    "beta1", "beta2", "alpha", "alpha_s", "mu", "gamma1_s", "gamma1", "gamma2", "kappa1", "kappa2",
    "nu_s", "nu", "zeta_s", "zeta",
];

impl Params {
    /// The symmetric reference parameter set used throughout the built-in
    /// analyses: both strains share virulence, burst size, multiplicity of
    /// infection, and decay rate, and the infection rates are left free.
    ///
    /// ```
    /// let p = virodyn::Params::baseline(1.0, 1.0);
    /// assert_eq!(p.beta1, 1.5);
    /// assert_eq!(p.zeta, 0.22);
    /// p.validate().unwrap();
    /// ```
    pub fn baseline(alpha: f64, alpha_s: f64) -> Params {
        Params {
            beta1: 1.5,
            beta2: 2.0,
            alpha,
            alpha_s,
            mu: 0.1,
            gamma1_s: 0.25,
            gamma1: 0.25,
            gamma2: 0.25,
            kappa1: 1.0,
            kappa2: 1.0,
            nu_s: 0.5,
            nu: 0.5,
            zeta_s: 0.22,
            zeta: 0.22,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in self.entries() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        if self.nu_s >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "nu_s must be < 1 (got {}); the specialist MOI is small relative to its burst size",
                self.nu_s
            )));
        }
        if self.nu >= self.kappa2 || self.nu >= self.kappa1 {
            return Err(Error::InvalidParams(format!(
                "nu must be < kappa1 and < kappa2 (got nu={}, kappa1={}, kappa2={})",
                self.nu, self.kappa1, self.kappa2
            )));
        }
        Ok(())
    }

    /// Soft assumption checks: violations are legitimate parameter sets but
    /// weaken some closed-form feasibility conclusions.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let a = self.alpha * (self.gamma1 * self.kappa1 / (self.mu + self.gamma1) - self.nu);
        if a <= 0.0 {
            w.push(format!(
                "derived constant A = alpha*(gamma1*kappa1/(mu+gamma1) - nu) = {a} is not \
                 positive; the closed-form equilibria remain valid but feasibility analysis \
                 assumes small mu (A > 0)"
            ));
        }
        w
    }

    /// Copy with the two infection rates replaced.
    pub fn with_rates(&self, alpha: f64, alpha_s: f64) -> Params {
        Params {
            alpha,
            alpha_s,
            ..*self
        }
    }

    /// `(name, value)` pairs in canonical key order.
    pub fn entries(&self) -> [(&'static str, f64); 14] {
        [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("alpha", self.alpha),
            ("alpha_s", self.alpha_s),
            ("mu", self.mu),
            ("gamma1_s", self.gamma1_s),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("nu_s", self.nu_s),
            ("nu", self.nu),
            ("zeta_s", self.zeta_s),
            ("zeta", self.zeta),
        ]
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries()
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
    }

    /// Set a field by key name. Unknown keys are rejected with the list of
    /// valid keys.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), Error> {
        let slot = match key {
            "beta1" => &mut self.beta1,
            "beta2" => &mut self.beta2,
            "alpha" => &mut self.alpha,
            "alpha_s" => &mut self.alpha_s,
            "mu" => &mut self.mu,
            "gamma1_s" => &mut self.gamma1_s,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            "kappa1" => &mut self.kappa1,
            "kappa2" => &mut self.kappa2,
            "nu_s" => &mut self.nu_s,
            "nu" => &mut self.nu,
            "zeta_s" => &mut self.zeta_s,
            "zeta" => &mut self.zeta,
            _ => {
                return Err(Error::Config(format!(
                    "unknown parameter key `{key}`; valid keys: {}",
                    PARAM_KEYS.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Parse a flat `key=value` parameter file. Blank lines and `#` comments
    /// are ignored; all 14 keys are required; unknown keys are rejected; a
    /// repeated key keeps its last occurrence.
    pub fn from_key_values(text: &str) -> Result<Params, Error> {
        let mut p = Params::baseline(f64::NAN, f64::NAN);
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key=value, got `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "line {}: value for `{key}` is not a number: `{}`",
                    lineno + 1,
                    value.trim()
                ))
            })?;
            p.set(key, value)?;
            seen.insert(key.to_string());
        }
        let missing: Vec<&str> = PARAM_KEYS
            .iter()
            .copied()
            .filter(|k| !seen.contains(*k))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "missing required keys: {}",
                missing.join(", ")
            )));
        }
        p.validate()?;
        Ok(p)
    }

    /// Serialize as a `key=value` file in canonical key order.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    /// One-line `key=value` echo used in CSV metadata.
    pub fn echo(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Which of the two infection rates a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateAxis {
    Alpha,
    AlphaS,
}

impl RateAxis {
    pub fn key(self) -> &'static str {
        match self {
            RateAxis::Alpha => "alpha",
            RateAxis::AlphaS => "alpha_s",
        }
    }

    pub fn apply(self, p: &Params, value: f64) -> Params {
        match self {
            RateAxis::Alpha => p.with_rates(value, p.alpha_s),
            RateAxis::AlphaS => p.with_rates(p.alpha, value),
        }
    }

    pub fn get(self, p: &Params) -> f64 {
        match self {
            RateAxis::Alpha => p.alpha,
            RateAxis::AlphaS => p.alpha_s,
        }
    }
}

impl std::fmt::Display for RateAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimensional() -> DimensionalParams {
        DimensionalParams {
            beta1: 2.0,
            beta2: 3.0,
            delta1: 1.0,
            delta2: 1.5,
            k: 1000.0,
            alpha: 1e-3,
            alpha_s: 2e-3,
            mu: 0.1,
            gamma1_s: 0.3,
            gamma1: 0.3,
            gamma2: 0.3,
            kappa_s: 40.0,
            kappa1: 40.0,
            kappa2: 40.0,
            nu_s: 3.0,
            nu: 3.0,
            zeta_s: 0.4,
            zeta: 0.4,
        }
    }

    #[test]
    fn nondimensionalization_matches_hand_evaluation() {
        // beta1=2, delta1=1, beta2=3, delta2=1.5: effective-rate ratio 1.5/1.
        let p = dimensional().nondimensionalize().unwrap();
        assert_eq!(p.beta1, 1.5);
        assert_eq!(p.beta2, 1.5);
        // equal burst sizes collapse to unit ratios
        assert_eq!(p.kappa1, 1.0);
        assert_eq!(p.kappa2, 1.0);
        // unit time scale (beta1 - delta1 = 1) leaves plain rates unchanged
        assert_eq!(p.mu, 0.1);
        assert_eq!(p.zeta, 0.4);
        // alpha_bar = kappa_s * K * alpha / beta1
        assert!((p.alpha - 40.0 * 1000.0 * 1e-3 / 2.0).abs() < 1e-12);
        assert!((p.alpha_s - 2.0 * p.alpha).abs() < 1e-12);
        assert_eq!(p.nu, 3.0 / 40.0);
    }

    #[test]
    fn persistence_assumption_enforced() {
        let mut d = dimensional();
        d.delta1 = 2.5;
        assert!(d.nondimensionalize().is_err());
    }

    #[test]
    fn output_invariants_surface_as_errors() {
        // nu_s/kappa_s >= 1 violates the small-MOI assumption after rescaling
        let mut d = dimensional();
        d.nu_s = 45.0;
        let err = d.nondimensionalize().unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)));
    }

    #[test]
    fn nu_s_at_one_is_a_construction_error() {
        let mut p = Params::baseline(1.0, 1.0);
        p.nu_s = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn baseline_validates_without_warnings() {
        let p = Params::baseline(0.5, 2.0);
        p.validate().unwrap();
        assert!(p.warnings().is_empty());
    }

    #[test]
    fn large_mu_trips_the_assumption_warning() {
        let mut p = Params::baseline(1.0, 1.0);
        p.mu = 10.0;
        p.validate().unwrap();
        assert_eq!(p.warnings().len(), 1);
    }

    #[test]
    fn key_value_round_trip() {
        let p = Params::baseline(0.7, 1.3);
        let q = Params::from_key_values(&p.to_key_values()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn unknown_and_missing_keys_rejected() {
        let p = Params::baseline(1.0, 1.0);
        let mut text = p.to_key_values();
        text.push_str("extra=1.0\n");
        assert!(matches!(
            Params::from_key_values(&text),
            Err(Error::Config(_))
        ));

        let partial = "beta1=1.5\nbeta2=2.0\n";
        let err = Params::from_key_values(partial).unwrap_err();
        assert!(err.to_string().contains("missing required keys"));
    }

    #[test]
    fn repeated_key_keeps_last_occurrence() {
        let mut text = Params::baseline(1.0, 1.0).to_key_values();
        text.push_str("alpha=2.5\n");
        let p = Params::from_key_values(&text).unwrap();
        assert_eq!(p.alpha, 2.5);
    }
}
