//! Adaptive embedded Runge–Kutta integration (order 5(4)) with dense output.
//!
//! The pair is the classic seven-stage 5(4) scheme with first-same-as-last
//! reuse and a quartic interpolant, driven by a PI step-size controller.
//! Accepted states pass through a projection hook so the model can clamp
//! roundoff-level negative populations and abort on real orthant violations.

use crate::error::Error;
use crate::model::{rhs_into, Params, State, DIM};
use crate::tol;

/// Integration settings. The defaults are chaos-grade: tight tolerances and
/// a horizon long enough to outlast every transient the analyses care about.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    /// Relative local error tolerance.
    pub rel_tol: f64,
    /// Absolute local error tolerance.
    pub abs_tol: f64,
    /// Upper bound on the step size.
    pub max_step: f64,
    /// Integration horizon.
    pub t_end: f64,
    /// Fraction of `[0, t_end]` discarded before classification.
    pub transient_fraction: f64,
    /// Spacing of dense-output samples stored in the trajectory.
    pub sample_dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 100.0,
            t_end: 5000.0,
            transient_fraction: 0.5,
            sample_dt: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0 && self.t_end > 0.0 && self.sample_dt > 0.0) {
            return Err(Error::InvalidInput(
                "max_step, t_end, and sample_dt must be positive".into(),
            ));
        }
        if !(self.transient_fraction > 0.0 && self.transient_fraction < 1.0) {
            return Err(Error::InvalidInput(
                "transient_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(())
    }
}

/// A right-hand side plus an optional post-step projection.
pub(crate) trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]);

    /// Repair an accepted state (e.g. clamp roundoff negatives). Returns
    /// whether the state changed; errors abort the integration.
    fn project(&self, _t: f64, _y: &mut [f64; N]) -> Result<bool, Error> {
        Ok(false)
    }
}

// Butcher tableau of the 5(4) pair.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error weights (5th-order minus embedded 4th-order solution).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;

/// One-step adaptive integrator with a dense interpolant over the last
/// accepted step.
pub(crate) struct Stepper<'a, S: OdeSystem<N>, const N: usize> {
    sys: &'a S,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    fac_old: f64,
    rejected_last: bool,
    t_old: f64,
    h_old: f64,
    cont: [[f64; N]; 5],
    pub accepted: u64,
    pub rejected: u64,
}

impl<'a, S: OdeSystem<N>, const N: usize> Stepper<'a, S, N> {
    pub fn new(
        sys: &'a S,
        rel_tol: f64,
        abs_tol: f64,
        max_step: f64,
        t0: f64,
        y0: [f64; N],
    ) -> Self {
        let mut k1 = [0.0; N];
        sys.rhs(t0, &y0, &mut k1);
        let h = initial_step(sys, t0, &y0, &k1, rel_tol, abs_tol, max_step);
        Stepper {
            sys,
            rel_tol,
            abs_tol,
            max_step,
            t: t0,
            y: y0,
            k1,
            h,
            fac_old: 1e-4,
            rejected_last: false,
            t_old: t0,
            h_old: 0.0,
            cont: [[0.0; N]; 5],
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    /// Replace the state in place (tangent renormalization), keeping the
    /// adapted step size and refreshing the first-same-as-last stage.
    pub fn set_y(&mut self, y: [f64; N]) {
        self.y = y;
        self.sys.rhs(self.t, &self.y, &mut self.k1);
    }

    /// Take one accepted step, never stepping past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<(), Error> {
        let mut k2 = [0.0; N];
        let mut k3 = [0.0; N];
        let mut k4 = [0.0; N];
        let mut k5 = [0.0; N];
        let mut k6 = [0.0; N];
        let mut k7 = [0.0; N];
        let mut stage = [0.0; N];
        let mut y_new = [0.0; N];

        loop {
            let remaining = t_limit - self.t;
            if remaining <= 0.0 {
                return Ok(());
            }
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            if h < 1e-13 * self.t.abs().max(1.0) && !clipped {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }

            let k1 = &self.k1;
            for i in 0..N {
                stage[i] = self.y[i] + h * A21 * k1[i];
            }
            self.sys.rhs(self.t + C2 * h, &stage, &mut k2);
            for i in 0..N {
                stage[i] = self.y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            self.sys.rhs(self.t + C3 * h, &stage, &mut k3);
            for i in 0..N {
                stage[i] = self.y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            self.sys.rhs(self.t + C4 * h, &stage, &mut k4);
            for i in 0..N {
                stage[i] = self.y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            self.sys.rhs(self.t + C5 * h, &stage, &mut k5);
            for i in 0..N {
                stage[i] = self.y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            self.sys.rhs(self.t + h, &stage, &mut k6);
            for i in 0..N {
                y_new[i] = self.y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            self.sys.rhs(self.t + h, &y_new, &mut k7);

            let mut err_sq = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.abs_tol + self.rel_tol * self.y[i].abs().max(y_new[i].abs());
                err_sq += (e / scale) * (e / scale);
            }
            let err = (err_sq / N as f64).sqrt();

            let fac11 = err.powf(0.2);
            if err <= 1.0 {
                // dense coefficients before projection
                for i in 0..N {
                    let ydiff = y_new[i] - self.y[i];
                    let bspl = h * self.k1[i] - ydiff;
                    self.cont[0][i] = self.y[i];
                    self.cont[1][i] = ydiff;
                    self.cont[2][i] = bspl;
                    self.cont[3][i] = ydiff - h * k7[i] - bspl;
                    self.cont[4][i] = h
                        * (D1 * self.k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                self.t_old = self.t;
                self.h_old = h;
                self.t += h;
                if self.sys.project(self.t, &mut y_new)? {
                    self.sys.rhs(self.t, &y_new, &mut k7);
                }
                self.y = y_new;
                self.k1 = k7;
                self.accepted += 1;

                let fac = (fac11 / self.fac_old.powf(PI_BETA) / SAFETY).clamp(0.1, 5.0);
                let mut h_next = (h / fac).min(self.max_step);
                if self.rejected_last {
                    h_next = h_next.min(h);
                }
                // a clipped step says nothing about accuracy limits
                if clipped {
                    h_next = h_next.max(self.h);
                }
                self.h = h_next;
                self.fac_old = err.max(1e-4);
                self.rejected_last = false;
                return Ok(());
            }

            self.rejected += 1;
            self.rejected_last = true;
            let h_next = h / (fac11 / SAFETY).min(5.0);
            if h_next < 1e-13 * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow {
                    t: self.t,
                    h: h_next,
                });
            }
            self.h = h_next;
        }
    }

    /// Dense evaluation inside the last accepted step, `t ∈ [t_old, t]`.
    pub fn interpolate(&self, t: f64, out: &mut [f64; N]) {
        let theta = if self.h_old == 0.0 {
            0.0
        } else {
            (t - self.t_old) / self.h_old
        };
        let theta1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + theta1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + theta1 * self.cont[4][i])));
        }
    }

    /// Advance to exactly `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<(), Error> {
        while self.t < t_target {
            // snap across a sub-roundoff remainder rather than underflow
            if t_target - self.t < 1e-12 * t_target.abs().max(1.0) {
                self.t = t_target;
                break;
            }
            self.step(t_target)?;
        }
        Ok(())
    }
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
) -> f64 {
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = abs_tol + rel_tol * y0[i].abs();
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y0[i] / sk) * (y0[i] / sk);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(max_step);

    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h * f0[i];
    }
    let mut f1 = [0.0; N];
    sys.rhs(t0 + h, &y1, &mut f1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sk = abs_tol + rel_tol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(max_step)
}

/// The model as an ODE system: populations clamp to zero within
/// `ORTHANT_TOL` and abort beyond it.
pub(crate) struct ModelSystem<'p> {
    pub p: &'p Params,
}

impl OdeSystem<DIM> for ModelSystem<'_> {
    #[inline]
    fn rhs(&self, _t: f64, y: &[f64; DIM], dydt: &mut [f64; DIM]) {
        rhs_into(self.p, y, dydt);
    }

    fn project(&self, t: f64, y: &mut [f64; DIM]) -> Result<bool, Error> {
        let mut changed = false;
        for v in y.iter_mut() {
            if *v < 0.0 {
                if *v < -tol::ORTHANT_TOL {
                    return Err(Error::NegativeState { t, min: *v });
                }
                *v = 0.0;
                changed = true;
            }
        }
        Ok(changed)
    }
}

/// Time-stamped solution samples with step statistics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Strictly increasing sample times, `0, dt, 2dt, …, t_end`.
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    /// Index of the first sample at or after `fraction * t_end`.
    pub fn post_transient_index(&self, fraction: f64) -> usize {
        let t_cut = fraction * *self.times.last().unwrap_or(&0.0);
        self.times.partition_point(|t| *t < t_cut)
    }

    /// Euclidean norms of all samples.
    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(State::norm).collect()
    }
}

/// Integrate the model from `s0` over `[0, cfg.t_end]`, sampling the dense
/// output every `cfg.sample_dt` plus the exact endpoint.
pub fn integrate(p: &Params, s0: &State, cfg: &IntegratorConfig) -> Result<Trajectory, Error> {
    cfg.validate()?;
    p.validate()?;
    if !s0.is_nonnegative(tol::ORTHANT_TOL) {
        return Err(Error::InvalidInput(format!(
            "initial state has a negative component: {s0}"
        )));
    }
    let mut y0 = s0.to_array();
    for v in &mut y0 {
        if *v < 0.0 {
            *v = 0.0;
        }
    }

    let sys = ModelSystem { p };
    let mut stepper = Stepper::new(&sys, cfg.rel_tol, cfg.abs_tol, cfg.max_step, 0.0, y0);

    let n_samples = (cfg.t_end / cfg.sample_dt).floor() as u64;
    let mut times = Vec::with_capacity(n_samples as usize + 2);
    let mut states = Vec::with_capacity(n_samples as usize + 2);
    times.push(0.0);
    states.push(State::from_array(y0));

    let mut next = 1u64;
    let mut buf = [0.0; DIM];
    while stepper.t() < cfg.t_end {
        stepper.step(cfg.t_end)?;
        while next <= n_samples && next as f64 * cfg.sample_dt <= stepper.t() {
            let ts = next as f64 * cfg.sample_dt;
            stepper.interpolate(ts, &mut buf);
            // interpolation may undershoot the clamped endpoints
            for v in &mut buf {
                if *v < 0.0 && *v >= -tol::ORTHANT_TOL {
                    *v = 0.0;
                }
            }
            times.push(ts);
            states.push(State::from_array(buf));
            next += 1;
        }
    }
    if times.last().map(|t| (t - cfg.t_end).abs() > 1e-9) != Some(false) {
        times.push(cfg.t_end);
        states.push(State::from_array(*stepper.y()));
    }

    Ok(Trajectory {
        times,
        states,
        accepted_steps: stepper.accepted,
        rejected_steps: stepper.rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{all_equilibria, find, EquilibriumName};

    #[test]
    fn equilibrium_initial_condition_stays_put() {
        let p = Params::baseline(0.5, 0.2);
        let eqs = all_equilibria(&p).unwrap();
        let v1 = find(&eqs, EquilibriumName::V1).unwrap();
        let cfg = IntegratorConfig {
            t_end: 100.0,
            ..Default::default()
        };
        let traj = integrate(&p, &v1.state, &cfg).unwrap();
        for s in &traj.states {
            assert!(s.distance(&v1.state) < 1e-8);
        }
    }

    #[test]
    fn sampling_grid_is_regular_and_ends_at_t_end() {
        let p = Params::baseline(0.5, 0.7);
        let s0 = State::new(1.0, 0.75, 0.0, 0.0, 0.0, 0.5, 0.5);
        let cfg = IntegratorConfig {
            t_end: 10.0,
            sample_dt: 0.25,
            ..Default::default()
        };
        let traj = integrate(&p, &s0, &cfg).unwrap();
        assert_eq!(traj.times.len(), 41);
        assert_eq!(*traj.times.last().unwrap(), 10.0);
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(traj.accepted_steps > 0);
    }

    #[test]
    fn nonnegativity_is_maintained() {
        let p = Params::baseline(0.5, 2.0);
        let s0 = State::new(1.0, 0.75, 0.0, 0.0, 0.0, 0.5, 0.5);
        let cfg = IntegratorConfig {
            t_end: 500.0,
            ..Default::default()
        };
        let traj = integrate(&p, &s0, &cfg).unwrap();
        for s in &traj.states {
            assert!(s.is_nonnegative(1e-9), "negative sample {s}");
        }
    }

    #[test]
    fn tolerance_refinement_converges() {
        // halving rel_tol moves the endpoint of a converging run by less
        // than ten times the looser tolerance
        let p = Params::baseline(0.2, 0.2);
        let s0 = State::new(1.0, 0.75, 0.0, 0.0, 0.0, 0.5, 0.5);
        let mut cfg = IntegratorConfig {
            t_end: 200.0,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            ..Default::default()
        };
        let loose = integrate(&p, &s0, &cfg).unwrap();
        cfg.rel_tol = 5e-9;
        let tight = integrate(&p, &s0, &cfg).unwrap();
        let d = loose.final_state().distance(tight.final_state());
        assert!(d < 10.0 * 1e-8, "endpoint moved by {d}");
    }

    #[test]
    fn rejects_negative_initial_condition() {
        let p = Params::baseline(1.0, 1.0);
        let s0 = State::new(-0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(integrate(&p, &s0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn dense_output_matches_step_endpoints() {
        let p = Params::baseline(0.5, 0.7);
        let sys = ModelSystem { p: &p };
        let y0 = State::new(1.0, 0.75, 0.0, 0.0, 0.0, 0.5, 0.5).to_array();
        let mut st = Stepper::new(&sys, 1e-9, 1e-11, 100.0, 0.0, y0);
        for _ in 0..50 {
            let y_before = *st.y();
            let t_before = st.t();
            st.step(f64::INFINITY).unwrap();
            let mut at_start = [0.0; DIM];
            st.interpolate(t_before, &mut at_start);
            let mut at_end = [0.0; DIM];
            st.interpolate(st.t(), &mut at_end);
            for i in 0..DIM {
                assert!((at_start[i] - y_before[i]).abs() < 1e-12);
                assert!((at_end[i] - st.y()[i]).abs() < 1e-9);
            }
        }
    }
}
