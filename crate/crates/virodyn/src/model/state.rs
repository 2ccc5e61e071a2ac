//! Population state vector and the fixed component ordering.

/// Number of populations.
pub const DIM: usize = 7;

/// Dense 7x7 real matrix with rows and columns in [`State`] field order.
pub type Matrix7 = nalgebra::SMatrix<f64, 7, 7>;

/// Population sizes, ordered `(x1, x2, ys1, y1, y2, zs, z)`.
///
/// Every matrix, CSV column layout, and array conversion in this crate
/// inherits this order. All components are nonnegative on trajectories; the
/// closed-form equilibria may carry negative components, which marks them
/// biologically infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct State {
    /// Uninfected cells of type 1 (fraction of the virus-free maximum).
    pub x1: f64,
    /// Uninfected cells of type 2.
    pub x2: f64,
    /// Specialist-infected cells.
    pub ys1: f64,
    /// Generalist-infected type-1 cells.
    pub y1: f64,
    /// Generalist-infected type-2 cells.
    pub y2: f64,
    /// Specialist virions.
    pub zs: f64,
    /// Generalist virions.
    pub z: f64,
}

impl State {
    pub const ZERO: State = State {
        x1: 0.0,
        x2: 0.0,
        ys1: 0.0,
        y1: 0.0,
        y2: 0.0,
        zs: 0.0,
        z: 0.0,
    };

    /// Component names in state order, as used in CSV headers.
    pub const FIELD_NAMES: [&'static str; DIM] = ["x1", "x2", "ys1", "y1", "y2", "zs", "z"];

    #[allow(clippy::too_many_arguments)]
    pub const fn new(x1: f64, x2: f64, ys1: f64, y1: f64, y2: f64, zs: f64, z: f64) -> State {
        State {
            x1,
            x2,
            ys1,
            y1,
            y2,
            zs,
            z,
        }
    }

    pub const fn from_array(a: [f64; DIM]) -> State {
        State::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6])
    }

    pub const fn to_array(self) -> [f64; DIM] {
        [
            self.x1, self.x2, self.ys1, self.y1, self.y2, self.zs, self.z,
        ]
    }

    /// Euclidean norm of the population vector.
    ///
    /// ```
    /// use virodyn::State;
    /// assert_eq!(State::new(3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0).norm(), 5.0);
    /// ```
    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance to another state.
    pub fn distance(&self, other: &State) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter()
            .zip(&b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    }

    pub fn min_component(&self) -> f64 {
        self.to_array().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// True when every component is at least `-tol`.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.min_component() >= -tol
    }

    /// Componentwise mean of a set of states; `None` when empty.
    pub fn mean(states: &[State]) -> Option<State> {
        if states.is_empty() {
            return None;
        }
        let mut acc = [0.0; DIM];
        for s in states {
            for (a, v) in acc.iter_mut().zip(s.to_array()) {
                *a += v;
            }
        }
        let n = states.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Some(State::from_array(acc))
    }
}

impl std::ops::Index<usize> for State {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x1,
            1 => &self.x2,
            2 => &self.ys1,
            3 => &self.y1,
            4 => &self.y2,
            5 => &self.zs,
            6 => &self.z,
            _ => panic!("state index {i} out of range 0..7"),
        }
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}, {}, {}, {})",
            self.x1, self.x2, self.ys1, self.y1, self.y2, self.zs, self.z
        )
    }
}
