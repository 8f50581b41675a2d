//! Equispaced grids on the unit periodic box `[0,1)^d`, `d ∈ {1, 2}`.
//!
//! Grid vectors are stored row-major: in 2D the flat index of `(j0, j1)` is
//! `j0 * n + j1` and the sample sits at `(j0 h, j1 h)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
}

/// One class of the reflection `j -> -j (mod n)` acting on grid indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    /// Smallest flat index in the class.
    pub rep: usize,
    /// All flat indices in the class (one or two entries).
    pub members: Vec<usize>,
}

impl Orbit {
    pub fn weight(&self) -> usize {
        self.members.len()
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::ParameterDomain(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n == 0 {
            return Err(Error::ParameterDomain(
                "grid needs at least one point".into(),
            ));
        }
        Ok(Self { dim, n })
    }

    pub fn line(n: usize) -> Self {
        Self::new(1, n).expect("n > 0")
    }

    pub fn square(n: usize) -> Self {
        Self::new(2, n).expect("n > 0")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Spacing `1/n`; always derived, never stored.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Quadrature weight `h^dim` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    /// Total number of samples, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis integer indices of a flat index.
    pub fn unflatten(&self, j: usize) -> [usize; 2] {
        if self.dim == 1 {
            [j, 0]
        } else {
            [j / self.n, j % self.n]
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0] % self.n
        } else {
            (idx[0] % self.n) * self.n + idx[1] % self.n
        }
    }

    /// Coordinates of sample `j` (second entry is 0 in 1D).
    pub fn coords(&self, j: usize) -> [f64; 2] {
        let [a, b] = self.unflatten(j);
        let h = self.h();
        [a as f64 * h, b as f64 * h]
    }

    /// Flat index of `-j (mod n)` per axis.
    pub fn neg(&self, j: usize) -> usize {
        let [a, b] = self.unflatten(j);
        let n = self.n;
        self.flatten([(n - a) % n, (n - b) % n])
    }

    /// Flat index of `i + j (mod n)` per axis.
    pub fn add(&self, i: usize, j: usize) -> usize {
        let [a, b] = self.unflatten(i);
        let [c, d] = self.unflatten(j);
        self.flatten([a + c, b + d])
    }

    /// Flat index of `i - j (mod n)` per axis.
    pub fn sub(&self, i: usize, j: usize) -> usize {
        self.add(i, self.neg(j))
    }

    /// Signed per-axis representative in `(-n/2, n/2]` of a flat index.
    pub fn signed(&self, j: usize) -> [i64; 2] {
        let n = self.n as i64;
        let wrap = |v: usize| {
            let v = v as i64;
            if 2 * v > n {
                v - n
            } else {
                v
            }
        };
        let [a, b] = self.unflatten(j);
        [wrap(a), if self.dim == 1 { 0 } else { wrap(b) }]
    }

    /// Reflection classes of all grid indices, ordered by representative.
    pub fn orbits(&self) -> Vec<Orbit> {
        (0..self.len())
            .filter_map(|j| {
                let m = self.neg(j);
                if j < m {
                    Some(Orbit {
                        rep: j,
                        members: vec![j, m],
                    })
                } else if j == m {
                    Some(Orbit {
                        rep: j,
                        members: vec![j],
                    })
                } else {
                    None
                }
            })
            .collect()
    }

    /// Reduced non-zero wavenumbers: one representative per pair `{k, -k}`.
    ///
    /// In 1D these are `1..=n/2`; in 2D one element of each pair of
    /// opposite non-zero wave vectors.
    pub fn reduced_wavenumbers(&self) -> Vec<usize> {
        self.orbits()
            .into_iter()
            .map(|o| o.rep)
            .filter(|&k| k != 0)
            .collect()
    }

    /// `2π k·x_j` for flat wavenumber `k` and flat sample index `j`, reduced mod 2π
    /// through integer arithmetic so large products stay exact.
    pub fn phase(&self, k: usize, j: usize) -> f64 {
        let [k0, k1] = self.unflatten(k);
        let [j0, j1] = self.unflatten(j);
        let n = self.n as u64;
        let r = ((k0 as u64 * j0 as u64) % n + (k1 as u64 * j1 as u64) % n) % n;
        2.0 * std::f64::consts::PI * r as f64 / n as f64
    }
}

/// Wraps a real into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed periodic difference in `[-1/2, 1/2)`.
pub fn periodic_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - (d + 0.5).floor()
}
