//! Finite grids standing in for the effort/performance space, probability
//! masses on them, and noise kernels.
//!
//! Measures are purely atomic: a "density" is a fine grid with one mass
//! per cell, so every integral is an exact finite sum. All values are
//! immutable after construction and every operation is a pure function.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tol;
use crate::util::kahan_sum;

/// A point of a [`GridDomain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Line(f64),
    Plane(f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Line { coords: Vec<f64> },
    Plane { xs: Vec<f64>, ys: Vec<f64> },
}

/// A finite poset of grid points: either a 1D grid (total order) or a
/// full m×n product lattice (product partial order).
///
/// 2D points are indexed row-major: index = ix * ny + iy.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDomain {
    repr: Repr,
}

fn check_ascending(coords: &[f64], what: &str) -> Result<()> {
    if coords.is_empty() {
        return Err(Error::Domain(format!("{what}: empty coordinate list")));
    }
    for c in coords {
        if !c.is_finite() {
            return Err(Error::Domain(format!("{what}: non-finite coordinate")));
        }
    }
    for w in coords.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Domain(format!(
                "{what}: coordinates must be strictly ascending"
            )));
        }
    }
    Ok(())
}

impl GridDomain {
    /// 1D grid from strictly ascending coordinates.
    pub fn line(coords: Vec<f64>) -> Result<Self> {
        check_ascending(&coords, "line domain")?;
        Ok(GridDomain {
            repr: Repr::Line { coords },
        })
    }

    /// Uniform 1D grid of `n` points spanning `[min, max]`.
    pub fn line_uniform(min: f64, max: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("line domain: zero points".into()));
        }
        if !(min < max) && n > 1 {
            return Err(Error::Domain("line domain: min must be below max".into()));
        }
        let coords = if n == 1 {
            vec![min]
        } else {
            (0..n)
                .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
                .collect()
        };
        Self::line(coords)
    }

    /// Full product lattice of two strictly ascending axes.
    pub fn plane(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_ascending(&xs, "plane domain x-axis")?;
        check_ascending(&ys, "plane domain y-axis")?;
        Ok(GridDomain {
            repr: Repr::Plane { xs, ys },
        })
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Line { coords } => coords.len(),
            Repr::Plane { xs, ys } => xs.len() * ys.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_line(&self) -> bool {
        matches!(self.repr, Repr::Line { .. })
    }

    /// 1D coordinates, if this is a line.
    pub fn line_coords(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Line { coords } => Some(coords),
            Repr::Plane { .. } => None,
        }
    }

    /// Lattice shape (nx, ny), if this is a plane.
    pub fn plane_shape(&self) -> Option<(usize, usize)> {
        match &self.repr {
            Repr::Line { .. } => None,
            Repr::Plane { xs, ys } => Some((xs.len(), ys.len())),
        }
    }

    pub fn point(&self, i: usize) -> Point {
        match &self.repr {
            Repr::Line { coords } => Point::Line(coords[i]),
            Repr::Plane { xs, ys } => {
                let ny = ys.len();
                Point::Plane(xs[i / ny], ys[i % ny])
            }
        }
    }

    /// The poset order: `a ⪯ b`.
    pub fn le(&self, a: usize, b: usize) -> bool {
        match &self.repr {
            Repr::Line { .. } => a <= b,
            Repr::Plane { ys, .. } => {
                let ny = ys.len();
                (a / ny <= b / ny) && (a % ny <= b % ny)
            }
        }
    }

    /// Covering pairs `(lower, upper)` of the poset; monotonicity along
    /// covers implies monotonicity on all comparable pairs.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        match &self.repr {
            Repr::Line { coords } => (1..coords.len()).map(|i| (i - 1, i)).collect(),
            Repr::Plane { xs, ys } => {
                let (nx, ny) = (xs.len(), ys.len());
                let mut out = Vec::with_capacity(2 * nx * ny);
                for ix in 0..nx {
                    for iy in 0..ny {
                        let i = ix * ny + iy;
                        if iy + 1 < ny {
                            out.push((i, i + 1));
                        }
                        if ix + 1 < nx {
                            out.push((i, i + ny));
                        }
                    }
                }
                out
            }
        }
    }

    /// Index of the grid point with this exact coordinate, 1D only.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let coords = self.line_coords()?;
        coords
            .binary_search_by(|c| c.total_cmp(&x))
            .ok()
            .or_else(|| coords.iter().position(|&c| c == x))
    }

    /// Index of the 1D grid point closest to `x` (ties to the lower point).
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let coords = self.line_coords()?;
        let mut best = 0usize;
        for (i, &c) in coords.iter().enumerate() {
            if (c - x).abs() < (coords[best] - x).abs() {
                best = i;
            }
        }
        Some(best)
    }
}

/// Nonnegative masses on a [`GridDomain`] summing to one.
///
/// Masses within [`tol::RENORMALIZE`] of total 1 are renormalized at
/// construction; anything farther off is rejected so that badly scaled
/// input fails loudly instead of being silently fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    domain: GridDomain,
    mass: Vec<f64>,
}

impl GridMeasure {
    pub fn new(domain: GridDomain, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != domain.len() {
            return Err(Error::Structural(format!(
                "measure has {} masses for {} grid points",
                mass.len(),
                domain.len()
            )));
        }
        for (i, &m) in mass.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Domain(format!("mass[{i}] = {m} is not a nonnegative real")));
            }
        }
        let total = kahan_sum(mass.iter().copied());
        if (total - 1.0).abs() > tol::RENORMALIZE {
            return Err(Error::Domain(format!(
                "masses sum to {total}, more than {} away from 1",
                tol::RENORMALIZE
            )));
        }
        let mut measure = GridMeasure { domain, mass };
        if (total - 1.0).abs() > tol::STRUCTURAL {
            for m in &mut measure.mass {
                *m /= total;
            }
        }
        debug_assert!((measure.total() - 1.0).abs() <= tol::STRUCTURAL);
        Ok(measure)
    }

    pub fn uniform(domain: GridDomain) -> Result<Self> {
        let n = domain.len();
        Self::new(domain, vec![1.0 / n as f64; n])
    }

    /// Point mass at one grid point.
    pub fn dirac(domain: GridDomain, index: usize) -> Result<Self> {
        let n = domain.len();
        if index >= n {
            return Err(Error::Structural(format!("dirac index {index} outside grid of {n}")));
        }
        let mut mass = vec![0.0; n];
        mass[index] = 1.0;
        Self::new(domain, mass)
    }

    /// Measure concentrated on the listed atoms. Repeated indices accumulate.
    pub fn from_atoms(domain: GridDomain, atoms: &[(usize, f64)]) -> Result<Self> {
        let n = domain.len();
        let mut mass = vec![0.0; n];
        for &(i, w) in atoms {
            if i >= n {
                return Err(Error::Structural(format!("atom index {i} outside grid of {n}")));
            }
            mass[i] += w;
        }
        Self::new(domain, mass)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Exact sum of the stored masses.
    pub fn total(&self) -> f64 {
        kahan_sum(self.mass.iter().copied())
    }

    /// Indices carrying strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

fn check_values(f: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::Structural(format!(
            "{f} has {} values for {} grid points",
            values.len(),
            n
        )));
    }
    Ok(())
}

/// `Σ_i f_i · μ_i`.
pub fn integrate(f: &[f64], mu: &GridMeasure) -> Result<f64> {
    check_values("integrand", f, mu.domain().len())?;
    Ok(kahan_sum(f.iter().zip(mu.mass()).map(|(v, m)| v * m)))
}

/// `Σ_{i ≥ t} f_i · μ_i` on a 1D grid (tail inclusive of `t`).
pub fn upper_integral(f: &[f64], mu: &GridMeasure, t: usize) -> Result<f64> {
    if !mu.domain().is_line() {
        return Err(Error::Unsupported(
            "upper integrals are defined on 1D grids only".into(),
        ));
    }
    let n = mu.domain().len();
    check_values("integrand", f, n)?;
    if t >= n {
        return Err(Error::Structural(format!("tail point {t} outside grid of {n}")));
    }
    Ok(kahan_sum(
        f[t..].iter().zip(&mu.mass()[t..]).map(|(v, m)| v * m),
    ))
}

/// Markov kernel from a 1D effort grid to a 1D performance grid.
///
/// Rows are probability vectors and must be first-order-stochastically
/// increasing in effort: for every performance threshold, the mass at or
/// above it is non-decreasing in effort. That makes every induced win
/// probability non-decreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseKernel {
    effort: GridDomain,
    performance: GridDomain,
    rows: Vec<Vec<f64>>,
}

impl NoiseKernel {
    pub fn new(effort: GridDomain, performance: GridDomain, rows: Vec<Vec<f64>>) -> Result<Self> {
        if !effort.is_line() || !performance.is_line() {
            return Err(Error::Unsupported("noise kernels require 1D grids".into()));
        }
        if rows.len() != effort.len() {
            return Err(Error::Structural(format!(
                "kernel has {} rows for {} effort points",
                rows.len(),
                effort.len()
            )));
        }
        let ns = performance.len();
        let mut normalized = Vec::with_capacity(rows.len());
        for (x, row) in rows.into_iter().enumerate() {
            check_values("kernel row", &row, ns)?;
            for (s, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::Domain(format!(
                        "kernel row {x} entry {s} = {p} is not a nonnegative real"
                    )));
                }
            }
            let total = kahan_sum(row.iter().copied());
            if (total - 1.0).abs() > tol::RENORMALIZE {
                return Err(Error::Domain(format!(
                    "kernel row {x} sums to {total}, more than {} away from 1",
                    tol::RENORMALIZE
                )));
            }
            let row = if (total - 1.0).abs() > tol::STRUCTURAL {
                row.iter().map(|p| p / total).collect()
            } else {
                row
            };
            normalized.push(row);
        }
        let kernel = NoiseKernel {
            effort,
            performance,
            rows: normalized,
        };
        kernel.check_fosd()?;
        Ok(kernel)
    }

    /// Kernel that maps each effort point to itself (shared grid).
    pub fn identity(domain: GridDomain) -> Result<Self> {
        let n = domain.len();
        let rows = (0..n)
            .map(|x| {
                let mut row = vec![0.0; n];
                row[x] = 1.0;
                row
            })
            .collect();
        Self::new(domain.clone(), domain, rows)
    }

    fn check_fosd(&self) -> Result<()> {
        let ns = self.performance.len();
        let tails: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|row| {
                let mut tail = vec![0.0; ns];
                let mut acc = 0.0;
                for s in (0..ns).rev() {
                    acc += row[s];
                    tail[s] = acc;
                }
                tail
            })
            .collect();
        for x in 1..tails.len() {
            for s in 0..ns {
                if tails[x][s] < tails[x - 1][s] - tol::STRUCTURAL {
                    return Err(Error::Domain(format!(
                        "kernel rows are not stochastically increasing: tail at performance {s} \
                         drops from effort {} to {}",
                        x - 1,
                        x
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn effort_domain(&self) -> &GridDomain {
        &self.effort
    }

    pub fn performance_domain(&self) -> &GridDomain {
        &self.performance
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }
}

/// Distribution of performance induced by an effort distribution:
/// `ν_s = Σ_x μ_x · K[x→s]`.
pub fn pushforward(mu: &GridMeasure, kernel: &NoiseKernel) -> Result<GridMeasure> {
    if mu.domain() != kernel.effort_domain() {
        return Err(Error::Structural(
            "pushforward: measure domain differs from kernel effort domain".into(),
        ));
    }
    let ns = kernel.performance_domain().len();
    let mass: Vec<f64> = (0..ns)
        .map(|s| kahan_sum(mu.mass().iter().enumerate().map(|(x, &m)| m * kernel.row(x)[s])))
        .collect();
    GridMeasure::new(kernel.performance_domain().clone(), mass)
}

pub(crate) fn mismatch(what: &str) -> Error {
    Error::Structural(String::from(what))
}
