//! Periodic grid, Fourier transforms, multiplier application, discrete
//! Sobolev norms and 2/3-rule dealiasing.
//!
//! Coefficients are stored in FFT layout: slot `j` holds the mode
//! `m = j` for `j < n/2` and `m = j - n` otherwise, with the true
//! trig-polynomial normalization `c_m = (1/n) sum_j u(x_j) e^{-i xi_m x_j}`.
//! The Nyquist slot `m = -n/2` has no Hermitian partner and is pinned to
//! zero everywhere.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    n: usize,
    length: f64,
    xs: Vec<f64>,
    xis: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Periodic spatial grid on `[0, L)` with its wavenumber lattice.
///
/// Cheap to clone; transform plans are cached inside and shared.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("length", &self.0.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.n == other.0.n && self.0.length == other.0.length)
    }
}

impl Grid {
    /// Build a grid with `n` equispaced samples on `[0, length)`.
    ///
    /// `n` must be even and at least 8; `length` must be positive.
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 8 {
            return Err(Error::Grid(format!("n = {n} too small (need n >= 8)")));
        }
        if n % 2 != 0 {
            return Err(Error::Grid(format!("n = {n} must be even")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Grid(format!("length = {length} must be positive")));
        }
        let xs = (0..n).map(|j| j as f64 * length / n as f64).collect();
        let dxi = 2.0 * std::f64::consts::PI / length;
        let xis = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                m as f64 * dxi
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid(Arc::new(GridInner {
            n,
            length,
            xs,
            xis,
            fwd,
            inv,
        })))
    }

    /// Grid with the default domain length `2*pi`.
    pub fn with_default_length(n: usize) -> Result<Grid> {
        Grid::new(n, 2.0 * std::f64::consts::PI)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    /// Sample abscissae `x_j = j L / n`.
    pub fn xs(&self) -> &[f64] {
        &self.0.xs
    }

    /// Wavenumber lattice in FFT layout.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.xis
    }

    /// Integer mode number stored in slot `j`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.0.n;
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Slot holding the unpaired Nyquist mode `m = -n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.0.n / 2
    }

    /// Largest lattice wavenumber magnitude, `pi n / L`.
    pub fn xi_max(&self) -> f64 {
        std::f64::consts::PI * self.0.n as f64 / self.0.length
    }
}

/// State as physical samples `u(x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
}

/// State as Fourier coefficients in FFT layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<RealField> {
        if samples.len() != grid.n() {
            return Err(Error::Grid(format!(
                "sample count {} does not match grid n = {}",
                samples.len(),
                grid.n()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        Ok(RealField { grid, samples })
    }

    pub fn zeros(grid: Grid) -> RealField {
        let n = grid.n();
        RealField {
            grid,
            samples: vec![0.0; n],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> RealField {
        let n = grid.n();
        RealField {
            grid,
            samples: vec![c; n],
        }
    }

    /// Sample a closure at the grid abscissae.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> RealField {
        let samples = grid.xs().iter().map(|&x| f(x)).collect();
        RealField { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// Mean value `(1/L) \int u dx`, exact for grid data.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.grid.n() as f64
    }

    pub fn forward(&self) -> SpectralField {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.grid.0.fwd.process(&mut buf);
        let scale = 1.0 / n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf[n / 2] = Complex64::new(0.0, 0.0);
        SpectralField {
            grid: self.grid.clone(),
            coeffs: buf,
        }
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.forward().sobolev_norm(s)
    }

    pub fn sub(&self, other: &RealField) -> Result<RealField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Ok(RealField {
            grid: self.grid.clone(),
            samples,
        })
    }

    /// Pointwise product; aliasing is the caller's concern.
    pub fn mul(&self, other: &RealField) -> Result<RealField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        Ok(RealField {
            grid: self.grid.clone(),
            samples,
        })
    }

    /// Circular shift by whole grid cells.
    pub fn translate_cells(&self, cells: usize) -> RealField {
        let n = self.grid.n();
        let k = cells % n;
        let mut samples = Vec::with_capacity(n);
        for j in 0..n {
            samples.push(self.samples[(j + n - k) % n]);
        }
        RealField {
            grid: self.grid.clone(),
            samples,
        }
    }

    /// Write the `x,u` CSV snapshot with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("x,u\n");
        for (x, u) in self.grid.xs().iter().zip(&self.samples) {
            out.push_str(&format!("{:.16e},{:.16e}\n", x, u));
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Read an `x,u` CSV snapshot onto the given grid.
    pub fn read_csv(grid: Grid, path: &Path) -> Result<RealField> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "x,u" => {}
            other => {
                return Err(Error::Snapshot(format!(
                    "expected header `x,u`, found {:?}",
                    other
                )))
            }
        }
        let mut samples = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let _x = parts
                .next()
                .ok_or_else(|| Error::Snapshot("missing x column".into()))?;
            let u: f64 = parts
                .next()
                .ok_or_else(|| Error::Snapshot("missing u column".into()))?
                .trim()
                .parse()
                .map_err(|e| Error::Snapshot(format!("bad u value: {e}")))?;
            samples.push(u);
        }
        RealField::new(grid, samples)
    }
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<SpectralField> {
        if coeffs.len() != grid.n() {
            return Err(Error::Grid(format!(
                "coefficient count {} does not match grid n = {}",
                coeffs.len(),
                grid.n()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> SpectralField {
        let n = grid.n();
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of integer mode `m` (FFT layout lookup).
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        debug_assert!(m >= -n / 2 && m < n / 2);
        let j = if m >= 0 { m } else { m + n } as usize;
        self.coeffs[j]
    }

    pub fn inverse(&self) -> RealField {
        let mut buf = self.coeffs.clone();
        self.grid.0.inv.process(&mut buf);
        let samples = buf.iter().map(|c| c.re).collect();
        RealField {
            grid: self.grid.clone(),
            samples,
        }
    }

    /// Largest imaginary part of the inverse transform, i.e. how far the
    /// coefficients are from representing a real function.
    pub fn imaginary_residue(&self) -> f64 {
        let mut buf = self.coeffs.clone();
        self.grid.0.inv.process(&mut buf);
        buf.iter().fold(0.0, |a, c| a.max(c.im.abs()))
    }

    /// Worst Hermitian-symmetry defect `|c_{-m} - conj(c_m)|` over paired
    /// modes, plus the Nyquist magnitude (which must be zero).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = self.coeffs[n / 2].norm();
        worst = worst.max(self.coeffs[0].im.abs());
        for m in 1..n / 2 {
            let d = (self.coeffs[n - m] - self.coeffs[m].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    /// Apply a Fourier multiplier `m(xi)` slotwise; the Nyquist slot is
    /// re-zeroed afterwards.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Result<SpectralField> {
        let n = self.grid.n();
        let mut coeffs = Vec::with_capacity(n);
        for (j, &c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.wavenumbers()[j];
            let v = m(xi);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFiniteMultiplier { xi });
            }
            coeffs.push(v * c);
        }
        coeffs[n / 2] = Complex64::new(0.0, 0.0);
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    /// Spectral derivative, the multiplier `i xi`.
    pub fn derivative(&self) -> SpectralField {
        self.apply_multiplier(|xi| Complex64::new(0.0, xi))
            .expect("i*xi is finite on any lattice")
    }

    /// Zero every mode with `|m| > n/3` (2/3 rule). Idempotent.
    pub fn dealias(&self) -> SpectralField {
        let n = self.grid.n();
        let mut coeffs = self.coeffs.clone();
        for (j, c) in coeffs.iter_mut().enumerate() {
            let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            if 3 * m.unsigned_abs() > n as u64 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Discrete Sobolev norm `(L sum <xi_m>^{2s} |c_m|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.wavenumbers()[j];
            let w = (1.0 + xi * xi).powf(s);
            acc += w * c.norm_sqr();
        }
        (self.grid.length() * acc).sqrt()
    }

    /// Real part of the discrete `H^s` inner product
    /// `L sum <xi_m>^{2s} c_m conj(d_m)`.
    pub fn sobolev_inner(&self, other: &SpectralField, s: f64) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut acc = 0.0;
        for (j, (c, d)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let xi = self.grid.wavenumbers()[j];
            let w = (1.0 + xi * xi).powf(s);
            acc += w * (c * d.conj()).re;
        }
        Ok(self.grid.length() * acc)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    /// Write the `m,re,im` CSV snapshot with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("m,re,im\n");
        for (j, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", self.grid.mode(j), c.re, c.im));
        }
        fs::write(path, out)?;
        Ok(())
    }
}
