//! Convergence-order measurement, one-step local-error probes, and
//! falsification-style numerical checks of the commutator and bilinear
//! Sobolev inequalities the error analysis relies on.

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::reference::reference_solve;
use crate::spectral::{Grid, RealField, SpectralField};
use crate::splitting::{evolve, godunov_step, strang_step, Scheme, SchemeConfig};
use crate::symbols::Symbol;

/// Ordinary least squares on `(log2 x, log2 y)` pairs. Returns `(slope, r2)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// A high-accuracy endpoint solution plus its estimated error floor per
/// Sobolev index, reusable across the step sizes of a study.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub endpoint: RealField,
    pub horizon: f64,
    pub sigmas: Vec<f64>,
    pub floor: Vec<f64>,
}

/// Solve the reference problem to `horizon` with a step that divides it
/// exactly (at most `dt_ref_target`), and estimate the floor by comparing
/// against a half-step run.
pub fn compute_reference(
    u0: &RealField,
    sym: &Symbol,
    horizon: f64,
    dt_ref_target: f64,
    sigmas: &[f64],
) -> Result<ReferenceSolution> {
    let n_ref = (horizon / dt_ref_target).ceil().max(1.0);
    let dt_ref = horizon / n_ref;
    let endpoint = reference_solve(u0, sym, horizon, dt_ref, true)?;
    let finer = reference_solve(u0, sym, horizon, 0.5 * dt_ref, true)?;
    let gap = endpoint.sub(&finer)?;
    let floor = sigmas.iter().map(|&s| gap.sobolev_norm(s)).collect();
    Ok(ReferenceSolution {
        endpoint,
        horizon,
        sigmas: sigmas.to_vec(),
        floor,
    })
}

/// Endpoint error of a splitting run against a matched-horizon reference,
/// per Sobolev index.
pub fn global_error(
    cfg: &SchemeConfig,
    u0: &RealField,
    sigmas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let t_n = cfg.step_count() as f64 * cfg.dt;
    let reference = compute_reference(u0, &cfg.symbol, t_n, cfg.dt / 64.0, sigmas)?;
    global_error_against(cfg, u0, sigmas, &reference)
}

/// As [`global_error`] but with a caller-supplied reference (its horizon
/// must match the run's `N dt`).
pub fn global_error_against(
    cfg: &SchemeConfig,
    u0: &RealField,
    sigmas: &[f64],
    reference: &ReferenceSolution,
) -> Result<Vec<(f64, f64)>> {
    let t_n = cfg.step_count() as f64 * cfg.dt;
    if (t_n - reference.horizon).abs() > 1e-9 * reference.horizon.max(1.0) {
        return Err(Error::Config(format!(
            "reference horizon {} does not match run endpoint {}",
            reference.horizon, t_n
        )));
    }
    let traj = evolve(u0, cfg)?;
    let diff = traj.final_state().sub(&reference.endpoint)?;
    Ok(sigmas.iter().map(|&s| (s, diff.sobolev_norm(s))).collect())
}

/// One `(dt, errors per sigma)` row of a convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceSample {
    pub dt: f64,
    pub errors: Vec<f64>,
    pub admitted: Vec<bool>,
}

/// Fitted order for one Sobolev index. `slope` is `None` when every point
/// sat on the reference floor (degenerate fit: no splitting error to
/// measure).
#[derive(Clone, Debug)]
pub struct SigmaFit {
    pub sigma: f64,
    pub slope: Option<f64>,
    pub r2: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub symbol: String,
    pub sigmas: Vec<f64>,
    pub samples: Vec<ConvergenceSample>,
    pub fits: Vec<SigmaFit>,
    pub reference_floor: Vec<f64>,
}

impl ConvergenceReport {
    pub fn fit_for(&self, sigma: f64) -> Option<&SigmaFit> {
        self.fits.iter().find(|f| f.sigma == sigma)
    }

    /// Write the `dt,sigma,error,admitted` CSV.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("dt,sigma,error,admitted\n");
        for sample in &self.samples {
            for ((sigma, err), adm) in self
                .sigmas
                .iter()
                .zip(&sample.errors)
                .zip(&sample.admitted)
            {
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{}\n",
                    sample.dt, sigma, err, adm
                ));
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// The human-readable summary block with `slope_<sigma>=` and
    /// `r2_<sigma>=` footer lines.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scheme={}\nsymbol={}\n", self.scheme, self.symbol));
        for (sigma, floor) in self.sigmas.iter().zip(&self.reference_floor) {
            out.push_str(&format!("reference_floor_{}={:.16e}\n", fmt_sigma(*sigma), floor));
        }
        for fit in &self.fits {
            match (fit.slope, fit.r2) {
                (Some(slope), Some(r2)) => {
                    out.push_str(&format!("slope_{}={:.6}\n", fmt_sigma(fit.sigma), slope));
                    out.push_str(&format!("r2_{}={:.6}\n", fmt_sigma(fit.sigma), r2));
                }
                _ => {
                    out.push_str(&format!("slope_{}=degenerate\n", fmt_sigma(fit.sigma)));
                }
            }
        }
        out
    }
}

fn fmt_sigma(sigma: f64) -> String {
    if sigma.fract() == 0.0 {
        format!("{}", sigma as i64)
    } else {
        format!("{sigma}").replace('.', "p")
    }
}

/// Sweep the step sizes, measure endpoint errors against one shared
/// reference, and fit per-sigma log-log slopes on the admitted points
/// (those more than 10x above the reference floor).
pub fn convergence_study(
    base_cfg: &SchemeConfig,
    u0: &RealField,
    dts: &[f64],
    sigmas: &[f64],
) -> Result<ConvergenceReport> {
    validate_dts(dts)?;
    let dt_min = *dts.last().unwrap();
    let cfg0 = SchemeConfig {
        dt: dts[0],
        ..base_cfg.clone()
    };
    let t_n = cfg0.step_count() as f64 * dts[0];
    let reference = compute_reference(u0, &base_cfg.symbol, t_n, dt_min / 64.0, sigmas)?;
    convergence_study_against(base_cfg, u0, dts, sigmas, &reference)
}

/// As [`convergence_study`] with a caller-supplied reference. Every tested
/// `dt` must reach the reference horizon exactly.
pub fn convergence_study_against(
    base_cfg: &SchemeConfig,
    u0: &RealField,
    dts: &[f64],
    sigmas: &[f64],
    reference: &ReferenceSolution,
) -> Result<ConvergenceReport> {
    validate_dts(dts)?;
    // roundoff guard so floors that are identically zero (e.g. trivial data)
    // do not admit pure noise into the fit
    let noise: Vec<f64> = sigmas
        .iter()
        .map(|&s| 1e-13 * reference.endpoint.sobolev_norm(s))
        .collect();
    let mut samples = Vec::with_capacity(dts.len());
    for &dt in dts {
        let cfg = SchemeConfig {
            dt,
            ..base_cfg.clone()
        };
        let errs = global_error_against(&cfg, u0, sigmas, reference)?;
        let errors: Vec<f64> = errs.iter().map(|&(_, e)| e).collect();
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config(format!("non-finite error at dt = {dt}")));
        }
        let admitted = errors
            .iter()
            .zip(reference.floor.iter().zip(&noise))
            .map(|(e, (fl, nz))| *e > 10.0 * fl + nz)
            .collect();
        samples.push(ConvergenceSample {
            dt,
            errors,
            admitted,
        });
    }

    let mut fits = Vec::with_capacity(sigmas.len());
    for (i, &sigma) in sigmas.iter().enumerate() {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .filter(|s| s.admitted[i])
            .map(|s| (s.dt, s.errors[i]))
            .collect();
        if pts.is_empty() {
            fits.push(SigmaFit {
                sigma,
                slope: None,
                r2: None,
            });
        } else if pts.len() < 3 {
            return Err(Error::FitUnreliable {
                admitted: pts.len(),
            });
        } else {
            let (slope, r2) = fit_loglog(&pts);
            fits.push(SigmaFit {
                sigma,
                slope: Some(slope),
                r2: Some(r2),
            });
        }
    }

    Ok(ConvergenceReport {
        scheme: format!("{}_{}", base_cfg.scheme.as_str(), base_cfg.order.as_str()),
        symbol: base_cfg.symbol.name(),
        sigmas: sigmas.to_vec(),
        samples,
        fits,
        reference_floor: reference.floor.clone(),
    })
}

fn validate_dts(dts: &[f64]) -> Result<()> {
    if dts.len() < 4 {
        return Err(Error::Config(format!(
            "need at least 4 step sizes, got {}",
            dts.len()
        )));
    }
    if dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("step sizes must be strictly decreasing".into()));
    }
    Ok(())
}

/// Measured one-step errors per step size, plus the fitted slope.
#[derive(Clone, Debug)]
pub struct LocalOrderReport {
    pub scheme: String,
    pub symbol: String,
    pub sigma: f64,
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub r2: f64,
}

impl LocalOrderReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("dt,sigma,error,admitted\n");
        for &(dt, err) in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},true\n",
                dt, self.sigma, err
            ));
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Fit the order of the error of a single composite step against a fine
/// reference over the same interval.
pub fn local_error_order(
    base_cfg: &SchemeConfig,
    u0: &RealField,
    dts: &[f64],
    sigma: f64,
) -> Result<LocalOrderReport> {
    validate_dts(dts)?;
    let mut pts = Vec::with_capacity(dts.len());
    for &dt in dts {
        let cfg = SchemeConfig {
            dt,
            horizon: dt,
            ..base_cfg.clone()
        };
        cfg.validate()?;
        let stepped = match cfg.scheme {
            Scheme::Godunov => godunov_step(u0, &cfg)?,
            Scheme::Strang => strang_step(u0, &cfg)?,
        };
        let fine = reference_solve(u0, &cfg.symbol, dt, dt / 256.0, true)?;
        let finer = reference_solve(u0, &cfg.symbol, dt, dt / 512.0, true)?;
        let floor = fine.sub(&finer)?.sobolev_norm(sigma);
        let err = stepped.sub(&fine)?.sobolev_norm(sigma);
        if err > 10.0 * floor + 1e-13 * fine.sobolev_norm(sigma) {
            pts.push((dt, err));
        }
    }
    if pts.len() < 3 {
        return Err(Error::FitUnreliable {
            admitted: pts.len(),
        });
    }
    let (slope, r2) = fit_loglog(&pts);
    Ok(LocalOrderReport {
        scheme: format!("{}_{}", base_cfg.scheme.as_str(), base_cfg.order.as_str()),
        symbol: base_cfg.symbol.name(),
        sigma,
        samples: pts,
        slope,
        r2,
    })
}

const ZERO_RHS_TOL: f64 = 1e-12;

/// Apply `D^s = F^{-1}[i xi <xi>^s F]`, the derivative-weighted bracket.
fn bracket_derivative(f: &SpectralField, s: f64) -> SpectralField {
    f.apply_multiplier(|xi| Complex64::new(0.0, xi * (1.0 + xi * xi).powf(s / 2.0)))
        .expect("finite multiplier")
}

/// Dealiased physical product of two spectral fields.
fn product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    Ok(a.inverse().mul(&b.inverse())?.forward().dealias())
}

/// Ratio `LHS / RHS` of the commutator bound
/// `|| D^s(fg) - (D^s f) g - f (D^s g) ||_{L2}
///   <= C (||f||_{H^s} ||g||_{H^sigma} + ||f||_{H^sigma} ||g||_{H^s})`.
pub fn verify_commutator(f: &RealField, g: &RealField, s: f64, sigma: f64) -> Result<f64> {
    let fh = f.forward();
    let gh = g.forward();
    let lhs_field = bracket_derivative(&product(&fh, &gh)?, s)
        .sub(&product(&bracket_derivative(&fh, s), &gh)?)?
        .sub(&product(&fh, &bracket_derivative(&gh, s))?)?;
    let lhs = lhs_field.sobolev_norm(0.0);
    let rhs = fh.sobolev_norm(s) * gh.sobolev_norm(sigma) + fh.sobolev_norm(sigma) * gh.sobolev_norm(s);
    ratio(lhs, rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BilinearVariant {
    /// `|<f, (fg)_x>_{H^s}| <= C ||f||_{H^s}^2 ||g||_{H^{s+1}}`
    A,
    /// `|<f, f f_x>_{H^s}| <= C ||f||_{H^s}^2 ||f||_{H^sigma}`
    B,
}

/// Ratio `LHS / RHS` of the bilinear bound; variant B ignores `g`.
pub fn verify_bilinear(
    f: &RealField,
    g: &RealField,
    s: f64,
    sigma: f64,
    variant: BilinearVariant,
) -> Result<f64> {
    let fh = f.forward();
    match variant {
        BilinearVariant::A => {
            let gh = g.forward();
            let fg_x = product(&fh, &gh)?.derivative();
            let lhs = fh.sobolev_inner(&fg_x, s)?.abs();
            let rhs = fh.sobolev_norm(s).powi(2) * gh.sobolev_norm(s + 1.0);
            ratio(lhs, rhs)
        }
        BilinearVariant::B => {
            let ffx = product(&fh, &fh.derivative())?;
            let lhs = fh.sobolev_inner(&ffx, s)?.abs();
            let rhs = fh.sobolev_norm(s).powi(2) * fh.sobolev_norm(sigma);
            ratio(lhs, rhs)
        }
    }
}

fn ratio(lhs: f64, rhs: f64) -> Result<f64> {
    if rhs == 0.0 {
        if lhs > ZERO_RHS_TOL {
            return Err(Error::ImpossibleRatio);
        }
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InequalityKind {
    Commutator,
    BilinearProduct,
    BilinearSelf,
}

impl InequalityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityKind::Commutator => "commutator",
            InequalityKind::BilinearProduct => "bilinear_product",
            InequalityKind::BilinearSelf => "bilinear_self",
        }
    }

    pub const ALL: [InequalityKind; 3] = [
        InequalityKind::Commutator,
        InequalityKind::BilinearProduct,
        InequalityKind::BilinearSelf,
    ];
}

/// Summary of a randomized inequality scan.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    pub trials: usize,
    pub max_ratio: f64,
    /// Relative change of `max_ratio` when the grid is doubled with the same
    /// trial functions.
    pub ratio_stability: f64,
}

impl fmt::Display for InequalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inequality={}", self.kind.as_str())?;
        writeln!(f, "trials={}", self.trials)?;
        writeln!(f, "max_ratio={:.16e}", self.max_ratio)?;
        write!(f, "ratio_stability={:.16e}", self.ratio_stability)
    }
}

/// Highest mode used by the random trial polynomials. Kept low enough that
/// pairwise products stay inside the 2/3-rule band on the base grid, so the
/// computed ratios are grid-exact.
const TRIAL_MAX_MODE: usize = 10;

fn random_trial_coeffs(rng: &mut impl Rng) -> Vec<Complex64> {
    (1..=TRIAL_MAX_MODE)
        .map(|m| {
            let decay = (1.0 + (m * m) as f64).powf(-1.0);
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay
        })
        .collect()
}

/// Synthesize a real trig polynomial from per-mode coefficients on a grid.
fn synthesize(grid: &Grid, coeffs: &[Complex64]) -> RealField {
    let n = grid.n();
    let mut spec = SpectralField::zeros(grid.clone());
    for (m, c) in coeffs.iter().enumerate() {
        let m = m + 1;
        spec.coeffs_mut()[m] = *c;
        spec.coeffs_mut()[n - m] = c.conj();
    }
    spec.inverse()
}

/// Run `trials` random band-limited trials of one inequality at indices
/// `(s, sigma)` on grid `base_n` and its doubling, reporting the maximum
/// ratio and its stability across the two resolutions.
pub fn run_inequality_trials(
    kind: InequalityKind,
    trials: usize,
    seed: u64,
    base_n: usize,
    s: f64,
    sigma: f64,
) -> Result<InequalityReport> {
    let coarse = Grid::with_default_length(base_n)?;
    let fine = Grid::with_default_length(2 * base_n)?;
    if base_n < 4 * TRIAL_MAX_MODE {
        return Err(Error::Config(format!(
            "base grid n = {base_n} too coarse for trial band {TRIAL_MAX_MODE}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_coarse: f64 = 0.0;
    let mut max_fine: f64 = 0.0;
    for _ in 0..trials {
        let fc = random_trial_coeffs(&mut rng);
        let gc = random_trial_coeffs(&mut rng);
        for (grid, acc) in [(&coarse, &mut max_coarse), (&fine, &mut max_fine)] {
            let f = synthesize(grid, &fc);
            let g = synthesize(grid, &gc);
            let r = match kind {
                InequalityKind::Commutator => verify_commutator(&f, &g, s, sigma)?,
                InequalityKind::BilinearProduct => {
                    verify_bilinear(&f, &g, s, sigma, BilinearVariant::A)?
                }
                InequalityKind::BilinearSelf => {
                    verify_bilinear(&f, &g, s, sigma, BilinearVariant::B)?
                }
            };
            if !r.is_finite() {
                return Err(Error::Config("non-finite inequality ratio".into()));
            }
            *acc = acc.max(r);
        }
    }
    let ratio_stability = if max_coarse == 0.0 {
        0.0
    } else {
        (max_fine - max_coarse).abs() / max_coarse
    };
    Ok(InequalityReport {
        kind,
        trials,
        max_ratio: max_coarse,
        ratio_stability,
    })
}
