//! Catalog of Fourier-multiplier symbols `k(xi)` and a lattice-scan checker
//! for the dissipativity/symmetry/growth conditions the splitting estimates
//! rest on.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `tanh(xi)/xi` with the removable singularity resolved; a short series is
/// used near zero to avoid cancellation.
fn tanh_ratio(xi: f64) -> f64 {
    if xi.abs() < 1e-8 {
        1.0 - xi * xi / 3.0
    } else {
        xi.tanh() / xi
    }
}

type CustomEval = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Zero,
    Kdv,
    BenjaminOno,
    Burgers,
    /// `-i xi |xi|^{a-1}` with exponent `a` in [1, 3].
    Fractional { a: f64 },
    Whitham,
    ExtendedWhitham { beta: f64 },
    Custom { label: String, eval: CustomEval },
}

/// A Fourier multiplier `k(xi)` together with its declared growth order `p`
/// (the exponent in `|k(xi)| <~ <xi>^p`).
#[derive(Clone)]
pub struct Symbol {
    kind: Kind,
    p: f64,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name())
            .field("p", &self.p)
            .finish()
    }
}

/// Optional parameters for the parametrized catalog entries.
#[derive(Clone, Copy, Debug, Default)]
pub struct SymbolParams {
    /// Surface-tension parameter of the extended Whitham symbol (`beta > 0`).
    pub beta: Option<f64>,
    /// Exponent of the fractional symbol (`a` in `[1, 3]`).
    pub a: Option<f64>,
}

impl Symbol {
    /// Build a catalog symbol by name. Accepted names: `zero`, `kdv`, `bo`,
    /// `burgers`, `fractional`, `whitham`, `extended_whitham`.
    pub fn from_name(name: &str, params: SymbolParams) -> Result<Symbol> {
        match name {
            "zero" => Ok(Symbol {
                kind: Kind::Zero,
                p: 0.0,
            }),
            "kdv" => Ok(Symbol {
                kind: Kind::Kdv,
                p: 3.0,
            }),
            "bo" => Ok(Symbol {
                kind: Kind::BenjaminOno,
                p: 2.0,
            }),
            "burgers" => Ok(Symbol {
                kind: Kind::Burgers,
                p: 2.0,
            }),
            "fractional" => {
                let a = params.a.ok_or_else(|| {
                    Error::Symbol("fractional symbol requires parameter a".into())
                })?;
                if !(1.0..=3.0).contains(&a) {
                    return Err(Error::Symbol(format!(
                        "fractional exponent a = {a} outside [1, 3]"
                    )));
                }
                Ok(Symbol {
                    kind: Kind::Fractional { a },
                    p: a,
                })
            }
            "whitham" => Ok(Symbol {
                kind: Kind::Whitham,
                p: 0.5,
            }),
            "extended_whitham" => {
                let beta = params.beta.ok_or_else(|| {
                    Error::Symbol("extended_whitham symbol requires parameter beta".into())
                })?;
                if !(beta > 0.0) {
                    return Err(Error::Symbol(format!(
                        "extended_whitham requires beta > 0, got {beta}"
                    )));
                }
                Ok(Symbol {
                    kind: Kind::ExtendedWhitham { beta },
                    p: 1.5,
                })
            }
            other => Err(Error::Symbol(format!(
                "unknown symbol `{other}`; accepted: zero, kdv, bo, burgers, \
                 fractional, whitham, extended_whitham"
            ))),
        }
    }

    /// Hand-built symbol for negative tests and experiments.
    pub fn custom(
        label: impl Into<String>,
        p: f64,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Symbol {
        Symbol {
            kind: Kind::Custom {
                label: label.into(),
                eval: Arc::new(eval),
            },
            p,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Zero => "zero".into(),
            Kind::Kdv => "kdv".into(),
            Kind::BenjaminOno => "bo".into(),
            Kind::Burgers => "burgers".into(),
            Kind::Fractional { a } => format!("fractional(a={a})"),
            Kind::Whitham => "whitham".into(),
            Kind::ExtendedWhitham { beta } => format!("extended_whitham(beta={beta})"),
            Kind::Custom { label, .. } => label.clone(),
        }
    }

    /// Declared growth order.
    pub fn growth_order(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        match &self.kind {
            Kind::Zero => Complex64::new(0.0, 0.0),
            Kind::Kdv => Complex64::new(0.0, -xi * xi * xi),
            Kind::BenjaminOno => Complex64::new(0.0, xi * xi.abs()),
            Kind::Burgers => Complex64::new(-xi * xi, 0.0),
            Kind::Fractional { a } => {
                // |xi|^{a-1} at xi = 0 taken as its continuous limit
                let mag = if xi == 0.0 && *a > 1.0 {
                    0.0
                } else {
                    xi.abs().powf(a - 1.0)
                };
                Complex64::new(0.0, -xi * mag)
            }
            Kind::Whitham => Complex64::new(0.0, xi * tanh_ratio(xi).sqrt()),
            Kind::ExtendedWhitham { beta } => Complex64::new(
                0.0,
                xi * (1.0 + beta * xi * xi).sqrt() * tanh_ratio(xi).sqrt(),
            ),
            Kind::Custom { eval, .. } => eval(xi),
        }
    }

    /// Whether `Re(k) < 0` somewhere on the given lattice.
    pub fn is_dissipative_on(&self, xis: &[f64]) -> bool {
        xis.iter().any(|&xi| self.eval(xi).re < -1e-14)
    }
}

/// Outcome of the lattice scan over the symbol conditions.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    /// `Re(k(xi)) <= 0` held everywhere on the lattice.
    pub dissipativity_ok: bool,
    /// `k(-xi) = conj(k(xi))` held everywhere on the lattice.
    pub symmetry_ok: bool,
    /// `max |k(xi)| / <xi>^p` over the lattice.
    pub growth_constant: f64,
    /// Empirical constant of the two-point cancellation bound:
    /// `max |(xi+eta)k(xi+eta) - eta k(eta) - xi k(xi)| /
    /// (|xi|<eta>^p + |eta|<xi>^p)` over all lattice pairs.
    pub cocycle_constant: f64,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.dissipativity_ok
            && self.symmetry_ok
            && self.growth_constant.is_finite()
            && self.cocycle_constant.is_finite()
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dissipativity_ok={}", self.dissipativity_ok)?;
        writeln!(f, "symmetry_ok={}", self.symmetry_ok)?;
        writeln!(f, "growth_constant={:.16e}", self.growth_constant)?;
        write!(f, "cocycle_constant={:.16e}", self.cocycle_constant)
    }
}

const CONDITION_TOL: f64 = 1e-12;

/// Scan a symbol on a uniform lattice of `nsamples` points covering
/// `[-ximax, ximax]`: single points for dissipativity/symmetry/growth, all
/// pairs for the cancellation constant. A scan, not a proof.
pub fn verify_conditions(sym: &Symbol, ximax: f64, nsamples: usize) -> Result<ConditionReport> {
    if !(ximax > 0.0) {
        return Err(Error::Symbol(format!("ximax = {ximax} must be positive")));
    }
    if nsamples < 16 {
        return Err(Error::Symbol(format!(
            "nsamples = {nsamples} too small (need >= 16)"
        )));
    }

    let h = 2.0 * ximax / (nsamples - 1) as f64;
    let xis: Vec<f64> = (0..nsamples).map(|i| -ximax + i as f64 * h).collect();
    let ks: Vec<Complex64> = xis.iter().map(|&xi| sym.eval(xi)).collect();
    for (&xi, k) in xis.iter().zip(&ks) {
        if !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::NonFiniteMultiplier { xi });
        }
    }

    let p = sym.growth_order();
    let mut dissipativity_ok = true;
    let mut symmetry_ok = true;
    let mut growth_constant: f64 = 0.0;
    for (&xi, k) in xis.iter().zip(&ks) {
        if k.re > CONDITION_TOL {
            dissipativity_ok = false;
        }
        let mirror = sym.eval(-xi);
        if (mirror - k.conj()).norm() > CONDITION_TOL * (1.0 + k.norm()) {
            symmetry_ok = false;
        }
        growth_constant = growth_constant.max(k.norm() / (1.0 + xi * xi).powf(p / 2.0));
    }

    // xi_i + xi_j lands on a lattice of the same spacing; precompute
    // xi*k(xi) on that extended lattice so the pair loop is pure arithmetic.
    let nsum = 2 * nsamples - 1;
    let sum_vals: Vec<Complex64> = (0..nsum)
        .map(|i| {
            let xi = -2.0 * ximax + i as f64 * h;
            let k = sym.eval(xi);
            Complex64::new(xi, 0.0) * k
        })
        .collect();
    let point_vals: Vec<Complex64> = xis
        .iter()
        .zip(&ks)
        .map(|(&xi, k)| Complex64::new(xi, 0.0) * k)
        .collect();
    let brackets: Vec<f64> = xis.iter().map(|&xi| (1.0 + xi * xi).powf(p / 2.0)).collect();

    let mut cocycle_constant: f64 = 0.0;
    for i in 0..nsamples {
        let xi = xis[i];
        for j in 0..nsamples {
            let eta = xis[j];
            let denom = xi.abs() * brackets[j] + eta.abs() * brackets[i];
            if denom == 0.0 {
                // the (0, 0) pair is 0/0 by construction
                continue;
            }
            let num = (sum_vals[i + j] - point_vals[i] - point_vals[j]).norm();
            let r = num / denom;
            if r > cocycle_constant {
                cocycle_constant = r;
            }
        }
    }

    Ok(ConditionReport {
        dissipativity_ok,
        symmetry_ok,
        growth_constant,
        cocycle_constant,
    })
}

/// All catalog entries with their default parameters, used by sweeps and
/// negative-control tests.
pub fn catalog() -> Vec<Symbol> {
    vec![
        Symbol::from_name("zero", SymbolParams::default()).unwrap(),
        Symbol::from_name("kdv", SymbolParams::default()).unwrap(),
        Symbol::from_name("bo", SymbolParams::default()).unwrap(),
        Symbol::from_name("burgers", SymbolParams::default()).unwrap(),
        Symbol::from_name(
            "fractional",
            SymbolParams {
                a: Some(1.5),
                ..Default::default()
            },
        )
        .unwrap(),
        Symbol::from_name("whitham", SymbolParams::default()).unwrap(),
        Symbol::from_name(
            "extended_whitham",
            SymbolParams {
                beta: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kdv_value() {
        let s = Symbol::from_name("kdv", SymbolParams::default()).unwrap();
        let v = s.eval(2.0);
        assert_abs_diff_eq!(v.re, 0.0);
        assert_abs_diff_eq!(v.im, -8.0);
        assert_eq!(s.growth_order(), 3.0);
    }

    #[test]
    fn whitham_removable_singularity() {
        let s = Symbol::from_name("whitham", SymbolParams::default()).unwrap();
        assert_eq!(s.eval(0.0), Complex64::new(0.0, 0.0));
        // series and direct evaluation agree across the switch point
        let lo = s.eval(9.9e-9).im / 9.9e-9;
        let hi = s.eval(1.1e-8).im / 1.1e-8;
        assert_abs_diff_eq!(lo, hi, epsilon = 1e-12);
    }

    #[test]
    fn extended_whitham_growth_order() {
        let s = Symbol::from_name(
            "extended_whitham",
            SymbolParams {
                beta: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.growth_order(), 1.5);
    }

    #[test]
    fn fractional_matches_cubic_at_a3() {
        let s = Symbol::from_name(
            "fractional",
            SymbolParams {
                a: Some(3.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(s.eval(2.0).im, -8.0, epsilon = 1e-14);
        assert_eq!(s.eval(0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn invalid_names_and_params() {
        assert!(Symbol::from_name("banana", SymbolParams::default()).is_err());
        assert!(Symbol::from_name("fractional", SymbolParams::default()).is_err());
        assert!(Symbol::from_name(
            "fractional",
            SymbolParams {
                a: Some(0.5),
                ..Default::default()
            }
        )
        .is_err());
        assert!(Symbol::from_name(
            "extended_whitham",
            SymbolParams {
                beta: Some(0.0),
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn burgers_conditions() {
        let s = Symbol::from_name("burgers", SymbolParams::default()).unwrap();
        let r = verify_conditions(&s, 50.0, 256).unwrap();
        assert!(r.dissipativity_ok);
        assert!(r.symmetry_ok);
        assert!(r.growth_constant <= 1.0 + 1e-12);
    }

    #[test]
    fn planted_counterexample_fails_dissipativity() {
        let s = Symbol::custom("plus_xi_squared", 2.0, |xi| Complex64::new(xi * xi, 0.0));
        let r = verify_conditions(&s, 50.0, 256).unwrap();
        assert!(!r.dissipativity_ok);
    }

    #[test]
    fn kdv_cocycle_stable_under_window_doubling() {
        let s = Symbol::from_name("kdv", SymbolParams::default()).unwrap();
        let a = verify_conditions(&s, 50.0, 512).unwrap().cocycle_constant;
        let b = verify_conditions(&s, 100.0, 1024).unwrap().cocycle_constant;
        assert!(a.is_finite() && b.is_finite());
        assert!((b - a).abs() / a < 0.1, "a = {a}, b = {b}");
    }

    #[test]
    fn catalog_passes_and_dispersive_entries_have_zero_real_part() {
        for s in catalog() {
            let r = verify_conditions(&s, 100.0, 512).unwrap();
            assert!(r.passed(), "{} failed: {r:?}", s.name());
            if s.name() != "burgers" {
                for i in 0..512 {
                    let xi = -100.0 + i as f64 * 200.0 / 511.0;
                    assert!(s.eval(xi).re.abs() <= 1e-14, "{} at {xi}", s.name());
                }
            }
        }
    }

    #[test]
    fn scan_parameter_validation() {
        let s = Symbol::from_name("kdv", SymbolParams::default()).unwrap();
        assert!(verify_conditions(&s, 0.0, 256).is_err());
        assert!(verify_conditions(&s, 10.0, 8).is_err());
    }
}
