//! Steady-state response of the double-sided cavity, with and without the
//! quantum dot coupled in.
//!
//! Everything here is a pure function of [`CavityParams`] and the probe
//! frequency. Coefficients follow the weak-excitation steady state
//! (`<sigma_z> ~ -1`), so there is no photon-number dependence.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six rates/frequencies describing one dot-cavity system.
///
/// All fields share one frequency unit. `kappa_s` and `gamma` enter the
/// denominators as `kappa_s / 2` and `gamma / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Dot-cavity coupling strength.
    pub g: f64,
    /// Cavity field decay rate into the input/output modes.
    pub kappa: f64,
    /// Side leakage (and background absorption) rate.
    pub kappa_s: f64,
    /// Dipole decay parameter.
    pub gamma: f64,
    /// Cavity mode frequency.
    pub omega_c: f64,
    /// Trion transition frequency.
    pub omega_x: f64,
}

impl CavityParams {
    pub fn new(
        g: f64,
        kappa: f64,
        kappa_s: f64,
        gamma: f64,
        omega_c: f64,
        omega_x: f64,
    ) -> Result<Self> {
        let params = Self {
            g,
            kappa,
            kappa_s,
            gamma,
            omega_c,
            omega_x,
        };
        params.validate()?;
        Ok(params)
    }

    /// Cavity and transition both at zero frequency, `kappa = 1`.
    pub fn resonant(g: f64, kappa_s: f64, gamma: f64) -> Result<Self> {
        Self::new(g, 1.0, kappa_s, gamma, 0.0, 0.0)
    }

    /// Ingest values given in micro-eV and rescale everything to units of
    /// the supplied `kappa` (so the result has `kappa == 1`).
    pub fn from_micro_ev(
        g: f64,
        kappa: f64,
        kappa_s: f64,
        gamma: f64,
        omega_c: f64,
        omega_x: f64,
    ) -> Result<Self> {
        check_kappa(kappa)?;
        Self::new(
            g / kappa,
            1.0,
            kappa_s / kappa,
            gamma / kappa,
            omega_c / kappa,
            omega_x / kappa,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_s", self.kappa_s),
            ("gamma", self.gamma),
            ("omega_c", self.omega_c),
            ("omega_x", self.omega_x),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        check_kappa(self.kappa)?;
        for (name, value) in [
            ("g", self.g),
            ("kappa_s", self.kappa_s),
            ("gamma", self.gamma),
        ] {
            if value < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be non-negative, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// Probe tuned exactly to the cavity mode.
    pub fn cavity_resonance(&self) -> ProbeFrequency {
        ProbeFrequency(self.omega_c)
    }
}

// kappa = 0 makes t0 a 0/0 at lossless resonance.
fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "kappa",
            reason: format!("must be finite and > 0, got {kappa}"),
        })
    }
}

/// Frequency of the input photon, in the same unit as [`CavityParams`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbeFrequency(pub f64);

impl ProbeFrequency {
    pub fn new(omega: f64) -> Result<Self> {
        let probe = Self(omega);
        probe.validate()?;
        Ok(probe)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("probe frequency must be finite, got {}", self.0),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Reflection and transmission amplitudes at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientPair {
    pub r: Complex64,
    pub t: Complex64,
}

/// Coefficients of the cavity with the dot decoupled (`g = 0`).
pub fn empty_cavity_coeffs(
    params: &CavityParams,
    probe: ProbeFrequency,
) -> Result<CoefficientPair> {
    params.validate()?;
    probe.validate()?;
    Ok(empty_unchecked(params, probe.0))
}

fn empty_unchecked(params: &CavityParams, omega: f64) -> CoefficientPair {
    let detuning = Complex64::new(0.0, params.omega_c - omega);
    let denom = detuning + params.kappa + params.kappa_s / 2.0;
    CoefficientPair {
        r: (detuning + params.kappa_s / 2.0) / denom,
        t: Complex64::from(-params.kappa) / denom,
    }
}

/// Coefficients of the dot-coupled cavity. `r` is always built as `1 + t`.
///
/// At `g = 0` this returns exactly the empty-cavity coefficients; the
/// coupled formula is 0/0 there when `gamma = 0` and the probe sits on the
/// transition.
pub fn coupled_cavity_coeffs(
    params: &CavityParams,
    probe: ProbeFrequency,
) -> Result<CoefficientPair> {
    params.validate()?;
    probe.validate()?;
    Ok(coupled_unchecked(params, probe.0))
}

fn coupled_unchecked(params: &CavityParams, omega: f64) -> CoefficientPair {
    if params.g == 0.0 {
        return empty_unchecked(params, omega);
    }
    let dipole = Complex64::new(params.gamma / 2.0, params.omega_x - omega);
    let cavity = Complex64::new(params.kappa + params.kappa_s / 2.0, params.omega_c - omega);
    let t = -params.kappa * dipole / (dipole * cavity + params.g * params.g);
    CoefficientPair { r: 1.0 + t, t }
}

/// Amplitude-based operator fidelity `|t0| / sqrt(|t0|^2 + |t|^2)` between
/// the full and the ideal transmission operators.
pub fn gate_fidelity(params: &CavityParams, probe: ProbeFrequency) -> Result<f64> {
    params.validate()?;
    probe.validate()?;
    let t0 = empty_unchecked(params, probe.0).t.norm();
    let t = coupled_unchecked(params, probe.0).t.norm();
    fidelity_from_magnitudes(t0, t)
}

// Written as sqrt(1 / (1 + x^2)) so that |t| == |t0| gives exactly sqrt(0.5).
pub(crate) fn fidelity_from_magnitudes(abs_t0: f64, abs_t: f64) -> Result<f64> {
    if abs_t0 == 0.0 && abs_t == 0.0 {
        return Err(Error::DegenerateFidelity);
    }
    if abs_t0 == 0.0 {
        return Ok(0.0);
    }
    let ratio = abs_t / abs_t0;
    Ok((1.0 / (1.0 + ratio * ratio)).sqrt())
}

/// Magnitudes of all four coefficients plus the gate fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Response {
    pub abs_r0: f64,
    pub abs_t0: f64,
    pub abs_r: f64,
    pub abs_t: f64,
    pub fidelity: f64,
}

impl Response {
    pub fn at(params: &CavityParams, probe: ProbeFrequency) -> Result<Self> {
        params.validate()?;
        probe.validate()?;
        let empty = empty_unchecked(params, probe.0);
        let coupled = coupled_unchecked(params, probe.0);
        let (abs_t0, abs_t) = (empty.t.norm(), coupled.t.norm());
        Ok(Self {
            abs_r0: empty.r.norm(),
            abs_t0,
            abs_r: coupled.r.norm(),
            abs_t,
            fidelity: fidelity_from_magnitudes(abs_t0, abs_t)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectraRow {
    pub omega: f64,
    #[serde(flatten)]
    pub response: Response,
}

/// Frequency sweep at fixed cavity parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectraTable {
    pub params: CavityParams,
    pub rows: Vec<SpectraRow>,
}

pub const SPECTRA_CSV_HEADER: &str = "omega,abs_r0,abs_t0,abs_r,abs_t,fidelity";

impl SpectraTable {
    /// CSV with header `omega,abs_r0,abs_t0,abs_r,abs_t,fidelity`, LF line
    /// endings, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        write_csv(
            "omega",
            self.rows.iter().map(|row| (row.omega, &row.response)),
        )
    }

    pub fn column(&self, f: impl Fn(&SpectraRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Sweep the probe over a uniform grid of `n_points` frequencies, endpoints
/// included.
pub fn sweep_spectra(
    params: &CavityParams,
    omega_min: f64,
    omega_max: f64,
    n_points: usize,
) -> Result<SpectraTable> {
    params.validate()?;
    let grid = uniform_grid("omega", omega_min, omega_max, n_points)?;
    let rows = grid
        .into_iter()
        .map(|omega| {
            Ok(SpectraRow {
                omega,
                response: Response::at(params, ProbeFrequency(omega))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectraTable {
        params: *params,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    G,
    KappaS,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::G => "g",
            SweepParameter::KappaS => "kappa_s",
        }
    }

    fn apply(self, params: &CavityParams, value: f64) -> CavityParams {
        match self {
            SweepParameter::G => CavityParams {
                g: value,
                ..*params
            },
            SweepParameter::KappaS => CavityParams {
                kappa_s: value,
                ..*params
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterRow {
    pub value: f64,
    #[serde(flatten)]
    pub response: Response,
}

/// Sweep of `g` or `kappa_s` at a fixed probe frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSweep {
    pub parameter: SweepParameter,
    pub probe: ProbeFrequency,
    pub base: CavityParams,
    pub rows: Vec<ParameterRow>,
}

impl ParameterSweep {
    /// Same layout as [`SpectraTable::to_csv`], with the swept parameter's
    /// name as the first column.
    pub fn to_csv(&self) -> String {
        write_csv(
            self.parameter.name(),
            self.rows.iter().map(|row| (row.value, &row.response)),
        )
    }
}

pub fn sweep_parameter(
    base: &CavityParams,
    probe: ProbeFrequency,
    parameter: SweepParameter,
    min: f64,
    max: f64,
    n_points: usize,
) -> Result<ParameterSweep> {
    base.validate()?;
    probe.validate()?;
    let name = parameter.name();
    let grid = uniform_grid(name, min, max, n_points)?;
    if min < 0.0 {
        return Err(Error::InvalidRange {
            name,
            reason: format!("lower bound must be non-negative, got {min}"),
        });
    }
    let rows = grid
        .into_iter()
        .map(|value| {
            let params = parameter.apply(base, value);
            Ok(ParameterRow {
                value,
                response: Response::at(&params, probe)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParameterSweep {
        parameter,
        probe,
        base: *base,
        rows,
    })
}

pub(crate) fn uniform_grid(name: &'static str, min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidRange {
            name,
            reason: format!("bounds must be finite, got [{min}, {max}]"),
        });
    }
    if min >= max {
        return Err(Error::InvalidRange {
            name,
            reason: format!("min ({min}) must be below max ({max})"),
        });
    }
    if n < 2 {
        return Err(Error::InvalidRange {
            name,
            reason: format!("need at least 2 grid points, got {n}"),
        });
    }
    let step = (max - min) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| min + step * i as f64).collect();
    grid[n - 1] = max;
    Ok(grid)
}

/// Fixed 17-significant-digit scientific notation, locale independent.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv<'a>(first: &str, rows: impl Iterator<Item = (f64, &'a Response)>) -> String {
    let mut out = String::new();
    out.push_str(first);
    out.push_str(",abs_r0,abs_t0,abs_r,abs_t,fidelity\n");
    for (x, r) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_float(x),
            format_float(r.abs_r0),
            format_float(r.abs_t0),
            format_float(r.abs_r),
            format_float(r.abs_t),
            format_float(r.fidelity)
        );
    }
    out
}
