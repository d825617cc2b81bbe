//! Protocol-level analytics for the coincidence cascades and the
//! number-resolving single-unit protocol.
//!
//! Units are indexed from the output: unit 1 is the last one before the
//! output and unit `l` receives the N00N state. Every schedule in this crate
//! is stored in that order.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Reflectance, MAX_PHOTONS_PER_MODE};
use crate::unit::DetectionEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(photons: u32) -> Parity {
        if photons % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// One instance of a coincidence cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    parity: Parity,
    photons: u32,
    phase: f64,
    /// `reflectances[0]` belongs to unit 1, nearest the output.
    reflectances: Vec<Reflectance>,
}

impl CascadeSpec {
    pub fn new(parity: Parity, photons: u32, phase: f64, reflectances: &[f64]) -> Result<Self> {
        if Parity::of(photons) != parity {
            return Err(Error::Parity(format!(
                "N = {photons} is not {}",
                match parity {
                    Parity::Odd => "odd",
                    Parity::Even => "even",
                }
            )));
        }
        let min = match parity {
            Parity::Odd => 3,
            Parity::Even => 2,
        };
        if photons < min || photons > MAX_PHOTONS_PER_MODE {
            return Err(Error::InvalidSpec(format!(
                "cascade needs {min} <= N <= {MAX_PHOTONS_PER_MODE}, got {photons}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter("phase must be finite".into()));
        }
        let units = (photons / 2) as usize;
        if reflectances.len() != units {
            return Err(Error::InvalidSpec(format!(
                "N = {photons} needs {units} reflectances, got {}",
                reflectances.len()
            )));
        }
        let reflectances = reflectances
            .iter()
            .map(|&r| Reflectance::new(r))
            .collect::<Result<_>>()?;
        Ok(CascadeSpec {
            parity,
            photons,
            phase,
            reflectances,
        })
    }

    /// Infers the parity from `photons`.
    pub fn for_photons(photons: u32, phase: f64, reflectances: &[f64]) -> Result<Self> {
        Self::new(Parity::of(photons), photons, phase, reflectances)
    }

    /// Every unit at the same reflectance.
    pub fn uniform(photons: u32, phase: f64, rho: f64) -> Result<Self> {
        Self::for_photons(photons, phase, &vec![rho; (photons / 2) as usize])
    }

    /// The schedule maximizing the success probability.
    pub fn optimal(photons: u32, phase: f64) -> Result<Self> {
        let schedule = optimal_schedule(photons)?;
        Self::for_photons(photons, phase, &schedule.reflectances)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn units(&self) -> usize {
        self.reflectances.len()
    }

    /// Reflectance of unit `k` (1-based, counted from the output).
    pub fn reflectance(&self, k: usize) -> Reflectance {
        self.reflectances[k - 1]
    }

    pub fn reflectances(&self) -> Vec<f64> {
        self.reflectances.iter().map(|r| r.value()).collect()
    }

    fn rho(&self, k: usize) -> f64 {
        self.reflectances[k - 1].value()
    }
}

/// Closed-form efficiency and fidelity of a coincidence cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub parity: Parity,
    pub photons: u32,
    pub phase: f64,
    /// Unit 1 first.
    pub reflectances: Vec<f64>,
    /// Every coincidence unit heralds (1,1).
    pub p_all_11: f64,
    /// Exactly one unit heralds (1,2), all other coincidence units (1,1).
    pub p_one_12: f64,
    /// Exactly one unit heralds (2,1), all other coincidence units (1,1).
    pub p_one_21: f64,
    /// Probability that an accepted output is `|1::0⟩^{Nφ}`.
    pub p_cond: f64,
    /// Unconditional probability of emitting `|1::0⟩^{Nφ}`.
    pub p_success: f64,
}

/// How the odd cascade weights a faulty (1,2)/(2,1) herald in unit `i > 1`.
///
/// A three-photon loss multiplies the relative phase of the surviving state
/// by `i^{m-n}`, which shifts the final two-photon interference in unit 1 by
/// `∓π/2`. `Tracked` carries that shift, giving `(1 ± sin Nφ)` for every
/// unit; `Literal` uses `(1 + cos Nφ)` for `i > 1` as the published closed
/// form does. The two agree whenever `cos Nφ = 0`; only `Tracked` matches
/// the full-state enumeration in general.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OddBranchWeights {
    #[default]
    Tracked,
    Literal,
}

fn pow(x: f64, e: i64) -> f64 {
    x.powi(e as i32)
}

/// Analytics for the odd cascade with phase-tracked branch weights.
pub fn odd_analytics(spec: &CascadeSpec) -> Result<AnalyticsReport> {
    odd_analytics_with(spec, OddBranchWeights::Tracked)
}

pub fn odd_analytics_with(spec: &CascadeSpec, weights: OddBranchWeights) -> Result<AnalyticsReport> {
    if spec.parity != Parity::Odd {
        return Err(Error::Parity("odd analytics need an odd cascade".into()));
    }
    let l = spec.units();
    let rho = |k: usize| spec.rho(k);
    let kf = |k: usize| k as f64;
    // P_{2k+1}(1,1,ρ_k)
    let all = |k: usize| 0.5 * kf(k) * (2.0 * kf(k) + 1.0) * pow(1.0 - rho(k), 2 * k as i64 - 1) * rho(k).powi(2);
    // P_{2k+1}(1,1,ρ_k) / (1 - ρ_k), division-free
    let after = |k: usize| 0.5 * kf(k) * (2.0 * kf(k) + 1.0) * pow(1.0 - rho(k), 2 * k as i64 - 2) * rho(k).powi(2);
    // P_{2k+1}(1,1,ρ_k) · ρ_k / (1 - ρ_k), division-free
    let lossy = |k: usize| 0.5 * kf(k) * (2.0 * kf(k) + 1.0) * pow(1.0 - rho(k), 2 * k as i64 - 2) * rho(k).powi(3);

    let p_all_11: f64 = (1..=l).map(all).product();
    let np = spec.photons as f64 * spec.phase;
    let (s, c) = (np.sin(), np.cos());
    let weight = |i: usize, plus: bool| match (weights, i) {
        (OddBranchWeights::Literal, i) if i > 1 => 1.0 + c,
        _ if plus => 1.0 + s,
        _ => 1.0 - s,
    };
    let branch = |i: usize| -> f64 {
        let upstream: f64 = (i + 1..=l).map(all).product();
        let downstream: f64 = (1..i).map(after).product();
        upstream * lossy(i) * downstream / 4.0
    };
    let p_one_12: f64 = (1..=l).map(|i| branch(i) * weight(i, true)).sum();
    let p_one_21: f64 = (1..=l).map(|i| branch(i) * weight(i, false)).sum();

    let p_cond = if (1..=l).all(|k| rho(k) < 1.0) {
        // ratio form, well defined down to ρ -> 0
        let mut denom = 1.0;
        let mut guard = 1.0;
        for i in 1..=l {
            let w = weight(i, true) + weight(i, false);
            if rho(i) > 0.0 && w != 0.0 {
                denom += w / 4.0 * rho(i) / (1.0 - rho(i)) / guard;
            }
            guard *= 1.0 - rho(i);
        }
        1.0 / denom
    } else {
        let total = p_all_11 + p_one_12 + p_one_21;
        if total > 0.0 {
            p_all_11 / total
        } else {
            0.0
        }
    };

    Ok(AnalyticsReport {
        parity: Parity::Odd,
        photons: spec.photons,
        phase: spec.phase,
        reflectances: spec.reflectances(),
        p_all_11,
        p_one_12,
        p_one_21,
        p_cond,
        p_success: p_all_11,
    })
}

/// Analytics for the even cascade: coincidence units `l..2`, then a
/// single-click unit 1 with a `∓π/2` correction on `b'`.
pub fn even_analytics(spec: &CascadeSpec) -> Result<AnalyticsReport> {
    if spec.parity != Parity::Even {
        return Err(Error::Parity("even analytics need an even cascade".into()));
    }
    let l = spec.units();
    let rho = |k: usize| spec.rho(k);
    let kf = |k: usize| k as f64;
    // P_{2k}(1,1,ρ_k)
    let all = |k: usize| 0.5 * kf(k) * (2.0 * kf(k) - 1.0) * pow(1.0 - rho(k), 2 * k as i64 - 2) * rho(k).powi(2);
    let after = |k: usize| 0.5 * kf(k) * (2.0 * kf(k) - 1.0) * pow(1.0 - rho(k), 2 * k as i64 - 3) * rho(k).powi(2);
    let lossy = |k: usize| 0.5 * kf(k) * (2.0 * kf(k) - 1.0) * pow(1.0 - rho(k), 2 * k as i64 - 3) * rho(k).powi(3);

    let p_all_11: f64 = (2..=l).map(all).product();
    let rho1 = rho(1);
    let p_success = 2.0 * p_all_11 * (1.0 - rho1) * rho1;
    let p_one_12: f64 = (2..=l)
        .map(|i| {
            let upstream: f64 = (i + 1..=l).map(all).product();
            let downstream: f64 = (2..i).map(after).product();
            upstream * lossy(i) * downstream / 2.0
        })
        .sum();
    let p_one_21 = p_one_12;

    let half = spec.photons as f64 * spec.phase / 2.0;
    let single_click = 2.0 - rho1 * (1.0 + half.cos().powi(2));
    let total = (p_all_11 * single_click + p_one_12 + p_one_21) * rho1;
    let p_cond = if total > 0.0 {
        p_success / total
    } else if (2..=l).all(|k| rho(k) < 1.0) {
        let mut extra = 0.0;
        let mut guard = 1.0;
        for i in 2..=l {
            if rho(i) > 0.0 {
                extra += rho(i) / (1.0 - rho(i)) / guard;
            }
            guard *= 1.0 - rho(i);
        }
        2.0 * (1.0 - rho1) / (single_click + extra)
    } else {
        0.0
    };

    Ok(AnalyticsReport {
        parity: Parity::Even,
        photons: spec.photons,
        phase: spec.phase,
        reflectances: spec.reflectances(),
        p_all_11,
        p_one_12,
        p_one_21,
        p_cond,
        p_success,
    })
}

/// Dispatches on the cascade parity.
pub fn analytics(spec: &CascadeSpec) -> Result<AnalyticsReport> {
    match spec.parity {
        Parity::Odd => odd_analytics(spec),
        Parity::Even => even_analytics(spec),
    }
}

/// `N!/N^N`, evaluated as a product of ratios to stay in range.
pub fn factorial_over_power(photons: u32) -> f64 {
    let n = photons as f64;
    (1..=photons).map(|j| j as f64 / n).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSchedule {
    pub parity: Parity,
    pub photons: u32,
    /// Unit 1 first.
    pub reflectances: Vec<f64>,
    /// Maximal success probability, `N!/N^N` for both parities.
    pub p_max: f64,
    /// Maximal all-(1,1) probability over the coincidence units.
    pub p_all_11_max: f64,
    /// Stirling approximation of `p_all_11_max`.
    pub stirling: f64,
}

/// Reflectances maximizing the cascade success probability.
///
/// Odd: `ρ_k = 2/(2k+1)`. Even: `ρ_1 = 1/2`, `ρ_k = 1/k` for `k >= 2`.
pub fn optimal_schedule(photons: u32) -> Result<OptimalSchedule> {
    if !(2..=MAX_PHOTONS_PER_MODE).contains(&photons) {
        return Err(Error::InvalidSpec(format!(
            "optimal schedule needs 2 <= N <= {MAX_PHOTONS_PER_MODE}, got {photons}"
        )));
    }
    let parity = Parity::of(photons);
    let l = (photons / 2) as usize;
    let n = photons as f64;
    let p_max = factorial_over_power(photons);
    let stirling = (2.0 * PI * n).sqrt() * (-n).exp();
    let (reflectances, p_all_11_max, stirling) = match parity {
        Parity::Odd => (
            (1..=l).map(|k| 2.0 / (2 * k + 1) as f64).collect(),
            p_max,
            stirling,
        ),
        Parity::Even => (
            (1..=l)
                .map(|k| if k == 1 { 0.5 } else { 1.0 / k as f64 })
                .collect(),
            2.0 * p_max,
            2.0 * stirling,
        ),
    };
    Ok(OptimalSchedule {
        parity,
        photons,
        reflectances,
        p_max,
        p_all_11_max,
        stirling,
    })
}

/// Uniform reflectance at which the odd cascade's conditional probability
/// equals `target`.
///
/// The conditional probability falls monotonically from 1 at ρ -> 0 to 0 at
/// ρ -> 1, so bisection on `[1e-9, 1 - 1e-9]` is safe.
pub fn critical_reflectance(photons: u32, phase: f64, target: f64) -> Result<f64> {
    if Parity::of(photons) != Parity::Odd {
        return Err(Error::Parity(format!(
            "critical reflectance is defined for odd N, got {photons}"
        )));
    }
    let p_cond = |rho: f64| -> Result<f64> {
        Ok(odd_analytics(&CascadeSpec::uniform(photons, phase, rho)?)?.p_cond)
    };
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    let (p_lo, p_hi) = (p_cond(lo)?, p_cond(hi)?);
    if !(target.is_finite() && target < p_lo && target > p_hi) {
        return Err(Error::Unattainable(format!(
            "target {target} outside ({p_hi}, {p_lo})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = p_cond(mid)?;
        if (value - target).abs() <= 1e-13 || hi - lo <= 1e-16 {
            return Ok(mid);
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCorrection {
    pub event: DetectionEvent,
    /// Shift applied to mode `b'`, in radians.
    pub radians: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvingReport {
    pub photons: u32,
    pub rho: f64,
    pub p_success: f64,
    /// One entry per accepted herald, `m + n = N - 1`, ordered by `(m, n)`.
    pub phase_correction: Vec<PhaseCorrection>,
}

/// Number-resolving protocol: keep events with `m + n = N - 1` and shift
/// `b'` by `(n - m)π/2`.
pub fn resolving_analytics(photons: u32, rho: Reflectance) -> Result<ResolvingReport> {
    if !(2..=MAX_PHOTONS_PER_MODE).contains(&photons) {
        return Err(Error::InvalidSpec(format!(
            "resolving protocol needs 2 <= N <= {MAX_PHOTONS_PER_MODE}, got {photons}"
        )));
    }
    let r = rho.value();
    let p_success = photons as f64 * (1.0 - r) * r.powi(photons as i32 - 1);
    let phase_correction = (0..photons)
        .map(|m| {
            let n = photons - 1 - m;
            PhaseCorrection {
                event: DetectionEvent::new(m, n),
                radians: (n as f64 - m as f64) * FRAC_PI_2,
            }
        })
        .collect();
    Ok(ResolvingReport {
        photons,
        rho: r,
        p_success,
        phase_correction,
    })
}

/// `ρ = (N-1)/N` and the success probability `((N-1)/N)^{N-1}` there.
pub fn resolving_optimum(photons: u32) -> Result<(Reflectance, f64)> {
    if photons < 2 {
        return Err(Error::InvalidSpec(format!(
            "resolving protocol needs N >= 2, got {photons}"
        )));
    }
    let n = photons as f64;
    let rho = (n - 1.0) / n;
    Ok((Reflectance::new(rho)?, rho.powi(photons as i32 - 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionScheme {
    /// Threshold detectors in a coincidence cascade.
    Coincidence,
    /// Number-resolving detectors in one unit.
    NumberResolving,
}

/// Aggregate detector-efficiency multiplier on the success probability:
/// `η^N` for a coincidence cascade, `η²` for the resolving protocol.
pub fn efficiency_penalty(scheme: DetectionScheme, photons: u32, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "detector efficiency must lie in (0, 1], got {eta}"
        )));
    }
    Ok(match scheme {
        DetectionScheme::Coincidence => eta.powi(photons as i32),
        DetectionScheme::NumberResolving => eta * eta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub photons: u32,
    pub coincidence_max: f64,
    pub resolving_max: f64,
}

/// Best achievable success probability of both detection schemes for each
/// photon number in `n_min..=n_max`.
pub fn efficiency_sweep(n_min: u32, n_max: u32) -> Result<Vec<SweepRow>> {
    if n_min < 2 || n_min > n_max || n_max > MAX_PHOTONS_PER_MODE {
        return Err(Error::InvalidParameter(format!(
            "sweep needs 2 <= N_min <= N_max <= {MAX_PHOTONS_PER_MODE}, got {n_min}..{n_max}"
        )));
    }
    (n_min..=n_max)
        .map(|n| {
            Ok(SweepRow {
                photons: n,
                coincidence_max: factorial_over_power(n),
                resolving_max: resolving_optimum(n)?.1,
            })
        })
        .collect()
}
