//! The photon-subtraction unit.
//!
//! Two equal-reflectance beamsplitters tap photons off the N00N arms `a` and
//! `b`: `a -> (a', c')` and `b -> (b', d')`. In the which-way variant the taps
//! go straight to detectors `c` and `d`. In the eraser variant a 50-50
//! merger first mixes them:
//!
//! ```text
//! c'† -> (d† + i c†)/√2
//! d'† -> (c† + i d†)/√2
//! ```
//!
//! so photons arriving from `c'` pick up `i^n` and those from `d'` pick up
//! `i^m`, where `m` and `n` count clicks at `d` and `c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Ket, PureState, Reflectance};

pub const MODE_A: &str = "a";
pub const MODE_B: &str = "b";
pub const MODE_A_OUT: &str = "a'";
pub const MODE_B_OUT: &str = "b'";
pub const MODE_C_TAP: &str = "c'";
pub const MODE_D_TAP: &str = "d'";
pub const MODE_C: &str = "c";
pub const MODE_D: &str = "d";
pub const MODE_VAC_A: &str = "v_a";
pub const MODE_VAC_B: &str = "v_b";

/// Photon counts registered by one unit: `d` at detector d (`m`), `c` at
/// detector c (`n`). Within a unit `n = k - m` where `k` photons were tapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub d: u32,
    pub c: u32,
}

impl DetectionEvent {
    pub const fn new(d: u32, c: u32) -> Self {
        DetectionEvent { d, c }
    }

    pub fn total(self) -> u32 {
        self.d + self.c
    }
}

/// One row of a detection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitOutcome {
    pub event: DetectionEvent,
    pub probability: f64,
    /// Normalized conditional state on `(a', b')`.
    pub transmitted: PureState,
}

fn check_input_modes(input: &PureState) -> Result<()> {
    let names: Vec<&str> = input.modes().iter().map(|m| m.as_str()).collect();
    if names == [MODE_A, MODE_B] {
        Ok(())
    } else {
        Err(Error::Mode(format!(
            "unit input must live on modes (a, b), got {names:?}"
        )))
    }
}

fn tap(input: &PureState, rho: Reflectance) -> Result<PureState> {
    check_input_modes(input)?;
    input
        .with_vacuum_mode(MODE_VAC_A)?
        .with_vacuum_mode(MODE_VAC_B)?
        .beamsplitter((MODE_A, MODE_VAC_A), (MODE_A_OUT, MODE_C_TAP), rho)?
        .beamsplitter((MODE_B, MODE_VAC_B), (MODE_B_OUT, MODE_D_TAP), rho)
}

/// Propagates a state on `(a, b)` through a full unit (taps plus eraser),
/// returning the state on `(a', b', c, d)`.
pub fn unit_propagate(input: &PureState, rho: Reflectance) -> Result<PureState> {
    tap(input, rho)?.beamsplitter(
        (MODE_C_TAP, MODE_D_TAP),
        (MODE_D, MODE_C),
        Reflectance::BALANCED,
    )
}

/// Propagates through the taps only; detectors see which arm each photon left.
pub fn which_way_propagate(input: &PureState, rho: Reflectance) -> Result<PureState> {
    tap(input, rho)?
        .rename_mode(MODE_C_TAP, MODE_C)?
        .rename_mode(MODE_D_TAP, MODE_D)
}

/// Splits a four-mode output state into detector outcomes, ordered by
/// `(d, c)`. Outcomes with probability below `1e-15` are omitted.
pub fn detection_table(fourmode: &PureState) -> Result<Vec<UnitOutcome>> {
    let names: Vec<&str> = fourmode.modes().iter().map(|m| m.as_str()).collect();
    if names != [MODE_A_OUT, MODE_B_OUT, MODE_C, MODE_D] {
        return Err(Error::Mode(format!(
            "detection table needs modes (a', b', c, d), got {names:?}"
        )));
    }
    let blocks = fourmode.as_ket().project_onto(&[MODE_D, MODE_C])?;
    let mut outcomes = Vec::with_capacity(blocks.len());
    for (counts, block) in blocks {
        let probability = block.norm_sqr();
        if probability < 1e-15 {
            continue;
        }
        outcomes.push(UnitOutcome {
            event: DetectionEvent::new(counts[0], counts[1]),
            probability,
            transmitted: block.normalized()?,
        });
    }
    Ok(outcomes)
}

/// Unnormalized block of `fourmode` conditioned on `event`, on `(a', b')`.
pub fn conditional_block(fourmode: &PureState, event: DetectionEvent) -> Result<Ket> {
    let blocks = fourmode.as_ket().project_onto(&[MODE_D, MODE_C])?;
    let rest: Vec<_> = fourmode
        .modes()
        .iter()
        .filter(|m| m.as_str() != MODE_D && m.as_str() != MODE_C)
        .cloned()
        .collect();
    Ok(blocks
        .into_iter()
        .find(|(counts, _)| counts[0] == event.d && counts[1] == event.c)
        .map(|(_, k)| k)
        .unwrap_or(Ket::zero(rest)?))
}

/// Moves a transmitted state from `(a', b')` back onto `(a, b)` so it can feed
/// the next unit.
pub fn relabel_for_next_unit(transmitted: &PureState) -> Result<PureState> {
    transmitted
        .rename_mode(MODE_A_OUT, MODE_A)?
        .rename_mode(MODE_B_OUT, MODE_B)
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed-form probability of `event` when `(|N,0⟩ + e^{iMφ}|0,N⟩)/√2` enters
/// an eraser unit of reflectance `rho`:
///
/// ```text
/// C(N, m+n) (1-ρ)^{N-m-n} ρ^{m+n} C(m+n, m) 2^{-(m+n)} {1 + δ_{N,m+n} cos(Mφ + (m-n)π/2)}
/// ```
pub fn prob_closed_form(
    photons: u32,
    phase_multiplier: u32,
    phase: f64,
    event: DetectionEvent,
    rho: Reflectance,
) -> Result<f64> {
    if photons < 1 || phase_multiplier < 1 {
        return Err(Error::InvalidSpec(format!(
            "need N >= 1 and M >= 1, got N = {photons}, M = {phase_multiplier}"
        )));
    }
    if !phase.is_finite() {
        return Err(Error::InvalidParameter("phase must be finite".into()));
    }
    Ok(closed_form_unchecked(
        photons,
        phase_multiplier as f64 * phase,
        event,
        rho.value(),
    ))
}

/// Same as [`prob_closed_form`] with the total relative phase `Mφ` given
/// directly and no validation.
pub(crate) fn closed_form_unchecked(photons: u32, relative_phase: f64, event: DetectionEvent, rho: f64) -> f64 {
    let k = event.total();
    if k > photons {
        return 0.0;
    }
    let base = binomial(photons, k)
        * (1.0 - rho).powi((photons - k) as i32)
        * rho.powi(k as i32)
        * binomial(k, event.d)
        * 0.5f64.powi(k as i32);
    if k == photons {
        let skew = (event.d as f64 - event.c as f64) * std::f64::consts::FRAC_PI_2;
        base * (1.0 + (relative_phase + skew).cos())
    } else {
        base
    }
}
