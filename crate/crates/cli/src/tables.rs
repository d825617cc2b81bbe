//! Two-photon detection tables with symbolic row formulas.

use noon_core::unit::{MODE_A, MODE_B};
use noon_core::{
    detection_table, make_noon, unit_propagate, which_way_propagate, DetectionEvent, NoonSpec,
    Reflectance,
};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct TableRow {
    pub table: &'static str,
    /// Photons at detector d.
    pub m: u32,
    /// Photons at detector c.
    pub n: u32,
    /// Normalized state left on (a', b').
    pub transmitted: &'static str,
    pub formula: &'static str,
    pub formula_value: f64,
    pub probability: f64,
}

struct Row {
    event: DetectionEvent,
    transmitted: &'static str,
    formula: &'static str,
    value: fn(f64, f64, f64) -> f64,
}

const fn row(
    m: u32,
    n: u32,
    transmitted: &'static str,
    formula: &'static str,
    value: fn(f64, f64, f64) -> f64,
) -> Row {
    Row {
        event: DetectionEvent::new(m, n),
        transmitted,
        formula,
        value,
    }
}

const NOON_2: &str = "(|2,0> + e^{2i phi}|0,2>)/sqrt2";

// value(t, r, phi) with t, r the amplitude coefficients
const WHICH_WAY: [Row; 5] = [
    row(0, 0, NOON_2, "t^4", |t, _, _| t.powi(4)),
    row(1, 0, "|0,1>", "t^2 r^2", |t, r, _| t * t * r * r),
    row(0, 1, "|1,0>", "t^2 r^2", |t, r, _| t * t * r * r),
    row(2, 0, "|0,0>", "r^4/2", |_, r, _| r.powi(4) / 2.0),
    row(0, 2, "|0,0>", "r^4/2", |_, r, _| r.powi(4) / 2.0),
];

const ERASER: [Row; 6] = [
    row(0, 0, NOON_2, "t^4", |t, _, _| t.powi(4)),
    row(1, 0, "(|1,0> + i e^{2i phi}|0,1>)/sqrt2", "t^2 r^2", |t, r, _| t * t * r * r),
    row(0, 1, "(|1,0> - i e^{2i phi}|0,1>)/sqrt2", "t^2 r^2", |t, r, _| t * t * r * r),
    row(1, 1, "|0,0>", "r^4 cos^2(phi)", |_, r, p| r.powi(4) * p.cos().powi(2)),
    row(2, 0, "|0,0>", "r^4 sin^2(phi)/2", |_, r, p| r.powi(4) * p.sin().powi(2) / 2.0),
    row(0, 2, "|0,0>", "r^4 sin^2(phi)/2", |_, r, p| r.powi(4) * p.sin().powi(2) / 2.0),
];

/// Rows of both tables at `(rho, phi)`; events that cannot occur there are
/// left out.
pub fn both_tables(rho: f64, phi: f64) -> Result<Vec<TableRow>, CliError> {
    let rho = Reflectance::new(rho).map_err(CliError::from)?;
    let input = make_noon(NoonSpec::standard(2, phi)?, (MODE_A, MODE_B))?;
    let mut rows = Vec::new();
    for (name, state, formulas) in [
        ("which-way", which_way_propagate(&input, rho)?, &WHICH_WAY[..]),
        ("eraser", unit_propagate(&input, rho)?, &ERASER[..]),
    ] {
        let table = detection_table(&state)?;
        for f in formulas {
            let Some(outcome) = table.iter().find(|o| o.event == f.event) else {
                continue;
            };
            rows.push(TableRow {
                table: name,
                m: f.event.d,
                n: f.event.c,
                transmitted: f.transmitted,
                formula: f.formula,
                formula_value: (f.value)(rho.t(), rho.r(), phi),
                probability: outcome.probability,
            });
        }
        if let Some(extra) = table.iter().find(|o| formulas.iter().all(|f| f.event != o.event)) {
            return Err(CliError::internal(format!(
                "{name} table produced unlisted event {:?}",
                extra.event
            )));
        }
    }
    Ok(rows)
}
