//! Experiment drivers: hourglass propagation of oscillating boundary data,
//! the manufactured-solution comparison, element inspection and output.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;

pub mod hourglass;
pub mod inspect;
pub mod mms;
pub mod output;

pub use hourglass::{
    checkerboard_boundary, checkerboard_trace, interior_max, run_hourglass, HourglassConfig,
};
pub use inspect::{
    inspect_element, projector_report, tau_table, ElementReport, PolicyReport, ProjectorReport,
    TauShape, TauTableRow,
};
pub use mms::{run_mms, MmsConfig};
pub use output::{read_csv, write_csv, write_outputs, write_vtk, OutputFormats, CSV_COLUMNS};

/// One line of a results table. Column order is fixed:
/// `scheme, n, h_mean, tau, Linf_error, interior_max, rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub scheme: String,
    pub n: usize,
    pub h_mean: f64,
    pub tau: Option<f64>,
    #[serde(rename = "Linf_error")]
    pub linf_error: Option<f64>,
    pub interior_max: Option<f64>,
    pub rate: Option<f64>,
}

/// Vertex field produced by one run, for VTK output.
#[derive(Debug, Clone)]
pub struct Field {
    pub name: String,
    pub mesh: Arc<Mesh>,
    pub u: Vec<f64>,
    pub error: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<ErrorRow>,
    pub fields: Vec<Field>,
}

/// Mean stabilization parameter of a run; exact when every cell shares it.
pub fn mean_tau(taus: &[f64]) -> f64 {
    match taus.first() {
        Some(&t) if taus.iter().all(|&x| x == t) => t,
        _ => taus.iter().sum::<f64>() / taus.len() as f64,
    }
}

/// Observed order `ln(e_prev / e) / ln(h_prev / h)` between consecutive
/// rows of the same scheme.
pub fn fill_rates(rows: &mut [ErrorRow]) {
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        if prev.scheme != cur.scheme {
            continue;
        }
        if let (Some(e0), Some(e1)) = (prev.linf_error, cur.linf_error) {
            if e0 > 0.0 && e1 > 0.0 && prev.h_mean != cur.h_mean {
                rows[k].rate = Some((e0 / e1).ln() / (prev.h_mean / cur.h_mean).ln());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scheme: &str, h: f64, e: f64) -> ErrorRow {
        ErrorRow {
            scheme: scheme.into(),
            n: 0,
            h_mean: h,
            tau: None,
            linf_error: Some(e),
            interior_max: None,
            rate: None,
        }
    }

    #[test]
    fn rates_within_scheme_only() {
        let mut rows = vec![
            row("a", 0.2, 4e-2),
            row("a", 0.1, 1e-2),
            row("b", 0.05, 1.0),
            row("b", 0.025, 0.5),
        ];
        fill_rates(&mut rows);
        assert_eq!(rows[0].rate, None);
        assert!((rows[1].rate.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(rows[2].rate, None);
        assert!((rows[3].rate.unwrap() - 1.0).abs() < 1e-12);
    }
}
