use serde::Serialize;

use super::{flow_to_harmonic, FlowConfig, SolverError, Termination};
use crate::complex::DeltaComplex;
use crate::metric::{induced_quasimetric, SimplicialMetric};
use crate::smap::SimplicialMap;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricOptStep {
    pub iteration: usize,
    /// `A_S(f)` when the metric was reset to the induced one.
    pub area: f64,
    /// `E_S(f, l)` right after the reset.
    pub energy_at_update: f64,
    pub flow_iterations: usize,
    pub flow_termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricOptReport {
    pub trace: Vec<MetricOptStep>,
    pub final_area: f64,
    /// Edges of zero length in the final metric; a nonempty list means the
    /// result lives on a collapsed complex.
    pub zero_edges: Vec<usize>,
}

impl MetricOptReport {
    /// The sequence of simplicial areas, ending with the final one.
    pub fn areas(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.trace.iter().map(|s| s.area).collect();
        a.push(self.final_area);
        a
    }
}

/// Alternately replaces the metric by the one induced from the map (which
/// makes every stretch factor 1, so energy and simplicial area agree) and
/// flows the map to a harmonic one for that metric. Stops once an outer
/// round lowers `A_S` by less than `outer_tol`, or after `max_outer` rounds.
pub fn minimize_over_metrics(
    k: &DeltaComplex,
    f: &SimplicialMap,
    outer_tol: f64,
    max_outer: usize,
    cfg: &FlowConfig,
) -> Result<(SimplicialMap, SimplicialMetric, MetricOptReport), SolverError> {
    if !(outer_tol >= 0.0) {
        return Err(SolverError::Config(format!("outer_tol must be nonnegative, got {outer_tol}")));
    }
    let mut map = f.clone();
    let mut trace = Vec::new();
    let mut area = map.simplicial_area(k);
    for iteration in 0..max_outer {
        let l = induced_quasimetric(k, &map)?;
        let energy_at_update = map.energy(k, &l)?.value();
        let (next, report) = flow_to_harmonic(k, &map, &l, cfg)?;
        trace.push(MetricOptStep {
            iteration,
            area,
            energy_at_update,
            flow_iterations: report.iterations,
            flow_termination: report.termination,
        });
        let next_area = next.simplicial_area(k);
        let gain = area - next_area;
        map = next;
        area = next_area;
        if gain < outer_tol {
            break;
        }
    }
    let l = induced_quasimetric(k, &map)?;
    let zero_edges = (0..l.len()).filter(|&e| l.get(e) == 0.0).collect();
    Ok((
        map,
        l,
        MetricOptReport {
            trace,
            final_area: area,
            zero_edges,
        },
    ))
}
