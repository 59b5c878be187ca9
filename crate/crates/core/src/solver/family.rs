use serde::Serialize;

use super::{flow_to_harmonic, max_vertex_distance, FlowConfig, FlowReport, SolverError};
use crate::complex::DeltaComplex;
use crate::metric::{induced_quasimetric, SimplicialMetric};
use crate::smap::SimplicialMap;

/// One sample of a family of maps; the metric defaults to the quasi-metric
/// induced by the map itself.
#[derive(Clone, Debug)]
pub struct FamilySample {
    pub map: SimplicialMap,
    pub metric: Option<SimplicialMetric>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    #[serde(skip)]
    pub maps: Vec<SimplicialMap>,
    pub reports: Vec<FlowReport>,
    /// Largest vertex displacement between converged maps of neighbouring
    /// samples.
    pub adjacent_distances: Vec<f64>,
}

fn resolve(k: &DeltaComplex, s: &FamilySample) -> Result<SimplicialMetric, SolverError> {
    match &s.metric {
        Some(l) => Ok(l.clone()),
        None => Ok(induced_quasimetric(k, &s.map)?),
    }
}

/// Flows every sample of a family to a harmonic map.
///
/// Samples are independent and run in parallel unless `warm_start` is set,
/// in which case each sample starts from the previous converged images
/// whenever the two share their deck data. Samples of zero energy are
/// returned exactly as given.
pub fn flow_family(
    k: &DeltaComplex,
    samples: &[FamilySample],
    cfg: &FlowConfig,
    warm_start: bool,
) -> Result<FamilyReport, SolverError> {
    cfg.validate()?;
    let metrics = samples
        .iter()
        .map(|s| resolve(k, s))
        .collect::<Result<Vec<_>, _>>()?;
    for (s, l) in samples.iter().zip(&metrics) {
        if !s.map.energy(k, l)?.is_finite() {
            return Err(SolverError::InfiniteEnergy);
        }
    }
    let results: Vec<(SimplicialMap, FlowReport)> = if warm_start {
        let mut out: Vec<(SimplicialMap, FlowReport)> = Vec::with_capacity(samples.len());
        for (s, l) in samples.iter().zip(&metrics) {
            let mut start = s.map.clone();
            if let Some((prev, _)) = out.last() {
                let own = s.map.energy(k, l)?.value();
                if own > 0.0 && prev.decks() == s.map.decks() {
                    start = s.map.with_images(prev.images().to_vec())?;
                    if !start.energy(k, l)?.is_finite() {
                        start = s.map.clone();
                    }
                }
            }
            out.push(flow_to_harmonic(k, &start, l, cfg)?);
        }
        out
    } else {
        run_independent(k, samples, &metrics, cfg)?
    };
    let adjacent_distances = results
        .windows(2)
        .map(|w| max_vertex_distance(&w[0].0, &w[1].0).0)
        .collect();
    let (maps, reports) = results.into_iter().unzip();
    Ok(FamilyReport {
        maps,
        reports,
        adjacent_distances,
    })
}

#[cfg(feature = "parallel")]
fn run_independent(
    k: &DeltaComplex,
    samples: &[FamilySample],
    metrics: &[SimplicialMetric],
    cfg: &FlowConfig,
) -> Result<Vec<(SimplicialMap, FlowReport)>, SolverError> {
    use rayon::prelude::*;
    samples
        .par_iter()
        .zip(metrics.par_iter())
        .map(|(s, l)| flow_to_harmonic(k, &s.map, l, cfg))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_independent(
    k: &DeltaComplex,
    samples: &[FamilySample],
    metrics: &[SimplicialMetric],
    cfg: &FlowConfig,
) -> Result<Vec<(SimplicialMap, FlowReport)>, SolverError> {
    samples
        .iter()
        .zip(metrics)
        .map(|(s, l)| flow_to_harmonic(k, &s.map, l, cfg))
        .collect()
}
