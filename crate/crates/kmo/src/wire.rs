//! JSON wire format of machine summaries.
use kmo_core::distributed::WeightedSummary;
use kmo_core::CenterSet;
use serde::{Deserialize, Serialize};

/// A [`WeightedSummary`] as sent over the wire. Centers are flattened row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireSummary {
    pub machine_id: usize,
    pub dim: usize,
    pub centers: Vec<f64>,
    pub weights: Vec<u64>,
    pub outliers_dropped: u64,
    pub histograms: Option<Vec<Vec<u64>>>,
}

impl From<&WeightedSummary> for WireSummary {
    fn from(s: &WeightedSummary) -> Self {
        WireSummary {
            machine_id: s.machine_id,
            dim: s.centers.dim(),
            centers: s.centers.iter().flatten().copied().collect(),
            weights: s.weights.clone(),
            outliers_dropped: s.outliers_dropped,
            histograms: s.histograms.clone(),
        }
    }
}

impl WireSummary {
    pub fn into_summary(self) -> kmo_core::Result<WeightedSummary> {
        if self.dim == 0 || self.centers.len() % self.dim != 0 || self.centers.len() / self.dim != self.weights.len() {
            return Err(kmo_core::Error::InvalidParameter("center array does not match dim and weights"));
        }
        let rows: Vec<Vec<f64>> = self.centers.chunks(self.dim).map(<[f64]>::to_vec).collect();
        Ok(WeightedSummary {
            machine_id: self.machine_id,
            centers: CenterSet::from_rows(self.dim, &rows)?,
            weights: self.weights,
            outliers_dropped: self.outliers_dropped,
            histograms: self.histograms,
        })
    }
}

pub fn to_json(s: &WeightedSummary) -> String {
    serde_json::to_string(&WireSummary::from(s)).expect("summary serializes")
}

pub fn from_json(text: &str) -> Result<WeightedSummary, crate::error::CliError> {
    let w: WireSummary = serde_json::from_str(text)?;
    Ok(w.into_summary()?)
}
