use std::sync::Arc;

use super::layout::{SpaceTag, StateLayout, StateVector};
use crate::error::{Error, Result};

/// Recorded trajectory: energy, trace values and optional full snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    layout: Arc<StateLayout>,
    times: Vec<f64>,
    energy: Vec<f64>,
    traces: Vec<(String, Vec<f64>)>,
    snapshots: Option<Vec<Vec<f64>>>,
}

impl TimeSeries {
    pub fn new(layout: &Arc<StateLayout>, with_snapshots: bool) -> Self {
        let traces = layout
            .trace_blocks()
            .map(|b| (b.name.clone(), Vec::new()))
            .collect();
        TimeSeries {
            layout: Arc::clone(layout),
            times: Vec::new(),
            energy: Vec::new(),
            traces,
            snapshots: with_snapshots.then(Vec::new),
        }
    }

    pub fn push(&mut self, t: f64, energy: f64, state: &[f64]) -> Result<()> {
        if state.len() != self.layout.dim() {
            return Err(Error::dim(self.layout.dim(), state.len()));
        }
        if let Some(last) = self.times.last() {
            if !(t > *last) {
                return Err(Error::Numeric(format!(
                    "time {t} does not follow {last}"
                )));
            }
        }
        self.times.push(t);
        self.energy.push(energy);
        for (name, values) in &mut self.traces {
            let b = self.layout.block(name).expect("trace block");
            values.push(state[b.offset]);
        }
        if let Some(snaps) = &mut self.snapshots {
            snaps.push(state.to_vec());
        }
        Ok(())
    }

    pub fn layout(&self) -> &Arc<StateLayout> {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn energy(&self) -> &[f64] {
        &self.energy
    }

    pub fn traces(&self) -> &[(String, Vec<f64>)] {
        &self.traces
    }

    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn has_snapshots(&self) -> bool {
        self.snapshots.is_some()
    }

    pub fn snapshots(&self) -> Result<&[Vec<f64>]> {
        self.snapshots
            .as_deref()
            .ok_or_else(|| Error::InsufficientData("series has no snapshots".into()))
    }

    pub fn snapshot(&self, k: usize) -> Result<StateVector> {
        let snaps = self.snapshots()?;
        let v = snaps
            .get(k)
            .ok_or_else(|| Error::InsufficientData(format!("no snapshot {k}")))?;
        StateVector::from_values(&self.layout, v.clone())
    }

    pub fn last_snapshot(&self) -> Result<StateVector> {
        if self.is_empty() {
            return Err(Error::InsufficientData("empty series".into()));
        }
        self.snapshot(self.len() - 1)
    }
}

/// Layout holding a single scalar, for scalar time series.
pub fn scalar_layout() -> Arc<StateLayout> {
    let grid = super::grid::Grid::new(2).expect("two cells");
    Arc::new(
        StateLayout::new(&grid, &[("u", SpaceTag::Trace(super::layout::Side::Right))])
            .expect("scalar layout"),
    )
}
