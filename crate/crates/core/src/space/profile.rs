use super::grid::Grid;
use super::layout::SpaceTag;
use crate::error::{Error, Result};

/// Closed-form spatial coefficient on [-1/2, 1/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// Affine interpolation from the left end value to the right end value.
    Linear { left: f64, right: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Constant(c) => c,
            Profile::Linear { left, right } => left + (right - left) * (x + 0.5),
        }
    }

    pub fn derivative(&self, _x: f64) -> f64 {
        match *self {
            Profile::Constant(_) => 0.0,
            Profile::Linear { left, right } => right - left,
        }
    }

    /// Extremes over the interval; profiles are monotone so the endpoints suffice.
    pub fn min(&self) -> f64 {
        self.eval(-0.5).min(self.eval(0.5))
    }

    pub fn is_finite(&self) -> bool {
        self.eval(-0.5).is_finite() && self.eval(0.5).is_finite()
    }

    pub fn require_positive(&self, what: &str) -> Result<()> {
        if !self.is_finite() || !(self.min() > 0.0) {
            return Err(Error::Parameter(format!("{what} must be strictly positive")));
        }
        Ok(())
    }

    pub fn require_nonnegative(&self, what: &str) -> Result<()> {
        if !self.is_finite() || !(self.min() >= 0.0) {
            return Err(Error::Parameter(format!("{what} must be nonnegative")));
        }
        Ok(())
    }
}

impl From<f64> for Profile {
    fn from(c: f64) -> Self {
        Profile::Constant(c)
    }
}

/// A profile sampled at the points of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub tag: SpaceTag,
    pub values: Vec<f64>,
}

impl CoefficientField {
    pub fn sample(profile: &Profile, grid: &Grid, tag: SpaceTag) -> Self {
        CoefficientField {
            tag,
            values: tag.points(grid).into_iter().map(|x| profile.eval(x)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
