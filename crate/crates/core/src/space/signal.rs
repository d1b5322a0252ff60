use super::layout::StateLayout;
use crate::error::{Error, Result};

/// Scalar time profile of a source term.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Zero,
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// Smooth pulse `exp(1 - 1/(1 - r²))` with compact support `|t - center| < half_width`.
    Bump {
        center: f64,
        half_width: f64,
        amplitude: f64,
    },
    Sinusoid {
        frequency: f64,
        phase: f64,
        amplitude: f64,
    },
    /// Piecewise linear through `(times, values)`, constant beyond the ends.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl Signal {
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Parameter("tabulated signal needs matching, nonempty samples".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("tabulated times must increase".into()));
        }
        if values.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("tabulated signal must be finite".into()));
        }
        Ok(Signal::Tabulated { times, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Zero => 0.0,
            Signal::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let r = (t - center) / width;
                amplitude * (-0.5 * r * r).exp()
            }
            Signal::Bump {
                center,
                half_width,
                amplitude,
            } => {
                let r = (t - center) / half_width;
                if r.abs() < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            Signal::Sinusoid {
                frequency,
                phase,
                amplitude,
            } => amplitude * (std::f64::consts::TAU * frequency * t + phase).sin(),
            Signal::Tabulated { times, values } => {
                let k = times.partition_point(|s| *s <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let (t0, t1) = (times[k - 1], times[k]);
                    let w = (t - t0) / (t1 - t0);
                    values[k - 1] * (1.0 - w) + values[k] * w
                }
            }
        }
    }
}

/// Time-dependent right-hand side of the evolution system, in raw (not
/// weight-multiplied) form.
pub trait Source: Sync {
    fn dim(&self) -> usize;
    fn eval_into(&self, t: f64, out: &mut [f64]);

    fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroSource(pub usize);

impl Source for ZeroSource {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval_into(&self, _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Sum of `signal(t) * profile` terms.
#[derive(Debug, Clone)]
pub struct SeparableSource {
    dim: usize,
    terms: Vec<(Signal, Vec<f64>)>,
}

impl SeparableSource {
    pub fn new(dim: usize) -> Self {
        SeparableSource {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, signal: Signal, profile: Vec<f64>) -> Result<Self> {
        if profile.len() != self.dim {
            return Err(Error::dim(self.dim, profile.len()));
        }
        self.terms.push((signal, profile));
        Ok(self)
    }

    /// Adds a term supported on one named block, with spatial shape `shape(x)`.
    pub fn with_block_term(
        self,
        layout: &StateLayout,
        block: &str,
        signal: Signal,
        shape: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let b = layout.require(block)?;
        let mut profile = vec![0.0; layout.dim()];
        for (slot, x) in profile[b.range()]
            .iter_mut()
            .zip(b.tag.points(layout.grid()))
        {
            *slot = shape(x);
        }
        self.with_term(signal, profile)
    }

    pub fn terms(&self) -> &[(Signal, Vec<f64>)] {
        &self.terms
    }
}

impl Source for SeparableSource {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        for (signal, profile) in &self.terms {
            let a = signal.eval(t);
            if a != 0.0 {
                for (o, p) in out.iter_mut().zip(profile) {
                    *o += a * p;
                }
            }
        }
    }
}

/// `Σ α_k f_k`.
pub struct Combination<'a> {
    parts: Vec<(f64, &'a dyn Source)>,
}

impl<'a> Combination<'a> {
    pub fn new(parts: Vec<(f64, &'a dyn Source)>) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Parameter("empty source combination".into()));
        };
        let dim = first.dim();
        if let Some((_, s)) = parts.iter().find(|(_, s)| s.dim() != dim) {
            return Err(Error::dim(dim, s.dim()));
        }
        Ok(Combination { parts })
    }
}

impl Source for Combination<'_> {
    fn dim(&self) -> usize {
        self.parts[0].1.dim()
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        let mut tmp = vec![0.0; out.len()];
        for (alpha, s) in &self.parts {
            s.eval_into(t, &mut tmp);
            for (o, v) in out.iter_mut().zip(&tmp) {
                *o += alpha * v;
            }
        }
    }
}

/// Adapter for closures `|t, out| ...`.
pub struct FnSource<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &mut [f64]) + Sync> FnSource<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnSource { dim, f }
    }
}

impl<F: Fn(f64, &mut [f64]) + Sync> Source for FnSource<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        (self.f)(t, out)
    }
}
