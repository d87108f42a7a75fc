use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A scalar with an error bar. Quadrature bars are truncation/roundoff
/// bounds; Monte Carlo bars come from the spread of chain means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub stderr: f64,
    pub method: EstimateMethod,
}

impl EstimateWithError {
    /// Closed-form values still carry a few ulps of rounding.
    pub fn closed_form(value: f64) -> Self {
        Self { value, stderr: 4.0 * f64::EPSILON * value.abs(), method: EstimateMethod::ClosedForm }
    }

    pub fn quadrature(value: f64, stderr: f64) -> Self {
        Self { value, stderr: stderr.abs(), method: EstimateMethod::Quadrature }
    }

    pub fn monte_carlo(value: f64, stderr: f64) -> Self {
        Self { value, stderr: stderr.abs(), method: EstimateMethod::MonteCarlo }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self { value: self.value * s, stderr: self.stderr * s.abs(), ..self }
    }

    /// Sum with errors added linearly; the inputs usually share quadrature nodes.
    pub fn plus(self, o: Self) -> Self {
        let method = if self.method == o.method { self.method } else { EstimateMethod::Quadrature };
        Self { value: self.value + o.value, stderr: self.stderr + o.stderr, method }
    }

    pub fn minus(self, o: Self) -> Self {
        self.plus(o.scaled(-1.0))
    }

    pub fn covers(&self, target: f64, sigmas: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.stderr
    }
}
