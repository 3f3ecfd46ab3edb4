//! Closed-form data functions: the charge density `f`, the body force `g` and
//! the boundary potential `h`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Shared scalar function of position.
pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
/// Shared vector function of position.
pub type VectorFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum ScalarFunction {
    Constant {
        value: f64,
    },
    /// `offset + slope . x`
    Affine {
        offset: f64,
        slope: [f64; 2],
    },
    /// `amplitude sin(pi x1) sin(pi x2)`
    SineProduct {
        amplitude: f64,
    },
}

impl ScalarFunction {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            ScalarFunction::Constant { value } => value,
            ScalarFunction::Affine { offset, slope } => offset + slope[0] * x[0] + slope[1] * x[1],
            ScalarFunction::SineProduct { amplitude } => amplitude * (PI * x[0]).sin() * (PI * x[1]).sin(),
        }
    }

    pub fn to_fn(self) -> ScalarFn {
        Arc::new(move |x| self.eval(x))
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            ScalarFunction::Constant { value } => value.is_finite(),
            ScalarFunction::Affine { offset, slope } => offset.is_finite() && slope.iter().all(|s| s.is_finite()),
            ScalarFunction::SineProduct { amplitude } => amplitude.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum VectorFunction {
    Constant {
        value: [f64; 2],
    },
    /// `offset + gradient x`, with `gradient[c]` the gradient of component `c`.
    Affine {
        offset: [f64; 2],
        gradient: [[f64; 2]; 2],
    },
    /// `amplitude[c] sin(pi x1) sin(pi x2)` per component.
    SineProduct {
        amplitude: [f64; 2],
    },
}

impl VectorFunction {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            VectorFunction::Constant { value } => value,
            VectorFunction::Affine { offset, gradient } => {
                [0, 1].map(|c| offset[c] + gradient[c][0] * x[0] + gradient[c][1] * x[1])
            }
            VectorFunction::SineProduct { amplitude } => {
                let s = (PI * x[0]).sin() * (PI * x[1]).sin();
                [amplitude[0] * s, amplitude[1] * s]
            }
        }
    }

    pub fn to_fn(self) -> VectorFn {
        Arc::new(move |x| self.eval(x))
    }

    pub fn is_finite(&self) -> bool {
        let all = |v: &[f64]| v.iter().all(|s| s.is_finite());
        match self {
            VectorFunction::Constant { value } => all(value),
            VectorFunction::Affine { offset, gradient } => all(offset) && all(&gradient[0]) && all(&gradient[1]),
            VectorFunction::SineProduct { amplitude } => all(amplitude),
        }
    }
}

/// The data triple of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct Loading {
    pub f: ScalarFunction,
    pub g: VectorFunction,
    pub h: ScalarFunction,
}

impl Default for Loading {
    fn default() -> Self {
        Loading {
            f: ScalarFunction::Constant { value: 1.0 },
            g: VectorFunction::Constant { value: [1.0, 1.0] },
            h: ScalarFunction::Affine { offset: 0.0, slope: [1.0, 0.0] },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let f = ScalarFunction::Affine { offset: 1.0, slope: [2.0, -1.0] };
        assert_eq!(f.eval([0.5, 1.0]), 1.0);
        let s = ScalarFunction::SineProduct { amplitude: 2.0 };
        assert!((s.to_fn()([0.5, 0.5]) - 2.0).abs() < 1e-15);
        let g = VectorFunction::Affine { offset: [0.0, 1.0], gradient: [[1.0, 0.0], [0.0, 2.0]] };
        assert_eq!(g.eval([3.0, 4.0]), [3.0, 9.0]);
    }

    #[test]
    fn serde_round_trip() {
        let l = Loading::default();
        let text = serde_json::to_string(&l).unwrap();
        assert!(text.contains("\"kind\":\"affine\""));
        let back: Loading = serde_json::from_str(&text).unwrap();
        assert_eq!(back, l);
        let partial: Loading = serde_json::from_str(r#"{"f": {"kind": "sineProduct", "amplitude": 3.0}}"#).unwrap();
        assert_eq!(partial.g, Loading::default().g);
        assert!(serde_json::from_str::<Loading>(r#"{"f": {"kind": "cubic"}}"#).is_err());
    }
}
