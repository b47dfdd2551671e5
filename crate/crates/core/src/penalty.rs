//! Separable elastic-net family penalties `h(x) = λ₁|x| + (λ₂/2)x²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A separable penalty from the elastic-net family.
///
/// Serialized as its string form, e.g. `"en:1,0.1"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Penalty {
    Ridge { lambda2: f64 },
    Lasso { lambda1: f64 },
    ElasticNet { lambda1: f64, lambda2: f64 },
}

impl Penalty {
    pub fn ridge(lambda2: f64) -> Result<Self> {
        Penalty::Ridge { lambda2 }.validated()
    }

    pub fn lasso(lambda1: f64) -> Result<Self> {
        Penalty::Lasso { lambda1 }.validated()
    }

    pub fn elastic_net(lambda1: f64, lambda2: f64) -> Result<Self> {
        Penalty::ElasticNet { lambda1, lambda2 }.validated()
    }

    /// Checks `λ₁, λ₂ ≥ 0`, finite, and not both zero.
    pub fn validated(self) -> Result<Self> {
        let (l1, l2) = (self.lambda1(), self.lambda2());
        if !(l1.is_finite() && l2.is_finite()) || l1 < 0.0 || l2 < 0.0 {
            return Err(Error::InvalidInput(format!(
                "penalty parameters must be finite and non-negative, got ({l1}, {l2})"
            )));
        }
        if l1 == 0.0 && l2 == 0.0 {
            return Err(Error::InvalidInput("penalty parameters cannot both be zero".into()));
        }
        Ok(self)
    }

    pub fn lambda1(&self) -> f64 {
        match *self {
            Penalty::Ridge { .. } => 0.0,
            Penalty::Lasso { lambda1 } | Penalty::ElasticNet { lambda1, .. } => lambda1,
        }
    }

    pub fn lambda2(&self) -> f64 {
        match *self {
            Penalty::Lasso { .. } => 0.0,
            Penalty::Ridge { lambda2 } | Penalty::ElasticNet { lambda2, .. } => lambda2,
        }
    }

    /// Strong-convexity constant.
    pub fn c0(&self) -> f64 {
        self.lambda2()
    }

    /// Penalty value `h(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.lambda1() * x.abs() + 0.5 * self.lambda2() * x * x
    }

    /// `Prox_{vh}(x) = ST_{λ₁v}(x) / (1 + λ₂v)`.
    pub fn prox(&self, v: f64, x: f64) -> f64 {
        let t = self.lambda1() * v;
        let st = if x > t {
            x - t
        } else if x < -t {
            x + t
        } else {
            0.0
        };
        st / (1.0 + self.lambda2() * v)
    }

    /// Second derivative extended by `+∞` at the kink.
    pub fn hpp_extended(&self, x: f64) -> f64 {
        if self.lambda1() > 0.0 && x == 0.0 {
            f64::INFINITY
        } else {
            self.lambda2()
        }
    }

    /// Derivative of the prox, `1 / (1 + v·h″(Prox(x)))` with `1/∞ = 0`.
    pub fn prox_deriv_extended(&self, v: f64, x: f64) -> f64 {
        let h = self.hpp_extended(self.prox(v, x));
        if h.is_infinite() {
            0.0
        } else {
            1.0 / (1.0 + v * h)
        }
    }

    /// Minimum-norm subgradient residual of `h` at `b` given the loss
    /// gradient `g = Xᵀ(y − Xβ)`: the distance from `g` to `∂h(b)`.
    pub fn subgradient_residual(&self, b: f64, g: f64) -> f64 {
        let l1 = self.lambda1();
        let r = g - self.lambda2() * b;
        if b > 0.0 {
            (r - l1).abs()
        } else if b < 0.0 {
            (r + l1).abs()
        } else {
            (r.abs() - l1).max(0.0)
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Penalty::Ridge { lambda2 } => write!(f, "ridge:{lambda2}"),
            Penalty::Lasso { lambda1 } => write!(f, "lasso:{lambda1}"),
            Penalty::ElasticNet { lambda1, lambda2 } => write!(f, "en:{lambda1},{lambda2}"),
        }
    }
}

impl TryFrom<String> for Penalty {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Penalty> for String {
    fn from(p: Penalty) -> String {
        p.to_string()
    }
}

impl FromStr for Penalty {
    type Err = Error;

    /// Parses `ridge:λ₂`, `lasso:λ₁` or `en:λ₁,λ₂`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse penalty '{s}'"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("ridge", [l2]) => Penalty::ridge(*l2),
            ("lasso", [l1]) => Penalty::lasso(*l1),
            ("en" | "elastic_net" | "elasticnet", [l1, l2]) => Penalty::elastic_net(*l1, *l2),
            _ => Err(bad()),
        }
    }
}
