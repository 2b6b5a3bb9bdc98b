//! Model coordinates: couplings, fields and temperature.

use crate::Error;

/// Couplings and dimensionless fields of the chain.
///
/// The uniform field is `h1 = lambda1 * j`; the staggered field `h2 = lambda2 * j`
/// adds to even sites and subtracts from odd sites.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub j: f64,
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SystemParams {
    pub fn new(j: f64, gamma: f64, lambda1: f64, lambda2: f64) -> Result<Self, Error> {
        let p = Self { j, gamma, lambda1, lambda2 };
        p.validate()?;
        Ok(p)
    }

    /// Unit exchange, the normalization used throughout.
    pub fn unit(gamma: f64, lambda1: f64, lambda2: f64) -> Result<Self, Error> {
        Self::new(1.0, gamma, lambda1, lambda2)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let finite = [self.j, self.gamma, self.lambda1, self.lambda2].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.j <= 0.0 {
            return Err(Error::InvalidParams(format!("exchange must be positive, got {}", self.j)));
        }
        if self.gamma == 0.0 {
            return Err(Error::InvalidParams("anisotropy must be nonzero".into()));
        }
        Ok(())
    }

    pub fn h1(&self) -> f64 {
        self.lambda1 * self.j
    }

    pub fn h2(&self) -> f64 {
        self.lambda2 * self.j
    }

    /// Field on even sites, h₁ + h₂.
    pub fn h_plus(&self) -> f64 {
        self.h1() + self.h2()
    }

    /// Field on odd sites, h₁ − h₂.
    pub fn h_minus(&self) -> f64 {
        self.h1() - self.h2()
    }

    /// Same couplings with different dimensionless fields.
    pub fn with_fields(&self, lambda1: f64, lambda2: f64) -> Self {
        Self { lambda1, lambda2, ..*self }
    }

    /// Same couplings with both fields switched off.
    pub fn fields_off(&self) -> Self {
        self.with_fields(0.0, 0.0)
    }

    /// Global spin flip partner (λ₁, λ₂) → (−λ₁, −λ₂).
    pub fn flipped(&self) -> Self {
        self.with_fields(-self.lambda1, -self.lambda2)
    }
}

/// Inverse temperature, with zero temperature as a distinct tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Temperature {
    Zero,
    Beta(f64),
}

impl Temperature {
    /// `beta = +inf` maps to the zero-temperature tag.
    pub fn from_beta(beta: f64) -> Result<Self, Error> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParams(format!("inverse temperature {beta} must be >= 0")));
        }
        Ok(if beta.is_infinite() { Temperature::Zero } else { Temperature::Beta(beta) })
    }

    /// Temperature T = 1/β in units of J (0 for the zero tag).
    pub fn from_t(t: f64) -> Result<Self, Error> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidParams(format!("temperature {t} must be >= 0")));
        }
        Ok(if t == 0.0 { Temperature::Zero } else { Temperature::Beta(1.0 / t) })
    }

    pub fn beta(&self) -> f64 {
        match self {
            Temperature::Zero => f64::INFINITY,
            Temperature::Beta(b) => *b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_and_validation() {
        let p = SystemParams::new(2.0, 0.8, 0.5, 0.25).unwrap();
        assert_eq!((p.h1(), p.h2(), p.h_plus(), p.h_minus()), (1.0, 0.5, 1.5, 0.5));
        assert!(SystemParams::new(0.0, 0.8, 0.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.5, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn temperature_tags() {
        assert_eq!(Temperature::from_beta(f64::INFINITY).unwrap(), Temperature::Zero);
        assert_eq!(Temperature::from_t(0.5).unwrap(), Temperature::Beta(2.0));
        assert!(Temperature::from_beta(-1.0).is_err());
    }
}
