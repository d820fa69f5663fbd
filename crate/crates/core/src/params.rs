//! The admissible two-parameter family (z, z′) and its derived (a, μ, σ).

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;
use num_complex::Complex64;

/// Distance to the integer lattice below which a value counts as an integer.
pub const LATTICE_TOL: f64 = 1e-9;
const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("inadmissible parameters: {0}")]
    Inadmissible(&'static str),
    #[error("sigma^2 = {0:e} is not strictly positive")]
    NonPositiveSigma(f64),
    #[error("non-finite parameter")]
    NotFinite,
}

/// Which clause of the admissibility condition a parameter set satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// z′ = z̄ with z not an integer.
    Conjugate,
    /// z, z′ real and in a common open interval (m, m+1).
    Real,
}

/// A validated parameter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet {
    z: Complex64,
    z_prime: Complex64,
    a: f64,
    mu: Complex64,
    sigma: f64,
    branch: Branch,
}

fn near_integer(t: f64) -> bool {
    (t - t.round()).abs() < LATTICE_TOL
}

fn snap(w: Complex64) -> Complex64 {
    let re = if w.re.abs() < SNAP { 0.0 } else { w.re };
    let im = if w.im.abs() < SNAP { 0.0 } else { w.im };
    Complex64::new(re, im)
}

/// σ = √((cos 2πμ − cos 2πa)/2) for real a and real or imaginary μ.
pub fn sigma_of(a: f64, mu: Complex64) -> Result<f64, ParamError> {
    let s2 = sigma_squared(a, mu);
    if !(s2 > 0.0) {
        return Err(ParamError::NonPositiveSigma(s2));
    }
    Ok(s2.sqrt())
}

/// (cos 2πμ − cos 2πa)/2 without the sign check.
pub fn sigma_squared(a: f64, mu: Complex64) -> f64 {
    let c = (mu * (2.0 * PI)).cos();
    0.5 * (c.re - (2.0 * PI * a).cos())
}

/// Validates (z, z′) and derives a, μ, σ.
pub fn make_parameters(z: Complex64, z_prime: Complex64) -> Result<ParameterSet, ParamError> {
    if !(z.re.is_finite() && z.im.is_finite() && z_prime.re.is_finite() && z_prime.im.is_finite()) {
        return Err(ParamError::NotFinite);
    }
    let z = snap(z);
    let z_prime = snap(z_prime);
    let real = z.im == 0.0 && z_prime.im == 0.0;
    let branch = if real {
        if near_integer(z.re) || near_integer(z_prime.re) {
            return Err(ParamError::Inadmissible("z and z' must not be integers"));
        }
        if z.re.floor() != z_prime.re.floor() {
            return Err(ParamError::Inadmissible("real z, z' must lie in a common interval (m, m+1)"));
        }
        Branch::Real
    } else {
        if (z.re - z_prime.re).abs() > SNAP || (z.im + z_prime.im).abs() > SNAP {
            return Err(ParamError::Inadmissible("non-real z requires z' = conj(z)"));
        }
        Branch::Conjugate
    };
    let a = 0.5 * (z.re + z_prime.re);
    let mu = snap((z - z_prime) * 0.5);
    if mu.re != 0.0 && mu.im != 0.0 {
        return Err(ParamError::Inadmissible("mu must be real or purely imaginary"));
    }
    if mu.re.abs() >= 0.5 {
        return Err(ParamError::Inadmissible("real mu must satisfy |mu| < 1/2"));
    }
    if mu == Complex64::new(0.0, 0.0) && near_integer(a) {
        return Err(ParamError::Inadmissible("mu = 0 requires a not an integer"));
    }
    let sigma = sigma_of(a, mu)?;
    Ok(ParameterSet { z, z_prime, a, mu, sigma, branch })
}

impl ParameterSet {
    /// Builds the set from a and μ, i.e. z = a + μ, z′ = a − μ.
    pub fn from_a_mu(a: f64, mu: Complex64) -> Result<Self, ParamError> {
        make_parameters(Complex64::new(a, 0.0) + mu, Complex64::new(a, 0.0) - mu)
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn z_prime(&self) -> Complex64 {
        self.z_prime
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// z·z′, real on both branches.
    pub fn zz(&self) -> f64 {
        (self.z * self.z_prime).re
    }

    /// σ² from the product form sin πz · sin πz′.
    pub fn sigma_squared_product(&self) -> f64 {
        ((self.z * PI).sin() * (self.z_prime * PI).sin()).re
    }

    /// The same family with z ↔ z′.
    pub fn swapped(&self) -> Self {
        ParameterSet { z: self.z_prime, z_prime: self.z, mu: -self.mu, ..*self }
    }
}

/// (z + N, z′ + N). Admissibility is preserved, so this cannot fail.
pub fn shift_parameters(p: &ParameterSet, n: i64) -> ParameterSet {
    let s = n as f64;
    let z = p.z + s;
    let z_prime = p.z_prime + s;
    let a = p.a + s;
    ParameterSet { z, z_prime, a, mu: p.mu, sigma: sigma_squared(a, p.mu).sqrt(), branch: p.branch }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conjugate_branch() {
        let p = make_parameters(c(0.3, 0.4), c(0.3, -0.4)).unwrap();
        assert_eq!(p.branch(), Branch::Conjugate);
        assert!((p.a() - 0.3).abs() < 1e-15);
        assert_eq!(p.mu().re, 0.0);
        assert!((p.mu().im - 0.4).abs() < 1e-15);
    }

    #[test]
    fn real_branch() {
        let p = make_parameters(c(0.2, 0.0), c(0.7, 0.0)).unwrap();
        assert_eq!(p.branch(), Branch::Real);
        assert!((p.a() - 0.45).abs() < 1e-15);
        assert!((p.mu().re + 0.25).abs() < 1e-15);
        assert!((p.sigma() * p.sigma() - p.sigma_squared_product()).abs() < 1e-12);
    }

    #[test]
    fn rejections() {
        assert!(make_parameters(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(make_parameters(c(0.2, 0.0), c(1.3, 0.0)).is_err());
        assert!(make_parameters(c(0.2, 0.1), c(0.3, -0.1)).is_err());
        assert!(make_parameters(c(2.0 + 1e-10, 0.0), c(2.5, 0.0)).is_err());
        assert!(make_parameters(c(f64::NAN, 0.0), c(0.5, 0.0)).is_err());
    }

    #[test]
    fn sigma_closed_forms() {
        let s = sigma_of(0.5, c(0.2, 0.0)).unwrap();
        assert!((s - (((0.4 * PI).cos() + 1.0) / 2.0).sqrt()).abs() < 1e-15);
        let tau = 0.3;
        let s = sigma_of(0.0, c(0.0, tau)).unwrap();
        assert!((s - (PI * tau).sinh()).abs() < 1e-14);
        assert!(sigma_of(0.0, c(0.25, 0.0)).is_err());
    }

    #[test]
    fn shifts() {
        let p = make_parameters(c(0.2, 0.0), c(0.7, 0.0)).unwrap();
        let q = shift_parameters(&p, 2);
        assert_eq!(q.z(), c(2.2, 0.0));
        assert_eq!(q.mu(), p.mu());
        assert_eq!(shift_parameters(&p, 0), p);
        let r = make_parameters(c(0.3, 0.4), c(0.3, -0.4)).unwrap();
        assert!((shift_parameters(&r, 2).sigma() - r.sigma()).abs() < 1e-13);
        assert!(make_parameters(q.z(), q.z_prime()).is_ok());
    }

    #[test]
    fn swap_is_an_involution() {
        let p = make_parameters(c(0.2, 0.0), c(0.7, 0.0)).unwrap();
        assert_eq!(p.swapped().swapped(), p);
        assert_eq!(p.swapped().sigma(), p.sigma());
    }
}
