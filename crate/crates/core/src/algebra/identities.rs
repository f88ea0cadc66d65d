use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{random_element, MultiIndex, NCElement, Theta};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Worst relative error over the trials.
    pub error: f64,
    pub tol: f64,
    pub passed: bool,
}

struct Worst {
    names: Vec<&'static str>,
    errors: Vec<f64>,
}

impl Worst {
    fn record(&mut self, name: &'static str, err: f64) {
        match self.names.iter().position(|&n| n == name) {
            Some(i) => self.errors[i] = self.errors[i].max(err),
            None => {
                self.names.push(name);
                self.errors.push(err);
            }
        }
    }
}

/// Checks the algebra identities on seeded random elements with `count`
/// modes in the box of radius `radius`. Errors are relative to the product
/// of the ℓ² norms of the inputs.
pub fn algebra_identities(theta: &Theta, radius: u32, count: usize, trials: usize, seed: u64, tol: f64) -> Result<Vec<IdentityCheck>> {
    let n = theta.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = NCElement::one(theta);
    let mut w = Worst { names: Vec::new(), errors: Vec::new() };
    for _ in 0..trials {
        let u = random_element(theta, radius, count, &mut rng);
        let v = random_element(theta, radius, count, &mut rng);
        let x = random_element(theta, radius, count, &mut rng);
        let (nu, nv, nx) = (u.norm(), v.norm(), x.norm());
        let uv = u.try_mul(&v)?;

        let lhs = uv.try_mul(&x)?;
        let rhs = u.try_mul(&v.try_mul(&x)?)?;
        w.record("associativity", lhs.distance(&rhs) / (nu * nv * nx));

        let unit = one.try_mul(&u)?.distance(&u).max(u.try_mul(&one)?.distance(&u));
        w.record("unit", unit / nu);

        let anti = uv.involution().distance(&v.involution().try_mul(&u.involution())?);
        w.record("involution anti-homomorphism", anti / (nu * nv));
        w.record("involutivity", u.involution().involution().distance(&u) / nu);

        let vu = v.try_mul(&u)?;
        w.record("traciality", (uv.tau() - vu.tau()).norm() / (nu * nv));
        w.record("trace of adjoint", (u.involution().tau() - u.tau().conj()).norm() / nu);

        let route = u.try_mul(&v.involution())?.tau();
        w.record("inner product routes", (u.inner(&v)? - route).norm() / (nu * nv));

        for j in 0..n {
            let e = MultiIndex::unit(n, j);
            let (du, dv) = (u.delta(&e), v.delta(&e));
            w.record("trace of derivation", du.tau().norm() / nu);
            let ibp = u.try_mul(&dv)?.tau() + du.try_mul(&v)?.tau();
            w.record("integration by parts", ibp.norm() / (nu * dv.norm() + du.norm() * nv).max(f64::MIN_POSITIVE));
            let leibniz = uv.delta(&e).distance(&du.try_mul(&v)?.try_add(&u.try_mul(&dv)?)?);
            w.record("Leibniz rule", leibniz / (nu * dv.norm() + du.norm() * nv).max(f64::MIN_POSITIVE));
        }
    }
    Ok(w
        .names
        .into_iter()
        .zip(w.errors)
        .map(|(name, error)| IdentityCheck { name: name.to_string(), error, tol, passed: error <= tol })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ThetaMatrix;

    #[test]
    fn identities_hold_and_fault_is_caught() {
        let theta = ThetaMatrix::uniform(3, 0.31).into_shared();
        let checks = algebra_identities(&theta, 5, 12, 4, 1, 1e-12).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        let faulty = ThetaMatrix::uniform(3, 0.31).with_phase_fault().into_shared();
        let checks = algebra_identities(&faulty, 5, 12, 4, 1, 1e-12).unwrap();
        let assoc = checks.iter().find(|c| c.name == "associativity").unwrap();
        assert!(!assoc.passed);
    }
}
