//! Coefficient rings with involution: exact integers and integers mod m.

use std::fmt;
use thiserror::Error;

/// Ring element. Values are kept normalized: for `Zmod(m)` they lie in `0..m`.
pub type Coeff = i128;

/// The involution `a -> conj(a)`. `Identity` is the involution used by the
/// supported commutative rings; `AddOne` (`a -> a+1`) deliberately violates
/// the axioms and exists so the axiom checker has something to reject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Involution {
    Identity,
    AddOne,
}

/// A ring with involution over which all module coefficients live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ring {
    /// Exact integers.
    Int,
    /// Integers modulo `m`, `m >= 2`.
    Mod(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("involution axiom violated: {0}")]
    InvolutionAxiom(String),
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("coefficient overflow in exact integer arithmetic")]
    Overflow,
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Int => write!(f, "z"),
            Ring::Mod(m) => write!(f, "zmod {m}"),
        }
    }
}

impl Ring {
    pub fn modulus(&self) -> Option<i128> {
        match self {
            Ring::Int => None,
            Ring::Mod(m) => Some(*m as i128),
        }
    }

    pub fn normalize(&self, a: Coeff) -> Coeff {
        match self.modulus() {
            None => a,
            Some(m) => a.rem_euclid(m),
        }
    }

    pub fn add(&self, a: Coeff, b: Coeff) -> Coeff {
        self.normalize(a.checked_add(b).expect("coefficient overflow"))
    }

    pub fn sub(&self, a: Coeff, b: Coeff) -> Coeff {
        self.normalize(a.checked_sub(b).expect("coefficient overflow"))
    }

    pub fn mul(&self, a: Coeff, b: Coeff) -> Coeff {
        self.normalize(a.checked_mul(b).expect("coefficient overflow"))
    }

    pub fn neg(&self, a: Coeff) -> Coeff {
        self.normalize(a.checked_neg().expect("coefficient overflow"))
    }

    pub fn is_zero(&self, a: Coeff) -> bool {
        self.normalize(a) == 0
    }

    pub fn one(&self) -> Coeff {
        self.normalize(1)
    }
}

/// A ring equipped with an involution choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingWithInvolution {
    pub ring: Ring,
    pub involution: Involution,
}

impl RingWithInvolution {
    pub fn new(ring: Ring) -> Self {
        RingWithInvolution { ring, involution: Involution::Identity }
    }

    pub fn conj(&self, a: Coeff) -> Coeff {
        match self.involution {
            Involution::Identity => self.ring.normalize(a),
            Involution::AddOne => self.ring.add(a, 1),
        }
    }
}

/// Report produced by the involution axiom check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutionReport {
    pub failures: Vec<String>,
}

impl InvolutionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the involution axioms on the supplied sample pairs: additivity,
/// product reversal, self-inversion and `conj(1) = 1`.
pub fn check_involution(rwi: &RingWithInvolution, samples: &[(Coeff, Coeff)]) -> InvolutionReport {
    let r = rwi.ring;
    let mut failures = Vec::new();
    if rwi.conj(r.one()) != r.one() {
        failures.push(format!("conj(1) = {} but must be 1", rwi.conj(r.one())));
    }
    for &(a, b) in samples {
        let (a, b) = (r.normalize(a), r.normalize(b));
        if rwi.conj(r.add(a, b)) != r.add(rwi.conj(a), rwi.conj(b)) {
            failures.push(format!("conj({a}+{b}) != conj({a})+conj({b})"));
        }
        if rwi.conj(r.mul(a, b)) != r.mul(rwi.conj(b), rwi.conj(a)) {
            failures.push(format!("conj({a}*{b}) != conj({b})*conj({a})"));
        }
        for x in [a, b] {
            if rwi.conj(rwi.conj(x)) != x {
                failures.push(format!("conj(conj({x})) != {x}"));
            }
        }
    }
    InvolutionReport { failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_with_identity_involution_pass() {
        let rwi = RingWithInvolution::new(Ring::Int);
        assert!(check_involution(&rwi, &[(2, 3)]).passed());
    }

    #[test]
    fn mod5_identity_involution_passes() {
        let rwi = RingWithInvolution::new(Ring::Mod(5));
        assert!(check_involution(&rwi, &[(2, 3), (4, 4), (0, 1)]).passed());
    }

    #[test]
    fn add_one_involution_fails_on_unit() {
        let rwi = RingWithInvolution { ring: Ring::Int, involution: Involution::AddOne };
        let report = check_involution(&rwi, &[(2, 3)]);
        assert!(!report.passed());
        assert!(report.failures.iter().any(|m| m.contains("conj(1)")));
    }

    #[test]
    fn mod_arithmetic_normalizes() {
        let r = Ring::Mod(5);
        assert_eq!(r.add(4, 3), 2);
        assert_eq!(r.mul(3, 4), 2);
        assert_eq!(r.neg(2), 3);
        assert_eq!(r.sub(1, 3), 3);
    }
}
