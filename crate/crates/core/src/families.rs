//! The standard test families.

use crate::model::{GeneralParams, Hamiltonian, PotentialSpec, Profile};

pub fn free() -> PotentialSpec {
    PotentialSpec::zero()
}

/// Smooth off-diagonal bump on `(0, 2)`.
pub fn bump() -> PotentialSpec {
    PotentialSpec::OffDiagonal { params: Profile::Bump { amplitude: 1.0, start: 0.0, end: 2.0 } }
}

/// Smooth bumps in both entries, supported in `(0, 2)`.
pub fn gbump() -> PotentialSpec {
    PotentialSpec::General {
        params: GeneralParams {
            q1: Profile::Bump { amplitude: 0.6, start: 0.0, end: 2.0 },
            q2: Profile::Bump { amplitude: 0.8, start: 0.4, end: 1.8 },
        },
    }
}

/// `q = 0.5` everywhere; not in the Szego class.
pub fn constant() -> PotentialSpec {
    PotentialSpec::OffDiagonal { params: Profile::Constant { value: 0.5 } }
}

pub fn sin_square() -> PotentialSpec {
    PotentialSpec::OffDiagonal { params: Profile::SinSquare { amplitude: 1.0 } }
}

pub fn by_name(name: &str) -> Option<PotentialSpec> {
    match name {
        "free" => Some(free()),
        "bump" => Some(bump()),
        "gbump" => Some(gbump()),
        "const" => Some(constant()),
        "sin_square" => Some(sin_square()),
        _ => None,
    }
}

pub fn hamiltonian(spec: &PotentialSpec) -> Hamiltonian {
    Hamiltonian::from_potential(spec).expect("standard families are valid")
}
