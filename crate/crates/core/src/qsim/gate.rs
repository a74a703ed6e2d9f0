use crate::{Error, Result};

/// A unitary acting on a subset of a register's sites.
///
/// Basis indices inside [`Gate::Phase`] refer to the sub-register formed by
/// `sites`, read most-significant-first in the listed order.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// The `M` gate on one site.
    M(usize),
    /// `M` on every listed site.
    Wh(Vec<usize>),
    /// Multiplies the amplitude of each listed sub-register basis state by `e^{i·angle}`.
    Phase {
        sites: Vec<usize>,
        angles: Vec<(usize, f64)>,
    },
    Cnot { control: usize, target: usize },
    /// `gate` applied on the subspace where `control` is 1.
    Controlled { control: usize, gate: Box<Gate> },
}

impl Gate {
    pub fn m(site: usize) -> Self {
        Gate::M(site)
    }

    pub fn wh(sites: impl Into<Vec<usize>>) -> Self {
        Gate::Wh(sites.into())
    }

    pub fn basis_phase(sites: impl Into<Vec<usize>>, index: usize, angle: f64) -> Self {
        Gate::Phase {
            sites: sites.into(),
            angles: vec![(index, angle)],
        }
    }

    pub fn diagonal(sites: impl Into<Vec<usize>>, angles: Vec<(usize, f64)>) -> Self {
        Gate::Phase {
            sites: sites.into(),
            angles,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    /// Conditions `self` on `control` being 1.
    pub fn controlled_by(self, control: usize) -> Result<Self> {
        if self.sites().contains(&control) {
            return Err(Error::ControlOverlap(control));
        }
        Ok(Gate::Controlled {
            control,
            gate: Box::new(self),
        })
    }

    /// All sites the gate touches, controls included.
    pub fn sites(&self) -> Vec<usize> {
        match self {
            Gate::M(s) => vec![*s],
            Gate::Wh(s) => s.clone(),
            Gate::Phase { sites, .. } => sites.clone(),
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Controlled { control, gate } => {
                let mut s = gate.sites();
                s.push(*control);
                s
            }
        }
    }

    /// Single-site gate applications this gate stands for.
    ///
    /// `M` and CNOT count one, a Walsh-Hadamard transform counts one per site and
    /// a diagonal phase counts one per rotated basis state. Controls are free.
    pub fn elementary_count(&self) -> u64 {
        match self {
            Gate::M(_) | Gate::Cnot { .. } => 1,
            Gate::Wh(s) => s.len() as u64,
            Gate::Phase { angles, .. } => angles.len() as u64,
            Gate::Controlled { gate, .. } => gate.elementary_count(),
        }
    }

    /// Checks site ranges, distinctness and control overlap against a register size.
    pub fn validate(&self, num_sites: usize) -> Result<()> {
        let in_range = |s: usize| {
            if s < num_sites {
                Ok(())
            } else {
                Err(Error::SiteOutOfRange { site: s, num_sites })
            }
        };
        let distinct = |sites: &[usize]| {
            for (i, s) in sites.iter().enumerate() {
                in_range(*s)?;
                if sites[..i].contains(s) {
                    return Err(Error::DuplicateSite(*s));
                }
            }
            Ok(())
        };
        match self {
            Gate::M(s) => in_range(*s),
            Gate::Wh(s) => distinct(s),
            Gate::Phase { sites, angles } => {
                distinct(sites)?;
                let dim = 1usize << sites.len();
                for &(idx, angle) in angles {
                    if idx >= dim {
                        return Err(Error::IndexOutOfRange { index: idx, dim });
                    }
                    if !angle.is_finite() {
                        return Err(Error::InvalidParameter(format!("non-finite angle {angle}")));
                    }
                }
                Ok(())
            }
            Gate::Cnot { control, target } => {
                in_range(*control)?;
                in_range(*target)?;
                if control == target {
                    return Err(Error::DuplicateSite(*control));
                }
                Ok(())
            }
            Gate::Controlled { control, gate } => {
                in_range(*control)?;
                if gate.sites().contains(control) {
                    return Err(Error::ControlOverlap(*control));
                }
                gate.validate(num_sites)
            }
        }
    }
}
