//! Deciding whether a symmetry reduction has an ESFL quotient through the
//! relative Goursat bundle `V + Γ`.

use std::fmt;

use flags::cauchy_characteristics;
use geomcore::Distribution;
use goursat::{esfl_conditions_for, is_goursat_bundle, is_relative_goursat_bundle, EsflVerdict, GoursatVerdict};

use crate::algebra::{is_control_admissible, is_strongly_transverse, Admissibility, SymmetryAlgebra};
use crate::SymmetryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientOutcome {
    /// `V + Γ` is an ESF relative Goursat bundle: the quotient is ESFL.
    Esfl,
    /// `V + Γ` is a relative Goursat bundle but one of the ESF conditions
    /// fails: the quotient is equivalent to a Brunovsky form by a
    /// diffeomorphism only.
    GoursatOnly,
    Failure,
}

impl fmt::Display for QuotientOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuotientOutcome::Esfl => "quotient ESFL",
            QuotientOutcome::GoursatOnly => "quotient Goursat only",
            QuotientOutcome::Failure => "no Brunovsky quotient certified",
        })
    }
}

/// Full record of the relative Goursat decision.
#[derive(Clone, Debug)]
pub struct RelativeVerdict {
    /// `Char V = 0`.
    pub cauchy_free: bool,
    pub admissibility: Admissibility,
    pub strongly_transverse: bool,
    /// `V + Γ` is a direct sum.
    pub direct: bool,
    /// `V + Γ`.
    pub extended: Distribution,
    pub goursat: GoursatVerdict,
    pub esf: EsflVerdict,
    pub outcome: QuotientOutcome,
    /// Reasons for a failure, empty otherwise.
    pub detail: Vec<String>,
}

impl fmt::Display for RelativeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.outcome)?;
        writeln!(f, "  refined derived type of V + Γ: {}", self.goursat.analysis.rdt)?;
        if let Some(s) = self.goursat.signature() {
            writeln!(f, "  signature: {s}")?;
        }
        let yn = |b: bool| if b { "pass" } else { "fail" };
        writeln!(f, "  Char V = 0: {}", yn(self.cauchy_free))?;
        writeln!(
            f,
            "  control admissible: {}{}",
            yn(self.admissibility.admissible()),
            if self.admissibility.admissible() { " (partially verified)" } else { "" }
        )?;
        writeln!(f, "  strongly transverse: {}", yn(self.strongly_transverse))?;
        for c in &self.goursat.conditions {
            writeln!(f, "  {c}")?;
        }
        writeln!(f, "  {}", self.esf.controls)?;
        writeln!(f, "  {}", self.esf.time)?;
        for d in &self.detail {
            writeln!(f, "  reason: {d}")?;
        }
        Ok(())
    }
}

/// Form `V + Γ` and decide whether it is an ESF relative Goursat bundle.
/// With no symmetries this is the plain Goursat and ESFL decision for `V`.
pub fn relative_goursat_check(v: &Distribution, gamma: &SymmetryAlgebra) -> Result<RelativeVerdict, SymmetryError> {
    let p = v.annihilator();
    let cauchy_free = cauchy_characteristics(v).rank() == 0;
    let admissibility = is_control_admissible(gamma, &p)?;
    let strongly_transverse = is_strongly_transverse(gamma, &p)?;
    let extended = v.extended(gamma.generators())?;
    let direct = extended.rank() == v.rank() + gamma.dim();
    let goursat = if gamma.is_empty() {
        is_goursat_bundle(&extended)?
    } else {
        is_relative_goursat_bundle(&extended)?
    };
    let esf = esfl_conditions_for(&extended, &goursat);

    let mut detail = Vec::new();
    if !cauchy_free {
        detail.push("V has Cauchy characteristics".to_string());
    }
    if !admissibility.admissible() {
        for (name, ok) in admissibility.items() {
            if !ok {
                detail.push(format!("admissibility: {name}"));
            }
        }
    }
    if !strongly_transverse {
        detail.push("Γ meets V^(1)".to_string());
    }
    if !direct {
        detail.push("V + Γ is not a direct sum".to_string());
    }
    if !gamma.is_empty() && goursat.analysis.derived_length() < 2 {
        detail.push(format!("V + Γ has derived length {}", goursat.analysis.derived_length()));
    }
    for c in goursat.conditions.iter().filter(|c| !c.status.ok()) {
        detail.push(format!("{}: {}", c.name, c.detail));
    }
    let outcome = if !detail.is_empty() {
        QuotientOutcome::Failure
    } else if esf.esfl {
        QuotientOutcome::Esfl
    } else {
        for c in [&esf.controls, &esf.time] {
            if !c.status.ok() {
                detail.push(format!("{}: {}", c.name, c.detail));
            }
        }
        QuotientOutcome::GoursatOnly
    };
    Ok(RelativeVerdict {
        cauchy_free,
        admissibility,
        strongly_transverse,
        direct,
        extended,
        goursat,
        esf,
        outcome,
        detail,
    })
}
