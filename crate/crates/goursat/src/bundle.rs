//! Goursat bundle recognition and the extended static feedback
//! linearizability conditions.

use std::fmt;

use flags::{analyze, FlagAnalysis};
use geomcore::{Distribution, VectorField};

use crate::signature::{signature_from_rdt, GoursatSignature, SignatureMismatch};
use crate::weber::{weber_structure, WeberStructure};
use crate::GoursatError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The condition does not apply (for instance the Weber condition when
    /// `Delta_k = 1`).
    NotApplicable,
}

impl Status {
    fn from_bool(b: bool) -> Status {
        if b {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn ok(self) -> bool {
        self != Status::Fail
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "n/a",
        })
    }
}

/// One itemized condition of a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.name, self.status, self.detail)
    }
}

/// Outcome of the three Goursat conditions.
#[derive(Clone, Debug)]
pub struct GoursatVerdict {
    pub analysis: FlagAnalysis,
    pub signature: Result<GoursatSignature, SignatureMismatch>,
    /// Type numbers, integrable intersections, Weber structure.
    pub conditions: Vec<Condition>,
    /// Weber structure on `V^(k-1)` when `Delta_k > 1` and it exists.
    pub weber: Option<WeberStructure>,
    /// The relative variant (no `m_0 = 1 + m` relation).
    pub relative: bool,
}

impl GoursatVerdict {
    pub fn is_goursat(&self) -> bool {
        self.conditions.iter().all(|c| c.status.ok())
    }

    pub fn signature(&self) -> Option<&GoursatSignature> {
        self.signature.as_ref().ok()
    }

    /// `Delta_k = m_k - m_{k-1}`.
    pub fn delta_k(&self) -> usize {
        let m = self.analysis.ranks();
        m[m.len() - 1] - m[m.len().saturating_sub(2)]
    }
}

impl fmt::Display for GoursatVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = if self.relative { "relative Goursat" } else { "Goursat" };
        match (&self.signature, self.is_goursat()) {
            (Ok(s), true) => writeln!(f, "{what} bundle of type {s}")?,
            _ => writeln!(f, "not a {what} bundle")?,
        }
        for c in &self.conditions {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

/// Decide whether `V` is a Goursat bundle.
pub fn is_goursat_bundle(v: &Distribution) -> Result<GoursatVerdict, GoursatError> {
    goursat_verdict(v, false)
}

/// Decide whether `V` is a relative Goursat bundle (Cauchy
/// characteristics allowed, intersections only required integrable).
pub fn is_relative_goursat_bundle(v: &Distribution) -> Result<GoursatVerdict, GoursatError> {
    goursat_verdict(v, true)
}

fn goursat_verdict(v: &Distribution, relative: bool) -> Result<GoursatVerdict, GoursatError> {
    let analysis = analyze(v)?;
    let k = analysis.derived_length();
    let m = analysis.ranks();
    let signature = signature_from_rdt(&analysis.rdt, relative);
    let mut conditions = Vec::new();
    conditions.push(Condition {
        name: "type numbers",
        status: Status::from_bool(signature.is_ok()),
        detail: match &signature {
            Ok(s) => format!("{} matches the partial prolongation of type {s}", analysis.rdt),
            Err(e) => format!("{}: {e}", analysis.rdt),
        },
    });

    let mut bad = Vec::new();
    for i in 1..k {
        let b = analysis.inchar(i);
        if !b.is_frobenius() {
            bad.push(format!("Char(V^({i}))_{} is not integrable", i - 1));
        } else if !relative && b.rank() + 1 != m[i - 1] {
            bad.push(format!("Char(V^({i}))_{} has rank {}, expected {}", i - 1, b.rank(), m[i - 1] - 1));
        }
    }
    conditions.push(Condition {
        name: "integrable intersections",
        status: if k <= 1 { Status::NotApplicable } else { Status::from_bool(bad.is_empty()) },
        detail: if bad.is_empty() {
            format!("Char(V^(i))_(i-1) integrable for 1 <= i <= {}", k.saturating_sub(1))
        } else {
            bad.join("; ")
        },
    });

    let delta_k = if k == 0 { 0 } else { m[k] - m[k - 1] };
    let mut weber = None;
    let weber_condition = if k == 0 || delta_k <= 1 {
        Condition {
            name: "Weber structure",
            status: Status::NotApplicable,
            detail: format!("Delta_k = {delta_k}"),
        }
    } else {
        match weber_structure(analysis.flag.step(k - 1)) {
            Ok(w) => {
                let expected = delta_k + analysis.chars[k - 1].rank();
                let rank = w.resolvent.rank();
                let status = Status::from_bool(w.integrable && rank == expected);
                let detail = format!(
                    "resolvent of rank {rank} (expected {expected}), {}",
                    if w.integrable { "integrable" } else { "not integrable" }
                );
                weber = Some(w);
                Condition {
                    name: "Weber structure",
                    status,
                    detail,
                }
            }
            Err(GoursatError::Weber(e)) => Condition {
                name: "Weber structure",
                status: Status::Fail,
                detail: format!("V^({}): {e}", k - 1),
            },
            Err(e) => return Err(e),
        }
    };
    conditions.push(weber_condition);
    Ok(GoursatVerdict {
        analysis,
        signature,
        conditions,
        weber,
        relative,
    })
}

/// The two conditions singling out extended static feedback equivalence
/// among Goursat bundles that represent control systems.
#[derive(Clone, Debug)]
pub struct EsflVerdict {
    /// Every control direction lies in `Char(V^(1))_0`.
    pub controls: Condition,
    /// `dt` annihilates `Char V^(k-1)` (`Delta_k = 1`) or the resolvent
    /// bundle (`Delta_k > 1`).
    pub time: Condition,
    /// Conjunction with the Goursat verdict.
    pub esfl: bool,
}

impl fmt::Display for EsflVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.esfl { "ESFL" } else { "not ESFL" })?;
        writeln!(f, "  {}", self.controls)?;
        writeln!(f, "  {}", self.time)
    }
}

fn has_time_component(d: &Distribution, t: usize) -> Option<VectorField> {
    d.basis().into_iter().find(|x| !d.ctx().is_zero(x.coeff(t)))
}

/// Evaluate both items on an existing Goursat verdict.
pub fn esfl_conditions_for(v: &Distribution, verdict: &GoursatVerdict) -> EsflVerdict {
    let chart = v.chart();
    let a = &verdict.analysis;
    let k = a.derived_length();
    let controls = if k == 0 {
        Condition {
            name: "control directions",
            status: Status::Fail,
            detail: "derived length 0".into(),
        }
    } else {
        let inchar = a.inchar(1);
        let missing: Vec<String> = chart
            .controls()
            .into_iter()
            .filter(|&i| !inchar.contains(&VectorField::coordinate(chart, i)))
            .map(|i| format!("D_{}", chart.name(i)))
            .collect();
        Condition {
            name: "control directions",
            status: Status::from_bool(missing.is_empty() && !chart.controls().is_empty()),
            detail: if chart.controls().is_empty() {
                "no control coordinates".into()
            } else if missing.is_empty() {
                "{D_u} ⊂ Char(V^(1))_0".into()
            } else {
                format!("{} ∉ Char(V^(1))_0", missing.join(", "))
            },
        }
    };
    let time = match (chart.time_index(), k) {
        (None, _) => Condition {
            name: "time",
            status: Status::Fail,
            detail: "no time coordinate".into(),
        },
        (_, 0) => Condition {
            name: "time",
            status: Status::Fail,
            detail: "derived length 0".into(),
        },
        (Some(t), _) if verdict.delta_k() == 1 => {
            let bad = has_time_component(&a.chars[k - 1], t);
            Condition {
                name: "time",
                status: Status::from_bool(bad.is_none()),
                detail: match bad {
                    None => format!("dt ∈ Ξ^({}) = ann Char V^({})", k - 1, k - 1),
                    Some(x) => format!("dt ∉ Ξ^({}): {} ∈ Char V^({})", k - 1, x, k - 1),
                },
            }
        }
        (Some(t), _) => match &verdict.weber {
            Some(w) => {
                let bad = has_time_component(&w.resolvent, t);
                Condition {
                    name: "time",
                    status: Status::from_bool(bad.is_none()),
                    detail: match bad {
                        None => "dt ∈ Υ = ann R".into(),
                        Some(x) => format!("dt ∉ Υ: the resolvent bundle contains {x}"),
                    },
                }
            }
            None => Condition {
                name: "time",
                status: Status::Fail,
                detail: "no resolvent bundle".into(),
            },
        },
    };
    let esfl = verdict.is_goursat() && controls.status.ok() && time.status.ok();
    EsflVerdict { controls, time, esfl }
}

/// Goursat verdict and ESFL conditions for `V`.
pub fn esfl_conditions(v: &Distribution) -> Result<(GoursatVerdict, EsflVerdict), GoursatError> {
    let verdict = is_goursat_bundle(v)?;
    let e = esfl_conditions_for(v, &verdict);
    Ok((verdict, e))
}
