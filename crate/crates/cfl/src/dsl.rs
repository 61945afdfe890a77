//! The system-definition language.
//!
//! A file is a sequence of statements, one per line or separated by `;`.
//! `#` starts a comment. Statements:
//!
//! ```text
//! system <name>
//! time <var>                         # default t
//! states <var>, ...
//! controls <var>, ...
//! ode <state> = <expr>
//! pfaff <name> = <one-form, e.g. dx1 - x2*dt>
//! symmetry <name> = <vector field, e.g. x2*D_x1 + D_u1>
//! invariants = <name> = <expr>, ...  # a bare coordinate name maps to itself
//! crosssection <coordinate> = <expr in the invariant names>
//! integrals <tag> = <expr>, ...
//! subconnection kappa = <1,0,1>      # or: subconnection sigma = 2, 1
//! p<b> = <expr in t, z<i>_<l>>
//! rho = [[<expr>, ...], ...]         # rho[b][a], default identity
//! reduce drop <chain> with <name>
//! flatfns <name> = <expr in t>       # z<i> for chain i, else a frozen function
//! decomposition = <A0>, <A1>, ...
//! grid = <t0>, <t1>, <steps>
//! eps0 = <value>, ...
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use cascade::{build_subconnection, ContactCurveSpec, ContactSubConnection, FlatCurves, JetChains, TimeGrid};
use geomcore::{Chart, ControlSystem, Ctx, Distribution, OneForm, PfaffianSystem, VectorField};
use goursat::{FirstIntegralOracle, GoursatSignature};
use symexpr::{nf, NormalForm};
use symmetry::{QuotientData, SymmetryAlgebra};
use thiserror::Error;

/// A located error in a system file.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// A value with the position of its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Spanned<T> {
    pub value: T,
    pub line: usize,
    pub col: usize,
}

impl<T> Spanned<T> {
    fn err(&self, msg: impl fmt::Display) -> DslError {
        DslError {
            line: self.line,
            col: self.col,
            msg: msg.to_string(),
        }
    }
}

/// What the file describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    /// A control system given by `ode` statements.
    Control,
    /// A Pfaffian system given by `pfaff` statements.
    Pfaffian,
    /// A contact sub-connection.
    SubConnection,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Control => "control system",
            SystemKind::Pfaffian => "pfaffian system",
            SystemKind::SubConnection => "contact sub-connection",
        })
    }
}

/// Sub-connection data as declared.
#[derive(Clone, Debug)]
pub struct SubConnectionDecl {
    pub chains: JetChains,
    pub p: Vec<NormalForm>,
    pub rho: Vec<Vec<NormalForm>>,
}

/// A validated system file.
#[derive(Clone, Debug)]
pub struct SystemFile {
    pub name: String,
    pub kind: SystemKind,
    pub time: String,
    pub states: Vec<String>,
    pub controls: Vec<String>,
    /// Right-hand sides in the order of `states`.
    pub odes: Vec<NormalForm>,
    pub pfaffs: Vec<(String, OneForm)>,
    pub symmetries: Vec<(String, VectorField)>,
    pub invariants: Vec<(String, NormalForm)>,
    pub crosssection: Vec<(String, NormalForm)>,
    pub integrals: Vec<(String, Vec<NormalForm>)>,
    pub subconnection: Option<SubConnectionDecl>,
    /// `reduce drop <chain> with <name>` statements.
    pub reduce: BTreeMap<usize, String>,
    pub flatfns: Vec<(String, NormalForm)>,
    pub decomposition: Vec<NormalForm>,
    pub grid: Option<(f64, f64, usize)>,
    pub eps0: Vec<f64>,
    chart: Option<Chart>,
}

/// Statements collected before validation.
#[derive(Default)]
struct Raw {
    name: Option<Spanned<String>>,
    time: Option<Spanned<String>>,
    states: Vec<Spanned<String>>,
    controls: Vec<Spanned<String>>,
    odes: Vec<(Spanned<String>, Spanned<String>)>,
    pfaffs: Vec<(Spanned<String>, Spanned<String>)>,
    symmetries: Vec<(Spanned<String>, Spanned<String>)>,
    invariants: Vec<(Spanned<String>, Spanned<String>)>,
    crosssection: Vec<(Spanned<String>, Spanned<String>)>,
    integrals: Vec<(Spanned<String>, Vec<Spanned<String>>)>,
    chains: Option<Spanned<JetChains>>,
    p: Vec<(Spanned<usize>, Spanned<String>)>,
    rho: Option<Spanned<Vec<Vec<Spanned<String>>>>>,
    reduce: Vec<(Spanned<usize>, Spanned<String>)>,
    flatfns: Vec<(Spanned<String>, Spanned<String>)>,
    decomposition: Vec<Spanned<String>>,
    grid: Option<Spanned<Vec<Spanned<String>>>>,
    eps0: Vec<Spanned<String>>,
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// Trim `s` (located at `col`) and return the trimmed text with its column.
fn trimmed(s: &str, line: usize, col: usize) -> Spanned<String> {
    let lead = s.len() - s.trim_start().len();
    Spanned {
        value: s.trim().to_string(),
        line,
        col: col + s[..lead].chars().count(),
    }
}

/// Split at top-level occurrences of `sep` (outside brackets).
fn split_top(s: &Spanned<String>, sep: char) -> Vec<Spanned<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let text = &s.value;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(trimmed(&text[start..i], s.line, s.col + text[..start].chars().count()));
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push(trimmed(&text[start..], s.line, s.col + text[..start].chars().count()));
    out
}

/// Split `lhs = rhs` at the first `=`.
fn assignment(s: &Spanned<String>) -> Result<(Spanned<String>, Spanned<String>), DslError> {
    let (l, r) = s
        .value
        .split_once('=')
        .ok_or_else(|| s.err("expected `<name> = <value>`"))?;
    let lhs = trimmed(l, s.line, s.col);
    let rhs = trimmed(r, s.line, s.col + l.chars().count() + 1);
    if rhs.value.is_empty() {
        return Err(rhs.err("missing value after `=`"));
    }
    Ok((lhs, rhs))
}

fn ident(s: Spanned<String>, what: &str) -> Result<Spanned<String>, DslError> {
    if is_ident(&s.value) {
        Ok(s)
    } else {
        Err(s.err(format!("expected {what}, found `{}`", s.value)))
    }
}

fn nonempty_list(s: &Spanned<String>) -> Result<Vec<Spanned<String>>, DslError> {
    let items = split_top(s, ',');
    if let Some(bad) = items.iter().find(|i| i.value.is_empty()) {
        return Err(bad.err("empty list item"));
    }
    Ok(items)
}

fn expr(s: &Spanned<String>) -> Result<NormalForm, DslError> {
    nf(&s.value).map_err(|e| DslError {
        line: s.line,
        col: s.col + e.position().map_or(0, |p| s.value[..p.min(s.value.len())].chars().count()),
        msg: e.to_string(),
    })
}

fn number<T: std::str::FromStr>(s: &Spanned<String>, what: &str) -> Result<T, DslError> {
    s.value
        .parse()
        .map_err(|_| s.err(format!("expected {what}, found `{}`", s.value)))
}

/// Parse `[[a, b], [c, d]]`; a value without brackets is a 1 x 1 matrix.
fn matrix(s: &Spanned<String>) -> Result<Vec<Vec<Spanned<String>>>, DslError> {
    let strip = |x: &Spanned<String>| -> Option<Spanned<String>> {
        let v = x.value.strip_prefix('[')?.strip_suffix(']')?;
        Some(trimmed(v, x.line, x.col + 1))
    };
    let Some(inner) = strip(s) else {
        return Ok(vec![vec![s.clone()]]);
    };
    let mut rows = Vec::new();
    for row in nonempty_list(&inner)? {
        let r = strip(&row).ok_or_else(|| row.err("expected a row `[...]`"))?;
        rows.push(nonempty_list(&r)?);
    }
    Ok(rows)
}

fn parse_statement(raw: &mut Raw, st: Spanned<String>) -> Result<(), DslError> {
    let text = st.value.as_str();
    let kw_len = text
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(text.len());
    let kw = &text[..kw_len];
    let rest = trimmed(&text[kw_len..], st.line, st.col + kw_len);
    let once = |slot: bool, what: &str| -> Result<(), DslError> {
        if slot {
            Err(st.err(format!("`{what}` given twice")))
        } else {
            Ok(())
        }
    };
    match kw {
        "system" => {
            once(raw.name.is_some(), "system")?;
            if rest.value.is_empty() {
                return Err(rest.err("missing system name"));
            }
            raw.name = Some(rest);
        }
        "time" => {
            once(raw.time.is_some(), "time")?;
            raw.time = Some(ident(rest, "a time variable")?);
        }
        "states" | "controls" => {
            let names = nonempty_list(&rest)?
                .into_iter()
                .map(|n| ident(n, "a variable name"))
                .collect::<Result<Vec<_>, _>>()?;
            if kw == "states" {
                raw.states.extend(names);
            } else {
                raw.controls.extend(names);
            }
        }
        "ode" | "pfaff" | "symmetry" | "crosssection" | "flatfns" => {
            let (lhs, rhs) = assignment(&rest)?;
            let lhs = ident(lhs, "a name")?;
            let slot = match kw {
                "ode" => &mut raw.odes,
                "pfaff" => &mut raw.pfaffs,
                "symmetry" => &mut raw.symmetries,
                "crosssection" => &mut raw.crosssection,
                _ => &mut raw.flatfns,
            };
            if slot.iter().any(|(n, _)| n.value == lhs.value) {
                return Err(lhs.err(format!("`{kw} {}` given twice", lhs.value)));
            }
            slot.push((lhs, rhs));
        }
        "invariants" => {
            let (lhs, rhs) = assignment(&rest)?;
            if !lhs.value.is_empty() {
                return Err(lhs.err("expected `invariants = <name> = <expr>, ...`"));
            }
            for item in nonempty_list(&rhs)? {
                let (name, e) = if item.value.contains('=') {
                    assignment(&item)?
                } else {
                    (item.clone(), item)
                };
                let name = ident(name, "an invariant name")?;
                if raw.invariants.iter().any(|(n, _)| n.value == name.value) {
                    return Err(name.err(format!("invariant `{}` given twice", name.value)));
                }
                raw.invariants.push((name, e));
            }
        }
        "integrals" => {
            let (lhs, rhs) = assignment(&rest)?;
            let tag = ident(lhs, "an integral tag")?;
            raw.integrals.push((tag, nonempty_list(&rhs)?));
        }
        "subconnection" => {
            once(raw.chains.is_some(), "subconnection")?;
            let (lhs, rhs) = assignment(&rest)?;
            let list = rhs
                .value
                .strip_prefix('<')
                .and_then(|v| v.strip_suffix('>'))
                .map(|v| trimmed(v, rhs.line, rhs.col + 1))
                .unwrap_or_else(|| rhs.clone());
            let ints = nonempty_list(&list)?
                .iter()
                .map(|i| number::<usize>(i, "a nonnegative integer"))
                .collect::<Result<Vec<_>, _>>()?;
            let chains = match lhs.value.as_str() {
                "kappa" => {
                    let kappa = GoursatSignature::new(ints).map_err(|e| rhs.err(e))?;
                    JetChains::from_signature(&kappa)
                }
                "sigma" => JetChains::from_orders(&ints).map_err(|e| rhs.err(e))?,
                other => return Err(lhs.err(format!("expected `kappa` or `sigma`, found `{other}`"))),
            };
            raw.chains = Some(Spanned {
                value: chains,
                line: rhs.line,
                col: rhs.col,
            });
        }
        "rho" => {
            once(raw.rho.is_some(), "rho")?;
            let (lhs, rhs) = assignment(&rest)?;
            if !lhs.value.is_empty() {
                return Err(lhs.err("expected `rho = <matrix>`"));
            }
            raw.rho = Some(Spanned {
                value: matrix(&rhs)?,
                line: rhs.line,
                col: rhs.col,
            });
        }
        "reduce" => {
            let words: Vec<&str> = rest.value.split_whitespace().collect();
            match words.as_slice() {
                ["drop", chain, "with", name] => {
                    let c = Spanned {
                        value: chain.to_string(),
                        line: rest.line,
                        col: rest.col,
                    };
                    let c = Spanned {
                        value: number::<usize>(&c, "a chain index")?,
                        line: c.line,
                        col: c.col,
                    };
                    if raw.reduce.iter().any(|(d, _)| d.value == c.value) {
                        return Err(c.err(format!("chain {} dropped twice", c.value)));
                    }
                    let n = ident(
                        Spanned {
                            value: name.to_string(),
                            line: rest.line,
                            col: rest.col,
                        },
                        "a function name",
                    )?;
                    raw.reduce.push((c, n));
                }
                _ => return Err(rest.err("expected `reduce drop <chain> with <name>`")),
            }
        }
        "decomposition" | "grid" | "eps0" => {
            let (lhs, rhs) = assignment(&rest)?;
            if !lhs.value.is_empty() {
                return Err(lhs.err(format!("expected `{kw} = ...`")));
            }
            let items = nonempty_list(&rhs)?;
            match kw {
                "decomposition" => {
                    once(!raw.decomposition.is_empty(), kw)?;
                    raw.decomposition = items;
                }
                "grid" => {
                    once(raw.grid.is_some(), kw)?;
                    raw.grid = Some(Spanned {
                        value: items,
                        line: rhs.line,
                        col: rhs.col,
                    });
                }
                _ => {
                    once(!raw.eps0.is_empty(), kw)?;
                    raw.eps0 = items;
                }
            }
        }
        k if k.len() > 1 && k.starts_with('p') && k[1..].chars().all(|c| c.is_ascii_digit()) => {
            let b: usize = k[1..].parse().map_err(|_| st.err("invalid index"))?;
            if b == 0 {
                return Err(st.err("drift components are numbered from p1"));
            }
            let (lhs, rhs) = assignment(&st)?;
            if raw.p.iter().any(|(i, _)| i.value == b) {
                return Err(lhs.err(format!("`{k}` given twice")));
            }
            raw.p.push((
                Spanned {
                    value: b,
                    line: lhs.line,
                    col: lhs.col,
                },
                rhs,
            ));
        }
        "" => return Err(st.err("expected a statement keyword")),
        other => return Err(st.err(format!("unknown statement `{other}`"))),
    }
    Ok(())
}

fn check_declared(f: &NormalForm, declared: &HashSet<&str>, at: &Spanned<String>) -> Result<(), DslError> {
    match f.free_vars().into_iter().find(|v| !declared.contains(v.as_str())) {
        Some(v) => Err(at.err(format!("undeclared variable `{v}`"))),
        None => Ok(()),
    }
}

impl SystemFile {
    /// Parse and validate the source of a system file.
    pub fn parse(src: &str) -> Result<SystemFile, DslError> {
        let mut raw = Raw::default();
        for (n, line) in src.lines().enumerate() {
            let code = line.split('#').next().unwrap_or("");
            let whole = Spanned {
                value: code.to_string(),
                line: n + 1,
                col: 1,
            };
            for st in split_top(&whole, ';') {
                if !st.value.is_empty() {
                    parse_statement(&mut raw, st)?;
                }
            }
        }
        SystemFile::validate(raw)
    }

    fn validate(raw: Raw) -> Result<SystemFile, DslError> {
        let top = DslError {
            line: 1,
            col: 1,
            msg: String::new(),
        };
        let name = raw
            .name
            .as_ref()
            .map(|n| n.value.clone())
            .ok_or_else(|| DslError {
                msg: "missing `system <name>`".into(),
                ..top.clone()
            })?;

        // Variable declarations.
        let time = raw.time.clone().map_or_else(|| "t".to_string(), |t| t.value);
        let mut seen: HashMap<String, &str> = HashMap::from([(time.clone(), "time")]);
        for (list, role) in [(&raw.states, "state"), (&raw.controls, "control")] {
            for v in list {
                if let Some(prev) = seen.insert(v.value.clone(), role) {
                    return Err(v.err(format!("duplicate variable `{}` (already declared as {prev})", v.value)));
                }
            }
        }
        let states: Vec<String> = raw.states.iter().map(|s| s.value.clone()).collect();
        let controls: Vec<String> = raw.controls.iter().map(|s| s.value.clone()).collect();
        let declared: HashSet<&str> = seen.keys().map(String::as_str).collect();

        let kind = match (raw.chains.is_some(), !raw.odes.is_empty(), !raw.pfaffs.is_empty()) {
            (true, false, false) => SystemKind::SubConnection,
            (false, true, false) => SystemKind::Control,
            (false, false, true) => SystemKind::Pfaffian,
            (false, false, false) => {
                return Err(DslError {
                    msg: "no `ode`, `pfaff` or `subconnection` statements".into(),
                    ..top
                })
            }
            _ => {
                let at = raw
                    .pfaffs
                    .first()
                    .map(|(n, _)| n)
                    .or(raw.odes.first().map(|(n, _)| n))
                    .expect("some statement");
                return Err(at.err("`ode`, `pfaff` and `subconnection` statements cannot be mixed"));
            }
        };
        if kind == SystemKind::SubConnection {
            if let Some(v) = raw.states.first().or(raw.controls.first()) {
                return Err(v.err("a sub-connection declares no states or controls; its coordinates are t, z<i>_<l>, eps<a>"));
            }
        } else if let Some((b, _)) = raw.p.first() {
            return Err(b.err("`p<b>` requires a `subconnection` statement"));
        } else if let Some(r) = &raw.rho {
            return Err(r.err("`rho` requires a `subconnection` statement"));
        }

        let chart = match kind {
            SystemKind::SubConnection => None,
            _ => {
                let s: Vec<&str> = states.iter().map(String::as_str).collect();
                let u: Vec<&str> = controls.iter().map(String::as_str).collect();
                if s.is_empty() {
                    return Err(DslError {
                        msg: "no states declared".into(),
                        ..top
                    });
                }
                Some(Chart::control(&time, &s, &u).map_err(|e| DslError {
                    msg: e.to_string(),
                    ..top.clone()
                })?)
            }
        };

        // Right-hand sides.
        let mut odes = Vec::new();
        if kind == SystemKind::Control {
            for (v, rhs) in &raw.odes {
                if !raw.states.iter().any(|s| s.value == v.value) {
                    return Err(v.err(format!("`{}` is not a declared state", v.value)));
                }
                check_declared(&expr(rhs)?, &declared, rhs)?;
            }
            for s in &raw.states {
                let (_, rhs) = raw
                    .odes
                    .iter()
                    .find(|(v, _)| v.value == s.value)
                    .ok_or_else(|| s.err(format!("no `ode {} = ...`", s.value)))?;
                odes.push(expr(rhs)?);
            }
        }
        let mut pfaffs = Vec::new();
        for (n, src) in &raw.pfaffs {
            let chart = chart.as_ref().expect("pfaffian systems have a chart");
            let f = OneForm::parse(chart, &src.value).map_err(|e| src.err(e))?;
            pfaffs.push((n.value.clone(), f));
        }

        // Symmetries, invariants, cross-section, integrals.
        let need_chart = |at: &Spanned<String>, what: &str| -> Result<&Chart, DslError> {
            chart
                .as_ref()
                .ok_or_else(|| at.err(format!("`{what}` needs a control or pfaffian system")))
        };
        let mut symmetries = Vec::new();
        for (n, src) in &raw.symmetries {
            let c = need_chart(n, "symmetry")?;
            let x = VectorField::parse(c, &src.value).map_err(|e| src.err(e))?;
            symmetries.push((n.value.clone(), x));
        }
        let mut invariants = Vec::new();
        for (n, src) in &raw.invariants {
            need_chart(n, "invariants")?;
            let f = expr(src)?;
            check_declared(&f, &declared, src)?;
            invariants.push((n.value.clone(), f));
        }
        let inv_names: HashSet<&str> = raw.invariants.iter().map(|(n, _)| n.value.as_str()).collect();
        let mut crosssection = Vec::new();
        for (n, src) in &raw.crosssection {
            need_chart(n, "crosssection")?;
            if !declared.contains(n.value.as_str()) {
                return Err(n.err(format!("`{}` is not a coordinate of the system", n.value)));
            }
            let f = expr(src)?;
            check_declared(&f, &inv_names, src)?;
            crosssection.push((n.value.clone(), f));
        }
        let mut integrals: Vec<(String, Vec<NormalForm>)> = Vec::new();
        for (tag, items) in &raw.integrals {
            let mut fs = Vec::new();
            for i in items {
                let f = expr(i)?;
                if chart.is_some() {
                    check_declared(&f, &declared, i)?;
                }
                fs.push(f);
            }
            match integrals.iter_mut().find(|(t, _)| *t == tag.value) {
                Some((_, existing)) => existing.extend(fs),
                None => integrals.push((tag.value.clone(), fs)),
            }
        }

        // Sub-connection.
        let subconnection = match &raw.chains {
            None => None,
            Some(chains) => {
                let mut p = raw.p.clone();
                p.sort_by_key(|(b, _)| b.value);
                for (k, (b, _)) in p.iter().enumerate() {
                    if b.value != k + 1 {
                        return Err(b.err(format!("drift components must be p1 ... p{}; p{} is missing", p.len(), k + 1)));
                    }
                }
                if p.is_empty() {
                    return Err(chains.err("a sub-connection needs at least one `p<b> = ...`"));
                }
                let pv = p.iter().map(|(_, s)| expr(s)).collect::<Result<Vec<_>, _>>()?;
                let r = pv.len();
                let rho = match &raw.rho {
                    None => (0..r)
                        .map(|b| (0..r).map(|a| NormalForm::int(i64::from(a == b))).collect())
                        .collect(),
                    Some(m) => m
                        .value
                        .iter()
                        .map(|row| row.iter().map(expr).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()?,
                };
                let decl = SubConnectionDecl {
                    chains: chains.value.clone(),
                    p: pv,
                    rho,
                };
                build_subconnection(&decl.chains, decl.p.clone(), decl.rho.clone(), &Ctx::default())
                    .map_err(|e| p[0].1.err(e))?;
                Some(decl)
            }
        };
        let mut reduce = BTreeMap::new();
        for (c, n) in &raw.reduce {
            let chains = raw
                .chains
                .as_ref()
                .ok_or_else(|| c.err("`reduce` needs a `subconnection` statement"))?;
            chains.value.require(c.value).map_err(|e| c.err(e))?;
            reduce.insert(c.value, n.value.clone());
        }
        if let Some(chains) = &raw.chains {
            let mut spec = ContactCurveSpec::new();
            for (c, n) in &reduce {
                spec = spec.drop_chain(*c, n);
            }
            spec.validate(&chains.value).map_err(|e| chains.err(e))?;
        }

        let mut flatfns = Vec::new();
        for (n, src) in &raw.flatfns {
            let f = expr(src)?;
            check_declared(&f, &HashSet::from([time.as_str()]), src)?;
            flatfns.push((n.value.clone(), f));
        }
        let decomposition = raw.decomposition.iter().map(expr).collect::<Result<Vec<_>, _>>()?;
        let grid = match &raw.grid {
            None => None,
            Some(g) => match g.value.as_slice() {
                [a, b, n] => Some((number(a, "a number")?, number(b, "a number")?, number(n, "a step count")?)),
                _ => return Err(g.err("expected `grid = <t0>, <t1>, <steps>`")),
            },
        };
        let eps0 = raw
            .eps0
            .iter()
            .map(|v| number::<f64>(v, "a number"))
            .collect::<Result<Vec<_>, _>>()?;

        Ok(SystemFile {
            name,
            kind,
            time,
            states,
            controls,
            odes,
            pfaffs,
            symmetries,
            invariants,
            crosssection,
            integrals,
            subconnection,
            reduce,
            flatfns,
            decomposition,
            grid,
            eps0,
            chart,
        })
    }

    /// The chart of a control or Pfaffian system.
    pub fn chart(&self) -> Option<&Chart> {
        self.chart.as_ref()
    }

    /// The control system of an `ode` file.
    pub fn control_system(&self) -> Option<ControlSystem> {
        match self.kind {
            SystemKind::Control => Some(
                ControlSystem::new(self.chart.as_ref().expect("control chart"), self.odes.clone())
                    .expect("validated on load"),
            ),
            _ => None,
        }
    }

    /// The Pfaffian system of a control or Pfaffian file, with independence
    /// condition `d<time>`.
    pub fn pfaffian(&self, ctx: &Ctx) -> Option<PfaffianSystem> {
        match self.kind {
            SystemKind::Control => self.control_system().map(|s| s.pfaffian(ctx)),
            SystemKind::Pfaffian => {
                let chart = self.chart.as_ref().expect("pfaffian chart");
                let forms: Vec<OneForm> = self.pfaffs.iter().map(|(_, f)| f.clone()).collect();
                let p = PfaffianSystem::new(chart, &forms, ctx).expect("same chart");
                let t = chart.time_index().expect("time coordinate");
                Some(p.clone().with_independence(OneForm::coordinate(chart, t)).unwrap_or(p))
            }
            SystemKind::SubConnection => None,
        }
    }

    /// The sub-connection of a `subconnection` file.
    pub fn subconnection(&self, ctx: &Ctx) -> Option<Result<ContactSubConnection, cascade::CascadeError>> {
        self.subconnection
            .as_ref()
            .map(|d| build_subconnection(&d.chains, d.p.clone(), d.rho.clone(), ctx))
    }

    /// The distribution `V` annihilating the system.
    pub fn distribution(&self, ctx: &Ctx) -> Result<Distribution, crate::CliError> {
        match self.kind {
            SystemKind::Control => Ok(self.control_system().expect("control").distribution(ctx)),
            SystemKind::Pfaffian => Ok(self.pfaffian(ctx).expect("pfaffian").annihilator()),
            SystemKind::SubConnection => Ok(self.subconnection(ctx).expect("subconnection")?.distribution().clone()),
        }
    }

    pub fn symmetry_algebra(&self) -> Result<SymmetryAlgebra, symmetry::SymmetryError> {
        SymmetryAlgebra::new(self.symmetries.iter().map(|(_, x)| x.clone()).collect())
    }

    pub fn quotient_data(&self) -> Result<QuotientData, symmetry::SymmetryError> {
        let chart = self
            .chart
            .as_ref()
            .ok_or_else(|| symmetry::SymmetryError::Input("quotients need a control or pfaffian system".into()))?;
        let inv: Vec<(&str, NormalForm)> = self.invariants.iter().map(|(n, f)| (n.as_str(), f.clone())).collect();
        let sec: Vec<(&str, NormalForm)> = self.crosssection.iter().map(|(n, f)| (n.as_str(), f.clone())).collect();
        QuotientData::new(chart, &inv, &sec)
    }

    /// First-integral candidates from the `integrals` statements.
    pub fn oracle(&self) -> FirstIntegralOracle {
        let mut o = FirstIntegralOracle::new();
        for (tag, fs) in &self.integrals {
            o.insert(tag, fs.clone());
        }
        o
    }

    /// Flat functions: `z<i>` names chain `i`, every other name a frozen
    /// function.
    pub fn flat_curves(&self) -> FlatCurves {
        let mut c = FlatCurves::new();
        for (n, f) in &self.flatfns {
            match n.strip_prefix('z').and_then(|i| i.parse::<usize>().ok()) {
                Some(i) => c = c.chain(i, f.clone()),
                None => c = c.function(n, f.clone()),
            }
        }
        c
    }

    /// The reconstruction grid, `[0, 1]` with 1000 steps by default.
    pub fn time_grid(&self) -> TimeGrid {
        let (a, b, n) = self.grid.unwrap_or((0.0, 1.0, 1000));
        TimeGrid::new(a, b, n)
    }
}
