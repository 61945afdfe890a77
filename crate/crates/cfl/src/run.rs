//! The analyses behind the `cfl` commands.

use std::fmt;
use std::str::FromStr;

use cascade::{
    jet_name, necessity_check, reconstruct_trajectory, reduce_along_curves, sufficiency_search, sufficiency_verify,
    truncated_euler, CascadeError, ContactCurveSpec, ContactSubConnection, SearchOutcome, SufficiencyVerdict,
};
use flags::analyze;
use geomcore::{kalman_rank, Ctx, Distribution};
use goursat::{esfl_conditions, procedure_contact, verify_contact_coordinates, GoursatError};
use num_traits::{One, Signed, Zero};
use symexpr::ProbeConfig;
use symmetry::{is_control_admissible, is_strongly_transverse, quotient_construct, quotient_verify, relative_goursat_check};

use crate::dsl::{SystemFile, SystemKind};
use crate::report::Report;
use crate::CliError;

/// Version of the report layout, written as the first machine field.
pub const REPORT_FORMAT: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Flags,
    Goursat,
    Esfl,
    Symmetry,
    Quotient,
    Subconnection,
    Reduce,
    Necessity,
    Sufficiency,
    Euler,
    Reconstruct,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Flags,
        Command::Goursat,
        Command::Esfl,
        Command::Symmetry,
        Command::Quotient,
        Command::Subconnection,
        Command::Reduce,
        Command::Necessity,
        Command::Sufficiency,
        Command::Euler,
        Command::Reconstruct,
    ];

    pub const NAMES: [&'static str; 11] = [
        "flags",
        "goursat",
        "esfl",
        "symmetry",
        "quotient",
        "subconnection",
        "reduce",
        "necessity",
        "sufficiency",
        "euler",
        "reconstruct",
    ];

    pub fn name(self) -> &'static str {
        Command::NAMES[Command::ALL.iter().position(|&c| c == self).expect("listed")]
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Command, CliError> {
        Command::NAMES
            .iter()
            .position(|&n| n == s)
            .map(|i| Command::ALL[i])
            .ok_or_else(|| CliError::UnknownCommand(s.to_string()))
    }
}

/// Per-invocation options.
#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    /// Chain frozen by a reduction.
    pub drop: Option<usize>,
    /// Name of the function the dropped chain is frozen to.
    pub with: Option<String>,
    /// Chain retained (sufficiency) or analysed (euler).
    pub chain: Option<usize>,
    pub seed: u64,
    pub probes: usize,
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            drop: None,
            with: None,
            chain: None,
            seed: 0,
            probes: 5,
            tol: 1e-9,
        }
    }
}

impl Options {
    pub fn ctx(&self) -> Ctx {
        Ctx::new(ProbeConfig {
            seed: self.seed,
            probes: self.probes,
            tol: self.tol,
            ..ProbeConfig::default()
        })
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn key(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

fn status(r: &mut Report, decided: bool) {
    r.field("status", if decided { "decided" } else { "undecided" });
}

/// Run one analysis on a loaded file.
pub fn run(cmd: Command, file: &SystemFile, opts: &Options) -> Result<Report, CliError> {
    if opts.probes == 0 {
        return Err(CliError::Option("--probes must be positive".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(CliError::Option("--tol must be positive".into()));
    }
    let ctx = opts.ctx();
    let mut r = Report::new();
    r.field("cfl-report", REPORT_FORMAT)
        .field("command", cmd)
        .field("system", &file.name)
        .field("kind", file.kind)
        .field("seed", opts.seed)
        .field("probes", opts.probes)
        .field("tol", format!("{:e}", opts.tol));
    match cmd {
        Command::Flags => flags_cmd(file, &ctx, &mut r)?,
        Command::Goursat => goursat_cmd(file, &ctx, &mut r)?,
        Command::Esfl => esfl_cmd(file, &ctx, &mut r)?,
        Command::Symmetry => symmetry_cmd(file, &ctx, &mut r)?,
        Command::Quotient => quotient_cmd(file, &ctx, &mut r)?,
        Command::Subconnection => subconnection_cmd(file, &ctx, &mut r)?,
        Command::Reduce => reduce_cmd(file, opts, &ctx, &mut r)?,
        Command::Necessity => necessity_cmd(file, opts, &ctx, &mut r)?,
        Command::Sufficiency => sufficiency_cmd(file, opts, &ctx, &mut r)?,
        Command::Euler => euler_cmd(file, opts, &ctx, &mut r)?,
        Command::Reconstruct => reconstruct_cmd(file, opts, &ctx, &mut r)?,
    }
    Ok(r)
}

/// The distribution to classify: control directions carry the control
/// role (for sub-connections, the top jets).
fn control_distribution(file: &SystemFile, ctx: &Ctx) -> Result<Distribution, CliError> {
    match file.kind {
        SystemKind::SubConnection => Ok(subconnection(file, ctx)?.control_distribution()?),
        _ => file.distribution(ctx),
    }
}

fn subconnection(file: &SystemFile, ctx: &Ctx) -> Result<ContactSubConnection, CliError> {
    file.subconnection(ctx)
        .ok_or_else(|| CliError::Missing("this command needs a `subconnection` statement".into()))?
        .map_err(CliError::from)
}

fn classify(v: &Distribution, r: &mut Report) -> Result<bool, CliError> {
    let a = analyze(v)?;
    r.field("rdt", &a.rdt)
        .field("derived_length", a.derived_length())
        .field("ranks", join(&a.ranks()))
        .field("cauchy_ranks", join(&a.rdt.chars()))
        .field("reseeded", yes_no(a.reseeded));
    Ok(!a.undecided)
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn flags_cmd(file: &SystemFile, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    if let Some(s) = file.control_system() {
        r.field("states", s.num_states()).field("controls", s.num_controls());
    }
    let v = file.distribution(ctx)?;
    r.field("rank_v", v.rank());
    let decided = classify(&v, r)?;
    if let Some((a, b)) = file.control_system().and_then(|s| s.linear_matrices()) {
        let k = kalman_rank(&a, &b)?;
        r.field("linear", "true")
            .field("kalman_rank", k)
            .field("controllable", yes_no(k == a.len()));
    }
    status(r, decided && !v.undecided());
    Ok(())
}

fn put_verdict(r: &mut Report, v: &goursat::GoursatVerdict) {
    r.field("rdt", &v.analysis.rdt);
    r.field("goursat", yes_no(v.is_goursat()));
    match &v.signature {
        Ok(s) => r.field("signature", s),
        Err(e) => r.field("signature", format!("none ({e})")),
    };
    r.block("conditions", |b| {
        for c in &v.conditions {
            b.field(key(c.name), format!("{} ({})", c.status, c.detail));
        }
    });
}

fn goursat_cmd(file: &SystemFile, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let v = control_distribution(file, ctx)?;
    let (verdict, _) = esfl_conditions(&v)?;
    put_verdict(r, &verdict);
    if verdict.is_goursat() {
        match procedure_contact(&v, &file.oracle()) {
            Ok(c) => {
                let check = verify_contact_coordinates(&v, &c);
                r.block("contact", |b| {
                    b.field("procedure", format!("{:?}", c.procedure));
                    b.field("x", &c.x);
                    for (i, chain) in c.chains.iter().enumerate() {
                        for (s, f) in chain.coords.iter().enumerate() {
                            b.field(format!("z{}_{s}", i + 1), f);
                        }
                    }
                    b.field("verified", yes_no(check.holds()));
                    for f in &check.failures {
                        b.field("failure", f);
                    }
                });
            }
            Err(e @ GoursatError::MissingIntegrals { .. }) if file.integrals.is_empty() => {
                r.field("contact", format!("not computed: {e}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    status(r, !verdict.analysis.undecided);
    Ok(())
}

fn esfl_cmd(file: &SystemFile, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let v = control_distribution(file, ctx)?;
    let (verdict, e) = esfl_conditions(&v)?;
    put_verdict(r, &verdict);
    r.field("controls_condition", format!("{} ({})", e.controls.status, e.controls.detail))
        .field("time_condition", format!("{} ({})", e.time.status, e.time.detail))
        .field("esfl", yes_no(e.esfl));
    status(r, !verdict.analysis.undecided);
    Ok(())
}

fn brackets(file: &SystemFile, table: &symmetry::StructureConstants) -> Vec<String> {
    let names: Vec<&str> = file.symmetries.iter().map(|(n, _)| n.as_str()).collect();
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let terms: Vec<String> = table[i][j]
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| {
                    if c.is_one() {
                        format!("+ {}", names[k])
                    } else if (-c).is_one() {
                        format!("- {}", names[k])
                    } else if c.is_negative() {
                        format!("- {}*{}", -c, names[k])
                    } else {
                        format!("+ {c}*{}", names[k])
                    }
                })
                .collect();
            let rhs = if terms.is_empty() {
                "0".to_string()
            } else {
                let s = terms.join(" ");
                s.strip_prefix("+ ").map_or(s.clone(), str::to_string)
            };
            out.push(format!("[{}, {}] = {rhs}", names[i], names[j]));
        }
    }
    out
}

fn symmetry_cmd(file: &SystemFile, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    if file.symmetries.is_empty() {
        return Err(CliError::Missing("no `symmetry <name> = ...` statements".into()));
    }
    let p = file
        .pfaffian(ctx)
        .ok_or_else(|| CliError::Missing("symmetries need a control or pfaffian system".into()))?;
    let gamma = file.symmetry_algebra()?;
    let table = gamma.verify_closure(ctx)?;
    r.field("dim", gamma.dim());
    r.block("brackets", |b| {
        for l in brackets(file, &table) {
            b.field("bracket", l);
        }
    });
    let adm = is_control_admissible(&gamma, &p)?;
    r.field("control_admissible", yes_no(adm.admissible()));
    r.block("admissibility", |b| {
        for (name, ok) in adm.items() {
            b.field("item", format!("{}: {name}", if ok { "pass" } else { "fail" }));
        }
    });
    r.field("strongly_transverse", yes_no(is_strongly_transverse(&gamma, &p)?));
    let v = file.distribution(ctx)?;
    let rel = relative_goursat_check(&v, &gamma)?;
    r.field("extended_rdt", &rel.goursat.analysis.rdt);
    match rel.goursat.signature() {
        Some(s) => r.field("signature", s),
        None => r.field("signature", "none"),
    };
    r.field("outcome", rel.outcome);
    for d in &rel.detail {
        r.field("reason", d);
    }
    status(r, !rel.goursat.analysis.undecided);
    Ok(())
}

fn quotient_cmd(file: &SystemFile, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    if file.symmetries.is_empty() || file.invariants.is_empty() {
        return Err(CliError::Missing(
            "a quotient needs `symmetry`, `invariants` and `crosssection` statements".into(),
        ));
    }
    let p = file
        .pfaffian(ctx)
        .ok_or_else(|| CliError::Missing("quotients need a control or pfaffian system".into()))?;
    let gamma = file.symmetry_algebra()?;
    let data = file.quotient_data()?;
    let q = quotient_construct(&p, &gamma, &data)?;
    let check = quotient_verify(&p, &data, &q.system)?;
    r.field("verified", yes_no(check.holds()))
        .field("rank", check.rank)
        .field("expected_rank", check.expected_rank);
    for f in &check.failures {
        r.field("failure", f);
    }
    let cs = q.control_system().ok();
    r.block("quotient", |b| {
        let chart = data.chart();
        if let Some(t) = chart.time_name() {
            b.field("time", t);
        }
        match &cs {
            Some(cs) => {
                let states = cs.names_with(geomcore::Role::State);
                b.field("states", states.join(", "));
                b.field("controls", cs.names_with(geomcore::Role::Control).join(", "));
                for (s, f) in states.iter().zip(cs.rhs()) {
                    b.field(format!("ode_{s}"), f);
                }
            }
            None => {
                for (i, f) in q.system.forms().iter().enumerate() {
                    b.field(format!("theta{}", i + 1), f);
                }
            }
        }
    });
    let (direct, direct_esfl) = esfl_conditions(&q.distribution)?;
    r.field("quotient_rdt", &direct.analysis.rdt);
    match direct.signature() {
        Some(s) => r.field("quotient_signature", s),
        None => r.field("quotient_signature", "none"),
    };
    r.field("quotient_esfl", yes_no(direct_esfl.esfl));
    let v = file.distribution(ctx)?;
    let rel = relative_goursat_check(&v, &gamma)?;
    let rel_esfl = rel.outcome == symmetry::QuotientOutcome::Esfl;
    r.field("relative_outcome", rel.outcome)
        .field("agree", yes_no(rel_esfl == direct_esfl.esfl));
    status(r, !direct.analysis.undecided && !rel.goursat.analysis.undecided);
    Ok(())
}

fn put_subconnection(c: &ContactSubConnection, r: &mut Report) {
    r.field("chains", c.chains()).field("group_dim", c.group_dim());
    for (i, f) in c.frozen() {
        r.field(format!("frozen_{i}"), format!("z{i} = {}(t) (order {})", f.1, f.0));
    }
    r.block("drift", |b| {
        for (k, p) in c.p().iter().enumerate() {
            b.field(format!("p{}", k + 1), p);
        }
        for a in 0..c.group_dim() {
            b.field(format!("rate_eps{}", a + 1), c.rate(a));
        }
    });
}

fn classify_subconnection(c: &ContactSubConnection, r: &mut Report) -> Result<bool, CliError> {
    let decided = classify(c.distribution(), r)?;
    let v = c.control_distribution()?;
    let (g, e) = esfl_conditions(&v)?;
    r.field("goursat", yes_no(g.is_goursat()));
    match g.signature() {
        Some(s) => r.field("signature", s),
        None => r.field("signature", "none"),
    };
    r.field("time_condition", format!("{} ({})", e.time.status, e.time.detail))
        .field("esfl", yes_no(e.esfl));
    Ok(decided && !g.analysis.undecided)
}

fn subconnection_cmd(file: &SystemFile, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let c = subconnection(file, ctx)?;
    put_subconnection(&c, r);
    r.field("dim", c.chart().dim());
    let decided = classify_subconnection(&c, r)?;
    status(r, decided);
    Ok(())
}

/// The reduction requested by `--drop/--with`, else by the file.
fn curve_spec(file: &SystemFile, opts: &Options) -> Result<ContactCurveSpec, CliError> {
    match (opts.drop, &opts.with) {
        (Some(c), Some(n)) => Ok(ContactCurveSpec::new().drop_chain(c, n)),
        (Some(c), None) => match file.reduce.get(&c) {
            Some(n) => Ok(ContactCurveSpec::new().drop_chain(c, n)),
            None => Err(CliError::Option(format!(
                "--drop {c} needs --with NAME (no `reduce drop {c} with ...` in the file)"
            ))),
        },
        (None, Some(_)) => Err(CliError::Option("--with needs --drop".into())),
        (None, None) if !file.reduce.is_empty() => Ok(file
            .reduce
            .iter()
            .fold(ContactCurveSpec::new(), |s, (c, n)| s.drop_chain(*c, n))),
        (None, None) => Err(CliError::Missing(
            "no reduction: pass --drop N --with NAME or add `reduce drop <chain> with <name>`".into(),
        )),
    }
}

fn put_spec(spec: &ContactCurveSpec, c: &ContactSubConnection, r: &mut Report) -> Result<(), CliError> {
    for (i, n) in spec.dropped() {
        r.field("drop", format!("chain {i} -> {n}(t)"));
    }
    r.field("codimension", spec.codimension(c.chains())?);
    Ok(())
}

fn reduce_cmd(file: &SystemFile, opts: &Options, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let c = subconnection(file, ctx)?;
    let spec = curve_spec(file, opts)?;
    put_spec(&spec, &c, r)?;
    let red = reduce_along_curves(&c, &spec)?;
    r.field("dim", red.chart().dim());
    put_subconnection(&red, r);
    let decided = classify_subconnection(&red, r)?;
    status(r, decided);
    Ok(())
}

fn necessity_cmd(file: &SystemFile, opts: &Options, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let c = subconnection(file, ctx)?;
    let spec = curve_spec(file, opts)?;
    put_spec(&spec, &c, r)?;
    let v = necessity_check(&c, &spec, ctx)?;
    r.field("chain", v.chain)
        .field("sigma", v.sigma)
        .field("reduced_p", &v.reduced_p)
        .field(format!("E{}", v.sigma), &v.euler)
        .field("passed", yes_no(v.passed()))
        .field("verdict", &v);
    status(r, true);
    Ok(())
}

/// The reduction for a sufficiency check: `--chain N` keeps chain `N` and
/// drops every other one, named by `--with` (one dropped chain) or the
/// file's `reduce` statements.
fn sufficiency_spec(file: &SystemFile, opts: &Options, c: &ContactSubConnection) -> Result<ContactCurveSpec, CliError> {
    let Some(keep) = opts.chain else {
        return curve_spec(file, opts);
    };
    c.chains().require(keep)?;
    let others: Vec<usize> = c.chains().chains().iter().map(|&(i, _)| i).filter(|&i| i != keep).collect();
    let mut spec = ContactCurveSpec::new();
    for i in others.iter().copied() {
        let name = if others.len() == 1 && opts.with.is_some() {
            opts.with.clone().expect("checked")
        } else {
            file.reduce.get(&i).cloned().ok_or_else(|| {
                CliError::Option(format!(
                    "no function name for chain {i}: add `reduce drop {i} with <name>` or pass --with NAME"
                ))
            })?
        };
        spec = spec.drop_chain(i, &name);
    }
    Ok(spec)
}

fn put_sufficiency(v: &SufficiencyVerdict, r: &mut Report) {
    r.field("verdict", "PASS").field("chain", v.chain);
    r.block("decomposition", |b| {
        for (l, a) in v.decomposition.iter().enumerate() {
            b.field(format!("A{l}"), a);
        }
    });
    r.field(format!("Q{}", v.q.sigma + 1), v.q.last())
        .field("side_condition", format!("{} != 0", v.side_condition));
    if let Some(e) = v.pipeline_esfl {
        r.field("pipeline_esfl", yes_no(e));
    }
}

fn sufficiency_cmd(file: &SystemFile, opts: &Options, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let c = subconnection(file, ctx)?;
    let spec = sufficiency_spec(file, opts, &c)?;
    put_spec(&spec, &c, r)?;
    if !file.decomposition.is_empty() {
        r.field("method", "verify");
        match sufficiency_verify(&c, &spec, &file.decomposition, true, ctx) {
            Ok(v) => put_sufficiency(&v, r),
            Err(CascadeError::Decomposition { counterexample, reason }) => {
                r.field("verdict", "FAIL")
                    .field("reason", reason)
                    .field("counterexample", counterexample);
            }
            Err(e) => return Err(e.into()),
        }
        status(r, true);
        return Ok(());
    }
    r.field("method", "search");
    match sufficiency_search(&c, &spec, None, ctx)? {
        SearchOutcome::Found(v) => {
            put_sufficiency(&v, r);
            status(r, true);
        }
        SearchOutcome::Impossible(n) => {
            r.field("verdict", "FAIL").field("necessity", &n);
            status(r, true);
        }
        SearchOutcome::Inconclusive(why) => {
            r.field("verdict", "INCONCLUSIVE").field("reason", why);
            status(r, false);
        }
    }
    Ok(())
}

fn euler_cmd(file: &SystemFile, opts: &Options, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let mut c = subconnection(file, ctx)?;
    if opts.drop.is_some() || !file.reduce.is_empty() {
        let spec = curve_spec(file, opts)?;
        put_spec(&spec, &c, r)?;
        c = reduce_along_curves(&c, &spec)?;
    }
    let chain = match opts.chain {
        Some(i) => i,
        None => c
            .chains()
            .chains()
            .first()
            .map(|&(i, _)| i)
            .ok_or_else(|| CliError::Missing("no retained chain".into()))?,
    };
    let sigma = c.chains().require(chain)?;
    r.field("chain", chain).field("sigma", sigma);
    let mut top_depends = Vec::new();
    r.block("euler", |b| {
        for (k, p) in c.p().iter().enumerate() {
            for tau in 0..=sigma {
                let e = truncated_euler(p, tau, chain, c.chains()).expect("tau <= sigma");
                if tau == sigma {
                    let deps: Vec<String> = (1..=sigma)
                        .map(|l| jet_name(chain, l))
                        .filter(|v| e.depends_on(v))
                        .collect();
                    top_depends.push((k + 1, deps));
                }
                b.field(format!("E{tau}_p{}", k + 1), e);
            }
        }
    });
    for (k, deps) in top_depends {
        let d = if deps.is_empty() { "none".to_string() } else { deps.join(", ") };
        r.field(format!("E{sigma}_p{k}_depends_on"), d);
    }
    status(r, true);
    Ok(())
}

fn reconstruct_cmd(file: &SystemFile, opts: &Options, ctx: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let mut c = subconnection(file, ctx)?;
    if opts.drop.is_some() || !file.reduce.is_empty() {
        let spec = curve_spec(file, opts)?;
        put_spec(&spec, &c, r)?;
        c = reduce_along_curves(&c, &spec)?;
    }
    let grid = file.time_grid();
    let eps0 = if file.eps0.is_empty() {
        vec![0.0; c.group_dim()]
    } else {
        file.eps0.clone()
    };
    let tr = reconstruct_trajectory(&c, &file.flat_curves(), &grid, &eps0)?;
    r.field("t0", grid.t0)
        .field("t1", grid.t1)
        .field("steps", grid.steps)
        .field("h", format!("{:e}", grid.step()))
        .field("residual", format!("{:.3e}", tr.residual))
        .field("confirmed", yes_no(tr.confirmed));
    let stride = (grid.steps / 10).max(1);
    r.block("samples", |b| {
        for n in (0..tr.t.len()).filter(|n| n % stride == 0 || *n + 1 == tr.t.len()) {
            let eps: Vec<String> = tr.eps[n].iter().map(|v| format!("{v:.12e}")).collect();
            b.field("point", format!("t = {:.6}; eps = {}", tr.t[n], eps.join(", ")));
        }
    });
    status(r, tr.confirmed);
    Ok(())
}
