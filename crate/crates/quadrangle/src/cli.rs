//! Command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::checks::quadrangle_checks;
use crate::divergence::{
    divergence_quadrangle, family_eval_envelope, DivergenceFn, StochasticDivergenceJ, PHI_NAMES,
};
use crate::dual::{dual_axiom_check, envelope_extract, DualKind, Envelope, Shape};
use crate::error::{QuadError, Result};
use crate::io::{num, nums, read_dataset_csv, read_rv_csv, read_scenarios_csv, stable, RunSpec};
use crate::measures::{Family, FAMILY_NAMES};
use crate::quartet::Quartet;
use crate::regression::{fit_linear_with, regression_equivalence_check, track_statistic};
use crate::robust::{
    cvar_portfolio_lp, dro_solve, epi_dual, epi_primal, portfolio_optimize, DroProblem, EpiSpec, Kernel,
    PortfolioRisk,
};
use crate::rv::{DiscreteRv, StatInterval};
use crate::sampling::random_batch;
use crate::solvers::Budget;

#[derive(Parser, Debug)]
#[command(name = "quadrangle", version, about = "Risk quadrangle calculus on discrete random variables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Agreement tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iterations per phase of the multivariate solvers.
    #[arg(long = "max-iter", global = true, default_value_t = 3000)]
    pub max_iter: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SpecArgs {
    /// JSON spec `{family|phi, params, tau?, epsilon?}`; flags override it.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

impl SpecArgs {
    pub fn resolve(&self) -> Result<RunSpec> {
        let mut s = match &self.spec {
            Some(p) => RunSpec::read(p)?,
            None => RunSpec::default(),
        };
        if self.family.is_some() {
            s.family.clone_from(&self.family);
            s.phi = None;
        }
        if self.phi.is_some() {
            s.phi.clone_from(&self.phi);
            s.family = None;
        }
        for (k, v) in [
            ("alpha", self.alpha),
            ("q", self.q),
            ("k", self.k),
            ("eps", self.eps),
            ("lambda", self.lambda),
            ("x", self.x),
            ("beta", self.beta),
        ] {
            if let Some(v) = v {
                s.params.insert(k.into(), v);
            }
        }
        if self.tau.is_some() {
            s.tau = self.tau;
        }
        if self.epsilon.is_some() {
            s.epsilon = self.epsilon;
        }
        Ok(s)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// All five quadrangle members of a random variable.
    Eval {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Statistic interval of a random variable.
    Statistic {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Dual envelope report with sampled clause checks.
    Envelope {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value = "risk")]
        kind: String,
        /// Optional random variable whose support value is reported.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Sweep of the divergence-ball family over radii.
    Family {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e6])]
        taus: Vec<f64>,
    },
    /// Linear regression with a family's error.
    Regress {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Minimum-risk portfolio over the simplex.
    Portfolio {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "target-mean")]
        target_mean: Option<f64>,
    },
    /// Distributionally robust portfolio over a divergence ball.
    Dro {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "target-mean")]
        target_mean: Option<f64>,
    },
    /// Epi-regularized risk over a sweep of smoothing parameters.
    Epi {
        #[command(flatten)]
        spec: SpecArgs,
        /// Kernel regret: a phi name or `mean_l2`.
        #[arg(long, default_value = "kl")]
        kernel: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
        epsilons: Vec<f64>,
    },
    /// Invariant suite on one spec, or on the whole catalog.
    Check {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

/// Outcome of a command: the report and the process exit code.
pub struct Outcome {
    pub report: Value,
    pub code: i32,
}

fn budget(cli: &Cli) -> Budget {
    Budget { iters: cli.max_iter, seed: cli.seed }
}

fn lookup(spec: &RunSpec) -> impl Fn(&str) -> Option<f64> + '_ {
    move |k| spec.param(k)
}

fn family_of(spec: &RunSpec) -> Result<Family> {
    let name = spec.family.as_deref().ok_or_else(|| QuadError::Invalid("a family is required".into()))?;
    Family::from_name(name, &lookup(spec))
}

fn phi_of(spec: &RunSpec) -> Result<DivergenceFn> {
    let name = spec.phi.as_deref().ok_or_else(|| QuadError::Invalid("a phi is required".into()))?;
    DivergenceFn::named(name, spec.param("q"))
}

fn radius(spec: &RunSpec) -> Result<f64> {
    spec.tau
        .or(spec.param("beta"))
        .ok_or_else(|| QuadError::param("tau", "a radius is required (--tau or --beta)"))
}

/// Quartet named by the spec, with the family's error when there is one.
fn quartet_of(spec: &RunSpec) -> Result<(Quartet, Value)> {
    if spec.family.is_some() {
        let f = family_of(spec)?;
        Ok((f.quartet()?, serde_json::to_value(f).map(stable).unwrap_or(Value::Null)))
    } else if spec.phi.is_some() {
        let phi = phi_of(spec)?;
        let beta = radius(spec)?;
        Ok((divergence_quadrangle(&phi, beta)?, json!({"phi": phi.name, "beta": num(beta)})))
    } else {
        Err(QuadError::Invalid("spec needs a family or a phi".into()))
    }
}

fn interval(s: &StatInterval) -> Value {
    json!([num(s.lo), num(s.hi)])
}

fn rv_summary(x: &DiscreteRv, rows: usize, delta: f64) -> Value {
    json!({"rows": rows, "atoms": x.len(), "mean": num(x.expectation()), "prob_delta": num(delta)})
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let ok = |report: Value| Ok(Outcome { report, code: 0 });
    match &cli.command {
        Command::Eval { spec, input } => {
            let spec = spec.resolve()?;
            let (q, params) = quartet_of(&spec)?;
            let ing = read_rv_csv(input)?;
            let v = q.evaluate(&ing.rv)?;
            ok(json!({
                "command": "eval",
                "quadrangle": q.label,
                "spec": params,
                "input": rv_summary(&ing.rv, ing.rows, ing.delta),
                "risk": num(v.risk),
                "deviation": num(v.deviation),
                "regret": num(v.regret),
                "error": num(v.error),
                "statistic": interval(&v.statistic),
            }))
        }
        Command::Statistic { spec, input } => {
            let spec = spec.resolve()?;
            let (q, params) = quartet_of(&spec)?;
            let ing = read_rv_csv(input)?;
            q.check_domain(&ing.rv)?;
            ok(json!({
                "command": "statistic",
                "quadrangle": q.label,
                "spec": params,
                "statistic": interval(&q.statistic(&ing.rv)),
            }))
        }
        Command::Envelope { spec, kind, input, samples } => {
            let spec = spec.resolve()?;
            let f = family_of(&spec)?;
            let kind = DualKind::parse(kind)?;
            let env = envelope_extract(&f, kind)?;
            let report = dual_axiom_check(&env, kind, 4, *samples, cli.seed);
            let mut out = json!({
                "command": "envelope",
                "envelope": env.label,
                "polyhedral": env.is_polyhedral(),
                "clauses": report.clauses.iter().map(|c| json!({"clause": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
                "all_pass": report.all_pass(),
            });
            if let Some(path) = input {
                let x = read_rv_csv(path)?.rv;
                let s = env.support(&x)?;
                let q = f.quartet()?;
                let primal = match kind {
                    DualKind::Risk => q.risk(&x),
                    DualKind::Deviation => q.deviation(&x),
                    DualKind::Regret => q.regret(&x),
                    DualKind::Error => q.error(&x),
                };
                out["support"] = json!({
                    "value": num(s.value),
                    "primal": num(primal),
                    "method": s.method,
                    "density": s.density.as_deref().map(nums),
                });
            }
            let code = if report.all_pass() { 0 } else { 1 };
            Ok(Outcome { report: out, code })
        }
        Command::Family { spec, input, taus } => {
            let spec = spec.resolve()?;
            let phi = phi_of(&spec)?;
            let x = read_rv_csv(input)?.rv;
            let j = StochasticDivergenceJ::from_phi(phi.clone(), true);
            let mut rows = Vec::new();
            for &tau in taus {
                let env = family_eval_envelope(&j, tau, &x)?;
                let closed = divergence_quadrangle(&phi, tau).map(|q| num(q.risk(&x))).unwrap_or(Value::Null);
                rows.push(json!({"tau": num(tau), "envelope": num(env.value), "closed_form": closed}));
            }
            ok(json!({
                "command": "family",
                "phi": phi.name,
                "mean": num(x.expectation()),
                "ess_sup": num(x.ess_sup()),
                "sweep": rows,
            }))
        }
        Command::Regress { spec, input } => {
            let spec = spec.resolve()?;
            let tol = cli.tol.unwrap_or(1e-6);
            let f = match spec.family.as_deref() {
                Some("svr") => Family::Qsau {
                    eps: spec.param("eps").ok_or_else(|| QuadError::param("eps", "svr needs eps"))?,
                },
                _ => family_of(&spec)?,
            };
            let data = read_dataset_csv(input)?;
            let err = f.error_fn()?;
            let q = f.quartet()?;
            let fit = fit_linear_with(&err, &data, &budget(cli))?;
            let eq = regression_equivalence_check(&q, &err, &data)?;
            let tracks = track_statistic(&fit, &q);
            let code = if eq.gap <= tol && tracks { 0 } else { 2 };
            Ok(Outcome {
                report: json!({
                    "command": "regress",
                    "family": f.name(),
                    "rows": data.rows(),
                    "intercept": num(fit.intercept),
                    "coefficients": nums(&fit.coefficients),
                    "objective": num(fit.objective),
                    "method": fit.method,
                    "residual_statistic": interval(&fit.statistic),
                    "non_unique": fit.non_unique,
                    "tracking": tracks,
                    "deviation_objective": num(eq.deviation_objective),
                    "equivalence_gap": num(eq.gap),
                    "tol": num(tol),
                }),
                code,
            })
        }
        Command::Portfolio { spec, input, target_mean } => {
            let spec = spec.resolve()?;
            let s = read_scenarios_csv(input)?;
            let res = match (spec.family.as_deref(), spec.phi.as_deref()) {
                (Some("quantile"), _) => cvar_portfolio_lp(family_alpha(&spec)?, &s, *target_mean)?,
                _ => {
                    let (q, _) = quartet_of(&spec)?;
                    portfolio_optimize(&PortfolioRisk::Regret(q), &s, *target_mean, &budget(cli))?
                }
            };
            ok(json!({
                "command": "portfolio",
                "weights": nums(&res.weights),
                "risk": num(res.risk),
                "method": res.method,
                "target_mean": target_mean.map(num),
            }))
        }
        Command::Dro { spec, input, target_mean } => {
            let spec = spec.resolve()?;
            let tol = cli.tol.unwrap_or(1e-4);
            let p = DroProblem {
                scenarios: read_scenarios_csv(input)?,
                phi: phi_of(&spec)?,
                tau: radius(&spec)?,
                target_mean: *target_mean,
                budget: budget(cli),
            };
            let r = dro_solve(&p)?;
            let code = if r.gap <= tol { 0 } else { 2 };
            Ok(Outcome {
                report: json!({
                    "command": "dro",
                    "phi": p.phi.name,
                    "tau": num(p.tau),
                    "weights": nums(&r.weights),
                    "threshold": num(r.threshold),
                    "regret_form": num(r.value),
                    "envelope_form": num(r.envelope_value),
                    "gap": num(r.gap),
                    "density": nums(&r.density),
                    "approximate": r.approximate,
                    "tol": num(tol),
                }),
                code,
            })
        }
        Command::Epi { spec, kernel, input, epsilons } => {
            let spec = spec.resolve()?;
            let tol = cli.tol.unwrap_or(1e-4);
            let f = family_of(&spec)?;
            let base = envelope_extract(&f, DualKind::Risk)?;
            let kernel = match kernel.as_str() {
                "mean_l2" => Kernel::Envelope(Envelope::new(
                    "mean_l2",
                    DualKind::Regret,
                    Shape::Ball { center: 1.0, radius: 1.0, mean: None },
                )),
                name => Kernel::Phi(DivergenceFn::named(name, spec.param("q"))?),
            };
            let x = read_rv_csv(input)?.rv;
            let q = f.quartet()?;
            let mut eps_list = epsilons.clone();
            if let Some(e) = spec.epsilon {
                eps_list = vec![e];
            }
            let mut rows = Vec::new();
            let mut code = 0;
            for eps in eps_list {
                let mut es = EpiSpec::new(base.clone(), kernel.clone(), eps)?;
                es.budget = budget(cli);
                let p = epi_primal(&es, &x);
                let (d, gap) = match epi_dual(&es, &x) {
                    Ok(d) => (num(d.value), (d.value - p.value).abs()),
                    Err(_) => (Value::Null, 0.0),
                };
                if gap > tol {
                    code = 2;
                }
                rows.push(json!({"epsilon": num(eps), "primal": num(p.value), "dual": d, "gap": num(gap)}));
            }
            Ok(Outcome {
                report: json!({
                    "command": "epi",
                    "base": base.label,
                    "mean": num(x.expectation()),
                    "risk": num(q.risk(&x)),
                    "sweep": rows,
                    "tol": num(tol),
                }),
                code,
            })
        }
        Command::Check { spec, samples } => {
            let spec = spec.resolve()?;
            let rvs = random_batch(cli.seed, *samples, 8, -5.0, 5.0);
            let mut targets: Vec<(Quartet, Option<crate::constructions::ErrorFn>)> = Vec::new();
            if spec.family.is_none() && spec.phi.is_none() {
                for name in FAMILY_NAMES {
                    let f = Family::defaults().into_iter().find(|f| f.name() == name).expect("default exists");
                    targets.push((f.quartet()?, Some(f.error_fn()?)));
                }
                for name in PHI_NAMES {
                    let phi = DivergenceFn::named(name, Some(0.7))?;
                    targets.push((divergence_quadrangle(&phi, 0.5)?, None));
                }
            } else if spec.family.is_some() {
                let f = family_of(&spec)?;
                targets.push((f.quartet()?, Some(f.error_fn()?)));
            } else {
                targets.push((quartet_of(&spec)?.0, None));
            }
            let mut rows = Vec::new();
            let mut all = true;
            for (q, err) in &targets {
                for r in quadrangle_checks(q, err.as_ref(), &rvs) {
                    all &= r.pass;
                    rows.push(json!({
                        "quadrangle": q.label,
                        "check": r.name,
                        "worst": num(r.worst),
                        "tol": num(r.tol),
                        "samples": r.samples,
                        "pass": r.pass,
                    }));
                }
            }
            Ok(Outcome {
                report: json!({"command": "check", "results": rows, "all_pass": all}),
                code: if all { 0 } else { 1 },
            })
        }
    }
}

fn family_alpha(spec: &RunSpec) -> Result<f64> {
    match family_of(spec)? {
        Family::Quantile { alpha } => Ok(alpha),
        other => Err(QuadError::Invalid(format!("{} is not a CVaR family", other.name()))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(a) => format!("[{}]", a.iter().map(scalar_text).collect::<Vec<_>>().join(", ")),
        Value::Object(_) => v.to_string(),
        other => other.to_string(),
    }
}

fn render_rows(key: &str, rows: &[Map<String, Value>], out: &mut String) {
    let mut cols: Vec<&String> = rows.iter().flat_map(|r| r.keys()).collect();
    cols.sort();
    cols.dedup();
    let cells: Vec<Vec<String>> =
        rows.iter().map(|r| cols.iter().map(|c| r.get(*c).map_or("-".into(), scalar_text)).collect()).collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| cells.iter().map(|r| r[j].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let _ = writeln!(out, "{key}:");
    let line = |vals: Vec<&str>| vals.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect::<Vec<_>>().join("  ");
    let _ = writeln!(out, "  {}", line(cols.iter().map(|c| c.as_str()).collect()).trim_end());
    for r in &cells {
        let _ = writeln!(out, "  {}", line(r.iter().map(|c| c.as_str()).collect()).trim_end());
    }
}

fn render(prefix: &str, v: &Value, out: &mut String) {
    let Value::Object(map) = v else {
        let _ = writeln!(out, "{prefix}: {}", scalar_text(v));
        return;
    };
    for (k, val) in map {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match val {
            Value::Object(_) => render(&key, val, out),
            Value::Array(a) if !a.is_empty() && a.iter().all(Value::is_object) => {
                let rows: Vec<Map<String, Value>> = a.iter().filter_map(|r| r.as_object().cloned()).collect();
                render_rows(&key, &rows, out);
            }
            _ => {
                let _ = writeln!(out, "{key}: {}", scalar_text(val));
            }
        }
    }
}

/// Text of a report in the requested format.
pub fn format_report(report: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut s = String::new();
            render("", report, &mut s);
            s
        }
    }
}

/// Run the command, write the report and return the exit code.
pub fn main_with(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(out) => {
            let text = format_report(&out.report, cli.format);
            match write_out(cli.output.as_deref(), &text) {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| QuadError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
