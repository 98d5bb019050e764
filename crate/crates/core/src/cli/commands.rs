use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::Loaded;
use super::output::{basin_csv, basin_pgm, gray_level, json, real, write_atomic, Csv};
use super::{domain, Cli, Command, Failure};
use crate::analysis::{
    classify, find_equilibria, CaseLabel, Equilibrium, EquilibriumKind, EquilibriumSet,
    IsoclineBranch, ReducedState, Stability,
};
use crate::experiments::{
    basin_grid_with, bifurcation_scan, correspondence_check, match_equilibrium, simulate_orbit,
    Axis, BasinOptions, CorrespondenceReport, DemographicParam, GridBounds, CONVERGENCE_TOL,
    MATCH_TOL, MAX_ITER,
};
use crate::model::{demographic_step, full_step, DiseaseParams, FullState};
use crate::reduction::{
    certify_convergence, reduce_params, sample_interior_states, ReducedParams, CERTIFICATE_SLACK,
};

const DEFAULT_RESOLUTION: (usize, usize) = (200, 200);
const DEFAULT_NU_AXIS: &str = "0.01:0.99:0.02";
const DEFAULT_P_AXIS: (&str, &str) = ("bS1", "2:20:0.5");
const DEFAULT_CORRESPONDENCE_K: u32 = 100;
const DEFAULT_CORRESPONDENCE_TOL: f64 = 1e-3;
const DEFAULT_STARTS: usize = 20;
const DEFAULT_GRID_POINTS: usize = 100;
const DEFAULT_K_MAX: u32 = 60;
const DEFAULT_MAX_TOTAL: f64 = 10.0;

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: &'a Loaded,
    text: String,
}

impl Ctx<'_> {
    fn run(&self) -> &super::config::RunSection {
        &self.cfg.config.run
    }

    fn nu(&self) -> Option<f64> {
        self.cli.nu.or(self.run().nu)
    }

    fn disease(&self) -> Result<&DiseaseParams<f64>, Failure> {
        self.cfg
            .disease
            .as_ref()
            .ok_or_else(|| Failure::Config("this command needs a [disease] section".into()))
    }

    fn reduced(&self) -> Result<ReducedParams<f64>, Failure> {
        let p = &self.cfg.demography;
        match (self.nu(), &self.cfg.disease) {
            (Some(nu), _) => ReducedParams::from_nu(p, nu).map_err(domain),
            (None, Some(d)) => reduce_params(p, d).map_err(domain),
            (None, None) => Err(Failure::Config(
                "need --nu, run.nu or a [disease] section".into(),
            )),
        }
    }

    fn tol(&self) -> f64 {
        self.cli.tol.or(self.run().tol).unwrap_or(CONVERGENCE_TOL)
    }

    fn max_iter(&self) -> usize {
        self.run().max_iter.unwrap_or(MAX_ITER)
    }

    fn match_tol(&self) -> f64 {
        self.run().match_tol.unwrap_or(MATCH_TOL)
    }

    fn seed(&self) -> u64 {
        self.run().seed.unwrap_or(0)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        write_atomic(&self.cli.out, name, bytes)
            .map(|_| ())
            .map_err(|e| Failure::Domain(format!("writing {name}: {e}")))
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
    }
}

pub(super) fn dispatch(cli: &Cli, cfg: &Loaded) -> Result<String, Failure> {
    let mut ctx = Ctx {
        cli,
        cfg,
        text: String::new(),
    };
    match cli.command {
        Command::Step => step(&mut ctx),
        Command::Simulate => simulate(&mut ctx),
        Command::Reduce => reduce(&mut ctx),
        Command::Equilibria => equilibria(&mut ctx),
        Command::Classify => classify_cmd(&mut ctx),
        Command::Basin => basin(&mut ctx),
        Command::Bifurcate => bifurcate(&mut ctx),
        Command::Converge => converge(&mut ctx),
        Command::Correspond => correspond(&mut ctx),
    }?;
    Ok(ctx.text)
}

fn full_x0(ctx: &Ctx) -> Result<Option<FullState<f64>>, Failure> {
    match ctx.run().x0.as_deref() {
        None => Ok(None),
        Some([a, b, c, d]) => Ok(Some(FullState::new(*a, *b, *c, *d))),
        Some(_) => Err(Failure::Config(
            "run.x0 must have 4 components (N_S1, N_I1, N_S2, N_I2) here".into(),
        )),
    }
}

fn reduced_x0(ctx: &Ctx) -> ReducedState<f64> {
    match ctx.run().x0.as_deref() {
        Some([a, b]) => ReducedState::new(*a, *b),
        Some([a, b, c, d]) => ReducedState::new(a + b, c + d),
        _ => ReducedState::new(1.0, 1.0),
    }
}

fn state_fields(x: &FullState<f64>) -> Vec<String> {
    x.to_array().iter().map(|v| real(*v)).collect()
}

fn step(ctx: &mut Ctx) -> Result<(), Failure> {
    let k = ctx.cli.k.or(ctx.run().k).unwrap_or(1);
    let steps = ctx.run().steps.unwrap_or(1);
    let mut x = full_x0(ctx)?.unwrap_or(FullState::new(1.0, 1.0, 1.0, 1.0));
    let p = ctx.cfg.demography;
    let d = if k == 0 { None } else { Some(*ctx.disease()?) };
    let mut csv = Csv::new(&["iteration", "n_s1", "n_i1", "n_s2", "n_i2"]);
    csv.row(std::iter::once("0".to_string()).chain(state_fields(&x)));
    for n in 1..=steps {
        x = match &d {
            Some(d) => full_step(&p, d, k, &x).map_err(domain)?,
            None => demographic_step(&p, &x),
        };
        csv.row(std::iter::once(n.to_string()).chain(state_fields(&x)));
    }
    ctx.write("step.csv", &csv.into_bytes())?;
    ctx.say(state_fields(&x).join(" "));
    Ok(())
}

#[derive(Serialize)]
struct OrbitReport {
    nu: f64,
    x0: ReducedState<f64>,
    converged: bool,
    limit: Option<ReducedState<f64>>,
    matched: Option<String>,
    iterations: usize,
    monotone_from: usize,
}

fn simulate(ctx: &mut Ctx) -> Result<(), Failure> {
    let rp = ctx.reduced()?;
    let x0 = reduced_x0(ctx);
    if !(x0.is_nonnegative() && x0.n1.is_finite() && x0.n2.is_finite()) {
        return Err(Failure::Config("run.x0 must be non-negative".into()));
    }
    let orbit = simulate_orbit(&rp, x0, ctx.max_iter(), ctx.tol());
    let eq = find_equilibria(&rp).equilibria;
    let matched = orbit
        .limit
        .and_then(|l| match_equilibrium(&l, &eq, ctx.match_tol()))
        .map(|i| format!("E{i}"));
    let mut csv = Csv::new(&["iteration", "n1", "n2"]);
    for s in &orbit.samples {
        csv.row([s.iteration.to_string(), real(s.state.n1), real(s.state.n2)]);
    }
    ctx.write("orbit.csv", &csv.into_bytes())?;
    let report = OrbitReport {
        nu: rp.nu,
        x0,
        converged: orbit.converged(),
        limit: orbit.limit,
        matched: matched.clone(),
        iterations: orbit.iterations,
        monotone_from: orbit.monotone_from,
    };
    ctx.write("orbit.json", &json(&report))?;
    let line = match orbit.limit {
        Some(l) => format!(
            "converged to {} ({}, {}) after {} iterations",
            matched.as_deref().unwrap_or("an unmatched point"),
            real(l.n1),
            real(l.n2),
            orbit.iterations
        ),
        None => format!("not converged after {} iterations", orbit.iterations),
    };
    ctx.say(line);
    Ok(())
}

fn reduce(ctx: &mut Ctx) -> Result<(), Failure> {
    let rp = ctx.reduced()?;
    let bytes = json(&rp);
    ctx.write("reduce.json", &bytes)?;
    ctx.say(String::from_utf8(bytes).expect("utf-8 json").trim_end());
    Ok(())
}

fn kind_name(k: EquilibriumKind) -> &'static str {
    match k {
        EquilibriumKind::Trivial => "trivial",
        EquilibriumKind::Semitrivial1 => "semitrivial-1",
        EquilibriumKind::Semitrivial2 => "semitrivial-2",
        EquilibriumKind::Positive => "positive",
    }
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Attracting => "attracting",
        Stability::Saddle => "saddle",
        Stability::Repelling => "repelling",
        Stability::UnstableOther => "unstable-other",
    }
}

fn equilibria_csv(set: &EquilibriumSet<f64>) -> Vec<u8> {
    let mut csv = Csv::new(&[
        "name",
        "kind",
        "n1",
        "n2",
        "eig1_re",
        "eig1_im",
        "eig2_re",
        "eig2_im",
        "stability",
        "hyperbolic",
    ]);
    for e in &set.equilibria {
        csv.row([
            e.name(),
            kind_name(e.kind).to_string(),
            real(e.location.n1),
            real(e.location.n2),
            real(e.eigenvalues[0].re),
            real(e.eigenvalues[0].im),
            real(e.eigenvalues[1].re),
            real(e.eigenvalues[1].im),
            stability_name(e.stability).to_string(),
            e.hyperbolic.to_string(),
        ]);
    }
    csv.into_bytes()
}

fn describe(e: &Equilibrium<f64>) -> String {
    format!(
        "{} {} ({}, {}) {}",
        e.name(),
        kind_name(e.kind),
        real(e.location.n1),
        real(e.location.n2),
        stability_name(e.stability)
    )
}

#[derive(Serialize)]
struct EquilibriaReport<'a> {
    nu: f64,
    #[serde(flatten)]
    set: &'a EquilibriumSet<f64>,
}

fn equilibria(ctx: &mut Ctx) -> Result<(), Failure> {
    let rp = ctx.reduced()?;
    let set = find_equilibria(&rp);
    ctx.write(
        "equilibria.json",
        &json(&EquilibriaReport {
            nu: rp.nu,
            set: &set,
        }),
    )?;
    ctx.write("equilibria.csv", &equilibria_csv(&set))?;
    for e in &set.equilibria {
        ctx.say(describe(e));
    }
    if set.non_generic {
        ctx.say("non-generic configuration");
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    label: CaseLabel,
    nu: f64,
    positive_count: usize,
    /// Whether the computed stabilities match the pattern of the case.
    pattern_matches: Option<bool>,
    isoclines: &'a [IsoclineBranch<f64>; 2],
    equilibria: &'a EquilibriumSet<f64>,
}

fn classify_cmd(ctx: &mut Ctx) -> Result<(), Failure> {
    let rp = ctx.reduced()?;
    let cl = classify(&rp);
    let report = ClassifyReport {
        label: cl.label,
        nu: rp.nu,
        positive_count: cl.equilibria.positive_count(),
        pattern_matches: cl
            .label
            .expected_pattern()
            .map(|p| p.matches(&cl.equilibria)),
        isoclines: &cl.isoclines,
        equilibria: &cl.equilibria,
    };
    ctx.write("classify.json", &json(&report))?;
    ctx.say(cl.label.as_str());
    Ok(())
}

#[derive(Serialize)]
struct BasinReport<'a> {
    case: CaseLabel,
    nu: f64,
    bounds: GridBounds<f64>,
    resolution: (usize, usize),
    counts: BTreeMap<String, usize>,
    unresolved: usize,
    gray_levels: BTreeMap<String, u8>,
    equilibria: &'a [Equilibrium<f64>],
}

fn basin(ctx: &mut Ctx) -> Result<(), Failure> {
    let rp = ctx.reduced()?;
    let resolution = ctx
        .cli
        .resolution
        .or(ctx.run().resolution.map(|[a, b]| (a, b)))
        .unwrap_or(DEFAULT_RESOLUTION);
    let opts = BasinOptions {
        bounds: ctx.run().bounds.map(|[lo, hi]| GridBounds { lo, hi }),
        max_iter: ctx.max_iter(),
        tol: ctx.tol(),
        match_tol: ctx.match_tol(),
    };
    let grid = basin_grid_with(&rp, resolution, &opts).map_err(domain)?;
    ctx.write("basin.pgm", &basin_pgm(&grid))?;
    ctx.write("basin.csv", &basin_csv(&grid))?;
    let counts: BTreeMap<String, usize> = grid
        .counts()
        .into_iter()
        .map(|(k, v)| (format!("E{k}"), v))
        .collect();
    let mut gray_levels: BTreeMap<String, u8> = grid
        .equilibria
        .iter()
        .map(|e| (e.name(), gray_level(Some(e.index))))
        .collect();
    gray_levels.insert("unresolved".into(), gray_level(None));
    let report = BasinReport {
        case: classify(&rp).label,
        nu: rp.nu,
        bounds: grid.bounds,
        resolution,
        counts: counts.clone(),
        unresolved: grid.unresolved(),
        gray_levels,
        equilibria: &grid.equilibria,
    };
    ctx.write("basin.json", &json(&report))?;
    for (name, n) in counts {
        ctx.say(format!("{name} {n}"));
    }
    ctx.say(format!("unresolved {}", grid.unresolved()));
    Ok(())
}

#[derive(Serialize)]
struct BifurcationReport {
    param: DemographicParam,
    nu_axis: Vec<f64>,
    p_axis: Vec<f64>,
    /// One column of labels per `p_axis` value, in `nu_axis` order.
    labels: Vec<Vec<CaseLabel>>,
    /// Case sequence of each column as `ν` decreases.
    sequences: Vec<Vec<CaseLabel>>,
}

fn sweep_axes(ctx: &Ctx) -> Result<(Axis, DemographicParam, Axis), Failure> {
    let mut axes: BTreeMap<String, Axis> = BTreeMap::new();
    for (name, spec) in &ctx.run().sweep {
        let axis =
            Axis::parse(spec).map_err(|e| Failure::Config(format!("run.sweep.{name}: {e}")))?;
        axes.insert(name.clone(), axis);
    }
    // a parameter axis on the command line replaces the configured one
    if ctx.cli.sweep.iter().any(|(name, _)| name != "nu") {
        axes.retain(|name, _| name == "nu");
    }
    for (name, axis) in &ctx.cli.sweep {
        axes.insert(name.clone(), *axis);
    }
    let nu_axis = match axes.remove("nu") {
        Some(a) => a,
        None => Axis::parse(DEFAULT_NU_AXIS).expect("valid default"),
    };
    let (name, p_axis) = match axes.len() {
        0 => (
            DEFAULT_P_AXIS.0.to_string(),
            Axis::parse(DEFAULT_P_AXIS.1).expect("valid default"),
        ),
        1 => axes.into_iter().next().expect("one axis"),
        _ => {
            return Err(Failure::Config(format!(
                "sweep one demographic parameter at a time (got {})",
                axes.keys().cloned().collect::<Vec<_>>().join(", ")
            )))
        }
    };
    let param: DemographicParam = name
        .parse()
        .map_err(|e: crate::experiments::ExperimentError| Failure::Config(e.to_string()))?;
    Ok((nu_axis, param, p_axis))
}

fn bifurcate(ctx: &mut Ctx) -> Result<(), Failure> {
    let (nu_axis, param, p_axis) = sweep_axes(ctx)?;
    let nus: Vec<f64> = nu_axis.values();
    let ps: Vec<f64> = p_axis.values();
    let scan = bifurcation_scan(&ctx.cfg.demography, &nus, param, &ps).map_err(domain)?;
    let mut csv = Csv::new(&["nu", &param.to_string(), "label"]);
    for (ip, p) in ps.iter().enumerate() {
        for (inu, nu) in nus.iter().enumerate() {
            csv.row([real(*nu), real(*p), scan.label(inu, ip).to_string()]);
        }
    }
    ctx.write("bifurcation.csv", &csv.into_bytes())?;
    let report = BifurcationReport {
        param,
        nu_axis: nus,
        p_axis: ps.clone(),
        labels: (0..ps.len()).map(|ip| scan.column(ip).to_vec()).collect(),
        sequences: (0..ps.len()).map(|ip| scan.case_sequence(ip)).collect(),
    };
    ctx.write("bifurcation.json", &json(&report))?;
    for (ip, p) in ps.iter().enumerate() {
        let seq: Vec<&str> = report.sequences[ip].iter().map(|l| l.as_str()).collect();
        ctx.say(format!("{param}={p}: {}", seq.join(" ")));
    }
    Ok(())
}

fn converge(ctx: &mut Ctx) -> Result<(), Failure> {
    let d = *ctx.disease()?;
    let n = ctx.run().grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    let k_max = ctx.run().k_max.unwrap_or(DEFAULT_K_MAX);
    let max_total = ctx.run().max_total.unwrap_or(DEFAULT_MAX_TOTAL);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
    let grid: Vec<FullState<f64>> = sample_interior_states(&mut rng, n, max_total);
    let report = certify_convergence(&d, &grid, k_max).map_err(domain)?;
    let mut csv = Csv::new(&["k", "sup_error"]);
    for (k, e) in report.k_values.iter().zip(&report.sup_errors) {
        csv.row([k.to_string(), real(*e)]);
    }
    ctx.write("converge.csv", &csv.into_bytes())?;
    ctx.write("converge.json", &json(&report))?;
    let mut line = String::new();
    let _ = write!(
        line,
        "fitted ratio {} bound {} (slack {CERTIFICATE_SLACK}): {}",
        real(report.fitted_ratio),
        real(report.bound_c),
        if report.within_bound() {
            "within bound"
        } else {
            "outside bound"
        }
    );
    ctx.say(line);
    ctx.say(format!("asymptotic rate {}", real(report.asymptotic_rate)));
    ctx.say(format!(
        "max conservation error {}",
        real(report.max_conservation_error)
    ));
    Ok(())
}

fn correspond(ctx: &mut Ctx) -> Result<(), Failure> {
    let d = *ctx.disease()?;
    let p = ctx.cfg.demography;
    let k = ctx
        .cli
        .k
        .or(ctx.run().k)
        .unwrap_or(DEFAULT_CORRESPONDENCE_K);
    let tol = ctx
        .cli
        .tol
        .or(ctx.run().correspondence_tol)
        .unwrap_or(DEFAULT_CORRESPONDENCE_TOL);
    let starts = match full_x0(ctx)? {
        Some(x) => vec![x],
        None => {
            let n = ctx.run().starts.unwrap_or(DEFAULT_STARTS);
            let max_total = ctx.run().max_total.unwrap_or(DEFAULT_MAX_TOTAL);
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
            sample_interior_states(&mut rng, n, max_total)
        }
    };
    let reports: Vec<CorrespondenceReport<f64>> = starts
        .iter()
        .map(|x0| correspondence_check(&p, &d, k, *x0, tol))
        .collect::<Result<_, _>>()
        .map_err(domain)?;
    let mut csv = Csv::new(&[
        "start",
        "n_s1",
        "n_i1",
        "n_s2",
        "n_i2",
        "discrepancy",
        "totals_discrepancy",
        "passed",
    ]);
    let opt = |v: Option<f64>| v.map(real).unwrap_or_default();
    for (n, (x0, r)) in starts.iter().zip(&reports).enumerate() {
        let mut row = vec![n.to_string()];
        row.extend(state_fields(x0));
        row.push(opt(r.discrepancy));
        row.push(opt(r.totals_discrepancy));
        row.push(
            r.passed
                .map(|b| b.to_string())
                .unwrap_or_else(|| "not-converged".into()),
        );
        csv.row(row);
    }
    ctx.write("correspond.csv", &csv.into_bytes())?;
    ctx.write("correspond.json", &json(&reports))?;
    let passed = reports.iter().filter(|r| r.passed == Some(true)).count();
    let failed = reports.iter().filter(|r| r.passed == Some(false)).count();
    let worst = reports
        .iter()
        .filter_map(|r| r.discrepancy)
        .fold(0.0_f64, f64::max);
    ctx.say(format!(
        "{passed}/{} within {tol} (max relative discrepancy {}), {} not converged",
        reports.len(),
        real(worst),
        reports.len() - passed - failed
    ));
    if failed > 0 {
        return Err(Failure::Domain(format!(
            "{failed} start(s) outside tolerance {tol}"
        )));
    }
    Ok(())
}
