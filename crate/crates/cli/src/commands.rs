use crate::config::RunConfig;
use crate::manifest::{config_hash, RunManifest};
use crate::{selftest, Command, Failure};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;
use stres_core::evolution::{integrate, ExperimentConfig, Nonlinearity};
use stres_core::normal_form::{norm_report, run_normal_form, write_norm_csv};
use stres_core::resonance::{null_identity_residual, resonant_sets, Classifier, PhaseSpec, SearchBox};
use stres_core::snapshot;

type Outputs = Vec<String>;

pub fn dispatch(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let mut outputs = vec!["config.toml".to_string()];
    std::fs::write(out.join("config.toml"), cfg.canonical())?;
    let result = match cmd {
        Command::Resonance => resonance(cfg, out),
        Command::Selftest => selftest(cfg, out),
        Command::Evolve => evolve(&cfg.run, out, ""),
        Command::Normalform => normalform(cfg, out),
        Command::ReportData => report_data(cfg, out),
    };
    let (produced, verdict) = match result {
        Ok(o) => (o, Ok(())),
        Err((o, e)) => (o, Err(e)),
    };
    outputs.extend(produced);
    RunManifest {
        config_hash: config_hash(&cfg.canonical()),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: cmd.name().to_string(),
        outputs,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    }
    .write(out)?;
    verdict
}

/// Outputs written so far, plus the failure if any.
type Step = Result<Outputs, (Outputs, Failure)>;

fn lift<T>(r: Result<T, impl Into<Failure>>, done: &Outputs) -> Result<T, (Outputs, Failure)> {
    r.map_err(|e| (done.clone(), e.into()))
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Phase names from the config; the unicode minus is accepted.
fn phases(cfg: &RunConfig) -> Result<Vec<PhaseSpec>, Failure> {
    if cfg.resonance.phases.is_empty() {
        return Ok(PhaseSpec::all());
    }
    cfg.resonance
        .phases
        .iter()
        .map(|p| PhaseSpec::parse(&p.replace('\u{2212}', "-")).map_err(|_| Failure::Usage(format!("invalid phase name {p:?}"))))
        .collect()
}

fn file_tag(spec: &PhaseSpec) -> String {
    spec.label().replace('+', "p").replace('-', "m")
}

fn resonance(cfg: &RunConfig, out: &Path) -> Step {
    let mut done = Outputs::new();
    let specs = lift(phases(cfg), &done)?;
    for spec in &specs {
        let search = SearchBox {
            per_axis: cfg.resonance.per_axis,
            extent: cfg.resonance.extent,
            per_var: SearchBox::default_for(spec).per_var,
        };
        let sets = lift(resonant_sets(spec, search, Classifier::CellDistance), &done)?;
        let name = format!("resonance_{}.csv", file_tag(spec));
        let w = lift(create(&out.join(&name)), &done)?;
        lift(sets.write_csv(w), &done)?;
        done.push(name);
    }
    let worst = null_identity_residual(cfg.resonance.identity_points, cfg.seed);
    let tol = cfg.resonance.identity_tolerance;
    let pass = worst <= tol;
    let text = format!("points,max_residual,tolerance,pass\n{},{worst:e},{tol:e},{pass}\n", cfg.resonance.identity_points);
    lift(std::fs::write(out.join("null_identity.csv"), text), &done)?;
    done.push("null_identity.csv".into());
    println!("null identity: max residual {worst:.3e} over {} points", cfg.resonance.identity_points);
    if !pass {
        return Err((done, Failure::Invariant(format!("null identity residual {worst:e} > {tol:e}"))));
    }
    Ok(done)
}

fn selftest(cfg: &RunConfig, out: &Path) -> Step {
    let mut done = Outputs::new();
    let checks = selftest::run(cfg);
    let mut text = String::from("module,invariant,value,tolerance,pass\n");
    for c in &checks {
        let status = if c.pass() { "PASS" } else { "FAIL" };
        match &c.error {
            None => println!("{status} {}/{}: {:.3e} (tolerance {:.1e})", c.module, c.invariant, c.value, c.tolerance),
            Some(e) => println!("{status} {}/{}: {e}", c.module, c.invariant),
        }
        text.push_str(&format!("{},{},{:e},{:e},{}\n", c.module, c.invariant, c.value, c.tolerance, c.pass()));
    }
    lift(std::fs::write(out.join("selftest.csv"), text), &done)?;
    done.push("selftest.csv".into());
    let failed: Vec<String> =
        checks.iter().filter(|c| !c.pass()).map(|c| format!("{}/{}", c.module, c.invariant)).collect();
    if failed.is_empty() {
        Ok(done)
    } else {
        Err((done, Failure::Invariant(format!("{} invariant(s) failed: {}", failed.len(), failed.join(", ")))))
    }
}

/// Diagnostics CSV and snapshots; `suffix` distinguishes companion runs.
fn evolve(run: &ExperimentConfig, out: &Path, suffix: &str) -> Step {
    let mut done = Outputs::new();
    let traj = lift(integrate(run), &done)?;
    let name = format!("diagnostics{suffix}.csv");
    lift(traj.diagnostics.write_csv(lift(create(&out.join(&name)), &done)?), &done)?;
    done.push(name);
    let dir = format!("snapshots{suffix}");
    lift(std::fs::create_dir_all(out.join(&dir)), &done)?;
    let mut index = String::from("index,t,file\n");
    for (i, (t, f)) in traj.times.iter().zip(&traj.fields).enumerate() {
        let file = format!("{dir}/profile_{i:04}.strf");
        lift(snapshot::save(out.join(&file), f), &done)?;
        index.push_str(&format!("{i},{t},{file}\n"));
        done.push(file);
    }
    let idx = format!("{dir}/index.csv");
    lift(std::fs::write(out.join(&idx), index), &done)?;
    done.push(idx);
    println!("evolve: {} outputs to t = {}", traj.times.len(), traj.times.last().copied().unwrap_or(0.0));
    Ok(done)
}

fn normalform(cfg: &RunConfig, out: &Path) -> Step {
    let mut done = Outputs::new();
    let run = lift(run_normal_form(&cfg.run), &done)?;
    let rows: Vec<_> = run.states.iter().flat_map(|s| norm_report(s, cfg.run.epsilon)).collect();
    lift(write_norm_csv(&rows, lift(create(&out.join("norm_report.csv")), &done)?), &done)?;
    done.push("norm_report.csv".into());
    let mut w = lift(create(&out.join("residual.csv")), &done)?;
    let mut body = String::from("t,residual\n");
    for (s, r) in run.states.iter().zip(&run.residuals) {
        body.push_str(&format!("{},{r:e}\n", s.t));
    }
    lift(w.write_all(body.as_bytes()).and_then(|_| w.flush()), &done)?;
    done.push("residual.csv".into());
    let worst = run.residuals.iter().copied().fold(0.0, f64::max);
    println!("normalform: {} states, max residual {worst:.3e}", run.states.len());
    Ok(done)
}

/// The configured run, its contrast companion, the normal form and the
/// resonant clouds.
fn report_data(cfg: &RunConfig, out: &Path) -> Step {
    let mut done = Outputs::new();
    let mut steps: Vec<Box<dyn Fn() -> Step>> = Vec::new();
    steps.push(Box::new(|| evolve(&cfg.run, out, "")));
    steps.push(Box::new(|| {
        let contrast = ExperimentConfig {
            mode: Nonlinearity::ResonantContrast,
            alpha: [0.0; 2],
            beta: [0.0; 2],
            gamma: [1.0, 0.0],
            ..cfg.run.clone()
        };
        evolve(&contrast, out, "_contrast")
    }));
    steps.push(Box::new(|| normalform(cfg, out)));
    steps.push(Box::new(|| resonance(cfg, out)));
    for step in steps {
        match step() {
            Ok(o) => done.extend(o),
            Err((o, e)) => {
                done.extend(o);
                return Err((done, e));
            }
        }
    }
    Ok(done)
}
