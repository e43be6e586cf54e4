use std::path::{Path, PathBuf};

use fracwave::diagnostics::{self, StabilityReference};
use fracwave::dynamics::evolve_with;
use fracwave::experiments::{self, default_constraint, run_experiment, ExperimentId, ExperimentSpec, ParamValue};
use fracwave::io::{self, Manifest, SnapshotMeta};
use fracwave::parallel::Execution;
use fracwave::{
    ComplexField, Constraint, Error, EvolveConfig, Grid, ModelParams, NgfConfig, RealField, Result, Spectral,
};

use crate::args::{ConstraintKind, DiagArgs, EvolveArgs, GroundstateArgs, ModelArgs, ReproduceArgs};

fn out_dir(out: &Option<PathBuf>, id: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| Path::new("out").join(id))
}

fn start_manifest(dir: &Path, command: &str, jobs: usize) -> Result<(PathBuf, Manifest)> {
    std::fs::create_dir_all(dir)?;
    let mut m = Manifest::new();
    m.push("command", command);
    m.push("jobs", jobs);
    Ok((dir.join("manifest.txt"), m))
}

fn push_model(m: &mut Manifest, model: &ModelArgs, constraint: &Constraint) {
    m.push("s", model.s)
        .push("sigma", model.sigma)
        .push("c", model.c)
        .push("constraint", match constraint {
            Constraint::MassL2 { .. } => "mass",
            Constraint::LpNorm { .. } => "lp",
        })
        .push("omega", model.omega)
        .push("potential", model.potential)
        .push("L", model.half_width)
        .push("J", model.nodes);
}

struct Model {
    grid: Grid,
    params: ModelParams,
    constraint: Constraint,
}

fn model(args: &ModelArgs) -> Result<Model> {
    let grid = Grid::new(args.half_width, args.nodes)?;
    let params = ModelParams::new(args.s, args.sigma, args.potential)?;
    let constraint = match args.constraint {
        Some(ConstraintKind::Mass) => Constraint::MassL2 { c: args.c },
        Some(ConstraintKind::Lp) => Constraint::LpNorm {
            c: args.c,
            omega: args.omega,
        },
        None => default_constraint(&params, args.c, args.omega),
    };
    Ok(Model {
        grid,
        params,
        constraint,
    })
}

pub fn groundstate(args: &GroundstateArgs, jobs: usize) -> Result<()> {
    let m = model(&args.model)?;
    let dir = out_dir(&args.out, "groundstate");
    let (manifest_path, mut manifest) = start_manifest(&dir, "groundstate", jobs)?;
    push_model(&mut manifest, &args.model, &m.constraint);
    manifest
        .push("tau", args.tau)
        .push("tol", args.tol)
        .push("max-iters", args.max_iters);
    manifest.write(&manifest_path)?;

    let mut cfg = NgfConfig::new(m.constraint);
    cfg.tau = args.tau;
    cfg.tol = args.tol;
    cfg.max_iters = args.max_iters;
    let (wave, failure) = match experiments::standing_wave(&m.grid, &m.params, &cfg) {
        Ok(w) => (w, None),
        Err(Error::NotConverged { best }) => {
            let best = *best;
            let profile = best.standing_wave()?;
            let frequency = best.standing_wave_frequency();
            let err = Error::NotConverged {
                best: Box::new(best.clone()),
            };
            (
                experiments::StandingWave {
                    result: best,
                    profile,
                    frequency,
                },
                Some(err),
            )
        }
        Err(e) => return Err(e),
    };
    for w in &wave.result.warnings {
        eprintln!("warning: {w}");
    }
    let meta = SnapshotMeta {
        s: m.params.s,
        sigma: m.params.sigma,
        t: 0.0,
    };
    io::write_snapshot(&dir.join("u0.txt"), &wave.profile.to_complex(), &meta)?;
    io::write_sidecar(&dir.join("u0.sidecar.csv"), &wave.result)?;
    let r = &wave.result;
    println!(
        "lambda={} energy_J={} iterations={} residual={:e} converged={}",
        r.lambda, r.energy_j, r.iterations, r.residual, r.converged
    );
    println!("wrote {}", dir.join("u0.txt").display());
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn evolve(args: &EvolveArgs, jobs: usize) -> Result<()> {
    let m = model(&args.model)?;
    let dir = out_dir(&args.out, "evolve");
    let (manifest_path, mut manifest) = start_manifest(&dir, "evolve", jobs)?;
    push_model(&mut manifest, &args.model, &m.constraint);
    manifest
        .push("init", &args.init)
        .push(
            "snapshot",
            args.snapshot.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        )
        .push("tau", args.tau)
        .push("t-end", args.t_end)
        .push("perturb-scale", args.perturb_scale)
        .push("phase-k", args.phase_k)
        .push("checkpoint-every", args.checkpoint_every)
        .push("snapshot-every", args.snapshot_every)
        .push("ngf-tau", args.ngf_tau)
        .push("tol", args.tol);
    manifest.write(&manifest_path)?;

    let cfg = EvolveConfig {
        tau: args.tau,
        t_end: args.t_end,
        checkpoint_every: args.checkpoint_every,
        ..EvolveConfig::default()
    };
    cfg.validate()?;

    let (base, reference): (ComplexField, Option<StabilityReference>) = match args.init.as_str() {
        "gaussian" => {
            let g = RealField::from_fn(m.grid, |x| (-0.5 * x * x).exp());
            let norm = diagnostics::discrete_mass(&g);
            (g.scale(args.model.c.sqrt() / norm).to_complex(), None)
        }
        "groundstate" => {
            let mut ngf = NgfConfig::new(m.constraint);
            ngf.tau = args.ngf_tau;
            ngf.tol = args.tol;
            let wave = experiments::standing_wave(&m.grid, &m.params, &ngf)?;
            io::write_snapshot(
                &dir.join("u0.txt"),
                &wave.profile.to_complex(),
                &SnapshotMeta {
                    s: m.params.s,
                    sigma: m.params.sigma,
                    t: 0.0,
                },
            )?;
            io::write_sidecar(&dir.join("u0.sidecar.csv"), &wave.result)?;
            let reference = wave.reference();
            (wave.profile.to_complex(), Some(reference))
        }
        other => {
            let path = match (other, &args.snapshot) {
                ("snapshot", Some(p)) => p.clone(),
                ("snapshot", None) => {
                    return Err(Error::InvalidConfig("--init snapshot needs --snapshot <path>".into()))
                }
                (p, _) => PathBuf::from(p),
            };
            let snap = io::read_snapshot(&path)?;
            if snap.field.grid() != &m.grid {
                return Err(Error::InvalidConfig(format!(
                    "snapshot grid (L={}, J={}) differs from --L/--J",
                    snap.field.grid().half_width(),
                    snap.field.grid().len()
                )));
            }
            (snap.field, None)
        }
    };
    let psi0 = ComplexField::new(
        m.grid,
        base.values()
            .iter()
            .enumerate()
            .map(|(j, z)| z * args.perturb_scale * num_phase(args.phase_k * m.grid.node(j)))
            .collect(),
    )?;

    let meta_at = |t: f64| SnapshotMeta {
        s: m.params.s,
        sigma: m.params.sigma,
        t,
    };
    let mut snapshots = Vec::new();
    let outcome = evolve_with(&psi0, &m.params, &cfg, reference.as_ref(), |n, t, psi| {
        if args.snapshot_every > 0 && n % args.snapshot_every == 0 {
            snapshots.push((t, psi.clone()));
        }
    });
    for (i, (t, psi)) in snapshots.iter().enumerate() {
        io::write_snapshot(&dir.join(format!("snap{i:04}.txt")), psi, &meta_at(*t))?;
    }
    match outcome {
        Ok(ev) => {
            io::write_timeseries(&dir.join("timeseries.csv"), &ev.records)?;
            io::write_snapshot(&dir.join("final.txt"), &ev.final_state, &meta_at(cfg.t_end))?;
            if let Some(last) = ev.records.last() {
                println!("t={} mass={} energy={} linf={}", last.t, last.mass, last.energy, last.linf);
            }
            Ok(())
        }
        Err(Error::BlowUpDetected(b)) => {
            io::write_timeseries(&dir.join("timeseries.csv"), &b.records)?;
            io::write_snapshot(&dir.join("final.txt"), &b.last, &meta_at(b.t))?;
            Err(Error::BlowUpDetected(b))
        }
        Err(e) => Err(e),
    }
}

fn num_phase(theta: f64) -> fracwave::Complex64 {
    fracwave::Complex64::from_polar(1.0, theta)
}

pub fn reproduce(args: &ReproduceArgs, jobs: usize, execution: Execution) -> Result<()> {
    let id: ExperimentId = args.experiment.parse()?;
    let mut spec = ExperimentSpec::new(id, out_dir(&args.out, id.name())).with_execution(execution);
    if args.paper_scale {
        spec = spec.paper_scale();
    }
    for p in &args.params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("--param expects key=value, got {p:?}")))?;
        spec.set(k.trim(), v.parse::<ParamValue>()?)?;
    }
    spec.params.insert("jobs".into(), ParamValue::Scalar(jobs as f64));
    let report = run_experiment(&spec)?;
    for leg in &report.legs {
        println!("{}: {}", leg.name, leg.status);
    }
    println!("wrote {} files to {}", report.outputs.len(), spec.out_dir.display());
    Ok(())
}

pub fn diag(args: &DiagArgs) -> Result<()> {
    let snap = io::read_snapshot(&args.snapshot)?;
    let field = &snap.field;
    let grid = *field.grid();
    let params = ModelParams::new(snap.meta.s, snap.meta.sigma, args.potential)?;
    let spectral = Spectral::new(&grid);
    let potential = args.potential.eval(&grid);
    let e = diagnostics::energy(&spectral, field, &params, &potential)?;
    let p = 2.0 * params.sigma + 2.0;
    println!("J={} L={} s={} sigma={} t={}", grid.len(), grid.half_width(), params.s, params.sigma, snap.meta.t);
    println!("mass={}", diagnostics::discrete_mass(field));
    println!("linf={}", field.linf());
    println!("lp_norm(p={p})={}", diagnostics::discrete_lp_norm(field, p)?);
    println!("kinetic={}", e.kinetic);
    println!("potential={}", e.potential);
    println!("interaction={}", e.interaction);
    println!("energy_J={}", e.j);
    println!("energy_E={}", e.e);
    println!("sigma_norm(s)={}", diagnostics::sigma_norm(&spectral, field, params.s)?);
    println!("sigma_norm(1)={}", diagnostics::sigma_norm(&spectral, field, 1.0)?);
    Ok(())
}
