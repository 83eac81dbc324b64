use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cyclerisk::behavior::{Mode, Segment, SensorStream};
use cyclerisk::config::{load_gamma_profile, PipelineConfig};
use cyclerisk::emd::{build_distance_matrix, canonical_map, classify_risk, RiskTrainingSet, TrainItem};
use cyclerisk::eval::{loss_grid, loss_grid_text, ConfusionMatrix, GRID_C};
use cyclerisk::exec::{with_jobs, Execution};
use cyclerisk::geom::Point;
use cyclerisk::io::{
    format_labels_csv, read_descriptors, read_labels_csv, read_model, read_sensor_csv, read_trainset, write_descriptors, write_model,
    write_trainset, RideRecording, MANIFEST,
};
use cyclerisk::pipeline::{analyze, label_stream, labeled_windows, train_behavior_model, write_outputs};
use cyclerisk::synth::{
    gen_expansion_scene, gen_ride, gen_risk_set, gen_schedule, write_ride_dir, RiskSceneParams, SceneParams, TunnelSpec,
    VideoSpec,
};
use serde_json::json;

use crate::args::{
    AnalyzeArgs, BehaviorFlags, Cli, ClassifyBehaviorArgs, Command, EvalBehaviorArgs, EvalCommand, EvalRiskArgs,
    FoeFlags, GenRideArgs, GenSceneArgs, Global, RiskFlags, SceneKind, TrainBehaviorArgs, TrainRiskArgs,
};

fn base_config(g: &Global) -> Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(c) = g.criterion {
        cfg.criterion = c;
    }
    for o in &g.overrides {
        let Some((k, v)) = o.split_once('=') else {
            return Err(cyclerisk::Error::Config(format!("--set expects KEY=VALUE, got {o:?}")).into());
        };
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn apply_foe(cfg: &mut PipelineConfig, f: &FoeFlags) {
    if let Some(v) = f.delta {
        cfg.foe.huber.delta = v;
    }
    if let Some(v) = f.angle_thresh {
        cfg.foe.huber.angle_thresh = v;
    }
    if let Some(v) = f.foe_m {
        cfg.foe.smooth_m = v;
    }
    if let Some(v) = f.foe_tau {
        cfg.foe.smooth_tau = v;
    }
}

fn apply_risk(cfg: &mut PipelineConfig, f: &RiskFlags) -> Result<()> {
    if let Some(v) = f.k {
        cfg.emd.k = v;
    }
    if let Some(v) = f.cross_factor {
        cfg.emd.cross_region_factor = v;
    }
    if let Some(p) = &f.gamma_profile {
        cfg.risk.gamma = load_gamma_profile(p)?;
    }
    Ok(())
}

fn apply_behavior(cfg: &mut PipelineConfig, f: &BehaviorFlags) {
    if let Some(v) = f.c {
        cfg.behavior.c = v;
    }
    if let Some(v) = f.kernel {
        cfg.behavior.kernel = v;
    }
    if f.rfe_top.is_some() {
        cfg.behavior.rfe_top = f.rfe_top;
    }
}

fn inventory_line(p: &Path) -> String {
    match fs::metadata(p) {
        Ok(m) if m.is_dir() => format!("  {} (directory)", p.display()),
        Ok(m) => format!("  {} ({} bytes)", p.display(), m.len()),
        Err(_) => format!("  {} (missing)", p.display()),
    }
}

/// Returns true when the command should stop after printing.
fn dry_run(g: &Global, cfg: &PipelineConfig, inputs: &[PathBuf]) -> bool {
    if g.dry_run {
        print!("{}", cfg.to_canonical());
        println!("# inputs");
        for p in inputs {
            println!("#{}", inventory_line(p));
        }
    }
    g.dry_run
}

pub fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    let mut cfg = base_config(&g)?;
    let jobs = g.jobs;
    match cli.command {
        Command::Analyze(a) => {
            apply_foe(&mut cfg, &a.foe);
            apply_risk(&mut cfg, &a.risk)?;
            cfg.validate()?;
            let inputs = vec![a.ride.join(MANIFEST), a.model.clone(), a.trainset.clone()];
            if dry_run(&g, &cfg, &inputs) {
                return Ok(());
            }
            with_jobs(jobs, |exec| cmd_analyze(&a, &cfg, exec))
        }
        Command::TrainRisk(a) => {
            apply_risk(&mut cfg, &a.risk)?;
            cfg.validate()?;
            if dry_run(&g, &cfg, &a.descriptors) {
                return Ok(());
            }
            cmd_train_risk(&a, &cfg)
        }
        Command::TrainBehavior(a) => {
            apply_behavior(&mut cfg, &a.behavior);
            cfg.validate()?;
            if dry_run(&g, &cfg, &a.ride) {
                return Ok(());
            }
            with_jobs(jobs, |exec| cmd_train_behavior(&a, &cfg, exec))
        }
        Command::ClassifyBehavior(a) => {
            if dry_run(&g, &cfg, &[a.input.clone(), a.model.clone()]) {
                return Ok(());
            }
            with_jobs(jobs, |exec| cmd_classify_behavior(&a, &cfg, exec))
        }
        Command::GenScene(a) => {
            if dry_run(&g, &cfg, &[]) {
                return Ok(());
            }
            cmd_gen_scene(&a, &cfg)
        }
        Command::GenRide(a) => {
            if dry_run(&g, &cfg, &[]) {
                return Ok(());
            }
            cmd_gen_ride(&a, &cfg)
        }
        Command::Eval(EvalCommand::Risk(a)) => {
            apply_risk(&mut cfg, &a.risk)?;
            cfg.validate()?;
            let mut inputs = vec![a.trainset.clone()];
            inputs.extend(a.test.iter().cloned());
            if dry_run(&g, &cfg, &inputs) {
                return Ok(());
            }
            with_jobs(jobs, |exec| cmd_eval_risk(&a, &cfg, exec))
        }
        Command::Eval(EvalCommand::Behavior(a)) => {
            apply_behavior(&mut cfg, &a.behavior);
            cfg.validate()?;
            let mut inputs = a.train_ride.clone();
            inputs.extend(a.test_ride.iter().cloned());
            if dry_run(&g, &cfg, &inputs) {
                return Ok(());
            }
            with_jobs(jobs, |exec| cmd_eval_behavior(&a, &cfg, exec))
        }
    }
}

fn cmd_analyze(a: &AnalyzeArgs, cfg: &PipelineConfig, exec: Execution) -> Result<()> {
    let ride = RideRecording::open(&a.ride)?;
    let model = read_model(&a.model)?;
    let (trainset, factor) = read_trainset(&a.trainset)?;
    if factor != cfg.emd.cross_region_factor {
        log::warn!(
            "training set was built with cross-region factor {factor}, analysis uses {}",
            cfg.emd.cross_region_factor
        );
    }
    let report = analyze(&ride, &model, &trainset, cfg, exec)?;
    let out = a.out.clone().unwrap_or_else(|| a.ride.join("analysis"));
    write_outputs(&report, cfg, &out)?;
    println!(
        "ride {}: {} frames, {} analyzed, {} segments -> {}",
        ride.manifest.id,
        report.frames.len(),
        report.analyzed_frames(),
        report.segments.len(),
        out.display()
    );
    Ok(())
}

fn cmd_train_risk(a: &TrainRiskArgs, cfg: &PipelineConfig) -> Result<()> {
    let mut items = Vec::new();
    for p in &a.descriptors {
        let (criterion, recs) = read_descriptors(p)?;
        if criterion != cfg.criterion {
            return Err(cyclerisk::Error::InvalidInput(format!(
                "{} holds {criterion} descriptors, config criterion is {}",
                p.display(),
                cfg.criterion
            ))
            .into());
        }
        for r in recs {
            let Some(level) = r.level else {
                return Err(cyclerisk::Error::InvalidInput(format!(
                    "{}: frame {} has no level",
                    p.display(),
                    r.descriptor.frame
                ))
                .into());
            };
            items.push(TrainItem { d: r.descriptor.d, level });
        }
    }
    let set = RiskTrainingSet {
        criterion: cfg.criterion,
        items,
    };
    set.validate()?;
    write_trainset(&a.out, &set, cfg.emd.cross_region_factor)?;
    println!("{} items -> {}", set.items.len(), a.out.display());
    Ok(())
}

fn load_labelled(dir: &Path) -> Result<(SensorStream, Vec<Segment>)> {
    let ride = RideRecording::open(dir)?;
    let labels = ride
        .manifest
        .labels
        .clone()
        .with_context(|| format!("{} has no labels file", dir.display()))
        .map_err(|e| cyclerisk::Error::InvalidInput(format!("{e:#}")))?;
    let stream = read_sensor_csv(&ride.path(&ride.manifest.sensors))?;
    let segs = read_labels_csv(&ride.path(&labels))?;
    Ok((stream, segs))
}

fn cmd_train_behavior(a: &TrainBehaviorArgs, cfg: &PipelineConfig, exec: Execution) -> Result<()> {
    let rides = a.ride.iter().map(|d| load_labelled(d)).collect::<Result<Vec<_>>>()?;
    let model = train_behavior_model(&rides, cfg, exec)?;
    write_model(&a.out, &model)?;
    println!(
        "{} kernel, C = {}, {} features -> {}",
        cfg.behavior.kernel,
        cfg.behavior.c,
        model.mask.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_classify_behavior(a: &ClassifyBehaviorArgs, cfg: &PipelineConfig, exec: Execution) -> Result<()> {
    let csv = if a.input.is_dir() {
        let ride = RideRecording::open(&a.input)?;
        ride.path(&ride.manifest.sensors)
    } else {
        a.input.clone()
    };
    let stream = read_sensor_csv(&csv)?;
    let model = read_model(&a.model)?;
    let labels = label_stream(&stream, &model, cfg, exec)?;
    let mut windows = String::from("t_start,t_end,raw,smoothed\n");
    for w in &labels.labels {
        windows.push_str(&format!("{},{},{},{}\n", w.t_start, w.t_end, w.raw, w.smoothed));
    }
    let segments = format_labels_csv(&labels.segments);
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| cyclerisk::Error::Io { path: dir.clone(), source: e })?;
            for (name, text) in [("windows.csv", &windows), ("segments.csv", &segments)] {
                let p = dir.join(name);
                fs::write(&p, text).map_err(|e| cyclerisk::Error::Io { path: p.clone(), source: e })?;
            }
        }
        None => print!("{windows}\n{segments}"),
    }
    Ok(())
}

fn cmd_gen_scene(a: &GenSceneArgs, cfg: &PipelineConfig) -> Result<()> {
    let dims = (a.width, a.height);
    match a.kind {
        SceneKind::Flow => {
            let foe = match a.foe {
                Some((x, y)) => Point::new(x, y),
                None => Point::new(a.width as f64 / 2.0, a.height as f64 / 2.0),
            };
            let params = SceneParams {
                foe,
                dims,
                n: a.n,
                noise: a.noise,
                outlier_frac: a.outlier_frac,
            };
            let scene = gen_expansion_scene(&params, cfg.seed)?;
            let text = serde_json::to_string_pretty(&scene)? + "\n";
            fs::write(&a.out, text).map_err(|e| cyclerisk::Error::Io { path: a.out.clone(), source: e })?;
            println!("{} flows, {} outliers -> {}", scene.flows.len(), scene.outlier_count(), a.out.display());
        }
        SceneKind::RiskSet => {
            let params = RiskSceneParams {
                dims,
                ..Default::default()
            };
            let set = gen_risk_set(cfg.criterion, a.per_level, &params, &cfg.regions, &cfg.risk, cfg.seed)?;
            write_descriptors(&a.out, cfg.criterion, &set)?;
            println!("{} {} descriptors -> {}", set.len(), cfg.criterion, a.out.display());
        }
    }
    Ok(())
}

fn parse_schedule(s: &str) -> Result<Vec<(Mode, f64)>> {
    s.split(',')
        .map(|part| {
            let (m, d) = part
                .split_once(':')
                .ok_or_else(|| cyclerisk::Error::InvalidInput(format!("schedule entry {part:?} is not mode:seconds")))?;
            let secs: f64 = d
                .trim()
                .parse()
                .map_err(|_| cyclerisk::Error::InvalidInput(format!("bad duration in {part:?}")))?;
            Ok((m.trim().parse::<Mode>()?, secs))
        })
        .collect()
}

fn cmd_gen_ride(a: &GenRideArgs, cfg: &PipelineConfig) -> Result<()> {
    let schedule = match &a.schedule {
        Some(s) => parse_schedule(s)?,
        None => gen_schedule(a.duration, cfg.seed),
    };
    let ride = gen_ride(&schedule, cfg.seed)?;
    let video = (a.frames > 0).then(|| VideoSpec {
        tunnel: TunnelSpec {
            width: a.width,
            height: a.height,
            foe: Point::new(a.width as f64 * 0.52, a.height as f64 * 0.47),
            seed: cfg.seed,
            ..Default::default()
        },
        fps: a.fps,
        start: a.video_start,
        frames: a.frames,
    });
    let id = a.id.clone().unwrap_or_else(|| format!("synthetic-{}", cfg.seed));
    write_ride_dir(&a.out, &id, &ride, video.as_ref(), cfg.seed)?;
    println!(
        "{} samples, {} segments, {} frames -> {}",
        ride.stream.len(),
        ride.segments.len(),
        a.frames,
        a.out.display()
    );
    Ok(())
}

fn cmd_eval_risk(a: &EvalRiskArgs, cfg: &PipelineConfig, exec: Execution) -> Result<()> {
    let (train, _) = read_trainset(&a.trainset)?;
    let dims = (a.width, a.height);
    let dist = build_distance_matrix(&canonical_map(train.criterion, dims, &cfg.regions), cfg.emd.cross_region_factor)?;
    let labels = vec!["1".to_string(), "2".into(), "3".into()];
    let mut m = ConfusionMatrix::new(labels);
    for p in &a.test {
        let (criterion, recs) = read_descriptors(p)?;
        if criterion != train.criterion {
            bail!(cyclerisk::Error::InvalidInput(format!("{} is {criterion}, training set is {}", p.display(), train.criterion)));
        }
        for r in recs {
            let Some(truth) = r.level else { continue };
            let got = classify_risk(&r.descriptor.d, &train, &dist, cfg.emd.k, exec)?;
            m.add(truth as usize - 1, got.level as usize - 1)?;
        }
    }
    println!("risk levels, {} criterion, {} frames (row %)", train.criterion, m.total());
    print!("{}", m.to_text());
    if let Some(j) = &a.json {
        let v = json!({ "criterion": train.criterion, "confusion": m, "row_percent": m.row_percent() });
        fs::write(j, serde_json::to_string_pretty(&v)? + "\n")
            .map_err(|e| cyclerisk::Error::Io { path: j.clone(), source: e })?;
    }
    Ok(())
}

fn cmd_eval_behavior(a: &EvalBehaviorArgs, cfg: &PipelineConfig, exec: Execution) -> Result<()> {
    let collect = |dirs: &[PathBuf]| -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for d in dirs {
            let (stream, segs) = load_labelled(d)?;
            let (w, l) = labeled_windows(&stream, &segs, cfg, exec)?;
            x.extend(w.into_iter().map(|w| w.features));
            y.extend(l.into_iter().map(Mode::index));
        }
        Ok((x, y))
    };
    let (xtr, ytr) = collect(&a.train_ride)?;
    let (xte, yte) = collect(&a.test_ride)?;
    let mask = match cfg.behavior.rfe_top {
        Some(m) => Some(cyclerisk::behavior::consensus_mask(&xtr, &ytr, m, cfg.behavior.c, &cfg.behavior.smo)?),
        None => None,
    };
    let kernels = cyclerisk::behavior::KernelKind::ALL;
    let grid = loss_grid((&xtr, &ytr), (&xte, &yte), &GRID_C, &kernels, mask.as_deref(), &cfg.behavior.smo)?;
    let model = cyclerisk::behavior::train_svm(&xtr, &ytr, cfg.behavior.c, cfg.behavior.kernel, mask.as_deref(), &cfg.behavior.smo)?;
    let labels: Vec<String> = Mode::ALL.iter().map(|m| m.to_string()).collect();
    let m = ConfusionMatrix::from_pairs(labels, yte.iter().zip(&xte).map(|(&t, x)| (t, model.predict(x))))?;
    println!("weighted loss, {} train / {} test windows", xtr.len(), xte.len());
    print!("{}", loss_grid_text(&grid));
    println!("\nmodes, {} kernel, C = {} (row %)", cfg.behavior.kernel, cfg.behavior.c);
    print!("{}", m.to_text());
    if let Some(j) = &a.json {
        let v = json!({ "loss_grid": grid, "confusion": m, "row_percent": m.row_percent(), "mask": mask });
        fs::write(j, serde_json::to_string_pretty(&v)? + "\n")
            .map_err(|e| cyclerisk::Error::Io { path: j.clone(), source: e })?;
    }
    Ok(())
}
