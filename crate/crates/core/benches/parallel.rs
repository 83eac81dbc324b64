use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cyclerisk::behavior::{make_windows, preprocess, PreprocessConfig};
use cyclerisk::config::PipelineConfig;
use cyclerisk::emd::{build_distance_matrix, canonical_map, classify_risk, RiskTrainingSet, TrainItem};
use cyclerisk::exec::{self, Execution};
use cyclerisk::synth::{gen_ride, gen_risk_set, gen_schedule, RiskSceneParams, TunnelSpec};
use cyclerisk::vision::{frame_pair_flow, VisionConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn flow(c: &mut Criterion) {
    let spec = TunnelSpec { width: 320, height: 240, ..Default::default() };
    let frames: Vec<_> = (0..6).map(|i| spec.render(i, 0.15 * i as f64)).collect();
    let pairs: Vec<usize> = (0..frames.len() - 1).collect();
    let cfg = VisionConfig::default();
    let mut g = c.benchmark_group("frame_pair_flow");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec::map(mode, &pairs, |&i| frame_pair_flow(&frames[i], &frames[i + 1], &cfg).map(|f| f.entries.len())))
        });
    }
    g.finish();
}

fn windows(c: &mut Criterion) {
    let ride = gen_ride(&gen_schedule(600.0, 1), 1).unwrap();
    let grid = preprocess(&ride.stream, &PreprocessConfig::default()).unwrap();
    let mut g = c.benchmark_group("feature_windows");
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| make_windows(&grid, mode).unwrap().len()));
    }
    g.finish();
}

fn knn(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let set = gen_risk_set(cfg.criterion, 100, &RiskSceneParams::default(), &cfg.regions, &cfg.risk, 2).unwrap();
    let train = RiskTrainingSet {
        criterion: cfg.criterion,
        items: set.iter().map(|r| TrainItem { d: r.descriptor.d, level: r.level.unwrap() }).collect(),
    };
    let dist = build_distance_matrix(&canonical_map(cfg.criterion, (480, 360), &cfg.regions), 2.0).unwrap();
    let query = set[7].descriptor.d;
    let mut g = c.benchmark_group("emd_knn_query");
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| classify_risk(&query, &train, &dist, 5, mode).unwrap().level)
        });
    }
    g.finish();
}

criterion_group!(benches, flow, windows, knn);
criterion_main!(benches);
