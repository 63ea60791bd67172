use ifno::data::{make_darcy_coefficient, sample_grf, unit_variance_amplitude, Dataset, GrfConfig, PdeSetup, Problem};
use ifno::model::{FnoConfig, FnoModel, Normalization};
use ifno::scheduler::{SchedulerConfig, SchedulerVariant};
use ifno::tensor::dft_real;
use ifno::train::{train, TrainConfig};

fn burgers_grf(n: usize, seed: u64) -> GrfConfig {
    GrfConfig { tau: 5.0, alpha_cov: 2.0, amplitude: unit_variance_amplitude(5.0, 2.0), resolution: n, seed }
}

#[test]
fn grf_moments_match_the_covariance() {
    let (n, draws) = (256, 300);
    let kmax = 16;
    let mut power = vec![0.0; kmax + 1];
    let (mut sum, mut sq) = (0.0, 0.0);
    for seed in 0..draws {
        let u = sample_grf(&burgers_grf(n, seed), 1).unwrap();
        sum += u.data().iter().sum::<f64>();
        sq += u.dot(&u);
        let spec = dft_real(&u, &[0]).unwrap();
        for (k, p) in power.iter_mut().enumerate() {
            *p += spec.data()[k].norm_sqr() / draws as f64;
        }
    }
    let count = (n as u64 * draws) as f64;
    assert!((sum / count).abs() < 1e-12, "mean {}", sum / count);
    let variance = sq / count;
    assert!((variance - 1.0).abs() < 0.1, "variance {variance}");

    // Least-squares slope of log power against log(4π²k² + τ²) is −α.
    let cfg = burgers_grf(n, 0);
    let pts: Vec<(f64, f64)> = (1..=kmax)
        .map(|k| ((4.0 * std::f64::consts::PI.powi(2) * (k * k) as f64 + 25.0).ln(), power[k].ln()))
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kmax as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kmax as f64;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + cfg.alpha_cov).abs() < 0.1 * cfg.alpha_cov, "slope {slope}");
    for k in [1, 2, 4] {
        let ratio = power[k] / cfg.expected_power_1d(k);
        assert!((ratio - 1.0).abs() < 0.25, "k={k}: ratio {ratio}");
    }
}

#[test]
fn darcy_coefficient_is_half_high() {
    let setup = PdeSetup::darcy();
    let mut high = 0.0;
    let draws = 40;
    for seed in 0..draws {
        let cfg = GrfConfig { tau: setup.tau, alpha_cov: setup.alpha_cov, amplitude: setup.amplitude, resolution: 33, seed };
        let a = make_darcy_coefficient(&sample_grf(&cfg, 2).unwrap(), setup.hi, setup.lo).unwrap();
        assert!(a.data().iter().all(|&x| x == setup.hi || x == setup.lo));
        high += a.data().iter().filter(|&&x| x == setup.hi).count() as f64 / a.len() as f64;
    }
    let fraction = high / draws as f64;
    assert!((fraction - 0.5).abs() < 0.05, "high fraction {fraction}");
}

#[test]
fn memorizes_one_sample() {
    let sample = PdeSetup::burgers().sample(64, 9).unwrap();
    let ds = Dataset::new(Problem::Burgers, vec![sample], String::new()).unwrap();
    let cfg = FnoConfig {
        layers: 2,
        channels: 16,
        modes: vec![24],
        buffer: 0,
        normalization: Normalization::None,
        init_scale: 1.0 / 256.0,
        ..FnoConfig::new(1)
    };
    let model = FnoModel::init(cfg, 1, 1, 0).unwrap();
    // Relative L2 is not squared, so Adam settles at a floor proportional to
    // the learning rate; the halvings are what take it below 1e-3.
    let tc = TrainConfig {
        epochs: 1500,
        batch_size: 1,
        lr0: 3e-3,
        lr_halving_period: 250,
        weight_decay: 0.0,
        scheduler: SchedulerConfig { variant: SchedulerVariant::None, ..SchedulerConfig::default() },
        ..TrainConfig::default()
    };
    let t = train(model, &ds, &ds, tc).unwrap();
    let last = t.records.last().unwrap().train_l2;
    assert!(last < 1e-3, "train loss {last}");
}
