//! Fast oracle checks run by `modclass selftest`. Each one compares an
//! inference building block against an independent computation.

use modclass_core::gibbs::{run_with_restarts, GibbsSampler, InferenceConfig, Model, PosteriorSample};
use modclass_core::meanfield::{MeanField, MeanFieldState};
use modclass_core::numerics::{normalize_log_weights, RandomStream};
use modclass_core::sigmodel::{
    loglik_by_receive_antenna, loglik_by_subcarrier, synthesize, ModulationPool, Scenario, Synthesis,
};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

const CHECKS: [(&str, Check); 6] = [
    ("likelihood factorizations agree", likelihood_factorizations),
    ("conjugate parameters are exact", conjugate_parameters),
    ("noiseless channel recovery", noiseless_channel),
    ("mean-field collapses to Gibbs conditionals", meanfield_collapse),
    ("free energy never decreases", free_energy_monotone),
    ("high-SNR classification", high_snr_classification),
];

pub fn run_all() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok(detail) => CheckResult { name, passed: true, detail },
            Err(detail) => CheckResult { name, passed: false, detail },
        })
        .collect()
}

fn scenario(n: usize, mr: usize, l: usize, snr_db: f64, truth: &str) -> Scenario {
    Scenario {
        n,
        k: 2,
        mt: 2,
        mr,
        l,
        l_hat: l,
        tap_powers_db: (0..l).map(|i| -2.0 * i as f64).collect(),
        snr_db,
        pool: ModulationPool::from_names(&["QPSK", "8PSK", "16QAM"]).expect("built-in pool"),
        true_modulation: truth.into(),
    }
}

fn setup(sc: &Scenario, seed: u64) -> Result<(Model, Synthesis), String> {
    let syn = synthesize(sc, &mut RandomStream::new(seed)).map_err(|e| e.to_string())?;
    let model = Model::new(sc.pool.clone(), sc.dims()).map_err(|e| e.to_string())?;
    Ok((model, syn))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn likelihood_factorizations() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let sc = scenario(16, 2, 3, 5.0, "8PSK");
        let syn = synthesize(&sc, &mut RandomStream::new(seed)).map_err(|e| e.to_string())?;
        let dft = modclass_core::numerics::DftSubmatrix::new(sc.n, sc.l).map_err(|e| e.to_string())?;
        let a = loglik_by_subcarrier(&syn.received, &syn.transmitted, &syn.channel, 0.4).map_err(|e| e.to_string())?;
        let b = loglik_by_receive_antenna(&syn.received, &syn.transmitted, &syn.channel, &dft, 0.4)
            .map_err(|e| e.to_string())?;
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    ensure(worst < 1e-10, || format!("relative gap {worst:e}"))?;
    Ok(format!("max relative gap {worst:.1e}"))
}

fn conjugate_parameters() -> Result<String, String> {
    let sc = scenario(8, 2, 2, 3.0, "QPSK");
    let mut checked = 0;
    for seed in 0..50 {
        let (model, syn) = setup(&sc, seed)?;
        let cfg = InferenceConfig::new(model.dims(), model.labels()).with_iterations(4, 0.5);
        let mut rng = RandomStream::new(seed + 1000);
        let mut s = GibbsSampler::new(&model, &syn.received, &cfg, &mut rng).map_err(|e| e.to_string())?;
        for m in 1..=3 {
            s.sweep(m, &mut rng).map_err(|e| e.to_string())?;
            let counts = s.state().label_counts(&model);
            let params = s.mixture_posterior_params();
            for a in 0..model.labels() {
                ensure(params[a] == cfg.gamma[a] + counts[a] as f64, || format!("Dirichlet parameter {a} is {}", params[a]))?;
            }
            let want = cfg.alpha0 + (sc.n * sc.k * sc.mr) as f64;
            ensure(s.noise_shape() == want, || format!("noise shape {} != {want}", s.noise_shape()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} states"))
}

fn true_state(model: &Model, syn: &Synthesis, label: usize, sigma2: f64) -> Result<PosteriorSample, String> {
    let d = *model.dims();
    let mut symbols = Vec::with_capacity(d.symbol_count());
    for i in 0..d.symbol_count() {
        let mt = i % d.mt;
        let (k, n) = ((i / d.mt) / d.n, (i / d.mt) % d.n);
        let x = syn.transmitted.get(n, k, mt);
        let c = model
            .candidates()
            .iter()
            .position(|c| c.label == label && (c.point - x).norm() < 1e-12)
            .ok_or("transmitted symbol missing from the candidate space")?;
        symbols.push(c as u16);
    }
    let mut h = Vec::new();
    for r in 0..d.mr {
        for t in 0..d.mt {
            h.push(syn.channel.taps(t, r).to_vec());
        }
    }
    Ok(PosteriorSample {
        p_a: vec![1.0 / model.labels() as f64; model.labels()],
        symbols,
        h,
        sigma2,
    })
}

fn noiseless_channel() -> Result<String, String> {
    let sc = scenario(32, 1, 3, 200.0, "QPSK");
    let (model, syn) = setup(&sc, 7)?;
    let mut cfg = InferenceConfig::new(model.dims(), model.labels()).with_iterations(4, 0.5);
    cfg.alpha_h = f64::INFINITY;
    let state = true_state(&model, &syn, 0, 1e-12)?;
    let s = GibbsSampler::from_state(&model, &syn.received, &cfg, state).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for mt in 0..sc.mt {
        let (mean, _) = s.channel_conditional(mt, 0).map_err(|e| e.to_string())?;
        for (a, b) in mean.iter().zip(syn.channel.taps(mt, 0)) {
            worst = worst.max((a - b).norm());
        }
    }
    ensure(worst < 1e-4, || format!("tap error {worst:e}"))?;
    Ok(format!("max tap error {worst:.1e}"))
}

fn meanfield_collapse() -> Result<String, String> {
    let sc = scenario(8, 2, 2, 6.0, "8PSK");
    let (model, syn) = setup(&sc, 12)?;
    let cfg = InferenceConfig::new(model.dims(), model.labels()).with_iterations(10, 0.5);
    let mut rng = RandomStream::new(13);
    let mut sampler = GibbsSampler::new(&model, &syn.received, &cfg, &mut rng).map_err(|e| e.to_string())?;
    for m in 1..=3 {
        sampler.sweep(m, &mut rng).map_err(|e| e.to_string())?;
    }
    let st = MeanFieldState::point_mass(&model, sampler.state(), 1e12);
    let mf = MeanField::new(&model, &syn.received, &cfg, st).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (n, k, mt) in [(0, 0, 0), (4, 1, 1), (7, 1, 0)] {
        let mut w = mf.symbol_log_weights(n, k, mt);
        normalize_log_weights(&mut w);
        for (a, b) in w.iter().zip(sampler.symbol_pmf(n, k, mt)) {
            worst = worst.max((a - b).abs());
        }
    }
    for mr in 0..sc.mr {
        for mt in 0..sc.mt {
            let (m1, c1) = mf.channel_update(mt, mr).map_err(|e| e.to_string())?;
            let (m2, c2) = sampler.channel_conditional(mt, mr).map_err(|e| e.to_string())?;
            for (a, b) in m1.iter().zip(&m2) {
                worst = worst.max((a - b).norm() / b.norm().max(1.0));
            }
            for (a, b) in c1.as_slice().iter().zip(c2.as_slice()) {
                worst = worst.max((a - b).norm() / c2.max_abs().max(1.0));
            }
        }
    }
    let mut noise = mf.clone();
    noise.update_noise().map_err(|e| e.to_string())?;
    let (alpha, beta) = sampler.noise_posterior_params(4);
    worst = worst.max((noise.state().alpha - alpha).abs() / alpha);
    worst = worst.max((noise.state().beta - beta).abs() / beta);
    let mut mix = mf;
    mix.update_mixture();
    for (a, b) in mix.state().gamma_tilde.iter().zip(sampler.mixture_posterior_params()) {
        worst = worst.max((a - b).abs() / b);
    }
    ensure(worst < 1e-10, || format!("gap {worst:e}"))?;
    Ok(format!("max relative gap {worst:.1e}"))
}

fn free_energy_monotone() -> Result<String, String> {
    let mut sweeps = 0;
    for seed in 0..10 {
        let sc = scenario(8, 2, 2, 5.0, ["QPSK", "8PSK", "16QAM"][seed as usize % 3]);
        let (model, syn) = setup(&sc, 100 + seed)?;
        let cfg = InferenceConfig::new(model.dims(), model.labels()).with_iterations(10, 0.5);
        let mut rng = RandomStream::new(200 + seed);
        let st = MeanFieldState::from_prior(&model, &cfg, &mut rng).map_err(|e| e.to_string())?;
        let mut mf = MeanField::new(&model, &syn.received, &cfg, st).map_err(|e| e.to_string())?;
        let mut prev = mf.free_energy().map_err(|e| e.to_string())?;
        for _ in 0..15 {
            mf.sweep().map_err(|e| e.to_string())?;
            let next = mf.free_energy().map_err(|e| e.to_string())?;
            ensure(next >= prev - 1e-6 * prev.abs(), || format!("instance {seed}: {prev} -> {next}"))?;
            prev = next;
            sweeps += 1;
        }
    }
    Ok(format!("{sweeps} sweeps"))
}

fn high_snr_classification() -> Result<String, String> {
    let mut correct = 0;
    let names = ["QPSK", "8PSK", "16QAM"];
    for (i, truth) in names.iter().enumerate() {
        let sc = scenario(64, 2, 2, 20.0, truth);
        let (model, syn) = setup(&sc, 40 + i as u64)?;
        let cfg = InferenceConfig::new(model.dims(), model.labels())
            .with_iterations(400, 0.85)
            .with_restarts(3)
            .with_annealing(true);
        let out = run_with_restarts(&model, &syn.received, &cfg, &RandomStream::new(50 + i as u64)).map_err(|e| e.to_string())?;
        correct += usize::from(out.decision == i);
    }
    ensure(correct == names.len(), || format!("{correct}/{} correct", names.len()))?;
    Ok(format!("{correct}/{} correct", names.len()))
}
