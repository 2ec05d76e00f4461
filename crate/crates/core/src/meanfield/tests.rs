use num_complex::Complex64;

use super::*;
use crate::gibbs::{GibbsSampler, PosteriorSample};
use crate::numerics::{sample_complex_gaussian, sample_dirichlet, standard_complex_normal, CMatrix};
use crate::sigmodel::{synthesize, FrameDims, Grid, ModulationPool, Scenario};

fn pool3() -> ModulationPool {
    ModulationPool::from_names(&["QPSK", "8PSK", "16QAM"]).unwrap()
}

fn scenario(n: usize, k: usize, l: usize, snr_db: f64, pool: ModulationPool, truth: &str) -> Scenario {
    Scenario {
        n,
        k,
        mt: 2,
        mr: 2,
        l,
        l_hat: l,
        tap_powers_db: (0..l).map(|i| -4.0 * i as f64).collect(),
        snr_db,
        pool,
        true_modulation: truth.into(),
    }
}

fn setup(sc: &Scenario, seed: u64) -> (Model, crate::sigmodel::Synthesis) {
    let syn = synthesize(sc, &mut RandomStream::new(seed)).unwrap();
    (Model::new(sc.pool.clone(), sc.dims()).unwrap(), syn)
}

fn config(model: &Model) -> InferenceConfig {
    InferenceConfig::new(model.dims(), model.labels()).with_iterations(20, 0.5)
}

fn random_psd(l: usize, rng: &mut RandomStream) -> CMatrix {
    let a = CMatrix::from_fn(l, l, |_, _| standard_complex_normal(rng) * 0.3);
    let mut s = a.matmul(&a.adjoint()).unwrap();
    s.add_diagonal(0.05);
    s.symmetrize();
    s
}

/// A soft state with every factor away from its prior and from a point mass.
fn random_state(model: &Model, rng: &mut RandomStream) -> MeanFieldState {
    let d = *model.dims();
    let c = model.candidates().len();
    let mut symbol_pmfs = Vec::with_capacity(d.symbol_count() * c);
    for _ in 0..d.symbol_count() {
        symbol_pmfs.extend(sample_dirichlet(&vec![0.7; c], rng).unwrap());
    }
    let zero = vec![Complex64::new(0.0, 0.0); d.l_hat];
    let unit = CMatrix::identity(d.l_hat);
    MeanFieldState {
        gamma_tilde: (0..model.labels()).map(|_| 1.0 + 40.0 * rng.uniform()).collect(),
        symbol_pmfs,
        h_mean: (0..d.mt * d.mr).map(|_| sample_complex_gaussian(&zero, &unit, rng).unwrap()).collect(),
        h_cov: (0..d.mt * d.mr).map(|_| random_psd(d.l_hat, rng)).collect(),
        alpha: 5.0 + 20.0 * rng.uniform(),
        beta: 1.0 + 5.0 * rng.uniform(),
    }
}

fn hard_state(model: &Model, label: usize) -> MeanFieldState {
    let d = *model.dims();
    let c = model.candidates().len();
    let first = model.candidates().iter().position(|x| x.label == label).unwrap();
    let mut pmfs = vec![0.0; d.symbol_count() * c];
    for i in 0..d.symbol_count() {
        pmfs[i * c + first] = 1.0;
    }
    MeanFieldState {
        gamma_tilde: vec![1.0; model.labels()],
        symbol_pmfs: pmfs,
        h_mean: vec![vec![Complex64::new(0.0, 0.0); d.l_hat]; d.mt * d.mr],
        h_cov: vec![CMatrix::identity(d.l_hat); d.mt * d.mr],
        alpha: 1.0,
        beta: 1.0,
    }
}

#[test]
fn mixture_update_hard_counts() {
    let dims = FrameDims { n: 128, k: 2, mt: 2, mr: 2, l_hat: 1 };
    let model = Model::new(pool3(), dims).unwrap();
    let y = Grid::zeros(128, 2, 2);
    let cfg = InferenceConfig::new(&dims, 3);
    assert_eq!(cfg.gamma, vec![40.0; 3]);
    let mut mf = MeanField::new(&model, &y, &cfg, hard_state(&model, 0)).unwrap();
    mf.update_mixture();
    assert_eq!(mf.state().gamma_tilde, vec![552.0, 40.0, 40.0]);
}

#[test]
fn mixture_update_symmetric_soft_counts() {
    let dims = FrameDims { n: 8, k: 3, mt: 2, mr: 1, l_hat: 1 };
    let model = Model::new(pool3(), dims).unwrap();
    let y = Grid::zeros(8, 3, 1);
    let cfg = InferenceConfig::new(&dims, 3);
    let mut state = hard_state(&model, 0);
    let c = model.candidates().len();
    for i in 0..dims.symbol_count() {
        for (j, cand) in model.candidates().iter().enumerate() {
            state.symbol_pmfs[i * c + j] = 1.0 / (3.0 * model.pool().get(cand.label).len() as f64);
        }
    }
    let mut mf = MeanField::new(&model, &y, &cfg, state).unwrap();
    let g = mf.soft_counts();
    for x in &g {
        assert!((x - 16.0).abs() < 1e-12);
    }
    mf.update_mixture();
    let added: f64 = mf.state().gamma_tilde.iter().zip(&cfg.gamma).map(|(a, b)| a - b).sum();
    assert!((added - 48.0).abs() < 1e-12);
}

#[test]
fn soft_counts_sum_to_symbol_count() {
    let sc = scenario(8, 2, 2, 5.0, pool3(), "8PSK");
    let (model, syn) = setup(&sc, 1);
    let cfg = config(&model);
    let mut rng = RandomStream::new(2);
    let mut mf = MeanField::new(&model, &syn.received, &cfg, random_state(&model, &mut rng)).unwrap();
    mf.update_mixture();
    let added: f64 = mf.state().gamma_tilde.iter().zip(&cfg.gamma).map(|(a, b)| a - b).sum();
    assert!((added - 32.0).abs() < 1e-10);
}

#[test]
fn symbol_update_concentrates_at_high_precision() {
    let dims = FrameDims { n: 4, k: 1, mt: 1, mr: 1, l_hat: 1 };
    let model = Model::new(pool3(), dims).unwrap();
    assert_eq!(model.candidates().len(), 28);
    let target = model.pool().get(2).points()[5];
    let y = Grid::from_fn(4, 1, 1, |_, _, _| target);
    let cfg = InferenceConfig::new(&dims, 3);
    let mut state = hard_state(&model, 1);
    state.h_mean = vec![vec![Complex64::new(1.0, 0.0)]];
    state.h_cov = vec![CMatrix::zeros(1, 1)];
    state.alpha = 1e6;
    state.beta = 1.0;
    state.gamma_tilde = vec![10.0; 3];
    let mut mf = MeanField::new(&model, &y, &cfg, state).unwrap();
    mf.update_symbol(2, 0, 0);
    let pmf = mf.symbol_pmf(2, 0, 0);
    let on_target: f64 = pmf
        .iter()
        .zip(model.candidates())
        .filter(|(_, c)| (c.point - target).norm() < 1e-12)
        .map(|(p, _)| p)
        .sum();
    assert!(on_target > 0.999, "{on_target}");
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn symbol_update_without_data_is_prior_mixture() {
    let sc = scenario(8, 1, 2, 5.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 3);
    let cfg = config(&model);
    let mut rng = RandomStream::new(4);
    let mut state = random_state(&model, &mut rng);
    state.gamma_tilde = vec![7.0; 3];
    state.alpha = 1e-14;
    state.beta = 1e6;
    let mut mf = MeanField::new(&model, &syn.received, &cfg, state).unwrap();
    mf.update_symbol(3, 0, 1);
    for (p, c) in mf.symbol_pmf(3, 0, 1).iter().zip(model.candidates()) {
        let want = 1.0 / (3.0 * model.pool().get(c.label).len() as f64);
        assert!((p - want).abs() < 1e-12, "{p} vs {want}");
    }
}

#[test]
fn psk_pool_has_unit_symbol_energy() {
    let pool = ModulationPool::from_names(&["QPSK", "8PSK", "16PSK"]).unwrap();
    let sc = scenario(8, 3, 2, 5.0, pool, "16PSK");
    let (model, syn) = setup(&sc, 5);
    let cfg = config(&model);
    let mut rng = RandomStream::new(6);
    let mf = MeanField::new(&model, &syn.received, &cfg, random_state(&model, &mut rng)).unwrap();
    for mt in 0..2 {
        let e = mf.expected_symbol_energy(mt);
        assert_eq!(e.len(), 24);
        for x in e {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }
}

fn draw_from_q(model: &Model, st: &MeanFieldState, rng: &mut RandomStream) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let c = model.candidates().len();
    let symbols = st
        .symbol_pmfs
        .chunks(c)
        .map(|pmf| model.candidates()[crate::numerics::sample_categorical(pmf, rng)].point)
        .collect();
    let h = st
        .h_mean
        .iter()
        .zip(&st.h_cov)
        .map(|(m, s)| sample_complex_gaussian(m, s, rng).unwrap())
        .collect();
    (symbols, h)
}

#[test]
fn moments_match_monte_carlo() {
    let sc = scenario(8, 2, 2, 5.0, pool3(), "16QAM");
    let (model, syn) = setup(&sc, 7);
    let cfg = config(&model);
    let mut rng = RandomStream::new(8);
    let state = random_state(&model, &mut rng);
    let mf = MeanField::new(&model, &syn.received, &cfg, state.clone()).unwrap();
    let d = *model.dims();
    let dft = model.dft();
    let draws = 100_000;
    let mut gram = vec![CMatrix::zeros(2, 2); d.n];
    let mut energy = vec![vec![0.0; d.n * d.k]; d.mt];
    let mut resid = 0.0;
    for _ in 0..draws {
        let (s, h) = draw_from_q(&model, &state, &mut rng);
        for n in 0..d.n {
            let hn = CMatrix::from_fn(d.mr, d.mt, |r, t| dft.row_dot(n, &h[model.pair_offset(t, r)]));
            let g = hn.adjoint().matmul(&hn).unwrap();
            gram[n] = CMatrix::from_fn(2, 2, |a, b| gram[n][(a, b)] + g[(a, b)]);
            for k in 0..d.k {
                let sv: Vec<Complex64> = (0..d.mt).map(|t| s[model.symbol_offset(n, k, t)]).collect();
                let hs = hn.mul_vec(&sv);
                for r in 0..d.mr {
                    resid += (syn.received.get(n, k, r) - hs[r]).norm_sqr();
                }
            }
        }
        for mt in 0..d.mt {
            for k in 0..d.k {
                for n in 0..d.n {
                    energy[mt][k * d.n + n] += s[model.symbol_offset(n, k, mt)].norm_sqr();
                }
            }
        }
    }
    let scale = 1.0 / draws as f64;
    for n in 0..d.n {
        let want = mf.expected_gram(n);
        for a in 0..2 {
            let mc = gram[n][(a, a)].re * scale;
            let exact = want[(a, a)].re;
            assert!(((mc - exact) / exact).abs() < 0.02, "gram n={n} a={a}: {mc} vs {exact}");
        }
    }
    for mt in 0..d.mt {
        for (mc, exact) in energy[mt].iter().zip(mf.expected_symbol_energy(mt)) {
            assert!(((mc * scale - exact) / exact).abs() < 0.02, "{} vs {exact}", mc * scale);
        }
    }
    let exact = mf.expected_residual();
    assert!(((resid * scale - exact) / exact).abs() < 0.02, "{} vs {exact}", resid * scale);
}

#[test]
fn residual_matches_expanded_form() {
    // ‖y‖² − 2Re(yᴴΣΛ) + ΣΨ + Σ over ordered cross pairs of Ξ.
    let sc = scenario(8, 2, 3, 5.0, pool3(), "8PSK");
    let (model, syn) = setup(&sc, 9);
    let cfg = config(&model);
    let mut rng = RandomStream::new(10);
    let mf = MeanField::new(&model, &syn.received, &cfg, random_state(&model, &mut rng)).unwrap();
    let d = *model.dims();
    let w = model.dft().to_matrix();
    let st = mf.state();
    let mut total = 0.0;
    for r in 0..d.mr {
        let y_r = syn.received.antenna_stack(r);
        let lambda: Vec<Vec<Complex64>> = (0..d.mt)
            .map(|t| {
                let f = w.mul_vec(&st.h_mean[model.pair_offset(t, r)]);
                (0..d.k * d.n)
                    .map(|i| {
                        let (k, n) = (i / d.n, i % d.n);
                        mf.symbol_moments(n, k, t).0 * f[n]
                    })
                    .collect()
            })
            .collect();
        total += y_r.iter().map(|z| z.norm_sqr()).sum::<f64>();
        for t in 0..d.mt {
            total -= 2.0 * y_r.iter().zip(&lambda[t]).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
            // Ψ = tr(Wᴴ⟨DᴴD⟩W·Σ̂) + ĥᴴWᴴ⟨DᴴD⟩Wĥ
            let energy = mf.expected_symbol_energy(t);
            let mut per_n = vec![0.0; d.n];
            for (i, e) in energy.iter().enumerate() {
                per_n[i % d.n] += e;
            }
            let gram = model.dft().weighted_gram(&per_n);
            let p = model.pair_offset(t, r);
            let h = &st.h_mean[p];
            let gs = gram.matmul(&st.h_cov[p]).unwrap();
            let quad: Complex64 = h.iter().zip(gram.mul_vec(h)).map(|(a, b)| a.conj() * b).sum();
            total += gs.trace().re + quad.re;
            for u in 0..d.mt {
                if u != t {
                    total += lambda[t].iter().zip(&lambda[u]).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
                }
            }
        }
    }
    let exact = mf.expected_residual();
    assert!((total - exact).abs() < 1e-9 * exact.max(1.0), "{total} vs {exact}");
}

#[test]
fn noise_update_examples() {
    let sc = scenario(16, 2, 2, 300.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 11);
    let cfg = config(&model);
    let d = *model.dims();
    let symbols = (0..d.symbol_count())
        .map(|i| {
            let (mt, kn) = (i % d.mt, i / d.mt);
            let x = syn.transmitted.get(kn % d.n, kn / d.n, mt);
            model.candidates().iter().position(|c| c.label == 0 && (c.point - x).norm() < 1e-12).unwrap() as u16
        })
        .collect();
    let mut h = Vec::new();
    for r in 0..d.mr {
        for t in 0..d.mt {
            h.push(syn.channel.taps(t, r).to_vec());
        }
    }
    let sample = PosteriorSample { p_a: vec![0.8, 0.1, 0.1], symbols, h, sigma2: 0.1 };
    let mut mf = MeanField::new(&model, &syn.received, &cfg, MeanFieldState::point_mass(&model, &sample, 1e3)).unwrap();
    mf.update_noise().unwrap();
    assert!((mf.state().beta - cfg.beta0).abs() < 1e-8, "{}", mf.state().beta);
    assert_eq!(mf.state().alpha, cfg.alpha0 + 64.0);

    let dims = FrameDims { n: 128, k: 2, mt: 2, mr: 2, l_hat: 1 };
    let big = Model::new(pool3(), dims).unwrap();
    let y = Grid::zeros(128, 2, 2);
    let cfg = InferenceConfig::new(&dims, 3);
    let mut mf = MeanField::new(&big, &y, &cfg, hard_state(&big, 0)).unwrap();
    mf.update_noise().unwrap();
    assert!((mf.state().alpha - 512.001).abs() < 1e-9);
}

/// Each mean-field update evaluated at a near point mass reproduces the
/// matching Gibbs conditional.
#[test]
fn collapse_to_gibbs_conditionals() {
    let sc = scenario(8, 2, 2, 6.0, pool3(), "8PSK");
    let (model, syn) = setup(&sc, 12);
    let cfg = config(&model);
    let mut rng = RandomStream::new(13);
    let mut sampler = GibbsSampler::new(&model, &syn.received, &cfg, &mut rng).unwrap();
    for m in 1..=3 {
        sampler.sweep(m, &mut rng).unwrap();
    }
    let d = *model.dims();
    let st = MeanFieldState::point_mass(&model, sampler.state(), 1e12);
    let mf = MeanField::new(&model, &syn.received, &cfg, st.clone()).unwrap();

    for &(n, k, mt) in &[(0, 0, 0), (4, 1, 1), (7, 1, 0)] {
        let mut w = mf.symbol_log_weights(n, k, mt);
        crate::numerics::normalize_log_weights(&mut w);
        for (a, b) in w.iter().zip(sampler.symbol_pmf(n, k, mt)) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
    for mr in 0..d.mr {
        for mt in 0..d.mt {
            let (m1, c1) = mf.channel_update(mt, mr).unwrap();
            let (m2, c2) = sampler.channel_conditional(mt, mr).unwrap();
            for (a, b) in m1.iter().zip(&m2) {
                assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
            }
            for (a, b) in c1.as_slice().iter().zip(c2.as_slice()) {
                assert!((a - b).norm() < 1e-10 * c2.max_abs().max(1.0));
            }
        }
    }
    let mut noise = mf.clone();
    noise.update_noise().unwrap();
    let (alpha, beta) = sampler.noise_posterior_params(4);
    assert!((noise.state().alpha - alpha).abs() < 1e-10 * alpha);
    assert!((noise.state().beta - beta).abs() < 1e-10 * beta);

    let mut mix = mf;
    mix.update_mixture();
    for (a, b) in mix.state().gamma_tilde.iter().zip(sampler.mixture_posterior_params()) {
        assert!((a - b).abs() < 1e-10 * b);
    }
}

#[test]
fn gibbs_initialization_matches_conditionals() {
    let sc = scenario(8, 1, 2, 8.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 14);
    let cfg = config(&model).with_annealing(true);
    let mut rng = RandomStream::new(15);
    let mut sampler = GibbsSampler::new(&model, &syn.received, &cfg, &mut rng).unwrap();
    for m in 1..=8 {
        sampler.sweep(m, &mut rng).unwrap();
    }
    let st = MeanFieldState::from_gibbs(&sampler, 8).unwrap();
    assert_eq!(st.gamma_tilde, sampler.mixture_posterior_params());
    let (alpha, beta) = sampler.noise_posterior_params(8);
    assert_eq!((st.alpha, st.beta), (alpha, beta));
    assert!(alpha < sampler.noise_shape());
    let c = model.candidates().len();
    let i = model.symbol_offset(5, 0, 1);
    assert_eq!(&st.symbol_pmfs[i * c..(i + 1) * c], sampler.symbol_pmf(5, 0, 1).as_slice());
    let (m, s) = sampler.channel_conditional(1, 1).unwrap();
    assert_eq!(st.h_mean[model.pair_offset(1, 1)], m);
    assert_eq!(st.h_cov[model.pair_offset(1, 1)], s);
}

fn assert_non_decreasing(prev: f64, cur: f64, what: &str) {
    assert!(cur >= prev - 1e-6 * prev.abs().max(1.0), "{what}: {prev} -> {cur}");
}

#[test]
fn every_update_increases_free_energy() {
    let sc = scenario(8, 2, 2, 4.0, pool3(), "16QAM");
    let (model, syn) = setup(&sc, 16);
    let cfg = config(&model);
    let mut rng = RandomStream::new(17);
    let mut mf = MeanField::new(&model, &syn.received, &cfg, random_state(&model, &mut rng)).unwrap();
    let d = *model.dims();
    let mut f = mf.free_energy().unwrap();
    for _ in 0..3 {
        mf.update_mixture();
        let g = mf.free_energy().unwrap();
        assert_non_decreasing(f, g, "mixture");
        f = g;
        for k in 0..d.k {
            for n in 0..d.n {
                for mt in 0..d.mt {
                    mf.update_symbol(n, k, mt);
                    let g = mf.free_energy().unwrap();
                    assert_non_decreasing(f, g, "symbol");
                    f = g;
                }
            }
        }
        for mr in 0..d.mr {
            for mt in 0..d.mt {
                mf.update_channel(mt, mr).unwrap();
                let g = mf.free_energy().unwrap();
                assert_non_decreasing(f, g, "channel");
                f = g;
            }
        }
        mf.update_noise().unwrap();
        let g = mf.free_energy().unwrap();
        assert_non_decreasing(f, g, "noise");
        f = g;
    }
}

#[test]
fn free_energy_monotone_over_random_instances() {
    let mut seeds = RandomStream::new(18);
    for trial in 0..100u64 {
        let snr = -5.0 + 25.0 * seeds.uniform();
        let truth = ["QPSK", "8PSK", "16QAM"][trial as usize % 3];
        let sc = scenario(8, 1 + trial as usize % 2, 1 + trial as usize % 3, snr, pool3(), truth);
        let (model, syn) = setup(&sc, 100 + trial);
        let cfg = config(&model);
        let mut rng = RandomStream::new(1000 + trial);
        let state = if trial % 2 == 0 {
            MeanFieldState::from_prior(&model, &cfg, &mut rng).unwrap()
        } else {
            random_state(&model, &mut rng)
        };
        let mut mf = MeanField::new(&model, &syn.received, &cfg, state).unwrap();
        let mut f = mf.free_energy().unwrap();
        for _ in 0..6 {
            mf.sweep().unwrap();
            let g = mf.free_energy().unwrap();
            assert_non_decreasing(f, g, "sweep");
            f = g;
        }
        mf.state().validate(&model).unwrap();
        let c = model.candidates().len();
        for pmf in mf.state().symbol_pmfs.chunks(c) {
            assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn mixture_update_maximizes_its_factor() {
    let sc = scenario(8, 1, 2, 5.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 19);
    let cfg = config(&model);
    let mut rng = RandomStream::new(20);
    let mut mf = MeanField::new(&model, &syn.received, &cfg, random_state(&model, &mut rng)).unwrap();
    mf.update_mixture();
    let best = mf.free_energy().unwrap();
    let opt = mf.state().clone();
    for i in 0..20 {
        let mut st = opt.clone();
        for g in st.gamma_tilde.iter_mut() {
            *g *= 1.0 + 0.2 * (rng.uniform() - 0.5);
        }
        st.gamma_tilde[i % 3] += 0.5;
        let other = MeanField::new(&model, &syn.received, &cfg, st).unwrap();
        assert!(other.free_energy().unwrap() < best);
    }
}

#[test]
fn free_energy_invariant_under_relabeling() {
    let sc = scenario(8, 1, 2, 5.0, pool3(), "8PSK");
    let (model, syn) = setup(&sc, 21);
    let cfg = config(&model);
    let mut rng = RandomStream::new(22);
    let st = random_state(&model, &mut rng);
    let f = MeanField::new(&model, &syn.received, &cfg, st.clone()).unwrap().free_energy().unwrap();

    let perm = [2usize, 0, 1];
    let pool = ModulationPool::new(perm.iter().map(|&i| model.pool().get(i).clone()).collect()).unwrap();
    let permuted = Model::new(pool, *model.dims()).unwrap();
    let c = model.candidates().len();
    let map: Vec<usize> = permuted
        .candidates()
        .iter()
        .map(|pc| {
            model
                .candidates()
                .iter()
                .position(|oc| perm[pc.label] == oc.label && (oc.point - pc.point).norm() < 1e-15)
                .unwrap()
        })
        .collect();
    let mut pst = st.clone();
    pst.gamma_tilde = perm.iter().map(|&i| st.gamma_tilde[i]).collect();
    for i in 0..model.dims().symbol_count() {
        for (j, &src) in map.iter().enumerate() {
            pst.symbol_pmfs[i * c + j] = st.symbol_pmfs[i * c + src];
        }
    }
    let mut pcfg = cfg.clone();
    pcfg.gamma = perm.iter().map(|&i| cfg.gamma[i]).collect();
    let g = MeanField::new(&permuted, &syn.received, &pcfg, pst).unwrap().free_energy().unwrap();
    assert!((f - g).abs() < 1e-9 * f.abs(), "{f} vs {g}");
}

#[test]
fn hybrid_boundary_and_determinism() {
    let sc = scenario(8, 1, 2, 10.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 23);
    let cfg = config(&model).with_switch(1);
    let a = hybrid_run(&model, &syn.received, &cfg, &mut RandomStream::new(24)).unwrap();
    let b = mean_field_run(&model, &syn.received, &cfg, &mut RandomStream::new(24)).unwrap();
    assert_eq!(a, b);
    let cfg = config(&model).with_switch(9);
    let c = hybrid_run(&model, &syn.received, &cfg, &mut RandomStream::new(25)).unwrap();
    let d = hybrid_run(&model, &syn.received, &cfg, &mut RandomStream::new(25)).unwrap();
    assert_eq!(c, d);
    assert!((c.p_a_mean.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn hybrid_trace_covers_both_phases() {
    let sc = scenario(8, 1, 2, 10.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 26);
    let mut cfg = config(&model).with_switch(5);
    cfg.record_trace = true;
    let r = hybrid_run(&model, &syn.received, &cfg, &mut RandomStream::new(27)).unwrap();
    let t = r.trace.unwrap();
    assert_eq!(t.len(), 20);
    assert!(t[..4].iter().all(|row| row.free_energy.is_none()));
    assert!(t[4..].iter().all(|row| row.free_energy.is_some()));
    for w in t[4..].windows(2) {
        assert_non_decreasing(w[0].free_energy.unwrap(), w[1].free_energy.unwrap(), "trace");
    }
    assert_eq!(t.last().unwrap().p_a, r.p_a_mean);
}

#[test]
fn tolerance_stops_early() {
    let sc = scenario(8, 1, 1, 20.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 28);
    let mut cfg = config(&model).with_iterations(200, 0.5).with_switch(3);
    cfg.record_trace = true;
    cfg.free_energy_tolerance = Some(1e-8);
    let r = hybrid_run(&model, &syn.received, &cfg, &mut RandomStream::new(29)).unwrap();
    assert!(r.trace.unwrap().len() < 200);
}

#[test]
fn high_snr_hybrid_recognizes_qpsk() {
    let sc = scenario(32, 2, 2, 25.0, pool3(), "QPSK");
    let (model, syn) = setup(&sc, 30);
    let cfg = config(&model).with_iterations(60, 0.5).with_switch(9);
    let r = hybrid_run(&model, &syn.received, &cfg, &mut RandomStream::new(31)).unwrap();
    assert_eq!(r.decision, 0, "{:?}", r.p_a_mean);
}
