use ggpa::config::{parse_pairs, validate_config, Experiment};
use ggpa::context::{convolve_back, deconvolve_quadratic_context, GaussianMoments};
use ggpa::estimators::Histogram;
use ggpa::phi4::{hamiltonian, Fft2, LatticeField, Phi4Params};
use ggpa::prior::GaussianMixturePrior;
use ggpa::replica::swap_probability;
use ggpa::schedule::{ForwardKernel, NoiseSchedule};
use ggpa::split_gibbs::{ar1_mixing_prediction, split_covariance, LinearInverseProblem, SplitConfig};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rustfft::num_complex::Complex64;

proptest! {
    #[test]
    fn schedule_is_variance_preserving(t in 0.0f64..1.0, dt in 1e-6f64..0.1) {
        let s = NoiseSchedule::default();
        let (a, sg) = s.alpha_sigma(t).unwrap();
        prop_assert!((a * a + sg * sg - 1.0).abs() < 1e-12);
        let t2 = (t + dt).min(1.0);
        if t2 > t {
            prop_assert!(s.alpha_sigma(t2).unwrap().0 <= a);
        }
    }

    #[test]
    fn deconvolution_round_trips(
        m in proptest::collection::vec(-3.0f64..3.0, 2),
        d in proptest::collection::vec(0.5f64..3.0, 2),
        c in -0.4f64..0.4,
        t in 0.01f64..0.9,
    ) {
        let (a, s) = NoiseSchedule::default().alpha_sigma(t).unwrap();
        let mu = DVector::from_vec(m);
        let off = c * (d[0] * d[1]).sqrt();
        let sigma_c = DMatrix::from_row_slice(2, 2, &[d[0], off, off, d[1]]);
        let a_t = DMatrix::identity(2, 2) * a;
        let sigma_t = DMatrix::identity(2, 2) * (s * s);
        let q = deconvolve_quadratic_context(&mu, &sigma_c, &a_t, &sigma_t).unwrap();
        let back: GaussianMoments = convolve_back(&q, &a_t, &sigma_t).unwrap();
        prop_assert!((back.mean - mu).amax() < 1e-10);
        prop_assert!((back.covariance - sigma_c).amax() < 1e-10);
    }

    #[test]
    fn swap_rule_satisfies_detailed_balance(w in proptest::collection::vec(-20.0f64..20.0, 4)) {
        // Forward uses (lo, hi) = (a, b); the reverse move starts from the swapped pair.
        let fwd = swap_probability(w[0], w[1], w[2], w[3]);
        let rev = swap_probability(w[1], w[0], w[3], w[2]);
        prop_assert!((0.0..=1.0).contains(&fwd));
        let log_ratio = (w[1] - w[0]) + (w[2] - w[3]);
        prop_assert!(((fwd / rev).ln() - log_ratio).abs() < 1e-9);
    }

    #[test]
    fn mixture_responsibilities_normalize(y in proptest::collection::vec(-8.0f64..8.0, 2), rho in 0.1f64..3.0) {
        let p = GaussianMixturePrior::benchmark();
        let (r, v, _) = p.posterior_components(&y, &ForwardKernel::split(rho).unwrap()).unwrap();
        prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(r.iter().all(|&x| x >= 0.0));
        prop_assert!(v > 0.0 && v < 0.64);
    }

    #[test]
    fn matched_split_is_positive_definite_below_the_window(r in 0.01f64..0.999) {
        let p = LinearInverseProblem::benchmark();
        let c = split_covariance(&p, &SplitConfig::from_level(&p, r, true).unwrap()).unwrap();
        prop_assert!(c.symmetric_eigenvalues().min() > 0.0);
        prop_assert!(ar1_mixing_prediction(0.8, 1.0, 2.5, r * 2.5).unwrap() >= 0.0);
    }

    #[test]
    fn fft_round_trip_and_parseval(v in proptest::collection::vec(-5.0f64..5.0, 25)) {
        let f = Fft2::new(5);
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        f.forward(&mut buf);
        let e: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((e - v.iter().map(|x| x * x).sum::<f64>()).abs() < 1e-9 * (1.0 + e));
        f.inverse(&mut buf);
        for (c, x) in buf.iter().zip(&v) {
            prop_assert!((c.re - x).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_energy_is_even(v in proptest::collection::vec(-2.0f64..2.0, 16), j in 0.0f64..1.0) {
        let f = LatticeField::from_values(4, v.clone()).unwrap();
        let g = LatticeField::from_values(4, v.iter().map(|x| -x).collect()).unwrap();
        let p = Phi4Params::new(j, 0.0);
        prop_assert!((hamiltonian(&f, &p) - hamiltonian(&g, &p)).abs() < 1e-9);
    }

    #[test]
    fn histogram_probabilities_sum_to_one(xs in proptest::collection::vec(-2.0f64..2.0, 1..300)) {
        let h = Histogram::from_samples(-2.5, 2.5, 100, &xs).unwrap();
        let p = h.probabilities();
        prop_assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_values_round_trip(seed in any::<u64>(), kc in 0.1f64..50.0, l in 2usize..64) {
        let text = format!("seed = {seed}\n[doublewell]\nk_c = {kc}\n[phi4]\nl = {l}\n");
        let pairs = parse_pairs(&text).unwrap();
        prop_assert_eq!(pairs["phi4.l"].1, 5);
        let c = validate_config(&text, Experiment::Phi4, None).unwrap();
        prop_assert_eq!(c.seed, seed);
        prop_assert_eq!(c.doublewell.params.k_c, kc);
        prop_assert_eq!(c.phi4.run.l, l);
    }
}
