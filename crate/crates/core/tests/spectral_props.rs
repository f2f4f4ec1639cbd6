mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use specopt::loss::spectral_reg;
use specopt::spectral::{apply_filter, from_spectral, to_spectral};
use specopt::tasks::{gen_smooth_signal, SmoothSignalSpec};
use specopt::{FilterSpec, ParameterGraph, ParameterMatrix, SpectralBasis};

fn setup(seed: u64, n: usize, d: usize) -> (ParameterGraph, SpectralBasis, DMatrix<f64>) {
    let mut r = rng(seed);
    let g = random_graph(&mut r, n, 0.35);
    let basis = SpectralBasis::of_graph(&g).unwrap();
    let x = random_matrix(&mut r, n, d);
    (g, basis, x)
}

fn filters(n: usize) -> impl Strategy<Value = FilterSpec> {
    prop_oneof![
        Just(FilterSpec::Identity),
        (1..=n).prop_map(|keep| FilterSpec::IdealLowpass { keep }),
        (0.0f64..5.0).prop_map(|t| FilterSpec::Heat { t }),
        (0.0f64..5.0).prop_map(|t| FilterSpec::Tikhonov { t }),
    ]
}

fn case() -> impl Strategy<Value = (u64, usize, usize, FilterSpec)> {
    (any::<u64>(), 1usize..14, 1usize..6)
        .prop_flat_map(|(s, n, d)| (Just(s), Just(n), Just(d), filters(n)))
}

proptest! {
    #[test]
    fn parseval_and_round_trip(seed in any::<u64>(), n in 1usize..16, d in 1usize..6) {
        let (_, basis, x) = setup(seed, n, d);
        let theta = ParameterMatrix::new(x.clone()).unwrap();
        let hat = to_spectral(&basis, &theta).unwrap();
        prop_assert!((hat.as_matrix().norm() - x.norm()).abs() <= 1e-10 * x.norm().max(1e-300));
        let back = from_spectral(&basis, &hat).unwrap();
        prop_assert!((back.as_matrix() - &x).norm() <= 1e-10 * x.norm().max(1.0));
    }

    #[test]
    fn triple_identity(seed in any::<u64>(), n in 1usize..16, d in 1usize..8) {
        let (g, basis, x) = setup(seed, n, d);
        let pair = pairwise_dirichlet(&g.edges(), &x);
        let trace = spectral_reg(&g, &ParameterMatrix::new(x.clone()).unwrap()).unwrap();
        let spectral = basis.spectral_energy(&x).unwrap();
        let scale = pair.abs().max(1e-12);
        prop_assert!((pair - trace).abs() <= 1e-10 * scale);
        prop_assert!((pair - spectral).abs() <= 1e-10 * scale);
    }

    #[test]
    fn translation_invariance_on_connected_graphs(seed in any::<u64>(), n in 2usize..16, d in 1usize..6) {
        let g = ParameterGraph::random_connected(n, 0.2, (0.5, 1.5), seed).unwrap();
        let mut r = rng(seed ^ 1);
        let x = random_matrix(&mut r, n, d);
        let shift = random_matrix(&mut r, 1, d);
        let mut y = x.clone();
        for mut row in y.row_iter_mut() {
            row += &shift;
        }
        let a = spectral_reg(&g, &ParameterMatrix::new(x).unwrap()).unwrap();
        let b = spectral_reg(&g, &ParameterMatrix::new(y).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn quadratic_scaling(seed in any::<u64>(), n in 1usize..16, d in 1usize..6, c in -10.0f64..10.0) {
        let (g, _, x) = setup(seed, n, d);
        let a = spectral_reg(&g, &ParameterMatrix::new(x.clone()).unwrap()).unwrap();
        let b = spectral_reg(&g, &ParameterMatrix::new(x * c).unwrap()).unwrap();
        prop_assert!((b - c * c * a).abs() <= 1e-10 * (c * c * a).abs().max(1e-12));
    }

    #[test]
    fn filters_never_raise_energy_or_norm((seed, n, d, filter) in case()) {
        let (_, basis, x) = setup(seed, n, d);
        let y = apply_filter(&basis, &filter, &x).unwrap();
        let (ex, ey) = (basis.spectral_energy(&x).unwrap(), basis.spectral_energy(&y).unwrap());
        prop_assert!(ey <= ex + 1e-10);
        prop_assert!(y.norm() <= x.norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn ideal_lowpass_projects(seed in any::<u64>(), n in 1usize..16, d in 1usize..5, keep_frac in 0.0f64..1.0) {
        let (_, basis, x) = setup(seed, n, d);
        let keep = 1 + ((n - 1) as f64 * keep_frac) as usize;
        let f = FilterSpec::IdealLowpass { keep };
        let once = apply_filter(&basis, &f, &x).unwrap();
        let twice = apply_filter(&basis, &f, &once).unwrap();
        prop_assert!((&twice - &once).amax() <= 1e-9);
        let low = basis.eigenvectors().columns(0, keep).into_owned();
        let residual = &once - &low * (low.transpose() * &once);
        prop_assert!(residual.norm() <= 1e-8);
    }

    #[test]
    fn pass_through_filters(seed in any::<u64>(), n in 1usize..16, d in 1usize..5) {
        let (_, basis, x) = setup(seed, n, d);
        prop_assert_eq!(apply_filter(&basis, &FilterSpec::Identity, &x).unwrap(), x.clone());
        let heat0 = apply_filter(&basis, &FilterSpec::Heat { t: 0.0 }, &x).unwrap();
        prop_assert!((heat0 - &x).amax() <= 1e-10);
    }

    #[test]
    fn smooth_signals_are_band_limited(seed in any::<u64>(), n in 2usize..20, d in 1usize..5, cut in 0.0f64..1.0) {
        let g = ParameterGraph::random_connected(n, 0.15, (0.5, 1.5), seed).unwrap();
        let basis = SpectralBasis::of_graph(&g).unwrap();
        let cutoff = 1 + ((n - 1) as f64 * cut) as usize;
        let spec = SmoothSignalSpec { cutoff, coef_scale: 1.0, noise_sd: 0.0 };
        let theta = gen_smooth_signal(&basis, &spec, d, seed).unwrap();
        let hat = to_spectral(&basis, &theta).unwrap();
        let high = hat.as_matrix().rows(cutoff, n - cutoff).norm();
        prop_assert!(high <= 1e-10);
    }
}
