use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ganmc::baselines::{fit_ols, OptionObservation, Regime};
use ganmc::eval::mape;
use ganmc::gan::{Activation, MlpParams};
use ganmc::market_data::{load_price_series, write_price_series, DividendSeries, PriceSeries};
use ganmc::pricing::futures::fit_dividends;
use ganmc::pricing::options::OptionSide;
use ganmc::sampler::Track;
use ganmc::similarity::{rank_and_select, tsim};
use ganmc::windowing::{covariance_rank, partition_values, WindowSet};

fn brute_windows(values: &[f64], stride: usize, len: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start + len <= values.len() {
        out.push(values[start..start + len].to_vec());
        start += stride;
    }
    out
}

proptest! {
    #[test]
    fn partition_matches_enumeration(n in 1usize..=50, t in 1usize..=10, d in 1usize..=10) {
        let values: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        match partition_values(&values, d, t) {
            Ok(ws) => prop_assert_eq!(ws.windows().to_vec(), brute_windows(&values, d, t)),
            Err(_) => prop_assert!(t > n),
        }
    }

    #[test]
    fn tsim_properties(pairs in prop::collection::vec((0.01f64..1e4, 0.01f64..1e4), 1..40), c in 0.1f64..10.0) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let s = tsim(&x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!((s - tsim(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!((tsim(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let cy: Vec<f64> = y.iter().map(|v| c * v).collect();
        prop_assert!((tsim(&cx, &cy).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn selection_matches_sort(
        tracks in prop::collection::vec(prop::collection::vec(1u32..5, 3), 1..=100),
        alpha_pct in 1u32..100,
    ) {
        let alpha = alpha_pct as f64 / 100.0;
        let reference = [2.0, 2.0, 2.0];
        let tracks: Vec<Track<f64>> = tracks
            .into_iter()
            .map(|v| Track::new(v.into_iter().map(f64::from).collect()))
            .collect();
        let n = tracks.len();
        let ranking = rank_and_select(&tracks, &reference, alpha).unwrap();

        let mut pairs: Vec<(f64, usize)> = tracks
            .iter()
            .enumerate()
            .map(|(i, t)| (tsim(&t.values, &reference).unwrap(), i))
            .collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // ceil(alpha_pct * n / 100) in integers
        let first = (alpha_pct as usize * n).div_ceil(100);
        let expected: Vec<usize> = pairs[first - 1..].iter().map(|p| p.1).collect();
        prop_assert_eq!(ranking.selected, expected);
    }

    #[test]
    fn mape_matches_loop(rows in prop::collection::vec((-1e3f64..1e3, 0.1f64..1e3), 1..2000)) {
        let p: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let a: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let mut total = 0.0;
        for i in 0..p.len() {
            total += ((p[i] - a[i]) / a[i]).abs();
        }
        let expected = 100.0 * total / p.len() as f64;
        prop_assert!((mape(&p, &a).unwrap() - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn dividend_fit_matches_normal_equations(points in prop::collection::vec((0usize..5000, 0.0f64..10.0), 2..300)) {
        let mut seen = std::collections::BTreeMap::new();
        for (t, d) in points {
            seen.insert(t, d);
        }
        prop_assume!(seen.len() >= 2);
        let pts: Vec<(usize, f64)> = seen.into_iter().collect();
        let fit = fit_dividends(&DividendSeries::from_ordinals("X", pts.clone()).unwrap()).unwrap();
        let x = DMatrix::from_fn(pts.len(), 2, |i, j| if j == 0 { pts[i].0 as f64 } else { 1.0 });
        let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
        let beta = (x.transpose() * &x).lu().solve(&(x.transpose() * y)).unwrap();
        prop_assert!((fit.slope - beta[0]).abs() < 1e-8);
        prop_assert!((fit.intercept - beta[1]).abs() < 1e-6 * beta[1].abs().max(1.0));
    }

    #[test]
    fn linear_fit_matches_normal_equations(rows in prop::collection::vec((50.0f64..150.0, 0.02f64..1.0, 0.0f64..40.0), 4..1000)) {
        let obs: Vec<OptionObservation<f64>> = rows
            .iter()
            .map(|&(spot, tau, price)| OptionObservation { side: OptionSide::Call, spot, strike: 100.0, tau, price })
            .collect();
        let x: Vec<Vec<f64>> = obs.iter().map(|o| o.features().to_vec()).collect();
        let y: Vec<f64> = obs.iter().map(|o| o.price).collect();
        let xm = DMatrix::from_fn(x.len(), 3, |i, j| x[i][j]);
        let ym = DVector::from_vec(y.clone());
        let xtx = xm.transpose() * &xm;
        prop_assume!(xtx.determinant().abs() > 1e-6 * xtx.norm().powi(3));
        let beta = xtx.lu().solve(&(xm.transpose() * ym)).unwrap();
        let ours = fit_ols(&x, &y).unwrap();
        for j in 0..3 {
            prop_assert!((ours[j] - beta[j]).abs() < 1e-6 * beta[j].abs().max(1.0), "{ours:?} vs {beta}");
        }
        let all = ganmc::baselines::fit_option_pricer(&obs, Regime::All).unwrap();
        prop_assert_eq!(all.n_rows, obs.len());
    }

    #[test]
    fn covariance_rank_matches_eigen(rows in 3usize..30, dim in 1usize..8, rank in 1usize..8, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = rank.min(dim);
        let basis: Vec<Vec<f64>> = (0..rank).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let windows: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                let coef: Vec<f64> = (0..rank).map(|_| rng.random_range(-1.0..1.0)).collect();
                (0..dim).map(|j| 5.0 + (0..rank).map(|k| coef[k] * basis[k][j]).sum::<f64>()).collect()
            })
            .collect();
        let ws = WindowSet::from_windows(windows.clone()).unwrap();
        let ours = covariance_rank(&ws, 1e-8).unwrap();

        let m = DMatrix::from_fn(rows, dim, |i, j| windows[i][j]);
        let mean = m.row_mean();
        let centered = DMatrix::from_fn(rows, dim, |i, j| m[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / (rows as f64 - 1.0);
        let eig = cov.symmetric_eigen().eigenvalues;
        let top = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let expected = eig.iter().filter(|&&v| v.abs() > 1e-8 * top).count();
        prop_assert_eq!(ours, expected);
    }
}

#[test]
fn price_series_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let s = PriceSeries::from_values("RT", vec![100.0, 100.5, 99.75, 101.125, 1e-3, 12345.678]).unwrap();
    write_price_series(&path, &s).unwrap();
    let back: PriceSeries<f64> = load_price_series(&path, "RT").unwrap();
    assert_eq!(back, s);
}

/// Central differences of a scalar loss `0.5·‖f(x)‖²` against backprop.
fn gradient_error(net: &MlpParams<f64>, x: &[f64]) -> f64 {
    let out = net.forward(x).unwrap();
    let grads = net.backward(x, &out).unwrap().flatten();
    let base = net.flatten();
    let loss = |p: &[f64]| {
        let mut n = net.clone();
        n.set_flat(p).unwrap();
        0.5 * n.forward(x).unwrap().iter().map(|v| v * v).sum::<f64>()
    };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut up = base.clone();
        up[i] += h;
        let mut down = base.clone();
        down[i] -= h;
        let numeric = (loss(&up) - loss(&down)) / (2.0 * h);
        let scale = numeric.abs().max(grads[i].abs()).max(1e-7);
        worst = worst.max((numeric - grads[i]).abs() / scale);
    }
    worst
}

#[test]
fn backprop_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let acts = [
            [Activation::Tanh, Activation::Sigmoid, Activation::Identity],
            [Activation::Sigmoid, Activation::Tanh, Activation::Sigmoid],
        ][trial % 2];
        let net = MlpParams::<f64>::init(&[4, 6, 5, 3], &acts, &mut rng).unwrap();
        let x = [0.3, -0.7, 1.1, 0.05];
        let err = gradient_error(&net, &x);
        assert!(err < 1e-4, "trial {trial}: relative error {err}");
    }
}

#[test]
fn f32_and_f64_forward_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = MlpParams::<f64>::init(&[3, 4, 2], &[Activation::Relu, Activation::Sigmoid], &mut rng).unwrap();
    let mut net32 = MlpParams::<f32>::init(&[3, 4, 2], &[Activation::Relu, Activation::Sigmoid], &mut rng).unwrap();
    let flat: Vec<f32> = net.flatten().iter().map(|&v| v as f32).collect();
    net32.set_flat(&flat).unwrap();
    let a = net.forward(&[0.1, 0.2, -0.3]).unwrap();
    let b = net32.forward(&[0.1, 0.2, -0.3]).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_relative_eq!(*x, *y as f64, epsilon = 1e-6);
    }
}
