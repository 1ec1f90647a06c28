use proptest::prelude::*;
use softrange::nn::{LayerSpec, Mode, Network, OptimizerState, Tensor};

fn mixed_net(seed: u64) -> Network {
    let specs = [
        LayerSpec::Linear { in_dim: 6, out_dim: 8 },
        LayerSpec::downsample(8),
        LayerSpec::Relu { dim: 4 },
        LayerSpec::Dropout { dim: 4, rate: 0.4 },
        LayerSpec::ResidualBlock { dim: 4 },
        LayerSpec::Linear { in_dim: 4, out_dim: 3 },
        LayerSpec::Softmax { dim: 3 },
    ];
    Network::new(&specs, seed).unwrap()
}

fn input(values: &[f64]) -> Tensor {
    Tensor::matrix(values.len() / 6, 6, values.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn zero_upstream_gives_zero_gradients(seed in 0u64..1000, xs in prop::collection::vec(-3.0f64..3.0, 12)) {
        let mut net = mixed_net(seed);
        let x = input(&xs);
        net.forward(&x, Mode::Train, Some(seed)).unwrap();
        let g = net.backward(&Tensor::zeros(vec![2, 3])).unwrap();
        prop_assert!(g.params.iter().all(|t| t.values().iter().all(|v| *v == 0.0)));
        prop_assert!(g.input.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn forward_is_deterministic(seed in 0u64..1000, xs in prop::collection::vec(-3.0f64..3.0, 18)) {
        let mut a = mixed_net(seed);
        let mut b = mixed_net(seed);
        let x = input(&xs);
        prop_assert_eq!(a.forward(&x, Mode::Train, Some(7)).unwrap(), b.forward(&x, Mode::Train, Some(7)).unwrap());
        let e1 = a.forward(&x, Mode::Eval, Some(1)).unwrap();
        let e2 = a.forward(&x, Mode::Eval, Some(2)).unwrap();
        let e3 = a.infer(&x).unwrap();
        prop_assert_eq!(&e1, &e2);
        prop_assert_eq!(&e1, &e3);
    }

    #[test]
    fn softmax_rows_are_distributions(seed in 0u64..1000, xs in prop::collection::vec(-50.0f64..50.0, 30)) {
        let net = mixed_net(seed);
        let y = net.infer(&input(&xs)).unwrap();
        for row in y.values().chunks(3) {
            prop_assert!(row.iter().all(|p| *p >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_rate_dropout_is_identity(xs in prop::collection::vec(-5.0f64..5.0, 1..40), seed in 0u64..100) {
        let mut net = Network::new(&[LayerSpec::Dropout { dim: xs.len(), rate: 0.0 }], 0).unwrap();
        let x = Tensor::vector(xs.clone());
        prop_assert_eq!(net.forward(&x, Mode::Train, Some(seed)).unwrap().into_values(), xs.clone());
        prop_assert_eq!(net.forward(&x, Mode::Eval, None).unwrap().into_values(), xs);
    }

    #[test]
    fn adam_touches_only_nonzero_gradients(
        grads in prop::collection::vec(prop_oneof![Just(0.0f64), -2.0f64..2.0], 1..30),
        steps in 1u64..5,
    ) {
        let mut state = OptimizerState::default();
        let mut p = Tensor::vector(vec![0.5; grads.len()]);
        let g = Tensor::vector(grads.clone());
        for k in 0..steps {
            state.step(&mut [&mut p], std::slice::from_ref(&g)).unwrap();
            prop_assert_eq!(state.step_count(), k + 1);
        }
        let (m, v) = state.moments();
        prop_assert_eq!(m[0].shape(), p.shape());
        prop_assert_eq!(v[0].shape(), p.shape());
        for (pv, gv) in p.values().iter().zip(&grads) {
            prop_assert_eq!(*pv == 0.5, *gv == 0.0);
        }
    }

    #[test]
    fn tensor_shape_product_matches_length(rows in 1usize..6, cols in 1usize..6, extra in 1usize..3) {
        prop_assert!(Tensor::new(vec![rows, cols], vec![0.0; rows * cols]).is_ok());
        prop_assert!(Tensor::new(vec![rows, cols], vec![0.0; rows * cols + extra]).is_err());
    }
}

#[test]
fn three_layer_network_matches_finite_differences() {
    use rand::{Rng, SeedableRng};
    let specs = [
        LayerSpec::Linear { in_dim: 5, out_dim: 6 },
        LayerSpec::Relu { dim: 6 },
        LayerSpec::Linear { in_dim: 6, out_dim: 2 },
    ];
    let h = 1e-5;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for draw in 0..5 {
        let mut net = Network::new(&specs, draw).unwrap();
        for p in net.params_mut() {
            p.values_mut().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        }
        let x = Tensor::vector((0..5).map(|_| rng.random_range(-1.0..1.0)).collect());
        let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let f = |net: &Network| {
            let y = net.infer(&x).unwrap();
            c[0] * y.values()[0] + c[1] * y.values()[1]
        };
        net.forward(&x, Mode::Eval, None).unwrap();
        let g = net.backward(&Tensor::vector(c.to_vec())).unwrap();
        for (t, grad) in g.params.iter().enumerate() {
            for k in 0..grad.len() {
                let orig = net.params()[t].values()[k];
                net.params_mut()[t].values_mut()[k] = orig + h;
                let fp = f(&net);
                net.params_mut()[t].values_mut()[k] = orig - h;
                let fm = f(&net);
                net.params_mut()[t].values_mut()[k] = orig;
                let num = (fp - fm) / (2.0 * h);
                let a = grad.values()[k];
                let ok = (a - num).abs() <= 1e-8 || (a - num).abs() / a.abs().max(num.abs()) <= 1e-4;
                assert!(ok, "draw {draw} tensor {t} index {k}: {a} vs {num}");
            }
        }
    }
}
