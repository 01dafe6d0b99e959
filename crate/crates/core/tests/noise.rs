use fedclip_core::{NoiseKind, NoiseModel, Purpose, RngStream};

fn draws(model: &NoiseModel, dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let mut rng = RngStream::keyed(99, Purpose::Local, k % 7, k / 7, 0).rng();
            model.draw(dim, &mut rng).unwrap()
        })
        .collect()
}

#[test]
fn draws_never_exceed_sigma() {
    for kind in [NoiseKind::UniformBall, NoiseKind::UniformPerCoordinate] {
        let model = NoiseModel::new(0.75, kind).unwrap();
        for dim in [1, 3] {
            let worst = draws(&model, dim, 1_000_000 / dim)
                .iter()
                .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            assert!(worst <= 0.75, "{kind:?} dim {dim}: {worst}");
        }
    }
}

#[test]
fn draws_are_centered() {
    // Standard error of the mean of U[-1, 1] over 1e5 draws is about 1.8e-3.
    let model = NoiseModel::new(1.0, NoiseKind::UniformPerCoordinate).unwrap();
    let samples = draws(&model, 1, 100_000);
    let mean = samples.iter().map(|v| v[0]).sum::<f64>() / samples.len() as f64;
    assert!(mean.abs() < 4.0 * (1.0f64 / 3.0 / 1e5).sqrt(), "{mean}");
}

#[test]
fn silent_model_draws_nothing() {
    let mut rng = RngStream::keyed(1, Purpose::Local, 0, 0, 0).rng();
    assert!(NoiseModel::none().draw(4, &mut rng).is_none());
    assert!(NoiseModel::new(0.0, NoiseKind::UniformBall).unwrap().draw(4, &mut rng).is_none());
}
