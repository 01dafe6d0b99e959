use crate::error::Result;
use crate::noise::NoiseModel;
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::vector::ParameterVector;

/// `∇f_i(x) + n` with `‖n‖ <= sigma` and `E[n] = 0`; exactly `∇f_i(x)` when
/// the noise model is silent.
pub fn sample_stochastic_gradient(
    obj: &dyn Objective,
    x: &ParameterVector,
    noise: &NoiseModel,
    stream: &RngStream,
) -> Result<ParameterVector> {
    let grad = obj.gradient(x)?;
    if noise.is_silent() {
        return Ok(grad);
    }
    let mut rng = stream.rng();
    match noise.draw(grad.dim(), &mut rng) {
        None => Ok(grad),
        Some(n) => ParameterVector::new(grad.as_slice().iter().zip(&n).map(|(g, e)| g + e).collect()),
    }
}
