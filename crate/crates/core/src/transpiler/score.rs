use crate::calibration::NoiseModel;
use crate::circuit::{Circuit, Op};
use crate::error::Result;

/// `p_av = 1 − Π F_i` over noisy operations: gates via their calibrated
/// noise channel, measurements and resets via the SPAM bit flip.
pub fn score_layout(c: &Circuit, noise: &NoiseModel) -> Result<f64> {
    let mut product = 1.0;
    for inst in c.instructions() {
        let f = match &inst.op {
            Op::Gate(k) => match noise.gate(k, &inst.qubits)? {
                Some(g) => g.fidelity(),
                None => 1.0,
            },
            Op::Measure { .. } | Op::Reset => noise.measurement_fidelity(inst.qubits[0]),
            Op::Barrier { .. } | Op::Error(_) => 1.0,
        };
        product *= f;
    }
    Ok((1.0 - product).clamp(0.0, 1.0))
}
