//! Device models and the calibration-to-noise mapping.

mod device;
mod file;
mod noise;
pub mod presets;

pub use device::{DeviceModel, EdgeCalibration, NativeMulti, Placement, QubitCalibration, StarCalibration};
pub use file::{load_device, load_device_file, serialize_device};
pub use noise::{
    build_noise_model, damping_probs, damping_probs_checked, depol_from_total_error, is_virtual_gate, GateNoise,
    NoiseModel,
};
pub use presets::resolve_device;
