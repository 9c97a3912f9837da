//! TOML device files.

use std::path::Path;

use super::device::DeviceModel;
use crate::error::{Error, Result};

/// Parses and validates a device description.
pub fn load_device(text: &str) -> Result<DeviceModel> {
    let device: DeviceModel = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        Error::Parse {
            line,
            message: e.message().to_string(),
        }
    })?;
    device.validate()?;
    for w in device.warnings() {
        log::warn!("{w}");
    }
    Ok(device)
}

pub fn load_device_file(path: &Path) -> Result<DeviceModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_device(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn serialize_device(device: &DeviceModel) -> String {
    toml::to_string(device).expect("device models always serialize")
}
