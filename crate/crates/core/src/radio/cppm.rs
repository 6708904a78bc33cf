use serde::{Deserialize, Serialize};

use super::{assign, value_of, ChannelSet, RadioConfig, RadioError, PULSE_MAX_US, PULSE_MIN_US};

/// Fixed CPPM frame length, µs.
pub const FRAME_PERIOD_US: u32 = 20_000;
pub const MAX_CPPM_CHANNELS: usize = 8;

/// One combined-PPM frame: channel pulse widths in slot order followed by
/// the sync gap that pads the frame to [`FRAME_PERIOD_US`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CppmFrame {
    pub pulses_us: Vec<u16>,
    pub period_us: u32,
}

impl CppmFrame {
    pub fn new(pulses_us: Vec<u16>) -> Self {
        Self {
            pulses_us,
            period_us: FRAME_PERIOD_US,
        }
    }

    /// Remainder of the frame after the channel pulses.
    pub fn sync_us(&self) -> u32 {
        let used: u32 = self.pulses_us.iter().map(|&p| u32::from(p)).sum();
        self.period_us.saturating_sub(used)
    }
}

fn quantize(pulse: f64) -> u16 {
    // Clamped into [1000, 2000] first, so the cast is exact.
    pulse.clamp(PULSE_MIN_US, PULSE_MAX_US).round() as u16
}

/// Packs a channel set into a frame, one slot per entry of `cfg.order`.
/// Values beyond the encodable range saturate at 1000/2000 µs; absent
/// optional channels are sent centred.
pub fn cppm_encode(ch: &ChannelSet, cfg: &RadioConfig) -> CppmFrame {
    let pulses = cfg
        .order
        .iter()
        .take(MAX_CPPM_CHANNELS)
        .map(|&f| {
            let units = value_of(ch, f).unwrap_or(0.0);
            quantize(cfg.units_to_pulse(f, units))
        })
        .collect();
    CppmFrame::new(pulses)
}

/// Unpacks a frame. Pulses outside [1000, 2000] µs are clamped first.
pub fn cppm_decode(frame: &CppmFrame, cfg: &RadioConfig) -> Result<ChannelSet, RadioError> {
    let n = frame.pulses_us.len();
    if n == 0 || n > MAX_CPPM_CHANNELS {
        return Err(RadioError::FrameArity(n));
    }
    let mut ch = ChannelSet::neutral();
    for (&f, &p) in cfg.order.iter().zip(&frame.pulses_us) {
        let pulse = f64::from(p).clamp(PULSE_MIN_US, PULSE_MAX_US);
        assign(&mut ch, f, cfg.pulse_to_units(f, pulse));
    }
    Ok(ch)
}
