//! Motor/ESC thrust model, LiPo pack discharge and the rotor blade velocity field.

mod battery;
mod blade;
mod motor;

pub use battery::{
    alarm_beep_interval, battery_step, low_voltage_alarm, open_circuit_voltage, peukert_capacity,
    required_current, BatteryError, BatteryState, BROWNOUT_VOLTAGE, CELL_EMPTY_V, CELL_FULL_V,
    CELL_MID_V, HOVER_CURRENT_A,
};
pub use blade::{
    blade_velocity, blade_velocity_field, write_field_csv, BladeFieldSpec, BladeSample, PiMode,
    FIELD_CSV_HEADER,
};
pub use motor::{pwm_to_throttle, throttle_to_pwm, throttle_to_thrust, MotorSpec};
