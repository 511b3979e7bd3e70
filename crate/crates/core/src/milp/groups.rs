//! Constraint group names. The validator reports violations under the same names.

pub const MAKESPAN: &str = "makespan";
pub const VISIT_ONCE: &str = "visit_once";
pub const DEPOT_START_END: &str = "depot_start_end";
pub const FLOW_CONSERVATION: &str = "flow_conservation";
pub const SUBTOUR_ELIMINATION: &str = "subtour_elimination";
pub const SORTIE_LAUNCH_PRESENCE: &str = "sortie_launch_presence";
pub const SORTIE_RECOVERY_PRESENCE: &str = "sortie_recovery_presence";
pub const SORTIE_PRECEDENCE: &str = "sortie_precedence";
/// Enforced by only generating sequences up to the length cap; emits no rows.
pub const SORTIE_CAPACITY: &str = "sortie_capacity";
pub const PAYLOAD: &str = "payload";
pub const RANGE: &str = "range";
/// Drone energy is a per-sortie constant folded into coefficients; emits no rows.
pub const DRONE_ENERGY: &str = "drone_energy";
pub const ROBOT_ENERGY_LINEARIZATION: &str = "robot_energy_linearization";
pub const TRUCK_UNREACHABLE: &str = "truck_unreachable";
pub const DEPOT_FULL_CHARGE: &str = "depot_full_charge";
pub const NO_DEPOT_CHARGE: &str = "no_depot_charge";
pub const CHARGING_PRESENCE: &str = "charging_presence";
pub const BATTERY_BALANCE: &str = "battery_balance";
pub const CHARGING_TIME: &str = "charging_time";
pub const CHARGING_RATE: &str = "charging_rate";
pub const OVERCHARGE: &str = "overcharge";
pub const TRUCK_TIMING: &str = "truck_timing";
pub const LAUNCH_SYNC: &str = "launch_sync";
pub const RETURN_SYNC: &str = "return_sync";
pub const VEHICLE_ABOARD: &str = "vehicle_aboard";
pub const CHARGING_ABOARD: &str = "charging_aboard";
pub const SINGLE_TRIP: &str = "single_trip";
pub const FIXED_DOCKING: &str = "fixed_docking";
/// Registered when charging is switched off; emits no rows.
pub const CHARGING_DISABLED: &str = "charging_disabled";

/// Groups that exist only while en-route charging is enabled.
pub const CHARGING_ONLY: &[&str] = &[
    NO_DEPOT_CHARGE,
    CHARGING_PRESENCE,
    CHARGING_TIME,
    CHARGING_RATE,
    OVERCHARGE,
    CHARGING_ABOARD,
];

pub const ALL: &[&str] = &[
    MAKESPAN,
    VISIT_ONCE,
    DEPOT_START_END,
    FLOW_CONSERVATION,
    SUBTOUR_ELIMINATION,
    SORTIE_LAUNCH_PRESENCE,
    SORTIE_RECOVERY_PRESENCE,
    SORTIE_PRECEDENCE,
    SORTIE_CAPACITY,
    PAYLOAD,
    RANGE,
    DRONE_ENERGY,
    ROBOT_ENERGY_LINEARIZATION,
    TRUCK_UNREACHABLE,
    DEPOT_FULL_CHARGE,
    NO_DEPOT_CHARGE,
    CHARGING_PRESENCE,
    BATTERY_BALANCE,
    CHARGING_TIME,
    CHARGING_RATE,
    OVERCHARGE,
    TRUCK_TIMING,
    LAUNCH_SYNC,
    RETURN_SYNC,
    VEHICLE_ABOARD,
    CHARGING_ABOARD,
    SINGLE_TRIP,
    FIXED_DOCKING,
    CHARGING_DISABLED,
];
