//! Weight systems, power weights and the characteristic constants of the
//! weighted estimates.

mod characteristic;
mod power;
mod system;

pub use characteristic::{
    ap_characteristic, char_one_weight, char_remark, char_testing, char_two_weight, fs_majorant, CharParams,
    Characteristic, CharacteristicReport, Variant, DEFAULT_PAIR_BUDGET, LOG_OVERFLOW,
};
pub use power::power_weight;
pub use system::{PowerDescriptor, WeightSystem};
