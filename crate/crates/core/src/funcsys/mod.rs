//! Function systems: the approximation functions, `Omega`, their inverses and
//! the derived step sizes.

pub mod expr;
pub mod presets;
pub mod system;
pub mod validate;

pub use presets::{list_presets, make_preset, make_preset_with, preset_from_name, PresetId};
pub use system::{FnSpec, FunctionSystem, Mode, SystemError, SystemSpec, UnaryFn};
