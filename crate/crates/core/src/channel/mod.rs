//! Channel families, state distributions, entropy utilities and sampling.
//!
//! Logarithms are base 2 throughout; rates are bits per channel use.

mod composite;
pub mod config;
mod entropy;
mod gilbert_elliott;
mod state;

pub use composite::{
    sample_state, transmit, Composite, ContinuousBscComposite, DensityShape, DiscreteComposite, SampledState,
    DEFAULT_GRID_POINTS, DENSITY_MASS_TOL, ERASURE,
};
pub use entropy::{bec_capacity, binary_entropy, bsc_capacity, conv, h, h_prime, star, CLAMP_EPS};
pub use gilbert_elliott::GilbertElliott;
pub use state::{degraded_order, BecState, BscState, ChannelState, Dmc, Family, NoiseOrder, STOCHASTIC_TOL};
