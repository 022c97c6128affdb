//! Vershik's standardness criterion for the generator metric.
//!
//! `rho_0(x, y) = |R(x) - R(y)|` with `R = sum_{n<=0} 3^n x_n` truncated at
//! depth `D`. The iterated metric is evaluated on pasts: `rho~_p(u, v)` is the
//! expected generator distance after extending the pasts `u` and `v` by `p`
//! symbols under the step-wise optimal couplings `Lambda`. The criterion
//! sequence is `alpha_p = E[rho~_p(X, Y)]` for independent stationary pasts.

pub mod alpha;
pub mod coupling;
pub mod generator;
pub mod metric;

pub use alpha::{alpha_sequence, alpha_sequence_mc, iid_alpha_bound, AlphaMode, AlphaRow, AlphaTable};
pub use coupling::{lambda_from_costs, optimal_coupling, Coupling2x2, Orientation};
pub use generator::{truncated_generator, GeneratorConfig};
pub use metric::{lambda_sign, rho_step, MetricLadder, MetricTable, DEFAULT_PAIR_LEN_CAP, PAIR_LEN_HARD_CAP};
