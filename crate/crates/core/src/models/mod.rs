//! Model systems with closed-form references, and the special functions they need.

pub mod counterexample;
pub mod fock;
pub mod oscillators;
pub mod qrf;
pub mod special;
pub mod spin;

pub use counterexample::counterexample_scenario;
pub use fock::{fock_ops, number_operator, FockOps, OscillatorSpace};
pub use oscillators::{
    example2_qfi_closed_form, example2_system, normal_mode_energy, Example2System, DEFAULT_KAPPA,
    DEFAULT_OMEGA,
};
pub use qrf::{
    coherent_qfi_hypergeometric, example1_qfi_closed_form, example1_qfi_from_probabilities,
    example1_scenario, mean_energy, qrf_amplitudes, QrfStateSpec, TAIL_TOL,
};
pub use special::{binomial, hermite_h, hermite_normalized, kummer_m, ln_factorial};
pub use spin::{example3_alice_qfi, example3_bob_qfi, example3_scenario, example3_sld_diagonal};
