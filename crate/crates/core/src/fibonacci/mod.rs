//! The second-order walk `X_{k+1} = X_k + X_{k-1} + ε_{k+1} (mod n)` with
//! `X_0 = 0`, `X_1 = 1` and `ε` uniform on `{-1, 0, 1}`, and its
//! generalization to shift-register chains `P_f` on `X^order`.

mod higher_order;
mod residues;
mod walk;

pub use higher_order::{
    build_higher_order_chain, verify_he_proposition, HeVerification, HigherOrderChainSpec,
    UpdateRule,
};
pub use residues::{
    check_residue_window, fibonacci_mod, window_length, FibResidueSequence, WindowCheck,
};
pub use walk::{
    fibonacci_walk_distribution, fourier_sq_sum, fourier_tv_bound, theorem_fibo_parameters,
    FibonacciWalk, PairChainState, TheoremParameters, PAIR_CHAIN_MAX_MODULUS,
};
