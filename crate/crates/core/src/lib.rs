//! Simulation of quantum query algorithms with postselection and the
//! rational approximations they induce.
//!
//! * [`qsim`]: real-amplitude state vectors, query oracles, postselection.
//! * [`constructions`]: the one-query postselected qubit and the OR demo.
//! * [`majority`]: elimination-based Majority algorithms, sampled and exact.
//! * [`boolfn`]: truth tables, multilinear polynomials, Fourier spectra,
//!   extraction of `(P, Q)` from coherent algorithms.
//! * [`compile`]: turning a rational approximation `P/Q` into a
//!   postselection algorithm.
//! * [`newman`]: rational approximants to sign and absolute value.
//! * [`rdeg`]: exact-arithmetic LP feasibility for rational approximation.
//! * [`seed`]: deterministic per-replica generator streams.

pub mod boolfn;
pub mod compile;
pub mod constructions;
pub mod error;
pub mod majority;
pub mod newman;
pub mod qsim;
pub mod rdeg;
pub mod seed;

pub use boolfn::{
    extract_pq, fourier, inverse_fourier, mobius_interpolate, ratio_check, CoherentAlgorithm,
    FourierSpectrum, MultilinearPoly, TruthTable, UnivariatePoly,
};
pub use compile::{compile_rational, error_formula, roundtrip, run_compiled, CompiledAlgorithm};
pub use constructions::{aaronson_qubit, ABPair, OrDemo, QubitState};
pub use error::{Error, Result};
pub use majority::{
    build_family_a, build_family_b, majority_exact, majority_sample, rho_plus, ElimTranscript,
    MajorityInput, MajorityParams, MajorityRun,
};
pub use newman::{
    error_grid, fit_decay, newman_abs, newman_r, quantum_abs, quantum_sign, DomainTag, GridReport,
    SignApproximant,
};
pub use qsim::{Distribution, PureState, QueryCounter, Register};
pub use rdeg::{parse_rational, rdeg_feasible, scan_degree, verify_witness, RdegResult, Witness};
pub use seed::{derive_stream, replicate, stream_rng, StreamRng};

pub use num_rational::BigRational;
