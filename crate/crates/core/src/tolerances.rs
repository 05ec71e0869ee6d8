//! Tolerances used by the verification reports and the CLI pass/fail gates.
//!
//! Identity checks that only involve forward-mode derivatives and a handful of
//! floating point operations use [`IDENTITY`]; anything that composes brackets
//! (second derivatives, more cancellation) uses [`COMPOSED`]. Trajectory-level
//! comparisons are bounded by the integrator, not by round-off.

/// Pointwise algebraic identities (flat/sharp round trip, eta(X_H) = -H, ...).
pub const IDENTITY: f64 = 1e-10;

/// Identities evaluated through one extra layer of differentiation
/// (divergence law, invariant measure, moment condition on samples).
pub const SECOND_ORDER: f64 = 1e-9;

/// Bracket compositions: Jacobi identity, [X_f, X_g] = X_{f,g}, Legendrian image residual.
pub const COMPOSED: f64 = 1e-8;

/// Rank decisions and subspace comparisons (principal angles).
pub const RANK: f64 = 1e-9;

/// Subspace equality by principal angles.
pub const SUBSPACE: f64 = 1e-8;

/// Newton projection onto level sets.
pub const PROJECTION: f64 = 1e-12;
pub const PROJECTION_MAX_ITER: usize = 50;

/// Samples must satisfy |phi_a| below this to count as lying on the level set.
pub const ON_LEVEL_SET: f64 = 1e-9;

/// Invariance of H under generator flows before reduction is attempted.
pub const INVARIANCE: f64 = 1e-9;

/// Trajectory-level agreement (reduced vs. full dynamics, reconstruction).
pub const TRAJECTORY: f64 = 1e-6;

/// Conservation along integrated flows.
pub const CONSERVATION: f64 = 1e-8;

/// Default fixed step for rk4.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Default absolute / relative tolerance for rkf45.
pub const DEFAULT_ABS_TOL: f64 = 1e-9;
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Minimum |det| of a flat matrix for it to count as nonsingular.
pub const NONDEGENERATE_DET: f64 = 1e-9;

/// Non-Hamiltonian negative controls must exceed this residual.
pub const NEGATIVE_CONTROL: f64 = 1e-2;
