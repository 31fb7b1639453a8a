//! Normalization constants of the forms on the extended moduli space.
//!
//! With right-trivialized tangents `xi = dg g^-1`:
//!
//! * `Omega(a, b)((xi1, eta1), (xi2, eta2)) = sigma [pair(Ad(a)^-1 xi1, eta2) - pair(Ad(a)^-1 xi2, eta1)]`
//! * `lambda_g(xi, eta, zeta) = kappa pair(xi, [eta, zeta])`
//! * Kirillov form `omega_X(ad_u X, ad_v X) = 2 kappa pair(X, [u, v])`
//! * the 2-form on a conjugacy class `tau_C(u1 - Ad(C) u1, u2 - Ad(C) u2) = -2 kappa * 1/2 [pair(Ad(C) u1, u2) - pair(Ad(C) u2, u1)]`
//!
//! The values below are frozen by the calibration tests in
//! `moduli_forms`: `d omega_c~ = <d c~, E* lambda>` fixes `kappa / sigma`, the
//! identity `exp* tau = beta - omega_k` fixes the Kirillov and class-form
//! signs in terms of `kappa`, and the momentum property with `mu_0 = X_0`
//! fixes the overall sign. With these values the Kirillov form is the
//! standard `pair(X, [u, v])`.

use serde::Serialize;

/// Coefficient of the Maurer–Cartan 2-form.
pub const SIGMA: f64 = 0.5;
/// Coefficient of the fundamental 3-form.
pub const KAPPA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conventions {
    pub sigma: f64,
    pub kappa: f64,
    /// Sign in front of the `r~`-pullback of beta. The correct value is 1;
    /// other values exist only to check that the closedness test notices.
    pub beta_sign: f64,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            sigma: SIGMA,
            kappa: KAPPA,
            beta_sign: 1.0,
        }
    }
}

impl Conventions {
    pub fn tampered_beta() -> Self {
        Self {
            beta_sign: -1.0,
            ..Self::default()
        }
    }

    /// Coefficient of the Kirillov form, `2 kappa`.
    pub fn kirillov_sign(&self) -> f64 {
        2.0 * self.kappa
    }

    /// Coefficient of the conjugacy-class form, `-2 kappa`.
    pub fn tau_sign(&self) -> f64 {
        -2.0 * self.kappa
    }
}
