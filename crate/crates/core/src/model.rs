//! Physical parameters of the dimer ensemble and the derived cavity scalars.
//!
//! All energies are dimensionless, measured in units of the bare cavity
//! frequency ω. The only place physical units appear is the feasibility
//! estimator in [`crate::cli`].

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Result};

/// Moment of inertia of a single dimer.
///
/// `Frozen` is the infinitely heavy rotor: the kinetic term vanishes and
/// `Δ' = Δ` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inertia {
    Finite(f64),
    Frozen,
}

impl Inertia {
    /// `1 / (2J)`, zero for frozen rotors.
    pub fn kinetic_prefactor(self) -> f64 {
        match self {
            Inertia::Finite(j) => 0.5 / j,
            Inertia::Frozen => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Inertia::Finite(j) => j,
            Inertia::Frozen => f64::INFINITY,
        }
    }

    pub fn from_value(j: f64) -> Self {
        if j.is_infinite() && j > 0.0 {
            Inertia::Frozen
        } else {
            Inertia::Finite(j)
        }
    }
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inertia::Finite(j) => write!(f, "{j}"),
            Inertia::Frozen => f.write_str("inf"),
        }
    }
}

impl Serialize for Inertia {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Inertia::Finite(j) => s.serialize_f64(*j),
            Inertia::Frozen => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Inertia {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(j) => Ok(Inertia::Finite(j)),
            Raw::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinite" | "infinity" | "frozen" => Ok(Inertia::Frozen),
                other => other
                    .parse::<f64>()
                    .map(Inertia::from_value)
                    .map_err(|_| serde::de::Error::custom(format!("bad inertia `{t}`"))),
            },
        }
    }
}

/// How the light-matter coupling scales with the number of dimers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingScaling {
    /// Mode volume grows with N; the coupling carries the 1/√N factor.
    #[default]
    ConstantDensity,
    /// Fixed mode volume; the 1/√N factor is cancelled, i.e. g → g√N.
    ConstantVolume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta: f64,
    pub g: f64,
    pub b_field: f64,
    pub inertia: Inertia,
    pub n_dimers: usize,
    #[serde(default)]
    pub coupling_scaling: CouplingScaling,
}

/// Circular-mode frequencies and the combinations that recur in every
/// analytic regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScalars {
    pub omega_r: f64,
    pub omega_l: f64,
    pub delta_prime: f64,
    pub q: f64,
}

impl ModelParams {
    pub fn new(delta: f64, g: f64, b_field: f64, inertia: Inertia, n_dimers: usize) -> Self {
        Self {
            delta,
            g,
            b_field,
            inertia,
            n_dimers,
            coupling_scaling: CouplingScaling::ConstantDensity,
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b_field = b;
        self
    }

    pub fn with_inertia(mut self, inertia: Inertia) -> Self {
        self.inertia = inertia;
        self
    }

    pub fn with_n_dimers(mut self, n: usize) -> Self {
        self.n_dimers = n;
        self
    }

    pub fn with_scaling(mut self, scaling: CouplingScaling) -> Self {
        self.coupling_scaling = scaling;
        self
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(domain("delta", format!("must be finite and > 0, got {}", self.delta)));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(domain("g", format!("must be finite and >= 0, got {}", self.g)));
        }
        if !self.b_field.is_finite() {
            return Err(domain("b_field", "must be finite"));
        }
        if let Inertia::Finite(j) = self.inertia {
            if !(j > 0.0) || j.is_nan() {
                return Err(domain("inertia", format!("must be > 0, got {j}")));
            }
        }
        if self.n_dimers == 0 {
            return Err(domain("n_dimers", "must be at least 1"));
        }
        Ok(self)
    }

    /// Coupling that enters the Hamiltonian next to the explicit 1/√N.
    pub fn effective_coupling(&self) -> f64 {
        match self.coupling_scaling {
            CouplingScaling::ConstantDensity => self.g,
            CouplingScaling::ConstantVolume => self.g * (self.n_dimers as f64).sqrt(),
        }
    }

    pub fn derived(&self) -> DerivedScalars {
        let (omega_r, omega_l) = circular_frequencies(self.b_field);
        DerivedScalars {
            omega_r,
            omega_l,
            delta_prime: self.delta + self.inertia.kinetic_prefactor(),
            q: self.effective_coupling() / (8.0 * (omega_r + omega_l)).sqrt(),
        }
    }
}

/// `(ω_r, ω_l) = (√(1+B²) + B, √(1+B²) − B)`.
///
/// The smaller root is evaluated as `1/(√(1+B²) + |B|)` so that the product
/// stays exactly one for large |B|.
pub fn circular_frequencies(b: f64) -> (f64, f64) {
    let root = b.hypot(1.0);
    let big = root + b.abs();
    let small = 1.0 / big;
    if b >= 0.0 {
        (big, small)
    } else {
        (small, big)
    }
}

/// Field B at which the left mode has frequency `omega_l` (inverse of
/// `ω_l = √(1+B²) − B`).
pub fn field_for_omega_l(omega_l: f64) -> f64 {
    (1.0 / omega_l - omega_l) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_params() -> ModelParams {
        ModelParams::new(1.0, 0.1, 0.1, Inertia::Finite(1e6), 1)
    }

    #[test]
    fn validate_accepts_reference_point() {
        assert!(base_params().validate().is_ok());
    }

    #[test]
    fn validate_names_the_field() {
        let mut p = base_params();
        p.delta = 0.0;
        match p.validate() {
            Err(crate::Error::Domain { field, .. }) => assert_eq!(field, "delta"),
            other => panic!("{other:?}"),
        }
        let p = base_params().with_g(-0.5);
        match p.validate() {
            Err(crate::Error::Domain { field, .. }) => assert_eq!(field, "g"),
            other => panic!("{other:?}"),
        }
        let p = base_params().with_n_dimers(0);
        assert!(p.validate().is_err());
        let p = base_params().with_inertia(Inertia::Finite(-1.0));
        assert!(p.validate().is_err());
    }

    #[test]
    fn derived_values() {
        let d = base_params().with_b(0.0).derived();
        assert_eq!((d.omega_r, d.omega_l), (1.0, 1.0));

        let d = base_params().derived();
        // √1.01 ± 0.1
        assert!((d.omega_r - 1.104_987_562_112_089).abs() < 1e-12);
        assert!((d.omega_l - 0.904_987_562_112_089).abs() < 1e-12);
        assert!((d.delta_prime - (1.0 + 0.5e-6)).abs() < 1e-15);

        let d = base_params().with_g(4.0).with_b(0.0).derived();
        assert!((d.q - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frozen_rotor_has_bare_splitting() {
        let d = base_params().with_inertia(Inertia::Frozen).derived();
        assert_eq!(d.delta_prime, 1.0);
    }

    #[test]
    fn constant_volume_rescales_coupling() {
        let p = base_params()
            .with_n_dimers(4)
            .with_scaling(CouplingScaling::ConstantVolume);
        assert!((p.effective_coupling() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn inertia_json_round_trip() {
        let p = base_params().with_inertia(Inertia::Frozen);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"inf\""));
        let back: ModelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn omega_l_inverse() {
        for b in [0.0, 0.3, 2.0, 40.0] {
            let (_, wl) = circular_frequencies(b);
            assert!((field_for_omega_l(wl) - b).abs() < 1e-9 * (1.0 + b));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn product_is_one(b in -1e3f64..1e3) {
                let (wr, wl) = circular_frequencies(b);
                prop_assert!((wr * wl - 1.0).abs() < 1e-12);
                prop_assert!(((wr - wl) - 2.0 * b).abs() < 1e-12 * (1.0 + b.abs()));
            }

            #[test]
            fn mirror_symmetry(b in -100f64..100.0) {
                let (wr, wl) = circular_frequencies(b);
                let (wr_m, wl_m) = circular_frequencies(-b);
                prop_assert_eq!(wr, wl_m);
                prop_assert_eq!(wl, wr_m);
            }

            #[test]
            fn delta_prime_decreases_towards_delta(j1 in 1e-3f64..1e6, factor in 1.0f64..100.0) {
                let p1 = ModelParams::new(1.0, 0.1, 0.0, Inertia::Finite(j1), 1);
                let p2 = p1.with_inertia(Inertia::Finite(j1 * factor));
                let (a, b) = (p1.derived().delta_prime, p2.derived().delta_prime);
                prop_assert!(a >= b && b >= 1.0);
            }
        }
    }
}
