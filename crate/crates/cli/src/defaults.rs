//! Stock experiment configurations with the tuned (lambda, rho) pairs for
//! every benchmark and basis.

use std::path::PathBuf;

use rotpc_core::{PolynomialFamily, ProblemKind, ProblemSpec, ValidationSet};

use crate::config::{ExperimentConfig, ExperimentSection, MethodConfig, ProblemOverrides};
use crate::error::{CliError, Result};

/// Method labels in table order.
pub const METHODS: [&str; 5] = ["l1", "lhalf", "tl1", "erf", "l1-l2"];

/// `(lambda, rho)` for each entry of [`METHODS`].
pub fn parameter_table(kind: ProblemKind, family: PolynomialFamily) -> Option<[(f64, f64); 5]> {
    use PolynomialFamily::*;
    use ProblemKind::*;
    let t = match (kind, family) {
        (Ridge, Legendre) => [(6e-4, 6e-1), (5e-3, 1.6e1), (1e-8, 1e-7), (1.5e-1, 1.6e3), (3e-4, 5e-1)],
        (Ridge, Hermite) => [(1e-2, 1e-1), (1.8e-2, 6e-1), (1e-8, 1e-7), (1e0, 1.2e1), (1e-4, 1e-2)],
        (Ridge, Laguerre) => [(5e-2, 5e0), (6e-2, 1.2e0), (1e-8, 1e-7), (1.1e0, 1.5e3), (5e-1, 1e0)],
        (Elliptic, Legendre) => [(6e-4, 1e-1), (8e-5, 1e2), (1e-8, 1e-7), (2e-2, 2e4), (1e-3, 6e-2)],
        (Elliptic, Hermite) => [(1.3e-3, 3e0), (3e-4, 1.2e2), (1e-8, 1e-7), (9e-3, 1.3e3), (1.9e-3, 2.3e-2)],
        (Kdv, Legendre) => [(1e-4, 1e-2), (5e-3, 1.6e1), (1e-8, 1e-7), (1.5e-1, 1.6e3), (1e-4, 1e-2)],
        (Kdv, Hermite) => [(1e-2, 4e-4), (1.8e-2, 6e-1), (1e-8, 1e-7), (1e0, 1.2e1), (1e-4, 1e-2)],
        (HighDim, Legendre) => [(1.2e0, 5e-2), (1e-1, 1e2), (1e-6, 1e-7), (1.5e-1, 1.6e3), (5e-2, 1e2)],
        (HighDim, Hermite) => [(1e-2, 1e-3), (5e-2, 1e2), (4e-6, 1e-7), (5e-2, 1e2), (1e-3, 9e-2)],
        _ => return None,
    };
    Some(t)
}

/// Bases with tuned parameters for `kind`.
pub fn supported_families(kind: ProblemKind) -> &'static [PolynomialFamily] {
    use PolynomialFamily::*;
    match kind {
        ProblemKind::Ridge => &[Legendre, Hermite, Laguerre],
        _ => &[Legendre, Hermite],
    }
}

/// Default experiment for `kind` expanded in `family`.
pub fn emit_defaults(kind: ProblemKind, family: PolynomialFamily) -> Result<ExperimentConfig> {
    let table = parameter_table(kind, family).ok_or_else(|| {
        CliError::Config(format!("no tuned parameters for {kind} with the {family} basis"))
    })?;
    let spec = ProblemSpec::defaults(kind);
    // (order, sample sweep, solves per trial, tol_e, trials)
    let (order, samples, l_max, tol_e, trials) = match kind {
        ProblemKind::Ridge => (3, vec![100, 120, 140, 160, 180], 10, 0.0, 20),
        ProblemKind::Elliptic => (3, vec![120, 140, 160, 180, 200, 220], 4, 1e-3, 20),
        ProblemKind::Kdv => (4, vec![80, 100, 120, 140, 160], 4, 1e-3, 20),
        ProblemKind::HighDim => (2, vec![600, 800, 1000], 4, 1e-3, 5),
    };
    let methods = METHODS
        .iter()
        .zip(table)
        .map(|(&label, (lambda, rho))| MethodConfig {
            label: label.to_string(),
            regularizer: label.to_string(),
            lambda,
            rho,
            gamma: None,
            sigma: None,
            l_max: None,
        })
        .collect();
    Ok(ExperimentConfig {
        experiment: ExperimentSection {
            problem: kind.name().to_string(),
            basis: family.name().to_string(),
            dimension: spec.dimension,
            order,
            samples,
            l_max,
            tol_e,
            trials,
            base_seed: 1,
            validation_size: ValidationSet::DEFAULT_SIZE,
            validation_seed: 0x5eed,
            admm_max_iter: None,
            admm_tol: rotpc_core::AdmmConfig::DEFAULT_TOL,
            workers: 0,
            output_dir: PathBuf::from(format!("results/{kind}-{family}")),
            timing: false,
            coherence: true,
        },
        problem: ProblemOverrides::default(),
        methods,
    })
}

/// Config text with a short descriptive header.
pub fn render(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = format!(
        "# {} benchmark, {} basis, d = {}, p = {}.\n",
        cfg.experiment.problem, cfg.experiment.basis, cfg.experiment.dimension, cfg.experiment.order
    );
    out.push_str("# l_max counts regression solves, so l_max = 1 is the unrotated fit.\n");
    if cfg.experiment.problem == ProblemKind::Kdv.name() {
        out.push_str(
            "# The lhalf, tl1 and erf pairs are identical to the ridge defaults and may not be\n\
             # tuned for this problem.\n",
        );
    }
    out.push('\n');
    out.push_str(&cfg.to_toml_string()?);
    Ok(out)
}

/// File stem used for the shipped config of `(kind, family)`.
pub fn config_name(kind: ProblemKind, family: PolynomialFamily) -> String {
    format!("{kind}-{family}.toml")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn method<'a>(cfg: &'a ExperimentConfig, label: &str) -> &'a MethodConfig {
        cfg.methods.iter().find(|m| m.label == label).unwrap()
    }

    #[test]
    fn tabulated_spot_values() {
        let ridge = emit_defaults(ProblemKind::Ridge, PolynomialFamily::Legendre).unwrap();
        let l1 = method(&ridge, "l1");
        assert_eq!((l1.lambda, l1.rho), (6e-4, 6e-1));
        let l12 = method(&ridge, "l1-l2");
        assert_eq!((l12.lambda, l12.rho), (3e-4, 5e-1));
        let ell = emit_defaults(ProblemKind::Elliptic, PolynomialFamily::Legendre).unwrap();
        let tl1 = method(&ell, "tl1");
        assert_eq!((tl1.lambda, tl1.rho), (1e-8, 1e-7));
        let erf = method(&ell, "erf");
        assert_eq!((erf.lambda, erf.rho), (2e-2, 2e4));
        let hd = emit_defaults(ProblemKind::HighDim, PolynomialFamily::Legendre).unwrap();
        let lh = method(&hd, "lhalf");
        assert_eq!((lh.lambda, lh.rho), (1e-1, 1e2));
    }

    #[test]
    fn every_supported_default_validates() {
        for kind in ProblemKind::ALL {
            for &family in supported_families(kind) {
                let cfg = emit_defaults(kind, family).unwrap();
                cfg.validate().unwrap();
                assert_eq!(cfg.methods.len(), 5);
                let text = render(&cfg).unwrap();
                assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
            }
        }
        assert!(emit_defaults(ProblemKind::Elliptic, PolynomialFamily::Laguerre).is_err());
    }

    #[test]
    fn basis_sizes_match_benchmarks() {
        let expect = [
            (ProblemKind::Ridge, 455),
            (ProblemKind::Elliptic, 816),
            (ProblemKind::Kdv, 1001),
            (ProblemKind::HighDim, 5151),
        ];
        for (kind, n) in expect {
            let cfg = emit_defaults(kind, PolynomialFamily::Legendre).unwrap();
            let e = &cfg.experiment;
            assert_eq!(rotpc_core::basis_size(e.dimension, e.order), Some(n));
        }
    }
}
