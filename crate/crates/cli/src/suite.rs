//! The fixed example-reproduction battery behind `mudich paper-examples`.
//!
//! Every sub-check reproduces a certificate, constant, spectrum or hull
//! verdict for the three catalog examples (polynomial decay, quadratic ramp,
//! oscillatory damping) plus the rate-ordering and translated-limit checks.
//! [`Corruption`] deliberately breaks exactly one sub-check's input or
//! arithmetic; the mutation tests use it to show the battery is not vacuous.

use serde::Serialize;

use mudich_core::compare::{
    classify, compare_strong, dyadic_schedule, translated_limit_probe, ExponentGrid, RateClass,
    Relation, TranslatedLimit,
};
use mudich_core::dichotomy::{
    propagate_dichotomy, verify_dichotomy, verify_growth, DichotomyCertificate,
    GrowthCertificate, Projector, VERIFY_TOL_CLOSED,
};
use mudich_core::grid::sgn;
use mudich_core::hull::{
    bounded_solutions_probe, classify_limit_behavior, pointwise_limit_probe, uniform_local_integrability,
    ClassifyConfig, HullCertificates, LimitPrediction, LimitVerdict, OrbitProbe,
};
use mudich_core::spectrum::{estimate_spectrum, ExtendedReal, SpectrumEstimate};
use mudich_core::system::translate_system;
use mudich_core::{CoreResult, GrowthRate, LinearSystem, PairGrid, WindowSchedule};

const NUE_LAMBDA: f64 = 1.0;
const NUE_ETA: f64 = 0.2;
const SPECTRUM_TOL: f64 = 1e-2;

/// Deliberate single-site corruptions for the mutation tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corruption {
    None,
    /// Halve K in the oscillatory-damping dichotomy check: on the log scale
    /// this subtracts ln 2 from every margin of that check.
    HalveNueK,
    /// Flip the sign of alpha in the same certificate; the certificate
    /// invariant alpha < 0 rejects it (a positive alpha would only weaken the
    /// bound, so validation is exactly what catches this mutation).
    FlipNueAlphaSign,
    /// Propagate with exponent 2 instead of 3 in `K_tau`.
    WrongPropagationExponent,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubCheck {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<SubCheck>,
    pub all_pass: bool,
}

impl SuiteReport {
    pub fn check(&self, id: &str) -> Option<&SubCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failed_ids(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.as_str())
            .collect()
    }
}

struct Battery {
    checks: Vec<SubCheck>,
}

impl Battery {
    fn run(&mut self, id: &str, f: impl FnOnce() -> CoreResult<(bool, String)>) {
        let (pass, detail) = match f() {
            Ok((pass, detail)) => (pass, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(SubCheck {
            id: id.to_string(),
            pass,
            detail,
        });
    }
}

fn nue_system() -> LinearSystem {
    LinearSystem::oscillatory_damping(NUE_LAMBDA, NUE_ETA)
}

fn nue_dichotomy(alpha_sign: f64) -> CoreResult<DichotomyCertificate> {
    DichotomyCertificate::new(
        Projector::Identity,
        (2.0 * NUE_ETA).exp(),
        Some(alpha_sign * (-NUE_LAMBDA + NUE_ETA)),
        None,
        Some(2.0 * NUE_ETA),
        None,
        GrowthRate::Exponential,
    )
}

fn nue_growth() -> CoreResult<GrowthCertificate> {
    GrowthCertificate::new(
        (2.0 * NUE_ETA).exp(),
        NUE_LAMBDA + NUE_ETA,
        2.0 * NUE_ETA,
        GrowthRate::Exponential,
    )
}

fn poly_dichotomy() -> CoreResult<DichotomyCertificate> {
    DichotomyCertificate::new(
        Projector::Zero,
        1.0,
        None,
        Some(1.0),
        None,
        Some(0.0),
        GrowthRate::Polynomial,
    )
}

fn quad_dichotomy() -> CoreResult<DichotomyCertificate> {
    DichotomyCertificate::new(
        Projector::Zero,
        1.0,
        None,
        Some(1.0),
        None,
        Some(0.0),
        GrowthRate::quadratic(),
    )
}

fn grid() -> PairGrid {
    PairGrid::verification(50.0, 16, 32)
}

fn singleton_matches(est: &SpectrumEstimate, expected: f64) -> (bool, String) {
    if est.intervals.len() != 1 {
        return (false, format!("expected a singleton, got {:?}", est.intervals));
    }
    let iv = est.intervals[0];
    match (iv.lo, iv.hi) {
        (ExtendedReal::Finite(lo), ExtendedReal::Finite(hi)) => {
            let ok = (lo - expected).abs() <= SPECTRUM_TOL && (hi - expected).abs() <= SPECTRUM_TOL;
            (ok, format!("[{lo:.4}, {hi:.4}] vs {{{expected}}}"))
        }
        _ => (false, format!("expected finite endpoints, got [{}, {}]", iv.lo, iv.hi)),
    }
}

/// Run the reproduction battery (optionally with one corrupted site).
pub fn paper_examples_suite(corruption: Corruption) -> CoreResult<SuiteReport> {
    let mut b = Battery { checks: Vec::new() };
    let bohl = WindowSchedule::bohl_default();
    let comparison = WindowSchedule::comparison_default();

    // Certificate verification for the three examples.
    b.run("verify-poly-dichotomy", || {
        let rep = verify_dichotomy(&LinearSystem::poly_decay(), &poly_dichotomy()?, &grid())?;
        Ok((
            rep.pass && rep.worst_margin.abs() <= 1e-9,
            format!("margin {:.3e}", rep.worst_margin),
        ))
    });
    b.run("verify-quad-dichotomy", || {
        let rep = verify_dichotomy(&LinearSystem::abs_ramp(2.0), &quad_dichotomy()?, &grid())?;
        Ok((
            rep.pass && rep.worst_margin.abs() <= 1e-9,
            format!("margin {:.3e}", rep.worst_margin),
        ))
    });
    b.run("verify-nue-dichotomy", || {
        let alpha_sign = if corruption == Corruption::FlipNueAlphaSign {
            -1.0
        } else {
            1.0
        };
        let cert = nue_dichotomy(alpha_sign)?;
        let rep = verify_dichotomy(&nue_system(), &cert, &grid())?;
        let margin = if corruption == Corruption::HalveNueK {
            // Halving K subtracts ln 2 from the log-scale margin.
            rep.worst_margin - std::f64::consts::LN_2
        } else {
            rep.worst_margin
        };
        Ok((margin >= -VERIFY_TOL_CLOSED, format!("margin {margin:.3e}")))
    });
    b.run("verify-poly-growth", || {
        let cert = GrowthCertificate::new(1.0, 1.0, 0.0, GrowthRate::Polynomial)?;
        let rep = verify_growth(&LinearSystem::poly_decay(), &cert, &grid())?;
        Ok((
            rep.pass && rep.worst_margin.abs() <= 1e-9,
            format!("margin {:.3e}", rep.worst_margin),
        ))
    });
    b.run("verify-quad-growth", || {
        let cert = GrowthCertificate::new(1.0, 1.0, 0.0, GrowthRate::quadratic())?;
        let rep = verify_growth(&LinearSystem::abs_ramp(2.0), &cert, &grid())?;
        Ok((
            rep.pass && rep.worst_margin.abs() <= 1e-9,
            format!("margin {:.3e}", rep.worst_margin),
        ))
    });
    b.run("verify-nue-growth", || {
        let rep = verify_growth(&nue_system(), &nue_growth()?, &grid())?;
        Ok((rep.pass, format!("margin {:.3e}", rep.worst_margin)))
    });

    // Propagation constants at tau in {-3, 0, 3}.
    for tau in [-3.0, 0.0, 3.0] {
        let id = format!("propagate-nue-tau{tau}");
        b.run(&id, || {
            let cert = nue_dichotomy(1.0)?;
            let got = if corruption == Corruption::WrongPropagationExponent && tau == 3.0 {
                cert.log_k() + 2.0 * sgn(tau) * cert.penalty_exponent() * tau
            } else {
                propagate_dichotomy(&cert, tau)?.log_k()
            };
            // Example oracle: K_tau = e^{6 |tau| eta + 2 eta}.
            let expected = 6.0 * tau.abs() * NUE_ETA + 2.0 * NUE_ETA;
            Ok((
                (got - expected).abs() <= 1e-12,
                format!("log K_tau = {got:.12} vs {expected:.12}"),
            ))
        });
    }
    b.run("propagate-uniform-keeps-k", || {
        let mut ok = true;
        for tau in [-3.0, 3.0] {
            let k0 = propagate_dichotomy(&poly_dichotomy()?, tau)?.log_k();
            let k1 = propagate_dichotomy(&quad_dichotomy()?, tau)?.log_k();
            ok &= k0 == 0.0 && k1 == 0.0;
        }
        Ok((ok, "uniform K_tau = K bit-exactly".into()))
    });
    b.run("verify-propagated-nue", || {
        let mut worst = f64::INFINITY;
        for tau in [-3.0, 3.0] {
            let moved_sys = translate_system(&nue_system(), tau)?;
            let moved_cert = propagate_dichotomy(&nue_dichotomy(1.0)?, tau)?;
            let rep = verify_dichotomy(&moved_sys, &moved_cert, &PairGrid::verification(30.0, 14, 28))?;
            worst = worst.min(rep.worst_margin);
        }
        Ok((worst >= -VERIFY_TOL_CLOSED, format!("worst margin {worst:.3e}")))
    });

    // Spectra of the example systems under their natural rates.
    b.run("spectrum-poly", || {
        let est = estimate_spectrum(&LinearSystem::poly_decay(), &GrowthRate::Polynomial, &bohl)?;
        Ok(singleton_matches(&est, 1.0))
    });
    b.run("spectrum-quad", || {
        let est = estimate_spectrum(&LinearSystem::abs_ramp(2.0), &GrowthRate::quadratic(), &bohl)?;
        Ok(singleton_matches(&est, 1.0))
    });
    b.run("spectrum-diag", || {
        let sys = LinearSystem::constant_diagonal(&[-1.0, 2.0])?;
        let est = estimate_spectrum(&sys, &GrowthRate::Exponential, &bohl)?;
        if est.intervals.len() != 2 {
            return Ok((false, format!("{:?}", est.intervals)));
        }
        let ok = [(0usize, -1.0), (1usize, 2.0)].iter().all(|&(i, v)| {
            matches!(est.intervals[i].lo, ExtendedReal::Finite(x) if (x - v).abs() <= SPECTRUM_TOL)
                && matches!(est.intervals[i].hi, ExtendedReal::Finite(x) if (x - v).abs() <= SPECTRUM_TOL)
        });
        Ok((ok, format!("{:?}", est.intervals)))
    });
    b.run("spectrum-fast-collapse", || {
        let est = estimate_spectrum(&LinearSystem::constant(1.0), &GrowthRate::quadratic(), &bohl)?;
        Ok(singleton_matches(&est, 0.0))
    });
    b.run("spectrum-slow-drift", || {
        let est = estimate_spectrum(&LinearSystem::constant(1.0), &GrowthRate::Polynomial, &bohl)?;
        let ok = est.intervals.len() == 1
            && est.intervals[0].lo == ExtendedReal::PosInfinity
            && est.intervals[0].hi == ExtendedReal::PosInfinity;
        Ok((ok, format!("{:?}", est.intervals)))
    });

    // Hull probes and classifications for the revisited examples.
    b.run("hull-poly-limits", || {
        let sys = LinearSystem::poly_decay();
        let mut sup = 0.0f64;
        for sign in [1.0, -1.0] {
            let probe = OrbitProbe::new(&sys, dyadic_schedule(sign, 3, 26), 10.0, 201)?;
            let rep = pointwise_limit_probe(&probe, 1e-6)?;
            match rep.verdict {
                LimitVerdict::ConvergentTo { limit } => sup = sup.max(limit.sup_abs()),
                other => return Ok((false, format!("direction {sign}: {other:?}"))),
            }
        }
        Ok((sup < 1e-5, format!("limit sup {sup:.3e} (zero function)")))
    });
    b.run("hull-poly-bounded", || {
        let sys = LinearSystem::poly_decay();
        let certs = HullCertificates {
            dichotomy: None,
            growth: Some(GrowthCertificate::new(1.0, 1.0, 0.0, GrowthRate::Polynomial)?),
        };
        let out = classify_limit_behavior(&sys, &certs, &ClassifyConfig::default())?;
        let preds: Vec<_> = out.predictions.iter().map(|p| p.prediction).collect();
        let ok = out.falsifications.is_empty()
            && preds.contains(&LimitPrediction::LimitEquationsAllBounded)
            && preds.contains(&LimitPrediction::NoDichotomyOnHull);
        // Independent bounded-solutions witness on the sampled limit system.
        let probe = OrbitProbe::new(&sys, dyadic_schedule(1.0, 3, 26), 10.0, 201)?;
        let rep = pointwise_limit_probe(&probe, 1e-6)?;
        let bounded = match &rep.verdict {
            LimitVerdict::ConvergentTo { limit } => {
                bounded_solutions_probe(&limit.to_scalar_system("poly-limit")?, 20.0, None)?
                    .all_bounded
            }
            _ => false,
        };
        Ok((
            ok && bounded,
            format!("predictions {preds:?}, falsifications {:?}", out.falsifications),
        ))
    });
    b.run("hull-quad-diverges", || {
        let sys = LinearSystem::abs_ramp(2.0);
        for sign in [1.0, -1.0] {
            let probe = OrbitProbe::new(&sys, dyadic_schedule(sign, 3, 12), 10.0, 201)?;
            let rep = pointwise_limit_probe(&probe, 1e-6)?;
            if !matches!(rep.verdict, LimitVerdict::DivergesPointwise) {
                return Ok((false, format!("direction {sign}: {:?}", rep.verdict)));
            }
        }
        Ok((true, "diverges pointwise in both directions".into()))
    });
    b.run("hull-quad-classified", || {
        let certs = HullCertificates {
            dichotomy: Some(quad_dichotomy()?),
            growth: Some(GrowthCertificate::new(1.0, 1.0, 0.0, GrowthRate::quadratic())?),
        };
        let out = classify_limit_behavior(
            &LinearSystem::abs_ramp(2.0),
            &certs,
            &ClassifyConfig::default(),
        )?;
        let ok = out.falsifications.is_empty()
            && out
                .predictions
                .iter()
                .any(|p| p.prediction == LimitPrediction::EmptyLimitSets);
        Ok((
            ok,
            format!(
                "predictions {:?}, falsifications {:?}",
                out.predictions.iter().map(|p| p.prediction).collect::<Vec<_>>(),
                out.falsifications
            ),
        ))
    });
    b.run("hull-nue-uli", || {
        let rep = uniform_local_integrability(
            &nue_system(),
            1.0,
            &mudich_core::hull::default_uli_grid(),
        )?;
        Ok((
            rep.unbounded,
            format!("running sup {:.3e}, unbounded = {}", rep.sup_estimate, rep.unbounded),
        ))
    });
    b.run("hull-nue-classified", || {
        let certs = HullCertificates {
            dichotomy: Some(nue_dichotomy(1.0)?),
            growth: Some(nue_growth()?),
        };
        let out = classify_limit_behavior(&nue_system(), &certs, &ClassifyConfig::default())?;
        let ok = out.falsifications.is_empty()
            && out
                .predictions
                .iter()
                .any(|p| p.prediction == LimitPrediction::EmptyLimitSets)
            && !out.forward.verdict.is_convergent()
            && !out.backward.verdict.is_convergent();
        Ok((
            ok,
            format!(
                "predictions {:?}, falsifications {:?}",
                out.predictions.iter().map(|p| p.prediction).collect::<Vec<_>>(),
                out.falsifications
            ),
        ))
    });

    // Rate ordering, classification and translated limits.
    b.run("ordering-chain", || {
        let chain = [
            GrowthRate::Polynomial,
            GrowthRate::subexponential(0.3)?,
            GrowthRate::subexponential(0.7)?,
            GrowthRate::Exponential,
            GrowthRate::superexponential(1.5)?,
            GrowthRate::superexponential(2.5)?,
        ];
        for pair in chain.windows(2) {
            let v = compare_strong(&pair[1], &pair[0], &comparison)?;
            if v.relation != Relation::Faster {
                return Ok((
                    false,
                    format!("{:?} vs {:?}: {:?}", pair[1], pair[0], v.relation),
                ));
            }
        }
        Ok((true, "p << u_0.3 << u_0.7 << exp << s_1.5 << s_2.5".into()))
    });
    b.run("classify-rates", || {
        let g = ExponentGrid::default();
        let p = classify(&GrowthRate::Polynomial, &g, &comparison)?;
        let q = classify(&GrowthRate::quadratic(), &g, &comparison)?;
        let e = classify(&GrowthRate::Exponential, &g, &comparison)?;
        let ok = matches!(p, RateClass::Slow { .. })
            && matches!(q, RateClass::Fast { .. })
            && e == RateClass::ExponentialLike;
        Ok((ok, format!("p: {p:?}, q: {q:?}, exp: {e:?}")))
    });
    b.run("translated-limits", || {
        let u = GrowthRate::subexponential(0.5)?;
        let q = GrowthRate::quadratic();
        let sched = dyadic_schedule(1.0, 3, 12);
        let mut ok = true;
        for t in [-2.0, 1.0] {
            ok &= matches!(
                translated_limit_probe(&u, t, &sched)?,
                TranslatedLimit::FinitePositive { .. }
            );
        }
        ok &= translated_limit_probe(&q, 1.0, &sched)? == TranslatedLimit::DivergesToInfinity;
        ok &= translated_limit_probe(&q, -1.0, &sched)? == TranslatedLimit::DecaysToZero;
        ok &= translated_limit_probe(&q, 0.0, &sched)?
            == TranslatedLimit::FinitePositive { min: 1.0, max: 1.0 };
        Ok((ok, "subexponential bounded; superexponential splits at t = 0".into()))
    });

    let all_pass = b.checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        checks: b.checks,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_suite_is_all_pass_with_enough_checks() {
        let report = paper_examples_suite(Corruption::None).unwrap();
        assert!(report.checks.len() >= 18, "{} checks", report.checks.len());
        assert!(
            report.all_pass,
            "failed: {:?}",
            report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{}: {}", c.id, c.detail))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn corruptions_fail_exactly_their_target() {
        let cases = [
            (Corruption::HalveNueK, "verify-nue-dichotomy"),
            (Corruption::FlipNueAlphaSign, "verify-nue-dichotomy"),
            (Corruption::WrongPropagationExponent, "propagate-nue-tau3"),
        ];
        for (corruption, target) in cases {
            let report = paper_examples_suite(corruption).unwrap();
            assert_eq!(
                report.failed_ids(),
                vec![target],
                "corruption {corruption:?}"
            );
        }
    }
}
