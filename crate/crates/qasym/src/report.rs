//! Report assembly: the full analysis pipeline for one instance and the
//! seeded campaign driver. Reports serialize to JSON with complex entries as
//! `[re, im]` pairs; serialization round-trips byte-identically, and two runs
//! with identical spec, seed, and tolerances produce identical reports apart
//! from the wall-clock field.

use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dfa::{self, TheoremVerdict};
use crate::error::{Error, Result};
use crate::instance::{operator_to_mat, InstanceSpec, Kind, Mat};
use crate::markov;
use crate::op::{validate_ucp, OperatorSubspace, Picture, Superoperator, Tolerances, UcpReport};
use crate::pukanszky::{self, Prop5Report, TracialReport};
use crate::random;
use crate::spectral;

/// Format version of the report schema; bumped on any breaking change.
pub const FORMAT_VERSION: &str = "1";

pub fn complex_pairs(zs: &[C64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

/// A subspace of operator space: its dimension and orthonormal basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceSummary {
    pub dim: usize,
    pub basis: Vec<Mat>,
}

impl SubspaceSummary {
    pub fn from_subspace(v: &OperatorSubspace) -> Self {
        SubspaceSummary {
            dim: v.len(),
            basis: v.basis().iter().map(operator_to_mat).collect(),
        }
    }
}

/// Spectrum with its peripheral/bulk classification and gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<[f64; 2]>,
    pub peripheral: Vec<[f64; 2]>,
    pub bulk: Vec<[f64; 2]>,
    pub gap: f64,
}

/// Closure and center information of the decoherence-free algebra.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraSummary {
    pub dim: usize,
    pub is_star_closed: bool,
    pub is_product_closed: bool,
    pub contains_identity: bool,
    pub star_residual: f64,
    pub product_residual: f64,
    pub center_dim: usize,
    pub is_factor: bool,
}

impl AlgebraSummary {
    fn from_description(a: &dfa::AlgebraDescription) -> Self {
        AlgebraSummary {
            dim: a.subspace.len(),
            is_star_closed: a.is_star_closed,
            is_product_closed: a.is_product_closed,
            contains_identity: a.contains_identity,
            star_residual: a.star_residual,
            product_residual: a.product_residual,
            center_dim: a.center.len(),
            is_factor: a.is_factor,
        }
    }
}

/// Discrete-time (channel) analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelReport {
    pub ucp: UcpReport,
    pub spectrum: SpectrumSummary,
    pub attr: SubspaceSummary,
    pub fix_dim: usize,
    pub transient_dim: usize,
    pub dfa: AlgebraSummary,
    pub peripherally_automorphic: bool,
    pub pa_residual: f64,
    pub faithful: bool,
    pub sigma_min_eigenvalue: f64,
    pub hamana_defects: [f64; 2],
    pub verdicts: Vec<TheoremVerdict>,
}

/// Continuous-time (semigroup generator) analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub spectrum: SpectrumSummary,
    pub aliasing_detected: bool,
    pub ker_l_dim: usize,
    pub fix_unit_time_dim: usize,
    pub strict_inclusion: bool,
    pub dfa: AlgebraSummary,
    pub faithful: bool,
    pub sigma_min_eigenvalue: f64,
    pub attr_equals_dfa_residual: f64,
    pub unitary_containment_residual: f64,
    pub gauge_invariance_residual: f64,
    pub verdicts: Vec<TheoremVerdict>,
}

/// Truncated crossed-product analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PukanszkyReport {
    pub structure: Prop5Report,
    pub tracial: TracialReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ReportBody {
    Channel(ChannelReport),
    Generator(GeneratorReport),
    Pukanszky(PukanszkyReport),
}

/// Everything produced by one analysis run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub format_version: String,
    pub artifact_version: String,
    pub spec: InstanceSpec,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub consistent: bool,
    pub body: ReportBody,
    /// Wall-clock milliseconds; the only nondeterministic field.
    pub wall_clock_ms: f64,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))
    }

    /// Zero the wall-clock field; used when comparing reports for
    /// determinism.
    pub fn strip_timing(&mut self) {
        self.wall_clock_ms = 0.0;
    }
}

fn channel_body(s: &Superoperator, tol: &Tolerances) -> Result<(ChannelReport, bool)> {
    let ucp = validate_ucp(s, tol)?;
    if !ucp.is_ucp() {
        return Err(Error::InvalidInput(format!(
            "instance is not a unital completely positive map \
             (min Choi eigenvalue {:.3e}, unitality residual {:.3e})",
            ucp.min_choi_eigenvalue, ucp.unitality_residual
        )));
    }
    let analysis = spectral::analyze(s, tol)?;
    let ndesc = dfa::dfa_discrete(s, tol)?;
    let (pa, pa_residual) = dfa::is_peripherally_automorphic(s, &analysis.attr, tol)?;
    let (faithful, lam_min) = dfa::is_faithful(s, tol)?;
    let p = spectral::peripheral_projection(s, tol)?;
    let hamana = dfa::hamana_check(&p, 0x4a)?;

    let verdicts = vec![
        dfa::check_theorem_faithful(s, tol)?,
        dfa::check_theorem_pa(s, tol)?,
    ];
    let consistent = verdicts.iter().all(|v| v.consistent)
        && hamana.0.max(hamana.1) <= 1e-7;

    Ok((
        ChannelReport {
            ucp,
            spectrum: SpectrumSummary {
                eigenvalues: complex_pairs(&analysis.eigenvalues),
                peripheral: complex_pairs(&analysis.peripheral),
                bulk: complex_pairs(&analysis.bulk),
                gap: analysis.gap,
            },
            attr: SubspaceSummary::from_subspace(&analysis.attr),
            fix_dim: analysis.fix.len(),
            transient_dim: analysis.transient.len(),
            dfa: AlgebraSummary::from_description(&ndesc),
            peripherally_automorphic: pa,
            pa_residual,
            faithful,
            sigma_min_eigenvalue: lam_min,
            hamana_defects: [hamana.0, hamana.1],
            verdicts,
        },
        consistent,
    ))
}

fn generator_body(
    g: &markov::GKLSGenerator,
    tol: &Tolerances,
    seed: u64,
) -> Result<(GeneratorReport, bool)> {
    let s_l = markov::gkls_superop(g)?;
    let (eigs, peripheral, bulk, gap) = markov::generator_spectrum_classify(&s_l, tol)?;
    let aliasing = markov::detect_aliasing(&peripheral);
    let fix = markov::semigroup_fix(&s_l, tol)?;
    let ndesc = markov::dfa_markov(g, tol)?;
    let faith = markov::semigroup_faithful_given(g, tol, &ndesc.subspace)?;
    let containment =
        markov::unitary_containment_check(g, &ndesc.subspace, &[0.1, 0.7, 1.3])?;

    // Gauge invariance: a seeded random scalar shift of every jump must leave
    // the generator — and therefore its algebra — unchanged.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6761756765);
    let shifts: Vec<C64> = g
        .jumps()
        .iter()
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let gauge_residual = if shifts.is_empty() {
        0.0
    } else {
        let g2 = markov::gauge_transform(g, &shifts, rng.random::<f64>() - 0.5)?;
        let n2 = markov::dfa_markov(&g2, tol)?;
        n2.subspace.equality_residual(&ndesc.subspace)?
    };

    let mut verdicts = Vec::new();
    {
        let mut residuals = std::collections::BTreeMap::new();
        residuals.insert("sigma_min_eigenvalue".into(), faith.sigma_min_eigenvalue);
        residuals.insert("attr_equals_dfa".into(), faith.attr_equals_dfa_residual);
        verdicts.push(TheoremVerdict::from_parts(
            "faithful semigroup has attractor equal to its decoherence-free algebra",
            faith.faithful,
            faith.attr_equals_dfa_residual <= 1e-7,
            residuals,
        ));
    }
    {
        let mut residuals = std::collections::BTreeMap::new();
        residuals.insert("max_deviation".into(), containment);
        verdicts.push(TheoremVerdict::from_parts(
            "semigroup acts on its algebra by the Hamiltonian unitary group",
            true,
            containment <= 1e-7,
            residuals,
        ));
    }
    {
        let mut residuals = std::collections::BTreeMap::new();
        residuals.insert("algebra_residual".into(), gauge_residual);
        verdicts.push(TheoremVerdict::from_parts(
            "decoherence-free algebra is gauge-invariant",
            true,
            gauge_residual <= 1e-8,
            residuals,
        ));
    }
    let consistent = verdicts.iter().all(|v| v.consistent);

    Ok((
        GeneratorReport {
            spectrum: SpectrumSummary {
                eigenvalues: complex_pairs(&eigs),
                peripheral: complex_pairs(&peripheral),
                bulk: complex_pairs(&bulk),
                gap,
            },
            aliasing_detected: aliasing,
            ker_l_dim: fix.ker_l.len(),
            fix_unit_time_dim: fix.fix_unit_time.len(),
            strict_inclusion: fix.strict,
            dfa: AlgebraSummary::from_description(&ndesc),
            faithful: faith.faithful,
            sigma_min_eigenvalue: faith.sigma_min_eigenvalue,
            attr_equals_dfa_residual: faith.attr_equals_dfa_residual,
            unitary_containment_residual: containment,
            gauge_invariance_residual: gauge_residual,
            verdicts,
        },
        consistent,
    ))
}

/// Run the full pipeline appropriate to the instance kind.
pub fn run_analysis(spec: &InstanceSpec, tol: &Tolerances) -> Result<AnalysisReport> {
    tol.validate()?;
    spec.validate()?;
    let start = Instant::now();
    let seed = spec.seed;

    let (body, consistent) = match spec.kind {
        Kind::Channel => {
            let s = spec.superop()?;
            let (b, ok) = channel_body(&s, tol)?;
            (ReportBody::Channel(b), ok)
        }
        Kind::Generator => {
            let g = spec.generator_payload()?;
            let (b, ok) = generator_body(&g, tol, seed.unwrap_or(0))?;
            (ReportBody::Generator(b), ok)
        }
        Kind::Pukanszky => {
            let cfg = spec.truncation_config()?;
            let structure = pukanszky::verify_prop5(&cfg, tol)?;
            let tracial = pukanszky::tracial_check(&cfg, seed.unwrap_or(0))?;
            let ok = structure.m_is_factor && structure.faithful && structure.duality_holds;
            (ReportBody::Pukanszky(PukanszkyReport { structure, tracial }), ok)
        }
    };

    Ok(AnalysisReport {
        format_version: FORMAT_VERSION.into(),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        spec: spec.clone(),
        tolerances: *tol,
        seed,
        consistent,
        body,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Mixed-unitary channels (always faithful).
    Unital,
    /// Stinespring-isometry maps (generically non-faithful).
    Generic,
    /// Gaussian semigroup generators.
    Gkls,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unital" => Ok(Family::Unital),
            "generic" => Ok(Family::Generic),
            "gkls" => Ok(Family::Gkls),
            other => Err(Error::InvalidInput(format!(
                "unknown family `{other}` (expected unital|generic|gkls)"
            ))),
        }
    }
}

/// One campaign trial, keyed by its index and derived seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub consistent: bool,
    pub faithful: bool,
    pub peripherally_automorphic: Option<bool>,
    pub max_residual: f64,
}

/// Aggregated campaign outcome; deterministic given the master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub format_version: String,
    pub artifact_version: String,
    pub family: Family,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub results: Vec<TrialSummary>,
    pub max_residual: f64,
    /// Seeds of discovered instances that are not peripherally automorphic,
    /// kept for reproduction in isolation.
    pub non_pa_seeds: Vec<u64>,
    pub inconsistent_seeds: Vec<u64>,
    pub consistent: bool,
    pub wall_clock_ms: f64,
}

impl CampaignSummary {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("summary serialization failed: {e}")))
    }

    pub fn strip_timing(&mut self) {
        self.wall_clock_ms = 0.0;
    }
}

fn verdict_max_residual(verdicts: &[TheoremVerdict]) -> f64 {
    // Diagnostic magnitudes (eigenvalues, singular values) live in the same
    // map as the defect residuals but are O(1) by design, and the defects of
    // a conclusion are only meant to be small when the hypothesis holds;
    // everything else stays out of the aggregate.
    verdicts
        .iter()
        .filter(|v| v.hypothesis_holds)
        .flat_map(|v| v.residuals.iter())
        .filter(|(name, _)| !name.contains("eigenvalue") && !name.contains("singular_value"))
        .fold(0.0f64, |a, (_, &b)| a.max(b))
}

/// Generate, analyze, and aggregate `trials` seeded instances. Each trial's
/// seed derives from the master seed alone, so any instance can be
/// regenerated in isolation; aggregation is ordered by trial index.
pub fn campaign(
    family: Family,
    dim: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CampaignSummary> {
    if trials < 1 {
        return Err(Error::InvalidInput("campaign needs at least one trial".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidInput("campaign dimension must be ≥ 2".into()));
    }
    let start = Instant::now();
    let mut seed_rng = ChaCha8Rng::seed_from_u64(seed);
    let trial_seeds: Vec<u64> = (0..trials).map(|_| seed_rng.random()).collect();

    let mut results = Vec::with_capacity(trials);
    let mut max_residual = 0.0f64;
    let mut non_pa_seeds = Vec::new();
    let mut inconsistent_seeds = Vec::new();

    for (trial, &ts) in trial_seeds.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(ts);
        let spec = match family {
            Family::Unital => {
                let k = rng.random_range(1..=4);
                let kraus = random::random_unital_channel(dim, k, ts)?;
                InstanceSpec::channel_from_kraus(&kraus, Picture::Heisenberg, Some(ts))
            }
            Family::Generic => {
                let env = rng.random_range(1..=dim);
                let kraus = random::random_ucp(dim, env, ts)?;
                InstanceSpec::channel_from_kraus(&kraus, Picture::Heisenberg, Some(ts))
            }
            Family::Gkls => {
                let jumps = rng.random_range(1..=3);
                InstanceSpec::generator(&random::random_gkls(dim, jumps, ts)?, Some(ts))
            }
        };
        let report = run_analysis(&spec, tol).map_err(|e| match e {
            Error::InvalidInput(m) | Error::Internal(m) => {
                Error::Internal(format!("trial {trial} (seed {ts}): {m}"))
            }
            Error::Numerical(m) => Error::Numerical(format!("trial {trial} (seed {ts}): {m}")),
            Error::PropertyViolation(m) => {
                Error::PropertyViolation(format!("trial {trial} (seed {ts}): {m}"))
            }
            other => other,
        })?;

        let (faithful, pa, residual) = match &report.body {
            ReportBody::Channel(c) => (
                c.faithful,
                Some(c.peripherally_automorphic),
                verdict_max_residual(&c.verdicts),
            ),
            ReportBody::Generator(g) => {
                (g.faithful, None, verdict_max_residual(&g.verdicts))
            }
            ReportBody::Pukanszky(_) => (true, None, 0.0),
        };
        if pa == Some(false) {
            non_pa_seeds.push(ts);
        }
        if !report.consistent {
            inconsistent_seeds.push(ts);
        }
        max_residual = max_residual.max(residual);
        results.push(TrialSummary {
            trial,
            seed: ts,
            consistent: report.consistent,
            faithful,
            peripherally_automorphic: pa,
            max_residual: residual,
        });
    }

    let consistent = inconsistent_seeds.is_empty();
    Ok(CampaignSummary {
        format_version: FORMAT_VERSION.into(),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        family,
        dim,
        trials,
        seed,
        tolerances: *tol,
        results,
        max_residual,
        non_pa_seeds,
        inconsistent_seeds,
        consistent,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::Operator;

    fn dephasing_spec() -> InstanceSpec {
        // Φ(X) = (1−p) X + p ZXZ at p = 0.25: off-diagonal multiplier 0.5.
        let a = 0.75f64.sqrt();
        let b = 0.25f64.sqrt();
        let kraus = vec![
            Operator::identity(2).scale_re(a),
            Operator::pauli_z().scale_re(b),
        ];
        InstanceSpec::channel_from_kraus(&kraus, Picture::Heisenberg, Some(1))
    }

    #[test]
    fn dephasing_report() {
        let tol = Tolerances::default();
        let report = run_analysis(&dephasing_spec(), &tol).unwrap();
        assert!(report.consistent);
        let ReportBody::Channel(c) = &report.body else {
            panic!("expected channel body")
        };
        assert!((c.spectrum.gap - 0.5).abs() < 1e-10);
        assert_eq!(c.attr.dim, 2);
        assert_eq!(c.dfa.dim, 2);
        assert!(c.faithful);
        assert!(c.peripherally_automorphic);
    }

    #[test]
    fn report_roundtrip_is_byte_identical() {
        let tol = Tolerances::default();
        let report = run_analysis(&dephasing_spec(), &tol).unwrap();
        let json = report.to_json().unwrap();
        let parsed: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.to_json().unwrap(), json);
    }

    #[test]
    fn strict_inclusion_flagged_for_resonant_hamiltonian() {
        use std::f64::consts::PI;
        let tol = Tolerances::default();
        let h = Operator::diag(&[C64::new(0.0, 0.0), C64::new(2.0 * PI, 0.0)]);
        let g = markov::GKLSGenerator::new(h, vec![]).unwrap();
        let spec = InstanceSpec::generator(&g, Some(0));
        let report = run_analysis(&spec, &tol).unwrap();
        let ReportBody::Generator(gr) = &report.body else {
            panic!("expected generator body")
        };
        assert_eq!(gr.ker_l_dim, 2);
        assert_eq!(gr.fix_unit_time_dim, 4);
        assert!(gr.strict_inclusion);
        assert!(gr.aliasing_detected);
    }

    #[test]
    fn truncation_report() {
        let tol = Tolerances::default();
        let spec = InstanceSpec::pukanszky(1, 0.3, None);
        let report = run_analysis(&spec, &tol).unwrap();
        let ReportBody::Pukanszky(p) = &report.body else {
            panic!("expected truncation body")
        };
        assert_eq!(p.structure.dim_m, 4);
        assert!(p.structure.m_is_factor);
        assert!(!p.tracial.tracial);
    }

    #[test]
    fn campaign_is_deterministic_and_consistent() {
        let tol = Tolerances::default();
        let mut a = campaign(Family::Unital, 2, 3, 7, &tol).unwrap();
        let mut b = campaign(Family::Unital, 2, 3, 7, &tol).unwrap();
        assert!(a.consistent);
        a.strip_timing();
        b.strip_timing();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());

        assert!(campaign(Family::Unital, 2, 0, 7, &tol).is_err());
    }

    #[test]
    fn generic_campaign_runs() {
        let tol = Tolerances::default();
        let s = campaign(Family::Generic, 2, 3, 11, &tol).unwrap();
        assert!(s.consistent);
        let s = campaign(Family::Gkls, 2, 2, 5, &tol).unwrap();
        assert!(s.consistent);
    }
}
