//! Instance files: a small JSON schema describing a channel, a generator, or
//! a truncated crossed-product configuration. Complex numbers are `[re, im]`
//! pairs and matrices are row-major nested arrays, which keeps the format
//! language-neutral and lossless at double precision.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::GKLSGenerator;
use crate::op::{Operator, Picture, Superoperator};
use crate::pukanszky::TruncationConfig;

/// A complex entry on disk: `[re, im]`.
pub type ComplexPair = [f64; 2];
/// A matrix on disk: row-major nested arrays of complex pairs.
pub type Mat = Vec<Vec<ComplexPair>>;

pub fn operator_to_mat(a: &Operator) -> Mat {
    let d = a.dim();
    (0..d)
        .map(|i| (0..d).map(|j| [a.array()[(i, j)].re, a.array()[(i, j)].im]).collect())
        .collect()
}

pub fn mat_to_operator(m: &Mat) -> Result<Operator> {
    let rows = m.len();
    if rows == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    let cols = m[0].len();
    if rows != cols {
        return Err(Error::InvalidInput(format!(
            "matrix must be square, got {rows}x{cols}"
        )));
    }
    let mut out = ndarray::Array2::<C64>::zeros((rows, cols));
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite entry at ({i}, {j})"
                )));
            }
            out[(i, j)] = C64::new(re, im);
        }
    }
    Operator::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Channel,
    Generator,
    Pukanszky,
}

/// One analysis instance as read from (or written to) disk. Exactly one
/// payload form must be present for the declared kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picture: Option<Picture>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Mat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superoperator: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<Vec<Mat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Weight family for the truncated construction, e.g. `"geometric:0.5"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceSpec {
    pub fn channel_from_kraus(kraus: &[Operator], picture: Picture, seed: Option<u64>) -> Self {
        InstanceSpec {
            kind: Kind::Channel,
            dim: Some(kraus[0].dim()),
            picture: Some(picture),
            kraus: Some(kraus.iter().map(operator_to_mat).collect()),
            superoperator: None,
            hamiltonian: None,
            jumps: None,
            n: None,
            lambda: None,
            weights: None,
            seed,
        }
    }

    pub fn generator(g: &GKLSGenerator, seed: Option<u64>) -> Self {
        InstanceSpec {
            kind: Kind::Generator,
            dim: Some(g.dim()),
            picture: None,
            kraus: None,
            superoperator: None,
            hamiltonian: Some(operator_to_mat(g.hamiltonian())),
            jumps: Some(g.jumps().iter().map(operator_to_mat).collect()),
            n: None,
            lambda: None,
            weights: None,
            seed,
        }
    }

    pub fn pukanszky(n: usize, lambda: f64, weights: Option<String>) -> Self {
        InstanceSpec {
            kind: Kind::Pukanszky,
            dim: None,
            picture: None,
            kraus: None,
            superoperator: None,
            hamiltonian: None,
            jumps: None,
            n: Some(n),
            lambda: Some(lambda),
            weights,
            seed: None,
        }
    }

    /// Schema-level validation: exactly one payload form, consistent
    /// dimensions, square matrices.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            Kind::Channel => {
                match (&self.kraus, &self.superoperator) {
                    (Some(_), Some(_)) => {
                        return Err(Error::InvalidInput(
                            "channel must carry either `kraus` or `superoperator`, not both".into(),
                        ))
                    }
                    (None, None) => {
                        return Err(Error::InvalidInput(
                            "channel carries neither `kraus` nor `superoperator`".into(),
                        ))
                    }
                    _ => {}
                }
                if self.hamiltonian.is_some() || self.jumps.is_some() || self.n.is_some() {
                    return Err(Error::InvalidInput(
                        "channel instance carries generator or truncation fields".into(),
                    ));
                }
                let d = self.dim.ok_or_else(|| {
                    Error::InvalidInput("channel instance requires `dim`".into())
                })?;
                if let Some(kraus) = &self.kraus {
                    if kraus.is_empty() {
                        return Err(Error::InvalidInput("empty Kraus list".into()));
                    }
                    for (i, m) in kraus.iter().enumerate() {
                        let k = mat_to_operator(m)?;
                        if k.dim() != d {
                            return Err(Error::InvalidInput(format!(
                                "Kraus operator {i} is {}x{}, expected {d}x{d}",
                                k.dim(),
                                k.dim()
                            )));
                        }
                    }
                }
                if let Some(m) = &self.superoperator {
                    if m.len() != d * d {
                        return Err(Error::InvalidInput(format!(
                            "superoperator has {} rows, expected {}",
                            m.len(),
                            d * d
                        )));
                    }
                    mat_to_operator(m)?;
                }
            }
            Kind::Generator => {
                if self.kraus.is_some() || self.superoperator.is_some() || self.n.is_some() {
                    return Err(Error::InvalidInput(
                        "generator instance carries channel or truncation fields".into(),
                    ));
                }
                let d = self.dim.ok_or_else(|| {
                    Error::InvalidInput("generator instance requires `dim`".into())
                })?;
                let h = self.hamiltonian.as_ref().ok_or_else(|| {
                    Error::InvalidInput("generator instance requires `hamiltonian`".into())
                })?;
                if mat_to_operator(h)?.dim() != d {
                    return Err(Error::InvalidInput("hamiltonian dimension mismatch".into()));
                }
                for (i, m) in self.jumps.as_deref().unwrap_or(&[]).iter().enumerate() {
                    if mat_to_operator(m)?.dim() != d {
                        return Err(Error::InvalidInput(format!(
                            "jump operator {i} dimension mismatch"
                        )));
                    }
                }
            }
            Kind::Pukanszky => {
                if self.kraus.is_some()
                    || self.superoperator.is_some()
                    || self.hamiltonian.is_some()
                    || self.jumps.is_some()
                {
                    return Err(Error::InvalidInput(
                        "truncation instance carries channel or generator fields".into(),
                    ));
                }
                self.truncation_config()?;
            }
        }
        Ok(())
    }

    /// The Heisenberg-picture superoperator of a channel instance.
    pub fn superop(&self) -> Result<Superoperator> {
        if self.kind != Kind::Channel {
            return Err(Error::InvalidInput("not a channel instance".into()));
        }
        if let Some(kraus) = &self.kraus {
            let ops: Vec<Operator> = kraus.iter().map(mat_to_operator).collect::<Result<_>>()?;
            // X ↦ Σ K* X K is simultaneously the Heisenberg action of the
            // family and the dual of the Schrödinger action of the same
            // family, so both pictures produce the same matrix here.
            Superoperator::from_kraus(&ops, Picture::Heisenberg)
        } else if let Some(m) = &self.superoperator {
            let a = mat_to_operator(m)?;
            let d2 = a.dim();
            let d = (d2 as f64).sqrt().round() as usize;
            if d * d != d2 {
                return Err(Error::InvalidInput(
                    "superoperator size is not a perfect square".into(),
                ));
            }
            let s = Superoperator::new(d, a.array().clone())?;
            match self.picture {
                Some(Picture::Schrodinger) => Ok(s.hs_adjoint()),
                _ => Ok(s),
            }
        } else {
            Err(Error::InvalidInput("channel instance has no payload".into()))
        }
    }

    /// The generator of a generator instance.
    pub fn generator_payload(&self) -> Result<GKLSGenerator> {
        if self.kind != Kind::Generator {
            return Err(Error::InvalidInput("not a generator instance".into()));
        }
        let h = mat_to_operator(self.hamiltonian.as_ref().ok_or_else(|| {
            Error::InvalidInput("generator instance requires `hamiltonian`".into())
        })?)?;
        let jumps: Vec<Operator> = self
            .jumps
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(mat_to_operator)
            .collect::<Result<_>>()?;
        GKLSGenerator::new(h, jumps)
    }

    /// The truncation configuration of a crossed-product instance.
    pub fn truncation_config(&self) -> Result<TruncationConfig> {
        if self.kind != Kind::Pukanszky {
            return Err(Error::InvalidInput("not a truncation instance".into()));
        }
        let n = self
            .n
            .ok_or_else(|| Error::InvalidInput("truncation instance requires `n`".into()))?;
        let lambda = self
            .lambda
            .ok_or_else(|| Error::InvalidInput("truncation instance requires `lambda`".into()))?;
        let cfg = TruncationConfig::new(n, lambda)?;
        match &self.weights {
            None => Ok(cfg),
            Some(spec) => {
                let w = parse_weights(spec, n)?;
                cfg.with_weights(w.clone(), w)
            }
        }
    }
}

/// Parse a weight family: `geometric:Q` gives w_k = Q^k for k = 1…n.
pub fn parse_weights(spec: &str, n: usize) -> Result<Vec<f64>> {
    let Some(q) = spec.strip_prefix("geometric:") else {
        return Err(Error::InvalidInput(format!(
            "unknown weight family `{spec}` (expected geometric:Q)"
        )));
    };
    let q: f64 = q
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad weight ratio in `{spec}`")))?;
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidInput("weight ratio must be positive".into()));
    }
    Ok((1..=n).map(|k| q.powi(k as i32)).collect())
}

/// Read and validate an instance file; parse errors carry the line and
/// column reported by the JSON parser.
pub fn parse_instance(path: &Path) -> Result<InstanceSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let spec: InstanceSpec = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidInput(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{validate_ucp, Tolerances};

    fn dephasing_json() -> String {
        // Kraus pair {√(1−p/2)·I, √(p/2)·Z} at p = 0.25.
        let a = (1.0f64 - 0.125).sqrt();
        let b = 0.125f64.sqrt();
        format!(
            r#"{{"kind":"channel","dim":2,"picture":"heisenberg",
                "kraus":[[[[{a},0],[0,0]],[[0,0],[{a},0]]],
                         [[[{b},0],[0,0]],[[0,0],[{},0]]]]}}"#,
            -b
        )
    }

    #[test]
    fn parse_channel_roundtrip() {
        let spec: InstanceSpec = serde_json::from_str(&dephasing_json()).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.kind, Kind::Channel);
        assert_eq!(spec.kraus.as_ref().unwrap().len(), 2);
        let s = spec.superop().unwrap();
        assert!(validate_ucp(&s, &Tolerances::default()).unwrap().is_ucp());

        let text = serde_json::to_string(&spec).unwrap();
        let again: InstanceSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&again).unwrap(), text);
    }

    #[test]
    fn parse_generator() {
        let json = r#"{"kind":"generator","dim":2,
            "hamiltonian":[[[1,0],[0,0]],[[0,0],[-1,0]]],
            "jumps":[[[[0,0],[1,0]],[[0,0],[0,0]]]]}"#;
        let spec: InstanceSpec = serde_json::from_str(json).unwrap();
        spec.validate().unwrap();
        let g = spec.generator_payload().unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.jumps().len(), 1);
    }

    #[test]
    fn reject_nonsquare_matrix() {
        let json = r#"{"kind":"generator","dim":2,
            "hamiltonian":[[[1,0],[0,0]],[[0,0],[-1,0]],[[0,0],[0,0]]]}"#;
        let spec: InstanceSpec = serde_json::from_str(json).unwrap();
        let err = spec.validate().unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn reject_mixed_payloads() {
        let json = r#"{"kind":"channel","dim":2,
            "kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]],
            "hamiltonian":[[[1,0],[0,0]],[[0,0],[-1,0]]]}"#;
        let spec: InstanceSpec = serde_json::from_str(json).unwrap();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn parse_error_is_line_anchored() {
        let dir = std::env::temp_dir().join("qasym-instance-test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("broken.json");
        std::fs::write(&p, "{\n  \"kind\": \"channel\",\n  oops\n}").unwrap();
        let err = parse_instance(&p).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains(":3:"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn weight_families() {
        assert_eq!(parse_weights("geometric:0.5", 3).unwrap(), vec![0.5, 0.25, 0.125]);
        assert!(parse_weights("arithmetic:1", 2).is_err());
        assert!(parse_weights("geometric:-1", 2).is_err());
        let spec = InstanceSpec::pukanszky(2, 0.3, Some("geometric:0.25".into()));
        let cfg = spec.truncation_config().unwrap();
        assert_eq!(cfg.m_weights, vec![0.25, 0.0625]);
    }
}
