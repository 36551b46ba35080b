//! JSON interchange for channels, ensembles and reports.
//!
//! A channel file is an object
//!
//! ```json
//! {"d": 2, "kind": "choi", "data": [[[1.0, 0.0], ...], ...]}
//! ```
//!
//! where `kind` is `"choi"` (one `d² x d²` matrix), `"kraus"` (a list of
//! `d x d` matrices) or `"ensemble"` (a list of `d x d` unitaries plus a
//! parallel `weights` array). Matrices are row-major nested arrays of
//! `[re, im]` pairs. Floats are written with 17 significant digits so output
//! is byte-stable.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::channels::{choi_from_kraus, ensemble_to_choi, ChoiMatrix, KrausSet, UnitaryEnsemble, ValidityReport};
use crate::decomposer::{DecompositionMode, DecompositionReport};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Largest `d` accepted from files.
pub const MAX_DIM: usize = 16;

/// Compact JSON with every float printed as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Serializes with [`FixedDigits`] and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

type RawMatrix = Vec<Vec<[f64; 2]>>;

fn matrix_to_raw(m: &CMatrix) -> RawMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

fn raw_to_matrix(raw: &RawMatrix, side: usize, what: &str) -> Result<CMatrix> {
    if raw.len() != side || raw.iter().any(|row| row.len() != side) {
        return Err(Error::Format(format!("{what} must be {side}x{side}")));
    }
    let entries: Vec<C64> = raw.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    crate::linalg::from_row_major(side, side, &entries).map_err(|e| Error::Format(format!("{what}: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Choi,
    Kraus,
    Ensemble,
}

/// Parsed contents of a channel file.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelData {
    Choi(ChoiMatrix),
    Kraus(KrausSet),
    Ensemble(UnitaryEnsemble),
}

impl ChannelData {
    pub fn d(&self) -> usize {
        match self {
            ChannelData::Choi(j) => j.d(),
            ChannelData::Kraus(k) => k.d(),
            ChannelData::Ensemble(e) => e.d(),
        }
    }

    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelData::Choi(_) => ChannelKind::Choi,
            ChannelData::Kraus(_) => ChannelKind::Kraus,
            ChannelData::Ensemble(_) => ChannelKind::Ensemble,
        }
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        match self {
            ChannelData::Choi(j) => j.clone(),
            ChannelData::Kraus(k) => choi_from_kraus(k),
            ChannelData::Ensemble(e) => ensemble_to_choi(e),
        }
    }
}

#[derive(Serialize)]
struct ChannelOut<'a> {
    d: usize,
    kind: ChannelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    data: &'a Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelIn {
    d: usize,
    kind: ChannelKind,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    data: Value,
}

fn channel_value(data: &ChannelData) -> Value {
    let (weights, payload) = match data {
        ChannelData::Choi(j) => (None, serde_json::to_value(matrix_to_raw(j.matrix()))),
        ChannelData::Kraus(k) => {
            (None, serde_json::to_value(k.operators().iter().map(matrix_to_raw).collect::<Vec<_>>()))
        }
        ChannelData::Ensemble(e) => (
            Some(e.weights().collect::<Vec<_>>()),
            serde_json::to_value(e.unitaries().map(matrix_to_raw).collect::<Vec<_>>()),
        ),
    };
    let payload = payload.expect("finite matrices serialize");
    serde_json::to_value(ChannelOut { d: data.d(), kind: data.kind(), weights, data: &payload })
        .expect("channel serializes")
}

pub fn channel_to_json(data: &ChannelData) -> String {
    to_json(&channel_value(data))
}

pub fn choi_to_json(j: &ChoiMatrix) -> String {
    channel_to_json(&ChannelData::Choi(j.clone()))
}

pub fn ensemble_to_json(e: &UnitaryEnsemble) -> String {
    channel_to_json(&ChannelData::Ensemble(e.clone()))
}

/// Parses a channel file. Never panics on malformed input.
pub fn parse_channel(text: &str) -> Result<ChannelData> {
    let raw: ChannelIn = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let d = raw.d;
    if d == 0 || d > MAX_DIM {
        return Err(Error::Format(format!("d = {d} outside 1..={MAX_DIM}")));
    }
    if raw.kind != ChannelKind::Ensemble && raw.weights.is_some() {
        return Err(Error::Format("only ensembles carry weights".into()));
    }
    match raw.kind {
        ChannelKind::Choi => {
            let m: RawMatrix = serde_json::from_value(raw.data).map_err(|e| Error::Format(e.to_string()))?;
            let m = raw_to_matrix(&m, d * d, "Choi matrix")?;
            Ok(ChannelData::Choi(ChoiMatrix::new(d, m)?))
        }
        ChannelKind::Kraus => {
            let ops = parse_matrix_list(raw.data, d)?;
            Ok(ChannelData::Kraus(KrausSet::new(ops).map_err(|e| Error::Format(e.to_string()))?))
        }
        ChannelKind::Ensemble => {
            let ops = parse_matrix_list(raw.data, d)?;
            let weights = raw.weights.ok_or_else(|| Error::Format("ensemble needs a weights array".into()))?;
            if weights.len() != ops.len() {
                return Err(Error::Format(format!("{} weights for {} unitaries", weights.len(), ops.len())));
            }
            let e = UnitaryEnsemble::new(d, weights.into_iter().zip(ops).collect())
                .map_err(|e| Error::Format(e.to_string()))?;
            Ok(ChannelData::Ensemble(e))
        }
    }
}

fn parse_matrix_list(data: Value, d: usize) -> Result<Vec<CMatrix>> {
    let list: Vec<RawMatrix> = serde_json::from_value(data).map_err(|e| Error::Format(e.to_string()))?;
    if list.is_empty() {
        return Err(Error::Format("operator list is empty".into()));
    }
    list.iter().enumerate().map(|(i, m)| raw_to_matrix(m, d, &format!("operator {i}"))).collect()
}

#[derive(Serialize)]
struct ReportOut<'a> {
    mode: DecompositionMode,
    d: usize,
    p: f64,
    design: Option<&'a str>,
    residual_frobenius: f64,
    residual_spectral: f64,
    ensemble_size: usize,
    caratheodory_bound: usize,
    pruned: bool,
    input_validity: &'a ValidityReport,
    ensemble: Value,
    target: Value,
}

pub fn report_value(r: &DecompositionReport) -> Value {
    serde_json::to_value(ReportOut {
        mode: r.mode,
        d: r.d(),
        p: r.p,
        design: r.design.as_deref(),
        residual_frobenius: r.residual_frobenius,
        residual_spectral: r.residual_spectral,
        ensemble_size: r.ensemble_size,
        caratheodory_bound: r.caratheodory_bound,
        pruned: r.pruned,
        input_validity: &r.input_validity,
        ensemble: channel_value(&ChannelData::Ensemble(r.ensemble.clone())),
        target: channel_value(&ChannelData::Choi(r.target.clone())),
    })
    .expect("report serializes")
}

pub fn report_to_json(r: &DecompositionReport) -> String {
    to_json(&report_value(r))
}

/// Pulls the ensemble back out of a serialized decomposition report.
pub fn parse_report_ensemble(text: &str) -> Result<UnitaryEnsemble> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let inner = v.get("ensemble").ok_or_else(|| Error::Format("report has no ensemble".into()))?;
    match parse_channel(&inner.to_string())? {
        ChannelData::Ensemble(e) => Ok(e),
        other => Err(Error::Format(format!("report ensemble has kind {:?}", other.kind()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::depolarizing_choi;
    use crate::designs::clifford_group;
    use crate::linalg::{haar_unitary, identity, RandomSource};
    use proptest::prelude::*;

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(
            to_json(&[1.0f64, -0.5, 0.1]),
            "[1.0000000000000000e0,-5.0000000000000000e-1,1.0000000000000001e-1]\n"
        );
    }

    #[test]
    fn choi_round_trip() {
        let j = depolarizing_choi(2);
        let text = choi_to_json(&j);
        assert!(text.starts_with("{\"d\":2,\"kind\":\"choi\""));
        assert_eq!(parse_channel(&text).unwrap(), ChannelData::Choi(j));
    }

    #[test]
    fn ensemble_and_kraus_round_trip() {
        let e = clifford_group(2).unwrap().to_ensemble();
        let back = parse_channel(&ensemble_to_json(&e)).unwrap();
        assert_eq!(back, ChannelData::Ensemble(e));
        let k = KrausSet::new(vec![identity(2).scale(0.6), identity(2).scale(0.8)]).unwrap();
        let data = ChannelData::Kraus(k);
        assert_eq!(parse_channel(&channel_to_json(&data)).unwrap(), data);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let cases = [
            "",
            "[]",
            r#"{"d":0,"kind":"choi","data":[]}"#,
            r#"{"d":99,"kind":"choi","data":[]}"#,
            r#"{"d":1,"kind":"choi","data":[[[1.0,0.0],[0.0,0.0]]]}"#,
            r#"{"d":1,"kind":"qubit","data":[[[1.0,0.0]]]}"#,
            r#"{"d":1,"kind":"kraus","data":[]}"#,
            r#"{"d":1,"kind":"ensemble","data":[[[[1.0,0.0]]]]}"#,
            r#"{"d":1,"kind":"ensemble","weights":[0.5],"data":[[[[1.0,0.0]]]]}"#,
            r#"{"d":1,"kind":"ensemble","weights":[1.0,0.0],"data":[[[[1.0,0.0]]]]}"#,
            r#"{"d":1,"kind":"choi","weights":[1.0],"data":[[[1.0,0.0]]]}"#,
            r#"{"d":1,"kind":"choi","data":[[[1.0,0.0]]],"extra":1}"#,
        ];
        for text in cases {
            assert!(matches!(parse_channel(text), Err(Error::Format(_))), "accepted {text:?}");
        }
        assert!(parse_channel(r#"{"d":1,"kind":"choi","data":[[[1.0,0.0]]]}"#).is_ok());
    }

    #[test]
    fn report_ensemble_round_trip() {
        let r = crate::decomposer::decompose_exact(&depolarizing_choi(2), &clifford_group(2).unwrap()).unwrap();
        let text = report_to_json(&r);
        assert_eq!(parse_report_ensemble(&text).unwrap(), r.ensemble);
        assert_eq!(text, report_to_json(&r));
    }

    proptest! {
        #[test]
        fn random_ensembles_round_trip(seed in any::<u64>(), d in 1usize..5, k in 1usize..6) {
            let mut rng = RandomSource::new(seed);
            let raw: Vec<f64> = (0..k).map(|_| rng.uniform() + 0.01).collect();
            let total: f64 = raw.iter().sum();
            let terms = raw.iter().map(|w| (w / total, haar_unitary(d, &mut rng))).collect();
            let e = UnitaryEnsemble::normalized(d, terms).unwrap();
            let back = parse_channel(&ensemble_to_json(&e)).unwrap();
            prop_assert_eq!(back, ChannelData::Ensemble(e));
        }

        #[test]
        fn parser_never_panics(text in ".{0,200}") {
            let _ = parse_channel(&text);
        }
    }
}
