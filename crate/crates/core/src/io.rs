//! File formats.
//!
//! Triple files are JSON objects
//!
//! ```json
//! {"n": 2, "s": 3,
//!  "d":     [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
//!  "gamma": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
//!  "j_k":   [[[0.0, 0.0], [-1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]}
//! ```
//!
//! where each matrix is a list of rows and each entry a `[re, im]` pair. Floats
//! are written in shortest round-trip form, so write → read is bit-exact.
//!
//! Ensemble output is CSV with the fixed header [`CSV_HEADER`] or JSON lines
//! with the same field names. Quantities that do not apply are empty CSV
//! fields / JSON `null`, never zero. Numbers are printed with 17 significant
//! digits.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleRecord;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::triple::{AntilinearOp, KoDimension, SpectralTriple};

pub const CSV_HEADER: &str =
    "sample,re_det_iD,im_det_iD,re_F,im_F,re_Fplus,im_Fplus,index,min_abs_eig,max_abs_eig";

type PairMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleFile {
    pub n: usize,
    pub s: i64,
    pub d: PairMatrix,
    pub gamma: PairMatrix,
    pub j_k: PairMatrix,
}

fn to_pairs(m: &CMatrix) -> PairMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_pairs(name: &str, n: usize, rows: &PairMatrix) -> Result<CMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{name} must be {n}x{n}")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    }))
}

impl TripleFile {
    pub fn from_triple(t: &SpectralTriple) -> Self {
        TripleFile {
            n: t.n(),
            s: i64::from(t.s().value()),
            d: to_pairs(t.dirac()),
            gamma: to_pairs(t.gamma()),
            j_k: to_pairs(t.j().k_matrix()),
        }
    }

    pub fn to_triple(&self) -> Result<SpectralTriple> {
        let s = KoDimension::new(self.s)?;
        let d = from_pairs("d", self.n, &self.d)?;
        let gamma = from_pairs("gamma", self.n, &self.gamma)?;
        let k = from_pairs("j_k", self.n, &self.j_k)?;
        SpectralTriple::new(s, d, gamma, AntilinearOp::new(k)?)
    }
}

pub fn triple_to_json(t: &SpectralTriple) -> String {
    serde_json::to_string(&TripleFile::from_triple(t)).expect("finite floats serialize")
}

pub fn triple_to_json_pretty(t: &SpectralTriple) -> String {
    serde_json::to_string_pretty(&TripleFile::from_triple(t)).expect("finite floats serialize")
}

pub fn triple_from_json(text: &str) -> Result<SpectralTriple> {
    let file: TripleFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_triple()
}

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_num(out: &mut String, x: f64) {
    if x.is_finite() {
        out.push_str(&fmt_f64(x));
    } else {
        out.push_str("null");
    }
}

pub fn csv_line(r: &EnsembleRecord) -> String {
    let mut cols: Vec<String> = vec![r.sample.to_string()];
    for z in [r.det_i_d, r.real_f, r.chiral_fplus] {
        match z {
            Some(z) => {
                cols.push(fmt_f64(z.re));
                cols.push(fmt_f64(z.im));
            }
            None => {
                cols.push(String::new());
                cols.push(String::new());
            }
        }
    }
    cols.push(r.index.map(|i| i.to_string()).unwrap_or_default());
    cols.push(r.min_abs_eig.map(fmt_f64).unwrap_or_default());
    cols.push(r.max_abs_eig.map(fmt_f64).unwrap_or_default());
    cols.join(",")
}

pub fn write_csv(records: &[EnsembleRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

pub fn jsonl_line(r: &EnsembleRecord) -> String {
    let mut out = String::new();
    write!(out, "{{\"sample\":{}", r.sample).unwrap();
    let names = [("det_iD", r.det_i_d), ("F", r.real_f), ("Fplus", r.chiral_fplus)];
    for (name, z) in names {
        for (part, v) in [("re", z.map(|z| z.re)), ("im", z.map(|z| z.im))] {
            write!(out, ",\"{part}_{name}\":").unwrap();
            match v {
                Some(x) => json_num(&mut out, x),
                None => out.push_str("null"),
            }
        }
    }
    out.push_str(",\"index\":");
    match r.index {
        Some(i) => write!(out, "{i}").unwrap(),
        None => out.push_str("null"),
    }
    for (name, v) in [("min_abs_eig", r.min_abs_eig), ("max_abs_eig", r.max_abs_eig)] {
        write!(out, ",\"{name}\":").unwrap();
        match v {
            Some(x) => json_num(&mut out, x),
            None => out.push_str("null"),
        }
    }
    if let Some(e) = &r.error {
        write!(out, ",\"error\":{}", serde_json::Value::String(e.clone())).unwrap();
    }
    out.push('}');
    out
}

pub fn write_jsonl(records: &[EnsembleRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&jsonl_line(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{random_rotated_triple, run_ensemble, EnsembleConfig};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn example_file_parses() {
        let text = r#"{"n": 2, "s": 3,
            "d":     [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
            "gamma": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
            "j_k":   [[[0.0, 0.0], [-1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]}"#;
        let t = triple_from_json(text).unwrap();
        assert_eq!(t.s().value(), 3);
        assert!(crate::triple::validate(&t, crate::TAU_UNIT).is_valid());
    }

    #[test]
    fn bad_files() {
        assert!(matches!(triple_from_json("{"), Err(Error::Parse(_))));
        let wrong_n = r#"{"n": 3, "s": 1, "d": [[[0,0]]], "gamma": [[[1,0]]], "j_k": [[[1,0]]]}"#;
        assert!(matches!(triple_from_json(wrong_n), Err(Error::Parse(_))));
        let bad_s = r#"{"n": 1, "s": 9, "d": [[[0,0]]], "gamma": [[[1,0]]], "j_k": [[[1,0]]]}"#;
        assert!(matches!(triple_from_json(bad_s), Err(Error::InvalidKoDimension(9))));
    }

    #[test]
    fn csv_has_fixed_columns_and_empty_fields() {
        let cfg = EnsembleConfig::new(KoDimension::new(1).unwrap(), 4, 2, 3);
        let csv = write_csv(&run_ensemble(&cfg).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 10);
        // odd s: no chiral value, no index
        assert_eq!(&fields[5..8], &["", "", ""]);
        assert!(!fields[3].is_empty());
    }

    #[test]
    fn jsonl_is_valid_json() {
        let cfg = EnsembleConfig::new(KoDimension::new(2).unwrap(), 4, 2, 3);
        for line in write_jsonl(&run_ensemble(&cfg).unwrap()).lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["re_Fplus"].is_number());
            assert_eq!(v["index"], serde_json::json!(0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn triple_json_round_trip_is_bit_exact(seed in any::<u64>(), s in 0i64..8, half in 1usize..4) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let s = KoDimension::new(s).unwrap();
            let n = if s.value() == 4 { 4 * half } else { 2 * half };
            let t = random_rotated_triple(s, n, None, 1.0, &mut rng).unwrap();
            let back = triple_from_json(&triple_to_json(&t)).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(triple_to_json(&back), triple_to_json(&t));
        }
    }
}
