//! CSV report rows.

use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::io::atomic_write;

pub const HEADER: [&str; 8] = ["image_id", "operator", "wavelet", "mse", "psnr_db", "ssim", "entropy", "wall_ms"];

/// One metric row of a comparison or ablation batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub image_id: String,
    pub operator: String,
    pub wavelet: String,
    pub mse: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub entropy: f64,
    pub wall_ms: f64,
}

/// Rounds to 6 significant digits and prints the shortest decimal that
/// reads back to the rounded value. Infinities print as `inf`/`-inf`.
pub fn sig6(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

impl ReportRow {
    fn fields(&self) -> [String; 8] {
        [
            self.image_id.clone(),
            self.operator.clone(),
            self.wavelet.clone(),
            sig6(self.mse),
            sig6(self.psnr_db),
            sig6(self.ssim),
            sig6(self.entropy),
            sig6(self.wall_ms),
        ]
    }

    fn sort_key(&self) -> (&str, &str, &str) {
        (&self.image_id, &self.operator, &self.wavelet)
    }
}

/// Sorts rows by `(image_id, operator, wavelet)`.
pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn to_csv(rows: &[ReportRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory csv");
    for r in rows {
        w.write_record(r.fields()).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

pub fn write_csv(path: &std::path::Path, rows: &[ReportRow]) -> CliResult<()> {
    atomic_write(path, &to_csv(rows))
}
