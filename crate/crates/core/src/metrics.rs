//! Segmentation error against a reference label map.

use alloc::string::String;
use core::fmt::{self, Write};

use crate::error::Result;
use crate::image::{ensure_same_dims, Class, LabelMap};

/// RMS and Dice figures of a produced segmentation, per tissue class
/// (indexed CSF, GM, WM) and pooled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    /// Root mean squared mask difference over all three classes (3N terms).
    pub rms_overall: f64,
    pub rms_per_class: [f64; 3],
    pub dice_per_class: [f64; 3],
    pub pixel_count: usize,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "rms_overall,rms_csf,rms_gm,rms_wm,dice_csf,dice_gm,dice_wm,pixel_count";

    pub fn rms(&self, class: Class) -> Option<f64> {
        class.tissue_index().map(|i| self.rms_per_class[i])
    }

    pub fn dice(&self, class: Class) -> Option<f64> {
        class.tissue_index().map(|i| self.dice_per_class[i])
    }

    /// Fields matching [`EvalReport::CSV_HEADER`], six decimals.
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:.6}", self.rms_overall);
        for v in self.rms_per_class.iter().chain(&self.dice_per_class) {
            let _ = write!(s, ",{v:.6}");
        }
        let _ = write!(s, ",{}", self.pixel_count);
        s
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pixels: {}", self.pixel_count)?;
        writeln!(f, "rms (pooled): {:.6}", self.rms_overall)?;
        for (i, class) in Class::TISSUES.iter().enumerate() {
            writeln!(
                f,
                "{:>4}: rms {:.6}  dice {:.6}",
                class.name(),
                self.rms_per_class[i],
                self.dice_per_class[i]
            )?;
        }
        Ok(())
    }
}

/// Compares `produced` with `reference` class by class on binary masks.
///
/// `rms_c = sqrt(sum_i (P_i - G_i)^2 / N)`, the pooled value divides the sum
/// over all three classes by `3N`, and `dice_c = 2|P and G| / (|P| + |G|)`
/// (1 when both masks are empty).
pub fn rms_error(produced: &LabelMap, reference: &LabelMap) -> Result<EvalReport> {
    ensure_same_dims(produced, reference)?;
    let mut diff = [0u64; 3];
    let mut both = [0u64; 3];
    let mut p_count = [0u64; 3];
    let mut g_count = [0u64; 3];
    for (&p, &g) in produced.labels().iter().zip(reference.labels()) {
        if let Some(i) = p.tissue_index() {
            p_count[i] += 1;
        }
        if let Some(i) = g.tissue_index() {
            g_count[i] += 1;
        }
        if p == g {
            if let Some(i) = p.tissue_index() {
                both[i] += 1;
            }
        } else {
            for i in [p.tissue_index(), g.tissue_index()].into_iter().flatten() {
                diff[i] += 1;
            }
        }
    }

    let n = produced.len() as f64;
    let rms_per_class = diff.map(|d| libm::sqrt(d as f64 / n));
    let rms_overall = libm::sqrt(diff.iter().sum::<u64>() as f64 / (3.0 * n));
    let mut dice_per_class = [1.0; 3];
    for i in 0..3 {
        let denom = p_count[i] + g_count[i];
        if denom > 0 {
            dice_per_class[i] = 2.0 * both[i] as f64 / denom as f64;
        }
    }
    Ok(EvalReport {
        rms_overall,
        rms_per_class,
        dice_per_class,
        pixel_count: produced.len(),
    })
}
