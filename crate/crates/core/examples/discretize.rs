//! MOS-to-class mapping for the four interval sizes.
//!
//! ```text
//! cargo run --example discretize
//! ```

use vqoe::dataset::{discretize_mos, DiscretizationSpec, STUDY_SIZES};

fn main() -> vqoe::Result<()> {
    for size in STUDY_SIZES {
        let spec = DiscretizationSpec::new(size)?;
        let classes = [1.0, 2.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&m| discretize_mos(m, &spec))
            .collect::<vqoe::Result<Vec<_>>>()?;
        let sweep: Vec<f64> = (0..=400).map(|i| 1.0 + 0.01 * i as f64).collect();
        println!(
            "size {size:<5}: {:>2} bins of width {:.4}, MOS 1..5 -> {classes:?}, sweep occupies {}",
            spec.num_bins(),
            spec.bin_width(),
            spec.occupied_bins(sweep)?
        );
    }
    Ok(())
}
