//! Writes a synthetic clip as a Y-only raw file, reads it back and cuts it
//! into non-overlapping cubes.
//!
//! ```text
//! cargo run --example patches
//! ```

use vqoe::dataset::{extract_patches, read_yuv_luma, write_y_only, PatchSpec, RawFormat, VideoVolume};
use vqoe::Tensor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (w, h, frames) = (40, 24, 20);
    let luma = Tensor::from_fn([h, w, frames], |i| ((i * 7) % 256) as f64);
    let vol = VideoVolume::new(luma, 25.0)?;

    let dir = std::env::temp_dir().join("vqoe-patches-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("clip.yraw");
    write_y_only(&path, &vol)?;
    let back = read_yuv_luma(&path, w, h, frames, 25.0, RawFormat::YOnly)?;
    assert_eq!(back, vol);
    println!("round-tripped {}x{}x{} through {}", w, h, frames, path.display());

    for k in [4, 8, 16] {
        let spec = PatchSpec::new(k)?;
        let (nx, ny, nt) = spec.grid(&back)?;
        let patches = extract_patches(&back, &spec, 0, "clip")?;
        println!(
            "k = {k:>2}: grid {nx} x {ny} x {nt} = {} cubes; first cube mean {:.2}",
            patches.len(),
            patches[0].cube.data().iter().sum::<f64>() / patches[0].cube.len() as f64
        );
    }
    let full_hd = PatchSpec::new(16)?.grid_for(1920, 1080, 300)?;
    println!("1920x1080, 300 frames, k = 16: {:?} = {} cubes", full_hd, full_hd.0 * full_hd.1 * full_hd.2);
    Ok(())
}
