//! Throughput of every built-in network preset and the start-up delay and
//! stall it causes for a 10 s, 4 Mbps clip at 25 fps.
//!
//! ```text
//! cargo run --example netsim
//! ```

use vqoe::dataset::VideoVolume;
use vqoe::netmodel::{builtin_presets, delay, embed_delay, stall_frames, ClipTransmission, StallMode};
use vqoe::Tensor;

fn main() -> vqoe::Result<()> {
    let clip = ClipTransmission::new(4e6, 10.0, 25.0)?;
    println!("{:<6} {:>14} {:>14} {:>9} {:>7} {}", "preset", "model bps", "nominal bps", "delay s", "stall", "note");
    for p in builtin_presets() {
        let d = delay(&clip, p.rate_bps())?;
        let note = if p.inconsistent {
            format!("model differs from nominal by {:+.1}%", 100.0 * p.relative_gap())
        } else {
            String::new()
        };
        println!(
            "{:<6} {:>14.0} {:>14.0} {:>9.3} {:>7} {note}",
            p.name,
            p.rate_bps(),
            p.nominal_rate_bps,
            d,
            stall_frames(d, 25.0)?
        );
    }

    // freeze-frame stall on a tiny clip
    let vol = VideoVolume::new(Tensor::from_fn([2, 2, 5], |i| (i * 10) as f64), 25.0)?;
    let stalled = embed_delay(&vol, 0.1, 25.0, StallMode::Freeze)?;
    println!("5-frame clip with a 0.1 s stall has {} frames", stalled.frames());
    Ok(())
}
