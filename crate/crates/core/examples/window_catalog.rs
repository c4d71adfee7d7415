//! The four windows: parity, integral constants, and the ramp-filtered window.

use wrtkit::windows::WindowSpec;

fn main() -> wrtkit::error::Result<()> {
    let windows = [
        WindowSpec::gaussian(1.0),
        WindowSpec::hermite1(1.0),
        WindowSpec::bump(1.0),
        WindowSpec::AnalyticSignal,
    ];
    for w in &windows {
        print!("{:<16} parity {:<8?} ĥ(1) = {:.4}", w.name(), w.parity(), w.ft(1.0));
        match w.constants() {
            Ok(c) => println!("  ∫|h|² = {:.5}  ∫₀^∞|ĥ|² = {:.5}", c.c_h2, c.c_hat_half),
            Err(e) => println!("  ({e})"),
        }
    }

    let t: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
    let filt = WindowSpec::gaussian(1.0).riesz_filter(&t)?;
    println!("\nI⁻¹h for the unit gaussian:");
    for (t, v) in t.iter().zip(&filt) {
        println!("  t = {t:4.1}  {v:+.6}");
    }
    Ok(())
}
