//! Convexity of the super-level sets of scaled depth: a log-concave
//! density, a bimodal one, and a planted non-convex cloud.

use paretoir::asymptotics::{probe_points, quasiconcavity_probe, AxisDensity, SeparableDensity, DEFAULT_RESOLUTION};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn show(name: &str, report: &paretoir::asymptotics::ProbeReport) {
    let cells: Vec<String> = report
        .levels
        .iter()
        .map(|l| match l.defect {
            Some(d) => format!("{:.2}:{d:.3}", l.fraction),
            None => format!("{:.2}:-", l.fraction),
        })
        .collect();
    println!("{name:<10} {}", cells.join("  "));
}

fn main() -> paretoir::Result<()> {
    let levels = [0.25, 0.5, 0.75];
    show("uniform", &quasiconcavity_probe(&SeparableDensity::uniform(2), 100_000, &levels, 0)?);

    let bump = AxisDensity::TwoBump {
        weight: 0.5,
        means: [0.2, 0.8],
        sds: [0.08, 0.08],
    };
    show("two-bump", &quasiconcavity_probe(&SeparableDensity::iid(bump, 2)?, 100_000, &levels, 0)?);

    // Blobs in the upper-left and lower-right corners: no chain crosses
    // between them, so each level set is an L-shaped union.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut pts = Vec::new();
    for i in 0..20_000 {
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        if i % 2 == 0 {
            pts.extend([0.05 + 0.25 * u, 0.7 + 0.25 * v]);
        } else {
            pts.extend([0.7 + 0.25 * u, 0.05 + 0.25 * v]);
        }
    }
    show("blobs", &probe_points(&pts, &levels, DEFAULT_RESOLUTION)?);
    Ok(())
}
