//! Randomized robustness harness over 600 configurations (ignored by
//! default; run with `cargo test -p vorwave --test stress -- --ignored`).
//!
//! Two properties are enforced:
//! - the root-count law is never violated: `find_roots` either classifies
//!   correctly or fails with a typed numeric error, never with a
//!   classification mismatch;
//! - numeric failures occur only outside the supported envelope
//!   (branch index <= 2, depth <= 9, shear offset in [0.1, 2]), i.e. on
//!   deep multi-layer flows whose whole-interval shooting is
//!   conditioning-limited in double precision.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vorwave::dispersion::{default_tau_cap, find_roots};
use vorwave::error::Error;
use vorwave::stream::{build_stream_solution, depth_sequences, Branch, FlowSign};
use vorwave::vorticity::{VorticityDescriptor, VorticitySpec};

#[test]
#[ignore]
fn stress_root_count_law() {
    let mut rng = StdRng::seed_from_u64(555);
    let mut classified = 0;
    let mut conditioning_limited = 0;
    let mut violations: Vec<String> = Vec::new();
    for trial in 0..600 {
        let spec = match rng.gen_range(0..4) {
            0 => VorticitySpec::zero(),
            1 => VorticitySpec::constant(rng.gen_range(0.2..3.0)).unwrap(),
            2 => VorticitySpec::linear(rng.gen_range(0.2..3.0)).unwrap(),
            _ => VorticitySpec::new(VorticityDescriptor::Polynomial {
                coeffs: vec![
                    rng.gen_range(-0.8..0.8),
                    rng.gen_range(-1.5..1.5),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.5..0.5),
                ],
            })
            .unwrap(),
        };
        let s = spec.s0() + rng.gen_range(0.02..3.0);
        let Ok(cat) = depth_sequences(&spec, s, 3) else { continue };
        let mut branches = vec![];
        for j in 0..cat.depths_plus.len() {
            branches.push(Branch::new(j as u32, FlowSign::Plus));
        }
        for j in 0..cat.depths_minus.len() {
            branches.push(Branch::new(j as u32, FlowSign::Minus));
        }
        if branches.is_empty() {
            continue;
        }
        let branch = branches[rng.gen_range(0..branches.len())];
        let Ok(stream) = build_stream_solution(&spec, s, branch) else { continue };
        if stream.kappa.abs() < 1e-4 || stream.h > 30.0 {
            continue;
        }
        let in_envelope =
            branch.j <= 2 && stream.h <= 9.0 && (0.1..=2.0).contains(&(s - spec.s0()));
        match find_roots(&stream, default_tau_cap(stream.h)) {
            Ok(profile) => {
                if let Some(pred) = profile.predicted_roots {
                    assert_eq!(profile.roots.len(), pred, "trial {trial}");
                }
                classified += 1;
            }
            Err(Error::Degenerate(_)) => {}
            Err(Error::Numeric(e)) => {
                if in_envelope {
                    violations.push(format!(
                        "trial {trial}: numeric failure inside the envelope \
                         (branch {branch}, s - s0 = {:.4}, h = {:.4}): {e}",
                        s - spec.s0(),
                        stream.h
                    ));
                } else {
                    conditioning_limited += 1;
                }
            }
            Err(e) => violations.push(format!(
                "trial {trial}: law violation (branch {branch}, s = {s:.6}): {e}"
            )),
        }
    }
    println!(
        "classified={classified} conditioning_limited={conditioning_limited} violations={}",
        violations.len()
    );
    for v in &violations {
        println!("  {v}");
    }
    assert!(classified >= 500, "too few classified configurations: {classified}");
    assert!(violations.is_empty(), "{} violations", violations.len());
}
