use helmray::analysis::{snapshot_total_flux, uncertainty_product, waist_error, waist_table};
use helmray::beam::BeamProfile;
use helmray::dynamics::run;
use helmray::medium::Medium;
use helmray::scenario::{Integration, Regularization, Scenario, SystemKind};
use helmray::units::Units;

fn gaussian_scenario() -> Scenario {
    Scenario {
        system: SystemKind::Quantum,
        units: Units::quantum(),
        medium: Medium::free(),
        beam: BeamProfile::gaussian(1.0, 4.0, 321),
        lambda0: 2e-4,
        integration: Integration {
            dt: Some(5e-5),
            n_steps: 40_000,
            snapshot_stride: 100,
        },
        wave_potential_enabled: true,
        regularization: Regularization {
            amplitude_floor_rel: 1e-8,
            edge_stencil: helmray::scenario::EdgeStencilPolicy::CopyInterior,
        },
    }
}

#[test]
fn probe_gaussian_run() {
    let s = gaussian_scenario();
    let t0 = std::time::Instant::now();
    let record = run(&s).unwrap();
    println!("run wall time: {:?}", t0.elapsed());
    println!("rayleigh length: {}", s.rayleigh_length());
    println!("max common z: {}", record.max_common_z());

    let werr = waist_error(&record).unwrap();
    println!("waist error (max rel): {werr:.6e}");
    let table = waist_table(&record).unwrap();
    for row in table.iter().step_by(80) {
        println!(
            "z={:10.1}  x+={:9.5}  analytic={:9.5}  err={:.3e}",
            row.z, row.x_upper, row.x_analytic, row.err_upper
        );
    }

    // Far-field slope of the waist rays at the final snapshot.
    let last = record.snapshots.last().unwrap();
    let launch = &record.snapshots[0];
    let mut slope = 0.0;
    for (r, r0) in last.states.iter().zip(&launch.states) {
        if (r0.position.x - 1.0).abs() < 1e-9 {
            slope = r.momentum.x / r.momentum.z;
        }
    }
    let asym = s.lambda0 / (std::f64::consts::PI * 1.0);
    println!(
        "waist-ray slope {slope:.6e} vs asymptote {asym:.6e}  rel dev {:.3}",
        (slope - asym).abs() / asym
    );

    // Uncertainty ladder.
    let h = 2.0 * std::f64::consts::PI;
    let zr = s.rayleigh_length();
    for zf in [0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 3.9] {
        let u = uncertainty_product(&record, zf * zr).unwrap();
        println!(
            "z/zR={zf:5.2}  dp={:9.5}  product/h={:8.5}",
            u.delta_p,
            u.product / h
        );
    }

    // Conservation.
    let rep = record.reports.last().unwrap();
    println!(
        "H drift {:.3e}  p drift {:.3e}  flux err {:.3e}  perp {:.3e}  clamps {}",
        rep.max_rel_h_drift,
        rep.max_p_drift,
        rep.max_flux_err,
        rep.max_perp_ratio,
        record.reports.iter().map(|r| r.clamp_count).sum::<u64>()
    );
    let f0 = snapshot_total_flux(&record.snapshots[0]);
    let fl = snapshot_total_flux(record.snapshots.last().unwrap());
    println!("total flux rel change {:.3e}", (fl - f0).abs() / f0);
}
