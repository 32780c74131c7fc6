//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ppsdepth::geometry::{compute_ppl, backproject, pps_from_depth, CameraIntrinsics, DepthMap, LightSpec};
use ppsdepth::grid::{Grid, Mask};
use ppsdepth::io::{decode_pfm, encode_pfm, Endian, PlyFormat, PointCloud};
use ppsdepth::losses::{depth_metrics, pps_corr_loss, Alignment};
use ppsdepth::photometrics::{
    albedo_variance_loss, generate_scene, invert_albedo, luminance, render, AlbedoSpec, RenderModel, SceneSpec,
    SurfaceSpec,
};
use ppsdepth::ppsnet::{
    cross_attention, cross_attention_with_weights, film_modulate, ppsnet_forward, FeatureMap, FilmParams,
    PatchEncoder, Tensor3, ToyWeights,
};
use ppsdepth::refine::{refine_depth, RefineConfig};
use ppsdepth::selfcheck::fixtures::{perturbed, render_fixture, small_scene, tube_fixture};
use ppsdepth::selfcheck::gradient_report;

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn camera(size: usize, f: f64) -> CameraIntrinsics<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    CameraIntrinsics::new(f, f, c, c, size, size).unwrap()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

fn inverse_square() -> Outcome {
    let k = camera(128, 60.0);
    let albedo = AlbedoSpec::Constant { rgb: [0.6; 3] };
    let surfaces = [
        SurfaceSpec::Plane {
            distance: 2.5,
            normal: [-0.3, 0.1, 1.0],
        },
        SurfaceSpec::Tube {
            radius: 7.0,
            length: 50.0,
            offset: [-1.0, 2.0],
        },
        SurfaceSpec::BumpField {
            distance: 5.0,
            amplitude: 0.5,
            wavelength: 3.0,
            phase: [0.9, 0.4],
        },
    ];
    let light = LightSpec::colocated();
    let mut worst = 0.0f64;
    for surface in surfaces {
        let scene = generate_scene::<f64>(&SceneSpec { surface, albedo: albedo.clone() }, &k).map_err(err)?;
        let ppl = compute_ppl(&backproject(&scene.depth, &k).map_err(err)?, &light).map_err(err)?;
        for (u, v, &a) in ppl.attenuation.enumerate() {
            let d = scene.depth.get(u, v);
            let x = d * (u as f64 - 63.5) / 60.0;
            let y = d * (v as f64 - 63.5) / 60.0;
            worst = worst.max((a * (x * x + y * y + d * d) - 1.0).abs());
        }
    }
    Ok((worst < 1e-9, format!("max |A r^2 - 1| = {worst:.3e}")))
}

/// Pearson between luminance and shading over unclamped pixels.
fn shading_correlation(spec: &SceneSpec, k: &CameraIntrinsics<f64>, gamma: f64, peak: f64) -> Result<f64, String> {
    let scene = generate_scene::<f64>(spec, k).map_err(err)?;
    let light = LightSpec::colocated();
    let field = pps_from_depth(&scene.depth, k, &light).map_err(err)?;
    let max_pps = field.pps.as_slice().iter().copied().fold(0.0, f64::max);
    let model = RenderModel::new(peak / max_pps, 1.0, gamma, 0.0).map_err(err)?;
    let out = render(&scene.depth, k, &light, &scene.albedo, &model).map_err(err)?;
    let gray = luminance(&out.image);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (u, v, &clamped) in out.clamped.enumerate() {
        if !clamped && *field.valid.get(u, v) {
            a.push(gray.get(u, v));
            b.push(*field.pps.get(u, v));
        }
    }
    Ok(pearson(&a, &b))
}

fn correlation_suite() -> Vec<SurfaceSpec> {
    vec![
        SurfaceSpec::Tube { radius: 10.0, length: 60.0, offset: [2.0, -1.5] },
        SurfaceSpec::Tube { radius: 6.0, length: 40.0, offset: [0.0, 0.0] },
        SurfaceSpec::Tube { radius: 8.0, length: 80.0, offset: [-3.0, 2.0] },
        SurfaceSpec::Tube { radius: 12.0, length: 30.0, offset: [4.0, 1.0] },
        SurfaceSpec::Tube { radius: 5.0, length: 25.0, offset: [1.0, 1.5] },
        SurfaceSpec::SphereCap { center: [0.5, -0.5, 3.0], radius: 6.0 },
        SurfaceSpec::SphereCap { center: [-1.0, 0.3, 5.0], radius: 9.0 },
        SurfaceSpec::BumpField { distance: 4.0, amplitude: 0.4, wavelength: 3.0, phase: [0.2, 0.7] },
        SurfaceSpec::BumpField { distance: 6.0, amplitude: 0.8, wavelength: 4.0, phase: [1.0, 0.1] },
        SurfaceSpec::Plane { distance: 5.0, normal: [0.3, -0.2, 1.0] },
    ]
}

fn shading_correlation_check() -> Outcome {
    let k = camera(64, 40.0);
    let tube = SceneSpec {
        surface: SurfaceSpec::Tube { radius: 10.0, length: 60.0, offset: [2.0, -1.5] },
        albedo: AlbedoSpec::Constant { rgb: [0.8, 0.55, 0.45] },
    };
    let exact = shading_correlation(&tube, &k, 1.0, 0.9 / 0.8)?;
    let mut scores = Vec::new();
    for surface in correlation_suite() {
        let spec = SceneSpec {
            surface,
            albedo: AlbedoSpec::Pattern { base: [0.85, 0.55, 0.45], amplitude: 0.25, wavelength: 6.0 },
        };
        scores.push(shading_correlation(&spec, &k, 2.2, 0.95)?);
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let below: Vec<String> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < 0.85)
        .map(|(i, s)| format!("#{i}={s:.3}"))
        .collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok((
        exact > 0.999999 && below.is_empty(),
        format!(
            "gamma=1 tube r = {exact:.8}; textured suite mean {mean:.3}, min {min:.3}{}",
            if below.is_empty() { String::new() } else { format!(", below 0.85: {}", below.join(" ")) }
        ),
    ))
}

fn gradients() -> Outcome {
    let mut worst = ("", 0.0f64);
    let mut terms = std::collections::BTreeSet::new();
    for seed in 0..20 {
        for (name, r) in gradient_report(seed).map_err(err)? {
            terms.insert(name);
            if r.max_rel_error >= worst.1 {
                worst = (name, r.max_rel_error);
            }
        }
    }
    Ok((
        worst.1 < 1e-4 && terms.len() == 5,
        format!("20 seeds, {} terms, max relative error {:.3e} ({})", terms.len(), worst.1, worst.0),
    ))
}

fn scale_gauge() -> Outcome {
    let mut worst = 0.0f64;
    let mut scenes = vec![tube_fixture().map_err(err)?];
    for surface in [
        SurfaceSpec::BumpField { distance: 3.0, amplitude: 0.3, wavelength: 2.0, phase: [0.5, 1.3] },
        SurfaceSpec::SphereCap { center: [0.4, 0.2, 2.0], radius: 5.0 },
    ] {
        let spec = SceneSpec {
            surface,
            albedo: AlbedoSpec::Pattern { base: [0.7, 0.5, 0.4], amplitude: 0.3, wavelength: 4.0 },
        };
        scenes.push(render_fixture(&spec, camera(48, 35.0), LightSpec::colocated(), 2.2, 0.9).map_err(err)?);
    }
    for f in &scenes {
        let gray = luminance(&f.image);
        let loss = |d: &DepthMap<f64>| -> Result<f64, String> {
            let field = pps_from_depth(d, &f.k, &f.light).map_err(err)?;
            pps_corr_loss(&gray, &field.pps, &f.mask.and(&field.valid).map_err(err)?).map_err(err)
        };
        let base = loss(&f.depth)?;
        for c in [0.5, 3.0, 10.0] {
            worst = worst.max((loss(&f.depth.scaled(c).map_err(err)?)? - base).abs());
        }
    }
    Ok((worst < 1e-9, format!("max |L(cD) - L(D)| = {worst:.3e} over 3 scenes")))
}

fn refinement() -> Outcome {
    let f = tube_fixture().map_err(err)?;
    let init = perturbed(&f.depth, 0.2).map_err(err)?;
    let cfg = RefineConfig {
        max_iters: 500,
        ..Default::default()
    };
    let r = refine_depth(&init, &f.image, &f.k, &f.light, &f.mask, &cfg).map_err(err)?;
    let full = Mask::full(64, 64);
    let rmse = |d: &DepthMap<f64>| depth_metrics(d.grid(), f.depth.grid(), &full, Alignment::Ssi).map(|m| m.rmse);
    let (before, after) = (rmse(&init).map_err(err)?, rmse(&r.refined).map_err(err)?);
    let monotone = r.loss_trace.windows(2).all(|w| w[1] <= w[0]);
    let reduction = 1.0 - after / before;
    Ok((
        reduction >= 0.5 && monotone && r.iterations_used <= 500,
        format!(
            "SSI-RMSE {before:.4} -> {after:.4} ({:.1}% lower) in {} iterations, trace non-increasing: {monotone}",
            100.0 * reduction,
            r.iterations_used
        ),
    ))
}

fn albedo_inversion() -> Outcome {
    let k = camera(64, 40.0);
    let light = LightSpec::colocated();
    let cases = [
        (AlbedoSpec::Constant { rgb: [0.8, 0.55, 0.45] }, 1.0, 1e-9),
        (AlbedoSpec::Pattern { base: [0.7, 0.5, 0.4], amplitude: 0.3, wavelength: 5.0 }, 2.2, 1e-5),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (albedo, gamma, tol) in cases {
        let constant = matches!(albedo, AlbedoSpec::Constant { .. });
        let spec = SceneSpec {
            surface: SurfaceSpec::Tube { radius: 10.0, length: 60.0, offset: [2.0, -1.5] },
            albedo,
        };
        let scene = generate_scene::<f64>(&spec, &k).map_err(err)?;
        let model = RenderModel::new(1.0, 1.0, gamma, 0.0).map_err(err)?;
        let out = render(&scene.depth, &k, &light, &scene.albedo, &model).map_err(err)?;
        let inv = invert_albedo(&out.image, &scene.depth, &k, &light, &model).map_err(err)?;
        let mut worst = 0.0f64;
        for (u, v, &valid) in inv.valid.enumerate() {
            if valid {
                let (got, want) = (inv.albedo.get(u, v), scene.albedo.get(u, v));
                for c in 0..3 {
                    worst = worst.max((got[c] - want[c]).abs());
                }
            }
        }
        let count = inv.valid.count_valid();
        ok &= worst < tol && count > 0;
        parts.push(format!("gamma={gamma}: max err {worst:.2e} on {count} px"));
        if constant {
            let var = albedo_variance_loss(&inv.albedo, &inv.valid).map_err(err)?;
            ok &= var < 1e-12;
            parts.push(format!("variance {var:.2e}"));
        }
    }
    Ok((ok, parts.join(", ")))
}

fn metrics() -> Outcome {
    let gt = Grid::from_fn(8, 6, |u, v| 1.0 + 0.25 * u as f64 + 0.1 * (v * v) as f64);
    let full = Mask::full(8, 6);
    let near = depth_metrics(&gt.map(|d| 1.05 * d), &gt, &full, Alignment::None).map_err(err)?;
    let far = depth_metrics(&gt.map(|d| 1.2 * d), &gt, &full, Alignment::None).map_err(err)?;
    let affine = depth_metrics(&gt.map(|d| 0.5 * d - 0.2), &gt, &full, Alignment::Ssi).map_err(err)?;
    let same = depth_metrics(&gt, &gt, &full, Alignment::None).map_err(err)?;
    let ok = (near.absrel - 0.05).abs() < 1e-12
        && near.delta_1_1 == 1.0
        && far.delta_1_1 == 0.0
        && affine.rmse < 1e-9
        && same.rmse == 0.0
        && same.absrel == 0.0;
    Ok((
        ok,
        format!(
            "AbsRel(1.05 gt) = {:.3e} off 0.05, delta {} / {}, SSI rmse of affine copy {:.1e}",
            (near.absrel - 0.05).abs(),
            near.delta_1_1,
            far.delta_1_1,
            affine.rmse
        ),
    ))
}

fn wiring() -> Outcome {
    let mut failures = Vec::new();
    let q = FeatureMap::from_rows(&[vec![1.0, -2.0, 0.5, 0.0], vec![-0.3, 0.9, 2.0, 1.1]]).map_err(err)?;
    let k1 = FeatureMap::from_rows(&[vec![0.2, 0.4, -1.0, 3.0]]).map_err(err)?;
    let v1 = FeatureMap::from_rows(&[vec![5.0, -1.0, 0.0, 2.5]]).map_err(err)?;
    let out = cross_attention(&q, &k1, &v1, 2).map_err(err)?;
    if (0..2).any(|t| out.row(t) != v1.row(0)) {
        failures.push("single-token attention");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rows = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect()
    };
    let k5 = FeatureMap::from_rows(&rows(5, &mut rng)).map_err(err)?;
    let v5 = FeatureMap::from_rows(&rows(5, &mut rng)).map_err(err)?;
    let (_, maps) = cross_attention_with_weights(&q, &k5, &v5, 2).map_err(err)?;
    let row_err = maps
        .iter()
        .flat_map(|m| (0..m.tokens()).map(move |t| (m.row(t).iter().sum::<f64>() - 1.0).abs()))
        .fold(0.0, f64::max);
    if row_err > 1e-12 {
        failures.push("softmax rows");
    }

    let x = Tensor3::from_vec(3, 2, 2, (0..12).map(|i| (i as f64 - 5.5) * 1.7).collect()).map_err(err)?;
    if film_modulate(&x, &FilmParams::identity(3)).map_err(err)? != x {
        failures.push("FiLM identity");
    }

    let f = small_scene(4, 16).map_err(err)?.fixture;
    let w = ToyWeights::seeded_zero_refiner(7, 16).map_err(err)?;
    let trace = ppsnet_forward(&f.image, &f.depth, &f.k, &f.light, &w, &PatchEncoder, 4).map_err(err)?;
    if trace.refined.as_slice() != f.depth.grid().as_slice() {
        failures.push("zero-refiner residual");
    }
    Ok(if failures.is_empty() {
        (true, format!("single-token, softmax rows ({row_err:.1e}), FiLM identity, zero-refiner residual"))
    } else {
        (false, format!("failed: {}", failures.join(", ")))
    })
}

fn finite_f32(rng: &mut ChaCha8Rng) -> f32 {
    loop {
        let x = f32::from_bits(rng.gen());
        if x.is_finite() {
            return x;
        }
    }
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = [0usize; 3];
    for _ in 0..100 {
        let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let grid = Grid::from_fn(w, h, |_, _| finite_f32(&mut rng));
        let endian = if rng.gen() { Endian::Little } else { Endian::Big };
        let back = decode_pfm(&encode_pfm(&grid, endian)).map_err(err)?;
        let same = back.width() == w
            && back.height() == h
            && back.as_slice().iter().zip(grid.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
        failures[0] += usize::from(!same);

        let n = rng.gen_range(1..500);
        let vertices: Vec<[f32; 3]> = (0..n).map(|_| [0; 3].map(|_: i32| finite_f32(&mut rng))).collect();
        let colors = rng.gen::<bool>().then(|| (0..n).map(|_| rng.gen()).collect());
        let cloud = PointCloud { vertices, colors };
        let back = PointCloud::decode(&cloud.encode(PlyFormat::BinaryLittleEndian)).map_err(err)?;
        let bits = |c: &PointCloud| -> Vec<u32> { c.vertices.iter().flatten().map(|x| x.to_bits()).collect() };
        failures[1] += usize::from(bits(&back) != bits(&cloud) || back.colors != cloud.colors);

        let mut weights = ToyWeights::seeded(rng.gen(), 4 * rng.gen_range(1..5)).map_err(err)?;
        let names: Vec<String> = weights.tensors().map(|t| t.name.clone()).collect();
        for name in names {
            for x in weights.get_mut(&name).map_err(err)?.data.iter_mut() {
                *x = finite_f32(&mut rng);
            }
        }
        let bytes = weights.to_bytes();
        let back = ToyWeights::from_bytes(&bytes).map_err(err)?;
        failures[2] += usize::from(back.to_bytes() != bytes);
    }
    Ok((
        failures == [0; 3],
        format!(
            "100 cases each, mismatches: pfm {}, ply-binary {}, weights {}",
            failures[0], failures[1], failures[2]
        ),
    ))
}

fn selfcheck_binary() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_ppsdepth")).arg("selfcheck").output().map_err(err)?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines = stdout.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count();
    Ok((
        out.status.success() && lines == 5,
        format!("{}, {lines} check lines", out.status),
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "inverse-square law", budget: Duration::from_secs(1), run: inverse_square },
        Criterion { id: 2, name: "shading correlation", budget: Duration::from_secs(10), run: shading_correlation_check },
        Criterion { id: 3, name: "gradient correctness", budget: Duration::from_secs(30), run: gradients },
        Criterion { id: 4, name: "scale-gauge invariance", budget: Duration::from_secs(10), run: scale_gauge },
        Criterion { id: 5, name: "refinement", budget: Duration::from_secs(120), run: refinement },
        Criterion { id: 6, name: "albedo inversion", budget: Duration::from_secs(10), run: albedo_inversion },
        Criterion { id: 7, name: "metric sanity", budget: Duration::from_secs(10), run: metrics },
        Criterion { id: 8, name: "network wiring", budget: Duration::from_secs(10), run: wiring },
        Criterion { id: 9, name: "format round trips", budget: Duration::from_secs(30), run: round_trips },
        Criterion { id: 10, name: "selfcheck binary", budget: Duration::from_secs(60), run: selfcheck_binary },
    ];
    let mut failed = 0;
    for c in criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok((_, detail)) if elapsed > c.budget => (false, format!("{detail}; over budget {:?}", c.budget)),
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "[{}] {}. {}: {} ({:.2?})",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
