use ppsdepth::geometry::{CameraIntrinsics, DepthMap, LightSpec};
use ppsdepth::grid::{Grid, Mask};
use ppsdepth::photometrics::{
    albedo_proxy, albedo_variance_loss, generate_scene, invert_albedo, luminance, render, specular_mask, AlbedoMap,
    AlbedoSpec, ImageGray, ImageRgb, RenderModel, SceneSpec, SurfaceSpec,
};
use ppsdepth::vec3::Vec3;
use proptest::prelude::*;

fn tube(albedo: AlbedoSpec) -> (ppsdepth::photometrics::SyntheticScene<f64>, CameraIntrinsics<f64>) {
    let k = CameraIntrinsics::new(40.0, 40.0, 31.5, 31.5, 64, 64).unwrap();
    let spec = SceneSpec {
        surface: SurfaceSpec::Tube { radius: 10.0, length: 60.0, offset: [2.0, -1.5] },
        albedo,
    };
    (generate_scene(&spec, &k).unwrap(), k)
}

fn pattern() -> AlbedoSpec {
    AlbedoSpec::Pattern { base: [0.8, 0.5, 0.4], amplitude: 0.3, wavelength: 7.0 }
}

proptest! {
    #[test]
    fn proxy_is_rgb_over_max(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        prop_assume!(r.max(g).max(b) > 1e-6);
        let img = ImageRgb::new(Grid::filled(1, 1, [r, g, b])).unwrap();
        let p = albedo_proxy(&img).get(0, 0);
        let m = r.max(g).max(b);
        for (got, want) in p.iter().zip([r / m, g / m, b / m]) {
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn raising_threshold_never_unmasks(values in proptest::collection::vec(0.0f64..=1.0, 36), t1 in 0.01f64..=1.0, t2 in 0.01f64..=1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let gray = ImageGray::new(Grid::from_vec(6, 6, values).unwrap()).unwrap();
        let a = specular_mask(&gray, lo).unwrap();
        let b = specular_mask(&gray, hi).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!(!x || *y);
        }
    }

    #[test]
    fn variance_loss_is_permutation_invariant(vals in proptest::collection::vec([0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0], 12), rot in 0usize..12) {
        let a = AlbedoMap::new(Grid::from_vec(4, 3, vals.clone()).unwrap()).unwrap();
        let mut shuffled = vals;
        shuffled.rotate_left(rot);
        let b = AlbedoMap::new(Grid::from_vec(4, 3, shuffled).unwrap()).unwrap();
        let m = Mask::full(4, 3);
        let (la, lb) = (albedo_variance_loss(&a, &m).unwrap(), albedo_variance_loss(&b, &m).unwrap());
        prop_assert!((la - lb).abs() < 1e-14);
    }
}

/// Per-pixel render from first principles: own normal estimate, own light terms.
fn brute_force_pixel(
    depth: &DepthMap<f64>,
    k: &CameraIntrinsics<f64>,
    light: &LightSpec<f64>,
    rho: [f64; 3],
    m: &RenderModel<f64>,
    u: usize,
    v: usize,
) -> [f64; 3] {
    let x = |u: usize, v: usize| {
        let d = depth.get(u, v);
        Vec3::new((u as f64 - k.cx) / k.fx * d, (v as f64 - k.cy) / k.fy * d, d)
    };
    let diff = |i: usize, n: usize, f: &dyn Fn(usize) -> Vec3<f64>| {
        if i == 0 {
            f(1) - f(0)
        } else if i == n - 1 {
            f(n - 1) - f(n - 2)
        } else {
            (f(i + 1) - f(i - 1)) / 2.0
        }
    };
    let du = diff(u, depth.width(), &|i| x(i, v));
    let dv = diff(v, depth.height(), &|j| x(u, j));
    let n = du.cross(dv);
    let n = n / n.norm();
    let to = x(u, v) - light.position;
    let r2 = to.norm_squared();
    let l = to / r2.sqrt();
    let spread = l.dot(light.direction).max(0.0).powf(m.mu_r);
    let shade = m.sigma0 * m.gain * spread * l.dot(n).max(0.0) / r2;
    rho.map(|c| (shade * c).powf(1.0 / m.gamma).min(1.0))
}

#[test]
fn render_matches_brute_force() {
    let (scene, k) = tube(pattern());
    let light = LightSpec::new(Vec3::new(0.5, -0.3, 0.0), Vec3::new(0.0, 0.0, 1.0), 0.0).unwrap();
    for model in [RenderModel::new(60.0, 1.2, 1.0, 0.0).unwrap(), RenderModel::new(90.0, 1.0, 2.2, 1.0).unwrap()] {
        let out = render(&scene.depth, &k, &light, &scene.albedo, &model).unwrap();
        let mut worst = 0.0f64;
        for v in 0..64 {
            for u in 0..64 {
                let want = brute_force_pixel(&scene.depth, &k, &light, scene.albedo.get(u, v), &model, u, v);
                let got = out.image.get(u, v);
                for c in 0..3 {
                    worst = worst.max((got[c] - want[c]).abs());
                }
            }
        }
        assert!(worst < 1e-9, "max abs diff {worst}");
    }
}

fn round_trip_error(albedo: AlbedoSpec, gamma: f64) -> (f64, usize, f64) {
    let (scene, k) = tube(albedo);
    let light = LightSpec::colocated();
    let model = RenderModel::new(1.0, 1.0, gamma, 0.0).unwrap();
    let out = render(&scene.depth, &k, &light, &scene.albedo, &model).unwrap();
    let inv = invert_albedo(&out.image, &scene.depth, &k, &light, &model).unwrap();
    let mut worst = 0.0f64;
    for (u, v, &ok) in inv.valid.enumerate() {
        if ok {
            let (a, b) = (inv.albedo.get(u, v), scene.albedo.get(u, v));
            for c in 0..3 {
                worst = worst.max((a[c] - b[c]).abs());
            }
        }
    }
    let var = albedo_variance_loss(&inv.albedo, &inv.valid).unwrap();
    (worst, inv.valid.count_valid(), var)
}

#[test]
fn inversion_round_trip_gamma_one() {
    let (err, valid, var) = round_trip_error(AlbedoSpec::Constant { rgb: [0.8, 0.4, 0.4] }, 1.0);
    assert!(valid > 4000);
    assert!(err < 1e-9, "{err}");
    assert!(var < 1e-12, "{var}");
}

#[test]
fn inversion_round_trip_gamma_22_procedural() {
    let (err, valid, _) = round_trip_error(pattern(), 2.2);
    assert!(valid > 4000);
    assert!(err < 1e-5, "{err}");
}

#[test]
fn zero_intensity_gives_zero_albedo() {
    let (scene, k) = tube(AlbedoSpec::Constant { rgb: [0.0, 0.5, 0.5] });
    let light = LightSpec::colocated();
    let model = RenderModel::default();
    let out = render(&scene.depth, &k, &light, &scene.albedo, &model).unwrap();
    let inv = invert_albedo(&out.image, &scene.depth, &k, &light, &model).unwrap();
    for (u, v, &ok) in inv.valid.enumerate() {
        if ok {
            assert_eq!(inv.albedo.get(u, v)[0], 0.0);
        }
    }
}

#[test]
fn constant_albedo_tube_correlates_with_shading() {
    let (scene, k) = tube(AlbedoSpec::Constant { rgb: [0.8, 0.55, 0.45] });
    let light = LightSpec::colocated();
    let out = render(&scene.depth, &k, &light, &scene.albedo, &RenderModel::new(50.0, 1.0, 1.0, 0.0).unwrap()).unwrap();
    let gray = luminance(&out.image);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (u, v, &c) in out.clamped.enumerate() {
        if !c {
            xs.push(gray.get(u, v));
            ys.push(*out.field.pps.get(u, v));
        }
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|b| (b - my).powi(2)).sum();
    assert!(sxy / (sxx * syy).sqrt() > 0.999999);
}
