use ppsdepth::geometry::{CameraIntrinsics, DepthMap};
use ppsdepth::grid::{Grid, Mask};
use ppsdepth::io::{
    decode_pfm, encode_pfm, read_depth, write_depth, Endian, PipelineConfig, PlyFormat, PointCloud,
};
use ppsdepth::photometrics::ImageRgb;
use proptest::prelude::*;

fn finite_f32() -> impl Strategy<Value = f32> {
    any::<f32>().prop_filter("finite", |x| x.is_finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pfm_is_bit_exact(w in 1usize..9, h in 1usize..9, data in proptest::collection::vec(finite_f32(), 64), big in any::<bool>()) {
        let g = Grid::from_vec(w, h, data[..w * h].to_vec()).unwrap();
        let endian = if big { Endian::Big } else { Endian::Little };
        let back = decode_pfm(&encode_pfm(&g, endian)).unwrap();
        prop_assert!(g.as_slice().iter().zip(back.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn binary_ply_is_bit_exact(
        verts in proptest::collection::vec([finite_f32(), finite_f32(), finite_f32()], 1..40),
        coloured in any::<bool>(), seed in any::<u8>(),
    ) {
        let colors = coloured.then(|| verts.iter().enumerate().map(|(i, _)| [seed, i as u8, seed ^ i as u8]).collect());
        let cloud = PointCloud { vertices: verts, colors };
        let back = PointCloud::decode(&cloud.encode(PlyFormat::BinaryLittleEndian)).unwrap();
        prop_assert_eq!(back.colors, cloud.colors);
        prop_assert!(cloud.vertices.iter().flatten().zip(back.vertices.iter().flatten()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn depth_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.pfm");
    let d = DepthMap::new(Grid::from_vec(2, 2, vec![1.0f32, 2.0, 3.0, 4.0]).unwrap()).unwrap();
    write_depth(&path, &d).unwrap();
    assert_eq!(read_depth::<f32>(&path).unwrap(), d);
    // truncated files never produce a partial map
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
    assert!(read_depth::<f32>(&path).is_err());
}

#[test]
fn exported_plane_has_constant_z() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.ply");
    let d = DepthMap::constant(5, 4, 2.0f64).unwrap();
    let k = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0, 5, 4).unwrap();
    let img = ImageRgb::from_fn(5, 4, |u, v| [u as f64 / 4.0, v as f64 / 3.0, 0.5]).unwrap();
    ppsdepth::io::export_pointcloud(&d, &k, &Mask::full(5, 4), Some(&img), &path, PlyFormat::Ascii).unwrap();
    let cloud = PointCloud::read(&path).unwrap();
    assert_eq!(cloud.len(), 20);
    assert!(cloud.vertices.iter().all(|p| p[2] == 2.0));
}

#[test]
fn example_config_parses() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/tube.toml");
    let cfg = PipelineConfig::load(path).unwrap();
    assert!(cfg.scene().is_ok());
}
