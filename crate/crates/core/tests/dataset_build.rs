mod common;

use std::fs;
use std::path::{Path, PathBuf};

use contour_bench::dataset::{
    build_manifest, prompt_for, read_records, validate_manifest, write_records, BuildOptions, Manifest,
    ViolationKind, MANIFEST_FILE,
};
use contour_bench::m2c::{ClassSpec, ClassTable};
use contour_bench::raster::{load_contour, load_mask, save_gray, save_mask, GrayImage, SegMask};

fn table(names: &[&str]) -> ClassTable {
    ClassTable::new(names.iter().enumerate().map(|(i, n)| ClassSpec::new(i as u8 + 1, *n)).collect()).unwrap()
}

/// Writes `images/<stem>.png` and `masks/<stem>.png` for each label grid.
fn write_pairs(root: &Path, pairs: &[(&str, u32, u32, Vec<u8>)]) -> (PathBuf, PathBuf) {
    let images = root.join("images");
    let masks = root.join("masks");
    fs::create_dir_all(&images).unwrap();
    fs::create_dir_all(&masks).unwrap();
    for (stem, w, h, labels) in pairs {
        let img = GrayImage::<f64>::from_fn(*w, *h, |x, y| ((x + y) % 7) as f64 / 7.0).unwrap();
        save_gray(&img, images.join(format!("{stem}.png"))).unwrap();
        save_mask(&SegMask::new(*w, *h, labels.clone(), None).unwrap(), masks.join(format!("{stem}.png"))).unwrap();
    }
    (images, masks)
}

/// Vertical stripes of classes 0..=n.
fn stripes(w: u32, h: u32, n: u8) -> Vec<u8> {
    (0..h).flat_map(|_| (0..w).map(move |x| (x * (n as u32 + 1) / w) as u8)).collect()
}

#[test]
fn one_record_per_present_class() {
    let dir = tempfile::tempdir().unwrap();
    let mut partial = stripes(24, 16, 3);
    for v in partial.iter_mut().filter(|v| **v == 3) {
        *v = 0;
    }
    let (images, masks) = write_pairs(dir.path(), &[("a", 24, 16, stripes(24, 16, 3)), ("b", 24, 16, partial)]);
    let out = dir.path().join("out");
    let t = table(&["building", "road", "water"]);
    let res = build_manifest(&images, &masks, &t, &out, &BuildOptions::default()).unwrap();
    assert!(res.errors.is_empty());
    assert_eq!(res.manifest.records.len(), 5);
    assert_eq!(res.skipped, vec![("b".to_string(), 3)]);

    let recs = &res.manifest.records;
    let order: Vec<(String, u8)> = recs.iter().map(|r| (r.image_stem(), r.class_index)).collect();
    assert_eq!(order, [("a", 1), ("a", 2), ("a", 3), ("b", 1), ("b", 2)].map(|(s, c)| (s.to_string(), c)));
    assert_eq!(recs[0].prompt, "Edge of all buildings");
    assert_eq!(recs[2].prompt, "Edge of all water");
    assert_eq!(recs[1].contour_path, "custom/road/a.png");
    assert!(Path::new(&recs[0].image_path).is_absolute());

    assert!(validate_manifest(&res.manifest_path).unwrap().is_empty());
    let loaded = Manifest::load(&res.manifest_path).unwrap();
    assert_eq!(loaded, res.manifest);
}

#[test]
fn contour_files_match_the_neighbourhood_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = common::rng(3);
    let pairs: Vec<_> = (0..4)
        .map(|i| {
            let labels = common::random_labels(&mut r, 40, 30, 4, None);
            (["p0", "p1", "p2", "p3"][i], 40, 30, labels)
        })
        .collect();
    let (images, masks) = write_pairs(dir.path(), &pairs);
    let out = dir.path().join("out");
    let t = table(&["building", "road", "water", "forest"]);
    let res = build_manifest(&images, &masks, &t, &out, &BuildOptions::default()).unwrap();
    for rec in &res.manifest.records {
        let mask = load_mask(masks.join(format!("{}.png", rec.image_stem())), None).unwrap();
        let want = common::contour_oracle(mask.labels(), 40, 30, rec.class_index, None, false);
        let got = load_contour(out.join(&rec.contour_path)).unwrap();
        assert_eq!(got.bits(), want.as_slice(), "{}", rec.contour_path);
    }
}

#[test]
fn six_class_census_counts_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["building", "road", "water", "barren", "forest", "agriculture"];
    let mut r = common::rng(11);
    let pairs: Vec<_> = (0..5)
        .map(|i| (["t0", "t1", "t2", "t3", "t4"][i], 32, 32, common::random_labels(&mut r, 32, 32, 7, None)))
        .collect();
    let expected: usize = pairs
        .iter()
        .map(|(_, _, _, l)| (1..=6u8).filter(|c| l.contains(c)).count())
        .sum();
    let (images, masks) = write_pairs(dir.path(), &pairs);
    let out = dir.path().join("out");
    let opts = BuildOptions { source_dataset: "loveda".into(), ..BuildOptions::default() };
    let res = build_manifest(&images, &masks, &table(&names), &out, &opts).unwrap();
    assert_eq!(res.manifest.records.len(), expected);

    let s = res.manifest.stats();
    let lines = fs::read_to_string(&res.manifest_path).unwrap().lines().count();
    assert_eq!(s.total, lines);
    assert_eq!(s.per_class.iter().map(|c| c.count).sum::<usize>(), lines);
    assert_eq!(s.per_source.len(), 1);
    assert_eq!(s.per_source[0].name, "loveda");
    assert!((s.per_source[0].percent - 100.0).abs() < 1e-9);
    assert!(s.render_table().contains("total"));
}

#[test]
fn validation_reports_broken_records() {
    let dir = tempfile::tempdir().unwrap();
    let (images, masks) = write_pairs(dir.path(), &[("a", 24, 16, stripes(24, 16, 3))]);
    let out = dir.path().join("out");
    let res = build_manifest(&images, &masks, &table(&["building", "road", "water"]), &out, &BuildOptions::default()).unwrap();

    let mut recs = read_records(&res.manifest_path).unwrap();
    fs::remove_file(out.join(&recs[1].contour_path)).unwrap();
    recs[0].prompt = "Edges of building".into();
    recs.push(recs[2].clone());
    write_records(&res.manifest_path, &recs).unwrap();

    let v = validate_manifest(&res.manifest_path).unwrap();
    let kinds: Vec<(usize, ViolationKind)> = v.iter().map(|v| (v.line, v.kind)).collect();
    assert!(kinds.contains(&(1, ViolationKind::TemplateMismatch)), "{v:?}");
    assert!(kinds.contains(&(2, ViolationKind::MissingFile)), "{v:?}");
    assert!(kinds.contains(&(4, ViolationKind::DuplicateKey)), "{v:?}");

    fs::remove_file(out.join(contour_bench::dataset::META_FILE)).unwrap();
    let v = validate_manifest(&res.manifest_path).unwrap();
    assert!(v.iter().any(|v| v.kind == ViolationKind::Metadata));
}

#[test]
fn rebuild_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = common::rng(5);
    let pairs: Vec<_> = (0..3)
        .map(|i| (["x", "y", "z"][i], 30, 20, common::random_labels(&mut r, 30, 20, 3, Some(255))))
        .collect();
    let (images, masks) = write_pairs(dir.path(), &pairs);
    let t = table(&["building", "road", "water"]);
    let opts = BuildOptions { ignore_index: Some(255), workers: Some(2), ..BuildOptions::default() };
    let a = build_manifest(&images, &masks, &t, dir.path().join("a"), &opts).unwrap();
    let b = build_manifest(&images, &masks, &t, dir.path().join("b"), &BuildOptions { workers: Some(1), ..opts }).unwrap();
    assert_eq!(fs::read(&a.manifest_path).unwrap(), fs::read(&b.manifest_path).unwrap());
    for rec in &a.manifest.records {
        let pa = dir.path().join("a").join(&rec.contour_path);
        let pb = dir.path().join("b").join(&rec.contour_path);
        assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
    }
}

#[test]
fn missing_mask_is_reported_and_build_continues() {
    let dir = tempfile::tempdir().unwrap();
    let (images, masks) = write_pairs(dir.path(), &[("a", 24, 16, stripes(24, 16, 3)), ("b", 24, 16, stripes(24, 16, 3))]);
    fs::remove_file(masks.join("a.png")).unwrap();
    let res = build_manifest(&images, &masks, &table(&["building", "road", "water"]), dir.path().join("o"), &BuildOptions::default()).unwrap();
    assert_eq!(res.errors.len(), 1);
    assert!(res.errors[0].path.ends_with("a.png"));
    assert_eq!(res.manifest.records.len(), 3);
    assert!(dir.path().join("o").join(MANIFEST_FILE).is_file());
}

#[test]
fn prompt_template_literal() {
    assert_eq!(prompt_for("building").unwrap(), "Edge of all buildings");
    assert_eq!(prompt_for("road").unwrap(), "Edge of all roads");
    assert!(prompt_for(" ").is_err());
}
