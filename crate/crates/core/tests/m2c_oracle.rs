mod common;

use contour_bench::m2c::{mask_to_contour, mask_to_contours_all, ClassSpec, Connectivity};
use contour_bench::raster::SegMask;
use rand::Rng;

#[test]
fn matches_neighbourhood_oracle_on_random_masks() {
    let mut r = common::rng(11);
    for case in 0..300 {
        let w = r.gen_range(1..=64);
        let h = r.gen_range(1..=64);
        let n_classes = r.gen_range(2..=6);
        let ignore = if case % 2 == 0 { Some(255) } else { None };
        let labels = common::random_labels(&mut r, w, h, n_classes, ignore);
        let mask = SegMask::new(w as u32, h as u32, labels.clone(), ignore).unwrap();
        for cls in 0..n_classes {
            for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
                let got = mask_to_contour(&mask, cls, conn).unwrap();
                let want = common::contour_oracle(&labels, w, h, cls, ignore, eight);
                assert_eq!(got.bits(), &want[..], "case {case} class {cls} {conn:?}");
            }
        }
    }
}

/// With a one-pixel background frame inside the image, the 4-neighbour inner
/// boundary of every other class is exactly the set of pixels visited by
/// border following over all outer and hole borders.
#[test]
fn equals_border_following_pixel_set() {
    let mut r = common::rng(12);
    for case in 0..200 {
        let w = r.gen_range(3..=48);
        let h = r.gen_range(3..=48);
        let n_classes = r.gen_range(2..=5);
        let mut labels = common::random_labels(&mut r, w, h, n_classes, None);
        for y in 0..h {
            for x in 0..w {
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    labels[y * w + x] = 0;
                }
            }
        }
        let mask = SegMask::new(w as u32, h as u32, labels.clone(), None).unwrap();
        for cls in 1..n_classes {
            let fg: Vec<bool> = labels.iter().map(|&v| v == cls).collect();
            let traced = common::border_following(&fg, w, h);
            let got = mask_to_contour(&mask, cls, Connectivity::Four).unwrap();
            assert_eq!(got.bits(), &traced[..], "case {case} class {cls}");
        }
    }
}

#[test]
fn two_class_boundary_is_symmetric() {
    let mut r = common::rng(13);
    for case in 0..200 {
        let (w, h) = (r.gen_range(2..=40), r.gen_range(2..=40));
        let labels = common::random_labels(&mut r, w, h, 2, None);
        let mask = SegMask::new(w as u32, h as u32, labels.clone(), None).unwrap();
        let classes = [ClassSpec::new(0, "a"), ClassSpec::new(1, "b")];
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let all = mask_to_contours_all(&mask, &classes, conn).unwrap();
            let (ca, cb) = (&all[&0].contour, &all[&1].contour);
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let a = labels[(y * w as i64 + x) as usize];
                    let mine = if a == 0 { ca } else { cb };
                    let theirs = if a == 0 { cb } else { ca };
                    let mut neighbours_other = Vec::new();
                    for &(dx, dy) in conn.offsets() {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64
                            && labels[(ny * w as i64 + nx) as usize] != a
                        {
                            neighbours_other.push((nx as u32, ny as u32));
                        }
                    }
                    let on = mine.get(x as u32, y as u32);
                    assert_eq!(on, !neighbours_other.is_empty(), "case {case}");
                    for (nx, ny) in neighbours_other {
                        assert!(theirs.get(nx, ny), "case {case}: partner not on contour");
                    }
                }
            }
        }
    }
}

#[test]
fn foreground_containment_and_purity() {
    let mut r = common::rng(14);
    for _ in 0..50 {
        let (w, h) = (r.gen_range(1..=32), r.gen_range(1..=32));
        let labels = common::random_labels(&mut r, w, h, 4, Some(9));
        let mask = SegMask::new(w as u32, h as u32, labels, Some(9)).unwrap();
        for cls in 0..4 {
            let a = mask_to_contour(&mask, cls, Connectivity::Four).unwrap();
            let b = mask_to_contour(&mask, cls, Connectivity::Four).unwrap();
            assert_eq!(a, b);
            for (x, y) in a.points() {
                assert_eq!(mask.get(x, y), cls);
            }
        }
    }
}
