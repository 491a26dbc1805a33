//! Randomized property suites for the grid, morphology, flooding, and I/O
//! layers: structural invariants that must hold on any input, checked over
//! seeded generator distributions.

use proptest::prelude::*;

use octseg_core::grid::{label_components, neighbors, BinaryMask, Connectivity, GrayImage};
use octseg_core::io::{read_gray, read_label_pgm, write_gray_pgm, write_label_pgm};
use octseg_core::morph::{
    dilate, distance_transform, erode, fill_holes, reconstruct_by_dilation, regional_minima,
    SeShape, StructuringElement,
};
use octseg_core::watershed::{marker_watershed, watershed_vs};
use octseg_core::LabelMap;

fn conn_strategy() -> impl Strategy<Value = Connectivity> {
    prop_oneof![Just(Connectivity::Four), Just(Connectivity::Eight)]
}

/// Integer-valued images survive the flooding quantization unchanged, so
/// intensity-order arguments hold exactly.
fn int_gray(max_side: u32, levels: u8) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
        proptest::collection::vec(0..=levels, (w * h) as usize).prop_map(move |v| {
            GrayImage::from_vec(w, h, v.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

fn small_mask(max_side: u32) -> impl Strategy<Value = BinaryMask> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<bool>(), (w * h) as usize)
            .prop_map(move |v| BinaryMask::from_vec(w, h, v).unwrap())
    })
}

fn se_strategy() -> impl Strategy<Value = StructuringElement> {
    (
        prop_oneof![Just(SeShape::Square), Just(SeShape::Cross), Just(SeShape::Disk)],
        0u32..=2,
    )
        .prop_map(|(shape, radius)| StructuringElement { shape, radius })
}

proptest! {
    #[test]
    fn neighbor_relation_is_symmetric_bounded_and_duplicate_free(
        w in 1u32..=9,
        h in 1u32..=9,
        conn in conn_strategy(),
    ) {
        let cap = match conn { Connectivity::Four => 4, Connectivity::Eight => 8 };
        for y in 0..h {
            for x in 0..w {
                let ns = neighbors(x, y, w, h, conn);
                prop_assert!(ns.len() <= cap);
                let mut seen = std::collections::HashSet::new();
                for &(nx, ny) in &ns {
                    prop_assert!(nx < w && ny < h, "out of bounds: ({nx},{ny})");
                    prop_assert!((nx, ny) != (x, y), "self-neighbor");
                    prop_assert!(seen.insert((nx, ny)), "duplicate neighbor");
                    let back = neighbors(nx, ny, w, h, conn);
                    prop_assert!(back.contains(&(x, y)), "asymmetric adjacency");
                }
            }
        }
    }

    #[test]
    fn erosion_shrinks_dilation_grows_and_both_are_monotone(
        img in int_gray(8, 255),
        bump in proptest::collection::vec(0u8..=40, 64),
        se in se_strategy(),
    ) {
        let e = erode(&img, &se);
        let d = dilate(&img, &se);
        for i in 0..img.data().len() {
            prop_assert!(e.data()[i] <= img.data()[i], "erosion must not grow");
            prop_assert!(d.data()[i] >= img.data()[i], "dilation must not shrink");
        }
        // Raise the image pointwise; both operators must follow.
        let raised = GrayImage::from_vec(
            img.width(),
            img.height(),
            img.data()
                .iter()
                .enumerate()
                .map(|(i, &v)| v + f64::from(bump[i % bump.len()]))
                .collect(),
        ).unwrap();
        let e2 = erode(&raised, &se);
        let d2 = dilate(&raised, &se);
        for i in 0..img.data().len() {
            prop_assert!(e2.data()[i] >= e.data()[i], "erosion not monotone");
            prop_assert!(d2.data()[i] >= d.data()[i], "dilation not monotone");
        }
    }

    #[test]
    fn erosion_and_dilation_are_dual_under_complement(
        img in int_gray(8, 255),
        se in se_strategy(),
    ) {
        let complement = img.map(|v| 255.0 - v);
        let lhs = erode(&img, &se);
        let rhs = dilate(&complement, &se).map(|v| 255.0 - v);
        for i in 0..img.data().len() {
            prop_assert_eq!(lhs.data()[i], rhs.data()[i]);
        }
    }

    #[test]
    fn reconstruction_is_bounded_and_idempotent(
        mask_img in int_gray(8, 200),
        dip in proptest::collection::vec(0u8..=200, 64),
        conn in conn_strategy(),
    ) {
        // A marker never above the mask, by construction.
        let marker = GrayImage::from_vec(
            mask_img.width(),
            mask_img.height(),
            mask_img
                .data()
                .iter()
                .enumerate()
                .map(|(i, &v)| (v - f64::from(dip[i % dip.len()])).max(0.0))
                .collect(),
        ).unwrap();
        let rec = reconstruct_by_dilation(&marker, &mask_img, conn).unwrap();
        for i in 0..rec.data().len() {
            prop_assert!(rec.data()[i] >= marker.data()[i], "below marker");
            prop_assert!(rec.data()[i] <= mask_img.data()[i], "above mask");
        }
        let again = reconstruct_by_dilation(&rec, &mask_img, conn).unwrap();
        prop_assert_eq!(rec.data(), again.data(), "not a fixed point");
    }

    #[test]
    fn hole_filling_is_idempotent_and_never_clears(
        mask in small_mask(9),
        conn in conn_strategy(),
    ) {
        let once = fill_holes(&mask, conn);
        for i in 0..mask.data().len() {
            prop_assert!(!mask.data()[i] || once.data()[i], "true pixel cleared");
        }
        let twice = fill_holes(&once, conn);
        prop_assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn distance_transform_matches_brute_force(mask in small_mask(6)) {
        prop_assume!(mask.count_true() > 0);
        let dt = distance_transform(&mask).unwrap();
        let (w, h) = (mask.width(), mask.height());
        for y in 0..h {
            for x in 0..w {
                let mut best = f64::INFINITY;
                for ty in 0..h {
                    for tx in 0..w {
                        if mask.get(tx, ty) {
                            let dx = f64::from(tx) - f64::from(x);
                            let dy = f64::from(ty) - f64::from(y);
                            best = best.min((dx * dx + dy * dy).sqrt());
                        }
                    }
                }
                prop_assert!(
                    (dt.get(x, y) - best).abs() <= 1e-6,
                    "EDT at ({},{}) = {} but brute force = {}",
                    x, y, dt.get(x, y), best
                );
            }
        }
    }

    #[test]
    fn watershed_labels_partition_into_connected_basins(
        img in int_gray(10, 5),
        conn in conn_strategy(),
    ) {
        let ws = watershed_vs(&img, conn).unwrap();
        let (w, h) = (img.width(), img.height());
        // Labels are exactly 0..=n_basins with every basin present.
        let mut seen = vec![false; ws.n_basins as usize + 1];
        for &l in ws.labels.data() {
            prop_assert!(l <= ws.n_basins);
            seen[l as usize] = true;
        }
        for l in 1..=ws.n_basins as usize {
            prop_assert!(seen[l], "basin {l} missing");
        }
        // Each basin is connected under conn.
        for l in 1..=ws.n_basins {
            let pixels: Vec<(u32, u32)> = (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| ws.labels.get(x, y) == l)
                .collect();
            let mut reached = std::collections::HashSet::new();
            let mut queue = std::collections::VecDeque::new();
            reached.insert(pixels[0]);
            queue.push_back(pixels[0]);
            while let Some((qx, qy)) = queue.pop_front() {
                for (nx, ny) in neighbors(qx, qy, w, h, conn) {
                    if ws.labels.get(nx, ny) == l && reached.insert((nx, ny)) {
                        queue.push_back((nx, ny));
                    }
                }
            }
            prop_assert_eq!(reached.len(), pixels.len(), "basin {} disconnected", l);
        }
        // Exactly one regional-minimum component per basin.
        let minima = regional_minima(&img, conn);
        let (min_comps, n_min) = label_components(&minima, conn);
        prop_assert_eq!(ws.n_basins, n_min, "basin count != minima components");
        let mut basin_of = vec![0u32; n_min as usize + 1];
        for (i, &c) in min_comps.data().iter().enumerate() {
            if c != 0 {
                let basin = ws.labels.data()[i];
                prop_assert_ne!(basin, 0, "minimum flooded as watershed line");
                if basin_of[c as usize] == 0 {
                    basin_of[c as usize] = basin;
                } else {
                    prop_assert_eq!(basin_of[c as usize], basin, "minimum split");
                }
            }
        }
        let mut uniq: Vec<u32> = basin_of[1..].to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), n_min as usize, "two minima share a basin");
    }

    #[test]
    fn marker_flooding_yields_one_basin_per_marker_component(
        img in int_gray(10, 7),
        bits in proptest::collection::vec(any::<bool>(), 100),
        conn in conn_strategy(),
    ) {
        let n = img.data().len();
        let mask = BinaryMask::from_vec(
            img.width(),
            img.height(),
            (0..n).map(|i| bits[i % bits.len()]).collect(),
        ).unwrap();
        prop_assume!(mask.count_true() > 0);
        let (_, n_comps) = label_components(&mask, conn);
        let ws = marker_watershed(&img, &mask, conn).unwrap();
        prop_assert_eq!(ws.n_basins, n_comps);
    }

    #[test]
    fn gray_pgm_round_trips_exactly(img in int_gray(9, 255)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        write_gray_pgm(&img, &path).unwrap();
        let back = read_gray(&path).unwrap();
        prop_assert_eq!(back.width(), img.width());
        prop_assert_eq!(back.height(), img.height());
        prop_assert_eq!(back.data(), img.data());
    }

    #[test]
    fn label_pgm_round_trips_exactly(mask in small_mask(9), conn in conn_strategy()) {
        let (labels, _) = label_components(&mask, conn);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.pgm");
        write_label_pgm(&labels, &path).unwrap();
        let back: LabelMap = read_label_pgm(&path).unwrap();
        prop_assert_eq!(back.data(), labels.data());
    }
}
