#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use odcal_core::{BoundingBox, ClassId, ConfidenceBags, Detection, GroundTruth, ImageId};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn random_bags<R: Rng>(rng: &mut R, max_len: usize, max_fn: u64) -> ConfidenceBags {
    let ntp = rng.gen_range(0..=max_len);
    let nfp = rng.gen_range(0..=max_len);
    let tp = (0..ntp).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let fp = (0..nfp).map(|_| rng.gen_range(0.0..=1.0)).collect();
    ConfidenceBags::new(tp, fp, rng.gen_range(0..=max_fn)).unwrap()
}

/// Random scene on a small canvas so boxes overlap often. Confidences are
/// quantised to tenths so confidence ties occur.
pub fn random_scene<R: Rng>(rng: &mut R, images: u64, max_boxes: usize, classes: u32) -> (Vec<Detection>, Vec<GroundTruth>) {
    let mut dets = Vec::new();
    let mut gts = Vec::new();
    let random_box = |rng: &mut R| {
        BoundingBox::new(
            rng.gen_range(0.0..40.0),
            rng.gen_range(0.0..40.0),
            rng.gen_range(2.0..20.0),
            rng.gen_range(2.0..20.0),
        )
        .unwrap()
    };
    for img in 0..images {
        let ngt = rng.gen_range(0..=max_boxes);
        for _ in 0..ngt {
            let b = random_box(rng);
            gts.push(GroundTruth::new(ImageId(img), ClassId(rng.gen_range(1..=classes)), b));
        }
        let ndet = rng.gen_range(0..=max_boxes);
        for _ in 0..ndet {
            let class = ClassId(rng.gen_range(1..=classes));
            let same_image: Vec<&GroundTruth> = gts.iter().filter(|g| g.image_id == ImageId(img)).collect();
            let b = if !same_image.is_empty() && rng.gen_bool(0.7) {
                let g = same_image[rng.gen_range(0..same_image.len())].bbox;
                BoundingBox::new(
                    g.x() + rng.gen_range(-3.0..3.0),
                    g.y() + rng.gen_range(-3.0..3.0),
                    g.width() * rng.gen_range(0.7..1.3),
                    g.height() * rng.gen_range(0.7..1.3),
                )
                .unwrap()
            } else {
                random_box(rng)
            };
            let conf = (rng.gen_range(0..=10) as f64) / 10.0;
            dets.push(Detection::new(ImageId(img), class, b, conf).unwrap());
        }
    }
    (dets, gts)
}
