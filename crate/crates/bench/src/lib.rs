//! Synthetic workloads shared by the benchmarks.

use odcal_core::{BoundingBox, ClassId, Detection, GroundTruth, ImageId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random image set: each image gets `per_image` ground truths over
/// `classes` classes and a jittered detection for most of them plus some
/// clutter.
pub fn scene(images: u64, per_image: usize, classes: u32, seed: u64) -> (Vec<Detection>, Vec<GroundTruth>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dets = Vec::new();
    let mut gts = Vec::new();
    for img in 0..images {
        for _ in 0..per_image {
            let class = ClassId(rng.gen_range(1..=classes));
            let (x, y) = (rng.gen_range(0.0..600.0), rng.gen_range(0.0..400.0));
            let (w, h) = (rng.gen_range(10.0..80.0), rng.gen_range(10.0..80.0));
            let gt = BoundingBox::new(x, y, w, h).unwrap();
            gts.push(GroundTruth::new(ImageId(img), class, gt));
            if rng.gen_bool(0.8) {
                let jitter = |v: f64, r: &mut ChaCha8Rng| v + r.gen_range(-5.0..5.0);
                let b = BoundingBox::new(jitter(x, &mut rng), jitter(y, &mut rng), w, h).unwrap();
                dets.push(Detection::new(ImageId(img), class, b, rng.gen_range(0.0..=1.0)).unwrap());
            }
            if rng.gen_bool(0.3) {
                let b = BoundingBox::new(rng.gen_range(0.0..600.0), rng.gen_range(0.0..400.0), w, h).unwrap();
                dets.push(Detection::new(ImageId(img), class, b, rng.gen_range(0.0..=1.0)).unwrap());
            }
        }
    }
    (dets, gts)
}
