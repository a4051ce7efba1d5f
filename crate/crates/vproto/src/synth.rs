//! Synthetic paired vision/text embedding spaces with a controllable
//! modality gap, plus dense pixel-feature scenes with ground-truth masks.
//!
//! The generator builds a "vision span" (a random `span_dim`-dimensional
//! subspace of the ambient space), places well-separated unit class centers
//! inside it, and derives text prototypes as
//! `z = sqrt(epsilon) * z_x + sqrt(1 - epsilon) * z_perp`, where `z_x` is a
//! unit in-span direction and `z_perp` a unit direction strictly outside the
//! span. `epsilon` therefore controls how much of each text prototype is
//! visible to in-span features. `alignment_noise` additionally rotates `z_x`
//! away from the class center inside the span, modeling in-span approximation
//! error on top of the orthogonal offset; at zero the two coincide.
//!
//! Index conventions used across the crate: prototype columns and
//! `ConePair::labels` are 0-based class indices; scene masks reserve 0 for
//! background and store foreground class `c` as `c + 1`.

use crate::error::{Error, Result};
use crate::mat::{dot, Matrix, PrototypeSet};
use crate::numerics::{normalize_in_place, orthonormal_basis, DEFAULT_RANK_TOL};
use crate::rng::Rng;

/// Generation parameters. `bench_v1()` is the committed benchmark used by the
/// acceptance suite.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_classes: usize,
    pub dim: usize,
    pub epsilon: f64,
    pub intra_class_std: f64,
    pub samples_per_class: usize,
    pub grid_s: usize,
    pub grid_h: usize,
    pub background_fraction: f64,
    /// In-span rotation (radians) of each text prototype's in-span component
    /// away from its class sample center. Zero keeps them identical.
    #[serde(default)]
    pub alignment_noise: f64,
}

/// Paired vision samples and text prototypes over a shared ambient space.
#[derive(Debug, Clone)]
pub struct ConePair {
    /// Unit-norm vision samples, one row each, grouped by class.
    pub vision: Matrix,
    /// 0-based class index per vision row.
    pub labels: Vec<usize>,
    /// Text prototypes `Z`, unit columns.
    pub text_protos: PrototypeSet,
    /// In-span directions of the text prototypes (unit columns).
    pub vision_centers: PrototypeSet,
    /// Cluster directions the vision samples are drawn around (unit,
    /// in-span). Equal to `vision_centers` when `alignment_noise` is zero.
    pub sample_centers: PrototypeSet,
    /// Unit in-span direction background pixels cluster around.
    pub background_center: Vec<f64>,
    /// Orthonormal rows spanning the vision subspace.
    pub span_basis: Matrix,
}

/// A dense feature grid with its ground-truth class mask.
#[derive(Debug, Clone)]
pub struct DenseScene {
    pub s: usize,
    pub h: usize,
    pub dim: usize,
    /// One unit-norm feature row per pixel, row-major over the grid.
    pub features: Matrix,
    /// Per-pixel ids: 0 = background, `c + 1` = foreground class `c`.
    pub gt_mask: Vec<usize>,
    /// Sorted mask ids (1-based) of the foreground classes present.
    pub class_set: Vec<usize>,
}

impl DenseScene {
    pub fn n_pixels(&self) -> usize {
        self.s * self.h
    }

    pub fn pixel(&self, idx: usize) -> &[f64] {
        self.features.row(idx)
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, message: String| {
            Err(Error::ConfigInvalid { field: field.into(), message })
        };
        if self.n_classes == 0 {
            return fail("n_classes", "must be at least 1".into());
        }
        if self.dim < self.n_classes + 2 {
            return fail(
                "dim",
                format!("must be at least n_classes + 2 = {}, got {}", self.n_classes + 2, self.dim),
            );
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return fail("epsilon", format!("must be in [0, 1], got {}", self.epsilon));
        }
        if self.intra_class_std < 0.0 || !self.intra_class_std.is_finite() {
            return fail("intra_class_std", format!("must be >= 0, got {}", self.intra_class_std));
        }
        if self.samples_per_class == 0 {
            return fail("samples_per_class", "must be at least 1".into());
        }
        if self.grid_s == 0 || self.grid_h == 0 {
            return fail("grid_s/grid_h", "grid sides must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.background_fraction) {
            return fail(
                "background_fraction",
                format!("must be in [0, 1), got {}", self.background_fraction),
            );
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.alignment_noise) {
            return fail(
                "alignment_noise",
                format!("must be in [0, pi/2], got {}", self.alignment_noise),
            );
        }
        Ok(())
    }

    /// Dimension of the vision span.
    pub fn span_dim(&self) -> usize {
        (self.n_classes + 4).min(self.dim - 2)
    }
}

const MAX_CENTER_RETRIES: usize = 1000;
const CENTER_COS_LIMIT: f64 = 0.5;

/// Unit vector `sum_j coeffs[j] * basis_row_j` from fresh Gaussian
/// coefficients.
fn random_unit_in_rows(rng: &mut Rng, basis: &Matrix) -> Vec<f64> {
    let mut v = vec![0.0; basis.cols()];
    for j in 0..basis.rows() {
        let c = rng.gaussian();
        for (vk, bk) in v.iter_mut().zip(basis.row(j)) {
            *vk += c * bk;
        }
    }
    normalize_in_place(&mut v).expect("gaussian combination is nonzero");
    v
}

fn sample_separated_center(
    rng: &mut Rng,
    basis: &Matrix,
    existing: &[Vec<f64>],
    retries: &mut usize,
) -> Result<Vec<f64>> {
    loop {
        let candidate = random_unit_in_rows(rng, basis);
        if existing.iter().all(|c| dot(c, &candidate) < CENTER_COS_LIMIT) {
            return Ok(candidate);
        }
        *retries += 1;
        if *retries > MAX_CENTER_RETRIES {
            return Err(Error::ConfigInvalid {
                field: "n_classes/dim".into(),
                message: format!(
                    "could not place {} separated class centers within {MAX_CENTER_RETRIES} retries",
                    existing.len() + 1
                ),
            });
        }
    }
}

/// One noisy unit sample around `center`, with the noise drawn inside the
/// span so the sample never leaves it.
fn sample_around(rng: &mut Rng, center: &[f64], std: f64, span_basis: &Matrix) -> Vec<f64> {
    if std == 0.0 {
        return center.to_vec();
    }
    let mut v = center.to_vec();
    for j in 0..span_basis.rows() {
        let c = std * rng.gaussian();
        for (vk, bk) in v.iter_mut().zip(span_basis.row(j)) {
            *vk += c * bk;
        }
    }
    normalize_in_place(&mut v).expect("center plus bounded noise is nonzero");
    v
}

/// Generates the paired spaces. Deterministic per `cfg.seed`.
pub fn make_cone_pair(cfg: &SynthConfig) -> Result<ConePair> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed);
    let d = cfg.dim;
    let n = cfg.n_classes;
    let span_dim = cfg.span_dim();

    // Random rotation of the ambient space; the first span_dim rows span the
    // vision subspace, the rest its orthogonal complement.
    let rotation = loop {
        let raw = Matrix::from_vec(d, d, (0..d * d).map(|_| rng.gaussian()).collect())
            .expect("gaussian data is finite");
        let q = orthonormal_basis(&raw, DEFAULT_RANK_TOL);
        if q.rows() == d {
            break q;
        }
    };
    let span_basis = Matrix::from_vec(span_dim, d, rotation.data()[..span_dim * d].to_vec())?;
    let complement_basis =
        Matrix::from_vec(d - span_dim, d, rotation.data()[span_dim * d..].to_vec())?;

    // Well-separated unit class centers inside the span.
    let mut retries = 0usize;
    let mut sample_centers: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let c = sample_separated_center(&mut rng, &span_basis, &sample_centers, &mut retries)?;
        sample_centers.push(c);
    }
    let background_center =
        sample_separated_center(&mut rng, &span_basis, &sample_centers, &mut retries)?;

    // In-span text directions: the class center rotated by alignment_noise
    // toward a random in-span direction orthogonal to it.
    let mut vision_centers: Vec<Vec<f64>> = Vec::with_capacity(n);
    for center in &sample_centers {
        if cfg.alignment_noise == 0.0 {
            vision_centers.push(center.clone());
            continue;
        }
        let mut u = random_unit_in_rows(&mut rng, &span_basis);
        let c = dot(&u, center);
        for (uk, ck) in u.iter_mut().zip(center) {
            *uk -= c * ck;
        }
        normalize_in_place(&mut u).expect("random direction is independent of the center");
        let (sin_t, cos_t) = cfg.alignment_noise.sin_cos();
        let z_x: Vec<f64> = center.iter().zip(&u).map(|(ck, uk)| cos_t * ck + sin_t * uk).collect();
        vision_centers.push(z_x);
    }

    // Text prototypes: in-span component plus a per-class direction drawn
    // strictly outside the span.
    let sqrt_eps = cfg.epsilon.sqrt();
    let sqrt_rem = (1.0 - cfg.epsilon).sqrt();
    let mut text_protos: Vec<Vec<f64>> = Vec::with_capacity(n);
    for z_x in &vision_centers {
        let z_perp = random_unit_in_rows(&mut rng, &complement_basis);
        let z: Vec<f64> =
            z_x.iter().zip(&z_perp).map(|(a, b)| sqrt_eps * a + sqrt_rem * b).collect();
        text_protos.push(z);
    }

    // Class-grouped vision samples.
    let total = n * cfg.samples_per_class;
    let mut vision = Matrix::zeros(total, d);
    let mut labels = Vec::with_capacity(total);
    for (class, center) in sample_centers.iter().enumerate() {
        for s in 0..cfg.samples_per_class {
            let row = class * cfg.samples_per_class + s;
            let x = sample_around(&mut rng, center, cfg.intra_class_std, &span_basis);
            vision.row_mut(row).copy_from_slice(&x);
            labels.push(class);
        }
    }

    Ok(ConePair {
        vision,
        labels,
        text_protos: PrototypeSet::from_rows(Matrix::from_rows(&text_protos)?),
        vision_centers: PrototypeSet::from_rows(Matrix::from_rows(&vision_centers)?),
        sample_centers: PrototypeSet::from_rows(Matrix::from_rows(&sample_centers)?),
        background_center,
        span_basis,
    })
}

/// Generates a rectangular-blob scene over cone classes. Blob count is 2-4
/// (or 1 when only one class exists); overlapping blobs resolve to the later
/// one. Total blob area targets `1 - background_fraction` of the grid.
pub fn make_dense_scene(cfg: &SynthConfig, cone: &ConePair, rng: &mut Rng) -> Result<DenseScene> {
    cfg.validate()?;
    if cone.span_basis.cols() != cfg.dim {
        return Err(Error::ConfigInvalid {
            field: "dim".into(),
            message: format!(
                "cone built for dim {}, config says {}",
                cone.span_basis.cols(),
                cfg.dim
            ),
        });
    }
    let (s, h) = (cfg.grid_s, cfg.grid_h);
    let n_pixels = s * h;
    let n_blobs = if cfg.n_classes == 1 { 1 } else { 2 + rng.below(3) };
    let target_area = ((1.0 - cfg.background_fraction) * n_pixels as f64).max(1.0);
    let blob_area = (target_area / n_blobs as f64).max(1.0);

    let mut gt_mask = vec![0usize; n_pixels];
    for _ in 0..n_blobs {
        let class = rng.below(cfg.n_classes);
        let aspect = rng.range_f64(0.5, 2.0);
        let bw = ((blob_area * aspect).sqrt().round() as usize).clamp(1, h);
        let bh = ((blob_area / bw as f64).round() as usize).clamp(1, s);
        let x0 = rng.below(h - bw + 1);
        let y0 = rng.below(s - bh + 1);
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                gt_mask[y * h + x] = class + 1;
            }
        }
    }

    let mut features = Matrix::zeros(n_pixels, cfg.dim);
    for (idx, &id) in gt_mask.iter().enumerate() {
        let center: &[f64] =
            if id == 0 { &cone.background_center } else { cone.sample_centers.proto(id - 1) };
        let x = sample_around(rng, center, cfg.intra_class_std, &cone.span_basis);
        features.row_mut(idx).copy_from_slice(&x);
    }

    let mut class_set: Vec<usize> = gt_mask.iter().copied().filter(|&id| id != 0).collect();
    class_set.sort_unstable();
    class_set.dedup();

    Ok(DenseScene { s, h, dim: cfg.dim, features, gt_mask, class_set })
}

/// Draws `batch` matched (vision, text) rows: each vision row is a fresh
/// sample of a uniformly drawn class, paired with that class's text
/// prototype.
pub fn make_contrastive_batch(
    cfg: &SynthConfig,
    cone: &ConePair,
    rng: &mut Rng,
    batch: usize,
) -> Result<(Matrix, Matrix)> {
    cfg.validate()?;
    if batch < 2 {
        return Err(Error::ConfigInvalid {
            field: "batch".into(),
            message: format!("contrastive batch needs at least 2 pairs, got {batch}"),
        });
    }
    let mut v = Matrix::zeros(batch, cfg.dim);
    let mut t = Matrix::zeros(batch, cfg.dim);
    for i in 0..batch {
        let class = rng.below(cfg.n_classes);
        let x = sample_around(rng, cone.sample_centers.proto(class), cfg.intra_class_std, &cone.span_basis);
        v.row_mut(i).copy_from_slice(&x);
        t.row_mut(i).copy_from_slice(cone.text_protos.proto(class));
    }
    Ok((v, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::norm;

    fn small_cfg(epsilon: f64, std: f64) -> SynthConfig {
        SynthConfig {
            seed: 7,
            n_classes: 3,
            dim: 12,
            epsilon,
            intra_class_std: std,
            samples_per_class: 5,
            grid_s: 8,
            grid_h: 8,
            background_fraction: 0.5,
            alignment_noise: 0.0,
        }
    }

    #[test]
    fn epsilon_one_text_equals_vision_centers() {
        let cone = make_cone_pair(&small_cfg(1.0, 0.1)).unwrap();
        for n in 0..3 {
            let d: f64 = cone
                .text_protos
                .proto(n)
                .iter()
                .zip(cone.vision_centers.proto(n))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn epsilon_zero_text_orthogonal_to_span_samples() {
        let cone = make_cone_pair(&small_cfg(0.0, 0.0)).unwrap();
        for (i, &label) in cone.labels.iter().enumerate() {
            let d = dot(cone.vision.row(i), cone.text_protos.proto(label));
            assert!(d.abs() < 1e-9, "class {label} dot {d}");
        }
    }

    #[test]
    fn epsilon_half_inner_product() {
        let cone = make_cone_pair(&small_cfg(0.5, 0.0)).unwrap();
        for n in 0..3 {
            let d = dot(cone.text_protos.proto(n), cone.vision_centers.proto(n));
            assert!((d - 0.5_f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn cone_invariants_over_random_configs() {
        for seed in 0..12u64 {
            let mut rng = Rng::new(seed * 31 + 5);
            let n_classes = 2 + rng.below(5);
            let cfg = SynthConfig {
                seed,
                n_classes,
                dim: n_classes + 2 + rng.below(12),
                epsilon: rng.next_f64(),
                intra_class_std: rng.range_f64(0.0, 0.4),
                samples_per_class: 1 + rng.below(4),
                grid_s: 4,
                grid_h: 4,
                background_fraction: 0.4,
                alignment_noise: rng.range_f64(0.0, 0.5),
            };
            let cone = make_cone_pair(&cfg).unwrap();
            let sqrt_eps = cfg.epsilon.sqrt();
            let sqrt_rem = (1.0 - cfg.epsilon).sqrt();
            for n in 0..cfg.n_classes {
                let z = cone.text_protos.proto(n);
                let z_x = cone.vision_centers.proto(n);
                assert!((norm(z) - 1.0).abs() < 1e-10, "text norm");
                assert!((norm(z_x) - 1.0).abs() < 1e-10, "in-span norm");
                // z - sqrt(eps) z_x is the orthogonal part: unit scaled and
                // orthogonal to z_x.
                let orth: Vec<f64> =
                    z.iter().zip(z_x).map(|(a, b)| a - sqrt_eps * b).collect();
                assert!((norm(&orth) - sqrt_rem).abs() < 1e-10);
                assert!(dot(&orth, z_x).abs() < 1e-10);
                // decomposition reconstructs z
                let recon_err: f64 = z
                    .iter()
                    .zip(z_x.iter().zip(&orth))
                    .map(|(zk, (xk, ok))| (zk - (sqrt_eps * xk + ok)).abs())
                    .fold(0.0, f64::max);
                assert!(recon_err < 1e-10);
            }
            // samples are unit and in-span
            for i in 0..cone.vision.rows() {
                let x = cone.vision.row(i);
                assert!((norm(x) - 1.0).abs() < 1e-10);
                let mut in_span = 0.0;
                for j in 0..cone.span_basis.rows() {
                    let c = dot(x, cone.span_basis.row(j));
                    in_span += c * c;
                }
                assert!((in_span - 1.0).abs() < 1e-9, "sample leaves span: {in_span}");
            }
        }
    }

    #[test]
    fn matched_pair_distance_follows_epsilon() {
        for &eps in &[0.0, 0.25, 0.6, 0.9] {
            let cone = make_cone_pair(&small_cfg(eps, 0.0)).unwrap();
            let mut total = 0.0;
            for (i, &label) in cone.labels.iter().enumerate() {
                total += crate::mat::dist_sq(cone.vision.row(i), cone.text_protos.proto(label));
            }
            let mean = total / cone.labels.len() as f64;
            assert!((mean - (2.0 - 2.0 * eps.sqrt())).abs() < 1e-9, "eps {eps} mean {mean}");
        }
    }

    #[test]
    fn cone_deterministic_per_seed() {
        let a = make_cone_pair(&small_cfg(0.5, 0.2)).unwrap();
        let b = make_cone_pair(&small_cfg(0.5, 0.2)).unwrap();
        assert_eq!(a.vision, b.vision);
        assert_eq!(a.text_protos.as_matrix(), b.text_protos.as_matrix());
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = small_cfg(0.5, 0.1);
        cfg.epsilon = 2.0;
        assert!(matches!(make_cone_pair(&cfg), Err(Error::ConfigInvalid { .. })));
        let mut cfg = small_cfg(0.5, 0.1);
        cfg.dim = cfg.n_classes + 1;
        assert!(matches!(make_cone_pair(&cfg), Err(Error::ConfigInvalid { .. })));
        let mut cfg = small_cfg(0.5, 0.1);
        cfg.background_fraction = 1.0;
        assert!(matches!(make_cone_pair(&cfg), Err(Error::ConfigInvalid { .. })));
    }

    #[test]
    fn scene_std_zero_features_equal_centers() {
        let cfg = small_cfg(0.5, 0.0);
        let cone = make_cone_pair(&cfg).unwrap();
        let scene = make_dense_scene(&cfg, &cone, &mut Rng::new(11)).unwrap();
        for (idx, &id) in scene.gt_mask.iter().enumerate() {
            let center: &[f64] = if id == 0 {
                &cone.background_center
            } else {
                cone.sample_centers.proto(id - 1)
            };
            assert_eq!(scene.pixel(idx), center);
        }
    }

    #[test]
    fn scene_mostly_background_when_fraction_high() {
        let mut cfg = small_cfg(0.5, 0.0);
        cfg.background_fraction = 0.95;
        let cone = make_cone_pair(&cfg).unwrap();
        let scene = make_dense_scene(&cfg, &cone, &mut Rng::new(3)).unwrap();
        let bg = scene.gt_mask.iter().filter(|&&id| id == 0).count();
        assert!(bg * 2 > scene.n_pixels(), "background {bg} of {}", scene.n_pixels());
    }

    #[test]
    fn scene_deterministic_per_seed() {
        let cfg = small_cfg(0.5, 0.15);
        let cone = make_cone_pair(&cfg).unwrap();
        let a = make_dense_scene(&cfg, &cone, &mut Rng::new(5)).unwrap();
        let b = make_dense_scene(&cfg, &cone, &mut Rng::new(5)).unwrap();
        assert_eq!(a.gt_mask, b.gt_mask);
        assert_eq!(a.features, b.features);
        assert_eq!(a.class_set, b.class_set);
    }

    #[test]
    fn scene_mask_ids_in_range_and_class_set_consistent() {
        let cfg = small_cfg(0.3, 0.1);
        let cone = make_cone_pair(&cfg).unwrap();
        let scene = make_dense_scene(&cfg, &cone, &mut Rng::new(2)).unwrap();
        assert!(scene.gt_mask.iter().all(|&id| id <= cfg.n_classes));
        for &id in &scene.class_set {
            assert!(id >= 1 && id <= cfg.n_classes);
            assert!(scene.gt_mask.contains(&id));
        }
        for i in 0..scene.n_pixels() {
            assert!((norm(scene.pixel(i)) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn batch_pairs_match_when_noiseless_and_epsilon_one() {
        let cfg = small_cfg(1.0, 0.0);
        let cone = make_cone_pair(&cfg).unwrap();
        let (v, t) = make_contrastive_batch(&cfg, &cone, &mut Rng::new(1), 4).unwrap();
        assert_eq!(v, t);
    }

    #[test]
    fn batch_rows_unit_and_reproducible() {
        let cfg = small_cfg(0.5, 0.2);
        let cone = make_cone_pair(&cfg).unwrap();
        let (v1, t1) = make_contrastive_batch(&cfg, &cone, &mut Rng::new(8), 8).unwrap();
        let (v2, t2) = make_contrastive_batch(&cfg, &cone, &mut Rng::new(8), 8).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(t1, t2);
        for i in 0..8 {
            assert!((norm(v1.row(i)) - 1.0).abs() < 1e-10);
            assert!((norm(t1.row(i)) - 1.0).abs() < 1e-10);
        }
        assert!(matches!(
            make_contrastive_batch(&cfg, &cone, &mut Rng::new(1), 1),
            Err(Error::ConfigInvalid { .. })
        ));
    }
}
