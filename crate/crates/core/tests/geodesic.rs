mod common;

use common::*;
use elastic_shapes::cone::cone_distance;
use elastic_shapes::curve::srv_transform;
use elastic_shapes::geodesic::{geodesic, path_energy, registered_pair};
use elastic_shapes::linalg::dist;
use elastic_shapes::metric::param_distance;
use elastic_shapes::params::MetricParams;
use elastic_shapes::registration::{dp_register, AlignmentGrid};
use elastic_shapes::reparam::Reparametrization;
use rand::Rng;

fn dp_reg(c1: &elastic_shapes::curve::DiscreteCurve, c2: &elastic_shapes::curve::DiscreteCurve, p: &MetricParams) -> Reparametrization {
    dp_register(c1, c2, p, &AlignmentGrid::default_for(c1, c2, 6).unwrap()).unwrap().reparam
}

#[test]
fn time_reversal() {
    let mut r = rng(41);
    for _ in 0..6 {
        let c1 = random_open(&mut r, 7, 2);
        let c2 = random_open(&mut r, 6, 2);
        let p = MetricParams::new(r.gen_range(0.2..2.0), 0.5).unwrap();
        let reg = dp_reg(&c1, &c2, &p);
        let fwd = geodesic(&c1, &c2, &reg, &p, 9).unwrap();
        let bwd = geodesic(&c2, &c1, &reg.transposed(), &p, 9).unwrap();
        for (f, b) in fwd.frames.iter().zip(bwd.frames.iter().rev()) {
            assert_eq!(f.vertex_count(), b.vertex_count());
            for (x, y) in f.points().iter().zip(b.points()) {
                assert!(dist(x, y) < 1e-10, "{x:?} vs {y:?}");
            }
        }
    }
}

#[test]
fn constant_speed_per_cell() {
    let mut r = rng(42);
    for _ in 0..6 {
        let c1 = random_open(&mut r, 6, 3);
        let c2 = random_open(&mut r, 8, 3);
        let p = MetricParams::new(r.gen_range(0.2..2.0), 0.5).unwrap();
        let reg = dp_reg(&c1, &c2, &p);
        let g = geodesic(&c1, &c2, &reg, &p, 12).unwrap();
        let qs: Vec<_> = g.frames.iter().map(|f| srv_transform(f).unwrap()).collect();
        let cells = qs[0].q_values().len();
        for c in 0..cells {
            let total = cone_distance(&qs[0].q_values()[c], &qs[11].q_values()[c], p.lambda()).unwrap();
            for w in qs.windows(2) {
                let step = cone_distance(&w[0].q_values()[c], &w[1].q_values()[c], p.lambda()).unwrap();
                assert!((step - total / 11.0).abs() < 1e-10, "cell {c}: {step} vs {}", total / 11.0);
            }
        }
    }
}

#[test]
fn length_matches_registered_distance() {
    let mut r = rng(43);
    for _ in 0..5 {
        let (c1, c2) = smooth_pair(&mut r, 30);
        let p = MetricParams::new(r.gen_range(0.3..1.8), 0.5).unwrap();
        let reg = dp_reg(&c1, &c2, &p);
        let (r1, r2) = registered_pair(&c1, &c2, &reg).unwrap();
        let d = param_distance(&r1, &r2, &p).unwrap();
        let g = geodesic(&c1, &c2, &reg, &p, 64).unwrap();
        let e = path_energy(&g, &p).unwrap();
        assert!((e - d).abs() <= 5e-3 * d, "{e} vs {d}");
    }
}

#[test]
fn flat_case_is_srv_homotopy() {
    // At λ = 1 each cell moves on a straight line in SRV space.
    let mut r = rng(44);
    let c1 = random_open(&mut r, 5, 2);
    let c2 = random_open(&mut r, 5, 2);
    let p = MetricParams::srv();
    let g = geodesic(&c1, &c2, &Reparametrization::identity(), &p, 5).unwrap();
    let q0 = srv_transform(&g.frames[0]).unwrap();
    let q4 = srv_transform(&g.frames[4]).unwrap();
    let q2 = srv_transform(&g.frames[2]).unwrap();
    for c in 0..q0.q_values().len() {
        for k in 0..2 {
            let mid = 0.5 * (q0.q_values()[c][k] + q4.q_values()[c][k]);
            assert!((q2.q_values()[c][k] - mid).abs() < 1e-12);
        }
    }
    let e = path_energy(&g, &p).unwrap();
    let d = param_distance(&g.frames[0], &g.frames[4], &p).unwrap();
    assert!((e - d).abs() < 1e-12 * (1.0 + d));
}

#[test]
fn distance_nonincreasing_as_registration_improves() {
    let mut r = rng(45);
    for _ in 0..5 {
        let (c1, c2) = smooth_pair(&mut r, 20);
        let p = MetricParams::new(0.8, 0.5).unwrap();
        let id = registered_pair(&c1, &c2, &Reparametrization::identity()).unwrap();
        let reg = dp_reg(&c1, &c2, &p);
        let opt = registered_pair(&c1, &c2, &reg).unwrap();
        let d_id = path_energy(&geodesic(&c1, &c2, &Reparametrization::identity(), &p, 16).unwrap(), &p).unwrap();
        let d_opt = path_energy(&geodesic(&c1, &c2, &reg, &p, 16).unwrap(), &p).unwrap();
        assert!(d_opt <= d_id + 1e-12);
        assert!((d_id - param_distance(&id.0, &id.1, &p).unwrap()).abs() < 1e-9);
        assert!((d_opt - param_distance(&opt.0, &opt.1, &p).unwrap()).abs() < 1e-9);
    }
}
