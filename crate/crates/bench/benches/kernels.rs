use criterion::{black_box, criterion_group, criterion_main, Criterion};

use bellcomm::catalog::{matrix_m1, matrix_m2, orbit};
use bellcomm::ncpoly::{from_matrix, nc_pow};
use bellcomm::polytope::{facets_to_vertices, vertices_to_facets};
use bellcomm::protocols::{vertex_set, DEFAULT_PROTOCOL_CAP};
use bellcomm::{Picture, Scenario};

fn enumeration(c: &mut Criterion) {
    let one_bit = Scenario::new(2, 2, 1).unwrap();
    let three = Scenario::new(3, 2, 1).unwrap();
    c.bench_function("vertices_2_2_probability", |b| {
        b.iter(|| vertex_set(black_box(&one_bit), Picture::Probability, DEFAULT_PROTOCOL_CAP).unwrap())
    });
    c.bench_function("vertices_3_2_correlation", |b| {
        b.iter(|| vertex_set(black_box(&three), Picture::Correlation, DEFAULT_PROTOCOL_CAP).unwrap())
    });
}

fn facet_enumeration(c: &mut Criterion) {
    let v112 = vertex_set(&Scenario::new(2, 2, 1).unwrap(), Picture::Probability, DEFAULT_PROTOCOL_CAP).unwrap();
    let v320 = vertex_set(&Scenario::new(3, 2, 1).unwrap(), Picture::Correlation, DEFAULT_PROTOCOL_CAP).unwrap();
    let h48 = vertices_to_facets(&v112).unwrap();
    c.bench_function("facets_112_to_48", |b| {
        b.iter(|| vertices_to_facets(black_box(&v112)).unwrap())
    });
    let mut slow = c.benchmark_group("slow");
    slow.sample_size(10);
    slow.bench_function("facets_320_to_498", |b| {
        b.iter(|| vertices_to_facets(black_box(&v320)).unwrap())
    });
    slow.bench_function("extreme_48_to_112", |b| {
        b.iter(|| facets_to_vertices(black_box(&h48)).unwrap())
    });
    slow.finish();
}

fn operator_powers(c: &mut Criterion) {
    let t1 = from_matrix(&matrix_m1()).unwrap();
    let t2 = from_matrix(&matrix_m2()).unwrap();
    c.bench_function("nc_pow_t1_4", |b| {
        b.iter(|| nc_pow(black_box(&t1), 4).unwrap().coeff_abs_sum())
    });
    c.bench_function("nc_pow_t2_5", |b| {
        b.iter(|| nc_pow(black_box(&t2), 5).unwrap().coeff_abs_sum())
    });
}

fn orbits(c: &mut Criterion) {
    let m1 = matrix_m1();
    c.bench_function("orbit_m1", |b| b.iter(|| orbit(black_box(&m1)).len()));
}

criterion_group!(benches, enumeration, facet_enumeration, operator_powers, orbits);
criterion_main!(benches);
