use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use edraw_core::{parse_annotation, schema::AnnotationClass};

fn parsers(c: &mut Criterion) {
    let cases = [
        (AnnotationClass::Gdt, "⌖|⌀0.1Ⓜ|A|B|C"),
        (AnnotationClass::Measure, "2x M8x1.25-6g"),
        (AnnotationClass::Measure, "⌀25 +0.021/-0"),
        (AnnotationClass::Roughness, "Ra 3.2 MRR"),
    ];
    for (class, text) in cases {
        c.bench_function(&format!("parse {text}"), |b| {
            b.iter(|| parse_annotation(black_box(class), black_box(text)))
        });
    }
}

criterion_group!(benches, parsers);
criterion_main!(benches);
