use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use nbaudit_bench::{parsed_corpus, raw_corpus, sample_png};
use nbaudit_core::a11y::scan;
use nbaudit_core::altpng::{embed_alt, extract_alt};
use nbaudit_core::codeanalysis::analyze_notebook;
use nbaudit_core::htmlexport::{export_html, Theme};
use nbaudit_core::metrics::{notebook_metrics, SizeThresholds};
use nbaudit_core::nbmodel::parse_notebook;

const SEED: u64 = 42;

fn parsing(c: &mut Criterion) {
    let raw = raw_corpus(64, SEED);
    let bytes: usize = raw.iter().map(|(_, r)| r.len()).sum();
    let mut g = c.benchmark_group("parse");
    g.throughput(Throughput::Bytes(bytes as u64));
    g.bench_function("64 notebooks", |b| {
        b.iter(|| {
            for (name, r) in &raw {
                black_box(parse_notebook(r, Path::new(name)).unwrap());
            }
        })
    });
    g.finish();
}

fn per_notebook(c: &mut Criterion) {
    let corpus = parsed_corpus(32, SEED);
    let thresholds = SizeThresholds::default();
    let mut g = c.benchmark_group("per_notebook");
    g.throughput(Throughput::Elements(corpus.len() as u64));
    g.bench_function("metrics", |b| b.iter(|| corpus.iter().map(|nb| notebook_metrics(nb, &thresholds).n_images).sum::<usize>()));
    g.bench_function("analyze", |b| b.iter(|| corpus.iter().map(analyze_notebook).count()));
    for name in ["light", "darcula"] {
        let theme = Theme::builtin(name).unwrap();
        g.bench_with_input(BenchmarkId::new("export", name), &theme, |b, t| {
            b.iter(|| corpus.iter().map(|nb| export_html(nb, t).html.len()).sum::<usize>())
        });
        let docs: Vec<_> = corpus.iter().map(|nb| export_html(nb, &theme)).collect();
        g.bench_with_input(BenchmarkId::new("scan", name), &theme, |b, t| {
            b.iter(|| docs.iter().map(|d| scan(d, t).findings.len()).sum::<usize>())
        });
    }
    g.finish();
}

fn png_alt(c: &mut Criterion) {
    let png = sample_png(SEED);
    let tagged = embed_alt(&png, "Scatter plot of price against rate").unwrap().png;
    c.bench_function("alt/embed", |b| b.iter(|| embed_alt(black_box(&png), "Scatter plot of price against rate")));
    c.bench_function("alt/extract", |b| b.iter(|| extract_alt(black_box(&tagged))));
}

criterion_group!(benches, parsing, per_notebook, png_alt);
criterion_main!(benches);
