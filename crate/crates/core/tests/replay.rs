mod common;

use std::collections::BTreeMap;

use patchbench::category::Category;
use patchbench::harness::{load_run, pack_replay, WellFormed};
use patchbench::llm::{Generator, ResponseCache};

use common::{corpus_dir, replay_config, run_replay};

fn files(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn shipped_cache_matches_the_responses() {
    let config = replay_config(None, None);
    let tmp = tempfile::tempdir().unwrap();
    let cache = ResponseCache::open(tmp.path()).unwrap();
    let written = pack_replay(&config, &corpus_dir().join("responses"), &cache).unwrap();
    assert_eq!(written, 200);
    assert_eq!(
        files(tmp.path()),
        files(&config.cache_dir),
        "corpus/replay/cache is stale; rerun `patchbench replay-pack`"
    );
}

#[test]
fn full_replay_is_bitwise_stable() {
    let config = replay_config(None, None);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run_a = run_replay(&config, &a.path().join("replay"));
    let run_b = run_replay(&config, &b.path().join("replay"));
    assert_eq!(run_a.samples.len(), 200);
    for f in ["report.json", "report.csv", "report.md", "config.json"] {
        assert_eq!(
            std::fs::read(a.path().join("replay").join(f)).unwrap(),
            std::fs::read(b.path().join("replay").join(f)).unwrap(),
            "{f}"
        );
    }
    for (sa, sb) in run_a.samples.iter().zip(&run_b.samples) {
        assert_eq!(sa, sb);
    }

    let report = run_a.report();
    for cell in &report.cells {
        assert!(cell.counts.is_consistent(), "{cell:?}");
        assert_eq!(cell.counts.n, 10);
    }
    for cat in &report.categories {
        let sum = report
            .cells
            .iter()
            .filter(|c| c.category == cat.category)
            .map(|c| c.counts)
            .sum();
        assert_eq!(cat.totals, sum);
        for s in &cat.scores {
            for v in [s.standard, s.conditioned, s.standard_mean, s.conditioned_mean].into_iter().flatten() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
    let t = &report.complexity[0];
    assert_eq!((t.a, t.b), (Category::PatchscriptRich, Category::Patchscript));
    assert!(t.p_value.unwrap() < 0.05, "{t:?}");

    // Nothing went to the network and every sample came from the cache.
    assert!(run_a
        .samples
        .iter()
        .all(|s| s.provenance.as_ref().is_some_and(|p| p.to_string().starts_with("replay:"))));
    assert!(run_a.samples.iter().any(|s| s.wellformed == WellFormed::No));

    let loaded = load_run(&a.path().join("replay")).unwrap();
    assert_eq!(loaded.report(), report);
}

#[test]
fn replay_generator_never_sends_requests() {
    let config = replay_config(Some(&["additive"]), Some(3));
    let generator = Generator::replay(ResponseCache::open(&config.cache_dir).unwrap());
    let assistant = patchbench::llm::AssistantConfig::for_category(Category::Patchscript, config.model.clone());
    let prompt = patchbench::llm::prompt_for(Category::Patchscript, patchbench::benchmark::Benchmark::Additive, false);
    let out = generator.generate(&assistant, &prompt, 10).unwrap();
    assert_eq!(out.len(), 10);
    assert!(generator.request_log().is_empty());
}
