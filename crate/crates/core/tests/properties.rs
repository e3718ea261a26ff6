mod common;

use std::io::Cursor;

use commitgen::classifier::{softmax, train, LRModel, Optimizer, TrainConfig};
use commitgen::corpus::{load_parallel, write_parallel, Example, ParallelCorpus, Split};
use commitgen::evaluation::{bleu_corpus, Bucket, BucketSpec, NgramStats};
use commitgen::preprocess::{encode, normalize, pad_or_trim, PipelineConfig, Vocabulary};
use commitgen::retrieval::NNIndex;
use commitgen::vectorize::{Backend, DenseVector, EmbeddingTable, FeatureVector, TfIdfConfig, TfIdfModel};
use common::*;
use proptest::prelude::*;

fn word() -> impl Strategy<Value = String> {
    "[a-e]{1,2}"
}

fn sentence(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(word(), 0..=max)
}

fn dense(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn corpus_round_trip_preserves_pairs(
        rows in prop::collection::vec(("[a-z+<>@ -]{0,12}[a-z]", "[A-Za-z ,.!]{0,15}"), 1..20)
    ) {
        let examples: Vec<Example> = rows.iter().map(|(d, m)| Example::new(d.clone(), m.clone()).unwrap()).collect();
        let corpus = ParallelCorpus::new(Split::Train, examples);
        let dir = tempfile::tempdir().unwrap();
        let (d, m) = (dir.path().join("x.diff"), dir.path().join("x.msg"));
        write_parallel(&corpus, &d, &m).unwrap();
        let back = load_parallel(&d, &m, Split::Train).unwrap();
        prop_assert_eq!(back, corpus);
    }

    #[test]
    fn normalize_is_idempotent_without_stemming(
        text in "[ a-zA-Z0-9_<>+@/.,;:!()ÉßİΣ-]{0,40}",
        lowercase: bool, strip: bool, stop: bool,
    ) {
        let cfg = PipelineConfig {
            lowercase,
            strip_special_chars: strip,
            remove_stopwords: stop,
            stem: false,
            ..PipelineConfig::raw()
        };
        let once = normalize(&text, &cfg);
        let twice = normalize(&once.join(), &cfg);
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn pad_or_trim_has_target_length(ids in prop::collection::vec(0u32..50, 0..40), len in 1usize..60) {
        let out = pad_or_trim(&ids, len);
        prop_assert_eq!(out.len(), len);
        let keep = ids.len().min(len);
        prop_assert_eq!(&out[..keep], &ids[..keep]);
        prop_assert!(out[keep..].iter().all(|&i| i == 0));
    }

    #[test]
    fn encode_then_decode_is_identity(docs in prop::collection::vec(sentence(8), 1..5)) {
        let vocab = Vocabulary::build(docs.iter(), None).unwrap();
        for doc in &docs {
            let ids = encode(doc, &vocab, false);
            let back: Vec<&str> = ids.iter().map(|&i| vocab.token_of(i).unwrap()).collect();
            prop_assert_eq!(back, doc.iter().map(String::as_str).collect::<Vec<_>>());
        }
    }

    #[test]
    fn vocab_is_deterministic(docs in prop::collection::vec(sentence(8), 1..5), max in prop::option::of(5usize..12)) {
        let a = Vocabulary::build(docs.iter(), max).unwrap().to_vocab_txt();
        let b = Vocabulary::build(docs.iter(), max).unwrap().to_vocab_txt();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(Vocabulary::from_vocab_txt(&a).unwrap().to_vocab_txt(), a);
    }

    #[test]
    fn tfidf_matches_oracle(docs in prop::collection::vec(sentence(10), 1..=5), query in sentence(10)) {
        let model = TfIdfModel::fit(&docs, &TfIdfConfig::default()).unwrap();
        let v = model.transform(&query);
        let expected = tfidf_oracle(&docs, &query);
        prop_assert_eq!(v.nnz(), expected.len());
        for (tok, w) in expected {
            let f = model.feature_id(&tok).unwrap();
            prop_assert!((v.get(f) - w).abs() < 1e-9, "{tok}: {} vs {w}", v.get(f));
        }
        if !v.is_zero() {
            prop_assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tfidf_extra_occurrence_raises_relative_weight(docs in prop::collection::vec(sentence(10), 1..=5), pick in any::<prop::sample::Index>()) {
        let model = TfIdfModel::fit(&docs, &TfIdfConfig::default()).unwrap();
        let all: Vec<&String> = docs.iter().flatten().collect();
        prop_assume!(!all.is_empty());
        let t = all[pick.index(all.len())].clone();
        let doc = docs.iter().find(|d| d.contains(&t)).unwrap().clone();
        let mut more = doc.clone();
        more.push(t.clone());
        let (before, after) = (model.transform(&doc), model.transform(&more));
        let ft = model.feature_id(&t).unwrap();
        for u in &doc {
            let fu = model.feature_id(u).unwrap();
            if fu != ft {
                prop_assert!(after.get(ft) / after.get(fu) >= before.get(ft) / before.get(fu) - 1e-12);
            }
        }
    }

    #[test]
    fn embedding_text_and_binary_agree(
        rows in prop::collection::vec(("[a-z]{1,6}", prop::collection::vec(-1e3f32..1e3, 4)), 1..10)
    ) {
        let mut table = EmbeddingTable::new(4).unwrap();
        for (w, v) in &rows {
            table.push(w.clone(), v).unwrap();
        }
        let (mut text, mut bin) = (Vec::new(), Vec::new());
        table.write_text(&mut text).unwrap();
        table.write_binary(&mut bin).unwrap();
        let a = EmbeddingTable::read_text(&mut Cursor::new(text)).unwrap();
        let b = EmbeddingTable::read_binary(&mut Cursor::new(bin)).unwrap();
        prop_assert_eq!(a.words(), b.words());
        for (w, _) in &rows {
            let (x, y) = (a.get(w).unwrap(), b.get(w).unwrap());
            for (p, q) in x.iter().zip(y) {
                prop_assert!((p - q).abs() <= f32::EPSILON * p.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nearest_is_brute_force_argmax(
        (index, query) in (2usize..12).prop_flat_map(|d| (prop::collection::vec(dense(d), 1..40), dense(d))),
        scale in 0.01f64..100.0,
    ) {
        let vectors = index.iter().map(|v| FeatureVector::Dense(DenseVector::new(v.clone()))).collect();
        let messages = (0..index.len()).map(|i| format!("m{i}")).collect();
        let nn = NNIndex::build(vectors, messages, Backend::Embedding).unwrap();
        let q = FeatureVector::Dense(DenseVector::new(query.clone()));
        let got = nn.nearest(&q, 1).unwrap()[0];
        let best = brute_nearest(&index, &query);
        let best_sim = cosine_dense(&index[best], &query);
        prop_assert!(cosine_dense(&index[got.train_index], &query) >= best_sim - 1e-12);
        let k = index.len().min(5);
        let ranked = nn.nearest(&q, k).unwrap();
        let scaled = nn.nearest(&q.scaled(scale), k).unwrap();
        let ids = |v: &[commitgen::retrieval::Neighbor]| v.iter().map(|n| n.train_index).collect::<Vec<_>>();
        prop_assert_eq!(ids(&scaled), ids(&ranked));
        prop_assert_eq!(nn.nearest(&q, k).unwrap(), ranked);
    }

    #[test]
    fn self_retrieval_returns_own_message(index in (2usize..8).prop_flat_map(|d| prop::collection::vec(dense(d), 1..30))) {
        for i in 0..index.len() {
            for j in 0..i {
                prop_assume!(cosine_dense(&index[i], &index[j]) < 1.0 - 1e-9);
            }
            prop_assume!(index[i].iter().any(|&x| x != 0.0));
        }
        let vectors: Vec<FeatureVector> = index.iter().map(|v| FeatureVector::Dense(DenseVector::new(v.clone()))).collect();
        let messages: Vec<String> = (0..index.len()).map(|i| format!("m{i}")).collect();
        let nn = NNIndex::build(vectors.clone(), messages.clone(), Backend::Embedding).unwrap();
        for (i, v) in vectors.iter().enumerate() {
            let hit = nn.nearest(v, 1).unwrap()[0];
            prop_assert_eq!(hit.train_index, i);
            prop_assert!((hit.similarity - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(nn.generate_batch(&vectors).unwrap(), messages);
    }

    #[test]
    fn gradients_match_finite_differences(
        (classes, features) in (1usize..=5, 1usize..=8),
        seed in any::<u64>(),
    ) {
        let (model, x, y) = random_instance(classes, features, seed);
        prop_assert!(max_gradient_error(&model, &x, y) < 1e-4);
    }

    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-700.0f64..700.0, 1..10)) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&v| v >= 0.0 && v <= 1.0));
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if z.iter().all(|&v| max - v < 700.0) {
            prop_assert!(p.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn prediction_ignores_logit_shift(seed in any::<u64>(), shift in -50.0f64..50.0) {
        let (mut model, x, _) = random_instance(4, 6, seed);
        let before = model.predict_class(&x).unwrap();
        model.bias_mut().iter_mut().for_each(|b| *b += shift);
        prop_assert_eq!(model.predict_class(&x).unwrap(), before);
    }

    #[test]
    fn training_is_deterministic(seed in any::<u64>(), n in 2usize..12) {
        let (features, labels) = random_dataset(n, 3, 5, seed);
        let cfg = TrainConfig { epochs: 3, batch_size: 3, seed, learning_rate: 0.05, ..TrainConfig::default() };
        let a = train(&features, &labels, 3, 5, &cfg).unwrap();
        let b = train(&features, &labels, 3, 5, &cfg).unwrap();
        prop_assert_eq!(a.weights_raw(), b.weights_raw());
        prop_assert_eq!(a.bias(), b.bias());
        let sgd = TrainConfig { optimizer: Optimizer::Sgd, ..cfg };
        prop_assert_eq!(train(&features, &labels, 3, 5, &sgd).unwrap(), train(&features, &labels, 3, 5, &sgd).unwrap());
    }

    #[test]
    fn bleu_matches_oracle(pairs in prop::collection::vec((sentence(6), sentence(6)), 1..=5)) {
        let (cands, refs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let r = bleu_corpus(&cands, &refs, false).unwrap();
        let (bleu, p, bp) = bleu_oracle(&cands, &refs);
        prop_assert!((r.bleu - bleu).abs() < 1e-9);
        for n in 0..4 {
            prop_assert!((r.precisions[n] - p[n]).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&r.precisions[n]));
        }
        prop_assert!((r.brevity_penalty - bp).abs() < 1e-9);
        if r.candidate_length > 0 {
            prop_assert!(r.brevity_penalty > 0.0 && r.brevity_penalty <= 1.0);
        }
    }

    #[test]
    fn bleu_ignores_pair_order(
        pairs in prop::collection::vec((sentence(8), sentence(8)), 1..8),
        perm_seed in any::<u64>(),
    ) {
        let mut shuffled = pairs.clone();
        let n = shuffled.len();
        let mut s = perm_seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let (c1, r1): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let (c2, r2): (Vec<_>, Vec<_>) = shuffled.into_iter().unzip();
        prop_assert_eq!(bleu_corpus(&c1, &r1, false).unwrap(), bleu_corpus(&c2, &r2, false).unwrap());
        prop_assert_eq!(bleu_corpus(&c1, &r1, true).unwrap(), bleu_corpus(&c2, &r2, true).unwrap());
    }

    #[test]
    fn corpus_counts_are_sums_of_pair_counts(pairs in prop::collection::vec((sentence(8), sentence(8)), 1..8)) {
        let (cands, refs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let r = bleu_corpus(&cands, &refs, false).unwrap();
        let mut matches = [0usize; 4];
        let mut totals = [0usize; 4];
        for (c, rf) in cands.iter().zip(&refs) {
            let s = NgramStats::of_pair(c, rf);
            for n in 0..4 {
                matches[n] += s.matches[n];
                totals[n] += s.totals[n];
            }
        }
        prop_assert_eq!(r.matches, matches);
        prop_assert_eq!(r.totals, totals);
    }

    #[test]
    fn buckets_partition_token_counts(n in 0usize..500) {
        let b = BucketSpec::default().assign(n);
        let expected = if n <= 49 { Bucket::Small } else if n <= 75 { Bucket::Medium } else { Bucket::Large };
        prop_assert_eq!(b, expected);
    }
}

fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}

fn random_instance(classes: usize, features: usize, seed: u64) -> (LRModel, FeatureVector, usize) {
    let mut s = seed;
    let mut model = LRModel::zeros(Backend::Embedding, classes, features);
    for c in 0..classes {
        for f in 0..features {
            model.set_weight(c, f, lcg(&mut s));
        }
        model.bias_mut()[c] = lcg(&mut s);
    }
    let x = FeatureVector::Dense(DenseVector::new((0..features).map(|_| 2.0 * lcg(&mut s)).collect()));
    let y = (seed % classes as u64) as usize;
    (model, x, y)
}

fn random_dataset(n: usize, classes: usize, features: usize, seed: u64) -> (Vec<FeatureVector>, Vec<usize>) {
    let mut s = seed;
    let xs = (0..n)
        .map(|_| FeatureVector::Dense(DenseVector::new((0..features).map(|_| lcg(&mut s)).collect())))
        .collect();
    let ys = (0..n).map(|i| i % classes).collect();
    (xs, ys)
}
