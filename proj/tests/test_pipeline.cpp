#include "bli/pipeline.hpp"

#include "bli/synthetic.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <optional>

using namespace bli;
using namespace bli_test;

namespace {

EmbeddingSpace space_with(const std::vector<std::string>& words, Matrix vectors) {
    EmbeddingSpace s;
    s.words = words;
    s.vectors = std::move(vectors);
    s.normalized = NormMode::l2;
    s.rebuild_index();
    return s;
}

CandidateList list_of(const std::string& word, const std::vector<std::string>& cands) {
    CandidateList list;
    list.source_word = word;
    double score = 1.0;
    for (const auto& c : cands) {
        list.candidates.push_back({-1, c, score});
        score -= 0.1;
    }
    return list;
}

// One shared synthetic triple and pipeline configuration; heavier runs are
// cached so several cases can assert on the same result.
struct Shared {
    SyntheticTriple triple;
    PipelineConfig cfg;
};

const Shared& shared() {
    static const Shared s = [] {
        SyntheticPairConfig scfg;
        scfg.n = 300;
        scfg.d = 16;
        scfg.noise_sigma = 0.005;
        scfg.permutation_window = 20;
        scfg.seed = 99;
        Shared out{make_synthetic_triple(scfg), {}};
        PipelineConfig& cfg = out.cfg;
        cfg.wproc.batch_size = 100;
        cfg.wproc.epochs = 2;
        cfg.wproc.iters_per_epoch = 120;
        cfg.wproc.sample_top = 300;
        cfg.train_dict_size = 180;
        cfg.cv_dict_size = 40;
        cfg.query_size = 8;
        cfg.feature_k_max = 4;
        cfg.eval_size = 300;
        cfg.train.iterations = 400;
        cfg.train.batch_size = 16;
        cfg.train.group_size = 2;
        cfg.train.dropout_rate = 0.0;
        cfg.train.report_every = 100;
        cfg.seed = 11;
        return out;
    }();
    return s;
}

const InductionResult& shared_rubi_result() {
    static const InductionResult result = run_rubi(shared().triple.a, shared().triple.b,
                                                   shared().triple.c, shared().triple.gold_ac,
                                                   &shared().triple.gold_ab, shared().cfg);
    return result;
}

}  // namespace

TEST_CASE("evaluate_bli scores hits against any gold translation") {
    const EmbeddingSpace target =
        space_with({"t0", "t1", "t2", "t3"}, Matrix::Identity(4, 4));
    Lexicon gold;
    gold.add("w0", "t0");
    gold.add("w1", "t1");
    gold.add("w1", "t3");  // synonym: either counts

    SUBCASE("all top-1 correct") {
        const std::vector<CandidateList> ranked{list_of("w0", {"t0", "t1"}),
                                                list_of("w1", {"t3", "t0"})};
        const BliScore score = evaluate_bli(ranked, gold, target);
        CHECK(score.precision_at_1 == doctest::Approx(1.0));
        CHECK(score.precision_at_5 == doctest::Approx(1.0));
        CHECK(score.evaluated == 2);
    }
    SUBCASE("none correct") {
        const std::vector<CandidateList> ranked{list_of("w0", {"t1", "t2"}),
                                                list_of("w1", {"t2", "t0"})};
        const BliScore score = evaluate_bli(ranked, gold, target);
        CHECK(score.precision_at_1 == doctest::Approx(0.0));
        CHECK(score.precision_at_5 == doctest::Approx(0.0));
    }
    SUBCASE("half correct at top-1, recovered in top-5") {
        const std::vector<CandidateList> ranked{
            list_of("w0", {"t0", "t1"}), list_of("w1", {"t2", "t3"}),
            list_of("w0", {"t1", "t0"}), list_of("w1", {"t1", "t2"})};
        const BliScore score = evaluate_bli(ranked, gold, target);
        CHECK(score.evaluated == 4);
        CHECK(score.precision_at_1 == doctest::Approx(0.5));
        CHECK(score.precision_at_5 == doctest::Approx(1.0));
        CHECK(score.precision_at_5 >= score.precision_at_1);
    }
}

TEST_CASE("evaluate_bli exclusion counts partition the input") {
    const EmbeddingSpace target = space_with({"t0"}, Matrix::Identity(1, 1));
    Lexicon gold;
    gold.add("w0", "t0");
    gold.add("w1", "ghost");  // translation outside the target vocabulary

    const std::vector<CandidateList> ranked{
        list_of("w0", {"t0"}),   // evaluable
        list_of("w1", {"t0"}),   // gold unreachable in vocab
        list_of("w2", {"t0"}),   // no gold entry
    };
    const BliScore score = evaluate_bli(ranked, gold, target);
    CHECK(score.evaluated == 1);
    CHECK(score.excluded_no_gold == 1);
    CHECK(score.excluded_vocab == 1);
    CHECK(score.evaluated + score.excluded_no_gold + score.excluded_vocab ==
          static_cast<int>(ranked.size()));
}

TEST_CASE("evaluate_bli with nothing evaluable is an error") {
    const EmbeddingSpace target = space_with({"t0"}, Matrix::Identity(1, 1));
    Lexicon gold;
    gold.add("other", "t0");
    const std::vector<CandidateList> ranked{list_of("w0", {"t0"})};
    CHECK_THROWS_AS(evaluate_bli(ranked, gold, target), InputError);
}

TEST_CASE("config hashes are deterministic and sensitive") {
    PipelineConfig a;
    a.seed = 1;
    PipelineConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.train.loss.kind = LossKind::list_mle;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("nn baseline solves the noiseless synthetic pair") {
    SyntheticPairConfig scfg;
    scfg.n = 300;
    scfg.d = 16;
    scfg.noise_sigma = 0.0;
    scfg.permutation_window = 20;
    scfg.seed = 55;
    const SyntheticPair pair = make_synthetic_pair(scfg);

    PipelineConfig cfg = shared().cfg;
    cfg.seed = 7;
    const InductionResult result =
        run_baseline(pair.source, pair.target, &pair.gold, RetrievalCriterion::nn, cfg);
    CHECK(result.precision_at_1 >= 0.99);
    CHECK(result.precision_at_5 >= result.precision_at_1);
    CHECK(result.counts.evaluated == 300);
}

TEST_CASE("csls baseline is at least as good as nn on a noisy pair") {
    SyntheticPairConfig scfg;
    scfg.n = 400;
    scfg.d = 16;
    scfg.noise_sigma = 0.06;
    scfg.permutation_window = 25;
    scfg.seed = 77;
    const SyntheticPair pair = make_synthetic_pair(scfg);

    PipelineConfig cfg = shared().cfg;
    cfg.wproc.sample_top = 400;
    cfg.eval_size = 400;
    cfg.seed = 7;
    const InductionResult nn =
        run_baseline(pair.source, pair.target, &pair.gold, RetrievalCriterion::nn, cfg);
    const InductionResult csls =
        run_baseline(pair.source, pair.target, &pair.gold, RetrievalCriterion::csls, cfg);
    CHECK(csls.precision_at_1 >= nn.precision_at_1);
}

TEST_CASE("isf baseline runs and scores sanely on the clean pair") {
    SyntheticPairConfig scfg;
    scfg.n = 300;
    scfg.d = 16;
    scfg.noise_sigma = 0.0;
    scfg.permutation_window = 20;
    scfg.seed = 55;
    const SyntheticPair pair = make_synthetic_pair(scfg);

    PipelineConfig cfg = shared().cfg;
    cfg.seed = 7;
    const InductionResult result =
        run_baseline(pair.source, pair.target, &pair.gold, RetrievalCriterion::isf, cfg);
    CHECK(result.precision_at_1 >= 0.95);
}

TEST_CASE("rubi on the synthetic triple recovers the target lexicon") {
    const InductionResult& result = shared_rubi_result();
    CHECK(result.precision_at_1 >= 0.95);
    CHECK(result.precision_at_5 >= result.precision_at_1);
    CHECK(result.training_precision_at_1 >= 0.95);
    CHECK(result.counts.input_words == 300);
    CHECK(result.counts.evaluated + result.counts.excluded_no_gold +
              result.counts.excluded_vocab ==
          result.counts.input_words);
    CHECK(result.counts.train_queries == 180);
    CHECK(result.counts.cv_queries == 40);
    CHECK(result.seed == 11);
    CHECK(result.config_hash == config_hash(shared().cfg));
}

TEST_CASE("rubi beats or matches the nn baseline on the same instance") {
    PipelineConfig cfg = shared().cfg;
    const InductionResult nn = run_baseline(shared().triple.a, shared().triple.b,
                                            &shared().triple.gold_ab, RetrievalCriterion::nn, cfg);
    CHECK(shared_rubi_result().precision_at_1 >= nn.precision_at_1 - 1e-12);
}

TEST_CASE("rubi keeps queries without a gold candidate, labeled flat") {
    // Corrupt three frequent keys so their gold translation is a far word
    // that never enters the candidate list.
    Lexicon gold = shared().triple.gold_ac;
    const auto far_word = shared().triple.c.words[static_cast<std::size_t>(299)];
    for (const char* key : {"a0", "a1", "a2"}) {
        gold.entries[key] = {far_word};
    }

    PipelineConfig cfg = shared().cfg;
    cfg.train.iterations = 50;  // counts are what matters here
    const InductionResult result = run_rubi(shared().triple.a, shared().triple.b,
                                            shared().triple.c, gold, nullptr, cfg);
    CHECK(result.counts.queries_without_gold_candidate >= 3);
    // Under semi-binary labels those queries stay trainable (all-1 labels).
    CHECK(result.counts.dropped_zero_label_queries == 0);
    // No gold target dictionary was given: ranked lists only.
    CHECK(result.precision_at_1 == -1.0);
    CHECK(static_cast<int>(result.ranked.size()) == 300);
}

TEST_CASE("prediction on the training pair is self-consistent") {
    // B = C with the same dictionary: prediction must not fall more than
    // two points below the training-side precision.
    PipelineConfig cfg = shared().cfg;
    const InductionResult result =
        run_rubi(shared().triple.a, shared().triple.c, shared().triple.c,
                 shared().triple.gold_ac, &shared().triple.gold_ac, cfg);
    CHECK(result.precision_at_1 >= result.training_precision_at_1 - 0.02);
}

TEST_CASE("prediction is stable across pivots") {
    PipelineConfig cfg = shared().cfg;
    const InductionResult with_c = shared_rubi_result();
    const InductionResult with_c2 =
        run_rubi(shared().triple.a, shared().triple.b, shared().triple.c2,
                 shared().triple.gold_ac2, &shared().triple.gold_ab, cfg);
    CHECK(std::abs(with_c.precision_at_1 - with_c2.precision_at_1) <= 0.02);
}

TEST_CASE("run directories are reproducible byte for byte and resumable") {
    TempDir dir1("run1"), dir2("run2");
    PipelineConfig cfg = shared().cfg;
    cfg.train.iterations = 150;

    cfg.out_dir = dir1.path("out");
    const InductionResult r1 = run_rubi(shared().triple.a, shared().triple.b, shared().triple.c,
                                        shared().triple.gold_ac, &shared().triple.gold_ab, cfg);
    cfg.out_dir = dir2.path("out");
    const InductionResult r2 = run_rubi(shared().triple.a, shared().triple.b, shared().triple.c,
                                        shared().triple.gold_ac, &shared().triple.gold_ab, cfg);

    CHECK(r1.precision_at_1 == r2.precision_at_1);
    for (const char* name : {"result.json", "model.txt", "map_pivot.txt", "map_target.txt",
                             "ranked.tsv", "features_train.csv", "manifest.json"}) {
        const std::string a = read_file(dir1.path("out") + "/" + std::string(name));
        const std::string b = read_file(dir2.path("out") + "/" + std::string(name));
        REQUIRE(!a.empty());
        CHECK(a == b);
    }

    // Resume: rerunning into dir2 reuses the stage outputs and reproduces
    // the same result file.
    const std::string before = read_file(dir2.path("out") + "/result.json");
    const InductionResult r3 = run_rubi(shared().triple.a, shared().triple.b, shared().triple.c,
                                        shared().triple.gold_ac, &shared().triple.gold_ab, cfg);
    CHECK(r3.precision_at_1 == r2.precision_at_1);
    CHECK(read_file(dir2.path("out") + "/result.json") == before);
}

TEST_CASE("missing inputs are reported with stage tags") {
    PipelineConfig cfg;
    cfg.seed = 1;
    try {
        run_rubi_files(cfg);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("[stage inputs]") != std::string::npos);
    }
}

TEST_CASE("result json serializes counts and null precision") {
    TempDir tmp("result_json");
    InductionResult result;
    result.config_hash = "abc";
    result.seed = 5;
    result.counts.input_words = 10;
    save_result_json(result, tmp.path("r.json"));
    const std::string text = read_file(tmp.path("r.json"));
    CHECK(text.find("\"precision_at_1\": null") != std::string::npos);
    CHECK(text.find("\"input_words\": 10") != std::string::npos);
    CHECK(text.find("\"config_hash\": \"abc\"") != std::string::npos);
}
