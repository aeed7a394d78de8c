#include "bli/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace bli {

namespace {

std::string wproc_init_name(WProcInit init) {
    switch (init) {
        case WProcInit::identity: return "identity";
        case WProcInit::random_orthogonal: return "random_orthogonal";
        case WProcInit::procrustes_seed: return "procrustes_seed";
    }
    return "procrustes_seed";
}

// Holds a reference when the space is already normalized, otherwise an
// owned normalized copy.
class SpaceRef {
public:
    SpaceRef(const EmbeddingSpace& s, NormMode mode) {
        if (s.normalized == NormMode::raw) {
            owned_ = normalize(s, mode);
            ptr_ = &owned_;
        } else {
            ptr_ = &s;
        }
    }
    SpaceRef(const SpaceRef&) = delete;
    SpaceRef& operator=(const SpaceRef&) = delete;
    const EmbeddingSpace& get() const { return *ptr_; }

private:
    const EmbeddingSpace* ptr_ = nullptr;
    EmbeddingSpace owned_;
};

template <typename Fn>
auto with_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const InputError& e) {
        throw InputError("[stage " + stage + "] " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("[stage " + stage + "] " + e.what());
    }
}

// Stage output directory with a config-hash manifest. When the manifest of
// a previous run carries the same hash, existing stage files are reused.
class RunDir {
public:
    explicit RunDir(const PipelineConfig& cfg) : dir_(cfg.out_dir), hash_(config_hash(cfg)) {
        if (dir_.empty()) return;
        fs::create_directories(dir_);
        const fs::path manifest = fs::path(dir_) / "manifest.json";
        if (fs::exists(manifest)) {
            try {
                std::ifstream in(manifest);
                json j = json::parse(in);
                resumable_ = j.value("config_hash", "") == hash_;
            } catch (...) {
                resumable_ = false;
            }
        }
    }

    bool enabled() const { return !dir_.empty(); }
    const std::string& hash() const { return hash_; }

    std::string path(const std::string& name) const {
        return (fs::path(dir_) / name).string();
    }

    bool can_reuse(const std::string& name) const {
        return enabled() && resumable_ && fs::exists(path(name));
    }

    void finalize(std::uint64_t seed) const {
        if (!enabled()) return;
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(dir_)) {
            const std::string name = entry.path().filename().string();
            if (name != "manifest.json") files.push_back(name);
        }
        std::sort(files.begin(), files.end());
        json j;
        j["config_hash"] = hash_;
        j["seed"] = seed;
        j["files"] = files;
        std::ofstream out(path("manifest.json"));
        out << j.dump(2) << '\n';
    }

private:
    std::string dir_;
    std::string hash_;
    bool resumable_ = false;
};

std::vector<int> lexicon_rows(const Lexicon& lex, const EmbeddingSpace& space) {
    std::vector<int> rows;
    rows.reserve(lex.size());
    for (const auto& [word, targets] : lex.entries) {
        (void)targets;
        if (auto row = space.lookup(word)) rows.push_back(*row);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

struct EvalWords {
    std::vector<int> rows;
    int input_words = 0;
    int missing_source_vocab = 0;
};

EvalWords pick_eval_words(const EmbeddingSpace& source, const Lexicon* gold, int eval_size) {
    EvalWords ew;
    if (gold) {
        ew.input_words = static_cast<int>(gold->size());
        for (const auto& [word, targets] : gold->entries) {
            (void)targets;
            if (auto row = source.lookup(word)) {
                ew.rows.push_back(*row);
            } else {
                ++ew.missing_source_vocab;
            }
        }
        std::sort(ew.rows.begin(), ew.rows.end());
    } else {
        ew.input_words = std::min(eval_size, source.size());
        ew.rows.resize(static_cast<std::size_t>(ew.input_words));
        for (int i = 0; i < ew.input_words; ++i) ew.rows[static_cast<std::size_t>(i)] = i;
    }
    return ew;
}

std::vector<FeatureRecord> to_feature_records(const std::vector<CandidateList>& lists,
                                              const std::vector<RankingQuery>& queries) {
    std::vector<FeatureRecord> records;
    for (std::size_t i = 0; i < lists.size() && i < queries.size(); ++i) {
        const auto& list = lists[i];
        const auto& q = queries[i];
        for (std::size_t c = 0; c < list.candidates.size(); ++c) {
            FeatureRecord rec;
            rec.query = list.source_word;
            rec.candidate = list.candidates[c].token;
            rec.label = q.labels[c];
            rec.values.assign(q.features.row(static_cast<Eigen::Index>(c)).data(),
                              q.features.row(static_cast<Eigen::Index>(c)).data() +
                                  q.features.cols());
            records.push_back(std::move(rec));
        }
    }
    return records;
}

}  // namespace

std::string config_fingerprint(const PipelineConfig& cfg) {
    std::ostringstream s;
    s << "candidate_criterion=" << criterion_name(cfg.candidate_criterion) << '\n'
      << "csls_k=" << cfg.csls_k << '\n'
      << "cv_dict_size=" << cfg.cv_dict_size << '\n'
      << "dict_eval=" << cfg.dict_eval << '\n'
      << "dict_train=" << cfg.dict_train << '\n'
      << "emb_pivot=" << cfg.emb_pivot << '\n'
      << "emb_source=" << cfg.emb_source << '\n'
      << "emb_target=" << cfg.emb_target << '\n'
      << "eval_size=" << cfg.eval_size << '\n'
      << "feature_k_max=" << cfg.feature_k_max << '\n'
      << "isf_beta=" << format_double(cfg.isf_beta) << '\n'
      << "lang_pivot=" << cfg.lang_pivot << '\n'
      << "lang_source=" << cfg.lang_source << '\n'
      << "lang_target=" << cfg.lang_target << '\n'
      << "max_vocab=" << cfg.max_vocab << '\n'
      << "norm_mode=" << norm_mode_name(cfg.norm_mode) << '\n'
      << "query_size=" << cfg.query_size << '\n'
      << "relevance=" << relevance_name(cfg.relevance) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "train.batch_size=" << cfg.train.batch_size << '\n'
      << "train.dropout_rate=" << format_double(cfg.train.dropout_rate) << '\n'
      << "train.epsilon=" << format_double(cfg.train.epsilon) << '\n'
      << "train.group_size=" << cfg.train.group_size << '\n'
      << "train.iterations=" << cfg.train.iterations << '\n'
      << "train.learning_rate=" << format_double(cfg.train.learning_rate) << '\n'
      << "train.loss=" << loss_name(cfg.train.loss.kind) << '\n'
      << "train.loss_alpha=" << format_double(cfg.train.loss.alpha) << '\n'
      << "train.loss_cutoff=" << cfg.train.loss.cutoff << '\n'
      << "train.metric_cutoff=" << cfg.train.metric_cutoff << '\n'
      << "train.report_every=" << cfg.train.report_every << '\n'
      << "train_dict_size=" << cfg.train_dict_size << '\n'
      << "wproc.batch_size=" << cfg.wproc.batch_size << '\n'
      << "wproc.epochs=" << cfg.wproc.epochs << '\n'
      << "wproc.init=" << wproc_init_name(cfg.wproc.init) << '\n'
      << "wproc.iters_per_epoch=" << cfg.wproc.iters_per_epoch << '\n'
      << "wproc.learning_rate=" << format_double(cfg.wproc.learning_rate) << '\n'
      << "wproc.log_every=" << cfg.wproc.log_every << '\n'
      << "wproc.sample_top=" << cfg.wproc.sample_top << '\n';
    return s.str();
}

std::string config_hash(const PipelineConfig& cfg) {
    const std::string text = config_fingerprint(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

BliScore evaluate_bli(const std::vector<CandidateList>& ranked, const Lexicon& gold,
                      const EmbeddingSpace& target) {
    BliScore score;
    int hits1 = 0, hits5 = 0;
    for (const auto& list : ranked) {
        const auto* translations = gold.find(list.source_word);
        if (!translations) {
            ++score.excluded_no_gold;
            continue;
        }
        bool reachable = false;
        for (const auto& t : *translations) {
            if (target.lookup(t)) {
                reachable = true;
                break;
            }
        }
        if (!reachable) {
            ++score.excluded_vocab;
            continue;
        }
        ++score.evaluated;
        const std::size_t top5 = std::min<std::size_t>(5, list.candidates.size());
        bool hit1 = false, hit5 = false;
        for (std::size_t c = 0; c < top5; ++c) {
            if (translations->count(list.candidates[c].token)) {
                hit5 = true;
                if (c == 0) hit1 = true;
                break;
            }
        }
        hits1 += hit1 ? 1 : 0;
        hits5 += hit5 ? 1 : 0;
    }
    if (score.evaluated == 0) {
        throw InputError("evaluate_bli: no evaluable words (gold never overlaps the ranking)");
    }
    score.precision_at_1 = static_cast<double>(hits1) / score.evaluated;
    score.precision_at_5 = static_cast<double>(hits5) / score.evaluated;
    return score;
}

QueryBuild build_queries(const std::vector<CandidateList>& lists, const Lexicon& gold,
                         RelevanceMode mode, const AlignmentMap& map,
                         const EmbeddingSpace& source, const EmbeddingSpace& target,
                         int k_max, const NeighborhoodBundle& bundle) {
    QueryBuild build;
    build.queries.reserve(lists.size());
    for (const auto& list : lists) {
        const auto features = extract_features(list, map, source, target, k_max, bundle);
        const auto labels = assign_relevance(list, gold, mode, &target);

        const auto* translations = gold.find(list.source_word);
        bool any_gold = false;
        for (const auto& c : list.candidates) {
            if (translations->count(c.token)) {
                any_gold = true;
                break;
            }
        }
        if (!any_gold) ++build.without_gold_candidate;

        RankingQuery q;
        q.query_id = list.source_word;
        q.labels = labels;
        q.valid.assign(list.candidates.size(), 1);
        q.features.resize(static_cast<Eigen::Index>(features.size()),
                          static_cast<Eigen::Index>(k_max + 1));
        for (std::size_t c = 0; c < features.size(); ++c) {
            for (int f = 0; f <= k_max; ++f) {
                q.features(static_cast<Eigen::Index>(c), f) = features[c][static_cast<std::size_t>(f)];
            }
        }
        q.check();
        build.queries.push_back(std::move(q));
    }
    return build;
}

std::vector<CandidateList> rerank_with_model(const RankerModel& model,
                                             const std::vector<CandidateList>& lists,
                                             const AlignmentMap& map,
                                             const EmbeddingSpace& source,
                                             const EmbeddingSpace& target, int k_max,
                                             const NeighborhoodBundle& bundle) {
    std::vector<CandidateList> ranked;
    ranked.reserve(lists.size());
    for (const auto& list : lists) {
        const auto features = extract_features(list, map, source, target, k_max, bundle);
        RankingQuery q;
        q.query_id = list.source_word;
        q.labels.assign(list.candidates.size(), 0);
        q.valid.assign(list.candidates.size(), 1);
        q.features.resize(static_cast<Eigen::Index>(features.size()),
                          static_cast<Eigen::Index>(k_max + 1));
        for (std::size_t c = 0; c < features.size(); ++c) {
            for (int f = 0; f <= k_max; ++f) {
                q.features(static_cast<Eigen::Index>(c), f) = features[c][static_cast<std::size_t>(f)];
            }
        }
        const Vector scores = score_query(model, q, ScoreMode::eval);
        std::vector<int> order(list.candidates.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            if (scores[x] != scores[y]) return scores[x] > scores[y];
            return x < y;
        });
        CandidateList out;
        out.source_row = list.source_row;
        out.source_word = list.source_word;
        out.candidates.reserve(list.candidates.size());
        for (int idx : order) {
            Candidate c = list.candidates[static_cast<std::size_t>(idx)];
            c.score = scores[idx];
            out.candidates.push_back(std::move(c));
        }
        ranked.push_back(std::move(out));
    }
    return ranked;
}

namespace {

AlignmentMap align_stage(const RunDir& run, const std::string& stage_name,
                         const std::string& map_file, const std::string& log_file,
                         const EmbeddingSpace& source, const EmbeddingSpace& target,
                         WProcConfig wcfg) {
    return with_stage(stage_name, [&] {
        if (run.can_reuse(map_file)) return load_alignment(run.path(map_file));
        auto [map, log] = wasserstein_procrustes(source, target, wcfg);
        if (run.enabled()) {
            save_alignment(map, run.path(map_file));
            save_convergence_log(log, run.path(log_file));
        }
        return map;
    });
}

}  // namespace

InductionResult run_rubi(const EmbeddingSpace& source, const EmbeddingSpace& target,
                         const EmbeddingSpace& pivot, const Lexicon& gold_pivot,
                         const Lexicon* gold_target, const PipelineConfig& cfg) {
    const SpaceRef a(source, cfg.norm_mode);
    const SpaceRef b(target, cfg.norm_mode);
    const SpaceRef c(pivot, cfg.norm_mode);
    RunDir run(cfg);

    InductionResult result;
    result.config_hash = run.hash();
    result.seed = cfg.seed;

    // Learning step: align the source-pivot pair and train the ranker on
    // queries drawn from the supervision dictionary.
    WProcConfig wc = cfg.wproc;
    wc.seed = mix_seed(cfg.seed, 1);
    const AlignmentMap map_ac =
        align_stage(run, "align-pivot", "map_pivot.txt", "convergence_pivot.csv", a.get(),
                    c.get(), wc);

    auto [train_lex, cv_lex] = with_stage("dictionary-split", [&] {
        return split_dictionary(gold_pivot, a.get(), cfg.train_dict_size, cfg.cv_dict_size);
    });
    if (train_lex.entries.empty()) {
        throw InputError("[stage dictionary-split] no training keys survive the vocabulary");
    }

    NeighborhoodBundle bundle_ac;
    if (cfg.feature_k_max > 0) {
        bundle_ac = compute_neighborhood_bundle(map_ac, a.get(), c.get(), cfg.feature_k_max);
    }

    const auto train_rows = lexicon_rows(train_lex, a.get());
    const auto cv_rows = lexicon_rows(cv_lex, a.get());
    const auto lists_train = with_stage("candidates-pivot", [&] {
        return generate_candidates(train_rows, map_ac, a.get(), c.get(), cfg.query_size,
                                   cfg.candidate_criterion, cfg.csls_k, cfg.isf_beta);
    });
    const auto lists_cv = with_stage("candidates-pivot", [&] {
        return generate_candidates(cv_rows, map_ac, a.get(), c.get(), cfg.query_size,
                                   cfg.candidate_criterion, cfg.csls_k, cfg.isf_beta);
    });

    QueryBuild train_build = with_stage("featurize-pivot", [&] {
        return build_queries(lists_train, gold_pivot, cfg.relevance, map_ac, a.get(), c.get(),
                             cfg.feature_k_max, bundle_ac);
    });
    QueryBuild cv_build = with_stage("featurize-pivot", [&] {
        return build_queries(lists_cv, gold_pivot, cfg.relevance, map_ac, a.get(), c.get(),
                             cfg.feature_k_max, bundle_ac);
    });
    result.counts.train_queries = static_cast<int>(train_build.queries.size());
    result.counts.cv_queries = static_cast<int>(cv_build.queries.size());
    result.counts.queries_without_gold_candidate = train_build.without_gold_candidate;
    for (const auto& q : train_build.queries) {
        if (q.all_zero_labels()) ++result.counts.dropped_zero_label_queries;
    }

    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.seed, 3);
    RankerModel model = with_stage("train", [&] {
        if (run.can_reuse("model.txt")) return load_ranker(run.path("model.txt"));
        auto [m, report] = train_ranker(train_build.queries, tc, cv_build.queries);
        if (report.diverged) {
            throw NumericError("ranker training diverged (non-finite loss)");
        }
        if (run.enabled()) {
            save_ranker(m, run.path("model.txt"));
            save_training_report(report, run.path("training_report.csv"));
        }
        return m;
    });

    // Prediction step: align the source-target pair, rerank its candidates
    // with the trained model.
    WProcConfig wb = cfg.wproc;
    wb.seed = mix_seed(cfg.seed, 2);
    const AlignmentMap map_ab =
        align_stage(run, "align-target", "map_target.txt", "convergence_target.csv", a.get(),
                    b.get(), wb);

    const EvalWords ew = pick_eval_words(a.get(), gold_target, cfg.eval_size);
    result.counts.input_words = ew.input_words;

    NeighborhoodBundle bundle_ab;
    if (cfg.feature_k_max > 0) {
        bundle_ab = compute_neighborhood_bundle(map_ab, a.get(), b.get(), cfg.feature_k_max);
    }
    const auto lists_eval = with_stage("candidates-target", [&] {
        return generate_candidates(ew.rows, map_ab, a.get(), b.get(), cfg.query_size,
                                   cfg.candidate_criterion, cfg.csls_k, cfg.isf_beta);
    });
    result.ranked = with_stage("predict", [&] {
        return rerank_with_model(model, lists_eval, map_ab, a.get(), b.get(),
                                 cfg.feature_k_max, bundle_ab);
    });

    // Training-side precision for the learning pair, on the same model.
    {
        std::vector<CandidateList> lists_all = lists_train;
        lists_all.insert(lists_all.end(), lists_cv.begin(), lists_cv.end());
        const auto reranked = rerank_with_model(model, lists_all, map_ac, a.get(), c.get(),
                                                cfg.feature_k_max, bundle_ac);
        const BliScore train_score = evaluate_bli(reranked, gold_pivot, c.get());
        result.training_precision_at_1 = train_score.precision_at_1;
    }

    if (gold_target) {
        const BliScore score = with_stage("evaluate", [&] {
            return evaluate_bli(result.ranked, *gold_target, b.get());
        });
        result.precision_at_1 = score.precision_at_1;
        result.precision_at_5 = score.precision_at_5;
        result.counts.evaluated = score.evaluated;
        result.counts.excluded_no_gold = score.excluded_no_gold;
        result.counts.excluded_vocab = score.excluded_vocab + ew.missing_source_vocab;
    }

    if (run.enabled()) {
        save_candidates_tsv(lists_train, run.path("candidates_train.tsv"));
        save_candidates_tsv(lists_cv, run.path("candidates_cv.tsv"));
        save_candidates_tsv(result.ranked, run.path("ranked.tsv"));
        save_feature_csv(to_feature_records(lists_train, train_build.queries),
                         cfg.feature_k_max, run.path("features_train.csv"));
        save_feature_csv(to_feature_records(lists_cv, cv_build.queries), cfg.feature_k_max,
                         run.path("features_cv.csv"));
        save_result_json(result, run.path("result.json"));
        run.finalize(cfg.seed);
    }
    return result;
}

InductionResult run_baseline(const EmbeddingSpace& source, const EmbeddingSpace& target,
                             const Lexicon* gold_target, RetrievalCriterion criterion,
                             const PipelineConfig& cfg) {
    const SpaceRef a(source, cfg.norm_mode);
    const SpaceRef b(target, cfg.norm_mode);
    RunDir run(cfg);

    InductionResult result;
    result.config_hash = run.hash();
    result.seed = cfg.seed;

    WProcConfig wb = cfg.wproc;
    wb.seed = mix_seed(cfg.seed, 2);
    const AlignmentMap map_ab =
        align_stage(run, "align-target", "map_target.txt", "convergence_target.csv", a.get(),
                    b.get(), wb);

    const EvalWords ew = pick_eval_words(a.get(), gold_target, cfg.eval_size);
    result.counts.input_words = ew.input_words;

    result.ranked = with_stage("candidates-target", [&] {
        return generate_candidates(ew.rows, map_ab, a.get(), b.get(), cfg.query_size,
                                   criterion, cfg.csls_k, cfg.isf_beta);
    });

    if (gold_target) {
        const BliScore score = with_stage("evaluate", [&] {
            return evaluate_bli(result.ranked, *gold_target, b.get());
        });
        result.precision_at_1 = score.precision_at_1;
        result.precision_at_5 = score.precision_at_5;
        result.counts.evaluated = score.evaluated;
        result.counts.excluded_no_gold = score.excluded_no_gold;
        result.counts.excluded_vocab = score.excluded_vocab + ew.missing_source_vocab;
    }

    if (run.enabled()) {
        save_candidates_tsv(result.ranked, run.path("ranked.tsv"));
        save_result_json(result, run.path("result.json"));
        run.finalize(cfg.seed);
    }
    return result;
}

InductionResult run_rubi_files(const PipelineConfig& cfg) {
    if (cfg.emb_source.empty() || cfg.emb_target.empty() || cfg.emb_pivot.empty() ||
        cfg.dict_train.empty()) {
        throw InputError(
            "[stage inputs] the end-to-end run needs source, target and pivot embeddings "
            "plus the source-pivot dictionary");
    }
    const EmbeddingSpace a = with_stage("inputs", [&] {
        return load_embeddings(cfg.emb_source, cfg.max_vocab, cfg.lang_source);
    });
    const EmbeddingSpace b = with_stage("inputs", [&] {
        return load_embeddings(cfg.emb_target, cfg.max_vocab, cfg.lang_target);
    });
    const EmbeddingSpace c = with_stage("inputs", [&] {
        return load_embeddings(cfg.emb_pivot, cfg.max_vocab, cfg.lang_pivot);
    });
    const Lexicon gold_ac = with_stage("inputs", [&] { return load_dictionary(cfg.dict_train); });
    std::optional<Lexicon> gold_ab;
    if (!cfg.dict_eval.empty()) {
        gold_ab = with_stage("inputs", [&] { return load_dictionary(cfg.dict_eval); });
    }
    return run_rubi(a, b, c, gold_ac, gold_ab ? &*gold_ab : nullptr, cfg);
}

InductionResult run_baseline_files(const PipelineConfig& cfg, RetrievalCriterion criterion) {
    if (cfg.emb_source.empty() || cfg.emb_target.empty()) {
        throw InputError("[stage inputs] the baseline needs source and target embeddings");
    }
    const EmbeddingSpace a = with_stage("inputs", [&] {
        return load_embeddings(cfg.emb_source, cfg.max_vocab, cfg.lang_source);
    });
    const EmbeddingSpace b = with_stage("inputs", [&] {
        return load_embeddings(cfg.emb_target, cfg.max_vocab, cfg.lang_target);
    });
    std::optional<Lexicon> gold_ab;
    if (!cfg.dict_eval.empty()) {
        gold_ab = with_stage("inputs", [&] { return load_dictionary(cfg.dict_eval); });
    }
    return run_baseline(a, b, gold_ab ? &*gold_ab : nullptr, criterion, cfg);
}

void save_result_json(const InductionResult& result, const std::string& path) {
    json j;
    j["config_hash"] = result.config_hash;
    j["seed"] = result.seed;
    if (result.precision_at_1 >= 0.0) {
        j["precision_at_1"] = result.precision_at_1;
        j["precision_at_5"] = result.precision_at_5;
    } else {
        j["precision_at_1"] = nullptr;
        j["precision_at_5"] = nullptr;
    }
    if (result.training_precision_at_1 >= 0.0) {
        j["training_precision_at_1"] = result.training_precision_at_1;
    } else {
        j["training_precision_at_1"] = nullptr;
    }
    j["counts"] = {
        {"input_words", result.counts.input_words},
        {"evaluated", result.counts.evaluated},
        {"excluded_no_gold", result.counts.excluded_no_gold},
        {"excluded_vocab", result.counts.excluded_vocab},
        {"train_queries", result.counts.train_queries},
        {"cv_queries", result.counts.cv_queries},
        {"queries_without_gold_candidate", result.counts.queries_without_gold_candidate},
        {"dropped_zero_label_queries", result.counts.dropped_zero_label_queries},
    };
    std::ofstream out(path);
    if (!out) throw InputError("cannot write result file: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace bli
