// End-to-end orchestration: align a source-pivot pair, train the groupwise
// ranker on the pivot dictionary, align the source-target pair and rerank
// its translation candidates with the trained model; plus the deterministic
// NN/CSLS/ISF baselines and the lexicon-induction evaluation harness.
#pragma once

#include "bli/alignment.hpp"
#include "bli/common.hpp"
#include "bli/embeddings.hpp"
#include "bli/lexicon.hpp"
#include "bli/ranker.hpp"
#include "bli/relevance.hpp"
#include "bli/retrieval.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bli {

struct PipelineConfig {
    // Inputs; the in-memory entry points ignore the paths.
    std::string emb_source;
    std::string emb_target;
    std::string emb_pivot;
    std::string dict_train;  // source-pivot supervision
    std::string dict_eval;   // optional source-target gold
    std::string out_dir;     // stage outputs land here when non-empty

    std::string lang_source = "A";
    std::string lang_target = "B";
    std::string lang_pivot = "C";

    std::size_t max_vocab = 200000;
    NormMode norm_mode = NormMode::center_l2;
    int train_dict_size = 5000;
    int cv_dict_size = 1500;
    int query_size = 10;
    int feature_k_max = 10;
    int eval_size = 5000;  // evaluation words when no gold dictionary is given
    RetrievalCriterion candidate_criterion = RetrievalCriterion::nn;
    RelevanceMode relevance = RelevanceMode::semi_binary;
    int csls_k = 10;
    double isf_beta = 30.0;

    WProcConfig wproc;
    TrainConfig train;
    std::uint64_t seed = 0;
};

// Canonical key=value rendering of every result-affecting setting.
std::string config_fingerprint(const PipelineConfig& cfg);
// 16-hex-digit FNV-1a of the fingerprint.
std::string config_hash(const PipelineConfig& cfg);

struct ResultCounts {
    int input_words = 0;
    int evaluated = 0;
    int excluded_no_gold = 0;
    int excluded_vocab = 0;
    int train_queries = 0;
    int cv_queries = 0;
    int queries_without_gold_candidate = 0;
    int dropped_zero_label_queries = 0;
};

struct InductionResult {
    std::vector<CandidateList> ranked;  // per source word, best first
    double precision_at_1 = -1.0;       // -1 when no gold was available
    double precision_at_5 = -1.0;
    double training_precision_at_1 = -1.0;
    ResultCounts counts;
    std::string config_hash;
    std::uint64_t seed = 0;
};

struct BliScore {
    double precision_at_1 = 0.0;
    double precision_at_5 = 0.0;
    int evaluated = 0;
    int excluded_no_gold = 0;
    int excluded_vocab = 0;
};

// A hit at rank k means any gold translation appears in the top k. Words
// absent from the gold lexicon, or whose gold translations are all outside
// the target vocabulary, leave the denominator and are counted separately.
// Throws InputError when nothing is evaluable.
BliScore evaluate_bli(const std::vector<CandidateList>& ranked, const Lexicon& gold,
                      const EmbeddingSpace& target);

// Featurize candidate lists and label them against the gold dictionary.
struct QueryBuild {
    std::vector<RankingQuery> queries;
    int without_gold_candidate = 0;  // no candidate matched any gold translation
};

QueryBuild build_queries(const std::vector<CandidateList>& lists, const Lexicon& gold,
                         RelevanceMode mode, const AlignmentMap& map,
                         const EmbeddingSpace& source, const EmbeddingSpace& target,
                         int k_max, const NeighborhoodBundle& bundle);

// Reorder each candidate list by the model's eval-mode scores.
std::vector<CandidateList> rerank_with_model(const RankerModel& model,
                                             const std::vector<CandidateList>& lists,
                                             const AlignmentMap& map,
                                             const EmbeddingSpace& source,
                                             const EmbeddingSpace& target, int k_max,
                                             const NeighborhoodBundle& bundle);

// Two-step procedure on in-memory spaces: learn on the source-pivot pair,
// predict on the source-target pair. gold_target may be null (no scoring).
// Raw spaces are normalized with cfg.norm_mode first.
InductionResult run_rubi(const EmbeddingSpace& source, const EmbeddingSpace& target,
                         const EmbeddingSpace& pivot, const Lexicon& gold_pivot,
                         const Lexicon* gold_target, const PipelineConfig& cfg);

// Align source-target and rank candidates by a deterministic criterion.
InductionResult run_baseline(const EmbeddingSpace& source, const EmbeddingSpace& target,
                             const Lexicon* gold_target, RetrievalCriterion criterion,
                             const PipelineConfig& cfg);

// File-driven variants used by the CLI.
InductionResult run_rubi_files(const PipelineConfig& cfg);
InductionResult run_baseline_files(const PipelineConfig& cfg, RetrievalCriterion criterion);

void save_result_json(const InductionResult& result, const std::string& path);

}  // namespace bli
