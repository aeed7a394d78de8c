// Post-alignment lexicon induction criteria (NN, CSLS, ISF), candidate
// generation and per-candidate feature extraction.
#pragma once

#include "bli/alignment.hpp"
#include "bli/common.hpp"
#include "bli/embeddings.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bli {

enum class RetrievalCriterion { nn, csls, isf };

std::string criterion_name(RetrievalCriterion c);
RetrievalCriterion criterion_from_name(const std::string& name);

// u.v / (|u||v|); throws InputError on a zero vector.
double cosine_sim(const Vector& u, const Vector& v);

// Mean cosine similarity of each word to its K nearest neighbors on the
// other side. r_src is indexed by source row (neighborhood among targets),
// r_tgt by target row (neighborhood among mapped sources). Zero-norm rows
// never appear in anyone's neighborhood and get a penalty of 0 themselves.
struct NeighborhoodStats {
    Vector r_src;
    Vector r_tgt;
    int K = 0;
};

// Sorted top-k_max neighbor similarities per row, both directions. Prefix
// means yield NeighborhoodStats for every K in 1..k_max from one pass.
struct NeighborhoodBundle {
    Matrix src_topk;             // n_src x k_max, descending
    Matrix tgt_topk;             // n_tgt x k_max, descending
    std::vector<int> src_valid;  // usable neighbor count per source row
    std::vector<int> tgt_valid;
    int k_max = 0;

    NeighborhoodStats stats_for(int K) const;
};

NeighborhoodBundle compute_neighborhood_bundle(const AlignmentMap& map,
                                               const EmbeddingSpace& source,
                                               const EmbeddingSpace& target, int k_max,
                                               std::optional<bool> exclude_self = std::nullopt);

// Exact top-K means in both directions. When source and target are the same
// object a word is excluded from its own neighborhood (overridable).
NeighborhoodStats compute_neighborhood_stats(const AlignmentMap& map,
                                             const EmbeddingSpace& source,
                                             const EmbeddingSpace& target, int K,
                                             std::optional<bool> exclude_self = std::nullopt);

// CSLS(x_s, y_t) = 2 cos - r_src[s] - r_tgt[t]; cosine supplied by the
// caller. Throws InputError when the stats do not cover the row.
double csls_score(const NeighborhoodStats& stats, int source_row, int target_row,
                  double cosine);

// Inverted softmax: per-target log partition over the source pool.
struct IsfPartition {
    Vector log_z;  // indexed by target row
    double beta = 0.0;
};

IsfPartition compute_isf_partition(const AlignmentMap& map, const EmbeddingSpace& source,
                                   const EmbeddingSpace& target, double beta);

// exp(beta cos(x_mapped, y) - log_z[target_row]).
double isf_score(const Vector& x_mapped, const Vector& y, double beta,
                 const IsfPartition& partition, int target_row);

struct Candidate {
    int target_row;
    std::string token;
    double score;
};

struct CandidateList {
    int source_row = -1;
    std::string source_word;
    std::vector<Candidate> candidates;  // descending score, ties on lower row
};

// Top-q target words per source row under the criterion. csls_k sets the
// neighborhood size when criterion is csls; isf_beta the ISF temperature.
// Precomputed stats / partition are reused when supplied.
std::vector<CandidateList> generate_candidates(const std::vector<int>& source_rows,
                                               const AlignmentMap& map,
                                               const EmbeddingSpace& source,
                                               const EmbeddingSpace& target, int q,
                                               RetrievalCriterion criterion,
                                               int csls_k = 10, double isf_beta = 30.0,
                                               const NeighborhoodStats* stats = nullptr,
                                               const IsfPartition* partition = nullptr);

// Per-candidate feature vector [cosine, CSLS(1), ..., CSLS(k_max)] computed
// from a bundle covering K = 1..k_max. k_max = 0 yields just the cosine.
std::vector<std::vector<double>> extract_features(const CandidateList& list,
                                                  const AlignmentMap& map,
                                                  const EmbeddingSpace& source,
                                                  const EmbeddingSpace& target, int k_max,
                                                  const NeighborhoodBundle& bundle);

std::vector<std::string> feature_names(int k_max);

// --- file formats -------------------------------------------------------------

// TSV: source <TAB> cand1 <TAB> score1 <TAB> cand2 <TAB> score2 ...
void save_candidates_tsv(const std::vector<CandidateList>& lists, const std::string& path);
std::vector<CandidateList> load_candidates_tsv(const std::string& path,
                                               const EmbeddingSpace& source,
                                               const EmbeddingSpace& target);

// One row per (query, candidate); label -1 marks unlabeled rows.
struct FeatureRecord {
    std::string query;
    std::string candidate;
    int label = -1;
    std::vector<double> values;
};

void save_feature_csv(const std::vector<FeatureRecord>& records, int k_max,
                      const std::string& path);
std::vector<FeatureRecord> load_feature_csv(const std::string& path, int* k_max_out = nullptr);

}  // namespace bli
