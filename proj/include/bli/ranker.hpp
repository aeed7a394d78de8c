// Groupwise MLP scorer and its Adagrad trainer.
//
// Scoring protocol for group size m: the item list is shuffled by a seeded
// permutation, tiled into ceil(q/m) contiguous groups (wrapping around when
// q is not a multiple of m), and each group's concatenated features are fed
// through the MLP, which emits one score per slot. The tiling is repeated
// for the m rotations of the shuffled order and per-item scores are averaged
// over every slot an item occupied. Deterministic for a fixed model seed.
#pragma once

#include "bli/common.hpp"
#include "bli/ltr.hpp"

#include <array>
#include <string>
#include <vector>

namespace bli {

inline constexpr std::array<int, 3> kRankerHiddenWidths{256, 128, 64};

struct RankerModel {
    int feature_dim = 0;
    int group_size = 1;
    double dropout_rate = 0.0;
    std::uint64_t seed = 0;
    std::vector<Matrix> weights;  // layer l maps width[l] -> width[l+1], stored (out x in)
    std::vector<Vector> biases;

    int input_width() const { return group_size * feature_dim; }
    void check() const;
};

// Uniform init scaled by 1/sqrt(fan_in), drawn from the model seed.
RankerModel make_ranker(int feature_dim, int group_size, double dropout_rate,
                        std::uint64_t seed);

enum class ScoreMode { train, eval };

// Per-item scores; entries for invalid (padded) items are 0 and must be
// ignored by the caller. Train mode applies inverted dropout with masks
// derived from (model seed, step); eval mode applies none.
Vector score_query(const RankerModel& model, const RankingQuery& query, ScoreMode mode,
                   std::uint64_t step = 0);

struct RankerGradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    double mean_loss = 0.0;
};

// Mean loss over the batch and its gradients for every parameter. Dropout
// masks are drawn from (model seed, step) when enabled, matching what
// score_query does in train mode at the same step. tie_breaks supplies the
// per-query list_mle tie order (may be empty for other losses).
RankerGradients backprop(const RankerModel& model, const std::vector<RankingQuery>& batch,
                         const LossSpec& loss, bool dropout_enabled, std::uint64_t step,
                         const std::vector<const std::vector<int>*>& tie_breaks = {});

struct TrainConfig {
    int iterations = 100000;
    int batch_size = 32;
    double learning_rate = 0.5;  // Adagrad
    double epsilon = 1e-6;
    double initial_accumulator = 0.1;  // keeps the first updates bounded
    LossSpec loss;
    int group_size = 4;
    double dropout_rate = 0.5;
    int metric_cutoff = 1;       // NDCG@k used for cross validation
    int report_every = 1000;
    std::uint64_t seed = 0;
};

struct TrainingReport {
    struct Row {
        int step;
        double train_loss;  // mean since the previous report
        double cv_ndcg;
    };
    std::vector<Row> rows;
    int dropped_zero_label_queries = 0;
    bool diverged = false;
    int best_step = 0;
    double best_cv_ndcg = 0.0;
};

// Adagrad training with uniform batch sampling. Queries whose valid labels
// are all zero are dropped up front (counted in the report). Returns the
// snapshot with the best cross-validation NDCG when cv_set is non-empty,
// otherwise the final model. A non-finite loss stops the run and flags
// report.diverged instead of updating further.
std::pair<RankerModel, TrainingReport> train_ranker(const std::vector<RankingQuery>& dataset,
                                                    const TrainConfig& cfg,
                                                    const std::vector<RankingQuery>& cv_set);

// Mean NDCG@k over the queries, scored in eval mode.
double mean_ndcg(const RankerModel& model, const std::vector<RankingQuery>& queries, int k);

void save_ranker(const RankerModel& model, const std::string& path);
RankerModel load_ranker(const std::string& path);

void save_training_report(const TrainingReport& report, const std::string& path);

}  // namespace bli
