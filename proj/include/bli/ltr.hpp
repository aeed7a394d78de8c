// Ranking data model, (N)DCG metrics and the training loss functions,
// including the smooth ApproxNDCG surrogate. Losses return a value and,
// optionally, the gradient with respect to the per-item scores.
#pragma once

#include "bli/common.hpp"

#include <string>
#include <vector>

namespace bli {

struct RankingQuery {
    std::string query_id;
    Matrix features;            // q x feature_dim, one row per item
    std::vector<int> labels;    // non-negative relevance grades, length q
    std::vector<char> valid;    // validity mask for padded queries, length q

    int size() const { return static_cast<int>(labels.size()); }
    int valid_count() const;
    bool all_zero_labels() const;
    void check() const;         // shape and label invariants, throws InputError
};

// Item indices ordered by descending score, ties broken on the lower index.
std::vector<int> ranking_from_scores(const Vector& scores);

// DCG@k = sum over the top-k ranks r (1-based) of (2^label - 1)/log2(1+r).
// k larger than the list truncates.
double dcg_at_k(const std::vector<int>& labels, const std::vector<int>& ranking, int k);

// DCG normalized by the ideal ordering; all-zero labels give 0 by definition.
double ndcg_at_k(const std::vector<int>& labels, const std::vector<int>& ranking, int k);

enum class LossKind { sigmoid_ce, pairwise_logistic, softmax_ce, approx_ndcg, list_mle };

std::string loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

// Smooth rank estimate: 1 + sum_{y != x} sigmoid(-alpha (s_x - s_y)).
Vector approx_rank(const Vector& scores, double alpha);

// Pointwise sigmoid cross entropy on binarized labels (label > mid-range).
double loss_sigmoid_ce(const std::vector<int>& labels, const Vector& scores,
                       Vector* grad = nullptr);

// sum over ordered pairs with y_j > y_k of log(1 + exp(s_k - s_j)).
double loss_pairwise_logistic(const std::vector<int>& labels, const Vector& scores,
                              Vector* grad = nullptr);

// -sum_j y_j log softmax_j(scores); 0 when every label is zero.
double loss_softmax_ce(const std::vector<int>& labels, const Vector& scores,
                       Vector* grad = nullptr);

// Negative smooth NDCG built from approx_rank; cutoff <= 0 or >= list size
// means no rank cutoff term. 0 when every label is zero.
double loss_approx_ndcg(const std::vector<int>& labels, const Vector& scores, double alpha,
                        int cutoff, Vector* grad = nullptr);

// Plackett-Luce negative log likelihood of the label-sorted order;
// tie_break[i] gives the secondary sort key for equal labels.
double loss_list_mle(const std::vector<int>& labels, const Vector& scores,
                     const std::vector<int>& tie_break, Vector* grad = nullptr);

struct LossSpec {
    LossKind kind = LossKind::approx_ndcg;
    double alpha = 10.0;  // ApproxNDCG sharpness
    int cutoff = 0;       // ApproxNDCG rank cutoff; <= 0 disables
};

double loss_value(const LossSpec& spec, const std::vector<int>& labels, const Vector& scores,
                  const std::vector<int>& tie_break, Vector* grad = nullptr);

}  // namespace bli
