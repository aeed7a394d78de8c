#include "bli/ltr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bli {

namespace {

double softplus(double x) {
    // log(1 + e^x) without overflow
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double gain(int label) { return std::exp2(static_cast<double>(label)) - 1.0; }

void check_sizes(const std::vector<int>& labels, const Vector& scores) {
    if (static_cast<Eigen::Index>(labels.size()) != scores.size()) {
        throw InputError("labels and scores must have the same length");
    }
    for (int y : labels) {
        if (y < 0) throw InputError("relevance labels must be non-negative");
    }
}

}  // namespace

int RankingQuery::valid_count() const {
    return static_cast<int>(std::count(valid.begin(), valid.end(), 1));
}

bool RankingQuery::all_zero_labels() const {
    for (int i = 0; i < size(); ++i) {
        if (valid[i] && labels[i] != 0) return false;
    }
    return true;
}

void RankingQuery::check() const {
    if (features.rows() != size() || valid.size() != labels.size()) {
        throw InputError("ranking query shape mismatch for '" + query_id + "'");
    }
    if (!features.allFinite()) {
        throw InputError("non-finite feature in query '" + query_id + "'");
    }
    for (int y : labels) {
        if (y < 0) throw InputError("negative relevance label in query '" + query_id + "'");
    }
}

std::vector<int> ranking_from_scores(const Vector& scores) {
    std::vector<int> idx(static_cast<std::size_t>(scores.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return idx;
}

double dcg_at_k(const std::vector<int>& labels, const std::vector<int>& ranking, int k) {
    if (k < 1) throw InputError("dcg_at_k: k must be >= 1");
    const int n = static_cast<int>(ranking.size());
    double total = 0.0;
    for (int r = 0; r < std::min(k, n); ++r) {
        const int item = ranking[r];
        if (item < 0 || item >= static_cast<int>(labels.size())) {
            throw InputError("dcg_at_k: ranking index out of range");
        }
        total += gain(labels[item]) / std::log2(2.0 + r);
    }
    return total;
}

double ndcg_at_k(const std::vector<int>& labels, const std::vector<int>& ranking, int k) {
    std::vector<int> ideal(labels.size());
    std::iota(ideal.begin(), ideal.end(), 0);
    std::sort(ideal.begin(), ideal.end(), [&](int a, int b) {
        if (labels[a] != labels[b]) return labels[a] > labels[b];
        return a < b;
    });
    const double denom = dcg_at_k(labels, ideal, k);
    if (denom == 0.0) return 0.0;
    return dcg_at_k(labels, ranking, k) / denom;
}

std::string loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::sigmoid_ce: return "sigmoid_ce";
        case LossKind::pairwise_logistic: return "pairwise_logistic";
        case LossKind::softmax_ce: return "softmax_ce";
        case LossKind::approx_ndcg: return "approx_ndcg";
        case LossKind::list_mle: return "list_mle";
    }
    return "approx_ndcg";
}

LossKind loss_from_name(const std::string& name) {
    if (name == "sigmoid_ce") return LossKind::sigmoid_ce;
    if (name == "pairwise_logistic") return LossKind::pairwise_logistic;
    if (name == "softmax_ce") return LossKind::softmax_ce;
    if (name == "approx_ndcg") return LossKind::approx_ndcg;
    if (name == "list_mle") return LossKind::list_mle;
    throw InputError("unknown loss function: " + name);
}

Vector approx_rank(const Vector& scores, double alpha) {
    if (alpha <= 0.0) throw InputError("approx_rank: alpha must be > 0");
    const Eigen::Index n = scores.size();
    Vector ranks = Vector::Ones(n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
            if (y == x) continue;
            ranks[x] += sigmoid(-alpha * (scores[x] - scores[y]));
        }
    }
    return ranks;
}

double loss_sigmoid_ce(const std::vector<int>& labels, const Vector& scores, Vector* grad) {
    check_sizes(labels, scores);
    const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
    // Mid-range binarization; a degenerate all-equal list falls back to
    // "positive label means positive item".
    const double threshold =
        (*lo == *hi) ? 0.0 : (static_cast<double>(*lo) + static_cast<double>(*hi)) / 2.0;
    if (grad) *grad = Vector::Zero(scores.size());
    double total = 0.0;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
        const double y = labels[j] > threshold ? 1.0 : 0.0;
        total += softplus(scores[j]) - y * scores[j];
        if (grad) (*grad)[j] = sigmoid(scores[j]) - y;
    }
    return total;
}

double loss_pairwise_logistic(const std::vector<int>& labels, const Vector& scores,
                              Vector* grad) {
    check_sizes(labels, scores);
    if (grad) *grad = Vector::Zero(scores.size());
    double total = 0.0;
    const Eigen::Index n = scores.size();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (labels[j] <= labels[k]) continue;
            total += softplus(scores[k] - scores[j]);
            if (grad) {
                const double s = sigmoid(scores[k] - scores[j]);
                (*grad)[k] += s;
                (*grad)[j] -= s;
            }
        }
    }
    return total;
}

double loss_softmax_ce(const std::vector<int>& labels, const Vector& scores, Vector* grad) {
    check_sizes(labels, scores);
    const double label_sum = std::accumulate(labels.begin(), labels.end(), 0.0);
    if (label_sum == 0.0) {
        if (grad) *grad = Vector::Zero(scores.size());
        return 0.0;
    }
    const double max_s = scores.maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < scores.size(); ++j) z += std::exp(scores[j] - max_s);
    const double lse = max_s + std::log(z);
    double total = 0.0;
    if (grad) *grad = Vector::Zero(scores.size());
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
        total -= labels[j] * (scores[j] - lse);
        if (grad) (*grad)[j] = -labels[j] + label_sum * std::exp(scores[j] - lse);
    }
    return total;
}

double loss_approx_ndcg(const std::vector<int>& labels, const Vector& scores, double alpha,
                        int cutoff, Vector* grad) {
    check_sizes(labels, scores);
    if (alpha <= 0.0) throw InputError("loss_approx_ndcg: alpha must be > 0");
    const Eigen::Index n = scores.size();
    if (grad) *grad = Vector::Zero(n);

    std::vector<int> ideal(labels.size());
    std::iota(ideal.begin(), ideal.end(), 0);
    std::sort(ideal.begin(), ideal.end(), [&](int a, int b) {
        if (labels[a] != labels[b]) return labels[a] > labels[b];
        return a < b;
    });
    const int k_ideal = (cutoff >= 1 && cutoff < static_cast<int>(n)) ? cutoff : static_cast<int>(n);
    const double ideal_dcg = dcg_at_k(labels, ideal, k_ideal);
    if (ideal_dcg == 0.0) return 0.0;

    const bool use_cutoff = cutoff >= 1 && cutoff < static_cast<int>(n);
    const Vector ranks = approx_rank(scores, alpha);

    // d(approxDCG)/d(rank_x), then chained into d(rank_x)/d(score_z).
    Vector d_rank = Vector::Zero(n);
    double approx_dcg = 0.0;
    const double ln2 = std::log(2.0);
    for (Eigen::Index x = 0; x < n; ++x) {
        const double g = gain(labels[x]);
        const double L = std::log2(1.0 + ranks[x]);
        double c = 1.0, dc = 0.0;
        if (use_cutoff) {
            c = sigmoid(-alpha * (ranks[x] - cutoff));
            dc = -alpha * c * (1.0 - c);
        }
        approx_dcg += g * c / L;
        if (grad) {
            const double dL = 1.0 / ((1.0 + ranks[x]) * ln2);
            d_rank[x] = g * (dc * L - c * dL) / (L * L);
        }
    }
    if (grad) {
        for (Eigen::Index x = 0; x < n; ++x) {
            for (Eigen::Index y = 0; y < n; ++y) {
                if (y == x) continue;
                const double t = sigmoid(-alpha * (scores[x] - scores[y]));
                const double dt = alpha * t * (1.0 - t);
                // rank_x term sigmoid(-alpha (s_x - s_y)): d/ds_x = -dt, d/ds_y = +dt
                (*grad)[x] += -(d_rank[x] / ideal_dcg) * -dt;
                (*grad)[y] += -(d_rank[x] / ideal_dcg) * dt;
            }
        }
    }
    return -approx_dcg / ideal_dcg;
}

double loss_list_mle(const std::vector<int>& labels, const Vector& scores,
                     const std::vector<int>& tie_break, Vector* grad) {
    check_sizes(labels, scores);
    if (tie_break.size() != labels.size()) {
        throw InputError("loss_list_mle: tie_break size mismatch");
    }
    const Eigen::Index n = scores.size();
    std::vector<int> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (labels[a] != labels[b]) return labels[a] > labels[b];
        return tie_break[a] < tie_break[b];
    });
    if (grad) *grad = Vector::Zero(n);
    double total = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        double max_s = -std::numeric_limits<double>::infinity();
        for (Eigen::Index u = t; u < n; ++u) max_s = std::max(max_s, scores[order[u]]);
        double z = 0.0;
        for (Eigen::Index u = t; u < n; ++u) z += std::exp(scores[order[u]] - max_s);
        const double lse = max_s + std::log(z);
        total += lse - scores[order[t]];
        if (grad) {
            for (Eigen::Index u = t; u < n; ++u) {
                (*grad)[order[u]] += std::exp(scores[order[u]] - lse);
            }
            (*grad)[order[t]] -= 1.0;
        }
    }
    return total;
}

double loss_value(const LossSpec& spec, const std::vector<int>& labels, const Vector& scores,
                  const std::vector<int>& tie_break, Vector* grad) {
    switch (spec.kind) {
        case LossKind::sigmoid_ce: return loss_sigmoid_ce(labels, scores, grad);
        case LossKind::pairwise_logistic: return loss_pairwise_logistic(labels, scores, grad);
        case LossKind::softmax_ce: return loss_softmax_ce(labels, scores, grad);
        case LossKind::approx_ndcg:
            return loss_approx_ndcg(labels, scores, spec.alpha, spec.cutoff, grad);
        case LossKind::list_mle: return loss_list_mle(labels, scores, tie_break, grad);
    }
    throw InputError("unknown loss kind");
}

}  // namespace bli
