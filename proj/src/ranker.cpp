#include "bli/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace bli {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974;     // "init"
constexpr std::uint64_t kGroupTag = 0x67727570;    // "grup"
constexpr std::uint64_t kDropTag = 0x64726f70;     // "drop"
constexpr std::uint64_t kTieTag = 0x746965;        // "tie"
constexpr std::uint64_t kBatchTag = 0x62617463;    // "batc"

std::vector<int> layer_widths(int input_width, int group_size) {
    std::vector<int> widths{input_width};
    for (int h : kRankerHiddenWidths) widths.push_back(h);
    widths.push_back(group_size);
    return widths;
}

// Slot assignment for one query: every group row lists the m item indices
// it consumes. The shuffled order is padded (wrapping to its front) up to a
// multiple of m before tiling, so that over the m rotations every position
// occupies every slot exactly once; identical items therefore collect
// identical slot mixes and identical averaged scores.
std::vector<std::vector<int>> group_rows(const RankerModel& model,
                                         const std::vector<int>& valid_items) {
    const int m = model.group_size;
    const int qv = static_cast<int>(valid_items.size());
    std::vector<std::vector<int>> rows;
    if (qv == 0) return rows;

    std::vector<int> perm(valid_items.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(mix_seed(model.seed, static_cast<std::uint64_t>(qv), kGroupTag));
    rng.shuffle(perm);

    const int n_groups = (qv + m - 1) / m;
    const int padded = n_groups * m;
    rows.reserve(static_cast<std::size_t>(m) * n_groups);
    for (int r = 0; r < m; ++r) {
        for (int g = 0; g < n_groups; ++g) {
            std::vector<int> row(static_cast<std::size_t>(m));
            for (int s = 0; s < m; ++s) {
                const int pos = (g * m + s + r) % padded;
                row[static_cast<std::size_t>(s)] =
                    valid_items[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos % qv)])];
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

struct ForwardPass {
    // One entry per query: group rows and their offset into the row block.
    std::vector<std::vector<std::vector<int>>> plans;
    std::vector<int> row_offset;
    Matrix input;                 // R x (m*f)
    std::vector<Matrix> pre;      // pre-activations per layer
    std::vector<Matrix> act;      // post relu(+dropout) per hidden layer
    std::vector<Matrix> mask;     // dropout masks, empty when disabled
    Matrix out;                   // R x m
};

ForwardPass forward_batch(const RankerModel& model,
                          const std::vector<const RankingQuery*>& batch, bool dropout_on,
                          std::uint64_t step) {
    const int m = model.group_size;
    const int f = model.feature_dim;

    ForwardPass fp;
    fp.plans.reserve(batch.size());
    fp.row_offset.reserve(batch.size());
    int total_rows = 0;
    for (const RankingQuery* q : batch) {
        std::vector<int> valid_items;
        for (int i = 0; i < q->size(); ++i) {
            if (q->valid[static_cast<std::size_t>(i)]) valid_items.push_back(i);
        }
        fp.row_offset.push_back(total_rows);
        fp.plans.push_back(group_rows(model, valid_items));
        total_rows += static_cast<int>(fp.plans.back().size());
    }

    fp.input.resize(total_rows, static_cast<Eigen::Index>(m) * f);
    for (std::size_t qi = 0; qi < batch.size(); ++qi) {
        const auto& plan = fp.plans[qi];
        for (std::size_t r = 0; r < plan.size(); ++r) {
            const Eigen::Index row = fp.row_offset[qi] + static_cast<Eigen::Index>(r);
            for (int s = 0; s < m; ++s) {
                fp.input.block(row, static_cast<Eigen::Index>(s) * f, 1, f) =
                    batch[qi]->features.row(plan[r][static_cast<std::size_t>(s)]);
            }
        }
    }

    const std::size_t n_layers = model.weights.size();
    const bool use_dropout = dropout_on && model.dropout_rate > 0.0;
    Rng drop_rng(mix_seed(model.seed, step, kDropTag));
    const double keep_scale = use_dropout ? 1.0 / (1.0 - model.dropout_rate) : 1.0;

    fp.pre.resize(n_layers);
    fp.act.resize(n_layers - 1);
    if (use_dropout) fp.mask.resize(n_layers - 1);

    const Matrix* current = &fp.input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        fp.pre[l].noalias() = (*current) * model.weights[l].transpose();
        fp.pre[l].rowwise() += model.biases[l].transpose();
        if (l + 1 == n_layers) break;  // output layer is linear
        fp.act[l] = fp.pre[l].cwiseMax(0.0);
        if (use_dropout) {
            Matrix& mask = fp.mask[l];
            mask.resize(fp.act[l].rows(), fp.act[l].cols());
            for (Eigen::Index i = 0; i < mask.rows(); ++i) {
                for (Eigen::Index j = 0; j < mask.cols(); ++j) {
                    mask(i, j) = drop_rng.next_double() >= model.dropout_rate ? keep_scale : 0.0;
                }
            }
            fp.act[l] = fp.act[l].cwiseProduct(mask);
        }
        current = &fp.act[l];
    }
    fp.out = fp.pre[n_layers - 1];
    return fp;
}

// Average the slot outputs back into per-item scores.
void scatter_scores(const ForwardPass& fp, std::size_t qi, int n_items, Vector& scores,
                    Vector& counts) {
    scores = Vector::Zero(n_items);
    counts = Vector::Zero(n_items);
    const auto& plan = fp.plans[qi];
    for (std::size_t r = 0; r < plan.size(); ++r) {
        const Eigen::Index row = fp.row_offset[qi] + static_cast<Eigen::Index>(r);
        for (std::size_t s = 0; s < plan[r].size(); ++s) {
            scores[plan[r][s]] += fp.out(row, static_cast<Eigen::Index>(s));
            counts[plan[r][s]] += 1.0;
        }
    }
    for (int i = 0; i < n_items; ++i) {
        if (counts[i] > 0) scores[i] /= counts[i];
    }
}

}  // namespace

void RankerModel::check() const {
    if (group_size < 1) throw InputError("ranker: group_size must be >= 1");
    if (feature_dim < 1) throw InputError("ranker: feature_dim must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw InputError("ranker: dropout_rate must lie in [0, 1)");
    }
    const auto widths = layer_widths(input_width(), group_size);
    if (weights.size() + 1 != widths.size() || biases.size() != weights.size()) {
        throw InputError("ranker: wrong number of layers");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] ||
            biases[l].size() != widths[l + 1]) {
            throw InputError("ranker: weight shapes do not chain");
        }
    }
}

RankerModel make_ranker(int feature_dim, int group_size, double dropout_rate,
                        std::uint64_t seed) {
    RankerModel model;
    model.feature_dim = feature_dim;
    model.group_size = group_size;
    model.dropout_rate = dropout_rate;
    model.seed = seed;

    const auto widths = layer_widths(model.input_width(), group_size);
    Rng rng(mix_seed(seed, kInitTag));
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(widths[l]));
        Matrix w(widths[l + 1], widths[l]);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = (2.0 * rng.next_double() - 1.0) * scale;
            }
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Vector::Zero(widths[l + 1]));
    }
    model.check();
    return model;
}

Vector score_query(const RankerModel& model, const RankingQuery& query, ScoreMode mode,
                   std::uint64_t step) {
    model.check();
    query.check();
    if (query.features.cols() != model.feature_dim) {
        throw InputError("score_query: feature dimension mismatch");
    }
    const ForwardPass fp =
        forward_batch(model, {&query}, mode == ScoreMode::train, step);
    Vector scores, counts;
    scatter_scores(fp, 0, query.size(), scores, counts);
    return scores;
}

RankerGradients backprop(const RankerModel& model, const std::vector<RankingQuery>& batch,
                         const LossSpec& loss, bool dropout_enabled, std::uint64_t step,
                         const std::vector<const std::vector<int>*>& tie_breaks) {
    model.check();
    if (batch.empty()) throw InputError("backprop: empty batch");
    std::vector<const RankingQuery*> refs;
    refs.reserve(batch.size());
    for (const auto& q : batch) {
        q.check();
        if (q.features.cols() != model.feature_dim) {
            throw InputError("backprop: feature dimension mismatch");
        }
        refs.push_back(&q);
    }

    ForwardPass fp = forward_batch(model, refs, dropout_enabled, step);
    const std::size_t n_layers = model.weights.size();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    Matrix d_out = Matrix::Zero(fp.out.rows(), fp.out.cols());
    double total_loss = 0.0;

    std::vector<int> identity_tie;
    for (std::size_t qi = 0; qi < batch.size(); ++qi) {
        const RankingQuery& q = batch[qi];
        Vector scores, counts;
        scatter_scores(fp, qi, q.size(), scores, counts);

        // Compact to the valid items for the loss, then spread back.
        std::vector<int> valid_items;
        for (int i = 0; i < q.size(); ++i) {
            if (q.valid[static_cast<std::size_t>(i)]) valid_items.push_back(i);
        }
        if (valid_items.empty()) continue;
        std::vector<int> labels(valid_items.size());
        Vector sub(static_cast<Eigen::Index>(valid_items.size()));
        for (std::size_t i = 0; i < valid_items.size(); ++i) {
            labels[i] = q.labels[static_cast<std::size_t>(valid_items[i])];
            sub[static_cast<Eigen::Index>(i)] = scores[valid_items[i]];
        }

        const std::vector<int>* tie = nullptr;
        if (qi < tie_breaks.size() && tie_breaks[qi]) {
            tie = tie_breaks[qi];
        } else {
            identity_tie.resize(valid_items.size());
            std::iota(identity_tie.begin(), identity_tie.end(), 0);
            tie = &identity_tie;
        }

        Vector grad;
        total_loss += loss_value(loss, labels, sub, *tie, &grad);

        Vector item_grad = Vector::Zero(q.size());
        for (std::size_t i = 0; i < valid_items.size(); ++i) {
            item_grad[valid_items[i]] = grad[static_cast<Eigen::Index>(i)] * inv_batch;
        }
        const auto& plan = fp.plans[qi];
        for (std::size_t r = 0; r < plan.size(); ++r) {
            const Eigen::Index row = fp.row_offset[qi] + static_cast<Eigen::Index>(r);
            for (std::size_t s = 0; s < plan[r].size(); ++s) {
                const int item = plan[r][s];
                if (counts[item] > 0) {
                    d_out(row, static_cast<Eigen::Index>(s)) += item_grad[item] / counts[item];
                }
            }
        }
    }

    RankerGradients grads;
    grads.mean_loss = total_loss * inv_batch;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);

    Matrix delta = std::move(d_out);
    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix& below = (l == 0) ? fp.input : fp.act[l - 1];
        grads.weights[l].noalias() = delta.transpose() * below;
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l == 0) break;
        Matrix d_act = delta * model.weights[l];
        if (!fp.mask.empty()) d_act = d_act.cwiseProduct(fp.mask[l - 1]);
        delta = d_act.cwiseProduct(
            (fp.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return grads;
}

double mean_ndcg(const RankerModel& model, const std::vector<RankingQuery>& queries, int k) {
    if (queries.empty()) return 0.0;
    double total = 0.0;
    for (const auto& q : queries) {
        const Vector scores = score_query(model, q, ScoreMode::eval);
        std::vector<int> labels;
        std::vector<double> vals;
        for (int i = 0; i < q.size(); ++i) {
            if (q.valid[static_cast<std::size_t>(i)]) {
                labels.push_back(q.labels[static_cast<std::size_t>(i)]);
                vals.push_back(scores[i]);
            }
        }
        Vector sub = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        total += ndcg_at_k(labels, ranking_from_scores(sub), k);
    }
    return total / static_cast<double>(queries.size());
}

std::pair<RankerModel, TrainingReport> train_ranker(const std::vector<RankingQuery>& dataset,
                                                    const TrainConfig& cfg,
                                                    const std::vector<RankingQuery>& cv_set) {
    if (cfg.iterations < 0 || cfg.batch_size < 1) {
        throw InputError("train_ranker: iterations and batch_size must be positive");
    }
    TrainingReport report;
    std::vector<RankingQuery> usable;
    usable.reserve(dataset.size());
    for (const auto& q : dataset) {
        q.check();
        if (q.valid_count() == 0 || q.all_zero_labels()) {
            ++report.dropped_zero_label_queries;
            continue;
        }
        usable.push_back(q);
    }
    if (usable.empty()) throw InputError("train_ranker: no trainable queries");
    const int feature_dim = static_cast<int>(usable[0].features.cols());
    for (const auto& q : usable) {
        if (q.features.cols() != feature_dim) {
            throw InputError("train_ranker: inconsistent feature dimensions");
        }
    }

    RankerModel model = make_ranker(feature_dim, cfg.group_size, cfg.dropout_rate, cfg.seed);
    if (cfg.iterations == 0) return {std::move(model), std::move(report)};

    // Fixed per-query tie order for list_mle label ties.
    std::vector<std::vector<int>> ties(usable.size());
    for (std::size_t i = 0; i < usable.size(); ++i) {
        ties[i].resize(static_cast<std::size_t>(usable[i].valid_count()));
        std::iota(ties[i].begin(), ties[i].end(), 0);
        Rng trng(mix_seed(cfg.seed, i, kTieTag));
        trng.shuffle(ties[i]);
    }

    std::vector<Matrix> acc_w;
    std::vector<Vector> acc_b;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        acc_w.push_back(Matrix::Constant(model.weights[l].rows(), model.weights[l].cols(),
                                         cfg.initial_accumulator));
        acc_b.push_back(Vector::Constant(model.biases[l].size(), cfg.initial_accumulator));
    }

    Rng batch_rng(mix_seed(cfg.seed, kBatchTag));
    RankerModel best_model = model;
    double best_cv = -std::numeric_limits<double>::infinity();
    int best_step = 0;
    double window_loss = 0.0;
    int window_count = 0;

    for (int step = 1; step <= cfg.iterations; ++step) {
        std::vector<RankingQuery> batch;
        std::vector<const std::vector<int>*> batch_ties;
        batch.reserve(static_cast<std::size_t>(cfg.batch_size));
        for (int b = 0; b < cfg.batch_size; ++b) {
            const std::size_t pick = batch_rng.uniform_index(usable.size());
            batch.push_back(usable[pick]);
            batch_ties.push_back(&ties[pick]);
        }

        RankerGradients grads = backprop(model, batch, cfg.loss, cfg.dropout_rate > 0.0,
                                         static_cast<std::uint64_t>(step), batch_ties);
        if (!std::isfinite(grads.mean_loss)) {
            report.diverged = true;
            break;
        }
        window_loss += grads.mean_loss;
        ++window_count;

        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            acc_w[l].array() += grads.weights[l].array().square();
            model.weights[l].array() -=
                cfg.learning_rate * grads.weights[l].array() /
                (acc_w[l].array().sqrt() + cfg.epsilon);
            acc_b[l].array() += grads.biases[l].array().square();
            model.biases[l].array() -=
                cfg.learning_rate * grads.biases[l].array() /
                (acc_b[l].array().sqrt() + cfg.epsilon);
        }

        if (step % cfg.report_every == 0 || step == cfg.iterations) {
            const double cv =
                cv_set.empty() ? 0.0 : mean_ndcg(model, cv_set, cfg.metric_cutoff);
            report.rows.push_back({step, window_loss / std::max(window_count, 1), cv});
            window_loss = 0.0;
            window_count = 0;
            if (!cv_set.empty() && cv > best_cv) {
                best_cv = cv;
                best_model = model;
                best_step = step;
            }
        }
    }

    if (!cv_set.empty() && best_step > 0) {
        report.best_step = best_step;
        report.best_cv_ndcg = best_cv;
        return {std::move(best_model), std::move(report)};
    }
    report.best_step = report.rows.empty() ? 0 : report.rows.back().step;
    return {std::move(model), std::move(report)};
}

void save_ranker(const RankerModel& model, const std::string& path) {
    model.check();
    std::ofstream out(path);
    if (!out) throw InputError("cannot write model file: " + path);
    out << "ranker_model 1\n";
    out << model.feature_dim << ' ' << model.group_size << ' '
        << format_double(model.dropout_rate) << ' ' << model.seed << '\n';
    out << model.weights.size() << '\n';
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Matrix& w = model.weights[l];
        out << w.rows() << ' ' << w.cols() << '\n';
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                if (j) out << ' ';
                out << format_double(w(i, j));
            }
            out << '\n';
        }
        for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) {
            if (i) out << ' ';
            out << format_double(model.biases[l][i]);
        }
        out << '\n';
    }
}

RankerModel load_ranker(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file: " + path);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "ranker_model" || version != 1) {
        throw InputError("unrecognized model file: " + path);
    }
    RankerModel model;
    std::size_t n_layers = 0;
    if (!(in >> model.feature_dim >> model.group_size >> model.dropout_rate >> model.seed >>
          n_layers)) {
        throw InputError("malformed model header in " + path);
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
            throw InputError("malformed layer header in " + path);
        }
        Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                if (!(in >> w(i, j))) throw InputError("truncated model file: " + path);
            }
        }
        Vector b(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (!(in >> b[i])) throw InputError("truncated model file: " + path);
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    model.check();
    return model;
}

void save_training_report(const TrainingReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write training report: " + path);
    out << "step,train_loss,cv_ndcg1\n";
    for (const auto& row : report.rows) {
        out << row.step << ',' << format_double(row.train_loss) << ','
            << format_double(row.cv_ndcg) << '\n';
    }
}

}  // namespace bli
