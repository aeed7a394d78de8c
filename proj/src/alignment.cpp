#include "bli/alignment.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bli {

std::string align_method_name(AlignMethod m) {
    switch (m) {
        case AlignMethod::procrustes: return "procrustes";
        case AlignMethod::wproc: return "wproc";
        case AlignMethod::rcsls: return "rcsls";
    }
    return "procrustes";
}

AlignMethod align_method_from_name(const std::string& name) {
    if (name == "procrustes") return AlignMethod::procrustes;
    if (name == "wproc") return AlignMethod::wproc;
    if (name == "rcsls") return AlignMethod::rcsls;
    throw InputError("unknown alignment method: " + name);
}

namespace {

Eigen::BDCSVD<Matrix> svd_of(const Matrix& M) {
    if (!M.allFinite()) throw NumericError("SVD input has non-finite entries");
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (!svd.matrixU().allFinite() || !svd.matrixV().allFinite()) {
        throw NumericError("SVD failed to converge");
    }
    return svd;
}

Matrix gather_rows(const Matrix& M, const std::vector<int>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), M.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(idx[i]);
    return out;
}

}  // namespace

AlignmentMap procrustes(const Matrix& X, const Matrix& Y) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
        throw InputError("procrustes: X and Y must have identical shape");
    }
    if (X.rows() == 0) throw InputError("procrustes: empty input");
    auto svd = svd_of(X.transpose() * Y);
    AlignmentMap map;
    map.matrix = svd.matrixU() * svd.matrixV().transpose();
    map.method = AlignMethod::procrustes;
    map.orthogonal = true;
    return map;
}

Matrix project_orthogonal(const Matrix& M) {
    auto svd = svd_of(M);
    return svd.matrixU() * svd.matrixV().transpose();
}

Matrix project_spectral_ball(const Matrix& M) {
    auto svd = svd_of(M);
    Vector sigma = svd.singularValues();
    for (Eigen::Index i = 0; i < sigma.size(); ++i) sigma[i] = std::min(sigma[i], 1.0);
    return svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
}

namespace {

// Convex relaxation of the matching between the two row sets, solved by
// Frank-Wolfe over the Birkhoff polytope. Works on the Gram matrices, which
// do not depend on the unknown rotation:
//   min_M |K_X M - M K_Y|_F^2,  M doubly stochastic.
// Each linear step is an exact assignment solve on the gradient; the step
// size comes from exact line search of the quadratic.
Matrix convex_gram_matching(const Matrix& Xm, const Matrix& Ym, int iters) {
    const int m = static_cast<int>(Xm.rows());
    const Matrix Kx = Xm * Xm.transpose();
    Matrix Ky = Ym * Ym.transpose();
    const double ky_norm = Ky.norm();
    if (ky_norm > 0) Ky *= Kx.norm() / ky_norm;

    Matrix M = Matrix::Constant(m, m, 1.0 / m);
    for (int it = 0; it < iters; ++it) {
        const Matrix residual = Kx * M - M * Ky;
        const Matrix grad = 2.0 * (Kx * residual - residual * Ky);
        const Permutation step = solve_assignment(grad, AssignDirection::minimize);
        Matrix delta = -M;
        for (int i = 0; i < m; ++i) delta(i, step.mapping[i]) += 1.0;
        const Matrix b = Kx * delta - delta * Ky;
        const double denom = b.squaredNorm();
        if (denom <= 0.0) break;
        const double gamma = std::clamp(-(residual.cwiseProduct(b)).sum() / denom, 0.0, 1.0);
        if (gamma <= 0.0) break;
        M += gamma * delta;
    }
    return M;
}

// Seed map from the m most frequent rows: a convex Gram matching provides
// the starting point, then exact assignment alternated with closed-form
// Procrustes sharpens it until the matching stops changing.
Matrix procrustes_seed_init(const Matrix& X, const Matrix& Y, int m, int max_rounds = 50) {
    const Matrix Xm = X.topRows(m);
    const Matrix Ym = Y.topRows(m);

    const Matrix M = convex_gram_matching(Xm, Ym, 15);
    Matrix Q = procrustes(Xm, M * Ym).matrix;

    std::vector<int> last;
    for (int round = 0; round < max_rounds; ++round) {
        const Matrix cost = -(Xm * Q) * Ym.transpose();
        Permutation perm = solve_assignment(cost, AssignDirection::minimize);
        Matrix PY(m, Ym.cols());
        for (int i = 0; i < m; ++i) PY.row(i) = Ym.row(perm.mapping[i]);
        Q = procrustes(Xm, PY).matrix;
        if (perm.mapping == last) break;
        last = perm.mapping;
    }
    return Q;
}

}  // namespace

std::pair<AlignmentMap, ConvergenceLog> wasserstein_procrustes(
    const EmbeddingSpace& source, const EmbeddingSpace& target, const WProcConfig& cfg) {
    if (source.normalized == NormMode::raw || target.normalized == NormMode::raw) {
        throw InputError("wasserstein_procrustes: spaces must be normalized first");
    }
    if (source.dim() != target.dim()) {
        throw InputError("wasserstein_procrustes: dimension mismatch");
    }
    if (cfg.learning_rate <= 0.0) throw InputError("wasserstein_procrustes: learning_rate must be > 0");
    const int b = cfg.batch_size;
    if (b < 1 || b > source.size() || b > target.size()) {
        throw InputError("wasserstein_procrustes: batch size exceeds vocabulary");
    }
    const int d = source.dim();
    const int slice_src = std::min(cfg.sample_top, source.size());
    const int slice_tgt = std::min(cfg.sample_top, target.size());
    if (b > slice_src || b > slice_tgt) {
        throw InputError("wasserstein_procrustes: batch size exceeds the sampling slice");
    }

    const Matrix& X = source.vectors;
    const Matrix& Y = target.vectors;

    Rng rng(mix_seed(cfg.seed, 0x77726f63 /* "wroc" */));
    Matrix Q;
    switch (cfg.init) {
        case WProcInit::identity:
            Q = Matrix::Identity(d, d);
            break;
        case WProcInit::random_orthogonal: {
            Matrix G(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) G(i, j) = rng.next_gaussian();
            Q = project_orthogonal(G);
            break;
        }
        case WProcInit::procrustes_seed: {
            const int m = std::min(2 * b, std::min(slice_src, slice_tgt));
            Q = procrustes_seed_init(X, Y, m);
            break;
        }
    }

    ConvergenceLog log;
    double window_sum = 0.0;
    int window_count = 0;
    int global_iter = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate * std::pow(0.5, epoch);
        for (int it = 0; it < cfg.iters_per_epoch; ++it) {
            ++global_iter;
            const std::vector<int> ix = rng.sample_distinct(slice_src, b);
            const std::vector<int> iy = rng.sample_distinct(slice_tgt, b);
            const Matrix Xb = gather_rows(X, ix);
            const Matrix Yb = gather_rows(Y, iy);

            const Matrix mapped = Xb * Q;
            const Matrix cost = -(mapped * Yb.transpose());
            Permutation perm = solve_assignment(cost, AssignDirection::minimize);

            Matrix residual(b, d);
            for (int i = 0; i < b; ++i) residual.row(i) = mapped.row(i) - Yb.row(perm.mapping[i]);

            const double objective = residual.squaredNorm() / b;
            if (!std::isfinite(objective)) {
                throw NumericError("wasserstein_procrustes: non-finite objective at iteration " +
                                   std::to_string(global_iter));
            }
            window_sum += objective;
            ++window_count;
            if (global_iter % cfg.log_every == 0) {
                log.entries.emplace_back(global_iter, window_sum / window_count);
                window_sum = 0.0;
                window_count = 0;
            }

            const Matrix grad = (2.0 / b) * Xb.transpose() * residual;
            Q = project_orthogonal(Q - lr * grad);
        }
    }
    if (window_count > 0) {
        log.entries.emplace_back(global_iter, window_sum / window_count);
    }

    AlignmentMap map;
    map.matrix = std::move(Q);
    map.source_lang = source.lang_tag;
    map.target_lang = target.lang_tag;
    map.method = AlignMethod::wproc;
    map.orthogonal = true;
    return {std::move(map), std::move(log)};
}

// --- RCSLS -------------------------------------------------------------------

namespace {

// Indices of the k largest entries of scores, ties broken on the lower index.
std::vector<int> top_k_indices(const Vector& scores, int k) {
    const int n = static_cast<int>(scores.size());
    k = std::min(k, n);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    idx.resize(k);
    return idx;
}

}  // namespace

RcslsNeighborhoods rcsls_neighborhoods(const Matrix& X, const Matrix& Y,
                                       const RowPairs& pairs, const Matrix& Q, int k) {
    if (k < 1) throw InputError("rcsls: k_neighbors must be >= 1");
    if (k > Y.rows() || k > X.rows()) {
        throw InputError("rcsls: k_neighbors exceeds the candidate pool");
    }
    const Matrix mapped = X * Q;
    RcslsNeighborhoods nbhd;
    nbhd.target_of_source.resize(pairs.size());
    nbhd.source_of_target.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Vector to_targets = Y * mapped.row(pairs[i].first).transpose();
        nbhd.target_of_source[i] = top_k_indices(to_targets, k);
        const Vector to_sources = mapped * Y.row(pairs[i].second).transpose();
        nbhd.source_of_target[i] = top_k_indices(to_sources, k);
    }
    return nbhd;
}

double rcsls_loss(const Matrix& X, const Matrix& Y, const RowPairs& pairs,
                  const Matrix& Q, const RcslsNeighborhoods& nbhd) {
    if (pairs.empty()) throw InputError("rcsls: empty supervision pairs");
    const Matrix mapped = X * Q;
    double total = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [s, t] = pairs[i];
        double term = -2.0 * mapped.row(s).dot(Y.row(t));
        const auto& nt = nbhd.target_of_source[i];
        for (int j : nt) term += mapped.row(s).dot(Y.row(j)) / static_cast<double>(nt.size());
        const auto& ns = nbhd.source_of_target[i];
        for (int j : ns) term += mapped.row(j).dot(Y.row(t)) / static_cast<double>(ns.size());
        total += term;
    }
    return total / static_cast<double>(pairs.size());
}

Matrix rcsls_grad(const Matrix& X, const Matrix& Y, const RowPairs& pairs,
                  const Matrix& Q, const RcslsNeighborhoods& nbhd) {
    if (pairs.empty()) throw InputError("rcsls: empty supervision pairs");
    (void)Q;  // the loss is linear in Q once neighborhoods are fixed
    Matrix grad = Matrix::Zero(X.cols(), Y.cols());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [s, t] = pairs[i];
        grad.noalias() -= 2.0 * X.row(s).transpose() * Y.row(t);
        const auto& nt = nbhd.target_of_source[i];
        const double kt = static_cast<double>(nt.size());
        for (int j : nt) grad.noalias() += X.row(s).transpose() * Y.row(j) / kt;
        const auto& ns = nbhd.source_of_target[i];
        const double ks = static_cast<double>(ns.size());
        for (int j : ns) grad.noalias() += X.row(j).transpose() * Y.row(t) / ks;
    }
    return grad / static_cast<double>(pairs.size());
}

AlignmentMap rcsls_refine(const EmbeddingSpace& source, const EmbeddingSpace& target,
                          const RowPairs& pairs, const AlignmentMap& Q0,
                          const RcslsConfig& cfg, std::vector<double>* loss_trace) {
    if (pairs.empty()) throw InputError("rcsls_refine: empty supervision pairs");
    const Matrix& X = source.vectors;
    const Matrix& Y = target.vectors;

    auto project = [&](const Matrix& M) {
        return cfg.constraint == RcslsConstraint::orthogonal ? project_orthogonal(M)
                                                             : project_spectral_ball(M);
    };

    Matrix Q = Q0.matrix;
    Matrix best_Q = Q;
    double best_loss = rcsls_loss(X, Y, pairs, Q, rcsls_neighborhoods(X, Y, pairs, Q, cfg.k_neighbors));
    if (loss_trace) loss_trace->push_back(best_loss);

    for (int it = 0; it < cfg.iterations; ++it) {
        const auto nbhd = rcsls_neighborhoods(X, Y, pairs, Q, cfg.k_neighbors);
        const Matrix grad = rcsls_grad(X, Y, pairs, Q, nbhd);
        Q = project(Q - cfg.step_size * grad);
        const double loss =
            rcsls_loss(X, Y, pairs, Q, rcsls_neighborhoods(X, Y, pairs, Q, cfg.k_neighbors));
        if (!std::isfinite(loss)) throw NumericError("rcsls_refine: non-finite loss");
        if (loss_trace) loss_trace->push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best_Q = Q;
        }
    }

    AlignmentMap map;
    map.matrix = std::move(best_Q);
    map.source_lang = source.lang_tag;
    map.target_lang = target.lang_tag;
    map.method = AlignMethod::rcsls;
    map.orthogonal = cfg.constraint == RcslsConstraint::orthogonal;
    return map;
}

// --- serialization ------------------------------------------------------------

void save_alignment(const AlignmentMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write alignment map: " + path);
    const auto tag = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
    out << map.matrix.rows() << ' ' << align_method_name(map.method) << ' '
        << tag(map.source_lang) << ' ' << tag(map.target_lang) << '\n';
    for (Eigen::Index i = 0; i < map.matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < map.matrix.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(map.matrix(i, j));
        }
        out << '\n';
    }
}

AlignmentMap load_alignment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open alignment map: " + path);
    int d = 0;
    std::string method, src, tgt;
    if (!(in >> d >> method >> src >> tgt) || d <= 0) {
        throw InputError("malformed alignment map header in " + path);
    }
    AlignmentMap map;
    map.method = align_method_from_name(method);
    map.source_lang = src == "-" ? "" : src;
    map.target_lang = tgt == "-" ? "" : tgt;
    map.matrix.resize(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (!(in >> map.matrix(i, j))) {
                throw InputError("truncated alignment map in " + path);
            }
        }
    }
    const Matrix gram = map.matrix.transpose() * map.matrix;
    map.orthogonal =
        (gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-6;
    return map;
}

void save_convergence_log(const ConvergenceLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write convergence log: " + path);
    out << "iter,objective\n";
    for (const auto& [iter, obj] : log.entries) {
        out << iter << ',' << format_double(obj) << '\n';
    }
}

}  // namespace bli
