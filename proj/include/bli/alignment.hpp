// Orthogonal maps between embedding spaces: closed-form Procrustes for
// supervised pairs, a stochastic assignment/gradient loop for the
// unsupervised case, and RCSLS refinement on top of a seed map.
#pragma once

#include "bli/assignment.hpp"
#include "bli/common.hpp"
#include "bli/embeddings.hpp"

#include <string>
#include <utility>
#include <vector>

namespace bli {

enum class AlignMethod { procrustes, wproc, rcsls };

std::string align_method_name(AlignMethod m);
AlignMethod align_method_from_name(const std::string& name);

struct AlignmentMap {
    Matrix matrix;              // d x d, applied on the right of row vectors
    std::string source_lang;
    std::string target_lang;
    AlignMethod method = AlignMethod::procrustes;
    bool orthogonal = true;
};

enum class WProcInit { identity, random_orthogonal, procrustes_seed };

struct WProcConfig {
    int batch_size = 500;
    int epochs = 5;
    int iters_per_epoch = 5000;
    double learning_rate = 0.5;
    std::uint64_t seed = 0;
    WProcInit init = WProcInit::procrustes_seed;
    int sample_top = 20000;     // batches drawn from the most frequent slice
    int log_every = 100;        // convergence log granularity, iterations
};

// Mean batch objective, recorded every log_every iterations.
struct ConvergenceLog {
    std::vector<std::pair<int, double>> entries;  // (iteration, objective)
};

enum class RcslsConstraint { orthogonal, spectral_ball };

struct RcslsConfig {
    int k_neighbors = 10;
    int iterations = 30;
    double step_size = 1.0;
    RcslsConstraint constraint = RcslsConstraint::orthogonal;
};

// Closed-form orthogonal map minimizing |X W - Y|_F^2 over orthogonal W,
// for row-paired X and Y: W = U V^T with U S V^T the SVD of X^T Y.
AlignmentMap procrustes(const Matrix& X, const Matrix& Y);

// Nearest orthogonal matrix, U V^T from the SVD of M.
Matrix project_orthogonal(const Matrix& M);

// Projection onto the unit ball of the spectral norm: singular values
// clamped to at most 1.
Matrix project_spectral_ball(const Matrix& M);

// Alternating stochastic optimization: per iteration, sample one batch from
// each space, solve the batch assignment on the negated dot-product cost,
// take a gradient step on the mean squared batch residual, and re-project
// onto the orthogonal group. The learning rate halves every epoch.
// Deterministic for a fixed config and seed.
std::pair<AlignmentMap, ConvergenceLog> wasserstein_procrustes(
    const EmbeddingSpace& source, const EmbeddingSpace& target, const WProcConfig& cfg);

// --- RCSLS -----------------------------------------------------------------
// Loss over supervision pairs (s, t):
//   (1/n) sum_i [ -2 (x_i Q) . y_i
//                 + (1/k) sum_{j in NT(i)} (x_i Q) . y_j
//                 + (1/k) sum_{j in NS(i)} (x_j Q) . y_i ]
// where NT(i) holds the k target rows with the largest dot product against
// the mapped source x_i Q, and NS(i) the k mapped source rows with the
// largest dot product against y_i.

struct RcslsNeighborhoods {
    std::vector<std::vector<int>> target_of_source;  // NT, per pair
    std::vector<std::vector<int>> source_of_target;  // NS, per pair
};

using RowPairs = std::vector<std::pair<int, int>>;

RcslsNeighborhoods rcsls_neighborhoods(const Matrix& X, const Matrix& Y,
                                       const RowPairs& pairs, const Matrix& Q, int k);

double rcsls_loss(const Matrix& X, const Matrix& Y, const RowPairs& pairs,
                  const Matrix& Q, const RcslsNeighborhoods& nbhd);

// Gradient of rcsls_loss in Q with the neighborhood sets held fixed.
Matrix rcsls_grad(const Matrix& X, const Matrix& Y, const RowPairs& pairs,
                  const Matrix& Q, const RcslsNeighborhoods& nbhd);

// Projected subgradient descent from Q0; neighborhoods are re-selected every
// step. Returns the best map seen (never worse than Q0 on the final loss).
// loss_trace, when given, records the loss at each step (fresh neighborhoods).
AlignmentMap rcsls_refine(const EmbeddingSpace& source, const EmbeddingSpace& target,
                          const RowPairs& pairs, const AlignmentMap& Q0,
                          const RcslsConfig& cfg, std::vector<double>* loss_trace = nullptr);

// --- serialization ----------------------------------------------------------
// Text format: header "d method source_lang target_lang", then d rows of d
// floats printed with round-trip precision.
void save_alignment(const AlignmentMap& map, const std::string& path);
AlignmentMap load_alignment(const std::string& path);

void save_convergence_log(const ConvergenceLog& log, const std::string& path);

}  // namespace bli
