#include "bli/synthetic.hpp"

#include "bli/alignment.hpp"

#include <algorithm>
#include <numeric>

namespace bli {

Matrix random_unit_cloud(int n, int d, Rng& rng) {
    Matrix m(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
        const double norm = m.row(i).norm();
        if (norm > 0) m.row(i) /= norm;
    }
    return m;
}

Matrix random_orthogonal_matrix(int d, Rng& rng) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = rng.next_gaussian();
    }
    return project_orthogonal(g);
}

std::vector<int> banded_permutation(int n, int window, Rng& rng) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    if (window >= n) {
        rng.shuffle(perm);
        return perm;
    }
    // Shuffle inside consecutive blocks of `window`; displacement stays local.
    for (int start = 0; start < n; start += window) {
        const int end = std::min(n, start + window);
        for (int i = end; i > start + 1; --i) {
            const int j = start + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(i - start)));
            std::swap(perm[static_cast<std::size_t>(i - 1)], perm[static_cast<std::size_t>(j)]);
        }
    }
    return perm;
}

namespace {

EmbeddingSpace cloud_to_space(Matrix m, const std::string& tag, const std::string& prefix) {
    EmbeddingSpace space;
    space.lang_tag = tag;
    space.vectors = std::move(m);
    space.words.reserve(static_cast<std::size_t>(space.vectors.rows()));
    for (Eigen::Index i = 0; i < space.vectors.rows(); ++i) {
        space.words.push_back(prefix + std::to_string(i));
    }
    space.normalized = NormMode::l2;
    space.rebuild_index();
    return space;
}

// Rotated, permuted, noised copy of the base cloud. view.row(perm[i]) holds
// base point i.
Matrix make_view(const Matrix& base, const Matrix& rotation, const std::vector<int>& perm,
                 double noise_sigma, Rng& rng) {
    const Eigen::Index n = base.rows(), d = base.cols();
    Matrix rotated = base * rotation;
    Matrix view(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        view.row(perm[static_cast<std::size_t>(i)]) = rotated.row(i);
    }
    if (noise_sigma > 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) view(i, j) += noise_sigma * rng.next_gaussian();
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = view.row(i).norm();
        if (norm > 0) view.row(i) /= norm;
    }
    return view;
}

}  // namespace

SyntheticPair make_synthetic_pair(const SyntheticPairConfig& cfg, const std::string& src_tag,
                                  const std::string& tgt_tag) {
    Rng rng(mix_seed(cfg.seed, 0x73796e70 /* "synp" */));
    const Matrix base = random_unit_cloud(cfg.n, cfg.d, rng);

    SyntheticPair pair;
    pair.rotation = random_orthogonal_matrix(cfg.d, rng);
    pair.target_row_of_source = banded_permutation(cfg.n, cfg.permutation_window, rng);
    Matrix target = make_view(base, pair.rotation, pair.target_row_of_source, cfg.noise_sigma, rng);

    pair.source = cloud_to_space(base, src_tag, src_tag + "_w");
    pair.target = cloud_to_space(std::move(target), tgt_tag, tgt_tag + "_w");
    pair.gold.source_lang = src_tag;
    pair.gold.target_lang = tgt_tag;
    for (int i = 0; i < cfg.n; ++i) {
        pair.gold.add(pair.source.words[static_cast<std::size_t>(i)],
                      pair.target.words[static_cast<std::size_t>(pair.target_row_of_source[static_cast<std::size_t>(i)])]);
    }
    return pair;
}

SyntheticTriple make_synthetic_triple(const SyntheticPairConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, 0x73796e33 /* "syn3" */));
    const Matrix base = random_unit_cloud(cfg.n, cfg.d, rng);

    SyntheticTriple triple;
    // A keeps the base order; B and C get their own rotations/permutations.
    const Matrix rot_a = random_orthogonal_matrix(cfg.d, rng);
    std::vector<int> id_perm(static_cast<std::size_t>(cfg.n));
    std::iota(id_perm.begin(), id_perm.end(), 0);
    Matrix view_a = make_view(base, rot_a, id_perm, cfg.noise_sigma, rng);
    triple.a = cloud_to_space(std::move(view_a), "A", "a");

    const Matrix rot_b = random_orthogonal_matrix(cfg.d, rng);
    const std::vector<int> perm_b = banded_permutation(cfg.n, cfg.permutation_window, rng);
    Matrix view_b = make_view(base, rot_b, perm_b, cfg.noise_sigma, rng);
    triple.b = cloud_to_space(std::move(view_b), "B", "b");

    const Matrix rot_c = random_orthogonal_matrix(cfg.d, rng);
    const std::vector<int> perm_c = banded_permutation(cfg.n, cfg.permutation_window, rng);
    Matrix view_c = make_view(base, rot_c, perm_c, cfg.noise_sigma, rng);
    triple.c = cloud_to_space(std::move(view_c), "C", "c");

    const Matrix rot_c2 = random_orthogonal_matrix(cfg.d, rng);
    const std::vector<int> perm_c2 = banded_permutation(cfg.n, cfg.permutation_window, rng);
    Matrix view_c2 = make_view(base, rot_c2, perm_c2, cfg.noise_sigma, rng);
    triple.c2 = cloud_to_space(std::move(view_c2), "C2", "p");

    triple.gold_ab.source_lang = "A";
    triple.gold_ab.target_lang = "B";
    triple.gold_ac.source_lang = "A";
    triple.gold_ac.target_lang = "C";
    triple.gold_ac2.source_lang = "A";
    triple.gold_ac2.target_lang = "C2";
    for (int i = 0; i < cfg.n; ++i) {
        triple.gold_ab.add(triple.a.words[static_cast<std::size_t>(i)],
                           triple.b.words[static_cast<std::size_t>(perm_b[static_cast<std::size_t>(i)])]);
        triple.gold_ac.add(triple.a.words[static_cast<std::size_t>(i)],
                           triple.c.words[static_cast<std::size_t>(perm_c[static_cast<std::size_t>(i)])]);
        triple.gold_ac2.add(triple.a.words[static_cast<std::size_t>(i)],
                            triple.c2.words[static_cast<std::size_t>(perm_c2[static_cast<std::size_t>(i)])]);
    }
    return triple;
}

HubCloud make_hub_cloud(int n, int d, double concentration, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x687562 /* "hub" */));
    Vector mu(d);
    for (int j = 0; j < d; ++j) mu[j] = rng.next_gaussian();
    mu /= mu.norm();

    auto draw_cloud = [&](int rows) {
        Matrix m(rows, d);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < d; ++j) m(i, j) = concentration * mu[j] + rng.next_gaussian();
            m.row(i) /= m.row(i).norm();
        }
        return m;
    };

    HubCloud cloud;
    Matrix target = draw_cloud(n);
    cloud.hub_row = 0;
    target.row(0) = mu.transpose();  // the hub sits exactly on the common direction
    cloud.target = cloud_to_space(std::move(target), "tgt", "t");
    cloud.source = cloud_to_space(draw_cloud(n), "src", "s");
    return cloud;
}

}  // namespace bli
