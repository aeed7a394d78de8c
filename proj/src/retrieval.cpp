#include "bli/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace bli {

std::string criterion_name(RetrievalCriterion c) {
    switch (c) {
        case RetrievalCriterion::nn: return "nn";
        case RetrievalCriterion::csls: return "csls";
        case RetrievalCriterion::isf: return "isf";
    }
    return "nn";
}

RetrievalCriterion criterion_from_name(const std::string& name) {
    if (name == "nn") return RetrievalCriterion::nn;
    if (name == "csls") return RetrievalCriterion::csls;
    if (name == "isf") return RetrievalCriterion::isf;
    throw InputError("unknown retrieval criterion: " + name);
}

double cosine_sim(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw InputError("cosine_sim: dimension mismatch");
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw InputError("cosine_sim: zero vector");
    return u.dot(v) / (nu * nv);
}

namespace {

// Rows scaled to unit norm; zero rows stay zero and are flagged invalid.
struct UnitRows {
    Matrix rows;
    std::vector<char> valid;
};

UnitRows unit_rows(const Matrix& M) {
    UnitRows out;
    out.rows = M;
    out.valid.assign(static_cast<std::size_t>(M.rows()), 1);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const double n = out.rows.row(i).norm();
        if (n < 1e-12) {
            out.valid[static_cast<std::size_t>(i)] = 0;
            out.rows.row(i).setZero();
        } else {
            out.rows.row(i) /= n;
        }
    }
    return out;
}

void check_map(const AlignmentMap& map, const EmbeddingSpace& source,
               const EmbeddingSpace& target) {
    if (map.matrix.rows() != source.dim() || map.matrix.cols() != target.dim()) {
        throw InputError("alignment map shape does not match the embedding spaces");
    }
}

// For every row of A, the top-k cosine similarities against rows of B,
// sorted descending. Processed in tiles of A rows; each output row depends
// only on its own scan over B, so results do not depend on tiling.
void topk_direction(const Matrix& A, const std::vector<char>& a_valid, const Matrix& B,
                    const std::vector<char>& b_valid, int k_max, bool exclude_self,
                    Matrix& topk, std::vector<int>& valid_count) {
    const Eigen::Index na = A.rows(), nb = B.rows();
    topk = Matrix::Zero(na, k_max);
    valid_count.assign(static_cast<std::size_t>(na), 0);
    constexpr Eigen::Index tile = 64;
    const std::size_t n_tiles = static_cast<std::size_t>((na + tile - 1) / tile);
    parallel_for(n_tiles, [&](std::size_t t0, std::size_t t1) {
        std::vector<double> scratch;
        for (std::size_t t = t0; t < t1; ++t) {
            const Eigen::Index beg = static_cast<Eigen::Index>(t) * tile;
            const Eigen::Index cnt = std::min(tile, na - beg);
            const Matrix sims = A.middleRows(beg, cnt) * B.transpose();
            for (Eigen::Index r = 0; r < cnt; ++r) {
                const Eigen::Index i = beg + r;
                if (!a_valid[static_cast<std::size_t>(i)]) continue;
                scratch.clear();
                for (Eigen::Index j = 0; j < nb; ++j) {
                    if (!b_valid[static_cast<std::size_t>(j)]) continue;
                    if (exclude_self && j == i) continue;
                    scratch.push_back(sims(r, j));
                }
                const int have = std::min<int>(k_max, static_cast<int>(scratch.size()));
                if (have > 0) {
                    std::nth_element(scratch.begin(), scratch.begin() + (have - 1), scratch.end(),
                                     std::greater<double>());
                    std::sort(scratch.begin(), scratch.begin() + have, std::greater<double>());
                    for (int k = 0; k < have; ++k) topk(i, k) = scratch[static_cast<std::size_t>(k)];
                }
                valid_count[static_cast<std::size_t>(i)] = have;
            }
        }
    });
}

}  // namespace

NeighborhoodStats NeighborhoodBundle::stats_for(int K) const {
    if (K < 1 || K > k_max) throw InputError("neighborhood stats requested for uncovered K");
    NeighborhoodStats stats;
    stats.K = K;
    stats.r_src = Vector::Zero(src_topk.rows());
    stats.r_tgt = Vector::Zero(tgt_topk.rows());
    for (Eigen::Index i = 0; i < src_topk.rows(); ++i) {
        const int m = std::min(K, src_valid[static_cast<std::size_t>(i)]);
        if (m > 0) stats.r_src[i] = src_topk.row(i).head(m).sum() / m;
    }
    for (Eigen::Index j = 0; j < tgt_topk.rows(); ++j) {
        const int m = std::min(K, tgt_valid[static_cast<std::size_t>(j)]);
        if (m > 0) stats.r_tgt[j] = tgt_topk.row(j).head(m).sum() / m;
    }
    return stats;
}

NeighborhoodBundle compute_neighborhood_bundle(const AlignmentMap& map,
                                               const EmbeddingSpace& source,
                                               const EmbeddingSpace& target, int k_max,
                                               std::optional<bool> exclude_self) {
    check_map(map, source, target);
    if (k_max < 1) throw InputError("k_max must be >= 1");
    if (k_max >= target.size() || k_max >= source.size()) {
        throw InputError("k_max must be smaller than both vocabularies");
    }
    const bool self = exclude_self.value_or(&source == &target);

    const UnitRows mapped = unit_rows(source.vectors * map.matrix);
    const UnitRows tgt = unit_rows(target.vectors);

    NeighborhoodBundle bundle;
    bundle.k_max = k_max;
    topk_direction(mapped.rows, mapped.valid, tgt.rows, tgt.valid, k_max, self,
                   bundle.src_topk, bundle.src_valid);
    topk_direction(tgt.rows, tgt.valid, mapped.rows, mapped.valid, k_max, self,
                   bundle.tgt_topk, bundle.tgt_valid);
    return bundle;
}

NeighborhoodStats compute_neighborhood_stats(const AlignmentMap& map,
                                             const EmbeddingSpace& source,
                                             const EmbeddingSpace& target, int K,
                                             std::optional<bool> exclude_self) {
    const bool self = exclude_self.value_or(&source == &target);
    return compute_neighborhood_bundle(map, source, target, K, self).stats_for(K);
}

double csls_score(const NeighborhoodStats& stats, int source_row, int target_row,
                  double cosine) {
    if (source_row < 0 || source_row >= stats.r_src.size() || target_row < 0 ||
        target_row >= stats.r_tgt.size()) {
        throw InputError("csls_score: stats do not cover the requested word");
    }
    return 2.0 * cosine - stats.r_src[source_row] - stats.r_tgt[target_row];
}

IsfPartition compute_isf_partition(const AlignmentMap& map, const EmbeddingSpace& source,
                                   const EmbeddingSpace& target, double beta) {
    check_map(map, source, target);
    if (beta <= 0.0) throw InputError("isf: beta must be > 0");
    const UnitRows mapped = unit_rows(source.vectors * map.matrix);
    const UnitRows tgt = unit_rows(target.vectors);

    IsfPartition part;
    part.beta = beta;
    part.log_z = Vector::Zero(target.size());
    const Eigen::Index nt = tgt.rows.rows();
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t j0, std::size_t j1) {
        for (std::size_t j = j0; j < j1; ++j) {
            const Vector sims = mapped.rows * tgt.rows.row(static_cast<Eigen::Index>(j)).transpose();
            double max_s = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < sims.size(); ++i) {
                if (mapped.valid[static_cast<std::size_t>(i)]) max_s = std::max(max_s, beta * sims[i]);
            }
            double acc = 0.0;
            for (Eigen::Index i = 0; i < sims.size(); ++i) {
                if (mapped.valid[static_cast<std::size_t>(i)]) acc += std::exp(beta * sims[i] - max_s);
            }
            part.log_z[static_cast<Eigen::Index>(j)] = max_s + std::log(acc);
        }
    });
    return part;
}

double isf_score(const Vector& x_mapped, const Vector& y, double beta,
                 const IsfPartition& partition, int target_row) {
    if (beta <= 0.0) throw InputError("isf: beta must be > 0");
    if (beta != partition.beta) throw InputError("isf: beta differs from the partition cache");
    if (target_row < 0 || target_row >= partition.log_z.size()) {
        throw InputError("isf: partition does not cover the target word");
    }
    return std::exp(beta * cosine_sim(x_mapped, y) - partition.log_z[target_row]);
}

std::vector<CandidateList> generate_candidates(const std::vector<int>& source_rows,
                                               const AlignmentMap& map,
                                               const EmbeddingSpace& source,
                                               const EmbeddingSpace& target, int q,
                                               RetrievalCriterion criterion, int csls_k,
                                               double isf_beta,
                                               const NeighborhoodStats* stats,
                                               const IsfPartition* partition) {
    check_map(map, source, target);
    if (q < 1) throw InputError("generate_candidates: q must be >= 1");
    const UnitRows mapped = unit_rows(source.vectors * map.matrix);
    const UnitRows tgt = unit_rows(target.vectors);
    const int n_valid_targets =
        static_cast<int>(std::count(tgt.valid.begin(), tgt.valid.end(), 1));
    if (q > n_valid_targets) {
        throw InputError("generate_candidates: q exceeds the usable target vocabulary");
    }

    NeighborhoodStats local_stats;
    if (criterion == RetrievalCriterion::csls && !stats) {
        local_stats = compute_neighborhood_stats(map, source, target, csls_k);
        stats = &local_stats;
    }
    IsfPartition local_part;
    if (criterion == RetrievalCriterion::isf && !partition) {
        local_part = compute_isf_partition(map, source, target, isf_beta);
        partition = &local_part;
    }

    for (int s : source_rows) {
        if (s < 0 || s >= source.size()) throw InputError("candidate source row out of range");
    }

    std::vector<CandidateList> lists(source_rows.size());
    parallel_for(source_rows.size(), [&](std::size_t a, std::size_t bnd) {
        std::vector<int> order;
        for (std::size_t w = a; w < bnd; ++w) {
            const int s = source_rows[w];
            CandidateList& list = lists[w];
            list.source_row = s;
            list.source_word = source.words[s];
            Vector scores = tgt.rows * mapped.rows.row(s).transpose();
            switch (criterion) {
                case RetrievalCriterion::nn:
                    break;
                case RetrievalCriterion::csls:
                    for (Eigen::Index j = 0; j < scores.size(); ++j) {
                        scores[j] = csls_score(*stats, s, static_cast<int>(j), scores[j]);
                    }
                    break;
                case RetrievalCriterion::isf:
                    for (Eigen::Index j = 0; j < scores.size(); ++j) {
                        scores[j] = partition->beta * scores[j] - partition->log_z[j];
                    }
                    break;
            }
            order.clear();
            for (int j = 0; j < target.size(); ++j) {
                if (tgt.valid[static_cast<std::size_t>(j)]) order.push_back(j);
            }
            std::partial_sort(order.begin(), order.begin() + q, order.end(), [&](int x, int y) {
                if (scores[x] != scores[y]) return scores[x] > scores[y];
                return x < y;
            });
            list.candidates.reserve(static_cast<std::size_t>(q));
            for (int r = 0; r < q; ++r) {
                const int j = order[static_cast<std::size_t>(r)];
                double sc = scores[j];
                if (criterion == RetrievalCriterion::isf) sc = std::exp(sc);
                list.candidates.push_back({j, target.words[static_cast<std::size_t>(j)], sc});
            }
        }
    });
    return lists;
}

std::vector<std::vector<double>> extract_features(const CandidateList& list,
                                                  const AlignmentMap& map,
                                                  const EmbeddingSpace& source,
                                                  const EmbeddingSpace& target, int k_max,
                                                  const NeighborhoodBundle& bundle) {
    check_map(map, source, target);
    if (k_max < 0) throw InputError("extract_features: k_max must be >= 0");
    if (k_max > 0 && bundle.k_max < k_max) {
        throw InputError("extract_features: bundle does not cover k_max");
    }
    if (k_max > 0 && (bundle.src_topk.rows() != source.size() ||
                      bundle.tgt_topk.rows() != target.size())) {
        throw InputError("extract_features: bundle does not match the spaces");
    }
    if (list.source_row < 0 || list.source_row >= source.size()) {
        throw InputError("extract_features: source row out of range");
    }

    const Vector mapped_raw = (source.vectors.row(list.source_row) * map.matrix).transpose();
    const double mnorm = mapped_raw.norm();

    std::vector<NeighborhoodStats> stats;
    stats.reserve(static_cast<std::size_t>(k_max));
    for (int K = 1; K <= k_max; ++K) stats.push_back(bundle.stats_for(K));

    std::vector<std::vector<double>> features(list.candidates.size());
    for (std::size_t c = 0; c < list.candidates.size(); ++c) {
        const int j = list.candidates[c].target_row;
        const Vector y = target.vectors.row(j).transpose();
        const double ynorm = y.norm();
        const double cos =
            (mnorm == 0.0 || ynorm == 0.0) ? 0.0 : mapped_raw.dot(y) / (mnorm * ynorm);
        std::vector<double>& f = features[c];
        f.reserve(static_cast<std::size_t>(1 + k_max));
        f.push_back(cos);
        for (int K = 1; K <= k_max; ++K) {
            f.push_back(csls_score(stats[static_cast<std::size_t>(K - 1)], list.source_row, j, cos));
        }
    }
    return features;
}

std::vector<std::string> feature_names(int k_max) {
    std::vector<std::string> names{"cosine"};
    for (int K = 1; K <= k_max; ++K) names.push_back("csls_" + std::to_string(K));
    return names;
}

// --- file formats ---------------------------------------------------------------

void save_candidates_tsv(const std::vector<CandidateList>& lists, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write candidates file: " + path);
    for (const auto& list : lists) {
        out << list.source_word;
        for (const auto& c : list.candidates) {
            out << '\t' << c.token << '\t' << format_double(c.score);
        }
        out << '\n';
    }
}

std::vector<CandidateList> load_candidates_tsv(const std::string& path,
                                               const EmbeddingSpace& source,
                                               const EmbeddingSpace& target) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open candidates file: " + path);
    std::vector<CandidateList> lists;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                cells.push_back(line.substr(pos));
                break;
            }
            cells.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        if (cells.size() < 3 || cells.size() % 2 != 1) {
            throw InputError("malformed candidates line in " + path);
        }
        CandidateList list;
        list.source_word = cells[0];
        const auto srow = source.lookup(list.source_word);
        if (!srow) throw InputError("candidates file word not in source vocabulary: " + cells[0]);
        list.source_row = *srow;
        for (std::size_t i = 1; i + 1 < cells.size(); i += 2) {
            const auto trow = target.lookup(cells[i]);
            if (!trow) throw InputError("candidates file word not in target vocabulary: " + cells[i]);
            list.candidates.push_back({*trow, cells[i], std::stod(cells[i + 1])});
        }
        lists.push_back(std::move(list));
    }
    return lists;
}

void save_feature_csv(const std::vector<FeatureRecord>& records, int k_max,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write feature file: " + path);
    out << "query,candidate,label";
    for (const auto& name : feature_names(k_max)) out << ',' << name;
    out << '\n';
    for (const auto& rec : records) {
        if (rec.values.size() != static_cast<std::size_t>(k_max + 1)) {
            throw InputError("feature record width does not match k_max");
        }
        out << rec.query << ',' << rec.candidate << ',' << rec.label;
        for (double v : rec.values) out << ',' << format_double(v);
        out << '\n';
    }
}

std::vector<FeatureRecord> load_feature_csv(const std::string& path, int* k_max_out) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open feature file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty feature file: " + path);
    int columns = 1;
    for (char ch : line) {
        if (ch == ',') ++columns;
    }
    if (columns < 4) throw InputError("malformed feature header in " + path);
    const int width = columns - 3;
    if (k_max_out) *k_max_out = width - 1;

    std::vector<FeatureRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != columns) {
            throw InputError("malformed feature row in " + path);
        }
        FeatureRecord rec;
        rec.query = cells[0];
        rec.candidate = cells[1];
        rec.label = std::stoi(cells[2]);
        rec.values.reserve(static_cast<std::size_t>(width));
        for (int i = 3; i < columns; ++i) rec.values.push_back(std::stod(cells[static_cast<std::size_t>(i)]));
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace bli
