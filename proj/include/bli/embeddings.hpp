// Loading, normalization and indexing of monolingual word-embedding files
// (fastText text .vec format, optionally gzip-compressed).
#pragma once

#include "bli/common.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace bli {

enum class NormMode { raw, l2, center_l2 };

std::string norm_mode_name(NormMode m);

struct LoadReport {
    std::size_t rows_seen = 0;        // data lines inspected (before truncation)
    std::size_t duplicates_skipped = 0;
    std::size_t bad_rows_skipped = 0; // wrong coordinate count
};

struct NormalizeReport {
    std::vector<int> zero_rows;       // rows left at zero norm, indices
};

// One language's vocabulary plus its n x d coordinate matrix. Row order is
// file order, which for fastText files is frequency order. Immutable after
// construction; safe to share across threads.
struct EmbeddingSpace {
    std::vector<std::string> words;
    Matrix vectors;                   // n x d, row i belongs to words[i]
    std::string lang_tag;
    NormMode normalized = NormMode::raw;

    int size() const { return static_cast<int>(words.size()); }
    int dim() const { return static_cast<int>(vectors.cols()); }

    // Exact-match, case-sensitive lookup.
    std::optional<int> lookup(const std::string& token) const;

    // Row indices whose vector has zero norm (excluded from neighbor
    // statistics but kept in the matrix so indices stay stable).
    std::vector<int> zero_rows() const;

    void rebuild_index();

private:
    std::unordered_map<std::string, int> index_;
};

// Reads the first min(n, max_vocab) unique tokens of a .vec file
// (header "n d", then "token c1 ... cd"). Files ending in .gz are
// decompressed on the fly. Duplicate tokens keep the first occurrence.
// Throws InputError on malformed header, non-finite coordinates, or when
// more than 1% of inspected rows have the wrong coordinate count.
EmbeddingSpace load_embeddings(const std::string& path, std::size_t max_vocab,
                               const std::string& lang_tag = "",
                               LoadReport* report = nullptr);

// Writes the space back in .vec text format (plain, never gzipped).
void save_embeddings(const EmbeddingSpace& space, const std::string& path);

// l2: scale each row to unit norm. center_l2: subtract the column mean
// first, then scale. Zero-norm rows are left at zero and reported.
// Requires a raw space; repeated normalization is a caller bug.
EmbeddingSpace normalize(const EmbeddingSpace& space, NormMode mode,
                         NormalizeReport* report = nullptr);

}  // namespace bli
