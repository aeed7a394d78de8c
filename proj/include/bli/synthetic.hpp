// Seeded generators for synthetic alignment instances with known ground
// truth: rotated/permuted copies of a base cloud, and a clustered cloud
// with a planted hub for neighbor-criterion comparisons.
#pragma once

#include "bli/common.hpp"
#include "bli/embeddings.hpp"
#include "bli/lexicon.hpp"

#include <string>
#include <vector>

namespace bli {

Matrix random_unit_cloud(int n, int d, Rng& rng);
Matrix random_orthogonal_matrix(int d, Rng& rng);

// Permutation that moves each index at most `window` positions, mimicking
// the rough frequency correlation of real bilingual vocabularies (the most
// frequent words translate to other frequent words). window >= n gives a
// fully random permutation.
std::vector<int> banded_permutation(int n, int window, Rng& rng);

struct SyntheticPairConfig {
    int n = 2000;
    int d = 50;
    double noise_sigma = 0.0;
    int permutation_window = 50;
    std::uint64_t seed = 0;
};

// Target rows are target.row(perm[i]) = rotate(base.row(i)) + noise; the
// gold dictionary maps source word i to target word perm[i]. Both spaces
// are l2-normalized.
struct SyntheticPair {
    EmbeddingSpace source;
    EmbeddingSpace target;
    std::vector<int> target_row_of_source;  // ground-truth permutation
    Matrix rotation;                        // source -> target, before noise
    Lexicon gold;
};

SyntheticPair make_synthetic_pair(const SyntheticPairConfig& cfg,
                                  const std::string& src_tag = "src",
                                  const std::string& tgt_tag = "tgt");

// Views of one base cloud with independent rotations, banded permutations
// and noise; gold dictionaries against A. The second pivot c2 supports
// pivot-stability experiments on a fixed A-B pair.
struct SyntheticTriple {
    EmbeddingSpace a;
    EmbeddingSpace b;
    EmbeddingSpace c;
    EmbeddingSpace c2;
    Lexicon gold_ab;
    Lexicon gold_ac;
    Lexicon gold_ac2;
};

SyntheticTriple make_synthetic_triple(const SyntheticPairConfig& cfg);

// Correlated cloud around a common direction with the hub planted exactly
// on it. Source and target are independent draws of the same process plus
// the hub row appended to the target.
struct HubCloud {
    EmbeddingSpace source;
    EmbeddingSpace target;
    int hub_row = -1;
};

HubCloud make_hub_cloud(int n, int d, double concentration, std::uint64_t seed);

}  // namespace bli
