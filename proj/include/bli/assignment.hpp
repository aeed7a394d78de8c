// Exact solver for the square linear assignment problem. Used as the inner
// step of the stochastic alignment loop, where the batch cost matrix is the
// negated dot-product matrix between mapped source and target batches.
#pragma once

#include "bli/common.hpp"

namespace bli {

enum class AssignDirection { minimize, maximize };

// mapping[i] is the column assigned to row i; always a bijection on 0..n-1.
struct Permutation {
    std::vector<int> mapping;

    int size() const { return static_cast<int>(mapping.size()); }
    bool is_valid() const;
    Permutation inverse() const;
};

// Finds the permutation optimizing sum_i cost(i, mapping[i]) exactly, via
// shortest augmenting paths with dual potentials (Jonker-Volgenant flavour
// of the Hungarian method, O(n^3)). Rows are augmented in increasing index
// order and column scans break ties on the lowest index, so the result is
// deterministic. Throws InputError on a non-square or non-finite matrix.
Permutation solve_assignment(const Matrix& cost,
                             AssignDirection direction = AssignDirection::minimize);

// sum_i cost(i, mapping[i]); throws InputError on dimension mismatch.
double assignment_value(const Matrix& cost, const Permutation& perm);

}  // namespace bli
