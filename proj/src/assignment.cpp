#include "bli/assignment.hpp"

#include <limits>

namespace bli {

bool Permutation::is_valid() const {
    const int n = size();
    std::vector<char> hit(n, 0);
    for (int c : mapping) {
        if (c < 0 || c >= n || hit[c]) return false;
        hit[c] = 1;
    }
    return true;
}

Permutation Permutation::inverse() const {
    Permutation inv;
    inv.mapping.assign(mapping.size(), -1);
    for (int i = 0; i < size(); ++i) inv.mapping[mapping[i]] = i;
    return inv;
}

Permutation solve_assignment(const Matrix& cost, AssignDirection direction) {
    if (cost.rows() != cost.cols()) throw InputError("solve_assignment: cost matrix must be square");
    if (!cost.allFinite()) throw InputError("solve_assignment: cost matrix has non-finite entries");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return Permutation{};

    const double sign = (direction == AssignDirection::maximize) ? -1.0 : 1.0;
    const double inf = std::numeric_limits<double>::infinity();

    // Dual potentials u (rows) and v (columns); p[j] is the row matched to
    // column j. Index 0 is a virtual column, real columns are 1..n.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = sign * cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        // Augment along the found alternating path.
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Permutation perm;
    perm.mapping.assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) perm.mapping[p[j] - 1] = j - 1;
    }
    return perm;
}

double assignment_value(const Matrix& cost, const Permutation& perm) {
    if (cost.rows() != cost.cols() || perm.size() != static_cast<int>(cost.rows())) {
        throw InputError("assignment_value: dimension mismatch");
    }
    double total = 0.0;
    for (int i = 0; i < perm.size(); ++i) total += cost(i, perm.mapping[i]);
    return total;
}

}  // namespace bli
