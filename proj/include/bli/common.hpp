// Shared numeric types, deterministic RNG and small utilities used across
// the toolkit. Everything here is seed-reproducible: no std:: distribution
// objects, no unordered iteration feeding into numeric results.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bli {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Input problems (bad files, bad arguments). CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (divergence, non-finite values). CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic splitmix64-based generator. Identical sequences on every
// platform and standard library, which the reproducibility contract of the
// CLI relies on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::size_t uniform_index(std::size_t n);

    // Standard normal via Box-Muller (one spare cached).
    double next_gaussian();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<int> sample_distinct(int n, int k);

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Mixes several integers into one seed (FNV-1a over the words).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one chunk per
// worker. Chunks are disjoint, so callers writing only to their own output
// slots get results independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Caps the parallel_for worker count; 0 restores the hardware default.
void set_worker_count(int workers);
int worker_count();

// Locale-independent float formatting with enough digits to round-trip.
std::string format_double(double v);

bool is_finite(const Matrix& m);

}  // namespace bli
