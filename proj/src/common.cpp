#include "bli/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace bli {

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw InputError("uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

double Rng::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1, u2;
    do {
        u1 = next_double();
    } while (u1 <= 0.0);
    u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::vector<int> Rng::sample_distinct(int n, int k) {
    if (k > n) throw InputError("sample_distinct: k exceeds population size");
    // Partial Fisher-Yates on a scratch identity permutation, undone after
    // the draw so repeated calls stay O(k) after the first.
    static thread_local std::vector<int> scratch;
    if (static_cast<int>(scratch.size()) < n) {
        scratch.resize(n);
        for (int i = 0; i < n; ++i) scratch[i] = i;
    } else {
        for (int i = 0; i < n; ++i) scratch[i] = i;
    }
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(uniform_index(static_cast<std::size_t>(n - i)));
        std::swap(scratch[i], scratch[j]);
        out[i] = scratch[i];
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint64_t w : {a, b, c}) {
        for (int i = 0; i < 8; ++i) {
            h ^= (w >> (8 * i)) & 0xff;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

namespace {
std::atomic<int> g_worker_cap{0};
}

void set_worker_count(int workers) { g_worker_cap.store(workers < 0 ? 0 : workers); }

int worker_count() {
    const int cap = g_worker_cap.load();
    if (cap > 0) return cap;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = static_cast<std::size_t>(worker_count());
    if (workers > n) workers = n;
    if (workers <= 1 || (g_worker_cap.load() == 0 && n < 256)) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end);
    }
    for (auto& t : pool) t.join();
}

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool is_finite(const Matrix& m) {
    return m.allFinite();
}

}  // namespace bli
