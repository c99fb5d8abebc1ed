#include "lenstp/sampling.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace lenstp {

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

namespace {
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
} // namespace

std::vector<CVec> sphere_sample(int n, int count, std::uint64_t seed) {
    if (n < 1 || 2 * n > static_cast<int>(std::size(kPrimes)))
        throw std::invalid_argument("sphere_sample: unsupported dimension");
    if (count < 1) throw std::invalid_argument("sphere_sample: count must be positive");
    // Skip the early (strongly correlated) Halton prefix; fold the seed in
    // as an additional index offset.
    const std::uint64_t offset = 64 + (seed % 100003ULL);
    std::vector<CVec> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i) {
        CVec z(n);
        for (int p = 0; p < n; ++p) {
            const double u =
                std::max(halton(offset + static_cast<std::uint64_t>(i), kPrimes[2 * p]), 1e-12);
            const double v = halton(offset + static_cast<std::uint64_t>(i), kPrimes[2 * p + 1]);
            const double r = std::sqrt(-2.0 * std::log(u));
            const double a = 2.0 * std::numbers::pi * v;
            z[p] = Complex(r * std::cos(a), r * std::sin(a));
        }
        pts.push_back(normalized(z));
    }
    return pts;
}

std::vector<double> tau_grid(int count) {
    if (count < 1) throw std::invalid_argument("tau_grid: count must be positive");
    std::vector<double> taus(count);
    for (int i = 0; i < count; ++i) taus[i] = (i + 0.5) / count;
    return taus;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads < 1) threads = 1;
    if (threads == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(threads, count);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace lenstp
