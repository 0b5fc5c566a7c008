#include "chromalint/common.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace chromalint {

std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::array<double, 2> Quad::centroid() const {
    double cx = 0.0, cy = 0.0;
    for (const auto& p : pts) {
        cx += p[0];
        cy += p[1];
    }
    return {cx / 4.0, cy / 4.0};
}

Quad Quad::shrunk(double inset) const {
    auto c = centroid();
    Quad out;
    for (int i = 0; i < 4; ++i) {
        out.pts[i][0] = c[0] + (pts[i][0] - c[0]) * (1.0 - inset);
        out.pts[i][1] = c[1] + (pts[i][1] - c[1]) * (1.0 - inset);
    }
    return out;
}

bool Quad::contains(double x, double y) const {
    // Consistent cross-product sign across all edges (boundary counts as in).
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % 4];
        double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (cross > 0.0) {
            if (sign < 0) return false;
            sign = 1;
        } else if (cross < 0.0) {
            if (sign > 0) return false;
            sign = -1;
        }
    }
    return true;
}

bool Quad::is_convex() const {
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % 4];
        const auto& c = pts[(i + 2) % 4];
        double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (cross > 0.0) {
            if (sign < 0) return false;
            sign = 1;
        } else if (cross < 0.0) {
            if (sign > 0) return false;
            sign = -1;
        }
    }
    return sign != 0;
}

bool Quad::within_bounds(int width, int height) const {
    for (const auto& p : pts)
        if (p[0] < 0.0 || p[1] < 0.0 || p[0] > width || p[1] > height) return false;
    return true;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = jobs > 1 ? std::min<std::size_t>(static_cast<std::size_t>(jobs), n) : 1;
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> counter{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = counter.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace chromalint
