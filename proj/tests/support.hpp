#pragma once

// Shared test oracles. Everything here is computed independently of the
// library's own transforms (plain O(N^2) sums, explicit loops).

#include "owc/dft.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>

namespace testing {

using owc::cd;
using owc::CVec;

inline CVec naive_dft(const CVec& x, int sign)
{
    const auto n = x.size();
    CVec out(n);
    for (size_t k = 0; k < n; ++k) {
        cd acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k * i % n) /
                               static_cast<double>(n);
            acc += x[i] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline CVec naive_fft(const CVec& x) { return naive_dft(x, -1); }

inline CVec naive_ifft(const CVec& x)
{
    CVec out = naive_dft(x, +1);
    for (auto& v : out)
        v /= static_cast<double>(x.size());
    return out;
}

inline double energy(const CVec& x)
{
    double e = 0.0;
    for (const auto& v : x)
        e += std::norm(v);
    return e;
}

/// max |a - b| / max |b|
inline double rel_diff(const CVec& a, const CVec& b)
{
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    if (a.size() != b.size())
        return INFINITY;
    return den > 0.0 ? num / den : num;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("owc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace testing
