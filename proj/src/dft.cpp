#include "owc/dft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace owc {
namespace {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// Plans are created with FFTW_ESTIMATE against scratch buffers and executed
// through the new-array interface, so one plan per (size, sign) serves all callers.
class PlanCache {
public:
    fftw_plan get(int n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end())
            return it->second.get();
        auto* in = fftw_alloc_complex(static_cast<size_t>(n));
        auto* out = fftw_alloc_complex(static_cast<size_t>(n));
        fftw_plan p = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, Plan(p));
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, Plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

CVec run(std::span<const cd> x, int sign)
{
    CVec in(x.begin(), x.end());
    CVec out(x.size());
    if (x.empty())
        return out;
    fftw_plan p = cache().get(static_cast<int>(x.size()), sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace

CVec fft(std::span<const cd> x) { return run(x, FFTW_FORWARD); }

CVec ifft(std::span<const cd> x)
{
    CVec out = run(x, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : out)
        v *= scale;
    return out;
}

} // namespace owc
