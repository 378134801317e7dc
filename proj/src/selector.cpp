#include "owc/selector.hpp"

#include <stdexcept>

namespace owc {

void SelectorBank::validate() const
{
    validate_template_pair(lds, hds, l_cp);
    for (const auto& n : nets)
        if (n.arch_tag != nets[0].arch_tag)
            throw std::invalid_argument("branch networks have different architectures");
}

std::vector<double> estimate_cir_magnitudes(std::span<const cd> h_dnn, int l_cp)
{
    if (l_cp < 1 || l_cp >= static_cast<int>(h_dnn.size()))
        throw std::invalid_argument("estimate_cir_magnitudes: l_cp must lie in [1, n_f)");
    const CVec h = ifft(h_dnn);
    std::vector<double> mags(static_cast<size_t>(l_cp));
    for (int i = 1; i <= l_cp; ++i)
        mags[static_cast<size_t>(i - 1)] = std::abs(h[static_cast<size_t>(i)]);
    return mags;
}

DelayClass classify(std::span<const double> tail_magnitudes, const SelectorBank& bank)
{
    return classify_tail(tail_magnitudes, bank.lds, bank.hds);
}

AdaptiveResult adaptive_estimate(const PilotLs& pilot_ls, const SelectorBank& bank)
{
    AdaptiveResult r;
    r.h_hds = nn::forward(bank.net(DelayClass::HDS), pilot_ls);
    r.forward_passes = 1;
    r.decision = classify(estimate_cir_magnitudes(r.h_hds, bank.l_cp), bank);
    if (r.decision == DelayClass::HDS) {
        r.h_est = r.h_hds;
        return r;
    }
    r.h_est = nn::forward(bank.net(r.decision), pilot_ls);
    r.forward_passes = 2;
    r.reran = true;
    return r;
}

} // namespace owc
