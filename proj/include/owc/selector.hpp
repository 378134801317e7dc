#pragma once

// Delay-spread-adaptive estimation: pre-estimate with the HDS network, read the
// tail of the implied impulse response, and rerun with the LDS or MDS network
// when the tail sits below the corresponding template.

#include "owc/channel.hpp"
#include "owc/nn.hpp"

#include <array>
#include <span>
#include <vector>

namespace owc {

struct SelectorBank {
    std::array<nn::ModelWeights, 3> nets; // indexed by DelayClass
    PdpTemplate lds;
    PdpTemplate hds;
    int l_cp = 7;

    /// Checks hds.tail(i) > lds.tail(i) for every tail tap and that the three
    /// networks share one architecture.
    void validate() const;

    const nn::ModelWeights& net(DelayClass c) const { return nets[static_cast<size_t>(c)]; }
};

/// |h(1)| .. |h(l_cp)| of the inverse DFT of h_dnn (tap 0 excluded).
std::vector<double> estimate_cir_magnitudes(std::span<const cd> h_dnn, int l_cp);

DelayClass classify(std::span<const double> tail_magnitudes, const SelectorBank& bank);

struct AdaptiveResult {
    CVec h_est;
    DelayClass decision = DelayClass::HDS;
    bool reran = false;
    int forward_passes = 0;
    CVec h_hds; // the HDS pre-estimate, kept for single-network baselines
};

AdaptiveResult adaptive_estimate(const PilotLs& pilot_ls, const SelectorBank& bank);

} // namespace owc
