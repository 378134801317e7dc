#pragma once

// Class-conditioned training corpora and their on-disk format (docs/dataset_format.md).

#include "owc/channel.hpp"
#include "owc/estimators.hpp"
#include "owc/modem.hpp"
#include "owc/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace owc {

class RejectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kRejectionCap = 10000;

/// Draws realizations until the label matches. Attempt 0 uses `seed` itself,
/// attempt a > 0 uses derive_seed(seed, a).
ChannelRealization rejection_sample_class(const ScenarioConfig& cfg, const ModemConfig& modem,
                                          const PdpTemplate& lds, const PdpTemplate& hds,
                                          DelayClass cls, std::uint64_t seed,
                                          int* attempts_used = nullptr);

inline constexpr std::uint8_t kMixedClassTag = 3;
inline constexpr std::uint16_t kDatasetVersion = 1;

struct DatasetHeader {
    std::uint16_t version = kDatasetVersion;
    std::uint8_t class_tag = kMixedClassTag; // DelayClass value or kMixedClassTag
    std::uint64_t count = 0;
    std::uint32_t n_f = 0;
    std::uint32_t n_pilots = 0;
    std::uint32_t n_pilot_symbols = 0;
    double snr_min = 0.0;
    double snr_max = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const DatasetHeader&) const = default;
};

struct DatasetRecord {
    nn::TrainPair pair;
    DelayClass label = DelayClass::LDS;
    float snr_db = 0.0f;
};

struct Dataset {
    DatasetHeader header;
    std::vector<DatasetRecord> records;

    std::vector<nn::TrainPair> pairs() const;
};

struct DatasetSpec {
    std::optional<DelayClass> cls; // nullopt = unconditioned (MIXED)
    std::uint64_t count = 0;
    double snr_min = 15.0;
    double snr_max = 30.0; // snr_min == snr_max == +inf gives noiseless samples
    std::uint64_t seed = 1;
};

/// One record: class-conditioned realization, one slot through the link at a
/// uniformly drawn SNR, LS pilot observations and the slot response as target.
/// Deterministic in (spec.seed, index).
DatasetRecord make_record(const ScenarioConfig& cfg, const ModemConfig& modem,
                          const PdpTemplate& lds, const PdpTemplate& hds, const DatasetSpec& spec,
                          std::uint64_t index);

Dataset generate_dataset(const ScenarioConfig& cfg, const ModemConfig& modem,
                         const PdpTemplate& lds, const PdpTemplate& hds, const DatasetSpec& spec);

std::string encode_dataset(const Dataset& d);
Dataset decode_dataset(const std::string& bytes, const std::string& what = "dataset");

/// Generates and writes atomically; returns the header written.
DatasetHeader generate_dataset_file(const ScenarioConfig& cfg, const ModemConfig& modem,
                                    const PdpTemplate& lds, const PdpTemplate& hds,
                                    const DatasetSpec& spec, const std::filesystem::path& path);

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Seeded permutation, then a contiguous split with floor(ratio * N) training
/// indices. The two index lists are disjoint and together cover 0..N-1.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n, double ratio, std::uint64_t seed);

std::pair<std::vector<nn::TrainPair>, std::vector<nn::TrainPair>>
split_dataset(const Dataset& d, double ratio, std::uint64_t seed);

} // namespace owc
