#pragma once

// Metrics and the three Monte Carlo experiments (NMSE over SNR, NMSE over a
// class-switching time trace, BER over SNR). Every run is a pure function of
// its configuration and seed.

#include "owc/config.hpp"
#include "owc/estimators.hpp"
#include "owc/selector.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace owc {

/// ||est - truth||^2 / ||truth||^2.
double nmse(std::span<const cd> est, std::span<const cd> truth);

/// Fraction of differing bits.
double ber(std::span<const std::uint8_t> rx, std::span<const std::uint8_t> tx);

enum class Estimator { LS, MMSE, HdsOnly, Adaptive, Direct, Flat };

std::string_view to_string(Estimator e);
std::optional<Estimator> parse_estimator(std::string_view s);

/// Trained artefacts an experiment may need; each estimator checks for its own.
struct Models {
    std::optional<CorrelationSet> corr;
    std::optional<SelectorBank> bank;
};

/// Correlations of the slot response over `count` unconditioned realizations.
CorrelationSet build_correlations(const SimConfig& sim, std::uint64_t count, std::uint64_t seed);

struct SnrGrid {
    double min_db = 15.0;
    double max_db = 30.0;
    double step_db = 1.0;

    std::vector<double> points() const;
};

struct ExperimentConfig {
    SimConfig sim;
    SnrGrid snr;
    int trials = 100;
    std::uint64_t seed = 1;
    std::vector<Estimator> estimators{Estimator::LS, Estimator::MMSE, Estimator::HdsOnly,
                                      Estimator::Adaptive};

    // Time trace
    int duration_s = 90;
    int dwell_s = 10;
    double trace_snr_db = 20.0;

    void validate() const;
};

/// Every estimator's channel estimate for one received slot.
class EstimatorSuite {
public:
    EstimatorSuite(const SimConfig& sim, const Models& models, std::span<const Estimator> wanted);

    /// Estimates in the order of `wanted`; `adaptive_passes` receives the
    /// forward-pass count of the adaptive estimator when it ran.
    std::vector<CVec> estimate(const SlotRun& run, int* adaptive_passes = nullptr) const;

private:
    const SimConfig& sim_;
    const Models& models_;
    std::vector<Estimator> wanted_;
    PilotPattern pattern_;
};

struct NmseSnrRow {
    double snr_db = 0.0;
    Estimator estimator = Estimator::LS;
    double nmse_mean = 0.0;
    double nmse_stderr = 0.0;
    int trials = 0;
};

std::vector<NmseSnrRow> run_nmse_vs_snr(const ExperimentConfig& cfg, const Models& models);
void write_csv(std::ostream& out, std::span<const NmseSnrRow> rows, std::uint64_t seed);

struct NmseTimeRow {
    int t_s = 0;
    DelayClass active_class = DelayClass::LDS;
    Estimator estimator = Estimator::LS;
    double nmse_mean = 0.0;
};

struct TraceSummary {
    Estimator estimator = Estimator::LS;
    double mean = 0.0;
    double variance = 0.0; // across the trace points
};

struct NmseTimeResult {
    std::vector<NmseTimeRow> rows;
    std::vector<TraceSummary> summary;
};

/// `trials` class-conditioned realizations per one-second point; the active
/// class cycles LDS, MDS, HDS every dwell_s seconds.
NmseTimeResult run_nmse_vs_time(const ExperimentConfig& cfg, const Models& models);
void write_csv(std::ostream& out, std::span<const NmseTimeRow> rows);

struct BerRow {
    double snr_db = 0.0;
    Estimator estimator = Estimator::LS;
    double ber = 0.0;
    std::uint64_t bits_counted = 0;
};

std::vector<BerRow> run_ber_vs_snr(const ExperimentConfig& cfg, const Models& models);
void write_csv(std::ostream& out, std::span<const BerRow> rows);

} // namespace owc
