#include "owc/experiments.hpp"

#include "owc/dataset.hpp"
#include "owc/rng.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace owc {

double nmse(std::span<const cd> est, std::span<const cd> truth)
{
    if (est.size() != truth.size())
        throw std::invalid_argument("nmse: estimate and truth differ in length");
    double err = 0.0;
    double ref = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
        err += std::norm(est[i] - truth[i]);
        ref += std::norm(truth[i]);
    }
    if (!(ref > 0.0))
        throw std::domain_error("nmse: true channel has zero energy");
    return err / ref;
}

double ber(std::span<const std::uint8_t> rx, std::span<const std::uint8_t> tx)
{
    if (rx.size() != tx.size())
        throw std::invalid_argument("ber: bit vectors differ in length");
    if (tx.empty())
        throw std::invalid_argument("ber: no bits");
    std::size_t diff = 0;
    for (size_t i = 0; i < tx.size(); ++i)
        diff += (rx[i] != 0) != (tx[i] != 0);
    return static_cast<double>(diff) / static_cast<double>(tx.size());
}

namespace {

constexpr std::array<std::pair<Estimator, std::string_view>, 6> kEstimatorNames{{
    {Estimator::LS, "ls"},
    {Estimator::MMSE, "mmse"},
    {Estimator::HdsOnly, "hds_only"},
    {Estimator::Adaptive, "adaptive"},
    {Estimator::Direct, "direct"},
    {Estimator::Flat, "flat"},
}};

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct RunningMean {
    double sum = 0.0;
    double sum_sq = 0.0;
    long n = 0;

    void add(double v)
    {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double stderr_of_mean() const
    {
        if (n < 2)
            return 0.0;
        const double m = mean();
        const double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    }
};

} // namespace

std::string_view to_string(Estimator e)
{
    for (const auto& [k, name] : kEstimatorNames)
        if (k == e)
            return name;
    return "?";
}

std::optional<Estimator> parse_estimator(std::string_view s)
{
    for (const auto& [k, name] : kEstimatorNames)
        if (name == s)
            return k;
    return std::nullopt;
}

CorrelationSet build_correlations(const SimConfig& sim, std::uint64_t count, std::uint64_t seed)
{
    if (count < 1)
        throw std::invalid_argument("correlation corpus needs at least one realization");
    std::vector<ChannelRealization> corpus;
    corpus.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        corpus.push_back(sample_realization(sim.scenario, derive_seed(seed, stream::channel, i)));
    return estimate_correlations(corpus, PilotPattern::make(sim.modem), sim.modem.n_f,
                                 sim.modem.l_cp);
}

std::vector<double> SnrGrid::points() const
{
    if (!(step_db > 0.0) || !(max_db >= min_db) || !std::isfinite(min_db) || !std::isfinite(max_db))
        throw std::invalid_argument("SNR grid needs finite min <= max and a positive step");
    std::vector<double> out;
    // Integer stepping avoids accumulated floating-point drift in the grid.
    const long n = static_cast<long>(std::floor((max_db - min_db) / step_db + 1e-9));
    for (long i = 0; i <= n; ++i)
        out.push_back(min_db + static_cast<double>(i) * step_db);
    return out;
}

void ExperimentConfig::validate() const
{
    sim.validate();
    (void)snr.points();
    if (trials < 1)
        throw std::invalid_argument("trials must be >= 1");
    if (estimators.empty())
        throw std::invalid_argument("at least one estimator is required");
    if (duration_s < 1 || dwell_s < 1)
        throw std::invalid_argument("time trace duration and dwell must be >= 1 s");
}

EstimatorSuite::EstimatorSuite(const SimConfig& sim, const Models& models,
                               std::span<const Estimator> wanted)
    : sim_(sim), models_(models), wanted_(wanted.begin(), wanted.end()),
      pattern_(PilotPattern::make(sim.modem))
{
    for (Estimator e : wanted_) {
        if (e == Estimator::MMSE && !models_.corr)
            throw std::invalid_argument("estimator mmse needs a correlation file");
        if ((e == Estimator::HdsOnly || e == Estimator::Adaptive) && !models_.bank)
            throw std::invalid_argument("estimator " + std::string(to_string(e)) +
                                        " needs trained network weights");
    }
    if (models_.bank)
        models_.bank->validate();
}

std::vector<CVec> EstimatorSuite::estimate(const SlotRun& run, int* adaptive_passes) const
{
    const int n_f = sim_.modem.n_f;
    const PilotLs grid = ls_pilot_grid(run.rx, pattern_);
    const CVec h_ls = grid.symbol_average();

    std::optional<AdaptiveResult> adaptive;
    auto get_adaptive = [&]() -> const AdaptiveResult& {
        if (!adaptive) {
            adaptive = adaptive_estimate(grid, *models_.bank);
            if (adaptive_passes)
                *adaptive_passes = adaptive->forward_passes;
        }
        return *adaptive;
    };

    std::vector<CVec> out;
    out.reserve(wanted_.size());
    for (Estimator e : wanted_) {
        switch (e) {
        case Estimator::LS:
            out.push_back(ls_interpolate(h_ls, pattern_, n_f));
            break;
        case Estimator::MMSE:
            out.push_back(
                mmse_estimate(h_ls, *models_.corr, ls_noise_variance(run.tone_var, pattern_)));
            break;
        case Estimator::HdsOnly:
            // The adaptive estimator's first pass is exactly the HDS network.
            out.push_back(get_adaptive().h_hds);
            break;
        case Estimator::Adaptive:
            out.push_back(get_adaptive().h_est);
            break;
        case Estimator::Direct:
            out.push_back(CVec(static_cast<size_t>(n_f), cd(1.0, 0.0)));
            break;
        case Estimator::Flat: {
            const cd g = direct_detection_gain(run.rx, pattern_);
            CVec h(static_cast<size_t>(n_f), g);
            for (int k = n_f / 2 + 1; k < n_f; ++k)
                h[static_cast<size_t>(k)] = std::conj(g);
            out.push_back(std::move(h));
            break;
        }
        }
    }
    return out;
}

std::vector<NmseSnrRow> run_nmse_vs_snr(const ExperimentConfig& cfg, const Models& models)
{
    cfg.validate();
    const auto snrs = cfg.snr.points();
    const EstimatorSuite suite(cfg.sim, models, cfg.estimators);
    const PilotPattern pattern = PilotPattern::make(cfg.sim.modem);
    const size_t n_est = cfg.estimators.size();

    std::vector<RunningMean> acc(snrs.size() * n_est);
    for (int t = 0; t < cfg.trials; ++t) {
        const auto trial = static_cast<std::uint64_t>(t);
        // One channel per trial, reused at every SNR point.
        const ChannelRealization ch =
            sample_realization(cfg.sim.scenario, derive_seed(cfg.seed, stream::channel, trial));
        const std::uint64_t slot_base = derive_seed(cfg.seed, stream::noise, trial);
        for (size_t i = 0; i < snrs.size(); ++i) {
            const SlotRun run = run_slot(ch, pattern, cfg.sim.modem, snrs[i], derive_seed(slot_base, i));
            const auto est = suite.estimate(run);
            for (size_t e = 0; e < n_est; ++e)
                acc[i * n_est + e].add(nmse(est[e], run.true_h));
        }
    }

    std::vector<NmseSnrRow> rows;
    for (size_t i = 0; i < snrs.size(); ++i)
        for (size_t e = 0; e < n_est; ++e) {
            const auto& a = acc[i * n_est + e];
            rows.push_back({snrs[i], cfg.estimators[e], a.mean(), a.stderr_of_mean(), cfg.trials});
        }
    return rows;
}

void write_csv(std::ostream& out, std::span<const NmseSnrRow> rows, std::uint64_t seed)
{
    out << "snr_db,estimator,nmse_mean,nmse_stderr,trials,seed\n";
    for (const auto& r : rows)
        out << num(r.snr_db) << ',' << to_string(r.estimator) << ',' << num(r.nmse_mean) << ','
            << num(r.nmse_stderr) << ',' << r.trials << ',' << seed << '\n';
}

NmseTimeResult run_nmse_vs_time(const ExperimentConfig& cfg, const Models& models)
{
    cfg.validate();
    const EstimatorSuite suite(cfg.sim, models, cfg.estimators);
    const PilotPattern pattern = PilotPattern::make(cfg.sim.modem);
    const size_t n_est = cfg.estimators.size();
    constexpr std::array<DelayClass, 3> kSchedule{DelayClass::LDS, DelayClass::MDS,
                                                  DelayClass::HDS};

    NmseTimeResult res;
    std::vector<RunningMean> trace(n_est);
    std::vector<double> trace_sq(n_est, 0.0);
    for (int t = 0; t < cfg.duration_s; ++t) {
        const DelayClass cls = kSchedule[static_cast<size_t>((t / cfg.dwell_s) % 3)];
        std::vector<RunningMean> acc(n_est);
        for (int r = 0; r < cfg.trials; ++r) {
            const auto idx = static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(cfg.trials) +
                             static_cast<std::uint64_t>(r);
            const ChannelRealization ch = rejection_sample_class(
                cfg.sim.scenario, cfg.sim.modem, cfg.sim.lds, cfg.sim.hds, cls,
                derive_seed(cfg.seed, stream::channel, idx));
            const SlotRun run = run_slot(ch, pattern, cfg.sim.modem, cfg.trace_snr_db,
                                         derive_seed(cfg.seed, stream::noise, idx));
            const auto est = suite.estimate(run);
            for (size_t e = 0; e < n_est; ++e)
                acc[e].add(nmse(est[e], run.true_h));
        }
        for (size_t e = 0; e < n_est; ++e) {
            const double m = acc[e].mean();
            res.rows.push_back({t, cls, cfg.estimators[e], m});
            trace[e].add(m);
            trace_sq[e] += m * m;
        }
    }
    for (size_t e = 0; e < n_est; ++e) {
        const double m = trace[e].mean();
        const double n = static_cast<double>(trace[e].n);
        res.summary.push_back({cfg.estimators[e], m, std::max(trace_sq[e] / n - m * m, 0.0)});
    }
    return res;
}

void write_csv(std::ostream& out, std::span<const NmseTimeRow> rows)
{
    out << "t_s,active_class,estimator,nmse_mean\n";
    for (const auto& r : rows)
        out << r.t_s << ',' << to_string(r.active_class) << ',' << to_string(r.estimator) << ','
            << num(r.nmse_mean) << '\n';
}

std::vector<BerRow> run_ber_vs_snr(const ExperimentConfig& cfg, const Models& models)
{
    cfg.validate();
    const auto snrs = cfg.snr.points();
    const EstimatorSuite suite(cfg.sim, models, cfg.estimators);
    const PilotPattern pattern = PilotPattern::make(cfg.sim.modem);
    const size_t n_est = cfg.estimators.size();

    std::vector<std::uint64_t> errors(snrs.size() * n_est, 0);
    std::uint64_t bits_per_point = 0;
    for (int t = 0; t < cfg.trials; ++t) {
        const auto trial = static_cast<std::uint64_t>(t);
        const ChannelRealization ch =
            sample_realization(cfg.sim.scenario, derive_seed(cfg.seed, stream::channel, trial));
        const std::uint64_t slot_base = derive_seed(cfg.seed, stream::noise, trial);
        for (size_t i = 0; i < snrs.size(); ++i) {
            const SlotRun run = run_slot(ch, pattern, cfg.sim.modem, snrs[i], derive_seed(slot_base, i));
            const auto est = suite.estimate(run);
            for (size_t e = 0; e < n_est; ++e) {
                const Bits rx = equalize_and_decode(run.rx, est[e], pattern, cfg.sim.modem);
                errors[i * n_est + e] +=
                    static_cast<std::uint64_t>(std::llround(ber(rx, run.bits) * static_cast<double>(rx.size())));
            }
        }
        bits_per_point += static_cast<std::uint64_t>(cfg.sim.modem.bits_per_slot());
    }

    std::vector<BerRow> rows;
    for (size_t i = 0; i < snrs.size(); ++i)
        for (size_t e = 0; e < n_est; ++e)
            rows.push_back({snrs[i], cfg.estimators[e],
                            static_cast<double>(errors[i * n_est + e]) /
                                static_cast<double>(bits_per_point),
                            bits_per_point});
    return rows;
}

void write_csv(std::ostream& out, std::span<const BerRow> rows)
{
    out << "snr_db,estimator,ber,bits_counted\n";
    for (const auto& r : rows)
        out << num(r.snr_db) << ',' << to_string(r.estimator) << ',' << num(r.ber) << ','
            << r.bits_counted << '\n';
}

} // namespace owc
