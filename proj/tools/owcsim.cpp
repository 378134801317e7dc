// owcsim: dataset generation, training and evaluation runs for the optical
// wireless channel estimation simulator.

#include "owc/config.hpp"
#include "owc/dataset.hpp"
#include "owc/experiments.hpp"
#include "owc/nn.hpp"
#include "owc/selector.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

using namespace owc;

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 1;
    std::string out;

    SimConfig sim() const { return config.empty() ? SimConfig{} : load_config(config); }
};

void add_common(CLI::App* app, Common& c, bool out_required = true)
{
    app->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "master seed");
    auto* o = app->add_option("--out", c.out, "output path");
    if (out_required)
        o->required();
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    return f;
}

std::optional<DelayClass> parse_class_arg(const std::string& s)
{
    if (s == "mixed")
        return std::nullopt;
    auto c = parse_delay_class(s);
    if (!c)
        throw std::invalid_argument("unknown class '" + s + "'");
    return c;
}

struct EvalArgs {
    Common common;
    int trials = 100;
    SnrGrid snr;
    std::vector<std::string> weights;
    std::string corr;
    std::vector<std::string> estimators;
};

void add_eval(CLI::App* app, EvalArgs& a, bool snr_grid)
{
    add_common(app, a.common);
    app->add_option("--trials", a.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
    if (snr_grid) {
        app->add_option("--snr-min", a.snr.min_db, "lowest SNR in dB");
        app->add_option("--snr-max", a.snr.max_db, "highest SNR in dB");
        app->add_option("--snr-step", a.snr.step_db, "SNR step in dB");
    }
    app->add_option("--weights", a.weights, "branch weights as CLASS=PATH (lds, mds, hds)");
    app->add_option("--corr", a.corr, "correlation file from estimate-corr");
    app->add_option("--estimators", a.estimators,
                    "subset of ls, mmse, hds_only, adaptive, direct, flat")
        ->delimiter(',');
}

Models load_models(const EvalArgs& a, const SimConfig& sim)
{
    Models m;
    if (!a.corr.empty())
        m.corr = load_correlations(a.corr);
    if (!a.weights.empty()) {
        std::map<DelayClass, std::string> paths;
        for (const auto& w : a.weights) {
            const auto eq = w.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("--weights expects CLASS=PATH, got '" + w + "'");
            const auto cls = parse_delay_class(w.substr(0, eq));
            if (!cls)
                throw std::invalid_argument("--weights: unknown class in '" + w + "'");
            paths[*cls] = w.substr(eq + 1);
        }
        if (paths.size() != 3)
            throw std::invalid_argument("--weights must name lds, mds and hds");
        const nn::NetArch arch = nn::NetArch::standard(PilotPattern::make(sim.modem), sim.modem);
        SelectorBank bank;
        for (const auto& [cls, path] : paths)
            bank.nets[static_cast<size_t>(cls)] = nn::load_weights(path, arch);
        bank.lds = sim.lds;
        bank.hds = sim.hds;
        bank.l_cp = sim.modem.l_cp;
        bank.validate();
        m.bank = std::move(bank);
    }
    return m;
}

ExperimentConfig experiment(const EvalArgs& a, std::vector<Estimator> defaults)
{
    ExperimentConfig cfg;
    cfg.sim = a.common.sim();
    cfg.snr = a.snr;
    cfg.trials = a.trials;
    cfg.seed = a.common.seed;
    cfg.estimators = std::move(defaults);
    if (!a.estimators.empty()) {
        cfg.estimators.clear();
        for (const auto& s : a.estimators) {
            auto e = parse_estimator(s);
            if (!e)
                throw std::invalid_argument("unknown estimator '" + s + "'");
            cfg.estimators.push_back(*e);
        }
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optical wireless OFDM channel estimation simulator"};
    app.require_subcommand(1);

    Common gen;
    std::uint64_t gen_count = 1000;
    std::string gen_class = "mixed";
    double gen_snr_min = 15.0, gen_snr_max = 30.0;
    bool gen_noiseless = false;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a training dataset");
    add_common(gen_cmd, gen);
    gen_cmd->add_option("--count", gen_count, "number of samples")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--class", gen_class, "lds, mds, hds or mixed");
    gen_cmd->add_option("--snr-min", gen_snr_min, "lowest SNR in dB");
    gen_cmd->add_option("--snr-max", gen_snr_max, "highest SNR in dB");
    gen_cmd->add_flag("--noiseless", gen_noiseless, "store noise-free observations");

    Common corr;
    std::uint64_t corr_count = 20000;
    auto* corr_cmd = app.add_subcommand("estimate-corr", "estimate MMSE correlation matrices");
    add_common(corr_cmd, corr);
    corr_cmd->add_option("--count", corr_count, "realizations in the corpus")
        ->check(CLI::PositiveNumber);

    Common tr;
    std::string tr_data, tr_history;
    double tr_ratio = 0.95;
    int tr_epochs = -1;
    auto* train_cmd = app.add_subcommand("train", "train one branch network");
    add_common(train_cmd, tr);
    train_cmd->add_option("--data", tr_data, "dataset from gen-data")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--val-ratio", tr_ratio, "training fraction of the split");
    train_cmd->add_option("--epochs", tr_epochs, "override the configured epoch count");
    train_cmd->add_option("--history", tr_history, "per-epoch loss CSV");

    EvalArgs ns, nt, nb;
    double nt_snr = 20.0;
    int nt_duration = 90, nt_dwell = 10;
    auto* ns_cmd = app.add_subcommand("eval-nmse-snr", "NMSE against SNR");
    add_eval(ns_cmd, ns, true);
    auto* nt_cmd = app.add_subcommand("eval-nmse-time", "NMSE over a class-switching time trace");
    add_eval(nt_cmd, nt, false);
    nt_cmd->add_option("--snr", nt_snr, "trace SNR in dB");
    nt_cmd->add_option("--duration", nt_duration, "trace length in seconds");
    nt_cmd->add_option("--dwell", nt_dwell, "seconds per delay class");
    auto* nb_cmd = app.add_subcommand("eval-ber", "BER against SNR");
    add_eval(nb_cmd, nb, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_cmd) {
            const SimConfig sim = gen.sim();
            DatasetSpec spec;
            spec.cls = parse_class_arg(gen_class);
            spec.count = gen_count;
            spec.seed = gen.seed;
            spec.snr_min = gen_noiseless ? std::numeric_limits<double>::infinity() : gen_snr_min;
            spec.snr_max = gen_noiseless ? std::numeric_limits<double>::infinity() : gen_snr_max;
            const auto h = generate_dataset_file(sim.scenario, sim.modem, sim.lds, sim.hds, spec, gen.out);
            std::printf("wrote %llu samples to %s\n", static_cast<unsigned long long>(h.count),
                        gen.out.c_str());
        } else if (*corr_cmd) {
            const CorrelationSet c = build_correlations(corr.sim(), corr_count, corr.seed);
            save_correlations(c, corr.out);
            std::printf("wrote correlations of %zu realizations to %s\n", c.sample_count,
                        corr.out.c_str());
        } else if (*train_cmd) {
            const SimConfig sim = tr.sim();
            nn::TrainConfig tc = sim.train;
            tc.seed = tr.seed;
            if (tr_epochs >= 0)
                tc.epochs = tr_epochs;
            const Dataset d = load_dataset(tr_data);
            const auto [train_set, val_set] = split_dataset(d, tr_ratio, tr.seed);
            const nn::NetArch arch = nn::NetArch::standard(PilotPattern::make(sim.modem), sim.modem);
            const auto result = nn::train(train_set, val_set, arch, tc, 1e4, [](const nn::EpochRecord& r) {
                std::printf("epoch %3d  lr %.2e  train %.6g  val %.6g\n", r.epoch, r.lr,
                            r.train_loss, r.val_loss);
                std::fflush(stdout);
            });
            nn::save_weights(result.weights, tr.out);
            if (!tr_history.empty()) {
                auto f = open_out(tr_history);
                f << "epoch,lr,train_loss,val_loss\n";
                for (const auto& r : result.history)
                    f << r.epoch << ',' << r.lr << ',' << r.train_loss << ',' << r.val_loss << '\n';
            }
        } else if (*ns_cmd) {
            const ExperimentConfig cfg = experiment(
                ns, {Estimator::LS, Estimator::MMSE, Estimator::HdsOnly, Estimator::Adaptive});
            const auto rows = run_nmse_vs_snr(cfg, load_models(ns, cfg.sim));
            auto f = open_out(ns.common.out);
            write_csv(f, rows, cfg.seed);
        } else if (*nt_cmd) {
            ExperimentConfig cfg = experiment(
                nt, {Estimator::LS, Estimator::MMSE, Estimator::HdsOnly, Estimator::Adaptive});
            cfg.trace_snr_db = nt_snr;
            cfg.duration_s = nt_duration;
            cfg.dwell_s = nt_dwell;
            const auto res = run_nmse_vs_time(cfg, load_models(nt, cfg.sim));
            auto f = open_out(nt.common.out);
            write_csv(f, res.rows);
            for (const auto& s : res.summary)
                std::printf("%-9s trace mean %.6g  variance %.3g\n",
                            std::string(to_string(s.estimator)).c_str(), s.mean, s.variance);
        } else if (*nb_cmd) {
            const ExperimentConfig cfg =
                experiment(nb, {Estimator::LS, Estimator::MMSE, Estimator::HdsOnly,
                                Estimator::Adaptive, Estimator::Direct});
            const auto rows = run_ber_vs_snr(cfg, load_models(nb, cfg.sim));
            auto f = open_out(nb.common.out);
            write_csv(f, rows);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "owcsim: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
