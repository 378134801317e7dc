#include "owc/estimators.hpp"

#include "owc/tensor_file.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace owc {

CVec PilotLs::symbol_average() const
{
    CVec out(static_cast<size_t>(n_tones));
    for (int p = 0; p < n_tones; ++p) {
        cd acc = 0.0;
        for (int s = 0; s < n_symbols; ++s)
            acc += at(p, s);
        out[static_cast<size_t>(p)] = acc / static_cast<double>(n_symbols);
    }
    return out;
}

PilotLs ls_pilot_grid(const ResourceGrid& received, const PilotPattern& pattern)
{
    PilotLs out(pattern.n_tones(), pattern.n_symbols());
    for (int p = 0; p < pattern.n_tones(); ++p) {
        const cd xp = pattern.pilot_values[static_cast<size_t>(p)];
        if (xp == cd(0.0, 0.0))
            throw std::domain_error("ls_estimate: zero pilot value");
        const int k = pattern.tone_indices[static_cast<size_t>(p)];
        if (k < 0 || k >= received.n_f())
            throw std::invalid_argument("ls_estimate: pilot tone outside the grid");
        for (int s = 0; s < pattern.n_symbols(); ++s) {
            const int sym = pattern.symbol_indices[static_cast<size_t>(s)];
            if (sym < 0 || sym >= received.n_s())
                throw std::invalid_argument("ls_estimate: pilot symbol outside the grid");
            out.at(p, s) = received.at(k, sym) / xp;
        }
    }
    return out;
}

CVec ls_estimate(const ResourceGrid& received, const PilotPattern& pattern)
{
    return ls_pilot_grid(received, pattern).symbol_average();
}

double ls_noise_variance(double tone_var, const PilotPattern& pattern)
{
    // Unit-modulus pilots in the default pattern; general case uses the mean 1/|X_p|^2.
    double inv = 0.0;
    for (const cd& x : pattern.pilot_values)
        inv += 1.0 / std::norm(x);
    inv /= static_cast<double>(pattern.pilot_values.size());
    return tone_var * inv / static_cast<double>(pattern.n_symbols());
}

CorrelationSet estimate_correlations(std::span<const CVec> responses, const PilotPattern& pattern)
{
    if (responses.empty())
        throw std::invalid_argument("estimate_correlations: empty corpus");
    const auto n_f = static_cast<Eigen::Index>(responses.front().size());
    const auto n_p = static_cast<Eigen::Index>(pattern.n_tones());
    CorrelationSet c;
    c.r_hhp = Eigen::MatrixXcd::Zero(n_f, n_p);
    c.r_hphp = Eigen::MatrixXcd::Zero(n_p, n_p);
    Eigen::VectorXcd hp(n_p);
    for (const auto& h : responses) {
        if (static_cast<Eigen::Index>(h.size()) != n_f)
            throw std::invalid_argument("estimate_correlations: responses differ in length");
        for (Eigen::Index p = 0; p < n_p; ++p)
            hp(p) = h[static_cast<size_t>(pattern.tone_indices[static_cast<size_t>(p)])];
        const Eigen::Map<const Eigen::VectorXcd> hv(h.data(), n_f);
        c.r_hhp.noalias() += hv * hp.adjoint();
        c.r_hphp.noalias() += hp * hp.adjoint();
    }
    const double inv = 1.0 / static_cast<double>(responses.size());
    c.r_hhp *= inv;
    c.r_hphp *= inv;
    // Exact Hermitian symmetry; the accumulation above is symmetric only to rounding.
    c.r_hphp = (0.5 * (c.r_hphp + c.r_hphp.adjoint())).eval();
    c.sample_count = responses.size();
    return c;
}

CorrelationSet estimate_correlations(std::span<const ChannelRealization> corpus,
                                     const PilotPattern& pattern, int n_f, int l_cp)
{
    std::vector<CVec> responses;
    responses.reserve(corpus.size());
    for (const auto& ch : corpus)
        responses.push_back(slot_response(ch, n_f, l_cp));
    return estimate_correlations(responses, pattern);
}

CVec mmse_estimate(std::span<const cd> h_ls, const CorrelationSet& corr, double noise_var,
                   bool real_channel)
{
    const Eigen::Index n_p = corr.r_hphp.rows();
    if (static_cast<Eigen::Index>(h_ls.size()) != n_p)
        throw std::invalid_argument("mmse_estimate: LS vector length must equal the pilot count");
    if (!(noise_var >= 0.0))
        throw std::invalid_argument("mmse_estimate: noise variance must be non-negative");

    Eigen::MatrixXcd a = corr.r_hphp;
    a.diagonal().array() += noise_var;
    const Eigen::LDLT<Eigen::MatrixXcd> ldlt(a);
    const Eigen::VectorXd d = ldlt.vectorD().real();
    const double dmax = d.cwiseAbs().maxCoeff();
    const double floor = dmax * static_cast<double>(n_p) * 1e-13;
    if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || d.minCoeff() <= floor)
        throw std::domain_error("mmse_estimate: regularized correlation matrix is singular");

    const Eigen::Map<const Eigen::VectorXcd> y(h_ls.data(), n_p);
    const Eigen::VectorXcd w = ldlt.solve(y);
    const Eigen::VectorXcd h = corr.r_hhp * w;
    CVec out(h.data(), h.data() + h.size());
    if (real_channel)
        conj_mirror_upper(out);
    return out;
}

CVec ls_interpolate(std::span<const cd> h_ls, const PilotPattern& pattern, int n_f)
{
    const auto& tones = pattern.tone_indices;
    if (h_ls.size() != tones.size())
        throw std::invalid_argument("ls_interpolate: LS vector length must equal the pilot count");
    if (tones.size() < 2)
        throw std::invalid_argument("ls_interpolate: at least two pilots are required");
    const int half = n_f / 2;
    CVec out(static_cast<size_t>(n_f));
    size_t seg = 0;
    for (int k = 0; k <= half; ++k) {
        cd v;
        if (k <= tones.front()) {
            v = h_ls.front();
        } else if (k >= tones.back()) {
            v = h_ls.back();
        } else {
            while (tones[seg + 1] < k)
                ++seg;
            const double t = static_cast<double>(k - tones[seg]) /
                             static_cast<double>(tones[seg + 1] - tones[seg]);
            v = (1.0 - t) * h_ls[seg] + t * h_ls[seg + 1];
        }
        out[static_cast<size_t>(k)] = v;
    }
    conj_mirror_upper(out);
    return out;
}

namespace {

constexpr char kCorrMagic[5] = "OWCC";

io::RawTensor pack(const std::string& name, const Eigen::MatrixXcd& m)
{
    io::RawTensor t{name, {static_cast<int>(m.rows()), static_cast<int>(m.cols()), 2}, {}};
    t.data.reserve(static_cast<size_t>(m.size()) * 2);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            t.data.push_back(static_cast<float>(m(r, c).real()));
            t.data.push_back(static_cast<float>(m(r, c).imag()));
        }
    return t;
}

Eigen::MatrixXcd unpack(const io::RawTensor& t, const std::string& name)
{
    if (t.name != name || t.shape.size() != 3 || t.shape[2] != 2)
        throw io::FormatError("correlation file: expected tensor '" + name + "'");
    Eigen::MatrixXcd m(t.shape[0], t.shape[1]);
    size_t i = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c, i += 2)
            m(r, c) = cd(t.data[i], t.data[i + 1]);
    return m;
}

} // namespace

void save_correlations(const CorrelationSet& corr, const std::filesystem::path& path)
{
    io::TensorFile f;
    f.scalar = static_cast<double>(corr.sample_count);
    f.tensors.push_back(pack("r_hhp", corr.r_hhp));
    f.tensors.push_back(pack("r_hphp", corr.r_hphp));
    io::write_tensor_file(path, kCorrMagic, f);
}

CorrelationSet load_correlations(const std::filesystem::path& path)
{
    const io::TensorFile f = io::read_tensor_file(path, kCorrMagic);
    if (f.tensors.size() != 2)
        throw io::FormatError("correlation file: expected two tensors");
    CorrelationSet c;
    c.r_hhp = unpack(f.tensors[0], "r_hhp");
    c.r_hphp = unpack(f.tensors[1], "r_hphp");
    c.sample_count = static_cast<std::size_t>(f.scalar);
    if (c.r_hphp.rows() != c.r_hphp.cols() || c.r_hhp.cols() != c.r_hphp.rows())
        throw io::FormatError("correlation file: inconsistent matrix shapes");
    return c;
}

cd direct_detection_gain(const ResourceGrid& received, const PilotPattern& pattern)
{
    const PilotLs ls = ls_pilot_grid(received, pattern);
    if (ls.values.empty())
        throw std::invalid_argument("direct_detection_gain: no pilots");
    cd acc = 0.0;
    for (const cd& v : ls.values)
        acc += v;
    return acc / static_cast<double>(ls.values.size());
}

} // namespace owc
