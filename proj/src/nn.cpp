#include "owc/nn.hpp"

#include "owc/nn_layers.hpp"
#include "owc/rng.hpp"
#include "owc/tensor_file.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <sstream>

namespace owc::nn {

// ---------------------------------------------------------------------------
// layers

namespace detail {

ResizeTable ResizeTable::aligned(int out_rows, int first, int spacing, int n_in)
{
    ResizeTable r;
    r.in_rows = n_in;
    r.out_rows = out_rows;
    r.lo.resize(static_cast<size_t>(out_rows));
    r.hi.resize(static_cast<size_t>(out_rows));
    r.w_lo.resize(static_cast<size_t>(out_rows));
    r.w_hi.resize(static_cast<size_t>(out_rows));
    const int last = first + (n_in - 1) * spacing;
    for (int k = 0; k < out_rows; ++k) {
        const auto i = static_cast<size_t>(k);
        if (k <= first) {
            r.lo[i] = r.hi[i] = 0;
            r.w_lo[i] = 1.0;
            r.w_hi[i] = 0.0;
        } else if (k >= last) {
            r.lo[i] = r.hi[i] = n_in - 1;
            r.w_lo[i] = 1.0;
            r.w_hi[i] = 0.0;
        } else {
            const int p = (k - first) / spacing;
            const double t = static_cast<double>(k - first - p * spacing) / spacing;
            r.lo[i] = p;
            r.hi[i] = p + 1;
            r.w_lo[i] = 1.0 - t;
            r.w_hi[i] = t;
        }
    }
    return r;
}

template <typename T>
void resize_forward(const ResizeTable& r, int cols, const Mat<T>& in, Mat<T>& out)
{
    out.setZero(in.rows(), static_cast<Eigen::Index>(r.out_rows) * cols);
    for (int k = 0; k < r.out_rows; ++k) {
        const auto i = static_cast<size_t>(k);
        const T wl = static_cast<T>(r.w_lo[i]);
        const T wh = static_cast<T>(r.w_hi[i]);
        for (int c = 0; c < cols; ++c)
            out.col(k * cols + c) = wl * in.col(r.lo[i] * cols + c) + wh * in.col(r.hi[i] * cols + c);
    }
}

template <typename T>
void resize_backward(const ResizeTable& r, int cols, const Mat<T>& d_out, Mat<T>& d_in)
{
    d_in.setZero(d_out.rows(), static_cast<Eigen::Index>(r.in_rows) * cols);
    for (int k = 0; k < r.out_rows; ++k) {
        const auto i = static_cast<size_t>(k);
        const T wl = static_cast<T>(r.w_lo[i]);
        const T wh = static_cast<T>(r.w_hi[i]);
        for (int c = 0; c < cols; ++c) {
            d_in.col(r.lo[i] * cols + c) += wl * d_out.col(k * cols + c);
            d_in.col(r.hi[i] * cols + c) += wh * d_out.col(k * cols + c);
        }
    }
}

template <typename T>
void im2col(const Mat<T>& in, int rows, int cols, Mat<T>& col)
{
    const Eigen::Index ch = in.rows();
    col.resize(9 * ch, static_cast<Eigen::Index>(rows) * cols);
    for (int h = 0; h < rows; ++h)
        for (int w = 0; w < cols; ++w) {
            const Eigen::Index p = h * cols + w;
            for (int tap = 0; tap < 9; ++tap) {
                const int hh = h + tap / 3 - 1;
                const int ww = w + tap % 3 - 1;
                auto dst = col.col(p).segment(tap * ch, ch);
                if (hh < 0 || hh >= rows || ww < 0 || ww >= cols)
                    dst.setZero();
                else
                    dst = in.col(hh * cols + ww);
            }
        }
}

template <typename T>
void col2im(const Mat<T>& col, int channels, int rows, int cols, Mat<T>& d_in)
{
    d_in.setZero(channels, static_cast<Eigen::Index>(rows) * cols);
    for (int h = 0; h < rows; ++h)
        for (int w = 0; w < cols; ++w) {
            const Eigen::Index p = h * cols + w;
            for (int tap = 0; tap < 9; ++tap) {
                const int hh = h + tap / 3 - 1;
                const int ww = w + tap % 3 - 1;
                if (hh < 0 || hh >= rows || ww < 0 || ww >= cols)
                    continue;
                d_in.col(hh * cols + ww) += col.col(p).segment(tap * channels, channels);
            }
        }
}

template <typename T>
void conv_forward(const Mat<T>& weight, const Eigen::Matrix<T, Eigen::Dynamic, 1>& bias,
                  const Mat<T>& col, Mat<T>& out)
{
    out.noalias() = weight * col;
    out.colwise() += bias;
}

template <typename T>
void relu_forward(Mat<T>& z)
{
    z = z.cwiseMax(T(0));
}

template <typename T>
void relu_backward(const Mat<T>& activated, Mat<T>& d)
{
    d = (activated.array() > T(0)).select(d, T(0));
}

template <typename T>
void mean_cols_forward(const Mat<T>& in, int rows, int cols, Mat<T>& out)
{
    out.setZero(in.rows(), rows);
    for (int h = 0; h < rows; ++h) {
        for (int c = 0; c < cols; ++c)
            out.col(h) += in.col(h * cols + c);
        out.col(h) /= static_cast<T>(cols);
    }
}

template <typename T>
void mean_cols_backward(const Mat<T>& d_out, int rows, int cols, Mat<T>& d_in)
{
    d_in.resize(d_out.rows(), static_cast<Eigen::Index>(rows) * cols);
    for (int h = 0; h < rows; ++h)
        for (int c = 0; c < cols; ++c)
            d_in.col(h * cols + c) = d_out.col(h) / static_cast<T>(cols);
}

#define OWC_INSTANTIATE_LAYERS(T)                                                                  \
    template void resize_forward<T>(const ResizeTable&, int, const Mat<T>&, Mat<T>&);             \
    template void resize_backward<T>(const ResizeTable&, int, const Mat<T>&, Mat<T>&);            \
    template void im2col<T>(const Mat<T>&, int, int, Mat<T>&);                                    \
    template void col2im<T>(const Mat<T>&, int, int, int, Mat<T>&);                               \
    template void conv_forward<T>(const Mat<T>&, const Eigen::Matrix<T, Eigen::Dynamic, 1>&,      \
                                  const Mat<T>&, Mat<T>&);                                        \
    template void relu_forward<T>(Mat<T>&);                                                       \
    template void relu_backward<T>(const Mat<T>&, Mat<T>&);                                       \
    template void mean_cols_forward<T>(const Mat<T>&, int, int, Mat<T>&);                         \
    template void mean_cols_backward<T>(const Mat<T>&, int, int, Mat<T>&);

OWC_INSTANTIATE_LAYERS(float)
OWC_INSTANTIATE_LAYERS(double)
#undef OWC_INSTANTIATE_LAYERS

} // namespace detail

using detail::Mat;

// ---------------------------------------------------------------------------
// architecture

NetArch NetArch::standard(const PilotPattern& pattern, const ModemConfig& cfg)
{
    if (pattern.n_tones() < 2)
        throw std::invalid_argument("network needs at least two pilot tones");
    NetArch a;
    a.n_f = cfg.n_f;
    a.first_tone = pattern.tone_indices[0];
    a.tone_spacing = pattern.tone_indices[1] - pattern.tone_indices[0];
    a.n_pilots = pattern.n_tones();
    a.n_symbols = pattern.n_symbols();
    return a;
}

std::size_t NetArch::param_count() const
{
    std::size_t n = 0;
    for (size_t l = 0; l + 1 < widths.size(); ++l)
        n += static_cast<size_t>(widths[l] * widths[l + 1] * 9 + widths[l + 1]);
    return n;
}

std::string NetArch::tag() const
{
    std::ostringstream os;
    os << "owcnet/2 nf=" << n_f << " tone0=" << first_tone << " dk=" << tone_spacing
       << " np=" << n_pilots << " ns=" << n_symbols << " w=" << widths[0] << ',' << widths[1]
       << ',' << widths[2] << ',' << widths[3];
    return os.str();
}

NetArch NetArch::from_tag(const std::string& tag)
{
    NetArch a;
    int consumed = 0;
    const int got = std::sscanf(tag.c_str(), "owcnet/2 nf=%d tone0=%d dk=%d np=%d ns=%d w=%d,%d,%d,%d%n",
                                &a.n_f, &a.first_tone, &a.tone_spacing, &a.n_pilots, &a.n_symbols,
                                &a.widths[0], &a.widths[1], &a.widths[2], &a.widths[3], &consumed);
    if (got != 9 || static_cast<size_t>(consumed) != tag.size())
        throw FormatError("unrecognized architecture tag '" + tag + "'");
    if (a.widths[0] != 2 || a.widths[3] != 2 || a.widths[1] < 1 || a.widths[2] < 1 || a.n_f < 4 ||
        a.n_f % 2 != 0 || a.n_pilots < 2 || a.n_symbols < 1 || a.tone_spacing < 1)
        throw FormatError("invalid architecture in tag '" + tag + "'");
    return a;
}

// ---------------------------------------------------------------------------
// weights

template <typename T>
Tensor<T>& Weights<T>::get(const std::string& name)
{
    for (auto& t : tensors)
        if (t.name == name)
            return t.tensor;
    throw std::out_of_range("no tensor named '" + name + "'");
}

template <typename T>
const Tensor<T>& Weights<T>::get(const std::string& name) const
{
    for (const auto& t : tensors)
        if (t.name == name)
            return t.tensor;
    throw std::out_of_range("no tensor named '" + name + "'");
}

template <typename T>
std::size_t Weights<T>::param_count() const
{
    std::size_t n = 0;
    for (const auto& t : tensors)
        n += t.tensor.data.size();
    return n;
}

template <typename T>
Weights<T> Weights<T>::zeros_like() const
{
    Weights z = *this;
    for (auto& t : z.tensors)
        std::fill(t.tensor.data.begin(), t.tensor.data.end(), T(0));
    return z;
}

template <typename To, typename From>
Weights<To> cast_weights(const Weights<From>& w)
{
    Weights<To> out;
    out.norm_scale = w.norm_scale;
    out.arch_tag = w.arch_tag;
    for (const auto& t : w.tensors) {
        NamedTensor<To> nt;
        nt.name = t.name;
        nt.tensor.shape = t.tensor.shape;
        nt.tensor.data.assign(t.tensor.data.begin(), t.tensor.data.end());
        out.tensors.push_back(std::move(nt));
    }
    return out;
}

template Weights<float> cast_weights<float, double>(const Weights<double>&);
template Weights<double> cast_weights<double, float>(const Weights<float>&);
template struct Weights<float>;
template struct Weights<double>;

namespace {

std::string layer_name(int l, const char* part) { return "conv" + std::to_string(l + 1) + "." + part; }

} // namespace

template <typename T>
Weights<T> init_weights(const NetArch& arch, std::uint64_t seed, double norm_scale)
{
    if (!(norm_scale > 0.0))
        throw std::invalid_argument("norm_scale must be positive");
    Weights<T> w;
    w.norm_scale = norm_scale;
    w.arch_tag = arch.tag();
    Rng rng(derive_seed(seed, stream::init));
    for (int l = 0; l < 3; ++l) {
        const int cin = arch.widths[static_cast<size_t>(l)];
        const int cout = arch.widths[static_cast<size_t>(l + 1)];
        const double fan_in = 9.0 * cin;
        // He-uniform for layers feeding a rectifier. The output layer starts
        // small so the untrained network stays close to its interpolation path.
        const double bound = l < 2 ? std::sqrt(6.0 / fan_in) : 0.1 * std::sqrt(3.0 / fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        NamedTensor<T> wt{layer_name(l, "weight"), Tensor<T>({cout, cin, 3, 3})};
        for (auto& v : wt.tensor.data)
            v = static_cast<T>(static_cast<float>(u(rng)));
        NamedTensor<T> bt{layer_name(l, "bias"), Tensor<T>({cout})};
        w.tensors.push_back(std::move(wt));
        w.tensors.push_back(std::move(bt));
    }
    return w;
}

template Weights<float> init_weights<float>(const NetArch&, std::uint64_t, double);
template Weights<double> init_weights<double>(const NetArch&, std::uint64_t, double);

// ---------------------------------------------------------------------------
// engine

namespace {

using cf = std::complex<float>;

template <typename T>
struct Layer {
    Mat<T> weight; // out x (9 * in), (tap, channel) column order
    Eigen::Matrix<T, Eigen::Dynamic, 1> bias;
};

// Weight tensors are [out][in][3][3]; the GEMM form wants column index tap * in + c.
template <typename T>
Layer<T> to_layer(const Tensor<T>& w, const Tensor<T>& b)
{
    const int cout = w.shape[0];
    const int cin = w.shape[1];
    Layer<T> l;
    l.weight.resize(cout, 9 * cin);
    for (int o = 0; o < cout; ++o)
        for (int c = 0; c < cin; ++c)
            for (int tap = 0; tap < 9; ++tap)
                l.weight(o, tap * cin + c) = w.data[static_cast<size_t>((o * cin + c) * 9 + tap)];
    l.bias = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(b.data.data(), cout);
    return l;
}

template <typename T>
void from_layer_grad(const Mat<T>& dw, Tensor<T>& w)
{
    const int cout = w.shape[0];
    const int cin = w.shape[1];
    for (int o = 0; o < cout; ++o)
        for (int c = 0; c < cin; ++c)
            for (int tap = 0; tap < 9; ++tap)
                w.data[static_cast<size_t>((o * cin + c) * 9 + tap)] = dw(o, tap * cin + c);
}

template <typename T>
class Engine {
public:
    explicit Engine(const Weights<T>& w) : arch_(NetArch::from_tag(w.arch_tag)), scale_(w.norm_scale)
    {
        resize_ = detail::ResizeTable::aligned(arch_.rows(), arch_.first_tone, arch_.tone_spacing,
                                               arch_.n_pilots);
        for (int l = 0; l < 3; ++l) {
            const auto& wt = w.get(layer_name(l, "weight"));
            const auto& bt = w.get(layer_name(l, "bias"));
            const std::vector<int> want{arch_.widths[static_cast<size_t>(l + 1)],
                                        arch_.widths[static_cast<size_t>(l)], 3, 3};
            if (wt.shape != want || bt.shape != std::vector<int>{want[0]})
                throw std::invalid_argument("weights do not match architecture '" + w.arch_tag + "'");
            layers_[static_cast<size_t>(l)] = to_layer(wt, bt);
        }
    }

    const NetArch& arch() const { return arch_; }

    // Planes of one input: 2 x (n_pilots * n_symbols), scaled.
    template <typename Getter>
    void load_input(Getter&& get)
    {
        x_.resize(2, arch_.n_pilots * arch_.n_symbols);
        for (int p = 0; p < arch_.n_pilots; ++p)
            for (int s = 0; s < arch_.n_symbols; ++s) {
                const std::complex<double> v = get(p, s);
                x_(0, p * arch_.n_symbols + s) = static_cast<T>(v.real() * scale_);
                x_(1, p * arch_.n_symbols + s) = static_cast<T>(v.imag() * scale_);
            }
    }

    // Forward from x_; leaves activations cached and returns 2 x rows output.
    const Mat<T>& run()
    {
        const int rows = arch_.rows();
        const int cols = arch_.n_symbols;
        detail::resize_forward(resize_, cols, x_, a_[0]);
        for (int l = 0; l < 3; ++l) {
            const auto i = static_cast<size_t>(l);
            detail::im2col(a_[i], rows, cols, col_[i]);
            detail::conv_forward(layers_[i].weight, layers_[i].bias, col_[i], a_[i + 1]);
            if (l < 2)
                detail::relu_forward(a_[i + 1]);
        }
        detail::mean_cols_forward(a_[3], rows, cols, y_);
        // Skip path: the interpolated input itself, so the stack learns a correction.
        detail::mean_cols_forward(a_[0], rows, cols, skip_);
        y_ += skip_;
        return y_;
    }

    // Backprop d loss / d y_ into accumulated grads; optionally into d loss / d x_.
    void backward(const Mat<T>& dy, std::array<Mat<T>, 3>& dw,
                  std::array<Eigen::Matrix<T, Eigen::Dynamic, 1>, 3>& db, Mat<T>* dx)
    {
        const int rows = arch_.rows();
        const int cols = arch_.n_symbols;
        detail::mean_cols_backward(dy, rows, cols, d_);
        for (int l = 2; l >= 0; --l) {
            const auto i = static_cast<size_t>(l);
            if (l < 2)
                detail::relu_backward(a_[i + 1], d_);
            dw[i].noalias() += d_ * col_[i].transpose();
            db[i] += d_.rowwise().sum();
            if (l == 0 && !dx)
                break;
            dcol_.noalias() = layers_[i].weight.transpose() * d_;
            detail::col2im(dcol_, arch_.widths[i], rows, cols, d_);
        }
        if (dx) {
            detail::mean_cols_backward(dy, rows, cols, dskip_);
            d_ += dskip_;
            detail::resize_backward(resize_, cols, d_, *dx);
            *dx *= static_cast<T>(scale_);
        }
    }

    double scale() const { return scale_; }
    const std::array<Layer<T>, 3>& layers() const { return layers_; }

private:
    NetArch arch_;
    double scale_;
    detail::ResizeTable resize_;
    std::array<Layer<T>, 3> layers_;
    Mat<T> x_, y_, skip_, d_, dskip_, dcol_;
    std::array<Mat<T>, 4> a_;
    std::array<Mat<T>, 3> col_;
};

} // namespace

TrainPair make_pair(const PilotLs& ls, std::span<const cd> true_h)
{
    TrainPair p;
    p.pilot_ls.reserve(ls.values.size() * 2);
    for (const cd& v : ls.values) {
        p.pilot_ls.push_back(static_cast<float>(v.real()));
        p.pilot_ls.push_back(static_cast<float>(v.imag()));
    }
    p.true_h.reserve(true_h.size() * 2);
    for (const cd& v : true_h) {
        p.true_h.push_back(static_cast<float>(v.real()));
        p.true_h.push_back(static_cast<float>(v.imag()));
    }
    return p;
}

template <typename T>
CVec forward(const Weights<T>& w, const PilotLs& pilot_ls)
{
    Engine<T> eng(w);
    const NetArch& a = eng.arch();
    if (pilot_ls.n_tones != a.n_pilots || pilot_ls.n_symbols != a.n_symbols)
        throw std::invalid_argument("forward: pilot grid is " + std::to_string(pilot_ls.n_tones) +
                                    "x" + std::to_string(pilot_ls.n_symbols) + ", network expects " +
                                    std::to_string(a.n_pilots) + "x" + std::to_string(a.n_symbols));
    eng.load_input([&](int p, int s) { return pilot_ls.at(p, s); });
    const Mat<T>& y = eng.run();
    CVec h(static_cast<size_t>(a.n_f));
    const double inv = 1.0 / w.norm_scale;
    for (int k = 0; k < a.rows(); ++k)
        h[static_cast<size_t>(k)] = cd(static_cast<double>(y(0, k)), static_cast<double>(y(1, k))) * inv;
    for (int k = a.rows(); k < a.n_f; ++k)
        h[static_cast<size_t>(k)] = std::conj(h[static_cast<size_t>(a.n_f - k)]);
    return h;
}

template CVec forward<float>(const Weights<float>&, const PilotLs&);
template CVec forward<double>(const Weights<double>&, const PilotLs&);

template <typename T>
LossGrad<T> loss_and_grads(const Weights<T>& w, std::span<const TrainPair> batch, double l2,
                           bool want_input_grads)
{
    if (batch.empty())
        throw std::invalid_argument("loss_and_grads: empty batch");
    Engine<T> eng(w);
    const NetArch& a = eng.arch();
    const int rows = a.rows();
    const auto in_len = static_cast<size_t>(2 * a.n_pilots * a.n_symbols);
    const auto out_len = static_cast<size_t>(2 * a.n_f);

    std::array<Mat<T>, 3> dw;
    std::array<Eigen::Matrix<T, Eigen::Dynamic, 1>, 3> db;
    for (size_t l = 0; l < 3; ++l) {
        dw[l] = Mat<T>::Zero(eng.layers()[l].weight.rows(), eng.layers()[l].weight.cols());
        db[l] = Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(eng.layers()[l].bias.size());
    }

    LossGrad<T> out;
    const double norm = 1.0 / (static_cast<double>(batch.size()) * rows * 2.0);
    Mat<T> dy(2, rows);
    Mat<T> dx;
    double sse = 0.0;
    for (const TrainPair& pair : batch) {
        if (pair.pilot_ls.size() != in_len || pair.true_h.size() != out_len)
            throw std::invalid_argument("loss_and_grads: training pair has the wrong shape");
        eng.load_input([&](int p, int s) {
            const size_t i = static_cast<size_t>(2 * (p * a.n_symbols + s));
            return cd(pair.pilot_ls[i], pair.pilot_ls[i + 1]);
        });
        const Mat<T>& y = eng.run();
        for (int k = 0; k < rows; ++k)
            for (int c = 0; c < 2; ++c) {
                const double target =
                    static_cast<double>(pair.true_h[static_cast<size_t>(2 * k + c)]) * eng.scale();
                const double e = static_cast<double>(y(c, k)) - target;
                sse += e * e;
                dy(c, k) = static_cast<T>(2.0 * e * norm);
            }
        eng.backward(dy, dw, db, want_input_grads ? &dx : nullptr);
        if (want_input_grads) {
            std::vector<double> g(in_len);
            for (int p = 0; p < a.n_pilots; ++p)
                for (int s = 0; s < a.n_symbols; ++s)
                    for (int c = 0; c < 2; ++c)
                        g[static_cast<size_t>(2 * (p * a.n_symbols + s) + c)] =
                            static_cast<double>(dx(c, p * a.n_symbols + s));
            out.input_grads.push_back(std::move(g));
        }
    }

    out.grads = w.zeros_like();
    double sq = 0.0;
    for (int l = 0; l < 3; ++l) {
        auto& gw = out.grads.get(layer_name(l, "weight"));
        from_layer_grad(dw[static_cast<size_t>(l)], gw);
        auto& gb = out.grads.get(layer_name(l, "bias"));
        for (size_t i = 0; i < gb.data.size(); ++i)
            gb.data[i] = db[static_cast<size_t>(l)](static_cast<Eigen::Index>(i));
    }
    for (size_t t = 0; t < w.tensors.size(); ++t) {
        const auto& src = w.tensors[t].tensor.data;
        auto& dst = out.grads.tensors[t].tensor.data;
        for (size_t i = 0; i < src.size(); ++i) {
            const double v = static_cast<double>(src[i]);
            sq += v * v;
            dst[i] += static_cast<T>(2.0 * l2 * v);
        }
    }
    out.mse = sse * norm;
    out.loss = out.mse + l2 * sq;
    return out;
}

template LossGrad<float> loss_and_grads<float>(const Weights<float>&, std::span<const TrainPair>,
                                               double, bool);
template LossGrad<double> loss_and_grads<double>(const Weights<double>&, std::span<const TrainPair>,
                                                 double, bool);

// ---------------------------------------------------------------------------
// optimizer and training

void TrainConfig::validate() const
{
    if (!(lr0 > 0.0) || !(lr_decay > 0.0) || decay_every < 1 || epochs < 1 || batch < 1 ||
        l2 < 0.0 || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0))
        throw std::invalid_argument("invalid training configuration");
}

double learning_rate(const TrainConfig& cfg, int epoch)
{
    return cfg.lr0 * std::pow(cfg.lr_decay, epoch / cfg.decay_every);
}

template <typename T>
AdamState<T> adam_init(const Weights<T>& w)
{
    return {w.zeros_like(), w.zeros_like(), 0};
}

template <typename T>
void adam_step(AdamState<T>& state, Weights<T>& w, const Weights<T>& grads, long step_index,
               double lr, const TrainConfig& cfg)
{
    if (step_index < 1)
        throw std::invalid_argument("adam_step: step index is 1-based");
    if (grads.tensors.size() != w.tensors.size() || state.m.tensors.size() != w.tensors.size())
        throw std::invalid_argument("adam_step: inconsistent tensor sets");
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_index));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_index));
    for (size_t t = 0; t < w.tensors.size(); ++t) {
        auto& p = w.tensors[t].tensor.data;
        const auto& g = grads.tensors[t].tensor.data;
        auto& m = state.m.tensors[t].tensor.data;
        auto& v = state.v.tensors[t].tensor.data;
        if (g.size() != p.size())
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        for (size_t i = 0; i < p.size(); ++i) {
            const double gi = static_cast<double>(g[i]);
            const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
            const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + cfg.eps));
        }
    }
    state.step = step_index;
}

template AdamState<float> adam_init<float>(const Weights<float>&);
template AdamState<double> adam_init<double>(const Weights<double>&);
template void adam_step<float>(AdamState<float>&, Weights<float>&, const Weights<float>&, long,
                               double, const TrainConfig&);
template void adam_step<double>(AdamState<double>&, Weights<double>&, const Weights<double>&, long,
                                double, const TrainConfig&);

double evaluate_mse(const ModelWeights& w, std::span<const TrainPair> set)
{
    if (set.empty())
        return 0.0;
    constexpr size_t kChunk = 256;
    double total = 0.0;
    for (size_t i = 0; i < set.size(); i += kChunk) {
        const size_t n = std::min(kChunk, set.size() - i);
        total += loss_and_grads(w, set.subspan(i, n), 0.0).mse * static_cast<double>(n);
    }
    return total / static_cast<double>(set.size());
}

TrainResult train(std::span<const TrainPair> train_set, std::span<const TrainPair> val_set,
                  const NetArch& arch, const TrainConfig& cfg, double norm_scale,
                  const std::function<void(const EpochRecord&)>& on_epoch)
{
    cfg.validate();
    if (train_set.empty())
        throw std::invalid_argument("train: empty training set");

    TrainResult result;
    ModelWeights w = init_weights<float>(arch, cfg.seed, norm_scale);
    AdamState<float> opt = adam_init(w);
    std::vector<size_t> order(train_set.size());
    std::vector<TrainPair> batch;
    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), size_t{0});
        Rng rng(derive_seed(cfg.seed, stream::shuffle, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);

        const double lr = learning_rate(cfg, epoch);
        double loss_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch)) {
            const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch));
            batch.clear();
            for (size_t i = start; i < end; ++i)
                batch.push_back(train_set[order[i]]);
            const LossGrad<float> lg = loss_and_grads(w, std::span<const TrainPair>(batch), cfg.l2);
            adam_step(opt, w, lg.grads, ++step, lr, cfg);
            loss_sum += lg.loss * static_cast<double>(end - start);
        }
        EpochRecord rec{epoch + 1, lr, loss_sum / static_cast<double>(order.size()),
                        evaluate_mse(w, val_set)};
        result.history.push_back(rec);
        if (on_epoch)
            on_epoch(rec);
    }
    result.weights = std::move(w);
    return result;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr char kWeightsMagic[5] = "OWCW";
const std::string kArchPrefix = "@arch ";

} // namespace

void save_weights(const ModelWeights& w, const std::filesystem::path& path)
{
    io::TensorFile f;
    f.scalar = w.norm_scale;
    // The architecture tag travels as the name of an empty leading tensor.
    f.tensors.push_back({kArchPrefix + w.arch_tag, {0}, {}});
    for (const auto& t : w.tensors)
        f.tensors.push_back({t.name, t.tensor.shape, t.tensor.data});
    io::write_tensor_file(path, kWeightsMagic, f);
}

ModelWeights load_weights(const std::filesystem::path& path)
{
    const io::TensorFile f = io::read_tensor_file(path, kWeightsMagic);
    ModelWeights w;
    w.norm_scale = f.scalar;
    if (!(w.norm_scale > 0.0))
        throw FormatError("weights file has a non-positive norm_scale");
    for (const auto& t : f.tensors) {
        if (t.name.starts_with(kArchPrefix)) {
            w.arch_tag = t.name.substr(kArchPrefix.size());
            continue;
        }
        NamedTensor<float> nt;
        nt.name = t.name;
        nt.tensor.shape = t.shape;
        nt.tensor.data = t.data;
        w.tensors.push_back(std::move(nt));
    }
    if (w.arch_tag.empty())
        throw FormatError("weights file carries no architecture tag");
    const NetArch arch = NetArch::from_tag(w.arch_tag);
    const ModelWeights ref = init_weights<float>(arch, 0, w.norm_scale);
    if (ref.tensors.size() != w.tensors.size())
        throw FormatError("tensor count does not match architecture '" + w.arch_tag + "'");
    for (size_t i = 0; i < ref.tensors.size(); ++i)
        if (ref.tensors[i].name != w.tensors[i].name ||
            ref.tensors[i].tensor.shape != w.tensors[i].tensor.shape)
            throw FormatError("tensor '" + w.tensors[i].name + "' does not match architecture");
    return w;
}

ModelWeights load_weights(const std::filesystem::path& path, const NetArch& expected)
{
    ModelWeights w = load_weights(path);
    if (w.arch_tag != expected.tag())
        throw FormatError("architecture mismatch: file has '" + w.arch_tag + "', expected '" +
                          expected.tag() + "'");
    return w;
}

} // namespace owc::nn
