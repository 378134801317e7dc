#include "owc/dataset.hpp"

#include "owc/rng.hpp"
#include "owc/tensor_file.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

namespace owc {

namespace {

constexpr char kDatasetMagic[4] = {'O', 'W', 'C', 'D'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 1 + 8 + 4 * 4 + 8 * 2 + 8;

double draw_snr(const DatasetSpec& spec, std::uint64_t index)
{
    if (spec.snr_min == spec.snr_max)
        return spec.snr_min;
    Rng rng(derive_seed(spec.seed, stream::snr, index));
    return std::uniform_real_distribution<double>(spec.snr_min, spec.snr_max)(rng);
}

void check_spec(const DatasetSpec& spec)
{
    if (spec.count < 1)
        throw std::invalid_argument("dataset count must be >= 1");
    if (std::isnan(spec.snr_min) || std::isnan(spec.snr_max) || spec.snr_min > spec.snr_max)
        throw std::invalid_argument("dataset SNR range must be ordered");
    if (std::isinf(spec.snr_min) != std::isinf(spec.snr_max))
        throw std::invalid_argument("an infinite SNR range must be a single point");
}

} // namespace

ChannelRealization rejection_sample_class(const ScenarioConfig& cfg, const ModemConfig& modem,
                                          const PdpTemplate& lds, const PdpTemplate& hds,
                                          DelayClass cls, std::uint64_t seed, int* attempts_used)
{
    for (int a = 0; a < kRejectionCap; ++a) {
        const std::uint64_t s = a == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(a));
        ChannelRealization ch = sample_realization(cfg, s);
        const CVec taps = impulse_taps(ch, modem.n_f, modem.l_cp + 1);
        if (label_class(taps, lds, hds) == cls) {
            if (attempts_used)
                *attempts_used = a + 1;
            return ch;
        }
    }
    std::ostringstream msg;
    msg << "rejection sampling for class " << to_string(cls) << " gave no match in "
        << kRejectionCap << " draws (acceptance rate below " << 1.0 / kRejectionCap << ")";
    throw RejectionError(msg.str());
}

std::vector<nn::TrainPair> Dataset::pairs() const
{
    std::vector<nn::TrainPair> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.push_back(r.pair);
    return out;
}

DatasetRecord make_record(const ScenarioConfig& cfg, const ModemConfig& modem,
                          const PdpTemplate& lds, const PdpTemplate& hds, const DatasetSpec& spec,
                          std::uint64_t index)
{
    const std::uint64_t ch_seed = derive_seed(spec.seed, stream::channel, index);
    const ChannelRealization ch =
        spec.cls ? rejection_sample_class(cfg, modem, lds, hds, *spec.cls, ch_seed)
                 : sample_realization(cfg, ch_seed);
    const PilotPattern pattern = PilotPattern::make(modem);
    const double snr = draw_snr(spec, index);
    const SlotRun run =
        run_slot(ch, pattern, modem, snr, derive_seed(spec.seed, stream::noise, index));

    DatasetRecord rec;
    rec.pair = nn::make_pair(ls_pilot_grid(run.rx, pattern), run.true_h);
    rec.label = label_class(impulse_taps(ch, modem.n_f, modem.l_cp + 1), lds, hds);
    rec.snr_db = static_cast<float>(snr);
    return rec;
}

Dataset generate_dataset(const ScenarioConfig& cfg, const ModemConfig& modem,
                         const PdpTemplate& lds, const PdpTemplate& hds, const DatasetSpec& spec)
{
    check_spec(spec);
    cfg.validate();
    modem.validate();
    const PilotPattern pattern = PilotPattern::make(modem);

    Dataset d;
    d.header.class_tag = spec.cls ? static_cast<std::uint8_t>(*spec.cls) : kMixedClassTag;
    d.header.count = spec.count;
    d.header.n_f = static_cast<std::uint32_t>(modem.n_f);
    d.header.n_pilots = static_cast<std::uint32_t>(pattern.n_tones());
    d.header.n_pilot_symbols = static_cast<std::uint32_t>(pattern.n_symbols());
    d.header.snr_min = spec.snr_min;
    d.header.snr_max = spec.snr_max;
    d.header.seed = spec.seed;

    d.records.reserve(spec.count);
    for (std::uint64_t i = 0; i < spec.count; ++i)
        d.records.push_back(make_record(cfg, modem, lds, hds, spec, i));
    return d;
}

std::string encode_dataset(const Dataset& d)
{
    const auto& h = d.header;
    if (h.count != d.records.size())
        throw std::invalid_argument("dataset header count does not match the records");
    const std::size_t n_in = 2ull * h.n_pilots * h.n_pilot_symbols;
    const std::size_t n_out = 2ull * h.n_f;

    io::ByteWriter w;
    w.reserve(kHeaderBytes + d.records.size() * ((n_in + n_out) * 4 + 5));
    w.bytes(kDatasetMagic, 4);
    w.u16(h.version);
    w.u8(h.class_tag);
    w.u8(0); // flags, reserved
    w.u64(h.count);
    w.u32(h.n_f);
    w.u32(h.n_pilots);
    w.u32(h.n_pilot_symbols);
    w.u32(0); // reserved
    w.f64(h.snr_min);
    w.f64(h.snr_max);
    w.u64(h.seed);
    for (const auto& r : d.records) {
        if (r.pair.pilot_ls.size() != n_in || r.pair.true_h.size() != n_out)
            throw std::invalid_argument("dataset record shape does not match the header");
        for (float v : r.pair.pilot_ls)
            w.f32(v);
        for (float v : r.pair.true_h)
            w.f32(v);
        w.u8(static_cast<std::uint8_t>(r.label));
        w.f32(r.snr_db);
    }
    return w.str();
}

Dataset decode_dataset(const std::string& bytes, const std::string& what)
{
    io::ByteReader r(bytes, what);
    if (r.bytes(4) != std::string(kDatasetMagic, 4))
        throw io::FormatError(what + ": bad magic, not a dataset file");
    Dataset d;
    auto& h = d.header;
    h.version = r.u16();
    if (h.version != kDatasetVersion)
        throw io::FormatError(what + ": unsupported version " + std::to_string(h.version));
    h.class_tag = r.u8();
    if (h.class_tag > kMixedClassTag)
        throw io::FormatError(what + ": invalid class tag");
    r.u8();
    h.count = r.u64();
    h.n_f = r.u32();
    h.n_pilots = r.u32();
    h.n_pilot_symbols = r.u32();
    r.u32();
    h.snr_min = r.f64();
    h.snr_max = r.f64();
    h.seed = r.u64();

    const std::size_t n_in = 2ull * h.n_pilots * h.n_pilot_symbols;
    const std::size_t n_out = 2ull * h.n_f;
    const std::size_t rec_bytes = (n_in + n_out) * 4 + 1 + 4;
    if (r.remaining() != h.count * rec_bytes)
        throw io::FormatError(what + ": payload is " + std::to_string(r.remaining()) +
                              " bytes, header implies " + std::to_string(h.count * rec_bytes));
    d.records.resize(h.count);
    for (auto& rec : d.records) {
        rec.pair.pilot_ls.resize(n_in);
        rec.pair.true_h.resize(n_out);
        for (float& v : rec.pair.pilot_ls)
            v = r.f32();
        for (float& v : rec.pair.true_h)
            v = r.f32();
        const std::uint8_t label = r.u8();
        if (label > 2)
            throw io::FormatError(what + ": invalid sample label");
        rec.label = static_cast<DelayClass>(label);
        rec.snr_db = r.f32();
    }
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path)
{
    io::write_file_atomic(path, encode_dataset(d));
}

Dataset load_dataset(const std::filesystem::path& path)
{
    return decode_dataset(io::read_file(path), path.string());
}

DatasetHeader generate_dataset_file(const ScenarioConfig& cfg, const ModemConfig& modem,
                                    const PdpTemplate& lds, const PdpTemplate& hds,
                                    const DatasetSpec& spec, const std::filesystem::path& path)
{
    const Dataset d = generate_dataset(cfg, modem, lds, hds, spec);
    save_dataset(d, path);
    return d.header;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n, double ratio, std::uint64_t seed)
{
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("split ratio must lie in (0, 1)");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(seed, stream::split));
    // Fisher-Yates with an explicit draw so the permutation does not depend on
    // the standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
    std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> val(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    return {std::move(train), std::move(val)};
}

std::pair<std::vector<nn::TrainPair>, std::vector<nn::TrainPair>>
split_dataset(const Dataset& d, double ratio, std::uint64_t seed)
{
    const auto [tr, va] = split_indices(d.records.size(), ratio, seed);
    std::vector<nn::TrainPair> train, val;
    train.reserve(tr.size());
    val.reserve(va.size());
    for (std::size_t i : tr)
        train.push_back(d.records[i].pair);
    for (std::size_t i : va)
        val.push_back(d.records[i].pair);
    return {std::move(train), std::move(val)};
}

} // namespace owc
