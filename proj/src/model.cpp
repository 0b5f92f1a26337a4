#include "jadd/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "jadd/coding.hpp"
#include "jadd/errors.hpp"
#include "jadd/rng.hpp"

namespace jadd {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Partial Fisher-Yates: `count` distinct values from [0, n), returned sorted.
std::vector<int> draw_subset(int n, int count, std::mt19937_64& rng) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < count; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

int Constellation::index_of_label(unsigned label) const {
    for (int l = 0; l < size(); ++l)
        if (labels[l] == label) return l;
    throw ContractViolation("label not present in constellation");
}

int Constellation::nearest(cplx x) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int l = 0; l < size(); ++l) {
        const double d = std::norm(x - points[l]);
        if (d < best_d) {
            best_d = d;
            best = l;
        }
    }
    return best;
}

std::vector<cplx> Constellation::modulate(std::span<const std::uint8_t> bits) const {
    if (bits.size() % static_cast<std::size_t>(bits_per_symbol) != 0)
        throw ContractViolation("bit count is not a multiple of bits per symbol");
    std::vector<cplx> out;
    out.reserve(bits.size() / bits_per_symbol);
    for (std::size_t i = 0; i < bits.size(); i += bits_per_symbol) {
        unsigned label = 0;
        for (int b = 0; b < bits_per_symbol; ++b) label = (label << 1) | (bits[i + b] & 1U);
        out.push_back(points[index_of_label(label)]);
    }
    return out;
}

Constellation make_constellation(int size, std::string_view scheme) {
    const std::string s = lower(scheme);
    if (size < 2 || (size & (size - 1)) != 0)
        throw ConfigError("constellation size must be a power of two, got " + std::to_string(size));

    int bps = 0;
    while ((1 << bps) < size) ++bps;

    if (!((s == "qpsk" && size == 4) || (s == "qam" && bps % 2 == 0)))
        throw ConfigError("unsupported modulation '" + std::string(scheme) + "' with " + std::to_string(size) +
                          " points");

    // Square QAM with per-axis Gray coding; QPSK is the 4-point case.
    const int per_axis_bits = bps / 2;
    const int levels = 1 << per_axis_bits;
    const double scale = std::sqrt(2.0 * (size - 1) / 3.0);

    Constellation c;
    c.name = s == "qpsk" ? "qpsk" : "qam" + std::to_string(size);
    c.bits_per_symbol = bps;
    c.points.resize(size);
    c.labels.resize(size);
    for (int i = 0; i < levels; ++i) {
        for (int q = 0; q < levels; ++q) {
            const unsigned gi = static_cast<unsigned>(i ^ (i >> 1));
            const unsigned gq = static_cast<unsigned>(q ^ (q >> 1));
            const unsigned label = (gi << per_axis_bits) | gq;
            const double re = 2.0 * i - (levels - 1);
            const double im = 2.0 * q - (levels - 1);
            c.points[label] = cplx(re, im) / scale;
            c.labels[label] = label;
        }
    }
    c.bit_subsets.resize(bps);
    for (int b = 0; b < bps; ++b)
        for (int l = 0; l < size; ++l) c.bit_subsets[b][c.bit(l, b)].push_back(l);
    return c;
}

SpreadingMatrix build_partial_dft(int K, int M, std::mt19937_64& rng) {
    if (K < 1 || M < 1 || M > K)
        throw ConfigError("partial DFT needs 1 <= M <= K (M=" + std::to_string(M) + ", K=" + std::to_string(K) + ")");

    SpreadingMatrix S;
    S.selected_rows = draw_subset(K, M, rng);
    S.partial_dft = true;
    S.entries.resize(M, K);
    const double norm = 1.0 / std::sqrt(static_cast<double>(K));
    for (int m = 0; m < M; ++m) {
        const long long row = S.selected_rows[m];
        for (int k = 0; k < K; ++k) {
            const long long phase = (row * k) % K;
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(phase) / K;
            S.entries(m, k) = std::polar(norm, angle);
        }
    }
    return S;
}

SpreadingMatrix effective_sensing_matrix(const SpreadingMatrix& codes, const ChannelModel& channels) {
    if (channels.h.rows() != codes.entries.rows() || channels.h.cols() != codes.entries.cols() ||
        channels.h_hat.rows() != codes.entries.rows() || channels.h_hat.cols() != codes.entries.cols())
        throw ContractViolation("channel model dimensions do not match the spreading matrix");

    SpreadingMatrix out = codes;
    out.partial_dft = false;
    for (Eigen::Index k = 0; k < codes.entries.cols(); ++k) {
        for (Eigen::Index m = 0; m < codes.entries.rows(); ++m) {
            const cplx est = channels.h_hat(m, k);
            if (est == cplx(0.0, 0.0))
                throw SingularEstimateError("zero channel estimate at subcarrier " + std::to_string(m) +
                                            ", device " + std::to_string(k));
            out.entries(m, k) = channels.h(m, k) / est * codes.entries(m, k);
        }
    }
    return out;
}

ActivityPattern sample_activity(int K, int Ka, std::mt19937_64& rng) {
    if (Ka < 0 || Ka > K)
        throw ConfigError("active device count must satisfy 0 <= Ka <= K (Ka=" + std::to_string(Ka) + ")");
    ActivityPattern a;
    a.support = draw_subset(K, Ka, rng);
    a.indicators.assign(K, 0);
    for (int k : a.support) a.indicators[k] = 1;
    return a;
}

void Scenario::validate() const {
    if (K < 1) throw ConfigError("K must be positive");
    if (Ka < 0 || Ka > K) throw ConfigError("Ka must satisfy 0 <= Ka <= K");
    if (M < 1 || M > K) throw ConfigError("M must satisfy 1 <= M <= K");
    if (T < 1) throw ConfigError("T must be at least 1");
    if (constellation.size() < 2) throw ConfigError("constellation is empty");
    if (noise_var && !(*noise_var >= 0.0)) throw ConfigError("noise variance must be non-negative");
    if (std::isnan(snr_db)) throw ConfigError("snr_db is NaN");
}

double Scenario::noise_variance() const {
    if (noise_var) return *noise_var;
    if (Ka == 0 || (std::isinf(snr_db) && snr_db > 0)) return 0.0;
    const double snr = std::pow(10.0, snr_db / 10.0);
    const double signal = static_cast<double>(Ka) * M / K;
    return signal / (snr * M);
}

SpreadingMatrix scenario_spreading(const Scenario& scenario) {
    scenario.validate();
    auto rng = make_stream(scenario.master_seed, 0, StreamTag::SpreadingCode);
    return build_partial_dft(scenario.K, scenario.M, rng);
}

SlotData generate_slot(const Scenario& scenario, const SpreadingMatrix& S, std::uint64_t slot_index,
                       const ChannelCode* code) {
    scenario.validate();
    if (S.rows() != scenario.M || S.cols() != scenario.K)
        throw ContractViolation("spreading matrix dimensions do not match the scenario");

    const int K = scenario.K;
    const int T = scenario.T;
    const Constellation& cons = scenario.constellation;

    SlotData slot;
    slot.noise_var = scenario.noise_variance();
    auto activity_rng = make_stream(scenario.master_seed, slot_index, StreamTag::Activity);
    slot.activity = sample_activity(K, scenario.Ka, activity_rng);

    slot.X = CMatrix::Zero(K, T);
    slot.symbols = Eigen::MatrixXi::Constant(K, T, -1);
    slot.info_bits.assign(K, {});

    if (code == nullptr) {
        auto sym_rng = make_stream(scenario.master_seed, slot_index, StreamTag::Symbols);
        std::uniform_int_distribution<int> pick(0, cons.size() - 1);
        for (int k : slot.activity.support) {
            for (int t = 0; t < T; ++t) {
                const int l = pick(sym_rng);
                slot.symbols(k, t) = l;
                slot.X(k, t) = cons.points[l];
            }
        }
    } else {
        auto bit_rng = make_stream(scenario.master_seed, slot_index, StreamTag::InfoBits);
        std::bernoulli_distribution coin(0.5);
        const int capacity = T * cons.bits_per_symbol;
        const int info_len = code->info_length(capacity);
        for (int k : slot.activity.support) {
            auto& info = slot.info_bits[k];
            info.resize(info_len);
            for (auto& b : info) b = coin(bit_rng) ? 1 : 0;
            const auto framed = frame_bits(*code, info, capacity);
            for (int t = 0; t < T; ++t) {
                unsigned label = 0;
                for (int b = 0; b < cons.bits_per_symbol; ++b)
                    label = (label << 1) | framed[t * cons.bits_per_symbol + b];
                const int l = cons.index_of_label(label);
                slot.symbols(k, t) = l;
                slot.X(k, t) = cons.points[l];
            }
        }
    }

    slot.W = CMatrix::Zero(scenario.M, T);
    if (slot.noise_var > 0.0) {
        auto noise_rng = make_stream(scenario.master_seed, slot_index, StreamTag::Noise);
        std::normal_distribution<double> gauss(0.0, std::sqrt(slot.noise_var / 2.0));
        for (int t = 0; t < T; ++t)
            for (int m = 0; m < scenario.M; ++m) slot.W(m, t) = cplx(gauss(noise_rng), gauss(noise_rng));
    }
    slot.Y = S.entries * slot.X + slot.W;
    return slot;
}

}  // namespace jadd
