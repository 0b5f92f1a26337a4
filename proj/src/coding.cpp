#include "jadd/coding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "jadd/errors.hpp"

namespace jadd {

int ChannelCode::info_length(int capacity) const {
    if (capacity < 0) throw ContractViolation("capacity must be non-negative");
    const int raw = static_cast<int>(std::floor(capacity * rate() + 1e-9)) - tail_bits();
    return std::max(raw, 0);
}

std::vector<std::uint8_t> UncodedCode::encode(std::span<const std::uint8_t> info) const {
    return {info.begin(), info.end()};
}

std::vector<std::uint8_t> UncodedCode::soft_decode(std::span<const double> llr, int info_len) const {
    if (static_cast<int>(llr.size()) != info_len) throw ContractViolation("uncoded: llr length mismatch");
    std::vector<std::uint8_t> out(llr.size());
    for (std::size_t i = 0; i < llr.size(); ++i) out[i] = llr[i] < 0.0 ? 1 : 0;
    return out;
}

ConvolutionalCode::ConvolutionalCode(int constraint_length, std::vector<unsigned> generators)
    : constraint_length_(constraint_length), generators_(std::move(generators)) {
    if (constraint_length_ < 1 || constraint_length_ > 16) throw ConfigError("constraint length out of range");
    if (generators_.empty()) throw ConfigError("convolutional code needs at least one generator");
    for (unsigned g : generators_)
        if (g == 0 || (g >> constraint_length_) != 0)
            throw ConfigError("generator degree exceeds the constraint length");
}

ConvolutionalCode ConvolutionalCode::rate_third_k3() { return ConvolutionalCode(3, {07, 07, 05}); }

std::string ConvolutionalCode::name() const {
    return constraint_length_ == 3 && generators_ == std::vector<unsigned>{07, 07, 05} ? "conv13"
                                                                                        : "conv";
}

int ConvolutionalCode::encoded_length(int info_len) const {
    return (info_len + tail_bits()) * static_cast<int>(generators_.size());
}

// Register layout: bit (K-1) holds the newest input, bit 0 the oldest, so a
// generator's MSB taps the current bit.
std::vector<std::uint8_t> ConvolutionalCode::encode(std::span<const std::uint8_t> info) const {
    const int n = static_cast<int>(generators_.size());
    const int total = static_cast<int>(info.size()) + tail_bits();
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(total) * n);
    unsigned reg = 0;
    for (int i = 0; i < total; ++i) {
        const unsigned bit = i < static_cast<int>(info.size()) ? (info[i] & 1U) : 0U;
        reg = (reg >> 1) | (bit << (constraint_length_ - 1));
        for (unsigned g : generators_) out.push_back(static_cast<std::uint8_t>(std::popcount(reg & g) & 1));
    }
    return out;
}

std::vector<std::uint8_t> ConvolutionalCode::soft_decode(std::span<const double> llr, int info_len) const {
    if (info_len < 0) throw ContractViolation("negative info length");
    if (static_cast<int>(llr.size()) != encoded_length(info_len))
        throw ContractViolation("convolutional: llr length does not match the encoded length");

    const int n = static_cast<int>(generators_.size());
    const int memory = constraint_length_ - 1;
    const int states = 1 << memory;
    const int steps = info_len + memory;
    constexpr double kNeg = -std::numeric_limits<double>::infinity();

    // Branch outputs for (state, input): the register is (input << memory) | state.
    std::vector<unsigned> outputs(static_cast<std::size_t>(states) * 2);
    for (int s = 0; s < states; ++s)
        for (unsigned b = 0; b < 2; ++b) {
            const unsigned reg = (b << memory) | static_cast<unsigned>(s);
            unsigned word = 0;
            for (int j = 0; j < n; ++j) word |= (std::popcount(reg & generators_[j]) & 1U) << j;
            outputs[s * 2 + b] = word;
        }

    std::vector<double> metric(states, kNeg), next(states);
    metric[0] = 0.0;
    std::vector<std::uint8_t> survivor(static_cast<std::size_t>(steps) * states);

    for (int i = 0; i < steps; ++i) {
        std::fill(next.begin(), next.end(), kNeg);
        const double* l = llr.data() + static_cast<std::size_t>(i) * n;
        const unsigned max_input = i < info_len ? 1U : 0U;
        for (int s = 0; s < states; ++s) {
            if (metric[s] == kNeg) continue;
            for (unsigned b = 0; b <= max_input; ++b) {
                const unsigned word = outputs[s * 2 + b];
                // Correlation metric: +llr/2 for bit 0, -llr/2 for bit 1.
                double gain = 0.0;
                for (int j = 0; j < n; ++j) gain += ((word >> j) & 1U) ? -l[j] : l[j];
                const double cand = metric[s] + 0.5 * gain;
                const int ns = static_cast<int>(((b << memory) | static_cast<unsigned>(s)) >> 1);
                if (cand > next[ns]) {
                    next[ns] = cand;
                    // Remember the bit shifted out so the predecessor can be rebuilt.
                    survivor[static_cast<std::size_t>(i) * states + ns] = static_cast<std::uint8_t>(s & 1);
                }
            }
        }
        metric.swap(next);
    }

    std::vector<std::uint8_t> decoded(steps);
    int state = 0;
    for (int i = steps - 1; i >= 0; --i) {
        decoded[i] = static_cast<std::uint8_t>((state >> (memory - 1)) & 1);
        const unsigned dropped = survivor[static_cast<std::size_t>(i) * states + state];
        state = static_cast<int>(((static_cast<unsigned>(state) << 1) | dropped) & (states - 1));
    }
    decoded.resize(info_len);
    return decoded;
}

std::unique_ptr<ChannelCode> make_code(std::string_view name) {
    if (name == "none") return std::make_unique<UncodedCode>();
    if (name == "conv13") return std::make_unique<ConvolutionalCode>(ConvolutionalCode::rate_third_k3());
    throw ConfigError("unknown channel code '" + std::string(name) + "'");
}

std::vector<std::uint8_t> frame_bits(const ChannelCode& code, std::span<const std::uint8_t> info, int capacity) {
    auto coded = code.encode(info);
    if (static_cast<int>(coded.size()) > capacity)
        throw ContractViolation("codeword of " + std::to_string(coded.size()) + " bits exceeds capacity " +
                                std::to_string(capacity));
    coded.resize(capacity, 0);
    return coded;
}

std::vector<cplx> reconstruct_device(std::span<const std::uint8_t> info_bits, const ChannelCode& code,
                                     const Constellation& constellation, int T) {
    const auto framed = frame_bits(code, info_bits, T * constellation.bits_per_symbol);
    return constellation.modulate(framed);
}

}  // namespace jadd
