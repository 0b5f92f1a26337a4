#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jadd/model.hpp"

namespace jadd {

/// Pluggable forward error correction used by the coded / SIC pipeline.
///
/// LLRs follow the ln P(b=0)/P(b=1) convention: positive favours bit 0.
class ChannelCode {
public:
    virtual ~ChannelCode() = default;

    virtual std::string name() const = 0;
    /// Information bits per coded bit, excluding termination.
    virtual double rate() const = 0;
    /// Termination overhead, counted in information-bit positions.
    virtual int tail_bits() const = 0;
    virtual int encoded_length(int info_len) const = 0;
    virtual std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const = 0;
    /// `llr.size()` must equal `encoded_length(info_len)`.
    virtual std::vector<std::uint8_t> soft_decode(std::span<const double> llr, int info_len) const = 0;

    /// Information bits carried by `capacity` coded-bit slots:
    /// floor(capacity * rate) - tail_bits, clamped at zero.
    int info_length(int capacity) const;
};

class UncodedCode final : public ChannelCode {
public:
    std::string name() const override { return "none"; }
    double rate() const override { return 1.0; }
    int tail_bits() const override { return 0; }
    int encoded_length(int info_len) const override { return info_len; }
    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const override;
    std::vector<std::uint8_t> soft_decode(std::span<const double> llr, int info_len) const override;
};

/// Zero-terminated feed-forward convolutional code, rate 1/n, decoded with a
/// soft-input max-log Viterbi search.
class ConvolutionalCode final : public ChannelCode {
public:
    /// Generators in octal notation as integers (e.g. {07, 07, 05}), all of
    /// degree < constraint_length.
    ConvolutionalCode(int constraint_length, std::vector<unsigned> generators);

    /// Rate 1/3, constraint length 3, generators (7, 7, 5) octal.
    static ConvolutionalCode rate_third_k3();

    std::string name() const override;
    double rate() const override { return 1.0 / static_cast<double>(generators_.size()); }
    int tail_bits() const override { return constraint_length_ - 1; }
    int encoded_length(int info_len) const override;
    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const override;
    std::vector<std::uint8_t> soft_decode(std::span<const double> llr, int info_len) const override;

    int constraint_length() const { return constraint_length_; }
    const std::vector<unsigned>& generators() const { return generators_; }

private:
    int constraint_length_;
    std::vector<unsigned> generators_;
};

/// Known names: "none", "conv13".
std::unique_ptr<ChannelCode> make_code(std::string_view name);

/// Encodes `info` and zero-pads the codeword to `capacity` bits.
std::vector<std::uint8_t> frame_bits(const ChannelCode& code, std::span<const std::uint8_t> info, int capacity);

/// Re-encodes and re-modulates decoded information bits into one length-T symbol row.
std::vector<cplx> reconstruct_device(std::span<const std::uint8_t> info_bits, const ChannelCode& code,
                                     const Constellation& constellation, int T);

}  // namespace jadd
