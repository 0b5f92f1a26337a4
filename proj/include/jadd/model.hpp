#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jadd/types.hpp"

namespace jadd {

class ChannelCode;

/// Unit-average-energy, Gray-labelled symbol alphabet.
///
/// Bit position 0 is the most significant bit of a label. `bit_subsets[b][v]`
/// lists the point indices whose label has value `v` at position `b`.
struct Constellation {
    std::string name;
    std::vector<cplx> points;
    std::vector<unsigned> labels;
    int bits_per_symbol = 0;
    std::vector<std::array<std::vector<int>, 2>> bit_subsets;

    int size() const { return static_cast<int>(points.size()); }

    /// Point index carrying `label`.
    int index_of_label(unsigned label) const;

    /// Index of the point closest to `x` in Euclidean distance.
    int nearest(cplx x) const;

    /// Value (0/1) of bit `b` in the label of point `index`.
    int bit(int index, int b) const {
        return static_cast<int>((labels[index] >> (bits_per_symbol - 1 - b)) & 1U);
    }

    /// Maps `bits_per_symbol * n` bits to n symbols.
    std::vector<cplx> modulate(std::span<const std::uint8_t> bits) const;
};

Constellation make_constellation(int size, std::string_view scheme);

/// M x K sensing operator built from M distinct rows of the unitary K-point DFT.
struct SpreadingMatrix {
    CMatrix entries;
    std::vector<int> selected_rows;
    /// Entries are exactly the selected DFT rows, so products can go through an FFT.
    bool partial_dft = false;

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
};

SpreadingMatrix build_partial_dft(int K, int M, std::mt19937_64& rng);

/// S X, via FFT for partial-DFT matrices and a dense product otherwise.
CMatrix sense(const SpreadingMatrix& S, const CMatrix& X);
/// S^H Z, same dispatch as sense().
CMatrix sense_adjoint(const SpreadingMatrix& S, const CMatrix& Z);

/// Per-device diagonal subchannels (M x K) and their estimates at the device.
struct ChannelModel {
    CMatrix h;
    CMatrix h_hat;
};

/// Pre-equalized sensing matrix; column k becomes diag(h_k) diag(h_hat_k)^-1 s_k.
SpreadingMatrix effective_sensing_matrix(const SpreadingMatrix& codes, const ChannelModel& channels);

struct ActivityPattern {
    std::vector<std::uint8_t> indicators;
    std::vector<int> support;
};

ActivityPattern sample_activity(int K, int Ka, std::mt19937_64& rng);

struct Scenario {
    int K = 500;
    int Ka = 50;
    int M = 70;
    int T = 10;
    double snr_db = 10.0;
    Constellation constellation = make_constellation(4, "qpsk");
    std::uint64_t master_seed = 1;
    /// Overrides the SNR-derived noise variance when set.
    std::optional<double> noise_var;

    void validate() const;

    /// sigma^2 such that E||S x_t||^2 / E||w_t||^2 = SNR, with E||S x_t||^2 = Ka M / K.
    double noise_variance() const;
};

/// Spreading matrix fixed for the whole scenario (pre-assigned codes).
SpreadingMatrix scenario_spreading(const Scenario& scenario);

struct SlotData {
    CMatrix X;
    CMatrix Y;
    CMatrix W;
    ActivityPattern activity;
    double noise_var = 0.0;
    /// Constellation index per entry of X, -1 for inactive rows.
    Eigen::MatrixXi symbols;
    /// Information bits per device; empty for inactive devices or uncoded slots.
    std::vector<std::vector<std::uint8_t>> info_bits;
};

/// Draws one slot. Streams are derived from (scenario.master_seed, slot_index).
/// With `code`, each active row carries the modulated codeword of random info bits.
SlotData generate_slot(const Scenario& scenario, const SpreadingMatrix& S, std::uint64_t slot_index,
                       const ChannelCode* code = nullptr);

}  // namespace jadd
