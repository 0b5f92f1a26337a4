#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "jadd/errors.hpp"
#include "jadd/model.hpp"
#include "jadd/rng.hpp"

using namespace jadd;

TEST_CASE("qpsk points and labels") {
    const Constellation c = make_constellation(4, "qpsk");
    REQUIRE(c.size() == 4);
    CHECK(c.bits_per_symbol == 2);
    double energy = 0.0;
    for (const cplx& a : c.points) {
        CHECK(std::abs(std::abs(a.real()) - 1.0 / std::sqrt(2.0)) < 1e-15);
        CHECK(std::abs(std::abs(a.imag()) - 1.0 / std::sqrt(2.0)) < 1e-15);
        energy += std::norm(a);
    }
    CHECK(std::abs(energy / 4.0 - 1.0) < 1e-12);
    for (int b = 0; b < 2; ++b) {
        CHECK(c.bit_subsets[b][0].size() == 2);
        CHECK(c.bit_subsets[b][1].size() == 2);
    }
}

TEST_CASE("qam alphabets have unit energy, distinct points and Gray neighbours") {
    for (int L : {16, 64}) {
        const Constellation c = make_constellation(L, "qam");
        double energy = 0.0;
        for (const cplx& a : c.points) energy += std::norm(a);
        CHECK(std::abs(energy / L - 1.0) < 1e-12);
        std::set<unsigned> labels(c.labels.begin(), c.labels.end());
        CHECK(static_cast<int>(labels.size()) == L);
        for (int b = 0; b < c.bits_per_symbol; ++b) CHECK(static_cast<int>(c.bit_subsets[b][0].size()) == L / 2);

        // nearest neighbours differ in exactly one bit
        double dmin = 1e9;
        for (int i = 0; i < L; ++i)
            for (int j = i + 1; j < L; ++j) dmin = std::min(dmin, std::abs(c.points[i] - c.points[j]));
        for (int i = 0; i < L; ++i)
            for (int j = i + 1; j < L; ++j)
                if (std::abs(std::abs(c.points[i] - c.points[j]) - dmin) < 1e-9)
                    CHECK(std::popcount(c.labels[i] ^ c.labels[j]) == 1);
    }
    CHECK_THROWS_AS(make_constellation(6, "qam"), ConfigError);
    CHECK_THROWS_AS(make_constellation(4, "psk8"), ConfigError);
}

TEST_CASE("modulate follows the label map") {
    const Constellation c = make_constellation(16, "qam");
    std::vector<std::uint8_t> bits{1, 0, 1, 1, 0, 0, 0, 0};
    const auto sym = c.modulate(bits);
    REQUIRE(sym.size() == 2);
    CHECK(sym[0] == c.points[c.index_of_label(0b1011)]);
    CHECK(sym[1] == c.points[c.index_of_label(0)]);
    CHECK(c.nearest(sym[0] * 1.01) == c.index_of_label(0b1011));
    std::vector<std::uint8_t> odd{1, 0, 1};
    CHECK_THROWS_AS(c.modulate(odd), ContractViolation);
}

TEST_CASE("full DFT is unitary") {
    auto rng = make_stream(1, 0, StreamTag::SpreadingCode);
    const SpreadingMatrix S = build_partial_dft(4, 4, rng);
    CHECK((S.entries * S.entries.adjoint() - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial DFT shape and entries") {
    auto rng = make_stream(1, 0, StreamTag::SpreadingCode);
    const SpreadingMatrix S = build_partial_dft(500, 70, rng);
    CHECK(S.rows() == 70);
    CHECK(S.cols() == 500);
    std::set<int> rows(S.selected_rows.begin(), S.selected_rows.end());
    CHECK(rows.size() == 70);
    CHECK(std::is_sorted(S.selected_rows.begin(), S.selected_rows.end()));
    CHECK((S.entries.cwiseAbs().array() - 1.0 / std::sqrt(500.0)).abs().maxCoeff() < 1e-12);

    auto rng2 = make_stream(2, 0, StreamTag::SpreadingCode);
    const SpreadingMatrix S3 = build_partial_dft(8, 3, rng2);
    CHECK((S3.entries * S3.entries.adjoint() - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(build_partial_dft(8, 9, rng2), ConfigError);
}

TEST_CASE("FFT operator agrees with the dense product") {
    for (auto [K, M] : {std::pair{500, 70}, std::pair{97, 13}, std::pair{16, 16}}) {
        auto rng = make_stream(3, K, StreamTag::SpreadingCode);
        const SpreadingMatrix S = build_partial_dft(K, M, rng);
        REQUIRE(S.partial_dft);
        const CMatrix X = CMatrix::Random(K, 5);
        const CMatrix Z = CMatrix::Random(M, 5);
        CHECK((sense(S, X) - S.entries * X).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((sense_adjoint(S, Z) - S.entries.adjoint() * Z).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("effective sensing matrix") {
    auto rng = make_stream(5, 0, StreamTag::SpreadingCode);
    const SpreadingMatrix S = build_partial_dft(12, 5, rng);

    ChannelModel same;
    same.h = CMatrix::Random(5, 12);
    same.h_hat = same.h;
    const SpreadingMatrix E = effective_sensing_matrix(S, same);
    CHECK((E.entries - S.entries).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_FALSE(E.partial_dft);

    ChannelModel doubled;
    doubled.h = CMatrix::Constant(5, 12, 2.0);
    doubled.h_hat = CMatrix::Ones(5, 12);
    CHECK((effective_sensing_matrix(S, doubled).entries - 2.0 * S.entries).cwiseAbs().maxCoeff() < 1e-15);

    ChannelModel general;
    general.h = CMatrix::Random(5, 12);
    general.h_hat = CMatrix::Random(5, 12);
    const SpreadingMatrix G = effective_sensing_matrix(S, general);
    for (int m = 0; m < 5; ++m)
        for (int k = 0; k < 12; ++k)
            CHECK(std::abs(G.entries(m, k) - general.h(m, k) / general.h_hat(m, k) * S.entries(m, k)) < 1e-12);

    // sense() on a non-DFT operator falls back to the dense product.
    const CMatrix X = CMatrix::Random(12, 2);
    CHECK((sense(G, X) - G.entries * X).cwiseAbs().maxCoeff() < 1e-14);

    ChannelModel zero = general;
    zero.h_hat(2, 3) = 0.0;
    CHECK_THROWS_AS(effective_sensing_matrix(S, zero), SingularEstimateError);
}

TEST_CASE("activity sampling") {
    auto rng = make_stream(9, 0, StreamTag::Activity);
    const ActivityPattern a = sample_activity(500, 50, rng);
    CHECK(a.support.size() == 50);
    CHECK(std::accumulate(a.indicators.begin(), a.indicators.end(), 0) == 50);
    for (int k : a.support) CHECK(a.indicators[k] == 1);
    CHECK(std::is_sorted(a.support.begin(), a.support.end()));

    auto empty_rng = make_stream(9, 1, StreamTag::Activity);
    CHECK(sample_activity(5, 0, empty_rng).support.empty());

    auto r1 = make_stream(9, 0, StreamTag::Activity);
    CHECK(sample_activity(500, 50, r1).support == a.support);
    CHECK_THROWS_AS(sample_activity(5, 6, r1), ConfigError);
}

TEST_CASE("seed derivation is order independent") {
    CHECK(derive_seed(1, 2, StreamTag::Noise) == derive_seed(1, 2, StreamTag::Noise));
    CHECK(derive_seed(1, 2, StreamTag::Noise) != derive_seed(1, 2, StreamTag::Symbols));
    CHECK(derive_seed(1, 2, StreamTag::Noise) != derive_seed(1, 3, StreamTag::Noise));
    CHECK(derive_seed(1, 2, StreamTag::Noise) != derive_seed(2, 2, StreamTag::Noise));
}

TEST_CASE("slot generation") {
    Scenario sc;
    const SpreadingMatrix S = scenario_spreading(sc);
    const SlotData slot = generate_slot(sc, S, 4);
    CHECK(slot.X.rows() == 500);
    CHECK(slot.Y.rows() == 70);
    CHECK((slot.Y - (S.entries * slot.X + slot.W)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(slot.noise_var == doctest::Approx(50.0 / (500.0 * 10.0)));
    for (int k = 0; k < 500; ++k) {
        const bool active = slot.activity.indicators[k];
        CHECK((slot.X.row(k).cwiseAbs().maxCoeff() > 0) == active);
        for (int t = 0; t < sc.T; ++t) {
            if (active)
                CHECK(slot.X(k, t) == sc.constellation.points[slot.symbols(k, t)]);
            else
                CHECK(slot.symbols(k, t) == -1);
        }
    }

    const SlotData again = generate_slot(sc, S, 4);
    CHECK(again.Y == slot.Y);
    CHECK(generate_slot(sc, S, 5).Y != slot.Y);

    Scenario silent = sc;
    silent.Ka = 0;
    silent.noise_var = 0.0;
    CHECK(generate_slot(silent, S, 0).Y.cwiseAbs().maxCoeff() == 0.0);

    Scenario noiseless = sc;
    noiseless.snr_db = std::numeric_limits<double>::infinity();
    const SlotData clean = generate_slot(noiseless, S, 1);
    CHECK(clean.noise_var == 0.0);
    CHECK((clean.Y - S.entries * clean.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empirical SNR over many slots") {
    Scenario sc;
    sc.K = 100;
    sc.Ka = 10;
    sc.M = 20;
    sc.T = 4;
    sc.snr_db = 10.0;
    const SpreadingMatrix S = scenario_spreading(sc);
    double signal = 0.0, noise = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const SlotData slot = generate_slot(sc, S, i);
        signal += (S.entries * slot.X).squaredNorm();
        noise += slot.W.squaredNorm();
    }
    CHECK(std::abs(10.0 * std::log10(signal / noise) - 10.0) < 0.1);
}

TEST_CASE("scenario validation") {
    Scenario sc;
    sc.Ka = 600;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc = Scenario{};
    sc.M = 0;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc = Scenario{};
    sc.Ka = 0;
    CHECK(sc.noise_variance() == 0.0);
    sc = Scenario{};
    sc.noise_var = 0.5;
    CHECK(sc.noise_variance() == 0.5);
}
