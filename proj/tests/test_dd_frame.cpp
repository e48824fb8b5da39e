#include <doctest.h>

#include <bit>
#include <random>

#include "oracles.hpp"
#include "otfs/dd_frame.hpp"

using namespace otfs;

namespace {

const double c4 = 1.0 / std::sqrt(2.0);

double max_abs(const CMatrix& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("constellation has unit energy and Gray labels") {
  for (int q : {4, 16, 64}) {
    const Constellation cons(q);
    double energy = 0.0;
    for (const auto& p : cons.points()) energy += std::norm(p);
    CHECK(energy / q == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < q; ++a)
      for (int b = a + 1; b < q; ++b) CHECK(cons.point(a) != cons.point(b));
    // Nearest neighbours along an axis differ in exactly one bit.
    const double step = 2.0 * cons.amplitude();
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b)
        if (std::abs(std::abs(cons.point(a) - cons.point(b)) - step) < 1e-12)
          CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
  }
  CHECK(Constellation(4).amplitude() == doctest::Approx(c4));
  CHECK_THROWS_AS(Constellation(8), ParameterError);
  CHECK_THROWS_AS(Constellation(2), ParameterError);
}

TEST_CASE("map_bits") {
  const Constellation cons(4);
  SUBCASE("00 maps to +c+jc") {
    const std::vector<std::uint8_t> bits{0, 0};
    const DDGrid g = map_bits(bits, cons, 1, 1);
    CHECK(g.entries(0, 0).real() == doctest::Approx(c4));
    CHECK(g.entries(0, 0).imag() == doctest::Approx(c4));
  }
  SUBCASE("all-zero stream gives identical points") {
    const std::vector<std::uint8_t> bits(2 * 12 * 7, 0);
    const DDGrid g = map_bits(bits, cons, 12, 7);
    CHECK(max_abs(g.entries.array() - g.entries(0, 0)) == 0.0);
  }
  SUBCASE("matches a per-group table lookup, column-major fill") {
    std::mt19937_64 rng(7);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> bits(168);
    for (auto& b : bits) b = coin(rng);
    const DDGrid g = map_bits(bits, cons, 12, 7);
    const cplx table[4] = {{c4, c4}, {c4, -c4}, {-c4, c4}, {-c4, -c4}};
    for (int s = 0; s < 84; ++s) {
      const cplx expect = table[bits[2 * s] * 2 + bits[2 * s + 1]];
      CHECK(std::abs(g.entries(s % 12, s / 12) - expect) < 1e-15);
    }
  }
  SUBCASE("16-QAM Gray axis table") {
    const Constellation q16(16);
    const double u = q16.amplitude();
    const double axis[4] = {3 * u, u, -3 * u, -u};  // labels 00, 01, 10, 11
    for (int label = 0; label < 16; ++label) {
      const cplx p = q16.point(label);
      CHECK(p.real() == doctest::Approx(axis[label >> 2]));
      CHECK(p.imag() == doctest::Approx(axis[label & 3]));
    }
  }
  SUBCASE("length mismatch") {
    const std::vector<std::uint8_t> bits(5, 0);
    CHECK_THROWS_AS(map_bits(bits, cons, 1, 2), InputSizeError);
  }
}

TEST_CASE("isfft / sfft") {
  std::mt19937_64 rng(11);
  SUBCASE("zeros and impulse") {
    CHECK(max_abs(isfft(DDGrid(4, 3)).entries) == 0.0);
    CHECK(max_abs(sfft(DDGrid(4, 3)).entries) == 0.0);
    DDGrid impulse(4, 2);
    impulse.entries(0, 0) = 1.0;
    const DDGrid tf = isfft(impulse);
    CHECK(max_abs(tf.entries.array() - 1.0 / std::sqrt(8.0)) < 1e-15);
  }
  SUBCASE("random 4x2 against the double sum") {
    const CMatrix X = oracle::random_cmatrix(4, 2, rng);
    CHECK(max_abs(isfft(DDGrid(X)).entries - oracle::isfft_sum(X)) < 1e-12);
    CHECK(max_abs(sfft(DDGrid(X)).entries - oracle::sfft_sum(X)) < 1e-12);
  }
  SUBCASE("matrix and scalar forms agree up to 16x8") {
    for (int M : {1, 3, 8, 16})
      for (int N : {1, 2, 5, 8}) {
        const CMatrix X = oracle::random_cmatrix(M, N, rng);
        CHECK(max_abs(isfft(DDGrid(X)).entries - oracle::isfft_sum(X)) < 1e-10);
      }
  }
  SUBCASE("inverse pair") {
    for (int rep = 0; rep < 50; ++rep) {
      const CMatrix X = oracle::random_cmatrix(12, 7, rng);
      CHECK((sfft(isfft(DDGrid(X))).entries - X).norm() < 1e-12);
    }
  }
}

TEST_CASE("modulate / demodulate") {
  std::mt19937_64 rng(13);
  SUBCASE("N = 1 is the identity") {
    const CMatrix X = oracle::random_cmatrix(5, 1, rng);
    const TimeSignal s = modulate(DDGrid(X));
    CHECK(max_abs(s.samples - DDGrid(X).vectorized()) == 0.0);
  }
  SUBCASE("isometry and inverse") {
    for (int rep = 0; rep < 50; ++rep) {
      const CMatrix X = oracle::random_cmatrix(8, 4, rng);
      const DDGrid g(X);
      const TimeSignal s = modulate(g);
      CHECK(std::abs(s.samples.squaredNorm() - g.vectorized().squaredNorm()) < 1e-12 * g.vectorized().squaredNorm());
      CHECK((demodulate(s).vectorized() - g.vectorized()).norm() < 1e-12);
    }
  }
  SUBCASE("per-sample form") {
    const CMatrix X = oracle::random_cmatrix(4, 3, rng);
    const DDGrid g(X);
    CHECK(max_abs(modulate(g).samples - oracle::modulate_per_sample(g.vectorized(), 4, 3)) < 1e-12);
  }
  SUBCASE("matrix-form receive path") {
    const CVector r = oracle::random_cmatrix(24, 1, rng);
    const TimeSignal sig{r, 6, 4};
    CHECK(max_abs(demodulate(sig).vectorized() - oracle::demodulate_matrix_path(r, 6, 4)) < 1e-12);
    CHECK(max_abs(demodulate(TimeSignal{CVector::Zero(24), 6, 4}).entries) == 0.0);
  }
  SUBCASE("wrong length") {
    CHECK_THROWS_AS(demodulate(TimeSignal{CVector::Zero(5), 2, 3}), InputSizeError);
  }
}

TEST_CASE("hard_demap") {
  const Constellation cons(4);
  std::mt19937_64 rng(17);
  SUBCASE("exact points round-trip bits") {
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> bits(2 * 24);
    for (auto& b : bits) b = coin(rng);
    const DDGrid g = map_bits(bits, cons, 6, 4);
    const HardDecision d = hard_demap(stack_real(g.vectorized()), cons, 6, 4);
    CHECK(d.bits == bits);
    CHECK(max_abs(d.grid.entries - g.entries) == 0.0);
  }
  SUBCASE("nearest neighbour") {
    RVector x(2);
    x << 0.9 * c4, 0.6 * c4;
    const HardDecision d = hard_demap(x, cons, 1, 1);
    CHECK(d.grid.entries(0, 0) == cplx(c4, c4));
    CHECK(d.labels[0] == 0);
  }
  SUBCASE("ties go to the lexicographically smallest point") {
    RVector x = RVector::Zero(2);
    CHECK(hard_demap(x, cons, 1, 1).grid.entries(0, 0) == cplx(-c4, -c4));
  }
  SUBCASE("matches exhaustive search for 4- and 16-QAM") {
    for (int q : {4, 16}) {
      const Constellation k(q);
      std::normal_distribution<double> g(0.0, 0.8);
      for (int rep = 0; rep < 2000; ++rep) {
        const cplx z(g(rng), g(rng));
        int best = 0;
        for (int a = 1; a < q; ++a) {
          const double da = std::abs(z - k.point(a)), db = std::abs(z - k.point(best));
          if (da < db) best = a;
        }
        CHECK(k.nearest_label(z) == best);
      }
    }
  }
  SUBCASE("length check") { CHECK_THROWS_AS(hard_demap(RVector::Zero(3), cons, 1, 1), InputSizeError); }
}

TEST_CASE("vectorize round-trip and real stacking") {
  std::mt19937_64 rng(19);
  const CMatrix X = oracle::random_cmatrix(5, 3, rng);
  const DDGrid g(X);
  CHECK(max_abs(DDGrid::devectorize(g.vectorized(), 5, 3).entries - X) == 0.0);
  CHECK(g.vectorized()[7] == X(2, 1));
  CHECK(max_abs(unstack_real(stack_real(g.vectorized())) - g.vectorized()) == 0.0);
  CHECK_THROWS_AS(DDGrid::devectorize(g.vectorized(), 4, 3), InputSizeError);
}
