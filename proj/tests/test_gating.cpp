#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "redreg/gating.hpp"
#include "redreg/rng.hpp"

using namespace redreg;

TEST_CASE("similarity of identical, opposite and orthogonal rows") {
  Matrix za{{1.0, 0.0}, {0.0, 2.0}, {3.0, 3.0}};
  CHECK(coinfo_similarity(za, za, 1e-8) == doctest::Approx(1.0).epsilon(1e-12));

  const Matrix neg = -1.0 * za + Matrix(3, 2);
  CHECK(coinfo_similarity(za, neg, 1e-8) == doctest::Approx(-1.0).epsilon(1e-12));

  Matrix a{{1.0, 0.0}, {1.0, 0.0}};
  Matrix b{{0.0, 1.0}, {0.0, 5.0}};
  CHECK(coinfo_similarity(a, b, 1e-8) == doctest::Approx(0.0));

  // mean over rows: one aligned pair, one orthogonal pair
  Matrix c{{1.0, 0.0}, {1.0, 0.0}};
  Matrix d{{2.0, 0.0}, {0.0, 1.0}};
  CHECK(coinfo_similarity(c, d, 1e-8) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("similarity ignores per-row positive scaling") {
  RngState rng = fork_stream(31, 0);
  const Matrix za = sample_gaussian(rng, 10, 6, 1.0);
  const Matrix zv = sample_gaussian(rng, 10, 6, 1.0);
  Matrix scaled = za;
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    const double c = 0.1 + static_cast<double>(i);
    for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= c;
  }
  CHECK(coinfo_similarity(scaled, zv, 1e-8) ==
        doctest::Approx(coinfo_similarity(za, zv, 1e-8)).epsilon(1e-12));
}

TEST_CASE("near-zero rows contribute zero similarity") {
  Matrix za{{1.0, 0.0}, {0.0, 0.0}};
  Matrix zv{{1.0, 0.0}, {1.0, 0.0}};
  CHECK(coinfo_similarity(za, zv, 1e-8) == doctest::Approx(0.5));
}

TEST_CASE("similarity dimension errors point at the projection helper") {
  Matrix za(2, 3);
  Matrix zv(2, 4);
  try {
    coinfo_similarity(za, zv, 1e-8);
    FAIL("expected dimension error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("project") != std::string::npos);
  }
  CHECK_THROWS_AS(coinfo_similarity(Matrix(2, 3), Matrix(3, 3), 1e-8), std::invalid_argument);
}

TEST_CASE("projection matrix has the declared shape and scale") {
  const Matrix p = coinfo_projection(16, 4, 11);
  REQUIRE(p.rows() == 16);
  REQUIRE(p.cols() == 4);
  CHECK(p == coinfo_projection(16, 4, 11));
  CHECK_FALSE(p == coinfo_projection(16, 4, 12));
  CHECK_THROWS_AS(coinfo_projection(4, 16, 1), std::invalid_argument);
  CHECK_THROWS_AS(coinfo_projection(4, 0, 1), std::invalid_argument);

  // entries are N(0, 1/to_dim): sample variance over a big draw
  const Matrix big = coinfo_projection(400, 10, 5);
  double sum = 0.0, sum2 = 0.0;
  for (double v : big.values()) {
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(big.values().size());
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(var == doctest::Approx(1.0 / 10.0).epsilon(0.1));
}

TEST_CASE("threshold ramp hits both endpoints exactly") {
  GateConfig cfg;  // 0.2 -> 0.5 over 30 epochs
  CHECK(threshold_schedule(0, cfg) == 0.2);
  CHECK(threshold_schedule(cfg.total_epochs, cfg) == 0.5);
  CHECK(threshold_schedule(15, cfg) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(threshold_schedule(10, cfg) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(threshold_schedule(31, cfg), std::invalid_argument);
  GateConfig zero = cfg;
  zero.total_epochs = 0;
  CHECK_THROWS_AS(threshold_schedule(0, zero), std::invalid_argument);
}

TEST_CASE("gate opens only when all three conditions hold") {
  const double R = 0.15;
  for (int dominant_flag : {0, 1})
    for (int above : {0, 1})
      for (int simflag : {0, 1}) {
        const int modality = 0;
        const int dominant = dominant_flag ? 0 : 1;
        const double score = above ? R + 0.01 : R - 0.01;
        const double tau = 0.3;
        const double sim = simflag ? tau + 0.05 : tau - 0.05;
        const bool open = gate_coefficient(modality, dominant, score, sim, tau, R);
        CHECK(open == (dominant_flag && above && simflag));
      }
}

TEST_CASE("gate comparisons are strict for the score and non-strict for similarity") {
  const double R = 0.15;
  CHECK_FALSE(gate_coefficient(0, 0, R, 0.9, 0.3, R));        // r == R stays closed
  CHECK(gate_coefficient(0, 0, R + 1e-12, 0.3, 0.3, R));      // sim == tau opens
  CHECK_FALSE(gate_coefficient(1, 0, 1.0, 1.0, 0.3, R));      // not the dominant branch
  CHECK(gate_coefficient(1, 1, 1.0, 1.0, 0.3, R));
  CHECK_FALSE(gate_coefficient(0, 0, 1.0, 1.0, 0.3,
                               std::numeric_limits<double>::infinity()));
}

TEST_CASE("gate rejects non-finite decision inputs") {
  CHECK_THROWS_AS(gate_coefficient(0, 0, std::nan(""), 0.5, 0.3, 0.15),
                  std::invalid_argument);
  CHECK_THROWS_AS(gate_coefficient(0, 0, 0.5, std::nan(""), 0.3, 0.15),
                  std::invalid_argument);
}
