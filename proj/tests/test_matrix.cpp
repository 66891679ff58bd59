#include <doctest.h>

#include <random>

#include "bmf/matrix.hpp"

using bmf::BinaryMatrix;
using bmf::Mask;
using bmf::ObservedMatrix;

TEST_CASE("hamming_fraction: identical, counted and complementary matrices") {
  BinaryMatrix a = BinaryMatrix::Zero(10, 10);
  a(3, 4) = 1;
  a(7, 1) = 1;
  const Mask full = bmf::full_mask(10, 10);
  CHECK(bmf::hamming_fraction(a, a, full) == 0.0);

  BinaryMatrix b = a;
  b(0, 0) = 1;
  b(5, 5) = 1;
  b(9, 9) = 1;
  CHECK(bmf::hamming_fraction(a, b, full) == doctest::Approx(0.03));

  BinaryMatrix complement = (1 - a.array()).matrix();
  CHECK(bmf::hamming_fraction(a, complement, full) == 1.0);
}

TEST_CASE("hamming_fraction: only observed cells count") {
  BinaryMatrix a = BinaryMatrix::Zero(2, 2);
  BinaryMatrix b = BinaryMatrix::Ones(2, 2);
  Mask mask = Mask::Zero(2, 2);
  mask(0, 0) = 1;
  b(0, 0) = 0;
  CHECK(bmf::hamming_fraction(a, b, mask) == 0.0);
  mask(1, 1) = 1;
  CHECK(bmf::hamming_fraction(a, b, mask) == 0.5);
}

TEST_CASE("hamming_fraction: errors") {
  BinaryMatrix a = BinaryMatrix::Zero(2, 2);
  BinaryMatrix b = BinaryMatrix::Zero(2, 3);
  CHECK_THROWS_AS(bmf::hamming_fraction(a, b, bmf::full_mask(2, 2)), bmf::DimensionError);
  CHECK_THROWS_AS(bmf::hamming_fraction(a, a, Mask::Zero(2, 2)), bmf::EmptyMaskError);
}

TEST_CASE("hamming_fraction is symmetric and zero iff observed cells agree") {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5, m = 1 + trial % 7;
    BinaryMatrix a(n, m), b(n, m);
    Mask mask(n, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = coin(rng);
      b.data()[i] = coin(rng);
      mask.data()[i] = coin(rng);
    }
    mask(0, 0) = 1;
    const double ab = bmf::hamming_fraction(a, b, mask);
    CHECK(ab == bmf::hamming_fraction(b, a, mask));
    bool agree = true;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (mask.data()[i] && a.data()[i] != b.data()[i]) agree = false;
    }
    CHECK((ab == 0.0) == agree);
  }
}

TEST_CASE("density of full, empty and half-full matrices") {
  CHECK(bmf::density(ObservedMatrix(BinaryMatrix::Ones(10, 10))) == 1.0);
  CHECK(bmf::density(ObservedMatrix(BinaryMatrix::Zero(10, 10))) == 0.0);
  BinaryMatrix half = BinaryMatrix::Zero(4, 4);
  half.topRows(2).setOnes();
  CHECK(bmf::density(ObservedMatrix(half)) == 0.5);
  CHECK_THROWS_AS(bmf::density(ObservedMatrix(half, Mask::Zero(4, 4))), bmf::EmptyMaskError);
}

TEST_CASE("density ignores missing cells; masking zeros never lowers it") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 100; ++trial) {
    BinaryMatrix v(5, 6);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = coin(rng);
    v(0, 0) = 1;
    const double before = bmf::density(ObservedMatrix(v));
    Mask mask = bmf::full_mask(5, 6);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v.data()[i] == 0 && coin(rng)) mask.data()[i] = 0;
    }
    CHECK(bmf::density(ObservedMatrix(v, mask)) >= before);
  }
}

TEST_CASE("ObservedMatrix validation") {
  CHECK_THROWS_AS(ObservedMatrix(BinaryMatrix(0, 3)), bmf::DimensionError);
  CHECK_THROWS_AS(ObservedMatrix(BinaryMatrix::Zero(2, 2), Mask::Ones(2, 3)), bmf::DimensionError);
  BinaryMatrix bad = BinaryMatrix::Zero(2, 2);
  bad(1, 1) = 2;
  CHECK_THROWS_AS(ObservedMatrix{bad}, bmf::InvalidArgument);

  BinaryMatrix v = BinaryMatrix::Ones(2, 2);
  Mask mask = Mask::Ones(2, 2);
  mask(0, 1) = 0;
  ObservedMatrix x(v, mask);
  CHECK(x.observed_count() == 3);
  CHECK(x(0, 1) == 0);  // missing cells store 0
}
