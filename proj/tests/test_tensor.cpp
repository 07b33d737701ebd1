#include <doctest.h>

#include <cmath>

#include "lait/matrix.hpp"
#include "lait/rng.hpp"

using namespace lait;

namespace {

// Naive ijk product with a local accumulator, kept independent of the
// production kernel.
template <typename T>
Matrix<T> matmul_oracle(const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> out(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i)
        for (size_t j = 0; j < b.cols; ++j) {
            T acc = T(0);
            for (size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

template <typename T>
Matrix<T> random_matrix(size_t r, size_t c, Rng& rng) {
    Matrix<T> m(r, c);
    for (T& v : m.data) v = static_cast<T>(rng.uniform(-1.0, 1.0));
    return m;
}

}  // namespace

TEST_CASE("matmul identity") {
    Matrix<float> a{{1, 2}, {3, 4}};
    Matrix<float> out = matmul(a, identity<float>(2));
    CHECK(bit_identical(out, a));
}

TEST_CASE("matmul hand case") {
    Matrix<float> a{{1, 2}};
    Matrix<float> b{{3}, {4}};
    Matrix<float> out = matmul(a, b);
    REQUIRE(out.rows == 1);
    REQUIRE(out.cols == 1);
    CHECK(out(0, 0) == doctest::Approx(11.0f));
}

TEST_CASE("matmul against triple-loop oracle") {
    Rng rng(101);
    Matrix<float> a = random_matrix<float>(7, 5, rng);
    Matrix<float> b = random_matrix<float>(5, 3, rng);
    CHECK(max_abs_diff(matmul(a, b), matmul_oracle(a, b)) < 1e-6);
}

TEST_CASE("matmul shape error") {
    Matrix<float> a(2, 3);
    Matrix<float> b(4, 2);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("matmul associativity") {
    SUBCASE("float within 1e-4") {
        Rng rng(7);
        for (int t = 0; t < 20; ++t) {
            Matrix<float> a = random_matrix<float>(4, 6, rng);
            Matrix<float> b = random_matrix<float>(6, 5, rng);
            Matrix<float> c = random_matrix<float>(5, 3, rng);
            CHECK(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) < 1e-4);
        }
    }
    SUBCASE("double within 1e-10") {
        Rng rng(8);
        for (int t = 0; t < 20; ++t) {
            Matrix<double> a = random_matrix<double>(4, 6, rng);
            Matrix<double> b = random_matrix<double>(6, 5, rng);
            Matrix<double> c = random_matrix<double>(5, 3, rng);
            CHECK(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) < 1e-10);
        }
    }
}

TEST_CASE("masked softmax basics") {
    BoolMatrix both(1, 2, true);
    Matrix<float> even = row_softmax_masked(Matrix<float>{{0, 0}}, both);
    CHECK(even(0, 0) == doctest::Approx(0.5f));
    CHECK(even(0, 1) == doctest::Approx(0.5f));

    BoolMatrix first_only(1, 2, false);
    first_only(0, 0) = 1;
    Matrix<float> one = row_softmax_masked(Matrix<float>{{5, 999}}, first_only);
    CHECK(one(0, 0) == 1.0f);  // exact: single allowed entry
    CHECK(one(0, 1) == 0.0f);  // exact zero at the disallowed position

    Matrix<float> closed =
        row_softmax_masked(Matrix<float>{{0.0f, std::log(3.0f)}}, both);
    CHECK(closed(0, 0) == doctest::Approx(0.25f).epsilon(1e-6));
    CHECK(closed(0, 1) == doctest::Approx(0.75f).epsilon(1e-6));
}

TEST_CASE("masked softmax rejects fully-masked row") {
    BoolMatrix none(1, 2, false);
    CHECK_THROWS_AS(row_softmax_masked(Matrix<float>{{1, 2}}, none), MaskedRowError);
}

TEST_CASE("masked softmax properties") {
    Rng rng(33);
    for (int t = 0; t < 25; ++t) {
        const size_t n = 1 + rng.below(6);
        Matrix<float> scores(n, n);
        for (float& v : scores.data) v = static_cast<float>(rng.uniform(-8.0, 8.0));
        BoolMatrix allowed(n, n, false);
        for (size_t i = 0; i < n; ++i) {
            allowed(i, i) = 1;  // diagonal always allowed, as in LAIT masks
            for (size_t j = 0; j < n; ++j)
                if (rng.uniform() < 0.5) allowed(i, j) = 1;
        }
        Matrix<float> w = row_softmax_masked(scores, allowed);
        for (size_t i = 0; i < n; ++i) {
            double sum = 0;
            for (size_t j = 0; j < n; ++j) {
                CHECK(w(i, j) >= 0.0f);
                if (!allowed(i, j)) CHECK(w(i, j) == 0.0f);
                sum += w(i, j);
            }
            CHECK(std::abs(sum - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("rms_norm hand cases") {
    std::vector<float> ones(4, 1.0f);
    Matrix<float> constant{{2, 2, 2, 2}};
    Matrix<float> out = rms_norm(constant, ones);
    for (size_t j = 0; j < 4; ++j) CHECK(out(0, j) == doctest::Approx(1.0f).epsilon(1e-5));

    Matrix<float> zeros(1, 4);
    Matrix<float> zout = rms_norm(zeros, ones);
    for (float v : zout.data) CHECK(v == 0.0f);

    Matrix<float> row{{3, 4}};
    Matrix<float> rout = rms_norm(row, std::vector<float>{1.0f, 1.0f});
    CHECK(rout(0, 0) == doctest::Approx(3.0 / std::sqrt(12.5)).epsilon(1e-5));
    CHECK(rout(0, 1) == doctest::Approx(4.0 / std::sqrt(12.5)).epsilon(1e-5));
}

TEST_CASE("rms_norm unit-RMS property") {
    Rng rng(55);
    for (int t = 0; t < 25; ++t) {
        const size_t r = 1 + rng.below(4), c = 2 + rng.below(14);
        Matrix<float> x = random_matrix<float>(r, c, rng);
        for (float& v : x.data) v += (v >= 0 ? 0.5f : -0.5f);  // keep rows well away from zero
        Matrix<float> out = rms_norm(x, std::vector<float>(c, 1.0f));
        for (size_t i = 0; i < r; ++i) {
            double ms = 0;
            for (size_t j = 0; j < c; ++j) ms += out(i, j) * out(i, j);
            CHECK(std::abs(std::sqrt(ms / c) - 1.0) < 1e-4);
        }
    }
}

TEST_CASE("rms_norm gain length check") {
    Matrix<float> x(2, 3);
    CHECK_THROWS_AS(rms_norm(x, std::vector<float>(4, 1.0f)), ShapeError);
}
