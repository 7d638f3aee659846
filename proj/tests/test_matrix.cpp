#include <catch2/catch_amalgamated.hpp>

#include "vmr/matrix.hpp"
#include "vmr/rng.hpp"

using namespace vmr;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, SeededRng& rng, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(r, c);
    for (std::size_t k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("matmul identity and annihilator") {
    SeededRng rng(11);
    const Matrix m = random_matrix(3, 4, rng);
    CHECK(matmul(Matrix::identity(3), m) == m);
    const Matrix zero(4, 2);
    const Matrix prod = matmul(m, zero);
    for (std::size_t k = 0; k < prod.size(); ++k) CHECK(prod.data()[k] == 0.0);
}

TEST_CASE("matmul hand-evaluated product") {
    const Matrix a{{1, 2}, {3, 4}};
    const Matrix b{{5}, {6}};
    const Matrix p = matmul(a, b);
    REQUIRE(p.rows() == 2);
    REQUIRE(p.cols() == 1);
    CHECK(p(0, 0) == 17.0);
    CHECK(p(1, 0) == 39.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
    const Matrix a(2, 3), b(2, 2);
    CHECK_THROWS_AS(matmul(a, b), InvalidInput);
}

TEST_CASE("matmul associativity on random chains") {
    SeededRng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix a = random_matrix(4, 3, rng);
        const Matrix b = random_matrix(3, 5, rng);
        const Matrix c = random_matrix(5, 2, rng);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        double scale = 0.0;
        for (std::size_t k = 0; k < left.size(); ++k)
            scale = std::max(scale, std::abs(left.data()[k]));
        CHECK(max_abs_diff(left, right) <= 1e-9 * std::max(scale, 1.0));
    }
}

TEST_CASE("transpose of a product matches swapped product") {
    SeededRng rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix a = random_matrix(4, 3, rng);
        const Matrix b = random_matrix(5, 3, rng);
        // (A B^T)^T == B A^T
        const Matrix lhs = transpose(matmul(a, transpose(b)));
        const Matrix rhs = matmul(b, transpose(a));
        CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
    }
}

TEST_CASE("elementwise nonlinearities") {
    Matrix neg(2, 2);
    neg(0, 0) = -1.0; neg(0, 1) = -0.5; neg(1, 0) = -3.0; neg(1, 1) = -1e-9;
    const Matrix r = elementwise("relu", neg);
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(r.data()[k] == 0.0);

    const Matrix zero(3, 2);
    const Matrix t = elementwise("tanh", zero);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(t.data()[k] == 0.0);
    const Matrix s = elementwise("sigmoid", zero);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(s.data()[k] == 0.5);
}

TEST_CASE("elementwise rejects unknown ids") {
    CHECK_THROWS_AS(elementwise("softplus", Matrix(1, 1)), InvalidInput);
}

TEST_CASE("constructors reject empty shapes") {
    CHECK_THROWS_AS(Matrix(0, 3), InvalidInput);
    CHECK_THROWS_AS(Matrix(3, 0), InvalidInput);
}

TEST_CASE("finite checks") {
    Matrix m(1, 2);
    CHECK(all_finite(m));
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(all_finite(m));
    CHECK_THROWS_AS(ensure_finite(m, "test"), NumericError);
}
