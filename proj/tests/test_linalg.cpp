#include "catch_amalgamated.hpp"

#include "oirs/channel.hpp"
#include "oirs/linalg.hpp"

#include <random>

using namespace oirs;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(r, c);
    for (double& x : m.data())
        x = n(rng);
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

} // namespace

TEST_CASE("Linalg - basic operations")
{
    const Matrix A{{1, 2}, {3, 4}};
    CHECK(matmul(A, Matrix::identity(2)) == A);
    CHECK(transpose(A) == Matrix{{1, 3}, {2, 4}});
    CHECK(hadamard(A, A) == Matrix{{1, 4}, {9, 16}});
    CHECK(vec(A) == Matrix::column({1, 3, 2, 4}));
    CHECK(unvec(vec(A), 2, 2) == A);
    CHECK(matmul(A, A) == Matrix{{7, 10}, {15, 22}});

    const Matrix K = kron(Matrix::identity(2), A);
    CHECK(K == Matrix{{1, 2, 0, 0}, {3, 4, 0, 0}, {0, 0, 1, 2}, {0, 0, 3, 4}});

    CHECK_THROWS_AS(matmul(A, Matrix(3, 1)), DimensionError);
    CHECK_THROWS_AS(hadamard(A, Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(A + Matrix(1, 2), DimensionError);
    CHECK_THROWS_AS(unvec(A, 2, 2), DimensionError);
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), DimensionError);
}

TEST_CASE("Linalg - vec/Kronecker identity")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix A = random_matrix(3, 3, rng), B = random_matrix(3, 3, rng), C = random_matrix(3, 3, rng);
        const Matrix lhs = vec(matmul(matmul(A, B), C));
        const Matrix rhs = matmul(kron(transpose(C), A), vec(B));
        CHECK(max_abs_diff(lhs, rhs) < 1e-10);
    }
    // non-square shapes
    const Matrix A = random_matrix(2, 4, rng), B = random_matrix(4, 3, rng), C = random_matrix(3, 5, rng);
    CHECK(max_abs_diff(vec(matmul(matmul(A, B), C)), matmul(kron(transpose(C), A), vec(B))) < 1e-10);
}

TEST_CASE("Linalg - Kronecker mixed product")
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix A = random_matrix(2, 3, rng), B = random_matrix(3, 2, rng);
        const Matrix C = random_matrix(3, 2, rng), D = random_matrix(2, 4, rng);
        CHECK(max_abs_diff(matmul(kron(A, B), kron(C, D)), kron(matmul(A, C), matmul(B, D))) < 1e-10);
    }
}

TEST_CASE("Linalg - Hadamard and vec algebra")
{
    std::mt19937_64 rng(13);
    const Matrix A = random_matrix(3, 4, rng), B = random_matrix(3, 4, rng), C = random_matrix(3, 4, rng);
    CHECK(hadamard(A, B) == hadamard(B, A));
    CHECK(max_abs_diff(hadamard(hadamard(A, B), C), hadamard(A, hadamard(B, C))) < 1e-14);
    CHECK(max_abs_diff(vec(A * 2.0 + B), vec(A) * 2.0 + vec(B)) < 1e-14);
}

TEST_CASE("Linalg - block diagonal of columns")
{
    const Matrix D = blkdiag_columns(Matrix::identity(2));
    CHECK(D.rows() == 4);
    CHECK(D.cols() == 2);
    CHECK(D(0, 0) == 1.0);
    CHECK(D(3, 1) == 1.0);
    CHECK(D(1, 0) + D(2, 0) + D(0, 1) + D(1, 1) + D(2, 1) == 0.0);

    const Matrix v = Matrix::column({1, 2, 3});
    CHECK(blkdiag_columns(v) == v);

    std::mt19937_64 rng(14);
    const Matrix A = random_matrix(3, 2, rng), M = random_matrix(3, 2, rng);
    const Matrix p = matmul(transpose(blkdiag_columns(A)), vec(M));
    for (std::size_t c = 0; c < 2; ++c) {
        double dotc = 0.0;
        for (std::size_t r = 0; r < 3; ++r)
            dotc += A(r, c) * M(r, c);
        CHECK(std::abs(p(c, 0) - dotc) < 1e-14);
    }
}

TEST_CASE("Linalg - SPD solve")
{
    const Matrix B{{2}, {4}};
    CHECK(solve_spd(Matrix::identity(2), B) == B);
    const Matrix x = solve_spd(Matrix{{2, 0}, {0, 4}}, B);
    CHECK(x(0, 0) == Catch::Approx(1.0));
    CHECK(x(1, 0) == Catch::Approx(1.0));

    std::mt19937_64 rng(15);
    for (std::size_t n : {1u, 3u, 8u, 20u}) {
        const Matrix M = random_matrix(n, n, rng);
        const Matrix A = matmul(transpose(M), M) + Matrix::identity(n);
        const Matrix b = random_matrix(n, 3, rng);
        const Matrix X = solve_spd(A, b);
        CHECK(frobenius_norm(matmul(A, X) - b) <= 1e-9 * frobenius_norm(b));
    }

    CHECK_THROWS_AS(solve_spd(Matrix{{1, 2}, {2, 1}}, B), NumericError);
    CHECK_THROWS_AS(solve_spd(Matrix(2, 3), B), DimensionError);
    CHECK_THROWS_AS(solve_spd(Matrix::identity(3), B), DimensionError);
}

TEST_CASE("Linalg - rank bound of the vectorised measurement operator")
{
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(-1, 7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t nt = 1 + trial % 3, nr = 1 + (trial / 3) % 3, N = 12;
        const std::size_t P = nt + static_cast<std::size_t>(trial % 5);
        Matrix X(nt, P);
        for (double& x : X.data())
            x = u(rng);
        std::vector<std::array<std::size_t, 2>> pairs(N);
        for (auto& p : pairs) {
            const int k = pick(rng);
            p = k < 0 ? std::array<std::size_t, 2>{nr, nt}
                      : std::array<std::size_t, 2>{static_cast<std::size_t>(k) % nr, static_cast<std::size_t>(k) % nt};
        }
        const AlignmentConfig V = AlignmentConfig::single_pairs(N, nt, nr, pairs);
        const Matrix op = matmul(kron(transpose(X), Matrix::identity(nr)), transpose(blkdiag_columns(V.V)));
        CHECK(op.rows() == P * nr);
        CHECK(op.cols() == N * nt * nr);
        CHECK(numerical_rank(op) <= nt * nr);
    }
}

TEST_CASE("Linalg - numerical rank")
{
    CHECK(numerical_rank(Matrix::identity(4)) == 4);
    CHECK(numerical_rank(Matrix{{1, 2}, {2, 4}}) == 1);
    CHECK(numerical_rank(Matrix(3, 3)) == 0);
    CHECK(numerical_rank(Matrix()) == 0);
}
