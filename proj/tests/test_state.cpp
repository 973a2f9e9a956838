#include <gtest/gtest.h>

#include <random>

#include "fpqc/errors.hpp"
#include "fpqc/oracles.hpp"
#include "fpqc/state.hpp"

using namespace fpqc;

namespace {

CMatrix pauli_z() {
    CMatrix z(2, 2);
    z << 1.0, 0.0, 0.0, -1.0;
    return z;
}

}  // namespace

TEST(Vectorize, GroundStateOfTwoLevels) {
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    const CVector x = vectorize(rho);
    ASSERT_EQ(x.size(), 4);
    EXPECT_EQ(x(0), cplx(1.0));
    EXPECT_EQ(x(1), cplx(0.0));
    EXPECT_EQ(x(2), cplx(0.0));
    EXPECT_EQ(x(3), cplx(0.0));
}

TEST(Vectorize, GroundStateOfThreeLevels) {
    CMatrix rho = CMatrix::Zero(3, 3);
    rho(0, 0) = 1.0;
    CVector expected = CVector::Zero(9);
    expected(0) = 1.0;
    EXPECT_EQ(vectorize(rho), expected);
}

TEST(Vectorize, MaximallyMixed) {
    const CMatrix rho = 0.5 * CMatrix::Identity(2, 2);
    CVector expected(4);
    expected << 0.5, 0.5, 0.0, 0.0;
    EXPECT_EQ(vectorize(rho), expected);
}

TEST(Vectorize, SpinOneSlotOrderMatchesListing) {
    // rho00, rho11, rho22, rho01, rho02, rho10, rho20, rho12, rho21
    std::mt19937_64 rng(7);
    const CMatrix rho = random_density_matrix(3, rng);
    const CVector x = vectorize(rho);
    const int rows[] = {0, 1, 2, 0, 0, 1, 2, 1, 2};
    const int cols[] = {0, 1, 2, 1, 2, 0, 0, 2, 1};
    for (int i = 0; i < 9; ++i) EXPECT_EQ(x(i), rho(rows[i], cols[i])) << "slot " << i;
}

TEST(Vectorize, TwoLevelSlotOrder) {
    const auto slots = canonical_slots(2);
    ASSERT_EQ(slots.size(), 4u);
    EXPECT_EQ(slots[2], (Slot{0, 1}));
    EXPECT_EQ(slots[3], (Slot{1, 0}));
}

TEST(Vectorize, SlotIndexAgreesWithCanonicalList) {
    for (int l = 1; l <= 6; ++l) {
        const auto slots = canonical_slots(l);
        ASSERT_EQ(static_cast<int>(slots.size()), l * l);
        for (int i = 0; i < l * l; ++i) {
            EXPECT_EQ(slot_index(l, slots[i].row, slots[i].col), i);
            const int partner = partner_slot(l, i);
            EXPECT_EQ(slots[partner].row, slots[i].col);
            EXPECT_EQ(slots[partner].col, slots[i].row);
        }
    }
}

TEST(Vectorize, RejectsNonSquareAndNonHermitian) {
    EXPECT_THROW(vectorize(CMatrix::Zero(2, 3)), ValidationError);
    CMatrix rho = 0.5 * CMatrix::Identity(2, 2);
    rho(0, 1) = 0.1;
    try {
        vectorize(rho);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("Hermitian"), std::string::npos);
    }
}

TEST(Devectorize, Examples) {
    CVector x(4);
    x << 1.0, 0.0, 0.0, 0.0;
    CMatrix ground = CMatrix::Zero(2, 2);
    ground(0, 0) = 1.0;
    EXPECT_EQ(devectorize(x), ground);

    x << 0.5, 0.5, cplx(0, 0.3), cplx(0, -0.3);
    CMatrix expected(2, 2);
    expected << 0.5, cplx(0, 0.3), cplx(0, -0.3), 0.5;
    EXPECT_EQ(devectorize(x), expected);
}

TEST(Devectorize, RoundTripIsExact) {
    std::mt19937_64 rng(11);
    for (int l = 1; l <= 5; ++l) {
        for (int trial = 0; trial < 20; ++trial) {
            const CMatrix rho = random_density_matrix(l, rng);
            EXPECT_EQ(devectorize(vectorize(rho)), rho);
            const CVector x = vectorize(rho);
            EXPECT_EQ(vectorize(devectorize(x)), x);
        }
    }
}

TEST(Devectorize, InconsistentPairThrows) {
    CVector x(4);
    x << 0.5, 0.5, cplx(0.1, 0.3), cplx(0.1, 0.3);
    EXPECT_THROW(devectorize(x), StructuralError);
}

TEST(Devectorize, NonSquareLengthThrows) {
    EXPECT_THROW(devectorize(CVector::Zero(5)), ValidationError);
}

TEST(Expectation, Examples) {
    CMatrix p = CMatrix::Zero(2, 2);
    p(0, 0) = 1.0;
    EXPECT_DOUBLE_EQ(expectation(p, p), 1.0);
    EXPECT_DOUBLE_EQ(expectation(CMatrix(0.5 * CMatrix::Identity(2, 2)), pauli_z()), 0.0);
}

TEST(Expectation, MatchesMeasurementRow) {
    std::mt19937_64 rng(3);
    for (int l = 2; l <= 4; ++l) {
        const CMatrix rho = random_density_matrix(l, rng);
        CMatrix g(l, l);
        std::normal_distribution<double> n(0.0, 1.0);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = cplx(n(rng), n(rng));
        const CMatrix obs = g + g.adjoint();
        const cplx via_row = (measurement_row(obs) * vectorize(rho))(0);
        EXPECT_NEAR(via_row.real(), expectation(rho, obs), 1e-12);
        EXPECT_NEAR(via_row.imag(), 0.0, 1e-12);
    }
}

TEST(Expectation, ImaginaryResidueThrows) {
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 1) = 1.0;
    CMatrix obs = CMatrix::Zero(2, 2);
    obs(1, 0) = kI;
    EXPECT_THROW(expectation(rho, obs), NumericConsistencyError);
    EXPECT_THROW(expectation(CMatrix(CMatrix::Identity(2, 2)), CMatrix(CMatrix::Identity(3, 3))), ValidationError);
}

TEST(Validate, ReportsEachDefect) {
    const StateReport good = validate(0.5 * CMatrix::Identity(2, 2));
    EXPECT_TRUE(good.passes());
    EXPECT_NEAR(good.min_eigenvalue, 0.5, 1e-15);

    CMatrix bad_trace = 0.6 * CMatrix::Identity(2, 2);
    const StateReport r1 = validate(bad_trace);
    EXPECT_FALSE(r1.unit_trace());
    EXPECT_NEAR(r1.trace_defect, 0.2, 1e-15);

    CMatrix negative(2, 2);
    negative << 1.5, 0.0, 0.0, -0.5;
    const StateReport r2 = validate(negative);
    EXPECT_TRUE(r2.unit_trace());
    EXPECT_FALSE(r2.positive());
    EXPECT_NEAR(r2.min_eigenvalue, -0.5, 1e-15);

    CMatrix skew = 0.5 * CMatrix::Identity(2, 2);
    skew(0, 1) = 0.1;
    EXPECT_FALSE(validate(skew).hermitian());
}

TEST(Validate, VectorizedPairMismatchIsHermiticityDefect) {
    CVector x(4);
    x << 0.5, 0.5, cplx(0.1, 0.2), cplx(0.1, 0.25);
    const StateReport r = validate_vectorized(x);
    EXPECT_NEAR(r.hermiticity_defect, 0.45, 1e-12);
}

TEST(TraceRow, SumsPopulations) {
    std::mt19937_64 rng(5);
    const CMatrix rho = random_density_matrix(4, rng);
    EXPECT_NEAR(std::abs((trace_row(4) * vectorize(rho))(0) - 1.0), 0.0, 1e-14);
}

TEST(Realification, QuadraticAndLinearFormsArePreserved) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int l = 2; l <= 4; ++l) {
        const int d = l * l;
        MatrixXd r(d, d);
        for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = n(rng);
        r = (r + r.transpose()).eval();
        Eigen::RowVectorXd pr(d);
        for (int i = 0; i < d; ++i) pr(i) = n(rng);
        const CMatrix m = quadratic_from_real(r);
        const CRowVector p = linear_from_real(pr);
        EXPECT_LT((realify_quadratic(m) - r).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((realify_linear(p) - pr).cwiseAbs().maxCoeff(), 1e-12);

        const CVector x = vectorize(random_density_matrix(l, rng));
        const cplx q = (x.transpose() * m * x)(0);
        const cplx lin = (p * x)(0);
        EXPECT_NEAR(q.imag(), 0.0, 1e-12);
        EXPECT_NEAR(lin.imag(), 0.0, 1e-12);
        const VectorXd y = (realification_matrix(l) * x).real();
        EXPECT_NEAR(q.real(), y.dot(r * y), 1e-12);
        EXPECT_NEAR(lin.real(), pr.dot(y), 1e-12);
    }
}
