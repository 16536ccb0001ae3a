#include <sdbf/app_mvt.hpp>

#include <sdbf/error.hpp>

#include <array>
#include <cmath>

namespace sdbf {

namespace {

constexpr std::array<double, 72> kFixture = {
    242, 1708, 569, 569,  270, 757, -25,  499, 309, 231, 22,  338, -42, 26,  -233, 119, 206, 163,
    -106, -186, 55, 54,   85,  48,  30,   50,  194, 525, -87, -110, 159, 148, 29,  102, 89,   364,
    -9,  36,   158, 234,  76,  122, 15,   24,  3,   36,  93,  71,   160, 44,  66,  128, 180,  155,
    237, 85,   105, 76,   16,  6,   167,  364, -10, -18, -61, -21,  -7,  -2,  15,  32,  160,  188,
};

}  // namespace

Matrix mvt_fixture_data() {
    Matrix y(36, 2);
    for (Eigen::Index i = 0; i < 36; ++i) {
        y(i, 0) = kFixture[static_cast<std::size_t>(2 * i)];
        y(i, 1) = kFixture[static_cast<std::size_t>(2 * i + 1)];
    }
    const Vector mean = y.colwise().mean();
    if (std::abs(mean[0] - 86.94) > 0.01 || std::abs(mean[1] - 193.47) > 0.01) {
        throw IngestionError("fixture data: sample mean check failed");
    }
    return y;
}

MvtTestConfig mvt_fixture_config() {
    MvtTestConfig c;
    c.unconstrained_step_sds = {9000.0, 13000.0, 48000.0};
    c.constrained_step_sds = {10000.0, 15000.0, 48000.0};

    MvtModelState u;
    u.delta = (Vector(2) << 0.5, 0.2).finished();
    u.sigma = (Matrix(2, 2) << 2.0, 2.0, 2.0, 11.0).finished() * 1e4;
    u.phi = Matrix::Identity(2, 2);
    c.unconstrained_init = u;

    MvtModelState k;
    k.delta = Vector::Constant(1, 0.55);
    k.sigma = (Matrix(2, 2) << 23.0, 22.0, 22.0, 89.0).finished() * 1e3;
    k.phi = Matrix::Identity(1, 1);
    c.constrained_init = k;
    return c;
}

}  // namespace sdbf
