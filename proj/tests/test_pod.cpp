#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "wavezoom/dataset.hpp"
#include "wavezoom/errors.hpp"
#include "wavezoom/forest.hpp"
#include "wavezoom/pod.hpp"
#include "wavezoom/pod_rf.hpp"
#include "wavezoom/rng.hpp"

using namespace wz;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-1, 1);
    return m;
}

double orthonormality_error(const PodBasis& b) {
    const Eigen::Index r = b.modes.rows();
    Eigen::MatrixXd g(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < b.modes.cols(); ++k)
                s += b.modes(i, k) * b.modes(j, k) * (b.weights.size() ? b.weights[k] : 1.0);
            g(i, j) = s;
        }
    return (g - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
}

// Snapshots drawn from span{e1, e2, e3} with random coefficients.
Eigen::MatrixXd rank3_snapshots(Rng& rng, Eigen::Index m, Eigen::Index n) {
    Eigen::MatrixXd q = random_matrix(rng, n, 3);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
    const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, 3);
    return random_matrix(rng, m, 3) * basis.transpose();
}

}  // namespace

TEST_CASE("correlation matrix examples") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 7);
    CHECK((correlation_matrix(eye) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd two(2, 3);
    two << 1, 1, 1, 2, 2, 2;  // ||u||^2 = 3
    const Eigen::MatrixXd c = correlation_matrix(two);
    CHECK(c(0, 0) == 3.0);
    CHECK(c(0, 1) == 6.0);
    CHECK(c(1, 0) == 6.0);
    CHECK(c(1, 1) == 12.0);
}

TEST_CASE("correlation matrix matches the double-loop oracle") {
    Rng rng(2);
    const Eigen::MatrixXd s = random_matrix(rng, 5, 40);
    Eigen::VectorXd w(40);
    for (int k = 0; k < 40; ++k) w[k] = rng.uniform(0.5, 2.0);
    for (bool weighted : {false, true}) {
        const Eigen::MatrixXd c = weighted ? correlation_matrix(s, w) : correlation_matrix(s);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                double o = 0.0;
                for (int k = 0; k < 40; ++k) o += s(i, k) * s(j, k) * (weighted ? w[k] : 1.0);
                CHECK(std::abs(c(i, j) - o) <= 1e-12);
            }
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("single snapshot gives one normalized mode") {
    Eigen::MatrixXd s(1, 4);
    s << 1, 2, 2, 0;
    const PodBasis b = pod_modes(correlation_matrix(s), s, 0.0);
    REQUIRE(b.rank() == 1);
    CHECK(b.eigenvalues[0] == doctest::Approx(9.0));
    for (int k = 0; k < 4; ++k) CHECK(std::abs(std::abs(b.modes(0, k)) - s(0, k) / 3.0) <= 1e-14);
}

TEST_CASE("rank-3 snapshot set yields exactly three modes") {
    Rng rng(4);
    const Eigen::MatrixXd s = rank3_snapshots(rng, 10, 30);
    const PodBasis b = pod_modes(correlation_matrix(s), s, 1e-12);
    CHECK(b.rank() == 3);
    CHECK(orthonormality_error(b) <= 1e-10);
    for (Eigen::Index k = 1; k < b.eigenvalues.size(); ++k) CHECK(b.eigenvalues[k - 1] >= b.eigenvalues[k]);
}

TEST_CASE("Gram route matches the correlation route") {
    Rng rng(8);
    const Eigen::MatrixXd s = random_matrix(rng, 60, 12);  // more snapshots than dofs
    const PodBasis a = pod_modes(correlation_matrix(s), s, 0.0);
    const PodBasis b = build_pod(s, 0.0);
    REQUIRE(a.rank() == b.rank());
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() <= 1e-10 * a.eigenvalues[0]);
    // Same subspace: projectors agree.
    const Eigen::MatrixXd pa = a.modes.transpose() * a.modes;
    const Eigen::MatrixXd pb = b.modes.transpose() * b.modes;
    CHECK((pa - pb).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(orthonormality_error(b) <= 1e-10);
}

TEST_CASE("mass-weighted basis is orthonormal in the weighted product") {
    Rng rng(12);
    const Eigen::MatrixXd s = random_matrix(rng, 8, 20);
    Eigen::VectorXd w(20);
    for (int k = 0; k < 20; ++k) w[k] = rng.uniform(0.1, 1.0);
    const PodBasis b = build_pod(s, 0.0, w);
    CHECK(b.rank() == 8);
    CHECK(orthonormality_error(b) <= 1e-10);
    for (int i = 0; i < 8; ++i) {
        const Eigen::VectorXd u = s.row(i).transpose();
        CHECK((reconstruct(project(u, b), b) - u).norm() <= 1e-10 * u.norm());
    }
}

TEST_CASE("all-zero snapshots give an empty basis with a note") {
    const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 5);
    const PodBasis b = build_pod(s, 0.0);
    CHECK(b.rank() == 0);
    CHECK(!b.note.empty());
}

TEST_CASE("projection and reconstruction") {
    Rng rng(6);
    const Eigen::MatrixXd s = random_matrix(rng, 6, 25);
    const PodBasis b = build_pod(s, 0.0);
    REQUIRE(b.rank() == 6);
    const Eigen::VectorXd phi1 = b.modes.row(0).transpose();
    const Eigen::VectorXd a = project(phi1, b);
    CHECK(std::abs(a[0] - 1.0) <= 1e-12);
    for (Eigen::Index k = 1; k < a.size(); ++k) CHECK(std::abs(a[k]) <= 1e-12);

    for (int i = 0; i < 6; ++i) {
        const Eigen::VectorXd u = s.row(i).transpose();
        CHECK((reconstruct(project(u, b), b) - u).norm() <= 1e-8 * u.norm());
    }
    // Component orthogonal to every snapshot.
    Eigen::VectorXd v = Eigen::VectorXd::Random(25);
    v -= b.modes.transpose() * (b.modes * v);
    CHECK(project(v, b).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(reconstruct(project(v, b), b).cwiseAbs().maxCoeff() <= 1e-12);

    // Idempotence on coordinates.
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd alpha(6);
        for (int k = 0; k < 6; ++k) alpha[k] = rng.uniform(-3, 3);
        CHECK((project(reconstruct(alpha, b), b) - alpha).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK_THROWS_AS(project(Eigen::VectorXd::Zero(3), b), ShapeError);
}

TEST_CASE("truncation error is monotone in the rank") {
    Rng rng(9);
    const Eigen::MatrixXd s = random_matrix(rng, 12, 30);
    double prev = std::numeric_limits<double>::infinity();
    for (double tol : {0.9, 0.5, 0.2, 0.05, 0.01, 0.0}) {
        const PodBasis b = build_pod(s, tol);
        double err = 0.0;
        for (int i = 0; i < s.rows(); ++i) {
            const Eigen::VectorXd u = s.row(i).transpose();
            err += (reconstruct(project(u, b), b) - u).squaredNorm();
        }
        CHECK(err <= prev * (1 + 1e-12));
        // Discarded energy equals the sum of dropped eigenvalues.
        CHECK(err == doctest::Approx(b.eigenvalues.tail(b.eigenvalues.size() - static_cast<Eigen::Index>(b.rank())).sum()).epsilon(1e-8));
        prev = err;
    }
}

TEST_CASE("forest: constant target and memorizing tree") {
    Rng rng(1);
    const Eigen::MatrixXd x = random_matrix(rng, 50, 4);
    const Eigen::VectorXd seven = Eigen::VectorXd::Constant(50, 7.0);
    const Forest f = fit_forest(x, seven, {});
    for (int k = 0; k < 10; ++k) {
        const std::vector<double> q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        CHECK(f.predict(q) == 7.0);
    }
    Eigen::VectorXd y(50);
    for (int k = 0; k < 50; ++k) y[k] = rng.uniform(-5, 5);
    ForestParams memo;
    memo.n_trees = 1;
    memo.min_leaf = 1;
    memo.bootstrap = false;
    const Forest m = fit_forest(x, y, memo);
    for (int k = 0; k < 50; ++k) {
        const std::vector<double> q{x(k, 0), x(k, 1), x(k, 2), x(k, 3)};
        CHECK(m.predict(q) == y[k]);
    }
}

TEST_CASE("forest recovers a step in omega") {
    const auto ps = lhs_sample(100, ParamBounds{}, 3);
    Eigen::MatrixXd x(100, 4);
    Eigen::VectorXd y(100);
    for (int k = 0; k < 100; ++k) {
        x(k, 0) = ps[k].omega;
        x(k, 1) = ps[k].x_s;
        x(k, 2) = ps[k].y_s;
        x(k, 3) = 0.01 * k;
        y[k] = ps[k].omega <= 5000.0 ? 2.0 : 10.0;
    }
    ForestParams p;
    p.seed = 5;
    const Forest f = fit_forest(x, y, p);
    for (double om : {4800.0, 4900.0, 4990.0}) CHECK(std::abs(f.predict(std::vector<double>{om, -1.8, 0.0, 0.5}) - 2.0) <= 0.1);
    for (double om : {5010.0, 5100.0, 5200.0}) CHECK(std::abs(f.predict(std::vector<double>{om, -1.8, 0.0, 0.5}) - 10.0) <= 0.5);
}

TEST_CASE("forest errors, determinism and parallel equality") {
    CHECK_THROWS_AS(fit_forest(Eigen::MatrixXd(0, 4), Eigen::VectorXd(0), {}), ConfigError);
    Rng rng(3);
    const Eigen::MatrixXd x = random_matrix(rng, 80, 4);
    const Eigen::VectorXd y = random_matrix(rng, 80, 1).col(0);
    ForestParams p;
    p.n_trees = 10;
    p.seed = 11;
    const Forest a = fit_forest(x, y, p, 1), b = fit_forest(x, y, p, 3);
    for (int k = 0; k < 20; ++k) {
        const std::vector<double> q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        CHECK(a.predict(q) == b.predict(q));
    }
    for (const auto& t : a.trees())
        for (const auto& n : t.nodes())
            if (n.feature < 0) CHECK(n.count >= p.min_leaf);
    CHECK_THROWS_AS(a.predict(std::vector<double>{0.0}), ShapeError);
}

TEST_CASE("POD_RF composes exactly at training points") {
    auto cfg = SimulationConfig::paper();
    const auto d = generate_dataset(Split::Train, cfg, 3, 4);
    std::vector<FieldSeries> sub;
    for (const auto& f : d.fields) sub.push_back(sample_on_subgrid(f, cfg.sub));
    PodRfParams hp;
    hp.energy_tol = 0.0;
    hp.forest.n_trees = 1;
    hp.forest.min_leaf = 1;
    hp.forest.bootstrap = false;
    const PodRfModel m = PodRfModel::fit(d.params, sub, cfg.bounds, cfg.time, hp);
    for (std::size_t k = 0; k < d.size(); ++k) {
        const FieldSeries pred = m.predict(d.params[k]);
        double err = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < pred.values.size(); ++i) {
            err += (pred.values[i] - sub[k].values[i]) * (pred.values[i] - sub[k].values[i]);
            ref += sub[k].values[i] * sub[k].values[i];
        }
        // Relative to the whole trajectory: modes below 1e-12 of the top eigenvalue are dropped.
        CHECK(std::sqrt(err) <= 1e-6 * std::sqrt(ref));
    }
    const Eigen::VectorXd zero = reconstruct(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.basis().rank())), m.basis());
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

    const auto q = lhs_sample(1, cfg.bounds, 999)[0];
    const FieldSeries pred = m.predict(q);
    for (double v : pred.values) CHECK(std::isfinite(v));

    const auto dir = std::filesystem::temp_directory_path() / "wz_test_podrf";
    std::filesystem::remove_all(dir);
    m.save(dir);
    const PodRfModel back = PodRfModel::load(dir);
    CHECK(back.predict(q).values == pred.values);
    std::filesystem::remove_all(dir);

    CHECK_THROWS_AS(PodRfModel().predict(q), MissingPrerequisite);
}
