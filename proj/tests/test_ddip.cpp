#include <doctest.h>

#include "oracles.hpp"
#include "otfs/ddip.hpp"

using namespace otfs;

namespace {

const double c4 = 1.0 / std::sqrt(2.0);

RealLinearModel make_model(RMatrix H, RVector y) {
  RealLinearModel m;
  m.H = std::move(H);
  m.y = std::move(y);
  return m;
}

DecoderNet zero_net(const std::vector<int>& sizes, double c, const RVector& z0) {
  std::vector<RMatrix> W;
  std::vector<RVector> b;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    W.push_back(RMatrix::Zero(sizes[k + 1], sizes[k]));
    b.push_back(RVector::Zero(sizes[k + 1]));
  }
  return DecoderNet(sizes, W, b, z0, c);
}

}  // namespace

TEST_CASE("init_net") {
  Rng rng(1);
  const DecoderNet net = init_net(12, 7, c4, rng);
  SUBCASE("layer shapes") {
    CHECK(net.layer_sizes() == std::vector<int>{4, 8, 16, 32, 168});
    CHECK(net.weights()[3].rows() == 168);
    CHECK(net.weights()[3].cols() == 32);
    CHECK(net.biases()[3].size() == 168);
    CHECK(net.z0().size() == 4);
  }
  SUBCASE("uniform bounds follow the destination width") {
    CHECK(net.weights()[1].cwiseAbs().maxCoeff() < 0.25);
    CHECK(net.biases()[1].cwiseAbs().maxCoeff() < 0.25);
    CHECK(net.weights()[3].cwiseAbs().maxCoeff() < 1.0 / std::sqrt(168.0));
    // Loose lower bound: the draw fills most of the interval.
    CHECK(net.weights()[3].cwiseAbs().maxCoeff() > 0.9 / std::sqrt(168.0));
  }
  SUBCASE("zero-mean weights") {
    std::vector<double> draws;
    while (draws.size() < 10000) {
      const DecoderNet n = init_net(12, 7, c4, rng);
      for (Eigen::Index i = 0; i < n.weights()[3].size() && draws.size() < 10000; ++i)
        draws.push_back(n.weights()[3].data()[i]);
    }
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= 10000.0;
    const double sigma = (1.0 / std::sqrt(168.0)) / std::sqrt(3.0);
    CHECK(std::abs(mean) < 3.0 * sigma / 100.0);
  }
  SUBCASE("shape validation") {
    CHECK_THROWS_AS(DecoderNet({2, 3}, {RMatrix::Zero(2, 2)}, {RVector::Zero(3)}, RVector::Zero(2), 1.0),
                    InputSizeError);
  }
}

TEST_CASE("forward") {
  Rng rng(2);
  SUBCASE("zero parameters give zero output") {
    const DecoderNet net = zero_net({4, 8, 16, 32, 24}, c4, RVector::Ones(4));
    CHECK(forward(net).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("output bounded by c") {
    for (int rep = 0; rep < 200; ++rep) {
      DecoderNet net = init_net(3, 2, 0.4, rng);
      for (auto& W : net.weights()) W *= 20.0;
      CHECK(forward(net).cwiseAbs().maxCoeff() <= 0.4);
    }
  }
  SUBCASE("hand-evaluated [2, 3, 4] chain") {
    RMatrix W1(3, 2), W2(4, 3);
    W1 << 0.1, -0.2, 0.3, 0.4, -0.5, 0.6;
    W2 << 0.2, 0.1, -0.3, -0.4, 0.5, 0.2, 0.3, 0.3, 0.3, -0.1, 0.0, 0.7;
    RVector b1(3), b2(4), z0(2);
    b1 << 0.05, -0.05, 0.1;
    b2 << 0.0, 0.1, -0.1, 0.2;
    z0 << 1.5, -0.5;
    const DecoderNet net({2, 3, 4}, {W1, W2}, {b1, b2}, z0, 2.0);
    double f2[3];
    for (int i = 0; i < 3; ++i) f2[i] = std::tanh(W1(i, 0) * 1.5 + W1(i, 1) * -0.5 + b1[i]);
    const RVector out = forward(net);
    for (int i = 0; i < 4; ++i) {
      const double f3 = std::tanh(W2(i, 0) * f2[0] + W2(i, 1) * f2[1] + W2(i, 2) * f2[2] + b2[i]);
      CHECK(out[i] == doctest::Approx(2.0 * f3).epsilon(1e-14));
    }
  }
}

TEST_CASE("loss") {
  std::mt19937_64 srng(3);
  Rng rng(3);
  const DecoderNet net = init_net(3, 2, c4, rng);
  const RMatrix H = oracle::random_rmatrix(12, 12, srng);
  CHECK(loss(net, make_model(H, H * forward(net))) < 1e-30);
  CHECK(loss(net, make_model(RMatrix::Identity(12, 12), RVector::Zero(12))) ==
        doctest::Approx(forward(net).squaredNorm() / 12.0));
  const RVector y = oracle::random_rvector(12, srng);
  CHECK(loss(net, make_model(H, y)) ==
        doctest::Approx(static_cast<double>(oracle::loss_long(net, H, y))).epsilon(1e-12));
}

TEST_CASE("gradients") {
  std::mt19937_64 srng(4);
  Rng rng(4);
  SUBCASE("finite differences") {
    for (int rep = 0; rep < 10; ++rep) {
      const DecoderNet net = init_net(3, 2, c4, rng);
      const auto m = make_model(oracle::random_rmatrix(12, 12, srng), oracle::random_rvector(12, srng));
      CHECK(oracle::max_relative_gradient_error(net, m) < 1e-4);
    }
  }
  SUBCASE("zero-parameter net only moves the output bias") {
    const DecoderNet net = zero_net({4, 8, 16, 32, 12}, c4, RVector::Ones(4));
    const auto m = make_model(oracle::random_rmatrix(12, 12, srng), oracle::random_rvector(12, srng));
    const Gradients g = gradients(net, m);
    CHECK(g.biases[3].cwiseAbs().maxCoeff() > 0.0);
    CHECK(g.weights[3].cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k < 3; ++k) {
      CHECK(g.weights[k].cwiseAbs().maxCoeff() == 0.0);
      CHECK(g.biases[k].cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(oracle::max_relative_gradient_error(net, m) < 1e-4);
  }
  SUBCASE("perfect fit has zero gradient") {
    const DecoderNet net = init_net(3, 2, c4, rng);
    const RMatrix H = oracle::random_rmatrix(12, 12, srng);
    const RealLinearModel m = make_model(H, H * forward(net));
    const Gradients g = gradients(net, m);
    for (std::size_t k = 0; k < g.weights.size(); ++k) {
      CHECK(g.weights[k].cwiseAbs().maxCoeff() < 1e-14);
      CHECK(g.biases[k].cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("adam_update") {
  auto scalar_net = [](double w, double b) {
    return DecoderNet({1, 1}, {RMatrix::Constant(1, 1, w)}, {RVector::Constant(1, b)}, RVector::Ones(1), 1.0);
  };
  auto grads = [](double gw, double gb) {
    return Gradients{{RMatrix::Constant(1, 1, gw)}, {RVector::Constant(1, gb)}};
  };
  SUBCASE("zero gradient leaves parameters and decays moments") {
    DecoderNet net = scalar_net(0.3, -0.1);
    AdamState adam = AdamState::for_net(net);
    adam_update(net, grads(0.5, 0.5), adam);
    const double w1 = net.weights()[0](0, 0);
    const double m1 = adam.m_weights[0](0, 0);
    adam_update(net, grads(0.0, 0.0), adam);
    CHECK(adam.m_weights[0](0, 0) == doctest::Approx(0.9 * m1));
    DecoderNet fresh = scalar_net(0.3, -0.1);
    AdamState a2 = AdamState::for_net(fresh);
    adam_update(fresh, grads(0.0, 0.0), a2);
    CHECK(fresh.weights()[0](0, 0) == 0.3);
    CHECK(fresh.biases()[0][0] == -0.1);
    CHECK(w1 != 0.3);
  }
  SUBCASE("first step moves by lr against the gradient sign") {
    DecoderNet net = scalar_net(0.3, -0.1);
    AdamState adam = AdamState::for_net(net, 0.01);
    adam_update(net, grads(2.5, -0.07), adam);
    CHECK(net.weights()[0](0, 0) == doctest::Approx(0.3 - 0.01).epsilon(1e-9));
    CHECK(net.biases()[0][0] == doctest::Approx(-0.1 + 0.01).epsilon(1e-6));
  }
  SUBCASE("three hand-stepped updates") {
    DecoderNet net = scalar_net(0.3, 0.0);
    AdamState adam = AdamState::for_net(net, 0.01);
    const double g[3] = {0.8, -0.3, 0.05};
    double w = 0.3, m = 0.0, v = 0.0;
    for (int t = 1; t <= 3; ++t) {
      adam_update(net, grads(g[t - 1], 0.0), adam);
      m = 0.9 * m + 0.1 * g[t - 1];
      v = 0.999 * v + 0.001 * g[t - 1] * g[t - 1];
      const double mh = m / (1.0 - std::pow(0.9, t));
      const double vh = v / (1.0 - std::pow(0.999, t));
      w -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(std::abs(net.weights()[0](0, 0) - w) < 1e-12);
    }
    CHECK(adam.step == 3);
  }
}

TEST_CASE("StopMonitor") {
  SUBCASE("inactive before W, then identical outputs stop") {
    StopMonitor mon(5, 1e-3);
    const RVector x = RVector::Constant(6, 0.4);
    for (int i = 0; i < 5; ++i) {
      CHECK(mon.check(x) == StopDecision::Continue);
      CHECK(std::isnan(mon.last_variance()));
    }
    CHECK(mon.check(x) == StopDecision::Stop);
    CHECK(mon.last_variance() == 0.0);
    CHECK(mon.iteration() == 5);
  }
  SUBCASE("W = 2 alternating outputs") {
    StopMonitor mon(2, 1e-3);
    RVector x(3);
    x << 0.1, -0.2, 0.3;
    mon.check(x);
    mon.check(-x);
    mon.check(x);
    CHECK(mon.last_variance() == doctest::Approx(x.squaredNorm()));
  }
  SUBCASE("threshold is strict") {
    StopMonitor mon(2, 0.14);
    RVector x(3);
    x << 0.1, -0.2, 0.3;  // ||x||^2 = 0.14
    mon.check(x);
    mon.check(-x);
    CHECK(mon.check(x) == StopDecision::Continue);
  }
}

TEST_CASE("run_ddip") {
  std::mt19937_64 srng(6);
  Rng channel_rng(6);
  SUBCASE("stopping index, range and determinism") {
    for (int rep = 0; rep < 5; ++rep) {
      const auto ch = sample_channel(4, 3, 1, 4, 2, channel_rng);
      CVector x(8);
      for (auto& s : x) s = {srng() % 2 ? c4 : -c4, srng() % 2 ? c4 : -c4};
      const CMatrix Hdd = effective_dd_matrix(ch);
      CVector noise = oracle::random_cmatrix(8, 1, srng) * 0.1;
      const auto m = to_real_model(Hdd, Hdd * x + noise, 0.02, x);
      DdipConfig cfg;
      cfg.record_trace = true;
      Rng a(rep), b(rep);
      const DdipResult r1 = run_ddip(m, cfg, a);
      const DdipResult r2 = run_ddip(m, cfg, b);
      CHECK(r1.iterations >= cfg.window);
      CHECK(r1.iterations <= cfg.max_iterations);
      CHECK(r1.x_init.cwiseAbs().maxCoeff() <= cfg.c);
      CHECK(r1.x_init == r2.x_init);
      CHECK(r1.iterations == r2.iterations);
      REQUIRE(r1.trace.size() == static_cast<std::size_t>(r1.iterations + 1));
      for (std::size_t i = 0; i < r1.trace.size(); ++i) {
        CHECK(r1.trace[i].loss == r2.trace[i].loss);
        CHECK(std::isnan(r1.trace[i].variance) == (static_cast<int>(i) < cfg.window));
      }
      if (!r1.truncated) {
        double early = 0.0, late = 0.0;
        for (int i = 0; i < cfg.window; ++i) early += r1.trace[static_cast<std::size_t>(i)].loss;
        for (int i = r1.iterations - cfg.window; i < r1.iterations; ++i) late += r1.trace[static_cast<std::size_t>(i)].loss;
        CHECK(late < early);
      }
    }
  }
  SUBCASE("noise-free well-conditioned 8-symbol instance") {
    const RMatrix Q = Eigen::HouseholderQR<RMatrix>(oracle::random_rmatrix(8, 8, srng)).householderQ();
    RVector x(8);
    for (auto& v : x) v = srng() % 2 ? c4 : -c4;
    const auto m = make_model(Q, Q * x);
    Rng net_rng(11);
    const DdipResult r = run_ddip(m, DdipConfig{}, net_rng);
    CHECK((r.x_init - x).norm() / x.norm() < 0.1);
  }
  SUBCASE("cap below the window is rejected") {
    DdipConfig cfg;
    cfg.max_iterations = 10;
    Rng r(1);
    CHECK_THROWS_AS(run_ddip(make_model(RMatrix::Identity(4, 4), RVector::Zero(4)), cfg, r), ParameterError);
  }
  SUBCASE("cap truncates") {
    DdipConfig cfg;
    cfg.window = 30;
    cfg.max_iterations = 30;
    cfg.epsilon = 1e-30;
    Rng r(1);
    const RMatrix H = oracle::random_rmatrix(8, 8, srng);
    const DdipResult res = run_ddip(make_model(H, oracle::random_rvector(8, srng)), cfg, r);
    CHECK(res.truncated);
    CHECK(res.iterations == 30);
  }
}
