#include <doctest.h>

#include <cmath>

#include "selrat/objective.hpp"
#include "selrat/rng.hpp"

using namespace selrat;

namespace {

Eigen::MatrixXd random_logits(Rng& rng, int m, int t, double scale = 3.0) {
  Eigen::MatrixXd z(m, t);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < t; ++j) z(i, j) = rng.next_range(-scale, scale);
  return z;
}

std::vector<bool> random_mask(Rng& rng, int m) {
  std::vector<bool> mask(m);
  for (int i = 0; i < m; ++i) mask[i] = rng.next_below(2) == 1;
  return mask;
}

// Term-by-term BCE oracle in the naive formulation.
double bce_oracle(const Eigen::VectorXd& c_star,
                  const std::vector<bool>& mask) {
  double sum = 0;
  for (Eigen::Index i = 0; i < c_star.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-c_star(i)));
    sum += mask[i] ? -std::log(s) : -std::log(1.0 - s);
  }
  return sum / c_star.size();
}

double total_of(const Eigen::MatrixXd& z, int y,
                const std::vector<bool>& mask, const ObjectiveConfig& cfg) {
  return total_loss_and_grad<double>(z, y, mask, cfg).total;
}

}  // namespace

TEST_CASE("candidate_losses against closed forms") {
  Eigen::MatrixXd z(3, 2);
  z << 2, 0, 2, 0, 5, 5;
  const auto l0 = candidate_losses<double>(z, 0);
  CHECK(l0(0) == doctest::Approx(std::log(1 + std::exp(-2.0))).epsilon(1e-12));
  CHECK(l0(0) == doctest::Approx(0.126928).epsilon(1e-5));
  const auto l1 = candidate_losses<double>(z, 1);
  CHECK(l1(1) == doctest::Approx(std::log(1 + std::exp(2.0))).epsilon(1e-12));
  CHECK(l1(1) == doctest::Approx(2.126928).epsilon(1e-5));
  CHECK(l0(2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(l1(2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS(candidate_losses<double>(z, 2));
  CHECK_THROWS(candidate_losses<double>(z, -1));
}

TEST_CASE("confidences are row maxima") {
  Eigen::MatrixXd z(2, 2);
  z << 2, 0, -1, 3;
  std::vector<int> arg;
  const auto c = confidences<double>(z, &arg);
  CHECK(c(0) == 2);
  CHECK(c(1) == 3);
  CHECK(arg == std::vector<int>{0, 1});

  Eigen::MatrixXd one_class(3, 1);
  one_class << 4, -2, 0;
  const auto c1 = confidences<double>(one_class);
  CHECK(c1(0) == 4);
  CHECK(c1(2) == 0);

  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_logits(rng, 1 + rng.next_below(6),
                                 1 + rng.next_below(4));
    const auto cc = confidences<double>(m);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double mx = m(i, 0);
      for (Eigen::Index j = 1; j < m.cols(); ++j) mx = std::max(mx, m(i, j));
      CHECK(cc(i) == mx);
    }
  }

  SUBCASE("row argmax ties resolve to the lowest class") {
    Eigen::MatrixXd tie(1, 3);
    tie << 7, 7, 7;
    std::vector<int> a;
    confidences<double>(tie, &a);
    CHECK(a[0] == 0);
  }
}

TEST_CASE("weights: temperature softmax") {
  Eigen::VectorXd c(3);
  c << 2, 1, 0;
  const auto w1 = weights<double>(c, 1.0);
  CHECK(w1(0) == doctest::Approx(0.66524).epsilon(1e-4));
  CHECK(w1(1) == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(w1(2) == doctest::Approx(0.09003).epsilon(1e-4));

  const auto w2 = weights<double>(c, 2.0);
  CHECK(w2(0) == doctest::Approx(0.50648).epsilon(1e-4));
  CHECK(w2(1) == doctest::Approx(0.30719).epsilon(1e-4));
  CHECK(w2(2) == doctest::Approx(0.18632).epsilon(1e-4));
  CHECK(w2(0) < w1(0));  // higher temperature, softer distribution

  Eigen::VectorXd flat = Eigen::VectorXd::Constant(5, 3.7);
  const auto wu = weights<double>(flat, 0.5);
  for (int i = 0; i < 5; ++i) CHECK(wu(i) == doctest::Approx(0.2).epsilon(1e-12));

  CHECK_THROWS(weights<double>(c, 0.0));
  CHECK_THROWS(weights<double>(c, -1.0));
}

TEST_CASE("weighted_loss") {
  Eigen::VectorXd w(2), l(2);
  w << 0.5, 0.5;
  l << 0.126928, 2.126928;
  CHECK(weighted_loss<double>(w, l) == doctest::Approx(1.126928).epsilon(1e-9));

  Eigen::VectorXd onehot(3), l3(3);
  onehot << 0, 1, 0;
  l3 << 5, 7, 9;
  CHECK(weighted_loss<double>(onehot, l3) == 7.0);

  Eigen::VectorXd w3(3);
  w3 << 0.2, 0.5, 0.3;
  Eigen::VectorXd lc = Eigen::VectorXd::Constant(3, 4.25);
  CHECK(weighted_loss<double>(w3, lc) == doctest::Approx(4.25).epsilon(1e-12));

  Eigen::VectorXd bad(4);
  CHECK_THROWS(weighted_loss<double>(w3, bad));
}

TEST_CASE("supervised_confidences branch behavior") {
  Eigen::MatrixXd z(1, 2);
  z << 2, -1;
  const int y = 1;

  const auto gold = supervised_confidences<double>(z, y, {true});
  CHECK(gold(0) == -1.0);  // gold row takes the gold class logit

  const auto nongold = supervised_confidences<double>(z, y, {false});
  CHECK(nongold(0) == 2.0);  // non-gold row keeps the max

  Eigen::MatrixXd agree(1, 2);
  agree << -1, 2;
  const auto coincide = supervised_confidences<double>(agree, 1, {true});
  CHECK(coincide(0) == 2.0);  // branches coincide when argmax == y
}

TEST_CASE("rationale_bce") {
  Eigen::VectorXd zero(1);
  zero << 0;
  CHECK(rationale_bce<double>(zero, {true}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Eigen::VectorXd big(1);
  big << 40;
  CHECK(rationale_bce<double>(big, {true}) == doctest::Approx(0.0));

  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_below(8));
    Eigen::VectorXd c(m);
    for (int i = 0; i < m; ++i) c(i) = rng.next_range(-6, 6);
    const auto mask = random_mask(rng, m);
    CHECK(rationale_bce<double>(c, mask) ==
          doctest::Approx(bce_oracle(c, mask)).epsilon(1e-12));
  }
}

TEST_CASE("single candidate reduces to plain cross-entropy gradient") {
  Eigen::MatrixXd z(1, 3);
  z << 1.0, -0.5, 0.25;
  const int y = 2;
  ObjectiveConfig cfg;
  const auto out = total_loss_and_grad<double>(z, y, {false}, cfg);
  CHECK(out.weights(0) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd p = (z.row(0).array() - z.row(0).maxCoeff()).exp();
  p /= p.sum();
  p(y) -= 1.0;
  // The weight path contributes nothing: dw/dc = w(1-w) = 0 at w=1.
  for (int j = 0; j < 3; ++j) {
    CHECK(out.dL_dz(0, j) == doctest::Approx(p(j)).epsilon(1e-12));
  }
}

TEST_CASE("total gradient matches finite differences") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_below(6));
    const int t = 2 + static_cast<int>(rng.next_below(2));
    const int y = static_cast<int>(rng.next_below(t));
    const auto z = random_logits(rng, m, t);
    auto mask = random_mask(rng, m);

    ObjectiveConfig cfg;
    cfg.tau = 0.5 + rng.next_double() * 2.0;
    cfg.lambda_rationale = rng.next_double() * 2.0;
    cfg.supervised = trial % 2 == 0;

    const auto out = total_loss_and_grad<double>(z, y, mask, cfg);
    const double step = 1e-6;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < t; ++j) {
        Eigen::MatrixXd zp = z;
        zp(i, j) += step;
        const double up = total_of(zp, y, mask, cfg);
        zp(i, j) -= 2 * step;
        const double down = total_of(zp, y, mask, cfg);
        const double fd = (up - down) / (2 * step);
        CHECK(out.dL_dz(i, j) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("objective invariants") {
  Rng rng(99);
  ObjectiveConfig cfg;

  SUBCASE("weights sum to one and are strictly positive") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto z = random_logits(rng, 1 + rng.next_below(8), 2);
      const auto w = weights<double>(confidences<double>(z), 0.7);
      CHECK(std::abs(w.sum() - 1.0) < 1e-9);
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        CHECK(w(i) > 0.0);
        CHECK(w(i) < 1.0 + 1e-12);
      }
    }
  }

  SUBCASE("shift invariance of the weights") {
    const auto z = random_logits(rng, 5, 3);
    const auto w = weights<double>(confidences<double>(z), 1.3);
    for (double delta : {-5.0, 0.3, 10.0}) {
      const Eigen::MatrixXd zs = z.array() + delta;
      const auto ws = weights<double>(confidences<double>(zs), 1.3);
      CHECK((w - ws).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("temperature limits") {
    const auto z = random_logits(rng, 6, 2, 0.5);
    const auto c = confidences<double>(z);
    const auto soft = weights<double>(c, 100.0);
    CHECK((soft.array() - 1.0 / 6).abs().maxCoeff() < 1e-3);

    const auto hard = weights<double>(c, 1e-3);
    Eigen::Index argmax;
    c.maxCoeff(&argmax);
    for (Eigen::Index i = 0; i < hard.size(); ++i) {
      CHECK(std::abs(hard(i) - (i == argmax ? 1.0 : 0.0)) < 1e-3);
    }
  }

  SUBCASE("constant shift changes total only through the losses") {
    const auto z = random_logits(rng, 4, 2);
    ObjectiveConfig plain;
    const auto a = total_loss_and_grad<double>(z, 0, {}, plain);
    const Eigen::MatrixXd zs = z.array() + 2.5;
    const auto b = total_loss_and_grad<double>(zs, 0, {}, plain);
    CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-12);
    // Softmax cross-entropy is itself shift-invariant row-wise.
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
  }

  SUBCASE("total is non-negative") {
    for (int trial = 0; trial < 20; ++trial) {
      const int m = 1 + static_cast<int>(rng.next_below(5));
      const auto z = random_logits(rng, m, 3);
      ObjectiveConfig sup;
      sup.supervised = true;
      sup.lambda_rationale = rng.next_double();
      CHECK(total_loss_and_grad<double>(z, 0, random_mask(rng, m), sup).total >=
            0.0);
    }
  }

  SUBCASE("supervised path with lambda 0 equals unsupervised") {
    const int m = 4;
    const auto z = random_logits(rng, m, 2);
    const auto mask = random_mask(rng, m);
    ObjectiveConfig sup;
    sup.supervised = true;
    sup.lambda_rationale = 0.0;
    ObjectiveConfig unsup;
    unsup.supervised = false;
    const auto a = total_loss_and_grad<double>(z, 1, mask, sup);
    const auto b = total_loss_and_grad<double>(z, 1, mask, unsup);
    CHECK(a.total == b.total);
    CHECK((a.dL_dz - b.dL_dz).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gold_candidate_mask uses subset semantics") {
  Sample sample;
  sample.query = {"q"};
  for (int s = 0; s < 4; ++s) {
    Sentence sent;
    sent.tokens = {"t"};
    sent.index = s;
    sample.document.push_back(sent);
  }
  sample.gold_rationales = {{1, 2}};
  const auto cands = enumerate_candidates(sample, 2);
  const auto mask = gold_candidate_mask(sample, cands);

  REQUIRE(mask.size() == cands.size());
  CHECK_FALSE(mask[0]);  // query-only is never a positive target
  for (std::size_t c = 1; c < cands.size(); ++c) {
    const auto& idx = cands[c].indices;
    bool expect = true;
    for (int i : idx) expect = expect && (i == 1 || i == 2);
    CHECK(mask[c] == expect);
  }
}
