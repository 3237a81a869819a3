#include <doctest.h>

#include <cmath>

#include "oed/common/rng.hpp"
#include "oed/models/svm.hpp"
#include "synthetic.hpp"

using namespace oed;
using namespace oed::models;

namespace {

RowMatrix sample_x() {
  RowMatrix x(12, 3);
  x << 0.2, 1.0, -0.3, 0.5, 0.8, 0.1, -0.4, 0.9, 0.6, 1.1, -0.2, 0.3, 0.9, 0.1, -0.5, -1.0, -0.6, 0.2, -0.7, -1.1,
      -0.4, 0.3, -0.9, 0.8, 1.4, 0.6, 0.9, -0.2, 0.3, -1.2, 0.0, -0.1, 0.4, -1.3, 0.5, -0.1;
  return x;
}

const std::vector<int> kLabels{1, 1, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0};

RowMatrix probes() {
  RowMatrix t(3, 3);
  t << 0.1, 0.5, 0.0, -0.5, -0.5, 0.5, 1.0, 1.0, 1.0;
  return t;
}

}  // namespace

// Decision values frozen from a reference libsvm-based classifier with the
// same data, C = 1, gamma = 1 / (d * Var(X)), degree 3, coef0 0.
TEST_CASE("decision values match a reference implementation for each kernel") {
  struct Case {
    SvmKernel kernel;
    double values[3];
  };
  const Case cases[] = {
      {SvmKernel::kLinear, {0.37983833192438327, -1.2512092276214613, 2.550504527777751}},
      {SvmKernel::kPolynomial, {0.22044310485605684, -0.23711668230480343, 2.029571980643445}},
      {SvmKernel::kRbf, {1.0804363339974516, -0.5644953210725618, 0.8533151883480132}},
      {SvmKernel::kSigmoid, {0.5123663832372827, -1.0314915648832443, 1.8540705661472656}},
  };
  const auto x = sample_x();
  const auto t = probes();
  for (const auto& c : cases) {
    SvmConfig cfg;
    cfg.kernel = c.kernel;
    KernelSvm svm(cfg);
    svm.fit(x, kLabels);
    INFO(to_string(c.kernel));
    CHECK(svm.gamma() == doctest::Approx(0.699447889513139).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(svm.decision(t.row(i)) - c.values[i]) < 5e-3);
  }
}

TEST_CASE("linearly separable data is fitted exactly") {
  Rng rng(4);
  RowMatrix x(60, 4);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) {
    y[static_cast<std::size_t>(i)] = i % 2;
    for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform(-1, 1);
    x(i, 0) = (i % 2 ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
  }
  SvmConfig cfg;
  cfg.kernel = SvmKernel::kLinear;
  cfg.c = 10;
  KernelSvm svm(cfg);
  svm.fit(x, y);
  for (int i = 0; i < 60; ++i) CHECK(svm.predict(x.row(i)) == y[static_cast<std::size_t>(i)]);
  CHECK(svm.support_count() < 60);

  KernelSvm again(cfg);
  again.fit(x, y);
  CHECK(again.rho() == svm.rho());
  CHECK(again.iterations() == svm.iterations());
}

TEST_CASE("one class in training gives a constant prediction") {
  RowMatrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  KernelSvm svm;
  svm.fit(x, std::vector<int>{1, 1, 1});
  CHECK(svm.predict(x.row(0)) == 1);
  RowVector far(2);
  far << -100, -100;
  CHECK(svm.predict(far) == 1);
}

TEST_CASE("zero variance input falls back to gamma 1") {
  RowMatrix x = RowMatrix::Constant(4, 2, 0.5);
  KernelSvm svm;
  svm.fit(x, std::vector<int>{0, 1, 0, 1});
  CHECK(svm.gamma() == 1.0);
}

TEST_CASE("svm token classifier ignores seeds and round-trips") {
  corpus::Corpus c;
  c.trainval = oed::testing::separable_dataset(20, 2);
  c.test = oed::testing::separable_dataset(5, 3);
  c.test.partition = corpus::Partition::kTest;
  for (auto& s : c.test.sentences) s.id = "t" + s.id;
  const auto store = oed::testing::make_store(c, {featurize::FeatureKind::W});

  SvmClassifier a(SvmConfig{}, store.context);
  CHECK_FALSE(a.iterative());
  Rng rng(1);
  a.fit(store.trainval, {}, {}, rng);
  CHECK(a.fitted());
  // Each trigger noun appears only with label 1, so the train set is fitted.
  const auto counts = evaluate(a, store.trainval);
  CHECK(counts.fp == 0);
  CHECK(counts.fn == 0);

  SvmClassifier b(SvmConfig{}, store.context);
  b.deserialize(a.serialize());
  for (const auto& s : store.test) {
    const auto p = a.predict_proba(s);
    CHECK(p == b.predict_proba(s));
    for (double v : p) CHECK((v == 0.0 || v == 1.0));
  }
  CHECK(svm_kernel_from_string("poly") == SvmKernel::kPolynomial);
  CHECK_THROWS_AS(svm_kernel_from_string("cubic"), UsageError);
}
