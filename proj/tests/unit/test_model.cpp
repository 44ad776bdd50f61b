#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fpe/error.hpp"
#include "fpe/ml/model.hpp"
#include "toy_data.hpp"

using namespace fpe;
using namespace fpe::ml;
using fpe::dataset::LabeledVector;
using testing_support::noise;
using testing_support::separable;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

// Small budgets keep the suite quick; the algorithms are unchanged.
Hyperparams quick(Algorithm a) {
  auto hp = Hyperparams::defaults(a);
  hp.forest.tree_count = 16;
  hp.mlp.max_epochs = 30;
  hp.svm.max_epochs = 200;
  return hp;
}

class PerAlgorithm : public ::testing::TestWithParam<Algorithm> {};

std::string algo_name(const ::testing::TestParamInfo<Algorithm>& info) {
  return std::string(to_string(info.param));
}

}  // namespace

TEST(ChooseK, Examples) {
  EXPECT_EQ(choose_k(100), 10u);
  EXPECT_EQ(choose_k(2), 1u);
  EXPECT_EQ(choose_k(1), 1u);
  EXPECT_EQ(choose_k(759390), 871u);
  EXPECT_EQ(choose_k(static_cast<std::size_t>(std::llround(949238 * 0.8))), 871u);
  EXPECT_EQ(choose_k(30), 5u);
  EXPECT_EQ(choose_k(30, KRounding::Floor), 5u);
  EXPECT_EQ(choose_k(42), 6u);
  EXPECT_EQ(choose_k(42, KRounding::Floor), 6u);
  EXPECT_EQ(choose_k(56), 7u);
  EXPECT_EQ(choose_k(56, KRounding::Floor), 7u);
  EXPECT_EQ(choose_k(90), 9u);
  EXPECT_EQ(choose_k(91), 10u);
  EXPECT_EQ(choose_k(91, KRounding::Floor), 9u);
}

TEST(Hyperparams, Overrides) {
  auto hp = Hyperparams::defaults(Algorithm::Mlp);
  hp.set("mlp.hidden", "950x950x950");
  EXPECT_EQ(hp.mlp.hidden_sizes, (std::vector<std::size_t>{950, 950, 950}));
  hp.set("tree.max_depth", "12");
  EXPECT_EQ(hp.tree.max_depth, 12u);
  hp.set("knn.k", "5");
  EXPECT_EQ(hp.knn.k, 5u);
  EXPECT_EQ(code_of([&] { hp.set("knn.nope", "1"); }), Errc::InvalidHyperparams);
  EXPECT_EQ(code_of([&] { hp.set("svm.tolerance", "x"); }), Errc::InvalidHyperparams);
  EXPECT_EQ(code_of([&] { hp.set("nodot", "1"); }), Errc::InvalidHyperparams);
}

TEST(Hyperparams, Defaults) {
  const auto hp = Hyperparams::defaults(Algorithm::RandomForest);
  EXPECT_EQ(hp.forest.tree_count, 128u);
  EXPECT_EQ(hp.forest.features_per_split, 38u);
  EXPECT_EQ(hp.logistic.max_iterations, 10000u);
  EXPECT_EQ(hp.logistic.tolerance, 1e-6);
  EXPECT_EQ(hp.svm.tolerance, 1e-8);
  EXPECT_EQ(hp.mlp.tolerance, 1e-9);
  EXPECT_EQ(hp.mlp.hidden_sizes, (std::vector<std::size_t>{64, 64}));
}

TEST(Train, Errors) {
  const std::vector<LabeledVector> empty;
  EXPECT_EQ(code_of([&] { train(Hyperparams::defaults(Algorithm::Knn), empty, 1); }), Errc::EmptyTrainingSet);
  auto hp = Hyperparams::defaults(Algorithm::Knn);
  hp.knn.k = 11;
  EXPECT_EQ(code_of([&] { train(hp, separable(10, 1), 1); }), Errc::InvalidHyperparams);
  auto bad = Hyperparams::defaults(Algorithm::LogisticRegression);
  bad.logistic.tolerance = 0;
  EXPECT_EQ(code_of([&] { train(bad, separable(10, 1), 1); }), Errc::InvalidHyperparams);
  EXPECT_EQ(code_of([] { parse_algorithm("cnn"); }), Errc::InvalidHyperparams);
  EXPECT_EQ(parse_algorithm("c45"), Algorithm::DecisionTree);
}

TEST_P(PerAlgorithm, SeparableHeldOutIsPerfect) {
  // Only feature 0 is populated; uniform noise elsewhere would swamp the
  // Euclidean distance for k-NN.
  const auto model = train(quick(GetParam()), separable(400, 11, 1), 3);
  const auto test = separable(1000, 12, 1);
  for (const auto& r : test) ASSERT_EQ(model.predict(r.features), r.label);
}

TEST_P(PerAlgorithm, ConstantLabelTrainingSet) {
  for (std::uint8_t label : {0, 1}) {
    auto data = noise(40, 13, 64);
    for (auto& r : data) r.label = label;
    const auto model = train(quick(GetParam()), data, 1);
    for (const auto& r : noise(100, 14, 64)) ASSERT_EQ(model.predict(r.features), label);
  }
}

TEST_P(PerAlgorithm, DeterministicInSeed) {
  const auto data = noise(150, 15, 200);
  const auto hp = quick(GetParam());
  EXPECT_EQ(serialize_model(train(hp, data, 5)), serialize_model(train(hp, data, 5)));
}

TEST_P(PerAlgorithm, BatchEqualsLoopAndRepeatedCalls) {
  const auto model = train(quick(GetParam()), noise(200, 16, 300), 7);
  const auto probe = noise(10000, 17, 300);
  std::vector<std::uint8_t> loop;
  for (const auto& r : probe) loop.push_back(model.predict(r.features));
  EXPECT_EQ(model.predict_batch(probe, 1), loop);
  EXPECT_EQ(model.predict_batch(probe, 3), loop);
  EXPECT_EQ(model.predict_batch(std::span(probe).first(1), 1)[0], loop[0]);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(model.predict(probe[0].features), loop[0]);
}

TEST_P(PerAlgorithm, Fpm1RoundTrip) {
  const auto model = train(quick(GetParam()), noise(150, 18, 100), 9);
  const Bytes bytes = serialize_model(model);
  ASSERT_EQ(to_hex(ByteView(bytes).first(8)), "46504d3101000000");
  EXPECT_EQ(bytes[8], static_cast<std::uint8_t>(GetParam()));
  const auto back = deserialize_model(bytes);
  EXPECT_EQ(back.algorithm(), model.algorithm());
  EXPECT_EQ(back.meta().seed, 9u);
  EXPECT_EQ(back.meta().train_size, 150u);
  EXPECT_EQ(serialize_model(back), bytes);
  for (const auto& r : noise(1000, 19, 100)) ASSERT_EQ(back.predict(r.features), model.predict(r.features));

  const auto path = std::filesystem::temp_directory_path() / ("fpe_model_" + std::string(to_string(GetParam())) + ".fpm");
  save_model(model, path);
  EXPECT_EQ(serialize_model(load_model(path)), bytes);
  std::filesystem::remove(path);
}

INSTANTIATE_TEST_SUITE_P(All, PerAlgorithm, ::testing::ValuesIn(kAllAlgorithms), algo_name);

TEST(Fpm1, Guards) {
  const auto model = train(quick(Algorithm::DecisionTree), separable(50, 20), 1);
  Bytes bytes = serialize_model(model);

  Bytes magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(code_of([&] { deserialize_model(magic); }), Errc::BadMagic);

  Bytes trailing = bytes;
  trailing.push_back(0);
  EXPECT_EQ(code_of([&] { deserialize_model(trailing); }), Errc::BadModel);

  Bytes cut = bytes;
  cut.resize(cut.size() - 3);
  EXPECT_EQ(code_of([&] { deserialize_model(cut); }), Errc::BadModel);

  Bytes tag = bytes;
  tag[8] = 99;
  EXPECT_EQ(code_of([&] { deserialize_model(tag); }), Errc::BadModel);

  EXPECT_EQ(code_of([] { load_model("/nonexistent/m.fpm"); }), Errc::IoError);
}
