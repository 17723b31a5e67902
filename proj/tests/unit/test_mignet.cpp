#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "impact/core/error.hpp"
#include "impact/core/random.hpp"
#include "impact/dataset/event_file.hpp"
#include "impact/mignet/layers.hpp"
#include "impact/mignet/model.hpp"
#include "impact/sim/device.hpp"
#include "testkit.hpp"

using namespace impact;
using namespace impact::mignet;
namespace fs = std::filesystem;

namespace {

constexpr double kEps = 1e-5;
constexpr double kTol = 1e-4;

LabeledWindow labeled(const sim::LabeledEvent& e) {
  return {e.event.event_id, normalize(build_window(e.event)), e.label, Partition::Train};
}

}  // namespace

TEST_CASE("conv layer gradients match finite differences") {
  CHECK(testkit::check_conv_layer_gradients({6, 20, 1, 3, 1, 7}, 1, kEps) < kTol);
  CHECK(testkit::check_conv_layer_gradients({6, 12, 3, 2, 3, 3}, 2, kEps) < kTol);
  CHECK(testkit::check_conv_layer_gradients({4, 9, 2, 4, 3, 5}, 3, kEps) < kTol);
  CHECK(testkit::check_conv_layer_gradients({5, 5, 1, 1, 1, 1}, 4, kEps) < kTol);
}

TEST_CASE("dense, pooling and loss gradients match finite differences") {
  for (EventClass label : {EventClass::TrueImpact, EventClass::NonContact}) {
    CHECK(testkit::check_dense_loss_gradients(5, label, {1.7, 0.6}, 10, kEps) < kTol);
  }
  CHECK(testkit::check_pooling_gradients(7, 3, 20, kEps) < kTol);

  const auto maps = testkit::random_input(12, 13);
  const auto pooled = global_average_pool(maps, 4, 3);
  CHECK(pooled[1] == doctest::Approx((maps[1] + maps[4] + maps[7] + maps[10]) / 4));
  const auto back = global_average_pool_backward(std::vector<double>{1.0, 2.0, 3.0}, 4);
  CHECK(back.size() == 12);
  CHECK(back[5] == 0.75);
}

TEST_CASE("full miniature model gradients on ten seeds") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    const auto model = MiGNetModel::initialize(testkit::mini_architecture(), seed, 1.0);
    const auto x = testkit::random_input(120, 100 + seed);
    const auto label = seed % 2 ? EventClass::TrueImpact : EventClass::NonContact;
    const auto r = testkit::check_model_gradients(model, x, label, {1.2, 0.8});
    CHECK(r.checked == model.parameter_count());
    CHECK_MESSAGE(r.max_rel_error < kTol, r.worst);
  }
  auto flat = testkit::mini_architecture();
  flat.head = Head::FlattenDense;
  const auto r = testkit::check_model_gradients(MiGNetModel::initialize(flat, 3, 1.0), testkit::random_input(120, 5),
                                                EventClass::TrueImpact, {});
  CHECK_MESSAGE(r.max_rel_error < kTol, r.worst);
}

TEST_CASE("forward pass matches the golden reference") {
  const fs::path dir = IMPACT_GOLDEN_DIR;
  const auto model = load_model(dir / "mini_model.txt");
  std::vector<double> input, expected;
  {
    std::istringstream in(dataset::read_text_file(dir / "mini_input.txt"));
    for (double v; in >> v;) input.push_back(v);
    std::istringstream ex(dataset::read_text_file(dir / "mini_expected.txt"));
    for (double v; ex >> v;) expected.push_back(v);
  }
  REQUIRE(input.size() == 120);
  REQUIRE(expected.size() == 2);
  const auto p = forward(model, input).probabilities;
  CHECK(p[0] == doctest::Approx(expected[0]).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(expected[1]).epsilon(1e-12));
}

TEST_CASE("model files round trip exactly") {
  const auto model = MiGNetModel::initialize(Architecture{}, 21);
  const fs::path path = fs::temp_directory_path() / "impact_mignet_test.model";
  save_model(model, path);
  const auto back = load_model(path);
  CHECK(back == model);
  CHECK_THROWS_AS(load_model(path, testkit::mini_architecture()), FormatError);

  std::string text = dataset::read_text_file(path);
  dataset::write_text_file(path, text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_model(path), FormatError);
  dataset::write_text_file(path, "mignet-model 2\n");
  CHECK_THROWS_AS(load_model(path), FormatError);
  fs::remove(path);
  CHECK_THROWS_AS(load_model(path), IoError);
}

TEST_CASE("architecture descriptors") {
  const Architecture def;
  CHECK(def.descriptor() == "conv1d=16x7,32x5 conv2d=32x3x3 head=gap input=6x200 classes=2");
  CHECK(Architecture::parse(def.descriptor()) == def);
  auto only2d = def;
  only2d.conv1d.clear();
  CHECK(Architecture::parse(only2d.descriptor()) == only2d);
  CHECK_THROWS_AS(Architecture::parse("conv1d=16x7"), FormatError);
  CHECK_THROWS_AS(Architecture::parse("conv1d=none conv2d=none head=gap input=6x200 classes=2"), FormatError);
  CHECK_THROWS_AS(Architecture::parse("conv1d=16x7 conv2d=32x3x3 head=max input=6x200 classes=2"), FormatError);
  CHECK_THROWS_AS(Architecture::parse("conv1d=99999999999x7 conv2d=none head=gap input=6x200 classes=2"),
                  FormatError);
  CHECK_THROWS_AS(MiGNetModel::initialize(def, 1, 0.0), InvalidParameter);
}

TEST_CASE("initialization is seeded") {
  CHECK(MiGNetModel::initialize(Architecture{}, 5) == MiGNetModel::initialize(Architecture{}, 5));
  CHECK_FALSE(MiGNetModel::initialize(Architecture{}, 5) == MiGNetModel::initialize(Architecture{}, 6));
  const auto m = MiGNetModel::initialize(testkit::mini_architecture(), 1, 2.0);
  const double limit = 2.0 * std::sqrt(6.0 / 3.0);
  for (double v : m.parameters()[0].data()) CHECK(std::abs(v) <= limit);
  for (double v : m.parameters()[1].data()) CHECK(v == 0.0);
}

TEST_CASE("prediction ties and input checks") {
  const auto zero = MiGNetModel::zeros(testkit::mini_architecture());
  ProcessedWindow w(20, 5, {Unit::G, Unit::G, Unit::G, Unit::RadPerSec2, Unit::RadPerSec2, Unit::RadPerSec2});
  CHECK_THROWS_AS(predict(zero, w), InvalidParameter);
  w.mark_normalized({400, 400, 400, 20000, 20000, 20000});
  const auto p = predict(zero, w);
  CHECK(p.score == 0.5);
  CHECK(p.label == EventClass::NonContact);
  CHECK(predict(zero, w, TieRule::TrueImpact).label == EventClass::TrueImpact);

  ProcessedWindow wide(30, 5, w.channel_units());
  wide.mark_normalized(w.row_scale());
  CHECK_THROWS_AS(predict(zero, wide), StructuralError);
}

TEST_CASE("loss clamping and stale caches") {
  const auto before = clamp_count();
  const std::vector<double> p{1.0, 0.0};
  CHECK(weighted_cross_entropy(p, EventClass::NonContact, {1, 2}) == doctest::Approx(-2 * std::log(1e-12)));
  CHECK(clamp_count() == before + 1);

  auto model = MiGNetModel::initialize(testkit::mini_architecture(), 1);
  const auto fwd = forward(model, testkit::random_input(120, 1));
  model.mutable_parameters();
  CHECK_THROWS_AS(backward(model, fwd.cache, EventClass::TrueImpact, {}), InvalidState);
}

TEST_CASE("sgd with momentum follows the update rule") {
  auto model = MiGNetModel::zeros(testkit::mini_architecture());
  auto grads = zero_gradients(model);
  auto vel = zero_gradients(model);
  grads[5][0] = 2.0;
  TrainConfig cfg;
  sgd_step(model, grads, vel, cfg);
  CHECK(model.parameters()[5][0] == doctest::Approx(-0.02));
  sgd_step(model, grads, vel, cfg);
  CHECK(vel[5][0] == doctest::Approx(0.9 * -0.02 - 0.02));
  CHECK(model.parameters()[5][0] == doctest::Approx(-0.02 - 0.038));
}

TEST_CASE("training refuses test windows and reduces loss") {
  const auto data = sim::gen_dataset(12, 12, 3);
  std::vector<LabeledWindow> set;
  for (const auto& d : data) set.push_back(labeled(d));
  Architecture small;
  small.conv1d = {{4, 1, 7}};
  small.conv2d = {{4, 3, 3}};
  auto model = MiGNetModel::initialize(small, 2);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 8;
  const auto r = train(model, set, cfg);
  REQUIRE(r.epoch_loss.size() == 15);
  CHECK(r.updates == 15 * 3);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());

  auto again = MiGNetModel::initialize(small, 2);
  train(again, set, cfg);
  CHECK(again == model);

  set[3].partition = Partition::Test;
  CHECK_THROWS_AS(train(model, set, cfg), ContaminationError);
  CHECK_THROWS_AS(train(model, std::span<const LabeledWindow>{}, cfg), InvalidParameter);
  cfg.momentum = 1.0;
  set[3].partition = Partition::Train;
  CHECK_THROWS_AS(train(model, set, cfg), InvalidParameter);
}

TEST_CASE("training does not depend on heap layout") {
  const auto data = sim::gen_dataset(6, 6, 5);
  std::vector<LabeledWindow> set;
  for (const auto& d : data) set.push_back(labeled(d));
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  auto first = MiGNetModel::initialize(Architecture{}, 4);
  train(first, set, cfg);
  // Odd-sized live allocations shift where later buffers land.
  std::vector<std::vector<char>> ballast;
  for (int round = 1; round <= 3; ++round) {
    for (int i = 0; i < round * 5; ++i) ballast.emplace_back(static_cast<std::size_t>(8 * i + 24));
    auto again = MiGNetModel::initialize(Architecture{}, 4);
    train(again, set, cfg);
    CAPTURE(round);
    CHECK(again == first);
  }
}
