// Copyright 2026 The tspd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>

#include "grad_cases.hpp"
#include "tspd/error.hpp"
#include "tspd/model.hpp"

namespace tspd {
namespace {

TEST(Model, InitIsDeterministicAndSeedSensitive) {
  const ModelConfig c = testing::tiny_model_config();
  EXPECT_EQ(init_model(c, 3).actor, init_model(c, 3).actor);
  EXPECT_EQ(init_model(c, 3).critic, init_model(c, 3).critic);
  EXPECT_FALSE(init_model(c, 3).actor == init_model(c, 4).actor);
}

TEST(Model, ConfigMapRoundTrip) {
  ModelConfig c = ModelConfig::with_hidden(16, 4, 2, 32);
  c.encoder.hierarchical = false;
  c.clip_init = 5.0;
  EXPECT_EQ(ModelConfig::from_map(c.to_map()), c);
  auto m = c.to_map();
  m.erase(m.begin());
  EXPECT_THROW(ModelConfig::from_map(m), LoadError);
}

TEST(Model, CheckpointRoundTripIsBitExact) {
  const Model m = init_model(testing::tiny_model_config(), 9);
  const auto path = std::filesystem::temp_directory_path() / "tspd_model_test.ckpt";
  save_model(path, m, {{"epoch", "3"}});
  const Model back = load_model(path);
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(back.actor, m.actor);
  EXPECT_EQ(back.critic, m.critic);
  std::filesystem::remove(path);
}

TEST(Model, ShapeMismatchIsLoadError) {
  Model m = init_model(testing::tiny_model_config(), 9);
  m.actor.get("actor.dec.v") = nn::Matrix(3, 1);
  EXPECT_THROW(validate_shapes(m), LoadError);
}

TEST(Model, PredictCostScalesWithCoordinates) {
  const Model m = init_model(testing::tiny_model_config(), 2);
  Instance a = generate_instances(6, 1, 1, Family::random_corner_depot, 1).instances[0];
  Instance b = a;
  for (Point& p : b.coords) p = {p.x * 100.0, p.y * 100.0};
  nn::Tape t;
  const double va = predict_cost(t, m, a).value()[0];
  const double vb = predict_cost(t, m, b).value()[0];
  EXPECT_NEAR(vb, 100.0 * va, 1e-9 * std::max(1.0, std::abs(vb)));
}

TEST(Model, SampledSolvesAreSeedReproducible) {
  const Model m = init_model(testing::tiny_model_config(), 2);
  const Instance inst = generate_instances(8, 1, 6, Family::random_corner_depot).instances[0];
  EXPECT_EQ(solve_sampled(m, inst, 4).total_cost, solve_sampled(m, inst, 4).total_cost);
}

}  // namespace
}  // namespace tspd
