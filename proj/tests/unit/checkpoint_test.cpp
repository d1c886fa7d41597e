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

#include <sstream>
#include <string>

#include "generators.hpp"
#include "tspd/checkpoint.hpp"
#include "tspd/error.hpp"

namespace tspd::nn {
namespace {

Checkpoint sample() {
  SplitMix64 rng(4);
  Checkpoint c;
  c.config = {{"hidden", "8"}, {"heads", "2"}};
  c.info = {{"epoch", "12"}};
  c.params.add("a.W", testing::random_matrix(rng, 3, 2));
  c.params.add("a.b", testing::random_matrix(rng, 1, 2));
  return c;
}

std::string bytes(const Checkpoint& c) {
  std::ostringstream out;
  write_checkpoint(out, c);
  return out.str();
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Checkpoint c = sample();
  std::istringstream in(bytes(c));
  const Checkpoint back = read_checkpoint(in);
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(back.info, c.info);
  EXPECT_EQ(back.params, c.params);
}

TEST(Checkpoint, HeaderStartsWithMagic) { EXPECT_EQ(bytes(sample()).rfind("TSPD1\n", 0), 0u); }

TEST(Checkpoint, ConfigHashIgnoresInfoButNotConfig) {
  auto c = sample();
  const auto h = config_hash(c.config);
  c.config["hidden"] = "16";
  EXPECT_NE(config_hash(c.config), h);
  EXPECT_EQ(config_hash({}), 0xcbf29ce484222325ULL);
}

TEST(Checkpoint, TamperedConfigFailsHash) {
  std::string s = bytes(sample());
  s.replace(s.find("config hidden 8"), 15, "config hidden 9");
  std::istringstream in(s);
  EXPECT_THROW(read_checkpoint(in), LoadError);
}

TEST(Checkpoint, TruncatedAndTrailingDataRejected) {
  const std::string s = bytes(sample());
  std::istringstream cut(s.substr(0, s.size() - 3));
  EXPECT_THROW(read_checkpoint(cut), LoadError);
  std::istringstream extra(s + "x");
  EXPECT_THROW(read_checkpoint(extra), LoadError);
  std::istringstream bad("TSPD0\n");
  EXPECT_THROW(read_checkpoint(bad), LoadError);
}

}  // namespace
}  // namespace tspd::nn
