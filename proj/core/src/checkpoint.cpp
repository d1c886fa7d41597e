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

#include "tspd/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tspd/error.hpp"

namespace tspd::nn {

namespace {

constexpr const char* kMagic = "TSPD1";

void check_token(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos) {
    throw ArgumentError(std::string("checkpoint ") + what + " must be a non-empty token without whitespace: '" + s + "'");
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::array<char, 8> to_le(double d) {
  auto bits = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  return b;
}

double from_le(const std::array<char, 8>& b) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError("checkpoint: unexpected end of manifest");
  return line;
}

}  // namespace

std::uint64_t config_hash(const std::map<std::string, std::string>& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : config) feed(k + "=" + v + "\n");
  return h;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << '\n';
  for (const auto& [k, v] : ckpt.config) {
    check_token(k, "key");
    check_token(v, "value");
    out << "config " << k << ' ' << v << '\n';
  }
  out << "config_hash " << hex64(config_hash(ckpt.config)) << '\n';
  for (const auto& [k, v] : ckpt.info) {
    check_token(k, "key");
    check_token(v, "value");
    out << "info " << k << ' ' << v << '\n';
  }
  out << "dtype f64\n";
  out << "tensors " << ckpt.params.size() << '\n';
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    check_token(ckpt.params.name(i), "tensor name");
    out << ckpt.params.name(i) << ' ' << ckpt.params.at(i).rows() << ' ' << ckpt.params.at(i).cols() << '\n';
  }
  out << "data\n";
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    for (double d : ckpt.params.at(i).data()) {
      const auto b = to_le(d);
      out.write(b.data(), 8);
    }
  }
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  if (next_line(in) != kMagic) throw LoadError("checkpoint: bad magic header");
  std::string stored_hash;
  std::string line = next_line(in);
  while (line.rfind("config ", 0) == 0) {
    std::istringstream ls(line.substr(7));
    std::string k, v;
    if (!(ls >> k >> v)) throw LoadError("checkpoint: malformed config line '" + line + "'");
    ckpt.config[k] = v;
    line = next_line(in);
  }
  if (line.rfind("config_hash ", 0) != 0) throw LoadError("checkpoint: missing config_hash");
  stored_hash = line.substr(12);
  if (stored_hash != hex64(config_hash(ckpt.config))) throw LoadError("checkpoint: config hash mismatch");
  line = next_line(in);
  while (line.rfind("info ", 0) == 0) {
    std::istringstream ls(line.substr(5));
    std::string k, v;
    if (!(ls >> k >> v)) throw LoadError("checkpoint: malformed info line '" + line + "'");
    ckpt.info[k] = v;
    line = next_line(in);
  }
  if (line != "dtype f64") throw LoadError("checkpoint: unsupported dtype line '" + line + "'");
  line = next_line(in);
  std::size_t count = 0;
  if (std::sscanf(line.c_str(), "tensors %zu", &count) != 1) throw LoadError("checkpoint: missing tensor count");
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> shapes;
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream ls(next_line(in));
    std::string name;
    std::size_t r = 0, c = 0;
    if (!(ls >> name >> r >> c)) throw LoadError("checkpoint: malformed tensor entry " + std::to_string(i));
    shapes.push_back({name, {r, c}});
  }
  if (next_line(in) != "data") throw LoadError("checkpoint: missing data marker");
  for (const auto& [name, shape] : shapes) {
    Matrix m(shape.first, shape.second);
    for (double& d : m.data()) {
      std::array<char, 8> b{};
      if (!in.read(b.data(), 8)) throw LoadError("checkpoint: truncated data for " + name);
      d = from_le(b);
    }
    try {
      ckpt.params.add(name, std::move(m));
    } catch (const ArgumentError& e) {
      throw LoadError(std::string("checkpoint: ") + e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw LoadError("checkpoint: trailing bytes after data");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace tspd::nn
