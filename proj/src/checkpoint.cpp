/*
 * Copyright 2025 The ivsid Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ivsid/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ivsid/rng.hpp"

namespace ivsid::ckpt {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), compact single-buffer implementation.
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<uint32_t, 64> kSha256K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

inline uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  std::array<uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                               0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::string msg = bytes;
  const uint64_t bitlen = static_cast<uint64_t>(bytes.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i)
    msg.push_back(static_cast<char>((bitlen >> (8 * i)) & 0xff));

  for (size_t off = 0; off < msg.size(); off += 64) {
    uint32_t w[64];
    for (int t = 0; t < 16; ++t)
      w[t] = (static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t])) << 24) |
             (static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 1])) << 16) |
             (static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 2])) << 8) |
             static_cast<uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 3]));
    for (int t = 16; t < 64; ++t) {
      const uint32_t s0 =
          rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
      const uint32_t s1 =
          rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
      w[t] = w[t - 16] + s0 + w[t - 7] + s1;
    }
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
    uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int t = 0; t < 64; ++t) {
      const uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const uint32_t ch = (e & f) ^ (~e & g);
      const uint32_t t1 = hh + s1 + ch + kSha256K[t] + w[t];
      const uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const uint32_t t2 = s0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint32_t v : h)
    for (int i = 7; i >= 0; --i) out.push_back(hex[(v >> (4 * i)) & 0xf]);
  return out;
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

namespace {

json tensor_to_json(const Tensor& t) {
  return json{{"rows", t.rows}, {"cols", t.cols}, {"data", t.a}};
}

Tensor tensor_from_json(const json& j) {
  Tensor t(j.at("rows").get<int>(), j.at("cols").get<int>(),
           j.at("data").get<std::vector<double>>());
  return t;
}

json norm_to_json(const data::NormInfo& n) {
  return json{{"method", data::norm_method_name(n.method)},
              {"fit_prefix", n.fit_prefix},
              {"u", {{"a", n.u.a}, {"b", n.u.b}}},
              {"y", {{"a", n.y.a}, {"b", n.y.b}}}};
}

data::NormInfo norm_from_json(const json& j) {
  data::NormInfo n;
  n.method = data::norm_method_from_string(j.at("method").get<std::string>());
  n.fit_prefix = j.at("fit_prefix").get<int>();
  n.u = {j.at("u").at("a").get<double>(), j.at("u").at("b").get<double>()};
  n.y = {j.at("y").at("a").get<double>(), j.at("y").at("b").get<double>()};
  return n;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("checkpoint: cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint: bad JSON in '" + path +
                             "': " + e.what());
  }
  return j;
}

}  // namespace

void save_crisp(const std::string& path, const CrispCheckpoint& c) {
  json j;
  j["format"] = "ivsid-crisp-v1";
  j["kind"] = model::model_kind_name(c.params.kind);
  j["regressor"] = {{"n_x", c.params.reg.n_x},
                    {"n_d", c.params.reg.n_d},
                    {"n_y", c.params.reg.n_y}};
  j["hidden"] = c.params.hidden_sizes();
  j["activation"] = interval::activation_name(c.params.hidden_activation());
  j["dataset"] = c.dataset;
  j["seed"] = c.seed;
  if (c.norm) j["normalization"] = norm_to_json(*c.norm);
  json tensors = json::object();
  model::for_each_param(c.params,
                        [&](const std::string& name, const Tensor& t, bool,
                            bool) { tensors[name] = tensor_to_json(t); });
  j["tensors"] = std::move(tensors);
  write_file(path, j.dump(1) + "\n");
}

CrispCheckpoint load_crisp(const std::string& path) {
  const json j = read_json(path);
  if (j.value("format", "") != "ivsid-crisp-v1")
    throw std::runtime_error("checkpoint: '" + path +
                             "' is not a crisp model checkpoint");
  CrispCheckpoint c;
  data::RegressorSpec reg{j.at("regressor").at("n_x").get<int>(),
                          j.at("regressor").at("n_d").get<int>(),
                          j.at("regressor").at("n_y").get<int>()};
  const auto hidden = j.at("hidden").get<std::vector<int>>();
  const auto act =
      interval::activation_from_string(j.at("activation").get<std::string>());
  Rng rng(0);
  c.params = model::model_kind_from_string(j.at("kind").get<std::string>()) ==
                     model::ModelKind::Node
                 ? model::make_node(reg, hidden, act, rng)
                 : model::make_lstm(reg, hidden, rng);
  const json& tensors = j.at("tensors");
  model::for_each_param(c.params, [&](const std::string& name, Tensor& t,
                                      bool, bool) {
    if (!tensors.contains(name))
      throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
    Tensor loaded = tensor_from_json(tensors.at(name));
    if (!loaded.same_shape(t))
      throw std::runtime_error("checkpoint: shape mismatch for '" + name +
                               "'");
    t = std::move(loaded);
  });
  c.dataset = j.value("dataset", "");
  c.seed = j.value("seed", uint64_t{0});
  if (j.contains("normalization")) c.norm = norm_from_json(j.at("normalization"));
  return c;
}

void save_inn(const std::string& path, const InnCheckpoint& c) {
  json j;
  j["format"] = "ivsid-inn-v1";
  j["crisp_sha256"] = c.crisp_sha256;
  j["crisp_path"] = c.crisp_path;
  j["trick"] = ivmodel::trick_name(c.delta.trick);
  j["alpha"] = c.alpha;
  j["lambda"] = c.lambda;
  j["r_h"] = c.r_h;
  j["r_o"] = c.r_o;
  j["seed"] = c.seed;
  // Array, not object: radius order must follow the parameter enumeration.
  json radii = json::array();
  for (size_t i = 0; i < c.delta.names.size(); ++i)
    radii.push_back({{"name", c.delta.names[i]},
                     {"lo", tensor_to_json(c.delta.raw_lo[i])},
                     {"hi", tensor_to_json(c.delta.raw_hi[i])}});
  j["radii"] = std::move(radii);
  write_file(path, j.dump(1) + "\n");
}

InnCheckpoint load_inn(const std::string& path) {
  const json j = read_json(path);
  if (j.value("format", "") != "ivsid-inn-v1")
    throw std::runtime_error("checkpoint: '" + path +
                             "' is not an interval model checkpoint");
  InnCheckpoint c;
  c.crisp_sha256 = j.at("crisp_sha256").get<std::string>();
  c.crisp_path = j.value("crisp_path", "");
  c.delta.trick = ivmodel::trick_from_string(j.at("trick").get<std::string>());
  c.alpha = j.at("alpha").get<double>();
  c.lambda = j.value("lambda", 0.0);
  c.r_h = j.value("r_h", 0.0);
  c.r_o = j.value("r_o", 0.0);
  c.seed = j.value("seed", uint64_t{0});
  for (const auto& v : j.at("radii")) {
    c.delta.names.push_back(v.at("name").get<std::string>());
    c.delta.raw_lo.push_back(tensor_from_json(v.at("lo")));
    c.delta.raw_hi.push_back(tensor_from_json(v.at("hi")));
  }
  return c;
}

}  // namespace ivsid::ckpt
