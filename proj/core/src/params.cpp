// Copyright 2026 The KDMN Authors.
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

#include "kdmn/params.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kdmn::num {
namespace {

constexpr std::string_view kMagic = "kdmn-checkpoint v1";

void WriteDoubleLE(std::ostream &out, double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

double ReadDoubleLE(std::istream &in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char *>(bytes), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated payload");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

Tensor &ParameterStore::Add(const std::string &name, Shape shape) {
  if (index_.count(name) > 0) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  index_.emplace(name, entries_.size());
  Tensor value(shape);
  Tensor grad(std::move(shape));
  entries_.push_back({name, std::move(value), std::move(grad)});
  return entries_.back().value;
}

bool ParameterStore::Contains(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

std::optional<std::size_t> ParameterStore::IndexOf(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterStore::Index(std::string_view name) const {
  auto idx = IndexOf(name);
  if (!idx) throw std::out_of_range("unknown parameter: " + std::string(name));
  return *idx;
}

Tensor &ParameterStore::Value(std::string_view name) {
  return entries_[Index(name)].value;
}
const Tensor &ParameterStore::Value(std::string_view name) const {
  return entries_[Index(name)].value;
}
Tensor &ParameterStore::Grad(std::string_view name) {
  return entries_[Index(name)].grad;
}
const Tensor &ParameterStore::Grad(std::string_view name) const {
  return entries_[Index(name)].grad;
}

std::size_t ParameterStore::ParameterCount() const {
  std::size_t count = 0;
  for (const auto &e : entries_) count += e.value.size();
  return count;
}

void ParameterStore::InitUniform(std::mt19937_64 &rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto &e : entries_) {
    for (double &v : e.value.data()) v = dist(rng);
  }
}

void ParameterStore::ZeroGrad() {
  for (auto &e : entries_) e.grad.Fill(0.0);
}

GradientBuffer ParameterStore::MakeGradientBuffer() const {
  GradientBuffer buffer;
  buffer.reserve(entries_.size());
  for (const auto &e : entries_) buffer.emplace_back(e.value.shape());
  return buffer;
}

void ParameterStore::AccumulateGradients(const GradientBuffer &buffer) {
  if (buffer.size() != entries_.size()) {
    throw std::invalid_argument("gradient buffer does not match store");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].grad.AddInPlace(buffer[i]);
  }
}

void ParameterStore::SgdStep(double learning_rate) {
  for (auto &e : entries_) {
    auto value = e.value.data();
    auto grad = e.grad.data();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= learning_rate * grad[i];
  }
}

std::optional<std::string> ParameterStore::FirstNonFinite() const {
  for (const auto &e : entries_) {
    if (!e.value.AllFinite()) return e.name;
  }
  return std::nullopt;
}

void ParameterStore::Save(std::ostream &out) const {
  out << kMagic << '\n' << "params " << entries_.size() << '\n';
  for (const auto &e : entries_) {
    out << e.name << ' ' << e.value.rank();
    for (std::size_t d : e.value.shape()) out << ' ' << d;
    out << '\n';
  }
  out << "data\n";
  for (const auto &e : entries_) {
    for (double v : e.value.data()) WriteDoubleLE(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

void ParameterStore::SaveFile(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  Save(out);
}

void ParameterStore::Load(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw std::runtime_error("checkpoint: bad magic line");
  }
  std::getline(in, line);
  std::istringstream count_line(line);
  std::string tag;
  std::size_t count = 0;
  if (!(count_line >> tag >> count) || tag != "params") {
    throw std::runtime_error("checkpoint: bad params line");
  }
  if (count != entries_.size()) {
    throw std::runtime_error("checkpoint: holds " + std::to_string(count) +
                             " tensors, model expects " +
                             std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::getline(in, line);
    std::istringstream header(line);
    std::string name;
    std::size_t rank = 0;
    header >> name >> rank;
    Shape shape(rank);
    for (auto &d : shape) header >> d;
    if (!header) throw std::runtime_error("checkpoint: bad header line: " + line);
    const auto &entry = entries_[i];
    if (name != entry.name || shape != entry.value.shape()) {
      throw std::runtime_error("checkpoint: tensor " + name + " " +
                               ShapeString(shape) + " does not match " +
                               entry.name + " " +
                               ShapeString(entry.value.shape()));
    }
  }
  if (!std::getline(in, line) || line != "data") {
    throw std::runtime_error("checkpoint: missing data marker");
  }
  for (auto &e : entries_) {
    for (double &v : e.value.data()) v = ReadDoubleLE(in);
    if (!e.value.AllFinite()) {
      throw NonFiniteError("checkpoint: non-finite values in " + e.name);
    }
  }
}

void ParameterStore::LoadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  Load(in);
}

}  // namespace kdmn::num
