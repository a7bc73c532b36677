// Copyright 2026 The Unlearn Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unlearn/models.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "unlearn/error.h"
#include "unlearn/rng.h"

namespace unlearn {

std::string CheckpointRoleName(CheckpointRole role) {
  switch (role) {
    case CheckpointRole::kInitial:
      return "initial";
    case CheckpointRole::kPretrained:
      return "pretrained";
    case CheckpointRole::kRetrained:
      return "retrained";
    case CheckpointRole::kUnlearned:
      return "unlearned";
  }
  return "unknown";
}

ModelCheckpoint InitCheckpoint(const ModelShape& shape, std::uint64_t seed) {
  ModelCheckpoint c;
  c.backbone = InitMlp(shape.BackboneDims(), "backbone", seed);
  c.head = InitMlp(shape.HeadDims(), "head", seed);
  return c;
}

ModelCheckpoint CheckpointClone(const ModelCheckpoint& ckpt) {
  // ParameterSet owns its storage by value, so a copy is already deep.
  ModelCheckpoint copy = ckpt;
  return copy;
}

Matrix ComputeFeatures(const ParameterSet& backbone, const Matrix& x) {
  return ForwardMlp(backbone, x).outputs;
}

Matrix ComputeLogits(const ModelCheckpoint& ckpt, const Matrix& x) {
  return ForwardMlp(ckpt.head, ComputeFeatures(ckpt.backbone, x)).outputs;
}

ClassifierForward ForwardClassifier(const ModelCheckpoint& ckpt,
                                    const Matrix& x) {
  ClassifierForward pass;
  pass.backbone = ForwardMlp(ckpt.backbone, x);
  pass.head = ForwardMlp(ckpt.head, pass.backbone.outputs);
  return pass;
}

ModelGrads BackwardClassifier(const ModelCheckpoint& ckpt,
                              const ClassifierForward& pass,
                              const Matrix& logits_grad,
                              const Matrix* extra_feature_grad) {
  MlpBackward head = BackwardMlp(ckpt.head, pass.head.cache, logits_grad);
  Matrix feature_grad = std::move(head.input_grad);
  if (extra_feature_grad != nullptr) {
    if (!extra_feature_grad->SameShape(feature_grad)) {
      throw ShapeError("extra feature gradient shape mismatch");
    }
    for (std::size_t i = 0; i < feature_grad.size(); ++i) {
      feature_grad.data()[i] += extra_feature_grad->data()[i];
    }
  }
  MlpBackward backbone =
      BackwardMlp(ckpt.backbone, pass.backbone.cache, feature_grad);
  return {std::move(backbone.grads), std::move(head.grads)};
}

ParameterSet BackwardFeatures(const ModelCheckpoint& ckpt,
                              const MlpForward& backbone_pass,
                              const Matrix& feature_grad) {
  return BackwardMlp(ckpt.backbone, backbone_pass.cache, feature_grad).grads;
}

ModelOptimizer::ModelOptimizer(const ModelCheckpoint& ckpt, double momentum,
                               double weight_decay)
    : backbone_(ckpt.backbone, momentum, weight_decay),
      head_(ckpt.head, momentum, weight_decay) {}

void ModelOptimizer::Step(ModelCheckpoint& ckpt, const ModelGrads& grads,
                          double lr, const ModelGrads* mask) {
  backbone_.Step(ckpt.backbone, grads.backbone, lr,
                 mask != nullptr ? &mask->backbone : nullptr);
  head_.Step(ckpt.head, grads.head, lr, mask != nullptr ? &mask->head : nullptr);
}

void ModelOptimizer::StepBackbone(ModelCheckpoint& ckpt,
                                  const ParameterSet& grads, double lr,
                                  const ParameterSet* mask) {
  backbone_.Step(ckpt.backbone, grads, lr, mask);
}

std::vector<double> OneHot(int index, int n) {
  if (index < 0 || index >= n) {
    throw IndexError("group " + std::to_string(index) + " out of range [0, " +
                     std::to_string(n) + ")");
  }
  std::vector<double> v(n, 0.0);
  v[index] = 1.0;
  return v;
}

Matrix OneHotRows(std::span<const int> indices, int n) {
  Matrix m(indices.size(), static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= n) {
      throw IndexError("group " + std::to_string(indices[i]) +
                       " out of range [0, " + std::to_string(n) + ")");
    }
    m(i, indices[i]) = 1.0;
  }
  return m;
}

int OneHotIndex(std::span<const double> row) {
  int found = -1;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == 1.0) {
      if (found >= 0) throw IndexError("row has more than one hot entry");
      found = static_cast<int>(i);
    } else if (row[i] != 0.0) {
      throw IndexError("row is not one-hot");
    }
  }
  if (found < 0) throw IndexError("row has no hot entry");
  return found;
}

Matrix TStatistic(const ParameterSet& psi, const Matrix& z,
                  std::span<const int> groups, int num_groups) {
  if (groups.size() != z.rows()) {
    throw ShapeError("group count does not match feature rows");
  }
  return ForwardMlp(psi, ConcatCols(z, OneHotRows(groups, num_groups))).outputs;
}

namespace {

constexpr char kMagic[8] = {'U', 'L', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw IoError("truncated checkpoint");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string GetString(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError("truncated checkpoint");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void PutSet(std::string& out, const ParameterSet& set) {
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(set.layers.size()));
  for (const auto& l : set.layers) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(l.name.size()));
    out += l.name;
    Put<std::uint64_t>(out, l.weight.rows());
    Put<std::uint64_t>(out, l.weight.cols());
    for (double v : l.weight.data()) Put<double>(out, v);
    Put<std::uint64_t>(out, l.bias.size());
    for (double v : l.bias) Put<double>(out, v);
  }
}

ParameterSet GetSet(Reader& in) {
  ParameterSet set;
  const auto n = in.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    Layer l;
    l.name = in.GetString(in.Get<std::uint32_t>());
    const auto rows = in.Get<std::uint64_t>();
    const auto cols = in.Get<std::uint64_t>();
    std::vector<double> w(rows * cols);
    for (double& v : w) v = in.Get<double>();
    l.weight = Matrix(rows, cols, std::move(w));
    l.bias.resize(in.Get<std::uint64_t>());
    for (double& v : l.bias) v = in.Get<double>();
    set.layers.push_back(std::move(l));
  }
  return set;
}

}  // namespace

std::string SerializeCheckpoint(const ModelCheckpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.role));
  Put<std::uint64_t>(out, ckpt.config_hash);
  PutSet(out, ckpt.backbone);
  PutSet(out, ckpt.head);
  return out;
}

ModelCheckpoint DeserializeCheckpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a checkpoint file");
  }
  Reader in(bytes);
  in.GetString(sizeof(kMagic));
  ModelCheckpoint c;
  const auto role = in.Get<std::uint32_t>();
  if (role > static_cast<std::uint32_t>(CheckpointRole::kUnlearned)) {
    throw IoError("unknown checkpoint role");
  }
  c.role = static_cast<CheckpointRole>(role);
  c.config_hash = in.Get<std::uint64_t>();
  c.backbone = GetSet(in);
  c.head = GetSet(in);
  if (!in.done()) throw IoError("trailing bytes in checkpoint");
  return c;
}

void SaveCheckpoint(const ModelCheckpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const std::string bytes = SerializeCheckpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

ModelCheckpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace unlearn
