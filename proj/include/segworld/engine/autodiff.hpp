// Copyright 2026 The SegWorld Authors. All Rights Reserved.
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

#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. A Tape records every operation of one forward computation;
// Tape::backward replays them in reverse and accumulates into the `grad`
// field of each Parameter that took part.
//
// A tape built with record = false evaluates the same operations without
// storing closures, so inference code can share the training forward.

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace segworld::autodiff {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Named parameters with stable addresses.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Matrix init, bool trainable = true);
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  /// All parameters ordered by name.
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  /// Total number of scalar entries.
  std::size_t numel() const;

  void zero_grad();

 private:
  std::map<std::string, Parameter, std::less<>> params_;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const { return value()(0, 0); }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix value);
  /// Leaf bound to a parameter. Reads the parameter's storage in place.
  Var parameter(Parameter& p);

  /// Seeds d(root)/d(root) = 1 and propagates. `root` must be 1x1.
  void backward(const Var& root);

  // Operation plumbing.
  Var emit(Matrix value, std::initializer_list<Var> parents, Backward fn);
  Var emit(Matrix value, std::span<const Var> parents, Backward fn);
  const Matrix& value(int id) const;
  /// Gradient buffer of a node, zero-initialised on first access.
  Matrix& grad(int id);
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool has_grad = false;
    bool needs_grad = false;
    Parameter* param = nullptr;
    Backward backward;
  };

  bool record_;
  std::deque<Node> nodes_;
};

// Linear algebra.
Var matmul(const Var& a, const Var& b);
/// a * b^T
Var matmul_bt(const Var& a, const Var& b);
Var transpose(const Var& a);
/// Elementwise sum; `b` may also be a single row broadcast over `a`.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);

// Pointwise nonlinearities.
Var gelu(const Var& a);
Var sigmoid(const Var& a);

/// Row-wise RMS normalisation followed by a learned per-column gain (1 x cols).
Var rms_norm(const Var& a, const Var& gain, double eps = 1e-6);
/// Row-wise softmax over a square score matrix with entries above the
/// diagonal masked out.
Var causal_softmax(const Var& scores);

// Shape manipulation.
Var gather_rows(const Var& a, std::span<const int> rows);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, int start, int count);
Var sum(const Var& a);

// Losses; each returns a 1x1 node.

/// Mean over rows of -log softmax(logits)[target].
Var softmax_cross_entropy(const Var& logits, std::span<const int> targets);
/// Mean over entries of the logistic cross-entropy; targets in [0, 1].
Var bce_with_logits(const Var& logits, std::span<const double> targets);
/// 1 - (2 sum(p g) + eps) / (sum(p) + sum(g) + eps) with p = sigmoid(logits).
Var dice_with_logits(const Var& logits, std::span<const double> targets, double eps);

}  // namespace segworld::autodiff
