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

#include "segworld/engine/autodiff.hpp"

#include <cmath>
#include <numeric>

#include "segworld/error.hpp"

namespace segworld::autodiff {

// ---------------------------------------------------------------------------
// ParameterStore

Parameter& ParameterStore::add(const std::string& name, Matrix init, bool trainable) {
  auto [it, inserted] = params_.try_emplace(name);
  if (!inserted) throw InvalidArgument("duplicate parameter '" + name + "'");
  it->second.name = name;
  it->second.value = std::move(init);
  it->second.trainable = trainable;
  it->second.zero_grad();
  return it->second;
}

Parameter& ParameterStore::at(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

const Parameter& ParameterStore::at(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

bool ParameterStore::contains(std::string_view name) const { return params_.find(name) != params_.end(); }

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& [_, p] : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& [_, p] : params_) out.push_back(&p);
  return out;
}

std::size_t ParameterStore::numel() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [_, p] : params_) p.zero_grad();
}

// ---------------------------------------------------------------------------
// Tape

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(Parameter& p) {
  Node& n = nodes_.emplace_back();
  n.ref = &p.value;
  n.param = &p;
  n.needs_grad = record_ && p.trainable;
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::emit(Matrix value, std::initializer_list<Var> parents, Backward fn) {
  return emit(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
              std::move(fn));
}

Var Tape::emit(Matrix value, std::span<const Var> parents, Backward fn) {
  bool needs = false;
  if (record_) {
    for (const Var& p : parents) needs = needs || needs_grad(p.id());
  }
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.needs_grad = needs;
  if (needs) n.backward = std::move(fn);
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.ref != nullptr ? *n.ref : n.owned;
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.has_grad) {
    const Matrix& v = n.ref != nullptr ? *n.ref : n.owned;
    n.grad.setZero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(const Var& root) {
  if (!record_) throw InvalidArgument("backward on a non-recording tape");
  if (root.tape() != this) throw InvalidArgument("root belongs to another tape");
  if (root.rows() != 1 || root.cols() != 1) throw InvalidArgument("backward root must be 1x1");
  if (!needs_grad(root.id())) return;
  grad(root.id())(0, 0) += 1.0;
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad || !n.needs_grad) continue;
    if (n.param != nullptr) {
      if (n.param->grad.rows() != n.grad.rows() || n.param->grad.cols() != n.grad.cols()) {
        n.param->zero_grad();
      }
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, id);
    }
  }
}

// ---------------------------------------------------------------------------
// Operations

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw DimensionMismatch(what);
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Tape& t = *a.tape();
  Matrix v = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return t.emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.needs_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var matmul_bt(const Var& a, const Var& b) {
  require(a.cols() == b.cols(), "matmul_bt: inner dimensions differ");
  Tape& t = *a.tape();
  Matrix v = a.value() * b.value().transpose();
  const int ia = a.id(), ib = b.id();
  return t.emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib);
    if (t.needs_grad(ib)) t.grad(ib).noalias() += g.transpose() * t.value(ia);
  });
}

Var transpose(const Var& a) {
  Tape& t = *a.tape();
  Matrix v = a.value().transpose();
  const int ia = a.id();
  return t.emit(std::move(v), {a}, [ia](Tape& t, int self) {
    t.grad(ia) += t.grad(self).transpose();
  });
}

namespace {

Var add_impl(const Var& a, const Var& b, double sign) {
  Tape& t = *a.tape();
  const int ia = a.id(), ib = b.id();
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    Matrix v = a.value() + sign * b.value();
    return t.emit(std::move(v), {a, b}, [ia, ib, sign](Tape& t, int self) {
      const Matrix& g = t.grad(self);
      if (t.needs_grad(ia)) t.grad(ia) += g;
      if (t.needs_grad(ib)) t.grad(ib) += sign * g;
    });
  }
  require(b.rows() == 1 && a.cols() == b.cols(), "add: shapes are not broadcastable");
  Matrix v = a.value();
  v.rowwise() += sign * b.value().row(0);
  return t.emit(std::move(v), {a, b}, [ia, ib, sign](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ib)) t.grad(ib) += sign * g.colwise().sum();
  });
}

}  // namespace

Var add(const Var& a, const Var& b) { return add_impl(a, b, 1.0); }
Var sub(const Var& a, const Var& b) { return add_impl(a, b, -1.0); }

Var mul(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shapes differ");
  Tape& t = *a.tape();
  Matrix v = a.value().cwiseProduct(b.value());
  const int ia = a.id(), ib = b.id();
  return t.emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
    if (t.needs_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
  });
}

Var scale(const Var& a, double s) {
  Tape& t = *a.tape();
  Matrix v = s * a.value();
  const int ia = a.id();
  return t.emit(std::move(v), {a}, [ia, s](Tape& t, int self) { t.grad(ia) += s * t.grad(self); });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var gelu(const Var& a) {
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Matrix v = x.unaryExpr([](double z) {
    return 0.5 * z * (1.0 + std::tanh(kGeluC * (z + kGeluA * z * z * z)));
  });
  const int ia = a.id();
  return t.emit(std::move(v), {a}, [ia](Tape& t, int self) {
    const Matrix& x = t.value(ia);
    const Matrix d = x.unaryExpr([](double z) {
      const double th = std::tanh(kGeluC * (z + kGeluA * z * z * z));
      return 0.5 * (1.0 + th) +
             0.5 * z * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * z * z);
    });
    t.grad(ia) += t.grad(self).cwiseProduct(d);
  });
}

Var sigmoid(const Var& a) {
  Tape& t = *a.tape();
  Matrix v = a.value().unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  const int ia = a.id();
  return t.emit(std::move(v), {a}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.grad(ia) += t.grad(self).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
  });
}

Var rms_norm(const Var& a, const Var& gain, double eps) {
  require(gain.rows() == 1 && gain.cols() == a.cols(), "rms_norm: gain shape");
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  const double dim = static_cast<double>(x.cols());
  Eigen::VectorXd inv_rms(x.rows());
  Matrix normed(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    inv_rms(r) = 1.0 / std::sqrt(x.row(r).squaredNorm() / dim + eps);
    normed.row(r) = x.row(r) * inv_rms(r);
  }
  Matrix v = normed;
  v.array().rowwise() *= gain.value().row(0).array();
  const int ia = a.id(), ig = gain.id();
  return t.emit(std::move(v), {a, gain},
                [ia, ig, normed = std::move(normed), inv_rms = std::move(inv_rms)](Tape& t, int self) {
                  const Matrix& g = t.grad(self);
                  const auto gain_row = t.value(ig).row(0).array();
                  if (t.needs_grad(ig)) t.grad(ig) += g.cwiseProduct(normed).colwise().sum();
                  if (t.needs_grad(ia)) {
                    Matrix& gx = t.grad(ia);
                    const double dim = static_cast<double>(normed.cols());
                    for (Eigen::Index r = 0; r < g.rows(); ++r) {
                      const Eigen::RowVectorXd gn = (g.row(r).array() * gain_row).matrix();
                      const double proj = gn.dot(normed.row(r)) / dim;
                      gx.row(r) += (gn - proj * normed.row(r)) * inv_rms(r);
                    }
                  }
                });
}

Var causal_softmax(const Var& scores) {
  require(scores.rows() == scores.cols(), "causal_softmax: scores must be square");
  Tape& t = *scores.tape();
  const Matrix& s = scores.value();
  const Eigen::Index n = s.rows();
  Matrix v = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = s.row(i).head(i + 1);
    const double mx = row.maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      v(i, j) = std::exp(s(i, j) - mx);
      z += v(i, j);
    }
    v.row(i).head(i + 1) /= z;
  }
  const int is = scores.id();
  return t.emit(std::move(v), {scores}, [is](Tape& t, int self) {
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Matrix& gs = t.grad(is);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const auto yi = y.row(i).head(i + 1);
      const auto gi = g.row(i).head(i + 1);
      const double dot = yi.dot(gi);
      gs.row(i).head(i + 1) += (yi.array() * (gi.array() - dot)).matrix();
    }
  });
}

Var gather_rows(const Var& a, std::span<const int> rows) {
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Matrix v(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= x.rows()) throw InvalidArgument("gather_rows: index out of range");
    v.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  const int ia = a.id();
  std::vector<int> idx(rows.begin(), rows.end());
  return t.emit(std::move(v), {a}, [ia, idx = std::move(idx)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) ga.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no inputs");
  Tape& t = *parts[0].tape();
  Eigen::Index total = 0;
  for (const Var& p : parts) {
    require(p.cols() == parts[0].cols(), "concat_rows: column counts differ");
    total += p.rows();
  }
  Matrix v(total, parts[0].cols());
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    v.middleRows(offset, p.rows()) = p.value();
    spans.emplace_back(p.id(), offset);
    offset += p.rows();
  }
  return t.emit(std::move(v), parts, [spans = std::move(spans)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    for (const auto& [id, off] : spans) {
      if (!t.needs_grad(id)) continue;
      Matrix& gp = t.grad(id);
      gp += g.middleRows(off, gp.rows());
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols: no inputs");
  Tape& t = *parts[0].tape();
  Eigen::Index total = 0;
  for (const Var& p : parts) {
    require(p.rows() == parts[0].rows(), "concat_cols: row counts differ");
    total += p.cols();
  }
  Matrix v(parts[0].rows(), total);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    v.middleCols(offset, p.cols()) = p.value();
    spans.emplace_back(p.id(), offset);
    offset += p.cols();
  }
  return t.emit(std::move(v), parts, [spans = std::move(spans)](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    for (const auto& [id, off] : spans) {
      if (!t.needs_grad(id)) continue;
      Matrix& gp = t.grad(id);
      gp += g.middleCols(off, gp.cols());
    }
  });
}

Var slice_cols(const Var& a, int start, int count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: range");
  Tape& t = *a.tape();
  Matrix v = a.value().middleCols(start, count);
  const int ia = a.id();
  return t.emit(std::move(v), {a}, [ia, start, count](Tape& t, int self) {
    t.grad(ia).middleCols(start, count) += t.grad(self);
  });
}

Var sum(const Var& a) {
  Tape& t = *a.tape();
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  const int ia = a.id();
  return t.emit(std::move(v), {a}, [ia](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0);
  });
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> targets) {
  require(static_cast<std::size_t>(logits.rows()) == targets.size(),
          "softmax_cross_entropy: one target per row");
  if (targets.empty()) throw LengthMismatch("softmax_cross_entropy: no targets");
  Tape& t = *logits.tape();
  const Matrix& z = logits.value();
  Matrix probs(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int target = targets[static_cast<std::size_t>(r)];
    if (target < 0 || target >= z.cols()) throw InvalidArgument("target out of range");
    const double mx = z.row(r).maxCoeff();
    probs.row(r) = (z.row(r).array() - mx).exp().matrix();
    const double norm = probs.row(r).sum();
    probs.row(r) /= norm;
    loss -= z(r, target) - mx - std::log(norm);
  }
  const double n = static_cast<double>(z.rows());
  Matrix v(1, 1);
  v(0, 0) = loss / n;
  const int il = logits.id();
  std::vector<int> tgt(targets.begin(), targets.end());
  return t.emit(std::move(v), {logits},
                [il, n, probs = std::move(probs), tgt = std::move(tgt)](Tape& t, int self) {
                  const double g = t.grad(self)(0, 0) / n;
                  Matrix& gz = t.grad(il);
                  gz += g * probs;
                  for (std::size_t r = 0; r < tgt.size(); ++r) gz(static_cast<Eigen::Index>(r), tgt[r]) -= g;
                });
}

Var bce_with_logits(const Var& logits, std::span<const double> targets) {
  require(static_cast<std::size_t>(logits.value().size()) == targets.size(), "bce_with_logits: sizes differ");
  Tape& t = *logits.tape();
  const Matrix& z = logits.value();
  double loss = 0.0;
  const double* zd = z.data();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double x = zd[i];
    loss += std::max(x, 0.0) - x * targets[i] + std::log1p(std::exp(-std::abs(x)));
  }
  const double n = static_cast<double>(targets.size());
  Matrix v(1, 1);
  v(0, 0) = loss / n;
  const int il = logits.id();
  std::vector<double> tgt(targets.begin(), targets.end());
  return t.emit(std::move(v), {logits}, [il, n, tgt = std::move(tgt)](Tape& t, int self) {
    const double g = t.grad(self)(0, 0) / n;
    const double* zd = t.value(il).data();
    double* gd = t.grad(il).data();
    for (std::size_t i = 0; i < tgt.size(); ++i) {
      gd[i] += g * (1.0 / (1.0 + std::exp(-zd[i])) - tgt[i]);
    }
  });
}

Var dice_with_logits(const Var& logits, std::span<const double> targets, double eps) {
  require(static_cast<std::size_t>(logits.value().size()) == targets.size(), "dice_with_logits: sizes differ");
  Tape& t = *logits.tape();
  const double* zd = logits.value().data();
  std::vector<double> p(targets.size());
  double inter = 0.0, sp = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    p[i] = 1.0 / (1.0 + std::exp(-zd[i]));
    inter += p[i] * targets[i];
    sp += p[i];
    sg += targets[i];
  }
  const double num = 2.0 * inter + eps;
  const double den = sp + sg + eps;
  Matrix v(1, 1);
  v(0, 0) = 1.0 - num / den;
  const int il = logits.id();
  std::vector<double> tgt(targets.begin(), targets.end());
  return t.emit(std::move(v), {logits},
                [il, num, den, p = std::move(p), tgt = std::move(tgt)](Tape& t, int self) {
                  const double g = t.grad(self)(0, 0);
                  double* gd = t.grad(il).data();
                  for (std::size_t i = 0; i < tgt.size(); ++i) {
                    const double dl_dp = -(2.0 * tgt[i] * den - num) / (den * den);
                    gd[i] += g * dl_dp * p[i] * (1.0 - p[i]);
                  }
                });
}

}  // namespace segworld::autodiff
