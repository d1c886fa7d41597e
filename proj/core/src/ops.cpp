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

#include "tspd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "tspd/error.hpp"

namespace tspd::nn {

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw GraphError("operation on an unbound variable");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw GraphError("operands live on different tapes");
  return tape_of(a);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

bool needs(Tape& t, Var v) { return t.requires_grad(v); }

template <typename F>
Var unary(Var a, F&& f, std::function<void(Tape&, const Matrix&, Var, Var)> back) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  const bool rg = needs(t, a);
  auto self = std::make_shared<int>(-1);
  Var r = t.record(std::move(out), rg,
                   rg ? Tape::BackwardFn([a, self, back](Tape& tp, const Matrix& g) { back(tp, g, a, Var{&tp, *self}); })
                      : nullptr);
  *self = r.id;
  return r;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.rows()) {
    throw ArgumentError("matmul: inner dimensions " + std::to_string(av.cols()) + " and " + std::to_string(bv.rows()));
  }
  Matrix out(av.rows(), bv.cols());
  gemm_accumulate(av, bv, out);
  const bool rg = needs(t, a) || needs(t, b);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) gemm_nt_accumulate(g, tp.value(b), tp.grad_buffer(a));
    if (tp.requires_grad(b)) gemm_tn_accumulate(tp.value(a), g, tp.grad_buffer(b));
  }) : nullptr);
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "add");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const bool rg = needs(t, a) || needs(t, b);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  }) : nullptr);
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "sub");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const bool rg = needs(t, a) || needs(t, b);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) {
      Matrix& gb = tp.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  }) : nullptr);
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "mul");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const bool rg = needs(t, a) || needs(t, b);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) {
      Matrix& ga = tp.grad_buffer(a);
      const Matrix& bv2 = tp.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
    }
    if (tp.requires_grad(b)) {
      Matrix& gb = tp.grad_buffer(b);
      const Matrix& av2 = tp.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
    }
  }) : nullptr);
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Matrix& av = t.value(a);
  const Matrix& rv = t.value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols()) throw ArgumentError("add_row: row must be 1 x cols(a)");
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto dst = out.row_span(r);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += rv[c];
  }
  const bool rg = needs(t, a) || needs(t, row);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, row](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) {
      Matrix& gr = tp.grad_buffer(row);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto src = g.row_span(r);
        for (std::size_t c = 0; c < src.size(); ++c) gr[c] += src[c];
      }
    }
  }) : nullptr);
}

Var scale(Var a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](Tape& tp, const Matrix& g, Var in, Var) {
    Matrix& gi = tp.grad_buffer(in);
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] += c * g[i];
  });
}

Var scale_by(Var a, Var s) {
  Tape& t = tape_of(a, s);
  const Matrix& av = t.value(a);
  const Matrix& sv = t.value(s);
  if (sv.size() != 1) throw ArgumentError("scale_by: scale must be 1 x 1");
  Matrix out = av;
  for (double& v : out.data()) v *= sv[0];
  const bool rg = needs(t, a) || needs(t, s);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, s](Tape& tp, const Matrix& g) {
    const double sval = tp.value(s)[0];
    if (tp.requires_grad(a)) {
      Matrix& ga = tp.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += sval * g[i];
    }
    if (tp.requires_grad(s)) {
      const Matrix& av2 = tp.value(a);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av2[i];
      tp.grad_buffer(s)[0] += acc;
    }
  }) : nullptr);
}

Var one_minus(Var a) {
  return unary(a, [](double x) { return 1.0 - x; }, [](Tape& tp, const Matrix& g, Var in, Var) {
    Matrix& gi = tp.grad_buffer(in);
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] -= g[i];
  });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](Tape& tp, const Matrix& g, Var in, Var out) {
    Matrix& gi = tp.grad_buffer(in);
    const Matrix& y = tp.value(out);
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var sigmoid(Var a) {
  return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
               [](Tape& tp, const Matrix& g, Var in, Var out) {
                 Matrix& gi = tp.grad_buffer(in);
                 const Matrix& y = tp.value(out);
                 for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * y[i] * (1.0 - y[i]);
               });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](Tape& tp, const Matrix& g, Var in, Var) {
    Matrix& gi = tp.grad_buffer(in);
    const Matrix& x = tp.value(in);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) gi[i] += g[i];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: no inputs");
  Tape& t = tape_of(parts[0]);
  const std::size_t rows = t.value(parts[0]).rows();
  std::size_t cols = 0;
  bool rg = false;
  for (Var p : parts) {
    tape_of(parts[0], p);
    if (t.value(p).rows() != rows) throw ArgumentError("concat_cols: row counts differ");
    cols += t.value(p).cols();
    rg = rg || needs(t, p);
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& pv = t.value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offset + c) = pv(r, c);
    }
    offset += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([inputs](Tape& tp, const Matrix& g) {
    std::size_t off = 0;
    for (Var p : inputs) {
      const std::size_t pc = tp.value(p).cols();
      if (tp.requires_grad(p)) {
        Matrix& gp = tp.grad_buffer(p);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < pc; ++c) gp(r, c) += g(r, off + c);
        }
      }
      off += pc;
    }
  }) : nullptr);
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_rows: no inputs");
  Tape& t = tape_of(parts[0]);
  const std::size_t cols = t.value(parts[0]).cols();
  std::size_t rows = 0;
  bool rg = false;
  for (Var p : parts) {
    tape_of(parts[0], p);
    if (t.value(p).cols() != cols) throw ArgumentError("concat_rows: column counts differ");
    rows += t.value(p).rows();
    rg = rg || needs(t, p);
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& pv = t.value(p);
    std::copy(pv.data().begin(), pv.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset * cols));
    offset += pv.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([inputs](Tape& tp, const Matrix& g) {
    std::size_t off = 0;
    for (Var p : inputs) {
      const Matrix& pv = tp.value(p);
      if (tp.requires_grad(p)) {
        Matrix& gp = tp.grad_buffer(p);
        for (std::size_t i = 0; i < pv.size(); ++i) gp[i] += g[off * g.cols() + i];
      }
      off += pv.rows();
    }
  }) : nullptr);
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (begin + count > av.cols()) throw ArgumentError("slice_cols: range out of bounds");
  Matrix out(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = av(r, begin + c);
  }
  const bool rg = needs(t, a);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, begin, count](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < count; ++c) ga(r, begin + c) += g(r, c);
    }
  }) : nullptr);
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (begin + count > av.rows()) throw ArgumentError("slice_rows: range out of bounds");
  Matrix out(count, av.cols());
  std::copy(av.data().begin() + static_cast<std::ptrdiff_t>(begin * av.cols()),
            av.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * av.cols()), out.data().begin());
  const bool rg = needs(t, a);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, begin](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    const std::size_t off = begin * g.cols();
    for (std::size_t i = 0; i < g.size(); ++i) ga[off + i] += g[i];
  }) : nullptr);
}

Var gather_rows(Var a, std::span<const int> rows) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  Matrix out(rows.size(), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= av.rows()) throw ArgumentError("gather_rows: index out of range");
    auto src = av.row_span(static_cast<std::size_t>(rows[i]));
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  const bool rg = needs(t, a);
  std::vector<int> idx(rows.begin(), rows.end());
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, idx](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto dst = ga.row_span(static_cast<std::size_t>(idx[i]));
      auto src = g.row_span(i);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  }) : nullptr);
}

Var broadcast_rows(Var row, std::size_t m) {
  Tape& t = tape_of(row);
  const Matrix& rv = t.value(row);
  if (rv.rows() != 1) throw ArgumentError("broadcast_rows: input must be a single row");
  Matrix out(m, rv.cols());
  for (std::size_t r = 0; r < m; ++r) std::copy(rv.data().begin(), rv.data().end(), out.row_span(r).begin());
  const bool rg = needs(t, row);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([row](Tape& tp, const Matrix& g) {
    Matrix& gr = tp.grad_buffer(row);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto src = g.row_span(r);
      for (std::size_t c = 0; c < src.size(); ++c) gr[c] += src[c];
    }
  }) : nullptr);
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  Matrix out(av.cols(), av.rows());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out(c, r) = av(r, c);
  }
  const bool rg = needs(t, a);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
    }
  }) : nullptr);
}

Var mean_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (av.rows() == 0) throw ArgumentError("mean_rows: empty input");
  Matrix out(1, av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out[c] += av(r, c);
  }
  const double inv = 1.0 / static_cast<double>(av.rows());
  for (double& v : out.data()) v *= inv;
  const bool rg = needs(t, a);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, inv](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[c] * inv;
    }
  }) : nullptr);
}

Var max_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (av.rows() == 0) throw ArgumentError("max_rows: empty input");
  Matrix out(1, av.cols());
  std::vector<std::size_t> arg(av.cols(), 0);
  for (std::size_t c = 0; c < av.cols(); ++c) {
    out[c] = av(0, c);
    for (std::size_t r = 1; r < av.rows(); ++r) {
      if (av(r, c) > out[c]) {
        out[c] = av(r, c);
        arg[c] = r;
      }
    }
  }
  const bool rg = needs(t, a);
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, arg = std::move(arg)](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t c = 0; c < arg.size(); ++c) ga(arg[c], c) += g[c];
  }) : nullptr);
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : t.value(a).data()) s += v;
  const bool rg = needs(t, a);
  return t.record(Matrix::scalar(s), rg, rg ? Tape::BackwardFn([a](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (double& v : ga.data()) v += g[0];
  }) : nullptr);
}

Var instance_norm(Var x, Var gamma, Var beta, double eps) {
  Tape& t = tape_of(x, gamma);
  tape_of(x, beta);
  const Matrix& xv = t.value(x);
  const Matrix& gv = t.value(gamma);
  const Matrix& bv = t.value(beta);
  const std::size_t m = xv.rows(), n = xv.cols();
  if (m == 0) throw ArgumentError("instance_norm: empty input");
  if (gv.rows() != 1 || gv.cols() != n || !bv.same_shape(gv)) throw ArgumentError("instance_norm: affine shape");

  Matrix xhat(m, n);
  Matrix inv_std(1, n);
  for (std::size_t c = 0; c < n; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m; ++r) mean += xv(r, c);
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t r = 0; r < m; ++r) var += (xv(r, c) - mean) * (xv(r, c) - mean);
    var /= static_cast<double>(m);
    inv_std[c] = 1.0 / std::sqrt(var + eps);
    for (std::size_t r = 0; r < m; ++r) xhat(r, c) = (xv(r, c) - mean) * inv_std[c];
  }
  Matrix out(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) out(r, c) = gv[c] * xhat(r, c) + bv[c];
  }
  const bool rg = needs(t, x) || needs(t, gamma) || needs(t, beta);
  return t.record(std::move(out), rg,
                  rg ? Tape::BackwardFn([x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                                            Tape& tp, const Matrix& g) {
                    const std::size_t rows = g.rows(), cols = g.cols();
                    const Matrix& gam = tp.value(gamma);
                    if (tp.requires_grad(gamma) || tp.requires_grad(beta)) {
                      Matrix dg(1, cols), db(1, cols);
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) {
                          dg[c] += g(r, c) * xhat(r, c);
                          db[c] += g(r, c);
                        }
                      }
                      tp.accumulate(gamma, dg);
                      tp.accumulate(beta, db);
                    }
                    if (tp.requires_grad(x)) {
                      Matrix& gx = tp.grad_buffer(x);
                      const double inv_m = 1.0 / static_cast<double>(rows);
                      for (std::size_t c = 0; c < cols; ++c) {
                        double mean_d = 0.0, mean_dx = 0.0;
                        for (std::size_t r = 0; r < rows; ++r) {
                          const double d = g(r, c) * gam[c];
                          mean_d += d;
                          mean_dx += d * xhat(r, c);
                        }
                        mean_d *= inv_m;
                        mean_dx *= inv_m;
                        for (std::size_t r = 0; r < rows; ++r) {
                          const double d = g(r, c) * gam[c];
                          gx(r, c) += inv_std[c] * (d - mean_d - xhat(r, c) * mean_dx);
                        }
                      }
                    }
                  })
                     : nullptr);
}

namespace {

double mask_at(const Matrix& mask, std::size_t r, std::size_t c) { return mask.rows() == 1 ? mask[c] : mask(r, c); }

void check_mask_shape(const Matrix& scores, const Matrix& mask) {
  if (mask.cols() != scores.cols() || (mask.rows() != 1 && mask.rows() != scores.rows())) {
    throw ArgumentError("mask shape does not match scores");
  }
}

// Row-wise max and log-sum-exp over admissible entries.
void row_stats(const Matrix& s, const Matrix& mask, std::size_t r, double& max_out, double& lse_out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < s.cols(); ++c) {
    if (mask_at(mask, r, c) == 0.0) mx = std::max(mx, s(r, c));
  }
  if (mx == -std::numeric_limits<double>::infinity()) {
    throw MaskError("softmax row " + std::to_string(r) + " is fully masked");
  }
  double z = 0.0;
  for (std::size_t c = 0; c < s.cols(); ++c) {
    if (mask_at(mask, r, c) == 0.0) z += std::exp(s(r, c) - mx);
  }
  max_out = mx;
  lse_out = mx + std::log(z);
}

}  // namespace

Var masked_softmax(Var scores, const Matrix& mask) {
  Tape& t = tape_of(scores);
  const Matrix& sv = t.value(scores);
  check_mask_shape(sv, mask);
  Matrix out(sv.rows(), sv.cols());
  for (std::size_t r = 0; r < sv.rows(); ++r) {
    double mx = 0.0, lse = 0.0;
    row_stats(sv, mask, r, mx, lse);
    for (std::size_t c = 0; c < sv.cols(); ++c) {
      out(r, c) = mask_at(mask, r, c) == 0.0 ? std::exp(sv(r, c) - lse) : 0.0;
    }
  }
  const bool rg = needs(t, scores);
  auto self = std::make_shared<int>(-1);
  Var res = t.record(std::move(out), rg, rg ? Tape::BackwardFn([scores, self](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(Var{&tp, *self});
    Matrix& gs = tp.grad_buffer(scores);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += y(r, c) * g(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) gs(r, c) += y(r, c) * (g(r, c) - dot);
    }
  }) : nullptr);
  *self = res.id;
  return res;
}

Var masked_log_softmax(Var scores, const Matrix& mask) {
  Tape& t = tape_of(scores);
  const Matrix& sv = t.value(scores);
  check_mask_shape(sv, mask);
  Matrix out(sv.rows(), sv.cols());
  Matrix probs(sv.rows(), sv.cols());
  for (std::size_t r = 0; r < sv.rows(); ++r) {
    double mx = 0.0, lse = 0.0;
    row_stats(sv, mask, r, mx, lse);
    for (std::size_t c = 0; c < sv.cols(); ++c) {
      if (mask_at(mask, r, c) == 0.0) {
        out(r, c) = sv(r, c) - lse;
        probs(r, c) = std::exp(out(r, c));
      } else {
        out(r, c) = -std::numeric_limits<double>::infinity();
      }
    }
  }
  const bool rg = needs(t, scores);
  return t.record(std::move(out), rg,
                  rg ? Tape::BackwardFn([scores, probs = std::move(probs), mask](Tape& tp, const Matrix& g) {
                    Matrix& gs = tp.grad_buffer(scores);
                    for (std::size_t r = 0; r < probs.rows(); ++r) {
                      double total = 0.0;
                      for (std::size_t c = 0; c < probs.cols(); ++c) {
                        if (mask_at(mask, r, c) == 0.0) total += g(r, c);
                      }
                      for (std::size_t c = 0; c < probs.cols(); ++c) {
                        if (mask_at(mask, r, c) == 0.0) gs(r, c) += g(r, c) - probs(r, c) * total;
                      }
                    }
                  })
                     : nullptr);
}

Var gather_cols(Var a, std::span<const int> index, std::size_t cols) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (index.size() != av.rows() * cols) throw ArgumentError("gather_cols: index size mismatch");
  Matrix out(av.rows(), cols);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const int k = index[r * cols + c];
      if (k < 0 || static_cast<std::size_t>(k) >= av.cols()) throw ArgumentError("gather_cols: index out of range");
      out(r, c) = av(r, static_cast<std::size_t>(k));
    }
  }
  const bool rg = needs(t, a);
  std::vector<int> idx(index.begin(), index.end());
  return t.record(std::move(out), rg, rg ? Tape::BackwardFn([a, idx, cols](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) ga(r, static_cast<std::size_t>(idx[r * cols + c])) += g(r, c);
    }
  }) : nullptr);
}

Var pick(Var a, std::size_t r, std::size_t c) {
  Tape& t = tape_of(a);
  const Matrix& av = t.value(a);
  if (r >= av.rows() || c >= av.cols()) throw ArgumentError("pick: index out of range");
  const bool rg = needs(t, a);
  return t.record(Matrix::scalar(av(r, c)), rg, rg ? Tape::BackwardFn([a, r, c](Tape& tp, const Matrix& g) {
    tp.grad_buffer(a)(r, c) += g[0];
  }) : nullptr);
}

Matrix additive_mask(std::span<const std::uint8_t> allowed) {
  Matrix m(1, allowed.size());
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    m[i] = allowed[i] != 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return m;
}

}  // namespace tspd::nn
