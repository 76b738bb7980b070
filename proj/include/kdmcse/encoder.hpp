#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kdmcse/errors.hpp"
#include "kdmcse/numerics.hpp"
#include "kdmcse/rng.hpp"

namespace kdmcse {

/// Deterministic Bernoulli keep-pattern. The same (seed, dim, rate) always
/// reproduces the same mask, on any platform.
struct DropoutMask {
  std::uint64_t seed = 0;

  std::vector<std::uint8_t> pattern(std::size_t dim, double rate) const {
    SplitMix64 rng(seed);
    std::vector<std::uint8_t> keep(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      keep[k] = rng.uniform() >= rate ? 1 : 0;
    }
    return keep;
  }
};

/// Two-layer projection: out = w2 * tanh(w1 * x + b1) + b2.
struct AffineHead {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  std::size_t in_dim() const { return w1.cols; }
  std::size_t hidden_dim() const { return w1.rows; }
  std::size_t out_dim() const { return w2.rows; }
};

enum class HeadKind { simcse, grounded, teacher_text, teacher_visual };

/// Trainable student: a per-sentence embedding table plus four projection
/// heads. The "encoder" f is the dropout-masked table lookup; heads play the
/// role of the MLP projections on top.
struct StudentParams {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> row_of;
  Matrix base;  // |ids| x dim_h
  AffineHead head_simcse;        // dim_h -> dim_h, text-only objective
  AffineHead head_grounded;      // dim_h -> dim_g, multimodal objective
  AffineHead head_teacher_text;  // dim_t -> dim_g
  AffineHead head_teacher_visual;  // dim_v -> dim_g
  double dropout_rate = 0.1;

  std::size_t dim_h() const { return base.cols; }

  const AffineHead& head(HeadKind kind) const {
    switch (kind) {
      case HeadKind::simcse: return head_simcse;
      case HeadKind::grounded: return head_grounded;
      case HeadKind::teacher_text: return head_teacher_text;
      case HeadKind::teacher_visual: return head_teacher_visual;
    }
    fail(ErrorCode::ShapeMismatch, "unknown head kind");
  }

  AffineHead& head(HeadKind kind) {
    return const_cast<AffineHead&>(static_cast<const StudentParams&>(*this).head(kind));
  }

  std::size_t row_index(const std::string& id) const {
    auto it = row_of.find(id);
    if (it == row_of.end()) fail(ErrorCode::UnknownSentenceId, id);
    return it->second;
  }
};

/// Dropout with inverted scaling: surviving coordinates are divided by
/// (1 - rate) so the expected output equals the input.
inline Vector encode(const StudentParams& params, const std::string& id,
                     const DropoutMask& mask) {
  const std::size_t row = params.row_index(id);
  const std::size_t dim = params.dim_h();
  const std::vector<std::uint8_t> keep = mask.pattern(dim, params.dropout_rate);
  const double scale = 1.0 / (1.0 - params.dropout_rate);
  Vector h(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    h[k] = keep[k] ? params.base.at(row, k) * scale : 0.0;
  }
  return h;
}

/// The sentence embedding used for evaluation: dropout disabled, no
/// projection head (the raw hidden vector).
inline Vector eval_embedding(const StudentParams& params, const std::string& id) {
  return params.base.row(params.row_index(id));
}

inline Vector project(const StudentParams& params, const Vector& h, HeadKind kind) {
  const AffineHead& head = params.head(kind);
  if (h.size() != head.in_dim()) {
    fail(ErrorCode::DimensionMismatch,
         "project: input dim " + std::to_string(h.size()) + ", head expects " +
             std::to_string(head.in_dim()));
  }
  Vector hidden(head.hidden_dim());
  for (std::size_t r = 0; r < head.hidden_dim(); ++r) {
    double acc = head.b1[r];
    for (std::size_t c = 0; c < head.in_dim(); ++c) acc += head.w1.at(r, c) * h[c];
    hidden[r] = std::tanh(acc);
  }
  Vector out(head.out_dim());
  for (std::size_t r = 0; r < head.out_dim(); ++r) {
    double acc = head.b2[r];
    for (std::size_t c = 0; c < head.hidden_dim(); ++c) acc += head.w2.at(r, c) * hidden[c];
    out[r] = acc;
  }
  return out;
}

/// Intermediates recorded during a head forward pass, consumed by backward.
struct ProjectTrace {
  Vector input;
  Vector hidden;  // tanh activations
  Vector output;
};

inline ProjectTrace project_with_trace(const AffineHead& head, const Vector& x) {
  if (x.size() != head.in_dim()) {
    fail(ErrorCode::DimensionMismatch, "project_with_trace: input dim mismatch");
  }
  ProjectTrace trace;
  trace.input = x;
  trace.hidden.resize(head.hidden_dim());
  for (std::size_t r = 0; r < head.hidden_dim(); ++r) {
    double acc = head.b1[r];
    for (std::size_t c = 0; c < head.in_dim(); ++c) acc += head.w1.at(r, c) * x[c];
    trace.hidden[r] = std::tanh(acc);
  }
  trace.output.resize(head.out_dim());
  for (std::size_t r = 0; r < head.out_dim(); ++r) {
    double acc = head.b2[r];
    for (std::size_t c = 0; c < head.hidden_dim(); ++c) {
      acc += head.w2.at(r, c) * trace.hidden[c];
    }
    trace.output[r] = acc;
  }
  return trace;
}

struct HeadGrads {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

inline HeadGrads zero_head_grads(const AffineHead& head) {
  HeadGrads g;
  g.w1 = Matrix(head.w1.rows, head.w1.cols);
  g.b1.assign(head.b1.size(), 0.0);
  g.w2 = Matrix(head.w2.rows, head.w2.cols);
  g.b2.assign(head.b2.size(), 0.0);
  return g;
}

/// Accumulates head parameter gradients from an upstream output gradient.
/// If input_grad is non-null, the gradient with respect to the head input is
/// added into it (it must already be sized).
inline void head_backward(const AffineHead& head, const ProjectTrace& trace,
                          const Vector& upstream, HeadGrads& grads, Vector* input_grad) {
  if (trace.input.size() != head.in_dim() || trace.hidden.size() != head.hidden_dim() ||
      upstream.size() != head.out_dim()) {
    fail(ErrorCode::MissingForwardState, "head_backward: trace does not match head shape");
  }
  // through the outer affine
  Vector d_hidden(head.hidden_dim(), 0.0);
  for (std::size_t r = 0; r < head.out_dim(); ++r) {
    grads.b2[r] += upstream[r];
    for (std::size_t c = 0; c < head.hidden_dim(); ++c) {
      grads.w2.at(r, c) += upstream[r] * trace.hidden[c];
      d_hidden[c] += head.w2.at(r, c) * upstream[r];
    }
  }
  // through tanh and the inner affine
  for (std::size_t r = 0; r < head.hidden_dim(); ++r) {
    const double d_pre = d_hidden[r] * (1.0 - trace.hidden[r] * trace.hidden[r]);
    grads.b1[r] += d_pre;
    for (std::size_t c = 0; c < head.in_dim(); ++c) {
      grads.w1.at(r, c) += d_pre * trace.input[c];
      if (input_grad) (*input_grad)[c] += head.w1.at(r, c) * d_pre;
    }
  }
}

struct StudentGrads {
  Matrix base;
  HeadGrads simcse;
  HeadGrads grounded;
  HeadGrads teacher_text;
  HeadGrads teacher_visual;

  HeadGrads& head(HeadKind kind) {
    switch (kind) {
      case HeadKind::simcse: return simcse;
      case HeadKind::grounded: return grounded;
      case HeadKind::teacher_text: return teacher_text;
      case HeadKind::teacher_visual: return teacher_visual;
    }
    fail(ErrorCode::ShapeMismatch, "unknown head kind");
  }
};

inline StudentGrads zero_grads(const StudentParams& params) {
  StudentGrads g;
  g.base = Matrix(params.base.rows, params.base.cols);
  g.simcse = zero_head_grads(params.head_simcse);
  g.grounded = zero_head_grads(params.head_grounded);
  g.teacher_text = zero_head_grads(params.head_teacher_text);
  g.teacher_visual = zero_head_grads(params.head_teacher_visual);
  return g;
}

/// One sentence's forward state through dropout and a head.
struct SentenceForward {
  std::size_t row = 0;
  Vector scale;  // keep[k] / (1 - rate), zero where dropped
  ProjectTrace proj;
};

inline SentenceForward forward_sentence(const StudentParams& params, const std::string& id,
                                        const DropoutMask& mask, HeadKind kind) {
  SentenceForward fwd;
  fwd.row = params.row_index(id);
  const std::size_t dim = params.dim_h();
  const std::vector<std::uint8_t> keep = mask.pattern(dim, params.dropout_rate);
  const double scale = 1.0 / (1.0 - params.dropout_rate);
  fwd.scale.resize(dim);
  Vector dropped(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    fwd.scale[k] = keep[k] ? scale : 0.0;
    dropped[k] = params.base.at(fwd.row, k) * fwd.scale[k];
  }
  fwd.proj = project_with_trace(params.head(kind), dropped);
  return fwd;
}

/// Chains an upstream output gradient through the head and the (constant)
/// dropout mask into the base table row.
inline void sentence_backward(const StudentParams& params, HeadKind kind,
                              const SentenceForward& fwd, const Vector& upstream,
                              StudentGrads& grads) {
  Vector d_input(params.dim_h(), 0.0);
  head_backward(params.head(kind), fwd.proj, upstream, grads.head(kind), &d_input);
  for (std::size_t k = 0; k < params.dim_h(); ++k) {
    grads.base.at(fwd.row, k) += d_input[k] * fwd.scale[k];
  }
}

struct StudentDims {
  std::size_t dim_h = 64;
  std::size_t dim_g = 32;
  std::size_t dim_t = 32;
  std::size_t dim_v = 32;
};

namespace detail {

/// Semi-orthogonal rows (modified Gram-Schmidt over a seeded Gaussian
/// draw), so a freshly initialized head approximately preserves the cosine
/// geometry of its inputs. The frozen teacher heads keep this init for the
/// whole run, so the grounded-space targets inherit the teacher structure.
inline Matrix orthogonal_rows(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    Vector row(cols);
    double norm2 = 0.0;
    // past `cols` rows no orthogonal direction remains; fall back to
    // normalized random rows
    const std::size_t prev_count = r < cols ? r : 0;
    while (true) {
      for (std::size_t c = 0; c < cols; ++c) row[c] = rng.gaussian();
      for (std::size_t prev = 0; prev < prev_count; ++prev) {
        double proj = 0.0;
        for (std::size_t c = 0; c < cols; ++c) proj += row[c] * m.at(prev, c);
        for (std::size_t c = 0; c < cols; ++c) row[c] -= proj * m.at(prev, c);
      }
      norm2 = 0.0;
      for (double v : row) norm2 += v * v;
      if (norm2 > 1e-12) break;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = row[c] * inv;
  }
  return m;
}

inline AffineHead init_head(std::size_t in, std::size_t out, SplitMix64& rng) {
  AffineHead head;
  head.w1 = orthogonal_rows(in, in, rng);
  head.b1.assign(in, 0.0);
  head.w2 = orthogonal_rows(out, in, rng);
  head.b2.assign(out, 0.0);
  return head;
}

}  // namespace detail

inline StudentParams init_student(const std::vector<std::string>& ids,
                                  const StudentDims& dims, double dropout_rate,
                                  std::uint64_t seed) {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    fail(ErrorCode::ConfigError, "dropout_rate must be in [0, 1)");
  }
  StudentParams params;
  params.ids = ids;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!params.row_of.emplace(ids[i], i).second) {
      fail(ErrorCode::DuplicateId, "init_student: " + ids[i]);
    }
  }
  params.dropout_rate = dropout_rate;
  params.base = Matrix(ids.size(), dims.dim_h);
  SplitMix64 base_rng(derive_seed(seed, 1));
  const double base_scale = 1.0 / std::sqrt(static_cast<double>(dims.dim_h));
  for (double& v : params.base.data) v = base_rng.gaussian() * base_scale;

  SplitMix64 h1(derive_seed(seed, 2));
  params.head_simcse = detail::init_head(dims.dim_h, dims.dim_h, h1);
  SplitMix64 h2(derive_seed(seed, 3));
  params.head_grounded = detail::init_head(dims.dim_h, dims.dim_g, h2);
  SplitMix64 h3(derive_seed(seed, 4));
  params.head_teacher_text = detail::init_head(dims.dim_t, dims.dim_g, h3);
  SplitMix64 h4(derive_seed(seed, 5));
  params.head_teacher_visual = detail::init_head(dims.dim_v, dims.dim_g, h4);
  return params;
}

}  // namespace kdmcse
