#include "srgpair/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace srgpair {

namespace {

constexpr int kSampleAttemptRounds = 200;

void check_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorCode::invalid_argument, std::string(what) + ": square matrix required");
}

void check_same_dim(const SetValuedOp& a, const SetValuedOp& b, const char* what) {
  if (a.dim() != b.dim()) fail(ErrorCode::dimension_mismatch, std::string(what) + ": operand dimensions differ");
}

void check_arg_dim(const SetValuedOp& op, const Vec& x) {
  if (x.size() != op.dim()) fail(ErrorCode::dimension_mismatch, "evaluation point has wrong dimension");
}

std::vector<Vec> map_outputs(std::vector<Vec> outs, const auto& fn) {
  for (auto& u : outs) u = fn(u);
  return outs;
}

/// Pulls candidates from a delegate sampler and keeps those inside this
/// operator's own domain.
std::vector<Vec> filtered_delegate_sample(const SetValuedOp& self, const SetValuedOp& delegate,
                                          int count, std::uint64_t seed) {
  std::vector<Vec> kept;
  kept.reserve(static_cast<std::size_t>(count));
  for (int round = 0; round < kSampleAttemptRounds && static_cast<int>(kept.size()) < count; ++round) {
    const int want = count - static_cast<int>(kept.size());
    for (const Vec& x : delegate.sample_domain(want, mix_seed(seed, 0x9e3779b9u + round))) {
      if (!self.eval(x).empty()) kept.push_back(x);
      if (static_cast<int>(kept.size()) == count) break;
    }
  }
  return kept;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<Vec> SetValuedOp::sample_domain(int count, std::uint64_t seed) const {
  SampleStream stream(seed);
  std::vector<Vec> kept;
  kept.reserve(static_cast<std::size_t>(count));
  const Index n = dim();
  for (long attempt = 0; attempt < static_cast<long>(kSampleAttemptRounds) * count; ++attempt) {
    Vec x(n);
    for (Index k = 0; k < n; ++k) x[k] = stream.uniform(box().lo, box().hi);
    if (!eval(x).empty()) {
      kept.push_back(std::move(x));
      if (static_cast<int>(kept.size()) == count) break;
    }
  }
  return kept;
}

Mat SetValuedOp::jacobian(const Vec&) const {
  fail(ErrorCode::unsupported, "operator '" + tag() + "' has no jacobian");
}

// ===========================================================================
// Affine operators
// ===========================================================================

namespace {

class AffineOp final : public SetValuedOp {
 public:
  AffineOp(Mat matrix, Vec offset, std::string tag, Box box)
      : SetValuedOp(box), matrix_(std::move(matrix)), offset_(std::move(offset)), tag_(std::move(tag)) {
    check_square(matrix_, "affine operator");
    if (offset_.size() != matrix_.rows()) fail(ErrorCode::dimension_mismatch, "affine offset dimension");
  }

  [[nodiscard]] Index dim() const override { return matrix_.rows(); }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    check_arg_dim(*this, x);
    return {matrix_ * x + offset_};
  }
  [[nodiscard]] std::string tag() const override { return tag_; }
  [[nodiscard]] bool single_valued() const override { return true; }
  [[nodiscard]] std::optional<AffineForm> affine_form() const override { return AffineForm{matrix_, offset_}; }
  [[nodiscard]] bool differentiable() const override { return true; }
  [[nodiscard]] Mat jacobian(const Vec&) const override { return matrix_; }
  [[nodiscard]] bool separable() const override { return matrix_.isDiagonal(); }

  [[nodiscard]] std::vector<Vec> sample_domain(int count, std::uint64_t seed) const override {
    SampleStream stream(seed);
    std::vector<Vec> out(static_cast<std::size_t>(count));
    for (auto& x : out) {
      x.resize(dim());
      for (Index k = 0; k < dim(); ++k) x[k] = stream.uniform(box().lo, box().hi);
    }
    return out;
  }

 private:
  Mat matrix_;
  Vec offset_;
  std::string tag_;
};

}  // namespace

OpPtr identity_op(Index dim, Box box) {
  if (dim <= 0) fail(ErrorCode::invalid_argument, "identity_op: positive dimension required");
  return std::make_shared<AffineOp>(Mat::Identity(dim, dim), Vec::Zero(dim), "id", box);
}

OpPtr linear_op(Mat matrix, Box box) {
  check_square(matrix, "linear_op");
  const Index n = matrix.rows();
  return std::make_shared<AffineOp>(std::move(matrix), Vec::Zero(n), "linear", box);
}

// ===========================================================================
// Diode-linear operators
// ===========================================================================

namespace {

class DiodeLinearOp final : public SetValuedOp {
 public:
  DiodeLinearOp(DiodeLinearForm form, std::string tag, RaySpec ray, Box box, double kink_prob)
      : SetValuedOp(box), form_(std::move(form)), tag_(std::move(tag)), ray_(ray), kink_prob_(kink_prob) {
    const Index n = form_.dim;
    const auto d = static_cast<Index>(form_.diode_inputs.size());
    if (n <= 0 || d <= 0) fail(ErrorCode::invalid_argument, "diode_linear_op: empty form");
    if (form_.gain.rows() != n || form_.gain.cols() != d) fail(ErrorCode::dimension_mismatch, "diode form gain shape");
    if (form_.linear.rows() != n || form_.linear.cols() != n) fail(ErrorCode::dimension_mismatch, "diode form linear shape");
    if (form_.offset.size() != n) fail(ErrorCode::dimension_mismatch, "diode form offset shape");
    for (Index in : form_.diode_inputs)
      if (in < 0 || in >= n) fail(ErrorCode::invalid_argument, "diode form input index out of range");
    if (ray_.count < 1 || ray_.u_max < 0.0) fail(ErrorCode::invalid_argument, "invalid kink ray");
    if (kink_prob_ < 0.0 || kink_prob_ >= 1.0) fail(ErrorCode::invalid_argument, "kink probability outside [0, 1)");
  }

  [[nodiscard]] Index dim() const override { return form_.dim; }

  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    check_arg_dim(*this, x);
    const auto d = static_cast<Index>(form_.diode_inputs.size());
    std::vector<std::vector<double>> choices(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) {
      const double v = x[form_.diode_inputs[static_cast<std::size_t>(j)]];
      if (v > 0.0) return {};
      if (v < 0.0) {
        choices[static_cast<std::size_t>(j)] = {0.0};
      } else {
        auto& ray = choices[static_cast<std::size_t>(j)];
        ray.resize(static_cast<std::size_t>(ray_.count));
        for (int k = 0; k < ray_.count; ++k)
          ray[static_cast<std::size_t>(k)] = ray_.count == 1 ? 0.0 : ray_.u_max * k / (ray_.count - 1);
      }
    }
    const Vec base = form_.linear * x + form_.offset;
    std::vector<Vec> outs;
    Vec u = Vec::Zero(d);
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      for (Index j = 0; j < d; ++j) u[j] = choices[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
      outs.push_back(base + form_.gain * u);
      Index j = d - 1;
      for (; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] < choices[static_cast<std::size_t>(j)].size()) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
      if (j < 0) break;
    }
    return outs;
  }

  [[nodiscard]] std::string tag() const override { return tag_; }
  [[nodiscard]] bool single_valued() const override { return false; }
  [[nodiscard]] std::optional<DiodeLinearForm> diode_linear_form() const override { return form_; }

  [[nodiscard]] std::vector<Vec> sample_domain(int count, std::uint64_t seed) const override {
    if (box().lo > 0.0) fail(ErrorCode::empty_domain, "sampling box does not meet the diode domain");
    SampleStream stream(seed);
    std::vector<bool> is_diode_input(static_cast<std::size_t>(dim()), false);
    for (Index in : form_.diode_inputs) is_diode_input[static_cast<std::size_t>(in)] = true;
    const double neg_hi = std::min(box().hi, 0.0);
    std::vector<Vec> out(static_cast<std::size_t>(count));
    for (auto& x : out) {
      x.resize(dim());
      for (Index k = 0; k < dim(); ++k) {
        if (is_diode_input[static_cast<std::size_t>(k)]) {
          if (box().hi >= 0.0 && stream.unit() < kink_prob_)
            x[k] = 0.0;
          else
            x[k] = stream.uniform(box().lo, neg_hi);
        } else {
          x[k] = stream.uniform(box().lo, box().hi);
        }
      }
    }
    return out;
  }

 private:
  DiodeLinearForm form_;
  std::string tag_;
  RaySpec ray_;
  double kink_prob_;
};

}  // namespace

OpPtr diode_linear_op(DiodeLinearForm form, std::string tag, RaySpec ray, Box box, double kink_prob) {
  return std::make_shared<DiodeLinearOp>(std::move(form), std::move(tag), ray, box, kink_prob);
}

OpPtr ideal_diode(RaySpec ray, Box box, double kink_prob) {
  DiodeLinearForm form;
  form.dim = 1;
  form.diode_inputs = {0};
  form.gain = Mat::Identity(1, 1);
  form.linear = Mat::Zero(1, 1);
  form.offset = Vec::Zero(1);
  return diode_linear_op(std::move(form), "ideal_diode", ray, box, kink_prob);
}

// ===========================================================================
// Smooth scalar-profile operators
// ===========================================================================

namespace {

/// Componentwise map u_k = profile(x_k) with an analytic slope.
class ComponentwiseOp final : public SetValuedOp {
 public:
  using Profile = double (*)(double);

  ComponentwiseOp(Index dim, Profile value, Profile slope, Profile domain_guard, std::string tag, Box box)
      : SetValuedOp(box), dim_(dim), value_(value), slope_(slope), guard_(domain_guard), tag_(std::move(tag)) {}

  [[nodiscard]] Index dim() const override { return dim_; }

  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    check_arg_dim(*this, x);
    Vec u(dim_);
    for (Index k = 0; k < dim_; ++k) {
      if (guard_ != nullptr && guard_(x[k]) == 0.0) return {};
      u[k] = value_(x[k]);
    }
    return {u};
  }

  [[nodiscard]] std::string tag() const override { return tag_; }
  [[nodiscard]] bool single_valued() const override { return true; }
  [[nodiscard]] bool differentiable() const override { return true; }
  [[nodiscard]] Mat jacobian(const Vec& x) const override {
    check_arg_dim(*this, x);
    Mat j = Mat::Zero(dim_, dim_);
    for (Index k = 0; k < dim_; ++k) j(k, k) = slope_(x[k]);
    return j;
  }
  [[nodiscard]] bool separable() const override { return true; }

 private:
  Index dim_;
  Profile value_;
  Profile slope_;
  Profile guard_;
  std::string tag_;
};

double cube_value(double t) { return t * t * t; }
double cube_slope(double t) { return 3.0 * t * t; }
double clip_value(double t) { return std::clamp(t, -1.0, 1.0); }
double clip_slope(double t) { return std::abs(t) <= 1.0 ? 1.0 : 0.0; }
double asinh_value(double t) { return std::asinh(t); }
double asinh_slope(double t) { return 1.0 / std::sqrt(1.0 + t * t); }
double ident_value(double t) { return t; }
double ident_slope(double) { return 1.0; }

class ShockleyOp final : public SetValuedOp {
 public:
  ShockleyOp(double i_s, double v_t, Box box) : SetValuedOp(box), i_s_(i_s), v_t_(v_t) {
    if (i_s_ <= 0.0 || v_t_ <= 0.0) fail(ErrorCode::invalid_argument, "shockley_diode: positive i_s and v_t required");
  }

  [[nodiscard]] Index dim() const override { return 1; }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    check_arg_dim(*this, x);
    const double ratio = x[0] / v_t_;
    if (ratio > 700.0) return {};
    Vec u(1);
    u[0] = i_s_ * std::expm1(ratio);
    return {u};
  }
  [[nodiscard]] std::string tag() const override { return "shockley"; }
  [[nodiscard]] bool single_valued() const override { return true; }
  [[nodiscard]] bool differentiable() const override { return true; }
  [[nodiscard]] Mat jacobian(const Vec& x) const override {
    Mat j(1, 1);
    j(0, 0) = i_s_ / v_t_ * std::exp(x[0] / v_t_);
    return j;
  }
  [[nodiscard]] bool separable() const override { return true; }

 private:
  double i_s_;
  double v_t_;
};

/// Coupled pair of smooth diodes mixed through the gain matrix.
class SmoothNpnOp final : public SetValuedOp {
 public:
  SmoothNpnOp(Mat gain, OpPtr diode, Box box) : SetValuedOp(box), gain_(std::move(gain)), diode_(std::move(diode)) {
    if (diode_->dim() != 1) fail(ErrorCode::invalid_argument, "npn_transistor: diode must be one-dimensional");
  }

  [[nodiscard]] Index dim() const override { return 2; }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    check_arg_dim(*this, x);
    Vec v1(1), v2(1);
    v1[0] = x[0];
    v2[0] = x[1];
    const auto d1 = diode_->eval(v1);
    const auto d2 = diode_->eval(v2);
    if (d1.empty() || d2.empty()) return {};
    std::vector<Vec> outs;
    outs.reserve(d1.size() * d2.size());
    Vec u(2);
    for (const Vec& a : d1)
      for (const Vec& b : d2) {
        u[0] = a[0];
        u[1] = b[0];
        outs.push_back(gain_ * u);
      }
    return outs;
  }
  [[nodiscard]] std::string tag() const override { return "npn(" + diode_->tag() + ")"; }
  [[nodiscard]] bool single_valued() const override { return diode_->single_valued(); }
  [[nodiscard]] bool differentiable() const override { return diode_->differentiable(); }
  [[nodiscard]] Mat jacobian(const Vec& x) const override {
    Vec v1(1), v2(1);
    v1[0] = x[0];
    v2[0] = x[1];
    Mat j = Mat::Zero(2, 2);
    j(0, 0) = diode_->jacobian(v1)(0, 0);
    j(1, 1) = diode_->jacobian(v2)(0, 0);
    return gain_ * j;
  }

 private:
  Mat gain_;
  OpPtr diode_;
};

}  // namespace

Mat npn_gain(double alpha_f, double alpha_r) {
  Mat r(2, 2);
  r << 1.0, -alpha_r, -alpha_f, 1.0;
  return r;
}

Mat npn_partner_matrix(double alpha_f, double alpha_r) {
  Mat b(2, 2);
  b << 1.0, alpha_f, alpha_r, 1.0;
  return b;
}

OpPtr npn_transistor(double alpha_f, double alpha_r, OpPtr diode, Box box) {
  const Mat gain = npn_gain(alpha_f, alpha_r);
  if (diode == nullptr) diode = ideal_diode({}, box);
  if (auto form = diode->diode_linear_form()) {
    if (form->dim != 1) fail(ErrorCode::invalid_argument, "npn_transistor: diode must be one-dimensional");
    const double g = form->gain(0, 0);
    const double l = form->linear(0, 0);
    const double c = form->offset[0];
    DiodeLinearForm f;
    f.dim = 2;
    f.diode_inputs = {0, 1};
    f.gain = gain * (Mat::Identity(2, 2) * g);
    f.linear = gain * (Mat::Identity(2, 2) * l);
    f.offset = gain * Vec::Constant(2, c);
    return diode_linear_op(std::move(f), "npn(" + diode->tag() + ")", {}, box);
  }
  return std::make_shared<SmoothNpnOp>(gain, std::move(diode), box);
}

OpPtr shockley_diode(double i_s, double v_t, Box box) { return std::make_shared<ShockleyOp>(i_s, v_t, box); }

OpPtr quartic_gradient(Box box) {
  return std::make_shared<ComponentwiseOp>(2, &cube_value, &cube_slope, nullptr, "quartic_gradient", box);
}

OpPtr preconditioner(PreconditionerKind kind, Box box) {
  switch (kind) {
    case PreconditionerKind::identity:
      return std::make_shared<ComponentwiseOp>(2, &ident_value, &ident_slope, nullptr, "slope(identity)", box);
    case PreconditionerKind::clip:
      return std::make_shared<ComponentwiseOp>(2, &clip_value, &clip_slope, nullptr, "slope(clip)", box);
    case PreconditionerKind::arcsinh:
      return std::make_shared<ComponentwiseOp>(2, &asinh_value, &asinh_slope, nullptr, "slope(arcsinh)", box);
  }
  fail(ErrorCode::invalid_argument, "unknown preconditioner kind");
}

// ===========================================================================
// Combinators
// ===========================================================================

namespace {

class ScaleOp final : public SetValuedOp {
 public:
  ScaleOp(double c, OpPtr a) : SetValuedOp(a->box()), c_(c), a_(std::move(a)) {
    if (c_ == 0.0) fail(ErrorCode::invalid_argument, "scale_op: zero factor");
  }

  [[nodiscard]] Index dim() const override { return a_->dim(); }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    return map_outputs(a_->eval(x), [&](const Vec& u) { return Vec(c_ * u); });
  }
  [[nodiscard]] std::string tag() const override { return "scale(" + a_->tag() + ")"; }
  [[nodiscard]] bool single_valued() const override { return a_->single_valued(); }
  [[nodiscard]] std::vector<Vec> sample_domain(int count, std::uint64_t seed) const override {
    return a_->sample_domain(count, seed);
  }
  [[nodiscard]] std::optional<AffineForm> affine_form() const override {
    if (auto f = a_->affine_form()) return AffineForm{c_ * f->matrix, c_ * f->offset};
    return std::nullopt;
  }
  [[nodiscard]] std::optional<DiodeLinearForm> diode_linear_form() const override {
    if (auto f = a_->diode_linear_form()) {
      f->gain *= c_;
      f->linear *= c_;
      f->offset *= c_;
      return f;
    }
    return std::nullopt;
  }
  [[nodiscard]] bool differentiable() const override { return a_->differentiable(); }
  [[nodiscard]] Mat jacobian(const Vec& x) const override { return c_ * a_->jacobian(x); }
  [[nodiscard]] bool separable() const override { return a_->separable(); }

 private:
  double c_;
  OpPtr a_;
};

class AddOp final : public SetValuedOp {
 public:
  AddOp(OpPtr a, OpPtr b) : SetValuedOp(a->box()), a_(std::move(a)), b_(std::move(b)) {
    check_same_dim(*a_, *b_, "add_op");
  }

  [[nodiscard]] Index dim() const override { return a_->dim(); }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    const auto ua = a_->eval(x);
    if (ua.empty()) return {};
    const auto ub = b_->eval(x);
    if (ub.empty()) return {};
    std::vector<Vec> outs;
    outs.reserve(ua.size() * ub.size());
    for (const Vec& u : ua)
      for (const Vec& w : ub) outs.push_back(u + w);
    return outs;
  }
  [[nodiscard]] std::string tag() const override { return a_->tag() + " + " + b_->tag(); }
  [[nodiscard]] bool single_valued() const override { return a_->single_valued() && b_->single_valued(); }
  [[nodiscard]] std::vector<Vec> sample_domain(int count, std::uint64_t seed) const override {
    return filtered_delegate_sample(*this, *a_, count, seed);
  }
  [[nodiscard]] std::optional<AffineForm> affine_form() const override {
    const auto fa = a_->affine_form();
    const auto fb = b_->affine_form();
    if (fa && fb) return AffineForm{fa->matrix + fb->matrix, fa->offset + fb->offset};
    return std::nullopt;
  }
  [[nodiscard]] std::optional<DiodeLinearForm> diode_linear_form() const override {
    auto fold = [](std::optional<DiodeLinearForm> d, const std::optional<AffineForm>& aff) -> std::optional<DiodeLinearForm> {
      if (!d || !aff) return std::nullopt;
      d->linear += aff->matrix;
      d->offset += aff->offset;
      return d;
    };
    if (auto d = fold(a_->diode_linear_form(), b_->affine_form())) return d;
    return fold(b_->diode_linear_form(), a_->affine_form());
  }
  [[nodiscard]] bool differentiable() const override { return a_->differentiable() && b_->differentiable(); }
  [[nodiscard]] Mat jacobian(const Vec& x) const override { return a_->jacobian(x) + b_->jacobian(x); }
  [[nodiscard]] bool separable() const override { return a_->separable() && b_->separable(); }

 private:
  OpPtr a_;
  OpPtr b_;
};

class TranslateOp final : public SetValuedOp {
 public:
  TranslateOp(OpPtr a, Vec t) : SetValuedOp(a->box()), a_(std::move(a)), t_(std::move(t)) {
    if (t_.size() != a_->dim()) fail(ErrorCode::dimension_mismatch, "translate_op: offset dimension");
  }

  [[nodiscard]] Index dim() const override { return a_->dim(); }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    return map_outputs(a_->eval(x), [&](const Vec& u) { return Vec(u + t_); });
  }
  [[nodiscard]] std::string tag() const override { return a_->tag() + " + const"; }
  [[nodiscard]] bool single_valued() const override { return a_->single_valued(); }
  [[nodiscard]] std::vector<Vec> sample_domain(int count, std::uint64_t seed) const override {
    return a_->sample_domain(count, seed);
  }
  [[nodiscard]] std::optional<AffineForm> affine_form() const override {
    if (auto f = a_->affine_form()) return AffineForm{f->matrix, f->offset + t_};
    return std::nullopt;
  }
  [[nodiscard]] std::optional<DiodeLinearForm> diode_linear_form() const override {
    if (auto f = a_->diode_linear_form()) {
      f->offset += t_;
      return f;
    }
    return std::nullopt;
  }
  [[nodiscard]] bool differentiable() const override { return a_->differentiable(); }
  [[nodiscard]] Mat jacobian(const Vec& x) const override { return a_->jacobian(x); }
  [[nodiscard]] bool separable() const override { return a_->separable(); }

 private:
  OpPtr a_;
  Vec t_;
};

class ComposeOp final : public SetValuedOp {
 public:
  ComposeOp(OpPtr outer, OpPtr inner) : SetValuedOp(inner->box()), outer_(std::move(outer)), inner_(std::move(inner)) {
    check_same_dim(*outer_, *inner_, "compose_op");
    if (!inner_->single_valued()) fail(ErrorCode::invalid_argument, "compose_op: inner operator must be single-valued");
  }

  [[nodiscard]] Index dim() const override { return inner_->dim(); }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    const auto ys = inner_->eval(x);
    if (ys.empty()) return {};
    return outer_->eval(ys.front());
  }
  [[nodiscard]] std::string tag() const override { return outer_->tag() + " o " + inner_->tag(); }
  [[nodiscard]] bool single_valued() const override { return outer_->single_valued(); }
  [[nodiscard]] std::vector<Vec> sample_domain(int count, std::uint64_t seed) const override {
    return filtered_delegate_sample(*this, *inner_, count, seed);
  }
  [[nodiscard]] std::optional<AffineForm> affine_form() const override {
    const auto fo = outer_->affine_form();
    const auto fi = inner_->affine_form();
    if (fo && fi) return AffineForm{fo->matrix * fi->matrix, fo->matrix * fi->offset + fo->offset};
    return std::nullopt;
  }
  [[nodiscard]] bool differentiable() const override { return outer_->differentiable() && inner_->differentiable(); }
  [[nodiscard]] Mat jacobian(const Vec& x) const override {
    const auto ys = inner_->eval(x);
    if (ys.empty()) fail(ErrorCode::invalid_argument, "jacobian outside the domain");
    return outer_->jacobian(ys.front()) * inner_->jacobian(x);
  }
  [[nodiscard]] bool separable() const override { return outer_->separable() && inner_->separable(); }

 private:
  OpPtr outer_;
  OpPtr inner_;
};

class LinearImageOp final : public SetValuedOp {
 public:
  LinearImageOp(Mat matrix, OpPtr a) : SetValuedOp(a->box()), matrix_(std::move(matrix)), a_(std::move(a)) {
    check_square(matrix_, "linear_image_op");
    if (matrix_.rows() != a_->dim()) fail(ErrorCode::dimension_mismatch, "linear_image_op: matrix dimension");
  }

  [[nodiscard]] Index dim() const override { return a_->dim(); }
  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    return map_outputs(a_->eval(x), [&](const Vec& u) { return Vec(matrix_ * u); });
  }
  [[nodiscard]] std::string tag() const override { return "M o " + a_->tag(); }
  [[nodiscard]] bool single_valued() const override { return a_->single_valued(); }
  [[nodiscard]] std::vector<Vec> sample_domain(int count, std::uint64_t seed) const override {
    return a_->sample_domain(count, seed);
  }
  [[nodiscard]] std::optional<AffineForm> affine_form() const override {
    if (auto f = a_->affine_form()) return AffineForm{matrix_ * f->matrix, matrix_ * f->offset};
    return std::nullopt;
  }
  [[nodiscard]] std::optional<DiodeLinearForm> diode_linear_form() const override {
    if (auto f = a_->diode_linear_form()) {
      f->gain = matrix_ * f->gain;
      f->linear = matrix_ * f->linear;
      f->offset = matrix_ * f->offset;
      return f;
    }
    return std::nullopt;
  }
  [[nodiscard]] bool differentiable() const override { return a_->differentiable(); }
  [[nodiscard]] Mat jacobian(const Vec& x) const override { return matrix_ * a_->jacobian(x); }
  [[nodiscard]] bool separable() const override { return a_->separable() && matrix_.isDiagonal(); }

 private:
  Mat matrix_;
  OpPtr a_;
};

}  // namespace

OpPtr scale_op(double c, OpPtr a) { return std::make_shared<ScaleOp>(c, std::move(a)); }

OpPtr add_op(OpPtr a, OpPtr b) { return std::make_shared<AddOp>(std::move(a), std::move(b)); }

OpPtr sum_with_linear(OpPtr a, Mat matrix) {
  auto lin = linear_op(std::move(matrix), a->box());
  return add_op(std::move(a), std::move(lin));
}

OpPtr translate_op(OpPtr a, Vec t) { return std::make_shared<TranslateOp>(std::move(a), std::move(t)); }

OpPtr compose_op(OpPtr outer, OpPtr inner) { return std::make_shared<ComposeOp>(std::move(outer), std::move(inner)); }

OpPtr linear_image_op(Mat matrix, OpPtr a) { return std::make_shared<LinearImageOp>(std::move(matrix), std::move(a)); }

OpPtr id_minus(OpPtr a) {
  auto ident = identity_op(a->dim(), a->box());
  return add_op(std::move(ident), scale_op(-1.0, std::move(a)));
}

OpPtr inverse_op(const OpPtr& a) {
  const auto form = a->affine_form();
  if (!form) fail(ErrorCode::unsupported, "inverse_op: only affine operators are invertible in closed form");
  Eigen::FullPivLU<Mat> lu(form->matrix);
  if (!lu.isInvertible()) fail(ErrorCode::unsupported, "inverse_op: operator matrix is singular");
  const Mat inv = lu.inverse();
  return std::make_shared<AffineOp>(inv, Vec(-inv * form->offset), a->tag() + "^-1", a->box());
}

}  // namespace srgpair
