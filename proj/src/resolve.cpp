#include "srgpair/resolve.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

namespace srgpair {

namespace {

constexpr int kMaxKktDim = 8;

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxKktDim, kMaxKktDim>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxKktDim, 1>;

struct DiodeState {
  std::uint32_t mask = 0;
  std::vector<Index> active;
  SmallMat kkt;
  SmallMat inverse;
  bool usable = false;
};

enum class Method { affine, active_set, separable, newton };

Vec single_output(const SetValuedOp& op, const Vec& x) {
  auto outs = op.eval(x);
  if (outs.empty()) fail(ErrorCode::empty_domain, "point outside the domain of '" + op.tag() + "'");
  return std::move(outs.front());
}

}  // namespace

struct InclusionSolver::Impl {
  OpPtr a;
  OpPtr f;
  double gamma = 1.0;
  InclusionOptions options;
  Method method = Method::newton;

  Mat affine_matrix;
  Vec affine_offset;
  Eigen::FullPivLU<Mat> affine_lu;

  DiodeLinearForm form;
  AffineForm f_affine;
  Mat combined_linear;
  Vec combined_offset;
  DiodeLinearForm residual_form;
  std::vector<DiodeState> states;
  mutable std::atomic<std::uint64_t> ties{0};

  [[nodiscard]] Vec solve_affine(const Vec& y) const;
  [[nodiscard]] Vec solve_active_set(const Vec& y) const;
  [[nodiscard]] Vec solve_separable(const Vec& y, const Vec& start) const;
  [[nodiscard]] Vec solve_newton(const Vec& y, const Vec& start) const;
  [[nodiscard]] Vec pick_start(const Vec& y, const Vec& start) const;
  [[nodiscard]] double component_value(const Vec& x, Index k, double y_k) const;
  [[nodiscard]] double component_slope(const Vec& x, Index k) const;
};

InclusionSolver::InclusionSolver(OpPtr a, OpPtr f, double gamma, InclusionOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!a || !f) fail(ErrorCode::invalid_argument, "inclusion solver needs two operators");
  if (a->dim() != f->dim()) fail(ErrorCode::dimension_mismatch, "inclusion operands have different dimensions");
  if (!f->single_valued()) fail(ErrorCode::invalid_argument, "inclusion solver needs a single-valued F");
  if (!(gamma > 0.0)) fail(ErrorCode::invalid_argument, "inclusion solver needs gamma > 0");
  impl_->a = std::move(a);
  impl_->f = std::move(f);
  impl_->gamma = gamma;
  impl_->options = options;
  Impl& im = *impl_;
  const Index n = im.a->dim();

  const auto a_affine = im.a->affine_form();
  const auto f_affine = im.f->affine_form();
  const auto a_diode = im.a->diode_linear_form();
  const auto hint = options.hint;

  const bool can_affine = a_affine.has_value() && f_affine.has_value();
  const bool can_active = a_diode.has_value() && f_affine.has_value();
  const bool can_separable = im.a->single_valued() && im.a->separable() && im.f->separable();
  const bool can_newton = im.a->single_valued() && im.a->differentiable() && im.f->differentiable();

  const auto want = [&](Method m, bool can) {
    return can && (hint == SolverHint::automatic ||
                   (hint == SolverHint::affine && m == Method::affine) ||
                   (hint == SolverHint::active_set && m == Method::active_set) ||
                   (hint == SolverHint::separable && m == Method::separable) ||
                   (hint == SolverHint::newton && m == Method::newton));
  };

  if (want(Method::affine, can_affine)) {
    im.method = Method::affine;
    im.affine_matrix = gamma * a_affine->matrix + f_affine->matrix;
    im.affine_offset = gamma * a_affine->offset + f_affine->offset;
    im.affine_lu.compute(im.affine_matrix);
    if (!im.affine_lu.isInvertible())
      fail(ErrorCode::solver_failure, "gamma*A + F is singular");
    return;
  }

  if (want(Method::active_set, can_active)) {
    im.method = Method::active_set;
    im.form = *a_diode;
    im.f_affine = *f_affine;
    const auto d = static_cast<int>(im.form.diode_inputs.size());
    if (n + d > kMaxKktDim)
      fail(ErrorCode::unsupported, "diode-state enumeration limited to small systems");
    im.combined_linear = gamma * im.form.linear + im.f_affine.matrix;
    im.combined_offset = gamma * im.form.offset + im.f_affine.offset;
    im.residual_form.dim = n;
    im.residual_form.diode_inputs = im.form.diode_inputs;
    im.residual_form.gain = gamma * im.form.gain;
    im.residual_form.linear = im.combined_linear;
    im.residual_form.offset = im.combined_offset;

    // One KKT system per diode state, ordered so the first consistent state
    // is the smallest active set.
    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) masks.push_back(mask);
    std::sort(masks.begin(), masks.end(), [](std::uint32_t l, std::uint32_t r) {
      const int pl = std::popcount(l);
      const int pr = std::popcount(r);
      return pl != pr ? pl < pr : l < r;
    });
    for (const std::uint32_t mask : masks) {
      DiodeState state;
      state.mask = mask;
      for (int j = 0; j < d; ++j)
        if (mask & (1u << j)) state.active.push_back(j);
      const auto s = static_cast<Index>(state.active.size());
      SmallMat kkt = SmallMat::Zero(n + s, n + s);
      kkt.topLeftCorner(n, n) = im.combined_linear;
      for (Index p = 0; p < s; ++p) {
        kkt.block(0, n + p, n, 1) = gamma * im.form.gain.col(state.active[static_cast<std::size_t>(p)]);
        kkt(n + p, im.form.diode_inputs[static_cast<std::size_t>(state.active[static_cast<std::size_t>(p)])]) = 1.0;
      }
      Eigen::FullPivLU<SmallMat> lu(kkt);
      state.usable = lu.isInvertible();
      if (state.usable) {
        state.kkt = kkt;
        state.inverse = lu.inverse();
      }
      im.states.push_back(std::move(state));
    }
    if (std::none_of(im.states.begin(), im.states.end(), [](const DiodeState& s) { return s.usable; }))
      fail(ErrorCode::solver_failure, "every diode-state system is singular");
    return;
  }

  if (want(Method::separable, can_separable)) {
    im.method = Method::separable;
    return;
  }
  if (want(Method::newton, can_newton)) {
    im.method = Method::newton;
    return;
  }
  fail(ErrorCode::unsupported, "no inclusion sub-solver matches the pair ('" + im.a->tag() + "', '" +
                                   im.f->tag() + "')");
}

InclusionSolver::~InclusionSolver() = default;
InclusionSolver::InclusionSolver(InclusionSolver&&) noexcept = default;
InclusionSolver& InclusionSolver::operator=(InclusionSolver&&) noexcept = default;

Index InclusionSolver::dim() const { return impl_->a->dim(); }

std::uint64_t InclusionSolver::boundary_ties() const { return impl_->ties.load(std::memory_order_relaxed); }

const char* InclusionSolver::method_name() const {
  switch (impl_->method) {
    case Method::affine:
      return "affine";
    case Method::active_set:
      return "active_set";
    case Method::separable:
      return "separable";
    case Method::newton:
      return "newton";
  }
  return "unknown";
}

Vec InclusionSolver::Impl::solve_affine(const Vec& y) const {
  Vec x = affine_lu.solve(y - affine_offset);
  x += affine_lu.solve(y - affine_offset - affine_matrix * x);
  const double resid = (affine_matrix * x + affine_offset - y).norm();
  if (!(resid <= options.residual_tol))
    fail(ErrorCode::solver_failure, "affine inclusion residual too large");
  return x;
}

Vec InclusionSolver::Impl::solve_active_set(const Vec& y) const {
  const Index n = form.dim;
  SmallVec rhs0 = y - combined_offset;

  const DiodeState* chosen = nullptr;
  SmallVec chosen_z;
  int accepted = 0;
  const double ftol = options.feasibility_tol;
  SmallVec rhs, z, correction;
  for (const DiodeState& state : states) {
    if (!state.usable) continue;
    const auto s = static_cast<Index>(state.active.size());
    rhs.resize(n + s);
    rhs.head(n) = rhs0;
    rhs.tail(s).setZero();
    z.noalias() = state.inverse * rhs;
    correction.noalias() = rhs - state.kkt * z;
    z.noalias() += state.inverse * correction;

    bool ok = true;
    for (Index p = 0; p < s && ok; ++p)
      if (z[n + p] < -ftol) ok = false;
    if (ok) {
      std::uint32_t j = 0;
      for (const Index input : form.diode_inputs) {
        const bool is_active = (state.mask & (1u << j)) != 0;
        ++j;
        if (!is_active && z[input] > ftol) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    ++accepted;
    if (chosen == nullptr) {
      chosen = &state;
      chosen_z = z;
    }
  }
  if (chosen == nullptr)
    fail(ErrorCode::solver_failure, "no consistent diode state for the given right-hand side");
  if (accepted > 1) ties.fetch_add(1, std::memory_order_relaxed);

  Vec x = chosen_z.head(n);
  Vec u = Vec::Zero(static_cast<Index>(form.diode_inputs.size()));
  for (std::size_t p = 0; p < chosen->active.size(); ++p)
    u[chosen->active[p]] = std::max(chosen_z[n + static_cast<Index>(p)], 0.0);
  for (std::size_t j = 0; j < form.diode_inputs.size(); ++j) {
    const Index input = form.diode_inputs[j];
    const bool is_active = (chosen->mask & (1u << j)) != 0;
    if (is_active || x[input] > 0.0) x[input] = is_active ? 0.0 : std::min(x[input], 0.0);
  }

  const double resid = (combined_linear * x + combined_offset + gamma * (form.gain * u) - y).norm();
  if (!(resid <= options.residual_tol))
    fail(ErrorCode::solver_failure, "diode-state inclusion residual too large");
  return x;
}

Vec InclusionSolver::Impl::pick_start(const Vec& y, const Vec& start) const {
  const auto usable = [&](const Vec& x) {
    return x.size() == a->dim() && x.allFinite() && !a->eval(x).empty() && !f->eval(x).empty();
  };
  if (usable(start)) return start;
  const Vec zero = Vec::Zero(a->dim());
  if (usable(zero)) return zero;
  if (usable(y)) return y;
  const double mid = 0.5 * (a->box().lo + a->box().hi);
  Vec center = Vec::Constant(a->dim(), mid);
  if (usable(center)) return center;
  fail(ErrorCode::solver_failure, "no feasible starting point for the Newton sub-solver");
}

double InclusionSolver::Impl::component_value(const Vec& x, Index k, double y_k) const {
  const auto ua = a->eval(x);
  const auto uf = f->eval(x);
  if (ua.empty() || uf.empty()) return std::numeric_limits<double>::quiet_NaN();
  return gamma * ua.front()[k] + uf.front()[k] - y_k;
}

double InclusionSolver::Impl::component_slope(const Vec& x, Index k) const {
  if (!a->differentiable() || !f->differentiable()) return std::numeric_limits<double>::quiet_NaN();
  return gamma * a->jacobian(x)(k, k) + f->jacobian(x)(k, k);
}

Vec InclusionSolver::Impl::solve_separable(const Vec& y, const Vec& start) const {
  Vec x = pick_start(y, start);
  const Index n = a->dim();
  for (Index k = 0; k < n; ++k) {
    double t = x[k];
    double value = component_value(x, k, y[k]);
    if (std::isnan(value)) fail(ErrorCode::solver_failure, "separable start left the domain");

    // Expand alternating probes around the start until the component residual
    // changes sign; probes outside the domain clamp that direction.
    double lo = t;
    double hi = t;
    double lo_val = value;
    bool bracketed = value == 0.0;
    double step = std::max(1.0, std::abs(t));
    double edge_neg = -std::numeric_limits<double>::infinity();
    double edge_pos = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 90 && !bracketed; ++round) {
      const bool positive_side = (round % 2) == 0;
      double probe = positive_side ? t + step : t - step;
      probe = std::clamp(probe, edge_neg, edge_pos);
      x[k] = probe;
      const double pv = component_value(x, k, y[k]);
      if (std::isnan(pv)) {
        if (positive_side)
          edge_pos = probe - 1e-12 * std::max(1.0, std::abs(probe));
        else
          edge_neg = probe + 1e-12 * std::max(1.0, std::abs(probe));
      } else if ((pv <= 0.0) != (value <= 0.0)) {
        lo = std::min(t, probe);
        hi = std::max(t, probe);
        lo_val = lo == probe ? pv : value;
        bracketed = true;
      } else if (std::abs(pv) < std::abs(value)) {
        // keep the better endpoint to tighten future brackets
        t = probe;
        value = pv;
        if (std::abs(value) <= options.newton_tol) {
          bracketed = true;
          lo = hi = probe;
          lo_val = pv;
        }
      }
      if (positive_side) step *= 2.0;
    }
    if (!bracketed) fail(ErrorCode::solver_failure, "no sign change found for a separable component");

    double cur = 0.5 * (lo + hi);
    if (lo == hi) cur = lo;
    int stalled = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < options.max_newton_iterations; ++iter) {
      x[k] = cur;
      const double fv = component_value(x, k, y[k]);
      if (std::isnan(fv)) fail(ErrorCode::internal, "separable iterate left the domain");
      if (std::abs(fv) <= options.newton_tol) break;
      if ((fv <= 0.0) == (lo_val <= 0.0)) {
        lo = cur;
        lo_val = fv;
      } else {
        hi = cur;
      }
      if (std::abs(fv) < 0.5 * best) {
        best = std::abs(fv);
        stalled = 0;
      } else {
        ++stalled;
      }
      const double slope = component_slope(x, k);
      double next = cur - fv / slope;
      if (std::isnan(next) || next <= lo || next >= hi || stalled >= 5) {
        next = 0.5 * (lo + hi);
        stalled = 0;
      }
      if (hi - lo <= 1e-16 * std::max(1.0, std::abs(cur))) {
        cur = 0.5 * (lo + hi);
        x[k] = cur;
        break;
      }
      cur = next;
    }
    x[k] = cur;
    const double fv = component_value(x, k, y[k]);
    if (std::isnan(fv) || std::abs(fv) > options.residual_tol)
      fail(ErrorCode::solver_failure, "separable component did not converge");
  }
  return x;
}

Vec InclusionSolver::Impl::solve_newton(const Vec& y, const Vec& start) const {
  Vec x = pick_start(y, start);
  const auto residual_at = [&](const Vec& p) -> Vec {
    const auto ua = a->eval(p);
    const auto uf = f->eval(p);
    if (ua.empty() || uf.empty()) return Vec();
    return gamma * ua.front() + uf.front() - y;
  };

  Vec phi = residual_at(x);
  if (phi.size() == 0) fail(ErrorCode::solver_failure, "newton start left the domain");
  for (int iter = 0; iter < options.max_newton_iterations; ++iter) {
    const double norm = phi.norm();
    if (norm <= options.newton_tol) return x;
    const Mat jac = gamma * a->jacobian(x) + f->jacobian(x);
    const Vec step = jac.fullPivLu().solve(-phi);
    if (!step.allFinite()) fail(ErrorCode::solver_failure, "newton step is not finite");

    double t = 1.0;
    bool advanced = false;
    for (int halving = 0; halving < 45; ++halving, t *= 0.5) {
      const Vec trial = x + t * step;
      const Vec trial_phi = residual_at(trial);
      if (trial_phi.size() == 0) continue;
      if (trial_phi.norm() <= (1.0 - 1e-4 * t) * norm) {
        x = trial;
        phi = trial_phi;
        advanced = true;
        break;
      }
    }
    if (!advanced) fail(ErrorCode::solver_failure, "newton line search stalled");
  }
  fail(ErrorCode::solver_failure, "newton did not converge within the iteration budget");
}

Vec InclusionSolver::solve(const Vec& y) const { return solve(y, Vec()); }

Vec InclusionSolver::solve(const Vec& y, const Vec& start) const {
  if (y.size() != impl_->a->dim()) fail(ErrorCode::dimension_mismatch, "right-hand side has wrong dimension");
  switch (impl_->method) {
    case Method::affine:
      return impl_->solve_affine(y);
    case Method::active_set:
      return impl_->solve_active_set(y);
    case Method::separable:
      return impl_->solve_separable(y, start);
    case Method::newton:
      return impl_->solve_newton(y, start);
  }
  fail(ErrorCode::internal, "unreachable solver method");
}

double InclusionSolver::residual(const Vec& x, const Vec& y) const {
  const Impl& im = *impl_;
  if (im.method == Method::active_set) return diode_inclusion_residual(im.residual_form, x, y);
  const auto ua = im.a->eval(x);
  const auto uf = im.f->eval(x);
  if (ua.empty() || uf.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& u : ua) best = std::min(best, (im.gamma * u + uf.front() - y).norm());
  return best;
}

double diode_inclusion_residual(const DiodeLinearForm& form, const Vec& x, const Vec& target) {
  if (x.size() != form.dim || target.size() != form.dim)
    fail(ErrorCode::dimension_mismatch, "residual arguments have wrong dimension");
  const Vec r0 = target - form.linear * x - form.offset;
  const Vec u = form.gain.colPivHouseholderQr().solve(r0);
  double viol = (form.gain * u - r0).norm();
  for (std::size_t j = 0; j < form.diode_inputs.size(); ++j) {
    const double v = x[form.diode_inputs[j]];
    const double uj = u[static_cast<Index>(j)];
    viol = std::max({viol, v, -uj, std::abs(uj * v)});
  }
  return std::max(viol, 0.0);
}

namespace {

class ResolventOp final : public SetValuedOp {
 public:
  ResolventOp(OpPtr a, OpPtr f, double gamma, InclusionOptions options, bool warped)
      : SetValuedOp(f->box()),
        solver_(std::make_shared<InclusionSolver>(a, f, gamma, options)),
        f_(std::move(f)),
        warped_(warped),
        tag_((warped ? std::string("warped_resolvent(") : std::string("transformed_resolvent(")) + a->tag() +
             ", " + f_->tag() + ")") {}

  [[nodiscard]] Index dim() const override { return f_->dim(); }

  [[nodiscard]] std::vector<Vec> eval(const Vec& x) const override {
    try {
      if (warped_) {
        auto fx = f_->eval(x);
        if (fx.empty()) return {};
        return {solver_->solve(fx.front(), x)};
      }
      const Vec w = solver_->solve(x, x);
      auto fw = f_->eval(w);
      if (fw.empty()) fail(ErrorCode::internal, "inclusion solution left the domain of F");
      return {std::move(fw.front())};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::solver_failure || e.code() == ErrorCode::empty_domain) return {};
      throw;
    }
  }

  [[nodiscard]] std::string tag() const override { return tag_; }
  [[nodiscard]] bool single_valued() const override { return true; }

 private:
  std::shared_ptr<const InclusionSolver> solver_;
  OpPtr f_;
  bool warped_;
  std::string tag_;
};

}  // namespace

OpPtr transformed_resolvent(OpPtr a, OpPtr f, double gamma, InclusionOptions options) {
  return std::make_shared<ResolventOp>(std::move(a), std::move(f), gamma, options, false);
}

OpPtr warped_resolvent(OpPtr a, OpPtr f, double gamma, InclusionOptions options) {
  return std::make_shared<ResolventOp>(std::move(a), std::move(f), gamma, options, true);
}

CongruentPair congruence_transform(const OpPtr& a, const OpPtr& f, const Mat& m) {
  if (!f->single_valued()) fail(ErrorCode::invalid_argument, "congruence transform needs a single-valued F");
  Eigen::FullPivLU<Mat> lu(m);
  if (!lu.isInvertible()) fail(ErrorCode::invalid_argument, "congruence transform needs an invertible matrix");
  const Mat inv = lu.inverse();
  CongruentPair pair;
  pair.a = linear_image_op(inv.transpose(), compose_op(a, linear_op(inv, a->box())));
  pair.f = compose_op(linear_op(m, f->box()), compose_op(f, linear_op(inv, f->box())));
  return pair;
}

}  // namespace srgpair
