#include "srgpair/iterate.hpp"

#include <algorithm>
#include <cmath>

namespace srgpair {

namespace {

void record(IterationTrace& trace, TraceMode mode, const Vec& x, double residual) {
  if (mode == TraceMode::full) trace.iterates.push_back(x);
  if (mode != TraceMode::counters) trace.residuals.push_back(residual);
}

}  // namespace

IterationTrace km_iterate(const IterationMap& map, const Vec& start, const IterationOptions& options) {
  if (!map) fail(ErrorCode::invalid_argument, "iteration map is empty");
  if (!(options.tol >= 0.0)) fail(ErrorCode::invalid_argument, "iteration tolerance must be nonnegative");
  if (options.max_iterations < 0) fail(ErrorCode::invalid_argument, "iteration budget must be nonnegative");
  if (!(options.relaxation > 0.0) || options.relaxation > 1.0)
    fail(ErrorCode::invalid_argument, "relaxation must lie in (0, 1]");

  IterationTrace trace;
  Vec x = start;
  Vec image;
  for (std::int64_t k = 0;; ++k) {
    double residual;
    if (options.residual_override) {
      residual = options.residual_override(x);
    } else {
      image = map(x);
      if (image.size() != x.size()) fail(ErrorCode::dimension_mismatch, "iteration map changed dimension");
      residual = (image - x).norm();
    }
    record(trace, options.trace, x, residual);
    trace.final_residual = residual;
    trace.iterations_used = k;
    if (!x.allFinite() || !std::isfinite(residual)) {
      trace.status = IterationStatus::diverged;
      break;
    }
    if (residual <= options.tol) {
      trace.status = IterationStatus::converged;
      break;
    }
    if (k >= options.max_iterations) {
      trace.status = IterationStatus::max_iterations;
      break;
    }
    if (options.residual_override) {
      image = map(x);
      if (image.size() != x.size()) fail(ErrorCode::dimension_mismatch, "iteration map changed dimension");
    }
    x += options.relaxation * (image - x);
  }
  trace.last = std::move(x);
  return trace;
}

std::vector<double> fejer_distances(const std::vector<Vec>& iterates, const Mat& metric, const Vec& reference) {
  std::vector<double> out;
  out.reserve(iterates.size());
  for (const Vec& x : iterates) {
    if (x.size() != reference.size() || metric.rows() != x.size() || metric.cols() != x.size())
      fail(ErrorCode::dimension_mismatch, "metric and iterates have mismatched dimensions");
    const Vec diff = x - reference;
    out.push_back(std::sqrt(std::max(0.0, diff.dot(metric * diff))));
  }
  return out;
}

IterationTrace transformed_ppa(const OpPtr& a, const OpPtr& f, const Mat& p, const Vec& start,
                               const IterationOptions& options, const InclusionOptions& inclusion) {
  if (!a || !f) fail(ErrorCode::invalid_argument, "transformed proximal point needs two operators");
  if (p.rows() != a->dim() || p.cols() != a->dim())
    fail(ErrorCode::dimension_mismatch, "preconditioner has wrong dimensions");
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, p.cwiseAbs().maxCoeff()))
    fail(ErrorCode::invalid_argument, "preconditioner must be symmetric");
  Eigen::LLT<Mat> llt(p);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::invalid_argument, "preconditioner must be positive definite");

  const OpPtr pf = compose_op(linear_op(p, f->box()), f);
  const InclusionSolver solver(a, pf, 1.0, inclusion);
  const IterationMap map = [&](const Vec& x) -> Vec {
    const Vec w = solver.solve(p * x, x);
    auto fw = f->eval(w);
    if (fw.empty()) fail(ErrorCode::solver_failure, "inclusion solution left the domain of F");
    return std::move(fw.front());
  };
  return km_iterate(map, start, options);
}

PreconditionReport check_primal_dual_preconditions(const PrimalDualProblem& problem) {
  const Index n = problem.r.rows();
  if (problem.r.cols() != n || problem.a.rows() != n || problem.a.cols() != n)
    fail(ErrorCode::dimension_mismatch, "saddle problem blocks must be square and matched");
  if (!(problem.gamma > 0.0) || !(problem.tau > 0.0))
    fail(ErrorCode::invalid_argument, "step sizes must be positive");

  PreconditionReport report;
  const double spectral = problem.r.jacobiSvd().singularValues()(0);
  report.step_product = problem.gamma * problem.tau * spectral * spectral;
  report.step_ok = report.step_product < 1.0;

  Eigen::FullPivLU<Mat> rlu(problem.r);
  if (!rlu.isInvertible()) fail(ErrorCode::invalid_argument, "gain matrix must be invertible");
  const Mat rinv = rlu.inverse();
  const Mat sym = problem.a.transpose() * rinv + rinv.transpose() * problem.a;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (sym + sym.transpose()));
  report.sym_min_eigenvalue = eig.eigenvalues().minCoeff();
  report.monotonicity_ok = report.sym_min_eigenvalue >= -1e-12 * std::max(1.0, sym.cwiseAbs().maxCoeff());
  return report;
}

PrimalDualResult primal_dual_iterate(const PrimalDualProblem& problem, const Vec& i0, const Vec& v0,
                                     const IterationOptions& options) {
  const Index n = problem.r.rows();
  if (!problem.b) fail(ErrorCode::invalid_argument, "saddle problem needs a dual operator");
  if (problem.b->dim() != n || i0.size() != n || v0.size() != n || problem.s_v.size() != n ||
      problem.s_i.size() != n)
    fail(ErrorCode::dimension_mismatch, "saddle problem pieces have mismatched dimensions");

  const PreconditionReport report = check_primal_dual_preconditions(problem);
  if (!report.step_ok)
    fail(ErrorCode::invalid_argument, "step sizes too large: gamma*tau*|gain|^2 must stay below one");
  if (!report.monotonicity_ok)
    fail(ErrorCode::invalid_argument, "primal block is not monotone against the gain inverse");

  const Mat rinv = problem.r.fullPivLu().inverse();
  const Mat rinv_t = rinv.transpose();
  Eigen::PartialPivLU<Mat> primal_lu(problem.a + rinv / problem.gamma);
  const InclusionSolver dual_solver(problem.b, linear_op(rinv_t / problem.tau), 1.0);
  const auto b_form = problem.b->diode_linear_form();

  const auto residual_at = [&](const Vec& i, const Vec& v) -> double {
    const Vec i_cand = problem.r * i;
    const Vec v_cand = problem.r.transpose() * v;
    const double primal = (problem.a * i_cand + v_cand + problem.s_v).norm();
    double dual;
    if (b_form.has_value()) {
      dual = diode_inclusion_residual(*b_form, v_cand, i_cand - problem.s_i);
    } else {
      dual = std::numeric_limits<double>::infinity();
      for (const Vec& out : problem.b->eval(v_cand))
        dual = std::min(dual, (out - (i_cand - problem.s_i)).norm());
    }
    return std::max(primal, dual);
  };

  PrimalDualResult result;
  Vec i = i0;
  Vec v = v0;
  Vec stacked(2 * n);
  for (std::int64_t k = 0;; ++k) {
    stacked << i, v;
    const double residual = residual_at(i, v);
    record(result.trace, options.trace, stacked, residual);
    result.trace.final_residual = residual;
    if (!stacked.allFinite() || !std::isfinite(residual)) {
      result.trace.status = IterationStatus::diverged;
      result.trace.iterations_used = k;
      break;
    }
    if (residual <= options.tol) {
      result.trace.status = IterationStatus::converged;
      result.trace.iterations_used = k;
      break;
    }
    if (k >= options.max_iterations) {
      result.trace.status = IterationStatus::max_iterations;
      result.trace.iterations_used = k;
      break;
    }
    const Vec ibar = primal_lu.solve(i / problem.gamma - problem.r.transpose() * v - problem.s_v);
    const Vec vbar = dual_solver.solve(-problem.r * i + v / problem.tau + 2.0 * ibar - problem.s_i, v);
    i = rinv * ibar;
    v = rinv_t * vbar;
  }

  result.trace.last = stacked;
  result.i = i;
  result.v = v;
  result.i_candidate = problem.r * i;
  result.v_candidate = problem.r.transpose() * v;
  return result;
}

}  // namespace srgpair
