#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srgpair/common.hpp"

namespace srgpair {

/// Axis-aligned sampling box, applied per coordinate.
struct Box {
  double lo = -2.0;
  double hi = 2.0;
};

/// x -> matrix * x + offset.
struct AffineForm {
  Mat matrix;
  Vec offset;
};

/// Structured description of an operator built from ideal diodes and affine
/// parts:
///   A(x) = gain * u + linear * x + offset,  u_j in diode(x[diode_inputs[j]]).
/// Inclusion solvers enumerate diode states directly from this form.
struct DiodeLinearForm {
  Index dim = 0;
  std::vector<Index> diode_inputs;
  Mat gain;
  Mat linear;
  Vec offset;
};

/// Representative outputs reported for a diode held at its kink. The true
/// image there is the whole ray [0, inf); evaluation returns `count` points
/// evenly spaced on [0, u_max].
struct RaySpec {
  double u_max = 2.0;
  int count = 5;
};

/// Set-valued operator on R^n. eval() returns representative outputs at a
/// point; an empty list means the point lies outside the domain.
class SetValuedOp {
 public:
  virtual ~SetValuedOp() = default;

  [[nodiscard]] virtual Index dim() const = 0;
  [[nodiscard]] virtual std::vector<Vec> eval(const Vec& x) const = 0;
  [[nodiscard]] virtual std::string tag() const = 0;
  [[nodiscard]] virtual bool single_valued() const = 0;

  /// Deterministic domain samples for a fixed seed. The default draws
  /// uniformly from the box and rejects points outside the domain; operators
  /// with measure-zero multivalued sets override this to hit them.
  [[nodiscard]] virtual std::vector<Vec> sample_domain(int count, std::uint64_t seed) const;

  // Structure discovery used by solvers. All default to "no structure".
  [[nodiscard]] virtual std::optional<AffineForm> affine_form() const { return std::nullopt; }
  [[nodiscard]] virtual std::optional<DiodeLinearForm> diode_linear_form() const { return std::nullopt; }
  [[nodiscard]] virtual bool differentiable() const { return false; }
  [[nodiscard]] virtual Mat jacobian(const Vec& x) const;
  /// True when output component k depends on x_k alone.
  [[nodiscard]] virtual bool separable() const { return false; }

  [[nodiscard]] const Box& box() const { return box_; }

 protected:
  explicit SetValuedOp(Box box) : box_(box) {}

 private:
  Box box_;
};

using OpPtr = std::shared_ptr<const SetValuedOp>;

/// Derives an unrelated stream seed from a base seed and a salt.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// ===========================================================================
// Concrete operators
// ===========================================================================

[[nodiscard]] OpPtr identity_op(Index dim, Box box = {});
[[nodiscard]] OpPtr linear_op(Mat matrix, Box box = {});

/// Ideal diode on R: {0} for v < 0, the ray [0, inf) at v = 0 (reported via
/// `ray`), empty for v > 0.
[[nodiscard]] OpPtr ideal_diode(RaySpec ray = {}, Box box = {}, double kink_prob = 0.35);

/// Smooth diode i(v) = i_s * (exp(v / v_t) - 1). Arguments with v / v_t > 700
/// are treated as outside the domain.
[[nodiscard]] OpPtr shockley_diode(double i_s, double v_t, Box box = {});

/// Two-terminal coupled diode pair: outputs R * (u_1, u_2) with
/// u_k in diode(v_k) and R = [[1, -alpha_r], [-alpha_f, 1]].
[[nodiscard]] OpPtr npn_transistor(double alpha_f, double alpha_r, OpPtr diode = nullptr,
                                   Box box = {});

/// Gradient of x -> (x_1^4 + x_2^4) / 4, i.e. x -> (x_1^3, x_2^3).
[[nodiscard]] OpPtr quartic_gradient(Box box = {});

enum class PreconditionerKind { identity, clip, arcsinh };

/// Componentwise slope map on R^2: identity, clamp to [-1, 1], or asinh.
[[nodiscard]] OpPtr preconditioner(PreconditionerKind kind, Box box = {});

/// Realizes an arbitrary DiodeLinearForm as an operator. `kink_prob` is the
/// probability that a domain sample places a diode input exactly at its kink.
[[nodiscard]] OpPtr diode_linear_op(DiodeLinearForm form, std::string tag, RaySpec ray = {},
                                    Box box = {}, double kink_prob = 0.35);

// ===========================================================================
// Combinators
// ===========================================================================

[[nodiscard]] OpPtr scale_op(double c, OpPtr a);
[[nodiscard]] OpPtr add_op(OpPtr a, OpPtr b);
[[nodiscard]] OpPtr sum_with_linear(OpPtr a, Mat matrix);
/// Output translation: x -> A(x) + t.
[[nodiscard]] OpPtr translate_op(OpPtr a, Vec t);
/// outer after inner; inner must be single-valued.
[[nodiscard]] OpPtr compose_op(OpPtr outer, OpPtr inner);
/// x -> { M u : u in A(x) }.
[[nodiscard]] OpPtr linear_image_op(Mat matrix, OpPtr a);
/// Identity minus A; the residual map of a forward step.
[[nodiscard]] OpPtr id_minus(OpPtr a);
/// Inverse of an invertible affine operator.
[[nodiscard]] OpPtr inverse_op(const OpPtr& a);

// ===========================================================================
// Coupled diode pair matrices
// ===========================================================================

/// R = [[1, -alpha_r], [-alpha_f, 1]].
[[nodiscard]] Mat npn_gain(double alpha_f, double alpha_r);

/// det(R) * R^{-T} = [[1, alpha_f], [alpha_r, 1]], the canonical monotone
/// partner of the coupled diode pair.
[[nodiscard]] Mat npn_partner_matrix(double alpha_f, double alpha_r);

}  // namespace srgpair
