#include "kpinn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kpinn {

namespace {

constexpr double kHalfPi = kPi / 2.0;
constexpr double kThreeHalfPi = 3.0 * kPi / 2.0;

double overlap(double a, double b, double lo, double hi) {
  return std::max(0.0, std::min(b, hi) - std::max(a, lo));
}

// antiderivative of the polynomial bump 6/pi^3 (3pi/2 - x)(x - pi/2)
//   = 6/pi^3 (pi^2/4 - (x - pi)^2)
double poly_antideriv(double x) {
  const double s = x - kPi;
  return 6.0 / (kPi * kPi * kPi) * (kPi * kPi / 4.0 * x - s * s * s / 3.0);
}

void check_domain(double theta) {
  if (!(theta >= 0.0 && theta <= kTwoPi))
    throw std::domain_error("theta outside [0, 2pi]");
}

}  // namespace

const char* ic_name(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::kPolynomial: return "poly";
    case InitialCondition::kDirac: return "dirac";
    case InitialCondition::kPiecewise: return "piecewise";
  }
  return "?";
}

InitialCondition parse_ic(const std::string& s) {
  if (s == "poly" || s == "polynomial") return InitialCondition::kPolynomial;
  if (s == "dirac") return InitialCondition::kDirac;
  if (s == "piecewise") return InitialCondition::kPiecewise;
  throw std::invalid_argument("unknown initial condition '" + s +
                              "' (expected poly|dirac|piecewise)");
}

void ProblemSpec::validate() const {
  if (!(K > 0.0)) throw std::invalid_argument("ProblemSpec: K must be > 0");
  if (!(T > 0.0)) throw std::invalid_argument("ProblemSpec: T must be > 0");
  if (ic == InitialCondition::kDirac && !(eps > 0.0 && eps < kPi / 4.0))
    throw std::invalid_argument("ProblemSpec: eps must lie in (0, pi/4) for the Dirac IC");
}

QuadratureRule QuadratureRule::uniform(int n_q) {
  if (n_q < 1) throw std::invalid_argument("QuadratureRule: n_q must be >= 1");
  QuadratureRule q;
  q.n_q = n_q;
  q.dphi = kTwoPi / n_q;
  q.nodes.resize(static_cast<std::size_t>(n_q));
  for (int j = 0; j < n_q; ++j) q.nodes[static_cast<std::size_t>(j)] = j * q.dphi;
  return q;
}

double initial_condition(const ProblemSpec& spec, double theta) {
  check_domain(theta);
  switch (spec.ic) {
    case InitialCondition::kPolynomial:
      if (theta >= kHalfPi && theta <= kThreeHalfPi)
        return 6.0 / (kPi * kPi * kPi) * (kThreeHalfPi - theta) * (theta - kHalfPi);
      return 0.0;
    case InitialCondition::kPiecewise:
      return (theta >= kHalfPi && theta <= kThreeHalfPi) ? 2.0 / (3.0 * kPi)
                                                         : 1.0 / (3.0 * kPi);
    case InitialCondition::kDirac: {
      const double inv2e = 1.0 / (2.0 * spec.eps);
      double u = 0.0;
      if (std::abs(theta - 3.0 * kPi / 4.0) < spec.eps) u += 0.25 * inv2e;
      if (std::abs(theta - 5.0 * kPi / 4.0) < spec.eps) u += 0.25 * inv2e;
      if (theta >= kHalfPi && theta < kThreeHalfPi) u += 0.5;  // H(x)=1 iff x>=0
      return u;
    }
  }
  return 0.0;
}

double ic_cell_average(const ProblemSpec& spec, double a, double b) {
  if (!(a < b)) throw std::domain_error("ic_cell_average: need a < b");
  check_domain(a);
  check_domain(b);
  const double len = b - a;
  switch (spec.ic) {
    case InitialCondition::kPolynomial: {
      const double lo = std::max(a, kHalfPi);
      const double hi = std::min(b, kThreeHalfPi);
      if (hi <= lo) return 0.0;
      return (poly_antideriv(hi) - poly_antideriv(lo)) / len;
    }
    case InitialCondition::kPiecewise: {
      const double ov = overlap(a, b, kHalfPi, kThreeHalfPi);
      return (ov * 2.0 / (3.0 * kPi) + (len - ov) / (3.0 * kPi)) / len;
    }
    case InitialCondition::kDirac: {
      const double c1 = 3.0 * kPi / 4.0;
      const double c2 = 5.0 * kPi / 4.0;
      double mass = 0.25 / (2.0 * spec.eps) *
                    (overlap(a, b, c1 - spec.eps, c1 + spec.eps) +
                     overlap(a, b, c2 - spec.eps, c2 + spec.eps));
      mass += 0.5 * overlap(a, b, kHalfPi, kThreeHalfPi);
      return mass / len;
    }
  }
  return 0.0;
}

double ic_mass(const ProblemSpec& spec) {
  switch (spec.ic) {
    case InitialCondition::kPolynomial: return 1.0;   // 6/pi^3 * pi^3/6
    case InitialCondition::kPiecewise: return 1.0;    // pi*2/(3pi) + pi*1/(3pi)
    case InitialCondition::kDirac: return 0.5 + kPi / 2.0;
  }
  return 0.0;
}

double velocity_from_values(const ProblemSpec& spec, const QuadratureRule& quad,
                            std::span<const double> u_nodes, double theta) {
  double s = 0.0;
  for (int j = 0; j < quad.n_q; ++j)
    s += std::sin(theta - quad.nodes[static_cast<std::size_t>(j)]) *
         u_nodes[static_cast<std::size_t>(j)];
  return -spec.K * quad.dphi * s;
}

double dvelocity_dtheta_from_values(const ProblemSpec& spec, const QuadratureRule& quad,
                                    std::span<const double> u_nodes, double theta) {
  double s = 0.0;
  for (int j = 0; j < quad.n_q; ++j)
    s += std::cos(theta - quad.nodes[static_cast<std::size_t>(j)]) *
         u_nodes[static_cast<std::size_t>(j)];
  return -spec.K * quad.dphi * s;
}

namespace {
std::vector<double> node_values(const ParamSet& params, const NetConfig& cfg,
                                const QuadratureRule& quad, double t) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(quad.nodes.size());
  for (double phi : quad.nodes) pts.emplace_back(phi, t);
  return forward_batch(params, cfg, pts);
}
}  // namespace

double velocity(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
                const QuadratureRule& quad, double theta, double t) {
  return velocity_from_values(spec, quad, node_values(params, cfg, quad, t), theta);
}

double residual(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
                const QuadratureRule& quad, double theta, double t) {
  const ValueWithPartials y = eval_with_input_partials(params, cfg, theta, t);
  const std::vector<double> q = node_values(params, cfg, quad, t);
  const double v = velocity_from_values(spec, quad, q, theta);
  const double w = dvelocity_dtheta_from_values(spec, quad, q, theta);
  return y.du_dt + w * y.u + v * y.du_dtheta;
}

double loss_residual(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
                     const QuadratureRule& quad,
                     std::span<const std::pair<double, double>> colloc) {
  if (colloc.empty()) throw std::invalid_argument("loss_residual: empty collocation set");
  double acc = 0.0;
  for (const auto& [theta, t] : colloc) {
    const double r = residual(params, cfg, spec, quad, theta, t);
    acc += r * r;
  }
  return acc / static_cast<double>(colloc.size());
}

double loss_ic(const ParamSet& params, const NetConfig& cfg, const ProblemSpec& spec,
               std::span<const double> ic_points) {
  if (ic_points.empty()) throw std::invalid_argument("loss_ic: empty IC point set");
  double acc = 0.0;
  for (double theta : ic_points) {
    const double d = forward(params, cfg, theta, 0.0) - initial_condition(spec, theta);
    acc += d * d;
  }
  return acc / static_cast<double>(ic_points.size());
}

Var taped_total_loss(TapeNet& net, const ProblemSpec& spec, const QuadratureRule& quad,
                     std::span<const std::pair<double, double>> colloc,
                     std::span<const double> ic_points, double lam_res, double lam_ic) {
  Var total(0.0);
  if (!colloc.empty()) {
    Var lres(0.0);
    for (const auto& [theta, t] : colloc) {
      const Dual2<Var> y = net.eval(theta, t);
      Var vi(0.0);
      Var wi(0.0);
      for (int j = 0; j < quad.n_q; ++j) {
        const double phi = quad.nodes[static_cast<std::size_t>(j)];
        const Var q = net.eval_value(phi, t);
        const double scale = -spec.K * quad.dphi;
        vi = vi + Var(scale * std::sin(theta - phi)) * q;
        wi = wi + Var(scale * std::cos(theta - phi)) * q;
      }
      const Var r = y.dt + wi * y.v + vi * y.dth;
      lres = lres + r * r;
    }
    total = total + Var(lam_res) * (lres / static_cast<double>(colloc.size()));
  }
  if (!ic_points.empty()) {
    Var lic(0.0);
    for (double theta : ic_points) {
      const Var d = net.eval_value(theta, 0.0) - Var(initial_condition(spec, theta));
      lic = lic + d * d;
    }
    total = total + Var(lam_ic) * (lic / static_cast<double>(ic_points.size()));
  }
  return total;
}

}  // namespace kpinn
