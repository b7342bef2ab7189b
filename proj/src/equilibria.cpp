#include "omega_limit/equilibria.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "omega_limit/error.hpp"
#include "omega_limit/io.hpp"
#include "omega_limit/parallel.hpp"

namespace omega_limit {

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable_node: return "stable node";
    case Stability::stable_focus: return "stable focus";
    case Stability::unstable: return "unstable";
    case Stability::saddle: return "saddle";
    case Stability::saddle_focus: return "saddle-focus";
    case Stability::marginal: return "marginal";
  }
  return "unknown";
}

namespace {

constexpr int kMaxNewtonIterations = 50;
constexpr int kMaxHalvings = 20;

// Gaussian elimination with partial pivoting; false when a pivot vanishes.
bool solve_linear(Matrix a, StateVec rhs, StateVec& out) {
  const std::size_t n = a.size();
  const double scale = std::max(1.0, a.max_abs_entry());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    }
    if (std::abs(a(piv, col)) <= 1e-14 * scale) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      std::swap(rhs[col], rhs[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      rhs[r] -= f * rhs[col];
    }
  }
  out = StateVec::zeros(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * out[c];
    out[i] = s / a(i, i);
  }
  return true;
}

// Levenberg-style step (J^T J + mu I) dx = -J^T f for singular Jacobians.
StateVec regularized_step(const Matrix& j, const StateVec& f) {
  const std::size_t n = j.size();
  Matrix normal(n);
  StateVec rhs = StateVec::zeros(n);
  const double mu = 1e-8 * (1.0 + j.max_abs_entry() * j.max_abs_entry());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += j(k, r) * j(k, c);
      normal(r, c) = s + (r == c ? mu : 0.0);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += j(k, r) * f[k];
    rhs[r] = -s;
  }
  StateVec dx;
  if (!solve_linear(normal, rhs, dx)) return StateVec::zeros(n);
  return dx;
}

int count_if_re(std::span<const Complex> ev, bool negative) {
  return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](const Complex& l) {
    return negative ? l.real() < -kMarginalThreshold : l.real() > kMarginalThreshold;
  }));
}

EquilibriumReport make_report(const SystemSpec& system, const StateVec& x, int iterations) {
  EquilibriumReport rep;
  rep.location = x;
  rep.residual = system.rhs(x).norm();
  rep.eigenvalues = eigenvalues(system.jac(x));
  rep.classification = classify(rep.eigenvalues);
  rep.stable_dimension = count_if_re(rep.eigenvalues, true);
  rep.unstable_dimension = count_if_re(rep.eigenvalues, false);
  rep.iterations = iterations;
  return rep;
}

void sort_eigenvalues(std::vector<Complex>& ev) {
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
}

std::vector<Complex> quadratic_roots(double b, double c) {
  // lambda^2 + b lambda + c = 0
  const double half = -0.5 * b;
  const double disc = half * half - c;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double big = half >= 0.0 ? half + s : half - s;
    const double small = big != 0.0 ? c / big : 0.0;
    return {Complex(big, 0.0), Complex(small, 0.0)};
  }
  const double s = std::sqrt(-disc);
  return {Complex(half, s), Complex(half, -s)};
}

}  // namespace

EquilibriumReport find_equilibrium(const SystemSpec& system, const StateVec& guess, double tol) {
  if (guess.size() != system.dimension() || !guess.is_finite()) {
    throw Error(ErrorKind::invalid_input, "equilibrium guess must be finite with the system's dimension");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_input, "tolerance must be > 0");

  StateVec x = guess;
  double res = system.rhs(x).norm();
  for (int it = 0; it <= kMaxNewtonIterations; ++it) {
    if (res <= tol) return make_report(system, x, it);
    if (it == kMaxNewtonIterations) break;

    const StateVec f = system.rhs(x);
    const Matrix j = system.jac(x);
    StateVec dx;
    const bool regular = solve_linear(j, -f, dx);
    if (!regular) dx = regularized_step(j, f);

    double step = 1.0;
    bool improved = false;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      const StateVec trial = x + step * dx;
      const double trial_res = system.rhs(trial).norm();
      if (std::isfinite(trial_res) && trial_res < res) {
        x = trial;
        res = trial_res;
        improved = true;
        break;
      }
    }
    if (!improved) {
      if (!regular) {
        throw Error(ErrorKind::singularity, "singular Jacobian at " + x.to_string() + " and damped step failed");
      }
      break;
    }
  }
  throw Error(ErrorKind::convergence, "Newton did not reach residual " + format_double(tol) + " from " +
                                          guess.to_string() + " (residual " + format_double(res) + ")");
}

std::vector<EquilibriumReport> lorenz_equilibria(const LorenzParams& params) {
  params.validate();
  const SystemSpec sys = lorenz(params);
  std::vector<EquilibriumReport> out;
  out.push_back(find_equilibrium(sys, StateVec{0.0, 0.0, 0.0}));
  if (params.r > 1.0) {
    const double w = std::sqrt(params.b * (params.r - 1.0));
    out.push_back(find_equilibrium(sys, StateVec{-w, -w, params.r - 1.0}));
    out.push_back(find_equilibrium(sys, StateVec{w, w, params.r - 1.0}));
  }
  return out;
}

Complex characteristic_determinant(const Matrix& m, Complex lambda) {
  const std::size_t n = m.size();
  auto e = [&](std::size_t i, std::size_t j) { return Complex(m(i, j)) - (i == j ? lambda : Complex(0.0)); };
  if (n == 1) return e(0, 0);
  if (n == 2) return e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
  return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
         e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
}

std::vector<Complex> eigen3(const Matrix& m) {
  if (m.size() != 3) throw Error(ErrorKind::invalid_input, "eigen3 needs a 3x3 matrix");
  // lambda^3 + a lambda^2 + b lambda + c
  const double tr = m(0, 0) + m(1, 1) + m(2, 2);
  const double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                        m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const double det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                     m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                     m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  const double a = -tr, b = minors, c = -det;

  auto poly = [&](Complex l) { return ((l + a) * l + b) * l + c; };
  auto dpoly = [&](Complex l) { return (3.0 * l + 2.0 * a) * l + b; };
  auto polish_real = [&](double l) {
    for (int i = 0; i < 3; ++i) {
      const double p = ((l + a) * l + b) * l + c;
      const double dp = (3.0 * l + 2.0 * a) * l + b;
      if (dp == 0.0) break;
      const double next = l - p / dp;
      if (std::abs(((next + a) * next + b) * next + c) >= std::abs(p)) break;
      l = next;
    }
    return l;
  };

  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  std::vector<Complex> roots;
  if (disc > 0.0) {
    const double u = std::cbrt(-0.5 * q - std::copysign(std::sqrt(disc), q));
    const double v = u != 0.0 ? -p / (3.0 * u) : 0.0;
    const double real_root = polish_real(u + v + shift);
    auto pair = quadratic_roots(a + real_root, b + real_root * (a + real_root));
    roots = {Complex(real_root, 0.0), pair[0], pair[1]};
  } else if (p == 0.0) {
    roots = {Complex(shift), Complex(shift), Complex(shift)};
  } else {
    const double rad = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * rad), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.emplace_back(rad * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift, 0.0);
    }
  }

  // One Newton polish on the full characteristic polynomial.
  for (auto& l : roots) {
    const Complex dp = dpoly(l);
    if (std::abs(dp) == 0.0) continue;
    const Complex next = l - poly(l) / dp;
    if (std::abs(poly(next)) < std::abs(poly(l))) l = next;
    if (std::abs(l.imag()) <= 1e-300) l = Complex(l.real(), 0.0);
  }
  sort_eigenvalues(roots);
  return roots;
}

std::vector<Complex> eigenvalues(const Matrix& m) {
  std::vector<Complex> ev;
  switch (m.size()) {
    case 1:
      ev = {Complex(m(0, 0), 0.0)};
      break;
    case 2:
      ev = quadratic_roots(-(m(0, 0) + m(1, 1)), m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
      break;
    case 3:
      return eigen3(m);
    default:
      throw Error(ErrorKind::invalid_input, "eigenvalues need a 1x1, 2x2 or 3x3 matrix");
  }
  sort_eigenvalues(ev);
  return ev;
}

Stability classify(std::span<const Complex> ev) {
  if (ev.empty()) throw Error(ErrorKind::invalid_input, "classify needs at least one eigenvalue");
  const bool marginal = std::any_of(ev.begin(), ev.end(), [](const Complex& l) {
    return std::abs(l.real()) <= kMarginalThreshold;
  });
  if (marginal) return Stability::marginal;
  const bool oscillatory = std::any_of(ev.begin(), ev.end(), [](const Complex& l) {
    return std::abs(l.imag()) > kMarginalThreshold;
  });
  const int neg = count_if_re(ev, true);
  const int n = static_cast<int>(ev.size());
  if (neg == n) return oscillatory ? Stability::stable_focus : Stability::stable_node;
  if (neg == 0) return Stability::unstable;
  return oscillatory ? Stability::saddle_focus : Stability::saddle;
}

double max_real_part(std::span<const Complex> ev) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& l : ev) m = std::max(m, l.real());
  return m;
}

namespace {

double max_re_at_b(double r, double sigma, double b) {
  const double w = std::sqrt(b * (r - 1.0));
  const SystemSpec sys = lorenz(LorenzParams{sigma, b, r});
  return max_real_part(eigen3(sys.jac(StateVec{w, w, r - 1.0})));
}

double max_re_at_origin(double r, double sigma, double b) {
  const SystemSpec sys = lorenz(LorenzParams{sigma, b, r});
  return max_real_part(eigen3(sys.jac(StateVec{0.0, 0.0, 0.0})));
}

template <class Fn>
double bisect_sign_change(Fn g, double lo, double hi, double tol) {
  double g_lo = g(lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

bool is_zero(double v) { return std::abs(v) <= kMarginalThreshold; }

void collect_thresholds(const std::vector<BifurcationRow>& rows, double BifurcationRow::*field,
                        const std::function<double(double)>& g, std::vector<double>& out) {
  auto push = [&](double r) {
    if (out.empty() || std::abs(out.back() - r) > 1e-9) out.push_back(r);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double v = rows[i].*field;
    if (std::isnan(v)) continue;
    if (is_zero(v)) {
      push(rows[i].r);
      continue;
    }
    if (i + 1 < rows.size()) {
      const double w = rows[i + 1].*field;
      if (!std::isnan(w) && !is_zero(w) && (v < 0.0) != (w < 0.0)) {
        push(bisect_sign_change(g, rows[i].r, rows[i + 1].r, 1e-10));
      }
    }
  }
}

}  // namespace

double hopf_threshold(double r_lo, double r_hi, double tol, double sigma, double b) {
  if (!(r_lo > 1.0) || !(r_hi > r_lo) || !(tol > 0.0)) {
    throw Error(ErrorKind::invalid_input, "hopf bracket requires 1 < r_lo < r_hi and tol > 0");
  }
  auto g = [&](double r) { return max_re_at_b(r, sigma, b); };
  const double g_lo = g(r_lo), g_hi = g(r_hi);
  if (!((g_lo < 0.0 && g_hi > 0.0) || (g_lo > 0.0 && g_hi < 0.0))) {
    throw Error(ErrorKind::bracket, "max Re(lambda) at B has no sign change on [" + format_double(r_lo) + ", " +
                                        format_double(r_hi) + "]");
  }
  return bisect_sign_change(g, r_lo, r_hi, tol);
}

double hopf_threshold_analytic(double sigma, double b) { return sigma * (sigma + b + 3.0) / (sigma - b - 1.0); }

BifurcationScan pitchfork_scan(std::span<const double> r_values, double sigma, double b) {
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (!(r_values[i] > 0.0) || (i > 0 && !(r_values[i] > r_values[i - 1]))) {
      throw Error(ErrorKind::validation, "r grid must be positive and strictly increasing");
    }
  }
  BifurcationScan scan;
  scan.rows.resize(r_values.size());
  parallel_for_chunks(r_values.size(), 1, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      const double r = r_values[i];
      const auto eq = lorenz_equilibria(LorenzParams{sigma, b, r});
      BifurcationRow row{r, static_cast<int>(eq.size()), max_real_part(eq.front().eigenvalues),
                         std::numeric_limits<double>::quiet_NaN()};
      if (eq.size() == 3) row.max_re_b = max_real_part(eq.back().eigenvalues);
      scan.rows[i] = row;
    }
  });
  collect_thresholds(scan.rows, &BifurcationRow::max_re_origin,
                     [&](double r) { return max_re_at_origin(r, sigma, b); }, scan.pitchfork_thresholds);
  collect_thresholds(scan.rows, &BifurcationRow::max_re_b, [&](double r) { return max_re_at_b(r, sigma, b); },
                     scan.hopf_thresholds);
  return scan;
}

std::string bifurcation_csv(const BifurcationScan& scan) {
  CsvWriter csv({"r", "n_equilibria", "max_re_origin", "max_re_B"});
  for (const auto& row : scan.rows) {
    csv.row({row.r, static_cast<double>(row.n_equilibria), row.max_re_origin, row.max_re_b});
  }
  return csv.str();
}

}  // namespace omega_limit
